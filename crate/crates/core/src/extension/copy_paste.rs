//! Copy-pasting a diagram and the collapsing map back onto it.

use serde::{Deserialize, Serialize};

use crate::diagram::{CopyMeta, Diagram, DiagramData, FinitePath};
use crate::error::{Error, Result};
use crate::seglist::SourceList;

const ZIP_PATTERN_CAP: u64 = 1 << 16;

/// Copy counts per base vertex and, per copied edge, the copy index of its source.
///
/// `source_copy[n][l][j]` runs over the edges into vertex `l` of level `n + 1`
/// and gives, for copy `j` of that vertex, which copy of the base source the
/// edge starts at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyPasteSpec {
    pub copy_counts: Vec<Vec<usize>>,
    pub source_copy: Vec<Vec<Vec<SourceList>>>,
}

impl CopyPasteSpec {
    pub fn identity(base: &Diagram) -> Self {
        let copy_counts = base.level_sizes().iter().map(|&s| vec![1; s]).collect();
        let source_copy = (0..base.depth())
            .map(|n| {
                (0..base.level_size(n + 1))
                    .map(|l| vec![SourceList::run(0, base.r(n, l))])
                    .collect()
            })
            .collect();
        CopyPasteSpec {
            copy_counts,
            source_copy,
        }
    }

    pub fn copies(&self, level: usize, l: usize) -> usize {
        self.copy_counts[level][l]
    }

    pub fn source_copy(&self, n: usize, l: usize, m: u64, j: usize) -> usize {
        self.source_copy[n][l][j].get(m)
    }

    /// Shape checks against `base`, including that every copied edge starts at
    /// an existing copy of its base source.
    pub fn check(&self, base: &Diagram) -> Result<()> {
        if self.copy_counts.len() != base.depth() + 1 || self.source_copy.len() != base.depth() {
            return Err(Error::invalid("copy spec depth differs from the base"));
        }
        if self.copy_counts[0] != [1] {
            return Err(Error::invalid("the root has exactly one copy"));
        }
        for (n, counts) in self.copy_counts.iter().enumerate() {
            if counts.len() != base.level_size(n) || counts.contains(&0) {
                return Err(Error::invalid(format!("copy counts at level {n} do not fit")));
            }
        }
        for n in 0..base.depth() {
            if self.source_copy[n].len() != base.level_size(n + 1) {
                return Err(Error::invalid(format!("source copies at level {n} do not fit")));
            }
            let below = &self.copy_counts[n];
            for (l, per_copy) in self.source_copy[n].iter().enumerate() {
                if per_copy.len() != self.copy_counts[n + 1][l] {
                    return Err(Error::invalid(format!(
                        "vertex {l} at level {} needs {} copy lists",
                        n + 1,
                        self.copy_counts[n + 1][l]
                    )));
                }
                let list = base.incoming(n, l);
                for (j, sc) in per_copy.iter().enumerate() {
                    if sc.len() != list.len() {
                        return Err(Error::invalid(format!(
                            "copy {j} of vertex {l} at level {} has {} edges, base has {}",
                            n + 1,
                            sc.len(),
                            list.len()
                        )));
                    }
                    let ok = SourceList::zip_with(&[list, sc], |v| (v[1] < below[v[0]]) as usize, ZIP_PATTERN_CAP)
                        .map_err(Error::budget)?;
                    if ok.distinct() != [1] {
                        return Err(Error::invalid(format!(
                            "copy {j} of vertex {l} at level {} uses a missing source copy",
                            n + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Index of copy `j` of base vertex `l` within its level of the copied diagram.
    pub fn offsets(&self, level: usize) -> Vec<usize> {
        let mut acc = 0;
        self.copy_counts[level]
            .iter()
            .map(|&c| {
                let o = acc;
                acc += c;
                o
            })
            .collect()
    }
}

pub fn copy_paste(base: &Diagram, spec: &CopyPasteSpec) -> Result<Diagram> {
    spec.check(base)?;
    let offsets: Vec<Vec<usize>> = (0..=base.depth()).map(|n| spec.offsets(n)).collect();
    let level_sizes: Vec<usize> = spec.copy_counts.iter().map(|c| c.iter().sum()).collect();
    let mut incoming = Vec::with_capacity(base.depth());
    let mut classes = Vec::with_capacity(base.depth());
    for n in 0..base.depth() {
        let mut lists = Vec::with_capacity(level_sizes[n + 1]);
        let mut cls = Vec::new();
        for l in 0..base.level_size(n + 1) {
            for sc in &spec.source_copy[n][l] {
                let off = &offsets[n];
                lists.push(
                    SourceList::zip_with(&[base.incoming(n, l), sc], |v| off[v[0]] + v[1], ZIP_PATTERN_CAP)
                        .map_err(Error::budget)?,
                );
                if let Some(c) = base.classes(n) {
                    cls.push(c[l].clone());
                }
            }
        }
        incoming.push(lists);
        classes.push(base.is_coloured(n).then_some(cls));
    }
    let copy_meta = spec
        .copy_counts
        .iter()
        .map(|counts| {
            counts
                .iter()
                .enumerate()
                .flat_map(|(l, &c)| (0..c).map(move |j| CopyMeta { base: l, copy: j }))
                .collect()
        })
        .collect();
    Diagram::new(DiagramData {
        depth: base.depth(),
        level_sizes,
        incoming,
        edge_class: classes.iter().any(Option::is_some).then_some(classes),
        copy_meta: Some(copy_meta),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Generic,
    TwoToOne,
    ThreeToOne,
}

#[derive(Clone, Debug)]
pub struct ExtensionTriple {
    pub base: Diagram,
    pub extended: Diagram,
    pub spec: CopyPasteSpec,
    pub construction: Construction,
}

pub const TRIPLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TripleFile {
    version: u32,
    construction: Construction,
    base: DiagramData,
    spec: CopyPasteSpec,
}

impl ExtensionTriple {
    pub fn new(base: Diagram, spec: CopyPasteSpec, construction: Construction) -> Result<Self> {
        let extended = copy_paste(&base, &spec)?;
        Ok(ExtensionTriple {
            base,
            extended,
            spec,
            construction,
        })
    }

    pub fn identity(base: Diagram) -> Self {
        let spec = CopyPasteSpec::identity(&base);
        ExtensionTriple::new(base, spec, Construction::Generic).expect("identity spec fits its base")
    }

    pub fn depth(&self) -> usize {
        self.base.depth()
    }

    /// The vertex of the copied diagram standing for copy `j` of base vertex `l`.
    pub fn lifted_vertex(&self, level: usize, l: usize, j: usize) -> usize {
        self.spec.offsets(level)[l] + j
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TripleFile {
            version: TRIPLE_VERSION,
            construction: self.construction,
            base: self.base.to_data(),
            spec: self.spec.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: TripleFile = serde_json::from_str(s)?;
        if f.version != TRIPLE_VERSION {
            return Err(Error::invalid(format!("unsupported triple version {}", f.version)));
        }
        ExtensionTriple::new(Diagram::new(f.base)?, f.spec, f.construction)
    }

    /// Drops copy indices: each edge keeps its order position.
    pub fn collapse_path(&self, p: &FinitePath) -> Result<FinitePath> {
        self.extended.check_path(p)?;
        let trail = p
            .trail
            .iter()
            .enumerate()
            .map(|(i, &v)| self.extended.copy_meta(p.start_level + i, v).unwrap().base)
            .collect();
        Ok(FinitePath {
            start_level: p.start_level,
            picks: p.picks.clone(),
            trail,
        })
    }

    /// The lift of a base path ending at copy `top_copy` of its end vertex.
    pub fn lift(&self, alpha: &FinitePath, top_copy: usize) -> Result<FinitePath> {
        let end = alpha.end();
        if top_copy >= self.spec.copies(end.level, end.index) {
            return Err(Error::invalid("no such copy of the end vertex"));
        }
        let v = self.lifted_vertex(end.level, end.index, top_copy);
        self.extended
            .path_from_picks(crate::VertexRef::new(end.level, v), &alpha.picks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vershik::successor;
    use crate::VertexRef;

    fn odometer(r: &[usize]) -> Diagram {
        Diagram::from_lists(r.iter().map(|&k| vec![vec![0; k]]).collect()).unwrap()
    }

    #[test]
    fn identity_is_isomorphic() {
        let b = odometer(&[2, 3, 2]);
        let t = ExtensionTriple::identity(b.clone());
        assert_eq!(t.extended.level_sizes(), b.level_sizes());
        let p = b.path_from_picks(VertexRef::new(3, 0), &[1, 2, 0]).unwrap();
        let lifted = t.lift(&p, 0).unwrap();
        assert_eq!(t.collapse_path(&lifted).unwrap(), p);
    }

    #[test]
    fn parity_copies_on_odometer() {
        let b = odometer(&[2, 2, 2, 2]);
        let mut spec = CopyPasteSpec::identity(&b);
        for n in 1..=4 {
            spec.copy_counts[n] = vec![2];
        }
        for n in 1..4 {
            let alt = SourceList::from_slice(&[0, 1]);
            spec.source_copy[n][0] = vec![alt.clone(), alt];
        }
        spec.source_copy[0][0] = vec![SourceList::run(0, 2); 2];
        let t = ExtensionTriple::new(b.clone(), spec, Construction::Generic).unwrap();
        assert_eq!(t.extended.level_sizes(), &[1, 2, 2, 2, 2]);
        let mut p = t.extended.min_path(VertexRef::new(4, 1), 0);
        while let Some(q) = successor(&t.extended, &p) {
            let down = t.collapse_path(&p).unwrap();
            assert_eq!(
                t.collapse_path(&q).unwrap(),
                successor(&b, &down).unwrap()
            );
            p = q;
        }
    }

    #[test]
    fn bad_spec_is_rejected() {
        let b = odometer(&[2, 2]);
        let mut spec = CopyPasteSpec::identity(&b);
        spec.source_copy[1][0][0] = SourceList::from_slice(&[0, 1]);
        assert!(copy_paste(&b, &spec).is_err());
    }

    #[test]
    fn triple_json_round_trip() {
        let t = ExtensionTriple::identity(odometer(&[3, 2]));
        let j = t.to_json().unwrap();
        assert!(j.contains("\"version\":1"));
        let back = ExtensionTriple::from_json(&j).unwrap();
        assert_eq!(back.extended, t.extended);
    }
}
