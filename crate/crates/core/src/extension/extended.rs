//! Full preimages and the extended diagram of copy-sets.
//!
//! At horizon `N` the top level holds every nonempty copy-set of each base
//! vertex; lower levels hold exactly the copy-sets reached from above, which
//! is the horizon form of pruning untraversed vertices.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::diagram::{Diagram, DiagramData, FinitePath, VertexRef};
use crate::error::{Error, Result};
use crate::extension::copy_paste::ExtensionTriple;
use crate::seglist::SourceList;

const ZIP_PATTERN_CAP: u64 = 1 << 16;

/// Copy-sets along a base head, one per level; the top set holds every copy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FullPreimage {
    pub base: FinitePath,
    pub sets: Vec<Vec<usize>>,
    pub horizon: usize,
}

impl FullPreimage {
    /// Copy-set at the lowest level `>= 1`.
    pub fn level_one(&self) -> &[usize] {
        &self.sets[1.min(self.sets.len() - 1)]
    }
}

pub fn full_preimage(t: &ExtensionTriple, alpha: &FinitePath) -> Result<FullPreimage> {
    t.base.check_path(alpha)?;
    if alpha.start_level != 0 {
        return Err(Error::invalid("full preimages need a head from level 0"));
    }
    let top = alpha.end_level();
    let mut sets = vec![Vec::new(); top + 1];
    sets[top] = (0..t.spec.copies(top, alpha.trail[top])).collect();
    for n in (0..top).rev() {
        let l = alpha.trail[n + 1];
        let mut s: Vec<usize> = sets[n + 1]
            .iter()
            .map(|&j| t.spec.source_copy(n, l, alpha.picks[n], j))
            .collect();
        s.sort_unstable();
        s.dedup();
        sets[n] = s;
    }
    Ok(FullPreimage {
        base: alpha.clone(),
        sets,
        horizon: top,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FibreCount {
    pub count: usize,
    /// Level the head reaches; the count can only shrink as this grows.
    pub horizon: usize,
}

pub fn fibre_cardinality(t: &ExtensionTriple, alpha: &FinitePath) -> Result<FibreCount> {
    let fp = full_preimage(t, alpha)?;
    Ok(FibreCount {
        count: fp.level_one().len(),
        horizon: fp.horizon,
    })
}

pub type CopySet = (usize, Vec<usize>);

#[derive(Clone, Debug)]
pub struct ExtendedDiagram {
    pub diagram: Diagram,
    pub horizon: usize,
    sets: Vec<Vec<CopySet>>,
    index: Vec<HashMap<CopySet, usize>>,
}

#[derive(Clone, Copy, Debug)]
pub struct ExtendedLimits {
    pub max_copies: usize,
    pub max_vertices_per_level: usize,
}

impl Default for ExtendedLimits {
    fn default() -> Self {
        ExtendedLimits {
            max_copies: 12,
            max_vertices_per_level: 1 << 14,
        }
    }
}

pub fn extended_diagram(t: &ExtensionTriple, horizon: usize) -> Result<ExtendedDiagram> {
    extended_diagram_with(t, horizon, ExtendedLimits::default())
}

pub fn extended_diagram_with(
    t: &ExtensionTriple,
    horizon: usize,
    limits: ExtendedLimits,
) -> Result<ExtendedDiagram> {
    if horizon == 0 || horizon > t.depth() {
        return Err(Error::invalid(format!("horizon {horizon} outside 1..={}", t.depth())));
    }
    let mut sets: Vec<Vec<CopySet>> = vec![Vec::new(); horizon + 1];
    let mut top = Vec::new();
    for l in 0..t.base.level_size(horizon) {
        let c = t.spec.copies(horizon, l);
        if c > limits.max_copies {
            return Err(Error::budget(format!("vertex {l} has {c} copies, cap is {}", limits.max_copies)));
        }
        for mask in 1u32..(1 << c) {
            top.push((l, (0..c).filter(|j| mask >> j & 1 == 1).collect::<Vec<_>>()));
        }
    }
    top.sort();
    if top.len() > limits.max_vertices_per_level {
        return Err(Error::budget(format!("{} copy-sets at the horizon", top.len())));
    }
    sets[horizon] = top;
    let mut incoming: Vec<Vec<SourceList>> = vec![Vec::new(); horizon];
    for n in (0..horizon).rev() {
        let mut keys: Vec<CopySet> = Vec::new();
        let mut ids: HashMap<CopySet, usize> = HashMap::new();
        let mut lists = Vec::with_capacity(sets[n + 1].len());
        for (l, j_set) in &sets[n + 1] {
            let mut parts: Vec<&SourceList> = vec![t.base.incoming(n, *l)];
            parts.extend(j_set.iter().map(|&j| &t.spec.source_copy[n][*l][j]));
            let list = SourceList::zip_with(
                &parts,
                |v| {
                    let mut js = v[1..].to_vec();
                    js.sort_unstable();
                    js.dedup();
                    let key = (v[0], js);
                    *ids.entry(key.clone()).or_insert_with(|| {
                        keys.push(key);
                        keys.len() - 1
                    })
                },
                ZIP_PATTERN_CAP,
            )
            .map_err(Error::budget)?;
            lists.push(list);
        }
        if keys.len() > limits.max_vertices_per_level {
            return Err(Error::budget(format!("{} copy-sets at level {n}", keys.len())));
        }
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let mut rank = vec![0; keys.len()];
        for (i, &o) in order.iter().enumerate() {
            rank[o] = i;
        }
        incoming[n] = lists.iter().map(|l| l.map(|id| rank[id])).collect();
        sets[n] = order.iter().map(|&o| keys[o].clone()).collect();
    }
    let classes: Vec<_> = (0..horizon)
        .map(|n| {
            t.base
                .classes(n)
                .map(|c| sets[n + 1].iter().map(|(l, _)| c[*l].clone()).collect())
        })
        .collect();
    let diagram = Diagram::new(DiagramData {
        depth: horizon,
        level_sizes: sets.iter().map(Vec::len).collect(),
        incoming,
        edge_class: classes.iter().any(Option::is_some).then_some(classes),
        copy_meta: None,
    })?;
    let index = sets
        .iter()
        .map(|lvl| lvl.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect())
        .collect();
    Ok(ExtendedDiagram {
        diagram,
        horizon,
        sets,
        index,
    })
}

impl ExtendedDiagram {
    pub fn vertex(&self, level: usize, l: usize, copies: &[usize]) -> Option<usize> {
        self.index[level].get(&(l, copies.to_vec())).copied()
    }

    pub fn copy_set(&self, level: usize, v: usize) -> &CopySet {
        &self.sets[level][v]
    }

    pub fn level_sets(&self, level: usize) -> &[CopySet] {
        &self.sets[level]
    }

    /// Level-1 membership in the set of vertices with at least two copies.
    pub fn plus_mask(&self) -> Vec<bool> {
        self.sets[1].iter().map(|(_, j)| j.len() >= 2).collect()
    }

    /// The vertex holding every copy of base vertex `l` at the horizon.
    pub fn full_top(&self, l: usize) -> usize {
        let n = self
            .sets[self.horizon]
            .iter()
            .filter(|(x, _)| *x == l)
            .map(|(_, j)| j.len())
            .max()
            .unwrap();
        self.vertex(self.horizon, l, &(0..n).collect::<Vec<_>>()).unwrap()
    }

    /// The path of copy-sets lying over `alpha` with the given top copy-set.
    pub fn path_over(&self, alpha: &FinitePath, top: &[usize]) -> Result<FinitePath> {
        if alpha.start_level != 0 || alpha.end_level() != self.horizon {
            return Err(Error::invalid("base head must run from level 0 to the horizon"));
        }
        let v = self
            .vertex(self.horizon, alpha.trail[self.horizon], top)
            .ok_or_else(|| Error::invalid("no such copy-set at the horizon"))?;
        self.diagram
            .path_from_picks(VertexRef::new(self.horizon, v), &alpha.picks)
    }

    /// The full preimage of `alpha` as a path in this diagram.
    pub fn preimage_path(&self, alpha: &FinitePath) -> Result<FinitePath> {
        let v = self.full_top(alpha.trail[self.horizon]);
        let copies = self.sets[self.horizon][v].1.clone();
        self.path_over(alpha, &copies)
    }

    /// The base vertex under each vertex of a path here.
    pub fn project(&self, p: &FinitePath) -> FinitePath {
        FinitePath {
            start_level: p.start_level,
            picks: p.picks.clone(),
            trail: p
                .trail
                .iter()
                .enumerate()
                .map(|(i, &v)| self.sets[p.start_level + i][v].0)
                .collect(),
        }
    }

    /// Copy-set sizes per level, largest first.
    pub fn size_histogram(&self) -> Vec<BTreeMap<usize, usize>> {
        self.sets
            .iter()
            .map(|lvl| {
                let mut h = BTreeMap::new();
                for (_, j) in lvl {
                    *h.entry(j.len()).or_insert(0) += 1;
                }
                h
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::copy_paste::{Construction, CopyPasteSpec};
    use crate::vershik::successor;

    fn odometer(r: &[usize]) -> Diagram {
        Diagram::from_lists(r.iter().map(|&k| vec![vec![0; k]]).collect()).unwrap()
    }

    fn parity_triple() -> ExtensionTriple {
        let b = odometer(&[2, 3, 3, 3]);
        let mut spec = CopyPasteSpec::identity(&b);
        for n in 1..=4 {
            spec.copy_counts[n] = vec![2];
        }
        spec.source_copy[0][0] = vec![SourceList::run(0, 2); 2];
        for n in 1..4 {
            spec.source_copy[n][0] = vec![
                SourceList::from_slice(&[1, 0, 0]),
                SourceList::from_slice(&[1, 1, 0]),
            ];
        }
        ExtensionTriple::new(b, spec, Construction::Generic).unwrap()
    }

    #[test]
    fn identity_gives_singletons() {
        let t = ExtensionTriple::identity(odometer(&[2, 2, 2]));
        let x = extended_diagram(&t, 3).unwrap();
        assert_eq!(x.diagram.level_sizes(), &[1, 1, 1, 1]);
        assert!(x.plus_mask().iter().all(|b| !b));
        let a = t.base.path_from_picks(VertexRef::new(3, 0), &[1, 0, 1]).unwrap();
        assert_eq!(fibre_cardinality(&t, &a).unwrap().count, 1);
    }

    #[test]
    fn preimage_path_matches_sets_and_shifts() {
        let t = parity_triple();
        let x = extended_diagram(&t, 4).unwrap();
        let mut a = t.base.min_path(VertexRef::new(4, 0), 0);
        loop {
            let fp = full_preimage(&t, &a).unwrap();
            let path = x.preimage_path(&a).unwrap();
            for (n, &v) in path.trail.iter().enumerate() {
                assert_eq!(x.copy_set(n, v).1, fp.sets[n]);
            }
            assert_eq!(x.project(&path), a);
            let Some(next) = successor(&t.base, &a) else { break };
            assert_eq!(
                successor(&x.diagram, &path).unwrap(),
                x.preimage_path(&next).unwrap()
            );
            a = next;
        }
    }

    #[test]
    fn pruning_is_monotone() {
        let t = parity_triple();
        let lo = extended_diagram(&t, 3).unwrap();
        let hi = extended_diagram(&t, 4).unwrap();
        for n in 0..=3 {
            for s in hi.level_sets(n) {
                assert!(lo.vertex(n, s.0, &s.1).is_some());
            }
        }
    }
}
