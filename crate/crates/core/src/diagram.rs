//! Ordered Bratteli diagrams truncated at a finite depth.
//!
//! `incoming[n][l]` lists, in edge order, the level-`n` sources of the edges
//! ending at vertex `l` of level `n + 1`. The position in that list is the
//! edge's identity.

use std::fmt;

use num::{BigUint, Integer, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seglist::{ClassList, EdgeClass, SourceList};

const PATTERN_CAP: usize = 4096;
const SEGMENT_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexRef {
    pub level: usize,
    pub index: usize,
}

impl VertexRef {
    pub fn new(level: usize, index: usize) -> Self {
        VertexRef { level, index }
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}({})", self.index, self.level)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyMeta {
    pub base: usize,
    pub copy: usize,
}

/// The serialized form of a diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramData {
    pub depth: usize,
    pub level_sizes: Vec<usize>,
    pub incoming: Vec<Vec<SourceList>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_class: Option<Vec<Option<Vec<ClassList>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copy_meta: Option<Vec<Vec<CopyMeta>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Shape(String),
    RootSize(usize),
    EmptyRange { level: usize, vertex: usize },
    SourceOutOfRange { level: usize, vertex: usize, position: u64, source: usize },
    SourceSurjectivity { level: usize, vertex: usize },
    Colouring { level: usize, vertex: usize, reason: String },
    CopyMeta(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(s) => write!(f, "shape: {s}"),
            Violation::RootSize(k) => write!(f, "level 0 must have exactly one vertex, found {k}"),
            Violation::EmptyRange { level, vertex } => {
                write!(f, "r_l >= 1 violated: vertex {vertex} at level {level} has no incoming edge")
            }
            Violation::SourceOutOfRange { level, vertex, position, source } => write!(
                f,
                "edge {position} into vertex {vertex} at level {level} has source {source} out of range"
            ),
            Violation::SourceSurjectivity { level, vertex } => write!(
                f,
                "source surjectivity violated: vertex {vertex} at level {level} sources no edge"
            ),
            Violation::Colouring { level, vertex, reason } => {
                write!(f, "colouring of edges into vertex {vertex} at level {level}: {reason}")
            }
            Violation::CopyMeta(s) => write!(f, "copy_meta: {s}"),
        }
    }
}

/// Every axiom violation of `data`, with locations.
pub fn validate(data: &DiagramData) -> Vec<Violation> {
    let mut out = Vec::new();
    if data.level_sizes.len() != data.depth + 1 {
        out.push(Violation::Shape(format!(
            "depth {} needs {} level sizes, found {}",
            data.depth,
            data.depth + 1,
            data.level_sizes.len()
        )));
        return out;
    }
    if data.level_sizes[0] != 1 {
        out.push(Violation::RootSize(data.level_sizes[0]));
    }
    if let Some(n) = data.level_sizes.iter().position(|&s| s == 0) {
        out.push(Violation::Shape(format!("level {n} is empty")));
        return out;
    }
    if data.incoming.len() != data.depth {
        out.push(Violation::Shape(format!(
            "expected {} edge levels, found {}",
            data.depth,
            data.incoming.len()
        )));
        return out;
    }
    for (n, lists) in data.incoming.iter().enumerate() {
        if lists.len() != data.level_sizes[n + 1] {
            out.push(Violation::Shape(format!(
                "level {} has {} vertices but {} incoming lists",
                n + 1,
                data.level_sizes[n + 1],
                lists.len()
            )));
            continue;
        }
        let below = data.level_sizes[n];
        let mut used = vec![false; below];
        for (l, list) in lists.iter().enumerate() {
            if list.is_empty() {
                out.push(Violation::EmptyRange { level: n + 1, vertex: l });
                continue;
            }
            for s in list.distinct() {
                if s >= below {
                    let position = list.first_where(0, |x| x == s).unwrap_or(0);
                    out.push(Violation::SourceOutOfRange {
                        level: n + 1,
                        vertex: l,
                        position,
                        source: s,
                    });
                } else {
                    used[s] = true;
                }
            }
        }
        for (v, u) in used.iter().enumerate() {
            if !u {
                out.push(Violation::SourceSurjectivity { level: n, vertex: v });
            }
        }
    }
    if let Some(classes) = &data.edge_class {
        if classes.len() != data.depth {
            out.push(Violation::Shape("edge_class needs one entry per edge level".into()));
        } else {
            for (n, level) in classes.iter().enumerate() {
                let Some(level) = level else { continue };
                let Some(lists) = data.incoming.get(n) else { continue };
                if level.len() != lists.len() {
                    out.push(Violation::Shape(format!("edge_class level {n} has wrong vertex count")));
                    continue;
                }
                for (l, (c, list)) in level.iter().zip(lists).enumerate() {
                    if let Some(reason) = colouring_problem(c, list.len()) {
                        out.push(Violation::Colouring { level: n + 1, vertex: l, reason });
                    }
                }
            }
        }
    }
    if let Some(meta) = &data.copy_meta {
        if meta.len() != data.depth + 1
            || meta.iter().zip(&data.level_sizes).any(|(m, &s)| m.len() != s)
        {
            out.push(Violation::CopyMeta("needs one entry per vertex".into()));
        }
    }
    out
}

fn colouring_problem(c: &ClassList, r: u64) -> Option<String> {
    if c.len() != r {
        return Some(format!("{} classes for {r} edges", c.len()));
    }
    match c.thick_count() {
        None => Some("classes are not min, thick, thin, max".into()),
        Some(m) if !(1 < m && m + 2 < r) => Some(format!("thick count {m} violates 1 < M < r-2 with r = {r}")),
        Some(_) => None,
    }
}

/// A finite path. `picks[i]` is the order position of the edge from level
/// `start_level + i` and `trail[i]` the vertex it starts at; the last trail
/// entry is the end vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinitePath {
    pub start_level: usize,
    pub picks: Vec<u64>,
    pub trail: Vec<usize>,
}

impl FinitePath {
    pub fn end_level(&self) -> usize {
        self.start_level + self.picks.len()
    }

    pub fn end(&self) -> VertexRef {
        VertexRef::new(self.end_level(), *self.trail.last().unwrap())
    }

    pub fn start(&self) -> VertexRef {
        VertexRef::new(self.start_level, self.trail[0])
    }

    pub fn vertex(&self, level: usize) -> VertexRef {
        VertexRef::new(level, self.trail[level - self.start_level])
    }

    /// The sub-path between levels `from` and `to`.
    pub fn window(&self, from: usize, to: usize) -> FinitePath {
        let a = from - self.start_level;
        let b = to - self.start_level;
        FinitePath {
            start_level: from,
            picks: self.picks[a..b].to_vec(),
            trail: self.trail[a..=b].to_vec(),
        }
    }

    /// Concatenation with a path that starts where `self` ends.
    pub fn join(&self, upper: &FinitePath) -> FinitePath {
        assert_eq!(self.end(), upper.start(), "paths do not connect");
        let mut picks = self.picks.clone();
        picks.extend_from_slice(&upper.picks);
        let mut trail = self.trail.clone();
        trail.extend_from_slice(&upper.trail[1..]);
        FinitePath {
            start_level: self.start_level,
            picks,
            trail,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Diagram {
    level_sizes: Vec<usize>,
    incoming: Vec<Vec<SourceList>>,
    classes: Vec<Option<Vec<ClassList>>>,
    copy_meta: Option<Vec<Vec<CopyMeta>>>,
    heights: Vec<Vec<BigUint>>,
    // cum[n][l][i]: height weight of segments 0..=i of incoming[n][l]
    cum: Vec<Vec<Vec<BigUint>>>,
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.level_sizes == other.level_sizes
            && self.incoming == other.incoming
            && self.classes == other.classes
            && self.copy_meta == other.copy_meta
    }
}

impl Diagram {
    pub fn new(data: DiagramData) -> Result<Diagram> {
        let violations = validate(&data);
        if !violations.is_empty() {
            return Err(Error::InvalidDiagram(violations));
        }
        let classes = data.edge_class.unwrap_or_else(|| vec![None; data.depth]);
        let mut d = Diagram {
            level_sizes: data.level_sizes,
            incoming: data.incoming,
            classes,
            copy_meta: data.copy_meta,
            heights: Vec::new(),
            cum: Vec::new(),
        };
        d.compute_weights();
        Ok(d)
    }

    pub fn from_lists(incoming: Vec<Vec<Vec<usize>>>) -> Result<Diagram> {
        let mut level_sizes = vec![1];
        level_sizes.extend(incoming.iter().map(|l| l.len()));
        Diagram::new(DiagramData {
            depth: incoming.len(),
            level_sizes,
            incoming: incoming
                .iter()
                .map(|lvl| lvl.iter().map(|l| SourceList::from_slice(l)).collect())
                .collect(),
            edge_class: None,
            copy_meta: None,
        })
    }

    pub fn from_source_lists(incoming: Vec<Vec<SourceList>>) -> Result<Diagram> {
        let mut level_sizes = vec![1];
        level_sizes.extend(incoming.iter().map(|l| l.len()));
        Diagram::new(DiagramData {
            depth: incoming.len(),
            level_sizes,
            incoming,
            edge_class: None,
            copy_meta: None,
        })
    }

    fn compute_weights(&mut self) {
        let mut heights = vec![vec![BigUint::one()]];
        let mut cum = Vec::with_capacity(self.incoming.len());
        for lists in &self.incoming {
            let below = heights.last().unwrap();
            let mut level_cum = Vec::with_capacity(lists.len());
            let mut level_h = Vec::with_capacity(lists.len());
            for list in lists {
                let mut acc = BigUint::zero();
                let mut c = Vec::with_capacity(list.segments().len());
                for seg in list.segments() {
                    acc += segment_weight(below, &seg.pattern, seg.len);
                    c.push(acc.clone());
                }
                level_h.push(acc);
                level_cum.push(c);
            }
            cum.push(level_cum);
            heights.push(level_h);
        }
        self.heights = heights;
        self.cum = cum;
    }

    pub fn to_data(&self) -> DiagramData {
        DiagramData {
            depth: self.depth(),
            level_sizes: self.level_sizes.clone(),
            incoming: self.incoming.clone(),
            edge_class: self
                .classes
                .iter()
                .any(Option::is_some)
                .then(|| self.classes.clone()),
            copy_meta: self.copy_meta.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_data())?)
    }

    pub fn from_json(s: &str) -> Result<Diagram> {
        Diagram::new(serde_json::from_str(s)?)
    }

    pub fn depth(&self) -> usize {
        self.incoming.len()
    }

    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.level_sizes[level]
    }

    /// Sources of the edges from level `n` into vertex `l` of level `n + 1`.
    pub fn incoming(&self, n: usize, l: usize) -> &SourceList {
        &self.incoming[n][l]
    }

    pub fn level_lists(&self, n: usize) -> &[SourceList] {
        &self.incoming[n]
    }

    /// Number of edges from level `n` into vertex `l`.
    pub fn r(&self, n: usize, l: usize) -> u64 {
        self.incoming[n][l].len()
    }

    pub fn source(&self, n: usize, l: usize, m: u64) -> usize {
        self.incoming[n][l].get(m)
    }

    pub fn classes(&self, n: usize) -> Option<&[ClassList]> {
        self.classes.get(n).and_then(|c| c.as_deref())
    }

    pub fn is_coloured(&self, n: usize) -> bool {
        self.classes(n).is_some()
    }

    pub fn class_of(&self, n: usize, l: usize, m: u64) -> EdgeClass {
        self.classes(n).map_or(EdgeClass::Plain, |c| c[l].get(m))
    }

    pub fn thick_count(&self, n: usize, l: usize) -> Option<u64> {
        self.classes(n).and_then(|c| c[l].thick_count())
    }

    pub fn copy_meta(&self, level: usize, v: usize) -> Option<CopyMeta> {
        self.copy_meta.as_ref().map(|m| m[level][v])
    }

    pub fn has_copy_meta(&self) -> bool {
        self.copy_meta.is_some()
    }

    /// Attaches a colouring to the given edge levels.
    pub fn with_classes(&self, classes: Vec<Option<Vec<ClassList>>>) -> Result<Diagram> {
        let mut data = self.to_data();
        data.edge_class = Some(classes);
        Diagram::new(data)
    }

    pub fn with_copy_meta(&self, meta: Vec<Vec<CopyMeta>>) -> Result<Diagram> {
        let mut data = self.to_data();
        data.copy_meta = Some(meta);
        Diagram::new(data)
    }

    /// |E(v_0, v)|.
    pub fn path_count(&self, v: VertexRef) -> &BigUint {
        &self.heights[v.level][v.index]
    }

    pub fn height(&self, level: usize, v: usize) -> &BigUint {
        &self.heights[level][v]
    }

    pub fn heights(&self, level: usize) -> &[BigUint] {
        &self.heights[level]
    }

    pub fn max_height(&self, level: usize) -> &BigUint {
        self.heights[level].iter().max().unwrap()
    }

    /// Total height of the sources at positions `< m` in `incoming(n, l)`.
    pub fn weight_prefix(&self, n: usize, l: usize, m: u64) -> BigUint {
        let list = &self.incoming[n][l];
        if m == 0 {
            return BigUint::zero();
        }
        if m >= list.len() {
            return self.heights[n + 1][l].clone();
        }
        let (i, off) = list.locate(m);
        let before = if i == 0 {
            BigUint::zero()
        } else {
            self.cum[n][l][i - 1].clone()
        };
        before + segment_weight(&self.heights[n], &list.segments()[i].pattern, off)
    }

    /// Height weight of positions in `[a, b)` of `incoming(n, l)`.
    pub fn weight_range(&self, n: usize, l: usize, a: u64, b: u64) -> BigUint {
        self.weight_prefix(n, l, b) - self.weight_prefix(n, l, a)
    }

    /// The position `m` with `weight_prefix(m) <= t < weight_prefix(m + 1)`
    /// and the remainder `t - weight_prefix(m)`.
    pub fn position_at_weight(&self, n: usize, l: usize, t: &BigUint) -> (u64, BigUint) {
        let list = &self.incoming[n][l];
        let cum = &self.cum[n][l];
        let i = cum.partition_point(|c| c <= t);
        assert!(i < cum.len(), "weight {t} beyond height");
        let mut rest = if i == 0 { t.clone() } else { t - &cum[i - 1] };
        let seg = &list.segments()[i];
        let below = &self.heights[n];
        let cycle: BigUint = seg.pattern.iter().map(|&s| &below[s]).sum();
        let (full, r) = rest.div_rem(&cycle);
        rest = r;
        let pos = list.segment_start(i) + full.to_u64().unwrap() * seg.period();
        for (j, &s) in seg.pattern.iter().enumerate() {
            if rest < below[s] {
                return (pos + j as u64, rest);
            }
            rest -= &below[s];
        }
        unreachable!("weight lookup overran its segment")
    }

    pub fn check_vertex(&self, v: VertexRef) -> Result<()> {
        if v.level > self.depth() || v.index >= self.level_sizes[v.level] {
            return Err(Error::invalid(format!("no vertex {v}")));
        }
        Ok(())
    }

    /// Builds the path ending at `end` whose edges have the given positions,
    /// listed from the lowest level upwards.
    pub fn path_from_picks(&self, end: VertexRef, picks: &[u64]) -> Result<FinitePath> {
        self.check_vertex(end)?;
        if picks.len() > end.level {
            return Err(Error::invalid("more picks than levels below the end vertex"));
        }
        let start_level = end.level - picks.len();
        let mut trail = vec![0; picks.len() + 1];
        trail[picks.len()] = end.index;
        for k in (0..picks.len()).rev() {
            let n = start_level + k;
            let v = trail[k + 1];
            if picks[k] >= self.r(n, v) {
                return Err(Error::invalid(format!(
                    "pick {} at level {n} exceeds r = {}",
                    picks[k],
                    self.r(n, v)
                )));
            }
            trail[k] = self.source(n, v, picks[k]);
        }
        Ok(FinitePath {
            start_level,
            picks: picks.to_vec(),
            trail,
        })
    }

    pub fn check_path(&self, p: &FinitePath) -> Result<()> {
        if p.trail.len() != p.picks.len() + 1 || p.end_level() > self.depth() {
            return Err(Error::invalid("malformed path"));
        }
        let rebuilt = self.path_from_picks(p.end(), &p.picks)?;
        if rebuilt.trail != p.trail {
            return Err(Error::invalid("path trail is not connected"));
        }
        Ok(())
    }

    /// Number of co-terminal paths from level 0 strictly below `p`.
    pub fn rank(&self, p: &FinitePath) -> BigUint {
        assert_eq!(p.start_level, 0, "rank needs a path from level 0");
        let mut acc = BigUint::zero();
        for (k, &m) in p.picks.iter().enumerate() {
            acc += self.weight_prefix(k, p.trail[k + 1], m);
        }
        acc
    }

    pub fn path_at_rank(&self, v: VertexRef, t: &BigUint) -> Result<FinitePath> {
        self.check_vertex(v)?;
        if t >= self.path_count(v) {
            return Err(Error::invalid(format!(
                "rank {t} out of range for {v} with {} paths",
                self.path_count(v)
            )));
        }
        let mut picks = vec![0u64; v.level];
        let mut trail = vec![0usize; v.level + 1];
        trail[v.level] = v.index;
        let mut rest = t.clone();
        for k in (0..v.level).rev() {
            let (m, r) = self.position_at_weight(k, trail[k + 1], &rest);
            picks[k] = m;
            trail[k] = self.source(k, trail[k + 1], m);
            rest = r;
        }
        Ok(FinitePath {
            start_level: 0,
            picks,
            trail,
        })
    }

    fn extremal(&self, v: VertexRef, from: usize, maximal: bool) -> FinitePath {
        let len = v.level - from;
        let mut picks = vec![0u64; len];
        let mut trail = vec![0usize; len + 1];
        trail[len] = v.index;
        for k in (0..len).rev() {
            let n = from + k;
            let list = &self.incoming[n][trail[k + 1]];
            let m = if maximal { list.len() - 1 } else { 0 };
            picks[k] = m;
            trail[k] = list.get(m);
        }
        FinitePath {
            start_level: from,
            picks,
            trail,
        }
    }

    pub fn min_path(&self, v: VertexRef, from: usize) -> FinitePath {
        self.extremal(v, from, false)
    }

    pub fn max_path(&self, v: VertexRef, from: usize) -> FinitePath {
        self.extremal(v, from, true)
    }

    pub fn extremal_paths(&self, v: VertexRef, from: usize) -> Result<(FinitePath, FinitePath)> {
        self.check_vertex(v)?;
        if from >= v.level {
            return Err(Error::invalid("from_level must lie below the vertex"));
        }
        Ok((self.min_path(v, from), self.max_path(v, from)))
    }

    /// True iff every vertex of level `n` reaches every vertex of level `big_n`.
    pub fn simplicity_window_check(&self, n: usize, big_n: usize) -> Result<bool> {
        if n >= big_n || big_n > self.depth() {
            return Err(Error::invalid("need n < N <= depth"));
        }
        // reach[v]: level-n vertices below v
        let mut reach: Vec<Vec<bool>> = (0..self.level_sizes[n])
            .map(|i| (0..self.level_sizes[n]).map(|j| i == j).collect())
            .collect();
        for k in n..big_n {
            reach = self.incoming[k]
                .iter()
                .map(|list| {
                    let mut r = vec![false; self.level_sizes[n]];
                    for s in list.distinct() {
                        for (slot, &b) in r.iter_mut().zip(&reach[s]) {
                            *slot |= b;
                        }
                    }
                    r
                })
                .collect();
        }
        Ok(reach.iter().all(|r| r.iter().all(|&b| b)))
    }

    /// Composite source lists from level `a` into every vertex of level `b`.
    pub fn composite_lists(&self, a: usize, b: usize) -> Result<Vec<SourceList>> {
        let mut lists = self.incoming[a].clone();
        for k in a + 1..b {
            let mut next = Vec::with_capacity(self.level_sizes[k + 1]);
            for upper in &self.incoming[k] {
                let mut out = SourceList::new();
                for seg in upper.segments() {
                    let p = seg.period();
                    let mut block = SourceList::new();
                    for &s in &seg.pattern {
                        block.extend_from(&lists[s]);
                    }
                    let reps = seg.len / p;
                    out.append_repeated(&block, reps, PATTERN_CAP, SEGMENT_CAP)
                        .map_err(Error::budget)?;
                    for &s in &seg.pattern[..(seg.len % p) as usize] {
                        out.append_repeated(&lists[s], 1, PATTERN_CAP, SEGMENT_CAP)
                            .map_err(Error::budget)?;
                    }
                }
                next.push(out);
            }
            lists = next;
        }
        Ok(lists)
    }

    /// Keeps levels `cuts[k]` and composes the edges between them.
    pub fn telescope(&self, cuts: &[usize]) -> Result<Diagram> {
        if cuts.first() != Some(&0) {
            return Err(Error::invalid("cuts must start at 0"));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) || *cuts.last().unwrap() > self.depth() {
            return Err(Error::invalid("cuts must increase within the depth"));
        }
        let mut incoming = Vec::with_capacity(cuts.len() - 1);
        let mut classes = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            incoming.push(self.composite_lists(w[0], w[1])?);
            classes.push(if w[1] == w[0] + 1 {
                self.classes[w[0]].clone()
            } else {
                None
            });
        }
        let level_sizes = cuts.iter().map(|&c| self.level_sizes[c]).collect();
        let copy_meta = self
            .copy_meta
            .as_ref()
            .map(|m| cuts.iter().map(|&c| m[c].clone()).collect());
        Diagram::new(DiagramData {
            depth: cuts.len() - 1,
            level_sizes,
            incoming,
            edge_class: classes.iter().any(Option::is_some).then_some(classes),
            copy_meta,
        })
    }

    /// Keeps levels `0..=depth`.
    pub fn truncate(&self, depth: usize) -> Result<Diagram> {
        let cuts: Vec<usize> = (0..=depth.min(self.depth())).collect();
        self.telescope(&cuts)
    }

    /// Renumbers level `level` so that old vertex `perm[i]` becomes vertex `i`.
    pub fn permute_level(&self, level: usize, perm: &[usize]) -> Result<Diagram> {
        let size = self.level_sizes[level];
        let mut seen = vec![false; size];
        if perm.len() != size || perm.iter().any(|&p| p >= size || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("not a permutation of the level"));
        }
        if level == 0 {
            return Ok(self.clone());
        }
        let mut inverse = vec![0; size];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let mut data = self.to_data();
        data.incoming[level - 1] = perm.iter().map(|&p| self.incoming[level - 1][p].clone()).collect();
        if let Some(cl) = data.edge_class.as_mut() {
            if let Some(c) = &self.classes[level - 1] {
                cl[level - 1] = Some(perm.iter().map(|&p| c[p].clone()).collect());
            }
        }
        if level < self.depth() {
            data.incoming[level] = self.incoming[level]
                .iter()
                .map(|l| l.map(|s| inverse[s]))
                .collect();
        }
        if let Some(meta) = data.copy_meta.as_mut() {
            meta[level] = perm.iter().map(|&p| self.copy_meta.as_ref().unwrap()[level][p]).collect();
        }
        Diagram::new(data)
    }

    fn extremal_source(&self, a: usize, b: usize, v: usize, maximal: bool) -> usize {
        let mut x = v;
        for n in (a..b).rev() {
            let list = &self.incoming[n][x];
            x = if maximal { list.last() } else { list.first() };
        }
        x
    }

    /// Unique sources of the minimal and maximal composite edges from `a` to `b`.
    pub fn unique_extremal_sources(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        let unique = |maximal: bool| {
            let mut s: Vec<usize> = (0..self.level_sizes[b])
                .map(|v| self.extremal_source(a, b, v, maximal))
                .collect();
            s.dedup();
            s.sort_unstable();
            s.dedup();
            (s.len() == 1).then(|| s[0])
        };
        Some((unique(false)?, unique(true)?))
    }

    /// Telescopes so that on every level `>= 1` the minimal edges share one
    /// source and the maximal edges share one source, then relabels so the
    /// minimal source is vertex 0. Incomplete top levels are dropped.
    pub fn extremal_source_normalize(&self) -> Result<(Diagram, Vec<usize>)> {
        if self.depth() < 2 {
            return Ok((self.clone(), (0..=self.depth()).collect()));
        }
        let mut cuts = vec![0, 1];
        let mut c = 2;
        while c <= self.depth() {
            let a = *cuts.last().unwrap();
            if self.unique_extremal_sources(a, c).is_some() {
                cuts.push(c);
            }
            c += 1;
        }
        if cuts.len() < 3 {
            return Err(Error::budget(
                "no window within the depth has unique extremal sources",
            ));
        }
        let mut out = self.telescope(&cuts)?;
        for k in 1..out.depth() {
            let (min_src, _) = out.unique_extremal_sources(k, k + 1).unwrap();
            if min_src != 0 {
                let mut perm: Vec<usize> = (0..out.level_size(k)).collect();
                perm.swap(0, min_src);
                out = out.permute_level(k, &perm)?;
            }
        }
        Ok((out, cuts))
    }

    /// True iff every level `>= 1` has unique extremal sources, the minimal one being vertex 0.
    pub fn has_normalized_sources(&self) -> bool {
        (1..self.depth()).all(|k| matches!(self.unique_extremal_sources(k, k + 1), Some((0, _))))
    }
}

fn segment_weight(below: &[BigUint], pattern: &[usize], len: u64) -> BigUint {
    let p = pattern.len() as u64;
    let (full, rem) = (len / p, len % p);
    let mut w = BigUint::zero();
    if full > 0 {
        let cycle: BigUint = pattern.iter().map(|&s| &below[s]).sum();
        w += cycle * full;
    }
    for &s in &pattern[..rem as usize] {
        w += &below[s];
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odometer(r: &[usize]) -> Diagram {
        Diagram::from_lists(r.iter().map(|&k| vec![vec![0; k]]).collect()).unwrap()
    }

    fn fib(depth: usize) -> Diagram {
        let mut levels = vec![vec![vec![0], vec![0]]];
        for _ in 1..depth {
            levels.push(vec![vec![1, 0, 0], vec![1, 0]]);
        }
        Diagram::from_lists(levels).unwrap()
    }

    #[test]
    fn odometer_counts_and_rank() {
        let d = odometer(&[2, 2, 2]);
        assert_eq!(d.path_count(VertexRef::new(3, 0)), &BigUint::from(8u32));
        let p = d.path_from_picks(VertexRef::new(3, 0), &[1, 0, 1]).unwrap();
        assert_eq!(d.rank(&p), BigUint::from(5u32));
        let q = d.path_at_rank(VertexRef::new(3, 0), &BigUint::from(5u32)).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn violations_are_located() {
        let bad = DiagramData {
            depth: 2,
            level_sizes: vec![1, 2, 1],
            incoming: vec![
                vec![SourceList::from_slice(&[0]), SourceList::new()],
                vec![SourceList::from_slice(&[0, 0])],
            ],
            edge_class: None,
            copy_meta: None,
        };
        let v = validate(&bad);
        assert!(v.contains(&Violation::EmptyRange { level: 1, vertex: 1 }));
        assert!(v.contains(&Violation::SourceSurjectivity { level: 1, vertex: 1 }));
        assert!(v[0].to_string().contains("r_l >= 1"));
    }

    #[test]
    fn telescoping_odometer() {
        let d = odometer(&[2, 2, 2, 2]);
        let t = d.telescope(&[0, 2, 4]).unwrap();
        assert_eq!(t.r(0, 0), 4);
        assert_eq!(t.r(1, 0), 4);
        assert_eq!(d.telescope(&[0, 1, 2, 3, 4]).unwrap(), d);
        assert!(d.telescope(&[1, 2]).is_err());
    }

    #[test]
    fn fibonacci_heights() {
        let d = fib(6);
        let h: Vec<u32> = (1..=6).map(|n| d.height(n, 0).to_u32().unwrap()).collect();
        assert_eq!(h, vec![1, 3, 8, 21, 55, 144]);
        assert!(d.simplicity_window_check(1, 3).unwrap());
    }

    #[test]
    fn weights_on_compressed_lists() {
        let mut big = SourceList::new();
        big.push_run(1, 1);
        big.push_cycle(&[0, 1, 1], 3_000_000_000);
        big.push_run(0, 1);
        let d = Diagram::from_source_lists(vec![
            vec![SourceList::from_slice(&[0]), SourceList::from_slice(&[0, 0])],
            vec![big],
        ])
        .unwrap();
        let h = d.path_count(VertexRef::new(2, 0)).clone();
        assert_eq!(h, BigUint::from(2u64 + 5_000_000_000 + 1));
        for t in [0u64, 1, 2, 3, 4, 5, 4_999_999_999, 5_000_000_002] {
            let p = d.path_at_rank(VertexRef::new(2, 0), &BigUint::from(t)).unwrap();
            assert_eq!(d.rank(&p), BigUint::from(t));
        }
    }

    #[test]
    fn disconnected_chains_fail_simplicity() {
        let d = Diagram::from_lists(vec![
            vec![vec![0], vec![0]],
            vec![vec![0, 0], vec![1, 1]],
            vec![vec![0], vec![1]],
        ])
        .unwrap();
        assert!(!d.simplicity_window_check(1, 3).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let d = fib(4);
        let j = d.to_json().unwrap();
        assert!(j.contains("\"incoming\":[[[0],[0]],[[1,0,0],[1,0]]"));
        assert_eq!(Diagram::from_json(&j).unwrap(), d);
    }
}
