//! Compressed ordered lists.
//!
//! After telescoping an edge list can hold billions of positions, so a list is
//! stored as a sequence of segments, each repeating a short pattern cyclically.

use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Lists up to this length serialize as plain JSON arrays.
pub const PLAIN_LIMIT: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub len: u64,
    pub pattern: Vec<usize>,
}

impl Segment {
    pub fn period(&self) -> u64 {
        self.pattern.len() as u64
    }

    pub fn at(&self, offset: u64) -> usize {
        self.pattern[(offset % self.period()) as usize]
    }
}

/// Positions `start..start + len`, where `start + i` holds
/// `pattern[(phase + i) % pattern.len()]`.
#[derive(Clone, Copy, Debug)]
pub struct Piece<'a> {
    pub start: u64,
    pub len: u64,
    pub pattern: &'a [usize],
    pub phase: usize,
}

impl Piece<'_> {
    pub fn period(&self) -> u64 {
        self.pattern.len() as u64
    }

    pub fn at(&self, i: u64) -> usize {
        let p = self.period();
        self.pattern[((self.phase as u64 + i % p) % p) as usize]
    }

    /// How many offsets in the piece land on `pattern[idx]`.
    pub fn count_of_index(&self, idx: usize) -> u64 {
        let p = self.period();
        let first = (idx as u64 + p - self.phase as u64 % p) % p;
        if self.len > first {
            (self.len - first - 1) / p + 1
        } else {
            0
        }
    }
}

fn primitive(pattern: &[usize]) -> &[usize] {
    let n = pattern.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| pattern[i] == pattern[i - d]) {
            return &pattern[..d];
        }
    }
    pattern
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceList {
    segs: Vec<Segment>,
    ends: Vec<u64>,
}

impl SourceList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn run(value: usize, len: u64) -> Self {
        let mut s = Self::new();
        s.push_run(value, len);
        s
    }

    pub fn from_slice(values: &[usize]) -> Self {
        let mut s = Self::new();
        for &v in values {
            s.push_run(v, 1);
        }
        s
    }

    pub fn len(&self) -> u64 {
        self.ends.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    pub fn segment_start(&self, i: usize) -> u64 {
        if i == 0 {
            0
        } else {
            self.ends[i - 1]
        }
    }

    pub fn segment_end(&self, i: usize) -> u64 {
        self.ends[i]
    }

    pub fn push_run(&mut self, value: usize, len: u64) {
        if len == 0 {
            return;
        }
        if let Some(last) = self.segs.last_mut() {
            if last.pattern.len() == 1 && last.pattern[0] == value {
                last.len += len;
                *self.ends.last_mut().unwrap() += len;
                return;
            }
        }
        let end = self.len() + len;
        self.segs.push(Segment {
            len,
            pattern: vec![value],
        });
        self.ends.push(end);
    }

    pub fn push_cycle(&mut self, pattern: &[usize], len: u64) {
        if len == 0 {
            return;
        }
        let pat = primitive(pattern);
        let p = pat.len() as u64;
        if p == 1 {
            self.push_run(pat[0], len);
            return;
        }
        if len <= 2 * p {
            for i in 0..len {
                self.push_run(pat[(i % p) as usize], 1);
            }
            return;
        }
        if let Some(last) = self.segs.last_mut() {
            if last.pattern == pat && last.len % p == 0 {
                last.len += len;
                *self.ends.last_mut().unwrap() += len;
                return;
            }
        }
        let end = self.len() + len;
        self.segs.push(Segment {
            len,
            pattern: pat.to_vec(),
        });
        self.ends.push(end);
    }

    pub fn push_piece(&mut self, piece: &Piece<'_>) {
        let p = piece.pattern.len();
        let rotated: Vec<usize> = (0..p).map(|i| piece.pattern[(piece.phase + i) % p]).collect();
        self.push_cycle(&rotated, piece.len);
    }

    pub fn extend_from(&mut self, other: &SourceList) {
        for seg in &other.segs {
            self.push_cycle(&seg.pattern, seg.len);
        }
    }

    /// Appends `times` consecutive copies of `block`.
    pub fn append_repeated(
        &mut self,
        block: &SourceList,
        times: u64,
        pattern_cap: usize,
        segment_cap: usize,
    ) -> Result<(), String> {
        if times == 0 || block.is_empty() {
            return Ok(());
        }
        block
            .len()
            .checked_mul(times)
            .and_then(|t| t.checked_add(self.len()))
            .ok_or_else(|| "edge count overflows 64 bits".to_string())?;
        if block.segs.len() == 1 && block.segs[0].pattern.len() == 1 {
            self.push_run(block.segs[0].pattern[0], block.len() * times);
        } else if times == 1 {
            self.extend_from(block);
        } else if block.len() <= pattern_cap as u64 {
            let expanded = block.to_vec();
            self.push_cycle(&expanded, block.len() * times);
        } else {
            let need = (block.segs.len() as u64).saturating_mul(times);
            if need.saturating_add(self.segs.len() as u64) > segment_cap as u64 {
                return Err(format!(
                    "telescoped edge list needs more than {segment_cap} segments"
                ));
            }
            for _ in 0..times {
                self.extend_from(block);
            }
        }
        Ok(())
    }

    /// Segment index and offset within it for position `m`.
    pub fn locate(&self, m: u64) -> (usize, u64) {
        assert!(m < self.len(), "position {m} out of range {}", self.len());
        let i = self.ends.partition_point(|&e| e <= m);
        (i, m - self.segment_start(i))
    }

    pub fn get(&self, m: u64) -> usize {
        let (i, off) = self.locate(m);
        self.segs[i].at(off)
    }

    pub fn first(&self) -> usize {
        self.get(0)
    }

    pub fn last(&self) -> usize {
        self.get(self.len() - 1)
    }

    pub fn pieces(&self, range: Range<u64>) -> Vec<Piece<'_>> {
        let mut out = Vec::new();
        if range.start >= range.end {
            return out;
        }
        let first = self.ends.partition_point(|&e| e <= range.start);
        for i in first..self.segs.len() {
            let s = self.segment_start(i);
            if s >= range.end {
                break;
            }
            let a = range.start.max(s);
            let b = range.end.min(self.ends[i]);
            let seg = &self.segs[i];
            out.push(Piece {
                start: a,
                len: b - a,
                pattern: &seg.pattern,
                phase: ((a - s) % seg.period()) as usize,
            });
        }
        out
    }

    /// Occurrence count of every value within `range`, sorted by value.
    pub fn tally(&self, range: Range<u64>) -> Vec<(usize, u64)> {
        let mut acc: Vec<(usize, u64)> = Vec::new();
        for piece in self.pieces(range) {
            for (idx, &v) in piece.pattern.iter().enumerate() {
                let c = piece.count_of_index(idx);
                if c > 0 {
                    acc.push((v, c));
                }
            }
        }
        acc.sort_unstable();
        let mut merged: Vec<(usize, u64)> = Vec::with_capacity(acc.len());
        for (v, c) in acc {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => merged.push((v, c)),
            }
        }
        merged
    }

    pub fn distinct(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .segs
            .iter()
            .flat_map(|s| s.pattern.iter().take(s.len.min(s.period()) as usize).copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn max_value(&self) -> Option<usize> {
        self.distinct().last().copied()
    }

    pub fn map(&self, f: impl Fn(usize) -> usize) -> SourceList {
        let mut out = SourceList::new();
        for seg in &self.segs {
            let pat: Vec<usize> = seg.pattern.iter().map(|&v| f(v)).collect();
            out.push_cycle(&pat, seg.len);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.segs
            .iter()
            .flat_map(|seg| (0..seg.len).map(move |i| seg.at(i)))
    }

    /// Expanded values. Intended for short lists only.
    pub fn to_vec(&self) -> Vec<usize> {
        assert!(
            self.len() <= 1 << 26,
            "refusing to expand a list of {} entries",
            self.len()
        );
        self.iter().collect()
    }

    /// Smallest position `>= from` whose value satisfies `pred`.
    pub fn first_where(&self, from: u64, pred: impl Fn(usize) -> bool) -> Option<u64> {
        for piece in self.pieces(from..self.len()) {
            let span = piece.len.min(piece.period());
            if let Some(i) = (0..span).find(|&i| pred(piece.at(i))) {
                return Some(piece.start + i);
            }
        }
        None
    }

    /// Largest position `< before` whose value satisfies `pred`.
    pub fn last_where(&self, before: u64, pred: impl Fn(usize) -> bool) -> Option<u64> {
        let mut pieces = self.pieces(0..before.min(self.len()));
        pieces.reverse();
        for piece in pieces {
            let span = piece.len.min(piece.period());
            if let Some(i) = (piece.len - span..piece.len).rev().find(|&i| pred(piece.at(i))) {
                return Some(piece.start + i);
            }
        }
        None
    }

    pub fn slice(&self, range: Range<u64>) -> SourceList {
        let mut out = SourceList::new();
        for piece in self.pieces(range) {
            out.push_piece(&piece);
        }
        out
    }

    /// Replaces the first and last entries.
    pub fn with_ends(&self, first: usize, last: usize) -> SourceList {
        let n = self.len();
        let mut out = SourceList::run(first, 1);
        if n >= 2 {
            out.extend_from(&self.slice(1..n - 1));
            out.push_run(last, 1);
        }
        out
    }

    /// Position `m` maps to the number of earlier positions holding the same
    /// value, reduced mod `modulus`.
    pub fn occurrence_index(&self, modulus: usize) -> SourceList {
        let mut seen: std::collections::BTreeMap<usize, usize> = Default::default();
        let mut out = SourceList::new();
        for seg in &self.segs {
            let p = seg.pattern.len();
            let span = seg.len.min((modulus * p) as u64) as usize;
            let mut local = seen.clone();
            let mut pat = Vec::with_capacity(span);
            for i in 0..span {
                let c = local.entry(seg.pattern[i % p]).or_insert(0);
                pat.push(*c);
                *c = (*c + 1) % modulus;
            }
            out.push_cycle(&pat, seg.len);
            for (idx, &v) in seg.pattern.iter().enumerate() {
                let piece = Piece { start: 0, len: seg.len, pattern: &seg.pattern, phase: 0 };
                let c = (piece.count_of_index(idx) % modulus as u64) as usize;
                let e = seen.entry(v).or_insert(0);
                *e = (*e + c) % modulus;
            }
        }
        out
    }

    /// Position-wise combination of equally long lists.
    pub fn zip_with(
        lists: &[&SourceList],
        mut f: impl FnMut(&[usize]) -> usize,
        pattern_cap: u64,
    ) -> Result<SourceList, String> {
        let Some(first) = lists.first() else {
            return Ok(SourceList::new());
        };
        let len = first.len();
        if lists.iter().any(|l| l.len() != len) {
            return Err("zipped lists differ in length".into());
        }
        let mut cuts: Vec<u64> = lists.iter().flat_map(|l| l.ends.iter().copied()).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut out = SourceList::new();
        let mut x = 0u64;
        let mut vals = vec![0usize; lists.len()];
        for y in cuts {
            if y <= x {
                continue;
            }
            let pieces: Vec<Piece<'_>> = lists.iter().map(|l| l.pieces(x..y)[0]).collect();
            let mut period = 1u64;
            for p in &pieces {
                let q = p.period();
                period = period / gcd(period, q) * q;
                if period > pattern_cap {
                    return Err(format!("combined pattern period exceeds {pattern_cap}"));
                }
            }
            let span = period.min(y - x);
            let mut pattern = Vec::with_capacity(span as usize);
            for i in 0..span {
                for (slot, p) in vals.iter_mut().zip(&pieces) {
                    *slot = p.at(i);
                }
                pattern.push(f(&vals));
            }
            out.push_cycle(&pattern, y - x);
            x = y;
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ListRepr {
    Plain(Vec<usize>),
    Compressed { segments: Vec<(u64, Vec<usize>)> },
}

impl Serialize for SourceList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = if self.len() <= PLAIN_LIMIT {
            ListRepr::Plain(self.to_vec())
        } else {
            ListRepr::Compressed {
                segments: self.segs.iter().map(|g| (g.len, g.pattern.clone())).collect(),
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SourceList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match ListRepr::deserialize(d)? {
            ListRepr::Plain(v) => Ok(SourceList::from_slice(&v)),
            ListRepr::Compressed { segments } => {
                let mut out = SourceList::new();
                for (len, pattern) in segments {
                    if pattern.is_empty() {
                        return Err(serde::de::Error::custom("empty segment pattern"));
                    }
                    out.push_cycle(&pattern, len);
                }
                Ok(out)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    Plain,
    Thick,
    Thin,
}

/// Run-length list of edge classes along one incoming list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassList {
    runs: Vec<(u64, EdgeClass)>,
}

impl ClassList {
    pub fn from_runs(runs: impl IntoIterator<Item = (u64, EdgeClass)>) -> Self {
        let mut out = ClassList::default();
        for (len, c) in runs {
            out.push(c, len);
        }
        out
    }

    /// Minimal edge, `thick` thick edges, thin edges, maximal edge.
    pub fn coloured(r: u64, thick: u64) -> Self {
        assert!(thick + 2 <= r);
        Self::from_runs([
            (1, EdgeClass::Plain),
            (thick, EdgeClass::Thick),
            (r - 2 - thick, EdgeClass::Thin),
            (1, EdgeClass::Plain),
        ])
    }

    pub fn push(&mut self, c: EdgeClass, len: u64) {
        if len == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some(last) if last.1 == c => last.0 += len,
            _ => self.runs.push((len, c)),
        }
    }

    pub fn runs(&self) -> &[(u64, EdgeClass)] {
        &self.runs
    }

    pub fn len(&self) -> u64 {
        self.runs.iter().map(|r| r.0).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn get(&self, pos: u64) -> EdgeClass {
        let mut acc = 0;
        for &(len, c) in &self.runs {
            acc += len;
            if pos < acc {
                return c;
            }
        }
        panic!("class position {pos} out of range");
    }

    /// Sub-ranges of `range` with a constant class.
    pub fn split(&self, range: Range<u64>) -> Vec<(Range<u64>, EdgeClass)> {
        let mut out = Vec::new();
        let mut start = 0;
        for &(len, c) in &self.runs {
            let end = start + len;
            let a = range.start.max(start);
            let b = range.end.min(end);
            if a < b {
                out.push((a..b, c));
            }
            start = end;
        }
        out
    }

    /// The thick count `M` when the list has the shape min, thick, thin, max.
    pub fn thick_count(&self) -> Option<u64> {
        let r = self.len();
        let thick: u64 = self
            .runs
            .iter()
            .filter(|x| x.1 == EdgeClass::Thick)
            .map(|x| x.0)
            .sum();
        (*self == ClassList::coloured(r, thick).clone() && thick + 2 <= r).then_some(thick)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ClassRepr {
    Plain(Vec<EdgeClass>),
    Compressed { runs: Vec<(u64, EdgeClass)> },
}

impl Serialize for ClassList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = if self.len() <= PLAIN_LIMIT {
            ClassRepr::Plain(
                self.runs
                    .iter()
                    .flat_map(|&(len, c)| std::iter::repeat_n(c, len as usize))
                    .collect(),
            )
        } else {
            ClassRepr::Compressed {
                runs: self.runs.clone(),
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClassList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match ClassRepr::deserialize(d)? {
            ClassRepr::Plain(v) => ClassList::from_runs(v.into_iter().map(|c| (1, c))),
            ClassRepr::Compressed { runs } => ClassList::from_runs(runs),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_merge_and_lookup() {
        let s = SourceList::from_slice(&[1, 1, 0, 0, 0, 2]);
        assert_eq!(s.segments().len(), 3);
        assert_eq!(s.len(), 6);
        assert_eq!(s.get(3), 0);
        assert_eq!(s.get(5), 2);
        assert_eq!(s.to_vec(), vec![1, 1, 0, 0, 0, 2]);
    }

    #[test]
    fn cycle_tally_matches_expansion() {
        let mut s = SourceList::new();
        s.push_run(7, 1);
        s.push_cycle(&[1, 2, 0], 50);
        s.push_run(4, 3);
        let v = s.to_vec();
        for a in 0..v.len() as u64 {
            for b in a..=v.len() as u64 {
                let mut naive = std::collections::BTreeMap::new();
                for &x in &v[a as usize..b as usize] {
                    *naive.entry(x).or_insert(0u64) += 1;
                }
                let naive: Vec<(usize, u64)> = naive.into_iter().collect();
                assert_eq!(s.tally(a..b), naive);
            }
        }
    }

    #[test]
    fn repeated_blocks() {
        let block = SourceList::from_slice(&[0, 1, 1]);
        let mut s = SourceList::new();
        s.append_repeated(&block, 1_000_000_000, 64, 16).unwrap();
        assert_eq!(s.len(), 3_000_000_000);
        assert_eq!(s.segments().len(), 1);
        assert_eq!(s.get(2_999_999_997), 0);
        assert_eq!(s.get(2_999_999_998), 1);
        assert_eq!(s.tally(0..s.len()), vec![(0, 1_000_000_000), (1, 2_000_000_000)]);
    }

    #[test]
    fn zip_aligns_patterns() {
        let mut a = SourceList::new();
        a.push_cycle(&[0, 1], 12);
        let mut b = SourceList::new();
        b.push_run(5, 4);
        b.push_cycle(&[1, 2, 3], 8);
        let z = SourceList::zip_with(&[&a, &b], |v| v[0] * 10 + v[1], 64).unwrap();
        let expect: Vec<usize> = a
            .to_vec()
            .iter()
            .zip(b.to_vec())
            .map(|(x, y)| x * 10 + y)
            .collect();
        assert_eq!(z.to_vec(), expect);
    }

    #[test]
    fn occurrence_index_matches_scan() {
        let mut s = SourceList::new();
        s.push_run(2, 3);
        s.push_cycle(&[0, 1, 1], 40);
        s.push_run(0, 5);
        let v = s.to_vec();
        for modulus in [2, 3] {
            let mut count = std::collections::HashMap::new();
            let expect: Vec<usize> = v
                .iter()
                .map(|&x| {
                    let c = count.entry(x).or_insert(0usize);
                    let out = *c % modulus;
                    *c += 1;
                    out
                })
                .collect();
            assert_eq!(s.occurrence_index(modulus).to_vec(), expect);
        }
        assert_eq!(s.with_ends(9, 8).get(0), 9);
        assert_eq!(s.with_ends(9, 8).last(), 8);
        assert_eq!(s.with_ends(9, 8).len(), s.len());
    }

    #[test]
    fn searches() {
        let mut s = SourceList::new();
        s.push_run(3, 5);
        s.push_cycle(&[0, 1, 2], 30);
        assert_eq!(s.first_where(0, |v| v == 2), Some(7));
        assert_eq!(s.first_where(8, |v| v == 2), Some(10));
        assert_eq!(s.last_where(s.len(), |v| v == 3), Some(4));
        assert_eq!(s.last_where(s.len(), |v| v == 0), Some(32));
        assert_eq!(s.last_where(3, |v| v == 0), None);
    }

    #[test]
    fn serde_plain_and_compressed() {
        let s = SourceList::from_slice(&[0, 2, 2, 1]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, "[0,2,2,1]");
        let back: SourceList = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);

        let big = SourceList::run(0, PLAIN_LIMIT + 1);
        let j = serde_json::to_string(&big).unwrap();
        let back: SourceList = serde_json::from_str(&j).unwrap();
        assert_eq!(back, big);
    }

    #[test]
    fn class_list_shape() {
        let c = ClassList::coloured(9, 4);
        assert_eq!(c.len(), 9);
        assert_eq!(c.get(0), EdgeClass::Plain);
        assert_eq!(c.get(4), EdgeClass::Thick);
        assert_eq!(c.get(5), EdgeClass::Thin);
        assert_eq!(c.get(8), EdgeClass::Plain);
        assert_eq!(c.thick_count(), Some(4));
        assert_eq!(ClassList::from_runs([(3, EdgeClass::Plain)]).thick_count(), None);
    }
}
