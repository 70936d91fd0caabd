//! Exact counting of accepted paths in rank windows, by a digit walk over the
//! mixed-radix order.

use std::ops::Range;

use num::{BigUint, One, Zero};

use crate::diagram::{Diagram, FinitePath, VertexRef};
use crate::error::{Error, Result};
use crate::seglist::EdgeClass;
use crate::spectra::automaton::{EdgePredicateAutomaton, EdgeView};

/// Positions on a position-sensitive level are visited one by one up to this cap.
const POSITION_CAP: u64 = 1 << 22;

pub fn edge_view(d: &Diagram, level: usize, range: usize, pos: u64) -> EdgeView {
    EdgeView {
        level,
        range,
        source: d.source(level, range, pos),
        pos,
        r: d.r(level, range),
        class: d.class_of(level, range, pos),
    }
}

/// Edges of a path from level 0, listed top-down.
pub fn path_edges(d: &Diagram, p: &FinitePath) -> Vec<EdgeView> {
    (0..p.picks.len())
        .rev()
        .map(|k| edge_view(d, p.start_level + k, p.trail[k + 1], p.picks[k]))
        .collect()
}

pub fn accepts_path(d: &Diagram, a: &EdgePredicateAutomaton, p: &FinitePath) -> bool {
    a.run(&path_edges(d, p))
}

/// `f[k][u][s]`: paths from the root into `u` at level `k` accepted when the
/// automaton enters them in state `s`.
pub struct CountTable<'a> {
    d: &'a Diagram,
    auto: EdgePredicateAutomaton,
    f: Vec<Vec<Vec<BigUint>>>,
}

impl<'a> CountTable<'a> {
    pub fn new(d: &'a Diagram, auto: EdgePredicateAutomaton, top: usize) -> Result<Self> {
        if top > d.depth() {
            return Err(Error::invalid(format!("level {top} beyond depth {}", d.depth())));
        }
        let states = auto.states as usize;
        let leaf: Vec<BigUint> = (0..states)
            .map(|s| if auto.accepts(s as u8) { BigUint::one() } else { BigUint::zero() })
            .collect();
        let mut t = CountTable {
            d,
            auto,
            f: vec![vec![leaf; d.level_size(0)]],
        };
        for k in 0..top {
            let mut level = Vec::with_capacity(d.level_size(k + 1));
            for v in 0..d.level_size(k + 1) {
                let r = d.r(k, v);
                let row = (0..states)
                    .map(|s| t.range_sum(k, v, 0..r, s as u8))
                    .collect::<Result<Vec<_>>>()?;
                level.push(row);
            }
            t.f.push(level);
        }
        Ok(t)
    }

    pub fn diagram(&self) -> &Diagram {
        self.d
    }

    pub fn automaton(&self) -> &EdgePredicateAutomaton {
        &self.auto
    }

    pub fn top(&self) -> usize {
        self.f.len() - 1
    }

    fn check(&self, v: VertexRef) -> Result<()> {
        self.d.check_vertex(v)?;
        if v.level > self.top() {
            return Err(Error::invalid(format!("table only reaches level {}", self.top())));
        }
        Ok(())
    }

    /// Accepted completions over the edges at `level` into `v` with
    /// positions in `range`, entering in state `s`.
    fn range_sum(&self, level: usize, v: usize, range: Range<u64>, s: u8) -> Result<BigUint> {
        let d = self.d;
        let r = d.r(level, v);
        let below = &self.f[level];
        let mut acc = BigUint::zero();
        if range.start >= range.end {
            return Ok(acc);
        }
        let add_single = |m: u64, acc: &mut BigUint| {
            let e = edge_view(d, level, v, m);
            *acc += &below[e.source][self.auto.step(s, &e) as usize];
        };
        if self.auto.position_sensitive(level) {
            if range.end - range.start > POSITION_CAP {
                return Err(Error::budget(format!(
                    "{} positions on a position-sensitive level",
                    range.end - range.start
                )));
            }
            for m in range {
                add_single(m, &mut acc);
            }
            return Ok(acc);
        }
        if range.contains(&0) {
            add_single(0, &mut acc);
        }
        if r >= 2 && range.contains(&(r - 1)) {
            add_single(r - 1, &mut acc);
        }
        let inner = range.start.max(1)..range.end.min(r.saturating_sub(1));
        if inner.start >= inner.end {
            return Ok(acc);
        }
        let runs = match d.classes(level) {
            Some(c) => c[v].split(inner),
            None => vec![(inner, EdgeClass::Plain)],
        };
        let list = d.incoming(level, v);
        for (sub, class) in runs {
            for (src, count) in list.tally(sub.clone()) {
                let e = EdgeView {
                    level,
                    range: v,
                    source: src,
                    pos: sub.start,
                    r,
                    class,
                };
                acc += &below[src][self.auto.step(s, &e) as usize] * BigUint::from(count);
            }
        }
        Ok(acc)
    }

    /// Accepted paths among all paths into `v`.
    pub fn total(&self, v: VertexRef) -> Result<BigUint> {
        self.check(v)?;
        Ok(self.f[v.level][v.index][self.auto.start as usize].clone())
    }

    /// Accepted paths into `v` of rank `< t`.
    pub fn count_below(&self, v: VertexRef, t: &BigUint) -> Result<BigUint> {
        self.check(v)?;
        let h = self.d.path_count(v);
        if t >= h {
            if t > h {
                return Err(Error::WindowExceedsHorizon(format!("rank {t} beyond {h} paths at {v}")));
            }
            return self.total(v);
        }
        let mut acc = BigUint::zero();
        let mut s = self.auto.start;
        let mut cur = v.index;
        let mut rest = t.clone();
        for k in (0..v.level).rev() {
            let (m, rem) = self.d.position_at_weight(k, cur, &rest);
            acc += self.range_sum(k, cur, 0..m, s)?;
            let e = edge_view(self.d, k, cur, m);
            s = self.auto.step(s, &e);
            cur = e.source;
            rest = rem;
        }
        Ok(acc)
    }

    /// Accepted paths into `v` with rank in `[a, b)`.
    pub fn count_in_window(&self, v: VertexRef, a: &BigUint, b: &BigUint) -> Result<BigUint> {
        if a > b {
            return Err(Error::invalid(format!("empty interval [{a}, {b})")));
        }
        Ok(self.count_below(v, b)? - self.count_below(v, a)?)
    }

    /// Smallest rank `t >= from` whose path is accepted, if any.
    pub fn first_accepted(&self, v: VertexRef, from: &BigUint) -> Result<Option<BigUint>> {
        let h = self.d.path_count(v).clone();
        let base = self.count_below(v, from)?;
        if self.total(v)? == base {
            return Ok(None);
        }
        let (mut lo, mut hi) = (from.clone(), h);
        // invariant: count_below(lo) == base < count_below(hi)
        while &lo + 1u32 < hi {
            let mid: BigUint = (&lo + &hi) >> 1;
            if self.count_below(v, &mid)? == base {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(lo))
    }
}

/// One-shot form of [`CountTable::count_in_window`].
pub fn count_in_window(
    d: &Diagram,
    a: &EdgePredicateAutomaton,
    v: VertexRef,
    window: Range<&BigUint>,
) -> Result<BigUint> {
    CountTable::new(d, a.clone(), v.level)?.count_in_window(v, window.start, window.end)
}

/// Accepted paths among all of `E(v_0, v)`.
pub fn e_class_count(d: &Diagram, a: &EdgePredicateAutomaton, v: VertexRef) -> Result<BigUint> {
    CountTable::new(d, a.clone(), v.level)?.total(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::automaton::{always, extremal_seen, level0_pick};
    use crate::vershik::successor;

    fn odometer(r: &[usize]) -> Diagram {
        Diagram::from_lists(r.iter().map(|&k| vec![vec![0; k]]).collect()).unwrap()
    }

    fn brute(d: &Diagram, a: &EdgePredicateAutomaton, v: VertexRef, lo: u64, hi: u64) -> u64 {
        let mut p = d.min_path(v, 0);
        let mut n = 0;
        for t in 0..hi {
            if t >= lo && accepts_path(d, a, &p) {
                n += 1;
            }
            match successor(d, &p) {
                Some(q) => p = q,
                None => break,
            }
        }
        n
    }

    #[test]
    fn pick_one_on_binary_odometer() {
        let d = odometer(&[2, 2, 2]);
        let v = VertexRef::new(3, 0);
        let n = count_in_window(&d, &level0_pick(1), v, &BigUint::zero()..&BigUint::from(8u32)).unwrap();
        assert_eq!(n, BigUint::from(4u32));
    }

    #[test]
    fn always_counts_width() {
        let d = Diagram::from_lists(vec![
            vec![vec![0, 0], vec![0]],
            vec![vec![0, 1, 1], vec![1, 0]],
        ])
        .unwrap();
        let v = VertexRef::new(2, 0);
        let t = CountTable::new(&d, always(), 2).unwrap();
        assert_eq!(t.total(v).unwrap(), BigUint::from(4u32));
        let n = t.count_in_window(v, &BigUint::one(), &BigUint::from(3u32)).unwrap();
        assert_eq!(n, BigUint::from(2u32));
    }

    #[test]
    fn matches_enumeration() {
        let d = Diagram::from_lists(vec![
            vec![vec![0, 0, 0], vec![0, 0]],
            vec![vec![1, 0, 1, 1], vec![0, 1, 0]],
            vec![vec![0, 1, 1, 0], vec![1, 1, 0, 0, 1]],
        ])
        .unwrap();
        let a = extremal_seen();
        let t = CountTable::new(&d, a.clone(), 3).unwrap();
        for l in 0..2 {
            let v = VertexRef::new(3, l);
            let h = d.path_count(v).clone();
            let h64: u64 = h.try_into().unwrap();
            for lo in 0..=h64 {
                for hi in lo..=h64 {
                    let n = t
                        .count_in_window(v, &BigUint::from(lo), &BigUint::from(hi))
                        .unwrap();
                    assert_eq!(n, BigUint::from(brute(&d, &a, v, lo, hi)));
                }
            }
        }
    }

    #[test]
    fn first_accepted_finds_next_hit() {
        let d = odometer(&[2, 2, 2]);
        let t = CountTable::new(&d, level0_pick(1), 3).unwrap();
        let v = VertexRef::new(3, 0);
        assert_eq!(t.first_accepted(v, &BigUint::from(2u32)).unwrap(), Some(BigUint::from(3u32)));
        assert_eq!(t.first_accepted(v, &BigUint::from(8u32)).unwrap(), None);
    }
}
