//! Thick/thin colouring of a telescoped base.
//!
//! With `i1` the largest height on level `n` and `i2 = 2 i1`, the edges into
//! each vertex on level `n + 1` are split as min, `M` thick, thin, max with
//!
//! ```text
//! ((r - M) i1 + i2) / M < 3^-n / 2
//! ```
//!
//! and, from the second coloured level on, a thin gap `rho = min (r - M)`
//! exceeding `2 3^m i2(m)` for `m <= n` and `2 3^m i2(m + 1)` for `m < n`.

use num::{BigUint, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::seglist::ClassList;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ColourParams {
    /// Fewest thin edges into every vertex.
    pub thin_width: u64,
    /// Levels coloured under the exact inequalities.
    pub certified_levels: usize,
    /// Extra top levels with a plain min/thick/thin/max split.
    pub loose_levels: usize,
    /// Cap on `log2 r` for a telescoped level.
    pub max_log2_r: u32,
    /// Telescope the input first to meet the standing assumptions.
    pub preprocess: bool,
}

impl Default for ColourParams {
    fn default() -> Self {
        ColourParams {
            thin_width: 2,
            certified_levels: 2,
            loose_levels: 1,
            max_log2_r: 48,
            preprocess: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelColouring {
    pub level: usize,
    pub certified: bool,
    #[serde(serialize_with = "crate::util::ser_big")]
    pub i1: BigUint,
    #[serde(serialize_with = "crate::util::ser_big")]
    pub i2: BigUint,
    pub r: Vec<u64>,
    pub thick: Vec<u64>,
    /// Required lower bound (exclusive) on `r - M`.
    #[serde(serialize_with = "crate::util::ser_big")]
    pub rho_bound: BigUint,
    /// `lhs < rhs` per vertex for `2 3^n ((r - M) i1 + i2) < M`.
    pub thick_inequality: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct ColouredBase {
    pub diagram: Diagram,
    pub cuts: Vec<usize>,
    pub levels: Vec<LevelColouring>,
}

fn three_pow(n: usize) -> BigUint {
    num::pow(BigUint::from(3u32), n)
}

/// Smallest `M` with `2 3^n (non_thick i1 + i2) < M`.
pub fn min_thick_count(i1: &BigUint, i2: &BigUint, n: usize, non_thick: u64) -> BigUint {
    BigUint::from(2u32) * three_pow(n) * (i1 * non_thick + i2) + BigUint::one()
}

/// Smallest `M` with `2 3^n ((r - M) i1 + i2) < M` for a fixed `r`.
pub fn thick_for_r(i1: &BigUint, i2: &BigUint, n: usize, r: u64) -> BigUint {
    let c = BigUint::from(2u32) * three_pow(n);
    let num = &c * (i1 * r + i2);
    let den = &c * i1 + BigUint::one();
    num / den + BigUint::one()
}

pub fn thick_inequality_holds(i1: &BigUint, i2: &BigUint, n: usize, r: u64, m: u64) -> bool {
    m <= r && BigUint::from(2u32) * three_pow(n) * (i1 * (r - m) + i2) < BigUint::from(m)
}

/// The exclusive lower bound on the thin gap at coloured level `k`, given `i2`
/// of levels `1..=k`.
pub fn rho_bound(i2: &[BigUint], k: usize) -> BigUint {
    if k < 2 {
        return BigUint::zero();
    }
    let mut b = BigUint::zero();
    for m in 1..=k {
        b = b.max(BigUint::from(2u32) * three_pow(m) * &i2[m]);
    }
    for m in 1..k {
        b = b.max(BigUint::from(2u32) * three_pow(m) * &i2[m + 1]);
    }
    b
}

/// Checks the standing assumptions, naming the first that fails.
pub fn check_colouring_preconditions(d: &Diagram) -> Result<()> {
    for n in 1..d.depth() {
        match d.unique_extremal_sources(n, n + 1) {
            Some((0, _)) => {}
            _ => {
                return Err(Error::Precondition(format!(
                    "(a): vertex 0 at level {n} is not the unique source of the minimal edges"
                )))
            }
        }
    }
    for n in 2..=d.depth() {
        for v in 0..d.level_size(n) {
            let r = d.r(n - 1, v);
            if r < 5 {
                return Err(Error::Precondition(format!(
                    "(b): vertex {v} at level {n} is the range of only {r} edges, need at least 5"
                )));
            }
        }
        let tally = d.incoming(n - 1, 0).tally(0..d.r(n - 1, 0));
        for u in 0..d.level_size(n - 1) {
            let c = tally.iter().find(|x| x.0 == u).map_or(0, |x| x.1);
            if c < 4 {
                return Err(Error::Precondition(format!(
                    "(c): vertex 0 at level {n} receives {c} edges from vertex {u}, need at least 4"
                )));
            }
        }
    }
    Ok(())
}

fn pair_counts_at_least(d: &Diagram, a: usize, c: usize, k: u64) -> bool {
    let mut m: Vec<Vec<BigUint>> = (0..d.level_size(a))
        .map(|u| (0..d.level_size(a)).map(|v| BigUint::from((u == v) as u8)).collect())
        .collect();
    for n in a..c {
        let mut next = vec![vec![BigUint::zero(); d.level_size(n + 1)]; d.level_size(a)];
        for v in 0..d.level_size(n + 1) {
            for (w, cnt) in d.incoming(n, v).tally(0..d.r(n, v)) {
                for (u, row) in m.iter().enumerate() {
                    next[u][v] += &row[w] * cnt;
                }
            }
        }
        m = next;
    }
    m.iter().all(|row| row.iter().all(|x| x >= &BigUint::from(k)))
}

/// Telescopes until every window from level 1 on joins each vertex pair by at
/// least 4 edges with a unique minimal source, then relabels that source to 0.
pub fn preprocess_for_colouring(d: &Diagram) -> Result<(Diagram, Vec<usize>)> {
    let mut cuts = vec![0, 1];
    let mut c = 2;
    while c <= d.depth() {
        let a = *cuts.last().unwrap();
        if pair_counts_at_least(d, a, c, 5) && d.unique_extremal_sources(a, c).is_some() {
            cuts.push(c);
        }
        c += 1;
    }
    let mut out = d.telescope(&cuts)?;
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

/// Paths from any level-`a` vertex into each vertex of level `c`, grown one level at a time.
struct RelativeCounts<'a> {
    d: &'a Diagram,
    level: usize,
    counts: Vec<BigUint>,
}

impl<'a> RelativeCounts<'a> {
    fn new(d: &'a Diagram, a: usize) -> Self {
        RelativeCounts {
            d,
            level: a,
            counts: vec![BigUint::one(); d.level_size(a)],
        }
    }

    fn step(&mut self) {
        let n = self.level;
        self.counts = (0..self.d.level_size(n + 1))
            .map(|v| {
                self.d
                    .incoming(n, v)
                    .tally(0..self.d.r(n, v))
                    .into_iter()
                    .map(|(s, c)| &self.counts[s] * c)
                    .sum()
            })
            .collect();
        self.level += 1;
    }
}

pub fn color_diagram(base: &Diagram, params: &ColourParams) -> Result<ColouredBase> {
    if params.thin_width == 0 {
        return Err(Error::invalid("thin width must be at least 1"));
    }
    let (work, pre_cuts) = if params.preprocess {
        preprocess_for_colouring(base)?
    } else {
        (base.clone(), (0..=base.depth()).collect())
    };
    check_colouring_preconditions(&work)?;
    let w = params.thin_width;
    let cap = BigUint::one() << params.max_log2_r;
    let mut cuts = vec![0, 1];
    let mut i2s = vec![BigUint::zero()];
    let mut plans: Vec<(bool, BigUint, BigUint, BigUint)> = Vec::new();
    let total = params.certified_levels + params.loose_levels;
    for k in 1..=total {
        let a = cuts[k];
        let certified = k <= params.certified_levels;
        let i1 = work.max_height(a).clone();
        let i2 = &i1 * 2u32;
        i2s.push(i2.clone());
        let rho = if certified { rho_bound(&i2s, k) } else { BigUint::zero() };
        let mut rel = RelativeCounts::new(&work, a);
        let found = loop {
            if rel.level >= work.depth() {
                break None;
            }
            rel.step();
            if rel.counts.iter().any(|r| r > &cap) {
                return Err(Error::budget(format!(
                    "colouring level {k} needs more than 2^{} edges per vertex",
                    params.max_log2_r
                )));
            }
            let fits = rel.counts.iter().all(|r| {
                let r = r.to_u64().unwrap();
                if certified {
                    let m = thick_for_r(&i1, &i2, k, r);
                    m >= BigUint::from(2u32)
                        && BigUint::from(r) >= &m + w + 2u32
                        && BigUint::from(r) - &m > rho
                } else {
                    r >= w + 4 && r >= 5
                }
            });
            if fits {
                break Some(rel.level);
            }
        };
        let Some(c) = found else {
            return Err(Error::budget(format!(
                "base depth {} too shallow to colour level {k} (thin gap must exceed {rho})",
                work.depth()
            )));
        };
        cuts.push(c);
        plans.push((certified, i1, i2, rho));
    }
    let tele = work.telescope(&cuts)?;
    let mut classes = vec![None; tele.depth()];
    let mut levels = Vec::new();
    for (k, (certified, i1, i2, rho)) in plans.into_iter().enumerate().map(|(i, p)| (i + 1, p)) {
        let mut thick = Vec::new();
        let mut rs = Vec::new();
        let mut ineq = Vec::new();
        let mut cl = Vec::new();
        for v in 0..tele.level_size(k + 1) {
            let r = tele.r(k, v);
            let m = if certified {
                thick_for_r(&i1, &i2, k, r).to_u64().unwrap()
            } else {
                r - w - 2
            };
            let lhs = BigUint::from(2u32) * three_pow(k) * (&i1 * (r - m) + &i2);
            ineq.push((lhs.to_string(), m.to_string()));
            thick.push(m);
            rs.push(r);
            cl.push(ClassList::coloured(r, m));
        }
        classes[k] = Some(cl);
        levels.push(LevelColouring {
            level: k,
            certified,
            i1,
            i2,
            r: rs,
            thick,
            rho_bound: rho,
            thick_inequality: ineq,
        });
    }
    let diagram = tele.with_classes(classes)?;
    let cuts = cuts.iter().map(|&c| pre_cuts[c]).collect();
    Ok(ColouredBase {
        diagram,
        cuts,
        levels,
    })
}

/// Independent re-check of the certified inequalities; returns failures.
pub fn verify_colouring(c: &ColouredBase) -> Vec<String> {
    let d = &c.diagram;
    let mut bad = Vec::new();
    let mut i2s = vec![BigUint::zero()];
    for lvl in &c.levels {
        let k = lvl.level;
        let i1 = d.max_height(k).clone();
        let i2 = &i1 * 2u32;
        i2s.push(i2.clone());
        if !lvl.certified {
            continue;
        }
        let rho = rho_bound(&i2s, k);
        let mut gap: Option<u64> = None;
        for v in 0..d.level_size(k + 1) {
            let r = d.r(k, v);
            let Some(m) = d.thick_count(k, v) else {
                bad.push(format!("level {k} vertex {v} is not coloured"));
                continue;
            };
            if !thick_inequality_holds(&i1, &i2, k, r, m) {
                bad.push(format!("level {k} vertex {v}: thick inequality fails for r={r}, M={m}"));
            }
            gap = Some(gap.map_or(r - m, |g| g.min(r - m)));
        }
        if k >= 2 && gap.is_some_and(|g| BigUint::from(g) <= rho) {
            bad.push(format!("level {k}: thin gap {} does not exceed {rho}", gap.unwrap()));
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odometer(r: &[usize]) -> Diagram {
        Diagram::from_lists(r.iter().map(|&k| vec![vec![0; k]]).collect()).unwrap()
    }

    #[test]
    fn level_one_threshold() {
        let i1 = BigUint::from(8u32);
        let i2 = BigUint::from(16u32);
        assert_eq!(min_thick_count(&i1, &i2, 1, 2), BigUint::from(193u32));
        assert_eq!(min_thick_count(&i1, &i2, 1, 4), BigUint::from(289u32));
        assert_eq!(thick_for_r(&i1, &i2, 1, 512), BigUint::from(504u32));
        assert!(thick_inequality_holds(&i1, &i2, 1, 512, 504));
        assert!(!thick_inequality_holds(&i1, &i2, 1, 512, 503));
    }

    #[test]
    fn deficient_base_names_b() {
        let d = odometer(&[8, 2, 2, 2]);
        let err = color_diagram(&d, &ColourParams::default()).unwrap_err();
        assert!(err.to_string().contains("(b)"), "{err}");
    }

    #[test]
    fn odometer_colouring_certifies() {
        let mut r = vec![8];
        r.extend(std::iter::repeat_n(2, 60));
        let params = ColourParams {
            preprocess: true,
            ..ColourParams::default()
        };
        let c = color_diagram(&odometer(&r), &params).unwrap();
        assert_eq!(c.levels[0].r, vec![512]);
        assert_eq!(c.levels[0].thick, vec![504]);
        assert!(c.levels[1].r[0] >= 1 << 34);
        assert!(verify_colouring(&c).is_empty());
        assert_eq!(c.diagram.thick_count(3, 0), Some(4));
    }

    #[test]
    fn empty_thin_band_is_invalid() {
        let d = odometer(&[8, 8, 8]);
        let bad = d.with_classes(vec![None, Some(vec![ClassList::coloured(8, 6)]), None]);
        assert!(bad.is_err());
    }
}
