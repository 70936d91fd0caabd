//! Sampled verification that D-frequencies of the three-to-one extension stay
//! at least 1/3 once an orbit has crossed a thin interval.

use num::{BigInt, BigRational, BigUint, Zero};
use rand::Rng;
use serde::Serialize;

use crate::diagram::{Diagram, FinitePath, VertexRef};
use crate::error::{Error, Result};
use crate::extension::copy_paste::{Construction, ExtensionTriple};
use crate::seglist::EdgeClass;
use crate::spectra::automaton::{c_double_star, not_thick_at, three_to_one_d};
use crate::spectra::count::CountTable;
use crate::util::{fmt_ratio, ratio, ratio_u, to_f64};
use crate::vershik::big_t;

#[derive(Clone, Debug)]
pub struct GapParams {
    pub heads: usize,
    pub windows_per_head: usize,
    /// Also sample heads with a single thin edge.
    pub one_thin: bool,
    /// Levels whose colouring is certified; (d) is checked there.
    pub certified_levels: usize,
    pub d_windows: usize,
}

impl Default for GapParams {
    fn default() -> Self {
        GapParams {
            heads: 16,
            windows_per_head: 8,
            one_thin: true,
            certified_levels: 2,
            d_windows: 16,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapSample {
    pub picks: Vec<u64>,
    pub top: usize,
    pub thin_level: Option<usize>,
    /// Deepest level crossed before the window ends.
    pub lev: usize,
    pub window: String,
    pub s_d: String,
    pub s_d_f64: f64,
    pub at_least_third: bool,
    /// Average of C** one level below `lev` over the window and one more point.
    pub c_double_star: String,
    pub c_double_star_f64: f64,
    pub below_half: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThickCheck {
    pub level: usize,
    pub bound: String,
    pub max_ratio: String,
    pub max_ratio_f64: f64,
    pub windows: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub horizon: usize,
    pub samples: Vec<GapSample>,
    pub min_s_d: String,
    pub min_s_d_f64: f64,
    pub all_at_least_third: bool,
    pub all_below_half: bool,
    pub thick_checks: Vec<ThickCheck>,
    /// Sampled frequencies strictly inside `(1e-3, 1/3 - 1e-3)`.
    pub gap_witnesses: usize,
    /// Some sampled orbit visits D with frequency at least 1/3.
    pub positive_frequency: bool,
}

impl GapReport {
    pub fn passes(&self) -> bool {
        !self.samples.is_empty()
            && self.all_at_least_third
            && self.all_below_half
            && self.gap_witnesses == 0
            && self.thick_checks.iter().all(|c| c.holds)
    }
}

fn positions_of(d: &Diagram, level: usize, v: usize, class: EdgeClass) -> Vec<std::ops::Range<u64>> {
    let r = d.r(level, v);
    match d.classes(level) {
        Some(c) => c[v]
            .split(1..r.saturating_sub(1))
            .into_iter()
            .filter(|(_, k)| *k == class)
            .map(|(x, _)| x)
            .collect(),
        None => Vec::new(),
    }
}

fn pick_in(ranges: &[std::ops::Range<u64>], rng: &mut impl Rng) -> Option<u64> {
    let total: u64 = ranges.iter().map(|x| x.end - x.start).sum();
    if total == 0 {
        return None;
    }
    let mut i = rng.gen_range(0..total);
    for x in ranges {
        let len = x.end - x.start;
        if i < len {
            return Some(x.start + i);
        }
        i -= len;
    }
    None
}

/// A head to the top level, thick on levels `1..depth`, except for an
/// optional thin edge at `thin`.
pub fn sample_thick_head(d: &Diagram, thin: Option<usize>, rng: &mut impl Rng) -> Result<FinitePath> {
    let h = d.depth();
    let top = rng.gen_range(0..d.level_size(h));
    let mut picks = vec![0u64; h];
    let mut v = top;
    for k in (0..h).rev() {
        let m = if k == 0 {
            rng.gen_range(0..d.r(0, v))
        } else {
            let class = if thin == Some(k) { EdgeClass::Thin } else { EdgeClass::Thick };
            pick_in(&positions_of(d, k, v, class), rng)
                .ok_or_else(|| Error::invalid(format!("level {k} has no {class:?} edge into vertex {v}")))?
        };
        picks[k] = m;
        v = d.source(k, v, m);
    }
    d.path_from_picks(VertexRef::new(h, top), &picks)
}

/// Steps until the edge of `alpha` on `level` first becomes maximal.
pub fn crossing_time(d: &Diagram, alpha: &FinitePath, level: usize) -> BigUint {
    let below: BigUint = (0..=level)
        .map(|k| d.weight_prefix(k, alpha.trail[k + 1], alpha.picks[k]))
        .sum();
    let v = alpha.trail[level + 1];
    d.weight_prefix(level, v, d.r(level, v) - 1) - below
}

pub fn random_below(rng: &mut impl Rng, lo: &BigUint, hi: &BigUint) -> BigUint {
    let span = hi - lo;
    let bits = span.bits();
    loop {
        let words = (bits as usize).div_ceil(32).max(1);
        let raw: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
        let mut x = BigUint::from_slice(&raw);
        x >>= (words as u64 * 32).saturating_sub(bits);
        if x < span {
            return lo + x;
        }
    }
}

pub fn gap_check_three_to_one(t: &ExtensionTriple, params: &GapParams, rng: &mut impl Rng) -> Result<GapReport> {
    if t.construction != Construction::ThreeToOne {
        return Err(Error::invalid("the gap check needs a three-to-one triple"));
    }
    let d = &t.base;
    let h = d.depth();
    if h < 4 {
        return Err(Error::WindowExceedsHorizon(format!(
            "depth {h} leaves no level crossing past the first; need at least 4"
        )));
    }
    let dt = CountTable::new(d, three_to_one_d(), h)?;
    let cstars: Vec<CountTable<'_>> = (1..h)
        .map(|n| CountTable::new(d, c_double_star(n), h))
        .collect::<Result<_>>()?;
    let third = ratio(1, 3);
    let half = ratio(1, 2);
    let eps = ratio(1, 1000);
    let mut samples = Vec::new();
    let mut values: Vec<BigRational> = Vec::new();
    for s in 0..params.heads {
        let thin_level = (params.one_thin && s % 2 == 1).then_some(1);
        let alpha = sample_thick_head(d, thin_level, rng)?;
        let n0 = thin_level.map_or(1, |j| j + 1);
        let lo_level = 2.max(n0 + 1);
        if lo_level > h - 2 {
            continue;
        }
        let a = d.rank(&alpha);
        let end = alpha.end();
        let tt = big_t(d, &alpha);
        for _ in 0..params.windows_per_head {
            let big_n = rng.gen_range(lo_level..=h - 2);
            let lo = crossing_time(d, &alpha, big_n);
            let hi = crossing_time(d, &alpha, big_n + 1).min(&tt + 1u32);
            if lo >= hi || lo.is_zero() {
                continue;
            }
            let m = random_below(rng, &lo, &hi);
            let hits = dt.count_in_window(end, &a, &(&a + &m))?;
            let s_d = ratio_u(&hits, &m);
            let c2 = &cstars[big_n - 2];
            let c_hits = c2.count_in_window(end, &a, &(&a + &m + 1u32))?;
            let c_avg = ratio_u(&c_hits, &(&m + 1u32));
            values.push(s_d.clone());
            samples.push(GapSample {
                picks: alpha.picks.clone(),
                top: end.index,
                thin_level,
                lev: big_n,
                window: m.to_string(),
                at_least_third: s_d >= third,
                s_d_f64: to_f64(&s_d),
                s_d: fmt_ratio(&s_d),
                below_half: c_avg < half,
                c_double_star_f64: to_f64(&c_avg),
                c_double_star: fmt_ratio(&c_avg),
            });
        }
    }
    let min = values.iter().min().cloned().unwrap_or_else(BigRational::zero);
    let gap_witnesses = values.iter().filter(|v| **v > eps && **v < &third - &eps).count();
    let thick_checks = (1..=params.certified_levels.min(h - 1))
        .map(|n| thick_check(d, n, params.d_windows, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(GapReport {
        horizon: h,
        min_s_d: fmt_ratio(&min),
        min_s_d_f64: to_f64(&min),
        all_at_least_third: samples.iter().all(|x| x.at_least_third),
        all_below_half: samples.iter().all(|x| x.below_half),
        thick_checks,
        gap_witnesses,
        positive_frequency: values.iter().any(|v| *v >= third),
        samples,
    })
}

/// Non-thick frequency on `level` along orbits starting from a quite-small
/// head, against `3^-level`.
fn thick_check(d: &Diagram, level: usize, windows: usize, rng: &mut impl Rng) -> Result<ThickCheck> {
    let h = d.depth();
    let table = CountTable::new(d, not_thick_at(level), h)?;
    let bound = BigRational::new(BigInt::from(1), num::pow(BigInt::from(3), level));
    let mut worst = BigRational::zero();
    let mut count = 0;
    let top = rng.gen_range(0..d.level_size(h));
    let mut picks = vec![0u64; h];
    let mut v = top;
    for k in (level + 1..h).rev() {
        let m = pick_in(&positions_of(d, k, v, EdgeClass::Thick), rng)
            .ok_or_else(|| Error::invalid(format!("level {k} has no thick edge into vertex {v}")))?;
        picks[k] = m;
        v = d.source(k, v, m);
    }
    picks[level] = 1;
    let gamma = d.path_from_picks(VertexRef::new(h, top), &picks)?;
    let a = d.rank(&gamma);
    let tt = big_t(d, &gamma);
    let mut ks: Vec<BigUint> = Vec::new();
    // the end of the first run of non-thick edges: through the maximal
    // edge and the next minimal one
    let exit = crossing_time(d, &gamma, level) + d.height(level, d.incoming(level, gamma.trail[level + 1]).last());
    if exit <= tt {
        let next = d.path_at_rank(gamma.end(), &(&a + &exit))?;
        let k = &exit + d.height(level, d.source(level, next.trail[level + 1], 0));
        if k <= &tt + 1u32 {
            ks.push(k);
        }
        ks.push(exit);
    }
    for _ in 0..windows {
        ks.push(random_below(rng, &BigUint::from(1u32), &(&tt + 2u32)));
    }
    for k in ks {
        let n = table.count_in_window(gamma.end(), &a, &(&a + &k))?;
        let r = ratio_u(&n, &k);
        if r > worst {
            worst = r;
        }
        count += 1;
    }
    Ok(ThickCheck {
        level,
        bound: fmt_ratio(&bound),
        max_ratio: fmt_ratio(&worst),
        max_ratio_f64: to_f64(&worst),
        windows: count,
        holds: worst < bound,
    })
}
