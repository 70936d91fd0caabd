//! Realisable frequencies in the extended diagram and the construction of
//! paths whose running averages oscillate around a target.

use num::{BigInt, BigRational, BigUint, One, Signed, Zero};
use serde::Serialize;

use crate::diagram::{Diagram, FinitePath, VertexRef};
use crate::error::{Error, Result};
use crate::extension::copy_paste::ExtensionTriple;
use crate::extension::extended::{extended_diagram, ExtendedDiagram};
use crate::spectra::count::CountTable;
use crate::spectra::frequency::{level_cap, plus_table};
use crate::util::{fmt_ratio, ratio_u, to_f64};
use crate::vershik::{exceeds_on_scale, find_exceeding_level, ScaleCertificate};

type Best = Option<(BigInt, BigUint)>;

/// Max-suffix data for the sequence `q * hit - p` over the paths into a
/// vertex, in rank order.
#[derive(Clone, Debug)]
struct Node {
    total: BigInt,
    /// Best nonempty suffix: value and start rank.
    any: Best,
    /// Best suffix of length at least two.
    long: Best,
}

fn better(cur: &mut Best, cand: Best) {
    if let Some((v, t)) = cand {
        if cur.as_ref().is_none_or(|(c, _)| &v > c) {
            *cur = Some((v, t));
        }
    }
}

/// Best `any(s_m) + sum_{m' > m} total(s_{m'})` over positions `m < lim`,
/// with the start rank shifted into the tower of `u`.
fn best_before(d: &Diagram, level: usize, u: usize, lim: u64, below: &[Node], total: &BigInt) -> Best {
    let list = d.incoming(level, u);
    let mut best: Best = None;
    let mut before = BigInt::zero();
    for (i, seg) in list.segments().iter().enumerate() {
        let a = list.segment_start(i);
        let len = list.segment_end(i) - a;
        let p = seg.period();
        let cycle: BigInt = seg.pattern.iter().map(|&x| &below[x].total).sum();
        let eff = len.min(lim.saturating_sub(a));
        let mut pre = BigInt::zero();
        for (q, &x) in seg.pattern.iter().enumerate() {
            let q = q as u64;
            if q < eff {
                if let Some((sv, st)) = &below[x].any {
                    let cnt = (eff - q - 1) / p + 1;
                    let j = if cycle.is_negative() { cnt - 1 } else { 0 };
                    let value = sv + total - &before - &cycle * BigInt::from(j) - &pre - &below[x].total;
                    let m = a + j * p + q;
                    better(&mut best, Some((value, d.weight_prefix(level, u, m) + st)));
                }
            }
            pre += &below[x].total;
        }
        before += &cycle * BigInt::from(len / p);
        before += seg.pattern[..(len % p) as usize]
            .iter()
            .map(|&x| &below[x].total)
            .sum::<BigInt>();
    }
    best
}

/// Runs the max-suffix recursion up to `top`. `allowed[k]`, when present,
/// restricts suffix starts to paths through flagged vertices at level `k`.
fn suffix_dp(
    d: &Diagram,
    mask: &[bool],
    lambda: &BigRational,
    top: usize,
    allowed: &[Option<Vec<bool>>],
) -> Vec<Vec<Node>> {
    let p = lambda.numer().clone();
    let q = lambda.denom().clone();
    let mut levels: Vec<Vec<Node>> = vec![Vec::new()];
    for k in 1..=top {
        let mut level = Vec::with_capacity(d.level_size(k));
        for u in 0..d.level_size(k) {
            let r = d.r(k - 1, u);
            let node = if k == 1 {
                let w = if mask[u] { &q - &p } else { -&p };
                let rb = BigInt::from(r);
                let (any, long) = if w.is_positive() {
                    let all = Some((&w * &rb, BigUint::zero()));
                    (all.clone(), if r >= 2 { all } else { None })
                } else {
                    let long = (r >= 2).then(|| (&w * 2, BigUint::from(r - 2)));
                    (Some((w.clone(), BigUint::from(r - 1))), long)
                };
                Node {
                    total: w * rb,
                    any,
                    long,
                }
            } else {
                let below = &levels[k - 1];
                let list = d.incoming(k - 1, u);
                let total: BigInt = list
                    .tally(0..r)
                    .iter()
                    .map(|&(x, c)| &below[x].total * BigInt::from(c))
                    .sum();
                let any = best_before(d, k - 1, u, r, below, &total);
                let mut long = best_before(d, k - 1, u, r - 1, below, &total);
                let last = list.last();
                better(
                    &mut long,
                    below[last]
                        .long
                        .as_ref()
                        .map(|(v, t)| (v.clone(), d.weight_prefix(k - 1, u, r - 1) + t)),
                );
                Node { total, any, long }
            };
            level.push(node);
        }
        if let Some(Some(ok)) = allowed.get(k) {
            for (u, n) in level.iter_mut().enumerate() {
                if !ok[u] {
                    n.any = None;
                    n.long = None;
                }
            }
        }
        levels.push(level);
    }
    levels
}

/// Best `sum_{i in [t, h-1)} (q * hit_i - p)` over starts `t < h - 1`: the
/// long suffixes minus the maximal path, which no window includes.
fn objective(d: &Diagram, mask: &[bool], lambda: &BigRational, dp: &[Vec<Node>], v: VertexRef) -> Best {
    let (val, start) = dp[v.level][v.index].long.clone()?;
    let top = d.max_path(v, 0);
    let last = if mask[top.trail[1]] {
        lambda.denom() - lambda.numer()
    } else {
        -lambda.numer()
    };
    Some((val - last, start))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Realisable {
    #[serde(serialize_with = "crate::util::ser_ratio")]
    pub value: BigRational,
    /// Rank of a path attaining the value.
    #[serde(serialize_with = "crate::util::ser_big")]
    pub start_rank: BigUint,
    pub iterations: usize,
}

/// Average of visits over `[t, h - 1)` in the tower of `v`.
fn suffix_average(table: &CountTable<'_>, v: VertexRef, t: &BigUint) -> Result<BigRational> {
    let h = table.diagram().path_count(v);
    let end = h - 1u32;
    Ok(ratio_u(&table.count_in_window(v, t, &end)?, &(&end - t)))
}

/// Largest `S^{T(gamma)}(gamma)` over paths into `a` with `T(gamma) > 0`,
/// found by fractional programming on exact max-suffix sums. `None` when
/// every path into `a` is maximal.
pub fn realizable_max(ext: &ExtendedDiagram, a: VertexRef, max_iterations: usize) -> Result<Option<Realisable>> {
    let d = &ext.diagram;
    d.check_vertex(a)?;
    if a.level == 0 {
        return Err(Error::invalid("realisable frequencies live at levels >= 1"));
    }
    if d.path_count(a) < &BigUint::from(2u32) {
        return Ok(None);
    }
    let mask = ext.plus_mask();
    let table = plus_table(ext)?;
    let mut t = BigUint::zero();
    let mut lambda = suffix_average(&table, a, &t)?;
    for it in 1..=max_iterations {
        let dp = suffix_dp(d, &mask, &lambda, a.level, &[]);
        let (val, start) = objective(d, &mask, &lambda, &dp, a).expect("two or more paths");
        if !val.is_positive() {
            return Ok(Some(Realisable {
                value: lambda,
                start_rank: t,
                iterations: it,
            }));
        }
        t = start;
        lambda = suffix_average(&table, a, &t)?;
    }
    Err(Error::budget(format!("no fixed point after {max_iterations} iterations")))
}

/// Vertices of level `n` that realise some frequency `>= nu`, and the rest.
pub fn v_plus_set(ext: &ExtendedDiagram, n: usize, nu: &BigRational) -> Result<(Vec<usize>, Vec<usize>)> {
    if nu.is_negative() {
        return Err(Error::invalid("nu must be non-negative"));
    }
    if n == 0 || n > ext.horizon {
        return Err(Error::invalid(format!("level {n} outside 1..={}", ext.horizon)));
    }
    let flags = plus_flags(ext, nu, n);
    Ok((0..flags.len()).partition(|&v| flags[v]))
}

fn plus_flags(ext: &ExtendedDiagram, nu: &BigRational, n: usize) -> Vec<bool> {
    let mask = ext.plus_mask();
    let dp = suffix_dp(&ext.diagram, &mask, nu, n, &[]);
    (0..ext.diagram.level_size(n))
        .map(|v| {
            objective(&ext.diagram, &mask, nu, &dp, VertexRef::new(n, v))
                .is_some_and(|(x, _)| !x.is_negative())
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RealizeParams {
    pub nu: BigRational,
    /// `delta_1, delta_2, ...`; defaults to `min(nu/4, 2^-i)`.
    pub deltas: Option<Vec<BigRational>>,
    /// Levels `n_1 < ... < n_k`; built by scale search when absent.
    pub ladder: Option<Vec<usize>>,
    /// Ladder length for the automatic search.
    pub rungs: usize,
    pub first_level: usize,
    /// The target must stay below the level-cap estimate minus this margin.
    pub margin: BigRational,
    pub max_iterations: usize,
}

impl RealizeParams {
    pub fn new(nu: BigRational) -> Self {
        RealizeParams {
            nu,
            deltas: None,
            ladder: None,
            rungs: 3,
            first_level: 2,
            margin: BigRational::zero(),
            max_iterations: 64,
        }
    }
}

pub fn default_delta(nu: &BigRational, i: usize) -> BigRational {
    let quarter = nu / BigInt::from(4);
    let power = BigRational::new(BigInt::one(), BigInt::one() << i);
    quarter.min(power)
}

#[derive(Clone, Debug, Serialize)]
pub struct Segment {
    pub index: usize,
    pub from_level: usize,
    pub to_level: usize,
    pub picks: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Band {
    pub index: usize,
    pub level: usize,
    /// `lower` for `S >= nu - 2 delta`, `upper` for `S <= nu + 2 delta`.
    pub kind: &'static str,
    #[serde(serialize_with = "crate::util::ser_ratio")]
    pub bound: BigRational,
    #[serde(serialize_with = "crate::util::ser_ratio")]
    pub value: BigRational,
    #[serde(serialize_with = "crate::util::ser_big")]
    pub hits: BigUint,
    #[serde(serialize_with = "crate::util::ser_big")]
    pub window: BigUint,
    pub value_f64: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationPlan {
    #[serde(serialize_with = "crate::util::ser_ratio")]
    pub nu: BigRational,
    #[serde(serialize_with = "crate::util::ser_ratio_vec")]
    pub deltas: Vec<BigRational>,
    pub ladder: Vec<usize>,
    /// The ladder gained a level to make its length odd.
    pub extended: bool,
    pub certificates: Vec<ScaleCertificate>,
    pub top_copies: (usize, Vec<usize>),
    pub segments: Vec<Segment>,
    /// The constructed path in the extended diagram.
    pub path: FinitePath,
    /// Its projection to the base.
    pub base_path: FinitePath,
    /// The path is the full preimage of its projection.
    pub full_preimage: bool,
    pub bands: Vec<Band>,
}

impl RealizationPlan {
    pub fn bands_hold(&self) -> bool {
        self.bands.iter().all(|b| b.holds)
    }
}

fn build_ladder(base: &Diagram, params: &RealizeParams, deltas: &mut Vec<BigRational>) -> Result<(Vec<usize>, bool, Vec<ScaleCertificate>)> {
    let nu = &params.nu;
    let delta = |i: usize, deltas: &mut Vec<BigRational>| -> BigRational {
        while deltas.len() < i {
            let j = deltas.len() + 1;
            deltas.push(default_delta(nu, j));
        }
        deltas[i - 1].clone()
    };
    let mut certs = Vec::new();
    let mut ladder = match &params.ladder {
        Some(l) => {
            if l.is_empty() || l[0] <= 1 || l.windows(2).any(|w| w[0] >= w[1]) || *l.last().unwrap() > base.depth() {
                return Err(Error::LadderInvalid(format!("ladder {l:?} must rise from above 1 to at most {}", base.depth())));
            }
            for (i, w) in l.windows(2).enumerate() {
                let di = delta(i + 2, deltas);
                match exceeds_on_scale(base, w[0], w[1], &di)? {
                    Some(c) => certs.push(c),
                    None => {
                        return Err(Error::LadderInvalid(format!(
                            "level {} does not exceed level {} on scale {}",
                            w[1],
                            w[0],
                            fmt_ratio(&di)
                        )))
                    }
                }
            }
            l.clone()
        }
        None => {
            if params.rungs == 0 || params.first_level <= 1 {
                return Err(Error::LadderInvalid("need at least one rung above level 1".into()));
            }
            let mut l = vec![params.first_level];
            while l.len() < params.rungs {
                let di = delta(l.len() + 1, deltas);
                let c = find_exceeding_level(base, *l.last().unwrap(), &di, base.depth())?;
                l.push(c.big_n);
                certs.push(c);
            }
            l
        }
    };
    let extended = ladder.len() % 2 == 0;
    if extended {
        let di = delta(ladder.len() + 1, deltas);
        let c = find_exceeding_level(base, *ladder.last().unwrap(), &di, base.depth())?;
        ladder.push(c.big_n);
        certs.push(c);
    }
    delta(ladder.len(), deltas);
    deltas.truncate(ladder.len());
    Ok((ladder, extended, certs))
}

/// Reachability of flagged vertices at level `low` from vertices at levels
/// `low..=high`.
fn reach_down(d: &Diagram, low: usize, high: usize, flags: &[bool]) -> Vec<Vec<bool>> {
    let mut reach = vec![flags.to_vec()];
    for k in low..high {
        let below = reach.last().unwrap().clone();
        reach.push(
            (0..d.level_size(k + 1))
                .map(|v| d.incoming(k, v).first_where(0, |s| below[s]).is_some())
                .collect(),
        );
    }
    reach
}

/// Builds a path through the ladder whose running averages at the rung
/// horizons alternate between the two bands around `nu`.
pub fn realize_frequency(t: &ExtensionTriple, params: &RealizeParams) -> Result<RealizationPlan> {
    let nu = params.nu.clone();
    if !nu.is_positive() {
        return Err(Error::invalid("the target frequency must be positive"));
    }
    let cap = level_cap(t)?;
    if nu >= &cap - &params.margin {
        return Err(Error::TargetUnreachable(format!(
            "target {} is not below the level-cap estimate {} minus margin {}",
            fmt_ratio(&nu),
            fmt_ratio(&cap),
            fmt_ratio(&params.margin)
        )));
    }
    let mut deltas = params.deltas.clone().unwrap_or_default();
    let half = &nu / BigInt::from(2);
    if deltas.iter().any(|x| !x.is_positive() || x >= &half) {
        return Err(Error::LadderInvalid("every delta must lie in (0, nu/2)".into()));
    }
    let (ladder, extended, certificates) = build_ladder(&t.base, params, &mut deltas)?;
    let k = ladder.len();
    let horizon = ladder[k - 1];
    let ext = extended_diagram(t, horizon)?;
    let d = &ext.diagram;
    let mask = ext.plus_mask();
    let plus: Vec<Vec<bool>> = ladder.iter().map(|&n| plus_flags(&ext, &nu, n)).collect();

    let mut tops: Vec<usize> = (0..d.level_size(horizon)).filter(|&v| plus[k - 1][v]).collect();
    if tops.is_empty() {
        return Err(Error::TargetUnreachable(format!(
            "no vertex at level {horizon} realises {}",
            fmt_ratio(&nu)
        )));
    }
    let full: Vec<usize> = (0..t.base.level_size(horizon)).map(|l| ext.full_top(l)).collect();
    tops.sort_by_key(|v| (!full.contains(v), *v));

    let mut last_err = None;
    for &top in &tops {
        match construct(&ext, &mask, &plus, &ladder, &nu, top) {
            Ok(path) => {
                let plan = assemble(&ext, &nu, &deltas, &ladder, extended, &certificates, path)?;
                if plan.bands_hold() {
                    return Ok(plan);
                }
                last_err = Some(Error::TargetUnreachable(format!(
                    "bands fail for the path through copy-set {:?}",
                    plan.top_copies
                )));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

fn construct(
    ext: &ExtendedDiagram,
    mask: &[bool],
    plus: &[Vec<bool>],
    ladder: &[usize],
    nu: &BigRational,
    top: usize,
) -> Result<FinitePath> {
    let d = &ext.diagram;
    let k = ladder.len();
    let mut pieces: Vec<FinitePath> = Vec::new();
    let mut v = VertexRef::new(ladder[k - 1], top);
    let mut i = k;
    loop {
        // odd rung: a realising path into v, anchored on the two rungs below
        let mut allowed: Vec<Option<Vec<bool>>> = vec![None; v.level + 1];
        if i >= 3 {
            allowed[ladder[i - 2]] = Some(plus[i - 2].clone());
            allowed[ladder[i - 3]] = Some(plus[i - 3].clone());
        }
        let dp = suffix_dp(d, mask, nu, v.level, &allowed);
        let (val, start) = objective(d, mask, nu, &dp, v).ok_or_else(|| {
            Error::TargetUnreachable(format!("no anchored realising path into {v}"))
        })?;
        if val.is_negative() {
            return Err(Error::TargetUnreachable(format!("no anchored realising path into {v}")));
        }
        let tilde = d.path_at_rank(v, &start)?;
        if i == 1 {
            pieces.push(tilde);
            break;
        }
        let lo = ladder[i - 2];
        pieces.push(tilde.window(lo, v.level));
        // even rung: the largest segment into u starting in V+ two rungs down
        let u = tilde.vertex(lo);
        let low = ladder[i - 3];
        let reach = reach_down(d, low, lo, &plus[i - 3]);
        let mut picks = vec![0u64; lo - low];
        let mut x = u.index;
        for lvl in (low..lo).rev() {
            let list = d.incoming(lvl, x);
            let row = &reach[lvl - low];
            let m = list
                .last_where(list.len(), |s| row[s])
                .ok_or_else(|| Error::TargetUnreachable(format!("no segment from V+ into {u}")))?;
            picks[lvl - low] = m;
            x = list.get(m);
        }
        pieces.push(d.path_from_picks(u, &picks)?);
        v = VertexRef::new(low, x);
        i -= 2;
    }
    let mut path = pieces.pop().unwrap();
    while let Some(upper) = pieces.pop() {
        path = path.join(&upper);
    }
    Ok(path)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    ext: &ExtendedDiagram,
    nu: &BigRational,
    deltas: &[BigRational],
    ladder: &[usize],
    extended: bool,
    certificates: &[ScaleCertificate],
    path: FinitePath,
) -> Result<RealizationPlan> {
    let base_path = ext.project(&path);
    let full_preimage = ext.preimage_path(&base_path)? == path;
    let bands = plan_bands(ext, &path, nu, deltas, ladder)?;
    let mut segments = Vec::new();
    let mut from = 0;
    for (i, &n) in ladder.iter().enumerate() {
        segments.push(Segment {
            index: i + 1,
            from_level: from,
            to_level: n,
            picks: path.picks[from..n].to_vec(),
        });
        from = n;
    }
    let top = path.end();
    Ok(RealizationPlan {
        nu: nu.clone(),
        deltas: deltas.to_vec(),
        ladder: ladder.to_vec(),
        extended,
        certificates: certificates.to_vec(),
        top_copies: ext.copy_set(top.level, top.index).clone(),
        segments,
        path,
        base_path,
        full_preimage,
        bands,
    })
}

/// The running average of the whole path over `T` of each rung prefix,
/// against the band for that rung.
pub fn plan_bands(
    ext: &ExtendedDiagram,
    path: &FinitePath,
    nu: &BigRational,
    deltas: &[BigRational],
    ladder: &[usize],
) -> Result<Vec<Band>> {
    let table = plus_table(ext)?;
    let d = &ext.diagram;
    let mut out = Vec::new();
    for (i, &n) in ladder.iter().enumerate() {
        let prefix = path.window(0, n);
        let v = prefix.end();
        let a = d.rank(&prefix);
        let window = d.path_count(v) - 1u32 - &a;
        let odd = i % 2 == 0;
        let two_delta = &deltas[i] * BigInt::from(2);
        let bound = if odd { nu - &two_delta } else { nu + &two_delta };
        let (hits, value, holds) = if window.is_zero() {
            (BigUint::zero(), BigRational::zero(), false)
        } else {
            let hits = table.count_in_window(v, &a, &(&a + &window))?;
            let value = ratio_u(&hits, &window);
            let holds = if odd { value >= bound } else { value <= bound };
            (hits, value, holds)
        };
        out.push(Band {
            index: i + 1,
            level: n,
            kind: if odd { "lower" } else { "upper" },
            value_f64: to_f64(&value),
            bound,
            value,
            hits,
            window,
            holds,
        });
    }
    Ok(out)
}

/// Recomputes the bands of a plan from scratch.
pub fn verify_plan(t: &ExtensionTriple, plan: &RealizationPlan) -> Result<bool> {
    let ext = extended_diagram(t, *plan.ladder.last().unwrap())?;
    ext.diagram.check_path(&plan.path)?;
    let bands = plan_bands(&ext, &plan.path, &plan.nu, &plan.deltas, &plan.ladder)?;
    let certs_ok = plan.certificates.iter().all(|c| {
        exceeds_on_scale(&t.base, c.n, c.big_n, &c.delta)
            .ok()
            .flatten()
            .is_some_and(|fresh| fresh == *c)
    });
    Ok(certs_ok && bands.iter().all(|b| b.holds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::copy_paste::{Construction, CopyPasteSpec};
    use crate::seglist::SourceList;
    use crate::vershik::successor;

    fn odometer(r: &[usize]) -> Diagram {
        Diagram::from_lists(r.iter().map(|&k| vec![vec![0; k]]).collect()).unwrap()
    }

    fn parity_triple() -> ExtensionTriple {
        let b = Diagram::from_lists(vec![
            vec![vec![0, 0], vec![0, 0, 0]],
            vec![vec![0, 1, 1], vec![1, 0, 0, 1]],
            vec![vec![1, 0, 1], vec![0, 1, 0]],
        ])
        .unwrap();
        let mut spec = CopyPasteSpec::identity(&b);
        for n in 1..=3 {
            spec.copy_counts[n] = vec![2, 2];
        }
        for l in 0..2 {
            let r = b.r(0, l) as usize;
            spec.source_copy[0][l] = vec![SourceList::run(0, r as u64); 2];
        }
        for n in 1..3 {
            for l in 0..2 {
                let r = b.r(n, l) as usize;
                let a: Vec<usize> = (0..r).map(|m| m % 2).collect();
                let c: Vec<usize> = (0..r).map(|m| (m / 2) % 2).collect();
                spec.source_copy[n][l] = vec![SourceList::from_slice(&a), SourceList::from_slice(&c)];
            }
        }
        ExtensionTriple::new(b, spec, Construction::Generic).unwrap()
    }

    fn brute_max(ext: &ExtendedDiagram, v: VertexRef) -> Option<BigRational> {
        let d = &ext.diagram;
        let mask = ext.plus_mask();
        let mut hits = Vec::new();
        let mut p = d.min_path(v, 0);
        loop {
            hits.push(mask[p.trail[1]] as u64);
            match successor(d, &p) {
                Some(q) => p = q,
                None => break,
            }
        }
        let h = hits.len();
        (0..h.saturating_sub(1))
            .map(|t| {
                let s: u64 = hits[t..h - 1].iter().sum();
                BigRational::new(BigInt::from(s), BigInt::from((h - 1 - t) as u64))
            })
            .max()
    }

    #[test]
    fn dp_matches_brute_force() {
        let t = parity_triple();
        for horizon in 1..=3 {
            let ext = extended_diagram(&t, horizon).unwrap();
            for n in 1..=horizon {
                for v in 0..ext.diagram.level_size(n) {
                    let vr = VertexRef::new(n, v);
                    let got = realizable_max(&ext, vr, 64).unwrap().map(|r| r.value);
                    assert_eq!(got, brute_max(&ext, vr), "vertex {vr} at horizon {horizon}");
                }
            }
        }
    }

    #[test]
    fn identity_only_realises_zero() {
        let t = ExtensionTriple::identity(odometer(&[2, 3, 3]));
        let ext = extended_diagram(&t, 3).unwrap();
        let r = realizable_max(&ext, VertexRef::new(3, 0), 64).unwrap().unwrap();
        assert!(r.value.is_zero());
        let (plus, minus) = v_plus_set(&ext, 2, &BigRational::new(1.into(), 10.into())).unwrap();
        assert!(plus.is_empty());
        assert_eq!(minus, vec![0]);
    }

    #[test]
    fn thresholds_match_maxima() {
        let t = parity_triple();
        let ext = extended_diagram(&t, 3).unwrap();
        for v in 0..ext.diagram.level_size(3) {
            let m = realizable_max(&ext, VertexRef::new(3, v), 64).unwrap();
            let Some(m) = m else { continue };
            let (plus, _) = v_plus_set(&ext, 3, &m.value).unwrap();
            assert!(plus.contains(&v));
            let above = &m.value + BigRational::new(1.into(), 1000.into());
            let (plus, _) = v_plus_set(&ext, 3, &above).unwrap();
            assert!(!plus.contains(&v));
        }
    }

    #[test]
    fn plans_on_two_to_one_odometer() {
        use crate::extension::two_to_one::{build_two_to_one, TwoToOneBudget};
        let budget = TwoToOneBudget {
            max_levels: 9,
            ..TwoToOneBudget::default()
        };
        let (t, _) = build_two_to_one(&odometer(&[2; 60]), &budget).unwrap();
        let cap = level_cap(&t).unwrap();
        for j in 1..=9 {
            let nu = &cap * BigRational::new(BigInt::from(95 * j), BigInt::from(1000));
            let plan = realize_frequency(&t, &RealizeParams::new(nu.clone())).unwrap();
            assert!(plan.bands_hold());
            assert!(verify_plan(&t, &plan).unwrap());
        }
        let over = realize_frequency(&t, &RealizeParams::new(cap.clone()));
        assert!(matches!(over, Err(Error::TargetUnreachable(_))));
    }
}
