//! Membership in D, visit frequencies along orbits, and measure estimates.

use std::fmt::Write as _;

use num::{BigRational, BigUint, One, Signed, Zero};
use serde::Serialize;

use crate::diagram::{Diagram, FinitePath, VertexRef};
use crate::error::{Error, Result};
use crate::extension::copy_paste::{Construction, ExtensionTriple};
use crate::extension::extended::{extended_diagram, full_preimage, ExtendedDiagram};
use crate::spectra::automaton::{
    anchors, plus_vertex, three_to_one_d, two_to_one_d, EdgePredicateAutomaton,
};
use crate::spectra::count::{accepts_path, CountTable};
use crate::util::{fmt_ratio, ratio_u, to_f64};
use crate::vershik::{advance, big_t};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    InD,
    NotInD,
    UnknownAtHorizon,
}

impl Membership {
    pub fn as_str(&self) -> &'static str {
        match self {
            Membership::InD => "in",
            Membership::NotInD => "out",
            Membership::UnknownAtHorizon => "unknown",
        }
    }
}

/// The exact characterisation of E^D for the two concrete constructions.
pub fn structural_d(c: Construction) -> Option<EdgePredicateAutomaton> {
    match c {
        Construction::TwoToOne => Some(two_to_one_d()),
        Construction::ThreeToOne => Some(three_to_one_d()),
        Construction::Generic => None,
    }
}

/// Whether the cylinder of `head`, cut at `horizon`, meets D.
pub fn in_d(t: &ExtensionTriple, head: &FinitePath, horizon: usize) -> Result<Membership> {
    t.base.check_path(head)?;
    if head.start_level != 0 {
        return Err(Error::invalid("heads start at level 0"));
    }
    if horizon == 0 || horizon > t.depth() {
        return Err(Error::invalid(format!("horizon {horizon} outside 1..={}", t.depth())));
    }
    let reach = head.end_level().min(horizon);
    if reach == 0 {
        return Ok(Membership::UnknownAtHorizon);
    }
    let cut = head.window(0, reach);
    let meets = match structural_d(t.construction) {
        Some(a) => accepts_path(&t.base, &a, &cut),
        None => full_preimage(t, &cut)?.level_one().len() >= 2,
    };
    Ok(match (meets, reach == horizon) {
        (false, _) => Membership::NotInD,
        (true, true) => Membership::InD,
        (true, false) => Membership::UnknownAtHorizon,
    })
}

fn window_check(d: &Diagram, head: &FinitePath, n: u64) -> Result<()> {
    if head.start_level != 0 {
        return Err(Error::invalid("heads start at level 0"));
    }
    let t = big_t(d, head);
    if n == 0 || BigUint::from(n) > t {
        return Err(Error::WindowExceedsHorizon(format!("window {n} outside 1..={t}")));
    }
    Ok(())
}

/// `S_D^n` of a head, by stepping its full preimage through the extended
/// diagram and counting visits to level-1 copy-sets of size at least two.
pub fn sdn_direct(t: &ExtensionTriple, head: &FinitePath, n: u64) -> Result<BigRational> {
    t.base.check_path(head)?;
    window_check(&t.base, head, n)?;
    let ext = extended_diagram(t, head.end_level())?;
    let mask = ext.plus_mask();
    let mut p = ext.preimage_path(head)?;
    let mut hits = 0u64;
    for i in 0..n {
        hits += mask[p.trail[1]] as u64;
        if i + 1 < n {
            advance(&ext.diagram, &mut p);
        }
    }
    Ok(ratio_u(&BigUint::from(hits), &BigUint::from(n)))
}

/// Counting table for visits to level-1 copy-sets with two or more copies.
pub fn plus_table(ext: &ExtendedDiagram) -> Result<CountTable<'_>> {
    CountTable::new(&ext.diagram, plus_vertex(ext.plus_mask()), ext.horizon)
}

/// `S_D^n` through the window counter; agrees with [`sdn_direct`] and
/// reaches windows far too long to step through.
pub fn sdn_counted(table: &CountTable<'_>, ext: &ExtendedDiagram, head: &FinitePath, n: &BigUint) -> Result<BigRational> {
    let p = ext.preimage_path(head)?;
    let a = ext.diagram.rank(&p);
    let b = &a + n;
    if n.is_zero() || b > *ext.diagram.path_count(p.end()) {
        return Err(Error::WindowExceedsHorizon(format!("window {n} from rank {a}")));
    }
    Ok(ratio_u(&table.count_in_window(p.end(), &a, &b)?, n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub hits_d: u64,
    pub hits_s: u64,
    /// Membership of the last point counted.
    pub in_d: Membership,
}

impl TraceRow {
    pub fn s_d(&self) -> BigRational {
        ratio_u(&BigUint::from(self.hits_d), &BigUint::from(self.step))
    }

    pub fn s(&self) -> BigRational {
        ratio_u(&BigUint::from(self.hits_s), &BigUint::from(self.step))
    }
}

/// Running averages along an orbit: `S_D` from the full preimage and `S`
/// from one chosen lift.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTrace {
    pub horizon: usize,
    pub lift_top: Vec<usize>,
    pub rows: Vec<TraceRow>,
}

impl FrequencyTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,S_D,S,in_D,S_D_float,S_float\n");
        for row in &self.rows {
            let (sd, s) = (row.s_d(), row.s());
            let _ = writeln!(
                out,
                "{},{},{},{},{:.9},{:.9}",
                row.step,
                fmt_ratio(&sd),
                fmt_ratio(&s),
                row.in_d.as_str(),
                to_f64(&sd),
                to_f64(&s)
            );
        }
        out
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Rows where the lift outruns the full preimage.
    pub fn ordering_violations(&self) -> usize {
        self.rows.iter().filter(|r| r.hits_s > r.hits_d).count()
    }
}

/// Default lift: the first two copies of the top vertex, or all when fewer.
pub fn default_lift(t: &ExtensionTriple, head: &FinitePath) -> Vec<usize> {
    let end = head.end();
    (0..t.spec.copies(end.level, end.index).min(2)).collect()
}

pub fn frequency_trace(
    t: &ExtensionTriple,
    head: &FinitePath,
    steps: u64,
    lift_top: Option<Vec<usize>>,
) -> Result<FrequencyTrace> {
    t.base.check_path(head)?;
    window_check(&t.base, head, steps)?;
    let horizon = head.end_level();
    let ext = extended_diagram(t, horizon)?;
    let mask = ext.plus_mask();
    let top = lift_top.unwrap_or_else(|| default_lift(t, head));
    let mut full = ext.preimage_path(head)?;
    let mut lift = ext.path_over(head, &top)?;
    let structural = structural_d(t.construction);
    let mut rows = Vec::with_capacity(steps as usize);
    let (mut hd, mut hs) = (0u64, 0u64);
    for i in 0..steps {
        let plus = mask[full.trail[1]];
        hd += plus as u64;
        hs += mask[lift.trail[1]] as u64;
        let member = match &structural {
            Some(a) => accepts_path(&t.base, a, &ext.project(&full)),
            None => plus,
        };
        rows.push(TraceRow {
            step: i + 1,
            hits_d: hd,
            hits_s: hs,
            in_d: if member { Membership::InD } else { Membership::NotInD },
        });
        if i + 1 < steps {
            advance(&ext.diagram, &mut full);
            advance(&ext.diagram, &mut lift);
        }
    }
    Ok(FrequencyTrace {
        horizon,
        lift_top: top,
        rows,
    })
}

/// `|E^D(v_0, v)|` for every vertex at level `n`.
pub fn e_d_counts(t: &ExtensionTriple, n: usize) -> Result<Vec<BigUint>> {
    if n == 0 || n > t.depth() {
        return Err(Error::invalid(format!("level {n} outside 1..={}", t.depth())));
    }
    match structural_d(t.construction) {
        Some(a) => {
            let table = CountTable::new(&t.base, a, n)?;
            (0..t.base.level_size(n))
                .map(|v| table.total(VertexRef::new(n, v)))
                .collect()
        }
        None => generic_e_d_counts(t, n),
    }
}

/// E^D counted through full preimages at horizon `n`, for any triple.
pub fn generic_e_d_counts(t: &ExtensionTriple, n: usize) -> Result<Vec<BigUint>> {
    let ext = extended_diagram(t, n)?;
    let table = plus_table(&ext)?;
    (0..t.base.level_size(n))
        .map(|l| table.total(VertexRef::new(n, ext.full_top(l))))
        .collect()
}

pub fn e_d_ratios(t: &ExtensionTriple, n: usize) -> Result<Vec<BigRational>> {
    Ok(e_d_counts(t, n)?
        .iter()
        .zip(t.base.heights(n))
        .map(|(c, h)| ratio_u(c, h))
        .collect())
}

/// `min_v |E^D(v_0,v)| / |E(v_0,v)|` over level `n`.
pub fn measure_lower_bound(t: &ExtensionTriple, n: usize) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::invalid("the lower bound is taken at levels >= 2"));
    }
    Ok(e_d_ratios(t, n)?.into_iter().min().unwrap())
}

/// Fraction of the `steps` orbit points from `start` passing through `v`.
pub fn empirical_tower_measure(d: &Diagram, v: VertexRef, start: &FinitePath, steps: u64) -> Result<BigRational> {
    d.check_path(start)?;
    d.check_vertex(v)?;
    window_check(d, start, steps)?;
    if v.level > start.end_level() {
        return Err(Error::invalid("vertex lies above the head"));
    }
    if v.level == 0 {
        return Ok(BigRational::one());
    }
    let mut mask = vec![false; d.level_size(v.level)];
    mask[v.index] = true;
    let table = CountTable::new(d, anchors(&[(v.level, mask)]), start.end_level())?;
    let a = d.rank(start);
    let b = &a + steps;
    Ok(ratio_u(&table.count_in_window(start.end(), &a, &b)?, &BigUint::from(steps)))
}

/// Paths from each vertex of level `n` up to `top`.
fn paths_up(d: &Diagram, n: usize, top: VertexRef) -> Vec<BigUint> {
    let mut up = vec![BigUint::zero(); d.level_size(top.level)];
    up[top.index] = BigUint::one();
    for k in (n..top.level).rev() {
        let mut next = vec![BigUint::zero(); d.level_size(k)];
        for (v, w) in up.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let r = d.r(k, v);
            for (src, c) in d.incoming(k, v).tally(0..r) {
                next[src] += w * BigUint::from(c);
            }
        }
        up = next;
    }
    up
}

/// Tower proportions at level `n` inside the tallest vertex at the top
/// level: the uniform cylinder measure seen from that vertex.
pub fn tower_measures(d: &Diagram, n: usize) -> Result<Vec<BigRational>> {
    if n > d.depth() {
        return Err(Error::invalid(format!("level {n} beyond depth")));
    }
    let top_level = d.depth();
    let hs = d.heights(top_level);
    let w = (0..hs.len()).max_by(|&a, &b| hs[a].cmp(&hs[b]).then(b.cmp(&a))).unwrap();
    let up = paths_up(d, n, VertexRef::new(top_level, w));
    Ok(up
        .iter()
        .zip(d.heights(n))
        .map(|(u, h)| ratio_u(&(u * h), &hs[w]))
        .collect())
}

/// `sum_v |E^D(v_0,v)|/|E(v_0,v)| * mu(X_v)` over level `n`.
pub fn mu_d_estimate(t: &ExtensionTriple, n: usize, measures: &[BigRational]) -> Result<BigRational> {
    if measures.len() != t.base.level_size(n) {
        return Err(Error::invalid(format!(
            "{} measures for {} vertices",
            measures.len(),
            t.base.level_size(n)
        )));
    }
    if measures.iter().any(|m| m.is_negative()) {
        return Err(Error::invalid("negative tower measure"));
    }
    let total: BigRational = measures.iter().sum();
    if !total.is_one() {
        return Err(Error::invalid(format!("tower measures sum to {total}")));
    }
    Ok(e_d_ratios(t, n)?
        .iter()
        .zip(measures)
        .map(|(r, m)| r * m)
        .sum())
}

/// The level-cap estimate of `sup mu(D)`: the estimate at the deepest level.
pub fn level_cap(t: &ExtensionTriple) -> Result<BigRational> {
    let n = t.depth();
    mu_d_estimate(t, n, &tower_measures(&t.base, n)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSample {
    pub start_rank: String,
    pub window: String,
    pub average: String,
    pub proxy: String,
    pub average_f64: f64,
    pub proxy_f64: f64,
    pub within: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupAudit {
    pub horizon: usize,
    pub cap: String,
    pub cap_f64: f64,
    pub max_observed: String,
    pub max_observed_f64: f64,
    pub tolerance: f64,
    pub samples: Vec<AuditSample>,
    pub violations: usize,
}

/// Compares windowed averages of D-visits with a per-window upper proxy.
///
/// A window of length `w` splits into complete level-`n` towers and at most
/// two partial ones, so its average is at most
/// `max_v |E^D(v)|/|E(v)| + 2 max_v h_n(v) / w` for every `n`.
pub fn sup_frequency_audit(
    t: &ExtensionTriple,
    samples: &[(BigUint, BigUint)],
    tolerance: f64,
) -> Result<SupAudit> {
    let horizon = t.depth();
    let ext = extended_diagram(t, horizon)?;
    let table = plus_table(&ext)?;
    let mut level_max = Vec::new();
    for n in 1..=horizon {
        let counts = generic_e_d_counts(t, n)?;
        let worst = counts
            .iter()
            .zip(t.base.heights(n))
            .map(|(c, h)| ratio_u(c, h))
            .max()
            .unwrap();
        level_max.push((worst, t.base.max_height(n).clone()));
    }
    let top = t.base.heights(horizon);
    let w = (0..top.len()).max_by(|&a, &b| top[a].cmp(&top[b]).then(b.cmp(&a))).unwrap();
    let v = VertexRef::new(horizon, ext.full_top(w));
    let h = ext.diagram.path_count(v).clone();
    let cap = level_cap(t)?;
    let mut out = Vec::new();
    let mut best = BigRational::zero();
    let mut violations = 0;
    for (start, len) in samples {
        if len.is_zero() || (start + len) > h {
            return Err(Error::WindowExceedsHorizon(format!("window [{start}, +{len}) beyond {h}")));
        }
        let avg = ratio_u(&table.count_in_window(v, start, &(start + len))?, len);
        let proxy = level_max
            .iter()
            .map(|(m, hh)| m + ratio_u(&(hh * 2u32), len))
            .min()
            .unwrap();
        let within = to_f64(&avg) <= to_f64(&proxy) + tolerance;
        violations += (!within) as usize;
        if avg > best {
            best = avg.clone();
        }
        out.push(AuditSample {
            start_rank: start.to_string(),
            window: len.to_string(),
            average: fmt_ratio(&avg),
            proxy: fmt_ratio(&proxy),
            average_f64: to_f64(&avg),
            proxy_f64: to_f64(&proxy),
            within,
        });
    }
    Ok(SupAudit {
        horizon,
        cap: fmt_ratio(&cap),
        cap_f64: to_f64(&cap),
        max_observed: fmt_ratio(&best),
        max_observed_f64: to_f64(&best),
        tolerance,
        samples: out,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::two_to_one::{build_two_to_one, TwoToOneBudget};
    use crate::util::ratio;
    use crate::vershik::successor;

    fn odometer(r: &[usize]) -> Diagram {
        Diagram::from_lists(r.iter().map(|&k| vec![vec![0; k]]).collect()).unwrap()
    }

    fn two_adic_triple() -> ExtensionTriple {
        build_two_to_one(&odometer(&[2; 20]), &TwoToOneBudget::default()).unwrap().0
    }

    #[test]
    fn identity_triple_never_visits() {
        let t = ExtensionTriple::identity(odometer(&[2, 3, 2]));
        let head = t.base.min_path(VertexRef::new(3, 0), 0);
        assert!(sdn_direct(&t, &head, 11).unwrap().is_zero());
        assert_eq!(in_d(&t, &head, 3).unwrap(), Membership::NotInD);
        assert!(measure_lower_bound(&t, 2).unwrap().is_zero());
    }

    #[test]
    fn two_to_one_ratio_at_level_two() {
        let t = two_adic_triple();
        assert_eq!(measure_lower_bound(&t, 2).unwrap(), ratio(7, 8));
        assert_eq!(generic_e_d_counts(&t, 3).unwrap(), e_d_counts(&t, 3).unwrap());
        let m = tower_measures(&t.base, 2).unwrap();
        assert_eq!(mu_d_estimate(&t, 2, &m).unwrap(), ratio(7, 8));
    }

    #[test]
    fn structural_and_preimage_membership_agree() {
        let t = two_adic_triple();
        let v = VertexRef::new(3, 0);
        let mut p = t.base.min_path(v, 0);
        loop {
            let generic = full_preimage(&t, &p).unwrap().level_one().len() >= 2;
            assert_eq!(in_d(&t, &p, 3).unwrap() == Membership::InD, generic);
            match successor(&t.base, &p) {
                Some(q) => p = q,
                None => break,
            }
        }
        let short = t.base.min_path(VertexRef::new(2, 0), 0);
        assert_eq!(in_d(&t, &short, 3).unwrap(), Membership::NotInD);
        let inner = t.base.path_from_picks(VertexRef::new(2, 0), &[0, 3]).unwrap();
        assert_eq!(in_d(&t, &inner, 3).unwrap(), Membership::UnknownAtHorizon);
    }

    #[test]
    fn trace_matches_counter() {
        let t = two_adic_triple();
        let head = t.base.path_from_picks(VertexRef::new(3, 0), &[1, 2, 5]).unwrap();
        let tr = frequency_trace(&t, &head, 300, None).unwrap();
        assert_eq!(tr.ordering_violations(), 0);
        let ext = extended_diagram(&t, 3).unwrap();
        let table = plus_table(&ext).unwrap();
        for n in [1u64, 17, 300] {
            let row = &tr.rows[n as usize - 1];
            assert_eq!(row.s_d(), sdn_direct(&t, &head, n).unwrap());
            assert_eq!(row.s_d(), sdn_counted(&table, &ext, &head, &BigUint::from(n)).unwrap());
        }
    }

    #[test]
    fn tower_measure_full_sweep() {
        let d = Diagram::from_lists(vec![
            vec![vec![0, 0], vec![0]],
            vec![vec![0, 1, 1], vec![1, 0]],
        ])
        .unwrap();
        let start = d.min_path(VertexRef::new(2, 0), 0);
        let m = empirical_tower_measure(&d, VertexRef::new(1, 1), &start, 3).unwrap();
        assert_eq!(m, ratio(1, 3));
        let tm = tower_measures(&d, 1).unwrap();
        assert_eq!(tm.iter().sum::<BigRational>(), BigRational::one());
    }
}
