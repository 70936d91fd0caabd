//! The irregular two-to-one extension.

use num::{BigRational, BigUint, Zero};
use serde::Serialize;

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::extension::copy_paste::{Construction, CopyPasteSpec, ExtensionTriple};
use crate::seglist::SourceList;
use crate::util::{fmt_ratio, ratio_u, to_f64};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoToOneBudget {
    /// Cap on the depth of the telescoped base.
    pub max_levels: usize,
    /// Fewest telescoped levels accepted.
    pub min_levels: usize,
}

impl Default for TwoToOneBudget {
    fn default() -> Self {
        TwoToOneBudget {
            max_levels: 8,
            min_levels: 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalAudit {
    pub level: usize,
    pub min_r: u64,
    /// Largest |E^ex(v_0, v)| / |E(v_0, v)| over the level.
    pub ex_ratio: String,
    pub ex_ratio_f64: f64,
    pub below_half: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoToOneReport {
    pub cuts: Vec<usize>,
    pub levels: Vec<ExtremalAudit>,
    pub copy_counts: Vec<Vec<usize>>,
}

/// Path counts between all vertex pairs of levels `a` and `c`.
fn pair_counts(d: &Diagram, a: usize, c: usize) -> Vec<Vec<u128>> {
    let mut m: Vec<Vec<u128>> = (0..d.level_size(a))
        .map(|u| (0..d.level_size(a)).map(|v| (u == v) as u128).collect())
        .collect();
    for n in a..c {
        let mut next = vec![vec![0u128; d.level_size(n + 1)]; d.level_size(a)];
        for v in 0..d.level_size(n + 1) {
            for (w, cnt) in d.incoming(n, v).tally(0..d.r(n, v)) {
                for (u, row) in m.iter().enumerate() {
                    let add = row[w].saturating_mul(cnt as u128);
                    next[u][v] = next[u][v].saturating_add(add);
                }
            }
        }
        m = next;
    }
    m
}

/// Greedy telescoping so that new level `k` has at least `2^(k+3)` edges into
/// every vertex, consecutive levels `>= 1` are joined by at least 3 edges per
/// vertex pair, and the extremal edges of each level share their sources.
pub fn preprocess_two_to_one(base: &Diagram, budget: &TwoToOneBudget) -> Result<(Diagram, Vec<usize>)> {
    let mut cuts = vec![0];
    let mut a = 0;
    let mut c = 1;
    while c <= base.depth() && cuts.len() <= budget.max_levels {
        let k = cuts.len() - 1;
        let need = 1u128 << (k + 3).min(120);
        let m = pair_counts(base, a, c);
        let r_ok = (0..base.level_size(c)).all(|v| m.iter().map(|row| row[v]).sum::<u128>() >= need);
        let ok = r_ok
            && (k == 0
                || (m.iter().all(|row| row.iter().all(|&x| x >= 3))
                    && base.unique_extremal_sources(a, c).is_some()));
        if ok {
            cuts.push(c);
            a = c;
        }
        c += 1;
    }
    if cuts.len() - 1 < budget.min_levels {
        return Err(Error::Precondition(format!(
            "not enough levels: telescoping reached depth {}, need {}",
            cuts.len() - 1,
            budget.min_levels
        )));
    }
    let mut d = base.telescope(&cuts)?;
    for k in 1..d.depth() {
        let (min_src, _) = d.unique_extremal_sources(k, k + 1).unwrap();
        if min_src != 0 {
            let mut perm: Vec<usize> = (0..d.level_size(k)).collect();
            perm.swap(0, min_src);
            d = d.permute_level(k, &perm)?;
        }
    }
    Ok((d, cuts))
}

/// |E^ex(v_0, v)| for every vertex, by recursion over the top edge.
pub fn extremal_counts(d: &Diagram) -> Vec<Vec<BigUint>> {
    let mut ex = vec![vec![BigUint::zero()]];
    if d.depth() >= 1 {
        ex.push(vec![BigUint::zero(); d.level_size(1)]);
    }
    for n in 1..d.depth() {
        let below = &ex[n];
        let level = (0..d.level_size(n + 1))
            .map(|l| {
                let list = d.incoming(n, l);
                let r = list.len();
                let mut acc = d.height(n, list.first()).clone();
                if r >= 2 {
                    acc += d.height(n, list.last());
                }
                if r > 2 {
                    for (s, cnt) in list.tally(1..r - 1) {
                        acc += &below[s] * cnt;
                    }
                }
                acc
            })
            .collect();
        ex.push(level);
    }
    ex
}

pub fn extremal_audit(d: &Diagram) -> Vec<ExtremalAudit> {
    let ex = extremal_counts(d);
    (2..=d.depth())
        .map(|n| {
            let worst: BigRational = (0..d.level_size(n))
                .map(|v| ratio_u(&ex[n][v], d.height(n, v)))
                .max()
                .unwrap();
            ExtremalAudit {
                level: n,
                min_r: (0..d.level_size(n)).map(|v| d.r(n - 1, v)).min().unwrap(),
                ex_ratio: fmt_ratio(&worst),
                ex_ratio_f64: to_f64(&worst),
                below_half: worst < crate::util::ratio(1, 2),
            }
        })
        .collect()
}

/// Copy counts 2, or 3 for vertex 0; minimal edges start at the third copy of
/// vertex 0, maximal edges at copy 0, the third copy alternates by parity and
/// all other edges keep their copy index.
pub fn two_to_one_spec(d: &Diagram) -> Result<CopyPasteSpec> {
    if !d.has_normalized_sources() {
        return Err(Error::Precondition(
            "(c): minimal edges must share the source vertex 0 on every level".into(),
        ));
    }
    let mut spec = CopyPasteSpec::identity(d);
    for n in 1..=d.depth() {
        spec.copy_counts[n] = (0..d.level_size(n)).map(|l| if l == 0 { 3 } else { 2 }).collect();
    }
    for l in 0..d.level_size(1) {
        spec.source_copy[0][l] = vec![SourceList::run(0, d.r(0, l)); spec.copy_counts[1][l]];
    }
    for n in 1..d.depth() {
        for l in 0..d.level_size(n + 1) {
            let list = d.incoming(n, l);
            let r = list.len();
            if r < 3 {
                return Err(Error::Precondition(format!(
                    "(b): vertex {l} at level {} has only {r} incoming edges",
                    n + 1
                )));
            }
            let mut per_copy: Vec<SourceList> =
                (0..2).map(|j| SourceList::run(j, r).with_ends(2, 0)).collect();
            if l == 0 {
                per_copy.push(list.occurrence_index(2).with_ends(2, 0));
            }
            spec.source_copy[n][l] = per_copy;
        }
    }
    Ok(spec)
}

pub fn build_two_to_one(base: &Diagram, budget: &TwoToOneBudget) -> Result<(ExtensionTriple, TwoToOneReport)> {
    let (d, cuts) = preprocess_two_to_one(base, budget)?;
    let levels = extremal_audit(&d);
    if let Some(bad) = levels.iter().find(|a| !a.below_half) {
        return Err(Error::budget(format!(
            "(a) fails at level {}: |E^ex|/|E| = {} is not below 1/2",
            bad.level, bad.ex_ratio
        )));
    }
    let spec = two_to_one_spec(&d)?;
    let report = TwoToOneReport {
        cuts,
        levels,
        copy_counts: spec.copy_counts.clone(),
    };
    Ok((ExtensionTriple::new(d, spec, Construction::TwoToOne)?, report))
}
