//! The Vershik successor on finite paths and the scale relation between levels.

use num::{BigRational, BigUint, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::diagram::{Diagram, FinitePath, VertexRef};
use crate::error::{Error, Result};

/// Mixed-radix increment. Returns `false`, leaving `p` untouched, at the maximal path.
pub fn advance(d: &Diagram, p: &mut FinitePath) -> bool {
    let s = p.start_level;
    let Some(k) = (0..p.picks.len()).find(|&k| p.picks[k] + 1 < d.r(s + k, p.trail[k + 1])) else {
        return false;
    };
    p.picks[k] += 1;
    p.trail[k] = d.source(s + k, p.trail[k + 1], p.picks[k]);
    for i in (0..k).rev() {
        p.picks[i] = 0;
        p.trail[i] = d.incoming(s + i, p.trail[i + 1]).first();
    }
    true
}

/// Mixed-radix decrement; `false` at the minimal path.
pub fn retreat(d: &Diagram, p: &mut FinitePath) -> bool {
    let s = p.start_level;
    let Some(k) = (0..p.picks.len()).find(|&k| p.picks[k] > 0) else {
        return false;
    };
    p.picks[k] -= 1;
    p.trail[k] = d.source(s + k, p.trail[k + 1], p.picks[k]);
    for i in (0..k).rev() {
        let list = d.incoming(s + i, p.trail[i + 1]);
        p.picks[i] = list.len() - 1;
        p.trail[i] = list.last();
    }
    true
}

/// `None` signals the maximal path.
pub fn successor(d: &Diagram, p: &FinitePath) -> Option<FinitePath> {
    let mut q = p.clone();
    advance(d, &mut q).then_some(q)
}

pub fn predecessor(d: &Diagram, p: &FinitePath) -> Option<FinitePath> {
    let mut q = p.clone();
    retreat(d, &mut q).then_some(q)
}

/// Extends a path from an intermediate level downwards by the maximal head.
pub fn prepend_max_head(d: &Diagram, p: &FinitePath) -> FinitePath {
    if p.start_level == 0 {
        return p.clone();
    }
    d.max_path(p.start(), 0).join(p)
}

/// Number of unambiguous successor steps before the maximal path.
pub fn big_t(d: &Diagram, p: &FinitePath) -> BigUint {
    let full = prepend_max_head(d, p);
    d.path_count(full.end()) - BigUint::one() - d.rank(&full)
}

pub fn is_pre_maximal(d: &Diagram, p: &FinitePath) -> bool {
    p.picks.iter().enumerate().all(|(k, &m)| {
        let r = d.r(p.start_level + k, p.trail[k + 1]);
        r >= 2 && m == r - 2
    })
}

/// Pre-maximal paths from level `n` to level `big_n`, at most one per end vertex.
pub fn pre_maximal_paths(d: &Diagram, n: usize, big_n: usize) -> Vec<FinitePath> {
    (0..d.level_size(big_n))
        .filter_map(|v| {
            let mut picks = vec![0u64; big_n - n];
            let mut x = v;
            for k in (n..big_n).rev() {
                let r = d.r(k, x);
                if r < 2 {
                    return None;
                }
                picks[k - n] = r - 2;
                x = d.source(k, x, r - 2);
            }
            d.path_from_picks(VertexRef::new(big_n, v), &picks).ok()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleCertificate {
    pub n: usize,
    pub big_n: usize,
    #[serde(serialize_with = "crate::util::ser_ratio")]
    pub delta: BigRational,
    #[serde(serialize_with = "crate::util::ser_big")]
    pub min_premaximal_t: BigUint,
    #[serde(serialize_with = "crate::util::ser_big")]
    pub max_base_t: BigUint,
    /// No pre-maximal path exists, so the condition holds vacuously.
    pub vacuous: bool,
}

impl ScaleCertificate {
    /// Re-checks `min_premaximal_t * delta > max_base_t` exactly.
    pub fn holds(&self) -> bool {
        self.vacuous
            || self.min_premaximal_t.clone() * self.delta.numer().to_biguint().unwrap()
                > self.max_base_t.clone() * self.delta.denom().to_biguint().unwrap()
    }
}

/// Largest `T(gamma)` over heads into level `n`.
pub fn max_base_t(d: &Diagram, n: usize) -> BigUint {
    d.max_height(n) - BigUint::one()
}

/// Certificate that `big_n` exceeds `n` on scale `delta`, or `None`.
pub fn exceeds_on_scale(
    d: &Diagram,
    n: usize,
    big_n: usize,
    delta: &BigRational,
) -> Result<Option<ScaleCertificate>> {
    if !(0 < n && n < big_n && big_n <= d.depth()) {
        return Err(Error::invalid(format!("need 0 < n < N <= depth, got n={n}, N={big_n}")));
    }
    if !delta.is_positive() {
        return Err(Error::invalid("delta must be positive"));
    }
    let pre = pre_maximal_paths(d, n, big_n);
    let min_t = pre.iter().map(|g| big_t(d, g)).min();
    let cert = ScaleCertificate {
        n,
        big_n,
        delta: delta.clone(),
        vacuous: min_t.is_none(),
        min_premaximal_t: min_t.unwrap_or_else(BigUint::zero),
        max_base_t: max_base_t(d, n),
    };
    Ok(cert.holds().then_some(cert))
}

/// The smallest `N <= max_depth` exceeding `n` on scale `delta`.
pub fn find_exceeding_level(
    d: &Diagram,
    n: usize,
    delta: &BigRational,
    max_depth: usize,
) -> Result<ScaleCertificate> {
    for big_n in n + 1..=max_depth.min(d.depth()) {
        if let Some(c) = exceeds_on_scale(d, n, big_n, delta)? {
            return Ok(c);
        }
    }
    Err(Error::budget(format!(
        "no level up to {} exceeds level {n} on scale {delta}",
        max_depth.min(d.depth())
    )))
}

#[derive(Clone, Debug)]
pub struct OrbitCursor<'a> {
    diagram: &'a Diagram,
    current: FinitePath,
    steps_taken: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterateOutcome {
    pub taken: u64,
    pub horizon_exhausted: bool,
}

impl<'a> OrbitCursor<'a> {
    pub fn new(diagram: &'a Diagram, start: FinitePath) -> Result<Self> {
        diagram.check_path(&start)?;
        let current = prepend_max_head(diagram, &start);
        Ok(OrbitCursor {
            diagram,
            current,
            steps_taken: BigUint::zero(),
        })
    }

    pub fn current(&self) -> &FinitePath {
        &self.current
    }

    pub fn steps_taken(&self) -> &BigUint {
        &self.steps_taken
    }

    pub fn remaining(&self) -> BigUint {
        big_t(self.diagram, &self.current)
    }

    /// Visits the current path, then applies the successor `steps` times,
    /// visiting each new path. Stops early at the maximal path.
    pub fn iterate(&mut self, steps: u64, mut visitor: impl FnMut(&FinitePath)) -> IterateOutcome {
        visitor(&self.current);
        let mut taken = 0;
        while taken < steps {
            if !advance(self.diagram, &mut self.current) {
                break;
            }
            taken += 1;
            visitor(&self.current);
        }
        self.steps_taken += taken;
        IterateOutcome {
            taken,
            horizon_exhausted: taken < steps,
        }
    }

    /// Moves `steps` ahead through rank arithmetic, without visiting.
    pub fn jump(&mut self, steps: &BigUint) -> Result<()> {
        if steps > &self.remaining() {
            return Err(Error::WindowExceedsHorizon(format!(
                "jump of {steps} exceeds T = {}",
                self.remaining()
            )));
        }
        let t = self.diagram.rank(&self.current) + steps;
        self.current = self.diagram.path_at_rank(self.current.end(), &t)?;
        self.steps_taken += steps;
        Ok(())
    }
}

/// `steps` as a machine word when it fits.
pub fn small(steps: &BigUint) -> Option<u64> {
    steps.to_u64()
}
