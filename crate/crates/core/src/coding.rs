//! Symbolic codings: words read off level-0 edges along Vershik orbits, and
//! the canonical diagram families they are checked on.

use std::collections::{BTreeMap, HashSet};

use num::{BigRational, BigUint};
use serde::Serialize;

use crate::diagram::{Diagram, FinitePath};
use crate::error::{Error, Result};
use crate::extension::copy_paste::ExtensionTriple;
use crate::util::ratio;
use crate::vershik::{advance, big_t};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WordOrigin {
    pub diagram: String,
    pub top: usize,
    pub start: Vec<u64>,
    pub window: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymbolWord {
    /// Number of level-0 edges.
    pub alphabet: u64,
    pub symbols: Vec<u64>,
    pub origin: WordOrigin,
}

#[derive(Serialize)]
struct RunLength<'a> {
    alphabet: u64,
    runs: Vec<(u64, usize)>,
    origin: &'a WordOrigin,
}

impl SymbolWord {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = self.symbols.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
        s.push('\n');
        s
    }

    pub fn runs(&self) -> Vec<(u64, usize)> {
        let mut out: Vec<(u64, usize)> = Vec::new();
        for &x in &self.symbols {
            match out.last_mut() {
                Some((y, n)) if *y == x => *n += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    pub fn to_run_length_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&RunLength {
            alphabet: self.alphabet,
            runs: self.runs(),
            origin: &self.origin,
        })?)
    }
}

/// A short fingerprint of the level structure, used to label word origins.
pub fn diagram_id(d: &Diagram) -> String {
    let sizes: Vec<String> = d.level_sizes().iter().map(usize::to_string).collect();
    format!("depth{}:{}", d.depth(), sizes.join("-"))
}

fn level0_offsets(d: &Diagram) -> Vec<u64> {
    let mut acc = 0;
    (0..d.level_size(1))
        .map(|l| {
            let o = acc;
            acc += d.r(0, l);
            o
        })
        .collect()
}

/// The level-0 edge sequence along the orbit of `start`, a path from level 0.
pub fn to_word(d: &Diagram, start: &FinitePath, window: usize) -> Result<SymbolWord> {
    d.check_path(start)?;
    if start.start_level != 0 || start.picks.is_empty() {
        return Err(Error::invalid("words are read from heads starting at level 0"));
    }
    if BigUint::from(window) > big_t(d, start) + 1u32 {
        return Err(Error::WindowExceedsHorizon(format!(
            "window {window} exceeds T + 1 = {}",
            big_t(d, start) + 1u32
        )));
    }
    let offsets = level0_offsets(d);
    let mut p = start.clone();
    let mut symbols = Vec::with_capacity(window);
    for i in 0..window {
        symbols.push(offsets[p.trail[1]] + p.picks[0]);
        if i + 1 < window {
            advance(d, &mut p);
        }
    }
    Ok(SymbolWord {
        alphabet: offsets.last().map_or(0, |o| o + d.r(0, d.level_size(1) - 1)),
        symbols,
        origin: WordOrigin {
            diagram: diagram_id(d),
            top: start.end().index,
            start: start.picks.clone(),
            window,
        },
    })
}

/// Single vertex per level with `r[k]` edges on level `k`.
pub fn odometer_diagram(r: &[u64]) -> Result<Diagram> {
    if r.is_empty() {
        return Err(Error::invalid("an odometer needs at least one level"));
    }
    if let Some(k) = r.iter().position(|&x| x < 2) {
        return Err(Error::invalid(format!("r_{k} = {} is below 2", r[k])));
    }
    Diagram::from_source_lists(r.iter().map(|&n| vec![crate::SourceList::run(0, n)]).collect())
}

/// Two vertices per level above the root. Into vertex 0 on level `n + 1`:
/// the minimal edge from vertex 1, then `a_n + 1` edges from vertex 0; into
/// vertex 1: the minimal edge from vertex 1, then `a_n` from vertex 0.
pub fn sturmian_diagram(a: &[u64]) -> Result<Diagram> {
    if a.is_empty() {
        return Err(Error::invalid("need at least one coefficient"));
    }
    if let Some(k) = a.iter().position(|&x| x == 0) {
        return Err(Error::invalid(format!("coefficient a_{} is zero", k + 1)));
    }
    let mut levels = vec![vec![crate::SourceList::run(0, 1), crate::SourceList::run(0, 1)]];
    for &ak in a {
        let mut v0 = crate::SourceList::run(1, 1);
        v0.push_run(0, ak + 1);
        let mut v1 = crate::SourceList::run(1, 1);
        v1.push_run(0, ak);
        levels.push(vec![v0, v1]);
    }
    let d = Diagram::from_source_lists(levels)?;
    check_sturmian(&d)?;
    Ok(d)
}

/// Rejects a build whose orbit word from the minimal path has a factor
/// count other than `l + 1` at some length `l <= 12` it is long enough for.
fn check_sturmian(d: &Diagram) -> Result<()> {
    let p = d.min_path(crate::diagram::VertexRef::new(d.depth(), 0), 0);
    let window = (big_t(d, &p) + 1u32).min(BigUint::from(4096u32));
    let w = to_word(d, &p, window.try_into().unwrap_or(4096))?;
    for l in (1..=12).take_while(|l| 10 * l <= w.len()) {
        let c = factor_complexity(&w.symbols, l);
        if c != l + 1 {
            return Err(Error::invalid(format!("complexity {c} at length {l}, expected {}", l + 1)));
        }
    }
    Ok(())
}

/// Distinct factors of length `len`.
pub fn factor_complexity(word: &[u64], len: usize) -> usize {
    if len == 0 {
        return 1;
    }
    if len > word.len() {
        return 0;
    }
    word.windows(len).collect::<HashSet<_>>().len()
}

pub fn symbol_frequency(word: &SymbolWord) -> Result<BTreeMap<u64, BigRational>> {
    if word.is_empty() {
        return Err(Error::invalid("empty word"));
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &x in &word.symbols {
        *counts.entry(x).or_default() += 1;
    }
    let n = word.len() as u64;
    Ok(counts.into_iter().map(|(k, c)| (k, ratio(c, n))).collect())
}

/// Fraction of steps where the words of two lifts of `alpha` (through top
/// copies 0 and 1) disagree on level 0, i.e. where the orbit sits in D at
/// the horizon of a two-copy extension.
pub fn boundary_visit_estimate(t: &ExtensionTriple, alpha: &FinitePath, window: usize) -> Result<BigRational> {
    let a = to_word(&t.extended, &t.lift(alpha, 0)?, window)?;
    let b = to_word(&t.extended, &t.lift(alpha, 1)?, window)?;
    let differ = a.symbols.iter().zip(&b.symbols).filter(|(x, y)| x != y).count();
    Ok(ratio(differ as u64, window.max(1) as u64))
}
