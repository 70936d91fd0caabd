//! Small deterministic automata over the edges of a path, read from the top
//! level down to level 0.

use std::fmt;
use std::sync::Arc;

use crate::seglist::EdgeClass;

pub const MAX_STATES: u8 = 8;

/// One edge as seen by an automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeView {
    /// The edge runs from `level` to `level + 1`.
    pub level: usize,
    pub range: usize,
    pub source: usize,
    pub pos: u64,
    pub r: u64,
    pub class: EdgeClass,
}

impl EdgeView {
    pub fn is_min(&self) -> bool {
        self.pos == 0
    }

    pub fn is_max(&self) -> bool {
        self.pos + 1 == self.r
    }

    pub fn is_extremal(&self) -> bool {
        self.is_min() || self.is_max()
    }

    pub fn is_thick(&self) -> bool {
        !self.is_extremal() && self.class == EdgeClass::Thick
    }
}

type StepFn = dyn Fn(u8, &EdgeView) -> u8 + Send + Sync;
type LevelFn = dyn Fn(usize) -> bool + Send + Sync;

#[derive(Clone)]
pub struct EdgePredicateAutomaton {
    pub name: String,
    pub states: u8,
    pub start: u8,
    pub accepting: Vec<bool>,
    step: Arc<StepFn>,
    /// Levels where the transition may depend on the exact position rather
    /// than on class and extremality only.
    position_sensitive: Arc<LevelFn>,
}

impl fmt::Debug for EdgePredicateAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EdgePredicateAutomaton")
            .field("name", &self.name)
            .field("states", &self.states)
            .field("accepting", &self.accepting)
            .finish()
    }
}

impl EdgePredicateAutomaton {
    pub fn new(
        name: impl Into<String>,
        states: u8,
        start: u8,
        accepting: Vec<bool>,
        step: impl Fn(u8, &EdgeView) -> u8 + Send + Sync + 'static,
    ) -> Self {
        assert!((1..=MAX_STATES).contains(&states), "automata have 1..=8 states");
        assert_eq!(accepting.len(), states as usize);
        assert!(start < states);
        EdgePredicateAutomaton {
            name: name.into(),
            states,
            start,
            accepting,
            step: Arc::new(step),
            position_sensitive: Arc::new(|_| false),
        }
    }

    pub fn with_position_levels(mut self, f: impl Fn(usize) -> bool + Send + Sync + 'static) -> Self {
        self.position_sensitive = Arc::new(f);
        self
    }

    pub fn step(&self, s: u8, e: &EdgeView) -> u8 {
        let t = (self.step)(s, e);
        debug_assert!(t < self.states);
        t
    }

    pub fn position_sensitive(&self, level: usize) -> bool {
        (self.position_sensitive)(level)
    }

    pub fn accepts(&self, s: u8) -> bool {
        self.accepting[s as usize]
    }

    /// Runs the automaton over edges given top-down.
    pub fn run<'a>(&self, edges: impl IntoIterator<Item = &'a EdgeView>) -> bool {
        let s = edges.into_iter().fold(self.start, |s, e| self.step(s, e));
        self.accepts(s)
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn complement(&self) -> Self {
        let mut c = self.clone();
        c.name = format!("not({})", self.name);
        c.accepting = self.accepting.iter().map(|a| !a).collect();
        c
    }
}

/// Accepts every path.
pub fn always() -> EdgePredicateAutomaton {
    EdgePredicateAutomaton::new("always", 1, 0, vec![true], |_, _| 0)
}

/// Some edge above level 0 is extremal.
pub fn extremal_seen() -> EdgePredicateAutomaton {
    EdgePredicateAutomaton::new("E^ex", 2, 0, vec![false, true], |s, e| {
        if s == 1 || (e.level >= 1 && e.is_extremal()) {
            1
        } else {
            0
        }
    })
}

/// Membership in E^D for the two-to-one construction.
pub fn two_to_one_d() -> EdgePredicateAutomaton {
    let mut a = extremal_seen().complement();
    a.name = "D(2-to-1)".into();
    a
}

/// Membership in E^D for the three-to-one construction: at most one thin
/// edge and no extremal edge above level 0.
pub fn three_to_one_d() -> EdgePredicateAutomaton {
    EdgePredicateAutomaton::new("D(3-to-1)", 4, 0, vec![true, true, false, false], |s, e| {
        if s == 3 || (e.level >= 1 && e.is_extremal()) {
            return 3;
        }
        if e.level >= 1 && e.class == EdgeClass::Thin {
            return (s + 1).min(2);
        }
        s
    })
}

/// C*_n: some edge on levels `1..=n` is thin or extremal.
pub fn c_star(n: usize) -> EdgePredicateAutomaton {
    EdgePredicateAutomaton::new(format!("C*_{n}"), 2, 0, vec![false, true], move |s, e| {
        let hit = (1..=n).contains(&e.level) && (e.is_extremal() || e.class == EdgeClass::Thin);
        (s == 1 || hit) as u8
    })
}

/// C**_n: C*_n, or the edge on level `n + 1` is extremal.
pub fn c_double_star(n: usize) -> EdgePredicateAutomaton {
    EdgePredicateAutomaton::new(format!("C**_{n}"), 2, 0, vec![false, true], move |s, e| {
        let hit = ((1..=n).contains(&e.level) && (e.is_extremal() || e.class == EdgeClass::Thin))
            || (e.level == n + 1 && e.is_extremal());
        (s == 1 || hit) as u8
    })
}

/// The edge on `level` is not thick.
pub fn not_thick_at(level: usize) -> EdgePredicateAutomaton {
    EdgePredicateAutomaton::new(format!("notthick_{level}"), 2, 0, vec![false, true], move |s, e| {
        (s == 1 || (e.level == level && !e.is_thick())) as u8
    })
}

/// The path passes a level-1 vertex flagged in `mask`.
pub fn plus_vertex(mask: Vec<bool>) -> EdgePredicateAutomaton {
    anchors(&[(1, mask)]).renamed("V1+")
}

/// The path passes, at each listed level, a vertex flagged in its mask.
pub fn anchors(sets: &[(usize, Vec<bool>)]) -> EdgePredicateAutomaton {
    let sets: Vec<(usize, Vec<bool>)> = sets.to_vec();
    assert!(sets.iter().all(|(lvl, _)| *lvl >= 1), "anchors sit at levels >= 1");
    EdgePredicateAutomaton::new("anchors", 2, 0, vec![true, false], move |s, e| {
        if s == 1 {
            return 1;
        }
        let bad = sets
            .iter()
            .any(|(lvl, mask)| e.level + 1 == *lvl && !mask.get(e.range).copied().unwrap_or(false));
        bad as u8
    })
}

/// The level-0 edge sits at position `value`.
pub fn level0_pick(value: u64) -> EdgePredicateAutomaton {
    EdgePredicateAutomaton::new(format!("pick0={value}"), 2, 0, vec![false, true], move |s, e| {
        if e.level == 0 {
            (e.pos == value) as u8
        } else {
            s
        }
    })
    .with_position_levels(|lvl| lvl == 0)
}
