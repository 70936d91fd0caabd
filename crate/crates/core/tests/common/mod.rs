#![allow(dead_code)]

use std::path::PathBuf;

use adic::extension::{CopyPasteSpec, Construction, ExtensionTriple};
use adic::vershik::successor;
use adic::{Diagram, FinitePath, SourceList, VertexRef};
use rand::Rng;

/// A random diagram of the given depth whose levels hold at most `width`
/// vertices with `1..=max_edges` incoming edges each.
pub fn random_diagram(rng: &mut impl Rng, depth: usize, width: usize, max_edges: usize) -> Diagram {
    loop {
        let mut sizes = vec![1];
        let mut levels = Vec::new();
        for _ in 0..depth {
            let below = *sizes.last().unwrap();
            let here = rng.gen_range(1..=width);
            let level: Vec<Vec<usize>> = (0..here)
                .map(|_| {
                    let r = rng.gen_range(1..=max_edges);
                    (0..r).map(|_| rng.gen_range(0..below)).collect()
                })
                .collect();
            sizes.push(here);
            levels.push(level);
        }
        if let Ok(d) = Diagram::from_lists(levels) {
            return d;
        }
    }
}

/// A random copy-paste spec with up to `max_copies` copies per vertex.
pub fn random_spec(rng: &mut impl Rng, d: &Diagram, max_copies: usize) -> CopyPasteSpec {
    let mut spec = CopyPasteSpec::identity(d);
    for n in 1..=d.depth() {
        spec.copy_counts[n] = (0..d.level_size(n)).map(|_| rng.gen_range(1..=max_copies)).collect();
    }
    for n in 0..d.depth() {
        for l in 0..d.level_size(n + 1) {
            let list = d.incoming(n, l);
            spec.source_copy[n][l] = (0..spec.copy_counts[n + 1][l])
                .map(|_| {
                    let picks: Vec<usize> =
                        list.iter().map(|src| rng.gen_range(0..spec.copy_counts[n][src])).collect();
                    SourceList::from_slice(&picks)
                })
                .collect();
        }
    }
    spec
}

/// Specs leaving a copy without outgoing edges are redrawn.
pub fn random_triple(rng: &mut impl Rng, depth: usize) -> ExtensionTriple {
    loop {
        let d = random_diagram(rng, depth, 3, 4);
        let spec = random_spec(rng, &d, 3);
        if let Ok(t) = ExtensionTriple::new(d, spec, Construction::Generic) {
            return t;
        }
    }
}

pub fn odometer(r: &[u64]) -> Diagram {
    adic::coding::odometer_diagram(r).unwrap()
}

/// All paths into `v`, from level 0, in Vershik order.
pub fn all_paths(d: &Diagram, v: VertexRef) -> Vec<FinitePath> {
    let mut out = Vec::new();
    let mut p = d.min_path(v, 0);
    loop {
        out.push(p.clone());
        match successor(d, &p) {
            Some(q) => p = q,
            None => return out,
        }
    }
}

/// All paths into `v` by recursion on the top edge, independent of the
/// successor map: the top edge is the most significant digit.
pub fn enumerate_paths(d: &Diagram, v: VertexRef) -> Vec<FinitePath> {
    if v.level == 0 {
        return vec![FinitePath {
            start_level: 0,
            picks: Vec::new(),
            trail: vec![v.index],
        }];
    }
    let n = v.level - 1;
    let mut out = Vec::new();
    for m in 0..d.r(n, v.index) {
        let src = d.source(n, v.index, m);
        for mut p in enumerate_paths(d, VertexRef::new(n, src)) {
            p.picks.push(m);
            p.trail.push(v.index);
            out.push(p);
        }
    }
    out
}

pub fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
