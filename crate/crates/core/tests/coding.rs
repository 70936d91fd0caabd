mod common;

use adic::coding::{factor_complexity, odometer_diagram, sturmian_diagram, symbol_frequency, to_word};
use adic::util::to_f64;
use adic::vershik::{big_t, successor};
use adic::VertexRef;
use common::random_diagram;
use num::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn window(d: &adic::Diagram, p: &adic::FinitePath, cap: usize) -> usize {
    (big_t(d, p) + 1u32).min(BigUint::from(cap)).try_into().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn words_commute_with_the_shift(seed in any::<u64>(), depth in 1usize..=4, rank in any::<u32>()) {
        let d = random_diagram(&mut ChaCha8Rng::seed_from_u64(seed), depth, 3, 4);
        let v = VertexRef::new(depth, 0);
        let p = d.path_at_rank(v, &(BigUint::from(rank) % d.path_count(v))).unwrap();
        let n = window(&d, &p, 64);
        let w = to_word(&d, &p, n).unwrap();
        prop_assert!(w.symbols.iter().all(|&s| s < w.alphabet));
        if let Some(q) = successor(&d, &p) {
            prop_assert_eq!(&to_word(&d, &q, n - 1).unwrap().symbols[..], &w.symbols[1..]);
        }
    }

    #[test]
    fn telescoping_above_level_one_keeps_words(seed in any::<u64>(), cut in 2usize..4) {
        let d = random_diagram(&mut ChaCha8Rng::seed_from_u64(seed), 4, 3, 4);
        let t = d.telescope(&[0, 1, cut, 4]).unwrap();
        for l in 0..d.level_size(4) {
            let p = d.min_path(VertexRef::new(4, l), 0);
            let q = t.min_path(VertexRef::new(3, l), 0);
            let n = window(&d, &p, 200);
            prop_assert_eq!(to_word(&d, &p, n).unwrap().symbols, to_word(&t, &q, n).unwrap().symbols);
        }
    }

    #[test]
    fn sturmian_words_have_minimal_complexity(a in prop::collection::vec(1u64..4, 6..10)) {
        let d = sturmian_diagram(&a).unwrap();
        let p = d.min_path(VertexRef::new(d.depth(), 0), 0);
        let n = window(&d, &p, 20_000);
        let w = to_word(&d, &p, n).unwrap();
        for l in (1..=10).take_while(|l| 20 * l <= n) {
            prop_assert_eq!(factor_complexity(&w.symbols, l), l + 1);
        }
    }
}

#[test]
fn odometer_words_are_periodic() {
    let d = odometer_diagram(&[3, 2, 2]).unwrap();
    let p = d.min_path(VertexRef::new(3, 0), 0);
    let w = to_word(&d, &p, 12).unwrap();
    assert_eq!(w.symbols, [0, 1, 2].repeat(4));
    assert_eq!(factor_complexity(&w.symbols, 5), 3);
    let f = symbol_frequency(&w).unwrap();
    assert!(f.values().all(|x| (to_f64(x) - 1.0 / 3.0).abs() < 1e-12));
}

#[test]
fn bad_coefficients_are_rejected() {
    assert!(sturmian_diagram(&[]).is_err());
    assert!(sturmian_diagram(&[1, 0, 2]).is_err());
    assert!(odometer_diagram(&[]).is_err());
}
