mod common;

use adic::diagram::validate;
use adic::vershik::{
    big_t, exceeds_on_scale, find_exceeding_level, is_pre_maximal, pre_maximal_paths, successor, OrbitCursor,
};
use adic::{Diagram, Error, FinitePath, VertexRef};
use common::{all_paths, enumerate_paths, odometer, random_diagram};
use num::{BigRational, BigUint};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seeded(seed: u64, depth: usize) -> Diagram {
    random_diagram(&mut ChaCha8Rng::seed_from_u64(seed), depth, 3, 4)
}

#[test]
fn odometer_ranks() {
    let d = odometer(&[2, 2, 2]);
    let v = VertexRef::new(3, 0);
    let p = d.path_from_picks(v, &[1, 0, 1]).unwrap();
    assert_eq!(d.rank(&p), BigUint::from(5u32));
    assert_eq!(d.path_count(v), &BigUint::from(8u32));
    let (lo, hi) = d.extremal_paths(v, 0).unwrap();
    assert_eq!(lo.picks, vec![0, 0, 0]);
    assert_eq!(d.rank(&hi), BigUint::from(7u32));
    let carry = successor(&d, &d.path_from_picks(v, &[1, 1, 0]).unwrap()).unwrap();
    assert_eq!(carry.picks, vec![0, 0, 1]);
    assert!(successor(&d, &hi).is_none());
}

#[test]
fn segment_horizon_and_scale() {
    let d = odometer(&[2, 2, 2]);
    let gamma = d.path_from_picks(VertexRef::new(3, 0), &[0, 0]).unwrap();
    assert_eq!(gamma.start_level, 1);
    assert_eq!(big_t(&d, &gamma), BigUint::from(6u32));
    assert!(is_pre_maximal(&d, &gamma));
    assert_eq!(pre_maximal_paths(&d, 1, 3), vec![gamma]);
    let half = BigRational::new(1.into(), 2.into());
    assert!(exceeds_on_scale(&d, 1, 3, &half).unwrap().is_some());
    assert!(exceeds_on_scale(&d, 1, 2, &half).unwrap().is_none());
    assert_eq!(find_exceeding_level(&d, 1, &half, 3).unwrap().big_n, 3);
    let two = BigRational::from_integer(2.into());
    assert_eq!(find_exceeding_level(&d, 1, &two, 3).unwrap().big_n, 2);
    let tiny = BigRational::new(1.into(), 1000.into());
    assert!(matches!(find_exceeding_level(&d, 1, &tiny, 2), Err(Error::BudgetExceeded(_))));
}

#[test]
fn sturmian_pre_maximal_matches_filter() {
    let d = adic::coding::sturmian_diagram(&[1, 1, 1, 1]).unwrap();
    let mut brute: Vec<FinitePath> = Vec::new();
    for l in 0..d.level_size(3) {
        for p in enumerate_paths(&d, VertexRef::new(3, l)) {
            let seg = p.window(1, 3);
            if is_pre_maximal(&d, &seg) {
                brute.push(seg);
            }
        }
    }
    brute.sort_by_key(|p| p.trail.clone());
    brute.dedup();
    let mut ours = pre_maximal_paths(&d, 1, 3);
    ours.sort_by_key(|p| p.trail.clone());
    assert_eq!(ours, brute);
    assert!(d.simplicity_window_check(1, 3).unwrap());
}

#[test]
fn telescoping_keeps_counts_and_order() {
    let d = adic::coding::sturmian_diagram(&[1, 1, 1, 1]).unwrap();
    let t = d.telescope(&[0, 2, 4]).unwrap();
    for l in 0..2 {
        assert_eq!(t.path_count(VertexRef::new(1, l)), d.path_count(VertexRef::new(2, l)));
        let old = all_paths(&d, VertexRef::new(4, l));
        let new = all_paths(&t, VertexRef::new(2, l));
        assert_eq!(old.len(), new.len());
    }
    assert_eq!(d.telescope(&(0..=d.depth()).collect::<Vec<_>>()).unwrap(), d);
    let o = odometer(&[2, 2, 2, 2]).telescope(&[0, 2, 4]).unwrap();
    assert_eq!(o.r(0, 0), 4);
    assert_eq!(o.r(1, 0), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_is_a_bijection(seed in any::<u64>(), depth in 1usize..=4) {
        let d = seeded(seed, depth);
        for l in 0..d.level_size(depth) {
            let v = VertexRef::new(depth, l);
            let paths = all_paths(&d, v);
            prop_assert_eq!(BigUint::from(paths.len()), d.path_count(v).clone());
            for (i, p) in paths.iter().enumerate() {
                prop_assert_eq!(d.rank(p), BigUint::from(i));
                prop_assert_eq!(&d.path_at_rank(v, &BigUint::from(i)).unwrap(), p);
                prop_assert_eq!(big_t(&d, p), BigUint::from(paths.len() - 1 - i));
            }
        }
    }

    #[test]
    fn telescoped_ranks_flatten(seed in any::<u64>(), cut in 1usize..4) {
        let d = seeded(seed, 4);
        let t = d.telescope(&[0, cut, 4]).unwrap();
        for l in 0..d.level_size(4) {
            let old = all_paths(&d, VertexRef::new(4, l));
            let new = all_paths(&t, VertexRef::new(2, l));
            prop_assert_eq!(old.len(), new.len());
            for (a, b) in old.iter().zip(&new) {
                prop_assert_eq!(a.trail[cut], b.trail[1]);
            }
        }
    }

    #[test]
    fn cursor_matches_path_at_rank(seed in any::<u64>(), steps in 0u64..40) {
        let d = seeded(seed, 3);
        let v = VertexRef::new(3, 0);
        let start = d.min_path(v, 0);
        let mut cursor = OrbitCursor::new(&d, start).unwrap();
        let mut seen = Vec::new();
        let out = cursor.iterate(steps, |p| seen.push(p.clone()));
        for (i, p) in seen.iter().enumerate() {
            prop_assert_eq!(p, &d.path_at_rank(v, &BigUint::from(i)).unwrap());
        }
        let h: u64 = d.path_count(v).try_into().unwrap();
        prop_assert_eq!(out.horizon_exhausted, steps >= h);
    }

    #[test]
    fn validate_matches_axioms(seed in any::<u64>()) {
        let d = seeded(seed, 3);
        let mut data = d.to_data();
        prop_assert!(validate(&data).is_empty());
        // dropping every edge into the last top vertex breaks r >= 1
        let last = data.incoming[2].len() - 1;
        data.incoming[2][last] = adic::SourceList::new();
        prop_assert!(!validate(&data).is_empty());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let d = seeded(seed, 4);
        let s = d.to_json().unwrap();
        let e = Diagram::from_json(&s).unwrap();
        prop_assert_eq!(&e, &d);
        prop_assert_eq!(e.to_json().unwrap(), s);
    }
}
