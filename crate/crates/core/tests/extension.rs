mod common;

use adic::extension::colour::verify_colouring;
use adic::extension::two_to_one::extremal_audit;
use adic::extension::{
    build_three_to_one, build_two_to_one, color_diagram, extended_diagram, fibre_cardinality, full_preimage,
    ColourParams, ExtensionTriple, TwoToOneBudget,
};
use adic::vershik::successor;
use adic::{Error, VertexRef};
use common::{all_paths, odometer, random_triple};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seeded(seed: u64, depth: usize) -> ExtensionTriple {
    random_triple(&mut ChaCha8Rng::seed_from_u64(seed), depth)
}

#[test]
fn two_to_one_schedule_and_fibres() {
    let (t, rep) = build_two_to_one(&odometer(&[2; 40]), &TwoToOneBudget::default()).unwrap();
    assert!(rep.levels.iter().all(|a| a.below_half));
    assert_eq!(extremal_audit(&t.base).len(), rep.levels.len());
    let top = VertexRef::new(t.depth(), 0);
    let (lo, hi) = t.base.extremal_paths(top, 0).unwrap();
    // extremal paths meet the merging of copies everywhere
    assert_eq!(fibre_cardinality(&t, &lo).unwrap().count, 1);
    assert_eq!(fibre_cardinality(&t, &hi).unwrap().count, 1);
}

#[test]
fn shallow_base_has_too_few_levels() {
    let err = build_two_to_one(&odometer(&[2]), &TwoToOneBudget::default()).unwrap_err();
    assert!(err.to_string().contains("not enough levels"), "{err}");
}

#[test]
fn three_to_one_preconditions_and_certificates() {
    let err = color_diagram(&odometer(&[8, 2, 2, 2]), &ColourParams::default()).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
    let mut r = vec![8];
    r.extend([2; 60]);
    let params = ColourParams {
        preprocess: true,
        ..ColourParams::default()
    };
    let c = color_diagram(&odometer(&r), &params).unwrap();
    assert!(verify_colouring(&c).is_empty());
    let t = build_three_to_one(&c.diagram).unwrap();
    assert_eq!(t.spec.copy_counts[1], vec![4]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let a = adic::spectra::gap::sample_thick_head(&t.base, None, &mut rng).unwrap();
        // thick edges keep the three copies apart
        assert!(fibre_cardinality(&t, &a).unwrap().count >= 3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn collapse_commutes_with_successor(seed in any::<u64>(), depth in 1usize..=3) {
        let t = seeded(seed, depth);
        for l in 0..t.extended.level_size(depth) {
            for p in all_paths(&t.extended, VertexRef::new(depth, l)) {
                if let Some(q) = successor(&t.extended, &p) {
                    let base = successor(&t.base, &t.collapse_path(&p).unwrap());
                    prop_assert_eq!(base, Some(t.collapse_path(&q).unwrap()));
                }
            }
        }
    }

    #[test]
    fn lifts_project_back(seed in any::<u64>()) {
        let t = seeded(seed, 3);
        for l in 0..t.base.level_size(3) {
            for a in all_paths(&t.base, VertexRef::new(3, l)) {
                for j in 0..t.spec.copies(3, l) {
                    prop_assert_eq!(t.collapse_path(&t.lift(&a, j).unwrap()).unwrap(), a.clone());
                }
            }
        }
    }

    #[test]
    fn preimage_path_follows_full_preimages(seed in any::<u64>()) {
        let t = seeded(seed, 3);
        let ext = extended_diagram(&t, 3).unwrap();
        for l in 0..t.base.level_size(3) {
            for a in all_paths(&t.base, VertexRef::new(3, l)) {
                let fp = full_preimage(&t, &a).unwrap();
                let p = ext.preimage_path(&a).unwrap();
                prop_assert_eq!(ext.project(&p), a.clone());
                for k in 1..=3 {
                    prop_assert_eq!(&ext.copy_set(k, p.trail[k]).1, &fp.sets[k]);
                }
            }
        }
    }

    #[test]
    fn fibres_shrink_with_the_horizon(seed in any::<u64>()) {
        let t = seeded(seed, 4);
        for a in all_paths(&t.base, VertexRef::new(4, 0)).into_iter().step_by(3) {
            let deep = fibre_cardinality(&t, &a).unwrap().count;
            let below = a.window(0, 3);
            let shallow = fibre_cardinality(&t, &below).unwrap().count;
            prop_assert!(deep <= shallow, "{} > {}", deep, shallow);
            prop_assert!(deep >= 1);
        }
    }

    #[test]
    fn triple_json_round_trip(seed in any::<u64>()) {
        let t = seeded(seed, 3);
        let s = t.to_json().unwrap();
        let u = ExtensionTriple::from_json(&s).unwrap();
        prop_assert_eq!(&u.extended, &t.extended);
        prop_assert_eq!(u.to_json().unwrap(), s);
    }
}
