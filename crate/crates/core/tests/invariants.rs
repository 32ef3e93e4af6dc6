//! Property tests over seeded random inputs: each case draws a seed and builds graphs,
//! classes and paths from it.

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use osk_core::factor_complex::{farey_distance, project};
use osk_core::folding::{fold_path, PathJson, Time};
use osk_core::harness::random::{random_automorphism, random_class, random_graph, random_simple_class};
use osk_core::lipschitz::stretch_factor;
use osk_core::marked_graph::MarkedGraph;
use osk_core::projections::{left_time, right_time, Subject};
use osk_core::Q;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn normalized_graphs_have_unit_volume(seed: u64, rank in 2usize..4) {
        let g = random_graph(&mut rng(seed), rank, 3, 9);
        let scaled = g.scaled(&Q::new(7.into(), 3.into()));
        prop_assert_eq!(scaled.normalize().volume(), Q::one());
        prop_assert_eq!(scaled.volume(), g.volume() * Q::new(7.into(), 3.into()));
    }

    #[test]
    fn json_round_trip_preserves_lengths(seed: u64, rank in 2usize..4) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, rank, 3, 9);
        let back = MarkedGraph::from_json_str(&g.to_json_string()).unwrap();
        for _ in 0..5 {
            let z = random_class(&mut r, rank, 6);
            prop_assert_eq!(g.loop_length(&z).unwrap(), back.loop_length(&z).unwrap());
        }
    }

    #[test]
    fn precomposition_moves_lengths(seed: u64, rank in 2usize..4) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, rank, 2, 9);
        let phi = random_automorphism(&mut r, rank, 3);
        let gp = g.precompose(&phi).unwrap();
        let z = random_class(&mut r, rank, 6);
        prop_assert_eq!(gp.loop_length(&z).unwrap(), g.loop_length(&phi.apply_cyclic(&z).unwrap()).unwrap());
    }

    #[test]
    fn stretch_is_an_asymmetric_metric(seed: u64, rank in 2usize..4) {
        let mut r = rng(seed);
        let [a, b, c]: [MarkedGraph; 3] = std::array::from_fn(|_| random_graph(&mut r, rank, 3, 6));
        let l = |x: &MarkedGraph, y: &MarkedGraph| stretch_factor(x, y).unwrap().lambda;
        prop_assert!(l(&a, &a).is_one());
        prop_assert!(l(&a, &b) >= Q::one());
        prop_assert!(l(&a, &c) <= l(&a, &b) * l(&b, &c));
    }

    #[test]
    fn folding_paths_realize_the_volume_ratio(seed: u64, rank in 2usize..4) {
        let mut r = rng(seed);
        let (g, h) = (random_graph(&mut r, rank, 3, 6), random_graph(&mut r, rank, 3, 6));
        let p = fold_path(&g, &h).unwrap();
        // the path is a geodesic, so the end-to-end stretch is the total volume drop
        let ends = stretch_factor(&p.initial().normalize(), &p.terminal().normalize()).unwrap().lambda;
        prop_assert_eq!(ends, p.initial_volume() / p.final_volume());
        let mut prev = p.initial_volume();
        for e in p.events() {
            let v = p.volume_at(&e.end()).unwrap();
            prop_assert!(v < prev);
            prev = v;
        }
        let stored = PathJson::new(&g, &h, &p).unwrap();
        let loaded = stored.load().unwrap();
        prop_assert_eq!(loaded.events(), p.events());
    }

    #[test]
    fn projection_times_are_ordered(seed: u64, rank in 2usize..4) {
        let mut r = rng(seed);
        let (g, h) = (random_graph(&mut r, rank, 3, 6), random_graph(&mut r, rank, 3, 6));
        let p = fold_path(&g, &h).unwrap();
        let z = random_simple_class(&mut r, rank, 4, 3);
        let s = Subject::class(z, rank).unwrap();
        let (lt, _) = left_time(&s, &p).unwrap();
        let (rt, _) = right_time(&s, &p).unwrap();
        prop_assert!(Q::zero() <= lt && lt <= rt && rt <= p.omega());
        let at_lt = p.graph_at(&Time::Natural(lt)).unwrap();
        prop_assert!(!project(&at_lt.graph).unwrap().is_empty());
    }

    #[test]
    fn rank_two_projections_are_simplices(seed: u64) {
        let g = random_graph(&mut rng(seed), 2, 5, 9);
        let fs: Vec<_> = project(&g).unwrap().into_iter().collect();
        for a in &fs {
            for b in &fs {
                prop_assert!(farey_distance(a, b).unwrap() <= 1);
            }
        }
    }
}
