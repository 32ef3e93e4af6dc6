use osk_core::folding::{fold_path, Time};
use osk_core::harness::random::random_graph;
use osk_core::lipschitz::stretch_factor;
use osk_core::rational::qi;
use osk_core::Q;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_paths_are_geodesics_ending_at_the_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..30 {
        let rank = 2 + i % 2;
        let g = random_graph(&mut rng, rank, 3, 6);
        let h = random_graph(&mut rng, rank, 3, 6);
        let p = fold_path(&g, &h).unwrap_or_else(|e| panic!("pair {i}: {e}"));
        let omega = p.omega();
        let mut ts: Vec<Q> = (0..3).map(|_| &omega * Q::new(rng.gen_range(0..=1000).into(), 1000.into())).collect();
        ts.sort();
        let gs: Vec<_> = ts.iter().map(|s| p.graph_at(&Time::Natural(s.clone())).unwrap().graph.normalize()).collect();
        let d01 = stretch_factor(&gs[0], &gs[1]).unwrap().lambda;
        let d12 = stretch_factor(&gs[1], &gs[2]).unwrap().lambda;
        let d02 = stretch_factor(&gs[0], &gs[2]).unwrap().lambda;
        assert_eq!(&d01 * &d12, d02, "pair {i}");
        assert!(d01 >= qi(1));
    }
}
