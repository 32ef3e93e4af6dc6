use osk_core::harness::random::random_graph;
use osk_core::lipschitz::{optimal_map, rescale_to_full_tension, stretch_factor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn optimal_maps_realize_candidate_stretch() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..40 {
        let rank = 2 + i % 2;
        let g = random_graph(&mut rng, rank, 3, 6);
        let h = random_graph(&mut rng, rank, 3, 6);
        let lambda = stretch_factor(&g, &h).unwrap().lambda;
        let (m, rep) = optimal_map(&g, &h).unwrap_or_else(|e| panic!("pair {i}: {e}\n{}\n{}", g.to_json_string(), h.to_json_string()));
        assert_eq!(rep.lambda, lambda);
        assert_eq!(m.lambda(), lambda);
        m.verify_homotopy().unwrap();
        assert!(rep.gates.is_train_track());
        let (g2, m2) = rescale_to_full_tension(&g, &h).unwrap_or_else(|e| panic!("pair {i}: {e}"));
        assert!(m2.slopes.iter().all(|s| *s == lambda));
        assert!(g2.volume() <= g.volume());
    }
}
