use super::*;
use crate::rational::q;

#[test]
fn candidate_sets() {
    let r = MarkedGraph::rose(&[q(1, 2), q(1, 2)]).unwrap();
    let mut cls: Vec<String> = candidates(&r).iter().map(|c| c.class.to_string()).collect();
    cls.sort();
    assert_eq!(cls, vec!["a", "aB", "ab", "b"]);
    let t = MarkedGraph::theta([q(1, 4), q(1, 4), q(1, 2)]).unwrap();
    let c = candidates(&t);
    assert_eq!(c.len(), 3);
    assert!(c.iter().all(|c| c.shape == Shape::Circle));
    let b = MarkedGraph::barbell([q(1, 3), q(1, 3), q(1, 3)]).unwrap();
    let c = candidates(&b);
    assert_eq!(c.iter().filter(|c| c.shape == Shape::Circle).count(), 2);
    // one dumbbell, read in both relative orientations
    assert_eq!(c.iter().filter(|c| c.shape == Shape::Dumbbell).count(), 2);
}

#[test]
fn rose_distances() {
    let a = MarkedGraph::rose(&[q(1, 2), q(1, 2)]).unwrap();
    let b = MarkedGraph::rose(&[q(1, 3), q(2, 3)]).unwrap();
    assert_eq!(lipschitz_distance(&a, &a).unwrap().lambda, q(1, 1));
    assert_eq!(lipschitz_distance(&a, &b).unwrap().lambda, q(4, 3));
    assert_eq!(lipschitz_distance(&b, &a).unwrap().lambda, q(3, 2));
    let big = MarkedGraph::rose(&[q(1, 1), q(1, 1)]).unwrap();
    assert!(matches!(lipschitz_distance(&big, &a), Err(OskError::NotNormalized(_))));
}

#[test]
fn optimal_map_on_roses() {
    let a = MarkedGraph::rose(&[q(1, 2), q(1, 2)]).unwrap();
    let b = MarkedGraph::rose(&[q(1, 3), q(2, 3)]).unwrap();
    let (m, rep) = optimal_map(&a, &b).unwrap();
    assert_eq!(rep.lambda, q(4, 3));
    assert_eq!(m.slopes, vec![q(2, 3), q(4, 3)]);
    assert_eq!(rep.tension, vec![1]);
    assert_eq!(rep.legal_candidate.class.to_string(), "b");
    m.verify_homotopy().unwrap();
    let (m, rep) = optimal_map(&a, &a).unwrap();
    assert_eq!(rep.lambda, q(1, 1));
    assert_eq!(rep.tension, vec![0, 1]);
    assert_eq!(m.slopes, vec![q(1, 1), q(1, 1)]);
}

#[test]
fn rescale_on_roses() {
    let a = MarkedGraph::rose(&[q(1, 2), q(1, 2)]).unwrap();
    let b = MarkedGraph::rose(&[q(1, 3), q(2, 3)]).unwrap();
    let (g2, m) = rescale_to_full_tension(&a, &b).unwrap();
    assert_eq!(g2.edges()[0].length, q(1, 4));
    assert_eq!(g2.edges()[1].length, q(1, 2));
    assert!(m.slopes.iter().all(|s| *s == q(4, 3)));
    let (g3, _) = rescale_to_full_tension(&a, &a).unwrap();
    assert_eq!(g3, a);
}

#[test]
fn optimal_map_theta_to_twisted_rose() {
    use crate::free_group::{Automorphism, Word};
    let t = MarkedGraph::theta([q(1, 4), q(1, 4), q(1, 2)]).unwrap();
    let phi = Automorphism::from_images(vec![Word::parse("ab").unwrap(), Word::parse("b").unwrap()]).unwrap();
    let r = MarkedGraph::rose(&[q(2, 5), q(3, 5)]).unwrap().precompose(&phi).unwrap();
    for (x, y) in [(&t, &r), (&r, &t)] {
        let (m, rep) = optimal_map(x, y).unwrap();
        assert_eq!(rep.lambda, stretch_factor(x, y).unwrap().lambda);
        m.verify_homotopy().unwrap();
        assert!(rep.gates.is_train_track());
        let (g2, m2) = rescale_to_full_tension(x, y).unwrap();
        assert!(m2.gates().is_train_track());
        assert!(g2.volume() <= q(1, 1));
    }
}
