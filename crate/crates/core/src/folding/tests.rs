use super::*;
use crate::free_group::{Automorphism, Word};
use crate::lipschitz::stretch_factor;
use crate::marked_graph::CoreGraph;
use crate::rational::{q, qi};

fn rose() -> MarkedGraph {
    MarkedGraph::rose(&[q(1, 2), q(1, 2)]).unwrap()
}

fn twisted() -> MarkedGraph {
    let phi = Automorphism::from_images(vec![Word::parse("a").unwrap(), Word::parse("ab").unwrap()]).unwrap();
    rose().precompose(&phi).unwrap()
}

fn cw(s: &str) -> CyclicWord {
    CyclicWord::parse(s).unwrap()
}

#[test]
fn identity_path_is_empty() {
    let p = fold_path(&rose(), &rose()).unwrap();
    assert!(p.events().is_empty());
    assert_eq!(p.omega(), qi(0));
    assert_eq!(p.length(), 0.0);
}

#[test]
fn single_twist_folds_b_across_a() {
    let g = rose();
    let h = twisted();
    let p = fold_path(&g, &h).unwrap();
    assert!(!p.events().is_empty());
    // every interval folds exactly one illegal turn of the two-gate rose
    assert!(p.events().iter().all(|e| e.illegality == 1));
    let end = p.terminal().normalize();
    assert_eq!(lipschitz_distance(&end, &h).unwrap().lambda, qi(1));
    // arclength equals the distance from the rescaled start
    let start = p.initial().normalize();
    let lambda = stretch_factor(&start, &h).unwrap().lambda;
    assert!((p.length() - to_f64(&lambda).ln()).abs() < 1e-12);
    let t0 = p.graph_at(&Time::Arclength(0.0)).unwrap();
    assert_eq!(t0.graph, start);
    let mid = &p.omega() / qi(2);
    let pt = p.graph_at(&Time::Natural(mid.clone())).unwrap();
    assert_eq!(pt.graph.volume(), p.initial_volume() - &mid);
    assert_eq!(pt.gates.illegality(), 1);
}

#[test]
fn volume_is_piecewise_linear_with_slope_minus_illegality() {
    let p = fold_path(&rose(), &twisted()).unwrap();
    for e in p.events() {
        let a = p.graph_at(&Time::Natural(e.start.clone())).unwrap();
        let b = p.graph_at(&Time::Natural(e.end())).unwrap();
        assert_eq!(a.graph.volume() - b.graph.volume(), &e.duration * Q::from_integer(e.illegality.into()));
        assert_eq!(a.gates.illegality(), e.illegality);
    }
}

#[test]
fn length_function_matches_direct_evaluation() {
    let p = fold_path(&rose(), &twisted()).unwrap();
    for w in ["a", "b", "aB", "ab", "aaB"] {
        let z = cw(w);
        for i in 0..=10 {
            let t = p.length() * i as f64 / 10.0;
            let direct = {
                let pt = p.graph_at(&Time::Arclength(t)).unwrap();
                to_f64(&pt.graph.loop_length(&z).unwrap())
            };
            let formula = p.length_formula(&z, t).unwrap();
            assert!((direct - formula).abs() <= 1e-9 * direct.max(1.0), "{w} at {t}: {direct} vs {formula}");
        }
    }
}

#[test]
fn legal_classes_grow_exponentially() {
    let p = fold_path(&rose(), &twisted()).unwrap();
    let pieces = p.length_function(&cw("a")).unwrap();
    for pc in &pieces {
        if pc.kappa == 0 {
            assert_eq!(pc.b, 0.0);
        }
    }
}

#[test]
fn illegality_examples() {
    let rose_gates = |groups: Vec<Vec<usize>>| GateStructure { gates: vec![groups] };
    let a = crate::marked_graph::dir(0, false);
    let b = crate::marked_graph::dir(1, false);
    assert_eq!(rose_gates(vec![vec![a, b], vec![rev(a)], vec![rev(b)]]).illegality(), 1);
    assert_eq!(rose_gates(vec![vec![a], vec![b], vec![rev(a)], vec![rev(b)]]).illegality(), 0);
    let n = 4;
    let pos: Vec<usize> = (0..n).map(|e| crate::marked_graph::dir(e, false)).collect();
    let neg: Vec<usize> = pos.iter().map(|&d| rev(d)).collect();
    assert_eq!(GateStructure { gates: vec![vec![pos, neg]] }.illegality(), 2 * (n - 1));
}

#[test]
fn scan_examples() {
    let g = MarkedGraph::rose(&[q(5, 1), q(1, 1)]).unwrap();
    let a = crate::marked_graph::dir(0, false);
    let b = crate::marked_graph::dir(1, false);
    let gates = GateStructure { gates: vec![vec![vec![a], vec![rev(a)], vec![b, rev(b)]]] };
    // `a` alone is legal
    let l = g.realize_loop(&cw("a")).unwrap();
    let s = legal_illegal_scan(&CoreGraph::from_loop(&l, &g), &g, &gates, &qi(3)).unwrap();
    assert_eq!(s.max_legal, None);
    assert_eq!(s.max_illegal, Some(qi(0)));
    assert_eq!(s.legal_segments[0].length, qi(5));
    // `b` turns back into its own gate every time
    let l = g.realize_loop(&cw("b")).unwrap();
    assert_eq!(illegal_turn_count(&g, &l, &gates), 1);
    let l2 = g.realize_loop(&cw("bb")).unwrap();
    assert_eq!(illegal_turn_count(&g, &l2, &gates), 2);
    let s = legal_illegal_scan(&CoreGraph::from_loop(&l, &g), &g, &gates, &qi(3)).unwrap();
    assert_eq!(s.max_legal, Some(qi(1)));
    assert_eq!(s.max_illegal, None);
    // `ab`: turns a|b and b|a are legal, b|b never occurs; `abb`: one illegal turn, one segment of 7
    let l = g.realize_loop(&cw("abb")).unwrap();
    let s = legal_illegal_scan(&CoreGraph::from_loop(&l, &g), &g, &gates, &qi(3)).unwrap();
    assert_eq!(s.max_legal, Some(qi(7)));
    assert_eq!(s.legal_segments.len(), 1);
    // illegal part: up to 3 on each side of the single turn
    assert_eq!(s.max_illegal, Some(qi(6)));
    let l = g.realize_loop(&cw("abbabb")).unwrap();
    let s = legal_illegal_scan(&CoreGraph::from_loop(&l, &g), &g, &gates, &qi(3)).unwrap();
    assert_eq!(s.legal_segments.len(), 2);
    assert_eq!(s.legal_segments.iter().map(|x| x.length.clone()).sum::<Q>(), qi(14));
}
