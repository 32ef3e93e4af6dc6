//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//! Oracles here are written against public data only (loops, abelianizations, BFS), not the
//! routines under test.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::time::Instant;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use osk_core::factor_complex::farey::{normalize_slope, primitive_of};
use osk_core::factor_complex::{
    contains, crossing_bound_path, distance_bound_factor_to_graph, farey_distance, project, proper_subgraphs,
    subgraph_chain, FactorPath, FreeFactor, Hop, Slope,
};
use osk_core::folding::{fold_path, FoldingPath, Time};
use osk_core::free_group::{CyclicWord, Letter, Word};
use osk_core::harness::experiments::{run, write_csv, Experiment, ExperimentConfig, Metric};
use osk_core::harness::formula::{
    derivative_samples, legal_growth, reconstruction_error, uninvolved_edge_error, volume_slopes_exact, GrowthCheck,
};
use osk_core::harness::random::{
    random_automorphism, random_class, random_factor, random_graph, random_simple_class,
};
use osk_core::lipschitz::{optimal_map, stretch_factor};
use osk_core::marked_graph::{dir, rev, CoreGraph, MarkedGraph};
use osk_core::projections::{left_time, right_time, Subject};
use osk_core::rational::qi;
use osk_core::whitehead::{is_primitive, is_simple, is_surface_relation, smallest_factor};
use osk_core::Q;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(criterion: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(criterion * 1_000_003 + trial as u64)
}

/// A folding path with at least one event between two random volume-1 graphs.
fn random_path(rng: &mut ChaCha8Rng, rank: usize) -> FoldingPath {
    loop {
        let g = random_graph(rng, rank, 3, 6);
        let h = random_graph(rng, rank, 3, 6);
        if let Ok(p) = fold_path(&g, &h) {
            if !p.events().is_empty() {
                return p;
            }
        }
    }
}

fn random_time(rng: &mut ChaCha8Rng, omega: &Q) -> Q {
    omega * Q::new(rng.gen_range(0..=1000i64).into(), 1000.into())
}

/// Runs each trial in parallel; the first failure (by trial index) is reported.
fn trials<T: Send>(n: usize, f: impl Fn(usize) -> Result<T, String> + Sync) -> Result<Vec<T>, String> {
    (0..n).into_par_iter().map(&f).collect::<Vec<_>>().into_iter().collect()
}

// 1 -----------------------------------------------------------------------------------------

fn lambda_and_triangle() -> Check {
    trials(200, |i| {
        let mut r = rng(1, i);
        let rank = 2 + i % 2;
        let (g, h) = (random_graph(&mut r, rank, 3, 6).normalize(), random_graph(&mut r, rank, 3, 6).normalize());
        let cand = stretch_factor(&g, &h).map_err(|e| format!("pair {i}: {e}"))?.lambda;
        let (map, rep) = optimal_map(&g, &h).map_err(|e| format!("pair {i}: {e}"))?;
        ensure(rep.lambda == cand && map.lambda() == cand, || format!("pair {i}: optimal {} vs candidates {cand}", rep.lambda))?;
        // every class is stretched by at most λ
        for _ in 0..10 {
            let z = random_class(&mut r, rank, 8);
            let ratio = h.loop_length(&z).unwrap() / g.loop_length(&z).unwrap();
            ensure(ratio <= cand, || format!("pair {i}: {z} stretched by {ratio} > {cand}"))?;
        }
        Ok(())
    })?;
    trials(200, |i| {
        let mut r = rng(101, i);
        let rank = 2 + i % 2;
        let [a, b, c]: [MarkedGraph; 3] = std::array::from_fn(|_| random_graph(&mut r, rank, 3, 6).normalize());
        let l = |x: &MarkedGraph, y: &MarkedGraph| stretch_factor(x, y).map(|s| s.lambda).map_err(|e| format!("triple {i}: {e}"));
        let (ab, bc, ac) = (l(&a, &b)?, l(&b, &c)?, l(&a, &c)?);
        // d(a, c) ≤ d(a, b) + d(b, c) in multiplicative form
        ensure(ac <= &ab * &bc, || format!("triple {i}: {ac} > {ab}·{bc}"))
    })?;
    Ok("200 pairs exact λ, 200 triples".into())
}

// 2 -----------------------------------------------------------------------------------------

fn geodesic_property() -> Check {
    trials(50, |i| {
        let mut r = rng(2, i);
        let p = random_path(&mut r, 2 + i % 2);
        let omega = p.omega();
        for j in 0..10 {
            let mut ts: Vec<Q> = (0..3).map(|_| random_time(&mut r, &omega)).collect();
            ts.sort();
            let gs: Vec<MarkedGraph> =
                ts.iter().map(|s| p.graph_at(&Time::Natural(s.clone())).unwrap().graph.normalize()).collect();
            let l = |a: usize, b: usize| stretch_factor(&gs[a], &gs[b]).unwrap().lambda;
            let (st, tu, su) = (l(0, 1), l(1, 2), l(0, 2));
            ensure(&st * &tu == su, || format!("path {i} triple {j}: {st}·{tu} ≠ {su}"))?;
        }
        Ok(())
    })?;
    Ok("50 paths × 10 triples, exact".into())
}

// 3 -----------------------------------------------------------------------------------------

fn derivative_formula() -> Check {
    let counts = trials(100, |i| {
        let mut r = rng(3, i);
        let rank = 2 + i % 2;
        let p = random_path(&mut r, rank);
        let z = random_class(&mut r, rank, 6);
        let mut n = 0;
        for h in [1e-3, 1e-4] {
            for s in derivative_samples(&mut r, &p, &z, h, 20).map_err(|e| e.to_string())? {
                ensure(s.residual <= 10.0 * h, || format!("pair {i} class {z}: {s:?}"))?;
                n += 1;
            }
        }
        let rec = reconstruction_error(&p, &z, 3).map_err(|e| e.to_string())?;
        ensure(rec <= 1e-12, || format!("pair {i} class {z}: reconstruction error {rec}"))?;
        Ok(n)
    })?;
    Ok(format!("100 pairs, {} difference quotients", counts.iter().sum::<usize>()))
}

// 4 -----------------------------------------------------------------------------------------

fn volume_slope() -> Check {
    let events = trials(100, |i| {
        let mut r = rng(4, i);
        let p = random_path(&mut r, 2 + i % 2);
        ensure(volume_slopes_exact(&p).map_err(|e| e.to_string())?, || format!("path {i}"))?;
        // independent reading: total drop equals Σ m·duration
        let drop: Q = p.events().iter().map(|e| &e.duration * Q::from_integer(e.illegality.into())).sum();
        ensure(p.initial_volume() - p.final_volume() == drop, || format!("path {i}: total drop"))?;
        Ok(p.events().len())
    })?;
    Ok(format!("100 paths, {} events", events.iter().sum::<usize>()))
}

// 5 -----------------------------------------------------------------------------------------

fn legal_growth_suite() -> Check {
    let counts = trials(100, |i| {
        let mut r = rng(5, i);
        let rank = 2 + i % 2;
        let p = random_path(&mut r, rank);
        let omega = p.omega();
        for _ in 0..3 {
            let z = random_class(&mut r, rank, 6);
            let mut ts = [random_time(&mut r, &omega), random_time(&mut r, &omega)];
            ts.sort();
            if ts[0] == ts[1] {
                continue;
            }
            match legal_growth(&p, &z, &ts[0], &ts[1]).map_err(|e| e.to_string())? {
                GrowthCheck::Segment { slack } => ensure(slack >= -1e-9, || format!("path {i} {z}: slack {slack}"))?,
                GrowthCheck::LegalLoop { relative_error } => {
                    ensure(relative_error <= 1e-9, || format!("path {i} {z}: legal loop error {relative_error}"))?
                }
            }
        }
        let (n, worst) = uninvolved_edge_error(&p).map_err(|e| e.to_string())?;
        ensure(worst <= 1e-9, || format!("path {i}: uninvolved edge error {worst}"))?;
        Ok(n)
    })?;
    Ok(format!("100 paths, {} uninvolved edge intervals", counts.iter().sum::<usize>()))
}

// 6 -----------------------------------------------------------------------------------------

/// Christoffel word of slope `(p, q)`: the primitive class with `|p|` a-letters and `|q|`
/// b-letters, with signs carried by the letters.
fn christoffel(p: i64, q: i64) -> CyclicWord {
    let (x, y) = (p.abs(), q.abs());
    let n = x + y;
    let (la, lb): (Letter, Letter) = (if p < 0 { -1 } else { 1 }, if q < 0 { -2 } else { 2 });
    let letters: Vec<Letter> = (1..=n).map(|i| if (i * y) / n == ((i - 1) * y) / n { la } else { lb }).collect();
    CyclicWord::new(&Word::reduce(letters)).unwrap()
}

/// All nontrivial cyclically reduced classes of length at most `max` over a, b.
fn all_classes(max: usize) -> BTreeSet<CyclicWord> {
    let alphabet: [Letter; 4] = [1, -1, 2, -2];
    let mut out = BTreeSet::new();
    let mut frontier: Vec<Vec<Letter>> = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &alphabet {
                if w.last() != Some(&-l) {
                    let mut v = w.clone();
                    v.push(l);
                    if v.first() != Some(&-l) {
                        out.insert(CyclicWord::new(&Word::reduce(v.clone())).unwrap());
                    }
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Primitive root and exponent of a cyclic word.
fn root(z: &CyclicWord) -> (CyclicWord, usize) {
    let l = z.letters();
    let n = l.len();
    let d = (1..=n).find(|&d| n % d == 0 && (0..n).all(|i| l[i] == l[i % d])).unwrap();
    (CyclicWord::new(&Word::reduce(l[..d].to_vec())).unwrap(), n / d)
}

fn whitehead_suite() -> Check {
    let mut primitives = BTreeSet::new();
    for p in -8i64..=8 {
        for q in -8i64..=8 {
            if p.abs() + q.abs() <= 8 && normalize_slope(p, q).is_ok() {
                let c = christoffel(p, q);
                primitives.insert(c.inverse());
                primitives.insert(c);
            }
        }
    }
    let classes: Vec<CyclicWord> = all_classes(8).into_iter().collect();
    let mismatches: Vec<String> = classes
        .par_iter()
        .filter_map(|z| {
            let (r, k) = root(z);
            let simple = primitives.contains(&r);
            let cert = match is_simple(z, 2) {
                Ok(c) => c,
                Err(e) => return Some(format!("{z}: {e}")),
            };
            let ok = is_primitive(z, 2) == (simple && k == 1) && cert.is_simple() == simple && cert.verify(z, 2);
            (!ok).then(|| format!("{z}: oracle simple={simple} power={k}"))
        })
        .collect();
    ensure(mismatches.is_empty(), || format!("{} mismatches, e.g. {}", mismatches.len(), mismatches[0]))?;
    let c = CyclicWord::parse("abAB").unwrap();
    let rose = MarkedGraph::rose(&[Q::new(1.into(), 2.into()), Q::new(1.into(), 2.into())]).unwrap();
    ensure(is_surface_relation(&c, &rose).unwrap(), || "abAB is not recognized as a surface relation".into())?;
    ensure(!is_simple(&c, 2).unwrap().is_simple(), || "abAB reported simple".into())?;
    Ok(format!("{} classes of length ≤ 8, {} primitive classes", classes.len(), primitives.len()))
}

// 7 -----------------------------------------------------------------------------------------

/// Rose direction of a letter.
fn rose_dir(l: Letter) -> usize {
    dir(l.unsigned_abs() as usize - 1, l < 0)
}

/// Whether some vertex of `core` reads every word as a closed loop: then a conjugate of
/// the subgroup they generate lies in the core's subgroup.
fn reads_closed(core: &CoreGraph, words: &[Word]) -> bool {
    let mut step: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &core.edges {
        step.insert((e.from, e.label), e.to);
        step.insert((e.to, rev(e.label)), e.from);
    }
    let nv = core.edges.iter().map(|e| e.from.max(e.to) + 1).max().unwrap_or(1);
    (0..nv).any(|v0| {
        words.iter().all(|w| {
            let mut v = v0;
            for &l in w.letters() {
                match step.get(&(v, rose_dir(l))) {
                    Some(&u) => v = u,
                    None => return false,
                }
            }
            v == v0
        })
    })
}

fn letter_of(d: usize) -> Letter {
    let g = (d / 2) as Letter + 1;
    if d % 2 == 1 {
        -g
    } else {
        g
    }
}

/// Free basis of a core graph's subgroup based at vertex 0: one loop per edge outside a
/// breadth-first spanning tree, spelled in rose letters.
fn core_basis(core: &CoreGraph) -> Vec<Word> {
    let nv = core.edges.iter().map(|e| e.from.max(e.to) + 1).max().unwrap_or(1);
    let mut to_root: Vec<Option<Vec<Letter>>> = vec![None; nv];
    to_root[0] = Some(vec![]);
    let mut tree = vec![false; core.edges.len()];
    let mut q = VecDeque::from([0]);
    while let Some(v) = q.pop_front() {
        for (i, e) in core.edges.iter().enumerate() {
            for (a, b, d) in [(e.from, e.to, e.label), (e.to, e.from, rev(e.label))] {
                if a == v && to_root[b].is_none() {
                    let mut p = to_root[a].clone().unwrap();
                    p.push(letter_of(d));
                    to_root[b] = Some(p);
                    tree[i] = true;
                    q.push_back(b);
                }
            }
        }
    }
    core.edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !tree[*i])
        .map(|(_, e)| {
            let mut w = to_root[e.from].clone().unwrap();
            w.push(letter_of(e.label));
            w.extend(to_root[e.to].as_ref().unwrap().iter().rev().map(|l| -l));
            Word::reduce(w)
        })
        .collect()
}

/// Whether a conjugate of `a` lies in `b`, read from the two cores.
fn nested(a: &FreeFactor, b: &FreeFactor) -> bool {
    reads_closed(b.core(), &core_basis(a.core()))
}

fn abelian_det(u: &Word, v: &Word) -> i64 {
    let (x, y) = (u.abelianize(2), v.abelianize(2));
    x[0] * y[1] - x[1] * y[0]
}

/// Re-derives every hop without its certificate.
fn hops_hold(path: &FactorPath) -> Result<(), String> {
    ensure(path.factors.len() == path.hops.len() + 1, || "hop count".into())?;
    for (i, hop) in path.hops.iter().enumerate() {
        let (a, b) = (&path.factors[i], &path.factors[i + 1]);
        let ok = a != b
            && match hop {
                Hop::Up { .. } => a.rank() < b.rank() && nested(a, b),
                Hop::Down { .. } => b.rank() < a.rank() && nested(b, a),
                Hop::Basis { u, v } => {
                    is_primitive(&CyclicWord::new(u).unwrap(), 2)
                        && is_primitive(&CyclicWord::new(v).unwrap(), 2)
                        && abelian_det(u, v).abs() == 1
                        && FreeFactor::new(vec![u.clone()], 2).as_ref() == Ok(a)
                        && FreeFactor::new(vec![v.clone()], 2).as_ref() == Ok(b)
                }
            };
        ensure(ok, || format!("hop {i} from {a} to {b} does not hold"))?;
        // the library's own containment search agrees
        if let Hop::Up { .. } = hop {
            ensure(contains(a, b).is_some(), || format!("hop {i}: containment search disagrees"))?;
        }
    }
    Ok(())
}

fn bounds_suite() -> Check {
    trials(500, |i| {
        let mut r = rng(7, i);
        let rank = 3 + i % 2;
        let g = random_graph(&mut r, rank, 4, 5);
        let subs = proper_subgraphs(&g).map_err(|e| e.to_string())?;
        let (p, q) = (subs.choose(&mut r).unwrap(), subs.choose(&mut r).unwrap());
        let c = subgraph_chain(&g, p, q).map_err(|e| format!("chain {i}: {e}"))?;
        hops_hold(&c).map_err(|e| format!("chain {i}: {e}"))?;
        ensure(c.len() <= 4, || format!("chain {i}: length {}", c.len()))
    })?;
    trials(500, |i| {
        let mut r = rng(107, i);
        let rank = 2 + i % 3;
        let g = random_graph(&mut r, rank, 6, 5);
        let x = random_simple_class(&mut r, rank, 8, 7);
        let b = crossing_bound_path(&x, &g).map_err(|e| format!("crossing {i} {x}: {e}"))?;
        hops_hold(&b.path).map_err(|e| format!("crossing {i}: {e}"))?;
        // k from the realized loop: least number of times an edge is crossed
        let l = g.realize_loop(&x).unwrap();
        let k = (0..g.num_edges()).map(|e| l.crossings(e)).filter(|&c| c > 0).min().unwrap_or(0);
        ensure(b.path.start() == &smallest_factor(&x, rank).unwrap(), || format!("crossing {i}: start"))?;
        ensure(project(&g).unwrap().contains(b.path.end()), || format!("crossing {i}: end"))?;
        ensure(b.path.len() <= 6 * k + 13, || format!("crossing {i}: {} > 6·{k}+13", b.path.len()))
    })?;
    trials(500, |i| {
        let mut r = rng(207, i);
        let rank = 2 + i % 3;
        let g = random_graph(&mut r, rank, 5, 5);
        let a = random_factor(&mut r, rank, 5);
        let b = distance_bound_factor_to_graph(&a, &g).map_err(|e| format!("factor {i} {a}: {e}"))?;
        hops_hold(&b.path).map_err(|e| format!("factor {i}: {e}"))?;
        // the witness class lies in a and has the recorded length; k is the least integer
        // with injrad < k + 1
        let inside = reads_closed(a.core(), &[b.class.as_word()]);
        let len = g.normalize().loop_length(&b.class).unwrap();
        let k = b.injectivity_radius.floor().to_integer();
        let k: usize = k.try_into().map_err(|_| "k out of range".to_string())?;
        ensure(inside && len == b.injectivity_radius, || format!("factor {i}: witness class {}", b.class))?;
        ensure(b.path.start() == &a && project(&g).unwrap().contains(b.path.end()), || format!("factor {i}: ends"))?;
        ensure(b.path.len() <= 6 * k + 14, || format!("factor {i}: {} > 6·{k}+14", b.path.len()))
    })?;
    Ok("3 × 500 constructions, every hop re-derived".into())
}

// 8 -----------------------------------------------------------------------------------------

fn farey_suite() -> Check {
    let mut vs: BTreeSet<Slope> = BTreeSet::new();
    for p in -8i64..=8 {
        for q in -8i64..=8 {
            if let Ok(s) = normalize_slope(p, q) {
                vs.insert(s);
            }
        }
    }
    let vs: Vec<Slope> = vs.into_iter().collect();
    let factor: HashMap<Slope, FreeFactor> =
        vs.iter().map(|&s| (s, FreeFactor::new(vec![primitive_of(s).unwrap()], 2).unwrap())).collect();
    let bad: Vec<String> = vs
        .par_iter()
        .flat_map_iter(|&s| {
            let mut dist = HashMap::from([(s, 0usize)]);
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &t in &vs {
                    if (x.0 * t.1 - x.1 * t.0).abs() == 1 && !dist.contains_key(&t) {
                        dist.insert(t, dist[&x] + 1);
                        q.push_back(t);
                    }
                }
            }
            let factor = &factor;
            vs.iter()
                .filter_map(move |t| {
                    let d = farey_distance(&factor[&s], &factor[t]).ok();
                    (d != Some(dist[t])).then(|| format!("{s:?} → {t:?}: {d:?} vs {}", dist[t]))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    ensure(bad.is_empty(), || format!("{} disagreements, e.g. {}", bad.len(), bad[0]))?;
    let (a, b) = (FreeFactor::parse("a", 2).unwrap(), FreeFactor::parse("b", 2).unwrap());
    ensure(farey_distance(&a, &b) == Ok(1), || "d(<a>, <b>) ≠ 1".into())?;
    Ok(format!("{} slopes, {} ordered pairs", vs.len(), vs.len() * vs.len()))
}

// 9 -----------------------------------------------------------------------------------------

/// Whether `z` has a legal segment of normalized length at least 3 at natural time `s`,
/// read directly from the loop in the smoothed graph.
fn has_legal_three(p: &FoldingPath, z: &CyclicWord, s: &Q) -> bool {
    let pt = p.graph_at(&Time::Natural(s.clone())).unwrap();
    let g = &pt.graph;
    let l = g.realize_loop(z).unwrap();
    let n = l.dirs.len();
    let illegal: Vec<usize> =
        (0..n).filter(|&i| pt.gates.is_illegal_turn(g.terminus(l.dirs[i]), rev(l.dirs[i]), l.dirs[(i + 1) % n])).collect();
    if illegal.is_empty() {
        return true;
    }
    let three = qi(3) * g.volume();
    (0..illegal.len()).any(|j| {
        let (a, b) = (illegal[j], illegal[(j + 1) % illegal.len()]);
        let mut sum = Q::zero();
        let mut i = (a + 1) % n;
        loop {
            sum += g.length(l.dirs[i]).clone();
            if i == b {
                break;
            }
            i = (i + 1) % n;
        }
        sum >= three
    })
}

fn projection_suite() -> Check {
    trials(200, |i| {
        let mut r = rng(9, i);
        let p = random_path(&mut r, 3);
        let phi = random_automorphism(&mut r, 3, 3);
        let im = |s: &str| phi.apply(&Word::parse(s).unwrap());
        let big = FreeFactor::new(vec![im("a"), im("b")], 3).unwrap();
        let small = FreeFactor::new(vec![im(["a", "b", "ab", "aB", "abb"][r.gen_range(0..5)])], 3).unwrap();
        ensure(nested(&small, &big), || format!("pair {i}: not nested"))?;
        let (b, s) = (Subject::Factor(big), Subject::Factor(small));
        let e = |x: osk_core::OskError| format!("pair {i}: {x}");
        let (lb, ls) = (left_time(&b, &p).map_err(e)?.0, left_time(&s, &p).map_err(e)?.0);
        let (rb, rs) = (right_time(&b, &p).map_err(e)?.0, right_time(&s, &p).map_err(e)?.0);
        ensure(lb <= ls && rs <= rb, || format!("pair {i}: lt {lb} vs {ls}, rt {rb} vs {rs}"))?;
        ensure(lb <= rb && ls <= rs, || format!("pair {i}: lt > rt"))
    })?;
    let scanned = trials(100, |i| {
        let mut r = rng(109, i);
        let rank = 2 + i % 2;
        let p = random_path(&mut r, rank);
        let z = random_simple_class(&mut r, rank, 4, 3);
        let subj = Subject::class(z.clone(), rank).map_err(|e| e.to_string())?;
        let (lt, _) = left_time(&subj, &p).map_err(|e| e.to_string())?;
        let (rt, _) = right_time(&subj, &p).map_err(|e| e.to_string())?;
        ensure(lt <= rt, || format!("path {i}: lt {lt} > rt {rt}"))?;
        let mut times: Vec<Q> = Vec::new();
        for e in p.events() {
            times.extend([e.start.clone(), &e.start + &e.duration / qi(2)]);
        }
        times.push(p.omega());
        let mut seen = false;
        for s in &times {
            let legal = has_legal_three(&p, &z, s);
            ensure(!seen || legal, || format!("path {i} {z}: legal segment lost at {s}"))?;
            seen |= legal;
            ensure(s == &lt || legal == (s > &lt), || format!("path {i} {z}: at {s} legal={legal}, lt={lt}"))?;
        }
        Ok(times.len())
    })?;
    Ok(format!("200 nested pairs, 100 paths scanned at {} times", scanned.iter().sum::<usize>()))
}

// 10 ----------------------------------------------------------------------------------------

fn experiments_suite() -> Check {
    let cfg = ExperimentConfig { trials: 50, seed: 2024, ..ExperimentConfig::default() };
    let mut rows = 0;
    for exp in [Experiment::Contraction, Experiment::FellowTravel, Experiment::ThinTriangles] {
        let csv = |recs: &[_]| {
            let mut buf = Vec::new();
            write_csv(recs, &mut buf).unwrap();
            buf
        };
        let a = run(exp, &cfg).map_err(|e| format!("{exp:?}: {e}"))?;
        let b = run(exp, &cfg).map_err(|e| format!("{exp:?}: {e}"))?;
        ensure(csv(&a) == csv(&b), || format!("{exp:?}: CSV differs between runs"))?;
        let per_variant = if exp == Experiment::FellowTravel { 2 } else { 1 };
        ensure(a.len() == 50 * per_variant, || format!("{exp:?}: {} records", a.len()))?;
        for rec in &a {
            ensure(rec.consistent, || format!("{exp:?} trial {}: consistency flag", rec.trial))?;
            ensure(rec.value.is_finite() && rec.aux.is_finite(), || format!("{exp:?} trial {}: non-finite", rec.trial))?;
            ensure(rec.metric == Metric::Exact, || format!("{exp:?} trial {}: not exact", rec.trial))?;
        }
        if exp == Experiment::FellowTravel {
            for v in ["parallel", "anti-parallel"] {
                ensure(a.iter().filter(|r| r.variant == v).count() == 50, || format!("{v} count"))?;
            }
        }
        rows += a.len();
    }
    Ok(format!("{rows} records, byte-identical reruns"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("optimal-map λ equals candidate λ; triangle inequality", lambda_and_triangle),
        ("folding paths are geodesics", geodesic_property),
        ("derivative formula and exponential reconstruction", derivative_formula),
        ("volume slope equals −m", volume_slope),
        ("legal and uninvolved-edge growth", legal_growth_suite),
        ("Whitehead suite against the rank-2 oracle", whitehead_suite),
        ("chain, crossing and factor-to-graph bounds", bounds_suite),
        ("Farey distance against BFS", farey_suite),
        ("projection nesting, ordering and upward closure", projection_suite),
        ("experiments complete deterministically", experiments_suite),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of 10 passed in {:.1}s", 10 - failed, total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
