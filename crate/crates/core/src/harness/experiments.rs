//! Randomized experiments on projections of folding paths to the free factor complex.
//!
//! Every trial draws from its own generator, seeded by the run seed with the trial id as the
//! stream, so results do not depend on scheduling. Records are sorted by
//! (experiment, param, variant, trial) before output.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::formula::{
    derivative_samples, legal_growth, reconstruction_error, uninvolved_edge_error, volume_slopes_exact, GrowthCheck,
};
use super::random::{random_class, random_graph};
use crate::error::{OskError, Result};
use crate::factor_complex::{distance_bound_factor_to_graph, farey_distance, project, FreeFactor};
use crate::folding::{fold_path, FoldingPath, Time};
use crate::lipschitz::lipschitz_distance;
use crate::marked_graph::MarkedGraph;
use crate::projections::graph_projection;
use crate::rational::{from_f64, qi, Q};

const PATH_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Contraction,
    FellowTravel,
    ThinTriangles,
    FormulaSuite,
}

impl Experiment {
    pub fn parse(s: &str) -> Result<Experiment> {
        match s.replace('-', "_").as_str() {
            "contraction" => Ok(Experiment::Contraction),
            "fellow_travel" => Ok(Experiment::FellowTravel),
            "thin_triangles" => Ok(Experiment::ThinTriangles),
            "formula_suite" => Ok(Experiment::FormulaSuite),
            other => Err(OskError::Input(format!("unknown experiment {other:?}"))),
        }
    }

    fn tag(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rank: usize,
    pub trials: usize,
    pub seed: u64,
    /// Longest random class.
    pub max_word_len: usize,
    /// Whitehead moves applied to random markings.
    pub depth: usize,
    /// Largest integer weight in random edge lengths.
    pub max_len: i64,
    /// Points sampled along each folding path.
    pub points: usize,
    /// Swept parameter: the ball radius for contraction, the endpoint separation for
    /// fellow travelling; ignored elsewhere.
    pub params: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { rank: 2, trials: 50, seed: 1, max_word_len: 6, depth: 3, max_len: 6, points: 6, params: vec![0.5] }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank < 2 {
            return Err(OskError::Rank { expected: "≥ 2".into(), actual: self.rank });
        }
        if self.trials == 0 || self.max_word_len == 0 || self.depth == 0 || self.max_len <= 0 || self.points < 2 {
            return Err(OskError::Input("trial count and caps must be positive, with at least 2 points".into()));
        }
        if self.params.is_empty() || self.params.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(OskError::Input("parameters must be positive".into()));
        }
        Ok(())
    }
}

/// One row of experiment output. Distances in the factor complex are exact at rank 2
/// and certified upper bounds above it, as recorded in `metric`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub experiment: Experiment,
    pub trial: usize,
    pub rank: usize,
    pub variant: String,
    pub param: f64,
    pub metric: Metric,
    pub value: f64,
    pub aux: f64,
    pub samples: usize,
    pub consistent: bool,
    pub inputs: String,
    /// Not written to CSV, which must be reproducible byte for byte.
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Exact,
    UpperBound,
    Residual,
}

/// Thread pool capped by `OSK_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("OSK_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| OskError::Input(format!("OSK_THREADS={v:?} is not a count")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| OskError::Input(e.to_string()))
}

pub fn trial_rng(seed: u64, experiment: Experiment, param_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ experiment.tag().wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(((param_index as u64) << 32) | trial as u64);
    rng
}

/// A point of the factor complex coarsely represented by the projection of a graph.
#[derive(Debug, Clone)]
pub struct FPoint {
    pub graph: MarkedGraph,
    pub factors: BTreeSet<FreeFactor>,
}

impl FPoint {
    pub fn of(graph: MarkedGraph) -> Result<FPoint> {
        let factors = project(&graph)?;
        Ok(FPoint { graph, factors })
    }
}

/// Distance from a factor to a projection: exact Farey distance at rank 2, otherwise the
/// length of a certified path into the projection.
fn factor_to_point(a: &FreeFactor, q: &FPoint) -> Result<(usize, bool)> {
    if q.factors.contains(a) {
        return Ok((0, true));
    }
    if a.ambient_rank() == 2 {
        let mut best = usize::MAX;
        for b in &q.factors {
            best = best.min(farey_distance(a, b)?);
        }
        return Ok((best, true));
    }
    let bound = distance_bound_factor_to_graph(a, &q.graph)?;
    bound.path.verify()?;
    Ok((bound.path.len(), false))
}

/// Smallest distance between the two projections.
pub fn gap(p: &FPoint, q: &FPoint) -> Result<(usize, bool)> {
    let mut best = (usize::MAX, true);
    for a in &p.factors {
        let d = factor_to_point(a, q)?;
        if d.0 < best.0 {
            best = d;
        }
    }
    Ok(best)
}

/// Hausdorff distance between the factor sets of two projections.
pub fn set_hausdorff(p: &FPoint, q: &FPoint) -> Result<(usize, bool)> {
    let mut worst = (0, true);
    for (x, y) in [(p, q), (q, p)] {
        for a in &x.factors {
            let d = factor_to_point(a, y)?;
            worst = (worst.0.max(d.0), worst.1 && d.1);
        }
    }
    Ok(worst)
}

/// Hausdorff distance between two sampled curves in the complex, with points compared by `gap`.
pub fn curve_hausdorff(ps: &[FPoint], qs: &[FPoint]) -> Result<(usize, bool)> {
    let mut worst = (0, true);
    for (xs, ys) in [(ps, qs), (qs, ps)] {
        for x in xs {
            let mut best = (usize::MAX, true);
            for y in ys {
                let d = gap(x, y)?;
                if d.0 < best.0 {
                    best = d;
                }
            }
            worst = (worst.0.max(best.0), worst.1 && best.1);
        }
    }
    Ok(worst)
}

/// Projections of `points` evenly spaced arclength samples of the path, endpoints included.
pub fn sample_curve(path: &FoldingPath, points: usize) -> Result<Vec<FPoint>> {
    let omega = path.omega();
    (0..points)
        .map(|i| {
            let s = &omega * Q::new((i as i64).into(), ((points - 1) as i64).into());
            FPoint::of(path.graph_at(&Time::Natural(s))?.graph)
        })
        .collect()
}

fn random_path(rng: &mut ChaCha8Rng, cfg: &ExperimentConfig) -> Result<(MarkedGraph, MarkedGraph, FoldingPath)> {
    for _ in 0..PATH_ATTEMPTS {
        let g = random_graph(rng, cfg.rank, cfg.depth, cfg.max_len);
        let h = random_graph(rng, cfg.rank, cfg.depth, cfg.max_len);
        if let Ok(p) = fold_path(&g, &h) {
            return Ok((g, h, p));
        }
    }
    Err(OskError::Budget("no folding path found".into()))
}

/// Volume-1 graph whose edge lengths are those of `g` scaled by factors in `[1, e^r]`,
/// so both Lipschitz distances to `g` are at most `r`.
pub fn perturb(rng: &mut ChaCha8Rng, g: &MarkedGraph, r: f64) -> Result<MarkedGraph> {
    let top = from_f64(r.exp()).min(qi(64));
    let lengths: Vec<Q> = g
        .edges()
        .iter()
        .map(|e| {
            let u = Q::new(rng.gen_range(0..=16i64).into(), 16.into());
            &e.length * (qi(1) + (&top - qi(1)) * u)
        })
        .collect();
    Ok(g.with_lengths(&lengths)?.normalize())
}

fn lip(g: &MarkedGraph, h: &MarkedGraph) -> Result<f64> {
    Ok(lipschitz_distance(&g.normalize(), &h.normalize())?.distance())
}

fn graphs_json(gs: &[&MarkedGraph]) -> String {
    let v: Vec<_> = gs.iter().map(|g| g.to_json()).collect();
    serde_json::to_string(&v).expect("graphs serialize")
}

fn metric(exact: bool) -> Metric {
    if exact {
        Metric::Exact
    } else {
        Metric::UpperBound
    }
}

fn contraction_trial(rng: &mut ChaCha8Rng, cfg: &ExperimentConfig, radius: f64) -> Result<TrialRecord> {
    let (g0, g1, path) = random_path(rng, cfg)?;
    let omega = path.omega();
    let samples: Vec<MarkedGraph> = (0..cfg.points)
        .map(|i| {
            let s = &omega * Q::new((i as i64).into(), ((cfg.points - 1) as i64).into());
            path.graph_at(&Time::Natural(s)).map(|p| p.graph.normalize())
        })
        .collect::<Result<_>>()?;
    // H far from the sampled path, H' within the radius of H
    let mut found = None;
    for _ in 0..PATH_ATTEMPTS {
        let h = random_graph(rng, cfg.rank, cfg.depth, cfg.max_len);
        let mut away = f64::INFINITY;
        for p in &samples {
            away = away.min(lip(&h, p)?);
        }
        if away >= radius {
            found = Some((h, away));
            break;
        }
    }
    let (h, away) = found.ok_or_else(|| OskError::Budget("no graph far from the path".into()))?;
    let h2 = perturb(rng, &h, radius)?;
    let close = lip(&h, &h2)? <= radius + 1e-12 && lip(&h2, &h)? <= radius + 1e-12;
    let (a, b) = (graph_projection(&h, &path)?, graph_projection(&h2, &path)?);
    let left = |x: &Q| -> Result<FPoint> { FPoint::of(path.graph_at(&Time::Natural(x.clone()))?.graph) };
    let (pa, pb) = (left(&a.result.lt_natural)?, left(&b.result.lt_natural)?);
    let (d, exact) = set_hausdorff(&pa, &pb)?;
    let ordered = a.result.lt_natural <= a.result.rt_natural && b.result.lt_natural <= b.result.rt_natural;
    Ok(TrialRecord {
        experiment: Experiment::Contraction,
        trial: 0,
        rank: cfg.rank,
        variant: "-".into(),
        param: radius,
        metric: metric(exact),
        value: d as f64,
        aux: away,
        samples: pa.factors.len() + pb.factors.len(),
        consistent: close && ordered,
        inputs: graphs_json(&[&g0, &g1, &h, &h2]),
        wall_ms: 0.0,
    })
}

fn fellow_trials(rng: &mut ChaCha8Rng, cfg: &ExperimentConfig, sep: f64) -> Result<Vec<TrialRecord>> {
    let (g0, g1, p) = random_path(rng, cfg)?;
    let mut out = Vec::new();
    let base = sample_curve(&p, cfg.points)?;
    for variant in ["parallel", "anti-parallel"] {
        let mut made = None;
        for _ in 0..PATH_ATTEMPTS {
            let (h0, h1) = (perturb(rng, &g0, sep)?, perturb(rng, &g1, sep)?);
            let q = if variant == "parallel" { fold_path(&h0, &h1) } else { fold_path(&h1, &h0) };
            if let Ok(q) = q {
                made = Some((h0, h1, q));
                break;
            }
        }
        let (h0, h1, q) = made.ok_or_else(|| OskError::Budget("no nearby folding path".into()))?;
        let other = sample_curve(&q, cfg.points)?;
        let (d, exact) = curve_hausdorff(&base, &other)?;
        let ends = lip(&g0, &h0)?.max(lip(&h0, &g0)?).max(lip(&g1, &h1)?).max(lip(&h1, &g1)?);
        out.push(TrialRecord {
            experiment: Experiment::FellowTravel,
            trial: 0,
            rank: cfg.rank,
            variant: variant.into(),
            param: sep,
            metric: metric(exact),
            value: d as f64,
            aux: ends,
            samples: 2 * cfg.points,
            consistent: ends <= sep + 1e-12,
            inputs: graphs_json(&[&g0, &g1, &h0, &h1]),
            wall_ms: 0.0,
        });
    }
    Ok(out)
}

/// Thinness of a triangle of sampled curves: the farthest any sample on one side lies from
/// the union of the other two.
pub fn triangle_delta(sides: &[Vec<FPoint>; 3]) -> Result<(usize, bool)> {
    let mut worst = (0, true);
    for i in 0..3 {
        let others: Vec<FPoint> = (0..3).filter(|&j| j != i).flat_map(|j| sides[j].iter().cloned()).collect();
        for x in &sides[i] {
            let mut best = (usize::MAX, true);
            for y in &others {
                let d = gap(x, y)?;
                if d.0 < best.0 {
                    best = d;
                }
            }
            worst = (worst.0.max(best.0), worst.1 && best.1);
        }
    }
    Ok(worst)
}

fn triangle_trial(rng: &mut ChaCha8Rng, cfg: &ExperimentConfig) -> Result<TrialRecord> {
    for _ in 0..PATH_ATTEMPTS {
        let v: Vec<MarkedGraph> = (0..3).map(|_| random_graph(rng, cfg.rank, cfg.depth, cfg.max_len)).collect();
        let paths: Result<Vec<FoldingPath>> = (0..3).map(|i| fold_path(&v[i], &v[(i + 1) % 3])).collect();
        let Ok(paths) = paths else { continue };
        let sides = [sample_curve(&paths[0], cfg.points)?, sample_curve(&paths[1], cfg.points)?, sample_curve(&paths[2], cfg.points)?];
        let (d, exact) = triangle_delta(&sides)?;
        let longest = paths.iter().map(|p| p.length()).fold(0.0, f64::max);
        return Ok(TrialRecord {
            experiment: Experiment::ThinTriangles,
            trial: 0,
            rank: cfg.rank,
            variant: "-".into(),
            param: 0.0,
            metric: metric(exact),
            value: d as f64,
            aux: longest,
            samples: 3 * cfg.points,
            consistent: true,
            inputs: graphs_json(&[&v[0], &v[1], &v[2]]),
            wall_ms: 0.0,
        });
    }
    Err(OskError::Budget("no triangle of folding paths found".into()))
}

fn formula_trial(rng: &mut ChaCha8Rng, cfg: &ExperimentConfig) -> Result<TrialRecord> {
    let (g0, g1, path) = random_path(rng, cfg)?;
    let z = random_class(rng, cfg.rank, cfg.max_word_len);
    let mut worst_ratio = 0.0f64;
    let mut n = 0;
    for h in [1e-3, 1e-4] {
        for s in derivative_samples(rng, &path, &z, h, cfg.points)? {
            worst_ratio = worst_ratio.max(s.residual / h);
            n += 1;
        }
    }
    let recon = reconstruction_error(&path, &z, 3)?;
    let volume = volume_slopes_exact(&path)?;
    let (_, edges) = uninvolved_edge_error(&path)?;
    let omega = path.omega();
    let s0 = &omega * Q::new(rng.gen_range(0..50i64).into(), 100.into());
    let growth = match legal_growth(&path, &z, &s0, &omega)? {
        GrowthCheck::Segment { slack } => slack >= -1e-9,
        GrowthCheck::LegalLoop { relative_error } => relative_error <= 1e-9,
    };
    Ok(TrialRecord {
        experiment: Experiment::FormulaSuite,
        trial: 0,
        rank: cfg.rank,
        variant: "-".into(),
        param: 0.0,
        metric: Metric::Residual,
        value: worst_ratio,
        aux: recon,
        samples: n,
        consistent: worst_ratio <= 10.0 && recon <= 1e-12 && volume && edges <= 1e-9 && growth,
        inputs: serde_json::json!({ "graphs": [g0.to_json(), g1.to_json()], "class": z }).to_string(),
        wall_ms: 0.0,
    })
}

/// Runs all trials of one experiment in parallel; the output order is canonical.
pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let pool = thread_pool()?;
    let params: Vec<f64> = match experiment {
        Experiment::Contraction | Experiment::FellowTravel => cfg.params.clone(),
        _ => vec![0.0],
    };
    let jobs: Vec<(usize, usize)> = (0..params.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let results: Vec<Result<Vec<TrialRecord>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(pi, trial)| {
                let start = Instant::now();
                let mut rng = trial_rng(cfg.seed, experiment, pi, trial);
                let param = params[pi];
                let mut recs = match experiment {
                    Experiment::Contraction => vec![contraction_trial(&mut rng, cfg, param)?],
                    Experiment::FellowTravel => fellow_trials(&mut rng, cfg, param)?,
                    Experiment::ThinTriangles => vec![triangle_trial(&mut rng, cfg)?],
                    Experiment::FormulaSuite => vec![formula_trial(&mut rng, cfg)?],
                };
                let ms = start.elapsed().as_secs_f64() * 1e3;
                for r in &mut recs {
                    r.trial = trial;
                    r.wall_ms = ms;
                }
                Ok(recs)
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    out.sort_by(|a, b| {
        (a.experiment, a.param.to_bits(), &a.variant, a.trial).cmp(&(b.experiment, b.param.to_bits(), &b.variant, b.trial))
    });
    Ok(out)
}

pub fn write_csv<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(|e| OskError::Input(e.to_string()))?;
    }
    wr.flush().map_err(|e| OskError::Input(e.to_string()))
}

/// Distribution of `value` per (experiment, param, variant).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: Experiment,
    pub param: f64,
    pub variant: String,
    pub trials: usize,
    pub max: f64,
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub all_consistent: bool,
}

pub fn summarize(records: &[TrialRecord]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let key = |r: &TrialRecord| (r.experiment, r.param.to_bits(), r.variant.clone());
        let k = key(&records[i]);
        let group: Vec<&TrialRecord> = records[i..].iter().take_while(|r| key(r) == k).collect();
        i += group.len();
        let mut v: Vec<f64> = group.iter().map(|r| r.value).collect();
        v.sort_by(f64::total_cmp);
        let pct = |p: f64| v[((p * (v.len() - 1) as f64).round()).to_usize().unwrap_or(0)];
        out.push(Summary {
            experiment: k.0,
            param: f64::from_bits(k.1),
            variant: k.2,
            trials: v.len(),
            max: *v.last().expect("nonempty group"),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            p50: pct(0.5),
            p90: pct(0.9),
            all_consistent: group.iter().all(|r| r.consistent),
        });
    }
    out
}

pub fn write_summary_csv<W: Write>(rows: &[Summary], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| OskError::Input(e.to_string()))?;
    }
    wr.flush().map_err(|e| OskError::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> ExperimentConfig {
        ExperimentConfig { trials, points: 4, ..ExperimentConfig::default() }
    }

    #[test]
    fn identical_inputs_give_zero() {
        let mut rng = trial_rng(3, Experiment::FellowTravel, 0, 0);
        let (_, _, p) = random_path(&mut rng, &small(1)).unwrap();
        let c = sample_curve(&p, 4).unwrap();
        assert_eq!(curve_hausdorff(&c, &c).unwrap(), (0, true));
        let x = c[0].clone();
        assert_eq!(set_hausdorff(&x, &x).unwrap(), (0, true));
        assert_eq!(triangle_delta(&[vec![x.clone()], vec![x.clone()], vec![x]]).unwrap(), (0, true));
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = small(3);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&run(Experiment::ThinTriangles, &cfg).unwrap(), &mut a).unwrap();
        write_csv(&run(Experiment::ThinTriangles, &cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a).unwrap().starts_with("experiment,trial,rank,variant,param,metric,value,aux,samples,consistent,inputs"));
    }

    #[test]
    fn config_rejects_bad_caps() {
        assert!(ExperimentConfig { trials: 0, ..ExperimentConfig::default() }.validate().is_err());
        assert!(ExperimentConfig { params: vec![-1.0], ..ExperimentConfig::default() }.validate().is_err());
        assert!(Experiment::parse("fellow-travel").is_ok());
    }
}
