//! `osk`: command-line access to distances, folding paths, Whitehead checks, the free factor
//! complex, projections and the experiment harness. Every command prints JSON, except
//! `experiment`, which prints CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use osk_core::factor_complex::farey::{farey_path, primitive_of};
use osk_core::factor_complex::{distance_bound_factor_to_graph, farey_distance, project, slope_of, FactorPath, FreeFactor};
use osk_core::folding::{fold_path, FoldingPath, PathJson, Time};
use osk_core::free_group::CyclicWord;
use osk_core::harness::experiments::{run, summarize, write_csv, write_summary_csv, Experiment, ExperimentConfig};
use osk_core::lipschitz::{lipschitz_distance, optimal_map};
use osk_core::marked_graph::{signed_id, MarkedGraph};
use osk_core::projections::{projection, Subject, Witness};
use osk_core::rational::{fmt_q, parse_q};
use osk_core::whitehead::{is_primitive, is_simple, is_surface_relation, whitehead_minimize};

#[derive(Parser)]
#[command(name = "osk", version, about = "Outer space, folding paths and the free factor complex")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Random seed for experiments.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Trials per experiment parameter.
    #[arg(long, global = true, default_value_t = 50)]
    trials: usize,
    /// Rank of the free group.
    #[arg(long, global = true)]
    rank: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lipschitz distance d(from, to) with an optimal map.
    Dist {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        /// Writes the optimal map: vertex images, edge paths, slopes, tension graph, gates.
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Folding path from one graph to another; `--out` receives the path file.
    Fold {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
    },
    /// The graph on a stored path at a given time, with the length of a class.
    Query {
        #[arg(long)]
        path: PathBuf,
        /// Arclength `t` as a decimal, or the natural parameter as `s=p/q`.
        #[arg(long)]
        time: String,
        #[arg(long)]
        class: Option<String>,
    },
    /// Whitehead algorithm queries on a cyclic word.
    Whitehead {
        #[arg(long, value_enum)]
        op: WhiteheadOp,
        #[arg(long)]
        word: String,
        /// Graph for `surface-relation`; the rose with unit edges when absent.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Exact distance between two rank-1 factors of F₂ in the Farey graph.
    Ffdist {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Certified upper bound on the distance from a factor to the projection of a graph.
    Ffbound {
        /// Comma-separated generators.
        #[arg(long)]
        factor: String,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Left and right projection times of a factor to a stored path.
    Project {
        #[arg(long)]
        path: PathBuf,
        /// Comma-separated generators.
        #[arg(long)]
        factor: String,
    },
    /// Runs an experiment and writes CSV records.
    Experiment {
        #[arg(long, value_enum)]
        name: ExperimentName,
        /// Swept parameter values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
        params: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        max_word_len: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        max_len: i64,
        #[arg(long, default_value_t = 6)]
        points: usize,
        /// Also writes one summary row per (experiment, param, variant).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WhiteheadOp {
    Minimize,
    Primitive,
    Simple,
    SurfaceRelation,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    Contraction,
    FellowTravel,
    ThinTriangles,
    FormulaSuite,
}

impl ExperimentName {
    fn experiment(self) -> Experiment {
        match self {
            ExperimentName::Contraction => Experiment::Contraction,
            ExperimentName::FellowTravel => Experiment::FellowTravel,
            ExperimentName::ThinTriangles => Experiment::ThinTriangles,
            ExperimentName::FormulaSuite => Experiment::FormulaSuite,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_graph(path: &Path) -> Result<MarkedGraph> {
    Ok(MarkedGraph::from_json_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?)
}

fn read_path(path: &Path) -> Result<(PathJson, FoldingPath)> {
    let pj = PathJson::from_json_str(&read(path)?)?;
    let fp = pj.load().with_context(|| format!("replaying {}", path.display()))?;
    Ok((pj, fp))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            // a closed pipe (e.g. `| head`) is not an error
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

fn check_rank(global: &Global, rank: usize) -> Result<()> {
    match global.rank {
        Some(r) if r != rank => bail!("--rank {r} does not match the input rank {rank}"),
        _ => Ok(()),
    }
}

fn witness(w: &Option<Witness>) -> Value {
    serde_json::to_value(w).expect("witnesses serialize")
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Dist { from, to, map_out } => {
            let (a, b) = (read_graph(from)?, read_graph(to)?);
            check_rank(g, a.rank())?;
            let stretch = lipschitz_distance(&a, &b)?;
            if let Some(p) = map_out {
                let (map, _) = optimal_map(&a, &b)?;
                map.verify_homotopy()?;
                fs::write(p, pretty(&map.to_json())).with_context(|| format!("writing {}", p.display()))?;
            }
            let v = json!({
                "lambda": fmt_q(&stretch.lambda),
                "distance": stretch.distance(),
                "witness": stretch.witness,
            });
            emit(&g.out, &pretty(&v))
        }
        Cmd::Fold { from, to } => {
            let (a, b) = (read_graph(from)?, read_graph(to)?);
            check_rank(g, a.rank())?;
            let path = fold_path(&a, &b)?;
            emit(&g.out, &PathJson::new(&a, &b, &path)?.to_json_string())
        }
        Cmd::Query { path, time, class } => {
            let (_, fp) = read_path(path)?;
            let t = match time.strip_prefix("s=") {
                Some(s) => Time::Natural(parse_q(s)?),
                None => Time::Arclength(time.parse().with_context(|| format!("bad time {time:?}"))?),
            };
            let p = fp.graph_at(&t)?;
            let graph = p.graph.normalize();
            let gates: Vec<Vec<Vec<i64>>> = p
                .gates
                .gates
                .iter()
                .map(|gs| gs.iter().map(|gate| gate.iter().map(|&d| signed_id(d)).collect()).collect())
                .collect();
            let mut v = json!({
                "natural": fmt_q(&p.natural),
                "arclength": p.arclength,
                "volume": fmt_q(&fp.volume_at(&p.natural)?),
                "illegality": p.gates.illegality(),
                "graph": graph.to_json(),
                "gates": gates,
            });
            if let Some(c) = class {
                let z = CyclicWord::parse(c)?;
                let len = graph.loop_length(&z)?;
                v["class"] = json!({
                    "word": z,
                    "normalized_length": fmt_q(&len),
                    "formula": fp.length_formula(&z, p.arclength)?,
                });
            }
            emit(&g.out, &pretty(&v))
        }
        Cmd::Whitehead { op, word, graph } => {
            let z = CyclicWord::parse(word)?;
            let rank = g.rank.unwrap_or(2);
            let v = match op {
                WhiteheadOp::Minimize => {
                    let (min, moves) = whitehead_minimize(&z, rank);
                    json!({ "word": z, "minimal": min, "moves": moves })
                }
                WhiteheadOp::Primitive => {
                    let (min, moves) = whitehead_minimize(&z, rank);
                    json!({ "word": z, "primitive": is_primitive(&z, rank), "minimal": min, "moves": moves })
                }
                WhiteheadOp::Simple => {
                    let cert = is_simple(&z, rank)?;
                    json!({ "word": z, "simple": cert.is_simple(), "verified": cert.verify(&z, rank), "certificate": cert })
                }
                WhiteheadOp::SurfaceRelation => {
                    let h = match graph {
                        Some(p) => read_graph(p)?,
                        None => MarkedGraph::rose(&vec![osk_core::Q::from_integer(1.into()); rank])?,
                    };
                    json!({ "word": z, "surface_relation": is_surface_relation(&z, &h)? })
                }
            };
            emit(&g.out, &pretty(&v))
        }
        Cmd::Ffdist { a, b } => {
            check_rank(g, 2)?;
            let (fa, fb) = (FreeFactor::parse(a, 2)?, FreeFactor::parse(b, 2)?);
            let d = farey_distance(&fa, &fb)?;
            let slopes = farey_path(slope_of(&fa)?, slope_of(&fb)?)?;
            let mut factors = vec![fa];
            for s in &slopes[1..slopes.len() - 1] {
                factors.push(FreeFactor::new(vec![primitive_of(*s)?], 2)?);
            }
            if slopes.len() > 1 {
                factors.push(fb);
            }
            let path = FactorPath::through(factors)?;
            path.verify()?;
            let v = json!({ "distance": d, "exact": true, "slopes": slopes, "path": path });
            emit(&g.out, &pretty(&v))
        }
        Cmd::Ffbound { factor, graph } => {
            let h = read_graph(graph)?;
            check_rank(g, h.rank())?;
            let f = FreeFactor::parse(factor, h.rank())?;
            let b = distance_bound_factor_to_graph(&f, &h)?;
            b.path.verify()?;
            let v = json!({
                "upper_bound": b.path.len(),
                "theoretical_bound": b.bound,
                "certified": true,
                "detail": b,
            });
            emit(&g.out, &pretty(&v))
        }
        Cmd::Project { path, factor } => {
            let (_, fp) = read_path(path)?;
            check_rank(g, fp.rank())?;
            let f = FreeFactor::parse(factor, fp.rank())?;
            let r = projection(&Subject::Factor(f), &fp)?;
            let at_lt = project(&r.left)?;
            let v = json!({
                "lt": r.lt,
                "rt": r.rt,
                "lt_natural": fmt_q(&r.lt_natural),
                "rt_natural": fmt_q(&r.rt_natural),
                "path_length": fp.length(),
                "witnesses": { "left": witness(&r.left_witness), "right": witness(&r.right_witness) },
                "factors-at-lt": at_lt,
            });
            emit(&g.out, &pretty(&v))
        }
        Cmd::Experiment { name, params, max_word_len, depth, max_len, points, summary } => {
            let cfg = ExperimentConfig {
                rank: g.rank.unwrap_or(2),
                trials: g.trials,
                seed: g.seed,
                max_word_len: *max_word_len,
                depth: *depth,
                max_len: *max_len,
                points: *points,
                params: params.clone(),
            };
            let records = run(name.experiment(), &cfg)?;
            let mut buf = Vec::new();
            write_csv(&records, &mut buf)?;
            match &g.out {
                Some(p) => fs::write(p, &buf).with_context(|| format!("writing {}", p.display()))?,
                None => std::io::stdout().lock().write_all(&buf)?,
            }
            if let Some(p) = summary {
                let mut sbuf = Vec::new();
                write_summary_csv(&summarize(&records), &mut sbuf)?;
                fs::write(p, &sbuf).with_context(|| format!("writing {}", p.display()))?;
            }
            let bad = records.iter().filter(|r| !r.consistent).count();
            if bad > 0 {
                eprintln!("{bad} of {} records failed their consistency checks", records.len());
            }
            Ok(())
        }
    }
}
