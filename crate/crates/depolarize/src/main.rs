use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use depolarize::dynamics::{
    complete_graph_floor, equilibrium_opinions, opinion_assortativity, polarization,
    polarization_bounds, OpinionProfile,
};
use depolarize::error::{Error, Result};
use depolarize::generators::{self, GraphModel, OpinionModel};
use depolarize::graph::{Graph, HMode};
use depolarize::io::{
    drop_isolated, read_edge_list, read_opinions, write_edge_list, write_json, write_opinions,
    write_trajectory_csv, ExperimentSummary, MetricSnapshot,
};
use depolarize::planner::{run_budgeted, CandidateMode, Heuristic};
use depolarize::spectral::{spectral_gap, worst_case_polarization};

/// Opinion-dynamics metrics and greedy polarization-reducing interventions.
#[derive(Parser)]
#[command(name = "depolarize", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the budgeted greedy planner and write trajectories + summary.
    Run(RunArgs),
    /// Generate a synthetic graph and opinion profile.
    Generate(GenerateArgs),
    /// Print metrics for a graph/opinions pair as JSON.
    Metrics(MetricsArgs),
    /// Drop isolated vertices and reindex.
    Preprocess(PreprocessArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Edge-list file to ingest.
    #[arg(long, conflicts_with = "generate")]
    graph: Option<PathBuf>,
    /// Generator spec `er:N:P`, `sbm:N:P_IN:Q_OUT`, or `pa:N:M`.
    #[arg(long, required_unless_present = "graph")]
    generate: Option<String>,
    /// Opinions file (one value in [0, 1] per line).
    #[arg(long, conflicts_with = "opinion_model")]
    opinions: Option<PathBuf>,
    /// Opinion sampler `uniform` or `beta:A1:B1:A2:B2`.
    #[arg(long)]
    opinion_model: Option<String>,
    /// Heuristic to run (repeatable): random, ds, cd, fd. Default: all four.
    #[arg(long = "heuristic")]
    heuristics: Vec<String>,
    /// Number of pairs to saturate, or `half_n` for floor(n / 2).
    #[arg(long, default_value = "half_n")]
    budget: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "w-max", default_value_t = 1.0)]
    w_max: f64,
    /// Candidate set: `nonedges` (strict non-edges) or `all` (non-saturated).
    #[arg(long, default_value = "nonedges")]
    candidates: String,
    /// Isoperimetric mode for reported bounds: exact, sweep, or auto.
    #[arg(long = "h-mode", default_value = "auto")]
    h_mode: String,
    /// Adversarial radius R for the worst-case polarization report.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec `er:N:P`, `sbm:N:P_IN:Q_OUT`, or `pa:N:M`.
    #[arg(long)]
    model: String,
    /// Opinion sampler `uniform` or `beta:A1:B1:A2:B2`.
    #[arg(long, default_value = "uniform")]
    opinion_model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (writes graph.edges, opinions.txt, generator.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    opinions: PathBuf,
    #[arg(long = "w-max", default_value_t = 1.0)]
    w_max: f64,
    #[arg(long = "h-mode", default_value = "auto")]
    h_mode: String,
    /// Adversarial radius R.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    opinions: Option<PathBuf>,
    #[arg(long = "w-max", default_value_t = 1.0)]
    w_max: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Preprocess(args) => cmd_preprocess(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

/// 2 = configuration error, 3 = I/O error, 4 = numeric failure.
fn exit_status(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_)
        | Error::OpinionsRequired(_)
        | Error::ExactSizeLimit { .. }
        | Error::TooFewVertices { .. }
        | Error::IndexOutOfRange { .. }
        | Error::SelfLoop(_)
        | Error::WeightOutOfRange { .. }
        | Error::NonPositiveDelta(_)
        | Error::SaturationOverflow { .. }
        | Error::InvalidSubset
        | Error::NotTwins { .. } => 2,
        Error::Io(_) | Error::Parse { .. } | Error::DimensionMismatch { .. } => 3,
        Error::SolveFailure | Error::ZeroVolume | Error::NoEdges => 4,
    }
}

fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("DEPOLARIZE_THREADS") {
        if let Ok(threads) = v.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn parse_model(spec: &str) -> Result<GraphModel> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidConfig(format!("bad generator spec `{spec}`"));
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| bad()) };
    let int = |s: &str| -> Result<usize> { s.parse().map_err(|_| bad()) };
    match parts.as_slice() {
        ["er", n, p] => Ok(GraphModel::ErdosRenyi {
            n: int(n)?,
            p: num(p)?,
        }),
        ["sbm", n, p_in, q_out] => Ok(GraphModel::SbmTwoBlock {
            n: int(n)?,
            p_in: num(p_in)?,
            q_out: num(q_out)?,
        }),
        ["pa", n, m] => Ok(GraphModel::PreferentialAttachment {
            n: int(n)?,
            m: int(m)?,
        }),
        _ => Err(bad()),
    }
}

fn parse_opinion_model(spec: &str) -> Result<OpinionModel> {
    let bad = || Error::InvalidConfig(format!("bad opinion model `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["uniform"] => Ok(OpinionModel::Uniform01),
        ["beta"] => Ok(OpinionModel::BetaByBlock {
            a1: 1.0,
            b1: 5.0,
            a2: 5.0,
            b2: 1.0,
        }),
        ["beta", a1, b1, a2, b2] => {
            let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| bad()) };
            Ok(OpinionModel::BetaByBlock {
                a1: num(a1)?,
                b1: num(b1)?,
                a2: num(a2)?,
                b2: num(b2)?,
            })
        }
        _ => Err(bad()),
    }
}

fn resolve_h_mode(spec: &str, n: usize) -> Result<HMode> {
    match spec {
        "auto" => Ok(if n <= 20 { HMode::Exact } else { HMode::Sweep }),
        other => other.parse(),
    }
}

fn resolve_budget(spec: &str, n: usize) -> Result<usize> {
    match spec {
        "half_n" => Ok(n / 2),
        other => other
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad budget `{other}`"))),
    }
}

fn snapshot(g: &Graph, s: &OpinionProfile) -> Result<MetricSnapshot> {
    let z = equilibrium_opinions(g, s)?;
    let assortativity = if g.edge_count() == 0 {
        None
    } else {
        opinion_assortativity(g, s)?
    };
    Ok(MetricSnapshot {
        polarization: polarization(&z),
        spectral_gap: spectral_gap(g)?,
        assortativity,
    })
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (graph, generated_opinions) = match (&args.graph, &args.generate) {
        (Some(path), None) => (read_edge_list(path, args.w_max, None)?, None),
        (None, Some(spec)) => {
            let model = parse_model(spec)?;
            let opinion_model = match &args.opinion_model {
                Some(spec) => parse_opinion_model(spec)?,
                None => OpinionModel::Uniform01,
            };
            let (g, s) = generators::generate(&model, &opinion_model, &mut rng)?;
            (g, Some(s))
        }
        _ => {
            return Err(Error::InvalidConfig(
                "exactly one of --graph and --generate is required".into(),
            ))
        }
    };
    let opinions = match (&args.opinions, generated_opinions) {
        (Some(path), _) => read_opinions(path, graph.vertex_count())?,
        (None, Some(s)) => s,
        (None, None) => match &args.opinion_model {
            Some(spec) => {
                let model = parse_opinion_model(spec)?;
                generators::generate_opinions_only(&model, graph.vertex_count(), &mut rng)?
            }
            None => {
                return Err(Error::InvalidConfig(
                    "ingested graphs need --opinions or --opinion-model".into(),
                ))
            }
        },
    };

    let heuristics: Vec<Heuristic> = if args.heuristics.is_empty() {
        Heuristic::ALL.to_vec()
    } else {
        args.heuristics
            .iter()
            .map(|h| h.parse())
            .collect::<Result<_>>()?
    };
    let mode: CandidateMode = args.candidates.parse()?;
    let budget = resolve_budget(&args.budget, graph.vertex_count())?;

    std::fs::create_dir_all(&args.out)?;
    let initial = snapshot(&graph, &opinions)?;
    let mut finals = std::collections::BTreeMap::new();
    for h in &heuristics {
        let mut run_rng = ChaCha8Rng::seed_from_u64(args.seed);
        let (steps, _) = run_budgeted(&graph, &opinions, *h, budget, mode, &mut run_rng)?;
        let last = steps.last().map_or_else(
            || initial.clone(),
            |st| MetricSnapshot {
                polarization: st.polarization_after,
                spectral_gap: st.spectral_gap_after,
                assortativity: st.assortativity_after,
            },
        );
        finals.insert(h.name().to_string(), last);
        write_trajectory_csv(
            &args.out.join(format!("{}_trajectory.csv", h.name())),
            initial.polarization,
            initial.spectral_gap,
            initial.assortativity,
            &steps,
        )?;
    }
    let summary = ExperimentSummary {
        n: graph.vertex_count(),
        m: graph.edge_count(),
        budget,
        seed: args.seed,
        complete_graph_floor: complete_graph_floor(&opinions, graph.w_max()),
        worst_case_polarization: worst_case_polarization(spectral_gap(&graph)?, args.radius),
        initial,
        r#final: finals,
    };
    write_json(&summary, &args.out.join("summary.json"))?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let model = parse_model(&args.model)?;
    let opinion_model = parse_opinion_model(&args.opinion_model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (g, s) = generators::generate(&model, &opinion_model, &mut rng)?;
    std::fs::create_dir_all(&args.out)?;
    write_edge_list(&g, &args.out.join("graph.edges"))?;
    write_opinions(&s, &args.out.join("opinions.txt"))?;
    let sidecar = json!({
        "model": model,
        "opinions": opinion_model,
        "seed": args.seed,
        "n": g.vertex_count(),
        "m": g.edge_count(),
        "block_split": match model {
            GraphModel::SbmTwoBlock { n, .. } => Some(generators::block_split(n)),
            _ => None,
        },
    });
    write_json(&sidecar, &args.out.join("generator.json"))?;
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let g = read_edge_list(&args.graph, args.w_max, None)?;
    let s = read_opinions(&args.opinions, g.vertex_count())?;
    let h_mode = resolve_h_mode(&args.h_mode, g.vertex_count())?;
    let snap = snapshot(&g, &s)?;
    let bounds = polarization_bounds(&g, &s, h_mode)?;
    let report = json!({
        "n": g.vertex_count(),
        "m": g.edge_count(),
        "polarization": snap.polarization,
        "spectral_gap": snap.spectral_gap,
        "assortativity": snap.assortativity,
        "complete_graph_floor": complete_graph_floor(&s, g.w_max()),
        "worst_case_polarization": worst_case_polarization(snap.spectral_gap, args.radius),
        "bounds": {
            "lower": bounds.lower,
            "upper": bounds.upper,
            "h_mode": match h_mode { HMode::Exact => "exact", HMode::Sweep => "sweep" },
        },
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
    Ok(())
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<()> {
    let g = read_edge_list(&args.graph, args.w_max, None)?;
    let s = match &args.opinions {
        Some(path) => Some(read_opinions(path, g.vertex_count())?),
        None => None,
    };
    let out = drop_isolated(&g, s.as_ref())?;
    std::fs::create_dir_all(&args.out)?;
    write_edge_list(&out.graph, &args.out.join("graph.edges"))?;
    if let Some(kept) = &out.opinions {
        write_opinions(kept, &args.out.join("opinions.txt"))?;
    }
    let mapping = json!({
        "removed": out.removed,
        "mapping": out.mapping,
        "n_before": g.vertex_count(),
        "n_after": out.graph.vertex_count(),
    });
    write_json(&mapping, &args.out.join("mapping.json"))?;
    eprintln!(
        "removed {} isolated vertices; {} remain",
        out.removed.len(),
        out.graph.vertex_count()
    );
    Ok(())
}
