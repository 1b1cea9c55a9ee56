use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use covergff::eulerian::{
    best_circuit_count, brute_force_circuits, conditioned_path_distribution, parse_weights, path_count,
    random_eulerian_law, EulerianMultigraph, DEFAULT_EDGE_CAP, DEFAULT_TRAVERSE_CAP,
};
use covergff::experiments::estimator::{estimate_cover_time, EstimatorConfig};
use covergff::experiments::{run_experiment, ExperimentConfig};
use covergff::fmt::{g17, to_json_string};
use covergff::gff::{detection_experiment, estimate_sup, write_samples_csv, GffSampler};
use covergff::isomorphism::{baby_iso_check, ray_knight_two_sample, LAPLACE_LAMBDAS};
use covergff::spectral::{effective_resistance, hitting_time, hitting_time_matrix, laplacian, reduce_network, resistance_matrix};
use covergff::tree::tree_concentration_experiment;
use covergff::walk::{cover_time_runs, inverse_local_time_runs, Backend};
use covergff::{load_network, Error, Network, Result};

#[derive(Parser)]
#[command(name = "covergff", version, about = "Cover times through the Gaussian free field")]
struct Cli {
    /// Network edge list (`u v c` per line).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Root vertex v0.
    #[arg(long, global = true, default_value_t = 0)]
    root: usize,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixKind {
    Laplacian,
    Resistance,
    Hitting,
}

#[derive(Subcommand)]
enum Command {
    /// Effective resistance between two vertices.
    Resistance { u: usize, v: usize },
    /// Expected hitting time of `v` from `u`.
    Hitting { u: usize, v: usize },
    /// Schur complement onto the kept vertices, as an edge list in JSON.
    Reduce {
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<usize>,
    },
    /// Dense matrix as CSV.
    Matrix {
        #[arg(long, value_enum)]
        kind: MatrixKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// GFF samples as CSV, one row per sample.
    GffSample {
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean and median of the GFF supremum.
    GffSup {
        #[arg(long, default_value_t = 10_000)]
        count: usize,
    },
    /// Detection-window experiment at the median of the supremum.
    GffDetect {
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
    },
    /// Per-run cover times as CSV.
    WalkCover {
        #[arg(long)]
        start: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-run inverse local times as CSV.
    WalkIlt {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        /// Append the local-time vector to each row.
        #[arg(long)]
        local_times: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-sample check of the Ray-Knight identity.
    VerifyRayKnight {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
    },
    /// Laplace-transform check of the one-vertex identity.
    VerifyBabyIso {
        #[arg(long)]
        ell: f64,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
    },
    /// Pathwise domination of the tree coupling.
    VerifyCoupling {
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
    },
    /// Cover-time concentration on a unit tree; tails also as CSV.
    TreeConcentration {
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 10_000)]
        gff_samples: usize,
        #[arg(long)]
        tails_out: Option<PathBuf>,
    },
    /// Cover-time estimate `|E| (E sup η)²` with its gate diagnostics.
    Estimate {
        #[arg(long, default_value_t = 10_000)]
        gff_samples: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Simulated cover runs for comparison (0 skips).
        #[arg(long, default_value_t = 0)]
        cover_runs: usize,
        #[arg(long)]
        start: Option<usize>,
    },
    /// BEST count, arborescences and path count of a multigraph (`u v j`).
    EulerianCount {
        multigraph: PathBuf,
        /// Also enumerate circuits by brute force.
        #[arg(long)]
        brute: bool,
    },
    /// Exact law of the embedded path given local times.
    PathDist {
        /// File with one local time per vertex, whitespace separated.
        #[arg(long)]
        ltimes: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TRAVERSE_CAP)]
        cap: usize,
    },
    /// Exact law of the random Eulerian graph and draws from it.
    RandomEulerian {
        /// Weights `u v w` per line.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 6)]
        cap: u32,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Runs a suite from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn network(cli: &Cli, path: Option<&PathBuf>) -> Result<Network> {
    let path = path
        .or(cli.graph.as_ref())
        .ok_or_else(|| Error::InvalidArgument("--graph is required".into()))?;
    load_network(&read(path)?, cli.root)
}

fn emit<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", to_json_string(value)?)?;
    Ok(out.flush()?)
}

fn sink(out: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn write_matrix(out: &mut dyn Write, m: &nalgebra::DMatrix<f64>) -> io::Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| g17(m[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EulerianSummary {
    vertices: usize,
    edges: u32,
    arborescences: String,
    circuits: String,
    circuits_from_root: String,
    path_count: String,
    brute_force_circuits: Option<String>,
}

#[derive(Serialize)]
struct RandomEulerianOutput {
    law: covergff::eulerian::RandomEulerianLaw,
    /// `(u, v, j)` triples of each draw.
    draws: Vec<Vec<(usize, usize, u32)>>,
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Resistance { u, v } => {
            let net = network(cli, None)?;
            emit(&serde_json::json!({ "u": u, "v": v, "resistance": effective_resistance(&net, *u, *v)? }))
        }
        Command::Hitting { u, v } => {
            let net = network(cli, None)?;
            emit(&serde_json::json!({ "u": u, "v": v, "hitting_time": hitting_time(&net, *u, *v)? }))
        }
        Command::Reduce { keep } => {
            let net = network(cli, None)?;
            let r = reduce_network(&net, keep)?;
            let edges: Vec<_> = r.edges().into_iter().map(|(a, b, c)| serde_json::json!([keep[a], keep[b], c])).collect();
            emit(&serde_json::json!({ "keep": keep, "root": keep[r.root()], "edges": edges }))
        }
        Command::Matrix { kind, out } => {
            let net = network(cli, None)?;
            let m = match kind {
                MatrixKind::Laplacian => laplacian(&net),
                MatrixKind::Resistance => resistance_matrix(&net)?,
                MatrixKind::Hitting => hitting_time_matrix(&net)?,
            };
            let mut w = sink(out.as_ref())?;
            write_matrix(&mut w, &m)?;
            Ok(w.flush()?)
        }
        Command::GffSample { count, out } => {
            let net = network(cli, None)?;
            let samples = GffSampler::for_network(&net)?.sample_many(*count, cli.seed);
            let mut w = sink(out.as_ref())?;
            write_samples_csv(&mut w, &samples)?;
            Ok(w.flush()?)
        }
        Command::GffSup { count } => emit(&estimate_sup(&network(cli, None)?, *count, cli.seed)?),
        Command::GffDetect { epsilon, count } => emit(&detection_experiment(&network(cli, None)?, *epsilon, *count, cli.seed)?),
        Command::WalkCover { start, runs, out } => {
            let net = network(cli, None)?;
            let rows = cover_time_runs(&net, start.unwrap_or(net.root()), *runs, cli.seed)?;
            let mut w = sink(out.as_ref())?;
            writeln!(w, "run,cover_time,cover_and_return")?;
            for (i, (c, r)) in rows.iter().enumerate() {
                writeln!(w, "{i},{},{}", g17(*c), g17(*r))?;
            }
            Ok(w.flush()?)
        }
        Command::WalkIlt { t, runs, local_times, out } => {
            let net = network(cli, None)?;
            let rows = inverse_local_time_runs(&net, *t, *runs, Backend::Excursion, cli.seed)?;
            let mut w = sink(out.as_ref())?;
            write!(w, "run,tau,excursions")?;
            if *local_times {
                for v in 0..net.vertex_count() {
                    write!(w, ",L{v}")?;
                }
            }
            writeln!(w)?;
            for (i, r) in rows.iter().enumerate() {
                write!(w, "{i},{},{}", g17(r.total_time), r.excursion_count)?;
                if *local_times {
                    for l in &r.local_times {
                        write!(w, ",{}", g17(*l))?;
                    }
                }
                writeln!(w)?;
            }
            Ok(w.flush()?)
        }
        Command::VerifyRayKnight { t, count } => emit(&ray_knight_two_sample(&network(cli, None)?, *t, *count, cli.seed)?),
        Command::VerifyBabyIso { ell, count } => {
            let mut lambdas = LAPLACE_LAMBDAS.to_vec();
            lambdas.push(2.0);
            emit(&baby_iso_check(*ell, &lambdas, *count, cli.seed)?)
        }
        Command::VerifyCoupling { tree, t, count } => {
            let net = network(cli, tree.as_ref())?;
            emit(&covergff::experiments::checks::coupling_check(&net, *t, *count, cli.seed)?)
        }
        Command::TreeConcentration { runs, gff_samples, tails_out } => {
            let r = tree_concentration_experiment(&network(cli, None)?, *runs, *gff_samples, cli.seed)?;
            if let Some(p) = tails_out {
                let mut w = sink(Some(p))?;
                writeln!(w, "kind,lambda,probability")?;
                for (kind, tails) in [("estimate", &r.tails), ("normalized", &r.normalized_tails)] {
                    for tp in tails {
                        writeln!(w, "{kind},{},{}", g17(tp.lambda), g17(tp.probability))?;
                    }
                }
                w.flush()?;
            }
            emit(&r)
        }
        Command::Estimate { gff_samples, epsilon, cover_runs, start } => {
            let cfg = EstimatorConfig {
                gff_samples: *gff_samples,
                epsilon: *epsilon,
                cover_runs: *cover_runs,
                start: *start,
                seed: cli.seed,
            };
            let est = estimate_cover_time(&network(cli, None)?, &cfg)?;
            for w in &est.warnings {
                eprintln!("warning: {w}");
            }
            emit(&est)
        }
        Command::EulerianCount { multigraph, brute } => {
            let g = EulerianMultigraph::parse(&read(multigraph)?)?;
            let best = best_circuit_count(&g)?;
            let brute = if *brute {
                Some(brute_force_circuits(&g, DEFAULT_EDGE_CAP)?.to_string())
            } else {
                None
            };
            emit(&EulerianSummary {
                vertices: g.vertex_count(),
                edges: g.total_multiplicity(),
                arborescences: best.arborescences.to_string(),
                circuits: best.circuits.to_string(),
                circuits_from_root: best.circuits_from[cli.root.min(g.vertex_count() - 1)].to_string(),
                path_count: path_count(&g, cli.root)?.to_string(),
                brute_force_circuits: brute,
            })
        }
        Command::PathDist { ltimes, cap } => {
            let net = network(cli, None)?;
            let ell = read(ltimes)?
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad local time `{s}`"))))
                .collect::<Result<Vec<f64>>>()?;
            emit(&conditioned_path_distribution(&net, &ell, *cap)?)
        }
        Command::RandomEulerian { weights, cap, count } => {
            let law = random_eulerian_law(&parse_weights(&read(weights)?)?, *cap)?;
            let draws = law.sample_many(*count, cli.seed).into_iter().map(|i| law.graphs[i].edges()).collect();
            emit(&RandomEulerianOutput { law, draws })
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let o = run_experiment(&cfg)?;
            for r in &o.report.rows {
                eprintln!("{} {} = {}", if r.pass { "pass" } else { "FAIL" }, r.check, g17(r.value));
            }
            emit(&serde_json::json!({
                "suite": o.report.suite,
                "pass": o.report.pass,
                "csv": o.csv_path,
                "json": o.json_path,
                "manifest": o.manifest_path,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
