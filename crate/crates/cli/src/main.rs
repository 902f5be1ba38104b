use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcnet::dcmm::{sample_graph_with, stream_rng, validate, OmegaPolicy};
use gcnet::graph::{load_edge_list, to_edge_list};
use gcnet::harness::commands::{all_failed, cmd_count, cmd_test_files, rows_to_csv};
use gcnet::harness::experiments::{normality, power_table};
use gcnet::harness::football::{analyze, compare_with_reference, load_football, locate_dataset, FOOTBALL_ENV};
use gcnet::harness::reference::{POWER_NORMS, POWER_SETTINGS};
use gcnet::harness::ExperimentConfig;
use gcnet::params_file::ParamsFile;
use gcnet::power::{block_closed_forms, predicted_power, PopulationMode, PowerReport};
use gcnet::GcError;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_MODEL: u8 = 3;

/// Graphlet Count tests for community structure in networks.
#[derive(Parser)]
#[command(name = "gcnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Strict,
    Clip,
}

impl From<Policy> for OmegaPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Strict => OmegaPolicy::Strict,
            Policy::Clip => OmegaPolicy::Clip,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Population {
    Exact,
    Proxy,
}

#[derive(Args)]
struct Output {
    /// Write to this file (directory for `experiment normality`) instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct MonteCarlo {
    #[arg(long, default_value_t = 20180710)]
    seed: u64,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_REPLICATES)]
    replicates: u64,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_ALPHA)]
    alpha: f64,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    workers: Option<usize>,
    /// Handling of edge probabilities above 1
    #[arg(long, value_enum, default_value = "clip")]
    omega_policy: Policy,
}

impl MonteCarlo {
    fn config(&self, name: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(name, self.seed);
        c.replicates = self.replicates;
        c.alpha = self.alpha;
        c.workers = self.workers;
        c.omega_policy = self.omega_policy.into();
        c
    }
}

#[derive(Subcommand)]
enum Command {
    /// Path and cycle densities of an edge list
    Count {
        edges: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// GC test on an edge list and, optionally, on each group's induced subgraph
    Test {
        edges: PathBuf,
        /// Lines of `group_name node_name`
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "3,4")]
        m: Vec<u32>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Sample one graph from a DCMM parameter file and write it as an edge list
    Simulate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "strict")]
        omega_policy: Policy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power proxies: for a parameter file, or closed forms over a grid of b and ||theta||
    Power {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "proxy")]
        population: Population,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.25)]
        a: f64,
        /// Grid of b as start:stop:step
        #[arg(long, default_value = "0:1:0.05")]
        b: String,
        #[arg(long, value_delimiter = ',', default_value = "5,6,7,8,9,10")]
        norms: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Reproducible simulation experiments and the football analysis
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Experiment {
    /// Null (and alternative) score distributions with histogram and curve data
    Normality {
        #[command(flatten)]
        mc: MonteCarlo,
        /// Skip the alternative model
        #[arg(long)]
        null_only: bool,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Rejection rates over (a, b) settings and ||theta||
    PowerTable {
        #[command(flatten)]
        mc: MonteCarlo,
        /// Settings as a:b pairs
        #[arg(long, value_delimiter = ',')]
        settings: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        norms: Option<Vec<f64>>,
        #[command(flatten)]
        output: Output,
    },
    /// Per-conference tests on the college football network
    Football {
        /// Path of football.gml (default: $GCNET_FOOTBALL_GML or data/football.gml)
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Usage(String),
    Gc(GcError),
}

impl From<GcError> for Failure {
    fn from(e: GcError) -> Self {
        Failure::Gc(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Gc(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Gc(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Gc(GcError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn count(edges: &Path, output: &Output) -> Outcome {
    let record = cmd_count(&load_edge_list(&read(edges)?)?)?;
    let text = match output.format {
        Format::Json => json(&record)?,
        Format::Csv => {
            let d = &record.densities;
            let c = &record.numerators;
            let f = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
            format!(
                "n,edges,L1,L2,L3,C3,C4,paths1,paths2,paths3,cycles3,cycles4,seconds\n{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                record.n, record.edges, f(d.l1), f(d.l2), f(d.l3), f(d.c3), f(d.c4),
                c.paths1, c.paths2, c.paths3, c.cycles3, c.cycles4, record.seconds
            )
        }
    };
    emit(&output.out, &text)
}

fn test(edges: &Path, groups: Option<&Path>, m: &[u32], alpha: f64, output: &Output) -> Outcome {
    let rows = cmd_test_files(edges, groups, m, alpha)?;
    for row in rows.iter().filter(|r| r.error.is_some()) {
        log::warn!("{} (m={}): {}", row.graph, row.m, row.error.as_deref().unwrap_or(""));
    }
    let text = match output.format {
        Format::Json => json(&rows)?,
        Format::Csv => rows_to_csv(&rows),
    };
    emit(&output.out, &text)?;
    if all_failed(&rows) {
        return Err(Failure::Gc(GcError::Argument("every test failed".into())));
    }
    Ok(())
}

fn simulate(params: &Path, seed: u64, policy: Policy, out: &Option<PathBuf>) -> Outcome {
    let params = ParamsFile::from_json(&read(params)?)?.resolve()?;
    for w in validate(&params).warnings {
        log::warn!("{w}");
    }
    let mut rng = stream_rng(seed, 0);
    let sample = sample_graph_with(&params, &mut rng, policy.into())?;
    if sample.clipped_pairs > 0 {
        log::warn!("{} edge probabilities above 1 were clipped", sample.clipped_pairs);
    }
    emit(out, &to_edge_list(&sample.graph, None))
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("invalid grid {spec:?}, expected start:stop:step")))?;
    let [start, stop, step] = parts[..] else {
        return Err(Failure::Usage(format!("invalid grid {spec:?}, expected start:stop:step")));
    };
    if !(step > 0.0) || stop < start {
        return Err(Failure::Usage(format!("invalid grid {spec:?}")));
    }
    let steps = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| start + step * i as f64).collect())
}

#[allow(clippy::too_many_arguments)]
fn power(
    params: Option<&Path>,
    population: Population,
    k: usize,
    a: f64,
    b: &str,
    norms: &[f64],
    alpha: f64,
    output: &Output,
) -> Outcome {
    if let Some(path) = params {
        let params = ParamsFile::from_json(&read(path)?)?.resolve()?;
        let mode = match population {
            Population::Exact => PopulationMode::Exact,
            Population::Proxy => PopulationMode::Proxy,
        };
        let report = PowerReport::new(&params, alpha, mode)?;
        return emit(&output.out, &json(&report)?);
    }
    let mut rows = Vec::new();
    for b in parse_grid(b)? {
        for &h in norms {
            let c = block_closed_forms(k, a, b, h)?;
            rows.push(serde_json::json!({
                "K": k, "a": a, "b": b, "theta_norm": h,
                "delta3": c.delta3, "delta4": c.delta4,
                "power3": predicted_power(c.delta3, alpha)?,
                "power4": predicted_power(c.delta4, alpha)?,
                "b_star": c.b_star,
            }));
        }
    }
    let text = match output.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = String::from("K,a,b,theta_norm,delta3,delta4,power3,power4,b_star\n");
            for r in &rows {
                let keys = ["K", "a", "b", "theta_norm", "delta3", "delta4", "power3", "power4", "b_star"];
                let fields: Vec<String> = keys.iter().map(|k| r[k].to_string()).collect();
                s.push_str(&fields.join(","));
                s.push('\n');
            }
            s
        }
    };
    emit(&output.out, &text)
}

fn experiment(e: &Experiment) -> Outcome {
    match e {
        Experiment::Normality { mc, null_only, bins, output } => {
            let report = normality(&mc.config("normality"), !null_only)?;
            match &output.out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("normality.json"), json(&report)?)?;
                    fs::write(dir.join("histogram.csv"), report.histogram_csv(*bins))?;
                    fs::write(dir.join("curves.csv"), report.curves_csv(201))?;
                    Ok(())
                }
                None => match output.format {
                    Format::Json => emit(&None, &json(&report)?),
                    Format::Csv => emit(&None, &report.histogram_csv(*bins)),
                },
            }
        }
        Experiment::PowerTable { mc, settings, norms, output } => {
            let settings = match settings {
                Some(list) => list
                    .iter()
                    .map(|s| {
                        let (a, b) = s.split_once(':').ok_or_else(|| Failure::Usage(format!("setting {s:?} is not a:b")))?;
                        let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("invalid setting {s:?}")));
                        Ok((parse(a)?, parse(b)?))
                    })
                    .collect::<Result<Vec<_>, Failure>>()?,
                None => POWER_SETTINGS.to_vec(),
            };
            let norms = norms.clone().unwrap_or_else(|| POWER_NORMS.to_vec());
            let table = power_table(&mc.config("power-table"), &settings, &norms)?;
            let text = match output.format {
                Format::Json => json(&table)?,
                Format::Csv => table.to_csv(),
            };
            emit(&output.out, &text)
        }
        Experiment::Football { data, alpha, output } => {
            let path = data.clone().or_else(locate_dataset).ok_or_else(|| {
                Failure::Gc(GcError::Argument(format!(
                    "football.gml not found; pass --data or set {FOOTBALL_ENV}"
                )))
            })?;
            let data = load_football(&path)?;
            let report = analyze(&data, *alpha)?;
            let discrepancies = compare_with_reference(&report, 0.05, 0.02);
            log::info!("dataset sha256 {}", data.sha256);
            for d in &discrepancies {
                log::warn!(
                    "{} {}: published {:.2}, computed {:.4}",
                    d.conference, d.quantity, d.expected, d.observed
                );
            }
            let text = match output.format {
                Format::Json => json(&serde_json::json!({ "report": report, "discrepancies": discrepancies }))?,
                Format::Csv => report.to_table_csv(),
            };
            emit(&output.out, &text)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Count { edges, output } => count(edges, output),
        Command::Test { edges, groups, m, alpha, output } => test(edges, groups.as_deref(), m, *alpha, output),
        Command::Simulate { params, seed, omega_policy, out } => simulate(params, *seed, *omega_policy, out),
        Command::Power { params, population, k, a, b, norms, alpha, output } => {
            power(params.as_deref(), *population, *k, *a, b, norms, *alpha, output)
        }
        Command::Experiment(e) => experiment(e),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Gc(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_model_error() { EXIT_MODEL } else { EXIT_DATA })
        }
    }
}
