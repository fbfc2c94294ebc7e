//! `degest`: generate graphs, estimate their average degree, run
//! experiments and check the sampling lemmas empirically.
//!
//! Exit codes: 0 ok, 1 input error, 2 infeasible parameters, 3 estimator
//! failure.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use degest_core::bench::{run_experiment, BenchError, ExperimentSpec};
use degest_core::estimators::{
    all_advice, no_advice, threshold_advice, EstimateError, EstimatorConfig, Sampling,
};
use degest_core::generators::{parse_ratio, FamilySpec, GenError, RatioParam};
use degest_core::graph::Graph;
use degest_core::oracle::QueryOracle;
use degest_core::verify::{lemma_checks, VerifyError, MIN_LEMMA_REPEATS};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

const THREADS_VAR: &str = "DEGEST_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "degest",
    version,
    about = "Sublinear-query average-degree estimation"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GlobalArgs {
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Write gnuplot-compatible `.dat` files for each sweep.
    #[arg(long, global = true)]
    emit_plots: bool,
    /// Output file (generate, estimate, verify) or directory (bench).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic graph as an edge list plus a JSON sidecar.
    Generate(GenerateArgs),
    /// Estimate the average degree of an edge-list graph.
    Estimate(EstimateArgs),
    /// Run a JSON experiment description.
    Bench(BenchArgs),
    /// Check the coin-toss and mean-estimator lemmas at a threshold.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
enum Family {
    CliqueMatching,
    LbPair,
    ForestUnion,
    Er,
    Cycle,
    Complete,
    Circulant,
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long)]
    n: Option<usize>,
    /// Clique size.
    #[arg(long)]
    s: Option<usize>,
    /// Number of cliques.
    #[arg(long)]
    k: Option<usize>,
    /// Target average degree for lb_pair: integer, decimal or `a/b`.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    alpha: Option<u32>,
    /// Edge probability for er.
    #[arg(long)]
    p: Option<f64>,
    /// Vertices carrying edges in a padded forest union.
    #[arg(long)]
    core: Option<usize>,
    /// Circulant offsets, comma separated.
    #[arg(long, value_delimiter = ',')]
    offsets: Vec<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
enum SamplingArg {
    Bulk,
    PerQuery,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    graph: PathBuf,
    /// `no_advice`, `threshold_advice:TAU` or `all_advice:TAU:DTILDE`.
    #[arg(long, default_value = "no_advice")]
    algorithm: String,
    #[arg(long, value_enum, default_value = "bulk")]
    sampling: SamplingArg,
    /// Write every oracle query as JSON lines (implies per-query sampling).
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    spec: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    graph: PathBuf,
    #[arg(long)]
    tau: u64,
    #[arg(long, default_value_t = MIN_LEMMA_REPEATS)]
    repeats: u64,
}

/// A failed command: message plus exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl std::fmt::Display) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }
    fn infeasible(message: impl std::fmt::Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
    fn estimator(message: impl std::fmt::Display) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Graph(_) => Failure::input(e),
            _ => Failure::infeasible(e),
        }
    }
}

impl From<EstimateError> for Failure {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::InvalidConfig(_) | EstimateError::InvalidArgument(_) => {
                Failure::infeasible(e)
            }
            EstimateError::Graph(_) => Failure::input(e),
            _ => Failure::estimator(e),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Estimate(e) => e.into(),
            VerifyError::Generate(e) => e.into(),
            VerifyError::InvalidArgument(_) | VerifyError::InsufficientPoints(_) => {
                Failure::infeasible(e)
            }
            _ => Failure::input(e),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Generate(e) => e.into(),
            BenchError::Verify(e) => e.into(),
            _ => Failure::input(e),
        }
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    parameters: Value,
    seed: u64,
    tool_version: &'static str,
    inputs: Vec<String>,
    outputs: Vec<String>,
    wall_clock_seconds: f64,
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(at: &Path, manifest: &RunManifest<'_>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(at, text).map_err(|e| Failure::input(format!("{}: {e}", at.display())))
}

fn paths(ps: &[&Path]) -> Vec<String> {
    ps.iter().map(|p| p.display().to_string()).collect()
}

fn config(global: &GlobalArgs, sampling: Sampling) -> Result<EstimatorConfig, Failure> {
    let mut cfg = EstimatorConfig::default().with_sampling(sampling);
    if let Some(e) = global.epsilon {
        cfg.epsilon = e;
    }
    if let Some(d) = global.delta {
        cfg.delta = d;
    }
    cfg.validate().map_err(Failure::infeasible)?;
    Ok(cfg)
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let file =
        fs::File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Graph::read_edge_list(BufReader::new(file))
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::input(format!("{family} needs --{flag}")))
}

fn family_spec(a: &GenerateArgs) -> Result<FamilySpec, Failure> {
    let name = serde_json::to_value(a.family).expect("family serializes");
    let name = name.as_str().unwrap_or_default();
    let n = need(a.n, "n", name)?;
    Ok(match a.family {
        Family::CliqueMatching => FamilySpec::CliqueMatching {
            n,
            s: need(a.s, "s", name)?,
            k: need(a.k, "k", name)?,
        },
        Family::LbPair => {
            let d = need(a.d.clone(), "d", name)?;
            if parse_ratio(&d).is_none() {
                return Err(Failure::input(format!(
                    "--d: cannot read {d:?} as a rational"
                )));
            }
            FamilySpec::LbPair {
                n,
                d: RatioParam::Text(d),
                alpha: need(a.alpha, "alpha", name)? as usize,
            }
        }
        Family::ForestUnion => FamilySpec::ForestUnion {
            n,
            alpha: need(a.alpha, "alpha", name)?,
            core: a.core,
        },
        Family::Er => FamilySpec::Er {
            n,
            p: need(a.p, "p", name)?,
        },
        Family::Cycle => FamilySpec::Cycle { n },
        Family::Complete => FamilySpec::Complete { n },
        Family::Circulant => {
            if a.offsets.is_empty() {
                return Err(Failure::input("circulant needs --offsets"));
            }
            FamilySpec::Circulant {
                n,
                offsets: a.offsets.clone(),
            }
        }
    })
}

/// `graph.edges` with label `2k` becomes `graph.2k.edges`.
fn labelled(out: &Path, label: &str) -> PathBuf {
    if label.is_empty() {
        return out.to_path_buf();
    }
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{label}"),
    };
    out.with_file_name(name)
}

fn cmd_generate(global: &GlobalArgs, args: &GenerateArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let spec = family_spec(args)?;
    let seed = global.seed.unwrap_or(0);
    let out = global
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.edges", spec.name())));
    let generated = spec.generate(seed)?;
    let mut outputs = Vec::new();
    for g in &generated {
        let path = labelled(&out, &g.label);
        let mut text = g.graph.to_edge_list_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        fs::write(&path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let sidecar_path = path.with_file_name(format!(
            "{}.json",
            path.file_name().unwrap().to_string_lossy()
        ));
        let mut sidecar = serde_json::to_string_pretty(&g.sidecar).expect("sidecar serializes");
        sidecar.push('\n');
        fs::write(&sidecar_path, sidecar)
            .map_err(|e| Failure::input(format!("{}: {e}", sidecar_path.display())))?;
        eprintln!(
            "wrote {} (n = {}, m = {})",
            path.display(),
            g.graph.n(),
            g.graph.m()
        );
        outputs.push(path);
        outputs.push(sidecar_path);
    }
    let outs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
    write_manifest(
        &manifest_path(&out),
        &RunManifest {
            command: "generate",
            parameters: json!({ "generator": spec }),
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: vec![],
            outputs: paths(&outs),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
    )
}

enum Advice {
    None,
    Threshold(u64),
    Full(u64, Ratio<u128>),
}

fn parse_algorithm(text: &str) -> Result<Advice, Failure> {
    let bad = || {
        Failure::input(format!("unknown algorithm {text:?}: use no_advice, threshold_advice:TAU or all_advice:TAU:DTILDE"))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let tau = |s: &str| s.parse::<u64>().ok().filter(|&t| t >= 1).ok_or_else(bad);
    match parts.as_slice() {
        ["no_advice"] => Ok(Advice::None),
        ["threshold_advice", t] => Ok(Advice::Threshold(tau(t)?)),
        ["all_advice", t, d] => {
            let d = parse_ratio(d).filter(|d| *d.numer() > 0).ok_or_else(bad)?;
            Ok(Advice::Full(
                tau(t)?,
                Ratio::new(*d.numer() as u128, *d.denom() as u128),
            ))
        }
        _ => Err(bad()),
    }
}

fn cmd_estimate(global: &GlobalArgs, args: &EstimateArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let algorithm = parse_algorithm(&args.algorithm)?;
    let sampling = match (args.sampling, &args.transcript) {
        (_, Some(_)) | (SamplingArg::PerQuery, _) => Sampling::PerQuery,
        (SamplingArg::Bulk, None) => Sampling::Bulk,
    };
    let cfg = config(global, sampling)?;
    let graph = read_graph(&args.graph)?;
    let seed = global.seed.unwrap_or(0);
    let mut oracle = QueryOracle::new(&graph, seed);
    if args.transcript.is_some() {
        oracle.record_transcript();
    }
    let result = match algorithm {
        Advice::None => no_advice(&mut oracle, &cfg),
        Advice::Threshold(tau) => threshold_advice(&mut oracle, tau, &cfg, cfg.delta),
        Advice::Full(tau, d) => all_advice(&mut oracle, tau, d, &cfg, cfg.delta),
    };
    let mut outputs = Vec::new();
    if let Some(path) = &args.transcript {
        let f = fs::File::create(path)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        oracle
            .write_transcript(io::BufWriter::new(f))
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        outputs.push(path.clone());
    }
    let estimate = result?;
    let mut text = serde_json::to_string(&estimate).expect("estimate serializes");
    text.push('\n');
    io::stdout()
        .write_all(text.as_bytes())
        .map_err(Failure::input)?;
    if let Some(out) = &global.out {
        fs::write(out, &text).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
        outputs.push(out.clone());
        let outs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
        write_manifest(
            &manifest_path(out),
            &RunManifest {
                command: "estimate",
                parameters: json!({ "algorithm": args.algorithm, "config": cfg }),
                seed,
                tool_version: env!("CARGO_PKG_VERSION"),
                inputs: paths(&[&args.graph]),
                outputs: paths(&outs),
                wall_clock_seconds: started.elapsed().as_secs_f64(),
            },
        )?;
    }
    Ok(())
}

fn cmd_bench(global: &GlobalArgs, args: &BenchArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| Failure::input(format!("{}: {e}", args.spec.display())))?;
    let mut spec = ExperimentSpec::from_json(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", args.spec.display())))?;
    if let Some(seed) = global.seed {
        spec.seed = seed;
    }
    if let Some(t) = global.trials {
        spec.trials = t;
    }
    if let Some(e) = global.epsilon {
        spec.config.epsilon = e;
    }
    if let Some(d) = global.delta {
        spec.config.delta = d;
    }
    spec.validate()?;
    let out_dir = global
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("bench-out"));
    let output = run_experiment(&spec, &out_dir, global.emit_plots)?;
    for b in &output.summary.batches {
        eprintln!(
            "{}: {}/{} within (1±{}), mean degree queries {:.3e}, mean tau {:.2}",
            b.instance_id,
            b.success_count,
            b.trials,
            b.epsilon,
            b.mean_degree_queries(),
            b.mean_tau_used
        );
    }
    for s in &output.summary.sweeps {
        eprintln!(
            "{}: degree exponent {:.3} (log^4-corrected {:.3}), randedge spread {:.2}x",
            s.name,
            s.report.degree_fit.exponent,
            s.report.degree_fit_log4.exponent,
            s.report.rand_edge_spread
        );
    }
    let outs: Vec<&Path> = output.files.iter().map(|p| p.as_path()).collect();
    write_manifest(
        &out_dir.join(format!("{}.manifest.json", spec.name)),
        &RunManifest {
            command: "bench",
            parameters: serde_json::to_value(&spec).expect("spec serializes"),
            seed: spec.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: paths(&[&args.spec]),
            outputs: paths(&outs),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
    )
}

fn cmd_verify(global: &GlobalArgs, args: &VerifyArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let cfg = config(global, Sampling::Bulk)?;
    let graph = read_graph(&args.graph)?;
    let seed = global.seed.unwrap_or(0);
    let report = lemma_checks(&graph, args.tau, args.repeats, seed, &cfg)?;
    let mut stdout = io::stdout().lock();
    let line = |out: &mut dyn Write, s: String| out.write_all(s.as_bytes()).map_err(Failure::input);
    line(
        &mut stdout,
        format!(
            "tau = {}, repeats = {}, rho_L = {}, m_L/n = {}\n",
            report.tau, report.repeats, report.rho_light, report.light_mean
        ),
    )?;
    for c in &report.checks {
        let verdict = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        line(
            &mut stdout,
            format!(
                "{verdict} {}: measured {} vs bound {} ({})\n",
                c.name, c.measured, c.bound, c.detail
            ),
        )?;
    }
    if let Some(out) = &global.out {
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        fs::write(out, text).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
        write_manifest(
            &manifest_path(out),
            &RunManifest {
                command: "verify",
                parameters: json!({ "tau": args.tau, "repeats": args.repeats }),
                seed,
                tool_version: env!("CARGO_PKG_VERSION"),
                inputs: paths(&[&args.graph]),
                outputs: paths(&[out]),
                wall_clock_seconds: started.elapsed().as_secs_f64(),
            },
        )?;
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            Failure::input(format!(
                "{THREADS_VAR} must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(Failure::input)
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Generate(a) => cmd_generate(&cli.global, a),
        Command::Estimate(a) => cmd_estimate(&cli.global, a),
        Command::Bench(a) => cmd_bench(&cli.global, a),
        Command::Verify(a) => cmd_verify(&cli.global, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_strings() {
        assert!(matches!(parse_algorithm("no_advice"), Ok(Advice::None)));
        assert!(matches!(
            parse_algorithm("threshold_advice:8"),
            Ok(Advice::Threshold(8))
        ));
        match parse_algorithm("all_advice:4:3/2") {
            Ok(Advice::Full(4, d)) => assert_eq!(d, Ratio::new(3, 2)),
            _ => panic!("all_advice not parsed"),
        }
        for bad in [
            "",
            "threshold_advice",
            "threshold_advice:0",
            "all_advice:1",
            "all_advice:1:0",
            "other",
        ] {
            assert!(parse_algorithm(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn labelled_paths() {
        assert_eq!(
            labelled(Path::new("a/g.edges"), "2k"),
            PathBuf::from("a/g.2k.edges")
        );
        assert_eq!(labelled(Path::new("g"), "k"), PathBuf::from("g.k"));
        assert_eq!(labelled(Path::new("g.txt"), ""), PathBuf::from("g.txt"));
        assert_eq!(
            manifest_path(Path::new("d/g.txt")),
            PathBuf::from("d/g.txt.manifest.json")
        );
    }
}
