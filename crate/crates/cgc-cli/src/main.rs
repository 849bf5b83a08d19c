//! `cgc` — analyze, optimize, and simulate idealized CSMA networks from the
//! command line.
//!
//! Four subcommands cover the pipeline: `analyze` prints product-form
//! throughputs of a topology (or one of its sub-networks), `optimize` solves
//! the offered-load optimization against per-link minimum rates, `simulate`
//! runs the event-driven simulator under a given load, and `experiment`
//! reproduces the random-network evaluation sweeps.
//!
//! Every artifact written to disk embeds a run manifest (command, arguments,
//! seed, timestamp, tool version), so a result file always says how to
//! regenerate itself. Exit codes: 0 success, 2 usage, 3 unreadable or
//! malformed input, 4 infeasible requirements, 5 size cap exceeded, 1
//! anything else.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use cgc::experiments::{self, ExperimentSpec, Setting, SettingOutput, UnknownSetting};
use cgc::graph::{parse_topology, ContentionGraph, SubnetworkMask};
use cgc::lp::{
    check_feasibility, optimal_offered_load_capped, LpError, LpSolution, LpStatus,
    RequirementVector,
};
use cgc::mixture::{MixtureError, OfferedLoadVector, SubnetworkThroughputMatrix};
use cgc::product_form::{saturated_throughputs, stationary_distribution};
use cgc::sim::{pool, simulate, simulate_many, write_trace_csv, SimConfig, SimError};
use cgc::MAX_LINKS;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_SIZE_CAP: u8 = 5;
const EXIT_OTHER: u8 = 1;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    SizeCap(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::SizeCap(_) => EXIT_SIZE_CAP,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "cgc",
    version,
    about = "Throughput analysis and offered-load optimization for idealized CSMA networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Product-form analysis of a topology or one of its sub-networks
    Analyze(AnalyzeArgs),
    /// Maximize aggregate throughput subject to per-link minimum rates
    Optimize(OptimizeArgs),
    /// Event-driven simulation under a given offered load
    Simulate(SimulateArgs),
    /// Random-network evaluation sweeps and the worked ring fixture
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Topology file (links/rho/edge directives, 1-based link numbers)
    topology: PathBuf,
    /// Sub-network mask: binary (0b0011), hex (0x3), or decimal (3);
    /// defaults to all links on
    #[arg(long)]
    active: Option<String>,
    /// Also export the full 2^n sub-network throughput matrix as CSV
    #[arg(long, value_name = "PATH")]
    matrix_csv: Option<PathBuf>,
    /// Refuse the matrix export above this link count
    #[arg(long, default_value_t = MAX_LINKS)]
    max_links: usize,
    /// Write the analysis as JSON
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Topology file
    topology: PathBuf,
    /// Per-link minimum throughputs: inline comma-separated or @file
    #[arg(long, short)]
    requirements: String,
    /// Include the dense q* vector (2^n entries) in the JSON output
    #[arg(long)]
    emit_q: bool,
    /// Refuse instances above this link count (the program has 2^n columns)
    #[arg(long, default_value_t = MAX_LINKS)]
    max_links: usize,
    /// Write the solution as JSON
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Topology file
    topology: PathBuf,
    /// Per-link offered load: inline comma-separated or @file
    #[arg(long, short = 'f')]
    offered_load: String,
    /// Simulated time units per replication
    #[arg(long, default_value_t = 1e6)]
    duration: f64,
    /// Number of independent replications
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Base seed; replication k runs with seed base+k
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of each run discarded as warmup
    #[arg(long, default_value_t = 0.1)]
    warmup: f64,
    /// Write the event trace of the first replication as CSV
    #[arg(long, value_name = "PATH")]
    trace_csv: Option<PathBuf>,
    /// Write per-seed throughputs as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write the full results as JSON
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// table1_ring, degree_sweep, intensity_sweep, or requirement_sweep
    #[arg(long, value_parser = parse_setting)]
    setting: Setting,
    /// Master seed driving network generation
    #[arg(long, default_value_t = 2026)]
    seed: u64,
    /// Networks per sweep point
    #[arg(long, value_name = "N")]
    networks: Option<usize>,
    /// Links per network
    #[arg(long, value_name = "N")]
    links: Option<usize>,
    /// Mean-degree sweep values, e.g. 2,3,4
    #[arg(long, value_name = "LIST")]
    degrees: Option<String>,
    /// Access-intensity multipliers, e.g. 1,2,3
    #[arg(long, value_name = "LIST")]
    multipliers: Option<String>,
    /// Requirement relaxation offsets, e.g. 0,0.1,0.2
    #[arg(long, value_name = "LIST")]
    offsets: Option<String>,
    /// Simulated time units per replication
    #[arg(long, default_value_t = 1e6)]
    duration: f64,
    /// Simulation replications per network
    #[arg(long, default_value_t = 10)]
    sim_seeds: usize,
    /// Directory for result files (default: $CGC_OUT_DIR or the current dir)
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    s.parse().map_err(|e: UnknownSetting| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

// ---------------------------------------------------------------------------
// Run manifest and output plumbing
// ---------------------------------------------------------------------------

/// Echoed into every output artifact: what ran, with which inputs, when.
/// Re-running the recorded command reproduces the artifact bit-identically
/// except for this timestamp.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    args: Vec<String>,
    topology: Option<String>,
    seed: Option<u64>,
    output: Option<String>,
    format: &'static str,
    timestamp: String,
    tool_version: &'static str,
}

impl RunManifest {
    fn new(
        command: &'static str,
        topology: Option<&Path>,
        seed: Option<u64>,
        output: Option<&Path>,
        format: &'static str,
    ) -> Self {
        Self {
            command,
            args: std::env::args().skip(1).collect(),
            topology: topology.map(|p| p.display().to_string()),
            seed,
            output: output.map(|p| p.display().to_string()),
            format,
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            tool_version: env!("CARGO_PKG_VERSION"),
        }
    }

    fn comment_line(&self) -> String {
        format!(
            "# manifest: {}",
            serde_json::to_string(self).expect("manifest serializes")
        )
    }
}

/// Relative output paths land in `$CGC_OUT_DIR` when that is set.
fn resolve_output(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("CGC_OUT_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    let full = resolve_output(path);
    if let Some(parent) = full.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Other(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(&full, contents)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", full.display())))?;
    Ok(full)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Other(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    let full = write_file(path, &text)?;
    eprintln!("wrote {}", full.display());
    Ok(())
}

fn write_csv(path: &Path, manifest: &RunManifest, body: &str) -> Result<(), CliError> {
    let text = format!("{}\n{}", manifest.comment_line(), body);
    let full = write_file(path, &text)?;
    eprintln!("wrote {}", full.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// Input parsing
// ---------------------------------------------------------------------------

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_topology(path: &Path) -> Result<ContentionGraph, CliError> {
    let text = read_input(path)?;
    parse_topology(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Masks are accepted in binary (`0b0101`), hex (`0x5`), or decimal (`5`).
fn parse_mask(arg: &str, n_links: usize) -> Result<SubnetworkMask, CliError> {
    let t = arg.trim();
    let parsed = if let Some(bin) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        u32::from_str_radix(bin, 2)
    } else if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u32::from_str_radix(hex, 16)
    } else {
        t.parse()
    };
    let bits = parsed.map_err(|e| CliError::Usage(format!("invalid mask {t:?}: {e}")))?;
    if n_links < 32 && bits >= 1u32 << n_links {
        return Err(CliError::Usage(format!(
            "mask {t} names links beyond the {n_links} in the topology"
        )));
    }
    Ok(SubnetworkMask::from_bits(bits))
}

/// Vectors are inline comma-separated values or `@file`, where the file
/// holds numbers separated by commas, spaces, or newlines (`#` comments ok).
fn parse_vector(arg: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let file_text;
    let payload = match arg.strip_prefix('@') {
        Some(path) => {
            file_text = read_input(Path::new(path))?;
            file_text.as_str()
        }
        None => arg,
    };
    let mut out = Vec::new();
    for line in payload.lines() {
        let data = line.split('#').next().unwrap_or("");
        for token in data.split(|c: char| c == ',' || c.is_whitespace()) {
            if token.is_empty() {
                continue;
            }
            out.push(
                token
                    .parse::<f64>()
                    .map_err(|e| CliError::Parse(format!("invalid {what} value {token:?}: {e}")))?,
            );
        }
    }
    if out.is_empty() {
        return Err(CliError::Parse(format!("{what} vector is empty")));
    }
    Ok(out)
}

fn expect_len(v: &[f64], n: usize, what: &str) -> Result<(), CliError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(CliError::Parse(format!(
            "{what} has {} entries but the topology has {n} links",
            v.len()
        )))
    }
}

fn fmt_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs) -> Result<u8, CliError> {
    let g = load_topology(&args.topology)?;
    let active = match &args.active {
        Some(mask) => parse_mask(mask, g.n())?,
        None => g.full_mask(),
    };
    let dist = stationary_distribution(&g, active);
    let th = saturated_throughputs(&g, active);

    println!("topology             {}", args.topology.display());
    println!("links                {}", g.n());
    println!("edges                {}", g.edges().len());
    println!("mean degree          {:.4}", g.mean_degree());
    println!(
        "active               {} ({} of {} links on)",
        active,
        active.count(),
        g.n()
    );
    println!("feasible states      {}", dist.states().len());
    println!("partition function Z {:.4}", dist.partition());
    println!();
    println!("link  rho        saturated_th");
    for i in 0..g.n() {
        println!("{:<5} {:<10.4} {:.4}", i + 1, g.rho_of(i), th[i]);
    }

    let manifest = RunManifest::new(
        "analyze",
        Some(&args.topology),
        None,
        args.output.as_deref(),
        "json",
    );

    if let Some(path) = &args.matrix_csv {
        let matrix =
            SubnetworkThroughputMatrix::build_capped(&g, args.max_links).map_err(|e| match e {
                MixtureError::SizeCapExceeded { .. } => CliError::SizeCap(e.to_string()),
                other => CliError::Other(other.to_string()),
            })?;
        let mut body = Vec::new();
        matrix
            .write_csv(&mut body)
            .map_err(|e| CliError::Other(format!("matrix export failed: {e}")))?;
        let body = String::from_utf8(body).expect("CSV is ASCII");
        write_csv(path, &manifest, &body)?;
    }

    if let Some(path) = &args.output {
        write_json(
            path,
            &json!({
                "manifest": manifest,
                "n_links": g.n(),
                "n_edges": g.edges().len(),
                "mean_degree": g.mean_degree(),
                "rho": g.rho(),
                "active_mask": active.bits(),
                "state_count": dist.states().len(),
                "partition_function": dist.partition(),
                "log_partition": dist.log_partition(),
                "saturated_throughput": th.as_slice(),
            }),
        )?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

fn map_lp_error(err: LpError) -> CliError {
    match err {
        LpError::RequirementOutOfRange { link, value } => CliError::Parse(format!(
            "requirement {value} for link {} is outside [0, 1)",
            link + 1
        )),
        LpError::DimensionMismatch { .. } => CliError::Parse(err.to_string()),
        LpError::Mixture(MixtureError::SizeCapExceeded { .. }) => {
            CliError::SizeCap(err.to_string())
        }
        other => CliError::Other(other.to_string()),
    }
}

fn cmd_optimize(args: OptimizeArgs) -> Result<u8, CliError> {
    let g = load_topology(&args.topology)?;
    let values = parse_vector(&args.requirements, "requirement")?;
    expect_len(&values, g.n(), "requirement vector")?;
    let r = RequirementVector::new(values).map_err(map_lp_error)?;

    let screen = check_feasibility(&g, &r).map_err(map_lp_error)?;
    let mut solution = optimal_offered_load_capped(&g, &r, args.max_links).map_err(map_lp_error)?;
    if !args.emit_q {
        solution.q_star = None;
    }

    let exit = print_solution(&g, &solution);
    if let Some(path) = &args.output {
        let manifest = RunManifest::new(
            "optimize",
            Some(&args.topology),
            None,
            args.output.as_deref(),
            "json",
        );
        write_json(
            path,
            &json!({
                "manifest": manifest,
                "requirements": r.as_slice(),
                "saturation_ceilings": screen.ceilings,
                "solution": solution,
            }),
        )?;
    }
    Ok(exit)
}

fn print_solution(g: &ContentionGraph, solution: &LpSolution) -> u8 {
    match solution.status {
        LpStatus::Optimal => {
            let th = solution.th_star.as_ref().expect("optimal");
            println!("status       optimal");
            println!("objective    {:.4}", solution.objective.expect("optimal"));
            println!("f*           {}", fmt_row(th.as_slice()));
            println!(
                "support      {} of {} sub-networks (bound: n+1 = {})",
                solution.nonzero_count,
                1usize << g.n(),
                g.n() + 1
            );
            for (mask, q) in solution.support.as_deref().unwrap_or_default() {
                println!("  {mask}  q = {q:.4}");
            }
            EXIT_OK
        }
        LpStatus::Infeasible => {
            let links: Vec<String> = solution
                .infeasible_links
                .as_deref()
                .unwrap_or_default()
                .iter()
                .map(|i| (i + 1).to_string())
                .collect();
            println!("status       infeasible");
            eprintln!(
                "no load mixture meets every minimum rate; conflicting constraints at link(s) {}",
                links.join(", ")
            );
            EXIT_INFEASIBLE
        }
        LpStatus::SizeCapExceeded => {
            println!("status       size_cap_exceeded");
            eprintln!(
                "{} links exceed the configured cap; raise --max-links to allow 2^n columns",
                g.n()
            );
            EXIT_SIZE_CAP
        }
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn map_sim_error(err: SimError) -> CliError {
    CliError::Usage(err.to_string())
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8, CliError> {
    let g = load_topology(&args.topology)?;
    let values = parse_vector(&args.offered_load, "offered-load")?;
    expect_len(&values, g.n(), "offered-load vector")?;
    let f = OfferedLoadVector::new(values).map_err(|e| CliError::Parse(e.to_string()))?;
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }

    let cfg = SimConfig::for_load(f.clone())
        .with_duration(args.duration)
        .with_warmup_fraction(args.warmup);
    let seeds: Vec<u64> = (0..args.seeds).map(|k| args.seed.wrapping_add(k)).collect();

    let manifest = RunManifest::new(
        "simulate",
        Some(&args.topology),
        Some(args.seed),
        args.output.as_deref(),
        "json",
    );

    // The trace replication reuses the first seed; recording does not touch
    // the random stream, so its statistics pool with the rest.
    let mut runs = Vec::with_capacity(seeds.len());
    if let Some(path) = &args.trace_csv {
        let traced_cfg = cfg.clone().with_seed(seeds[0]).with_trace(true);
        let mut first = simulate(&g, &traced_cfg).map_err(map_sim_error)?;
        let trace = first.trace.take().expect("trace was requested");
        let mut body = Vec::new();
        write_trace_csv(&mut body, &trace)
            .map_err(|e| CliError::Other(format!("trace export failed: {e}")))?;
        write_csv(path, &manifest, &String::from_utf8(body).expect("ASCII"))?;
        runs.push(first);
        runs.extend(simulate_many(&g, &cfg, &seeds[1..]).map_err(map_sim_error)?);
    } else {
        runs = simulate_many(&g, &cfg, &seeds).map_err(map_sim_error)?;
    }
    let pooled = pool(&runs);

    println!("link  offered   mean_th   std_err");
    for i in 0..g.n() {
        println!(
            "{:<5} {:<9.4} {:<9.4} {:.4}",
            i + 1,
            f.as_slice()[i],
            pooled.mean[i],
            pooled.std_error[i]
        );
    }
    println!(
        "aggregate {:.4} +- {:.4}  ({} seeds x {} time units)",
        pooled.aggregate_mean, pooled.aggregate_std_error, args.seeds, args.duration
    );
    let flagged = runs
        .iter()
        .flat_map(|r| r.saturated_links())
        .collect::<std::collections::BTreeSet<_>>();
    if !flagged.is_empty() {
        println!(
            "note: link(s) {} never emptied their queues (offered load above capacity)",
            flagged
                .iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }

    if let Some(path) = &args.csv {
        let mut body = String::from("seed");
        for i in 1..=g.n() {
            body.push_str(&format!(",th_{i}"));
        }
        body.push('\n');
        for r in &runs {
            body.push_str(&r.seed.to_string());
            for v in r.th_hat.as_slice() {
                body.push_str(&format!(",{v}"));
            }
            body.push('\n');
        }
        for (label, row) in [("mean", &pooled.mean), ("std_error", &pooled.std_error)] {
            body.push_str(label);
            for v in row {
                body.push_str(&format!(",{v}"));
            }
            body.push('\n');
        }
        write_csv(path, &manifest, &body)?;
    }

    if let Some(path) = &args.output {
        write_json(
            path,
            &json!({
                "manifest": manifest,
                "offered_load": f.as_slice(),
                "duration": args.duration,
                "warmup_fraction": args.warmup,
                "seeds": seeds,
                "runs": runs,
                "pooled": pooled,
            }),
        )?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

fn parse_list(arg: &str, what: &str) -> Result<Vec<f64>, CliError> {
    parse_vector(arg, what)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<u8, CliError> {
    let mut spec = ExperimentSpec::new(args.setting);
    spec.master_seed = args.seed;
    spec.sim_duration = args.duration;
    if args.sim_seeds == 0 {
        return Err(CliError::Usage("--sim-seeds must be at least 1".into()));
    }
    spec.sim_seeds = (0..args.sim_seeds as u64).collect();
    if let Some(n) = args.networks {
        spec.n_networks = n;
    }
    if let Some(n) = args.links {
        spec.n_links = n;
    }
    if let Some(list) = &args.degrees {
        spec.mean_degrees = parse_list(list, "degree list")?;
    }
    if let Some(list) = &args.multipliers {
        spec.intensity_multipliers = parse_list(list, "multiplier list")?;
    }
    if let Some(list) = &args.offsets {
        spec.requirement_offsets = parse_list(list, "offset list")?;
    }

    let output = experiments::run(&spec).map_err(|e| match e {
        experiments::ExperimentError::InvalidSpec(msg) => CliError::Usage(msg),
        experiments::ExperimentError::Sim(err) => map_sim_error(err),
        other => CliError::Other(other.to_string()),
    })?;

    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("CGC_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let manifest = RunManifest::new(
        "experiment",
        None,
        Some(args.seed),
        Some(&out_dir),
        "json+csv",
    );
    let base = args.setting.token();

    match &output {
        SettingOutput::Ring(cmp) => {
            print!("{}", cmp.render_text());
            let path = out_dir.join(format!("{base}.json"));
            write_json(&path, &json!({ "manifest": manifest, "result": cmp }))?;
        }
        SettingOutput::Sweep(sweep) => {
            print!("{}", sweep.render_text());
            write_json(
                &out_dir.join(format!("{base}.json")),
                &json!({ "manifest": manifest, "result": sweep }),
            )?;
            let mut summary = Vec::new();
            sweep
                .write_summary_csv(&mut summary)
                .map_err(|e| CliError::Other(e.to_string()))?;
            write_csv(
                &out_dir.join(format!("{base}_summary.csv")),
                &manifest,
                &String::from_utf8(summary).expect("ASCII"),
            )?;
            let mut raw = Vec::new();
            sweep
                .write_networks_csv(&mut raw)
                .map_err(|e| CliError::Other(e.to_string()))?;
            write_csv(
                &out_dir.join(format!("{base}_networks.csv")),
                &manifest,
                &String::from_utf8(raw).expect("ASCII"),
            )?;
        }
    }
    Ok(EXIT_OK)
}
