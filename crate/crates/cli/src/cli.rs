//! Command-line surface. Exit codes: 0 ok, 1 run failure, 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use qroute::benchgen::{make_suite, manifest, Densities};
use qroute::depgraph::{build_depgraph, WindowPolicy};
use qroute::lift;
use qroute::qasm::{emit_qasm, parse_qasm_named};
use qroute::router::{DecayKey, Router, RouterConfig, Variant};
use qroute::topology::apsp;
use qroute::verify::SwapDepthModel;

use crate::harness::{
    load_suite, prepare_text, read_file, resolve_backend, run_prepared, sweep, write_file,
    HarnessError, SweepOptions,
};
use crate::report::{self, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qroute", version, about = "Dependence-weighted qubit routing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Route one circuit and write the routed QASM plus a JSON report.
    Route(RouteArgs),
    /// Route a suite with one or more variants and write CSV summaries.
    Bench(BenchArgs),
    /// Run the four cost-function variants and report improvements over
    /// the distance-only baseline.
    Ablate(BenchArgs),
    /// Generate circuits with a known optimal depth.
    Generate(GenerateArgs),
    /// Dump the affine macro-gates of a circuit as JSON.
    Lift(InputArgs),
    /// Dump the two-qubit dependence graph in DOT format.
    Dot(InputArgs),
    /// Dump the all-pairs distance matrix of a coupling graph as CSV.
    Distances(DistanceArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RouterArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "full")]
    pub variant: Variant,
    /// Window constant c; defaults to the maximum degree plus one.
    #[arg(long)]
    pub window_constant: Option<usize>,
    #[arg(long, default_value_t = 0.001)]
    pub decay_increment: f64,
    /// Forward/backward passes of the bidirectional initial mapping.
    #[arg(long, default_value_t = 1)]
    pub passes: usize,
    #[arg(long, default_value = "unit")]
    pub swap_depth_model: SwapDepthModel,
    #[arg(long)]
    pub omega_smoothing: bool,
    #[arg(long)]
    pub stall_limit: Option<usize>,
    #[arg(long, value_parser = parse_window_policy, default_value = "topological_prefix")]
    pub window_policy: WindowPolicy,
    #[arg(long, value_parser = parse_decay_key, default_value = "logical")]
    pub decay_key: DecayKey,
    /// Per-circuit routing time limit in seconds.
    #[arg(long, default_value_t = 1800)]
    pub timeout_secs: u64,
    /// Include per-phase wall-clock times in reports (breaks byte-identical
    /// reruns).
    #[arg(long)]
    pub timings: bool,
}

fn parse_window_policy(s: &str) -> Result<WindowPolicy, String> {
    match s.replace('-', "_").as_str() {
        "topological_prefix" => Ok(WindowPolicy::TopologicalPrefix),
        "qubit_affinity" => Ok(WindowPolicy::QubitAffinity),
        _ => Err(format!(
            "unknown window policy '{s}' (topological_prefix, qubit_affinity)"
        )),
    }
}

fn parse_decay_key(s: &str) -> Result<DecayKey, String> {
    match s {
        "logical" => Ok(DecayKey::Logical),
        "physical" => Ok(DecayKey::Physical),
        _ => Err(format!("unknown decay key '{s}' (logical, physical)")),
    }
}

impl RouterArgs {
    pub fn config(&self) -> RouterConfig<f64> {
        RouterConfig {
            window_constant: self.window_constant,
            decay_increment: self.decay_increment,
            seed: self.seed,
            variant: self.variant,
            omega_smoothing: self.omega_smoothing,
            stall_limit: self.stall_limit,
            swap_depth_model: self.swap_depth_model,
            window_policy: self.window_policy,
            decay_key: self.decay_key,
            passes: self.passes,
            timeout: Some(Duration::from_secs(self.timeout_secs)),
        }
    }
}

#[derive(Args, Debug)]
pub struct RouteArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Builtin name, JSON file, or name under $QROUTE_BACKEND_DIR.
    #[arg(long)]
    pub coupling: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub router: RouterArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of .qasm files or a manifest.json.
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long)]
    pub backend: String,
    /// Comma-separated variants; `bench` defaults to full, `ablate` to all.
    #[arg(long, value_delimiter = ',')]
    pub variants: Vec<Variant>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub router: RouterArgs,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Builtin or file coupling graph the circuits are built on.
    #[arg(long)]
    pub graph: String,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "100,200,300,400,500,600,700,800,900"
    )]
    pub depths: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub per_depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = Densities::default().p1q)]
    pub p1q: f64,
    #[arg(long, default_value_t = Densities::default().p2q)]
    pub p2q: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[arg(long)]
    pub coupling: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&e.to_json()).expect("error JSON")
            );
            EXIT_FAILURE
        }
    }
}

pub fn run(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::Route(a) => cmd_route(&a),
        Command::Bench(a) => cmd_bench(&a, false),
        Command::Ablate(a) => cmd_bench(&a, true),
        Command::Generate(a) => cmd_generate(&a),
        Command::Lift(a) => {
            let c = parse_qasm_named(&read_file(&a.input)?, &stem(&a.input))?;
            let json = lift::macros_to_json(&lift::lift(&c));
            println!(
                "{}",
                serde_json::to_string_pretty(&json).expect("macro JSON")
            );
            Ok(())
        }
        Command::Dot(a) => {
            let c = parse_qasm_named(&read_file(&a.input)?, &stem(&a.input))?;
            print!("{}", build_depgraph(&c).to_dot());
            Ok(())
        }
        Command::Distances(a) => {
            print!("{}", apsp(&resolve_backend(&a.coupling)?).to_csv());
            Ok(())
        }
    }
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "circuit".into())
}

fn layout_line(key: &str, layout: &[usize]) -> String {
    let nums: Vec<String> = layout.iter().map(usize::to_string).collect();
    format!("qroute: {key} {}", nums.join(" "))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_file(path, text)
}

pub fn cmd_route(a: &RouteArgs) -> Result<(), HarnessError> {
    let graph = resolve_backend(&a.coupling)?;
    let router = Router::new(&graph);
    let name = stem(&a.input);
    let config = a.router.config();
    let outcome = read_file(&a.input)
        .and_then(|text| prepare_text(&router, &name, &text))
        .and_then(|(prepared, phases)| {
            run_prepared(&router, &prepared, None, &config, phases, a.router.timings)
        });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            if let Some(path) = &a.report {
                write_json(path, &e.to_json())?;
            }
            return Err(e);
        }
    };

    let header = [
        layout_line("initial_layout", outcome.result.initial_mapping.log2phys()),
        layout_line("final_layout", outcome.result.final_mapping.log2phys()),
        format!(
            "qroute: backend {} variant {} seed {} swaps {}",
            graph.name(),
            config.variant,
            config.seed,
            outcome.result.swap_count
        ),
    ]
    .join("\n");
    let qasm = emit_qasm(&outcome.result.routed, &header);
    match &a.out {
        Some(p) => write_file(p, qasm)?,
        None => print!("{qasm}"),
    }
    let json = serde_json::json!({
        "schema_version": report::SCHEMA_VERSION,
        "report": outcome.report,
        "initial_layout": outcome.result.initial_mapping,
        "final_layout": outcome.result.final_mapping,
    });
    match &a.report {
        Some(p) => write_json(p, &json)?,
        None if a.out.is_some() => {
            println!("{}", serde_json::to_string_pretty(&json).expect("report"))
        }
        None => {}
    }
    Ok(())
}

/// Files written by `bench` and `ablate`.
pub const RUNS_CSV: &str = "runs.csv";
pub const RUNS_JSON: &str = "runs.json";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const RATIOS_CSV: &str = "swap_ratios.csv";
pub const ABLATION_CSV: &str = "ablation.csv";

pub fn cmd_bench(a: &BenchArgs, ablate: bool) -> Result<(), HarnessError> {
    let graph = resolve_backend(&a.backend)?;
    let suite = load_suite(&a.suite)?;
    let variants = if !a.variants.is_empty() {
        a.variants.clone()
    } else if ablate {
        Variant::ALL.to_vec()
    } else {
        vec![Variant::Full]
    };
    let opts = SweepOptions {
        variants: variants.clone(),
        base: a.router.config(),
        jobs: a.jobs,
        timings: a.router.timings,
    };
    let runs = sweep(&suite, &graph, &opts)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| HarnessError::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    write_outputs(&a.out_dir, &runs, &variants, ablate)
}

fn write_outputs(
    dir: &Path,
    runs: &[RunReport],
    variants: &[Variant],
    ablate: bool,
) -> Result<(), HarnessError> {
    let names: Vec<String> = variants.iter().map(|v| v.to_string()).collect();
    let mut buf = Vec::new();
    report::write_runs_csv(&mut buf, runs)?;
    write_file(&dir.join(RUNS_CSV), buf)?;
    write_json(
        &dir.join(RUNS_JSON),
        &serde_json::json!({ "schema_version": report::SCHEMA_VERSION, "runs": runs }),
    )?;

    let mut buf = Vec::new();
    report::write_summary_csv(&mut buf, &report::summarize(runs, &names))?;
    write_file(&dir.join(SUMMARY_CSV), buf)?;

    let mut buf = Vec::new();
    report::write_ratios_csv(&mut buf, &report::swap_ratios(runs, &names))?;
    write_file(&dir.join(RATIOS_CSV), buf)?;

    if ablate {
        let mut buf = Vec::new();
        report::write_ablation_csv(&mut buf, &report::ablation(runs, &names))?;
        write_file(&dir.join(ABLATION_CSV), buf)?;
    }
    Ok(())
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<(), HarnessError> {
    let graph = resolve_backend(&a.graph)?;
    let densities = Densities {
        p1q: a.p1q,
        p2q: a.p2q,
    };
    let suite = make_suite(&graph, &a.depths, a.per_depth, a.seed, densities)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| HarnessError::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    for e in &suite {
        let header = format!(
            "qroute: optimal_depth {}\nqroute: generated_on {} seed {} p1q {} p2q {}",
            e.generated.optimal_depth,
            graph.name(),
            e.seed,
            densities.p1q,
            densities.p2q
        );
        write_file(
            &a.out_dir.join(format!("{}.qasm", e.name)),
            emit_qasm(&e.generated.circuit, &header),
        )?;
    }
    write_json(
        &a.out_dir.join("manifest.json"),
        &manifest(&graph, a.seed, densities, &suite),
    )
}
