//! Single-circuit pipeline and suite sweeps.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use qroute::benchgen::{BenchError, Manifest};
use qroute::qasm::{parse_qasm_named, ParseError};
use qroute::router::{Prepared, RouteError, RouteResult, Router, RouterConfig, Variant};
use qroute::topology::TopologyError;
use qroute::verify::{depth, depth_factor, verify_routed, VerificationReport};
use qroute::{lift, Circuit, CouplingGraph};
use rayon::prelude::*;

use crate::report::{Phases, RunReport, Status};

/// Directory searched for `<name>.json` coupling graphs.
pub const BACKEND_DIR_ENV: &str = "QROUTE_BACKEND_DIR";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("coupling graph: {0}")]
    Topology(#[from] TopologyError),
    #[error("routing: {0}")]
    Route(#[from] RouteError),
    #[error("verification failed with {} violation(s)", .0.violations.len())]
    Verification(VerificationReport),
    #[error("manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("suite: {0}")]
    Suite(String),
    #[error("generator: {0}")]
    Bench(#[from] BenchError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Io { .. } => "io",
            HarnessError::Parse(_) => "parse",
            HarnessError::Topology(_) => "topology",
            HarnessError::Route(RouteError::Timeout(_)) => "timeout",
            HarnessError::Route(_) => "route",
            HarnessError::Verification(_) => "verification",
            HarnessError::Manifest { .. } => "manifest",
            HarnessError::Suite(_) => "suite",
            HarnessError::Bench(_) => "generate",
            HarnessError::Csv(_) => "io",
            HarnessError::Pool(_) => "internal",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut err = serde_json::json!({
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            HarnessError::Parse(p) => {
                err["line"] = p.line.into();
                err["col"] = p.col.into();
            }
            HarnessError::Verification(rep) => {
                err["violations"] =
                    serde_json::to_value(&rep.violations).expect("violations serialize");
            }
            _ => {}
        }
        serde_json::json!({
            "schema_version": crate::report::SCHEMA_VERSION,
            "error": err,
        })
    }
}

pub fn read_file(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Resolves a builtin name (`sherbrooke`, `line:N`, ...), a JSON file, or
/// `<name>.json` under `$QROUTE_BACKEND_DIR`.
pub fn resolve_backend(spec: &str) -> Result<CouplingGraph, HarnessError> {
    match CouplingGraph::builtin(spec) {
        Ok(g) => return Ok(g),
        Err(TopologyError::UnknownBuiltin(_)) => {}
        Err(e) => return Err(e.into()),
    }
    let direct = Path::new(spec);
    if direct.is_file() {
        return Ok(CouplingGraph::load(direct)?);
    }
    if let Some(dir) = std::env::var_os(BACKEND_DIR_ENV) {
        let dir = PathBuf::from(dir);
        for candidate in [dir.join(spec), dir.join(format!("{spec}.json"))] {
            if candidate.is_file() {
                return Ok(CouplingGraph::load(&candidate)?);
            }
        }
    }
    Err(TopologyError::UnknownBuiltin(spec.to_string()).into())
}

/// 64-bit FNV-1a over the base seed and the circuit name.
pub fn job_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(name.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteCircuit {
    pub name: String,
    pub path: PathBuf,
    pub optimal_depth: Option<usize>,
}

/// A suite is a manifest file or a directory of `.qasm` files, optionally
/// with a `manifest.json` supplying known optimal depths.
pub fn load_suite(path: &Path) -> Result<Vec<SuiteCircuit>, HarnessError> {
    if path.is_file() {
        return load_manifest(path);
    }
    if !path.is_dir() {
        return Err(HarnessError::Suite(format!(
            "{} does not exist",
            path.display()
        )));
    }
    let manifest = path.join("manifest.json");
    if manifest.is_file() {
        return load_manifest(&manifest);
    }
    let entries = std::fs::read_dir(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for e in entries {
        let p = e
            .map_err(|source| HarnessError::Io {
                path: path.to_path_buf(),
                source,
            })?
            .path();
        if p.extension().is_some_and(|x| x == "qasm") {
            out.push(SuiteCircuit {
                name: p
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned(),
                path: p,
                optimal_depth: None,
            });
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

fn load_manifest(path: &Path) -> Result<Vec<SuiteCircuit>, HarnessError> {
    let text = read_file(path)?;
    let m: Manifest = serde_json::from_str(&text).map_err(|source| HarnessError::Manifest {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    Ok(m.circuits
        .into_iter()
        .map(|e| SuiteCircuit {
            path: dir.join(&e.file),
            name: e.name,
            optimal_depth: Some(e.optimal_depth),
        })
        .collect())
}

/// Outcome of one (circuit, variant) run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub result: RouteResult,
}

/// Everything downstream of parsing for one variant: route, verify, report.
#[allow(clippy::too_many_arguments)]
pub fn run_prepared(
    router: &Router<'_>,
    prepared: &Prepared,
    optimal_depth: Option<usize>,
    config: &RouterConfig<f64>,
    mut phases: Phases,
    timings: bool,
) -> Result<RunOutcome, HarnessError> {
    let circuit = &prepared.circuit;
    let t = Instant::now();
    let result = router.route(prepared, config)?;
    phases.route = ms(t.elapsed());

    let t = Instant::now();
    let rep = verify_routed(
        circuit,
        &result.routed,
        &result.initial_mapping,
        router.graph(),
    );
    phases.verify = ms(t.elapsed());
    if !rep.ok {
        return Err(HarnessError::Verification(rep));
    }

    let depth_pre = depth(circuit, config.swap_depth_model);
    let reference = optimal_depth.unwrap_or(depth_pre);
    let report = RunReport {
        circuit: circuit.name.clone(),
        backend: router.graph().name().to_string(),
        variant: config.variant.to_string(),
        seed: config.seed,
        status: Status::Ok,
        error: None,
        verified: true,
        qops: circuit.qops(),
        swaps: result.swap_count,
        forced_swaps: result.forced_swaps,
        depth_pre,
        depth_post: result.depth,
        optimal_depth,
        depth_factor: depth_factor(result.depth, reference).ok(),
        swap_depth_model: config.swap_depth_model.as_str().to_string(),
        elapsed_ms: timings.then_some(phases),
    };
    Ok(RunOutcome { report, result })
}

/// Parse and analysis phases shared by every variant of one circuit.
pub fn prepare_text(
    router: &Router<'_>,
    name: &str,
    text: &str,
) -> Result<(Prepared, Phases), HarnessError> {
    let mut phases = Phases::default();
    let t = Instant::now();
    let circuit: Circuit = parse_qasm_named(text, name)?;
    phases.parse = ms(t.elapsed());

    let t = Instant::now();
    let _ = lift::compression_stats(&lift::lift(&circuit));
    phases.lift = ms(t.elapsed());

    let prepared = router.prepare(&circuit)?;
    phases.depgraph = ms(prepared.depgraph_time);
    phases.closure = ms(prepared.closure_time);
    Ok((prepared, phases))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub variants: Vec<Variant>,
    pub base: RouterConfig<f64>,
    pub jobs: usize,
    pub timings: bool,
}

fn failure_report(
    c: &SuiteCircuit,
    backend: &str,
    variant: Variant,
    seed: u64,
    e: &HarnessError,
) -> RunReport {
    let status = if e.kind() == "timeout" {
        Status::Timeout
    } else {
        Status::Failed
    };
    let mut r = RunReport::failed(
        &c.name,
        backend,
        variant.as_str(),
        seed,
        status,
        e.to_string(),
    );
    r.optimal_depth = c.optimal_depth;
    r
}

/// Routes every circuit with every variant. Rows come back ordered by suite
/// order, then variant order, whatever the worker count.
pub fn sweep(
    suite: &[SuiteCircuit],
    graph: &CouplingGraph,
    opts: &SweepOptions,
) -> Result<Vec<RunReport>, HarnessError> {
    let router = Router::new(graph);
    let backend = graph.name().to_string();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()?;
    let rows: Vec<Vec<RunReport>> = pool.install(|| {
        suite
            .par_iter()
            .map(|c| {
                let seed = job_seed(opts.base.seed, &c.name);
                let prepared =
                    read_file(&c.path).and_then(|text| prepare_text(&router, &c.name, &text));
                opts.variants
                    .iter()
                    .map(|&variant| {
                        let (prepared, phases) = match &prepared {
                            Ok(p) => p,
                            Err(e) => return failure_report(c, &backend, variant, seed, e),
                        };
                        let config = RouterConfig {
                            variant,
                            seed,
                            ..opts.base.clone()
                        };
                        match run_prepared(
                            &router,
                            prepared,
                            c.optimal_depth,
                            &config,
                            *phases,
                            opts.timings,
                        ) {
                            Ok(out) => out.report,
                            Err(e) => failure_report(c, &backend, variant, seed, &e),
                        }
                    })
                    .collect()
            })
            .collect()
    });
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_name_and_base() {
        assert_eq!(job_seed(1, "a"), job_seed(1, "a"));
        assert_ne!(job_seed(1, "a"), job_seed(1, "b"));
        assert_ne!(job_seed(1, "a"), job_seed(2, "a"));
    }

    #[test]
    fn builtin_backends_resolve() {
        assert_eq!(resolve_backend("line:5").unwrap().num_qubits(), 5);
        assert!(matches!(
            resolve_backend("nope"),
            Err(HarnessError::Topology(_))
        ));
    }
}
