//! Run reports and the CSV/JSON files built from them.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

/// Bumped whenever a column or field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// Circuits with at most this pre-routing depth fall in the `Medium` bucket.
pub const MEDIUM_MAX_DEPTH: usize = 500;
/// Circuits with at least this pre-routing depth fall in the `Large` bucket.
pub const LARGE_MIN_DEPTH: usize = 600;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failed => "failed",
            Status::Timeout => "timeout",
        }
    }
}

/// Wall-clock milliseconds per pipeline phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Phases {
    pub parse: f64,
    pub lift: f64,
    pub depgraph: f64,
    pub closure: f64,
    pub route: f64,
    pub verify: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub circuit: String,
    pub backend: String,
    pub variant: String,
    pub seed: u64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub verified: bool,
    pub qops: usize,
    pub swaps: usize,
    pub forced_swaps: usize,
    pub depth_pre: usize,
    pub depth_post: usize,
    /// Known optimal depth when the suite manifest provides one.
    pub optimal_depth: Option<usize>,
    /// `depth_post` over the optimal depth, or over `depth_pre` without one.
    pub depth_factor: Option<f64>,
    pub swap_depth_model: String,
    /// Present only when timings were requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<Phases>,
}

impl RunReport {
    pub fn failed(
        circuit: &str,
        backend: &str,
        variant: &str,
        seed: u64,
        status: Status,
        error: String,
    ) -> Self {
        RunReport {
            circuit: circuit.to_string(),
            backend: backend.to_string(),
            variant: variant.to_string(),
            seed,
            status,
            error: Some(error),
            verified: false,
            qops: 0,
            swaps: 0,
            forced_swaps: 0,
            depth_pre: 0,
            depth_post: 0,
            optimal_depth: None,
            depth_factor: None,
            swap_depth_model: String::new(),
            elapsed_ms: None,
        }
    }

    pub fn usable(&self) -> bool {
        self.status == Status::Ok && self.verified
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bucket {
    Medium,
    Large,
    Other,
}

impl Bucket {
    pub fn of(depth_pre: usize) -> Bucket {
        if depth_pre <= MEDIUM_MAX_DEPTH {
            Bucket::Medium
        } else if depth_pre >= LARGE_MIN_DEPTH {
            Bucket::Large
        } else {
            Bucket::Other
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Medium => "Medium",
            Bucket::Large => "Large",
            Bucket::Other => "Other",
        }
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub const RUNS_HEADER: [&str; 20] = [
    "schema_version",
    "circuit",
    "backend",
    "variant",
    "seed",
    "status",
    "verified",
    "qops",
    "swaps",
    "forced_swaps",
    "depth_pre",
    "depth_post",
    "optimal_depth",
    "depth_factor",
    "swap_depth_model",
    "parse_ms",
    "depgraph_ms",
    "closure_ms",
    "route_ms",
    "verify_ms",
];

pub fn write_runs_csv<W: Write>(out: W, runs: &[RunReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    for r in runs {
        let t = |f: fn(&Phases) -> f64| {
            r.elapsed_ms
                .as_ref()
                .map(|p| fmt_f64(f(p)))
                .unwrap_or_default()
        };
        w.write_record([
            SCHEMA_VERSION.to_string(),
            r.circuit.clone(),
            r.backend.clone(),
            r.variant.clone(),
            r.seed.to_string(),
            r.status.as_str().to_string(),
            r.verified.to_string(),
            r.qops.to_string(),
            r.swaps.to_string(),
            r.forced_swaps.to_string(),
            r.depth_pre.to_string(),
            r.depth_post.to_string(),
            fmt_opt(r.optimal_depth),
            r.depth_factor.map(fmt_f64).unwrap_or_default(),
            r.swap_depth_model.clone(),
            t(|p| p.parse),
            t(|p| p.depgraph),
            t(|p| p.closure),
            t(|p| p.route),
            t(|p| p.verify),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Means over usable runs of one variant in one bucket.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub variant: String,
    pub bucket: String,
    pub circuits: usize,
    pub usable: usize,
    pub mean_swaps: f64,
    pub mean_depth_post: f64,
    pub mean_depth_factor: f64,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Summary rows per (variant, bucket) plus an `All` bucket, in
/// `variants` order.
pub fn summarize(runs: &[RunReport], variants: &[String]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for v in variants {
        let mine: Vec<&RunReport> = runs.iter().filter(|r| &r.variant == v).collect();
        let usable: Vec<&RunReport> = mine.iter().copied().filter(|r| r.usable()).collect();
        for bucket in [
            Some(Bucket::Medium),
            Some(Bucket::Large),
            Some(Bucket::Other),
            None,
        ] {
            let rs: Vec<&RunReport> = usable
                .iter()
                .copied()
                .filter(|r| bucket.is_none_or(|b| Bucket::of(r.depth_pre) == b))
                .collect();
            if rs.is_empty() && bucket.is_some() {
                continue;
            }
            out.push(SummaryRow {
                variant: v.clone(),
                bucket: bucket.map_or("All", Bucket::as_str).to_string(),
                circuits: if bucket.is_none() {
                    mine.len()
                } else {
                    rs.len()
                },
                usable: rs.len(),
                mean_swaps: mean(rs.iter().map(|r| r.swaps as f64)),
                mean_depth_post: mean(rs.iter().map(|r| r.depth_post as f64)),
                mean_depth_factor: mean(rs.iter().filter_map(|r| r.depth_factor)),
            });
        }
    }
    out
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "schema_version",
        "variant",
        "bucket",
        "circuits",
        "usable",
        "mean_swaps",
        "mean_depth_post",
        "mean_depth_factor",
    ])?;
    for r in rows {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            r.variant.clone(),
            r.bucket.clone(),
            r.circuits.to_string(),
            r.usable.to_string(),
            fmt_f64(r.mean_swaps),
            fmt_f64(r.mean_depth_post),
            fmt_f64(r.mean_depth_factor),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean over circuits of `swaps(numerator) / swaps(denominator)`; circuits
/// where the denominator inserted no swaps are skipped.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub bucket: String,
    pub numerator: String,
    pub denominator: String,
    pub circuits: usize,
    pub mean_swap_ratio: Option<f64>,
}

pub fn swap_ratios(runs: &[RunReport], variants: &[String]) -> Vec<RatioRow> {
    let mut by: BTreeMap<(&str, &str), &RunReport> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.usable()) {
        by.insert((r.circuit.as_str(), r.variant.as_str()), r);
    }
    let mut circuits: Vec<&str> = runs.iter().map(|r| r.circuit.as_str()).collect();
    circuits.sort_unstable();
    circuits.dedup();

    let mut out = Vec::new();
    for num in variants {
        for den in variants {
            if num == den {
                continue;
            }
            for bucket in [Some(Bucket::Medium), Some(Bucket::Large), None] {
                let ratios: Vec<f64> = circuits
                    .iter()
                    .filter_map(|c| {
                        let a = by.get(&(*c, num.as_str()))?;
                        let b = by.get(&(*c, den.as_str()))?;
                        if bucket.is_some_and(|k| Bucket::of(a.depth_pre) != k) || b.swaps == 0 {
                            return None;
                        }
                        Some(a.swaps as f64 / b.swaps as f64)
                    })
                    .collect();
                if ratios.is_empty() && bucket.is_some() {
                    continue;
                }
                out.push(RatioRow {
                    bucket: bucket.map_or("All", Bucket::as_str).to_string(),
                    numerator: num.clone(),
                    denominator: den.clone(),
                    circuits: ratios.len(),
                    mean_swap_ratio: (!ratios.is_empty()).then(|| mean(ratios.iter().copied())),
                });
            }
        }
    }
    out
}

pub fn write_ratios_csv<W: Write>(out: W, rows: &[RatioRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "schema_version",
        "bucket",
        "numerator",
        "denominator",
        "circuits",
        "mean_swap_ratio",
    ])?;
    for r in rows {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            r.bucket.clone(),
            r.numerator.clone(),
            r.denominator.clone(),
            r.circuits.to_string(),
            r.mean_swap_ratio.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-variant means and percentage improvement over `distance_only`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRow {
    pub variant: String,
    pub circuits: usize,
    pub mean_swaps: f64,
    pub mean_depth_post: f64,
    pub swap_reduction_pct: Option<f64>,
    pub depth_reduction_pct: Option<f64>,
}

pub fn ablation(runs: &[RunReport], variants: &[String]) -> Vec<AblationRow> {
    // only circuits every requested variant routed successfully
    let mut ok: BTreeMap<&str, usize> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.usable()) {
        *ok.entry(r.circuit.as_str()).or_default() += 1;
    }
    let complete = |c: &str| ok.get(c).copied() == Some(variants.len());
    let stats = |v: &str| {
        let rs: Vec<&RunReport> = runs
            .iter()
            .filter(|r| r.variant == v && r.usable() && complete(&r.circuit))
            .collect();
        (
            rs.len(),
            mean(rs.iter().map(|r| r.swaps as f64)),
            mean(rs.iter().map(|r| r.depth_post as f64)),
        )
    };
    let base = variants
        .iter()
        .any(|v| v == "distance_only")
        .then(|| stats("distance_only"));
    let pct = |x: f64, b: f64| (b > 0.0).then(|| 100.0 * (b - x) / b);
    variants
        .iter()
        .map(|v| {
            let (n, s, d) = stats(v);
            AblationRow {
                variant: v.clone(),
                circuits: n,
                mean_swaps: s,
                mean_depth_post: d,
                swap_reduction_pct: base.and_then(|(_, bs, _)| pct(s, bs)),
                depth_reduction_pct: base.and_then(|(_, _, bd)| pct(d, bd)),
            }
        })
        .collect()
}

pub fn write_ablation_csv<W: Write>(out: W, rows: &[AblationRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "schema_version",
        "variant",
        "circuits",
        "mean_swaps",
        "mean_depth_post",
        "swap_reduction_pct",
        "depth_reduction_pct",
    ])?;
    for r in rows {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            r.variant.clone(),
            r.circuits.to_string(),
            fmt_f64(r.mean_swaps),
            fmt_f64(r.mean_depth_post),
            r.swap_reduction_pct.map(fmt_f64).unwrap_or_default(),
            r.depth_reduction_pct.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
