//! Batch loop: generate, solve, optionally compute the exact optimum, audit.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{generate, Family, GeneratorSpec};
use crate::graph::{Instance, Kind};
use crate::oracle::{audit_solve, exact_opt_bruteforce, AuditReport};
use crate::sndp::{solve, SolveReport};

/// Environment variable capping the bench worker pool.
pub const THREADS_ENV: &str = "BISET_SNDP_THREADS";

pub const CSV_HEADER: &str =
    "seed,family,n,m,kind,k,alg_weight,exact_weight,dual_lb,ratio_exact,ratio_dual,phases,iters,audit_pass";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub family: Family,
    pub kind: Kind,
    pub n: usize,
    pub demand_count: usize,
    pub k_max: u32,
    pub exact: bool,
    /// Run the counting audit on every iteration (slow).
    pub counting: bool,
}

impl BenchConfig {
    pub fn spec(&self, seed: u64) -> GeneratorSpec {
        GeneratorSpec::new(self.family, self.n, self.demand_count, self.k_max, self.kind, seed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub seed: u64,
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub kind: Kind,
    pub k: u32,
    pub alg_weight: u64,
    pub exact_weight: Option<u64>,
    pub dual_lb: String,
    pub ratio_exact: Option<f64>,
    pub ratio_dual: Option<f64>,
    pub phases: usize,
    pub iters: usize,
    pub audit_pass: bool,
}

/// Everything one seed produced, for callers that need more than the row.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub instance: Instance,
    pub report: SolveReport,
    pub exact: Option<u64>,
    pub audit: AuditReport,
    pub row: BenchRow,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    match (num, den) {
        (0, 0) => Some(1.0),
        (_, 0) => None,
        _ => Some(num as f64 / den as f64),
    }
}

fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map_or_else(|| "inf".to_string(), |r| format!("{r:.6}"))
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.family,
            self.n,
            self.m,
            self.kind.as_str(),
            self.k,
            self.alg_weight,
            self.exact_weight.map_or(-1, |w| w as i64),
            self.dual_lb,
            if self.exact_weight.is_some() { fmt_opt_f64(self.ratio_exact) } else { "-1".to_string() },
            fmt_opt_f64(self.ratio_dual),
            self.phases,
            self.iters,
            self.audit_pass
        )
    }
}

/// Solves and audits an existing instance.
pub fn run_instance(inst: Instance, seed: u64, family: Family, exact: bool, counting: bool) -> Result<BenchRun> {
    let report = solve(&inst)?;
    let exact_weight = if exact { Some(exact_opt_bruteforce(&inst)?.0) } else { None };
    let audit = audit_solve(&inst, &report, counting)?;
    let row = BenchRow {
        seed,
        family,
        n: inst.graph.n(),
        m: inst.graph.m(),
        kind: inst.kind,
        k: inst.k(),
        alg_weight: report.weight,
        exact_weight,
        dual_lb: report.dual_lower_bound.to_string(),
        ratio_exact: exact_weight.and_then(|w| ratio(report.weight, w)),
        ratio_dual: report.ratio_vs_dual,
        phases: report.phases.len(),
        iters: report.iterations,
        audit_pass: audit.passed(),
    };
    Ok(BenchRun {
        instance: inst,
        report,
        exact: exact_weight,
        audit,
        row,
    })
}

pub fn run_seed(config: &BenchConfig, seed: u64) -> Result<BenchRun> {
    let inst = generate(&config.spec(seed))?;
    run_instance(inst, seed, config.family, config.exact, config.counting)
}

/// Worker count: `BISET_SNDP_THREADS` if set and positive, else rayon's default.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs every seed in `seeds` on a worker pool; results come back in seed order.
pub fn run_bench(config: &BenchConfig, seeds: std::ops::RangeInclusive<u64>) -> Result<Vec<BenchRun>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::InternalInvariant(format!("worker pool: {e}")))?;
    let seeds: Vec<u64> = seeds.collect();
    pool.install(|| seeds.par_iter().map(|&s| run_seed(config, s)).collect())
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.to_csv());
    }
    out
}
