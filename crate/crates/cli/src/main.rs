//! `biset-sndp`: generate, solve, audit and benchmark instances.

use std::fs;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sndp_core::graph::to_dot;
use sndp_core::harness::{run_bench, to_csv, BenchConfig};
use sndp_core::oracle::audit_solve;
use sndp_core::{generate, solve, Family, GeneratorSpec, Instance, Kind, SolveReport};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] sndp_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("audit failed: {0} of {1} checks")]
    AuditFailed(usize, usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(sndp_core::Error::Infeasible(_) | sndp_core::Error::Uncoverable) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "biset-sndp", version, about = "Node-weighted survivable network design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planar instance.
    Gen {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        demands: usize,
        #[arg(long, default_value_t = 1)]
        kmax: u32,
        #[arg(long, value_parser = parse_kind, default_value = "EC")]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance and write the report.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write the per-iteration trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Re-check a solve report against its instance.
    Audit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Also audit the counting argument at every iteration.
        #[arg(long)]
        counting: bool,
        /// Write every check as JSON lines.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate, solve and audit a range of seeds; write a CSV.
    Bench {
        #[arg(long, value_parser = parse_seeds)]
        seeds: RangeInclusive<u64>,
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long, value_parser = parse_kind, default_value = "EC")]
        kind: Kind,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        demands: usize,
        #[arg(long, default_value_t = 2)]
        kmax: u32,
        /// Compute exact optima by branch and bound.
        #[arg(long)]
        exact: bool,
        /// Audit the counting argument at every iteration.
        #[arg(long)]
        counting: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write Graphviz DOT, highlighting a solution if given.
    ExportDot {
        #[arg(long = "in")]
        input: PathBuf,
        /// A solve report whose solution is highlighted.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: sndp_core::Error| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<Kind, String> {
    s.parse().map_err(|e: sndp_core::Error| e.to_string())
}

fn parse_seeds(s: &str) -> std::result::Result<RangeInclusive<u64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: u64 = a.parse().map_err(|_| format!("bad seed {a:?}"))?;
    let b: u64 = b.trim_start_matches('=').parse().map_err(|_| format!("bad seed {b:?}"))?;
    if a > b {
        return Err(format!("empty seed range {s}"));
    }
    Ok(a..=b)
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            family,
            n,
            demands,
            kmax,
            kind,
            seed,
            out,
        } => {
            let inst = generate(&GeneratorSpec::new(family, n, demands, kmax, kind, seed))?;
            write(&out, &inst.to_json())
        }
        Command::Solve { input, out, trace } => {
            let inst = Instance::from_json(&read(&input)?)?;
            let report = solve(&inst)?;
            write(&out, &report.to_json())?;
            if let Some(path) = trace {
                let mut lines = String::new();
                for phase in &report.phases {
                    for line in phase.cover.trace_lines() {
                        lines.push_str(&line);
                        lines.push('\n');
                    }
                }
                write(&path, &lines)?;
            }
            println!("{}", report.summary());
            Ok(())
        }
        Command::Audit {
            input,
            report,
            counting,
            out,
        } => {
            let inst = Instance::from_json(&read(&input)?)?;
            let report = SolveReport::from_json(&read(&report)?)?;
            let audit = audit_solve(&inst, &report, counting)?;
            if let Some(path) = out {
                write(&path, &audit.to_json_lines())?;
            }
            let failed = audit.failures().count();
            for c in audit.failures() {
                eprintln!("FAIL {} [{}]: {}", c.name, c.instance, c.witness.as_deref().unwrap_or(""));
            }
            for note in &audit.notes {
                eprintln!("note: {note}");
            }
            println!("checks={} passed={} failed={}", audit.checks.len(), audit.checks.len() - failed, failed);
            if failed > 0 {
                return Err(CliError::AuditFailed(failed, audit.checks.len()));
            }
            Ok(())
        }
        Command::Bench {
            seeds,
            family,
            kind,
            n,
            demands,
            kmax,
            exact,
            counting,
            out,
        } => {
            let config = BenchConfig {
                family,
                kind,
                n,
                demand_count: demands,
                k_max: kmax,
                exact,
                counting,
            };
            let runs = run_bench(&config, seeds)?;
            let rows: Vec<_> = runs.iter().map(|r| r.row.clone()).collect();
            write(&out, &to_csv(&rows))?;
            let failed = rows.iter().filter(|r| !r.audit_pass).count();
            println!("rows={} audit_failed={failed}", rows.len());
            if failed > 0 {
                let total: usize = runs.iter().map(|r| r.audit.checks.len()).sum();
                let bad: usize = runs.iter().map(|r| r.audit.failures().count()).sum();
                return Err(CliError::AuditFailed(bad, total));
            }
            Ok(())
        }
        Command::ExportDot { input, solution, out } => {
            let inst = Instance::from_json(&read(&input)?)?;
            let chosen = match solution {
                Some(path) => Some(SolveReport::from_json(&read(&path)?)?.solution),
                None => None,
            };
            write(&out, &to_dot(&inst, chosen.as_ref()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(sndp_core::Error::Infeasible(cert)) = &e {
                eprintln!("certificate: {cert}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
