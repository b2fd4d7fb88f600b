use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use lbforge::baselines::is_seeded;
use lbforge::certificate::{parse_instance, replay, RatioCertificate};
use lbforge::knapsack::{Item, ProfitMode};
use lbforge::knapsack_adversaries::{thm1_guarantee, thm2_bound};
use lbforge::mpas_adversaries::{solve_tau_r, thm1_constant};
use lbforge::numerics::format_rational;
use lbforge::oracles::{brute_bin_packing, brute_knapsack};
use lbforge::report;
use lbforge::{run, Adversary, AlgorithmId, Params, RunError, RunSpec};

const EXIT_FAIL: u8 = 1;
const EXIT_CONTRACT: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser)]
#[command(name = "lbforge", version, about = "Adversarial lower-bound certificates for online packing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a removable-knapsack adversary against a baseline.
    KnapsackLb {
        #[arg(long, value_enum)]
        adversary: KnapsackAdversary,
        #[arg(long)]
        alg: String,
        #[arg(long)]
        k: usize,
        /// Estimate the thm2 branch from this many seeded runs.
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Play an MPAS adversary against a baseline.
    MpasLb {
        #[arg(long, value_enum)]
        adversary: MpasAdversary,
        #[arg(long)]
        alg: String,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "M")]
        m: Option<u64>,
        /// Defaults to the maximizer of the finite bound.
        #[arg(long)]
        t: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the bound constants and the exact small-k table.
    Bounds {
        #[arg(long)]
        json: bool,
    },
    /// Solve an instance file exactly.
    Oracle {
        #[arg(long, value_enum)]
        problem: OracleProblem,
        /// Bin count for the knapsack oracle.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Mode::Proportional)]
        mode: Mode,
        instance: PathBuf,
    },
    /// CSV of guarantees and measured baseline ratios per k.
    Table {
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        /// Also play every knapsack baseline at each k.
        #[arg(long)]
        measure: bool,
        #[arg(long, env = "LBFORGE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replay a certificate from its transcript and check the ratio.
    Replay {
        certificate: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Common {
    #[arg(long, env = "LBFORGE_SEED")]
    seed: Option<u64>,
    /// Certificate path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KnapsackAdversary {
    Thm1,
    Thm2,
}

#[derive(Clone, Copy, ValueEnum)]
enum MpasAdversary {
    Thm3,
    Thm4,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleProblem {
    Knapsack,
    Mpas,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Proportional,
    Unit,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<RunError>() {
                Some(r) if r.is_contract_violation() => EXIT_CONTRACT,
                Some(r) if r.is_invalid_request() => EXIT_INVALID,
                Some(_) => EXIT_FAIL,
                None => EXIT_INVALID,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::KnapsackLb { adversary, alg, k, trials, common } => {
            let adversary = match adversary {
                KnapsackAdversary::Thm1 => Adversary::Thm1,
                KnapsackAdversary::Thm2 => Adversary::Thm2,
            };
            if trials.is_some() && adversary != Adversary::Thm2 {
                bail!(RunError::InvalidRequest("--trials applies to thm2 only".into()));
            }
            let params = Params { k: Some(k), trials, ..Params::default() };
            certify(adversary, params, alg, common)
        }
        Command::MpasLb { adversary, alg, n, m, t, common } => {
            let adversary = match adversary {
                MpasAdversary::Thm3 => Adversary::Thm3,
                MpasAdversary::Thm4 => Adversary::Thm4,
            };
            let params = Params { n: Some(n), m, t, ..Params::default() };
            certify(adversary, params, alg, common)
        }
        Command::Bounds { json } => {
            bounds(json)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { problem, k, mode, instance } => {
            oracle(problem, k, mode, &instance)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Table { kmax, measure, seed, output } => {
            table(kmax, measure, seed, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { certificate, output } => {
            let text = fs::read_to_string(&certificate)
                .with_context(|| format!("reading {}", certificate.display()))?;
            let cert: RatioCertificate = serde_json::from_str(&text)
                .map_err(|e| RunError::InvalidRequest(format!("certificate JSON: {e}")))?;
            lbforge::certificate::recompute_ratio(&cert)?;
            let fresh = replay(&cert)?;
            emit(&fresh, output.as_deref())
        }
    }
}

fn certify(adversary: Adversary, params: Params, name: String, common: Common) -> anyhow::Result<ExitCode> {
    let seed = is_seeded(&name).then(|| common.seed.unwrap_or(0));
    let spec = RunSpec { adversary, params, algorithm: AlgorithmId { name, seed } };
    let cert = run(&spec)?;
    emit(&cert, common.output.as_deref())
}

fn emit(cert: &RatioCertificate, output: Option<&Path>) -> anyhow::Result<ExitCode> {
    let json = serde_json::to_string_pretty(cert)?;
    match output {
        Some(path) => fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => writeln!(io::stdout().lock(), "{json}")?,
    }
    eprintln!(
        "{} vs {}: ratio {} ({:.6}), reference {} ({:.6}): {}",
        cert.adversary,
        cert.algorithm.name,
        format_rational(&cert.ratio),
        cert.ratio_approx,
        format_rational(&cert.reference_bound),
        cert.reference_approx,
        if cert.pass { "pass" } else { "FAIL" }
    );
    Ok(if cert.pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAIL) })
}

fn bounds(as_json: bool) -> anyhow::Result<()> {
    let sol = solve_tau_r();
    let rows: Vec<(usize, String, String)> = (2..=10)
        .map(|k| (k, format_rational(&thm1_guarantee(k)), format_rational(&thm2_bound(k))))
        .collect();
    let mut out = io::stdout().lock();
    if as_json {
        let table: Vec<_> = rows.iter().map(|(k, a, b)| json!({"k": k, "thm1": a, "thm2": b})).collect();
        let value = json!({
            "thm1_constant": thm1_constant(),
            "tau": sol.tau,
            "R": sol.r,
            "iterations": sol.iterations,
            "small_k": table,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
    } else {
        writeln!(out, "thm1_constant {:.12}", thm1_constant())?;
        writeln!(out, "tau {:.9}", sol.tau)?;
        writeln!(out, "R {:.9}", sol.r)?;
        writeln!(out, "k thm1 thm2")?;
        for (k, a, b) in rows {
            writeln!(out, "{k} {a} {b}")?;
        }
    }
    Ok(())
}

fn oracle(problem: OracleProblem, k: usize, mode: Mode, path: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sizes = parse_instance(&text).map_err(|e| RunError::InvalidRequest(e.to_string()))?;
    let invalid = |e: lbforge::oracles::OracleError| RunError::InvalidRequest(e.to_string());
    let value = match problem {
        OracleProblem::Knapsack => {
            let items: Vec<Item> = sizes.into_iter().enumerate().map(|(i, s)| Item::new(i, s)).collect();
            let mode = match mode {
                Mode::Proportional => ProfitMode::Proportional,
                Mode::Unit => ProfitMode::Unit,
            };
            let sol = brute_knapsack(&items, k, mode).map_err(invalid)?;
            json!({"objective": sol.objective, "bins": sol.bins})
        }
        OracleProblem::Mpas => {
            let sol = brute_bin_packing(&sizes).map_err(invalid)?;
            json!({"peak": sol.bins.len(), "bins": sol.bins})
        }
    };
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(&value)?)?;
    Ok(())
}

fn table(kmax: usize, measure: bool, seed: u64, output: Option<&Path>) -> anyhow::Result<()> {
    let rows = report::table(kmax, measure, seed)?;
    let names: Vec<String> = rows
        .first()
        .map(|r| r.measured.iter().map(|m| m.algorithm.clone()).collect())
        .unwrap_or_default();
    let sink: Box<dyn Write> = match output {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(report::header(&names))?;
    for row in &rows {
        w.write_record(report::record(row))?;
    }
    w.flush()?;
    Ok(())
}
