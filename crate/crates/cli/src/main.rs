//! `nemdv` command-line interface.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 solve failure or
//! failed audit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use nemdv_core::calendar::parse_timestamp;
use nemdv_core::engine::audit_dispatch;
use nemdv_core::fixtures::{Consumer, FixtureSet, DEFAULT_SEED};
use nemdv_core::io::{load_scenario_file, read_dispatch, write_dispatch, write_results_with, LoadedScenario};
use nemdv_core::sweep::RowStatus;
use nemdv_core::types::NEM2_NON_BYPASSABLE_CHARGE;
use nemdv_core::{
    build_export_prices, run_sweep, solve_scenario, Error, NemPolicy, PolicyKind, SolveOptions, SolveStatus, SweepOptions,
};

const EXIT_INPUT: u8 = 1;
const EXIT_SOLVE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "nemdv", version, about = "Behind-the-meter solar, storage and flexibility bill optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario; prints the bill and optionally writes the dispatch.
    Solve {
        #[command(flatten)]
        common: SolveArgs,
        /// Dispatch CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scenario file's sweep block and write a results CSV.
    Sweep {
        #[command(flatten)]
        common: SolveArgs,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Fill the wall_ms column.
        #[arg(long)]
        timing: bool,
    },
    /// Write the export-price series of every policy the scenario supports.
    Prices {
        #[arg(long)]
        scenario: PathBuf,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a dispatch CSV against a scenario.
    Audit {
        #[command(flatten)]
        common: SolveArgs,
        #[arg(long)]
        dispatch: PathBuf,
    },
    /// Write a synthetic consumer fixture (profiles, tariff, scenario.json).
    Fixtures {
        #[arg(long, value_enum)]
        consumer: ConsumerArg,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "2023-07-01T00:00")]
        start: String,
        #[arg(long, default_value_t = 744)]
        hours: usize,
        #[arg(long, value_enum, default_value = "nem3")]
        policy: PolicyArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Relative MIP gap at which branch and bound stops.
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Forbid simultaneous charging and discharging.
    #[arg(long)]
    strict_bes: bool,
}

impl SolveArgs {
    fn options(&self) -> Result<SolveOptions, Failure> {
        let mut o = SolveOptions::default();
        if let Some(g) = self.gap_tol {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Failure::input(format!("--gap-tol must be a non-negative number, got {g}")));
            }
            o.gap_tol = g;
        }
        o.strict_bes = self.strict_bes;
        Ok(o)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConsumerArg {
    Mep,
    Mdp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    NoNem,
    Nem1,
    Nem2,
    Nem3,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::NoNem => PolicyKind::NoNem,
            PolicyArg::Nem1 => PolicyKind::Nem1,
            PolicyArg::Nem2 => PolicyKind::Nem2,
            PolicyArg::Nem3 => PolicyKind::Nem3,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn solve(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_SOLVE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver(_) => EXIT_SOLVE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NEMDV_LOG", "warn")).init();
    ExitCode::from(run(std::env::args_os()))
}

fn run(argv: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Solve { common, out } => solve(&common, out.as_deref()),
        Command::Sweep {
            common,
            out,
            jobs,
            timing,
        } => sweep(&common, &out, jobs, timing),
        Command::Prices { scenario, out } => prices(&scenario, out.as_deref()),
        Command::Audit { common, dispatch } => audit(&common, &dispatch),
        Command::Fixtures {
            consumer,
            dir,
            start,
            hours,
            policy,
            seed,
        } => fixtures(consumer, &dir, &start, hours, policy.into(), seed),
    }
}

fn load(path: &Path) -> Result<LoadedScenario, Failure> {
    info!("loading {}", path.display());
    Ok(load_scenario_file(path)?)
}

fn solve(args: &SolveArgs, out: Option<&Path>) -> Result<(), Failure> {
    let opts = args.options()?;
    let loaded = load(&args.scenario)?;
    let r = solve_scenario(&loaded.scenario, &opts)?;
    if let (Some(path), Some(d)) = (out, &r.dispatch) {
        write_dispatch(d, Some(&loaded.scenario.calendar), path)?;
    }
    let b = r.bill;
    println!("status {}", r.status);
    if r.dispatch.is_some() {
        println!("demand_charge {}", b.demand_charge_total);
        println!("energy_charge {}", b.energy_charge_total);
        println!("export_revenue {}", b.export_revenue);
        println!("net_bill {}", b.net_bill);
        println!("objective {}", r.objective);
    }
    if !r.is_optimal() {
        return Err(Failure::solve(format!("solve ended with status {}", r.status)));
    }
    if !r.audit_passed() {
        for m in &r.months {
            for v in &m.audit.violations {
                eprintln!("steps {}..{}: {v}", m.range.start, m.range.end);
            }
        }
        return Err(Failure::solve("solution failed the feasibility audit"));
    }
    Ok(())
}

fn sweep(args: &SolveArgs, out: &Path, jobs: usize, timing: bool) -> Result<(), Failure> {
    let opts = SweepOptions {
        solve: args.options()?,
        jobs,
        keep_results: false,
    };
    let loaded = load(&args.scenario)?;
    let cfg = loaded
        .sweep
        .ok_or_else(|| Failure::input(format!("{} has no sweep block", args.scenario.display())))?;
    let rows = run_sweep(&cfg, &opts)?;
    write_results_with(&rows, out, timing)?;
    let failed: Vec<_> = rows
        .iter()
        .filter(|r| r.status != RowStatus::Solved(SolveStatus::Optimal))
        .collect();
    for r in &failed {
        match &r.error {
            Some(e) => warn!("{}: {e}", r.point),
            None => warn!("{}: {}", r.point, r.status.as_str()),
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::solve(format!("{} of {} sweep points did not solve to optimality", failed.len(), rows.len())))
    }
}

fn prices(path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let loaded = load(path)?;
    let s = &loaded.scenario;
    let nbc = match s.policy {
        NemPolicy::Nem2 { nbc } => nbc,
        _ => NEM2_NON_BYPASSABLE_CHARGE,
    };
    let mut policies = vec![
        (PolicyKind::NoNem, NemPolicy::NoNem),
        (PolicyKind::Nem1, NemPolicy::Nem1),
        (PolicyKind::Nem2, NemPolicy::Nem2 { nbc }),
    ];
    if let Some(acc) = &loaded.acc {
        policies.push((PolicyKind::Nem3, NemPolicy::Nem3 { acc_hourly: acc.clone() }));
    }
    let series = policies
        .iter()
        .map(|(_, p)| build_export_prices(p, &s.tariff, &s.calendar))
        .collect::<Result<Vec<_>, _>>()?;

    let mut header = vec!["hour".to_string(), "timestamp".into(), "energy_price".into()];
    header.extend(policies.iter().map(|(k, _)| k.as_str().to_string()));
    let mut text = header.join(",") + "\n";
    for t in 0..s.horizon() {
        let mut rec = vec![
            t.to_string(),
            s.calendar.get(t).timestamp.format("%Y-%m-%dT%H:%M").to_string(),
            format!("{:?}", s.tariff.energy_price.get(t)),
        ];
        rec.extend(series.iter().map(|x| format!("{:?}", x.get(t))));
        text += &rec.join(",");
        text.push('\n');
    }
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(e.to_string())),
    }
}

fn audit(args: &SolveArgs, dispatch: &Path) -> Result<(), Failure> {
    let opts = args.options()?;
    let loaded = load(&args.scenario)?;
    let d = read_dispatch(dispatch)?;
    let (bill, reports) = audit_dispatch(&loaded.scenario, &d, &opts)?;
    println!("net_bill {}", bill.net_bill);
    let mut bad = 0;
    for (range, rep) in &reports {
        for v in &rep.violations {
            println!("steps {}..{}: {v}", range.start, range.end);
            bad += 1;
        }
        if !rep.simultaneous_charge_discharge.is_empty() {
            info!(
                "steps {}..{}: simultaneous charge and discharge at {} steps",
                range.start,
                range.end,
                rep.simultaneous_charge_discharge.len()
            );
        }
    }
    if bad == 0 {
        println!("audit passed");
        Ok(())
    } else {
        Err(Failure::solve(format!("audit found {bad} violated rows or bounds")))
    }
}

fn fixtures(consumer: ConsumerArg, dir: &Path, start: &str, hours: usize, policy: PolicyKind, seed: u64) -> Result<(), Failure> {
    let start = parse_timestamp(start).ok_or_else(|| Failure::input(format!("bad --start timestamp `{start}`")))?;
    if hours == 0 {
        return Err(Failure::input("--hours must be positive"));
    }
    let kind = match consumer {
        ConsumerArg::Mep => Consumer::Mep,
        ConsumerArg::Mdp => Consumer::Mdp,
    };
    FixtureSet::new(kind, start, hours, seed).write(dir, policy)?;
    println!("{}", dir.join("scenario.json").display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(run(args(&["nemdv", "solve", "--bogus"])), EXIT_INPUT);
        assert_eq!(run(args(&["nemdv", "frobnicate"])), EXIT_INPUT);
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(run(args(&["nemdv", "--help"])), 0);
    }

    #[test]
    fn missing_scenario_is_input_error() {
        assert_eq!(run(args(&["nemdv", "solve", "--scenario", "/nonexistent/s.json"])), EXIT_INPUT);
    }

    #[test]
    fn negative_gap_is_rejected() {
        let a = SolveArgs {
            scenario: "x".into(),
            gap_tol: Some(-1.0),
            strict_bes: false,
        };
        assert!(a.options().is_err());
    }
}
