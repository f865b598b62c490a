//! Command-line front end. Data goes to stdout (or `--out`), diagnostics to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{default_candidates, find_crossover, recommend_among, sweep, SweepSpec};
use crate::channels::{NoiseFamily, NoiseModel};
use crate::eavesdrop::{
    intercept_resend_bb84_mc, intercept_resend_bb84_with, wrong_pair_bell_attack,
    wrong_pair_bell_attack_mc, AttackOutcome, EveStrategy,
};
use crate::error::Error;
use crate::fidelity::{closed_form, verify_table_with, FidelityReport};
use crate::states::{BellLabel, DecoyScheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REGRESSION: i32 = 2;

/// `verify-table` fails when any cell deviates by at least this much.
pub const REGRESSION_THRESHOLD: f64 = 1e-9;

pub const CSV_HEADER: &str = "scheme,noise,parameter,fidelity_sim,fidelity_closed,abs_err";

#[derive(Debug, Parser)]
#[command(
    name = "decoy-noise",
    version,
    about = "Fidelity of decoy-qubit verification strings under AD, PD, CD and CR noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every closed-form table cell against density-matrix simulation.
    VerifyTable(VerifyArgs),
    /// Fidelity curves for several schemes over one noise parameter (CSV).
    Sweep(SweepArgs),
    /// Rank decoy schemes at a fixed noise parameter.
    Recommend(RecommendArgs),
    /// Locate where two schemes' fidelity curves cross.
    Crossover(CrossoverArgs),
    /// Simulate an eavesdropping attack.
    EveSim(EveArgs),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 21)]
    grid: usize,
    /// Add this offset to every closed form before comparing (mutation check).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    perturb: f64,
    /// Emit every grid point in the sweep CSV schema instead of one line per cell.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    noise: NoiseFamily,
    /// Comma-separated: bb84, bb84:<4 labels>, psi+, psi-, phi+, phi-, cluster, w3.
    #[arg(long, value_delimiter = ',', required = true)]
    schemes: Vec<DecoyScheme>,
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NoiseParam {
    /// Damping rate for ad/pd.
    #[arg(long, conflicts_with_all = ["phi", "theta"])]
    eta: Option<f64>,
    /// Dephasing angle (radians) for cd.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta")]
    phi: Option<f64>,
    /// Rotation angle (radians) for cr.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
}

impl NoiseParam {
    fn resolve(&self, family: NoiseFamily) -> Result<NoiseModel, Error> {
        let (value, flag) = match family {
            NoiseFamily::AmplitudeDamping | NoiseFamily::PhaseDamping => (self.eta, "--eta"),
            NoiseFamily::CollectiveDephasing => (self.phi, "--phi"),
            NoiseFamily::CollectiveRotation => (self.theta, "--theta"),
        };
        let value = value.ok_or_else(|| {
            Error::InvalidArgument(format!("noise `{family}` needs {flag}"))
        })?;
        family.with_parameter(value)
    }
}

#[derive(Debug, Args)]
struct RecommendArgs {
    #[arg(long)]
    noise: NoiseFamily,
    #[command(flatten)]
    param: NoiseParam,
    /// Candidates; defaults to bb84, the four Bell pairs and cluster.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<DecoyScheme>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CrossoverArgs {
    #[arg(long)]
    noise: NoiseFamily,
    #[arg(long)]
    a: DecoyScheme,
    #[arg(long)]
    b: DecoyScheme,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Attack {
    InterceptResend,
    WrongPair,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
struct EveArgs {
    #[arg(long, value_enum, default_value_t = Attack::InterceptResend)]
    attack: Attack,
    /// Run the intercept-resend accounting without an eavesdropper.
    #[arg(long)]
    no_eve: bool,
    /// Prepared Bell label for wrong-pair.
    #[arg(long, default_value = "psi+")]
    bell: BellLabel,
    /// Qubits Eve measures, 1-based, e.g. `2,3`.
    #[arg(long, default_value = "2,3", value_parser = parse_pair)]
    pair: (usize, usize),
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// Required for `--method mc`.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `i,j`, got `{s}`"))?;
    let a = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

/// Parses `argv` (program name first) and runs the command against real stdio.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Domain(#[from] Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn with_sink<F>(path: Option<&PathBuf>, out: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(p)?);
            body(&mut file)?;
            file.flush()?;
        }
        None => {
            body(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::VerifyTable(args) => verify(args, out, err),
        Command::Sweep(args) => {
            let (lo, hi) = args.noise.default_range();
            let spec = SweepSpec {
                schemes: args.schemes,
                family: args.noise,
                start: args.from.unwrap_or(lo),
                end: args.to.unwrap_or(hi),
                points: args.grid,
            };
            let reports = sweep(&spec)?;
            with_sink(args.out.as_ref(), out, |w| Ok(write_reports_csv(&reports, w)?))?;
            writeln!(err, "sweep: {} schemes x {} points", reports.len(), spec.points)?;
            Ok(EXIT_OK)
        }
        Command::Recommend(args) => {
            let noise = args.param.resolve(args.noise)?;
            let schemes = args.schemes.unwrap_or_else(default_candidates);
            let ranking = recommend_among(&noise, &schemes)?;
            with_sink(args.out.as_ref(), out, |w| {
                writeln!(w, "rank,tie_group,scheme,noise,parameter,fidelity")?;
                let mut rank = 0;
                for (group_idx, group) in ranking.ties.iter().enumerate() {
                    for scheme in group {
                        rank += 1;
                        let f = ranking
                            .ordered
                            .iter()
                            .find(|(s, _)| s == scheme)
                            .map(|(_, f)| *f)
                            .expect("ranked scheme present");
                        writeln!(
                            w,
                            "{rank},{},{scheme},{},{:?},{f:?}",
                            group_idx + 1,
                            noise.family(),
                            noise.parameter()
                        )?;
                    }
                }
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
        Command::Crossover(args) => {
            let (lo, hi) = args.noise.default_range();
            let (lo, hi) = (args.from.unwrap_or(lo), args.to.unwrap_or(hi));
            let root = find_crossover(&args.a, &args.b, args.noise, lo, hi)?;
            writeln!(out, "noise,a,b,from,to,crossover")?;
            writeln!(
                out,
                "{},{},{},{lo:?},{hi:?},{root:?}",
                args.noise, args.a, args.b
            )?;
            out.flush()?;
            Ok(EXIT_OK)
        }
        Command::EveSim(args) => eve_sim(args, out),
    }
}

fn verify(args: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let delta = args.perturb;
    if delta != 0.0 {
        writeln!(err, "verify-table: closed forms perturbed by {delta:e}")?;
    }
    let reports = verify_table_with(args.grid, |s, n| closed_form(s, n).map(|v| v + delta))?;
    with_sink(args.out.as_ref(), out, |w| {
        if args.csv {
            Ok(write_reports_csv(&reports, w)?)
        } else {
            writeln!(w, "scheme,noise,points,max_abs_deviation")?;
            for r in &reports {
                writeln!(
                    w,
                    "{},{},{},{:?}",
                    r.scheme,
                    r.noise,
                    r.grid.len(),
                    r.max_abs_deviation.unwrap_or(f64::NAN)
                )?;
            }
            Ok(())
        }
    })?;
    let failures: Vec<&FidelityReport> = reports
        .iter()
        .filter(|r| !(r.max_abs_deviation.unwrap_or(f64::INFINITY) < REGRESSION_THRESHOLD))
        .collect();
    for r in &failures {
        writeln!(
            err,
            "verify-table: {} / {} deviates by {:e}",
            r.scheme,
            r.noise,
            r.max_abs_deviation.unwrap_or(f64::NAN)
        )?;
    }
    if failures.is_empty() {
        writeln!(err, "verify-table: {} cells OK", reports.len())?;
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_REGRESSION)
    }
}

fn eve_sim(args: EveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let outcome = match (args.attack, args.method) {
        (_, MethodArg::Mc) if args.seed.is_none() => {
            return Err(Error::InvalidArgument("--method mc requires --seed".into()).into());
        }
        (Attack::InterceptResend, method) => {
            let strategy = if args.no_eve {
                EveStrategy::Absent
            } else {
                EveStrategy::InterceptResend
            };
            match method {
                MethodArg::Exact => intercept_resend_bb84_with(strategy),
                MethodArg::Mc => intercept_resend_bb84_mc(
                    strategy,
                    args.trials,
                    args.seed.expect("checked above"),
                )?,
            }
        }
        (Attack::WrongPair, MethodArg::Exact) => wrong_pair_bell_attack(args.bell, args.pair)?,
        (Attack::WrongPair, MethodArg::Mc) => wrong_pair_bell_attack_mc(
            args.bell,
            args.pair,
            args.trials,
            args.seed.expect("checked above"),
        )?,
    };
    write_attack(&outcome, out)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn write_attack(outcome: &AttackOutcome, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "quantity,label,value")?;
    writeln!(w, "detection_probability,,{:?}", outcome.detection_probability)?;
    for (label, p) in &outcome.outcome_distribution {
        writeln!(w, "outcome,\"{label}\",{p:?}")?;
    }
    for b in &outcome.eve_branches {
        writeln!(w, "eve_outcome_probability,{},{:?}", b.outcome, b.probability)?;
        writeln!(w, "eve_conditional_detection,{},{:?}", b.outcome, b.detection)?;
    }
    Ok(())
}

/// Writes reports in the shared sweep schema, rows ordered by (report, grid index).
pub fn write_reports_csv(reports: &[FidelityReport], w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        for (i, (&p, &sim)) in r.grid.iter().zip(&r.simulated).enumerate() {
            match &r.closed_form {
                Some(cf) => {
                    let c = cf[i];
                    writeln!(
                        w,
                        "{},{},{p:?},{sim:?},{c:?},{:?}",
                        r.scheme,
                        r.noise,
                        (sim - c).abs()
                    )?;
                }
                None => writeln!(w, "{},{},{p:?},{sim:?},,", r.scheme, r.noise)?,
            }
        }
    }
    Ok(())
}
