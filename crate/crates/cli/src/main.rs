//! `magbar`: band functions, edge currents and eigenvalue counts from the command line.

mod commands;
mod config;
mod output;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use magbar::{ErrorCategory, SolverOptions};
use output::{Format, Report, Sink};
use serde::Serialize;
use serde_json::Value;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Debug, Parser, Serialize)]
#[command(name = "magbar", version, about = "Spectral analysis of the magnetic-barrier Hamiltonian")]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Finite-difference intervals per fiber solve.
    #[arg(long, global = true, default_value_t = SolverOptions::default().resolution)]
    resolution: usize,
    /// Richardson levels.
    #[arg(long, global = true, default_value_t = SolverOptions::default().richardson)]
    richardson: usize,
}

impl Global {
    fn solver(&self) -> SolverOptions {
        SolverOptions { resolution: self.resolution, richardson: self.richardson, ..SolverOptions::default() }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
enum Command {
    /// Band table and plot data.
    Bands(commands::BandsArgs),
    /// Minima and effective masses of the even bands.
    Minima(commands::MinimaArgs),
    /// Large negative k: Airy asymptotics.
    Airy(commands::AiryArgs),
    /// Large positive k: harmonic-oscillator limit and parity splitting.
    Ho(commands::HoArgs),
    /// Energy window, Mourre constant and edge currents.
    Mourre(commands::MourreArgs),
    /// Admissible perturbation sizes for a window.
    Budget(commands::BudgetArgs),
    /// Envelope decay and strip localization.
    Localize(commands::LocalizeArgs),
    /// Eigenvalue counts of the 1D effective operator.
    Count1d(commands::Count1dArgs),
    /// Eigenvalue counts below the first band minimum in 2D.
    Count2d(commands::Count2dArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bands(_) => "bands",
            Command::Minima(_) => "minima",
            Command::Airy(_) => "airy",
            Command::Ho(_) => "ho",
            Command::Mourre(_) => "mourre",
            Command::Budget(_) => "budget",
            Command::Localize(_) => "localize",
            Command::Count1d(_) => "count1d",
            Command::Count2d(_) => "count2d",
        }
    }

    fn run(&self, solver: &SolverOptions) -> magbar::Result<Report> {
        match self {
            Command::Bands(a) => commands::bands(a, solver),
            Command::Minima(a) => commands::minima(a, solver),
            Command::Airy(a) => commands::airy(a, solver),
            Command::Ho(a) => commands::ho(a, solver),
            Command::Mourre(a) => commands::mourre(a, solver),
            Command::Budget(a) => commands::budget(a, solver),
            Command::Localize(a) => commands::localize(a, solver),
            Command::Count1d(a) => commands::count1d(a, solver),
            Command::Count2d(a) => commands::count2d(a, solver),
        }
    }
}

/// Window centre: `mid` or an explicit energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergySpec {
    Mid,
    Value(f64),
}

impl FromStr for EnergySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("mid") {
            return Ok(EnergySpec::Mid);
        }
        s.parse::<f64>().map(EnergySpec::Value).map_err(|_| format!("expected `mid` or a number, got {s:?}"))
    }
}

impl fmt::Display for EnergySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergySpec::Mid => f.write_str("mid"),
            EnergySpec::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for EnergySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

/// Resolved settings as `key = value` lines, readable back through `--config`.
fn echo_config(cli: &Cli) -> String {
    let mut out = format!("# magbar {} {}\n", env!("CARGO_PKG_VERSION"), cli.command.name());
    for part in [serde_json::to_value(&cli.global), serde_json::to_value(&cli.command)] {
        if let Ok(Value::Object(map)) = part {
            for (k, v) in map {
                if !v.is_null() {
                    out.push_str(&format!("{} = {}\n", k.replace('_', "-"), scalar(&v)));
                }
            }
        }
    }
    out
}

fn parse(argv: &[String]) -> Result<Cli, clap::Error> {
    let mut matches = Cli::command().try_get_matches_from(argv)?;
    Cli::from_arg_matches_mut(&mut matches)
}

/// Print a parse error, with usage text, and exit 2 (0 for help and version).
fn usage_exit(e: clap::Error) -> ! {
    use clap::error::ErrorKind;
    if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
        e.exit();
    }
    let text = e.render().to_string();
    eprint!("{text}");
    if !text.contains("Usage:") {
        eprintln!("\n{}", Cli::command().render_usage());
    }
    std::process::exit(2);
}

fn load_cli() -> Result<Cli, ExitCode> {
    let argv: Vec<String> = std::env::args().collect();
    let cli = parse(&argv).unwrap_or_else(|e| usage_exit(e));
    let Some(path) = cli.global.config.clone() else {
        return Ok(cli);
    };
    let entries = config::load(&path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })?;
    let merged = config::merge(&argv, cli.command.name(), &entries);
    Ok(parse(&merged).unwrap_or_else(|e| usage_exit(e)))
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Numerical => 1,
        ErrorCategory::Usage => 2,
        ErrorCategory::Resource => 3,
    }
}

fn main() -> ExitCode {
    let cli = match load_cli() {
        Ok(c) => c,
        Err(code) => return code,
    };
    if cli.global.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let solver = cli.global.solver();
    let name = cli.command.name();
    let sink = Sink { dir: cli.global.out.clone(), format: cli.global.format };
    let config_text = echo_config(&cli);
    let report = match solver.validate().and_then(|_| cli.command.run(&solver)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            if let Err(io) = sink.mark_failed(name, &e.to_string()) {
                eprintln!("error: {io}");
            }
            return ExitCode::from(exit_code(e.category()));
        }
    };
    if let Err(e) = sink.emit(name, &config_text, &report) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(3);
    }
    for c in &report.checks {
        println!("{:<40} {:>20.11e}  {:<28} {}", c.name, c.value, c.tolerance, if c.pass { "PASS" } else { "FAIL" });
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        if let Err(e) = sink.mark_failed(name, &format!("failed checks: {}", failed.join(", "))) {
            eprintln!("error: {e}");
        }
        ExitCode::from(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileArg {
    Algebraic,
    Soft,
}

impl From<ProfileArg> for magbar::counting::Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Algebraic => magbar::counting::Profile::Algebraic,
            ProfileArg::Soft => magbar::counting::Profile::Soft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadingArg {
    Distance,
    PrintedMax,
}

impl From<ReadingArg> for magbar::mourre::DnReading {
    fn from(r: ReadingArg) -> Self {
        match r {
            ReadingArg::Distance => magbar::mourre::DnReading::Distance,
            ReadingArg::PrintedMax => magbar::mourre::DnReading::PrintedMax,
        }
    }
}
