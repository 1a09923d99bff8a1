//! Command-line front end. Exit status: 0 success, 1 invalid configuration,
//! 2 data error, 3 fit failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::data::Cadence;
use crate::error::{Error, ErrorClass, Result};
use crate::pipeline::{self, Outcome};
use crate::synth::{
    gen_iid_gaussian, gen_intraday_modulated, gen_planted_relaxation, prices_from_returns, synthetic_calendar,
    u_shaped_factors, KernelSide, PlantedRelaxationSpec,
};

#[derive(Debug, Parser)]
#[command(name = "largevol", version, about = "Relaxation dynamics around large volatility events")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Conditioned volatility profiles and power-law fits per threshold.
    Analyze(RunArgs),
    /// Aftershock counts around main shocks.
    Omori(RunArgs),
    /// Write a synthetic price series.
    Synth(SynthArgs),
    /// Estimate the intraday volatility pattern.
    Pattern(RunArgs),
    /// List the events above each threshold.
    Events(RunArgs),
}

/// Flags shared by the analysis subcommands. Each overrides the matching
/// key of `--config`.
#[derive(Debug, Args)]
struct RunArgs {
    /// Flat `key = value` file with run settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<String>,
    /// 1min, 5min, daily, ...
    #[arg(long)]
    cadence: Option<String>,
    #[arg(long)]
    slots_per_day: Option<String>,
    /// Comma-separated threshold multiples of sigma.
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long)]
    no_intraday_removal: bool,
    /// Drop returns that span two calendar dates.
    #[arg(long)]
    drop_overnight: bool,
    /// CSV of `date,origin[,note]` event labels.
    #[arg(long)]
    labels: Option<String>,
    #[arg(long)]
    min_separation: Option<String>,
    #[arg(long)]
    max_lag: Option<String>,
    #[arg(long)]
    fit_min: Option<String>,
    #[arg(long)]
    fit_max: Option<String>,
    /// Lower end of the tail window for tail_slope fits.
    #[arg(long)]
    tail_min: Option<String>,
    #[arg(long, value_parser = ["free", "zero"])]
    tau: Option<String>,
    #[arg(long, value_parser = ["full_fit", "tail_slope"])]
    method: Option<String>,
    /// Bootstrap replicas for exponent errors (0 disables).
    #[arg(long)]
    bootstrap: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, value_parser = ["none", "shuffle"])]
    surrogate: Option<String>,
    #[arg(long, value_parser = ["all", "sign", "origin"])]
    split: Option<String>,
    /// Main-shock threshold multiple for omori.
    #[arg(long)]
    main_threshold: Option<String>,
    /// Comma-separated aftershock threshold multiples for omori.
    #[arg(long)]
    zeta1: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_file_text(&text)?;
        }
        let flags = [
            ("input", self.input),
            ("cadence", self.cadence),
            ("slots_per_day", self.slots_per_day),
            ("thresholds", self.thresholds),
            ("labels", self.labels),
            ("min_separation", self.min_separation),
            ("max_lag", self.max_lag),
            ("fit_min", self.fit_min),
            ("fit_max", self.fit_max),
            ("tail_min", self.tail_min),
            ("tau", self.tau),
            ("method", self.method),
            ("bootstrap", self.bootstrap),
            ("seed", self.seed),
            ("surrogate", self.surrogate),
            ("split", self.split),
            ("main_threshold", self.main_threshold),
            ("zeta1", self.zeta1),
            ("out", self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.no_intraday_removal {
            cfg.intraday_removal = false;
        }
        if self.drop_overnight {
            cfg.drop_overnight = true;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Independent Gaussian returns.
    Iid,
    /// Relaxation kernels planted around shocks.
    Planted,
    /// Planted series multiplied by a U-shaped intraday profile.
    Intraday,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "planted")]
    mode: Mode,
    /// Number of returns (the file has one more price).
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    sigma0: f64,
    /// Expected shocks per 100 000 steps.
    #[arg(long, default_value_t = 50.0)]
    shock_rate: f64,
    /// Shock size in units of sigma0.
    #[arg(long, default_value_t = 30.0)]
    shock_magnitude: f64,
    #[arg(long, default_value_t = 3.0)]
    boost: f64,
    #[arg(long, default_value_t = 0.3)]
    exponent: f64,
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    /// Kernel before shocks, when it differs from the one after.
    #[arg(long)]
    boost_before: Option<f64>,
    #[arg(long)]
    exponent_before: Option<f64>,
    #[arg(long)]
    offset_before: Option<f64>,
    /// Largest distance a shock reaches.
    #[arg(long, default_value_t = 2000)]
    window: usize,
    #[arg(long, default_value = "1min")]
    cadence: String,
    #[arg(long, default_value_t = 240)]
    slots_per_day: usize,
    #[arg(long, default_value = "2000-01-03")]
    start: NaiveDate,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn synth(args: SynthArgs) -> Result<()> {
    let cadence: Cadence = args.cadence.parse()?;
    let spd = if cadence.is_daily() { 1 } else { args.slots_per_day };
    let after = KernelSide { boost: args.boost, exponent: args.exponent, offset: args.offset };
    let before = KernelSide {
        boost: args.boost_before.unwrap_or(after.boost),
        exponent: args.exponent_before.unwrap_or(after.exponent),
        offset: args.offset_before.unwrap_or(after.offset),
    };
    let spec = PlantedRelaxationSpec {
        n: args.n,
        sigma0: args.sigma0,
        shock_rate: args.shock_rate,
        before,
        after,
        shock_magnitude: args.shock_magnitude,
        window: args.window,
        seed: args.seed,
    };
    let returns = match args.mode {
        Mode::Iid => {
            spec.validate()?;
            gen_iid_gaussian(args.n, args.sigma0, args.seed)
        }
        Mode::Planted => gen_planted_relaxation(&spec)?.returns,
        Mode::Intraday => {
            if spd < 2 {
                return Err(Error::Config("intraday mode needs at least 2 slots per day".into()));
            }
            gen_intraday_modulated(&gen_planted_relaxation(&spec)?.returns, &u_shaped_factors(spd))?
        }
    };
    let calendar = synthetic_calendar(returns.len() + 1, cadence, spd, args.start);
    let prices = prices_from_returns(&returns, 100.0, &calendar)?;
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", args.out.display()));
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut w = BufWriter::new(File::create(&args.out).map_err(io)?);
    let fmt = if cadence.is_daily() { "%Y-%m-%d" } else { "%Y-%m-%d %H:%M:%S" };
    writeln!(w, "timestamp,price").map_err(io)?;
    for r in &prices {
        writeln!(w, "{},{}", r.timestamp.format(fmt), r.price).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Config => 1,
        ErrorClass::Data => 2,
        ErrorClass::Fit => 3,
    }
}

fn report(outcome: Outcome) -> i32 {
    for f in &outcome.failures {
        eprintln!("failed {}: {}", f.job, f.error);
    }
    outcome.worst().map_or(0, exit_code)
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a).map(|()| Outcome::default()),
        Command::Analyze(a) => a.into_config().and_then(|c| pipeline::analyze(&c)),
        Command::Omori(a) => a.into_config().and_then(|c| pipeline::omori(&c)),
        Command::Pattern(a) => a.into_config().and_then(|c| pipeline::pattern(&c)),
        Command::Events(a) => a.into_config().and_then(|c| pipeline::list_events(&c)),
    };
    match result {
        Ok(outcome) => report(outcome),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            exit_code(e.class())
        }
    }
}
