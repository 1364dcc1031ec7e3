use std::fs;
use std::num::NonZeroU32;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slot_market::equilibrium::{strong_duality_check, verify};
use slot_market::generate::{generate, CapacityProfile, GenConfig};
use slot_market::io::{InstanceFile, ReportFile, ReportFormat};
use slot_market::model::{schedule_cost, validate_instance, Money};
use slot_market::pipeline::{clear, Outcome, PipelineError, PolicyOptions};
use slot_market::windows::WindowPolicy;

const EXIT_BAD_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNVERIFIED: u8 = 3;

#[derive(Parser)]
#[command(name = "slot-market", version, about = "Clear a day's landing slot market")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the equilibrium schedule and landing prices for an instance.
    Solve(SolveArgs),
    /// Re-check a schedule and prices against an instance.
    Verify(VerifyArgs),
    /// Generate a seeded random instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct WindowArgs {
    /// Window length in slots for flights without an explicit window.
    #[arg(long)]
    window_base: Option<NonZeroU32>,
    /// Slots before the scheduled arrival admitted by generated windows.
    #[arg(long, default_value_t = 0)]
    pre_arrival: u32,
    /// Shift every window this many slots later.
    #[arg(long, default_value_t = 0)]
    slide: u32,
    /// Extend every window by this many later slots.
    #[arg(long)]
    stretch: Option<NonZeroU32>,
}

impl WindowArgs {
    fn options(&self) -> PolicyOptions {
        PolicyOptions {
            policy: self.window_base.map(|base| WindowPolicy::new(base, self.pre_arrival)),
            slide: self.slide,
            stretch: self.stretch,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Full,
    Summary,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    windows: WindowArgs,
    /// Write the report (or certificate) here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Full)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    windows: WindowArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CapacityArg {
    Uniform,
    Peaked,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    flights: usize,
    #[arg(long, default_value_t = 96)]
    slots: usize,
    #[arg(long, value_enum, default_value_t = CapacityArg::Uniform)]
    capacity_profile: CapacityArg,
    /// Inclusive range of criticality factors in cents per slot, `lo..hi`.
    #[arg(long, default_value = "0..500", value_parser = parse_range)]
    alpha_range: (i64, i64),
    /// Percentage of flights with a piecewise delay profile.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=100))]
    pct_piecewise: u8,
    #[arg(long, default_value = "12")]
    window_base: NonZeroU32,
    #[arg(long, default_value_t = 0)]
    pre_arrival: u32,
    #[arg(long, default_value = "5")]
    slot_minutes: NonZeroU32,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(text: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = text.split_once("..").ok_or_else(|| format!("expected lo..hi, got {text:?}"))?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo < 0 || lo > hi {
        return Err(format!("range {lo}..{hi} must satisfy 0 <= lo <= hi"));
    }
    Ok((lo, hi))
}

fn read(path: &Path) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_BAD_INPUT)
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), ExitCode> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_BAD_INPUT)
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path, windows: &WindowArgs) -> Result<slot_market::Instance, ExitCode> {
    let text = read(path)?;
    let file = InstanceFile::parse(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_BAD_INPUT)
    })?;
    windows.options().apply(&file).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_BAD_INPUT)
    })
}

fn solve(args: &SolveArgs) -> Result<ExitCode, ExitCode> {
    let inst = load_instance(&args.instance, &args.windows)?;
    let format = match args.format {
        Format::Full => ReportFormat::Full,
        Format::Summary => ReportFormat::Summary,
    };
    match clear(inst) {
        Ok(Outcome::Cleared(cleared)) => {
            emit(args.out.as_deref(), &cleared.report(format).to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Ok(outcome @ Outcome::Infeasible { .. }) => {
            let cert = outcome.certificate_file().expect("infeasible outcome carries a certificate");
            eprint!("{}", cert.render());
            emit(args.out.as_deref(), &cert.to_json())?;
            Ok(ExitCode::from(EXIT_INFEASIBLE))
        }
        Err(PipelineError::Equilibrium(e)) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(EXIT_UNVERIFIED))
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(EXIT_BAD_INPUT))
        }
    }
}

fn verify_report(args: &VerifyArgs) -> Result<ExitCode, ExitCode> {
    let inst = load_instance(&args.instance, &args.windows)?;
    let inst = validate_instance(inst).map_err(|e| {
        eprintln!("error: invalid instance: {e}");
        ExitCode::from(EXIT_BAD_INPUT)
    })?;
    let report = ReportFile::parse(&read(&args.report)?).map_err(|e| {
        eprintln!("error: {}: {e}", args.report.display());
        ExitCode::from(EXIT_BAD_INPUT)
    })?;
    let (sched, prices) =
        report.schedule().and_then(|s| Ok((s, report.price_system(inst.num_slots())?))).map_err(|e| {
            eprintln!("error: {}: {e}", args.report.display());
            ExitCode::from(EXIT_BAD_INPUT)
        })?;

    let check = verify(&inst, &sched, &prices);
    for v in &check.violations {
        eprintln!("violation [{}]: {}", v.condition().label(), v.describe());
    }
    if !check.ok {
        return Ok(ExitCode::from(EXIT_UNVERIFIED));
    }
    let gap = strong_duality_check(&inst, &sched, &prices);
    let cost = schedule_cost(&inst, &sched);
    let mut failed = false;
    if gap != Money::ZERO {
        eprintln!("violation [duality]: dual objective differs from schedule cost by {gap}");
        failed = true;
    }
    if report.totals.schedule_cost_cents != cost.cents() {
        eprintln!(
            "violation [totals]: report states schedule cost {} but the schedule costs {}",
            report.totals.schedule_cost_cents,
            cost.cents()
        );
        failed = true;
    }
    if failed {
        return Ok(ExitCode::from(EXIT_UNVERIFIED));
    }
    println!("equilibrium verified: schedule cost {} cents, duality gap 0", cost.cents());
    Ok(ExitCode::SUCCESS)
}

fn gen(args: &GenArgs) -> Result<ExitCode, ExitCode> {
    let cfg = GenConfig {
        seed: args.seed,
        flights: args.flights,
        slots: args.slots,
        capacity_profile: match args.capacity_profile {
            CapacityArg::Uniform => CapacityProfile::Uniform,
            CapacityArg::Peaked => CapacityProfile::Peaked,
        },
        alpha_range: args.alpha_range,
        pct_piecewise: args.pct_piecewise,
        window: WindowPolicy::new(args.window_base, args.pre_arrival),
        slot_minutes: args.slot_minutes.get(),
    };
    let inst = generate(&cfg).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_BAD_INPUT)
    })?;
    emit(args.out.as_deref(), &InstanceFile::from_instance(&inst).to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => solve(args),
        Command::Verify(args) => verify_report(args),
        Command::Gen(args) => gen(args),
    };
    result.unwrap_or_else(|code| code)
}
