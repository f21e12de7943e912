//! Command-line front end: solve a single demand, sweep demands across
//! algorithms into CSV, or generate link gains for a channel file.
//!
//! Exit codes: 0 success, 2 parse/validation problems, 3 infeasible demand.
//! Reports go to stdout, diagnostics to stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spanpower::scenario::{
    self, load_channels, parse_demand_list, render_channel_csv, ScenarioConfig,
};
use spanpower::{Algorithm, Error, Report};

/// Environment variable holding a default config path.
const CONFIG_ENV: &str = "SPANPOWER_CONFIG";

#[derive(Parser)]
#[command(
    name = "spanpower",
    version,
    about = "Minimum system power channel assignment for multi front end radio links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one demand and print the solution report.
    Solve(SolveArgs),
    /// Solve a demand range per algorithm and write a comparison CSV.
    Sweep(SweepArgs),
    /// Fill in the gain_db column of a channel file.
    Gen(GenArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Channel CSV file: index,center_freq_mhz[,gain_db].
    #[arg(long)]
    channels: PathBuf,
    /// Scenario config file (key = value); falls back to $SPANPOWER_CONFIG,
    /// then to built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target rate in Mbps.
    #[arg(long)]
    demand: f64,
    /// greedy, mcmr, ncofdm, exact, or gapcut.
    #[arg(long, default_value = "greedy")]
    algorithm: Algorithm,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Demands as start:step:stop (inclusive) or a comma list; defaults to
    /// the config's demand list.
    #[arg(long)]
    demands: Option<String>,
    /// Comma-separated algorithms to compare.
    #[arg(long, default_value = "greedy,mcmr,ncofdm")]
    algorithms: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for sweep cells.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct GenArgs {
    /// Channel CSV file to read.
    #[arg(long)]
    channels: PathBuf,
    /// Scenario config file supplying defaults for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Link distance in meters.
    #[arg(long)]
    distance: Option<f64>,
    /// Path loss exponent.
    #[arg(long)]
    exponent: Option<f64>,
    /// Shadowing range in dB (uniform attenuation in [0, variation)).
    #[arg(long)]
    variation: Option<f64>,
    /// Shadowing seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Load the config from --config, $SPANPOWER_CONFIG, or defaults, and point
/// it at the given channel file.
fn resolve_config(path: Option<PathBuf>, channels: PathBuf) -> Result<ScenarioConfig, Error> {
    let mut config = match path.or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from)) {
        Some(p) => scenario::load_config(&p)?,
        None => ScenarioConfig::default(),
    };
    config.channels_path = Some(channels);
    Ok(config)
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    if !(args.demand.is_finite() && args.demand > 0.0) {
        return Err(Error::validation("demand must be positive"));
    }
    let config = resolve_config(args.common.config, args.common.channels)?;
    config.validate()?;
    let grid = config.build_grid()?;
    let report = spanpower::solve(args.algorithm, &grid, &config.params, args.demand)?;
    print!("{}", format_report(&report, &grid, &config, args.demand));
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let mut config = resolve_config(args.common.config, args.common.channels)?;
    if let Some(demands) = &args.demands {
        config.demands_mbps = parse_demand_list(demands)?;
    }
    if config.demands_mbps.is_empty() {
        return Err(Error::validation(
            "no demands given (use --demands or the config)",
        ));
    }
    config.validate()?;
    let algorithms = args
        .algorithms
        .split(',')
        .map(|s| s.parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()?;

    let result = scenario::run_sweep(&config, &algorithms, args.jobs.max(1))?;
    result.write_csv(&args.out)?;
    for row in result.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} at {} Mbps failed: {}",
            row.algorithm,
            row.demand_mbps,
            row.error.as_deref().unwrap_or("")
        );
    }
    print!("{}", sweep_summary(&result, &algorithms, &args.out));
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let config = match args
        .config
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
    {
        Some(p) => scenario::load_config(&p)?,
        None => ScenarioConfig::default(),
    };
    let distance = args.distance.unwrap_or(config.distance_m);
    let exponent = args.exponent.unwrap_or(config.pathloss_exponent);
    let variation = args.variation.unwrap_or(config.variation_db);
    let seed = args.seed.unwrap_or(config.rng_seed);

    let rows = load_channels(&args.channels)?;
    let filled = scenario::synthesized_rows(&rows, distance, exponent, variation, seed)?;
    let mut comments = vec![format!(
        "link gain model: free-space loss at 1 m + 10*{exponent}*log10({distance} m) path loss{}",
        if variation > 0.0 {
            format!(" + uniform [0, {variation}) dB shadowing")
        } else {
            String::new()
        }
    )];
    if variation > 0.0 {
        comments.push(format!("rng: chacha8, seed {seed}"));
    }
    let text = render_channel_csv(&filled, &comments);
    std::fs::write(&args.out, text).map_err(|e| Error::io(&args.out, e))?;
    eprintln!("wrote {} channels to {}", filled.len(), args.out.display());
    Ok(())
}

/// Format a number to four significant digits.
fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).clamp(0, 12) as usize;
    format!("{x:.decimals$}")
}

fn format_report(
    report: &Report,
    grid: &spanpower::Grid,
    config: &ScenarioConfig,
    demand: f64,
) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let b = &report.breakdown;
    let _ = writeln!(out, "algorithm      {}", report.meta.algorithm);
    let _ = writeln!(out, "demand         {} Mbps", sig4(demand));
    let _ = writeln!(
        out,
        "achieved rate  {} Mbps",
        sig4(report.achieved_rate_mbps())
    );
    let _ = writeln!(out, "total power    {} mW", sig4(b.total_mw));
    let _ = writeln!(out, "  amplifier    {} mW", sig4(b.amplifier_mw));
    let _ = writeln!(out, "  fixed analog {} mW", sig4(b.fixed_analog_mw));
    let _ = writeln!(out, "  converter    {} mW", sig4(b.converter_mw));
    let _ = writeln!(
        out,
        "front ends     {} active of {}",
        report.active_front_ends(),
        config.params.num_front_ends
    );
    let _ = writeln!(
        out,
        "spectrum span  {} MHz",
        sig4(report.total_span_mhz(config.width_mhz))
    );
    for fe in 0..report.assignment.num_front_ends() {
        let set = report.assignment.set(fe);
        if set.is_empty() {
            let _ = writeln!(out, "front end {}: idle", fe + 1);
            continue;
        }
        let channels = set
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "front end {}: channels {channels}  span {} MHz",
            fe + 1,
            sig4(report.assignment.span_mhz(fe, config.width_mhz))
        );
        for &ch in set {
            let gain = grid.gain(ch).unwrap_or(f64::NAN);
            let p = report.allocation.power_mw(fe, ch);
            let rate = spanpower::model::channel_rate(
                p,
                gain,
                config.width_mhz,
                config.params.n0_mw_per_mhz,
            );
            let _ = writeln!(
                out,
                "  channel {ch}: {} mW, {} Mbps (gain {} dB)",
                sig4(p),
                sig4(rate),
                sig4(10.0 * gain.log10())
            );
        }
    }
    let _ = writeln!(out, "iterations     {}", report.meta.iterations);
    out
}

fn sweep_summary(
    result: &scenario::SweepResult,
    algorithms: &[Algorithm],
    out: &std::path::Path,
) -> String {
    use std::fmt::Write;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "wrote {} rows to {}",
        result.rows.len(),
        out.display()
    );
    for &alg in algorithms {
        let rows: Vec<_> = result
            .rows
            .iter()
            .filter(|r| r.algorithm == alg && r.error.is_none())
            .collect();
        if rows.is_empty() {
            let _ = writeln!(text, "{alg}: no feasible cells");
            continue;
        }
        let min = rows
            .iter()
            .min_by(|a, b| a.total_mw.partial_cmp(&b.total_mw).unwrap())
            .unwrap();
        let max = rows
            .iter()
            .max_by(|a, b| a.total_mw.partial_cmp(&b.total_mw).unwrap())
            .unwrap();
        let _ = writeln!(
            text,
            "{alg}: min {} mW at {} Mbps, max {} mW at {} Mbps",
            sig4(min.total_mw),
            sig4(min.demand_mbps),
            sig4(max.total_mw),
            sig4(max.demand_mbps)
        );
    }

    // demands where the cheapest algorithm changes
    let mut demands: Vec<f64> = result.rows.iter().map(|r| r.demand_mbps).collect();
    demands.dedup();
    let cheapest = |d: f64| -> Option<Algorithm> {
        result
            .rows
            .iter()
            .filter(|r| r.demand_mbps == d && r.error.is_none())
            .min_by(|a, b| a.total_mw.partial_cmp(&b.total_mw).unwrap())
            .map(|r| r.algorithm)
    };
    let mut crossovers = Vec::new();
    for pair in demands.windows(2) {
        if let (Some(a), Some(b)) = (cheapest(pair[0]), cheapest(pair[1])) {
            if a != b {
                crossovers.push(format!("{} Mbps: {a} -> {b}", sig4(pair[1])));
            }
        }
    }
    if let Some(first) = demands.first().and_then(|&d| cheapest(d)) {
        if crossovers.is_empty() {
            let _ = writeln!(text, "cheapest: {first} at every demand");
        } else {
            let _ = writeln!(
                text,
                "cheapest: {first} at {} Mbps, then crossovers at {}",
                sig4(demands[0]),
                crossovers.join(", ")
            );
        }
    }
    text
}
