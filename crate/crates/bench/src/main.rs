use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ofdm_radar::{
    calibrate_noise, generate_frame, normalize, profile_window, sample_scene,
    synthesize_received, window_matrix, write_map_grid, NoiseSpec, OfdmConfig,
    PeriodogramProcessor, SceneConstraints, WindowKind,
};
use ofdm_radar_bench::config_file::{parse_config_file, SWEEP_KEYS};
use ofdm_radar_bench::{emit_csv, run_sweep, Strategy, SweepConfig, FULL_SCALE_TRIALS};

#[derive(Parser)]
#[command(
    name = "radar-bench",
    about = "Monte-Carlo benchmark of dual-window adaptive OFDM radar detection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR sweep over the detection strategies and write a CSV.
    Sweep(SweepArgs),
    /// Print mainlobe width and sidelobe level for the window catalog.
    ProfileWindows(ProfileArgs),
    /// Write one range-Doppler map as a text grid for offline plotting.
    DumpMap(DumpArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key=value file mirroring these flags; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lowest SNR of the grid, dB.
    #[arg(long, allow_negative_numbers = true)]
    snr_min: Option<f64>,
    /// Highest SNR of the grid, dB.
    #[arg(long, allow_negative_numbers = true)]
    snr_max: Option<f64>,
    /// Grid step, dB.
    #[arg(long)]
    snr_step: Option<f64>,
    /// Monte-Carlo trials per SNR point.
    #[arg(long)]
    trials: Option<usize>,
    /// Targets per scene.
    #[arg(long)]
    targets: Option<usize>,
    /// Match threshold of the adaptive strategy.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Master seed; scenes, frames and noise derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated strategies, or "all".
    #[arg(long)]
    strategies: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Measure runtimes in a separate serial pass replaying this many trials
    /// per SNR; the statistics pass then runs in parallel.
    #[arg(long)]
    timing_repeats: Option<usize>,
    /// Use the full-scale trial count (5000) instead of the desk-scale
    /// default.
    #[arg(long)]
    full_paper_scale: bool,
    /// Disable channel noise (the SNR grid then only labels rows).
    #[arg(long)]
    noiseless: bool,
}

#[derive(Args)]
struct ProfileArgs {
    /// Window length in samples.
    #[arg(long, default_value_t = 64)]
    length: usize,
    /// Spectrum oversampling factor.
    #[arg(long, default_value_t = 16)]
    oversample: usize,
    /// Attenuation of the Dolph-Chebyshev row, dB.
    #[arg(long, default_value_t = 80.0)]
    chebyshev_db: f64,
}

#[derive(Args)]
struct DumpArgs {
    /// Output path of the text grid.
    #[arg(long)]
    out: PathBuf,
    /// Scene/frame/noise seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Channel SNR in dB.
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    snr: f64,
    /// Targets in the sampled scene.
    #[arg(long, default_value_t = 3)]
    targets: usize,
    /// Window applied on both axes: rectangular, hamming, or chebyshev:<db>.
    #[arg(long, default_value = "chebyshev:80")]
    window: String,
    /// Disable channel noise.
    #[arg(long)]
    noiseless: bool,
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Sweep(args) => run_sweep_command(args),
        Command::ProfileWindows(args) => run_profile_command(args),
        Command::DumpMap(args) => run_dump_command(args),
    }
}

/// Value resolution order: explicit flag, then config file, then default.
struct Resolver {
    file: BTreeMap<String, String>,
}

impl Resolver {
    fn get<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> anyhow::Result<T>
    where
        T::Err: std::fmt::Display,
    {
        debug_assert!(SWEEP_KEYS.contains(&key));
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(raw) => raw.parse::<T>().map_err(|e| anyhow::anyhow!("config key '{key}': {e}")),
            None => Ok(default),
        }
    }

    fn get_flag(&self, key: &str, flag: bool) -> anyhow::Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.file.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(other) => bail!("config key '{key}': expected true/false, got '{other}'"),
        }
    }
}

fn run_sweep_command(args: SweepArgs) -> anyhow::Result<()> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let resolver = Resolver { file };

    let snr_min = resolver.get("snr-min", args.snr_min, -40.0)?;
    let snr_max = resolver.get("snr-max", args.snr_max, 10.0)?;
    let snr_step = resolver.get("snr-step", args.snr_step, 10.0)?;
    let default_trials = SweepConfig::default().trials;
    let mut trials = resolver.get("trials", args.trials, default_trials)?;
    let targets = resolver.get("targets", args.targets, 3)?;
    let epsilon = resolver.get("epsilon", args.epsilon, 10.0)?;
    let seed = resolver.get("seed", args.seed, 1)?;
    let strategies_raw = resolver.get("strategies", args.strategies.clone(), "all".to_string())?;
    let out = resolver.get("out", args.out.clone(), PathBuf::from("sweep.csv"))?;
    let timing_repeats = match args.timing_repeats {
        Some(v) => Some(v),
        None => resolver
            .file
            .get("timing-repeats")
            .map(|raw| raw.parse::<usize>())
            .transpose()
            .context("config key 'timing-repeats'")?,
    };
    if resolver.get_flag("full-paper-scale", args.full_paper_scale)? {
        trials = FULL_SCALE_TRIALS;
    }
    let noiseless = resolver.get_flag("noiseless", args.noiseless)?;

    if !(snr_step > 0.0) {
        bail!("snr-step must be positive");
    }
    if snr_max < snr_min {
        bail!("snr-max must not be below snr-min");
    }
    let mut snr_grid_db = Vec::new();
    let mut snr = snr_min;
    while snr <= snr_max + 1e-9 {
        snr_grid_db.push(snr);
        snr += snr_step;
    }

    let strategies = parse_strategies(&strategies_raw)?;
    let cfg = SweepConfig {
        snr_grid_db,
        trials,
        strategies,
        epsilon,
        seed,
        constraints: SceneConstraints { target_count: targets, ..SceneConstraints::default() },
        noiseless,
        timing_repeats,
        out: Some(out.clone()),
        verbose: true,
        ..SweepConfig::default()
    };

    let records = run_sweep(&cfg)?;
    emit_csv(&records, &out)?;

    println!("{:>8} {:>40} {:>40} {:>9}", "snr_db", "detection probability", "runtime vs cstc", "fallback");
    for r in &records {
        let det: Vec<String> = r
            .detection_probability
            .iter()
            .map(|(s, p)| format!("{}={:.3}", short_tag(*s), p))
            .collect();
        let rt: Vec<String> = r
            .normalized_runtime
            .iter()
            .map(|(s, p)| format!("{}={:.2}", short_tag(*s), p))
            .collect();
        println!(
            "{:>8.1} {:>40} {:>40} {:>9}",
            r.snr_db,
            det.join(" "),
            rt.join(" "),
            r.fallback_rate.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn short_tag(s: Strategy) -> &'static str {
    match s {
        Strategy::BstcResolution => "res",
        Strategy::BstcSidelobe => "side",
        Strategy::Cstc => "cstc",
        Strategy::Adaptive => "adap",
    }
}

fn parse_strategies(raw: &str) -> anyhow::Result<Vec<Strategy>> {
    if raw.trim() == "all" {
        return Ok(Strategy::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in raw.split(',') {
        let s = part.parse::<Strategy>()?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        bail!("no strategies given");
    }
    Ok(out)
}

fn run_profile_command(args: ProfileArgs) -> anyhow::Result<()> {
    let kinds = [
        WindowKind::Rectangular,
        WindowKind::Hamming,
        WindowKind::DolphChebyshev { attenuation_db: args.chebyshev_db },
    ];
    println!("{:<22} {:>10} {:>16} {:>14}", "window", "psl_db", "halfwidth_bins", "ripple_std_db");
    for kind in kinds {
        let p = profile_window(kind, args.length, args.oversample)?;
        println!(
            "{:<22} {:>10.2} {:>16} {:>14.3}",
            kind.label(),
            p.psl_db,
            p.mainlobe_halfwidth_bins,
            p.sidelobe_level_std_db
        );
    }
    Ok(())
}

fn parse_window(raw: &str) -> anyhow::Result<WindowKind> {
    let lower = raw.trim().to_ascii_lowercase();
    if lower == "rectangular" || lower == "rect" {
        return Ok(WindowKind::Rectangular);
    }
    if lower == "hamming" {
        return Ok(WindowKind::Hamming);
    }
    if let Some(db) = lower.strip_prefix("chebyshev:").or(lower.strip_prefix("dolph-chebyshev:"))
    {
        let attenuation_db: f64 = db.parse().context("chebyshev attenuation")?;
        return Ok(WindowKind::DolphChebyshev { attenuation_db });
    }
    bail!("unknown window '{raw}' (expected rectangular, hamming, or chebyshev:<db>)")
}

fn run_dump_command(args: DumpArgs) -> anyhow::Result<()> {
    let config = OfdmConfig::default();
    let kind = parse_window(&args.window)?;
    let window = window_matrix(kind, kind, &config)?;
    let processor = PeriodogramProcessor::new(&config)?;

    let constraints =
        SceneConstraints { target_count: args.targets, ..SceneConstraints::default() };
    let scene = sample_scene(&config, &constraints, args.seed)?;
    let ftx = generate_frame(&config, args.seed ^ 0x5EED)?;
    let noise =
        if args.noiseless { NoiseSpec::noiseless() } else { calibrate_noise(args.snr, &config)? };
    let frx = synthesize_received(&ftx, &scene, &noise, &config, args.seed ^ 0x4015E)?;
    let frame = normalize(&frx, &ftx)?;
    let map = processor.compute_map(&frame, &window)?;
    write_map_grid(&map, &args.out)?;

    println!("scene (window {}):", window.label());
    for t in &scene.targets {
        println!("  range {:7.2} m  velocity {:8.2} m/s", t.range_m, t.velocity_mps);
    }
    println!("wrote {}", args.out.display());
    Ok(())
}
