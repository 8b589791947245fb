//! Monte-Carlo SNR sweep over the four detection strategies.
//!
//! Every trial draws a scene, a symbol frame, and a noise realization from
//! seeds derived from the master seed and the trial index alone, so all
//! strategies inside a trial consume the identical frame, and all SNR points
//! share the same scenes and unit noise shapes (the SNR only scales the noise
//! amplitude). Detection statistics are therefore paired across strategies
//! and across the SNR axis, and estimates are reproducible for a fixed seed.
//!
//! Runtimes can be measured either in the same serial pass as the statistics
//! or, when `timing_repeats` is set, in a dedicated serial pass that replays
//! the first trials while the statistics pass runs parallel. Per strategy and
//! SNR the runtime statistic is the median, normalized by the CSTC median at
//! the same SNR when CSTC is part of the run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use ofdm_radar::{
    bstc, calibrate_noise, cstc, detect_adaptive, generate_frame, normalize, sample_scene,
    synthesize_received, window_matrix, AdaptiveMode, DetectionResult, NoiseSpec, OfdmConfig,
    PeriodogramProcessor, Scene, SceneConstraints, SearchRegion, WindowKind, WindowMatrix,
    WindowPair,
};

use crate::error::{BenchError, Result};

/// Sidelobe attenuation of the default sidelobe-optimized window.
pub const SIDELOBE_WINDOW_DB: f64 = 80.0;
/// Delay-axis search limit: the scenario's maximum range plus margin.
pub const MAX_SEARCH_RANGE_M: f64 = 100.0;
/// Trial count of the full-scale benchmark configuration.
pub const FULL_SCALE_TRIALS: usize = 5000;

/// One detection strategy of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    BstcResolution,
    BstcSidelobe,
    Cstc,
    Adaptive,
}

impl Strategy {
    pub const ALL: [Strategy; 4] =
        [Strategy::BstcResolution, Strategy::BstcSidelobe, Strategy::Cstc, Strategy::Adaptive];

    pub fn tag(&self) -> &'static str {
        match self {
            Strategy::BstcResolution => "bstc_resolution",
            Strategy::BstcSidelobe => "bstc_sidelobe",
            Strategy::Cstc => "cstc",
            Strategy::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bstc_resolution" => Ok(Strategy::BstcResolution),
            "bstc_sidelobe" => Ok(Strategy::BstcSidelobe),
            "cstc" => Ok(Strategy::Cstc),
            "adaptive" => Ok(Strategy::Adaptive),
            other => Err(BenchError::InvalidSweep(format!(
                "unknown strategy '{other}' (expected bstc_resolution, bstc_sidelobe, cstc or adaptive)"
            ))),
        }
    }
}

/// Per-target hit tolerance of the detection-probability score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub range_m: f64,
    pub velocity_mps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { range_m: 5.0, velocity_mps: 5.0 }
    }
}

/// Full sweep description.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub ofdm: OfdmConfig,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub strategies: Vec<Strategy>,
    pub epsilon: f64,
    pub seed: u64,
    pub constraints: SceneConstraints,
    pub tolerance: Tolerance,
    /// Replace the calibrated noise with a zero-noise channel (the SNR grid
    /// then only labels the rows).
    pub noiseless: bool,
    /// When set, runtime medians come from this many serially replayed
    /// trials per SNR and the statistics pass may run in parallel.
    pub timing_repeats: Option<usize>,
    /// CSV destination, carried for the CLI; `run_sweep` itself does not
    /// write it.
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ofdm: OfdmConfig::default(),
            snr_grid_db: (-4..=1).map(|i| 10.0 * i as f64).collect(),
            trials: 500,
            strategies: Strategy::ALL.to_vec(),
            epsilon: 10.0,
            seed: 1,
            constraints: SceneConstraints::default(),
            tolerance: Tolerance::default(),
            noiseless: false,
            timing_repeats: None,
            out: None,
            verbose: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        self.constraints.validate()?;
        if self.trials == 0 {
            return Err(BenchError::InvalidSweep("at least one trial required".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(BenchError::InvalidSweep("snr grid is empty".into()));
        }
        if !self.snr_grid_db.windows(2).all(|w| w[0] < w[1]) {
            return Err(BenchError::InvalidSweep("snr grid must be strictly increasing".into()));
        }
        if !self.snr_grid_db.iter().all(|v| v.is_finite()) {
            return Err(BenchError::InvalidSweep("snr grid must be finite".into()));
        }
        if self.strategies.is_empty() {
            return Err(BenchError::InvalidSweep("no strategies requested".into()));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(BenchError::InvalidSweep(format!(
                "epsilon {} must be finite and non-negative",
                self.epsilon
            )));
        }
        if let Some(0) = self.timing_repeats {
            return Err(BenchError::InvalidSweep(
                "timing-repeats must be at least 1 when given".into(),
            ));
        }
        Ok(())
    }

    /// Deduplicated strategies in canonical order.
    pub fn strategy_set(&self) -> Vec<Strategy> {
        let mut set: Vec<Strategy> = Vec::new();
        for s in Strategy::ALL {
            if self.strategies.contains(&s) && !set.contains(&s) {
                set.push(s);
            }
        }
        set
    }
}

/// Aggregated results of one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub trials: usize,
    /// Fraction of targets estimated within tolerance, per strategy.
    pub detection_probability: BTreeMap<Strategy, f64>,
    /// Median runtime per strategy, divided by the CSTC median at this SNR
    /// when CSTC was run; plain median seconds otherwise.
    pub normalized_runtime: BTreeMap<Strategy, f64>,
    /// Fraction of trials where the adaptive strategy fell back to CSTC;
    /// present only when the adaptive strategy was run.
    pub fallback_rate: Option<f64>,
}

/// Hits of one detection against the ground truth: estimates are paired to
/// targets by minimum total squared (range, velocity) distance, and a pair
/// scores when both coordinates fall inside the tolerance.
pub fn score_trial(truth: &Scene, detection: &DetectionResult, tolerance: &Tolerance) -> usize {
    let truth_pos: Vec<(f64, f64)> =
        truth.targets.iter().map(|t| (t.range_m, t.velocity_mps)).collect();
    let est_pos: Vec<(f64, f64)> =
        detection.estimates.iter().map(|e| (e.range_m, e.velocity_mps)).collect();
    if truth_pos.len() != est_pos.len() {
        return 0;
    }
    let pairing = match ofdm_radar::assign_pairs(&truth_pos, &est_pos) {
        Ok(p) => p,
        Err(_) => return 0,
    };
    pairing
        .iter()
        .enumerate()
        .filter(|(i, &j)| {
            (truth_pos[*i].0 - est_pos[j].0).abs() < tolerance.range_m
                && (truth_pos[*i].1 - est_pos[j].1).abs() < tolerance.velocity_mps
        })
        .count()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Trial seeds depend on the master seed, a purpose tag and the trial index
/// only, never on the SNR, so every SNR point replays the same scenes against
/// the same unit noise shapes.
fn derive_seed(master: u64, purpose: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(master ^ purpose.wrapping_mul(0xA076_1D64_78BD_642F)) ^ trial)
}

const PURPOSE_SCENE: u64 = 1;
const PURPOSE_FRAME: u64 = 2;
const PURPOSE_NOISE: u64 = 3;

struct SweepEnv {
    config: OfdmConfig,
    processor: PeriodogramProcessor,
    resolution_window: WindowMatrix,
    sidelobe_window: WindowMatrix,
    pair: WindowPair,
    region: SearchRegion,
}

impl SweepEnv {
    fn new(cfg: &SweepConfig) -> Result<Self> {
        let config = cfg.ofdm;
        let processor = PeriodogramProcessor::new(&config)?;
        let resolution_window =
            window_matrix(WindowKind::Rectangular, WindowKind::Rectangular, &config)?;
        let sidelobe_kind = WindowKind::DolphChebyshev { attenuation_db: SIDELOBE_WINDOW_DB };
        let sidelobe_window = window_matrix(sidelobe_kind, sidelobe_kind, &config)?;
        let pair = WindowPair::new(resolution_window.clone(), sidelobe_window.clone())?;
        let region = SearchRegion::for_max_range(&config, MAX_SEARCH_RANGE_M);
        Ok(Self { config, processor, resolution_window, sidelobe_window, pair, region })
    }
}

struct TrialOutput {
    hits: BTreeMap<Strategy, usize>,
    runtime_secs: BTreeMap<Strategy, f64>,
    fallback: Option<bool>,
}

fn run_trial(env: &SweepEnv, cfg: &SweepConfig, snr_db: f64, trial: usize) -> Result<TrialOutput> {
    let scene = sample_scene(
        &env.config,
        &cfg.constraints,
        derive_seed(cfg.seed, PURPOSE_SCENE, trial as u64),
    )?;
    let ftx = generate_frame(&env.config, derive_seed(cfg.seed, PURPOSE_FRAME, trial as u64))?;
    let noise = if cfg.noiseless {
        NoiseSpec::noiseless()
    } else {
        calibrate_noise(snr_db, &env.config)?
    };
    let frx = synthesize_received(
        &ftx,
        &scene,
        &noise,
        &env.config,
        derive_seed(cfg.seed, PURPOSE_NOISE, trial as u64),
    )?;
    let frame = normalize(&frx, &ftx)?;

    // Warm up allocator pages with one untimed map so the first timed
    // strategy is not charged for first-touch faults.
    let _ = env.processor.compute_map(&frame, env.processor.rect_window())?;

    let target_count = scene.target_count();
    let mut hits = BTreeMap::new();
    let mut runtime_secs = BTreeMap::new();
    let mut fallback = None;
    for strategy in cfg.strategy_set() {
        let (detection, took) = match strategy {
            Strategy::BstcResolution => {
                let r =
                    bstc(&env.processor, &frame, &env.resolution_window, target_count, &env.region)?;
                let t = r.runtime_secs();
                (r, t)
            }
            Strategy::BstcSidelobe => {
                let r =
                    bstc(&env.processor, &frame, &env.sidelobe_window, target_count, &env.region)?;
                let t = r.runtime_secs();
                (r, t)
            }
            Strategy::Cstc => {
                let r = cstc(&env.processor, &frame, target_count, &env.region)?;
                let t = r.runtime_secs();
                (r, t)
            }
            Strategy::Adaptive => {
                let r = detect_adaptive(
                    &env.processor,
                    &frame,
                    target_count,
                    &env.pair,
                    cfg.epsilon,
                    &env.region,
                )?;
                fallback = Some(r.mode == AdaptiveMode::Fallback);
                let t = r.total_runtime.as_secs_f64();
                (r.detection, t)
            }
        };
        hits.insert(strategy, score_trial(&scene, &detection, &cfg.tolerance));
        runtime_secs.insert(strategy, took);
    }
    Ok(TrialOutput { hits, runtime_secs, fallback })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("runtime values are finite"));
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Runs the sweep and aggregates one record per SNR point.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let env = SweepEnv::new(cfg)?;
    let strategies = cfg.strategy_set();
    let target_count = cfg.constraints.target_count;

    let mut records = Vec::with_capacity(cfg.snr_grid_db.len());
    for &snr_db in &cfg.snr_grid_db {
        if cfg.verbose {
            eprintln!("snr {snr_db:+.1} dB: {} trials ...", cfg.trials);
        }
        let stats: Vec<TrialOutput> = if cfg.timing_repeats.is_some() {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(&env, cfg, snr_db, t))
                .collect::<Result<_>>()?
        } else {
            (0..cfg.trials)
                .map(|t| run_trial(&env, cfg, snr_db, t))
                .collect::<Result<_>>()?
        };

        // Timing source: either the serially replayed prefix of the trial
        // sequence, or the statistics pass itself when it ran serially.
        let timing: Vec<TrialOutput> = match cfg.timing_repeats {
            Some(repeats) => (0..repeats)
                .map(|t| run_trial(&env, cfg, snr_db, t))
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let timing = if timing.is_empty() { &stats } else { &timing };

        let mut detection_probability = BTreeMap::new();
        let mut normalized_runtime = BTreeMap::new();
        for &s in &strategies {
            let total_hits: usize = stats.iter().map(|t| t.hits[&s]).sum();
            detection_probability
                .insert(s, total_hits as f64 / (target_count * cfg.trials) as f64);
            let mut times: Vec<f64> = timing.iter().map(|t| t.runtime_secs[&s]).collect();
            normalized_runtime.insert(s, median(&mut times));
        }
        if let Some(&cstc_median) = normalized_runtime.get(&Strategy::Cstc) {
            for v in normalized_runtime.values_mut() {
                *v /= cstc_median;
            }
        }
        let fallback_rate = if strategies.contains(&Strategy::Adaptive) {
            let count = stats.iter().filter(|t| t.fallback == Some(true)).count();
            Some(count as f64 / cfg.trials as f64)
        } else {
            None
        };

        records.push(SweepRecord {
            snr_db,
            trials: cfg.trials,
            detection_probability,
            normalized_runtime,
            fallback_rate,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ofdm_radar::{DetectorTag, PeakEstimate, SeparationRule, Target};
    use std::time::Duration;

    fn detection_at(positions: &[(f64, f64)]) -> DetectionResult {
        let config = OfdmConfig::default();
        let estimates = positions
            .iter()
            .map(|&(r, v)| {
                let mut e = PeakEstimate::from_bins(0, 0, 1.0, &config);
                e.range_m = r;
                e.velocity_mps = v;
                e
            })
            .collect();
        DetectionResult {
            estimates,
            detector: DetectorTag::Cstc,
            runtime: Duration::from_micros(10),
        }
    }

    fn scene_at(positions: &[(f64, f64)]) -> Scene {
        Scene {
            targets: positions
                .iter()
                .map(|&(r, v)| Target {
                    range_m: r,
                    velocity_mps: v,
                    rcs_m2: 10.0,
                    phase_rad: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn exact_estimates_score_full_hits() {
        let truth = scene_at(&[(20.0, 10.0), (50.0, -30.0), (70.0, 90.0)]);
        let det = detection_at(&[(20.0, 10.0), (50.0, -30.0), (70.0, 90.0)]);
        assert_eq!(score_trial(&truth, &det, &Tolerance::default()), 3);
    }

    #[test]
    fn six_meter_error_drops_one_hit() {
        let truth = scene_at(&[(20.0, 10.0), (50.0, -30.0), (70.0, 90.0)]);
        let det = detection_at(&[(26.0, 10.0), (50.0, -30.0), (70.0, 90.0)]);
        assert_eq!(score_trial(&truth, &det, &Tolerance::default()), 2);
    }

    #[test]
    fn permuted_estimates_still_score() {
        let truth = scene_at(&[(20.0, 10.0), (50.0, -30.0), (70.0, 90.0)]);
        let det = detection_at(&[(70.0, 90.0), (20.0, 10.0), (50.0, -30.0)]);
        assert_eq!(score_trial(&truth, &det, &Tolerance::default()), 3);
    }

    #[test]
    fn tolerance_boundary_is_exclusive() {
        let truth = scene_at(&[(20.0, 10.0)]);
        let det = detection_at(&[(25.0, 10.0)]);
        assert_eq!(score_trial(&truth, &det, &Tolerance::default()), 0);
        let just_inside = detection_at(&[(24.999, 10.0)]);
        assert_eq!(score_trial(&truth, &just_inside, &Tolerance::default()), 1);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SweepConfig::default();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = SweepConfig::default();
        cfg.snr_grid_db = vec![0.0, 0.0];
        assert!(cfg.validate().is_err());

        let mut cfg = SweepConfig::default();
        cfg.strategies.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = SweepConfig::default();
        cfg.timing_repeats = Some(0);
        assert!(cfg.validate().is_err());

        assert!(SweepConfig::default().validate().is_ok());
    }

    #[test]
    fn strategy_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.tag().parse::<Strategy>().unwrap(), s);
        }
        assert!("bogus".parse::<Strategy>().is_err());
    }

    /// A single noiseless trial with a widely separated scene recovers every
    /// target under every strategy.
    #[test]
    fn noiseless_well_separated_trial_is_perfect() {
        let cfg = SweepConfig {
            snr_grid_db: vec![0.0],
            trials: 1,
            noiseless: true,
            seed: 11,
            constraints: SceneConstraints {
                range_bounds_m: (40.0, 80.0),
                min_range_sep_m: 10.0,
                min_velocity_sep_mps: 88.0,
                separation: SeparationRule::BothAxes,
                ..SceneConstraints::default()
            },
            ..SweepConfig::default()
        };
        let records = run_sweep(&cfg).unwrap();
        assert_eq!(records.len(), 1);
        for (&s, &p) in &records[0].detection_probability {
            assert_eq!(p, 1.0, "strategy {s} not perfect");
        }
        assert!((records[0].normalized_runtime[&Strategy::Cstc] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_statistics_are_deterministic() {
        let cfg = SweepConfig {
            snr_grid_db: vec![-20.0, 0.0],
            trials: 6,
            seed: 5,
            timing_repeats: Some(2),
            ..SweepConfig::default()
        };
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.detection_probability, rb.detection_probability);
            assert_eq!(ra.fallback_rate, rb.fallback_rate);
            for &p in ra.detection_probability.values() {
                assert!((0.0..=1.0).contains(&p));
            }
            assert!((0.0..=1.0).contains(&ra.fallback_rate.unwrap()));
            assert_eq!(ra.normalized_runtime[&Strategy::Cstc], 1.0);
        }
    }

    #[test]
    fn runtime_normalization_without_cstc_stays_raw() {
        let cfg = SweepConfig {
            snr_grid_db: vec![0.0],
            trials: 2,
            strategies: vec![Strategy::BstcResolution],
            ..SweepConfig::default()
        };
        let records = run_sweep(&cfg).unwrap();
        let raw = records[0].normalized_runtime[&Strategy::BstcResolution];
        assert!(raw > 0.0 && raw < 1.0, "expected raw seconds, got {raw}");
        assert!(records[0].fallback_rate.is_none());
    }
}
