//! Point-target channel synthesis: echo superposition, AWGN, element-wise
//! normalization, SNR calibration, and random scene sampling.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{OfdmConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::frame::{ComplexFrame, FrameRole};

/// Reference range (m) for SNR calibration: the weakest-possible target of the
/// benchmark scenario region.
pub const SNR_REFERENCE_RANGE_M: f64 = 80.0;
/// Reference radar cross-section (m^2) for SNR calibration.
pub const SNR_REFERENCE_RCS_M2: f64 = 10.0;

/// A point scatterer characterized by ground-truth kinematics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub range_m: f64,
    /// Radial velocity; positive values map to positive Doppler bins.
    pub velocity_mps: f64,
    pub rcs_m2: f64,
    /// Reflection phase offset, in [0, 2 pi).
    pub phase_rad: f64,
}

/// The set of targets visible to one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub targets: Vec<Target>,
}

impl Scene {
    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    pub fn validate(&self, config: &OfdmConfig) -> Result<()> {
        for (i, t) in self.targets.iter().enumerate() {
            if !(t.range_m > 0.0) {
                return Err(Error::InvalidScene(format!("target {i}: range must be positive")));
            }
            if !(t.rcs_m2 > 0.0) {
                return Err(Error::InvalidScene(format!("target {i}: rcs must be positive")));
            }
            if !(0.0..TAU).contains(&t.phase_rad) {
                return Err(Error::InvalidScene(format!("target {i}: phase outside [0, 2pi)")));
            }
            let delay = 2.0 * t.range_m / SPEED_OF_LIGHT;
            if delay >= config.max_unambiguous_delay_s() {
                return Err(Error::InvalidScene(format!(
                    "target {i}: round-trip delay {delay:.3e} s exceeds the cyclic-prefix budget {:.3e} s",
                    config.max_unambiguous_delay_s()
                )));
            }
        }
        Ok(())
    }
}

/// Per-element complex AWGN power of the received frame, together with the
/// sweep SNR it was calibrated from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
    pub snr_db: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self { variance: 0.0, snr_db: f64::INFINITY }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= 0.0) || !self.variance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise variance {} must be finite and non-negative",
                self.variance
            )));
        }
        Ok(())
    }
}

/// Deterministic channel parameters of one echo: amplitude from the
/// monostatic radar equation with unit gains, two-way delay, and Doppler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoParams {
    pub amplitude: f64,
    pub delay_s: f64,
    pub doppler_hz: f64,
}

/// Maps a target onto its echo parameters.
///
/// amplitude = sqrt(c^2 rcs / ((4 pi)^3 R^4 f0^2)), delay = 2R/c,
/// doppler = 2 v f0 / c.
pub fn target_physicals(target: &Target, config: &OfdmConfig) -> Result<EchoParams> {
    if !(target.range_m > 0.0) {
        return Err(Error::InvalidScene("target range must be positive".into()));
    }
    if !(target.rcs_m2 > 0.0) {
        return Err(Error::InvalidScene("target rcs must be positive".into()));
    }
    let delay_s = 2.0 * target.range_m / SPEED_OF_LIGHT;
    if delay_s >= config.max_unambiguous_delay_s() {
        return Err(Error::InvalidScene(format!(
            "round-trip delay {delay_s:.3e} s exceeds the cyclic-prefix budget {:.3e} s",
            config.max_unambiguous_delay_s()
        )));
    }
    let doppler_hz = 2.0 * target.velocity_mps * config.carrier_freq_hz / SPEED_OF_LIGHT;
    let four_pi = 4.0 * std::f64::consts::PI;
    let amplitude = (SPEED_OF_LIGHT * SPEED_OF_LIGHT * target.rcs_m2
        / (four_pi.powi(3) * target.range_m.powi(4) * config.carrier_freq_hz.powi(2)))
    .sqrt();
    Ok(EchoParams { amplitude, delay_s, doppler_hz })
}

/// One echo ready for frame synthesis: channel parameters plus the combined
/// phase (reflection phase minus the carrier rotation over the delay).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Echo {
    pub params: EchoParams,
    pub phase_rad: f64,
}

impl Echo {
    pub fn from_target(target: &Target, config: &OfdmConfig) -> Result<Self> {
        let params = target_physicals(target, config)?;
        let phase_rad = target.phase_rad - TAU * config.carrier_freq_hz * params.delay_s;
        Ok(Self { params, phase_rad })
    }
}

/// Superimposes echoes of the transmitted frame plus complex AWGN.
///
/// Element (k, l) accumulates, per echo, amplitude * e^{j phase} * e^{+j2 pi
/// T_O f_D l} * e^{-j2 pi tau k df} * ftx[k, l]. The noise realization depends
/// only on the seed, the dimensions and the variance, never on the echo list,
/// so scenes can be compared against an identical noise draw.
pub fn synthesize_from_echoes(
    ftx: &ComplexFrame,
    echoes: &[Echo],
    noise: &NoiseSpec,
    config: &OfdmConfig,
    seed: u64,
) -> Result<ComplexFrame> {
    config.validate()?;
    noise.validate()?;
    if ftx.role() != FrameRole::Transmitted {
        return Err(Error::InvalidArgument("synthesis needs a transmitted frame".into()));
    }
    if !ftx.matches_config(config) {
        return Err(Error::InvalidArgument(format!(
            "frame is {} x {}, config expects {} x {}",
            ftx.rows(),
            ftx.cols(),
            config.subcarriers,
            config.symbols
        )));
    }

    let n = config.subcarriers;
    let m = config.symbols;
    let mut out = ComplexFrame::zeros(n, m, FrameRole::Received);

    let mut row_phasors = vec![Complex64::new(0.0, 0.0); n];
    let mut col_phasors = vec![Complex64::new(0.0, 0.0); m];
    for echo in echoes {
        let gain = Complex64::from_polar(echo.params.amplitude, echo.phase_rad);
        for (k, p) in row_phasors.iter_mut().enumerate() {
            *p = Complex64::from_polar(
                1.0,
                -TAU * echo.params.delay_s * k as f64 * config.subcarrier_spacing_hz,
            );
        }
        for (l, p) in col_phasors.iter_mut().enumerate() {
            *p = Complex64::from_polar(
                1.0,
                TAU * config.symbol_duration_s * echo.params.doppler_hz * l as f64,
            );
        }
        let data = out.as_mut_slice();
        for k in 0..n {
            let row_factor = gain * row_phasors[k];
            for l in 0..m {
                data[k * m + l] += row_factor * col_phasors[l] * ftx.get(k, l);
            }
        }
    }

    if noise.variance > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = (noise.variance / 2.0).sqrt();
        for v in out.as_mut_slice() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re * sigma, im * sigma);
        }
    }
    Ok(out)
}

/// Synthesizes the received frame for a scene of point targets plus AWGN.
pub fn synthesize_received(
    ftx: &ComplexFrame,
    scene: &Scene,
    noise: &NoiseSpec,
    config: &OfdmConfig,
    seed: u64,
) -> Result<ComplexFrame> {
    scene.validate(config)?;
    let echoes: Vec<Echo> =
        scene.targets.iter().map(|t| Echo::from_target(t, config)).collect::<Result<_>>()?;
    synthesize_from_echoes(ftx, &echoes, noise, config, seed)
}

/// Element-wise division of the received frame by the transmitted frame,
/// isolating the channel response.
pub fn normalize(frx: &ComplexFrame, ftx: &ComplexFrame) -> Result<ComplexFrame> {
    if frx.role() != FrameRole::Received || ftx.role() != FrameRole::Transmitted {
        return Err(Error::InvalidArgument(
            "normalization divides a received frame by a transmitted frame".into(),
        ));
    }
    if frx.rows() != ftx.rows() || frx.cols() != ftx.cols() {
        return Err(Error::InvalidArgument("frame dimensions differ".into()));
    }
    let mut out = frx.clone().with_role(FrameRole::Normalized);
    for (o, t) in out.as_mut_slice().iter_mut().zip(ftx.as_slice()) {
        if t.norm_sqr() == 0.0 {
            return Err(Error::InternalInvariant(
                "transmitted frame contains a zero symbol".into(),
            ));
        }
        *o /= *t;
    }
    Ok(out)
}

/// Noise variance for a sweep SNR, referenced to the echo amplitude of an
/// `SNR_REFERENCE_RCS_M2` target at `SNR_REFERENCE_RANGE_M`: variance =
/// b_ref^2 / 10^(snr/10).
pub fn calibrate_noise(snr_db: f64, config: &OfdmConfig) -> Result<NoiseSpec> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("snr {snr_db} dB must be finite")));
    }
    let reference = Target {
        range_m: SNR_REFERENCE_RANGE_M,
        velocity_mps: 0.0,
        rcs_m2: SNR_REFERENCE_RCS_M2,
        phase_rad: 0.0,
    };
    let b_ref = target_physicals(&reference, config)?.amplitude;
    Ok(NoiseSpec { variance: b_ref * b_ref / 10f64.powf(snr_db / 10.0), snr_db })
}

/// How the pairwise separation minima combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationRule {
    /// Each pair must satisfy both the range and the velocity minimum.
    BothAxes,
    /// Each pair must satisfy the range minimum or the velocity minimum;
    /// pairs may be arbitrarily close on the other axis.
    EitherAxis,
}

/// Constraints for random scene generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConstraints {
    pub target_count: usize,
    pub range_bounds_m: (f64, f64),
    pub velocity_bounds_mps: (f64, f64),
    pub min_range_sep_m: f64,
    pub min_velocity_sep_mps: f64,
    /// Whether the two separation minima must hold jointly or alternatively.
    pub separation: SeparationRule,
    pub rcs_m2: f64,
    pub max_attempts: usize,
}

impl Default for SceneConstraints {
    /// Benchmark scenario: three 10 m^2 targets over [10, 80] m and
    /// [-100, 100] m/s, separated pairwise by 10 m and 10 m/s.
    fn default() -> Self {
        Self {
            target_count: 3,
            range_bounds_m: (10.0, 80.0),
            velocity_bounds_mps: (-100.0, 100.0),
            min_range_sep_m: 10.0,
            min_velocity_sep_mps: 10.0,
            separation: SeparationRule::BothAxes,
            rcs_m2: 10.0,
            max_attempts: 10_000,
        }
    }
}

impl SceneConstraints {
    pub fn validate(&self) -> Result<()> {
        if self.target_count == 0 {
            return Err(Error::InvalidArgument("scene needs at least one target".into()));
        }
        if !(self.range_bounds_m.0 > 0.0) || self.range_bounds_m.1 < self.range_bounds_m.0 {
            return Err(Error::InvalidArgument("bad range bounds".into()));
        }
        if self.velocity_bounds_mps.1 < self.velocity_bounds_mps.0 {
            return Err(Error::InvalidArgument("bad velocity bounds".into()));
        }
        if !(self.rcs_m2 > 0.0) {
            return Err(Error::InvalidArgument("rcs must be positive".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidArgument("sampler needs at least one attempt".into()));
        }
        Ok(())
    }
}

/// Rejection-samples a scene satisfying the constraints; deterministic for a
/// fixed seed.
pub fn sample_scene(config: &OfdmConfig, constraints: &SceneConstraints, seed: u64) -> Result<Scene> {
    constraints.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r_lo, r_hi) = constraints.range_bounds_m;
    let (v_lo, v_hi) = constraints.velocity_bounds_mps;

    for _ in 0..constraints.max_attempts {
        let targets: Vec<Target> = (0..constraints.target_count)
            .map(|_| Target {
                range_m: rng.random_range(r_lo..=r_hi),
                velocity_mps: rng.random_range(v_lo..=v_hi),
                rcs_m2: constraints.rcs_m2,
                phase_rad: rng.random_range(0.0..TAU),
            })
            .collect();

        let mut separated = true;
        'pairs: for i in 0..targets.len() {
            for j in i + 1..targets.len() {
                let dr = (targets[i].range_m - targets[j].range_m).abs();
                let dv = (targets[i].velocity_mps - targets[j].velocity_mps).abs();
                let ok = match constraints.separation {
                    SeparationRule::BothAxes => {
                        dr >= constraints.min_range_sep_m
                            && dv >= constraints.min_velocity_sep_mps
                    }
                    SeparationRule::EitherAxis => {
                        dr >= constraints.min_range_sep_m
                            || dv >= constraints.min_velocity_sep_mps
                    }
                };
                if !ok {
                    separated = false;
                    break 'pairs;
                }
            }
        }
        if separated {
            let scene = Scene { targets };
            scene.validate(config)?;
            return Ok(scene);
        }
    }
    Err(Error::SamplerExhausted { attempts: constraints.max_attempts })
}
