//! Windowed 2D periodogram: range-Doppler map computation, bin/physical
//! conversions, and peak extraction.
//!
//! The map is the squared magnitude of a forward transform along the symbol
//! (Doppler) axis and a reverse-direction transform along the subcarrier
//! (delay) axis, both zero-padded to the configured transform sizes and scaled
//! by 1/(N*M). Peaks correspond to target delay/Doppler pairs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::config::{OfdmConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::frame::{ComplexFrame, FrameRole};
use crate::window::{WindowKind, WindowMatrix};

/// Non-negative power surface over delay bins (rows) and Doppler bins
/// (columns), stored row-major in delay-major order.
#[derive(Debug, Clone)]
pub struct RangeDopplerMap {
    power: Vec<f64>,
    delay_bins: usize,
    doppler_bins: usize,
    config: OfdmConfig,
    window_kinds: (WindowKind, WindowKind),
}

impl RangeDopplerMap {
    pub(crate) fn from_parts(
        power: Vec<f64>,
        config: OfdmConfig,
        window_kinds: (WindowKind, WindowKind),
    ) -> Self {
        let delay_bins = config.delay_transform_size;
        let doppler_bins = config.doppler_transform_size;
        debug_assert_eq!(power.len(), delay_bins * doppler_bins);
        Self { power, delay_bins, doppler_bins, config, window_kinds }
    }

    #[inline]
    pub fn power_at(&self, delay_bin: usize, doppler_bin: usize) -> f64 {
        self.power[delay_bin * self.doppler_bins + doppler_bin]
    }

    pub fn delay_bins(&self) -> usize {
        self.delay_bins
    }

    pub fn doppler_bins(&self) -> usize {
        self.doppler_bins
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.config
    }

    pub fn window_kinds(&self) -> (WindowKind, WindowKind) {
        self.window_kinds
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.power
    }

    pub(crate) fn row(&self, delay_bin: usize) -> &[f64] {
        &self.power[delay_bin * self.doppler_bins..(delay_bin + 1) * self.doppler_bins]
    }

    pub(crate) fn zero_bin(&mut self, delay_bin: usize, doppler_bin: usize) {
        self.power[delay_bin * self.doppler_bins + doppler_bin] = 0.0;
    }

    /// Largest power within the delay-restricted search region.
    pub fn max_in_region(&self, region: &SearchRegion) -> f64 {
        let mut best = 0.0f64;
        for n in 0..=region.max_delay_bin.min(self.delay_bins - 1) {
            for &v in self.row(n) {
                best = best.max(v);
            }
        }
        best
    }
}

/// A map peak with both bin coordinates and their physical conversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEstimate {
    pub delay_bin: usize,
    pub doppler_bin: usize,
    pub power: f64,
    pub range_m: f64,
    pub velocity_mps: f64,
}

impl PeakEstimate {
    pub fn from_bins(delay_bin: usize, doppler_bin: usize, power: f64, config: &OfdmConfig) -> Self {
        let (range_m, velocity_mps) = bin_to_physical(delay_bin, doppler_bin, config);
        Self { delay_bin, doppler_bin, power, range_m, velocity_mps }
    }
}

/// Delay-axis search restriction for peak extraction. Doppler is always
/// searched in full; the delay axis stops at the largest bin consistent with
/// the modeled unambiguous range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchRegion {
    pub max_delay_bin: usize,
}

impl SearchRegion {
    /// Region covering ranges up to `max_range_m`.
    pub fn for_max_range(config: &OfdmConfig, max_range_m: f64) -> Self {
        let bin = (2.0 * max_range_m * config.subcarrier_spacing_hz
            * config.delay_transform_size as f64
            / SPEED_OF_LIGHT)
            .floor() as usize;
        Self { max_delay_bin: bin.min(config.delay_transform_size - 1) }
    }

    pub fn full(config: &OfdmConfig) -> Self {
        Self { max_delay_bin: config.delay_transform_size - 1 }
    }

    pub fn bin_count(&self, map: &RangeDopplerMap) -> usize {
        (self.max_delay_bin + 1) * map.doppler_bins()
    }
}

/// Converts map bins to physical units: range from the delay bin, signed
/// radial velocity from the Doppler bin with wrap-around unfolding of the
/// upper half of the axis.
pub fn bin_to_physical(delay_bin: usize, doppler_bin: usize, config: &OfdmConfig) -> (f64, f64) {
    let range = SPEED_OF_LIGHT * delay_bin as f64
        / (2.0 * config.subcarrier_spacing_hz * config.delay_transform_size as f64);
    let m_per = config.doppler_transform_size;
    let signed_bin = if doppler_bin < m_per / 2 {
        doppler_bin as f64
    } else {
        doppler_bin as f64 - m_per as f64
    };
    let velocity = SPEED_OF_LIGHT * signed_bin
        / (2.0 * config.carrier_freq_hz * config.symbol_duration_s * m_per as f64);
    (range, velocity)
}

/// Global argmax over the search region. Ties break toward the smallest delay
/// bin, then the smallest Doppler bin.
pub fn find_peak(map: &RangeDopplerMap, region: &SearchRegion) -> Result<PeakEstimate> {
    if region.max_delay_bin >= map.delay_bins() {
        return Err(Error::InvalidArgument(format!(
            "search region delay bin {} outside map with {} delay bins",
            region.max_delay_bin,
            map.delay_bins()
        )));
    }
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for n in 0..=region.max_delay_bin {
        for (m, &v) in map.row(n).iter().enumerate() {
            if v > best.2 {
                best = (n, m, v);
            }
        }
    }
    Ok(PeakEstimate::from_bins(best.0, best.1, best.2, map.config()))
}

/// Plan-caching processor that turns normalized frames into range-Doppler
/// maps. Construct once per configuration and share; `compute_map` is safe to
/// call concurrently.
pub struct PeriodogramProcessor {
    config: OfdmConfig,
    fft_doppler: Arc<dyn Fft<f64>>,
    ifft_delay: Arc<dyn Fft<f64>>,
    rect_window: WindowMatrix,
}

impl PeriodogramProcessor {
    pub fn new(config: &OfdmConfig) -> Result<Self> {
        config.validate()?;
        let mut planner = FftPlanner::new();
        let fft_doppler = planner.plan_fft_forward(config.doppler_transform_size);
        let ifft_delay = planner.plan_fft_inverse(config.delay_transform_size);
        let rect_window =
            crate::window::window_matrix(WindowKind::Rectangular, WindowKind::Rectangular, config)?;
        Ok(Self { config: *config, fft_doppler, ifft_delay, rect_window })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.config
    }

    /// The cached all-ones window for unwindowed maps.
    pub fn rect_window(&self) -> &WindowMatrix {
        &self.rect_window
    }

    /// Windowed periodogram of a normalized frame.
    ///
    /// Per bin: |sum_k sum_l F[k,l] W[k,l] e^{-j2 pi l m / M_per} e^{+j2 pi k n
    /// / N_per}|^2 / (N M), evaluated with zero-padded transforms along each
    /// axis.
    pub fn compute_map(&self, frame: &ComplexFrame, window: &WindowMatrix) -> Result<RangeDopplerMap> {
        if frame.role() != FrameRole::Normalized {
            return Err(Error::InvalidArgument(
                "periodogram input must be a normalized frame".into(),
            ));
        }
        if !frame.matches_config(&self.config) {
            return Err(Error::InvalidArgument(format!(
                "frame is {} x {}, config expects {} x {}",
                frame.rows(),
                frame.cols(),
                self.config.subcarriers,
                self.config.symbols
            )));
        }
        if window.rows() != frame.rows() || window.cols() != frame.cols() {
            return Err(Error::InvalidArgument(format!(
                "window is {} x {}, frame is {} x {}",
                window.rows(),
                window.cols(),
                frame.rows(),
                frame.cols()
            )));
        }

        let n = self.config.subcarriers;
        let m = self.config.symbols;
        let n_per = self.config.delay_transform_size;
        let m_per = self.config.doppler_transform_size;
        let scale = 1.0 / (n * m) as f64;

        // Forward transform along the symbol axis, one padded row per
        // subcarrier.
        let mut stage = vec![Complex64::new(0.0, 0.0); n * m_per];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft_doppler.get_inplace_scratch_len()];
        for k in 0..n {
            let row = &mut stage[k * m_per..(k + 1) * m_per];
            for l in 0..m {
                row[l] = frame.get(k, l) * window.weight(k, l);
            }
            self.fft_doppler.process_with_scratch(row, &mut scratch);
        }

        // Reverse-direction transform along the subcarrier axis for each
        // Doppler column, then squared magnitude.
        let mut power = vec![0.0f64; n_per * m_per];
        let mut column = vec![Complex64::new(0.0, 0.0); n_per];
        let mut scratch_col =
            vec![Complex64::new(0.0, 0.0); self.ifft_delay.get_inplace_scratch_len()];
        for mm in 0..m_per {
            for k in 0..n {
                column[k] = stage[k * m_per + mm];
            }
            for c in column.iter_mut().skip(n) {
                *c = Complex64::new(0.0, 0.0);
            }
            self.ifft_delay.process_with_scratch(&mut column, &mut scratch_col);
            for (nn, c) in column.iter().enumerate() {
                power[nn * m_per + mm] = c.norm_sqr() * scale;
            }
        }

        Ok(RangeDopplerMap::from_parts(
            power,
            self.config,
            (window.kind_delay(), window.kind_doppler()),
        ))
    }
}

/// Writes a map as a plain-text grid with a self-describing header: one row
/// per delay bin, one column per Doppler bin.
pub fn write_map_grid(map: &RangeDopplerMap, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# range_doppler_map")?;
    writeln!(out, "# delay_bins {}", map.delay_bins())?;
    writeln!(out, "# doppler_bins {}", map.doppler_bins())?;
    writeln!(out, "# range_bin_m {}", map.config().range_bin_m())?;
    writeln!(out, "# velocity_bin_mps {}", map.config().velocity_bin_mps())?;
    writeln!(out, "# window {:?}", map.window_kinds())?;
    writeln!(out, "# layout row-major, delay-major: row n, column m")?;
    for n in 0..map.delay_bins() {
        let row = map.row(n);
        let mut line = String::with_capacity(row.len() * 12);
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{v}"));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::window_matrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_config() -> OfdmConfig {
        OfdmConfig {
            subcarriers: 8,
            symbols: 8,
            delay_transform_size: 16,
            doppler_transform_size: 16,
            mod_order: 4,
            ..OfdmConfig::default()
        }
    }

    /// Literal double-sum periodogram used as the independent oracle.
    fn direct_map(frame: &ComplexFrame, window: &WindowMatrix, config: &OfdmConfig) -> Vec<f64> {
        let n = config.subcarriers;
        let m = config.symbols;
        let n_per = config.delay_transform_size;
        let m_per = config.doppler_transform_size;
        let mut out = vec![0.0; n_per * m_per];
        for nn in 0..n_per {
            for mm in 0..m_per {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    for l in 0..m {
                        let theta = std::f64::consts::TAU
                            * (k as f64 * nn as f64 / n_per as f64
                                - l as f64 * mm as f64 / m_per as f64);
                        acc += frame.get(k, l) * window.weight(k, l)
                            * Complex64::from_polar(1.0, theta);
                    }
                }
                out[nn * m_per + mm] = acc.norm_sqr() / (n * m) as f64;
            }
        }
        out
    }

    fn random_frame(config: &OfdmConfig, seed: u64) -> ComplexFrame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<Complex64> = (0..config.frame_len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexFrame::from_data(data, config.subcarriers, config.symbols, FrameRole::Normalized)
            .unwrap()
    }

    #[test]
    fn all_ones_frame_peaks_at_origin() {
        let cfg = small_config();
        let proc = PeriodogramProcessor::new(&cfg).unwrap();
        let w = window_matrix(WindowKind::Rectangular, WindowKind::Rectangular, &cfg).unwrap();
        let frame = ComplexFrame::from_data(
            vec![Complex64::new(1.0, 0.0); cfg.frame_len()],
            cfg.subcarriers,
            cfg.symbols,
            FrameRole::Normalized,
        )
        .unwrap();
        let map = proc.compute_map(&frame, &w).unwrap();
        let peak = find_peak(&map, &SearchRegion::full(&cfg)).unwrap();
        assert_eq!((peak.delay_bin, peak.doppler_bin), (0, 0));
        let expected = (cfg.subcarriers * cfg.symbols) as f64;
        assert!((peak.power - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn matches_direct_sum_on_random_frames() {
        let cfg = small_config();
        let proc = PeriodogramProcessor::new(&cfg).unwrap();
        let w = window_matrix(WindowKind::Hamming, WindowKind::Rectangular, &cfg).unwrap();
        for seed in 0..20 {
            let frame = random_frame(&cfg, seed);
            let map = proc.compute_map(&frame, &w).unwrap();
            let oracle = direct_map(&frame, &w, &cfg);
            let peak = oracle.iter().cloned().fold(0.0f64, f64::max);
            for (a, b) in map.as_slice().iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-6 * peak, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn benchmark_grid_single_target_bins() {
        // A unit-amplitude exponential at 30 m and 53.267 m/s lands exactly on
        // delay bin 16 and Doppler bin 8 of the padded 256 x 1024 map.
        let cfg = OfdmConfig::default();
        let proc = PeriodogramProcessor::new(&cfg).unwrap();
        let w = window_matrix(WindowKind::Rectangular, WindowKind::Rectangular, &cfg).unwrap();
        let tau = 2.0 * 30.0 / SPEED_OF_LIGHT;
        let doppler = 8.0 / (cfg.symbol_duration_s * cfg.doppler_transform_size as f64);
        let mut frame = ComplexFrame::zeros(cfg.subcarriers, cfg.symbols, FrameRole::Normalized);
        for k in 0..cfg.subcarriers {
            for l in 0..cfg.symbols {
                let theta = std::f64::consts::TAU
                    * (l as f64 * cfg.symbol_duration_s * doppler
                        - k as f64 * tau * cfg.subcarrier_spacing_hz);
                frame.set(k, l, Complex64::from_polar(1.0, theta));
            }
        }
        let map = proc.compute_map(&frame, &w).unwrap();
        let region = SearchRegion::for_max_range(&cfg, 100.0);
        let peak = find_peak(&map, &region).unwrap();
        assert_eq!((peak.delay_bin, peak.doppler_bin), (16, 8));
        assert!((peak.range_m - 30.0).abs() < 1e-9);
        assert!((peak.velocity_mps - 53.26704545454546).abs() < 1e-9);
    }

    #[test]
    fn bin_conversions() {
        let cfg = OfdmConfig::default();
        assert_eq!(bin_to_physical(0, 0, &cfg), (0.0, 0.0));
        let (r, _) = bin_to_physical(16, 0, &cfg);
        assert!((r - 30.0).abs() < 1e-12);
        let (_, v) = bin_to_physical(0, cfg.doppler_transform_size - 8, &cfg);
        assert!((v + 53.26704545454546).abs() < 1e-9);
    }

    #[test]
    fn tie_break_prefers_smallest_bins() {
        let cfg = small_config();
        let len = cfg.delay_transform_size * cfg.doppler_transform_size;
        let zero = RangeDopplerMap::from_parts(
            vec![0.0; len],
            cfg,
            (WindowKind::Rectangular, WindowKind::Rectangular),
        );
        let peak = find_peak(&zero, &SearchRegion::full(&cfg)).unwrap();
        assert_eq!((peak.delay_bin, peak.doppler_bin, peak.power), (0, 0, 0.0));

        let mut power = vec![0.0; len];
        power[5 * cfg.doppler_transform_size + 3] = 2.0;
        power[9 * cfg.doppler_transform_size + 1] = 2.0;
        let map = RangeDopplerMap::from_parts(
            power,
            cfg,
            (WindowKind::Rectangular, WindowKind::Rectangular),
        );
        let peak = find_peak(&map, &SearchRegion::full(&cfg)).unwrap();
        assert_eq!((peak.delay_bin, peak.doppler_bin), (5, 3));
    }

    #[test]
    fn region_outside_map_is_rejected() {
        let cfg = small_config();
        let len = cfg.delay_transform_size * cfg.doppler_transform_size;
        let map = RangeDopplerMap::from_parts(
            vec![0.0; len],
            cfg,
            (WindowKind::Rectangular, WindowKind::Rectangular),
        );
        let bad = SearchRegion { max_delay_bin: cfg.delay_transform_size };
        assert!(find_peak(&map, &bad).is_err());
    }

    #[test]
    fn map_dump_round_trips_values() {
        let cfg = small_config();
        let proc = PeriodogramProcessor::new(&cfg).unwrap();
        let w = window_matrix(WindowKind::Rectangular, WindowKind::Rectangular, &cfg).unwrap();
        let frame = random_frame(&cfg, 3);
        let map = proc.compute_map(&frame, &w).unwrap();
        let path = std::env::temp_dir().join("ofdm_radar_map_dump_test.txt");
        write_map_grid(&map, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut values = Vec::new();
        for line in text.lines().filter(|l| !l.starts_with('#')) {
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().unwrap());
            }
        }
        assert_eq!(values.len(), map.as_slice().len());
        for (a, b) in values.iter().zip(map.as_slice()) {
            assert_eq!(a, b);
        }
        std::fs::remove_file(&path).ok();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// Multiplying the frame by a delay-axis exponential circularly
        /// shifts the map along the delay axis.
        #[test]
        fn shift_theorem(seed in 0u64..1000, shift in 1usize..15) {
            let cfg = small_config();
            let proc = PeriodogramProcessor::new(&cfg).unwrap();
            let w = window_matrix(WindowKind::Rectangular, WindowKind::Rectangular, &cfg).unwrap();
            let frame = random_frame(&cfg, seed);
            let n_per = cfg.delay_transform_size;

            let mut shifted = frame.clone();
            for k in 0..cfg.subcarriers {
                for l in 0..cfg.symbols {
                    let theta = std::f64::consts::TAU * k as f64 * shift as f64 / n_per as f64;
                    let v = shifted.get(k, l) * Complex64::from_polar(1.0, theta);
                    shifted.set(k, l, v);
                }
            }

            let base = proc.compute_map(&frame, &w).unwrap();
            let moved = proc.compute_map(&shifted, &w).unwrap();
            let peak = base.as_slice().iter().cloned().fold(0.0f64, f64::max);
            for n in 0..n_per {
                for m in 0..cfg.doppler_transform_size {
                    let expect = base.power_at((n + shift) % n_per, m);
                    let got = moved.power_at(n, m);
                    prop_assert!((expect - got).abs() <= 1e-9 * peak);
                }
            }
        }

        /// Scaling the window leaves the argmax untouched.
        #[test]
        fn window_scale_leaves_argmax(seed in 0u64..1000, alpha in 0.01f64..50.0) {
            let cfg = small_config();
            let proc = PeriodogramProcessor::new(&cfg).unwrap();
            let w = window_matrix(WindowKind::Hamming, WindowKind::Hamming, &cfg).unwrap();
            let frame = random_frame(&cfg, seed);
            let region = SearchRegion::full(&cfg);
            let a = find_peak(&proc.compute_map(&frame, &w).unwrap(), &region).unwrap();
            let b = find_peak(&proc.compute_map(&frame, &w.scaled(alpha)).unwrap(), &region).unwrap();
            prop_assert_eq!((a.delay_bin, a.doppler_bin), (b.delay_bin, b.doppler_bin));
        }
    }
}
