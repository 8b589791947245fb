//! Transmitted-frame generation: Gray-mapped square QAM on the N x M grid.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{is_square_qam_order, OfdmConfig};
use crate::error::{Error, Result};

/// Which stage of the processing chain a frame belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameRole {
    Transmitted,
    Received,
    Normalized,
}

/// A rows x cols grid of complex samples, stored row-major with one row per
/// subcarrier and one column per OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFrame {
    data: Vec<Complex64>,
    rows: usize,
    cols: usize,
    role: FrameRole,
}

impl ComplexFrame {
    pub fn from_data(data: Vec<Complex64>, rows: usize, cols: usize, role: FrameRole) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "frame data length {} does not match {} x {}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { data, rows, cols, role })
    }

    pub fn zeros(rows: usize, cols: usize, role: FrameRole) -> Self {
        Self { data: vec![Complex64::new(0.0, 0.0); rows * cols], rows, cols, role }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn role(&self) -> FrameRole {
        self.role
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub(crate) fn with_role(mut self, role: FrameRole) -> Self {
        self.role = role;
        self
    }

    /// Mean of |x|^2 over all entries.
    pub fn mean_power(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }

    pub fn matches_config(&self, config: &OfdmConfig) -> bool {
        self.rows == config.subcarriers && self.cols == config.symbols
    }
}

/// Gray-mapped square-QAM constellation scaled to unit average symbol power.
///
/// Entry `s` carries the bit pattern `s` split evenly between the I and Q
/// axes, with each axis Gray-coded so neighboring levels differ in one bit.
pub fn qam_alphabet(mod_order: usize) -> Result<Vec<Complex64>> {
    if !is_square_qam_order(mod_order) {
        return Err(Error::InvalidArgument(format!(
            "modulation order {mod_order} is not a perfect square >= 4"
        )));
    }
    let side = (mod_order as f64).sqrt().round() as usize;

    // Gray-coded PAM level for a bit pattern: position p such that
    // p ^ (p >> 1) equals the pattern, mapped onto odd levels +-1, +-3, ...
    let pam = |bits: usize| -> f64 {
        let mut pos = bits;
        let mut shift = bits >> 1;
        while shift > 0 {
            pos ^= shift;
            shift >>= 1;
        }
        (2 * pos) as f64 - (side - 1) as f64
    };

    let mut points = Vec::with_capacity(mod_order);
    for s in 0..mod_order {
        let i_bits = s / side;
        let q_bits = s % side;
        points.push(Complex64::new(pam(i_bits), pam(q_bits)));
    }

    let mean_power = points.iter().map(|c| c.norm_sqr()).sum::<f64>() / mod_order as f64;
    let scale = 1.0 / mean_power.sqrt();
    for p in &mut points {
        *p *= scale;
    }
    Ok(points)
}

/// Draws an N x M frame of independent, uniformly chosen alphabet symbols.
/// The result is deterministic for a fixed seed.
pub fn generate_frame(config: &OfdmConfig, seed: u64) -> Result<ComplexFrame> {
    config.validate()?;
    let alphabet = qam_alphabet(config.mod_order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Complex64> = (0..config.frame_len())
        .map(|_| alphabet[rng.random_range(0..alphabet.len())])
        .collect();
    ComplexFrame::from_data(data, config.subcarriers, config.symbols, FrameRole::Transmitted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_points_and_power() {
        let alphabet = qam_alphabet(4).unwrap();
        assert_eq!(alphabet.len(), 4);
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        for p in &alphabet {
            assert!((p.re.abs() - inv_sqrt2).abs() < 1e-12);
            assert!((p.im.abs() - inv_sqrt2).abs() < 1e-12);
        }
        let mean: f64 = alphabet.iter().map(|c| c.norm_sqr()).sum::<f64>() / 4.0;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qam16_is_the_scaled_odd_grid() {
        // Direct enumeration of the unscaled {-3,-1,1,3}^2 grid gives a mean
        // square magnitude of 10, so the unit-power alphabet is grid/sqrt(10).
        let mut unscaled_mean = 0.0;
        for a in [-3.0f64, -1.0, 1.0, 3.0] {
            for b in [-3.0f64, -1.0, 1.0, 3.0] {
                unscaled_mean += a * a + b * b;
            }
        }
        unscaled_mean /= 16.0;
        assert!((unscaled_mean - 10.0).abs() < 1e-12);

        let alphabet = qam_alphabet(16).unwrap();
        assert_eq!(alphabet.len(), 16);
        let scale = 1.0 / 10f64.sqrt();
        for p in &alphabet {
            let re_level = p.re / scale;
            let im_level = p.im / scale;
            assert!([-3.0, -1.0, 1.0, 3.0].iter().any(|l| (re_level - l).abs() < 1e-9));
            assert!([-3.0, -1.0, 1.0, 3.0].iter().any(|l| (im_level - l).abs() < 1e-9));
        }
        let mean: f64 = alphabet.iter().map(|c| c.norm_sqr()).sum::<f64>() / 16.0;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        let side = 4;
        // Recover the bit pattern for each spatial level and check adjacency.
        let mut pattern_for_level = vec![0usize; side];
        for bits in 0..side {
            let mut pos = bits;
            let mut shift = bits >> 1;
            while shift > 0 {
                pos ^= shift;
                shift >>= 1;
            }
            pattern_for_level[pos] = bits;
        }
        for w in pattern_for_level.windows(2) {
            assert_eq!((w[0] ^ w[1]).count_ones(), 1);
        }
    }

    #[test]
    fn rejects_non_square_order() {
        assert!(qam_alphabet(5).is_err());
        assert!(qam_alphabet(2).is_err());
        assert!(qam_alphabet(0).is_err());
    }

    #[test]
    fn frame_is_deterministic_per_seed() {
        let cfg = OfdmConfig::default();
        let a = generate_frame(&cfg, 42).unwrap();
        let b = generate_frame(&cfg, 42).unwrap();
        let c = generate_frame(&cfg, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.role(), FrameRole::Transmitted);
    }

    #[test]
    fn frame_entries_are_alphabet_points() {
        let cfg = OfdmConfig::default();
        let alphabet = qam_alphabet(cfg.mod_order).unwrap();
        let frame = generate_frame(&cfg, 7).unwrap();
        assert_eq!(frame.as_slice().len(), 64 * 256);
        for v in frame.as_slice() {
            assert!(alphabet.iter().any(|a| a == v), "entry {v} not in alphabet");
        }
    }

    #[test]
    fn frame_statistics_at_benchmark_size() {
        let cfg = OfdmConfig::default();
        let frame = generate_frame(&cfg, 1).unwrap();
        assert!((frame.mean_power() - 1.0).abs() <= 0.05);
        let mean: Complex64 =
            frame.as_slice().iter().sum::<Complex64>() / frame.as_slice().len() as f64;
        assert!(mean.norm() <= 0.05);
    }
}
