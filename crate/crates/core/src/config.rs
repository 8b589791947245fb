//! Waveform and transform-size configuration shared by every pipeline stage.

use crate::error::{Error, Result};

/// Propagation speed used for all range and Doppler conversions (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// OFDM waveform constants plus the zero-padded periodogram transform sizes.
///
/// The frame grid is `subcarriers` rows by `symbols` columns; the transform
/// sizes set the delay/Doppler bin resolution of the range-Doppler map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    /// Number of subcarriers (frame rows).
    pub subcarriers: usize,
    /// Number of OFDM symbols per frame (frame columns).
    pub symbols: usize,
    /// Zero-padded transform size along the delay axis; at least `subcarriers`.
    pub delay_transform_size: usize,
    /// Zero-padded transform size along the Doppler axis; at least `symbols`.
    pub doppler_transform_size: usize,
    /// Subcarrier spacing in Hz.
    pub subcarrier_spacing_hz: f64,
    /// OFDM symbol duration including the cyclic prefix, in seconds.
    pub symbol_duration_s: f64,
    /// Carrier frequency of the first subcarrier, in Hz.
    pub carrier_freq_hz: f64,
    /// Square-QAM modulation order (a perfect square, at least 4).
    pub mod_order: usize,
}

impl Default for OfdmConfig {
    /// The standard benchmark setup: 64 x 256 frame of 16-QAM symbols at
    /// 312.5 kHz spacing, 4 us symbols, 5.5 GHz carrier, 4x padded transforms.
    fn default() -> Self {
        Self {
            subcarriers: 64,
            symbols: 256,
            delay_transform_size: 256,
            doppler_transform_size: 1024,
            subcarrier_spacing_hz: 312.5e3,
            symbol_duration_s: 4.0e-6,
            carrier_freq_hz: 5.5e9,
            mod_order: 16,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subcarriers < 1 || self.symbols < 1 {
            return Err(Error::InvalidConfig(
                "frame must have at least one subcarrier and one symbol".into(),
            ));
        }
        if self.delay_transform_size < self.subcarriers {
            return Err(Error::InvalidConfig(format!(
                "delay transform size {} smaller than subcarrier count {}",
                self.delay_transform_size, self.subcarriers
            )));
        }
        if self.doppler_transform_size < self.symbols {
            return Err(Error::InvalidConfig(format!(
                "Doppler transform size {} smaller than symbol count {}",
                self.doppler_transform_size, self.symbols
            )));
        }
        if !(self.subcarrier_spacing_hz > 0.0) {
            return Err(Error::InvalidConfig("subcarrier spacing must be positive".into()));
        }
        if self.symbol_duration_s < 1.0 / self.subcarrier_spacing_hz {
            return Err(Error::InvalidConfig(
                "symbol duration shorter than the elementary period 1/spacing".into(),
            ));
        }
        if !(self.carrier_freq_hz > 0.0) {
            return Err(Error::InvalidConfig("carrier frequency must be positive".into()));
        }
        if !is_square_qam_order(self.mod_order) {
            return Err(Error::InvalidConfig(format!(
                "modulation order {} is not a perfect square >= 4",
                self.mod_order
            )));
        }
        Ok(())
    }

    /// Cyclic-prefix duration: symbol duration minus the elementary period.
    pub fn cyclic_prefix_s(&self) -> f64 {
        self.symbol_duration_s - 1.0 / self.subcarrier_spacing_hz
    }

    /// Largest round-trip delay the frame model represents without ambiguity.
    pub fn max_unambiguous_delay_s(&self) -> f64 {
        self.cyclic_prefix_s()
    }

    /// Range spanned by one delay bin of the padded map, in meters.
    pub fn range_bin_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.subcarrier_spacing_hz * self.delay_transform_size as f64)
    }

    /// Radial velocity spanned by one Doppler bin of the padded map, in m/s.
    pub fn velocity_bin_mps(&self) -> f64 {
        SPEED_OF_LIGHT
            / (2.0 * self.carrier_freq_hz * self.symbol_duration_s * self.doppler_transform_size as f64)
    }

    pub(crate) fn frame_len(&self) -> usize {
        self.subcarriers * self.symbols
    }
}

pub(crate) fn is_square_qam_order(mod_order: usize) -> bool {
    if mod_order < 4 {
        return false;
    }
    let side = (mod_order as f64).sqrt().round() as usize;
    side * side == mod_order
}
