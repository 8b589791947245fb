//! Multi-target OFDM radar simulation with dual-window adaptive successive
//! target cancellation.
//!
//! The pipeline models a monostatic OFDM sensing link on the frame grid: a
//! transmitted matrix of QAM symbols, point-target echoes plus AWGN, and the
//! element-wise normalized frame whose 2D periodogram is the range-Doppler
//! map. Detection extracts a known number of targets by successive
//! cancellation, either by masking map peaks under a window (BSTC) or by
//! coherent subtraction on the frame (CSTC). The adaptive strategy runs BSTC
//! under a resolution-optimized and a sidelobe-optimized window, matches the
//! two lists, and falls back to CSTC only when they diverge.
//!
//! ```
//! use ofdm_radar::{
//!     bstc, calibrate_noise, generate_frame, normalize, sample_scene,
//!     synthesize_received, window_matrix, OfdmConfig, PeriodogramProcessor,
//!     SceneConstraints, SearchRegion, WindowKind,
//! };
//!
//! let config = OfdmConfig::default();
//! let processor = PeriodogramProcessor::new(&config).unwrap();
//! let scene = sample_scene(&config, &SceneConstraints::default(), 1).unwrap();
//! let ftx = generate_frame(&config, 2).unwrap();
//! let noise = calibrate_noise(20.0, &config).unwrap();
//! let frx = synthesize_received(&ftx, &scene, &noise, &config, 3).unwrap();
//! let frame = normalize(&frx, &ftx).unwrap();
//!
//! let window = window_matrix(WindowKind::Rectangular, WindowKind::Rectangular, &config).unwrap();
//! let region = SearchRegion::for_max_range(&config, 100.0);
//! let detection = bstc(&processor, &frame, &window, 3, &region).unwrap();
//! assert_eq!(detection.estimates.len(), 3);
//! ```

pub mod adaptive;
pub mod channel;
pub mod config;
pub mod detect;
pub mod error;
pub mod frame;
pub mod periodogram;
pub mod window;

pub use adaptive::{
    assign_pairs, detect_adaptive, match_lists, AdaptiveMode, AdaptiveResult, MatchOutcome,
    WindowPair,
};
pub use channel::{
    calibrate_noise, normalize, sample_scene, synthesize_from_echoes, synthesize_received, Echo,
    EchoParams, NoiseSpec, Scene, SceneConstraints, SeparationRule, Target,
    SNR_REFERENCE_RANGE_M, SNR_REFERENCE_RCS_M2,
};
pub use config::{OfdmConfig, SPEED_OF_LIGHT};
pub use detect::{
    bstc, cstc, estimate_amplitude, estimate_amplitude_at, refine_peak, subtract_model,
    subtract_target, DetectionResult, DetectorTag,
};
pub use error::{Error, Result};
pub use frame::{generate_frame, qam_alphabet, ComplexFrame, FrameRole};
pub use periodogram::{
    bin_to_physical, find_peak, write_map_grid, PeakEstimate, PeriodogramProcessor,
    RangeDopplerMap, SearchRegion,
};
pub use window::{make_window, profile_window, window_matrix, WindowKind, WindowMatrix, WindowProfile};
