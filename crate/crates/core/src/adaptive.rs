//! Dual-window adaptive detection.
//!
//! The same low-complexity detector runs under two complementary windows, one
//! tuned for resolution and one for sidelobe suppression. The two target
//! lists are paired by a minimum-cost assignment and compared: when the worst
//! pair stays within a squared-distance budget, the resolution-window
//! estimates are kept; otherwise the lists are judged inconsistent and the
//! coherent detector is invoked to resolve the ambiguity. Runtime accounting
//! always charges both low-complexity runs, and the coherent run only on
//! fallback; the comparison itself is not charged.

use std::time::Duration;

use crate::detect::{bstc, cstc, DetectionResult, DetectorTag};
use crate::error::{Error, Result};
use crate::frame::ComplexFrame;
use crate::periodogram::{PeriodogramProcessor, SearchRegion};
use crate::window::WindowMatrix;

/// Largest list size accepted by `assign_pairs`.
pub const MAX_ASSIGNMENT_SIZE: usize = 256;

/// Outcome of comparing the two window's target lists.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    /// True when the counts agree and the metric is within the threshold.
    pub matched: bool,
    /// Largest squared mixed-unit distance (m^2 + (m/s)^2) over the chosen
    /// pairs; `None` when the counts differ and no pairing exists.
    pub d: Option<f64>,
    /// Index pairs (resolution list, sidelobe list); empty if counts differ.
    pub pairing: Vec<(usize, usize)>,
    /// (resolution count, sidelobe count).
    pub counts: (usize, usize),
}

/// Which branch the adaptive detector took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptiveMode {
    /// Lists agreed; resolution-window estimates returned.
    Converged,
    /// Lists diverged; the coherent detector's estimates returned.
    Fallback,
}

/// Full record of one adaptive detection.
#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    /// The selected estimates, tagged `Adaptive`, with `runtime` equal to
    /// `total_runtime`.
    pub detection: DetectionResult,
    pub mode: AdaptiveMode,
    pub match_outcome: MatchOutcome,
    /// The resolution-window run (always executed).
    pub resolution_run: DetectionResult,
    /// The sidelobe-window run (always executed).
    pub sidelobe_run: DetectionResult,
    /// The coherent run, present only on fallback.
    pub fallback_run: Option<DetectionResult>,
    /// Sum of the constituent detector runtimes.
    pub total_runtime: Duration,
}

/// A resolution/sidelobe window pair with the role ordering checked at
/// construction: the sidelobe window must attenuate sidelobes strictly better
/// on some axis and must nowhere be narrower-lobed than the resolution window
/// is.
#[derive(Debug, Clone)]
pub struct WindowPair {
    resolution: WindowMatrix,
    sidelobe: WindowMatrix,
}

impl WindowPair {
    pub fn new(resolution: WindowMatrix, sidelobe: WindowMatrix) -> Result<Self> {
        if resolution.rows() != sidelobe.rows() || resolution.cols() != sidelobe.cols() {
            return Err(Error::InvalidArgument("window pair dimensions differ".into()));
        }
        let axes = [
            (resolution.profile_delay(), sidelobe.profile_delay(), "delay"),
            (resolution.profile_doppler(), sidelobe.profile_doppler(), "Doppler"),
        ];
        let mut strictly_better = false;
        for (res, side, axis) in axes {
            if side.psl_db < res.psl_db - 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "sidelobe window attenuates worse than the resolution window on the {axis} axis"
                )));
            }
            if side.mainlobe_halfwidth_bins < res.mainlobe_halfwidth_bins {
                return Err(Error::InvalidArgument(format!(
                    "resolution window has the wider mainlobe on the {axis} axis; roles are swapped"
                )));
            }
            if side.psl_db > res.psl_db + 1e-9 {
                strictly_better = true;
            }
        }
        if !strictly_better {
            return Err(Error::InvalidArgument(
                "window pair is not complementary: no axis improves sidelobe attenuation".into(),
            ));
        }
        Ok(Self { resolution, sidelobe })
    }

    pub fn resolution(&self) -> &WindowMatrix {
        &self.resolution
    }

    pub fn sidelobe(&self) -> &WindowMatrix {
        &self.sidelobe
    }
}

/// Minimum-cost assignment between two equally sized lists of (range,
/// velocity) points under squared Euclidean distance. Returns `pairing` such
/// that `a[i]` maps to `b[pairing[i]]`.
pub fn assign_pairs(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "assignment needs equal list lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() > MAX_ASSIGNMENT_SIZE {
        return Err(Error::InvalidArgument(format!(
            "assignment size {} exceeds the cap {MAX_ASSIGNMENT_SIZE}",
            a.len()
        )));
    }
    let n = a.len();
    let mut cost = vec![0.0f64; n * n];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            let dr = pa.0 - pb.0;
            let dv = pa.1 - pb.1;
            cost[i * n + j] = dr * dr + dv * dv;
        }
    }
    Ok(hungarian(&cost, n))
}

/// O(n^3) Hungarian algorithm with row/column potentials and augmenting
/// paths; returns the column assigned to each row.
fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    // row_of_col[n] is a virtual column used to start each augmentation.
    let mut row_of_col: Vec<Option<usize>> = vec![None; n + 1];
    let mut row_potential = vec![0.0f64; n];
    let mut col_potential = vec![0.0f64; n + 1];

    for row in 0..n {
        let mut current_col = n;
        row_of_col[current_col] = Some(row);
        let mut min_reduced = vec![f64::INFINITY; n + 1];
        let mut previous_col = vec![n; n + 1];
        let mut in_tree = vec![false; n + 1];

        while let Some(r) = row_of_col[current_col] {
            in_tree[current_col] = true;
            let mut delta = f64::INFINITY;
            let mut next_col = n;
            for col in 0..n {
                if in_tree[col] {
                    continue;
                }
                let reduced = cost[r * n + col] - row_potential[r] - col_potential[col];
                if reduced < min_reduced[col] {
                    min_reduced[col] = reduced;
                    previous_col[col] = current_col;
                }
                if min_reduced[col] < delta {
                    delta = min_reduced[col];
                    next_col = col;
                }
            }
            for col in 0..=n {
                if in_tree[col] {
                    if let Some(rr) = row_of_col[col] {
                        row_potential[rr] += delta;
                    }
                    col_potential[col] -= delta;
                } else {
                    min_reduced[col] -= delta;
                }
            }
            current_col = next_col;
        }

        // Walk the augmenting path back to the virtual column.
        while current_col != n {
            let prev = previous_col[current_col];
            row_of_col[current_col] = row_of_col[prev];
            current_col = prev;
        }
    }

    let mut assignment = vec![0usize; n];
    for col in 0..n {
        if let Some(row) = row_of_col[col] {
            assignment[row] = col;
        }
    }
    assignment
}

fn positions(result: &DetectionResult) -> Vec<(f64, f64)> {
    result.estimates.iter().map(|e| (e.range_m, e.velocity_mps)).collect()
}

/// Compares the two detector outputs. Unequal counts are an immediate
/// mismatch; otherwise the lists are paired by minimum total squared distance
/// and the decision metric is the worst pair's squared distance.
pub fn match_lists(
    resolution: &DetectionResult,
    sidelobe: &DetectionResult,
    epsilon: f64,
) -> MatchOutcome {
    let counts = (resolution.estimates.len(), sidelobe.estimates.len());
    if counts.0 != counts.1 {
        return MatchOutcome { matched: false, d: None, pairing: Vec::new(), counts };
    }
    let a = positions(resolution);
    let b = positions(sidelobe);
    let n = a.len();
    let mut cost = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let dr = a[i].0 - b[j].0;
            let dv = a[i].1 - b[j].1;
            cost[i * n + j] = dr * dr + dv * dv;
        }
    }
    let assignment = hungarian(&cost, n);
    let mut d = 0.0f64;
    let mut pairing = Vec::with_capacity(n);
    for (i, &j) in assignment.iter().enumerate() {
        d = d.max(cost[i * n + j]);
        pairing.push((i, j));
    }
    MatchOutcome { matched: d <= epsilon, d: Some(d), pairing, counts }
}

/// Runs the dual-window pipeline: the low-complexity detector under both
/// windows, the list comparison, and the coherent detector only on
/// divergence.
pub fn detect_adaptive(
    processor: &PeriodogramProcessor,
    frame: &ComplexFrame,
    target_count: usize,
    windows: &WindowPair,
    epsilon: f64,
    region: &SearchRegion,
) -> Result<AdaptiveResult> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "match threshold {epsilon} must be finite and non-negative"
        )));
    }
    let resolution_run = bstc(processor, frame, windows.resolution(), target_count, region)?;
    let sidelobe_run = bstc(processor, frame, windows.sidelobe(), target_count, region)?;
    let match_outcome = match_lists(&resolution_run, &sidelobe_run, epsilon);

    if match_outcome.matched {
        let total_runtime = resolution_run.runtime + sidelobe_run.runtime;
        let detection = DetectionResult {
            estimates: resolution_run.estimates.clone(),
            detector: DetectorTag::Adaptive,
            runtime: total_runtime,
        };
        Ok(AdaptiveResult {
            detection,
            mode: AdaptiveMode::Converged,
            match_outcome,
            resolution_run,
            sidelobe_run,
            fallback_run: None,
            total_runtime,
        })
    } else {
        let fallback = cstc(processor, frame, target_count, region)?;
        let total_runtime = resolution_run.runtime + sidelobe_run.runtime + fallback.runtime;
        let detection = DetectionResult {
            estimates: fallback.estimates.clone(),
            detector: DetectorTag::Adaptive,
            runtime: total_runtime,
        };
        Ok(AdaptiveResult {
            detection,
            mode: AdaptiveMode::Fallback,
            match_outcome,
            resolution_run,
            sidelobe_run,
            fallback_run: Some(fallback),
            total_runtime,
        })
    }
}
