//! Marker detection by amplitude-window scanning.
//!
//! The scanner walks the stream one sample at a time. A sample whose magnitude
//! exceeds the threshold makes its index a candidate; the candidate is accepted
//! when the window of `t` samples starting there has at least `p`% of samples
//! above the threshold and at most one sign change. After an acceptance the
//! scanner jumps ahead by `tr` samples.
//!
//! Every run is instrumented. One elementary operation is one sample
//! inspection: each index visited by the scan costs 1 and each candidate
//! evaluation costs `t`. See [`crate::analysis::CountingRule`] for the
//! closed form this yields.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdmError {
    #[error("invalid detection parameters: {0}")]
    InvalidParams(String),
    #[error("window [{start}, {start}+{t}) exceeds stream of {len} samples")]
    WindowOutOfBounds { start: usize, t: usize, len: usize },
}

/// Detector configuration. Config keys are `threshold_a`, `window_t`,
/// `percent_p` and `skip_tr`; the defaults are the values found optimal on
/// recorder output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionParams {
    #[serde(rename = "threshold_a")]
    pub a: u32,
    #[serde(rename = "window_t")]
    pub t: usize,
    #[serde(rename = "percent_p")]
    pub p: u32,
    #[serde(rename = "skip_tr")]
    pub tr: usize,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            a: 27_000,
            t: 50,
            p: 75,
            tr: 350,
        }
    }
}

impl DetectionParams {
    pub fn new(a: u32, t: usize, p: u32, tr: usize) -> Result<Self, AdmError> {
        let params = Self { a, t, p, tr };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), AdmError> {
        if self.a == 0 {
            return Err(AdmError::InvalidParams("threshold_a must be positive".into()));
        }
        if self.t == 0 {
            return Err(AdmError::InvalidParams("window_t must be positive".into()));
        }
        if self.p == 0 || self.p > 100 {
            return Err(AdmError::InvalidParams(format!(
                "percent_p {} outside (0, 100]",
                self.p
            )));
        }
        if self.tr < self.t {
            return Err(AdmError::InvalidParams(format!(
                "skip_tr {} shorter than window_t {}",
                self.tr, self.t
            )));
        }
        Ok(())
    }
}

/// Marker start positions plus the run's instrumentation counters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub positions: Vec<usize>,
    pub op_count: u64,
    pub candidates_evaluated: usize,
    pub candidates_accepted: usize,
    pub stream_len: usize,
}

impl DetectionResult {
    pub fn rejected(&self) -> usize {
        self.candidates_evaluated - self.candidates_accepted
    }
}

/// Scans `samples` for markers. Panics if `params` is invalid; use
/// [`DetectionParams::new`] or [`DetectionParams::validate`] first.
pub fn detect_markers(samples: &[i16], params: &DetectionParams) -> DetectionResult {
    params.validate().expect("detection parameters must be valid");
    let threshold = params.a as i32;
    let mut result = DetectionResult {
        stream_len: samples.len(),
        ..Default::default()
    };
    let Some(last) = samples.len().checked_sub(params.t) else {
        return result;
    };

    let mut i = 0;
    while i <= last {
        result.op_count += 1;
        if magnitude(samples[i]) > threshold {
            result.candidates_evaluated += 1;
            result.op_count += params.t as u64;
            if window_accepts(&samples[i..i + params.t], params) {
                result.positions.push(i);
                i += params.tr;
            }
        }
        i += 1;
    }
    result.candidates_accepted = result.positions.len();
    result
}

/// The candidate test on its own: does the window starting at `start` look like
/// the opening of a marker?
pub fn is_marker_window(samples: &[i16], start: usize, params: &DetectionParams) -> Result<bool, AdmError> {
    params.validate()?;
    let end = start
        .checked_add(params.t)
        .filter(|&end| end <= samples.len())
        .ok_or(AdmError::WindowOutOfBounds {
            start,
            t: params.t,
            len: samples.len(),
        })?;
    Ok(window_accepts(&samples[start..end], params))
}

/// Number of indices at which the scan would evaluate a candidate window.
pub fn count_candidates(samples: &[i16], params: &DetectionParams) -> usize {
    detect_markers(samples, params).candidates_evaluated
}

fn magnitude(sample: i16) -> i32 {
    (sample as i32).abs()
}

fn window_accepts(window: &[i16], params: &DetectionParams) -> bool {
    let threshold = params.a as i32;
    let mut above = 0usize;
    let mut sign_changes = 0usize;
    // Zeros carry the last nonzero sign.
    let mut sign = 0i16;
    for &x in window {
        if magnitude(x) > threshold {
            above += 1;
        }
        let s = x.signum();
        if s != 0 {
            if sign != 0 && s != sign {
                sign_changes += 1;
            }
            sign = s;
        }
    }
    above * 100 >= params.p as usize * params.t && sign_changes <= 1
}
