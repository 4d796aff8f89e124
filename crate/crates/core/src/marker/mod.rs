//! Switch transition markers.
//!
//! Opening or closing the record switch injects a step-response transient into
//! the stream: a high-amplitude phase, an abrupt sign flip into a second
//! high-amplitude phase, then a logarithmic decay toward zero. [`MarkerTemplate`]
//! describes that shape and [`synthesize_marker`] renders it.

mod recorder;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use recorder::{simulate, step_state, RecorderEvent, RecorderState};

/// Full-scale magnitude used for fractions of "max".
pub const FULL_SCALE: f64 = 32767.0;

/// Curvature of the logarithmic tail; larger values front-load the decay.
const LOG_DECAY_RATE: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum MarkerError {
    #[error("invalid marker template: {0}")]
    InvalidTemplate(String),
    #[error("noise fraction {0} outside [0, 1)")]
    InvalidNoise(f64),
    #[error("illegal transition: {event:?} in state {state:?}")]
    IllegalTransition { state: RecorderState, event: RecorderEvent },
}

/// Shape parameters of one marker transient. Amplitudes are on the signed
/// 16-bit scale, durations in samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerTemplate {
    pub a1: i16,
    pub a2: i16,
    pub t1: usize,
    pub t2: usize,
    pub settle_samples: usize,
    pub settle_band: f64,
    pub polarity: i8,
}

impl Default for MarkerTemplate {
    fn default() -> Self {
        default_template()
    }
}

/// Marker statistics measured on recorder output: phase amplitudes of about
/// 0.8 and 0.7 of full scale, 40-sample phases, settling within ±5% after 140 samples.
pub fn default_template() -> MarkerTemplate {
    MarkerTemplate {
        a1: 26_000,
        a2: 23_000,
        t1: 40,
        t2: 40,
        settle_samples: 140,
        settle_band: 0.05,
        polarity: 1,
    }
}

impl MarkerTemplate {
    pub fn validate(&self) -> Result<(), MarkerError> {
        let fail = |m: String| Err(MarkerError::InvalidTemplate(m));
        if self.t1 == 0 || self.t2 == 0 {
            return fail(format!(
                "phase durations must be positive (t1={}, t2={})",
                self.t1, self.t2
            ));
        }
        if self.settle_samples < self.t1 + self.t2 {
            return fail(format!(
                "settle_samples {} shorter than t1 + t2 = {}",
                self.settle_samples,
                self.t1 + self.t2
            ));
        }
        if !(0 < self.a2 && self.a2 <= self.a1) {
            return fail(format!("need 0 < a2 <= a1 (a1={}, a2={})", self.a1, self.a2));
        }
        if !(self.settle_band > 0.0 && self.settle_band < 1.0) {
            return fail(format!("settle_band {} outside (0, 1)", self.settle_band));
        }
        if self.polarity != 1 && self.polarity != -1 {
            return fail(format!("polarity must be +1 or -1, got {}", self.polarity));
        }
        Ok(())
    }

    /// Multiplies both phase amplitudes by `factor`, saturating at full scale.
    pub fn scaled(&self, factor: f64) -> MarkerTemplate {
        let scale = |a: i16| (a as f64 * factor).round().clamp(1.0, FULL_SCALE) as i16;
        MarkerTemplate {
            a1: scale(self.a1),
            a2: scale(self.a2),
            ..*self
        }
    }

    pub fn with_polarity(&self, polarity: i8) -> MarkerTemplate {
        MarkerTemplate { polarity, ..*self }
    }

    /// Absolute amplitude of the settle band.
    pub fn band_amplitude(&self) -> f64 {
        self.settle_band * FULL_SCALE
    }
}

/// Renders `settle_samples` samples of the template's transient.
///
/// Each sample is scaled by an independent factor drawn uniformly from
/// `[1 - noise_fraction, 1 + noise_fraction]`; the draw sequence depends only on `seed`.
/// The final sample always lies inside the settle band.
pub fn synthesize_marker(template: &MarkerTemplate, noise_fraction: f64, seed: u64) -> Result<Vec<i16>, MarkerError> {
    template.validate()?;
    if !(0.0..1.0).contains(&noise_fraction) {
        return Err(MarkerError::InvalidNoise(noise_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = move || 1.0 + noise_fraction * (2.0 * rng.gen::<f64>() - 1.0);
    let polarity = template.polarity as f64;
    let band = template.band_amplitude();
    let tail_len = template.settle_samples - template.t1 - template.t2;

    let mut out = Vec::with_capacity(template.settle_samples);
    for _ in 0..template.t1 {
        out.push(to_sample(polarity * template.a1 as f64 * jitter()));
    }
    for _ in 0..template.t2 {
        out.push(to_sample(-polarity * template.a2 as f64 * jitter()));
    }

    // Decays from a2 to exactly the band edge at the final sample.
    let a2 = template.a2 as f64;
    let floor_ratio = (band / a2).min(1.0);
    let denom = (1.0 + LOG_DECAY_RATE * tail_len as f64).ln();
    for j in 0..tail_len {
        let progress = (1.0 + LOG_DECAY_RATE * (j + 1) as f64).ln() / denom;
        let magnitude = a2 * (1.0 - (1.0 - floor_ratio) * progress);
        out.push(to_sample(-polarity * (magnitude * jitter()).floor()));
    }

    if let Some(last) = out.last_mut() {
        let limit = band.floor();
        *last = (*last as f64).clamp(-limit, limit) as i16;
    }
    Ok(out)
}

fn to_sample(value: f64) -> i16 {
    value.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}
