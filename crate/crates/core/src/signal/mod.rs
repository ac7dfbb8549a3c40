//! Deterministic oscillatory synthesis.
//!
//! Covers the low-frequency traveling wave `L(t, x)`, gamma banks whose
//! amplitude follows the wave's phase, sinusoidal category phase codes,
//! Kuramoto phase dynamics and nested-phase recursion. All phases are
//! wrapped to `[0, 2π)`.

mod kuramoto;
mod phase_code;
mod trace;
mod wave;

use thiserror::Error;

pub use kuramoto::{mean_phase, order_parameter, KuramotoNetwork};
pub use phase_code::PhaseCode;
pub use trace::{traces_to_csv, SignalTrace};
pub use wave::{
    eval_bank, pac_amplitude, synth_composite, synth_modulated, synth_modulated_at,
    synth_unmodulated, synth_wave, HighFreqComponent, PacConfig, TravelingWave,
};

use crate::phase::wrap_phase;

/// Conventional delta band center used for the traveling wave.
pub const DELTA_HZ: f64 = 2.0;
/// Conventional theta band center used for category phase codes.
pub const THETA_HZ: f64 = 6.0;
/// Conventional gamma band center used for modulated banks.
pub const GAMMA_HZ: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sample rate {sample_rate} Hz does not exceed twice the highest frequency {max_frequency} Hz")]
    Nyquist { sample_rate: f64, max_frequency: f64 },
    #[error("unknown category {0}")]
    UnknownCategory(String),
    #[error("step size {dt} s violates the stability guard: {reason}")]
    StepSize { dt: f64, reason: String },
    #[error("empty input")]
    EmptyInput,
    #[error("trace too short: need {needed} samples, have {have}")]
    TooShort { needed: usize, have: usize },
    #[error("trace CSV: {0}")]
    Csv(String),
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), SignalError> {
    if cond {
        Ok(())
    } else {
        Err(SignalError::InvalidParameter(msg()))
    }
}

/// `φ_matrix + n·Δφ`, wrapped: the phase after `n` nested constituents.
pub fn nested_phase(matrix_phase: f64, step: f64, n: u32) -> f64 {
    wrap_phase(matrix_phase + f64::from(n) * step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::circular_distance;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn nested_phase_examples() {
        assert!(circular_distance(nested_phase(0.3, 1.0, 0), 0.3) < 1e-15);
        assert!(circular_distance(nested_phase(1.1, PI / 2.0, 4), 1.1) < 1e-12);
        // 7.3 mod 2π computed by hand
        let expected = 7.3 - 2.0 * PI;
        assert!((nested_phase(0.3, 1.0, 7) - expected).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn nested_phase_composes(phi in 0.0..TAU, step in -4.0..4.0f64, a in 0u32..50, b in 0u32..50) {
            let direct = nested_phase(phi, step, a + b);
            let split = nested_phase(nested_phase(phi, step, a), step, b);
            prop_assert!(circular_distance(direct, split) < 1e-9);
        }
    }
}
