//! Encoding of labeled trees into field-potential-like traces and spike
//! trains, and the inverse decoders.
//!
//! A tree becomes a sequence of fixed-length slots, one per node, in
//! bottom-up order. Each slot carries the node's category as the phase of a
//! theta carrier (shifted by `depth·Δφ`), a gamma bank built from the node's
//! leaf embeddings whose amplitude follows the traveling wave, and the
//! lexical population's spikes.

mod bundle;
mod decode;
mod demod;
mod encode;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::LexiconError;
use crate::signal::{PacConfig, PhaseCode, SignalError, TravelingWave};
use crate::spiking::SpikingError;
use crate::syntax::{Category, SyntaxError};

pub use bundle::{BundleError, EncodedBundle, NodeKind, ScheduleEntry};
pub use decode::{
    decode_categories, decode_category, decode_slots, decode_tree, estimate_weights,
    DecodedCategory, DecodedSlot,
};
pub use demod::{
    add_white_noise, demodulate, estimate_phase, estimate_phase_with_margin, modulation_index,
    pac_profile, PacProfile, MI_BINS, PHASE_WINDOW_PERIODS,
};
pub use encode::{encode_tree, node_bank};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("invalid encoding config: {0}")]
    InvalidConfig(String),
    #[error("tree is not fully labeled: {0}")]
    Unlabeled(SyntaxError),
    #[error("leaf {0} is not in the lexicon")]
    UnknownLeaf(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Spiking(#[from] SpikingError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("trace too short: need {needed} samples, have {have}")]
    TooShort { needed: usize, have: usize },
    #[error("ambiguous decode: best correlations {best} and {second} are indistinguishable")]
    Ambiguous { best: f64, second: f64 },
    #[error("slot {slot}: decoded phase is {residual:.4} rad off the template for depth {depth}")]
    DepthInconsistent { slot: usize, depth: u32, residual: f64 },
    #[error("slot {slot}: {reason}")]
    Structure { slot: usize, reason: String },
    #[error("insufficient data for weight estimation: {0}")]
    InsufficientData(String),
}

/// Every parameter the encoder and decoders share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodingConfig {
    pub phase_code: PhaseCode,
    pub wave: TravelingWave,
    pub pac: PacConfig,
    /// Phase offset per level of nesting (rad).
    pub nesting_step: f64,
    /// Population rate scale (Hz).
    pub base_scale: f64,
    pub sample_rate: f64,
    /// Slot length per node (s).
    pub duration_per_node: f64,
    pub seed: u64,
    /// Category-phase coupling `α` of the spiking population.
    pub coupling: f64,
    /// `A_1 / A_0` of every gamma component.
    pub modulation_depth: f64,
    pub gamma_base: f64,
    pub gamma_spacing: f64,
    pub max_components: usize,
    /// Bernoulli bin width for spike sampling (s).
    pub spike_dt: f64,
    /// Rate jitter standard deviation (Hz).
    pub noise_sd: f64,
    /// Recording position `x` for the traveling wave.
    pub position: f64,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        EncodingConfig {
            phase_code: PhaseCode::evenly_spaced(
                1.0,
                crate::signal::THETA_HZ,
                ["N", "V", "A", "P"].map(Category::from),
            )
            .expect("default phase code"),
            wave: TravelingWave::new(1.0, crate::signal::DELTA_HZ, 0.0, 0.0).expect("default wave"),
            pac: PacConfig::new(0.0),
            nesting_step: TAU / 16.0,
            base_scale: 200.0,
            sample_rate: 500.0,
            duration_per_node: 1.0,
            seed: 0,
            coupling: 0.5,
            modulation_depth: 0.8,
            gamma_base: crate::signal::GAMMA_HZ,
            gamma_spacing: 10.0,
            max_components: 4,
            spike_dt: 1e-4,
            noise_sd: 0.0,
            position: 0.0,
        }
    }
}

impl EncodingConfig {
    pub fn max_frequency(&self) -> f64 {
        let top = self.gamma_base + self.gamma_spacing * self.max_components.saturating_sub(1) as f64;
        top.max(self.phase_code.frequency()).max(self.wave.frequency())
    }

    /// Samples per slot.
    pub fn slot_samples(&self) -> usize {
        (self.duration_per_node * self.sample_rate).round() as usize
    }

    /// Slot length after rounding to whole samples (s).
    pub fn slot_duration(&self) -> f64 {
        self.slot_samples() as f64 / self.sample_rate
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        let bad = |m: String| Err(CodecError::InvalidConfig(m));
        let finite_pos = |v: f64| v > 0.0 && v.is_finite();
        if !finite_pos(self.sample_rate) {
            return bad(format!("sample_rate must be > 0, got {}", self.sample_rate));
        }
        if self.sample_rate <= 2.0 * self.max_frequency() {
            return Err(CodecError::Signal(SignalError::Nyquist {
                sample_rate: self.sample_rate,
                max_frequency: self.max_frequency(),
            }));
        }
        let min_slot = 4.0 / self.phase_code.frequency();
        if !(self.duration_per_node.is_finite() && self.slot_duration() >= min_slot - 1e-12) {
            return bad(format!(
                "duration_per_node {} s holds fewer than 4 carrier cycles ({min_slot} s)",
                self.duration_per_node
            ));
        }
        if !(self.nesting_step.is_finite() && self.nesting_step >= 0.0) {
            return bad(format!("nesting_step must be >= 0, got {}", self.nesting_step));
        }
        if !finite_pos(self.base_scale) {
            return bad(format!("base_scale must be > 0, got {}", self.base_scale));
        }
        if !(0.0..=1.0).contains(&self.coupling) {
            return bad(format!("coupling must lie in [0, 1], got {}", self.coupling));
        }
        if !(0.0..=1.0).contains(&self.modulation_depth) {
            return bad(format!("modulation_depth must lie in [0, 1], got {}", self.modulation_depth));
        }
        if !finite_pos(self.gamma_spacing) || self.gamma_base <= self.wave.frequency() {
            return bad("gamma components must sit above the wave frequency with positive spacing".into());
        }
        if self.max_components == 0 {
            return bad("max_components must be >= 1".into());
        }
        if !finite_pos(self.spike_dt) {
            return bad(format!("spike_dt must be > 0, got {}", self.spike_dt));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) || !self.position.is_finite() {
            return bad("noise_sd must be >= 0 and position finite".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        EncodingConfig::default().validate().unwrap();
    }

    #[test]
    fn short_slots_and_low_rates_are_rejected() {
        let cfg = EncodingConfig { duration_per_node: 0.5, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(CodecError::InvalidConfig(_))));
        let cfg = EncodingConfig { sample_rate: 150.0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(CodecError::Signal(SignalError::Nyquist { .. }))));
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: EncodingConfig = serde_json::from_str(r#"{"seed": 9, "sample_rate": 1000}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.sample_rate, 1000.0);
        assert_eq!(cfg.base_scale, 200.0);
        let back: EncodingConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
