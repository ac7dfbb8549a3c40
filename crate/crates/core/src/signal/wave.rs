use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{require, SignalError, SignalTrace};
use crate::phase::wrap_phase;

/// `L(t, x) = A_L cos(2π f_L t − k x + φ_L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WaveRepr", into = "WaveRepr")]
pub struct TravelingWave {
    amplitude: f64,
    frequency: f64,
    wavenumber: f64,
    phase_offset: f64,
}

#[derive(Serialize, Deserialize)]
struct WaveRepr {
    amplitude: f64,
    frequency: f64,
    #[serde(default)]
    wavenumber: f64,
    #[serde(default)]
    phase_offset: f64,
}

impl TryFrom<WaveRepr> for TravelingWave {
    type Error = SignalError;
    fn try_from(r: WaveRepr) -> Result<Self, SignalError> {
        TravelingWave::new(r.amplitude, r.frequency, r.wavenumber, r.phase_offset)
    }
}

impl From<TravelingWave> for WaveRepr {
    fn from(w: TravelingWave) -> Self {
        WaveRepr {
            amplitude: w.amplitude,
            frequency: w.frequency,
            wavenumber: w.wavenumber,
            phase_offset: w.phase_offset,
        }
    }
}

impl TravelingWave {
    pub fn new(
        amplitude: f64,
        frequency: f64,
        wavenumber: f64,
        phase_offset: f64,
    ) -> Result<Self, SignalError> {
        require(amplitude >= 0.0 && amplitude.is_finite(), || {
            format!("wave amplitude must be >= 0, got {amplitude}")
        })?;
        require(frequency > 0.0 && frequency.is_finite(), || {
            format!("wave frequency must be > 0, got {frequency}")
        })?;
        require(wavenumber.is_finite() && phase_offset.is_finite(), || {
            "wave parameters must be finite".into()
        })?;
        Ok(TravelingWave {
            amplitude,
            frequency,
            wavenumber,
            phase_offset: wrap_phase(phase_offset),
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn phase_offset(&self) -> f64 {
        self.phase_offset
    }

    fn argument(&self, t: f64, x: f64) -> f64 {
        TAU * self.frequency * t - self.wavenumber * x + self.phase_offset
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.amplitude * self.argument(t, x).cos()
    }

    /// Instantaneous phase of the wave, wrapped.
    pub fn phase(&self, t: f64, x: f64) -> f64 {
        wrap_phase(self.argument(t, x))
    }
}

/// One gamma component whose amplitude is `A_0 + A_1 cos(φ − φ_P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComponentRepr", into = "ComponentRepr")]
pub struct HighFreqComponent {
    base_amplitude: f64,
    modulation_depth: f64,
    frequency: f64,
    phase: f64,
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr {
    base_amplitude: f64,
    modulation_depth: f64,
    frequency: f64,
    #[serde(default)]
    phase: f64,
}

impl TryFrom<ComponentRepr> for HighFreqComponent {
    type Error = SignalError;
    fn try_from(r: ComponentRepr) -> Result<Self, SignalError> {
        HighFreqComponent::new(r.base_amplitude, r.modulation_depth, r.frequency, r.phase)
    }
}

impl From<HighFreqComponent> for ComponentRepr {
    fn from(c: HighFreqComponent) -> Self {
        ComponentRepr {
            base_amplitude: c.base_amplitude,
            modulation_depth: c.modulation_depth,
            frequency: c.frequency,
            phase: c.phase,
        }
    }
}

impl HighFreqComponent {
    /// Requires `0 <= A_1 <= A_0` so the instantaneous amplitude never goes
    /// negative.
    pub fn new(
        base_amplitude: f64,
        modulation_depth: f64,
        frequency: f64,
        phase: f64,
    ) -> Result<Self, SignalError> {
        require(base_amplitude >= 0.0 && base_amplitude.is_finite(), || {
            format!("A_0 must be >= 0, got {base_amplitude}")
        })?;
        require(
            modulation_depth >= 0.0 && modulation_depth <= base_amplitude,
            || format!("A_1 must lie in [0, A_0 = {base_amplitude}], got {modulation_depth}"),
        )?;
        require(frequency > 0.0 && frequency.is_finite(), || {
            format!("component frequency must be > 0, got {frequency}")
        })?;
        require(phase.is_finite(), || "component phase must be finite".into())?;
        Ok(HighFreqComponent {
            base_amplitude,
            modulation_depth,
            frequency,
            phase: wrap_phase(phase),
        })
    }

    pub fn base_amplitude(&self) -> f64 {
        self.base_amplitude
    }

    pub fn modulation_depth(&self) -> f64 {
        self.modulation_depth
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn carrier(&self, t: f64) -> f64 {
        (TAU * self.frequency * t + self.phase).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacConfig {
    preferred_phase: f64,
}

impl PacConfig {
    pub fn new(preferred_phase: f64) -> Self {
        PacConfig {
            preferred_phase: wrap_phase(preferred_phase),
        }
    }

    pub fn preferred_phase(&self) -> f64 {
        self.preferred_phase
    }
}

/// `A_0 + A_1 cos(φ − φ_P)`.
pub fn pac_amplitude(c: &HighFreqComponent, phase: f64, pac: &PacConfig) -> f64 {
    c.base_amplitude + c.modulation_depth * (phase - pac.preferred_phase).cos()
}

/// `Σ_i [A_0^i + A_1^i cos(φ_L(t,x) − φ_P)] cos(2π f_H^i t + φ_H^i)` at one
/// instant.
pub fn eval_bank(
    bank: &[HighFreqComponent],
    wave: &TravelingWave,
    pac: &PacConfig,
    t: f64,
    x: f64,
) -> f64 {
    let phase = wave.phase(t, x);
    bank.iter()
        .map(|c| pac_amplitude(c, phase, pac) * c.carrier(t))
        .sum()
}

fn sample_count(sample_rate: f64, duration: f64) -> Result<usize, SignalError> {
    require(sample_rate > 0.0 && sample_rate.is_finite(), || {
        format!("sample rate must be > 0, got {sample_rate}")
    })?;
    let n = (duration * sample_rate).round();
    require(n >= 2.0, || {
        format!("duration·sample_rate must be >= 2, got {}", duration * sample_rate)
    })?;
    Ok(n as usize)
}

fn check_bank(
    bank: &[HighFreqComponent],
    wave: &TravelingWave,
    sample_rate: f64,
) -> Result<(), SignalError> {
    let max_frequency = bank.iter().map(|c| c.frequency).fold(0.0, f64::max);
    if sample_rate <= 2.0 * max_frequency {
        return Err(SignalError::Nyquist {
            sample_rate,
            max_frequency,
        });
    }
    if let Some(c) = bank.iter().find(|c| c.frequency <= wave.frequency) {
        return Err(SignalError::InvalidParameter(format!(
            "component at {} Hz is not above the wave's {} Hz",
            c.frequency, wave.frequency
        )));
    }
    Ok(())
}

/// Phase-modulated bank sampled from `t = 0`.
pub fn synth_modulated(
    bank: &[HighFreqComponent],
    wave: &TravelingWave,
    pac: &PacConfig,
    sample_rate: f64,
    duration: f64,
    x: f64,
) -> Result<SignalTrace, SignalError> {
    synth_modulated_at(bank, wave, pac, sample_rate, 0.0, duration, x)
}

/// Phase-modulated bank sampled on `start + k / sample_rate`.
pub fn synth_modulated_at(
    bank: &[HighFreqComponent],
    wave: &TravelingWave,
    pac: &PacConfig,
    sample_rate: f64,
    start: f64,
    duration: f64,
    x: f64,
) -> Result<SignalTrace, SignalError> {
    let n = sample_count(sample_rate, duration)?;
    check_bank(bank, wave, sample_rate)?;
    let samples = (0..n)
        .map(|k| eval_bank(bank, wave, pac, start + k as f64 / sample_rate, x))
        .collect();
    SignalTrace::new(sample_rate, start, x, samples)
}

/// Unmodulated bank `Σ_i A_0^i cos(2π f_H^i t + φ_H^i)`.
pub fn synth_unmodulated(
    bank: &[HighFreqComponent],
    sample_rate: f64,
    duration: f64,
) -> Result<SignalTrace, SignalError> {
    let n = sample_count(sample_rate, duration)?;
    let max_frequency = bank.iter().map(|c| c.frequency).fold(0.0, f64::max);
    if sample_rate <= 2.0 * max_frequency {
        return Err(SignalError::Nyquist {
            sample_rate,
            max_frequency,
        });
    }
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate;
            bank.iter().map(|c| c.base_amplitude * c.carrier(t)).sum()
        })
        .collect();
    SignalTrace::new(sample_rate, 0.0, 0.0, samples)
}

/// The wave alone, sampled on `start + k / sample_rate`.
pub fn synth_wave(
    wave: &TravelingWave,
    sample_rate: f64,
    start: f64,
    duration: f64,
    x: f64,
) -> Result<SignalTrace, SignalError> {
    let n = sample_count(sample_rate, duration)?;
    if sample_rate <= 2.0 * wave.frequency {
        return Err(SignalError::Nyquist {
            sample_rate,
            max_frequency: wave.frequency,
        });
    }
    let samples = (0..n)
        .map(|k| wave.eval(start + k as f64 / sample_rate, x))
        .collect();
    SignalTrace::new(sample_rate, start, x, samples)
}

/// Field-potential-like mixture `L(t, x) + H_mod(t, x)`, the input the
/// coupling analyses expect.
pub fn synth_composite(
    bank: &[HighFreqComponent],
    wave: &TravelingWave,
    pac: &PacConfig,
    sample_rate: f64,
    duration: f64,
    x: f64,
) -> Result<SignalTrace, SignalError> {
    let high = synth_modulated(bank, wave, pac, sample_rate, duration, x)?;
    let low = synth_wave(wave, sample_rate, 0.0, duration, x)?;
    low.add(&high)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn wave(a: f64, f: f64, k: f64, phi: f64) -> TravelingWave {
        TravelingWave::new(a, f, k, phi).unwrap()
    }

    #[test]
    fn wave_examples() {
        assert_eq!(wave(1.0, 3.0, 0.0, 0.0).eval(0.0, 0.0), 1.0);
        let w = wave(1.0, 4.0, 0.0, 0.0);
        assert!(w.eval(1.0 / 16.0, 0.0).abs() < 1e-12);
        let direct = 2.0 * (0.4 * PI - 0.5 + 0.3_f64).cos();
        assert!((wave(2.0, 2.0, 1.0, 0.3).eval(0.1, 0.5) - direct).abs() < 1e-12);
    }

    #[test]
    fn wave_phase_examples() {
        let w = wave(1.0, 2.5, 0.8, 0.0);
        assert_eq!(w.phase(0.0, 0.0), 0.0);
        let p0 = w.phase(0.13, 0.2);
        let p1 = w.phase(0.13 + 1.0 / 2.5, 0.2);
        assert!(crate::circular_distance(p0, p1) < 1e-12);
        // finite difference in x gives −k
        let h = 1e-4;
        let dphi = (w.phase(0.05, 0.3 + h) - w.phase(0.05, 0.3)) / h;
        assert!((dphi + 0.8).abs() < 1e-6);
    }

    #[test]
    fn invalid_parameters() {
        assert!(TravelingWave::new(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(TravelingWave::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(HighFreqComponent::new(1.0, 1.5, 60.0, 0.0).is_err());
        assert!(HighFreqComponent::new(1.0, -0.1, 60.0, 0.0).is_err());
        assert!((TravelingWave::new(1.0, 1.0, 0.0, -0.5).unwrap().phase_offset() - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn pac_amplitude_extremes_and_mean() {
        let c = HighFreqComponent::new(1.5, 0.7, 60.0, 0.0).unwrap();
        let pac = PacConfig::new(1.2);
        assert!((pac_amplitude(&c, 1.2, &pac) - 2.2).abs() < 1e-12);
        assert!((pac_amplitude(&c, 1.2 + PI, &pac) - 0.8).abs() < 1e-12);
        // midpoint quadrature over one period
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|k| pac_amplitude(&c, (k as f64 + 0.5) * TAU / n as f64, &pac))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.5).abs() < 1e-9);
    }

    #[test]
    fn modulation_off_matches_unmodulated_sum() {
        let bank = [
            HighFreqComponent::new(1.0, 0.0, 60.0, 0.3).unwrap(),
            HighFreqComponent::new(0.4, 0.0, 75.0, 1.0).unwrap(),
        ];
        let w = wave(1.0, 2.0, 0.0, 0.0);
        let m = synth_modulated(&bank, &w, &PacConfig::new(0.5), 500.0, 1.0, 0.0).unwrap();
        let u = synth_unmodulated(&bank, 500.0, 1.0).unwrap();
        for (a, b) in m.samples().iter().zip(u.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_bank_is_silent() {
        let w = wave(1.0, 2.0, 0.0, 0.0);
        let m = synth_modulated(&[], &w, &PacConfig::new(0.0), 100.0, 0.5, 0.0).unwrap();
        assert_eq!(m.len(), 50);
        assert!(m.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_component_matches_pointwise_oracle() {
        let (a0, a1, fh, ph) = (1.3, 0.9, 48.0, 0.4);
        let (al, fl, k, phl, pp, x) = (0.7, 3.0, 0.6, 1.1, 2.0, 0.25);
        let c = HighFreqComponent::new(a0, a1, fh, ph).unwrap();
        let w = wave(al, fl, k, phl);
        let fs = 400.0;
        let tr = synth_modulated(&[c], &w, &PacConfig::new(pp), fs, 0.75, x).unwrap();
        for (i, v) in tr.samples().iter().enumerate() {
            let t = i as f64 / fs;
            let low_phase = 2.0 * PI * fl * t - k * x + phl;
            let expected = (a0 + a1 * (low_phase - pp).cos()) * (2.0 * PI * fh * t + ph).cos();
            assert!((v - expected).abs() < 1e-12, "sample {i}");
        }
    }

    #[test]
    fn nyquist_and_band_checks() {
        let w = wave(1.0, 2.0, 0.0, 0.0);
        let c = HighFreqComponent::new(1.0, 0.5, 60.0, 0.0).unwrap();
        assert!(matches!(
            synth_modulated(&[c], &w, &PacConfig::new(0.0), 120.0, 1.0, 0.0),
            Err(SignalError::Nyquist { .. })
        ));
        let slow = HighFreqComponent::new(1.0, 0.5, 1.5, 0.0).unwrap();
        assert!(synth_modulated(&[slow], &w, &PacConfig::new(0.0), 120.0, 1.0, 0.0).is_err());
        assert!(synth_modulated(&[c], &w, &PacConfig::new(0.0), 500.0, 0.001, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn modulated_output_is_bounded(
            a0 in 0.0..2.0f64, frac in 0.0..=1.0f64, fh in 20.0..90.0f64, pp in 0.0..6.3f64,
            t0 in 0.0..5.0f64,
        ) {
            let c1 = HighFreqComponent::new(a0, frac * a0, fh, 0.2).unwrap();
            let c2 = HighFreqComponent::new(0.5, 0.25, fh + 5.0, 1.0).unwrap();
            let w = TravelingWave::new(1.0, 2.0, 0.3, 0.0).unwrap();
            let tr = synth_modulated_at(&[c1, c2], &w, &PacConfig::new(pp), 250.0, t0, 0.4, 0.1).unwrap();
            let bound = a0 + frac * a0 + 0.75;
            prop_assert!(tr.samples().iter().all(|v| v.abs() <= bound + 1e-12));
        }

        #[test]
        fn pac_is_periodic_and_peaks_at_preferred(phi in -10.0..10.0f64, pp in 0.0..TAU) {
            let c = HighFreqComponent::new(1.0, 0.6, 60.0, 0.0).unwrap();
            let pac = PacConfig::new(pp);
            let a = pac_amplitude(&c, phi, &pac);
            prop_assert!((a - pac_amplitude(&c, phi + TAU, &pac)).abs() < 1e-12);
            prop_assert!(a <= pac_amplitude(&c, pp, &pac) + 1e-15);
        }
    }
}
