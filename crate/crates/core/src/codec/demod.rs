//! Known-frequency complex demodulation, phase-amplitude coupling metrics
//! and additive noise.

use std::f64::consts::TAU;

use nalgebra::Complex;
use rand_distr::{Distribution, Normal};

use super::CodecError;
use crate::phase::wrap_phase;
use crate::signal::SignalTrace;
use crate::spiking::stream_rng;

/// Smoothing window of [`estimate_phase`], in periods of the carrier.
pub const PHASE_WINDOW_PERIODS: f64 = 2.0;

/// Phase bins used by the modulation index.
pub const MI_BINS: usize = 18;

/// Smoothed complex envelope of `trace` at frequency `f`, plus the number of
/// samples at each edge where the smoothing window is truncated.
///
/// Each sample is multiplied by `2e^{−i2πft}` and averaged over a centered
/// window spanning `periods` cycles of `f` (fractional ends weighted by
/// overlap). A pure `A cos(2πft + φ)` maps to `A e^{iφ}` away from the edges.
pub fn demodulate(trace: &SignalTrace, f: f64, periods: f64) -> (Vec<Complex<f64>>, usize) {
    let fs = trace.sample_rate();
    let rotated: Vec<Complex<f64>> = trace
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &x)| Complex::from_polar(2.0 * x, -TAU * f * trace.time(k)))
        .collect();
    let width = periods * fs / f;
    let half = width / 2.0;
    let reach = (half + 0.5).ceil() as isize;
    // weight of offset j: overlap of [j - 1/2, j + 1/2] with [-half, half]
    let weights: Vec<f64> = (-reach..=reach)
        .map(|j| {
            let lo = (j as f64 - 0.5).max(-half);
            let hi = (j as f64 + 0.5).min(half);
            (hi - lo).max(0.0)
        })
        .collect();
    let n = rotated.len() as isize;
    let smoothed = (0..n)
        .map(|k| {
            let mut acc = Complex::new(0.0, 0.0);
            let mut total = 0.0;
            for (w, j) in weights.iter().zip(-reach..=reach) {
                let idx = k + j;
                if *w > 0.0 && (0..n).contains(&idx) {
                    acc += rotated[idx as usize] * *w;
                    total += w;
                }
            }
            acc / total
        })
        .collect();
    (smoothed, reach as usize)
}

fn require_cycles(trace: &SignalTrace, f: f64, cycles: f64) -> Result<(), CodecError> {
    let needed = (cycles * trace.sample_rate() / f).ceil() as usize;
    if trace.len() < needed {
        return Err(CodecError::TooShort {
            needed,
            have: trace.len(),
        });
    }
    Ok(())
}

/// Instantaneous phase of the `f` component, wrapped to `[0, 2π)`.
///
/// Needs at least four cycles of `f`; samples within one period of either
/// end use a truncated window and are less accurate.
pub fn estimate_phase(trace: &SignalTrace, f: f64) -> Result<Vec<f64>, CodecError> {
    Ok(estimate_phase_with_margin(trace, f)?.0)
}

/// [`estimate_phase`] plus the edge margin in samples.
pub fn estimate_phase_with_margin(
    trace: &SignalTrace,
    f: f64,
) -> Result<(Vec<f64>, usize), CodecError> {
    if !(f > 0.0) {
        return Err(CodecError::InvalidConfig(format!("frequency must be > 0, got {f}")));
    }
    require_cycles(trace, f, 4.0)?;
    let (env, margin) = demodulate(trace, f, PHASE_WINDOW_PERIODS);
    let phases = env
        .iter()
        .enumerate()
        .map(|(k, z)| wrap_phase(TAU * f * trace.time(k) + z.arg()))
        .collect();
    Ok((phases, margin))
}

/// Phase-binned amplitude distribution of a high band against the phase of
/// a low band.
#[derive(Debug, Clone, PartialEq)]
pub struct PacProfile {
    pub bin_centers: Vec<f64>,
    pub mean_amplitude: Vec<f64>,
    /// Normalized KL divergence from uniform, in `[0, 1]`.
    pub modulation_index: f64,
    /// Argument of the first circular harmonic of the binned amplitudes.
    pub preferred_phase: f64,
}

/// Bins the `f_high` envelope by the `f_low` phase over interior samples.
///
/// The trace must span at least ten cycles of `f_low`.
pub fn pac_profile(
    trace: &SignalTrace,
    f_low: f64,
    f_high: f64,
    bins: usize,
) -> Result<PacProfile, CodecError> {
    if !(f_low > 0.0 && f_high > f_low) || bins < 2 {
        return Err(CodecError::InvalidConfig(format!(
            "need 0 < f_low < f_high and >= 2 bins (got {f_low}, {f_high}, {bins})"
        )));
    }
    require_cycles(trace, f_low, 10.0)?;
    let (phase, low_margin) = estimate_phase_with_margin(trace, f_low)?;
    let (env, high_margin) = demodulate(trace, f_high, 3.0);
    let margin = low_margin.max(high_margin);
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for k in margin..trace.len().saturating_sub(margin) {
        let b = ((phase[k] / TAU * bins as f64) as usize).min(bins - 1);
        sum[b] += env[k].norm();
        count[b] += 1;
    }
    let mean_amplitude: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    let bin_centers: Vec<f64> = (0..bins).map(|b| (b as f64 + 0.5) * TAU / bins as f64).collect();
    let total: f64 = mean_amplitude.iter().sum();
    let modulation_index = if total > 0.0 {
        let entropy: f64 = mean_amplitude
            .iter()
            .map(|a| a / total)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum();
        let max_entropy = (bins as f64).ln();
        ((max_entropy - entropy) / max_entropy).max(0.0)
    } else {
        0.0
    };
    let harmonic = bin_centers
        .iter()
        .zip(&mean_amplitude)
        .fold(Complex::new(0.0, 0.0), |acc, (&c, &a)| acc + Complex::from_polar(a, c));
    Ok(PacProfile {
        bin_centers,
        mean_amplitude,
        modulation_index,
        preferred_phase: wrap_phase(harmonic.arg()),
    })
}

/// KL-based modulation index over [`MI_BINS`] phase bins.
pub fn modulation_index(trace: &SignalTrace, f_low: f64, f_high: f64) -> Result<f64, CodecError> {
    Ok(pac_profile(trace, f_low, f_high, MI_BINS)?.modulation_index)
}

/// Adds white Gaussian noise at the given signal-to-noise ratio (dB,
/// relative to the trace's mean power).
pub fn add_white_noise(trace: &SignalTrace, snr_db: f64, seed: u64) -> SignalTrace {
    let sd = (trace.mean_power() / 10f64.powf(snr_db / 10.0)).sqrt();
    if !(sd > 0.0) {
        return trace.clone();
    }
    let normal = Normal::new(0.0, sd).expect("finite sd");
    let mut rng = stream_rng(seed, u64::MAX);
    let samples = trace.samples().iter().map(|v| v + normal.sample(&mut rng)).collect();
    SignalTrace::new(trace.sample_rate(), trace.start_time(), trace.position(), samples)
        .expect("same shape as a valid trace")
}
