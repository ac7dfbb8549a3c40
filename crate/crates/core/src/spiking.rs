//! Phase-modulated inhomogeneous Poisson populations.
//!
//! Neuron `i` fires with intensity
//! `base_scale · P(S_i) · (1 + α cos(φ_C(t) − φ_P))`, optionally perturbed by
//! Gaussian rate noise clamped at zero. Spikes are drawn by per-bin Bernoulli
//! thinning from a counter-based generator, so a seed fixes the train.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csv::fmt_sig;
use crate::phase::wrap_phase;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpikingError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("neuron index {index} out of range for population of {size}")]
    Index { index: usize, size: usize },
    #[error("bin probability dt·max_rate = {0} must be < 0.1")]
    Thinness(f64),
    #[error("empty input")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikingPopulation {
    weights: Vec<f64>,
    coupling: f64,
    preferred_phase: f64,
    noise_sd: f64,
}

impl SpikingPopulation {
    /// Weights in `[0, 1]`, coupling `α ∈ [0, 1]`, noise standard deviation
    /// (Hz) `>= 0`, at least one neuron.
    pub fn new(
        weights: Vec<f64>,
        coupling: f64,
        preferred_phase: f64,
        noise_sd: f64,
    ) -> Result<Self, SpikingError> {
        if weights.is_empty() {
            return Err(SpikingError::EmptyInput);
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(SpikingError::InvalidParameter(format!(
                "weight {w} outside [0, 1]"
            )));
        }
        if !(0.0..=1.0).contains(&coupling) {
            return Err(SpikingError::InvalidParameter(format!(
                "coupling α = {coupling} outside [0, 1]"
            )));
        }
        if !(noise_sd >= 0.0 && noise_sd.is_finite()) || !preferred_phase.is_finite() {
            return Err(SpikingError::InvalidParameter(format!(
                "noise sd must be >= 0, got {noise_sd}"
            )));
        }
        Ok(SpikingPopulation {
            weights,
            coupling,
            preferred_phase: wrap_phase(preferred_phase),
            noise_sd,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn preferred_phase(&self) -> f64 {
        self.preferred_phase
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    /// `1 + α cos(φ_C − φ_P)`, shared by every neuron.
    pub fn modulation(&self, category_phase: f64) -> f64 {
        1.0 + self.coupling * (category_phase - self.preferred_phase).cos()
    }

    /// `base_scale · P(S_i) · (1 + α cos(φ_C − φ_P))`.
    pub fn modulated_rate(
        &self,
        i: usize,
        category_phase: f64,
        base_scale: f64,
    ) -> Result<f64, SpikingError> {
        let w = self.weights.get(i).ok_or(SpikingError::Index {
            index: i,
            size: self.len(),
        })?;
        Ok(base_scale * w * self.modulation(category_phase))
    }

    /// Per-neuron rates and their sum along a phase series sampled at
    /// `sample_rate`.
    pub fn population_rate(
        &self,
        phase_series: &[f64],
        base_scale: f64,
        sample_rate: f64,
    ) -> Result<PopulationTrace, SpikingError> {
        if phase_series.is_empty() {
            return Err(SpikingError::EmptyInput);
        }
        let rates: Vec<Vec<f64>> = self
            .weights
            .iter()
            .map(|w| {
                phase_series
                    .iter()
                    .map(|&p| base_scale * w * self.modulation(p))
                    .collect()
            })
            .collect();
        PopulationTrace::new(sample_rate, rates)
    }
}

/// Strictly increasing event times in `[0, duration)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    events: Vec<f64>,
    duration: f64,
}

impl SpikeTrain {
    pub fn new(events: Vec<f64>, duration: f64) -> Result<Self, SpikingError> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(SpikingError::InvalidParameter(format!(
                "duration must be >= 0, got {duration}"
            )));
        }
        if events.iter().any(|&t| !(0.0..duration).contains(&t)) {
            return Err(SpikingError::InvalidParameter(
                "spike time outside [0, duration)".into(),
            ));
        }
        if events.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpikingError::InvalidParameter(
                "spike times must be strictly increasing".into(),
            ));
        }
        Ok(SpikeTrain { events, duration })
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn count(&self) -> usize {
        self.events.len()
    }

    /// Spikes in `[from, to)`.
    pub fn count_between(&self, from: f64, to: f64) -> usize {
        let lo = self.events.partition_point(|&t| t < from);
        let hi = self.events.partition_point(|&t| t < to);
        hi.saturating_sub(lo)
    }

    /// Sliding-window rate on the grid `t_k = k·step`, `k = 0..=duration/step`.
    ///
    /// Each estimate counts spikes in `[t_k − window/2, t_k + window/2)`
    /// clipped to the recording and divides by the clipped length.
    pub fn estimate_rate(&self, window: f64, step: f64) -> Result<Vec<f64>, SpikingError> {
        if !(window > 0.0 && step > 0.0) {
            return Err(SpikingError::InvalidParameter(
                "window and step must be positive".into(),
            ));
        }
        let n = (self.duration / step + 1e-9).floor() as usize + 1;
        Ok((0..n)
            .map(|k| {
                let t = k as f64 * step;
                let lo = (t - window / 2.0).max(0.0);
                let hi = (t + window / 2.0).min(self.duration);
                if hi <= lo {
                    0.0
                } else {
                    self.count_between(lo, hi) as f64 / (hi - lo)
                }
            })
            .collect())
    }
}

/// Spike trains as CSV `neuron_id,time`, ordered by neuron then time.
pub fn spikes_to_csv(trains: &[SpikeTrain]) -> String {
    let mut out = String::from("neuron_id,time\n");
    for (i, tr) in trains.iter().enumerate() {
        for t in &tr.events {
            out.push_str(&format!("{},{}\n", i, fmt_sig(*t)));
        }
    }
    out
}

/// Parses `neuron_id,time` rows back into `neurons` trains of `duration`.
pub fn spikes_from_csv(
    text: &str,
    neurons: usize,
    duration: f64,
) -> Result<Vec<SpikeTrain>, SpikingError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |msg: String| SpikingError::InvalidParameter(msg);
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["neuron_id", "time"] {
        return Err(bad("expected header neuron_id,time".into()));
    }
    let mut events = vec![Vec::new(); neurons];
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let id: usize = record[0].parse().map_err(|_| bad(format!("bad neuron id {}", &record[0])))?;
        let t: f64 = record[1].parse().map_err(|_| bad(format!("bad time {}", &record[1])))?;
        events
            .get_mut(id)
            .ok_or(SpikingError::Index { index: id, size: neurons })?
            .push(t);
    }
    events.into_iter().map(|e| SpikeTrain::new(e, duration)).collect()
}

/// Neuron-by-time rate matrix (Hz) and its column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    sample_rate: f64,
    rates: Vec<Vec<f64>>,
    aggregate: Vec<f64>,
}

impl PopulationTrace {
    pub fn new(sample_rate: f64, rates: Vec<Vec<f64>>) -> Result<Self, SpikingError> {
        if !(sample_rate > 0.0) {
            return Err(SpikingError::InvalidParameter("sample rate must be > 0".into()));
        }
        let len = rates.first().ok_or(SpikingError::EmptyInput)?.len();
        if rates.iter().any(|r| r.len() != len) {
            return Err(SpikingError::InvalidParameter("ragged rate matrix".into()));
        }
        if rates.iter().flatten().any(|&r| !(r >= 0.0)) {
            return Err(SpikingError::InvalidParameter("rates must be >= 0".into()));
        }
        let aggregate = (0..len).map(|t| rates.iter().map(|r| r[t]).sum()).collect();
        Ok(PopulationTrace {
            sample_rate,
            rates,
            aggregate,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn aggregate(&self) -> &[f64] {
        &self.aggregate
    }

    pub fn len(&self) -> usize {
        self.aggregate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aggregate.is_empty()
    }

    /// Piecewise-constant rate of neuron `i` at time `t` (zero outside).
    pub fn rate_at(&self, i: usize, t: f64) -> f64 {
        let k = (t * self.sample_rate).floor();
        if k < 0.0 {
            return 0.0;
        }
        self.rates[i].get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().flatten().fold(0.0, |m, &r| m.max(r))
    }

    /// CSV `t,rate_0..rate_{N-1},aggregate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..self.rates.len() {
            out.push_str(&format!(",rate_{i}"));
        }
        out.push_str(",aggregate\n");
        for k in 0..self.len() {
            out.push_str(&fmt_sig(k as f64 / self.sample_rate));
            for r in &self.rates {
                out.push(',');
                out.push_str(&fmt_sig(r[k]));
            }
            out.push(',');
            out.push_str(&fmt_sig(self.aggregate[k]));
            out.push('\n');
        }
        out
    }

    /// Draws one train per neuron; neuron `i` uses generator stream `i` of
    /// `seed`.
    pub fn sample(
        &self,
        dt: f64,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Vec<SpikeTrain>, SpikingError> {
        let duration = self.len() as f64 / self.sample_rate;
        (0..self.rates.len())
            .map(|i| {
                let mut rng = stream_rng(seed, i as u64);
                sample_with(|t| self.rate_at(i, t), duration, dt, noise_sd, &mut rng)
            })
            .collect()
    }
}

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Bernoulli-thinned Poisson train for `rate_fn` (Hz) over `[0, duration)`.
///
/// Bin `k` covers `[k·dt, (k+1)·dt)`; its rate is `rate_fn(k·dt)` plus
/// `N(0, noise_sd)` clamped at zero, and a spike lands uniformly inside the
/// bin with probability `rate·width`.
pub fn sample_spikes(
    rate_fn: impl Fn(f64) -> f64,
    duration: f64,
    dt: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<SpikeTrain, SpikingError> {
    sample_with(rate_fn, duration, dt, noise_sd, &mut stream_rng(seed, 0))
}

fn sample_with(
    rate_fn: impl Fn(f64) -> f64,
    duration: f64,
    dt: f64,
    noise_sd: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SpikeTrain, SpikingError> {
    if !(dt > 0.0 && duration >= 0.0 && duration.is_finite()) {
        return Err(SpikingError::InvalidParameter(
            "dt must be > 0 and duration >= 0".into(),
        ));
    }
    let noise = Normal::new(0.0, noise_sd)
        .map_err(|e| SpikingError::InvalidParameter(e.to_string()))?;
    let bins = (duration / dt - 1e-9).ceil().max(0.0) as usize;
    let rates: Vec<f64> = (0..bins).map(|k| rate_fn(k as f64 * dt)).collect();
    if rates.iter().any(|r| !r.is_finite()) {
        return Err(SpikingError::InvalidParameter("rate function returned a non-finite value".into()));
    }
    let max_rate = rates.iter().fold(0.0_f64, |m, &r| m.max(r));
    if dt * max_rate >= 0.1 {
        return Err(SpikingError::Thinness(dt * max_rate));
    }
    let mut events = Vec::new();
    for (k, &rate) in rates.iter().enumerate() {
        let start = k as f64 * dt;
        let width = dt.min(duration - start);
        let rate = if noise_sd > 0.0 {
            (rate + noise.sample(rng)).max(0.0)
        } else {
            rate.max(0.0)
        };
        let u: f64 = rng.random();
        if u < (rate * width).min(1.0) {
            let t = start + rng.random::<f64>() * width;
            if t < duration && events.last().is_none_or(|&last| t > last) {
                events.push(t);
            }
        }
    }
    SpikeTrain::new(events, duration)
}
