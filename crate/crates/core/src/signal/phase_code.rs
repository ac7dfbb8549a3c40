use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{require, SignalError};
use crate::phase::{circular_distance, wrap_phase};
use crate::syntax::Category;

/// Category-to-phase code carried by `S(t) = A_s cos(2π f_s t + φ_C)`.
///
/// Mapped phases are pairwise separated by at least `2π / (4·|categories|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhaseCodeRepr", into = "PhaseCodeRepr")]
pub struct PhaseCode {
    amplitude: f64,
    frequency: f64,
    mapping: BTreeMap<Category, f64>,
}

#[derive(Serialize, Deserialize)]
struct PhaseCodeRepr {
    amplitude: f64,
    frequency: f64,
    mapping: BTreeMap<Category, f64>,
}

impl TryFrom<PhaseCodeRepr> for PhaseCode {
    type Error = SignalError;
    fn try_from(r: PhaseCodeRepr) -> Result<Self, SignalError> {
        PhaseCode::new(r.amplitude, r.frequency, r.mapping)
    }
}

impl From<PhaseCode> for PhaseCodeRepr {
    fn from(p: PhaseCode) -> Self {
        PhaseCodeRepr {
            amplitude: p.amplitude,
            frequency: p.frequency,
            mapping: p.mapping,
        }
    }
}

impl PhaseCode {
    pub fn new(
        amplitude: f64,
        frequency: f64,
        mapping: BTreeMap<Category, f64>,
    ) -> Result<Self, SignalError> {
        require(amplitude >= 0.0 && amplitude.is_finite(), || {
            format!("phase-code amplitude must be >= 0, got {amplitude}")
        })?;
        require(frequency > 0.0 && frequency.is_finite(), || {
            format!("phase-code frequency must be > 0, got {frequency}")
        })?;
        require(!mapping.is_empty(), || "phase code maps no categories".into())?;
        let mapping: BTreeMap<Category, f64> = mapping
            .into_iter()
            .map(|(c, p)| (c, wrap_phase(p)))
            .collect();
        let min_sep = TAU / (4.0 * mapping.len() as f64);
        let phases: Vec<(&Category, f64)> = mapping.iter().map(|(c, p)| (c, *p)).collect();
        for (i, (ca, pa)) in phases.iter().enumerate() {
            for (cb, pb) in &phases[i + 1..] {
                if circular_distance(*pa, *pb) < min_sep {
                    return Err(SignalError::InvalidParameter(format!(
                        "phases of {ca} and {cb} are closer than {min_sep:.4} rad"
                    )));
                }
            }
        }
        Ok(PhaseCode {
            amplitude,
            frequency,
            mapping,
        })
    }

    /// Categories placed at `2πk / K` in the given order.
    pub fn evenly_spaced(
        amplitude: f64,
        frequency: f64,
        categories: impl IntoIterator<Item = Category>,
    ) -> Result<Self, SignalError> {
        let cats: Vec<Category> = categories.into_iter().collect();
        let k = cats.len() as f64;
        let mapping = cats
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, TAU * i as f64 / k))
            .collect();
        PhaseCode::new(amplitude, frequency, mapping)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn mapping(&self) -> &BTreeMap<Category, f64> {
        &self.mapping
    }

    pub fn phase_of(&self, category: &Category) -> Result<f64, SignalError> {
        self.mapping
            .get(category)
            .copied()
            .ok_or_else(|| SignalError::UnknownCategory(category.to_string()))
    }

    /// `A_s cos(2π f_s t + φ_C)`.
    pub fn eval(&self, category: &Category, t: f64) -> Result<f64, SignalError> {
        Ok(self.eval_phase(self.phase_of(category)?, t))
    }

    /// The carrier at an arbitrary offset phase.
    pub fn eval_phase(&self, phase: f64, t: f64) -> f64 {
        self.amplitude * (TAU * self.frequency * t + phase).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn code(pairs: &[(&str, f64)]) -> PhaseCode {
        let m = pairs.iter().map(|(c, p)| (Category::from(*c), *p)).collect();
        PhaseCode::new(2.0, 6.0, m).unwrap()
    }

    #[test]
    fn eval_examples() {
        let pc = code(&[("N", 0.0), ("V", PI)]);
        assert_eq!(pc.eval(&"N".into(), 0.0).unwrap(), 2.0);
        assert!((pc.eval(&"V".into(), 0.0).unwrap() + 2.0).abs() < 1e-12);
        assert!(matches!(
            pc.eval(&"P".into(), 0.0),
            Err(SignalError::UnknownCategory(_))
        ));
    }

    #[test]
    fn phase_offset_is_a_time_shift() {
        let delta = 0.9;
        let pc = code(&[("N", 0.2), ("V", 0.2 + delta)]);
        let shift = delta / (2.0 * PI * pc.frequency());
        // brute-force the lag maximizing cross-correlation on a fine grid
        let fs = 2000.0;
        let n = 2000;
        let n_sig: Vec<f64> = (0..n).map(|i| pc.eval(&"N".into(), i as f64 / fs).unwrap()).collect();
        let v_sig: Vec<f64> = (0..n).map(|i| pc.eval(&"V".into(), i as f64 / fs).unwrap()).collect();
        let best = (0..200)
            .max_by(|&a, &b| {
                let xc = |lag: usize| -> f64 {
                    (0..n - lag).map(|i| v_sig[i] * n_sig[i + lag]).sum::<f64>() / (n - lag) as f64
                };
                xc(a).total_cmp(&xc(b))
            })
            .unwrap();
        assert!((best as f64 / fs - shift).abs() <= 1.0 / fs);
    }

    #[test]
    fn separation_is_enforced() {
        assert!(PhaseCode::new(1.0, 6.0, [("N".into(), 0.0), ("V".into(), 0.1)].into()).is_err());
        assert!(PhaseCode::new(1.0, 6.0, [("N".into(), 0.05), ("V".into(), TAU - 0.05)].into()).is_err());
        assert!(PhaseCode::new(1.0, 6.0, BTreeMap::new()).is_err());
        let even = PhaseCode::evenly_spaced(1.0, 6.0, ["N", "V", "A", "P"].map(Category::from)).unwrap();
        assert!((even.phase_of(&"A".into()).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let pc = code(&[("N", 0.0), ("V", PI)]);
        let text = serde_json::to_string(&pc).unwrap();
        assert_eq!(serde_json::from_str::<PhaseCode>(&text).unwrap(), pc);
    }
}
