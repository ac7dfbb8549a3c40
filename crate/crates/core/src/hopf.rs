//! Oscillatory states `A e^{iφ}` under merge (amplitudes multiply, phases
//! add) and comultiplication (recovery of the recorded constituents).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phase::wrap_phase;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HopfError {
    #[error("amplitude must be finite and >= 0, got {0}")]
    Amplitude(f64),
    #[error("atomic element has no recorded decomposition")]
    NoDecomposition,
    #[error("recorded bands do not multiply to the element")]
    InconsistentBands,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementRepr", into = "ElementRepr")]
pub struct HopfElement {
    amplitude: f64,
    phase: f64,
    bands: Option<Box<(HopfElement, HopfElement)>>,
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    amplitude: f64,
    phase: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bands: Option<Box<(HopfElement, HopfElement)>>,
}

impl TryFrom<ElementRepr> for HopfElement {
    type Error = HopfError;
    fn try_from(r: ElementRepr) -> Result<Self, HopfError> {
        let atom = HopfElement::new(r.amplitude, r.phase)?;
        match r.bands {
            None => Ok(atom),
            Some(pair) => {
                let merged = hopf_merge(&pair.0, &pair.1);
                let tol = 1e-9 * merged.amplitude.max(1.0);
                if (merged.amplitude - atom.amplitude).abs() > tol
                    || crate::circular_distance(merged.phase, atom.phase) > 1e-9
                {
                    return Err(HopfError::InconsistentBands);
                }
                Ok(merged)
            }
        }
    }
}

impl From<HopfElement> for ElementRepr {
    fn from(e: HopfElement) -> Self {
        ElementRepr {
            amplitude: e.amplitude,
            phase: e.phase,
            bands: e.bands,
        }
    }
}

impl HopfElement {
    /// An atomic element.
    pub fn new(amplitude: f64, phase: f64) -> Result<Self, HopfError> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) || !phase.is_finite() {
            return Err(HopfError::Amplitude(amplitude));
        }
        Ok(HopfElement {
            amplitude,
            phase: wrap_phase(phase),
            bands: None,
        })
    }

    /// `1 e^{i0}`.
    pub fn unit() -> Self {
        HopfElement {
            amplitude: 1.0,
            phase: 0.0,
            bands: None,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_atomic(&self) -> bool {
        self.bands.is_none()
    }

    /// Real and imaginary parts.
    pub fn to_complex(&self) -> (f64, f64) {
        (
            self.amplitude * self.phase.cos(),
            self.amplitude * self.phase.sin(),
        )
    }

    /// Same amplitude and phase, constituents forgotten.
    pub fn atom(&self) -> HopfElement {
        HopfElement {
            bands: None,
            ..self.clone()
        }
    }
}

/// `M(x, y) = A_x A_y e^{i(φ_x + φ_y)}`, recording `(x, y)` as bands.
pub fn hopf_merge(x: &HopfElement, y: &HopfElement) -> HopfElement {
    HopfElement {
        amplitude: x.amplitude * y.amplitude,
        phase: wrap_phase(x.phase + y.phase),
        bands: Some(Box::new((x.clone(), y.clone()))),
    }
}

/// The recorded constituent pair of a merged element.
pub fn comultiply(x: &HopfElement) -> Result<(HopfElement, HopfElement), HopfError> {
    x.bands
        .as_deref()
        .cloned()
        .ok_or(HopfError::NoDecomposition)
}

/// `x_{k+1} = M(x_k, z)` applied `n` times from `x_0`.
pub fn iterate_merge(x0: &HopfElement, z: &HopfElement, n: u32) -> HopfElement {
    (0..n).fold(x0.clone(), |x, _| hopf_merge(&x, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular_distance;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn el(a: f64, p: f64) -> HopfElement {
        HopfElement::new(a, p).unwrap()
    }

    fn same(a: &HopfElement, b: &HopfElement) -> bool {
        (a.amplitude() - b.amplitude()).abs() <= 1e-12 * a.amplitude().max(1.0)
            && circular_distance(a.phase(), b.phase()) <= 1e-12
    }

    #[test]
    fn merge_examples() {
        let m = hopf_merge(&el(2.0, PI / 4.0), &el(3.0, PI / 4.0));
        assert!(same(&m, &el(6.0, PI / 2.0)));
        let x = el(1.7, 2.2);
        assert!(same(&hopf_merge(&x, &HopfElement::unit()), &x));
        let y = el(0.4, 5.9);
        assert!(same(&hopf_merge(&x, &y), &hopf_merge(&y, &x)));
    }

    #[test]
    fn comultiply_examples() {
        let (a, b) = (el(1.5, 0.3), el(0.8, 4.0));
        let m = hopf_merge(&a, &b);
        let (a2, b2) = comultiply(&m).unwrap();
        assert!(same(&hopf_merge(&a2, &b2), &m));
        assert_eq!(comultiply(&a), Err(HopfError::NoDecomposition));

        let z = el(2.5, 1.0);
        let (u, v) = comultiply(&hopf_merge(&HopfElement::unit(), &z)).unwrap();
        assert!(same(&u, &HopfElement::unit()));
        assert!(same(&v, &z));
    }

    #[test]
    fn iterate_examples() {
        let x0 = el(2.0, 0.1);
        assert_eq!(iterate_merge(&x0, &el(0.5, 0.2), 0), x0);
        let it = iterate_merge(&x0, &el(0.5, 0.2), 3);
        assert!(same(&it, &el(0.25, 0.7)));
        let spin = iterate_merge(&x0, &el(1.0, 0.9), 5);
        assert!((spin.amplitude() - 2.0).abs() < 1e-15);
        assert!(circular_distance(spin.phase(), 0.1 + 4.5) < 1e-12);
    }

    #[test]
    fn serialization_checks_bands() {
        let m = hopf_merge(&el(2.0, 0.5), &el(3.0, 1.0));
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<HopfElement>(&text).unwrap(), m);
        let atom = serde_json::to_string(&el(1.0, 0.0)).unwrap();
        assert!(!atom.contains("bands"));
        let forged = r#"{"amplitude": 5.0, "phase": 1.5, "bands": [{"amplitude": 2.0, "phase": 0.5}, {"amplitude": 3.0, "phase": 1.0}]}"#;
        assert!(serde_json::from_str::<HopfElement>(forged).is_err());
        assert!(HopfElement::new(-1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn merge_is_associative_on_amplitude_and_phase(
            a in 0.01..5.0f64, b in 0.01..5.0f64, c in 0.01..5.0f64,
            p in 0.0..6.3f64, q in 0.0..6.3f64, r in 0.0..6.3f64,
        ) {
            let (x, y, z) = (el(a, p), el(b, q), el(c, r));
            let left = hopf_merge(&hopf_merge(&x, &y), &z);
            let right = hopf_merge(&x, &hopf_merge(&y, &z));
            prop_assert!(same(&left, &right));
            let logs = a.ln() + b.ln();
            prop_assert!((hopf_merge(&x, &y).amplitude().ln() - logs).abs() < 1e-9);
        }

        #[test]
        fn iterate_equals_explicit_merges(a in 0.1..3.0f64, p in 0.0..6.3f64, n in 0u32..20) {
            let x0 = el(1.3, 0.4);
            let z = el(a, p);
            let mut explicit = x0.clone();
            for _ in 0..n {
                explicit = hopf_merge(&explicit, &z);
            }
            prop_assert_eq!(iterate_merge(&x0, &z, n), explicit);
            let amp = 1.3 * a.powi(n as i32);
            prop_assert!((iterate_merge(&x0, &z, n).amplitude() - amp).abs() <= 1e-12 * amp.max(1.0));
        }
    }
}
