use nalgebra::DMatrix;

use super::SignalError;
use crate::phase::wrap_phase;

/// Phase oscillators `dφ_i/dt = ω_i + Σ_j K_ij sin(φ_j − φ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KuramotoNetwork {
    natural_frequencies: Vec<f64>,
    coupling: DMatrix<f64>,
    phases: Vec<f64>,
}

impl KuramotoNetwork {
    /// `coupling` must be square with zero diagonal; phases are wrapped.
    pub fn new(
        natural_frequencies: Vec<f64>,
        coupling: DMatrix<f64>,
        phases: Vec<f64>,
    ) -> Result<Self, SignalError> {
        let n = natural_frequencies.len();
        if n == 0 {
            return Err(SignalError::EmptyInput);
        }
        if phases.len() != n || coupling.nrows() != n || coupling.ncols() != n {
            return Err(SignalError::InvalidParameter(format!(
                "{n} oscillators need {n} phases and an {n}x{n} coupling matrix"
            )));
        }
        if (0..n).any(|i| coupling[(i, i)] != 0.0) {
            return Err(SignalError::InvalidParameter(
                "coupling matrix must have a zero diagonal".into(),
            ));
        }
        let all = natural_frequencies.iter().chain(&phases).chain(coupling.iter());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(SignalError::InvalidParameter("non-finite Kuramoto parameter".into()));
        }
        Ok(KuramotoNetwork {
            natural_frequencies,
            coupling,
            phases: phases.into_iter().map(wrap_phase).collect(),
        })
    }

    /// Uniform coupling `K_ij = k` for `i ≠ j`.
    pub fn all_to_all(
        natural_frequencies: Vec<f64>,
        k: f64,
        phases: Vec<f64>,
    ) -> Result<Self, SignalError> {
        let n = natural_frequencies.len();
        let coupling = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { k });
        KuramotoNetwork::new(natural_frequencies, coupling, phases)
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn natural_frequencies(&self) -> &[f64] {
        &self.natural_frequencies
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    pub fn with_phases(&self, phases: &[f64]) -> Result<Self, SignalError> {
        KuramotoNetwork::new(
            self.natural_frequencies.clone(),
            self.coupling.clone(),
            phases.to_vec(),
        )
    }

    /// The vector field evaluated at arbitrary (unwrapped) phases.
    pub fn field(&self, phases: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let pull: f64 = (0..n)
                    .map(|j| self.coupling[(i, j)] * (phases[j] - phases[i]).sin())
                    .sum();
                self.natural_frequencies[i] + pull
            })
            .collect()
    }

    /// Rejects `dt` outside the stability guard `0 < dt·max|ω| < 0.1`.
    pub fn check_step(&self, dt: f64) -> Result<(), SignalError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SignalError::StepSize {
                dt,
                reason: "dt must be positive".into(),
            });
        }
        let max_omega = self.natural_frequencies.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
        if dt * max_omega >= 0.1 {
            return Err(SignalError::StepSize {
                dt,
                reason: format!("dt·max|ω| = {} must be < 0.1", dt * max_omega),
            });
        }
        Ok(())
    }

    /// One classical RK4 step, phases wrapped afterwards.
    pub fn step(&self, dt: f64) -> Result<KuramotoNetwork, SignalError> {
        self.check_step(dt)?;
        let phases = rk4_phases(self, &self.phases, dt);
        Ok(KuramotoNetwork {
            phases: phases.into_iter().map(wrap_phase).collect(),
            ..self.clone()
        })
    }

    /// Runs `steps` RK4 steps, returning every intermediate phase vector
    /// (including the initial one).
    pub fn simulate(&self, dt: f64, steps: usize) -> Result<Vec<Vec<f64>>, SignalError> {
        self.check_step(dt)?;
        let mut net = self.clone();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(net.phases.clone());
        for _ in 0..steps {
            net = net.step(dt)?;
            out.push(net.phases.clone());
        }
        Ok(out)
    }
}

fn rk4_phases(net: &KuramotoNetwork, y: &[f64], dt: f64) -> Vec<f64> {
    let shift = |k: &[f64], h: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let k1 = net.field(y);
    let k2 = net.field(&shift(&k1, dt / 2.0));
    let k3 = net.field(&shift(&k2, dt / 2.0));
    let k4 = net.field(&shift(&k3, dt));
    (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Synchrony `|mean_j e^{iφ_j}|` in `[0, 1]`.
pub fn order_parameter(phases: &[f64]) -> Result<f64, SignalError> {
    let (re, im) = phasor_mean(phases)?;
    Ok(re.hypot(im).min(1.0))
}

/// Argument of the mean phasor, wrapped.
pub fn mean_phase(phases: &[f64]) -> Result<f64, SignalError> {
    let (re, im) = phasor_mean(phases)?;
    Ok(wrap_phase(im.atan2(re)))
}

fn phasor_mean(phases: &[f64]) -> Result<(f64, f64), SignalError> {
    if phases.is_empty() {
        return Err(SignalError::EmptyInput);
    }
    let n = phases.len() as f64;
    let (re, im) = phases
        .iter()
        .fold((0.0, 0.0), |(re, im), p| (re + p.cos(), im + p.sin()));
    Ok((re / n, im / n))
}
