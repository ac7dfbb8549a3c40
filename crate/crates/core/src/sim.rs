//! The four-level state (lexical vector, population rates, composition
//! frontier, oscillator phases) evolved together.
//!
//! The continuous blocks follow
//!
//! ```text
//! dr/dt = (W X(t) − r) / τ_R
//! do/dt = (base · P_i · (1 + α cos(φ̄ − φ_P)) − o) / τ_O
//! dφ/dt = ω + Σ_j K_ij sin(φ_j − φ_i)
//! ```
//!
//! where `X(t)` is the most recently presented item and `φ̄` the mean
//! oscillator phase. Neuron `i` is driven once the `i`-th item has been
//! presented. Before any presentation the lexical and rate blocks are
//! frozen. The frontier changes only at scheduled events: a presentation
//! pushes the item's reduced embedding, a merge replaces two frontier
//! entries by their composition.

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::csv::fmt_sig;
use crate::lexicon::{LexiconError, Projection, RecurrentReducer};
use crate::phase::wrap_phase;
use crate::signal::{order_parameter, KuramotoNetwork, SignalError};
use crate::spiking::SpikingPopulation;
use crate::syntax::LexicalItem;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{block} block has dimension {found}, expected {expected}")]
    Dimension {
        block: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("step size {dt} s rejected: {reason}")]
    StepSize { dt: f64, reason: String },
    #[error("schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

/// A composed (or presented) constituent waiting on the frontier.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierEntry {
    pub node: String,
    pub vector: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoseState {
    /// Compressed lexical vector, length `m`.
    pub r: DVector<f64>,
    /// Population rates (Hz).
    pub o: Vec<f64>,
    pub frontier: Vec<FrontierEntry>,
    /// Oscillator phases, wrapped.
    pub e: Vec<f64>,
}

impl RoseState {
    /// Zero lexical vector and rates, empty frontier.
    pub fn new(m: usize, neurons: usize, phases: Vec<f64>) -> Self {
        RoseState {
            r: DVector::zeros(m),
            o: vec![0.0; neurons],
            frontier: Vec::new(),
            e: phases.into_iter().map(wrap_phase).collect(),
        }
    }

    fn continuous(&self) -> Vec<f64> {
        self.r.iter().chain(&self.o).chain(&self.e).copied().collect()
    }

    fn set_continuous(&mut self, y: &[f64]) {
        let (m, n) = (self.r.len(), self.o.len());
        self.r.copy_from_slice(&y[..m]);
        self.o.copy_from_slice(&y[m..m + n]);
        for (e, v) in self.e.iter_mut().zip(&y[m + n..]) {
            *e = wrap_phase(*v);
        }
    }
}

/// Time derivative of the continuous blocks. The frontier has none.
#[derive(Debug, Clone, PartialEq)]
pub struct RoseDerivative {
    pub r: DVector<f64>,
    pub o: Vec<f64>,
    pub e: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Present(LexicalItem),
    /// Compose two frontier entries, named by lexical id or by the `m<k>`
    /// name given to the k-th merge result.
    Merge { left: String, right: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledEvent {
    pub time: f64,
    pub action: Action,
}

#[derive(Debug, Clone)]
pub struct RoseDynamics {
    pub projection: Projection,
    pub reducer: RecurrentReducer,
    pub population: SpikingPopulation,
    pub kuramoto: KuramotoNetwork,
    pub schedule: Vec<ScheduledEvent>,
    pub tau_r: f64,
    pub tau_o: f64,
    pub base_scale: f64,
}

/// The input held between events.
#[derive(Debug, Clone, Default)]
struct Drive {
    target_r: Option<DVector<f64>>,
    presented: usize,
}

impl RoseDynamics {
    /// Time constants default to 50 ms, the rate scale to 200 Hz.
    pub fn new(
        projection: Projection,
        reducer: RecurrentReducer,
        population: SpikingPopulation,
        kuramoto: KuramotoNetwork,
        schedule: Vec<ScheduledEvent>,
    ) -> Result<Self, SimError> {
        let d = RoseDynamics {
            projection,
            reducer,
            population,
            kuramoto,
            schedule,
            tau_r: 0.05,
            tau_o: 0.05,
            base_scale: 200.0,
        };
        d.check_schedule(f64::INFINITY)?;
        Ok(d)
    }

    /// Checks times (strictly increasing, inside `[0, horizon]`), embedding
    /// sizes and that every merge names two distinct live frontier entries.
    pub fn check_schedule(&self, horizon: f64) -> Result<(), SimError> {
        if self.projection.input_dim() != self.reducer.input_dim() {
            return Err(SimError::Schedule(format!(
                "projection reads {} inputs but the reducer reads {}",
                self.projection.input_dim(),
                self.reducer.input_dim()
            )));
        }
        if !(self.tau_r > 0.0 && self.tau_o > 0.0 && self.base_scale >= 0.0) {
            return Err(SimError::Schedule("time constants must be > 0 and base_scale >= 0".into()));
        }
        let mut live: Vec<String> = Vec::new();
        let mut merges = 0;
        let mut last = f64::NEG_INFINITY;
        for ev in &self.schedule {
            if !(ev.time.is_finite() && ev.time >= 0.0 && ev.time <= horizon) {
                return Err(SimError::Schedule(format!(
                    "event at {} s lies outside [0, {horizon}]",
                    ev.time
                )));
            }
            if ev.time <= last {
                return Err(SimError::Schedule(format!(
                    "event times must strictly increase ({} after {last})",
                    ev.time
                )));
            }
            last = ev.time;
            let name = match &ev.action {
                Action::Present(item) => {
                    if item.embedding().len() != self.projection.input_dim() {
                        return Err(SimError::Dimension {
                            block: "input",
                            expected: self.projection.input_dim(),
                            found: item.embedding().len(),
                        });
                    }
                    item.id().to_string()
                }
                Action::Merge { left, right } => {
                    if left == right {
                        return Err(SimError::Schedule(format!("{left} merged with itself")));
                    }
                    for r in [left, right] {
                        let i = live.iter().position(|n| n == r).ok_or_else(|| {
                            SimError::Schedule(format!("{r} is not on the frontier at {} s", ev.time))
                        })?;
                        live.remove(i);
                    }
                    merges += 1;
                    format!("m{}", merges - 1)
                }
            };
            if live.contains(&name) {
                return Err(SimError::Schedule(format!("{name} is already on the frontier")));
            }
            live.push(name);
        }
        Ok(())
    }

    fn check_state(&self, state: &RoseState) -> Result<(), SimError> {
        let dims = [
            ("R", self.projection.output_dim(), state.r.len()),
            ("O", self.population.len(), state.o.len()),
            ("E", self.kuramoto.len(), state.e.len()),
        ];
        for (block, expected, found) in dims {
            if expected != found {
                return Err(SimError::Dimension { block, expected, found });
            }
        }
        if let Some(f) = state.frontier.iter().find(|f| f.vector.len() != self.reducer.state_dim()) {
            return Err(SimError::Dimension {
                block: "S",
                expected: self.reducer.state_dim(),
                found: f.vector.len(),
            });
        }
        Ok(())
    }

    /// Rejects `dt` that violates the oscillator guard or is not well below
    /// the relaxation time constants.
    pub fn check_step(&self, dt: f64) -> Result<(), SimError> {
        self.kuramoto.check_step(dt).map_err(|e| match e {
            SignalError::StepSize { dt, reason } => SimError::StepSize { dt, reason },
            other => SimError::StepSize { dt, reason: other.to_string() },
        })?;
        let tau = self.tau_r.min(self.tau_o);
        if dt >= tau {
            return Err(SimError::StepSize {
                dt,
                reason: format!("dt must be below the shortest time constant {tau} s"),
            });
        }
        Ok(())
    }

    fn drive_at(&self, t: f64) -> Result<Drive, SimError> {
        let mut drive = Drive::default();
        for ev in self.schedule.iter().take_while(|ev| ev.time <= t) {
            if let Action::Present(item) = &ev.action {
                drive.target_r = Some(self.projection.compress(item.embedding())?);
                drive.presented += 1;
            }
        }
        Ok(drive)
    }

    fn field_flat(&self, y: &[f64], drive: &Drive) -> Vec<f64> {
        let m = self.projection.output_dim();
        let n = self.population.len();
        let (r, rest) = y.split_at(m);
        let (o, e) = rest.split_at(n);
        let mut out = Vec::with_capacity(y.len());
        match &drive.target_r {
            Some(target) => {
                out.extend(r.iter().zip(target.iter()).map(|(r, t)| (t - r) / self.tau_r));
                let (s, c) = e.iter().fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
                let mean = if s == 0.0 && c == 0.0 { 0.0 } else { s.atan2(c) };
                out.extend(o.iter().enumerate().map(|(i, o)| {
                    let target = if i < drive.presented {
                        self.population
                            .modulated_rate(i, mean, self.base_scale)
                            .expect("index below population size")
                    } else {
                        0.0
                    };
                    (target - o) / self.tau_o
                }));
            }
            None => out.extend(std::iter::repeat_n(0.0, m + n)),
        }
        out.extend(self.kuramoto.field(e));
        out
    }

    fn rk4(&self, y: &[f64], h: f64, drive: &Drive) -> Vec<f64> {
        let shift = |k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        let k1 = self.field_flat(y, drive);
        let k2 = self.field_flat(&shift(&k1, h / 2.0), drive);
        let k3 = self.field_flat(&shift(&k2, h / 2.0), drive);
        let k4 = self.field_flat(&shift(&k3, h), drive);
        (0..y.len())
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }
}

/// Derivative of the continuous blocks at `t`, with the input in force at
/// `t` (events at exactly `t` included).
pub fn rose_field(state: &RoseState, t: f64, dyn_: &RoseDynamics) -> Result<RoseDerivative, SimError> {
    dyn_.check_state(state)?;
    let d = dyn_.field_flat(&state.continuous(), &dyn_.drive_at(t)?);
    let (m, n) = (state.r.len(), state.o.len());
    Ok(RoseDerivative {
        r: DVector::from_column_slice(&d[..m]),
        o: d[m..m + n].to_vec(),
        e: d[m + n..].to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: &'static str,
    pub inputs: Vec<String>,
    pub result: String,
    pub frontier_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedState {
    pub t: f64,
    pub state: RoseState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub trajectory: Vec<TimedState>,
    pub events: Vec<EventRecord>,
}

fn apply(
    dyn_: &RoseDynamics,
    ev: &ScheduledEvent,
    state: &mut RoseState,
    drive: &mut Drive,
    merges: &mut usize,
) -> Result<EventRecord, SimError> {
    let (kind, inputs, result) = match &ev.action {
        Action::Present(item) => {
            let x = item.embedding();
            drive.target_r = Some(dyn_.projection.compress(x)?);
            drive.presented += 1;
            let h0 = DVector::zeros(dyn_.reducer.state_dim());
            state.frontier.push(FrontierEntry {
                node: item.id().to_string(),
                vector: dyn_.reducer.step(&h0, x)?,
            });
            ("present", vec![], item.id().to_string())
        }
        Action::Merge { left, right } => {
            let take = |state: &mut RoseState, name: &str| {
                let i = state.frontier.iter().position(|f| f.node == name).ok_or_else(|| {
                    SimError::Schedule(format!("{name} is not on the frontier at {} s", ev.time))
                })?;
                Ok::<_, SimError>(state.frontier.remove(i))
            };
            let l = take(state, left)?;
            let r = take(state, right)?;
            let name = format!("m{merges}");
            *merges += 1;
            state.frontier.push(FrontierEntry {
                node: name.clone(),
                vector: dyn_.reducer.compose(&l.vector, &r.vector)?,
            });
            ("merge", vec![left.clone(), right.clone()], name)
        }
    };
    Ok(EventRecord {
        time: ev.time,
        kind,
        inputs,
        result,
        frontier_size: state.frontier.len(),
    })
}

/// Fixed-step RK4 from `initial` over `[0, duration]`, recording the state
/// at every multiple of `dt` (the last step is shortened to end exactly at
/// `duration`). Steps are split at event times; recorded states include the
/// effect of events at their own time.
pub fn run(dyn_: &RoseDynamics, initial: &RoseState, duration: f64, dt: f64) -> Result<Run, SimError> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(SimError::Schedule(format!("duration must be >= 0, got {duration}")));
    }
    dyn_.check_step(dt)?;
    dyn_.check_state(initial)?;
    dyn_.check_schedule(duration)?;

    let mut state = initial.clone();
    let mut drive = Drive::default();
    let mut merges = 0;
    let mut events = Vec::new();
    let mut pending = dyn_.schedule.iter().peekable();
    while let Some(ev) = pending.next_if(|ev| ev.time <= 0.0) {
        events.push(apply(dyn_, ev, &mut state, &mut drive, &mut merges)?);
    }
    let steps = if duration == 0.0 { 0 } else { (duration / dt - 1e-9).ceil() as usize };
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(TimedState { t: 0.0, state: state.clone() });
    let mut y = state.continuous();
    for k in 1..=steps {
        let mut t = (k - 1) as f64 * dt;
        let t_end = (k as f64 * dt).min(duration);
        while let Some(ev) = pending.next_if(|ev| ev.time <= t_end) {
            if ev.time > t {
                y = dyn_.rk4(&y, ev.time - t, &drive);
                t = ev.time;
            }
            state.set_continuous(&y);
            events.push(apply(dyn_, ev, &mut state, &mut drive, &mut merges)?);
            y = state.continuous();
        }
        if t_end > t {
            y = dyn_.rk4(&y, t_end - t, &drive);
        }
        state.set_continuous(&y);
        y = state.continuous();
        trajectory.push(TimedState { t: t_end, state: state.clone() });
    }
    Ok(Run { trajectory, events })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParameters {
    pub duration: f64,
    pub dt: f64,
    pub tau_r: f64,
    pub tau_o: f64,
    pub base_scale: f64,
    pub r_dim: usize,
    pub neurons: usize,
    pub oscillators: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub final_order_parameter: f64,
    pub min_order_parameter: f64,
    pub max_order_parameter: f64,
    pub final_mean_rate: f64,
    pub final_frontier: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub parameters: RunParameters,
    pub events: Vec<EventRecord>,
    pub summary: RunSummary,
}

impl Run {
    pub fn last(&self) -> &RoseState {
        &self.trajectory.last().expect("trajectory holds the initial state").state
    }

    /// One row per recorded state: `t`, `r_*`, `o_*`, `e_*`, `frontier`.
    pub fn to_csv(&self) -> String {
        let first = &self.trajectory[0].state;
        let mut header = vec!["t".to_string()];
        header.extend((0..first.r.len()).map(|i| format!("r_{i}")));
        header.extend((0..first.o.len()).map(|i| format!("o_{i}")));
        header.extend((0..first.e.len()).map(|i| format!("e_{i}")));
        header.push("frontier".into());
        let mut out = header.join(",");
        out.push('\n');
        for ts in &self.trajectory {
            let s = &ts.state;
            let mut row = vec![fmt_sig(ts.t)];
            row.extend(s.r.iter().chain(&s.o).chain(&s.e).map(|v| fmt_sig(*v)));
            row.push(s.frontier.len().to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn report(&self, dyn_: &RoseDynamics, duration: f64, dt: f64) -> RunReport {
        let orders: Vec<f64> = self
            .trajectory
            .iter()
            .map(|ts| order_parameter(&ts.state.e).unwrap_or(0.0))
            .collect();
        let last = self.last();
        RunReport {
            parameters: RunParameters {
                duration,
                dt,
                tau_r: dyn_.tau_r,
                tau_o: dyn_.tau_o,
                base_scale: dyn_.base_scale,
                r_dim: last.r.len(),
                neurons: last.o.len(),
                oscillators: last.e.len(),
            },
            events: self.events.clone(),
            summary: RunSummary {
                steps: self.trajectory.len() - 1,
                final_order_parameter: *orders.last().expect("non-empty"),
                min_order_parameter: orders.iter().copied().fold(f64::INFINITY, f64::min),
                max_order_parameter: orders.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                final_mean_rate: if last.o.is_empty() {
                    0.0
                } else {
                    last.o.iter().sum::<f64>() / last.o.len() as f64
                },
                final_frontier: last.frontier.iter().map(|f| f.node.clone()).collect(),
            },
        }
    }
}
