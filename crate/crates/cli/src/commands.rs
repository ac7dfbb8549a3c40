//! The subcommands. Each writes its artifacts under an output directory and
//! returns what should be printed.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use rose_core::codec::{
    add_white_noise, decode_slots, decode_tree, encode_tree, estimate_weights, pac_profile,
    CodecError, EncodedBundle, EncodingConfig, MI_BINS,
};
use rose_core::lexicon::{Activation, Lexicon, Projection, RecurrentReducer};
use rose_core::signal::{nested_phase, order_parameter, synth_wave, SignalTrace};
use rose_core::sim::{self, Action, RoseDynamics, RoseState, ScheduledEvent, SimError};
use rose_core::spiking::{stream_rng, SpikingPopulation};
use rose_core::syntax::LabelingRules;

use crate::config::RunConfig;
use crate::error::{config_err, io_err, CliError};
use crate::plot;
use rose_core::script::{self, Derived, Op};

/// Modulation index at or below this counts as uncoupled.
pub const MI_THRESHOLD: f64 = 0.005;

#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Lexicon::from_json(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn derive_files(script: &Path, lexicon: &Path) -> Result<(Lexicon, Derived), CliError> {
    let lex = load_lexicon(lexicon)?;
    let text = fs::read_to_string(script).map_err(|e| io_err(script, e))?;
    let derived = script::derive(&text, &lex, &LabelingRules::default()).map_err(config_err)?;
    Ok((lex, derived))
}

fn codec_err(e: CodecError) -> CliError {
    match e {
        CodecError::Ambiguous { .. }
        | CodecError::DepthInconsistent { .. }
        | CodecError::Structure { .. }
        | CodecError::TooShort { .. } => CliError::Decode(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// `tree.json` (canonical) and `derivation.log`.
pub fn cmd_derive(script: &Path, lexicon: &Path, out: &Path) -> Result<Output, CliError> {
    let (_, d) = derive_files(script, lexicon)?;
    let json = d.tree.to_canonical_json() + "\n";
    let log = d.log.join("\n") + "\n";
    write(out, "tree.json", &json)?;
    write(out, "derivation.log", &log)?;
    Ok(Output { stdout: json, stderr: log })
}

/// `tree.json` and the bundle directory `bundle/`.
pub fn cmd_encode(cfg: &RunConfig, out: &Path) -> Result<Output, CliError> {
    let (lex, d) = derive_files(&cfg.script, &cfg.lexicon)?;
    let bundle = encode_tree(&d.tree, &lex, &cfg.encoding).map_err(codec_err)?;
    write(out, "tree.json", &(d.tree.to_canonical_json() + "\n"))?;
    let dir = out.join("bundle");
    bundle.write_dir(&dir, &cfg.encoding).map_err(config_err)?;
    Ok(Output {
        stdout: format!(
            "encoded {} nodes into {:.3} s of signal and {} spike trains\n",
            bundle.schedule.len(),
            bundle.duration(),
            bundle.spike_trains.len()
        ),
        stderr: String::new(),
    })
}

/// `decoded.json` from a bundle directory.
pub fn cmd_decode(bundle_dir: &Path, lexicon: &Path, out: &Path) -> Result<Output, CliError> {
    let lex = load_lexicon(lexicon)?;
    let (bundle, cfg) = EncodedBundle::read_dir(bundle_dir).map_err(config_err)?;
    cfg.validate().map_err(config_err)?;
    let tree = decode_tree(&bundle, &lex, &cfg).map_err(codec_err)?;
    let json = tree.to_canonical_json() + "\n";
    write(out, "decoded.json", &json)?;
    Ok(Output { stdout: json, stderr: String::new() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightError {
    pub id: String,
    pub true_weight: f64,
    pub estimate: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiValues {
    pub f_low: f64,
    pub f_high: f64,
    /// On `L(t, x) + hf`, the trace whose envelope the wave modulates.
    pub composite: Option<f64>,
    /// On `L(t, x)` plus the lf category code.
    pub lf: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub exact_match: bool,
    pub per_node_category_accuracy: f64,
    pub nodes: usize,
    pub snr_db: Option<f64>,
    pub decode_error: Option<String>,
    pub weight_errors: Option<Vec<WeightError>>,
    pub weight_note: Option<String>,
    pub modulation_index: MiValues,
    pub tree: serde_json::Value,
    pub decoded: Option<serde_json::Value>,
}

/// `L(t, x)` over the bundle's time base.
fn wave_trace(bundle: &EncodedBundle, cfg: &EncodingConfig) -> Result<SignalTrace, CliError> {
    let lf = &bundle.lf_trace;
    synth_wave(&cfg.wave, lf.sample_rate(), lf.start_time(), lf.duration(), cfg.position).map_err(config_err)
}

fn mi_values(bundle: &EncodedBundle, cfg: &EncodingConfig) -> Result<(MiValues, SignalTrace), CliError> {
    let wave = wave_trace(bundle, cfg)?;
    let composite = wave.add(&bundle.hf_trace).map_err(config_err)?;
    let lf = wave.add(&bundle.lf_trace).map_err(config_err)?;
    let (f_low, f_high) = (cfg.wave.frequency(), cfg.gamma_base);
    let mi = |t: &SignalTrace| pac_profile(t, f_low, f_high, MI_BINS).map(|p| p.modulation_index);
    let (composite_mi, lf_mi, note) = match (mi(&composite), mi(&lf)) {
        (Ok(a), Ok(b)) => (Some(a), Some(b), None),
        (Err(e), _) | (_, Err(e)) => (None, None, Some(e.to_string())),
    };
    Ok((
        MiValues { f_low, f_high, composite: composite_mi, lf: lf_mi, note },
        composite,
    ))
}

/// Phase series the population saw: each slot's category phase with its
/// nesting offset.
fn slot_phases(bundle: &EncodedBundle, cfg: &EncodingConfig) -> Result<Vec<f64>, CliError> {
    let n = cfg.slot_samples();
    let mut out = Vec::with_capacity(n * bundle.schedule.len());
    for e in &bundle.schedule {
        let base = cfg.phase_code.phase_of(&e.category).map_err(config_err)?;
        out.extend(std::iter::repeat_n(nested_phase(base, cfg.nesting_step, e.depth), n));
    }
    Ok(out)
}

/// Encode, optionally add noise, decode and score. Writes `report.json`,
/// `composite.csv`, `bundle/` and (when decoding succeeds) `decoded.json`.
/// Fails with a decode error if the noiseless round trip is not exact.
pub fn cmd_roundtrip(cfg: &RunConfig, out: &Path) -> Result<Output, CliError> {
    let (lex, d) = derive_files(&cfg.script, &cfg.lexicon)?;
    let enc = &cfg.encoding;
    let mut bundle = encode_tree(&d.tree, &lex, enc).map_err(codec_err)?;
    bundle.write_dir(&out.join("bundle"), enc).map_err(config_err)?;
    if let Some(snr) = cfg.roundtrip.snr_db {
        bundle.lf_trace = add_white_noise(&bundle.lf_trace, snr, enc.seed.wrapping_add(1));
    }
    let dec = EncodingConfig {
        phase_code: cfg.roundtrip.decode_phase_code.clone().unwrap_or_else(|| enc.phase_code.clone()),
        ..enc.clone()
    };

    let accuracy = match decode_slots(&bundle, &dec) {
        Ok(slots) => {
            let hits = slots
                .iter()
                .zip(&bundle.schedule)
                .filter(|(s, e)| s.decoded.category == e.category)
                .count();
            hits as f64 / bundle.schedule.len() as f64
        }
        Err(_) => 0.0,
    };
    let decoded = decode_tree(&bundle, &lex, &dec);
    let (exact_match, decode_error, decoded_json) = match &decoded {
        Ok(t) => (
            *t == d.tree,
            None,
            Some(serde_json::from_str(&t.to_canonical_json()).expect("canonical JSON parses")),
        ),
        Err(e) => (false, Some(e.to_string()), None),
    };
    if let Ok(t) = &decoded {
        write(out, "decoded.json", &(t.to_canonical_json() + "\n"))?;
    }

    let phases = slot_phases(&bundle, enc)?;
    let truth = lex.normalize_weights(&bundle.neurons).map_err(config_err)?;
    let (weight_errors, weight_note) = match estimate_weights(&bundle.spike_trains, &phases, enc) {
        Ok(est) => (
            Some(
                bundle
                    .neurons
                    .iter()
                    .zip(truth.iter().zip(&est))
                    .map(|(id, (&w, &e))| WeightError {
                        id: id.clone(),
                        true_weight: w,
                        estimate: e,
                        relative_error: if w > 0.0 { (e - w).abs() / w } else { e.abs() },
                    })
                    .collect(),
            ),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    let (modulation_index, composite) = mi_values(&bundle, enc)?;
    write(out, "composite.csv", &composite.to_csv())?;

    let report = RoundtripReport {
        exact_match,
        per_node_category_accuracy: accuracy,
        nodes: bundle.schedule.len(),
        snr_db: cfg.roundtrip.snr_db,
        decode_error: decode_error.clone(),
        weight_errors,
        weight_note,
        modulation_index,
        tree: serde_json::from_str(&d.tree.to_canonical_json()).expect("canonical JSON parses"),
        decoded: decoded_json,
    };
    write(out, "report.json", &pretty(&report))?;
    let summary = format!(
        "exact_match={} per_node_category_accuracy={:.4} nodes={}\n",
        exact_match,
        accuracy,
        bundle.schedule.len()
    );
    if cfg.roundtrip.snr_db.is_none() && !exact_match {
        return Err(CliError::Decode(match decode_error {
            Some(e) => format!("noiseless round trip failed: {e}"),
            None => "noiseless round trip decoded a different tree".into(),
        }));
    }
    Ok(Output { stdout: summary, stderr: String::new() })
}

/// Dynamics and initial state for a config, with every random parameter
/// drawn from the config seed.
pub fn build_simulation(
    cfg: &RunConfig,
    lex: &Lexicon,
    d: &Derived,
) -> Result<(RoseDynamics, RoseState), CliError> {
    let s = &cfg.sim;
    let n = lex.dim();
    let m = s.compressed_dim.unwrap_or((n / 2).max(1));
    if n < 2 || m == 0 || m >= n {
        return Err(CliError::Config(format!(
            "compressed_dim {m} must lie in [1, {n}) for {n}-dimensional embeddings"
        )));
    }
    let mut rng = stream_rng(cfg.seed(), 1);
    let mut gauss = |scale: f64| scale * rng.sample::<f64, _>(StandardNormal);
    let w = DMatrix::from_fn(m, n, |_, _| gauss(1.0 / (n as f64).sqrt()));
    let w_r = DMatrix::from_fn(m, m, |_, _| gauss(0.5 / (m as f64).sqrt()));
    let w_x = DMatrix::from_fn(m, n, |_, _| gauss(1.0 / (n as f64).sqrt()));
    let omegas: Vec<f64> = (0..s.oscillators)
        .map(|_| TAU * (s.frequency + gauss(s.frequency_spread)))
        .collect();
    let mut rng = stream_rng(cfg.seed(), 2);
    let phases: Vec<f64> = (0..s.oscillators).map(|_| rng.random_range(0.0..TAU)).collect();

    let projection = Projection::new(w).map_err(config_err)?;
    let reducer = RecurrentReducer::new(w_r, w_x, DVector::zeros(m), Activation::Tanh).map_err(config_err)?;
    let weights = rose_core::lexicon::normalize(&d.items.iter().map(|i| i.weight()).collect::<Vec<_>>())
        .map_err(config_err)?;
    let population = SpikingPopulation::new(
        weights,
        cfg.encoding.coupling,
        cfg.encoding.pac.preferred_phase(),
        0.0,
    )
    .map_err(config_err)?;
    let kuramoto = rose_core::signal::KuramotoNetwork::all_to_all(omegas, s.coupling, phases.clone())
        .map_err(config_err)?;

    let mut selected = d.items.iter();
    let schedule = d
        .lines
        .iter()
        .enumerate()
        .map(|(k, line)| {
            let time = s.onset + k as f64 * s.event_spacing;
            let action = match &line.op {
                Op::Select { .. } => Action::Present(selected.next().expect("one item per select").clone()),
                Op::Merge { left, right } => {
                    let name = |r: &str| match r.strip_prefix('@') {
                        Some(k) => format!("m{k}"),
                        None => r.to_string(),
                    };
                    Action::Merge { left: name(left), right: name(right) }
                }
            };
            ScheduledEvent { time, action }
        })
        .collect();
    let mut dynamics =
        RoseDynamics::new(projection, reducer, population, kuramoto, schedule).map_err(sim_err)?;
    dynamics.tau_r = s.tau_r;
    dynamics.tau_o = s.tau_o;
    dynamics.base_scale = s.base_scale;
    Ok((dynamics, RoseState::new(m, d.items.len(), phases)))
}

fn sim_err(e: SimError) -> CliError {
    match e {
        SimError::StepSize { .. } => CliError::Integration(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// `trajectory.csv` and `run_report.json`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<Output, CliError> {
    let (lex, d) = derive_files(&cfg.script, &cfg.lexicon)?;
    let (dynamics, initial) = build_simulation(cfg, &lex, &d)?;
    let run = sim::run(&dynamics, &initial, cfg.sim.duration, cfg.sim.dt).map_err(sim_err)?;
    write(out, "trajectory.csv", &run.to_csv())?;
    let report = run.report(&dynamics, cfg.sim.duration, cfg.sim.dt);
    write(out, "run_report.json", &pretty(&report))?;
    Ok(Output {
        stdout: format!(
            "{} steps, final order parameter {:.4}, frontier {:?}\n",
            report.summary.steps, report.summary.final_order_parameter, report.summary.final_frontier
        ),
        stderr: String::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceMetrics {
    pub file: String,
    pub samples: usize,
    pub sample_rate: f64,
    pub f_low: f64,
    pub f_high: f64,
    pub modulation_index: f64,
    pub mi_threshold: f64,
    pub coupled: bool,
    pub preferred_phase: f64,
    pub bin_centers: Vec<f64>,
    pub mean_amplitude: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseMetrics {
    pub file: String,
    pub rows: usize,
    pub oscillators: usize,
    pub final_order_parameter: f64,
    pub mean_order_parameter: f64,
    pub min_order_parameter: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub trace: Option<TraceMetrics>,
    pub phases: Option<PhaseMetrics>,
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Reads a phase CSV: columns named `e_*` (or `phase*`) if present,
/// otherwise every column except `t`. Returns the time column (or row
/// indices) and one phase vector per row.
pub fn read_phase_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>), CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let pick = |pred: &dyn Fn(&str) -> bool| -> Vec<usize> {
        headers.iter().enumerate().filter(|(_, h)| pred(h)).map(|(i, _)| i).collect()
    };
    let mut cols = pick(&|h| h.starts_with("e_"));
    if cols.is_empty() {
        cols = pick(&|h| h.starts_with("phase"));
    }
    if cols.is_empty() {
        cols = pick(&|h| h != "t");
    }
    if cols.is_empty() {
        return Err(bad("no phase columns".into()));
    }
    let t_col = headers.iter().position(|h| h == "t");
    let (mut times, mut rows) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |c: usize| {
            rec.get(c)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| bad(format!("row {}: bad number in column {}", i + 2, c + 1)))
        };
        times.push(match t_col {
            Some(c) => num(c)?,
            None => i as f64,
        });
        rows.push(cols.iter().map(|&c| num(c)).collect::<Result<Vec<_>, _>>()?);
    }
    if rows.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok((times, rows))
}

pub struct AnalyzeArgs<'a> {
    pub trace: Option<&'a Path>,
    pub phases: Option<&'a Path>,
    pub f_low: f64,
    pub f_high: f64,
    pub plot: bool,
}

/// `metrics.json`, plus `trace.svg`, `pac.svg` and `order.svg` with `--plot`.
pub fn cmd_analyze(args: &AnalyzeArgs, out: &Path) -> Result<Output, CliError> {
    if args.trace.is_none() && args.phases.is_none() {
        return Err(CliError::Config("analyze needs --trace and/or --phases".into()));
    }
    let mut report = AnalyzeReport::default();
    let mut plots: Vec<(&str, String)> = Vec::new();
    if let Some(path) = args.trace {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let trace = SignalTrace::from_csv(&text, None).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let prof = pac_profile(&trace, args.f_low, args.f_high, MI_BINS)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        if args.plot {
            let ts: Vec<f64> = trace.times().collect();
            plots.push(("trace.svg", plot::line_plot(&file_name(path), "t (s)", "value", &ts, trace.samples())));
            plots.push((
                "pac.svg",
                plot::bar_plot(
                    &format!("{} Hz amplitude by {} Hz phase (MI {:.4})", args.f_high, args.f_low, prof.modulation_index),
                    "phase (rad)",
                    "mean amplitude",
                    &prof.bin_centers,
                    &prof.mean_amplitude,
                ),
            ));
        }
        report.trace = Some(TraceMetrics {
            file: file_name(path),
            samples: trace.len(),
            sample_rate: trace.sample_rate(),
            f_low: args.f_low,
            f_high: args.f_high,
            modulation_index: prof.modulation_index,
            mi_threshold: MI_THRESHOLD,
            coupled: prof.modulation_index > MI_THRESHOLD,
            preferred_phase: prof.preferred_phase,
            bin_centers: prof.bin_centers,
            mean_amplitude: prof.mean_amplitude,
        });
    }
    if let Some(path) = args.phases {
        let (times, rows) = read_phase_csv(path)?;
        let r: Vec<f64> = rows.iter().map(|p| order_parameter(p).expect("non-empty row")).collect();
        if args.plot {
            plots.push(("order.svg", plot::line_plot("Kuramoto order parameter", "t (s)", "R", &times, &r)));
        }
        report.phases = Some(PhaseMetrics {
            file: file_name(path),
            rows: rows.len(),
            oscillators: rows[0].len(),
            final_order_parameter: *r.last().expect("rows"),
            mean_order_parameter: r.iter().sum::<f64>() / r.len() as f64,
            min_order_parameter: r.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }
    let json = pretty(&report);
    write(out, "metrics.json", &json)?;
    for (name, svg) in plots {
        write(out, name, &svg)?;
    }
    Ok(Output { stdout: json, stderr: String::new() })
}

pub const DEMO_LEXICON: &str = include_str!("../assets/lexicon.json");
pub const DEMO_SCRIPT: &str = include_str!("../assets/derivation.txt");
pub const DEMO_CONFIG: &str = include_str!("../assets/config.toml");

/// Writes the bundled example inputs to `out/inputs` and runs derive,
/// roundtrip, simulate and analyze on them.
pub fn cmd_demo(out: &Path) -> Result<Output, CliError> {
    let inputs = out.join("inputs");
    write(&inputs, "lexicon.json", DEMO_LEXICON)?;
    write(&inputs, "derivation.txt", DEMO_SCRIPT)?;
    let config = write(&inputs, "config.toml", DEMO_CONFIG)?;
    let cfg = RunConfig::load(&config)?;
    let mut text = String::new();
    let mut step = |name: &str, o: Output| {
        text.push_str(&format!("[{name}]\n{}", o.stdout));
    };
    step("derive", cmd_derive(&cfg.script, &cfg.lexicon, &out.join("derive"))?);
    step("roundtrip", cmd_roundtrip(&cfg, &out.join("roundtrip"))?);
    step("simulate", cmd_simulate(&cfg, &out.join("simulate"))?);
    let composite = out.join("roundtrip").join("composite.csv");
    let trajectory = out.join("simulate").join("trajectory.csv");
    let args = AnalyzeArgs {
        trace: Some(&composite),
        phases: Some(&trajectory),
        f_low: cfg.encoding.wave.frequency(),
        f_high: cfg.encoding.gamma_base,
        plot: true,
    };
    cmd_analyze(&args, &out.join("analyze"))?;
    text.push_str("[analyze]\nmetrics written to analyze/metrics.json\n");
    Ok(Output { stdout: text, stderr: String::new() })
}
