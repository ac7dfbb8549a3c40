//! Three interactive views over `rose-core`, compiled to WebAssembly for
//! `www/index.html`. Each entry point takes plain numbers or text and returns
//! a JSON string; errors come back as `{"error": "..."}`.

use std::f64::consts::TAU;

use rand::Rng;
use serde_json::{json, Value};

use rose_core::codec::{
    add_white_noise, decode_slots, decode_tree, encode_tree, pac_profile, EncodingConfig, MI_BINS,
};
use rose_core::lexicon::Lexicon;
use rose_core::script;
use rose_core::signal::{
    order_parameter, synth_composite, HighFreqComponent, KuramotoNetwork, PacConfig, TravelingWave,
};
use rose_core::spiking::stream_rng;
use rose_core::syntax::LabelingRules;

pub const LEXICON: &str = include_str!("../../cli/assets/lexicon.json");

const MAX_POINTS: usize = 1500;

fn thin(xs: &[f64]) -> Vec<f64> {
    let stride = xs.len().div_ceil(MAX_POINTS).max(1);
    xs.iter().step_by(stride).copied().collect()
}

fn finish(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// A single gamma component riding a 1-D wave, and the coupling profile
/// recovered from the mixture.
pub fn pac(depth: f64, preferred_phase: f64, wave_hz: f64, gamma_hz: f64) -> Result<Value, String> {
    let e = |x: &dyn std::fmt::Display| x.to_string();
    let wave = TravelingWave::new(1.0, wave_hz, 0.0, 0.0).map_err(|x| e(&x))?;
    let bank = [HighFreqComponent::new(1.0, depth, gamma_hz, 0.0).map_err(|x| e(&x))?];
    let fs = (8.0 * gamma_hz).max(500.0);
    let duration = (12.0 / wave_hz).max(4.0);
    let trace = synth_composite(
        &bank,
        &wave,
        &PacConfig::new(preferred_phase),
        fs,
        duration,
        0.0,
    )
    .map_err(|x| e(&x))?;
    let profile = pac_profile(&trace, wave_hz, gamma_hz, MI_BINS).map_err(|x| e(&x))?;
    let shown = ((3.0 / wave_hz) * fs) as usize;
    let samples = &trace.samples()[..shown.min(trace.len())];
    Ok(json!({
        "modulation_index": profile.modulation_index,
        "preferred_phase": profile.preferred_phase,
        "bin_centers": profile.bin_centers,
        "mean_amplitude": profile.mean_amplitude,
        "trace": thin(samples),
        "trace_seconds": samples.len() as f64 / fs,
    }))
}

/// `n` all-to-all oscillators with total coupling `coupling` (each pair gets
/// `coupling / n`) and natural frequencies spread uniformly over
/// `6 ± spread` Hz.
pub fn kuramoto(
    n: usize,
    coupling: f64,
    spread: f64,
    seconds: f64,
    seed: u64,
) -> Result<Value, String> {
    if !(2..=500).contains(&n) {
        return Err(format!("need 2..=500 oscillators, got {n}"));
    }
    if !(seconds > 0.0 && seconds <= 60.0) {
        return Err(format!("duration must be in (0, 60] s, got {seconds}"));
    }
    let mut rng = stream_rng(seed, 0);
    let omega: Vec<f64> = (0..n)
        .map(|_| TAU * (6.0 + spread * rng.random_range(-1.0..=1.0)))
        .collect();
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    let net = KuramotoNetwork::all_to_all(omega, coupling / n as f64, phases)
        .map_err(|e| e.to_string())?;
    let dt = 1e-3;
    let steps = (seconds / dt).round() as usize;
    let run = net.simulate(dt, steps).map_err(|e| e.to_string())?;
    let r: Vec<f64> = run
        .iter()
        .map(|p| order_parameter(p).expect("non-empty phases"))
        .collect();
    Ok(json!({
        "dt": dt,
        "order_parameter": thin(&r),
        "final_order_parameter": r[r.len() - 1],
        "final_phases": run[run.len() - 1],
    }))
}

/// Derives `script_text` against the bundled lexicon, encodes the tree, adds
/// white noise to the category trace and decodes it again.
pub fn roundtrip(script_text: &str, snr_db: Option<f64>, seed: u64) -> Result<Value, String> {
    let lex = Lexicon::from_json(LEXICON).map_err(|e| e.to_string())?;
    let d =
        script::derive(script_text, &lex, &LabelingRules::default()).map_err(|e| e.to_string())?;
    let cfg = EncodingConfig {
        seed,
        ..EncodingConfig::default()
    };
    let mut bundle = encode_tree(&d.tree, &lex, &cfg).map_err(|e| e.to_string())?;
    if let Some(snr) = snr_db {
        bundle.lf_trace = add_white_noise(&bundle.lf_trace, snr, seed.wrapping_add(1));
    }
    let slots: Vec<Value> = match decode_slots(&bundle, &cfg) {
        Ok(slots) => slots
            .iter()
            .zip(&bundle.schedule)
            .map(|(s, e)| {
                json!({
                    "node": s.node_id,
                    "depth": s.depth,
                    "true": e.category.as_str(),
                    "decoded": s.decoded.category.as_str(),
                    "correlation": s.decoded.correlation,
                })
            })
            .collect(),
        Err(_) => Vec::new(),
    };
    let (decoded, error) = match decode_tree(&bundle, &lex, &cfg) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let as_json = |t: &rose_core::syntax::SyntacticObject| -> Value {
        serde_json::from_str(&t.to_canonical_json()).expect("canonical JSON parses")
    };
    Ok(json!({
        "tree": as_json(&d.tree),
        "bracketed": d.tree.bracketed(),
        "log": d.log,
        "decoded": decoded.as_ref().map(as_json),
        "exact_match": decoded.as_ref() == Some(&d.tree),
        "error": error,
        "slots": slots,
        "lf_trace": thin(bundle.lf_trace.samples()),
        "seconds": bundle.duration(),
    }))
}

pub fn pac_json(depth: f64, preferred_phase: f64, wave_hz: f64, gamma_hz: f64) -> String {
    finish(pac(depth, preferred_phase, wave_hz, gamma_hz))
}

pub fn kuramoto_json(n: usize, coupling: f64, spread: f64, seconds: f64, seed: u64) -> String {
    finish(kuramoto(n, coupling, spread, seconds, seed))
}

/// A negative or non-finite `snr_db` means no noise.
pub fn roundtrip_json(script_text: &str, snr_db: f64, seed: u64) -> String {
    let snr = (snr_db.is_finite() && snr_db >= 0.0).then_some(snr_db);
    finish(roundtrip(script_text, snr, seed))
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn pac_demo(depth: f64, preferred_phase: f64, wave_hz: f64, gamma_hz: f64) -> String {
        super::pac_json(depth, preferred_phase, wave_hz, gamma_hz)
    }

    #[wasm_bindgen]
    pub fn kuramoto_demo(n: u32, coupling: f64, spread: f64, seconds: f64, seed: u32) -> String {
        super::kuramoto_json(n as usize, coupling, spread, seconds, seed as u64)
    }

    #[wasm_bindgen]
    pub fn roundtrip_demo(script: &str, snr_db: f64, seed: u32) -> String {
        super::roundtrip_json(script, snr_db, seed as u64)
    }

    #[wasm_bindgen]
    pub fn default_script() -> String {
        include_str!("../../cli/assets/derivation.txt").to_string()
    }
}
