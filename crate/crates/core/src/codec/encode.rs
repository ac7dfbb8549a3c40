use super::{CodecError, EncodedBundle, EncodingConfig, NodeKind, ScheduleEntry};
use crate::lexicon::Lexicon;
use crate::phase::wrap_phase;
use crate::signal::{nested_phase, synth_modulated_at, HighFreqComponent};
use crate::spiking::SpikingPopulation;
use crate::syntax::{LexicalItem, SyntacticObject};

/// Gamma bank for a node: one component per leaf (in linear order, at most
/// `max_components`), with `A_0 = 1 + tanh(mean embedding) / 2`,
/// `A_1 = modulation_depth · A_0`, frequencies `gamma_base + j·gamma_spacing`
/// and phase equal to the wrapped embedding sum.
pub fn node_bank(
    leaves: &[&LexicalItem],
    cfg: &EncodingConfig,
) -> Result<Vec<HighFreqComponent>, CodecError> {
    leaves
        .iter()
        .take(cfg.max_components)
        .enumerate()
        .map(|(j, item)| {
            let e = item.embedding();
            let mean = if e.is_empty() { 0.0 } else { e.iter().sum::<f64>() / e.len() as f64 };
            let a0 = 1.0 + 0.5 * mean.tanh();
            let c = HighFreqComponent::new(
                a0,
                cfg.modulation_depth * a0,
                cfg.gamma_base + j as f64 * cfg.gamma_spacing,
                wrap_phase(e.iter().sum()),
            )?;
            Ok(c)
        })
        .collect()
}

struct Slot<'a> {
    so: &'a SyntacticObject,
    entry: ScheduleEntry,
}

/// Post-order walk, head first. Returns the node's height.
fn schedule<'a>(
    so: &'a SyntacticObject,
    lex: &Lexicon,
    slots: &mut Vec<Slot<'a>>,
    internal: &mut usize,
) -> Result<u32, CodecError> {
    let category = so
        .category()
        .ok_or(CodecError::Unlabeled(crate::syntax::SyntaxError::MissingLabel))?
        .clone();
    let (node_id, kind, depth) = match so.head_first().map_err(CodecError::Unlabeled)? {
        None => {
            let item = so.as_leaf().expect("leaf");
            if lex.get(item.id()).is_none() {
                return Err(CodecError::UnknownLeaf(item.id().to_string()));
            }
            (item.id().to_string(), NodeKind::Leaf, 0)
        }
        Some([head, rest]) => {
            let h = schedule(head, lex, slots, internal)?;
            let r = schedule(rest, lex, slots, internal)?;
            let id = format!("n{internal}");
            *internal += 1;
            (id, NodeKind::Node, 1 + h.max(r))
        }
    };
    slots.push(Slot {
        so,
        entry: ScheduleEntry {
            node_id,
            kind,
            start: 0.0,
            category,
            depth,
        },
    });
    Ok(depth)
}

/// Encodes a fully labeled tree into one slot per node, bottom-up.
///
/// Slot `k` starts at `k · slot_duration`. Its low-frequency segment is
/// `A_s cos(2π f_s t + φ)` with `φ` the label's phase advanced by
/// `depth · Δφ`; its high-frequency segment is the node's [`node_bank`]
/// modulated by the traveling wave. One neuron per leaf (linear order,
/// normalized lexicon weights) fires at `base_scale · P_i · (1 + α cos(φ − φ_P))`
/// with `φ` the phase of the slot being played.
pub fn encode_tree(
    so: &SyntacticObject,
    lex: &Lexicon,
    cfg: &EncodingConfig,
) -> Result<EncodedBundle, CodecError> {
    cfg.validate()?;
    let mut slots = Vec::with_capacity(so.node_count());
    schedule(so, lex, &mut slots, &mut 0)?;

    let fs = cfg.sample_rate;
    let n = cfg.slot_samples();
    let slot_duration = cfg.slot_duration();
    let total = n * slots.len();
    let mut lf = Vec::with_capacity(total);
    let mut hf = Vec::with_capacity(total);
    let mut phases = Vec::with_capacity(total);
    for (k, slot) in slots.iter_mut().enumerate() {
        let start = (k * n) as f64 / fs;
        slot.entry.start = start;
        let base = cfg.phase_code.phase_of(&slot.entry.category)?;
        let phase = nested_phase(base, cfg.nesting_step, slot.entry.depth);
        lf.extend((0..n).map(|j| cfg.phase_code.eval_phase(phase, (k * n + j) as f64 / fs)));
        phases.extend(std::iter::repeat_n(phase, n));
        let leaves = slot.so.linearize().map_err(CodecError::Unlabeled)?;
        let bank = node_bank(&leaves, cfg)?;
        let seg = synth_modulated_at(&bank, &cfg.wave, &cfg.pac, fs, start, slot_duration, cfg.position)?;
        hf.extend_from_slice(seg.samples());
    }

    let neurons: Vec<String> = so
        .linearize()
        .map_err(CodecError::Unlabeled)?
        .iter()
        .map(|i| i.id().to_string())
        .collect();
    let weights = lex.normalize_weights(&neurons)?;
    let population =
        SpikingPopulation::new(weights, cfg.coupling, cfg.pac.preferred_phase(), cfg.noise_sd)?;
    let rates = population.population_rate(&phases, cfg.base_scale, fs)?;
    let spike_trains = rates.sample(cfg.spike_dt, cfg.noise_sd, cfg.seed)?;

    let trace = |s| crate::signal::SignalTrace::new(fs, 0.0, cfg.position, s);
    Ok(EncodedBundle {
        lf_trace: trace(lf)?,
        hf_trace: trace(hf)?,
        spike_trains,
        neurons,
        schedule: slots.into_iter().map(|s| s.entry).collect(),
    })
}
