use std::f64::consts::{PI, TAU};

use nalgebra::Complex;

use super::{CodecError, EncodedBundle, EncodingConfig, NodeKind};
use crate::lexicon::Lexicon;
use crate::phase::{circular_distance, wrap_phase};
use crate::signal::{PhaseCode, SignalTrace};
use crate::spiking::SpikeTrain;
use crate::syntax::{Category, SyntacticObject};

/// Best-matching category of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedCategory {
    pub category: Category,
    /// Normalized correlation with the winning template, in `[-1, 1]`.
    pub correlation: f64,
    /// Circular distance between the segment's carrier phase and the
    /// winning template's phase.
    pub residual: f64,
}

/// The category whose carrier, shifted by `depth_offset`, correlates best
/// with `segment`. Correlations are normalized, so the decision does not
/// depend on the segment's amplitude.
pub fn decode_category(
    segment: &SignalTrace,
    pc: &PhaseCode,
    depth_offset: f64,
) -> Result<DecodedCategory, CodecError> {
    let f = pc.frequency();
    let needed = (4.0 * segment.sample_rate() / f - 1e-9).ceil() as usize;
    if segment.len() < needed {
        return Err(CodecError::TooShort {
            needed,
            have: segment.len(),
        });
    }
    let energy: f64 = segment.samples().iter().map(|x| x * x).sum();
    let mut scored: Vec<(f64, &Category, f64)> = pc
        .mapping()
        .iter()
        .map(|(cat, &phase)| {
            let shifted = wrap_phase(phase + depth_offset);
            let (mut dot, mut norm) = (0.0, 0.0);
            for (k, x) in segment.samples().iter().enumerate() {
                let tpl = (TAU * f * segment.time(k) + shifted).cos();
                dot += x * tpl;
                norm += tpl * tpl;
            }
            let corr = if energy > 0.0 { dot / (energy * norm).sqrt() } else { 0.0 };
            (corr, cat, shifted)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (best, category, phase) = scored[0];
    let second = scored.get(1).map_or(f64::NEG_INFINITY, |s| s.0);
    if energy == 0.0 || best - second < 1e-6 {
        return Err(CodecError::Ambiguous { best, second });
    }
    let z = segment
        .samples()
        .iter()
        .enumerate()
        .fold(Complex::new(0.0, 0.0), |acc, (k, &x)| {
            acc + Complex::from_polar(x, -TAU * f * segment.time(k))
        });
    Ok(DecodedCategory {
        category: category.clone(),
        correlation: best,
        residual: circular_distance(wrap_phase(z.arg()), phase),
    })
}

/// A decoded slot: bookkeeping from the schedule, category from the signal.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSlot {
    pub node_id: String,
    pub kind: NodeKind,
    pub depth: u32,
    pub decoded: DecodedCategory,
}

/// Decodes every scheduled slot of the low-frequency trace. The schedule's
/// recorded categories are not consulted.
pub fn decode_slots(
    bundle: &EncodedBundle,
    cfg: &EncodingConfig,
) -> Result<Vec<DecodedSlot>, CodecError> {
    let n = cfg.slot_samples();
    let lf = &bundle.lf_trace;
    bundle
        .schedule
        .iter()
        .enumerate()
        .map(|(slot, e)| {
            let from = ((e.start - lf.start_time()) * lf.sample_rate()).round();
            if from < 0.0 || from as usize + n > lf.len() {
                return Err(CodecError::Structure {
                    slot,
                    reason: format!("slot at {} s lies outside the trace", e.start),
                });
            }
            let from = from as usize;
            let segment = lf.slice(from..from + n)?;
            let offset = wrap_phase(f64::from(e.depth) * cfg.nesting_step);
            Ok(DecodedSlot {
                node_id: e.node_id.clone(),
                kind: e.kind,
                depth: e.depth,
                decoded: decode_category(&segment, &cfg.phase_code, offset)?,
            })
        })
        .collect()
}

/// Decoded category per slot, in schedule order.
pub fn decode_categories(
    bundle: &EncodedBundle,
    cfg: &EncodingConfig,
) -> Result<Vec<Category>, CodecError> {
    Ok(decode_slots(bundle, cfg)?
        .into_iter()
        .map(|s| s.decoded.category)
        .collect())
}

/// Half the smaller of the nesting step and the closest category spacing.
fn residual_tolerance(cfg: &EncodingConfig) -> f64 {
    let phases: Vec<f64> = cfg.phase_code.mapping().values().copied().collect();
    let mut sep = PI;
    for (i, a) in phases.iter().enumerate() {
        for b in &phases[i + 1..] {
            sep = sep.min(circular_distance(*a, *b));
        }
    }
    if cfg.nesting_step > 0.0 {
        sep = sep.min(circular_distance(cfg.nesting_step, 0.0).max(1e-3));
    }
    sep / 2.0
}

/// Rebuilds the tree bottom-up from the decoded slots.
///
/// Leaves come from `lex` by id, carrying the decoded category; internal
/// nodes take the decoded label. The depth recorded for each slot must agree
/// with both the rebuilt tree and the slot's carrier phase.
pub fn decode_tree(
    bundle: &EncodedBundle,
    lex: &Lexicon,
    cfg: &EncodingConfig,
) -> Result<SyntacticObject, CodecError> {
    let tolerance = residual_tolerance(cfg);
    let mut stack: Vec<(SyntacticObject, u32)> = Vec::new();
    for (slot, s) in decode_slots(bundle, cfg)?.into_iter().enumerate() {
        if s.decoded.residual > tolerance {
            return Err(CodecError::DepthInconsistent {
                slot,
                depth: s.depth,
                residual: s.decoded.residual,
            });
        }
        let category = s.decoded.category;
        match s.kind {
            NodeKind::Leaf => {
                let item = lex
                    .get(&s.node_id)
                    .ok_or_else(|| CodecError::UnknownLeaf(s.node_id.clone()))?;
                let item = if item.category() == &category {
                    item.clone()
                } else {
                    item.with_category(category)
                };
                if s.depth != 0 {
                    return Err(CodecError::Structure {
                        slot,
                        reason: format!("leaf recorded at depth {}", s.depth),
                    });
                }
                stack.push((SyntacticObject::leaf(item), 0));
            }
            NodeKind::Node => {
                let (rest, rd) = stack.pop().ok_or_else(|| missing(slot))?;
                let (head, hd) = stack.pop().ok_or_else(|| missing(slot))?;
                let depth = 1 + hd.max(rd);
                if depth != s.depth {
                    return Err(CodecError::Structure {
                        slot,
                        reason: format!("recorded depth {} but children give {depth}", s.depth),
                    });
                }
                let node = SyntacticObject::node(head, rest, Some(category)).map_err(|e| {
                    CodecError::Structure {
                        slot,
                        reason: e.to_string(),
                    }
                })?;
                stack.push((node, depth));
            }
        }
    }
    match (stack.pop(), stack.is_empty()) {
        (Some((root, _)), true) => Ok(root),
        _ => Err(CodecError::Structure {
            slot: bundle.schedule.len(),
            reason: "schedule does not reduce to a single tree".into(),
        }),
    }
}

fn missing(slot: usize) -> CodecError {
    CodecError::Structure {
        slot,
        reason: "node slot without two pending constituents".into(),
    }
}

/// Per-neuron weights recovered from spike counts, normalized to sum to one.
///
/// Each count is divided by the expected exposure
/// `base_scale · ∫ (1 + α cos(φ_C(t) − φ_P)) dt` along `phase_series`
/// (sampled at `cfg.sample_rate`). Needs at least 30 s of data and
/// `base_scale >= 100` Hz.
pub fn estimate_weights(
    trains: &[SpikeTrain],
    phase_series: &[f64],
    cfg: &EncodingConfig,
) -> Result<Vec<f64>, CodecError> {
    let insufficient = |m: String| Err(CodecError::InsufficientData(m));
    let Some(first) = trains.first() else {
        return insufficient("no spike trains".into());
    };
    if first.duration() < 30.0 - 1e-9 {
        return insufficient(format!("{} s recorded, need 30 s", first.duration()));
    }
    if cfg.base_scale < 100.0 {
        return insufficient(format!("base_scale {} Hz is below 100 Hz", cfg.base_scale));
    }
    if phase_series.is_empty() {
        return insufficient("empty phase series".into());
    }
    let phi_p = cfg.pac.preferred_phase();
    let exposure: f64 = phase_series
        .iter()
        .map(|p| 1.0 + cfg.coupling * (p - phi_p).cos())
        .sum::<f64>()
        / cfg.sample_rate;
    let raw: Vec<f64> = trains
        .iter()
        .map(|t| t.count() as f64 / (cfg.base_scale * exposure))
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return insufficient("no spikes recorded".into());
    }
    Ok(raw.iter().map(|r| r / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{add_white_noise, encode_tree};
    use crate::spiking::SpikingPopulation;
    use crate::syntax::random::{random_items, random_labeled_tree};
    use crate::syntax::{LabelingRules, LexicalItem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn cats() -> [Category; 4] {
        ["N", "V", "A", "P"].map(Category::from)
    }

    fn segment(pc: &PhaseCode, phase: f64, start: f64) -> SignalTrace {
        let s = (0..500).map(|k| pc.eval_phase(phase, start + k as f64 / 500.0)).collect();
        SignalTrace::new(500.0, start, 0.0, s).unwrap()
    }

    #[test]
    fn quarter_turn_category() {
        let pc = EncodingConfig::default().phase_code;
        let d = decode_category(&segment(&pc, FRAC_PI_2, 0.0), &pc, 0.0).unwrap();
        assert_eq!(d.category.as_str(), "V");
        assert!((d.correlation - 1.0).abs() < 1e-9);
        assert!(d.residual < 1e-9);
    }

    #[test]
    fn exhaustive_sweep_with_offsets() {
        let pc = EncodingConfig::default().phase_code;
        let step = TAU / 16.0;
        for cat in cats() {
            for depth in 0..12u32 {
                let offset = wrap_phase(depth as f64 * step);
                let phase = wrap_phase(pc.phase_of(&cat).unwrap() + offset);
                let seg = segment(&pc, phase, 3.0 + depth as f64);
                assert_eq!(decode_category(&seg, &pc, offset).unwrap().category, cat);
                let scaled = seg.map(|v| -0.0 + 42.0 * v);
                assert_eq!(decode_category(&scaled, &pc, offset).unwrap().category, cat);
            }
        }
    }

    #[test]
    fn zero_segment_is_ambiguous() {
        let pc = EncodingConfig::default().phase_code;
        let zero = SignalTrace::new(500.0, 0.0, 0.0, vec![0.0; 500]).unwrap();
        assert!(matches!(decode_category(&zero, &pc, 0.0), Err(CodecError::Ambiguous { .. })));
    }

    #[test]
    fn short_segment_is_rejected() {
        let pc = EncodingConfig::default().phase_code;
        let seg = SignalTrace::new(500.0, 0.0, 0.0, vec![1.0; 300]).unwrap();
        assert!(matches!(decode_category(&seg, &pc, 0.0), Err(CodecError::TooShort { .. })));
    }

    #[test]
    fn decodes_at_ten_db() {
        let pc = EncodingConfig::default().phase_code;
        let mut hits = 0;
        for seed in 0..400u64 {
            let cat = &cats()[seed as usize % 4];
            let clean = segment(&pc, pc.phase_of(cat).unwrap(), 0.0);
            let noisy = add_white_noise(&clean, 10.0, seed);
            hits += usize::from(decode_category(&noisy, &pc, 0.0).unwrap().category == *cat);
        }
        assert!(hits as f64 / 400.0 >= 0.95, "{hits}/400");
    }

    fn item(id: &str, cat: &str, e: [f64; 2]) -> LexicalItem {
        LexicalItem::new(id, cat, [], e.to_vec(), 0.5).unwrap()
    }

    #[test]
    fn leaf_round_trip() {
        let a = item("dog", "N", [0.1, 0.2]);
        let lex = Lexicon::new(2, [a.clone()]).unwrap();
        let cfg = EncodingConfig::default();
        let tree = SyntacticObject::leaf(a);
        let b = encode_tree(&tree, &lex, &cfg).unwrap();
        assert_eq!(decode_tree(&b, &lex, &cfg).unwrap(), tree);
    }

    fn big_dog_barked() -> (SyntacticObject, Lexicon) {
        let (a, n, v) = (item("big", "A", [0.5, 0.1]), item("dog", "N", [-0.2, 0.3]), item("barked", "V", [0.9, -0.4]));
        let lex = Lexicon::new(2, [a.clone(), n.clone(), v.clone()]).unwrap();
        let np = SyntacticObject::node(SyntacticObject::leaf(a), SyntacticObject::leaf(n), Some("N".into())).unwrap();
        let tree = SyntacticObject::node(np, SyntacticObject::leaf(v), Some("N".into())).unwrap();
        (tree, lex)
    }

    #[test]
    fn noiseless_phrase_round_trip() {
        let (tree, lex) = big_dog_barked();
        let cfg = EncodingConfig::default();
        let b = encode_tree(&tree, &lex, &cfg).unwrap();
        let back = decode_tree(&b, &lex, &cfg).unwrap();
        assert_eq!(back, tree);
        assert_eq!(back.to_canonical_json(), tree.to_canonical_json());
    }

    #[test]
    fn wrong_phase_code_does_not_round_trip() {
        let (tree, lex) = big_dog_barked();
        let cfg = EncodingConfig::default();
        let b = encode_tree(&tree, &lex, &cfg).unwrap();
        let rotated = EncodingConfig {
            phase_code: PhaseCode::evenly_spaced(1.0, 6.0, ["V", "A", "P", "N"].map(Category::from)).unwrap(),
            ..cfg
        };
        assert_ne!(decode_tree(&b, &lex, &rotated).ok(), Some(tree));
    }

    #[test]
    fn noisy_random_round_trips() {
        let rules = LabelingRules::default();
        let cfg = EncodingConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut exact = 0;
        for trial in 0..20u64 {
            let count = rng.random_range(1..=10usize);
            let items = random_items(&mut rng, count, &cats(), 4);
            let lex = Lexicon::new(4, items.clone()).unwrap();
            let tree = random_labeled_tree(&mut rng, &items, 5, &rules).unwrap();
            let mut b = encode_tree(&tree, &lex, &cfg).unwrap();
            b.lf_trace = add_white_noise(&b.lf_trace, 20.0, trial);
            exact += usize::from(decode_tree(&b, &lex, &cfg).ok() == Some(tree));
        }
        assert!(exact >= 19, "{exact}/20");
    }

    fn weight_run(weights: Vec<f64>, seconds: f64, seed: u64) -> Vec<f64> {
        let cfg = EncodingConfig::default();
        let pop = SpikingPopulation::new(weights, cfg.coupling, 0.0, 0.0).unwrap();
        let phases = vec![1.0; (seconds * cfg.sample_rate) as usize];
        let trace = pop.population_rate(&phases, cfg.base_scale, cfg.sample_rate).unwrap();
        let trains = trace.sample(cfg.spike_dt, 0.0, seed).unwrap();
        estimate_weights(&trains, &phases, &cfg).unwrap()
    }

    #[test]
    fn equal_weights_come_back_uniform() {
        let est = weight_run(vec![0.25; 4], 120.0, 3);
        for w in est {
            assert!((w - 0.25).abs() / 0.25 < 0.05, "{w}");
        }
    }

    #[test]
    fn silent_neuron_gets_zero() {
        let est = weight_run(vec![0.0, 0.5, 0.5], 30.0, 4);
        assert_eq!(est[0], 0.0);
    }

    #[test]
    fn weight_ratio_is_recovered() {
        let mut ok = 0;
        for seed in 0..20 {
            let est = weight_run(vec![0.2, 0.8], 120.0, seed);
            ok += usize::from((est[0] / est[1] - 0.25).abs() / 0.25 < 0.05);
        }
        assert!(ok >= 19, "{ok}/20");
    }

    #[test]
    fn short_or_slow_runs_are_insufficient() {
        let cfg = EncodingConfig::default();
        let train = SpikeTrain::new(vec![0.5], 10.0).unwrap();
        assert!(matches!(
            estimate_weights(&[train], &[0.0; 10], &cfg),
            Err(CodecError::InsufficientData(_))
        ));
        let slow = EncodingConfig { base_scale: 50.0, ..cfg };
        let train = SpikeTrain::new(vec![0.5], 30.0).unwrap();
        assert!(estimate_weights(&[train], &[0.0; 10], &slow).is_err());
    }
}
