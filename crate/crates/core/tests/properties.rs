use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rose_core::hopf::{comultiply, hopf_merge, iterate_merge, HopfElement};
use rose_core::syntax::random::{random_derivation, random_items};
use rose_core::syntax::{Category, SyntacticObject};
use rose_core::{circular_distance, wrap_phase};

fn cats() -> Vec<Category> {
    ["N", "V", "A", "P"].into_iter().map(Category::from).collect()
}

proptest! {
    #[test]
    fn derivations_shrink_the_workspace_and_replay(seed in any::<u64>(), count in 2usize..10, steps in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = random_items(&mut rng, count, &cats(), 2);
        let d = random_derivation(&mut rng, items, steps);
        prop_assert_eq!(d.current().len(), count - d.steps.len());
        prop_assert!(d.check_markov());
        for s in &d.steps {
            let (p, q) = &s.pair;
            prop_assert_eq!(
                SyntacticObject::set(p.clone(), q.clone()).unwrap(),
                SyntacticObject::set(q.clone(), p.clone()).unwrap()
            );
        }
    }

    #[test]
    fn merge_then_comultiply_recovers_the_pair(ax in 0.0f64..4.0, px in -7.0f64..7.0, ay in 0.0f64..4.0, py in -7.0f64..7.0) {
        let (x, y) = (HopfElement::new(ax, px).unwrap(), HopfElement::new(ay, py).unwrap());
        let m = hopf_merge(&x, &y);
        let (a, b) = comultiply(&m).unwrap();
        let again = hopf_merge(&a, &b);
        prop_assert!((again.amplitude() - m.amplitude()).abs() <= 1e-12 * m.amplitude().max(1.0));
        prop_assert!(circular_distance(again.phase(), m.phase()) <= 1e-12);
        prop_assert!(circular_distance(m.phase(), wrap_phase(px + py)) <= 1e-12);
    }

    #[test]
    fn iterated_merge_multiplies_amplitudes(a in 0.5f64..1.5, p in 0.0f64..6.0, n in 0u32..8) {
        let z = HopfElement::new(a, p).unwrap();
        let x = iterate_merge(&HopfElement::unit(), &z, n);
        prop_assert!((x.amplitude() - a.powi(n as i32)).abs() <= 1e-12 * a.powi(n as i32).max(1.0));
        prop_assert!(circular_distance(x.phase(), wrap_phase(p * n as f64)) <= 1e-9);
    }
}
