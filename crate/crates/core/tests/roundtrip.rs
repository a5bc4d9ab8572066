//! Classification round-trip invariant: orthogonal *-congruence scrambling
//! never changes the recovered skeleton (100 random spec/scrambler pairs,
//! total order at most 10).

use orthostab::classify::roundtrip_check;
use orthostab::forms::{HermClass, HermSpec, Part, SignedPart};
use orthostab::mat::c;
use orthostab::solution_space::{antisym_from_params, Field};
use orthostab::TolPolicy;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_spec(rng: &mut ChaCha8Rng) -> HermSpec {
    // the class menu keeps the eigenvalues of A conj(A) well separated
    loop {
        let mut classes = Vec::new();
        if rng.gen_bool(0.4) {
            let size = rng.gen_range(1..=2);
            let mult = rng.gen_range(1..=2);
            classes.push(HermClass::Zero {
                parts: vec![SignedPart {
                    size,
                    mult,
                    signs: (0..mult)
                        .map(|_| if size % 2 == 1 || rng.gen_bool(0.5) { 1 } else { -1 })
                        .collect(),
                }],
            });
        }
        if rng.gen_bool(0.6) {
            let lambda = [1.0, 1.6][rng.gen_range(0..2)];
            let size = rng.gen_range(1..=3);
            let mult = rng.gen_range(1..=2);
            classes.push(HermClass::Pos {
                lambda,
                parts: vec![SignedPart {
                    size,
                    mult,
                    signs: (0..mult).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect(),
                }],
            });
        }
        if rng.gen_bool(0.4) {
            classes.push(HermClass::NegPair {
                mu: [1.0, 1.5][rng.gen_range(0..2)],
                parts: vec![Part { size: rng.gen_range(1..=2), mult: 1 }],
            });
        }
        if classes.is_empty() || rng.gen_bool(0.3) {
            classes.push(HermClass::Complex {
                xi: [c(1.0, 0.5), c(0.5, 1.1)][rng.gen_range(0..2)],
                parts: vec![Part { size: rng.gen_range(1..=2), mult: 1 }],
            });
        }
        let spec = HermSpec { classes };
        if spec.validate().is_ok() && spec.order() <= 10 {
            return spec;
        }
    }
}

#[test]
fn scrambled_classification_recovers_the_skeleton() {
    let policy = TolPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for round in 0..100 {
        let spec = random_spec(&mut rng);
        let n = spec.order();
        let np = n * (n - 1);
        // bounded generator keeps the scrambler well conditioned
        let scale = 0.8 / (n as f64);
        let p: Vec<f64> = (0..np).map(|_| rng.gen_range(-scale..scale)).collect();
        let q = antisym_from_params(n, Field::Complex, &p).expm();
        let ok = roundtrip_check(&spec, &q, &policy)
            .unwrap_or_else(|e| panic!("round {round}: classification failed: {e} on {spec:?}"));
        assert!(ok, "round {round}: skeleton mismatch for {spec:?}");
    }
}
