//! Interchange-format invariants: the JSON matrix format round-trips
//! bit-exactly, so residual certificates recompute to the same values from
//! emitted files.

use orthostab::forms::{HermClass, HermSpec, Part, SignedPart};
use orthostab::mat::c;
use orthostab::oracle::{verify_stab_element, Action};
use orthostab::stab::stabilizer_herm;
use orthostab::{Mat, TolPolicy};
use rand::SeedableRng;

#[test]
fn sampled_elements_round_trip_bit_exactly() {
    let spec = HermSpec {
        classes: vec![
            HermClass::Pos { lambda: 1.5, parts: vec![SignedPart { size: 1, mult: 2, signs: vec![1, 1] }] },
            HermClass::NegPair { mu: 1.0, parts: vec![Part { size: 1, mult: 1 }] },
            HermClass::Complex { xi: c(1.0, 1.0), parts: vec![Part { size: 1, mult: 1 }] },
        ],
    };
    let stab = stabilizer_herm(&spec, &TolPolicy::default()).unwrap();
    let m = spec.assemble().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5 {
        let p = stab.space.sample_params(&mut rng, 0.3);
        let q = stab.space.evaluate(&p).unwrap();
        let text = serde_json::to_string_pretty(&q).unwrap();
        let q2: Mat = serde_json::from_str(&text).unwrap();
        assert_eq!(q, q2, "bit-exact matrix round trip");
        let r1 = verify_stab_element(&q, &m, Action::Herm, 1e-8).unwrap();
        let r2 = verify_stab_element(&q2, &m, Action::Herm, 1e-8).unwrap();
        assert_eq!(r1.orthogonality_residual, r2.orthogonality_residual);
        assert_eq!(r1.action_residual, r2.action_residual);
        assert!(r1.pass);
    }
}

#[test]
fn proptest_style_matrix_roundtrip() {
    use proptest::prelude::*;
    let mut runner = proptest::test_runner::TestRunner::default();
    runner
        .run(
            &(1usize..6, 1usize..6, proptest::collection::vec(-1e3f64..1e3, 72)),
            |(r, c_, vals)| {
                let m = Mat::from_fn(r, c_, |i, j| {
                    let k = 2 * (i * c_ + j);
                    c(vals[k], vals[k + 1])
                });
                let text = serde_json::to_string(&m).unwrap();
                let back: Mat = serde_json::from_str(&text).unwrap();
                prop_assert_eq!(m, back);
                Ok(())
            },
        )
        .unwrap();
}
