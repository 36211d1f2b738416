//! Cross-module invariants as property tests.

use colorsurg::circuit::{extraction_round, noise_locations, sample_faults, trial_rng, Allocation};
use colorsurg::decoding::{decode_minweight, syndrome_of};
use colorsurg::geometry::build_color_patch;
use colorsurg::montecarlo::{run_campaign, Campaign, Protocol};
use colorsurg::sim::run;
use colorsurg::{Pauli, PauliOp};
use proptest::prelude::*;
use std::time::{Duration, Instant};

fn arb_error(n: usize) -> impl Strategy<Value = PauliOp> {
    proptest::collection::vec(0u8..4, n).prop_map(move |v| {
        let mut p = PauliOp::identity(n);
        for (q, c) in v.into_iter().enumerate() {
            p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][c as usize]);
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minweight_correction_reproduces_the_syndrome(e in arb_error(17)) {
        let cs = build_color_patch(5).unwrap().checkset();
        let s = syndrome_of(&cs, &e);
        let fix = decode_minweight(&cs, &s).unwrap();
        prop_assert_eq!(syndrome_of(&cs, &fix), s.clone());
        prop_assert!(fix.weight() <= e.weight());
        prop_assert_eq!(decode_minweight(&cs, &s).unwrap(), fix);
    }

    #[test]
    fn fault_sampling_is_seed_determined(seed in any::<u64>(), p in 0.0f64..0.2) {
        let c = extraction_round(&build_color_patch(3).unwrap(), Allocation::OnePerFace);
        let locs = noise_locations(&c);
        let draw = |s| {
            let mut v = Vec::new();
            sample_faults(&locs, p, &mut trial_rng(s, 0), &mut v);
            v
        };
        prop_assert_eq!(draw(seed), draw(seed));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn campaigns_are_reproducible(seed in any::<u64>(), k in 0usize..Protocol::ALL.len()) {
        let c = Campaign::new(Protocol::ALL[k], 3, 0.01, 2_000, seed);
        let (a, b) = (run_campaign(&c).unwrap(), run_campaign(&c).unwrap());
        prop_assert_eq!(a.csv_row(), b.csv_row());
    }
}

#[test]
fn logical_supports_coincide() {
    for d in (3..=15).step_by(2) {
        let p = build_color_patch(d).unwrap();
        let (mut x, mut z) = (p.logical_x.clone(), p.logical_z.clone());
        x.sort_unstable();
        z.sort_unstable();
        assert_eq!(x, z, "d={d}");
        assert_eq!(x.len(), d as usize);
    }
}

#[test]
fn tableau_handles_two_hundred_qubits() {
    // d=15 with one ancilla per check: 127 data plus 112 syndrome qubits
    let c = extraction_round(&build_color_patch(15).unwrap(), Allocation::OnePerCheck);
    assert!(c.n_qubits > 200);
    let t = Instant::now();
    run(&c, 1).unwrap();
    assert!(t.elapsed() < Duration::from_secs(5), "{:?}", t.elapsed());
}
