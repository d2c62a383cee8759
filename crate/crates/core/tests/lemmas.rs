mod common;

use std::collections::BTreeSet;

use megflood::lemmas::*;
use megflood::rng::rng_from_seed;
use proptest::prelude::*;

#[test]
fn exhaustive_boundary_has_no_violations() {
    let report = verify_boundary_lemma(4).unwrap();
    assert_eq!(report.cases, 2 + 16 + 512 + 65536);
    assert_eq!(report.violations, 0, "{report}");
    // the full and empty sets sit exactly on the bound
    assert_eq!(report.worst_margin, 0.0);
}

#[test]
fn fast_boundary_agrees_with_definition() {
    for m in 1..=3usize {
        for mask in 0u64..(1 << (m * m)) {
            let b = CellSubset::from_mask(m, mask);
            let members: BTreeSet<_> = b.members().collect();
            assert_eq!(
                boundary(&b),
                common::boundary_by_definition(m, &members),
                "m={m} mask={mask:#x}"
            );
        }
    }
}

#[test]
fn exhaustive_rejects_large_m() {
    assert!(verify_boundary_lemma(0).is_err());
    assert!(verify_boundary_lemma(5).is_err());
}

#[test]
fn sampled_boundary_on_16x16() {
    let seed = 16;
    let report = verify_boundary_sampled(16, 1_000_000, seed, &mut rng_from_seed(seed));
    assert_eq!(report.cases, 1_000_000);
    assert_eq!(report.violations, 0, "{report}");
    assert_eq!(report.seed, Some(seed));
}

#[test]
fn sampled_subsets_match_definition() {
    let mut rng = rng_from_seed(5);
    for _ in 0..2000 {
        let b = random_subset(7, &mut rng);
        let members: BTreeSet<_> = b.members().collect();
        assert_eq!(boundary(&b), common::boundary_by_definition(7, &members));
    }
}

#[test]
fn spreading_lemma_up_to_ten_thousand() {
    let s = verify_spreading_lemma(10_000);
    assert_eq!(s.report.cases, 10_000);
    assert_eq!(s.report.violations, 0, "{}", s.report);
    assert!(s.max_ratio < 1.0, "max ratio {}", s.max_ratio);
    assert!(minimal_spreading_sequence(10_000) <= 500);
}

#[test]
fn spreading_small_values() {
    assert_eq!(minimal_spreading_sequence(1), 0);
    assert_eq!(minimal_spreading_sequence(2), 1);
    // 1 → 2 → 3 → 4 (min(3,1)=1 each time near the end)
    assert_eq!(minimal_spreading_step(1, 4), 2);
    assert_eq!(minimal_spreading_step(2, 4), 4);
    assert_eq!(spreading_bound(1), 5);
    assert_eq!(spreading_bound(4), 10);
}

proptest! {
    #[test]
    fn admissible_sequences_dominate_minimal(k in 1u64..3000, extra in prop::collection::vec(0u64..50, 400)) {
        let mut q = 1u64;
        let mut t = 0usize;
        while q < k {
            let floor = minimal_spreading_step(q, k);
            q = (floor + extra[t % extra.len()]).min(k);
            t += 1;
        }
        prop_assert!(t as u64 <= minimal_spreading_sequence(k));
    }
}

#[test]
fn adversarial_tail_within_bound() {
    let spec = AlmostIncreasingSpec::new(2.0, 1.0 / 121.0, 1000, 0.01).unwrap();
    let t0 = spec.min_t();
    assert_eq!(t0, 13);
    let ts: Vec<u64> = (t0..t0 + 20).collect();
    let seed = 121;
    let (report, estimates) = verify_almost_increasing(
        &spec,
        &spec.adversarial(),
        &ts,
        100_000,
        seed,
        &mut rng_from_seed(seed),
    )
    .unwrap();
    assert_eq!(report.violations, 0, "{report}");
    for e in &estimates {
        assert_eq!(e.trials, 100_000);
        assert!(e.probability > 0.0, "adversary never stalls at t={}", e.t);
    }
}

#[test]
fn always_grow_never_stalls() {
    let spec = AlmostIncreasingSpec::new(2.0, 0.5, 1000, 0.01).unwrap();
    let est = simulate_almost_increasing(
        &spec,
        &AlwaysGrow { alpha: 2.0 },
        spec.min_t(),
        1000,
        &mut rng_from_seed(1),
    )
    .unwrap();
    assert_eq!(est.stuck, 0);
}

#[test]
fn inapplicable_parameters_are_rejected() {
    assert!(AlmostIncreasingSpec::new(2.0, 1.0 / 121.0, 1000, 0.5).is_err());
    assert!(AlmostIncreasingSpec::new(1.0, 0.5, 1000, 0.01).is_err());
    let spec = AlmostIncreasingSpec::new(2.0, 1.0 / 121.0, 1000, 0.01).unwrap();
    let r = simulate_almost_increasing(
        &spec,
        &spec.adversarial(),
        spec.min_t() - 1,
        10,
        &mut rng_from_seed(0),
    );
    assert!(r.is_err());
}

#[test]
fn report_json_round_trips_fields() {
    let report = verify_boundary_lemma(2).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(v["lemma"], "boundary");
    assert_eq!(v["cases"], 18);
    assert_eq!(v["violations"], 0);
}
