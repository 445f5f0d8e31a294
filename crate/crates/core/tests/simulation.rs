use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use rdeq::info::h2;
use rdeq::sim::{
    sim_binning_lossless, sim_separation_scheme, sim_uncoded, uncoded_equivocation, SchemeRates, SimConfig,
};

fn pinned(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() }
}

fn config(n: usize, trials: usize, seed: u64, beta: f64, eps: f64, zeta: f64) -> SimConfig {
    SimConfig { n, trials, seed, beta, eps, zeta, parallel: true }
}

proptest! {
    #![proptest_config(pinned(24))]

    #[test]
    fn uncoded_report_is_the_closed_form(eps in 0.0f64..=0.5, zeta in 0.0f64..=0.5, seed in any::<u64>()) {
        let r = sim_uncoded(&config(10, 20, seed, 0.5, eps, zeta)).unwrap();
        prop_assert!((r.equivocation_per_symbol - uncoded_equivocation(eps, zeta).unwrap()).abs() < 1e-12);
        prop_assert_eq!(r.decode_error_rate, 0.0);
        prop_assert_eq!(r.mean_distortion, 0.0);
    }

    #[test]
    fn binning_stays_below_side_information_equivocation(
        beta in 0.0f64..=1.0,
        eps in 0.0f64..=0.5,
        rate in 0.0f64..=1.0,
        n in 4usize..=10,
        seed in any::<u64>(),
    ) {
        let c = config(n, 30, seed, beta, eps, 0.5);
        let r = sim_binning_lossless(&c, rate).unwrap();
        prop_assert!(r.equivocation_per_symbol <= h2(eps).unwrap() + 1e-9);
        prop_assert_eq!(&r, &sim_binning_lossless(&SimConfig { parallel: false, ..c }, rate).unwrap());
    }

    #[test]
    fn separation_is_reproducible_and_bounded(
        eps in 0.0f64..=0.5,
        zeta in 0.0f64..=0.5,
        rf in 0.0f64..=0.5,
        seed in any::<u64>(),
    ) {
        let rates = SchemeRates { r1: 0.25, r2: 0.5, rc: 0.25, rp: 0.5, rf, k: 1.5 };
        let c = config(8, 20, seed, 0.5, eps, zeta);
        let a = sim_separation_scheme(&c, &rates).unwrap();
        // the bound holds for the expectation; the sample mean carries noise
        prop_assert!(a.equivocation_per_symbol <= h2(eps).unwrap() + 3.0 * a.confidence_halfwidth + 1e-9);
        prop_assert_eq!(&a, &sim_separation_scheme(&c, &rates).unwrap());
        prop_assert_eq!(&a, &sim_separation_scheme(&SimConfig { parallel: false, ..c }, &rates).unwrap());
    }
}

#[test]
fn reruns_with_other_seeds_agree_within_confidence_intervals() {
    let rates = SchemeRates { r1: 0.25, r2: 0.5, rc: 0.25, rp: 0.5, rf: 0.25, k: 1.5 };
    let pairs = 40;
    let mut agree = 0;
    for i in 0..pairs {
        let a = sim_separation_scheme(&config(8, 100, 2 * i, 0.5, 0.2, 0.2), &rates).unwrap();
        let b = sim_separation_scheme(&config(8, 100, 2 * i + 1, 0.5, 0.2, 0.2), &rates).unwrap();
        let gap = (a.equivocation_per_symbol - b.equivocation_per_symbol).abs();
        if gap <= a.confidence_halfwidth + b.confidence_halfwidth {
            agree += 1;
        }
    }
    assert!(agree as f64 >= 0.95 * pairs as f64, "{agree}/{pairs} paired reruns agree");
}

#[test]
fn separation_with_transparent_eve_channel_is_binning_residual() {
    // zeta = 0: Eve reads the channel word, so only the binning residual is left
    let rates = SchemeRates { r1: 0.25, r2: 0.5, rc: 0.25, rp: 0.5, rf: 0.0, k: 1.0 };
    let c = config(12, 200, 3, 0.5, 0.5, 0.0);
    let sep = sim_separation_scheme(&c, &rates).unwrap();
    let bin = sim_binning_lossless(&c, 0.75).unwrap();
    assert!((sep.equivocation_per_symbol - 0.25).abs() < 1e-9, "{sep:?}");
    assert!((bin.equivocation_per_symbol - 0.25).abs() < 1e-9, "{bin:?}");
}

#[test]
fn separation_with_useless_eve_channel_leaves_side_information_only() {
    let rates = SchemeRates { r1: 0.25, r2: 0.5, rc: 0.25, rp: 0.5, rf: 0.0, k: 1.0 };
    let sep = sim_separation_scheme(&config(12, 200, 5, 0.5, 0.2, 0.5), &rates).unwrap();
    // bin index hidden entirely: H(Aⁿ|Eⁿ)/n = h2(eps)
    assert!((sep.equivocation_per_symbol - h2(0.2).unwrap()).abs() < 1e-9, "{sep:?}");
}
