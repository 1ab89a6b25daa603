use hstcn::analytic::{ip_closed_form, ip_lemma1};
use hstcn::checks::random_config;
use hstcn::config::NetworkConfig;
use hstcn::montecarlo::{base_rng, draw_snrs, estimate_event_probs, estimate_ip, sample_rng};
use hstcn::system::intercepted;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn closed_matches_quadrature(seed in any::<u64>()) {
        let cfg = random_config(&mut ChaCha8Rng::seed_from_u64(seed));
        let k = ip_closed_form(&cfg).unwrap().value;
        let l = ip_lemma1(&cfg).unwrap().value;
        prop_assert!((k - l).abs() <= (1e-2 * l).max(2e-3), "{:?}: closed {} lemma1 {}", cfg, k, l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn events_complement_intercept(seed in any::<u64>(), s in any::<u64>()) {
        let cfg = random_config(&mut ChaCha8Rng::seed_from_u64(seed));
        let n = 20_000;
        let ev = estimate_event_probs(&cfg, n, s);
        let ip = estimate_ip(&cfg, n, s);
        let passed: u64 = ev.counts.iter().sum();
        prop_assert_eq!(passed + (ip.value * n as f64).round() as u64, n);
    }

    #[test]
    fn jammer_never_raises_interception(seed in any::<u64>()) {
        let cfg = random_config(&mut ChaCha8Rng::seed_from_u64(seed));
        let (on, off) = (cfg.with_jammer(true), cfg.with_jammer(false));
        let base = base_rng(seed);
        for i in 0..2000 {
            let a = draw_snrs(&on, &mut sample_rng(&base, i));
            let b = draw_snrs(&off, &mut sample_rng(&base, i));
            prop_assert!(!intercepted(&a, on.power.gth) || intercepted(&b, off.power.gth));
        }
    }
}

#[test]
fn monte_carlo_brackets_closed_form() {
    for on in [true, false] {
        let cfg = NetworkConfig::defaults(on);
        let e = estimate_ip(&cfg, 400_000, 77);
        let k = ip_closed_form(&cfg).unwrap().value;
        let half = 2.576 * (e.value * (1.0 - e.value) / 4e5).sqrt();
        assert!((e.value - k).abs() <= half, "jammer {on}: mc {} closed {k}", e.value);
    }
}
