//! Intercept probability at the default operating point and at Omega = b = 6, with and
//! without the friendly jammer.
use hstcn::config::NetworkConfig;
use hstcn::montecarlo::estimate_ip;
use std::time::Instant;

fn main() {
    let n = 1_000_000;
    for (label, b_omega) in [("defaults", None), ("omega = b = 6", Some(6.0))] {
        for jammer in [true, false] {
            let mut cfg = NetworkConfig::defaults(jammer);
            if let Some(v) = b_omega {
                cfg.set_sr_all(Some(v), Some(v));
            }
            let t = Instant::now();
            let e = estimate_ip(&cfg, n, 2024);
            println!(
                "{label:>14} jammer={jammer:<5} IP={:.4} [{:.4}, {:.4}] ({} ms)",
                e.value,
                e.ci_low,
                e.ci_high,
                t.elapsed().as_millis()
            );
        }
    }
}
