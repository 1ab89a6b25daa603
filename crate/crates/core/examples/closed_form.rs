//! Closed-form intercept probability at the default point and at Omega = b = 6.
use hstcn::analytic::{ip_asymptotic, ip_closed_form};
use hstcn::config::NetworkConfig;
use std::time::Instant;

fn main() {
    for (label, b_omega) in [("defaults", None), ("omega = b = 6", Some(6.0))] {
        for jammer in [true, false] {
            let mut cfg = NetworkConfig::defaults(jammer);
            if let Some(v) = b_omega {
                cfg.set_sr_all(Some(v), Some(v));
            }
            let t = Instant::now();
            match ip_closed_form(&cfg) {
                Ok(e) => println!("{label:>14} jammer={jammer:<5} IP={:.5} (err {:.1e}, {} ms)", e.value, e.error, t.elapsed().as_millis()),
                Err(err) => println!("{label:>14} jammer={jammer:<5} failed: {err}"),
            }
            if jammer {
                if let Ok(a) = ip_asymptotic(&cfg) {
                    println!("{label:>14} first-residue approximation IP={:.5}", a.value);
                }
            }
        }
    }
}
