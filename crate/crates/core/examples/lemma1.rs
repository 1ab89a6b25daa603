//! Nested quadrature against the closed form at the default point, both jammer modes.
use hstcn::analytic::{ip_closed_form, ip_lemma1};
use hstcn::config::NetworkConfig;
use std::time::Instant;

fn main() {
    for jammer in [true, false] {
        let cfg = NetworkConfig::defaults(jammer);
        let t = Instant::now();
        let l = ip_lemma1(&cfg).expect("quadrature");
        let tl = t.elapsed().as_millis();
        let k = ip_closed_form(&cfg).expect("closed form");
        println!(
            "jammer={jammer:<5} lemma1 {:.7} ({tl} ms)  closed {:.7}  difference {:.1e}",
            l.value,
            k.value,
            (l.value - k.value).abs()
        );
    }
}
