//! Monte Carlo probabilities of the six non-intercept events; they sum to 1 - IP.
use hstcn::config::NetworkConfig;
use hstcn::montecarlo::{estimate_event_probs, estimate_ip};

fn main() {
    let n = 1_000_000;
    for jammer in [true, false] {
        let cfg = NetworkConfig::defaults(jammer);
        let ev = estimate_event_probs(&cfg, n, 5);
        let ip = estimate_ip(&cfg, n, 5);
        let parts: Vec<String> = ev.p.iter().enumerate().map(|(k, p)| format!("I{} {p:.4}", k + 1)).collect();
        println!("jammer={jammer:<5} {}  sum {:.6}  1 - IP {:.6}", parts.join("  "), ev.sum, 1.0 - ip.value);
    }
}
