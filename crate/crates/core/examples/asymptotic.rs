//! First-residue approximation against the closed form as gamma_I grows, with gamma_SJ held
//! at its default and with gamma_SJ moving alongside gamma_I.
use hstcn::analytic::{ip_asymptotic, ip_closed_form};
use hstcn::config::{db_to_linear, NetworkConfig};

fn main() {
    println!("{:>8} {:>10} {:>10} {:>8} | {:>10} {:>10} {:>8}", "gI dB", "closed", "asym", "gap", "closed", "asym", "gap");
    for db in (20..=60).step_by(10) {
        let mut row = format!("{db:>8}");
        for co_scaled in [false, true] {
            let mut cfg = NetworkConfig::defaults(true);
            cfg.power.gi = db_to_linear(db as f64);
            if co_scaled {
                cfg.power.gsj = db_to_linear(db as f64 + 1.0);
                row.push_str(" |");
            }
            let k = ip_closed_form(&cfg).unwrap().value;
            let a = ip_asymptotic(&cfg).unwrap().value;
            row.push_str(&format!(" {k:>10.5} {a:>10.5} {:>7.2}%", 100.0 * (a - k).abs() / k));
        }
        println!("{row}");
    }
    match ip_asymptotic(&NetworkConfig::defaults(false)) {
        Ok(_) => println!("jammer off: unexpectedly accepted"),
        Err(e) => println!("jammer off: {e}"),
    }
}
