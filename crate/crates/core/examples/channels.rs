//! Draws from the three channel laws and compares empirical and analytic CDFs at the quartiles.
use hstcn::channels::{
    gg_snr_cdf, gg_snr_sample, rayleigh_gain_cdf, rayleigh_gain_sample, sr_cdf, sr_sample, OpticalLinkParams,
    RayleighGainParams, ShadowedRicianParams,
};
use hstcn::config::db_to_linear;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn compare(name: &str, mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) {
    draws.sort_by(|a, b| a.total_cmp(b));
    let n = draws.len();
    print!("{name:<16}");
    for q in [0.25, 0.5, 0.75] {
        let z = draws[(q * n as f64) as usize];
        print!("  z{:.0} = {z:.4} F = {:.4}", 100.0 * q, cdf(z));
    }
    println!();
}

fn main() {
    let n = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sr = ShadowedRicianParams::new(1.4, 2, 3.0).unwrap();
    let ray = RayleighGainParams::new(0.8).unwrap();
    let fso = OpticalLinkParams::new(6.1096, 1.0794, 1.1227, db_to_linear(20.0), 1).unwrap();
    compare("shadowed rician", (0..n).map(|_| sr_sample(&sr, &mut rng)).collect(), |x| sr_cdf(&sr, x));
    compare("rayleigh gain", (0..n).map(|_| rayleigh_gain_sample(&ray, &mut rng)).collect(), |x| rayleigh_gain_cdf(&ray, x));
    compare("gamma-gamma snr", (0..n).map(|_| gg_snr_sample(&fso, &mut rng)).collect(), |x| gg_snr_cdf(&fso, x).unwrap());
}
