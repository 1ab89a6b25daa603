//! Named checks shared by the `selftest` command and the acceptance run.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{ip_closed_form, ip_lemma1, MonotoneCubic};
use crate::channels::{
    gg_snr_cdf, gg_snr_sample, rayleigh_gain_cdf, rayleigh_gain_sample, sr_cdf, sr_sample, OpticalLinkParams,
    RayleighGainParams, ShadowedRicianParams,
};
use crate::config::{db_to_linear, NetworkConfig};
use crate::montecarlo::{estimate_ip_with, wilson};
use crate::specfun::{
    factorial, gamma_c, ln_gamma, log_gamma, lower_incomplete_gamma, meijer_g, meijer_g_path, upper_incomplete_gamma,
    upper_incomplete_gamma_int, GPath, MeijerGSpec, TruncationPolicy,
};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn crel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn log_gamma_values() -> Check {
    let mut worst = 0.0f64;
    let cases = [
        (C::new(1.0, 0.0), C::new(0.0, 0.0)),
        (C::new(0.5, 0.0), C::new(0.5 * std::f64::consts::PI.ln(), 0.0)),
        (C::new(2.3, 1.7), C::new(-0.548_135_917_218_600_4, 1.214_946_281_238_399)),
    ];
    for (z, want) in cases {
        match log_gamma(z) {
            Ok(v) => worst = worst.max((v - want).norm()),
            Err(e) => return Check::new("log_gamma_values", false, e.to_string()),
        }
    }
    for n in 1..=30usize {
        worst = worst.max((ln_gamma(n as f64) - factorial(n - 1).ln()).abs());
    }
    Check::new("log_gamma_values", worst < 1e-12, format!("max abs error {worst:.2e}"))
}

fn incomplete_at_zero() -> Check {
    let mut worst = 0.0f64;
    for &(re, im) in &[(0.3, 0.0), (1.0, 0.0), (2.7, 0.0), (4.0, 1.5), (0.8, -2.2), (6.1, 0.4)] {
        let s = C::new(re, im);
        match upper_incomplete_gamma(s, 0.0) {
            Ok(v) => worst = worst.max(crel(v, gamma_c(s))),
            Err(e) => return Check::new("incomplete_gamma_at_zero", false, e.to_string()),
        }
    }
    Check::new("incomplete_gamma_at_zero", worst < 1e-12, format!("max rel error {worst:.2e}"))
}

fn integer_complement() -> Check {
    let mut worst = 0.0f64;
    for n in 1..=12u32 {
        for &x in &[0.0, 0.01, 0.5, 1.0, 2.0, 5.0, 12.0, 30.0] {
            let full = factorial(n as usize - 1);
            let lower = lower_incomplete_gamma(n, x);
            let upper = upper_incomplete_gamma_int(n, x);
            let upper_c = match upper_incomplete_gamma(C::new(n as f64, 0.0), x) {
                Ok(v) => v.re,
                Err(e) => return Check::new("integer_order_complement", false, e.to_string()),
            };
            worst = worst.max(rel(lower + upper, full)).max(rel(lower + upper_c, full));
            let full_g = ln_gamma(n as f64).exp();
            worst = worst.max(rel(full_g, full));
        }
    }
    Check::new("integer_order_complement", worst < 1e-12, format!("max rel error {worst:.2e}"))
}

fn recurrence() -> Check {
    let mut worst = 0.0f64;
    for &re in &[-0.45, 0.05, 0.6, 1.3, 2.9] {
        for &im in &[-30.0, -7.5, -1.0, 0.0, 0.7, 4.0, 18.0, 40.0] {
            for &x in &[0.05, 0.7, 2.0, 9.0] {
                let s = C::new(re, im);
                let (a, b) = match (upper_incomplete_gamma(s + 1.0, x), upper_incomplete_gamma(s, x)) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => return Check::new("incomplete_gamma_recurrence", false, e.to_string()),
                };
                let rhs = s * b + (s * x.ln() - x).exp();
                worst = worst.max(crel(a, rhs));
            }
        }
    }
    Check::new("incomplete_gamma_recurrence", worst < 1e-9, format!("max rel error {worst:.2e}"))
}

fn meijer_identities() -> Check {
    let pol = TruncationPolicy::default();
    let mut worst = 0.0f64;
    let exp_spec = MeijerGSpec::complete(1, 0, &[], &[0.0]).unwrap();
    for &x in &[0.1, 1.0, 3.0, 10.0] {
        // the alternating residue series cancels badly by x = 10
        let paths: &[GPath] = if x < 5.0 { &[GPath::Residue, GPath::Contour] } else { &[GPath::Contour] };
        for &path in paths {
            match meijer_g_path(&exp_spec, x, &pol, path) {
                Ok(v) => worst = worst.max(rel(v.value, (-x).exp())),
                Err(e) => return Check::new("meijer_identities", false, e.to_string()),
            }
        }
    }
    for nu in 1..=3u32 {
        let spec = MeijerGSpec::complete(1, 1, &[1.0], &[nu as f64, 0.0]).unwrap();
        for &x in &[0.5, 1.0, 2.0] {
            match meijer_g(&spec, x, &pol) {
                Ok(v) => worst = worst.max(rel(v.value, lower_incomplete_gamma(nu, x))),
                Err(e) => return Check::new("meijer_identities", false, e.to_string()),
            }
        }
    }
    Check::new("meijer_identities", worst < 1e-8, format!("max rel error {worst:.2e}"))
}

fn meijer_continuity() -> Check {
    let pol = TruncationPolicy::default();
    let e2 = NetworkConfig::defaults(true).e2;
    let specs = [e2.pdf_spec(), e2.cdf_spec(), MeijerGSpec::complete(2, 1, &[0.3, 1.2], &[0.4, 1.1, 0.2]).unwrap()];
    let mut worst = 0.0f64;
    for spec in &specs {
        let mut x = 0.02;
        while x < 40.0 {
            let (a, b) = match (meijer_g(spec, x, &pol), meijer_g(spec, x * (1.0 + 1e-7), &pol)) {
                (Ok(a), Ok(b)) => (a.value, b.value),
                (Err(e), _) | (_, Err(e)) => return Check::new("meijer_continuity", false, format!("x = {x}: {e}")),
            };
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
            x *= 1.13;
        }
    }
    Check::new("meijer_continuity", worst < 1e-5, format!("max relative jump over dx/x = 1e-7: {worst:.2e}"))
}

fn near_integer(d: f64, gap: f64) -> bool {
    (d - d.round()).abs() < gap
}

/// A random complete spec with a convergent contour and simple left poles.
pub fn random_spec<R: Rng>(rng: &mut R) -> (MeijerGSpec, f64) {
    loop {
        let q = rng.random_range(1..=4usize);
        let p = rng.random_range(0..=q);
        let m = rng.random_range(1..=q);
        let n = rng.random_range(0..=p);
        if 2 * (m + n) <= p + q {
            continue;
        }
        let bottom: Vec<f64> = (0..q)
            .map(|j| if j < m { rng.random_range(0.0..2.5) } else { rng.random_range(-1.0..2.0) })
            .collect();
        let top: Vec<f64> = (0..p)
            .map(|i| if i < n { rng.random_range(-1.0..0.9) } else { rng.random_range(0.0..3.0) })
            .collect();
        let clash = (0..m).any(|i| (i + 1..m).any(|j| near_integer(bottom[i] - bottom[j], 0.05)));
        if clash {
            continue;
        }
        let x = if p < q {
            (rng.random_range(0.05f64.ln()..3.0f64.ln())).exp()
        } else {
            rng.random_range(0.05..0.35)
        };
        return (MeijerGSpec::complete(m, n, &top, &bottom).unwrap(), x);
    }
}

pub fn residue_vs_contour(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // the series certifies its own roundoff at the comparison tolerance
    let series = TruncationPolicy { rel_tol: 1e-6, max_terms: 400, ..Default::default() };
    let line = TruncationPolicy { rel_tol: 1e-9, contour_im_halfwidth: 60.0, ..Default::default() };
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..instances {
        let (spec, x) = random_spec(&mut rng);
        let r = meijer_g_path(&spec, x, &series, GPath::Residue);
        let c = meijer_g_path(&spec, x, &line, GPath::Contour);
        match (r, c) {
            (Ok(r), Ok(c)) => {
                let e = rel(r.value, c.value);
                worst = worst.max(e);
                if e > 1e-6 {
                    failures.push(format!("#{i} {spec:?} x={x:.4}: {:.6e} vs {:.6e}", r.value, c.value));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("#{i} {spec:?} x={x:.4}: {e}")),
        }
    }
    let detail = if failures.is_empty() {
        format!("{instances} instances, max rel diff {worst:.2e}")
    } else {
        format!("{} of {instances} failed; first: {}", failures.len(), failures[0])
    };
    Check::new("residue_vs_contour", failures.is_empty(), detail)
}

pub fn specfun_suite(seed: u64) -> Vec<Check> {
    vec![
        log_gamma_values(),
        incomplete_at_zero(),
        integer_complement(),
        recurrence(),
        meijer_identities(),
        meijer_continuity(),
        residue_vs_contour(100, seed),
    ]
}

/// Kolmogorov-Smirnov statistic of a sample against a CDF; sorts the sample.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic p-value of the one-sample KS statistic (Stephens' small-sample correction).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let t = (sn + 0.12 + 0.11 / sn) * d;
    if t < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn sr_parameter_sets() -> Vec<ShadowedRicianParams> {
    [(1.4, 2, 3.0), (1.0, 1, 1.5), (0.5, 3, 2.0), (4.0, 5, 6.0), (2.5, 2, 0.8)]
        .iter()
        .map(|&(b, m, o)| ShadowedRicianParams::new(b, m, o).unwrap())
        .collect()
}

pub fn rayleigh_parameter_sets() -> Vec<RayleighGainParams> {
    [0.8, 0.3, 1.5, 3.0, 10.0].iter().map(|&l| RayleighGainParams::new(l).unwrap()).collect()
}

pub fn gg_parameter_sets() -> Vec<OpticalLinkParams> {
    [
        (6.1096, 1.0794, 1.1227, db_to_linear(20.0), 1),
        (6.1096, 1.0794, 1.1227, db_to_linear(40.0), 1),
        (4.2, 1.4, 0.8, 10.0, 1),
        (6.1096, 1.0794, 1.1227, db_to_linear(20.0), 2),
        (8.0, 3.3, 2.0, 1.0, 1),
        // xi^2 family far right of beta: all but its first residue vanish
        (5.65, 3.98, 0.968, 86.0, 1),
    ]
    .iter()
    .map(|&(a, b, xi, mu, r)| OpticalLinkParams::new(a, b, xi, mu, r).unwrap())
    .collect()
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn ks_check(name: &str, d: f64, n: usize, level: f64, label: String) -> Check {
    let p = ks_pvalue(d, n);
    Check::new(name, p >= level, format!("{label}: D = {d:.5}, p = {p:.3}"))
}

/// CDF of a Gamma-Gamma SNR tabulated in log z over the sample range.
fn gg_cdf_table(p: &OpticalLinkParams, lo: f64, hi: f64) -> Result<impl Fn(f64) -> f64, String> {
    let n = ((hi / lo).log10() * 200.0).ceil().max(2.0) as usize;
    let (a, b) = (lo.ln(), hi.ln());
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let ys = xs.iter().map(|&t| gg_snr_cdf(p, t.exp())).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let t = MonotoneCubic::new(xs, ys);
    Ok(move |z: f64| t.eval(z.ln()))
}

/// KS tests of the three samplers, five parameter sets each, each at significance `level`.
pub fn sampler_suite(n: usize, seed: u64, level: f64) -> Vec<Check> {
    let mut out = Vec::new();
    for (k, p) in sr_parameter_sets().iter().enumerate() {
        let mut rng = stream(seed, 0 + k as u64);
        let mut s: Vec<f64> = (0..n).map(|_| sr_sample(p, &mut rng)).collect();
        let d = ks_statistic(&mut s, |x| sr_cdf(p, x));
        out.push(ks_check(&format!("ks_shadowed_rician_{k}"), d, n, level, format!("b={} m={} omega={}", p.b, p.m, p.omega)));
    }
    for (k, p) in rayleigh_parameter_sets().iter().enumerate() {
        let mut rng = stream(seed, 8 + k as u64);
        let mut s: Vec<f64> = (0..n).map(|_| rayleigh_gain_sample(p, &mut rng)).collect();
        let d = ks_statistic(&mut s, |u| rayleigh_gain_cdf(p, u));
        out.push(ks_check(&format!("ks_rayleigh_{k}"), d, n, level, format!("lambda={}", p.lambda)));
    }
    for (k, p) in gg_parameter_sets().iter().enumerate() {
        let name = format!("ks_gamma_gamma_{k}");
        let mut rng = stream(seed, 16 + k as u64);
        let mut s: Vec<f64> = (0..n).map(|_| gg_snr_sample(p, &mut rng)).collect();
        let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let label = format!("alpha={} beta={} xi={} mu={} r={}", p.alpha, p.beta, p.xi, p.mu, p.r);
        match gg_cdf_table(p, lo, hi) {
            Ok(cdf) => {
                let d = ks_statistic(&mut s, cdf);
                out.push(ks_check(&name, d, n, level, label));
            }
            Err(e) => out.push(Check::new(&name, false, format!("{label}: {e}"))),
        }
    }
    out
}

/// Closed form against the quadrature and a Monte Carlo Wilson interval (z score `z`) at one config.
/// A network drawn around the default table: SNRs in dB ranges, per-link fading parameters
/// perturbed, heterodyne optical links.
pub fn random_config<R: Rng>(rng: &mut R) -> NetworkConfig {
    let mut c = NetworkConfig::defaults(rng.random_bool(0.5));
    let db = |rng: &mut R, lo: f64, hi: f64| db_to_linear(rng.random_range(lo..hi));
    c.power.gs = db(rng, 20.0, 70.0);
    c.power.gsj = db(rng, 0.0, 30.0);
    c.power.gi = db(rng, 0.0, 30.0);
    c.power.gth = db(rng, -5.0, 8.0);
    c.sp = RayleighGainParams::new(rng.random_range(0.3..3.0)).unwrap();
    c.sjp = RayleighGainParams::new(rng.random_range(0.3..3.0)).unwrap();
    for l in [&mut c.sr, &mut c.se1, &mut c.sje1] {
        *l = ShadowedRicianParams::new(rng.random_range(0.5..8.0), rng.random_range(1..=4), rng.random_range(0.5..8.0)).unwrap();
    }
    let optical = |rng: &mut R, lo: f64, hi: f64| {
        OpticalLinkParams::new(rng.random_range(2.0..8.0), rng.random_range(0.8..4.0), rng.random_range(0.8..3.0), db(rng, lo, hi), 1)
            .unwrap()
    };
    c.d = optical(rng, 25.0, 55.0);
    c.e2 = optical(rng, 10.0, 35.0);
    c
}

pub fn three_way(name: &str, cfg: &NetworkConfig, n: u64, seed: u64, z: f64, workers: Option<usize>) -> Check {
    let closed = match ip_closed_form(cfg) {
        Ok(v) => v.value,
        Err(e) => return Check::new(name, false, format!("closed form: {e}")),
    };
    let quad = match ip_lemma1(cfg) {
        Ok(v) => v.value,
        Err(e) => return Check::new(name, false, format!("quadrature: {e}")),
    };
    let mc = estimate_ip_with(cfg, n, seed, workers);
    let k = (mc.value * n as f64).round() as u64;
    let (lo, hi) = wilson(k, n, z);
    let close = (closed - quad).abs() <= (1e-2 * quad).max(2e-3);
    let inside = closed >= lo && closed <= hi;
    Check::new(
        name,
        close && inside,
        format!("closed {closed:.6}, lemma1 {quad:.6}, mc {:.5} in [{lo:.5}, {hi:.5}]", mc.value),
    )
}

/// Two-sided 99.9% normal quantile.
pub const Z999: f64 = 3.290_526_731_491_926;

pub fn agreement_suite(n: u64, seed: u64, z: f64, workers: Option<usize>) -> Vec<Check> {
    vec![
        three_way("three_way_jammer_on", &NetworkConfig::defaults(true), n, seed, z, workers),
        three_way("three_way_jammer_off", &NetworkConfig::defaults(false), n, seed, z, workers),
    ]
}

/// Everything `selftest` runs: identities, samplers at n = 1e5, reduced agreement at n = 1e5.
/// The fifteen KS tests share a 1% family-wise level so a clean build passes for almost every seed.
pub fn selftest(seed: u64, workers: Option<usize>) -> Vec<Check> {
    let mut out = specfun_suite(seed);
    let tests = sr_parameter_sets().len() + rayleigh_parameter_sets().len() + gg_parameter_sets().len();
    out.extend(sampler_suite(100_000, seed, 0.01 / tests as f64));
    out.extend(agreement_suite(100_000, seed, Z999, workers));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_pvalue_limits() {
        assert!((ks_pvalue(1.6276 / (1e5f64).sqrt(), 100_000) - 0.01).abs() < 1e-3);
        assert!(ks_pvalue(0.5, 1000) < 1e-12);
        assert_eq!(ks_pvalue(0.0, 1000), 1.0);
    }

    #[test]
    fn ks_detects_wrong_law() {
        let p = RayleighGainParams::new(0.8).unwrap();
        let q = RayleighGainParams::new(0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s: Vec<f64> = (0..100_000).map(|_| rayleigh_gain_sample(&p, &mut rng)).collect();
        let d = ks_statistic(&mut s, |u| rayleigh_gain_cdf(&q, u));
        assert!(ks_pvalue(d, s.len()) < 0.01);
    }

    #[test]
    fn identity_checks_pass() {
        for c in [log_gamma_values(), incomplete_at_zero(), integer_complement(), recurrence(), meijer_identities()] {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn continuity_check_passes() {
        let c = meijer_continuity();
        assert!(c.passed, "{}", c.detail);
    }

    #[test]
    fn residue_matches_contour_on_random_specs() {
        let c = residue_vs_contour(100, 11);
        assert!(c.passed, "{}", c.detail);
    }
}
