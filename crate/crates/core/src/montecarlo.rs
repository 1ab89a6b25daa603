//! Counter-based parallel Monte Carlo for the intercept probability and the six
//! non-intercept orderings.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{gg_snr_sample, rayleigh_gain_sample, sr_sample};
use crate::config::NetworkConfig;
use crate::system::{intercepted, snrs, GainDraw, SnrDraw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalPath {
    Mc,
    Lemma1,
    Closed,
    Asymptotic,
}

impl EvalPath {
    pub fn name(&self) -> &'static str {
        match self {
            EvalPath::Mc => "mc",
            EvalPath::Lemma1 => "lemma1",
            EvalPath::Closed => "closed",
            EvalPath::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IPEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
    pub seed: u64,
    pub path: EvalPath,
    /// Unclipped value for the analytic paths.
    pub raw: f64,
    /// Estimated numerical error for the analytic paths.
    pub error: f64,
}

impl IPEstimate {
    pub fn analytic(raw: f64, error: f64, path: EvalPath) -> Self {
        let value = raw.clamp(0.0, 1.0);
        IPEstimate { value, ci_low: value, ci_high: value, n: 0, seed: 0, path, raw, error }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventProbs {
    pub p: [f64; 6],
    pub sum: f64,
    pub counts: [u64; 6],
    pub n: u64,
}

pub const Z95: f64 = 1.959_963_984_540_054;
pub const Z99: f64 = 2.575_829_303_548_901;

/// Wilson score interval for k successes in n trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let den = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / den;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / den;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// All seven draws in a fixed order, so both jammer modes see common random numbers.
pub fn draw_gains<R: rand::Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> GainDraw {
    GainDraw {
        g_sp: rayleigh_gain_sample(&cfg.sp, rng),
        g_sjp: rayleigh_gain_sample(&cfg.sjp, rng),
        g_sr: sr_sample(&cfg.sr, rng),
        g_se1: sr_sample(&cfg.se1, rng),
        g_sje1: sr_sample(&cfg.sje1, rng),
        snr_d: gg_snr_sample(&cfg.d, rng),
        snr_e2: gg_snr_sample(&cfg.e2, rng),
    }
}

pub fn draw_snrs<R: rand::Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> SnrDraw {
    snrs(&cfg.power, &draw_gains(cfg, rng))
}

/// Generator for sample `i`: the seed fixes the key, the index picks the stream.
pub fn sample_rng(base: &ChaCha8Rng, i: u64) -> ChaCha8Rng {
    let mut r = base.clone();
    r.set_stream(i);
    r.set_word_pos(0);
    r
}

pub fn base_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(w) if w > 0 => rayon::ThreadPoolBuilder::new().num_threads(w).build().expect("thread pool").install(f),
        _ => f(),
    }
}

/// Sum of `f(i)` over sample indices, order-independent.
pub fn map_count<F>(n: u64, workers: Option<usize>, f: F) -> [u64; 7]
where
    F: Fn(u64) -> Option<usize> + Sync,
{
    with_workers(workers, || {
        (0..n)
            .into_par_iter()
            .fold(
                || [0u64; 7],
                |mut acc, i| {
                    if let Some(k) = f(i) {
                        acc[k] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || [0u64; 7],
                |mut a, b| {
                    for k in 0..7 {
                        a[k] += b[k];
                    }
                    a
                },
            )
    })
}

pub fn estimate_ip(cfg: &NetworkConfig, n: u64, seed: u64) -> IPEstimate {
    estimate_ip_with(cfg, n, seed, None)
}

pub fn estimate_ip_with(cfg: &NetworkConfig, n: u64, seed: u64, workers: Option<usize>) -> IPEstimate {
    let base = base_rng(seed);
    let gth = cfg.power.gth;
    let counts = map_count(n, workers, |i| {
        let s = draw_snrs(cfg, &mut sample_rng(&base, i));
        intercepted(&s, gth).then_some(0)
    });
    let k = counts[0];
    let value = if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let (lo, hi) = wilson(k, n, Z95);
    IPEstimate { value, ci_low: lo, ci_high: hi, n, seed, path: EvalPath::Mc, raw: value, error: 0.0 }
}

/// Index 0..6 of the ordering of (gamma_E1, gamma_E2, gamma_th) below gamma_R; ties go
/// to the lower index.
pub fn classify(s: &SnrDraw, gth: f64) -> usize {
    let (a, b, t) = (s.e1, s.e2, gth);
    if a >= b && b >= t {
        0
    } else if b >= a && a >= t {
        1
    } else if t >= b && b >= a {
        2
    } else if t >= a && a >= b {
        3
    } else if b >= t && t >= a {
        4
    } else {
        5
    }
}

pub fn estimate_event_probs(cfg: &NetworkConfig, n: u64, seed: u64) -> EventProbs {
    estimate_event_probs_with(cfg, n, seed, None)
}

pub fn estimate_event_probs_with(cfg: &NetworkConfig, n: u64, seed: u64, workers: Option<usize>) -> EventProbs {
    let base = base_rng(seed);
    let gth = cfg.power.gth;
    let c = map_count(n, workers, |i| {
        let s = draw_snrs(cfg, &mut sample_rng(&base, i));
        if intercepted(&s, gth) {
            None
        } else {
            Some(classify(&s, gth))
        }
    });
    let mut counts = [0u64; 6];
    counts.copy_from_slice(&c[..6]);
    let nf = n.max(1) as f64;
    let p = counts.map(|k| k as f64 / nf);
    let total: u64 = counts.iter().sum();
    EventProbs { p, sum: total as f64 / nf, counts, n }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_point() {
        for &(k, n) in &[(0u64, 10u64), (10, 10), (3, 7), (500, 1000)] {
            let (lo, hi) = wilson(k, n, Z95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        let (lo, hi) = wilson(500, 1000, Z95);
        // normal approximation is accurate at p = 1/2
        assert!((hi - lo - 2.0 * Z95 * (0.25f64 / 1000.0).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn huge_threshold_gives_certain_intercept() {
        let mut c = NetworkConfig::defaults(true);
        c.power.gth = 1e12 * c.power.gs;
        let e = estimate_ip(&c, 2000, 1);
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn worker_count_invariant() {
        let c = NetworkConfig::defaults(true);
        let a = estimate_ip_with(&c, 20_000, 9, Some(1));
        let b = estimate_ip_with(&c, 20_000, 9, Some(2));
        let d = estimate_ip_with(&c, 20_000, 9, Some(8));
        assert_eq!(a, b);
        assert_eq!(a, d);
    }

    #[test]
    fn matches_serial_reference() {
        // plain loop over the same per-sample streams, no thread pool
        let c = NetworkConfig::defaults(false);
        let n = 5000;
        let base = base_rng(3);
        let mut k = 0;
        for i in 0..n {
            let mut r = base.clone();
            r.set_stream(i);
            let s = snrs(&c.power, &draw_gains(&c, &mut r));
            if s.r < c.power.gth || secrecy(&s) <= 0.0 {
                k += 1;
            }
        }
        assert_eq!(estimate_ip(&c, n, 3).value, k as f64 / n as f64);
    }

    fn secrecy(s: &SnrDraw) -> f64 {
        let a = (1.0 + s.r) / (1.0 + s.e1);
        let b = (1.0 + s.r) / (1.0 + s.e2);
        let d = (1.0 + s.d) / (1.0 + s.e2);
        a.min(b).min(d).log2()
    }

    #[test]
    fn events_sum_to_complement() {
        let c = NetworkConfig::defaults(true);
        let e = estimate_event_probs(&c, 20_000, 5);
        let ip = estimate_ip(&c, 20_000, 5);
        assert_eq!(e.counts.iter().sum::<u64>() + (ip.value * 20_000.0).round() as u64, 20_000);
    }

    #[test]
    fn jammer_off_ignores_jammer_draws() {
        let c = NetworkConfig::defaults(false);
        let mut r = base_rng(1);
        let g = draw_gains(&c, &mut r);
        let g2 = GainDraw { g_sje1: 123.0, g_sjp: 0.001, ..g };
        assert_eq!(snrs(&c.power, &g), snrs(&c.power, &g2));
    }
}
