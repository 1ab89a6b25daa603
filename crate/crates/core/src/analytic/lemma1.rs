//! Nested-quadrature intercept probability and the conditional CDFs it is built from.

use super::interp::MonotoneCubic;
use super::AnalyticError;
use crate::channels::{gg_snr_ccdf, gg_snr_pdf, sr_cdf, sr_pdf, sr_ccdf};
use crate::config::NetworkConfig;
use crate::montecarlo::{EvalPath, IPEstimate};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{factorial, upper_incomplete_gamma_int};

/// Source power scale given the interference gain u.
pub fn source_scale(cfg: &NetworkConfig, u: f64) -> f64 {
    if u <= cfg.sigma_s() {
        cfg.power.gs
    } else {
        cfg.power.gi / u
    }
}

pub fn cond_cdf_gamma_r(cfg: &NetworkConfig, y: f64, u: f64) -> f64 {
    sr_cdf(&cfg.sr, y / source_scale(cfg, u))
}

/// CDF of the jammer's received power U = Omega'(v) g_SJE1 at the first eavesdropper.
pub fn jammer_power_cdf(cfg: &NetworkConfig, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let lam = cfg.sjp.lambda;
    let sigma = cfg.sigma_sj();
    let gi = cfg.power.gi;
    let j = cfg.sje1.coefficients();
    let beyond = (-lam * sigma).exp();
    let mut tail = 0.0;
    let b = j.upsilon * t / gi;
    for (n, &phi) in j.phi.iter().enumerate() {
        let mut inner = 0.0;
        for k in 0..=n {
            let w = (lam + b) * sigma;
            let lnv = k as f64 * b.ln() - (k as f64 + 1.0) * (lam + b).ln();
            inner += lam * lnv.exp() * upper_incomplete_gamma_int(k as u32 + 1, w) / factorial(k);
        }
        tail += j.scale * phi * factorial(n) / j.upsilon.powi(n as i32 + 1) * inner;
    }
    let capped = -(-lam * sigma).exp_m1() * sr_cdf(&cfg.sje1, t / cfg.power.gsj);
    (capped + beyond - tail).clamp(0.0, 1.0)
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-11, rel_tol: 1e-9, max_depth: 50 }
}

/// F_{gamma_E1 | g_SP}(y) depends on y and u only through x = y / Omega(u).
pub fn eve1_cdf_scaled(cfg: &NetworkConfig, x: f64, jammer_on: bool) -> Result<f64, AnalyticError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if !jammer_on {
        return Ok(sr_cdf(&cfg.se1, x));
    }
    // 1 - x int_0^inf f(x(1+t)) F_U(t) dt with w = x(1+t), written without cancellation
    let extra = integrate(|w| sr_pdf(&cfg.se1, w) * (1.0 - jammer_power_cdf(cfg, w / x - 1.0)), x, f64::INFINITY, &quad_opts())?;
    Ok((sr_cdf(&cfg.se1, x) + extra.value).clamp(0.0, 1.0))
}

pub fn cond_cdf_gamma_e1(cfg: &NetworkConfig, y: f64, u: f64, jammer_on: bool) -> Result<f64, AnalyticError> {
    eve1_cdf_scaled(cfg, y / source_scale(cfg, u), jammer_on)
}

/// Log-spaced grid from lo to hi with about `per_decade` points per decade.
fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let n = (((hi / lo).log10() * per_decade as f64).ceil() as usize).max(2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
}

/// Upper end beyond which a tail function stays below `eps`.
fn tail_end(start: f64, eps: f64, ccdf: impl Fn(f64) -> f64) -> f64 {
    let mut x = start.max(1e-300);
    while ccdf(x) > eps && x < 1e300 {
        x *= 2.0;
    }
    x
}

/// J2(y) = P(gamma_E2 < min(y, gamma_D)) tabulated in log y.
struct SecondHop {
    lo: f64,
    hi: f64,
    table: MonotoneCubic,
}

impl SecondHop {
    fn new(cfg: &NetworkConfig, lo: f64) -> Result<Self, AnalyticError> {
        let f = |z: f64| -> Result<f64, AnalyticError> {
            Ok(gg_snr_pdf(&cfg.e2, z)? * gg_snr_ccdf(&cfg.d, z)?)
        };
        let hi = tail_end(cfg.e2.mu, 1e-13, |z| gg_snr_ccdf(&cfg.e2, z).unwrap_or(0.0));
        let grid = log_grid(lo, hi.max(lo * 2.0), 24);
        let integ = |a: f64, b: f64| -> Result<f64, AnalyticError> {
            let mut err = None;
            let v = integrate(
                |z| match f(z) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        0.0
                    }
                },
                a,
                b,
                &quad_opts(),
            )?;
            match err {
                Some(e) => Err(e),
                None => Ok(v.value),
            }
        };
        let mut ys = Vec::with_capacity(grid.len());
        let mut acc = integ(0.0, grid[0])?;
        ys.push(acc);
        for w in grid.windows(2) {
            acc += integ(w[0], w[1])?;
            ys.push(acc);
        }
        let xs: Vec<f64> = grid.iter().map(|g| g.ln()).collect();
        Ok(SecondHop { lo: grid[0], hi: *grid.last().unwrap(), table: MonotoneCubic::new(xs, ys) })
    }

    fn eval(&self, y: f64) -> f64 {
        self.table.eval(y.clamp(self.lo, self.hi).ln())
    }
}

/// F_{gamma_E1}(x) tabulated in log x, or the closed law without the jammer.
enum Eve1Table {
    Plain,
    Table { lo: f64, hi: f64, t: MonotoneCubic },
}

impl Eve1Table {
    fn new(cfg: &NetworkConfig, lo: f64, hi: f64) -> Result<Self, AnalyticError> {
        if !cfg.power.jammer_on {
            return Ok(Eve1Table::Plain);
        }
        let grid = log_grid(lo, hi, 40);
        let ys = grid.iter().map(|&x| eve1_cdf_scaled(cfg, x, true)).collect::<Result<Vec<_>, _>>()?;
        let xs = grid.iter().map(|g| g.ln()).collect();
        Ok(Eve1Table::Table { lo, hi, t: MonotoneCubic::new(xs, ys) })
    }

    fn eval(&self, cfg: &NetworkConfig, x: f64) -> f64 {
        match self {
            Eve1Table::Plain => sr_cdf(&cfg.se1, x),
            Eve1Table::Table { lo, hi, t } => {
                if x < *lo {
                    // below the table the cdf is linear in x
                    t.eval(lo.ln()) * x / lo
                } else {
                    t.eval(x.min(*hi).ln())
                }
            }
        }
    }
}

/// IP = 1 - E_u[ int_{gamma_th}^inf f_{gamma_R|u}(y) F_{gamma_E1|u}(y) J2(y) dy ].
pub fn ip_lemma1(cfg: &NetworkConfig) -> Result<IPEstimate, AnalyticError> {
    cfg.validate().map_err(AnalyticError::Config)?;
    let gth = cfg.power.gth;
    let x_hi = tail_end(1.0, 1e-15, |x| sr_ccdf(&cfg.sr, x));
    let x_lo = gth / cfg.power.gs;
    let hop2 = SecondHop::new(cfg, gth)?;
    let eve = Eve1Table::new(cfg, x_lo, x_hi)?;
    let opts = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-8, max_depth: 50 };

    // inner integral in x = y / Omega
    let r1 = |om: f64| -> Result<f64, AnalyticError> {
        let c = gth / om;
        if c >= x_hi {
            return Ok(0.0);
        }
        let v = integrate(|x| sr_pdf(&cfg.sr, x) * eve.eval(cfg, x) * hop2.eval(om * x), c, x_hi, &opts)?;
        Ok(v.value)
    };
    let lam = cfg.sp.lambda;
    let sigma = cfg.sigma_s();
    let capped = -(-lam * sigma).exp_m1() * r1(cfg.power.gs)?;
    let mut err = None;
    let outer = integrate(
        |u| match r1(cfg.power.gi / u) {
            Ok(v) => lam * (-lam * u).exp() * v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        sigma,
        f64::INFINITY,
        &opts,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let raw = 1.0 - capped - outer.value;
    super::closed::finish(raw, outer.error + 1e-6, EvalPath::Lemma1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{rayleigh_gain_sample, sr_sample};
    use crate::config::db_to_linear;
    use crate::system::underlay_power;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn within(emp: f64, exact: f64, n: usize) -> bool {
        let sd = (exact * (1.0 - exact) / n as f64).sqrt().max(1.0 / n as f64);
        (emp - exact).abs() <= 4.0 * sd
    }

    #[test]
    fn jammer_power_cdf_matches_draws() {
        let cfg = NetworkConfig::defaults(true);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 200_000;
        let u: Vec<f64> = (0..n)
            .map(|_| {
                let g_sjp = rayleigh_gain_sample(&cfg.sjp, &mut rng);
                underlay_power(cfg.power.gsj, cfg.power.gi, g_sjp) * sr_sample(&cfg.sje1, &mut rng)
            })
            .collect();
        assert_eq!(jammer_power_cdf(&cfg, 0.0), 0.0);
        let mut last = 0.0;
        for &t in &[0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0] {
            let f = jammer_power_cdf(&cfg, t);
            assert!(f >= last);
            last = f;
            let emp = u.iter().filter(|&&v| v <= t).count() as f64 / n as f64;
            assert!(within(emp, f, n), "t = {t}: {emp} vs {f}");
        }
        assert!(jammer_power_cdf(&cfg, 1e9) > 1.0 - 1e-6);
    }

    #[test]
    fn eve1_cdf_matches_draws() {
        let cfg = NetworkConfig::defaults(true);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let n = 200_000;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let g_sjp = rayleigh_gain_sample(&cfg.sjp, &mut rng);
                let u = underlay_power(cfg.power.gsj, cfg.power.gi, g_sjp) * sr_sample(&cfg.sje1, &mut rng);
                sr_sample(&cfg.se1, &mut rng) / (1.0 + u)
            })
            .collect();
        for &t in &[0.01, 0.1, 0.5, 2.0, 8.0] {
            let f = eve1_cdf_scaled(&cfg, t, true).unwrap();
            let emp = x.iter().filter(|&&v| v <= t).count() as f64 / n as f64;
            assert!(within(emp, f, n), "x = {t}: {emp} vs {f}");
        }
    }

    #[test]
    fn conditional_cdfs_switch_at_sigma() {
        let cfg = NetworkConfig::defaults(true);
        let s = cfg.sigma_s();
        let below = cond_cdf_gamma_r(&cfg, 5e5, s * (1.0 - 1e-12));
        let at = cond_cdf_gamma_r(&cfg, 5e5, s * (1.0 + 1e-12));
        assert!((below - at).abs() < 1e-9);
        assert_eq!(cond_cdf_gamma_r(&cfg, 0.0, 0.3), 0.0);
        assert_eq!(cond_cdf_gamma_e1(&cfg, 0.0, 0.3, true).unwrap(), 0.0);
        let mut last = 0.0;
        for k in 0..40 {
            let y = 10f64.powf(-2.0 + 0.25 * k as f64);
            let f = cond_cdf_gamma_e1(&cfg, y, 2.0, true).unwrap();
            assert!((0.0..=1.0).contains(&f) && f >= last - 1e-12);
            last = f;
        }
    }

    #[test]
    fn weak_jammer_recovers_plain_value() {
        let mut cfg = NetworkConfig::defaults(true);
        cfg.power.gsj = db_to_linear(-60.0);
        let weak = ip_lemma1(&cfg).unwrap().value;
        let off = ip_lemma1(&cfg.with_jammer(false)).unwrap().value;
        assert!((weak - off).abs() < 1e-4, "{weak} vs {off}");
    }

    #[test]
    fn unreachable_threshold_intercepts_everything() {
        let mut cfg = NetworkConfig::defaults(true);
        cfg.power.gth *= 1e6;
        let v = ip_lemma1(&cfg).unwrap().value;
        assert!((v - 1.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn threshold_raises_ip() {
        let mut last = 0.0;
        for db in [-5.0, 2.0, 20.0, 40.0] {
            let mut cfg = NetworkConfig::defaults(false);
            cfg.power.gth = db_to_linear(db);
            let v = ip_lemma1(&cfg).unwrap().value;
            assert!(v >= last - 1e-6 && v <= 1.0 + 1e-6, "{db} dB: {v}");
            last = v;
        }
    }
}
