//! Truncated Mellin moments M(nu) = E[gamma_R^nu ; gamma_R > gamma_th, gamma_R > gamma_E1]
//! on a vertical line in nu, for the three modes of the first eavesdropper.

use num_complex::Complex64 as C;
use rayon::prelude::*;

use crate::config::NetworkConfig;
use crate::specfun::{
    binomial, factorial, gamma_c, lower_incomplete_gamma_c, upper_incomplete_gamma, SpecError,
};

const MAX_TERMS: usize = 4000;

/// Power-cap average over the exponential interference gain u of the source.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CapAverage {
    lam: f64,
    peak: f64,
    gi: f64,
    gth: f64,
}

/// Quantities that depend on nu only.
#[derive(Clone, Copy, Debug)]
pub(crate) struct NuPoint {
    pub nu: C,
    peak_pow: C,
    gi_pow: C,
    lam_pow: C,
    upper: C,
    lower: C,
}

impl CapAverage {
    pub fn source(cfg: &NetworkConfig) -> Self {
        CapAverage { lam: cfg.sp.lambda, peak: cfg.power.gs, gi: cfg.power.gi, gth: cfg.power.gth }
    }

    fn sigma(&self) -> f64 {
        self.gi / self.peak
    }

    pub fn at(&self, nu: C) -> Result<NuPoint, SpecError> {
        let x = self.lam * self.sigma();
        let one = C::new(1.0, 0.0);
        Ok(NuPoint {
            nu,
            peak_pow: (nu * self.peak.ln()).exp(),
            gi_pow: (nu * self.gi.ln()).exp(),
            lam_pow: ((nu - 1.0) * self.lam.ln()).exp(),
            upper: upper_incomplete_gamma(one - nu, x)?,
            lower: lower_incomplete_gamma_c(one - nu, x)?,
        })
    }

    /// E_u[Omega(u)^nu Gamma(nu + d, rate gth / Omega(u))] with Omega(u) = min(peak, gi / u).
    pub fn eval(&self, p: &NuPoint, d: C, rate: f64) -> Result<C, SpecError> {
        let a = p.nu + d;
        let sigma = self.sigma();
        let capped = -(-self.lam * sigma).exp_m1();
        let first = capped * p.peak_pow * upper_incomplete_gamma(a, rate * self.gth / self.peak)?;
        let kappa = rate * self.gth / self.gi;
        let tail = self.tail(p, d, kappa)?;
        Ok(first + self.lam * p.gi_pow * tail)
    }

    /// int_sigma^inf e^{-lam u} u^{-nu} Gamma(nu + d, kappa u) du
    fn tail(&self, p: &NuPoint, d: C, kappa: f64) -> Result<C, SpecError> {
        let r = kappa / self.lam;
        if r < 0.5 {
            self.tail_small(p, d, kappa)
        } else if r > 2.0 {
            self.tail_large(p, d, kappa)
        } else {
            self.tail_mid(p, d, kappa)
        }
    }

    // expand Gamma(a, kappa u) around u = 0
    fn tail_small(&self, p: &NuPoint, d: C, kappa: f64) -> Result<C, SpecError> {
        let a = p.nu + d;
        let x = self.lam * self.sigma();
        let lr = (kappa / self.lam).ln();
        let lead = gamma_c(a) * p.upper;
        let mut g = upper_incomplete_gamma(d + 1.0, x)?;
        let mut sum = C::new(0.0, 0.0);
        let mut jf = 1.0;
        let mut small = 0;
        for j in 0..MAX_TERMS {
            if j > 0 {
                jf *= j as f64;
                g = upward(g, d + j as f64, x);
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * ((a + j as f64) * lr).exp() * g / (jf * (a + j as f64));
            sum += term;
            if term.norm() <= 1e-17 * (sum.norm() + lead.norm()) {
                small += 1;
                if small >= 2 {
                    return Ok(p.lam_pow * (lead - sum));
                }
            } else {
                small = 0;
            }
            if !jf.is_finite() {
                break;
            }
        }
        Err(SpecError::NoConvergence("small-ratio cap average series".into()))
    }

    // expand the inner u-integral after swapping the order
    fn tail_large(&self, p: &NuPoint, d: C, kappa: f64) -> Result<C, SpecError> {
        let a = p.nu + d;
        let sigma = self.sigma();
        let x = kappa * sigma;
        let one = C::new(1.0, 0.0);
        let lead = -p.lower * upper_incomplete_gamma(a, x)?;
        let lr = (self.lam / kappa).ln();
        let mut g = upper_incomplete_gamma(d + 1.0, x)?;
        let mut sum = C::new(0.0, 0.0);
        let mut jf = 1.0;
        let mut small = 0;
        for j in 0..MAX_TERMS {
            if j > 0 {
                jf *= j as f64;
                g = upward(g, d + j as f64, x);
            }
            let e = one - p.nu + j as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * (e * lr).exp() * g / (jf * e);
            sum += term;
            if term.norm() <= 1e-17 * (sum.norm() + lead.norm()) {
                small += 1;
                if small >= 2 {
                    return Ok(p.lam_pow * (lead + sum));
                }
            } else {
                small = 0;
            }
            if !jf.is_finite() {
                break;
            }
        }
        Err(SpecError::NoConvergence("large-ratio cap average series".into()))
    }

    // full half-line integral in closed form minus the piece on [0, sigma]
    fn tail_mid(&self, p: &NuPoint, d: C, kappa: f64) -> Result<C, SpecError> {
        let a = p.nu + d;
        let lam = self.lam;
        let one = C::new(1.0, 0.0);
        let z = lam / (kappa + lam);
        let b = d + 1.0;
        let c = 2.0 - p.nu;
        let mut term = one;
        let mut f21 = one;
        for k in 0..MAX_TERMS {
            term *= (b + k as f64) / (c + k as f64) * z;
            f21 += term;
            if term.norm() <= 1e-17 * f21.norm() {
                break;
            }
            if k + 1 == MAX_TERMS {
                return Err(SpecError::NoConvergence("2F1 in cap average".into()));
            }
        }
        let full = (a * kappa.ln() - b * (kappa + lam).ln()).exp() * gamma_c(b) / (one - p.nu) * f21;

        let x = lam * self.sigma();
        if x == 0.0 {
            return Ok(full);
        }
        let mut part = gamma_c(a) * p.lam_pow * p.lower;
        let mut jf = 1.0;
        for j in 0..MAX_TERMS {
            if j > 0 {
                jf *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let e = d + 1.0 + j as f64;
            let t = sign * ((a + j as f64) * kappa.ln() - e * lam.ln()).exp() * lower_incomplete_gamma_c(e, x)?
                / (jf * (a + j as f64));
            part -= t;
            if t.norm() <= 1e-17 * part.norm().max(full.norm()) && j > 1 {
                return Ok(full - part);
            }
        }
        Err(SpecError::NoConvergence("near-origin cap average series".into()))
    }
}

/// Gamma(s + 1, x) from Gamma(s, x).
fn upward(g: C, s: C, x: f64) -> C {
    s * g + (s * x.ln() - x).exp()
}

/// E_v[Omega'(v)^s] for the jammer power cap, v exponential with the jammer gain rate.
pub(crate) fn jammer_cap_moment(cfg: &NetworkConfig, s: C) -> Result<C, SpecError> {
    let lam = cfg.sjp.lambda;
    let sigma = cfg.sigma_sj();
    let one = C::new(1.0, 0.0);
    let capped = -(-lam * sigma).exp_m1();
    Ok(capped * (s * cfg.power.gsj.ln()).exp()
        + (s * (cfg.power.gi * lam).ln()).exp() * upper_incomplete_gamma(one - s, lam * sigma)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eve1Mode {
    NoJammer,
    /// jammer integral on Re s' = -1/2 with step h and half-width y_max
    Jammer { h: f64, y_max: f64 },
    /// first residue of the jammer integral only
    FirstResidue,
}

/// Moments on the points `nus`; evaluated in parallel, collected in order.
pub(crate) fn moments(cfg: &NetworkConfig, nus: &[C], mode: Eve1Mode) -> Result<Vec<C>, SpecError> {
    let avg = CapAverage::source(cfg);
    let points: Vec<NuPoint> = nus.par_iter().map(|&nu| avg.at(nu)).collect::<Result<_, _>>()?;
    let relay = relay_moments(cfg, &avg, &points)?;
    let eve = match mode {
        Eve1Mode::NoJammer => no_jammer_part(cfg, &avg, &points)?,
        Eve1Mode::Jammer { h, y_max } => jammer_part(cfg, &avg, &points, h, y_max)?,
        Eve1Mode::FirstResidue => first_residue_part(cfg, &avg, &points)?,
    };
    Ok(relay.iter().zip(&eve).map(|(r, e)| r - e).collect())
}

// E[gamma_R^nu ; gamma_R > gamma_th]
fn relay_moments(cfg: &NetworkConfig, avg: &CapAverage, points: &[NuPoint]) -> Result<Vec<C>, SpecError> {
    let r = cfg.sr.coefficients();
    points
        .par_iter()
        .map(|p| {
            let mut acc = C::new(0.0, 0.0);
            for (n3, &phi) in r.phi.iter().enumerate() {
                let e = p.nu + (n3 + 1) as f64;
                acc += r.scale * phi * avg.eval(p, C::new((n3 + 1) as f64, 0.0), r.upsilon)? * (-e * r.upsilon.ln()).exp();
            }
            Ok(acc)
        })
        .collect()
}

fn no_jammer_part(cfg: &NetworkConfig, avg: &CapAverage, points: &[NuPoint]) -> Result<Vec<C>, SpecError> {
    let r = cfg.sr.coefficients();
    let e = cfg.se1.coefficients();
    let zeta = r.upsilon + e.upsilon;
    points
        .par_iter()
        .map(|p| {
            let mut acc = C::new(0.0, 0.0);
            for (n3, &phr) in r.phi.iter().enumerate() {
                for (n2, &phe) in e.phi.iter().enumerate() {
                    for j in 0..=n2 {
                        let c = e.scale * phe * factorial(n2) * e.upsilon.powi(j as i32 - n2 as i32 - 1) / factorial(j);
                        let o = (n3 + j + 1) as f64;
                        acc += r.scale * phr * c * avg.eval(p, C::new(o, 0.0), zeta)? * (-(p.nu + o) * zeta.ln()).exp();
                    }
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Weights of the jammer expansion grouped by o = n3 + n2 - p, each a function of (n1, p).
fn jammer_weights(cfg: &NetworkConfig) -> Vec<Vec<(usize, usize, f64)>> {
    let r = cfg.sr.coefficients();
    let e = cfg.se1.coefficients();
    let jm = cfg.sje1.coefficients();
    let omax = r.phi.len() + e.phi.len();
    let mut out = vec![Vec::new(); omax];
    for (n3, &phr) in r.phi.iter().enumerate() {
        for (n2, &phe) in e.phi.iter().enumerate() {
            for p in 0..=n2 {
                for (n1, &phj) in jm.phi.iter().enumerate() {
                    let w = r.scale * phr * e.scale * phe * binomial(n2, p) * jm.scale * phj
                        / jm.upsilon.powi(n1 as i32 + 1)
                        / e.upsilon.powi(p as i32 + 1);
                    out[n3 + n2 - p].push((n1, p, w));
                }
            }
        }
    }
    out
}

fn jammer_part(cfg: &NetworkConfig, avg: &CapAverage, points: &[NuPoint], h: f64, y_max: f64) -> Result<Vec<C>, SpecError> {
    let r = cfg.sr.coefficients();
    let e = cfg.se1.coefficients();
    let jm = cfg.sje1.coefficients();
    let zeta = r.upsilon + e.upsilon;
    let groups = jammer_weights(cfg);
    let n = (y_max / h).ceil() as i64;
    let ratio = (jm.upsilon / e.upsilon).ln();
    // one column of contributions per node s' = -1/2 + i y'
    let columns: Vec<Vec<C>> = (-n..=n)
        .into_par_iter()
        .map(|i| -> Result<Vec<C>, SpecError> {
            let s = C::new(-0.5, i as f64 * h);
            let v = jammer_cap_moment(cfg, s)?;
            let common = v * (-s * ratio).exp() / (-s);
            let q: Vec<C> = groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|&(n1, p, w)| w * gamma_c(s + (n1 + 1) as f64) * gamma_c(1.0 + p as f64 - s))
                        .sum::<C>()
                        * common
                })
                .collect();
            points
                .iter()
                .map(|pt| {
                    let mut acc = C::new(0.0, 0.0);
                    for (o, qo) in q.iter().enumerate() {
                        if qo.norm() == 0.0 {
                            continue;
                        }
                        let d = s + (o + 1) as f64;
                        acc += qo * avg.eval(pt, d, zeta)? * (-(pt.nu + d) * zeta.ln()).exp();
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let mut out = vec![C::new(0.0, 0.0); points.len()];
    for col in &columns {
        for (o, c) in out.iter_mut().zip(col) {
            *o += c;
        }
    }
    let scale = h / (2.0 * std::f64::consts::PI);
    Ok(out.into_iter().map(|v| v * scale).collect())
}

fn first_residue_part(cfg: &NetworkConfig, avg: &CapAverage, points: &[NuPoint]) -> Result<Vec<C>, SpecError> {
    let r = cfg.sr.coefficients();
    let e = cfg.se1.coefficients();
    let jm = cfg.sje1.coefficients();
    let zeta = r.upsilon + e.upsilon;
    let groups = jammer_weights(cfg);
    let v = jammer_cap_moment(cfg, C::new(-1.0, 0.0))?;
    let common = v * jm.upsilon / e.upsilon;
    let q: Vec<C> = groups
        .iter()
        .map(|g| g.iter().filter(|t| t.0 == 0).map(|&(_, p, w)| w * factorial(p + 1)).sum::<f64>() * common)
        .collect();
    points
        .par_iter()
        .map(|pt| {
            let mut acc = C::new(0.0, 0.0);
            for (o, qo) in q.iter().enumerate() {
                if qo.norm() == 0.0 {
                    continue;
                }
                let d = C::new(o as f64, 0.0);
                acc += qo * avg.eval(pt, d, zeta)? * (-(pt.nu + d) * zeta.ln()).exp();
            }
            Ok(acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};

    // direct quadrature of E_u[Omega^nu Gamma(nu + d, rate gth / Omega)]
    fn oracle(cfg: &NetworkConfig, nu: C, d: C, rate: f64) -> C {
        let pc = cfg.power;
        let lam = cfg.sp.lambda;
        let sigma = pc.gi / pc.gs;
        let f = |u: f64| {
            let om = if u <= sigma { pc.gs } else { pc.gi / u };
            lam * (-lam * u).exp() * (nu * om.ln()).exp() * upper_incomplete_gamma(nu + d, rate * pc.gth / om).unwrap()
        };
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-11, max_depth: 60 };
        let part = |a: f64, b: f64| {
            let re = integrate(|u| f(u).re, a, b, &opts).unwrap().value;
            let im = integrate(|u| f(u).im, a, b, &opts).unwrap().value;
            C::new(re, im)
        };
        part(0.0, sigma) + part(sigma, f64::INFINITY)
    }

    #[test]
    fn cap_average_matches_quadrature_on_all_branches() {
        let mut cfg = NetworkConfig::defaults(true);
        // raise the peak power cap level so the near-origin piece matters
        cfg.power.gs = 30.0;
        let avg = CapAverage::source(&cfg);
        let cases = [
            (C::new(0.5, 0.0), C::new(1.0, 0.0)),
            (C::new(0.4, 3.0), C::new(2.0, 0.0)),
            (C::new(0.5, -7.0), C::new(1.5, 4.0)),
            (C::new(0.3, 1.0), C::new(0.5, -2.0)),
        ];
        // kappa / lam around 0.06, 1 and 4
        for rate in [0.24 * cfg.power.gi / cfg.power.gth * 0.2, 0.8 * cfg.power.gi / cfg.power.gth, 3.2 * cfg.power.gi / cfg.power.gth] {
            for (nu, d) in cases {
                let p = avg.at(nu).unwrap();
                let v = avg.eval(&p, d, rate).unwrap();
                let o = oracle(&cfg, nu, d, rate);
                assert!((v - o).norm() <= 1e-8 * o.norm().max(1e-12), "rate {rate} nu {nu} d {d}: {v} vs {o}");
            }
        }
    }

    #[test]
    fn jammer_cap_moment_matches_quadrature() {
        let cfg = NetworkConfig::defaults(true);
        let lam = cfg.sjp.lambda;
        let sigma = cfg.sigma_sj();
        for s in [C::new(-1.0, 0.0), C::new(-0.5, 2.0), C::new(-0.5, -9.0)] {
            let f = |v: f64| {
                let om = if v <= sigma { cfg.power.gsj } else { cfg.power.gi / v };
                lam * (-lam * v).exp() * (s * om.ln()).exp()
            };
            let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-11, max_depth: 60 };
            let re = integrate(|v| f(v).re, 0.0, sigma, &opts).unwrap().value
                + integrate(|v| f(v).re, sigma, f64::INFINITY, &opts).unwrap().value;
            let im = integrate(|v| f(v).im, 0.0, sigma, &opts).unwrap().value
                + integrate(|v| f(v).im, sigma, f64::INFINITY, &opts).unwrap().value;
            let m = jammer_cap_moment(&cfg, s).unwrap();
            assert!((m - C::new(re, im)).norm() < 1e-9 * m.norm(), "{s}");
        }
    }
}
