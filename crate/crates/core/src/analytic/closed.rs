//! Closed-form intercept probability from the truncated Mellin moments of gamma_R.
//!
//! IP = 1 - E[1{A} F_E2(gamma_R)] + E[1{A} int_0^gamma_R f_E2 F_D], where A is the
//! non-intercept event on the first hop. The first expectation is a single line integral in
//! nu; the second is either the small-argument residue series of F_D, each term a line
//! integral, or a double line integral when that series converges too slowly.

use num_complex::Complex64 as C;
use rayon::prelude::*;

use super::moments::{moments, Eve1Mode};
use super::AnalyticError;
use crate::channels::OpticalLinkParams;
use crate::config::NetworkConfig;
use crate::montecarlo::{EvalPath, IPEstimate};
use crate::specfun::{factorial, gamma, log_gamma};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SecondHopPath {
    Auto,
    Series,
    Double,
}

#[derive(Clone, Debug)]
pub struct ClosedOptions {
    /// step and half-width of the nu line
    pub h: f64,
    pub y_max: f64,
    /// step and half-width of the jammer line
    pub jammer_h: f64,
    pub jammer_y_max: f64,
    pub max_terms: usize,
    pub rel_tol: f64,
    pub second_hop: SecondHopPath,
}

impl Default for ClosedOptions {
    fn default() -> Self {
        ClosedOptions {
            h: 0.05,
            y_max: 14.0,
            jammer_h: 0.1,
            jammer_y_max: 12.0,
            max_terms: 200,
            rel_tol: 1e-12,
            second_hop: SecondHopPath::Auto,
        }
    }
}

/// Ratio of successive terms of the destination residue series, roughly.
fn series_ratio(cfg: &NetworkConfig) -> f64 {
    cfg.e2.mu / cfg.d.mu
}

struct Line {
    delta: f64,
    h: f64,
    nus: Vec<C>,
}

impl Line {
    fn new(delta: f64, h: f64, y_max: f64) -> Self {
        let n = (y_max / h).ceil() as usize;
        // keep an even count so every other node forms the coarse rule
        let n = n + n % 2;
        Line { delta, h, nus: (0..=n).map(|k| C::new(delta, k as f64 * h)).collect() }
    }

    /// (1/pi) Re sum of a conjugate-symmetric integrand over y >= 0, on the full and
    /// the doubled step.
    fn half_line(&self, f: impl Fn(usize) -> C) -> (f64, f64) {
        let mut fine = 0.0;
        let mut coarse = 0.0;
        for k in 0..self.nus.len() {
            let w = if k == 0 { 0.5 } else { 1.0 };
            let v = f(k).re * w;
            fine += v;
            if k % 2 == 0 {
                coarse += v;
            }
        }
        (fine * self.h / std::f64::consts::PI, coarse * 2.0 * self.h / std::f64::consts::PI)
    }
}

fn lg(z: C) -> Result<C, AnalyticError> {
    Ok(log_gamma(z)?)
}

/// Gamma(alpha + s) Gamma(beta + s) / (xi^2 + s), in logs.
fn ln_g(p: &OpticalLinkParams, s: C) -> Result<C, AnalyticError> {
    Ok(lg(s + p.alpha)? + lg(s + p.beta)? - (s + p.xi2()).ln())
}

fn q(p: &OpticalLinkParams) -> f64 {
    p.upsilon() / p.mu
}

pub(crate) fn check_closed_config(cfg: &NetworkConfig) -> Result<(), AnalyticError> {
    cfg.validate().map_err(AnalyticError::Config)?;
    if cfg.d.r != 1 || cfg.e2.r != 1 {
        return Err(AnalyticError::Config("closed form needs heterodyne detection (r = 1) on both optical links".into()));
    }
    Ok(())
}

/// IP from moments on the line Re nu = delta.
pub(crate) fn ip_from_moments(
    cfg: &NetworkConfig,
    mode: Eve1Mode,
    opts: &ClosedOptions,
) -> Result<(f64, f64, SecondHopPath), AnalyticError> {
    let (d, e) = (&cfg.d, &cfg.e2);
    let min_e = e.xi2().min(e.alpha).min(e.beta);
    let min_d = d.xi2().min(d.alpha).min(d.beta);
    let delta = 0.5 * min_e.min(min_d);
    let line = Line::new(delta, opts.h, opts.y_max);
    let m = moments(cfg, &line.nus, mode)?;
    let qe = q(e);

    // E[1{A} F_E2(gamma_R)] / O_E
    let f_e: Vec<C> = line
        .nus
        .iter()
        .zip(&m)
        .map(|(&nu, &mv)| Ok((ln_g(e, -nu)? + nu * qe.ln()).exp() / nu * mv))
        .collect::<Result<_, AnalyticError>>()?;
    let (first, first_c) = line.half_line(|k| f_e[k]);

    let (path, (second, second_c)) = match opts.second_hop {
        SecondHopPath::Series => (SecondHopPath::Series, residue_series(cfg, &line, &m, opts)?),
        SecondHopPath::Double => (SecondHopPath::Double, double_line(cfg, &line, &m, opts)?),
        // the ratio is only a hint; a series that does not settle hands over to the double line
        SecondHopPath::Auto => match (series_ratio(cfg) < 0.2).then(|| residue_series(cfg, &line, &m, opts)) {
            Some(Ok(v)) => (SecondHopPath::Series, v),
            Some(Err(AnalyticError::Truncation(_))) | None => (SecondHopPath::Double, double_line(cfg, &line, &m, opts)?),
            Some(Err(e)) => return Err(e),
        },
    };
    let oe = e.o_coef();
    let th = cfg.theta();
    let raw = 1.0 - oe * first + th * second;
    let raw_c = 1.0 - oe * first_c + th * second_c;
    Ok((raw, (raw - raw_c).abs(), path))
}

/// D^(tau) = q_D^tau E[1{A} int_0^gamma_R f_E2(z) z^tau dz] / O_E, fine and coarse.
fn d_tau(cfg: &NetworkConfig, line: &Line, m: &[C], tau: f64) -> Result<(f64, f64), AnalyticError> {
    let e = &cfg.e2;
    let (qe, qd) = (q(e), q(&cfg.d));
    let vals: Vec<C> = line
        .nus
        .iter()
        .zip(m)
        .map(|(&nu, &mv)| {
            let s = C::new(tau, 0.0) - nu;
            Ok((ln_g(e, s)? - s * qe.ln() + tau * qd.ln()).exp() / nu * mv)
        })
        .collect::<Result<_, AnalyticError>>()?;
    Ok(line.half_line(|k| vals[k]))
}

fn residue_series(cfg: &NetworkConfig, line: &Line, m: &[C], opts: &ClosedOptions) -> Result<(f64, f64), AnalyticError> {
    let d = &cfg.d;
    let (a, b, x2) = (d.alpha, d.beta, d.xi2());
    let lead = gamma(a - x2) * gamma(b - x2) / x2;
    let (v, vc) = d_tau(cfg, line, m, x2)?;
    let mut sum = lead * v;
    let mut sum_c = lead * vc;
    let coef = |x: f64, y: f64, k: usize| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * gamma(x - y - k as f64) / (factorial(k) * (x2 - y - k as f64) * (y + k as f64))
    };
    let mut small = 0;
    for k in 0..opts.max_terms {
        let (da, dac) = d_tau(cfg, line, m, a + k as f64)?;
        let (db, dbc) = d_tau(cfg, line, m, b + k as f64)?;
        let (ca, cb) = (coef(b, a, k), coef(a, b, k));
        let t = ca * da + cb * db;
        sum += t;
        sum_c += ca * dac + cb * dbc;
        if !t.is_finite() {
            break;
        }
        if t.abs() <= opts.rel_tol * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok((sum, sum_c));
            }
        } else {
            small = 0;
        }
    }
    Err(AnalyticError::Truncation(format!(
        "destination residue series did not settle within {} terms",
        opts.max_terms
    )))
}

fn double_line(cfg: &NetworkConfig, line: &Line, m: &[C], opts: &ClosedOptions) -> Result<(f64, f64), AnalyticError> {
    let (d, e) = (&cfg.d, &cfg.e2);
    let (lqe, lqd) = (q(e).ln(), q(d).ln());
    let re_s = -0.5 * line.delta;
    let na = (opts.y_max / line.h).ceil() as i64;
    let rows: Vec<(C, C)> = (0..line.nus.len())
        .into_par_iter()
        .map(|k| {
            let nu = line.nus[k];
            let mut acc = C::new(0.0, 0.0);
            let mut acc_c = C::new(0.0, 0.0);
            for i in -na..=na {
                let s = C::new(re_s, i as f64 * line.h);
                let t = -nu - s;
                let v = (ln_g(e, s)? + ln_g(d, t)? - s * lqe - t * lqd).exp() / (-t);
                acc += v;
                if i % 2 == 0 {
                    acc_c += v;
                }
            }
            Ok((acc * m[k] / nu, acc_c * 2.0 * m[k] / nu))
        })
        .collect::<Result<_, AnalyticError>>()?;
    // the inner a-sum still needs its step and the 1/(2 pi) of the second line
    let scale = line.h / (2.0 * std::f64::consts::PI);
    let (fine, _) = line.half_line(|k| rows[k].0);
    let (_, coarse) = line.half_line(|k| rows[k].1);
    Ok((fine * scale, coarse * scale))
}

pub fn ip_closed_form(cfg: &NetworkConfig) -> Result<IPEstimate, AnalyticError> {
    ip_closed_form_with(cfg, &ClosedOptions::default())
}

pub fn ip_closed_form_with(cfg: &NetworkConfig, opts: &ClosedOptions) -> Result<IPEstimate, AnalyticError> {
    check_closed_config(cfg)?;
    let mode = if cfg.power.jammer_on {
        Eve1Mode::Jammer { h: opts.jammer_h, y_max: opts.jammer_y_max }
    } else {
        Eve1Mode::NoJammer
    };
    let (raw, err, _) = ip_from_moments(cfg, mode, opts)?;
    finish(raw, err, EvalPath::Closed)
}

pub(crate) fn finish(raw: f64, err: f64, path: EvalPath) -> Result<IPEstimate, AnalyticError> {
    if !raw.is_finite() {
        return Err(AnalyticError::OutOfRange(raw));
    }
    if raw < -5e-3 || raw > 1.0 + 5e-3 {
        return Err(AnalyticError::OutOfRange(raw));
    }
    Ok(IPEstimate::analytic(raw, err, path))
}

/// Large-interference-budget approximation: only the first residue of the jammer integral.
pub fn ip_asymptotic(cfg: &NetworkConfig) -> Result<IPEstimate, AnalyticError> {
    ip_asymptotic_with(cfg, &ClosedOptions::default())
}

pub fn ip_asymptotic_with(cfg: &NetworkConfig, opts: &ClosedOptions) -> Result<IPEstimate, AnalyticError> {
    if !cfg.power.jammer_on {
        return Err(AnalyticError::Mode(
            "the approximation exists only with the jammer active; without it the IP has no large-budget limit".into(),
        ));
    }
    check_closed_config(cfg)?;
    let (raw, err, _) = ip_from_moments(cfg, Eve1Mode::FirstResidue, opts)?;
    finish(raw, err, EvalPath::Asymptotic)
}
