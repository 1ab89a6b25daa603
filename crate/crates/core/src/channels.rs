//! Fading laws: exponential channel gains (Rayleigh links), shadowed-Rician gains for the
//! RF uplinks and the Gamma-Gamma SNR law with pointing error for the optical links.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::specfun::{
    factorial, gamma, lower_incomplete_gamma, meijer_g, upper_incomplete_gamma_int, GPath, MeijerGSpec, SpecError,
    TruncationPolicy,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowedRicianParams {
    pub b: f64,
    pub m: u32,
    pub omega: f64,
}

/// Coefficients of the finite-sum density Delta e^{-upsilon x} sum_n phi_n x^n.
#[derive(Clone, Debug, PartialEq)]
pub struct SrCoefficients {
    pub scale: f64,
    pub beta: f64,
    pub delta: f64,
    pub upsilon: f64,
    pub phi: Vec<f64>,
}

impl ShadowedRicianParams {
    pub fn new(b: f64, m: u32, omega: f64) -> Result<Self, String> {
        if !(b > 0.0) || !(omega > 0.0) || m < 1 {
            return Err(format!("shadowed-Rician parameters need b > 0, m >= 1, omega > 0 (got {b}, {m}, {omega})"));
        }
        let p = ShadowedRicianParams { b, m, omega };
        assert!(p.coefficients().upsilon > 0.0);
        Ok(p)
    }

    pub fn coefficients(&self) -> SrCoefficients {
        let (b, m, om) = (self.b, self.m as f64, self.omega);
        let scale = (1.0 / (2.0 * b)) * (2.0 * b * m / (2.0 * b * m + om)).powf(m);
        let beta = 1.0 / (2.0 * b);
        let delta = beta * om / (2.0 * b * m + om);
        let mm = self.m as usize;
        let phi = (0..mm)
            .map(|n| factorial(mm - 1) * delta.powi(n as i32) / (factorial(mm - 1 - n) * factorial(n).powi(2)))
            .collect();
        SrCoefficients { scale, beta, delta, upsilon: beta - delta, phi }
    }

    pub fn mean(&self) -> f64 {
        2.0 * self.b + self.omega
    }
}

pub fn sr_pdf(p: &ShadowedRicianParams, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let c = p.coefficients();
    let poly: f64 = c.phi.iter().enumerate().map(|(n, &f)| f * x.powi(n as i32)).sum();
    c.scale * (-c.upsilon * x).exp() * poly
}

/// Density through the confluent hypergeometric line Delta e^{-beta x} 1F1(m; 1; delta x).
pub fn sr_pdf_hypergeometric(p: &ShadowedRicianParams, x: f64) -> f64 {
    let c = p.coefficients();
    // direct power series of 1F1(m;1;z), independent of the finite rewriting
    let z = c.delta * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..10_000 {
        term *= (p.m as f64 + k as f64) * z / ((k + 1) as f64).powi(2);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    c.scale * (-c.beta * x).exp() * sum
}

pub fn sr_cdf(p: &ShadowedRicianParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let c = p.coefficients();
    let v: f64 = c
        .phi
        .iter()
        .enumerate()
        .map(|(n, &f)| f / c.upsilon.powi(n as i32 + 1) * lower_incomplete_gamma(n as u32 + 1, c.upsilon * x))
        .sum();
    (c.scale * v).clamp(0.0, 1.0)
}

/// 1 - cdf without cancellation in the tail.
pub fn sr_ccdf(p: &ShadowedRicianParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let c = p.coefficients();
    let v: f64 = c
        .phi
        .iter()
        .enumerate()
        .map(|(n, &f)| f / c.upsilon.powi(n as i32 + 1) * upper_incomplete_gamma_int(n as u32 + 1, c.upsilon * x))
        .sum();
    (c.scale * v).clamp(0.0, 1.0)
}

/// One gain draw |A e^{j theta} + w|^2 with Nakagami LOS amplitude and Gaussian scatter.
pub fn sr_sample<R: Rng + ?Sized>(p: &ShadowedRicianParams, rng: &mut R) -> f64 {
    let los_power = Gamma::new(p.m as f64, p.omega / p.m as f64).expect("valid gamma law").sample(rng);
    let amp = los_power.sqrt();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    let sd = p.b.sqrt();
    let xr: f64 = rng.sample(StandardNormal);
    let xi: f64 = rng.sample(StandardNormal);
    let re = amp * theta.cos() + sd * xr;
    let im = amp * theta.sin() + sd * xi;
    re * re + im * im
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighGainParams {
    pub lambda: f64,
}

impl RayleighGainParams {
    pub fn new(lambda: f64) -> Result<Self, String> {
        if !(lambda > 0.0) {
            return Err(format!("gain rate must be positive, got {lambda}"));
        }
        Ok(RayleighGainParams { lambda })
    }
}

pub fn rayleigh_gain_cdf(p: &RayleighGainParams, u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        -(-p.lambda * u).exp_m1()
    }
}

pub fn rayleigh_gain_pdf(p: &RayleighGainParams, u: f64) -> f64 {
    if u < 0.0 {
        0.0
    } else {
        p.lambda * (-p.lambda * u).exp()
    }
}

pub fn rayleigh_gain_sample<R: Rng + ?Sized>(p: &RayleighGainParams, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p() / p.lambda
}

/// Gamma-Gamma turbulence with pointing error; `mu` is the average electrical SNR (linear).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalLinkParams {
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    pub mu: f64,
    pub r: u32,
    /// Parameter nudges applied to keep every pole simple.
    #[serde(default)]
    pub perturbations: Vec<String>,
}

const DEGENERACY_STEP: f64 = 1e-6;

fn near_int(v: f64) -> bool {
    (v - v.round()).abs() < 1e-9
}

impl OpticalLinkParams {
    pub fn new(alpha: f64, beta: f64, xi: f64, mu: f64, r: u32) -> Result<Self, String> {
        if !(alpha > 0.0 && beta > 0.0 && xi > 0.0 && mu > 0.0) {
            return Err(format!("optical parameters must be positive (alpha={alpha}, beta={beta}, xi={xi}, mu={mu})"));
        }
        if r != 1 && r != 2 {
            return Err(format!("detection index r must be 1 or 2, got {r}"));
        }
        let mut p = OpticalLinkParams { alpha, beta, xi, mu, r, perturbations: vec![] };
        p.apply_perturbations();
        Ok(p)
    }

    fn apply_perturbations(&mut self) {
        for _ in 0..8 {
            let xi2 = self.xi * self.xi;
            if near_int(self.alpha - self.beta) {
                self.alpha += DEGENERACY_STEP;
                self.perturbations.push(format!("alpha -> {} (alpha - beta integer)", self.alpha));
            } else if near_int(xi2 - self.alpha) || near_int(xi2 - self.beta) {
                self.xi = (xi2 + DEGENERACY_STEP).sqrt();
                self.perturbations.push(format!("xi^2 -> {} (xi^2 - alpha or xi^2 - beta integer)", xi2 + DEGENERACY_STEP));
            } else {
                return;
            }
        }
    }

    pub fn xi2(&self) -> f64 {
        self.xi * self.xi
    }

    /// xi^2 / (Gamma(alpha) Gamma(beta))
    pub fn o_coef(&self) -> f64 {
        self.xi2() / (gamma(self.alpha) * gamma(self.beta))
    }

    /// xi^2 alpha beta / (xi^2 + 1)
    pub fn upsilon(&self) -> f64 {
        self.xi2() * self.alpha * self.beta / (self.xi2() + 1.0)
    }

    fn arg(&self, z: f64) -> f64 {
        self.upsilon() * (z / self.mu).powf(1.0 / self.r as f64)
    }

    pub fn pdf_spec(&self) -> MeijerGSpec {
        let x2 = self.xi2();
        MeijerGSpec::complete(3, 0, &[x2 + 1.0], &[x2, self.alpha, self.beta]).expect("valid spec")
    }

    pub fn cdf_spec(&self) -> MeijerGSpec {
        let x2 = self.xi2();
        MeijerGSpec::complete(3, 1, &[1.0, x2 + 1.0], &[x2, self.alpha, self.beta, 0.0]).expect("valid spec")
    }

    pub fn ccdf_spec(&self) -> MeijerGSpec {
        let x2 = self.xi2();
        MeijerGSpec::complete(4, 0, &[1.0, x2 + 1.0], &[0.0, x2, self.alpha, self.beta]).expect("valid spec")
    }
}

fn policy() -> TruncationPolicy {
    TruncationPolicy { max_terms: 400, ..TruncationPolicy::default() }
}

const CDF_SWITCH: f64 = 8.0;

pub fn gg_snr_pdf(p: &OpticalLinkParams, z: f64) -> Result<f64, SpecError> {
    if z <= 0.0 {
        return Ok(0.0);
    }
    let g = meijer_g(&p.pdf_spec(), p.arg(z), &policy())?;
    Ok((p.o_coef() / (p.r as f64 * z) * g.value).max(0.0))
}

pub fn gg_snr_cdf(p: &OpticalLinkParams, z: f64) -> Result<f64, SpecError> {
    if z <= 0.0 {
        return Ok(0.0);
    }
    let x = p.arg(z);
    if x < CDF_SWITCH {
        let g = meijer_g(&p.cdf_spec(), x, &policy())?;
        Ok((p.o_coef() * g.value).clamp(0.0, 1.0))
    } else {
        Ok(1.0 - gg_snr_ccdf(p, z)?)
    }
}

pub fn gg_snr_ccdf(p: &OpticalLinkParams, z: f64) -> Result<f64, SpecError> {
    if z <= 0.0 {
        return Ok(1.0);
    }
    let x = p.arg(z);
    if x < CDF_SWITCH {
        return Ok(1.0 - gg_snr_cdf(p, z)?);
    }
    let pol = TruncationPolicy { max_terms: 400, ..TruncationPolicy::contour() };
    let g = crate::specfun::meijer_g_path(&p.ccdf_spec(), x, &pol, GPath::Contour)?;
    Ok((p.o_coef() * g.value).clamp(0.0, 1.0))
}

/// gamma = mu (I_a I_p / E[I_a I_p])^r with Gamma-Gamma I_a and I_p = U^{1/xi^2}.
pub fn gg_snr_sample<R: Rng + ?Sized>(p: &OpticalLinkParams, rng: &mut R) -> f64 {
    let x = Gamma::new(p.alpha, 1.0 / p.alpha).expect("valid gamma law").sample(rng);
    let y = Gamma::new(p.beta, 1.0 / p.beta).expect("valid gamma law").sample(rng);
    let u: f64 = 1.0 - rng.random::<f64>();
    let xi2 = p.xi2();
    let ip = u.powf(1.0 / xi2) / (xi2 / (xi2 + 1.0));
    p.mu * (x * y * ip).powi(p.r as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table2_sr() -> ShadowedRicianParams {
        ShadowedRicianParams::new(1.4, 2, 3.0).unwrap()
    }

    fn table2_optical(mu_db: f64) -> OpticalLinkParams {
        OpticalLinkParams::new(6.1096, 1.0794, 1.1227, 10f64.powf(mu_db / 10.0), 1).unwrap()
    }

    #[test]
    fn sr_m1_is_exponential() {
        let p = ShadowedRicianParams::new(1.4, 1, 3.0).unwrap();
        assert!((sr_pdf(&p, 0.0) - 1.0 / 5.8).abs() < 1e-15);
        for &x in &[0.3, 2.0, 11.0] {
            assert!((sr_pdf(&p, x) - (-x / 5.8f64).exp() / 5.8).abs() < 1e-15);
        }
    }

    #[test]
    fn sr_forms_agree() {
        for m in [1u32, 2, 3, 5] {
            let p = ShadowedRicianParams::new(1.4, m, 3.0).unwrap();
            for i in 0..50 {
                let x = i as f64 * 0.7;
                let a = sr_pdf(&p, x);
                let b = sr_pdf_hypergeometric(&p, x);
                assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "m={m} x={x}");
            }
        }
    }

    #[test]
    fn sr_normalised_and_cdf_matches_integral() {
        let p = table2_sr();
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_depth: 50 };
        let total = integrate(|x| sr_pdf(&p, x), 0.0, f64::INFINITY, &opts).unwrap().value;
        assert!((total - 1.0).abs() < 1e-8);
        let part = integrate(|x| sr_pdf(&p, x), 0.0, 1.0, &opts).unwrap().value;
        assert!((sr_cdf(&p, 1.0) - part).abs() < 1e-10);
        assert_eq!(sr_cdf(&p, 0.0), 0.0);
        let u = p.coefficients().upsilon;
        assert!((sr_cdf(&p, 60.0 / u) - 1.0).abs() < 1e-8);
        for i in 0..1000 {
            assert!(sr_pdf(&p, i as f64 * 0.05) >= 0.0);
        }
    }

    #[test]
    fn sr_sample_mean_m1() {
        let p = ShadowedRicianParams::new(1.4, 1, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sr_sample(&p, &mut rng)).collect();
        assert!(xs.iter().all(|&x| x >= 0.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        // exponential with mean 5.8: sd of the mean is 5.8/sqrt(n)
        assert!((mean - 5.8).abs() < 3.0 * 5.8 / (n as f64).sqrt());
    }

    #[test]
    fn rayleigh_basics() {
        let p = RayleighGainParams::new(0.8).unwrap();
        assert_eq!(rayleigh_gain_cdf(&p, 0.0), 0.0);
        assert!((rayleigh_gain_cdf(&p, 1.0 / 0.8) - (1.0 - (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn gg_pdf_normalised_with_mean_mu() {
        let p = table2_optical(40.0);
        let opts = QuadOptions { abs_tol: 1e-10, rel_tol: 1e-9, max_depth: 50 };
        let mu = p.mu;
        // integrate in t = z / mu
        let total = integrate(|t| gg_snr_pdf(&p, t * mu).unwrap() * mu, 0.0, f64::INFINITY, &opts).unwrap().value;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        let mean = integrate(|t| t * gg_snr_pdf(&p, t * mu).unwrap() * mu, 0.0, f64::INFINITY, &opts).unwrap().value;
        assert!((mean - 1.0).abs() < 1e-3, "{mean}");
        assert_eq!(gg_snr_cdf(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn gg_cdf_matches_pdf_integral_across_switch() {
        let p = table2_optical(20.0);
        let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-10, max_depth: 50 };
        for &t in &[0.05, 0.5, 1.0, 2.0, 3.5, 6.0] {
            let z = t * p.mu;
            let direct = integrate(|w| gg_snr_pdf(&p, w).unwrap(), 0.0, z, &opts).unwrap().value;
            let c = gg_snr_cdf(&p, z).unwrap();
            assert!((c - direct).abs() < 1e-7, "t={t}: {c} vs {direct}");
        }
    }

    #[test]
    fn gg_r2_is_squared_r1() {
        let mut p2 = table2_optical(10.0);
        p2.r = 2;
        let p1 = OpticalLinkParams { mu: 1.0, r: 1, ..p2.clone() };
        for &z in &[0.5, 3.0, 10.0, 40.0] {
            let a = gg_snr_cdf(&p2, z).unwrap();
            let b = gg_snr_cdf(&p1, (z / p2.mu).sqrt()).unwrap();
            assert!((a - b).abs() < 1e-12);
            // density is the derivative of the distribution
            let h = 1e-4 * z;
            let d = (gg_snr_cdf(&p2, z + h).unwrap() - gg_snr_cdf(&p2, z - h).unwrap()) / (2.0 * h);
            let f = gg_snr_pdf(&p2, z).unwrap();
            assert!((d - f).abs() < 1e-4 * f, "z={z}: {d} vs {f}");
        }
    }

    #[test]
    fn perturbation_recorded() {
        let p = OpticalLinkParams::new(3.0, 1.0, 1.1, 1.0, 1).unwrap();
        assert_eq!(p.perturbations.len(), 1);
        assert!((p.alpha - 3.000001).abs() < 1e-12);
    }
}
