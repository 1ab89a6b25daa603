use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use super::SpecError;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

static CORRUPT: AtomicBool = AtomicBool::new(false);

/// Perturbs one Lanczos coefficient process-wide. Only for the self-test's mutation check.
#[doc(hidden)]
pub fn set_gamma_corruption(on: bool) {
    CORRUPT.store(on, Ordering::Relaxed);
}

fn lanczos_ln(z: Complex64) -> Complex64 {
    // ln Gamma(z) for Re z >= 0.5
    let z1 = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z1 + k as f64);
    }
    if CORRUPT.load(Ordering::Relaxed) {
        a += 1e-3 * LANCZOS[2] / (z1 + 2.0);
    }
    let t = z1 + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z1 + 0.5) * t.ln() - t + a.ln()
}

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal branch of ln Gamma(z).
///
/// Arguments left of Re z = 1/2 are shifted upward with the recurrence, which keeps the
/// branch continuous off the negative real axis.
pub fn log_gamma(z: Complex64) -> Result<Complex64, SpecError> {
    if is_pole(z) {
        return Err(SpecError::Pole(z.re));
    }
    Ok(log_gamma_unchecked(z))
}

pub(crate) fn log_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return lanczos_ln(z);
    }
    let n = (0.5 - z.re).ceil() as usize;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut w = z;
    for _ in 0..n {
        corr += w.ln();
        w += 1.0;
    }
    lanczos_ln(w) - corr
}

/// Gamma(z) for complex z. Returns infinity at the poles.
pub fn gamma_c(z: Complex64) -> Complex64 {
    if is_pole(z) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if z.re >= 0.5 {
        return log_gamma_unchecked(z).exp();
    }
    // reflection keeps magnitude accurate close to the poles
    let s = (PI * z).sin();
    PI / (s * log_gamma_unchecked(1.0 - z).exp())
}

/// ln|Gamma(x)| for real x.
pub fn ln_gamma(x: f64) -> f64 {
    if x >= 0.5 {
        lanczos_ln(Complex64::new(x, 0.0)).re
    } else {
        (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x)
    }
}

/// Gamma(x) for real x.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return f64::NAN;
    }
    if x >= 0.5 {
        if x < 171.0 {
            ln_gamma(x).exp()
        } else {
            f64::INFINITY
        }
    } else {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Lower incomplete gamma for integer order: (n-1)! (1 - e^{-x} sum_{k<n} x^k/k!).
pub fn lower_incomplete_gamma(n: u32, x: f64) -> f64 {
    assert!(n >= 1, "order must be at least 1");
    assert!(x >= 0.0, "argument must be non-negative");
    let n = n as usize;
    if x == 0.0 {
        return 0.0;
    }
    if x < n as f64 {
        // series avoids cancellation in 1 - e^{-x} sum
        let mut term = x.powi(n as i32) * (-x).exp() / n as f64;
        let mut sum = term;
        let mut k = n;
        loop {
            k += 1;
            term *= x / k as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum
    } else {
        factorial(n - 1) - upper_incomplete_gamma_int(n as u32, x)
    }
}

/// Upper incomplete gamma for integer order: (n-1)! e^{-x} sum_{k<n} x^k/k!.
pub fn upper_incomplete_gamma_int(n: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..n as usize {
        term *= x / k as f64;
        sum += term;
    }
    factorial(n as usize - 1) * (-x).exp() * sum
}

/// 1F1(m; 1; x) for integer m through its finite form e^x sum_n C(m-1,n) x^n / n!.
pub fn kummer_1f1_finite(m: u32, x: f64) -> f64 {
    assert!(m >= 1, "m must be a positive integer");
    let m = m as usize;
    let poly: f64 = (0..m)
        .map(|n| factorial(m - 1) / (factorial(m - 1 - n) * factorial(n).powi(2)) * x.powi(n as i32))
        .sum();
    x.exp() * poly
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trivial_values() {
        assert!(log_gamma(Complex64::new(1.0, 0.0)).unwrap().norm() < 1e-15);
        let h = log_gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert_relative_eq!(h.re, 0.5 * PI.ln(), epsilon = 1e-14);
        assert!(log_gamma(Complex64::new(-2.0, 0.0)).is_err());
        assert!(log_gamma(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn matches_high_precision_values() {
        // reference values from a 50-digit evaluation
        let cases = [
            ((2.3, 1.7), (-0.548_135_917_218_600_4, 1.214_946_281_238_399)),
            ((-3.7, 0.2), (-1.636_433_092_562_456_4, -12.663_282_679_635_772)),
            ((10.5, -30.0), (-12.014_074_973_717_696, -86.108_036_952_463_67)),
            ((0.1, 45.0), (-71.289_558_205_324_97, 125.670_641_634_015_39)),
        ];
        for ((x, y), (re, im)) in cases {
            let v = log_gamma(Complex64::new(x, y)).unwrap();
            assert_relative_eq!(v.re, re, max_relative = 1e-12, epsilon = 1e-13);
            assert_relative_eq!(v.im, im, max_relative = 1e-12, epsilon = 1e-13);
        }
    }

    #[test]
    fn gamma_complex_consistent() {
        let z = Complex64::new(-2.5, 0.7);
        let a = gamma_c(z);
        let b = log_gamma(z).unwrap().exp();
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn incomplete_integer_forms() {
        assert_relative_eq!(lower_incomplete_gamma(1, 0.7), 1.0 - (-0.7f64).exp(), epsilon = 1e-15);
        assert_eq!(lower_incomplete_gamma(3, 0.0), 0.0);
        assert_relative_eq!(lower_incomplete_gamma(2, 1.0), 1.0 - 2.0 * (-1.0f64).exp(), epsilon = 1e-15);
        for n in 1..8 {
            for &x in &[0.01, 0.5, 3.0, 12.0] {
                let s = lower_incomplete_gamma(n, x) + upper_incomplete_gamma_int(n, x);
                assert_relative_eq!(s, factorial(n as usize - 1), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn kummer_finite_form() {
        assert_relative_eq!(kummer_1f1_finite(1, 0.3), 0.3f64.exp(), epsilon = 1e-15);
        assert_relative_eq!(kummer_1f1_finite(2, 0.0), 1.0);
        for m in [2u32, 3, 5] {
            let x = 0.7;
            // defining series sum (m)_k x^k / (k!)^2
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 0..200 {
                term *= (m as f64 + k as f64) * x / ((k + 1) as f64).powi(2);
                sum += term;
                if term < 1e-18 {
                    break;
                }
            }
            assert_relative_eq!(kummer_1f1_finite(m, x), sum, max_relative = 1e-14);
        }
    }
}
