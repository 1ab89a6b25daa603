//! Gamma family, incomplete gamma for complex order, finite-form 1F1, Meijer G
//! (ordinary and upper-incomplete) and two-dimensional Mellin-Barnes integration.

mod gamma;
mod incgamma;
mod meijer;

pub use gamma::{
    binomial, factorial, gamma, gamma_c, set_gamma_corruption, kummer_1f1_finite, ln_gamma, log_gamma, lower_incomplete_gamma,
    upper_incomplete_gamma_int,
};

pub use incgamma::{lower_incomplete_gamma_c, upper_incomplete_gamma};
pub use meijer::{
    double_mellin_barnes, meijer_g, meijer_g_path, DoubleMbKernel, GPath, GValue, MeijerGSpec, TruncationPolicy,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("gamma pole at {0}")]
    Pole(f64),
    #[error("coincident poles near parameters {0} and {1}; perturb the parameters")]
    DegeneratePoles(f64, f64),
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error("domain error: {0}")]
    Domain(String),
}
