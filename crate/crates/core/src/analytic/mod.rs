//! Semi-analytic (nested quadrature) and closed-form evaluation of the intercept probability.

mod closed;
mod interp;
mod lemma1;
mod moments;

pub use closed::{ip_asymptotic, ip_asymptotic_with, ip_closed_form, ip_closed_form_with, ClosedOptions, SecondHopPath};
pub use interp::MonotoneCubic;
pub use lemma1::{
    cond_cdf_gamma_e1, cond_cdf_gamma_r, eve1_cdf_scaled, ip_lemma1, jammer_power_cdf, source_scale,
};
pub use moments::Eve1Mode;

use crate::specfun::SpecError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("mode: {0}")]
    Mode(String),
    #[error("truncation budget exceeded: {0}")]
    Truncation(String),
    #[error("raw value {0} outside [0, 1] beyond tolerance")]
    OutOfRange(f64),
}
