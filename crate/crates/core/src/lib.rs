pub mod channels;
pub mod checks;
pub mod cli;
pub mod analytic;
pub mod config;
pub mod montecarlo;
pub mod quad;
pub mod specfun;
pub mod system;
