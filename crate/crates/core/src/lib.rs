//! Simulation-based statistical power analysis for longitudinal network
//! studies analysed with stochastic actor-oriented models.
//!
//! The pipeline is: build a model and a study design, simulate network and
//! behavior panels ([`simulator`]), perturb them with subsampling, missing
//! data and turnover ([`perturb`]), re-estimate by the method of moments
//! ([`estimator`]) and aggregate Wald-test rejection rates into power
//! reports ([`power`]). [`gof`] offers descriptive adequacy checks.

pub mod config;
mod dynamics;
pub mod error;
pub mod estimator;
pub mod gof;
pub mod model;
pub mod panel;
pub mod perturb;
pub mod power;
pub mod seeds;
pub mod simulator;

pub use error::{Error, Result};
