//! Method-of-moments estimation by three-phase stochastic approximation.
//!
//! Phase 1 estimates the derivative matrix `D = dE[S]/dtheta` at the start
//! values by finite differences with common random numbers and takes one
//! Newton step. Phase 2 runs Robbins–Monro updates
//! `theta <- theta - a D^-1 (S - s_obs)` in subphases with halving gain and
//! averages the iterates of each subphase. Phase 3 simulates at the final
//! estimate to obtain the statistic covariance `Sigma`, a refreshed `D` and
//! convergence t-ratios; `cov(theta) = D^-1 Sigma D^-T`.
//!
//! Several groups are estimated jointly with one shared parameter vector by
//! summing their statistics.

mod data;

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{Centering, ModelSpec};
use crate::panel::PanelSet;
use crate::seeds;

pub use data::data_centering;
use data::{EstimationData, Layout};

/// How phase 3 estimates the derivative matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    /// Finite differences with common random numbers on the first
    /// `phase3_derivative_runs` phase-3 runs.
    FiniteDifference,
    /// Score-function (likelihood-ratio) estimator on all phase-3 runs.
    Score,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartValues {
    /// Rates from observed change, density from observed density, other
    /// effects zero.
    Default,
    /// Parameters of the supplied model.
    Model,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimationOptions {
    pub phase1_runs: usize,
    pub phase2_subphases: usize,
    pub phase2_initial_gain: f64,
    pub phase3_runs: usize,
    pub phase3_derivative: DerivativeMethod,
    pub phase3_derivative_runs: usize,
    /// Weight of the diagonal of `D` in the phase-2 update matrix.
    pub diagonalize: f64,
    pub t_ratio_threshold: f64,
    pub overall_threshold: f64,
    pub max_retries: usize,
    pub derivative_epsilon: f64,
    /// Largest absolute change of one parameter in one update.
    pub max_step: f64,
    pub start: StartValues,
    pub seed: u64,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        Self {
            phase1_runs: 50,
            phase2_subphases: 4,
            phase2_initial_gain: 0.2,
            phase3_runs: 500,
            phase3_derivative: DerivativeMethod::Score,
            phase3_derivative_runs: 100,
            diagonalize: 0.2,
            t_ratio_threshold: 0.1,
            overall_threshold: 0.25,
            max_retries: 2,
            derivative_epsilon: 0.1,
            max_step: 1.0,
            start: StartValues::Default,
            seed: 1,
        }
    }
}

impl EstimationOptions {
    pub fn validate(&self) -> Result<()> {
        if self.phase1_runs < 2 || self.phase3_runs < 2 || self.phase2_subphases == 0 {
            return Err(Error::Config(
                "phase run counts must be at least 2 and subphases at least 1".into(),
            ));
        }
        if !(self.phase2_initial_gain > 0.0 && self.phase2_initial_gain <= 1.0) {
            return Err(Error::Config(format!(
                "gain {} outside (0, 1]",
                self.phase2_initial_gain
            )));
        }
        if !(0.0..=1.0).contains(&self.diagonalize) || self.derivative_epsilon <= 0.0 || self.max_step <= 0.0 {
            return Err(Error::Config("invalid diagonalize, epsilon or step bound".into()));
        }
        if self.phase3_derivative == DerivativeMethod::FiniteDifference && self.phase3_derivative_runs < 2 {
            return Err(Error::Config("phase3_derivative_runs must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub names: Vec<String>,
    pub theta: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// Parameters held fixed (rates of periods without observed change).
    pub fixed: Vec<bool>,
    pub targets: Vec<f64>,
    pub t_ratios: Vec<f64>,
    pub max_convergence_ratio: f64,
    pub converged: bool,
    pub retries: usize,
    pub wald_z: Vec<f64>,
    pub wald_p: Vec<f64>,
    pub centering: Centering,
    pub simulations: usize,
    pub warnings: Vec<String>,
}

impl EstimationResult {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// CSV header matching [`EstimationResult::csv_row`].
    pub fn csv_header(&self) -> String {
        let mut s = String::from("id,converged,retries,max_convergence_ratio");
        for n in &self.names {
            let _ = write!(s, ",{n},se_{n},t_{n}");
        }
        s
    }

    pub fn csv_row(&self, id: &str) -> String {
        let mut s = format!(
            "{id},{},{},{:.6}",
            self.converged, self.retries, self.max_convergence_ratio
        );
        for k in 0..self.names.len() {
            let _ = write!(
                s,
                ",{:.6},{:.6},{:.6}",
                self.theta[k], self.standard_errors[k], self.t_ratios[k]
            );
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaldTest {
    pub z: f64,
    pub p: f64,
    pub reject: bool,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Two-sided Wald test of `theta = 0` from an estimate and its standard error.
pub fn wald(estimate: f64, se: f64, alpha: f64) -> WaldTest {
    if estimate == 0.0 {
        return WaldTest {
            z: 0.0,
            p: 1.0,
            reject: false,
        };
    }
    let z = estimate / se;
    let p = (2.0 * std_normal().cdf(-z.abs())).clamp(0.0, 1.0);
    WaldTest {
        z,
        p,
        reject: p < alpha,
    }
}

/// Wald test of one named effect; refused for non-converged estimates.
pub fn wald_test(result: &EstimationResult, effect: &str, alpha: f64) -> Result<WaldTest> {
    if !result.converged {
        return Err(Error::TestRefused(format!("estimation of `{effect}` did not converge")));
    }
    let k = result
        .index(effect)
        .ok_or_else(|| Error::Config(format!("no parameter named `{effect}`")))?;
    let se = result.standard_errors[k];
    if !(se.is_finite() && se > 0.0) {
        return Err(Error::TestRefused(format!("standard error of `{effect}` is {se}")));
    }
    Ok(wald(result.theta[k], se, alpha))
}

/// Observed target statistics with their parameter names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetStatistics {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Periods (0-based) without any observed change in either sub-model.
    pub periods_without_change: Vec<usize>,
}

/// Cross-lagged target statistics of `set` under `model` and its centering.
///
/// For period `m`, network effects are evaluated on the wave `m + 1`
/// network with wave-`m` behavior, behavior effects on wave `m + 1`
/// behavior with the wave-`m` network. Rate targets are tie changes and
/// absolute behavior changes. Egos missing or absent at either end of a
/// period are excluded.
pub fn target_statistics(set: &PanelSet, model: &ModelSpec) -> Result<TargetStatistics> {
    let data = EstimationData::new(set, model)?;
    let l = &data.layout;
    let periods_without_change = (0..l.periods)
        .filter(|&m| data.targets[l.net_rate(m)] == 0.0 && (!l.behavior || data.targets[l.beh_rate(m)] == 0.0))
        .collect();
    Ok(TargetStatistics {
        names: l.names(model),
        values: data.targets.clone(),
        periods_without_change,
    })
}

const RATE_FLOOR: f64 = 0.01;

fn default_start(data: &EstimationData, set: &PanelSet, model: &ModelSpec) -> Vec<f64> {
    let l = &data.layout;
    let mut theta = vec![0.0; l.len()];
    let mut density = (0.0, 0.0);
    for m in 0..l.periods {
        let mut actors = 0usize;
        for g in &data.groups {
            actors += g.periods[m].include.iter().filter(|&&b| b).count();
        }
        let per_actor = |total: f64| total / actors.max(1) as f64;
        theta[l.net_rate(m)] = (2.0 * per_actor(data.targets[l.net_rate(m)])).clamp(0.5, 50.0);
        if l.behavior {
            theta[l.beh_rate(m)] = (2.0 * per_actor(data.targets[l.beh_rate(m)])).clamp(0.2, 50.0);
        }
    }
    for g in &set.groups {
        for w in &g.waves {
            let present = w.present.iter().filter(|&&p| p).count() as f64;
            density.0 += w.network.tie_count() as f64;
            density.1 += present * (present - 1.0);
        }
    }
    let d = (density.0 / density.1.max(1.0)).clamp(1e-3, 0.999);
    for (k, e) in model.network_effects.iter().enumerate() {
        if e.kind == crate::model::EffectKind::Density {
            theta[l.net_effect(k)] = (d / (1.0 - d)).ln();
        }
    }
    theta
}

struct Problem<'a> {
    data: &'a EstimationData,
    free: Vec<usize>,
    opts: &'a EstimationOptions,
    simulations: std::sync::atomic::AtomicUsize,
}

impl Problem<'_> {
    fn p(&self) -> usize {
        self.free.len()
    }

    /// Deviations `S - s_obs` of the free statistics.
    fn deviation(&self, theta: &[f64], seed: u64) -> DVector<f64> {
        self.simulations.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let (s, _) = self.data.simulate(theta, seed, false);
        DVector::from_iterator(self.p(), self.free.iter().map(|&k| s[k] - self.data.targets[k]))
    }

    fn deviation_with_score(&self, theta: &[f64], seed: u64) -> (DVector<f64>, DVector<f64>) {
        self.simulations.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let (s, u) = self.data.simulate(theta, seed, true);
        let u = u.expect("score requested");
        (
            DVector::from_iterator(self.p(), self.free.iter().map(|&k| s[k] - self.data.targets[k])),
            DVector::from_iterator(self.p(), self.free.iter().map(|&k| u[k])),
        )
    }

    fn with_free(&self, theta: &[f64], free_values: &DVector<f64>) -> Vec<f64> {
        let mut t = theta.to_vec();
        for (a, &k) in self.free.iter().enumerate() {
            t[k] = free_values[a];
        }
        t
    }

    fn free_values(&self, theta: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.p(), self.free.iter().map(|&k| theta[k]))
    }

    /// Finite-difference derivative with common random numbers; returns
    /// `(D, mean deviation, deviations)`.
    fn fd_derivative(&self, theta: &[f64], seeds_: &[u64]) -> (DMatrix<f64>, DVector<f64>, Vec<DVector<f64>>) {
        let p = self.p();
        let eps = self.opts.derivative_epsilon;
        let runs: Vec<(DVector<f64>, DMatrix<f64>)> = seeds_
            .par_iter()
            .map(|&seed| {
                let base = self.deviation(theta, seed);
                let mut cols = DMatrix::zeros(p, p);
                for a in 0..p {
                    let mut t = theta.to_vec();
                    t[self.free[a]] += eps;
                    let d = self.deviation(&t, seed);
                    cols.set_column(a, &((d - &base) / eps));
                }
                (base, cols)
            })
            .collect();
        let n = runs.len() as f64;
        let mut dmat = DMatrix::zeros(p, p);
        let mut mean = DVector::zeros(p);
        for (dev, cols) in &runs {
            dmat += cols;
            mean += dev;
        }
        (dmat / n, mean / n, runs.into_iter().map(|r| r.0).collect())
    }

    /// Score-function derivative `cov(S, U)`; returns `(deviations, D)`.
    fn score_derivative(&self, theta: &[f64], seeds_: &[u64]) -> (Vec<DVector<f64>>, DMatrix<f64>) {
        let p = self.p();
        let runs: Vec<(DVector<f64>, DVector<f64>)> = seeds_
            .par_iter()
            .map(|&s| self.deviation_with_score(theta, s))
            .collect();
        let n = runs.len() as f64;
        let mean: DVector<f64> = runs.iter().fold(DVector::zeros(p), |a, r| a + &r.0) / n;
        let umean: DVector<f64> = runs.iter().fold(DVector::zeros(p), |a, r| a + &r.1) / n;
        let mut d = DMatrix::zeros(p, p);
        for (s, u) in &runs {
            d += (s - &mean) * (u - &umean).transpose();
        }
        d /= n - 1.0;
        (runs.into_iter().map(|r| r.0).collect(), d)
    }

    fn names(&self, names: &[String]) -> Vec<String> {
        self.free.iter().map(|&k| names[k].clone()).collect()
    }
}

fn invert(d: &DMatrix<f64>, names: &[String]) -> Result<DMatrix<f64>> {
    for a in 0..d.nrows() {
        if d[(a, a)].abs() < 1e-10 || !d[(a, a)].is_finite() {
            return Err(Error::SingularDerivative(format!(
                "statistic of `{}` does not respond to its parameter; check for collinear or empty effects",
                names[a]
            )));
        }
    }
    let inv = d.clone().try_inverse().ok_or_else(|| {
        Error::SingularDerivative("derivative matrix not invertible; effects may be collinear".into())
    })?;
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularDerivative(
            "derivative matrix is numerically singular".into(),
        ));
    }
    Ok(inv)
}

fn bounded_step(step: &mut DVector<f64>, max_step: f64) {
    let largest = step.amax();
    if largest > max_step {
        *step *= max_step / largest;
    }
}

/// Applies `step` to the free parameters, halving rates that would turn
/// nonpositive.
fn apply_step(problem: &Problem<'_>, theta: &mut [f64], step: &DVector<f64>) {
    for (a, &k) in problem.free.iter().enumerate() {
        let new = theta[k] - step[a];
        theta[k] = if problem.data.layout.is_rate(k) && new <= RATE_FLOOR {
            (theta[k] / 2.0).max(RATE_FLOOR)
        } else {
            new
        };
    }
}

fn phase2(problem: &Problem<'_>, theta: &mut Vec<f64>, dinv: &DMatrix<f64>, attempt: u64) {
    let p = problem.p();
    let opts = problem.opts;
    // retries refine an estimate that is already close
    let mut gain = opts.phase2_initial_gain / 4f64.powi(attempt.min(1) as i32);
    for sub in 0..opts.phase2_subphases {
        let min_iter = ((2f64).powf(4.0 * sub as f64 / 3.0) * (7 + p) as f64).round() as usize;
        let max_iter = min_iter + 200;
        let mut sum = DVector::zeros(p);
        let mut count = 0usize;
        let mut prev: Option<DVector<f64>> = None;
        let mut cross = DVector::zeros(p);
        for it in 0..max_iter {
            let seed = seeds::derive_path(opts.seed, &[attempt, 2, sub as u64, it as u64]);
            let dev = problem.deviation(theta, seed);
            if let Some(prev) = &prev {
                cross += dev.component_mul(prev);
            }
            let mut step = dinv * &dev * gain;
            bounded_step(&mut step, opts.max_step);
            apply_step(problem, theta, &step);
            sum += problem.free_values(theta);
            count += 1;
            prev = Some(dev);
            if it + 1 >= min_iter && cross.iter().all(|&c| c < 0.0) {
                break;
            }
        }
        let mean = sum / count as f64;
        *theta = problem.with_free(theta, &mean);
        gain /= 2.0;
    }
}

struct Phase3 {
    d: DMatrix<f64>,
    sigma: DMatrix<f64>,
    mean: DVector<f64>,
    sd: DVector<f64>,
}

fn phase3(problem: &Problem<'_>, theta: &[f64], attempt: u64) -> Phase3 {
    let p = problem.p();
    let opts = problem.opts;
    let seeds_: Vec<u64> = (0..opts.phase3_runs)
        .map(|r| seeds::derive_path(opts.seed, &[attempt, 3, r as u64]))
        .collect();
    let (devs, d) = match opts.phase3_derivative {
        DerivativeMethod::Score => problem.score_derivative(theta, &seeds_),
        DerivativeMethod::FiniteDifference => {
            let k = opts.phase3_derivative_runs.min(seeds_.len());
            let (d, _, mut devs) = problem.fd_derivative(theta, &seeds_[..k]);
            let rest: Vec<DVector<f64>> = seeds_[k..].par_iter().map(|&s| problem.deviation(theta, s)).collect();
            devs.extend(rest);
            (devs, d)
        }
    };
    let n = devs.len() as f64;
    let mean: DVector<f64> = devs.iter().fold(DVector::zeros(p), |a, d| a + d) / n;
    let mut sigma = DMatrix::zeros(p, p);
    for dev in &devs {
        let c = dev - &mean;
        sigma += &c * c.transpose();
    }
    sigma /= n - 1.0;
    let sd = sigma.diagonal().map(f64::sqrt);
    Phase3 { d, sigma, mean, sd }
}

/// Estimates `model` from `set` by the method of moments.
///
/// The effect lists of `model` define the parameters; its parameter values
/// are used as start values only with [`StartValues::Model`]. Centering
/// constants are recomputed from the observed wave-1 behavior.
pub fn estimate(set: &PanelSet, model: &ModelSpec, opts: &EstimationOptions) -> Result<EstimationResult> {
    opts.validate()?;
    let mut model = model.clone();
    model.centering = data_centering(set);
    let data = EstimationData::new(set, &model)?;
    let l: &Layout = &data.layout;
    let names = l.names(&model);
    let mut warnings = Vec::new();

    let mut theta = match opts.start {
        StartValues::Default => default_start(&data, set, &model),
        StartValues::Model => l.theta_of(&model),
    };
    let mut fixed = vec![false; l.len()];
    for k in 0..l.len() {
        if l.is_rate(k) && data.targets[k] == 0.0 {
            fixed[k] = true;
            theta[k] = RATE_FLOOR;
            warnings.push(format!(
                "no observed change for `{}`; rate fixed at {RATE_FLOOR}",
                names[k]
            ));
        }
    }
    let problem = Problem {
        data: &data,
        free: (0..l.len()).filter(|&k| !fixed[k]).collect(),
        opts,
        simulations: Default::default(),
    };
    let free_names = problem.names(&names);

    // phase 1
    let seeds1: Vec<u64> = (0..opts.phase1_runs)
        .map(|r| seeds::derive_path(opts.seed, &[0, 1, r as u64]))
        .collect();
    let (mut d1, mean1, _) = problem.fd_derivative(&theta, &seeds1);
    if invert(&diagonalized(&d1, opts.diagonalize), &free_names).is_err() {
        warnings.push("finite-difference derivative singular in phase 1; using the score function".into());
        d1 = problem.score_derivative(&theta, &seeds1).1;
    }
    let mut d_used = diagonalized(&d1, opts.diagonalize);
    let mut dinv = invert(&d_used, &free_names)?;
    let mut step = invert(&d1, &free_names)? * &mean1;
    bounded_step(&mut step, 2.0 * opts.max_step);
    apply_step(&problem, &mut theta, &step);

    let mut retries = 0;
    let (p3, converged, t_ratios, overall) = loop {
        phase2(&problem, &mut theta, &dinv, retries as u64);
        let p3 = phase3(&problem, &theta, retries as u64);
        let t: Vec<f64> = (0..problem.p())
            .map(|a| if p3.sd[a] > 0.0 { p3.mean[a] / p3.sd[a] } else { 0.0 })
            .collect();
        let overall = overall_ratio(&p3.mean, &p3.sigma);
        let converged = t.iter().all(|x| x.abs() < opts.t_ratio_threshold) && overall < opts.overall_threshold;
        if converged || retries >= opts.max_retries {
            break (p3, converged, t, overall);
        }
        retries += 1;
        d_used = diagonalized(&p3.d, opts.diagonalize);
        dinv = match invert(&d_used, &free_names) {
            Ok(inv) => inv,
            Err(_) => break (p3, false, t, overall),
        };
    };

    let p = problem.p();
    let dinv3 = invert(&p3.d, &free_names);
    let cov_free = match &dinv3 {
        Ok(inv) => inv * &p3.sigma * inv.transpose(),
        Err(e) => {
            warnings.push(format!("phase-3 derivative matrix singular: {e}"));
            DMatrix::from_element(p, p, f64::NAN)
        }
    };
    let k = l.len();
    let mut covariance = vec![vec![0.0; k]; k];
    let mut se = vec![0.0; k];
    let mut t_all = vec![0.0; k];
    for (a, &ka) in problem.free.iter().enumerate() {
        for (b, &kb) in problem.free.iter().enumerate() {
            covariance[ka][kb] = cov_free[(a, b)];
        }
        se[ka] = cov_free[(a, a)].max(0.0).sqrt();
        t_all[ka] = t_ratios[a];
    }
    let converged = converged && problem.free.iter().all(|&k| se[k].is_finite() && se[k] > 0.0);
    let (wald_z, wald_p): (Vec<f64>, Vec<f64>) = (0..k)
        .map(|i| {
            if fixed[i] || !(se[i] > 0.0) {
                (f64::NAN, f64::NAN)
            } else {
                let w = wald(theta[i], se[i], 0.05);
                (w.z, w.p)
            }
        })
        .unzip();
    if !converged {
        warnings.push(format!(
            "not converged after {retries} retries: max |t| = {:.3}, overall ratio = {overall:.3}",
            t_ratios.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        ));
    }
    Ok(EstimationResult {
        names,
        theta,
        standard_errors: se,
        covariance,
        fixed,
        targets: data.targets.clone(),
        t_ratios: t_all,
        max_convergence_ratio: overall,
        converged,
        retries,
        wald_z,
        wald_p,
        centering: model.centering,
        simulations: problem.simulations.load(std::sync::atomic::Ordering::Relaxed),
        warnings,
    })
}

fn diagonalized(d: &DMatrix<f64>, w: f64) -> DMatrix<f64> {
    let mut out = d * (1.0 - w);
    for a in 0..d.nrows() {
        out[(a, a)] += w * d[(a, a)];
    }
    out
}

/// `sqrt(m' Sigma^-1 m)`, the largest t-ratio over linear combinations.
fn overall_ratio(mean: &DVector<f64>, sigma: &DMatrix<f64>) -> f64 {
    match sigma.clone().try_inverse() {
        Some(inv) => (mean.transpose() * inv * mean)[(0, 0)].max(0.0).sqrt(),
        None => f64::INFINITY,
    }
}

/// Simulated minus observed statistics averaged over `runs` simulations at
/// the parameters of `model`, divided by their standard deviation.
pub fn convergence_check(set: &PanelSet, model: &ModelSpec, runs: usize, seed: u64) -> Result<Vec<f64>> {
    let mut model = model.clone();
    model.centering = data_centering(set);
    let data = EstimationData::new(set, &model)?;
    let theta = data.layout.theta_of(&model);
    let sims: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|r| data.simulate(&theta, seeds::derive(seed, r as u64), false).0)
        .collect();
    let k = data.layout.len();
    Ok((0..k)
        .map(|j| {
            let vals: Vec<f64> = sims.iter().map(|s| s[j] - data.targets[j]).collect();
            let mean = vals.iter().sum::<f64>() / runs as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (runs.max(2) - 1) as f64;
            if var > 0.0 {
                mean / var.sqrt()
            } else {
                0.0
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wald_values() {
        let w = wald(0.0, 0.3, 0.05);
        assert_eq!((w.p, w.reject), (1.0, false));
        let w = wald(1.96, 1.0, 0.05);
        assert!((w.p - 0.05).abs() < 1e-3);
        let w = wald(1.55, 0.40, 0.05);
        assert!((w.z - 3.875).abs() < 1e-12);
        assert!(w.reject);
    }

    #[test]
    fn overall_ratio_of_independent_components() {
        let m = DVector::from_vec(vec![0.1, 0.2]);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        assert!((overall_ratio(&m, &s) - (0.01f64 + 0.01).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn default_options_are_valid() {
        EstimationOptions::default().validate().unwrap();
        let bad = EstimationOptions {
            phase2_initial_gain: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
