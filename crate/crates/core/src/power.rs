//! Power analysis: scenario definitions, the simulate → perturb → estimate →
//! test replication pipeline, grids with checkpointing, and power reports.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write as _};
use std::path::Path;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimator::{estimate, wald_test, EstimationOptions};
use crate::model::{EffectKind, ModelSpec};
use crate::panel::{CompositionEvent, PanelSet};
use crate::perturb::{
    add_joiner_slots, build_turnover_schedule, inject_mcar, subsample_panel, MissingPolicy, TurnoverPolicy,
};
use crate::seeds;
use crate::simulator::{
    assign_initial_attributes, burn_in_initial_network, sample_geometry, simulate_panel, synthesize_cohort_wave1,
    BurnInOptions, CoevolutionState, CohortTargets, CommunityGeometry, GeometryConfig,
};

/// Clustered population of which some communities are observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunityDesign {
    #[serde(default)]
    pub geometry: GeometryConfig,
    /// Communities retained for estimation.
    pub communities: Vec<usize>,
    pub waves: usize,
    pub scale: (i32, i32),
    #[serde(default = "default_distance_name")]
    pub distance_covariate: String,
    /// Reference distance subtracted before simulation.
    #[serde(default)]
    pub center_distances: DistanceCentering,
    /// Center behavior shape effects at the wave-1 mean during simulation;
    /// otherwise they use the raw scale values.
    #[serde(default = "yes")]
    pub center_behavior: bool,
    #[serde(default)]
    pub burn_in: BurnInOptions,
}

/// Shift applied to population distances before they enter the generating model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceCentering {
    /// Raw distances.
    None,
    /// Mean over all ordered pairs.
    Mean,
    /// Mean over ordered pairs within a community, so that the density
    /// parameter describes a typical within-community pair.
    #[default]
    Within,
}

impl DistanceCentering {
    /// Shifted distance matrix of `geometry`, zero diagonal.
    pub fn apply(self, geometry: &CommunityGeometry) -> Vec<f64> {
        let n = geometry.n();
        match self {
            Self::None => geometry.distances.clone(),
            Self::Mean => crate::model::center_dyadic(&geometry.distances, n),
            Self::Within => {
                let shift = geometry.within_mean_distance();
                let mut v: Vec<f64> = geometry.distances.iter().map(|x| x - shift).collect();
                (0..n).for_each(|i| v[i * n + i] = 0.0);
                v
            }
        }
    }
}

fn yes() -> bool {
    true
}

fn default_distance_name() -> String {
    "dist".into()
}

/// Synthetic school cohorts, each replicated `copies` times and estimated
/// jointly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortDesign {
    pub sizes: Vec<usize>,
    pub copies: usize,
    #[serde(default = "default_cohort_waves")]
    pub waves: usize,
    #[serde(default)]
    pub targets: CohortTargets,
    #[serde(default)]
    pub burn_in: BurnInOptions,
}

fn default_cohort_waves() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    Communities(CommunityDesign),
    Cohorts(CohortDesign),
}

/// One cell of a power study.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub id: String,
    /// Generating model; the same effects are estimated.
    pub model: ModelSpec,
    pub design: Design,
    pub missing: MissingPolicy,
    pub turnover: TurnoverPolicy,
    pub replications: usize,
    pub alpha: f64,
    /// Parameter names as reported by the estimator, e.g. `simX`.
    pub focal_effects: Vec<String>,
    pub seed: u64,
    pub estimation: EstimationOptions,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.estimation.validate()?;
        if self.replications == 0 {
            return Err(Error::Config(format!(
                "scenario `{}` needs at least one replication",
                self.id
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        let names: Vec<String> = self
            .model
            .network_effects
            .iter()
            .chain(&self.model.behavior_effects)
            .map(|e| e.kind.to_string())
            .collect();
        for f in &self.focal_effects {
            if !names.contains(f) {
                return Err(Error::Config(format!(
                    "focal effect `{f}` is not in the model of `{}`",
                    self.id
                )));
            }
        }
        let (dyadic, actor): (Vec<&str>, Vec<&str>) = match &self.design {
            Design::Communities(c) => (vec![c.distance_covariate.as_str()], vec![]),
            Design::Cohorts(c) => (vec![], vec![c.targets.gender_covariate.as_str()]),
        };
        for kind in self.model.network_effects.iter().map(|e| &e.kind) {
            let known = match kind {
                EffectKind::DyadX(c) => dyadic.contains(&c.as_str()),
                EffectKind::SameX(c) => actor.contains(&c.as_str()),
                _ => true,
            };
            if !known {
                return Err(Error::UnknownCovariate(format!(
                    "{} (effect `{kind}` in scenario `{}`)",
                    kind.covariate().unwrap_or_default(),
                    self.id
                )));
            }
        }
        match &self.design {
            Design::Communities(c) => {
                if c.waves < 2 {
                    return Err(Error::Config("designs need at least 2 waves".into()));
                }
                if c.communities.is_empty() || c.communities.iter().any(|&k| k >= c.geometry.means.len()) {
                    return Err(Error::Config("retained communities must exist in the geometry".into()));
                }
            }
            Design::Cohorts(c) => {
                if c.waves < 2 || c.sizes.is_empty() || c.copies == 0 {
                    return Err(Error::Config(
                        "cohort designs need sizes, copies and at least 2 waves".into(),
                    ));
                }
                if self.turnover.per_group_count >= *c.sizes.iter().min().unwrap() {
                    return Err(Error::Config("turnover count must be below every cohort size".into()));
                }
            }
        }
        Ok(())
    }

    /// Stable fingerprint of everything a single replication depends on.
    /// The replication count is excluded so that runs can be extended.
    pub fn fingerprint(&self) -> u64 {
        let cell = Self {
            replications: 0,
            ..self.clone()
        };
        seeds::hash_str(&format!("{cell:?}"))
    }

    pub fn replication_seed(&self, rep: usize) -> u64 {
        seeds::derive_path(self.seed, &[seeds::hash_str(&self.id), rep as u64])
    }
}

/// Outcome of one replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub scenario_id: String,
    pub scenario_hash: u64,
    pub replication: usize,
    pub converged: bool,
    pub names: Vec<String>,
    pub theta: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Wald decision per parameter at the scenario's alpha; `None` when
    /// refused.
    pub reject: Vec<Option<bool>>,
    pub error: Option<String>,
}

/// Per scenario and parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub scenario_id: String,
    pub effect: String,
    pub focal: bool,
    pub simulated_parameter: f64,
    pub mean_estimate: f64,
    pub sd_estimate: f64,
    pub mean_se: f64,
    pub empirical_power: f64,
    pub analytic_power: f64,
    pub convergence_rate: f64,
    pub replications: usize,
    pub converged: usize,
    pub not_converged: usize,
    /// Share of converged runs whose standard error exceeds 1.5 times the
    /// standard deviation of the estimates.
    pub se_inflation_share: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub rows: Vec<PowerRow>,
    pub warnings: Vec<String>,
}

pub const FLAG_MESSAGE: &str = "design not estimable at this turnover/missingness";

/// Two-sided power `Phi(|t| - z_{1 - alpha/2})` with `t = mean / sd`.
pub fn analytic_power(mean_est: f64, sd_est: f64, alpha: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    if !(sd_est > 0.0) {
        return f64::NAN;
    }
    let t = (mean_est / sd_est).abs();
    n.cdf(t - n.inverse_cdf(1.0 - alpha / 2.0))
}

/// Wave-1 cohorts shared by every replication of a cohort design.
pub fn cohort_wave1(model: &ModelSpec, design: &CohortDesign, seed: u64) -> Result<Vec<CoevolutionState>> {
    design
        .sizes
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seeds::derive_path(seed, &[seeds::hash_str("cohort-wave1"), c as u64]));
            synthesize_cohort_wave1(n, &design.targets, model, &design.burn_in, &mut rng)
        })
        .collect()
}

/// Turnover events for each period and the number of joiner slots used.
fn turnover_events<R: rand::Rng + ?Sized>(
    present: &[bool],
    periods: usize,
    policy: &TurnoverPolicy,
    rng: &mut R,
) -> Result<Vec<Vec<CompositionEvent>>> {
    let mut present = present.to_vec();
    let mut next_slot = present.iter().rposition(|&p| p).map_or(0, |i| i + 1);
    let mut out = Vec::with_capacity(periods);
    for _ in 0..periods {
        let slots: Vec<usize> = (next_slot..next_slot + policy.per_group_count).collect();
        let events = build_turnover_schedule(&present, &slots, policy, rng)?;
        for ev in &events {
            for &l in &ev.leavers {
                present[l] = false;
            }
            for j in &ev.joiners {
                present[j.actor] = true;
            }
        }
        next_slot += policy.per_group_count;
        out.push(events);
    }
    Ok(out)
}

/// Simulates and perturbs the data of one replication.
pub fn simulate_replication(
    scenario: &ScenarioSpec,
    rep: usize,
    cohorts: Option<&[CoevolutionState]>,
) -> Result<PanelSet> {
    let seed = scenario.replication_seed(rep);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let turnover = &scenario.turnover;
    let groups = match &scenario.design {
        Design::Communities(d) => {
            let geometry = sample_geometry(&d.geometry, &mut rng)?;
            let n = geometry.n();
            let mut covariates = crate::model::CovariateSet::default();
            let distances = d.center_distances.apply(&geometry);
            covariates.dyadic.insert(d.distance_covariate.clone(), distances);
            let burn_model = scenario.model.without(&[EffectKind::SimX]);
            let network = burn_in_initial_network(n, &burn_model, &covariates, &d.burn_in, &mut rng)?;
            let behavior = assign_initial_attributes(n, d.scale, &mut rng)?;
            let state = CoevolutionState::new(network, behavior, covariates)?;
            let mut model = scenario.model.clone();
            model.centering = state.centering();
            if !d.center_behavior {
                model.centering.behavior_mean = 0.0;
            }
            let periods = d.waves - 1;
            let slots = turnover.per_group_count * periods;
            let state = add_joiner_slots(&state, slots)?;
            let events = turnover_events(&state.present, periods, turnover, &mut rng)?;
            let panel = simulate_panel(&state, &model, d.waves, &events, "communities", &mut rng)?;
            let mut actors: Vec<usize> = d.communities.iter().flat_map(|&c| geometry.members(c)).collect();
            actors.extend(n..n + slots);
            let mut sub = subsample_panel(&panel, &actors, d.waves)?;
            sub.group_id = format!(
                "communities-{}",
                d.communities.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
            );
            vec![inject_mcar(&sub, &scenario.missing, &mut rng)?]
        }
        Design::Cohorts(d) => {
            let cohorts = cohorts.ok_or_else(|| Error::InvalidInput("cohort design needs wave-1 cohorts".into()))?;
            let pooled: Vec<i32> = cohorts
                .iter()
                .flat_map(|c| c.behavior.values().iter().copied())
                .collect();
            let width = d.targets.scale.1 - d.targets.scale.0;
            let mut model = scenario.model.clone();
            model.centering = crate::model::Centering::from_values(&pooled, width);
            let periods = d.waves - 1;
            let mut groups = Vec::with_capacity(cohorts.len() * d.copies);
            for (c, cohort) in cohorts.iter().enumerate() {
                for copy in 0..d.copies {
                    let state = add_joiner_slots(cohort, turnover.per_group_count * periods)?;
                    let events = turnover_events(&state.present, periods, turnover, &mut rng)?;
                    let id = format!("cohort{}-{}", c + 1, copy + 1);
                    let panel = simulate_panel(&state, &model, d.waves, &events, &id, &mut rng)?;
                    groups.push(inject_mcar(&panel, &scenario.missing, &mut rng)?);
                }
            }
            groups
        }
    };
    Ok(PanelSet { groups })
}

/// Runs one replication end to end; failures are recorded, not returned.
pub fn run_replication(scenario: &ScenarioSpec, rep: usize, cohorts: Option<&[CoevolutionState]>) -> ReplicationResult {
    let mut result = ReplicationResult {
        scenario_id: scenario.id.clone(),
        scenario_hash: scenario.fingerprint(),
        replication: rep,
        converged: false,
        names: Vec::new(),
        theta: Vec::new(),
        standard_errors: Vec::new(),
        reject: Vec::new(),
        error: None,
    };
    let outcome = simulate_replication(scenario, rep, cohorts).and_then(|set| {
        let opts = EstimationOptions {
            seed: seeds::derive(scenario.replication_seed(rep), 0xE57),
            ..scenario.estimation.clone()
        };
        estimate(&set, &scenario.model, &opts)
    });
    match outcome {
        Ok(est) => {
            result.converged = est.converged;
            result.reject = est
                .names
                .iter()
                .map(|n| wald_test(&est, n, scenario.alpha).ok().map(|w| w.reject))
                .collect();
            result.names = est.names;
            result.theta = est.theta;
            result.standard_errors = est.standard_errors;
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

/// Generating value of a named estimation parameter.
fn generating_value(model: &ModelSpec, name: &str) -> f64 {
    if let Some(rest) = name.strip_prefix("rate_network_") {
        return rest.parse::<usize>().map_or(f64::NAN, |m| model.network_rate_at(m - 1));
    }
    if let Some(rest) = name.strip_prefix("rate_behavior_") {
        return rest
            .parse::<usize>()
            .map_or(f64::NAN, |m| model.behavior_rate_at(m - 1));
    }
    model
        .network_effects
        .iter()
        .chain(&model.behavior_effects)
        .find(|e| e.kind.to_string() == name)
        .map_or(f64::NAN, |e| e.parameter)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Aggregates replication results of one scenario.
pub fn summarize(scenario: &ScenarioSpec, results: &[ReplicationResult]) -> (Vec<PowerRow>, Vec<String>) {
    let total = results.len();
    let converged: Vec<&ReplicationResult> = results.iter().filter(|r| r.converged).collect();
    let n_conv = converged.len();
    let rate = if total == 0 { 0.0 } else { n_conv as f64 / total as f64 };
    let flagged = total > 0 && (total - n_conv) * 2 > total;
    let mut warnings = Vec::new();
    if flagged {
        warnings.push(format!(
            "scenario `{}`: {FLAG_MESSAGE} ({n_conv}/{total} converged)",
            scenario.id
        ));
    }
    let names = results
        .iter()
        .find(|r| !r.names.is_empty())
        .map(|r| r.names.clone())
        .unwrap_or_default();
    let rows = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let est: Vec<f64> = converged.iter().map(|r| r.theta[k]).collect();
            let ses: Vec<f64> = converged.iter().map(|r| r.standard_errors[k]).collect();
            let (mean, sd) = mean_sd(&est);
            let (mean_se, _) = mean_sd(&ses);
            let decided: Vec<bool> = converged.iter().filter_map(|r| r.reject[k]).collect();
            let power = if n_conv == 0 {
                f64::NAN
            } else {
                decided.iter().filter(|&&d| d).count() as f64 / n_conv as f64
            };
            let inflation = if n_conv == 0 || !(sd > 0.0) {
                f64::NAN
            } else {
                ses.iter().filter(|&&s| s > 1.5 * sd).count() as f64 / n_conv as f64
            };
            PowerRow {
                scenario_id: scenario.id.clone(),
                effect: name.clone(),
                focal: scenario.focal_effects.contains(name),
                simulated_parameter: generating_value(&scenario.model, name),
                mean_estimate: mean,
                sd_estimate: sd,
                mean_se,
                empirical_power: power,
                analytic_power: analytic_power(mean, sd, scenario.alpha),
                convergence_rate: rate,
                replications: total,
                converged: n_conv,
                not_converged: total - n_conv,
                se_inflation_share: inflation,
                flagged,
            }
        })
        .collect();
    (rows, warnings)
}

/// Runs all replications of one scenario.
pub fn run_scenario(scenario: &ScenarioSpec) -> Result<(PowerReport, Vec<ReplicationResult>)> {
    let report = run_grid(std::slice::from_ref(scenario), None, false)?;
    Ok(report)
}

/// Reads completed replications from a JSON-lines checkpoint.
fn read_checkpoint(path: &Path, force: bool) -> Result<Vec<ReplicationResult>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path)?;
    let mut out = Vec::new();
    let mut corrupt = 0usize;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ReplicationResult>(&line) {
            Ok(r) => out.push(r),
            Err(e) if !force => {
                return Err(Error::Checkpoint(format!(
                    "{} line {}: {e}; rerun with the override flag to discard corrupt lines",
                    path.display(),
                    lineno + 1
                )))
            }
            Err(_) => corrupt += 1,
        }
    }
    if corrupt > 0 {
        log::warn!("discarded {corrupt} corrupt checkpoint lines");
        let mut f = File::create(path)?;
        for r in &out {
            writeln!(f, "{}", serde_json::to_string(r)?)?;
        }
    }
    Ok(out)
}

/// Runs every scenario × replication cell in parallel.
///
/// With a checkpoint path, completed cells are appended as JSON lines and
/// skipped on the next call. A corrupt checkpoint or one written for a
/// different scenario definition is refused unless `force` is set, in which
/// case offending lines are discarded. The report is ordered by scenario id.
pub fn run_grid(
    scenarios: &[ScenarioSpec],
    checkpoint: Option<&Path>,
    force: bool,
) -> Result<(PowerReport, Vec<ReplicationResult>)> {
    let mut ids = HashSet::new();
    for s in scenarios {
        s.validate()?;
        if !ids.insert(s.id.as_str()) {
            return Err(Error::Config(format!("duplicate scenario id `{}`", s.id)));
        }
    }
    let hashes: BTreeMap<&str, u64> = scenarios.iter().map(|s| (s.id.as_str(), s.fingerprint())).collect();
    let mut done: BTreeMap<(String, usize), ReplicationResult> = BTreeMap::new();
    if let Some(path) = checkpoint {
        for r in read_checkpoint(path, force)? {
            match hashes.get(r.scenario_id.as_str()) {
                Some(&h) if h == r.scenario_hash => {
                    done.insert((r.scenario_id.clone(), r.replication), r);
                }
                Some(_) if !force => {
                    return Err(Error::Checkpoint(format!(
                        "checkpoint entry for `{}` was written by a different scenario definition",
                        r.scenario_id
                    )))
                }
                _ => {}
            }
        }
    }
    let cohorts: Vec<Option<Vec<CoevolutionState>>> = scenarios
        .iter()
        .map(|s| match &s.design {
            Design::Cohorts(d) => cohort_wave1(&s.model, d, s.seed).map(Some),
            Design::Communities(_) => Ok(None),
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(si, s)| (0..s.replications).map(move |r| (si, r)))
        .filter(|&(si, r)| !done.contains_key(&(scenarios[si].id.clone(), r)))
        .collect();
    let writer = match checkpoint {
        Some(path) => Some(Mutex::new(OpenOptions::new().create(true).append(true).open(path)?)),
        None => None,
    };
    let fresh: Vec<ReplicationResult> = jobs
        .par_iter()
        .map(|&(si, r)| {
            let res = run_replication(&scenarios[si], r, cohorts[si].as_deref());
            if let Some(w) = &writer {
                let line = serde_json::to_string(&res)?;
                let mut f = w.lock().expect("checkpoint lock");
                writeln!(f, "{line}")?;
                f.flush()?;
            }
            Ok(res)
        })
        .collect::<Result<_>>()?;
    for r in fresh {
        done.insert((r.scenario_id.clone(), r.replication), r);
    }
    let mut order: Vec<usize> = (0..scenarios.len()).collect();
    order.sort_by(|&a, &b| scenarios[a].id.cmp(&scenarios[b].id));
    let mut report = PowerReport::default();
    let mut all = Vec::new();
    for si in order {
        let s = &scenarios[si];
        let results: Vec<ReplicationResult> = (0..s.replications)
            .filter_map(|r| done.get(&(s.id.clone(), r)).cloned())
            .collect();
        let (rows, warnings) = summarize(s, &results);
        report.rows.extend(rows);
        report.warnings.extend(warnings);
        all.extend(results);
    }
    Ok((report, all))
}

impl PowerReport {
    pub const CSV_HEADER: &'static str =
        "scenario_id,effect,focal,simulated_parameter,mean_estimate,sd_estimate,mean_se,\
empirical_power,analytic_power,convergence_rate,replications,converged,not_converged,se_inflation_share,flagged";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{:.6},{}",
                r.scenario_id,
                r.effect,
                r.focal,
                r.simulated_parameter,
                r.mean_estimate,
                r.sd_estimate,
                r.mean_se,
                r.empirical_power,
                r.analytic_power,
                r.convergence_rate,
                r.replications,
                r.converged,
                r.not_converged,
                r.se_inflation_share,
                r.flagged
            );
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn row(&self, scenario: &str, effect: &str) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| r.scenario_id == scenario && r.effect == effect)
    }

    /// Human-readable table: one block per scenario with every parameter.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let mut current = "";
        for r in &self.rows {
            if r.scenario_id != current {
                current = &r.scenario_id;
                let _ = writeln!(
                    s,
                    "\n{current}  (converged {}/{}{})",
                    r.converged,
                    r.replications,
                    if r.flagged {
                        format!(", {FLAG_MESSAGE}")
                    } else {
                        String::new()
                    }
                );
                let _ = writeln!(
                    s,
                    "  {:<22} {:>10} {:>10} {:>9} {:>10} {:>10}",
                    "effect", "sim.param", "avg.est", "st.dev", "power(%)", "analytic(%)"
                );
            }
            let is_rate = r.effect.starts_with("rate_");
            let pct = |x: f64| {
                if is_rate || x.is_nan() {
                    String::new()
                } else {
                    format!("{:.1}", 100.0 * x)
                }
            };
            let _ = writeln!(
                s,
                "  {:<22} {:>10.2} {:>10.2} {:>9.2} {:>10} {:>10}{}",
                r.effect,
                r.simulated_parameter,
                r.mean_estimate,
                r.sd_estimate,
                pct(r.empirical_power),
                pct(r.analytic_power),
                if r.focal { "  *" } else { "" }
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_power_reference_points() {
        assert!((analytic_power(1.959964, 1.0, 0.05) - 0.5).abs() < 1e-5);
        assert!((analytic_power(0.0, 0.7, 0.05) - 0.025).abs() < 1e-9);
        let p = analytic_power(0.87, 0.59, 0.05);
        assert!((p - 0.31).abs() < 0.01, "{p}");
    }

    #[test]
    fn generating_values_by_name() {
        use crate::model::{Centering, Effect};
        let m = ModelSpec {
            network_effects: vec![Effect::new(EffectKind::Density, -2.0)],
            behavior_effects: vec![Effect::new(EffectKind::Linear, 0.1)],
            network_rate: vec![3.0, 4.0],
            behavior_rate: vec![0.6],
            centering: Centering::default(),
        };
        assert_eq!(generating_value(&m, "rate_network_2"), 4.0);
        assert_eq!(generating_value(&m, "rate_behavior_2"), 0.6);
        assert_eq!(generating_value(&m, "density"), -2.0);
    }
}
