//! Panel generation: community geometry, burn-in of the starting network,
//! attribute assignment, synthetic school cohorts and continuous-time
//! co-evolution between waves.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, Compiled, Env, Params, Scratch, SimEvent, SimState, Streams};
use crate::error::{Error, Result};
use crate::model::{BehaviorState, Centering, CovariateSet, EffectKind, ModelSpec, NetworkState};
use crate::panel::{CompositionEvent, Joiner, PanelData, Wave};

/// Network, behavior, covariates and presence at one point in time.
#[derive(Clone, Debug, PartialEq)]
pub struct CoevolutionState {
    pub network: NetworkState,
    pub behavior: BehaviorState,
    pub covariates: CovariateSet,
    pub present: Vec<bool>,
}

impl CoevolutionState {
    pub fn new(network: NetworkState, behavior: BehaviorState, covariates: CovariateSet) -> Result<Self> {
        let n = network.n();
        if behavior.len() != n {
            return Err(Error::InvalidInput(format!(
                "behavior has {} actors, network {n}",
                behavior.len()
            )));
        }
        covariates.validate(n)?;
        Ok(Self {
            network,
            behavior,
            covariates,
            present: vec![true; n],
        })
    }

    /// State of a panel wave with dyadic covariates centered as in
    /// estimation.
    pub fn from_wave(panel: &PanelData, wave: usize) -> Result<Self> {
        let w = panel
            .waves
            .get(wave)
            .ok_or_else(|| Error::InvalidInput(format!("panel `{}` has no wave {wave}", panel.group_id)))?;
        let n = w.network.n();
        let mut state = Self::new(
            w.network.clone(),
            panel.behavior(wave)?,
            panel.covariates.with_centered_dyadic(n),
        )?;
        state.present = w.present.clone();
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.network.n()
    }

    /// Centering constants from the behavior of present actors.
    pub fn centering(&self) -> Centering {
        let values: Vec<i32> = (0..self.n())
            .filter(|&i| self.present[i])
            .map(|i| self.behavior.get(i))
            .collect();
        Centering::from_values(&values, self.behavior.width())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub per_cluster: usize,
    /// Cluster centres; one cluster per entry.
    pub means: Vec<(f64, f64)>,
    /// Per-cluster standard deviations are drawn uniformly from this range.
    pub sd_range: (f64, f64),
    /// Distances are divided by this before entering the dyadic covariate.
    pub distance_scale: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            per_cluster: 30,
            means: vec![(0.0, 0.0), (4.0, 0.0), (0.0, 4.0), (4.0, 4.0)],
            sd_range: (0.5, 1.0),
            distance_scale: 4.0,
        }
    }
}

/// Actor positions around cluster centres and the implied distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityGeometry {
    pub communities: Vec<usize>,
    pub means: Vec<(f64, f64)>,
    pub sds: Vec<f64>,
    pub positions: Vec<(f64, f64)>,
    /// Row-major scaled Euclidean distances.
    pub distances: Vec<f64>,
}

impl CommunityGeometry {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn members(&self, community: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.communities[i] == community).collect()
    }

    /// Mean distance over ordered pairs in the same community.
    pub fn within_mean_distance(&self) -> f64 {
        let n = self.n();
        let (mut sum, mut count) = (0.0, 0usize);
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i && self.communities[j] == self.communities[i]) {
                sum += self.distances[i * n + j];
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// Draws actor positions: `per_cluster` actors around each centre.
pub fn sample_geometry<R: Rng + ?Sized>(config: &GeometryConfig, rng: &mut R) -> Result<CommunityGeometry> {
    let k = config.means.len();
    for a in 0..k {
        for b in 0..a {
            if config.means[a] == config.means[b] {
                return Err(Error::Config("cluster means must be pairwise distinct".into()));
            }
        }
    }
    let (lo, hi) = config.sd_range;
    if !(lo >= 0.0 && hi >= lo) || config.distance_scale <= 0.0 {
        return Err(Error::Config("invalid geometry parameters".into()));
    }
    let sds: Vec<f64> = (0..k)
        .map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo })
        .collect();
    let mut positions = Vec::with_capacity(k * config.per_cluster);
    let mut communities = Vec::with_capacity(k * config.per_cluster);
    for (c, (&(mx, my), &sd)) in config.means.iter().zip(&sds).enumerate() {
        let nx = Normal::new(mx, sd).map_err(|e| Error::Config(e.to_string()))?;
        let ny = Normal::new(my, sd).map_err(|e| Error::Config(e.to_string()))?;
        for _ in 0..config.per_cluster {
            positions.push((nx.sample(rng), ny.sample(rng)));
            communities.push(c);
        }
    }
    let n = positions.len();
    let mut distances = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let (xi, yi) = positions[i];
            let (xj, yj) = positions[j];
            let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt() / config.distance_scale;
            distances[i * n + j] = d;
            distances[j * n + i] = d;
        }
    }
    Ok(CommunityGeometry {
        communities,
        means: config.means.clone(),
        sds,
        positions,
        distances,
    })
}

/// Burn-in stopping rule, in chunks of `n` ministeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BurnInOptions {
    pub window: usize,
    pub tolerance: f64,
    pub min_chunks: usize,
    pub max_chunks: usize,
    pub max_density: f64,
}

impl Default for BurnInOptions {
    fn default() -> Self {
        Self {
            window: 5,
            tolerance: 0.005,
            min_chunks: 50,
            max_chunks: 200,
            max_density: 0.5,
        }
    }
}

/// Runs network ministeps from the empty network until the density settles.
///
/// Ministeps come in chunks of `n`; the run stops once the moving average of
/// the density over the last `window` chunks moves by less than `tolerance`
/// (after `min_chunks`), or after `max_chunks`. Only the network sub-model is
/// used and it must not contain the similarity effect, since behavior is
/// assigned afterwards.
pub fn burn_in_initial_network<R: Rng + ?Sized>(
    n: usize,
    model: &ModelSpec,
    covariates: &CovariateSet,
    options: &BurnInOptions,
    rng: &mut R,
) -> Result<NetworkState> {
    if model.network_effects.iter().any(|e| e.kind == EffectKind::SimX) {
        return Err(Error::Config(
            "burn-in model must not contain the similarity effect".into(),
        ));
    }
    let net_model = ModelSpec {
        behavior_effects: Vec::new(),
        ..model.clone()
    };
    let comp = Compiled::new(&net_model)?;
    let env = Env::new(comp.dyad_tables(covariates, n)?, model.centering, 0, 1);
    let mut s = SimState::new(
        &NetworkState::empty(n),
        &vec![0; n],
        vec![true; n],
        comp.actor_tables(covariates, n)?,
    );
    if n < 2 || model.network_rate_at(0) <= 0.0 {
        return Ok(s.to_network());
    }
    let theta: Vec<f64> = net_model.network_effects.iter().map(|e| e.parameter).collect();
    let mut streams = Streams::new(rng.random());
    let mut sc = Scratch::new(n);
    let pairs = (n * (n - 1)) as f64;
    let mut history: Vec<f64> = Vec::with_capacity(options.max_chunks);
    let window = options.window.max(1);
    let mut peak = 0.0f64;
    for chunk in 0..options.max_chunks {
        for _ in 0..n {
            let i = streams.net.random_range(0..n);
            dynamics::network_ministep(&mut s, i, &comp.net, &theta, &env, &mut sc, &mut streams.net, None);
        }
        let density = s.tie_count() as f64 / pairs;
        peak = peak.max(density);
        if density > options.max_density {
            return Err(Error::Degenerate(format!(
                "burn-in density {density:.3} exceeds {} after {} chunks; parameters {}",
                options.max_density,
                chunk + 1,
                describe(&net_model)
            )));
        }
        history.push(density);
        let t = history.len();
        if t >= options.min_chunks.max(window + 1) {
            let ma = |end: usize| history[end - window..end].iter().sum::<f64>() / window as f64;
            if (ma(t) - ma(t - 1)).abs() < options.tolerance {
                break;
            }
        }
    }
    if s.tie_count() == 0 && peak >= 0.05 {
        return Err(Error::Degenerate(format!(
            "burn-in collapsed to the empty network; parameters {}",
            describe(&net_model)
        )));
    }
    Ok(s.to_network())
}

fn describe(model: &ModelSpec) -> String {
    model
        .network_effects
        .iter()
        .map(|e| format!("{}={}", e.kind, e.parameter))
        .collect::<Vec<_>>()
        .join(", ")
}

/// I.i.d. uniform values on the integer scale, independent of the network.
pub fn assign_initial_attributes<R: Rng + ?Sized>(n: usize, scale: (i32, i32), rng: &mut R) -> Result<BehaviorState> {
    let (lo, hi) = scale;
    if hi < lo {
        return Err(Error::InvalidInput(format!("scale [{lo},{hi}] is empty")));
    }
    let values = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    BehaviorState::new(values, lo, hi)
}

fn to_sim_events(names: &[String], state: &CoevolutionState, events: &[CompositionEvent]) -> Result<Vec<SimEvent>> {
    let n = state.n();
    let mut last = 0.0;
    let mut out = Vec::with_capacity(events.len());
    for ev in events {
        if !(ev.time > 0.0 && ev.time < 1.0) || ev.time < last {
            return Err(Error::InvalidInput(format!(
                "composition times must be increasing inside (0, 1), got {}",
                ev.time
            )));
        }
        last = ev.time;
        if ev
            .leavers
            .iter()
            .chain(ev.joiners.iter().map(|j| &j.actor))
            .any(|&a| a >= n)
        {
            return Err(Error::InvalidInput(
                "composition event refers to an unknown actor".into(),
            ));
        }
        let joiners = ev
            .joiners
            .iter()
            .map(|j| {
                let attrs = j.behavior.map(|b| {
                    let covs = names
                        .iter()
                        .map(|name| {
                            j.covariates
                                .get(name)
                                .copied()
                                .unwrap_or_else(|| state.covariates.actor[name][j.actor])
                        })
                        .collect();
                    (b, covs)
                });
                (j.actor, attrs)
            })
            .collect();
        out.push(SimEvent {
            time: ev.time,
            leavers: ev.leavers.clone(),
            joiners,
        });
    }
    Ok(out)
}

/// Simulates one period of unit length from `start`.
///
/// Each present actor receives network opportunities at rate
/// `network_rate[period]` and behavior opportunities at rate
/// `behavior_rate[period]`. Composition events are applied at their times:
/// leavers lose all ties and stop acting, joiners enter as isolates. Returns
/// the end state and the events with realised joiner attributes.
pub fn simulate_period<R: Rng + ?Sized>(
    start: &CoevolutionState,
    model: &ModelSpec,
    period: usize,
    events: &[CompositionEvent],
    rng: &mut R,
) -> Result<(CoevolutionState, Vec<CompositionEvent>)> {
    model.validate()?;
    let n = start.n();
    let comp = Compiled::new(model)?;
    let names = comp.actor_table_names(&start.covariates);
    let (zmin, zmax) = start.behavior.range();
    let env = Env::new(comp.dyad_tables(&start.covariates, n)?, model.centering, zmin, zmax);
    let mut s = SimState::new(
        &start.network,
        start.behavior.values(),
        start.present.clone(),
        comp.actor_tables(&start.covariates, n)?,
    );
    let mut sim_events = to_sim_events(&names, start, events)?;
    let theta_n: Vec<f64> = model.network_effects.iter().map(|e| e.parameter).collect();
    let theta_b: Vec<f64> = model.behavior_effects.iter().map(|e| e.parameter).collect();
    let params = Params {
        net_rate: model.network_rate_at(period),
        beh_rate: if model.has_behavior() {
            model.behavior_rate_at(period)
        } else {
            0.0
        },
        net: &theta_n,
        beh: &theta_b,
    };
    let mut streams = Streams::new(rng.random());
    let mut sc = Scratch::new(n);
    dynamics::simulate_period(
        &mut s,
        &comp,
        params,
        &env,
        &mut sim_events,
        &mut streams,
        &mut sc,
        None,
    );

    let mut covariates = start.covariates.clone();
    for (k, name) in names.iter().enumerate() {
        if let Some(v) = covariates.actor.get_mut(name) {
            v.copy_from_slice(&s.cov[k]);
        }
    }
    let realised = events
        .iter()
        .zip(&sim_events)
        .map(|(ev, se)| CompositionEvent {
            time: ev.time,
            leavers: ev.leavers.clone(),
            joiners: se
                .joiners
                .iter()
                .map(|(a, attrs)| {
                    let (b, covs) = attrs.clone().unwrap_or((s.z[*a], Vec::new()));
                    Joiner {
                        actor: *a,
                        behavior: Some(b),
                        covariates: names.iter().cloned().zip(covs).collect::<BTreeMap<_, _>>(),
                    }
                })
                .collect(),
        })
        .collect();
    let end = CoevolutionState {
        network: s.to_network(),
        behavior: s.to_behavior(zmin, zmax)?,
        covariates,
        present: s.active.clone(),
    };
    Ok((end, realised))
}

/// Chains `waves - 1` periods and records every wave.
pub fn simulate_panel<R: Rng + ?Sized>(
    initial: &CoevolutionState,
    model: &ModelSpec,
    waves: usize,
    composition: &[Vec<CompositionEvent>],
    group_id: &str,
    rng: &mut R,
) -> Result<PanelData> {
    if waves < 2 {
        return Err(Error::InvalidInput(format!(
            "a panel needs at least 2 waves, got {waves}"
        )));
    }
    let mut state = initial.clone();
    let mut recorded = vec![wave_of(&state)];
    let mut realised = Vec::with_capacity(waves - 1);
    for m in 0..waves - 1 {
        let events = composition.get(m).map_or(&[][..], Vec::as_slice);
        let (next, evs) = simulate_period(&state, model, m, events, rng)?;
        state = next;
        recorded.push(wave_of(&state));
        realised.push(evs);
    }
    if realised.iter().all(Vec::is_empty) {
        realised.clear();
    }
    Ok(PanelData {
        group_id: group_id.to_string(),
        scale: initial.behavior.range(),
        waves: recorded,
        covariates: state.covariates,
        composition: realised,
    })
}

fn wave_of(state: &CoevolutionState) -> Wave {
    Wave {
        network: state.network.clone(),
        behavior: state.behavior.values().to_vec(),
        missing: vec![false; state.n()],
        present: state.present.clone(),
    }
}

/// Descriptive targets of a synthetic school cohort at wave 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CohortTargets {
    pub mean_degree: f64,
    pub degree_tolerance: f64,
    pub max_indegree: usize,
    pub scale: (i32, i32),
    /// Probability of each scale point, lowest first.
    pub behavior_probs: Vec<f64>,
    pub behavior_mean_tolerance: f64,
    pub gender_share: f64,
    pub gender_covariate: String,
    pub max_bisection_steps: usize,
}

impl Default for CohortTargets {
    fn default() -> Self {
        Self {
            mean_degree: 1.4,
            degree_tolerance: 0.2,
            max_indegree: 5,
            scale: (0, 4),
            // 7.5% at 0 and 2.8% at 4, mean 1.8
            behavior_probs: vec![0.075, 0.256, 0.491, 0.150, 0.028],
            behavior_mean_tolerance: 0.1,
            gender_share: 0.5,
            gender_covariate: "sex".into(),
            max_bisection_steps: 200,
        }
    }
}

impl CohortTargets {
    pub fn behavior_mean(&self) -> f64 {
        self.behavior_probs
            .iter()
            .enumerate()
            .map(|(k, p)| (self.scale.0 + k as i32) as f64 * p)
            .sum()
    }
}

/// Generates a sparse wave-1 cohort matching `targets`.
///
/// Gender is split exactly at `gender_share`; behavior is drawn from
/// `behavior_probs` until the sample mean is within tolerance of the target
/// mean; the network is a burn-in of the network sub-model (minus the
/// similarity effect) whose density parameter is tuned by bisection until
/// the mean degree is within tolerance and no in-degree exceeds the maximum.
pub fn synthesize_cohort_wave1<R: Rng + ?Sized>(
    n: usize,
    targets: &CohortTargets,
    model: &ModelSpec,
    burn_in: &BurnInOptions,
    rng: &mut R,
) -> Result<CoevolutionState> {
    let (lo, hi) = targets.scale;
    if targets.behavior_probs.len() != (hi - lo + 1) as usize {
        return Err(Error::Config(
            "behavior_probs must have one entry per scale point".into(),
        ));
    }
    let ones = (targets.gender_share * n as f64).floor() as usize;
    let mut sex: Vec<f64> = (0..n).map(|i| if i < ones { 1.0 } else { 0.0 }).collect();
    sex.shuffle(rng);
    let mut covariates = CovariateSet::default();
    covariates.actor.insert(targets.gender_covariate.clone(), sex);

    let weights = WeightedIndex::new(&targets.behavior_probs).map_err(|e| Error::Config(e.to_string()))?;
    let want_mean = targets.behavior_mean();
    let mut values = Vec::new();
    for attempt in 0..10_000 {
        values = (0..n).map(|_| lo + weights.sample(rng) as i32).collect();
        let mean = values.iter().map(|&v| f64::from(v)).sum::<f64>() / n.max(1) as f64;
        if (mean - want_mean).abs() <= targets.behavior_mean_tolerance {
            break;
        }
        if attempt == 9_999 {
            return Err(Error::Tuning("could not match the behavior mean".into()));
        }
    }
    let behavior = BehaviorState::new(values, lo, hi)?;

    if targets.mean_degree <= 0.0 {
        return CoevolutionState::new(NetworkState::empty(n), behavior, covariates);
    }

    let base = model.without(&[EffectKind::SimX]);
    let base = ModelSpec {
        behavior_effects: Vec::new(),
        ..base
    };
    let start = base
        .effect(&EffectKind::Density)
        .map(|e| e.parameter)
        .ok_or_else(|| Error::Config("cohort synthesis needs a density effect".into()))?;
    let (mut low, mut high) = (start - 6.0, start + 4.0);
    for _ in 0..targets.max_bisection_steps {
        let mid = 0.5 * (low + high);
        let mut trial = base.clone();
        trial.effect_mut(&EffectKind::Density).unwrap().parameter = mid;
        let net = match burn_in_initial_network(n, &trial, &covariates, burn_in, rng) {
            Ok(net) => net,
            Err(Error::Degenerate(_)) => {
                high = mid;
                continue;
            }
            Err(e) => return Err(e),
        };
        let degree = net.mean_degree();
        let max_in = (0..n).map(|j| net.in_degree(j)).max().unwrap_or(0);
        if (degree - targets.mean_degree).abs() <= targets.degree_tolerance && max_in <= targets.max_indegree {
            return CoevolutionState::new(net, behavior, covariates);
        }
        let near = (degree - targets.mean_degree).abs() <= targets.degree_tolerance;
        // redraw at the same parameter once the bracket is narrow or only the in-degree cap failed
        if near || high - low < 0.02 {
            continue;
        }
        if degree > targets.mean_degree {
            high = mid;
        } else {
            low = mid;
        }
    }
    Err(Error::Tuning(format!(
        "density bisection did not reach mean degree {} within {} steps",
        targets.mean_degree, targets.max_bisection_steps
    )))
}
