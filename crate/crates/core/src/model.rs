//! Actor-oriented model primitives: network and behavior states, covariates,
//! effect statistics and the multinomial-logit choice rule.
//!
//! Every effect is an ego-centred statistic `s_ik(x, z)`. The network
//! objective of actor `i` is `sum_k theta_k * s_ik` over the network effects,
//! the behavior objective the same sum over the behavior effects. A ministep
//! picks one alternative state with probability proportional to
//! `exp(objective)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directed binary network on `n` actors, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct NetworkState {
    n: usize,
    ties: Vec<u8>,
}

impl NetworkState {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            ties: vec![0; n * n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut net = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!("edge ({i},{j}) outside 0..{n}")));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("self-tie at actor {i}")));
            }
            net.set_tie(i, j, true);
        }
        Ok(net)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_tie(&self, i: usize, j: usize) -> bool {
        self.ties[i * self.n + j] != 0
    }

    #[inline]
    pub fn tie(&self, i: usize, j: usize) -> u8 {
        self.ties[i * self.n + j]
    }

    /// Sets `i -> j`. Self-ties are ignored.
    pub fn set_tie(&mut self, i: usize, j: usize, present: bool) {
        if i != j {
            self.ties[i * self.n + j] = u8::from(present);
        }
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        if i != j {
            let k = i * self.n + j;
            self.ties[k] ^= 1;
        }
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.ties[i * self.n..(i + 1) * self.n]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&t| t != 0).count()
    }

    pub fn in_degree(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| self.has_tie(i, j)).count()
    }

    pub fn tie_count(&self) -> usize {
        self.ties.iter().filter(|&&t| t != 0).count()
    }

    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.tie_count() as f64 / (self.n * (self.n - 1)) as f64
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.tie_count() as f64 / self.n as f64
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.has_tie(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Induced subgraph on `actors`, in the given order.
    pub fn induced(&self, actors: &[usize]) -> Self {
        let m = actors.len();
        let mut sub = Self::empty(m);
        for (a, &i) in actors.iter().enumerate() {
            for (b, &j) in actors.iter().enumerate() {
                if self.has_tie(i, j) {
                    sub.ties[a * m + b] = 1;
                }
            }
        }
        sub
    }
}

impl TryFrom<Vec<Vec<u8>>> for NetworkState {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.len();
        let mut ties = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "adjacency row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &t) in row.iter().enumerate() {
                if t > 1 {
                    return Err(Error::InvalidInput(format!("tie ({i},{j}) = {t} is not binary")));
                }
                if i == j && t != 0 {
                    return Err(Error::InvalidInput(format!("self-tie at actor {i}")));
                }
                ties.push(t);
            }
        }
        Ok(Self { n, ties })
    }
}

impl From<NetworkState> for Vec<Vec<u8>> {
    fn from(net: NetworkState) -> Self {
        net.ties.chunks(net.n.max(1)).take(net.n).map(<[u8]>::to_vec).collect()
    }
}

/// Integer behavior values on a closed scale `[min, max]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorState {
    values: Vec<i32>,
    min: i32,
    max: i32,
}

impl BehaviorState {
    pub fn new(values: Vec<i32>, min: i32, max: i32) -> Result<Self> {
        if max < min {
            return Err(Error::InvalidInput(format!("behavior scale [{min},{max}] is empty")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| v < min || v > max) {
            return Err(Error::InvalidInput(format!(
                "behavior value {v} of actor {i} outside [{min},{max}]"
            )));
        }
        Ok(Self { values, min, max })
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn get(&self, i: usize) -> i32 {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, v: i32) -> Result<()> {
        if v < self.min || v > self.max {
            return Err(Error::InvalidInput(format!(
                "value {v} outside [{},{}]",
                self.min, self.max
            )));
        }
        self.values[i] = v;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn range(&self) -> (i32, i32) {
        (self.min, self.max)
    }

    /// Width of the scale, `max - min`. Similarity needs this to be positive.
    pub fn width(&self) -> i32 {
        self.max - self.min
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().map(|&v| f64::from(v)).sum::<f64>() / self.values.len() as f64
    }

    pub fn restricted(&self, actors: &[usize]) -> Self {
        Self {
            values: actors.iter().map(|&i| self.values[i]).collect(),
            min: self.min,
            max: self.max,
        }
    }
}

/// Named actor-level and dyadic covariates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CovariateSet {
    #[serde(default)]
    pub actor: BTreeMap<String, Vec<f64>>,
    /// Row-major `n x n` matrices; the diagonal is ignored.
    #[serde(default)]
    pub dyadic: BTreeMap<String, Vec<f64>>,
}

impl CovariateSet {
    pub fn actor_covariate(&self, name: &str) -> Result<&[f64]> {
        self.actor
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownCovariate(name.to_string()))
    }

    pub fn dyadic_covariate(&self, name: &str) -> Result<&[f64]> {
        self.dyadic
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownCovariate(name.to_string()))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, v) in &self.actor {
            if v.len() != n {
                return Err(Error::InvalidInput(format!(
                    "actor covariate `{name}` has {} entries, expected {n}",
                    v.len()
                )));
            }
        }
        for (name, v) in &self.dyadic {
            if v.len() != n * n {
                return Err(Error::InvalidInput(format!(
                    "dyadic covariate `{name}` has {} entries, expected {}",
                    v.len(),
                    n * n
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("dyadic covariate `{name}` is not finite")));
            }
        }
        Ok(())
    }

    /// Copy whose dyadic covariates have zero mean over off-diagonal pairs.
    pub fn with_centered_dyadic(&self, n: usize) -> Self {
        let dyadic = self
            .dyadic
            .iter()
            .map(|(k, v)| (k.clone(), center_dyadic(v, n)))
            .collect();
        Self {
            actor: self.actor.clone(),
            dyadic,
        }
    }

    pub fn restricted(&self, actors: &[usize], n: usize) -> Self {
        let m = actors.len();
        let actor = self
            .actor
            .iter()
            .map(|(k, v)| (k.clone(), actors.iter().map(|&i| v[i]).collect()))
            .collect();
        let dyadic = self
            .dyadic
            .iter()
            .map(|(k, v)| {
                let mut sub = vec![0.0; m * m];
                for (a, &i) in actors.iter().enumerate() {
                    for (b, &j) in actors.iter().enumerate() {
                        sub[a * m + b] = v[i * n + j];
                    }
                }
                (k.clone(), sub)
            })
            .collect();
        Self { actor, dyadic }
    }
}

/// Subtracts the off-diagonal mean of a row-major `n x n` matrix; the
/// diagonal is set to zero.
pub fn center_dyadic(values: &[f64], n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; values.len()];
    }
    let total: f64 = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| i * n + j))
        .map(|k| values[k])
        .sum();
    let mean = total / (n * (n - 1)) as f64;
    let mut out: Vec<f64> = values.iter().map(|v| v - mean).collect();
    for i in 0..n {
        out[i * n + i] = 0.0;
    }
    out
}

/// Which sub-model an effect belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Network,
    Behavior,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EffectKind {
    Density,
    Recip,
    TransTrip,
    Cycle3,
    TransRecTrip,
    /// Dyadic covariate main effect, `sum_j x_ij w_ij`.
    DyadX(String),
    /// Same value on an actor covariate.
    SameX(String),
    /// Similarity on the behavior variable (selection).
    SimX,
    Linear,
    Quad,
    /// Total similarity to alters (influence).
    TotSim,
    /// Ego value times average alter value (influence).
    AvAlt,
}

impl EffectKind {
    /// Parses a short effect name as used in model tables.
    pub fn parse(name: &str, covariate: Option<&str>) -> Result<Self> {
        let need_cov = |what: &str| -> Result<String> {
            covariate
                .filter(|c| !c.is_empty())
                .map(str::to_string)
                .ok_or_else(|| Error::Config(format!("effect `{what}` requires a covariate name")))
        };
        let kind = match name {
            "density" => Self::Density,
            "recip" => Self::Recip,
            "transTrip" => Self::TransTrip,
            "cycle3" => Self::Cycle3,
            "transRecTrip" => Self::TransRecTrip,
            "X" | "dyadX" => Self::DyadX(need_cov(name)?),
            "sameX" => Self::SameX(need_cov(name)?),
            "simX" => Self::SimX,
            "linear" => Self::Linear,
            "quad" => Self::Quad,
            "totSim" => Self::TotSim,
            "avAlt" => Self::AvAlt,
            other => return Err(Error::Config(format!("unknown effect name `{other}`"))),
        };
        if covariate.is_some_and(|c| !c.is_empty()) && !matches!(kind, Self::DyadX(_) | Self::SameX(_)) {
            return Err(Error::Config(format!("effect `{name}` takes no covariate")));
        }
        Ok(kind)
    }

    /// Short table name, without covariate.
    pub fn short_name(&self) -> &'static str {
        match self {
            Self::Density => "density",
            Self::Recip => "recip",
            Self::TransTrip => "transTrip",
            Self::Cycle3 => "cycle3",
            Self::TransRecTrip => "transRecTrip",
            Self::DyadX(_) => "X",
            Self::SameX(_) => "sameX",
            Self::SimX => "simX",
            Self::Linear => "linear",
            Self::Quad => "quad",
            Self::TotSim => "totSim",
            Self::AvAlt => "avAlt",
        }
    }

    pub fn covariate(&self) -> Option<&str> {
        match self {
            Self::DyadX(c) | Self::SameX(c) => Some(c),
            _ => None,
        }
    }

    pub fn target(&self) -> Target {
        match self {
            Self::Linear | Self::Quad | Self::TotSim | Self::AvAlt => Target::Behavior,
            _ => Target::Network,
        }
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.covariate() {
            Some(c) => write!(f, "{}({c})", self.short_name()),
            None => f.write_str(self.short_name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    pub kind: EffectKind,
    pub parameter: f64,
}

impl Effect {
    pub fn new(kind: EffectKind, parameter: f64) -> Self {
        Self { kind, parameter }
    }
}

/// Centering constants shared by simulation and estimation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centering {
    /// Mean behavior `z_bar`.
    pub behavior_mean: f64,
    /// Mean similarity over ordered pairs, `sim_hat`.
    pub similarity_mean: f64,
}

impl Default for Centering {
    fn default() -> Self {
        Self {
            behavior_mean: 0.0,
            similarity_mean: 0.0,
        }
    }
}

impl Centering {
    /// Centering from a set of observed values on a scale of width `width`.
    pub fn from_values(values: &[i32], width: i32) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let behavior_mean = values.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64;
        if n < 2 || width < 1 {
            return Self {
                behavior_mean,
                similarity_mean: 1.0,
            };
        }
        // Pairwise similarity through a histogram of values, O(n + k^2).
        let lo = *values.iter().min().unwrap();
        let hi = *values.iter().max().unwrap();
        let k = (hi - lo + 1) as usize;
        let mut counts = vec![0f64; k];
        for &v in values {
            counts[(v - lo) as usize] += 1.0;
        }
        let mut total = 0.0;
        for a in 0..k {
            for b in 0..k {
                let pairs = if a == b {
                    counts[a] * (counts[a] - 1.0)
                } else {
                    counts[a] * counts[b]
                };
                total += pairs * similarity(a as i32, b as i32, width);
            }
        }
        Self {
            behavior_mean,
            similarity_mean: total / (n * (n - 1)) as f64,
        }
    }
}

/// A full actor-oriented model: ordered effects per sub-model and rates per
/// period. Rate vectors shorter than the number of periods repeat their
/// last entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub network_effects: Vec<Effect>,
    pub behavior_effects: Vec<Effect>,
    pub network_rate: Vec<f64>,
    pub behavior_rate: Vec<f64>,
    pub centering: Centering,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        check_list(&self.network_effects, Target::Network)?;
        check_list(&self.behavior_effects, Target::Behavior)?;
        for (what, rates) in [("network", &self.network_rate), ("behavior", &self.behavior_rate)] {
            if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
                return Err(Error::Config(format!("{what} rate {r} must be finite and nonnegative")));
            }
        }
        if self.network_rate.is_empty() {
            return Err(Error::Config("network rate missing".into()));
        }
        if !self.behavior_effects.is_empty() && self.behavior_rate.is_empty() {
            return Err(Error::Config("behavior effects given without a behavior rate".into()));
        }
        let c = &self.centering;
        if !c.behavior_mean.is_finite() || !(0.0..=1.0).contains(&c.similarity_mean) {
            return Err(Error::Config(format!("invalid centering constants {c:?}")));
        }
        Ok(())
    }

    pub fn network_rate_at(&self, period: usize) -> f64 {
        rate_at(&self.network_rate, period)
    }

    pub fn behavior_rate_at(&self, period: usize) -> f64 {
        rate_at(&self.behavior_rate, period)
    }

    pub fn has_behavior(&self) -> bool {
        !self.behavior_effects.is_empty()
    }

    pub fn effect(&self, kind: &EffectKind) -> Option<&Effect> {
        self.network_effects
            .iter()
            .chain(&self.behavior_effects)
            .find(|e| &e.kind == kind)
    }

    pub fn effect_mut(&mut self, kind: &EffectKind) -> Option<&mut Effect> {
        self.network_effects
            .iter_mut()
            .chain(self.behavior_effects.iter_mut())
            .find(|e| &e.kind == kind)
    }

    /// Copy of the model without the listed effects.
    pub fn without(&self, kinds: &[EffectKind]) -> Self {
        let keep = |e: &&Effect| !kinds.contains(&e.kind);
        Self {
            network_effects: self.network_effects.iter().filter(keep).cloned().collect(),
            behavior_effects: self.behavior_effects.iter().filter(keep).cloned().collect(),
            ..self.clone()
        }
    }
}

fn rate_at(rates: &[f64], period: usize) -> f64 {
    match rates.get(period) {
        Some(&r) => r,
        None => rates.last().copied().unwrap_or(0.0),
    }
}

fn check_list(effects: &[Effect], target: Target) -> Result<()> {
    for (a, e) in effects.iter().enumerate() {
        if e.kind.target() != target {
            return Err(Error::Config(format!(
                "effect `{}` does not belong to the {target:?} sub-model",
                e.kind
            )));
        }
        if !e.parameter.is_finite() {
            return Err(Error::Config(format!("effect `{}` has a non-finite parameter", e.kind)));
        }
        if effects[..a].iter().any(|o| o.kind == e.kind) {
            return Err(Error::Config(format!("effect `{}` listed twice", e.kind)));
        }
    }
    Ok(())
}

/// Borrowed view of the quantities statistics depend on. Cross-lagged
/// statistics combine a network and a behavior vector from different waves.
#[derive(Clone, Copy, Debug)]
pub struct StateView<'a> {
    pub network: &'a NetworkState,
    pub behavior: &'a BehaviorState,
    pub covariates: &'a CovariateSet,
}

/// `1 - |a - b| / width`.
#[inline]
pub fn similarity(a: i32, b: i32, width: i32) -> f64 {
    1.0 - f64::from((a - b).abs()) / f64::from(width)
}

/// Ego-centred statistic `s_ik` of `effect` for actor `i`.
pub fn actor_statistic(view: StateView<'_>, i: usize, effect: &EffectKind, centering: &Centering) -> Result<f64> {
    let net = view.network;
    let n = net.n();
    if i >= n {
        return Err(Error::InvalidInput(format!("actor {i} outside 0..{n}")));
    }
    let z = view.behavior;
    let x = |a: usize, b: usize| f64::from(net.tie(a, b));
    let zc = |a: usize| f64::from(z.get(a)) - centering.behavior_mean;
    let value = match effect {
        EffectKind::Density => net.out_degree(i) as f64,
        EffectKind::Recip => (0..n).map(|j| x(i, j) * x(j, i)).sum(),
        EffectKind::TransTrip => triples(n, |j, h| x(i, j) * x(j, h) * x(i, h)),
        EffectKind::Cycle3 => triples(n, |j, h| x(i, j) * x(j, h) * x(h, i)),
        EffectKind::TransRecTrip => triples(n, |j, h| x(i, j) * x(j, h) * x(i, h) * x(j, i)),
        EffectKind::DyadX(name) => {
            let w = view.covariates.dyadic_covariate(name)?;
            (0..n).filter(|&j| j != i).map(|j| x(i, j) * w[i * n + j]).sum()
        }
        EffectKind::SameX(name) => {
            let v = view.covariates.actor_covariate(name)?;
            (0..n).filter(|&j| j != i && v[i] == v[j]).map(|j| x(i, j)).sum()
        }
        EffectKind::SimX | EffectKind::TotSim => {
            let width = z.width().max(1);
            (0..n)
                .filter(|&j| j != i)
                .map(|j| x(i, j) * (similarity(z.get(i), z.get(j), width) - centering.similarity_mean))
                .sum()
        }
        EffectKind::Linear => zc(i),
        EffectKind::Quad => zc(i) * zc(i),
        EffectKind::AvAlt => {
            let deg = net.out_degree(i);
            if deg == 0 {
                0.0
            } else {
                let alters: f64 = (0..n).map(|j| x(i, j) * zc(j)).sum();
                zc(i) * alters / deg as f64
            }
        }
    };
    Ok(value)
}

fn triples(n: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
    let mut total = 0.0;
    for j in 0..n {
        for h in 0..n {
            if j != h {
                total += f(j, h);
            }
        }
    }
    total
}

/// Network-effect statistics of actor `i` for each ministep alternative.
///
/// Row `j != i` is the state with tie `i -> j` toggled; row `i` is the
/// unchanged state. Columns follow `effects`.
pub fn change_statistics_network(
    view: StateView<'_>,
    i: usize,
    effects: &[EffectKind],
    centering: &Centering,
) -> Result<Vec<Vec<f64>>> {
    let n = view.network.n();
    if i >= n {
        return Err(Error::InvalidInput(format!("actor {i} outside 0..{n}")));
    }
    let mut alt = view.network.clone();
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        alt.toggle(i, j);
        let alt_view = StateView { network: &alt, ..view };
        let row = effects
            .iter()
            .map(|e| actor_statistic(alt_view, i, e, centering))
            .collect::<Result<Vec<_>>>()?;
        alt.toggle(i, j);
        rows.push(row);
    }
    Ok(rows)
}

/// Behavior-effect statistics of actor `i` for each feasible step
/// `delta` in `{-1, 0, +1}`.
pub fn change_statistics_behavior(
    view: StateView<'_>,
    i: usize,
    effects: &[EffectKind],
    centering: &Centering,
) -> Result<Vec<(i32, Vec<f64>)>> {
    let n = view.behavior.len();
    if i >= n {
        return Err(Error::InvalidInput(format!("actor {i} outside 0..{n}")));
    }
    let (lo, hi) = view.behavior.range();
    let mut alt = view.behavior.clone();
    let current = alt.get(i);
    let mut out = Vec::with_capacity(3);
    for delta in -1..=1 {
        let v = current + delta;
        if v < lo || v > hi {
            continue;
        }
        alt.set(i, v)?;
        let alt_view = StateView { behavior: &alt, ..view };
        let row = effects
            .iter()
            .map(|e| actor_statistic(alt_view, i, e, centering))
            .collect::<Result<Vec<_>>>()?;
        out.push((delta, row));
    }
    Ok(out)
}

/// Multinomial-logit probabilities `exp(theta . s_a) / sum_b exp(theta . s_b)`.
pub fn choice_probabilities(theta: &[f64], stats: &[Vec<f64>]) -> Vec<f64> {
    let mut eta: Vec<f64> = stats
        .iter()
        .map(|row| row.iter().zip(theta).map(|(s, t)| s * t).sum())
        .collect();
    softmax_in_place(&mut eta);
    eta
}

/// Overwrites linear predictors with their softmax; returns the normalizer
/// relative to the maximum.
pub fn softmax_in_place(eta: &mut [f64]) -> f64 {
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for e in eta.iter_mut() {
        *e = (*e - max).exp();
        total += *e;
    }
    for e in eta.iter_mut() {
        *e /= total;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view<'a>(net: &'a NetworkState, z: &'a BehaviorState, cov: &'a CovariateSet) -> StateView<'a> {
        StateView {
            network: net,
            behavior: z,
            covariates: cov,
        }
    }

    #[test]
    fn similarity_values() {
        assert_eq!(similarity(1, 3, 2), 0.0);
        assert_eq!(similarity(2, 2, 2), 1.0);
        assert_eq!(similarity(2, 3, 2), 0.5);
        assert_eq!(similarity(3, 2, 2), similarity(2, 3, 2));
    }

    #[test]
    fn three_node_transitive_triplet() {
        // 1->2, 2->3, 1->3 with actors numbered from zero.
        let net = NetworkState::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let z = BehaviorState::new(vec![1, 1, 1], 1, 3).unwrap();
        let cov = CovariateSet::default();
        let c = Centering::default();
        let v = view(&net, &z, &cov);
        assert_eq!(actor_statistic(v, 0, &EffectKind::TransTrip, &c).unwrap(), 1.0);
        assert_eq!(actor_statistic(v, 0, &EffectKind::Recip, &c).unwrap(), 0.0);
        assert_eq!(actor_statistic(v, 0, &EffectKind::Cycle3, &c).unwrap(), 0.0);
    }

    #[test]
    fn mutual_dyad() {
        let net = NetworkState::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let z = BehaviorState::new(vec![1, 1], 1, 3).unwrap();
        let cov = CovariateSet::default();
        let v = view(&net, &z, &cov);
        let c = Centering::default();
        assert_eq!(actor_statistic(v, 0, &EffectKind::Recip, &c).unwrap(), 1.0);
        assert_eq!(actor_statistic(v, 0, &EffectKind::Density, &c).unwrap(), 1.0);
    }

    #[test]
    fn empty_network_structural_effects_vanish() {
        let net = NetworkState::empty(4);
        let z = BehaviorState::new(vec![1, 2, 3, 1], 1, 3).unwrap();
        let mut cov = CovariateSet::default();
        cov.dyadic.insert("dist".into(), vec![1.5; 16]);
        cov.actor.insert("sex".into(), vec![0.0, 1.0, 0.0, 1.0]);
        let c = Centering {
            behavior_mean: 1.75,
            similarity_mean: 0.4,
        };
        let v = view(&net, &z, &cov);
        for kind in [
            EffectKind::Density,
            EffectKind::Recip,
            EffectKind::TransTrip,
            EffectKind::Cycle3,
            EffectKind::TransRecTrip,
            EffectKind::DyadX("dist".into()),
            EffectKind::SameX("sex".into()),
            EffectKind::SimX,
        ] {
            for i in 0..4 {
                assert_eq!(actor_statistic(v, i, &kind, &c).unwrap(), 0.0, "{kind}");
            }
        }
    }

    #[test]
    fn unknown_covariate_is_an_error() {
        let net = NetworkState::empty(2);
        let z = BehaviorState::new(vec![1, 1], 1, 3).unwrap();
        let cov = CovariateSet::default();
        let err = actor_statistic(
            view(&net, &z, &cov),
            0,
            &EffectKind::DyadX("geo".into()),
            &Centering::default(),
        );
        assert!(matches!(err, Err(Error::UnknownCovariate(name)) if name == "geo"));
    }

    #[test]
    fn network_alternatives_density() {
        let net = NetworkState::empty(3);
        let z = BehaviorState::new(vec![1, 1, 1], 1, 3).unwrap();
        let cov = CovariateSet::default();
        let rows =
            change_statistics_network(view(&net, &z, &cov), 0, &[EffectKind::Density], &Centering::default()).unwrap();
        // alternatives: stay (row 0), toggle 0->1, toggle 0->2
        assert_eq!(rows[1][0], 1.0);
        assert_eq!(rows[2][0], 1.0);
        assert_eq!(rows[0][0], 0.0);

        let net = NetworkState::from_edges(3, &[(0, 1)]).unwrap();
        let rows =
            change_statistics_network(view(&net, &z, &cov), 0, &[EffectKind::Density], &Centering::default()).unwrap();
        assert_eq!(rows[1][0], 0.0);
    }

    #[test]
    fn full_triad_recip_alternatives() {
        let edges: Vec<_> = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let net = NetworkState::from_edges(3, &edges).unwrap();
        let z = BehaviorState::new(vec![1, 1, 1], 1, 3).unwrap();
        let cov = CovariateSet::default();
        let rows =
            change_statistics_network(view(&net, &z, &cov), 0, &[EffectKind::Recip], &Centering::default()).unwrap();
        let recip: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        // toggle 0->1, toggle 0->2 each drop one mutual dyad; stay keeps both
        assert_eq!(recip, vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn behavior_alternatives_respect_scale() {
        let net = NetworkState::empty(2);
        let cov = CovariateSet::default();
        let c = Centering::default();
        let z = BehaviorState::new(vec![3, 1], 1, 3).unwrap();
        let top = change_statistics_behavior(view(&net, &z, &cov), 0, &[EffectKind::Linear], &c).unwrap();
        assert_eq!(top.iter().map(|a| a.0).collect::<Vec<_>>(), vec![-1, 0]);
        let bottom = change_statistics_behavior(view(&net, &z, &cov), 1, &[EffectKind::Linear], &c).unwrap();
        assert_eq!(bottom.iter().map(|a| a.0).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn av_alt_alternatives() {
        // 1->2, z = (2, 3) on [1, 3]; centering 2.5
        let net = NetworkState::from_edges(2, &[(0, 1)]).unwrap();
        let z = BehaviorState::new(vec![2, 3], 1, 3).unwrap();
        let cov = CovariateSet::default();
        let c = Centering {
            behavior_mean: 2.5,
            similarity_mean: 0.5,
        };
        let alts = change_statistics_behavior(view(&net, &z, &cov), 0, &[EffectKind::AvAlt], &c).unwrap();
        // (z' - 2.5) * (3 - 2.5) for z' = 1, 2, 3
        let got: Vec<f64> = alts.iter().map(|a| a.1[0]).collect();
        assert_eq!(got, vec![-0.75, -0.25, 0.25]);
        // ego without alters contributes zero
        let v = actor_statistic(view(&net, &z, &cov), 1, &EffectKind::AvAlt, &c).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn probabilities() {
        let p = choice_probabilities(&[0.3], &vec![vec![1.0]; 5]);
        let zero = choice_probabilities(&[0.0], &[vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]]);
        for q in p.iter().chain(&zero) {
            assert!((q - 0.2).abs() < 1e-15);
        }
        let p = choice_probabilities(&[1.0], &[vec![0.0], vec![1.0]]);
        let e = std::f64::consts::E;
        assert!((p[0] - 1.0 / (1.0 + e)).abs() < 1e-12);
        assert!((p[1] - e / (1.0 + e)).abs() < 1e-12);
        assert!((p[0] - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn softmax_survives_large_predictors() {
        let p = choice_probabilities(&[1.0], &[vec![1000.0], vec![999.0], vec![-1000.0]]);
        assert!(p.iter().all(|q| q.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centering_from_values() {
        let c = Centering::from_values(&[1, 2, 3], 2);
        assert!((c.behavior_mean - 2.0).abs() < 1e-12);
        // ordered pairs: sim(1,2)=.5, sim(1,3)=0, sim(2,3)=.5, each twice
        assert!((c.similarity_mean - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn effect_names_round_trip() {
        for (name, cov) in [
            ("density", None),
            ("X", Some("dist")),
            ("sameX", Some("sex")),
            ("avAlt", None),
        ] {
            let k = EffectKind::parse(name, cov).unwrap();
            assert_eq!(k.short_name(), name);
            assert_eq!(k.covariate(), cov);
        }
        assert!(EffectKind::parse("popAlt", None).is_err());
        assert!(EffectKind::parse("X", None).is_err());
        assert!(EffectKind::parse("density", Some("dist")).is_err());
    }

    #[test]
    fn model_validation() {
        let mut m = ModelSpec {
            network_effects: vec![
                Effect::new(EffectKind::Density, -2.0),
                Effect::new(EffectKind::Linear, 0.1),
            ],
            behavior_effects: vec![],
            network_rate: vec![3.0],
            behavior_rate: vec![],
            centering: Centering::default(),
        };
        assert!(m.validate().is_err());
        m.network_effects.pop();
        assert!(m.validate().is_ok());
        m.network_effects.push(Effect::new(EffectKind::Density, -1.0));
        assert!(m.validate().is_err());
    }

    #[test]
    fn network_rows_serialize_as_adjacency() {
        let net = NetworkState::from_edges(3, &[(0, 1), (2, 0)]).unwrap();
        let json = serde_json::to_string(&net).unwrap();
        assert_eq!(json, "[[0,1,0],[0,0,0],[1,0,0]]");
        let back: NetworkState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, net);
        assert!(serde_json::from_str::<NetworkState>("[[1,0],[0,0]]").is_err());
        assert!(serde_json::from_str::<NetworkState>("[[0,2],[0,0]]").is_err());
    }
}
