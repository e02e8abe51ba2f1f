//! Goodness-of-fit checks: degree distributions, triad census, density and
//! behavior distribution compared against simulated reference distributions
//! through Monte-Carlo rank p-values.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, NetworkState};
use crate::seeds;
use crate::simulator::{simulate_period, CoevolutionState};

/// Names of the 16 directed triad classes in census order.
pub const TRIAD_CLASSES: [&str; 16] = [
    "003", "012", "102", "021D", "021U", "021C", "111D", "111U", "030T", "030C", "201", "120D", "120U", "120C", "210",
    "300",
];

/// Class number (1-based) of a triad given its tie code: bit values 1, 2, 4,
/// 8, 16, 32 stand for v->u, u->v, v->w, w->v, u->w, w->u.
const TRICODES: [u8; 64] = [
    1, 2, 2, 3, 2, 4, 6, 8, 2, 6, 5, 7, 3, 8, 7, 11, 2, 6, 4, 8, 5, 9, 9, 13, 6, 10, 9, 14, 7, 14, 12, 15, 2, 5, 6, 7,
    6, 9, 10, 14, 4, 9, 9, 12, 8, 13, 14, 15, 3, 7, 8, 11, 7, 12, 14, 15, 8, 14, 13, 15, 11, 15, 15, 16,
];

/// Census class index (0-based) of the triad `(v, u, w)`.
pub fn triad_class(net: &NetworkState, v: usize, u: usize, w: usize) -> usize {
    let code = usize::from(net.has_tie(v, u))
        | usize::from(net.has_tie(u, v)) << 1
        | usize::from(net.has_tie(v, w)) << 2
        | usize::from(net.has_tie(w, v)) << 3
        | usize::from(net.has_tie(u, w)) << 4
        | usize::from(net.has_tie(w, u)) << 5;
    usize::from(TRICODES[code]) - 1
}

/// Counts of the 16 triad classes over all unordered triples.
pub fn triad_census(net: &NetworkState) -> Result<[u64; 16]> {
    let n = net.n();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "triad census needs at least 3 actors, got {n}"
        )));
    }
    let mut census = [0u64; 16];
    for v in 0..n {
        for u in v + 1..n {
            for w in u + 1..n {
                census[triad_class(net, v, u, w)] += 1;
            }
        }
    }
    Ok(census)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GofKind {
    OutDegree,
    InDegree,
    TriadCensus,
    Density,
    BehaviorDistribution,
}

impl GofKind {
    pub const ALL: [GofKind; 5] = [
        GofKind::OutDegree,
        GofKind::InDegree,
        GofKind::TriadCensus,
        GofKind::Density,
        GofKind::BehaviorDistribution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::OutDegree => "out_degree",
            Self::InDegree => "in_degree",
            Self::TriadCensus => "triad_census",
            Self::Density => "density",
            Self::BehaviorDistribution => "behavior_distribution",
        }
    }
}

/// Degree distributions are binned as `0, 1, ..., DEGREE_BINS - 1` with the
/// last bin collecting larger degrees.
pub const DEGREE_BINS: usize = 11;

/// Statistic vector of one kind, over present actors.
pub fn statistic(state: &CoevolutionState, kind: GofKind) -> Result<Vec<f64>> {
    let present: Vec<usize> = (0..state.n()).filter(|&i| state.present[i]).collect();
    let net = state.network.induced(&present);
    let n = net.n();
    Ok(match kind {
        GofKind::OutDegree | GofKind::InDegree => {
            let mut bins = vec![0.0; DEGREE_BINS];
            for i in 0..n {
                let d = if kind == GofKind::OutDegree {
                    net.out_degree(i)
                } else {
                    net.in_degree(i)
                };
                bins[d.min(DEGREE_BINS - 1)] += 1.0;
            }
            bins
        }
        GofKind::TriadCensus => triad_census(&net)?.iter().map(|&c| c as f64).collect(),
        GofKind::Density => vec![net.density()],
        GofKind::BehaviorDistribution => {
            let (lo, hi) = state.behavior.range();
            let mut bins = vec![0.0; (hi - lo + 1) as usize];
            for &i in &present {
                bins[(state.behavior.get(i) - lo) as usize] += 1.0;
            }
            bins
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub kind: GofKind,
    pub observed: Vec<f64>,
    pub simulated: Vec<Vec<f64>>,
    pub observed_discrepancy: f64,
    /// `None` when no component varies across simulations.
    pub p_value: Option<f64>,
}

/// Variance-standardized squared distance of `x` from the simulated mean.
fn discrepancy(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    x.iter()
        .zip(mean)
        .zip(var)
        .map(|((a, m), &v)| {
            let d = (a - m).powi(2);
            if v > 1e-12 {
                d / v
            } else if d > 1e-12 {
                // outside the support of a constant component
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum()
}

/// Monte-Carlo rank p-value of `observed` among `simulated` vectors.
pub fn rank_p_value(observed: &[f64], simulated: &[Vec<f64>]) -> (f64, Option<f64>) {
    let runs = simulated.len();
    let k = observed.len();
    let mut mean = vec![0.0; k];
    for s in simulated {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / runs as f64;
        }
    }
    let mut var = vec![0.0; k];
    for s in simulated {
        for ((q, v), m) in var.iter_mut().zip(s).zip(&mean) {
            *q += (v - m).powi(2) / (runs.max(2) - 1) as f64;
        }
    }
    let obs = discrepancy(observed, &mean, &var);
    if var.iter().all(|&v| v <= 1e-12) {
        return (obs, None);
    }
    let exceed = simulated
        .iter()
        .filter(|s| discrepancy(s, &mean, &var) >= obs - 1e-12)
        .count();
    (obs, Some((1 + exceed) as f64 / (runs + 1) as f64))
}

/// Simulates period `period` of the model `runs` times from `start` and
/// compares each statistic kind of `observed` with the simulated
/// distribution.
pub fn gof_check(
    model: &ModelSpec,
    period: usize,
    start: &CoevolutionState,
    observed: &CoevolutionState,
    kinds: &[GofKind],
    runs: usize,
    seed: u64,
) -> Result<Vec<GofResult>> {
    if runs < 100 {
        return Err(Error::InvalidInput(format!(
            "goodness of fit needs at least 100 runs, got {runs}"
        )));
    }
    let states: Vec<CoevolutionState> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, r as u64));
            simulate_period(start, model, period, &[], &mut rng).map(|(s, _)| s)
        })
        .collect::<Result<_>>()?;
    kinds
        .iter()
        .map(|&kind| {
            let obs = statistic(observed, kind)?;
            let sims = states.iter().map(|s| statistic(s, kind)).collect::<Result<Vec<_>>>()?;
            let (d, p) = rank_p_value(&obs, &sims);
            Ok(GofResult {
                kind,
                observed: obs,
                simulated: sims,
                observed_discrepancy: d,
                p_value: p,
            })
        })
        .collect()
}

/// Long-format CSV `kind,component,run,value`; run `observed` marks the
/// observed vector.
pub fn gof_csv(results: &[GofResult]) -> String {
    let mut s = String::from("kind,component,run,value\n");
    for r in results {
        for (c, v) in r.observed.iter().enumerate() {
            let _ = writeln!(s, "{},{c},observed,{v}", r.kind.name());
        }
        for (run, sim) in r.simulated.iter().enumerate() {
            for (c, v) in sim.iter().enumerate() {
                let _ = writeln!(s, "{},{c},{run},{v}", r.kind.name());
            }
        }
    }
    s
}
