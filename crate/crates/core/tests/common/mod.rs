#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saompower::model::{BehaviorState, Centering, CovariateSet, Effect, EffectKind, ModelSpec, NetworkState};
use saompower::simulator::CoevolutionState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Network with independent ties of probability `p` and behavior on 1..=5.
pub fn random_state(n: usize, p: f64, rng: &mut impl Rng) -> CoevolutionState {
    let mut net = NetworkState::empty(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(p) {
                net.set_tie(i, j, true);
            }
        }
    }
    let z = BehaviorState::new((0..n).map(|_| rng.random_range(1..=5)).collect(), 1, 5).unwrap();
    let mut cov = CovariateSet::default();
    cov.actor.insert("sex".into(), (0..n).map(|i| (i % 2) as f64).collect());
    CoevolutionState::new(net, z, cov).unwrap()
}

pub fn coevolution_model(sim: f64, influence: f64) -> ModelSpec {
    ModelSpec {
        network_effects: vec![
            Effect::new(EffectKind::Density, -1.8),
            Effect::new(EffectKind::Recip, 1.5),
            Effect::new(EffectKind::TransTrip, 0.3),
            Effect::new(EffectKind::SimX, sim),
        ],
        behavior_effects: vec![
            Effect::new(EffectKind::Linear, 0.1),
            Effect::new(EffectKind::Quad, -0.1),
            Effect::new(EffectKind::TotSim, influence),
        ],
        network_rate: vec![4.0],
        behavior_rate: vec![2.0],
        centering: Centering::default(),
    }
}

pub fn network_model(density: f64) -> ModelSpec {
    ModelSpec {
        network_effects: vec![
            Effect::new(EffectKind::Density, density),
            Effect::new(EffectKind::Recip, 1.5),
        ],
        behavior_effects: vec![],
        network_rate: vec![4.0],
        behavior_rate: vec![],
        centering: Centering::default(),
    }
}

/// Small community configuration used by engine and CLI tests.
pub const TINY_CONFIG: &str = r#"
seed = 99
replications = 3

[estimation]
phase1_runs = 20
phase2_subphases = 2
phase3_runs = 60

[models.m]
rows = [
  { mechanism = "network", effect = "rate", parameter = 4.0 },
  { mechanism = "network", effect = "density", parameter = -1.5 },
  { mechanism = "network", effect = "recip", parameter = 1.5 },
  { mechanism = "network", effect = "X", covariate = "dist", parameter = -1.0 },
  { mechanism = "network", effect = "simX", parameter = 1.0 },
  { mechanism = "behavior", effect = "rate", parameter = 2.0 },
  { mechanism = "behavior", effect = "linear", parameter = 0.0 },
  { mechanism = "behavior", effect = "totSim", parameter = 0.5 },
]

[[scenarios]]
id = "tiny"
model = "m"
focal = ["simX", "totSim"]

[scenarios.design.communities]
communities = [0]
waves = 3
scale = [1, 3]
geometry = { per_cluster = 14, means = [[0.0, 0.0], [4.0, 0.0]], sd_range = [0.5, 1.0], distance_scale = 4.0 }
"#;
