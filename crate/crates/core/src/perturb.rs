//! Design subsampling and data-collection interference: row-wise MCAR
//! non-response and actor turnover.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{CompositionEvent, Joiner, PanelData, PanelSet, Wave};
use crate::simulator::CoevolutionState;

/// Number of actors per group and wave whose questionnaire is missing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissingPolicy {
    pub per_group_count: usize,
}

/// Number of actors per group replaced halfway through each period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurnoverPolicy {
    pub per_group_count: usize,
    pub time: f64,
}

impl Default for TurnoverPolicy {
    fn default() -> Self {
        Self {
            per_group_count: 0,
            time: 0.5,
        }
    }
}

/// Restricts a panel to `actors` (in the given order) and its first `waves`
/// waves.
pub fn subsample_panel(panel: &PanelData, actors: &[usize], waves: usize) -> Result<PanelData> {
    if waves < 2 {
        return Err(Error::InvalidInput(format!(
            "a subsample needs at least 2 waves, got {waves}"
        )));
    }
    if waves > panel.n_waves() {
        return Err(Error::InvalidInput(format!(
            "cannot keep {waves} of {} waves",
            panel.n_waves()
        )));
    }
    if actors.is_empty() {
        return Err(Error::InvalidInput("actor subset is empty".into()));
    }
    let n = panel.n();
    let mut index = vec![usize::MAX; n];
    for (a, &i) in actors.iter().enumerate() {
        if i >= n || index[i] != usize::MAX {
            return Err(Error::InvalidInput(format!("invalid or repeated actor {i} in subset")));
        }
        index[i] = a;
    }
    let pick = |v: &[bool]| actors.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let waves_out = panel.waves[..waves]
        .iter()
        .map(|w| Wave {
            network: w.network.induced(actors),
            behavior: actors.iter().map(|&i| w.behavior[i]).collect(),
            missing: if w.missing.is_empty() {
                vec![false; actors.len()]
            } else {
                pick(&w.missing)
            },
            present: pick(&w.present),
        })
        .collect();
    let composition = panel
        .composition
        .iter()
        .take(waves - 1)
        .map(|events| {
            events
                .iter()
                .map(|ev| CompositionEvent {
                    time: ev.time,
                    leavers: ev
                        .leavers
                        .iter()
                        .filter(|&&l| index[l] != usize::MAX)
                        .map(|&l| index[l])
                        .collect(),
                    joiners: ev
                        .joiners
                        .iter()
                        .filter(|j| index[j.actor] != usize::MAX)
                        .map(|j| Joiner {
                            actor: index[j.actor],
                            ..j.clone()
                        })
                        .collect(),
                })
                .filter(|ev| !ev.leavers.is_empty() || !ev.joiners.is_empty())
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let composition = if composition.iter().all(Vec::is_empty) {
        Vec::new()
    } else {
        composition
    };
    Ok(PanelData {
        group_id: panel.group_id.clone(),
        scale: panel.scale,
        waves: waves_out,
        covariates: panel.covariates.restricted(actors, n),
        composition,
    })
}

/// Marks `per_group_count` present actors as missing in every wave, drawn
/// independently per wave. Values are left untouched.
pub fn inject_mcar<R: Rng + ?Sized>(panel: &PanelData, policy: &MissingPolicy, rng: &mut R) -> Result<PanelData> {
    let mut out = panel.clone();
    let k = policy.per_group_count;
    for (w, wave) in out.waves.iter_mut().enumerate() {
        let n = wave.network.n();
        if wave.missing.len() != n {
            wave.missing = vec![false; n];
        }
        if k == 0 {
            continue;
        }
        let candidates: Vec<usize> = (0..n).filter(|&i| wave.present[i] && !wave.missing[i]).collect();
        if k > candidates.len() {
            return Err(Error::InvalidInput(format!(
                "group `{}` wave {w}: cannot mark {k} of {} actors missing",
                panel.group_id,
                candidates.len()
            )));
        }
        for idx in sample(rng, candidates.len(), k) {
            wave.missing[candidates[idx]] = true;
        }
    }
    Ok(out)
}

/// Applies [`inject_mcar`] to every group.
pub fn inject_mcar_set<R: Rng + ?Sized>(set: &PanelSet, policy: &MissingPolicy, rng: &mut R) -> Result<PanelSet> {
    Ok(PanelSet {
        groups: set
            .groups
            .iter()
            .map(|g| inject_mcar(g, policy, rng))
            .collect::<Result<_>>()?,
    })
}

/// Appends `slots` absent actors that can later join the group. Their
/// covariates are placeholders until a joiner takes the slot.
pub fn add_joiner_slots(state: &CoevolutionState, slots: usize) -> Result<CoevolutionState> {
    let n = state.n();
    let m = n + slots;
    let mut network = crate::model::NetworkState::empty(m);
    for (i, j) in state.network.edges() {
        network.set_tie(i, j, true);
    }
    let (lo, hi) = state.behavior.range();
    let mut values = state.behavior.values().to_vec();
    values.resize(m, lo);
    let behavior = crate::model::BehaviorState::new(values, lo, hi)?;
    let mut covariates = state.covariates.clone();
    for v in covariates.actor.values_mut() {
        v.resize(m, 0.0);
    }
    for v in covariates.dyadic.values_mut() {
        let mut wide = vec![0.0; m * m];
        for i in 0..n {
            wide[i * m..i * m + n].copy_from_slice(&v[i * n..(i + 1) * n]);
        }
        *v = wide;
    }
    let mut present = state.present.clone();
    present.resize(m, false);
    Ok(CoevolutionState {
        network,
        behavior,
        covariates,
        present,
    })
}

/// One period's turnover event for a group.
///
/// `present` flags the current population and `slots` lists absent actor
/// indices available to joiners. Leavers are drawn uniformly from the
/// present actors; joiners take the first slots and receive the attributes
/// of a random present actor at event time.
pub fn build_turnover_schedule<R: Rng + ?Sized>(
    present: &[bool],
    slots: &[usize],
    policy: &TurnoverPolicy,
    rng: &mut R,
) -> Result<Vec<CompositionEvent>> {
    let k = policy.per_group_count;
    if k == 0 {
        return Ok(Vec::new());
    }
    if !(policy.time > 0.0 && policy.time < 1.0) {
        return Err(Error::Config(format!("turnover time {} outside (0, 1)", policy.time)));
    }
    let members: Vec<usize> = (0..present.len()).filter(|&i| present[i]).collect();
    if k >= members.len() {
        return Err(Error::Config(format!(
            "turnover count {k} must be below the group size {}",
            members.len()
        )));
    }
    if slots.len() < k || slots.iter().any(|&s| s >= present.len() || present[s]) {
        return Err(Error::InvalidInput(format!("need {k} free actor slots for joiners")));
    }
    let mut leavers: Vec<usize> = sample(rng, members.len(), k).iter().map(|a| members[a]).collect();
    leavers.sort_unstable();
    Ok(vec![CompositionEvent {
        time: policy.time,
        leavers,
        joiners: slots[..k]
            .iter()
            .map(|&actor| Joiner {
                actor,
                behavior: None,
                covariates: Default::default(),
            })
            .collect(),
    }])
}

/// Share of actor-wave observations marked missing among present actors.
pub fn missing_rate(set: &PanelSet) -> f64 {
    let (mut missing, mut present) = (0usize, 0usize);
    for g in &set.groups {
        for w in &g.waves {
            for i in 0..w.present.len() {
                if w.present[i] {
                    present += 1;
                    missing += usize::from(w.missing.get(i).copied().unwrap_or(false));
                }
            }
        }
    }
    if present == 0 {
        0.0
    } else {
        missing as f64 / present as f64
    }
}

/// Leavers per period relative to the population at the start of the period.
pub fn turnover_rate(set: &PanelSet) -> f64 {
    let (mut left, mut base) = (0usize, 0usize);
    for g in &set.groups {
        for m in 0..g.n_periods() {
            base += g.waves[m].present.iter().filter(|&&p| p).count();
            left += g.events(m).iter().map(|e| e.leavers.len()).sum::<usize>();
        }
    }
    if base == 0 {
        0.0
    } else {
        left as f64 / base as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CovariateSet, NetworkState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn panel(n: usize, waves: usize) -> PanelData {
        let ws = (0..waves)
            .map(|w| {
                let edges: Vec<_> = (0..n).map(|i| (i, (i + 1 + w) % n)).filter(|(i, j)| i != j).collect();
                Wave::complete(NetworkState::from_edges(n, &edges).unwrap(), vec![1; n])
            })
            .collect();
        PanelData {
            group_id: "g".into(),
            scale: (1, 3),
            waves: ws,
            covariates: CovariateSet::default(),
            composition: vec![],
        }
    }

    #[test]
    fn full_subsample_is_identity() {
        let p = panel(6, 3);
        let all: Vec<_> = (0..6).collect();
        assert_eq!(subsample_panel(&p, &all, 3).unwrap(), p);
        assert_eq!(subsample_panel(&p, &all, 2).unwrap().n_periods(), 1);
        assert!(subsample_panel(&p, &all, 1).is_err());
    }

    #[test]
    fn mcar_only_sets_masks() {
        let p = panel(10, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = inject_mcar(&p, &MissingPolicy { per_group_count: 3 }, &mut rng).unwrap();
        for w in &m.waves {
            assert_eq!(w.missing.iter().filter(|&&x| x).count(), 3);
        }
        assert_eq!(m.unmasked(), p);
        let none = inject_mcar(&p, &MissingPolicy { per_group_count: 0 }, &mut rng).unwrap();
        assert_eq!(none, p);
        assert!(inject_mcar(&p, &MissingPolicy { per_group_count: 11 }, &mut rng).is_err());
    }

    #[test]
    fn turnover_schedule_shape() {
        let mut present = vec![true; 8];
        present.extend([false, false]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let policy = TurnoverPolicy {
            per_group_count: 2,
            time: 0.5,
        };
        let ev = build_turnover_schedule(&present, &[8, 9], &policy, &mut rng).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].leavers.len(), 2);
        assert!(ev[0].leavers.iter().all(|&l| l < 8));
        assert_eq!(ev[0].joiners.iter().map(|j| j.actor).collect::<Vec<_>>(), vec![8, 9]);
        let zero = TurnoverPolicy::default();
        assert!(build_turnover_schedule(&present, &[], &zero, &mut rng)
            .unwrap()
            .is_empty());
    }
}
