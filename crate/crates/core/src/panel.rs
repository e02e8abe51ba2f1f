//! Panel data: waves of network and behavior observations with missing-data
//! masks, presence flags and composition schedules.
//!
//! Panels serialize to JSON as
//!
//! ```json
//! {
//!   "group_id": "cohort-a-1",
//!   "scale": [0, 4],
//!   "waves": [{"network": [[0,1],[0,0]], "behavior": [2,1],
//!              "missing": [false,false], "present": [true,true]}],
//!   "covariates": {"actor": {"sex": [0,1]}, "dyadic": {}},
//!   "composition": [[{"time": 0.5, "leavers": [3], "joiners": [{"actor": 35}]}]]
//! }
//! ```
//!
//! `composition[m]` lists the events between wave `m` and wave `m + 1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BehaviorState, CovariateSet, NetworkState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wave {
    pub network: NetworkState,
    pub behavior: Vec<i32>,
    /// Actor did not respond: its outgoing row and behavior are unobserved.
    /// The stored values are the true ones and are kept for diagnostics.
    #[serde(default)]
    pub missing: Vec<bool>,
    /// Actor belongs to the population at this wave.
    pub present: Vec<bool>,
}

impl Wave {
    pub fn complete(network: NetworkState, behavior: Vec<i32>) -> Self {
        let n = network.n();
        Self {
            network,
            behavior,
            missing: vec![false; n],
            present: vec![true; n],
        }
    }

    pub fn is_observed(&self, i: usize) -> bool {
        self.present[i] && !self.missing.get(i).copied().unwrap_or(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Joiner {
    pub actor: usize,
    /// Behavior at entry; drawn from the present population when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<i32>,
    /// Actor covariate values at entry.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub covariates: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionEvent {
    /// Time inside the period, in `(0, 1)`.
    pub time: f64,
    pub leavers: Vec<usize>,
    pub joiners: Vec<Joiner>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelData {
    pub group_id: String,
    pub scale: (i32, i32),
    pub waves: Vec<Wave>,
    #[serde(default)]
    pub covariates: CovariateSet,
    #[serde(default)]
    pub composition: Vec<Vec<CompositionEvent>>,
}

impl PanelData {
    pub fn n(&self) -> usize {
        self.waves.first().map_or(0, |w| w.network.n())
    }

    pub fn n_waves(&self) -> usize {
        self.waves.len()
    }

    pub fn n_periods(&self) -> usize {
        self.waves.len().saturating_sub(1)
    }

    pub fn events(&self, period: usize) -> &[CompositionEvent] {
        self.composition.get(period).map_or(&[], Vec::as_slice)
    }

    pub fn behavior(&self, wave: usize) -> Result<BehaviorState> {
        BehaviorState::new(self.waves[wave].behavior.clone(), self.scale.0, self.scale.1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.waves.is_empty() {
            return Err(Error::InvalidInput(format!("panel `{}` has no waves", self.group_id)));
        }
        if self.scale.1 < self.scale.0 {
            return Err(Error::InvalidInput(format!(
                "panel `{}` has an empty scale",
                self.group_id
            )));
        }
        for (w, wave) in self.waves.iter().enumerate() {
            if wave.network.n() != n || wave.behavior.len() != n || wave.present.len() != n {
                return Err(Error::InvalidInput(format!(
                    "panel `{}` wave {w} does not have {n} actors",
                    self.group_id
                )));
            }
            if !wave.missing.is_empty() && wave.missing.len() != n {
                return Err(Error::InvalidInput(format!(
                    "panel `{}` wave {w} missing mask has wrong length",
                    self.group_id
                )));
            }
            if let Some(v) = wave.behavior.iter().find(|&&v| v < self.scale.0 || v > self.scale.1) {
                return Err(Error::InvalidInput(format!(
                    "panel `{}` wave {w} behavior {v} outside the scale",
                    self.group_id
                )));
            }
        }
        self.covariates.validate(n)?;
        if self.composition.len() > self.n_periods() {
            return Err(Error::InvalidInput(format!(
                "panel `{}` has composition events for {} periods but only {} periods",
                self.group_id,
                self.composition.len(),
                self.n_periods()
            )));
        }
        for (m, events) in self.composition.iter().enumerate() {
            for ev in events {
                if !(ev.time > 0.0 && ev.time < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "composition time {} outside (0, 1)",
                        ev.time
                    )));
                }
                let before = &self.waves[m].present;
                let after = &self.waves[m + 1].present;
                for &l in &ev.leavers {
                    if l >= n || !before[l] || after[l] {
                        return Err(Error::InvalidInput(format!(
                            "leaver {l} in period {m} is inconsistent with presence flags"
                        )));
                    }
                }
                for j in &ev.joiners {
                    if j.actor >= n || before[j.actor] || !after[j.actor] {
                        return Err(Error::InvalidInput(format!(
                            "joiner {} in period {m} is inconsistent with presence flags",
                            j.actor
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy with all missing-data masks cleared.
    pub fn unmasked(&self) -> Self {
        let mut p = self.clone();
        for w in &mut p.waves {
            w.missing = vec![false; w.network.n()];
        }
        p
    }

    /// Edge list of one wave as CSV with header `from,to`.
    pub fn edge_list_csv(&self, wave: usize) -> String {
        let mut s = String::from("from,to\n");
        for (i, j) in self.waves[wave].network.edges() {
            let _ = writeln!(s, "{i},{j}");
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

/// Groups analysed jointly with one shared parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelSet {
    pub groups: Vec<PanelData>,
}

impl PanelSet {
    pub fn single(panel: PanelData) -> Self {
        Self { groups: vec![panel] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::InvalidInput("panel set has no groups".into()));
        }
        let waves = self.groups[0].n_waves();
        for g in &self.groups {
            g.validate()?;
            if g.n_waves() != waves {
                return Err(Error::InvalidInput(format!(
                    "group `{}` has {} waves, expected {waves}",
                    g.group_id,
                    g.n_waves()
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> PanelData {
        let w1 = Wave::complete(NetworkState::from_edges(3, &[(0, 1)]).unwrap(), vec![1, 2, 3]);
        let w2 = Wave::complete(NetworkState::from_edges(3, &[(0, 1), (1, 0)]).unwrap(), vec![1, 3, 3]);
        PanelData {
            group_id: "toy".into(),
            scale: (1, 3),
            waves: vec![w1, w2],
            covariates: CovariateSet::default(),
            composition: vec![],
        }
    }

    #[test]
    fn json_round_trip() {
        let p = toy();
        let back = PanelData::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
        let set = PanelSet::single(p);
        assert_eq!(PanelSet::from_json(&set.to_json().unwrap()).unwrap(), set);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        let mut v: serde_json::Value = serde_json::from_str(&toy().to_json().unwrap()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(PanelData::from_json(&v.to_string()).is_err());
        let mut p = toy();
        p.waves[1].behavior[0] = 7;
        assert!(p.validate().is_err());
    }

    #[test]
    fn edge_list() {
        assert_eq!(toy().edge_list_csv(1), "from,to\n0,1\n1,0\n");
    }

    #[test]
    fn composition_must_match_presence() {
        let mut p = toy();
        p.composition = vec![vec![CompositionEvent {
            time: 0.5,
            leavers: vec![2],
            joiners: vec![],
        }]];
        assert!(p.validate().is_err());
        p.waves[1].present[2] = false;
        assert!(p.validate().is_ok());
        p.composition[0][0].time = 1.0;
        assert!(p.validate().is_err());
    }
}
