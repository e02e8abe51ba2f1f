//! Estimation data: imputed period start states, inclusion masks and
//! cross-lagged target statistics.

use crate::dynamics::{self, Compiled, Env, Params, Score, Scratch, SimEvent, SimState, Streams};
use crate::error::{Error, Result};
use crate::model::{Centering, ModelSpec, NetworkState};
use crate::panel::{PanelData, PanelSet};
use crate::seeds;

/// Position of every parameter in the estimation vector:
/// network rates per period, network effects, behavior rates per period,
/// behavior effects.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub periods: usize,
    pub k_net: usize,
    pub k_beh: usize,
    pub behavior: bool,
}

impl Layout {
    pub fn new(model: &ModelSpec, periods: usize) -> Self {
        Self {
            periods,
            k_net: model.network_effects.len(),
            k_beh: model.behavior_effects.len(),
            behavior: model.has_behavior(),
        }
    }

    pub fn len(&self) -> usize {
        self.periods + self.k_net + if self.behavior { self.periods + self.k_beh } else { 0 }
    }

    pub fn net_rate(&self, m: usize) -> usize {
        m
    }

    pub fn net_effect(&self, k: usize) -> usize {
        self.periods + k
    }

    pub fn beh_rate(&self, m: usize) -> usize {
        self.periods + self.k_net + m
    }

    pub fn beh_effect(&self, k: usize) -> usize {
        2 * self.periods + self.k_net + k
    }

    pub fn is_rate(&self, p: usize) -> bool {
        p < self.periods || (self.behavior && p >= self.beh_rate(0) && p < self.beh_effect(0))
    }

    pub fn names(&self, model: &ModelSpec) -> Vec<String> {
        let mut names: Vec<String> = (0..self.periods).map(|m| format!("rate_network_{}", m + 1)).collect();
        names.extend(model.network_effects.iter().map(|e| e.kind.to_string()));
        if self.behavior {
            names.extend((0..self.periods).map(|m| format!("rate_behavior_{}", m + 1)));
            names.extend(model.behavior_effects.iter().map(|e| e.kind.to_string()));
        }
        names
    }

    /// Parameter vector of `model`, rates repeated per period.
    pub fn theta_of(&self, model: &ModelSpec) -> Vec<f64> {
        let mut t = vec![0.0; self.len()];
        for m in 0..self.periods {
            t[self.net_rate(m)] = model.network_rate_at(m);
        }
        for (k, e) in model.network_effects.iter().enumerate() {
            t[self.net_effect(k)] = e.parameter;
        }
        if self.behavior {
            for m in 0..self.periods {
                t[self.beh_rate(m)] = model.behavior_rate_at(m);
            }
            for (k, e) in model.behavior_effects.iter().enumerate() {
                t[self.beh_effect(k)] = e.parameter;
            }
        }
        t
    }
}

pub(crate) struct PeriodData {
    pub start: SimState,
    pub events: Vec<SimEvent>,
    pub include: Vec<bool>,
    /// Present at the end but unobserved: row and behavior are reset to the
    /// start values before statistics are taken.
    pub end_fix: Vec<usize>,
    pub observed_end: SimState,
}

pub(crate) struct GroupData {
    pub periods: Vec<PeriodData>,
    pub env: Env,
}

pub(crate) struct EstimationData {
    pub layout: Layout,
    pub comp: Compiled,
    pub groups: Vec<GroupData>,
    pub targets: Vec<f64>,
}

/// Centering constants from the observed wave-1 behavior of all groups.
pub fn data_centering(set: &PanelSet) -> Centering {
    let mut values = Vec::new();
    let mut width = 1;
    for g in &set.groups {
        width = g.scale.1 - g.scale.0;
        let w = &g.waves[0];
        values.extend((0..g.n()).filter(|&i| w.is_observed(i)).map(|i| w.behavior[i]));
    }
    Centering::from_values(&values, width)
}

fn mode(values: impl Iterator<Item = i32>, fallback: i32) -> i32 {
    let mut counts = std::collections::BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    // smallest value among the most frequent
    counts
        .into_iter()
        .fold(
            (fallback, 0usize),
            |best, (v, c)| if c > best.1 { (v, c) } else { best },
        )
        .0
}

impl EstimationData {
    pub fn new(set: &PanelSet, model: &ModelSpec) -> Result<Self> {
        set.validate()?;
        model.validate()?;
        let periods = set.groups[0].n_periods();
        if periods == 0 {
            return Err(Error::InvalidInput("estimation needs at least 2 waves".into()));
        }
        let scale = set.groups[0].scale;
        if set.groups.iter().any(|g| g.scale != scale) {
            return Err(Error::InvalidInput("all groups must share one behavior scale".into()));
        }
        let layout = Layout::new(model, periods);
        let comp = Compiled::new(model)?;
        let groups = set
            .groups
            .iter()
            .map(|g| group_data(g, model, &comp))
            .collect::<Result<Vec<_>>>()?;
        let mut data = Self {
            layout,
            comp,
            groups,
            targets: Vec::new(),
        };
        let mut targets = vec![0.0; data.layout.len()];
        for (g, group) in data.groups.iter().enumerate() {
            for (m, p) in group.periods.iter().enumerate() {
                data.add_period_stats(g, m, &p.observed_end, &mut targets);
            }
        }
        data.targets = targets;
        Ok(data)
    }

    /// Adds the statistics of one period with end state `end` to `out`.
    pub fn add_period_stats(&self, g: usize, m: usize, end: &SimState, out: &mut [f64]) {
        let group = &self.groups[g];
        let p = &group.periods[m];
        let l = &self.layout;
        let start = &p.start;
        let mut hamming = 0usize;
        let mut steps = 0i64;
        for i in 0..start.n {
            if !p.include[i] {
                continue;
            }
            let common = end.out[i].iter().filter(|&&j| start.tie(i, j as usize) == 1).count();
            hamming += start.out[i].len() + end.out[i].len() - 2 * common;
            steps += i64::from((end.z[i] - start.z[i]).abs());
        }
        out[l.net_rate(m)] += hamming as f64;
        let mut buf = vec![0.0; l.k_net.max(l.k_beh)];
        dynamics::network_totals(
            end,
            &start.z,
            &p.include,
            &self.comp.net,
            &group.env,
            &mut buf[..l.k_net],
        );
        for k in 0..l.k_net {
            out[l.net_effect(k)] += buf[k];
        }
        if l.behavior {
            out[l.beh_rate(m)] += steps as f64;
            dynamics::behavior_totals(
                start,
                &end.z,
                &p.include,
                &self.comp.beh,
                &group.env,
                &mut buf[..l.k_beh],
            );
            for k in 0..l.k_beh {
                out[l.beh_effect(k)] += buf[k];
            }
        }
    }

    /// Simulated statistics at `theta`; with `score` also the score vector.
    pub fn simulate(&self, theta: &[f64], seed: u64, score: bool) -> (Vec<f64>, Option<Vec<f64>>) {
        let l = &self.layout;
        let mut stats = vec![0.0; l.len()];
        let mut total_score = score.then(|| vec![0.0; l.len()]);
        let net = &theta[l.net_effect(0)..l.net_effect(0) + l.k_net];
        let beh: &[f64] = if l.behavior {
            &theta[l.beh_effect(0)..l.beh_effect(0) + l.k_beh]
        } else {
            &[]
        };
        for (g, group) in self.groups.iter().enumerate() {
            let mut sc = Scratch::new(group.periods[0].start.n);
            for (m, p) in group.periods.iter().enumerate() {
                let params = Params {
                    net_rate: theta[l.net_rate(m)],
                    beh_rate: if l.behavior { theta[l.beh_rate(m)] } else { 0.0 },
                    net,
                    beh,
                };
                let mut s = p.start.clone();
                let mut events = p.events.clone();
                let mut streams = Streams::new(seeds::derive_path(seed, &[g as u64, m as u64]));
                let mut sc_score = score.then(|| Score::new(l.k_net, l.k_beh));
                dynamics::simulate_period(
                    &mut s,
                    &self.comp,
                    params,
                    &group.env,
                    &mut events,
                    &mut streams,
                    &mut sc,
                    sc_score.as_mut(),
                );
                for &i in &p.end_fix {
                    let row = p.start.out[i].clone();
                    s.set_row(i, &row);
                    s.z[i] = p.start.z[i];
                }
                self.add_period_stats(g, m, &s, &mut stats);
                if let (Some(total), Some(u)) = (total_score.as_mut(), sc_score) {
                    total[l.net_rate(m)] += u.net_rate;
                    for k in 0..l.k_net {
                        total[l.net_effect(k)] += u.net[k];
                    }
                    if l.behavior {
                        total[l.beh_rate(m)] += u.beh_rate;
                        for k in 0..l.k_beh {
                            total[l.beh_effect(k)] += u.beh[k];
                        }
                    }
                }
            }
        }
        (stats, total_score)
    }
}

fn group_data(panel: &PanelData, model: &ModelSpec, comp: &Compiled) -> Result<GroupData> {
    let n = panel.n();
    let (zmin, zmax) = panel.scale;
    let env = Env::new(
        comp.dyad_tables(&panel.covariates.with_centered_dyadic(n), n)?,
        model.centering,
        zmin,
        zmax,
    );
    let cov = comp.actor_tables(&panel.covariates, n)?;
    let w0 = &panel.waves[0];
    let fallback = mode((0..n).filter(|&i| w0.is_observed(i)).map(|i| w0.behavior[i]), zmin);

    // imputed network rows and behavior per wave, carried forward
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut z = vec![fallback; n];
    let mut periods = Vec::with_capacity(panel.n_periods());
    for m in 0..panel.n_periods() {
        let w = &panel.waves[m];
        let next = &panel.waves[m + 1];
        for i in 0..n {
            if !w.present[i] {
                rows[i].clear();
                continue;
            }
            if w.is_observed(i) {
                rows[i] = observed_row(&w.network, i);
                z[i] = w.behavior[i];
            }
        }
        for row in rows.iter_mut() {
            row.retain(|&j| w.present[j as usize]);
        }
        let start_net = net_from_rows(n, &rows);
        // joiners enter with their next observed behavior
        let mut events: Vec<SimEvent> = Vec::new();
        for ev in panel.events(m) {
            let joiners = ev
                .joiners
                .iter()
                .map(|j| {
                    let entry = if next.is_observed(j.actor) {
                        next.behavior[j.actor]
                    } else {
                        fallback
                    };
                    (j.actor, Some((entry, cov.iter().map(|c| c[j.actor]).collect())))
                })
                .collect();
            events.push(SimEvent {
                time: ev.time,
                leavers: ev.leavers.clone(),
                joiners,
            });
        }
        let mut start_z = z.clone();
        for ev in &events {
            for (a, attrs) in &ev.joiners {
                if let Some((b, _)) = attrs {
                    start_z[*a] = *b;
                }
            }
        }
        let start = SimState::new(&start_net, &start_z, w.present.clone(), cov.clone());
        let include: Vec<bool> = (0..n).map(|i| w.is_observed(i) && next.is_observed(i)).collect();
        let end_fix: Vec<usize> = (0..n).filter(|&i| next.present[i] && !next.is_observed(i)).collect();

        let mut end_rows: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                if next.present[i] {
                    observed_row(&next.network, i)
                } else {
                    Vec::new()
                }
            })
            .collect();
        for &i in &end_fix {
            end_rows[i] = start.out[i].clone();
        }
        for row in end_rows.iter_mut() {
            row.retain(|&j| next.present[j as usize]);
        }
        let mut end_z: Vec<i32> = start_z.clone();
        for i in 0..n {
            if next.is_observed(i) {
                end_z[i] = next.behavior[i];
            }
        }
        let observed_end = SimState::new(&net_from_rows(n, &end_rows), &end_z, next.present.clone(), cov.clone());
        periods.push(PeriodData {
            start,
            events,
            include,
            end_fix,
            observed_end,
        });
    }
    Ok(GroupData { periods, env })
}

fn observed_row(net: &NetworkState, i: usize) -> Vec<u32> {
    net.row(i)
        .iter()
        .enumerate()
        .filter(|(_, &t)| t != 0)
        .map(|(j, _)| j as u32)
        .collect()
}

fn net_from_rows(n: usize, rows: &[Vec<u32>]) -> NetworkState {
    let mut net = NetworkState::empty(n);
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            net.set_tie(i, j as usize, true);
        }
    }
    net
}
