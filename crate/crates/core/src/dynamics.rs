//! Continuous-time co-evolution engine.
//!
//! The public model types are convenient but slow for the inner loop; this
//! module compiles a [`ModelSpec`] into flat coefficient tables and keeps
//! adjacency lists next to the adjacency matrix so that a network ministep
//! costs `O(n + d^2)` for out-degree `d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::model::{BehaviorState, Centering, CovariateSet, EffectKind, ModelSpec, NetworkState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum NetTerm {
    Density,
    Recip,
    TransTrip,
    Cycle3,
    TransRecTrip,
    Dyad(usize),
    Same(usize),
    Sim,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum BehTerm {
    Linear,
    Quad,
    TotSim,
    AvAlt,
}

/// Effect lists resolved against covariate tables.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub net: Vec<NetTerm>,
    pub beh: Vec<BehTerm>,
    /// Dyadic covariate names in `NetTerm::Dyad` index order.
    pub dyad_names: Vec<String>,
    /// Actor covariate names in `NetTerm::Same` index order.
    pub actor_names: Vec<String>,
}

impl Compiled {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        let mut dyad_names: Vec<String> = Vec::new();
        let mut actor_names: Vec<String> = Vec::new();
        let mut net = Vec::with_capacity(model.network_effects.len());
        for e in &model.network_effects {
            net.push(match &e.kind {
                EffectKind::Density => NetTerm::Density,
                EffectKind::Recip => NetTerm::Recip,
                EffectKind::TransTrip => NetTerm::TransTrip,
                EffectKind::Cycle3 => NetTerm::Cycle3,
                EffectKind::TransRecTrip => NetTerm::TransRecTrip,
                EffectKind::DyadX(name) => NetTerm::Dyad(intern(&mut dyad_names, name)),
                EffectKind::SameX(name) => NetTerm::Same(intern(&mut actor_names, name)),
                EffectKind::SimX => NetTerm::Sim,
                other => {
                    return Err(Error::Config(format!("`{other}` is not a network effect")));
                }
            });
        }
        let mut beh = Vec::with_capacity(model.behavior_effects.len());
        for e in &model.behavior_effects {
            beh.push(match &e.kind {
                EffectKind::Linear => BehTerm::Linear,
                EffectKind::Quad => BehTerm::Quad,
                EffectKind::TotSim => BehTerm::TotSim,
                EffectKind::AvAlt => BehTerm::AvAlt,
                other => {
                    return Err(Error::Config(format!("`{other}` is not a behavior effect")));
                }
            });
        }
        Ok(Self {
            net,
            beh,
            dyad_names,
            actor_names,
        })
    }

    pub fn dyad_tables(&self, cov: &CovariateSet, n: usize) -> Result<Vec<Vec<f64>>> {
        self.dyad_names
            .iter()
            .map(|name| {
                let w = cov.dyadic_covariate(name)?;
                if w.len() != n * n {
                    return Err(Error::InvalidInput(format!("dyadic covariate `{name}` has wrong size")));
                }
                Ok(w.to_vec())
            })
            .collect()
    }

    /// Compiled actor covariate names followed by every other actor
    /// covariate of `cov`, so that joiners can inherit all attributes.
    pub fn actor_table_names(&self, cov: &CovariateSet) -> Vec<String> {
        let mut names = self.actor_names.clone();
        names.extend(cov.actor.keys().filter(|k| !self.actor_names.contains(k)).cloned());
        names
    }

    pub fn actor_tables(&self, cov: &CovariateSet, n: usize) -> Result<Vec<Vec<f64>>> {
        self.actor_table_names(cov)
            .iter()
            .map(|name| {
                let v = cov.actor_covariate(name)?;
                if v.len() != n {
                    return Err(Error::InvalidInput(format!("actor covariate `{name}` has wrong size")));
                }
                Ok(v.to_vec())
            })
            .collect()
    }
}

fn intern(names: &mut Vec<String>, name: &str) -> usize {
    match names.iter().position(|n| n == name) {
        Some(k) => k,
        None => {
            names.push(name.to_string());
            names.len() - 1
        }
    }
}

/// Immutable quantities shared by all ministeps of a simulation.
#[derive(Clone, Debug)]
pub(crate) struct Env {
    pub dyad: Vec<Vec<f64>>,
    pub centering: Centering,
    pub zmin: i32,
    pub zmax: i32,
    /// `sim - sim_hat` indexed by `|z_i - z_j|`.
    pub sim_table: Vec<f64>,
}

impl Env {
    pub fn new(dyad: Vec<Vec<f64>>, centering: Centering, zmin: i32, zmax: i32) -> Self {
        let width = (zmax - zmin).max(1);
        let sim_table = (0..=width)
            .map(|d| 1.0 - f64::from(d) / f64::from(width) - centering.similarity_mean)
            .collect();
        Self {
            dyad,
            centering,
            zmin,
            zmax,
            sim_table,
        }
    }

    #[inline]
    fn sim(&self, a: i32, b: i32) -> f64 {
        self.sim_table[(a - b).unsigned_abs() as usize]
    }
}

/// Parameters of one period in compiled order.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Params<'a> {
    pub net_rate: f64,
    pub beh_rate: f64,
    pub net: &'a [f64],
    pub beh: &'a [f64],
}

/// Network plus behavior state with adjacency lists.
#[derive(Clone, Debug)]
pub(crate) struct SimState {
    pub n: usize,
    pub adj: Vec<u8>,
    pub out: Vec<Vec<u32>>,
    pub inn: Vec<Vec<u32>>,
    pub z: Vec<i32>,
    pub active: Vec<bool>,
    pub active_list: Vec<u32>,
    /// Actor covariates in `Compiled::actor_names` order.
    pub cov: Vec<Vec<f64>>,
}

impl SimState {
    pub fn new(net: &NetworkState, z: &[i32], active: Vec<bool>, cov: Vec<Vec<f64>>) -> Self {
        let n = net.n();
        let mut s = Self {
            n,
            adj: vec![0; n * n],
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
            z: z.to_vec(),
            active_list: Vec::new(),
            active,
            cov,
        };
        for i in 0..n {
            for j in 0..n {
                if net.has_tie(i, j) {
                    s.add_tie(i, j);
                }
            }
        }
        s.rebuild_active_list();
        s
    }

    pub fn rebuild_active_list(&mut self) {
        self.active_list = (0..self.n as u32).filter(|&i| self.active[i as usize]).collect();
    }

    #[inline]
    pub fn tie(&self, i: usize, j: usize) -> u8 {
        self.adj[i * self.n + j]
    }

    pub fn add_tie(&mut self, i: usize, j: usize) {
        let k = i * self.n + j;
        if self.adj[k] == 0 && i != j {
            self.adj[k] = 1;
            self.out[i].push(j as u32);
            self.inn[j].push(i as u32);
        }
    }

    pub fn remove_tie(&mut self, i: usize, j: usize) {
        let k = i * self.n + j;
        if self.adj[k] == 1 {
            self.adj[k] = 0;
            remove_value(&mut self.out[i], j as u32);
            remove_value(&mut self.inn[j], i as u32);
        }
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        if self.tie(i, j) == 1 {
            self.remove_tie(i, j);
        } else {
            self.add_tie(i, j);
        }
    }

    /// Replaces the outgoing row of `i` by `targets`.
    pub fn set_row(&mut self, i: usize, targets: &[u32]) {
        let current = self.out[i].clone();
        for j in current {
            self.remove_tie(i, j as usize);
        }
        for &j in targets {
            self.add_tie(i, j as usize);
        }
    }

    pub fn isolate(&mut self, i: usize) {
        let outs = std::mem::take(&mut self.out[i]);
        for j in outs {
            self.adj[i * self.n + j as usize] = 0;
            remove_value(&mut self.inn[j as usize], i as u32);
        }
        let ins = std::mem::take(&mut self.inn[i]);
        for h in ins {
            self.adj[h as usize * self.n + i] = 0;
            remove_value(&mut self.out[h as usize], i as u32);
        }
    }

    pub fn to_network(&self) -> NetworkState {
        let mut net = NetworkState::empty(self.n);
        for (i, outs) in self.out.iter().enumerate() {
            for &j in outs {
                net.set_tie(i, j as usize, true);
            }
        }
        net
    }

    pub fn to_behavior(&self, zmin: i32, zmax: i32) -> Result<BehaviorState> {
        BehaviorState::new(self.z.clone(), zmin, zmax)
    }

    pub fn tie_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}

fn remove_value(v: &mut Vec<u32>, x: u32) {
    if let Some(p) = v.iter().position(|&y| y == x) {
        v.swap_remove(p);
    }
}

/// Independent generator streams for network events, behavior events and
/// auxiliary draws. Keeping them separate couples runs that share a seed
/// when only one parameter is perturbed.
pub(crate) struct Streams {
    pub net: ChaCha8Rng,
    pub beh: ChaCha8Rng,
    pub aux: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let mk = |stream: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(stream);
            r
        };
        Self {
            net: mk(1),
            beh: mk(2),
            aux: mk(3),
        }
    }
}

/// Scratch buffers reused across ministeps.
#[derive(Clone, Debug, Default)]
pub(crate) struct Scratch {
    twopath: Vec<i32>,
    shared: Vec<i32>,
    back: Vec<i32>,
    mutual: Vec<i32>,
    eta: Vec<f64>,
    alts: Vec<u32>,
    deltas: Vec<f64>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Self {
            twopath: vec![0; n],
            shared: vec![0; n],
            back: vec![0; n],
            mutual: vec![0; n],
            eta: Vec::with_capacity(n + 1),
            alts: Vec::with_capacity(n + 1),
            deltas: Vec::new(),
        }
    }
}

/// Accumulated score function `d log P(path) / d theta` of one simulation.
#[derive(Clone, Debug)]
pub(crate) struct Score {
    pub net_rate: f64,
    pub beh_rate: f64,
    pub net: Vec<f64>,
    pub beh: Vec<f64>,
}

impl Score {
    pub fn new(k_net: usize, k_beh: usize) -> Self {
        Self {
            net_rate: 0.0,
            beh_rate: 0.0,
            net: vec![0.0; k_net],
            beh: vec![0.0; k_beh],
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Needs {
    twopath: bool,
    shared: bool,
    back: bool,
    mutual: bool,
}

impl Needs {
    fn of(terms: &[NetTerm]) -> Self {
        let mut n = Self::default();
        for t in terms {
            match t {
                NetTerm::TransTrip => {
                    n.twopath = true;
                    n.shared = true;
                }
                NetTerm::Cycle3 => n.back = true,
                NetTerm::TransRecTrip => {
                    n.shared = true;
                    n.mutual = true;
                }
                _ => {}
            }
        }
        n
    }
}

/// Flat coefficients of the network objective for the fast path.
#[derive(Clone, Default)]
struct NetCoef {
    density: f64,
    recip: f64,
    trans: f64,
    cycle: f64,
    trans_rec: f64,
    sim: f64,
    dyad: Vec<(usize, f64)>,
    same: Vec<(usize, f64)>,
}

impl NetCoef {
    fn new(terms: &[NetTerm], theta: &[f64]) -> Self {
        let mut c = Self::default();
        for (t, &th) in terms.iter().zip(theta) {
            match *t {
                NetTerm::Density => c.density += th,
                NetTerm::Recip => c.recip += th,
                NetTerm::TransTrip => c.trans += th,
                NetTerm::Cycle3 => c.cycle += th,
                NetTerm::TransRecTrip => c.trans_rec += th,
                NetTerm::Sim => c.sim += th,
                NetTerm::Dyad(k) => c.dyad.push((k, th)),
                NetTerm::Same(k) => c.same.push((k, th)),
            }
        }
        c
    }
}

fn fill_counts(s: &SimState, i: usize, needs: Needs, sc: &mut Scratch) {
    if needs.twopath || needs.shared || needs.mutual {
        for &h in &s.out[i] {
            let h = h as usize;
            if needs.twopath {
                for &j in &s.out[h] {
                    sc.twopath[j as usize] += 1;
                }
            }
            if needs.shared {
                for &j in &s.inn[h] {
                    sc.shared[j as usize] += 1;
                }
            }
            if needs.mutual && s.tie(h, i) == 1 {
                for &j in &s.out[h] {
                    sc.mutual[j as usize] += 1;
                }
            }
        }
    }
    if needs.back {
        for &h in &s.inn[i] {
            for &j in &s.inn[h as usize] {
                sc.back[j as usize] += 1;
            }
        }
    }
}

fn clear_counts(s: &SimState, i: usize, needs: Needs, sc: &mut Scratch) {
    if needs.twopath || needs.shared || needs.mutual {
        for &h in &s.out[i] {
            let h = h as usize;
            if needs.twopath || needs.mutual {
                for &j in &s.out[h] {
                    sc.twopath[j as usize] = 0;
                    sc.mutual[j as usize] = 0;
                }
            }
            if needs.shared {
                for &j in &s.inn[h] {
                    sc.shared[j as usize] = 0;
                }
            }
        }
    }
    if needs.back {
        for &h in &s.inn[i] {
            for &j in &s.inn[h as usize] {
                sc.back[j as usize] = 0;
            }
        }
    }
}

/// Unsigned change statistic of term `t` for toggling `i -> j`; multiply by
/// `+1` when the tie is absent, `-1` when present.
#[inline]
fn term_delta(t: NetTerm, s: &SimState, env: &Env, sc: &Scratch, i: usize, j: usize) -> f64 {
    let n = s.n;
    let xji = f64::from(s.adj[j * n + i]);
    match t {
        NetTerm::Density => 1.0,
        NetTerm::Recip => xji,
        NetTerm::TransTrip => f64::from(sc.twopath[j] + sc.shared[j]),
        NetTerm::Cycle3 => f64::from(sc.back[j]),
        NetTerm::TransRecTrip => xji * f64::from(sc.shared[j]) + f64::from(sc.mutual[j]),
        NetTerm::Dyad(k) => env.dyad[k][i * n + j],
        NetTerm::Same(k) => f64::from(u8::from(s.cov[k][i] == s.cov[k][j])),
        NetTerm::Sim => env.sim(s.z[i], s.z[j]),
    }
}

/// Draws an index from unnormalised weights `w` (overwritten by `exp`).
#[inline]
fn draw(eta: &mut [f64], u: f64) -> (usize, f64) {
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for e in eta.iter_mut() {
        *e = (*e - max).exp();
        total += *e;
    }
    let target = u * total;
    let mut acc = 0.0;
    for (a, &w) in eta.iter().enumerate() {
        acc += w;
        if target < acc {
            return (a, total);
        }
    }
    (eta.len() - 1, total)
}

/// One network ministep of actor `i`. Returns `true` if a tie changed.
pub(crate) fn network_ministep(
    s: &mut SimState,
    i: usize,
    terms: &[NetTerm],
    theta: &[f64],
    env: &Env,
    sc: &mut Scratch,
    rng: &mut ChaCha8Rng,
    score: Option<&mut [f64]>,
) -> bool {
    let u: f64 = rng.random();
    let needs = Needs::of(terms);
    fill_counts(s, i, needs, sc);
    let n = s.n;
    sc.eta.clear();
    sc.alts.clear();
    let chosen = if let Some(score) = score {
        let k = terms.len();
        sc.deltas.clear();
        for &j in &s.active_list {
            let j = j as usize;
            if j == i {
                continue;
            }
            let sign = if s.adj[i * n + j] == 1 { -1.0 } else { 1.0 };
            let mut v = 0.0;
            for (t, th) in terms.iter().zip(theta) {
                let d = sign * term_delta(*t, s, env, sc, i, j);
                sc.deltas.push(d);
                v += th * d;
            }
            sc.eta.push(v);
            sc.alts.push(j as u32);
        }
        sc.eta.push(0.0);
        sc.alts.push(i as u32);
        sc.deltas.extend(std::iter::repeat_n(0.0, k));
        let (a, total) = draw(&mut sc.eta, u);
        for (row, &w) in sc.eta.iter().enumerate() {
            let p = w / total;
            for (kk, sk) in score.iter_mut().enumerate() {
                *sk -= p * sc.deltas[row * k + kk];
            }
        }
        for (kk, sk) in score.iter_mut().enumerate() {
            *sk += sc.deltas[a * k + kk];
        }
        a
    } else {
        let c = NetCoef::new(terms, theta);
        let adj = &s.adj;
        for &j in &s.active_list {
            let j = j as usize;
            if j == i {
                continue;
            }
            let xji = f64::from(adj[j * n + i]);
            let mut v = c.density;
            if c.recip != 0.0 {
                v += c.recip * xji;
            }
            if c.trans != 0.0 {
                v += c.trans * f64::from(sc.twopath[j] + sc.shared[j]);
            }
            if c.cycle != 0.0 {
                v += c.cycle * f64::from(sc.back[j]);
            }
            if c.trans_rec != 0.0 {
                v += c.trans_rec * (xji * f64::from(sc.shared[j]) + f64::from(sc.mutual[j]));
            }
            if c.sim != 0.0 {
                v += c.sim * env.sim(s.z[i], s.z[j]);
            }
            for &(k, th) in &c.dyad {
                v += th * env.dyad[k][i * n + j];
            }
            for &(k, th) in &c.same {
                if s.cov[k][i] == s.cov[k][j] {
                    v += th;
                }
            }
            if adj[i * n + j] == 1 {
                v = -v;
            }
            sc.eta.push(v);
            sc.alts.push(j as u32);
        }
        sc.eta.push(0.0);
        sc.alts.push(i as u32);
        draw(&mut sc.eta, u).0
    };
    clear_counts(s, i, needs, sc);
    let j = sc.alts[chosen] as usize;
    if j != i {
        s.toggle(i, j);
        true
    } else {
        false
    }
}

/// Behavior statistics of ego `i` at hypothetical value `v`.
#[inline]
fn behavior_stat(t: BehTerm, s: &SimState, env: &Env, i: usize, v: i32, alter_mean: f64) -> f64 {
    let zc = f64::from(v) - env.centering.behavior_mean;
    match t {
        BehTerm::Linear => zc,
        BehTerm::Quad => zc * zc,
        BehTerm::TotSim => s.out[i].iter().map(|&j| env.sim(v, s.z[j as usize])).sum(),
        BehTerm::AvAlt => zc * alter_mean,
    }
}

fn alter_mean(s: &SimState, env: &Env, i: usize) -> f64 {
    let d = s.out[i].len();
    if d == 0 {
        return 0.0;
    }
    s.out[i]
        .iter()
        .map(|&j| f64::from(s.z[j as usize]) - env.centering.behavior_mean)
        .sum::<f64>()
        / d as f64
}

/// One behavior ministep of actor `i`. Returns the realised step.
pub(crate) fn behavior_ministep(
    s: &mut SimState,
    i: usize,
    terms: &[BehTerm],
    theta: &[f64],
    env: &Env,
    rng: &mut ChaCha8Rng,
    score: Option<&mut [f64]>,
) -> i32 {
    let u: f64 = rng.random();
    let cur = s.z[i];
    let am = if terms.contains(&BehTerm::AvAlt) {
        alter_mean(s, env, i)
    } else {
        0.0
    };
    let mut eta = [0.0f64; 3];
    let mut steps = [0i32; 3];
    let mut stats = [[0.0f64; 8]; 3];
    let k = terms.len();
    let mut m = 0;
    for delta in -1..=1 {
        let v = cur + delta;
        if v < env.zmin || v > env.zmax {
            continue;
        }
        let mut f = 0.0;
        for (kk, (t, th)) in terms.iter().zip(theta).enumerate() {
            let st = behavior_stat(*t, s, env, i, v, am);
            if kk < 8 {
                stats[m][kk] = st;
            }
            f += th * st;
        }
        eta[m] = f;
        steps[m] = delta;
        m += 1;
    }
    let (a, total) = draw(&mut eta[..m], u);
    if let Some(score) = score {
        debug_assert!(k <= 8);
        for kk in 0..k.min(8) {
            let mut expect = 0.0;
            for r in 0..m {
                expect += eta[r] / total * stats[r][kk];
            }
            score[kk] += stats[a][kk] - expect;
        }
    }
    s.z[i] = cur + steps[a];
    steps[a]
}

/// A composition change inside a period, at `time` in `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SimEvent {
    pub time: f64,
    pub leavers: Vec<usize>,
    /// Joiners with known entry behavior and actor covariates, or `None`
    /// to draw both from a random present actor at event time.
    pub joiners: Vec<(usize, Option<(i32, Vec<f64>)>)>,
}

fn apply_event(s: &mut SimState, ev: &mut SimEvent, aux: &mut ChaCha8Rng) {
    let donors: Vec<u32> = s.active_list.clone();
    for &l in &ev.leavers {
        s.isolate(l);
        s.active[l] = false;
    }
    for (j, attrs) in ev.joiners.iter_mut() {
        let j = *j;
        s.isolate(j);
        s.active[j] = true;
        if attrs.is_none() && !donors.is_empty() {
            let d = donors[aux.random_range(0..donors.len())] as usize;
            let covs = s.cov.iter().map(|c| c[d]).collect();
            *attrs = Some((s.z[d], covs));
        }
        if let Some((z, covs)) = attrs {
            s.z[j] = *z;
            for (c, v) in s.cov.iter_mut().zip(covs.iter()) {
                c[j] = *v;
            }
        }
    }
    s.rebuild_active_list();
}

/// Simulates one unit-length period in place.
///
/// Network and behavior opportunities form independent Poisson processes
/// with intensities `rate * (active actors)`; composition events are applied
/// at their scheduled times and resolve their joiner attributes in place.
pub(crate) fn simulate_period(
    s: &mut SimState,
    comp: &Compiled,
    params: Params<'_>,
    env: &Env,
    events: &mut [SimEvent],
    streams: &mut Streams,
    sc: &mut Scratch,
    mut score: Option<&mut Score>,
) {
    let mut t = 0.0;
    let mut next_event = 0;
    let has_beh = !comp.beh.is_empty() && params.beh_rate > 0.0;
    loop {
        let seg_end = events.get(next_event).map_or(1.0, |e| e.time);
        let n_act = s.active_list.len() as f64;
        if let Some(sc) = score.as_deref_mut() {
            sc.net_rate -= n_act * (seg_end - t);
            if has_beh {
                sc.beh_rate -= n_act * (seg_end - t);
            }
        }
        let net_intensity = params.net_rate * n_act;
        let beh_intensity = if has_beh { params.beh_rate * n_act } else { 0.0 };
        let mut next_net = next_time(t, net_intensity, &mut streams.net);
        let mut next_beh = next_time(t, beh_intensity, &mut streams.beh);
        loop {
            if next_net <= next_beh && next_net < seg_end {
                let a = s.active_list[streams.net.random_range(0..s.active_list.len())] as usize;
                let sc_net = score.as_deref_mut().map(|x| {
                    x.net_rate += 1.0 / params.net_rate;
                    x.net.as_mut_slice()
                });
                network_ministep(s, a, &comp.net, params.net, env, sc, &mut streams.net, sc_net);
                next_net = next_time(next_net, net_intensity, &mut streams.net);
            } else if next_beh < next_net && next_beh < seg_end {
                let a = s.active_list[streams.beh.random_range(0..s.active_list.len())] as usize;
                let sc_beh = score.as_deref_mut().map(|x| {
                    x.beh_rate += 1.0 / params.beh_rate;
                    x.beh.as_mut_slice()
                });
                behavior_ministep(s, a, &comp.beh, params.beh, env, &mut streams.beh, sc_beh);
                next_beh = next_time(next_beh, beh_intensity, &mut streams.beh);
            } else {
                break;
            }
        }
        if next_event >= events.len() {
            break;
        }
        apply_event(s, &mut events[next_event], &mut streams.aux);
        t = seg_end;
        next_event += 1;
    }
}

#[inline]
fn next_time(t: f64, intensity: f64, rng: &mut ChaCha8Rng) -> f64 {
    if intensity <= 0.0 {
        return f64::INFINITY;
    }
    let e: f64 = rng.sample(Exp1);
    t + e / intensity
}

/// Sums of network statistics over egos in `include`, evaluated on the
/// network of `x` with the behavior values `z` (cross-lagged when `z` comes
/// from the start of the period).
pub(crate) fn network_totals(x: &SimState, z: &[i32], include: &[bool], terms: &[NetTerm], env: &Env, out: &mut [f64]) {
    let n = x.n;
    for o in out.iter_mut() {
        *o = 0.0;
    }
    for i in 0..n {
        if !include[i] {
            continue;
        }
        let outs = &x.out[i];
        for (k, t) in terms.iter().enumerate() {
            let v = match *t {
                NetTerm::Density => outs.len() as f64,
                NetTerm::Recip => outs.iter().filter(|&&j| x.adj[j as usize * n + i] == 1).count() as f64,
                NetTerm::TransTrip => {
                    let mut c = 0u32;
                    for &j in outs {
                        for &h in &x.out[j as usize] {
                            c += u32::from(x.adj[i * n + h as usize]);
                        }
                    }
                    f64::from(c)
                }
                NetTerm::Cycle3 => {
                    let mut c = 0u32;
                    for &j in outs {
                        for &h in &x.out[j as usize] {
                            c += u32::from(x.adj[h as usize * n + i]);
                        }
                    }
                    f64::from(c)
                }
                NetTerm::TransRecTrip => {
                    let mut c = 0u32;
                    for &j in outs {
                        if x.adj[j as usize * n + i] == 0 {
                            continue;
                        }
                        for &h in &x.out[j as usize] {
                            c += u32::from(x.adj[i * n + h as usize]);
                        }
                    }
                    f64::from(c)
                }
                NetTerm::Dyad(d) => outs.iter().map(|&j| env.dyad[d][i * n + j as usize]).sum(),
                NetTerm::Same(a) => outs.iter().filter(|&&j| x.cov[a][i] == x.cov[a][j as usize]).count() as f64,
                NetTerm::Sim => outs.iter().map(|&j| env.sim(z[i], z[j as usize])).sum(),
            };
            out[k] += v;
        }
    }
}

/// Sums of behavior statistics over egos in `include`, evaluated on values
/// `z` with the network of `x`.
pub(crate) fn behavior_totals(
    x: &SimState,
    z: &[i32],
    include: &[bool],
    terms: &[BehTerm],
    env: &Env,
    out: &mut [f64],
) {
    for o in out.iter_mut() {
        *o = 0.0;
    }
    let zbar = env.centering.behavior_mean;
    for i in 0..x.n {
        if !include[i] {
            continue;
        }
        let zc = f64::from(z[i]) - zbar;
        let outs = &x.out[i];
        for (k, t) in terms.iter().enumerate() {
            let v = match t {
                BehTerm::Linear => zc,
                BehTerm::Quad => zc * zc,
                BehTerm::TotSim => outs.iter().map(|&j| env.sim(z[i], z[j as usize])).sum(),
                BehTerm::AvAlt => {
                    if outs.is_empty() {
                        0.0
                    } else {
                        let m: f64 =
                            outs.iter().map(|&j| f64::from(z[j as usize]) - zbar).sum::<f64>() / outs.len() as f64;
                        zc * m
                    }
                }
            };
            out[k] += v;
        }
    }
}
