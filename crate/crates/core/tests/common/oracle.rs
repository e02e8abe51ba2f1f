//! Brute-force reference implementations of effect statistics and the
//! triad census, written against edge sets rather than adjacency rows.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saompower::gof::{triad_census, TRIAD_CLASSES};
use saompower::model::{actor_statistic, BehaviorState, Centering, CovariateSet, EffectKind, NetworkState, StateView};

pub struct Graph {
    pub n: usize,
    pub edges: HashSet<(usize, usize)>,
}

impl Graph {
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        Self { n, edges }
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    pub fn to_network(&self) -> NetworkState {
        let edges: Vec<_> = self.edges.iter().copied().collect();
        NetworkState::from_edges(self.n, &edges).unwrap()
    }
}

/// Census class of a triad from its dyad types and degrees.
pub fn classify(g: &Graph, t: [usize; 3]) -> &'static str {
    let pairs = [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])];
    let (mut m, mut a) = (0, 0);
    for &(p, q) in &pairs {
        match (g.has(p, q), g.has(q, p)) {
            (true, true) => m += 1,
            (false, false) => {}
            _ => a += 1,
        }
    }
    let out = |v: usize| t.iter().filter(|&&w| w != v && g.has(v, w)).count();
    let inn = |v: usize| t.iter().filter(|&&w| w != v && g.has(w, v)).count();
    let any = |f: &dyn Fn(usize) -> bool| t.iter().any(|&v| f(v));
    match (m, a) {
        (0, 0) => "003",
        (0, 1) => "012",
        (1, 0) => "102",
        (0, 2) => {
            if any(&|v| out(v) == 2) {
                "021D"
            } else if any(&|v| inn(v) == 2) {
                "021U"
            } else {
                "021C"
            }
        }
        (1, 1) => {
            // the asymmetric tie touches one member of the mutual dyad
            if any(&|v| inn(v) == 2 && out(v) == 1) {
                "111D"
            } else {
                "111U"
            }
        }
        (0, 3) => {
            if any(&|v| out(v) == 2) {
                "030T"
            } else {
                "030C"
            }
        }
        (2, 0) => "201",
        (1, 2) => {
            if any(&|v| out(v) == 2 && inn(v) == 0) {
                "120D"
            } else if any(&|v| inn(v) == 2 && out(v) == 0) {
                "120U"
            } else {
                "120C"
            }
        }
        (2, 1) => "210",
        (3, 0) => "300",
        _ => unreachable!(),
    }
}

pub fn brute_census(g: &Graph) -> BTreeMap<&'static str, u64> {
    let mut counts: BTreeMap<&'static str, u64> = TRIAD_CLASSES.iter().map(|&c| (c, 0)).collect();
    for a in 0..g.n {
        for b in a + 1..g.n {
            for c in b + 1..g.n {
                *counts.get_mut(classify(g, [a, b, c])).unwrap() += 1;
            }
        }
    }
    counts
}

pub struct Attributes {
    pub z: Vec<i32>,
    pub zmin: i32,
    pub zmax: i32,
    pub sex: Vec<f64>,
    pub dist: Vec<f64>,
}

impl Attributes {
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        Self {
            z: (0..n).map(|_| rng.random_range(1..=5)).collect(),
            zmin: 1,
            zmax: 5,
            sex: (0..n).map(|_| f64::from(rng.random_range(0..2u8))).collect(),
            dist: (0..n * n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        }
    }
}

pub fn effects() -> Vec<EffectKind> {
    vec![
        EffectKind::Density,
        EffectKind::Recip,
        EffectKind::TransTrip,
        EffectKind::Cycle3,
        EffectKind::TransRecTrip,
        EffectKind::DyadX("dist".into()),
        EffectKind::SameX("sex".into()),
        EffectKind::SimX,
        EffectKind::Linear,
        EffectKind::Quad,
        EffectKind::TotSim,
        EffectKind::AvAlt,
    ]
}

/// Mean of `1 - |z_i - z_j| / width` over ordered pairs.
pub fn brute_similarity_mean(z: &[i32], width: i32) -> f64 {
    let n = z.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += 1.0 - f64::from((z[i] - z[j]).abs()) / f64::from(width);
            }
        }
    }
    total / (n * (n - 1)) as f64
}

pub fn brute_statistic(g: &Graph, at: &Attributes, c: &Centering, i: usize, kind: &EffectKind) -> f64 {
    let alters: Vec<usize> = g.edges.iter().filter(|e| e.0 == i).map(|e| e.1).collect();
    let width = f64::from(at.zmax - at.zmin);
    let sim = |a: usize, b: usize| 1.0 - f64::from((at.z[a] - at.z[b]).abs()) / width - c.similarity_mean;
    let zc = |a: usize| f64::from(at.z[a]) - c.behavior_mean;
    let count = |pred: &dyn Fn(usize, usize) -> bool| {
        let mut k = 0.0;
        for j in 0..g.n {
            for h in 0..g.n {
                if j != h && j != i && h != i && pred(j, h) {
                    k += 1.0;
                }
            }
        }
        k
    };
    match kind {
        EffectKind::Density => alters.len() as f64,
        EffectKind::Recip => alters.iter().filter(|&&j| g.has(j, i)).count() as f64,
        EffectKind::TransTrip => count(&|j, h| g.has(i, j) && g.has(j, h) && g.has(i, h)),
        EffectKind::Cycle3 => count(&|j, h| g.has(i, j) && g.has(j, h) && g.has(h, i)),
        EffectKind::TransRecTrip => count(&|j, h| g.has(i, j) && g.has(j, i) && g.has(j, h) && g.has(i, h)),
        EffectKind::DyadX(_) => alters.iter().map(|&j| at.dist[i * g.n + j]).sum(),
        EffectKind::SameX(_) => alters.iter().filter(|&&j| at.sex[j] == at.sex[i]).count() as f64,
        EffectKind::SimX | EffectKind::TotSim => alters.iter().map(|&j| sim(i, j)).sum(),
        EffectKind::Linear => zc(i),
        EffectKind::Quad => zc(i).powi(2),
        EffectKind::AvAlt => {
            if alters.is_empty() {
                0.0
            } else {
                zc(i) * alters.iter().map(|&j| zc(j)).sum::<f64>() / alters.len() as f64
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct OracleTally {
    pub graphs: usize,
    pub comparisons: usize,
    pub mismatches: Vec<String>,
}

impl OracleTally {
    fn check_graph(&mut self, g: &Graph, at: &Attributes) {
        self.graphs += 1;
        let net = g.to_network();
        if g.n >= 3 {
            let census = triad_census(&net).unwrap();
            let brute = brute_census(g);
            for (k, name) in TRIAD_CLASSES.iter().enumerate() {
                self.comparisons += 1;
                if census[k] != brute[name] {
                    self.mismatches.push(format!(
                        "n={} edges={:?} class {name}: {} vs {}",
                        g.n, g.edges, census[k], brute[name]
                    ));
                }
            }
        }
        let width = at.zmax - at.zmin;
        let centering = Centering::from_values(&at.z, width);
        self.comparisons += 1;
        if (centering.similarity_mean - brute_similarity_mean(&at.z, width)).abs() > 1e-12 {
            self.mismatches.push(format!("similarity mean for z={:?}", at.z));
        }
        let behavior = BehaviorState::new(at.z.clone(), at.zmin, at.zmax).unwrap();
        let mut cov = CovariateSet::default();
        cov.actor.insert("sex".into(), at.sex.clone());
        cov.dyadic.insert("dist".into(), at.dist.clone());
        let view = StateView {
            network: &net,
            behavior: &behavior,
            covariates: &cov,
        };
        for i in 0..g.n {
            for kind in effects() {
                let got = actor_statistic(view, i, &kind, &centering).unwrap();
                let want = brute_statistic(g, at, &centering, i, &kind);
                self.comparisons += 1;
                if (got - want).abs() > 1e-9 {
                    self.mismatches.push(format!(
                        "n={} edges={:?} actor {i} {kind}: {got} vs {want}",
                        g.n, g.edges
                    ));
                }
            }
        }
    }
}

/// Every graph on 2..=4 nodes plus `random` graphs on 5 nodes.
pub fn run(random: usize, seed: u64) -> OracleTally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = OracleTally::default();
    for n in 2..=4usize {
        let dyads = n * (n - 1);
        for mask in 0..1u64 << dyads {
            let at = Attributes::random(n, &mut rng);
            tally.check_graph(&Graph::from_mask(n, mask), &at);
        }
    }
    for _ in 0..random {
        let mask = rng.random_range(0..1u64 << 20);
        let at = Attributes::random(5, &mut rng);
        tally.check_graph(&Graph::from_mask(5, mask), &at);
    }
    tally
}
