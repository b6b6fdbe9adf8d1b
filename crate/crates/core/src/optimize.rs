//! Model-agnostic greedy, baselines, brute-force optimum and an exhaustive
//! supermodularity checker.
//!
//! Set functions are oracles `FnMut(&[EdgeId]) -> Result<f64, E>` taking the
//! deletion set as a sorted slice of edge ids.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{EdgeId, EdgeSet, Graph};

/// Enumeration limit for [`brute_force_opt`].
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;
/// Largest candidate set [`check_supermodular`] accepts.
pub const SUPERMODULAR_CHECK_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError<E = std::convert::Infallible> {
    #[error("budget {k} exceeds the {q} candidates")]
    Budget { k: usize, q: usize },
    #[error("{what} over {q} candidates exceeds the enumeration limit")]
    TooLarge { what: &'static str, q: usize },
    #[error("oracle failed: {0}")]
    Oracle(E),
}

/// Describes how a trace was produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceMeta {
    pub objective: String,
    /// Whether the approximation guarantee is known to apply.
    pub guarantee: bool,
    /// Monte-Carlo rounds, for sampled objectives.
    pub rounds: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
}

/// Deletion order of a greedy run. `objective_values[r]` is the objective
/// after `r` deletions, `gains[r]` the decrease achieved by `chosen[r]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GreedyTrace {
    pub chosen: Vec<EdgeId>,
    pub objective_values: Vec<f64>,
    pub gains: Vec<f64>,
    pub meta: TraceMeta,
}

impl GreedyTrace {
    pub fn start(initial: f64, meta: TraceMeta) -> Self {
        GreedyTrace {
            chosen: Vec::new(),
            objective_values: vec![initial],
            gains: Vec::new(),
            meta,
        }
    }

    pub fn push(&mut self, id: EdgeId, gain: f64, value: f64) {
        self.chosen.push(id);
        self.gains.push(gain);
        self.objective_values.push(value);
    }

    /// The first `k` deletions as a set.
    pub fn prefix(&self, k: usize) -> EdgeSet {
        self.chosen[..k.min(self.chosen.len())].iter().collect()
    }

    pub fn final_value(&self) -> f64 {
        *self.objective_values.last().expect("a trace holds the empty-set value")
    }
}

fn check_budget<E>(k: usize, q: usize) -> Result<(), OptimizeError<E>> {
    if k > q {
        Err(OptimizeError::Budget { k, q })
    } else {
        Ok(())
    }
}

fn with_edge(p: &[EdgeId], e: EdgeId) -> Vec<EdgeId> {
    let mut out = p.to_vec();
    let pos = out.partition_point(|&x| x < e);
    out.insert(pos, e);
    out
}

/// Plain greedy: each round evaluates `f(P + e)` for every remaining
/// candidate and keeps the largest decrease, lowest id on ties. Uses exactly
/// `1 + sum_{r<k} (|Q| - r)` oracle calls.
pub fn greedy<E, F>(mut f: F, q: &EdgeSet, k: usize) -> Result<GreedyTrace, OptimizeError<E>>
where
    F: FnMut(&[EdgeId]) -> Result<f64, E>,
{
    check_budget(k, q.len())?;
    let mut p: Vec<EdgeId> = Vec::new();
    let mut current = f(&p).map_err(OptimizeError::Oracle)?;
    let mut trace = GreedyTrace::start(current, TraceMeta::default());
    for _ in 0..k {
        let mut best: Option<(EdgeId, f64)> = None;
        for e in q.iter().filter(|e| p.binary_search(e).is_err()) {
            let value = f(&with_edge(&p, e)).map_err(OptimizeError::Oracle)?;
            if best.map_or(true, |(_, b)| value < b) {
                best = Some((e, value));
            }
        }
        let (e, value) = best.expect("k <= |Q| leaves a candidate");
        p = with_edge(&p, e);
        trace.push(e, current - value, value);
        current = value;
    }
    Ok(trace)
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Exact minimizer of `f` over all `k`-subsets of `q`; ties go to the
/// lexicographically smallest set.
pub fn brute_force_opt<E, F>(
    mut f: F,
    q: &EdgeSet,
    k: usize,
) -> Result<(EdgeSet, f64), OptimizeError<E>>
where
    F: FnMut(&[EdgeId]) -> Result<f64, E>,
{
    check_budget(k, q.len())?;
    if binomial(q.len(), k) > BRUTE_FORCE_LIMIT {
        return Err(OptimizeError::TooLarge {
            what: "brute-force optimum",
            q: q.len(),
        });
    }
    let mut best: Option<(Vec<EdgeId>, f64)> = None;
    for subset in q.iter().combinations(k) {
        let value = f(&subset).map_err(OptimizeError::Oracle)?;
        if best.as_ref().map_or(true, |(_, b)| value < *b) {
            best = Some((subset, value));
        }
    }
    let (set, value) = best.expect("C(|Q|, k) >= 1");
    Ok((set.into(), value))
}

/// A pair `P1 ⊆ P2` (and for the gain inequalities an `e` outside `P2`)
/// where a property fails, with the size of the failure.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub p1: EdgeSet,
    pub p2: EdgeSet,
    pub e: Option<EdgeId>,
    pub amount: f64,
}

/// First violation found of each property; `None` means it holds on every
/// nested pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SupermodularReport {
    /// `f(P1) - f(P1 + e) < f(P2) - f(P2 + e) - tol`
    pub supermodular: Option<Violation>,
    /// `f(P1) - f(P1 + e) > f(P2) - f(P2 + e) + tol`
    pub submodular: Option<Violation>,
    /// `f(P1) < f(P2) - tol`
    pub monotone: Option<Violation>,
}

impl SupermodularReport {
    pub fn is_supermodular(&self) -> bool {
        self.supermodular.is_none()
    }

    pub fn is_submodular(&self) -> bool {
        self.submodular.is_none()
    }

    /// Non-increasing under deletion.
    pub fn is_monotone(&self) -> bool {
        self.monotone.is_none()
    }

    pub fn is_modular(&self) -> bool {
        self.is_supermodular() && self.is_submodular()
    }
}

/// Evaluates `f` on all `2^|Q|` subsets and checks the supermodular,
/// submodular and monotone inequalities over every nested pair.
pub fn check_supermodular<E, F>(
    mut f: F,
    q: &EdgeSet,
    tol: f64,
) -> Result<SupermodularReport, OptimizeError<E>>
where
    F: FnMut(&[EdgeId]) -> Result<f64, E>,
{
    let ids = q.to_vec();
    let m = ids.len();
    if m > SUPERMODULAR_CHECK_LIMIT {
        return Err(OptimizeError::TooLarge {
            what: "supermodularity check",
            q: m,
        });
    }
    let subset = |mask: usize| -> Vec<EdgeId> {
        (0..m).filter(|b| mask >> b & 1 == 1).map(|b| ids[b]).collect()
    };
    let mut values = Vec::with_capacity(1 << m);
    for mask in 0..1usize << m {
        values.push(f(&subset(mask)).map_err(OptimizeError::Oracle)?);
    }
    let violation = |p1: usize, p2: usize, e: Option<usize>, amount: f64| Violation {
        p1: subset(p1).into(),
        p2: subset(p2).into(),
        e: e.map(|b| ids[b]),
        amount,
    };

    let mut report = SupermodularReport::default();
    let full = (1usize << m) - 1;
    for p2 in 0..=full {
        // all submasks of p2, including p2 itself and 0
        let mut p1 = p2;
        loop {
            if report.monotone.is_none() && values[p1] < values[p2] - tol {
                report.monotone = Some(violation(p1, p2, None, values[p2] - values[p1]));
            }
            for b in (0..m).filter(|b| p2 >> b & 1 == 0) {
                let g1 = values[p1] - values[p1 | 1 << b];
                let g2 = values[p2] - values[p2 | 1 << b];
                if report.supermodular.is_none() && g1 < g2 - tol {
                    report.supermodular = Some(violation(p1, p2, Some(b), g2 - g1));
                }
                if report.submodular.is_none() && g1 > g2 + tol {
                    report.submodular = Some(violation(p1, p2, Some(b), g1 - g2));
                }
            }
            if p1 == 0 {
                break;
            }
            p1 = (p1 - 1) & p2;
        }
    }
    Ok(report)
}

/// Deletion order for the max-degree heuristic: each round takes the
/// lowest-id remaining candidate at the highest-degree vertex (lowest vertex
/// id on ties) that still has one. Degrees count all live edges and are
/// recomputed after every deletion.
pub fn max_degree_order(g: &Graph, q: &EdgeSet, k: usize) -> Result<Vec<EdgeId>, OptimizeError> {
    check_budget(k, q.len())?;
    let mut degree = g.degrees();
    let mut incident: Vec<Vec<EdgeId>> = vec![Vec::new(); g.n()];
    for id in q.iter() {
        let (u, v) = g
            .endpoints(id)
            .expect("candidate ids name live edges of the graph");
        incident[u].push(id);
        incident[v].push(id);
    }
    let mut removed = vec![false; g.id_bound()];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let mut vertices: Vec<usize> = (0..g.n()).collect();
        vertices.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
        let id = vertices
            .iter()
            .find_map(|&v| incident[v].iter().copied().find(|&id| !removed[id]))
            .expect("k <= |Q| leaves a candidate");
        removed[id] = true;
        let (u, v) = g.endpoints(id).unwrap();
        degree[u] -= 1;
        degree[v] -= 1;
        order.push(id);
    }
    Ok(order)
}

pub fn max_degree_baseline(g: &Graph, q: &EdgeSet, k: usize) -> Result<EdgeSet, OptimizeError> {
    Ok(max_degree_order(g, q, k)?.into())
}

/// A uniformly random ordered `k`-subset of `q`; its prefixes are uniform
/// subsets of every smaller size.
pub fn random_order<R: Rng + ?Sized>(
    q: &EdgeSet,
    k: usize,
    rng: &mut R,
) -> Result<Vec<EdgeId>, OptimizeError> {
    check_budget(k, q.len())?;
    let mut ids = q.to_vec();
    let (picked, _) = ids.partial_shuffle(rng, k);
    Ok(picked.to_vec())
}

pub fn random_baseline<R: Rng + ?Sized>(
    q: &EdgeSet,
    k: usize,
    rng: &mut R,
) -> Result<EdgeSet, OptimizeError> {
    Ok(random_order(q, k, rng)?.into())
}
