use std::borrow::Cow;
use std::collections::HashMap;

use rayon::prelude::*;

use super::estimate::filter_for;
use super::sample::Scratch;
use super::{EstimatorConfig, IcError, IcInstance, Objective};
use crate::graph::EdgeId;
use crate::optimize::{GreedyTrace, TraceMeta};
use crate::stats::Estimate;

/// A sample whose terminal is infected before any deletion.
struct Live {
    terminal: usize,
    /// Activated edges of the terminal's component, sorted.
    edges: Vec<EdgeId>,
    /// Edges whose deletion would cut the terminal off from every seed;
    /// `None` once it already is.
    critical: Option<Vec<EdgeId>>,
}

/// Edges of `edges` (minus `deleted`) separating `terminal` from all seeds,
/// or `None` when no seed is reachable. Tree edge `(p, c)` of a DFS rooted
/// at the terminal is such an edge iff it is a bridge and every reachable
/// seed lies below `c`.
fn critical_edges(
    inst: &IcInstance,
    terminal: usize,
    edges: &[EdgeId],
    deleted: &[bool],
) -> Option<Vec<EdgeId>> {
    let g = inst.graph();
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut adj: Vec<Vec<(usize, EdgeId)>> = Vec::new();
    let mut index = |v: usize, vertices: &mut Vec<usize>, adj: &mut Vec<Vec<(usize, EdgeId)>>| {
        *local.entry(v).or_insert_with(|| {
            vertices.push(v);
            adj.push(Vec::new());
            vertices.len() - 1
        })
    };
    let root = index(terminal, &mut vertices, &mut adj);
    for &id in edges.iter().filter(|&&id| !deleted[id]) {
        let (u, v) = g.endpoints(id).expect("sample edges are live");
        let (a, b) = (index(u, &mut vertices, &mut adj), index(v, &mut vertices, &mut adj));
        adj[a].push((b, id));
        adj[b].push((a, id));
    }

    const UNSEEN: usize = usize::MAX;
    let k = vertices.len();
    let mut disc = vec![UNSEEN; k];
    let mut low = vec![0; k];
    let mut below = vec![0usize; k];
    let mut tree_edges = Vec::new();
    // (vertex, edge into it, next adjacency position)
    let mut stack = vec![(root, usize::MAX, 0usize)];
    disc[root] = 0;
    low[root] = 0;
    below[root] = inst.is_seed(terminal) as usize;
    let mut time = 1;
    while let Some(&mut (u, via, ref mut pos)) = stack.last_mut() {
        if let Some(&(w, id)) = adj[u].get(*pos) {
            *pos += 1;
            if id == via {
                continue;
            }
            if disc[w] == UNSEEN {
                disc[w] = time;
                low[w] = time;
                below[w] = inst.is_seed(vertices[w]) as usize;
                time += 1;
                stack.push((w, id, 0));
            } else {
                low[u] = low[u].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[u]);
                below[p] += below[u];
                tree_edges.push((p, u, via));
            }
        }
    }
    let total = below[root];
    if total == 0 {
        return None;
    }
    let mut critical: Vec<EdgeId> = tree_edges
        .into_iter()
        .filter(|&(p, c, _)| low[c] > disc[p] && below[c] == total)
        .map(|(_, _, id)| id)
        .collect();
    critical.sort_unstable();
    Some(critical)
}

/// Greedy edge deletion on one fixed set of `R` samples.
///
/// The samples are exactly those of [`super::estimate_sigma`] (or
/// [`super::estimate_sigma_prime`]) under `cfg`, so every value in the trace
/// equals that estimator evaluated at the corresponding prefix. A
/// candidate's gain is the number of currently infected terminals it would
/// cut off from all seeds; ties go to the lowest edge id.
pub fn greedy_icsir(
    inst: &IcInstance,
    k: usize,
    cfg: &EstimatorConfig,
    objective: Objective,
) -> Result<GreedyTrace, IcError> {
    let q = inst.candidates().to_vec();
    if k > q.len() {
        return Err(IcError::Budget { k, q: q.len() });
    }
    let filter = match objective {
        Objective::Sigma => None,
        Objective::SigmaPrime => Some(filter_for(inst, cfg)?),
    };
    let rounds = cfg.rounds_for(inst.n())?;
    let adj = inst.graph().undirected_adjacency(None);
    let none = vec![false; inst.graph().id_bound()];

    let drawn: Vec<Result<(Option<Live>, u64), (u64, IcError)>> = (0..rounds as u64)
        .into_par_iter()
        .map_init(
            || Scratch::with_adjacency(inst, Cow::Borrowed(&adj)),
            |scratch, round| {
                let d = scratch
                    .draw(inst, cfg.seed, round, filter.as_ref())
                    .map_err(|e| (round, e))?;
                let live = (d.tree && scratch.reaches_seed(inst, d.terminal, &none)).then(|| {
                    let edges = scratch.component_edges(d.terminal);
                    let critical = critical_edges(inst, d.terminal, &edges, &none);
                    Live {
                        terminal: d.terminal,
                        edges,
                        critical,
                    }
                });
                Ok((live, d.resamples as u64))
            },
        )
        .collect();

    let mut samples = Vec::new();
    let mut resamples = 0;
    for r in drawn {
        let (live, extra) = r.map_err(|(_, e)| e)?;
        resamples += extra;
        samples.extend(live);
    }

    let id_bound = inst.graph().id_bound();
    let mut gain = vec![0u64; id_bound];
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); id_bound];
    let mut successes = 0u64;
    for (s, live) in samples.iter().enumerate() {
        let critical = live.critical.as_ref().expect("live samples start infected");
        successes += 1;
        for &id in critical {
            gain[id] += 1;
        }
        for &id in &live.edges {
            touching[id].push(s);
        }
    }

    let n = inst.n();
    let value = |successes: u64| Estimate::from_successes(successes, rounds, n, resamples).mean;
    let mut trace = GreedyTrace::start(
        value(successes),
        TraceMeta {
            objective: objective.name().into(),
            guarantee: objective == Objective::SigmaPrime,
            rounds: Some(rounds),
            epsilon: cfg.rounds.is_none().then_some(cfg.epsilon),
            seed: Some(cfg.seed),
        },
    );
    let mut deleted = none;
    for _ in 0..k {
        let mut best: Option<EdgeId> = None;
        for &id in q.iter().filter(|&&id| !deleted[id]) {
            if best.map_or(true, |b| gain[id] > gain[b]) {
                best = Some(id);
            }
        }
        let e = best.expect("k <= |Q| leaves a candidate");
        deleted[e] = true;
        let before = value(successes);
        for &s in &touching[e] {
            let live = &mut samples[s];
            let Some(old) = live.critical.take() else {
                continue;
            };
            for &id in &old {
                gain[id] -= 1;
            }
            if old.binary_search(&e).is_ok() {
                successes -= 1;
            } else {
                let new = critical_edges(inst, live.terminal, &live.edges, &deleted)
                    .expect("a non-critical deletion keeps the terminal infected");
                for &id in &new {
                    gain[id] += 1;
                }
                live.critical = Some(new);
            }
        }
        let after = value(successes);
        trace.push(e, before - after, after);
    }
    Ok(trace)
}
