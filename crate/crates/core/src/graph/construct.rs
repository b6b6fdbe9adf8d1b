use rand::seq::index;

use super::{EdgeId, EdgeSet, Graph, GraphError};
use crate::rng;

/// Reduction from minimum bisection of a cubic graph to the decision version
/// of edge deletion: three stars whose centers are the seeds, each star
/// having every base vertex as a leaf.
#[derive(Clone, Debug)]
pub struct HardnessInstance {
    pub graph: Graph,
    /// The three star centers.
    pub seeds: Vec<usize>,
    /// Every edge of the construction.
    pub candidates: EdgeSet,
    /// `b + 3n/2`.
    pub budget: usize,
    /// `3 + n/2`.
    pub threshold: usize,
    /// Vertex count of the cubic base graph; base vertices keep ids `0..n`.
    pub base_n: usize,
    /// `star_edges[s][u]` joins center `s` to base vertex `u`.
    pub star_edges: [Vec<EdgeId>; 3],
}

pub fn build_hardness_instance(g3: &Graph, b: usize) -> Result<HardnessInstance, GraphError> {
    if g3.is_directed() {
        return Err(GraphError::Directed);
    }
    let n = g3.n();
    for (vertex, degree) in g3.degrees().into_iter().enumerate() {
        if degree != 3 {
            return Err(GraphError::NotCubic { vertex, degree });
        }
    }
    if n % 2 != 0 {
        return Err(GraphError::OddVertexCount(n));
    }

    let mut graph = Graph::undirected(n + 3);
    for (_, u, v) in g3.edges() {
        graph.add_edge(u, v)?;
    }
    let mut star_edges: [Vec<EdgeId>; 3] = Default::default();
    for (s, edges) in star_edges.iter_mut().enumerate() {
        for u in 0..n {
            edges.push(graph.add_edge(n + s, u)?);
        }
    }
    Ok(HardnessInstance {
        candidates: graph.edge_ids(),
        graph,
        seeds: vec![n, n + 1, n + 2],
        budget: b + 3 * n / 2,
        threshold: 3 + n / 2,
        base_n: n,
        star_edges,
    })
}

impl HardnessInstance {
    /// The deletion set used in the completeness argument: the cut edges
    /// between `side` and its complement plus every star edge into `side`.
    pub fn completeness_deletion(&self, side: &[usize]) -> Result<EdgeSet, GraphError> {
        let n = self.base_n;
        let half = n / 2;
        let mut in_side = vec![false; n];
        for &u in side {
            if u >= n || in_side[u] {
                return Err(GraphError::InvalidBisection { expected: half });
            }
            in_side[u] = true;
        }
        if side.len() != half {
            return Err(GraphError::InvalidBisection { expected: half });
        }
        let mut p = EdgeSet::new();
        for (id, u, v) in self.graph.edges() {
            if u < n && v < n && in_side[u] != in_side[v] {
                p.insert(id);
            }
        }
        for star in &self.star_edges {
            for &u in side {
                p.insert(star[u]);
            }
        }
        Ok(p)
    }

    /// Vertices reachable from the seeds (seeds included) after deleting `p`.
    pub fn reachable_after(&self, p: &EdgeSet) -> Result<usize, GraphError> {
        let mask = self.graph.mask(p)?;
        Ok(self
            .graph
            .reachable_from(&self.seeds, Some(&mask))
            .into_iter()
            .filter(|&r| r)
            .count())
    }
}

/// Picks `num_adv` vertices uniformly and gives each `nu` new edges to
/// uniformly chosen current non-neighbors. New edges get fresh ids.
pub fn perturb_adversarial(
    g: &Graph,
    num_adv: usize,
    nu: usize,
    seed: u64,
) -> Result<Graph, GraphError> {
    let n = g.n();
    if num_adv > n {
        return Err(GraphError::TooManyAdversaries { count: num_adv, n });
    }
    let mut out = g.clone();
    if num_adv == 0 || nu == 0 {
        return Ok(out);
    }
    let mut rng = rng::seeded(seed);
    let adversaries = index::sample(&mut rng, n, num_adv).into_vec();
    for a in adversaries {
        let candidates: Vec<usize> = (0..n)
            .filter(|&w| w != a && out.find_edge(a, w).is_none() && out.find_edge(w, a).is_none())
            .collect();
        if candidates.len() < nu {
            return Err(GraphError::NotEnoughNonEdges {
                vertex: a,
                available: candidates.len(),
                requested: nu,
            });
        }
        for i in index::sample(&mut rng, candidates.len(), nu) {
            out.add_edge(a, candidates[i])?;
        }
    }
    Ok(out)
}

/// Removes edges at the currently highest-degree vertex until no vertex
/// exceeds `max_deg`. Ties go to the lowest vertex id, then the lowest edge
/// id among its incident edges.
pub fn degree_cap_preprocess(g: &Graph, max_deg: usize) -> (Graph, EdgeSet) {
    let mut out = g.clone();
    let mut degree = g.degrees();
    let mut incident: Vec<Vec<EdgeId>> = vec![Vec::new(); g.n()];
    for (id, u, v) in g.edges() {
        incident[u].push(id);
        incident[v].push(id);
    }
    let mut removed = EdgeSet::new();
    loop {
        let Some((v, &d)) = degree
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        else {
            break;
        };
        if d <= max_deg {
            break;
        }
        let id = *incident[v]
            .iter()
            .find(|&&id| out.contains_edge(id))
            .expect("positive degree implies a live incident edge");
        let (a, b) = out.endpoints(id).unwrap();
        out.alive[id] = false;
        degree[a] -= 1;
        degree[b] -= 1;
        removed.insert(id);
    }
    (out, removed)
}
