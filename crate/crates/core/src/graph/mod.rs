//! Graph container, random generators, structural analysis and I/O.
//!
//! Edges carry stable integer ids. Ids are handed out densely as edges are
//! added and are never reassigned: deleting an edge only marks it dead, so a
//! deletion set computed on one graph keeps meaning the same edges on every
//! graph derived from it.

mod analysis;
mod construct;
mod generate;
mod io;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

pub use analysis::{analyze, analyze_masked, Component, ComponentAnalysis};
pub use construct::{
    build_hardness_instance, degree_cap_preprocess, perturb_adversarial, HardnessInstance,
};
pub use generate::{gen_er, gen_sbm};
pub use io::{load_edge_list, parse_edge_list, save_edge_list, write_edge_list, EdgeList};

pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("unknown or already deleted edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("block probability matrix must be {kappa}x{kappa} and symmetric")]
    InvalidBlockMatrix { kappa: usize },
    #[error("graph is not 3-regular (vertex {vertex} has degree {degree})")]
    NotCubic { vertex: usize, degree: usize },
    #[error("vertex count {0} must be even")]
    OddVertexCount(usize),
    #[error("operation requires an undirected graph")]
    Directed,
    #[error("vertex {vertex} has only {available} non-neighbors, {requested} requested")]
    NotEnoughNonEdges {
        vertex: usize,
        available: usize,
        requested: usize,
    },
    #[error("{count} adversaries requested on {n} vertices")]
    TooManyAdversaries { count: usize, n: usize },
    #[error("bisection side must hold exactly {expected} distinct vertices of the base graph")]
    InvalidBisection { expected: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// A simple graph (no self-loops, no parallel edges) with stable edge ids.
#[derive(Clone, PartialEq)]
pub struct Graph {
    n: usize,
    directed: bool,
    endpoints: Vec<(usize, usize)>,
    alive: Vec<bool>,
    lookup: HashMap<(usize, usize), EdgeId>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("directed", &self.directed)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    pub fn new(n: usize, directed: bool) -> Self {
        Graph {
            n,
            directed,
            endpoints: Vec::new(),
            alive: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    pub fn undirected(n: usize) -> Self {
        Self::new(n, false)
    }

    pub fn directed(n: usize) -> Self {
        Self::new(n, true)
    }

    /// Builds a graph from endpoint pairs; ids follow iteration order.
    pub fn from_edges<I>(n: usize, directed: bool, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(n, directed);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    fn key(&self, u: usize, v: usize) -> (usize, usize) {
        if self.directed || u < v {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<EdgeId, GraphError> {
        for x in [u, v] {
            if x >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let key = self.key(u, v);
        if self.lookup.contains_key(&key) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        let id = self.endpoints.len();
        self.endpoints.push((u, v));
        self.alive.push(true);
        self.lookup.insert(key, id);
        Ok(id)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of live edges.
    pub fn edge_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    /// Upper bound (exclusive) on edge ids ever issued by this graph.
    pub fn id_bound(&self) -> usize {
        self.endpoints.len()
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.alive.get(id).copied().unwrap_or(false)
    }

    /// Endpoints of a live edge, `(source, target)` for directed graphs.
    pub fn endpoints(&self, id: EdgeId) -> Option<(usize, usize)> {
        if self.contains_edge(id) {
            Some(self.endpoints[id])
        } else {
            None
        }
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<EdgeId> {
        self.lookup
            .get(&self.key(u, v))
            .copied()
            .filter(|&id| self.alive[id])
    }

    /// Live edges as `(id, u, v)` in id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, usize, usize)> + '_ {
        self.endpoints
            .iter()
            .enumerate()
            .filter(move |(id, _)| self.alive[*id])
            .map(|(id, &(u, v))| (id, u, v))
    }

    pub fn edge_ids(&self) -> EdgeSet {
        self.edges().map(|(id, _, _)| id).collect()
    }

    /// Incident-edge count per vertex (in + out for directed graphs).
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for (_, u, v) in self.edges() {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Adjacency ignoring direction, skipping edges flagged in `deleted`.
    /// Entries are `(neighbor, edge id)` sorted by edge id.
    pub fn undirected_adjacency(&self, deleted: Option<&[bool]>) -> Vec<Vec<(usize, EdgeId)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (id, u, v) in self.edges() {
            if deleted.is_some_and(|d| d.get(id).copied().unwrap_or(false)) {
                continue;
            }
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        adj
    }

    /// Out-neighbors along edge direction (both ways for undirected graphs).
    pub fn out_adjacency(&self) -> Vec<Vec<(usize, EdgeId)>> {
        if !self.directed {
            return self.undirected_adjacency(None);
        }
        let mut adj = vec![Vec::new(); self.n];
        for (id, u, v) in self.edges() {
            adj[u].push((v, id));
        }
        adj
    }

    /// Deletion mask indexed by edge id; errors on ids that are not live.
    pub fn mask(&self, set: &EdgeSet) -> Result<Vec<bool>, GraphError> {
        let mut mask = vec![false; self.id_bound()];
        for id in set.iter() {
            if !self.contains_edge(id) {
                return Err(GraphError::UnknownEdge(id));
            }
            mask[id] = true;
        }
        Ok(mask)
    }

    /// Same vertices, edges `E \ P`, surviving ids unchanged.
    pub fn delete_edges(&self, p: &EdgeSet) -> Result<Graph, GraphError> {
        let mask = self.mask(p)?;
        let mut g = self.clone();
        for (id, &dead) in mask.iter().enumerate() {
            if dead {
                g.alive[id] = false;
            }
        }
        Ok(g)
    }

    /// Vertices reachable from `sources` (included) ignoring direction.
    pub fn reachable_from(&self, sources: &[usize], deleted: Option<&[bool]>) -> Vec<bool> {
        let adj = self.undirected_adjacency(deleted);
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// A set of edge ids: a candidate set `Q` or a deletion set `P`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet(BTreeSet<EdgeId>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: EdgeId) -> bool {
        self.0.insert(id)
    }

    pub fn remove(&mut self, id: EdgeId) -> bool {
        self.0.remove(&id)
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.0.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Ids in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<EdgeId> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(self.0.union(&other.0).copied().collect())
    }
}

impl FromIterator<EdgeId> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = EdgeId>>(iter: I) -> Self {
        EdgeSet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a EdgeId> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = &'a EdgeId>>(iter: I) -> Self {
        EdgeSet(iter.into_iter().copied().collect())
    }
}

impl From<Vec<EdgeId>> for EdgeSet {
    fn from(v: Vec<EdgeId>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[EdgeId; N]> for EdgeSet {
    fn from(v: [EdgeId; N]) -> Self {
        v.into_iter().collect()
    }
}
