use std::borrow::Cow;

use rand::Rng;

use super::{IcError, IcInstance, MAX_RESAMPLES};
use crate::graph::{analyze_masked, ComponentAnalysis, EdgeId};
use crate::rng;

/// Rejection rule of the conditioned estimator: no component of the
/// contagion network above `l` vertices, no component with two seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleFilter {
    pub l: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Verdict {
    Accept,
    Oversized,
    Collision,
}

/// One contagion network (activated edges of the full contact network) and
/// a uniformly drawn terminal vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ContagionSample {
    /// Indexed by edge id.
    pub activated: Vec<bool>,
    pub terminal: usize,
}

impl ContagionSample {
    /// Activates live edges in id order, then draws the terminal.
    pub fn draw<R: Rng + ?Sized>(inst: &IcInstance, rng: &mut R) -> Self {
        let mut activated = vec![false; inst.graph().id_bound()];
        let terminal = fill(inst, &mut activated, rng);
        ContagionSample { activated, terminal }
    }

    pub fn activated_edges(&self) -> Vec<EdgeId> {
        (0..self.activated.len()).filter(|&id| self.activated[id]).collect()
    }

    /// Components of the contagion network with the edges in `deleted`
    /// also removed.
    pub fn analysis(&self, inst: &IcInstance, deleted: &[bool]) -> ComponentAnalysis {
        let mask: Vec<bool> = (0..self.activated.len())
            .map(|id| !self.activated[id] || deleted.get(id).copied().unwrap_or(false))
            .collect();
        analyze_masked(inst.graph(), &mask)
    }

    pub fn passes(&self, inst: &IcInstance, filter: &SampleFilter) -> bool {
        Scratch::new(inst).verdict(inst, &self.activated, filter) == Verdict::Accept
    }

    /// New infections in this realization after deleting `deleted`.
    pub fn sigma_tilde(&self, inst: &IcInstance, deleted: &[bool]) -> usize {
        let a = self.analysis(inst, deleted);
        (0..inst.n())
            .filter(|&v| !inst.is_seed(v) && seeded(inst, &a, v))
            .count()
    }

    /// New infections that lie in a component which is a tree in the full
    /// contagion network.
    pub fn rho(&self, inst: &IcInstance, deleted: &[bool]) -> usize {
        let full = self.analysis(inst, &[]);
        let a = self.analysis(inst, deleted);
        (0..inst.n())
            .filter(|&v| !inst.is_seed(v) && full.component(v).is_tree && seeded(inst, &a, v))
            .count()
    }

    /// Whether the terminal counts towards `sigma~` after `deleted`.
    pub fn terminal_infected(&self, inst: &IcInstance, deleted: &[bool]) -> bool {
        !inst.is_seed(self.terminal) && seeded(inst, &self.analysis(inst, deleted), self.terminal)
    }
}

fn seeded(inst: &IcInstance, a: &ComponentAnalysis, v: usize) -> bool {
    a.component(v).vertices.iter().any(|&u| inst.is_seed(u))
}

fn fill<R: Rng + ?Sized>(inst: &IcInstance, activated: &mut [bool], rng: &mut R) -> usize {
    let g = inst.graph();
    for id in 0..g.id_bound() {
        activated[id] = g.contains_edge(id) && rng.gen::<f64>() < inst.probability(id);
    }
    rng.gen_range(0..inst.n())
}

/// Outcome of drawing round `round`'s sample.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Draw {
    pub terminal: usize,
    pub resamples: usize,
    /// The terminal's component in the full contagion network is a tree.
    /// Only computed under a filter; `true` otherwise.
    pub tree: bool,
}

/// Reusable buffers for drawing and testing samples.
pub(crate) struct Scratch<'a> {
    pub activated: Vec<bool>,
    adj: Cow<'a, [Vec<(usize, EdgeId)>]>,
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<usize>,
    parent: Vec<usize>,
    size: Vec<usize>,
    seeds: Vec<usize>,
    edges: Vec<usize>,
}

impl<'a> Scratch<'a> {
    pub fn new(inst: &IcInstance) -> Self {
        Self::with_adjacency(inst, Cow::Owned(inst.graph().undirected_adjacency(None)))
    }

    /// Shares an adjacency list built once for all worker threads.
    pub fn with_adjacency(inst: &IcInstance, adj: Cow<'a, [Vec<(usize, EdgeId)>]>) -> Self {
        let n = inst.n();
        Scratch {
            activated: vec![false; inst.graph().id_bound()],
            adj,
            stamp: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
            parent: vec![0; n],
            size: vec![0; n],
            seeds: vec![0; n],
            edges: vec![0; n],
        }
    }

    /// Draws the sample of `round` under `seed`: the first accepted
    /// contagion network of the round's stream.
    pub fn draw(
        &mut self,
        inst: &IcInstance,
        seed: u64,
        round: u64,
        filter: Option<&SampleFilter>,
    ) -> Result<Draw, IcError> {
        let mut rng = rng::stream(seed, round);
        let Some(filter) = filter else {
            let terminal = fill(inst, &mut self.activated, &mut rng);
            return Ok(Draw {
                terminal,
                resamples: 0,
                tree: true,
            });
        };
        let (mut oversized, mut collisions) = (0, 0);
        for attempt in 0..=MAX_RESAMPLES {
            let terminal = fill(inst, &mut self.activated, &mut rng);
            let activated = std::mem::take(&mut self.activated);
            let verdict = self.verdict(inst, &activated, filter);
            self.activated = activated;
            match verdict {
                Verdict::Accept => {
                    let root = self.find(terminal);
                    return Ok(Draw {
                        terminal,
                        resamples: attempt,
                        tree: self.edges[root] + 1 == self.size[root],
                    });
                }
                Verdict::Oversized => oversized += 1,
                Verdict::Collision => collisions += 1,
            }
        }
        Err(IcError::ResampleExhausted {
            round,
            attempts: MAX_RESAMPLES + 1,
            oversized,
            collisions,
            l: filter.l,
        })
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Union-find over the activated edges; leaves per-root size, seed and
    /// edge counts behind for the caller.
    pub(crate) fn verdict(
        &mut self,
        inst: &IcInstance,
        activated: &[bool],
        filter: &SampleFilter,
    ) -> Verdict {
        let n = inst.n();
        for v in 0..n {
            self.parent[v] = v;
            self.size[v] = 1;
            self.seeds[v] = inst.is_seed(v) as usize;
            self.edges[v] = 0;
        }
        for (id, u, v) in inst.graph().edges() {
            if !activated[id] {
                continue;
            }
            let (a, b) = (self.find(u), self.find(v));
            if a == b {
                self.edges[a] += 1;
                continue;
            }
            let (big, small) = if self.size[a] >= self.size[b] { (a, b) } else { (b, a) };
            self.parent[small] = big;
            self.size[big] += self.size[small];
            self.seeds[big] += self.seeds[small];
            self.edges[big] += self.edges[small] + 1;
        }
        let mut verdict = Verdict::Accept;
        for v in 0..n {
            if self.parent[v] != v {
                continue;
            }
            if self.size[v] > filter.l {
                return Verdict::Oversized;
            }
            if self.seeds[v] >= 2 {
                verdict = Verdict::Collision;
            }
        }
        verdict
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// The terminal is a non-seed vertex connected to some seed through
    /// activated edges outside `deleted`.
    pub fn reaches_seed(&mut self, inst: &IcInstance, terminal: usize, deleted: &[bool]) -> bool {
        if inst.is_seed(terminal) {
            return false;
        }
        let epoch = self.next_epoch();
        self.stack.clear();
        self.stack.push(terminal);
        self.stamp[terminal] = epoch;
        while let Some(u) = self.stack.pop() {
            for &(w, id) in &self.adj[u] {
                if !self.activated[id] || deleted[id] || self.stamp[w] == epoch {
                    continue;
                }
                if inst.is_seed(w) {
                    return true;
                }
                self.stamp[w] = epoch;
                self.stack.push(w);
            }
        }
        false
    }

    /// Activated edges of the component containing `v` in the full
    /// contagion network, sorted.
    pub fn component_edges(&mut self, v: usize) -> Vec<EdgeId> {
        let epoch = self.next_epoch();
        let mut out = Vec::new();
        self.stack.clear();
        self.stack.push(v);
        self.stamp[v] = epoch;
        while let Some(u) = self.stack.pop() {
            for &(w, id) in &self.adj[u] {
                if !self.activated[id] {
                    continue;
                }
                // each edge is seen from both ends; keep it once
                if u < w {
                    out.push(id);
                }
                if self.stamp[w] != epoch {
                    self.stamp[w] = epoch;
                    self.stack.push(w);
                }
            }
        }
        out.sort_unstable();
        out
    }
}
