//! Markov-chain SIR with Bernoulli infection and recovery indicators.
//!
//! At each step every susceptible node `i` is infected through each edge
//! `(j, i)` with an infected `j` independently with probability `B_ij`, and
//! every infected node recovers with probability `D_i`. All indicators are
//! drawn fresh each step and the update is synchronous.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dsir::DsirSystem;
use crate::graph::{EdgeId, EdgeSet, Graph, GraphError};
use crate::rng;
use crate::stats::Estimate;

/// Steps after which a run is abandoned (only reachable with `D_i = 0`).
pub const STEP_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GsirError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("G-SIR systems are defined on directed graphs")]
    Undirected,
    #[error("{what} has length {got}, expected {expected}")]
    Length {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{what} {value} at index {index} is not a probability")]
    Probability {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("vertex {0} is out of range or listed twice in the initial sets")]
    InitialSets(usize),
    #[error("x0 + r0 exceeds 1 at vertex {0}")]
    InitialMass(usize),
    #[error("infection still alive after {0} steps")]
    StepCap(usize),
    #[error("at least one replicate is required")]
    NoReplicates,
}

/// How each replicate starts.
#[derive(Clone, Debug, PartialEq)]
pub enum Initial {
    /// The same infected and removed sets every time.
    Fixed {
        infected: Vec<usize>,
        removed: Vec<usize>,
    },
    /// Vertex `v` starts infected with probability `x0[v]` and removed with
    /// probability `r0[v]`, independently per replicate.
    Bernoulli { x0: Vec<f64>, r0: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct GsirParams {
    graph: Graph,
    /// Per edge id; edge `(j, i)` carries the mean of `beta_ij`.
    rates: Vec<f64>,
    healing: Vec<f64>,
    initial: Initial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    S,
    I,
    R,
}

fn probability(what: &'static str, index: usize, value: f64) -> Result<(), GsirError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(GsirError::Probability { what, index, value })
    }
}

impl GsirParams {
    pub fn new(graph: Graph, rates: Vec<f64>, healing: Vec<f64>, initial: Initial) -> Result<Self, GsirError> {
        if !graph.is_directed() {
            return Err(GsirError::Undirected);
        }
        let n = graph.n();
        let length = |what, got: usize, expected| {
            if got == expected {
                Ok(())
            } else {
                Err(GsirError::Length { what, got, expected })
            }
        };
        length("rates", rates.len(), graph.id_bound())?;
        length("healing", healing.len(), n)?;
        for (id, _, _) in graph.edges() {
            probability("infection rate", id, rates[id])?;
        }
        for (i, &d) in healing.iter().enumerate() {
            probability("healing rate", i, d)?;
        }
        match &initial {
            Initial::Fixed { infected, removed } => {
                let mut seen = vec![false; n];
                for &v in infected.iter().chain(removed) {
                    if v >= n || seen[v] {
                        return Err(GsirError::InitialSets(v));
                    }
                    seen[v] = true;
                }
            }
            Initial::Bernoulli { x0, r0 } => {
                length("x0", x0.len(), n)?;
                length("r0", r0.len(), n)?;
                for v in 0..n {
                    probability("x0", v, x0[v])?;
                    probability("r0", v, r0[v])?;
                    if x0[v] + r0[v] > 1.0 + 1e-12 {
                        return Err(GsirError::InitialMass(v));
                    }
                }
            }
        }
        Ok(GsirParams {
            graph,
            rates,
            healing,
            initial,
        })
    }

    /// Same rates as `sys`, initial states drawn from its `x0`, `r0`.
    pub fn from_dsir(sys: &DsirSystem) -> Self {
        GsirParams {
            graph: sys.graph().clone(),
            rates: (0..sys.graph().id_bound()).map(|id| sys.rate(id)).collect(),
            healing: sys.healing().to_vec(),
            initial: Initial::Bernoulli {
                x0: sys.x0().to_vec(),
                r0: sys.r0().to_vec(),
            },
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn initial(&self) -> &Initial {
        &self.initial
    }

    fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<State> {
        let n = self.n();
        match &self.initial {
            Initial::Fixed { infected, removed } => {
                let mut s = vec![State::S; n];
                infected.iter().for_each(|&v| s[v] = State::I);
                removed.iter().for_each(|&v| s[v] = State::R);
                s
            }
            Initial::Bernoulli { x0, r0 } => (0..n)
                .map(|v| {
                    let u: f64 = rng.gen();
                    if u < x0[v] {
                        State::I
                    } else if u < x0[v] + r0[v] {
                        State::R
                    } else {
                        State::S
                    }
                })
                .collect(),
        }
    }
}

/// One run after deleting `p`: nodes ever infected or removed at the end,
/// minus those at the start.
pub fn simulate_once<R: Rng + ?Sized>(params: &GsirParams, p: &EdgeSet, rng: &mut R) -> Result<usize, GsirError> {
    let deleted = params.graph.mask(p)?;
    let out = out_edges(params, &deleted);
    run(params, &out, rng)
}

fn out_edges(params: &GsirParams, deleted: &[bool]) -> Vec<Vec<(usize, EdgeId)>> {
    let mut out = vec![Vec::new(); params.n()];
    for (id, j, i) in params.graph.edges() {
        if !deleted[id] && params.rates[id] > 0.0 {
            out[j].push((i, id));
        }
    }
    out
}

fn run<R: Rng + ?Sized>(
    params: &GsirParams,
    out: &[Vec<(usize, EdgeId)>],
    rng: &mut R,
) -> Result<usize, GsirError> {
    let mut state = params.start(rng);
    let touched = |s: &[State]| s.iter().filter(|&&x| x != State::S).count();
    let initial = touched(&state);
    let mut infected: Vec<usize> = (0..state.len()).filter(|&v| state[v] == State::I).collect();
    let mut next = Vec::new();
    let mut steps = 0;
    while !infected.is_empty() {
        if steps == STEP_CAP {
            return Err(GsirError::StepCap(STEP_CAP));
        }
        steps += 1;
        next.clear();
        // infections use the states at time t; new cases become I only
        // after every attempt of this step has been drawn
        let mut fresh = Vec::new();
        for &j in &infected {
            for &(i, id) in &out[j] {
                if state[i] == State::S && rng.gen::<f64>() < params.rates[id] {
                    fresh.push(i);
                }
            }
        }
        for &j in &infected {
            if rng.gen::<f64>() < params.healing[j] {
                state[j] = State::R;
            } else {
                next.push(j);
            }
        }
        for i in fresh {
            if state[i] == State::S {
                state[i] = State::I;
                next.push(i);
            }
        }
        next.sort_unstable();
        std::mem::swap(&mut infected, &mut next);
    }
    Ok(touched(&state) - initial)
}

/// Mean new infections over `reps` independent runs, replicate `r` drawing
/// from stream `r` of `seed`. The half-width is Hoeffding's with range `n`.
pub fn estimate_infections(params: &GsirParams, p: &EdgeSet, reps: usize, seed: u64) -> Result<Estimate, GsirError> {
    if reps == 0 {
        return Err(GsirError::NoReplicates);
    }
    let deleted = params.graph.mask(p)?;
    let out = out_edges(params, &deleted);
    let total = (0..reps as u64)
        .into_par_iter()
        .map(|r| run(params, &out, &mut rng::stream(seed, r)).map(|c| c as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate::from_total(total, reps, params.n()))
}
