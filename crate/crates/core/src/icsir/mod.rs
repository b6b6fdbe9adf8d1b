//! Independent-cascade SIR.
//!
//! Every infected node tries once to infect each neighbor and then
//! recovers, so one run of the epidemic is reachability from the seeds in a
//! contagion network that keeps each edge independently with its activation
//! probability. Expected infection counts are estimated by sampling a
//! contagion network together with a uniform terminal vertex and counting
//! how often the terminal is newly infected.
//!
//! The conditioned objective `sigma'` only credits terminals whose
//! component in the contagion network is a tree, and discards samples with
//! a component larger than `L` or with two seeds in one component. Both the
//! filter and the tree test look at the full contagion network, before any
//! deletion, so the conditioning does not depend on the deletion set and the
//! per-sample count is monotone supermodular in it.

mod estimate;
mod exact;
mod greedy;
mod sample;

use thiserror::Error;

use crate::graph::{EdgeSet, Graph, GraphError};

pub use estimate::{cascade, estimate_sigma, estimate_sigma_prime};
pub use exact::{brute_force_expected_sigma, brute_force_expected_sigma_prime, EXACT_EDGE_LIMIT};
pub use greedy::greedy_icsir;
pub use sample::{ContagionSample, SampleFilter};

/// Resampling attempts per round for the conditioned estimator.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IcError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("IC-SIR instances are defined on undirected graphs")]
    Directed,
    #[error("{got} activation probabilities for {expected} edge ids")]
    Length { got: usize, expected: usize },
    #[error("activation probability {value} of edge {edge} is outside [0, 1]")]
    Probability { edge: usize, value: f64 },
    #[error("the seed set is empty")]
    NoSeeds,
    #[error("seed {0} is out of range or repeated")]
    BadSeed(usize),
    #[error("expected degree bound d_end = {0} is not below 1; use estimate_sigma instead")]
    DegreeTooLarge(f64),
    #[error(
        "round {round}: {attempts} contagion networks rejected \
         ({oversized} with a component above L = {l}, {collisions} with two seeds in a component)"
    )]
    ResampleExhausted {
        round: u64,
        attempts: usize,
        oversized: usize,
        collisions: usize,
        l: usize,
    },
    #[error("{edges} free edges exceed the enumeration limit of {limit}")]
    TooLarge { edges: usize, limit: usize },
    #[error("budget {k} exceeds the {q} candidates")]
    Budget { k: usize, q: usize },
    #[error("infection and healing rates {b}, {d} give no activation probability")]
    Rates { b: f64, d: f64 },
    #[error("the conditioning event has probability zero")]
    ImpossibleCondition,
    #[error("estimator needs epsilon > 0 or an explicit round count")]
    Rounds,
}

/// Contact network, activation probabilities, seeds and candidate edges.
#[derive(Clone, Debug)]
pub struct IcInstance {
    graph: Graph,
    p: Vec<f64>,
    seeds: Vec<usize>,
    is_seed: Vec<bool>,
    candidates: EdgeSet,
}

impl IcInstance {
    /// `p` is indexed by edge id; `seeds` may be in any order.
    pub fn new(
        graph: Graph,
        p: Vec<f64>,
        seeds: Vec<usize>,
        candidates: EdgeSet,
    ) -> Result<Self, IcError> {
        if graph.is_directed() {
            return Err(IcError::Directed);
        }
        if p.len() != graph.id_bound() {
            return Err(IcError::Length {
                got: p.len(),
                expected: graph.id_bound(),
            });
        }
        for (edge, _, _) in graph.edges() {
            if !(0.0..=1.0).contains(&p[edge]) {
                return Err(IcError::Probability { edge, value: p[edge] });
            }
        }
        if seeds.is_empty() {
            return Err(IcError::NoSeeds);
        }
        let mut is_seed = vec![false; graph.n()];
        for &s in &seeds {
            if s >= graph.n() || is_seed[s] {
                return Err(IcError::BadSeed(s));
            }
            is_seed[s] = true;
        }
        graph.mask(&candidates)?;
        let mut seeds = seeds;
        seeds.sort_unstable();
        Ok(IcInstance {
            graph,
            p,
            seeds,
            is_seed,
            candidates,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn probability(&self, id: usize) -> f64 {
        self.p[id]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Sorted seed vertices.
    pub fn seeds(&self) -> &[usize] {
        &self.seeds
    }

    pub fn is_seed(&self, v: usize) -> bool {
        self.is_seed[v]
    }

    pub fn candidates(&self) -> &EdgeSet {
        &self.candidates
    }

    /// `max_i sum_{j in N(i)} p_ij`: the largest expected degree in the
    /// contagion network.
    pub fn expected_degree_bound(&self) -> f64 {
        let mut sum = vec![0.0; self.n()];
        for (id, u, v) in self.graph.edges() {
            sum[u] += self.p[id];
            sum[v] += self.p[id];
        }
        sum.into_iter().fold(0.0, f64::max)
    }
}

/// Which expectation an estimator or the greedy optimizer targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `E[sigma~(P)]`, all new infections.
    Sigma,
    /// `E[rho(P) | no oversized component, no seed collision]`.
    SigmaPrime,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Sigma => "ic-sigma",
            Objective::SigmaPrime => "ic-sigma-prime",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// Target relative error, used for the default round count.
    pub epsilon: f64,
    /// Overrides `ceil(3 n ln n / epsilon^2)`.
    pub rounds: Option<usize>,
    pub seed: u64,
    /// Overrides [`IcInstance::expected_degree_bound`] when computing `L`.
    pub d_end: Option<f64>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            epsilon: 0.1,
            rounds: None,
            seed: 0,
            d_end: None,
        }
    }
}

impl EstimatorConfig {
    pub fn with_rounds(rounds: usize, seed: u64) -> Self {
        EstimatorConfig {
            rounds: Some(rounds),
            seed,
            ..Self::default()
        }
    }

    pub fn rounds_for(&self, n: usize) -> Result<usize, IcError> {
        match self.rounds {
            Some(0) => Err(IcError::Rounds),
            Some(r) => Ok(r),
            None if self.epsilon > 0.0 => {
                let n = n as f64;
                Ok(((3.0 * n * n.ln().max(0.0)) / (self.epsilon * self.epsilon)).ceil().max(1.0) as usize)
            }
            None => Err(IcError::Rounds),
        }
    }

    pub fn d_end_for(&self, inst: &IcInstance) -> f64 {
        self.d_end.unwrap_or_else(|| inst.expected_degree_bound())
    }
}

/// Per-contact activation probability of an SIR process with infection rate
/// `b` and healing rate `d`: the chance that `j` infects `i` at some step
/// before `j` heals, `b / (1 - (1 - d)(1 - b))`.
pub fn rates_to_activation(b: f64, d: f64) -> Result<f64, IcError> {
    let denom = 1.0 - (1.0 - d) * (1.0 - b);
    if !(denom > 0.0) || !(0.0..=1.0).contains(&b) || !(0.0..=1.0).contains(&d) {
        return Err(IcError::Rates { b, d });
    }
    Ok(b / denom)
}

/// Component-size cutoff `ceil(9 ln n / (1 - d)^2)`, at least 1.
pub fn compute_l(d_end: f64, n: usize) -> Result<usize, IcError> {
    cutoff(d_end, (n as f64).ln())
}

/// The block-model cutoff with `ln(n kappa)` in place of `ln n`.
///
/// Uses the inverse square `(1 - d_end)^-2`, so it agrees with
/// [`compute_l`] when `kappa = 1`. Diagnostic only.
pub fn compute_l_star(d_end: f64, n: usize, kappa: usize) -> Result<usize, IcError> {
    cutoff(d_end, (n as f64 * kappa as f64).ln())
}

fn cutoff(d_end: f64, log: f64) -> Result<usize, IcError> {
    if !(d_end < 1.0) || d_end < 0.0 {
        return Err(IcError::DegreeTooLarge(d_end));
    }
    Ok(((9.0 * log.max(0.0) / (1.0 - d_end).powi(2)).ceil() as usize).max(1))
}

/// Number of degree bins `4 ceil((1 - d_init)^2 / (1 - d_end)^2)` for the
/// block-model analysis. Diagnostic only.
pub fn m_bin(d_init: f64, d_end: f64) -> Result<usize, IcError> {
    if !(d_end < 1.0) {
        return Err(IcError::DegreeTooLarge(d_end));
    }
    Ok(4 * ((1.0 - d_init).powi(2) / (1.0 - d_end).powi(2)).ceil() as usize)
}
