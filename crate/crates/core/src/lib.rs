//! Budgeted edge deletion for epidemic mitigation on contact networks.
//!
//! Three SIR models live here side by side:
//!
//! * [`gsir`]: the Markov-chain model with per-step Bernoulli infection and
//!   recovery indicators, simulated by Monte-Carlo. This is the ground truth
//!   the other two approximate.
//! * [`dsir`]: the deterministic mean-field model. Its infection count is
//!   bounded above by a monotone supermodular surrogate that the greedy
//!   optimizer minimizes with Sherman-Morrison updates.
//! * [`icsir`]: the independent-cascade model, where every infected node
//!   recovers after one step and spreading reduces to reachability in a
//!   sampled contagion network.
//!
//! [`optimize`] holds the model-agnostic greedy, the baselines and the
//! brute-force oracles; [`graph`] holds the graph container, generators and
//! structural analysis shared by everything else.

pub mod dsir;
pub mod graph;
pub mod gsir;
pub mod icsir;
pub mod optimize;
pub mod rng;
pub mod stats;

pub use graph::{ComponentAnalysis, EdgeId, EdgeSet, Graph, GraphError};
pub use optimize::{GreedyTrace, TraceMeta};
pub use stats::Estimate;
