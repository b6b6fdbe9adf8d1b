//! Deterministic mean-field SIR dynamics.
//!
//! Node `i` carries an infection probability `x_i` and a removal
//! probability `r_i`. A directed edge `(j, i)` with rate `B_ij` lets `j`
//! infect `i`; node `i` heals at rate `D_i`:
//!
//! ```text
//! x(t+1) = x(t) + (I - X(t) - R(t)) B x(t) - D x(t)
//! r(t+1) = r(t) + D x(t)
//! ```
//!
//! The number of new infections `sigma(P) = |m* - m(0)|_1`, with
//! `m = x + r`, is what edge deletion tries to reduce. It is bounded by the
//! surrogate in [`surrogate`], which is what the greedy optimizer works on.

mod surrogate;

use rand::Rng;
use thiserror::Error;

use crate::graph::{EdgeId, EdgeSet, Graph, GraphError};

pub use surrogate::{
    check_stability, gershgorin_margin, greedy_dsir, greedy_dsir_grouped, sigma_hat,
    transition_matrix, SurrogateCache,
};

/// Probabilities may leave `[0, 1]` by this much before it counts as an error.
pub const STATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DsirError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("D-SIR systems are defined on directed graphs")]
    Undirected,
    #[error("{what} has length {got}, expected {expected}")]
    Length {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("invalid parameter at index {index}: {message}")]
    Parameter { index: usize, message: String },
    #[error("state left [0, 1] at node {node} (value {value}); parameters violate the model's assumptions")]
    StateOutOfRange { node: usize, value: f64 },
    #[error("no convergence after {steps} steps (max infection {residual:e}, sigma so far {sigma})")]
    NotConverged {
        steps: usize,
        residual: f64,
        sigma: f64,
    },
    #[error("stability condition fails: margin {margin} is not positive (node {node})")]
    NotCertified { margin: f64, node: usize },
    #[error("I - M is not a nonsingular M-matrix; the surrogate diverges")]
    Unstable,
    #[error("budget {k} exceeds the {q} candidates")]
    Budget { k: usize, q: usize },
}

/// Rates and initial probabilities of a D-SIR instance.
#[derive(Clone, Debug)]
pub struct DsirSystem {
    graph: Graph,
    /// Infection rate per edge id; edge `(j, i)` carries `B_ij`.
    rates: Vec<f64>,
    healing: Vec<f64>,
    x0: Vec<f64>,
    r0: Vec<f64>,
}

impl DsirSystem {
    pub fn new(
        graph: Graph,
        rates: Vec<f64>,
        healing: Vec<f64>,
        x0: Vec<f64>,
        r0: Vec<f64>,
    ) -> Result<Self, DsirError> {
        if !graph.is_directed() {
            return Err(DsirError::Undirected);
        }
        let n = graph.n();
        let check_len = |what, got: usize, expected| {
            if got == expected {
                Ok(())
            } else {
                Err(DsirError::Length { what, got, expected })
            }
        };
        check_len("rates", rates.len(), graph.id_bound())?;
        check_len("healing", healing.len(), n)?;
        check_len("x0", x0.len(), n)?;
        check_len("r0", r0.len(), n)?;

        let bad = |index, message: String| Err(DsirError::Parameter { index, message });
        for i in 0..n {
            if !(0.0..1.0).contains(&healing[i]) {
                return bad(i, format!("healing rate {} outside [0, 1)", healing[i]));
            }
            if x0[i] < 0.0 || r0[i] < 0.0 || x0[i] + r0[i] > 1.0 {
                return bad(i, format!("initial state x={} r={} invalid", x0[i], r0[i]));
            }
        }
        let mut row_sum = vec![0.0; n];
        for (id, _, i) in graph.edges() {
            if !(rates[id] >= 0.0) {
                return bad(id, format!("infection rate {} is negative", rates[id]));
            }
            row_sum[i] += rates[id];
        }
        for (i, &s) in row_sum.iter().enumerate() {
            if s >= 1.0 {
                return bad(i, format!("incoming infection rates sum to {s} >= 1"));
            }
        }
        Ok(DsirSystem {
            graph,
            rates,
            healing,
            x0,
            r0,
        })
    }

    /// Builds the graph from a dense rate matrix: `b[i][j] > 0` creates the
    /// edge `(j, i)`. Edges are numbered row by row.
    pub fn from_dense(
        b: &[Vec<f64>],
        healing: Vec<f64>,
        x0: Vec<f64>,
        r0: Vec<f64>,
    ) -> Result<Self, DsirError> {
        let n = b.len();
        let mut graph = Graph::directed(n);
        let mut rates = Vec::new();
        for (i, row) in b.iter().enumerate() {
            if row.len() != n {
                return Err(DsirError::Length {
                    what: "rate matrix row",
                    got: row.len(),
                    expected: n,
                });
            }
            for (j, &bij) in row.iter().enumerate() {
                if bij > 0.0 {
                    graph.add_edge(j, i)?;
                    rates.push(bij);
                }
            }
        }
        Self::new(graph, rates, healing, x0, r0)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn rate(&self, id: EdgeId) -> f64 {
        self.rates[id]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn healing(&self) -> &[f64] {
        &self.healing
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn r0(&self) -> &[f64] {
        &self.r0
    }

    /// `1 - x_i(0) - r_i(0)`, the susceptible mass at time zero.
    pub(crate) fn susceptible0(&self, i: usize) -> f64 {
        1.0 - self.x0[i] - self.r0[i]
    }

    pub fn initial_state(&self) -> DsirState {
        DsirState {
            x: self.x0.clone(),
            r: self.r0.clone(),
            t: 0,
        }
    }

    /// Live edges not in the deletion mask, as `(id, source j, target i)`.
    pub(crate) fn active_edges<'a>(
        &'a self,
        deleted: &'a [bool],
    ) -> impl Iterator<Item = (EdgeId, usize, usize)> + 'a {
        self.graph.edges().filter(move |&(id, _, _)| !deleted[id])
    }

    /// One synchronous step of the dynamics with the edges in `p` removed.
    pub fn step(&self, p: &EdgeSet, state: &DsirState) -> Result<DsirState, DsirError> {
        let mask = self.graph.mask(p)?;
        self.step_masked(&mask, state)
    }

    fn step_masked(&self, deleted: &[bool], s: &DsirState) -> Result<DsirState, DsirError> {
        let n = self.n();
        let mut inflow = vec![0.0; n];
        for (id, j, i) in self.active_edges(deleted) {
            inflow[i] += self.rates[id] * s.x[j];
        }
        let mut x = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 0..n {
            x[i] = s.x[i] + (1.0 - s.x[i] - s.r[i]) * inflow[i] - self.healing[i] * s.x[i];
            r[i] = s.r[i] + self.healing[i] * s.x[i];
            for v in [&mut x[i], &mut r[i]] {
                if *v < -STATE_TOLERANCE || *v > 1.0 + STATE_TOLERANCE {
                    return Err(DsirError::StateOutOfRange { node: i, value: *v });
                }
                *v = v.clamp(0.0, 1.0);
            }
        }
        Ok(DsirState { x, r, t: s.t + 1 })
    }

    /// Iterates until `max_i x_i < tol` and returns `|m(t) - m(0)|_1`.
    /// Hitting `t_max` first is an error carrying the partial value.
    pub fn simulate_sigma(&self, p: &EdgeSet, tol: f64, t_max: usize) -> Result<f64, DsirError> {
        let mask = self.graph.mask(p)?;
        let mut state = self.initial_state();
        let m0: Vec<f64> = (0..self.n()).map(|i| self.x0[i] + self.r0[i]).collect();
        let sigma = |s: &DsirState| -> f64 {
            (0..self.n()).map(|i| (s.x[i] + s.r[i] - m0[i]).abs()).sum()
        };
        loop {
            let residual = state.x.iter().copied().fold(0.0, f64::max);
            if residual < tol {
                return Ok(sigma(&state));
            }
            if state.t >= t_max {
                return Err(DsirError::NotConverged {
                    steps: state.t,
                    residual,
                    sigma: sigma(&state),
                });
            }
            state = self.step_masked(&mask, &state)?;
        }
    }
}

/// Default convergence threshold for [`DsirSystem::simulate_sigma`].
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default step cap for [`DsirSystem::simulate_sigma`].
pub const DEFAULT_T_MAX: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DsirState {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub t: usize,
}

/// Random instance for tests and benchmarks: each directed pair is an edge
/// with probability `p_edge`, and rates are drawn so that the row condition
/// holds with margin at least 0.02.
pub fn random_stable<R: Rng + ?Sized>(rng: &mut R, n: usize, p_edge: f64) -> DsirSystem {
    let mut g = Graph::directed(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen::<f64>() < p_edge {
                g.add_edge(j, i).unwrap();
            }
        }
    }
    let healing: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.6)).collect();
    let x0: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.4) { rng.gen_range(0.0..0.9) } else { 0.0 })
        .collect();
    let r0: Vec<f64> = (0..n).map(|i| rng.gen_range(0.0..0.1f64).min(1.0 - x0[i])).collect();
    let mut in_deg = vec![0usize; n];
    for (_, _, i) in g.edges() {
        in_deg[i] += 1;
    }
    let rates: Vec<f64> = g
        .edges()
        .map(|(_, _, i)| {
            let budget = (healing[i] - 0.02).max(0.0) / in_deg[i] as f64;
            rng.gen_range(0.0..budget)
        })
        .collect();
    DsirSystem::new(g, rates, healing, x0, r0).expect("drawn parameters satisfy the model constraints")
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn rejects_invalid_parameters() {
        let g = Graph::from_edges(2, true, [(0, 1)]).unwrap();
        let ok = |rates: Vec<f64>, d: Vec<f64>, x: Vec<f64>, r: Vec<f64>| {
            DsirSystem::new(g.clone(), rates, d, x, r)
        };
        assert!(ok(vec![0.1], vec![0.5, 0.5], vec![0.5, 0.0], vec![0.0, 0.0]).is_ok());
        assert!(ok(vec![0.1], vec![1.0, 0.5], vec![0.5, 0.0], vec![0.0, 0.0]).is_err());
        assert!(ok(vec![1.0], vec![0.5, 0.5], vec![0.5, 0.0], vec![0.0, 0.0]).is_err());
        assert!(ok(vec![-0.1], vec![0.5, 0.5], vec![0.5, 0.0], vec![0.0, 0.0]).is_err());
        assert!(ok(vec![0.1], vec![0.5, 0.5], vec![0.7, 0.0], vec![0.4, 0.0]).is_err());
        assert!(ok(vec![0.1], vec![0.5], vec![0.5, 0.0], vec![0.0, 0.0]).is_err());
        let u = Graph::from_edges(2, false, [(0, 1)]).unwrap();
        assert_eq!(
            DsirSystem::new(u, vec![0.1], vec![0.5; 2], vec![0.0; 2], vec![0.0; 2]).unwrap_err(),
            DsirError::Undirected
        );
    }

    #[test]
    fn single_node_heals() {
        let sys = DsirSystem::new(Graph::directed(1), vec![], vec![0.2], vec![0.5], vec![0.0])
            .unwrap();
        let s = sys.step(&EdgeSet::new(), &sys.initial_state()).unwrap();
        assert!((s.x[0] - 0.4).abs() < 1e-15);
        assert!((s.r[0] - 0.1).abs() < 1e-15);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn healthy_state_is_fixed() {
        let sys = two_node();
        let s = DsirState {
            x: vec![0.0, 0.0],
            r: vec![0.3, 0.1],
            t: 4,
        };
        let next = sys.step(&EdgeSet::new(), &s).unwrap();
        assert_eq!(next.x, s.x);
        assert_eq!(next.r, s.r);
    }

    #[test]
    fn two_node_step_by_hand() {
        let sys = two_node();
        let s = sys.step(&EdgeSet::new(), &sys.initial_state()).unwrap();
        assert!((s.x[0] - 0.4).abs() < 1e-15);
        assert!((s.x[1] - 0.08).abs() < 1e-15);
        assert!((s.r[0] - 0.4).abs() < 1e-15);
        assert_eq!(s.r[1], 0.0);

        let cut = sys.step(&EdgeSet::from([0]), &sys.initial_state()).unwrap();
        assert_eq!(cut.x[1], 0.0);
    }

    #[test]
    fn sigma_without_transmission_is_zero() {
        let sys = DsirSystem::new(
            Graph::directed(3),
            vec![],
            vec![0.3; 3],
            vec![0.5, 0.2, 0.0],
            vec![0.1, 0.0, 0.0],
        )
        .unwrap();
        assert!(sys.simulate_sigma(&EdgeSet::new(), 1e-10, 100_000).unwrap().abs() < 1e-15);

        let mut quiet = two_node();
        quiet.x0 = vec![0.0, 0.0];
        assert_eq!(quiet.simulate_sigma(&EdgeSet::new(), 1e-10, 10).unwrap(), 0.0);
    }

    #[test]
    fn two_node_sigma_matches_product_formula() {
        // m_1 stays constant; node 1 escapes with prob prod_t (1 - 0.1 * 0.8 * 0.5^t).
        let escape: f64 = (0..200).map(|t| 1.0 - 0.08 * 0.5f64.powi(t)).product();
        let exact = 1.0 - escape;
        let sigma = two_node().simulate_sigma(&EdgeSet::new(), 1e-12, 100_000).unwrap();
        assert!((sigma - exact).abs() < 1e-12, "{sigma} vs {exact}");
        assert!(sigma < 0.16);
    }

    #[test]
    fn non_convergence_is_reported() {
        let err = two_node().simulate_sigma(&EdgeSet::new(), 1e-12, 5).unwrap_err();
        assert!(matches!(err, DsirError::NotConverged { steps: 5, .. }), "{err:?}");
    }

    #[test]
    fn trajectories_stay_monotone_and_contract() {
        let mut rng = crate::rng::seeded(3);
        for _ in 0..20 {
            let sys = random_stable(&mut rng, 12, 0.3);
            let eps = gershgorin_margin(&sys).0;
            assert!(eps > 0.0);
            let mut s = sys.initial_state();
            for _ in 0..60 {
                let next = sys.step(&EdgeSet::new(), &s).unwrap();
                for i in 0..sys.n() {
                    assert!(next.x[i] >= 0.0);
                    assert!(next.x[i] + next.r[i] >= s.x[i] + s.r[i] - 1e-15);
                }
                let norm = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
                assert!(norm(&next.x) <= (1.0 - eps) * norm(&s.x) + 1e-15);
                s = next;
            }
        }
    }
}
