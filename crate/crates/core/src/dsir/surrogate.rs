//! The supermodular upper bound on D-SIR infections and its greedy
//! minimization.
//!
//! With `M_P = I - D + (I - X(0) - R(0)) B_P` (rates of deleted edges set to
//! zero), the infection count satisfies
//!
//! ```text
//! sigma(P) <= sigma_hat(P) = 1' (M_P + D - I) (I - M_P)^-1 x(0)
//! ```
//!
//! whenever the geometric series of `M_P` converges. `I - M_P` is a
//! Z-matrix, so the series converges exactly when `I - M_P` is a nonsingular
//! M-matrix, which holds iff `(I - M_P) y = 1` has a strictly positive
//! solution. That test is what [`sigma_hat`] uses. The row condition of
//! [`check_stability`] is the stronger, certified regime in which the
//! dynamics also contract at rate `1 - eps`.
//!
//! Deleting edge `(j, i)` adds `c e_i e_j'` to `I - M_P`, with
//! `c = (1 - x_i(0) - r_i(0)) B_ij`, so `H = (I - M_P)^-1` follows by
//! Sherman-Morrison and each candidate's gain is O(1) given `H`,
//! `g = H x(0)`, `v' = 1' (I - X(0) - R(0)) B_P` and `w = H' v`.

use nalgebra::{DMatrix, DVector};

use super::{DsirError, DsirSystem};
use crate::graph::{EdgeId, EdgeSet};
use crate::optimize::{GreedyTrace, TraceMeta};

/// `M_P = I - D + (I - X(0) - R(0)) B_P` as a dense matrix.
pub fn transition_matrix(sys: &DsirSystem, p: &EdgeSet) -> Result<DMatrix<f64>, DsirError> {
    let mask = sys.graph().mask(p)?;
    Ok(transition_masked(sys, &mask))
}

fn transition_masked(sys: &DsirSystem, deleted: &[bool]) -> DMatrix<f64> {
    let n = sys.n();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 1.0 - sys.healing()[i];
    }
    for (id, j, i) in sys.active_edges(deleted) {
        m[(i, j)] += sys.susceptible0(i) * sys.rate(id);
    }
    m
}

/// Smallest row slack `D_i - (1 - x_i(0) - r_i(0)) sum_j B_ij` over all
/// nodes, with the node attaining it. Deleting edges only grows the slack,
/// so the value for `P = {}` bounds every deletion set.
pub fn gershgorin_margin(sys: &DsirSystem) -> (f64, usize) {
    let n = sys.n();
    let mut row = vec![0.0; n];
    for (id, _, i) in sys.graph().edges() {
        row[i] += sys.rate(id);
    }
    (0..n)
        .map(|i| (sys.healing()[i] - sys.susceptible0(i) * row[i], i))
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
}

/// The certified-stability margin `eps > 0`, or an error when the row
/// condition cannot be met with any positive margin.
///
/// With `eps > 0`, every `M_P` has row sums at most `1 - eps`, so its
/// spectral radius and infinity norm are at most `1 - eps` and
/// `|x(t+1)|_inf <= (1 - eps) |x(t)|_inf` along trajectories. The spectral
/// norm is not controlled by this condition: column sums can exceed one
/// when a node infects many neighbors.
///
/// An alternative certificate (irreducible `M` with spectral radius below
/// one) is not implemented.
pub fn check_stability(sys: &DsirSystem) -> Result<f64, DsirError> {
    let (margin, node) = gershgorin_margin(sys);
    if sys.n() == 0 {
        return Ok(f64::INFINITY);
    }
    if margin > 0.0 {
        Ok(margin)
    } else {
        Err(DsirError::NotCertified { margin, node })
    }
}

/// `1' (M_P + D - I)(I - M_P)^-1 x(0)` by a dense LU solve.
pub fn sigma_hat(sys: &DsirSystem, p: &EdgeSet) -> Result<f64, DsirError> {
    let mask = sys.graph().mask(p)?;
    let n = sys.n();
    let a = DMatrix::identity(n, n) - transition_masked(sys, &mask);
    let lu = a.lu();
    let ones = DVector::from_element(n, 1.0);
    let probe = lu.solve(&ones).ok_or(DsirError::Unstable)?;
    if probe.iter().any(|&y| !(y > 0.0) || !y.is_finite()) {
        return Err(DsirError::Unstable);
    }
    let y = lu
        .solve(&DVector::from_column_slice(sys.x0()))
        .ok_or(DsirError::Unstable)?;
    Ok(sys
        .active_edges(&mask)
        .map(|(id, j, i)| sys.susceptible0(i) * sys.rate(id) * y[j])
        .sum())
}

/// `H = (I - M_P)^-1` and the vectors needed for O(1) marginal gains,
/// updated in place as edges are deleted.
#[derive(Clone, Debug)]
pub struct SurrogateCache<'a> {
    sys: &'a DsirSystem,
    h: DMatrix<f64>,
    /// `v_j = sum_i (1 - x_i(0) - r_i(0)) B_P,ij`
    v: DVector<f64>,
    /// `g = H x(0)`
    g: DVector<f64>,
    /// `w = H' v`
    w: DVector<f64>,
    /// Out-edges per source vertex.
    out: Vec<Vec<EdgeId>>,
    deleted: Vec<bool>,
    value: f64,
}

impl<'a> SurrogateCache<'a> {
    pub fn new(sys: &'a DsirSystem, p: &EdgeSet) -> Result<Self, DsirError> {
        let deleted = sys.graph().mask(p)?;
        let n = sys.n();
        let a = DMatrix::identity(n, n) - transition_masked(sys, &deleted);
        let h = a.try_inverse().ok_or(DsirError::Unstable)?;
        // inverse-positivity characterizes nonsingular M-matrices
        if h.iter().any(|&x| x < -1e-12 || !x.is_finite()) {
            return Err(DsirError::Unstable);
        }
        let mut v = DVector::zeros(n);
        for (id, j, i) in sys.active_edges(&deleted) {
            v[j] += sys.susceptible0(i) * sys.rate(id);
        }
        let g = &h * DVector::from_column_slice(sys.x0());
        let mut out = vec![Vec::new(); n];
        for (id, j, _) in sys.graph().edges() {
            out[j].push(id);
        }
        let mut cache = SurrogateCache {
            sys,
            h,
            v,
            g,
            w: DVector::zeros(n),
            out,
            deleted,
            value: 0.0,
        };
        cache.refresh();
        Ok(cache)
    }

    fn refresh(&mut self) {
        self.w = self.h.tr_mul(&self.v);
        self.value = self.v.dot(&self.g);
    }

    /// Current `sigma_hat(P)`.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn is_deleted(&self, id: EdgeId) -> bool {
        self.deleted[id]
    }

    /// `(j, i, c)` for the live, not yet deleted edges of `group` with c > 0.
    fn terms(&self, group: &[EdgeId]) -> Vec<(usize, usize, f64)> {
        let mut seen = Vec::new();
        group
            .iter()
            .filter(|&&id| {
                let fresh = !seen.contains(&id);
                seen.push(id);
                fresh && !self.deleted[id]
            })
            .filter_map(|&id| {
                let (j, i) = self.sys.graph().endpoints(id)?;
                let c = self.sys.susceptible0(i) * self.sys.rate(id);
                (c > 0.0).then_some((j, i, c))
            })
            .collect()
    }

    /// `sigma_hat(P) - sigma_hat(P + group)` without modifying the cache.
    ///
    /// Woodbury with `U = [e_i]`, `V = [e_j]`, `C = diag(c)`:
    /// `H' = H - H U (I + C V' H U)^-1 C V' H`, so only the entries
    /// `H_{j_a i_b}`, `g_{j_a}` and `w_{i_b}` are touched.
    pub fn gain(&self, group: &[EdgeId]) -> f64 {
        let terms = self.terms(group);
        match terms.as_slice() {
            [] => 0.0,
            &[(j, i, c)] => {
                let alpha = c * self.g[j] / (1.0 + c * self.h[(j, i)]);
                alpha * self.w[i] + c * self.g[j] - c * alpha * self.h[(j, i)]
            }
            _ => {
                let k = terms.len();
                // row vector v'' H U with v'' = v - sum_a c_a e_{j_a}
                let left = DVector::from_iterator(
                    k,
                    terms.iter().map(|&(_, ib, _)| {
                        self.w[ib]
                            - terms.iter().map(|&(ja, _, ca)| ca * self.h[(ja, ib)]).sum::<f64>()
                    }),
                );
                let right = DVector::from_iterator(k, terms.iter().map(|&(j, _, _)| self.g[j]));
                let mut core = DMatrix::identity(k, k);
                for (a, &(ja, _, ca)) in terms.iter().enumerate() {
                    for (b, &(_, ib, _)) in terms.iter().enumerate() {
                        core[(a, b)] += ca * self.h[(ja, ib)];
                    }
                }
                let c_right =
                    DVector::from_iterator(k, terms.iter().zip(right.iter()).map(|(t, r)| t.2 * r));
                let solved = core
                    .lu()
                    .solve(&c_right)
                    .expect("I + C V'HU is nonsingular while I - M stays an M-matrix");
                let shift: f64 = terms.iter().map(|&(j, _, c)| c * self.g[j]).sum();
                shift + left.dot(&solved)
            }
        }
    }

    /// Deletes the edges of `group` by successive rank-one updates.
    pub fn delete(&mut self, group: &[EdgeId]) {
        let terms = self.terms(group);
        for &(j, i, c) in &terms {
            let col = self.h.column(i).clone_owned();
            let row = self.h.row(j).clone_owned();
            let denom = 1.0 + c * self.h[(j, i)];
            let gj = self.g[j];
            self.h.ger(-c / denom, &col, &row.transpose(), 1.0);
            self.g.axpy(-c * gj / denom, &col, 1.0);
        }
        for &id in group {
            self.deleted[id] = true;
        }
        // re-summed rather than decremented, so a source whose out-edges are
        // all gone contributes exactly zero
        for &(j, _, _) in &terms {
            self.v[j] = self.out[j]
                .iter()
                .filter(|&&id| !self.deleted[id])
                .map(|&id| {
                    let (_, i) = self.sys.graph().endpoints(id).unwrap();
                    self.sys.susceptible0(i) * self.sys.rate(id)
                })
                .sum();
        }
        self.refresh();
    }
}

/// Greedy over singleton candidates; the trace lists edge ids.
pub fn greedy_dsir(sys: &DsirSystem, q: &EdgeSet, k: usize) -> Result<GreedyTrace, DsirError> {
    let ids = q.to_vec();
    let groups: Vec<Vec<EdgeId>> = ids.iter().map(|&id| vec![id]).collect();
    let mut trace = greedy_dsir_grouped(sys, &groups, k)?;
    trace.chosen = trace.chosen.iter().map(|&g| ids[g]).collect();
    Ok(trace)
}

/// Greedy over candidate groups deleted as a unit (e.g. both directions of
/// a physical contact). The trace's `chosen` lists group indices; ties go to
/// the lowest index.
///
/// Runs even when the row condition fails, as long as the surrogate is
/// finite; `meta.guarantee` records whether the certified regime holds.
pub fn greedy_dsir_grouped(
    sys: &DsirSystem,
    groups: &[Vec<EdgeId>],
    k: usize,
) -> Result<GreedyTrace, DsirError> {
    if k > groups.len() {
        return Err(DsirError::Budget { k, q: groups.len() });
    }
    for &id in groups.iter().flatten() {
        if !sys.graph().contains_edge(id) {
            return Err(crate::graph::GraphError::UnknownEdge(id).into());
        }
    }
    let mut cache = SurrogateCache::new(sys, &EdgeSet::new())?;
    let mut trace = GreedyTrace::start(
        cache.value(),
        TraceMeta {
            objective: "sigma-hat".into(),
            guarantee: check_stability(sys).is_ok(),
            ..TraceMeta::default()
        },
    );
    let mut taken = vec![false; groups.len()];
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (idx, group) in groups.iter().enumerate() {
            if taken[idx] {
                continue;
            }
            let gain = cache.gain(group);
            if best.map_or(true, |(_, b)| gain > b) {
                best = Some((idx, gain));
            }
        }
        let (idx, _) = best.expect("k <= |Q| leaves a candidate");
        taken[idx] = true;
        let before = cache.value();
        cache.delete(&groups[idx]);
        trace.push(idx, before - cache.value(), cache.value());
    }
    Ok(trace)
}
