use rand::Rng;

use super::{Graph, GraphError};
use crate::rng;

fn check_probability(p: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::InvalidProbability(p))
    }
}

/// Visits each index in `0..total` independently with probability `p`, in
/// increasing order, by jumping over geometric gaps.
fn bernoulli_indices<R: Rng>(total: u64, p: f64, rng: &mut R, mut visit: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(visit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut next: u64 = 0;
    loop {
        let u: f64 = rng.gen();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if !skip.is_finite() || skip >= (total - next) as f64 {
            return;
        }
        next += skip as u64;
        visit(next);
        next += 1;
        if next >= total {
            return;
        }
    }
}

/// Pair `(u, v)` with `u < v` at position `k` of the order
/// (0,1), (0,2), (1,2), (0,3), ...
fn triangular_pair(k: u64) -> (usize, usize) {
    let mut v = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0) as u64;
    while v * (v - 1) / 2 > k {
        v -= 1;
    }
    while (v + 1) * v / 2 <= k {
        v += 1;
    }
    let u = k - v * (v - 1) / 2;
    (u as usize, v as usize)
}

/// Erdős–Rényi `G(n, p)`: every unordered pair is an edge independently with
/// probability `p`. Deterministic given `seed`.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    check_probability(p)?;
    let mut g = Graph::undirected(n);
    let mut rng = rng::seeded(seed);
    let pairs = (n as u64) * (n as u64).saturating_sub(1) / 2;
    bernoulli_indices(pairs, p, &mut rng, |k| {
        let (u, v) = triangular_pair(k);
        g.add_edge(u, v).expect("generated pairs are distinct");
    });
    Ok(g)
}

/// Stochastic block model with `kappa` blocks of `block_size` vertices each.
/// Vertex `v` belongs to block `v / block_size`; a pair in blocks `(a, b)` is
/// an edge with probability `q[a][b]`, sampled once per pair.
pub fn gen_sbm(
    block_size: usize,
    kappa: usize,
    q: &[Vec<f64>],
    seed: u64,
) -> Result<Graph, GraphError> {
    let bad = || GraphError::InvalidBlockMatrix { kappa };
    if q.len() != kappa || q.iter().any(|row| row.len() != kappa) {
        return Err(bad());
    }
    for a in 0..kappa {
        for b in 0..kappa {
            check_probability(q[a][b])?;
            if q[a][b] != q[b][a] {
                return Err(bad());
            }
        }
    }

    let mut g = Graph::undirected(block_size * kappa);
    let mut rng = rng::seeded(seed);
    let bs = block_size as u64;
    for b in 0..kappa {
        for a in 0..=b {
            let (off_a, off_b) = (a * block_size, b * block_size);
            if a == b {
                bernoulli_indices(bs * bs.saturating_sub(1) / 2, q[a][a], &mut rng, |k| {
                    let (u, v) = triangular_pair(k);
                    g.add_edge(off_a + u, off_a + v).expect("distinct pairs");
                });
            } else {
                bernoulli_indices(bs * bs, q[a][b], &mut rng, |k| {
                    let (u, v) = ((k / bs) as usize, (k % bs) as usize);
                    g.add_edge(off_a + u, off_b + v).expect("distinct pairs");
                });
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn triangular_order() {
        let got: Vec<_> = (0..6).map(triangular_pair).collect();
        assert_eq!(got, vec![(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]);
        for k in [1_000_000u64, 124_749, 124_750] {
            let (u, v) = triangular_pair(k);
            assert!(u < v);
            assert_eq!((v * (v - 1) / 2 + u) as u64, k);
        }
    }

    #[test]
    fn er_extremes() {
        assert_eq!(gen_er(5, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(gen_er(5, 1.0, 1).unwrap().edge_count(), 10);
        assert_eq!(gen_er(1, 0.5, 1).unwrap().edge_count(), 0);
        assert!(matches!(gen_er(5, 1.5, 1), Err(GraphError::InvalidProbability(_))));
    }

    #[test]
    fn er_is_deterministic_per_seed() {
        let a = gen_er(60, 0.1, 9).unwrap();
        assert_eq!(a, gen_er(60, 0.1, 9).unwrap());
        assert_ne!(a, gen_er(60, 0.1, 10).unwrap());
    }

    #[test]
    fn er_desk_instance_edge_count() {
        // mean C(500,2) * 0.0249 = 3106.3, std ~ 55.0
        let g = gen_er(500, 0.0249, 2024).unwrap();
        let m = g.edge_count() as f64;
        assert!((m - 3106.3).abs() <= 4.0 * 55.0, "{m}");
    }

    #[test]
    fn er_edge_count_distribution() {
        // C(100,2) * 0.05 = 247.5; variance 4950 * 0.05 * 0.95
        let counts: Vec<f64> = (0..1000)
            .map(|s| gen_er(100, 0.05, s).unwrap().edge_count() as f64)
            .collect();
        let (mean, var) = mean_var(&counts);
        let se = (4950.0f64 * 0.05 * 0.95 / 1000.0).sqrt();
        assert!((mean - 247.5).abs() <= 3.0 * se, "mean {mean}");
        assert!((var / (4950.0 * 0.05 * 0.95) - 1.0).abs() < 0.15, "var {var}");
    }

    #[test]
    fn sbm_zero_matrix_has_no_edges() {
        let q = vec![vec![0.0; 3]; 3];
        let g = gen_sbm(10, 3, &q, 3).unwrap();
        assert_eq!(g.n(), 30);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn sbm_rejects_asymmetric_matrix() {
        let q = vec![vec![0.1, 0.2], vec![0.3, 0.1]];
        assert!(matches!(gen_sbm(4, 2, &q, 0), Err(GraphError::InvalidBlockMatrix { .. })));
        assert!(gen_sbm(4, 3, &q, 0).is_err());
    }

    #[test]
    fn sbm_respects_blocks() {
        let q = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let g = gen_sbm(4, 2, &q, 0).unwrap();
        assert_eq!(g.edge_count(), 12);
        assert!(g.edges().all(|(_, u, v)| u / 4 == v / 4));
        let q = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let g = gen_sbm(4, 2, &q, 0).unwrap();
        assert_eq!(g.edge_count(), 16);
        assert!(g.edges().all(|(_, u, v)| u / 4 != v / 4));
    }

    #[test]
    fn single_block_sbm_matches_er_distribution() {
        let q = vec![vec![0.05]];
        let sbm: Vec<f64> = (0..1000)
            .map(|s| gen_sbm(100, 1, &q, 50_000 + s).unwrap().edge_count() as f64)
            .collect();
        let er: Vec<f64> = (0..1000)
            .map(|s| gen_er(100, 0.05, 90_000 + s).unwrap().edge_count() as f64)
            .collect();
        let (ms, vs) = mean_var(&sbm);
        let (me, ve) = mean_var(&er);
        let se = ((vs + ve) / 1000.0).sqrt();
        assert!((ms - me).abs() <= 3.0 * se, "{ms} vs {me}");
        assert!((vs / ve - 1.0).abs() < 0.2, "{vs} vs {ve}");
    }

    #[test]
    fn sbm_five_block_instance_edge_count() {
        // 5 * C(100,2) * 0.023 + 10 * 100^2 * 0.0041 = 569.25 + 410 = 979.25
        let mut q = vec![vec![0.0041; 5]; 5];
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = 0.023;
        }
        let expected = 5.0 * 4950.0 * 0.023 + 10.0 * 10_000.0 * 0.0041;
        assert!((expected - 979.25f64).abs() < 1e-9);
        let var: f64 = 5.0 * 4950.0 * 0.023 * 0.977 + 10.0 * 10_000.0 * 0.0041 * 0.9959;
        let g = gen_sbm(100, 5, &q, 77).unwrap();
        assert_eq!(g.n(), 500);
        assert!(((g.edge_count() as f64) - expected).abs() <= 4.0 * var.sqrt());
        assert_eq!(g, gen_sbm(100, 5, &q, 77).unwrap());
    }
}
