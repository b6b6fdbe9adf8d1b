use std::borrow::Cow;
use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;

use super::sample::{SampleFilter, Scratch};
use super::{compute_l, EstimatorConfig, IcError, IcInstance};
use crate::graph::EdgeSet;
use crate::stats::Estimate;

/// One run of the epidemic after deleting `p`: the newly infected vertices,
/// sorted.
pub fn cascade<R: Rng + ?Sized>(
    inst: &IcInstance,
    p: &EdgeSet,
    rng: &mut R,
) -> Result<Vec<usize>, IcError> {
    let g = inst.graph();
    let deleted = g.mask(p)?;
    let mut active = vec![false; g.id_bound()];
    for (id, _, _) in g.edges() {
        active[id] = !deleted[id] && rng.gen::<f64>() < inst.probability(id);
    }
    let adj = g.undirected_adjacency(None);
    let mut seen = vec![false; g.n()];
    let mut queue: VecDeque<usize> = inst.seeds().iter().copied().collect();
    for &s in inst.seeds() {
        seen[s] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &(w, id) in &adj[u] {
            if active[id] && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    Ok((0..g.n()).filter(|&v| seen[v] && !inst.is_seed(v)).collect())
}

/// `E[sigma~(P)]` from `R` contagion networks with uniform terminals.
///
/// Samples are drawn over every live edge, including those in `P`, and
/// deleted edges are ignored afterwards, so estimates for different `P`
/// under one seed share their randomness.
pub fn estimate_sigma(inst: &IcInstance, p: &EdgeSet, cfg: &EstimatorConfig) -> Result<Estimate, IcError> {
    run(inst, p, cfg, None)
}

/// The conditioned estimator: rounds whose contagion network has a
/// component above `L` or two seeds in one component are redrawn, and only
/// terminals in tree components count.
pub fn estimate_sigma_prime(
    inst: &IcInstance,
    p: &EdgeSet,
    cfg: &EstimatorConfig,
) -> Result<Estimate, IcError> {
    let filter = filter_for(inst, cfg)?;
    run(inst, p, cfg, Some(filter))
}

pub(crate) fn filter_for(inst: &IcInstance, cfg: &EstimatorConfig) -> Result<SampleFilter, IcError> {
    Ok(SampleFilter {
        l: compute_l(cfg.d_end_for(inst), inst.n())?,
    })
}

fn run(
    inst: &IcInstance,
    p: &EdgeSet,
    cfg: &EstimatorConfig,
    filter: Option<SampleFilter>,
) -> Result<Estimate, IcError> {
    let deleted = inst.graph().mask(p)?;
    let rounds = cfg.rounds_for(inst.n())?;
    let adj = inst.graph().undirected_adjacency(None);
    let (successes, resamples) = (0..rounds as u64)
        .into_par_iter()
        .map_init(
            || Scratch::with_adjacency(inst, Cow::Borrowed(&adj)),
            |scratch, round| {
                let d = scratch
                    .draw(inst, cfg.seed, round, filter.as_ref())
                    .map_err(|e| (round, e))?;
                let hit = d.tree && scratch.reaches_seed(inst, d.terminal, &deleted);
                Ok((hit as u64, d.resamples as u64))
            },
        )
        .reduce(|| Ok((0, 0)), earliest_error)
        .map_err(|(_, e)| e)?;
    Ok(Estimate::from_successes(successes, rounds, inst.n(), resamples))
}

/// Sums counts; among failures keeps the lowest round so the reported
/// error does not depend on scheduling.
pub(crate) fn earliest_error(
    a: Result<(u64, u64), (u64, IcError)>,
    b: Result<(u64, u64), (u64, IcError)>,
) -> Result<(u64, u64), (u64, IcError)> {
    match (a, b) {
        (Ok(x), Ok(y)) => Ok((x.0 + y.0, x.1 + y.1)),
        (Err(x), Err(y)) => Err(if x.0 <= y.0 { x } else { y }),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::Graph;
    use crate::icsir::brute_force_expected_sigma;
    use crate::rng;

    #[test]
    fn cascade_extremes() {
        let g = cycle(6);
        let none = IcInstance::new(g.clone(), vec![0.0; 6], vec![2], EdgeSet::new()).unwrap();
        let all = IcInstance::new(g, vec![1.0; 6], vec![2], EdgeSet::new()).unwrap();
        let mut rng = rng::seeded(1);
        for _ in 0..20 {
            assert!(cascade(&none, &EdgeSet::new(), &mut rng).unwrap().is_empty());
            assert_eq!(cascade(&all, &EdgeSet::new(), &mut rng).unwrap(), vec![0, 1, 3, 4, 5]);
        }
        // deleting two edges cuts vertex 0 and 1 off from seed 2: (0,1) stays
        let cut = EdgeSet::from([1, 5]);
        assert_eq!(cascade(&all, &cut, &mut rng).unwrap(), vec![3, 4, 5]);
    }

    #[test]
    fn cascade_single_edge_frequency() {
        let inst = two_nodes(0.3);
        let mut rng = rng::seeded(12);
        let runs = 10_000;
        let hits = (0..runs)
            .filter(|_| cascade(&inst, &EdgeSet::new(), &mut rng).unwrap().len() == 1)
            .count();
        let f = hits as f64 / runs as f64;
        assert!((f - 0.3).abs() <= 3.0 * (0.3f64 * 0.7 / runs as f64).sqrt(), "{f}");
    }

    #[test]
    fn estimates_on_small_trees() {
        let zero = triangle(0.0);
        let e = estimate_sigma(&zero, &EdgeSet::new(), &EstimatorConfig::with_rounds(500, 1)).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.successes, 0);

        let cfg = EstimatorConfig::with_rounds(20_000, 2);
        let e = estimate_sigma(&two_nodes(0.5), &EdgeSet::new(), &cfg).unwrap();
        assert!(e.contains(0.5), "{e:?}");
        let e = estimate_sigma(&path3(0.5), &EdgeSet::new(), &cfg).unwrap();
        assert!(e.contains(0.75), "{e:?}");
        let e = estimate_sigma(&path3(0.5), &EdgeSet::from([0]), &cfg).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn estimate_is_thread_independent() {
        let g = crate::graph::gen_er(60, 0.08, 3).unwrap();
        let m = g.id_bound();
        let inst = IcInstance::new(g, vec![0.3; m], vec![0, 7], EdgeSet::new()).unwrap();
        let cfg = EstimatorConfig::with_rounds(3000, 99);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_sigma(&inst, &EdgeSet::new(), &cfg)).unwrap();
        let b = four.install(|| estimate_sigma(&inst, &EdgeSet::new(), &cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conditioned_estimator_on_triangle() {
        let inst = triangle(0.9);
        // d_end = 1.8 for this instance: unavailable without an override
        let cfg = EstimatorConfig::with_rounds(20_000, 4);
        assert!(matches!(
            estimate_sigma_prime(&inst, &EdgeSet::new(), &cfg),
            Err(IcError::DegreeTooLarge(_))
        ));
        let cfg = EstimatorConfig { d_end: Some(0.0), ..cfg };
        let sigma = estimate_sigma(&inst, &EdgeSet::new(), &cfg).unwrap();
        let prime = estimate_sigma_prime(&inst, &EdgeSet::new(), &cfg).unwrap();
        assert!(sigma.contains(1.962), "{sigma:?}");
        assert!(prime.contains(0.504), "{prime:?}");
        assert!(prime.mean < sigma.mean);
        assert_eq!(prime.resamples, 0);
    }

    #[test]
    fn conditioned_matches_plain_on_forests() {
        let g = Graph::from_edges(7, false, [(0, 1), (1, 2), (1, 3), (4, 5), (5, 6)]).unwrap();
        let inst = IcInstance::new(g, vec![0.6; 5], vec![0], EdgeSet::new()).unwrap();
        let cfg = EstimatorConfig {
            d_end: Some(0.0),
            ..EstimatorConfig::with_rounds(5000, 8)
        };
        let a = estimate_sigma(&inst, &EdgeSet::new(), &cfg).unwrap();
        let b = estimate_sigma_prime(&inst, &EdgeSet::new(), &cfg).unwrap();
        // one seed and L large enough: no rejections, identical samples
        assert_eq!(a.mean, b.mean);
        let exact = brute_force_expected_sigma(&inst, &EdgeSet::new()).unwrap();
        assert!(a.contains(exact));
    }

    #[test]
    fn earliest_error_wins() {
        let e = |r| Err((r, IcError::NoSeeds));
        assert_eq!(earliest_error(e(5), e(2)), e(2));
        assert_eq!(earliest_error(Ok((1, 2)), Ok((3, 4))), Ok((4, 6)));
        assert_eq!(earliest_error(Ok((1, 2)), e(3)), e(3));
    }
}
