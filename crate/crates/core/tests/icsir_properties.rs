use epimit_core::graph::{analyze, gen_er};
use epimit_core::icsir::{
    brute_force_expected_sigma, brute_force_expected_sigma_prime, compute_l, estimate_sigma, estimate_sigma_prime,
    greedy_icsir, rates_to_activation, ContagionSample, EstimatorConfig, IcInstance, Objective, SampleFilter,
};
use epimit_core::optimize::{brute_force_opt, check_supermodular};
use epimit_core::{rng, EdgeId, EdgeSet, Graph};
use rand::seq::index;
use rand::Rng;

/// Connected-ish random instance with at most `max_edges` edges.
fn random_instance<R: Rng>(rng: &mut R, max_edges: usize, seeds: usize) -> IcInstance {
    loop {
        let n = rng.gen_range(4..=8);
        let g = gen_er(n, rng.gen_range(0.3..0.6), rng.gen()).unwrap();
        let m = g.edge_count();
        if m < 3 || m > max_edges {
            continue;
        }
        let p = (0..m).map(|_| rng.gen_range(0.1..0.9)).collect();
        let seeds = index::sample(rng, n, seeds).into_vec();
        let q = g.edge_ids();
        return IcInstance::new(g, p, seeds, q).unwrap();
    }
}

#[test]
fn estimator_is_unbiased() {
    let mut r = rng::seeded(1);
    for _ in 0..5 {
        let inst = random_instance(&mut r, 16, 1);
        let exact = brute_force_expected_sigma(&inst, &EdgeSet::new()).unwrap();
        let covered = (0..100)
            .filter(|&run| {
                let cfg = EstimatorConfig::with_rounds(2000, run);
                estimate_sigma(&inst, &EdgeSet::new(), &cfg).unwrap().contains(exact)
            })
            .count();
        assert!(covered >= 90, "{covered}/100");
    }
}

#[test]
fn conditioned_estimator_matches_its_oracle() {
    let mut r = rng::seeded(2);
    for _ in 0..5 {
        let inst = random_instance(&mut r, 14, 2);
        let cfg = EstimatorConfig {
            d_end: Some(0.0),
            ..EstimatorConfig::with_rounds(20_000, r.gen())
        };
        let l = compute_l(0.0, inst.n()).unwrap();
        let p: EdgeSet = inst.candidates().iter().take(2).collect();
        let exact = match brute_force_expected_sigma_prime(&inst, &p, l) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let est = estimate_sigma_prime(&inst, &p, &cfg).unwrap();
        assert!(est.contains(exact), "{est:?} vs {exact}");
    }
}

#[test]
fn greedy_meets_the_guarantee_on_exact_values() {
    let mut r = rng::seeded(3);
    for _ in 0..10 {
        let inst = random_instance(&mut r, 12, 1);
        let q = inst.candidates().clone();
        let exact = |p: &[EdgeId]| brute_force_expected_sigma(&inst, &p.iter().collect());
        let base = brute_force_expected_sigma(&inst, &EdgeSet::new()).unwrap();
        for k in 1..=3.min(q.len()) {
            let cfg = EstimatorConfig::with_rounds(20_000, r.gen());
            let trace = greedy_icsir(&inst, k, &cfg, Objective::Sigma).unwrap();
            let got = base - brute_force_expected_sigma(&inst, &trace.prefix(k)).unwrap();
            let (_, opt) = brute_force_opt(exact, &q, k).unwrap();
            let bound = (1.0 - (-1.0f64).exp()) * (base - opt) - 0.05;
            assert!(got >= bound, "k={k}: {got} < {bound}");
            assert!(trace.objective_values.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}

#[test]
fn greedy_objective_variants_agree_on_forests() {
    // on a tree with one seed nothing is ever filtered, so both traces coincide
    let g = Graph::from_edges(7, false, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).unwrap();
    let inst = IcInstance::new(g, vec![0.7; 6], vec![0], (0..6).collect()).unwrap();
    let cfg = EstimatorConfig {
        d_end: Some(0.5),
        ..EstimatorConfig::with_rounds(5000, 9)
    };
    let a = greedy_icsir(&inst, 3, &cfg, Objective::Sigma).unwrap();
    let b = greedy_icsir(&inst, 3, &cfg, Objective::SigmaPrime).unwrap();
    assert_eq!(a.chosen, b.chosen);
    assert_eq!(a.objective_values, b.objective_values);
}

#[test]
fn rho_is_monotone_supermodular_per_sample() {
    let mut r = rng::seeded(4);
    let mut checked = 0;
    while checked < 200 {
        let inst = random_instance(&mut r, 16, 2);
        let filter = SampleFilter {
            l: r.gen_range(3..=inst.n()),
        };
        let sample = ContagionSample::draw(&inst, &mut r);
        if !sample.passes(&inst, &filter) {
            continue;
        }
        let mut ids = sample.activated_edges();
        if ids.is_empty() {
            continue;
        }
        ids.truncate(6);
        let q: EdgeSet = ids.into_iter().collect();
        let rho = |p: &[EdgeId]| {
            let mask = inst.graph().mask(&p.iter().collect()).unwrap();
            Ok::<_, std::convert::Infallible>(sample.rho(&inst, &mask) as f64)
        };
        let report = check_supermodular(rho, &q, 0.0).unwrap();
        assert!(report.is_supermodular() && report.is_monotone(), "{report:?}");
        checked += 1;
    }
}

#[test]
fn activation_matches_the_geometric_series() {
    let mut r = rng::seeded(5);
    for _ in 0..100 {
        let (b, d): (f64, f64) = (r.gen_range(0.01..1.0), r.gen_range(0.01..1.0));
        let series: f64 = (0..=200)
            .map(|t| ((1.0 - d) * (1.0 - b)).powi(t) * b)
            .sum();
        let tail = ((1.0 - d) * (1.0 - b)).powi(201) / (1.0 - (1.0 - d) * (1.0 - b));
        let p = rates_to_activation(b, d).unwrap();
        assert!((p - series).abs() <= 1e-10 + tail, "{b} {d}");
    }
}

struct BranchingCounts {
    draws: usize,
    oversized: usize,
    collisions: usize,
    /// `y` on draws passing both filters.
    cyclic_mass: Vec<f64>,
}

fn branching_counts(n: usize, d: f64, s: usize, draws: usize, l: usize) -> BranchingCounts {
    let mut counts = BranchingCounts {
        draws,
        oversized: 0,
        collisions: 0,
        cyclic_mass: Vec::new(),
    };
    let mut r = rng::seeded(6);
    for draw in 0..draws {
        let g = gen_er(n, d / n as f64, draw as u64).unwrap();
        let a = analyze(&g, &EdgeSet::new());
        if a.components.iter().any(|c| c.vertices.len() > l) {
            counts.oversized += 1;
            continue;
        }
        let seeds = index::sample(&mut r, n, s).into_vec();
        let mut per = vec![0usize; a.components.len()];
        for &v in &seeds {
            per[a.component_of[v]] += 1;
        }
        if per.iter().any(|&c| c >= 2) {
            counts.collisions += 1;
            continue;
        }
        let y: usize = a
            .components
            .iter()
            .zip(&per)
            .filter(|(c, &k)| k > 0 && !c.is_tree)
            .map(|(c, _)| c.vertices.len() - 1)
            .sum();
        counts.cyclic_mass.push(y as f64);
    }
    counts
}

#[test]
fn subcritical_contagion_networks_stay_small() {
    let (n, d, s) = (500, 0.5, 3);
    let l = compute_l(d, n).unwrap();
    assert_eq!(l, 224);
    let c = branching_counts(n, d, s, 2000, l);
    assert_eq!(c.oversized, 0);

    let se = |p: f64, m: usize| (p * (1.0 - p) / m as f64).sqrt();
    let kept = c.draws - c.oversized;
    let collision = c.collisions as f64 / kept as f64;
    let collision_bound = 2.0 * (s * s * l) as f64 / n as f64;
    assert!(collision <= collision_bound + 3.0 * se(collision, kept));

    let m = c.cyclic_mass.len();
    let mean = c.cyclic_mass.iter().sum::<f64>() / m as f64;
    let var = c.cyclic_mass.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    let accepted = m as f64 / c.draws as f64;
    let bound = s as f64 * (l * l) as f64 * d.powi(3) / (2.0 * n as f64 * (1.0 - d)) / accepted;
    assert!(mean <= bound + 3.0 * (var / m as f64).sqrt(), "{mean} > {bound}");
}
