//! Builds the concrete instance an experiment runs on: the contact network,
//! its rates, seeds and candidate set.
//!
//! Contact `c = {u, v}` with `u < v` becomes the directed D-SIR edges
//! `2c` (`u -> v`) and `2c + 1` (`v -> u`). Deletion units are contacts,
//! or directed edges when `candidates.directions = "single"`.

use std::path::Path;

use epimit_core::dsir::DsirSystem;
use epimit_core::graph::{degree_cap_preprocess, gen_er, gen_sbm, load_edge_list};
use epimit_core::gsir::GsirParams;
use epimit_core::icsir::{rates_to_activation, IcInstance};
use epimit_core::{rng, EdgeId, EdgeSet, Graph};
use rand::seq::index;
use rand::Rng;

use crate::config::{ConfigIssue, Directions, ExperimentConfig, IcSeedMode, NetworkSpec, RateSpec, SeedSpec};
use crate::seeds::derive_seed;

#[derive(Clone, Debug)]
pub struct Scenario {
    /// Undirected contact network with ids `0..m`.
    pub contacts: Graph,
    /// Activation probability per contact.
    pub activation: Vec<f64>,
    pub dsir: Option<DsirSystem>,
    pub gsir: Option<GsirParams>,
    /// Present when some algorithm or metric uses the IC model.
    pub ic: Option<IcInstance>,
    /// Seed vertices, sorted.
    pub seeds: Vec<usize>,
    /// Candidate contacts, sorted.
    pub candidates: Vec<EdgeId>,
    pub directions: Directions,
}

impl Scenario {
    /// Deletion units the algorithms choose from.
    pub fn candidate_units(&self) -> EdgeSet {
        match self.directions {
            Directions::Both => self.candidates.iter().copied().collect(),
            Directions::Single => self.candidates.iter().flat_map(|&c| [2 * c, 2 * c + 1]).collect(),
        }
    }

    /// Graph whose edge ids are the deletion units.
    pub fn unit_graph(&self) -> &Graph {
        match self.directions {
            Directions::Both => &self.contacts,
            Directions::Single => self.dsir.as_ref().expect("single mode requires rates").graph(),
        }
    }

    /// Directed D-SIR edges removed by deleting `units`.
    pub fn directed(&self, units: &[EdgeId]) -> EdgeSet {
        match self.directions {
            Directions::Both => units.iter().flat_map(|&c| [2 * c, 2 * c + 1]).collect(),
            Directions::Single => units.iter().copied().collect(),
        }
    }

    /// Contacts removed by deleting `units`; only defined for whole contacts.
    pub fn contacts_of(&self, units: &[EdgeId]) -> EdgeSet {
        debug_assert_eq!(self.directions, Directions::Both);
        units.iter().copied().collect()
    }
}

fn uniform<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.gen_range(range[0]..=range[1])
    }
}

/// Generates or loads the network and draws everything random about the
/// instance. Problems that depend on the realized network (a seed id out of
/// range, a budget above `|Q|`, rates violating the model) come back as
/// config issues.
pub fn build_scenario(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    needs_ic: bool,
) -> Result<Scenario, Vec<ConfigIssue>> {
    let issue = |path: &str, message: String| vec![ConfigIssue::new(path, message)];
    let root = cfg.seed;

    let (raw, weights) = match &cfg.network {
        NetworkSpec::Er { n, p, .. } => (
            gen_er(*n, *p, derive_seed(root, "network")).map_err(|e| issue("network", e.to_string()))?,
            None,
        ),
        NetworkSpec::Sbm {
            block_size, kappa, q, ..
        } => (
            gen_sbm(*block_size, *kappa, q, derive_seed(root, "network"))
                .map_err(|e| issue("network", e.to_string()))?,
            None,
        ),
        NetworkSpec::EdgeList { path, .. } => {
            let full = base_dir.join(path);
            let list = load_edge_list(&full).map_err(|e| issue("network.path", format!("{}: {e}", full.display())))?;
            if list.graph.is_directed() {
                return Err(issue("network.path", "contact networks must be undirected".into()));
            }
            (list.graph, list.weights)
        }
    };
    if matches!(cfg.rates, RateSpec::File) && weights.is_none() {
        return Err(issue("rates.kind", "the edge list has no probability column".into()));
    }

    // degree cap, then renumber survivors densely
    let capped = match cfg.network.max_degree() {
        Some(cap) => degree_cap_preprocess(&raw, cap).0,
        None => raw,
    };
    let mut contacts = Graph::undirected(capped.n());
    let mut file_p = Vec::new();
    for (id, u, v) in capped.edges() {
        contacts.add_edge(u.min(v), u.max(v)).expect("edges of a simple graph");
        if let Some(w) = &weights {
            file_p.push(w[id]);
        }
    }
    let n = contacts.n();
    let m = contacts.edge_count();

    let mut issues = Vec::new();
    let seeds = match &cfg.seeds {
        SeedSpec::Fixed { vertices, .. } => {
            for (i, &v) in vertices.iter().enumerate() {
                if v >= n {
                    issues.push(ConfigIssue::new(
                        format!("seeds.vertices[{i}]"),
                        format!("vertex {v} out of range for {n} vertices"),
                    ));
                }
            }
            let mut s = vertices.clone();
            s.sort_unstable();
            s
        }
        SeedSpec::Count { count, .. } => {
            if *count > n {
                issues.push(ConfigIssue::new("seeds.count", format!("{count} seeds on {n} vertices")));
                Vec::new()
            } else {
                let mut r = rng::seeded(derive_seed(root, "seeds"));
                let mut s = index::sample(&mut r, n, *count).into_vec();
                s.sort_unstable();
                s
            }
        }
    };

    let q_len = ((cfg.candidates.fraction * m as f64).round() as usize).min(m);
    let mut candidates = index::sample(&mut rng::seeded(derive_seed(root, "candidates")), m, q_len).into_vec();
    candidates.sort_unstable();
    let units = match cfg.candidates.directions {
        Directions::Both => q_len,
        Directions::Single => 2 * q_len,
    };
    if let Some(&k) = cfg.budgets.iter().max() {
        if k > units {
            issues.push(ConfigIssue::new(
                "budgets",
                format!("budget {k} exceeds the {units} candidate deletions"),
            ));
        }
    }
    if !issues.is_empty() {
        return Err(issues);
    }

    let mut x0 = vec![0.0; n];
    let mut r0 = vec![0.0; n];
    {
        let mut r = rng::seeded(derive_seed(root, "initial"));
        for &s in &seeds {
            x0[s] = uniform(&mut r, cfg.seeds.x0());
        }
        for r0_v in r0.iter_mut() {
            *r0_v = uniform(&mut r, cfg.initial.r0);
        }
        for (x, r) in x0.iter().zip(r0.iter_mut()) {
            *r = r.min(1.0 - x);
        }
    }

    let mut dsir = None;
    let activation = match &cfg.rates {
        RateSpec::Uniform { b, d } => {
            let mut r = rng::seeded(derive_seed(root, "rates"));
            let mut directed = Graph::directed(n);
            let mut rates = Vec::with_capacity(2 * m);
            for (_, u, v) in contacts.edges() {
                directed.add_edge(u, v).expect("fresh pair");
                directed.add_edge(v, u).expect("fresh pair");
                rates.push(uniform(&mut r, *b));
                rates.push(uniform(&mut r, *b));
            }
            let healing: Vec<f64> = (0..n).map(|_| uniform(&mut r, *d)).collect();
            let activation = contacts
                .edges()
                .map(|(c, u, v)| {
                    let uv = rates_to_activation(rates[2 * c], healing[v]);
                    let vu = rates_to_activation(rates[2 * c + 1], healing[u]);
                    match (uv, vu) {
                        (Ok(a), Ok(b)) => Ok((a + b) / 2.0),
                        (Err(e), _) | (_, Err(e)) => Err(e),
                    }
                })
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| issue("rates", e.to_string()))?;
            dsir = Some(
                DsirSystem::new(directed, rates, healing, x0.clone(), r0.clone())
                    .map_err(|e| issue("rates", e.to_string()))?,
            );
            activation
        }
        RateSpec::Activation { p } => {
            let mut r = rng::seeded(derive_seed(root, "rates"));
            (0..m).map(|_| uniform(&mut r, *p)).collect()
        }
        RateSpec::File => file_p,
    };

    let ic = if needs_ic {
        let ic_seeds = match cfg.initial.ic_seeds {
            IcSeedMode::All => seeds.clone(),
            IcSeedMode::Bernoulli => {
                let mut r = rng::seeded(derive_seed(root, "ic-seeds"));
                seeds.iter().copied().filter(|&s| r.gen_bool(x0[s])).collect()
            }
        };
        let q: EdgeSet = candidates.iter().copied().collect();
        Some(
            IcInstance::new(contacts.clone(), activation.clone(), ic_seeds, q)
                .map_err(|e| issue("seeds", format!("IC instance: {e}")))?,
        )
    } else {
        None
    };

    Ok(Scenario {
        gsir: dsir.as_ref().map(GsirParams::from_dsir),
        contacts,
        activation,
        dsir,
        ic,
        seeds,
        candidates,
        directions: cfg.candidates.directions,
    })
}
