//! Exact expectations by enumerating every activation pattern. Exponential,
//! for testing the estimators on small instances.

use super::{IcError, IcInstance};
use crate::graph::EdgeSet;

/// Largest number of edges enumerated.
pub const EXACT_EDGE_LIMIT: usize = 20;

struct Components {
    parent: Vec<usize>,
}

impl Components {
    fn new(n: usize) -> Self {
        Components {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    /// Returns false when `u` and `v` were already connected.
    fn union(&mut self, u: usize, v: usize) -> bool {
        let (a, b) = (self.find(u), self.find(v));
        if a == b {
            return false;
        }
        self.parent[a.max(b)] = a.min(b);
        true
    }
}

/// Enumerates activation patterns of `edges`, calling `visit` with the
/// pattern's probability and the activated list.
fn enumerate(
    inst: &IcInstance,
    edges: &[usize],
    mut visit: impl FnMut(f64, &[(usize, usize, usize)]),
) -> Result<(), IcError> {
    if edges.len() > EXACT_EDGE_LIMIT {
        return Err(IcError::TooLarge {
            edges: edges.len(),
            limit: EXACT_EDGE_LIMIT,
        });
    }
    let g = inst.graph();
    let mut on = Vec::with_capacity(edges.len());
    for mask in 0u32..1 << edges.len() {
        on.clear();
        let mut weight = 1.0;
        for (bit, &id) in edges.iter().enumerate() {
            let p = inst.probability(id);
            if mask >> bit & 1 == 1 {
                weight *= p;
                let (u, v) = g.endpoints(id).unwrap();
                on.push((id, u, v));
            } else {
                weight *= 1.0 - p;
            }
        }
        if weight > 0.0 {
            visit(weight, &on);
        }
    }
    Ok(())
}

fn infected_after(inst: &IcInstance, on: &[(usize, usize, usize)], skip: &[bool]) -> Vec<bool> {
    let mut c = Components::new(inst.n());
    for &(id, u, v) in on {
        if !skip[id] {
            c.union(u, v);
        }
    }
    let mut seeded = vec![false; inst.n()];
    for &s in inst.seeds() {
        let r = c.find(s);
        seeded[r] = true;
    }
    (0..inst.n())
        .map(|v| !inst.is_seed(v) && seeded[c.find(v)])
        .collect()
}

/// `E[sigma~(P)]` summed over all `2^(m - |P|)` activation patterns.
pub fn brute_force_expected_sigma(inst: &IcInstance, p: &EdgeSet) -> Result<f64, IcError> {
    let deleted = inst.graph().mask(p)?;
    let free: Vec<usize> = inst
        .graph()
        .edges()
        .map(|(id, _, _)| id)
        .filter(|&id| !deleted[id])
        .collect();
    let mut total = 0.0;
    enumerate(inst, &free, |w, on| {
        let hit = infected_after(inst, on, &deleted);
        total += w * hit.iter().filter(|&&h| h).count() as f64;
    })?;
    Ok(total)
}

/// Exact conditioned expectation `E[rho(P) | no component above l, no two
/// seeds in a component]`, with the condition and the tree test taken on
/// the full contagion network. Enumerates all `2^m` patterns.
pub fn brute_force_expected_sigma_prime(
    inst: &IcInstance,
    p: &EdgeSet,
    l: usize,
) -> Result<f64, IcError> {
    let deleted = inst.graph().mask(p)?;
    let all: Vec<usize> = inst.graph().edges().map(|(id, _, _)| id).collect();
    let n = inst.n();
    let (mut mass, mut total) = (0.0, 0.0);
    enumerate(inst, &all, |w, on| {
        let mut c = Components::new(n);
        let mut cyclic = vec![false; n];
        let mut closing = Vec::new();
        for &(_, u, v) in on {
            if !c.union(u, v) {
                closing.push(u);
            }
        }
        for u in closing {
            let r = c.find(u);
            cyclic[r] = true;
        }
        let mut size = vec![0; n];
        let mut seeds = vec![0; n];
        for v in 0..n {
            let r = c.find(v);
            size[r] += 1;
            seeds[r] += inst.is_seed(v) as usize;
        }
        if size.iter().any(|&s| s > l) || seeds.iter().any(|&s| s >= 2) {
            return;
        }
        let hit = infected_after(inst, on, &deleted);
        let rho = (0..n).filter(|&v| hit[v] && !cyclic[c.find(v)]).count();
        mass += w;
        total += w * rho as f64;
    })?;
    if mass > 0.0 {
        Ok(total / mass)
    } else {
        Err(IcError::ImpossibleCondition)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::graph::fixtures::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn hand_computed_expectations() {
        assert_eq!(brute_force_expected_sigma(&triangle(0.0), &EdgeSet::new()).unwrap(), 0.0);
        assert!(close(brute_force_expected_sigma(&two_nodes(0.5), &EdgeSet::new()).unwrap(), 0.5));
        assert!(close(brute_force_expected_sigma(&path3(0.5), &EdgeSet::new()).unwrap(), 0.75));
        assert!(close(brute_force_expected_sigma(&path3(0.5), &EdgeSet::from([1])).unwrap(), 0.5));
    }

    #[test]
    fn triangle_expectations() {
        // all three edges: 2 * 0.729; two edges: 3 * 0.081 * 2; one edge at the seed: 2 * 0.009
        let inst = triangle(0.9);
        assert!(close(brute_force_expected_sigma(&inst, &EdgeSet::new()).unwrap(), 1.962));
        // the cyclic pattern contributes nothing to rho
        assert!(close(brute_force_expected_sigma_prime(&inst, &EdgeSet::new(), 10).unwrap(), 0.504));
    }

    #[test]
    fn tree_formula_on_a_star() {
        // seed at a leaf: reach the center with p0, every other leaf with p0 * p_i
        let g = star(3);
        let p = vec![0.5, 0.4, 0.2];
        let inst = IcInstance::new(g, p, vec![1], EdgeSet::new()).unwrap();
        let expected = 0.5 + 0.5 * 0.4 + 0.5 * 0.2;
        assert!(close(brute_force_expected_sigma(&inst, &EdgeSet::new()).unwrap(), expected));
        assert!(close(brute_force_expected_sigma_prime(&inst, &EdgeSet::new(), 10).unwrap(), expected));
    }

    #[test]
    fn conditioning_drops_collisions() {
        // seeds 0 and 2 on a path: only the patterns keeping them apart count
        let inst = IcInstance::new(path(3), vec![0.5, 0.5], vec![0, 2], EdgeSet::new()).unwrap();
        // accepted: none active (rho 0), exactly one active (rho 1); mass 3/4
        assert!(close(brute_force_expected_sigma_prime(&inst, &EdgeSet::new(), 10).unwrap(), 2.0 / 3.0));
        let always = IcInstance::new(path(3), vec![1.0, 1.0], vec![0, 2], EdgeSet::new()).unwrap();
        assert_eq!(
            brute_force_expected_sigma_prime(&always, &EdgeSet::new(), 10),
            Err(IcError::ImpossibleCondition)
        );
    }

    #[test]
    fn size_limit() {
        let g = complete(7);
        let inst = IcInstance::new(g, vec![0.5; 21], vec![0], EdgeSet::new()).unwrap();
        assert!(matches!(
            brute_force_expected_sigma(&inst, &EdgeSet::new()),
            Err(IcError::TooLarge { edges: 21, .. })
        ));
        assert!(brute_force_expected_sigma(&inst, &EdgeSet::from([0])).is_ok());
    }
}
