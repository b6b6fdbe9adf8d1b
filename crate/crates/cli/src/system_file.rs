//! D-SIR system files.
//!
//! ```toml
//! n = 3
//! healing = [0.25, 0.25, 0.25]
//! x0 = [1.0, 0.0, 0.0]
//! r0 = [0.0, 0.0, 0.0]           # optional, zeros by default
//! initial = "bernoulli"          # G-SIR start: "bernoulli" or "fixed"
//! candidates = [0, 1]            # optional edge ids, all edges by default
//! # [source, target, infection rate]; edge ids follow this order
//! edges = [[0, 1, 0.0833], [1, 0, 0.0833]]
//! ```

use epimit_core::dsir::DsirSystem;
use epimit_core::gsir::{GsirParams, Initial};
use epimit_core::{EdgeSet, Graph};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum InitialMode {
    /// Each replicate draws its initial states from `x0` and `r0`.
    #[default]
    Bernoulli,
    /// `x0` and `r0` are 0/1 indicators used as-is.
    Fixed,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    n: usize,
    healing: Vec<f64>,
    x0: Vec<f64>,
    r0: Option<Vec<f64>>,
    #[serde(default)]
    initial: InitialMode,
    candidates: Option<Vec<usize>>,
    edges: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub system: DsirSystem,
    pub candidates: EdgeSet,
    pub initial: InitialMode,
}

impl LoadedSystem {
    pub fn gsir(&self) -> Result<GsirParams, String> {
        let sys = &self.system;
        match self.initial {
            InitialMode::Bernoulli => Ok(GsirParams::from_dsir(sys)),
            InitialMode::Fixed => {
                let indicator = |v: &[f64], what: &str| -> Result<Vec<usize>, String> {
                    v.iter()
                        .enumerate()
                        .filter_map(|(i, &x)| match x {
                            0.0 => None,
                            1.0 => Some(Ok(i)),
                            _ => Some(Err(format!("{what}[{i}] = {x} is not an indicator"))),
                        })
                        .collect()
                };
                let initial = Initial::Fixed {
                    infected: indicator(sys.x0(), "x0")?,
                    removed: indicator(sys.r0(), "r0")?,
                };
                GsirParams::new(sys.graph().clone(), sys.rates().to_vec(), sys.healing().to_vec(), initial)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

pub fn parse_system(text: &str) -> Result<LoadedSystem, String> {
    let f: SystemFile = toml::from_str(text).map_err(|e| e.message().trim().to_string())?;
    let mut graph = Graph::directed(f.n);
    let mut rates = Vec::with_capacity(f.edges.len());
    for (i, &(u, v, b)) in f.edges.iter().enumerate() {
        graph.add_edge(u, v).map_err(|e| format!("edges[{i}]: {e}"))?;
        rates.push(b);
    }
    let candidates = match f.candidates {
        Some(ids) => ids.into_iter().collect(),
        None => graph.edge_ids(),
    };
    graph.mask(&candidates).map_err(|e| format!("candidates: {e}"))?;
    let r0 = f.r0.unwrap_or_else(|| vec![0.0; f.n]);
    let system = DsirSystem::new(graph, rates, f.healing, f.x0, r0).map_err(|e| e.to_string())?;
    Ok(LoadedSystem {
        system,
        candidates,
        initial: f.initial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use epimit_core::dsir::sigma_hat;

    #[test]
    fn two_node_chain() {
        let text = "n = 2\nhealing = [0.5, 0.5]\nx0 = [0.8, 0.0]\nedges = [[0, 1, 0.1]]\n";
        let loaded = parse_system(text).unwrap();
        assert_eq!(loaded.candidates.to_vec(), vec![0]);
        // (1 - x0_2) B_21 x0_1 / D_1
        let v = sigma_hat(&loaded.system, &EdgeSet::new()).unwrap();
        assert!((v - 0.16).abs() < 1e-12, "{v}");
    }

    #[test]
    fn fixed_mode_requires_indicators() {
        let text = "n = 2\nhealing = [0.5, 0.5]\nx0 = [0.8, 0.0]\ninitial = \"fixed\"\nedges = [[0, 1, 0.1]]\n";
        assert!(parse_system(text).unwrap().gsir().unwrap_err().contains("x0[0]"));
        let ok = text.replace("0.8", "1.0");
        let params = parse_system(&ok).unwrap().gsir().unwrap();
        assert_eq!(
            params.initial(),
            &Initial::Fixed {
                infected: vec![0],
                removed: vec![]
            }
        );
    }

    #[test]
    fn bad_files_rejected() {
        assert!(parse_system("n = 2\nhealing = [0.5]\nx0 = [0, 0]\nedges = []\n").is_err());
        assert!(parse_system("n = 2\nhealing = [0.5, 0.5]\nx0 = [0.0, 0.0]\nedges = [[0, 0, 0.1]]\n").is_err());
        assert!(
            parse_system("n = 2\nhealing = [0.5, 0.5]\nx0 = [0.0, 0.0]\ncandidates = [3]\nedges = [[0, 1, 0.1]]\n")
                .is_err()
        );
    }
}
