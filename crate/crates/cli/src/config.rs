//! Experiment configuration (TOML, `schema_version = 1`).
//!
//! ```toml
//! schema_version = 1
//! id = "er200"
//! seed = 7
//! budgets = [0, 10, 20]
//! algorithms = ["greedy-dsir", "max-degree", "random"]
//! metrics = ["dsir-sigma", "dsir-sigma-hat"]
//!
//! [network]
//! kind = "er"            # "er" | "sbm" | "edge-list"
//! n = 200
//! p = 0.03
//! max_degree = 12        # optional degree cap
//!
//! [rates]
//! kind = "uniform"       # "uniform" | "activation" | "file"
//! b = [0.011, 0.034]
//! d = [0.28, 0.35]
//!
//! [seeds]
//! kind = "count"         # "count" | "fixed"
//! count = 5
//! x0 = [0.8, 0.9]
//! ```
//!
//! See the README for every field.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub id: String,
    pub seed: u64,
    pub network: NetworkSpec,
    pub rates: RateSpec,
    pub seeds: SeedSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub candidates: CandidateSpec,
    pub budgets: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub replication: ReplicationSpec,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkSpec {
    Er {
        n: usize,
        p: f64,
        max_degree: Option<usize>,
    },
    Sbm {
        block_size: usize,
        kappa: usize,
        q: Vec<Vec<f64>>,
        max_degree: Option<usize>,
    },
    EdgeList {
        /// Relative paths resolve against the config file's directory.
        path: PathBuf,
        max_degree: Option<usize>,
    },
}

impl NetworkSpec {
    pub fn max_degree(&self) -> Option<usize> {
        match self {
            NetworkSpec::Er { max_degree, .. }
            | NetworkSpec::Sbm { max_degree, .. }
            | NetworkSpec::EdgeList { max_degree, .. } => *max_degree,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateSpec {
    /// Infection rates per direction and healing rates per node, uniform in
    /// the given ranges. Activation probabilities follow from the rates.
    Uniform { b: [f64; 2], d: [f64; 2] },
    /// Activation probabilities only, uniform per contact. IC-SIR only.
    Activation { p: [f64; 2] },
    /// Activation probabilities from the edge list's third column.
    File,
}

impl RateSpec {
    pub fn has_rates(&self) -> bool {
        matches!(self, RateSpec::Uniform { .. })
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeedSpec {
    Fixed {
        vertices: Vec<usize>,
        #[serde(default = "certain")]
        x0: [f64; 2],
    },
    Count {
        count: usize,
        #[serde(default = "certain")]
        x0: [f64; 2],
    },
}

fn certain() -> [f64; 2] {
    [1.0, 1.0]
}

impl SeedSpec {
    pub fn x0(&self) -> [f64; 2] {
        match self {
            SeedSpec::Fixed { x0, .. } | SeedSpec::Count { x0, .. } => *x0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Range of the initial removed probability of every node.
    #[serde(default)]
    pub r0: [f64; 2],
    /// How IC-SIR seeds follow from the initial infection probabilities.
    #[serde(default)]
    pub ic_seeds: IcSeedMode,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            r0: [0.0, 0.0],
            ic_seeds: IcSeedMode::All,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum IcSeedMode {
    /// Every seed vertex is an IC seed.
    #[default]
    All,
    /// Each seed vertex `u` is an IC seed with probability `x0_u`, drawn once.
    Bernoulli,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    /// Fraction of contacts drawn uniformly into the candidate set.
    #[serde(default = "one")]
    pub fraction: f64,
    #[serde(default)]
    pub directions: Directions,
}

fn one() -> f64 {
    1.0
}

impl Default for CandidateSpec {
    fn default() -> Self {
        CandidateSpec {
            fraction: 1.0,
            directions: Directions::Both,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Directions {
    /// A deletion removes a contact in both directions.
    #[default]
    Both,
    /// Directed D-SIR edges are deleted one at a time. D-SIR only.
    Single,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GreedyDsir,
    GreedyIcSigma,
    GreedyIcSigmaPrime,
    MaxDegree,
    Random,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GreedyDsir => "greedy-dsir",
            Algorithm::GreedyIcSigma => "greedy-ic-sigma",
            Algorithm::GreedyIcSigmaPrime => "greedy-ic-sigma-prime",
            Algorithm::MaxDegree => "max-degree",
            Algorithm::Random => "random",
        }
    }

    fn needs_rates(self) -> bool {
        self == Algorithm::GreedyDsir
    }

    fn is_ic(self) -> bool {
        matches!(self, Algorithm::GreedyIcSigma | Algorithm::GreedyIcSigmaPrime)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    DsirSigma,
    DsirSigmaHat,
    IcEstimate,
    GsirEstimate,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::DsirSigma => "dsir-sigma",
            Metric::DsirSigmaHat => "dsir-sigma-hat",
            Metric::IcEstimate => "ic-estimate",
            Metric::GsirEstimate => "gsir-estimate",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Metric::IcEstimate | Metric::GsirEstimate)
    }

    fn needs_rates(self) -> bool {
        self != Metric::IcEstimate
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Overrides the round count derived from `epsilon`.
    pub rounds: Option<usize>,
    /// Overrides the expected-degree bound used for the component cutoff.
    pub d_end: Option<f64>,
}

fn default_epsilon() -> f64 {
    0.1
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        EstimatorSpec {
            epsilon: default_epsilon(),
            rounds: None,
            d_end: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReplicationSpec {
    /// G-SIR replicates per evaluation.
    #[serde(default = "default_gsir_reps")]
    pub gsir: usize,
}

fn default_gsir_reps() -> usize {
    1000
}

impl Default for ReplicationSpec {
    fn default() -> Self {
        ReplicationSpec {
            gsir: default_gsir_reps(),
        }
    }
}

/// One schema violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigIssue {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Parses and validates. A TOML syntax or type error is reported as a
/// single issue; otherwise every violation is listed.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigIssue>> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let span = e
            .span()
            .map(|s| format!("byte {}", s.start))
            .unwrap_or_else(|| "config".into());
        vec![ConfigIssue::new(span, e.message().trim())]
    })?;
    let issues = validate_config(&cfg);
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(issues)
    }
}

fn check_range(issues: &mut Vec<ConfigIssue>, path: &str, r: [f64; 2], lo: f64, hi: f64) {
    if !(r[0] <= r[1]) || r[0] < lo || r[1] > hi {
        issues.push(ConfigIssue::new(
            path,
            format!("range [{}, {}] must be ordered and within [{lo}, {hi}]", r[0], r[1]),
        ));
    }
}

fn check_probability(issues: &mut Vec<ConfigIssue>, path: &str, p: f64) {
    if !(0.0..=1.0).contains(&p) {
        issues.push(ConfigIssue::new(path, format!("probability {p} outside [0, 1]")));
    }
}

/// Checks everything that does not need the generated network.
pub fn validate_config(cfg: &ExperimentConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    if cfg.schema_version != SCHEMA_VERSION {
        issues.push(ConfigIssue::new(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", cfg.schema_version),
        ));
    }
    if cfg.id.is_empty() || cfg.id.contains([',', '"', '\n']) {
        issues.push(ConfigIssue::new("id", "must be non-empty without commas, quotes or newlines"));
    }

    match &cfg.network {
        NetworkSpec::Er { n, p, .. } => {
            if *n == 0 {
                issues.push(ConfigIssue::new("network.n", "must be positive"));
            }
            check_probability(&mut issues, "network.p", *p);
        }
        NetworkSpec::Sbm {
            block_size, kappa, q, ..
        } => {
            if *block_size == 0 || *kappa == 0 {
                issues.push(ConfigIssue::new("network", "block_size and kappa must be positive"));
            }
            if q.len() != *kappa || q.iter().any(|row| row.len() != *kappa) {
                issues.push(ConfigIssue::new("network.q", format!("must be {kappa}x{kappa}")));
            } else {
                for (a, row) in q.iter().enumerate() {
                    for (b, &v) in row.iter().enumerate() {
                        check_probability(&mut issues, &format!("network.q[{a}][{b}]"), v);
                        if v != q[b][a] {
                            issues.push(ConfigIssue::new(format!("network.q[{a}][{b}]"), "matrix must be symmetric"));
                        }
                    }
                }
            }
        }
        NetworkSpec::EdgeList { .. } => {}
    }

    match &cfg.rates {
        RateSpec::Uniform { b, d } => {
            check_range(&mut issues, "rates.b", *b, 0.0, 1.0);
            check_range(&mut issues, "rates.d", *d, 0.0, 1.0);
            if d[1] >= 1.0 {
                issues.push(ConfigIssue::new("rates.d", "healing rates must stay below 1"));
            }
        }
        RateSpec::Activation { p } => check_range(&mut issues, "rates.p", *p, 0.0, 1.0),
        RateSpec::File => {
            if !matches!(cfg.network, NetworkSpec::EdgeList { .. }) {
                issues.push(ConfigIssue::new("rates.kind", "\"file\" requires an edge-list network"));
            }
        }
    }

    match &cfg.seeds {
        SeedSpec::Fixed { vertices, .. } => {
            if vertices.is_empty() {
                issues.push(ConfigIssue::new("seeds.vertices", "must not be empty"));
            }
            let mut sorted = vertices.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                issues.push(ConfigIssue::new("seeds.vertices", "duplicate vertex"));
            }
        }
        SeedSpec::Count { count, .. } => {
            if *count == 0 {
                issues.push(ConfigIssue::new("seeds.count", "must be positive"));
            }
        }
    }
    check_range(&mut issues, "seeds.x0", cfg.seeds.x0(), 0.0, 1.0);
    check_range(&mut issues, "initial.r0", cfg.initial.r0, 0.0, 1.0);
    if cfg.seeds.x0()[1] + cfg.initial.r0[1] > 1.0 {
        issues.push(ConfigIssue::new("initial.r0", "x0 + r0 may exceed 1"));
    }

    let c = &cfg.candidates;
    if !(c.fraction > 0.0 && c.fraction <= 1.0) {
        issues.push(ConfigIssue::new("candidates.fraction", "must be in (0, 1]"));
    }

    if cfg.budgets.is_empty() {
        issues.push(ConfigIssue::new("budgets", "must not be empty"));
    }
    let mut budgets = cfg.budgets.clone();
    budgets.sort_unstable();
    if budgets.windows(2).any(|w| w[0] == w[1]) {
        issues.push(ConfigIssue::new("budgets", "duplicate budget"));
    }

    if cfg.algorithms.is_empty() {
        issues.push(ConfigIssue::new("algorithms", "must not be empty"));
    }
    for (i, a) in cfg.algorithms.iter().enumerate() {
        if cfg.algorithms[..i].contains(a) {
            issues.push(ConfigIssue::new(format!("algorithms[{i}]"), format!("duplicate algorithm {a}")));
        }
        if a.needs_rates() && !cfg.rates.has_rates() {
            issues.push(ConfigIssue::new(
                format!("algorithms[{i}]"),
                format!("{a} needs infection and healing rates (rates.kind = \"uniform\")"),
            ));
        }
        if a.is_ic() && c.directions == Directions::Single {
            issues.push(ConfigIssue::new(
                format!("algorithms[{i}]"),
                format!("{a} deletes whole contacts; incompatible with candidates.directions = \"single\""),
            ));
        }
    }

    if cfg.metrics.is_empty() {
        issues.push(ConfigIssue::new("metrics", "must not be empty"));
    }
    for (i, m) in cfg.metrics.iter().enumerate() {
        if cfg.metrics[..i].contains(m) {
            issues.push(ConfigIssue::new(format!("metrics[{i}]"), format!("duplicate metric {m}")));
        }
        if m.needs_rates() && !cfg.rates.has_rates() {
            issues.push(ConfigIssue::new(
                format!("metrics[{i}]"),
                format!("{m} needs infection and healing rates (rates.kind = \"uniform\")"),
            ));
        }
        if *m == Metric::IcEstimate && c.directions == Directions::Single {
            issues.push(ConfigIssue::new(
                format!("metrics[{i}]"),
                "ic-estimate is undefined for single-direction deletions",
            ));
        }
    }

    let e = &cfg.estimator;
    if !(e.epsilon > 0.0) {
        issues.push(ConfigIssue::new("estimator.epsilon", "must be positive"));
    }
    if e.rounds == Some(0) {
        issues.push(ConfigIssue::new("estimator.rounds", "must be positive"));
    }
    if let Some(d) = e.d_end {
        if !(0.0..1.0).contains(&d) {
            issues.push(ConfigIssue::new("estimator.d_end", "must be in [0, 1)"));
        }
    }
    if cfg.replication.gsir == 0 {
        issues.push(ConfigIssue::new("replication.gsir", "must be positive"));
    }
    issues
}
