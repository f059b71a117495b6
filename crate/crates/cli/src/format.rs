//! Problem and result file formats. Ground elements, groups and cut sides
//! are numbered from 1 in every file.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use subflow_core::apps::Regularizer;
use subflow_core::graph::{Capacity, FlowNetwork, SINK, SOURCE};
use subflow_core::{ArithMode, ObjectiveVariant, SubmodularSpec};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub problem: Problem,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum Problem {
    Maxflow(MaxflowPayload),
    Solve(SolvePayload),
    Prox(ProxPayload),
    Densest(DensestPayload),
    Minratio(MinratioPayload),
    Regress(RegressPayload),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Maxflow(_) => "maxflow",
            Problem::Solve(_) => "solve",
            Problem::Prox(_) => "prox",
            Problem::Densest(_) => "densest",
            Problem::Minratio(_) => "minratio",
            Problem::Regress(_) => "regress",
        }
    }
}

/// A capacity: a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CapValue {
    Finite(f64),
    Named(Infinite),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub enum Infinite {
    #[serde(rename = "inf")]
    Inf,
}

impl From<CapValue> for Capacity {
    fn from(c: CapValue) -> Self {
        match c {
            CapValue::Finite(v) => Capacity::Finite(v),
            CapValue::Named(_) => Capacity::Infinite,
        }
    }
}

/// A network with nodes labelled `"s"`, `"t"`, `"g1"`.. (ground) and
/// `"a1"`.. (auxiliary), or DIMACS text.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NetworkSpec {
    Inline {
        n_ground: usize,
        #[serde(default)]
        n_aux: usize,
        edges: Vec<(String, String, CapValue)>,
    },
    Dimacs {
        text: String,
    },
}

fn node_index(label: &str, n_ground: usize, n_aux: usize) -> Result<usize, CliError> {
    let bad = || CliError::Input(format!("unknown node label {label:?}"));
    match label {
        "s" => Ok(SOURCE),
        "t" => Ok(SINK),
        _ => {
            let (kind, rest) = label.split_at(1);
            let k: usize = rest.parse().map_err(|_| bad())?;
            match kind {
                "g" if (1..=n_ground).contains(&k) => Ok(1 + k),
                "a" if (1..=n_aux).contains(&k) => Ok(1 + n_ground + k),
                _ => Err(bad()),
            }
        }
    }
}

impl NetworkSpec {
    pub fn build(&self) -> Result<FlowNetwork, CliError> {
        match self {
            NetworkSpec::Inline {
                n_ground,
                n_aux,
                edges,
            } => {
                let mut list = Vec::with_capacity(edges.len());
                for (u, v, c) in edges {
                    list.push((
                        node_index(u, *n_ground, *n_aux)?,
                        node_index(v, *n_ground, *n_aux)?,
                        Capacity::from(*c),
                    ));
                }
                FlowNetwork::build(*n_ground, *n_aux, list).map_err(|e| CliError::Input(e.to_string()))
            }
            NetworkSpec::Dimacs { text } => {
                FlowNetwork::parse_dimacs(text).map_err(|e| CliError::Input(e.to_string()))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// raw values indexed by bitmask (bit `i - 1` for element `i`)
    Table { n: usize, values: Vec<f64> },
    /// generalized graph cut function plus an optional modular shift
    Network {
        network: NetworkSpec,
        #[serde(default)]
        shift: Option<Vec<f64>>,
    },
    TransformedCut {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
        #[serde(default)]
        a: Option<Vec<f64>>,
    },
    Decomposable {
        d: Vec<f64>,
        w: Vec<Vec<f64>>,
        y: Vec<f64>,
    },
    NegatedDensity {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
}

fn zero_based(edges: &[(usize, usize, f64)], n: usize) -> Result<Vec<(usize, usize, f64)>, CliError> {
    edges
        .iter()
        .map(|&(i, j, c)| {
            if i == 0 || j == 0 || i > n || j > n {
                Err(CliError::Input(format!("edge ({i}, {j}) outside 1..={n}")))
            } else {
                Ok((i - 1, j - 1, c))
            }
        })
        .collect()
}

fn input<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Input(e.to_string()))
}

impl FunctionSpec {
    pub fn build(&self) -> Result<SubmodularSpec, CliError> {
        match self {
            FunctionSpec::Table { n, values } => input(SubmodularSpec::from_table(*n, values.clone())),
            FunctionSpec::Network { network, shift } => {
                let net = network.build()?;
                let a = shift.clone().unwrap_or_else(|| vec![0.0; net.n_ground()]);
                input(SubmodularSpec::generalized_cut_with_shift(net, a))
            }
            FunctionSpec::TransformedCut { n, edges, a } => {
                let a = a.clone().unwrap_or_else(|| vec![0.0; *n]);
                input(SubmodularSpec::from_transformed_cut(*n, &zero_based(edges, *n)?, &a))
            }
            FunctionSpec::Decomposable { d, w, y } => input(SubmodularSpec::from_decomposable(d, w, y)),
            FunctionSpec::NegatedDensity { n, edges } => {
                input(SubmodularSpec::from_negated_density(*n, &zero_based(edges, *n)?))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CutChoice {
    Maximal,
    Minimal,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxflowPayload {
    pub network: NetworkSpec,
    #[serde(default)]
    pub cut: Option<CutChoice>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantSpec {
    Quadratic,
    Power(f64),
    Log,
    Kl,
}

impl VariantSpec {
    pub fn variant(&self) -> ObjectiveVariant {
        match self {
            VariantSpec::Quadratic => ObjectiveVariant::QuadraticOverB,
            VariantSpec::Power(p) => ObjectiveVariant::PowerP(*p),
            VariantSpec::Log => ObjectiveVariant::LogBarrier,
            VariantSpec::Kl => ObjectiveVariant::Kl,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    #[default]
    Auto,
    Float,
    Exact,
}

impl From<ModeSpec> for ArithMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Auto => ArithMode::Auto,
            ModeSpec::Float => ArithMode::Float,
            ModeSpec::Exact => ArithMode::Exact,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolvePayload {
    pub function: FunctionSpec,
    /// defaults to all ones
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub variant: Option<VariantSpec>,
    #[serde(default)]
    pub mode: ModeSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RegularizerSpec {
    Fused {
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    GroupLinf {
        groups: Vec<Vec<usize>>,
        weights: Vec<f64>,
    },
    GraphCut {
        function: FunctionSpec,
    },
}

impl RegularizerSpec {
    pub fn build(&self) -> Result<Regularizer, CliError> {
        Ok(match self {
            RegularizerSpec::Fused { weights } => Regularizer::Fused {
                weights: weights.clone(),
            },
            RegularizerSpec::GroupLinf { groups, weights } => {
                let mut zero = Vec::with_capacity(groups.len());
                for (g, members) in groups.iter().enumerate() {
                    if members.contains(&0) {
                        return Err(CliError::Input(format!("group {} contains element 0", g + 1)));
                    }
                    zero.push(members.iter().map(|i| i - 1).collect());
                }
                Regularizer::GroupLinf {
                    groups: zero,
                    weights: weights.clone(),
                }
            }
            RegularizerSpec::GraphCut { function } => Regularizer::GraphCut(function.build()?),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxPayload {
    pub s: Vec<f64>,
    pub lambda: f64,
    pub regularizer: RegularizerSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensestPayload {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl DensestPayload {
    pub fn zero_based_edges(&self) -> Result<Vec<(usize, usize, f64)>, CliError> {
        zero_based(&self.edges, self.n)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinratioPayload {
    pub function: FunctionSpec,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSpec {
    /// explicit rows and targets
    Inline {
        design: Vec<Vec<f64>>,
        targets: Vec<f64>,
    },
    /// headerless CSV files, relative to the problem file
    Csv { design: String, targets: String },
    /// synthetic fused data drawn from the problem seed
    Fused {
        n: usize,
        rows: usize,
        k: usize,
        sigma: f64,
    },
    /// synthetic group data drawn from the problem seed
    Group {
        n: usize,
        rows: usize,
        n_groups: usize,
        #[serde(default = "default_group_size")]
        group_size: usize,
        #[serde(default)]
        stride: Option<usize>,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
}

fn default_group_size() -> usize {
    15
}

fn default_sigma() -> f64 {
    0.1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressPayload {
    pub data: DataSpec,
    pub lambda: f64,
    /// ignored for group data, which brings its own groups
    #[serde(default)]
    pub regularizer: Option<RegularizerSpec>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub tool: String,
    pub tool_version: String,
    pub format_version: u32,
    pub kind: String,
    pub config_hash: String,
    pub outputs: Value,
    pub timings: Timings,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    pub wall_seconds: f64,
}

impl ResultFile {
    pub fn new(kind: &str, config_hash: String, outputs: Value, wall_seconds: f64) -> Self {
        Self {
            tool: "subflow".into(),
            tool_version: TOOL_VERSION.into(),
            format_version: FORMAT_VERSION,
            kind: kind.into(),
            config_hash,
            outputs,
            timings: Timings { wall_seconds },
        }
    }

    /// Checks the fields every result carries plus the per-kind outputs.
    pub fn validate(&self) -> Result<(), String> {
        if self.tool != "subflow" {
            return Err(format!("tool is {:?}", self.tool));
        }
        if self.format_version != FORMAT_VERSION {
            return Err(format!("format version {} is not {FORMAT_VERSION}", self.format_version));
        }
        if self.config_hash.len() != 64 || !self.config_hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err("config_hash is not a sha256 hex digest".into());
        }
        let required: &[&str] = match self.kind.as_str() {
            "maxflow" => &["value", "cut", "side", "aux_side", "edge_flows"],
            "solve" => &["chain", "breakpoints", "f_values", "x", "blocks", "minimization_count"],
            "prox" => &["beta", "minimization_count"],
            "densest" => &["levels", "minimization_count"],
            "minratio" => &["ratio", "set", "minimization_count"],
            "regress" => &["beta", "history", "iterations", "converged"],
            other => return Err(format!("unknown kind {other:?}")),
        };
        let outputs = self.outputs.as_object().ok_or("outputs is not an object")?;
        for key in required {
            if !outputs.contains_key(*key) {
                return Err(format!("{} result lacks {key:?}", self.kind));
            }
        }
        Ok(())
    }
}

/// sha256 over the canonical (key-sorted, compact) JSON form.
pub fn config_hash(value: &Value) -> String {
    let canonical = serde_json::to_string(value).expect("values serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Hash of raw text inputs such as DIMACS files.
pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn parse_problem(text: &str) -> Result<(ProblemFile, String), CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid JSON: {e}")))?;
    let hash = config_hash(&value);
    let problem: ProblemFile = serde_json::from_value(value)
        .map_err(|e| CliError::Input(format!("invalid problem file: {e}")))?;
    if problem.version != FORMAT_VERSION {
        return Err(CliError::Input(format!(
            "unsupported problem version {} (expected {FORMAT_VERSION})",
            problem.version
        )));
    }
    Ok((problem, hash))
}
