//! Capacitated directed networks with a designated source and sink.
//!
//! Nodes are numbered canonically: the source is `0`, the sink is `1`, the
//! ground nodes `V` follow as `2..n+2` and the auxiliary nodes `U` come last.
//! Parallel edges are merged (capacities summed) and self-loops are dropped on
//! construction; neither changes any cut value.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::subset::GroundSubset;

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

/// Edge capacity. `Infinite` is a distinct sentinel, never a large float.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Capacity {
    Finite(f64),
    Infinite,
}

impl Capacity {
    pub const ZERO: Capacity = Capacity::Finite(0.0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Capacity::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Capacity::Finite(c) => Some(c),
            Capacity::Infinite => None,
        }
    }

    /// The capacity as an `f64`, mapping the sentinel to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            Capacity::Finite(c) => c,
            Capacity::Infinite => f64::INFINITY,
        }
    }
}

impl Add for Capacity {
    type Output = Capacity;

    fn add(self, rhs: Capacity) -> Capacity {
        match (self, rhs) {
            (Capacity::Finite(a), Capacity::Finite(b)) => Capacity::Finite(a + b),
            _ => Capacity::Infinite,
        }
    }
}

impl From<f64> for Capacity {
    fn from(c: f64) -> Self {
        if c == f64::INFINITY {
            Capacity::Infinite
        } else {
            Capacity::Finite(c)
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub cap: Capacity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    Source,
    Sink,
    Ground(usize),
    Aux(usize),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GraphError {
    #[error("edge ({tail}, {head}) has invalid capacity {cap}")]
    NegativeCapacity { tail: usize, head: usize, cap: f64 },
    #[error("edge endpoint {node} is not a node of a {node_count}-node network")]
    DanglingEndpoint { node: usize, node_count: usize },
    #[error("weight {index} is negative or not finite ({weight})")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("expected {expected} per-ground values, got {got}")]
    WeightLength { expected: usize, got: usize },
    #[error("ground element {index} is forced to both terminals")]
    OverlappingForcedSets { index: usize },
    #[error("ground index {index} out of range for n = {n}")]
    GroundIndexOutOfRange { index: usize, n: usize },
    #[error("malformed problem line: {0}")]
    MalformedHeader(String),
    #[error("line {line}: unknown line type {text:?}")]
    UnknownLineType { line: usize, text: String },
    #[error("line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("missing {0} terminal declaration")]
    MissingTerminal(&'static str),
}

/// A validated network. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowNetwork {
    n_ground: usize,
    n_aux: usize,
    edges: Vec<Edge>,
}

impl FlowNetwork {
    /// Builds a network over canonical node ids, merging parallel edges and
    /// dropping self-loops.
    pub fn build<I, C>(n_ground: usize, n_aux: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, C)>,
        C: Into<Capacity>,
    {
        let node_count = 2 + n_ground + n_aux;
        let mut merged: BTreeMap<(usize, usize), Capacity> = BTreeMap::new();
        for (tail, head, cap) in edges {
            let cap = cap.into();
            for node in [tail, head] {
                if node >= node_count {
                    return Err(GraphError::DanglingEndpoint { node, node_count });
                }
            }
            if let Capacity::Finite(c) = cap {
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(GraphError::NegativeCapacity { tail, head, cap: c });
                }
            }
            if tail == head {
                continue;
            }
            let slot = merged.entry((tail, head)).or_insert(Capacity::ZERO);
            *slot = *slot + cap;
        }
        let edges = merged
            .into_iter()
            .map(|((tail, head), cap)| Edge { tail, head, cap })
            .collect();
        Ok(Self {
            n_ground,
            n_aux,
            edges,
        })
    }

    pub fn n_ground(&self) -> usize {
        self.n_ground
    }

    pub fn n_aux(&self) -> usize {
        self.n_aux
    }

    pub fn node_count(&self) -> usize {
        2 + self.n_ground + self.n_aux
    }

    pub fn ground_node(&self, i: usize) -> usize {
        debug_assert!(i < self.n_ground);
        2 + i
    }

    pub fn aux_node(&self, j: usize) -> usize {
        debug_assert!(j < self.n_aux);
        2 + self.n_ground + j
    }

    pub fn role(&self, node: usize) -> NodeRole {
        match node {
            SOURCE => NodeRole::Source,
            SINK => NodeRole::Sink,
            v if v < 2 + self.n_ground => NodeRole::Ground(v - 2),
            v => NodeRole::Aux(v - 2 - self.n_ground),
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn max_finite_capacity(&self) -> f64 {
        self.edges
            .iter()
            .filter_map(|e| e.cap.finite())
            .fold(0.0, f64::max)
    }

    /// True when every finite capacity is an integer of safe magnitude.
    pub fn is_integral(&self) -> bool {
        self.edges
            .iter()
            .filter_map(|e| e.cap.finite())
            .all(crate::is_integral)
    }

    fn with_extra_edges<I>(&self, extra: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, Capacity)>,
    {
        let existing = self.edges.iter().map(|e| (e.tail, e.head, e.cap));
        Self::build(self.n_ground, self.n_aux, existing.chain(extra))
    }

    fn check_weights(&self, weights: &[f64]) -> Result<(), GraphError> {
        if weights.len() != self.n_ground {
            return Err(GraphError::WeightLength {
                expected: self.n_ground,
                got: weights.len(),
            });
        }
        match weights.iter().position(|w| !(*w >= 0.0) || !w.is_finite()) {
            Some(index) => Err(GraphError::NegativeWeight {
                index,
                weight: weights[index],
            }),
            None => Ok(()),
        }
    }

    /// Adds `(s, i)` with capacity `weights[i]` for every ground node.
    pub fn add_source_adjacent(&self, weights: &[f64]) -> Result<Self, GraphError> {
        self.check_weights(weights)?;
        self.with_extra_edges(
            weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(i, &w)| (SOURCE, 2 + i, Capacity::Finite(w))),
        )
    }

    /// Adds `(i, t)` with capacity `weights[i]` for every ground node.
    pub fn add_sink_adjacent(&self, weights: &[f64]) -> Result<Self, GraphError> {
        self.check_weights(weights)?;
        self.with_extra_edges(
            weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(i, &w)| (2 + i, SINK, Capacity::Finite(w))),
        )
    }

    /// Ties `force_source` to `s` and `force_sink` to `t` with infinite edges,
    /// so every finite cut respects the assignment.
    pub fn contract(
        &self,
        force_source: &GroundSubset,
        force_sink: &GroundSubset,
    ) -> Result<Self, GraphError> {
        for set in [force_source, force_sink] {
            if set.bound() > self.n_ground {
                return Err(GraphError::GroundIndexOutOfRange {
                    index: set.bound() - 1,
                    n: self.n_ground,
                });
            }
        }
        if let Some(index) = force_source.iter().find(|&i| force_sink.contains(i)) {
            return Err(GraphError::OverlappingForcedSets { index });
        }
        let to_source = force_source
            .iter()
            .map(|i| (SOURCE, 2 + i, Capacity::Infinite));
        let to_sink = force_sink.iter().map(|i| (2 + i, SINK, Capacity::Infinite));
        self.with_extra_edges(to_source.chain(to_sink))
    }

    /// Capacity of the edges leaving `{s} ∪ side`, where `side[v]` marks
    /// source-side nodes (entries for `s` and `t` are ignored).
    pub fn cut_capacity(&self, side: &[bool]) -> Capacity {
        let on_source = |v: usize| v == SOURCE || (v != SINK && side[v]);
        self.edges
            .iter()
            .filter(|e| on_source(e.tail) && !on_source(e.head))
            .fold(Capacity::ZERO, |acc, e| acc + e.cap)
    }

    /// Renders the network in extended DIMACS max-flow format with canonical
    /// numbering (`s = 1`, `t = 2`, ground and aux nodes after).
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p max {} {}", self.node_count(), self.edges.len());
        let _ = writeln!(out, "n 1 s");
        let _ = writeln!(out, "n 2 t");
        for i in 0..self.n_ground {
            let _ = writeln!(out, "c ground {}", 3 + i);
        }
        for j in 0..self.n_aux {
            let _ = writeln!(out, "c aux {}", 3 + self.n_ground + j);
        }
        for e in &self.edges {
            let _ = writeln!(out, "a {} {} {}", e.tail + 1, e.head + 1, e.cap);
        }
        out
    }

    /// Parses DIMACS max-flow text. Non-terminal nodes are ground nodes unless
    /// tagged by a `c aux <id>` directive; `c ground <id>` is accepted too.
    /// Capacities may be written as `inf`.
    pub fn parse_dimacs(text: &str) -> Result<Self, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut source = None;
        let mut sink = None;
        let mut aux_tagged = Vec::new();
        let mut ground_tagged = Vec::new();
        let mut arcs = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let tokens: Vec<&str> = raw.split_whitespace().collect();
            let malformed = |msg: &str| GraphError::MalformedLine {
                line: line_no,
                msg: msg.to_string(),
            };
            let Some(&kind) = tokens.first() else {
                continue;
            };
            match kind {
                "c" => match tokens.get(1).copied() {
                    Some(tag @ ("ground" | "aux")) => {
                        let id = parse_id(tokens.get(2), line_no)?;
                        if tag == "aux" {
                            aux_tagged.push((id, line_no));
                        } else {
                            ground_tagged.push((id, line_no));
                        }
                    }
                    _ => {}
                },
                "p" => {
                    if header.is_some() {
                        return Err(GraphError::MalformedHeader(format!(
                            "duplicate problem line at line {line_no}"
                        )));
                    }
                    if tokens.len() != 4 || tokens[1] != "max" {
                        return Err(GraphError::MalformedHeader(raw.trim().to_string()));
                    }
                    let nodes = tokens[2].parse::<usize>();
                    let arcs = tokens[3].parse::<usize>();
                    match (nodes, arcs) {
                        (Ok(n), Ok(m)) if n >= 2 => header = Some((n, m)),
                        _ => return Err(GraphError::MalformedHeader(raw.trim().to_string())),
                    }
                }
                "n" => {
                    if header.is_none() {
                        return Err(GraphError::MalformedHeader(
                            "node descriptor before problem line".into(),
                        ));
                    }
                    let id = parse_id(tokens.get(1), line_no)?;
                    match tokens.get(2).copied() {
                        Some("s") if tokens.len() == 3 => source = Some(id),
                        Some("t") if tokens.len() == 3 => sink = Some(id),
                        _ => return Err(malformed("expected `n <id> s|t`")),
                    }
                }
                "a" => {
                    if header.is_none() {
                        return Err(GraphError::MalformedHeader(
                            "arc descriptor before problem line".into(),
                        ));
                    }
                    if tokens.len() != 4 {
                        return Err(malformed("expected `a <tail> <head> <capacity>`"));
                    }
                    let tail = parse_id(tokens.get(1), line_no)?;
                    let head = parse_id(tokens.get(2), line_no)?;
                    let cap = parse_capacity(tokens[3])
                        .ok_or_else(|| malformed(&format!("bad capacity {:?}", tokens[3])))?;
                    arcs.push((tail, head, cap));
                }
                other => {
                    return Err(GraphError::UnknownLineType {
                        line: line_no,
                        text: other.to_string(),
                    })
                }
            }
        }

        let (node_total, arc_total) =
            header.ok_or_else(|| GraphError::MalformedHeader("missing problem line".into()))?;
        if arcs.len() != arc_total {
            return Err(GraphError::MalformedHeader(format!(
                "problem line declares {arc_total} arcs, found {}",
                arcs.len()
            )));
        }
        let source = source.ok_or(GraphError::MissingTerminal("source"))?;
        let sink = sink.ok_or(GraphError::MissingTerminal("sink"))?;
        if source == sink {
            return Err(GraphError::MalformedHeader(
                "source and sink are the same node".into(),
            ));
        }
        let check = |id: usize| {
            if id == 0 || id > node_total {
                Err(GraphError::DanglingEndpoint {
                    node: id,
                    node_count: node_total,
                })
            } else {
                Ok(())
            }
        };
        check(source)?;
        check(sink)?;

        let mut is_aux = vec![false; node_total + 1];
        for &(id, line) in &aux_tagged {
            check(id)?;
            if id == source || id == sink {
                return Err(GraphError::MalformedLine {
                    line,
                    msg: "terminal tagged as auxiliary".into(),
                });
            }
            is_aux[id] = true;
        }
        for &(id, line) in &ground_tagged {
            check(id)?;
            if id == source || id == sink || is_aux[id] {
                return Err(GraphError::MalformedLine {
                    line,
                    msg: format!("node {id} cannot be tagged ground"),
                });
            }
        }

        let mut canonical = vec![usize::MAX; node_total + 1];
        canonical[source] = SOURCE;
        canonical[sink] = SINK;
        let mut next = 2;
        for id in 1..=node_total {
            if id != source && id != sink && !is_aux[id] {
                canonical[id] = next;
                next += 1;
            }
        }
        let n_ground = next - 2;
        for id in 1..=node_total {
            if is_aux[id] {
                canonical[id] = next;
                next += 1;
            }
        }
        let n_aux = next - 2 - n_ground;

        let mut edges = Vec::with_capacity(arcs.len());
        for (tail, head, cap) in arcs {
            check(tail)?;
            check(head)?;
            edges.push((canonical[tail], canonical[head], cap));
        }
        Self::build(n_ground, n_aux, edges)
    }
}

fn parse_id(token: Option<&&str>, line: usize) -> Result<usize, GraphError> {
    token
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| GraphError::MalformedLine {
            line,
            msg: "expected a node id".into(),
        })
}

fn parse_capacity(token: &str) -> Option<Capacity> {
    match token.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Some(Capacity::Infinite),
        t => t.parse::<f64>().ok().filter(|c| c.is_finite()).map(Capacity::Finite),
    }
}

/// The source side of an s-t cut, minus `s` itself.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSide {
    members: Vec<usize>,
}

impl CutSide {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = members
            .into_iter()
            .filter(|&v| v != SOURCE && v != SINK)
            .collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, node: usize) -> bool {
        self.members.binary_search(&node).is_ok()
    }

    pub fn to_mask(&self, node_count: usize) -> Vec<bool> {
        let mut mask = vec![false; node_count];
        mask[SOURCE] = true;
        for &v in &self.members {
            mask[v] = true;
        }
        mask
    }

    /// Ground members, as 0-based ground indices.
    pub fn ground(&self, net: &FlowNetwork) -> GroundSubset {
        self.members
            .iter()
            .filter_map(|&v| match net.role(v) {
                NodeRole::Ground(i) => Some(i),
                _ => None,
            })
            .collect()
    }

    /// Auxiliary members, as 0-based aux indices.
    pub fn aux(&self, net: &FlowNetwork) -> Vec<usize> {
        self.members
            .iter()
            .filter_map(|&v| match net.role(v) {
                NodeRole::Aux(j) => Some(j),
                _ => None,
            })
            .collect()
    }
}
