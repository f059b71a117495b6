//! Graph-backed submodular set functions.
//!
//! A [`SubmodularSpec`] represents `f(S) = γ(S) + a(S) - offset`, where `γ` is
//! the generalized graph cut function of a network (minimum over auxiliary
//! subsets `W` of the capacity leaving `{s} ∪ S ∪ W`), `a` is a modular shift
//! and `offset = γ(∅) + a(∅)` normalizes `f(∅) = 0`.
//!
//! Small table-backed functions are supported for testing and for worked
//! examples; every algorithm that needs them enumerates subsets.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Capacity, FlowNetwork, GraphError, NodeRole, SINK, SOURCE};
use crate::maxflow::{self, CutKind, FlowError};
use crate::subset::GroundSubset;
use crate::values_equal;

/// Enumeration limit for tables and brute-force minimization.
pub const MAX_ENUM_N: usize = 20;
/// Enumeration limit for the pairwise submodularity check.
pub const MAX_CHECK_N: usize = 12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SubmodularError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("expected {expected} per-ground values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("ground index {index} out of range for n = {n}")]
    NotInGroundSet { index: usize, n: usize },
    #[error("ground set of size {n} exceeds the enumeration limit {limit}")]
    GroundSetTooLarge { n: usize, limit: usize },
    #[error("threshold y[{index}] = {value} must be positive")]
    NonPositiveThreshold { index: usize, value: f64 },
    #[error("d[{index}] = {value} must be positive")]
    NonPositiveD { index: usize, value: f64 },
    #[error("b[{index}] = {value} must be positive and finite")]
    NonPositiveB { index: usize, value: f64 },
    #[error("{what} must be finite")]
    NonFinite { what: &'static str },
    #[error("{0}")]
    InvalidStructure(String),
}

type Result<T> = std::result::Result<T, SubmodularError>;

#[derive(Clone, Debug)]
struct GraphFn {
    net: FlowNetwork,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl GraphFn {
    fn new(net: FlowNetwork) -> Self {
        let mut out_edges = vec![Vec::new(); net.node_count()];
        let mut in_edges = vec![Vec::new(); net.node_count()];
        for (k, e) in net.edges().iter().enumerate() {
            out_edges[e.tail].push(k);
            in_edges[e.head].push(k);
        }
        Self {
            net,
            out_edges,
            in_edges,
        }
    }

    /// γ(S) for the ground subset marked in `mask`.
    fn gamma(&self, mask: &[bool]) -> Result<f64> {
        let net = &self.net;
        if net.n_aux() == 0 {
            let mut side = vec![false; net.node_count()];
            for (i, &m) in mask.iter().enumerate() {
                side[2 + i] = m;
            }
            return net
                .cut_capacity(&side)
                .finite()
                .ok_or(SubmodularError::Flow(FlowError::NoFiniteCut));
        }
        // ground nodes are fixed by S: only the auxiliary core is free
        let map = |v: usize| -> usize {
            match net.role(v) {
                NodeRole::Source => SOURCE,
                NodeRole::Sink => SINK,
                NodeRole::Ground(i) => {
                    if mask[i] {
                        SOURCE
                    } else {
                        SINK
                    }
                }
                NodeRole::Aux(j) => 2 + j,
            }
        };
        let mut constant = Capacity::ZERO;
        let mut core = Vec::new();
        for e in net.edges() {
            let (u, v) = (map(e.tail), map(e.head));
            if u == v || v == SOURCE || u == SINK {
                continue;
            }
            if u == SOURCE && v == SINK {
                constant = constant + e.cap;
            } else {
                core.push((u, v, e.cap));
            }
        }
        let Capacity::Finite(constant) = constant else {
            return Err(FlowError::NoFiniteCut.into());
        };
        let core = FlowNetwork::build(0, net.n_aux(), core)?;
        Ok(constant + maxflow::max_flow(&core)?.value)
    }
}

#[derive(Clone, Debug)]
enum Structure {
    Graph(Arc<GraphFn>),
    Table { n: usize, values: Arc<Vec<f64>> },
}

/// `f(S) = γ(S) + a(S) - offset` with `f(∅) = 0`.
#[derive(Clone, Debug)]
pub struct SubmodularSpec {
    structure: Structure,
    modular_shift: Vec<f64>,
    offset: f64,
}

/// Result of exhaustive minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceMin {
    pub value: f64,
    pub minimal: GroundSubset,
    pub maximal: GroundSubset,
}

/// Where a ground node sits relative to the set being evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Placement {
    /// already in the set before the increment
    Below,
    /// added by the increment
    Added,
    /// outside the set
    Above,
}

impl SubmodularSpec {
    fn from_structure(structure: Structure, modular_shift: Vec<f64>) -> Result<Self> {
        let n = match &structure {
            Structure::Graph(g) => g.net.n_ground(),
            Structure::Table { n, .. } => *n,
        };
        if modular_shift.len() != n {
            return Err(SubmodularError::LengthMismatch {
                expected: n,
                got: modular_shift.len(),
            });
        }
        if modular_shift.iter().any(|a| !a.is_finite()) {
            return Err(SubmodularError::NonFinite {
                what: "modular shift",
            });
        }
        let mut spec = Self {
            structure,
            modular_shift,
            offset: 0.0,
        };
        spec.offset = spec.raw_value(&vec![false; n])?;
        Ok(spec)
    }

    /// The generalized graph cut function of `net`.
    pub fn generalized_cut(net: FlowNetwork) -> Result<Self> {
        let n = net.n_ground();
        Self::generalized_cut_with_shift(net, vec![0.0; n])
    }

    /// `γ + a` for the generalized graph cut function `γ` of `net`.
    pub fn generalized_cut_with_shift(net: FlowNetwork, a: Vec<f64>) -> Result<Self> {
        Self::from_structure(Structure::Graph(Arc::new(GraphFn::new(net))), a)
    }

    /// `κ + a` for the cut function `κ` of a directed graph on the ground set,
    /// realized as the s-t cut function of the augmented graph that routes
    /// positive `a_i` to the sink and negative `a_i` from the source.
    pub fn from_transformed_cut(n: usize, edges: &[(usize, usize, f64)], a: &[f64]) -> Result<Self> {
        if a.len() != n {
            return Err(SubmodularError::LengthMismatch {
                expected: n,
                got: a.len(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(SubmodularError::NonFinite { what: "a" });
        }
        let mut all = Vec::with_capacity(edges.len() + n);
        for &(i, j, c) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(SubmodularError::NotInGroundSet { index, n });
                }
            }
            all.push((2 + i, 2 + j, c));
        }
        for (i, &ai) in a.iter().enumerate() {
            if ai > 0.0 {
                all.push((2 + i, SINK, ai));
            } else if ai < 0.0 {
                all.push((SOURCE, 2 + i, -ai));
            }
        }
        Self::generalized_cut(FlowNetwork::build(n, 0, all)?)
    }

    /// `τ(S) = -d(S) + Σ_j min{y_j, w^j(S)}` via one auxiliary node per term.
    pub fn from_decomposable(d: &[f64], w: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let n = d.len();
        let k = y.len();
        if w.len() != k {
            return Err(SubmodularError::LengthMismatch {
                expected: k,
                got: w.len(),
            });
        }
        if let Some(index) = d.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(SubmodularError::NonPositiveD {
                index,
                value: d[index],
            });
        }
        if let Some(index) = y.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(SubmodularError::NonPositiveThreshold {
                index,
                value: y[index],
            });
        }
        let mut edges = Vec::with_capacity(n + n * k + k);
        for (i, &di) in d.iter().enumerate() {
            edges.push((SOURCE, 2 + i, di));
        }
        for (j, wj) in w.iter().enumerate() {
            if wj.len() != n {
                return Err(SubmodularError::LengthMismatch {
                    expected: n,
                    got: wj.len(),
                });
            }
            for (i, &wij) in wj.iter().enumerate() {
                edges.push((2 + i, 2 + n + j, wij));
            }
            edges.push((2 + n + j, SINK, y[j]));
        }
        Self::generalized_cut(FlowNetwork::build(n, k, edges)?)
    }

    /// `-θ`, where `θ(S)` is the total weight of the subgraph induced by `S`
    /// in an undirected graph: `-θ = κ̄/2 - m/2` with `m` the weighted degrees.
    pub fn from_negated_density(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut directed = Vec::with_capacity(2 * edges.len());
        let mut a = vec![0.0; n];
        for &(i, j, c) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(SubmodularError::NotInGroundSet { index, n });
                }
            }
            if !(c >= 0.0) || !c.is_finite() {
                return Err(GraphError::NegativeCapacity {
                    tail: i,
                    head: j,
                    cap: c,
                }
                .into());
            }
            if i == j {
                a[i] -= c;
                continue;
            }
            directed.push((i, j, c / 2.0));
            directed.push((j, i, c / 2.0));
            a[i] -= c / 2.0;
            a[j] -= c / 2.0;
        }
        Self::from_transformed_cut(n, &directed, &a)
    }

    /// A raw value table indexed by subset bitmask, `values[0]` being `f(∅)`
    /// before normalization.
    pub fn from_table(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_ENUM_N {
            return Err(SubmodularError::GroundSetTooLarge {
                n,
                limit: MAX_ENUM_N,
            });
        }
        if values.len() != 1 << n {
            return Err(SubmodularError::LengthMismatch {
                expected: 1 << n,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SubmodularError::NonFinite {
                what: "table values",
            });
        }
        Self::from_structure(
            Structure::Table {
                n,
                values: Arc::new(values),
            },
            vec![0.0; n],
        )
    }

    pub fn n(&self) -> usize {
        self.modular_shift.len()
    }

    /// The generating network, or `None` for table-backed functions.
    pub fn network(&self) -> Option<&FlowNetwork> {
        match &self.structure {
            Structure::Graph(g) => Some(&g.net),
            Structure::Table { .. } => None,
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self.structure, Structure::Table { .. })
    }

    pub(crate) fn has_aux(&self) -> bool {
        match &self.structure {
            Structure::Graph(g) => g.net.n_aux() > 0,
            Structure::Table { .. } => false,
        }
    }

    pub fn modular_shift(&self) -> &[f64] {
        &self.modular_shift
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// True when capacities, shifts and offset are all integers.
    pub fn is_integral(&self) -> bool {
        let base = match &self.structure {
            Structure::Graph(g) => g.net.is_integral(),
            Structure::Table { values, .. } => values.iter().copied().all(crate::is_integral),
        };
        base && crate::is_integral(self.offset)
            && self.modular_shift.iter().copied().all(crate::is_integral)
    }

    /// `f + delta` as a new spec sharing the same structure. The offset is
    /// unchanged since a modular shift vanishes on the empty set.
    pub fn with_modular_shift(&self, delta: &[f64]) -> Result<Self> {
        if delta.len() != self.n() {
            return Err(SubmodularError::LengthMismatch {
                expected: self.n(),
                got: delta.len(),
            });
        }
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(SubmodularError::NonFinite {
                what: "modular shift",
            });
        }
        let mut spec = self.clone();
        for (a, d) in spec.modular_shift.iter_mut().zip(delta) {
            *a += d;
        }
        Ok(spec)
    }

    fn raw_value(&self, mask: &[bool]) -> Result<f64> {
        let base = match &self.structure {
            Structure::Graph(g) => g.gamma(mask)?,
            Structure::Table { values, .. } => {
                let bits = mask
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (i, &m)| acc | (m as usize) << i);
                values[bits]
            }
        };
        let shift: f64 = mask
            .iter()
            .zip(&self.modular_shift)
            .filter(|(m, _)| **m)
            .map(|(_, a)| a)
            .sum();
        Ok(base + shift)
    }

    pub fn evaluate_mask(&self, mask: &[bool]) -> Result<f64> {
        if mask.len() != self.n() {
            return Err(SubmodularError::LengthMismatch {
                expected: self.n(),
                got: mask.len(),
            });
        }
        Ok(self.raw_value(mask)? - self.offset)
    }

    pub fn evaluate(&self, set: &GroundSubset) -> Result<f64> {
        self.check_subset(set)?;
        self.evaluate_mask(&set.to_mask(self.n()))
    }

    fn check_subset(&self, set: &GroundSubset) -> Result<()> {
        if set.bound() > self.n() {
            return Err(SubmodularError::NotInGroundSet {
                index: set.bound() - 1,
                n: self.n(),
            });
        }
        Ok(())
    }

    /// Evaluates `f(S)` by solving a min cut on the network with `S` tied to
    /// the source and `V \ S` tied to the sink.
    pub fn evaluate_via_contraction(&self, set: &GroundSubset) -> Result<f64> {
        self.check_subset(set)?;
        let gamma = match &self.structure {
            Structure::Graph(g) => {
                let forced = g.net.contract(set, &set.complement(self.n()))?;
                maxflow::max_flow(&forced)?.value
            }
            Structure::Table { values, .. } => values[set.to_bits() as usize],
        };
        Ok(gamma + set.weight(&self.modular_shift) - self.offset)
    }

    /// `f(Below ∪ Added) - f(Below)` for graph-backed functions without
    /// auxiliary nodes, touching only edges incident to the added nodes.
    pub(crate) fn cut_increment(
        &self,
        added: &[usize],
        place: impl Fn(usize) -> Placement,
    ) -> Result<f64> {
        let Structure::Graph(g) = &self.structure else {
            unreachable!("cut_increment needs a graph-backed function");
        };
        debug_assert_eq!(g.net.n_aux(), 0);
        let in_after = |v: usize| -> bool {
            match v {
                SOURCE => true,
                SINK => false,
                v => place(v - 2) != Placement::Above,
            }
        };
        let in_before = |v: usize| -> bool {
            match v {
                SOURCE => true,
                SINK => false,
                v => place(v - 2) == Placement::Below,
            }
        };
        let edges = g.net.edges();
        let mut gained = Capacity::ZERO;
        let mut lost = Capacity::ZERO;
        let mut shift = 0.0;
        for &i in added {
            let v = 2 + i;
            for &k in &g.out_edges[v] {
                if !in_after(edges[k].head) {
                    gained = gained + edges[k].cap;
                }
            }
            for &k in &g.in_edges[v] {
                if in_before(edges[k].tail) {
                    lost = lost + edges[k].cap;
                }
            }
            shift += self.modular_shift[i];
        }
        match (gained, lost) {
            (Capacity::Finite(g), Capacity::Finite(l)) => Ok(g - l + shift),
            _ => Err(FlowError::NoFiniteCut.into()),
        }
    }

    /// Values of `f` along the prefixes of `order`: entry `k` is
    /// `f(order[..k+1]) - f(order[..k])`.
    pub fn greedy_vertex(&self, order: &[usize]) -> Result<Vec<f64>> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &i in order {
            if i >= n {
                return Err(SubmodularError::NotInGroundSet { index: i, n });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(SubmodularError::InvalidStructure(format!(
                    "index {i} repeated in order"
                )));
            }
        }
        let mut gains = Vec::with_capacity(order.len());
        let mut mask = vec![false; n];
        if matches!(self.structure, Structure::Graph(_)) && !self.has_aux() {
            for &i in order {
                let gain = self.cut_increment(&[i], |j| {
                    if j == i {
                        Placement::Added
                    } else if mask[j] {
                        Placement::Below
                    } else {
                        Placement::Above
                    }
                })?;
                mask[i] = true;
                gains.push(gain);
            }
        } else {
            let mut prev = self.evaluate_mask(&mask)?;
            for &i in order {
                mask[i] = true;
                let cur = self.evaluate_mask(&mask)?;
                gains.push(cur - prev);
                prev = cur;
            }
        }
        Ok(gains)
    }

    /// The Lovász extension at `z`, by the sorted greedy formula.
    pub fn lovasz_extension(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.n() {
            return Err(SubmodularError::LengthMismatch {
                expected: self.n(),
                got: z.len(),
            });
        }
        let mut order: Vec<usize> = (0..z.len()).collect();
        order.sort_by(|&i, &j| z[j].total_cmp(&z[i]).then(i.cmp(&j)));
        let gains = self.greedy_vertex(&order)?;
        Ok(order.iter().zip(&gains).map(|(&i, g)| z[i] * g).sum())
    }

    /// Returns `f + βb` (nondecreasing) together with
    /// `β = max{0, max_i (f(V \ {i}) - f(V)) / b_i}`.
    pub fn nondecreasing_shift(&self, b: &[f64]) -> Result<(Self, f64)> {
        let n = self.n();
        check_b(b, n)?;
        let mut beta: f64 = 0.0;
        if matches!(self.structure, Structure::Graph(_)) && !self.has_aux() {
            for (i, &bi) in b.iter().enumerate() {
                // f(V) - f(V \ {i}) as the increment of adding i last
                let gain = self.cut_increment(&[i], |j| {
                    if j == i {
                        Placement::Added
                    } else {
                        Placement::Below
                    }
                })?;
                beta = beta.max(-gain / bi);
            }
        } else {
            let mut mask = vec![true; n];
            let full = self.evaluate_mask(&mask)?;
            for (i, &bi) in b.iter().enumerate() {
                mask[i] = false;
                beta = beta.max((self.evaluate_mask(&mask)? - full) / bi);
                mask[i] = true;
            }
        }
        if beta == 0.0 {
            return Ok((self.clone(), 0.0));
        }
        let delta: Vec<f64> = b.iter().map(|bi| beta * bi).collect();
        Ok((self.with_modular_shift(&delta)?, beta))
    }

    /// `f(S)` for every subset, indexed by bitmask.
    pub fn value_table(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > MAX_ENUM_N {
            return Err(SubmodularError::GroundSetTooLarge {
                n,
                limit: MAX_ENUM_N,
            });
        }
        let mut mask = vec![false; n];
        (0u64..1 << n)
            .map(|bits| {
                for (i, m) in mask.iter_mut().enumerate() {
                    *m = bits >> i & 1 == 1;
                }
                self.evaluate_mask(&mask)
            })
            .collect()
    }

    /// Exhaustive minimum of `f + shift` with its minimal and maximal
    /// minimizers (intersection and union of all minimizers).
    pub fn brute_force_min(&self, shift: &[f64]) -> Result<BruteForceMin> {
        let n = self.n();
        if shift.len() != n {
            return Err(SubmodularError::LengthMismatch {
                expected: n,
                got: shift.len(),
            });
        }
        let table = self.value_table()?;
        let exact = self.is_integral() && shift.iter().copied().all(crate::is_integral);
        Ok(minimize_table(&table, n, |bits| {
            (0..n).filter(|i| bits >> i & 1 == 1).map(|i| shift[i]).sum()
        }, exact))
    }

    /// Checks `f(S) + f(T) >= f(S ∪ T) + f(S ∩ T)` for every pair.
    pub fn check_submodular(&self) -> Result<bool> {
        let n = self.n();
        if n > MAX_CHECK_N {
            return Err(SubmodularError::GroundSetTooLarge {
                n,
                limit: MAX_CHECK_N,
            });
        }
        Ok(table_is_submodular(&self.value_table()?, n, crate::VALUE_TOL))
    }

    /// The maximal minimizer of `scale * γ + m` over sets `Below ∪ X` with
    /// `X ⊆ free`, returned as a mask over `free`. `modular[k]` is the
    /// (already scaled) modular weight of `free[k]`.
    pub(crate) fn interval_minimizer(
        &self,
        free: &[usize],
        modular: &[f64],
        scale: f64,
        place: impl Fn(usize) -> Placement,
        local: impl Fn(usize) -> usize,
    ) -> Result<Vec<bool>> {
        match &self.structure {
            Structure::Graph(g) => graph_interval_minimizer(g, free, modular, scale, place, local),
            Structure::Table { n, values } => {
                let n = *n;
                let below = (0..n)
                    .filter(|&i| place(i) == Placement::Below)
                    .fold(0u64, |acc, i| acc | 1 << i);
                let k = free.len();
                let mut sub = Vec::with_capacity(1 << k);
                for x in 0u64..1 << k {
                    let mut bits = below;
                    let mut m = 0.0;
                    for (p, &i) in free.iter().enumerate() {
                        if x >> p & 1 == 1 {
                            bits |= 1 << i;
                            m += modular[p];
                        }
                    }
                    sub.push(scale * values[bits as usize] + m);
                }
                let exact = self.is_integral() && modular.iter().copied().all(crate::is_integral);
                let best = minimize_table(&sub, k, |_| 0.0, exact);
                Ok(best.maximal.to_mask(k))
            }
        }
    }
}

fn graph_interval_minimizer(
    g: &GraphFn,
    free: &[usize],
    modular: &[f64],
    scale: f64,
    place: impl Fn(usize) -> Placement,
    local: impl Fn(usize) -> usize,
) -> Result<Vec<bool>> {
    let net = &g.net;
    let edges = net.edges();
    let k = free.len();

    // auxiliary nodes connected to the free nodes through auxiliary paths
    let mut aux_local: HashMap<usize, usize> = HashMap::new();
    let mut aux_order = Vec::new();
    if net.n_aux() > 0 {
        let mut frontier: Vec<usize> = Vec::new();
        let mut visit = |v: usize, aux_order: &mut Vec<usize>, frontier: &mut Vec<usize>| {
            if let NodeRole::Aux(_) = net.role(v) {
                if !aux_local.contains_key(&v) {
                    aux_local.insert(v, 2 + k + aux_order.len());
                    aux_order.push(v);
                    frontier.push(v);
                }
            }
        };
        for &i in free {
            let v = 2 + i;
            for &e in g.out_edges[v].iter() {
                visit(edges[e].head, &mut aux_order, &mut frontier);
            }
            for &e in g.in_edges[v].iter() {
                visit(edges[e].tail, &mut aux_order, &mut frontier);
            }
        }
        while let Some(u) = frontier.pop() {
            for &e in g.out_edges[u].iter() {
                visit(edges[e].head, &mut aux_order, &mut frontier);
            }
            for &e in g.in_edges[u].iter() {
                visit(edges[e].tail, &mut aux_order, &mut frontier);
            }
        }
    }

    let map = |v: usize| -> usize {
        match net.role(v) {
            NodeRole::Source => SOURCE,
            NodeRole::Sink => SINK,
            NodeRole::Ground(i) => match place(i) {
                Placement::Below => SOURCE,
                Placement::Above => SINK,
                Placement::Added => 2 + local(i),
            },
            NodeRole::Aux(_) => aux_local[&v],
        }
    };
    let included = |v: usize| -> bool {
        match net.role(v) {
            NodeRole::Ground(i) => place(i) == Placement::Added,
            NodeRole::Aux(_) => true,
            _ => false,
        }
    };

    let mut arcs: Vec<(usize, usize, Capacity)> = Vec::new();
    let add_edge = |e: usize, arcs: &mut Vec<(usize, usize, Capacity)>| {
        let edge = edges[e];
        let (u, v) = (map(edge.tail), map(edge.head));
        if u == v || v == SOURCE || u == SINK {
            return;
        }
        let cap = match edge.cap {
            Capacity::Finite(c) => Capacity::Finite(c * scale),
            Capacity::Infinite => Capacity::Infinite,
        };
        arcs.push((u, v, cap));
    };
    let seeds = free.iter().map(|&i| 2 + i).chain(aux_order.iter().copied());
    for v in seeds {
        for &e in &g.out_edges[v] {
            add_edge(e, &mut arcs);
        }
        for &e in &g.in_edges[v] {
            // edges between two included nodes were added from their tail
            if !included(edges[e].tail) {
                add_edge(e, &mut arcs);
            }
        }
    }
    for (p, &m) in modular.iter().enumerate() {
        if m > 0.0 {
            arcs.push((2 + p, SINK, Capacity::Finite(m)));
        } else if m < 0.0 {
            arcs.push((SOURCE, 2 + p, Capacity::Finite(-m)));
        }
    }
    let restricted = FlowNetwork::build(k, aux_order.len(), arcs)?;
    let solved = maxflow::solve(&restricted)?;
    let side = solved.side(CutKind::Maximal);
    let mut chosen = vec![false; k];
    for &v in side.members() {
        if v < 2 + k {
            chosen[v - 2] = true;
        }
    }
    Ok(chosen)
}

pub(crate) fn check_b(b: &[f64], n: usize) -> Result<()> {
    if b.len() != n {
        return Err(SubmodularError::LengthMismatch {
            expected: n,
            got: b.len(),
        });
    }
    match b.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        Some(index) => Err(SubmodularError::NonPositiveB {
            index,
            value: b[index],
        }),
        None => Ok(()),
    }
}

/// Minimum of `table[bits] + shift(bits)` with the intersection and union of
/// all (tolerance-equal) minimizers.
pub(crate) fn minimize_table(
    table: &[f64],
    n: usize,
    shift: impl Fn(u64) -> f64,
    exact: bool,
) -> BruteForceMin {
    let values: Vec<f64> = table
        .iter()
        .enumerate()
        .map(|(bits, v)| v + shift(bits as u64))
        .collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut union = 0u64;
    let mut inter = u64::MAX;
    for (bits, &v) in values.iter().enumerate() {
        if values_equal(v, best, exact) {
            union |= bits as u64;
            inter &= bits as u64;
        }
    }
    BruteForceMin {
        value: best,
        minimal: GroundSubset::from_bits(inter, n),
        maximal: GroundSubset::from_bits(union, n),
    }
}

/// Pairwise submodularity check of a bitmask-indexed table.
pub fn table_is_submodular(table: &[f64], n: usize, tol: f64) -> bool {
    let size = 1u64 << n;
    for s in 0..size {
        for t in s + 1..size {
            let (a, b) = (table[s as usize], table[t as usize]);
            let (u, i) = (table[(s | t) as usize], table[(s & t) as usize]);
            let scale = 1.0 + a.abs().max(b.abs()).max(u.abs()).max(i.abs());
            if a + b < u + i - tol * scale {
                return false;
            }
        }
    }
    true
}
