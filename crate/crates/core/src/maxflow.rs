//! Maximum flow by highest-label push-relabel, and extraction of the maximal
//! and minimal minimum s-t cuts from the residual network.
//!
//! Infinite edges are never saturated. Nodes reachable from `s` along infinite
//! edges sit on the source side of every finite cut, so they are merged into
//! the source before solving; flow through them is routed back afterwards
//! along a BFS tree of infinite edges.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Capacity, CutSide, FlowNetwork, SINK, SOURCE};

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("every s-t cut has infinite capacity")]
    NoFiniteCut,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutKind {
    Maximal,
    Minimal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub value: f64,
    /// Flow on each edge of [`FlowNetwork::edges`], in the same order.
    pub edge_flows: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinCut {
    pub value: f64,
    pub side: CutSide,
    pub kind: CutKind,
}

/// A solved network: the flow plus both extremal minimum cuts.
#[derive(Clone, Debug)]
pub struct SolvedFlow {
    pub flow: FlowResult,
    maximal: CutSide,
    minimal: CutSide,
}

impl SolvedFlow {
    pub fn side(&self, kind: CutKind) -> &CutSide {
        match kind {
            CutKind::Maximal => &self.maximal,
            CutKind::Minimal => &self.minimal,
        }
    }

    pub fn min_cut(&self, net: &FlowNetwork, kind: CutKind) -> MinCut {
        let side = self.side(kind).clone();
        let value = net
            .cut_capacity(&side.to_mask(net.node_count()))
            .finite()
            .unwrap_or(f64::INFINITY);
        MinCut { value, side, kind }
    }
}

pub fn max_flow(net: &FlowNetwork) -> Result<FlowResult, FlowError> {
    solve(net).map(|s| s.flow)
}

pub fn min_cut(net: &FlowNetwork, kind: CutKind) -> Result<MinCut, FlowError> {
    Ok(solve(net)?.min_cut(net, kind))
}

/// Residual arcs with capacity at or below this threshold are treated as
/// absent: exact zero for integral networks, `1e-12 * max capacity` otherwise.
pub fn residual_epsilon(net: &FlowNetwork) -> f64 {
    if net.is_integral() {
        0.0
    } else {
        1e-12 * net.max_finite_capacity()
    }
}

pub fn solve(net: &FlowNetwork) -> Result<SolvedFlow, FlowError> {
    let node_count = net.node_count();
    let edges = net.edges();

    // closure of s along infinite edges, with a BFS tree for flow routing
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for (k, e) in edges.iter().enumerate() {
        out_edges[e.tail].push(k);
    }
    let mut in_closure = vec![false; node_count];
    let mut parent_edge = vec![usize::MAX; node_count];
    let mut closure_order = vec![SOURCE];
    in_closure[SOURCE] = true;
    let mut head_idx = 0;
    while head_idx < closure_order.len() {
        let v = closure_order[head_idx];
        head_idx += 1;
        for &k in &out_edges[v] {
            let e = edges[k];
            if e.cap.is_infinite() && !in_closure[e.head] {
                if e.head == SINK {
                    return Err(FlowError::NoFiniteCut);
                }
                in_closure[e.head] = true;
                parent_edge[e.head] = k;
                closure_order.push(e.head);
            }
        }
    }

    // internal ids: the closure collapses onto s
    let internal: Vec<usize> = (0..node_count)
        .map(|v| if in_closure[v] { SOURCE } else { v })
        .collect();
    let mut arcs = Vec::with_capacity(edges.len());
    for (k, e) in edges.iter().enumerate() {
        let (u, v) = (internal[e.tail], internal[e.head]);
        if u == v || v == SOURCE || u == SINK {
            continue;
        }
        arcs.push((k, u, v, e.cap.as_f64()));
    }

    let eps = residual_epsilon(net);
    let mut g = Residual::new(node_count, &arcs);
    g.phase_one(eps);
    g.phase_two(eps);

    let mut edge_flows = vec![0.0; edges.len()];
    for (slot, &(k, ..)) in arcs.iter().enumerate() {
        edge_flows[k] = g.res[g.rev[g.forward[slot]]];
    }
    // route the flow leaving the merged closure back through its tree
    let mut demand = vec![0.0; node_count];
    for (k, e) in edges.iter().enumerate() {
        if in_closure[e.tail] && !in_closure[e.head] {
            demand[e.tail] += edge_flows[k];
        }
    }
    for &v in closure_order.iter().skip(1).rev() {
        let k = parent_edge[v];
        edge_flows[k] += demand[v];
        demand[edges[k].tail] += demand[v];
    }
    let value = g.excess[SINK];

    let reaches_sink = g.reaches_sink(eps);
    let maximal = CutSide::new((2..node_count).filter(|&v| !reaches_sink[internal[v]]));
    let from_source = g.reachable_from_source(eps);
    let minimal = CutSide::new((2..node_count).filter(|&v| from_source[internal[v]]));

    Ok(SolvedFlow {
        flow: FlowResult { value, edge_flows },
        maximal,
        minimal,
    })
}

struct Residual {
    n: usize,
    first: Vec<usize>,
    head: Vec<usize>,
    rev: Vec<usize>,
    res: Vec<f64>,
    /// forward arc index for each input arc
    forward: Vec<usize>,
    excess: Vec<f64>,
}

impl Residual {
    fn new(n: usize, arcs: &[(usize, usize, usize, f64)]) -> Self {
        let mut degree = vec![0usize; n + 1];
        for &(_, u, v, _) in arcs {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut first = vec![0usize; n + 1];
        for v in 0..n {
            first[v + 1] = first[v] + degree[v];
        }
        let m = first[n];
        let mut fill = first.clone();
        let mut head = vec![0; m];
        let mut rev = vec![0; m];
        let mut res = vec![0.0; m];
        let mut forward = Vec::with_capacity(arcs.len());
        for &(_, u, v, cap) in arcs {
            let a = fill[u];
            fill[u] += 1;
            let b = fill[v];
            fill[v] += 1;
            head[a] = v;
            head[b] = u;
            rev[a] = b;
            rev[b] = a;
            res[a] = cap;
            forward.push(a);
        }
        Self {
            n,
            first,
            head,
            rev,
            res,
            forward,
            excess: vec![0.0; n],
        }
    }

    fn arcs(&self, v: usize) -> std::ops::Range<usize> {
        self.first[v]..self.first[v + 1]
    }

    fn push(&mut self, a: usize, v: usize, delta: f64) {
        let w = self.head[a];
        self.res[a] -= delta;
        self.res[self.rev[a]] += delta;
        self.excess[v] -= delta;
        self.excess[w] += delta;
    }

    /// Computes a maximum preflow (highest-label selection, gap heuristic,
    /// periodic global relabeling).
    fn phase_one(&mut self, eps: f64) {
        let mut st = LabelState::new(self.n);
        for a in self.arcs(SOURCE) {
            let cap = self.res[a];
            if cap > 0.0 {
                self.push(a, SOURCE, cap);
            }
        }
        let arc_count = self.head.len();
        let relabel_period = 6 * self.n + arc_count / 2;
        self.global_relabel(&mut st, eps);

        loop {
            while st.max_active > 0 && st.active[st.max_active].is_empty() {
                st.max_active -= 1;
            }
            let Some(v) = st.active[st.max_active].pop() else {
                break;
            };
            if !st.in_active[v] || st.d[v] != st.max_active {
                continue;
            }
            st.in_active[v] = false;
            self.discharge(v, &mut st, eps);
            if st.work > relabel_period {
                st.work = 0;
                self.global_relabel(&mut st, eps);
            }
        }
    }

    fn discharge(&mut self, v: usize, st: &mut LabelState, eps: f64) {
        let n = self.n;
        while self.excess[v] > eps {
            if st.cur[v] == self.first[v + 1] {
                self.relabel(v, st, eps);
                if st.d[v] >= n {
                    return;
                }
                continue;
            }
            let a = st.cur[v];
            let w = self.head[a];
            if self.res[a] > eps && st.d[v] == st.d[w] + 1 {
                let delta = self.excess[v].min(self.res[a]);
                self.push(a, v, delta);
                if w != SINK && w != SOURCE && !st.in_active[w] && self.excess[w] > eps {
                    st.activate(w);
                }
                if self.res[a] <= eps {
                    st.cur[v] += 1;
                }
            } else {
                st.cur[v] += 1;
            }
        }
    }

    fn relabel(&mut self, v: usize, st: &mut LabelState, eps: f64) {
        let n = self.n;
        let old = st.d[v];
        st.remove_label(v);
        st.work += self.first[v + 1] - self.first[v] + 12;
        if st.all[old].is_empty() {
            // nothing left at `old`: v and everything above it is cut off
            st.d[v] = n;
            for label in old + 1..=st.max_all.min(n - 1) {
                for u in std::mem::take(&mut st.all[label]) {
                    st.d[u] = n;
                    st.in_active[u] = false;
                }
            }
            st.max_all = old.saturating_sub(1);
            return;
        }
        let mut best = n;
        for a in self.arcs(v) {
            if self.res[a] > eps {
                best = best.min(st.d[self.head[a]] + 1);
            }
        }
        st.d[v] = best.min(n);
        st.cur[v] = self.first[v];
        if st.d[v] < n {
            st.insert_label(v);
        }
    }

    fn global_relabel(&mut self, st: &mut LabelState, eps: f64) {
        let n = self.n;
        st.d.fill(n);
        st.d[SINK] = 0;
        let mut queue = VecDeque::from([SINK]);
        while let Some(v) = queue.pop_front() {
            for a in self.arcs(v) {
                let w = self.head[a];
                if w != SOURCE && st.d[w] == n && self.res[self.rev[a]] > eps {
                    st.d[w] = st.d[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        st.d[SOURCE] = n;
        for bucket in st.active.iter_mut().chain(st.all.iter_mut()) {
            bucket.clear();
        }
        st.in_active.fill(false);
        st.max_active = 0;
        st.max_all = 0;
        for v in 2..n {
            st.cur[v] = self.first[v];
            if st.d[v] < n {
                st.insert_label(v);
                if self.excess[v] > eps {
                    st.activate(v);
                }
            }
        }
    }

    /// Converts the preflow into a flow by returning stranded excess to `s`.
    fn phase_two(&mut self, eps: f64) {
        let n = self.n;
        if !(2..n).any(|v| self.excess[v] > eps) {
            return;
        }
        let unlabeled = usize::MAX;
        let mut d = vec![unlabeled; n];
        d[SOURCE] = 0;
        let mut queue = VecDeque::from([SOURCE]);
        while let Some(v) = queue.pop_front() {
            for a in self.arcs(v) {
                let w = self.head[a];
                if w != SINK && d[w] == unlabeled && self.res[self.rev[a]] > 0.0 {
                    d[w] = d[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut cur = self.first.clone();
        let mut queued = vec![false; n];
        let mut fifo: VecDeque<usize> = (2..n).filter(|&v| self.excess[v] > eps).collect();
        for &v in &fifo {
            queued[v] = true;
        }
        while let Some(v) = fifo.pop_front() {
            queued[v] = false;
            while self.excess[v] > eps {
                if cur[v] == self.first[v + 1] {
                    let mut best = unlabeled;
                    for a in self.arcs(v) {
                        let w = self.head[a];
                        if self.res[a] > 0.0 && w != SINK && d[w] != unlabeled {
                            best = best.min(d[w] + 1);
                        }
                    }
                    if best == unlabeled {
                        // unreachable for a valid preflow; keep the residue
                        log::warn!("stranded excess {} at node {v}", self.excess[v]);
                        break;
                    }
                    d[v] = best;
                    cur[v] = self.first[v];
                    continue;
                }
                let a = cur[v];
                let w = self.head[a];
                if self.res[a] > 0.0 && w != SINK && d[w] != unlabeled && d[v] == d[w] + 1 {
                    let delta = self.excess[v].min(self.res[a]);
                    self.push(a, v, delta);
                    if w != SOURCE && !queued[w] && self.excess[w] > eps {
                        queued[w] = true;
                        fifo.push_back(w);
                    }
                    if self.res[a] <= 0.0 {
                        cur[v] += 1;
                    }
                } else {
                    cur[v] += 1;
                }
            }
        }
    }

    fn reaches_sink(&self, eps: f64) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[SINK] = true;
        let mut queue = VecDeque::from([SINK]);
        while let Some(v) = queue.pop_front() {
            for a in self.arcs(v) {
                let w = self.head[a];
                if !seen[w] && self.res[self.rev[a]] > eps {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn reachable_from_source(&self, eps: f64) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[SOURCE] = true;
        let mut queue = VecDeque::from([SOURCE]);
        while let Some(v) = queue.pop_front() {
            for a in self.arcs(v) {
                let w = self.head[a];
                if !seen[w] && self.res[a] > eps {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

struct LabelState {
    d: Vec<usize>,
    cur: Vec<usize>,
    active: Vec<Vec<usize>>,
    in_active: Vec<bool>,
    max_active: usize,
    // nodes by label (below n), for the gap heuristic
    all: Vec<Vec<usize>>,
    all_pos: Vec<usize>,
    max_all: usize,
    work: usize,
}

impl LabelState {
    fn new(n: usize) -> Self {
        Self {
            d: vec![0; n],
            cur: vec![0; n],
            active: vec![Vec::new(); n + 1],
            in_active: vec![false; n],
            max_active: 0,
            all: vec![Vec::new(); n + 1],
            all_pos: vec![0; n],
            max_all: 0,
            work: 0,
        }
    }

    fn activate(&mut self, v: usize) {
        let label = self.d[v];
        if label < self.d.len() {
            self.in_active[v] = true;
            self.active[label].push(v);
            self.max_active = self.max_active.max(label);
        }
    }

    fn insert_label(&mut self, v: usize) {
        let label = self.d[v];
        self.all_pos[v] = self.all[label].len();
        self.all[label].push(v);
        self.max_all = self.max_all.max(label);
    }

    fn remove_label(&mut self, v: usize) {
        let label = self.d[v];
        let pos = self.all_pos[v];
        let bucket = &mut self.all[label];
        bucket.swap_remove(pos);
        if pos < bucket.len() {
            let moved = bucket[pos];
            self.all_pos[moved] = pos;
        }
    }
}

/// Checks capacity bounds, conservation and the reported value of `flow`
/// against `net`, with absolute slack `tol`.
pub fn check_flow(net: &FlowNetwork, flow: &FlowResult, tol: f64) -> Result<(), String> {
    let edges = net.edges();
    if flow.edge_flows.len() != edges.len() {
        return Err("edge flow vector has the wrong length".into());
    }
    let mut balance = vec![0.0; net.node_count()];
    for (e, &x) in edges.iter().zip(&flow.edge_flows) {
        if x < -tol {
            return Err(format!("negative flow {x} on ({}, {})", e.tail, e.head));
        }
        if let Capacity::Finite(c) = e.cap {
            if x > c + tol {
                return Err(format!(
                    "flow {x} exceeds capacity {c} on ({}, {})",
                    e.tail, e.head
                ));
            }
        }
        balance[e.tail] -= x;
        balance[e.head] += x;
    }
    for (v, &b) in balance.iter().enumerate().skip(2) {
        if b.abs() > tol {
            return Err(format!("conservation violated at node {v} by {b}"));
        }
    }
    if (balance[SINK] - flow.value).abs() > tol || (-balance[SOURCE] - flow.value).abs() > tol {
        return Err(format!(
            "value {} disagrees with sink inflow {} / source outflow {}",
            flow.value, balance[SINK], -balance[SOURCE]
        ));
    }
    Ok(())
}
