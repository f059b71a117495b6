//! Separable convex minimization over the base polytope of graph-structured
//! submodular functions.
//!
//! The pipeline is:
//!
//! * [`graph`] builds capacitated networks (and parses DIMACS),
//! * [`maxflow`] computes maximum flows and the maximal/minimal minimum cuts,
//! * [`subfn`] wraps a network as a set function `f(S) = γ(S) + a(S) - offset`,
//! * [`decomp`] runs the divide-and-conquer decomposition that recovers the
//!   chain of maximal minimizers of `f - αb` and the optimal base,
//! * [`apps`] layers densest-subgraph levels, proximal operators, minimum
//!   ratio extraction and a proximal-gradient regression driver on top.

pub mod apps;
pub mod decomp;
pub mod graph;
pub mod instances;
pub mod maxflow;
pub mod subfn;
pub mod subset;

pub use decomp::{
    base_from_chain, brute_force_chain, decompose, decompose_with, solve_family, ArithMode,
    BaseVector, Chain, DecompError, DecomposeOptions, ObjectiveVariant,
};
pub use graph::{Capacity, CutSide, Edge, FlowNetwork, GraphError, SINK, SOURCE};
pub use maxflow::{max_flow, min_cut, CutKind, FlowError, FlowResult, MinCut};
pub use subfn::{SubmodularSpec, SubmodularError};
pub use subset::GroundSubset;

/// Relative tolerance used when two set-function values are compared.
pub const VALUE_TOL: f64 = 1e-9;

/// `a == b` up to `VALUE_TOL * (1 + max(|a|, |b|))`, or exactly when `exact`.
pub fn values_equal(a: f64, b: f64, exact: bool) -> bool {
    if exact {
        a == b
    } else {
        (a - b).abs() <= VALUE_TOL * (1.0 + a.abs().max(b.abs()))
    }
}

pub(crate) fn is_integral(x: f64) -> bool {
    x.is_finite() && x.fract() == 0.0 && x.abs() < 9.0e15
}
