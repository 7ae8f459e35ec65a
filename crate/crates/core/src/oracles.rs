//! Exact reference counts on materialized graphs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream::{AdjacencyGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has no 2-paths; transitivity is undefined")]
    NoTwoPaths,
}

/// Exact statistics of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    #[serde(rename = "T3")]
    pub t3: u64,
    #[serde(rename = "P2")]
    pub p2: u64,
    /// `None` when the graph has no 2-paths.
    pub alpha: Option<f64>,
    #[serde(rename = "F2")]
    pub f2: u64,
    pub m: usize,
    pub n_touched: usize,
}

#[inline]
pub fn choose2(d: u64) -> u64 {
    d * d.saturating_sub(1) / 2
}

fn intersection_size(g: &AdjacencyGraph, a: VertexId, b: VertexId) -> u64 {
    let (small, large) = if g.degree(a) <= g.degree(b) { (a, b) } else { (b, a) };
    let large = g.neighbor_set(large);
    g.neighbor_set(small)
        .iter()
        .filter(|w| large.contains(w))
        .count() as u64
}

/// Triangle count by edge iteration and neighbor intersection.
pub fn exact_triangles(g: &AdjacencyGraph) -> u64 {
    let closed: u64 = g.edges().map(|(u, v)| intersection_size(g, u, v)).sum();
    debug_assert_eq!(closed % 3, 0);
    closed / 3
}

/// `Σ_v C(d_v, 2)`.
pub fn exact_two_paths(g: &AdjacencyGraph) -> u64 {
    g.vertices().map(|v| choose2(g.degree(v) as u64)).sum()
}

/// `Σ_v d_v²`.
pub fn exact_f2(g: &AdjacencyGraph) -> u64 {
    g.vertices()
        .map(|v| {
            let d = g.degree(v) as u64;
            d * d
        })
        .sum()
}

/// `3·T3 / P2`.
pub fn exact_transitivity(g: &AdjacencyGraph) -> Result<f64, OracleError> {
    let p2 = exact_two_paths(g);
    if p2 == 0 {
        return Err(OracleError::NoTwoPaths);
    }
    Ok(3.0 * exact_triangles(g) as f64 / p2 as f64)
}

pub fn graph_stats(g: &AdjacencyGraph) -> GraphStats {
    let t3 = exact_triangles(g);
    let p2 = exact_two_paths(g);
    GraphStats {
        t3,
        p2,
        alpha: (p2 > 0).then(|| 3.0 * t3 as f64 / p2 as f64),
        f2: exact_f2(g),
        m: g.m_live(),
        n_touched: g.touched_vertices().count(),
    }
}
