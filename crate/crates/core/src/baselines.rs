//! Doulion: keep each edge independently with probability `p`, count
//! triangles exactly in the kept graph and scale by `1/p³`.
//!
//! The coin of an edge is a hash of `(seed, u, v)`, so an insertion and a
//! later deletion of the same edge always agree on whether it is kept.

use thiserror::Error;

use crate::hashing::{mix, unit_interval};
use crate::oracles::exact_triangles;
use crate::stream::{AdjacencyGraph, EdgeEvent, StreamError, VertexId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DoulionError {
    #[error("retention probability {0} not in (0, 1]")]
    InvalidProbability(f64),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

#[derive(Debug, Clone)]
pub struct DoulionState {
    p: f64,
    seed: u64,
    retained: AdjacencyGraph,
}

impl DoulionState {
    pub fn new(n: u32, p: f64, seed: u64) -> Result<Self, DoulionError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(DoulionError::InvalidProbability(p));
        }
        Ok(Self {
            p,
            seed,
            retained: AdjacencyGraph::with_universe(n),
        })
    }

    pub fn retains(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = (u.min(v), u.max(v));
        let key = (a.get() as u64) << 32 | b.get() as u64;
        unit_interval(mix(self.seed, key)) < self.p
    }

    pub fn update(&mut self, e: &EdgeEvent) -> Result<(), DoulionError> {
        if self.retains(e.u(), e.v()) {
            self.retained.apply(e)?;
        }
        Ok(())
    }

    pub fn retained(&self) -> &AdjacencyGraph {
        &self.retained
    }

    pub fn estimate(&self) -> f64 {
        exact_triangles(&self.retained) as f64 / self.p.powi(3)
    }
}

/// Ingests `stream` and returns the scaled triangle count.
pub fn doulion_estimate(stream: &[EdgeEvent], n: u32, p: f64, seed: u64) -> Result<f64, DoulionError> {
    let mut st = DoulionState::new(n, p, seed)?;
    for e in stream {
        st.update(e)?;
    }
    Ok(st.estimate())
}
