//! Stream events, the strict turnstile contract and exact graph materialization.
//!
//! The text format understood by [`parse_stream`] is one event per line:
//!
//! ```text
//! # comment
//! + 1 2
//! - 1 2
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex identifier in `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Insert,
    Delete,
}

impl Sign {
    #[inline]
    pub fn weight(self) -> i64 {
        match self {
            Sign::Insert => 1,
            Sign::Delete => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Insert => '+',
            Sign::Delete => '-',
        }
    }

    pub fn inverse(self) -> Sign {
        match self {
            Sign::Insert => Sign::Delete,
            Sign::Delete => Sign::Insert,
        }
    }
}

/// A normalized edge update: `u < v`, no loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeEvent {
    u: VertexId,
    v: VertexId,
    sign: Sign,
}

impl EdgeEvent {
    #[inline]
    pub fn u(&self) -> VertexId {
        self.u
    }

    #[inline]
    pub fn v(&self) -> VertexId {
        self.v
    }

    #[inline]
    pub fn sign(&self) -> Sign {
        self.sign
    }

    #[inline]
    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.u, self.v)
    }

    /// The same edge with the opposite sign.
    pub fn inverse(&self) -> EdgeEvent {
        EdgeEvent {
            sign: self.sign.inverse(),
            ..*self
        }
    }
}

impl fmt::Display for EdgeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.sign.symbol(), self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("loop edge on vertex {0}")]
    LoopEdge(i64),
    #[error("vertex {vertex} outside universe 1..={n}")]
    OutOfUniverse { vertex: i64, n: u32 },
    #[error("edge ({0}, {1}) inserted while already live")]
    DuplicateInsert(VertexId, VertexId),
    #[error("edge ({0}, {1}) deleted while not live")]
    DeleteAbsent(VertexId, VertexId),
    #[error("live edge count would exceed m_max = {0}")]
    OverCapacity(usize),
    #[error("invalid stream configuration: {0}")]
    InvalidConfig(String),
}

/// Vertex universe size and live-edge capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub n: u32,
    pub m_max: usize,
}

impl StreamConfig {
    pub fn new(n: u32, m_max: usize) -> Result<Self, StreamError> {
        if n < 2 {
            return Err(StreamError::InvalidConfig(format!("n = {n} must be at least 2")));
        }
        if m_max < 1 {
            return Err(StreamError::InvalidConfig("m_max must be at least 1".into()));
        }
        Ok(Self { n, m_max })
    }

    /// Normalizes a raw `(u, v, sign)` triple against this universe.
    pub fn normalize(&self, u_raw: i64, v_raw: i64, sign: Sign) -> Result<EdgeEvent, StreamError> {
        normalize_event(self.n, u_raw, v_raw, sign)
    }
}

/// Canonicalizes an edge update so that `u < v`.
pub fn normalize_event(n: u32, u_raw: i64, v_raw: i64, sign: Sign) -> Result<EdgeEvent, StreamError> {
    for x in [u_raw, v_raw] {
        if x < 1 || x > n as i64 {
            return Err(StreamError::OutOfUniverse { vertex: x, n });
        }
    }
    if u_raw == v_raw {
        return Err(StreamError::LoopEdge(u_raw));
    }
    let (a, b) = if u_raw < v_raw { (u_raw, v_raw) } else { (v_raw, u_raw) };
    Ok(EdgeEvent {
        u: VertexId(a as u32),
        v: VertexId(b as u32),
        sign,
    })
}

/// Exact simple graph over a fixed vertex universe.
///
/// Equality compares the universe and edge set, not the capacity.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    n: u32,
    m_max: usize,
    adj: Vec<BTreeSet<VertexId>>,
    m_live: usize,
}

impl AdjacencyGraph {
    pub fn new(cfg: StreamConfig) -> Self {
        Self {
            n: cfg.n,
            m_max: cfg.m_max,
            adj: vec![BTreeSet::new(); cfg.n as usize + 1],
            m_live: 0,
        }
    }

    /// Graph with no capacity limit beyond the universe size.
    pub fn with_universe(n: u32) -> Self {
        Self::new(StreamConfig { n, m_max: usize::MAX })
    }

    /// Builds a graph from an edge list, panicking on invalid input.
    ///
    /// Meant for fixtures; streaming callers should use [`materialize`].
    pub fn from_edges(n: u32, edges: &[(u32, u32)]) -> Self {
        let mut g = Self::with_universe(n);
        for &(a, b) in edges {
            let e = normalize_event(n, a as i64, b as i64, Sign::Insert).expect("valid fixture edge");
            g.apply(&e).expect("fixture edges must be distinct");
        }
        g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m_live(&self) -> usize {
        self.m_live
    }

    pub fn apply(&mut self, e: &EdgeEvent) -> Result<(), StreamError> {
        let (u, v) = e.endpoints();
        match e.sign() {
            Sign::Insert => {
                if self.adj[u.index()].contains(&v) {
                    return Err(StreamError::DuplicateInsert(u, v));
                }
                if self.m_live >= self.m_max {
                    return Err(StreamError::OverCapacity(self.m_max));
                }
                self.adj[u.index()].insert(v);
                self.adj[v.index()].insert(u);
                self.m_live += 1;
            }
            Sign::Delete => {
                if !self.adj[u.index()].remove(&v) {
                    return Err(StreamError::DeleteAbsent(u, v));
                }
                self.adj[v.index()].remove(&u);
                self.m_live -= 1;
            }
        }
        Ok(())
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj
            .get(u.index())
            .is_some_and(|nbrs| nbrs.contains(&v))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(v.index()).map_or(0, BTreeSet::len)
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v.index()].iter().copied()
    }

    pub(crate) fn neighbor_set(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.adj[v.index()]
    }

    /// Vertices `1..=n` in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (1..=self.n).map(VertexId)
    }

    /// Vertices with at least one incident edge.
    pub fn touched_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(|&v| self.degree(v) > 0)
    }

    /// Live edges `(u, v)` with `u < v`, lexicographically ordered.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |u| {
            self.adj[u.index()]
                .range(VertexId(u.0 + 1)..)
                .map(move |&v| (u, v))
        })
    }

    /// Insert events that rebuild this graph from empty.
    pub fn insert_stream(&self) -> Vec<EdgeEvent> {
        self.edges()
            .map(|(u, v)| EdgeEvent {
                u,
                v,
                sign: Sign::Insert,
            })
            .collect()
    }

    /// Checks `w ∈ N(v) ⇔ v ∈ N(w)` and the edge count.
    pub fn is_consistent(&self) -> bool {
        let mut half_degrees = 0usize;
        for v in self.vertices() {
            for &w in &self.adj[v.index()] {
                if w == v || !self.adj[w.index()].contains(&v) {
                    return false;
                }
            }
            half_degrees += self.adj[v.index()].len();
        }
        half_degrees == 2 * self.m_live
    }
}

impl PartialEq for AdjacencyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m_live == other.m_live && self.adj == other.adj
    }
}

impl Eq for AdjacencyGraph {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("event {index}: {source}")]
pub struct MaterializeError {
    pub index: usize,
    #[source]
    pub source: StreamError,
}

/// Folds the stream into its exact final graph.
pub fn materialize<'a, I>(stream: I, cfg: StreamConfig) -> Result<AdjacencyGraph, MaterializeError>
where
    I: IntoIterator<Item = &'a EdgeEvent>,
{
    let mut g = AdjacencyGraph::new(cfg);
    for (index, e) in stream.into_iter().enumerate() {
        g.apply(e).map_err(|source| MaterializeError { index, source })?;
    }
    Ok(g)
}

/// One parsed line of a stream file, before universe checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawEvent {
    /// 1-based line number.
    pub line: usize,
    pub u: i64,
    pub v: i64,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

pub fn parse_stream(text: &str) -> Result<Vec<RawEvent>, ParseError> {
    let mut out = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| ParseError { line, message };
        let mut parts = trimmed.split_whitespace();
        let sign = match parts.next() {
            Some("+") => Sign::Insert,
            Some("-") => Sign::Delete,
            Some(other) => return Err(err(format!("expected '+' or '-', found {other:?}"))),
            None => unreachable!("non-empty line has a token"),
        };
        let mut id = |what: &str| -> Result<i64, ParseError> {
            let tok = parts
                .next()
                .ok_or_else(|| err(format!("missing {what} vertex")))?;
            tok.parse::<i64>()
                .map_err(|_| err(format!("invalid vertex id {tok:?}")))
        };
        let u = id("first")?;
        let v = id("second")?;
        if let Some(extra) = parts.next() {
            return Err(err(format!("unexpected trailing token {extra:?}")));
        }
        out.push(RawEvent { line, u, v, sign });
    }
    Ok(out)
}

/// Renders events in the text stream format, one per line.
pub fn write_stream(events: &[EdgeEvent]) -> String {
    let mut s = String::with_capacity(events.len() * 12);
    for e in events {
        s.push_str(&e.to_string());
        s.push('\n');
    }
    s
}
