//! Deterministic graph families and churned streams used as fixtures.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::stream::{normalize_event, AdjacencyGraph, EdgeEvent, Sign, VertexId};

/// `K_n` on vertices `1..=n`.
pub fn complete(n: u32) -> AdjacencyGraph {
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            edges.push((a, b));
        }
    }
    AdjacencyGraph::from_edges(n.max(2), &edges)
}

/// Path `1 – 2 – … – n`.
pub fn path(n: u32) -> AdjacencyGraph {
    let edges: Vec<_> = (1..n).map(|a| (a, a + 1)).collect();
    AdjacencyGraph::from_edges(n.max(2), &edges)
}

/// Star `K_{1,k}` with center 1 and leaves `2..=k+1`.
pub fn star(k: u32) -> AdjacencyGraph {
    let edges: Vec<_> = (2..=k + 1).map(|leaf| (1, leaf)).collect();
    AdjacencyGraph::from_edges(k + 1, &edges)
}

/// `K_{a,b}` with sides `1..=a` and `a+1..=a+b`.
pub fn complete_bipartite(a: u32, b: u32) -> AdjacencyGraph {
    let mut edges = Vec::new();
    for x in 1..=a {
        for y in a + 1..=a + b {
            edges.push((x, y));
        }
    }
    AdjacencyGraph::from_edges((a + b).max(2), &edges)
}

/// Erdős–Rényi `G(n, p)`.
pub fn gnp<R: Rng + ?Sized>(n: u32, p: f64, rng: &mut R) -> AdjacencyGraph {
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.gen_bool(p.clamp(0.0, 1.0)) {
                edges.push((a, b));
            }
        }
    }
    AdjacencyGraph::from_edges(n.max(2), &edges)
}

/// `G(n, background)` plus `triangles` triangles on uniformly drawn vertex triples.
pub fn planted_triangles<R: Rng + ?Sized>(
    n: u32,
    triangles: u32,
    background: f64,
    rng: &mut R,
) -> AdjacencyGraph {
    assert!(n >= 3, "planting triangles needs n >= 3");
    let mut g = gnp(n, background, rng);
    let vertices: Vec<u32> = (1..=n).collect();
    for _ in 0..triangles {
        let tri: Vec<u32> = vertices.choose_multiple(rng, 3).copied().collect();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let (a, b) = (VertexId(tri[i]), VertexId(tri[j]));
            if !g.has_edge(a, b) {
                let e = normalize_event(n, a.0 as i64, b.0 as i64, Sign::Insert).unwrap();
                g.apply(&e).unwrap();
            }
        }
    }
    g
}

/// Random connected graph: a random recursive tree plus `G(n, extra)` edges.
pub fn random_connected<R: Rng + ?Sized>(n: u32, extra: f64, rng: &mut R) -> AdjacencyGraph {
    assert!(n >= 2);
    let mut edges = HashSet::new();
    let mut labels: Vec<u32> = (1..=n).collect();
    labels.shuffle(rng);
    for i in 1..labels.len() {
        let parent = labels[rng.gen_range(0..i)];
        let child = labels[i];
        edges.insert((parent.min(child), parent.max(child)));
    }
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.gen_bool(extra.clamp(0.0, 1.0)) {
                edges.insert((a, b));
            }
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    AdjacencyGraph::from_edges(n, &edges)
}

/// Shuffled insert-only stream of `g`.
pub fn insert_stream<R: Rng + ?Sized>(g: &AdjacencyGraph, rng: &mut R) -> Vec<EdgeEvent> {
    let mut events = g.insert_stream();
    events.shuffle(rng);
    events
}

fn edge_event(u: VertexId, v: VertexId, sign: Sign) -> EdgeEvent {
    normalize_event(u32::MAX, u.0 as i64, v.0 as i64, sign).expect("distinct endpoints")
}

/// Stream whose final graph is `g`, with `⌊fraction·m⌋` extra decoy edges
/// inserted and later deleted.
///
/// Decoys are distinct vertex pairs drawn uniformly from the universe of `g`.
/// A decoy that is also an edge of `g` is churned before its final insertion.
pub fn churn_stream<R: Rng + ?Sized>(g: &AdjacencyGraph, fraction: f64, rng: &mut R) -> Vec<EdgeEvent> {
    let mut targets: Vec<(VertexId, VertexId)> = g.edges().collect();
    targets.shuffle(rng);
    let m = targets.len();
    let n = g.n() as u64;
    let all_pairs = n * (n - 1) / 2;
    let wanted = ((fraction * m as f64).floor() as u64).min(all_pairs) as usize;

    let decoys: Vec<(VertexId, VertexId)> = if (wanted as u64) * 2 >= all_pairs {
        let mut pairs: Vec<_> = complete(g.n()).edges().collect();
        pairs.shuffle(rng);
        pairs.truncate(wanted);
        pairs
    } else {
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(wanted);
        while pairs.len() < wanted {
            let a = rng.gen_range(1..=g.n());
            let b = rng.gen_range(1..=g.n());
            if a == b {
                continue;
            }
            let pair = (VertexId(a.min(b)), VertexId(a.max(b)));
            if seen.insert(pair) {
                pairs.push(pair);
            }
        }
        pairs
    };

    // slot j means "just before target j"; slot m is after every target
    let target_slot: std::collections::HashMap<_, _> =
        targets.iter().enumerate().map(|(j, &e)| (e, j)).collect();
    let mut insert_at: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
    let mut delete_at: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
    for (k, d) in decoys.iter().enumerate() {
        let limit = target_slot.get(d).copied().unwrap_or(m);
        let a = rng.gen_range(0..=limit);
        let b = rng.gen_range(a..=limit);
        insert_at[a].push(k);
        delete_at[b].push(k);
    }

    let mut events = Vec::with_capacity(m + 2 * decoys.len());
    for slot in 0..=m {
        for &k in &insert_at[slot] {
            events.push(edge_event(decoys[k].0, decoys[k].1, Sign::Insert));
        }
        for &k in &delete_at[slot] {
            events.push(edge_event(decoys[k].0, decoys[k].1, Sign::Delete));
        }
        if slot < m {
            events.push(edge_event(targets[slot].0, targets[slot].1, Sign::Insert));
        }
    }
    events
}

/// Largest number of simultaneously live edges along a stream.
pub fn peak_live_edges(stream: &[EdgeEvent]) -> usize {
    let mut live = 0i64;
    let mut peak = 0i64;
    for e in stream {
        live += e.sign().weight();
        peak = peak.max(live);
    }
    peak.max(0) as usize
}
