//! Pairwise independent 2-paths.
//!
//! Two 2-paths are independent when they share at most one vertex. The
//! estimator only needs a certificate that a sparsified graph holds at least
//! `s` of them, which [`greedy_independent_count`] provides. The remaining
//! functions check the combinatorial lower bounds on small graphs.

use std::borrow::Cow;
use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::stream::{AdjacencyGraph, VertexId};

/// 2-path `u – center – w` with `u < w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TwoPath {
    pub u: VertexId,
    pub center: VertexId,
    pub w: VertexId,
}

impl TwoPath {
    pub fn new(a: VertexId, center: VertexId, b: VertexId) -> Self {
        assert!(a != b && a != center && b != center, "2-path needs three distinct vertices");
        Self {
            u: a.min(b),
            center,
            w: a.max(b),
        }
    }

    pub fn vertices(&self) -> [VertexId; 3] {
        [self.u, self.center, self.w]
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.u == x || self.center == x || self.w == x
    }

    /// Shares two or more vertices with `other`.
    pub fn conflicts(&self, other: &TwoPath) -> bool {
        other.vertices().iter().filter(|&&x| self.contains(x)).count() >= 2
    }
}

/// Read access needed to enumerate 2-paths in a fixed order.
pub trait TwoPathHost {
    /// Vertices of degree at least two, ascending.
    fn centers(&self) -> Vec<VertexId>;
    /// Neighbors of `v`, ascending.
    fn sorted_neighbors(&self, v: VertexId) -> Cow<'_, [VertexId]>;
}

impl TwoPathHost for AdjacencyGraph {
    fn centers(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.degree(v) >= 2).collect()
    }

    fn sorted_neighbors(&self, v: VertexId) -> Cow<'_, [VertexId]> {
        Cow::Owned(self.neighbors(v).collect())
    }
}

/// All 2-paths: centers ascending, neighbor pairs lexicographic.
pub fn enumerate_two_paths<H: TwoPathHost + ?Sized>(host: &H) -> Vec<TwoPath> {
    let mut out = Vec::new();
    for c in host.centers() {
        let nbrs = host.sorted_neighbors(c);
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                out.push(TwoPath::new(a, c, b));
            }
        }
    }
    out
}

/// Greedy maximal independent set in enumeration order, stopping once
/// `target` paths are selected.
pub fn greedy_independent<H: TwoPathHost + ?Sized>(host: &H, target: Option<usize>) -> Vec<TwoPath> {
    let target = target.unwrap_or(usize::MAX);
    let mut selected: Vec<TwoPath> = Vec::new();
    if target == 0 {
        return selected;
    }
    let mut at_vertex: HashMap<VertexId, Vec<usize>> = HashMap::new();
    for c in host.centers() {
        let nbrs = host.sorted_neighbors(c);
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                let blocked = |x: VertexId, others: [VertexId; 2]| {
                    at_vertex.get(&x).is_some_and(|ids| {
                        ids.iter()
                            .any(|&id| others.iter().any(|&y| selected[id].contains(y)))
                    })
                };
                if blocked(a, [c, b]) || blocked(c, [b, b]) {
                    continue;
                }
                let id = selected.len();
                selected.push(TwoPath::new(a, c, b));
                for x in [a, c, b] {
                    at_vertex.entry(x).or_default().push(id);
                }
                if selected.len() >= target {
                    return selected;
                }
            }
        }
    }
    selected
}

/// `min(greedy set size, target)`.
pub fn greedy_independent_count<H: TwoPathHost + ?Sized>(host: &H, target: usize) -> usize {
    greedy_independent(host, Some(target)).len()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndepError {
    #[error("{paths} 2-paths exceed the exhaustive search budget of {budget}")]
    BudgetExceeded { paths: usize, budget: usize },
    #[error("graph is not connected")]
    NotConnected,
    #[error("graph has an isolated edge")]
    HasIsolatedEdges,
    #[error("graph has no edges")]
    EmptyGraph,
}

/// Largest 2-path count accepted by [`exact_max_independent`].
pub const EXACT_BUDGET: usize = 24;

/// Maximum independent set of 2-paths by branch and bound.
pub fn exact_max_independent(g: &AdjacencyGraph) -> Result<usize, IndepError> {
    let paths = enumerate_two_paths(g);
    if paths.len() > EXACT_BUDGET {
        return Err(IndepError::BudgetExceeded {
            paths: paths.len(),
            budget: EXACT_BUDGET,
        });
    }
    let conflicts: Vec<u32> = paths
        .iter()
        .map(|p| {
            paths
                .iter()
                .enumerate()
                .filter(|(_, q)| p != *q && p.conflicts(q))
                .fold(0u32, |mask, (j, _)| mask | 1 << j)
        })
        .collect();

    fn search(candidates: u32, size: usize, best: &mut usize, conflicts: &[u32]) {
        if candidates == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + candidates.count_ones() as usize <= *best {
            return;
        }
        let i = candidates.trailing_zeros() as usize;
        let bit = 1u32 << i;
        search(candidates & !bit & !conflicts[i], size + 1, best, conflicts);
        search(candidates & !bit, size, best, conflicts);
    }

    let all = if paths.is_empty() { 0 } else { u32::MAX >> (32 - paths.len()) };
    let mut best = 0;
    search(all, 0, &mut best, &conflicts);
    Ok(best)
}

/// Independent set from a BFS spanning tree by repeatedly peeling the
/// deepest leaf with its parent's other child or with its grandparent.
/// On a connected graph with `|V| ≥ 3` it has at least `⌈|V|/2⌉ − 1` paths.
pub fn tree_peeling_witness(g: &AdjacencyGraph) -> Vec<TwoPath> {
    let Some(root) = g.touched_vertices().next() else {
        return Vec::new();
    };
    let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
    let mut depth: HashMap<VertexId, usize> = HashMap::from([(root, 0)]);
    let mut children: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for w in g.neighbors(v) {
            if !depth.contains_key(&w) {
                depth.insert(w, depth[&v] + 1);
                parent.insert(w, v);
                children.entry(v).or_default().push(w);
                order.push(w);
                queue.push_back(w);
            }
        }
    }

    let mut removed: HashMap<VertexId, bool> = HashMap::new();
    let mut alive = order.len();
    let mut out = Vec::new();
    // BFS order is non-decreasing in depth, so scanning it backwards visits deepest first.
    for &u in order.iter().rev() {
        if alive < 3 {
            break;
        }
        if removed.contains_key(&u) {
            continue;
        }
        let live_children = |x: VertexId, removed: &HashMap<VertexId, bool>| -> Vec<VertexId> {
            children
                .get(&x)
                .map(|cs| cs.iter().copied().filter(|c| !removed.contains_key(c)).collect())
                .unwrap_or_default()
        };
        if !live_children(u, &removed).is_empty() {
            continue;
        }
        let Some(&v) = parent.get(&u) else { break };
        let siblings: Vec<_> = live_children(v, &removed).into_iter().filter(|&c| c != u).collect();
        if let Some(&w) = siblings.first() {
            out.push(TwoPath::new(u, v, w));
            removed.insert(u, true);
            removed.insert(w, true);
        } else if let Some(&w) = parent.get(&v) {
            out.push(TwoPath::new(u, v, w));
            removed.insert(u, true);
            removed.insert(v, true);
        } else {
            break;
        }
        alive -= 2;
    }
    out
}

fn is_independent(paths: &[TwoPath]) -> bool {
    paths
        .iter()
        .enumerate()
        .all(|(i, p)| paths[i + 1..].iter().all(|q| !p.conflicts(q)))
}

fn components(g: &AdjacencyGraph) -> Vec<Vec<VertexId>> {
    let mut seen = vec![false; g.n() as usize + 1];
    let mut out = Vec::new();
    for s in g.touched_vertices() {
        if seen[s.index()] {
            continue;
        }
        seen[s.index()] = true;
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for w in g.neighbors(v) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        out.push(comp);
    }
    out
}

pub fn is_bipartite(g: &AdjacencyGraph) -> bool {
    let mut side: Vec<Option<bool>> = vec![None; g.n() as usize + 1];
    for s in g.touched_vertices() {
        if side[s.index()].is_some() {
            continue;
        }
        side[s.index()] = Some(false);
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            let sv = side[v.index()].unwrap();
            for w in g.neighbors(v) {
                match side[w.index()] {
                    None => {
                        side[w.index()] = Some(!sv);
                        stack.push(w);
                    }
                    Some(sw) if sw == sv => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// Independent-2-path lower bounds checked against witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowerBoundReport {
    pub vertices: usize,
    pub edges: usize,
    pub bipartite: bool,
    pub greedy: usize,
    pub tree_peeling: usize,
    /// Exhaustive optimum, when the graph is small enough.
    pub exact: Option<usize>,
    /// Largest verified independent set among the witnesses.
    pub witness: usize,
    /// `⌈|V|/2⌉ − 1`.
    #[serde(rename = "bound_L3")]
    pub bound_l3: usize,
    #[serde(rename = "bound_L3_satisfied")]
    pub bound_l3_satisfied: bool,
    /// `⌊m/9⌋`, only for bipartite graphs.
    #[serde(rename = "bound_L4")]
    pub bound_l4: Option<usize>,
    #[serde(rename = "bound_L4_satisfied")]
    pub bound_l4_satisfied: Option<bool>,
    /// `⌊m/18⌋`.
    pub bound_general: usize,
    pub bound_general_satisfied: bool,
    /// Unmet bounds; each is a counterexample candidate.
    pub violations: Vec<String>,
}

pub fn verify_lower_bounds(g: &AdjacencyGraph) -> Result<LowerBoundReport, IndepError> {
    let comps = components(g);
    if comps.is_empty() {
        return Err(IndepError::EmptyGraph);
    }
    if comps.iter().any(|c| c.len() == 2) {
        return Err(IndepError::HasIsolatedEdges);
    }
    if comps.len() > 1 {
        return Err(IndepError::NotConnected);
    }
    let vertices = comps[0].len();
    let m = g.m_live();

    let greedy = greedy_independent(g, None);
    let peeled = tree_peeling_witness(g);
    debug_assert!(is_independent(&greedy) && is_independent(&peeled));
    let exact = exact_max_independent(g).ok();
    let witness = greedy.len().max(peeled.len()).max(exact.unwrap_or(0));

    let bipartite = is_bipartite(g);
    let bound_l3 = vertices.div_ceil(2) - 1;
    let bound_l4 = bipartite.then_some(m / 9);
    let bound_general = m / 18;

    let mut violations = Vec::new();
    if witness < bound_l3 {
        violations.push(format!("L3: witness {witness} < {bound_l3}"));
    }
    if let Some(b) = bound_l4 {
        if witness < b {
            violations.push(format!("L4: witness {witness} < {b}"));
        }
    }
    if witness < bound_general {
        violations.push(format!("general: witness {witness} < {bound_general}"));
    }

    Ok(LowerBoundReport {
        vertices,
        edges: m,
        bipartite,
        greedy: greedy.len(),
        tree_peeling: peeled.len(),
        exact,
        witness,
        bound_l3,
        bound_l3_satisfied: witness >= bound_l3,
        bound_l4,
        bound_l4_satisfied: bound_l4.map(|b| witness >= b),
        bound_general,
        bound_general_satisfied: witness >= bound_general,
        violations,
    })
}
