//! Monochromatic sparsification and uniform 2-path sampling.
//!
//! A [`SparsifiedGraph`] keeps only edges whose endpoints received the same
//! color. Vertices of degree at least two are grouped into levels: a vertex
//! with `P2(v) = C(d_v, 2)` lives in level `i` where
//! `2^i ≤ P2(v) ≤ 2^(i+1) − 1`. Degree-one vertices sit in a separate
//! singleton bucket and degree-zero vertices are dropped.
//!
//! Every bucket stores its members in an array with a position index, so a
//! member can be removed by swap-remove and a uniform member can be drawn in
//! constant time. Sampling draws level `i` with probability proportional to
//! `|H_i|·(2^(i+1)−1)`, a uniform member `v`, accepts it with probability
//! `C(d_v,2)/(2^(i+1)−1)`, restarting from scratch on rejection, and finally
//! draws a uniform pair of neighbors of `v`. Each vertex is then accepted
//! with probability proportional to `C(d_v,2)`, so the result is exactly
//! uniform, and a draw succeeds with probability above one half.
//!
//! Weighting levels by their 2-path totals instead would bias the sample:
//! the acceptance step already accounts for `C(d_v,2)`.

use std::borrow::Cow;
use std::collections::HashMap;

use rand::Rng;
use thiserror::Error;

use crate::hashing::mix;
use crate::indep_paths::{TwoPath, TwoPathHost};
use crate::oracles::choose2;
use crate::stream::{EdgeEvent, Sign, VertexId};

/// Seeded coloring `V → {1, …, colors}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColoringFunction {
    seed: u64,
    colors: u32,
}

impl ColoringFunction {
    pub fn new(seed: u64, colors: u32) -> Self {
        assert!(colors >= 1, "at least one color is required");
        Self { seed, colors }
    }

    #[inline]
    pub fn color(&self, v: VertexId) -> u32 {
        if self.colors == 1 {
            return 1;
        }
        1 + (mix(self.seed, v.get() as u64) % self.colors as u64) as u32
    }

    pub fn colors(&self) -> u32 {
        self.colors
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Per-vertex sampling probability `1/colors`.
    pub fn p(&self) -> f64 {
        1.0 / self.colors as f64
    }

    #[inline]
    pub fn is_monochromatic(&self, u: VertexId, v: VertexId) -> bool {
        self.colors == 1 || self.color(u) == self.color(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SparsifyError {
    #[error("monochromatic edge ({0}, {1}) inserted twice")]
    DuplicateInsert(VertexId, VertexId),
    #[error("monochromatic edge ({0}, {1}) deleted but not present")]
    InconsistentDelete(VertexId, VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Single,
    Level(usize),
}

fn slot_for(degree: usize) -> Option<Slot> {
    match degree {
        0 => None,
        1 => Some(Slot::Single),
        d => {
            let paths = choose2(d as u64);
            Some(Slot::Level(63 - paths.leading_zeros() as usize))
        }
    }
}

#[derive(Debug, Clone)]
struct VertexEntry {
    neighbors: Vec<VertexId>,
    slot: Slot,
    pos: usize,
}

#[derive(Debug, Clone, Default)]
struct Bucket {
    members: Vec<VertexId>,
    p2: u64,
}

/// Sparsified graph with level buckets; see the module docs.
#[derive(Debug, Clone)]
pub struct SparsifiedGraph {
    coloring: ColoringFunction,
    vertices: HashMap<VertexId, VertexEntry>,
    /// Key `(a, b)` with `a < b`; value is (index of `b` in `N(a)`, index of `a` in `N(b)`).
    edges: HashMap<(VertexId, VertexId), (usize, usize)>,
    single: Bucket,
    levels: Vec<Bucket>,
    p2_total: u64,
}

/// `⌊2·log₂ n⌋ + 1`.
pub fn level_count(n: u32) -> usize {
    (2.0 * (n.max(2) as f64).log2()).floor() as usize + 1
}

impl SparsifiedGraph {
    pub fn new(n: u32, coloring: ColoringFunction) -> Self {
        Self {
            coloring,
            vertices: HashMap::new(),
            edges: HashMap::new(),
            single: Bucket::default(),
            levels: vec![Bucket::default(); level_count(n)],
            p2_total: 0,
        }
    }

    pub fn coloring(&self) -> &ColoringFunction {
        &self.coloring
    }

    /// Live monochromatic edge count `m'`.
    pub fn m_prime(&self) -> usize {
        self.edges.len()
    }

    pub fn p2_total(&self) -> u64 {
        self.p2_total
    }

    pub fn level_p2(&self) -> Vec<u64> {
        self.levels.iter().map(|b| b.p2).collect()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Level of `v`: `Some(Some(i))` for level `i`, `Some(None)` for the
    /// singleton bucket, `None` if `v` has no sparsified edge.
    pub fn level_of(&self, v: VertexId) -> Option<Option<usize>> {
        self.vertices.get(&v).map(|e| match e.slot {
            Slot::Single => None,
            Slot::Level(i) => Some(i),
        })
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.vertices.get(&v).map_or(0, |e| e.neighbors.len())
    }

    pub fn has_edge(&self, u: VertexId, w: VertexId) -> bool {
        self.edges.contains_key(&(u.min(w), u.max(w)))
    }

    /// Live sparsified edges, sorted.
    pub fn edge_list(&self) -> Vec<(VertexId, VertexId)> {
        let mut out: Vec<_> = self.edges.keys().copied().collect();
        out.sort_unstable();
        out
    }

    /// Applies `e` if it is monochromatic; returns whether it was.
    pub fn update(&mut self, e: &EdgeEvent) -> Result<bool, SparsifyError> {
        let (u, v) = e.endpoints();
        if !self.coloring.is_monochromatic(u, v) {
            return Ok(false);
        }
        match e.sign() {
            Sign::Insert => self.insert_edge(u, v)?,
            Sign::Delete => self.delete_edge(u, v)?,
        }
        Ok(true)
    }

    fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), SparsifyError> {
        if self.edges.contains_key(&(u, v)) {
            return Err(SparsifyError::DuplicateInsert(u, v));
        }
        let pu = self.push_neighbor(u, v);
        let pv = self.push_neighbor(v, u);
        self.edges.insert((u, v), (pu, pv));
        self.rebucket(u, pu);
        self.rebucket(v, pv);
        Ok(())
    }

    fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), SparsifyError> {
        let (pu, pv) = self
            .edges
            .remove(&(u, v))
            .ok_or(SparsifyError::InconsistentDelete(u, v))?;
        let du = self.remove_neighbor(u, pu);
        let dv = self.remove_neighbor(v, pv);
        self.rebucket(u, du + 1);
        self.rebucket(v, dv + 1);
        Ok(())
    }

    fn push_neighbor(&mut self, owner: VertexId, nbr: VertexId) -> usize {
        let entry = self.vertices.entry(owner).or_insert_with(|| VertexEntry {
            neighbors: Vec::new(),
            slot: Slot::Single,
            pos: 0,
        });
        entry.neighbors.push(nbr);
        entry.neighbors.len() - 1
    }

    /// Returns the new degree of `owner`.
    fn remove_neighbor(&mut self, owner: VertexId, pos: usize) -> usize {
        let entry = self.vertices.get_mut(&owner).expect("endpoint of a live edge");
        entry.neighbors.swap_remove(pos);
        let degree = entry.neighbors.len();
        if let Some(&moved) = entry.neighbors.get(pos) {
            self.set_neighbor_pos(owner, moved, pos);
        }
        degree
    }

    fn set_neighbor_pos(&mut self, owner: VertexId, nbr: VertexId, pos: usize) {
        if owner < nbr {
            self.edges.get_mut(&(owner, nbr)).expect("live edge").0 = pos;
        } else {
            self.edges.get_mut(&(nbr, owner)).expect("live edge").1 = pos;
        }
    }

    fn bucket_mut(&mut self, slot: Slot) -> &mut Bucket {
        match slot {
            Slot::Single => &mut self.single,
            Slot::Level(i) => &mut self.levels[i],
        }
    }

    fn bucket(&self, slot: Slot) -> &Bucket {
        match slot {
            Slot::Single => &self.single,
            Slot::Level(i) => &self.levels[i],
        }
    }

    /// Moves `v` from the bucket of `old_degree` to the bucket of its
    /// current degree and adjusts the 2-path totals.
    fn rebucket(&mut self, v: VertexId, old_degree: usize) {
        let degree = self.vertices[&v].neighbors.len();
        let old_paths = choose2(old_degree as u64);
        let new_paths = choose2(degree as u64);
        self.p2_total = self.p2_total - old_paths + new_paths;

        let old_slot = slot_for(old_degree);
        let new_slot = slot_for(degree);
        if old_slot == new_slot {
            if let Some(slot) = old_slot {
                let b = self.bucket_mut(slot);
                b.p2 = b.p2 - old_paths + new_paths;
            }
            return;
        }
        if let Some(slot) = old_slot {
            let pos = self.vertices[&v].pos;
            let b = self.bucket_mut(slot);
            b.p2 -= old_paths;
            b.members.swap_remove(pos);
            if let Some(&moved) = b.members.get(pos) {
                self.vertices.get_mut(&moved).expect("bucket member").pos = pos;
            }
        }
        match new_slot {
            None => {
                self.vertices.remove(&v);
            }
            Some(slot) => {
                let b = self.bucket_mut(slot);
                b.members.push(v);
                b.p2 += new_paths;
                let pos = b.members.len() - 1;
                let e = self.vertices.get_mut(&v).expect("present");
                e.slot = slot;
                e.pos = pos;
            }
        }
    }

    /// Draws a uniform 2-path of the sparsified graph, `None` if there is none.
    pub fn sample_two_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<TwoPath> {
        self.sample_counted(rng).map(|(p, _)| p)
    }

    /// Like [`sample_two_path`](Self::sample_two_path), also returning the
    /// number of vertex draws (1 + rejections).
    pub fn sample_counted<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(TwoPath, u32)> {
        if self.p2_total == 0 {
            return None;
        }
        // envelope mass of each level: members times the acceptance cap
        let caps: Vec<u128> = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, b)| b.members.len() as u128 * ((1u128 << (i + 1)) - 1))
            .collect();
        let cap_total: u128 = caps.iter().sum();
        let mut draws = 0u32;
        loop {
            draws += 1;
            let target = rng.gen_range(1..=cap_total);
            let mut acc = 0u128;
            let mut level = caps.len() - 1;
            for (i, &c) in caps.iter().enumerate() {
                acc += c;
                if acc >= target {
                    level = i;
                    break;
                }
            }
            let bucket = &self.levels[level];
            let v = bucket.members[rng.gen_range(0..bucket.members.len())];
            let nbrs = &self.vertices[&v].neighbors;
            let cap = (1u128 << (level + 1)) - 1;
            if rng.gen_range(0..cap) >= choose2(nbrs.len() as u64) as u128 {
                continue;
            }
            let d = nbrs.len();
            let a = rng.gen_range(0..d);
            let mut b = rng.gen_range(0..d - 1);
            if b >= a {
                b += 1;
            }
            return Some((TwoPath::new(nbrs[a], v, nbrs[b]), draws));
        }
    }

    /// Sorts bucket members and neighbor lists, making subsequent sampling
    /// depend only on the edge set and the random source.
    pub fn canonicalize(&mut self) {
        let mut slots: Vec<Slot> = vec![Slot::Single];
        slots.extend((0..self.levels.len()).map(Slot::Level));
        for slot in slots {
            let b = self.bucket_mut(slot);
            b.members.sort_unstable();
            let members = b.members.clone();
            for (pos, v) in members.into_iter().enumerate() {
                self.vertices.get_mut(&v).expect("bucket member").pos = pos;
            }
        }
        for e in self.vertices.values_mut() {
            e.neighbors.sort_unstable();
        }
        let Self { vertices, edges, .. } = self;
        for (&owner, e) in vertices.iter() {
            for (pos, &nbr) in e.neighbors.iter().enumerate() {
                if owner < nbr {
                    edges.get_mut(&(owner, nbr)).expect("live edge").0 = pos;
                } else {
                    edges.get_mut(&(nbr, owner)).expect("live edge").1 = pos;
                }
            }
        }
    }

    /// Recomputes every derived field from the edge set and compares it with
    /// the incremental state.
    pub fn audit(&self) -> Result<(), String> {
        let mut degree: HashMap<VertexId, usize> = HashMap::new();
        for (&(a, b), &(pa, pb)) in &self.edges {
            if a >= b {
                return Err(format!("edge key ({a}, {b}) not normalized"));
            }
            if !self.coloring.is_monochromatic(a, b) {
                return Err(format!("bichromatic edge ({a}, {b}) stored"));
            }
            let na = self.vertices.get(&a).ok_or(format!("missing vertex {a}"))?;
            let nb = self.vertices.get(&b).ok_or(format!("missing vertex {b}"))?;
            if na.neighbors.get(pa) != Some(&b) || nb.neighbors.get(pb) != Some(&a) {
                return Err(format!("stale neighbor positions for edge ({a}, {b})"));
            }
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
        }
        if degree.len() != self.vertices.len() {
            return Err(format!(
                "{} vertices stored but {} have edges",
                self.vertices.len(),
                degree.len()
            ));
        }

        let mut level_p2 = vec![0u64; self.levels.len()];
        let mut level_size = vec![0usize; self.levels.len()];
        let mut singles = 0usize;
        for (&v, e) in &self.vertices {
            let d = degree[&v];
            if e.neighbors.len() != d {
                return Err(format!("vertex {v}: list length {} vs degree {d}", e.neighbors.len()));
            }
            let want = slot_for(d).expect("degree at least one");
            if e.slot != want {
                return Err(format!("vertex {v} with degree {d} in {:?}, expected {want:?}", e.slot));
            }
            if self.bucket(e.slot).members.get(e.pos) != Some(&v) {
                return Err(format!("vertex {v}: stale bucket position"));
            }
            match want {
                Slot::Single => singles += 1,
                Slot::Level(i) => {
                    let paths = choose2(d as u64);
                    if !(1u64 << i <= paths && paths < 1u64 << (i + 1)) {
                        return Err(format!("vertex {v}: P2 {paths} outside level {i}"));
                    }
                    level_p2[i] += paths;
                    level_size[i] += 1;
                }
            }
        }
        if singles != self.single.members.len() {
            return Err("singleton bucket size mismatch".into());
        }
        for (i, b) in self.levels.iter().enumerate() {
            if b.p2 != level_p2[i] || b.members.len() != level_size[i] {
                return Err(format!(
                    "level {i}: stored (p2 {}, size {}), recomputed ({}, {})",
                    b.p2,
                    b.members.len(),
                    level_p2[i],
                    level_size[i]
                ));
            }
        }
        let total: u64 = level_p2.iter().sum();
        if total != self.p2_total {
            return Err(format!("P2 total {} vs recomputed {total}", self.p2_total));
        }
        Ok(())
    }
}

impl TwoPathHost for SparsifiedGraph {
    fn centers(&self) -> Vec<VertexId> {
        let mut out: Vec<_> = self
            .vertices
            .iter()
            .filter(|(_, e)| e.neighbors.len() >= 2)
            .map(|(&v, _)| v)
            .collect();
        out.sort_unstable();
        out
    }

    fn sorted_neighbors(&self, v: VertexId) -> Cow<'_, [VertexId]> {
        match self.vertices.get(&v) {
            None => Cow::Borrowed(&[]),
            Some(e) if e.neighbors.is_sorted() => Cow::Borrowed(&e.neighbors),
            Some(e) => {
                let mut nbrs = e.neighbors.clone();
                nbrs.sort_unstable();
                Cow::Owned(nbrs)
            }
        }
    }
}
