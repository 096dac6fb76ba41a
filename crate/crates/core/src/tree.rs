//! Uniform-attachment trees and the subtree product centrality
//! `phi(v) = prod_{u != v} |subtree of u when rooted at v|`.
//!
//! Vertices are labeled `1..=n` in arrival order. Only `ln phi` is stored:
//! `phi` itself overflows fixed-width integers for trees with a few hundred
//! vertices.
//!
//! Uniform attachment here means vertex `k` picks its parent uniformly from
//! the `k - 1` vertices already present.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::Stream;

/// Tree in arrival order: `parent_of(v) < v` for every `v >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowingTree {
    // parents[i] is the parent label of vertex i + 2
    parents: Vec<usize>,
}

impl GrowingTree {
    /// Builds from the parent labels of vertices `2..=n`, in order.
    pub fn from_parents(parents: Vec<usize>) -> Result<Self> {
        for (i, &p) in parents.iter().enumerate() {
            let v = i + 2;
            if p < 1 || p >= v {
                return Err(invalid(format!(
                    "vertex {v} has parent {p}; parents must precede their children"
                )));
            }
        }
        Ok(Self { parents })
    }

    pub fn single() -> Self {
        Self { parents: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.parents.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Parent of `v`, `None` for the root.
    pub fn parent_of(&self, v: usize) -> Option<usize> {
        if v >= 2 {
            self.parents.get(v - 2).copied()
        } else {
            None
        }
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents.iter().enumerate().map(|(i, &p)| (p, i + 2))
    }

    pub fn to_tree(&self) -> Tree {
        Tree::from_edges(self.len(), self.edges()).expect("arrival-order trees are trees")
    }
}

/// An unrooted tree on labels `1..=n`, in compressed adjacency form.
#[derive(Clone, Debug)]
pub struct Tree {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Tree {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("a tree needs at least one vertex"));
        }
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        if edges.len() != n - 1 {
            return Err(invalid(format!(
                "a tree on {n} vertices has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut degree = vec![0usize; n + 1];
        for &(a, b) in &edges {
            for v in [a, b] {
                if v == 0 || v > n {
                    return Err(Error::InvalidVertex { vertex: v, n });
                }
            }
            if a == b {
                return Err(invalid(format!("self loop at {a}")));
            }
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = vec![0usize; n + 2];
        for v in 1..=n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; 2 * (n - 1)];
        for &(a, b) in &edges {
            targets[fill[a]] = b;
            fill[a] += 1;
            targets[fill[b]] = a;
            fill[b] += 1;
        }
        let tree = Self { offsets, targets };
        if tree.bfs_order(1).len() != n {
            return Err(invalid("edge set is not connected"));
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.len() {
            Err(Error::InvalidVertex { vertex: v, n: self.len() })
        } else {
            Ok(())
        }
    }

    /// Breadth-first order from `root` with each vertex's parent (0 for the root).
    fn bfs_order(&self, root: usize) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut seen = vec![false; n + 1];
        let mut order = Vec::with_capacity(n);
        seen[root] = true;
        order.push((root, 0));
        let mut head = 0;
        while head < order.len() {
            let (v, _) = order[head];
            head += 1;
            for &w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    order.push((w, v));
                }
            }
        }
        order
    }

    /// Subtree sizes with the tree rooted at `root`, indexed by label.
    pub fn subtree_sizes(&self, root: usize) -> Result<Vec<usize>> {
        self.check_vertex(root)?;
        let order = self.bfs_order(root);
        let mut size = vec![1usize; self.len() + 1];
        size[0] = 0;
        for &(v, p) in order.iter().skip(1).rev() {
            size[p] += size[v];
        }
        Ok(size)
    }

    /// Depths from `root`, indexed by label.
    pub fn depths(&self, root: usize) -> Result<Vec<usize>> {
        self.check_vertex(root)?;
        let mut depth = vec![0usize; self.len() + 1];
        for (v, p) in self.bfs_order(root).into_iter().skip(1) {
            depth[v] = depth[p] + 1;
        }
        Ok(depth)
    }

    /// `ln phi(v)` by rooting at `v` and summing log subtree sizes. O(n).
    pub fn log_phi_direct(&self, v: usize) -> Result<f64> {
        let size = self.subtree_sizes(v)?;
        Ok((1..=self.len())
            .filter(|&u| u != v)
            .map(|u| (size[u] as f64).ln())
            .sum())
    }

    /// `ln phi` at every vertex in O(n) by rerooting from vertex 1.
    pub fn log_phi_all(&self) -> CentralityTable {
        let n = self.len();
        let order = self.bfs_order(1);
        let mut size = vec![1usize; n + 1];
        size[0] = 0;
        for &(v, p) in order.iter().skip(1).rev() {
            size[p] += size[v];
        }
        let mut log_phi = vec![0.0; n + 1];
        log_phi[1] = order.iter().skip(1).map(|&(v, _)| (size[v] as f64).ln()).sum();
        for &(v, p) in order.iter().skip(1) {
            log_phi[v] = reroot_step(log_phi[p], n, size[v]);
        }
        CentralityTable::new(log_phi, size)
    }
}

// Moving the root from a vertex to its child w only changes two factors:
// w's subtree (size s) is replaced by the parent side (size n - s).
fn reroot_step(parent_log_phi: f64, n: usize, s: usize) -> f64 {
    parent_log_phi + ((n - s) as f64).ln() - (s as f64).ln()
}

/// Per-vertex `ln phi` and subtree sizes relative to vertex 1.
///
/// Both vectors are indexed by label; slot 0 is unused.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralityTable {
    pub log_phi: Vec<f64>,
    pub subtree_size: Vec<usize>,
}

impl CentralityTable {
    fn new(mut log_phi: Vec<f64>, subtree_size: Vec<usize>) -> Self {
        // phi >= 1, so anything below 0 is rounding.
        for x in log_phi.iter_mut().skip(1) {
            *x = x.max(0.0);
        }
        Self {
            log_phi,
            subtree_size,
        }
    }

    pub fn len(&self) -> usize {
        self.log_phi.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, v: usize) -> Option<f64> {
        if v == 0 {
            None
        } else {
            self.log_phi.get(v).copied()
        }
    }
}

pub fn grow_uniform_attachment(n: usize, rng: &mut Stream) -> Result<GrowingTree> {
    if n < 1 {
        return Err(invalid("n must be at least 1"));
    }
    let parents = (2..=n).map(|k| rng.random_range(1..k)).collect();
    Ok(GrowingTree { parents })
}

pub fn log_phi_direct(tree: &GrowingTree, v: usize) -> Result<f64> {
    if v == 0 || v > tree.len() {
        return Err(Error::InvalidVertex { vertex: v, n: tree.len() });
    }
    tree.to_tree().log_phi_direct(v)
}

/// `ln phi` for every vertex of an arrival-order tree in O(n).
///
/// Arrival order means a reverse scan accumulates subtree sizes under vertex 1
/// and a forward scan visits parents before children, so no traversal is needed.
pub fn log_phi_all(tree: &GrowingTree) -> CentralityTable {
    let n = tree.len();
    let mut size = vec![1usize; n + 1];
    size[0] = 0;
    for v in (2..=n).rev() {
        size[tree.parents[v - 2]] += size[v];
    }
    let mut log_phi = vec![0.0; n + 1];
    log_phi[1] = (2..=n).map(|v| (size[v] as f64).ln()).sum();
    for v in 2..=n {
        log_phi[v] = reroot_step(log_phi[tree.parents[v - 2]], n, size[v]);
    }
    CentralityTable::new(log_phi, size)
}

// Values closer than this are treated as ties and ordered by label.
const TIE_TOLERANCE: f64 = 1e-9;

/// The `k` vertices with the smallest `ln phi`, ascending by `(ln phi, label)`.
pub fn top_k_central(table: &CentralityTable, k: usize) -> Result<Vec<usize>> {
    let n = table.len();
    if k < 1 || k > n {
        return Err(invalid(format!("K must lie in 1..={n}, got {k}")));
    }
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&a, &b| {
        table.log_phi[a]
            .total_cmp(&table.log_phi[b])
            .then(a.cmp(&b))
    });
    // Rerooting reaches equal values along different paths, so equal phi can
    // differ in the last bits. Group near-equal runs and order them by label.
    let mut start = 0;
    while start < order.len() {
        let anchor = table.log_phi[order[start]];
        let mut end = start + 1;
        while end < order.len()
            && table.log_phi[order[end]] - anchor <= TIE_TOLERANCE * (1.0 + anchor.abs())
        {
            end += 1;
        }
        order[start..end].sort_unstable();
        if end >= k {
            break;
        }
        start = end;
    }
    order.truncate(k);
    Ok(order)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Binomial standard error; undefined for a single trial.
    pub std_error: Option<f64>,
}

impl TrialRecord {
    fn from_counts(n: usize, k: usize, trials: usize, successes: usize) -> Self {
        let rate = successes as f64 / trials as f64;
        let std_error = (trials > 1).then(|| (rate * (1.0 - rate) / trials as f64).sqrt());
        Self {
            n,
            k,
            trials,
            successes,
            success_rate: rate,
            std_error,
        }
    }
}

/// Grows `trials` trees of size `n` and reports how often vertex 1 lands among
/// the `k` most central vertices.
///
/// Trial `i` uses the substream `stream.derive("root-finding", i)`, so results
/// do not depend on thread scheduling, and calls that differ only in `k` see
/// the same trees.
pub fn root_finding_trial(n: usize, k: usize, trials: usize, stream: &Stream) -> Result<TrialRecord> {
    Ok(root_finding_sweep(n, &[k], trials, stream)?.remove(0))
}

/// [`root_finding_trial`] for several `k` on a shared set of trees.
pub fn root_finding_sweep(
    n: usize,
    ks: &[usize],
    trials: usize,
    stream: &Stream,
) -> Result<Vec<TrialRecord>> {
    if n < 1 {
        return Err(invalid("n must be at least 1"));
    }
    if trials < 1 {
        return Err(invalid("trials must be at least 1"));
    }
    if let Some(&bad) = ks.iter().find(|&&k| k < 1 || k > n) {
        return Err(invalid(format!("K must lie in 1..={n}, got {bad}")));
    }
    let k_max = ks.iter().copied().max().unwrap_or(1);
    // Rank of vertex 1 within the top k_max (None if it ranks lower).
    let ranks: Vec<Option<usize>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.derive("root-finding", i as u64);
            let tree = grow_uniform_attachment(n, &mut rng)?;
            let top = top_k_central(&log_phi_all(&tree), k_max)?;
            Ok(top.iter().position(|&v| v == 1))
        })
        .collect::<Result<_>>()?;
    Ok(ks
        .iter()
        .map(|&k| {
            let successes = ranks.iter().filter(|r| matches!(r, Some(p) if *p < k)).count();
            TrialRecord::from_counts(n, k, trials, successes)
        })
        .collect())
}
