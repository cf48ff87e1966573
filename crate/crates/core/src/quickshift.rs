//! Quickshift++ mode seeking on embedded data, used to pick the number of
//! mixture components and their starting moments.
//!
//! Densities are kNN estimates kept in the log domain, so the `(1 − β)`
//! persistence ratio becomes an additive `ln(1 − β)` offset. Every tie is
//! broken by point index.

use alloc::vec::Vec;
#[cfg(not(any(test, feature = "std")))]
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gmm::{default_reg, GmmInit};
use crate::matrix::{squared_distance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsConfig {
    pub beta: f64,
    /// Neighbor count; `None` means `ceil(n^{2/3})`.
    pub k_neighbors: Option<usize>,
    pub coverage: f64,
    pub max_clusters: usize,
}

impl Default for QsConfig {
    fn default() -> Self {
        Self {
            beta: 0.9,
            k_neighbors: None,
            coverage: 0.95,
            max_clusters: 20,
        }
    }
}

/// `ceil(n^{2/3})`, clamped to `n − 1`.
pub fn default_neighbors(n: usize) -> usize {
    let k = ((n as f64).powf(2.0 / 3.0) - 1e-9).ceil() as usize;
    k.clamp(1, n.saturating_sub(1).max(1))
}

/// Exact k-nearest-neighbor lists (self excluded), each sorted by distance then index.
#[derive(Debug, Clone)]
pub struct KnnGraph {
    k: usize,
    neighbors: Vec<usize>,
    distances: Vec<f64>,
}

impl KnnGraph {
    pub fn build(x: &Matrix, k: usize) -> Result<Self> {
        let n = x.rows();
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(
                "neighbor count must satisfy 0 < k < n",
            ));
        }
        let mut neighbors = Vec::with_capacity(n * k);
        let mut distances = Vec::with_capacity(n * k);
        let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        for i in 0..n {
            cand.clear();
            let xi = x.row(i);
            cand.extend(
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (squared_distance(xi, x.row(j)), j)),
            );
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by_dist);
                cand.truncate(k);
            }
            cand.sort_unstable_by(by_dist);
            for &(d2, j) in &cand {
                neighbors.push(j);
                distances.push(d2.sqrt());
            }
        }
        Ok(Self {
            k,
            neighbors,
            distances,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.neighbors.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    /// Distance to the `k`-th nearest neighbor.
    pub fn radius(&self, i: usize) -> f64 {
        self.distances[(i + 1) * self.k - 1]
    }
}

/// `ℓᵢ = −dim·ln(rᵢ)` with `rᵢ` the k-th neighbor distance. Zero radii are
/// replaced by `1e-3 ×` the smallest positive radius.
pub fn knn_log_density(graph: &KnnGraph, dim: usize) -> Result<Vec<f64>> {
    let n = graph.len();
    let floor = (0..n)
        .map(|i| graph.radius(i))
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        return Err(Error::Degenerate("all points are identical"));
    }
    Ok((0..n)
        .map(|i| {
            let r = graph.radius(i);
            let r = if r > 0.0 { r } else { 1e-3 * floor };
            -(dim as f64) * r.ln()
        })
        .collect())
}

/// Indices sorted by decreasing density, ties by index.
fn density_order(densities: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..densities.len()).collect();
    order.sort_by(|&a, &b| densities[b].total_cmp(&densities[a]).then(a.cmp(&b)));
    order
}

struct Components {
    parent: Vec<usize>,
    /// Per root: processing rank of the component's peak point.
    peak_rank: Vec<usize>,
    peak: Vec<f64>,
    members: Vec<Vec<usize>>,
    frozen: Vec<bool>,
}

impl Components {
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }
}

/// Union-find sweep in decreasing density. A component B is frozen as a core
/// when it merges into a higher-peaked component at a level below
/// `λ_B + ln(1 − β)`; each surviving component finally contributes its members
/// above `λ_root + ln(1 − β)`. Returned cores are disjoint.
pub fn cluster_cores(graph: &KnnGraph, densities: &[f64], beta: f64) -> Result<Vec<Vec<usize>>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter("beta must lie in (0, 1)"));
    }
    let n = densities.len();
    if graph.len() != n {
        return Err(Error::DimensionMismatch {
            expected: graph.len(),
            got: n,
        });
    }
    let drop = (1.0 - beta).ln();
    let order = density_order(densities);
    let mut c = Components {
        parent: (0..n).collect(),
        peak_rank: alloc::vec![usize::MAX; n],
        peak: alloc::vec![f64::NAN; n],
        members: (0..n).map(|_| Vec::new()).collect(),
        frozen: alloc::vec![false; n],
    };
    let mut processed = alloc::vec![false; n];
    let mut assigned = alloc::vec![false; n];
    let mut cores: Vec<Vec<usize>> = Vec::new();

    let mut freeze = |members: &[usize], keep: &dyn Fn(usize) -> bool, assigned: &mut [bool]| {
        let core: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&p| !assigned[p] && keep(p))
            .collect();
        for &p in &core {
            assigned[p] = true;
        }
        if !core.is_empty() {
            cores.push(core);
        }
    };

    for (rank, &i) in order.iter().enumerate() {
        let level = densities[i];
        c.peak_rank[i] = rank;
        c.peak[i] = level;
        c.members[i].push(i);
        for &nb in graph.neighbors(i) {
            if !processed[nb] {
                continue;
            }
            let (ri, rn) = (c.find(i), c.find(nb));
            if ri == rn {
                continue;
            }
            let (a, b) = if c.peak_rank[ri] < c.peak_rank[rn] {
                (ri, rn)
            } else {
                (rn, ri)
            };
            if level < c.peak[b] + drop && !c.frozen[b] {
                c.frozen[b] = true;
                freeze(&c.members[b], &|_| true, &mut assigned);
            }
            let moved = core::mem::take(&mut c.members[b]);
            c.members[a].extend(moved);
            c.parent[b] = a;
        }
        processed[i] = true;
    }

    let mut roots: Vec<usize> = (0..n).filter(|&i| c.parent[i] == i).collect();
    roots.sort_by_key(|&r| c.peak_rank[r]);
    for r in roots {
        if c.frozen[r] {
            continue;
        }
        let threshold = c.peak[r] + drop;
        freeze(&c.members[r], &|p| densities[p] >= threshold, &mut assigned);
    }
    Ok(cores)
}

/// Hill-climbs every non-core point to the nearest point of strictly higher
/// density (kNN list first, then all points) until a core is reached.
pub fn quickshift_assign(
    x: &Matrix,
    graph: &KnnGraph,
    densities: &[f64],
    cores: &[Vec<usize>],
) -> Result<Vec<usize>> {
    if cores.is_empty() {
        return Err(Error::Empty("no cluster cores"));
    }
    let n = densities.len();
    let order = density_order(densities);
    let mut rank = alloc::vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut label: Vec<Option<usize>> = alloc::vec![None; n];
    for (c, core) in cores.iter().enumerate() {
        for &p in core {
            label[p] = Some(c);
        }
    }
    let mut parent = alloc::vec![usize::MAX; n];
    for i in 0..n {
        if label[i].is_some() {
            continue;
        }
        parent[i] = match graph
            .neighbors(i)
            .iter()
            .copied()
            .find(|&j| rank[j] < rank[i])
        {
            Some(j) => j,
            None => {
                let xi = x.row(i);
                let mut best = (usize::MAX, f64::INFINITY);
                for j in 0..n {
                    if rank[j] < rank[i] {
                        let d = squared_distance(xi, x.row(j));
                        if d < best.1 || (d == best.1 && j < best.0) {
                            best = (j, d);
                        }
                    }
                }
                if best.0 == usize::MAX {
                    return Err(Error::Degenerate("densest point is not in any core"));
                }
                best.0
            }
        };
    }
    // resolving in decreasing density guarantees parents are labeled first
    for &i in &order {
        if label[i].is_none() {
            label[i] = label[parent[i]];
        }
    }
    label
        .into_iter()
        .map(|l| l.ok_or(Error::Degenerate("unlabeled point")))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub label: usize,
    pub size: usize,
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    /// `size / n`.
    pub weight: f64,
}

/// Retained clusters and the mixture initialization built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSelection {
    pub k: usize,
    pub clusters: Vec<ClusterSummary>,
    pub init: GmmInit,
}

/// Keeps the smallest set of largest clusters covering `coverage·n` points,
/// capped at `cap`. Covariances get a `1e-6·tr(Σ)/d` ridge.
pub fn select_components(
    x: &Matrix,
    labels: &[usize],
    coverage: f64,
    cap: usize,
) -> Result<ComponentSelection> {
    let n = labels.len();
    if n == 0 || x.rows() != n {
        return Err(Error::Empty("no labeled points"));
    }
    if cap == 0 {
        return Err(Error::InvalidParameter("cluster cap must be positive"));
    }
    let n_labels = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = alloc::vec![0usize; n_labels];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut by_size: Vec<usize> = (0..n_labels).filter(|&l| sizes[l] > 0).collect();
    if by_size.is_empty() {
        return Err(Error::Empty("zero clusters"));
    }
    by_size.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));

    let target = coverage * n as f64;
    let mut keep = 0;
    let mut covered = 0usize;
    for &l in &by_size {
        if keep == cap || covered as f64 >= target {
            break;
        }
        covered += sizes[l];
        keep += 1;
    }
    by_size.truncate(keep);

    let ridge = default_reg(x);
    let d = x.cols();
    let mut clusters = Vec::with_capacity(keep);
    for &l in &by_size {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == l).collect();
        let sub = x.select_rows(&members);
        let mut covariance = sub.covariance();
        for j in 0..d {
            covariance[(j, j)] += ridge;
        }
        clusters.push(ClusterSummary {
            label: l,
            size: members.len(),
            mean: sub.column_means(),
            covariance,
            weight: members.len() as f64 / n as f64,
        });
    }
    let mut means = Matrix::zeros(keep, d);
    for (i, c) in clusters.iter().enumerate() {
        means.row_mut(i).copy_from_slice(&c.mean);
    }
    let init = GmmInit {
        weights: clusters
            .iter()
            .map(|c| c.size as f64 / covered as f64)
            .collect(),
        means,
        covariances: clusters.iter().map(|c| c.covariance.clone()).collect(),
    };
    Ok(ComponentSelection {
        k: keep,
        clusters,
        init,
    })
}

/// Full mode-seeking pipeline result.
#[derive(Debug, Clone)]
pub struct AutoK {
    pub k: usize,
    pub init: GmmInit,
    pub labels: Vec<usize>,
    pub n_cores: usize,
    pub selection: ComponentSelection,
}

pub fn auto_k(x: &Matrix, config: &QsConfig) -> Result<AutoK> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let k_nn = config.k_neighbors.unwrap_or_else(|| default_neighbors(n));
    let graph = KnnGraph::build(x, k_nn)?;
    let densities = knn_log_density(&graph, x.cols())?;
    let cores = cluster_cores(&graph, &densities, config.beta)?;
    let labels = quickshift_assign(x, &graph, &densities, &cores)?;
    let selection = select_components(x, &labels, config.coverage, config.max_clusters)?;
    Ok(AutoK {
        k: selection.k,
        init: selection.init.clone(),
        labels,
        n_cores: cores.len(),
        selection,
    })
}

/// Component counts searched when `k` is tuned instead of chosen by mode seeking.
pub const K_GRID: [usize; 10] = [1, 4, 6, 8, 10, 12, 14, 16, 18, 20];
