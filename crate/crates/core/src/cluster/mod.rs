//! Clustering algorithms over grid curves, coefficient vectors and score rows.
//!
//! Labels are 0-based internally and canonical: clusters are numbered in
//! order of their smallest member. Persisted records use 1-based labels.

pub mod distance;
pub mod dtw;
pub mod fuzzy;
pub mod gmm;
pub mod hierarchical;
pub mod kmeans;
pub mod pam;
pub mod pipeline;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use distance::{DistanceMatrix, Metric};
pub use dtw::dtw_distance;
pub use fuzzy::{fuzzy_cmeans, FuzzyClustering};
pub use gmm::{gmm_bic_select, gmm_em, Covariance, GmmModel, GmmOptions};
pub use hierarchical::{hierarchical, linkage_tree, Linkage, Merge};
pub use kmeans::kmeans;
pub use pam::pam;
pub use pipeline::{
    cluster_pipeline, fpc_scores, run_route, smooth_cohort, write_memberships_csv, read_memberships_csv,
    ClusterParams, ClusteringRecord, CovarianceChoice, Route, RouteInput, RouteResult,
};

/// Hard partition of `n` items into `k` nonempty clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub k: usize,
    /// Per-cluster representative; empty when the algorithm only sees distances.
    pub centers: Vec<Vec<f64>>,
    /// Medoid item indices for medoid-based methods.
    pub medoids: Option<Vec<usize>>,
    pub objective: f64,
    /// Objective after each iteration of the returned run.
    pub trace: Vec<f64>,
    pub seed: u64,
    pub iterations: usize,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == c).collect()
    }

    /// Renumbers clusters by smallest member, permuting centers and medoids.
    pub(crate) fn canonicalize(mut self) -> Self {
        let perm = canonical_permutation(&self.labels, self.k);
        for l in self.labels.iter_mut() {
            *l = perm[*l];
        }
        if !self.centers.is_empty() {
            self.centers = permute(&self.centers, &perm);
        }
        if let Some(m) = &self.medoids {
            self.medoids = Some(permute(m, &perm));
        }
        self
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.sizes().contains(&0) {
            return Err(Error::Internal("clustering left a cluster empty".into()));
        }
        Ok(())
    }
}

/// `perm[old] = new`, numbering clusters by first appearance.
pub(crate) fn canonical_permutation(labels: &[usize], k: usize) -> Vec<usize> {
    let mut perm = vec![usize::MAX; k];
    let mut next = 0;
    for &l in labels {
        if perm[l] == usize::MAX {
            perm[l] = next;
            next += 1;
        }
    }
    for p in perm.iter_mut() {
        if *p == usize::MAX {
            *p = next;
            next += 1;
        }
    }
    perm
}

pub(crate) fn permute<T: Clone>(items: &[T], perm: &[usize]) -> Vec<T> {
    let mut out: Vec<Option<T>> = vec![None; items.len()];
    for (old, item) in items.iter().enumerate() {
        out[perm[old]] = Some(item.clone());
    }
    out.into_iter().map(|x| x.expect("permutation is a bijection")).collect()
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds {n} items")));
    }
    Ok(())
}

/// Checks that rows are nonempty, equally long and finite; returns the dimension.
pub(crate) fn check_items(items: &[Vec<f64>]) -> Result<usize> {
    let d = items
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InsufficientData("no items to cluster".into()))?;
    if d == 0 {
        return Err(Error::InvalidParameter("items have dimension 0".into()));
    }
    if items.iter().any(|r| r.len() != d) {
        return Err(Error::MixedRepresentation("items differ in length".into()));
    }
    if items.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("items contain non-finite values".into()));
    }
    Ok(d)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the nearest center; ties go to the lowest index.
pub(crate) fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centers.iter().enumerate() {
        let d = sq_dist(x, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Distance-weighted seeding: each new center is drawn with probability
/// proportional to its squared distance from the nearest chosen one.
pub(crate) fn kmeans_pp<R: Rng>(items: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = items.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = items.iter().map(|x| sq_dist(x, &items[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave the target past the last positive weight
            pick.unwrap_or_else(|| (0..n).rev().find(|&i| d2[i] > 0.0).expect("total > 0"))
        } else {
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, x) in items.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, &items[next]));
        }
    }
    chosen.into_iter().map(|i| items[i].clone()).collect()
}

/// Moves the item farthest from its center into each empty cluster.
///
/// `cost[i]` is the cost of item `i` in its current cluster; donors must keep
/// at least one member.
pub(crate) fn repair_empty(labels: &mut [usize], k: usize, cost: &mut [f64]) -> bool {
    let mut repaired = false;
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return repaired;
        };
        let donor = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if cost[b] >= cost[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n leaves a cluster with two members");
        labels[donor] = empty;
        cost[donor] = 0.0;
        repaired = true;
    }
}

/// Arithmetic mean of the rows with each label.
pub(crate) fn cluster_means(items: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = items[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (x, &l) in items.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            for v in s.iter_mut() {
                *v /= c as f64;
            }
        }
    }
    sums
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(row: &[f64]) -> usize {
    (0..row.len()).fold(0, |b, i| if row[i] > row[b] { i } else { b })
}
