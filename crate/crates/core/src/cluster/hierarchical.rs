use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_k, Clustering, DistanceMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    /// Ward's minimum variance on squared distances; heights are Euclidean.
    Ward,
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "ward" => Ok(Linkage::Ward),
            other => Err(Error::InvalidParameter(format!("unknown linkage `{other}`"))),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Ward => "ward",
        })
    }
}

/// One agglomeration step; `a < b` are cluster slots, the merged cluster keeps `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

/// Full merge sequence by Lance-Williams updates.
///
/// Slots start as items `0..n`; each step merges the closest active pair
/// (lowest `(a, b)` on ties) into slot `a`.
pub fn linkage_tree(dist: &DistanceMatrix, linkage: Linkage) -> Vec<Merge> {
    let n = dist.len();
    let ward = linkage == Linkage::Ward;
    let mut d: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            dist.row(i)
                .iter()
                .map(|&v| if ward { v * v } else { v })
                .collect()
        })
        .collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| active[i]) {
            for j in ((i + 1)..n).filter(|&j| active[j]) {
                if d[i][j] < best.2 {
                    best = (i, j, d[i][j]);
                }
            }
        }
        let (a, b, dab) = best;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in (0..n).filter(|&k| active[k] && k != a && k != b) {
            let (dak, dbk) = (d[a][k], d[b][k]);
            let nk = size[k] as f64;
            let updated = match linkage {
                Linkage::Single => dak.min(dbk),
                Linkage::Complete => dak.max(dbk),
                Linkage::Average => (na * dak + nb * dbk) / (na + nb),
                Linkage::Ward => ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk),
            };
            d[a][k] = updated;
            d[k][a] = updated;
        }
        active[b] = false;
        size[a] += size[b];
        merges.push(Merge {
            a,
            b,
            height: if ward { dab.max(0.0).sqrt() } else { dab },
            size: size[a],
        });
    }
    merges
}

/// Agglomerative clustering cut at `k` clusters.
pub fn hierarchical(dist: &DistanceMatrix, linkage: Linkage, k: usize) -> Result<Clustering> {
    let n = dist.len();
    check_k(k, n)?;
    let merges = linkage_tree(dist, linkage);
    let mut owner: Vec<usize> = (0..n).collect();
    let used = &merges[..n - k];
    for m in used {
        for o in owner.iter_mut() {
            if *o == m.b {
                *o = m.a;
            }
        }
    }
    let mut slots: Vec<usize> = owner.clone();
    slots.sort_unstable();
    slots.dedup();
    let labels = owner
        .iter()
        .map(|o| slots.binary_search(o).expect("owner is a slot"))
        .collect();
    let trace: Vec<f64> = used.iter().map(|m| m.height).collect();
    let c = Clustering {
        labels,
        k,
        centers: Vec::new(),
        medoids: None,
        objective: trace.last().copied().unwrap_or(0.0),
        trace,
        seed: 0,
        iterations: used.len(),
    }
    .canonicalize();
    c.check()?;
    Ok(c)
}
