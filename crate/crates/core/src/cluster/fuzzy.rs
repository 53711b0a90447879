use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_items, check_k, kmeans_pp, sq_dist, Clustering};
use crate::error::{Error, Result};

pub const DEFAULT_FUZZIFIER: f64 = 2.0;

/// Soft partition; each membership row sums to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyClustering {
    pub memberships: Vec<Vec<f64>>,
    pub centers: Vec<Vec<f64>>,
    pub m: f64,
    /// `sum_i sum_c u_ic^m d_ic^2` after each center update.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

impl FuzzyClustering {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn objective(&self) -> f64 {
        *self.trace.last().unwrap_or(&0.0)
    }

    /// Row-wise argmax labels; an empty cluster takes the item with the
    /// highest membership in it among clusters that can spare one.
    pub fn harden(&self) -> Clustering {
        let k = self.k();
        let mut labels: Vec<usize> = self.memberships.iter().map(|u| argmax(u)).collect();
        loop {
            let mut sizes = vec![0usize; k];
            for &l in &labels {
                sizes[l] += 1;
            }
            let Some(empty) = sizes.iter().position(|&s| s == 0) else { break };
            let donor = (0..labels.len())
                .filter(|&i| sizes[labels[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if self.memberships[b][empty] >= self.memberships[i][empty] => Some(b),
                    _ => Some(i),
                })
                .expect("k <= n leaves a cluster with two members");
            labels[donor] = empty;
        }
        Clustering {
            labels,
            k,
            centers: self.centers.clone(),
            medoids: None,
            objective: self.objective(),
            trace: self.trace.clone(),
            seed: self.seed,
            iterations: self.iterations,
        }
    }

    /// Reorders clusters so that they match `perm[old] = new`.
    pub(crate) fn permuted(mut self, perm: &[usize]) -> Self {
        self.centers = super::permute(&self.centers, perm);
        for row in self.memberships.iter_mut() {
            *row = super::permute(row, perm);
        }
        self
    }
}

/// Memberships of one item given squared distances to every center.
///
/// Zero distances split the membership equally among the coinciding centers.
fn membership_row(d2: &[f64], m: f64) -> Vec<f64> {
    let zeros = d2.iter().filter(|&&d| d == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return d2.iter().map(|&d| if d == 0.0 { share } else { 0.0 }).collect();
    }
    let min = d2.iter().copied().fold(f64::INFINITY, f64::min);
    let exp = 1.0 / (m - 1.0);
    let w: Vec<f64> = d2.iter().map(|&d| (min / d).powf(exp)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

fn objective(items: &[Vec<f64>], u: &[Vec<f64>], centers: &[Vec<f64>], m: f64) -> f64 {
    items
        .iter()
        .zip(u)
        .map(|(x, row)| {
            row.iter()
                .zip(centers)
                .map(|(&uic, c)| uic.powf(m) * sq_dist(x, c))
                .sum::<f64>()
        })
        .sum()
}

/// Fuzzy c-means with centers seeded by distance-weighted sampling.
pub fn fuzzy_cmeans(
    items: &[Vec<f64>],
    k: usize,
    m: f64,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<FuzzyClustering> {
    let d = check_items(items)?;
    check_k(k, items.len())?;
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("fuzzifier m = {m} must exceed 1")));
    }
    if max_iter == 0 || !(tol > 0.0) {
        return Err(Error::InvalidParameter("max_iter must be >= 1 and tol > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = kmeans_pp(items, k, &mut rng);
    let mut u: Vec<Vec<f64>> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let next: Vec<Vec<f64>> = items
            .iter()
            .map(|x| {
                let d2: Vec<f64> = centers.iter().map(|c| sq_dist(x, c)).collect();
                membership_row(&d2, m)
            })
            .collect();
        let change = if u.is_empty() {
            f64::INFINITY
        } else {
            u.iter()
                .flatten()
                .zip(next.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        u = next;
        for (c, center) in centers.iter_mut().enumerate() {
            let weights: Vec<f64> = u.iter().map(|row| row[c].powf(m)).collect();
            let total: f64 = weights.iter().sum();
            if total > 0.0 {
                let mut acc = vec![0.0; d];
                for (x, w) in items.iter().zip(&weights) {
                    for (a, v) in acc.iter_mut().zip(x) {
                        *a += w * v;
                    }
                }
                *center = acc.into_iter().map(|a| a / total).collect();
            }
        }
        trace.push(objective(items, &u, &centers, m));
        if change < tol {
            break;
        }
    }
    let fc = FuzzyClustering {
        memberships: u,
        centers,
        m,
        trace,
        iterations,
        seed,
    };
    let perm = super::canonical_permutation(&fc.harden().labels, k);
    Ok(fc.permuted(&perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::kmeans::kmeans;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn equidistant_point_splits_evenly() {
        assert_eq!(membership_row(&[4.0, 4.0], 2.0), vec![0.5, 0.5]);
    }

    #[test]
    fn coinciding_point_takes_full_membership() {
        assert_eq!(membership_row(&[0.0, 3.0, 1.0], 2.0), vec![1.0, 0.0, 0.0]);
        assert_eq!(membership_row(&[0.0, 0.0], 2.0), vec![0.5, 0.5]);
    }

    #[test]
    fn membership_formula() {
        // u_1 = 1 / (1 + d1^2/d2^2) for m = 2
        let u = membership_row(&[1.0, 4.0], 2.0);
        assert!((u[0] - 0.8).abs() < 1e-15 && (u[1] - 0.2).abs() < 1e-15);
    }

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut items = Vec::new();
        let mut truth = Vec::new();
        for i in 0..40 {
            let b = i % 2;
            let off = if b == 0 { -20.0 } else { 20.0 };
            items.push(vec![off + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            truth.push(b);
        }
        (items, truth)
    }

    #[test]
    fn agrees_with_kmeans_on_separated_blobs() {
        for seed in 0..5 {
            let (items, truth) = blobs(seed);
            let f = fuzzy_cmeans(&items, 2, 2.0, seed, 300, 1e-9).unwrap().harden();
            let k = kmeans(&items, 2, seed, 100, 10).unwrap();
            assert_eq!(f.labels, k.labels);
            assert_eq!(f.labels, truth);
        }
    }

    #[test]
    fn errors() {
        let items = vec![vec![0.0], vec![1.0]];
        assert!(fuzzy_cmeans(&items, 2, 1.0, 0, 10, 1e-6).is_err());
        assert!(fuzzy_cmeans(&items, 3, 2.0, 0, 10, 1e-6).is_err());
    }

    proptest! {
        #[test]
        fn rows_sum_to_one_and_objective_decreases(
            items in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 5..25),
            k in 1usize..4,
            m in 1.2f64..3.0,
            seed in any::<u64>(),
        ) {
            let f = fuzzy_cmeans(&items, k, m, seed, 200, 1e-8).unwrap();
            for row in &f.memberships {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                prop_assert!(row.iter().all(|&u| (0.0..=1.0).contains(&u)));
            }
            for w in f.trace.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-10) + 1e-12, "{:?}", f.trace);
            }
            let h = f.harden();
            prop_assert!(h.sizes().iter().all(|&s| s > 0));
        }
    }
}
