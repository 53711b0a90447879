use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_items, check_k, cluster_means, kmeans_pp, nearest, repair_empty, Clustering};
use crate::error::{Error, Result};

/// Restarts used when callers do not choose.
pub const DEFAULT_RESTARTS: usize = 10;

/// Lloyd's algorithm from `restarts` distance-weighted seedings; returns the
/// run with the lowest objective `(1/n) sum d^2(x_i, mu_{C_i})`.
pub fn kmeans(
    items: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    restarts: usize,
) -> Result<Clustering> {
    check_items(items)?;
    check_k(k, items.len())?;
    if max_iter == 0 || restarts == 0 {
        return Err(Error::InvalidParameter("max_iter and restarts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts {
        let centers = kmeans_pp(items, k, &mut rng);
        let run = lloyd(items, centers, max_iter, seed);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart").canonicalize();
    best.check()?;
    Ok(best)
}

fn lloyd(items: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize, seed: u64) -> Clustering {
    let n = items.len();
    let k = centers.len();
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let (mut next, mut cost): (Vec<usize>, Vec<f64>) =
            items.iter().map(|x| nearest(x, &centers)).unzip();
        repair_empty(&mut next, k, &mut cost);
        let changed = next != labels;
        labels = next;
        centers = cluster_means(items, &labels, k);
        let objective = items
            .iter()
            .zip(&labels)
            .map(|(x, &l)| super::sq_dist(x, &centers[l]))
            .sum::<f64>()
            / n as f64;
        trace.push(objective);
        if !changed {
            break;
        }
    }
    Clustering {
        labels,
        k,
        centers,
        medoids: None,
        objective: *trace.last().expect("max_iter >= 1"),
        trace,
        seed,
        iterations,
    }
}
