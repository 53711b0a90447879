use super::{check_k, Clustering, DistanceMatrix};
use crate::error::{Error, Result};

/// Nearest medoid per item (lowest medoid slot on ties); medoids own themselves.
fn assign(dist: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut total = 0.0;
    let labels = (0..dist.len())
        .map(|i| {
            if let Some(own) = medoids.iter().position(|&m| m == i) {
                return own;
            }
            let mut best = (0, f64::INFINITY);
            for (c, &m) in medoids.iter().enumerate() {
                let d = dist.get(i, m);
                if d < best.1 {
                    best = (c, d);
                }
            }
            total += best.1;
            best.0
        })
        .collect();
    (labels, total)
}

fn cost(dist: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..dist.len())
        .map(|i| medoids.iter().map(|&m| dist.get(i, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Partitioning around medoids: greedy BUILD, then best-improvement SWAP.
///
/// Deterministic; `seed` is only recorded.
pub fn pam(dist: &DistanceMatrix, k: usize, seed: u64, max_iter: usize) -> Result<Clustering> {
    let n = dist.len();
    check_k(k, n)?;
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    // BUILD
    let first = (0..n)
        .map(|i| (i, dist.row(i).iter().sum::<f64>()))
        .fold((0, f64::INFINITY), |b, (i, s)| if s < b.1 { (i, s) } else { b })
        .0;
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = (0..n).map(|j| dist.get(j, first)).collect();
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for i in (0..n).filter(|i| !medoids.contains(i)) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - dist.get(i, j)).max(0.0)).sum();
            if gain > best.1 {
                best = (i, gain);
            }
        }
        medoids.push(best.0);
        for (j, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dist.get(j, best.0));
        }
    }

    // SWAP
    let mut current = cost(dist, &medoids);
    let mut trace = vec![current];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..k {
            for o in (0..n).filter(|o| !medoids.contains(o)) {
                let mut trial = medoids.clone();
                trial[slot] = o;
                let c = cost(dist, &trial);
                if best.is_none_or(|b| c < b.2) {
                    best = Some((slot, o, c));
                }
            }
        }
        match best {
            Some((slot, o, c)) if c < current - 1e-12 * current.abs() => {
                medoids[slot] = o;
                current = c;
                trace.push(c);
            }
            _ => break,
        }
    }

    medoids.sort_unstable();
    let (labels, objective) = assign(dist, &medoids);
    let c = Clustering {
        labels,
        k,
        centers: Vec::new(),
        medoids: Some(medoids),
        objective,
        trace,
        seed,
        iterations,
    }
    .canonicalize();
    c.check()?;
    Ok(c)
}
