use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_items, check_k, kmeans_pp, nearest, repair_empty, Clustering};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Covariance {
    Diagonal,
    Full,
}

impl FromStr for Covariance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(Covariance::Diagonal),
            "full" => Ok(Covariance::Full),
            other => Err(Error::InvalidParameter(format!("unknown covariance model `{other}`"))),
        }
    }
}

impl fmt::Display for Covariance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Covariance::Diagonal => "diagonal",
            Covariance::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmOptions {
    pub covariance: Covariance,
    pub max_iter: usize,
    pub tol: f64,
    pub n_init: usize,
}

impl Default for GmmOptions {
    fn default() -> Self {
        Self {
            covariance: Covariance::Diagonal,
            max_iter: 500,
            tol: 1e-10,
            n_init: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub covariance: Covariance,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Dense `d x d` matrices; off-diagonals are 0 for the diagonal model.
    pub covariances: Vec<Vec<Vec<f64>>>,
    pub loglik_trace: Vec<f64>,
    pub loglik: f64,
    pub bic: f64,
    pub n_params: usize,
    /// Set when a covariance was inflated to avoid collapse.
    pub regularized: bool,
    pub responsibilities: Vec<Vec<f64>>,
}

/// Geometric-mean variance below this fraction of the data's mean variance
/// counts as collapsed.
const COLLAPSE_RATIO: f64 = 1e-12;
const RIDGE_RATIO: f64 = 1e-6;

#[derive(Clone)]
struct Component {
    weight: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
}

struct Fit {
    components: Vec<Component>,
    trace: Vec<f64>,
    resp: Vec<Vec<f64>>,
    regularized: bool,
}

fn n_params(k: usize, d: usize, cov: Covariance) -> usize {
    let per = match cov {
        Covariance::Diagonal => d,
        Covariance::Full => d * (d + 1) / 2,
    };
    (k - 1) + k * d + k * per
}

/// Factorises `cov`, inflating its diagonal when it is singular or collapsed.
fn stabilise(mut cov: DMatrix<f64>, scale: f64, flag: &mut bool) -> (DMatrix<f64>, Cholesky<f64, Dyn>, f64) {
    let d = cov.nrows() as f64;
    for _ in 0..2 {
        if let Some(ch) = Cholesky::new(cov.clone()) {
            let log_det = 2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
            if (log_det / d).exp() >= COLLAPSE_RATIO * scale {
                return (cov, ch, log_det);
            }
        }
        *flag = true;
        for i in 0..cov.nrows() {
            cov[(i, i)] += RIDGE_RATIO * scale;
        }
    }
    let ch = Cholesky::new(cov.clone()).expect("ridge makes the matrix positive definite");
    let log_det = 2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    (cov, ch, log_det)
}

fn m_step(
    x: &[DVector<f64>],
    resp: &[Vec<f64>],
    previous: Option<&[Component]>,
    kind: Covariance,
    scale: f64,
    flag: &mut bool,
) -> Vec<Component> {
    let n = x.len();
    let d = x[0].len();
    let k = resp[0].len();
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let nk: f64 = resp.iter().map(|r| r[c]).sum();
        let (mean, cov) = if nk < 1e-8 {
            // an emptied component keeps its location with a broad covariance
            *flag = true;
            let mean = previous.map_or_else(|| DVector::zeros(d), |p| p[c].mean.clone());
            (mean, DMatrix::identity(d, d) * scale)
        } else {
            let mut mean = DVector::zeros(d);
            for (xi, r) in x.iter().zip(resp) {
                mean += xi * r[c];
            }
            mean /= nk;
            let mut cov = DMatrix::zeros(d, d);
            for (xi, r) in x.iter().zip(resp) {
                let diff = xi - &mean;
                match kind {
                    Covariance::Full => cov += &diff * diff.transpose() * r[c],
                    Covariance::Diagonal => {
                        for j in 0..d {
                            cov[(j, j)] += r[c] * diff[j] * diff[j];
                        }
                    }
                }
            }
            cov /= nk;
            (mean, (&cov + cov.transpose()) * 0.5)
        };
        let (cov, chol, log_det) = stabilise(cov, scale, flag);
        out.push(Component {
            weight: nk.max(1e-8) / n as f64,
            mean,
            cov,
            chol,
            log_det,
        });
    }
    let total: f64 = out.iter().map(|c| c.weight).sum();
    for c in out.iter_mut() {
        c.weight /= total;
    }
    out
}

/// Responsibilities and total log-likelihood.
fn e_step(x: &[DVector<f64>], comps: &[Component]) -> (Vec<Vec<f64>>, f64) {
    let d = x[0].len() as f64;
    let mut loglik = 0.0;
    let resp = x
        .iter()
        .map(|xi| {
            let logs: Vec<f64> = comps
                .iter()
                .map(|c| {
                    let y = c.chol.l().solve_lower_triangular(&(xi - &c.mean)).expect("L is invertible");
                    c.weight.ln() - 0.5 * (d * (2.0 * PI).ln() + c.log_det + y.norm_squared())
                })
                .collect();
            let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
            let lse = max + sum.ln();
            loglik += lse;
            logs.iter().map(|l| (l - lse).exp()).collect()
        })
        .collect();
    (resp, loglik)
}

fn run_em<R: rand::Rng>(
    items: &[Vec<f64>],
    x: &[DVector<f64>],
    k: usize,
    opts: &GmmOptions,
    scale: f64,
    rng: &mut R,
) -> Fit {
    let centers = kmeans_pp(items, k, rng);
    let (mut labels, mut cost): (Vec<usize>, Vec<f64>) = items.iter().map(|xi| nearest(xi, &centers)).unzip();
    repair_empty(&mut labels, k, &mut cost);
    let hard: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| (0..k).map(|c| if c == l { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut regularized = false;
    let mut comps = m_step(x, &hard, None, opts.covariance, scale, &mut regularized);
    let (mut resp, ll0) = e_step(x, &comps);
    let mut trace = vec![ll0];
    while trace.len() < opts.max_iter {
        let prev = *trace.last().expect("nonempty");
        let mut ridged = false;
        let next = m_step(x, &resp, Some(&comps), opts.covariance, scale, &mut ridged);
        let (r, ll) = e_step(x, &next);
        if ridged {
            regularized = true;
            // a ridge step that lowers the likelihood ends the run
            if ll < prev - 1e-9 * prev.abs().max(1.0) {
                break;
            }
        }
        comps = next;
        resp = r;
        trace.push(ll);
        if ll - prev < opts.tol * (1.0 + ll.abs()) {
            break;
        }
    }
    Fit {
        components: comps,
        trace,
        resp,
        regularized,
    }
}

/// Gaussian mixture by EM, best log-likelihood over `n_init` seeded starts.
///
/// Each start seeds centers by distance-weighted sampling and initialises
/// parameters from the resulting hard partition.
pub fn gmm_em(items: &[Vec<f64>], k: usize, opts: &GmmOptions, seed: u64) -> Result<(Clustering, GmmModel)> {
    let d = check_items(items)?;
    let n = items.len();
    check_k(k, n)?;
    if opts.max_iter == 0 || opts.n_init == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("max_iter, n_init and tol must be positive".into()));
    }
    let x: Vec<DVector<f64>> = items.iter().map(|r| DVector::from_column_slice(r)).collect();
    let mean = x.iter().fold(DVector::zeros(d), |a, b| a + b) / n as f64;
    let var_sum: f64 = x.iter().map(|xi| (xi - &mean).norm_squared()).sum::<f64>() / n as f64;
    let scale = if var_sum > 0.0 { var_sum / d as f64 } else { 1.0 };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Fit> = None;
    for _ in 0..opts.n_init {
        let fit = run_em(items, &x, k, opts, scale, &mut rng);
        let ll = *fit.trace.last().expect("at least one E-step");
        // a collapsed start only wins if every start collapsed
        if best.as_ref().is_none_or(|b| {
            (b.regularized && !fit.regularized)
                || (b.regularized == fit.regularized && ll > *b.trace.last().expect("nonempty"))
        }) {
            best = Some(fit);
        }
    }
    let fit = best.expect("n_init >= 1");
    let loglik = *fit.trace.last().expect("nonempty");
    let p = n_params(k, d, opts.covariance);

    let mut labels: Vec<usize> = fit.resp.iter().map(|r| argmax(r)).collect();
    loop {
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { break };
        let donor = (0..n)
            .filter(|&i| sizes[labels[i]] > 1)
            .fold(None, |b: Option<usize>, i| match b {
                Some(b) if fit.resp[b][empty] >= fit.resp[i][empty] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n");
        labels[donor] = empty;
    }
    let perm = super::canonical_permutation(&labels, k);
    let labels: Vec<usize> = labels.iter().map(|&l| perm[l]).collect();
    let comps = super::permute(
        &fit.components
            .iter()
            .map(|c| (c.weight, c.mean.iter().copied().collect::<Vec<_>>(), c.cov.row_iter().map(|r| r.iter().copied().collect()).collect::<Vec<Vec<f64>>>()))
            .collect::<Vec<_>>(),
        &perm,
    );
    let responsibilities = fit.resp.iter().map(|r| super::permute(r, &perm)).collect();
    let model = GmmModel {
        covariance: opts.covariance,
        weights: comps.iter().map(|c| c.0).collect(),
        means: comps.iter().map(|c| c.1.clone()).collect(),
        covariances: comps.iter().map(|c| c.2.clone()).collect(),
        loglik_trace: fit.trace.clone(),
        loglik,
        bic: -2.0 * loglik + p as f64 * (n as f64).ln(),
        n_params: p,
        regularized: fit.regularized,
        responsibilities,
    };
    let clustering = Clustering {
        labels,
        k,
        centers: model.means.clone(),
        medoids: None,
        objective: -loglik,
        trace: fit.trace.iter().map(|l| -l).collect(),
        seed,
        iterations: fit.trace.len(),
    };
    clustering.check()?;
    Ok((clustering, model))
}

/// Fits both covariance models and keeps the lower BIC (diagonal on ties).
///
/// A regularized fit has no meaningful BIC and loses to an unregularized one.
pub fn gmm_bic_select(items: &[Vec<f64>], k: usize, opts: &GmmOptions, seed: u64) -> Result<(Clustering, GmmModel)> {
    let diag = gmm_em(items, k, &GmmOptions { covariance: Covariance::Diagonal, ..*opts }, seed)?;
    let full = gmm_em(items, k, &GmmOptions { covariance: Covariance::Full, ..*opts }, seed)?;
    let take_full = match (diag.1.regularized, full.1.regularized) {
        (false, true) => false,
        (true, false) => true,
        _ => full.1.bic < diag.1.bic,
    };
    Ok(if take_full { full } else { diag })
}
