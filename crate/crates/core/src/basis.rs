//! Clamped B-spline bases and least-squares representation of sampled curves.
//!
//! A curve observed as `X_ij = x_i(t_ij) + e_ij` is represented by `K`
//! coefficients `a_i` against a shared basis, `x_i(t) = sum_k a_ik B_k(t)`.
//! L2 inner products of represented curves reduce to `a^T W b` with the Gram
//! matrix `W`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::SampledCurve;
use crate::error::{Error, Result};

/// Quadrature nodes per knot span used for Gram and penalty integrals.
pub const QUADRATURE_NODES: usize = 8;

/// Default pipeline basis: cubic splines (order 4) with 9 interior knots, K = 13.
pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_INTERIOR_KNOTS: usize = 9;

/// Relative singular-value cutoff below which a design counts as rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    order: usize,
    interior_knots: Vec<f64>,
    domain: (f64, f64),
    knots: Vec<f64>,
}

/// Builds a clamped basis with `order`-fold boundary knots.
pub fn make_basis(order: usize, interior_knots: &[f64], domain: (f64, f64)) -> Result<BSplineBasis> {
    BSplineBasis::new(order, interior_knots.to_vec(), domain)
}

/// `n` interior knots splitting `domain` into `n + 1` equal spans.
pub fn equally_spaced_knots(n: usize, domain: (f64, f64)) -> Vec<f64> {
    (1..=n)
        .map(|i| domain.0 + (domain.1 - domain.0) * i as f64 / (n + 1) as f64)
        .collect()
}

impl BSplineBasis {
    pub fn new(order: usize, interior_knots: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("spline order must be at least 1".into()));
        }
        if !(domain.0.is_finite() && domain.1.is_finite() && domain.0 < domain.1) {
            return Err(Error::InvalidKnots(format!("invalid domain {domain:?}")));
        }
        if interior_knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidKnots("interior knots must be strictly increasing".into()));
        }
        if let Some(k) = interior_knots
            .iter()
            .find(|&&k| !(k > domain.0 && k < domain.1))
        {
            return Err(Error::InvalidKnots(format!(
                "knot {k} not strictly inside ({}, {})",
                domain.0, domain.1
            )));
        }
        let mut knots = vec![domain.0; order];
        knots.extend_from_slice(&interior_knots);
        knots.extend(std::iter::repeat_n(domain.1, order));
        Ok(Self {
            order,
            interior_knots,
            domain,
            knots,
        })
    }

    /// Order-`order` basis with `n` equally spaced interior knots.
    pub fn uniform(order: usize, n: usize, domain: (f64, f64)) -> Result<Self> {
        Self::new(order, equally_spaced_knots(n, domain), domain)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.order - 1
    }

    pub fn interior_knots(&self) -> &[f64] {
        &self.interior_knots
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Number of basis functions `K = #interior knots + order`.
    pub fn size(&self) -> usize {
        self.interior_knots.len() + self.order
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t >= self.domain.0 && t <= self.domain.1 {
            Ok(())
        } else {
            Err(Error::Domain {
                point: t,
                lo: self.domain.0,
                hi: self.domain.1,
            })
        }
    }

    /// Index `i` of the knot span `[knots[i], knots[i+1])` holding `t`; the
    /// right endpoint belongs to the last span.
    fn span(&self, t: f64) -> usize {
        let p = self.degree();
        let k = self.size();
        if t >= self.domain.1 {
            return k - 1;
        }
        let pos = self.knots[..=k].partition_point(|&x| x <= t);
        (pos - 1).clamp(p, k - 1)
    }

    /// `(B_1(t), ..., B_K(t))`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.eval_derivatives(t, 0)?.swap_remove(0))
    }

    /// Rows `0..=n` hold the `d`-th derivatives of all `K` basis functions at `t`.
    pub fn eval_derivatives(&self, t: f64, n: usize) -> Result<Vec<Vec<f64>>> {
        self.check_domain(t)?;
        let span = self.span(t);
        let p = self.degree();
        let local = local_derivatives(&self.knots, span, t, p, n);
        let mut out = vec![vec![0.0; self.size()]; n + 1];
        for (d, row) in local.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                out[d][span - p + j] = v;
            }
        }
        Ok(out)
    }

    /// Gauss-Legendre nodes and weights covering the domain span by span.
    pub fn quadrature(&self) -> Vec<(f64, f64)> {
        let (nodes, weights) = gauss_legendre(QUADRATURE_NODES);
        let mut breaks = vec![self.domain.0];
        breaks.extend_from_slice(&self.interior_knots);
        breaks.push(self.domain.1);
        let mut out = Vec::with_capacity((breaks.len() - 1) * QUADRATURE_NODES);
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in nodes.iter().zip(&weights) {
                out.push((mid + half * x, half * wt));
            }
        }
        out
    }

    fn integrated_products(&self, derivative: usize) -> DMatrix<f64> {
        let k = self.size();
        let mut w = DMatrix::zeros(k, k);
        for (t, wt) in self.quadrature() {
            let rows = self
                .eval_derivatives(t, derivative)
                .expect("quadrature nodes lie inside the domain");
            let b = &rows[derivative];
            for i in 0..k {
                if b[i] == 0.0 {
                    continue;
                }
                for j in i..k {
                    w[(i, j)] += wt * b[i] * b[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                w[(i, j)] = w[(j, i)];
            }
        }
        w
    }

    /// `W[k][l] = integral of B_k(t) B_l(t) dt`.
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        self.integrated_products(0)
    }

    /// Roughness penalty `R[k][l] = integral of B_k''(t) B_l''(t) dt`.
    pub fn penalty_matrix(&self) -> DMatrix<f64> {
        self.integrated_products(2)
    }

    pub fn spec(&self) -> BasisSpec {
        BasisSpec {
            order: self.order,
            interior_knots: self.interior_knots.clone(),
            domain: self.domain,
        }
    }
}

/// De Boor's triangular scheme for the nonzero basis functions on one span
/// and their derivatives up to order `n`.
fn local_derivatives(knots: &[f64], span: usize, t: f64, p: usize, n: usize) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    ndu[0][0] = 1.0;
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; n + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let top = n.min(p);
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=top {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                let rk = rk as usize;
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for (k, row) in ders.iter_mut().enumerate().take(top + 1).skip(1) {
        for v in row.iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Serialized basis description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub order: usize,
    pub interior_knots: Vec<f64>,
    #[serde(default = "unit_domain", skip_serializing_if = "is_unit_domain")]
    pub domain: (f64, f64),
}

fn unit_domain() -> (f64, f64) {
    (0.0, 1.0)
}

fn is_unit_domain(d: &(f64, f64)) -> bool {
    *d == (0.0, 1.0)
}

impl BasisSpec {
    pub fn build(&self) -> Result<BSplineBasis> {
        BSplineBasis::new(self.order, self.interior_knots.clone(), self.domain)
    }
}

/// Observation noise `e_ij ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sigma {sigma} must be >= 0")));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Residual-based estimate `sqrt(RSS / (m - K))` from an unpenalized fit.
    pub fn estimate(datum: &FunctionalDatum, curve: &SampledCurve) -> Result<Self> {
        let k = datum.basis.size();
        let m = curve.len();
        if m <= k {
            return Err(Error::InsufficientData(format!(
                "{m} observations leave no residual degrees of freedom for {k} coefficients"
            )));
        }
        let mut rss = 0.0;
        for (&t, &x) in curve.times().iter().zip(curve.values()) {
            rss += (x - datum.eval(t)?).powi(2);
        }
        Self::new((rss / (m - k) as f64).sqrt())
    }
}

/// A curve represented by coefficients against a shared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDatum {
    id: String,
    basis: Arc<BSplineBasis>,
    coeffs: Vec<f64>,
}

impl FunctionalDatum {
    pub fn new(id: impl Into<String>, basis: Arc<BSplineBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.size() {
            return Err(Error::SizeMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.size()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self {
            id: id.into(),
            basis,
            coeffs,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn basis(&self) -> &Arc<BSplineBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self
            .basis
            .eval(t)?
            .iter()
            .zip(&self.coeffs)
            .map(|(b, a)| b * a)
            .sum())
    }

    pub fn eval_on_grid(&self, grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter().map(|&t| self.eval(t)).collect()
    }

    pub fn same_basis(&self, other: &FunctionalDatum) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }
}

pub fn eval_function(datum: &FunctionalDatum, t: f64) -> Result<f64> {
    datum.eval(t)
}

pub fn eval_on_grid(datum: &FunctionalDatum, grid: &[f64]) -> Result<Vec<f64>> {
    datum.eval_on_grid(grid)
}

/// Penalized least-squares coefficients of `curve` against `basis`.
///
/// Minimizes `sum_j (X_j - x(t_j))^2 + lambda * integral x''(t)^2 dt`. The
/// solve goes through an SVD of the (augmented) design.
pub fn fit(basis: &Arc<BSplineBasis>, curve: &SampledCurve, smoothing_lambda: f64) -> Result<FunctionalDatum> {
    if !(smoothing_lambda >= 0.0 && smoothing_lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "smoothing lambda {smoothing_lambda} must be >= 0"
        )));
    }
    let k = basis.size();
    let m = curve.len();

    let penalty_rows = if smoothing_lambda > 0.0 {
        let eig = SymmetricEigen::new(basis.penalty_matrix());
        let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        let mut rows = Vec::new();
        for (i, &ev) in eig.eigenvalues.iter().enumerate() {
            if ev > 1e-14 * scale {
                let f = (smoothing_lambda * ev).sqrt();
                rows.push(eig.eigenvectors.column(i).transpose() * f);
            }
        }
        rows
    } else {
        Vec::new()
    };

    let rows = m + penalty_rows.len();
    let mut design = DMatrix::zeros(rows, k);
    let mut rhs = DVector::zeros(rows);
    for (j, (&t, &x)) in curve.times().iter().zip(curve.values()).enumerate() {
        let b = basis.eval(t)?;
        for (c, v) in b.into_iter().enumerate() {
            design[(j, c)] = v;
        }
        rhs[j] = x;
    }
    for (r, row) in penalty_rows.iter().enumerate() {
        for c in 0..k {
            design[(m + r, c)] = row[c];
        }
    }

    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOLERANCE * smax)
        .count();
    if rank < k {
        return Err(Error::RankDeficient { rank, k });
    }
    let coeffs = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Internal(e.to_string()))?;
    FunctionalDatum::new(curve.id(), Arc::clone(basis), coeffs.iter().copied().collect())
}

/// Fits every curve against the same basis.
pub fn fit_all(
    basis: &Arc<BSplineBasis>,
    curves: &[SampledCurve],
    smoothing_lambda: f64,
) -> Result<Vec<FunctionalDatum>> {
    curves
        .par_iter()
        .map(|c| fit(basis, c, smoothing_lambda))
        .collect()
}

/// Persisted form of one functional datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRecord {
    pub id: String,
    pub basis: BasisSpec,
    pub coeffs: Vec<f64>,
}

impl From<&FunctionalDatum> for FunctionalRecord {
    fn from(d: &FunctionalDatum) -> Self {
        Self {
            id: d.id.clone(),
            basis: d.basis.spec(),
            coeffs: d.coeffs.clone(),
        }
    }
}

pub fn functional_to_json(data: &[FunctionalDatum]) -> Result<String> {
    let records: Vec<FunctionalRecord> = data.iter().map(FunctionalRecord::from).collect();
    Ok(serde_json::to_string_pretty(&records)?)
}

/// Rebuilds data from JSON records; records with equal bases share one `Arc`.
pub fn functional_from_json(text: &str) -> Result<Vec<FunctionalDatum>> {
    let records: Vec<FunctionalRecord> = serde_json::from_str(text)?;
    let mut bases: Vec<(BasisSpec, Arc<BSplineBasis>)> = Vec::new();
    records
        .into_iter()
        .map(|r| {
            let basis = match bases.iter().find(|(s, _)| *s == r.basis) {
                Some((_, b)) => Arc::clone(b),
                None => {
                    let b = Arc::new(r.basis.build()?);
                    bases.push((r.basis.clone(), Arc::clone(&b)));
                    b
                }
            };
            FunctionalDatum::new(r.id, basis, r.coeffs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    fn default_basis() -> Arc<BSplineBasis> {
        Arc::new(BSplineBasis::uniform(4, 9, (0.0, 1.0)).unwrap())
    }

    #[test]
    fn cubic_nine_knots_has_thirteen_functions() {
        assert_eq!(default_basis().size(), 13);
    }

    #[test]
    fn order_one_without_knots_is_indicator() {
        let b = make_basis(1, &[], (0.0, 1.0)).unwrap();
        assert_eq!(b.size(), 1);
        assert_eq!(b.eval(0.3).unwrap(), vec![1.0]);
        assert_eq!(b.eval(1.0).unwrap(), vec![1.0]);
        let w = b.gram_matrix();
        assert!((w[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_knot_partition_of_unity() {
        let b = make_basis(4, &[0.5], (0.0, 1.0)).unwrap();
        assert_eq!(b.size(), 5);
        for t in unit_grid(1000) {
            let v = b.eval(t).unwrap();
            assert!(v.iter().all(|&x| x >= 0.0));
            assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn knot_validation() {
        assert!(make_basis(4, &[0.5, 0.5], (0.0, 1.0)).is_err());
        assert!(make_basis(4, &[0.0], (0.0, 1.0)).is_err());
        assert!(make_basis(4, &[1.2], (0.0, 1.0)).is_err());
        assert!(make_basis(0, &[], (0.0, 1.0)).is_err());
        assert!(matches!(default_basis().eval(1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn clamped_left_endpoint() {
        let v = default_basis().eval(0.0).unwrap();
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
        let r = default_basis().eval(1.0).unwrap();
        assert_eq!(r[12], 1.0);
    }

    #[test]
    fn hat_functions_at_midpoint() {
        let b = make_basis(2, &[0.25, 0.5, 0.75], (0.0, 1.0)).unwrap();
        let v = b.eval(0.375).unwrap();
        assert_eq!(v, vec![0.0, 0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = default_basis();
        let h = 1e-5;
        for &t in &[0.05, 0.33, 0.5001, 0.77, 0.93] {
            let d = b.eval_derivatives(t, 2).unwrap();
            let lo = b.eval(t - h).unwrap();
            let mid = b.eval(t).unwrap();
            let hi = b.eval(t + h).unwrap();
            for k in 0..13 {
                let d1 = (hi[k] - lo[k]) / (2.0 * h);
                let d2 = (hi[k] - 2.0 * mid[k] + lo[k]) / (h * h);
                assert!((d[1][k] - d1).abs() < 1e-5 * (1.0 + d1.abs()), "d1 {k} at {t}");
                assert!((d[2][k] - d2).abs() < 1e-3 * (1.0 + d2.abs()), "d2 {k} at {t}");
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        for deg in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn gram_of_constant_function_is_one() {
        let b = default_basis();
        let w = b.gram_matrix();
        let ones = DVector::from_element(13, 1.0);
        assert!(((ones.transpose() * &w * &ones)[0] - 1.0).abs() < 1e-14);
        assert_eq!(w, w.transpose());
        let eig = SymmetricEigen::new(w);
        assert!(eig.eigenvalues.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn gram_matches_trapezoid_integration() {
        let b = make_basis(4, &[0.13, 0.4, 0.41, 0.8], (0.0, 1.0)).unwrap();
        let w = b.gram_matrix();
        let n = 200_001;
        let grid = unit_grid(n);
        let h = 1.0 / (n - 1) as f64;
        let vals: Vec<Vec<f64>> = grid.iter().map(|&t| b.eval(t).unwrap()).collect();
        let k = b.size();
        for i in 0..k {
            for j in 0..k {
                let mut s = 0.0;
                for (idx, v) in vals.iter().enumerate() {
                    let wt = if idx == 0 || idx == n - 1 { 0.5 * h } else { h };
                    s += wt * v[i] * v[j];
                }
                assert!((s - w[(i, j)]).abs() < 1e-8, "({i},{j}): {s} vs {}", w[(i, j)]);
            }
        }
    }

    #[test]
    fn cubic_polynomial_reproduced_exactly() {
        let b = default_basis();
        let poly = |t: f64| 0.3 - 1.2 * t + 2.5 * t * t - 0.7 * t * t * t;
        let grid = unit_grid(201);
        let curve = SampledCurve::new("p", grid.clone(), grid.iter().map(|&t| poly(t)).collect()).unwrap();
        let d = fit(&b, &curve, 0.0).unwrap();
        for t in unit_grid(1000) {
            assert!((d.eval(t).unwrap() - poly(t)).abs() <= 1e-9);
        }
    }

    #[test]
    fn constant_reproduced_with_equal_coefficients() {
        let b = default_basis();
        let grid = unit_grid(50);
        let curve = SampledCurve::new("c", grid.clone(), vec![0.83; 50]).unwrap();
        let d = fit(&b, &curve, 0.0).unwrap();
        assert!(d.coeffs().iter().all(|c| (c - 0.83).abs() < 1e-12));
        let e = FunctionalDatum::new("e", Arc::clone(&b), vec![2.5; 13]).unwrap();
        assert!(e.eval_on_grid(&grid).unwrap().iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn unit_coefficients_give_basis_functions() {
        let b = default_basis();
        for k in 0..13 {
            let mut c = vec![0.0; 13];
            c[k] = 1.0;
            let d = FunctionalDatum::new("u", Arc::clone(&b), c).unwrap();
            for t in unit_grid(37) {
                let v = d.eval(t).unwrap();
                assert!(v >= 0.0);
                assert_eq!(v, b.eval(t).unwrap()[k]);
            }
        }
    }

    fn noisy_curve() -> SampledCurve {
        let grid = unit_grid(101);
        // deterministic pseudo-noise
        let vals = grid
            .iter()
            .enumerate()
            .map(|(i, &t)| 1.0 - 0.4 * (-(t - 0.5).powi(2) / 0.02).exp() + 0.03 * ((i * 7919 % 101) as f64 / 101.0 - 0.5))
            .collect();
        SampledCurve::new("n", grid, vals).unwrap()
    }

    #[test]
    fn huge_lambda_tends_to_linear_regression() {
        let b = default_basis();
        let curve = noisy_curve();
        let d = fit(&b, &curve, 1e12).unwrap();
        // ordinary least-squares line as an independent oracle
        let t = curve.times();
        let x = curve.values();
        let n = t.len() as f64;
        let (mt, mx) = (t.iter().sum::<f64>() / n, x.iter().sum::<f64>() / n);
        let sxy: f64 = t.iter().zip(x).map(|(a, b)| (a - mt) * (b - mx)).sum();
        let sxx: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
        let slope = sxy / sxx;
        let icpt = mx - slope * mt;
        for &tt in t {
            assert!((d.eval(tt).unwrap() - (icpt + slope * tt)).abs() < 1e-6);
        }
    }

    #[test]
    fn rss_non_increasing_as_lambda_decreases() {
        let b = default_basis();
        let curve = noisy_curve();
        let rss = |lambda: f64| {
            let d = fit(&b, &curve, lambda).unwrap();
            curve
                .times()
                .iter()
                .zip(curve.values())
                .map(|(&t, &x)| (x - d.eval(t).unwrap()).powi(2))
                .sum::<f64>()
        };
        let ladder = [1e2, 1.0, 1e-2, 1e-4, 1e-6, 0.0];
        let values: Vec<f64> = ladder.iter().map(|&l| rss(l)).collect();
        for w in values.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{values:?}");
        }
    }

    #[test]
    fn too_few_points_is_rank_deficient() {
        let b = default_basis();
        let curve = SampledCurve::new("s", unit_grid(8), vec![1.0; 8]).unwrap();
        assert!(matches!(fit(&b, &curve, 0.0), Err(Error::RankDeficient { .. })));
        assert!(fit(&b, &curve, 1e-3).is_ok());
    }

    #[test]
    fn noise_estimate_recovers_zero_for_exact_fit() {
        let b = default_basis();
        let grid = unit_grid(60);
        let curve = SampledCurve::new("p", grid.clone(), grid.iter().map(|t| t * t).collect()).unwrap();
        let d = fit(&b, &curve, 0.0).unwrap();
        assert!(NoiseModel::estimate(&d, &curve).unwrap().sigma() < 1e-10);
        assert!(NoiseModel::new(-1.0).is_err());
    }

    #[test]
    fn json_records_share_basis() {
        let b = default_basis();
        let a = FunctionalDatum::new("a", Arc::clone(&b), (0..13).map(|i| i as f64 * 0.1).collect()).unwrap();
        let c = FunctionalDatum::new("c", Arc::clone(&b), vec![1.0; 13]).unwrap();
        let text = functional_to_json(&[a.clone(), c.clone()]).unwrap();
        assert!(!text.contains("domain"));
        let back = functional_from_json(&text).unwrap();
        assert_eq!(back, vec![a, c]);
        assert!(Arc::ptr_eq(back[0].basis(), back[1].basis()));
    }

    proptest! {
        #[test]
        fn partition_of_unity_random_bases(
            order in 1usize..6,
            knots in prop::collection::btree_set(1u32..999, 0..12)
        ) {
            let interior: Vec<f64> = knots.into_iter().map(|k| k as f64 / 1000.0).collect();
            let b = make_basis(order, &interior, (0.0, 1.0)).unwrap();
            for t in unit_grid(1000) {
                let v = b.eval(t).unwrap();
                prop_assert_eq!(v.len(), interior.len() + order);
                prop_assert!(v.iter().all(|&x| x >= 0.0));
                prop_assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
