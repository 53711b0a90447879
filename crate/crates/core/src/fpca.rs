//! Functional principal component analysis in coefficient space.
//!
//! With centered coefficients `A` (one row per curve), sample covariance
//! `S = A^T A / (n - 1)` and Gram matrix `W`, the covariance operator's
//! spectrum is that of `W^{1/2} S W^{1/2}`. Eigenvectors `u_j` map back to
//! eigenfunction coefficients `W^{-1/2} u_j`, which are L2-orthonormal.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::{BSplineBasis, BasisSpec, FunctionalDatum};
use crate::error::{Error, Result};

/// Components with eigenvalue below this fraction of the largest are dropped.
pub const RELATIVE_EIGENVALUE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FpcaModel {
    basis: Arc<BSplineBasis>,
    gram: DMatrix<f64>,
    mean_coeffs: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenfunction_coeffs: Vec<Vec<f64>>,
}

fn shared_basis(data: &[FunctionalDatum]) -> Result<Arc<BSplineBasis>> {
    let first = data
        .first()
        .ok_or_else(|| Error::InsufficientData("no functional data".into()))?;
    if data.iter().any(|d| !d.same_basis(first)) {
        return Err(Error::BasisMismatch);
    }
    Ok(Arc::clone(first.basis()))
}

/// Coefficient-wise average; the mean function of the cohort.
pub fn mean_function(data: &[FunctionalDatum]) -> Result<FunctionalDatum> {
    let basis = shared_basis(data)?;
    let k = basis.size();
    let n = data.len() as f64;
    let mut mean = vec![0.0; k];
    for d in data {
        for (m, c) in mean.iter_mut().zip(d.coeffs()) {
            *m += c;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    FunctionalDatum::new("mean", basis, mean)
}

fn symmetric_power(w: &DMatrix<f64>, power: f64) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(w.clone());
    if eig.eigenvalues.iter().any(|&e| e <= 0.0) {
        return Err(Error::Internal("Gram matrix is not positive definite".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| e.powf(power)));
    let m = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    Ok((&m + m.transpose()) * 0.5)
}

/// Fits the FPCA model; see the module docs for the eigenproblem.
pub fn fit_fpca(data: &[FunctionalDatum]) -> Result<FpcaModel> {
    if data.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "FPCA needs at least 2 curves, got {}",
            data.len()
        )));
    }
    let basis = shared_basis(data)?;
    let k = basis.size();
    let n = data.len();
    let mean = mean_function(data)?;
    let mu = mean.coeffs();

    let centered = DMatrix::from_fn(n, k, |i, j| data[i].coeffs()[j] - mu[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let gram = basis.gram_matrix();
    let w_half = symmetric_power(&gram, 0.5)?;
    let w_inv_half = symmetric_power(&gram, -0.5)?;
    let op = &w_half * cov * &w_half;
    let op = (&op + op.transpose()) * 0.5;
    let eig = SymmetricEigen::new(op);

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    // Second moment of the data fixes the scale of pure rounding noise, which
    // appears when every curve is identical.
    let second_moment = (0..n)
        .map(|i| {
            let a = DVector::from_column_slice(data[i].coeffs());
            (a.transpose() * &gram * &a)[0]
        })
        .sum::<f64>()
        / n as f64;
    let largest = eig.eigenvalues[order[0]];
    let cutoff = (RELATIVE_EIGENVALUE_CUTOFF * largest).max(1e-20 * second_moment);
    let max_components = (n - 1).min(k);

    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenfunction_coeffs = Vec::with_capacity(k);
    for (rank, &idx) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[idx];
        let kept = rank < max_components && lambda > cutoff && lambda > 0.0;
        eigenvalues.push(if kept { lambda } else { 0.0 });
        let mut f: Vec<f64> = (&w_inv_half * eig.eigenvectors.column(idx)).iter().copied().collect();
        let pivot = (0..k).fold(0, |b, i| if f[i].abs() > f[b].abs() { i } else { b });
        if f[pivot] < 0.0 {
            f.iter_mut().for_each(|v| *v = -*v);
        }
        eigenfunction_coeffs.push(f);
    }

    Ok(FpcaModel {
        basis,
        gram,
        mean_coeffs: mu.to_vec(),
        eigenvalues,
        eigenfunction_coeffs,
    })
}

impl FpcaModel {
    /// Assembles a model from stored parts (eigenvalues sorted non-increasing).
    pub fn from_parts(
        basis: Arc<BSplineBasis>,
        mean_coeffs: Vec<f64>,
        eigenvalues: Vec<f64>,
        eigenfunction_coeffs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = basis.size();
        if mean_coeffs.len() != k
            || eigenvalues.len() != eigenfunction_coeffs.len()
            || eigenfunction_coeffs.iter().any(|f| f.len() != k)
        {
            return Err(Error::SizeMismatch("FPCA parts disagree with the basis size".into()));
        }
        if eigenvalues.iter().any(|&l| !(l >= -1e-10)) {
            return Err(Error::InvalidParameter("negative eigenvalue".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("eigenvalues must be non-increasing".into()));
        }
        let eigenvalues = eigenvalues.into_iter().map(|l| l.max(0.0)).collect();
        let gram = basis.gram_matrix();
        Ok(Self {
            basis,
            gram,
            mean_coeffs,
            eigenvalues,
            eigenfunction_coeffs,
        })
    }

    pub fn basis(&self) -> &Arc<BSplineBasis> {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn mean_coeffs(&self) -> &[f64] {
        &self.mean_coeffs
    }

    pub fn mean(&self) -> FunctionalDatum {
        FunctionalDatum::new("mean", Arc::clone(&self.basis), self.mean_coeffs.clone())
            .expect("mean has the basis size")
    }

    /// Full spectrum, non-increasing; dropped components read as 0.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunction_coeffs(&self) -> &[Vec<f64>] {
        &self.eigenfunction_coeffs
    }

    pub fn eigenfunction(&self, j: usize) -> Option<FunctionalDatum> {
        self.eigenfunction_coeffs.get(j).map(|c| {
            FunctionalDatum::new(format!("pc{}", j + 1), Arc::clone(&self.basis), c.clone())
                .expect("eigenfunction has the basis size")
        })
    }

    /// Number of components with a positive eigenvalue.
    pub fn q_max(&self) -> usize {
        self.eigenvalues.iter().take_while(|&&l| l > 0.0).count()
    }

    /// L2 inner product of two coefficient vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let a = DVector::from_column_slice(a);
        let b = DVector::from_column_slice(b);
        (a.transpose() * &self.gram * b)[0]
    }

    fn check_q(&self, q: usize) -> Result<()> {
        if q > self.q_max() {
            return Err(Error::OutOfRange(format!(
                "q = {q} exceeds the {} retained components",
                self.q_max()
            )));
        }
        Ok(())
    }
}

/// Principal component scores of each curve on the first `q` components.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub column_variances: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::SizeMismatch(format!(
                "{} ids for {} score rows",
                ids.len(),
                values.len()
            )));
        }
        let q = values.first().map_or(0, Vec::len);
        if values.iter().any(|r| r.len() != q) {
            return Err(Error::SizeMismatch("ragged score rows".into()));
        }
        let n = values.len();
        let column_variances = (0..q)
            .map(|j| {
                if n < 2 {
                    return 0.0;
                }
                let mean = values.iter().map(|r| r[j]).sum::<f64>() / n as f64;
                values.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
            })
            .collect();
        Ok(Self {
            ids,
            values,
            column_variances,
        })
    }

    pub fn q(&self) -> usize {
        self.column_variances.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend((1..=self.q()).map(|j| format!("pc{j}")));
        w.write_record(&header)?;
        for (id, row) in self.ids.iter().zip(&self.values) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let ok = header.get(0) == Some("id")
            && header
                .iter()
                .skip(1)
                .enumerate()
                .all(|(j, h)| h == format!("pc{}", j + 1));
        if !ok {
            return Err(Error::Structure("score CSV header must be `id,pc1..pcq`".into()));
        }
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            ids.push(rec[0].to_string());
            values.push(
                rec.iter()
                    .skip(1)
                    .map(|v| {
                        v.parse::<f64>().map_err(|_| Error::Parse {
                            line,
                            message: format!("bad score `{v}`"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Self::new(ids, values)
    }
}

/// `C_ij = <x_i - mu, f_j>` for `j < q`.
pub fn scores(data: &[FunctionalDatum], model: &FpcaModel, q: usize) -> Result<ScoreMatrix> {
    model.check_q(q)?;
    if data.iter().any(|d| **d.basis() != *model.basis) {
        return Err(Error::BasisMismatch);
    }
    // Project through W f_j once per component.
    let projectors: Vec<DVector<f64>> = model.eigenfunction_coeffs[..q]
        .iter()
        .map(|f| &model.gram * DVector::from_column_slice(f))
        .collect();
    let values = data
        .iter()
        .map(|d| {
            let centered: Vec<f64> = d
                .coeffs()
                .iter()
                .zip(&model.mean_coeffs)
                .map(|(a, m)| a - m)
                .collect();
            projectors
                .iter()
                .map(|p| centered.iter().zip(p.iter()).map(|(c, w)| c * w).sum())
                .collect()
        })
        .collect();
    ScoreMatrix::new(data.iter().map(|d| d.id().to_string()).collect(), values)
}

/// Truncated expansion `mu + sum_{j<q} C_j f_j`.
pub fn reconstruct(model: &FpcaModel, score_row: &[f64], q: usize) -> Result<FunctionalDatum> {
    model.check_q(q)?;
    if score_row.len() < q {
        return Err(Error::SizeMismatch(format!(
            "score row of length {} for q = {q}",
            score_row.len()
        )));
    }
    let mut coeffs = model.mean_coeffs.clone();
    for (c, f) in score_row[..q].iter().zip(&model.eigenfunction_coeffs) {
        for (a, b) in coeffs.iter_mut().zip(f) {
            *a += c * b;
        }
    }
    FunctionalDatum::new("reconstruction", Arc::clone(&model.basis), coeffs)
}

/// Cumulative explained-variance fractions of the retained components.
pub fn explained_variance(model: &FpcaModel) -> Result<Vec<f64>> {
    cumulative_fractions(&model.eigenvalues[..model.q_max()])
}

/// Cumulative fractions of a non-negative spectrum.
pub fn cumulative_fractions(spectrum: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = spectrum.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateCohort("spectrum has no positive eigenvalue".into()));
    }
    let mut acc = 0.0;
    Ok(spectrum
        .iter()
        .map(|l| {
            acc += l;
            acc / total
        })
        .collect())
}

/// Smallest number of components whose cumulative fraction reaches `threshold`.
pub fn choose_q(model: &FpcaModel, threshold: f64) -> Result<usize> {
    choose_q_from_spectrum(&model.eigenvalues[..model.q_max()], threshold)
}

pub fn choose_q_from_spectrum(spectrum: &[f64], threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "variance threshold {threshold} outside (0, 1]"
        )));
    }
    let cum = cumulative_fractions(spectrum)?;
    Ok(cum
        .iter()
        .position(|&c| c >= threshold)
        .map_or(cum.len(), |i| i + 1))
}

/// Persisted FPCA model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaRecord {
    pub basis: BasisSpec,
    pub mean_coeffs: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenfunction_coeffs: Vec<Vec<f64>>,
}

impl FpcaModel {
    pub fn to_json(&self) -> Result<String> {
        let record = FpcaRecord {
            basis: self.basis.spec(),
            mean_coeffs: self.mean_coeffs.clone(),
            eigenvalues: self.eigenvalues.clone(),
            eigenfunction_coeffs: self.eigenfunction_coeffs.clone(),
        };
        Ok(serde_json::to_string_pretty(&record)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: FpcaRecord = serde_json::from_str(text)?;
        Self::from_parts(
            Arc::new(r.basis.build()?),
            r.mean_coeffs,
            r.eigenvalues,
            r.eigenfunction_coeffs,
        )
    }
}
