use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_items;
use super::dtw::dtw_distance;
use crate::basis::FunctionalDatum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    EuclideanGrid,
    L2Functional,
    Dtw,
}

/// Symmetric matrix of pairwise dissimilarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    /// Wraps a dense row-major matrix after checking its invariants.
    pub fn new(n: usize, values: Vec<f64>, metric: Metric) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::SizeMismatch(format!(
                "{} entries for a {n} x {n} matrix",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter("distance diagonal must be 0".into()));
            }
            for j in 0..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(Error::InvalidParameter(format!("bad distance {a} at ({i}, {j})")));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidParameter(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, values, metric })
    }

    /// Fills the upper triangle in parallel and mirrors it.
    fn from_pairs<F>(n: usize, metric: Metric, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let mut values = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for (off, &d) in row.iter().enumerate() {
                let j = i + 1 + off;
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Ok(Self { n, values, metric })
    }

    /// Euclidean distance between rows sampled on a common grid (or score rows).
    pub fn euclidean(items: &[Vec<f64>]) -> Result<Self> {
        check_items(items)?;
        Self::from_pairs(items.len(), Metric::EuclideanGrid, |i, j| {
            Ok(super::sq_dist(&items[i], &items[j]).sqrt())
        })
    }

    /// `d(f, g)^2 = (a_f - a_g)^T W (a_f - a_g)`.
    pub fn l2_functional(data: &[FunctionalDatum]) -> Result<Self> {
        let first = data
            .first()
            .ok_or_else(|| Error::InsufficientData("no functional data".into()))?;
        if data.iter().any(|d| !d.same_basis(first)) {
            return Err(Error::MixedRepresentation("functional data use different bases".into()));
        }
        let w: DMatrix<f64> = first.basis().gram_matrix();
        Self::from_pairs(data.len(), Metric::L2Functional, |i, j| {
            let diff = DVector::from_iterator(
                w.nrows(),
                data[i].coeffs().iter().zip(data[j].coeffs()).map(|(a, b)| a - b),
            );
            Ok((diff.transpose() * &w * &diff)[0].max(0.0).sqrt())
        })
    }

    pub fn dtw(items: &[Vec<f64>], window: Option<usize>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InsufficientData("no items".into()));
        }
        Self::from_pairs(items.len(), Metric::Dtw, |i, j| dtw_distance(&items[i], &items[j], window))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Same matrix with every entry multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
            metric: self.metric,
        }
    }
}
