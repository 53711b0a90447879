//! Route dispatch: grid curves, basis coefficients or FPC scores into one of
//! the clustering algorithms.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    cluster_means, fuzzy_cmeans, gmm_bic_select, gmm_em, hierarchical, kmeans, pam, Clustering,
    Covariance, DistanceMatrix, GmmModel, GmmOptions, Linkage,
};
use crate::basis::{fit_all, BSplineBasis, FunctionalDatum, DEFAULT_INTERIOR_KNOTS, DEFAULT_ORDER};
use crate::curve::{Cohort, SampledCurve};
use crate::error::{Error, Result};
use crate::fpca::{choose_q, fit_fpca, scores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    TsDtw,
    TsFuzzy,
    BasisCoeff,
    FpcKmeans,
    FpcHier,
    FpcPam,
    FpcGmm,
}

impl Route {
    pub const ALL: [Route; 7] = [
        Route::TsDtw,
        Route::TsFuzzy,
        Route::BasisCoeff,
        Route::FpcKmeans,
        Route::FpcHier,
        Route::FpcPam,
        Route::FpcGmm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::TsDtw => "ts-dtw",
            Route::TsFuzzy => "ts-fuzzy",
            Route::BasisCoeff => "basis-coeff",
            Route::FpcKmeans => "fpc-kmeans",
            Route::FpcHier => "fpc-hier",
            Route::FpcPam => "fpc-pam",
            Route::FpcGmm => "fpc-gmm",
        }
    }

    pub fn uses_grid(self) -> bool {
        matches!(self, Route::TsDtw | Route::TsFuzzy)
    }

    pub fn uses_scores(self) -> bool {
        matches!(self, Route::FpcKmeans | Route::FpcHier | Route::FpcPam | Route::FpcGmm)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Route::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown route `{s}`")))
    }
}

/// Covariance family for mixture routes; `Auto` picks by BIC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceChoice {
    Auto,
    Diagonal,
    Full,
}

impl FromStr for CovarianceChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(CovarianceChoice::Auto),
            other => Covariance::from_str(other).map(|c| match c {
                Covariance::Diagonal => CovarianceChoice::Diagonal,
                Covariance::Full => CovarianceChoice::Full,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterParams {
    pub k: usize,
    pub seed: u64,
    pub fuzzifier: f64,
    pub window: Option<usize>,
    pub linkage: Linkage,
    pub covariance: CovarianceChoice,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub n_init: usize,
    pub q_threshold: f64,
    /// Fixed number of components; overrides `q_threshold`.
    pub q: Option<usize>,
    pub basis_order: usize,
    pub interior_knots: usize,
    pub lambda: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            k: 4,
            seed: 0,
            fuzzifier: super::fuzzy::DEFAULT_FUZZIFIER,
            window: None,
            linkage: Linkage::Ward,
            covariance: CovarianceChoice::Auto,
            restarts: super::kmeans::DEFAULT_RESTARTS,
            max_iter: 300,
            tol: 1e-9,
            n_init: 5,
            q_threshold: 0.95,
            q: None,
            basis_order: DEFAULT_ORDER,
            interior_knots: DEFAULT_INTERIOR_KNOTS,
            lambda: 0.0,
        }
    }
}

impl ClusterParams {
    pub fn check_for(&self, route: Route) -> Result<()> {
        if self.window.is_some() && route != Route::TsDtw {
            return Err(Error::Conflict(format!("a DTW window has no meaning for route {route}")));
        }
        if !(self.q_threshold > 0.0 && self.q_threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "q threshold {} outside (0, 1]",
                self.q_threshold
            )));
        }
        if self.q == Some(0) {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        Ok(())
    }

    fn gmm_options(&self) -> GmmOptions {
        GmmOptions {
            covariance: match self.covariance {
                CovarianceChoice::Full => Covariance::Full,
                _ => Covariance::Diagonal,
            },
            max_iter: self.max_iter,
            tol: self.tol,
            n_init: self.n_init,
        }
    }
}

/// Item representation a route consumes.
#[derive(Debug, Clone)]
pub enum RouteInput {
    Grid(Vec<Vec<f64>>),
    Functional(Vec<FunctionalDatum>),
    /// Score rows, already truncated to the chosen number of components.
    Scores(Vec<Vec<f64>>),
}

#[derive(Debug, Clone)]
pub struct RouteResult {
    pub route: Route,
    pub clustering: Clustering,
    /// Distance in the route's own feature space, used for silhouettes.
    pub distance: DistanceMatrix,
    pub memberships: Option<Vec<Vec<f64>>>,
    pub gmm: Option<GmmModel>,
    /// Number of principal components used by score routes.
    pub q: Option<usize>,
}

fn gmm(items: &[Vec<f64>], params: &ClusterParams) -> Result<(Clustering, GmmModel)> {
    match params.covariance {
        CovarianceChoice::Auto => gmm_bic_select(items, params.k, &params.gmm_options(), params.seed),
        _ => gmm_em(items, params.k, &params.gmm_options(), params.seed),
    }
}

/// Projects functional data on the leading principal components.
pub fn fpc_scores(data: &[FunctionalDatum], params: &ClusterParams) -> Result<(Vec<Vec<f64>>, usize)> {
    let model = fit_fpca(data)?;
    let q = match params.q {
        Some(q) => q,
        None => choose_q(&model, params.q_threshold)?,
    };
    Ok((scores(data, &model, q)?.values, q))
}

/// Runs one route on an already prepared representation.
pub fn run_route(route: Route, input: RouteInput, params: &ClusterParams) -> Result<RouteResult> {
    params.check_for(route)?;
    let k = params.k;
    let wrong = |need: &str| Err(Error::MixedRepresentation(format!("route {route} needs {need}")));
    let mut memberships = None;
    let mut gmm_model = None;
    let mut q = None;
    let (clustering, distance) = match route {
        Route::TsDtw | Route::TsFuzzy => {
            let RouteInput::Grid(rows) = input else { return wrong("grid curves") };
            if route == Route::TsDtw {
                let dist = DistanceMatrix::dtw(&rows, params.window)?;
                let mut c = pam(&dist, k, params.seed, params.max_iter)?;
                let medoids = c.medoids.clone().expect("pam sets medoids");
                c.centers = medoids.iter().map(|&m| rows[m].clone()).collect();
                (c, dist)
            } else {
                let mut f = fuzzy_cmeans(&rows, k, params.fuzzifier, params.seed, params.max_iter, params.tol)?;
                for r in 1..params.restarts as u64 {
                    let seed = params.seed.wrapping_add(r);
                    let g = fuzzy_cmeans(&rows, k, params.fuzzifier, seed, params.max_iter, params.tol)?;
                    if g.objective() < f.objective() {
                        f = g;
                    }
                }
                let c = f.harden();
                memberships = Some(f.memberships);
                (c, DistanceMatrix::euclidean(&rows)?)
            }
        }
        Route::BasisCoeff => {
            let RouteInput::Functional(data) = input else { return wrong("functional data") };
            let dist = DistanceMatrix::l2_functional(&data)?;
            let coeffs: Vec<Vec<f64>> = data.iter().map(|d| d.coeffs().to_vec()).collect();
            let (c, m) = gmm(&coeffs, params)?;
            memberships = Some(m.responsibilities.clone());
            gmm_model = Some(m);
            (c, dist)
        }
        Route::FpcKmeans | Route::FpcHier | Route::FpcPam | Route::FpcGmm => {
            let rows = match input {
                RouteInput::Scores(rows) => rows,
                RouteInput::Functional(data) => fpc_scores(&data, params)?.0,
                RouteInput::Grid(_) => return wrong("functional data or scores"),
            };
            q = rows.first().map(Vec::len);
            let dist = DistanceMatrix::euclidean(&rows)?;
            let c = match route {
                Route::FpcKmeans => kmeans(&rows, k, params.seed, params.max_iter, params.restarts)?,
                Route::FpcHier => {
                    let mut c = hierarchical(&dist, params.linkage, k)?;
                    c.centers = cluster_means(&rows, &c.labels, k);
                    c
                }
                Route::FpcPam => {
                    let mut c = pam(&dist, k, params.seed, params.max_iter)?;
                    let medoids = c.medoids.clone().expect("pam sets medoids");
                    c.centers = medoids.iter().map(|&m| rows[m].clone()).collect();
                    c
                }
                _ => {
                    let (c, m) = gmm(&rows, params)?;
                    memberships = Some(m.responsibilities.clone());
                    gmm_model = Some(m);
                    c
                }
            };
            (c, dist)
        }
    };
    Ok(RouteResult {
        route,
        clustering,
        distance,
        memberships,
        gmm: gmm_model,
        q,
    })
}

/// Smooths every curve of the cohort on its common grid.
pub fn smooth_cohort(cohort: &Cohort, params: &ClusterParams) -> Result<Vec<FunctionalDatum>> {
    let basis = Arc::new(BSplineBasis::uniform(params.basis_order, params.interior_knots, (0.0, 1.0))?);
    let grid = cohort.grid().to_vec();
    let curves: Vec<SampledCurve> = cohort
        .curves()
        .iter()
        .zip(cohort.grid_values()?)
        .map(|(c, v)| SampledCurve::new(c.id(), grid.clone(), v))
        .collect::<Result<_>>()?;
    fit_all(&basis, &curves, params.lambda)
}

/// Full route from a registered cohort.
pub fn cluster_pipeline(cohort: &Cohort, route: Route, params: &ClusterParams) -> Result<RouteResult> {
    params.check_for(route)?;
    let input = if route.uses_grid() {
        RouteInput::Grid(cohort.grid_values()?)
    } else {
        RouteInput::Functional(smooth_cohort(cohort, params)?)
    };
    run_route(route, input, params)
}

/// Persisted clustering with 1-based labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringRecord {
    pub route: Route,
    pub k: usize,
    pub seed: u64,
    pub ids: Vec<String>,
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    pub objective: f64,
    #[serde(default)]
    pub q: Option<usize>,
    pub params: ClusterParams,
}

impl ClusteringRecord {
    pub fn new(result: &RouteResult, ids: Vec<String>, params: &ClusterParams) -> Result<Self> {
        let c = &result.clustering;
        if ids.len() != c.len() {
            return Err(Error::SizeMismatch(format!("{} ids for {} labels", ids.len(), c.len())));
        }
        Ok(Self {
            route: result.route,
            k: c.k,
            seed: c.seed,
            ids,
            labels: c.labels.iter().map(|l| l + 1).collect(),
            sizes: c.sizes(),
            objective: c.objective,
            q: result.q,
            params: params.clone(),
        })
    }

    /// 0-based labels after checking the record's own consistency.
    pub fn zero_based_labels(&self) -> Result<Vec<usize>> {
        if self.labels.len() != self.ids.len() {
            return Err(Error::Structure("labels and ids differ in length".into()));
        }
        if self.labels.iter().any(|&l| l == 0 || l > self.k) {
            return Err(Error::Structure(format!("labels must lie in 1..={}", self.k)));
        }
        Ok(self.labels.iter().map(|l| l - 1).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        r.zero_based_labels()?;
        Ok(r)
    }
}

/// Writes memberships as CSV `id,u1..uk`.
pub fn write_memberships_csv<W: Write>(ids: &[String], u: &[Vec<f64>], writer: W) -> Result<()> {
    if ids.len() != u.len() {
        return Err(Error::SizeMismatch(format!("{} ids for {} membership rows", ids.len(), u.len())));
    }
    let k = u.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((1..=k).map(|c| format!("u{c}")));
    w.write_record(&header)?;
    for (id, row) in ids.iter().zip(u) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_memberships_csv<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    let ok = header.get(0) == Some("id")
        && header.len() >= 2
        && header.iter().skip(1).enumerate().all(|(j, h)| h == format!("u{}", j + 1));
    if !ok {
        return Err(Error::Structure("membership CSV header must be `id,u1..uk`".into()));
    }
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        ids.push(rec[0].to_string());
        rows.push(
            rec.iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad membership `{v}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok((ids, rows))
}
