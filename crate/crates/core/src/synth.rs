//! Seeded synthetic cohorts with known grades, raw landmark files and
//! functional data with a planted covariance spectrum.
//!
//! All randomness comes from ChaCha8 streams, which are identical on every
//! platform for a given seed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::{BSplineBasis, FunctionalDatum, DEFAULT_INTERIOR_KNOTS, DEFAULT_ORDER};
use crate::curve::{uniform_grid, AdjustedGrade, Cohort, HbGrade, SampledCurve, DEFAULT_GRID_SIZE};
use crate::error::{Error, Result};
use crate::ingest::{
    serialize_measurement, Exercise, Frame, PoiMap, RawMeasurement, POI_COUNT,
};

/// Dip shape of one grade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeArchetype {
    pub grade: AdjustedGrade,
    pub depth: f64,
    pub center: f64,
    pub width: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSpec {
    pub grades: Vec<GradeArchetype>,
    pub sigma: f64,
    pub grid_size: usize,
    pub seed: u64,
    /// Standard deviation of a per-curve perturbation of the dip depth.
    #[serde(default)]
    pub depth_jitter: f64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        let grades = AdjustedGrade::LADDER
            .into_iter()
            .zip([0.05, 0.2, 0.4, 0.7])
            .map(|(grade, depth)| GradeArchetype {
                grade,
                depth,
                center: 0.5,
                width: 0.1,
                count: 30,
            })
            .collect();
        Self {
            grades,
            sigma: 0.02,
            grid_size: DEFAULT_GRID_SIZE,
            seed: 1,
            depth_jitter: 0.0,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.grades.is_empty() {
            return bad("cohort spec has no grades".into());
        }
        for g in &self.grades {
            if !(0.0..1.0).contains(&g.depth) {
                return bad(format!("dip depth {} outside [0, 1)", g.depth));
            }
            if !(0.0..=1.0).contains(&g.center) || !(g.width > 0.0) {
                return bad(format!("dip center {} / width {} invalid", g.center, g.width));
            }
            if g.count == 0 {
                return bad(format!("grade {} has no curves", g.grade));
            }
        }
        if self
            .grades
            .windows(2)
            .any(|w| w[1].grade <= w[0].grade || w[1].depth <= w[0].depth)
        {
            return bad("grades and dip depths must both be strictly increasing".into());
        }
        if !(self.sigma >= 0.0) || !(self.depth_jitter >= 0.0) {
            return bad("sigma and depth_jitter must be non-negative".into());
        }
        if self.grid_size < 2 {
            return bad(format!("grid size {} below 2", self.grid_size));
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.grades.iter().map(|g| g.count).sum()
    }
}

/// Curves `1 - depth * exp(-(t - c)^2 / (2 w^2)) + e` on the spec grid, labelled
/// with their planted grade.
pub fn generate_cohort(spec: &CohortSpec) -> Result<Cohort> {
    spec.validate()?;
    let grid = uniform_grid(spec.grid_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut curves = Vec::with_capacity(spec.total());
    let mut labels = Vec::with_capacity(spec.total());
    for g in &spec.grades {
        let label = HbGrade::from_raw(g.grade.value() as i64)?;
        for i in 0..g.count {
            let depth = if spec.depth_jitter > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                (g.depth + spec.depth_jitter * z).clamp(0.0, 0.99)
            } else {
                g.depth
            };
            let values = grid
                .iter()
                .map(|&t| {
                    let e: f64 = if spec.sigma > 0.0 {
                        spec.sigma * rng.sample::<f64, _>(StandardNormal)
                    } else {
                        0.0
                    };
                    1.0 - depth * (-(t - g.center).powi(2) / (2.0 * g.width * g.width)).exp() + e
                })
                .collect();
            curves.push(SampledCurve::new(
                format!("{}_{:03}", g.grade.name().to_ascii_lowercase(), i + 1),
                grid.clone(),
                values,
            )?);
            labels.push(label);
        }
    }
    Cohort::new(curves, Some(labels), spec.grid_size)
}

/// Neutral face in millimetres, symmetric about the plane x = 0.
fn base_face() -> [[f64; 3]; POI_COUNT] {
    // Points 0..=5 on the left (x < 0); 6..=11 mirror them.
    let left: [[f64; 3]; 6] = [
        [-32.0, 38.0, 10.0], // eye outer corner (lower lid reference)
        [-30.0, 44.0, 12.0], // upper lid
        [-20.0, 52.0, 16.0], // brow inner
        [-12.0, 40.0, 18.0], // eye inner corner
        [-34.0, 58.0, 12.0], // brow outer
        [-46.0, 20.0, 0.0],  // cheek
    ];
    let mut p = [[0.0; 3]; POI_COUNT];
    for (i, q) in left.iter().enumerate() {
        p[i] = *q;
        p[i + 6] = [-q[0], q[1], q[2]];
    }
    p[12] = [0.0, 15.0, 40.0]; // nose tip
    p[13] = [0.0, 62.0, 20.0]; // forehead
    p[14] = [-24.0, -12.0, 22.0]; // mouth corner
    p[15] = [24.0, -12.0, 22.0];
    p[16] = [-8.0, -6.0, 28.0]; // upper lip
    p[17] = [8.0, -6.0, 28.0];
    p[18] = [0.0, -40.0, 20.0]; // chin
    p[19] = [-34.0, -2.0, 14.0]; // cheek bulge
    p[20] = [34.0, -2.0, 14.0];
    p
}

/// Relative stretch of the moving pair at peak motion, per exercise.
fn amplitude(exercise: Exercise) -> f64 {
    match exercise {
        Exercise::Closing => -0.8,
        Exercise::Smiling | Exercise::Baring | Exercise::ClosingBaring => 0.3,
        Exercise::Pursing => -0.25,
        Exercise::Blowing => 0.15,
        Exercise::Raising | Exercise::RaisingPursing => 0.12,
        Exercise::Frowning => -0.08,
    }
}

/// Raised-cosine bump, 1 at `center`, 0 outside `center +- half`.
fn bump(t: f64, center: f64, half: f64) -> f64 {
    let u = (t - center) / half;
    if u.abs() >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * u).cos())
    }
}

/// Measurement whose symmetry curves dip to exactly `1 - asym` at the motion peak.
///
/// For each exercise the right-side moving POI sits at `rest * (1 + a b(t))`
/// from its reference point and the left one at `rest * (1 + a b(t)) (1 - asym b(t))`.
pub fn synth_measurement(id: &str, asym: f64, seed: u64) -> Result<RawMeasurement> {
    if !(0.0..1.0).contains(&asym) {
        return Err(Error::InvalidParameter(format!("asymmetry {asym} outside [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = PoiMap::default();
    let face = base_face();
    let mut exercises = BTreeMap::new();
    for exercise in Exercise::ALL {
        let g = map.get(exercise)?;
        let n_frames = 2 * rng.random_range(20..=40) + 1;
        let duration = rng.random_range(2.0..4.0);
        let dt = duration / (n_frames - 1) as f64;
        let peak = rng.random_range(n_frames / 3..=2 * n_frames / 3);
        let center = peak as f64 * dt;
        let half = 0.8 * center.min(duration - center);
        let offset: [f64; 3] = std::array::from_fn(|_| rng.random_range(-50.0..50.0));
        let amp = amplitude(exercise);

        let frames = (0..n_frames)
            .map(|f| {
                let time = f as f64 * dt;
                let b = bump(time, center, half);
                let mut points = face;
                let stretch = 1.0 + amp * b;
                for (pair, factor) in [(g.right, stretch), (g.left, stretch * (1.0 - asym * b))] {
                    let (moving, reference) = pair;
                    for k in 0..3 {
                        points[moving][k] =
                            face[reference][k] + (face[moving][k] - face[reference][k]) * factor;
                    }
                }
                for p in points.iter_mut() {
                    for k in 0..3 {
                        p[k] += offset[k];
                    }
                }
                Frame { time, points }
            })
            .collect();
        exercises.insert(exercise, frames);
    }
    Ok(RawMeasurement {
        id: id.to_string(),
        exercises,
    })
}

/// Raw measurement file content for an archetype with asymmetry `asym`.
pub fn generate_raw_measurement(asym: f64, seed: u64) -> Result<String> {
    Ok(serialize_measurement(&synth_measurement(&format!("synth_{seed}"), asym, seed)?))
}

/// Dip asymmetry used for raw files of each adjusted grade.
pub fn grade_asymmetry(grade: AdjustedGrade) -> f64 {
    match grade {
        AdjustedGrade::Hb1 => 0.05,
        AdjustedGrade::Hb2 => 0.2,
        AdjustedGrade::Hb3 => 0.4,
        AdjustedGrade::Hb6 => 0.7,
    }
}

fn greville(basis: &BSplineBasis) -> Vec<f64> {
    let d = basis.degree();
    let t = basis.knots();
    (0..basis.size())
        .map(|k| t[k + 1..=k + d].iter().sum::<f64>() / d as f64)
        .collect()
}

/// L2-orthonormal modes in the default basis, smooth cosines orthonormalised
/// with the Gram matrix.
pub fn orthonormal_modes(basis: &BSplineBasis, count: usize) -> Result<Vec<Vec<f64>>> {
    let k = basis.size();
    if count > k {
        return Err(Error::InvalidParameter(format!(
            "{count} modes requested from a basis of size {k}"
        )));
    }
    let w = basis.gram_matrix();
    let xi = greville(basis);
    let mut modes: Vec<DVector<f64>> = Vec::with_capacity(count);
    for j in 0..count {
        let mut v = DVector::from_iterator(k, xi.iter().map(|&x| (PI * (j + 1) as f64 * x).cos()));
        for _ in 0..2 {
            for m in &modes {
                let proj = (v.transpose() * &w * m)[0];
                v -= m * proj;
            }
        }
        let norm = (v.transpose() * &w * &v)[0].sqrt();
        modes.push(v / norm);
    }
    Ok(modes.into_iter().map(|m| m.iter().copied().collect()).collect())
}

/// `mu + sum_j sqrt(v_j) z_ij phi_j` in the default cubic basis.
pub fn planted_spectrum_cohort(variances: &[f64], n: usize, seed: u64) -> Result<Vec<FunctionalDatum>> {
    if variances.is_empty()
        || variances.iter().any(|&v| !(v > 0.0))
        || variances.windows(2).any(|w| w[1] > w[0])
    {
        return Err(Error::InvalidParameter(
            "variances must be positive and non-increasing".into(),
        ));
    }
    if n <= variances.len() {
        return Err(Error::InvalidParameter(format!(
            "need more than {} curves, got {n}",
            variances.len()
        )));
    }
    let basis = Arc::new(BSplineBasis::uniform(DEFAULT_ORDER, DEFAULT_INTERIOR_KNOTS, (0.0, 1.0))?);
    let modes = orthonormal_modes(&basis, variances.len())?;
    let mean: Vec<f64> = greville(&basis)
        .iter()
        .map(|&x| 1.0 - 0.3 * (-(x - 0.5).powi(2) / 0.02).exp())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut c = mean.clone();
            for (v, phi) in variances.iter().zip(&modes) {
                let z: f64 = rng.sample(StandardNormal);
                let s = v.sqrt() * z;
                for (a, p) in c.iter_mut().zip(phi) {
                    *a += s * p;
                }
            }
            FunctionalDatum::new(format!("p{:04}", i + 1), Arc::clone(&basis), c)
        })
        .collect()
}

/// Six-mode spectrum whose cumulative fraction first reaches 0.95 at the sixth mode.
pub const SIX_MODE_SPECTRUM: [f64; 6] = [32.0, 22.0, 16.0, 12.0, 10.0, 8.0];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpca::{choose_q, explained_variance, fit_fpca};
    use crate::ingest::{parse_measurement, symmetry_indicator};

    #[test]
    fn default_spec_is_valid() {
        let spec = CohortSpec::default();
        spec.validate().unwrap();
        let c = generate_cohort(&spec).unwrap();
        assert_eq!(c.len(), 120);
        let labels = c.labels().unwrap();
        assert_eq!(labels[0].adjusted(), AdjustedGrade::Hb1);
        assert_eq!(labels[119].adjusted(), AdjustedGrade::Hb6);
    }

    #[test]
    fn noiseless_healthy_archetype_is_flat() {
        let mut spec = CohortSpec {
            sigma: 0.0,
            ..CohortSpec::default()
        };
        spec.grades[0].depth = 0.0;
        let c = generate_cohort(&spec).unwrap();
        for curve in &c.curves()[..30] {
            assert!(curve.values().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn same_seed_same_cohort() {
        let spec = CohortSpec {
            depth_jitter: 0.05,
            ..CohortSpec::default()
        };
        assert_eq!(generate_cohort(&spec).unwrap(), generate_cohort(&spec).unwrap());
        let other = CohortSpec { seed: 2, ..spec.clone() };
        assert_ne!(generate_cohort(&spec).unwrap(), generate_cohort(&other).unwrap());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = CohortSpec::default();
        s.grades[1].depth = 0.01;
        assert!(s.validate().is_err());
        let mut s = CohortSpec::default();
        s.grades[2].count = 0;
        assert!(s.validate().is_err());
        let s = CohortSpec {
            sigma: -1.0,
            ..CohortSpec::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let s = CohortSpec::default();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<CohortSpec>(&text).unwrap(), s);
    }

    fn min_symmetry(asym: f64, seed: u64) -> (f64, f64) {
        let text = generate_raw_measurement(asym, seed).unwrap();
        let m = parse_measurement("x", &text).unwrap();
        let map = PoiMap::default();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for ex in Exercise::ALL {
            let s = symmetry_indicator(&m, ex, &map).unwrap();
            let mn = s.values().iter().copied().fold(f64::INFINITY, f64::min);
            lo = lo.min(mn);
            hi = hi.max(mn);
        }
        (lo, hi)
    }

    #[test]
    fn base_face_pairs_have_equal_rest_lengths() {
        let face = base_face();
        let d = |a: usize, b: usize| {
            (0..3).map(|k| (face[a][k] - face[b][k]).powi(2)).sum::<f64>().sqrt()
        };
        for (_, g) in PoiMap::default().0 {
            assert_eq!(d(g.left.0, g.left.1), d(g.right.0, g.right.1));
        }
    }

    #[test]
    fn symmetric_face_gives_unit_symmetry() {
        for seed in 0..5 {
            let text = generate_raw_measurement(0.0, seed).unwrap();
            let m = parse_measurement("x", &text).unwrap();
            for ex in Exercise::ALL {
                let s = symmetry_indicator(&m, ex, &PoiMap::default()).unwrap();
                assert!(s.values().iter().all(|v| (v - 1.0).abs() <= 1e-9), "{ex}");
            }
        }
    }

    #[test]
    fn asymmetry_sets_minimum_symmetry() {
        for asym in [0.2, 0.5, 0.7] {
            for seed in 0..5 {
                let (lo, hi) = min_symmetry(asym, seed);
                assert!((lo - (1.0 - asym)).abs() <= 0.02, "asym {asym}: min {lo}");
                assert!((hi - (1.0 - asym)).abs() <= 0.02, "asym {asym}: min {hi}");
            }
        }
    }

    #[test]
    fn raw_file_round_trips() {
        let text = generate_raw_measurement(0.4, 7).unwrap();
        let m = parse_measurement("synth_7", &text).unwrap();
        assert_eq!(serialize_measurement(&m), text);
        assert_eq!(m.exercises.len(), 9);
    }

    #[test]
    fn modes_are_orthonormal() {
        let basis = BSplineBasis::uniform(4, 9, (0.0, 1.0)).unwrap();
        let w = basis.gram_matrix();
        let modes = orthonormal_modes(&basis, 13).unwrap();
        for i in 0..13 {
            for j in 0..13 {
                let a = DVector::from_column_slice(&modes[i]);
                let b = DVector::from_column_slice(&modes[j]);
                let ip = (a.transpose() * &w * b)[0];
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn single_mode_dominates() {
        let data = planted_spectrum_cohort(&[4.0], 100, 3).unwrap();
        let model = fit_fpca(&data).unwrap();
        assert!(explained_variance(&model).unwrap()[0] >= 0.99);
        assert!(model.eigenvalues()[1] < 1e-10);
    }

    #[test]
    fn six_mode_ladder_recovered() {
        let data = planted_spectrum_cohort(&SIX_MODE_SPECTRUM, 400, 17).unwrap();
        let model = fit_fpca(&data).unwrap();
        assert_eq!(choose_q(&model, 0.95).unwrap(), 6);
        for (got, want) in model.eigenvalues().iter().zip(SIX_MODE_SPECTRUM) {
            assert!((got - want).abs() <= 0.15 * want, "{got} vs {want}");
        }
        assert!(model.eigenvalues()[6..].iter().all(|&l| l < 1e-10));
    }

    #[test]
    fn planted_preconditions() {
        assert!(planted_spectrum_cohort(&[1.0, 2.0], 10, 0).is_err());
        assert!(planted_spectrum_cohort(&[1.0, 0.5], 2, 0).is_err());
    }
}
