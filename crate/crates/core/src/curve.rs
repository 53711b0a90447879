//! Shared domain types: sampled indicator curves, HB grades and cohorts.
//!
//! Cohorts live on the unit time domain. Every curve handed to
//! [`Cohort::new`] is affinely rescaled so its first sample sits at 0 and its
//! last at 1, which puts recordings of different durations on one axis.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of points of the shared evaluation grid.
pub const DEFAULT_GRID_SIZE: usize = 101;

/// Finite sequence of `(time, value)` observations of one indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    id: String,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SampledCurve {
    pub fn new(id: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if times.len() != values.len() {
            return Err(Error::InvalidCurve(format!(
                "`{id}`: {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "`{id}`: need at least 2 samples, got {}",
                times.len()
            )));
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidCurve(format!("`{id}`: non-finite time {t}")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve(format!("`{id}`: non-finite value {v}")));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCurve(format!(
                "`{id}`: times not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { id, times, values })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(first time, last time)`.
    pub fn domain(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// Piecewise-linear interpolation at `t`. `t` must lie in the domain.
    pub fn interpolate(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Domain { point: t, lo, hi });
        }
        Ok(self.interpolate_clamped(t))
    }

    pub(crate) fn interpolate_clamped(&self, t: f64) -> f64 {
        let times = &self.times;
        let idx = times.partition_point(|&x| x < t);
        if idx < times.len() && times[idx] == t {
            return self.values[idx];
        }
        if idx == 0 {
            return self.values[0];
        }
        if idx == times.len() {
            return self.values[times.len() - 1];
        }
        let (t0, t1) = (times[idx - 1], times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        let frac = (t - t0) / (t1 - t0);
        let v = v0 + (v1 - v0) * frac;
        v.clamp(v0.min(v1), v0.max(v1))
    }

    /// Same curve with its time axis mapped affinely onto `[0, 1]`.
    pub fn rescaled_to_unit(&self) -> SampledCurve {
        let (lo, hi) = self.domain();
        let span = hi - lo;
        let mut times: Vec<f64> = self.times.iter().map(|t| (t - lo) / span).collect();
        let last = times.len() - 1;
        times[0] = 0.0;
        times[last] = 1.0;
        SampledCurve {
            id: self.id.clone(),
            times,
            values: self.values.clone(),
        }
    }
}

/// Resample `curve` on `grid` by piecewise-linear interpolation.
pub fn resample(curve: &SampledCurve, grid: &[f64]) -> Result<SampledCurve> {
    let values = grid
        .iter()
        .map(|&t| curve.interpolate(t))
        .collect::<Result<Vec<_>>>()?;
    SampledCurve::new(curve.id.clone(), grid.to_vec(), values)
}

/// `size` equally spaced points covering `[0, 1]`, both ends included.
pub fn uniform_grid(size: usize) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 2 points, got {size}"
        )));
    }
    let last = (size - 1) as f64;
    Ok((0..size).map(|i| i as f64 / last).collect())
}

/// Clinician-adjusted House-Brackmann grade after merging 4 into 3 and 5 into 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum AdjustedGrade {
    Hb1,
    Hb2,
    Hb3,
    Hb6,
}

impl AdjustedGrade {
    /// The ordered ladder used for grade assignment and approximate agreement.
    pub const LADDER: [AdjustedGrade; 4] = [
        AdjustedGrade::Hb1,
        AdjustedGrade::Hb2,
        AdjustedGrade::Hb3,
        AdjustedGrade::Hb6,
    ];

    pub fn value(self) -> u8 {
        match self {
            AdjustedGrade::Hb1 => 1,
            AdjustedGrade::Hb2 => 2,
            AdjustedGrade::Hb3 => 3,
            AdjustedGrade::Hb6 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdjustedGrade::Hb1 => "HB1",
            AdjustedGrade::Hb2 => "HB2",
            AdjustedGrade::Hb3 => "HB3",
            AdjustedGrade::Hb6 => "HB6",
        }
    }
}

impl TryFrom<u8> for AdjustedGrade {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(AdjustedGrade::Hb1),
            2 => Ok(AdjustedGrade::Hb2),
            3 => Ok(AdjustedGrade::Hb3),
            6 => Ok(AdjustedGrade::Hb6),
            other => Err(Error::InvalidGrade(other as i64)),
        }
    }
}

impl From<AdjustedGrade> for u8 {
    fn from(g: AdjustedGrade) -> u8 {
        g.value()
    }
}

impl fmt::Display for AdjustedGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Raw clinician grade together with its adjusted value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HbGrade {
    raw: u8,
    adjusted: AdjustedGrade,
}

impl HbGrade {
    pub fn from_raw(raw: i64) -> Result<Self> {
        let adjusted = match raw {
            1 => AdjustedGrade::Hb1,
            2 => AdjustedGrade::Hb2,
            3 | 4 => AdjustedGrade::Hb3,
            5 | 6 => AdjustedGrade::Hb6,
            other => return Err(Error::InvalidGrade(other)),
        };
        Ok(Self {
            raw: raw as u8,
            adjusted,
        })
    }

    pub fn raw(self) -> u8 {
        self.raw
    }

    pub fn adjusted(self) -> AdjustedGrade {
        self.adjusted
    }
}

/// Batch of curves on the unit domain, optional labels and a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    curves: Vec<SampledCurve>,
    labels: Option<Vec<HbGrade>>,
    grid: Vec<f64>,
}

impl Cohort {
    /// Builds a cohort, rescaling every curve's time axis to `[0, 1]`.
    pub fn new(
        curves: Vec<SampledCurve>,
        labels: Option<Vec<HbGrade>>,
        grid_size: usize,
    ) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InsufficientData("cohort has no curves".into()));
        }
        if let Some(labels) = &labels {
            if labels.len() != curves.len() {
                return Err(Error::SizeMismatch(format!(
                    "{} labels for {} curves",
                    labels.len(),
                    curves.len()
                )));
            }
        }
        let grid = uniform_grid(grid_size)?;
        let curves = curves.iter().map(SampledCurve::rescaled_to_unit).collect();
        Ok(Self {
            curves,
            labels,
            grid,
        })
    }

    pub fn curves(&self) -> &[SampledCurve] {
        &self.curves
    }

    pub fn labels(&self) -> Option<&[HbGrade]> {
        self.labels.as_deref()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.curves.iter().map(|c| c.id.clone()).collect()
    }

    pub fn with_labels(mut self, labels: Vec<HbGrade>) -> Result<Self> {
        if labels.len() != self.curves.len() {
            return Err(Error::SizeMismatch(format!(
                "{} labels for {} curves",
                labels.len(),
                self.curves.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Every curve resampled on the shared grid, one row per curve.
    pub fn grid_values(&self) -> Result<Vec<Vec<f64>>> {
        self.curves
            .iter()
            .map(|c| resample(c, &self.grid).map(|r| r.values))
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LongRow {
    id: String,
    time: f64,
    value: f64,
}

/// Writes curves in long format with header `id,time,value`.
pub fn write_curves_csv<W: Write>(curves: &[SampledCurve], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for c in curves {
        for (&time, &value) in c.times.iter().zip(&c.values) {
            w.serialize(LongRow {
                id: c.id.clone(),
                time,
                value,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads long-format curves; ids keep their order of first appearance.
pub fn read_curves_csv<R: Read>(reader: R) -> Result<Vec<SampledCurve>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "time", "value"] {
        return Err(Error::Structure(format!(
            "expected header `id,time,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for record in r.deserialize::<LongRow>() {
        let row = record?;
        let entry = rows.entry(row.id.clone()).or_insert_with(|| {
            order.push(row.id.clone());
            (Vec::new(), Vec::new())
        });
        entry.0.push(row.time);
        entry.1.push(row.value);
    }
    order
        .into_iter()
        .map(|id| {
            let (t, v) = rows.remove(&id).expect("id recorded on first sight");
            SampledCurve::new(id, t, v)
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    id: String,
    hb_raw: i64,
}

pub fn write_labels_csv<W: Write>(ids: &[String], labels: &[HbGrade], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (id, g) in ids.iter().zip(labels) {
        w.serialize(LabelRow {
            id: id.clone(),
            hb_raw: g.raw as i64,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `id,hb_raw` rows and aligns them with `ids`. Extra rows are ignored.
pub fn read_labels_csv<R: Read>(reader: R, ids: &[String]) -> Result<Vec<HbGrade>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut by_id = HashMap::new();
    for record in r.deserialize::<LabelRow>() {
        let row = record?;
        by_id.insert(row.id, HbGrade::from_raw(row.hb_raw)?);
    }
    ids.iter()
        .map(|id| {
            by_id
                .get(id)
                .copied()
                .ok_or_else(|| Error::MissingLabels(format!("no label for `{id}`")))
        })
        .collect()
}
