//! Raw facial-landmark measurements, indicator curves and landmark registration.
//!
//! A raw measurement file is CSV with header `exercise,frame_time,poi,x,y,z`
//! and one row per POI per frame. Coordinates are millimetres, times seconds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curve::SampledCurve;
use crate::error::{Error, Result};

pub const POI_COUNT: usize = 21;
/// Midline reference used by the mouth and eyebrow symmetry pairs.
pub const NOSE_TIP: usize = 12;

/// Tolerance by which a warped time may leave the curve domain.
const WARP_DOMAIN_TOLERANCE: f64 = 1e-9;

const RAW_HEADER: [&str; 6] = ["exercise", "frame_time", "poi", "x", "y", "z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exercise {
    Raising,
    Frowning,
    Closing,
    Smiling,
    Baring,
    Pursing,
    Blowing,
    ClosingBaring,
    RaisingPursing,
}

impl Exercise {
    pub const ALL: [Exercise; 9] = [
        Exercise::Raising,
        Exercise::Frowning,
        Exercise::Closing,
        Exercise::Smiling,
        Exercise::Baring,
        Exercise::Pursing,
        Exercise::Blowing,
        Exercise::ClosingBaring,
        Exercise::RaisingPursing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Exercise::Raising => "raising",
            Exercise::Frowning => "frowning",
            Exercise::Closing => "closing",
            Exercise::Smiling => "smiling",
            Exercise::Baring => "baring",
            Exercise::Pursing => "pursing",
            Exercise::Blowing => "blowing",
            Exercise::ClosingBaring => "closing_baring",
            Exercise::RaisingPursing => "raising_pursing",
        }
    }
}

impl fmt::Display for Exercise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Exercise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Exercise::ALL
            .into_iter()
            .find(|e| e.name() == lower)
            .ok_or_else(|| Error::UnknownExercise(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    Symmetry,
    Intensity,
    Speed,
}

impl Indicator {
    pub const ALL: [Indicator; 3] = [Indicator::Symmetry, Indicator::Intensity, Indicator::Speed];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Symmetry => "symmetry",
            Indicator::Intensity => "intensity",
            Indicator::Speed => "speed",
        }
    }
}

/// An `exercise.indicator` pair such as `smiling.symmetry`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndicatorName {
    pub exercise: Exercise,
    pub indicator: Indicator,
}

impl fmt::Display for IndicatorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.exercise, self.indicator.name())
    }
}

impl FromStr for IndicatorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (ex, ind) = s
            .split_once('.')
            .ok_or_else(|| Error::InvalidParameter(format!("indicator `{s}` is not exercise.kind")))?;
        let indicator = match ind {
            "symmetry" => Indicator::Symmetry,
            "intensity" => Indicator::Intensity,
            "speed" => Indicator::Speed,
            other => return Err(Error::InvalidParameter(format!("unknown indicator `{other}`"))),
        };
        Ok(Self {
            exercise: ex.parse()?,
            indicator,
        })
    }
}

/// One captured frame: 21 POIs as `(x, y, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub points: [[f64; 3]; POI_COUNT],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawMeasurement {
    pub id: String,
    pub exercises: BTreeMap<Exercise, Vec<Frame>>,
}

impl RawMeasurement {
    pub fn frames(&self, exercise: Exercise) -> Result<&[Frame]> {
        self.exercises
            .get(&exercise)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownExercise(format!("{exercise} (not recorded in `{}`)", self.id)))
    }
}

fn parse_field<T: FromStr>(field: &str, name: &str, line: u64) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {name} from `{field}`"),
    })
}

struct PartialFrame {
    time: f64,
    points: [Option<[f64; 3]>; POI_COUNT],
    line: u64,
}

/// Parses one raw measurement file.
pub fn parse_measurement(id: &str, text: &str) -> Result<RawMeasurement> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = records
        .next()
        .ok_or_else(|| Error::Structure("empty measurement file".into()))??;
    if header.iter().map(str::trim).collect::<Vec<_>>() != RAW_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", RAW_HEADER.join(",")),
        });
    }

    let mut partial: BTreeMap<Exercise, Vec<PartialFrame>> = BTreeMap::new();
    for record in records {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 6 {
            return Err(Error::Parse {
                line,
                message: format!("expected 6 fields, found {}", record.len()),
            });
        }
        let exercise: Exercise = record[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("unknown exercise `{}`", &record[0]),
        })?;
        let time: f64 = parse_field(&record[1], "frame_time", line)?;
        let poi: usize = parse_field(&record[2], "poi", line)?;
        let mut xyz = [0.0f64; 3];
        for (k, name) in ["x", "y", "z"].iter().enumerate() {
            xyz[k] = parse_field(&record[3 + k], name, line)?;
        }
        if !time.is_finite() || xyz.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                message: "non-finite number".into(),
            });
        }
        if poi >= POI_COUNT {
            return Err(Error::Structure(format!(
                "line {line}: POI index {poi} outside 0..={}",
                POI_COUNT - 1
            )));
        }

        let frames = partial.entry(exercise).or_default();
        let open_new = match frames.last() {
            None => true,
            Some(last) if time == last.time => false,
            Some(last) if time > last.time => true,
            Some(last) => {
                return Err(Error::Ordering {
                    line,
                    message: format!(
                        "{exercise}: frame time {time} follows {} (times must increase)",
                        last.time
                    ),
                })
            }
        };
        if open_new {
            frames.push(PartialFrame {
                time,
                points: [None; POI_COUNT],
                line,
            });
        }
        let frame = frames.last_mut().expect("frame just ensured");
        if frame.points[poi].is_some() {
            return Err(Error::Structure(format!(
                "line {line}: duplicate POI {poi} in {exercise} frame at t = {time}"
            )));
        }
        frame.points[poi] = Some(xyz);
    }

    let mut exercises = BTreeMap::new();
    for (exercise, frames) in partial {
        if frames.len() < 2 {
            return Err(Error::Structure(format!(
                "{exercise}: need at least 2 frames, found {}",
                frames.len()
            )));
        }
        let mut complete = Vec::with_capacity(frames.len());
        for f in frames {
            let mut points = [[0.0; 3]; POI_COUNT];
            for (poi, p) in f.points.iter().enumerate() {
                points[poi] = p.ok_or_else(|| {
                    Error::Structure(format!(
                        "{exercise} frame at t = {} (starting line {}) is missing POI {poi}",
                        f.time, f.line
                    ))
                })?;
            }
            complete.push(Frame {
                time: f.time,
                points,
            });
        }
        exercises.insert(exercise, complete);
    }
    if exercises.is_empty() {
        return Err(Error::Structure("measurement contains no frames".into()));
    }
    Ok(RawMeasurement {
        id: id.to_string(),
        exercises,
    })
}

/// Writes a measurement in the raw CSV format; `parse_measurement` inverts it exactly.
pub fn serialize_measurement(m: &RawMeasurement) -> String {
    let mut out = String::new();
    out.push_str(&RAW_HEADER.join(","));
    out.push('\n');
    for (exercise, frames) in &m.exercises {
        for f in frames {
            for (poi, [x, y, z]) in f.points.iter().enumerate() {
                out.push_str(&format!("{exercise},{},{poi},{x},{y},{z}\n", f.time));
            }
        }
    }
    out
}

/// POIs used to build the indicators of one exercise.
///
/// Symmetry compares `|left.0 - left.1|` with `|right.0 - right.1|`; intensity
/// and speed are taken from the `primary` distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExerciseGeometry {
    pub left: (usize, usize),
    pub right: (usize, usize),
    pub primary: (usize, usize),
}

/// Exercise to POI table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiMap(pub BTreeMap<Exercise, ExerciseGeometry>);

impl Default for PoiMap {
    fn default() -> Self {
        let mouth = ExerciseGeometry {
            left: (14, NOSE_TIP),
            right: (15, NOSE_TIP),
            primary: (14, 15),
        };
        let brows = ExerciseGeometry {
            left: (4, NOSE_TIP),
            right: (10, NOSE_TIP),
            primary: (4, 2),
        };
        let table = [
            (Exercise::Raising, brows),
            (
                Exercise::Frowning,
                ExerciseGeometry {
                    primary: (4, 10),
                    ..brows
                },
            ),
            (
                Exercise::Closing,
                ExerciseGeometry {
                    left: (1, 0),
                    right: (7, 6),
                    primary: (1, 0),
                },
            ),
            (Exercise::Smiling, mouth),
            (Exercise::Baring, mouth),
            (Exercise::Pursing, mouth),
            (
                Exercise::Blowing,
                ExerciseGeometry {
                    left: (19, NOSE_TIP),
                    right: (20, NOSE_TIP),
                    primary: (19, 20),
                },
            ),
            (Exercise::ClosingBaring, mouth),
            (Exercise::RaisingPursing, brows),
        ];
        PoiMap(table.into_iter().collect())
    }
}

impl PoiMap {
    pub fn get(&self, exercise: Exercise) -> Result<ExerciseGeometry> {
        self.0
            .get(&exercise)
            .copied()
            .ok_or_else(|| Error::UnknownExercise(format!("{exercise} (no POI mapping)")))
    }
}

fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn check_poi(p: usize) -> Result<()> {
    if p >= POI_COUNT {
        Err(Error::PoiOutOfRange(p))
    } else {
        Ok(())
    }
}

fn curve_id(m: &RawMeasurement) -> String {
    m.id.clone()
}

/// Per-frame Euclidean distance between POIs `a` and `b`.
pub fn distance_curve(
    m: &RawMeasurement,
    exercise: Exercise,
    a: usize,
    b: usize,
) -> Result<SampledCurve> {
    check_poi(a)?;
    check_poi(b)?;
    let frames = m.frames(exercise)?;
    let times = frames.iter().map(|f| f.time).collect();
    let values = frames
        .iter()
        .map(|f| euclid(&f.points[a], &f.points[b]))
        .collect();
    SampledCurve::new(curve_id(m), times, values)
}

/// `min(dL, dR) / max(dL, dR)` per frame, in `(0, 1]`.
pub fn symmetry_indicator(
    m: &RawMeasurement,
    exercise: Exercise,
    map: &PoiMap,
) -> Result<SampledCurve> {
    let g = map.get(exercise)?;
    let left = distance_curve(m, exercise, g.left.0, g.left.1)?;
    let right = distance_curve(m, exercise, g.right.0, g.right.1)?;
    let values = left
        .values()
        .iter()
        .zip(right.values())
        .zip(left.times())
        .map(|((&dl, &dr), &time)| {
            let hi = dl.max(dr);
            if hi == 0.0 {
                return Err(Error::DegenerateGeometry { time });
            }
            let s = dl.min(dr) / hi;
            if s == 0.0 {
                // one side collapsed onto its reference point
                return Err(Error::DegenerateGeometry { time });
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    SampledCurve::new(curve_id(m), left.times().to_vec(), values)
}

/// Range of motion `d(t) - d(t0)` of the primary distance.
pub fn intensity_indicator(
    m: &RawMeasurement,
    exercise: Exercise,
    map: &PoiMap,
) -> Result<SampledCurve> {
    let g = map.get(exercise)?;
    let d = distance_curve(m, exercise, g.primary.0, g.primary.1)?;
    let d0 = d.values()[0];
    let values = d.values().iter().map(|v| v - d0).collect();
    SampledCurve::new(curve_id(m), d.times().to_vec(), values)
}

/// Time derivative of the primary distance by finite differences.
pub fn speed_indicator(
    m: &RawMeasurement,
    exercise: Exercise,
    map: &PoiMap,
) -> Result<SampledCurve> {
    let g = map.get(exercise)?;
    let d = distance_curve(m, exercise, g.primary.0, g.primary.1)?;
    let values = finite_difference(d.times(), d.values())?;
    SampledCurve::new(curve_id(m), d.times().to_vec(), values)
}

/// Central differences inside, one-sided at both ends.
pub fn finite_difference(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "speed needs at least 3 frames, found {n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    out.push((values[1] - values[0]) / (times[1] - times[0]));
    for i in 1..n - 1 {
        out.push((values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]));
    }
    out.push((values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]));
    Ok(out)
}

pub fn indicator_curve(
    m: &RawMeasurement,
    name: IndicatorName,
    map: &PoiMap,
) -> Result<SampledCurve> {
    match name.indicator {
        Indicator::Symmetry => symmetry_indicator(m, name.exercise, map),
        Indicator::Intensity => intensity_indicator(m, name.exercise, map),
        Indicator::Speed => speed_indicator(m, name.exercise, map),
    }
}

/// Ordered interior landmark times of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmarks(Vec<f64>);

impl Landmarks {
    pub fn new(times: Vec<f64>, domain: (f64, f64)) -> Result<Self> {
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLandmarks("landmarks must be strictly increasing".into()));
        }
        if let Some(t) = times.iter().find(|&&t| !(t > domain.0 && t < domain.1)) {
            return Err(Error::InvalidLandmarks(format!(
                "landmark {t} not strictly inside ({}, {})",
                domain.0, domain.1
            )));
        }
        Ok(Self(times))
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Picks `count` interior points of largest deviation from the initial value.
///
/// With `count == 1` this is the global extremal deviation; larger counts take
/// the strongest local extrema of the deviation.
pub fn detect_landmarks(curve: &SampledCurve, count: usize) -> Result<Landmarks> {
    if count == 0 {
        return Err(Error::InvalidParameter("landmark count must be positive".into()));
    }
    let v = curve.values();
    let n = v.len();
    let dev: Vec<f64> = v.iter().map(|x| (x - v[0]).abs()).collect();
    let mut picks: Vec<usize> = if count == 1 {
        let mut best: Option<usize> = None;
        for i in 1..n.saturating_sub(1) {
            if dev[i] > 0.0 && best.is_none_or(|b| dev[i] > dev[b]) {
                best = Some(i);
            }
        }
        best.into_iter().collect()
    } else {
        let mut peaks: Vec<usize> = (1..n.saturating_sub(1))
            .filter(|&i| dev[i] > 0.0 && dev[i] > dev[i - 1] && dev[i] >= dev[i + 1])
            .collect();
        peaks.sort_by(|&a, &b| dev[b].total_cmp(&dev[a]).then(a.cmp(&b)));
        peaks.truncate(count);
        peaks
    };
    if picks.len() < count {
        return Err(Error::NoLandmark(format!(
            "`{}`: found {} of {count} landmarks",
            curve.id(),
            picks.len()
        )));
    }
    picks.sort_unstable();
    Landmarks::new(picks.iter().map(|&i| curve.times()[i]).collect(), curve.domain())
}

/// Monotone piecewise-cubic time warp through `(registered time, source time)` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl WarpFunction {
    pub fn identity(domain: (f64, f64)) -> Self {
        Self {
            xs: vec![domain.0, domain.1],
            ys: vec![domain.0, domain.1],
            slopes: vec![1.0, 1.0],
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Knot pairs `(registered time, source time)`, endpoints included.
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { point: t, lo, hi });
        }
        let k = self.xs.partition_point(|&x| x <= t).clamp(1, self.xs.len() - 1) - 1;
        if t == self.xs[k] {
            return Ok(self.ys[k]);
        }
        if t == self.xs[k + 1] {
            return Ok(self.ys[k + 1]);
        }
        let h = self.xs[k + 1] - self.xs[k];
        let s = (t - self.xs[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let y = h00 * self.ys[k]
            + h10 * h * self.slopes[k]
            + h01 * self.ys[k + 1]
            + h11 * h * self.slopes[k + 1];
        Ok(y.clamp(self.ys[k], self.ys[k + 1]))
    }
}

/// Fritsch-Carlson style slopes: weighted harmonic means inside, limited
/// three-point estimates at the ends.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            s = 0.0;
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Warp `w` with `w(target_k) = source_k` and fixed domain endpoints.
///
/// A curve registered with `w` has its landmarks moved from the source times
/// to the target times.
pub fn build_warp(source: &Landmarks, target: &Landmarks, domain: (f64, f64)) -> Result<WarpFunction> {
    if source.len() != target.len() {
        return Err(Error::InvalidLandmarks(format!(
            "{} source landmarks vs {} target landmarks",
            source.len(),
            target.len()
        )));
    }
    if !(domain.0 < domain.1) {
        return Err(Error::InvalidParameter(format!("empty domain {domain:?}")));
    }
    // Re-validate against this domain; landmarks may have been built for another.
    Landmarks::new(source.0.clone(), domain)?;
    Landmarks::new(target.0.clone(), domain)?;

    let mut xs = vec![domain.0];
    xs.extend_from_slice(target.times());
    xs.push(domain.1);
    let mut ys = vec![domain.0];
    ys.extend_from_slice(source.times());
    ys.push(domain.1);
    let slopes = pchip_slopes(&xs, &ys);
    Ok(WarpFunction { xs, ys, slopes })
}

/// Registered curve on `grid`: value at `t` is the input curve at `w(t)`.
pub fn register(curve: &SampledCurve, warp: &WarpFunction, grid: &[f64]) -> Result<SampledCurve> {
    let (lo, hi) = curve.domain();
    let values = grid
        .iter()
        .map(|&t| {
            let s = warp.eval(t)?;
            if s < lo - WARP_DOMAIN_TOLERANCE || s > hi + WARP_DOMAIN_TOLERANCE {
                return Err(Error::Domain { point: s, lo, hi });
            }
            Ok(curve.interpolate_clamped(s))
        })
        .collect::<Result<Vec<_>>>()?;
    SampledCurve::new(curve.id(), grid.to_vec(), values)
}

/// Warps aligning every reference curve's landmarks to the cohort mean landmarks.
///
/// Curves on which no landmark can be detected keep the identity warp. All
/// reference curves must live on the unit domain.
pub fn landmark_warps(reference: &[SampledCurve], count: usize) -> Result<Vec<WarpFunction>> {
    let detected: Vec<Option<Landmarks>> = reference
        .iter()
        .map(|c| match detect_landmarks(c, count) {
            Ok(l) => Ok(Some(l)),
            Err(Error::NoLandmark(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let found: Vec<&Landmarks> = detected.iter().flatten().collect();
    let unit = (0.0, 1.0);
    if found.is_empty() {
        return Ok(vec![WarpFunction::identity(unit); reference.len()]);
    }
    let mut mean = vec![0.0; count];
    for l in &found {
        for (m, t) in mean.iter_mut().zip(l.times()) {
            *m += t / found.len() as f64;
        }
    }
    let target = Landmarks::new(mean, unit)?;
    detected
        .iter()
        .map(|d| match d {
            Some(src) => build_warp(src, &target, unit),
            None => Ok(WarpFunction::identity(unit)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::resample;
    use proptest::prelude::*;

    fn face(offset: f64) -> [[f64; 3]; POI_COUNT] {
        let mut p = [[0.0; 3]; POI_COUNT];
        for (i, pt) in p.iter_mut().enumerate() {
            *pt = [i as f64 + offset, 2.0 * i as f64, 0.5];
        }
        p
    }

    fn minimal() -> RawMeasurement {
        let mut exercises = BTreeMap::new();
        exercises.insert(
            Exercise::Smiling,
            vec![
                Frame {
                    time: 0.0,
                    points: face(0.0),
                },
                Frame {
                    time: 0.04,
                    points: face(0.25),
                },
            ],
        );
        RawMeasurement {
            id: "m1".into(),
            exercises,
        }
    }

    #[test]
    fn minimal_file_parses() {
        let m = minimal();
        let text = serialize_measurement(&m);
        let parsed = parse_measurement("m1", &text).unwrap();
        assert_eq!(parsed.frames(Exercise::Smiling).unwrap().len(), 2);
        assert_eq!(parsed, m);
    }

    #[test]
    fn missing_poi_is_structural() {
        let text = serialize_measurement(&minimal());
        let kept: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with("smiling,0,20,"))
            .collect();
        let err = parse_measurement("m1", &kept.join("\n")).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err:?}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut text = serialize_measurement(&minimal());
        text = text.replacen("smiling,0,3,", "smiling,0,3,abc", 1);
        match parse_measurement("m1", &text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decreasing_time_is_ordering_error() {
        let text = serialize_measurement(&minimal());
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines.push("smiling,0.01,0,1,1,1".into());
        let err = parse_measurement("m1", &lines.join("\n")).unwrap_err();
        assert!(matches!(err, Error::Ordering { .. }), "{err:?}");
    }

    #[test]
    fn single_frame_exercise_rejected() {
        let text = "exercise,frame_time,poi,x,y,z\n".to_string()
            + &(0..21).map(|p| format!("smiling,0,{p},1,2,3\n")).collect::<String>();
        assert!(matches!(
            parse_measurement("x", &text),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn distance_three_four_five() {
        let mut m = minimal();
        for f in m.exercises.get_mut(&Exercise::Smiling).unwrap() {
            f.points[14] = [0.0, 0.0, 0.0];
            f.points[15] = [3.0, 4.0, 0.0];
        }
        let d = distance_curve(&m, Exercise::Smiling, 14, 15).unwrap();
        assert_eq!(d.values(), &[5.0, 5.0]);
        let z = distance_curve(&m, Exercise::Smiling, 3, 3).unwrap();
        assert_eq!(z.values(), &[0.0, 0.0]);
        assert!(matches!(
            distance_curve(&m, Exercise::Smiling, 3, 21),
            Err(Error::PoiOutOfRange(21))
        ));
        assert!(matches!(
            distance_curve(&m, Exercise::Blowing, 3, 4),
            Err(Error::UnknownExercise(_))
        ));
    }

    #[test]
    fn symmetry_direct_ratio() {
        let mut m = minimal();
        for f in m.exercises.get_mut(&Exercise::Smiling).unwrap() {
            f.points[NOSE_TIP] = [0.0, 0.0, 0.0];
            f.points[14] = [40.0, 0.0, 0.0];
            f.points[15] = [0.0, -50.0, 0.0];
        }
        let s = symmetry_indicator(&m, Exercise::Smiling, &PoiMap::default()).unwrap();
        assert!(s.values().iter().all(|&v| (v - 0.8).abs() < 1e-15));
    }

    #[test]
    fn symmetry_degenerate_frame() {
        let mut m = minimal();
        for f in m.exercises.get_mut(&Exercise::Smiling).unwrap() {
            f.points[14] = f.points[NOSE_TIP];
            f.points[15] = f.points[NOSE_TIP];
        }
        assert!(matches!(
            symmetry_indicator(&m, Exercise::Smiling, &PoiMap::default()),
            Err(Error::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn speed_of_linear_ramp_and_constant() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let s = finite_difference(&t, &t).unwrap();
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let c = finite_difference(&t, &[2.0; 11]).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
        assert!(matches!(
            finite_difference(&t[..2], &t[..2]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn constant_motion_has_zero_intensity_and_speed() {
        let mut m = minimal();
        m.exercises.get_mut(&Exercise::Smiling).unwrap().push(Frame {
            time: 0.08,
            points: face(0.5),
        });
        let map = PoiMap::default();
        let i = intensity_indicator(&m, Exercise::Smiling, &map).unwrap();
        let s = speed_indicator(&m, Exercise::Smiling, &map).unwrap();
        assert!(i.values().iter().all(|&v| v.abs() < 1e-12));
        assert!(s.values().iter().all(|&v| v.abs() < 1e-9));
    }

    fn triangle(peak: f64, n: usize) -> SampledCurve {
        let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let v = t
            .iter()
            .map(|&x| if x <= peak { x / peak } else { (1.0 - x) / (1.0 - peak) })
            .collect();
        SampledCurve::new("tri", t, v).unwrap()
    }

    #[test]
    fn landmark_at_triangle_peak() {
        let l = detect_landmarks(&triangle(0.3, 11), 1).unwrap();
        assert_eq!(l.times(), &[0.3]);
        let flat = SampledCurve::new("f", vec![0.0, 0.5, 1.0], vec![2.0; 3]).unwrap();
        assert!(matches!(detect_landmarks(&flat, 1), Err(Error::NoLandmark(_))));
    }

    #[test]
    fn two_landmarks_sorted_by_time() {
        let t: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let v: Vec<f64> = t
            .iter()
            .map(|&x| (-(x - 0.3f64).powi(2) / 0.002).exp() + 0.5 * (-(x - 0.7f64).powi(2) / 0.002).exp())
            .collect();
        let c = SampledCurve::new("two", t, v).unwrap();
        let l = detect_landmarks(&c, 2).unwrap();
        assert_eq!(l.times(), &[0.3, 0.7]);
    }

    #[test]
    fn identity_warp_from_equal_landmarks() {
        let l = Landmarks::new(vec![0.2, 0.6], (0.0, 1.0)).unwrap();
        let w = build_warp(&l, &l, (0.0, 1.0)).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!((w.eval(t).unwrap() - t).abs() < 1e-15);
        }
    }

    #[test]
    fn single_landmark_warp_constraint() {
        let src = Landmarks::new(vec![0.25], (0.0, 1.0)).unwrap();
        let tgt = Landmarks::new(vec![0.5], (0.0, 1.0)).unwrap();
        let w = build_warp(&src, &tgt, (0.0, 1.0)).unwrap();
        assert_eq!(w.eval(0.5).unwrap(), 0.25);
        assert_eq!(w.eval(0.0).unwrap(), 0.0);
        assert_eq!(w.eval(1.0).unwrap(), 1.0);
        let scan: Vec<f64> = (0..1000).map(|i| w.eval(i as f64 / 999.0).unwrap()).collect();
        assert!(scan.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn warp_errors() {
        let a = Landmarks::new(vec![0.25], (0.0, 1.0)).unwrap();
        let b = Landmarks::new(vec![0.25, 0.5], (0.0, 1.0)).unwrap();
        assert!(build_warp(&a, &b, (0.0, 1.0)).is_err());
        assert!(Landmarks::new(vec![1.0], (0.0, 1.0)).is_err());
        assert!(Landmarks::new(vec![0.5, 0.4], (0.0, 1.0)).is_err());
        assert!(build_warp(&a, &a, (0.3, 1.0)).is_err());
    }

    #[test]
    fn identity_registration_is_resampling() {
        let c = triangle(0.3, 37);
        let grid: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let r = register(&c, &WarpFunction::identity((0.0, 1.0)), &grid).unwrap();
        let plain = resample(&c, &grid).unwrap();
        for (a, b) in r.values().iter().zip(plain.values()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    fn argmax(v: &[f64]) -> usize {
        (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
    }

    #[test]
    fn bump_registered_to_target_peak() {
        let grid: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let bump = |c: f64| {
            let v = grid.iter().map(|&t| (-(t - c).powi(2) / 0.005).exp()).collect();
            SampledCurve::new("b", grid.clone(), v).unwrap()
        };
        let target = Landmarks::new(vec![0.5], (0.0, 1.0)).unwrap();
        let mut peaks = Vec::new();
        for c in [0.3, 0.62] {
            let curve = bump(c);
            let src = detect_landmarks(&curve, 1).unwrap();
            let w = build_warp(&src, &target, (0.0, 1.0)).unwrap();
            let r = register(&curve, &w, &grid).unwrap();
            let p = grid[argmax(r.values())];
            assert!((p - 0.5).abs() <= 0.01 + 1e-12, "peak at {p}");
            peaks.push(p);
        }
        assert_eq!(peaks[0], peaks[1]);
    }

    #[test]
    fn distance_symmetric_in_arguments() {
        let m = minimal();
        for (a, b) in [(0, 5), (14, 15), (20, 1)] {
            assert_eq!(
                distance_curve(&m, Exercise::Smiling, a, b).unwrap(),
                distance_curve(&m, Exercise::Smiling, b, a).unwrap()
            );
        }
    }

    #[test]
    fn indicator_names_parse() {
        let n: IndicatorName = "smiling.symmetry".parse().unwrap();
        assert_eq!(n.exercise, Exercise::Smiling);
        assert_eq!(n.to_string(), "smiling.symmetry");
        assert!("smiling.sym".parse::<IndicatorName>().is_err());
        assert!("grinning.speed".parse::<IndicatorName>().is_err());
    }

    proptest! {
        #[test]
        fn random_warps_strictly_increasing(
            raw in prop::collection::vec((0.01f64..0.99, 0.01f64..0.99), 1..5)
        ) {
            let mut src: Vec<f64> = raw.iter().map(|p| p.0).collect();
            let mut tgt: Vec<f64> = raw.iter().map(|p| p.1).collect();
            src.sort_by(f64::total_cmp);
            tgt.sort_by(f64::total_cmp);
            src.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            tgt.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let n = src.len().min(tgt.len());
            src.truncate(n);
            tgt.truncate(n);
            let s = Landmarks::new(src, (0.0, 1.0)).unwrap();
            let t = Landmarks::new(tgt, (0.0, 1.0)).unwrap();
            let w = build_warp(&s, &t, (0.0, 1.0)).unwrap();
            let scan: Vec<f64> = (0..1000).map(|i| w.eval(i as f64 / 999.0).unwrap()).collect();
            for p in scan.windows(2) {
                prop_assert!(p[1] > p[0], "{} then {}", p[0], p[1]);
            }
            for (x, y) in t.times().iter().zip(s.times()) {
                prop_assert_eq!(w.eval(*x).unwrap(), *y);
            }
        }
    }
}
