//! TOML pipeline configuration and per-stage seed derivation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fdaclust_core::cluster::{ClusterParams, CovarianceChoice, Linkage, Route};
use fdaclust_core::curve::{AdjustedGrade, DEFAULT_GRID_SIZE};
use fdaclust_core::ingest::{Exercise, ExerciseGeometry, IndicatorName, PoiMap};
use fdaclust_core::synth::{CohortSpec, GradeArchetype};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{read_text, CliError, CliResult};

/// Seed of one pipeline stage: the first 8 bytes (little endian) of
/// `sha256(seed as 8 LE bytes || stage name)`.
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn cluster_stage(route: Route) -> String {
    format!("cluster/{route}")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub registration: RegistrationConfig,
    pub basis: BasisConfig,
    pub fpca: FpcaConfig,
    pub cluster: ClusterConfig,
    pub synth: SynthConfig,
    /// Overrides of the exercise to POI table, keyed by exercise name.
    pub poi_map: BTreeMap<Exercise, ExerciseGeometry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub raw_dir: Option<PathBuf>,
    pub cohort: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub indicator: String,
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegistrationConfig {
    pub enabled: bool,
    pub landmarks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisConfig {
    pub order: usize,
    pub interior_knots: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FpcaConfig {
    pub threshold: f64,
    pub q: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub routes: Vec<Route>,
    pub k: usize,
    pub fuzzifier: f64,
    pub window: Option<usize>,
    pub linkage: Linkage,
    pub covariance: CovarianceChoice,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub n_init: usize,
}

/// Synthetic cohort used when no data paths are configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub depths: Vec<f64>,
    pub center: f64,
    pub width: f64,
    pub per_grade: usize,
    pub sigma: f64,
    pub depth_jitter: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            raw_dir: None,
            cohort: None,
            labels: None,
            indicator: "smiling.symmetry".into(),
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            landmarks: 1,
        }
    }
}

impl Default for BasisConfig {
    fn default() -> Self {
        let p = ClusterParams::default();
        Self {
            order: p.basis_order,
            interior_knots: p.interior_knots,
            lambda: p.lambda,
        }
    }
}

impl Default for FpcaConfig {
    fn default() -> Self {
        Self {
            threshold: ClusterParams::default().q_threshold,
            q: None,
        }
    }
}

impl Default for ClusterConfig {
    fn default() -> Self {
        let p = ClusterParams::default();
        Self {
            routes: Route::ALL.to_vec(),
            k: p.k,
            fuzzifier: p.fuzzifier,
            window: p.window,
            linkage: p.linkage,
            covariance: p.covariance,
            restarts: p.restarts,
            max_iter: p.max_iter,
            tol: p.tol,
            n_init: p.n_init,
        }
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        let spec = CohortSpec::default();
        Self {
            depths: spec.grades.iter().map(|g| g.depth).collect(),
            center: spec.grades[0].center,
            width: spec.grades[0].width,
            per_grade: spec.grades[0].count,
            sigma: spec.sigma,
            depth_jitter: spec.depth_jitter,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_toml(&read_text(path)?).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }

    pub fn indicator(&self) -> CliResult<IndicatorName> {
        Ok(self.data.indicator.parse()?)
    }

    pub fn poi_map(&self) -> PoiMap {
        let mut map = PoiMap::default();
        map.0.extend(self.poi_map.iter().map(|(e, g)| (*e, *g)));
        map
    }

    /// Rejects contradictory or out-of-range settings before any stage runs.
    pub fn validate(&self) -> CliResult<()> {
        let conflict = |m: String| Err(CliError::Config(m));
        self.indicator()?;
        if self.data.raw_dir.is_some() && self.data.cohort.is_some() {
            return conflict("data.raw_dir and data.cohort are mutually exclusive".into());
        }
        if self.cluster.routes.is_empty() {
            return conflict("cluster.routes is empty".into());
        }
        if self.cluster.window.is_some() && self.cluster.routes.iter().any(|&r| r != Route::TsDtw) {
            return conflict("cluster.window only applies to route ts-dtw".into());
        }
        if self.registration.enabled && self.registration.landmarks == 0 {
            return conflict("registration.landmarks must be at least 1".into());
        }
        if self.synth.depths.len() != AdjustedGrade::LADDER.len() {
            return conflict(format!(
                "synth.depths needs {} values, one per grade",
                AdjustedGrade::LADDER.len()
            ));
        }
        for &route in &self.cluster.routes {
            self.params(route).check_for(route)?;
        }
        self.cohort_spec(0).validate()?;
        Ok(())
    }

    /// Algorithm parameters for one route; the seed is the route's stage seed.
    pub fn params(&self, route: Route) -> ClusterParams {
        let c = &self.cluster;
        ClusterParams {
            k: c.k,
            seed: stage_seed(self.seed, &cluster_stage(route)),
            fuzzifier: c.fuzzifier,
            window: c.window,
            linkage: c.linkage,
            covariance: c.covariance,
            restarts: c.restarts,
            max_iter: c.max_iter,
            tol: c.tol,
            n_init: c.n_init,
            q_threshold: self.fpca.threshold,
            q: self.fpca.q,
            basis_order: self.basis.order,
            interior_knots: self.basis.interior_knots,
            lambda: self.basis.lambda,
        }
    }

    pub fn cohort_spec(&self, seed: u64) -> CohortSpec {
        let s = &self.synth;
        CohortSpec {
            grades: AdjustedGrade::LADDER
                .into_iter()
                .zip(&s.depths)
                .map(|(grade, &depth)| GradeArchetype {
                    grade,
                    depth,
                    center: s.center,
                    width: s.width,
                    count: s.per_grade,
                })
                .collect(),
            sigma: s.sigma,
            grid_size: self.data.grid_size,
            seed,
            depth_jitter: s.depth_jitter,
        }
    }
}

/// Annotated default configuration written by `init`.
pub const DEFAULT_CONFIG_TOML: &str = r#"# fdaclust pipeline configuration.
# Every key is optional; the values below are the defaults.

# Master seed. Each stage derives its own seed from this one and its name.
seed = 0

[data]
# Directory of raw measurement files (exercise,frame_time,poi,x,y,z).
# raw_dir = "raw"
# Long-format cohort CSV (id,time,value); alternative to raw_dir.
# cohort = "cohort.csv"
# Clinician grades (id,hb_raw). Without data paths a synthetic cohort is used.
# labels = "labels.csv"
# Indicator curve extracted from raw files: <exercise>.<symmetry|intensity|speed>.
indicator = "smiling.symmetry"
# Points of the common time grid on [0, 1].
grid_size = 101

[registration]
# Landmark registration of raw-file curves before resampling.
enabled = true
landmarks = 1

[basis]
# Cubic B-splines with 9 equally spaced interior knots: 13 coefficients.
order = 4
interior_knots = 9
# Roughness penalty weight on the integrated squared second derivative.
lambda = 0.0

[fpca]
# Smallest number of components explaining this fraction of variance.
threshold = 0.95
# Fixed component count; overrides threshold.
# q = 6

[cluster]
routes = ["ts-dtw", "ts-fuzzy", "basis-coeff", "fpc-kmeans", "fpc-hier", "fpc-pam", "fpc-gmm"]
# One cluster per adjusted grade (1, 2, 3, 6).
k = 4
# Fuzzy c-means exponent.
fuzzifier = 2.0
# Sakoe-Chiba band for ts-dtw only.
# window = 10
# single, complete, average or ward.
linkage = "ward"
# Mixture covariance: auto (BIC), diagonal or full.
covariance = "auto"
restarts = 10
max_iter = 300
tol = 1e-9
n_init = 5

[synth]
# Dip depth per grade, mildest first.
depths = [0.05, 0.2, 0.4, 0.7]
center = 0.5
width = 0.1
per_grade = 30
sigma = 0.02
depth_jitter = 0.0

# Exercise to POI overrides, for example:
# [poi_map.smiling]
# left = [14, 12]
# right = [15, 12]
# primary = [14, 15]
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotated_default_parses_to_default() {
        assert_eq!(PipelineConfig::from_toml(DEFAULT_CONFIG_TOML).unwrap(), PipelineConfig::default());
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn defaults_are_the_reference_setting() {
        let c = PipelineConfig::default();
        assert_eq!((c.basis.order, c.basis.interior_knots), (4, 9));
        assert_eq!(c.cluster.k, 4);
        assert_eq!(c.fpca.threshold, 0.95);
        assert_eq!(c.data.indicator, "smiling.symmetry");
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = PipelineConfig::default();
        c.fpca.q = Some(6);
        c.cluster.routes = vec![Route::TsDtw];
        c.cluster.window = Some(5);
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys_and_conflicts() {
        assert!(matches!(PipelineConfig::from_toml("sede = 1"), Err(CliError::Config(_))));
        assert!(matches!(
            PipelineConfig::from_toml("[cluster]\nwindow = 3\nroutes = [\"fpc-pam\"]"),
            Err(CliError::Config(_))
        ));
        assert!(PipelineConfig::from_toml("[cluster]\nwindow = 3\nroutes = [\"ts-dtw\"]").is_ok());
        let e = PipelineConfig::from_toml("[data]\nindicator = \"smiling.width\"").unwrap_err();
        assert_eq!(e.category(), "invalid-input");
        let e = PipelineConfig::from_toml("[synth]\nsigma = -1.0").unwrap_err();
        assert_eq!(e.category(), "invalid-input");
    }

    #[test]
    fn poi_overrides_merge_into_defaults() {
        let c = PipelineConfig::from_toml("[poi_map.smiling]\nleft = [13, 12]\nright = [16, 12]\nprimary = [13, 16]").unwrap();
        let map = c.poi_map();
        assert_eq!(map.get(Exercise::Smiling).unwrap().left, (13, 12));
        assert_eq!(map.get(Exercise::Raising).unwrap(), PoiMap::default().get(Exercise::Raising).unwrap());
    }

    #[test]
    fn stage_seeds_depend_on_name_not_order() {
        assert_eq!(stage_seed(7, "synth"), stage_seed(7, "synth"));
        assert_ne!(stage_seed(7, "synth"), stage_seed(7, "cluster/ts-dtw"));
        assert_ne!(stage_seed(7, "synth"), stage_seed(8, "synth"));
        let c = PipelineConfig::default();
        assert_ne!(c.params(Route::FpcPam).seed, c.params(Route::FpcKmeans).seed);
    }
}
