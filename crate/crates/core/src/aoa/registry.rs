use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::{aic_model_order, esprit, esprit_2d, lcmv_select, music, mvdr, root_music};
use super::{PilotObservations, SpatialCovariance};
use crate::simchannel::UlaGeometry;
use crate::{Error, Result};

pub const DEFAULT_GRID_STEP_DEG: f64 = 0.5;

/// Everything an estimator may draw on for one snapshot.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorInput<'a> {
    pub covariance: &'a SpatialCovariance,
    /// Required by estimators that work on the element × subcarrier data.
    pub pilots: Option<&'a PilotObservations>,
    pub geometry: &'a UlaGeometry,
    pub grid_step_deg: f64,
}

/// Angle candidates, strongest or most reliable first.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    pub angles_deg: Vec<f64>,
    /// Paired path delays in samples, when the estimator resolves them.
    pub delays_samples: Option<Vec<f64>>,
    /// Set when the data gave no directional information.
    pub low_confidence: bool,
}

pub trait AoaEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, input: &EstimatorInput<'_>, order: usize) -> Result<Candidates>;
}

struct Music;
struct RootMusic;
struct Esprit;
struct Esprit2d;
struct Mvdr;

impl AoaEstimator for Music {
    fn name(&self) -> &'static str {
        "music"
    }
    fn estimate(&self, input: &EstimatorInput<'_>, order: usize) -> Result<Candidates> {
        music(input.covariance, order, input.geometry, input.grid_step_deg)
    }
}

impl AoaEstimator for RootMusic {
    fn name(&self) -> &'static str {
        "root-music"
    }
    fn estimate(&self, input: &EstimatorInput<'_>, order: usize) -> Result<Candidates> {
        root_music(input.covariance, order, input.geometry)
    }
}

impl AoaEstimator for Esprit {
    fn name(&self) -> &'static str {
        "esprit"
    }
    fn estimate(&self, input: &EstimatorInput<'_>, order: usize) -> Result<Candidates> {
        esprit(input.covariance, order, input.geometry)
    }
}

impl AoaEstimator for Esprit2d {
    fn name(&self) -> &'static str {
        "esprit-2d"
    }
    fn estimate(&self, input: &EstimatorInput<'_>, order: usize) -> Result<Candidates> {
        let pilots = input
            .pilots
            .ok_or_else(|| Error::Usage("esprit-2d needs per-subcarrier pilot observations".into()))?;
        esprit_2d(pilots, order, input.geometry)
    }
}

impl AoaEstimator for Mvdr {
    fn name(&self) -> &'static str {
        "mvdr"
    }
    fn estimate(&self, input: &EstimatorInput<'_>, order: usize) -> Result<Candidates> {
        mvdr(input.covariance, order, input.geometry, input.grid_step_deg)
    }
}

pub type EstimatorFactory = fn() -> Box<dyn AoaEstimator>;

/// Estimators by name.
pub struct EstimatorRegistry {
    factories: BTreeMap<&'static str, EstimatorFactory>,
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register("music", || Box::new(Music));
        r.register("root-music", || Box::new(RootMusic));
        r.register("esprit", || Box::new(Esprit));
        r.register("esprit-2d", || Box::new(Esprit2d));
        r.register("mvdr", || Box::new(Mvdr));
        r
    }
}

impl EstimatorRegistry {
    pub fn register(&mut self, name: &'static str, factory: EstimatorFactory) {
        self.factories.insert(name, factory);
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn AoaEstimator>> {
        let key = name.to_ascii_lowercase().replace('_', "-");
        self.factories.get(key.as_str()).map(|f| f()).ok_or_else(|| {
            Error::Config(format!(
                "unknown estimator `{name}`; available: {}",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }
}

/// The built-in estimators.
pub fn registry() -> &'static EstimatorRegistry {
    static REGISTRY: OnceLock<EstimatorRegistry> = OnceLock::new();
    REGISTRY.get_or_init(EstimatorRegistry::default)
}

/// Outcome of order selection, estimation and LCMV selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedAngle {
    pub angle_deg: f64,
    /// AIC minimiser before clamping.
    pub raw_order: usize,
    /// Order used for estimation, in [1, M−1].
    pub channel_order: usize,
    pub candidates: Candidates,
}

/// AIC order (clamped to [1, M−1]) → estimator → LCMV selection.
pub fn estimate_angle(estimator: &dyn AoaEstimator, input: &EstimatorInput<'_>) -> Result<SelectedAngle> {
    let raw_order = aic_model_order(input.covariance)?;
    let channel_order = raw_order.clamp(1, input.covariance.dim() - 1);
    let candidates = estimator.estimate(input, channel_order)?;
    let angle_deg = lcmv_select(&candidates.angles_deg, input.covariance, input.geometry)?;
    Ok(SelectedAngle {
        angle_deg,
        raw_order,
        channel_order,
        candidates,
    })
}

/// Per-snapshot angle record.
#[derive(Debug, Clone, PartialEq)]
pub struct AoAEstimate {
    pub timestamp_s: f64,
    pub estimator: String,
    pub angle_deg: f64,
    pub channel_order: usize,
    pub raw_order: usize,
    pub candidates_deg: Vec<f64>,
    pub delays_samples: Option<Vec<f64>>,
    pub sinr_db: f64,
    pub low_confidence: bool,
}
