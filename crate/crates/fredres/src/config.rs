//! Job configuration loaded from TOML.
//!
//! ```toml
//! [coefficients]
//! preset = "box"            # "zero", "box" or "smooth"; or give gamma and segments
//! gamma = 1.0
//! [[coefficients.segments]]
//! a = 0.0
//! b = 1.0
//! origin = 0.0              # polynomials are in powers of (x - origin)
//! p = []
//! q = [1.0]
//!
//! [grid]                    # det-grid and smatrix
//! kind = "rect"             # "rect", "polar" or "real"
//! re = [-4.0, 4.0]
//! im = [-4.0, 4.0]
//! points = [8, 8]           # rect: (re, im); polar: (r, theta); real: (k, -)
//!
//! [region]                  # resonances
//! r_min = 0.5
//! r_max = 12.0
//! radii = [4.0, 8.0, 12.0]
//!
//! truncations = [6.0, 9.0, 12.0]
//!
//! [tolerances]
//! zero = 1e-8
//! determinant = 1e-8
//! identity = 1e-5
//! ```

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{Coefficients, Segment};
use crate::error::{Error, Result};
use crate::fredholm::Method;
use crate::resolvent::K_MIN;
use crate::resonances::{Region, EXCLUSION_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Zero,
    /// p = 0, q = 1 on [0, 1]
    Box,
    /// p = x(1 - x), q = sin(πx) on [0, 1]
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub preset: Option<Preset>,
    pub gamma: Option<f64>,
    #[serde(default)]
    pub segments: Vec<Segment>,
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<Coefficients> {
        match (self.preset, self.gamma) {
            (Some(_), Some(_)) | (Some(_), None) if !self.segments.is_empty() => {
                Err(Error::Config("coefficients: give either preset or segments, not both".into()))
            }
            (Some(Preset::Zero), g) => Ok(Coefficients::zero(g.unwrap_or(1.0))),
            (Some(Preset::Box), g) => Ok(Coefficients::indicator(g.unwrap_or(1.0), 1.0)),
            (Some(Preset::Smooth), Some(g)) if g != 1.0 => {
                Err(Error::Config("coefficients.gamma: the smooth preset is defined on [0, 1]".into()))
            }
            (Some(Preset::Smooth), _) => Ok(Coefficients::bump_sine()),
            (None, Some(g)) => Coefficients::new(g, self.segments.clone()).map_err(|e| Error::Config(format!("coefficients.segments: {e}"))),
            (None, None) => Err(Error::Config("coefficients.gamma: missing (or set coefficients.preset)".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    #[default]
    Rect,
    Polar,
    /// Points on the positive real axis.
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub kind: GridKind,
    /// rect: Re k range; real: k range
    #[serde(default)]
    pub re: Option<[f64; 2]>,
    #[serde(default)]
    pub im: Option<[f64; 2]>,
    /// polar: |k| range
    #[serde(default)]
    pub r: Option<[f64; 2]>,
    /// polar: arg k range in radians
    #[serde(default)]
    pub theta: Option<[f64; 2]>,
    pub points: [usize; 2],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { kind: GridKind::Rect, re: Some([-4.0, 4.0]), im: Some([-4.0, 4.0]), r: None, theta: None, points: [8, 8] }
    }
}

fn linspace(r: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![r[0]];
    }
    (0..n).map(|j| r[0] + (r[1] - r[0]) * j as f64 / (n - 1) as f64).collect()
}

impl GridSpec {
    /// Points in row-major order (outer index: Im k, radius; inner: Re k, angle).
    pub fn points(&self) -> Result<Vec<Complex64>> {
        let need = |v: Option<[f64; 2]>, name: &str| v.ok_or_else(|| Error::Config(format!("grid.{name}: missing for grid kind {:?}", self.kind)));
        if self.points[0] == 0 {
            return Err(Error::Config("grid.points: counts must be positive".into()));
        }
        let pts: Vec<Complex64> = match self.kind {
            GridKind::Rect => {
                let (re, im) = (need(self.re, "re")?, need(self.im, "im")?);
                if self.points[1] == 0 {
                    return Err(Error::Config("grid.points: counts must be positive".into()));
                }
                let xs = linspace(re, self.points[0]);
                linspace(im, self.points[1]).into_iter().flat_map(|y| xs.iter().map(move |&x| Complex64::new(x, y))).collect()
            }
            GridKind::Polar => {
                let (r, t) = (need(self.r, "r")?, need(self.theta, "theta")?);
                if self.points[1] == 0 {
                    return Err(Error::Config("grid.points: counts must be positive".into()));
                }
                if r[0].min(r[1]) < K_MIN {
                    return Err(Error::Config(format!("grid.r: radii must be at least {K_MIN:e}")));
                }
                let ts = linspace(t, self.points[1]);
                linspace(r, self.points[0]).into_iter().flat_map(|rr| ts.iter().map(move |&a| Complex64::from_polar(rr, a))).collect()
            }
            GridKind::Real => {
                let re = need(self.re, "re")?;
                if re[0].min(re[1]) <= 0.0 {
                    return Err(Error::Config("grid.re: real grids must lie in k > 0".into()));
                }
                linspace(re, self.points[0]).into_iter().map(|x| Complex64::new(x, 0.0)).collect()
            }
        };
        if let Some(bad) = pts.iter().find(|k| k.norm() < K_MIN) {
            return Err(Error::Config(format!("grid: point {bad} is inside the excluded disc |k| < {K_MIN:e}")));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub r_min: f64,
    pub r_max: f64,
    #[serde(default = "default_theta_min")]
    pub theta_min: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    /// Radii at which the counting function is reported.
    #[serde(default)]
    pub radii: Vec<f64>,
    /// Truncation radii for the Hadamard product, ascending.
    #[serde(default = "default_truncations")]
    pub truncations: Vec<f64>,
}

fn default_truncations() -> Vec<f64> {
    vec![6.0, 9.0, 12.0]
}

fn default_theta_min() -> f64 {
    -PI
}
fn default_theta_max() -> f64 {
    PI
}

impl Default for RegionSpec {
    fn default() -> Self {
        Self { r_min: 0.5, r_max: 12.0, theta_min: -PI, theta_max: PI, radii: vec![4.0, 8.0, 12.0], truncations: default_truncations() }
    }
}

impl RegionSpec {
    pub fn region(&self) -> Result<Region> {
        if !(self.r_min >= EXCLUSION_RADIUS) {
            return Err(Error::Config(format!("region.r_min: must be at least {EXCLUSION_RADIUS}")));
        }
        if !(self.r_max > self.r_min) {
            return Err(Error::Config("region.r_max: must exceed region.r_min".into()));
        }
        if !(self.theta_max > self.theta_min && self.theta_max - self.theta_min <= 2.0 * PI + 1e-12) {
            return Err(Error::Config("region.theta_max: need theta_min < theta_max <= theta_min + 2 pi".into()));
        }
        if let Some(r) = self.radii.iter().find(|&&r| !(r > 0.0 && r <= self.r_max)) {
            return Err(Error::Config(format!("region.radii: {r} is outside (0, r_max]")));
        }
        if let Some(r) = self.truncations.iter().find(|&&r| !(r > 0.0 && r <= self.r_max)) {
            return Err(Error::Config(format!("region.truncations: {r} is outside (0, r_max]")));
        }
        if self.truncations.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("region.truncations: must be strictly ascending".into()));
        }
        Ok(Region { r_min: self.r_min, r_max: self.r_max, theta_min: self.theta_min, theta_max: self.theta_max })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Cell diameter below which a multi-zero cell is reported as a cluster.
    #[serde(default = "default_zero")]
    pub zero: f64,
    /// Relative n vs 2n agreement for the converged flag.
    #[serde(default = "default_det")]
    pub determinant: f64,
    /// Identity-residual alarm.
    #[serde(default = "default_identity")]
    pub identity: f64,
}

fn default_zero() -> f64 {
    1e-8
}
fn default_det() -> f64 {
    1e-8
}
fn default_identity() -> f64 {
    1e-5
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { zero: default_zero(), determinant: default_det(), identity: default_identity() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Evaluator {
    /// Corrected Nyström matrix.
    #[default]
    Nystrom,
    /// Semi-separable ODE integration.
    Ode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Evaluator for determinant grids and S-matrix ratios.
    #[serde(default)]
    pub evaluator: Evaluator,
    /// Evaluator for resonance searches and continuation (the ODE route is cheaper per point).
    #[serde(default = "default_search")]
    pub search_evaluator: Evaluator,
}

fn default_nodes() -> usize {
    256
}
fn default_search() -> Evaluator {
    Evaluator::Ode
}

impl Default for NumericsSpec {
    fn default() -> Self {
        Self { nodes: default_nodes(), evaluator: Evaluator::Nystrom, search_evaluator: Evaluator::Ode }
    }
}

impl NumericsSpec {
    fn method(&self, e: Evaluator) -> Method {
        match e {
            Evaluator::Nystrom => Method::Nystrom { n: self.nodes },
            Evaluator::Ode => Method::Ode { steps_per_unit: None },
        }
    }
    pub fn grid_method(&self) -> Method {
        self.method(self.evaluator)
    }
    pub fn search_method(&self) -> Method {
        self.method(self.search_evaluator)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BornSpec {
    /// Angles arg k (radians).
    pub angles: Vec<f64>,
    pub radii: Vec<f64>,
}

impl Default for BornSpec {
    fn default() -> Self {
        Self { angles: vec![PI / 12.0, PI / 4.0], radii: vec![10.0, 20.0, 40.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Seed of the sample generator.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random points per growth-bound check.
    #[serde(default = "default_bound_samples")]
    pub bound_samples: usize,
}

fn default_seed() -> u64 {
    7
}
fn default_bound_samples() -> usize {
    500
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { seed: default_seed(), bound_samples: default_bound_samples() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub region: RegionSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub numerics: NumericsSpec,
    #[serde(default)]
    pub born: BornSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: JobConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn preset(p: Preset) -> Self {
        Self { coefficients: CoefficientSpec { preset: Some(p), gamma: None, segments: vec![] }, ..Default::default() }
    }

    /// Checks every field against the module preconditions, naming the first offending one.
    pub fn validate(&self) -> Result<()> {
        self.coefficients.build()?;
        if self.numerics.nodes < 8 || self.numerics.nodes > 2048 {
            return Err(Error::Config(format!("numerics.nodes: {} is outside [8, 2048]", self.numerics.nodes)));
        }
        for (name, v) in [("tolerances.zero", self.tolerances.zero), ("tolerances.determinant", self.tolerances.determinant), ("tolerances.identity", self.tolerances.identity)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name}: must be positive, got {v}")));
            }
        }
        self.grid.points()?;
        self.region.region()?;
        if let Some(r) = self.born.radii.iter().find(|&&r| !(r >= K_MIN)) {
            return Err(Error::Config(format!("born.radii: {r} is inside the excluded disc")));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_round_trip() {
        let cfg = JobConfig::preset(Preset::Box);
        let back = JobConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn explicit_segments() {
        let cfg = JobConfig::from_toml(
            "[coefficients]\ngamma = 1.0\n[[coefficients.segments]]\na = 0.0\nb = 1.0\np = [0.0, 1.0, -1.0]\nq = [1.0]\n",
        )
        .unwrap();
        let c = cfg.coefficients.build().unwrap();
        assert!((c.p(0.25) - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn first_bad_field_is_named() {
        let e = JobConfig::from_toml("[coefficients]\npreset = \"box\"\n[numerics]\nnodes = 4\n").unwrap_err();
        assert!(e.to_string().contains("numerics.nodes"));
        let e = JobConfig::from_toml("[coefficients]\npreset = \"box\"\n[region]\nr_min = 0.001\nr_max = 3.0\n").unwrap_err();
        assert!(e.to_string().contains("region.r_min"));
    }
}
