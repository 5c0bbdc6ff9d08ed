//! JSON run configuration with scenario-dependent defaults and `key=value`
//! overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::basis::MAX_DEGREE;
use crate::equations::FluxKind;
use crate::mesh::{Boundary, Mesh};
use crate::scenario::{PresetVariant, Scenario};
use crate::sensor::{SensorConfig, SensorMode};
use crate::timeint::{Integrator, StepControl};
use crate::viscosity::{ViscosityDistribution, ViscosityKind, DEFAULT_MACHINE_EPS};
use crate::{DgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Periodic,
    /// Frozen initial states outside the domain ends.
    Outflow,
}

/// Viscosity selection; `none` disables the viscous term and the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscosityChoice {
    None,
    PiecewiseConstant,
    C0Linear,
    Legendre,
    Gegenbauer,
    SuperGaussian,
    Gevrey,
}

impl ViscosityChoice {
    pub fn kind(self) -> Option<ViscosityKind> {
        Some(match self {
            ViscosityChoice::None => return None,
            ViscosityChoice::PiecewiseConstant => ViscosityKind::PiecewiseConstant,
            ViscosityChoice::C0Linear => ViscosityKind::C0Linear,
            ViscosityChoice::Legendre => ViscosityKind::Legendre,
            ViscosityChoice::Gegenbauer => ViscosityKind::Gegenbauer,
            ViscosityChoice::SuperGaussian => ViscosityKind::SuperGaussian,
            ViscosityChoice::Gevrey => ViscosityKind::Gevrey,
        })
    }
}

impl From<ViscosityKind> for ViscosityChoice {
    fn from(kind: ViscosityKind) -> Self {
        match kind {
            ViscosityKind::PiecewiseConstant => ViscosityChoice::PiecewiseConstant,
            ViscosityKind::C0Linear => ViscosityChoice::C0Linear,
            ViscosityKind::Legendre => ViscosityChoice::Legendre,
            ViscosityKind::Gegenbauer => ViscosityChoice::Gegenbauer,
            ViscosityKind::SuperGaussian => ViscosityChoice::SuperGaussian,
            ViscosityKind::Gevrey => ViscosityChoice::Gevrey,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMode {
    /// Viscous term inside every Runge–Kutta stage.
    #[default]
    Unsplit,
    /// Hyperbolic step followed by the exact modal filter (Legendre only).
    SplitFilter,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub elements: Option<usize>,
    pub domain: Option<[f64; 2]>,
    pub boundary: Option<BoundaryKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub integrator: Integrator,
    pub cfl: f64,
    pub cfl_visc: f64,
    pub fixed_dt: Option<f64>,
    pub final_time: Option<f64>,
    pub mode: TimeMode,
}

impl Default for TimeConfig {
    fn default() -> Self {
        let control = StepControl::default();
        Self {
            integrator: Integrator::Ssprk33,
            cfl: control.cfl,
            cfl_visc: control.cfl_visc,
            fixed_dt: None,
            final_time: None,
            mode: TimeMode::Unsplit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorSection {
    pub mode: SensorMode,
    pub c: Option<f64>,
    pub kappa: f64,
    pub eps_max_scale: f64,
    pub per_stage: bool,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self {
            mode: SensorMode::Modified,
            c: None,
            kappa: 1.0,
            eps_max_scale: 1.0,
            per_stage: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ViscositySection {
    pub kind: Option<ViscosityChoice>,
    pub lambda: Option<f64>,
    pub machine_eps: f64,
    /// Gauss points for the viscous projection; collocation when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_points: Option<usize>,
}

impl Default for ViscositySection {
    fn default() -> Self {
        Self {
            kind: None,
            lambda: None,
            machine_eps: DEFAULT_MACHINE_EPS,
            quadrature_points: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Extra snapshot times; the final time is always written.
    pub snapshot_times: Vec<f64>,
    /// Record a trace row every this many steps (and always at the end).
    pub series_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            snapshot_times: Vec::new(),
            series_every: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParallelConfig {
    pub elements: bool,
}

/// Complete description of one run. After [`RunConfig::resolve`] every
/// optional field is filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub preset_variant: PresetVariant,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub flux: Option<FluxKind>,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub sensor: SensorSection,
    #[serde(default)]
    pub viscosity: ViscositySection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub parallel: ParallelConfig,
}

pub const MAX_QUADRATURE_POINTS: usize = 256;

fn config_err(key: &str, msg: impl std::fmt::Display) -> DgError {
    DgError::Config(format!("{key}: {msg}"))
}

impl RunConfig {
    /// Resolved defaults for `scenario`.
    pub fn for_scenario(scenario: Scenario) -> Self {
        let mut cfg = RunConfig {
            scenario,
            preset_variant: PresetVariant::default(),
            mesh: MeshConfig::default(),
            degree: None,
            flux: None,
            time: TimeConfig::default(),
            sensor: SensorSection::default(),
            viscosity: ViscositySection::default(),
            output: OutputConfig::default(),
            parallel: ParallelConfig::default(),
        };
        cfg.fill_defaults();
        cfg
    }

    /// Parse a JSON document, apply `key=value` overrides, fill defaults and
    /// validate.
    pub fn from_json_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_value(value).map_err(|e| DgError::Config(e.to_string()))?;
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    fn fill_defaults(&mut self) {
        let sc = self.scenario;
        let (a, b) = sc.domain();
        self.mesh.elements.get_or_insert(sc.default_elements());
        self.mesh.domain.get_or_insert([a, b]);
        self.mesh.boundary.get_or_insert(if sc.is_advection() {
            BoundaryKind::Periodic
        } else {
            BoundaryKind::Outflow
        });
        self.degree.get_or_insert(sc.default_degree());
        self.flux.get_or_insert(if sc.is_advection() {
            FluxKind::Upwind
        } else {
            FluxKind::LocalLaxFriedrichs
        });
        self.time.final_time.get_or_insert(sc.default_final_time());
        let law = sc.law();
        self.sensor.c.get_or_insert(SensorConfig::for_law(&law).c);
        let kind = *self.viscosity.kind.get_or_insert(match sc {
            Scenario::AdvectionSquare | Scenario::AdvectionSine => ViscosityChoice::None,
            _ => ViscosityChoice::SuperGaussian,
        });
        if let Some(k) = kind.kind() {
            self.viscosity.lambda.get_or_insert(k.default_lambda());
        }
    }

    /// Check ranges and scenario compatibility; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(key, format!("must be positive, got {v}")))
            }
        };
        let elements = self.elements();
        if elements == 0 {
            return Err(config_err("mesh.elements", "must be at least 1"));
        }
        let [a, b] = self.domain();
        if !(b > a) {
            return Err(config_err("mesh.domain", format!("empty interval [{a}, {b}]")));
        }
        let p = self.degree();
        if p == 0 || p > MAX_DEGREE {
            return Err(config_err("degree", format!("must be in 1..={MAX_DEGREE}, got {p}")));
        }
        let law = self.scenario.law();
        if !law.supports_flux(self.flux()) {
            return Err(config_err(
                "flux",
                format!(
                    "{:?} is only available for scalar advection, not {}",
                    self.flux(),
                    self.scenario.name()
                ),
            ));
        }
        positive("time.cfl", self.time.cfl)?;
        positive("time.cfl_visc", self.time.cfl_visc)?;
        positive("time.final_time", self.final_time())?;
        if let Some(dt) = self.time.fixed_dt {
            positive("time.fixed_dt", dt)?;
        }
        positive("sensor.kappa", self.sensor.kappa)?;
        positive("sensor.c", self.sensor_config().c)?;
        if !(self.sensor.eps_max_scale >= 0.0 && self.sensor.eps_max_scale.is_finite()) {
            return Err(config_err("sensor.eps_max_scale", "must be non-negative"));
        }
        if let Some(l) = self.viscosity.lambda {
            positive("viscosity.lambda", l)?;
        }
        if !(self.viscosity.machine_eps > 0.0 && self.viscosity.machine_eps < 1.0) {
            return Err(config_err("viscosity.machine_eps", "must lie in (0, 1)"));
        }
        if let Some(q) = self.viscosity.quadrature_points {
            if !(2..=MAX_QUADRATURE_POINTS).contains(&q) {
                return Err(config_err(
                    "viscosity.quadrature_points",
                    format!("must lie in 2..={MAX_QUADRATURE_POINTS}"),
                ));
            }
        }
        if self.time.mode == TimeMode::SplitFilter && self.viscosity_kind() != Some(ViscosityKind::Legendre) {
            return Err(config_err(
                "time.mode",
                "split_filter requires viscosity.kind = legendre",
            ));
        }
        if self.output.series_every == 0 {
            return Err(config_err("output.series_every", "must be at least 1"));
        }
        for &t in &self.output.snapshot_times {
            if !(t >= 0.0 && t <= self.final_time()) {
                return Err(config_err(
                    "output.snapshot_times",
                    format!("{t} outside [0, {}]", self.final_time()),
                ));
            }
        }
        Ok(())
    }

    pub fn elements(&self) -> usize {
        self.mesh.elements.unwrap_or(self.scenario.default_elements())
    }

    pub fn domain(&self) -> [f64; 2] {
        let (a, b) = self.scenario.domain();
        self.mesh.domain.unwrap_or([a, b])
    }

    pub fn degree(&self) -> usize {
        self.degree.unwrap_or(self.scenario.default_degree())
    }

    pub fn flux(&self) -> FluxKind {
        self.flux.unwrap_or(if self.scenario.is_advection() {
            FluxKind::Upwind
        } else {
            FluxKind::LocalLaxFriedrichs
        })
    }

    pub fn final_time(&self) -> f64 {
        self.time.final_time.unwrap_or(self.scenario.default_final_time())
    }

    pub fn viscosity_kind(&self) -> Option<ViscosityKind> {
        self.viscosity.kind.and_then(ViscosityChoice::kind)
    }

    pub fn distribution(&self) -> Option<ViscosityDistribution> {
        self.viscosity_kind().map(|kind| ViscosityDistribution {
            kind,
            lambda: self.viscosity.lambda.unwrap_or(kind.default_lambda()),
            machine_eps: self.viscosity.machine_eps,
        })
    }

    pub fn sensor_config(&self) -> SensorConfig {
        let base = SensorConfig::for_law(&self.scenario.law());
        SensorConfig {
            mode: self.sensor.mode,
            kappa: self.sensor.kappa,
            c: self.sensor.c.unwrap_or(base.c),
            eps_max_scale: self.sensor.eps_max_scale,
            per_stage: self.sensor.per_stage,
        }
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            cfl: self.time.cfl,
            cfl_visc: self.time.cfl_visc,
            fixed_dt: self.time.fixed_dt,
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let [a, b] = self.domain();
        let boundary = match self.mesh.boundary.unwrap_or(BoundaryKind::Periodic) {
            BoundaryKind::Periodic => Boundary::Periodic,
            BoundaryKind::Outflow => {
                let profile = self.scenario.initial_profile(self.preset_variant);
                Boundary::DirichletOutflow {
                    left: profile.conserved(a),
                    right: profile.conserved(b),
                }
            }
        };
        Mesh::new(a, b, self.elements(), boundary)
    }

    /// Output directory, honouring the `DGLAB_OUT` environment variable.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os("DGLAB_OUT") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.directory.clone(),
        }
    }
}

/// Load, override and validate a config file.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_json_str(&text, overrides)
}

/// Set the dotted `key` of a JSON object to `value`, parsed as JSON when
/// possible and as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| DgError::Config(format!("override '{assignment}' is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(DgError::Config(format!("override '{assignment}' has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| config_err(key, "override path crosses a non-object value"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sod_gets_scenario_defaults() {
        let cfg = RunConfig::from_json_str(r#"{"scenario": "sod"}"#, &[]).unwrap();
        assert_eq!(cfg.elements(), 40);
        assert_eq!(cfg.degree(), 5);
        assert_eq!(cfg.viscosity_kind(), Some(ViscosityKind::SuperGaussian));
        assert_eq!(cfg.flux(), FluxKind::LocalLaxFriedrichs);
        assert_eq!(cfg.final_time(), 0.2);
        assert_eq!(cfg.sensor_config().c, 4.0);
        assert_eq!(cfg.preset_variant, PresetVariant::Classical);
        assert_eq!(cfg.time.cfl, 0.38);
    }

    #[test]
    fn advection_defaults() {
        let cfg = RunConfig::for_scenario(Scenario::AdvectionSquare);
        assert_eq!(cfg.elements(), 20);
        assert_eq!(cfg.degree(), 9);
        assert_eq!(cfg.viscosity_kind(), None);
        assert!(cfg.build_mesh().unwrap().is_periodic());
    }

    #[test]
    fn negative_cfl_is_rejected() {
        let err = RunConfig::from_json_str(r#"{"scenario": "sod", "time": {"cfl": -0.1}}"#, &[]).unwrap_err();
        assert!(err.to_string().contains("time.cfl"), "{err}");
    }

    #[test]
    fn upwind_sod_is_rejected() {
        let err = RunConfig::from_json_str(r#"{"scenario": "sod", "flux": "upwind"}"#, &[]).unwrap_err();
        assert!(err.to_string().contains("flux"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json_str(r#"{"scenario": "sod", "bogus": 1}"#, &[]).is_err());
        assert!(RunConfig::from_json_str(r#"{"scenario": "sod", "time": {"cfll": 1}}"#, &[]).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = RunConfig::from_json_str("{\n\"scenario\": \"sod\",\n}", &[]).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn overrides() {
        let cfg = RunConfig::from_json_str(
            r#"{"scenario": "sod"}"#,
            &[
                "mesh.elements=80".into(),
                "viscosity.kind=c0_linear".into(),
                "time.integrator=ssprk54".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.elements(), 80);
        assert_eq!(cfg.viscosity_kind(), Some(ViscosityKind::C0Linear));
        assert_eq!(cfg.time.integrator, Integrator::Ssprk54);
        assert!(RunConfig::from_json_str(r#"{"scenario": "sod"}"#, &["novalue".into()]).is_err());
    }

    #[test]
    fn split_filter_needs_legendre() {
        let text = r#"{"scenario": "advection_square", "time": {"mode": "split_filter"}}"#;
        assert!(RunConfig::from_json_str(text, &[]).is_err());
        assert!(RunConfig::from_json_str(text, &["viscosity.kind=legendre".into()]).is_ok());
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::for_scenario(Scenario::ShuOsher);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json_str(&text, &[]).unwrap(), cfg);
    }
}
