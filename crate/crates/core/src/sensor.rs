//! Modal smoothness sensor mapping per-element top-mode energy to a
//! viscosity strength.

use serde::{Deserialize, Serialize};

use crate::basis::ReferenceElement;
use crate::equations::{ConservationLaw, MAX_VARS};
use crate::field::{Field, View};
use crate::mesh::Mesh;
use crate::Result;

/// Below this modal energy an element is treated as identically zero.
pub const ENERGY_FLOOR: f64 = 1e-28;
/// Scores are clamped from below at this value.
pub const LOG_FLOOR: f64 = -12.0;
/// Reference score of the modified sensor.
pub const MODIFIED_S_REF: f64 = -2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorMode {
    /// `s = log10 S`, `s_ref = -4 log10 p`.
    Classic,
    /// `s = log10 min(c p⁴ S, 1)`, `s_ref = -2`.
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub mode: SensorMode,
    /// Ramp half-width κ.
    pub kappa: f64,
    /// Sensitivity constant of the modified sensor.
    pub c: f64,
    /// Multiplier on the ε_max rule.
    pub eps_max_scale: f64,
    /// Re-evaluate the sensor at every Runge–Kutta stage instead of once per step.
    pub per_stage: bool,
}

impl SensorConfig {
    /// Defaults for a law: modified mode, κ = 1, c = 1 (scalar) or 4 (Euler).
    pub fn for_law(law: &ConservationLaw) -> Self {
        Self {
            mode: SensorMode::Modified,
            kappa: 1.0,
            c: if law.is_system() { 4.0 } else { 1.0 },
            eps_max_scale: 1.0,
            per_stage: false,
        }
    }

    pub fn s_ref(&self, p: usize) -> f64 {
        match self.mode {
            SensorMode::Classic => -4.0 * (p as f64).log10(),
            SensorMode::Modified => MODIFIED_S_REF,
        }
    }

    pub fn score(&self, indicator: f64, p: usize) -> f64 {
        match self.mode {
            SensorMode::Classic => {
                if indicator > 0.0 {
                    indicator.log10().max(LOG_FLOOR)
                } else {
                    LOG_FLOOR
                }
            }
            SensorMode::Modified => modified_score(indicator, p, self.c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorOutput {
    /// Smoothness indicator S per element.
    pub indicator: Vec<f64>,
    /// Log score s per element.
    pub score: Vec<f64>,
    /// Viscosity strength ε per element.
    pub strength: Vec<f64>,
    pub eps_max: f64,
}

impl SensorOutput {
    pub fn flagged(&self) -> usize {
        self.strength.iter().filter(|s| **s > 0.0).count()
    }
}

/// `S = û_p² / Σ_k û_k²` for orthonormal modal coefficients.
pub fn smoothness_indicator(modal: &[f64]) -> f64 {
    let total: f64 = modal.iter().map(|c| c * c).sum();
    if total < ENERGY_FLOOR {
        return 0.0;
    }
    let top = modal[modal.len() - 1];
    top * top / total
}

/// Sine ramp from 0 at `s_ref - κ` to `ε_max` at `s_ref + κ`.
pub fn strength_from_score(s: f64, s_ref: f64, kappa: f64, eps_max: f64) -> f64 {
    if s < s_ref - kappa {
        0.0
    } else if s > s_ref + kappa {
        eps_max
    } else {
        let r = 0.5 * eps_max * (1.0 + (std::f64::consts::PI * (s - s_ref) / (2.0 * kappa)).sin());
        r.clamp(0.0, eps_max)
    }
}

/// `log10 min(c p⁴ S, 1)`, floored at [`LOG_FLOOR`].
pub fn modified_score(indicator: f64, p: usize, c: f64) -> f64 {
    let f = (c * (p as f64).powi(4) * indicator).min(1.0);
    if f > 0.0 {
        f.log10().max(LOG_FLOOR)
    } else {
        LOG_FLOOR
    }
}

/// `ε_max = ½ · max|∂f/∂u| · h / p`; systems use the maximal wave speed.
pub fn max_strength(law: &ConservationLaw, field: &Field, h: f64, p: usize, elem: &ReferenceElement) -> Result<f64> {
    if h <= 0.0 {
        return Ok(0.0);
    }
    let lam = max_wave_speed_field(law, field, elem)?;
    Ok(0.5 * lam * h / p as f64)
}

/// Largest wave speed over all nodes of `field`.
pub fn max_wave_speed_field(law: &ConservationLaw, field: &Field, elem: &ReferenceElement) -> Result<f64> {
    let nodal = field.to_view(View::Nodal, elem);
    let mut state = [0.0; MAX_VARS];
    let n_vars = law.n_vars();
    let mut lam: f64 = 0.0;
    for e in 0..nodal.n_elements() {
        for j in 0..nodal.n_nodes() {
            nodal.state_at(e, j, &mut state);
            lam = lam.max(law.max_wave_speed(&state[..n_vars])?);
        }
    }
    Ok(lam)
}

/// Evaluate the sensor on the first conserved variable (u, or ρ for Euler).
pub fn sense(
    field: &Field,
    law: &ConservationLaw,
    config: &SensorConfig,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Result<SensorOutput> {
    let p = elem.degree();
    let modal = field.to_view(View::Modal, elem);
    let eps_max = config.eps_max_scale * max_strength(law, field, mesh.h(), p, elem)?;
    let s_ref = config.s_ref(p);
    let n = field.n_elements();
    let mut out = SensorOutput {
        indicator: Vec::with_capacity(n),
        score: Vec::with_capacity(n),
        strength: Vec::with_capacity(n),
        eps_max,
    };
    for e in 0..n {
        let ind = smoothness_indicator(modal.coeffs(e, 0));
        let s = config.score(ind, p);
        out.indicator.push(ind);
        out.score.push(s);
        out.strength.push(strength_from_score(s, s_ref, config.kappa, eps_max));
    }
    Ok(out)
}
