//! Viscosity distributions ν(x) on the reference element and the assembled
//! per-element viscosity field ε(x) = ε_i · ν(x).

use serde::{Deserialize, Serialize};

use crate::basis::ReferenceElement;
use crate::field::{Field, View};
use crate::mesh::Mesh;
use crate::{DgError, Result};

/// Default machine-precision constant entering the super-Gaussian decay rate.
pub const DEFAULT_MACHINE_EPS: f64 = 1e-16;

/// Points within this distance of ±1 evaluate the Gevrey bump to exactly 0.
const GEVREY_EDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscosityKind {
    PiecewiseConstant,
    C0Linear,
    Legendre,
    Gegenbauer,
    SuperGaussian,
    Gevrey,
}

impl ViscosityKind {
    pub const ALL: [ViscosityKind; 6] = [
        ViscosityKind::PiecewiseConstant,
        ViscosityKind::C0Linear,
        ViscosityKind::Legendre,
        ViscosityKind::Gegenbauer,
        ViscosityKind::SuperGaussian,
        ViscosityKind::Gevrey,
    ];

    /// Smooth inside the element and vanishing at its boundary.
    pub fn is_compact(self) -> bool {
        matches!(
            self,
            ViscosityKind::Legendre | ViscosityKind::Gegenbauer | ViscosityKind::SuperGaussian | ViscosityKind::Gevrey
        )
    }

    /// Shape parameter λ used when none is configured.
    pub fn default_lambda(self) -> f64 {
        match self {
            ViscosityKind::Gegenbauer => 0.1,
            ViscosityKind::SuperGaussian | ViscosityKind::Gevrey => 100.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscosityDistribution {
    pub kind: ViscosityKind,
    pub lambda: f64,
    pub machine_eps: f64,
}

impl ViscosityDistribution {
    pub fn new(kind: ViscosityKind) -> Self {
        Self {
            kind,
            lambda: kind.default_lambda(),
            machine_eps: DEFAULT_MACHINE_EPS,
        }
    }

    pub fn with_lambda(kind: ViscosityKind, lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::new(kind)
        }
    }

    /// `α = -ln ε_M`.
    pub fn alpha(&self) -> f64 {
        -self.machine_eps.ln()
    }

    /// ν(x) on the reference element.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x.abs() <= 1.0) {
            return Err(DgError::Domain { x });
        }
        if !(self.lambda > 0.0) {
            return Err(DgError::InvalidInput(format!(
                "shape parameter must be positive, got {}",
                self.lambda
            )));
        }
        let x2 = x * x;
        Ok(match self.kind {
            ViscosityKind::PiecewiseConstant => 1.0,
            ViscosityKind::C0Linear => {
                return Err(DgError::Unsupported(
                    "c0_linear viscosity is defined by field assembly, not pointwise".into(),
                ))
            }
            ViscosityKind::Legendre => 1.0 - x2,
            ViscosityKind::Gegenbauer => (1.0 - x2).powf(self.lambda),
            ViscosityKind::SuperGaussian => (-self.alpha() * x.abs().powf(2.0 * self.lambda)).exp(),
            ViscosityKind::Gevrey => {
                if x.abs() >= 1.0 - GEVREY_EDGE {
                    0.0
                } else {
                    (x2 / (self.lambda * (x2 - 1.0))).exp()
                }
            }
        })
    }
}

/// Free-function form of [`ViscosityDistribution::value`].
pub fn distribution_value(dist: &ViscosityDistribution, x: f64) -> Result<f64> {
    dist.value(x)
}

/// Vertex values of the Klöckner C⁰ smoothing; element `i` spans vertices
/// `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct C0Smoothing {
    pub vertex_values: Vec<f64>,
}

impl C0Smoothing {
    /// Linear interpolant in element `i` at reference coordinate `xi`.
    pub fn element_value(&self, i: usize, xi: f64) -> f64 {
        let (a, b) = (self.vertex_values[i], self.vertex_values[i + 1]);
        0.5 * (1.0 - xi) * a + 0.5 * (1.0 + xi) * b
    }
}

/// Three-step C⁰ smoothing of piecewise-constant strengths: every vertex takes
/// the maximum strength of its adjacent elements, each element then receives
/// the linear interpolant between its two vertex values.
///
/// Periodic meshes wrap the end vertices; otherwise each boundary vertex
/// sees only its single adjacent element.
pub fn klockner_smooth(strengths: &[f64], mesh: &Mesh) -> Result<C0Smoothing> {
    let n = strengths.len();
    if n != mesh.n_elements {
        return Err(DgError::LengthMismatch {
            expected: mesh.n_elements,
            found: n,
        });
    }
    if let Some(bad) = strengths.iter().find(|s| !(**s >= 0.0)) {
        return Err(DgError::InvalidInput(format!("negative viscosity strength {bad}")));
    }
    let mut vertex_values = vec![0.0; n + 1];
    for i in 1..n {
        vertex_values[i] = strengths[i - 1].max(strengths[i]);
    }
    if mesh.is_periodic() {
        let wrap = strengths[n - 1].max(strengths[0]);
        vertex_values[0] = wrap;
        vertex_values[n] = wrap;
    } else {
        vertex_values[0] = strengths[0];
        vertex_values[n] = strengths[n - 1];
    }
    Ok(C0Smoothing { vertex_values })
}

/// Nodal samples of ε(x) for every element.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityField {
    n_nodes: usize,
    /// Per-element strength ε_i.
    pub strengths: Vec<f64>,
    /// `strengths.len() × n_nodes` samples at the GLL nodes.
    pub samples: Vec<f64>,
    pub distribution: Option<ViscosityDistribution>,
    /// Present for `C0Linear` only.
    pub vertex_values: Option<Vec<f64>>,
}

impl ViscosityField {
    /// Identically zero viscosity.
    pub fn zeros(n_elements: usize, n_nodes: usize) -> Self {
        Self {
            n_nodes,
            strengths: vec![0.0; n_elements],
            samples: vec![0.0; n_elements * n_nodes],
            distribution: None,
            vertex_values: None,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.strengths.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn element(&self, i: usize) -> &[f64] {
        &self.samples[i * self.n_nodes..(i + 1) * self.n_nodes]
    }

    pub fn max_value(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|s| *s == 0.0)
    }

    /// ε at reference coordinate `xi` of element `i`.
    pub fn value_at(&self, i: usize, xi: f64) -> f64 {
        let s = self.strengths[i];
        match (&self.distribution, &self.vertex_values) {
            (_, Some(v)) => 0.5 * (1.0 - xi) * v[i] + 0.5 * (1.0 + xi) * v[i + 1],
            (Some(d), None) if s > 0.0 => s * d.value(xi.clamp(-1.0, 1.0)).unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Scale every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.strengths.iter_mut().for_each(|s| *s *= factor);
        out.samples.iter_mut().for_each(|s| *s *= factor);
        if let Some(v) = out.vertex_values.as_mut() {
            v.iter_mut().for_each(|s| *s *= factor);
        }
        out
    }
}

/// Assemble ε(x) = ε_i · ν(x) sampled at the GLL nodes of every element.
pub fn build_viscosity_field(
    strengths: &[f64],
    dist: &ViscosityDistribution,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Result<ViscosityField> {
    if strengths.len() != mesh.n_elements {
        return Err(DgError::LengthMismatch {
            expected: mesh.n_elements,
            found: strengths.len(),
        });
    }
    if let Some(bad) = strengths.iter().find(|s| !(**s >= 0.0)) {
        return Err(DgError::InvalidInput(format!("negative viscosity strength {bad}")));
    }
    let n = elem.n_nodes();
    let mut samples = vec![0.0; strengths.len() * n];
    let mut vertex_values = None;
    match dist.kind {
        ViscosityKind::C0Linear => {
            let smooth = klockner_smooth(strengths, mesh)?;
            for (i, chunk) in samples.chunks_exact_mut(n).enumerate() {
                for (s, &xi) in chunk.iter_mut().zip(&elem.nodes) {
                    *s = smooth.element_value(i, xi);
                }
            }
            vertex_values = Some(smooth.vertex_values);
        }
        _ => {
            let shape: Vec<f64> = elem.nodes.iter().map(|&x| dist.value(x)).collect::<Result<_>>()?;
            for (chunk, &eps) in samples.chunks_exact_mut(n).zip(strengths) {
                for (s, nu) in chunk.iter_mut().zip(&shape) {
                    *s = eps * nu;
                }
            }
        }
    }
    Ok(ViscosityField {
        n_nodes: n,
        strengths: strengths.to_vec(),
        samples,
        distribution: Some(*dist),
        vertex_values,
    })
}

/// Continuous-level conservation defect `Σ_i [ε ∂x u]` over element
/// boundaries, per variable, using each element's own traces of ε and ∂x u
/// (right trace minus left trace).
///
/// Zero whenever ε vanishes at every element boundary.
pub fn conservation_violation_functional(
    field: &Field,
    visc: &ViscosityField,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Result<Vec<f64>> {
    if visc.n_elements() != field.n_elements() || visc.n_nodes() != field.n_nodes() {
        return Err(DgError::LengthMismatch {
            expected: field.n_elements() * field.n_nodes(),
            found: visc.samples.len(),
        });
    }
    let nodal = field.to_view(View::Nodal, elem);
    let n = elem.n_nodes();
    let jac = 2.0 / mesh.h();
    let d = &elem.nodal_diff;
    let mut out = vec![0.0; field.n_vars()];
    for e in 0..field.n_elements() {
        let eps = visc.element(e);
        for (v, acc) in out.iter_mut().enumerate() {
            let u = nodal.coeffs(e, v);
            let du_left: f64 = jac * (0..n).map(|k| d[(0, k)] * u[k]).sum::<f64>();
            let du_right: f64 = jac * (0..n).map(|k| d[(n - 1, k)] * u[k]).sum::<f64>();
            *acc += eps[n - 1] * du_right - eps[0] * du_left;
        }
    }
    Ok(out)
}
