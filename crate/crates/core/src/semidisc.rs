//! Spatial DG operator: strong-form hyperbolic right-hand side plus the
//! local-DG (BR1, central fluxes) viscous term `∂x(ε(x) ∂x u)`.
//!
//! Everything is collocated at the GLL nodes. The surface lift uses the GLL
//! weights as nodal mass, which makes the scheme a summation-by-parts
//! operator: interface fluxes telescope (conservation) and the viscous term
//! contributes `-Σ w ε (∂x u)²` to the L² entropy rate.
//!
//! Optionally the auxiliary variable `q` is formed by a lumped-mass Galerkin
//! projection of `ε ∂x u` evaluated with a Gauss rule instead of nodal
//! collocation. The rate then becomes `-Σ w_g ε(x_g) (∂x u)²(x_g)`, which
//! resolves distributions that vary sharply between GLL nodes.

use rayon::prelude::*;

use crate::basis::{gauss_legendre, ReferenceElement};
use crate::equations::{ConservationLaw, FluxKind, MAX_VARS};
use crate::field::{Field, View};
use crate::mesh::{Boundary, Mesh};
use crate::viscosity::ViscosityField;
use crate::{DgError, Result};

/// Borrowed discretization context shared by the right-hand-side evaluations.
#[derive(Debug, Clone)]
pub struct SpatialOperator<'a> {
    pub law: ConservationLaw,
    pub flux: FluxKind,
    pub mesh: &'a Mesh,
    pub elem: &'a ReferenceElement,
    pub parallel: bool,
    dr: Vec<f64>,
    lift_left: Vec<f64>,
    lift_right: Vec<f64>,
    quadrature: Option<ViscousQuadrature>,
}

/// Gauss rule for the projection of `ε ∂x u`.
#[derive(Debug, Clone)]
struct ViscousQuadrature {
    points: Vec<f64>,
    /// Row-major `points × nodes` interpolation from the GLL nodes.
    interp: Vec<f64>,
    /// Row-major `nodes × points` matrix `W⁻¹ Iᵀ diag(w_g)`.
    proj: Vec<f64>,
}

impl ViscousQuadrature {
    fn new(points: usize, elem: &ReferenceElement) -> Result<Self> {
        let (xg, wg) = gauss_legendre(points)?;
        let n = elem.n_nodes();
        let im = elem.interpolation_matrix(&xg);
        let interp = (0..points * n).map(|k| im[(k / n, k % n)]).collect();
        let proj = (0..n * points)
            .map(|k| {
                let (i, g) = (k / points, k % points);
                im[(g, i)] * wg[g] / elem.quad_weights[i]
            })
            .collect();
        Ok(Self {
            points: xg,
            interp,
            proj,
        })
    }

    /// Overwrite nodal `g` with the projection of `scale · ε · g`.
    fn project(&self, g: &mut [f64], scale: f64, eps: impl Fn(f64) -> f64) {
        let n = g.len();
        let vals: Vec<f64> = self
            .points
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let row = &self.interp[k * n..(k + 1) * n];
                let gx: f64 = row.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
                scale * eps(x) * gx
            })
            .collect();
        let m = vals.len();
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = self.proj[i * m..(i + 1) * m]
                .iter()
                .zip(&vals)
                .map(|(a, b)| a * b)
                .sum();
        }
    }
}

fn for_each_chunk<F>(parallel: bool, out: &mut [f64], chunk: usize, f: F) -> Result<()>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync + Send,
{
    if parallel {
        out.par_chunks_mut(chunk).enumerate().try_for_each(|(e, c)| f(e, c))
    } else {
        out.chunks_mut(chunk).enumerate().try_for_each(|(e, c)| f(e, c))
    }
}

impl<'a> SpatialOperator<'a> {
    pub fn new(law: ConservationLaw, flux: FluxKind, mesh: &'a Mesh, elem: &'a ReferenceElement) -> Result<Self> {
        if !law.supports_flux(flux) {
            return Err(DgError::Unsupported(format!(
                "{flux:?} flux cannot be used for a system of {} variables",
                law.n_vars()
            )));
        }
        if let Boundary::DirichletOutflow { left, right } = &mesh.boundary {
            if left.len() != law.n_vars() || right.len() != law.n_vars() {
                return Err(DgError::LengthMismatch {
                    expected: law.n_vars(),
                    found: left.len().min(right.len()),
                });
            }
        }
        let n = elem.n_nodes();
        let dr = (0..n * n).map(|i| elem.nodal_diff[(i / n, i % n)]).collect();
        let mut lift_left = vec![0.0; n];
        let mut lift_right = vec![0.0; n];
        lift_left[0] = elem.boundary_lift();
        lift_right[n - 1] = elem.boundary_lift();
        Ok(Self {
            law,
            flux,
            mesh,
            elem,
            parallel: false,
            dr,
            lift_left,
            lift_right,
            quadrature: None,
        })
    }

    /// Form `q` with a `points`-point Gauss rule; `None` restores collocation.
    pub fn with_viscous_quadrature(mut self, points: Option<usize>) -> Result<Self> {
        self.quadrature = points.map(|q| ViscousQuadrature::new(q, self.elem)).transpose()?;
        Ok(self)
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    fn n(&self) -> usize {
        self.elem.n_nodes()
    }

    fn nv(&self) -> usize {
        self.law.n_vars()
    }

    fn len(&self) -> usize {
        self.mesh.n_elements * self.nv() * self.n()
    }

    fn check_len(&self, data: &[f64]) -> Result<()> {
        if data.len() != self.len() {
            return Err(DgError::LengthMismatch {
                expected: self.len(),
                found: data.len(),
            });
        }
        Ok(())
    }

    /// `out = Dr · u` for one nodal vector.
    fn differentiate(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.dr[i * n..(i + 1) * n];
            *o = row.iter().zip(u).map(|(d, v)| d * v).sum();
        }
    }

    /// `t += scale (L_right * right - L_left * left)`.
    fn lift_into(&self, t: &mut [f64], scale: f64, left: f64, right: f64) {
        for ((x, l), r) in t.iter_mut().zip(&self.lift_left).zip(&self.lift_right) {
            *x += scale * (r * right - l * left);
        }
    }

    /// Traces on both sides of interface `k` (0..=I) for variable `v`.
    /// `None` on a side marks a physical boundary of a non-periodic mesh.
    fn traces(&self, data: &[f64], k: usize, v: usize) -> (Option<f64>, Option<f64>) {
        let (n, nv, ne) = (self.n(), self.nv(), self.mesh.n_elements);
        let right_node = |e: usize| data[(e * nv + v) * n + n - 1];
        let left_node = |e: usize| data[(e * nv + v) * n];
        let periodic = self.mesh.is_periodic();
        let minus = if k > 0 {
            Some(right_node(k - 1))
        } else if periodic {
            Some(right_node(ne - 1))
        } else {
            None
        };
        let plus = if k < ne {
            Some(left_node(k))
        } else if periodic {
            Some(left_node(0))
        } else {
            None
        };
        (minus, plus)
    }

    /// Numerical fluxes at all `I + 1` interfaces, `[k * nv + v]`.
    pub fn interface_fluxes(&self, data: &[f64]) -> Result<Vec<f64>> {
        let (nv, ne) = (self.nv(), self.mesh.n_elements);
        let mut fnum = vec![0.0; (ne + 1) * nv];
        let mut um = [0.0; MAX_VARS];
        let mut up = [0.0; MAX_VARS];
        let last = if self.mesh.is_periodic() { ne } else { ne + 1 };
        for k in 0..last {
            for v in 0..nv {
                let (m, p) = self.traces(data, k, v);
                um[v] = match m {
                    Some(x) => x,
                    None => self.ghost(true)[v],
                };
                up[v] = match p {
                    Some(x) => x,
                    None => self.ghost(false)[v],
                };
            }
            self.law
                .numerical_flux_into(self.flux, &um[..nv], &up[..nv], &mut fnum[k * nv..(k + 1) * nv])?;
        }
        if self.mesh.is_periodic() {
            let (head, tail) = fnum.split_at_mut(ne * nv);
            tail.copy_from_slice(&head[..nv]);
        }
        Ok(fnum)
    }

    fn ghost(&self, left: bool) -> &[f64] {
        match &self.mesh.boundary {
            Boundary::DirichletOutflow { left: l, right: r } => {
                if left {
                    l
                } else {
                    r
                }
            }
            Boundary::Periodic => unreachable!("periodic meshes have no ghost states"),
        }
    }

    /// Hyperbolic tendency `(2/h) [-Dr f + L (f - f_num)]` on raw nodal data.
    pub fn hyperbolic_into(&self, data: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(data)?;
        self.check_len(out)?;
        let (n, nv) = (self.n(), self.nv());
        let jac = 2.0 / self.mesh.h();
        let fnum = self.interface_fluxes(data)?;
        let law = self.law;
        for_each_chunk(self.parallel, out, nv * n, |e, chunk| {
            let u = &data[e * nv * n..(e + 1) * nv * n];
            let mut state = [0.0; MAX_VARS];
            let mut f = vec![0.0; nv * n];
            let mut fj = [0.0; MAX_VARS];
            for j in 0..n {
                for v in 0..nv {
                    state[v] = u[v * n + j];
                }
                law.flux_into(&state[..nv], &mut fj[..nv])?;
                for v in 0..nv {
                    f[v * n + j] = fj[v];
                }
            }
            for v in 0..nv {
                let fv = &f[v * n..(v + 1) * n];
                let t = &mut chunk[v * n..(v + 1) * n];
                self.differentiate(fv, t);
                for x in t.iter_mut() {
                    *x *= -jac;
                }
                self.lift_into(t, jac, fv[0] - fnum[e * nv + v], fv[n - 1] - fnum[(e + 1) * nv + v]);
            }
            Ok(())
        })
    }

    /// Central interface averages of `data` for variable `v`; interior trace
    /// at physical boundaries.
    fn central(&self, data: &[f64], v: usize) -> Vec<f64> {
        (0..=self.mesh.n_elements)
            .map(|k| match self.traces(data, k, v) {
                (Some(a), Some(b)) => 0.5 * (a + b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => unreachable!(),
            })
            .collect()
    }

    /// Local-DG viscous tendency `∂x(ε ∂x u)`, added to every variable.
    pub fn viscous_into(&self, data: &[f64], visc: &ViscosityField, out: &mut [f64]) -> Result<()> {
        self.check_len(data)?;
        self.check_len(out)?;
        let (n, nv) = (self.n(), self.nv());
        if visc.n_elements() != self.mesh.n_elements || visc.n_nodes() != n {
            return Err(DgError::LengthMismatch {
                expected: self.mesh.n_elements * n,
                found: visc.samples.len(),
            });
        }
        if let Some(bad) = visc.samples.iter().find(|s| !(**s >= 0.0)) {
            return Err(DgError::InvalidInput(format!("negative viscosity sample {bad}")));
        }
        if visc.is_zero() {
            out.fill(0.0);
            return Ok(());
        }
        let jac = 2.0 / self.mesh.h();

        let u_star: Vec<Vec<f64>> = (0..nv).map(|v| self.central(data, v)).collect();
        let mut q = vec![0.0; data.len()];
        for_each_chunk(self.parallel, &mut q, nv * n, |e, chunk| {
            let eps = visc.element(e);
            for v in 0..nv {
                let u = &data[(e * nv + v) * n..(e * nv + v + 1) * n];
                let g = &mut chunk[v * n..(v + 1) * n];
                self.differentiate(u, g);
                self.lift_into(g, 1.0, u_star[v][e] - u[0], u_star[v][e + 1] - u[n - 1]);
                match &self.quadrature {
                    Some(quad) => quad.project(g, jac, |x| visc.value_at(e, x)),
                    None => {
                        for (gj, ej) in g.iter_mut().zip(eps) {
                            *gj *= jac * ej;
                        }
                    }
                }
            }
            Ok(())
        })?;

        let q_star: Vec<Vec<f64>> = (0..nv).map(|v| self.central(&q, v)).collect();
        for_each_chunk(self.parallel, out, nv * n, |e, chunk| {
            for v in 0..nv {
                let qv = &q[(e * nv + v) * n..(e * nv + v + 1) * n];
                let t = &mut chunk[v * n..(v + 1) * n];
                self.differentiate(qv, t);
                self.lift_into(t, 1.0, q_star[v][e] - qv[0], q_star[v][e + 1] - qv[n - 1]);
                for x in t.iter_mut() {
                    *x *= jac;
                }
            }
            Ok(())
        })
    }

    /// Hyperbolic plus viscous tendency.
    pub fn full_into(&self, data: &[f64], visc: &ViscosityField, out: &mut [f64]) -> Result<()> {
        self.hyperbolic_into(data, out)?;
        if visc.is_zero() {
            return Ok(());
        }
        let mut tmp = vec![0.0; out.len()];
        self.viscous_into(data, visc, &mut tmp)?;
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += t;
        }
        Ok(())
    }
}

fn nodal_field(field: &Field, elem: &ReferenceElement) -> Field {
    field.to_view(View::Nodal, elem)
}

pub fn hyperbolic_rhs(
    field: &Field,
    law: &ConservationLaw,
    flux: FluxKind,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Result<Field> {
    let op = SpatialOperator::new(*law, flux, mesh, elem)?;
    let u = nodal_field(field, elem);
    let mut out = Field::zeros(u.n_elements(), u.n_vars(), u.n_nodes(), View::Nodal);
    op.hyperbolic_into(u.data(), out.data_mut())?;
    Ok(out)
}

/// Viscous tendency. The law only fixes the number of variables here, so any
/// law with the field's variable count may be passed.
pub fn viscous_rhs(
    field: &Field,
    law: &ConservationLaw,
    visc: &ViscosityField,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Result<Field> {
    let op = SpatialOperator::new(*law, FluxKind::LocalLaxFriedrichs, mesh, elem)?;
    let u = nodal_field(field, elem);
    let mut out = Field::zeros(u.n_elements(), u.n_vars(), u.n_nodes(), View::Nodal);
    op.viscous_into(u.data(), visc, out.data_mut())?;
    Ok(out)
}

pub fn full_rhs(
    field: &Field,
    law: &ConservationLaw,
    flux: FluxKind,
    visc: &ViscosityField,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Result<Field> {
    let op = SpatialOperator::new(*law, flux, mesh, elem)?;
    let u = nodal_field(field, elem);
    let mut out = Field::zeros(u.n_elements(), u.n_vars(), u.n_nodes(), View::Nodal);
    op.full_into(u.data(), visc, out.data_mut())?;
    Ok(out)
}
