//! Strong-stability-preserving Runge–Kutta steppers, step-size control and
//! the modal exponential filter.

use serde::{Deserialize, Serialize};

use crate::basis::ReferenceElement;
use crate::equations::ConservationLaw;
use crate::field::{Field, View};
use crate::mesh::Mesh;
use crate::semidisc::SpatialOperator;
use crate::sensor::max_wave_speed_field;
use crate::viscosity::{ViscosityField, ViscosityKind};
use crate::{DgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Ssprk33,
    Ssprk54,
}

/// SSPRK(5,4) in Shu–Osher form (Spiteri & Ruuth).
///
/// Row `i` builds stage `i + 1` as `Σ_k a[i][k] u_k + b[i] Δt L(u_i)`
/// over the previous stages `u_0 = uⁿ, …, u_i`; `SSP54_B_EXTRA` adds the
/// `Δt L(u_3)` term of the final combination.
const SSP54_A: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.444370493651235, 0.555629506348765, 0.0, 0.0, 0.0],
    [0.620101851488403, 0.0, 0.379898148511597, 0.0, 0.0],
    [0.178079954393132, 0.0, 0.0, 0.821920045606868, 0.0],
    [0.0, 0.0, 0.517231671970585, 0.096059710526147, 0.386708617503269],
];
const SSP54_B: [f64; 5] = [
    0.391752226571890,
    0.368410593050371,
    0.251891774271694,
    0.544974750228521,
    0.226007483236906,
];
const SSP54_B_EXTRA: f64 = 0.063692468666290;

impl Integrator {
    pub fn stages(self) -> usize {
        match self {
            Integrator::Ssprk33 => 3,
            Integrator::Ssprk54 => 5,
        }
    }

    /// Advance `state` by `dt`. `post_stage` runs on every new stage value
    /// (limiters hook in here).
    pub fn step_with<R, P>(self, state: &[f64], dt: f64, mut rhs: R, mut post_stage: P) -> Result<Vec<f64>>
    where
        R: FnMut(&[f64], &mut [f64]) -> Result<()>,
        P: FnMut(&mut [f64]) -> Result<()>,
    {
        let n = state.len();
        let mut l = vec![0.0; n];
        let check = |u: &[f64], stage: usize| -> Result<()> {
            if u.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(DgError::BlowUp { step: 0, stage })
            }
        };
        match self {
            Integrator::Ssprk33 => {
                rhs(state, &mut l)?;
                let mut u1: Vec<f64> = state.iter().zip(&l).map(|(u, k)| u + dt * k).collect();
                post_stage(&mut u1)?;
                check(&u1, 1)?;
                rhs(&u1, &mut l)?;
                let mut u2: Vec<f64> = (0..n).map(|i| 0.75 * state[i] + 0.25 * (u1[i] + dt * l[i])).collect();
                post_stage(&mut u2)?;
                check(&u2, 2)?;
                rhs(&u2, &mut l)?;
                let mut u3: Vec<f64> = (0..n)
                    .map(|i| state[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * l[i]))
                    .collect();
                post_stage(&mut u3)?;
                check(&u3, 3)?;
                Ok(u3)
            }
            Integrator::Ssprk54 => {
                let mut stages: Vec<Vec<f64>> = vec![state.to_vec()];
                let mut l3 = Vec::new();
                for i in 0..5 {
                    rhs(&stages[i], &mut l)?;
                    if i == 3 {
                        l3 = l.clone();
                    }
                    // Σ a_k u_k written as u_0 + Σ a_k (u_k - u_0) since each row sums to one
                    let mut next = stages[0].clone();
                    for (k, a) in SSP54_A[i].iter().enumerate().take(i + 1).skip(1) {
                        if *a != 0.0 {
                            for ((x, s), s0) in next.iter_mut().zip(&stages[k]).zip(&stages[0]) {
                                *x += a * (s - s0);
                            }
                        }
                    }
                    for (x, li) in next.iter_mut().zip(&l) {
                        *x += SSP54_B[i] * dt * li;
                    }
                    if i == 4 {
                        for (x, li) in next.iter_mut().zip(&l3) {
                            *x += SSP54_B_EXTRA * dt * li;
                        }
                    }
                    post_stage(&mut next)?;
                    check(&next, i + 1)?;
                    stages.push(next);
                }
                Ok(stages.pop().unwrap())
            }
        }
    }

    pub fn step<R>(self, state: &[f64], dt: f64, rhs: R) -> Result<Vec<f64>>
    where
        R: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        self.step_with(state, dt, rhs, |_| Ok(()))
    }
}

pub fn ssprk33_step<R>(state: &[f64], dt: f64, rhs: R) -> Result<Vec<f64>>
where
    R: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    Integrator::Ssprk33.step(state, dt, rhs)
}

pub fn ssprk54_step<R>(state: &[f64], dt: f64, rhs: R) -> Result<Vec<f64>>
where
    R: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    Integrator::Ssprk54.step(state, dt, rhs)
}

/// CFL-type step-size control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Advective CFL constant C.
    pub cfl: f64,
    /// Safety constant of the parabolic bound.
    pub cfl_visc: f64,
    pub fixed_dt: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            cfl: 0.38,
            cfl_visc: 0.25,
            fixed_dt: None,
        }
    }
}

impl StepControl {
    /// `C h / ((2p + 1) λmax)`.
    pub fn advective_bound(&self, h: f64, p: usize, lambda_max: f64) -> f64 {
        if lambda_max <= 0.0 {
            return f64::INFINITY;
        }
        self.cfl * h / ((2 * p + 1) as f64 * lambda_max)
    }

    /// `C_visc Δx² / ‖ε‖∞` with the smallest GLL spacing `Δx = h / p²`;
    /// `+∞` without viscosity.
    pub fn parabolic_bound(&self, h: f64, p: usize, eps_max: f64) -> f64 {
        if eps_max <= 0.0 {
            return f64::INFINITY;
        }
        let dx = h / (p * p) as f64;
        self.cfl_visc * dx * dx / eps_max
    }
}

/// `min(advective, parabolic)` bound, or the fixed step when configured.
pub fn compute_dt(
    field: &Field,
    law: &ConservationLaw,
    visc: &ViscosityField,
    mesh: &Mesh,
    elem: &ReferenceElement,
    control: &StepControl,
) -> Result<f64> {
    let dt = match control.fixed_dt {
        Some(dt) => dt,
        None => {
            let lam = max_wave_speed_field(law, field, elem)?;
            let p = elem.degree();
            let h = mesh.h();
            control
                .advective_bound(h, p, lam)
                .min(control.parabolic_bound(h, p, visc.max_value()))
        }
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DgError::InvalidInput(format!("non-positive time step {dt}")));
    }
    Ok(dt)
}

/// Exact solution of the Legendre-viscosity substep over `dt`: mode `k` of
/// element `i` is damped by `exp(-ε_i k(k+1) dt (2/h)²)`.
pub fn modal_filter_step(
    field: &Field,
    strengths: &[f64],
    dt: f64,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Result<Field> {
    if strengths.len() != field.n_elements() {
        return Err(DgError::LengthMismatch {
            expected: field.n_elements(),
            found: strengths.len(),
        });
    }
    let view = field.view();
    let mut modal = field.to_view(View::Modal, elem);
    let jac2 = (2.0 / mesh.h()).powi(2);
    for (e, &eps) in strengths.iter().enumerate() {
        if eps == 0.0 {
            continue;
        }
        for v in 0..field.n_vars() {
            for (c, lam) in modal.coeffs_mut(e, v).iter_mut().zip(&elem.eigenvalues) {
                *c *= (-eps * lam * dt * jac2).exp();
            }
        }
    }
    Ok(modal.to_view(view, elem))
}

/// First-order Lie splitting: one hyperbolic SSPRK step, then the exact
/// Legendre filter. Only valid for Legendre viscosity.
pub fn operator_split_advance(
    field: &Field,
    dt: f64,
    op: &SpatialOperator<'_>,
    integrator: Integrator,
    strengths: &[f64],
    kind: ViscosityKind,
) -> Result<Field> {
    if kind != ViscosityKind::Legendre {
        return Err(DgError::Unsupported(format!(
            "the modal filter is the exact substep only for legendre viscosity, not {kind:?}"
        )));
    }
    let nodal = field.to_view(View::Nodal, op.elem);
    let next = integrator.step(nodal.data(), dt, |u, out| op.hyperbolic_into(u, out))?;
    let next = nodal.with_data(next)?;
    let filtered = modal_filter_step(&next, strengths, dt, op.mesh, op.elem)?;
    Ok(filtered.to_view(field.view(), op.elem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::FluxKind;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn decay(u: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = -u[0];
        Ok(())
    }

    fn error_at_one(integrator: Integrator, steps: usize) -> f64 {
        let dt = 1.0 / steps as f64;
        let mut u = vec![1.0];
        for _ in 0..steps {
            u = integrator.step(&u, dt, decay).unwrap();
        }
        (u[0] - (-1.0f64).exp()).abs()
    }

    #[test]
    fn zero_rhs_is_identity() {
        let u = vec![1.0, -2.0, 3.5];
        for integ in [Integrator::Ssprk33, Integrator::Ssprk54] {
            let v = integ
                .step(&u, 0.3, |_, o| {
                    o.fill(0.0);
                    Ok(())
                })
                .unwrap();
            assert_eq!(v, u);
        }
    }

    #[test]
    fn exponential_decay_single_step() {
        let u = ssprk33_step(&[1.0], 0.1, decay).unwrap();
        assert!((u[0] - (-0.1f64).exp()).abs() < 2e-5);
        let u = ssprk54_step(&[1.0], 0.1, decay).unwrap();
        assert!((u[0] - (-0.1f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn convergence_ratios() {
        let r3 = error_at_one(Integrator::Ssprk33, 10) / error_at_one(Integrator::Ssprk33, 20);
        assert!((r3 - 8.0).abs() < 0.8, "{r3}");
        let r4 = error_at_one(Integrator::Ssprk54, 10) / error_at_one(Integrator::Ssprk54, 20);
        assert!((r4 - 16.0).abs() < 1.6, "{r4}");
    }

    #[test]
    fn ssp54_rows_are_convex() {
        for row in SSP54_A {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            assert!(row.iter().all(|a| *a >= 0.0));
        }
        assert!(SSP54_B.iter().all(|b| *b >= 0.0));
    }

    #[test]
    fn blow_up_detected() {
        let r = Integrator::Ssprk33.step(&[1.0], 1.0, |_, o| {
            o[0] = f64::NAN;
            Ok(())
        });
        assert!(matches!(r, Err(DgError::BlowUp { stage: 1, .. })));
    }

    #[test]
    fn compute_dt_examples() {
        let elem = ReferenceElement::new(9).unwrap();
        let mesh = Mesh::periodic(0.0, 1.0, 20).unwrap();
        let law = ConservationLaw::advection();
        let f = Field::interpolate(&mesh, &elem, 1, |x| vec![x]);
        let zero = ViscosityField::zeros(20, 10);
        let ctl = StepControl::default();
        let dt = compute_dt(&f, &law, &zero, &mesh, &elem, &ctl).unwrap();
        assert_abs_diff_eq!(dt, 1e-3, epsilon = 1e-15);
        assert_eq!(ctl.parabolic_bound(0.05, 9, 0.0), f64::INFINITY);
        let a = ctl.parabolic_bound(0.05, 9, 0.01);
        let b = ctl.parabolic_bound(0.05, 9, 0.02);
        assert_abs_diff_eq!(a, 2.0 * b, epsilon = 1e-18);

        let fixed = StepControl {
            fixed_dt: Some(2e-4),
            ..ctl
        };
        assert_eq!(compute_dt(&f, &law, &zero, &mesh, &elem, &fixed).unwrap(), 2e-4);
        let bad = StepControl {
            fixed_dt: Some(-1.0),
            ..ctl
        };
        assert!(compute_dt(&f, &law, &zero, &mesh, &elem, &bad).is_err());
    }

    #[test]
    fn dt_monotone_in_eps_and_degree() {
        let ctl = StepControl::default();
        let mut prev = f64::INFINITY;
        for eps in [0.0, 1e-4, 1e-3, 1e-2, 1e-1] {
            let b = ctl.advective_bound(0.1, 5, 1.0).min(ctl.parabolic_bound(0.1, 5, eps));
            assert!(b <= prev);
            prev = b;
        }
        let mut prev = f64::INFINITY;
        for p in 1..12 {
            let b = ctl.advective_bound(0.1, p, 1.0).min(ctl.parabolic_bound(0.1, p, 1e-3));
            assert!(b <= prev);
            prev = b;
        }
    }

    fn single_element_modal(coeffs: &[f64], h: f64) -> (Mesh, ReferenceElement, Field) {
        let elem = ReferenceElement::new(coeffs.len() - 1).unwrap();
        let mesh = Mesh::periodic(0.0, h, 1).unwrap();
        let f = Field::from_data(1, 1, coeffs.len(), View::Modal, coeffs.to_vec()).unwrap();
        (mesh, elem, f)
    }

    #[test]
    fn filter_examples() {
        let (mesh, elem, f) = single_element_modal(&[0.3, 0.0, 1.0, 0.2], 2.0);
        let g = modal_filter_step(&f, &[0.01], 0.1, &mesh, &elem).unwrap();
        assert_eq!(g.coeffs(0, 0)[0], 0.3);
        assert_abs_diff_eq!(g.coeffs(0, 0)[2], (-0.006f64).exp(), epsilon = 1e-15);
        let id = modal_filter_step(&f, &[0.0], 0.1, &mesh, &elem).unwrap();
        assert_eq!(id, f);

        // Nodal input comes back nodal; the mean is preserved.
        let nodal = f.to_view(View::Nodal, &elem);
        let g = modal_filter_step(&nodal, &[0.5], 0.3, &mesh, &elem).unwrap();
        assert_eq!(g.view(), View::Nodal);
        assert_abs_diff_eq!(g.to_view(View::Modal, &elem).coeffs(0, 0)[0], 0.3, epsilon = 1e-14);
    }

    #[test]
    fn filter_matches_rk_integration_of_substep() {
        // ∂t û = ε K û with K the weak Legendre-viscosity operator, integrated by RK4.
        let coeffs = [0.4, -0.7, 1.0, 0.25, -0.5, 0.3];
        let (mesh, elem, f) = single_element_modal(&coeffs, 2.0);
        let k_mat = crate::basis::assemble_weak_viscous_operator(&elem, |x| 1.0 - x * x, 8).unwrap();
        let (eps, dt) = (0.01, 0.1);
        let steps = 2000;
        let h = dt / steps as f64;
        let mut u = nalgebra::DVector::from_column_slice(&coeffs);
        let rhs = |u: &nalgebra::DVector<f64>| &k_mat * u * eps;
        for _ in 0..steps {
            let k1 = rhs(&u);
            let k2 = rhs(&(&u + &k1 * (h / 2.0)));
            let k3 = rhs(&(&u + &k2 * (h / 2.0)));
            let k4 = rhs(&(&u + &k3 * h));
            u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        let g = modal_filter_step(&f, &[eps], dt, &mesh, &elem).unwrap();
        for (a, b) in g.coeffs(0, 0).iter().zip(u.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
        }
    }

    #[test]
    fn filter_non_expansive() {
        let (mesh, elem, f) = single_element_modal(&[1.0, 2.0, -3.0, 0.5, 0.1], 0.7);
        let g = modal_filter_step(&f, &[0.05], 0.02, &mesh, &elem).unwrap();
        let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        assert!(norm(g.coeffs(0, 0)) < norm(f.coeffs(0, 0)));
        for (a, b) in g.coeffs(0, 0).iter().zip(f.coeffs(0, 0)) {
            assert!(a.abs() <= b.abs());
        }
    }

    #[test]
    fn split_requires_legendre_and_reduces_to_hyperbolic_without_viscosity() {
        let elem = ReferenceElement::new(4).unwrap();
        let mesh = Mesh::periodic(0.0, 1.0, 5).unwrap();
        let law = ConservationLaw::advection();
        let op = SpatialOperator::new(law, FluxKind::Upwind, &mesh, &elem).unwrap();
        let f = Field::interpolate(&mesh, &elem, 1, |x| vec![(2.0 * PI * x).sin()]);
        let zero = [0.0; 5];
        let a = operator_split_advance(&f, 0.01, &op, Integrator::Ssprk33, &zero, ViscosityKind::Legendre).unwrap();
        let b = Integrator::Ssprk33
            .step(f.data(), 0.01, |u, o| op.hyperbolic_into(u, o))
            .unwrap();
        for (x, y) in a.data().iter().zip(&b) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-14);
        }
        assert!(
            operator_split_advance(&f, 0.01, &op, Integrator::Ssprk33, &zero, ViscosityKind::SuperGaussian).is_err()
        );
    }

    #[test]
    fn split_and_unsplit_differ_at_first_order() {
        // Unsplit reference: hyperbolic DG operator plus the exact modal
        // Legendre operator, so only the splitting error remains. (The
        // collocated LDG form of this operator drops mode p: the GLL nodes
        // are the roots of (1 - x²) P_p'.)
        let elem = ReferenceElement::new(6).unwrap();
        let mesh = Mesh::periodic(0.0, 1.0, 4).unwrap();
        let law = ConservationLaw::advection();
        let op = SpatialOperator::new(law, FluxKind::Upwind, &mesh, &elem).unwrap();
        let f0 = Field::interpolate(&mesh, &elem, 1, |x| vec![(2.0 * PI * x).sin()]);
        let eps = 2e-3;
        let strengths = [eps; 4];
        let jac2 = (2.0 / mesh.h()).powi(2);
        let t_end = 0.05;
        let run = |steps: usize| -> f64 {
            let dt = t_end / steps as f64;
            let mut split = f0.clone();
            let mut unsplit = f0.data().to_vec();
            for _ in 0..steps {
                split = operator_split_advance(
                    &split,
                    dt,
                    &op,
                    Integrator::Ssprk33,
                    &strengths,
                    ViscosityKind::Legendre,
                )
                .unwrap();
                unsplit = Integrator::Ssprk33
                    .step(&unsplit, dt, |u, o| {
                        op.hyperbolic_into(u, o)?;
                        let fu = f0.with_data(u.to_vec())?.to_view(View::Modal, &elem);
                        let mut lv = fu.clone();
                        for e in 0..4 {
                            let c = crate::basis::apply_legendre_viscous_operator(fu.coeffs(e, 0), &elem)?;
                            lv.coeffs_mut(e, 0).copy_from_slice(&c);
                        }
                        let lv = lv.to_view(View::Nodal, &elem);
                        for (x, y) in o.iter_mut().zip(lv.data()) {
                            *x += eps * jac2 * y;
                        }
                        Ok(())
                    })
                    .unwrap();
            }
            split
                .data()
                .iter()
                .zip(&unsplit)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (d1, d2) = (run(50), run(100));
        let ratio = d1 / d2;
        assert!(d1 > 0.0);
        assert!((1.6..2.4).contains(&ratio), "ratio {ratio} ({d1}, {d2})");
    }
}
