//! Degree-1 DG with the generalized minmod slope limiter, used to produce
//! dense reference solutions where no exact solution exists.

use crate::basis::ReferenceElement;
use crate::equations::{ConservationLaw, FluxKind};
use crate::field::{Field, View};
use crate::mesh::{Boundary, Mesh};
use crate::scenario::{PresetVariant, Scenario};
use crate::semidisc::SpatialOperator;
use crate::sensor::max_wave_speed_field;
use crate::timeint::{Integrator, StepControl};
use crate::{DgError, Result};

/// Boundary values within this tolerance of the minmod reconstruction are
/// left untouched.
const LIMITER_TOL: f64 = 1e-8;

pub fn minmod(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Apply the generalized (TVB constant `M = 0`) minmod limiter to degree-1
/// nodal data, variable by variable. Element means are preserved.
pub fn limit_p1(data: &mut [f64], law: &ConservationLaw, mesh: &Mesh) -> Result<()> {
    let nv = law.n_vars();
    let ne = mesh.n_elements;
    if data.len() != ne * nv * 2 {
        return Err(DgError::LengthMismatch {
            expected: ne * nv * 2,
            found: data.len(),
        });
    }
    let h = mesh.h();
    for v in 0..nv {
        let means: Vec<f64> = (0..ne)
            .map(|e| 0.5 * (data[(e * nv + v) * 2] + data[(e * nv + v) * 2 + 1]))
            .collect();
        let (ghost_l, ghost_r) = match &mesh.boundary {
            Boundary::Periodic => (means[ne - 1], means[0]),
            Boundary::DirichletOutflow { left, right } => (left[v], right[v]),
        };
        for e in 0..ne {
            let o = (e * nv + v) * 2;
            let (u0, u1) = (data[o], data[o + 1]);
            let m = means[e];
            let mm = if e > 0 { means[e - 1] } else { ghost_l };
            let mp = if e + 1 < ne { means[e + 1] } else { ghost_r };
            let ue_l = m - minmod(m - u0, m - mm, mp - m);
            let ue_r = m + minmod(u1 - m, m - mm, mp - m);
            if (ue_l - u0).abs() < LIMITER_TOL && (ue_r - u1).abs() < LIMITER_TOL {
                continue;
            }
            let slope = minmod((u1 - u0) / h, (mp - m) / h, (m - mm) / h);
            data[o] = m - 0.5 * h * slope;
            data[o + 1] = m + 0.5 * h * slope;
        }
    }
    Ok(())
}

/// Dense degree-1 solution produced by [`limited_reference_run`].
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub law: ConservationLaw,
    pub mesh: Mesh,
    pub elem: ReferenceElement,
    pub field: Field,
    pub time: f64,
    pub steps: usize,
}

impl ReferenceSolution {
    /// Conserved variables at `x` (linear within each element).
    pub fn sample(&self, x: f64) -> Vec<f64> {
        let (e, xi) = self.mesh.locate(x);
        (0..self.law.n_vars())
            .map(|v| {
                let c = self.field.coeffs(e, v);
                0.5 * (1.0 - xi) * c[0] + 0.5 * (1.0 + xi) * c[1]
            })
            .collect()
    }
}

/// Run `scenario` with degree 1, `n_elements` elements, SSPRK(3,3) and the
/// minmod limiter after every stage, up to `final_time` (scenario default
/// when `None`).
pub fn limited_reference_run(
    scenario: Scenario,
    variant: PresetVariant,
    n_elements: usize,
    final_time: Option<f64>,
) -> Result<ReferenceSolution> {
    let law = scenario.law();
    let mesh = scenario.mesh(n_elements, variant)?;
    let elem = ReferenceElement::new(1)?;
    let profile = scenario.initial_profile(variant);
    let field = Field::project(&mesh, &elem, law.n_vars(), |x| profile.conserved(x))?;
    let flux = if law.is_system() {
        FluxKind::LocalLaxFriedrichs
    } else {
        FluxKind::Upwind
    };
    run_limited(
        law,
        flux,
        mesh,
        elem,
        field,
        final_time.unwrap_or(scenario.default_final_time()),
    )
}

/// Limited degree-1 evolution of an arbitrary initial field.
pub fn run_limited(
    law: ConservationLaw,
    flux: FluxKind,
    mesh: Mesh,
    elem: ReferenceElement,
    field: Field,
    final_time: f64,
) -> Result<ReferenceSolution> {
    if elem.degree() != 1 {
        return Err(DgError::Unsupported("the minmod reference run is degree 1".into()));
    }
    let control = StepControl::default();
    let mut u = field.to_view(View::Nodal, &elem).into_data();
    limit_p1(&mut u, &law, &mesh)?;
    let shape = field.to_view(View::Nodal, &elem);
    let op = SpatialOperator::new(law, flux, &mesh, &elem)?;
    let mut t = 0.0;
    let mut steps = 0;
    while t < final_time {
        let current = shape.with_data(u.clone())?;
        let lam = max_wave_speed_field(&law, &current, &elem)?;
        let mut dt = control.advective_bound(mesh.h(), 1, lam);
        if t + dt > final_time {
            dt = final_time - t;
        }
        u = Integrator::Ssprk33
            .step_with(
                &u,
                dt,
                |s, out| op.hyperbolic_into(s, out),
                |s| limit_p1(s, &law, &mesh),
            )
            .map_err(|e| match e {
                DgError::BlowUp { stage, .. } => DgError::BlowUp { step: steps, stage },
                other => other,
            })?;
        t += dt;
        steps += 1;
    }
    Ok(ReferenceSolution {
        law,
        field: shape.with_data(u)?,
        mesh,
        elem,
        time: t,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minmod_cases() {
        assert_eq!(minmod(1.0, 2.0, 3.0), 1.0);
        assert_eq!(minmod(-1.0, -2.0, -0.5), -0.5);
        assert_eq!(minmod(1.0, -2.0, 3.0), 0.0);
    }

    #[test]
    fn limiter_leaves_constants_and_linear_profiles() {
        let law = ConservationLaw::advection();
        let mesh = Mesh::periodic(0.0, 1.0, 10).unwrap();
        let mut c = vec![2.0; 20];
        limit_p1(&mut c, &law, &mesh).unwrap();
        assert!(c.iter().all(|v| *v == 2.0));

        // linear ramp on the interior of a non-periodic mesh with matching ghosts
        let h = 0.1;
        let bnd = Boundary::DirichletOutflow {
            left: vec![-0.5 * h],
            right: vec![1.0 + 0.5 * h],
        };
        let mesh = Mesh::new(0.0, 1.0, 10, bnd).unwrap();
        let mut lin: Vec<f64> = (0..10).flat_map(|e| [e as f64 * h, (e + 1) as f64 * h]).collect();
        let before = lin.clone();
        limit_p1(&mut lin, &law, &mesh).unwrap();
        assert_eq!(lin, before);
    }

    #[test]
    fn limiter_flattens_extrema_and_keeps_means() {
        let law = ConservationLaw::advection();
        let mesh = Mesh::periodic(0.0, 1.0, 4).unwrap();
        let mut d = vec![0.0, 0.0, -0.5, 1.5, 0.0, 0.0, 0.0, 0.0];
        limit_p1(&mut d, &law, &mesh).unwrap();
        assert_eq!(d[2], 0.5);
        assert_eq!(d[3], 0.5);
    }

    #[test]
    fn constant_state_is_unchanged() {
        let law = ConservationLaw::euler();
        let mesh = Mesh::periodic(0.0, 1.0, 16).unwrap();
        let elem = ReferenceElement::new(1).unwrap();
        let state = [1.2, 0.3, 2.0];
        let f = Field::interpolate(&mesh, &elem, 3, |_| state.to_vec());
        let r = run_limited(law, FluxKind::LocalLaxFriedrichs, mesh, elem, f, 0.1).unwrap();
        for e in 0..16 {
            for (v, s) in state.iter().enumerate() {
                assert!(r.field.coeffs(e, v).iter().all(|c| (c - s).abs() < 1e-13));
            }
        }
    }

    #[test]
    fn periodic_advection_conserves_mass_without_new_extrema() {
        let law = ConservationLaw::advection();
        let mesh = Mesh::periodic(0.0, 1.0, 200).unwrap();
        let elem = ReferenceElement::new(1).unwrap();
        let f = Field::project(&mesh, &elem, 1, |x| {
            vec![if (0.25..0.75).contains(&x) { 1.0 } else { 0.0 } + 0.3 * (2.0 * std::f64::consts::PI * x).sin()]
        })
        .unwrap();
        let mean = |f: &Field, e: usize| 0.5 * (f.coeffs(e, 0)[0] + f.coeffs(e, 0)[1]);
        let (lo, hi) = (0..200).fold((f64::MAX, f64::MIN), |(a, b), e| {
            (a.min(mean(&f, e)), b.max(mean(&f, e)))
        });
        let mass0 = crate::diagnostics::total_integral(&f, &elem, &mesh)[0];
        let r = run_limited(law, FluxKind::Upwind, mesh.clone(), elem.clone(), f, 0.7).unwrap();
        let mass = crate::diagnostics::total_integral(&r.field, &elem, &mesh)[0];
        assert!((mass - mass0).abs() < 1e-10, "{mass} vs {mass0}");
        for e in 0..200 {
            let m = mean(&r.field, e);
            assert!(
                m >= lo - 1e-12 && m <= hi + 1e-12,
                "element {e}: {m} outside [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn sod_reference_matches_exact_solution() {
        let r = limited_reference_run(Scenario::Sod, PresetVariant::Classical, 2000, None).unwrap();
        assert!((r.time - 0.2).abs() < 1e-14);
        let crate::scenario::InitialProfile::Riemann { x0, left, right, gamma } =
            Scenario::Sod.initial_profile(PresetVariant::Classical)
        else {
            unreachable!()
        };
        let norms = crate::diagnostics::error_norms(
            &r.field,
            |x| {
                crate::diagnostics::sod_exact(x, r.time, left, right, gamma, x0)
                    .unwrap()
                    .to_array()
                    .to_vec()
            },
            &r.elem,
            &r.mesh,
        );
        assert!(norms[0].l1 < 5e-3, "density L1 {}", norms[0].l1);
    }
}
