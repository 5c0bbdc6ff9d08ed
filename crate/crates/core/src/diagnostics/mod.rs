//! Conservation and entropy tracking, exact and reference solutions, error
//! norms.

mod reference;
mod riemann;

pub use reference::{limit_p1, limited_reference_run, minmod, run_limited, ReferenceSolution};
pub use riemann::{sod_exact, RiemannProblem, RiemannSolution, Wave};

use serde::Serialize;

use crate::basis::ReferenceElement;
use crate::equations::{ConservationLaw, MAX_VARS};
use crate::field::{Field, View};
use crate::mesh::Mesh;
use crate::scenario::InitialProfile;
use crate::{DgError, Result};

/// GLL quadrature of every variable over the domain.
pub fn total_integral(field: &Field, elem: &ReferenceElement, mesh: &Mesh) -> Vec<f64> {
    let nodal = field.to_view(View::Nodal, elem);
    let half_h = 0.5 * mesh.h();
    (0..nodal.n_vars())
        .map(|v| {
            (0..nodal.n_elements())
                .map(|e| {
                    half_h
                        * nodal
                            .coeffs(e, v)
                            .iter()
                            .zip(&elem.quad_weights)
                            .map(|(u, w)| u * w)
                            .sum::<f64>()
                })
                .sum()
        })
        .collect()
}

/// GLL quadrature of the entropy `U(u)` evaluated nodally.
pub fn total_entropy(field: &Field, law: &ConservationLaw, elem: &ReferenceElement, mesh: &Mesh) -> Result<f64> {
    let nodal = field.to_view(View::Nodal, elem);
    let half_h = 0.5 * mesh.h();
    let nv = law.n_vars();
    let mut state = [0.0; MAX_VARS];
    let mut total = 0.0;
    for e in 0..nodal.n_elements() {
        let mut elem_sum = 0.0;
        for (j, w) in elem.quad_weights.iter().enumerate() {
            nodal.state_at(e, j, &mut state);
            elem_sum += w * law.entropy_pair(&state[..nv])?.0;
        }
        total += half_h * elem_sum;
    }
    Ok(total)
}

/// Quadrature estimate of `d/dt ∫ U = Σ ⟨U'(u), tendency⟩`.
pub fn entropy_rate(
    field: &Field,
    tendency: &Field,
    law: &ConservationLaw,
    elem: &ReferenceElement,
    mesh: &Mesh,
) -> Result<f64> {
    let u = field.to_view(View::Nodal, elem);
    let t = tendency.to_view(View::Nodal, elem);
    let nv = law.n_vars();
    let mut state = [0.0; MAX_VARS];
    let mut rate = 0.0;
    for e in 0..u.n_elements() {
        for (j, w) in elem.quad_weights.iter().enumerate() {
            u.state_at(e, j, &mut state);
            let ev = law.entropy_variables(&state[..nv])?;
            let dot: f64 = (0..nv).map(|v| ev[v] * t.coeffs(e, v)[j]).sum();
            rate += 0.5 * mesh.h() * w * dot;
        }
    }
    Ok(rate)
}

/// Exact solution of periodic linear advection with unit speed on `[a, b]`.
pub fn advection_exact(profile: &InitialProfile, t: f64, x: f64, domain: (f64, f64)) -> f64 {
    let (a, b) = domain;
    let len = b - a;
    let shifted = a + (x - t - a).rem_euclid(len);
    profile.conserved(shifted)[0]
}

/// One row of the run trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub mass: Vec<f64>,
    pub entropy: f64,
    pub max_eps: f64,
    pub flagged: usize,
    pub dt: f64,
}

/// Time series of conserved totals, entropy and viscosity activity.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn push(&mut self, row: TraceRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(DgError::InvalidInput(format!(
                    "trace time {} not after {}",
                    row.t, last.t
                )));
            }
        }
        if !(row.t.is_finite() && row.entropy.is_finite() && row.mass.iter().all(|m| m.is_finite())) {
            return Err(DgError::InvalidInput("non-finite trace entry".into()));
        }
        self.rows.push(row);
        Ok(())
    }
}

/// L¹, L² and L∞ norms of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// `4 (p + 1)` cell-centred equispaced reference coordinates per element.
pub fn sample_coordinates(p: usize) -> Vec<f64> {
    let n = 4 * (p + 1);
    (0..n).map(|j| -1.0 + (2.0 * j as f64 + 1.0) / n as f64).collect()
}

/// Evaluate `field` on the oversampled grid: `(x, values[var][point])`.
pub fn sample_field(field: &Field, elem: &ReferenceElement, mesh: &Mesh) -> (Vec<f64>, Vec<Vec<f64>>) {
    let pts = sample_coordinates(elem.degree());
    let interp = elem.interpolation_matrix(&pts);
    let nodal = field.to_view(View::Nodal, elem);
    let mut xs = Vec::with_capacity(mesh.n_elements * pts.len());
    let mut vals = vec![Vec::with_capacity(xs.capacity()); field.n_vars()];
    for e in 0..mesh.n_elements {
        for (i, &xi) in pts.iter().enumerate() {
            xs.push(mesh.to_physical(e, xi));
            for (v, col) in vals.iter_mut().enumerate() {
                let c = nodal.coeffs(e, v);
                col.push((0..c.len()).map(|k| interp[(i, k)] * c[k]).sum());
            }
        }
    }
    (xs, vals)
}

/// Midpoint-rule norms of `field - reference` on the oversampled grid.
pub fn error_norms(
    field: &Field,
    reference: impl Fn(f64) -> Vec<f64>,
    elem: &ReferenceElement,
    mesh: &Mesh,
) -> Vec<Norms> {
    let (xs, vals) = sample_field(field, elem, mesh);
    let dx = mesh.length() / xs.len() as f64;
    let refs: Vec<Vec<f64>> = xs.iter().map(|&x| reference(x)).collect();
    (0..field.n_vars())
        .map(|v| {
            let errs = vals[v].iter().zip(&refs).map(|(a, r)| (a - r[v]).abs());
            let mut n = Norms {
                l1: 0.0,
                l2: 0.0,
                linf: 0.0,
            };
            for e in errs {
                n.l1 += e * dx;
                n.l2 += e * e * dx;
                n.linf = n.linf.max(e);
            }
            n.l2 = n.l2.sqrt();
            n
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{PresetVariant, Scenario};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn integral_examples() {
        let elem = ReferenceElement::new(5).unwrap();
        let mesh = Mesh::periodic(-1.0, 2.0, 7).unwrap();
        let c = Field::interpolate(&mesh, &elem, 1, |_| vec![1.5]);
        assert_abs_diff_eq!(total_integral(&c, &elem, &mesh)[0], 4.5, epsilon = 1e-13);

        let mesh = Mesh::periodic(0.0, 1.0, 20).unwrap();
        let elem9 = ReferenceElement::new(9).unwrap();
        let s = Field::interpolate(&mesh, &elem9, 1, |x| vec![(2.0 * PI * x).sin()]);
        assert!(total_integral(&s, &elem9, &mesh)[0].abs() < 1e-10);
        let lin = Field::interpolate(&mesh, &elem, 1, |x| vec![x]);
        assert_abs_diff_eq!(total_integral(&lin, &elem, &mesh)[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let elem = ReferenceElement::new(4).unwrap();
        let mesh = Mesh::periodic(0.0, 1.0, 5).unwrap();
        let law = ConservationLaw::advection();
        let two = Field::interpolate(&mesh, &elem, 1, |_| vec![2.0]);
        assert_abs_diff_eq!(total_entropy(&two, &law, &elem, &mesh).unwrap(), 2.0, epsilon = 1e-14);

        let euler = ConservationLaw::euler();
        let unit = Field::interpolate(&mesh, &elem, 3, |_| vec![1.0, 0.0, 2.5]);
        assert_abs_diff_eq!(
            total_entropy(&unit, &euler, &elem, &mesh).unwrap(),
            0.0,
            epsilon = 1e-15
        );

        // Square wave on element interfaces is represented exactly.
        let elem9 = ReferenceElement::new(9).unwrap();
        let mesh20 = Mesh::periodic(0.0, 1.0, 20).unwrap();
        let profile = Scenario::AdvectionSquare.initial_profile(PresetVariant::Classical);
        let sq = Field::project(&mesh20, &elem9, 1, |x| profile.conserved(x)).unwrap();
        assert_abs_diff_eq!(
            total_entropy(&sq, &law, &elem9, &mesh20).unwrap(),
            profile.l2_entropy(0.0, 1.0).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn advection_exact_shifts() {
        let profile = Scenario::AdvectionSquare.initial_profile(PresetVariant::Classical);
        for x in [0.0, 0.1, 0.26, 0.5, 0.74, 0.9] {
            assert_eq!(advection_exact(&profile, 0.0, x, (0.0, 1.0)), profile.conserved(x)[0]);
            assert_eq!(advection_exact(&profile, 1.0, x, (0.0, 1.0)), profile.conserved(x)[0]);
        }
        assert_eq!(advection_exact(&profile, 0.25, 0.49, (0.0, 1.0)), 0.0);
        assert_eq!(advection_exact(&profile, 0.25, 0.51, (0.0, 1.0)), 1.0);
        assert_eq!(advection_exact(&profile, 0.25, 0.99, (0.0, 1.0)), 1.0);
        assert_eq!(advection_exact(&profile, 0.25, 0.01, (0.0, 1.0)), 0.0);
    }

    #[test]
    fn trace_requires_increasing_time() {
        let mut tr = RunTrace::default();
        let row = |t: f64| TraceRow {
            t,
            mass: vec![1.0],
            entropy: 0.5,
            max_eps: 0.0,
            flagged: 0,
            dt: 0.1,
        };
        tr.push(row(0.0)).unwrap();
        tr.push(row(0.1)).unwrap();
        assert!(tr.push(row(0.1)).is_err());
    }

    #[test]
    fn norms_examples() {
        let elem = ReferenceElement::new(9).unwrap();
        let mesh = Mesh::periodic(0.0, 1.0, 20).unwrap();
        let f = Field::interpolate(&mesh, &elem, 1, |x| vec![x * x]);
        let n = error_norms(&f, |x| vec![x * x], &elem, &mesh);
        assert!(n[0].linf < 1e-13 && n[0].l1 < 1e-13 && n[0].l2 < 1e-13);

        let n = error_norms(&f, |x| vec![x * x + 0.3], &elem, &mesh);
        assert_abs_diff_eq!(n[0].linf, 0.3, epsilon = 1e-13);
        assert_abs_diff_eq!(n[0].l1, 0.3, epsilon = 1e-13);

        let n = error_norms(&f, |x| vec![x * x + (2.0 * PI * x).sin()], &elem, &mesh);
        assert_abs_diff_eq!(n[0].l1, 2.0 / PI, epsilon = 1e-4);
        assert_abs_diff_eq!(n[0].l2, 0.5f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(n[0].linf, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn sod_exact_wrapper() {
        let p = Scenario::Sod.initial_profile(PresetVariant::Classical);
        let InitialProfile::Riemann { left, right, gamma, x0 } = p else {
            panic!()
        };
        let s = sod_exact(0.2, 1e-9, left, right, gamma, x0).unwrap();
        assert_abs_diff_eq!(s.rho, 1.0, epsilon = 1e-15);
    }
}
