//! Conservation laws, entropy pairs and interface fluxes.

use serde::{Deserialize, Serialize};

use crate::{DgError, Result};

/// Largest number of conserved variables of any supported law.
pub const MAX_VARS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ConservationLaw {
    /// `∂t u + a ∂x u = 0`.
    Advection { speed: f64 },
    /// Compressible Euler for a perfect gas, state `(ρ, m, E)`.
    Euler { gamma: f64 },
}

/// Interface numerical flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxKind {
    Upwind,
    LocalLaxFriedrichs,
}

/// Conserved Euler state with derived velocity and pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerState {
    pub rho: f64,
    pub m: f64,
    pub energy: f64,
}

impl EulerState {
    pub fn new(rho: f64, m: f64, energy: f64) -> Self {
        Self { rho, m, energy }
    }

    pub fn from_primitive(rho: f64, v: f64, pressure: f64, gamma: f64) -> Self {
        Self {
            rho,
            m: rho * v,
            energy: pressure / (gamma - 1.0) + 0.5 * rho * v * v,
        }
    }

    pub fn from_slice(u: &[f64]) -> Self {
        Self::new(u[0], u[1], u[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.rho, self.m, self.energy]
    }

    pub fn velocity(&self) -> f64 {
        self.m / self.rho
    }

    pub fn pressure(&self, gamma: f64) -> f64 {
        let v = self.velocity();
        (gamma - 1.0) * (self.energy - 0.5 * v * v * self.rho)
    }

    pub fn is_admissible(&self, gamma: f64) -> bool {
        let p = self.pressure(gamma);
        self.rho > 0.0 && p > 0.0 && p.is_finite() && self.rho.is_finite()
    }

    fn checked(u: &[f64], gamma: f64) -> Result<(Self, f64, f64)> {
        let s = Self::from_slice(u);
        let p = s.pressure(gamma);
        if !(s.rho > 0.0 && p > 0.0 && s.m.is_finite() && p.is_finite()) {
            return Err(DgError::InadmissibleState {
                rho: s.rho,
                pressure: p,
            });
        }
        Ok((s, s.velocity(), p))
    }
}

impl ConservationLaw {
    pub fn advection() -> Self {
        ConservationLaw::Advection { speed: 1.0 }
    }

    pub fn euler() -> Self {
        ConservationLaw::Euler { gamma: 1.4 }
    }

    pub fn n_vars(&self) -> usize {
        match self {
            ConservationLaw::Advection { .. } => 1,
            ConservationLaw::Euler { .. } => 3,
        }
    }

    pub fn is_system(&self) -> bool {
        self.n_vars() > 1
    }

    pub fn variable_names(&self) -> &'static [&'static str] {
        match self {
            ConservationLaw::Advection { .. } => &["u"],
            ConservationLaw::Euler { .. } => &["rho", "m", "E"],
        }
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_vars() {
            return Err(DgError::LengthMismatch {
                expected: self.n_vars(),
                found: u.len(),
            });
        }
        Ok(())
    }

    /// Write `f(u)` into `out`.
    pub fn flux_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        match *self {
            ConservationLaw::Advection { speed } => {
                out[0] = speed * u[0];
            }
            ConservationLaw::Euler { gamma } => {
                let (s, v, p) = EulerState::checked(u, gamma)?;
                out[0] = s.m;
                out[1] = v * s.m + p;
                out[2] = v * (s.energy + p);
            }
        }
        Ok(())
    }

    pub fn physical_flux(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let mut out = vec![0.0; self.n_vars()];
        self.flux_into(u, &mut out)?;
        Ok(out)
    }

    /// Spectral radius of the flux Jacobian.
    pub fn max_wave_speed(&self, u: &[f64]) -> Result<f64> {
        match *self {
            ConservationLaw::Advection { speed } => Ok(speed.abs()),
            ConservationLaw::Euler { gamma } => {
                let (s, v, p) = EulerState::checked(u, gamma)?;
                Ok(v.abs() + (gamma * p / s.rho).sqrt())
            }
        }
    }

    /// Entropy `U` and entropy flux `F`.
    ///
    /// Euler uses `U = -ρ s`, `F = -ρ s v` with `s = ln P - γ ln ρ`.
    pub fn entropy_pair(&self, u: &[f64]) -> Result<(f64, f64)> {
        match *self {
            ConservationLaw::Advection { speed } => {
                let e = 0.5 * u[0] * u[0];
                Ok((e, speed * e))
            }
            ConservationLaw::Euler { gamma } => {
                let (s, v, p) = EulerState::checked(u, gamma)?;
                let ent = p.ln() - gamma * s.rho.ln();
                let big_u = -s.rho * ent;
                Ok((big_u, big_u * v))
            }
        }
    }

    /// Gradient of `U` with respect to the conserved variables.
    pub fn entropy_variables(&self, u: &[f64]) -> Result<Vec<f64>> {
        match *self {
            ConservationLaw::Advection { .. } => Ok(vec![u[0]]),
            ConservationLaw::Euler { gamma } => {
                let (s, v, p) = EulerState::checked(u, gamma)?;
                let ent = p.ln() - gamma * s.rho.ln();
                let g1 = gamma - 1.0;
                Ok(vec![
                    gamma - ent - g1 * s.rho * v * v / (2.0 * p),
                    g1 * s.rho * v / p,
                    -g1 * s.rho / p,
                ])
            }
        }
    }

    /// Write the interface flux `f_num(u⁻, u⁺)` into `out`.
    pub fn numerical_flux_into(&self, kind: FluxKind, u_minus: &[f64], u_plus: &[f64], out: &mut [f64]) -> Result<()> {
        match (kind, *self) {
            (FluxKind::Upwind, ConservationLaw::Advection { speed }) => {
                out[0] = if speed >= 0.0 {
                    speed * u_minus[0]
                } else {
                    speed * u_plus[0]
                };
                Ok(())
            }
            (FluxKind::Upwind, ConservationLaw::Euler { .. }) => Err(DgError::Unsupported(
                "upwind flux is only defined for scalar advection".into(),
            )),
            (FluxKind::LocalLaxFriedrichs, _) => {
                let n = self.n_vars();
                let mut fm = [0.0; MAX_VARS];
                let mut fp = [0.0; MAX_VARS];
                self.flux_into(u_minus, &mut fm)?;
                self.flux_into(u_plus, &mut fp)?;
                let lam = self.max_wave_speed(u_minus)?.max(self.max_wave_speed(u_plus)?);
                for i in 0..n {
                    out[i] = 0.5 * (fm[i] + fp[i]) - 0.5 * lam * (u_plus[i] - u_minus[i]);
                }
                Ok(())
            }
        }
    }

    pub fn numerical_flux(&self, kind: FluxKind, u_minus: &[f64], u_plus: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u_minus)?;
        self.check_len(u_plus)?;
        let mut out = vec![0.0; self.n_vars()];
        self.numerical_flux_into(kind, u_minus, u_plus, &mut out)?;
        Ok(out)
    }

    /// Check whether `kind` may be used with this law.
    pub fn supports_flux(&self, kind: FluxKind) -> bool {
        !(self.is_system() && kind == FluxKind::Upwind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const E: ConservationLaw = ConservationLaw::Euler { gamma: 1.4 };
    const A: ConservationLaw = ConservationLaw::Advection { speed: 1.0 };

    fn jacobian_fd(f: impl Fn(&[f64]) -> Vec<f64>, u: &[f64], h: f64) -> Vec<Vec<f64>> {
        let n = u.len();
        let m = f(u).len();
        let mut jac = vec![vec![0.0; n]; m];
        for k in 0..n {
            let mut up = u.to_vec();
            let mut um = u.to_vec();
            up[k] += h;
            um[k] -= h;
            let (fp, fm) = (f(&up), f(&um));
            for i in 0..m {
                jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }

    fn random_state() -> impl Strategy<Value = [f64; 3]> {
        (0.1f64..5.0, -3.0f64..3.0, 0.1f64..5.0)
            .prop_map(|(rho, v, p)| EulerState::from_primitive(rho, v, p, 1.4).to_array())
    }

    #[test]
    fn flux_examples() {
        assert_eq!(A.physical_flux(&[2.5]).unwrap(), vec![2.5]);
        let f = E.physical_flux(&[1.0, 0.0, 2.5]).unwrap();
        assert_abs_diff_eq!(f[0], 0.0);
        assert_abs_diff_eq!(f[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[2], 0.0);
        let f = E.physical_flux(&[1.0, 1.0, 3.0]).unwrap();
        assert_abs_diff_eq!(f[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[2], 4.0, epsilon = 1e-15);
    }

    #[test]
    fn inadmissible_states_rejected() {
        assert!(matches!(
            E.physical_flux(&[-1.0, 0.0, 2.5]),
            Err(DgError::InadmissibleState { .. })
        ));
        assert!(E.physical_flux(&[1.0, 3.0, 1.0]).is_err());
        assert!(E.entropy_pair(&[1.0, 0.0, 0.0]).is_err());
        assert!(E.max_wave_speed(&[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn wave_speed_examples() {
        assert_eq!(A.max_wave_speed(&[42.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            E.max_wave_speed(&[1.0, 0.0, 2.5]).unwrap(),
            1.4f64.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            E.max_wave_speed(&[1.0, 1.0, 3.0]).unwrap(),
            1.0 + 1.4f64.sqrt(),
            epsilon = 1e-14
        );
    }

    /// Eigenvalues of the finite-difference flux Jacobian (3x3, real spectrum).
    fn spectral_radius_fd(u: &[f64]) -> f64 {
        let j = jacobian_fd(|s| E.physical_flux(s).unwrap(), u, 1e-6);
        let m = nalgebra::Matrix3::from_fn(|r, c| j[r][c]);
        m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn wave_speed_matches_jacobian_spectrum() {
        for u in [[1.0, 0.0, 2.5], [1.0, 1.0, 3.0], [0.5, -0.7, 1.9]] {
            assert_abs_diff_eq!(E.max_wave_speed(&u).unwrap(), spectral_radius_fd(&u), epsilon = 1e-6);
        }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(A.entropy_pair(&[3.0]).unwrap(), (4.5, 4.5));
        let (u, f) = E.entropy_pair(&[1.0, 0.0, 2.5]).unwrap();
        assert_abs_diff_eq!(u, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f, 0.0, epsilon = 1e-15);
        let e = std::f64::consts::E;
        let state = EulerState::from_primitive(e, 0.0, 1.0, 1.4);
        let (u, _) = E.entropy_pair(&state.to_array()).unwrap();
        assert_abs_diff_eq!(u, 1.4 * e, epsilon = 1e-13);
    }

    #[test]
    fn entropy_variables_match_finite_differences() {
        assert_eq!(A.entropy_variables(&[-2.0]).unwrap(), vec![-2.0]);
        for u in [[1.0, 0.3, 2.8], [1.0, 0.0, 2.8], [0.4, -0.2, 1.1]] {
            let w = E.entropy_variables(&u).unwrap();
            let h = 1e-5;
            for k in 0..3 {
                let mut up = u;
                let mut um = u;
                up[k] += h;
                um[k] -= h;
                let fd = (E.entropy_pair(&up).unwrap().0 - E.entropy_pair(&um).unwrap().0) / (2.0 * h);
                assert_abs_diff_eq!(w[k], fd, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn numerical_flux_examples() {
        assert_eq!(A.numerical_flux(FluxKind::Upwind, &[2.0], &[5.0]).unwrap(), vec![2.0]);
        assert_eq!(
            A.numerical_flux(FluxKind::LocalLaxFriedrichs, &[0.0], &[2.0]).unwrap(),
            vec![0.0]
        );
        assert!(matches!(
            E.numerical_flux(FluxKind::Upwind, &[1.0, 0.0, 2.5], &[1.0, 0.0, 2.5]),
            Err(DgError::Unsupported(_))
        ));
    }

    #[test]
    fn scalar_entropy_compatibility() {
        let h = 1e-6;
        for i in -20..=20 {
            let u = i as f64 * 0.25;
            let df = (A.entropy_pair(&[u + h]).unwrap().1 - A.entropy_pair(&[u - h]).unwrap().1) / (2.0 * h);
            let up = A.entropy_variables(&[u]).unwrap()[0];
            assert_abs_diff_eq!(df, up * 1.0, epsilon = 1e-6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn euler_entropy_flux_compatibility(u in random_state()) {
            // U'(u) f'(u) = F'(u)
            let h = 1e-6;
            let w = E.entropy_variables(&u).unwrap();
            let jf = jacobian_fd(|s| E.physical_flux(s).unwrap(), &u, h);
            let df = jacobian_fd(|s| vec![E.entropy_pair(s).unwrap().1], &u, h);
            for k in 0..3 {
                let lhs: f64 = (0..3).map(|i| w[i] * jf[i][k]).sum();
                let scale = 1.0 + lhs.abs();
                prop_assert!((lhs - df[0][k]).abs() < 1e-5 * scale, "k={} lhs={} rhs={}", k, lhs, df[0][k]);
            }
        }

        #[test]
        fn flux_consistency(u in random_state(), a in -5.0f64..5.0) {
            let f = E.physical_flux(&u).unwrap();
            let g = E.numerical_flux(FluxKind::LocalLaxFriedrichs, &u, &u).unwrap();
            for i in 0..3 {
                prop_assert!((f[i] - g[i]).abs() <= 1e-14 * (1.0 + f[i].abs()));
            }
            for kind in [FluxKind::Upwind, FluxKind::LocalLaxFriedrichs] {
                prop_assert_eq!(A.numerical_flux(kind, &[a], &[a]).unwrap()[0], a);
            }
        }

        #[test]
        fn llf_dissipativity(ul in random_state(), ur in random_state()) {
            let fl = E.physical_flux(&ul).unwrap();
            let fr = E.physical_flux(&ur).unwrap();
            let g = E.numerical_flux(FluxKind::LocalLaxFriedrichs, &ul, &ur).unwrap();
            let d: f64 = (0..3).map(|i| (ur[i] - ul[i]) * (g[i] - 0.5 * (fl[i] + fr[i]))).sum();
            prop_assert!(d <= 0.0);
        }
    }
}
