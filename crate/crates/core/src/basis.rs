//! Legendre polynomial machinery and reference-element operators on [-1, 1].
//!
//! Modal storage uses the orthonormal Legendre basis
//! `φ_k = P_k · sqrt((2k + 1) / 2)`. The solution is collocated at the
//! Gauss–Lobatto–Legendre (GLL) nodes, so the Vandermonde matrix maps modal
//! coefficients to nodal values.

use nalgebra::DMatrix;

use crate::{DgError, Result};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 30;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;
const DOMAIN_SLACK: f64 = 1e-14;

/// Unnormalized Legendre polynomial `P_k(x)` by the three-term recurrence.
pub fn legendre_eval(k: usize, x: f64) -> Result<f64> {
    if k > MAX_DEGREE + 1 {
        return Err(DgError::OutOfRange {
            what: "legendre degree",
            value: k,
            min: 0,
            max: MAX_DEGREE + 1,
        });
    }
    if !(x.abs() <= 1.0 + DOMAIN_SLACK) {
        return Err(DgError::Domain { x });
    }
    Ok(legendre_with_derivative(k, x).0)
}

/// `(P_k(x), P_k'(x))`, no range checks.
pub(crate) fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for n in 1..k {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        // P'_{n+1} = P'_{n-1} + (2n + 1) P_n
        let d_next = d_prev + (2.0 * nf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

fn orthonormal_scale(k: usize) -> f64 {
    ((2 * k + 1) as f64 / 2.0).sqrt()
}

/// Orthonormal Legendre basis function and its derivative.
pub fn orthonormal_with_derivative(k: usize, x: f64) -> (f64, f64) {
    let (p, d) = legendre_with_derivative(k, x);
    let s = orthonormal_scale(k);
    (s * p, s * d)
}

/// Gauss–Legendre points and weights (`n` points, exact to degree `2n - 1`).
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(DgError::InvalidInput("zero quadrature points".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(DgError::NoConvergence {
                what: "Gauss-Legendre Newton iteration",
                iterations: NEWTON_MAX_ITER,
            });
        }
        let (_, d) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// Gauss–Lobatto–Legendre points and weights for degree `p` (`p + 1` points).
///
/// Interior nodes are the roots of `P_p'`, found by Newton iteration using
/// the Legendre equation for `P_p''`.
pub fn gauss_lobatto_legendre(p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if p == 0 {
        return Err(DgError::OutOfRange {
            what: "degree",
            value: p,
            min: 1,
            max: MAX_DEGREE,
        });
    }
    let n = p + 1;
    let pp1 = (p * (p + 1)) as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    for j in 1..=(p / 2) {
        let mut x = -(std::f64::consts::PI * j as f64 / p as f64).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (pv, d) = legendre_with_derivative(p, x);
            let d2 = (2.0 * x * d - pp1 * pv) / (1.0 - x * x);
            let dx = d / d2;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(DgError::NoConvergence {
                what: "Gauss-Lobatto Newton iteration",
                iterations: NEWTON_MAX_ITER,
            });
        }
        nodes[j] = x;
        nodes[p - j] = -x;
    }
    if p.is_multiple_of(2) {
        nodes[p / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let pv = legendre_with_derivative(p, x).0;
            2.0 / (pp1 * pv * pv)
        })
        .collect();
    Ok((nodes, weights))
}

/// Which scaling of the Legendre polynomials a modal operator set uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Plain `P_k`, `∫ P_k² = 2 / (2k + 1)`.
    Unnormalized,
    /// `P_k · sqrt((2k + 1) / 2)`.
    Orthonormal,
}

/// Modal mass, stiffness, differentiation and restriction matrices.
#[derive(Debug, Clone)]
pub struct ModalOperators {
    pub mass: DMatrix<f64>,
    /// `S_jk = ∫ φ_j ∂x φ_k`.
    pub stiffness: DMatrix<f64>,
    /// `D = M⁻¹ S`.
    pub diff: DMatrix<f64>,
    /// Row 0 evaluates at -1, row 1 at +1.
    pub restriction: DMatrix<f64>,
}

/// Assemble the modal operators with exact (Gauss–Legendre) integration.
pub fn assemble_modal_operators(p: usize, norm: Normalization) -> Result<ModalOperators> {
    check_degree(p)?;
    let n = p + 1;
    let scale = |k: usize| match norm {
        Normalization::Unnormalized => 1.0,
        Normalization::Orthonormal => orthonormal_scale(k),
    };
    let (qx, qw) = gauss_legendre(p + 2)?;
    let mut mass = DMatrix::zeros(n, n);
    let mut stiffness = DMatrix::zeros(n, n);
    for (&x, &w) in qx.iter().zip(&qw) {
        let vals: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let (v, d) = legendre_with_derivative(k, x);
                (scale(k) * v, scale(k) * d)
            })
            .collect();
        for j in 0..n {
            for k in 0..n {
                mass[(j, k)] += w * vals[j].0 * vals[k].0;
                stiffness[(j, k)] += w * vals[j].0 * vals[k].1;
            }
        }
    }
    let diff = mass
        .clone()
        .lu()
        .solve(&stiffness)
        .ok_or_else(|| DgError::InvalidInput("singular mass matrix".into()))?;
    let mut restriction = DMatrix::zeros(2, n);
    for k in 0..n {
        restriction[(0, k)] = scale(k) * legendre_with_derivative(k, -1.0).0;
        restriction[(1, k)] = scale(k) * legendre_with_derivative(k, 1.0).0;
    }
    Ok(ModalOperators {
        mass,
        stiffness,
        diff,
        restriction,
    })
}

fn check_degree(p: usize) -> Result<()> {
    if !(1..=MAX_DEGREE).contains(&p) {
        return Err(DgError::OutOfRange {
            what: "degree",
            value: p,
            min: 1,
            max: MAX_DEGREE,
        });
    }
    Ok(())
}

/// Reference element `[-1, 1]` of degree `p`.
///
/// Modal operators are exact in the orthonormal basis (so `mass` is the
/// identity). The nodal operators used by the semidiscretization are the
/// GLL-collocated ones: `nodal_diff` differentiates the degree-`p`
/// interpolant and the GLL weights act as the (diagonal) nodal mass.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    degree: usize,
    pub nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
    /// `V_jk = φ_k(x_j)`, modal → nodal.
    pub vandermonde: DMatrix<f64>,
    pub inv_vandermonde: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub diff: DMatrix<f64>,
    /// 2 × (p+1); row 0 evaluates at -1, row 1 at +1.
    pub restriction: DMatrix<f64>,
    /// `diag(-1, +1)`, matching the restriction rows.
    pub boundary: DMatrix<f64>,
    /// `λ_k = k (k + 1)`.
    pub eigenvalues: Vec<f64>,
    /// Nodal differentiation matrix `V_x V⁻¹`.
    pub nodal_diff: DMatrix<f64>,
}

impl ReferenceElement {
    pub fn new(p: usize) -> Result<Self> {
        check_degree(p)?;
        let n = p + 1;
        let (nodes, quad_weights) = gauss_lobatto_legendre(p)?;
        let mut vandermonde = DMatrix::zeros(n, n);
        let mut vx = DMatrix::zeros(n, n);
        for (j, &x) in nodes.iter().enumerate() {
            for k in 0..n {
                let (v, d) = orthonormal_with_derivative(k, x);
                vandermonde[(j, k)] = v;
                vx[(j, k)] = d;
            }
        }
        let inv_vandermonde = vandermonde
            .clone()
            .try_inverse()
            .ok_or_else(|| DgError::InvalidInput("singular Vandermonde matrix".into()))?;
        let nodal_diff = &vx * &inv_vandermonde;
        let ops = assemble_modal_operators(p, Normalization::Orthonormal)?;
        let boundary = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0]));
        let eigenvalues = (0..n).map(|k| (k * (k + 1)) as f64).collect();
        Ok(Self {
            degree: p,
            nodes,
            quad_weights,
            vandermonde,
            inv_vandermonde,
            mass: ops.mass,
            stiffness: ops.stiffness,
            diff: ops.diff,
            restriction: ops.restriction,
            boundary,
            eigenvalues,
            nodal_diff,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    /// Inverse of the GLL weight at an endpoint node; the nodal lift factor.
    pub fn boundary_lift(&self) -> f64 {
        1.0 / self.quad_weights[0]
    }

    /// `Vᵀ diag(w) V`: the GLL-quadrature Gram matrix of the orthonormal basis.
    ///
    /// Equals the identity except in the `(p, p)` slot, where GLL quadrature
    /// (exact only to degree `2p - 1`) gives `(2p + 1) / p` instead of 1.
    pub fn gll_gram(&self) -> DMatrix<f64> {
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.quad_weights));
        self.vandermonde.transpose() * w * &self.vandermonde
    }

    /// Evaluate a modal expansion at reference coordinate `x`.
    pub fn eval_modal(&self, modal: &[f64], x: f64) -> f64 {
        modal
            .iter()
            .enumerate()
            .map(|(k, c)| c * orthonormal_with_derivative(k, x).0)
            .sum()
    }

    /// Evaluate the nodal interpolant at reference coordinate `x`.
    pub fn eval_nodal(&self, values: &[f64], x: f64) -> f64 {
        let modal = &self.inv_vandermonde * nalgebra::DVector::from_column_slice(values);
        self.eval_modal(modal.as_slice(), x)
    }

    /// Row-major matrix of orthonormal basis values at `points` (points × modes).
    pub fn interpolation_matrix(&self, points: &[f64]) -> DMatrix<f64> {
        let n = self.n_nodes();
        DMatrix::from_fn(points.len(), n, |i, k| orthonormal_with_derivative(k, points[i]).0) * &self.inv_vandermonde
    }
}

pub fn nodal_to_modal(values: &[f64], elem: &ReferenceElement) -> Result<Vec<f64>> {
    check_len(values.len(), elem.n_nodes())?;
    let v = nalgebra::DVector::from_column_slice(values);
    Ok((&elem.inv_vandermonde * v).as_slice().to_vec())
}

pub fn modal_to_nodal(modal: &[f64], elem: &ReferenceElement) -> Result<Vec<f64>> {
    check_len(modal.len(), elem.n_nodes())?;
    let v = nalgebra::DVector::from_column_slice(modal);
    Ok((&elem.vandermonde * v).as_slice().to_vec())
}

/// Modal coefficients of `∂x (1 - x²) ∂x u`, computed from the Legendre
/// eigen-relation: mode `k` maps to `-k(k+1) û_k`.
pub fn apply_legendre_viscous_operator(modal: &[f64], elem: &ReferenceElement) -> Result<Vec<f64>> {
    check_len(modal.len(), elem.n_nodes())?;
    Ok(modal.iter().zip(&elem.eigenvalues).map(|(u, lam)| -lam * u).collect())
}

/// Weak-form assembly of `∂x (ν ∂x)` in the orthonormal modal basis,
/// `K_jk = -∫ ν φ_j' φ_k'`, using `quad_points` Gauss–Legendre points.
///
/// The boundary term is dropped, which is exact when `ν(±1) = 0`.
pub fn assemble_weak_viscous_operator(
    elem: &ReferenceElement,
    nu: impl Fn(f64) -> f64,
    quad_points: usize,
) -> Result<DMatrix<f64>> {
    let n = elem.n_nodes();
    let (qx, qw) = gauss_legendre(quad_points)?;
    let mut k_mat = DMatrix::zeros(n, n);
    for (&x, &w) in qx.iter().zip(&qw) {
        let d: Vec<f64> = (0..n).map(|k| orthonormal_with_derivative(k, x).1).collect();
        let wn = w * nu(x);
        for j in 0..n {
            for k in 0..n {
                k_mat[(j, k)] -= wn * d[j] * d[k];
            }
        }
    }
    Ok(k_mat)
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(DgError::LengthMismatch { expected, found });
    }
    Ok(())
}
