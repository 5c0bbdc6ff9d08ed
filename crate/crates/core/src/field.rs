//! Per-element solution coefficients.

use crate::basis::{gauss_legendre, orthonormal_with_derivative, ReferenceElement};
use crate::mesh::Mesh;
use crate::{DgError, Result};

/// Whether coefficients are nodal values at the GLL nodes or orthonormal
/// Legendre coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Nodal,
    Modal,
}

/// Solution on a mesh: elements × variables × (p + 1) coefficients, stored
/// contiguously in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    n_elements: usize,
    n_vars: usize,
    n_nodes: usize,
    view: View,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(n_elements: usize, n_vars: usize, n_nodes: usize, view: View) -> Self {
        Self {
            n_elements,
            n_vars,
            n_nodes,
            view,
            data: vec![0.0; n_elements * n_vars * n_nodes],
        }
    }

    pub fn from_data(n_elements: usize, n_vars: usize, n_nodes: usize, view: View, data: Vec<f64>) -> Result<Self> {
        let expected = n_elements * n_vars * n_nodes;
        if data.len() != expected {
            return Err(DgError::LengthMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self {
            n_elements,
            n_vars,
            n_nodes,
            view,
            data,
        })
    }

    /// Same shape and view, new data.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::from_data(self.n_elements, self.n_vars, self.n_nodes, self.view, data)
    }

    /// Nodal interpolation of `f(x)` at the GLL nodes.
    pub fn interpolate(mesh: &Mesh, elem: &ReferenceElement, n_vars: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let n = elem.n_nodes();
        let mut field = Self::zeros(mesh.n_elements, n_vars, n, View::Nodal);
        for e in 0..mesh.n_elements {
            for (j, &xi) in elem.nodes.iter().enumerate() {
                let u = f(mesh.to_physical(e, xi));
                for v in 0..n_vars {
                    field.data[(e * n_vars + v) * n + j] = u[v];
                }
            }
        }
        field
    }

    /// L² projection of `f(x)` onto the element polynomials, returned in the
    /// nodal view. Uses a high-order Gauss rule, so discontinuities located on
    /// element interfaces are projected exactly.
    pub fn project(mesh: &Mesh, elem: &ReferenceElement, n_vars: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let n = elem.n_nodes();
        let (qx, qw) = gauss_legendre(4 * n + 8)?;
        let phi: Vec<Vec<f64>> = qx
            .iter()
            .map(|&x| (0..n).map(|k| orthonormal_with_derivative(k, x).0).collect())
            .collect();
        let mut field = Self::zeros(mesh.n_elements, n_vars, n, View::Modal);
        for e in 0..mesh.n_elements {
            for (q, (&x, &w)) in qx.iter().zip(&qw).enumerate() {
                let u = f(mesh.to_physical(e, x));
                for v in 0..n_vars {
                    let base = (e * n_vars + v) * n;
                    for k in 0..n {
                        field.data[base + k] += w * u[v] * phi[q][k];
                    }
                }
            }
        }
        Ok(field.to_view(View::Nodal, elem))
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    fn offset(&self, e: usize, v: usize) -> usize {
        (e * self.n_vars + v) * self.n_nodes
    }

    /// Coefficients of variable `v` in element `e`.
    pub fn coeffs(&self, e: usize, v: usize) -> &[f64] {
        let o = self.offset(e, v);
        &self.data[o..o + self.n_nodes]
    }

    pub fn coeffs_mut(&mut self, e: usize, v: usize) -> &mut [f64] {
        let o = self.offset(e, v);
        &mut self.data[o..o + self.n_nodes]
    }

    /// All variables at coefficient slot `j` of element `e`.
    pub fn state_at(&self, e: usize, j: usize, out: &mut [f64]) {
        for v in 0..self.n_vars {
            out[v] = self.data[self.offset(e, v) + j];
        }
    }

    /// Convert to the requested view through the Vandermonde map.
    pub fn to_view(&self, view: View, elem: &ReferenceElement) -> Field {
        if view == self.view {
            return self.clone();
        }
        let map = match view {
            View::Nodal => &elem.vandermonde,
            View::Modal => &elem.inv_vandermonde,
        };
        let n = self.n_nodes;
        let mut out = Field::zeros(self.n_elements, self.n_vars, n, view);
        for (src, dst) in self.data.chunks_exact(n).zip(out.data.chunks_exact_mut(n)) {
            for i in 0..n {
                dst[i] = (0..n).map(|k| map[(i, k)] * src[k]).sum();
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
