//! Uniform 1D meshes.

use crate::{DgError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Frozen ghost states outside the left and right ends (conserved variables).
    /// The viscous operator uses interior traces at these ends.
    DirichletOutflow {
        left: Vec<f64>,
        right: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub x_left: f64,
    pub x_right: f64,
    pub n_elements: usize,
    pub boundary: Boundary,
}

impl Mesh {
    pub fn new(x_left: f64, x_right: f64, n_elements: usize, boundary: Boundary) -> Result<Self> {
        if n_elements == 0 {
            return Err(DgError::InvalidInput("mesh needs at least one element".into()));
        }
        if !(x_right > x_left) {
            return Err(DgError::InvalidInput(format!("empty domain [{x_left}, {x_right}]")));
        }
        Ok(Self {
            x_left,
            x_right,
            n_elements,
            boundary,
        })
    }

    pub fn periodic(x_left: f64, x_right: f64, n_elements: usize) -> Result<Self> {
        Self::new(x_left, x_right, n_elements, Boundary::Periodic)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.boundary, Boundary::Periodic)
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Element width.
    pub fn h(&self) -> f64 {
        self.length() / self.n_elements as f64
    }

    pub fn element_left(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.h()
    }

    /// Physical coordinate of reference point `xi ∈ [-1, 1]` in element `i`.
    pub fn to_physical(&self, i: usize, xi: f64) -> f64 {
        self.element_left(i) + 0.5 * (xi + 1.0) * self.h()
    }

    /// Element index and reference coordinate of physical point `x`.
    /// Points on an interface belong to the element on their right, except the
    /// right domain end.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.h();
        let s = ((x - self.x_left) / h).floor();
        let i = (s.max(0.0) as usize).min(self.n_elements - 1);
        let xi = 2.0 * (x - self.element_left(i)) / h - 1.0;
        (i, xi.clamp(-1.0, 1.0))
    }
}
