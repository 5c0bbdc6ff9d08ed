//! One-dimensional discontinuous Galerkin (DG) solver for hyperbolic
//! conservation laws with a swappable artificial-viscosity layer.
//!
//! The crate is organised bottom-up:
//!
//! - [`basis`]: Legendre polynomials, Gauss–Lobatto–Legendre nodes and the
//!   reference-element operator matrices.
//! - [`equations`]: linear advection and compressible Euler, entropy pairs,
//!   interface fluxes.
//! - [`viscosity`]: viscosity distributions ν(x), Klöckner C⁰ smoothing and
//!   the per-element viscosity field ε(x) = ε·ν(x).
//! - [`sensor`]: modal smoothness sensor producing per-element strengths.
//! - [`semidisc`]: strong-form DG right-hand side plus the local-DG viscous
//!   operator.
//! - [`timeint`]: SSPRK steppers, step-size control and the modal filter.
//! - [`diagnostics`]: conservation/entropy tracking, exact and reference
//!   solutions, error norms.
//! - [`config`], [`solver`], [`output`], [`compare`]: the scenario runner used
//!   by the `dglab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod compare;
pub mod config;
pub mod diagnostics;
pub mod equations;
mod error;
pub mod field;
pub mod mesh;
pub mod output;
pub mod scenario;
pub mod semidisc;
pub mod sensor;
pub mod solver;
pub mod timeint;
pub mod viscosity;

pub use basis::ReferenceElement;
pub use equations::{ConservationLaw, EulerState, FluxKind};
pub use error::{DgError, Result};
pub use field::{Field, View};
pub use mesh::{Boundary, Mesh};
pub use sensor::{SensorConfig, SensorMode, SensorOutput};
pub use viscosity::{ViscosityDistribution, ViscosityField, ViscosityKind};
