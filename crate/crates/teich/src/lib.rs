//! Computational models for flat surfaces with quadratic differentials.
//!
//! The crate bundles five pieces that fit together:
//!
//! * [`flatsurf`] — polygons with edge identifications encoding a compact
//!   Riemann surface together with a holomorphic quadratic differential in
//!   flat form (genus, cone points, the area norm ‖ω‖).
//! * [`deform`] — the stretch deformation `z′ = (z + k·z̄)/(1−k)` of such a
//!   surface, the singular charts `η` at cone points, deformation paths and
//!   the genus-1 modulus oracle.
//! * [`beltrami`] — grid calculus of Beltrami coefficients `ν = w_z̄ / w_z`:
//!   sup-norm, dilatation, and the inverse/composition/chain-rule laws.
//! * [`solve`] — a spectral solver for the Beltrami equation
//!   `u_z̄ = ν·u_z` on flat tori with parameter families.
//! * [`kslab`] — a finite-dimensional harmonic-projector / Green-operator
//!   laboratory for parameter families of PSD operators.
//!
//! Exact rational arithmetic (see [`rat`]) backs the surface geometry, so
//! linear deformations of rational surfaces round-trip exactly.

pub mod beltrami;
pub mod deform;
pub mod flatsurf;
pub mod grid;
pub mod kslab;
pub mod rat;
pub mod solve;

pub use flatsurf::{ConePoint, EdgeVec, FlatSurface, FlatSurfError, Gluing, Polygon, Sign};
pub use grid::{CMap, GridDomain, MapGrid};
