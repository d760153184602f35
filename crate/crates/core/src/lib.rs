//! Numerical geometry of twistor spaces over Riemannian 4-manifolds.
//!
//! The crate builds the twistor space of a chart metric on an open set of
//! `R^4`, evaluates its metric form `ω = G(J·,·)` together with `dω`, the
//! `(2,1)`-part `d'ω` and the hessian `i d'd''ω`, both from closed formulas
//! and from independent finite-difference exterior calculus, and checks the
//! plurisubharmonicity of the cycle-space volume in the flat model.
//!
//! Modules:
//! - [`algebra`]: `so(4)`, bivectors, the `Λ+ ⊕ Λ-` splitting, compatible complex structures.
//! - [`riemann`]: metric registry, frames, Christoffel symbols, connection form, curvature blocks.
//! - [`twistor`]: points, tangents, `J`, `G`, `ω`, vector fields, FD brackets and exterior derivatives.
//! - [`cycles`]: the flat model as `O(1) ⊕ O(1)`, section volumes and their Levi form.
//! - [`cli`]: suite configuration, deterministic sampling, suite runners and reports.

// Index loops mirror the tensor formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod cli;
pub mod cycles;
pub mod error;
pub mod riemann;
pub mod twistor;

pub use error::{Error, Result};

pub use nalgebra::Complex;

/// Complex scalar used throughout for complexified tangent vectors.
pub type C64 = nalgebra::Complex<f64>;
