//! Inner-neighborhood volume functions of convex polytopes.
//!
//! Given a bounded, full-dimensional polytope `P` in H-representation, this
//! crate computes the volume `V_P(r)` of the inner r-neighborhood (the shell
//! of points within distance `r` of the boundary, measured inside `P`) as an
//! exact piecewise polynomial of degree `d`, together with:
//!
//! * the erosion volume `W_P(r) = vol(P) - V_P(r)`,
//! * the inradius `g` where both functions stabilize,
//! * closed-form coefficients for dimension-wise equiangular polytopes,
//! * the inscribed-ball test characterizing two-phase output of maximal
//!   smoothness,
//! * absolute-rank lower bounds on the differentiability class, and the roof
//!   construction that trades dimensions for smoothness,
//! * independent Monte-Carlo and grid erosion oracles to verify everything.
//!
//! The computational core is a recursion on dimension over gliding
//! hyperplane arrangements: each facet's supporting hyperplane translates
//! inward at unit speed, the volume derivative is assembled from the traced
//! (d-1)-dimensional arrangements on each moving facet, and anchored
//! antidifferentiation recovers the volume function.
//!
//! ```
//! use innervol::{Tolerances, shapes, engine};
//!
//! let tol = Tolerances::default();
//! let cube = shapes::make_rectangle(&[1.0, 1.0, 1.0], &tol)?;
//! let f = engine::inner_volume_function(&cube, 0.1, &tol)?;
//!
//! assert!((f.g - 1.0).abs() < 1e-9);           // inradius
//! assert!((f.volume - 8.0).abs() < 1e-9);      // vol([-1,1]^3)
//! // V(r) = 24r - 24r^2 + 8r^3 up to the inradius, then constant 8:
//! assert!((f.v.evaluate(0.5)? - 7.0).abs() < 1e-9);
//! assert!((f.v.evaluate(3.0)? - 8.0).abs() < 1e-9);
//! # Ok::<(), innervol::Error>(())
//! ```

pub mod config;
pub mod engine;
pub mod equiangular;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod piecewise;
pub mod polytope;
pub mod shapes;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use piecewise::{PiecewisePoly, Polynomial, Smoothness};
pub use polytope::{
    absolute_rank, enumerate_vertices, inradius, normalize_halfspace, polytope_from_json,
    polytope_to_json, polytope_volume, signed_distance, surface_area, AbsoluteRank, HalfspaceSense,
    Hyperplane, Polytope, VertexSet,
};
