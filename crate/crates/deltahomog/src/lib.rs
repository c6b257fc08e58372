//! Tools for certifying or refuting delta-homogeneity of two-parameter
//! invariant Riemannian metrics on compact homogeneous spaces G/H.
//!
//! The crate has two parallel models of the same geometry:
//!
//! * an exact-rational abstract model built from root systems and structure
//!   constants ([`root_systems`]), and
//! * a floating-point matrix model of so(n) with the -1/2 trace inner
//!   product ([`compact_lie`]).
//!
//! On top of both sit reductive splits g = h + p1 + p2 with the metric
//! x1 <.,.>|p1 + x2 <.,.>|p2 ([`homogeneous_metric`]), the algebraic
//! necessary conditions for delta-homogeneity ([`delta_conditions`]), a
//! numerical orbit-ascent oracle ([`orbit_oracle`]), and the full
//! SO(5)/U(2) case study with its spectral certification of the phase
//! boundary x1 <= x2 <= 2*x1 ([`so5`]).

pub mod cli;
pub mod compact_lie;
pub mod delta_conditions;
pub mod eig;
pub mod embedding;
pub mod homogeneous_metric;
pub mod orbit_oracle;
pub mod root_systems;
pub mod so5;
