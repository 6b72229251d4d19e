//! A numerical and combinatorial toolkit around prime-gap statistics and
//! sieve-theoretic constants:
//!
//! - [`primes`]: segmented prime generation, normalized gap histograms
//!   against the exponential reference, Mertens-product diagnostics.
//! - [`sieve_functions`]: the linear-sieve delay-differential pair (F, f)
//!   and the Buchstab function ω, marched in integral form with closed
//!   forms on the base intervals.
//! - [`constants`]: the Ω₁, Ω₂, Ω₃ sifting constants and the certificate
//!   that Ω₁ - Ω₂ + Ω₃ < 3.99 at exponents (1/7, 3/14), plus a grid sweep.
//! - [`chen`]: exact verification of the pointwise weighted-sieve
//!   inequality and the μ′/count-vector/𝔖/pigeonhole algebra.
//! - [`intervals`] and [`greedy`]: exact rational interval sets, the
//!   difference-avoiding greedy walk, and the measure-bound certificate
//!   checker.
//! - [`tuples`]: admissible tuples, difference smoothness, W/B context,
//!   CRT residue solving, and a desk-scale target-pinning construction.
//!
//! Numerical code is generic over the float width via [`scalar::Scalar`];
//! exact code is generic over the rational type via [`scalar::ExactScalar`].
//! The aliases below fix the concrete choices used by the CLI and tests.

pub mod chen;
pub mod constants;
pub mod greedy;
pub mod intervals;
pub mod primes;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod sieve_functions;
pub mod tuples;

pub use scalar::{ExactScalar, Scalar, EULER_GAMMA, EXP_EULER_GAMMA};

/// Default float width for the solvers and quadrature.
pub type Real = f64;
/// Exact rational scalar used by the interval machinery.
pub type Rat = num::BigRational;

pub type RatIntervalSet = intervals::IntervalSet<Rat>;
pub type RatGreedyTrace = greedy::GreedyTrace<Rat>;
pub type Solution = sieve_functions::PiecewiseSolution<Real>;
pub type Constants = constants::SieveConstants<Real>;
