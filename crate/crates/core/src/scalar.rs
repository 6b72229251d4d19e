//! Scalar abstractions: a floating-point trait for the numerical solvers and
//! an exact trait for the rational interval machinery.

use num_traits::{Float, FromPrimitive, Num, Signed};
use std::fmt::Debug;

/// Euler–Mascheroni constant γ (OEIS A001620), more digits than f64 resolves.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// e^γ (OEIS A073004). The sieve boundary conditions are normalized by 2e^γ;
/// every use of e^γ in this crate goes through this one constant.
pub const EXP_EULER_GAMMA: f64 = 1.781_072_417_990_198;

/// Floating-point scalar for the solvers and quadrature: f32 or f64.
pub trait Scalar: Float + FromPrimitive + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Send + Sync + 'static {}

/// Exact ordered-field scalar for interval sets and combinatorics
/// (`BigRational`, `Rational64`, ...). No operation on these may round.
pub trait ExactScalar: Clone + Ord + Num + Signed + Debug {}

impl<T> ExactScalar for T where T: Clone + Ord + Num + Signed + Debug {}

/// γ in the requested float width.
pub fn euler_gamma<F: Scalar>() -> F {
    F::from_f64(EULER_GAMMA).unwrap()
}

/// e^γ in the requested float width.
pub fn exp_euler_gamma<F: Scalar>() -> F {
    F::from_f64(EXP_EULER_GAMMA).unwrap()
}
