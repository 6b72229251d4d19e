//! The sifting-constant pipeline: Ω₁, Ω₂, Ω₃ and the certificate that
//! Ω₁ - Ω₂ + Ω₃ stays below 3.99 at the chosen exponents.
//!
//! With sifting exponents 0 < α < β < 1/4,
//!
//! ```text
//! Ω₁ = F(1/(2α)) / (α e^γ)
//! Ω₂ = 1/(2α e^γ) ∫_α^β f((1/2 - t)/α) dt/t
//! Ω₃ = 2 ∫∫∫_{α<u₁<u₂<u₃<β} ω((1-u₁-u₂-u₃)/u₂) du₁du₂du₃ / (u₁u₂²u₃)
//! ```
//!
//! where F, f are the linear-sieve functions and ω is Buchstab's function.
//! The triple integral is computed as iterated 1-D adaptive Simpson so the ω
//! interpolant is the only shared approximation between integration levels.

use crate::quad::{adaptive_simpson, QuadResult};
use crate::scalar::{exp_euler_gamma, Scalar};
use crate::sieve_functions::{
    closed_form_flin_lower, solve_buchstab, solve_linear_sieve, PiecewiseSolution, SolveError,
};
use rayon::prelude::*;
use thiserror::Error;

/// The certificate threshold for the pair-sum constant.
pub const CERTIFIED_BELOW: f64 = 3.99;

#[derive(Debug, Error, PartialEq)]
pub enum ConstantsError {
    #[error("sifting exponents must satisfy 0 < alpha < beta < 1/4, got alpha={alpha}, beta={beta}")]
    BadExponents { alpha: f64, beta: f64 },
    #[error("closed-form lower-function path needs (1/2 - beta)/alpha >= 2, got {0}")]
    ClosedFormInfeasible(f64),
    #[error("closed-form upper path needs 1/(2 alpha) <= 5, got {0}")]
    ClosedPathRange(f64),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error("no feasible grid point in the sweep")]
    EmptyGrid,
}

/// The (α, β) sifting exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChenParameters<F> {
    pub alpha: F,
    pub beta: F,
}

impl<F: Scalar> ChenParameters<F> {
    pub fn new(alpha: F, beta: F) -> Result<Self, ConstantsError> {
        let quarter = F::from_f64(0.25).unwrap();
        if !(alpha > F::zero() && alpha < beta && beta < quarter) {
            return Err(ConstantsError::BadExponents {
                alpha: alpha.to_f64().unwrap_or(f64::NAN),
                beta: beta.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(ChenParameters { alpha, beta })
    }

    /// `(1/2 - beta)/alpha >= 2`, keeping the lower-function argument where
    /// its closed form is valid (and the function nonzero).
    pub fn closed_form_feasible(&self) -> bool {
        let half = F::from_f64(0.5).unwrap();
        (half - self.beta) / self.alpha >= F::from_f64(2.0).unwrap() - F::from_f64(1e-12).unwrap()
    }
}

/// The three constants and their combination for one parameter choice.
#[derive(Clone, Copy, Debug)]
pub struct SieveConstants<F> {
    pub params: ChenParameters<F>,
    pub omega1: F,
    pub omega2: F,
    pub omega3: F,
    /// omega1 - omega2 + omega3.
    pub total: F,
    pub quad_tol: F,
    pub omega3_error_estimate: F,
}

impl<F: Scalar> SieveConstants<F> {
    pub fn certified(&self) -> bool {
        self.total < F::from_f64(CERTIFIED_BELOW).unwrap()
    }
}

/// The solved delay-differential inputs shared by the pipeline.
pub struct SolverProducts<F> {
    pub upper: PiecewiseSolution<F>,
    pub lower: PiecewiseSolution<F>,
    pub buchstab: PiecewiseSolution<F>,
}

impl<F: Scalar> SolverProducts<F> {
    pub fn solve(s_max: F, step: F) -> Result<Self, SolveError> {
        let (upper, lower) = solve_linear_sieve(s_max, step)?;
        let buchstab = solve_buchstab(s_max, step)?;
        Ok(SolverProducts {
            upper,
            lower,
            buchstab,
        })
    }
}

impl SolverProducts<f64> {
    /// Default grid: s up to 12 at step 1e-4.
    pub fn solve_default() -> Result<Self, SolveError> {
        Self::solve(
            crate::sieve_functions::DEFAULT_S_MAX,
            crate::sieve_functions::DEFAULT_STEP,
        )
    }
}

/// Which representation of the lower function Ω₂ integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerPath {
    /// Closed form on [2, 4], marched solution elsewhere.
    Hybrid,
    ClosedOnly,
    MarchedOnly,
}

/// `Ω₁ = F(1/(2α)) / (α e^γ)`.
pub fn omega1<F: Scalar>(
    params: &ChenParameters<F>,
    upper: &PiecewiseSolution<F>,
) -> Result<F, ConstantsError> {
    let s_star = F::from_f64(0.5).unwrap() / params.alpha;
    let value = upper.eval(s_star)?;
    Ok(value / (params.alpha * exp_euler_gamma::<F>()))
}

/// Independent closed route for Ω₁, valid while `1/(2α) <= 5`:
/// `4 + 4 ∫_3^{1/(2α)} ln(s-2)/(s-1) ds` (with the empty integral for
/// `1/(2α) <= 3`, where Ω₁ is exactly 4).
pub fn omega1_closed_path<F: Scalar>(
    params: &ChenParameters<F>,
    tol: F,
) -> Result<F, ConstantsError> {
    let s_star = F::from_f64(0.5).unwrap() / params.alpha;
    let three = F::from_f64(3.0).unwrap();
    let four = F::from_f64(4.0).unwrap();
    let five = F::from_f64(5.0).unwrap();
    if s_star <= three {
        return Ok(four);
    }
    if s_star > five {
        return Err(ConstantsError::ClosedPathRange(s_star.to_f64().unwrap()));
    }
    let integral = adaptive_simpson(
        |s: F| (s - F::from_f64(2.0).unwrap()).ln() / (s - F::one()),
        three,
        s_star,
        tol / F::from_f64(8.0).unwrap(),
    );
    Ok(four + four * integral.value)
}

/// `Ω₂ = 1/(2α e^γ) ∫_α^β f((1/2 - t)/α) dt/t`.
pub fn omega2<F: Scalar>(
    params: &ChenParameters<F>,
    lower: &PiecewiseSolution<F>,
    tol: F,
    path: LowerPath,
) -> Result<F, ConstantsError> {
    let half = F::from_f64(0.5).unwrap();
    let two = F::from_f64(2.0).unwrap();
    let four = F::from_f64(4.0).unwrap();
    let alpha = params.alpha;
    // Fail fast if the marched range cannot cover the largest argument.
    let max_arg = (half - alpha) / alpha;
    if path != LowerPath::ClosedOnly && max_arg > lower.s_max() {
        return Err(ConstantsError::Solver(SolveError::OutOfRange {
            s: max_arg.to_f64().unwrap(),
            lo: lower.s_min().to_f64().unwrap(),
            hi: lower.s_max().to_f64().unwrap(),
        }));
    }
    if path == LowerPath::ClosedOnly && max_arg > four + F::from_f64(1e-12).unwrap() {
        return Err(ConstantsError::ClosedFormInfeasible(
            max_arg.to_f64().unwrap(),
        ));
    }
    let mut fail: Option<SolveError> = None;
    let integral = adaptive_simpson(
        |t: F| {
            assert!(t > F::zero(), "integrand pole guard: t must stay positive");
            let arg = (half - t) / alpha;
            if arg < two {
                return F::zero(); // lower function vanishes below 2
            }
            let fval = match path {
                LowerPath::ClosedOnly => closed_form_flin_lower(arg),
                LowerPath::MarchedOnly => lower.eval(arg),
                LowerPath::Hybrid => {
                    if arg <= four {
                        closed_form_flin_lower(arg)
                    } else {
                        lower.eval(arg)
                    }
                }
            };
            match fval {
                Ok(v) => v / t,
                Err(e) => {
                    fail.get_or_insert(e);
                    F::zero()
                }
            }
        },
        alpha,
        params.beta,
        tol * alpha * exp_euler_gamma::<F>(),
    );
    if let Some(e) = fail {
        return Err(ConstantsError::Solver(e));
    }
    Ok(integral.value / (two * alpha * exp_euler_gamma::<F>()))
}

/// `Ω₃` over the ordered slab `α < u₁ < u₂ < u₃ < β`, iterated outer-to-inner
/// with each level run at `tol/3`. Returns the value together with an error
/// estimate combining the adaptive estimates and the inner-level budgets.
pub fn omega3<F: Scalar>(
    params: &ChenParameters<F>,
    buchstab: &PiecewiseSolution<F>,
    tol: F,
) -> Result<QuadResult<F>, ConstantsError> {
    let alpha = params.alpha;
    let beta = params.beta;
    let one = F::one();
    let two = F::from_f64(2.0).unwrap();
    let three = F::from_f64(3.0).unwrap();
    // Largest ω argument is (1 - 3α)/α; verify the solved range covers it.
    let max_arg = (one - three * alpha) / alpha;
    if max_arg > buchstab.s_max() {
        return Err(ConstantsError::Solver(SolveError::OutOfRange {
            s: max_arg.to_f64().unwrap(),
            lo: buchstab.s_min().to_f64().unwrap(),
            hi: buchstab.s_max().to_f64().unwrap(),
        }));
    }
    let level_tol = tol / three;
    let mut fail: Option<SolveError> = None;
    let outer = adaptive_simpson(
        |u3: F| {
            let mid = adaptive_simpson(
                |u2: F| {
                    let inner = adaptive_simpson(
                        |u1: F| {
                            assert!(
                                u1 > F::zero() && u2 > F::zero() && u3 > F::zero(),
                                "integrand pole guard: ordered slab must stay positive"
                            );
                            let arg = (one - u1 - u2 - u3) / u2;
                            match buchstab.eval(arg) {
                                Ok(w) => w / (u1 * u2 * u2 * u3),
                                Err(e) => {
                                    fail.get_or_insert(e);
                                    F::zero()
                                }
                            }
                        },
                        alpha,
                        u2,
                        level_tol,
                    );
                    inner.value
                },
                alpha,
                u3,
                level_tol,
            );
            mid.value
        },
        alpha,
        beta,
        level_tol,
    );
    if let Some(e) = fail {
        return Err(ConstantsError::Solver(e));
    }
    let span = beta - alpha;
    let budget = level_tol * span * (one + span / two);
    Ok(QuadResult {
        value: two * outer.value,
        error_estimate: two * (outer.error_estimate + budget),
    })
}

/// Compute all three constants and the combined total. Ω₁ and Ω₂ run at
/// `quad_tol`; the triple integral runs at `max(quad_tol, 1e-5)` (its cost
/// dominates and the certificate has orders of magnitude more slack), so the
/// defaults are 1e-6 and 1e-5. Call [`omega3`] directly for a sharper Ω₃.
pub fn total_bound<F: Scalar>(
    params: &ChenParameters<F>,
    products: &SolverProducts<F>,
    quad_tol: F,
) -> Result<SieveConstants<F>, ConstantsError> {
    let omega3_floor = F::from_f64(1e-5).unwrap();
    let o1 = omega1(params, &products.upper)?;
    let o2 = omega2(params, &products.lower, quad_tol, LowerPath::Hybrid)?;
    let o3 = omega3(params, &products.buchstab, quad_tol.max(omega3_floor))?;
    Ok(SieveConstants {
        params: *params,
        omega1: o1,
        omega2: o2,
        omega3: o3.value,
        total: o1 - o2 + o3.value,
        quad_tol,
        omega3_error_estimate: o3.error_estimate,
    })
}

/// Feasibility for sweeping: parameter invariants, the closed-form condition
/// on the Ω₂ argument, and both solver ranges.
pub fn sweep_feasible<F: Scalar>(alpha: F, beta: F, products: &SolverProducts<F>) -> bool {
    let params = match ChenParameters::new(alpha, beta) {
        Ok(p) => p,
        Err(_) => return false,
    };
    if !params.closed_form_feasible() {
        return false;
    }
    let half = F::from_f64(0.5).unwrap();
    let three = F::from_f64(3.0).unwrap();
    let f_star = half / alpha;
    let w_star = (F::one() - three * alpha) / alpha;
    f_star <= products.upper.s_max() && w_star <= products.buchstab.s_max()
}

/// Grid sweep over (α, β); returns the full table and the point minimizing
/// the total, ties broken toward larger α. Grid points are evaluated in
/// parallel and reduced in a fixed order.
pub fn sweep_optimizer<F: Scalar>(
    alphas: &[F],
    betas: &[F],
    products: &SolverProducts<F>,
    quad_tol: F,
) -> Result<(SieveConstants<F>, Vec<SieveConstants<F>>), ConstantsError> {
    let grid: Vec<(F, F)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| sweep_feasible(a, b, products))
        .collect();
    if grid.is_empty() {
        return Err(ConstantsError::EmptyGrid);
    }
    let table: Vec<SieveConstants<F>> = grid
        .par_iter()
        .map(|&(a, b)| {
            let params = ChenParameters::new(a, b).expect("filtered for feasibility");
            total_bound(&params, products, quad_tol)
        })
        .collect::<Result<_, _>>()?;
    let mut best = table[0];
    for cand in table.iter().skip(1) {
        let better = cand.total < best.total
            || (cand.total == best.total && cand.params.alpha > best.params.alpha);
        if better {
            best = *cand;
        }
    }
    Ok((best, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::EXP_EULER_GAMMA;

    fn products() -> SolverProducts<f64> {
        SolverProducts::solve(12.0, 1e-3).unwrap()
    }

    fn paper_params() -> ChenParameters<f64> {
        ChenParameters::new(1.0 / 7.0, 3.0 / 14.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(ChenParameters::new(0.2, 0.1).is_err());
        assert!(ChenParameters::new(0.0, 0.2).is_err());
        assert!(ChenParameters::new(0.1, 0.25).is_err());
        assert!(paper_params().closed_form_feasible());
        // (1/2 - beta)/alpha = 1.5 < 2 here
        assert!(!ChenParameters::new(0.2, 0.2 + 1e-6)
            .unwrap()
            .closed_form_feasible());
    }

    #[test]
    fn omega1_base_interval_is_exactly_four() {
        // at alpha = 1/6 the argument is 3, still on the base interval:
        // 6 F(3)/e^γ = 6 (2e^γ/3)/e^γ = 4
        let p = products();
        let params = ChenParameters::new(1.0 / 6.0, 0.24).unwrap();
        let o1 = omega1(&params, &p.upper).unwrap();
        assert!((o1 - 4.0).abs() < 1e-12, "omega1 = {o1}");
        assert_eq!(omega1_closed_path(&params, 1e-9).unwrap(), 4.0);
    }

    #[test]
    fn omega1_paper_window() {
        let p = products();
        let o1 = omega1(&paper_params(), &p.upper).unwrap();
        assert!(o1 > 4.0 && o1 <= 4.19, "omega1 = {o1}");
    }

    #[test]
    fn omega2_vanishes_on_empty_range() {
        let p = products();
        let alpha = 1.0 / 7.0;
        let params = ChenParameters::new(alpha, alpha + 1e-9).unwrap();
        let o2 = omega2(&params, &p.lower, 1e-8, LowerPath::Hybrid).unwrap();
        assert!(o2.abs() < 1e-6, "omega2 = {o2}");
    }

    #[test]
    fn omega2_monotone_in_beta() {
        let p = products();
        let lo = total_bound(
            &ChenParameters::new(1.0 / 7.0, 0.20).unwrap(),
            &p,
            1e-6,
        )
        .unwrap();
        let hi = total_bound(
            &ChenParameters::new(1.0 / 7.0, 3.0 / 14.0).unwrap(),
            &p,
            1e-6,
        )
        .unwrap();
        assert!(hi.omega2 >= lo.omega2);
        assert!(hi.omega3 >= lo.omega3);
    }

    #[test]
    fn omega3_degenerate_simplex() {
        let p = products();
        let params = ChenParameters::new(1.0 / 7.0, 1.0 / 7.0 + 1e-9).unwrap();
        let o3 = omega3(&params, &p.buchstab, 1e-6).unwrap();
        assert!(o3.value.abs() < 1e-9);
    }

    #[test]
    fn total_is_arithmetic_identity() {
        let p = products();
        let c = total_bound(&paper_params(), &p, 1e-5).unwrap();
        assert_eq!(c.total, c.omega1 - c.omega2 + c.omega3);
        assert!(c.omega1 >= 4.0);
        assert!(c.omega2 > 0.0 && c.omega3 > 0.0);
    }

    #[test]
    fn total_bitstable_across_reruns() {
        let p = products();
        let a = total_bound(&paper_params(), &p, 1e-5).unwrap();
        let b = total_bound(&paper_params(), &p, 1e-5).unwrap();
        assert_eq!(a.total.to_bits(), b.total.to_bits());
    }

    #[test]
    fn sweep_single_point() {
        let p = products();
        let (best, table) = sweep_optimizer(&[1.0 / 7.0], &[3.0 / 14.0], &p, 1e-4).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(best.params.alpha, 1.0 / 7.0);
    }

    #[test]
    fn sweep_contains_paper_point() {
        let p = products();
        let alphas = [1.0 / 8.0, 1.0 / 7.0];
        let betas = [0.20, 3.0 / 14.0];
        let (best, table) = sweep_optimizer(&alphas, &betas, &p, 1e-4).unwrap();
        let paper = total_bound(&paper_params(), &p, 1e-4).unwrap();
        assert!(best.total <= paper.total + 1e-12);
        assert!(!table.is_empty());
    }

    #[test]
    fn sweep_empty_grid_errors() {
        let p = products();
        assert!(matches!(
            sweep_optimizer(&[0.3], &[0.35], &p, 1e-4),
            Err(ConstantsError::EmptyGrid)
        ));
    }

    #[test]
    fn sweep_default_20x20_grid_certifies() {
        // the CLI's default grid: alpha in [1/15, 1/6], beta in [1/8, 1/4]
        let p = SolverProducts::solve(12.0, 1e-3).unwrap();
        let grid = |lo: f64, hi: f64| -> Vec<f64> {
            (0..20).map(|i| lo + i as f64 * (hi - lo) / 19.0).collect()
        };
        let (best, table) =
            sweep_optimizer(&grid(1.0 / 15.0, 1.0 / 6.0), &grid(0.125, 0.25), &p, 1e-4).unwrap();
        assert!(!table.is_empty());
        assert!(best.total < CERTIFIED_BELOW, "best total {}", best.total);
    }

    #[test]
    fn closed_path_matches_direct_quadrature_shape() {
        // sanity on the closed route at alpha slightly above 1/7
        let params = ChenParameters::new(0.15, 0.22).unwrap();
        let v = omega1_closed_path(&params, 1e-9).unwrap();
        assert!(v > 4.0 && v < 4.19);
        let _ = EXP_EULER_GAMMA;
    }
}
