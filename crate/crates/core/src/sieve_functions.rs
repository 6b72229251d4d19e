//! Numerical solutions of the linear-sieve system and the Buchstab equation.
//!
//! The upper/lower linear sieve functions solve the coupled delay system
//!
//! ```text
//! (s F(s))' = f(s-1),   s F(s) = 2 e^γ   on 1 <= s <= 3,
//! (s f(s))' = F(s-1),   s f(s) = 0       on      s <= 2,
//! ```
//!
//! and the Buchstab function solves `(s ω(s))' = ω(s-1)` with `s ω(s) = 1` on
//! `[1, 2]`. Both are marched in integral form on a uniform grid, reading the
//! delayed integrand from already-solved history:
//!
//! ```text
//! s F(s) = 2 e^γ + ∫_3^s f(t-1) dt,   s f(s) = ∫_2^s F(t-1) dt,
//! s ω(s) = 1     + ∫_2^s ω(t-1) dt.
//! ```
//!
//! The cumulative integral uses the composite trapezoid rule, second order in
//! the step. The true solutions have derivative kinks exactly at the junction
//! points s = 2, 3, 4, ...; the grid step divides 1 so every kink lands on a
//! node and no panel straddles one.

use crate::scalar::{exp_euler_gamma, Scalar};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("step {0} too large to resolve the delay terms (must be <= 1e-2)")]
    StepTooLarge(f64),
    #[error("step {0} is not positive")]
    StepNotPositive(f64),
    #[error("s_max {got} below minimum {min} for this solver")]
    SMaxTooSmall { got: f64, min: f64 },
    #[error("evaluation point {s} outside solved range [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },
}

/// Which delay-differential solution a grid holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SieveFunctionKind {
    /// Upper linear sieve function F.
    LinearUpper,
    /// Lower linear sieve function f.
    LinearLower,
    /// Buchstab ω.
    Buchstab,
}

/// A marched solution on a uniform grid with interpolating evaluation.
#[derive(Clone, Debug)]
pub struct PiecewiseSolution<F> {
    pub kind: SieveFunctionKind,
    s_min: F,
    s_max: F,
    /// Grid nodes per unit of s; the step is exactly 1/steps_per_unit so the
    /// unit delay is an integral number of nodes.
    steps_per_unit: u32,
    values: Vec<F>,
}

impl<F: Scalar> PiecewiseSolution<F> {
    pub fn s_min(&self) -> F {
        self.s_min
    }

    pub fn s_max(&self) -> F {
        self.s_max
    }

    pub fn step(&self) -> F {
        F::one() / F::from_u32(self.steps_per_unit).unwrap()
    }

    pub fn steps_per_unit(&self) -> u32 {
        self.steps_per_unit
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn s_at(&self, index: usize) -> F {
        self.s_min + F::from_usize(index).unwrap() * self.step()
    }

    /// (s, value) pairs at grid resolution.
    pub fn samples(&self) -> impl Iterator<Item = (F, F)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.s_at(i), v))
    }

    /// Interpolating evaluation: cubic through the 4 nearest nodes, falling
    /// back to quadratic at the range edges. Exact at grid nodes. Never
    /// extrapolates.
    pub fn eval(&self, s: F) -> Result<F, SolveError> {
        let m = F::from_u32(self.steps_per_unit).unwrap();
        let t = (s - self.s_min) * m;
        let n = self.values.len() - 1;
        let slack = F::from_f64(1e-9).unwrap();
        if t < -slack || t > F::from_usize(n).unwrap() + slack {
            return Err(SolveError::OutOfRange {
                s: s.to_f64().unwrap(),
                lo: self.s_min.to_f64().unwrap(),
                hi: self.s_max.to_f64().unwrap(),
            });
        }
        let t = t.max(F::zero()).min(F::from_usize(n).unwrap());
        // Snap to the node when s is a grid point up to float dust, so the
        // interpolation identity holds exactly there.
        let tr = t.round();
        if (t - tr).abs() <= slack {
            return Ok(self.values[tr.to_usize().unwrap()]);
        }
        let i = t.floor().to_usize().unwrap().min(n - 1);
        let frac = t - F::from_usize(i).unwrap();
        // Stencil start: prefer [i-1, i+2]; clamp to a 3-point stencil at edges.
        if i == 0 || i + 2 > n {
            let j = if i == 0 { 0 } else { n - 2 };
            let x = t - F::from_usize(j).unwrap();
            Ok(quadratic(&self.values[j..j + 3], x))
        } else {
            let j = i - 1;
            let x = frac + F::one();
            Ok(cubic(&self.values[j..j + 4], x))
        }
    }

    /// Runtime check of the qualitative shape each solution must have. Both
    /// linear-sieve functions approach 1 faster than the marching error
    /// decays, so the one-sided bounds carry a small numerical allowance.
    pub fn validate_shape(&self) -> bool {
        let eps = F::from_f64(1e-9).unwrap();
        let tail = F::from_f64(1e-7).unwrap();
        match self.kind {
            SieveFunctionKind::LinearUpper => self
                .values
                .windows(2)
                .all(|w| w[1] >= F::one() - tail && w[1] <= w[0] + eps),
            SieveFunctionKind::LinearLower => self
                .values
                .windows(2)
                .all(|w| w[0] >= -eps && w[0] <= F::one() + tail && w[1] >= w[0] - eps),
            SieveFunctionKind::Buchstab => self
                .values
                .iter()
                .all(|&v| v >= F::from_f64(0.4).unwrap() && v <= F::one() + eps),
        }
    }
}

fn quadratic<F: Scalar>(y: &[F], x: F) -> F {
    // Lagrange through nodes 0,1,2 at local coordinate x
    let one = F::one();
    let two = F::from_f64(2.0).unwrap();
    y[0] * (x - one) * (x - two) / two - y[1] * x * (x - two) + y[2] * x * (x - one) / two
}

fn cubic<F: Scalar>(y: &[F], x: F) -> F {
    // Lagrange through nodes 0,1,2,3 at local coordinate x
    let one = F::one();
    let two = F::from_f64(2.0).unwrap();
    let three = F::from_f64(3.0).unwrap();
    let six = F::from_f64(6.0).unwrap();
    -y[0] * (x - one) * (x - two) * (x - three) / six
        + y[1] * x * (x - two) * (x - three) / two
        - y[2] * x * (x - one) * (x - three) / two
        + y[3] * x * (x - one) * (x - two) / six
}

fn grid_params<F: Scalar>(s_max: F, step: F, s_min_req: f64) -> Result<(u32, usize), SolveError> {
    let step_f = step.to_f64().unwrap();
    if step_f <= 0.0 {
        return Err(SolveError::StepNotPositive(step_f));
    }
    if step_f > 1e-2 {
        return Err(SolveError::StepTooLarge(step_f));
    }
    let smax_f = s_max.to_f64().unwrap();
    if smax_f < s_min_req {
        return Err(SolveError::SMaxTooSmall {
            got: smax_f,
            min: s_min_req,
        });
    }
    let m = (1.0 / step_f).round() as u32;
    let n = ((smax_f - 1.0) * m as f64).ceil() as usize;
    Ok((m, n))
}

/// Solve the linear-sieve pair on `[1, s_max]` (upper) and `[2, s_max]`
/// (lower). The step is snapped to 1/round(1/step).
pub fn solve_linear_sieve<F: Scalar>(
    s_max: F,
    step: F,
) -> Result<(PiecewiseSolution<F>, PiecewiseSolution<F>), SolveError> {
    let (m, n) = grid_params(s_max, step, 4.0)?;
    let mu = m as usize;
    let two_eg = F::from_f64(2.0).unwrap() * exp_euler_gamma::<F>();
    let h = F::one() / F::from_u32(m).unwrap();
    let half_h = h / F::from_f64(2.0).unwrap();

    // Index j on the master grid corresponds to s = 1 + j/m. The lower
    // function is stored from s = 2, i.e. master index j - m.
    let mut upper = vec![F::zero(); n + 1];
    let mut lower = vec![F::zero(); n + 1 - mu];
    let mut cum_upper = F::zero(); // ∫_2^s F(t-1) dt feeding the lower march
    let mut cum_lower = F::zero(); // ∫_3^s f(t-1) dt feeding the upper march

    for j in 0..=n {
        let s = F::one() + F::from_usize(j).unwrap() * h;
        if j <= 2 * mu {
            upper[j] = two_eg / s; // base interval: s F(s) = 2 e^γ on [1, 3]
        } else {
            cum_lower = cum_lower + half_h * (lower[j - 2 * mu - 1] + lower[j - 2 * mu]);
            upper[j] = (two_eg + cum_lower) / s;
        }
        if j > mu {
            // delayed integrand F(s - 1) lives at master index j - m
            cum_upper = cum_upper + half_h * (upper[j - mu - 1] + upper[j - mu]);
            lower[j - mu] = cum_upper / s;
        }
    }

    let s_max_actual = F::one() + F::from_usize(n).unwrap() * h;
    Ok((
        PiecewiseSolution {
            kind: SieveFunctionKind::LinearUpper,
            s_min: F::one(),
            s_max: s_max_actual,
            steps_per_unit: m,
            values: upper,
        },
        PiecewiseSolution {
            kind: SieveFunctionKind::LinearLower,
            s_min: F::from_f64(2.0).unwrap(),
            s_max: s_max_actual,
            steps_per_unit: m,
            values: lower,
        },
    ))
}

/// Solve the Buchstab equation on `[1, s_max]`: exact 1/s on [1, 2], marched
/// by `s ω(s) = 1 + ∫_2^s ω(t-1) dt` beyond.
pub fn solve_buchstab<F: Scalar>(s_max: F, step: F) -> Result<PiecewiseSolution<F>, SolveError> {
    let (m, n) = grid_params(s_max, step, 3.0)?;
    let mu = m as usize;
    let h = F::one() / F::from_u32(m).unwrap();
    let half_h = h / F::from_f64(2.0).unwrap();

    let mut omega = vec![F::zero(); n + 1];
    let mut cum = F::zero();
    for j in 0..=n {
        let s = F::one() + F::from_usize(j).unwrap() * h;
        if j <= mu {
            omega[j] = F::one() / s;
        } else {
            cum = cum + half_h * (omega[j - mu - 1] + omega[j - mu]);
            omega[j] = (F::one() + cum) / s;
        }
    }
    Ok(PiecewiseSolution {
        kind: SieveFunctionKind::Buchstab,
        s_min: F::one(),
        s_max: F::one() + F::from_usize(n).unwrap() * h,
        steps_per_unit: m,
        values: omega,
    })
}

/// Closed form of the lower linear sieve function on `2 <= s <= 4`:
/// `f(s) = 2 e^γ ln(s-1) / s`.
pub fn closed_form_flin_lower<F: Scalar>(s: F) -> Result<F, SolveError> {
    let lo = F::from_f64(2.0).unwrap();
    let hi = F::from_f64(4.0).unwrap();
    let slack = F::from_f64(1e-12).unwrap();
    if s < lo - slack || s > hi + slack {
        return Err(SolveError::OutOfRange {
            s: s.to_f64().unwrap(),
            lo: 2.0,
            hi: 4.0,
        });
    }
    let two_eg = F::from_f64(2.0).unwrap() * exp_euler_gamma::<F>();
    Ok(two_eg * (s - F::one()).ln() / s)
}

/// Base-interval closed form of the upper function on `1 <= s <= 3`:
/// `F(s) = 2 e^γ / s`.
pub fn closed_form_flin_upper_base<F: Scalar>(s: F) -> Result<F, SolveError> {
    let lo = F::one();
    let hi = F::from_f64(3.0).unwrap();
    if s < lo || s > hi {
        return Err(SolveError::OutOfRange {
            s: s.to_f64().unwrap(),
            lo: 1.0,
            hi: 3.0,
        });
    }
    Ok(F::from_f64(2.0).unwrap() * exp_euler_gamma::<F>() / s)
}

/// Default grid for the constants pipeline: the sweep needs arguments up to
/// 1/(2α) and 1/α - 3, both within 12 for the feasible region.
pub const DEFAULT_S_MAX: f64 = 12.0;
pub const DEFAULT_STEP: f64 = 1e-4;
