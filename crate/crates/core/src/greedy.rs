//! The greedy difference-avoiding walk over an exact interval set, and the
//! exact verification of the measure bound its certificates imply.
//!
//! Starting from r₀ = 0, level j picks the infimum of
//! `S_j = { s > r_{j-1} : no difference of (r₀..r_{j-1}, s) lies in the set }`,
//! which equals the complement of `∪_{i<j} (B + r_i)` beyond `r_{j-1}`.
//! Reaching level k-1 produces a WITNESS: k points whose difference set
//! misses B entirely. If instead some S_j is empty within the window, the
//! translates cover `[r_{j-1}, window)` and the walk stops with a
//! CERTIFICATE at λ = j-1 completed levels; the covering then forces
//! `μ(B ∩ [0,T)) >= T/(λ+1) - (λ+1)ε` for every T up to the window, which
//! [`measure_bound_verify`] re-checks from scratch in exact arithmetic.
//!
//! With half-open sets the infimum of a nonempty S_j is attained whenever
//! `0 ∈ B`, so the slack ε can default to zero. A set avoiding 0 fails the
//! k-hit hypothesis outright (equal points give the difference 0), which the
//! walk reports as an immediate degenerate WITNESS.

use crate::intervals::{IntervalSet, IntervalError};
use crate::scalar::ExactScalar;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GreedyError {
    #[error("k must be >= 2, got {0}")]
    KTooSmall(usize),
    #[error("epsilon must be nonnegative")]
    NegativeEpsilon,
    #[error("window must be positive")]
    BadWindow,
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("T must satisfy 0 < T <= window")]
    BadT,
    #[error("trace does not certify anything at this T: {0}")]
    TraceMismatch(&'static str),
}

/// Outcome of the walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<T> {
    /// k points whose pairwise differences all avoid the set; the k-hit
    /// hypothesis fails on this window.
    Witness { betas: Vec<T> },
    /// Some level's admissible continuations are empty within the window and
    /// the covering ends exactly at the window edge: the walk terminated
    /// after `lambda + 1` levels (r₀..r_λ).
    Certificate { lambda: usize },
    /// The level was empty within the window but the covering runs past it,
    /// so the unbounded walk would continue somewhere out of view.
    WindowExhausted { completed_levels: usize },
}

/// Recorded walk: `r[j]` the chosen points, `s[j]` the level infima
/// (`s[0]` corresponds to level 1; with ε = 0 these coincide with `r[1..]`).
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyTrace<T> {
    pub r: Vec<T>,
    pub s: Vec<T>,
    pub epsilon: T,
    pub window: T,
    pub verdict: Verdict<T>,
}

/// Run the walk for arity `k` within `[0, window)`.
pub fn greedy_witness<T: ExactScalar>(
    set: &IntervalSet<T>,
    k: usize,
    epsilon: T,
    window: T,
) -> Result<GreedyTrace<T>, GreedyError> {
    if k < 2 {
        return Err(GreedyError::KTooSmall(k));
    }
    if epsilon.is_negative() {
        return Err(GreedyError::NegativeEpsilon);
    }
    if !(window > T::zero()) {
        return Err(GreedyError::BadWindow);
    }

    let zero = T::zero();
    if !set.contains(&zero) {
        // Degenerate: repeating a point k times gives the difference 0 ∉ B.
        return Ok(GreedyTrace {
            r: vec![zero.clone()],
            s: Vec::new(),
            epsilon,
            window,
            verdict: Verdict::Witness {
                betas: vec![zero; k],
            },
        });
    }

    let mut r = vec![zero.clone()];
    let mut s = Vec::new();
    let mut covered = set.clone(); // ∪_{i <= j-1} (B + r_i)
    for level in 1..k {
        let prev = r[level - 1].clone();
        let admissible = covered.complement_within(prev.clone(), window.clone());
        let admissible = match admissible {
            Ok(a) => a,
            Err(_) => IntervalSet::empty(), // prev == window edge
        };
        match admissible.intervals().first() {
            Some((lo, _)) => {
                // 0 ∈ B ⟹ the covering owns a right-neighborhood of prev,
                // so lo > prev and the infimum is attained.
                debug_assert!(lo > &prev);
                s.push(lo.clone());
                r.push(lo.clone());
                covered = covered.union(&set.translate(lo));
            }
            None => {
                // Empty within the window: find where the covering run
                // through prev actually ends.
                let cover_end = covered
                    .intervals()
                    .iter()
                    .find(|(lo, hi)| lo <= &prev && &prev < hi)
                    .map(|(_, hi)| hi.clone())
                    .expect("0 ∈ B keeps prev covered");
                let verdict = if cover_end > window {
                    Verdict::WindowExhausted {
                        completed_levels: level - 1,
                    }
                } else {
                    Verdict::Certificate { lambda: level - 1 }
                };
                return Ok(GreedyTrace {
                    r,
                    s,
                    epsilon,
                    window,
                    verdict,
                });
            }
        }
    }
    Ok(GreedyTrace {
        r: r.clone(),
        s,
        epsilon,
        window,
        verdict: Verdict::Witness { betas: r },
    })
}

/// Re-verify, in exact arithmetic, everything a terminated trace claims at a
/// given `T`:
///
/// 1. the recorded points genuinely avoid the set pairwise,
/// 2. each completed level's segment `[r_j, s_{j+1})` is covered by
///    `∪_{i<=j} (B + r_i)`, and the terminal segment `[r_λ, T)` likewise,
/// 3. the implied bound `μ(B ∩ [0,T)) >= T/(λ+1) - (λ+1)ε` holds, with
///    λ determined by `T ∈ (r_λ, r_{λ+1}]`.
pub fn measure_bound_verify<T: ExactScalar>(
    set: &IntervalSet<T>,
    trace: &GreedyTrace<T>,
    t: &T,
) -> Result<bool, GreedyError> {
    if !(t > &T::zero()) || t > &trace.window {
        return Err(GreedyError::BadT);
    }
    let terminated = match &trace.verdict {
        Verdict::Certificate { .. } | Verdict::WindowExhausted { .. } => true,
        Verdict::Witness { .. } => false,
    };
    if trace.r.is_empty() || trace.r[0] != T::zero() {
        return Err(GreedyError::TraceMismatch("trace must start at r₀ = 0"));
    }

    // (1) the difference set of the recorded points misses B
    for j in 0..trace.r.len() {
        for i in 0..j {
            let d = trace.r[j].clone() - trace.r[i].clone();
            if set.contains(&d) {
                return Ok(false);
            }
        }
    }

    // λ from the position of T among the r's
    let lambda = match trace.r.iter().rposition(|rj| rj < t) {
        Some(l) => l,
        None => return Err(GreedyError::BadT), // T <= r₀ = 0
    };
    if lambda == trace.r.len() - 1 && !terminated {
        return Err(GreedyError::TraceMismatch(
            "T beyond the last point of a witness trace",
        ));
    }

    // (2) covering checks, accumulating translates level by level
    let mut covered = set.clone();
    for j in 0..=lambda {
        let seg_end = if j < lambda {
            trace.s[j].clone() // == r[j+1] when ε = 0
        } else {
            t.clone()
        };
        if seg_end > trace.r[j] {
            let segment = IntervalSet::new(vec![(trace.r[j].clone(), seg_end)])?;
            if !segment.is_subset_of(&covered) {
                return Ok(false);
            }
        }
        if j < lambda {
            covered = covered.union(&set.translate(&trace.r[j + 1]));
        }
    }

    // (3) the measure bound itself
    let lam1 = small_int::<T>(lambda + 1);
    let bound = t.clone() / lam1.clone() - lam1 * trace.epsilon.clone();
    Ok(set.measure_below(t) >= bound)
}

fn small_int<T: ExactScalar>(n: usize) -> T {
    let mut v = T::zero();
    for _ in 0..n {
        v = v + T::one();
    }
    v
}
