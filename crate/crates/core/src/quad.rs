//! Adaptive Simpson quadrature with Richardson extrapolation.

use crate::scalar::Scalar;

/// Integral value with the accumulated a-posteriori error estimate.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<F> {
    pub value: F,
    pub error_estimate: F,
}

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Classic recursive scheme: a panel is accepted when the two-half Simpson
/// estimate agrees with the single-panel one within 15·(its share of the
/// tolerance), and the Richardson correction `(s2 - s1)/15` is applied.
/// Deterministic for a deterministic integrand.
pub fn adaptive_simpson<F, G>(mut f: G, a: F, b: F, tol: F) -> QuadResult<F>
where
    F: Scalar,
    G: FnMut(F) -> F,
{
    if a == b {
        return QuadResult {
            value: F::zero(),
            error_estimate: F::zero(),
        };
    }
    let c = midpoint(a, b);
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = simpson(a, b, fa, fc, fb);
    let mut acc = QuadResult {
        value: F::zero(),
        error_estimate: F::zero(),
    };
    recurse(&mut f, a, b, fa, fc, fb, whole, tol, MAX_DEPTH, &mut acc);
    acc
}

fn midpoint<F: Scalar>(a: F, b: F) -> F {
    (a + b) / F::from_f64(2.0).unwrap()
}

fn simpson<F: Scalar>(a: F, b: F, fa: F, fm: F, fb: F) -> F {
    let four = F::from_f64(4.0).unwrap();
    let six = F::from_f64(6.0).unwrap();
    (b - a) * (fa + four * fm + fb) / six
}

#[allow(clippy::too_many_arguments)]
fn recurse<F, G>(
    f: &mut G,
    a: F,
    b: F,
    fa: F,
    fc: F,
    fb: F,
    whole: F,
    tol: F,
    depth: u32,
    acc: &mut QuadResult<F>,
) where
    F: Scalar,
    G: FnMut(F) -> F,
{
    let c = midpoint(a, b);
    let d = midpoint(a, c);
    let e = midpoint(c, b);
    let fd = f(d);
    let fe = f(e);
    let left = simpson(a, c, fa, fd, fc);
    let right = simpson(c, b, fc, fe, fb);
    let s2 = left + right;
    let diff = s2 - whole;
    let fifteen = F::from_f64(15.0).unwrap();
    if depth == 0 || diff.abs() <= fifteen * tol || d <= a || e >= b {
        acc.value = acc.value + s2 + diff / fifteen;
        acc.error_estimate = acc.error_estimate + (diff / fifteen).abs();
        return;
    }
    let half_tol = tol / F::from_f64(2.0).unwrap();
    recurse(f, a, c, fa, fd, fc, left, half_tol, depth - 1, acc);
    recurse(f, c, b, fc, fe, fb, right, half_tol, depth - 1, acc);
}
