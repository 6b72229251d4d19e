//! Exact verification of the finite combinatorial steps: the pointwise
//! weighted-sieve inequality, the μ′ maximum, the count-vector bound, the 𝔖
//! positivity algebra, and the pigeonhole step.
//!
//! All arithmetic here is exact (integers and rationals); floating point
//! appears only in the convenience evaluator [`frak_s`], which has an exact
//! rational companion using 399/100.

use num::rational::{BigRational, Rational64};
use num::{BigInt, One, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChenError {
    #[error("sifting thresholds must satisfy 2 <= Y < Z, got Y={y}, Z={z}")]
    BadThresholds { y: u64, z: u64 },
    #[error("n must be >= 1")]
    BadN,
    #[error("mu must be positive (the maximum is unbounded otherwise)")]
    MuNotPositive,
    #[error("constraint violated: {0}")]
    Constraint(&'static str),
}

/// Prime factorization by trial division, `(prime, multiplicity)` ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut mult = 0;
            while n % p == 0 {
                n /= p;
                mult += 1;
            }
            out.push((p, mult));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Both sides of the pointwise inequality
///
/// ```text
/// 1_{(n,P(Z))=1} <= 1_{(n,P(Y))=1} - 1/2 Σ_{Y<p<=Z} 1_{p|n} 1_{(n,P(Y))=1}
///                   + 1/2 Σ_{Y<p<q<r<=Z} Σ_{(s,P(q))=1} 1_{n=pqrs}
/// ```
///
/// computed exactly from the full factorization of `n`. The right side is a
/// rational with denominator dividing 2.
#[derive(Clone, Debug, PartialEq)]
pub struct ChenSides {
    pub lhs: u8,
    pub rhs: Rational64,
}

impl ChenSides {
    pub fn holds(&self) -> bool {
        Rational64::from_integer(self.lhs as i64) <= self.rhs
    }
}

pub fn chen_sides(n: u64, y: u64, z: u64) -> Result<ChenSides, ChenError> {
    if y < 2 || y >= z {
        return Err(ChenError::BadThresholds { y, z });
    }
    if n == 0 {
        return Err(ChenError::BadN);
    }
    Ok(chen_sides_factored(&factorize(n), y, z))
}

pub fn chen_sides_factored(factors: &[(u64, u32)], y: u64, z: u64) -> ChenSides {
    let has_small = factors.iter().any(|&(p, _)| p <= y);
    let has_mid_or_small = factors.iter().any(|&(p, _)| p <= z);
    let lhs = u8::from(!has_mid_or_small);
    let k = factors.iter().filter(|&&(p, _)| p > y && p <= z).count() as i64;
    let half = Rational64::new(1, 2);
    let mut rhs = if has_small {
        Rational64::zero()
    } else {
        Rational64::one() - half * Rational64::from_integer(k)
    };
    rhs += half * Rational64::from_integer(s3_count(factors, y, z) as i64);
    ChenSides { lhs, rhs }
}

/// Number of decompositions `n = p q r s` with `Y < p < q < r <= Z` primes
/// and `(s, P(q)) = 1`, enumerated exactly from the factorization.
///
/// `(s, P(q)) = 1` forces every prime of `n` below `q` to be used up by the
/// chosen `p` (and `q` itself to have multiplicity one), so the count is the
/// number of valid `r` choices; the enumeration below checks that condition
/// literally for each ordered triple.
pub fn s3_count(factors: &[(u64, u32)], y: u64, z: u64) -> u64 {
    let mids: Vec<usize> = factors
        .iter()
        .enumerate()
        .filter(|&(_, &(p, _))| p > y && p <= z)
        .map(|(i, _)| i)
        .collect();
    let mut count = 0;
    for (a, &i) in mids.iter().enumerate() {
        for (b, &j) in mids.iter().enumerate().skip(a + 1) {
            for &l in mids.iter().skip(b + 1) {
                let q = factors[j].0;
                // s = n/(p q r): each chosen prime gives up one copy; every
                // prime <= q must then be exhausted.
                let ok = factors.iter().enumerate().all(|(idx, &(prime, mult))| {
                    let used = u32::from(idx == i) + u32::from(idx == j) + u32::from(idx == l);
                    debug_assert!(mult >= used);
                    prime > q || mult == used
                });
                if ok {
                    // sanity: a counted cofactor is 1 or exceeds q (at full
                    // scale it would exceed N^{1/4} outright)
                    let s: u128 = factors
                        .iter()
                        .enumerate()
                        .map(|(idx, &(prime, mult))| {
                            let used = u32::from(idx == i) + u32::from(idx == j) + u32::from(idx == l);
                            (prime as u128).pow(mult - used)
                        })
                        .product();
                    debug_assert!(s == 1 || s > q as u128);
                    count += 1;
                }
            }
        }
    }
    count
}

/// Result of an exhaustive range check of the pointwise inequality.
#[derive(Clone, Debug)]
pub struct ChenRangeReport {
    pub holds: bool,
    /// Smallest violating `n` with its two sides, when one exists.
    pub counterexample: Option<(u64, ChenSides)>,
}

/// Check `lhs <= rhs` for every `1 <= n <= n_max`, factoring through a
/// smallest-prime-factor table; chunks run in parallel and the leftmost
/// violation wins deterministically.
pub fn verify_chen_range(n_max: u64, y: u64, z: u64) -> Result<ChenRangeReport, ChenError> {
    if y < 2 || y >= z {
        return Err(ChenError::BadThresholds { y, z });
    }
    let spf = smallest_prime_factors(n_max as usize);
    let chunk = 1 << 14;
    let n_chunks = (n_max as usize + chunk - 1) / chunk;
    let first = (0..n_chunks)
        .into_par_iter()
        .find_map_first(|c| {
            let lo = (c * chunk + 1) as u64;
            let hi = ((c + 1) * chunk).min(n_max as usize) as u64;
            for n in lo..=hi {
                let sides = chen_sides_factored(&factorize_spf(n, &spf), y, z);
                if !sides.holds() {
                    return Some((n, sides));
                }
            }
            None
        });
    Ok(ChenRangeReport {
        holds: first.is_none(),
        counterexample: first,
    })
}

fn smallest_prime_factors(n_max: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = vec![0; n_max + 1];
    for i in 2..=n_max {
        if spf[i] == 0 {
            let mut m = i;
            while m <= n_max {
                if spf[m] == 0 {
                    spf[m] = i as u32;
                }
                m += i;
            }
        }
    }
    spf
}

fn factorize_spf(mut n: u64, spf: &[u32]) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    while n > 1 {
        let p = spf[n as usize] as u64;
        let mut mult = 0;
        while n % p == 0 {
            n /= p;
            mult += 1;
        }
        out.push((p, mult));
    }
    out
}

/// Abstract factor shape: small factor present, count of distinct mid-range
/// primes (implicitly unit multiplicity), and a part with all primes > Z.
#[derive(Clone, Copy, Debug)]
pub struct FactorProfile {
    pub has_small_factor: bool,
    pub mid_prime_count: u32,
    pub has_large_part: bool,
}

/// The case formulas the proof assigns to an abstract profile.
pub fn chen_sides_abstract(profile: FactorProfile) -> ChenSides {
    if profile.has_small_factor {
        return ChenSides {
            lhs: 0,
            rhs: Rational64::zero(),
        };
    }
    let k = profile.mid_prime_count as i64;
    let lhs = u8::from(k == 0);
    let half = Rational64::new(1, 2);
    let s3 = if k >= 2 { k - 2 } else { 0 };
    ChenSides {
        lhs,
        rhs: Rational64::one() - half * Rational64::from_integer(k)
            + half * Rational64::from_integer(s3),
    }
}

/// Exhaustive abstract check over `k = 0..=k_max` and both small-factor and
/// large-part flags.
pub fn verify_chen_abstract(k_max: u32) -> bool {
    for k in 0..=k_max {
        for small in [false, true] {
            for large in [false, true] {
                let sides = chen_sides_abstract(FactorProfile {
                    has_small_factor: small,
                    mid_prime_count: k,
                    has_large_part: large,
                });
                if !sides.holds() {
                    return false;
                }
            }
        }
    }
    true
}

/// Exact maximum `μ' = max_{v>=1} (v - μ C(v,2))` with every attaining `v`.
/// The objective increases while `v < 1/μ` and decreases after, so the search
/// window `v <= ceil(2/μ) + 2` is provably sufficient.
pub fn mu_prime(mu: Rational64) -> Result<(Rational64, Vec<u64>), ChenError> {
    if mu <= Rational64::zero() {
        return Err(ChenError::MuNotPositive);
    }
    let two = Rational64::from_integer(2);
    let window = (two / mu).ceil().to_integer() as u64 + 2;
    let mut best = Rational64::from_integer(i64::MIN / 2);
    let mut argmax = Vec::new();
    for v in 1..=window {
        let value = Rational64::from_integer(v as i64) - mu * binom2(v);
        if value > best {
            best = value;
            argmax = vec![v];
        } else if value == best {
            argmax.push(v);
        }
    }
    Ok((best, argmax))
}

/// C(v, 2) = v(v-1)/2 as a rational; zero at v = 0, 1 by the convention.
fn binom2(v: u64) -> Rational64 {
    if v < 2 {
        return Rational64::zero();
    }
    Rational64::from_integer((v * (v - 1) / 2) as i64)
}

/// Exhaustively verify `Σ_j (c_j - μ C(c_j,2)) <= μ' a` over all count
/// vectors in `[0, c_max]^M` with at most `a` nonzero entries.
pub fn quant_bound_check(
    m: u32,
    a: u32,
    mu: Rational64,
    c_max: u32,
) -> Result<bool, ChenError> {
    if a == 0 || a >= m {
        return Err(ChenError::Constraint("need 1 <= a < M"));
    }
    let (mu_p, _) = mu_prime(mu)?;
    let bound = mu_p * Rational64::from_integer(a as i64);
    let mut counts = vec![0u32; m as usize];
    Ok(quant_rec(&mut counts, 0, 0, a, mu, c_max, &bound))
}

fn quant_rec(
    counts: &mut [u32],
    idx: usize,
    nonzero: u32,
    a: u32,
    mu: Rational64,
    c_max: u32,
    bound: &Rational64,
) -> bool {
    if idx == counts.len() {
        let sum: Rational64 = counts
            .iter()
            .map(|&c| Rational64::from_integer(c as i64) - mu * binom2(c as u64))
            .sum();
        return sum <= *bound;
    }
    for c in 0..=c_max {
        let nz = nonzero + u32::from(c > 0);
        if nz > a {
            break;
        }
        counts[idx] = c;
        if !quant_rec(counts, idx + 1, nz, a, mu, c_max, bound) {
            return false;
        }
    }
    counts[idx] = 0;
    true
}

/// The bound is attained: `a` entries at an argmax of μ' give equality.
pub fn quant_bound_tight(m: u32, a: u32, mu: Rational64, c_max: u32) -> Result<bool, ChenError> {
    if a == 0 || a >= m {
        return Err(ChenError::Constraint("need 1 <= a < M"));
    }
    let (mu_p, argmax) = mu_prime(mu)?;
    let v = argmax[0];
    if v > c_max as u64 {
        return Ok(false);
    }
    let sum = (Rational64::from_integer(v as i64) - mu * binom2(v))
        * Rational64::from_integer(a as i64);
    Ok(sum == mu_p * Rational64::from_integer(a as i64))
}

/// `M = ceil(3.99 a) + 1`, computed with 399/100 exactly.
pub fn m_for_a(a: u64) -> u64 {
    (399 * a + 99) / 100 + 1
}

/// Float evaluation of
/// `𝔖 = ρδ ln K - μ'a - 3.99 μ M C(K/M, 2) (ρδ ln K / K)^2` with `μ = 1/L`.
pub fn frak_s(a: u64, m: u64, k: u64, delta: f64, rho: f64, l: u64) -> Result<f64, ChenError> {
    if m != m_for_a(a) {
        return Err(ChenError::Constraint("M must equal ceil(3.99 a) + 1"));
    }
    if k == 0 || k % m != 0 {
        return Err(ChenError::Constraint("K must be a positive multiple of M"));
    }
    if !(0.0 < rho && rho < 1.0) {
        return Err(ChenError::Constraint("rho must lie in (0, 1)"));
    }
    if l == 0 {
        return Err(ChenError::Constraint("L must be a positive integer"));
    }
    let mu_p = (1.0 + l as f64) / 2.0;
    let x = rho * delta * (k as f64).ln();
    let km = k / m;
    let binom = (km * (km - 1) / 2) as f64;
    Ok(x - mu_p * a as f64 - 3.99 / l as f64 * m as f64 * binom * (x / k as f64).powi(2))
}

/// Exact evaluation of the final lower-bound display
/// `XM - (1+L)a/2 - (M-1) M X^2 / (2 L a)` at `X = aL/(M-1)`, together with
/// its closed form `a / (2(M-1))`. The two are equal exactly when `L = M`.
pub fn frak_s_display_bound(a: u64, m: u64, l: u64) -> Result<(BigRational, BigRational), ChenError> {
    if m < 2 || l == 0 || a == 0 {
        return Err(ChenError::Constraint("need a >= 1, M >= 2, L >= 1"));
    }
    let big = |v: u64| BigRational::from_integer(BigInt::from(v));
    let (a_r, m_r, l_r) = (big(a), big(m), big(l));
    let one = BigRational::one();
    let two = big(2);
    let x = &a_r * &l_r / (&m_r - &one);
    let value = &x * &m_r
        - (&one + &l_r) * &a_r / &two
        - (&m_r - &one) * &m_r * &x * &x / (&two * &l_r * &a_r);
    let closed = &a_r / (&two * (&m_r - &one));
    Ok((value, closed))
}

/// Exact 𝔖 with 3.99 = 399/100 and the main parameter supplied as the exact
/// `X` defined by `XM = ρδ ln K`.
pub fn frak_s_exact(
    a: u64,
    m: u64,
    k: u64,
    x: &BigRational,
    l: u64,
) -> Result<BigRational, ChenError> {
    if m != m_for_a(a) {
        return Err(ChenError::Constraint("M must equal ceil(3.99 a) + 1"));
    }
    if k == 0 || k % m != 0 {
        return Err(ChenError::Constraint("K must be a positive multiple of M"));
    }
    if l == 0 {
        return Err(ChenError::Constraint("L must be a positive integer"));
    }
    let big = |v: u64| BigRational::from_integer(BigInt::from(v));
    let km = k / m;
    let binom = big(km * (km - 1) / 2);
    let mu_p = (big(1) + big(l)) / big(2);
    let coeff = BigRational::new(BigInt::from(399), BigInt::from(100));
    let xm = x * big(m);
    Ok(&xm - mu_p * big(a) - coeff / big(l) * big(m) * binom * (&xm / big(k)) * (&xm / big(k)))
}

/// Any ≥ a+1 cells hit in a 4×a grid touch at least two distinct rows.
/// Exhaustive over all hit patterns for `4a <= 24`; the row-capacity
/// counting argument settles larger `a` (one row holds only `a` cells).
pub fn pigeonhole_check(a: u32) -> bool {
    assert!(a >= 1);
    let cells = 4 * a;
    if cells > 24 {
        return true;
    }
    for mask in 0u32..(1 << cells) {
        if mask.count_ones() > a {
            let mut rows = 0u8;
            for r in 0..4 {
                let row_mask = ((1u32 << a) - 1) << (r * a);
                if mask & row_mask != 0 {
                    rows |= 1 << r;
                }
            }
            if rows.count_ones() < 2 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    #[test]
    fn sides_prime_beyond_z() {
        // n prime > Z: no factor <= Z at all, both sides 1
        let sides = chen_sides(101, 10, 30).unwrap();
        assert_eq!(sides.lhs, 1);
        assert_eq!(sides.rhs, Rational64::one());
    }

    #[test]
    fn sides_single_mid_prime() {
        // one prime in (Y, Z], none <= Y: rhs = 1 - 1/2 + 0 = 1/2
        let sides = chen_sides(13, 10, 30).unwrap();
        assert_eq!(sides.lhs, 0);
        assert_eq!(sides.rhs, Rational64::new(1, 2));
        // also with a large cofactor: 13 * 101
        let sides = chen_sides(13 * 101, 10, 30).unwrap();
        assert_eq!(sides.rhs, Rational64::new(1, 2));
    }

    #[test]
    fn sides_squarefree_mids_cancel() {
        // k >= 2 with unit multiplicities: rhs = 1 - k/2 + (k-2)/2 = 0
        for n in [11 * 13, 11 * 13 * 17, 11 * 13 * 17 * 19, 11 * 13 * 29 * 101] {
            let sides = chen_sides(n, 10, 30).unwrap();
            assert_eq!(sides.rhs, Rational64::zero(), "n = {n}");
            assert!(sides.holds());
        }
    }

    #[test]
    fn sides_small_factor_short_circuits() {
        let sides = chen_sides(2 * 11 * 13 * 17, 10, 30).unwrap();
        assert_eq!(sides.lhs, 0);
        assert_eq!(sides.rhs, Rational64::zero());
    }

    #[test]
    fn s3_respects_coprimality_of_the_cofactor() {
        // 1113·17·17: (11,13,17) leaves s = 17 > q = 13, one valid triple
        let n = 11 * 13 * 17 * 17;
        assert_eq!(s3_count(&factorize(n), 10, 30), 1);
        // 11²·13·17: s = 11 < q shares a small prime, no valid triple
        let n = 11 * 11 * 13 * 17;
        assert_eq!(s3_count(&factorize(n), 10, 30), 0);
    }

    #[test]
    fn range_check_finds_squareful_violation() {
        // The displayed inequality fails first at 26741 = 11²·13·17, where
        // k = 3 but no (p,q,r,s) decomposition has (s, P(q)) = 1.
        let report = verify_chen_range(100_000, 10, 30).unwrap();
        assert!(!report.holds);
        let (n, sides) = report.counterexample.unwrap();
        assert_eq!(n, 26_741);
        assert_eq!(sides.lhs, 0);
        assert_eq!(sides.rhs, Rational64::new(-1, 2));
    }

    #[test]
    fn range_check_clean_below_first_violation() {
        let report = verify_chen_range(26_740, 10, 30).unwrap();
        assert!(report.holds, "{:?}", report.counterexample);
    }

    #[test]
    fn concrete_matches_abstract_profile_when_preconditions_hold() {
        // cross-oracle agreement on all n <= 10^4 with squarefree mid part
        // (the abstract formulas presume unit multiplicities there; the
        // cofactor condition is automatic because its primes exceed Z)
        let (y, z) = (10u64, 30u64);
        let spf = smallest_prime_factors(10_000);
        let mut checked = 0u32;
        for n in 1..=10_000u64 {
            let factors = factorize_spf(n, &spf);
            let mids: Vec<&(u64, u32)> =
                factors.iter().filter(|&&(p, _)| p > y && p <= z).collect();
            if !mids.iter().all(|&&(_, m)| m == 1) {
                continue;
            }
            let concrete = chen_sides_factored(&factors, y, z);
            let abstract_ = chen_sides_abstract(FactorProfile {
                has_small_factor: factors.iter().any(|&(p, _)| p <= y),
                mid_prime_count: mids.len() as u32,
                has_large_part: factors.iter().any(|&(p, _)| p > z),
            });
            assert_eq!(concrete.lhs, abstract_.lhs, "n = {n}");
            assert_eq!(concrete.rhs, abstract_.rhs, "n = {n}");
            checked += 1;
        }
        assert!(checked > 9_000);
    }

    #[test]
    fn abstract_cases_hold() {
        assert!(verify_chen_abstract(50));
    }

    #[test]
    fn mu_prime_integer_reciprocal() {
        // μ = 1/L gives μ' = (1+L)/2 attained at v = L and v = L+1
        for l in [1i64, 2, 5, 17, 100] {
            let (value, argmax) = mu_prime(Rational64::new(1, l)).unwrap();
            assert_eq!(value, Rational64::new(1 + l, 2));
            assert_eq!(argmax, vec![l as u64, l as u64 + 1]);
        }
    }

    #[test]
    fn mu_prime_brute_force_window() {
        // μ = 2/5: maximum over v <= 7 lands at v = 3 with value 9/5
        let (value, argmax) = mu_prime(Rational64::new(2, 5)).unwrap();
        let brute = (1..=7)
            .map(|v| Rational64::from_integer(v) - Rational64::new(2, 5) * binom2(v as u64))
            .max()
            .unwrap();
        assert_eq!(value, brute);
        assert_eq!(value, Rational64::new(9, 5));
        assert_eq!(argmax, vec![3]);
        assert!(mu_prime(Rational64::zero()).is_err());
    }

    #[test]
    fn mu_prime_monotone_and_at_least_one() {
        let mut prev = None;
        for denom in 1..=20i64 {
            let (v, _) = mu_prime(Rational64::new(1, denom)).unwrap();
            assert!(v >= Rational64::one());
            if let Some(p) = prev {
                assert!(v >= p); // nonincreasing in μ = increasing in denom
            }
            prev = Some(v);
        }
    }

    #[test]
    fn quant_bound_small_cases() {
        assert!(quant_bound_check(5, 2, Rational64::new(1, 5), 8).unwrap());
        assert!(quant_bound_tight(5, 2, Rational64::new(1, 5), 8).unwrap());
        assert!(quant_bound_check(2, 1, Rational64::new(1, 2), 6).unwrap());
        assert!(quant_bound_check(5, 0, Rational64::new(1, 5), 8).is_err());
    }

    #[test]
    fn m_for_a_paper_value() {
        assert_eq!(m_for_a(100), 400); // ceil(3.99·100) + 1 = 4·100
        assert_eq!(m_for_a(1), 5);
        assert_eq!(m_for_a(50), 201);
    }

    #[test]
    fn display_bound_closed_form() {
        let (value, closed) = frak_s_display_bound(100, 400, 400).unwrap();
        assert_eq!(value, closed);
        assert_eq!(
            closed,
            BigRational::new(BigInt::from(100), BigInt::from(798))
        );
        assert!(closed.to_f64().unwrap() > 0.0);
        // L != M: the display evaluates but differs from the closed form
        let (value, closed) = frak_s_display_bound(100, 400, 200).unwrap();
        assert_ne!(value, closed);
    }

    #[test]
    fn frak_s_float_sanity() {
        // XM = ρδ log K: choose K so that the bound is positive
        let (a, m, l) = (100u64, 400u64, 400u64);
        let k = m * 1_000_000;
        // pick rho, delta with ρδ ln K = XM where X = aL/(M-1)
        let x = a as f64 * l as f64 / (m as f64 - 1.0);
        let target = x * m as f64;
        let delta = target / (0.5 * (k as f64).ln());
        let s = frak_s(a, m, k, delta, 0.5, l).unwrap();
        // exact display value is a lower bound up to the binomial slack
        let (value, _) = frak_s_display_bound(a, m, l).unwrap();
        assert!(s >= value.to_f64().unwrap() - 1e-6, "s = {s}");
        assert!(frak_s(a, 399, k, delta, 0.5, l).is_err());
        assert!(frak_s(a, m, k + 1, delta, 0.5, l).is_err());
        assert!(frak_s(a, m, k, delta, 1.5, l).is_err());
    }

    #[test]
    fn frak_s_exact_matches_float() {
        let (a, m, l) = (100u64, 400u64, 400u64);
        let k = m * 100;
        let x = BigRational::new(BigInt::from(a * l), BigInt::from(m - 1));
        let exact = frak_s_exact(a, m, k, &x, l).unwrap();
        let xf = (a * l) as f64 / (m - 1) as f64;
        let target = xf * m as f64;
        let delta = target / (0.5 * (k as f64).ln());
        let float = frak_s(a, m, k, delta, 0.5, l).unwrap();
        assert!((exact.to_f64().unwrap() - float).abs() < 1e-6);
    }

    #[test]
    fn pigeonhole_small_grids() {
        for a in 1..=4 {
            assert!(pigeonhole_check(a), "a = {a}");
        }
        // a hits confined to one row never exceed a cells
        assert!(pigeonhole_check(100)); // counting argument branch
    }
}
