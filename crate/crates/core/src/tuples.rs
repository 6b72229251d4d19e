//! Admissible tuple machinery: residue-class admissibility, difference
//! smoothness, the W/B context, CRT residue solving, and a desk-scale
//! residue-choosing construction that pins prescribed target positions.

use crate::primes::sieve_primes;
use num::rational::Rational64;
use num::{BigUint, One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TuplesError {
    #[error("shifts must be distinct nonnegative integers")]
    BadShifts,
    #[error("difference smoothness needs at least 2 shifts")]
    TooFewShifts,
    #[error("residue {residue} out of range for prime {prime}")]
    ResidueOutOfRange { residue: u64, prime: u64 },
    #[error("residue system is empty")]
    EmptySystem,
    #[error("modulus product overflows u64")]
    ModulusOverflow,
    #[error("eps·ln N must be >= 2 to admit any prime")]
    NoPrimesInRange,
    #[error("construction infeasible: every residue mod {prime} hits a target")]
    Infeasible { prime: u64 },
    #[error("geometry violated: need 2y(1 + (1 + max beta) x) <= 2z")]
    BadGeometry,
    #[error("targets must lie in (0, z]")]
    TargetOutOfRange,
    #[error("tuple size {k} not divisible by {classes} target classes")]
    NotDivisible { k: usize, classes: usize },
    #[error("the chosen residues eliminated every integer in (0, z]")]
    EmptySurvivors,
    #[error("unequal class sizes {sizes:?}")]
    UnequalClasses { sizes: Vec<usize> },
    #[error("no targets given")]
    NoTargets,
}

/// A finite set of distinct nonnegative shifts, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KTuple {
    shifts: Vec<u64>,
}

impl KTuple {
    pub fn new(mut shifts: Vec<u64>) -> Result<Self, TuplesError> {
        if shifts.is_empty() {
            return Err(TuplesError::BadShifts);
        }
        shifts.sort_unstable();
        if shifts.windows(2).any(|w| w[0] == w[1]) {
            return Err(TuplesError::BadShifts);
        }
        Ok(KTuple { shifts })
    }

    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    pub fn k(&self) -> usize {
        self.shifts.len()
    }
}

/// Admissibility verdict with the first covering prime on failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub failing_prime: Option<u64>,
}

/// A tuple is admissible iff it omits a residue class modulo every prime.
/// K shifts can cover at most K classes, so only primes `p <= K` need
/// checking; [`is_admissible_up_to`] exposes the wasteful full scan for
/// cross-checking that size argument.
pub fn is_admissible(tuple: &KTuple) -> AdmissibilityReport {
    is_admissible_up_to(tuple, tuple.k() as u64)
}

pub fn is_admissible_up_to(tuple: &KTuple, p_max: u64) -> AdmissibilityReport {
    for p in sieve_primes(p_max) {
        let mut seen = vec![false; p as usize];
        for &h in tuple.shifts() {
            seen[(h % p) as usize] = true;
        }
        if seen.iter().all(|&s| s) {
            return AdmissibilityReport {
                admissible: false,
                failing_prime: Some(p),
            };
        }
    }
    AdmissibilityReport {
        admissible: true,
        failing_prime: None,
    }
}

/// Largest prime factor of `∏_{i<j} (h_j - h_i)`, with `P⁺(1) = 1`.
pub fn diff_smoothness(tuple: &KTuple) -> Result<u64, TuplesError> {
    if tuple.k() < 2 {
        return Err(TuplesError::TooFewShifts);
    }
    let mut p_plus = 1u64;
    for j in 1..tuple.k() {
        for i in 0..j {
            let d = tuple.shifts[j] - tuple.shifts[i];
            p_plus = p_plus.max(largest_prime_factor(d));
        }
    }
    Ok(p_plus)
}

fn largest_prime_factor(mut n: u64) -> u64 {
    let mut best = 1;
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            best = p;
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        best = n;
    }
    best
}

/// Residues `a_p` indexed by prime modulus, as in a covering-system choice.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResidueSystem {
    residues: BTreeMap<u64, u64>,
}

impl ResidueSystem {
    pub fn new(residues: BTreeMap<u64, u64>) -> Result<Self, TuplesError> {
        if residues.is_empty() {
            return Err(TuplesError::EmptySystem);
        }
        for (&p, &a) in &residues {
            if a >= p {
                return Err(TuplesError::ResidueOutOfRange {
                    residue: a,
                    prime: p,
                });
            }
        }
        Ok(ResidueSystem { residues })
    }

    pub fn residues(&self) -> &BTreeMap<u64, u64> {
        &self.residues
    }
}

/// CRT solution of `b ≡ -a_p (mod p)` across the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrtSolution {
    pub b: u64,
    pub modulus: u64,
}

pub fn crt_b(system: &ResidueSystem) -> Result<CrtSolution, TuplesError> {
    let mut b: u128 = 0;
    let mut modulus: u128 = 1;
    for (&p, &a) in system.residues() {
        let target = ((p - a) % p) as u128; // -a_p mod p
        // advance b within the new modulus lattice
        let p128 = p as u128;
        let step = modulus;
        modulus = modulus.checked_mul(p128).ok_or(TuplesError::ModulusOverflow)?;
        if modulus > u64::MAX as u128 {
            return Err(TuplesError::ModulusOverflow);
        }
        while b % p128 != target {
            b += step;
        }
    }
    Ok(CrtSolution {
        b: b as u64,
        modulus: modulus as u64,
    })
}

/// Does `(∏_j (b + h_j), m) = 1`? Checked elementwise by gcd.
pub fn tuple_coprime_to(b: u64, tuple: &KTuple, m: u64) -> bool {
    tuple.shifts().iter().all(|&h| gcd(b + h, m) == 1)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The smooth modulus `W = ∏_{p <= eps ln N, p != excluded} p` and the
/// normalization `B = (φ(W)/W) ln N`.
#[derive(Clone, Debug)]
pub struct WContext {
    pub scale_n: u64,
    pub eps: Rational64,
    pub excluded_prime: Option<u64>,
    pub w: BigUint,
    pub b: f64,
}

pub fn build_w_context(
    scale_n: u64,
    eps: Rational64,
    excluded_prime: Option<u64>,
) -> Result<WContext, TuplesError> {
    if eps.is_negative() || eps.is_zero() {
        return Err(TuplesError::NoPrimesInRange);
    }
    let ln_n = (scale_n as f64).ln();
    let threshold = eps.to_f64().unwrap() * ln_n;
    if threshold < 2.0 {
        return Err(TuplesError::NoPrimesInRange);
    }
    let mut w = BigUint::one();
    let mut phi_over_w = 1.0f64;
    let mut any = false;
    for p in sieve_primes(threshold.floor() as u64) {
        if Some(p) == excluded_prime {
            continue;
        }
        w *= BigUint::from(p);
        phi_over_w *= 1.0 - 1.0 / p as f64;
        any = true;
    }
    if !any {
        return Err(TuplesError::NoPrimesInRange);
    }
    Ok(WContext {
        scale_n,
        eps,
        excluded_prime,
        w,
        b: phi_over_w * ln_n,
    })
}

/// Outcome of the desk-scale residue-choosing construction.
#[derive(Clone, Debug)]
pub struct ErConstruction {
    pub targets: Vec<u64>,
    /// Ideal (pre-rounding) positions β_i·x·y + y, parallel to `targets`.
    pub ideal_positions: Vec<Rational64>,
    pub residues: ResidueSystem,
    pub survivors: KTuple,
    pub admissibility: AdmissibilityReport,
    pub p_plus_diffs: u64,
    /// Largest distance from a survivor to its nearest ideal position
    /// (absent when no targets were requested).
    pub max_deviation: Option<Rational64>,
    /// Every post-check passed: admissible and differences y-smooth.
    pub success: bool,
}

/// Greedy residue choice for primes `p <= y`: never hit a target position,
/// and among the allowed residues cover the most surviving non-target
/// integers of `(0, z]`, ties to the smallest residue. Deterministic.
///
/// Post-checks (admissibility, `P⁺(diffs) <= y`) are reported, and `success`
/// is set only when they all hold; the greedy itself does not enforce them.
pub fn erdos_rankin_construct(
    x: Rational64,
    y: u64,
    z: u64,
    betas: &[Rational64],
    excluded_prime: Option<u64>,
) -> Result<ErConstruction, TuplesError> {
    // Zero targets is the plain coverage sieve; otherwise the geometry must
    // leave room for the largest target: 2y(1 + (1 + beta_max) x) <= 2z.
    if let Some(beta_max) = betas.iter().max() {
        let y_r = Rational64::from_integer(y as i64);
        let z_r = Rational64::from_integer(z as i64);
        let two = Rational64::from_integer(2);
        if two * y_r * (Rational64::one() + (Rational64::one() + beta_max) * x) > two * z_r {
            return Err(TuplesError::BadGeometry);
        }
    }

    let ideal_positions: Vec<Rational64> = betas
        .iter()
        .map(|b| b * x * Rational64::from_integer(y as i64) + Rational64::from_integer(y as i64))
        .collect();
    let mut targets: Vec<u64> = ideal_positions
        .iter()
        .map(|pos| pos.round().to_integer() as u64)
        .collect();
    targets.sort_unstable();
    targets.dedup();
    if targets.iter().any(|&t| t == 0 || t > z) {
        return Err(TuplesError::TargetOutOfRange);
    }

    let is_target = {
        let mut flags = vec![false; z as usize + 1];
        for &t in &targets {
            flags[t as usize] = true;
        }
        flags
    };
    let mut eliminated = vec![false; z as usize + 1];
    let mut residues = BTreeMap::new();
    for p in sieve_primes(y) {
        if Some(p) == excluded_prime {
            continue;
        }
        let forbidden: Vec<bool> = {
            let mut f = vec![false; p as usize];
            for &t in &targets {
                f[(t % p) as usize] = true;
            }
            f
        };
        let mut best: Option<(u64, u64)> = None; // (covered count, residue)
        for res in 0..p {
            if forbidden[res as usize] {
                continue;
            }
            let mut covered = 0u64;
            let mut m = if res == 0 { p } else { res };
            while m <= z {
                if !eliminated[m as usize] && !is_target[m as usize] {
                    covered += 1;
                }
                m += p;
            }
            if best.map_or(true, |(c, _)| covered > c) {
                best = Some((covered, res));
            }
        }
        let (_, res) = best.ok_or(TuplesError::Infeasible { prime: p })?;
        residues.insert(p, res);
        let mut m = if res == 0 { p } else { res };
        while m <= z {
            eliminated[m as usize] = true;
            m += p;
        }
    }

    // Recompute the survivor set directly from the chosen residues.
    let survivors: Vec<u64> = (1..=z)
        .filter(|&m| {
            residues
                .iter()
                .all(|(&p, &a)| m % p != a)
        })
        .collect();
    debug_assert!(targets.iter().all(|t| survivors.contains(t)));
    if survivors.is_empty() {
        return Err(TuplesError::EmptySurvivors);
    }
    let survivors = KTuple::new(survivors)?;
    let admissibility = is_admissible(&survivors);
    let p_plus_diffs = if survivors.k() >= 2 {
        diff_smoothness(&survivors)?
    } else {
        1
    };
    let max_deviation = if ideal_positions.is_empty() {
        None
    } else {
        survivors
            .shifts()
            .iter()
            .map(|&h| {
                ideal_positions
                    .iter()
                    .map(|pos| (Rational64::from_integer(h as i64) - pos).abs())
                    .min()
                    .unwrap()
            })
            .max()
    };
    let success = admissibility.admissible && p_plus_diffs <= y;
    Ok(ErConstruction {
        targets,
        ideal_positions,
        residues: ResidueSystem::new(residues)?,
        survivors,
        admissibility,
        p_plus_diffs,
        max_deviation,
        success,
    })
}

/// One labeled class of a partition by nearest target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetClass {
    pub target: u64,
    pub members: Vec<u64>,
}

/// Partition the shifts by nearest target `round(β_i x y + y)` (ties to the
/// smaller target); classes must come out equal-sized.
pub fn partition_by_targets(
    tuple: &KTuple,
    betas: &[Rational64],
    x: Rational64,
    y: u64,
) -> Result<Vec<TargetClass>, TuplesError> {
    if betas.is_empty() {
        return Err(TuplesError::NoTargets);
    }
    let mut targets: Vec<u64> = betas
        .iter()
        .map(|b| {
            (b * x * Rational64::from_integer(y as i64) + Rational64::from_integer(y as i64))
                .round()
                .to_integer() as u64
        })
        .collect();
    targets.sort_unstable();
    targets.dedup();
    let m = targets.len();
    if tuple.k() % m != 0 {
        return Err(TuplesError::NotDivisible {
            k: tuple.k(),
            classes: m,
        });
    }
    let mut classes: Vec<TargetClass> = targets
        .iter()
        .map(|&t| TargetClass {
            target: t,
            members: Vec::new(),
        })
        .collect();
    for &h in tuple.shifts() {
        let idx = targets
            .iter()
            .enumerate()
            .min_by_key(|(_, &t)| (h.abs_diff(t), t))
            .map(|(i, _)| i)
            .unwrap();
        classes[idx].members.push(h);
    }
    let want = tuple.k() / m;
    if classes.iter().any(|c| c.members.len() != want) {
        return Err(TuplesError::UnequalClasses {
            sizes: classes.iter().map(|c| c.members.len()).collect(),
        });
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(shifts: &[u64]) -> KTuple {
        KTuple::new(shifts.to_vec()).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn admissibility_examples() {
        // {0,2,6}: mod 2 residues {0}, mod 3 residues {0,2} — class 1 free
        let rep = is_admissible(&tuple(&[0, 2, 6]));
        assert!(rep.admissible);
        // {0,2,4}: mod 3 covers {0,2,1}
        let rep = is_admissible(&tuple(&[0, 2, 4]));
        assert!(!rep.admissible);
        assert_eq!(rep.failing_prime, Some(3));
        // single element is always admissible
        assert!(is_admissible(&tuple(&[0])).admissible);
    }

    #[test]
    fn admissibility_matches_full_scan() {
        // primes above K can never be covered by K shifts
        for shifts in [
            vec![0, 2, 6, 8, 12],
            vec![0, 4, 6, 10, 12, 16],
            vec![0, 1, 2, 3, 4, 5, 6],
        ] {
            let t = tuple(&shifts);
            assert_eq!(
                is_admissible(&t).admissible,
                is_admissible_up_to(&t, 100).admissible
            );
        }
    }

    #[test]
    fn smoothness_examples() {
        assert_eq!(diff_smoothness(&tuple(&[0, 2, 6])).unwrap(), 3); // diffs 2,4,6
        assert_eq!(diff_smoothness(&tuple(&[0, 1])).unwrap(), 1); // P⁺(1) = 1
        assert_eq!(diff_smoothness(&tuple(&[0, 8])).unwrap(), 2);
        assert!(diff_smoothness(&tuple(&[5])).is_err());
    }

    #[test]
    fn w_context_examples() {
        // eps·ln N = 10 picks up 2·3·5·7 = 210
        let n = (10f64).exp().ceil() as u64; // ln N ≈ 10.000046
        let ctx = build_w_context(n, rat(1, 1), None).unwrap();
        assert_eq!(ctx.w, BigUint::from(210u32));
        let expect_b = (48.0 / 210.0) * (n as f64).ln();
        assert!((ctx.b - expect_b).abs() < 1e-12);
        // excluding 5 drops it from the product
        let ctx = build_w_context(n, rat(1, 1), Some(5)).unwrap();
        assert_eq!(ctx.w, BigUint::from(42u32));
        assert!(build_w_context(3, rat(1, 2), None).is_err());
    }

    #[test]
    fn crt_examples() {
        // b ≡ -1 (mod 2), b ≡ -1 (mod 3) → b ≡ 5 (mod 6)
        let sys = ResidueSystem::new([(2, 1), (3, 1)].into()).unwrap();
        let sol = crt_b(&sys).unwrap();
        assert_eq!(sol, CrtSolution { b: 5, modulus: 6 });
        // single prime, a_p = 0 → b ≡ 0
        let sys = ResidueSystem::new([(7, 0)].into()).unwrap();
        assert_eq!(crt_b(&sys).unwrap().b, 0);
        assert!(ResidueSystem::new([(5, 5)].into()).is_err());
    }

    #[test]
    fn crt_brute_scan_small() {
        let sys = ResidueSystem::new([(2, 1), (3, 2), (5, 0), (7, 4)].into()).unwrap();
        let sol = crt_b(&sys).unwrap();
        assert_eq!(sol.modulus, 210);
        let brute: Vec<u64> = (0..210)
            .filter(|&b| sys.residues().iter().all(|(&p, &a)| (b + a) % p == 0))
            .collect();
        assert_eq!(brute, vec![sol.b]);
    }

    #[test]
    fn er_two_targets_survive() {
        // x = 1, y = 7, z = 40, betas (1, 3) → targets 14 and 28
        let out = erdos_rankin_construct(rat(1, 1), 7, 40, &[rat(1, 1), rat(3, 1)], None).unwrap();
        assert_eq!(out.targets, vec![14, 28]);
        for t in &out.targets {
            assert!(out.survivors.shifts().contains(t));
        }
        assert!(out.admissibility.admissible);
    }

    #[test]
    fn er_single_target_beats_exhaustive() {
        // y = 5, z = 20, one target at 10; all 2·3·5 = 30 residue systems
        // exist, so cross-check that the greedy's target indeed survives
        let out = erdos_rankin_construct(rat(1, 1), 5, 20, &[rat(1, 1)], None).unwrap();
        assert_eq!(out.targets, vec![10]);
        assert!(out.survivors.shifts().contains(&10));
        let mut found_any = false;
        for a2 in 0..2u64 {
            for a3 in 0..3u64 {
                for a5 in 0..5u64 {
                    let ok = 10 % 2 != a2 && 10 % 3 != a3 && 10 % 5 != a5;
                    found_any |= ok;
                }
            }
        }
        assert!(found_any);
    }

    #[test]
    fn er_zero_targets_is_plain_coverage_sieve() {
        let out = erdos_rankin_construct(rat(1, 1), 7, 40, &[], None).unwrap();
        assert!(out.targets.is_empty());
        assert_eq!(out.max_deviation, None);
        let direct: Vec<u64> = (1..=40)
            .filter(|&m| out.residues.residues().iter().all(|(&p, &a)| m % p != a))
            .collect();
        assert_eq!(out.survivors.shifts(), direct.as_slice());
    }

    #[test]
    fn er_geometry_rejected() {
        // 2y(1+(1+beta)x) = 14·(1+4·1) = 70 > 2z = 60
        assert!(matches!(
            erdos_rankin_construct(rat(1, 1), 7, 30, &[rat(1, 1), rat(3, 1)], None),
            Err(TuplesError::BadGeometry)
        ));
    }

    #[test]
    fn er_survivors_match_direct_simulation() {
        let out = erdos_rankin_construct(rat(1, 1), 7, 40, &[rat(1, 1), rat(3, 1)], None).unwrap();
        let direct: Vec<u64> = (1..=40)
            .filter(|&m| out.residues.residues().iter().all(|(&p, &a)| m % p != a))
            .collect();
        assert_eq!(out.survivors.shifts(), direct.as_slice());
    }

    #[test]
    fn partition_examples() {
        // 8 shifts clustered at 4 targets of the form β·x·y + y
        let x = rat(2, 1);
        let y = 10u64;
        let betas = [rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)];
        // targets: 30, 50, 70, 90
        let t = tuple(&[29, 31, 49, 51, 69, 71, 89, 91]);
        let classes = partition_by_targets(&t, &betas, x, y).unwrap();
        assert_eq!(classes.len(), 4);
        assert!(classes.iter().all(|c| c.members.len() == 2));
        assert_eq!(classes[0].members, vec![29, 31]);
        // misclustered input: unequal classes
        let t = tuple(&[29, 31, 33, 51, 69, 71, 89, 91]);
        assert!(matches!(
            partition_by_targets(&t, &betas, x, y),
            Err(TuplesError::UnequalClasses { .. })
        ));
        // wrong divisibility
        let t = tuple(&[29, 31, 49]);
        assert!(matches!(
            partition_by_targets(&t, &betas, x, y),
            Err(TuplesError::NotDivisible { .. })
        ));
    }

    #[test]
    fn partition_agrees_with_brute_force() {
        let x = rat(2, 1);
        let y = 10u64;
        let betas = [rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)];
        let targets = [30u64, 50, 70, 90];
        let shifts = [28, 32, 48, 52, 68, 72, 88, 92];
        let classes = partition_by_targets(&tuple(&shifts), &betas, x, y).unwrap();
        for class in &classes {
            for &h in &class.members {
                let nearest = targets
                    .iter()
                    .min_by_key(|&&t| (h.abs_diff(t), t))
                    .unwrap();
                assert_eq!(*nearest, class.target);
            }
        }
    }
}
