//! Segmented prime generation and normalized prime-gap statistics.
//!
//! Gaps between consecutive primes are normalized by `ln p` of the left prime
//! and binned against the exponential reference density `e^{-u}`. Working
//! memory of the sieve is proportional to the segment size, not to the limit.

use crate::scalar::EULER_GAMMA;
use rayon::prelude::*;
use thiserror::Error;

/// Default segment span: 2^20 integers, cache-friendly up to 1e9+ limits.
pub const DEFAULT_SEGMENT_LEN: u64 = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum PrimesError {
    #[error("poisson reference requires 0 <= a <= b, got a={a}, b={b}")]
    BadPoissonRange { a: f64, b: f64 },
    #[error("histogram edges must be ascending and nonnegative")]
    BadEdges,
    #[error("need at least 2 primes <= limit, got limit={0}")]
    TooFewPrimes(u64),
    #[error("gap stream requires limit >= 3, got {0}")]
    LimitTooSmall(u64),
    #[error("W must be a squarefree product of consecutive primes starting at 2, got {0}")]
    BadMertensModulus(u64),
    #[error("Y must exceed the largest prime factor of W (Y={y}, max p|W is {pmax})")]
    MertensRange { y: f64, pmax: u64 },
}

/// One sieved block: composite flags over `[base, base + span)`.
/// A set bit means the integer is divisible by some prime <= sqrt(base + span).
#[derive(Clone, Debug)]
pub struct SieveSegment {
    pub base: u64,
    span: u64,
    words: Vec<u64>,
}

impl SieveSegment {
    fn new(base: u64, span: u64) -> Self {
        let words = vec![0u64; ((span + 63) / 64) as usize];
        SieveSegment { base, span, words }
    }

    pub fn span(&self) -> u64 {
        self.span
    }

    #[inline]
    fn mark(&mut self, offset: u64) {
        self.words[(offset / 64) as usize] |= 1 << (offset % 64);
    }

    #[inline]
    pub fn is_composite(&self, n: u64) -> bool {
        debug_assert!(n >= self.base && n < self.base + self.span);
        let off = n - self.base;
        self.words[(off / 64) as usize] >> (off % 64) & 1 == 1
    }

    /// Unset integers in the segment, ascending. Callers must have marked
    /// 0 and 1 (handled by `sieve_segment` for the first block).
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (self.base..self.base + self.span).filter(move |&n| !self.is_composite(n))
    }
}

/// Plain sieve of Eratosthenes; used for base primes up to sqrt(limit).
fn small_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Sieve one segment against the supplied base primes.
fn sieve_segment(base: u64, span: u64, base_primes: &[u64]) -> SieveSegment {
    let mut seg = SieveSegment::new(base, span);
    let hi = base + span;
    for n in base..hi.min(2) {
        seg.mark(n - base); // 0 and 1 are not prime
    }
    for &p in base_primes {
        if p * p >= hi {
            break;
        }
        let mut m = (base + p - 1) / p * p;
        if m < p * p {
            m = p * p;
        }
        while m < hi {
            seg.mark(m - base);
            m += p;
        }
    }
    seg
}

/// All primes `<= limit`, ascending. Segments are sieved in parallel and
/// stitched in order, so the output is independent of thread count.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    sieve_primes_segmented(limit, DEFAULT_SEGMENT_LEN)
}

/// As [`sieve_primes`] with an explicit segment span (testing knob; the
/// output is invariant under this choice).
pub fn sieve_primes_segmented(limit: u64, segment_len: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let segment_len = segment_len.max(64);
    let root = (limit as f64).sqrt() as u64 + 1;
    let base_primes = small_sieve(root);
    let n_segments = (limit / segment_len + 1) as usize;
    let mut segments: Vec<Vec<u64>> = Vec::with_capacity(n_segments);
    (0..n_segments)
        .into_par_iter()
        .map(|i| {
            let base = i as u64 * segment_len;
            let span = segment_len.min(limit + 1 - base);
            sieve_segment(base, span, &base_primes).primes().collect()
        })
        .collect_into_vec(&mut segments);
    segments.concat()
}

/// A consecutive prime pair with its gap normalized by `ln p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapRecord {
    pub p: u64,
    pub p_next: u64,
    pub gap: u64,
    /// gap / ln p, natural log of the left prime.
    pub normalized: f64,
}

/// Gap records for all consecutive prime pairs with `p_next <= limit`.
pub fn gap_stream(limit: u64) -> Result<Vec<GapRecord>, PrimesError> {
    gap_stream_segmented(limit, DEFAULT_SEGMENT_LEN)
}

pub fn gap_stream_segmented(limit: u64, segment_len: u64) -> Result<Vec<GapRecord>, PrimesError> {
    if limit < 3 {
        return Err(PrimesError::LimitTooSmall(limit));
    }
    let primes = sieve_primes_segmented(limit, segment_len);
    Ok(primes
        .windows(2)
        .map(|w| {
            let gap = w[1] - w[0];
            GapRecord {
                p: w[0],
                p_next: w[1],
                gap,
                normalized: gap as f64 / (w[0] as f64).ln(),
            }
        })
        .collect())
}

/// `∫_a^b e^{-u} du = e^{-a} - e^{-b}`; `b` may be infinite.
pub fn poisson_reference(a: f64, b: f64) -> Result<f64, PrimesError> {
    if !(0.0..).contains(&a) || b < a || a.is_nan() || b.is_nan() {
        return Err(PrimesError::BadPoissonRange { a, b });
    }
    Ok((-a).exp() - if b.is_infinite() { 0.0 } else { (-b).exp() })
}

/// Histogram of normalized gaps over half-open bins `[e_i, e_{i+1})` plus an
/// overflow bin collecting values `>= last edge`. Values below the first edge
/// are counted in `total` only.
#[derive(Clone, Debug)]
pub struct GapHistogram {
    pub bin_edges: Vec<f64>,
    /// One count per finite bin, then the overflow bin: `counts.len() == bin_edges.len()`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl GapHistogram {
    pub fn fractions(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

/// Bin the normalized gaps for primes up to `limit`; also returns the
/// exponential reference mass `∫ e^{-u} du` over each bin (overflow included).
pub fn normalized_histogram(
    limit: u64,
    edges: &[f64],
) -> Result<(GapHistogram, Vec<f64>), PrimesError> {
    normalized_histogram_segmented(limit, edges, DEFAULT_SEGMENT_LEN)
}

pub fn normalized_histogram_segmented(
    limit: u64,
    edges: &[f64],
    segment_len: u64,
) -> Result<(GapHistogram, Vec<f64>), PrimesError> {
    if edges.is_empty()
        || edges[0] < 0.0
        || edges.windows(2).any(|w| w[0] >= w[1])
        || edges.iter().any(|e| !e.is_finite())
    {
        return Err(PrimesError::BadEdges);
    }
    let records = gap_stream_segmented(limit, segment_len).map_err(|e| match e {
        PrimesError::LimitTooSmall(l) => PrimesError::TooFewPrimes(l),
        other => other,
    })?;
    let mut counts = vec![0u64; edges.len()];
    let mut total = 0u64;
    for rec in &records {
        total += 1;
        let u = rec.normalized;
        if u < edges[0] {
            continue;
        }
        // partition_point: first edge strictly greater than u
        let idx = edges.partition_point(|&e| e <= u);
        counts[idx - 1] += 1; // idx-1 == edges.len()-1 is the overflow bin
    }
    if total == 0 {
        return Err(PrimesError::TooFewPrimes(limit));
    }
    let mut reference = Vec::with_capacity(edges.len());
    for w in edges.windows(2) {
        reference.push(poisson_reference(w[0], w[1])?);
    }
    reference.push(poisson_reference(*edges.last().unwrap(), f64::INFINITY)?);
    Ok((
        GapHistogram {
            bin_edges: edges.to_vec(),
            counts,
            total,
        },
        reference,
    ))
}

/// Count of integers `n` in `(lo, hi]` free of prime factors `<= z`
/// (n = 1 counts vacuously, matching the usual Φ(x, z) convention).
pub fn count_rough(lo: u64, hi: u64, z: u64) -> u64 {
    assert!(lo < hi);
    let span = hi - lo;
    let mut marked = vec![false; span as usize];
    for p in small_sieve(z) {
        let mut m = (lo / p + 1) * p;
        while m <= hi {
            marked[(m - lo - 1) as usize] = true;
            m += p;
        }
    }
    marked.iter().filter(|&&c| !c).count() as u64
}

/// Ratio of the sieve density product `∏_{pmax(W) < p < Y} (1 - 1/(p-1))`
/// to its Mertens-type asymptote `(W/φ(W)) e^{-γ} / ln Y`.
///
/// For W fixed and Y → ∞ this tends to `∏_{p > pmax(W)} (1 - 1/(p-1)^2)`,
/// not to 1; with W = 2 that limit is the twin prime constant 0.66016...
/// The asymptote is exact only when W grows alongside Y.
pub fn mertens_ratio(y: f64, w: u64) -> Result<f64, PrimesError> {
    let pmax = check_primorial(w)?;
    if y.is_nan() || y <= pmax as f64 {
        return Err(PrimesError::MertensRange { y, pmax });
    }
    let mut product = 1.0f64;
    for p in sieve_primes(y.ceil() as u64) {
        if p as f64 >= y {
            break;
        }
        if p > pmax {
            product *= 1.0 - 1.0 / (p as f64 - 1.0);
        }
    }
    let phi_over_w: f64 = small_sieve(pmax)
        .iter()
        .map(|&p| 1.0 - 1.0 / p as f64)
        .product();
    Ok(product * phi_over_w * EULER_GAMMA.exp() * y.ln())
}

/// Validates that `w` is 2·3·5·...·p for some prime p and returns that p.
/// Products of consecutive primes beyond 47 overflow u64, so sieving to 64
/// suffices for the candidate factors.
fn check_primorial(w: u64) -> Result<u64, PrimesError> {
    if w < 2 {
        return Err(PrimesError::BadMertensModulus(w));
    }
    let mut rest = w;
    let mut pmax = 1;
    for p in small_sieve(64) {
        if rest == 1 {
            break;
        }
        if rest % p != 0 {
            return Err(PrimesError::BadMertensModulus(w));
        }
        rest /= p;
        if rest % p == 0 {
            return Err(PrimesError::BadMertensModulus(w));
        }
        pmax = p;
    }
    if rest != 1 {
        return Err(PrimesError::BadMertensModulus(w));
    }
    Ok(pmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes() {
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2), vec![2]);
        assert_eq!(sieve_primes(1), Vec::<u64>::new());
        assert_eq!(sieve_primes(0), Vec::<u64>::new());
    }

    #[test]
    fn gap_records_small() {
        let recs = gap_stream(8).unwrap();
        assert_eq!(recs.len(), 3); // (2,3), (3,5), (5,7)
        assert_eq!(recs[0].gap, 1);
        assert!((recs[0].normalized - 1.0 / 2f64.ln()).abs() < 1e-15); // ≈ 1.4427
        assert_eq!(recs[1].p, 3);
        assert_eq!(recs[1].gap, 2);
        assert!((recs[1].normalized - 2.0 / 3f64.ln()).abs() < 1e-15); // ≈ 1.8205
    }

    #[test]
    fn gap_records_smallest_case() {
        let recs = gap_stream(3).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!((recs[0].p, recs[0].p_next), (2, 3));
        assert!(gap_stream(2).is_err());
    }

    #[test]
    fn gaps_are_gap_complete() {
        let recs = gap_stream(10_000).unwrap();
        let sum: u64 = recs.iter().map(|r| r.gap).sum();
        assert_eq!(sum, recs.last().unwrap().p_next - 2);
    }

    #[test]
    fn poisson_reference_values() {
        assert_eq!(poisson_reference(0.0, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(poisson_reference(1.5, 1.5).unwrap(), 0.0);
        let v = poisson_reference(1.0, 2.0).unwrap();
        assert!((v - ((-1f64).exp() - (-2f64).exp())).abs() < 1e-16); // ≈ 0.23254
        assert!(poisson_reference(2.0, 1.0).is_err());
        assert!(poisson_reference(-0.5, 1.0).is_err());
    }

    #[test]
    fn poisson_reference_additive() {
        // additivity over adjacent intervals to 1e-12
        let whole = poisson_reference(0.3, 2.9).unwrap();
        let parts = poisson_reference(0.3, 1.1).unwrap() + poisson_reference(1.1, 2.9).unwrap();
        assert!((whole - parts).abs() < 1e-12);
    }

    #[test]
    fn histogram_total_mass() {
        let (hist, reference) = normalized_histogram(1_000_000, &[0.0]).unwrap();
        assert_eq!(hist.counts.len(), 1);
        assert_eq!(hist.counts[0], hist.total);
        assert_eq!(reference, vec![1.0]);
        assert_eq!(hist.total, 78_498 - 1); // one gap per consecutive pair
    }

    #[test]
    fn histogram_invariant_under_segment_size() {
        let edges = [0.0, 0.5, 1.0, 2.0, 4.0];
        let (h1, _) = normalized_histogram_segmented(200_000, &edges, 1 << 12).unwrap();
        let (h2, _) = normalized_histogram_segmented(200_000, &edges, 1 << 20).unwrap();
        assert_eq!(h1.counts, h2.counts);
        assert_eq!(h1.total, h2.total);
    }

    #[test]
    fn histogram_rejects_bad_edges() {
        assert_eq!(
            normalized_histogram(100, &[1.0, 0.5]).unwrap_err(),
            PrimesError::BadEdges
        );
        assert_eq!(
            normalized_histogram(100, &[-1.0, 0.5]).unwrap_err(),
            PrimesError::BadEdges
        );
    }

    #[test]
    fn mertens_ratio_degenerate_empty_product() {
        // Y just above the largest prime of W: numerator is an empty product.
        let r = mertens_ratio(7.5, 210).unwrap();
        let phi_over_w = 48.0 / 210.0;
        let expect = phi_over_w * EULER_GAMMA.exp() * 7.5f64.ln();
        assert!((r - expect).abs() < 1e-12);
        assert!(mertens_ratio(7.0, 210).is_err());
        assert!(mertens_ratio(100.0, 12).is_err()); // 12 not squarefree
        assert!(mertens_ratio(100.0, 10).is_err()); // skips 3
    }
}
