//! Segmented sieve of Eratosthenes.

use rayon::prelude::*;

/// Width of one sieve segment (odd numbers only, so twice this many integers).
const SEGMENT: u64 = 1 << 16;

/// Primes up to and including `n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    primes_in(0, n)
}

/// Primes p with `lo < p <= hi`, in increasing order.
///
/// Segments are sieved in parallel and concatenated in order.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    if hi <= lo || hi < 2 {
        return Vec::new();
    }
    let base = small_primes(isqrt(hi));
    let mut out = Vec::new();
    if lo < 2 {
        out.push(2);
    }
    // Odd candidates m = 2j + 1 with lo < m <= hi.
    let j_lo = if lo < 2 { 1 } else { lo / 2 + if lo % 2 == 1 { 1 } else { 0 } };
    let j_hi = (hi - 1) / 2;
    if j_lo > j_hi {
        return out;
    }
    let starts: Vec<u64> = (j_lo..=j_hi).step_by(SEGMENT as usize).collect();
    let blocks: Vec<Vec<u64>> = starts
        .par_iter()
        .map(|&s| sieve_segment(s, (s + SEGMENT - 1).min(j_hi), &base))
        .collect();
    for b in blocks {
        out.extend(b);
    }
    out
}

/// Sieves odd numbers 2j + 1 for j in [j0, j1].
fn sieve_segment(j0: u64, j1: u64, base: &[u64]) -> Vec<u64> {
    let len = (j1 - j0 + 1) as usize;
    let mut composite = vec![false; len];
    let top = 2 * j1 + 1;
    for &p in base.iter().skip(1) {
        if p * p > top {
            break;
        }
        // First odd multiple of p that is >= max(p², 2 j0 + 1).
        let lo = (2 * j0 + 1).max(p * p);
        let mut m = lo.div_ceil(p) * p;
        if m % 2 == 0 {
            m += p;
        }
        while m <= top {
            composite[((m - 1) / 2 - j0) as usize] = true;
            m += 2 * p;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| 2 * (j0 + i as u64) + 1)
        .filter(|&m| m > 1)
        .collect()
}

/// Plain sieve for the base primes.
fn small_primes(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut is = vec![true; n + 1];
    is[0] = false;
    is[1] = false;
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            for m in (i * i..=n).step_by(i) {
                is[m] = false;
            }
        }
        i += 1;
    }
    is.iter().enumerate().filter(|(_, &p)| p).map(|(i, _)| i as u64).collect()
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(lo: u64, hi: u64) -> Vec<u64> {
        (lo + 1..=hi).filter(|&n| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
    }

    #[test]
    fn small_ranges_match_trial_division() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(2), vec![2]);
        for (lo, hi) in [(0, 1000), (1, 2), (2, 3), (10, 10), (997, 1009), (5000, 6000), (3, 4)] {
            assert_eq!(primes_in(lo, hi), naive(lo, hi), "({lo}, {hi}]");
        }
    }

    #[test]
    fn counts_across_segments() {
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
        assert_eq!(primes_in(10_000, 20_000).len(), 1033);
        assert_eq!(primes_in(1_000_000, 1_001_000), naive(1_000_000, 1_001_000));
    }
}
