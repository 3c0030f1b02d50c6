//! Integer factorization: trial division, Miller-Rabin and Pollard-Brent.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::primes::primes_up_to;
use crate::{Error, Result};

/// Trial division runs over primes below this bound.
pub const TRIAL_LIMIT: u64 = 100_000;
/// Witnesses 2..=41 are deterministic below this value.
const DETERMINISTIC_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;
const WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
/// Extra random rounds above the deterministic range.
const RANDOM_ROUNDS: usize = 40;

fn trial_primes() -> &'static [u64] {
    static P: OnceLock<Vec<u64>> = OnceLock::new();
    P.get_or_init(|| primes_up_to(TRIAL_LIMIT - 1))
}

/// Limits and seed for [`factorize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorConfig {
    /// Total Pollard-Brent iterations allowed per number.
    pub max_iterations: u64,
    /// Seed for the randomized primality rounds and the Pollard constants.
    pub seed: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        Self { max_iterations: 20_000_000, seed: 0x5eed }
    }
}

/// Prime factorization of a nonzero integer, by absolute value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: BigUint,
    /// Prime factors with multiplicity, ascending.
    pub primes: Vec<BigUint>,
}

impl Factorization {
    /// Ω(n).
    pub fn omega(&self) -> u32 {
        self.primes.len() as u32
    }

    pub fn distinct(&self) -> Vec<BigUint> {
        let mut d = self.primes.clone();
        d.dedup();
        d
    }

    pub fn product(&self) -> BigUint {
        self.primes.iter().fold(BigUint::one(), |acc, p| acc * p)
    }

    /// Product equals n and every factor tests prime.
    pub fn is_sound(&self, seed: u64) -> bool {
        self.product() == self.n && self.primes.iter().all(|p| is_probable_prime(p, seed))
    }
}

fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    a %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, n);
        }
        a = mulmod(a, a, n);
        e >>= 1;
    }
    acc
}

fn strong_probable_prime_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = powmod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mulmod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    WITNESSES.iter().all(|&a| strong_probable_prime_u64(n, a))
}

fn strong_probable_prime(n: &BigUint, a: &BigUint) -> bool {
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().expect("n > 1");
    let d = &n1 >> s;
    let mut x = a.modpow(&d, n);
    if x == one || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == n1 {
            return true;
        }
    }
    false
}

/// Miller-Rabin: deterministic below about 3.3·10²⁴, otherwise the fixed
/// witnesses plus 40 rounds with bases drawn from a seeded generator.
pub fn is_probable_prime(n: &BigUint, seed: u64) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &WITNESSES {
        if (n % p).is_zero() {
            return false;
        }
    }
    if !WITNESSES.iter().all(|&a| strong_probable_prime(n, &BigUint::from(a))) {
        return false;
    }
    if n.to_u128().is_some_and(|v| v < DETERMINISTIC_LIMIT) {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = n - 3u32;
    (0..RANDOM_ROUNDS).all(|_| {
        let a = random_below(&mut rng, &span) + 2u32;
        strong_probable_prime(n, &a)
    })
}

fn random_below(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    let words = bound.to_u64_digits().len() + 1;
    let digits: Vec<u32> = (0..2 * words).map(|_| rng.gen()).collect();
    BigUint::new(digits) % bound
}

struct Budget {
    left: u64,
}

impl Budget {
    fn spend(&mut self, n: u64) -> bool {
        if self.left < n {
            self.left = 0;
            return false;
        }
        self.left -= n;
        true
    }
}

/// A nontrivial factor of the odd composite n, or `None` when the budget runs out.
fn pollard_brent_u64(n: u64, rng: &mut ChaCha8Rng, budget: &mut Budget) -> Option<u64> {
    const M: u64 = 128;
    loop {
        let c = rng.gen_range(1..n);
        let f = |x: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
        let mut y = rng.gen_range(0..n);
        let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
        let (mut x, mut ys) = (y, y);
        while g == 1 {
            x = y;
            if !budget.spend(r) {
                return None;
            }
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let steps = M.min(r - k);
                if !budget.spend(steps) {
                    return None;
                }
                for _ in 0..steps {
                    y = f(y);
                    q = mulmod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += M;
            }
            r *= 2;
        }
        if g == n {
            loop {
                if !budget.spend(1) {
                    return None;
                }
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
}

fn pollard_brent_big(n: &BigUint, rng: &mut ChaCha8Rng, budget: &mut Budget) -> Option<BigUint> {
    const M: u64 = 128;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    loop {
        let c = random_below(rng, &(n - 1u32)) + 1u32;
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = random_below(rng, n);
        let (mut g, mut r, mut q) = (BigUint::one(), 1u64, BigUint::one());
        let (mut x, mut ys) = (y.clone(), y.clone());
        while g.is_one() {
            x = y.clone();
            if !budget.spend(r) {
                return None;
            }
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                let steps = M.min(r - k);
                if !budget.spend(steps) {
                    return None;
                }
                for _ in 0..steps {
                    y = f(&y);
                    q = q * diff(&x, &y) % n;
                }
                g = q.gcd(n);
                k += M;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                if !budget.spend(1) {
                    return None;
                }
                ys = f(&ys);
                g = diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
}

fn budget_error(n: &BigUint, cfg: &FactorConfig) -> Error {
    Error::FactorBudget(format!("{n} (limit {} Pollard iterations)", cfg.max_iterations))
}

/// Prime factors of n ≥ 1 with multiplicity, ascending.
pub fn factorize(n: &BigUint, cfg: &FactorConfig) -> Result<Vec<BigUint>> {
    if n.is_zero() {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let mut out: Vec<BigUint> = Vec::new();
    let mut rest = n.clone();
    for &p in trial_primes() {
        if let Some(small) = rest.to_u64() {
            if p * p > small {
                break;
            }
        }
        while (&rest % p).is_zero() {
            rest /= p;
            out.push(BigUint::from(p));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut budget = Budget { left: cfg.max_iterations };
    let mut stack = Vec::new();
    if !rest.is_one() {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        // No factor below TRIAL_LIMIT remains, so anything under its square is prime.
        let below_square = m.to_u64().is_some_and(|v| v < TRIAL_LIMIT * TRIAL_LIMIT);
        if below_square || is_probable_prime(&m, cfg.seed) {
            out.push(m);
            continue;
        }
        let d = match m.to_u64() {
            Some(small) => pollard_brent_u64(small, &mut rng, &mut budget).map(BigUint::from),
            None => pollard_brent_big(&m, &mut rng, &mut budget),
        };
        let d = d.ok_or_else(|| budget_error(n, cfg))?;
        stack.push(&m / &d);
        stack.push(d);
    }
    out.sort();
    Ok(out)
}

/// Factorization of |n| for n ≠ 0.
pub fn factorize_int(n: &BigInt, cfg: &FactorConfig) -> Result<Factorization> {
    let m = n.magnitude().clone();
    let primes = factorize(&m, cfg)?;
    Ok(Factorization { n: m, primes })
}

/// Ω(|n|), the number of prime factors counted with multiplicity.
pub fn omega_with_multiplicity(n: &BigInt) -> Result<u32> {
    Ok(factorize_int(n, &FactorConfig::default())?.omega())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(s: &str) -> BigUint {
        s.parse().unwrap()
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_with_multiplicity(&BigInt::from(12)).unwrap(), 3);
        assert_eq!(omega_with_multiplicity(&BigInt::from(1)).unwrap(), 0);
        assert_eq!(omega_with_multiplicity(&BigInt::from(-8)).unwrap(), 3);
        assert_eq!(omega_with_multiplicity(&BigInt::from(1_782_221)).unwrap(), 4);
        assert!(matches!(omega_with_multiplicity(&BigInt::from(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn primality_across_ranges() {
        assert!(is_prime_u64(2) && is_prime_u64(97) && !is_prime_u64(1) && !is_prime_u64(91));
        // strong pseudoprime to every prime base up to 23
        let n = big("3825123056546413051");
        assert!(!is_probable_prime(&n, 1));
        assert!(is_probable_prime(&big("18446744073709551557"), 1));
        assert!(is_probable_prime(&big("170141183460469231731687303715884105727"), 1));
        assert!(!is_probable_prime(&big("170141183460469231731687303715884105729"), 1));
    }

    #[test]
    fn splits_semiprimes_beyond_trial_division() {
        let cfg = FactorConfig::default();
        let p = big("1000000007");
        let q = big("998244353");
        let f = factorize(&(&p * &q * &q), &cfg).unwrap();
        assert_eq!(f, vec![q.clone(), q, p]);
        let a = big("18446744073709551557");
        let b = big("4294967311");
        let f = factorize(&(&a * &b * 6u32), &cfg).unwrap();
        assert_eq!(f, vec![big("2"), big("3"), b, a]);
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = FactorConfig { max_iterations: 10, seed: 3 };
        let n = big("18446744073709551557") * big("18446744073709551533");
        assert!(matches!(factorize(&n, &cfg), Err(Error::FactorBudget(_))));
    }
}
