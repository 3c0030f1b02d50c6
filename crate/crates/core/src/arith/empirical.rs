//! Almost-prime counts of H(p) over (x, 2x] and the Richert weighted sum.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::density::{density_sum, li};
use super::factor::{factorize, factorize_int, FactorConfig};
use super::poly::{Polynomial, PolynomialSystem};
use super::primes::{primes_in, primes_up_to};
use super::roots::{check_hypothesis, prime_roots};
use crate::{Error, Result};

/// Largest x accepted for the window (x, 2x].
pub const MAX_EMPIRICAL_X: u64 = 10_000_000;
/// Primes per parallel block.
const BLOCK: usize = 256;
/// The root-free-prime screen looks at primes up to here.
const SCREEN_PRIMES: u64 = 500;
/// Rational-root screen gives up on constants with more divisors than this.
const SCREEN_MAX_DIVISORS: usize = 20_000;

/// Switches for a window run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EmpiricalOptions {
    /// The caller vouches for irreducibility of every factor.
    pub assume_irreducible: bool,
    /// Keep one [`FactorRecord`] per prime in the report.
    pub keep_records: bool,
    pub factor: FactorConfig,
}

/// Factorization of H(p) at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeFactors {
    pub p: u64,
    /// h_i(p), one per factor.
    pub values: Vec<BigInt>,
    /// Prime factors of |H(p)| with multiplicity, ascending.
    pub primes: Vec<BigUint>,
}

impl PrimeFactors {
    pub fn omega(&self) -> u32 {
        self.primes.len() as u32
    }

    /// |H(p)| recomputed from the factor values.
    pub fn value(&self) -> BigUint {
        self.values.iter().fold(BigUint::one(), |acc, v| acc * v.magnitude())
    }

    pub fn reconstructs(&self) -> bool {
        self.primes.iter().fold(BigUint::one(), |acc, q| acc * q) == self.value()
    }

    /// Smallest prime factor, if any.
    fn least_prime(&self) -> Option<&BigUint> {
        self.primes.first()
    }
}

/// One line of the optional per-prime listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorRecord {
    pub p: u64,
    pub value: String,
    pub primes: Vec<String>,
    pub omega: u32,
}

impl From<&PrimeFactors> for FactorRecord {
    fn from(f: &PrimeFactors) -> Self {
        Self {
            p: f.p,
            value: f.value().to_string(),
            primes: f.primes.iter().map(|q| q.to_string()).collect(),
            omega: f.omega(),
        }
    }
}

/// Factorizations of H(p) for every prime p in (x, 2x].
#[derive(Debug, Clone)]
pub struct WindowFactors {
    system: PolynomialSystem,
    x: u64,
    factors: Vec<PrimeFactors>,
    warnings: Vec<String>,
    keep_records: bool,
}

impl WindowFactors {
    /// Checks the local hypothesis, screens for reducible factors and
    /// factors H(p) across the window.
    pub fn compute(sys: &PolynomialSystem, x: u64, opts: &EmpiricalOptions) -> Result<Self> {
        if !(1..=MAX_EMPIRICAL_X).contains(&x) {
            return Err(Error::Domain(format!("x={x} outside 1..={MAX_EMPIRICAL_X}")));
        }
        let hyp = check_hypothesis(sys);
        if !hyp.passed {
            return Err(Error::Hypothesis(format!(
                "rho1(p) = p - 1 at p = {:?}; H(p) has a fixed prime divisor",
                hyp.failures
            )));
        }
        let mut warnings = irreducibility_screen(sys);
        if !opts.assume_irreducible {
            warnings.insert(0, "irreducibility of the factors is not asserted".into());
        }
        let primes = primes_in(x, 2 * x);
        let cfg = opts.factor;
        let blocks: Vec<Vec<Result<PrimeFactors>>> = primes
            .par_chunks(BLOCK)
            .map(|c| c.iter().map(|&p| factor_at(sys, p, &cfg)).collect())
            .collect();
        let factors = blocks.into_iter().flatten().collect::<Result<Vec<_>>>()?;
        Ok(Self { system: sys.clone(), x, factors, warnings, keep_records: opts.keep_records })
    }

    pub fn system(&self) -> &PolynomialSystem {
        &self.system
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn factors(&self) -> &[PrimeFactors] {
        &self.factors
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Counts the primes with Ω(H(p)) ≤ r.
    pub fn report(&self, r: u32) -> Result<EmpiricalReport> {
        let sys = &self.system;
        let (g, x) = (sys.g(), self.x);
        let mut omega_counts = Vec::new();
        let mut verified = 0u64;
        for f in &self.factors {
            if !f.reconstructs() {
                return Err(Error::Accuracy(format!("factors of H({}) do not multiply back", f.p)));
            }
            verified += 1;
            let w = f.omega() as usize;
            if omega_counts.len() <= w {
                omega_counts.resize(w + 1, 0u64);
            }
            omega_counts[w] += 1;
        }
        let almost = self.factors.iter().filter(|f| f.omega() <= r).count() as u64;
        let lx = (x as f64).ln();
        let density_ratio = if x >= 2 { density_sum(sys, x)?.ratio_phi } else { f64::NAN };
        Ok(EmpiricalReport {
            polynomial: sys.to_string(),
            g,
            k: sys.k(),
            x,
            window: (x, 2 * x),
            prime_count: self.factors.len() as u64,
            r,
            almost_prime_count: almost,
            density_ratio,
            normalized_count: almost as f64 / (x as f64 / lx.powi(g as i32 + 1)),
            factorizations_verified: verified,
            omega_counts,
            warnings: self.warnings.clone(),
            records: self.keep_records.then(|| self.factors.iter().map(FactorRecord::from).collect()),
        })
    }

    /// W(A) with z = X^{1/v}, y = X^{1/u}, X = li(x).
    pub fn weighted_sum(&self, r: u32, v: f64, u: f64) -> Result<WeightedSum> {
        let sys = &self.system;
        let gk = sys.degree() as f64;
        if !(u > 0.0 && v > u && v.is_finite()) {
            return Err(Error::Domain(format!("need 0 < u < v, got u={u}, v={v}")));
        }
        let eta = r as f64 + 1.0 - gk * u;
        if !(eta > 0.0) {
            return Err(Error::Domain(format!("eta = r + 1 - gku = {eta} is not positive")));
        }
        let big_x = li(self.x as f64);
        if !(big_x > 1.0) {
            return Err(Error::Domain(format!("li({}) = {big_x} is too small for z < y", self.x)));
        }
        let (z, y) = (big_x.powf(1.0 / v), big_x.powf(1.0 / u));
        let ly = y.ln();
        let mut w = 0.0;
        let mut survivors = 0u64;
        let mut survivors_almost = 0u64;
        let mut max_inner = 0.0f64;
        for f in &self.factors {
            if f.least_prime().is_some_and(|q| to_f64(q) < z) {
                continue;
            }
            survivors += 1;
            if f.omega() <= r {
                survivors_almost += 1;
            }
            let mut distinct = f.primes.clone();
            distinct.dedup();
            let inner: f64 = distinct
                .iter()
                .map(to_f64)
                .filter(|&q| q >= z && q < y)
                .map(|q| 1.0 - q.ln() / ly)
                .sum();
            max_inner = max_inner.max(inner);
            w += eta - inner;
        }
        Ok(WeightedSum {
            x: self.x,
            big_x,
            z,
            y,
            r,
            eta,
            w,
            survivors,
            max_inner,
            survivors_almost,
            scaled_count: (r as f64 + 1.0) * survivors_almost as f64,
        })
    }
}

fn to_f64(q: &BigUint) -> f64 {
    q.to_f64().unwrap_or(f64::INFINITY)
}

fn factor_at(sys: &PolynomialSystem, p: u64, cfg: &FactorConfig) -> Result<PrimeFactors> {
    let values = sys.factor_values(&BigInt::from(p));
    let mut primes = Vec::new();
    for (h, v) in sys.factors().iter().zip(&values) {
        if v.is_zero() {
            return Err(Error::Domain(format!("{h} vanishes at p={p}")));
        }
        let f = factorize_int(v, cfg).map_err(|e| match e {
            Error::FactorBudget(msg) => Error::FactorBudget(format!("{msg} of {h} at p={p}")),
            other => other,
        })?;
        primes.extend(f.primes);
    }
    primes.sort();
    Ok(PrimeFactors { p, values, primes })
}

/// Almost-prime count of H(p) over p in (x, 2x].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalReport {
    pub polynomial: String,
    pub g: u32,
    pub k: u32,
    pub x: u64,
    pub window: (u64, u64),
    pub prime_count: u64,
    pub r: u32,
    /// Primes p in the window with Ω(H(p)) ≤ r.
    pub almost_prime_count: u64,
    /// Density sum over p ≤ x divided by g log x.
    pub density_ratio: f64,
    /// almost_prime_count / (x / log^{g+1} x).
    pub normalized_count: f64,
    /// Factorizations whose primes multiply back to |H(p)|.
    pub factorizations_verified: u64,
    /// omega_counts[j] primes have Ω(H(p)) = j.
    pub omega_counts: Vec<u64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<FactorRecord>>,
}

/// W(A) and the two sides of the weighted-sieve inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedSum {
    pub x: u64,
    /// li(x).
    pub big_x: f64,
    pub z: f64,
    pub y: f64,
    pub r: u32,
    pub eta: f64,
    pub w: f64,
    /// Elements n = H(p) with no prime factor below z.
    pub survivors: u64,
    /// Largest inner sum Σ (1 - log q / log y) seen.
    pub max_inner: f64,
    /// Survivors with Ω(n) ≤ r.
    pub survivors_almost: u64,
    /// (r + 1) · survivors_almost, to be compared with w.
    pub scaled_count: f64,
}

/// Counts primes p in (x, 2x] with Ω(H(p)) ≤ r.
pub fn count_almost_primes(sys: &PolynomialSystem, x: u64, r: u32, opts: &EmpiricalOptions) -> Result<EmpiricalReport> {
    WindowFactors::compute(sys, x, opts)?.report(r)
}

/// The Richert weighted sum W(A) over n = H(p), p in (x, 2x].
pub fn weighted_sum_w(
    sys: &PolynomialSystem,
    x: u64,
    r: u32,
    v: f64,
    u: f64,
    opts: &EmpiricalOptions,
) -> Result<WeightedSum> {
    WindowFactors::compute(sys, x, opts)?.weighted_sum(r, v, u)
}

/// Heuristic warnings about factors that may be reducible. Never blocks.
///
/// Flags a content above 1, rational roots when k ≤ 3, and factors with a
/// root modulo every prime up to 500.
pub fn irreducibility_screen(sys: &PolynomialSystem) -> Vec<String> {
    let mut out = Vec::new();
    let small = primes_up_to(SCREEN_PRIMES);
    for h in sys.factors() {
        let content = h.coeffs().iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if content > BigInt::one() {
            out.push(format!("{h} has content {content}"));
        }
        if h.degree() < 2 {
            continue;
        }
        if h.degree() <= 3 {
            match rational_root(h) {
                Some(Some((a, b))) => out.push(format!("{h} has the rational root {a}/{b}")),
                Some(None) => {}
                None => out.push(format!("{h}: rational-root screen skipped (too many divisors)")),
            }
        }
        let single = PolynomialSystem::new(vec![h.clone()]).expect("nonconstant factor");
        let rootless = small.iter().filter(|&&p| prime_roots(&single, p).rho == 0).count();
        if rootless == 0 {
            out.push(format!("{h} has a root modulo every prime up to {SCREEN_PRIMES}; it may be reducible"));
        }
    }
    out
}

/// `Some(Some(root))`, `Some(None)` when there is none, `None` when too costly to decide.
fn rational_root(h: &Polynomial) -> Option<Option<(BigInt, BigInt)>> {
    let a0 = h.constant();
    if a0.is_zero() {
        return Some(Some((BigInt::zero(), BigInt::one())));
    }
    let nums = divisors(a0.magnitude())?;
    let dens = divisors(h.leading().magnitude())?;
    if nums.len().saturating_mul(dens.len()) > SCREEN_MAX_DIVISORS {
        return None;
    }
    let deg = h.degree() as u32;
    for q in &dens {
        for p in &nums {
            if p.gcd(q) != BigUint::one() {
                continue;
            }
            for sign in [1i32, -1] {
                let a: BigInt = BigInt::from(p.clone()) * sign;
                let b = BigInt::from(q.clone());
                // Σ c_i a^i b^{deg-i} = 0
                let s = h
                    .coeffs()
                    .iter()
                    .enumerate()
                    .fold(BigInt::zero(), |acc, (i, c)| acc + c * a.pow(i as u32) * b.pow(deg - i as u32));
                if s.is_zero() {
                    return Some(Some((a, b)));
                }
            }
        }
    }
    Some(None)
}

fn divisors(n: &BigUint) -> Option<Vec<BigUint>> {
    let primes = factorize(n, &FactorConfig { max_iterations: 200_000, ..FactorConfig::default() }).ok()?;
    let mut divs = vec![BigUint::one()];
    let mut i = 0;
    while i < primes.len() {
        let p = &primes[i];
        let mult = primes[i..].iter().take_while(|q| *q == p).count();
        let base = divs.clone();
        let mut pk = BigUint::one();
        for _ in 0..mult {
            pk *= p;
            divs.extend(base.iter().map(|d| d * &pk));
        }
        if divs.len() > SCREEN_MAX_DIVISORS {
            return None;
        }
        i += mult;
    }
    divs.sort();
    Some(divs)
}

impl EmpiricalReport {
    /// True when every listed quantity is internally consistent.
    pub fn is_consistent(&self) -> bool {
        self.almost_prime_count <= self.prime_count
            && self.factorizations_verified == self.prime_count
            && self.omega_counts.iter().sum::<u64>() == self.prime_count
            && self.omega_counts.iter().take(self.r as usize + 1).sum::<u64>() == self.almost_prime_count
            && self.normalized_count.is_finite()
            && !self.normalized_count.is_negative()
    }
}
