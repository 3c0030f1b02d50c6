//! Root counts ρ, ρ₁, ρ₂ of H modulo d and the local admissibility check.

use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use super::poly::PolynomialSystem;
use super::primes::primes_up_to;
use crate::{Error, Result};

/// Largest modulus accepted by the brute-force counts.
pub const MAX_MODULUS: u64 = 10_000_000;

fn check_modulus(d: u64) -> Result<()> {
    if d == 0 || d > MAX_MODULUS {
        return Err(Error::Domain(format!("modulus d={d} outside 1..={MAX_MODULUS}")));
    }
    Ok(())
}

fn horner_mod(coeffs: &[u64], a: u64, d: u64) -> u64 {
    coeffs.iter().rev().fold(0u64, |acc, &c| ((acc as u128 * a as u128 + c as u128) % d as u128) as u64)
}

/// Residues a in [0, d) with H(a) ≡ 0 (mod d).
fn roots_mod(sys: &PolynomialSystem, d: u64) -> impl Iterator<Item = u64> {
    let coeffs = sys.product().reduce_mod(d);
    (0..d).filter(move |&a| horner_mod(&coeffs, a, d) == 0)
}

/// ρ(d) = #{a mod d : H(a) ≡ 0}.
pub fn rho(sys: &PolynomialSystem, d: u64) -> Result<u64> {
    check_modulus(d)?;
    Ok(roots_mod(sys, d).count() as u64)
}

/// ρ₁(d) = #{a mod d : (a, d) = 1, H(a) ≡ 0}.
pub fn rho1(sys: &PolynomialSystem, d: u64) -> Result<u64> {
    check_modulus(d)?;
    // a = d stands for the residue 0, which is coprime to d only when d = 1.
    Ok(roots_mod(sys, d).filter(|&a| (if a == 0 { d } else { a }).gcd(&d) == 1).count() as u64)
}

/// ρ₂(d) = #{a mod d : a H(a) ≡ 0}.
pub fn rho2(sys: &PolynomialSystem, d: u64) -> Result<u64> {
    check_modulus(d)?;
    let coeffs = sys.product().reduce_mod(d);
    Ok((0..d)
        .filter(|&a| (a as u128 * horner_mod(&coeffs, a, d) as u128) % d as u128 == 0)
        .count() as u64)
}

/// The three counts at a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimeRoots {
    pub p: u64,
    pub rho: u64,
    pub rho1: u64,
    pub rho2: u64,
}

/// ρ, ρ₁, ρ₂ at a prime p < 2³², from deg gcd(H mod p, x^p - x).
///
/// Only 0 fails to be coprime to p, so ρ₁ = ρ - [p | H(0)] and
/// ρ₂ = ρ + [p ∤ H(0)].
pub fn prime_roots(sys: &PolynomialSystem, p: u64) -> PrimeRoots {
    assert!((2..1 << 32).contains(&p), "prime {p} outside the supported range");
    let h = trim(sys.product().reduce_mod(p));
    let zero_root = sys.h0().mod_floor(&p.into()).is_zero();
    let rho = if h.is_empty() { p } else { distinct_roots(&h, p) };
    let rho1 = rho - zero_root as u64;
    let rho2 = rho + !zero_root as u64;
    PrimeRoots { p, rho, rho1, rho2 }
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat; p is prime.
    let (mut base, mut e, mut acc) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        e >>= 1;
    }
    acc
}

/// Remainder of a modulo a nonzero b over F_p.
fn poly_rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let db = b.len() - 1;
    let inv = inv_mod(b[db], p);
    while a.len() > db {
        let top = *a.last().expect("nonempty");
        if top != 0 {
            let q = mulmod(top, inv, p);
            let shift = a.len() - 1 - db;
            for (i, &bi) in b.iter().enumerate() {
                let t = mulmod(q, bi, p);
                a[shift + i] = (a[shift + i] + p - t) % p;
            }
        }
        a.pop();
    }
    trim(a)
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    poly_rem(out, m, p)
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    while !b.is_empty() {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Number of distinct roots in F_p of a nonzero polynomial.
fn distinct_roots(h: &[u64], p: u64) -> u64 {
    if h.len() == 1 {
        return 0;
    }
    // x^p mod h by square and multiply.
    let x = poly_rem(vec![0, 1], h, p);
    let mut acc = poly_rem(vec![1], h, p);
    let mut base = x.clone();
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, h, p);
        }
        base = poly_mulmod(&base, &base, h, p);
        e >>= 1;
    }
    // acc - x
    let mut diff = acc;
    if diff.len() < 2 {
        diff.resize(2, 0);
    }
    diff[1] = (diff[1] + p - 1) % p;
    let diff = trim(diff);
    let g = if diff.is_empty() { h.to_vec() } else { poly_gcd(h.to_vec(), diff, p) };
    (g.len() - 1) as u64
}

/// Result of checking ρ₁(p) < p - 1 at the small primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    /// Primes up to this bound were checked; beyond it ρ₁(p) ≤ gk < p - 1.
    pub bound: u64,
    pub checked: Vec<PrimeRoots>,
    /// Primes with ρ₁(p) = p - 1.
    pub failures: Vec<u64>,
    pub passed: bool,
}

/// Checks ρ₁(p) < p - 1 for every prime p ≤ gk + 1.
pub fn check_hypothesis(sys: &PolynomialSystem) -> HypothesisReport {
    let bound = sys.degree() as u64 + 1;
    let checked: Vec<PrimeRoots> = primes_up_to(bound).into_iter().map(|p| prime_roots(sys, p)).collect();
    let failures: Vec<u64> = checked.iter().filter(|r| r.rho1 + 1 >= r.p).map(|r| r.p).collect();
    HypothesisReport { bound, passed: failures.is_empty(), checked, failures }
}
