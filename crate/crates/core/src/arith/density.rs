//! Density sums, the products V(z) and V'(z), and li(x).

use rayon::prelude::*;
use serde::Serialize;

use super::poly::PolynomialSystem;
use super::primes::primes_in;
use super::roots::{prime_roots, PrimeRoots};
use crate::numeric::{adaptive_simpson, exp_gamma};
use crate::{Error, Result};

/// Largest x accepted by [`density_sum`].
pub const MAX_DENSITY_X: u64 = 100_000_000;
/// Largest z accepted by the products.
pub const MAX_PRODUCT_Z: u64 = 10_000_000;
/// Primes per parallel block; blocks are reduced in ascending order.
const BLOCK: usize = 4096;

/// Root counts at every prime p with lo < p ≤ hi, in order.
pub fn prime_root_table(sys: &PolynomialSystem, lo: u64, hi: u64) -> Vec<PrimeRoots> {
    let primes = primes_in(lo, hi);
    primes.par_chunks(BLOCK).flat_map_iter(|c| c.iter().map(|&p| prime_roots(sys, p))).collect()
}

/// Sums over primes p ≤ x of ρ₁(p)/φ(p)·log p, ρ₁(p)/p·log p and ρ₂(p)/p·log p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySums {
    pub x: u64,
    pub g: u32,
    pub sum_phi: f64,
    pub sum_simple: f64,
    pub sum_rho2: f64,
    /// sum_phi / (g log x).
    pub ratio_phi: f64,
    /// sum_simple / (g log x).
    pub ratio_simple: f64,
    /// sum_rho2 / ((g + 1) log x).
    pub ratio_rho2: f64,
}

pub fn density_sum(sys: &PolynomialSystem, x: u64) -> Result<DensitySums> {
    if !(2..=MAX_DENSITY_X).contains(&x) {
        return Err(Error::Domain(format!("x={x} outside 2..={MAX_DENSITY_X}")));
    }
    let table = prime_root_table(sys, 0, x);
    let partial: Vec<[f64; 3]> = table
        .par_chunks(BLOCK)
        .map(|c| {
            c.iter().fold([0.0; 3], |[a, b, d], r| {
                let p = r.p as f64;
                let lp = p.ln();
                [a + r.rho1 as f64 / (p - 1.0) * lp, b + r.rho1 as f64 / p * lp, d + r.rho2 as f64 / p * lp]
            })
        })
        .collect();
    let [sum_phi, sum_simple, sum_rho2] =
        partial.iter().fold([0.0; 3], |[a, b, d], s| [a + s[0], b + s[1], d + s[2]]);
    let g = sys.g();
    let lx = (x as f64).ln();
    Ok(DensitySums {
        x,
        g,
        sum_phi,
        sum_simple,
        sum_rho2,
        ratio_phi: sum_phi / (g as f64 * lx),
        ratio_simple: sum_simple / (g as f64 * lx),
        ratio_rho2: sum_rho2 / ((g + 1) as f64 * lx),
    })
}

fn product_over(sys: &PolynomialSystem, z: u64, factor: impl Fn(&PrimeRoots) -> f64 + Sync) -> Result<f64> {
    if !(2..=MAX_PRODUCT_Z).contains(&z) {
        return Err(Error::Domain(format!("z={z} outside 2..={MAX_PRODUCT_Z}")));
    }
    let table = prime_root_table(sys, 0, z - 1);
    if let Some(r) = table.iter().find(|r| !(factor(r) > 0.0)) {
        return Err(Error::DegeneratePrime { p: r.p, factor: factor(r) });
    }
    let partial: Vec<f64> = table.par_chunks(BLOCK).map(|c| c.iter().map(&factor).product()).collect();
    Ok(partial.iter().product())
}

/// V(z) = ∏_{p<z} (1 - ρ₁(p)/φ(p)).
pub fn v_product(sys: &PolynomialSystem, z: u64) -> Result<f64> {
    product_over(sys, z, |r| 1.0 - r.rho1 as f64 / (r.p - 1) as f64)
}

/// V'(z) = ∏_{p<z} (1 - ρ₂(p)/p).
pub fn vprime_product(sys: &PolynomialSystem, z: u64) -> Result<f64> {
    product_over(sys, z, |r| 1.0 - r.rho2 as f64 / r.p as f64)
}

/// V(z), V'(z) and V'(z)·e^γ·log z / V(z), which tends to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MertensReport {
    pub z: u64,
    pub v: f64,
    pub v_prime: f64,
    pub ratio: f64,
}

pub fn mertens_ratio(sys: &PolynomialSystem, z: u64) -> Result<MertensReport> {
    let v = v_product(sys, z)?;
    let v_prime = vprime_product(sys, z)?;
    Ok(MertensReport { z, v, v_prime, ratio: v_prime * exp_gamma() * (z as f64).ln() / v })
}

/// li(x) = ∫₂^x dt / log t.
pub fn li(x: f64) -> f64 {
    if x <= 2.0 {
        return 0.0;
    }
    let tol = 1e-10 * (x / x.ln()).max(1.0);
    adaptive_simpson(|t: f64| 1.0 / t.ln(), 2.0, x, tol, 50).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::poly::parse_polynomial_system;

    fn h() -> PolynomialSystem {
        parse_polynomial_system("n^3+2; n^3+6").unwrap()
    }

    #[test]
    fn single_term_cases() {
        let h = h();
        let d = density_sum(&h, 2).unwrap();
        assert_eq!(d.sum_phi, 0.0);
        // ρ₂(2) = 1
        assert!((d.sum_rho2 - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(v_product(&h, 3).unwrap(), 1.0);
        assert_eq!(vprime_product(&h, 3).unwrap(), 0.5);
        assert!(density_sum(&h, 1).is_err());
        assert!(v_product(&h, MAX_PRODUCT_Z + 1).is_err());
    }

    #[test]
    fn degenerate_prime_is_named() {
        let bad = parse_polynomial_system("n^3+2; n^3+4").unwrap();
        assert!(matches!(v_product(&bad, 100), Err(Error::DegeneratePrime { p: 3, .. })));
    }

    #[test]
    fn li_matches_known_values() {
        // li(x) - li(2) with li(10^6) = 78627.5491594622
        let li2 = 1.045_163_780_117_492_8;
        assert!((li(1e6) - (78_627.549_159_462_2 - li2)).abs() < 1e-5);
        assert!((li(10.0) - (6.165_599_504_787_297 - li2)).abs() < 1e-9);
        assert_eq!(li(2.0), 0.0);
    }

    #[test]
    fn density_ratios_near_one_at_moderate_x() {
        let d = density_sum(&h(), 100_000).unwrap();
        assert!((0.8..1.2).contains(&d.ratio_phi), "{d:?}");
        assert!((0.8..1.2).contains(&d.ratio_rho2), "{d:?}");
    }
}
