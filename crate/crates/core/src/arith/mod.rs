//! Arithmetic of the polynomial product H = h₁⋯h_g: root counts modulo d,
//! density sums, the products V and V', factorization of H(p) and empirical
//! almost-prime counts.

pub mod density;
pub mod empirical;
pub mod factor;
pub mod poly;
pub mod primes;
pub mod roots;

pub use density::{density_sum, li, mertens_ratio, v_product, vprime_product, DensitySums, MertensReport};
pub use empirical::{
    count_almost_primes, irreducibility_screen, weighted_sum_w, EmpiricalOptions, EmpiricalReport, FactorRecord,
    PrimeFactors, WeightedSum, WindowFactors,
};
pub use factor::{factorize, factorize_int, is_prime_u64, is_probable_prime, omega_with_multiplicity, FactorConfig, Factorization};
pub use poly::{parse_polynomial_system, Polynomial, PolynomialSystem};
pub use primes::{primes_in, primes_up_to};
pub use roots::{check_hypothesis, prime_roots, rho, rho1, rho2, HypothesisReport, PrimeRoots};
