use dhr_sieve::arith::{factorize_int, omega_with_multiplicity, parse_polynomial_system, FactorConfig};
use num_bigint::BigInt;

fn main() -> dhr_sieve::Result<()> {
    let h = parse_polynomial_system("n^3+2; n^3+6")?;
    let cfg = FactorConfig::default();
    for p in [11u64, 10_007, 1_000_003] {
        let n = h.eval(&BigInt::from(p));
        let f = factorize_int(&n, &cfg)?;
        let primes: Vec<String> = f.primes.iter().map(|q| q.to_string()).collect();
        println!("H({p}) = {n} = {}  Omega={} sound={}", primes.join(" * "), f.omega(), f.is_sound(cfg.seed));
    }
    let n = BigInt::from(2).pow(64) + 1;
    println!("Omega(2^64 + 1) = {}", omega_with_multiplicity(&n)?);
    // 2^128 + 1 has a 17-digit smallest factor; a small budget gives up explicitly
    let n = BigInt::from(2).pow(128) + 1;
    let tight = FactorConfig { max_iterations: 100_000, ..cfg };
    println!("2^128 + 1 with a tight budget: {}", factorize_int(&n, &tight).unwrap_err());
    Ok(())
}
