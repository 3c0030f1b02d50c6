use dhr_sieve::arith::{check_hypothesis, parse_polynomial_system, prime_roots, rho, rho1, rho2};

fn main() -> dhr_sieve::Result<()> {
    for text in ["n^3+2; n^3+6", "n^3+2; n^3+4", "n^2+1"] {
        let h = parse_polynomial_system(text)?;
        println!("H = {h}  (g={}, k={}, H(0)={})", h.g(), h.k(), h.h0());
        for d in [2, 3, 5, 7, 12, 35] {
            println!("  d={d:3}  rho={} rho1={} rho2={}", rho(&h, d)?, rho1(&h, d)?, rho2(&h, d)?);
        }
        let big = prime_roots(&h, 1_000_003);
        println!("  p=1000003  rho={} rho1={} rho2={}", big.rho, big.rho1, big.rho2);
        let rep = check_hypothesis(&h);
        println!("  rho1(p) < p - 1 for p <= {}: {} {:?}", rep.bound, if rep.passed { "pass" } else { "fail" }, rep.failures);
    }
    Ok(())
}
