//! Almost-prime values of H(p) over (x, 2x] and the weighted sum W(A).

use dhr_sieve::arith::{parse_polynomial_system, EmpiricalOptions, WindowFactors};

fn main() -> dhr_sieve::Result<()> {
    let h = parse_polynomial_system("n^3+2; n^3+6")?;
    let opts = EmpiricalOptions { assume_irreducible: true, ..Default::default() };
    let win = WindowFactors::compute(&h, 10_000, &opts)?;
    for r in [4, 6, 8, 10, 15] {
        let rep = win.report(r)?;
        println!(
            "r={r:2}: {}/{} primes, normalized {:.3}",
            rep.almost_prime_count, rep.prime_count, rep.normalized_count
        );
    }
    for (r, v, u) in [(15, 6.0, 2.0), (12, 9.0, 1.8), (40, 20.0, 1.5)] {
        let w = win.weighted_sum(r, v, u)?;
        println!(
            "W(A) r={r} v={v} u={u}: W={:.2} eta={:.2} survivors={} (r+1)*count={}",
            w.w, w.eta, w.survivors, w.scaled_count
        );
    }
    Ok(())
}
