use dhr_sieve::sievefn::{adjoint_residuals, solve_sieve_limits, SieveDimension};

fn main() -> dhr_sieve::Result<()> {
    let top: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    for g in 1..=top {
        let dim = SieveDimension::new(g)?;
        let start = std::time::Instant::now();
        let l = solve_sieve_limits(dim, 1e-9)?;
        let r = adjoint_residuals(dim, l.alpha, l.beta)?;
        println!(
            "g={g} alpha={:.12} beta={:.12} residuals=({:.1e}, {:.1e}) [{:.1?}]",
            l.alpha, l.beta, r.sum, r.difference, start.elapsed()
        );
    }
    Ok(())
}
