use dhr_sieve::sievefn::{ReferenceLimits, SieveDimension, SieveFunctionTable};

fn main() -> dhr_sieve::Result<()> {
    let refs = ReferenceLimits::bundled();
    for g in 1..=5 {
        let limits = refs.get(SieveDimension::new(g)?)?;
        let start = std::time::Instant::now();
        let t = SieveFunctionTable::with_defaults(limits)?;
        let r = t.dde_residuals();
        println!("g={g} alpha={:.6} beta={:.6} n={} res={:.2e} skipped={} [{:.1?}]", limits.alpha, limits.beta, t.len(), r.max(), r.skipped, start.elapsed());
        for u in [limits.beta, limits.alpha, limits.alpha + 1.0, limits.alpha + 4.0, limits.alpha + 12.0] {
            println!("  u={u:8.4}  F={:.12}  f={:.12}", t.upper(u), t.lower(u));
        }
    }
    Ok(())
}
