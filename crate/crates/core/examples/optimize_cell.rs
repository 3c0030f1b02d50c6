//! Best (v, w, u) and the threshold breakdown for a few cells.

use dhr_sieve::bounds::asymptotic_params;
use dhr_sieve::optimizer::{minimize_r, SieveContext, DEFAULT_N_MAX};
use dhr_sieve::sievefn::{LimitsSource, SieveDimension};

fn main() -> dhr_sieve::Result<()> {
    let ctx = SieveContext::new(LimitsSource::Reference);
    for (g, k) in [(2, 3), (2, 14), (3, 4), (4, 14)] {
        let dim = SieveDimension::new(g)?;
        let res = minimize_r(k, DEFAULT_N_MAX, &ctx.tables(dim)?)?;
        let b = res.breakdown;
        println!(
            "g={g} k={k:2} r={:3} (classical {:?})  v={:.4} w={:.4} u={:.4}  gku={:.3} I/f={:.3} J={:.3} eta={:.3}",
            res.r, res.classical_r, res.params.v, res.params.w, res.params.u, b.gku, b.i_over_f, b.j_term, b.eta
        );
    }
    // large k: r - gk grows like c1 g^{3/2} sqrt(k) in the main term
    let dim = SieveDimension::new(2)?;
    let tables = ctx.tables(dim)?;
    for k in [100, 400] {
        let res = minimize_r(k, 2000, &tables)?;
        let a = asymptotic_params(k, &ctx.limits(dim)?, &ctx.limits(dim.next()?)?)?;
        let shape = (res.r as f64 - 2.0 * k as f64) / (k as f64).sqrt();
        println!("g=2 k={k}: r={} (r - gk)/sqrt(k)={shape:.3}  main term M={:.2}  c1 g^1.5={:.3}", res.r, a.m, a.c1 * 2f64.powf(1.5));
    }
    Ok(())
}
