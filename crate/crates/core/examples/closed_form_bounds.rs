//! Quadrature values of the two weighted-sum integrals against their closed forms.

use dhr_sieve::bounds::{compute_c0, r_threshold, r_threshold_closed, ParameterPoint};
use dhr_sieve::optimizer::SieveContext;
use dhr_sieve::sievefn::{LimitsSource, SieveDimension};

fn main() -> dhr_sieve::Result<()> {
    println!("C0 = {:.16}", compute_c0());
    let ctx = SieveContext::new(LimitsSource::Reference);
    for g in [2, 3] {
        let tables = ctx.tables(SieveDimension::new(g)?)?;
        for (v, w, u) in [(24.0, 2.4, 1.4), (36.0, 3.0, 1.5), (40.0, 3.0, 1.6), (50.0, 3.2, 1.7)] {
            let p = ParameterPoint::with_default_levels(v, w, u)?;
            let exact = r_threshold(6, &p, &tables)?;
            match r_threshold_closed(6, &p, &tables) {
                Ok(closed) => println!(
                    "g={g} v={v} w={w} u={u}: I/f {:.6} vs {:.6}, J {:.6} <= {:.6}, r {} vs {}",
                    exact.i_over_f, closed.i_over_f, exact.j_term, closed.j_term, exact.r, closed.r
                ),
                Err(e) => println!("g={g} v={v} w={w} u={u}: closed form not applicable ({e})"),
            }
        }
    }
    Ok(())
}
