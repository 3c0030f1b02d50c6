use dhr_sieve::arith::{density_sum, mertens_ratio, parse_polynomial_system, v_product};

fn main() -> dhr_sieve::Result<()> {
    let h = parse_polynomial_system("n^3+2; n^3+6")?;
    let g = h.g() as i32;
    for e in 3..=6 {
        let x = 10u64.pow(e);
        let d = density_sum(&h, x)?;
        let m = mertens_ratio(&h, x)?;
        let scaled = v_product(&h, x)? * (x as f64).ln().powi(g);
        println!(
            "x=10^{e}  rho1/phi {:.4}  rho1/p {:.4}  rho2/p {:.4}  Mertens {:.5}  V log^g z {:.4}",
            d.ratio_phi, d.ratio_simple, d.ratio_rho2, m.ratio, scaled
        );
    }
    Ok(())
}
