use dhr_sieve::optimizer::{format_table_text, generate_table, published_r, SieveContext, DEFAULT_N_MAX};
use dhr_sieve::sievefn::LimitsSource;

fn main() -> dhr_sieve::Result<()> {
    let ctx = SieveContext::new(LimitsSource::Reference);
    let ks: Vec<u32> = (1..=14).collect();
    let start = std::time::Instant::now();
    let cells = generate_table(&[2, 3, 4], &ks, DEFAULT_N_MAX, &ctx)?;
    println!("{}", format_table_text(&cells));
    let (mut exact, mut total) = (0, 0);
    for c in &cells {
        if let Some(Some(p)) = published_r(c.g, c.k) {
            total += 1;
            let got = c.r().map(|r| r as i64);
            if got == Some(p as i64) {
                exact += 1;
            } else {
                println!("g={} k={}: computed {:?}, published {p}", c.g, c.k, got);
            }
        }
    }
    println!("{exact}/{total} cells match the published values [{:.1?}]", start.elapsed());
    Ok(())
}
