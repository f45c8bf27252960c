//! Parameters round-trip through the `key = value` text format the CLI reads.

use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let mut params = OrchidParams::default();
    params.apply_text("# a denser, noisier network\nmean_degree = 8\nnoise_std = 9.5\n")?;
    let params = params.validate()?;
    print!("{}", params.to_text());
    println!("byzantine nodes at n={}: {}", params.n, params.byzantine_count());
    Ok(())
}
