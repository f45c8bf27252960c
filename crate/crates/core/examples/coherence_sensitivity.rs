//! How much coherence the network needs before decoherence noise stops
//! dominating the coupling.

use orchid::experiments::coherence_sweep;
use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let params = OrchidParams::default();
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let sweep = coherence_sweep(&grid, &params, 10, 2)?;
    for p in &sweep.points {
        let bar = "#".repeat((p.mean * 40.0) as usize);
        println!("c={:.1}  {:.3}  {bar}", p.axis, p.mean);
    }
    match sweep.upward_crossing(params.binding_threshold) {
        Some(c) => println!("r > {} from c ≈ {c:.2}", params.binding_threshold),
        None => println!("no crossing of the binding threshold"),
    }
    Ok(())
}
