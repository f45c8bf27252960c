//! Mean final order parameter as coupling K grows, against the mean-field K_c.

use orchid::experiments::coupling_sweep;
use orchid::params::theoretical_critical_coupling;
use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let params = OrchidParams::default();
    let grid: Vec<f64> = (0..=16).map(|i| 0.25 * i as f64).collect();
    let sweep = coupling_sweep(&grid, &params, 5, 1)?;
    for p in &sweep.points {
        println!("K={:4.2}  r={:.3} ± {:.3}", p.axis, p.mean, p.sem);
    }
    println!("K_c (theory) = {:.3}", theoretical_critical_coupling(params.freq_std)?);
    if let Some(k) = sweep.steepest_rise() {
        println!("steepest rise near K = {k:.3}");
    }
    Ok(())
}
