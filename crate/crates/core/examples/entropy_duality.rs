//! Order parameter and binding entropy move in opposite directions as the
//! network locks.

use orchid::experiments::{entropy_duality, run_oscillator, OscillatorOptions};
use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let params = OrchidParams { n: 30, ..Default::default() };
    let run = run_oscillator(&params, 6, OscillatorOptions::default())?;
    for step in [0, 10, 25, 50, 100, 200, 400, 600] {
        println!("step {step:3}  r={:.3}  H={:.3}", run.r[step], run.entropy[step]);
    }
    println!("ln B = {:.3}", (params.entropy_bins as f64).ln());
    println!("corr(r, H) = {:.3}", entropy_duality(&run.r, &run.entropy).unwrap_or(f64::NAN));
    Ok(())
}
