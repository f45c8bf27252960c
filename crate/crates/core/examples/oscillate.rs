//! Single oscillator run on a small-world network, printing r(t) every 50 steps.
//!
//! `cargo run --release --example oscillate -- [seed]`

use orchid::experiments::{run_oscillator, OscillatorOptions};
use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let params = OrchidParams::default();
    let run = run_oscillator(&params, seed, OscillatorOptions::default())?;
    for step in (0..run.r.len()).step_by(50) {
        println!("t={:5.2}s  r={:.3}  H={:.3}", step as f64 * params.dt, run.r[step], run.entropy[step]);
    }
    println!("final r {:.4}, max r {:.4}", run.final_r(), run.max_r());
    Ok(())
}
