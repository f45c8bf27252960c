//! Reconstruction fidelity of a (k, 10) sharing as coherence drops, for k = 3..7.

use orchid::experiments::default_qss_grid;
use orchid::qss::{threshold_scan, FlipModel};

fn main() -> orchid::Result<()> {
    let grid = default_qss_grid();
    let prime = (1 << 31) - 1;
    for k in 3..=7 {
        let scan = threshold_scan(k, 10, &grid, 60, prime, FlipModel::DeterministicFloor, k as u64)?;
        let width = scan.transition_width(0.1, 0.9);
        println!("k={k}: c* = {:?}, 10%-90% width = {width:?}", scan.threshold);
    }

    // The binomial channel flips each low bit independently instead.
    let scan = threshold_scan(5, 10, &grid, 60, prime, FlipModel::Binomial, 5)?;
    println!("binomial k=5: c* = {:?}", scan.threshold);
    Ok(())
}
