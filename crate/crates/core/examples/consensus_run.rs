//! One consensus run with 10% Byzantine nodes, then a look at the share check.

use orchid::consensus::run_consensus;
use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let params = OrchidParams { n: 30, byz_fraction: 0.1, ..Default::default() };
    let out = run_consensus(&params, 3)?;
    println!("byzantine nodes: {}", out.byzantine.iter().filter(|&&b| b).count());
    for (round, (r, frac)) in out.r_series.iter().zip(&out.commit_fraction_series).enumerate().step_by(10) {
        println!("round {:3}  r={r:.3}  committed={:.0}%", round + 1, frac * 100.0);
    }
    println!(
        "converged={} value={:?} time={:?}s messages={} ({} per round)",
        out.converged,
        out.consensus_value,
        out.convergence_seconds(params.dt),
        out.message_count,
        out.messages_per_round
    );
    println!("share reconstruction after decoherence: {:?}", out.qss_ok);
    Ok(())
}
