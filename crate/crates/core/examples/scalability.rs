//! Latency and message load against network size, next to the quadratic PBFT
//! model and a flat proof-of-work block time.

use orchid::experiments::{scalability_sweep, DEFAULT_N_GRID};
use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let cmp = scalability_sweep(&DEFAULT_N_GRID, &OrchidParams::default(), 10, 5)?;
    println!("   n  orchid_s  pbft_s   msgs/node  pbft_msgs");
    for i in 0..cmp.n_values.len() {
        println!(
            "{:4}  {:8.2}  {:6.2}  {:9.1}  {:9.0}",
            cmp.n_values[i],
            cmp.orchid_mean[i],
            cmp.pbft_model_latency[i],
            cmp.messages_per_round_per_node[i],
            cmp.pbft_messages_per_round[i]
        );
    }
    println!("pow: {} s; crossover: {:?}", cmp.pow_latency, cmp.crossover_n);
    Ok(())
}
