use orchid::experiments::byzantine_sweep;
use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let params = OrchidParams { n: 30, ..Default::default() };
    let sweep = byzantine_sweep(&[0.0, 0.1, 0.2, 0.3, 0.4], &params, 15, 4)?;
    println!("byz   rate   median_s   final_r");
    for ((rate, time), r) in sweep.rate.points.iter().zip(&sweep.time.points).zip(&sweep.final_r.points) {
        println!("{:.2}  {:5.2}   {:8.2}   {:.3}", rate.axis, rate.mean, time.median, r.mean);
    }
    Ok(())
}
