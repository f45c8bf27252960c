use orchid::experiments::table1_report;
use orchid::OrchidParams;

fn main() -> orchid::Result<()> {
    let params = OrchidParams { n: 30, ..Default::default() };
    print!("{}", table1_report(&params, 20, 0)?);
    Ok(())
}
