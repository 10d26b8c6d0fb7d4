//! Shift factors of the 14-bus fixture and the line flows they imply for
//! the first-hour demand served entirely from the reference bus.
//!
//! ```bash
//! cargo run --example ptdf
//! ```

use anyhow::Result;
use reserve_market::load_case;
use reserve_market::network::{build_ptdf, line_flows};

fn main() -> Result<()> {
    let case = load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/desk14.json"))?.case;
    let ptdf = build_ptdf(&case)?;
    println!(
        "{} lines x {} buses, reference {}",
        ptdf.line_ids.len(),
        ptdf.bus_ids.len(),
        ptdf.reference_bus
    );

    // Demand is a withdrawal; the reference bus balances it.
    let r = ptdf
        .bus_ids
        .iter()
        .position(|b| *b == case.reference_bus)
        .unwrap();
    let mut injections: Vec<f64> = case.buses.iter().map(|b| -b.demand[0]).collect();
    injections[r] += case.total_demand(0);

    let flows = line_flows(&ptdf, &injections)?;
    for (i, line) in case.lines.iter().enumerate() {
        println!(
            "{:>4} {:>4} -> {:<4} flow {:>8.2} MW  rating {:>7.1}",
            line.id, line.from_bus, line.to_bus, flows[i], line.rating[0]
        );
    }
    ptdf.write_csv(std::io::stdout().lock())?;
    Ok(())
}
