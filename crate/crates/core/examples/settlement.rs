//! Settle every generator after clearing, then summarize revenue by fuel
//! class and the spread of revenues among gas units.
//!
//! ```bash
//! cargo run --example settlement
//! ```

use anyhow::Result;
use reserve_market::case::FuelClass;
use reserve_market::network::build_ptdf;
use reserve_market::settlement::{aggregate_by_fuel, revenue_distribution, settle, RevenueColumn};
use reserve_market::solver::{Backend, SolveOptions};
use reserve_market::{load_case, run_variant, VariantConfig};

fn main() -> Result<()> {
    let case = load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/desk14.json"))?.case;
    let ptdf = build_ptdf(&case)?;
    let variant = VariantConfig::S_C;
    let run = run_variant(
        &case,
        &ptdf,
        variant,
        &Backend::Linked,
        &SolveOptions::default(),
    )?;
    let report = settle(&case, variant, &run.solution, &run.prices)?;

    println!(
        "{:<4} {:>5} {:>10} {:>10} {:>10} {:>10}",
        "gen", "class", "energy $", "profit $", "reserve $", "res. prof"
    );
    for l in &report.generators {
        println!(
            "{:<4} {:>5} {:>10.0} {:>10.0} {:>10.0} {:>10.0}",
            l.gen,
            l.fuel_class.as_str(),
            l.erev,
            l.epro,
            l.ancillary_revenue(),
            l.rpro_online + l.rpro_nsp
        );
    }

    println!();
    for s in aggregate_by_fuel(&report, &case) {
        println!(
            "{:>5}: capacity {:>5.1}%  energy {:>5.1}%  ancillary {:>5.1}%  total {:>5.1}%",
            s.class.as_str(),
            s.capacity_share,
            s.energy_revenue_share,
            s.ancillary_revenue_share,
            s.total_revenue_share
        );
    }

    if let Ok(d) = revenue_distribution(&report, FuelClass::NG, RevenueColumn::Total) {
        println!(
            "\nNG total revenue: mean {:.0} $, stddev {:.0} $ over {} units",
            d.mean,
            d.stddev,
            d.values.len()
        );
    }
    Ok(())
}
