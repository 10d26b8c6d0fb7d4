//! Partition the 14-bus network into reserve zones by clustering the buses'
//! shift-factor signatures, then size each zone's requirements.
//!
//! ```bash
//! cargo run --example zoning -- 3 42
//! ```

use anyhow::{Context, Result};
use reserve_market::load_case;
use reserve_market::network::build_ptdf;
use reserve_market::zoning::{apply_zoning, cluster_buses, size_requirements};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args
        .next()
        .map_or(Ok(3), |s| s.parse())
        .context("zone count")?;
    let seed: u64 = args.next().map_or(Ok(42), |s| s.parse()).context("seed")?;

    let case = load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/desk14.json"))?.case;
    let ptdf = build_ptdf(&case)?;
    let clustering = cluster_buses(&case, &ptdf, k, seed)?;
    println!(
        "k = {k}, seed = {seed}: converged in {} iterations, inertia {:.6}",
        clustering.iterations,
        clustering.inertia_history.last().copied().unwrap_or(0.0)
    );

    let partition = &clustering.partition;
    let requirements = size_requirements(&case, partition, 0.03)?;
    for (zone, buses) in &partition.members {
        let gens = &partition.generator_sets[zone];
        let req = &requirements.zones[zone];
        println!(
            "{zone}: buses {:?}, units {:?}; hour 1 reg {:.1} spin {:.1} nsp {:.1} MW",
            buses, gens, req.reg[0], req.spin[0], req.nsp[0]
        );
    }

    let zoned = apply_zoning(&case, partition, requirements);
    println!("zoned case has {} zones", zoned.zone_ids().len());
    Ok(())
}
