//! Derive reserve offers from a previous market outcome: clear the fixture
//! once, treat its prices and dispatch as history, and price each unit's
//! reserve from its lost opportunity.
//!
//! ```bash
//! cargo run --example offers
//! ```

use anyhow::Result;
use reserve_market::network::build_ptdf;
use reserve_market::offers::{
    apply_offers, compute_offers, offers_from_spin, HistorySample, DEFAULT_NSP_MULTIPLIER,
    DEFAULT_REG_MULTIPLIER,
};
use reserve_market::solver::{Backend, SolveOptions};
use reserve_market::{load_case, run_variant, VariantConfig};

fn main() -> Result<()> {
    // The scaling rule on its own: a 19.75 $/MWh spinning offer.
    let o = offers_from_spin(19.75, DEFAULT_REG_MULTIPLIER, DEFAULT_NSP_MULTIPLIER);
    println!("spin {:.2} -> reg {:.3}, nsp {:.3}", o.spin, o.reg, o.nsp);

    let case = load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/desk14.json"))?.case;
    let ptdf = build_ptdf(&case)?;
    let run = run_variant(
        &case,
        &ptdf,
        VariantConfig::NS_NC,
        &Backend::Linked,
        &SolveOptions::default(),
    )?;

    let lmp = run
        .prices
        .bus_ids
        .iter()
        .cloned()
        .zip(run.prices.lmp.iter().cloned())
        .collect();
    let dispatch = case
        .generators
        .iter()
        .enumerate()
        .map(|(g, spec)| {
            (
                spec.id.clone(),
                (0..case.horizon).map(|t| run.solution.p[g][t]).collect(),
            )
        })
        .collect();
    let history = HistorySample { lmp, dispatch };

    let offers = compute_offers(
        &[history],
        &case,
        DEFAULT_REG_MULTIPLIER,
        DEFAULT_NSP_MULTIPLIER,
    )?;
    for (gen, series) in &offers.offers {
        let first = series[0];
        println!(
            "{gen:>4}: reg {:>7.3} spin {:>7.3} nsp {:>6.3} $/MWh",
            first.reg, first.spin, first.nsp
        );
    }
    let repriced = apply_offers(&case, &offers)?;
    println!("applied offers to {} generators", repriced.generators.len());
    Ok(())
}
