//! Clear one reserve model on the two-bus fixture and print the commitment,
//! energy prices and reserve prices.
//!
//! ```bash
//! cargo run --example clear_variant -- S-C
//! ```

use anyhow::{anyhow, Result};
use reserve_market::network::build_ptdf;
use reserve_market::solver::{Backend, SolveOptions};
use reserve_market::{load_case, run_variant, VariantConfig};

fn main() -> Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "NS-NC".into());
    let variant = VariantConfig::ALL
        .into_iter()
        .find(|v| v.to_string() == name)
        .ok_or_else(|| anyhow!("unknown variant {name}; use NS-NC, NS-C, S-NC or S-C"))?;

    let case = load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/t1x2.json"))?.case;
    let ptdf = build_ptdf(&case)?;
    let run = run_variant(
        &case,
        &ptdf,
        variant,
        &Backend::Linked,
        &SolveOptions::default(),
    )?;

    println!("{variant}: objective {:.2}", run.incumbent.objective_value);
    for (g, spec) in case.generators.iter().enumerate() {
        let u: String = run.solution.u[g]
            .iter()
            .map(|&x| if x > 0.5 { '1' } else { '0' })
            .collect();
        let p: Vec<String> = run.solution.p[g]
            .iter()
            .map(|x| format!("{:.1}", x + 0.0))
            .collect();
        println!("  {:>4} u={u} p=[{}]", spec.id, p.join(", "));
    }
    for t in 0..case.horizon {
        let lmps: Vec<String> = run
            .prices
            .bus_ids
            .iter()
            .map(|b| format!("{b} {:.2}", run.prices.lmp_at(b, t).unwrap()))
            .collect();
        println!("  t{} LMP {}", t + 1, lmps.join(", "));
        for zone in case.zone_ids() {
            let m = run.prices.mcp_at(&zone, t).unwrap();
            println!(
                "     {zone} MCP reg {:.2} spin {:.2} nsp {:.2}",
                m.reg, m.spin, m.nsp
            );
        }
    }
    Ok(())
}
