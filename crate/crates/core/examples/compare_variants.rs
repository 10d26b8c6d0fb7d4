//! Clear all four reserve models on the 14-bus fixture and compare cost,
//! startups and average reserve prices per zone.
//!
//! ```bash
//! cargo run --release --example compare_variants
//! ```

use anyhow::Result;
use reserve_market::engine::Product;
use reserve_market::{load_case, run_suite, SuiteOptions, VariantConfig};

fn main() -> Result<()> {
    let case = load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/desk14.json"))?.case;
    let opts = SuiteOptions {
        variants: VariantConfig::ALL.to_vec(),
        ..SuiteOptions::default()
    };
    let suite = run_suite(&case, &opts)?;

    println!(
        "{:<6} {:>12} {:>10} {:>9}",
        "model", "objective", "delta", "startup"
    );
    for ((variant, delta), r) in suite.objective_deltas().into_iter().zip(&suite.reports) {
        println!(
            "{:<6} {:>12.2} {:>10.2} {:>9.0}",
            variant.to_string(),
            r.objective(),
            delta,
            r.startup_cost
        );
    }

    println!();
    for zone in case.zone_ids() {
        for product in [Product::Reg, Product::Spin, Product::Nsp] {
            let avgs: Vec<String> = suite
                .reports
                .iter()
                .map(|r| format!("{:>7.2}", r.run.prices.average_mcp(&zone, product)))
                .collect();
            println!("{zone} {:<4} {}", product.as_str(), avgs.join(" "));
        }
    }
    Ok(())
}
