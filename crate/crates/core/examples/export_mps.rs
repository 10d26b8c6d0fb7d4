//! Write the unit-commitment model of one reserve model as free-format MPS,
//! ready for any external MILP solver.
//!
//! ```bash
//! cargo run --example export_mps -- /tmp/t1_sc.mps
//! ```

use std::fs::File;
use std::io::BufWriter;

use anyhow::{Context, Result};
use reserve_market::formulation::mps::write_mps;
use reserve_market::formulation::{build_model, ConstraintKind};
use reserve_market::{load_case, VariantConfig};

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "t1_s_c.mps".into());
    let case = load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/t1.json"))?.case;
    let model = build_model(&case, VariantConfig::S_C)?;

    println!(
        "{} columns ({} integer), {} rows",
        model.columns.len(),
        model.num_integer(),
        model.rows.len()
    );
    for kind in ConstraintKind::variant_kinds(model.variant) {
        println!("  {:<14} {}", kind.name(), model.count_rows(kind));
    }

    let file = File::create(&path).with_context(|| format!("cannot create {path}"))?;
    write_mps(&model, "t1_s_c", BufWriter::new(file))?;
    println!("wrote {path}");
    Ok(())
}
