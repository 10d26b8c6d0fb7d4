//! Free-format MPS export.
//!
//! Rows keep their tag names, columns their variable names, so external
//! solvers' output can be mapped back by name. Two-sided rows are written as
//! `L` rows with a `RANGES` entry.

use std::io::{self, Write};

use super::MilpModel;

const OBJ: &str = "OBJ";

fn num(v: f64) -> String {
    // Shortest round-trip representation; `{:e}` keeps huge and tiny values compact.
    if v != 0.0 && (v.abs() >= 1e15 || v.abs() < 1e-6) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

enum RowSense {
    Equal(f64),
    Less(f64),
    Greater(f64),
    Ranged { upper: f64, range: f64 },
    Free,
}

fn sense(lower: f64, upper: f64) -> RowSense {
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) if lower == upper => RowSense::Equal(lower),
        (true, true) => RowSense::Ranged {
            upper,
            range: upper - lower,
        },
        (false, true) => RowSense::Less(upper),
        (true, false) => RowSense::Greater(lower),
        (false, false) => RowSense::Free,
    }
}

pub fn write_mps<W: Write>(model: &MilpModel, name: &str, out: W) -> io::Result<()> {
    let mut w = io::BufWriter::new(out);
    writeln!(w, "NAME {name}")?;
    writeln!(w, "ROWS")?;
    writeln!(w, " N {OBJ}")?;
    let senses: Vec<RowSense> = model.rows.iter().map(|r| sense(r.lower, r.upper)).collect();
    for (row, s) in model.rows.iter().zip(&senses) {
        let code = match s {
            RowSense::Equal(_) => "E",
            RowSense::Less(_) | RowSense::Ranged { .. } => "L",
            RowSense::Greater(_) => "G",
            RowSense::Free => "N",
        };
        writeln!(w, " {code} {}", row.tag)?;
    }

    // Column-major coefficient lists.
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.columns.len()];
    for (r, row) in model.rows.iter().enumerate() {
        for &(c, a) in &row.coeffs {
            by_col[c].push((r, a));
        }
    }

    writeln!(w, "COLUMNS")?;
    let mut in_int = false;
    let mut marker = 0;
    for (c, col) in model.columns.iter().enumerate() {
        if col.integer != in_int {
            let kind = if col.integer { "INTORG" } else { "INTEND" };
            writeln!(w, " MARKER{marker} 'MARKER' '{kind}'")?;
            marker += 1;
            in_int = col.integer;
        }
        if col.cost != 0.0 || by_col[c].is_empty() {
            writeln!(w, " {} {OBJ} {}", col.name, num(col.cost))?;
        }
        for &(r, a) in &by_col[c] {
            writeln!(w, " {} {} {}", col.name, model.rows[r].tag, num(a))?;
        }
    }
    if in_int {
        writeln!(w, " MARKER{marker} 'MARKER' 'INTEND'")?;
    }

    writeln!(w, "RHS")?;
    for (row, s) in model.rows.iter().zip(&senses) {
        let rhs = match *s {
            RowSense::Equal(v) | RowSense::Less(v) | RowSense::Greater(v) => v,
            RowSense::Ranged { upper, .. } => upper,
            RowSense::Free => continue,
        };
        if rhs != 0.0 {
            writeln!(w, " RHS {} {}", row.tag, num(rhs))?;
        }
    }

    if senses.iter().any(|s| matches!(s, RowSense::Ranged { .. })) {
        writeln!(w, "RANGES")?;
        for (row, s) in model.rows.iter().zip(&senses) {
            if let RowSense::Ranged { range, .. } = *s {
                writeln!(w, " RNG {} {}", row.tag, num(range))?;
            }
        }
    }

    writeln!(w, "BOUNDS")?;
    for col in &model.columns {
        let (lo, up) = (col.lower, col.upper);
        let name = &col.name;
        if col.integer && lo == 0.0 && up == 1.0 {
            writeln!(w, " BV BND {name}")?;
        } else if lo == up {
            writeln!(w, " FX BND {name} {}", num(lo))?;
        } else if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            writeln!(w, " FR BND {name}")?;
        } else {
            if lo == f64::NEG_INFINITY {
                writeln!(w, " MI BND {name}")?;
            } else if lo != 0.0 || col.integer {
                writeln!(w, " LO BND {name} {}", num(lo))?;
            }
            if up.is_finite() {
                writeln!(w, " UP BND {name} {}", num(up))?;
            } else if col.integer {
                writeln!(w, " PL BND {name}")?;
            }
        }
    }
    writeln!(w, "ENDATA")?;
    w.flush()
}
