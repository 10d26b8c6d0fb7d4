//! DC power-transfer distribution factors.
//!
//! `PTDF[l, i]` is the MW flow on line `l` (positive from `from_bus` to
//! `to_bus`) caused by injecting 1 MW at bus `i` and withdrawing it at the
//! reference bus. The matrix is built from the reduced nodal susceptance
//! matrix (reference row and column removed) with a Cholesky factorization.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::case::MarketCase;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network is singular: {0}")]
    Singular(String),
    #[error("expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtdfMatrix {
    pub reference_bus: String,
    pub bus_ids: Vec<String>,
    pub line_ids: Vec<String>,
    /// lines × buses
    pub entries: DMatrix<f64>,
}

impl PtdfMatrix {
    pub fn get(&self, line: usize, bus: usize) -> f64 {
        self.entries[(line, bus)]
    }

    /// Sensitivity column of one bus, used as its clustering signature.
    pub fn bus_column(&self, bus: usize) -> Vec<f64> {
        self.entries.column(bus).iter().copied().collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["line".to_string()];
        header.extend(self.bus_ids.iter().cloned());
        w.write_record(&header)?;
        for (l, id) in self.line_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.entries.row(l).iter().map(|v| crate::num(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_ptdf(case: &MarketCase) -> Result<PtdfMatrix, NetworkError> {
    let n = case.buses.len();
    let pos: HashMap<&str, usize> = case.bus_position();
    let reference = *pos.get(case.reference_bus.as_str()).ok_or_else(|| {
        NetworkError::Singular(format!("no reference bus `{}`", case.reference_bus))
    })?;

    // Map full bus index to reduced index (reference removed).
    let reduced: Vec<Option<usize>> = (0..n)
        .map(|i| match i.cmp(&reference) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        })
        .collect();

    let mut ends = Vec::with_capacity(case.lines.len());
    let mut susceptance = DMatrix::<f64>::zeros(n.saturating_sub(1), n.saturating_sub(1));
    for line in &case.lines {
        if !(line.reactance > 0.0) {
            return Err(NetworkError::Singular(format!(
                "line `{}` has non-positive reactance",
                line.id
            )));
        }
        let (Some(&a), Some(&b)) = (
            pos.get(line.from_bus.as_str()),
            pos.get(line.to_bus.as_str()),
        ) else {
            return Err(NetworkError::Singular(format!(
                "line `{}` references an unknown bus",
                line.id
            )));
        };
        let y = 1.0 / line.reactance;
        if let Some(i) = reduced[a] {
            susceptance[(i, i)] += y;
        }
        if let Some(j) = reduced[b] {
            susceptance[(j, j)] += y;
        }
        if let (Some(i), Some(j)) = (reduced[a], reduced[b]) {
            susceptance[(i, j)] -= y;
            susceptance[(j, i)] -= y;
        }
        ends.push((a, b, y));
    }

    // Angles (rows = buses) per unit injection (columns = buses).
    let mut angles = DMatrix::<f64>::zeros(n, n);
    if n > 1 {
        let chol = susceptance.cholesky().ok_or_else(|| {
            NetworkError::Singular(
                "reduced susceptance matrix is not positive definite (disconnected network?)"
                    .into(),
            )
        })?;
        let inverse = chol.inverse();
        for i in 0..n {
            for j in 0..n {
                if let (Some(ri), Some(rj)) = (reduced[i], reduced[j]) {
                    angles[(i, j)] = inverse[(ri, rj)];
                }
            }
        }
    }

    let mut entries = DMatrix::<f64>::zeros(case.lines.len(), n);
    for (l, &(a, b, y)) in ends.iter().enumerate() {
        for bus in 0..n {
            entries[(l, bus)] = y * (angles[(a, bus)] - angles[(b, bus)]);
        }
    }
    for l in 0..case.lines.len() {
        entries[(l, reference)] = 0.0;
    }

    Ok(PtdfMatrix {
        reference_bus: case.reference_bus.clone(),
        bus_ids: case.buses.iter().map(|b| b.id.clone()).collect(),
        line_ids: case.lines.iter().map(|l| l.id.clone()).collect(),
        entries,
    })
}

/// Line flows (MW) for a vector of nodal net injections in bus order.
pub fn line_flows(ptdf: &PtdfMatrix, injections: &[f64]) -> Result<Vec<f64>, NetworkError> {
    if injections.len() != ptdf.bus_ids.len() {
        return Err(NetworkError::DimensionMismatch {
            expected: ptdf.bus_ids.len(),
            actual: injections.len(),
        });
    }
    Ok((0..ptdf.line_ids.len())
        .map(|l| {
            injections
                .iter()
                .enumerate()
                .map(|(i, p)| ptdf.entries[(l, i)] * p)
                .sum()
        })
        .collect())
}
