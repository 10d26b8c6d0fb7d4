//! Generator settlement: energy and reserve costs, revenues and profits.
//!
//! Energy is paid the LMP at the generator's bus. Online reserves (regulation
//! and spinning) are costed at the unit's lost opportunity: the margin
//! between LMP and its average fuel cost, floored at zero. Non-spinning
//! reserve is costed at its offer. Reserve revenue is paid at the clearing
//! price of the generator's own zone.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::case::{FuelClass, MarketCase, VariantConfig};
use crate::engine::{CommitmentSolution, PriceSet};

#[derive(Debug, Error)]
pub enum SettlementError {
    #[error("prices were composed for {prices:?} requirements but the variant is {variant}")]
    VariantMismatch {
        variant: VariantConfig,
        prices: crate::case::RequirementOption,
    },
    #[error("fuel class {0} has no generators")]
    EmptyClass(FuelClass),
}

/// Settlement of one generator over the horizon, in $.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorLedger {
    pub gen: String,
    pub fuel_class: FuelClass,
    pub zone: String,
    pub energy_mwh: f64,
    pub ecos: f64,
    pub erev: f64,
    pub epro: f64,
    /// Lost opportunity per interval ($/MWh); `None` while offline.
    pub lo: Vec<Option<f64>>,
    /// max(lo, 0) while online, 0 while offline ($/MWh).
    pub unit_cost_online: Vec<f64>,
    /// Online reserve cost under the variant's capacity option.
    pub rcos_online: f64,
    /// Σ unit cost · (r_reg + r_spin).
    pub rcos_online_additive: f64,
    /// Σ unit cost · max(r_reg, r_spin).
    pub rcos_online_overlap: f64,
    pub rcos_nsp: f64,
    pub rrev_reg: f64,
    pub rrev_spin: f64,
    pub rrev_nsp: f64,
    pub rpro_online: f64,
    pub rpro_nsp: f64,
}

impl GeneratorLedger {
    pub fn ancillary_revenue(&self) -> f64 {
        self.rrev_reg + self.rrev_spin + self.rrev_nsp
    }

    pub fn total_revenue(&self) -> f64 {
        self.erev + self.ancillary_revenue()
    }
}

/// System sums of the ledger columns.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerTotals {
    pub energy_mwh: f64,
    pub ecos: f64,
    pub erev: f64,
    pub epro: f64,
    pub rcos_online: f64,
    pub rcos_online_additive: f64,
    pub rcos_online_overlap: f64,
    pub rcos_nsp: f64,
    pub rrev_reg: f64,
    pub rrev_spin: f64,
    pub rrev_nsp: f64,
    pub rpro_online: f64,
    pub rpro_nsp: f64,
}

impl LedgerTotals {
    fn add(&mut self, l: &GeneratorLedger) {
        self.energy_mwh += l.energy_mwh;
        self.ecos += l.ecos;
        self.erev += l.erev;
        self.epro += l.epro;
        self.rcos_online += l.rcos_online;
        self.rcos_online_additive += l.rcos_online_additive;
        self.rcos_online_overlap += l.rcos_online_overlap;
        self.rcos_nsp += l.rcos_nsp;
        self.rrev_reg += l.rrev_reg;
        self.rrev_spin += l.rrev_spin;
        self.rrev_nsp += l.rrev_nsp;
        self.rpro_online += l.rpro_online;
        self.rpro_nsp += l.rpro_nsp;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettlementReport {
    pub variant: VariantConfig,
    pub generators: Vec<GeneratorLedger>,
}

impl SettlementReport {
    pub fn totals(&self) -> LedgerTotals {
        let mut t = LedgerTotals::default();
        for l in &self.generators {
            t.add(l);
        }
        t
    }

    pub fn totals_by_class(&self) -> BTreeMap<FuelClass, LedgerTotals> {
        let mut out: BTreeMap<FuelClass, LedgerTotals> = BTreeMap::new();
        for l in &self.generators {
            out.entry(l.fuel_class).or_default().add(l);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "gen",
            "fuel_class",
            "zone",
            "energy_mwh",
            "ecos",
            "erev",
            "epro",
            "rcos_online",
            "rcos_online_additive",
            "rcos_online_overlap",
            "rcos_nsp",
            "rrev_reg",
            "rrev_spin",
            "rrev_nsp",
            "rpro_online",
            "rpro_nsp",
        ])?;
        for l in &self.generators {
            let mut rec = vec![l.gen.clone(), l.fuel_class.to_string(), l.zone.clone()];
            rec.extend(
                [
                    l.energy_mwh,
                    l.ecos,
                    l.erev,
                    l.epro,
                    l.rcos_online,
                    l.rcos_online_additive,
                    l.rcos_online_overlap,
                    l.rcos_nsp,
                    l.rrev_reg,
                    l.rrev_spin,
                    l.rrev_nsp,
                    l.rpro_online,
                    l.rpro_nsp,
                ]
                .iter()
                .map(|v| crate::num(*v)),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-interval lost opportunity and online unit cost.
    pub fn write_unit_costs_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gen", "t", "lo", "unit_cost_online"])?;
        for l in &self.generators {
            for (t, (lo, uc)) in l.lo.iter().zip(&l.unit_cost_online).enumerate() {
                w.write_record([
                    l.gen.clone(),
                    (t + 1).to_string(),
                    lo.map_or_else(String::new, crate::num),
                    crate::num(*uc),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn settle(
    case: &MarketCase,
    variant: VariantConfig,
    solution: &CommitmentSolution,
    prices: &PriceSet,
) -> Result<SettlementReport, SettlementError> {
    if prices.requirements != variant.requirements {
        return Err(SettlementError::VariantMismatch {
            variant,
            prices: prices.requirements,
        });
    }
    let bus_pos = case.bus_position();
    let generators = case
        .generators
        .iter()
        .enumerate()
        .map(|(g, spec)| {
            let zone = case.zone_of_bus(&spec.bus).unwrap_or_default().to_string();
            let lmp = &prices.lmp[bus_pos[spec.bus.as_str()]];
            let mcp = &prices.mcp[&zone];
            let mut l = GeneratorLedger {
                gen: spec.id.clone(),
                fuel_class: spec.fuel_class,
                zone,
                energy_mwh: 0.0,
                ecos: 0.0,
                erev: 0.0,
                epro: 0.0,
                lo: Vec::with_capacity(case.horizon),
                unit_cost_online: Vec::with_capacity(case.horizon),
                rcos_online: 0.0,
                rcos_online_additive: 0.0,
                rcos_online_overlap: 0.0,
                rcos_nsp: 0.0,
                rrev_reg: 0.0,
                rrev_spin: 0.0,
                rrev_nsp: 0.0,
                rpro_online: 0.0,
                rpro_nsp: 0.0,
            };
            for t in 0..case.horizon {
                let p = solution.p[g][t];
                let (reg, spin, nsp) = (
                    solution.r_reg[g][t],
                    solution.r_spin[g][t],
                    solution.r_nsp[g][t],
                );
                let fuel = spec.fuel_cost(p);
                l.energy_mwh += p;
                l.ecos += fuel;
                l.erev += lmp[t] * p;

                let online = solution.u[g][t] > 0.5;
                let lo = online.then(|| {
                    if p > 0.0 {
                        lmp[t] - fuel / p
                    } else {
                        lmp[t] - spec.first_segment_cost()
                    }
                });
                let uc = lo.map_or(0.0, |v| v.max(0.0));
                l.lo.push(lo);
                l.unit_cost_online.push(uc);
                l.rcos_online_additive += uc * (reg + spin);
                l.rcos_online_overlap += uc * reg.max(spin);
                l.rcos_nsp += spec.offer_nsp[t] * nsp;
                l.rrev_reg += mcp[t].reg * reg;
                l.rrev_spin += mcp[t].spin * spin;
                l.rrev_nsp += mcp[t].nsp * nsp;
            }
            l.rcos_online = if variant.is_sharing() {
                l.rcos_online_overlap
            } else {
                l.rcos_online_additive
            };
            l.epro = l.erev - l.ecos;
            l.rpro_online = (l.rrev_reg + l.rrev_spin) - l.rcos_online;
            l.rpro_nsp = l.rrev_nsp - l.rcos_nsp;
            l
        })
        .collect();
    Ok(SettlementReport {
        variant,
        generators,
    })
}

/// Fuel-class shares in percent, plus the absolute amounts behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct FuelShare {
    pub class: FuelClass,
    pub capacity_mw: f64,
    pub capacity_share: f64,
    pub energy_revenue: f64,
    pub energy_revenue_share: f64,
    pub ancillary_revenue: f64,
    pub ancillary_revenue_share: f64,
    pub total_revenue: f64,
    pub total_revenue_share: f64,
}

fn share(part: f64, total: f64) -> f64 {
    if total == 0.0 {
        0.0
    } else {
        100.0 * part / total
    }
}

/// Shares of capacity and revenue per fuel class present in the fleet.
/// A column whose system total is zero reports 0% for every class.
pub fn aggregate_by_fuel(report: &SettlementReport, case: &MarketCase) -> Vec<FuelShare> {
    let mut sums: BTreeMap<FuelClass, [f64; 4]> = BTreeMap::new();
    for (l, g) in report.generators.iter().zip(&case.generators) {
        let s = sums.entry(l.fuel_class).or_default();
        s[0] += g.p_max;
        s[1] += l.erev;
        s[2] += l.ancillary_revenue();
        s[3] += l.total_revenue();
    }
    let mut totals = [0.0; 4];
    for s in sums.values() {
        for i in 0..4 {
            totals[i] += s[i];
        }
    }
    sums.into_iter()
        .map(|(class, s)| FuelShare {
            class,
            capacity_mw: s[0],
            capacity_share: share(s[0], totals[0]),
            energy_revenue: s[1],
            energy_revenue_share: share(s[1], totals[1]),
            ancillary_revenue: s[2],
            ancillary_revenue_share: share(s[2], totals[2]),
            total_revenue: s[3],
            total_revenue_share: share(s[3], totals[3]),
        })
        .collect()
}

pub fn write_fuel_shares_csv<W: Write>(shares: &[FuelShare], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "fuel_class",
        "capacity_mw",
        "capacity_share_pct",
        "energy_revenue",
        "energy_revenue_share_pct",
        "ancillary_revenue",
        "ancillary_revenue_share_pct",
        "total_revenue",
        "total_revenue_share_pct",
    ])?;
    for s in shares {
        let mut rec = vec![s.class.to_string()];
        rec.extend(
            [
                s.capacity_mw,
                s.capacity_share,
                s.energy_revenue,
                s.energy_revenue_share,
                s.ancillary_revenue,
                s.ancillary_revenue_share,
                s.total_revenue,
                s.total_revenue_share,
            ]
            .iter()
            .map(|v| crate::num(*v)),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevenueColumn {
    Energy,
    Ancillary,
    Total,
}

impl RevenueColumn {
    pub const ALL: [RevenueColumn; 3] = [
        RevenueColumn::Energy,
        RevenueColumn::Ancillary,
        RevenueColumn::Total,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RevenueColumn::Energy => "energy_revenue",
            RevenueColumn::Ancillary => "ancillary_revenue",
            RevenueColumn::Total => "total_revenue",
        }
    }

    fn of(self, l: &GeneratorLedger) -> f64 {
        match self {
            RevenueColumn::Energy => l.erev,
            RevenueColumn::Ancillary => l.ancillary_revenue(),
            RevenueColumn::Total => l.total_revenue(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub values: Vec<(String, f64)>,
}

pub fn revenue_distribution(
    report: &SettlementReport,
    class: FuelClass,
    column: RevenueColumn,
) -> Result<Distribution, SettlementError> {
    let values: Vec<(String, f64)> = report
        .generators
        .iter()
        .filter(|l| l.fuel_class == class)
        .map(|l| (l.gen.clone(), column.of(l)))
        .collect();
    if values.is_empty() {
        return Err(SettlementError::EmptyClass(class));
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|(_, v)| v).sum::<f64>() / n;
    let var = values.iter().map(|(_, v)| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Distribution {
        mean,
        stddev: var.sqrt(),
        values,
    })
}

/// Per-generator revenues of one class followed by `mean` and `stddev` rows.
pub fn write_distribution_csv<W: Write>(
    report: &SettlementReport,
    class: FuelClass,
    out: W,
) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let dists = RevenueColumn::ALL
        .iter()
        .map(|&c| revenue_distribution(report, class, c))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["gen"];
    header.extend(RevenueColumn::ALL.iter().map(|c| c.as_str()));
    w.write_record(&header)?;
    for (i, (gen, _)) in dists[0].values.iter().enumerate() {
        let mut rec = vec![gen.clone()];
        rec.extend(dists.iter().map(|d| crate::num(d.values[i].1)));
        w.write_record(&rec)?;
    }
    for (label, pick) in [("mean", 0), ("stddev", 1)] {
        let mut rec = vec![label.to_string()];
        rec.extend(
            dists
                .iter()
                .map(|d| crate::num(if pick == 0 { d.mean } else { d.stddev })),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
