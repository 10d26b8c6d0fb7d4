//! Market case data model.
//!
//! A [`MarketCase`] is the immutable input to every later stage: the
//! transmission grid, the generator fleet with its technical and cost data,
//! hourly nodal demand, the bus-to-zone partition and the zonal reserve
//! requirements. Every input parameter of the clearing model lives on one of
//! the types below:
//!
//! | symbol               | field                                        |
//! |----------------------|----------------------------------------------|
//! | P^min, P^max         | [`GeneratorSpec::p_min`], [`GeneratorSpec::p_max`] |
//! | RSU, RSD             | [`GeneratorSpec::rsu`], [`GeneratorSpec::rsd`] |
//! | RU^5min, RU^10min    | [`GeneratorSpec::ru_5min`], [`GeneratorSpec::ru_10min`] |
//! | RU^60min, RD^60min   | [`GeneratorSpec::ru_60min`], [`GeneratorSpec::rd_60min`] |
//! | C^SU, C^NL           | [`GeneratorSpec::cost_startup`], [`GeneratorSpec::cost_noload`] |
//! | C (per load curve)   | [`GeneratorSpec::fuel_cost_segments`]        |
//! | UT, DT               | [`GeneratorSpec::min_up`], [`GeneratorSpec::min_down`] |
//! | offers               | [`GeneratorSpec::offer_reg`], `offer_spin`, `offer_nsp` |
//! | D                    | [`BusSpec::demand`]                          |
//! | F̄                    | [`LineSpec::rating`]                         |
//! | RR^REG/SPIN/NSP      | [`ReserveRequirements`]                      |
//!
//! Shift factors are derived from line reactances by [`crate::network`].

mod io;
mod validate;
mod variant;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{case_to_json, load_case, parse_case, write_case, CaseError, LoadedCase};
pub use validate::{validate_case, Diagnostic, Severity};
pub use variant::{CapacityOption, ParseVariantError, RequirementOption, VariantConfig};

/// Zone used when a case file carries no `zones` map.
pub const DEFAULT_ZONE: &str = "SYSTEM";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FuelClass {
    NG,
    BIT,
    NUC,
    SOL,
    WND,
    HYD,
    OTH,
}

impl FuelClass {
    pub const ALL: [FuelClass; 7] = [
        FuelClass::NG,
        FuelClass::BIT,
        FuelClass::NUC,
        FuelClass::SOL,
        FuelClass::WND,
        FuelClass::HYD,
        FuelClass::OTH,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FuelClass::NG => "NG",
            FuelClass::BIT => "BIT",
            FuelClass::NUC => "NUC",
            FuelClass::SOL => "SOL",
            FuelClass::WND => "WND",
            FuelClass::HYD => "HYD",
            FuelClass::OTH => "OTH",
        }
    }
}

impl fmt::Display for FuelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FuelClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FuelClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown fuel class `{s}`"))
    }
}

/// One block of a piecewise-linear convex fuel cost curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSegment {
    /// Width of the block in MW.
    pub capacity: f64,
    /// $/MWh for output inside this block.
    pub marginal_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub id: String,
    pub bus: String,
    pub fuel_class: FuelClass,
    pub p_min: f64,
    pub p_max: f64,
    /// Start-up ramp capability (MW).
    pub rsu: f64,
    /// Shut-down ramp capability (MW).
    pub rsd: f64,
    /// MW deliverable within 5 minutes; caps cleared regulation.
    pub ru_5min: f64,
    /// MW deliverable within 10 minutes; caps cleared spinning reserve.
    pub ru_10min: f64,
    pub ru_60min: f64,
    pub rd_60min: f64,
    pub cost_startup: f64,
    /// $ per online hour.
    pub cost_noload: f64,
    /// Ordered cost blocks; widths sum to `p_max`.
    pub fuel_cost_segments: Vec<CostSegment>,
    /// Minimum up time in hours.
    pub min_up: u32,
    /// Minimum down time in hours.
    pub min_down: u32,
    pub offer_reg: Vec<f64>,
    pub offer_spin: Vec<f64>,
    pub offer_nsp: Vec<f64>,
    /// Hours already online (positive) or offline (negative) before the horizon.
    pub initial_status: i32,
    pub initial_power: f64,
}

impl GeneratorSpec {
    pub fn initially_on(&self) -> bool {
        self.initial_status > 0
    }

    /// Fuel cost of producing `p` MW, filling the cost blocks in order.
    pub fn fuel_cost(&self, p: f64) -> f64 {
        let mut left = p.max(0.0);
        let mut cost = 0.0;
        for seg in &self.fuel_cost_segments {
            let take = left.min(seg.capacity);
            cost += take * seg.marginal_cost;
            left -= take;
            if left <= 0.0 {
                break;
            }
        }
        // Output beyond the declared blocks is priced at the last block.
        if left > 0.0 {
            if let Some(last) = self.fuel_cost_segments.last() {
                cost += left * last.marginal_cost;
            }
        }
        cost
    }

    pub fn first_segment_cost(&self) -> f64 {
        self.fuel_cost_segments
            .first()
            .map(|s| s.marginal_cost)
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BusSpec {
    pub id: String,
    /// MW per interval.
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSpec {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Per-unit series reactance.
    pub reactance: f64,
    /// MW limit per interval.
    pub rating: Vec<f64>,
    /// Only monitored lines get flow limits in the clearing model.
    pub monitored: bool,
}

/// Hourly zonal requirement for the three upward products.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneRequirement {
    pub reg: Vec<f64>,
    pub spin: Vec<f64>,
    pub nsp: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReserveRequirements {
    pub zones: BTreeMap<String, ZoneRequirement>,
}

impl ReserveRequirements {
    pub fn zeros<'a>(zones: impl IntoIterator<Item = &'a str>, horizon: usize) -> Self {
        let zones = zones
            .into_iter()
            .map(|z| {
                (
                    z.to_string(),
                    ZoneRequirement {
                        reg: vec![0.0; horizon],
                        spin: vec![0.0; horizon],
                        nsp: vec![0.0; horizon],
                    },
                )
            })
            .collect();
        ReserveRequirements { zones }
    }

    /// `(reg, spin, nsp)` for one zone and 0-based interval; zero when absent.
    pub fn get(&self, zone: &str, t: usize) -> (f64, f64, f64) {
        match self.zones.get(zone) {
            Some(r) => (
                r.reg.get(t).copied().unwrap_or(0.0),
                r.spin.get(t).copied().unwrap_or(0.0),
                r.nsp.get(t).copied().unwrap_or(0.0),
            ),
            None => (0.0, 0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketCase {
    /// Number of hourly intervals.
    pub horizon: usize,
    pub reference_bus: String,
    pub buses: Vec<BusSpec>,
    pub lines: Vec<LineSpec>,
    pub generators: Vec<GeneratorSpec>,
    /// bus id → zone id
    pub zones: BTreeMap<String, String>,
    pub requirements: ReserveRequirements,
}

impl MarketCase {
    /// Sorted distinct zone ids.
    pub fn zone_ids(&self) -> Vec<String> {
        self.zones
            .values()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn bus_position(&self) -> HashMap<&str, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.as_str(), i))
            .collect()
    }

    pub fn generator(&self, id: &str) -> Option<&GeneratorSpec> {
        self.generators.iter().find(|g| g.id == id)
    }

    pub fn zone_of_bus(&self, bus: &str) -> Option<&str> {
        self.zones.get(bus).map(String::as_str)
    }

    pub fn zone_of_generator(&self, gen: &GeneratorSpec) -> Option<&str> {
        self.zone_of_bus(&gen.bus)
    }

    /// Indices of the generators located in `zone`.
    pub fn generators_in_zone(&self, zone: &str) -> Vec<usize> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| self.zone_of_bus(&g.bus) == Some(zone))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn total_demand(&self, t: usize) -> f64 {
        self.buses
            .iter()
            .map(|b| b.demand.get(t).copied().unwrap_or(0.0))
            .sum()
    }

    pub fn zonal_demand(&self, zone: &str, t: usize) -> f64 {
        self.buses
            .iter()
            .filter(|b| self.zone_of_bus(&b.id) == Some(zone))
            .map(|b| b.demand.get(t).copied().unwrap_or(0.0))
            .sum()
    }
}
