//! JSON case files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::validate::{validate_case, Diagnostic, Severity};
use super::{
    BusSpec, CostSegment, FuelClass, GeneratorSpec, LineSpec, MarketCase, ReserveRequirements,
    ZoneRequirement, DEFAULT_ZONE,
};

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("cannot read case file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed case file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid case ({} problem(s)):\n{}", .0.len(), format_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A validated case plus the non-fatal diagnostics raised while loading it.
#[derive(Debug, Clone)]
pub struct LoadedCase {
    pub case: MarketCase,
    pub warnings: Vec<Diagnostic>,
}

/// A scalar applies to every interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Series {
    Scalar(f64),
    Values(Vec<f64>),
}

impl Series {
    fn expand(self, horizon: usize) -> Vec<f64> {
        match self {
            Series::Scalar(v) => vec![v; horizon],
            Series::Values(v) => v,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    horizon: usize,
    reference_bus: String,
    buses: Vec<BusFile>,
    #[serde(default)]
    lines: Vec<LineFile>,
    generators: Vec<GeneratorFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zones: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    requirements: Option<BTreeMap<String, RequirementFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offers: Option<BTreeMap<String, OfferFile>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusFile {
    id: String,
    demand: Series,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineFile {
    id: String,
    from_bus: String,
    to_bus: String,
    reactance: f64,
    rating: Series,
    #[serde(default = "default_true")]
    monitored: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorFile {
    id: String,
    bus: String,
    fuel_class: FuelClass,
    p_min: f64,
    p_max: f64,
    rsu: f64,
    rsd: f64,
    ru_5min: f64,
    ru_10min: f64,
    ru_60min: f64,
    rd_60min: f64,
    cost_startup: f64,
    cost_noload: f64,
    fuel_cost_segments: Vec<CostSegment>,
    min_up: u32,
    min_down: u32,
    initial_status: i32,
    initial_power: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequirementFile {
    reg: Series,
    spin: Series,
    nsp: Series,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OfferFile {
    reg: Series,
    spin: Series,
    nsp: Series,
}

/// Builds the in-memory case without validating it. Offers keyed by
/// unknown generators are returned as error diagnostics.
fn build_case(file: CaseFile) -> (MarketCase, Vec<Diagnostic>) {
    let horizon = file.horizon;
    let buses: Vec<BusSpec> = file
        .buses
        .into_iter()
        .map(|b| BusSpec {
            id: b.id,
            demand: b.demand.expand(horizon),
        })
        .collect();
    let lines = file
        .lines
        .into_iter()
        .map(|l| LineSpec {
            id: l.id,
            from_bus: l.from_bus,
            to_bus: l.to_bus,
            reactance: l.reactance,
            rating: l.rating.expand(horizon),
            monitored: l.monitored,
        })
        .collect();
    let mut offers = file.offers.unwrap_or_default();
    let generators = file
        .generators
        .into_iter()
        .map(|g| {
            let (reg, spin, nsp) = match offers.remove(&g.id) {
                Some(o) => (
                    o.reg.expand(horizon),
                    o.spin.expand(horizon),
                    o.nsp.expand(horizon),
                ),
                None => (vec![0.0; horizon], vec![0.0; horizon], vec![0.0; horizon]),
            };
            GeneratorSpec {
                id: g.id,
                bus: g.bus,
                fuel_class: g.fuel_class,
                p_min: g.p_min,
                p_max: g.p_max,
                rsu: g.rsu,
                rsd: g.rsd,
                ru_5min: g.ru_5min,
                ru_10min: g.ru_10min,
                ru_60min: g.ru_60min,
                rd_60min: g.rd_60min,
                cost_startup: g.cost_startup,
                cost_noload: g.cost_noload,
                fuel_cost_segments: g.fuel_cost_segments,
                min_up: g.min_up,
                min_down: g.min_down,
                offer_reg: reg,
                offer_spin: spin,
                offer_nsp: nsp,
                initial_status: g.initial_status,
                initial_power: g.initial_power,
            }
        })
        .collect();
    let zones = file.zones.unwrap_or_else(|| {
        buses
            .iter()
            .map(|b| (b.id.clone(), DEFAULT_ZONE.to_string()))
            .collect()
    });
    let requirements = match file.requirements {
        Some(reqs) => ReserveRequirements {
            zones: reqs
                .into_iter()
                .map(|(z, r)| {
                    (
                        z,
                        ZoneRequirement {
                            reg: r.reg.expand(horizon),
                            spin: r.spin.expand(horizon),
                            nsp: r.nsp.expand(horizon),
                        },
                    )
                })
                .collect(),
        },
        None => {
            let ids: std::collections::BTreeSet<&str> =
                zones.values().map(String::as_str).collect();
            ReserveRequirements::zeros(ids, horizon)
        }
    };
    let orphans = offers
        .into_keys()
        .map(|id| Diagnostic::error(&id, format!("offers given for unknown generator `{id}`")))
        .collect();
    let case = MarketCase {
        horizon,
        reference_bus: file.reference_bus,
        buses,
        lines,
        generators,
        zones,
        requirements,
    };
    (case, orphans)
}

/// Parses and validates a case document. Start-up ramps below `p_min` are
/// raised to `p_min` and reported as warnings.
pub fn parse_case(text: &str) -> Result<LoadedCase, CaseError> {
    let file: CaseFile = serde_json::from_str(text)?;
    let (mut case, mut diagnostics) = build_case(file);
    diagnostics.extend(validate_case(&case));
    let (errors, warnings): (Vec<_>, Vec<_>) = diagnostics
        .into_iter()
        .partition(|d| d.severity == Severity::Error);
    if !errors.is_empty() {
        return Err(CaseError::Validation(errors));
    }
    for g in &mut case.generators {
        if g.rsu < g.p_min {
            g.rsu = g.p_min;
        }
    }
    Ok(LoadedCase { case, warnings })
}

pub fn load_case(path: impl AsRef<Path>) -> Result<LoadedCase, CaseError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CaseError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_case(&text)
}

/// Serializes a case in the same schema [`load_case`] reads.
pub fn case_to_json(case: &MarketCase) -> String {
    let file = CaseFile {
        horizon: case.horizon,
        reference_bus: case.reference_bus.clone(),
        buses: case
            .buses
            .iter()
            .map(|b| BusFile {
                id: b.id.clone(),
                demand: Series::Values(b.demand.clone()),
            })
            .collect(),
        lines: case
            .lines
            .iter()
            .map(|l| LineFile {
                id: l.id.clone(),
                from_bus: l.from_bus.clone(),
                to_bus: l.to_bus.clone(),
                reactance: l.reactance,
                rating: Series::Values(l.rating.clone()),
                monitored: l.monitored,
            })
            .collect(),
        generators: case
            .generators
            .iter()
            .map(|g| GeneratorFile {
                id: g.id.clone(),
                bus: g.bus.clone(),
                fuel_class: g.fuel_class,
                p_min: g.p_min,
                p_max: g.p_max,
                rsu: g.rsu,
                rsd: g.rsd,
                ru_5min: g.ru_5min,
                ru_10min: g.ru_10min,
                ru_60min: g.ru_60min,
                rd_60min: g.rd_60min,
                cost_startup: g.cost_startup,
                cost_noload: g.cost_noload,
                fuel_cost_segments: g.fuel_cost_segments.clone(),
                min_up: g.min_up,
                min_down: g.min_down,
                initial_status: g.initial_status,
                initial_power: g.initial_power,
            })
            .collect(),
        zones: Some(case.zones.clone()),
        requirements: Some(
            case.requirements
                .zones
                .iter()
                .map(|(z, r)| {
                    (
                        z.clone(),
                        RequirementFile {
                            reg: Series::Values(r.reg.clone()),
                            spin: Series::Values(r.spin.clone()),
                            nsp: Series::Values(r.nsp.clone()),
                        },
                    )
                })
                .collect(),
        ),
        offers: Some(
            case.generators
                .iter()
                .map(|g| {
                    (
                        g.id.clone(),
                        OfferFile {
                            reg: Series::Values(g.offer_reg.clone()),
                            spin: Series::Values(g.offer_spin.clone()),
                            nsp: Series::Values(g.offer_nsp.clone()),
                        },
                    )
                })
                .collect(),
        ),
    };
    serde_json::to_string_pretty(&file).expect("case serialization cannot fail")
}

pub fn write_case(case: &MarketCase, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, case_to_json(case))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "horizon": 1,
        "reference_bus": "B1",
        "buses": [{"id": "B1", "demand": 10}],
        "generators": [{
            "id": "G1", "bus": "B1", "fuel_class": "NG",
            "p_min": 0, "p_max": 50, "rsu": 50, "rsd": 50,
            "ru_5min": 5, "ru_10min": 10, "ru_60min": 50, "rd_60min": 50,
            "cost_startup": 0, "cost_noload": 0,
            "fuel_cost_segments": [{"capacity": 50, "marginal_cost": 20}],
            "min_up": 1, "min_down": 1, "initial_status": 1, "initial_power": 10
        }]
    }"#;

    #[test]
    fn minimal_case_loads() {
        let loaded = parse_case(MINIMAL).unwrap();
        assert_eq!(loaded.case.horizon, 1);
        assert_eq!(loaded.case.generators.len(), 1);
        assert!(loaded.warnings.is_empty());
        assert_eq!(loaded.case.zone_of_bus("B1"), Some(DEFAULT_ZONE));
        assert_eq!(
            loaded.case.requirements.get(DEFAULT_ZONE, 0),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn unknown_bus_is_named() {
        let text = MINIMAL.replace(r#""bus": "B1""#, r#""bus": "B9""#);
        match parse_case(&text) {
            Err(CaseError::Validation(diags)) => {
                assert!(diags.iter().any(|d| d.message.contains("B9")), "{diags:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace(r#""horizon": 1,"#, r#""horizon": 1, "losses": true,"#);
        assert!(matches!(parse_case(&text), Err(CaseError::Parse(_))));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(parse_case("{ not json"), Err(CaseError::Parse(_))));
    }

    #[test]
    fn startup_ramp_is_clamped_with_warning() {
        let text = MINIMAL
            .replace(r#""p_min": 0"#, r#""p_min": 20"#)
            .replace(r#""rsu": 50"#, r#""rsu": 5"#)
            .replace(r#""initial_power": 10"#, r#""initial_power": 20"#)
            .replace(r#""demand": 10"#, r#""demand": 20"#);
        let loaded = parse_case(&text).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.case.generators[0].rsu, 20.0);
    }

    #[test]
    fn offers_for_unknown_generator_fail_validation() {
        let text = MINIMAL.replacen(
            r#""horizon": 1,"#,
            r#""horizon": 1, "offers": {"GX": {"reg": 1, "spin": 1, "nsp": 1}},"#,
            1,
        );
        assert!(matches!(parse_case(&text), Err(CaseError::Validation(_))));
    }
}
