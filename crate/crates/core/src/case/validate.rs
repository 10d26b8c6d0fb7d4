use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use super::MarketCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Id of the offending bus, line, generator or zone.
    pub entity: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(entity: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            entity: entity.to_string(),
            message: message.into(),
        }
    }

    pub fn warning(entity: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            entity: entity.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{level} [{}]: {}", self.entity, self.message)
    }
}

const SUM_TOL: f64 = 1e-6;

/// Checks every invariant of a case. An empty list means the case is valid.
pub fn validate_case(case: &MarketCase) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let horizon = case.horizon;
    if horizon == 0 {
        out.push(Diagnostic::error(
            "case",
            "horizon must contain at least one interval",
        ));
    }

    check_ids(case, &mut out);

    let bus_ids: HashSet<&str> = case.buses.iter().map(|b| b.id.as_str()).collect();
    if !bus_ids.contains(case.reference_bus.as_str()) {
        out.push(Diagnostic::error(
            &case.reference_bus,
            format!("reference bus `{}` does not exist", case.reference_bus),
        ));
    }

    for bus in &case.buses {
        check_series(&mut out, &bus.id, "demand", &bus.demand, horizon);
        if !case.zones.contains_key(&bus.id) {
            out.push(Diagnostic::error(
                &bus.id,
                format!("bus `{}` has no zone", bus.id),
            ));
        }
    }
    for bus in case.zones.keys() {
        if !bus_ids.contains(bus.as_str()) {
            out.push(Diagnostic::error(
                bus,
                format!("zone map references unknown bus `{bus}`"),
            ));
        }
    }

    for line in &case.lines {
        for end in [&line.from_bus, &line.to_bus] {
            if !bus_ids.contains(end.as_str()) {
                out.push(Diagnostic::error(
                    &line.id,
                    format!("line `{}` references unknown bus `{end}`", line.id),
                ));
            }
        }
        if line.from_bus == line.to_bus {
            out.push(Diagnostic::error(&line.id, "line connects a bus to itself"));
        }
        if !(line.reactance > 0.0) {
            out.push(Diagnostic::error(&line.id, "reactance must be positive"));
        }
        if line.rating.len() != horizon {
            out.push(Diagnostic::error(
                &line.id,
                format!(
                    "rating has {} values, expected {horizon}",
                    line.rating.len()
                ),
            ));
        }
        if line.rating.iter().any(|r| !(*r > 0.0)) {
            out.push(Diagnostic::error(&line.id, "rating must be positive"));
        }
    }

    for g in &case.generators {
        let id = g.id.as_str();
        if !bus_ids.contains(g.bus.as_str()) {
            out.push(Diagnostic::error(
                id,
                format!("generator `{id}` references unknown bus `{}`", g.bus),
            ));
        }
        if !(g.p_min >= 0.0) {
            out.push(Diagnostic::error(id, "p_min must be non-negative"));
        }
        if !(g.p_min <= g.p_max) {
            out.push(Diagnostic::error(
                id,
                format!("p_min {} exceeds p_max {}", g.p_min, g.p_max),
            ));
        }
        let ramps = [
            ("rsu", g.rsu),
            ("rsd", g.rsd),
            ("ru_5min", g.ru_5min),
            ("ru_10min", g.ru_10min),
            ("ru_60min", g.ru_60min),
            ("rd_60min", g.rd_60min),
        ];
        for (name, v) in ramps {
            if !(v >= 0.0) {
                out.push(Diagnostic::error(
                    id,
                    format!("{name} must be non-negative"),
                ));
            }
        }
        if g.rsu >= 0.0 && g.rsu < g.p_min {
            out.push(Diagnostic::warning(
                id,
                format!("rsu {} below p_min {}; raised to p_min", g.rsu, g.p_min),
            ));
        }
        if g.cost_startup < 0.0 || g.cost_noload < 0.0 {
            out.push(Diagnostic::error(
                id,
                "start-up and no-load costs must be non-negative",
            ));
        }
        if g.fuel_cost_segments.is_empty() {
            out.push(Diagnostic::error(id, "fuel cost curve has no segments"));
        }
        if g.fuel_cost_segments.iter().any(|s| !(s.capacity >= 0.0)) {
            out.push(Diagnostic::error(
                id,
                "cost segment capacity must be non-negative",
            ));
        }
        if g.fuel_cost_segments
            .windows(2)
            .any(|w| w[1].marginal_cost < w[0].marginal_cost)
        {
            out.push(Diagnostic::error(
                id,
                "fuel cost curve is not convex (marginal costs decrease)",
            ));
        }
        let width: f64 = g.fuel_cost_segments.iter().map(|s| s.capacity).sum();
        if !g.fuel_cost_segments.is_empty() && (width - g.p_max).abs() > SUM_TOL {
            out.push(Diagnostic::error(
                id,
                format!("cost segments cover {width} MW but p_max is {}", g.p_max),
            ));
        }
        if g.min_up < 1 || g.min_down < 1 {
            out.push(Diagnostic::error(
                id,
                "min_up and min_down must be at least 1",
            ));
        }
        for (name, series) in [
            ("offer_reg", &g.offer_reg),
            ("offer_spin", &g.offer_spin),
            ("offer_nsp", &g.offer_nsp),
        ] {
            check_series(&mut out, id, name, series, horizon);
        }
        if g.initial_status == 0 {
            out.push(Diagnostic::error(id, "initial_status must be non-zero"));
        } else if g.initial_status > 0 {
            // An empty [p_min, p_max] range is already reported above.
            if g.p_min <= g.p_max
                && (g.initial_power < g.p_min - SUM_TOL || g.initial_power > g.p_max + SUM_TOL)
            {
                out.push(Diagnostic::error(
                    id,
                    format!(
                        "initial_power {} outside [{}, {}] for an online unit",
                        g.initial_power, g.p_min, g.p_max
                    ),
                ));
            }
        } else if g.initial_power != 0.0 {
            out.push(Diagnostic::error(
                id,
                "offline unit must have initial_power 0",
            ));
        }
    }

    let zone_ids: BTreeSet<&str> = case.zones.values().map(String::as_str).collect();
    for (zone, req) in &case.requirements.zones {
        if !zone_ids.contains(zone.as_str()) {
            out.push(Diagnostic::error(
                zone,
                format!("requirements given for unknown zone `{zone}`"),
            ));
        }
        check_series(&mut out, zone, "reg requirement", &req.reg, horizon);
        check_series(&mut out, zone, "spin requirement", &req.spin, horizon);
        check_series(&mut out, zone, "nsp requirement", &req.nsp, horizon);
    }

    if !case.buses.is_empty() && !is_connected(case) {
        out.push(Diagnostic::error(
            "network",
            "transmission graph is not connected",
        ));
    }
    out
}

fn check_series(out: &mut Vec<Diagnostic>, id: &str, name: &str, v: &[f64], horizon: usize) {
    if v.len() != horizon {
        out.push(Diagnostic::error(
            id,
            format!("{name} has {} values, expected {horizon}", v.len()),
        ));
    }
    if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        out.push(Diagnostic::error(
            id,
            format!("{name} must be finite and non-negative"),
        ));
    }
}

fn check_ids(case: &MarketCase, out: &mut Vec<Diagnostic>) {
    let groups: [(&str, Vec<&str>); 3] = [
        ("bus", case.buses.iter().map(|b| b.id.as_str()).collect()),
        ("line", case.lines.iter().map(|l| l.id.as_str()).collect()),
        (
            "generator",
            case.generators.iter().map(|g| g.id.as_str()).collect(),
        ),
    ];
    for (kind, ids) in groups.iter() {
        let mut seen = HashSet::new();
        for id in ids {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                out.push(Diagnostic::error(
                    id,
                    format!("{kind} id `{id}` must be non-empty without whitespace"),
                ));
            }
            if !seen.insert(*id) {
                out.push(Diagnostic::error(id, format!("duplicate {kind} id `{id}`")));
            }
        }
    }
    for zone in case.zones.values() {
        if zone.is_empty() || zone.chars().any(char::is_whitespace) {
            out.push(Diagnostic::error(
                zone,
                "zone id must be non-empty without whitespace",
            ));
        }
    }
}

fn is_connected(case: &MarketCase) -> bool {
    let pos: HashMap<&str, usize> = case.bus_position();
    let n = case.buses.len();
    let mut adj = vec![Vec::new(); n];
    for l in &case.lines {
        if let (Some(&a), Some(&b)) = (pos.get(l.from_bus.as_str()), pos.get(l.to_bus.as_str())) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_case;

    fn small() -> MarketCase {
        parse_case(
            r#"{
            "horizon": 2,
            "reference_bus": "A",
            "buses": [{"id": "A", "demand": 10}, {"id": "B", "demand": [5, 6]}],
            "lines": [{"id": "AB", "from_bus": "A", "to_bus": "B", "reactance": 0.1, "rating": 100}],
            "generators": [{
                "id": "G1", "bus": "A", "fuel_class": "NG",
                "p_min": 10, "p_max": 60, "rsu": 30, "rsd": 30,
                "ru_5min": 5, "ru_10min": 10, "ru_60min": 60, "rd_60min": 60,
                "cost_startup": 100, "cost_noload": 5,
                "fuel_cost_segments": [{"capacity": 30, "marginal_cost": 20}, {"capacity": 30, "marginal_cost": 25}],
                "min_up": 2, "min_down": 2, "initial_status": 3, "initial_power": 15
            }]
        }"#,
        )
        .unwrap()
        .case
    }

    #[test]
    fn valid_case_has_no_diagnostics() {
        assert!(validate_case(&small()).is_empty());
    }

    #[test]
    fn p_min_above_p_max_is_one_error() {
        let mut case = small();
        case.generators[0].p_min = 70.0;
        case.generators[0].rsu = 70.0;
        case.generators[0].initial_power = 60.0;
        let diags = validate_case(&case);
        let errors: Vec<_> = diags
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .collect();
        assert_eq!(errors.len(), 1, "{diags:?}");
        assert!(errors[0].message.contains("exceeds p_max"));
    }

    #[test]
    fn low_startup_ramp_is_a_warning() {
        let mut case = small();
        case.generators[0].rsu = 5.0;
        let diags = validate_case(&case);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
    }

    #[test]
    fn non_convex_cost_curve_is_rejected() {
        let mut case = small();
        case.generators[0].fuel_cost_segments[1].marginal_cost = 10.0;
        assert!(validate_case(&case)
            .iter()
            .any(|d| d.message.contains("not convex")));
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let mut case = small();
        case.lines.clear();
        assert!(validate_case(&case)
            .iter()
            .any(|d| d.message.contains("not connected")));
    }

    #[test]
    fn every_violation_is_listed() {
        let mut case = small();
        case.generators[0].bus = "B9".into();
        case.lines[0].reactance = 0.0;
        case.buses[1].demand[0] = -1.0;
        let diags = validate_case(&case);
        assert!(diags.len() >= 3, "{diags:?}");
        assert!(diags.iter().any(|d| d.message.contains("B9")));
    }
}
