//! Fixture loading and small synthetic cases.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reserve_market::case::{
    load_case, BusSpec, CostSegment, FuelClass, GeneratorSpec, LineSpec, MarketCase,
    ReserveRequirements, ZoneRequirement, DEFAULT_ZONE,
};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> MarketCase {
    load_case(fixture_path(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
        .case
}

/// A flexible unit: ramps equal to capacity, one-hour minimum times,
/// initially offline, zero reserve offers.
pub fn generator(
    id: &str,
    bus: &str,
    p_min: f64,
    p_max: f64,
    segments: &[(f64, f64)],
    horizon: usize,
) -> GeneratorSpec {
    GeneratorSpec {
        id: id.to_string(),
        bus: bus.to_string(),
        fuel_class: FuelClass::NG,
        p_min,
        p_max,
        rsu: p_max,
        rsd: p_max,
        ru_5min: p_max,
        ru_10min: p_max,
        ru_60min: p_max,
        rd_60min: p_max,
        cost_startup: 0.0,
        cost_noload: 0.0,
        fuel_cost_segments: segments
            .iter()
            .map(|&(capacity, marginal_cost)| CostSegment {
                capacity,
                marginal_cost,
            })
            .collect(),
        min_up: 1,
        min_down: 1,
        offer_reg: vec![0.0; horizon],
        offer_spin: vec![0.0; horizon],
        offer_nsp: vec![0.0; horizon],
        initial_status: -1,
        initial_power: 0.0,
    }
}

pub fn bus(id: &str, demand: Vec<f64>) -> BusSpec {
    BusSpec {
        id: id.to_string(),
        demand,
    }
}

pub fn line(
    id: &str,
    from: &str,
    to: &str,
    reactance: f64,
    rating: f64,
    horizon: usize,
) -> LineSpec {
    LineSpec {
        id: id.to_string(),
        from_bus: from.to_string(),
        to_bus: to.to_string(),
        reactance,
        rating: vec![rating; horizon],
        monitored: true,
    }
}

/// Assembles a case with every bus in the default zone and zero requirements.
pub fn case(
    horizon: usize,
    buses: Vec<BusSpec>,
    lines: Vec<LineSpec>,
    generators: Vec<GeneratorSpec>,
) -> MarketCase {
    let zones: BTreeMap<String, String> = buses
        .iter()
        .map(|b| (b.id.clone(), DEFAULT_ZONE.to_string()))
        .collect();
    MarketCase {
        horizon,
        reference_bus: buses[0].id.clone(),
        buses,
        lines,
        generators,
        zones,
        requirements: ReserveRequirements::zeros([DEFAULT_ZONE], horizon),
    }
}

pub fn set_requirement(case: &mut MarketCase, zone: &str, reg: f64, spin: f64, nsp: f64) {
    let h = case.horizon;
    case.requirements.zones.insert(
        zone.to_string(),
        ZoneRequirement {
            reg: vec![reg; h],
            spin: vec![spin; h],
            nsp: vec![nsp; h],
        },
    );
}

/// Buses B1..B3 in a ring of equal reactances, reference B3.
pub fn ring3() -> MarketCase {
    let mut c = case(
        1,
        vec![
            bus("B1", vec![0.0]),
            bus("B2", vec![0.0]),
            bus("B3", vec![0.0]),
        ],
        vec![
            line("L12", "B1", "B2", 0.1, 1000.0, 1),
            line("L23", "B2", "B3", 0.1, 1000.0, 1),
            line("L13", "B1", "B3", 0.1, 1000.0, 1),
        ],
        Vec::new(),
    );
    c.reference_bus = "B3".into();
    c
}

/// Connected network of `n` buses: a random spanning tree plus `extra`
/// random chords, reactances in [0.05, 0.5].
pub fn random_network(n: usize, extra: usize, seed: u64) -> MarketCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let buses: Vec<BusSpec> = (1..=n).map(|i| bus(&format!("B{i}"), vec![0.0])).collect();
    let mut lines = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let x = rng.gen_range(0.05..0.5);
        lines.push(line(
            &format!("L{}", lines.len() + 1),
            &buses[j].id,
            &buses[i].id,
            x,
            1000.0,
            1,
        ));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n);
        while b == a {
            b = rng.gen_range(0..n);
        }
        let x = rng.gen_range(0.05..0.5);
        lines.push(line(
            &format!("L{}", lines.len() + 1),
            &buses[a].id,
            &buses[b].id,
            x,
            1000.0,
            1,
        ));
    }
    let mut c = case(1, buses, lines, Vec::new());
    c.reference_bus = format!("B{}", rng.gen_range(1..=n));
    c
}
