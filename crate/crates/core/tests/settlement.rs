//! Ledger arithmetic, accounting options and fuel-class aggregation.

mod support;

use std::collections::BTreeMap;

use reserve_market::case::{FuelClass, MarketCase, RequirementOption, VariantConfig};
use reserve_market::engine::{CommitmentSolution, PriceSet, ReserveTriple};
use reserve_market::settlement::{
    aggregate_by_fuel, revenue_distribution, settle, RevenueColumn, SettlementError,
};

use support::cases::{bus, case, generator};

/// Cleared quantities for a one-interval case, one entry per generator:
/// (u, p, r_reg, r_spin, r_nsp).
fn solution(rows: &[(f64, f64, f64, f64, f64)]) -> CommitmentSolution {
    let col = |f: fn(&(f64, f64, f64, f64, f64)) -> f64| {
        rows.iter().map(|r| vec![f(r)]).collect::<Vec<_>>()
    };
    CommitmentSolution {
        values: Vec::new(),
        u: col(|r| r.0),
        su: col(|_| 0.0),
        sd: col(|_| 0.0),
        p: col(|r| r.1),
        p_seg: rows.iter().map(|r| vec![vec![r.1]]).collect(),
        r_reg: col(|r| r.2),
        r_spin: col(|r| r.3),
        r_nsp: col(|r| r.4),
        flow: Vec::new(),
        objective_value: 0.0,
        mip_gap: 0.0,
        solve_seconds: 0.0,
    }
}

fn prices(
    case: &MarketCase,
    option: RequirementOption,
    lmp: f64,
    mcp: &[(&str, ReserveTriple)],
) -> PriceSet {
    PriceSet {
        requirements: option,
        bus_ids: case.buses.iter().map(|b| b.id.clone()).collect(),
        lmp: vec![vec![lmp]; case.buses.len()],
        duals: BTreeMap::new(),
        mcp: mcp.iter().map(|(z, m)| (z.to_string(), vec![*m])).collect(),
        row_duals: Vec::new(),
        objective: 0.0,
    }
}

fn triple(reg: f64, spin: f64, nsp: f64) -> ReserveTriple {
    ReserveTriple { reg, spin, nsp }
}

fn one_unit(cost: f64) -> MarketCase {
    case(
        1,
        vec![bus("B1", vec![50.0])],
        Vec::new(),
        vec![generator("G1", "B1", 0.0, 100.0, &[(100.0, cost)], 1)],
    )
}

#[test]
fn energy_ledger_arithmetic() {
    let c = one_unit(20.0);
    let p = prices(
        &c,
        RequirementOption::NonCascading,
        30.0,
        &[("SYSTEM", triple(0.0, 0.0, 0.0))],
    );
    let r = settle(
        &c,
        VariantConfig::NS_NC,
        &solution(&[(1.0, 50.0, 0.0, 0.0, 0.0)]),
        &p,
    )
    .unwrap();
    let l = &r.generators[0];
    assert_eq!((l.ecos, l.erev, l.epro), (1000.0, 1500.0, 500.0));
    assert_eq!(l.lo, vec![Some(10.0)]);
}

#[test]
fn online_reserve_cost_additive_versus_overlapping() {
    // LMP 30 against an average cost of 20 gives a unit cost of 10.
    let c = one_unit(20.0);
    let sol = solution(&[(1.0, 50.0, 5.0, 10.0, 0.0)]);
    let ns = settle(
        &c,
        VariantConfig::NS_NC,
        &sol,
        &prices(
            &c,
            RequirementOption::NonCascading,
            30.0,
            &[("SYSTEM", triple(0.0, 0.0, 0.0))],
        ),
    )
    .unwrap();
    let s = settle(
        &c,
        VariantConfig::S_NC,
        &sol,
        &prices(
            &c,
            RequirementOption::NonCascading,
            30.0,
            &[("SYSTEM", triple(0.0, 0.0, 0.0))],
        ),
    )
    .unwrap();
    assert_eq!(ns.generators[0].rcos_online, 150.0);
    assert_eq!(s.generators[0].rcos_online, 100.0);
}

#[test]
fn negative_lost_opportunity_costs_nothing() {
    let c = one_unit(40.0);
    let sol = solution(&[(1.0, 50.0, 5.0, 10.0, 2.0)]);
    let r = settle(
        &c,
        VariantConfig::NS_NC,
        &sol,
        &prices(
            &c,
            RequirementOption::NonCascading,
            30.0,
            &[("SYSTEM", triple(4.0, 2.0, 1.0))],
        ),
    )
    .unwrap();
    let l = &r.generators[0];
    assert_eq!(l.lo, vec![Some(-10.0)]);
    assert_eq!(l.unit_cost_online, vec![0.0]);
    assert_eq!(l.rcos_online, 0.0);
    assert_eq!(l.rrev_reg + l.rrev_spin, 4.0 * 5.0 + 2.0 * 10.0);
    assert_eq!(l.rpro_online, 40.0);
}

#[test]
fn committed_unit_at_zero_output_uses_its_first_segment() {
    let mut c = one_unit(20.0);
    c.generators[0].fuel_cost_segments[0].marginal_cost = 24.0;
    let r = settle(
        &c,
        VariantConfig::NS_NC,
        &solution(&[(1.0, 0.0, 3.0, 0.0, 0.0)]),
        &prices(
            &c,
            RequirementOption::NonCascading,
            30.0,
            &[("SYSTEM", triple(0.0, 0.0, 0.0))],
        ),
    )
    .unwrap();
    assert_eq!(r.generators[0].lo, vec![Some(6.0)]);
    assert_eq!(r.generators[0].rcos_online, 18.0);
}

#[test]
fn offline_units_carry_no_lost_opportunity() {
    let mut c = one_unit(20.0);
    c.generators[0].offer_nsp = vec![1.5];
    let r = settle(
        &c,
        VariantConfig::NS_C,
        &solution(&[(0.0, 0.0, 0.0, 0.0, 8.0)]),
        &prices(
            &c,
            RequirementOption::Cascading,
            30.0,
            &[("SYSTEM", triple(6.0, 3.0, 1.0))],
        ),
    )
    .unwrap();
    let l = &r.generators[0];
    assert_eq!(l.lo, vec![None]);
    assert_eq!(l.rcos_nsp, 12.0);
    assert_eq!(l.rrev_nsp, 8.0);
    assert_eq!(l.rpro_nsp, -4.0);
}

#[test]
fn prices_must_match_the_requirement_option() {
    let c = one_unit(20.0);
    let p = prices(
        &c,
        RequirementOption::NonCascading,
        30.0,
        &[("SYSTEM", triple(0.0, 0.0, 0.0))],
    );
    assert!(matches!(
        settle(
            &c,
            VariantConfig::S_C,
            &solution(&[(1.0, 50.0, 0.0, 0.0, 0.0)]),
            &p
        ),
        Err(SettlementError::VariantMismatch { .. })
    ));
}

fn two_zone_case() -> MarketCase {
    let mut c = case(
        1,
        vec![bus("B1", vec![40.0]), bus("B2", vec![40.0])],
        Vec::new(),
        vec![
            generator("GA", "B1", 0.0, 100.0, &[(100.0, 20.0)], 1),
            generator("GB", "B2", 0.0, 100.0, &[(100.0, 25.0)], 1),
        ],
    );
    c.zones.insert("B1".into(), "Z1".into());
    c.zones.insert("B2".into(), "Z2".into());
    c
}

#[test]
fn reserve_revenue_follows_the_generator_zone() {
    let c = two_zone_case();
    let sol = solution(&[(1.0, 40.0, 5.0, 5.0, 0.0), (1.0, 40.0, 5.0, 5.0, 0.0)]);
    let mcp = [("Z1", triple(2.0, 1.0, 0.0)), ("Z2", triple(7.0, 3.0, 0.0))];
    let p = prices(&c, RequirementOption::NonCascading, 30.0, &mcp);
    let before = settle(&c, VariantConfig::NS_NC, &sol, &p).unwrap();

    let mut moved = c.clone();
    moved.zones.insert("B1".into(), "Z2".into());
    let after = settle(&moved, VariantConfig::NS_NC, &sol, &p).unwrap();

    let (a, b) = (&before.generators[0], &after.generators[0]);
    assert_eq!((a.rrev_reg, a.rrev_spin), (10.0, 5.0));
    assert_eq!((b.rrev_reg, b.rrev_spin), (35.0, 15.0));
    // Nothing but the price lookup changes.
    assert_eq!(
        (a.ecos, a.erev, a.rcos_online),
        (b.ecos, b.erev, b.rcos_online)
    );
    assert_eq!(before.generators[1], after.generators[1]);
}

#[test]
fn single_class_fleet_holds_every_share() {
    let c = two_zone_case();
    let sol = solution(&[(1.0, 40.0, 5.0, 5.0, 0.0), (1.0, 40.0, 0.0, 0.0, 0.0)]);
    let p = prices(
        &c,
        RequirementOption::NonCascading,
        30.0,
        &[("Z1", triple(2.0, 1.0, 0.0)), ("Z2", triple(2.0, 1.0, 0.0))],
    );
    let shares = aggregate_by_fuel(&settle(&c, VariantConfig::NS_NC, &sol, &p).unwrap(), &c);
    assert_eq!(shares.len(), 1);
    let s = &shares[0];
    assert_eq!(
        (
            s.capacity_share,
            s.energy_revenue_share,
            s.ancillary_revenue_share,
            s.total_revenue_share
        ),
        (100.0, 100.0, 100.0, 100.0)
    );
}

#[test]
fn equal_revenue_classes_split_evenly() {
    let mut c = two_zone_case();
    c.generators[1].fuel_class = FuelClass::BIT;
    let sol = solution(&[(1.0, 40.0, 0.0, 0.0, 0.0), (1.0, 40.0, 0.0, 0.0, 0.0)]);
    let p = prices(
        &c,
        RequirementOption::NonCascading,
        30.0,
        &[("Z1", triple(0.0, 0.0, 0.0)), ("Z2", triple(0.0, 0.0, 0.0))],
    );
    let shares = aggregate_by_fuel(&settle(&c, VariantConfig::NS_NC, &sol, &p).unwrap(), &c);
    for s in &shares {
        assert_eq!(s.energy_revenue_share, 50.0);
        assert_eq!(s.capacity_share, 50.0);
        // No ancillary revenue at all: reported as zero rather than NaN.
        assert_eq!(s.ancillary_revenue_share, 0.0);
    }
}

#[test]
fn distribution_uses_population_statistics() {
    let c = two_zone_case();
    // Energy revenues 30·(10/3) = 100 and 30·10 = 300.
    let sol = solution(&[(1.0, 10.0 / 3.0, 0.0, 0.0, 0.0), (1.0, 10.0, 0.0, 0.0, 0.0)]);
    let p = prices(
        &c,
        RequirementOption::NonCascading,
        30.0,
        &[("Z1", triple(0.0, 0.0, 0.0)), ("Z2", triple(0.0, 0.0, 0.0))],
    );
    let r = settle(&c, VariantConfig::NS_NC, &sol, &p).unwrap();
    let d = revenue_distribution(&r, FuelClass::NG, RevenueColumn::Energy).unwrap();
    assert!((d.mean - 200.0).abs() < 1e-9);
    assert!((d.stddev - 100.0).abs() < 1e-9);
    assert_eq!(d.values.len(), 2);
    assert!(matches!(
        revenue_distribution(&r, FuelClass::HYD, RevenueColumn::Total),
        Err(SettlementError::EmptyClass(FuelClass::HYD))
    ));
}

#[test]
fn one_generator_has_no_spread() {
    let c = one_unit(20.0);
    let p = prices(
        &c,
        RequirementOption::NonCascading,
        30.0,
        &[("SYSTEM", triple(1.0, 1.0, 1.0))],
    );
    let r = settle(
        &c,
        VariantConfig::NS_NC,
        &solution(&[(1.0, 50.0, 5.0, 5.0, 0.0)]),
        &p,
    )
    .unwrap();
    let d = revenue_distribution(&r, FuelClass::NG, RevenueColumn::Total).unwrap();
    assert_eq!(d.stddev, 0.0);
    assert_eq!(d.mean, 1510.0);
}
