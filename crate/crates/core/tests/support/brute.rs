//! Exhaustive-enumeration oracle for tiny unit-commitment cases.
//!
//! Every on/off pattern is checked against the minimum up/down rules, then
//! the remaining continuous dispatch-and-reserve problem is solved with the
//! dense simplex. The cheapest feasible pattern is the optimum. Written
//! directly from the market rules, sharing no code with the library's model
//! builder. Copper-plate cases only.

use reserve_market::case::{
    CapacityOption, GeneratorSpec, MarketCase, RequirementOption, VariantConfig,
};

use super::{solve, Cmp, Lp, LpResult};

#[derive(Debug, Clone, PartialEq)]
pub struct BruteOptimum {
    pub objective: f64,
    /// `[generator][t]`
    pub commitment: Vec<Vec<bool>>,
    pub patterns_tried: usize,
    pub patterns_feasible: usize,
}

/// Whether `u` (over the horizon) respects the unit's minimum up/down times,
/// including the part of a window carried over from before the horizon.
pub fn pattern_allowed(g: &GeneratorSpec, u: &[bool]) -> bool {
    let h = u.len();
    let on0 = g.initial_status > 0;
    // Intervals the initial state must still be held.
    let carry = if on0 {
        (g.min_up as i64 - g.initial_status as i64).max(0)
    } else {
        (g.min_down as i64 + g.initial_status as i64).max(0)
    } as usize;
    if u.iter().take(carry).any(|&x| x != on0) {
        return false;
    }
    for t in 0..h {
        let prev = if t == 0 { on0 } else { u[t - 1] };
        if u[t] != prev {
            let hold = if u[t] { g.min_up } else { g.min_down } as usize;
            if u[t..(t + hold).min(h)].iter().any(|&x| x != u[t]) {
                return false;
            }
        }
    }
    true
}

/// Cost of the cheapest dispatch for a fixed commitment, or `None` when the
/// pattern cannot serve demand and requirements.
pub fn dispatch_cost(case: &MarketCase, variant: VariantConfig, u: &[Vec<bool>]) -> Option<f64> {
    assert!(
        case.lines.is_empty(),
        "brute-force oracle handles copper-plate cases only"
    );
    let h = case.horizon;
    let ng = case.generators.len();
    // Column layout per (g, t): segments…, reg, spin, nsp.
    let mut offset = vec![vec![0usize; h]; ng];
    let mut n = 0;
    for g in 0..ng {
        for t in 0..h {
            offset[g][t] = n;
            n += case.generators[g].fuel_cost_segments.len() + 3;
        }
    }
    let mut lp = Lp::new(n);
    let mut fixed_cost = 0.0;
    for (g, spec) in case.generators.iter().enumerate() {
        let nseg = spec.fuel_cost_segments.len();
        let seg = |t: usize| {
            let base = offset[g][t];
            (0..nseg).map(move |k| base + k)
        };
        let cols = |t: usize| {
            (
                offset[g][t] + nseg,
                offset[g][t] + nseg + 1,
                offset[g][t] + nseg + 2,
            )
        };
        for t in 0..h {
            let on = u[g][t];
            let was_on = if t == 0 {
                spec.initially_on()
            } else {
                u[g][t - 1]
            };
            let started = on && !was_on;
            let stopped = !on && was_on;
            let uf = if on { 1.0 } else { 0.0 };
            if on {
                fixed_cost += spec.cost_noload;
            }
            if started {
                fixed_cost += spec.cost_startup;
            }
            let (r, s, ns) = cols(t);
            for (k, c) in seg(t).enumerate() {
                lp.c[c] = spec.fuel_cost_segments[k].marginal_cost;
                lp.row(&[(c, 1.0)], Cmp::Le, spec.fuel_cost_segments[k].capacity);
            }
            lp.c[r] = spec.offer_reg[t];
            lp.c[s] = spec.offer_spin[t];
            lp.c[ns] = spec.offer_nsp[t];
            let p: Vec<(usize, f64)> = seg(t).map(|c| (c, 1.0)).collect();
            let with = |extra: &[(usize, f64)]| -> Vec<(usize, f64)> {
                let mut v = p.clone();
                v.extend_from_slice(extra);
                v
            };
            // Headroom for reserves above and below the operating point.
            let startup_limit = if started { spec.rsu } else { spec.p_max };
            let blocks: Vec<Vec<usize>> = match variant.capacity {
                CapacityOption::NonSharing => vec![vec![r, s]],
                CapacityOption::Sharing => vec![vec![r], vec![s]],
            };
            for block in blocks {
                let up: Vec<(usize, f64)> = block.iter().map(|&c| (c, 1.0)).collect();
                let down: Vec<(usize, f64)> = block.iter().map(|&c| (c, -1.0)).collect();
                lp.row(&with(&down), Cmp::Ge, spec.p_min * uf);
                lp.row(&with(&up), Cmp::Le, spec.p_max * uf);
                lp.row(&with(&up), Cmp::Le, startup_limit);
            }
            lp.row(&[(r, 1.0)], Cmp::Le, spec.ru_5min);
            lp.row(&[(s, 1.0)], Cmp::Le, spec.ru_10min);
            lp.row(&[(ns, 1.0)], Cmp::Le, if on { 0.0 } else { spec.rsu });

            // Hourly ramps from the previous interval's output.
            let up_limit = if started { spec.rsu } else { spec.ru_60min };
            let down_limit = if stopped { spec.rsd } else { spec.rd_60min };
            if t == 0 {
                lp.row(&p, Cmp::Le, spec.initial_power + up_limit);
                lp.row(&p, Cmp::Ge, spec.initial_power - down_limit);
            } else {
                let mut delta = p.clone();
                delta.extend(seg(t - 1).map(|c| (c, -1.0)));
                lp.row(&delta, Cmp::Le, up_limit);
                lp.row(&delta, Cmp::Ge, -down_limit);
            }
        }
    }
    for t in 0..h {
        let balance: Vec<(usize, f64)> = case
            .generators
            .iter()
            .enumerate()
            .flat_map(|(g, spec)| (0..spec.fuel_cost_segments.len()).map(move |k| (g, k)))
            .map(|(g, k)| (offset[g][t] + k, 1.0))
            .collect();
        lp.row(&balance, Cmp::Eq, case.total_demand(t));
    }
    for zone in case.zone_ids() {
        for t in 0..h {
            let (rr_reg, rr_spin, rr_nsp) = case.requirements.get(&zone, t);
            let members: Vec<usize> = (0..ng)
                .filter(|&g| case.zone_of_bus(&case.generators[g].bus) == Some(zone.as_str()))
                .collect();
            let pick = |products: &[usize]| -> Vec<(usize, f64)> {
                members
                    .iter()
                    .flat_map(|&g| {
                        let base = offset[g][t] + case.generators[g].fuel_cost_segments.len();
                        products.iter().map(move |&k| (base + k, 1.0))
                    })
                    .collect()
            };
            match variant.requirements {
                RequirementOption::NonCascading => {
                    lp.row(&pick(&[0]), Cmp::Ge, rr_reg);
                    lp.row(&pick(&[1]), Cmp::Ge, rr_spin);
                    lp.row(&pick(&[2]), Cmp::Ge, rr_nsp);
                }
                RequirementOption::Cascading => {
                    lp.row(&pick(&[0]), Cmp::Ge, rr_reg);
                    lp.row(&pick(&[0, 1]), Cmp::Ge, rr_reg + rr_spin);
                    lp.row(&pick(&[0, 1, 2]), Cmp::Ge, rr_reg + rr_spin + rr_nsp);
                }
            }
        }
    }
    match solve(&lp) {
        LpResult::Optimal { objective, .. } => Some(objective + fixed_cost),
        LpResult::Infeasible => None,
        LpResult::Unbounded => panic!("dispatch subproblem cannot be unbounded"),
    }
}

/// Minimum over every commitment pattern; `None` when none is feasible.
pub fn brute_force(case: &MarketCase, variant: VariantConfig) -> Option<BruteOptimum> {
    let ng = case.generators.len();
    let h = case.horizon;
    let bits = ng * h;
    assert!(bits <= 16, "too many patterns to enumerate");
    let mut best: Option<BruteOptimum> = None;
    let mut feasible = 0;
    for mask in 0u32..(1 << bits) {
        let u: Vec<Vec<bool>> = (0..ng)
            .map(|g| (0..h).map(|t| mask & (1 << (g * h + t)) != 0).collect())
            .collect();
        if !case
            .generators
            .iter()
            .zip(&u)
            .all(|(g, row)| pattern_allowed(g, row))
        {
            continue;
        }
        let Some(cost) = dispatch_cost(case, variant, &u) else {
            continue;
        };
        feasible += 1;
        if best.as_ref().map_or(true, |b| cost < b.objective) {
            best = Some(BruteOptimum {
                objective: cost,
                commitment: u,
                patterns_tried: 0,
                patterns_feasible: 0,
            });
        }
    }
    best.map(|b| BruteOptimum {
        patterns_tried: 1 << bits,
        patterns_feasible: feasible,
        ..b
    })
}
