//! Mixed-integer model of the day-ahead energy and reserve co-optimization.
//!
//! The model is solver-neutral: a list of bounded columns and a list of
//! ranged rows, each row carrying a [`ConstraintTag`] so that duals and
//! violations can be traced back to a zone, bus, generator or line and an
//! interval. [`crate::solver`] turns it into a solver call and
//! [`mps::write_mps`] into an interchange file.

pub mod mps;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::case::{CapacityOption, MarketCase, RequirementOption, VariantConfig};
use crate::network::{build_ptdf, NetworkError, PtdfMatrix};

/// Absolute violation tolerance used by [`feasible_check`].
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Shift-factor products below this magnitude are dropped from flow rows.
const COEFF_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("assignment has {actual} values but the model has {expected} columns")]
    Coverage { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintKind {
    CapacityLower,
    CapacityUpper,
    CapacityLowerReg,
    CapacityUpperReg,
    CapacityLowerSpin,
    CapacityUpperSpin,
    StartupCap,
    StartupCapReg,
    StartupCapSpin,
    ReqReg,
    ReqSpin,
    ReqNsp,
    ReqCascadeR,
    ReqCascadeRS,
    ReqCascadeRSN,
    RampUp,
    RampDown,
    RegRamp,
    SpinRamp,
    NspOffline,
    MinUp,
    MinDown,
    Logic,
    NodalBalance,
    FlowDef,
    FlowLimit,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 26] = [
        ConstraintKind::CapacityLower,
        ConstraintKind::CapacityUpper,
        ConstraintKind::CapacityLowerReg,
        ConstraintKind::CapacityUpperReg,
        ConstraintKind::CapacityLowerSpin,
        ConstraintKind::CapacityUpperSpin,
        ConstraintKind::StartupCap,
        ConstraintKind::StartupCapReg,
        ConstraintKind::StartupCapSpin,
        ConstraintKind::ReqReg,
        ConstraintKind::ReqSpin,
        ConstraintKind::ReqNsp,
        ConstraintKind::ReqCascadeR,
        ConstraintKind::ReqCascadeRS,
        ConstraintKind::ReqCascadeRSN,
        ConstraintKind::RampUp,
        ConstraintKind::RampDown,
        ConstraintKind::RegRamp,
        ConstraintKind::SpinRamp,
        ConstraintKind::NspOffline,
        ConstraintKind::MinUp,
        ConstraintKind::MinDown,
        ConstraintKind::Logic,
        ConstraintKind::NodalBalance,
        ConstraintKind::FlowDef,
        ConstraintKind::FlowLimit,
    ];

    pub fn name(self) -> &'static str {
        use ConstraintKind::*;
        match self {
            CapacityLower => "CapacityLower",
            CapacityUpper => "CapacityUpper",
            CapacityLowerReg => "CapacityLowerReg",
            CapacityUpperReg => "CapacityUpperReg",
            CapacityLowerSpin => "CapacityLowerSpin",
            CapacityUpperSpin => "CapacityUpperSpin",
            StartupCap => "StartupCap",
            StartupCapReg => "StartupCapReg",
            StartupCapSpin => "StartupCapSpin",
            ReqReg => "ReqReg",
            ReqSpin => "ReqSpin",
            ReqNsp => "ReqNsp",
            ReqCascadeR => "ReqCascadeR",
            ReqCascadeRS => "ReqCascadeRS",
            ReqCascadeRSN => "ReqCascadeRSN",
            RampUp => "RampUp",
            RampDown => "RampDown",
            RegRamp => "RegRamp",
            SpinRamp => "SpinRamp",
            NspOffline => "NspOffline",
            MinUp => "MinUp",
            MinDown => "MinDown",
            Logic => "Logic",
            NodalBalance => "NodalBalance",
            FlowDef => "FlowDef",
            FlowLimit => "FlowLimit",
        }
    }

    /// Kinds that exist only under one capacity or requirement option.
    pub fn variant_kinds(variant: VariantConfig) -> Vec<ConstraintKind> {
        use ConstraintKind::*;
        let mut kinds = match variant.capacity {
            CapacityOption::NonSharing => vec![CapacityLower, CapacityUpper, StartupCap],
            CapacityOption::Sharing => vec![
                CapacityLowerReg,
                CapacityUpperReg,
                CapacityLowerSpin,
                CapacityUpperSpin,
                StartupCapReg,
                StartupCapSpin,
            ],
        };
        kinds.extend(match variant.requirements {
            RequirementOption::NonCascading => [ReqReg, ReqSpin, ReqNsp],
            RequirementOption::Cascading => [ReqCascadeR, ReqCascadeRS, ReqCascadeRSN],
        });
        kinds
    }

    /// Kinds present in every variant.
    pub fn common_kinds() -> Vec<ConstraintKind> {
        let mut variant_specific: Vec<ConstraintKind> = VariantConfig::ALL
            .into_iter()
            .flat_map(Self::variant_kinds)
            .collect();
        variant_specific.sort();
        Self::ALL
            .into_iter()
            .filter(|k| variant_specific.binary_search(k).is_err())
            .collect()
    }

    pub fn is_requirement(self) -> bool {
        use ConstraintKind::*;
        matches!(
            self,
            ReqReg | ReqSpin | ReqNsp | ReqCascadeR | ReqCascadeRS | ReqCascadeRSN
        )
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Row identity. Displays as `<kind>_<entity>_<t>` with `t` counted from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintTag {
    pub kind: ConstraintKind,
    pub entity: String,
    /// 1-based interval.
    pub t: usize,
}

impl ConstraintTag {
    pub fn new(kind: ConstraintKind, entity: &str, t: usize) -> Self {
        ConstraintTag {
            kind,
            entity: entity.to_string(),
            t,
        }
    }
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_{}", self.kind, self.entity, self.t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub integer: bool,
}

/// `lower <= Σ coeff·x <= upper`; infinite bounds mark one-sided rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub tag: ConstraintTag,
    pub lower: f64,
    pub upper: f64,
    pub coeffs: Vec<(usize, f64)>,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(c, a)| a * values[c]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let a = self.activity(values);
        (self.lower - a).max(a - self.upper).max(0.0)
    }
}

/// Column indices of one generator's variables, per interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratorColumns {
    /// `[t][segment]`
    pub segments: Vec<Vec<usize>>,
    pub r_reg: Vec<usize>,
    pub r_spin: Vec<usize>,
    pub r_nsp: Vec<usize>,
    pub u: Vec<usize>,
    pub su: Vec<usize>,
    pub sd: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarIndex {
    pub generators: Vec<GeneratorColumns>,
    /// `[line][t]`
    pub flows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variant: VariantConfig,
    pub horizon: usize,
    pub generator_ids: Vec<String>,
    pub bus_ids: Vec<String>,
    pub line_ids: Vec<String>,
    pub zone_ids: Vec<String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub vars: VarIndex,
    row_lookup: HashMap<ConstraintTag, usize>,
}

impl MilpModel {
    pub fn row_index(&self, tag: &ConstraintTag) -> Option<usize> {
        self.row_lookup.get(tag).copied()
    }

    pub fn row(&self, kind: ConstraintKind, entity: &str, t: usize) -> Option<&Row> {
        self.row_index(&ConstraintTag::new(kind, entity, t))
            .map(|i| &self.rows[i])
    }

    pub fn count_rows(&self, kind: ConstraintKind) -> usize {
        self.rows.iter().filter(|r| r.tag.kind == kind).count()
    }

    pub fn num_integer(&self) -> usize {
        self.columns.iter().filter(|c| c.integer).count()
    }

    pub fn objective(&self, values: &[f64]) -> f64 {
        self.columns
            .iter()
            .zip(values)
            .map(|(c, v)| c.cost * v)
            .sum()
    }

    /// Aggregate output of generator `g` in 0-based interval `t`.
    pub fn power(&self, values: &[f64], g: usize, t: usize) -> f64 {
        self.vars.generators[g].segments[t]
            .iter()
            .map(|&c| values[c])
            .sum()
    }

    /// Copy of the model with every integer column fixed at the rounded
    /// value from `values` and relaxed to continuous.
    pub fn with_fixed_integers(&self, values: &[f64]) -> MilpModel {
        let mut fixed = self.clone();
        for (col, v) in fixed.columns.iter_mut().zip(values) {
            if col.integer {
                let r = v.round();
                col.lower = r;
                col.upper = r;
                col.integer = false;
            }
        }
        fixed
    }
}

struct Builder {
    columns: Vec<Column>,
    rows: Vec<Row>,
}

impl Builder {
    fn col(&mut self, name: String, lower: f64, upper: f64, cost: f64, integer: bool) -> usize {
        self.columns.push(Column {
            name,
            lower,
            upper,
            cost,
            integer,
        });
        self.columns.len() - 1
    }

    fn row(&mut self, tag: ConstraintTag, lower: f64, upper: f64, coeffs: Vec<(usize, f64)>) {
        self.rows.push(Row {
            tag,
            lower,
            upper,
            coeffs: merge_coeffs(coeffs),
        });
    }
}

fn merge_coeffs(mut coeffs: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    coeffs.sort_by_key(|&(c, _)| c);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    for (c, a) in coeffs {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += a,
            _ => out.push((c, a)),
        }
    }
    out.retain(|&(_, a)| a.abs() > COEFF_EPS);
    out
}

const INF: f64 = f64::INFINITY;

pub fn build_model(
    case: &MarketCase,
    variant: VariantConfig,
) -> Result<MilpModel, FormulationError> {
    let ptdf = build_ptdf(case)?;
    Ok(build_model_with_ptdf(case, &ptdf, variant))
}

/// Builds the model against a precomputed shift-factor matrix.
pub fn build_model_with_ptdf(
    case: &MarketCase,
    ptdf: &PtdfMatrix,
    variant: VariantConfig,
) -> MilpModel {
    use ConstraintKind::*;

    let horizon = case.horizon;
    let mut b = Builder {
        columns: Vec::new(),
        rows: Vec::new(),
    };

    // Columns, generator by generator.
    let mut gens = Vec::with_capacity(case.generators.len());
    for g in &case.generators {
        let mut cols = GeneratorColumns::default();
        for t in 0..horizon {
            let tt = t + 1;
            let segs = g
                .fuel_cost_segments
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    b.col(
                        format!("p_{}_{}_s{}", g.id, tt, k + 1),
                        0.0,
                        s.capacity,
                        s.marginal_cost,
                        false,
                    )
                })
                .collect();
            cols.segments.push(segs);
            cols.r_reg.push(b.col(
                format!("rreg_{}_{}", g.id, tt),
                0.0,
                INF,
                g.offer_reg[t],
                false,
            ));
            cols.r_spin.push(b.col(
                format!("rspin_{}_{}", g.id, tt),
                0.0,
                INF,
                g.offer_spin[t],
                false,
            ));
            cols.r_nsp.push(b.col(
                format!("rnsp_{}_{}", g.id, tt),
                0.0,
                INF,
                g.offer_nsp[t],
                false,
            ));
            cols.u
                .push(b.col(format!("u_{}_{}", g.id, tt), 0.0, 1.0, g.cost_noload, true));
            cols.su.push(b.col(
                format!("su_{}_{}", g.id, tt),
                0.0,
                1.0,
                g.cost_startup,
                true,
            ));
            cols.sd
                .push(b.col(format!("sd_{}_{}", g.id, tt), 0.0, 1.0, 0.0, true));
        }
        gens.push(cols);
    }
    let flows: Vec<Vec<usize>> = case
        .lines
        .iter()
        .map(|l| {
            (0..horizon)
                .map(|t| b.col(format!("f_{}_{}", l.id, t + 1), -INF, INF, 0.0, false))
                .collect()
        })
        .collect();

    // Generator rows.
    for (gi, g) in case.generators.iter().enumerate() {
        let c = &gens[gi];
        let power = |t: usize, coeff: f64| -> Vec<(usize, f64)> {
            c.segments[t].iter().map(|&s| (s, coeff)).collect()
        };
        let id = g.id.as_str();
        let u_init = if g.initially_on() { 1.0 } else { 0.0 };
        for t in 0..horizon {
            let tt = t + 1;
            let (reg, spin, nsp) = (c.r_reg[t], c.r_spin[t], c.r_nsp[t]);
            let (u, su, sd) = (c.u[t], c.su[t], c.sd[t]);

            match variant.capacity {
                CapacityOption::NonSharing => {
                    let mut lo = power(t, 1.0);
                    lo.extend([(reg, -1.0), (spin, -1.0), (u, -g.p_min)]);
                    b.row(ConstraintTag::new(CapacityLower, id, tt), 0.0, INF, lo);
                    let mut hi = power(t, 1.0);
                    hi.extend([(reg, 1.0), (spin, 1.0), (u, -g.p_max)]);
                    b.row(ConstraintTag::new(CapacityUpper, id, tt), -INF, 0.0, hi);
                    let mut st = power(t, 1.0);
                    st.extend([(reg, 1.0), (spin, 1.0), (su, g.p_max - g.rsu)]);
                    b.row(ConstraintTag::new(StartupCap, id, tt), -INF, g.p_max, st);
                }
                CapacityOption::Sharing => {
                    for (r, lower_kind, upper_kind, startup_kind) in [
                        (reg, CapacityLowerReg, CapacityUpperReg, StartupCapReg),
                        (spin, CapacityLowerSpin, CapacityUpperSpin, StartupCapSpin),
                    ] {
                        let mut lo = power(t, 1.0);
                        lo.extend([(r, -1.0), (u, -g.p_min)]);
                        b.row(ConstraintTag::new(lower_kind, id, tt), 0.0, INF, lo);
                        let mut hi = power(t, 1.0);
                        hi.extend([(r, 1.0), (u, -g.p_max)]);
                        b.row(ConstraintTag::new(upper_kind, id, tt), -INF, 0.0, hi);
                        let mut st = power(t, 1.0);
                        st.extend([(r, 1.0), (su, g.p_max - g.rsu)]);
                        b.row(ConstraintTag::new(startup_kind, id, tt), -INF, g.p_max, st);
                    }
                }
            }

            // Hourly ramping; the interval before the horizon is the initial state.
            let mut up = power(t, 1.0);
            up.push((su, g.ru_60min - g.rsu));
            let mut down = power(t, -1.0);
            down.push((sd, g.rd_60min - g.rsd));
            let (up_rhs, down_rhs) = if t == 0 {
                (g.ru_60min + g.initial_power, g.rd_60min - g.initial_power)
            } else {
                up.extend(power(t - 1, -1.0));
                down.extend(power(t - 1, 1.0));
                (g.ru_60min, g.rd_60min)
            };
            b.row(ConstraintTag::new(RampUp, id, tt), -INF, up_rhs, up);
            b.row(ConstraintTag::new(RampDown, id, tt), -INF, down_rhs, down);

            b.row(
                ConstraintTag::new(RegRamp, id, tt),
                -INF,
                g.ru_5min,
                vec![(reg, 1.0)],
            );
            b.row(
                ConstraintTag::new(SpinRamp, id, tt),
                -INF,
                g.ru_10min,
                vec![(spin, 1.0)],
            );
            b.row(
                ConstraintTag::new(NspOffline, id, tt),
                -INF,
                g.rsu,
                vec![(nsp, 1.0), (u, g.rsu)],
            );

            // Minimum up/down windows, truncated at the horizon start. Units
            // still inside an initial window are forced on (off) through the
            // right-hand side.
            let up_window = g.min_up as usize;
            let mut mu: Vec<(usize, f64)> = (t.saturating_sub(up_window - 1)..=t)
                .map(|q| (c.su[q], 1.0))
                .collect();
            mu.push((u, -1.0));
            let forced_on =
                g.initial_status > 0 && (t as i64) < g.min_up as i64 - g.initial_status as i64;
            b.row(
                ConstraintTag::new(MinUp, id, tt),
                -INF,
                if forced_on { -1.0 } else { 0.0 },
                mu,
            );
            let down_window = g.min_down as usize;
            let mut md: Vec<(usize, f64)> = (t.saturating_sub(down_window - 1)..=t)
                .map(|q| (c.sd[q], 1.0))
                .collect();
            md.push((u, 1.0));
            let forced_off =
                g.initial_status < 0 && (t as i64) < g.min_down as i64 + g.initial_status as i64;
            b.row(
                ConstraintTag::new(MinDown, id, tt),
                -INF,
                if forced_off { 0.0 } else { 1.0 },
                md,
            );

            let mut logic = vec![(u, 1.0), (su, -1.0), (sd, 1.0)];
            let rhs = if t == 0 {
                u_init
            } else {
                logic.push((c.u[t - 1], -1.0));
                0.0
            };
            b.row(ConstraintTag::new(Logic, id, tt), rhs, rhs, logic);
        }
    }

    // Zonal requirements.
    let zone_ids = case.zone_ids();
    for zone in &zone_ids {
        let members = case.generators_in_zone(zone);
        for t in 0..horizon {
            let tt = t + 1;
            let (rr_reg, rr_spin, rr_nsp) = case.requirements.get(zone, t);
            // Σ over the zone's generators of the selected reserve columns.
            let sum = |reg: bool, spin: bool, nsp: bool| -> Vec<(usize, f64)> {
                let mut v = Vec::new();
                for &g in &members {
                    let c = &gens[g];
                    if reg {
                        v.push((c.r_reg[t], 1.0));
                    }
                    if spin {
                        v.push((c.r_spin[t], 1.0));
                    }
                    if nsp {
                        v.push((c.r_nsp[t], 1.0));
                    }
                }
                v
            };
            match variant.requirements {
                RequirementOption::NonCascading => {
                    b.row(
                        ConstraintTag::new(ReqReg, zone, tt),
                        rr_reg,
                        INF,
                        sum(true, false, false),
                    );
                    b.row(
                        ConstraintTag::new(ReqSpin, zone, tt),
                        rr_spin,
                        INF,
                        sum(false, true, false),
                    );
                    b.row(
                        ConstraintTag::new(ReqNsp, zone, tt),
                        rr_nsp,
                        INF,
                        sum(false, false, true),
                    );
                }
                RequirementOption::Cascading => {
                    b.row(
                        ConstraintTag::new(ReqCascadeR, zone, tt),
                        rr_reg,
                        INF,
                        sum(true, false, false),
                    );
                    b.row(
                        ConstraintTag::new(ReqCascadeRS, zone, tt),
                        rr_reg + rr_spin,
                        INF,
                        sum(true, true, false),
                    );
                    b.row(
                        ConstraintTag::new(ReqCascadeRSN, zone, tt),
                        rr_reg + rr_spin + rr_nsp,
                        INF,
                        sum(true, true, true),
                    );
                }
            }
        }
    }

    // Network: nodal balance with line-incidence flows, flow definitions
    // and limits on monitored lines.
    let bus_pos = case.bus_position();
    let line_ends: Vec<(usize, usize)> = case
        .lines
        .iter()
        .map(|l| (bus_pos[l.from_bus.as_str()], bus_pos[l.to_bus.as_str()]))
        .collect();
    for t in 0..horizon {
        let tt = t + 1;
        for (n, bus) in case.buses.iter().enumerate() {
            let mut coeffs = Vec::new();
            for (l, &(from, to)) in line_ends.iter().enumerate() {
                if to == n {
                    coeffs.push((flows[l][t], 1.0));
                }
                if from == n {
                    coeffs.push((flows[l][t], -1.0));
                }
            }
            for (gi, g) in case.generators.iter().enumerate() {
                if g.bus == bus.id {
                    coeffs.extend(gens[gi].segments[t].iter().map(|&s| (s, 1.0)));
                }
            }
            let d = bus.demand[t];
            b.row(ConstraintTag::new(NodalBalance, &bus.id, tt), d, d, coeffs);
        }
        // Net injection at each bus equals its net line outflow, so the flow
        // definition is written over flows: f_l = Σ_k (PTDF[l,from_k] − PTDF[l,to_k]) f_k.
        for (l, line) in case.lines.iter().enumerate() {
            let mut coeffs = vec![(flows[l][t], 1.0)];
            for (k, &(from, to)) in line_ends.iter().enumerate() {
                let shift = ptdf.get(l, from) - ptdf.get(l, to);
                coeffs.push((flows[k][t], -shift));
            }
            b.row(ConstraintTag::new(FlowDef, &line.id, tt), 0.0, 0.0, coeffs);
            if line.monitored {
                let limit = line.rating[t];
                b.row(
                    ConstraintTag::new(FlowLimit, &line.id, tt),
                    -limit,
                    limit,
                    vec![(flows[l][t], 1.0)],
                );
            }
        }
    }

    let row_lookup = b
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.tag.clone(), i))
        .collect();
    MilpModel {
        variant,
        horizon,
        generator_ids: case.generators.iter().map(|g| g.id.clone()).collect(),
        bus_ids: case.buses.iter().map(|b| b.id.clone()).collect(),
        line_ids: case.lines.iter().map(|l| l.id.clone()).collect(),
        zone_ids,
        columns: b.columns,
        rows: b.rows,
        vars: VarIndex {
            generators: gens,
            flows,
        },
        row_lookup,
    }
}

/// Tags of every row violated by more than [`FEASIBILITY_TOL`].
pub fn feasible_check(
    model: &MilpModel,
    values: &[f64],
) -> Result<Vec<ConstraintTag>, FormulationError> {
    if values.len() != model.columns.len() {
        return Err(FormulationError::Coverage {
            expected: model.columns.len(),
            actual: values.len(),
        });
    }
    Ok(model
        .rows
        .iter()
        .filter(|r| r.violation(values) > FEASIBILITY_TOL)
        .map(|r| r.tag.clone())
        .collect())
}

/// Column bounds and integrality violated by more than [`FEASIBILITY_TOL`].
pub fn bound_violations(model: &MilpModel, values: &[f64]) -> Vec<String> {
    model
        .columns
        .iter()
        .zip(values)
        .filter(|(c, &v)| {
            v < c.lower - FEASIBILITY_TOL
                || v > c.upper + FEASIBILITY_TOL
                || (c.integer && (v - v.round()).abs() > FEASIBILITY_TOL)
        })
        .map(|(c, _)| c.name.clone())
        .collect()
}
