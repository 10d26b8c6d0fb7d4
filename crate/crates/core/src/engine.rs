//! Market clearing: commitment solve, restricted pricing run, price composition.
//!
//! Prices come from a second solve in which every commitment binary is fixed
//! at the MILP incumbent, leaving an LP whose duals are well defined. LMPs
//! are the duals of the nodal balance rows; zonal reserve clearing prices
//! are composed from the requirement-row duals according to the variant's
//! requirement option.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use thiserror::Error;

use crate::case::{MarketCase, RequirementOption, VariantConfig};
use crate::formulation::{
    build_model_with_ptdf, feasible_check, ConstraintKind, ConstraintTag, FormulationError,
    MilpModel,
};
use crate::network::PtdfMatrix;
use crate::solver::{Backend, RawSolution, SolveOptions, SolveStatus, SolverError};

/// Slack (MW) beyond which a requirement row counts as non-binding.
pub const SLACK_TOL: f64 = 1e-6;
/// Largest dual tolerated on a non-binding requirement row.
pub const DUAL_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("market is infeasible: {0}")]
    Infeasible(String),
    #[error("time limit reached without a feasible commitment")]
    TimeLimitNoIncumbent,
    #[error("solver did not return usable duals for the pricing run")]
    DualUnavailable,
    #[error("solver failed with status {0:?}")]
    SolveFailed(SolveStatus),
    #[error("solution violates {0} constraint(s), first: {1}")]
    Infeasibility(usize, ConstraintTag),
}

/// One value per reserve product.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReserveTriple {
    pub reg: f64,
    pub spin: f64,
    pub nsp: f64,
}

impl ReserveTriple {
    pub fn get(&self, product: Product) -> f64 {
        match product {
            Product::Reg => self.reg,
            Product::Spin => self.spin,
            Product::Nsp => self.nsp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Product {
    Reg,
    Spin,
    Nsp,
}

impl Product {
    pub const ALL: [Product; 3] = [Product::Reg, Product::Spin, Product::Nsp];

    pub fn as_str(self) -> &'static str {
        match self {
            Product::Reg => "reg",
            Product::Spin => "spin",
            Product::Nsp => "nsp",
        }
    }

    /// Requirement row whose dual is this product's own shadow price.
    pub fn requirement_kind(self, option: RequirementOption) -> ConstraintKind {
        use ConstraintKind::*;
        match (option, self) {
            (RequirementOption::NonCascading, Product::Reg) => ReqReg,
            (RequirementOption::NonCascading, Product::Spin) => ReqSpin,
            (RequirementOption::NonCascading, Product::Nsp) => ReqNsp,
            (RequirementOption::Cascading, Product::Reg) => ReqCascadeR,
            (RequirementOption::Cascading, Product::Spin) => ReqCascadeRS,
            (RequirementOption::Cascading, Product::Nsp) => ReqCascadeRSN,
        }
    }
}

/// Clearing prices from requirement-row shadow prices.
///
/// Non-cascading rows price each product separately. Cascading rows are
/// nested (R, R+S, R+S+N), so a product earns the shadow price of every
/// row it counts toward. Negative duals (solver noise on binding rows) are
/// floored at zero before composing, which makes the cascading ordering
/// `reg ≥ spin ≥ nsp ≥ 0` hold exactly.
pub fn compose_mcp(option: RequirementOption, duals: ReserveTriple) -> ReserveTriple {
    let r = duals.reg.max(0.0);
    let rs = duals.spin.max(0.0);
    let rsn = duals.nsp.max(0.0);
    match option {
        RequirementOption::NonCascading => ReserveTriple {
            reg: r,
            spin: rs,
            nsp: rsn,
        },
        RequirementOption::Cascading => ReserveTriple {
            reg: r + rs + rsn,
            spin: rs + rsn,
            nsp: rsn,
        },
    }
}

/// Cleared quantities, indexed `[generator][t]` or `[line][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitmentSolution {
    /// Full column vector in model order.
    pub values: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub su: Vec<Vec<f64>>,
    pub sd: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    /// `[generator][t][segment]`
    pub p_seg: Vec<Vec<Vec<f64>>>,
    pub r_reg: Vec<Vec<f64>>,
    pub r_spin: Vec<Vec<f64>>,
    pub r_nsp: Vec<Vec<f64>>,
    pub flow: Vec<Vec<f64>>,
    pub objective_value: f64,
    pub mip_gap: f64,
    pub solve_seconds: f64,
}

impl CommitmentSolution {
    /// Structured view of a column vector. Integer and fixed columns are
    /// snapped and the objective is recomputed from the result.
    pub fn from_values(
        model: &MilpModel,
        mut values: Vec<f64>,
        mip_gap: f64,
        solve_seconds: f64,
    ) -> Self {
        for (v, c) in values.iter_mut().zip(&model.columns) {
            if c.lower == c.upper {
                *v = c.lower + 0.0;
            } else if c.integer {
                *v = v.round() + 0.0;
            }
        }
        let per_t = |pick: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<f64>> {
            (0..model.generator_ids.len())
                .map(|g| (0..model.horizon).map(|t| values[pick(g, t)]).collect())
                .collect()
        };
        let gens = &model.vars.generators;
        let u = per_t(&|g, t| gens[g].u[t]);
        let su = per_t(&|g, t| gens[g].su[t]);
        let sd = per_t(&|g, t| gens[g].sd[t]);
        let r_reg = per_t(&|g, t| gens[g].r_reg[t]);
        let r_spin = per_t(&|g, t| gens[g].r_spin[t]);
        let r_nsp = per_t(&|g, t| gens[g].r_nsp[t]);
        let p_seg: Vec<Vec<Vec<f64>>> = gens
            .iter()
            .map(|gc| {
                gc.segments
                    .iter()
                    .map(|segs| segs.iter().map(|&c| values[c]).collect())
                    .collect()
            })
            .collect();
        let p = p_seg
            .iter()
            .map(|per_t| {
                per_t
                    .iter()
                    .map(|segs: &Vec<f64>| segs.iter().sum())
                    .collect()
            })
            .collect();
        let flow = model
            .vars
            .flows
            .iter()
            .map(|cols| cols.iter().map(|&c| values[c]).collect())
            .collect();
        let objective_value = model.objective(&values);
        CommitmentSolution {
            values,
            u,
            su,
            sd,
            p,
            p_seg,
            r_reg,
            r_spin,
            r_nsp,
            flow,
            objective_value,
            mip_gap,
            solve_seconds,
        }
    }

    /// Σ C^SU · su over the horizon.
    pub fn startup_cost(&self, case: &MarketCase) -> f64 {
        case.generators
            .iter()
            .zip(&self.su)
            .map(|(g, su)| g.cost_startup * su.iter().sum::<f64>())
            .sum()
    }

    pub fn write_commitment_csv<W: Write>(&self, model: &MilpModel, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gen", "t", "u", "su", "sd", "p", "r_reg", "r_spin", "r_nsp"])?;
        for (g, id) in model.generator_ids.iter().enumerate() {
            for t in 0..model.horizon {
                w.write_record([
                    id.clone(),
                    (t + 1).to_string(),
                    crate::num(self.u[g][t]),
                    crate::num(self.su[g][t]),
                    crate::num(self.sd[g][t]),
                    crate::num(self.p[g][t]),
                    crate::num(self.r_reg[g][t]),
                    crate::num(self.r_spin[g][t]),
                    crate::num(self.r_nsp[g][t]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_flows_csv<W: Write>(&self, model: &MilpModel, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["line", "t", "flow"])?;
        for (l, id) in model.line_ids.iter().enumerate() {
            for t in 0..model.horizon {
                w.write_record([id.clone(), (t + 1).to_string(), crate::num(self.flow[l][t])])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSet {
    pub requirements: RequirementOption,
    pub bus_ids: Vec<String>,
    /// `[bus][t]`, $/MWh
    pub lmp: Vec<Vec<f64>>,
    /// Raw requirement-row duals per zone and interval. Under cascading
    /// requirements the fields hold the R, R+S and R+S+N row duals.
    pub duals: BTreeMap<String, Vec<ReserveTriple>>,
    pub mcp: BTreeMap<String, Vec<ReserveTriple>>,
    /// Every row dual of the pricing LP, in model row order.
    pub row_duals: Vec<f64>,
    pub objective: f64,
}

impl PriceSet {
    pub fn lmp_at(&self, bus: &str, t: usize) -> Option<f64> {
        let b = self.bus_ids.iter().position(|id| id == bus)?;
        Some(self.lmp[b][t])
    }

    pub fn mcp_at(&self, zone: &str, t: usize) -> Option<ReserveTriple> {
        self.mcp.get(zone).map(|v| v[t])
    }

    /// Time-averaged clearing price of one product in one zone.
    pub fn average_mcp(&self, zone: &str, product: Product) -> f64 {
        let series = &self.mcp[zone];
        series.iter().map(|m| m.get(product)).sum::<f64>() / series.len().max(1) as f64
    }

    pub fn write_lmp_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bus", "t", "lmp"])?;
        for (bus, series) in self.bus_ids.iter().zip(&self.lmp) {
            for (t, v) in series.iter().enumerate() {
                w.write_record([bus.clone(), (t + 1).to_string(), crate::num(*v)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_mcp_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "zone",
            "t",
            "product",
            "requirement_row",
            "shadow_price",
            "mcp",
        ])?;
        for (zone, series) in &self.mcp {
            let duals = &self.duals[zone];
            for (t, m) in series.iter().enumerate() {
                for product in Product::ALL {
                    w.write_record([
                        zone.clone(),
                        (t + 1).to_string(),
                        product.as_str().to_string(),
                        product.requirement_kind(self.requirements).to_string(),
                        crate::num(duals[t].get(product)),
                        crate::num(m.get(product)),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn classify(raw: &RawSolution) -> Result<(), EngineError> {
    match raw.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::TimeLimit if raw.columns.is_some() => Ok(()),
        SolveStatus::TimeLimit => Err(EngineError::TimeLimitNoIncumbent),
        SolveStatus::Infeasible => Err(EngineError::Infeasible(
            "requirements or network limits cannot be met".to_string(),
        )),
        other => Err(EngineError::SolveFailed(other)),
    }
}

pub fn solve_commitment(
    model: &MilpModel,
    backend: &Backend,
    opts: &SolveOptions,
) -> Result<CommitmentSolution, EngineError> {
    let start = Instant::now();
    let raw = backend.solve(model, opts)?;
    let seconds = start.elapsed().as_secs_f64();
    classify(&raw)?;
    let values = raw.columns.ok_or(EngineError::TimeLimitNoIncumbent)?;
    if raw.status == SolveStatus::TimeLimit {
        log::warn!(
            "{}: time limit reached, using incumbent with gap {:?}",
            model.variant,
            raw.mip_gap
        );
    }
    let sol =
        CommitmentSolution::from_values(model, values, raw.mip_gap.unwrap_or(f64::NAN), seconds);
    check_feasible(model, &sol.values)?;
    Ok(sol)
}

fn check_feasible(model: &MilpModel, values: &[f64]) -> Result<(), EngineError> {
    let violated = feasible_check(model, values)?;
    match violated.first() {
        None => Ok(()),
        Some(first) => Err(EngineError::Infeasibility(violated.len(), first.clone())),
    }
}

/// Output of the restricted pricing run.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingRun {
    pub prices: PriceSet,
    /// Dispatch of the pricing LP: same binaries, continuous part re-optimized.
    pub dispatch: CommitmentSolution,
}

pub fn pricing_run(
    model: &MilpModel,
    commitment: &CommitmentSolution,
    backend: &Backend,
    opts: &SolveOptions,
) -> Result<PricingRun, EngineError> {
    let lp = model.with_fixed_integers(&commitment.values);
    let start = Instant::now();
    let mut raw = backend.solve(&lp, opts)?;
    if raw.status != SolveStatus::Optimal || raw.row_duals.is_none() {
        log::info!("{}: retrying pricing run without presolve", model.variant);
        let retry = SolveOptions {
            presolve: false,
            ..opts.clone()
        };
        raw = backend.solve(&lp, &retry)?;
    }
    let seconds = start.elapsed().as_secs_f64();
    if raw.status != SolveStatus::Optimal {
        return Err(EngineError::DualUnavailable);
    }
    let (Some(values), Some(row_duals)) = (raw.columns, raw.row_duals) else {
        return Err(EngineError::DualUnavailable);
    };
    let dispatch = CommitmentSolution::from_values(&lp, values, commitment.mip_gap, seconds);
    check_feasible(model, &dispatch.values)?;

    let option = model.variant.requirements;
    let dual_of = |kind: ConstraintKind, entity: &str, t: usize| -> Result<f64, EngineError> {
        model
            .row_index(&ConstraintTag::new(kind, entity, t + 1))
            .map(|i| row_duals[i])
            .ok_or(EngineError::DualUnavailable)
    };
    let lmp = model
        .bus_ids
        .iter()
        .map(|bus| {
            (0..model.horizon)
                .map(|t| dual_of(ConstraintKind::NodalBalance, bus, t))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut duals = BTreeMap::new();
    let mut mcp = BTreeMap::new();
    for zone in &model.zone_ids {
        let series = (0..model.horizon)
            .map(|t| {
                Ok(ReserveTriple {
                    reg: dual_of(Product::Reg.requirement_kind(option), zone, t)?,
                    spin: dual_of(Product::Spin.requirement_kind(option), zone, t)?,
                    nsp: dual_of(Product::Nsp.requirement_kind(option), zone, t)?,
                })
            })
            .collect::<Result<Vec<_>, EngineError>>()?;
        mcp.insert(
            zone.clone(),
            series.iter().map(|d| compose_mcp(option, *d)).collect(),
        );
        duals.insert(zone.clone(), series);
    }
    Ok(PricingRun {
        prices: PriceSet {
            requirements: option,
            bus_ids: model.bus_ids.clone(),
            lmp,
            duals,
            mcp,
            row_duals,
            objective: raw.objective,
        },
        dispatch,
    })
}

/// Everything produced by clearing one variant.
#[derive(Debug, Clone)]
pub struct VariantRun {
    pub variant: VariantConfig,
    pub model: MilpModel,
    /// MILP incumbent as returned by the solver.
    pub incumbent: CommitmentSolution,
    /// Pricing-run dispatch; primal counterpart of `prices`. Settlement and
    /// reports use this solution.
    pub solution: CommitmentSolution,
    pub prices: PriceSet,
}

impl VariantRun {
    /// Requirement rows that are slack by more than [`SLACK_TOL`] but carry
    /// a dual above [`DUAL_TOL`].
    pub fn slackness_violations(&self) -> Vec<ConstraintTag> {
        self.model
            .rows
            .iter()
            .zip(&self.prices.row_duals)
            .filter(|(row, &dual)| {
                row.tag.kind.is_requirement()
                    && row.activity(&self.solution.values) - row.lower > SLACK_TOL
                    && dual > DUAL_TOL
            })
            .map(|(row, _)| row.tag.clone())
            .collect()
    }

    pub fn write_outputs(&self, dir: &std::path::Path) -> std::io::Result<()> {
        use std::fs::File;
        let io = |e: csv::Error| std::io::Error::other(e);
        self.solution
            .write_commitment_csv(&self.model, File::create(dir.join("commitment.csv"))?)
            .map_err(io)?;
        self.solution
            .write_flows_csv(&self.model, File::create(dir.join("flows.csv"))?)
            .map_err(io)?;
        self.prices
            .write_lmp_csv(File::create(dir.join("prices_lmp.csv"))?)
            .map_err(io)?;
        self.prices
            .write_mcp_csv(File::create(dir.join("prices_mcp.csv"))?)
            .map_err(io)?;
        Ok(())
    }
}

pub fn run_variant(
    case: &MarketCase,
    ptdf: &PtdfMatrix,
    variant: VariantConfig,
    backend: &Backend,
    opts: &SolveOptions,
) -> Result<VariantRun, EngineError> {
    let model = build_model_with_ptdf(case, ptdf, variant);
    let incumbent = solve_commitment(&model, backend, opts)?;
    let PricingRun { prices, dispatch } = pricing_run(&model, &incumbent, backend, opts)?;
    Ok(VariantRun {
        variant,
        model,
        incumbent,
        solution: dispatch,
        prices,
    })
}
