//! Multi-variant runs, result files and plot-ready data.
//!
//! Each requested variant is cleared and settled independently (concurrently
//! unless asked otherwise) over the same immutable case. Results land in
//! `<out>/<variant>/`, with a cross-variant `summary.csv` and long-format
//! plot tables in `<out>/plots/`.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::case::{FuelClass, MarketCase, VariantConfig};
use crate::engine::{run_variant, EngineError, Product, VariantRun};
use crate::network::{build_ptdf, NetworkError, PtdfMatrix};
use crate::settlement::{
    aggregate_by_fuel, revenue_distribution, settle, write_distribution_csv, write_fuel_shares_csv,
    FuelShare, LedgerTotals, RevenueColumn, SettlementError, SettlementReport,
};
use crate::solver::{Backend, SolveOptions};

pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("{variant} failed")]
    Engine {
        variant: VariantConfig,
        #[source]
        source: EngineError,
    },
    #[error("{variant} settlement failed")]
    Settlement {
        variant: VariantConfig,
        #[source]
        source: SettlementError,
    },
    #[error("writing results: {0}")]
    Io(#[from] std::io::Error),
}

impl SuiteError {
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            SuiteError::Engine {
                source: EngineError::Infeasible(_),
                ..
            }
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub variants: Vec<VariantConfig>,
    pub backend: Backend,
    pub solve: SolveOptions,
    pub serial: bool,
}

/// One cleared and settled variant.
#[derive(Debug, Clone)]
pub struct VariantReport {
    pub run: VariantRun,
    pub settlement: SettlementReport,
    pub fuel_shares: Vec<FuelShare>,
    pub startup_cost: f64,
}

impl VariantReport {
    pub fn variant(&self) -> VariantConfig {
        self.run.variant
    }

    pub fn objective(&self) -> f64 {
        self.run.incumbent.objective_value
    }

    pub fn totals(&self) -> LedgerTotals {
        self.settlement.totals()
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    /// In the order the variants were requested.
    pub reports: Vec<VariantReport>,
}

impl SuiteResult {
    pub fn get(&self, variant: VariantConfig) -> Option<&VariantReport> {
        self.reports.iter().find(|r| r.variant() == variant)
    }

    /// Objective of each variant minus that of the first requested one.
    pub fn objective_deltas(&self) -> Vec<(VariantConfig, f64)> {
        let base = self.reports.first().map_or(0.0, VariantReport::objective);
        self.reports
            .iter()
            .map(|r| (r.variant(), r.objective() - base))
            .collect()
    }
}

pub fn clear_and_settle(
    case: &MarketCase,
    ptdf: &PtdfMatrix,
    variant: VariantConfig,
    backend: &Backend,
    solve: &SolveOptions,
) -> Result<VariantReport, SuiteError> {
    let run = run_variant(case, ptdf, variant, backend, solve)
        .map_err(|source| SuiteError::Engine { variant, source })?;
    let settlement = settle(case, variant, &run.solution, &run.prices)
        .map_err(|source| SuiteError::Settlement { variant, source })?;
    let fuel_shares = aggregate_by_fuel(&settlement, case);
    let startup_cost = run.solution.startup_cost(case);
    Ok(VariantReport {
        run,
        settlement,
        fuel_shares,
        startup_cost,
    })
}

/// Clears every requested variant; one result per variant, in order.
pub fn run_variants(
    case: &MarketCase,
    ptdf: &PtdfMatrix,
    opts: &SuiteOptions,
) -> Vec<Result<VariantReport, SuiteError>> {
    let one = |v: VariantConfig| clear_and_settle(case, ptdf, v, &opts.backend, &opts.solve);
    if opts.serial || opts.variants.len() < 2 {
        return opts.variants.iter().map(|&v| one(v)).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = opts
            .variants
            .iter()
            .map(|&v| s.spawn(move || one(v)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("variant worker panicked"))
            .collect()
    })
}

/// Runs the suite in memory; fails on the first variant that fails.
pub fn run_suite(case: &MarketCase, opts: &SuiteOptions) -> Result<SuiteResult, SuiteError> {
    let ptdf = build_ptdf(case)?;
    let reports = run_variants(case, &ptdf, opts)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteResult { reports })
}

/// Runs the suite and writes every result file under `out_dir`. Outputs of
/// variants that succeeded are kept when another fails; a `FAILED` file
/// then lists the failures.
pub fn simulate(
    case: &MarketCase,
    opts: &SuiteOptions,
    out_dir: &Path,
) -> Result<SuiteResult, SuiteError> {
    fs::create_dir_all(out_dir)?;
    let marker = out_dir.join(FAILED_MARKER);
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    let mut failures = Vec::new();
    let result = write_suite(case, opts, out_dir, &mut failures);
    if let Err(e) = &result {
        if failures.is_empty() {
            failures.push(error_chain(e));
        }
        fs::write(&marker, failures.join("\n") + "\n")?;
    }
    result
}

/// `outer: cause: root cause` on one line.
fn error_chain(e: &dyn std::error::Error) -> String {
    let mut text = e.to_string();
    let mut source = e.source();
    while let Some(s) = source {
        text.push_str(": ");
        text.push_str(&s.to_string());
        source = s.source();
    }
    text
}

fn write_suite(
    case: &MarketCase,
    opts: &SuiteOptions,
    out_dir: &Path,
    failures: &mut Vec<String>,
) -> Result<SuiteResult, SuiteError> {
    let ptdf = build_ptdf(case)?;
    let mut reports = Vec::new();
    let mut first_error = None;
    for result in run_variants(case, &ptdf, opts) {
        match result {
            Ok(r) => {
                write_variant(case, &r, &out_dir.join(r.variant().name()))?;
                reports.push(r);
            }
            Err(e) => {
                let line = error_chain(&e);
                log::error!("{line}");
                failures.push(line);
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }
    let suite = SuiteResult { reports };
    write_summary(case, &suite, File::create(out_dir.join("summary.csv"))?)?;
    emit_plot_data(case, &suite, &out_dir.join("plots"))?;
    Ok(suite)
}

fn csv_io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

pub fn write_variant(case: &MarketCase, report: &VariantReport, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    report.run.write_outputs(dir)?;
    report
        .settlement
        .write_csv(File::create(dir.join("settlement.csv"))?)
        .map_err(csv_io)?;
    report
        .settlement
        .write_unit_costs_csv(File::create(dir.join("unit_costs.csv"))?)
        .map_err(csv_io)?;
    write_fuel_shares_csv(
        &report.fuel_shares,
        File::create(dir.join("fuel_shares.csv"))?,
    )
    .map_err(csv_io)?;
    for class in classes_in(case) {
        let path = dir.join(format!("distribution_{class}.csv"));
        write_distribution_csv(&report.settlement, class, File::create(path)?)
            .map_err(std::io::Error::other)?;
    }
    Ok(())
}

fn classes_in(case: &MarketCase) -> Vec<FuelClass> {
    FuelClass::ALL
        .into_iter()
        .filter(|c| case.generators.iter().any(|g| g.fuel_class == *c))
        .collect()
}

/// One row per variant. Contains no timing data so identical runs produce
/// identical bytes.
pub fn write_summary<W: Write>(
    case: &MarketCase,
    suite: &SuiteResult,
    out: W,
) -> std::io::Result<()> {
    let zones = case.zone_ids();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "variant",
        "objective",
        "objective_delta",
        "mip_gap",
        "startup_cost",
    ]
    .map(String::from)
    .to_vec();
    for zone in &zones {
        for p in Product::ALL {
            header.push(format!("avg_mcp_{}_{zone}", p.as_str()));
        }
    }
    header.extend(
        [
            "energy_revenue",
            "energy_cost",
            "energy_profit",
            "online_reserve_revenue",
            "online_reserve_cost",
            "online_reserve_profit",
            "nsp_revenue",
            "nsp_cost",
            "nsp_profit",
        ]
        .map(String::from),
    );
    w.write_record(&header).map_err(csv_io)?;
    for (r, (_, delta)) in suite.reports.iter().zip(suite.objective_deltas()) {
        let t = r.totals();
        let mut rec = vec![
            r.variant().name().to_string(),
            crate::num(r.objective()),
            crate::num(delta),
            crate::num(r.run.incumbent.mip_gap),
            crate::num(r.startup_cost),
        ];
        for zone in &zones {
            for p in Product::ALL {
                rec.push(crate::num(r.run.prices.average_mcp(zone, p)));
            }
        }
        rec.extend(
            [
                t.erev,
                t.ecos,
                t.epro,
                t.rrev_reg + t.rrev_spin,
                t.rcos_online,
                t.rpro_online,
                t.rrev_nsp,
                t.rcos_nsp,
                t.rpro_nsp,
            ]
            .iter()
            .map(|v| crate::num(*v)),
        );
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()
}

struct PlotTable {
    w: csv::Writer<File>,
}

impl PlotTable {
    fn create(path: &Path) -> std::io::Result<Self> {
        let mut w = csv::Writer::from_writer(File::create(path)?);
        w.write_record(["figure", "series", "x", "y"])
            .map_err(csv_io)?;
        Ok(PlotTable { w })
    }

    fn row(&mut self, figure: &str, series: &str, x: impl ToString, y: f64) -> std::io::Result<()> {
        self.w
            .write_record([figure, series, &x.to_string(), &crate::num(y)])
            .map_err(csv_io)
    }

    fn finish(mut self) -> std::io::Result<()> {
        self.w.flush()
    }
}

/// Long-format `(figure, series, x, y)` tables:
///
/// - `fig2.csv`: per-zone MCP series of the baseline variant (`fig2a_<zone>`),
///   startup cost (`fig2b`) and objective (`fig2c`) per variant;
/// - `fig3_mcp.csv`: `fig3_<product>_<zone>`, one series per variant over `t`;
/// - `fig4.csv`: revenue, cost and profit per product and variant;
/// - `fig5.csv`: fuel-class shares of energy, ancillary and total revenue;
/// - `fig6.csv`: per-generator revenues of the gas fleet and their mean and
///   population standard deviation.
pub fn emit_plot_data(case: &MarketCase, suite: &SuiteResult, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let zones = case.zone_ids();

    let mut fig2 = PlotTable::create(&dir.join("fig2.csv"))?;
    let baseline = suite
        .get(VariantConfig::NS_NC)
        .or_else(|| suite.reports.first());
    if let Some(base) = baseline {
        for zone in &zones {
            for (t, m) in base.run.prices.mcp[zone].iter().enumerate() {
                for p in Product::ALL {
                    fig2.row(&format!("fig2a_{zone}"), p.as_str(), t + 1, m.get(p))?;
                }
            }
        }
    }
    for r in &suite.reports {
        fig2.row("fig2b", r.variant().name(), "startup_cost", r.startup_cost)?;
        fig2.row("fig2c", r.variant().name(), "objective", r.objective())?;
    }
    fig2.finish()?;

    let mut fig3 = PlotTable::create(&dir.join("fig3_mcp.csv"))?;
    for p in Product::ALL {
        for zone in &zones {
            let figure = format!("fig3_{}_{zone}", p.as_str());
            for r in &suite.reports {
                for (t, m) in r.run.prices.mcp[zone].iter().enumerate() {
                    fig3.row(&figure, r.variant().name(), t + 1, m.get(p))?;
                }
            }
        }
    }
    fig3.finish()?;

    let mut fig4 = PlotTable::create(&dir.join("fig4.csv"))?;
    for r in &suite.reports {
        let t = r.totals();
        let online_rev = t.rrev_reg + t.rrev_spin;
        let entries = [
            ("energy_revenue", t.erev),
            ("energy_cost", t.ecos),
            ("energy_profit", t.epro),
            ("online_reserve_revenue", online_rev),
            ("online_reserve_cost", t.rcos_online),
            ("online_reserve_profit", t.rpro_online),
            ("nsp_revenue", t.rrev_nsp),
            ("nsp_cost", t.rcos_nsp),
            ("nsp_profit", t.rpro_nsp),
            ("total_revenue", t.erev + online_rev + t.rrev_nsp),
            ("total_cost", t.ecos + t.rcos_online + t.rcos_nsp),
            ("total_profit", t.epro + t.rpro_online + t.rpro_nsp),
        ];
        for (x, y) in entries {
            fig4.row("fig4", r.variant().name(), x, y)?;
        }
    }
    fig4.finish()?;

    let mut fig5 = PlotTable::create(&dir.join("fig5.csv"))?;
    for r in &suite.reports {
        for s in &r.fuel_shares {
            fig5.row(
                "fig5_energy",
                r.variant().name(),
                s.class,
                s.energy_revenue_share,
            )?;
            fig5.row(
                "fig5_ancillary",
                r.variant().name(),
                s.class,
                s.ancillary_revenue_share,
            )?;
            fig5.row(
                "fig5_total",
                r.variant().name(),
                s.class,
                s.total_revenue_share,
            )?;
        }
    }
    fig5.finish()?;

    let mut fig6 = PlotTable::create(&dir.join("fig6.csv"))?;
    for r in &suite.reports {
        for column in RevenueColumn::ALL {
            let Ok(d) = revenue_distribution(&r.settlement, FuelClass::NG, column) else {
                continue;
            };
            let figure = format!("fig6_{}", column.as_str());
            for (gen, v) in &d.values {
                fig6.row(&figure, r.variant().name(), gen, *v)?;
            }
            fig6.row(
                &format!("{figure}_stats"),
                r.variant().name(),
                "mean",
                d.mean,
            )?;
            fig6.row(
                &format!("{figure}_stats"),
                r.variant().name(),
                "stddev",
                d.stddev,
            )?;
        }
    }
    fig6.finish()
}
