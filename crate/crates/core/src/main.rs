use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use reserve_market::case::{load_case, write_case, CaseError, VariantConfig};
use reserve_market::formulation::{build_model_with_ptdf, mps::write_mps};
use reserve_market::network::build_ptdf;
use reserve_market::offers::{
    apply_offers, compute_offers, read_history_sample, DEFAULT_NSP_MULTIPLIER,
    DEFAULT_REG_MULTIPLIER,
};
use reserve_market::solver::{Backend, SolveOptions, SOLVER_ENV};
use reserve_market::suite::{simulate, SuiteError, SuiteOptions};
use reserve_market::zoning::{
    apply_zoning, cluster_buses, size_requirements, write_requirements_csv, write_zones_csv,
    ZonePartition, DEFAULT_REG_FRACTION,
};

const EXIT_RUNTIME: u8 = 1;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "reserve-market",
    version,
    about = "Day-ahead energy and reserve market clearing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clear and settle one or more reserve-model variants.
    Simulate(SimulateArgs),
    /// Partition buses into reserve zones and size zonal requirements.
    Zone(ZoneArgs),
    /// Compute reserve offers from previous run results.
    Offers(OffersArgs),
    /// Write the model of one variant as free-format MPS.
    ExportMps(ExportArgs),
    /// Check a case file and report every problem found.
    Validate {
        #[arg(long)]
        case: PathBuf,
    },
}

#[derive(Args)]
struct ZoningFlags {
    /// Number of reserve zones; keeps the case's zones when omitted.
    #[arg(long = "zones")]
    zones: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_REG_FRACTION)]
    reg_fraction: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Linked,
    Subprocess,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    case: PathBuf,
    #[arg(
        long,
        conflicts_with = "all_variants",
        required_unless_present = "all_variants"
    )]
    variant: Option<VariantConfig>,
    #[arg(long)]
    all_variants: bool,
    #[command(flatten)]
    zoning: ZoningFlags,
    /// Relative MIP gap.
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    /// Seconds per solve.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    #[arg(long, value_enum, default_value_t = BackendKind::Linked)]
    backend: BackendKind,
    /// Solver executable for the subprocess backend (overrides the environment).
    #[arg(long)]
    solver_cmd: Option<PathBuf>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Run variants one after another.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct ZoneArgs {
    #[arg(long)]
    case: PathBuf,
    #[command(flatten)]
    zoning: ZoningFlags,
    /// Where to write the zoned case. The bus-to-zone map and the zonal
    /// requirements are written next to it as `<stem>_zones.csv` and
    /// `<stem>_requirements.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Also write the PTDF matrix as CSV.
    #[arg(long)]
    ptdf_csv: Option<PathBuf>,
}

#[derive(Args)]
struct OffersArgs {
    #[arg(long)]
    case: PathBuf,
    /// Results directory of a previous run; repeat for several days.
    #[arg(long, required = true)]
    history: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_REG_MULTIPLIER)]
    reg_multiplier: f64,
    #[arg(long, default_value_t = DEFAULT_NSP_MULTIPLIER)]
    nsp_multiplier: f64,
    /// Where to write the case with the new offers.
    #[arg(long)]
    out: PathBuf,
    /// Also write the offers as CSV.
    #[arg(long)]
    offers_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    case: PathBuf,
    #[arg(long)]
    variant: VariantConfig,
    #[arg(long)]
    out: PathBuf,
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn load(path: &PathBuf) -> Result<reserve_market::MarketCase> {
    let loaded = load_case(path)?;
    for w in &loaded.warnings {
        log::warn!("{w}");
    }
    Ok(loaded.case)
}

fn zoned(
    case: reserve_market::MarketCase,
    flags: &ZoningFlags,
) -> Result<reserve_market::MarketCase> {
    let Some(k) = flags.zones else {
        return Ok(case);
    };
    let ptdf = build_ptdf(&case)?;
    let clustering = cluster_buses(&case, &ptdf, k, flags.seed)?;
    let reqs = size_requirements(&case, &clustering.partition, flags.reg_fraction)?;
    Ok(apply_zoning(&case, &clustering.partition, reqs))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let case = zoned(load(&args.case)?, &args.zoning)?;
            let backend = match args.backend {
                BackendKind::Linked => Backend::Linked,
                BackendKind::Subprocess => match args.solver_cmd {
                    Some(cmd) => Backend::Subprocess(cmd),
                    None => Backend::subprocess_from_env().with_context(|| {
                        format!("subprocess backend needs --solver-cmd or {SOLVER_ENV}")
                    })?,
                },
            };
            let opts = SuiteOptions {
                variants: match args.variant {
                    Some(v) => vec![v],
                    None => VariantConfig::ALL.to_vec(),
                },
                backend,
                solve: SolveOptions {
                    mip_rel_gap: args.gap,
                    time_limit: args.time_limit,
                    presolve: true,
                },
                serial: args.serial,
            };
            let suite = simulate(&case, &opts, &args.out)?;
            for r in &suite.reports {
                println!(
                    "{:6} objective {:.2}  startup {:.2}",
                    r.variant().name(),
                    r.objective(),
                    r.startup_cost
                );
            }
            println!("results in {}", args.out.display());
        }
        Command::Zone(args) => {
            if args.zoning.zones.is_none() {
                bail!("--zones is required");
            }
            let case = load(&args.case)?;
            if let Some(path) = &args.ptdf_csv {
                build_ptdf(&case)?.write_csv(create(path)?)?;
            }
            let out = zoned(case, &args.zoning)?;
            write_case(&out, &args.out)
                .with_context(|| format!("cannot write {}", args.out.display()))?;
            let sibling = |suffix: &str| {
                let stem = args.out.file_stem().unwrap_or_default().to_string_lossy();
                args.out.with_file_name(format!("{stem}_{suffix}.csv"))
            };
            write_zones_csv(&ZonePartition::of_case(&out), create(&sibling("zones"))?)?;
            write_requirements_csv(&out.requirements, create(&sibling("requirements"))?)?;
            for zone in out.zone_ids() {
                let buses: Vec<&str> = out
                    .buses
                    .iter()
                    .filter(|b| out.zone_of_bus(&b.id) == Some(zone.as_str()))
                    .map(|b| b.id.as_str())
                    .collect();
                println!("{zone}: {}", buses.join(" "));
            }
        }
        Command::Offers(args) => {
            let case = load(&args.case)?;
            let history = args
                .history
                .iter()
                .map(|dir| read_history_sample(dir))
                .collect::<Result<Vec<_>, _>>()?;
            let offers = compute_offers(&history, &case, args.reg_multiplier, args.nsp_multiplier)?;
            if let Some(path) = &args.offers_csv {
                offers.write_csv(create(path)?)?;
            }
            write_case(&apply_offers(&case, &offers)?, &args.out)
                .with_context(|| format!("cannot write {}", args.out.display()))?;
        }
        Command::ExportMps(args) => {
            let case = load(&args.case)?;
            let ptdf = build_ptdf(&case)?;
            let model = build_model_with_ptdf(&case, &ptdf, args.variant);
            write_mps(&model, args.variant.name(), create(&args.out)?)?;
            println!(
                "{} columns ({} integer), {} rows",
                model.columns.len(),
                model.num_integer(),
                model.rows.len()
            );
        }
        Command::Validate { case } => match load_case(&case) {
            Ok(loaded) => {
                for w in &loaded.warnings {
                    println!("{w}");
                }
                println!("ok: {} warning(s)", loaded.warnings.len());
            }
            Err(CaseError::Validation(diags)) => {
                for d in &diags {
                    println!("{d}");
                }
                bail!("{} error(s)", diags.len());
            }
            Err(e) => return Err(e.into()),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let infeasible = e
                .downcast_ref::<SuiteError>()
                .is_some_and(SuiteError::is_infeasible);
            ExitCode::from(if infeasible {
                EXIT_INFEASIBLE
            } else {
                EXIT_RUNTIME
            })
        }
    }
}
