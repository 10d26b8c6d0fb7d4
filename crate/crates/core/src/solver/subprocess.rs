use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use super::{RawSolution, SolveOptions, SolveStatus, SolverError};
use crate::formulation::{mps::write_mps, MilpModel};

/// Contents of a HiGHS raw solution file, keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionFile {
    pub model_status: String,
    pub objective: Option<f64>,
    pub mip_gap: Option<f64>,
    pub primal_columns: HashMap<String, f64>,
    pub dual_feasible: bool,
    pub dual_rows: HashMap<String, f64>,
}

fn parse_entry(line: &str, what: &str) -> Result<(String, f64), SolverError> {
    let mut it = line.split_whitespace();
    let (Some(name), Some(value)) = (it.next(), it.next()) else {
        return Err(SolverError::Solution(format!("bad {what} line `{line}`")));
    };
    let value = parse_value(value)
        .ok_or_else(|| SolverError::Solution(format!("bad {what} value in `{line}`")))?;
    Ok((name.to_string(), value))
}

fn parse_value(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn count(line: &str) -> Result<usize, SolverError> {
    line.split_whitespace()
        .last()
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| SolverError::Solution(format!("bad count line `{line}`")))
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, SolverError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Primal,
        Dual,
    }
    let mut out = SolutionFile::default();
    let mut lines = text.lines().map(str::trim).peekable();
    let mut section = Section::None;
    while let Some(line) = lines.next() {
        if line == "Model status" {
            out.model_status = lines.next().unwrap_or_default().to_string();
        } else if line.starts_with("# Primal solution values") {
            section = Section::Primal;
        } else if line.starts_with("# Dual solution values") {
            section = Section::Dual;
            out.dual_feasible = lines.peek().is_some_and(|l| *l == "Feasible");
        } else if line.starts_with("# Basis") {
            section = Section::None;
        } else if let Some(v) = line.strip_prefix("Objective ") {
            out.objective = parse_value(v.trim());
        } else if let Some(v) = line.strip_prefix("MipGap ") {
            out.mip_gap = parse_value(v.trim());
        } else if line.starts_with("# Columns") || line.starts_with("# Rows") {
            let is_rows = line.starts_with("# Rows");
            for _ in 0..count(line)? {
                let entry = lines
                    .next()
                    .ok_or_else(|| SolverError::Solution("truncated value list".into()))?;
                let (name, value) = parse_entry(entry, "value")?;
                match (&section, is_rows) {
                    (Section::Primal, false) => {
                        out.primal_columns.insert(name, value);
                    }
                    (Section::Dual, true) => {
                        out.dual_rows.insert(name, value);
                    }
                    _ => {}
                }
            }
        }
    }
    if out.model_status.is_empty() {
        return Err(SolverError::Solution("no model status".into()));
    }
    Ok(out)
}

fn options_text(opts: &SolveOptions) -> String {
    let mut s = format!(
        "threads = 1\nrandom_seed = 0\nmip_rel_gap = {}\ntime_limit = {}\n",
        opts.mip_rel_gap, opts.time_limit
    );
    if !opts.presolve {
        s.push_str("presolve = off\n");
    }
    s
}

/// Writes the model as MPS, runs `cmd` on it and reads the solution back.
pub fn solve_subprocess(
    cmd: &Path,
    model: &MilpModel,
    opts: &SolveOptions,
) -> Result<RawSolution, SolverError> {
    let dir = tempfile::tempdir()?;
    let model_path = dir.path().join("model.mps");
    let sol_path = dir.path().join("model.sol");
    let opts_path = dir.path().join("options.txt");
    write_mps(model, "market", fs::File::create(&model_path)?)?;
    fs::write(&opts_path, options_text(opts))?;

    let output = Command::new(cmd)
        .arg("--model_file")
        .arg(&model_path)
        .arg("--solution_file")
        .arg(&sol_path)
        .arg("--options_file")
        .arg(&opts_path)
        .arg("--time_limit")
        .arg(opts.time_limit.to_string())
        .output()
        .map_err(|e| SolverError::Backend(format!("cannot run `{}`: {e}", cmd.display())))?;
    if !sol_path.exists() {
        return Err(SolverError::Backend(format!(
            "`{}` exited with {} and wrote no solution: {}",
            cmd.display(),
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let file = parse_solution(&fs::read_to_string(&sol_path)?)?;
    to_raw(model, file)
}

fn to_raw(model: &MilpModel, file: SolutionFile) -> Result<RawSolution, SolverError> {
    let status = match file.model_status.as_str() {
        "Optimal" => SolveStatus::Optimal,
        "Time limit reached" => SolveStatus::TimeLimit,
        "Infeasible" | "Primal infeasible or unbounded" => SolveStatus::Infeasible,
        "Unbounded" => SolveStatus::Unbounded,
        _ => SolveStatus::Failed,
    };
    let is_mip = model.columns.iter().any(|c| c.integer);
    let columns = if file.primal_columns.is_empty() {
        None
    } else {
        Some(
            model
                .columns
                .iter()
                .map(|c| {
                    file.primal_columns.get(&c.name).copied().ok_or_else(|| {
                        SolverError::Solution(format!("no value for column `{}`", c.name))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        )
    };
    let row_duals = if file.dual_feasible && !is_mip {
        Some(
            model
                .rows
                .iter()
                .map(|r| {
                    let name = r.tag.to_string();
                    file.dual_rows
                        .get(&name)
                        .copied()
                        .ok_or_else(|| SolverError::Solution(format!("no dual for row `{name}`")))
                })
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let objective = match (&columns, file.objective) {
        (Some(_), Some(v)) => v,
        (Some(values), None) => model.objective(values),
        (None, _) => f64::NAN,
    };
    let mip_gap = columns.as_ref().map(|_| {
        if is_mip {
            file.mip_gap.unwrap_or(f64::NAN)
        } else {
            0.0
        }
    });
    Ok(RawSolution {
        status,
        columns,
        objective,
        row_duals,
        mip_gap,
    })
}
