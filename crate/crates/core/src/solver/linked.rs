use highs::{ColProblem, HighsModelStatus, HighsSolutionStatus, Sense};

use super::{RawSolution, SolveOptions, SolveStatus};
use crate::formulation::MilpModel;

const SOLUTION_STATUS_FEASIBLE: i64 = 2;

pub fn solve_linked(model: &MilpModel, opts: &SolveOptions) -> RawSolution {
    let mut pb = ColProblem::new();
    let rows: Vec<_> = model
        .rows
        .iter()
        .map(|r| pb.add_row(r.lower..=r.upper))
        .collect();
    let mut by_col: Vec<Vec<(highs::Row, f64)>> = vec![Vec::new(); model.columns.len()];
    for (r, row) in model.rows.iter().enumerate() {
        for &(c, a) in &row.coeffs {
            by_col[c].push((rows[r], a));
        }
    }
    for (col, factors) in model.columns.iter().zip(by_col) {
        pb.add_column_with_integrality(col.cost, col.lower..=col.upper, factors, col.integer);
    }

    let mut m = pb.optimise(Sense::Minimise);
    m.make_quiet();
    m.set_option("threads", 1);
    m.set_option("random_seed", 0);
    m.set_option("mip_rel_gap", opts.mip_rel_gap);
    m.set_option("time_limit", opts.time_limit);
    if !opts.presolve {
        m.set_option("presolve", "off");
    }
    let is_mip = model.columns.iter().any(|c| c.integer);

    let solved = match m.try_solve() {
        Ok(s) => s,
        Err(status) => {
            log::warn!("HiGHS run returned {status:?}");
            return RawSolution {
                status: SolveStatus::Failed,
                columns: None,
                objective: f64::NAN,
                row_duals: None,
                mip_gap: None,
            };
        }
    };
    let status = match solved.status() {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::ReachedTimeLimit => SolveStatus::TimeLimit,
        HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
            SolveStatus::Infeasible
        }
        HighsModelStatus::Unbounded => SolveStatus::Unbounded,
        other => {
            log::warn!("HiGHS finished with status {other:?}");
            SolveStatus::Failed
        }
    };
    let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
    let has_dual = !is_mip
        && solved
            .int_info_value(c"dual_solution_status")
            .is_ok_and(|s| s == SOLUTION_STATUS_FEASIBLE);
    let sol = solved.get_solution();
    RawSolution {
        status,
        columns: has_primal.then(|| sol.columns().to_vec()),
        objective: if has_primal {
            solved.objective_value()
        } else {
            f64::NAN
        },
        row_duals: has_dual.then(|| sol.dual_rows().to_vec()),
        mip_gap: if is_mip && has_primal {
            Some(solved.mip_gap())
        } else if has_primal {
            Some(0.0)
        } else {
            None
        },
    }
}
