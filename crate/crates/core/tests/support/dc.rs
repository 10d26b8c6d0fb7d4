//! Independent DC power flow: bus angles by Gaussian elimination.

use reserve_market::case::MarketCase;

/// Dense Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Flows from bus angles: B θ = P with the reference angle pinned to zero
/// (its balance row replaced by θ_ref = 0), then f = (θ_from − θ_to) / x.
pub fn direct_dc_flows(case: &MarketCase, injections: &[f64]) -> Vec<f64> {
    let n = case.buses.len();
    let idx = |id: &str| case.buses.iter().position(|b| b.id == id).unwrap();
    let r = idx(&case.reference_bus);
    let mut bmat = vec![vec![0.0; n]; n];
    for l in &case.lines {
        let (a, b, y) = (idx(&l.from_bus), idx(&l.to_bus), 1.0 / l.reactance);
        bmat[a][a] += y;
        bmat[b][b] += y;
        bmat[a][b] -= y;
        bmat[b][a] -= y;
    }
    let mut rhs = injections.to_vec();
    bmat[r] = vec![0.0; n];
    bmat[r][r] = 1.0;
    rhs[r] = 0.0;
    let theta = gauss_solve(bmat, rhs);
    case.lines
        .iter()
        .map(|l| (theta[idx(&l.from_bus)] - theta[idx(&l.to_bus)]) / l.reactance)
        .collect()
}
