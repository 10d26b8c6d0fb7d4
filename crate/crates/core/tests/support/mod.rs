//! Test-only helpers: a dense two-phase simplex used as an independent LP
//! oracle, and small case builders.

#![allow(dead_code)]

pub mod brute;
pub mod cases;
pub mod dc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// `min c·x` subject to `rows` and `x ≥ 0`.
#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub c: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Cmp, f64)>,
}

impl Lp {
    pub fn new(n: usize) -> Self {
        Lp {
            c: vec![0.0; n],
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, coeffs: &[(usize, f64)], cmp: Cmp, rhs: f64) {
        let mut a = vec![0.0; self.c.len()];
        for &(j, v) in coeffs {
            a[j] += v;
        }
        self.rows.push((a, cmp, rhs));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r && row[c].abs() > 0.0 {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule; returns false when unbounded.
    fn optimize(&mut self, cost: &[f64], banned: &[bool]) -> bool {
        loop {
            let entering = (0..self.width).find(|&j| {
                !banned[j] && !self.basis.contains(&j) && {
                    let r: f64 = cost[j]
                        - self
                            .basis
                            .iter()
                            .enumerate()
                            .map(|(i, &b)| cost[b] * self.t[i][j])
                            .sum::<f64>();
                    r < -EPS
                }
            });
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][j];
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    match leave {
                        Some((li, lr))
                            if ratio > lr + EPS
                                || ((ratio - lr).abs() <= EPS
                                    && self.basis[i] > self.basis[li]) => {}
                        _ => leave = Some((i, ratio)),
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, j);
        }
    }
}

pub fn solve(lp: &Lp) -> LpResult {
    let n = lp.c.len();
    let m = lp.rows.len();
    // Columns: x (n), one slack/surplus per inequality, one artificial per row.
    let n_slack = lp.rows.iter().filter(|r| r.1 != Cmp::Eq).count();
    let width = n + n_slack + m;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0; m];
    let mut slack = n;
    for (i, (a, cmp, b)) in lp.rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[j];
        }
        match cmp {
            Cmp::Le => {
                t[i][slack] = sign;
                slack += 1;
            }
            Cmp::Ge => {
                t[i][slack] = -sign;
                slack += 1;
            }
            Cmp::Eq => {}
        }
        let art = n + n_slack + i;
        t[i][art] = 1.0;
        t[i][width] = sign * b;
        basis[i] = art;
    }
    let mut tab = Tableau { t, basis, width };

    let mut phase1 = vec![0.0; width];
    for c in phase1.iter_mut().skip(n + n_slack) {
        *c = 1.0;
    }
    let none_banned = vec![false; width];
    tab.optimize(&phase1, &none_banned);
    let infeasibility: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n + n_slack)
        .map(|(i, _)| tab.rhs(i))
        .sum();
    if infeasibility > 1e-7 {
        return LpResult::Infeasible;
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n + n_slack {
            match (0..n + n_slack).find(|&j| tab.t[i][j].abs() > EPS) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let mut phase2 = vec![0.0; width];
    phase2[..n].copy_from_slice(&lp.c);
    let mut banned = vec![false; width];
    for b in banned.iter_mut().skip(n + n_slack) {
        *b = true;
    }
    if !tab.optimize(&phase2, &banned) {
        return LpResult::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(i);
        }
    }
    let objective = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpResult::Optimal { x, objective }
}
