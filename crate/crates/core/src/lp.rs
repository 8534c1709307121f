//! Dense two-phase simplex method with Bland's anti-cycling rule.
//!
//! The geometry code only ever needs linear programs with a handful of free
//! variables (a translation vector plus a slack) and many inequality rows.
//! Those are solved through their duals, which have one equality row per free
//! variable and one nonnegative column per inequality, so every tableau here
//! has at most seven rows.

const COST_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[f64], f64)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, *value)),
            _ => None,
        }
    }
}

#[derive(Debug, PartialEq)]
enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    /// structural columns; artificials occupy `cols..cols + rows`
    cols: usize,
    /// row-major, width `cols + rows + 1`, last entry is the right-hand side
    data: Vec<f64>,
    basis: Vec<usize>,
    sign: Vec<f64>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + self.rows + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width() - 1)
    }

    fn new(a: &[Vec<f64>], b: &[f64]) -> Self {
        let rows = a.len();
        let cols = if rows == 0 { 0 } else { a[0].len() };
        let width = cols + rows + 1;
        let mut data = vec![0.0; rows * width];
        let mut sign = vec![1.0; rows];
        for r in 0..rows {
            let s = if b[r] < 0.0 { -1.0 } else { 1.0 };
            sign[r] = s;
            for c in 0..cols {
                data[r * width + c] = s * a[r][c];
            }
            data[r * width + cols + r] = 1.0;
            data[r * width + width - 1] = s * b[r];
        }
        Tableau {
            rows,
            cols,
            data,
            basis: (cols..cols + rows).collect(),
            sign,
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let p = self.at(pr, pc);
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.data[pr * w + c];
                self.data[r * w + c] -= f * v;
            }
        }
        self.basis[pr] = pc;
    }

    /// Minimizes `cost · z` over the current basis. `allowed` masks columns
    /// that may enter.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Status {
        let w = self.width();
        for _ in 0..MAX_PIVOTS {
            // reduced costs d_j = c_j - c_B^T column_j
            let mut entering = None;
            for j in 0..w - 1 {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j];
                for r in 0..self.rows {
                    d -= cost[self.basis[r]] * self.at(r, j);
                }
                if d < -COST_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Status::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let coef = self.at(r, j);
                if coef > PIVOT_TOL {
                    // roundoff can leave degenerate rows slightly negative
                    let ratio = self.rhs(r).max(0.0) / coef;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-14
                                || ((ratio - lratio).abs() <= 1e-14 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                None => return Status::Unbounded,
                Some((r, _)) => self.pivot(r, j),
            }
        }
        Status::Unbounded
    }
}

struct StandardSolution {
    status: Status,
    y: Vec<f64>,
    duals: Vec<f64>,
}

/// Solves `min c·y  s.t.  A y = b, y ≥ 0` and returns the primal point and
/// the equality-row multipliers.
fn solve_standard(cost: &[f64], a: &[Vec<f64>], b: &[f64], phase_one_only: bool) -> StandardSolution {
    let mut t = Tableau::new(a, b);
    let rows = t.rows;
    let cols = t.cols;
    let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));

    let mut phase1 = vec![0.0; cols + rows];
    for c in phase1.iter_mut().skip(cols) {
        *c = 1.0;
    }
    t.optimize(&phase1, &|_| true);
    let infeas: f64 = (0..rows)
        .filter(|&r| t.basis[r] >= cols)
        .map(|r| t.rhs(r))
        .sum();
    let empty = StandardSolution {
        status: Status::Infeasible,
        y: vec![],
        duals: vec![],
    };
    if infeas > 1e-9 * scale {
        return empty;
    }
    // Drive remaining zero-level artificials out of the basis where possible.
    for r in 0..rows {
        if t.basis[r] >= cols {
            if let Some(j) = (0..cols).find(|&j| !t.basis.contains(&j) && t.at(r, j).abs() > 1e-9) {
                t.pivot(r, j);
            }
        }
    }
    if !phase_one_only {
        let mut c2 = vec![0.0; cols + rows];
        c2[..cols].copy_from_slice(cost);
        let status = t.optimize(&c2, &|j| j < cols);
        if status == Status::Unbounded {
            return StandardSolution {
                status,
                y: vec![],
                duals: vec![],
            };
        }
    }
    let mut y = vec![0.0; cols];
    for r in 0..rows {
        if t.basis[r] < cols {
            y[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    // pi' = c_B^T B^{-1}; B^{-1} sits in the artificial block.
    let mut duals = vec![0.0; rows];
    for (i, d) in duals.iter_mut().enumerate() {
        let mut s = 0.0;
        for r in 0..rows {
            let bj = t.basis[r];
            let cb = if bj < cols { cost[bj] } else { 0.0 };
            s += cb * t.at(r, cols + i);
        }
        *d = s * t.sign[i];
    }
    StandardSolution {
        status: Status::Optimal,
        y,
        duals,
    }
}

/// Maximizes `c · x` subject to `rows[i] · x ≤ rhs[i]` with `x` free.
///
/// Solved through the dual `min rhs·y, Aᵀy = c, y ≥ 0`; the primal optimum is
/// the vector of dual multipliers of that problem.
pub fn maximize(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> LpOutcome {
    let nvar = c.len();
    let m = rows.len();
    if m == 0 {
        return if c.iter().all(|v| *v == 0.0) {
            LpOutcome::Optimal {
                x: vec![0.0; nvar],
                value: 0.0,
            }
        } else {
            LpOutcome::Unbounded
        };
    }
    let at: Vec<Vec<f64>> = (0..nvar).map(|j| (0..m).map(|i| rows[i][j]).collect()).collect();
    let sol = solve_standard(rhs, &at, c, false);
    match sol.status {
        // dual infeasible: primal unbounded (primal feasibility is assumed by callers)
        Status::Infeasible => LpOutcome::Unbounded,
        Status::Unbounded => LpOutcome::Infeasible,
        Status::Optimal => {
            let x = sol.duals;
            let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            LpOutcome::Optimal { x, value }
        }
    }
}

/// Finds `y ≥ 0` with `A y = b`, or `None` when the system is infeasible.
pub fn feasible_point(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let cols = a.first().map_or(0, |r| r.len());
    let sol = solve_standard(&vec![0.0; cols], a, b, true);
    (sol.status == Status::Optimal).then_some(sol.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_center_maximizes_min_slack() {
        // max t s.t. x + t <= 1, -x + t <= 0, y + t <= 1, -y + t <= 0
        let rows = vec![
            vec![1.0, 0.0, 1.0],
            vec![-1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, -1.0, 1.0],
        ];
        let rhs = vec![1.0, 0.0, 1.0, 0.0];
        let (x, v) = maximize(&[0.0, 0.0, 1.0], &rows, &rhs).optimal().map(|(x, v)| (x.to_vec(), v)).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x <= -1 and -x <= -1 (x >= 1): infeasible
        let out = maximize(&[1.0], &[vec![1.0], vec![-1.0]], &[-1.0, -1.0]);
        assert_eq!(out, LpOutcome::Infeasible);
        // max x with only x >= 0
        let out = maximize(&[1.0], &[vec![-1.0]], &[0.0]);
        assert_eq!(out, LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // many identical constraints through the optimum
        let mut rows = vec![];
        let mut rhs = vec![];
        for _ in 0..20 {
            rows.push(vec![1.0, 1.0]);
            rhs.push(1.0);
        }
        rows.push(vec![-1.0, 0.0]);
        rhs.push(0.0);
        rows.push(vec![0.0, -1.0]);
        rhs.push(0.0);
        let (_, v) = maximize(&[1.0, 2.0], &rows, &rhs).optimal().map(|(x, v)| (x.to_vec(), v)).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn feasibility_of_convex_combination() {
        // (0.25, 0.25) in conv{(0,0),(1,0),(0,1)}
        let a = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]];
        assert!(feasible_point(&a, &[0.25, 0.25, 1.0]).is_some());
        assert!(feasible_point(&a, &[0.75, 0.75, 1.0]).is_none());
    }
}
