//! Dense two-phase simplex for `min cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! Bland's rule is used for both entering and leaving variables, so the
//! method terminates on degenerate problems.

use crate::error::{Error, Result};

/// Pivot and reduced-cost tolerance.
pub const LP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

/// Equality-form linear program with a row-major constraint matrix.
#[derive(Debug, Clone)]
pub struct StandardLp {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

struct Tableau {
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    rows: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    /// Objective row index (reduced costs; rhs holds minus the objective).
    fn obj(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for j in 0..w {
            self.cells[r * w + j] /= p;
        }
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.cells[i * w + j] -= f * self.cells[r * w + j];
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland pivots over columns `0..allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize, max_iter: usize) -> Result<bool> {
        for _ in 0..max_iter {
            let obj = self.obj();
            let Some(enter) = (0..allowed).find(|&j| self.at(obj, j) < -LP_EPS) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a > LP_EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-15 * br.abs().max(1.0)
                                || (ratio <= br + 1e-15 * br.abs().max(1.0) && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        Err(Error::Numerical(format!("simplex exceeded {max_iter} pivots")))
    }
}

impl StandardLp {
    pub fn solve(&self) -> Result<LpOutcome> {
        let (m, n) = (self.rows, self.cols);
        if self.a.len() != m * n || self.b.len() != m || self.c.len() != n {
            return Err(Error::mismatch(
                format!("{m}x{n} constraints, {m} rhs, {n} costs"),
                format!(
                    "{} constraints, {} rhs, {} costs",
                    self.a.len(),
                    self.b.len(),
                    self.c.len()
                ),
            ));
        }
        let width = n + m + 1;
        let mut t = Tableau {
            width,
            cells: vec![0.0; (m + 1) * width],
            basis: (n..n + m).collect(),
            rows: m,
        };
        for i in 0..m {
            let sign = if self.b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t.cells[i * width + j] = sign * self.a[i * n + j];
            }
            t.cells[i * width + n + i] = 1.0;
            t.cells[i * width + width - 1] = sign * self.b[i];
        }
        // Phase 1: minimize the sum of artificials.
        for i in 0..m {
            for j in 0..n {
                t.cells[m * width + j] -= t.at(i, j);
            }
            t.cells[m * width + width - 1] -= t.rhs(i);
        }
        let max_iter = 50 * (m + n) + 1000;
        t.optimize(n + m, max_iter)?;
        let infeasibility = -t.rhs(m);
        let scale = self.b.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        if infeasibility > LP_EPS * scale {
            return Ok(LpOutcome::Infeasible);
        }
        for i in 0..m {
            if t.basis[i] >= n {
                if let Some(j) = (0..n).find(|&j| t.at(i, j).abs() > LP_EPS) {
                    t.pivot(i, j);
                }
            }
        }
        // Phase 2 objective row.
        for j in 0..width {
            t.cells[m * width + j] = if j < n { self.c[j] } else { 0.0 };
        }
        for i in 0..m {
            let bj = t.basis[i];
            if bj < n && self.c[bj] != 0.0 {
                let f = self.c[bj];
                for j in 0..width {
                    t.cells[m * width + j] -= f * t.cells[i * width + j];
                }
            }
        }
        if !t.optimize(n, max_iter)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; n];
        for i in 0..m {
            if t.basis[i] < n {
                x[t.basis[i]] = t.rhs(i).max(0.0);
            }
        }
        let objective = x.iter().zip(&self.c).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal { x, objective })
    }
}
