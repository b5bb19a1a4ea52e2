//! Dense two-phase primal simplex for `min c^T x, A x = b, x >= 0`.
//!
//! Entering columns are priced by exact steepest edge: reduced cost divided by
//! the norm of the edge direction, read off the current tableau. The ratio
//! test breaks near-ties lexicographically on the scaled rows of the basis
//! inverse (kept in the artificial block), then by smallest basic index, so
//! degenerate stalls cannot cycle. The tableau is rebuilt from the original
//! data every few pivots and once more at the end, and the final basic
//! solution is obtained from an LU solve of the basis matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Smallest tableau entry accepted as a pivot.
    pub pivot_tol: f64,
    /// Phase I objective above this value means the problem is infeasible.
    pub feasibility_tol: f64,
    /// Upper bound on total pivots; `None` picks a bound from the problem size.
    pub max_pivots: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_tol: 1e-9,
            feasibility_tol: 1e-7,
            max_pivots: None,
        }
    }
}

/// A basic optimal solution.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicSolution {
    pub x: Vec<f64>,
    /// Structural columns in the final basis, ascending.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

struct Tableau<'a> {
    a: &'a DMatrix<f64>,
    b: &'a [f64],
    m: usize,
    n: usize,
    /// Row-major `m x (n + m + 1)`: structural, artificial, then rhs.
    cells: Vec<f64>,
    basis: Vec<usize>,
    pivot_tol: f64,
}

impl<'a> Tableau<'a> {
    fn new(a: &'a DMatrix<f64>, b: &'a [f64], pivot_tol: f64) -> Self {
        let (m, n) = a.shape();
        let width = n + m + 1;
        let mut cells = vec![0.0; m * width];
        for r in 0..m {
            let row = &mut cells[r * width..(r + 1) * width];
            let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                row[j] = sign * a[(r, j)];
            }
            row[n + r] = 1.0;
            row[n + m] = sign * b[r];
        }
        Tableau {
            a,
            b,
            m,
            n,
            cells,
            basis: (n..n + m).collect(),
            pivot_tol,
        }
    }

    fn width(&self) -> usize {
        self.n + self.m + 1
    }

    fn at(&self, r: usize, j: usize) -> f64 {
        self.cells[r * self.width() + j]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.n + self.m)
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width();
        let p = self.cells[r * w + e];
        let (before, rest) = self.cells.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        pivot_row.iter_mut().for_each(|x| *x /= p);
        pivot_row[e] = 1.0;
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let factor = row[e];
            if factor != 0.0 {
                for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= factor * y;
                }
                row[e] = 0.0;
            }
        }
        self.basis[r] = e;
    }

    /// Original column `j` of `[A | I]`, with rows of negative rhs flipped.
    fn original_column(&self, j: usize, r: usize) -> f64 {
        let sign = if self.b[r] < 0.0 { -1.0 } else { 1.0 };
        if j < self.n {
            sign * self.a[(r, j)]
        } else if j - self.n == r {
            1.0
        } else {
            0.0
        }
    }

    fn basis_lu(&self) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        let m = self.m;
        let bmat = DMatrix::from_fn(m, m, |r, c| self.original_column(self.basis[c], r));
        let lu = bmat.lu();
        if !lu.is_invertible() {
            return Err(Error::NumericalFailure("basis matrix became singular".into()));
        }
        Ok(lu)
    }

    /// Recomputes the tableau as `B^-1 [A | I | b]` from the original data.
    fn reinvert(&mut self) -> Result<()> {
        let (m, w) = (self.m, self.width());
        let lu = self.basis_lu()?;
        let full = DMatrix::from_fn(m, w, |r, j| {
            if j < w - 1 {
                self.original_column(j, r)
            } else {
                self.b[r].abs()
            }
        });
        let solved = lu
            .solve(&full)
            .ok_or_else(|| Error::NumericalFailure("basis solve failed".into()))?;
        for r in 0..m {
            for j in 0..w {
                self.cells[r * w + j] = solved[(r, j)];
            }
            let rhs = &mut self.cells[r * w + w - 1];
            if *rhs < 0.0 && *rhs > -self.pivot_tol {
                *rhs = 0.0;
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            for (i, row) in self.cells.chunks_exact_mut(w).enumerate() {
                row[j] = if i == r { 1.0 } else { 0.0 };
            }
        }
        Ok(())
    }

    /// Lexicographic ratio comparison of rows `a` and `b` for entering column
    /// `e`: the rows of `B^-1` (the artificial block) scaled by the pivot
    /// entry. Distinct rows of a nonsingular `B^-1` never compare equal, so
    /// this breaks every degenerate tie and prevents cycling.
    fn lex_less(&self, a: usize, b: usize, e: usize) -> bool {
        let (ta, tb) = (self.at(a, e), self.at(b, e));
        for j in self.n..self.n + self.m {
            let (va, vb) = (self.at(a, j) / ta, self.at(b, j) / tb);
            if (va - vb).abs() > 1e-12 * (1.0 + va.abs().max(vb.abs())) {
                return va < vb;
            }
        }
        self.basis[a] < self.basis[b]
    }

    /// Pivots over columns `0..allowed` until no reduced cost is below `-opt_tol`.
    fn optimize(
        &mut self,
        cost: &dyn Fn(usize) -> f64,
        allowed: usize,
        opt_tol: f64,
        pivots: &mut usize,
        max_pivots: usize,
        reinvert_every: usize,
    ) -> Result<()> {
        let m = self.m;
        let mut is_basic = vec![false; self.n + m];
        for &j in &self.basis {
            is_basic[j] = true;
        }
        loop {
            let basic_costs: Vec<f64> = self.basis.iter().map(|&j| cost(j)).collect();
            // Steepest edge: reduced cost over the norm of the edge direction,
            // both read off the tableau column.
            let mut entering: Option<(usize, f64)> = None;
            for j in (0..allowed).filter(|&j| !is_basic[j]) {
                let mut d = cost(j);
                let mut norm2 = 1.0;
                for (r, cb) in basic_costs.iter().enumerate() {
                    let t = self.at(r, j);
                    d -= cb * t;
                    norm2 += t * t;
                }
                if d < -opt_tol {
                    let score = d / norm2.sqrt();
                    if entering.is_none_or(|(_, best)| score < best) {
                        entering = Some((j, score));
                    }
                }
            }
            let Some((e, _)) = entering else {
                return Ok(());
            };

            let mut best: Option<f64> = None;
            for r in 0..m {
                let t = self.at(r, e);
                if t > self.pivot_tol {
                    let ratio = self.rhs(r).max(0.0) / t;
                    best = Some(best.map_or(ratio, |b| b.min(ratio)));
                }
            }
            let Some(min_ratio) = best else {
                return Err(Error::Unbounded);
            };
            let tie = 1e-12 * (1.0 + min_ratio);
            let leave = (0..m)
                .filter(|&r| {
                    let t = self.at(r, e);
                    t > self.pivot_tol && self.rhs(r).max(0.0) / t <= min_ratio + tie
                })
                .reduce(|a, b| if self.lex_less(b, a, e) { b } else { a })
                .expect("a row attains the minimum ratio");

            is_basic[self.basis[leave]] = false;
            is_basic[e] = true;
            self.pivot(leave, e);
            *pivots += 1;
            if *pivots > max_pivots {
                return Err(Error::NumericalCycling(*pivots));
            }
            if (*pivots).is_multiple_of(reinvert_every) {
                self.reinvert()?;
            }
        }
    }

    /// Pivots basic artificials out at zero level where a structural column allows it.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                let t = self.at(r, j).abs();
                if t > self.pivot_tol && best.is_none_or(|(_, bt)| t > bt) && !self.basis.contains(&j) {
                    best = Some((j, t));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(r, j);
            }
        }
    }
}

/// Solves `min c^T x` subject to `A x = b`, `x >= 0` and returns a vertex.
pub fn solve(a: &DMatrix<f64>, b: &[f64], c: &[f64], opts: &SimplexOptions) -> Result<BasicSolution> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.len(),
        });
    }
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.len(),
        });
    }
    let max_pivots = opts.max_pivots.unwrap_or(50 * (n + m) + 1000);
    let reinvert_every = (2 * m).max(50);
    let mut pivots = 0;
    let mut tab = Tableau::new(a, b, opts.pivot_tol);

    let phase1_cost = |j: usize| if j >= n { 1.0 } else { 0.0 };
    tab.optimize(
        &phase1_cost,
        n + m,
        opts.pivot_tol,
        &mut pivots,
        max_pivots,
        reinvert_every,
    )?;
    tab.reinvert()?;
    let infeasibility: f64 = (0..m).filter(|&r| tab.basis[r] >= n).map(|r| tab.rhs(r).abs()).sum();
    if infeasibility > opts.feasibility_tol {
        return Err(Error::Infeasible(infeasibility));
    }
    tab.drive_out_artificials();

    let cost_scale = c.iter().fold(1.0_f64, |s, x| s.max(x.abs()));
    let phase2_cost = |j: usize| if j < n { c[j] } else { 0.0 };
    tab.optimize(
        &phase2_cost,
        n,
        opts.pivot_tol * cost_scale,
        &mut pivots,
        max_pivots,
        reinvert_every,
    )?;

    let lu = tab.basis_lu()?;
    let rhs = nalgebra::DVector::from_iterator(m, b.iter().map(|v| v.abs()));
    let xb = lu
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("final basis solve failed".into()))?;
    let mut x = vec![0.0; n];
    let mut basis = Vec::with_capacity(m);
    for (r, &j) in tab.basis.iter().enumerate() {
        let v = xb[r];
        if j >= n {
            if v.abs() > opts.feasibility_tol {
                return Err(Error::NumericalFailure(format!(
                    "artificial variable left at level {v:e}"
                )));
            }
            continue;
        }
        if v < -opts.feasibility_tol {
            return Err(Error::NumericalFailure(format!(
                "basic variable {j} is negative ({v:e})"
            )));
        }
        x[j] = v.max(0.0);
        basis.push(j);
    }
    basis.sort_unstable();
    Ok(BasicSolution { x, basis, pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_lp() {
        // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6 (slacks s, t)
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0]);
        let sol = solve(&a, &[4.0, 6.0], &[-3.0, -2.0, 0.0, 0.0], &SimplexOptions::default()).unwrap();
        assert!((sol.x[0] - 4.0).abs() < 1e-12);
        assert!(sol.x[1].abs() < 1e-12);
    }

    #[test]
    fn detects_unbounded() {
        // min -x s.t. x - y = 0
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let err = solve(&a, &[0.0], &[-1.0, 0.0], &SimplexOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Unbounded));
    }

    #[test]
    fn detects_infeasible() {
        // x + y = -1 with x, y >= 0
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let err = solve(&a, &[-1.0], &[1.0, 1.0], &SimplexOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn redundant_row_is_tolerated() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        let sol = solve(&a, &[1.0, 2.0], &[3.0, 1.0, 2.0], &SimplexOptions::default()).unwrap();
        assert_eq!(sol.x, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's classic instance cycles under the plain largest-coefficient rule.
        #[rustfmt::skip]
        let a = DMatrix::from_row_slice(3, 7, &[
            0.25, -8.0, -1.0, 9.0, 1.0, 0.0, 0.0,
            0.5, -12.0, -0.5, 3.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
        ]);
        let c = [-0.75, 20.0, -0.5, 6.0, 0.0, 0.0, 0.0];
        let sol = solve(&a, &[0.0, 0.0, 1.0], &c, &SimplexOptions::default()).unwrap();
        let obj: f64 = c.iter().zip(&sol.x).map(|(c, x)| c * x).sum();
        assert!((obj + 1.25).abs() < 1e-12, "objective {obj}");
    }
}
