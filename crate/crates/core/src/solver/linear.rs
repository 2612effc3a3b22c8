//! Sparse assembly of `L^{ab} d_a d_b` on the cut-cell grid and a
//! Jacobi-preconditioned BiCGSTAB solver.

use crate::algebra::matrix::SymMatrix;
use crate::error::{Error, Result};
use crate::solver::grid::{second_difference_weights, GridField, Neighbor};

/// Relative residual target of [`bicgstab`], measured on the row-scaled system.
pub const LINEAR_TOLERANCE: f64 = 1e-12;
pub const MAX_LINEAR_ITERATIONS: usize = 10_000;

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().expect("entry exists") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_start.push(cols.len());
        }
        Self {
            n,
            row_start,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_start[r]..self.row_start[r + 1])
                    .find(|&k| self.cols[k] == r)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_start[r]..self.row_start[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *o = s;
        }
    }

    /// Divides every row by `scale[row]`.
    fn scale_rows(&mut self, scale: &[f64]) {
        for r in 0..self.n {
            for k in self.row_start[r]..self.row_start[r + 1] {
                self.vals[k] /= scale[r];
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of a converged Krylov solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` by BiCGSTAB with diagonal (Jacobi) preconditioning.
///
/// The rows are scaled by the diagonal first, and convergence is declared when
/// `|D^-1 (b - A x)| <= LINEAR_TOLERANCE |D^-1 b|` for the true residual.
pub fn bicgstab(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearStats)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Internal("right-hand side length mismatch".into()));
    }
    let diag = a.diagonal();
    if let Some(r) = diag.iter().position(|d| !(d.abs() > 0.0) || !d.is_finite()) {
        return Err(Error::Numerical {
            stage: "linear solve".into(),
            reason: format!("zero or non-finite diagonal in row {r}"),
            residual: f64::NAN,
        });
    }
    let mut m = a.clone();
    m.scale_rows(&diag);
    let rhs: Vec<f64> = b.iter().zip(&diag).map(|(v, d)| v / d).collect();
    let bnorm = norm(&rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            LinearStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let target = LINEAR_TOLERANCE * bnorm;
    let mut r = rhs.clone();
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega): (f64, f64, f64) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut iterations = 0;
    while iterations < MAX_LINEAR_ITERATIONS {
        iterations += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 || !omega.is_finite() || omega == 0.0 {
            // breakdown: restart from the true residual
            m.mul_vec(&x, &mut t);
            for i in 0..n {
                r[i] = rhs[i] - t[i];
            }
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            if norm(&r) <= target {
                break;
            }
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.mul_vec(&p, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= target {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            if true_residual(&m, &x, &rhs, &mut t) <= target {
                break;
            }
            r.copy_from_slice(&t);
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            omega = 1.0;
            alpha = 1.0;
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        m.mul_vec(&s, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) <= target {
            if true_residual(&m, &x, &rhs, &mut t) <= target {
                break;
            }
            r.copy_from_slice(&t);
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            omega = 1.0;
            alpha = 1.0;
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
        }
    }
    let achieved = true_residual(&m, &x, &rhs, &mut t) / bnorm;
    if !(achieved <= LINEAR_TOLERANCE) {
        return Err(Error::Numerical {
            stage: "linear solve".into(),
            reason: format!("BiCGSTAB reached {iterations} iterations without converging"),
            residual: achieved,
        });
    }
    Ok((
        x,
        LinearStats {
            iterations,
            relative_residual: achieved,
        },
    ))
}

/// Writes `rhs - m x` into `work` and returns its norm.
fn true_residual(m: &CsrMatrix, x: &[f64], rhs: &[f64], work: &mut [f64]) -> f64 {
    m.mul_vec(x, work);
    for i in 0..work.len() {
        work[i] = rhs[i] - work[i];
    }
    norm(work)
}

/// Stencil coefficients of `L^{ab} d_ab` per line: x, y, diagonal, anti-diagonal.
///
/// The mixed term uses `d_xy = (D_diag - D_anti) / 4` and the gradient pairing
/// counts `L^{12}` twice.
pub fn line_coefficients(l: &SymMatrix<f64>) -> [f64; 4] {
    let c = 0.5 * l.get(0, 1);
    [l.get(0, 0), l.get(1, 1), c, -c]
}

/// Assembles the matrix of `w -> L^{ab}(x) d_ab w` over interior nodes and the
/// contribution of the boundary values `g` at cut points.
pub fn assemble(coefficients: &[SymMatrix<f64>], g: &GridField) -> (CsrMatrix, Vec<f64>) {
    let grid = g.grid();
    let h = grid.h();
    let mut rows = Vec::with_capacity(grid.len());
    let mut boundary = vec![0.0; grid.len()];
    for (node, l) in coefficients.iter().enumerate() {
        let st = grid.stencil(node);
        let coef = line_coefficients(l);
        let mut row = Vec::with_capacity(9);
        let mut center = 0.0;
        for (line, &c) in coef.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (p, m) = (st[2 * line], st[2 * line + 1]);
            let (wp, wm, w0) = second_difference_weights(p.fraction(), m.fraction(), h);
            center += c * w0;
            for (nb, w) in [(p, wp), (m, wm)] {
                match nb {
                    Neighbor::Node(k) => row.push((k, c * w)),
                    Neighbor::Cut { id, .. } => boundary[node] += c * w * g.boundary[id],
                }
            }
        }
        row.push((node, center));
        rows.push(row);
    }
    (CsrMatrix::from_rows(rows), boundary)
}

/// Solves `L^{ab} d_ab w = rhs` at interior nodes with `w = g` on cut points.
pub fn linear_solve(
    coefficients: &[SymMatrix<f64>],
    rhs: &[f64],
    g: &GridField,
) -> Result<(GridField, LinearStats)> {
    let n = g.grid().len();
    if coefficients.len() != n || rhs.len() != n {
        return Err(Error::domain("coefficient and right-hand side fields must match the grid"));
    }
    for (k, l) in coefficients.iter().enumerate() {
        if !l.is_positive_definite() {
            return Err(Error::precondition(format!(
                "linearization is not positive definite at node {k}"
            )));
        }
    }
    let (a, bc) = assemble(coefficients, g);
    let b: Vec<f64> = rhs.iter().zip(&bc).map(|(r, c)| r - c).collect();
    let (x, stats) = bicgstab(&a, &b)?;
    Ok((GridField::new(g.grid().clone(), x, g.boundary.clone())?, stats))
}
