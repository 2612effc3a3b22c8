//! Radial exact solutions, the shifted-variable identity and the polynomial
//! non-existence criterion `A^n - n A + c = 0`.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::algebra::symmetric::elem_sym;
use crate::concavity::sampling::sample_rng;
use crate::error::{Error, Result};
use crate::solver::grid::{Grid, GridField};

/// Bracket width at which the radial bisection stops.
pub const RADIAL_TOLERANCE: f64 = 1e-13;
/// Bracket width for polynomial roots and the transition point.
pub const ROOT_TOLERANCE: f64 = 1e-13;
/// Log-spaced bracket points per decade for root isolation.
const BRACKETS_PER_DECADE: usize = 200;
/// Smallest abscissa of the root search grid.
const ROOT_GRID_FLOOR: f64 = 1e-12;

/// `P(A) = sum_{k=2}^n S_k(A, ..., A)`, the sum-of-Hessians operator on `A I`.
pub fn radial_polynomial(n: usize, a: f64) -> f64 {
    let lam = vec![a; n];
    (2..=n).map(|k| elem_sym(k, &lam).expect("k <= n")).sum()
}

/// Solves `P(A) = f` for `A > 0` by bisection on `[0, 1 + f]`.
pub fn radial_coefficient(n: usize, f: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("radial oracle needs n >= 2, got {n}")));
    }
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::precondition(format!(
            "radial coefficient needs a finite f > 0, got {f}"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0 + f);
    while hi - lo > RADIAL_TOLERANCE * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radial_polynomial(n, mid) < f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `u(x) = A (|x|^2 - 1) / 2` on the unit ball: `D^2 u = A I`, `u = 0` on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialProfile {
    pub n: usize,
    pub a: f64,
}

impl RadialProfile {
    pub fn new(n: usize, a: f64) -> Result<Self> {
        if n < 2 || !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain(format!(
                "radial profile needs n >= 2 and A > 0, got n = {n}, A = {a}"
            )));
        }
        Ok(Self { n, a })
    }

    /// The profile solving the sum-of-Hessians equation with constant `f`.
    pub fn for_rhs(n: usize, f: f64) -> Result<Self> {
        Self::new(n, radial_coefficient(n, f)?)
    }

    pub fn value(&self, point: &[f64]) -> f64 {
        let r2: f64 = point.iter().map(|x| x * x).sum();
        0.5 * self.a * (r2 - 1.0)
    }
}

/// Samples a planar profile on `grid`, which must cover the unit disk.
pub fn radial_field(profile: &RadialProfile, grid: Arc<Grid>) -> Result<GridField> {
    if profile.n != 2 {
        return Err(Error::domain("grid fields are planar; profile must have n = 2"));
    }
    let (a, b) = grid.domain().semi_axes();
    if a != 1.0 || b != 1.0 {
        return Err(Error::precondition("radial field needs the unit disk"));
    }
    let mut field = GridField::from_fn(grid, |x, y| profile.value(&[x, y]));
    field.boundary.iter_mut().for_each(|v| *v = 0.0);
    Ok(field)
}

/// `|prod(l_i + 1) - sum(l_i + 1) - (sum_{k>=2} S_k(l) - (n - 1))|`.
pub fn reduction_identity_check(lam: &[f64]) -> f64 {
    let n = lam.len();
    let prod: f64 = lam.iter().map(|l| l + 1.0).product();
    let sum: f64 = lam.iter().map(|l| l + 1.0).sum();
    let rhs = radial_sum(lam) - (n as f64 - 1.0);
    (prod - sum - rhs).abs()
}

fn radial_sum(lam: &[f64]) -> f64 {
    (2..=lam.len())
        .map(|k| elem_sym(k, lam).expect("k <= n"))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub max_defect: f64,
    /// Largest `defect / (1 + |l|_inf^n)`.
    pub max_scaled_defect: f64,
    pub pass: bool,
}

/// Random sweep of [`reduction_identity_check`] with eigenvalues uniform in `[-2, 2]`.
pub fn identity_sweep(n: usize, samples: usize, seed: u64, bound: f64) -> Result<IdentityReport> {
    if n == 0 {
        return Err(Error::domain("identity sweep needs n >= 1"));
    }
    let (mut max_defect, mut max_scaled) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let mut rng = sample_rng(seed, i);
        let lam: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let d = reduction_identity_check(&lam);
        let norm = lam.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        max_defect = max_defect.max(d);
        max_scaled = max_scaled.max(d / (1.0 + norm.powi(n as i32)));
    }
    Ok(IdentityReport {
        n,
        samples,
        seed,
        max_defect,
        max_scaled_defect: max_scaled,
        pass: max_defect <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    /// Double root located at a critical point rather than a sign change.
    pub tangent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub n: usize,
    pub c: f64,
    /// Coefficients of `A^0, A^1, ..., A^n`.
    pub coefficients: Vec<f64>,
    pub positive_roots: Vec<Root>,
    pub cone_admissible: Vec<f64>,
    pub existence: bool,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn bisect(p: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut plo = horner(p, lo);
    while hi - lo > ROOT_TOLERANCE * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pm = horner(p, mid);
        if pm == 0.0 {
            return mid;
        }
        if (pm < 0.0) == (plo < 0.0) {
            lo = mid;
            plo = pm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive zeros of `p` on `(0, hi]`, isolated on a log grid refined by the
/// critical points of `p`. Critical points where `|p|` is below `tol` are tangent roots.
fn positive_roots(p: &[f64], hi: f64, tol: f64) -> Vec<Root> {
    let dp = derivative(p);
    let decades = (hi / ROOT_GRID_FLOOR).log10();
    let count = (decades * BRACKETS_PER_DECADE as f64).ceil() as usize + 1;
    let mut grid: Vec<f64> = (0..=count)
        .map(|i| ROOT_GRID_FLOOR * (hi / ROOT_GRID_FLOOR).powf(i as f64 / count as f64))
        .collect();
    let critical: Vec<f64> = if dp.len() > 1 {
        sign_changes(&dp, &grid).into_iter().map(|(a, b)| bisect(&dp, a, b)).collect()
    } else {
        Vec::new()
    };
    grid.extend(&critical);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut roots: Vec<Root> = Vec::new();
    for &x in &critical {
        if horner(p, x).abs() <= tol {
            roots.push(Root {
                value: x,
                tangent: true,
            });
        }
    }
    for (a, b) in sign_changes(p, &grid) {
        let r = bisect(p, a, b);
        if !roots.iter().any(|t| t.tangent && (t.value - r).abs() <= 1e-9) {
            roots.push(Root {
                value: r,
                tangent: false,
            });
        }
    }
    roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    roots
}

/// Adjacent grid intervals on which `p` changes sign (a zero at a grid point
/// opens the interval to its right).
fn sign_changes(p: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    let vals: Vec<f64> = grid.iter().map(|&x| horner(p, x)).collect();
    let mut out = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            out.push((grid[i], grid[i]));
        } else if (a < 0.0) != (b < 0.0) && b != 0.0 {
            out.push((grid[i], grid[i + 1]));
        }
    }
    if vals.last() == Some(&0.0) {
        let x = *grid.last().expect("nonempty grid");
        out.push((x, x));
    }
    out
}

/// Positive roots of `A^n - n A + c` and the radial cone filter `A > 1`.
pub fn counterexample_roots(n: usize, c: f64) -> Result<RootReport> {
    if n < 2 {
        return Err(Error::domain(format!("counterexample polynomial needs n >= 2, got {n}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::precondition(format!("counterexample needs finite c > 0, got {c}")));
    }
    let mut coefficients = vec![0.0; n + 1];
    coefficients[0] = c;
    coefficients[1] = -(n as f64);
    coefficients[n] += 1.0;
    let l1: f64 = coefficients.iter().map(|v| v.abs()).sum();
    let tol = 1e-12 * (1.0 + l1);
    let hi = 1.0 + n as f64 + c;
    let positive_roots: Vec<Root> = positive_roots(&coefficients, hi, tol)
        .into_iter()
        .filter(|r| horner(&coefficients, r.value).abs() <= tol)
        .collect();
    let cone_admissible: Vec<f64> = positive_roots
        .iter()
        .filter(|r| r.value > 1.0 && !r.tangent)
        .map(|r| r.value)
        .collect();
    Ok(RootReport {
        n,
        c,
        coefficients,
        existence: !cone_admissible.is_empty(),
        positive_roots,
        cone_admissible,
    })
}

/// Locates the `c` at which existence switches off, by bisection on `[lo, hi]`.
pub fn existence_transition(n: usize, lo: f64, hi: f64) -> Result<f64> {
    let exists = |c: f64| counterexample_roots(n, c).map(|r| r.existence);
    if !exists(lo)? || exists(hi)? {
        return Err(Error::precondition(format!(
            "existence must hold at c = {lo} and fail at c = {hi}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > ROOT_TOLERANCE * b.max(1.0) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if exists(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
