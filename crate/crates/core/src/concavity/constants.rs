//! Structural constants of an operator over a field of Hessians.

use serde::Serialize;

use crate::algebra::derivative::MatrixFunction;
use crate::algebra::matrix::SymMatrix;
use crate::algebra::operator::OperatorSpec;
use crate::concavity::transform::SHAPE_CHECK_POINTS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    /// Hull `[min, max]` of all term values and their partial sums.
    pub w_interval: (f64, f64),
    /// `min G'` over the hull; `None` when the hull leaves the transform domain.
    pub gamma: Option<f64>,
    /// `max |G|` over the hull; `None` when `G` is undefined somewhere on it.
    pub g_sup: Option<f64>,
    /// Oscillation of `G(-F_convex)` over the field; `None` when undefined.
    pub big_gamma: Option<f64>,
}

/// Scans `hessians` (one per grid node) for the constants of `spec`.
pub fn estimate_constants(spec: &OperatorSpec<f64>, hessians: &[SymMatrix<f64>]) -> Result<Constants> {
    if hessians.is_empty() {
        return Err(Error::precondition("constant estimation needs a nonempty field"));
    }
    let g = spec.transform();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut glo, mut ghi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut big_gamma_defined = true;
    for m in hessians {
        if m.dim() != spec.dim() {
            return Err(Error::domain("field matrix dimension does not match the operator"));
        }
        let mut partial = 0.0;
        for y in spec.term_values(m) {
            partial += y;
            lo = lo.min(y).min(partial);
            hi = hi.max(y).max(partial);
        }
        let x = -spec.convex().value(m);
        if big_gamma_defined && g.value_defined(x) {
            let v = g.value(x);
            glo = glo.min(v);
            ghi = ghi.max(v);
        } else {
            big_gamma_defined = false;
        }
    }
    if spec.terms().is_empty() {
        lo = 0.0;
        hi = 0.0;
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::precondition("field produced non-finite term values"));
    }
    let last = (SHAPE_CHECK_POINTS - 1) as f64;
    let hull: Vec<f64> = (0..SHAPE_CHECK_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / last)
        .collect();
    let gamma = (g.contains(lo) && g.contains(hi))
        .then(|| hull.iter().map(|&x| g.d1(x)).fold(f64::INFINITY, f64::min));
    let g_sup = hull
        .iter()
        .all(|&x| g.value_defined(x))
        .then(|| hull.iter().map(|&x| g.value(x).abs()).fold(0.0, f64::max));
    Ok(Constants {
        w_interval: (lo, hi),
        gamma,
        g_sup,
        big_gamma: big_gamma_defined.then_some(ghi - glo),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_point_hull() {
        let spec = OperatorSpec::det_plus_laplacian(2).unwrap();
        let m = SymMatrix::scalar(2, 2.0);
        let c = estimate_constants(&spec, &vec![m; 20]).unwrap();
        let (lo, hi) = c.w_interval;
        assert_eq!(lo, hi);
        assert!((lo - 4.0).abs() < 1e-12);
        let want = spec.transform().d1(lo);
        assert!((c.gamma.unwrap() - want).abs() < 1e-15);
        // -tr(M) < 0 is outside the root's value domain
        assert_eq!(c.big_gamma, None);
    }

    #[test]
    fn zero_convex_part_has_zero_oscillation() {
        let spec = OperatorSpec::sum_of_hessians(3).unwrap();
        let field: Vec<_> = (1..5).map(|i| SymMatrix::scalar(3, i as f64)).collect();
        let c = estimate_constants(&spec, &field).unwrap();
        assert_eq!(c.big_gamma, Some(0.0));
        // S_2 + S_3 at 4I = 48 + 64
        assert!((c.w_interval.0 - 1.0).abs() < 1e-12);
        assert!((c.w_interval.1 - 112.0).abs() < 1e-9);
        assert!(c.gamma.unwrap() > 0.0);
    }

    #[test]
    fn hull_outside_domain_leaves_gamma_undefined() {
        let spec = OperatorSpec::det_plus_laplacian(2).unwrap();
        let c = estimate_constants(&spec, &[SymMatrix::from_diagonal(&[1.0, -1.0])]).unwrap();
        assert_eq!(c.gamma, None);
        assert!(estimate_constants(&spec, &[]).is_err());
    }
}
