//! The third-derivative quadratic form whose sign makes `sum_a G(F_a(D^2 u))`
//! a subsolution of the linearized equation.

use crate::algebra::derivative::MatrixFunction;
use crate::algebra::matrix::SymMatrix;
use crate::algebra::operator::{ConvexPart, OperatorSpec};
use crate::concavity::certificate::{sweep, Certificate, Outcome, DERIVATIVE_TOLERANCE};
use crate::concavity::sampling::{random_spd, random_tensor3, sample_rng, SPD_EPSILON};
use crate::concavity::tensor::Tensor3;
use crate::concavity::transform::ScalarTransform;
use crate::error::{Error, Result};

/// Evaluates the form for `spec` at Hessian `m` and third-derivative tensor `t`.
///
/// With `g_a(c) = <grad F_a, T_c>`, `Q_a(c, d) = D^2 F_a[T_c, T_d]` and `S` the
/// sum of term gradients, the value is
///
/// `sum_a [ L^cd (G'' g_a(c) g_a(d) + G' Q_a(c,d)) + G'' S^cd g_a(c) g_a(d)
///          - G' F_a^cd Q_convex(c, d) ]`
///
/// where `L` is the gradient of the convex part and `G', G''` are taken at `F_a(m)`.
pub fn subsolution_form(spec: &OperatorSpec<f64>, m: &SymMatrix<f64>, t: &Tensor3<f64>) -> Result<f64> {
    let terms: Vec<&dyn MatrixFunction<f64>> = spec
        .terms()
        .iter()
        .map(|term| term as &dyn MatrixFunction<f64>)
        .collect();
    let convex: &ConvexPart<f64> = spec.convex();
    subsolution_form_with(convex, &terms, spec.transform(), m, t)
}

/// [`subsolution_form`] for an arbitrary convex part and list of concave terms.
pub fn subsolution_form_with(
    convex: &dyn MatrixFunction<f64>,
    terms: &[&dyn MatrixFunction<f64>],
    g: &ScalarTransform<f64>,
    m: &SymMatrix<f64>,
    t: &Tensor3<f64>,
) -> Result<f64> {
    let n = m.dim();
    if t.dim() != n {
        return Err(Error::domain(format!(
            "tensor dimension {} does not match matrix dimension {n}",
            t.dim()
        )));
    }
    m.check_finite()?;
    let slices: Vec<SymMatrix<f64>> = (0..n).map(|a| t.slice(a)).collect();
    let convex_grad = convex.gradient(m);
    let convex_q = bilinear_table(convex, m, &slices);
    let grads: Vec<SymMatrix<f64>> = terms.iter().map(|f| f.gradient(m)).collect();
    let sum_grad = grads
        .iter()
        .fold(SymMatrix::zeros(n), |acc, g| &acc + g);

    let mut total = 0.0;
    for (f, grad) in terms.iter().zip(&grads) {
        let y = f.value(m);
        if !g.contains(y) {
            return Err(Error::precondition(format!(
                "term value {y} is outside the transform domain [{}, {}]",
                g.domain().0,
                g.domain().1
            )));
        }
        let jet = g.jet(y);
        let ga: Vec<f64> = slices.iter().map(|s| grad.frobenius_dot(s)).collect();
        let qa = bilinear_table(*f, m, &slices);
        for c in 0..n {
            for d in 0..n {
                let outer = ga[c] * ga[d];
                total += convex_grad.get(c, d) * (jet.d2 * outer + jet.d1 * qa[c][d]);
                total += jet.d2 * sum_grad.get(c, d) * outer;
                total -= jet.d1 * grad.get(c, d) * convex_q[c][d];
            }
        }
    }
    Ok(total)
}

/// `D^2 F(m)[T_c, T_d]` for all slice pairs.
fn bilinear_table(
    f: &dyn MatrixFunction<f64>,
    m: &SymMatrix<f64>,
    slices: &[SymMatrix<f64>],
) -> Vec<Vec<f64>> {
    let n = slices.len();
    let mut q = vec![vec![0.0; n]; n];
    for c in 0..n {
        q[c][c] = f.hessian_form(m, &slices[c]);
        for d in 0..c {
            let v = f.hessian_bilinear(m, &slices[c], &slices[d]);
            q[c][d] = v;
            q[d][c] = v;
        }
    }
    q
}

/// Sweeps random SPD `M` and Gaussian symmetric `T`, asserting the form is `<= 1e-10`.
///
/// Samples where some term value leaves the transform domain are skipped.
pub fn certify_subsolution(spec: &OperatorSpec<f64>, samples: usize, seed: u64) -> Certificate {
    let n = spec.dim();
    sweep("subsolution_form", samples, seed, DERIVATIVE_TOLERANCE, Some(SPD_EPSILON), |i| {
        let mut rng = sample_rng(seed, i);
        let m = random_spd(n, SPD_EPSILON, &mut rng);
        let t = random_tensor3(n, &mut rng);
        match subsolution_form(spec, &m, &t) {
            Ok(v) => {
                let mut input = m.packed().to_vec();
                input.extend_from_slice(t.canonical());
                Outcome::Evaluated {
                    defect: v,
                    ratio: None,
                    input,
                }
            }
            Err(_) => Outcome::Skipped,
        }
    })
}
