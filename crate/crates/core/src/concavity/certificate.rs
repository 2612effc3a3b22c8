//! Sampled certificates for concavity-type inequalities.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::derivative::MatrixFunction;
use crate::algebra::operator::OperatorSpec;
use crate::concavity::sampling::{random_spd, sample_rng, SPD_EPSILON};
use crate::concavity::transform::ScalarTransform;
use crate::error::{Error, Result};

/// Slack for inequalities whose sides come from finite-difference derivatives.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-10;
/// Slack for purely arithmetic inequalities.
pub const ARITHMETIC_TOLERANCE: f64 = 1e-12;
/// Every `GUARD_STRIDE`-th concavity sample uses a uniform segment parameter.
pub const GUARD_STRIDE: usize = 10;

/// A failing sample: its inputs, the signed defect and the tolerance it exceeded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub sample: usize,
    pub input: Vec<f64>,
    pub value: f64,
    pub tolerance: f64,
}

/// Outcome of a sampled certification sweep. `pass` iff no witnesses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub check: String,
    pub pass: bool,
    pub samples: usize,
    pub skipped: usize,
    pub seed: u64,
    /// Largest signed defect seen; positive values are violations before tolerance.
    pub max_violation: Option<f64>,
    pub tolerance: f64,
    /// Empirical `min G(sum y) / sum G(y)` over the evaluated samples.
    pub constant_c: Option<f64>,
    /// Diagonal shift of the SPD sampler, when matrices were sampled.
    pub spd_epsilon: Option<f64>,
    pub witnesses: Vec<Witness>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Per-sample result fed into [`assemble`].
#[derive(Debug, Clone)]
pub(crate) enum Outcome {
    Skipped,
    Evaluated {
        defect: f64,
        ratio: Option<f64>,
        input: Vec<f64>,
    },
}

/// Runs `eval` on every sample index (in parallel) and merges in index order.
pub(crate) fn sweep<F>(
    check: &str,
    samples: usize,
    seed: u64,
    tolerance: f64,
    spd_epsilon: Option<f64>,
    eval: F,
) -> Certificate
where
    F: Fn(usize) -> Outcome + Sync,
{
    let outcomes: Vec<Outcome> = (0..samples).into_par_iter().map(&eval).collect();
    assemble(check, seed, tolerance, spd_epsilon, outcomes)
}

pub(crate) fn assemble(
    check: &str,
    seed: u64,
    tolerance: f64,
    spd_epsilon: Option<f64>,
    outcomes: Vec<Outcome>,
) -> Certificate {
    let samples = outcomes.len();
    let mut skipped = 0;
    let mut max_violation: Option<f64> = None;
    let mut constant_c: Option<f64> = None;
    let mut witnesses = Vec::new();
    for (sample, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Outcome::Skipped => skipped += 1,
            Outcome::Evaluated {
                defect,
                ratio,
                input,
            } => {
                max_violation = Some(max_violation.map_or(defect, |m| m.max(defect)));
                if let Some(r) = ratio {
                    constant_c = Some(constant_c.map_or(r, |c| c.min(r)));
                }
                if defect > tolerance || defect.is_nan() {
                    witnesses.push(Witness {
                        sample,
                        input,
                        value: defect,
                        tolerance,
                    });
                }
            }
        }
    }
    Certificate {
        check: check.to_string(),
        pass: witnesses.is_empty(),
        samples,
        skipped,
        seed,
        max_violation,
        tolerance,
        constant_c,
        spd_epsilon,
        witnesses,
    }
}

/// `G(sum y) / sum G(y)` when every value is in the transform's value domain.
pub(crate) fn sandwich_ratio(values: &[f64], g: &ScalarTransform<f64>) -> Option<f64> {
    let total: f64 = values.iter().sum();
    if !values.iter().all(|&y| g.value_defined(y)) || !g.value_defined(total) {
        return None;
    }
    let denom: f64 = values.iter().map(|&y| g.value(y)).sum();
    (denom > 0.0).then(|| g.value(total) / denom)
}

/// Segment concavity of `G o F_term` on pairs of random SPD matrices.
///
/// Most samples test the midpoint; every tenth uses a uniform `t in [0, 1]`.
/// Samples whose term values leave the transform domain are skipped.
pub fn check_transform_concavity(
    spec: &OperatorSpec<f64>,
    term_index: usize,
    samples: usize,
    seed: u64,
) -> Result<Certificate> {
    let term = spec.terms().get(term_index).ok_or_else(|| {
        Error::domain(format!(
            "term index {term_index} out of range (operator has {} terms)",
            spec.terms().len()
        ))
    })?;
    let g = spec.transform();
    let n = spec.dim();
    let name = format!(
        "transform_concavity(k={}, term={term_index})",
        term.k
    );
    Ok(sweep(&name, samples, seed, DERIVATIVE_TOLERANCE, Some(SPD_EPSILON), |i| {
        let mut rng = sample_rng(seed, i);
        let m1 = random_spd(n, SPD_EPSILON, &mut rng);
        let m2 = random_spd(n, SPD_EPSILON, &mut rng);
        let t = if i % GUARD_STRIDE == 0 {
            rand::Rng::random_range(&mut rng, 0.0..=1.0)
        } else {
            0.5
        };
        let mid = m1.scale(t).add_scaled(&m2, 1.0 - t);
        let (y1, y2, ym) = (term.value(&m1), term.value(&m2), term.value(&mid));
        if ![y1, y2, ym].iter().all(|&y| g.contains(y)) {
            return Outcome::Skipped;
        }
        let defect = t * g.value(y1) + (1.0 - t) * g.value(y2) - g.value(ym);
        let mut input = m1.packed().to_vec();
        input.extend_from_slice(m2.packed());
        input.push(t);
        Outcome::Evaluated {
            defect,
            ratio: sandwich_ratio(&spec.term_values(&m1), g),
            input,
        }
    }))
}

/// The three sides of `sum G(y) >= G(sum y) >= 2^-m sum G(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichCheck {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Checks the sandwich bound for nonnegative `values` and a `G` with `G(0) = 0`.
pub fn check_sandwich(values: &[f64], g: &ScalarTransform<f64>) -> Result<SandwichCheck> {
    if values.is_empty() {
        return Err(Error::precondition("sandwich check needs at least one value"));
    }
    if let Some(y) = values.iter().find(|&&y| !(y >= 0.0)) {
        return Err(Error::precondition(format!(
            "sandwich bound needs nonnegative values, got {y}"
        )));
    }
    if !g.vanishes_at_zero() {
        return Err(Error::precondition("sandwich bound needs G(0) = 0"));
    }
    let m = values.len() as i32;
    let lhs: f64 = values.iter().map(|&y| g.value(y)).sum();
    let mid = g.value(values.iter().sum());
    let rhs = lhs * 2f64.powi(-m);
    let ok = lhs + ARITHMETIC_TOLERANCE >= mid && mid >= rhs - ARITHMETIC_TOLERANCE;
    Ok(SandwichCheck { lhs, mid, rhs, ok })
}

/// Random sandwich sweep: `m` in `1..=5`, `G = x^(1/p)` with `p` in `2..=8`,
/// values log-uniform in `[1e-6, 1e3]`.
pub fn sandwich_sweep(samples: usize, seed: u64) -> Certificate {
    let roots: Vec<ScalarTransform<f64>> = (2..=8)
        .map(|p| ScalarTransform::power_root(p as f64).expect("valid power root"))
        .collect();
    sweep("sandwich", samples, seed, ARITHMETIC_TOLERANCE, None, |i| {
        use rand::Rng;
        let mut rng = sample_rng(seed, i);
        let m = rng.random_range(1..=5usize);
        let p = rng.random_range(2..=8usize);
        let values: Vec<f64> = (0..m)
            .map(|_| 10f64.powf(rng.random_range(-6.0..3.0)))
            .collect();
        let g = &roots[p - 2];
        let s = check_sandwich(&values, g).expect("sampled values are nonnegative");
        let defect = (s.mid - s.lhs).max(s.rhs - s.mid);
        let mut input = vec![p as f64];
        input.extend_from_slice(&values);
        Outcome::Evaluated {
            defect,
            ratio: sandwich_ratio(&values, g),
            input,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::operator::{ConcaveTerm, ConvexPart};
    use crate::algebra::SymMatrix;

    fn single_term(n: usize, k: usize, p: f64) -> OperatorSpec<f64> {
        OperatorSpec::new(
            n,
            ConvexPart::Laplacian,
            vec![ConcaveTerm::elementary(n, k)],
            ScalarTransform::power_root(p).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn sandwich_hand_values() {
        let g = ScalarTransform::power_root(2.0).unwrap();
        let s = check_sandwich(&[1.0, 1.0], &g).unwrap();
        assert!((s.lhs - 2.0).abs() < 1e-15);
        assert!((s.mid - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.rhs - 0.5).abs() < 1e-15);
        assert!(s.ok);
        let s = check_sandwich(&[3.7], &g).unwrap();
        assert!(s.ok);
        assert_eq!(s.lhs, s.mid);
        assert_eq!(s.rhs, s.lhs / 2.0);
    }

    #[test]
    fn sandwich_rejects_negative_values_and_offset_transforms() {
        let g = ScalarTransform::power_root(2.0).unwrap();
        assert!(matches!(check_sandwich(&[1.0, -0.5], &g), Err(Error::Precondition(_))));
        let shifted = ScalarTransform::affine(1.0, 1.0).unwrap();
        assert!(check_sandwich(&[1.0], &shifted).is_err());
    }

    #[test]
    fn sandwich_sweep_passes_and_estimates_c() {
        let cert = sandwich_sweep(2000, 3);
        assert!(cert.pass, "{:?}", cert.witnesses.first());
        let c = cert.constant_c.unwrap();
        assert!(c > 1.0 / 32.0 && c <= 1.0 + 1e-12);
    }

    #[test]
    fn concavity_of_root_of_determinant() {
        let spec = single_term(2, 2, 2.0);
        let cert = check_transform_concavity(&spec, 0, 2000, 1).unwrap();
        assert!(cert.pass);
        assert_eq!(cert.skipped, 0);
        assert_eq!(cert.spd_epsilon, Some(SPD_EPSILON));
    }

    #[test]
    fn degenerate_segment_is_an_equality() {
        let spec = single_term(2, 2, 2.0);
        let g = spec.transform();
        let id = SymMatrix::identity(2);
        let y = spec.terms()[0].value(&id);
        let defect = 0.5 * g.value(y) + 0.5 * g.value(y) - g.value(y);
        assert_eq!(defect, 0.0);
    }

    #[test]
    fn linear_term_under_affine_transform_is_an_equality() {
        // Trace is S_1, which OperatorSpec terms exclude; exercise the pairing directly.
        let g = ScalarTransform::affine(1.0, 0.0).unwrap();
        let mut rng = sample_rng(0, 0);
        for _ in 0..100 {
            let a = random_spd(3, SPD_EPSILON, &mut rng);
            let b = random_spd(3, SPD_EPSILON, &mut rng);
            let mid = a.scale(0.5).add_scaled(&b, 0.5);
            let d = 0.5 * g.value(a.trace()) + 0.5 * g.value(b.trace()) - g.value(mid.trace());
            assert!(d.abs() < 1e-13);
        }
    }

    #[test]
    fn non_concave_transform_is_caught() {
        // det itself (p = 1) is not concave on 2x2 SPD matrices
        let spec = single_term(2, 2, 1.0);
        let cert = check_transform_concavity(&spec, 0, 500, 9).unwrap();
        assert!(!cert.pass);
        assert!(!cert.witnesses.is_empty());
        assert!(cert.max_violation.unwrap() > DERIVATIVE_TOLERANCE);
    }

    #[test]
    fn certificates_are_reproducible() {
        let spec = single_term(3, 2, 3.0);
        let a = check_transform_concavity(&spec, 0, 300, 42).unwrap();
        let b = check_transform_concavity(&spec, 0, 300, 42).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(check_transform_concavity(&spec, 5, 10, 0).is_err());
    }
}
