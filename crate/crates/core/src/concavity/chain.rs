//! Compositions `H_m = G_m o ... o G_1` of transforms with `G >= 0`, `G' >= 1`.

use crate::algebra::derivative::MatrixFunction;
use crate::algebra::matrix::SymMatrix;
use crate::algebra::operator::{ConcaveTerm, OperatorSpec};
use crate::concavity::certificate::{sweep, Certificate, Outcome, DERIVATIVE_TOLERANCE};
use crate::concavity::sampling::{random_spd, sample_rng, SPD_EPSILON};
use crate::concavity::transform::{ScalarTransform, SHAPE_CHECK_POINTS};
use crate::error::{Error, Result};

/// A validated chain of transforms on the compact input set `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformChain {
    links: Vec<ScalarTransform<f64>>,
    lo: f64,
    hi: f64,
    composed: ScalarTransform<f64>,
}

/// Checks the chain premises on `[lo, hi]` and composes the links.
///
/// Every link must be defined on the image of the preceding prefix and satisfy
/// `G >= 0` and `G' >= 1` there. The first failing sample point is reported.
pub fn build_chain(links: Vec<ScalarTransform<f64>>, lo: f64, hi: f64) -> Result<TransformChain> {
    if links.is_empty() {
        return Err(Error::domain("transform chain needs at least one link"));
    }
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("chain set [{lo}, {hi}] must be a finite interval")));
    }
    if !(links[0].contains(lo) && links[0].contains(hi)) {
        return Err(Error::ChainPremise {
            link: 0,
            point: if links[0].contains(lo) { hi } else { lo },
            reason: "set is not inside the first link's domain".into(),
        });
    }
    let last = (SHAPE_CHECK_POINTS - 1) as f64;
    let grid = (0..SHAPE_CHECK_POINTS).map(|i| lo + (hi - lo) * i as f64 / last);
    for x in grid {
        let mut y = x;
        for (idx, link) in links.iter().enumerate() {
            let fail = |reason: String| Error::ChainPremise {
                link: idx,
                point: x,
                reason,
            };
            if !link.contains(y) {
                return Err(fail(format!("prefix image {y} is outside the link domain")));
            }
            let j = link.jet(y);
            if !(j.value >= 0.0) {
                return Err(fail(format!("G = {} < 0 at prefix image {y}", j.value)));
            }
            if !(j.d1 >= 1.0) {
                return Err(fail(format!("G' = {} < 1 at prefix image {y}", j.d1)));
            }
            y = j.value;
        }
    }
    let composed = ScalarTransform::chain_on(links.clone(), lo, hi)?;
    Ok(TransformChain {
        links,
        lo,
        hi,
        composed,
    })
}

impl TransformChain {
    pub fn links(&self) -> &[ScalarTransform<f64>] {
        &self.links
    }

    pub fn set(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `H_m`, the full composition.
    pub fn composed(&self) -> &ScalarTransform<f64> {
        &self.composed
    }

    /// `H_k` for the first `k` links.
    pub fn prefix(&self, k: usize) -> Result<ScalarTransform<f64>> {
        if k == 0 || k > self.links.len() {
            return Err(Error::domain(format!(
                "prefix length {k} outside 1..={}",
                self.links.len()
            )));
        }
        ScalarTransform::chain_on(self.links[..k].to_vec(), self.lo, self.hi)
    }

    /// Midpoint concavity of `H_m o F_a` for every concave term of `spec`.
    ///
    /// Sample `i` tests term `i mod terms`. Both endpoints are rescaled so the
    /// term value is uniform in the chain set; midpoints leaving the set are skipped.
    pub fn certify(&self, spec: &OperatorSpec<f64>, samples: usize, seed: u64) -> Result<Certificate> {
        let terms = spec.terms();
        if terms.is_empty() {
            return Err(Error::precondition("operator has no concave terms to certify"));
        }
        let h = &self.composed;
        let n = spec.dim();
        Ok(sweep("chain_concavity", samples, seed, DERIVATIVE_TOLERANCE, Some(SPD_EPSILON), |i| {
            use rand::Rng;
            let term = &terms[i % terms.len()];
            let mut rng = sample_rng(seed, i);
            let endpoint = |rng: &mut rand_chacha::ChaCha8Rng| {
                let target = rng.random_range(self.lo..=self.hi);
                let m = random_spd(n, SPD_EPSILON, rng);
                rescale_to(term, &m, target)
            };
            let (Some(m1), Some(m2)) = (endpoint(&mut rng), endpoint(&mut rng)) else {
                return Outcome::Skipped;
            };
            let mid = m1.scale(0.5).add_scaled(&m2, 0.5);
            let (y1, y2, ym) = (term.value(&m1), term.value(&m2), term.value(&mid));
            if ![y1, y2, ym].iter().all(|&y| h.contains(y)) {
                return Outcome::Skipped;
            }
            let defect = 0.5 * h.value(y1) + 0.5 * h.value(y2) - h.value(ym);
            let mut input = m1.packed().to_vec();
            input.extend_from_slice(m2.packed());
            Outcome::Evaluated {
                defect,
                ratio: None,
                input,
            }
        }))
    }
}

/// Scales `m` so the (degree-`k` homogeneous) term takes the value `target`.
fn rescale_to(term: &ConcaveTerm<f64>, m: &SymMatrix<f64>, target: f64) -> Option<SymMatrix<f64>> {
    let v = term.value(m);
    if !(v > 0.0) || !(target > 0.0) {
        return None;
    }
    Some(m.scale((target / v).powf(1.0 / term.k as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_link_is_the_link_itself() {
        let g = ScalarTransform::power_root(2.0).unwrap();
        let chain = build_chain(vec![g.clone()], 1e-6, 1.0 / 16.0).unwrap();
        for &x in &[1e-6, 1e-3, 0.01, 1.0 / 16.0] {
            assert_eq!(chain.composed().value(x), g.value(x));
            assert_eq!(chain.composed().d1(x), g.d1(x));
        }
        let spec = OperatorSpec::det_plus_laplacian(2).unwrap();
        let cert = chain.certify(&spec, 500, 5).unwrap();
        assert!(cert.pass);
        assert!(cert.samples - cert.skipped > 0);
    }

    #[test]
    fn shifted_root_then_affine_satisfies_premises() {
        let links = vec![
            ScalarTransform::shifted_root(2.0, 1.0 / 16.0).unwrap(),
            ScalarTransform::affine(2.0, 0.0).unwrap(),
        ];
        let chain = build_chain(links, 0.0, 1.0 / 16.0).unwrap();
        assert!((chain.composed().value(0.0) - 0.5).abs() < 1e-15);
        let h1 = chain.prefix(1).unwrap();
        assert!((h1.value(0.0) - 0.25).abs() < 1e-15);
        let spec = OperatorSpec::det_plus_laplacian(2).unwrap();
        let cert = chain.certify(&spec, 300, 11).unwrap();
        assert_eq!(cert.samples, 300);
        if !cert.pass {
            assert!(!cert.witnesses.is_empty());
        }
    }

    #[test]
    fn slow_link_is_rejected_with_witness() {
        // sqrt has G' < 1 beyond x = 1/4
        let links = vec![ScalarTransform::power_root(2.0).unwrap()];
        match build_chain(links, 1e-6, 1.0) {
            Err(Error::ChainPremise { link, point, .. }) => {
                assert_eq!(link, 0);
                assert!(point > 0.25 - 1e-3);
            }
            other => panic!("expected premise failure, got {other:?}"),
        }
    }

    #[test]
    fn set_outside_domain_is_rejected() {
        let links = vec![ScalarTransform::power_root(2.0).unwrap()];
        assert!(matches!(
            build_chain(links, -1.0, 0.01),
            Err(Error::ChainPremise { .. })
        ));
        assert!(build_chain(vec![], 0.0, 1.0).is_err());
    }
}
