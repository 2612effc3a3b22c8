//! Increasing concave scalar transforms `G` and their compositions.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Left endpoint of validity for power roots, whose derivative blows up at 0.
pub const POWER_ROOT_DOMAIN_LO: f64 = 1e-10;
/// Number of grid points used to check `G' > 0`, `G'' <= 0` at construction.
pub const SHAPE_CHECK_POINTS: usize = 10_000;
/// Upper end of the shape-check grid when the domain is unbounded.
const SHAPE_CHECK_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub enum TransformKind<T> {
    /// `G(x) = (x + shift)^(1/p)`, `p >= 1`.
    PowerRoot { p: T, shift: T },
    /// `G(x) = slope * x + intercept`, `slope > 0`.
    Affine { slope: T, intercept: T },
    /// `G_m o ... o G_1`, links applied first to last.
    Chain(Vec<ScalarTransform<T>>),
}

/// A scalar transform with `G' > 0` and `G'' <= 0` on `[domain_lo, domain_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTransform<T> {
    kind: TransformKind<T>,
    domain_lo: T,
    domain_hi: T,
}

/// `(G, G', G'')` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Real> ScalarTransform<T> {
    /// `x^(1/p)` on `[1e-10, inf)`.
    pub fn power_root(p: T) -> Result<Self> {
        Self::shifted_root(p, T::zero())
    }

    /// `(x + shift)^(1/p)` on `[1e-10 - shift, inf)`.
    pub fn shifted_root(p: T, shift: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::domain(format!(
                "power root needs p >= 1 for concavity, got {p}"
            )));
        }
        if !shift.is_finite() {
            return Err(Error::domain("power root shift must be finite"));
        }
        Self::with_domain(
            TransformKind::PowerRoot { p, shift },
            T::lit(POWER_ROOT_DOMAIN_LO) - shift,
            T::infinity(),
        )
    }

    pub fn affine(slope: T, intercept: T) -> Result<Self> {
        if !(slope > T::zero()) || !slope.is_finite() || !intercept.is_finite() {
            return Err(Error::domain(format!(
                "affine transform needs a finite positive slope, got {slope}"
            )));
        }
        Self::with_domain(
            TransformKind::Affine { slope, intercept },
            T::neg_infinity(),
            T::infinity(),
        )
    }

    /// Composition `links[m-1] o ... o links[0]` on the first link's domain.
    pub fn chain(links: Vec<ScalarTransform<T>>) -> Result<Self> {
        let first = links
            .first()
            .ok_or_else(|| Error::domain("transform chain needs at least one link"))?;
        let (lo, hi) = (first.domain_lo, first.domain_hi);
        Self::with_domain(TransformKind::Chain(links), lo, hi)
    }

    /// Composition checked only on `[lo, hi]`, which must lie in the first link's domain.
    pub fn chain_on(links: Vec<ScalarTransform<T>>, lo: T, hi: T) -> Result<Self> {
        let first = links
            .first()
            .ok_or_else(|| Error::domain("transform chain needs at least one link"))?;
        if lo < first.domain_lo || hi > first.domain_hi || !(lo <= hi) {
            return Err(Error::domain(format!(
                "[{lo}, {hi}] is not inside the first link's domain [{}, {}]",
                first.domain_lo, first.domain_hi
            )));
        }
        Self::with_domain(TransformKind::Chain(links), lo, hi)
    }

    /// Restricts the checked domain to `[lo, hi]` and re-validates.
    pub fn restricted(&self, lo: T, hi: T) -> Result<Self> {
        if lo < self.domain_lo || hi > self.domain_hi || !(lo <= hi) {
            return Err(Error::domain(format!(
                "[{lo}, {hi}] is not inside the transform domain [{}, {}]",
                self.domain_lo, self.domain_hi
            )));
        }
        Self::with_domain(self.kind.clone(), lo, hi)
    }

    fn with_domain(kind: TransformKind<T>, domain_lo: T, domain_hi: T) -> Result<Self> {
        let g = Self {
            kind,
            domain_lo,
            domain_hi,
        };
        g.check_shape()?;
        Ok(g)
    }

    /// Samples `G' > 0`, `G'' <= 0` on a grid over the (capped) domain.
    fn check_shape(&self) -> Result<()> {
        for x in self.shape_grid(SHAPE_CHECK_POINTS) {
            let j = self.jet(x);
            if !(j.d1 > T::zero()) || !(j.d2 <= T::zero()) || !j.value.is_finite() {
                return Err(Error::domain(format!(
                    "transform is not increasing and concave at x = {x}: G' = {}, G'' = {}",
                    j.d1, j.d2
                )));
            }
        }
        Ok(())
    }

    /// Sample points covering the domain; log-spaced for power-type links.
    pub fn shape_grid(&self, count: usize) -> Vec<T> {
        let cap = T::lit(SHAPE_CHECK_CAP);
        let lo = self.domain_lo.max(-cap);
        let hi = self.domain_hi.min(cap);
        let count = count.max(2);
        let last = T::from_usize_lossy(count - 1);
        match self.power_shift() {
            Some(shift) if lo + shift > T::zero() => {
                let a = (lo + shift).ln();
                let b = (hi + shift).ln();
                (0..count)
                    .map(|i| {
                        let s = T::from_usize_lossy(i) / last;
                        ((a + (b - a) * s).exp() - shift).max(lo).min(hi)
                    })
                    .collect()
            }
            _ => (0..count)
                .map(|i| {
                    let s = T::from_usize_lossy(i) / last;
                    lo + (hi - lo) * s
                })
                .collect(),
        }
    }

    fn power_shift(&self) -> Option<T> {
        match &self.kind {
            TransformKind::PowerRoot { shift, .. } => Some(*shift),
            TransformKind::Chain(links) => links.first().and_then(|l| l.power_shift()),
            TransformKind::Affine { .. } => None,
        }
    }

    pub fn kind(&self) -> &TransformKind<T> {
        &self.kind
    }

    pub fn domain(&self) -> (T, T) {
        (self.domain_lo, self.domain_hi)
    }

    /// Whether derivatives are defined and checked at `x`.
    pub fn contains(&self, x: T) -> bool {
        x >= self.domain_lo && x <= self.domain_hi
    }

    /// Whether the value alone is defined at `x` (power roots extend to `G(-shift) = 0`).
    pub fn value_defined(&self, x: T) -> bool {
        match &self.kind {
            TransformKind::PowerRoot { shift, .. } => x + *shift >= T::zero() && x <= self.domain_hi,
            TransformKind::Affine { .. } => x.is_finite(),
            TransformKind::Chain(links) => {
                let mut y = x;
                for link in links {
                    if !link.value_defined(y) {
                        return false;
                    }
                    y = link.value(y);
                }
                true
            }
        }
    }

    pub fn value(&self, x: T) -> T {
        self.jet(x).value
    }

    pub fn d1(&self, x: T) -> T {
        self.jet(x).d1
    }

    pub fn d2(&self, x: T) -> T {
        self.jet(x).d2
    }

    /// Value with first and second derivatives.
    pub fn jet(&self, x: T) -> Jet<T> {
        match &self.kind {
            TransformKind::PowerRoot { p, shift } => {
                let y = x + *shift;
                let r = T::one() / *p;
                if y == T::zero() {
                    return Jet {
                        value: T::zero(),
                        d1: T::infinity(),
                        d2: T::neg_infinity(),
                    };
                }
                let value = y.powf(r);
                Jet {
                    value,
                    d1: r * value / y,
                    d2: r * (r - T::one()) * value / (y * y),
                }
            }
            TransformKind::Affine { slope, intercept } => Jet {
                value: *slope * x + *intercept,
                d1: *slope,
                d2: T::zero(),
            },
            TransformKind::Chain(links) => {
                let mut acc = Jet {
                    value: x,
                    d1: T::one(),
                    d2: T::zero(),
                };
                for link in links {
                    let outer = link.jet(acc.value);
                    acc = Jet {
                        value: outer.value,
                        d1: outer.d1 * acc.d1,
                        d2: outer.d2 * acc.d1 * acc.d1 + outer.d1 * acc.d2,
                    };
                }
                acc
            }
        }
    }

    /// Whether `G(0) = 0`, which the sandwich bound relies on.
    pub fn vanishes_at_zero(&self) -> bool {
        self.value_defined(T::zero()) && self.value(T::zero()) == T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_root_jet() {
        let g = ScalarTransform::power_root(2.0f64).unwrap();
        let j = g.jet(4.0);
        assert!((j.value - 2.0).abs() < 1e-15);
        assert!((j.d1 - 0.25).abs() < 1e-15);
        assert!((j.d2 + 1.0 / 32.0).abs() < 1e-15);
        assert_eq!(g.domain().0, 1e-10);
        assert!(g.vanishes_at_zero());
        assert!(!g.contains(0.0));
    }

    #[test]
    fn convex_powers_are_rejected() {
        assert!(ScalarTransform::power_root(0.5).is_err());
        assert!(ScalarTransform::affine(-1.0, 0.0).is_err());
        assert!(ScalarTransform::affine(0.0, 0.0).is_err());
    }

    #[test]
    fn chain_rule_matches_finite_differences() {
        let chain = ScalarTransform::chain(vec![
            ScalarTransform::power_root(2.0).unwrap(),
            ScalarTransform::affine(3.0, 1.0).unwrap(),
            ScalarTransform::power_root(3.0).unwrap(),
        ])
        .unwrap();
        for &x in &[0.01, 0.5, 2.0, 40.0] {
            let j = chain.jet(x);
            let want = (3.0 * f64::sqrt(x) + 1.0).cbrt();
            assert!((j.value - want).abs() < 1e-14);
            let h = 1e-5 * x;
            let d1 = (chain.value(x + h) - chain.value(x - h)) / (2.0 * h);
            let d2 = (chain.value(x + h) - 2.0 * chain.value(x) + chain.value(x - h)) / (h * h);
            assert!((j.d1 - d1).abs() < 1e-6 * j.d1.abs().max(1.0));
            assert!((j.d2 - d2).abs() < 1e-3 * j.d2.abs().max(1.0));
        }
    }

    #[test]
    fn restriction_revalidates_inside_domain() {
        let g = ScalarTransform::power_root(2.0).unwrap();
        let r = g.restricted(1e-6, 1.0 / 16.0).unwrap();
        assert_eq!(r.domain(), (1e-6, 1.0 / 16.0));
        assert!(g.restricted(-1.0, 1.0).is_err());
    }

    #[test]
    fn shape_grid_spans_domain() {
        let g = ScalarTransform::power_root(3.0f64).unwrap();
        let grid = g.shape_grid(100);
        assert_eq!(grid[0], 1e-10);
        assert!((grid[99] - 1e12).abs() / 1e12 < 1e-12);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}
