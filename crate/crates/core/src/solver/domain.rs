//! Strictly convex planar domains given by a quadratic defining function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A disk or axis-aligned ellipse centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexDomain {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
}

impl ConvexDomain {
    pub fn disk(radius: f64) -> Result<Self> {
        let d = ConvexDomain::Disk { radius };
        d.validate()?;
        Ok(d)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        let d = ConvexDomain::Ellipse { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.semi_axes();
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::domain(format!(
                "domain semi-axes must be finite and positive, got ({a}, {b})"
            )));
        }
        Ok(())
    }

    pub fn semi_axes(&self) -> (f64, f64) {
        match *self {
            ConvexDomain::Disk { radius } => (radius, radius),
            ConvexDomain::Ellipse { a, b } => (a, b),
        }
    }

    /// `rho = (x/a)^2 + (y/b)^2 - 1`: negative inside, zero on the boundary.
    pub fn rho(&self, x: f64, y: f64) -> f64 {
        let (a, b) = self.semi_axes();
        (x / a).powi(2) + (y / b).powi(2) - 1.0
    }

    pub fn rho_gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let (a, b) = self.semi_axes();
        [2.0 * x / (a * a), 2.0 * y / (b * b)]
    }

    /// Constant Hessian of `rho`, `diag(2/a^2, 2/b^2)`.
    pub fn rho_hessian(&self) -> [f64; 2] {
        let (a, b) = self.semi_axes();
        [2.0 / (a * a), 2.0 / (b * b)]
    }

    /// Convexity modulus: `D^2 rho >= C I`.
    pub fn convexity_modulus(&self) -> f64 {
        let [p, q] = self.rho_hessian();
        p.min(q)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rho(x, y) < 0.0
    }

    /// Same shape with both semi-axes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let d = match *self {
            ConvexDomain::Disk { radius } => ConvexDomain::Disk {
                radius: radius * factor,
            },
            ConvexDomain::Ellipse { a, b } => ConvexDomain::Ellipse {
                a: a * factor,
                b: b * factor,
            },
        };
        d.validate()?;
        Ok(d)
    }

    /// Fraction `s` in `(0, 1]` with `rho(p + s*step) = 0`, for `p` inside.
    ///
    /// Uses the cancellation-free form of the positive quadratic root.
    pub fn boundary_fraction(&self, p: [f64; 2], step: [f64; 2]) -> f64 {
        let (a, b) = self.semi_axes();
        let qa = (step[0] / a).powi(2) + (step[1] / b).powi(2);
        let qb = 2.0 * (p[0] * step[0] / (a * a) + p[1] * step[1] / (b * b));
        let qc = self.rho(p[0], p[1]);
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let s = if qb >= 0.0 {
            -2.0 * qc / (qb + disc)
        } else {
            (disc - qb) / (2.0 * qa)
        };
        s.clamp(f64::MIN_POSITIVE, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_function_signs() {
        let d = ConvexDomain::ellipse(1.0, 0.7).unwrap();
        assert!(d.rho(0.0, 0.0) < 0.0);
        assert_eq!(d.rho(1.0, 0.0), 0.0);
        assert!(d.rho(0.0, 0.71) > 0.0);
        assert!((d.convexity_modulus() - 2.0).abs() < 1e-15);
        let g = d.rho_gradient(0.0, 0.7);
        assert!(g[1] > 0.0);
        assert!(ConvexDomain::disk(0.0).is_err());
        assert!(ConvexDomain::ellipse(1.0, f64::NAN).is_err());
    }

    #[test]
    fn boundary_fraction_lands_on_boundary() {
        let d = ConvexDomain::ellipse(1.0, 0.7).unwrap();
        for &(p, s) in &[
            ([0.9, 0.0], [0.25, 0.0]),
            ([0.0, -0.65], [0.0, -0.1]),
            ([0.5, 0.5], [0.2, 0.2]),
            ([-0.6, 0.4], [-0.1, 0.1]),
        ] {
            let t = d.boundary_fraction(p, s);
            assert!(t > 0.0 && t <= 1.0);
            let r = d.rho(p[0] + t * s[0], p[1] + t * s[1]);
            assert!(r.abs() < 1e-14, "rho = {r}");
        }
    }
}
