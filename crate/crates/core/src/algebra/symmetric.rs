//! Elementary symmetric polynomials of a list of eigenvalues.
//!
//! These functions only need ring arithmetic, so they accept exact rationals
//! as well as floats.

use num_traits::Num;

use crate::error::{Error, Result};

/// All elementary symmetric polynomials `S_0, ..., S_n` of `lam`.
///
/// Expands `prod_i (1 + lam_i t)` one factor at a time; entry `k` of the
/// result is the coefficient of `t^k`.
pub fn elem_sym_all<T: Num + Clone>(lam: &[T]) -> Vec<T> {
    let n = lam.len();
    let mut e = vec![T::zero(); n + 1];
    e[0] = T::one();
    for (i, l) in lam.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let prev = e[j - 1].clone();
            e[j] = e[j].clone() + l.clone() * prev;
        }
    }
    e
}

/// `S_k(lam)`, the k-th elementary symmetric polynomial. `S_0 = 1`.
pub fn elem_sym<T: Num + Clone>(k: usize, lam: &[T]) -> Result<T> {
    let n = lam.len();
    if k > n {
        return Err(Error::domain(format!(
            "elementary symmetric order k = {k} exceeds n = {n}"
        )));
    }
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    for (i, l) in lam.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            let prev = e[j - 1].clone();
            e[j] = e[j].clone() + l.clone() * prev;
        }
    }
    Ok(e.swap_remove(k))
}

/// Signed entry point for callers that parse orders from text.
pub fn elem_sym_signed<T: Num + Clone>(k: i64, lam: &[T]) -> Result<T> {
    if k < 0 {
        return Err(Error::domain(format!(
            "elementary symmetric order must be non-negative, got {k}"
        )));
    }
    elem_sym(k as usize, lam)
}

/// Power sum `p_i = sum_j lam_j^i`.
pub fn power_sum<T: Num + Clone>(i: usize, lam: &[T]) -> T {
    lam.iter().fold(T::zero(), |acc, l| {
        let mut p = T::one();
        for _ in 0..i {
            p = p * l.clone();
        }
        acc + p
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    #[test]
    fn ones_give_binomials() {
        assert_eq!(elem_sym(2, &[1.0, 1.0, 1.0]).unwrap(), 3.0);
        let all = elem_sym_all(&[1i64; 6]);
        assert_eq!(all, vec![1, 6, 15, 20, 15, 6, 1]);
    }

    #[test]
    fn hand_expansion() {
        // 1*2 + 1*3 + 2*3
        assert_eq!(elem_sym(2, &[1.0, 2.0, 3.0]).unwrap(), 11.0);
        assert_eq!(elem_sym(3, &[1.0, 2.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn order_zero_is_one() {
        assert_eq!(elem_sym(0, &[4.0, -7.0]).unwrap(), 1.0);
        assert_eq!(elem_sym::<f64>(0, &[]).unwrap(), 1.0);
    }

    #[test]
    fn out_of_range_orders() {
        assert!(matches!(elem_sym(4, &[1.0, 2.0, 3.0]), Err(Error::Domain(_))));
        assert!(matches!(
            elem_sym_signed(-1, &[1.0, 2.0]),
            Err(Error::Domain(_))
        ));
    }

    fn rational(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    /// k S_k = sum_{i=1}^k (-1)^{i-1} S_{k-i} p_i, checked exactly.
    #[test]
    fn newton_girard_exact_rationals() {
        let lam: Vec<BigRational> = [0.5, -1.25, 3.0, 2.0, -0.75, 1.5, 0.125, -2.5]
            .iter()
            .map(|&x| rational(x))
            .collect();
        let s = elem_sym_all(&lam);
        for k in 1..=lam.len() {
            let mut rhs = BigRational::from_integer(BigInt::from(0));
            for i in 1..=k {
                let term = s[k - i].clone() * power_sum(i, &lam);
                if i % 2 == 1 {
                    rhs += term;
                } else {
                    rhs -= term;
                }
            }
            let lhs = BigRational::from_integer(BigInt::from(k as i64)) * s[k].clone();
            assert_eq!(lhs, rhs, "k = {k}");
        }
    }

    proptest! {
        #[test]
        fn newton_girard_in_floating_point(lam in prop::collection::vec(-3.0f64..3.0, 1..=8)) {
            let s = elem_sym_all(&lam);
            for k in 1..=lam.len() {
                let mut rhs = 0.0;
                let mut scale = 0.0;
                for i in 1..=k {
                    let term = s[k - i] * power_sum(i, &lam);
                    scale += term.abs();
                    rhs += if i % 2 == 1 { term } else { -term };
                }
                let lhs = k as f64 * s[k];
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + scale));
            }
        }

        #[test]
        fn float_agrees_with_exact(lam in prop::collection::vec(-4.0f64..4.0, 2..=8)) {
            let exact: Vec<BigRational> = lam.iter().map(|&x| rational(x)).collect();
            let ef = elem_sym_all(&exact);
            for k in 0..=lam.len() {
                let f = elem_sym(k, &lam).unwrap();
                let r = ef[k].clone();
                let rf = num_traits::ToPrimitive::to_f64(&r).unwrap();
                prop_assert!((f - rf).abs() <= 1e-12 * (1.0 + 4f64.powi(k as i32) * 70.0));
            }
        }
    }
}
