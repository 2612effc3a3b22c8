use crate::algebra::matrix::SymMatrix;
use crate::scalar::Real;

/// Fully symmetric 3-tensor `T[a][i][j]`, e.g. third derivatives `u_{x_a x_i x_j}`.
///
/// Only entries with sorted indices are stored, so every permutation of an
/// index triple reads the same slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    n: usize,
    data: Vec<T>,
    slot: Vec<usize>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(n: usize) -> Self {
        Self::from_canonical_fn(n, |_, _, _| T::zero())
    }

    /// Builds the tensor from `f(i, j, k)` evaluated for `i <= j <= k`.
    pub fn from_canonical_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::new();
        let mut canonical = std::collections::BTreeMap::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    canonical.insert((i, j, k), data.len());
                    data.push(f(i, j, k));
                }
            }
        }
        let mut slot = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut idx = [a, b, c];
                    idx.sort_unstable();
                    slot.push(canonical[&(idx[0], idx[1], idx[2])]);
                }
            }
        }
        Self { n, data, slot }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize) -> T {
        self.data[self.slot[(a * self.n + i) * self.n + j]]
    }

    /// Number of independent entries, `n(n+1)(n+2)/6`.
    pub fn canonical_len(&self) -> usize {
        self.data.len()
    }

    pub fn canonical(&self) -> &[T] {
        &self.data
    }

    /// The symmetric matrix `(T[a][i][j])_{ij}` for fixed `a`.
    pub fn slice(&self, a: usize) -> SymMatrix<T> {
        SymMatrix::from_fn(self.n, |i, j| self.get(a, i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_share_storage() {
        let t = Tensor3::<f64>::from_canonical_fn(3, |i, j, k| (100 * i + 10 * j + k) as f64);
        assert_eq!(t.canonical_len(), 10);
        for (a, b, c) in [(0, 1, 2), (2, 1, 0), (1, 0, 2), (2, 0, 1)] {
            assert_eq!(t.get(a, b, c), 12.0);
        }
        assert_eq!(t.slice(2).get(0, 1), 12.0);
        assert_eq!(Tensor3::<f64>::zeros(2).canonical_len(), 4);
    }
}
