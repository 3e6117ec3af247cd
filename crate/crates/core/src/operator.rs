//! Sparse complex operators on an indexed basis.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix in compressed sparse row storage.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    csr: CsrMatrix<C64>,
}

impl OperatorMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut coo = CooMatrix::new(dim, dim);
        for (r, c, v) in triplets {
            if v != ZERO {
                coo.push(r, c, v);
            }
        }
        Self { csr: CsrMatrix::from(&coo) }
    }

    pub fn from_real_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        Self::from_triplets(dim, triplets.into_iter().map(|(r, c, v)| (r, c, C64::new(v, 0.0))))
    }

    pub fn identity(dim: usize) -> Self {
        Self { csr: CsrMatrix::identity(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { csr: CsrMatrix::zeros(dim, dim) }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        Self::from_triplets(
            dim,
            (0..dim).flat_map(|r| (0..dim).map(move |c| (r, c))).map(|(r, c)| (r, c, m[(r, c)])),
        )
    }

    pub fn dim(&self) -> usize {
        self.csr.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn csr(&self) -> &CsrMatrix<C64> {
        &self.csr
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.csr.triplet_iter().map(|(r, c, v)| (r, c, *v))
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.csr.get_entry(row, col).map(|e| e.into_value()).unwrap_or(ZERO)
    }

    pub fn adjoint(&self) -> Self {
        let t = self.csr.transpose();
        let (offsets, indices, values) = t.disassemble();
        let values = values.into_iter().map(|v| v.conj()).collect();
        let csr = CsrMatrix::try_from_csr_data(self.dim(), self.dim(), offsets, indices, values)
            .expect("transpose yields valid CSR");
        Self { csr }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut csr = self.csr.clone();
        csr.values_mut().iter_mut().for_each(|v| *v *= s);
        Self { csr }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { csr: &self.csr + &other.csr }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { csr: &self.csr - &other.csr }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self { csr: &self.csr * &other.csr }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim());
        self.apply_into(v.as_slice(), out.as_mut_slice());
        out
    }

    /// `out = self * v`.
    pub fn apply_into(&self, v: &[C64], out: &mut [C64]) {
        for (r, row) in self.csr.row_iter().enumerate() {
            let mut acc = ZERO;
            for (&c, &x) in row.col_indices().iter().zip(row.values()) {
                acc += x * v[c];
            }
            out[r] = acc;
        }
    }

    /// `out = self * m` for a dense column-major `m`.
    pub fn mul_dense_into(&self, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let n = self.dim();
        for j in 0..m.ncols() {
            let src = m.column(j);
            let src = src.as_slice();
            let mut dst = out.column_mut(j);
            let dst = dst.as_mut_slice();
            for (r, row) in self.csr.row_iter().enumerate() {
                let mut acc = ZERO;
                for (&c, &x) in row.col_indices().iter().zip(row.values()) {
                    acc += x * src[c];
                }
                dst[r] = acc;
            }
            debug_assert_eq!(dst.len(), n);
        }
    }

    pub fn mul_dense(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim(), m.ncols());
        self.mul_dense_into(m, &mut out);
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.csr.triplet_iter() {
            m[(r, c)] += *v;
        }
        m
    }

    /// Restriction to the rows and columns listed in `indices`, in that order.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut position = vec![usize::MAX; self.dim()];
        for (k, &i) in indices.iter().enumerate() {
            position[i] = k;
        }
        let mut trip = Vec::new();
        for (k, &i) in indices.iter().enumerate() {
            let row = self.csr.row(i);
            for (&c, &v) in row.col_indices().iter().zip(row.values()) {
                let pc = position[c];
                if pc != usize::MAX {
                    trip.push((k, pc, v));
                }
            }
        }
        Self::from_triplets(indices.len(), trip)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.csr.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |H - H†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn ensure_hermitian(&self, rel_tol: f64) -> Result<()> {
        if self.is_hermitian(rel_tol) {
            Ok(())
        } else {
            Err(Error::NotHermitian(self.hermiticity_defect()))
        }
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    /// `<u| self |v>`.
    pub fn expectation(&self, v: &DVector<C64>) -> C64 {
        v.dotc(&self.apply(v))
    }
}

/// Tensor (Kronecker) product, first factor slowest.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let db = b.dim();
    let trip: Vec<_> = a
        .triplets()
        .flat_map(|(ra, ca, va)| b.triplets().map(move |(rb, cb, vb)| (ra * db + rb, ca * db + cb, va * vb)))
        .collect();
    OperatorMatrix::from_triplets(a.dim() * db, trip)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OperatorMatrix {
        OperatorMatrix::from_triplets(
            3,
            vec![(0, 1, C64::new(1.0, 2.0)), (2, 0, C64::new(-0.5, 0.0)), (1, 1, C64::new(1.0, 0.0))],
        )
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let a = sample();
        let d = a.adjoint().to_dense();
        assert_eq!(d, a.to_dense().adjoint());
        assert!(!a.is_hermitian(1e-12));
        assert!(a.add(&a.adjoint()).is_hermitian(1e-12));
    }

    #[test]
    fn dense_and_sparse_products_agree() {
        let a = sample();
        let m = DMatrix::from_fn(3, 2, |r, c| C64::new(r as f64 + 1.0, c as f64 - 0.5));
        assert_eq!(a.mul_dense(&m), a.to_dense() * &m);
        let v = DVector::from_fn(3, |r, _| C64::new(0.3 * r as f64, 1.0));
        assert_eq!(a.apply(&v), a.to_dense() * &v);
        assert_eq!(a.matmul(&a).to_dense(), a.to_dense() * a.to_dense());
    }

    #[test]
    fn restriction_and_kron() {
        let a = sample();
        let r = a.restrict(&[2, 0]);
        assert_eq!(r.get(0, 1), C64::new(-0.5, 0.0));
        assert_eq!(r.get(1, 0), ZERO);
        let k = kron(&OperatorMatrix::identity(2), &a);
        assert_eq!(k.dim(), 6);
        assert_eq!(k.get(3, 4), C64::new(1.0, 2.0));
        assert_eq!(k.get(0, 4), ZERO);
    }
}
