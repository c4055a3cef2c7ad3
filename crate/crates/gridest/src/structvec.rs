//! Vectorization operators and the structural matrices that eliminate
//! redundant admittance parameters.
//!
//! A symmetric `n x n` matrix has `n(n+1)/2` free entries and a symmetric
//! Laplacian only `n(n-1)/2` (one per edge). The duplication matrix `D` and
//! the transformation matrix `T` relate the three vectorizations:
//!
//! ```text
//! vec(A)  = D * vech(A)          for symmetric A
//! vech(A) = T * ve(A)            for Laplacian A
//! ```
//!
//! `vec` stacks columns top to bottom (column-major), which is the
//! orientation under which `vec(Y V) = (V' ⊗ I) vec(Y)` holds; `vech` keeps
//! the lower triangle including the diagonal; `ve` holds the negated strict
//! lower triangle, i.e. the line admittances of an admittance matrix.

use crate::{CMatrix, CVector, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[cfg(test)]
use num_complex::Complex64;

/// Which structural constraint the parameter vector encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamMode {
    /// All `n^2` entries are free.
    Full,
    /// Symmetric matrix, parameters = `vech(Y)`.
    Symmetric,
    /// Symmetric Laplacian, parameters = `ve(Y)`.
    Laplacian,
}

/// A parametrization of an `n x n` admittance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parametrization {
    pub mode: ParamMode,
    pub n: usize,
}

impl Parametrization {
    pub fn new(mode: ParamMode, n: usize) -> Result<Self> {
        let min = match mode {
            ParamMode::Laplacian => 2,
            _ => 1,
        };
        if n < min {
            return Err(Error::TooFewBuses { min, got: n });
        }
        Ok(Self { mode, n })
    }

    /// Number of free parameters.
    pub fn dim(&self) -> usize {
        let n = self.n;
        match self.mode {
            ParamMode::Full => n * n,
            ParamMode::Symmetric => n * (n + 1) / 2,
            ParamMode::Laplacian => n * (n - 1) / 2,
        }
    }
}

/// Kind of structural matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructKind {
    Duplication,
    Transformation,
}

/// Sparse integer matrix with entries in `{-1, 0, 1}`.
///
/// `D` is `(n^2, n(n+1)/2)` with a single `1` per row; storing it densely
/// wastes O(n^4) memory, so entries are kept as triplets and a dense view is
/// materialized on demand.
#[derive(Debug, Clone)]
pub struct StructMatrix {
    kind: StructKind,
    rows: usize,
    cols: usize,
    /// `(row, col, sign)` triplets.
    entries: Vec<(usize, usize, i8)>,
}

impl StructMatrix {
    pub fn kind(&self) -> StructKind {
        self.kind
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, i8)] {
        &self.entries
    }

    /// Dense view of the matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, s) in &self.entries {
            m[(r, c)] += f64::from(s);
        }
        m
    }

    /// `self * x` for a complex vector `x`.
    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
                context: "StructMatrix::apply",
            });
        }
        let mut out = CVector::zeros(self.rows);
        for &(r, c, s) in &self.entries {
            if s >= 0 {
                out[r] += x[c];
            } else {
                out[r] -= x[c];
            }
        }
        Ok(out)
    }
}

/// Zero-based position of entry `(i, j)` in `vec` of an `n x n` matrix.
#[inline]
pub fn vec_index(i: usize, j: usize, n: usize) -> usize {
    j * n + i
}

/// Zero-based position of entry `(i, j)`, `i >= j`, in `vech`.
#[inline]
pub fn vech_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i >= j && i < n);
    j * n - j * (j + 1) / 2 + i
}

/// Zero-based position of entry `(i, j)`, `i > j`, in `ve`.
#[inline]
pub fn ve_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i > j && i < n);
    j * (n - 1) - j * (j + 1) / 2 + i - 1
}

/// Column-major stacking of a matrix into a vector.
pub fn vec_mat(a: &CMatrix) -> CVector {
    let (rows, cols) = a.shape();
    // nalgebra stores column-major, so iteration order matches vec().
    CVector::from_iterator(rows * cols, a.iter().copied())
}

/// Half-vectorization: lower triangle including the diagonal, column by column.
pub fn vech(a: &CMatrix) -> Result<CVector> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    let n = rows;
    let mut out = CVector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            out[k] = a[(i, j)];
            k += 1;
        }
    }
    Ok(out)
}

/// Non-redundant vectorization of a Laplacian: negated strict lower triangle,
/// column by column. For an admittance matrix these are the line admittances
/// `y_ik` (since `Y_ik = -y_ik`).
pub fn ve(a: &CMatrix) -> Result<CVector> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    let n = rows;
    if n < 2 {
        return Err(Error::TooFewBuses { min: 2, got: n });
    }
    let mut out = CVector::zeros(n * (n - 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for i in j + 1..n {
            out[k] = -a[(i, j)];
            k += 1;
        }
    }
    Ok(out)
}

/// The unique `(n^2, n(n+1)/2)` duplication matrix `D` with
/// `vec(A) = D vech(A)` for every symmetric `A`.
pub fn duplication_matrix(n: usize) -> Result<StructMatrix> {
    if n < 1 {
        return Err(Error::TooFewBuses { min: 1, got: n });
    }
    let cols = n * (n + 1) / 2;
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in j..n {
            let c = vech_index(i, j, n);
            entries.push((vec_index(i, j, n), c, 1));
            if i != j {
                entries.push((vec_index(j, i, n), c, 1));
            }
        }
    }
    Ok(StructMatrix {
        kind: StructKind::Duplication,
        rows: n * n,
        cols,
        entries,
    })
}

/// The unique `(n(n+1)/2, n(n-1)/2)` transformation matrix `T` with
/// `vech(A) = T ve(A)` for every symmetric Laplacian `A`.
///
/// Row by row: the row of an off-diagonal slot `(i, j)` holds a single `-1`
/// at that edge's position; the row of a diagonal slot `(j, j)` holds a `+1`
/// at the position of every edge incident to bus `j`, because a Laplacian
/// diagonal equals minus the sum of its row's off-diagonal entries.
pub fn transformation_matrix(n: usize) -> Result<StructMatrix> {
    if n < 2 {
        return Err(Error::TooFewBuses { min: 2, got: n });
    }
    let rows = n * (n + 1) / 2;
    let cols = n * (n - 1) / 2;
    let mut entries = Vec::with_capacity(rows + cols);
    for j in 0..n {
        for i in j..n {
            let r = vech_index(i, j, n);
            if i == j {
                for m in 0..n {
                    if m != j {
                        let (a, b) = if m > j { (m, j) } else { (j, m) };
                        entries.push((r, ve_index(a, b, n), 1));
                    }
                }
            } else {
                entries.push((r, ve_index(i, j, n), -1));
            }
        }
    }
    Ok(StructMatrix {
        kind: StructKind::Transformation,
        rows,
        cols,
        entries,
    })
}

/// Rebuild the full `n x n` matrix from a parameter vector.
///
/// Laplacian mode applies `D T`, symmetric mode `D`, full mode reshapes
/// directly. Symmetric and Laplacian outputs are exactly symmetric by
/// construction; Laplacian rows sum to zero up to summation rounding.
pub fn reconstruct_admittance(x: &CVector, p: Parametrization) -> Result<CMatrix> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x.len(),
            context: "reconstruct_admittance",
        });
    }
    let n = p.n;
    let v = match p.mode {
        ParamMode::Full => x.clone(),
        ParamMode::Symmetric => duplication_matrix(n)?.apply(x)?,
        ParamMode::Laplacian => {
            let vech = transformation_matrix(n)?.apply(x)?;
            duplication_matrix(n)?.apply(&vech)?
        }
    };
    Ok(CMatrix::from_iterator(n, n, v.iter().copied()))
}

/// Sparse description of the regressor `(v' ⊗ I) * S` where `S` is the
/// structural chain of the parametrization (`D T`, `D`, or the identity).
///
/// Column `c` of the regressor equals `Σ sign · v[vcol] · e_row` over the
/// returned entries of column `c`, so a full `n x dim` regressor is built in
/// O(n · dim) time without materializing any Kronecker product.
pub fn regressor_columns(p: Parametrization) -> Vec<Vec<(usize, usize, i8)>> {
    let n = p.n;
    let mut cols = Vec::with_capacity(p.dim());
    match p.mode {
        ParamMode::Full => {
            for j in 0..n {
                for i in 0..n {
                    cols.push(vec![(i, j, 1)]);
                }
            }
        }
        ParamMode::Symmetric => {
            for j in 0..n {
                for i in j..n {
                    if i == j {
                        cols.push(vec![(i, i, 1)]);
                    } else {
                        cols.push(vec![(i, j, 1), (j, i, 1)]);
                    }
                }
            }
        }
        ParamMode::Laplacian => {
            // Column of edge (a, b): v_a e_a + v_b e_b - v_b e_a - v_a e_b.
            for b in 0..n {
                for a in b + 1..n {
                    cols.push(vec![(a, a, 1), (b, b, 1), (a, b, -1), (b, a, -1)]);
                }
            }
        }
    }
    cols
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex(rng: &mut StdRng) -> Complex64 {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn random_symmetric(n: usize, rng: &mut StdRng) -> CMatrix {
        let mut a = CMatrix::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let z = random_complex(rng);
                a[(i, j)] = z;
                a[(j, i)] = z;
            }
        }
        a
    }

    /// Laplacian from random edge weights on the complete graph.
    fn random_laplacian(n: usize, rng: &mut StdRng) -> CMatrix {
        let mut a = CMatrix::zeros(n, n);
        for j in 0..n {
            for i in j + 1..n {
                let w = random_complex(rng);
                a[(i, j)] = -w;
                a[(j, i)] = -w;
                a[(i, i)] += w;
                a[(j, j)] += w;
            }
        }
        a
    }

    /// Independent oracle: explicit Kronecker product `b' ⊗ I_n`.
    fn kron_vt_eye(bt: &CVector, n: usize) -> CMatrix {
        let m = bt.len();
        let mut k = CMatrix::zeros(n, m * n);
        for j in 0..m {
            for i in 0..n {
                k[(i, j * n + i)] = bt[j];
            }
        }
        k
    }

    fn max_abs(a: &CMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn vec_stacks_columns() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let v = vec_mat(&a);
        assert_eq!(
            v.as_slice(),
            &[c(1., 0.), c(3., 0.), c(2., 0.), c(4., 0.)],
            "column-major stacking"
        );
    }

    #[test]
    fn vec_of_zero_matrix() {
        let v = vec_mat(&CMatrix::zeros(2, 2));
        assert!(v.iter().all(|z| z.norm() == 0.0));
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn vec_kronecker_identity() {
        // (v' ⊗ I) vec(A) = A v, checked against a direct matrix product.
        let mut rng = StdRng::seed_from_u64(7);
        let a = random_symmetric(3, &mut rng);
        let v = CVector::from_fn(3, |_, _| random_complex(&mut rng));
        let lhs = kron_vt_eye(&v, 3) * vec_mat(&a);
        let rhs = &a * &v;
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn vech_identity_2x2() {
        let a = CMatrix::identity(2, 2);
        let h = vech(&a).unwrap();
        assert_eq!(h.as_slice(), &[c(1., 0.), c(0., 0.), c(1., 0.)]);
    }

    #[test]
    fn vech_rejects_non_square() {
        assert!(matches!(
            vech(&CMatrix::zeros(2, 3)),
            Err(Error::NonSquare { .. })
        ));
    }

    /// The 4x4 Laplacian worked example with edge weights a1..a6.
    ///
    /// Edges in ve order: (2,1)=a1, (3,1)=a2, (4,1)=a3, (3,2)=a4, (4,2)=a5,
    /// (4,3)=a6 (1-based indices).
    fn worked_laplacian() -> (CMatrix, Vec<Complex64>) {
        let w: Vec<Complex64> = (1..=6).map(|k| c(k as f64, -(k as f64) / 2.0)).collect();
        let (a1, a2, a3, a4, a5, a6) = (w[0], w[1], w[2], w[3], w[4], w[5]);
        #[rustfmt::skip]
        let a = CMatrix::from_row_slice(4, 4, &[
            a1 + a2 + a3, -a1,          -a2,          -a3,
            -a1,          a1 + a4 + a5, -a4,          -a5,
            -a2,          -a4,          a2 + a4 + a6, -a6,
            -a3,          -a5,          -a6,          a3 + a5 + a6,
        ]);
        (a, w)
    }

    #[test]
    fn vech_of_4x4_laplacian() {
        let (a, w) = worked_laplacian();
        let (a1, a2, a3, a4, a5, a6) = (w[0], w[1], w[2], w[3], w[4], w[5]);
        let expected = [
            a1 + a2 + a3,
            -a1,
            -a2,
            -a3,
            a1 + a4 + a5,
            -a4,
            -a5,
            a2 + a4 + a6,
            -a6,
            a3 + a5 + a6,
        ];
        let h = vech(&a).unwrap();
        assert_eq!(h.as_slice(), &expected[..]);
    }

    #[test]
    fn ve_of_4x4_laplacian_recovers_edge_weights() {
        let (a, w) = worked_laplacian();
        let v = ve(&a).unwrap();
        assert_eq!(v.as_slice(), w.as_slice());
    }

    #[test]
    fn ve_of_single_edge() {
        let y = c(2.0, -4.0);
        let a = CMatrix::from_row_slice(2, 2, &[y, -y, -y, y]);
        let v = ve(&a).unwrap();
        assert_eq!(v.as_slice(), &[y]);
    }

    #[test]
    fn ve_rejects_small_or_non_square() {
        assert!(ve(&CMatrix::zeros(1, 1)).is_err());
        assert!(ve(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn duplication_n1_and_n2() {
        let d1 = duplication_matrix(1).unwrap().to_dense();
        assert_eq!(d1, DMatrix::from_row_slice(1, 1, &[1.0]));

        let d2 = duplication_matrix(2).unwrap().to_dense();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 3, &[
            1.0, 0.0, 0.0,
            0.0, 1.0, 0.0,
            0.0, 1.0, 0.0,
            0.0, 0.0, 1.0,
        ]);
        assert_eq!(d2, expected);
    }

    #[test]
    fn duplication_rejects_zero() {
        assert!(duplication_matrix(0).is_err());
    }

    #[test]
    fn duplication_row_structure() {
        // Every row of D has exactly one nonzero, equal to 1.
        for n in 1..=8 {
            let d = duplication_matrix(n).unwrap().to_dense();
            for r in 0..d.nrows() {
                let row = d.row(r);
                assert_eq!(row.iter().filter(|x| **x != 0.0).count(), 1);
                assert_eq!(row.iter().sum::<f64>(), 1.0);
            }
        }
    }

    #[test]
    fn duplication_identity_on_random_symmetric() {
        let mut rng = StdRng::seed_from_u64(42);
        let d = duplication_matrix(4).unwrap();
        for _ in 0..100 {
            let a = random_symmetric(4, &mut rng);
            let lhs = d.apply(&vech(&a).unwrap()).unwrap();
            let rhs = vec_mat(&a);
            assert_eq!(lhs, rhs, "integer matrix, exact equality expected");
        }
    }

    #[test]
    fn transformation_n2() {
        let t = transformation_matrix(2).unwrap().to_dense();
        assert_eq!(t, DMatrix::from_row_slice(3, 1, &[1.0, -1.0, 1.0]));
    }

    #[test]
    fn transformation_n4_matches_worked_example() {
        let t = transformation_matrix(4).unwrap().to_dense();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(10, 6, &[
            1.0,  1.0,  1.0,  0.0,  0.0,  0.0,
           -1.0,  0.0,  0.0,  0.0,  0.0,  0.0,
            0.0, -1.0,  0.0,  0.0,  0.0,  0.0,
            0.0,  0.0, -1.0,  0.0,  0.0,  0.0,
            1.0,  0.0,  0.0,  1.0,  1.0,  0.0,
            0.0,  0.0,  0.0, -1.0,  0.0,  0.0,
            0.0,  0.0,  0.0,  0.0, -1.0,  0.0,
            0.0,  1.0,  0.0,  1.0,  0.0,  1.0,
            0.0,  0.0,  0.0,  0.0,  0.0, -1.0,
            0.0,  0.0,  1.0,  0.0,  1.0,  1.0,
        ]);
        assert_eq!(t, expected);
    }

    #[test]
    fn transformation_identity_on_random_laplacians() {
        let mut rng = StdRng::seed_from_u64(3);
        for n in 3..=12 {
            let t = transformation_matrix(n).unwrap();
            for _ in 0..20 {
                let a = random_laplacian(n, &mut rng);
                let lhs = t.apply(&ve(&a).unwrap()).unwrap();
                let rhs = vech(&a).unwrap();
                assert!((lhs - rhs).norm() < 1e-13, "n={n}");
            }
        }
    }

    #[test]
    fn transformation_column_structure() {
        // One -1 (the edge's off-diagonal slot) and two +1 (its incident
        // diagonal slots) per column.
        for n in 2..=10 {
            let t = transformation_matrix(n).unwrap().to_dense();
            for ccol in 0..t.ncols() {
                let col = t.column(ccol);
                assert_eq!(col.iter().filter(|x| **x == -1.0).count(), 1);
                assert_eq!(col.iter().filter(|x| **x == 1.0).count(), 2);
                assert_eq!(col.iter().filter(|x| **x != 0.0).count(), 3);
            }
        }
    }

    #[test]
    fn transformation_full_column_rank() {
        for n in 2..=12 {
            let cols = n * (n - 1) / 2;
            let t = transformation_matrix(n).unwrap().to_dense();
            let svd = t.svd(false, false);
            let rank = svd.singular_values.iter().filter(|s| **s > 1e-10).count();
            assert_eq!(rank, cols, "n={n}");
        }
    }

    #[test]
    fn transformation_rejects_n1() {
        assert!(transformation_matrix(1).is_err());
    }

    #[test]
    fn reconstruct_single_edge() {
        let p = Parametrization::new(ParamMode::Laplacian, 2).unwrap();
        let y = c(1.0, 2.0);
        let a = reconstruct_admittance(&CVector::from_vec(vec![y]), p).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[y, -y, -y, y]);
        assert_eq!(a, expected);
    }

    #[test]
    fn reconstruct_round_trips() {
        let mut rng = StdRng::seed_from_u64(11);
        let p = Parametrization::new(ParamMode::Laplacian, 5).unwrap();
        let x = CVector::from_fn(p.dim(), |_, _| random_complex(&mut rng));
        let a = reconstruct_admittance(&x, p).unwrap();
        // ve ∘ reconstruct = identity on parameter vectors.
        assert!((ve(&a).unwrap() - &x).norm() < 1e-14);
        // reconstruct ∘ ve = identity on Laplacians.
        let a2 = reconstruct_admittance(&ve(&a).unwrap(), p).unwrap();
        assert!(max_abs(&(&a - &a2)) < 1e-14);
    }

    #[test]
    fn reconstruct_worked_example() {
        let (a, _) = worked_laplacian();
        let p = Parametrization::new(ParamMode::Laplacian, 4).unwrap();
        let a2 = reconstruct_admittance(&ve(&a).unwrap(), p).unwrap();
        assert!(max_abs(&(&a - &a2)) < 1e-14);
    }

    #[test]
    fn reconstruct_symmetric_and_full() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_symmetric(4, &mut rng);
        let p = Parametrization::new(ParamMode::Symmetric, 4).unwrap();
        let a2 = reconstruct_admittance(&vech(&a).unwrap(), p).unwrap();
        assert!(max_abs(&(&a - &a2)) < 1e-14);

        let pf = Parametrization::new(ParamMode::Full, 4).unwrap();
        let a3 = reconstruct_admittance(&vec_mat(&a), pf).unwrap();
        assert!(max_abs(&(&a - &a3)) < 1e-14);
    }

    #[test]
    fn reconstruct_rejects_dimension_mismatch() {
        let p = Parametrization::new(ParamMode::Laplacian, 4).unwrap();
        let x = CVector::zeros(5);
        assert!(matches!(
            reconstruct_admittance(&x, p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reconstruct_laplacian_rows_sum_to_zero() {
        let mut rng = StdRng::seed_from_u64(9);
        let p = Parametrization::new(ParamMode::Laplacian, 7).unwrap();
        let x = CVector::from_fn(p.dim(), |_, _| random_complex(&mut rng));
        let a = reconstruct_admittance(&x, p).unwrap();
        for i in 0..7 {
            let s: Complex64 = (0..7).map(|j| a[(i, j)]).sum();
            assert!(s.norm() < 1e-13);
        }
    }

    #[test]
    fn regressor_columns_match_dense_chain() {
        // Column map equals (v' ⊗ I)·D·T (resp. ·D, identity) evaluated densely.
        let mut rng = StdRng::seed_from_u64(23);
        for mode in [ParamMode::Full, ParamMode::Symmetric, ParamMode::Laplacian] {
            let n = 4;
            let p = Parametrization::new(mode, n).unwrap();
            let v = CVector::from_fn(n, |_, _| random_complex(&mut rng));
            let chain: DMatrix<f64> = match mode {
                ParamMode::Full => DMatrix::identity(n * n, n * n),
                ParamMode::Symmetric => duplication_matrix(n).unwrap().to_dense(),
                ParamMode::Laplacian => {
                    duplication_matrix(n).unwrap().to_dense()
                        * transformation_matrix(n).unwrap().to_dense()
                }
            };
            let chain_c = chain.map(|x| Complex64::new(x, 0.0));
            let dense = kron_vt_eye(&v, n) * chain_c;

            let mut built = CMatrix::zeros(n, p.dim());
            for (col, entries) in regressor_columns(p).iter().enumerate() {
                for &(row, vcol, sign) in entries {
                    built[(row, col)] += f64::from(sign) * v[vcol];
                }
            }
            assert!(max_abs(&(dense - built)) < 1e-14, "mode {mode:?}");
        }
    }

    #[test]
    fn parametrization_dims() {
        let n = 13;
        assert_eq!(
            Parametrization::new(ParamMode::Full, n).unwrap().dim(),
            n * n
        );
        assert_eq!(
            Parametrization::new(ParamMode::Symmetric, n).unwrap().dim(),
            n * (n + 1) / 2
        );
        assert_eq!(
            Parametrization::new(ParamMode::Laplacian, n).unwrap().dim(),
            n * (n - 1) / 2
        );
    }
}
