//! Complex-valued recursive least squares with forgetting, a batch
//! ordinary-least-squares baseline, and estimation error metrics.
//!
//! The parameter vector `x` encodes the admittance matrix through one of the
//! [`Parametrization`] modes; the regressor of a voltage sample `v` is
//! `A(v) = (v' ⊗ I) D T` (Laplacian), `(v' ⊗ I) D` (symmetric), or
//! `(v' ⊗ I)` (full), so that `A(v) x = Y(x) v`. Each measurement pair
//! `(v, i)` contributes `n` complex equations.

use crate::netmodel::AdmittanceMatrix;
use crate::structvec::{reconstruct_admittance, regressor_columns, ParamMode, Parametrization};
use crate::{CMatrix, CVector, Error, Result};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Estimation error metrics between a reference and an estimated matrix:
/// Frobenius norm, max elementwise modulus, and the relative Frobenius
/// ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub m_f: f64,
    pub m_max: f64,
    pub m_r: f64,
}

/// Options for a fresh estimator state.
#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    /// Scale of the flat initial guess `x0 = delta * 1`.
    pub delta: f64,
    /// Scale of the initial scaled covariance `Z0 = k0 * I`.
    pub k0: f64,
    /// Forgetting factor in (0, 1].
    pub lambda: f64,
    /// Optional per-bus measurement weights (uniform when absent).
    pub bus_weights: Option<DVector<f64>>,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            delta: 1e-4,
            k0: 1e4,
            lambda: 0.8,
            bus_weights: None,
        }
    }
}

/// State of the recursive least-squares estimator.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    x_hat: CVector,
    z: CMatrix,
    z_inv: CMatrix,
    lambda: f64,
    parametrization: Parametrization,
    t: usize,
    bus_weights: Option<DVector<f64>>,
    reg_cols: Vec<Vec<(usize, usize, i8)>>,
}

/// Serialized snapshot of an estimator state (External checkpoint format).
#[derive(Debug, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub version: u32,
    pub parametrization: Parametrization,
    pub lambda: f64,
    pub t: usize,
    pub x_hat: CVector,
    pub z: CMatrix,
    pub z_inv: CMatrix,
    pub bus_weights: Option<DVector<f64>>,
}

const SNAPSHOT_VERSION: u32 = 1;

impl EstimatorState {
    pub fn new(parametrization: Parametrization, opts: EstimatorOptions) -> Result<Self> {
        if !(opts.lambda > 0.0 && opts.lambda <= 1.0) {
            return Err(Error::Config(format!(
                "forgetting factor must be in (0, 1], got {}",
                opts.lambda
            )));
        }
        if opts.k0 <= 0.0 {
            return Err(Error::Config("Z0 scale must be positive".into()));
        }
        if let Some(w) = &opts.bus_weights {
            if w.len() != parametrization.n {
                return Err(Error::DimensionMismatch {
                    expected: parametrization.n,
                    got: w.len(),
                    context: "bus weights",
                });
            }
            if w.iter().any(|x| *x <= 0.0) {
                return Err(Error::Config("bus weights must be positive".into()));
            }
        }
        let dim = parametrization.dim();
        let one = Complex64::new(1.0, 0.0);
        Ok(Self {
            x_hat: CVector::from_element(dim, opts.delta * one),
            z: CMatrix::from_diagonal_element(dim, dim, opts.k0 * one),
            z_inv: CMatrix::from_diagonal_element(dim, dim, one / opts.k0),
            lambda: opts.lambda,
            parametrization,
            t: 0,
            bus_weights: opts.bus_weights,
            reg_cols: regressor_columns(parametrization),
        })
    }

    /// Explicit initial guess (overrides the flat `delta * 1`).
    pub fn with_initial_guess(mut self, x0: CVector) -> Result<Self> {
        if x0.len() != self.parametrization.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.parametrization.dim(),
                got: x0.len(),
                context: "initial guess",
            });
        }
        self.x_hat = x0;
        Ok(self)
    }

    pub fn x_hat(&self) -> &CVector {
        &self.x_hat
    }

    pub fn z(&self) -> &CMatrix {
        &self.z
    }

    pub fn z_inv(&self) -> &CMatrix {
        &self.z_inv
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// One recursive update from a measurement pair `(v, i)`.
    ///
    /// The covariance is propagated through the rank-update form (no
    /// explicit inversion of `Z`) while its inverse accumulates additively;
    /// both are re-symmetrized each step to stop Hermitian drift.
    pub fn update(&mut self, v: &CVector, i: &CVector) -> Result<()> {
        let n = self.parametrization.n;
        if v.len() != n || i.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len().max(i.len()),
                context: "rls update measurement",
            });
        }
        let mut a = self.regressor_cached(v);
        let mut b = i.clone();
        if let Some(w) = &self.bus_weights {
            for r in 0..n {
                let s = w[r].sqrt();
                for c in 0..a.ncols() {
                    a[(r, c)] *= s;
                }
                b[r] *= s;
            }
        }

        let lam = Complex64::new(self.lambda, 0.0);
        let az = &a * &self.z; // n x d
        let mut s = &az * a.adjoint(); // n x n
        for k in 0..n {
            s[(k, k)] += lam;
        }
        let chol = s
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("rls innovation matrix"))?;
        let x = chol.solve(&az); // S^{-1} A Z, n x d
        let mut z_new = (&self.z - az.adjoint() * x) / lam;
        hermitize(&mut z_new);

        let innovation = &b - &a * &self.x_hat;
        self.x_hat += &z_new * (a.adjoint() * innovation);

        let mut z_inv_new = &self.z_inv * lam + a.adjoint() * &a;
        hermitize(&mut z_inv_new);

        self.z = z_new;
        self.z_inv = z_inv_new;
        self.t += 1;
        Ok(())
    }

    /// Current admittance estimate `Y(x_hat)`.
    pub fn estimate_admittance(&self) -> Result<AdmittanceMatrix> {
        let y = reconstruct_admittance(&self.x_hat, self.parametrization)?;
        Ok(AdmittanceMatrix {
            y,
            is_symmetric: self.parametrization.mode != ParamMode::Full,
            is_laplacian: self.parametrization.mode == ParamMode::Laplacian,
        })
    }

    fn regressor_cached(&self, v: &CVector) -> CMatrix {
        build_regressor(v, &self.reg_cols, self.parametrization)
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            version: SNAPSHOT_VERSION,
            parametrization: self.parametrization,
            lambda: self.lambda,
            t: self.t,
            x_hat: self.x_hat.clone(),
            z: self.z.clone(),
            z_inv: self.z_inv.clone(),
            bus_weights: self.bus_weights.clone(),
        }
    }

    pub fn from_snapshot(snap: StateSnapshot) -> Result<Self> {
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::Config(format!(
                "unsupported snapshot version {}",
                snap.version
            )));
        }
        let dim = snap.parametrization.dim();
        if snap.x_hat.len() != dim || snap.z.nrows() != dim || snap.z_inv.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: snap.x_hat.len(),
                context: "snapshot dimensions",
            });
        }
        Ok(Self {
            x_hat: snap.x_hat,
            z: snap.z,
            z_inv: snap.z_inv,
            lambda: snap.lambda,
            parametrization: snap.parametrization,
            t: snap.t,
            bus_weights: snap.bus_weights,
            reg_cols: regressor_columns(snap.parametrization),
        })
    }

    pub fn save_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let text = serde_json::to_string(&self.snapshot())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_snapshot(serde_json::from_str(&text)?)
    }
}

fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn build_regressor(
    v: &CVector,
    cols: &[Vec<(usize, usize, i8)>],
    p: Parametrization,
) -> CMatrix {
    let mut a = CMatrix::zeros(p.n, p.dim());
    for (c, entries) in cols.iter().enumerate() {
        for &(row, vcol, sign) in entries {
            if sign >= 0 {
                a[(row, c)] += v[vcol];
            } else {
                a[(row, c)] -= v[vcol];
            }
        }
    }
    a
}

/// The regressor `A(v)` of one voltage sample: satisfies `A(v) x = Y(x) v`.
pub fn regressor(v: &CVector, p: Parametrization) -> Result<CMatrix> {
    if v.len() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            got: v.len(),
            context: "regressor voltage",
        });
    }
    Ok(build_regressor(v, &regressor_columns(p), p))
}

/// Batch ordinary least squares over a stack of measurement pairs.
///
/// Solves `min_x || b - A x ||` through the singular value decomposition of
/// the stacked regressor; a rank-deficient stack is an explicit error
/// naming the rank gap.
pub fn ols_batch(vs: &[CVector], is: &[CVector], p: Parametrization) -> Result<CVector> {
    if vs.is_empty() || vs.len() != is.len() {
        return Err(Error::Config(
            "ols needs an equal, nonzero number of voltage and current samples".into(),
        ));
    }
    let n = p.n;
    let dim = p.dim();
    let cols = regressor_columns(p);
    let mut stack = CMatrix::zeros(n * vs.len(), dim);
    let mut rhs = CVector::zeros(n * vs.len());
    for (s, (v, i)) in vs.iter().zip(is.iter()).enumerate() {
        if v.len() != n || i.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len().max(i.len()),
                context: "ols sample",
            });
        }
        let a = build_regressor(v, &cols, p);
        stack.view_mut((s * n, 0), (n, dim)).copy_from(&a);
        rhs.rows_mut(s * n, n).copy_from(i);
    }
    let svd = stack.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * (n * vs.len()).max(dim) as f64 * f64::EPSILON * 16.0;
    let rank = svd.singular_values.iter().filter(|s| **s > eps).count();
    if rank < dim {
        return Err(Error::RankDeficient {
            rank,
            expected: dim,
            gap: dim - rank,
        });
    }
    svd.solve(&rhs, eps)
        .map_err(|_| Error::RankDeficient {
            rank,
            expected: dim,
            gap: 0,
        })
}

/// Frobenius, max-modulus, and relative Frobenius error between matrices.
pub fn error_metrics(y_true: &CMatrix, y_hat: &CMatrix) -> Result<ErrorMetrics> {
    if y_true.shape() != y_hat.shape() {
        return Err(Error::DimensionMismatch {
            expected: y_true.nrows(),
            got: y_hat.nrows(),
            context: "error metrics shapes",
        });
    }
    let denom = y_true.norm();
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let diff = y_true - y_hat;
    let m_f = diff.norm();
    let m_max = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(ErrorMetrics {
        m_f,
        m_max,
        m_r: m_f / denom,
    })
}
