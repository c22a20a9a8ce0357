//! Projections onto column spans, the reconstruction criterion, embeddings,
//! column-based low-rank approximations and the SVD routines used by metrics.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CssError, Result};
use crate::matrix::{axpy, dot, ColumnSet, Matrix};
use crate::rng::rng_from_seed;

/// A basis column is dependent when its norm after orthogonalization is at
/// most this fraction of its original norm.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Largest `min(m, n)` for which metrics use the exact dense SVD.
pub const EXACT_SVD_LIMIT: usize = 512;

/// Thin SVD: `u` is m×k, `v` is n×k, singular values non-increasing.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.singular_values));
        Matrix::wrap(self.u.as_dmatrix() * sigma * self.v.as_dmatrix().transpose())
    }

    /// `U Σ`, the scaled left singular vectors.
    pub fn scaled_left(&self) -> Matrix {
        let mut us = self.u.as_dmatrix().clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        Matrix::wrap(us)
    }

    fn truncate(mut self, k: usize) -> SvdResult {
        let k = k.min(self.rank());
        self.singular_values.truncate(k);
        self.u = Matrix::wrap(self.u.as_dmatrix().columns(0, k).into_owned());
        self.v = Matrix::wrap(self.v.as_dmatrix().columns(0, k).into_owned());
        self
    }
}

/// Orthonormal basis of the listed columns.
struct Basis {
    vectors: Vec<Vec<f64>>,
    dependent: Vec<usize>,
}

/// Modified Gram-Schmidt with one re-orthogonalization pass per column.
fn gram_schmidt(a: &Matrix, set: &ColumnSet) -> Result<Basis> {
    set.check_bounds(a.ncols())?;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(set.len());
    let mut dependent = Vec::new();
    for &j in set.indices() {
        let original = a.column(j);
        let norm0 = dot(original, original).sqrt();
        let mut v = original.to_vec();
        for _ in 0..2 {
            for q in &vectors {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm0 == 0.0 || norm <= RANK_TOLERANCE * norm0 {
            dependent.push(j);
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        vectors.push(v);
    }
    Ok(Basis { vectors, dependent })
}

pub(crate) fn strict_basis(a: &Matrix, set: &ColumnSet) -> Result<Vec<Vec<f64>>> {
    let basis = gram_schmidt(a, set)?;
    if !basis.dependent.is_empty() {
        return Err(CssError::DegenerateBasis {
            indices: basis.dependent,
        });
    }
    Ok(basis.vectors)
}

/// Removes the component of every column of `x` lying in span(`q`), in place.
fn remove_span(q: &[Vec<f64>], x: &mut DMatrix<f64>) {
    let m = x.nrows();
    for col in x.as_mut_slice().chunks_exact_mut(m) {
        for _ in 0..2 {
            for qv in q {
                let c = dot(qv, col);
                axpy(-c, qv, col);
            }
        }
    }
}

fn basis_matrix(rows: usize, vectors: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_vec(rows, vectors.len(), vectors.concat())
}

fn check_rows(a: &Matrix, x: &Matrix) -> Result<()> {
    if a.nrows() != x.nrows() {
        return Err(CssError::Dimension(format!(
            "row counts differ: {} vs {}",
            a.nrows(),
            x.nrows()
        )));
    }
    Ok(())
}

/// `Q` with orthonormal columns spanning the listed columns of `a`.
pub fn orthonormal_basis(a: &Matrix, set: &ColumnSet) -> Result<Matrix> {
    if set.is_empty() {
        return Err(CssError::InvalidColumns("basis of an empty column set".into()));
    }
    let q = strict_basis(a, set)?;
    Ok(Matrix::wrap(basis_matrix(a.nrows(), &q)))
}

/// Projects the columns of `x` onto span(`a[:, set]`).
///
/// Uses the QR factor of the selected columns: `A_S (A_SᵀA_S)⁻¹ A_Sᵀ X = Q Qᵀ X`.
pub fn project_onto_columns(a: &Matrix, set: &ColumnSet, x: &Matrix) -> Result<Matrix> {
    check_rows(a, x)?;
    let q = strict_basis(a, set)?;
    if q.is_empty() {
        return Matrix::zeros(x.nrows(), x.ncols());
    }
    let qm = basis_matrix(a.nrows(), &q);
    let coeffs = qm.tr_mul(x.as_dmatrix());
    Ok(Matrix::wrap(qm * coeffs))
}

/// `X − P X`, where P projects onto span(`a[:, set]`).
pub fn residual(a: &Matrix, set: &ColumnSet, x: &Matrix) -> Result<Matrix> {
    check_rows(a, x)?;
    let q = strict_basis(a, set)?;
    let mut r = x.as_dmatrix().clone();
    remove_span(&q, &mut r);
    Ok(Matrix::wrap(r))
}

/// Reconstruction error ‖A − P A‖²_F of `a` from its own columns `set`.
pub fn css_criterion(a: &Matrix, set: &ColumnSet) -> Result<f64> {
    target_criterion(a, set, a)
}

/// ‖B − P B‖²_F where P projects onto span(`a[:, set]`).
pub fn target_criterion(a: &Matrix, set: &ColumnSet, b: &Matrix) -> Result<f64> {
    if set.is_empty() {
        check_rows(a, b)?;
        return Ok(b.frobenius_sq());
    }
    Ok(residual(a, set, b)?.frobenius_sq())
}

/// Like [`css_criterion`] but silently drops columns that are dependent on
/// earlier ones in `set`. Used where arbitrary subsets (e.g. random samples)
/// must be scored.
pub fn css_criterion_lenient(a: &Matrix, set: &ColumnSet) -> Result<f64> {
    let basis = gram_schmidt(a, set)?;
    let mut r = a.as_dmatrix().clone();
    remove_span(&basis.vectors, &mut r);
    Ok(r.iter().map(|v| v * v).sum())
}

/// `W = QᵀA`, the coordinates of every column of `a` in the basis of the selected columns.
pub fn embed_columns(a: &Matrix, set: &ColumnSet) -> Result<Matrix> {
    let q = orthonormal_basis(a, set)?;
    Ok(Matrix::wrap(q.as_dmatrix().tr_mul(a.as_dmatrix())))
}

/// Rank-k approximation of `a` restricted to span(`a[:, set]`): `Q · W_k`
/// where `W_k` is the best rank-k approximation of `W = QᵀA`.
pub fn rank_k_column_approx(a: &Matrix, set: &ColumnSet, k: usize) -> Result<Matrix> {
    Ok(approx_svd_from_columns(a, set, k)?.reconstruct())
}

/// Approximate leading singular triplets of `a` from the selected columns:
/// `Ũ = Q U_W`, `Σ̃ = Σ_W`, `Ṽ = V_W`.
pub fn approx_svd_from_columns(a: &Matrix, set: &ColumnSet, k: usize) -> Result<SvdResult> {
    if k == 0 || k > set.len() {
        return Err(CssError::InvalidRank { k, max: set.len() });
    }
    let q = orthonormal_basis(a, set)?;
    let w = Matrix::wrap(q.as_dmatrix().tr_mul(a.as_dmatrix()));
    let svd_w = exact_svd(&w).truncate(k);
    Ok(SvdResult {
        u: Matrix::wrap(q.as_dmatrix() * svd_w.u.as_dmatrix()),
        singular_values: svd_w.singular_values,
        v: svd_w.v,
    })
}

/// Thin dense SVD with non-increasing singular values.
pub fn exact_svd(a: &Matrix) -> SvdResult {
    let svd = a.as_dmatrix().clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)]);
    SvdResult {
        u: Matrix::wrap(u),
        singular_values: order.iter().map(|&i| svd.singular_values[i].max(0.0)).collect(),
        v: Matrix::wrap(v),
    }
}

fn thin_q(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Randomized range-finder SVD with Gaussian test matrix and power iterations.
pub fn randomized_svd(
    a: &Matrix,
    k: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> Result<SvdResult> {
    let (m, n) = a.shape();
    let max = m.min(n);
    if k == 0 || k > max {
        return Err(CssError::InvalidRank { k, max });
    }
    let width = (k + oversample).min(max);
    let mut rng = rng_from_seed(seed);
    let omega = DMatrix::from_fn(n, width, |_, _| StandardNormal.sample(&mut rng));
    let ad = a.as_dmatrix();
    let mut q = thin_q(ad * omega);
    for _ in 0..power_iters {
        let z = thin_q(ad.tr_mul(&q));
        q = thin_q(ad * z);
    }
    let small = Matrix::wrap(q.tr_mul(ad));
    let svd = exact_svd(&small).truncate(k);
    Ok(SvdResult {
        u: Matrix::wrap(&q * svd.u.as_dmatrix()),
        singular_values: svd.singular_values,
        v: svd.v,
    })
}

/// Squared Frobenius error of the best rank-k approximation of `a`.
///
/// Exact when `min(m, n) <= EXACT_SVD_LIMIT`; otherwise estimated with a
/// randomized SVD (oversample 10, two power iterations) seeded by `seed`.
pub fn best_rank_k_error_sq(a: &Matrix, k: usize, seed: u64) -> Result<f64> {
    let max = a.nrows().min(a.ncols());
    if k == 0 || k > max {
        return Err(CssError::InvalidRank { k, max });
    }
    if max <= EXACT_SVD_LIMIT {
        let svd = exact_svd(a);
        Ok(svd.singular_values[k..].iter().map(|s| s * s).sum())
    } else {
        let svd = randomized_svd(a, k, 10, 2, seed)?;
        let captured: f64 = svd.singular_values.iter().map(|s| s * s).sum();
        Ok((a.frobenius_sq() - captured).max(0.0))
    }
}
