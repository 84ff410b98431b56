//! Dense eigensolvers for Hermitian and unitary matrices.
//!
//! The Hermitian solver is a cyclic complex Jacobi method. Unitary matrices are
//! diagonalized through their Hermitian and anti-Hermitian parts, which commute
//! because a unitary matrix is normal.

use num_complex::Complex64;

use super::matrix::{inner, norm, CMatrix, ONE, ZERO};
use super::operator::{OperatorMatrix, Role};
use crate::error::{CdtError, Result};

pub const MAX_SWEEPS: usize = 100;
/// Jacobi stops once the off-diagonal Frobenius norm drops below this fraction of ‖A‖_F.
pub const OFFDIAG_REL_TOL: f64 = 1e-13;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T> {
    /// Eigenvalues; column `k` of `vectors` belongs to `values[k]`.
    pub values: Vec<T>,
    pub vectors: CMatrix,
    /// max_k ‖A v_k − λ_k v_k‖₂ against the input matrix.
    pub residual: f64,
    /// Index groups (size ≥ 2) of eigenvalues separated by less than [`DEGENERACY_TOL`].
    pub clusters: Vec<Vec<usize>>,
}

impl<T> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// max |V†V − I|
    pub fn orthonormality_error(&self) -> f64 {
        (&self.vectors.adjoint() * &self.vectors).max_abs_diff(&CMatrix::identity(self.dim()))
    }
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
pub fn eigh(a: &OperatorMatrix) -> Result<EigenDecomposition<f64>> {
    if a.role() != Role::Hermitian {
        return Err(CdtError::WrongRole {
            expected: "hermitian",
            deviation: a.entries().hermiticity_error(),
        });
    }
    eigh_matrix(a.entries())
}

/// Jacobi diagonalization of a matrix assumed Hermitian; only the upper
/// triangle's consistency with the lower one is relied upon up to rounding.
pub(crate) fn eigh_matrix(input: &CMatrix) -> Result<EigenDecomposition<f64>> {
    if input.as_slice().iter().all(|z| z.im == 0.0) {
        return eigh_real(input);
    }
    let n = input.dim();
    let mut a = input.clone();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n);
    let threshold = OFFDIAG_REL_TOL * input.frobenius_norm();

    let mut converged = false;
    let mut off = off_diagonal_norm(&a);
    for sweep in 0..MAX_SWEEPS {
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Late sweeps: drop elements too small to change either diagonal entry.
                let g = 100.0 * b;
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                rotate(&mut a, &mut v, p, q, apq / b, b, app, aqq);
            }
        }
        off = off_diagonal_norm(&a);
    }
    if !converged && off > threshold {
        return Err(CdtError::Convergence {
            what: "Jacobi eigensolver",
            achieved: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    let residual = residual_of(input, &vectors, |k| Complex64::new(values[k], 0.0));
    let clusters = linear_clusters(&values, DEGENERACY_TOL);
    Ok(EigenDecomposition {
        values,
        vectors,
        residual,
        clusters,
    })
}

/// One complex Jacobi rotation annihilating `a[(p, q)] = b·phase`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn rotate(
    a: &mut CMatrix,
    v: &mut CMatrix,
    p: usize,
    q: usize,
    phase: Complex64,
    b: f64,
    app: f64,
    aqq: f64,
) {
    let n = a.dim();
    let theta = (aqq - app) / (2.0 * b);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let sc = phase.conj() * s;
    let cc = phase.conj() * c;
    let se = phase * s;
    let ce = phase * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - sc * akq;
        a[(k, q)] = akp * s + cc * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - se * aqk;
        a[(q, k)] = apk * s + ce * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(app - t * b, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * b, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - sc * vkq;
        v[(k, q)] = vkp * s + cc * vkq;
    }
}

/// Same cyclic Jacobi scheme in real arithmetic, for real symmetric input.
fn eigh_real(input: &CMatrix) -> Result<EigenDecomposition<f64>> {
    let n = input.dim();
    let mut a: Vec<f64> = input.as_slice().iter().map(|z| z.re).collect();
    let mut v = vec![0.0; n * n];
    jacobi_real(&mut a, &mut v, n, OFFDIAG_REL_TOL * input.frobenius_norm())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = CMatrix::from_fn(n, |r, c| Complex64::new(v[r * n + order[c]], 0.0));
    let residual = residual_of(input, &vectors, |k| Complex64::new(values[k], 0.0));
    let clusters = linear_clusters(&values, DEGENERACY_TOL);
    Ok(EigenDecomposition {
        values,
        vectors,
        residual,
        clusters,
    })
}

/// Diagonalizes the row-major symmetric `a` in place; eigenvalues end up on the
/// (unsorted) diagonal and `v` receives the eigenvectors as columns.
pub(crate) fn jacobi_real(a: &mut [f64], v: &mut [f64], n: usize, threshold: f64) -> Result<()> {
    v.fill(0.0);
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off_norm = |a: &[f64]| {
        let mut sum = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                sum += 2.0 * a[r * n + c] * a[r * n + c];
            }
        }
        sum.sqrt()
    };

    let skip_below = threshold / n as f64;
    let mut off = off_norm(a);
    let mut sweeps = 0;
    while off > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(CdtError::Convergence {
                what: "Jacobi eigensolver",
                achieved: off,
            });
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[p * n + q];
                // Entries this small cannot keep the off-diagonal norm above
                // the threshold on their own.
                if apq.abs() <= skip_below {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                if sweeps > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        off = off_norm(a);
        sweeps += 1;
    }
    Ok(())
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut sum = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                sum += a[(r, c)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn residual_of(a: &CMatrix, vectors: &CMatrix, value: impl Fn(usize) -> Complex64) -> f64 {
    (0..vectors.dim())
        .map(|k| {
            let col = vectors.column(k);
            let av = a.matvec(&col);
            let lambda = value(k);
            let diff: Vec<Complex64> = av.iter().zip(&col).map(|(x, y)| x - lambda * y).collect();
            norm(&diff)
        })
        .fold(0.0, f64::max)
}

fn linear_clusters(sorted: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters = Vec::new();
    let mut current = vec![0];
    for k in 1..sorted.len() {
        if sorted[k] - sorted[k - 1] < tol {
            current.push(k);
        } else {
            if current.len() > 1 {
                clusters.push(std::mem::take(&mut current));
            }
            current = vec![k];
        }
    }
    if current.len() > 1 {
        clusters.push(current);
    }
    clusters
}

/// Eigen-decomposition of a unitary operator.
///
/// Eigenvalues are returned ordered by phase in (−π, π]. Clusters of phases closer
/// than [`DEGENERACY_TOL`] (with wrap-around at ±π) are listed in `clusters`, so a
/// caller can pick a preferred basis inside each degenerate eigenspace.
pub fn eig_unitary(u: &OperatorMatrix) -> Result<EigenDecomposition<Complex64>> {
    if u.role() != Role::Unitary {
        return Err(CdtError::WrongRole {
            expected: "unitary",
            deviation: u.entries().unitarity_error(),
        });
    }
    eig_unitary_matrix(u.entries())
}

pub(crate) fn eig_unitary_matrix(u: &CMatrix) -> Result<EigenDecomposition<Complex64>> {
    let n = u.dim();
    let ud = u.adjoint();
    let h_plus = (u + &ud).scale_real(0.5);
    let h_minus = (u - &ud).scale(Complex64::new(0.0, -0.5));

    let plus = eigh_matrix(&h_plus)?;
    let mut vectors = plus.vectors.clone();
    for cluster in &plus.clusters {
        let basis: Vec<Vec<Complex64>> = cluster.iter().map(|&k| vectors.column(k)).collect();
        let restricted = CMatrix::from_fn(cluster.len(), |r, c| {
            inner(&basis[r], &h_minus.matvec(&basis[c]))
        });
        let inner_eig = eigh_matrix(&restricted)?;
        for (c, &k) in cluster.iter().enumerate() {
            let mut col = vec![ZERO; n];
            for (r, b) in basis.iter().enumerate() {
                let w = inner_eig.vectors[(r, c)];
                for (x, &y) in col.iter_mut().zip(b) {
                    *x += w * y;
                }
            }
            vectors.set_column(k, &col);
        }
    }

    let mut values: Vec<Complex64> = (0..n)
        .map(|k| {
            let col = vectors.column(k);
            let lambda = inner(&col, &u.matvec(&col));
            if lambda.norm() > 0.0 {
                lambda / lambda.norm()
            } else {
                ONE
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].arg().total_cmp(&values[j].arg()));
    values = order.iter().map(|&i| values[i]).collect();
    let vectors = CMatrix::from_fn(n, |r, c| vectors[(r, order[c])]);
    let residual = residual_of(u, &vectors, |k| values[k]);
    let phases: Vec<f64> = values.iter().map(|z| z.arg()).collect();
    let clusters = circular_clusters(&phases, DEGENERACY_TOL);
    Ok(EigenDecomposition {
        values,
        vectors,
        residual,
        clusters,
    })
}

/// Groups sorted phases in (−π, π] whose neighbours lie within `tol`, joining the
/// last and first groups across the branch cut.
fn circular_clusters(sorted_phases: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let n = sorted_phases.len();
    if n < 2 {
        return Vec::new();
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..n {
        if sorted_phases[k] - sorted_phases[k - 1] < tol {
            groups.last_mut().unwrap().push(k);
        } else {
            groups.push(vec![k]);
        }
    }
    if groups.len() > 1 && sorted_phases[0] + two_pi - sorted_phases[n - 1] < tol {
        let first = groups.remove(0);
        groups.last_mut().unwrap().extend(first);
    }
    groups.into_iter().filter(|g| g.len() > 1).collect()
}

/// exp(−i·s·A) for Hermitian `A`.
pub fn exp_hermitian(a: &OperatorMatrix, s: f64) -> Result<OperatorMatrix> {
    if a.role() != Role::Hermitian {
        return Err(CdtError::WrongRole {
            expected: "hermitian",
            deviation: a.entries().hermiticity_error(),
        });
    }
    let u = exp_hermitian_matrix(a.entries(), s)?;
    Ok(OperatorMatrix::with_role_unchecked(u, Role::Unitary))
}

pub(crate) fn exp_hermitian_matrix(a: &CMatrix, s: f64) -> Result<CMatrix> {
    let eig = eigh_matrix(a)?;
    Ok(spectral_exp(&eig, s))
}

/// V·exp(−i s Λ)·V† from an existing decomposition.
pub(crate) fn spectral_exp(eig: &EigenDecomposition<f64>, s: f64) -> CMatrix {
    let n = eig.dim();
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -s * l))
        .collect();
    let v = &eig.vectors;
    let mut out = CMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += v[(r, k)] * phases[k] * v[(c, k)].conj();
            }
            out[(r, c)] = acc;
        }
    }
    out
}
