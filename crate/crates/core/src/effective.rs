//! High-frequency effective Hamiltonian and the Bessel-zero CDT conditions.
//!
//! Averaging the drive over one period in the frame rotating with
//! `exp(−i A(t) Jz²)`, `A(t) = (g1/ω) sin ωt`, leaves
//!
//! ```text
//! H_eff = g0·Jz² + (v/2)·J₊·J₀[g1(2Jz + 1)/ω] + h.c.
//! ```
//!
//! so the tunneling amplitude between |m−1⟩ and |m⟩ is rescaled by
//! J₀[g1(2m − 1)/ω]. When that factor vanishes the tridiagonal H_eff splits into
//! uncoupled blocks and opposite-parity states pair up.

use std::ops::Range;

use crate::error::{CdtError, Result};
use crate::model::{build_jx, build_jz_squared, ladder_coefficient, ModelParams};
use crate::numerics::bessel::{bessel_j0, j0_root, MAX_ROOT_INDEX};
use crate::numerics::matrix::CMatrix;
use crate::numerics::{eigh, OperatorMatrix, Role};
use num_complex::Complex64;

/// Default block-cut tolerance, in units of v.
pub const DEFAULT_CUT_TOL: f64 = 1e-6;
/// Fewest trapezoid nodes accepted by [`effective_hamiltonian_oracle`].
pub const MIN_QUADRATURE_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub params: ModelParams,
    /// Real symmetric tridiagonal matrix in the |m⟩ basis.
    pub matrix: OperatorMatrix,
    /// `offdiag_couplings[k]` = ⟨m|H_eff|m−1⟩ with m = N/2 − k, i.e. the entry
    /// between basis indices k and k + 1.
    pub offdiag_couplings: Vec<f64>,
}

impl EffectiveHamiltonian {
    /// ⟨m|H_eff|m−1⟩ for a given upper level m, if it lies in the basis.
    pub fn coupling(&self, m: f64) -> Option<f64> {
        let k = self.params.basis().index_of(m)?;
        self.offdiag_couplings.get(k).copied()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh(&self.matrix)?.values)
    }
}

/// Closed-form averaged Hamiltonian.
pub fn effective_hamiltonian(params: &ModelParams) -> Result<EffectiveHamiltonian> {
    params.validate()?;
    let basis = params.basis();
    let j = basis.j();
    let x = params.g1_over_omega();
    let dim = basis.dim();
    let couplings: Vec<f64> = (0..dim - 1)
        .map(|k| {
            let m = basis.m(k);
            0.5 * params.v * ladder_coefficient(j, m - 1.0) * bessel_j0(x * (2.0 * m - 1.0))
        })
        .collect();
    let mut a = CMatrix::zeros(dim);
    for k in 0..dim {
        let m = basis.m(k);
        a[(k, k)] = Complex64::new(params.g0 * m * m, 0.0);
    }
    for (k, &c) in couplings.iter().enumerate() {
        a[(k, k + 1)] = Complex64::new(c, 0.0);
        a[(k + 1, k)] = Complex64::new(c, 0.0);
    }
    Ok(EffectiveHamiltonian {
        params: *params,
        matrix: OperatorMatrix::with_role_unchecked(a, Role::Hermitian),
        offdiag_couplings: couplings,
    })
}

/// Period average of `e^{iA(t)Jz²}(g0 Jz² + v Jx)e^{−iA(t)Jz²}` by the
/// trapezoid rule on `quadrature_points` equally spaced nodes.
///
/// The integrand is smooth and periodic, so the rule converges geometrically
/// once the node count exceeds the largest phase excursion |g1/ω|·(2j − 1).
pub fn effective_hamiltonian_oracle(
    params: &ModelParams,
    quadrature_points: usize,
) -> Result<OperatorMatrix> {
    params.validate()?;
    if quadrature_points < MIN_QUADRATURE_POINTS {
        return Err(CdtError::InvalidParameter(format!(
            "quadrature_points must be at least {MIN_QUADRATURE_POINTS}, got {quadrature_points}"
        )));
    }
    let basis = params.basis();
    let h0 = &build_jz_squared(&basis).entries().scale_real(params.g0)
        + &build_jx(&basis).entries().scale_real(params.v);
    let jz2: Vec<f64> = basis.m_values().iter().map(|m| m * m).collect();
    let mut sum = CMatrix::zeros(basis.dim());
    for q in 0..quadrature_points {
        let theta = 2.0 * std::f64::consts::PI * q as f64 / quadrature_points as f64;
        let a = params.g1_over_omega() * theta.sin();
        let d: Vec<Complex64> = jz2.iter().map(|&m2| Complex64::from_polar(1.0, a * m2)).collect();
        let term = h0.conjugate_by(&CMatrix::from_diagonal(&d));
        sum = &sum + &term;
    }
    OperatorMatrix::hermitian(sum.scale_real(1.0 / quadrature_points as f64))
}

/// Split of the tridiagonal H_eff at vanishing couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    /// Upper levels m of every cut ⟨m−1|H_eff|m⟩ ≈ 0, descending.
    pub cut_positions: Vec<f64>,
    /// Basis-index ranges of the uncoupled blocks, in basis order. With a
    /// symmetric cut pair these are h_l, (h_i,) h_r.
    pub blocks: Vec<Range<usize>>,
    /// Dimension of h_l, N/2 − m + 1 for the outermost cut at m; 0 without cuts.
    pub expected_pairs: usize,
}

impl BlockDecomposition {
    pub fn is_split(&self) -> bool {
        self.blocks.len() > 1
    }

    /// h_l, h_i (empty when the cuts touch) and h_r for the outermost cuts.
    pub fn outer_blocks(&self) -> Option<(Range<usize>, Range<usize>, Range<usize>)> {
        if !self.is_split() {
            return None;
        }
        let left = self.blocks.first().unwrap().clone();
        let right = self.blocks.last().unwrap().clone();
        Some((left.clone(), left.end..right.start, right))
    }

    /// True when every cut at m is matched by one at 1 − m.
    pub fn is_symmetric(&self) -> bool {
        self.cut_positions
            .iter()
            .all(|&m| self.cut_positions.iter().any(|&o| (o - (1.0 - m)).abs() < 1e-9))
    }
}

/// Cuts H_eff wherever |⟨m−1|H_eff|m⟩| ≤ `cut_tol`.
pub fn block_decompose(h: &EffectiveHamiltonian, cut_tol: f64) -> Result<BlockDecomposition> {
    if !(cut_tol > 0.0) {
        return Err(CdtError::InvalidParameter(format!(
            "cut tolerance must be positive, got {cut_tol}"
        )));
    }
    let basis = h.params.basis();
    let mut cuts = Vec::new();
    let mut blocks = Vec::new();
    let mut start = 0;
    for (k, c) in h.offdiag_couplings.iter().enumerate() {
        if c.abs() <= cut_tol {
            cuts.push(basis.m(k));
            blocks.push(start..k + 1);
            start = k + 1;
        }
    }
    blocks.push(start..basis.dim());
    let expected_pairs = if cuts.is_empty() { 0 } else { blocks[0].len() };
    Ok(BlockDecomposition {
        cut_positions: cuts,
        blocks,
        expected_pairs,
    })
}

/// Eigenvalues of one diagonal block of H_eff, ascending.
pub fn block_spectrum(h: &EffectiveHamiltonian, block: Range<usize>) -> Result<Vec<f64>> {
    let sub = h.matrix.entries().submatrix(block.start, block.len());
    Ok(eigh(&OperatorMatrix::with_role_unchecked(sub, Role::Hermitian))?.values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdtPrediction {
    /// Particles that tunnel before tunneling halts.
    pub i: usize,
    /// Index of the J₀ zero.
    pub k: usize,
    pub g1_over_omega: f64,
    pub expected_pairs: usize,
    pub validity_ratio: f64,
}

/// All CDT points J₀[g1(N − 2i − 1)/ω] = 0 for 0 ≤ i < (N − 1)/2 and roots
/// 1..=`max_root`, sorted by g1/ω.
///
/// N, v and ω come from `template`; its g1 is ignored.
pub fn predict_cdt_points(template: &ModelParams, max_root: usize) -> Result<Vec<CdtPrediction>> {
    template.validate()?;
    let n = template.n;
    if n < 2 {
        return Err(CdtError::InvalidParameter(format!(
            "CDT predictions need N >= 2, got {n}"
        )));
    }
    if !(1..=MAX_ROOT_INDEX).contains(&max_root) {
        return Err(CdtError::InvalidParameter(format!(
            "max_root must be in 1..={MAX_ROOT_INDEX}, got {max_root}"
        )));
    }
    let mut out = Vec::new();
    for i in 0..n / 2 {
        let span = n - (2 * i + 1);
        if span == 0 {
            continue;
        }
        for k in 1..=max_root {
            let x = j0_root(k)? / span as f64;
            let params = template.with_g1_over_omega(x);
            out.push(CdtPrediction {
                i,
                k,
                g1_over_omega: x,
                expected_pairs: i + 1,
                validity_ratio: validity_ratio(&params, i)?,
            });
        }
    }
    out.sort_by(|a, b| a.g1_over_omega.total_cmp(&b.g1_over_omega).then(a.i.cmp(&b.i)));
    Ok(out)
}

/// Effective bias |g1·(N − 2i − 1)| between the configurations linked at the
/// i-th cut (named to keep it apart from the quasienergy).
pub fn bias_amplitude(params: &ModelParams, i: usize) -> f64 {
    (params.g1 * (params.n as f64 - (2 * i + 1) as f64)).abs()
}

/// ṽ / max(ω, √(bias·ω)) with ṽ = v√((N − i)(i + 1)). Small values mean the
/// first-order high-frequency picture applies.
pub fn validity_ratio(params: &ModelParams, i: usize) -> Result<f64> {
    params.validate()?;
    if 2 * i >= params.n {
        return Err(CdtError::InvalidParameter(format!(
            "i must satisfy 0 <= i < N/2, got i = {i} for N = {}",
            params.n
        )));
    }
    let n = params.n as f64;
    let i_f = i as f64;
    let coupling = params.v.abs() * ((n - i_f) * (i_f + 1.0)).sqrt();
    let scale = params.omega.max((bias_amplitude(params, i) * params.omega).sqrt());
    Ok(coupling / scale)
}
