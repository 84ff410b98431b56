//! One-period propagators and quasienergy spectra.
//!
//! The period [0, T) is cut into M equal substeps and each is propagated with the
//! Hamiltonian frozen at its midpoint, so every factor is exactly unitary and the
//! scheme is second order in T/M. Spectra are refined by doubling M.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CdtError, Result};
use crate::model::{build_parity, ladder_coefficient, ModelParams};
use crate::numerics::eigen::{eig_unitary_matrix, jacobi_real};
use crate::numerics::matrix::{inner, CMatrix, ZERO};
use crate::numerics::{OperatorMatrix, Role};

pub const INITIAL_SUBSTEPS: usize = 32;
pub const MAX_SUBSTEPS: usize = 1 << 16;
/// Default convergence target for quasienergies, in units of v.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Floquet states must satisfy ‖Pφ − pφ‖ ≤ this.
pub const PARITY_TOL: f64 = 1e-6;

fn validate_substeps(substeps: usize) -> Result<()> {
    if substeps < 4 || !substeps.is_multiple_of(2) {
        return Err(CdtError::InvalidParameter(format!(
            "substeps must be even and at least 4, got {substeps}"
        )));
    }
    Ok(())
}

/// Reusable workspace for exp(−i·dt·H)·U with real symmetric H.
///
/// Successive substep Hamiltonians differ little, so each Jacobi solve starts
/// from the previous eigenbasis, where the matrix is already nearly diagonal.
pub(crate) struct RealExpStepper {
    n: usize,
    basis: Vec<f64>,
    a: Vec<f64>,
    hb: Vec<f64>,
    v: Vec<f64>,
    w: Vec<Complex64>,
}

/// Modified Gram–Schmidt on the columns of a row-major real matrix.
fn orthonormalize_columns(b: &mut [f64], n: usize) {
    for c in 0..n {
        for prev in 0..c {
            let dot: f64 = (0..n).map(|r| b[r * n + prev] * b[r * n + c]).sum();
            for r in 0..n {
                b[r * n + c] -= dot * b[r * n + prev];
            }
        }
        let norm = (0..n).map(|r| b[r * n + c] * b[r * n + c]).sum::<f64>().sqrt();
        for r in 0..n {
            b[r * n + c] /= norm;
        }
    }
}

impl RealExpStepper {
    pub fn new(n: usize) -> Self {
        let mut basis = vec![0.0; n * n];
        for i in 0..n {
            basis[i * n + i] = 1.0;
        }
        Self {
            n,
            basis,
            a: vec![0.0; n * n],
            hb: vec![0.0; n * n],
            v: vec![0.0; n * n],
            w: vec![ZERO; n * n],
        }
    }

    /// u ← exp(−i·dt·h)·u for the real symmetric tridiagonal `h` with diagonal
    /// `diag` and first off-diagonal `off`.
    pub fn apply(&mut self, diag: &[f64], off: &[f64], dt: f64, u: &mut CMatrix) -> Result<()> {
        let n = self.n;
        let b = &self.basis;
        // hb = H B, exploiting the tridiagonal structure.
        for r in 0..n {
            for c in 0..n {
                let mut acc = diag[r] * b[r * n + c];
                if r + 1 < n {
                    acc += off[r] * b[(r + 1) * n + c];
                }
                if r > 0 {
                    acc += off[r - 1] * b[(r - 1) * n + c];
                }
                self.hb[r * n + c] = acc;
            }
        }
        // a = Bᵀ (H B)
        for r in 0..n {
            for c in r..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += b[k * n + r] * self.hb[k * n + c];
                }
                self.a[r * n + c] = acc;
                self.a[c * n + r] = acc;
            }
        }
        let h_norm = (diag.iter().map(|x| x * x).sum::<f64>()
            + 2.0 * off.iter().map(|x| x * x).sum::<f64>())
        .sqrt();
        let threshold = crate::numerics::eigen::OFFDIAG_REL_TOL * h_norm;
        jacobi_real(&mut self.a, &mut self.v, n, threshold)?;
        // New eigenbasis B ← B·V, reused as the next starting point.
        for r in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.basis[r * n + k] * self.v[k * n + c];
                }
                self.hb[r * n + c] = acc;
            }
        }
        std::mem::swap(&mut self.basis, &mut self.hb);
        // The warm-start basis accumulates rounding as B ← B·V; restoring
        // orthonormality every step keeps each factor unitary to rounding.
        orthonormalize_columns(&mut self.basis, n);

        let (v, w) = (&self.basis, &mut self.w);
        let cols = u.as_slice().len() / n;
        // w = diag(e^{−iλdt}) · Bᵀ · u
        let data = u.as_mut_slice();
        for k in 0..n {
            let phase = Complex64::from_polar(1.0, -dt * self.a[k * n + k]);
            for c in 0..cols {
                let mut acc = ZERO;
                for r in 0..n {
                    acc += data[r * cols + c] * v[r * n + k];
                }
                w[k * cols + c] = acc * phase;
            }
        }
        // u = B · w
        for r in 0..n {
            for c in 0..cols {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += w[k * cols + c] * v[r * n + k];
                }
                data[r * cols + c] = acc;
            }
        }
        Ok(())
    }
}

/// Tridiagonal pieces of H(t): the fixed tunneling off-diagonal and m².
pub(crate) struct TridiagonalHamiltonian {
    pub off: Vec<f64>,
    pub m_squared: Vec<f64>,
    diag: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn new(params: &ModelParams) -> Self {
        let basis = params.basis();
        let j = basis.j();
        let off = (0..basis.dim().saturating_sub(1))
            .map(|k| 0.5 * params.v * ladder_coefficient(j, basis.m(k + 1)))
            .collect();
        let m_squared: Vec<f64> = basis.m_values().iter().map(|m| m * m).collect();
        Self {
            off,
            diag: vec![0.0; m_squared.len()],
            m_squared,
        }
    }

    /// Sets the diagonal of H for interaction strength `g`.
    pub fn set_interaction(&mut self, g: f64) {
        for (d, m2) in self.diag.iter_mut().zip(&self.m_squared) {
            *d = g * m2;
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }
}

/// Applies substeps `first..last` of the midpoint scheme (substep k frozen at
/// t = (k + ½)·dt, dt = T/substeps) to `u`; k may run past one period.
/// `on_boundary(k, u)` is called at every boundary k in `first..=last`.
pub(crate) fn propagate_substeps(
    params: &ModelParams,
    substeps: usize,
    range: std::ops::Range<usize>,
    u: &mut CMatrix,
    mut on_boundary: impl FnMut(usize, &CMatrix),
) -> Result<()> {
    validate_substeps(substeps)?;
    params.validate()?;
    let dt = params.period() / substeps as f64;
    let mut h = TridiagonalHamiltonian::new(params);
    let mut stepper = RealExpStepper::new(params.dim());
    for k in range.clone() {
        on_boundary(k, u);
        h.set_interaction(params.interaction_at((k as f64 + 0.5) * dt));
        stepper.apply(h.diagonal(), &h.off, dt, u)?;
    }
    on_boundary(range.end, u);
    Ok(())
}

pub(crate) fn propagate_period(params: &ModelParams, substeps: usize) -> Result<CMatrix> {
    let mut u = CMatrix::identity(params.dim());
    propagate_substeps(params, substeps, 0..substeps, &mut u, |_, _| {})?;
    Ok(u)
}

/// Time-ordered one-period propagator built from `substeps` midpoint exponentials,
/// with the period starting at t = 0 where g(0) = g0 + g1.
pub fn floquet_operator(params: &ModelParams, substeps: usize) -> Result<OperatorMatrix> {
    let floquet = propagate_period(params, substeps)?;
    Ok(OperatorMatrix::with_role_unchecked(floquet, Role::Unitary))
}

/// Folds a quasienergy into (−ω/2, ω/2].
pub fn fold_quasienergy(e: f64, omega: f64) -> f64 {
    let mut x = e - omega * (e / omega).round();
    if x <= -0.5 * omega {
        x += omega;
    }
    if x > 0.5 * omega {
        x -= omega;
    }
    x
}

/// Distance between two quasienergies modulo ω.
pub fn quasienergy_distance(a: f64, b: f64, omega: f64) -> f64 {
    let d = (a - b).rem_euclid(omega);
    d.min(omega - d)
}

fn quasienergy_of(lambda: Complex64, omega: f64) -> f64 {
    fold_quasienergy(-omega / (2.0 * PI) * lambda.arg(), omega)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasienergySpectrum {
    pub params: ModelParams,
    /// Folded into (−ω/2, ω/2], ascending.
    pub quasienergies: Vec<f64>,
    /// ±1, one per state.
    pub parities: Vec<i8>,
    /// Floquet states as columns, aligned with `quasienergies`.
    pub states: CMatrix,
    pub substeps_used: usize,
    /// Largest quasienergy shift between the last two refinements.
    pub convergence_estimate: f64,
}

impl QuasienergySpectrum {
    pub fn len(&self) -> usize {
        self.quasienergies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quasienergies.is_empty()
    }

    pub fn state(&self, k: usize) -> Vec<Complex64> {
        self.states.column(k)
    }

    /// Quasienergies of one parity class, ascending.
    pub fn parity_class(&self, parity: i8) -> Vec<f64> {
        self.quasienergies
            .iter()
            .zip(&self.parities)
            .filter(|(_, &p)| p == parity)
            .map(|(&e, _)| e)
            .collect()
    }

    /// Smallest quasienergy separation between states of opposite parity.
    pub fn min_opposite_parity_gap(&self) -> f64 {
        let omega = self.params.omega;
        let mut best = f64::INFINITY;
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if self.parities[a] != self.parities[b] {
                    best = best.min(quasienergy_distance(
                        self.quasienergies[a],
                        self.quasienergies[b],
                        omega,
                    ));
                }
            }
        }
        best
    }

    /// Chains of states whose neighbouring quasienergies lie within `threshold`
    /// (modulo ω), as index lists. Singletons are omitted.
    pub fn degenerate_clusters(&self, threshold: f64) -> Vec<Vec<usize>> {
        let n = self.len();
        if n < 2 {
            return Vec::new();
        }
        let omega = self.params.omega;
        let mut groups: Vec<Vec<usize>> = vec![vec![0]];
        for k in 1..n {
            if self.quasienergies[k] - self.quasienergies[k - 1] <= threshold {
                groups.last_mut().unwrap().push(k);
            } else {
                groups.push(vec![k]);
            }
        }
        if groups.len() > 1
            && quasienergy_distance(self.quasienergies[0], self.quasienergies[n - 1], omega)
                <= threshold
        {
            let first = groups.remove(0);
            groups.last_mut().unwrap().extend(first);
        }
        groups.into_iter().filter(|g| g.len() > 1).collect()
    }
}

/// Orthonormal parity eigenbasis: (e_k + p·e_{N−k})/√2 for k < N/2, plus the
/// self-mirrored middle state (even) when N is even.
fn parity_sector_basis(dim: usize, parity: i8) -> Vec<Vec<Complex64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for k in 0..dim / 2 {
        let mut v = vec![ZERO; dim];
        v[k] = Complex64::new(s, 0.0);
        v[dim - 1 - k] = Complex64::new(s * parity as f64, 0.0);
        out.push(v);
    }
    if dim % 2 == 1 && parity > 0 {
        let mut v = vec![ZERO; dim];
        v[dim / 2] = Complex64::new(1.0, 0.0);
        out.push(v);
    }
    out
}

/// Diagonalizes F separately inside each parity sector and returns
/// (quasienergies, parities, states) sorted by quasienergy.
///
/// F commutes with P up to rounding, so its restriction to each sector is
/// unitary to the same accuracy. Working sector by sector keeps states of
/// opposite parity from mixing however close their quasienergies come.
fn label_floquet_states(
    floquet: &CMatrix,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<i8>, CMatrix)> {
    let omega = params.omega;
    let dim = floquet.dim();
    let parity = build_parity(&params.basis());
    let parity = parity.entries();

    let mut labelled: Vec<(f64, i8, Vec<Complex64>)> = Vec::with_capacity(dim);
    for sign in [1i8, -1] {
        let sector = parity_sector_basis(dim, sign);
        if sector.is_empty() {
            continue;
        }
        let f_images: Vec<Vec<Complex64>> = sector.iter().map(|b| floquet.matvec(b)).collect();
        let restricted =
            CMatrix::from_fn(sector.len(), |r, c| inner(&sector[r], &f_images[c]));
        let eig = eig_unitary_matrix(&restricted)?;
        for k in 0..sector.len() {
            let phi = combine(&sector, &eig.vectors.column(k));
            // Parity from ⟨φ|P|φ⟩; exact here up to rounding, checked anyway.
            let p_phi = parity.matvec(&phi);
            let p: i8 = if inner(&phi, &p_phi).re >= 0.0 { 1 } else { -1 };
            let deviation = p_phi
                .iter()
                .zip(&phi)
                .map(|(a, b)| (a - b * p as f64).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if deviation > PARITY_TOL {
                return Err(CdtError::Convergence {
                    what: "parity labelling of Floquet states",
                    achieved: deviation,
                });
            }
            let lambda = inner(&phi, &floquet.matvec(&phi));
            labelled.push((quasienergy_of(lambda, omega), p, phi));
        }
    }
    labelled.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let quasienergies = labelled.iter().map(|l| l.0).collect();
    let parities = labelled.iter().map(|l| l.1).collect();
    let columns: Vec<Vec<Complex64>> = labelled.into_iter().map(|l| l.2).collect();
    Ok((quasienergies, parities, CMatrix::from_columns(&columns)))
}

fn combine(basis: &[Vec<Complex64>], weights: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; basis[0].len()];
    for (b, &w) in basis.iter().zip(weights) {
        for (o, &x) in out.iter_mut().zip(b) {
            *o += w * x;
        }
    }
    out
}

/// Largest distance from any quasienergy in `a` to its nearest partner in `b`
/// and vice versa, modulo ω.
fn spectrum_shift(a: &[f64], b: &[f64], omega: f64) -> f64 {
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|&e| {
                y.iter()
                    .map(|&f| quasienergy_distance(e, f, omega))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

fn sorted_quasienergies(floquet: &CMatrix, omega: f64) -> Result<Vec<f64>> {
    let eig = eig_unitary_matrix(floquet)?;
    let mut e: Vec<f64> = eig.values.iter().map(|&z| quasienergy_of(z, omega)).collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Smallest substep count (32, 64, …) whose quasienergies moved by at most `tol`
/// from the previous refinement, together with that propagator and the shift.
pub(crate) fn converged_floquet(params: &ModelParams, tol: f64) -> Result<(usize, CMatrix, f64)> {
    if !(tol > 0.0) {
        return Err(CdtError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    params.validate()?;
    let omega = params.omega;
    let mut substeps = INITIAL_SUBSTEPS;
    let mut floquet = propagate_period(params, substeps)?;
    let mut previous = sorted_quasienergies(&floquet, omega)?;
    let mut shift = f64::INFINITY;
    while substeps < MAX_SUBSTEPS {
        substeps *= 2;
        floquet = propagate_period(params, substeps)?;
        let current = sorted_quasienergies(&floquet, omega)?;
        shift = spectrum_shift(&previous, &current, omega);
        if shift <= tol {
            return Ok((substeps, floquet, shift));
        }
        previous = current;
    }
    Err(CdtError::Convergence {
        what: "quasienergy substep refinement",
        achieved: shift,
    })
}

/// Converged, parity-labelled quasienergy spectrum.
pub fn quasienergy_spectrum(params: &ModelParams, tol: f64) -> Result<QuasienergySpectrum> {
    let (substeps, floquet, shift) = converged_floquet(params, tol)?;
    let (quasienergies, parities, states) = label_floquet_states(&floquet, params)?;
    Ok(QuasienergySpectrum {
        params: *params,
        quasienergies,
        parities,
        states,
        substeps_used: substeps,
        convergence_estimate: shift,
    })
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(CdtError::InvalidParameter("grid is empty".into()));
    }
    if grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(CdtError::InvalidParameter(
            "grid values must be finite and nonnegative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CdtError::InvalidParameter(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Spectra along a g1/ω grid, in grid order. Points are evaluated in parallel.
pub fn scan_spectrum(
    template: &ModelParams,
    g1_over_omega_grid: &[f64],
    tol: f64,
) -> Result<Vec<QuasienergySpectrum>> {
    validate_grid(g1_over_omega_grid)?;
    g1_over_omega_grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            quasienergy_spectrum(&template.with_g1_over_omega(x), tol)
                .map_err(|e| e.at_grid_point(i, x))
        })
        .collect()
}

/// Assigns band indices along a scan by maximal eigenvector overlap between
/// neighbouring grid points, ties broken by quasienergy proximity.
///
/// `result[g][b]` is the state index at grid point `g` that continues band `b`.
/// Bands at the first grid point follow the ascending quasienergy order.
pub fn connect_bands(spectra: &[QuasienergySpectrum]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(spectra.len());
    let Some(first) = spectra.first() else {
        return out;
    };
    out.push((0..first.len()).collect());
    for g in 1..spectra.len() {
        let (prev, cur) = (&spectra[g - 1], &spectra[g]);
        let prev_order = &out[g - 1];
        let n = cur.len();
        let omega = cur.params.omega;
        let mut candidates: Vec<(f64, f64, usize, usize)> = Vec::with_capacity(n * n);
        for (band, &pk) in prev_order.iter().enumerate() {
            let phi = prev.state(pk);
            for k in 0..n {
                let overlap = inner(&phi, &cur.state(k)).norm_sqr();
                let dist = quasienergy_distance(prev.quasienergies[pk], cur.quasienergies[k], omega);
                candidates.push((overlap, dist, band, k));
            }
        }
        // Overlaps are compared at 1e-9 resolution so that near-ties fall through
        // to the quasienergy distance.
        candidates.sort_by(|a, b| {
            let qa = (a.0 * 1e9).round();
            let qb = (b.0 * 1e9).round();
            qb.total_cmp(&qa)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.cmp(&b.2))
                .then(a.3.cmp(&b.3))
        });
        let mut assigned = vec![usize::MAX; n];
        let mut taken = vec![false; n];
        for (_, _, band, k) in candidates {
            if assigned[band] == usize::MAX && !taken[k] {
                assigned[band] = k;
                taken[k] = true;
            }
        }
        out.push(assigned);
    }
    out
}

/// A located quasienergy degeneracy between opposite-parity Floquet states.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyPoint {
    pub g1_over_omega: f64,
    /// Number of opposite-parity pairs that can be formed inside the degenerate
    /// clusters: Σ min(#even, #odd) over clusters.
    pub pair_count: usize,
    pub min_gap: f64,
    /// Parity content of every cluster that mixes both parities.
    pub involved_parities: Vec<Vec<i8>>,
    /// Mean quasienergy of each cluster in `involved_parities`.
    pub cluster_quasienergies: Vec<f64>,
}

/// Number of coarse samples used to locate local minima of the gap.
pub const DEGENERACY_SAMPLES: usize = 41;
/// Golden-section refinement stops at this bracket width in g1/ω.
pub const REFINE_WIDTH: f64 = 1e-6;
/// Default degeneracy threshold in units of ω.
pub const DEFAULT_THRESHOLD_PER_OMEGA: f64 = 1e-6;

/// An opposite-parity band pair, identified by each state's rank within its
/// parity class. Same-parity levels do not cross, so ranks follow bands.
type Channel = (usize, usize);

fn channel_gap(spectrum: &QuasienergySpectrum, (even, odd): Channel) -> f64 {
    let e = spectrum.parity_class(1);
    let o = spectrum.parity_class(-1);
    quasienergy_distance(e[even], o[odd], spectrum.params.omega)
}

fn channel_gaps(spectrum: &QuasienergySpectrum) -> Vec<(Channel, f64)> {
    let e = spectrum.parity_class(1);
    let o = spectrum.parity_class(-1);
    let omega = spectrum.params.omega;
    let mut out = Vec::with_capacity(e.len() * o.len());
    for (a, &ea) in e.iter().enumerate() {
        for (b, &ob) in o.iter().enumerate() {
            out.push(((a, b), quasienergy_distance(ea, ob, omega)));
        }
    }
    out
}

fn golden_section(
    mut lo: f64,
    mut hi: f64,
    width: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    while hi - lo > width {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b)?;
        }
    }
    Ok(if fa <= fb { (a, fa) } else { (b, fb) })
}

/// A channel whose gap was refined to a local minimum.
#[derive(Debug, Clone, Copy)]
struct ChannelMinimum {
    channel: Channel,
    g1_over_omega: f64,
    gap: f64,
}

/// Finds opposite-parity quasienergy degeneracies in `bracket` (in g1/ω).
///
/// The gap of every opposite-parity band pair is sampled on a coarse grid.
/// Interior coarse minima whose neighbouring samples are consistent with the
/// gap closing within one step are refined by golden-section search to width
/// [`REFINE_WIDTH`]. Channels that close (gap ≤ `threshold`) within one coarse
/// step of each other form one degeneracy; when several do, the reported point
/// minimizes the largest of their gaps, so that simultaneous crossings are
/// described together. An empty result is not an error.
pub fn find_degeneracies(
    template: &ModelParams,
    bracket: (f64, f64),
    threshold: f64,
    tol: f64,
) -> Result<Vec<DegeneracyPoint>> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(CdtError::InvalidParameter(format!(
            "bracket must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(threshold > 0.0) {
        return Err(CdtError::InvalidParameter(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let spectrum_at = |x: f64| quasienergy_spectrum(&template.with_g1_over_omega(x), tol);
    let step = (hi - lo) / (DEGENERACY_SAMPLES - 1) as f64;
    let xs: Vec<f64> = (0..DEGENERACY_SAMPLES).map(|i| lo + step * i as f64).collect();
    let coarse: Vec<Vec<(Channel, f64)>> = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| spectrum_at(x).map(|s| channel_gaps(&s)).map_err(|e| e.at_grid_point(i, x)))
        .collect::<Result<_>>()?;

    let mut candidates: Vec<(Channel, usize)> = Vec::new();
    for (c, &(channel, _)) in coarse[0].iter().enumerate() {
        for i in 1..DEGENERACY_SAMPLES - 1 {
            let (a, b, d) = (coarse[i - 1][c].1, coarse[i][c].1, coarse[i + 1][c].1);
            // Linear extrapolation from the steeper side must reach zero
            // within one step; avoided crossings fail this.
            if b <= a && b < d && b <= (a - b).max(d - b) {
                candidates.push((channel, i));
            }
        }
    }
    let mut minima: Vec<ChannelMinimum> = candidates
        .par_iter()
        .map(|&(channel, i)| {
            golden_section(xs[i - 1], xs[i + 1], REFINE_WIDTH, |x| {
                Ok(channel_gap(&spectrum_at(x)?, channel))
            })
            .map(|(x, gap)| ChannelMinimum { channel, g1_over_omega: x, gap })
        })
        .collect::<Result<_>>()?;
    minima.retain(|m| m.gap <= threshold);
    minima.sort_by(|a, b| a.g1_over_omega.total_cmp(&b.g1_over_omega));

    let mut groups: Vec<Vec<ChannelMinimum>> = Vec::new();
    for m in minima {
        match groups.last_mut() {
            Some(g) if m.g1_over_omega - g.last().unwrap().g1_over_omega <= step => g.push(m),
            _ => groups.push(vec![m]),
        }
    }

    let mut points = Vec::new();
    for group in groups {
        for x in joint_locations(&group, threshold, &spectrum_at)? {
            let spectrum = spectrum_at(x)?;
            let point = describe_degeneracy(&spectrum, threshold);
            if point.pair_count >= 1 {
                points.push(point);
            }
        }
    }
    Ok(points)
}

/// Location(s) reported for a group of channel minima: one point where all of
/// them are closed together if such a point exists, otherwise each channel's
/// own minimizer.
fn joint_locations(
    group: &[ChannelMinimum],
    threshold: f64,
    spectrum_at: &impl Fn(f64) -> Result<QuasienergySpectrum>,
) -> Result<Vec<f64>> {
    let best = group.iter().min_by(|a, b| a.gap.total_cmp(&b.gap)).unwrap();
    let first = group.first().unwrap().g1_over_omega;
    let last = group.last().unwrap().g1_over_omega;
    if last - first <= 2.0 * REFINE_WIDTH {
        return Ok(vec![best.g1_over_omega]);
    }
    let pad = 5.0 * REFINE_WIDTH;
    let (x, worst) = golden_section(first - pad, last + pad, REFINE_WIDTH, |x| {
        let s = spectrum_at(x)?;
        Ok(group
            .iter()
            .map(|m| channel_gap(&s, m.channel))
            .fold(0.0, f64::max))
    })?;
    if worst <= threshold {
        return Ok(vec![x]);
    }
    let mut xs: Vec<f64> = group.iter().map(|m| m.g1_over_omega).collect();
    xs.dedup_by(|a, b| (*a - *b).abs() <= 2.0 * REFINE_WIDTH);
    Ok(xs)
}

/// Summarizes opposite-parity clusters of a spectrum at a given threshold.
pub fn describe_degeneracy(spectrum: &QuasienergySpectrum, threshold: f64) -> DegeneracyPoint {
    let mut pair_count = 0;
    let mut involved = Vec::new();
    let mut energies = Vec::new();
    for cluster in spectrum.degenerate_clusters(threshold) {
        let parities: Vec<i8> = cluster.iter().map(|&k| spectrum.parities[k]).collect();
        let even = parities.iter().filter(|&&p| p > 0).count();
        let odd = parities.len() - even;
        if even > 0 && odd > 0 {
            pair_count += even.min(odd);
            // Circular mean keeps clusters straddling ±ω/2 in place.
            let omega = spectrum.params.omega;
            let z: Complex64 = cluster
                .iter()
                .map(|&k| Complex64::from_polar(1.0, 2.0 * PI * spectrum.quasienergies[k] / omega))
                .sum();
            energies.push(fold_quasienergy(z.arg() * omega / (2.0 * PI), omega));
            involved.push(parities);
        }
    }
    DegeneracyPoint {
        g1_over_omega: spectrum.params.g1_over_omega(),
        pair_count,
        min_gap: spectrum.min_opposite_parity_gap(),
        involved_parities: involved,
        cluster_quasienergies: energies,
    }
}
