//! Long-time evolution of the population imbalance ⟨S⟩ = 2⟨Jz⟩/N.
//!
//! A converged Floquet spectrum gives ψ(nT) = Σₖ e^{−iεₖnT}⟨φₖ|ψ₀⟩φₖ at any
//! period count n for O(dim²) work, so long runs never accumulate per-period
//! rounding. Samples inside a period are reached by applying the same substep
//! propagator that built F, from nT up to the nearest substep boundary.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::effective::{effective_hamiltonian, predict_cdt_points};
use crate::error::{CdtError, Result};
use crate::floquet::{propagate_substeps, quasienergy_spectrum, QuasienergySpectrum};
use crate::model::{build_parity, Basis, ModelParams};
use crate::numerics::eigen::spectral_exp;
use crate::numerics::eigh;
use crate::numerics::matrix::{inner, norm, CMatrix, ZERO};

/// Largest number of samples a single trajectory may hold.
pub const MAX_SAMPLES: usize = 50_000_000;
/// Averaging time used for ⟨⟨S⟩⟩ unless configured otherwise.
pub const DEFAULT_T_TOTAL: f64 = 20000.0;
/// Sub-period sampling used for plots, as a fraction of the period.
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 8;

/// All bosons in the left mode: the unit vector on m = +N/2.
pub fn initial_state_all_left(basis: &Basis) -> Vec<Complex64> {
    let mut psi = vec![ZERO; basis.dim()];
    psi[0] = Complex64::new(1.0, 0.0);
    psi
}

/// ⟨S⟩ = 2⟨Jz⟩/N for a normalized state.
pub fn imbalance(state: &[Complex64], basis: &Basis) -> f64 {
    let jz: f64 = state
        .iter()
        .zip(basis.m_values())
        .map(|(c, m)| c.norm_sqr() * m)
        .sum();
    2.0 * jz / basis.n() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    /// Times at which ⟨S⟩ was evaluated. For exact runs these are the substep
    /// boundaries nearest to the uniform grid s·sample_dt.
    pub times: Vec<f64>,
    pub s_values: Vec<f64>,
    /// max |‖ψ‖ − 1| over the samples.
    pub norm_drift: f64,
    pub sample_dt: f64,
    /// Requested end time.
    pub t_max: f64,
    /// Substeps per period of the propagator (0 for effective-model runs).
    pub substeps_used: usize,
}

impl Trajectory {
    pub fn min_s(&self) -> f64 {
        self.s_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_s(&self) -> f64 {
        self.s_values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest ⟨S⟩ among samples whose grid time is at most `t`.
    pub fn min_s_until(&self, t: f64) -> f64 {
        let count = sample_count(t.min(self.t_max), self.sample_dt);
        self.s_values[..count.min(self.s_values.len())]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_state(state: &[Complex64], dim: usize) -> Result<()> {
    if state.len() != dim {
        return Err(CdtError::InvalidParameter(format!(
            "state has {} components, the basis has {dim}",
            state.len()
        )));
    }
    let n = norm(state);
    if !((n - 1.0).abs() <= 1e-10) {
        return Err(CdtError::InvalidParameter(format!(
            "state must be normalized, norm is {n}"
        )));
    }
    Ok(())
}

/// Number of grid points s·dt with s·dt ≤ t_max (relative slack 1e-12).
fn sample_count(t_max: f64, dt: f64) -> usize {
    (t_max / dt * (1.0 + 1e-12) + 1e-12).floor() as usize + 1
}

fn check_sampling(t_max: f64, sample_dt: f64) -> Result<usize> {
    if !(sample_dt.is_finite() && sample_dt > 0.0) {
        return Err(CdtError::InvalidParameter(format!(
            "sample_dt must be positive and finite, got {sample_dt}"
        )));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(CdtError::InvalidParameter(format!(
            "t_max must be nonnegative and finite, got {t_max}"
        )));
    }
    let count = sample_count(t_max, sample_dt);
    if count > MAX_SAMPLES {
        return Err(CdtError::InvalidParameter(format!(
            "{count} samples requested, at most {MAX_SAMPLES} supported"
        )));
    }
    Ok(count)
}

/// ψ(nT) from the Floquet decomposition, given c = Φ†ψ₀. ψ(0) is returned
/// verbatim rather than resynthesized, so the first sample is exact.
struct Stroboscope<'a> {
    spectrum: &'a QuasienergySpectrum,
    initial: Vec<Complex64>,
    coefficients: Vec<Complex64>,
    /// εₖT, in (−π, π].
    phases: Vec<f64>,
}

impl<'a> Stroboscope<'a> {
    fn new(spectrum: &'a QuasienergySpectrum, state: &[Complex64]) -> Self {
        let period = spectrum.params.period();
        Self {
            coefficients: (0..spectrum.len())
                .map(|k| inner(&spectrum.state(k), state))
                .collect(),
            phases: spectrum.quasienergies.iter().map(|e| e * period).collect(),
            initial: state.to_vec(),
            spectrum,
        }
    }

    fn at_period(&self, n: u64) -> Vec<Complex64> {
        if n == 0 {
            return self.initial.clone();
        }
        let dim = self.coefficients.len();
        let states = &self.spectrum.states;
        let mut psi = vec![ZERO; dim];
        for k in 0..dim {
            let w = self.coefficients[k] * Complex64::from_polar(1.0, -(n as f64) * self.phases[k]);
            for (r, p) in psi.iter_mut().enumerate() {
                *p += states[(r, k)] * w;
            }
        }
        psi
    }
}

/// Exact evolution of `state` sampled every `sample_dt` up to `t_max`.
///
/// The Floquet spectrum is converged to `tol`; its substep count M fixes the
/// time resolution T/M to which sample times are rounded.
pub fn evolve(
    state: &[Complex64],
    params: &ModelParams,
    t_max: f64,
    sample_dt: f64,
    tol: f64,
) -> Result<Trajectory> {
    params.validate()?;
    check_state(state, params.dim())?;
    let count = check_sampling(t_max, sample_dt)?;
    let spectrum = quasienergy_spectrum(params, tol)?;
    evolve_with_spectrum(state, &spectrum, t_max, sample_dt, count)
}

fn evolve_with_spectrum(
    state: &[Complex64],
    spectrum: &QuasienergySpectrum,
    t_max: f64,
    sample_dt: f64,
    count: usize,
) -> Result<Trajectory> {
    let params = spectrum.params;
    let basis = params.basis();
    let substeps = spectrum.substeps_used;
    let dt = params.period() / substeps as f64;
    let strobe = Stroboscope::new(spectrum, state);

    // Global substep index of each sample, grouped by position in the period.
    let mut by_offset: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    let mut times = Vec::with_capacity(count);
    for s in 0..count {
        let k = (s as f64 * sample_dt / dt).round() as u64;
        times.push(k as f64 * dt);
        let (n, r) = (k / substeps as u64, (k % substeps as u64) as usize);
        by_offset.entry(r).or_default().push((s, n));
    }

    let mut s_values = vec![0.0; count];
    let mut norm_drift: f64 = 0.0;
    let mut record = |u: &CMatrix, samples: &[(usize, u64)]| {
        for &(s, n) in samples {
            let psi = u.matvec(&strobe.at_period(n));
            norm_drift = norm_drift.max((norm(&psi) - 1.0).abs());
            s_values[s] = imbalance(&psi, &basis);
        }
    };
    let last_offset = *by_offset.keys().next_back().unwrap();
    if last_offset == 0 {
        record(&CMatrix::identity(params.dim()), &by_offset[&0]);
    } else {
        let mut u = CMatrix::identity(params.dim());
        propagate_substeps(&params, substeps, 0..last_offset, &mut u, |k, u| {
            if let Some(samples) = by_offset.get(&k) {
                record(u, samples);
            }
        })?;
    }

    Ok(Trajectory {
        params,
        times,
        s_values,
        norm_drift,
        sample_dt,
        t_max,
        substeps_used: substeps,
    })
}

/// Evolution sampled once per period, as used for long-time averages.
pub fn evolve_strobed(
    state: &[Complex64],
    params: &ModelParams,
    t_max: f64,
    tol: f64,
) -> Result<Trajectory> {
    evolve(state, params, t_max, params.period(), tol)
}

/// Evolution under the static effective Hamiltonian on the grid s·sample_dt.
pub fn evolve_effective(
    state: &[Complex64],
    params: &ModelParams,
    t_max: f64,
    sample_dt: f64,
) -> Result<Trajectory> {
    params.validate()?;
    check_state(state, params.dim())?;
    let count = check_sampling(t_max, sample_dt)?;
    let basis = params.basis();
    let eig = eigh(&effective_hamiltonian(params)?.matrix)?;
    let step = spectral_exp(&eig, sample_dt);
    let mut psi = state.to_vec();
    let mut times = Vec::with_capacity(count);
    let mut s_values = Vec::with_capacity(count);
    let mut norm_drift: f64 = 0.0;
    for s in 0..count {
        if s > 0 {
            psi = step.matvec(&psi);
        }
        times.push(s as f64 * sample_dt);
        s_values.push(imbalance(&psi, &basis));
        norm_drift = norm_drift.max((norm(&psi) - 1.0).abs());
    }
    Ok(Trajectory {
        params: *params,
        times,
        s_values,
        norm_drift,
        sample_dt,
        t_max,
        substeps_used: 0,
    })
}

/// Time-ordered integration over `total_substeps` midpoint steps of size
/// T/`substeps`, without the Floquet factorization. Reference for the
/// stroboscopic evolution.
pub fn evolve_direct(
    state: &[Complex64],
    params: &ModelParams,
    substeps: usize,
    total_substeps: usize,
) -> Result<Vec<Complex64>> {
    params.validate()?;
    check_state(state, params.dim())?;
    let mut u = CMatrix::identity(params.dim());
    propagate_substeps(params, substeps, 0..total_substeps, &mut u, |_, _| {})?;
    Ok(u.matvec(state))
}

/// ⟨⟨S⟩⟩: the mean of the samples on [0, t_total], t = 0 included.
pub fn time_average(traj: &Trajectory, t_total: f64) -> Result<f64> {
    if !(t_total.is_finite() && t_total >= 0.0) {
        return Err(CdtError::InvalidParameter(format!(
            "t_total must be nonnegative and finite, got {t_total}"
        )));
    }
    if traj.t_max < t_total * (1.0 - 1e-12) {
        return Err(CdtError::InsufficientCoverage {
            requested: t_total,
            available: traj.t_max,
        });
    }
    let count = sample_count(t_total, traj.sample_dt).min(traj.s_values.len());
    let sum: f64 = traj.s_values[..count].iter().sum();
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub grid: Vec<f64>,
    pub s_avg: Vec<f64>,
    pub params_template: ModelParams,
}

/// ⟨⟨S⟩⟩ over `t_total` for the all-left state at each g1/ω of `grid`, with
/// period-strobed sampling. `g0_override` replaces the template's g0.
pub fn scan_imbalance(
    template: &ModelParams,
    grid: &[f64],
    t_total: f64,
    g0_override: Option<f64>,
    tol: f64,
) -> Result<ScanResult> {
    if grid.is_empty() {
        return Err(CdtError::InvalidParameter("grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|x| !x.is_finite()) {
        return Err(CdtError::InvalidParameter(
            "grid must be finite and strictly increasing".into(),
        ));
    }
    if !(t_total.is_finite() && t_total > 0.0) {
        return Err(CdtError::InvalidParameter(format!(
            "t_total must be positive and finite, got {t_total}"
        )));
    }
    let template = ModelParams {
        g0: g0_override.unwrap_or(template.g0),
        ..*template
    };
    template.validate()?;
    let psi0 = initial_state_all_left(&template.basis());
    let s_avg = grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let params = template.with_g1_over_omega(x);
            evolve_strobed(&psi0, &params, t_total, tol)
                .and_then(|traj| time_average(&traj, t_total))
                .map_err(|e| e.at_grid_point(i, x))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScanResult {
        grid: grid.to_vec(),
        s_avg,
        params_template: template,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OddEvenReport {
    pub n_base: usize,
    pub delta: usize,
    /// Particle count actually simulated, N_base + delta.
    pub n: usize,
    pub g1_over_omega: f64,
    pub s_avg: f64,
    pub s_min: f64,
}

/// Runs N_base + `delta` particles, all starting left, at the g1/ω where
/// J₀[g1(N_base − 1)/ω] = 0, and reports ⟨⟨S⟩⟩ and min ⟨S⟩ over `t_total`
/// (period-strobed). N, v, ω and g0 other than N come from `template`.
pub fn odd_even_experiment(
    n_base: usize,
    delta: usize,
    template: &ModelParams,
    t_total: f64,
    tol: f64,
) -> Result<OddEvenReport> {
    if !(delta == 1 || delta == 2) {
        return Err(CdtError::InvalidParameter(format!(
            "delta must be 1 or 2, got {delta}"
        )));
    }
    let base = ModelParams {
        n: n_base,
        ..*template
    };
    let point_one = predict_cdt_points(&base, 1)?
        .into_iter()
        .find(|c| c.i == 0)
        .expect("i = 0 prediction exists for N >= 2");
    odd_even_at(n_base, delta, template, point_one.g1_over_omega, t_total, tol)
}

/// [`odd_even_experiment`] at an explicitly given g1/ω, e.g. a numerically
/// refined degeneracy of the base system.
pub fn odd_even_at(
    n_base: usize,
    delta: usize,
    template: &ModelParams,
    g1_over_omega: f64,
    t_total: f64,
    tol: f64,
) -> Result<OddEvenReport> {
    if !(delta == 1 || delta == 2) {
        return Err(CdtError::InvalidParameter(format!(
            "delta must be 1 or 2, got {delta}"
        )));
    }
    let n = n_base + delta;
    let params = ModelParams {
        n,
        ..*template
    }
    .with_g1_over_omega(g1_over_omega);
    params.validate()?;
    let traj = evolve_strobed(&initial_state_all_left(&params.basis()), &params, t_total, tol)?;
    Ok(OddEvenReport {
        n_base,
        delta,
        n,
        g1_over_omega,
        s_avg: time_average(&traj, t_total)?,
        s_min: traj.min_s(),
    })
}

/// Full width at half maximum of a ⟨⟨S⟩⟩ peak on a scan grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakWidth {
    pub location: f64,
    pub height: f64,
    pub width: f64,
    /// The half-maximum level was not crossed before the grid edge; the width
    /// is then a lower bound.
    pub left_censored: bool,
    pub right_censored: bool,
}

/// Width of the highest peak within `radius` of `center`: the contiguous
/// region where values stay at or above half the peak height, with edges
/// linearly interpolated between grid points.
pub fn peak_width(grid: &[f64], values: &[f64], center: f64, radius: f64) -> Option<PeakWidth> {
    assert_eq!(grid.len(), values.len());
    let top = (0..grid.len())
        .filter(|&i| (grid[i] - center).abs() <= radius)
        .max_by(|&a, &b| values[a].total_cmp(&values[b]))?;
    let height = values[top];
    if !(height > 0.0) {
        return None;
    }
    let half = 0.5 * height;
    let crossing = |inside: usize, outside: usize| {
        let (x0, y0, x1, y1) = (grid[inside], values[inside], grid[outside], values[outside]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let mut left = top;
    while left > 0 && values[left - 1] >= half {
        left -= 1;
    }
    let (left_x, left_censored) = if left == 0 {
        (grid[0], true)
    } else {
        (crossing(left, left - 1), false)
    };
    let mut right = top;
    while right + 1 < grid.len() && values[right + 1] >= half {
        right += 1;
    }
    let (right_x, right_censored) = if right + 1 == grid.len() {
        (grid[right], true)
    } else {
        (crossing(right, right + 1), false)
    };
    Some(PeakWidth {
        location: grid[top],
        height,
        width: right_x - left_x,
        left_censored,
        right_censored,
    })
}

/// P·ψ: the left/right mirror of a state.
pub fn mirror(state: &[Complex64], basis: &Basis) -> Vec<Complex64> {
    build_parity(basis).entries().matvec(state)
}
