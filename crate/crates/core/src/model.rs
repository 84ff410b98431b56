//! The driven two-mode boson model in its spin-j form.
//!
//! With j = N/2 the Hamiltonian is `H(t) = v·Jx + g(t)·Jz²`, `g(t) = g0 + g1·cos(ωt)`,
//! in units with ħ = 1. States are expanded in the Jz eigenbasis |m⟩ ordered from
//! m = +N/2 (all bosons in the left mode, index 0) down to m = −N/2.

use num_complex::Complex64;

use crate::error::{CdtError, Result};
use crate::numerics::matrix::{CMatrix, ONE, ZERO};
pub use crate::numerics::{OperatorMatrix, Role};

/// Physical parameters of one driven dimer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Particle count.
    pub n: usize,
    /// Tunneling rate.
    pub v: f64,
    /// Static interaction strength.
    pub g0: f64,
    /// Modulation amplitude.
    pub g1: f64,
    /// Modulation angular frequency.
    pub omega: f64,
}

impl ModelParams {
    pub fn new(n: usize, v: f64, g0: f64, g1: f64, omega: f64) -> Result<Self> {
        let p = Self {
            n,
            v,
            g0,
            g1,
            omega,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same parameters with the drive amplitude set through g1/ω.
    pub fn with_g1_over_omega(self, g1_over_omega: f64) -> Self {
        Self {
            g1: g1_over_omega * self.omega,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(CdtError::InvalidParameter("N must be at least 1".into()));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(CdtError::InvalidParameter(format!(
                "omega must be finite and positive, got {}",
                self.omega
            )));
        }
        for (name, x) in [("v", self.v), ("g0", self.g0), ("g1", self.g1)] {
            if !x.is_finite() {
                return Err(CdtError::InvalidParameter(format!(
                    "{name} must be finite, got {x}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    pub fn g1_over_omega(&self) -> f64 {
        self.g1 / self.omega
    }

    /// g(t) = g0 + g1 cos(ωt).
    pub fn interaction_at(&self, t: f64) -> f64 {
        self.g0 + self.g1 * (self.omega * t).cos()
    }

    pub fn basis(&self) -> Basis {
        Basis::new(self.n)
    }
}

/// The Jz eigenbasis for N particles.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    n: usize,
    m_values: Vec<f64>,
}

impl Basis {
    pub fn new(n: usize) -> Self {
        let j = n as f64 / 2.0;
        // Half-integers are exact in binary floating point.
        let m_values = (0..=n).map(|k| j - k as f64).collect();
        Self { n, m_values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> f64 {
        self.n as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// m = N/2, N/2 − 1, …, −N/2.
    pub fn m_values(&self) -> &[f64] {
        &self.m_values
    }

    pub fn m(&self, index: usize) -> f64 {
        self.m_values[index]
    }

    /// Basis index of |m⟩.
    pub fn index_of(&self, m: f64) -> Option<usize> {
        let k = self.j() - m;
        (k >= 0.0 && k.fract() == 0.0 && (k as usize) <= self.n).then_some(k as usize)
    }
}

/// ⟨m+1|J₊|m⟩
pub fn ladder_coefficient(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

pub fn build_jz(basis: &Basis) -> OperatorMatrix {
    OperatorMatrix::with_role_unchecked(
        CMatrix::from_real_diagonal(basis.m_values()),
        Role::Hermitian,
    )
}

pub fn build_jz_squared(basis: &Basis) -> OperatorMatrix {
    let sq: Vec<f64> = basis.m_values().iter().map(|m| m * m).collect();
    OperatorMatrix::with_role_unchecked(CMatrix::from_real_diagonal(&sq), Role::Hermitian)
}

/// J₊ with positive ladder coefficients; index k holds m = j − k, so J₊ maps
/// column k to row k − 1.
pub fn build_jplus(basis: &Basis) -> OperatorMatrix {
    let j = basis.j();
    let mut a = CMatrix::zeros(basis.dim());
    for k in 1..basis.dim() {
        a[(k - 1, k)] = Complex64::new(ladder_coefficient(j, basis.m(k)), 0.0);
    }
    OperatorMatrix::general(a)
}

pub fn build_jminus(basis: &Basis) -> OperatorMatrix {
    OperatorMatrix::general(build_jplus(basis).entries().adjoint())
}

/// Jx = (J₊ + J₋)/2
pub fn build_jx(basis: &Basis) -> OperatorMatrix {
    let jp = build_jplus(basis);
    let sum = jp.entries() + &jp.entries().adjoint();
    OperatorMatrix::with_role_unchecked(sum.scale_real(0.5), Role::Hermitian)
}

/// Jy = (J₊ − J₋)/(2i)
pub fn build_jy(basis: &Basis) -> OperatorMatrix {
    let jp = build_jplus(basis);
    let diff = jp.entries() - &jp.entries().adjoint();
    OperatorMatrix::with_role_unchecked(diff.scale(Complex64::new(0.0, -0.5)), Role::Hermitian)
}

/// The static part v·Jx + g·Jz² for a given interaction strength g.
pub fn static_hamiltonian(basis: &Basis, v: f64, g: f64) -> OperatorMatrix {
    let j = basis.j();
    let dim = basis.dim();
    let mut a = CMatrix::zeros(dim);
    for k in 0..dim {
        let m = basis.m(k);
        a[(k, k)] = Complex64::new(g * m * m, 0.0);
        if k + 1 < dim {
            // ⟨m|Jx|m−1⟩ = ½√(j(j+1) − m(m−1))
            let x = 0.5 * v * ladder_coefficient(j, basis.m(k + 1));
            a[(k, k + 1)] = Complex64::new(x, 0.0);
            a[(k + 1, k)] = Complex64::new(x, 0.0);
        }
    }
    OperatorMatrix::with_role_unchecked(a, Role::Hermitian)
}

/// H(t) = v·Jx + (g0 + g1 cos ωt)·Jz², tridiagonal in |m⟩.
pub fn hamiltonian_at(params: &ModelParams, t: f64) -> OperatorMatrix {
    static_hamiltonian(&params.basis(), params.v, params.interaction_at(t))
}

/// Left/right mode exchange, P|m⟩ = |−m⟩.
pub fn build_parity(basis: &Basis) -> OperatorMatrix {
    let dim = basis.dim();
    let p = CMatrix::from_fn(dim, |r, c| if r + c == dim - 1 { ONE } else { ZERO });
    OperatorMatrix::with_role_unchecked(p, Role::Unitary)
}
