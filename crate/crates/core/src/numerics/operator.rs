use num_complex::Complex64;

use super::matrix::CMatrix;
use crate::error::{CdtError, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Hermitian,
    Unitary,
    General,
}

/// A dense operator together with the algebraic role it is known to play.
///
/// The role is checked when the operator is built through [`OperatorMatrix::hermitian`]
/// or [`OperatorMatrix::unitary`]; `General` carries no promise.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMatrix,
    role: Role,
}

impl OperatorMatrix {
    /// Tags `entries` as Hermitian. The tolerance scales with the largest entry so
    /// that large-valued Hamiltonians are judged by relative rounding.
    pub fn hermitian(entries: CMatrix) -> Result<Self> {
        let deviation = entries.hermiticity_error();
        if deviation > HERMITIAN_TOL * entries.max_abs().max(1.0) {
            return Err(CdtError::WrongRole {
                expected: "hermitian",
                deviation,
            });
        }
        Ok(Self {
            entries,
            role: Role::Hermitian,
        })
    }

    pub fn unitary(entries: CMatrix) -> Result<Self> {
        let deviation = entries.unitarity_error();
        if deviation > UNITARY_TOL {
            return Err(CdtError::WrongRole {
                expected: "unitary",
                deviation,
            });
        }
        Ok(Self {
            entries,
            role: Role::Unitary,
        })
    }

    pub fn general(entries: CMatrix) -> Self {
        Self {
            entries,
            role: Role::General,
        }
    }

    /// Skips the role check. Only for matrices that hold the role by construction.
    pub(crate) fn with_role_unchecked(entries: CMatrix, role: Role) -> Self {
        Self { entries, role }
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }
}

impl std::ops::Index<(usize, usize)> for OperatorMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.entries[idx]
    }
}
