//! Dense complex linear algebra and the special functions the model needs.

pub mod bessel;
pub mod eigen;
pub mod matrix;
pub mod operator;

pub use bessel::{bessel_j0, j0_root};
pub use eigen::{eig_unitary, eigh, exp_hermitian, EigenDecomposition, DEGENERACY_TOL};
pub use matrix::CMatrix;
pub use operator::{OperatorMatrix, Role};
