//! Hessenberg reduction of unitary plus low-rank matrices kept in factored
//! form as products of Givens rotation chains.
//!
//! The pipeline runs in three parts: [`lfr`] builds a factored
//! representation `L (I + [I_k; 0] Z^H) R` from a diagonal, block CMV or
//! block Hessenberg input, [`hessred`] embeds it into a larger matrix and
//! reduces that to upper Hessenberg form in `O(n^2 k)` rotation operations,
//! and [`densela`] supplies the dense kernels the tests compare against.

pub mod cli;
pub mod cmv;
pub mod densela;
pub mod hessred;
pub mod lfr;
pub mod rotations;

pub use densela::{DenseMatrix, C64};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("matrix is rank deficient (smallest singular value {0:.3e})")]
    RankDeficient(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not in block CMV form: {0}")]
    NotCmv(String),
    #[error("matrix is not block upper Hessenberg: {0}")]
    NotBlockHessenberg(String),
    #[error("matrix is not upper Hessenberg")]
    NotHessenberg,
    #[error("matrix is not {0}-Hessenberg within tolerance")]
    NotKHessenberg(usize),
    #[error("rotation at row {row} cannot pass a chain covering {start}..={end}")]
    StructureBroken { row: usize, start: usize, end: usize },
    #[error("left factor lost properness (smallest band sine {0:.3e})")]
    PropernessLost(f64),
    #[error("QR iteration did not converge")]
    NoConvergence,
    #[error("{0}")]
    Numerical(String),
}
