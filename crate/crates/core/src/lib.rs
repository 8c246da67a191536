//! Phase-space index distances for anisotropic frame systems, the localized
//! matrix algebras they induce, and numerical checks of inverse-closedness.

pub mod eigen;
pub mod error;
pub mod grid;
pub mod locmat;
pub mod matrix;
pub mod molecule;
pub mod phase;
pub mod scalar;
pub mod schur;

pub use error::{Error, Result};
pub use grid::{CurveletGridSpec, GridIndex, GridKind, GridSpec, IndexGrid, SeparationReport, ShearletGridSpec};
pub use locmat::{AlgebraConstants, BnNormResult, LocalizedMatrix, SpectralData, SpectralGap};
pub use matrix::DenseMatrix;
pub use molecule::{FrequencyLattice, GapSpec, MoleculeOrder, MoleculeProfile, MoleculeSystem};
pub use phase::{Alpha, AlphaDistance, PhaseBox, PhasePoint};
pub use scalar::Real;
pub use schur::{SchurReport, WeightFamily};

pub type Point = PhasePoint<f64>;
pub type Grid = IndexGrid<f64>;
pub type Dense = DenseMatrix<f64>;
pub type Matrix = LocalizedMatrix<f64>;
