//! Approximate partial solutions of the Dirac equation for an electron in
//! electromagnetic space-time crystals built from six plane waves.

pub mod crystal;
pub mod dd;
pub mod error;
pub mod freespace;
pub mod lattice;
pub mod linalg;
pub mod observables;
pub mod real;
pub mod spectral;
pub mod spinor;
pub mod stencil;
pub mod validate;

pub use crystal::{estc1, estc2, intensity, CrystalConfig, DEFAULT_OMEGA};
pub use error::{Error, Result};
pub use freespace::{free_basis, q40, WaveFourVector};
pub use lattice::{solve, CouplingSign, FamilyKind, Normalization, Precision, SolutionFamily, SolverOptions};
pub use observables::{field_map, mean_values, FieldMap, MapGrid, ObservableSet};
pub use spectral::{find_lines, locate_minimum, scan, CurveSetup, LineLabel, MinimizeOptions, SpectralLine, SpectralPoint};
pub use spinor::{Bispinor, DiracBasis, DiracSet, Matrix4, C64};
pub use validate::{run_validation, ValidationOptions, ValidationReport};
