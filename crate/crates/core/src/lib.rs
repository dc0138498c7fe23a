//! Exact computations with lattices over `Z_(p)`: lower and upper middles of
//! lattice pairs, almost self-dual lattices for `ε`-symmetric forms, Springer
//! residues of quadratic forms, and semisimplification of modular group
//! representations equipped with compatible forms.
//!
//! `K = Q` carries the `p`-adic valuation, `R = Z_(p)`, the uniformizer is `p`
//! and the residue field is `F_p`. Everything is computed with exact
//! rationals or exact residues.

pub mod dvr;
pub mod error;
pub mod forms;
pub mod isoforms;
pub mod fixtures;
pub mod fp;
pub mod lattices;
pub mod modrep;
pub mod oracle;
pub mod pipeline;
pub mod problem;
pub mod qmat;
pub mod random;
pub mod suite;
pub mod witt;

pub use dvr::{int_middles, residue, valuation, Rat, ResScalar, ValConfig, Valuation};
pub use error::{Error, Result};
pub use lattices::{Lattice, SplittingCert, TorsionModule};
pub use qmat::QMat;
