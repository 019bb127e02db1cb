//! ADHM data for the Hilbert scheme of points on the total space of
//! `O(-n)` over the projective line.
//!
//! The crate validates data tuples `(A1, A2; C_1..C_n; e)`, moves between global
//! data and the `c + 1` chart coordinates, applies the gauge actions and
//! transition functions, decides orbit equality, and computes Hilbert–Chow
//! support data.

pub mod error;
pub mod forms;
pub mod geometry;
pub mod hirz;
pub mod linalg;
pub mod plane;
pub mod report;
pub mod sigma;
pub mod suite;
pub mod tolerance;
pub mod wire;

pub use error::{AdhmError, Result};
pub use forms::{binary_form_roots, BinaryForm, ProjPoint};
pub use geometry::{SupportMultiset, TotPoint, YTildePoint};
pub use hirz::{ChartCoords, HirzADHM};
pub use linalg::{ComplexMatrix, C64};
pub use plane::PlaneADHM;
pub use report::{Check, ValidationReport, Verdict};
pub use sigma::{angle_pair, sigma_matrix, AnglePair, SigmaMatrix};
pub use tolerance::ToleranceConfig;
