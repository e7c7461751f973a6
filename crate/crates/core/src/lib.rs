//! Exact local formulas for Ehrhart coefficients of lattice polytopes, built
//! from fundamental domains and the regions of rational cones.
//!
//! All arithmetic is exact over the rationals. Geometry is expressed in
//! lattice coordinates (the lattice is Zⁿ) with an arbitrary positive
//! definite Gram matrix; [`io`] converts problems given in another basis.

pub mod complex;
pub mod cone;
pub mod domains;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mu;
pub mod polytope;
pub mod region;
pub mod svg;
pub mod verify;

pub use complex::{verify_strict_tiling, BBox, Constraint, Frame, HCell, HComplex, Hyperplane, TilingVerdict};
pub use cone::Cone;
pub use domains::{DomainKind, DomainPolicy, FundamentalDomain};
pub use error::{Error, Result};
pub use linalg::{GeometryContext, RatMat, RatVec, Rational};
pub use mu::{LocalFormulaReport, MuEngine, MuTable};
pub use polytope::Polytope;
pub use region::{Region, RegionBuilder};
