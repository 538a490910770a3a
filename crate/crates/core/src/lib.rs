//! Local domain boundary element solver for the two-dimensional
//! time-fractional Fisher-KPP diffusion-reaction equation
//!
//! ```text
//! ∇²φ = (1/ρ) (∂^{α,β}φ/∂t^{α,β} − φ (c − d φ^b) − f)
//! ```
//!
//! The domain is split into conformal quadrilateral subdomains. Each
//! subdomain carries linear discontinuous boundary elements on its four
//! edges and one linear discontinuous cell for the volume terms. Interior
//! cell unknowns are condensed out per subdomain and the boundary unknowns
//! are coupled through a sparse global system.
//!
//! Module map:
//! - [`mesh`]: quadrilateral subdomain meshes, generators, file format, topology
//! - [`frac_time`]: discrete Caputo and fractal-fractional time derivatives
//! - [`kernels`]: fundamental solutions, shape functions and quadrature
//! - [`subdomain`]: geometry-static per-subdomain boundary/volume blocks
//! - [`condense`]: static condensation of cell unknowns per lagging iterate
//! - [`global`]: degree-of-freedom map, sparse assembly and solve
//! - [`driver`]: time marching with lagging iterations and error metrics
//! - [`reference`]: special functions and the benchmark problem registry
//! - [`cli`]: run configuration, output files and the verification suites

pub mod cli;
pub mod condense;
pub mod driver;
pub mod error;
pub mod frac_time;
pub mod global;
pub mod kernels;
pub mod mesh;
pub mod quadrature;
pub mod reference;
pub mod subdomain;
pub mod verify;

pub use error::{Error, Result};
pub use mesh::{Mesh, Point2};
