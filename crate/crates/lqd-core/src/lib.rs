//! Linear-quadratic models of sub-Riemannian geodesic flows: Young diagrams,
//! Riccati comparison and distortion coefficients.

pub mod campaign;
pub mod closed_forms;
pub mod comparison;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod lq;
pub mod riccati;
pub mod sampling;
pub mod tolerances;
pub mod young;

pub use error::{LqdError, Result};
pub use linalg::Mat;
pub use young::YoungDiagram;
