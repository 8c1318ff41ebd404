//! Numerical foundation: dense complex matrices, Hermitian eigensolver,
//! special functions, quadrature and reproducible random streams.

pub mod eigen;
pub mod matrix;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;

pub use eigen::{hermitian_eigendecomposition, psd_eigendecomposition, psd_sqrt, HermitianEig};
pub use matrix::ComplexMatrix;
pub use quadrature::{ChebyshevInterpolant, GaussLegendre};
pub use rng::{sample_cn_vector, RngStream, StreamRng};
pub use special::{craig_average, gaussian_q, log_gamma};
pub use stats::MeanVar;
