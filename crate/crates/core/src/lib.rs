//! Numerical laboratory for the multiscale linear transport equation
//!
//! ```text
//! ε ∂t f + v ∂x f = (1/ε) ( ½ ∫_{-1}^{1} f dv' − f ),   x_L < x < x_R,  −1 ≤ v ≤ 1.
//! ```
//!
//! Two discretizations are provided: the even/odd parity diffusive
//! relaxation scheme ([`ap`]), which is asymptotic-preserving as ε → 0, and the
//! explicit upwind scheme ([`explicit`]). Both can be time-stepped or written
//! as a single all-at-once space-time linear system ([`assembly`]) whose
//! singular values, condition number and sparsity ([`spectral`]) drive the
//! cost estimates of [`complexity`].

pub mod ap;
pub mod assembly;
pub mod complexity;
pub mod error;
pub mod explicit;
pub mod fourier;
mod linalg;
pub mod model;
pub mod mtx;
pub mod output;
pub mod quadrature;
pub mod spectral;
pub mod sparse;

pub use error::{Error, Result, Violation};
pub use model::{GridConfig, KineticField, ParityField, Scheme};
pub use quadrature::{gauss_rule, QuadratureRule};
pub use sparse::{CsrMatrix, Scalar};

pub use num_complex::Complex64;
