//! Massive Laplacian on isoradial graphs.

pub mod asymptotics;
pub mod elliptic;
pub mod expfun;
pub mod forest;
pub mod green;
pub mod isograph;
pub mod laplacian;
pub mod par;
pub mod quad;
pub mod spectral;
pub mod zinv;
