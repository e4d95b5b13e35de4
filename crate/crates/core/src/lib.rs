//! Numerical laboratory for ill-posed inverse problems.
//!
//! Spectral regularization (truncated SVD, Tikhonov, Landweber), nonlinear
//! conjugate gradients with Armijo backtracking, and four worked problems:
//! a two-parameter tank model, backward heat conduction on `(0, π)`, inverse
//! Born and Rytov series for radial diffuse optical tomography, and
//! Tikhonov-filtered back projection for X-ray CT.

// `!(x > 0.0)` guards are written that way so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod born;
pub mod heat1d;
pub mod optim;
pub mod radon;
pub mod specfun;
pub mod spectral;
pub mod tank;
