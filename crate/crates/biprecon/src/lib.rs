//! Bi-parametric operator preconditioning laboratory.
pub mod bounds;
pub mod config;
pub mod densela;
pub mod fov;
pub mod json;
pub mod krylov;
pub mod opprec;
pub mod perturb;
pub mod problems;
pub mod rng;
pub mod spaces;
