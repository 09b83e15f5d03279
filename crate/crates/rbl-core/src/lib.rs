//! Rigid body localization from range-only measurements.
//!
//! A small collection of sensors is mounted on a rigid body with a known
//! layout (the *topology*). Given noisy range measurements between every
//! sensor and a set of anchors at known positions, this crate jointly
//! estimates the body's orientation (a 3×3 rotation matrix `Q`) and its
//! position (a translation vector `t`), so that the absolute sensor
//! positions are `S = Q C + t 1ᵀ`.
//!
//! The crate provides:
//!
//! - [`geometry`] — rotation-matrix primitives: the skew-symmetric
//!   parametrization, its exponential map, nearest-orthogonal projection,
//!   and the rigid body transform.
//! - [`measurement`] — the squared-range measurement model with
//!   distance-dependent noise, pre-whitening, and the projected linear
//!   models consumed by all estimators.
//! - [`estimators`] — five pose estimators (unconstrained LS, SUC-LS,
//!   OUC-LS, SUC-TLS, OUC-TLS), classical per-sensor localization, and
//!   topology-aware localization. The unitarily constrained estimators
//!   solve orthogonal Procrustes problems, either in closed form (SVD) or
//!   iteratively with Newton steps on the rotation manifold.
//! - [`crb`] — the Fisher information matrix and the unitarily constrained
//!   Cramér-Rao bound used as a benchmark, plus its transformation to
//!   sensor-position bounds.
//! - [`montecarlo`] — a deterministic, seedable Monte-Carlo engine that
//!   sweeps the reference range and reports RMSE/MAE/bias metrics per
//!   estimator together with the bound.
//!
//! All matrices use `nalgebra` with `f64` entries; topologies and anchor
//! sets are column-per-node (3×N and 3×M respectively).

pub mod crb;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod measurement;
pub mod montecarlo;

pub use error::Error;
pub use geometry::{EulerOrder, Pose, RotationMatrix};
pub use measurement::{CenteredModel, RangeData, Scenario, WhitenedModel};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
