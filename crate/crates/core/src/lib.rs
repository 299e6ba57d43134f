//! Geodesic geometry of the homogeneous 3-manifolds `M3(kappa, tau)`:
//! Jacobi fields in closed form, osculating-rank analysis of the
//! Jacobi-operator curve, and the conjugate points and conjugate locus of
//! every geodesic, built on a small naturally-reductive-algebra toolkit.
//!
//! Module map, bottom up:
//!
//! * [`opspace`] — symmetric/skew operator wrappers, matrix exponential,
//!   conjugation and commutator actions, numerical rank.
//! * [`reductive`] — reductive metric algebras `g = m (+) k` from sparse
//!   bracket data: natural-reductivity check, torsion and curvature
//!   operators, Jacobi operator, bi-invariant extensions, JSON ingestion.
//! * [`m3`] — the two-parameter family itself: parameter validation, the
//!   `theta`-dependent invariants, scalar invariants, explicit operator
//!   matrices along a direction, the model algebra.
//! * [`osculating`] — the curve `t -> exp(t S) R exp(-t S)` traced by the
//!   Jacobi operator along a geodesic, its derivative span (osculating
//!   rank) and the circle it draws in operator space.
//! * [`jacobi`] — closed-form solutions of the Jacobi initial value problem
//!   with `X(0) = 0` on all parameter branches, solution bases, isotropy of
//!   solutions, and an independent Runge-Kutta integrator for any
//!   naturally reductive algebra.
//! * [`conjugate`] — conjugate points with kinds and multiplicities,
//!   conjugate radius (per direction and global), geodesic classification,
//!   sampled conjugate-locus surfaces with OBJ/CSV export.
//! * [`verify`] — the self-verification suite run by the `verify` CLI
//!   command and the acceptance test.
//! * [`report`] — deterministic JSON rendering used by the CLI.

pub mod conjugate;
pub mod error;
pub mod jacobi;
pub mod m3;
pub mod opspace;
pub mod osculating;
pub mod reductive;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
