//! Numerical core for a one-phase Hele-Shaw free-boundary laboratory.
//!
//! The library simulates a fluid layer `-H < x_n < gamma(x', t)` driven by a
//! bottom influx `a(t)`: the pressure is harmonic in the layer, vanishes on
//! the free interface, and the interface advances with normal speed equal to
//! the normal pressure gradient.  Around a planar front the interface is a
//! graph, and the deviation from the planar reference divided by the
//! flatness parameter `eps` (the hodograph transform of the solution) obeys,
//! to leading order, a fractional heat equation of order one half whose
//! finite-depth multiplier is `-k tanh(kL)`.
//!
//! Modules:
//! - [`grid`], [`mval`], [`metric`], [`seminorm`]: sample lattices,
//!   multi-valued interval samples, the boundary-joining parabolic metric,
//!   and truncated Holder seminorms built on it.
//! - [`fft`], [`schedule`], [`spectral`]: radix-2 FFT, piecewise-constant
//!   influx schedules, and the spectral half-Laplacian / half-heat /
//!   Dirichlet-to-Neumann operators.
//! - [`elliptic`], [`front`]: the mapped-strip pressure solver (conservative
//!   second-order, symmetric positive definite, preconditioned CG) and the
//!   explicit front stepper with its dispersion oracle.
//! - [`hodograph`]: boundary traces and interior hodograph fields of a
//!   simulated solution, and the nonlinear boundary speed relation.
//! - [`analysis`], [`interp`]: linearization gap, oscillation decay across
//!   dyadic parabolic cylinders, the Holder bootstrap ladder, gradient
//!   seminorms, discrete interpolation lemmas, and the memory-kernel
//!   barrier ODE.
//! - [`convolution`]: parabolic sup/inf convolutions of boundary traces and
//!   the regularization battery that certifies their structural properties.
//! - [`deform`]: radial comparison barriers, inversion (Kelvin-type) and
//!   shear deformations of near-planar profiles, and their hodograph-level
//!   verification sweeps.
//! - [`extension`]: harmonic-extension cross-check of the spectral
//!   half-Laplacian against a real-space finite-difference solve.
//!
//! The crate is `no_std` + `alloc`: every routine is deterministic pure
//! computation over `f64` slices, with fixed-order reductions so results are
//! bit-reproducible.  IO, experiment orchestration, and file formats live in
//! the companion `heleshaw-lab` crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod convolution;
pub mod deform;
pub mod elliptic;
pub mod error;
pub mod extension;
pub mod fft;
pub mod front;
pub mod grid;
pub mod hodograph;
pub mod interp;
pub mod metric;
pub mod mval;
pub mod schedule;
pub mod seminorm;
pub mod spectral;
