//! Hybrid quantum-classical Maxcut clustering toolkit.
//!
//! The crate reproduces, classically and at desk scale, a clustering
//! pipeline built around the Quantum Approximate Optimization Algorithm:
//!
//! 1. [`graph`] — weighted Maxcut instances, exact enumeration, and the
//!    19-qubit hardware coupling graph the harness targets by default.
//! 2. [`sim`] — dense statevector simulation of QAOA circuits with
//!    seeded shot sampling and an optional readout/depolarizing noise model.
//! 3. [`compile`] — lowering of cost layers to two-qubit gate programs,
//!    greedy edge-coloring into parallel rounds, and a textual gate format.
//! 4. [`stats`] — cost-sample statistics and exact order-statistic
//!    distributions used as optimization objectives.
//! 5. [`bayesopt`] — Gaussian-process Bayesian optimization (Matérn-5/2,
//!    UCB acquisition) over the QAOA angle torus.
//! 6. [`cluster`] — datasets, distance/overlap graph construction, and
//!    Maxcut biclustering.
//! 7. [`solver`] / [`harness`] — single-instance solves and reproducible
//!    multi-run experiments with trace/eCDF/KS reporting.
//!
//! [`dense`] holds slow, obviously-correct dense-matrix reference
//! constructions; they exist for the verification suite and stay
//! independent of the fast paths they check.
//!
//! With the default `parallel` feature, data-parallel kernels run on rayon;
//! disabling it yields a fully sequential build with identical results.

pub mod bayesopt;
pub mod cluster;
pub mod compile;
pub mod dense;
pub mod error;
pub mod graph;
pub mod harness;
mod par;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
