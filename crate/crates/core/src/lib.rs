//! Numerical laboratory for singular-hyperbolic attracting sets.
//!
//! The crate builds the example flows of the geometric-Lorenz family
//! (classical Lorenz, geometric models, glued Morse–Smale suspensions,
//! the sharp `s = 2·s_L` constructions and their chained variants),
//! estimates how many ergodic physical measures each one carries by
//! clustering Birkhoff averages over a seed grid, classifies equilibria as
//! Lorenz-like or not, and checks the bound `s ≤ 2·s_L` empirically.
//!
//! Top-level layout:
//! * [`field`] — analytic vector fields with Jacobians, bump partitions, blends
//! * [`integrate`] — adaptive Dormand–Prince 5(4) with events and tangents
//! * [`equilibria`] — root finding and Lorenz-like classification
//! * [`map1d`] / [`ulam`] — piecewise expanding interval maps and the Ulam oracle
//! * [`section`] — section-graph geometric models and return maps
//! * [`zoo`] — the model zoo with expected censuses and region checks
//! * [`census`] — Birkhoff-average clustering and measure diagnostics
//! * [`config`] / [`report`] — experiment configuration and report emission

pub mod geom;
pub mod region;

pub mod field;
pub mod integrate;
pub mod equilibria;
pub mod map1d;
pub mod section;
pub mod zoo;
pub mod census;
pub mod ulam;

pub use field::{Field3, VectorField};
pub use geom::{Mat3, Vec3};
pub use region::{Box3, Region};
