//! Greedy reduced-basis construction in finite-dimensional ℓp spaces.
//!
//! The crate provides the natural greedy algorithm (NGA), which replaces the
//! best-approximation problems of the orthogonal greedy algorithm (OGA) by
//! one-dimensional norming-functional projections, together with the OGA,
//! the empirical interpolation method (EIM) and proper orthogonal
//! decomposition (POD) for comparison. Around the constructors sit
//! best-approximation solvers for every `p`, operator-norm estimation,
//! parametric test families and an experiment harness that writes CSV and
//! SVG reports.
//!
//! ```
//! use greedy_rb::{algorithms, families, SpaceSpec};
//!
//! let ts = families::gen_random_set(7, 50, 5, 40, SpaceSpec::l1()).unwrap();
//! let cfg = algorithms::GreedyConfig { max_iterations: 10, ..Default::default() };
//! let (basis, _trace) = algorithms::run_nga(&ts, &cfg).unwrap();
//! assert_eq!(basis.len(), 5);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algorithms;
pub mod cputime;
pub mod distsolver;
pub mod error;
pub mod experiments;
pub mod families;
pub mod projector;
pub mod rng;
pub mod snapshot_io;
pub mod space;
pub mod theory;

pub use algorithms::{GreedyConfig, Trace, TrainingSet};
pub use error::{Error, Result};
pub use projector::{BasisKind, ReducedBasis, ResidualCache};
pub use space::{SpaceSpec, Vector};
