//! Entropy production of qubit erasure with finite-size thermal baths.
//!
//! Baths are stored as compressed spectra (energy levels with exact integer
//! degeneracies), so `n`-qubit environments with `2^n` microstates are
//! handled in `O(n)` memory. On top of that sit:
//!
//! * [`thermo`]: Gibbs states, entropies, divergences, heat capacity and the
//!   energy-matched inverse temperature,
//! * [`spectra`]: the non-interacting, engineered-interacting and critical
//!   degenerate bath families,
//! * [`engine`]: permutation (max-cooling) protocols on the compressed joint
//!   state and the full set of process functionals,
//! * [`bounds`]: analytic lower and upper bounds on entropy production,
//! * [`collisional`]: sequential full-swap protocols with product baths,
//! * [`optimizer`]: simulated annealing over bath spectra,
//! * [`experiments`]: sweep drivers producing the figure and table data.

pub mod bounds;
pub mod collisional;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod optimizer;
pub mod spectra;
pub mod spectrum;
pub mod thermo;

pub use engine::{max_cool, ChunkedJoint, Policy, ProcessOutcome};
pub use error::{Error, Result};
pub use numerics::Dd;
pub use spectrum::{Level, Spectrum, SpectrumDocument};
pub use thermo::{BetaStarResult, Chunk, LevelDistribution, SystemDiag};
