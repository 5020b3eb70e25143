//! Entropy estimation for free semigroup actions.
//!
//! A system is a finite family of self-maps of a compact metric space,
//! composed along words over `{1, .., m}`. The crate estimates the
//! correlation entropies, topological entropy and local entropies of such
//! systems by Monte Carlo, and evaluates them in closed form for the
//! shift-and-odometer system on `{0,1}^N`.
//!
//! * [`symbolic`]: words, Bernoulli measures, power-system encodings, seeded streams
//! * [`dynamics`]: the system trait, orbits, Bowen distances, built-in systems
//! * [`exact_binary`]: the closed-form shift/odometer backend
//! * [`estimators`]: correlation sums and integrals, separated sets, doubling ratios
//! * [`limits`]: limits in `k` and trends in `eps`
//! * [`cli_io`]: experiment configs, the runner and CSV/JSON output

pub mod cli_io;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod exact_binary;
pub mod limits;
pub mod symbolic;

pub use dynamics::{GeneratorSystem, PowerSystem};
pub use error::{Error, Result};
pub use estimators::{EntropySeries, SeriesRow};
pub use exact_binary::{BinaryPoint, BinaryShiftOdometer};
pub use limits::{LimitEstimate, LimitMethod};
pub use symbolic::{BernoulliSpec, Streams, SymbolWord};
