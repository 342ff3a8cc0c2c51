//! Performance analysis of a two-user NOMA integrated sensing and
//! communication (ISAC) downlink, compared against the frequency-division
//! (FDSAC) baseline.
//!
//! The crate is split by concern:
//!
//! * [`config`]: validated system parameters and shared value types.
//! * [`specfun`]: exponential integral and log-determinant kernels.
//! * [`channel`]: ordered Rayleigh gains, sampling, and scene-built
//!   sensing correlation matrices.
//! * [`analytic`]: closed-form outage, ergodic and sensing rates plus their
//!   high-SNR asymptotes.
//! * [`montecarlo`]: simulation estimators used as independent oracles.
//! * [`region`]: sensing/communication rate regions and containment checks.
//! * [`checks`]: the end-to-end validation battery shared by the CLI
//!   `selftest` command and the acceptance test suite.

pub mod analytic;
pub mod channel;
pub mod checks;
pub mod config;
mod error;
pub mod montecarlo;
pub mod region;
pub mod specfun;

pub use config::{db_to_linear, validate_config, Mode, RateTriple, ResourceSplit, SystemConfig};
pub use error::{Error, Result};
