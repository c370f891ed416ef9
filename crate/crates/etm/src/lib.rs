//! Coupled model of daily electricity log-prices and temperatures.
//!
//! The log-price is an Ornstein–Uhlenbeck process driven by a centered NIG Lévy noise
//! plus a share `λ` of the Brownian motion driving temperature. The crate covers
//! estimation from daily series, transform and closed-form pricing of energy and
//! weather-energy quanto contracts, minimum-variance static hedges, and a Monte Carlo
//! engine used as an oracle for all of them.

pub mod charfns;
pub mod error;
pub mod estimate;
pub mod fourier;
pub mod hedging;
pub mod io;
pub mod model;
pub mod nig;
pub mod optim;
pub mod pricing;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod validation;

pub use charfns::{CfContext, CfRule};
pub use error::{EtmError, Result};
pub use model::{EtmParams, Kernels, SeasonalityT, SeasonalityX};
pub use nig::NigParams;
pub use simulate::{McEngine, McReport, PathState};
