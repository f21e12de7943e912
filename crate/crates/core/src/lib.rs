//! # spanpower
//!
//! Minimum-system-power channel assignment and power allocation for a
//! point-to-point wireless link whose endpoints carry several radio front
//! ends and can transmit on non-contiguous channels.
//!
//! System power is transmit power (through the amplifier factor `k_pa`) plus
//! circuit power: a fixed analog cost per active front end and a converter
//! cost proportional to each front end's spectrum span. Using many front
//! ends multiplies the fixed cost; covering scattered channels with one
//! front end stretches its span and multiplies the converter cost. The
//! solvers here trade those off against transmit power under a rate demand:
//!
//! - [`greedy::greedy_solve`] adds one (channel, front end) pair at a time
//!   and finishes with an optimal water-filling reallocation;
//! - [`oracle::exact_bruteforce`] and [`oracle::exact_gapcut`] compute
//!   exhaustive optima, for verification at small sizes;
//! - [`baselines::mcmr_solve`] and [`baselines::ncofdm_solve`] are the
//!   comparison strategies, minimizing transmit power alone.
//!
//! Core math is generic over the scalar type (`f32` or `f64`) via
//! [`scalar::Scalar`]; the crate-root aliases pin `f64`, which the scenario
//! layer and CLI use.
//!
//! ```
//! use spanpower::model::{Channel, ChannelGrid, RadioParams};
//! use spanpower::greedy::greedy_solve;
//!
//! let grid = ChannelGrid::new(
//!     vec![
//!         Channel { index: 23, center_freq_mhz: 527.0, gain: 4e-12 },
//!         Channel { index: 26, center_freq_mhz: 545.0, gain: 2e-11 },
//!         Channel { index: 28, center_freq_mhz: 557.0, gain: 1e-11 },
//!     ],
//!     6.0,
//! )?;
//! let params = RadioParams::default();
//! let (report, trace) = greedy_solve(&grid, &params, 40.0)?;
//! assert!(report.achieved_rate_mbps() >= 40.0 * (1.0 - 1e-9));
//! assert!(trace.iterations() <= grid.len());
//! # Ok::<(), spanpower::Error>(())
//! ```

pub mod baselines;
pub mod error;
pub mod greedy;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod scenario;
pub mod waterfill;

pub use error::{Error, Result};
pub use model::Algorithm;
pub use scalar::Scalar;

/// Solver-grade grid at the default `f64` precision.
pub type Grid = model::ChannelGrid<f64>;
/// Radio parameters at the default `f64` precision.
pub type Params = model::RadioParams<f64>;
/// Solution report at the default `f64` precision.
pub type Report = model::SolutionReport<f64>;

/// Run the named algorithm on a grid. Thin dispatch over the solver modules;
/// the greedy trace is dropped here, call [`greedy::greedy_solve`] directly
/// to keep it.
pub fn solve<T: Scalar>(
    algorithm: Algorithm,
    grid: &model::ChannelGrid<T>,
    params: &model::RadioParams<T>,
    demand_mbps: T,
) -> Result<model::SolutionReport<T>> {
    match algorithm {
        Algorithm::Greedy => greedy::greedy_solve(grid, params, demand_mbps).map(|(r, _)| r),
        Algorithm::McMr => baselines::mcmr_solve(grid, params, demand_mbps),
        Algorithm::NcOfdm => baselines::ncofdm_solve(grid, params, demand_mbps),
        Algorithm::Exact => oracle::exact_bruteforce(grid, params, demand_mbps),
        Algorithm::GapCut => oracle::exact_gapcut(grid, params, demand_mbps),
    }
}
