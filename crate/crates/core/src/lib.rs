//! Simulation and analysis of temporal and spatial point processes.
//!
//! - [`temporal`]: homogeneous and non-homogeneous Poisson processes and the
//!   Hawkes process, with thinning simulators.
//! - [`spatial`]: complete spatial randomness, kernel density surfaces,
//!   quadrat tests, nearest-neighbour statistics, Ripley's K and Monte Carlo
//!   envelopes.
//! - [`cluster`]: grid aggregation, RSS, Getis-Ord Gi* hotspots and the
//!   space-time scan statistic.

pub mod cluster;
pub mod error;
pub mod io;
pub mod rng;
pub mod spatial;
pub mod stats;
pub mod temporal;
pub mod types;

pub use error::{Error, Result};
pub use rng::{exponential_draw, RngStream};
pub use types::{
    inter_arrival_times, CountGrid, EventTimes, GridSpec, Point, Region, SpaceTimeEvent,
    SpaceTimeEvents, SpatialPattern,
};
