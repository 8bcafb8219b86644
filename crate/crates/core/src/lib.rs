//! Simulation library for massive MIMO with densely spaced transmit antennas.
//!
//! The library models point-to-point MIMO links between idealized uniform
//! linear arrays, works in the angular (beamspace) domain via the DFT basis of
//! steering vectors, and computes two families of rates analytically from
//! sampled multipath channels:
//!
//! - the constrained Gaussian capacity (log-det with a fixed input covariance),
//! - the LMMSE-SIC achievable-rate lower bound for precoded QPSK / 16-QAM,
//!   obtained by summing per-stream scalar mutual informations at the
//!   per-stream SINRs.
//!
//! Noise is never sampled; all rates follow from the channel matrix, the input
//! covariance, and the normalized SNR. Ergodic experiments (the `sweep`,
//! `theorem`, and `pattern` CLI subcommands) average over seeded Rayleigh
//! multipath draws and are fully deterministic given their configuration.

pub mod array;
pub mod capacity;
pub mod channel;
pub mod covariance;
pub mod error;
pub mod experiment;
pub mod mi;
pub mod quad;
pub mod serialize;
pub mod sic;

pub use array::ArrayConfig;
pub use capacity::{gaussian_capacity, snr_normalize, RateValue};
pub use channel::{
    angular_channel, factorization_check, max_singular_value_diag, physical_channel,
    sample_rayleigh_paths, truncate_effective, AngularChannel, Path, PathSet,
};
pub use covariance::{
    critical_sigma, dense_sigma, extend, hermitian_sqrt, q_from_sigma, CovarianceSpec,
};
pub use error::{Error, Result};
pub use experiment::{run_sweep, run_theorem_study, ExperimentConfig, RatePoint, Scheme};
pub use mi::{mi_constellation, mi_gaussian, qpsk_mi, sic_rate_sum, Constellation};
pub use sic::{effective_channel, multiuser_efficiency, sinr_profile, EffectiveChannel, SinrProfile};

/// Complex scalar used throughout.
pub type Cplx = nalgebra::Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<Cplx>;
/// Dynamically sized complex vector.
pub type CVector = nalgebra::DVector<Cplx>;
