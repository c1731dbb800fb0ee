//! Placement and link analysis for waveguide-fed pinching-antenna arrays
//! serving a single short-packet user.
//!
//! A dielectric waveguide runs along the x-axis at a fixed height; pinching
//! antennas are small couplers placed along it, radiating the same fed signal
//! with a phase set by their position (propagation inside the guide plus the
//! free-space path to the user). This crate computes:
//!
//! - the achievable rate of the link under a finite-blocklength normal
//!   approximation and the SNR thresholds implied by a reliability target
//!   ([`finite_blocklength`]);
//! - channel coefficients, SNR, and the coherent upper bound for a given
//!   antenna layout ([`geometry`]);
//! - antenna positions that maximize the received SNR subject to a minimum
//!   spacing, via a closed form plus a per-antenna phase-alignment refinement
//!   ([`placement`]);
//! - Monte-Carlo sweeps of mean rate and outage over random user positions,
//!   deterministic for a fixed seed regardless of thread count ([`sim`]).
//!
//! Rates are handled in nats per channel use internally; binary units appear
//! only at reporting boundaries.

pub mod error;
pub mod finite_blocklength;
pub mod geometry;
pub mod placement;
pub mod sim;

pub use error::{CoreError, Result};
pub use finite_blocklength::{
    achievable_rate, bessel_polynomial, generalized_lambert_w, inverse_q, q_function,
    qos_snr_threshold, rate_derivative, stationary_snr, thresholds_from_tau, LambertMethod,
    QosThresholds, UrllcParams, LN_2,
};
pub use geometry::{
    aligned_snr, channel_coefficients, free_space_distance, snr, total_phase, wrap_phase,
    AntennaLayout, ChannelRealization, SystemParams, UserPosition, SPACING_SLACK,
};
pub use placement::{
    closed_form_layout, feasibility, fine_tune, solve_phase_root, Feasibility, PlacementResult,
    DEFAULT_PHASE_TOL, DENSE_SCAN_SAMPLES, POSITION_TOL,
};
pub use sim::{
    dbm_to_watts, evaluate_conventional, evaluate_pinching, run_sweep, run_sweep_detailed,
    sample_user, trial_rng, SimulationConfig, Sweep, SweepResult, TrialRecord,
};
