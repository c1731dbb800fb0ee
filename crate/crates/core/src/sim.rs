//! Monte Carlo trend studies: mean rate and outage over random user
//! positions, swept over transmit power, blocklength, service-area size, or
//! antenna count.
//!
//! Determinism is the central design constraint. Every trial derives its own
//! RNG from `(master_seed, sweep index, trial index)` by counter-based seed
//! packing, so trials are independent of execution order; results are
//! collected in trial order and reduced sequentially, making sweep output
//! byte-identical across runs and across thread counts. The per-trial seed
//! deliberately excludes the physical parameters, so runs that differ only in
//! antenna count see identical user draws and compare as paired samples.
//!
//! Each trial places the pinching array for one sampled user and records the
//! delivered finite-blocklength rate, and optionally the rate of a
//! conventional baseline: a fixed half-wavelength array at the feed point
//! with the same total power, whose phases follow from the same propagation
//! model. The baseline has no position or phase control, so its elements
//! combine with geometry-given phases; this is what makes the pinching gain
//! grow with the antenna count instead of canceling out of the comparison.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::finite_blocklength::{achievable_rate, qos_snr_threshold, UrllcParams, LN_2};
use crate::geometry::{
    channel_coefficients, snr, AntennaLayout, SystemParams, UserPosition,
};
use crate::placement::{feasibility, fine_tune, DEFAULT_PHASE_TOL};

/// Domain-separation tag mixed into every per-trial seed.
const TRIAL_SEED_TAG: [u8; 8] = *b"pinchsim";

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// The parameter swept across a study and its values, in sweep order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    /// Transmit power values in dBm.
    Power(Vec<f64>),
    /// Blocklengths in channel uses.
    Blocklength(Vec<u32>),
    /// Service-area side lengths in meters.
    Area(Vec<f64>),
    /// Pinching-antenna counts.
    Antennas(Vec<usize>),
}

impl Sweep {
    /// Name of the swept parameter, used in reports.
    pub fn parameter_name(&self) -> &'static str {
        match self {
            Sweep::Power(_) => "power",
            Sweep::Blocklength(_) => "blocklength",
            Sweep::Area(_) => "area",
            Sweep::Antennas(_) => "antennas",
        }
    }

    /// Number of sweep points.
    pub fn len(&self) -> usize {
        match self {
            Sweep::Power(v) => v.len(),
            Sweep::Blocklength(v) => v.len(),
            Sweep::Area(v) => v.len(),
            Sweep::Antennas(v) => v.len(),
        }
    }

    /// True when the sweep holds no values (rejected by validation).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sweep values as reals, in sweep order.
    pub fn values_as_f64(&self) -> Vec<f64> {
        match self {
            Sweep::Power(v) => v.clone(),
            Sweep::Blocklength(v) => v.iter().map(|&x| x as f64).collect(),
            Sweep::Area(v) => v.clone(),
            Sweep::Antennas(v) => v.iter().map(|&x| x as f64).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(CoreError::InvalidParameter {
                field: "sweep",
                reason: "sweep value list must be non-empty".into(),
            });
        }
        let values = self.values_as_f64();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidParameter {
                field: "sweep",
                reason: "sweep values must be finite".into(),
            });
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::InvalidParameter {
                field: "sweep",
                reason: "sweep values must be strictly increasing".into(),
            });
        }
        let positive_required = match self {
            Sweep::Power(_) => false, // dBm values may be negative or zero
            Sweep::Blocklength(_) | Sweep::Area(_) | Sweep::Antennas(_) => true,
        };
        if positive_required && values[0] <= 0.0 {
            return Err(CoreError::InvalidParameter {
                field: "sweep",
                reason: format!("{} values must be positive", self.parameter_name()),
            });
        }
        Ok(())
    }
}

/// Monte Carlo study setup: service area, trial count, seed, sweep, and
/// whether the conventional baseline is evaluated alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Side length of the square service area, meters.
    pub area_side: f64,
    /// Trials per sweep point.
    pub num_trials: u64,
    /// Master seed from which all per-trial RNG streams derive.
    pub master_seed: u64,
    /// Swept parameter and its values.
    pub sweep: Sweep,
    /// Evaluate the conventional fixed-array baseline in each trial.
    pub baseline_enabled: bool,
}

impl SimulationConfig {
    /// Checks trial count, area, and sweep-list invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.area_side.is_finite() || self.area_side < 0.0 {
            return Err(CoreError::InvalidParameter {
                field: "area_side",
                reason: format!("must be finite and non-negative, got {}", self.area_side),
            });
        }
        if self.num_trials == 0 {
            return Err(CoreError::InvalidParameter {
                field: "num_trials",
                reason: "must run at least one trial".into(),
            });
        }
        self.sweep.validate()
    }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Outcome of a single Monte Carlo trial. Delivered rates are clamped at
/// zero: a link below its zero-rate threshold carries nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    /// Sampled user position.
    pub user: UserPosition,
    /// Delivered pinching-array rate, nats per channel use, ≥ 0.
    pub rate_pinching_nats: f64,
    /// Delivered baseline rate, nats per channel use, ≥ 0; absent when the
    /// baseline is disabled.
    pub rate_conventional_nats: Option<f64>,
    /// Whether the pinching link met the QoS rate target.
    pub qos_ok: bool,
    /// Whether the exact feasibility check passed for this user.
    pub feasible: bool,
}

/// Aggregated outcome of all trials at one sweep point. Mean rates are in
/// bits per channel use — the single nats-to-bits conversion point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepResult {
    /// Name of the swept parameter.
    pub swept_parameter: &'static str,
    /// Value of the swept parameter at this point.
    pub swept_value: f64,
    /// Mean delivered pinching rate over all aggregated trials, bits/use.
    pub mean_rate_pinching_bits: f64,
    /// Mean baseline rate, bits/use; absent when the baseline is disabled.
    pub mean_rate_conventional_bits: Option<f64>,
    /// Fraction of aggregated trials that missed the QoS target.
    pub outage_fraction: f64,
    /// Number of trials aggregated (excludes alignment failures).
    pub trials: u64,
    /// Trials dropped because placement could not align the array.
    pub alignment_failures: u64,
}

// ---------------------------------------------------------------------------
// Sampling and per-trial evaluation
// ---------------------------------------------------------------------------

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Deterministic RNG for one trial, derived by packing the master seed,
/// sweep index, and trial index (with a domain tag) into the stream seed.
pub fn trial_rng(master_seed: u64, sweep_index: u64, trial_index: u64) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&sweep_index.to_le_bytes());
    seed[16..24].copy_from_slice(&trial_index.to_le_bytes());
    seed[24..32].copy_from_slice(&TRIAL_SEED_TAG);
    ChaCha12Rng::from_seed(seed)
}

/// Draws a user uniformly from the square `[0, D] x [-D/2, D/2]`.
pub fn sample_user<R: Rng + ?Sized>(rng: &mut R, area_side: f64) -> UserPosition {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    UserPosition {
        x: u1 * area_side,
        y: (u2 - 0.5) * area_side,
    }
}

/// Places the pinching array for one user and records the delivered rate,
/// QoS outcome, and feasibility. The baseline field is left unset.
pub fn evaluate_pinching(
    user: &UserPosition,
    sys: &SystemParams,
    urllc: &UrllcParams,
) -> Result<TrialRecord> {
    let thresholds = qos_snr_threshold(urllc)?;
    let feas = feasibility(user, sys, &thresholds);
    let placed = fine_tune(user, sys, urllc, DEFAULT_PHASE_TOL)?;
    Ok(TrialRecord {
        user: *user,
        rate_pinching_nats: placed.rate_nats.max(0.0),
        rate_conventional_nats: None,
        qos_ok: placed.qos_satisfied,
        feasible: feas.exact_ok,
    })
}

/// Positions of the conventional baseline: a fixed half-wavelength array
/// centered on the feed point.
fn conventional_layout(sys: &SystemParams) -> AntennaLayout {
    let spacing = sys.lambda() / 2.0;
    let n = sys.num_antennas;
    let center = (n as f64 + 1.0) / 2.0;
    let positions = (1..=n)
        .map(|i| sys.feed_x + (i as f64 - center) * spacing)
        .collect();
    AntennaLayout::new(positions, spacing)
        .expect("uniformly spaced positions always satisfy the layout invariants")
}

/// Delivered rate of the conventional baseline for one user, nats per
/// channel use (negative below the zero-rate threshold, like the raw rate).
///
/// The baseline array is fixed at the feed and has no per-user phase
/// control: its coefficients carry the phases the propagation model gives
/// them, and the received SNR is that of their plain phasor sum.
pub fn evaluate_conventional(user: &UserPosition, sys: &SystemParams, urllc: &UrllcParams) -> f64 {
    let layout = conventional_layout(sys);
    let channel = channel_coefficients(&layout, user, sys);
    let gamma = snr(&channel, sys).expect("baseline layout matches the configured antenna count");
    achievable_rate(gamma, urllc.tau())
        .expect("baseline SNR is finite and non-negative for valid parameters")
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

/// `(system, urllc, area_side)` with one parameter overridden by the sweep.
fn apply_override(
    sweep: &Sweep,
    index: usize,
    sys: &SystemParams,
    urllc: &UrllcParams,
    area_side: f64,
) -> Result<(SystemParams, UrllcParams, f64)> {
    let mut sys = *sys;
    let mut urllc = *urllc;
    let mut area = area_side;
    match sweep {
        Sweep::Power(v) => sys.transmit_power = dbm_to_watts(v[index]),
        Sweep::Blocklength(v) => urllc = urllc.with_blocklength(v[index])?,
        Sweep::Area(v) => area = v[index],
        Sweep::Antennas(v) => sys.num_antennas = v[index],
    }
    sys.validate()?;
    Ok((sys, urllc, area))
}

/// Runs the full study and returns both the per-point aggregates and every
/// per-trial record (in sweep order, then trial order).
///
/// Trials at one sweep point run in parallel; records are collected in trial
/// order and reduced sequentially, so equal inputs give byte-identical
/// results regardless of thread count. A trial whose placement fails to
/// align is counted in `alignment_failures` and excluded from the
/// aggregates; only a sweep point losing every trial is an error.
pub fn run_sweep_detailed(
    config: &SimulationConfig,
    sys: &SystemParams,
    urllc: &UrllcParams,
) -> Result<(Vec<SweepResult>, Vec<Vec<TrialRecord>>)> {
    config.validate()?;
    sys.validate()?;
    let values = config.sweep.values_as_f64();
    let mut results = Vec::with_capacity(values.len());
    let mut all_records = Vec::with_capacity(values.len());

    for (sweep_index, &swept_value) in values.iter().enumerate() {
        let (point_sys, point_urllc, point_area) =
            apply_override(&config.sweep, sweep_index, sys, urllc, config.area_side)?;

        let outcomes: Vec<Result<TrialRecord>> = (0..config.num_trials)
            .into_par_iter()
            .map(|trial_index| {
                let mut rng = trial_rng(config.master_seed, sweep_index as u64, trial_index);
                let user = sample_user(&mut rng, point_area);
                evaluate_pinching(&user, &point_sys, &point_urllc).map(|mut record| {
                    if config.baseline_enabled {
                        let rate =
                            evaluate_conventional(&user, &point_sys, &point_urllc).max(0.0);
                        record.rate_conventional_nats = Some(rate);
                    }
                    record
                })
            })
            .collect();

        let mut records = Vec::with_capacity(outcomes.len());
        let mut alignment_failures = 0u64;
        for outcome in outcomes {
            match outcome {
                Ok(record) => records.push(record),
                Err(CoreError::AlignmentFailure { .. }) => alignment_failures += 1,
                Err(other) => return Err(other),
            }
        }
        if records.is_empty() {
            return Err(CoreError::AllTrialsFailed {
                swept_value,
                trials: config.num_trials,
            });
        }

        let count = records.len() as f64;
        let mean_pinching_nats: f64 =
            records.iter().map(|r| r.rate_pinching_nats).sum::<f64>() / count;
        let mean_conventional_nats = if config.baseline_enabled {
            let sum: f64 = records
                .iter()
                .map(|r| r.rate_conventional_nats.unwrap_or(0.0))
                .sum();
            Some(sum / count)
        } else {
            None
        };
        let outage = records.iter().filter(|r| !r.qos_ok).count() as f64 / count;

        results.push(SweepResult {
            swept_parameter: config.sweep.parameter_name(),
            swept_value,
            mean_rate_pinching_bits: mean_pinching_nats / LN_2,
            mean_rate_conventional_bits: mean_conventional_nats.map(|v| v / LN_2),
            outage_fraction: outage,
            trials: records.len() as u64,
            alignment_failures,
        });
        all_records.push(records);
    }
    Ok((results, all_records))
}

/// Runs the study and returns the per-point aggregates only.
pub fn run_sweep(
    config: &SimulationConfig,
    sys: &SystemParams,
    urllc: &UrllcParams,
) -> Result<Vec<SweepResult>> {
    run_sweep_detailed(config, sys, urllc).map(|(results, _)| results)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
