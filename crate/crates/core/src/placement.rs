//! Antenna position optimization along the waveguide.
//!
//! For a user at `(x, y, 0)` the SNR-optimal layout under perfect phase
//! alignment is the minimum-spacing grid centered on the user's x-coordinate
//! ([`closed_form_layout`]): path loss is symmetric and convex in the
//! along-guide offset, so antennas pack as tightly as allowed around `x`.
//! Actual phases are not aligned there, so [`fine_tune`] walks outward from
//! the center antenna, nudging each antenna within `[Δ, 3Δ]` of its fixed
//! neighbor to a position where the total phases differ by an exact multiple
//! of 2 pi ([`solve_phase_root`]). Because the guided-wave term advances
//! phase faster than the free-space term retreats (`n_eff > 1`), a window of
//! width `2Δ = lambda` (at the default half-wave spacing) almost always
//! sweeps more than one full cycle and therefore contains a root; degenerate
//! feed-straddling geometries get one wider retry before the failure is
//! reported.
//!
//! [`feasibility`] separates a cheap necessary condition (even `N` antennas
//! directly alongside the user would need `C < N P_t alpha^2 / (nu2 sigma^2)`)
//! from the exact check of the aligned SNR at the closed-form layout against
//! the QoS threshold.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::finite_blocklength::{achievable_rate, QosThresholds, UrllcParams};
use crate::geometry::{
    aligned_snr, channel_coefficients, snr, total_phase, wrap_phase, AntennaLayout, SystemParams,
    UserPosition,
};

/// Default tolerance on wrapped phase residuals, radians.
pub const DEFAULT_PHASE_TOL: f64 = 1e-9;

/// Bisection width tolerance on antenna positions, meters. At a centimeter
/// wavelength this resolves phase to ~1e-10 rad, inside the phase tolerance.
pub const POSITION_TOL: f64 = 1e-13;

/// Sample count of the dense fallback scan used on intervals where the phase
/// function is not monotone (straddling the user or the feed).
pub const DENSE_SCAN_SAMPLES: usize = 10_000;

/// Slack on the QoS rate comparison, nats per channel use.
const QOS_RATE_SLACK: f64 = 1e-12;

/// Widened search window, in units of the minimum spacing, used for the
/// single retry after a root search fails in the standard `[Δ, 3Δ]` window.
const EXPANDED_WINDOW_SPACINGS: f64 = 5.0;

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

/// Outcome of the QoS feasibility test for one user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    /// Necessary condition: the user is close enough to the waveguide that
    /// `N` antennas directly alongside could meet the threshold.
    pub necessary_ok: bool,
    /// Exact condition: the closed-form layout's aligned SNR meets `nu2`.
    pub exact_ok: bool,
    /// `aligned_snr / nu2 - 1`; positive iff `exact_ok`.
    pub margin: f64,
}

/// Outcome of a placement run: positions, alignment quality, and the
/// delivered rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementResult {
    /// Fine-tuned antenna positions.
    pub layout: AntennaLayout,
    /// Wrapped adjacent phase differences, length `N - 1`, each in (-pi, pi].
    pub phase_residuals: Vec<f64>,
    /// Whether the delivered rate meets the QoS target.
    pub qos_satisfied: bool,
    /// SNR of the fine-tuned layout's actual channel.
    pub snr_achieved: f64,
    /// Achievable rate at `snr_achieved`, nats per channel use (may be
    /// negative below the zero-rate threshold; not clamped here).
    pub rate_nats: f64,
}

// ---------------------------------------------------------------------------
// Closed form and feasibility
// ---------------------------------------------------------------------------

fn closed_form_positions(user: &UserPosition, params: &SystemParams) -> Vec<f64> {
    let n = params.num_antennas;
    let delta = params.min_spacing;
    let center = (n as f64 + 1.0) / 2.0;
    (1..=n)
        .map(|i| user.x + (i as f64 - center) * delta)
        .collect()
}

/// Minimum-spacing layout centered on the user's x-coordinate — the
/// SNR-optimal positions under perfect phase alignment.
///
/// For odd `N` the middle antenna sits exactly at `x`; for even `N` the two
/// middle antennas straddle `x` at half-spacing offsets.
pub fn closed_form_layout(user: &UserPosition, params: &SystemParams) -> AntennaLayout {
    AntennaLayout::new(closed_form_positions(user, params), params.min_spacing)
        .expect("uniformly spaced positions always satisfy the layout invariants")
}

/// QoS feasibility for one user: necessary bound, exact aligned-SNR check,
/// and the relative margin.
pub fn feasibility(
    user: &UserPosition,
    params: &SystemParams,
    thresholds: &QosThresholds,
) -> Feasibility {
    let c = user.axis_distance_sq(params.height);
    let alpha = params.alpha();
    let n = params.num_antennas as f64;
    let necessary_ok =
        c < n * params.transmit_power * alpha * alpha / (thresholds.nu2 * params.noise_power);
    let layout = closed_form_layout(user, params);
    let aligned = aligned_snr(&layout, user, params);
    let margin = aligned / thresholds.nu2 - 1.0;
    Feasibility {
        necessary_ok,
        exact_ok: aligned >= thresholds.nu2,
        margin,
    }
}

// ---------------------------------------------------------------------------
// Phase-root solving
// ---------------------------------------------------------------------------

/// All positions in `[lo, hi]` where the total phase equals `target_phase`
/// modulo 2 pi, sorted ascending. Empty when the interval sweeps past no
/// matching phase.
fn phase_roots(
    lo: f64,
    hi: f64,
    target_phase: f64,
    user: &UserPosition,
    params: &SystemParams,
    tol: f64,
) -> Vec<f64> {
    let psi = |x: f64| total_phase(x, user, params);
    // The phase is monotone on any interval that stays on one side of the
    // user (fixing the sign of the free-space slope) and on one side of the
    // feed (fixing the sign of the guided slope): n_eff > 1 then keeps the
    // total slope from changing sign.
    let one_side_of_user = hi <= user.x || lo >= user.x;
    let one_side_of_feed = hi <= params.feed_x || lo >= params.feed_x;
    let mut roots = if one_side_of_user && one_side_of_feed {
        monotone_phase_roots(lo, hi, target_phase, &psi)
    } else {
        dense_scan_phase_roots(lo, hi, target_phase, &psi)
    };
    roots.retain(|&x| wrap_phase(psi(x) - target_phase).abs() <= tol);
    roots.sort_by(|a, b| a.partial_cmp(b).expect("roots are finite"));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 10.0 * POSITION_TOL);
    roots
}

/// Root enumeration when `psi` is strictly monotone on `[lo, hi]`: every
/// integer `k` with `target + 2 pi k` inside the swept range yields exactly
/// one root, found by bisection.
fn monotone_phase_roots(lo: f64, hi: f64, target: f64, psi: &impl Fn(f64) -> f64) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let (psi_lo, psi_hi) = (psi(lo), psi(hi));
    let (swept_min, swept_max) = if psi_lo <= psi_hi {
        (psi_lo, psi_hi)
    } else {
        (psi_hi, psi_lo)
    };
    let k_min = ((swept_min - target) / tau).ceil() as i64;
    let k_max = ((swept_max - target) / tau).floor() as i64;
    let increasing = psi_hi >= psi_lo;
    let mut roots = Vec::new();
    for k in k_min..=k_max {
        let level = target + tau * k as f64;
        let (mut xl, mut xr) = (lo, hi);
        while xr - xl > POSITION_TOL {
            let mid = 0.5 * (xl + xr);
            if (psi(mid) < level) == increasing {
                xl = mid;
            } else {
                xr = mid;
            }
        }
        roots.push(0.5 * (xl + xr));
    }
    roots
}

/// Fallback for non-monotone intervals: sample the wrapped residual densely,
/// bracket its sign changes (skipping the spurious ±pi wrap jumps), and
/// bisect each bracket.
fn dense_scan_phase_roots(lo: f64, hi: f64, target: f64, psi: &impl Fn(f64) -> f64) -> Vec<f64> {
    let step = (hi - lo) / DENSE_SCAN_SAMPLES as f64;
    let residual = |x: f64| wrap_phase(psi(x) - target);
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev_w = residual(lo);
    for i in 1..=DENSE_SCAN_SAMPLES {
        let x = if i == DENSE_SCAN_SAMPLES { hi } else { lo + step * i as f64 };
        let w = residual(x);
        if prev_w == 0.0 {
            roots.push(prev_x);
        } else if prev_w * w < 0.0 && prev_w.abs() + w.abs() < std::f64::consts::PI {
            // A genuine zero crossing: both values are small enough that the
            // sign change cannot be the wrap discontinuity at ±pi.
            let (mut xl, mut xr, wl) = (prev_x, x, prev_w);
            while xr - xl > POSITION_TOL {
                let mid = 0.5 * (xl + xr);
                let wm = residual(mid);
                if wm == 0.0 {
                    xl = mid;
                    xr = mid;
                } else if (wm < 0.0) == (wl < 0.0) {
                    xl = mid;
                } else {
                    xr = mid;
                }
            }
            roots.push(0.5 * (xl + xr));
        }
        prev_x = x;
        prev_w = w;
    }
    if prev_w == 0.0 {
        roots.push(prev_x);
    }
    roots
}

/// Smallest position in `interval` where the total phase matches
/// `target_phase` modulo 2 pi within `tol` radians.
///
/// The search is exact on monotone intervals (integer-cycle enumeration plus
/// bisection) and falls back to a dense scan with [`DENSE_SCAN_SAMPLES`]
/// samples when the interval straddles the user or the feed.
pub fn solve_phase_root(
    interval: (f64, f64),
    target_phase: f64,
    user: &UserPosition,
    params: &SystemParams,
    tol: f64,
) -> Result<f64> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(CoreError::InvalidParameter {
            field: "interval",
            reason: format!("must be a non-empty finite interval, got [{lo}, {hi}]"),
        });
    }
    phase_roots(lo, hi, target_phase, user, params, tol)
        .first()
        .copied()
        .ok_or(CoreError::NoPhaseRoot { lo, hi })
}

// ---------------------------------------------------------------------------
// Fine-tuning
// ---------------------------------------------------------------------------

/// Index (0-based) of the antenna pinned at its closed-form position before
/// the alignment passes: the middle antenna for odd `N`, the lower-middle
/// antenna for even `N`.
fn center_index(n: usize) -> usize {
    if n % 2 == 1 {
        n / 2
    } else {
        n / 2 - 1
    }
}

/// Searches the standard window for a phase root, then a widened window once,
/// logging the retry. `forward` selects which end of the window keeps the
/// minimum spacing (and is therefore closest to the closed-form optimum).
fn aligned_neighbor_position(
    fixed_x: f64,
    antenna_index: usize,
    forward: bool,
    user: &UserPosition,
    params: &SystemParams,
    tol: f64,
) -> Result<f64> {
    let delta = params.min_spacing;
    let target = total_phase(fixed_x, user, params);
    let window = |width: f64| -> (f64, f64) {
        if forward {
            (fixed_x + delta, fixed_x + delta + width)
        } else {
            (fixed_x - delta - width, fixed_x - delta)
        }
    };
    let pick = |roots: Vec<f64>| -> Option<f64> {
        if forward {
            roots.first().copied()
        } else {
            roots.last().copied()
        }
    };

    let (lo, hi) = window(2.0 * delta);
    if let Some(x) = pick(phase_roots(lo, hi, target, user, params, tol)) {
        return Ok(x);
    }
    let (lo, hi) = window(EXPANDED_WINDOW_SPACINGS * delta);
    log::warn!(
        "no phase root for antenna {antenna_index} in [{:.6}, {:.6}]; retrying widened window [{lo:.6}, {hi:.6}]",
        window(2.0 * delta).0,
        window(2.0 * delta).1,
    );
    pick(phase_roots(lo, hi, target, user, params, tol))
        .ok_or(CoreError::AlignmentFailure {
            antenna_index,
            lo,
            hi,
        })
}

/// Per-antenna alignment refinement: pins the center antenna at its
/// closed-form position, then walks outward (right half forward, left half
/// backward), moving each antenna within `[Δ, 3Δ]` of its fixed neighbor to a
/// position of exact phase coherence.
///
/// The returned layout has every wrapped adjacent phase difference within
/// `tol` and, barring widened-window retries, every gap in `[Δ, 3Δ]`. An
/// unreachable QoS target is not an error — it is reported through
/// `qos_satisfied = false`; only a root search that fails even after the
/// widened retry produces an error.
pub fn fine_tune(
    user: &UserPosition,
    params: &SystemParams,
    urllc: &UrllcParams,
    tol: f64,
) -> Result<PlacementResult> {
    params.validate()?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(CoreError::InvalidParameter {
            field: "tol",
            reason: format!("phase tolerance must be finite and positive, got {tol}"),
        });
    }
    let n = params.num_antennas;
    let closed = closed_form_positions(user, params);
    let center = center_index(n);

    let mut positions = vec![f64::NAN; n];
    positions[center] = closed[center];
    for i in center + 1..n {
        positions[i] = aligned_neighbor_position(positions[i - 1], i, true, user, params, tol)?;
    }
    for i in (0..center).rev() {
        positions[i] = aligned_neighbor_position(positions[i + 1], i, false, user, params, tol)?;
    }

    let layout = AntennaLayout::new(positions, params.min_spacing)?;
    let phases: Vec<f64> = layout
        .positions()
        .iter()
        .map(|&x| total_phase(x, user, params))
        .collect();
    let phase_residuals: Vec<f64> = phases
        .windows(2)
        .map(|pair| wrap_phase(pair[1] - pair[0]))
        .collect();

    let snr_achieved = snr(&channel_coefficients(&layout, user, params), params)?;
    let rate_nats = achievable_rate(snr_achieved, urllc.tau())?;
    let qos_satisfied = rate_nats >= urllc.target_rate_nats() - QOS_RATE_SLACK;
    Ok(PlacementResult {
        layout,
        phase_residuals,
        qos_satisfied,
        snr_achieved,
        rate_nats,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
