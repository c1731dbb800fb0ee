//! Spherical-wave channel model of a waveguide-fed pinching-antenna array.
//!
//! The waveguide runs along the x-axis at height `d` above the user plane; a
//! feed at `feed_x` injects the signal, and each pinching antenna at
//! coordinate `x̃` radiates it with total phase
//!
//! ```text
//! psi(x̃) = 2 pi (|u - p̃| / lambda + |x̃ - feed_x| / lambda_g)
//! ```
//!
//! (free-space path plus in-guide travel, `lambda_g = lambda / n_eff`) and
//! amplitude `alpha / |u - p̃|` with `alpha = c / (4 pi f_c)`. Phases are kept
//! unwrapped as real radians; reduction mod 2 pi happens only inside
//! comparisons, because placement solves root equations on the continuous
//! phase function.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CoreError, Result};

/// Tolerance by which an antenna gap may undershoot the minimum spacing,
/// absorbing root-finder rounding at interval endpoints.
pub const SPACING_SLACK: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Parameter and value types
// ---------------------------------------------------------------------------

/// Physical-layer constants: carrier, waveguide, geometry, power budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Propagation speed in m/s; a parameter so any convention can be matched.
    pub light_speed: f64,
    /// Height of the waveguide above the user plane, meters.
    pub height: f64,
    /// Effective refractive index of the waveguide (> 1).
    pub n_eff: f64,
    /// Minimum spacing between adjacent antennas, meters.
    pub min_spacing: f64,
    /// Noise power at the receiver, watts.
    pub noise_power: f64,
    /// Total transmit power, watts, split evenly across antennas.
    pub transmit_power: f64,
    /// Number of pinching antennas on the waveguide.
    pub num_antennas: usize,
    /// x-coordinate of the waveguide feed point, meters.
    pub feed_x: f64,
}

impl Default for SystemParams {
    /// 28 GHz mmWave defaults: waveguide 3 m up with index 1.4, half-wave
    /// minimum spacing, -90 dBm noise floor, 20 dBm transmit power, five
    /// antennas, feed at the origin.
    fn default() -> Self {
        let carrier_hz = 28e9;
        let light_speed = 299_792_458.0;
        Self {
            carrier_hz,
            light_speed,
            height: 3.0,
            n_eff: 1.4,
            min_spacing: light_speed / carrier_hz / 2.0,
            noise_power: 1e-12,
            transmit_power: 0.1,
            num_antennas: 5,
            feed_x: 0.0,
        }
    }
}

impl SystemParams {
    /// Free-space wavelength `c / f_c`, meters.
    pub fn lambda(&self) -> f64 {
        self.light_speed / self.carrier_hz
    }

    /// Guided wavelength `lambda / n_eff`, meters.
    pub fn lambda_g(&self) -> f64 {
        self.lambda() / self.n_eff
    }

    /// Amplitude constant `c / (4 pi f_c)` of the spherical-wave model.
    pub fn alpha(&self) -> f64 {
        self.lambda() / (4.0 * std::f64::consts::PI)
    }

    /// Checks every invariant, naming the first violated field.
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 5] = [
            ("carrier_hz", self.carrier_hz),
            ("light_speed", self.light_speed),
            ("height", self.height),
            ("noise_power", self.noise_power),
            ("transmit_power", self.transmit_power),
        ];
        for (field, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(CoreError::InvalidParameter {
                    field,
                    reason: format!("must be finite and positive, got {value}"),
                });
            }
        }
        if !self.n_eff.is_finite() || self.n_eff <= 1.0 {
            return Err(CoreError::InvalidParameter {
                field: "n_eff",
                reason: format!("must exceed 1 (guided wave slower than free space), got {}", self.n_eff),
            });
        }
        if !self.min_spacing.is_finite() || self.min_spacing <= 0.0 {
            return Err(CoreError::InvalidParameter {
                field: "min_spacing",
                reason: format!("must be finite and positive, got {}", self.min_spacing),
            });
        }
        if self.num_antennas == 0 {
            return Err(CoreError::InvalidParameter {
                field: "num_antennas",
                reason: "must be at least 1".into(),
            });
        }
        if !self.feed_x.is_finite() {
            return Err(CoreError::InvalidParameter {
                field: "feed_x",
                reason: format!("must be finite, got {}", self.feed_x),
            });
        }
        Ok(())
    }
}

/// User location in the z = 0 plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserPosition {
    /// Coordinate along the waveguide axis, meters.
    pub x: f64,
    /// Lateral offset from the waveguide axis, meters.
    pub y: f64,
}

impl UserPosition {
    /// Squared distance from the user to the waveguide line: `y^2 + height^2`.
    ///
    /// This is the floor on any squared antenna-user distance, attained by an
    /// antenna directly alongside the user.
    pub fn axis_distance_sq(&self, height: f64) -> f64 {
        self.y * self.y + height * height
    }
}

/// Ordered pinching-antenna x-coordinates along the waveguide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntennaLayout {
    positions: Vec<f64>,
}

impl AntennaLayout {
    /// Validates ordering and minimum spacing (with [`SPACING_SLACK`]
    /// undershoot allowance) and wraps the positions.
    pub fn new(positions: Vec<f64>, min_spacing: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(CoreError::InvalidParameter {
                field: "positions",
                reason: "layout must contain at least one antenna".into(),
            });
        }
        if let Some(bad) = positions.iter().find(|p| !p.is_finite()) {
            return Err(CoreError::InvalidParameter {
                field: "positions",
                reason: format!("coordinates must be finite, got {bad}"),
            });
        }
        for (i, pair) in positions.windows(2).enumerate() {
            let gap = pair[1] - pair[0];
            if gap <= 0.0 {
                return Err(CoreError::InvalidParameter {
                    field: "positions",
                    reason: format!(
                        "must be strictly increasing; positions {i} and {} have gap {gap:e}",
                        i + 1
                    ),
                });
            }
            if gap < min_spacing - SPACING_SLACK {
                return Err(CoreError::InvalidParameter {
                    field: "positions",
                    reason: format!(
                        "gap {gap:e} between positions {i} and {} is below the minimum spacing {min_spacing:e}",
                        i + 1
                    ),
                });
            }
        }
        Ok(Self { positions })
    }

    /// Antenna x-coordinates in increasing order.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Number of antennas.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// True when the layout holds no antennas (never, for validated layouts).
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Per-antenna complex channel coefficients and their coherent sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `a_n = (alpha / dist_n) exp(-i psi_n)` per antenna, layout order.
    pub coefficients: Vec<Complex64>,
    /// Sum of `coefficients`.
    pub coherent_sum: Complex64,
}

// ---------------------------------------------------------------------------
// Geometry and channel operations
// ---------------------------------------------------------------------------

/// Distance from an antenna at `antenna_x` on the waveguide to the user.
pub fn free_space_distance(antenna_x: f64, user: &UserPosition, params: &SystemParams) -> f64 {
    let dx = antenna_x - user.x;
    (dx * dx + user.axis_distance_sq(params.height)).sqrt()
}

/// Total unwrapped phase at the user of the signal radiated from `antenna_x`:
/// free-space path plus in-guide travel from the feed.
pub fn total_phase(antenna_x: f64, user: &UserPosition, params: &SystemParams) -> f64 {
    let dist = free_space_distance(antenna_x, user, params);
    let guided = (antenna_x - params.feed_x).abs();
    std::f64::consts::TAU * (dist / params.lambda() + guided / params.lambda_g())
}

/// Reduces a phase to the interval `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

/// Complex channel coefficients of a layout toward one user.
pub fn channel_coefficients(
    layout: &AntennaLayout,
    user: &UserPosition,
    params: &SystemParams,
) -> ChannelRealization {
    let alpha = params.alpha();
    let coefficients: Vec<Complex64> = layout
        .positions()
        .iter()
        .map(|&x| {
            let dist = free_space_distance(x, user, params);
            let psi = total_phase(x, user, params);
            Complex64::from_polar(alpha / dist, -psi)
        })
        .collect();
    let coherent_sum = coefficients.iter().sum();
    ChannelRealization {
        coefficients,
        coherent_sum,
    }
}

/// Received SNR of a channel realization under an even power split.
pub fn snr(channel: &ChannelRealization, params: &SystemParams) -> Result<f64> {
    let n = channel.coefficients.len();
    if n != params.num_antennas {
        return Err(CoreError::ShapeMismatch {
            op: "snr",
            expected: params.num_antennas,
            actual: n,
        });
    }
    Ok(params.transmit_power / (n as f64 * params.noise_power) * channel.coherent_sum.norm_sqr())
}

/// SNR the layout would achieve under perfect phase alignment:
/// `(P_t alpha^2 / (N sigma^2)) (sum_n 1/dist_n)^2`.
///
/// By the triangle inequality this upper-bounds the actual [`snr`] of the
/// same layout, with equality exactly at aligned phases.
pub fn aligned_snr(layout: &AntennaLayout, user: &UserPosition, params: &SystemParams) -> f64 {
    let alpha = params.alpha();
    let inv_dist_sum: f64 = layout
        .positions()
        .iter()
        .map(|&x| 1.0 / free_space_distance(x, user, params))
        .sum();
    let n = layout.len() as f64;
    params.transmit_power * alpha * alpha / (n * params.noise_power) * inv_dist_sum * inv_dist_sum
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    // Wavelength and amplitude constant at the 28 GHz defaults, computed
    // independently at high precision.
    const LAMBDA_28GHZ: f64 = 0.010_706_873_5;
    const ALPHA_28GHZ: f64 = 8.520_259_212_923_111_2e-4;

    fn defaults() -> SystemParams {
        SystemParams::default()
    }

    /// Layout used by several tests: the defaults' five antennas straddling
    /// x = 5 at twice the minimum spacing.
    fn spread_layout(params: &SystemParams) -> AntennaLayout {
        let delta = params.min_spacing;
        let positions = (0..5).map(|k| 5.0 + (k as f64 - 2.0) * 2.0 * delta).collect();
        AntennaLayout::new(positions, delta).unwrap()
    }

    // -- parameters ----------------------------------------------------------

    #[test]
    fn default_params_are_valid_with_expected_derived_constants() {
        let p = defaults();
        p.validate().unwrap();
        assert_relative_eq!(p.lambda(), LAMBDA_28GHZ, max_relative = 1e-15);
        assert_relative_eq!(p.lambda_g(), LAMBDA_28GHZ / 1.4, max_relative = 1e-15);
        assert_relative_eq!(p.alpha(), ALPHA_28GHZ, max_relative = 1e-15);
        assert_relative_eq!(p.min_spacing, LAMBDA_28GHZ / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn validate_names_the_offending_field() {
        let mut p = defaults();
        p.n_eff = 1.0;
        assert!(matches!(
            p.validate(),
            Err(CoreError::InvalidParameter { field: "n_eff", .. })
        ));
        let mut p = defaults();
        p.height = 0.0;
        assert!(matches!(
            p.validate(),
            Err(CoreError::InvalidParameter { field: "height", .. })
        ));
        let mut p = defaults();
        p.num_antennas = 0;
        assert!(p.validate().is_err());
        let mut p = defaults();
        p.noise_power = -1e-12;
        assert!(p.validate().is_err());
    }

    // -- distances -----------------------------------------------------------

    #[test]
    fn distance_reduces_to_height_directly_alongside_the_user() {
        let p = defaults();
        let user = UserPosition { x: 2.0, y: 0.0 };
        assert_eq!(free_space_distance(2.0, &user, &p), 3.0);
    }

    #[test]
    fn distance_follows_the_three_four_five_triangle() {
        let p = defaults();
        let user = UserPosition { x: 1.0, y: 0.0 };
        assert_relative_eq!(free_space_distance(5.0, &user, &p), 5.0, max_relative = 1e-15);
    }

    #[test]
    fn distance_equals_full_three_dimensional_norm() {
        let p = defaults();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let user = UserPosition {
                x: rng.gen_range(-10.0..10.0),
                y: rng.gen_range(-10.0..10.0),
            };
            let ax: f64 = rng.gen_range(-10.0..10.0);
            // Antenna at (ax, 0, height), user at (x, y, 0).
            let naive = ((ax - user.x).powi(2) + user.y.powi(2) + p.height.powi(2)).sqrt();
            assert_relative_eq!(
                free_space_distance(ax, &user, &p),
                naive,
                max_relative = 1e-15
            );
        }
    }

    // -- phases ----------------------------------------------------------------

    #[test]
    fn phase_at_the_feed_has_no_waveguide_term() {
        let p = defaults();
        let user = UserPosition { x: p.feed_x, y: 0.0 };
        let expected = std::f64::consts::TAU * p.height / p.lambda();
        assert_relative_eq!(
            total_phase(p.feed_x, &user, &p),
            expected,
            max_relative = 1e-15
        );
    }

    #[test]
    fn phase_decomposes_into_free_space_and_guided_terms() {
        let p = defaults();
        let user = UserPosition { x: 4.2, y: -1.3 };
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let ax: f64 = rng.gen_range(-8.0..8.0);
            let free = std::f64::consts::TAU * free_space_distance(ax, &user, &p) / p.lambda();
            let guided = std::f64::consts::TAU * (ax - p.feed_x).abs() / p.lambda_g();
            assert_relative_eq!(
                total_phase(ax, &user, &p),
                free + guided,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn guided_phase_term_scales_linearly_with_refractive_index() {
        let mut p = defaults();
        let user = UserPosition { x: 3.0, y: 0.5 };
        let ax = 1.0;
        let base = total_phase(ax, &user, &p);
        let free = std::f64::consts::TAU * free_space_distance(ax, &user, &p) / p.lambda();
        p.n_eff = 2.8;
        let doubled = total_phase(ax, &user, &p);
        assert_relative_eq!(doubled - free, 2.0 * (base - free), max_relative = 1e-12);
    }

    #[test]
    fn wrap_phase_lands_in_the_half_open_interval() {
        use std::f64::consts::{PI, TAU};
        assert_relative_eq!(wrap_phase(0.3), 0.3, max_relative = 1e-15);
        assert_relative_eq!(wrap_phase(-0.3), -0.3, max_relative = 1e-15);
        assert_eq!(wrap_phase(PI), PI);
        // -pi maps to +pi: the interval is open at -pi.
        assert_eq!(wrap_phase(-PI), PI);
        assert!(wrap_phase(TAU).abs() < 1e-15);
        assert_relative_eq!(wrap_phase(3.0 * PI), PI, max_relative = 1e-12);
        assert_relative_eq!(wrap_phase(0.1 - TAU), 0.1, max_relative = 1e-9);
        assert_relative_eq!(wrap_phase(0.1 + 40.0 * TAU), 0.1, max_relative = 1e-9);
        for raw in [-123.456, -1.0, 0.0, 2.5, 987.654] {
            let w = wrap_phase(raw);
            assert!(w > -PI && w <= PI, "wrap({raw}) = {w} out of range");
            // The wrapped value differs from the input by a multiple of 2 pi.
            let k = (raw - w) / TAU;
            assert_relative_eq!(k, k.round(), epsilon = 1e-9);
        }
    }

    // -- layouts -----------------------------------------------------------------

    #[test]
    fn layout_accepts_slack_undershoot_and_rejects_real_violations() {
        let delta = defaults().min_spacing;
        assert!(AntennaLayout::new(vec![0.0, delta - 1e-13], delta).is_ok());
        assert!(AntennaLayout::new(vec![0.0, delta - 1e-9], delta).is_err());
        assert!(AntennaLayout::new(vec![0.0, delta, 2.0 * delta], delta).is_ok());
        // Strict ordering enforced.
        assert!(AntennaLayout::new(vec![0.0, 0.0], delta).is_err());
        assert!(AntennaLayout::new(vec![delta, 0.0], delta).is_err());
        assert!(AntennaLayout::new(vec![], delta).is_err());
        assert!(AntennaLayout::new(vec![f64::NAN], delta).is_err());
    }

    // -- channel and SNR ------------------------------------------------------------

    #[test]
    fn coefficients_have_path_loss_magnitudes_and_sum_coherently() {
        let p = defaults();
        let user = UserPosition { x: 5.0, y: 1.0 };
        let layout = spread_layout(&p);
        let ch = channel_coefficients(&layout, &user, &p);
        assert_eq!(ch.coefficients.len(), 5);
        let mut manual_sum = Complex64::new(0.0, 0.0);
        for (coeff, &x) in ch.coefficients.iter().zip(layout.positions()) {
            let dist = free_space_distance(x, &user, &p);
            assert_relative_eq!(coeff.norm(), p.alpha() / dist, max_relative = 1e-12);
            // Element-wise reconstruction from the phase definition.
            let expected = Complex64::from_polar(p.alpha() / dist, -total_phase(x, &user, &p));
            assert_relative_eq!(coeff.re, expected.re, max_relative = 1e-12);
            assert_relative_eq!(coeff.im, expected.im, max_relative = 1e-12);
            manual_sum += coeff;
        }
        assert_relative_eq!(ch.coherent_sum.re, manual_sum.re, max_relative = 1e-12);
        assert_relative_eq!(ch.coherent_sum.im, manual_sum.im, max_relative = 1e-12);
    }

    #[test]
    fn single_antenna_at_feed_gives_the_textbook_magnitude() {
        let mut p = defaults();
        p.num_antennas = 1;
        let user = UserPosition { x: p.feed_x, y: 2.0 };
        let layout = AntennaLayout::new(vec![p.feed_x], p.min_spacing).unwrap();
        let ch = channel_coefficients(&layout, &user, &p);
        let c = user.axis_distance_sq(p.height);
        assert_relative_eq!(ch.coefficients[0].norm(), p.alpha() / c.sqrt(), max_relative = 1e-14);
        // SNR collapses to P alpha^2 / (sigma^2 C).
        let expected = p.transmit_power * p.alpha().powi(2) / (p.noise_power * c);
        assert_relative_eq!(snr(&ch, &p).unwrap(), expected, max_relative = 1e-13);
        // One antenna needs no alignment: the bound is attained exactly.
        assert_relative_eq!(
            aligned_snr(&layout, &user, &p),
            snr(&ch, &p).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn opposite_phases_at_equal_distance_cancel_completely() {
        let mut p = defaults();
        p.num_antennas = 2;
        let r = 4.0;
        let a = p.alpha() / r;
        let coefficients = vec![
            Complex64::from_polar(a, 0.3),
            Complex64::from_polar(a, 0.3 + std::f64::consts::PI),
        ];
        let coherent_sum = coefficients.iter().sum();
        let ch = ChannelRealization {
            coefficients,
            coherent_sum,
        };
        assert!(snr(&ch, &p).unwrap() < 1e-20);
    }

    #[test]
    fn aligned_equal_distance_elements_show_coherent_array_gain() {
        let mut p = defaults();
        p.num_antennas = 3;
        let r = 2.5;
        let a = p.alpha() / r;
        let coefficients = vec![Complex64::new(a, 0.0); 3];
        let coherent_sum = coefficients.iter().sum();
        let ch = ChannelRealization {
            coefficients,
            coherent_sum,
        };
        let expected = 3.0 * p.transmit_power * p.alpha().powi(2) / (p.noise_power * r * r);
        assert_relative_eq!(snr(&ch, &p).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn snr_rejects_coefficient_count_mismatch() {
        let p = defaults(); // expects 5 antennas
        let ch = ChannelRealization {
            coefficients: vec![Complex64::new(1.0, 0.0); 3],
            coherent_sum: Complex64::new(3.0, 0.0),
        };
        assert!(matches!(
            snr(&ch, &p),
            Err(CoreError::ShapeMismatch {
                op: "snr",
                expected: 5,
                actual: 3
            })
        ));
    }

    #[test]
    fn aligned_snr_upper_bounds_actual_snr_on_random_layouts() {
        let mut p = defaults();
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = rng.gen_range(1..=6);
            p.num_antennas = n;
            let start: f64 = rng.gen_range(-5.0..5.0);
            let mut positions = vec![start];
            for _ in 1..n {
                let prev = *positions.last().unwrap();
                positions.push(prev + p.min_spacing * rng.gen_range(1.0..4.0));
            }
            let layout = AntennaLayout::new(positions, p.min_spacing).unwrap();
            let user = UserPosition {
                x: rng.gen_range(0.0..10.0),
                y: rng.gen_range(-5.0..5.0),
            };
            let actual = snr(&channel_coefficients(&layout, &user, &p), &p).unwrap();
            let bound = aligned_snr(&layout, &user, &p);
            assert!(
                actual <= bound * (1.0 + 1e-12),
                "actual {actual:e} exceeds aligned bound {bound:e}"
            );
        }
    }

    #[test]
    fn moving_an_antenna_away_from_the_user_lowers_the_aligned_bound() {
        let p = defaults();
        let user = UserPosition { x: 5.0, y: 1.0 };
        let delta = p.min_spacing;
        let near: Vec<f64> = (0..5).map(|k| 5.0 + (k as f64 - 2.0) * delta).collect();
        let mut far = near.clone();
        far[4] += 10.0 * delta;
        let near_layout = AntennaLayout::new(near, delta).unwrap();
        let far_layout = AntennaLayout::new(far, delta).unwrap();
        assert!(aligned_snr(&far_layout, &user, &p) < aligned_snr(&near_layout, &user, &p));
    }

    #[test]
    fn snr_scales_linearly_in_power_and_inversely_in_noise() {
        let p = defaults();
        let user = UserPosition { x: 5.0, y: 1.0 };
        let layout = spread_layout(&p);
        let base = snr(&channel_coefficients(&layout, &user, &p), &p).unwrap();

        let mut doubled_power = p;
        doubled_power.transmit_power *= 2.0;
        let up = snr(&channel_coefficients(&layout, &user, &doubled_power), &doubled_power).unwrap();
        assert_relative_eq!(up, 2.0 * base, max_relative = 1e-12);

        let mut doubled_noise = p;
        doubled_noise.noise_power *= 2.0;
        let down = snr(&channel_coefficients(&layout, &user, &doubled_noise), &doubled_noise).unwrap();
        assert_relative_eq!(down, base / 2.0, max_relative = 1e-12);

        // The aligned bound obeys the same linearity.
        assert_relative_eq!(
            aligned_snr(&layout, &user, &doubled_power),
            2.0 * aligned_snr(&layout, &user, &p),
            max_relative = 1e-12
        );
    }
}
