//! Randomized property tests for the core invariants.

use pinch_core::finite_blocklength::{
    achievable_rate, inverse_q, q_function, qos_snr_threshold, rate_derivative, stationary_snr,
    UrllcParams,
};
use pinch_core::geometry::{
    aligned_snr, channel_coefficients, snr, wrap_phase, AntennaLayout, SystemParams, UserPosition,
    SPACING_SLACK,
};
use pinch_core::placement::feasibility;
use proptest::prelude::*;

fn urllc_strategy() -> impl Strategy<Value = UrllcParams> {
    (1e-7f64..1e-2, 64u32..1024, 32u32..512)
        .prop_map(|(eps, l, b)| UrllcParams::new(eps, l, b).expect("valid parameters"))
}

fn finite_user() -> impl Strategy<Value = UserPosition> {
    (-50.0f64..50.0, -25.0f64..25.0).prop_map(|(x, y)| UserPosition { x, y })
}

proptest! {
    /// The tail-probability inverse returns the argument Q maps to it.
    #[test]
    fn inverse_q_round_trips(p in 1e-9f64..0.499) {
        let x = inverse_q(p).unwrap();
        let back = q_function(x);
        prop_assert!(
            (back - p).abs() <= 1e-11 * p,
            "Q(Q^-1({p})) = {back}"
        );
    }

    /// The closed-form rate derivative matches a central finite difference.
    #[test]
    fn derivative_matches_finite_difference(
        log_gamma in -5.0f64..8.0,
        tau in 0.0f64..2.0,
    ) {
        let gamma = log_gamma.exp();
        let h = gamma * 1e-6;
        let up = achievable_rate(gamma + h, tau).unwrap();
        let down = achievable_rate(gamma - h, tau).unwrap();
        let fd = (up - down) / (2.0 * h);
        let exact = rate_derivative(gamma, tau).unwrap();
        prop_assert!(
            (fd - exact).abs() <= 1e-5 * exact.abs().max(1e-12),
            "gamma={gamma} tau={tau}: fd={fd} exact={exact}"
        );
    }

    /// Past its stationary point, the rate never decreases in the SNR.
    #[test]
    fn rate_is_monotone_beyond_the_stationary_snr(
        tau in 0.0f64..2.0,
        above1 in 0.0f64..6.0,
        step in 1e-6f64..10.0,
    ) {
        let nu0 = stationary_snr(tau);
        let g1 = nu0 + above1;
        let g2 = g1 + step;
        let r1 = achievable_rate(g1, tau).unwrap();
        let r2 = achievable_rate(g2, tau).unwrap();
        prop_assert!(r2 >= r1 - 1e-12, "rate fell from {r1} to {r2}");
    }

    /// The dispersion penalty never pushes the rate above the Shannon rate.
    #[test]
    fn rate_never_exceeds_the_asymptotic_rate(
        log_gamma in -10.0f64..8.0,
        tau in 0.0f64..3.0,
    ) {
        let gamma = log_gamma.exp();
        let rate = achievable_rate(gamma, tau).unwrap();
        prop_assert!(rate <= gamma.ln_1p() + 1e-15);
    }

    /// Wrapped phases land in (-pi, pi] and differ by a whole number of turns.
    #[test]
    fn wrap_phase_preserves_the_angle(phase in -1e6f64..1e6) {
        let w = wrap_phase(phase);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        let turns = (phase - w) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() <= 1e-6 * phase.abs().max(1.0));
    }

    /// Layouts built from gaps of at least the minimum spacing are accepted;
    /// shrinking one gap below the tolerated slack is rejected.
    #[test]
    fn layout_validation_tracks_the_spacing_floor(
        start in -10.0f64..10.0,
        extra in proptest::collection::vec(0.0f64..0.05, 1..6),
        shrink_idx in 0usize..5,
    ) {
        let sys = SystemParams::default();
        let delta = sys.min_spacing;
        let mut positions = vec![start];
        for e in &extra {
            let last = *positions.last().unwrap();
            positions.push(last + delta + e);
        }
        prop_assert!(AntennaLayout::new(positions.clone(), delta).is_ok());

        let idx = shrink_idx % extra.len();
        let mut bad = positions;
        bad[idx + 1] = bad[idx] + delta - 10.0 * SPACING_SLACK;
        // Keep the tail increasing so only the shrunk gap offends.
        for i in (idx + 2)..bad.len() {
            let prev = bad[i - 1];
            bad[i] = prev + delta + extra[i - 1];
        }
        prop_assert!(AntennaLayout::new(bad, delta).is_err());
    }

    /// No physical layout beats its own coherent upper bound.
    #[test]
    fn aligned_snr_dominates_any_realized_snr(
        user in finite_user(),
        offsets in proptest::collection::vec(0.0f64..0.1, 1..8),
        start in -20.0f64..20.0,
    ) {
        let sys_template = SystemParams::default();
        let delta = sys_template.min_spacing;
        let mut positions = vec![start];
        for o in &offsets {
            let last = *positions.last().unwrap();
            positions.push(last + delta + o);
        }
        let mut sys = sys_template;
        sys.num_antennas = positions.len();
        let layout = AntennaLayout::new(positions, delta).unwrap();
        let channel = channel_coefficients(&layout, &user, &sys);
        let realized = snr(&channel, &sys).unwrap();
        let bound = aligned_snr(&layout, &user, &sys);
        prop_assert!(realized <= bound * (1.0 + 1e-12));
    }

    /// Exact feasibility is never reported without necessary feasibility.
    #[test]
    fn exact_feasibility_implies_necessary_feasibility(
        user in finite_user(),
        urllc in urllc_strategy(),
        n in 1usize..9,
        power_dbm in -20.0f64..40.0,
    ) {
        let mut sys = SystemParams::default();
        sys.num_antennas = n;
        sys.transmit_power = 10f64.powf((power_dbm - 30.0) / 10.0);
        let thresholds = qos_snr_threshold(&urllc).unwrap();
        let feas = feasibility(&user, &sys, &thresholds);
        prop_assert!(!feas.exact_ok || feas.necessary_ok);
        // The margin sign agrees with the exact verdict.
        prop_assert_eq!(feas.exact_ok, feas.margin >= 0.0);
    }
}
