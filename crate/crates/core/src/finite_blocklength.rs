//! Short-packet achievable rate over an AWGN link and the SNR thresholds
//! attached to a reliability target.
//!
//! The model is the normal approximation for decoding with blocklength `l`
//! and block error probability `epsilon`:
//!
//! ```text
//! R(gamma) = ln(1 + gamma) - tau * sqrt(1 - (1 + gamma)^-2)   [nats/use]
//! tau      = Qinv(epsilon) / sqrt(l)
//! ```
//!
//! `R` dips below the Shannon rate by a dispersion penalty, is unimodal with
//! a single interior minimum, and crosses any attainable rate target from
//! below exactly once past that minimum. Three SNR thresholds organize the
//! curve:
//!
//! - `nu0`: the stationary point, where `R'(nu0) = 0`;
//! - `nu1`: the positive SNR where `R` returns to zero;
//! - `nu2`: the SNR where `R` meets the payload target `(B / l) * ln 2`.
//!
//! `nu1` and `nu2` come from a two-parameter generalized Lambert W function
//! evaluated on its principal branch, with a bisection fallback on the
//! defining equation when the series representation converges too slowly.
//!
//! All rates in this module are nats per channel use; conversion to bits is
//! a reporting concern and happens at output boundaries only.

use crate::error::{CoreError, Result};

/// Natural log of 2; the nats-per-use value of a one-bit-per-use target.
pub const LN_2: f64 = std::f64::consts::LN_2;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// SNR below this is treated as exactly zero rate to avoid noise-floor
/// cancellation in the dispersion term.
const SNR_RATE_FLOOR: f64 = 1e-12;

/// Hard cap on the number of series terms for the generalized Lambert W.
const W_SERIES_MAX_TERMS: u32 = 100;

/// A series term below this magnitude terminates summation successfully.
const W_SERIES_TERM_TOL: f64 = 1e-14;

/// Series terms must shrink monotonically once this many terms are in.
const W_SERIES_MONOTONE_AFTER: u32 = 10;

/// Absolute x-width tolerance for bisection on the W defining equation.
const W_BISECT_TOL: f64 = 1e-13;

// ---------------------------------------------------------------------------
// Reliability parameters
// ---------------------------------------------------------------------------

/// Reliability and latency parameters of one short-packet link.
///
/// `tau` is derived from `epsilon` and `blocklength` at construction and kept
/// consistent by the `with_*` updaters; fields are therefore private.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct UrllcParams {
    epsilon: f64,
    blocklength: u32,
    payload_bits: u32,
    tau: f64,
}

impl UrllcParams {
    /// Validates and builds the parameter set, deriving `tau`.
    pub fn new(epsilon: f64, blocklength: u32, payload_bits: u32) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 0.5 {
            return Err(CoreError::InvalidParameter {
                field: "epsilon",
                reason: format!("must lie in (0, 0.5), got {epsilon}"),
            });
        }
        if blocklength == 0 {
            return Err(CoreError::InvalidParameter {
                field: "blocklength",
                reason: "must be at least 1 channel use".into(),
            });
        }
        if payload_bits == 0 {
            return Err(CoreError::InvalidParameter {
                field: "payload_bits",
                reason: "must be at least 1 bit".into(),
            });
        }
        let tau = inverse_q(epsilon)? / (blocklength as f64).sqrt();
        Ok(Self {
            epsilon,
            blocklength,
            payload_bits,
            tau,
        })
    }

    /// Block error probability target.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Blocklength in channel uses.
    pub fn blocklength(&self) -> u32 {
        self.blocklength
    }

    /// Payload size in bits.
    pub fn payload_bits(&self) -> u32 {
        self.payload_bits
    }

    /// Dispersion coefficient `Qinv(epsilon) / sqrt(l)`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Rate the link must reach to carry the payload, in nats per use.
    pub fn target_rate_nats(&self) -> f64 {
        self.payload_bits as f64 / self.blocklength as f64 * LN_2
    }

    /// Same parameters with a new error probability; `tau` is recomputed.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.blocklength, self.payload_bits)
    }

    /// Same parameters with a new blocklength; `tau` is recomputed.
    pub fn with_blocklength(&self, blocklength: u32) -> Result<Self> {
        Self::new(self.epsilon, blocklength, self.payload_bits)
    }

    /// Same parameters with a new payload size.
    pub fn with_payload_bits(&self, payload_bits: u32) -> Result<Self> {
        Self::new(self.epsilon, self.blocklength, payload_bits)
    }
}

/// The three SNR thresholds of the rate curve for one parameter set,
/// plus the rate target they were computed for.
///
/// For `tau > 0` the ordering `0 < nu0 < nu1 < nu2` always holds (assuming a
/// positive target); at `tau = 0` the curve is the Shannon rate and the two
/// lower thresholds collapse to zero.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QosThresholds {
    /// Stationary point of the rate curve: `R'(nu0) = 0`.
    pub nu0: f64,
    /// Positive root of `R(gamma) = 0`.
    pub nu1: f64,
    /// Root of `R(gamma) = target_rate_nats`.
    pub nu2: f64,
    /// The rate target, `(B / l) * ln 2`, in nats per use.
    pub target_rate_nats: f64,
}

// ---------------------------------------------------------------------------
// Gaussian tail quantile
// ---------------------------------------------------------------------------

/// Upper-tail probability of the standard normal distribution.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse of [`q_function`]: the `x` with `Q(x) = p`, for `p` in (0, 1).
///
/// A rational starting approximation of the normal quantile is polished with
/// Newton steps against the tail integral itself, giving relative accuracy
/// better than 1e-12 across the domain.
pub fn inverse_q(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 || p >= 1.0 {
        return Err(CoreError::Domain {
            op: "inverse_q",
            reason: format!("probability must lie in (0, 1), got {p}"),
        });
    }
    // Q(x) = p  <=>  x = -PhiInv(p).
    let mut x = -normal_quantile_estimate(p);
    // Newton on f(x) = Q(x) - p with f'(x) = -phi(x). Two steps take the
    // ~1e-9 seed error to machine precision; a third guards hard tails.
    for _ in 0..3 {
        let err = q_function(x) - p;
        if err == 0.0 {
            break;
        }
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf == 0.0 {
            break;
        }
        let step = err / pdf;
        x += step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Rational approximation of the standard normal quantile (lower tail
/// probability convention), accurate to about 1.2e-9 relative error.
fn normal_quantile_estimate(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

// ---------------------------------------------------------------------------
// Rate curve
// ---------------------------------------------------------------------------

/// Achievable rate in nats per channel use at SNR `gamma` with dispersion
/// coefficient `tau`.
///
/// SNRs below 1e-12 return exactly 0. The value is negative for SNRs between
/// zero and the [`QosThresholds::nu1`] crossing when `tau > 0`; callers that
/// need a delivered rate clamp at zero themselves.
pub fn achievable_rate(gamma: f64, tau: f64) -> Result<f64> {
    check_rate_args("achievable_rate", gamma, tau)?;
    if gamma < SNR_RATE_FLOOR {
        return Ok(0.0);
    }
    // 1 - (1 + g)^-2 written as g(g + 2) / (1 + g)^2 to keep precision for
    // small g.
    let one_plus = 1.0 + gamma;
    let dispersion = (gamma * (gamma + 2.0)).sqrt() / one_plus;
    Ok(gamma.ln_1p() - tau * dispersion)
}

/// Closed-form derivative of [`achievable_rate`] with respect to `gamma`.
///
/// Requires `gamma > 0`: the dispersion slope is unbounded at zero SNR.
pub fn rate_derivative(gamma: f64, tau: f64) -> Result<f64> {
    check_rate_args("rate_derivative", gamma, tau)?;
    if gamma == 0.0 {
        return Err(CoreError::Domain {
            op: "rate_derivative",
            reason: "derivative is unbounded at gamma = 0".into(),
        });
    }
    let one_plus = 1.0 + gamma;
    let root = (gamma * (gamma + 2.0)).sqrt();
    Ok((1.0 - tau / (one_plus * root)) / one_plus)
}

fn check_rate_args(op: &'static str, gamma: f64, tau: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(CoreError::Domain {
            op,
            reason: format!("SNR must be finite and non-negative, got {gamma}"),
        });
    }
    if !tau.is_finite() || tau < 0.0 {
        return Err(CoreError::Domain {
            op,
            reason: format!("dispersion coefficient must be finite and non-negative, got {tau}"),
        });
    }
    Ok(())
}

/// SNR at which the rate curve is stationary: the unique `nu0 > 0` with
/// `R'(nu0) = 0` (zero when `tau = 0`).
pub fn stationary_snr(tau: f64) -> f64 {
    assert!(
        tau.is_finite() && tau >= 0.0,
        "dispersion coefficient must be finite and non-negative"
    );
    ((1.0 + (1.0 + 4.0 * tau * tau).sqrt()) / 2.0).sqrt() - 1.0
}

// ---------------------------------------------------------------------------
// Bessel polynomials and the generalized Lambert W
// ---------------------------------------------------------------------------

/// Bessel polynomial `B_m(z) = sum_{k=0}^{m} (m+k)! / (k! (m-k)!) (z/2)^k`.
///
/// Terms are built incrementally from coefficient ratios, so no raw factorial
/// is ever formed; an overflow error is returned only if the polynomial value
/// itself leaves f64 range.
pub fn bessel_polynomial(m: u32, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(CoreError::Domain {
            op: "bessel_polynomial",
            reason: format!("argument must be finite, got {z}"),
        });
    }
    let mf = m as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..m {
        let kf = k as f64;
        // coeff ratio (m+k+1)(m-k) / (k+1), one extra factor of z/2
        term *= (mf + kf + 1.0) * (mf - kf) / (kf + 1.0) * (z / 2.0);
        sum += term;
        if !sum.is_finite() {
            return Err(CoreError::Overflow {
                op: "bessel_polynomial",
                order: m,
            });
        }
    }
    Ok(sum)
}

/// Evaluation strategy for [`generalized_lambert_w`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambertMethod {
    /// Term series; errs with [`CoreError::SeriesDiverged`] when it cannot
    /// reach tolerance.
    Series,
    /// Bisection on the defining equation over the principal bracket.
    Root,
    /// Series first, silent fallback to bisection when the series gives up.
    Auto,
}

/// Generalized Lambert W: solves `(x - iota1)(x - iota2) e^x = mu` for the
/// root on the branch adjacent to `iota1`.
///
/// The product `(x - iota1)(x - iota2) e^x` dips to a negative minimum at
/// `x_min` between the two offsets; for `mu` in `(minimum, 0]` exactly one
/// root lies in `[x_min, iota1]`, and that root is returned. The series form
/// is
///
/// ```text
/// W = iota1 - sum_{m>=1} (1/(m m!)) (mu m e^-iota1 / (iota2-iota1))^m
///                        B_{m-1}(-2 / (m (iota2-iota1)))
/// ```
///
/// truncated when a term magnitude drops below 1e-14 or after 100 terms.
/// Terms must keep shrinking once ten are in, and the budget must end in
/// tolerance; otherwise the series declares non-convergence.
pub fn generalized_lambert_w(
    iota1: f64,
    iota2: f64,
    mu: f64,
    method: LambertMethod,
) -> Result<f64> {
    if !(iota1.is_finite() && iota2.is_finite() && mu.is_finite()) || iota1 <= iota2 {
        return Err(CoreError::Domain {
            op: "generalized_lambert_w",
            reason: format!("requires finite arguments with iota1 > iota2, got ({iota1}, {iota2}, {mu})"),
        });
    }
    if mu > 0.0 {
        return Err(CoreError::Domain {
            op: "generalized_lambert_w",
            reason: format!("mu must be non-positive on this branch, got {mu}"),
        });
    }
    if mu == 0.0 {
        return Ok(iota1);
    }
    let x_min = branch_bracket_low(iota1, iota2);
    let guard = -(iota1 - iota2).powi(2) / 4.0 * x_min.exp();
    if mu <= guard {
        return Err(CoreError::Domain {
            op: "generalized_lambert_w",
            reason: format!("mu = {mu:e} is below the branch guard {guard:e}"),
        });
    }
    match method {
        LambertMethod::Series => lambert_series(iota1, iota2, mu),
        LambertMethod::Root => lambert_root(iota1, iota2, mu, x_min),
        LambertMethod::Auto => match lambert_series(iota1, iota2, mu) {
            Ok(w) => Ok(w),
            Err(CoreError::SeriesDiverged { .. }) | Err(CoreError::Overflow { .. }) => {
                lambert_root(iota1, iota2, mu, x_min)
            }
            Err(other) => Err(other),
        },
    }
}

/// Location of the minimum of `(x - iota1)(x - iota2) e^x` between the
/// offsets; lower end of the principal bracket.
fn branch_bracket_low(iota1: f64, iota2: f64) -> f64 {
    // Stationary points solve x^2 + (2 - i1 - i2) x + (i1 i2 - i1 - i2) = 0;
    // the larger root is the one between iota2 and iota1.
    let b = 2.0 - iota1 - iota2;
    let c = iota1 * iota2 - iota1 - iota2;
    (-b + (b * b - 4.0 * c).sqrt()) / 2.0
}

fn lambert_series(iota1: f64, iota2: f64, mu: f64) -> Result<f64> {
    let spread = iota2 - iota1;
    let scale = mu * (-iota1).exp() / spread;
    let mut sum = iota1;
    let mut factorial = 1.0;
    let mut prev_mag = f64::INFINITY;
    for m in 1..=W_SERIES_MAX_TERMS {
        let mf = m as f64;
        factorial *= mf;
        let bessel = bessel_polynomial(m - 1, -2.0 / (mf * spread))?;
        let term = (scale * mf).powi(m as i32) / (mf * factorial) * bessel;
        if !term.is_finite() {
            return Err(CoreError::Overflow {
                op: "generalized_lambert_w",
                order: m,
            });
        }
        sum -= term;
        let mag = term.abs();
        if mag < W_SERIES_TERM_TOL {
            return Ok(sum);
        }
        if m > W_SERIES_MONOTONE_AFTER && mag > prev_mag {
            return Err(CoreError::SeriesDiverged {
                terms: m,
                last_term: mag,
            });
        }
        prev_mag = mag;
    }
    Err(CoreError::SeriesDiverged {
        terms: W_SERIES_MAX_TERMS,
        last_term: prev_mag,
    })
}

fn lambert_root(iota1: f64, iota2: f64, mu: f64, x_min: f64) -> Result<f64> {
    let h = |x: f64| (x - iota1) * (x - iota2) * x.exp() - mu;
    let (mut lo, mut hi) = (x_min, iota1);
    let h_lo = h(lo);
    if h_lo > 0.0 {
        // mu sits below the actual curve minimum: no root on the branch.
        return Err(CoreError::InfeasibleBranch {
            mu,
            minimum: h_lo + mu,
        });
    }
    // h(hi) = -mu > 0, so the bracket is valid; bisect to x-width tolerance.
    while hi - lo > W_BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

/// All three SNR thresholds for a reliability parameter set.
pub fn qos_snr_threshold(params: &UrllcParams) -> Result<QosThresholds> {
    thresholds_from_tau(params.tau(), params.target_rate_nats())
}

/// Thresholds from a raw dispersion coefficient and a rate target in nats.
///
/// Exposed separately so degenerate dispersion (`tau = 0`, the Shannon
/// limit) can be probed directly; [`UrllcParams`] always yields `tau > 0`.
pub fn thresholds_from_tau(tau: f64, target_rate_nats: f64) -> Result<QosThresholds> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(CoreError::Domain {
            op: "thresholds_from_tau",
            reason: format!("dispersion coefficient must be finite and non-negative, got {tau}"),
        });
    }
    if !target_rate_nats.is_finite() || target_rate_nats <= 0.0 {
        return Err(CoreError::Domain {
            op: "thresholds_from_tau",
            reason: format!("rate target must be positive, got {target_rate_nats}"),
        });
    }
    if tau == 0.0 {
        return Ok(QosThresholds {
            nu0: 0.0,
            nu1: 0.0,
            nu2: target_rate_nats.exp_m1(),
            target_rate_nats,
        });
    }
    let (iota1, iota2) = (2.0 * tau, -2.0 * tau);
    // R(gamma) = beta maps to the defining equation via 1 + gamma =
    // exp(K/2 + beta) with mu = -4 tau^2 e^{-2 beta}; beta = 0 gives nu1.
    let k1 = generalized_lambert_w(iota1, iota2, -4.0 * tau * tau, LambertMethod::Auto)?;
    let nu1 = (k1 / 2.0).exp() - 1.0;
    let mu2 = -4.0 * tau * tau * (-2.0 * target_rate_nats).exp();
    let k2 = generalized_lambert_w(iota1, iota2, mu2, LambertMethod::Auto)?;
    let nu2 = (k2 / 2.0 + target_rate_nats).exp() - 1.0;
    let nu0 = stationary_snr(tau);
    debug_assert!(nu0 > 0.0 && nu1 > nu0 && nu2 > nu1, "threshold ordering");
    Ok(QosThresholds {
        nu0,
        nu1,
        nu2,
        target_rate_nats,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
