//! Result rendering: stable CSV and JSON encodings of sweep results,
//! placement reports, and threshold reports. All floating-point values in
//! CSV files carry nine significant digits; JSON keeps full precision.

use pinch_core::placement::PlacementResult;
use pinch_core::{Feasibility, QosThresholds, SweepResult, TrialRecord, UrllcParams, LN_2};
use serde::Serialize;

/// Unit used for externally reported rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateUnit {
    /// Bits per channel use (default).
    Bits,
    /// Nats per channel use.
    Nats,
}

impl RateUnit {
    /// Column-name suffix for rate fields.
    fn suffix(self) -> &'static str {
        match self {
            RateUnit::Bits => "bpcu",
            RateUnit::Nats => "npcu",
        }
    }

    /// Converts a rate held in bits per channel use to this unit.
    fn from_bits(self, bits: f64) -> f64 {
        match self {
            RateUnit::Bits => bits,
            RateUnit::Nats => bits * LN_2,
        }
    }

    /// Converts a rate held in nats per channel use to this unit.
    fn from_nats(self, nats: f64) -> f64 {
        match self {
            RateUnit::Bits => nats / LN_2,
            RateUnit::Nats => nats,
        }
    }
}

/// Formats a float with nine significant digits.
fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

// ---------------------------------------------------------------------------
// Sweep results
// ---------------------------------------------------------------------------

/// Renders sweep results as CSV: one header row, one row per sweep point.
pub fn render_sweep_csv(results: &[SweepResult], seed: u64, unit: RateUnit) -> String {
    let s = unit.suffix();
    let mut out = format!(
        "swept_parameter,value,mean_rate_pinching_{s},mean_rate_conventional_{s},outage_fraction,trials,seed\n"
    );
    for r in results {
        let conventional = r
            .mean_rate_conventional_bits
            .map(|v| sig9(unit.from_bits(v)))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.swept_parameter,
            sig9(r.swept_value),
            sig9(unit.from_bits(r.mean_rate_pinching_bits)),
            conventional,
            sig9(r.outage_fraction),
            r.trials,
            seed
        ));
    }
    out
}

#[derive(Serialize)]
struct SweepRowJson {
    swept_parameter: &'static str,
    value: f64,
    mean_rate_pinching: f64,
    mean_rate_conventional: Option<f64>,
    rate_unit: &'static str,
    outage_fraction: f64,
    trials: u64,
    alignment_failures: u64,
    seed: u64,
}

/// Renders sweep results as a JSON array mirroring the CSV schema, plus the
/// per-point alignment-failure count.
pub fn render_sweep_json(results: &[SweepResult], seed: u64, unit: RateUnit) -> String {
    let rows: Vec<SweepRowJson> = results
        .iter()
        .map(|r| SweepRowJson {
            swept_parameter: r.swept_parameter,
            value: r.swept_value,
            mean_rate_pinching: unit.from_bits(r.mean_rate_pinching_bits),
            mean_rate_conventional: r.mean_rate_conventional_bits.map(|v| unit.from_bits(v)),
            rate_unit: unit.suffix(),
            outage_fraction: r.outage_fraction,
            trials: r.trials,
            alignment_failures: r.alignment_failures,
            seed,
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("sweep rows serialize");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Per-trial dump
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TrialDumpPoint<'a> {
    swept_parameter: &'static str,
    swept_value: f64,
    trials: &'a [TrialRecord],
}

/// Renders the complete per-trial record set as JSON, one entry per sweep
/// point in sweep order.
pub fn render_trial_dump(results: &[SweepResult], records: &[Vec<TrialRecord>]) -> String {
    let points: Vec<TrialDumpPoint<'_>> = results
        .iter()
        .zip(records)
        .map(|(r, recs)| TrialDumpPoint {
            swept_parameter: r.swept_parameter,
            swept_value: r.swept_value,
            trials: recs,
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&points).expect("trial records serialize");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Placement reports
// ---------------------------------------------------------------------------

/// Renders a placement outcome as key,value CSV rows. List-valued fields
/// are semicolon-joined so the file stays one value per row.
pub fn render_place_csv(result: &PlacementResult, feas: &Feasibility, unit: RateUnit) -> String {
    let positions = result
        .layout
        .positions()
        .iter()
        .map(|&p| sig9(p))
        .collect::<Vec<_>>()
        .join(";");
    let residuals = result
        .phase_residuals
        .iter()
        .map(|&r| sig9(r))
        .collect::<Vec<_>>()
        .join(";");
    let mut out = String::from("field,value\n");
    out.push_str(&format!("positions_m,{positions}\n"));
    out.push_str(&format!("phase_residuals_rad,{residuals}\n"));
    out.push_str(&format!("snr,{}\n", sig9(result.snr_achieved)));
    out.push_str(&format!(
        "rate_{},{}\n",
        unit.suffix(),
        sig9(unit.from_nats(result.rate_nats))
    ));
    out.push_str(&format!("qos_satisfied,{}\n", result.qos_satisfied));
    out.push_str(&format!("feasible_necessary,{}\n", feas.necessary_ok));
    out.push_str(&format!("feasible_exact,{}\n", feas.exact_ok));
    out.push_str(&format!("feasibility_margin,{}\n", sig9(feas.margin)));
    out
}

#[derive(Serialize)]
struct PlaceJson<'a> {
    positions_m: &'a [f64],
    phase_residuals_rad: &'a [f64],
    snr: f64,
    rate: f64,
    rate_unit: &'static str,
    qos_satisfied: bool,
    feasible_necessary: bool,
    feasible_exact: bool,
    feasibility_margin: f64,
}

/// Renders a placement outcome as a JSON object.
pub fn render_place_json(result: &PlacementResult, feas: &Feasibility, unit: RateUnit) -> String {
    let obj = PlaceJson {
        positions_m: result.layout.positions(),
        phase_residuals_rad: &result.phase_residuals,
        snr: result.snr_achieved,
        rate: unit.from_nats(result.rate_nats),
        rate_unit: unit.suffix(),
        qos_satisfied: result.qos_satisfied,
        feasible_necessary: feas.necessary_ok,
        feasible_exact: feas.exact_ok,
        feasibility_margin: feas.margin,
    };
    let mut text = serde_json::to_string_pretty(&obj).expect("placement serializes");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Threshold reports
// ---------------------------------------------------------------------------

/// Renders the threshold report: one machine-parseable `key=value` line
/// followed by a human-readable block. Values on the machine line use the
/// shortest round-trip float encoding.
pub fn render_thresholds(urllc: &UrllcParams, thresholds: &QosThresholds) -> String {
    let target_nats = thresholds.target_rate_nats;
    let target_bits = target_nats / LN_2;
    let mut out = format!(
        "thresholds epsilon={} blocklength={} payload_bits={} tau={} nu0={} nu1={} nu2={} target_rate_nats={} target_rate_bpcu={}\n",
        urllc.epsilon(),
        urllc.blocklength(),
        urllc.payload_bits(),
        urllc.tau(),
        thresholds.nu0,
        thresholds.nu1,
        thresholds.nu2,
        target_nats,
        target_bits,
    );
    out.push_str(&format!(
        "\nQoS thresholds for epsilon = {:.3e}, blocklength = {} uses, payload = {} bits\n\
           dispersion coefficient tau      : {:.12}\n\
           stationary SNR nu0              : {:.12}\n\
           positive-rate SNR threshold nu1 : {:.12}\n\
           QoS SNR threshold nu2           : {:.12}\n\
           target rate                     : {:.12} nats/use = {:.12} bits/use\n",
        urllc.epsilon(),
        urllc.blocklength(),
        urllc.payload_bits(),
        urllc.tau(),
        thresholds.nu0,
        thresholds.nu1,
        thresholds.nu2,
        target_nats,
        target_bits,
    ));
    out
}
