//! Run configuration: a TOML document with `system`, `urllc`, and
//! `simulation` sections plus output settings. Every field is optional;
//! omitted fields take the built-in defaults, so the empty document is a
//! complete, valid configuration.

use std::path::PathBuf;

use pinch_core::{SimulationConfig, Sweep, SystemParams, UrllcParams};
use serde::{Deserialize, Serialize};

/// Errors from reading or validating a configuration.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// The document is not well-formed or names an unknown field.
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    /// A field value violates its invariant.
    #[error("config invalid: {0}")]
    Invalid(#[from] pinch_core::CoreError),
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// `system` section. Serialized names carry the symbol conventions used in
/// the project documentation and are stable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub light_speed: Option<f64>,
    #[serde(rename = "height_d", skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_eff: Option<f64>,
    #[serde(rename = "min_spacing_delta", skip_serializing_if = "Option::is_none")]
    pub min_spacing: Option<f64>,
    #[serde(rename = "noise_power_sigma2", skip_serializing_if = "Option::is_none")]
    pub noise_power: Option<f64>,
    #[serde(rename = "transmit_power_pt", skip_serializing_if = "Option::is_none")]
    pub transmit_power: Option<f64>,
    #[serde(rename = "num_antennas_N", skip_serializing_if = "Option::is_none")]
    pub num_antennas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feed_x: Option<f64>,
}

/// `urllc` section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UrllcSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(rename = "blocklength_l", skip_serializing_if = "Option::is_none")]
    pub blocklength: Option<u32>,
    #[serde(rename = "payload_bits_B", skip_serializing_if = "Option::is_none")]
    pub payload_bits: Option<u32>,
}

/// `simulation` section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(rename = "area_side_d", skip_serializing_if = "Option::is_none")]
    pub area_side: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_enabled: Option<bool>,
}

/// The full configuration document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "is_default_system")]
    pub system: SystemSection,
    #[serde(default, skip_serializing_if = "is_default_urllc")]
    pub urllc: UrllcSection,
    #[serde(default, skip_serializing_if = "is_default_simulation")]
    pub simulation: SimulationSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_format: Option<OutputFormat>,
}

fn is_default_system(s: &SystemSection) -> bool {
    *s == SystemSection::default()
}
fn is_default_urllc(s: &UrllcSection) -> bool {
    *s == UrllcSection::default()
}
fn is_default_simulation(s: &SimulationSection) -> bool {
    *s == SimulationSection::default()
}

/// A validated configuration with every default applied.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub system: SystemParams,
    pub urllc: UrllcParams,
    /// Simulation settings; `sweep` is `None` until a sweep is chosen by the
    /// config file or the command line.
    pub area_side: f64,
    pub num_trials: u64,
    pub master_seed: u64,
    pub sweep: Option<Sweep>,
    pub baseline_enabled: bool,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl ResolvedConfig {
    /// The simulation config for the chosen sweep.
    pub fn simulation(&self, sweep: Sweep) -> SimulationConfig {
        SimulationConfig {
            area_side: self.area_side,
            num_trials: self.num_trials,
            master_seed: self.master_seed,
            sweep,
            baseline_enabled: self.baseline_enabled,
        }
    }
}

/// Parses a configuration document. Unknown fields are rejected by name;
/// value invariants are checked on resolution.
pub fn parse_config(contents: &str) -> Result<RunConfig, ConfigError> {
    Ok(toml::from_str(contents)?)
}

impl RunConfig {
    /// Applies defaults and validates every field, returning the concrete
    /// parameter sets. The default minimum spacing is half the carrier
    /// wavelength computed from the (possibly overridden) carrier frequency
    /// and propagation speed.
    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        let mut sys = SystemParams::default();
        if let Some(v) = self.system.carrier_hz {
            sys.carrier_hz = v;
        }
        if let Some(v) = self.system.light_speed {
            sys.light_speed = v;
        }
        // Recompute the spacing default from the resolved carrier before any
        // explicit override.
        if sys.carrier_hz > 0.0 && sys.light_speed > 0.0 {
            sys.min_spacing = sys.light_speed / sys.carrier_hz / 2.0;
        }
        if let Some(v) = self.system.height {
            sys.height = v;
        }
        if let Some(v) = self.system.n_eff {
            sys.n_eff = v;
        }
        if let Some(v) = self.system.min_spacing {
            sys.min_spacing = v;
        }
        if let Some(v) = self.system.noise_power {
            sys.noise_power = v;
        }
        if let Some(v) = self.system.transmit_power {
            sys.transmit_power = v;
        }
        if let Some(v) = self.system.num_antennas {
            sys.num_antennas = v;
        }
        if let Some(v) = self.system.feed_x {
            sys.feed_x = v;
        }
        sys.validate()?;

        let urllc = UrllcParams::new(
            self.urllc.epsilon.unwrap_or(1e-5),
            self.urllc.blocklength.unwrap_or(256),
            self.urllc.payload_bits.unwrap_or(256),
        )?;

        let area_side = self.simulation.area_side.unwrap_or(10.0);
        let num_trials = self.simulation.num_trials.unwrap_or(1000);
        let master_seed = self.simulation.master_seed.unwrap_or(0);
        let sweep = self.simulation.sweep.clone();
        let baseline_enabled = self.simulation.baseline_enabled.unwrap_or(true);

        // Validate the simulation block (with a placeholder sweep when none
        // is configured — the sweep itself is validated again at run time).
        let probe_sweep = sweep.clone().unwrap_or(Sweep::Power(vec![0.0]));
        SimulationConfig {
            area_side,
            num_trials,
            master_seed,
            sweep: probe_sweep,
            baseline_enabled,
        }
        .validate()?;

        Ok(ResolvedConfig {
            system: sys,
            urllc,
            area_side,
            num_trials,
            master_seed,
            sweep,
            baseline_enabled,
            output_path: self.output_path.clone(),
            output_format: self.output_format.unwrap_or(OutputFormat::Csv),
        })
    }
}
