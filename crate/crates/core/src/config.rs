//! Experiment parameters and physical constants.
//!
//! Configuration files are flat `key=value` text, one entry per line, with
//! `#` comments. Unknown keys are rejected. Durations may be set to `none`
//! to leave them undefined.

use serde::Serialize;

use crate::{Error, Result};

/// Bohr magneton, J/T (CODATA 2018).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Planck constant, J·s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// Minimum ESR/NMR frequency ratio before a warning is raised.
pub const MIN_LARMOR_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Electron Larmor frequency, Hz.
    pub esr_frequency: f64,
    /// Driven NMR transition frequency, Hz.
    pub nmr_frequency: f64,
    /// Static field B_0, tesla.
    pub field: f64,
    /// Sample temperature, kelvin.
    pub temperature: f64,
    /// Length of an ESR π-pulse, ns.
    pub esr_pi_duration: Option<f64>,
    /// Length of an NMR π-pulse, ns.
    pub nmr_pi_duration: Option<f64>,
    pub g_factor: f64,
    /// The two resolved ESR line positions, tesla. Metadata only.
    pub esr_line_fields: [f64; 2],
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            esr_frequency: 9.49e9,
            nmr_frequency: 28.05e6,
            field: 0.3387,
            temperature: 40.0,
            esr_pi_duration: Some(32.0),
            nmr_pi_duration: Some(1600.0),
            g_factor: 2.0,
            esr_line_fields: [0.3382, 0.3392],
        }
    }
}

impl ExperimentConfig {
    /// Checks positivity of every quantity. Returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let positive = [
            ("esr_frequency", Some(self.esr_frequency)),
            ("nmr_frequency", Some(self.nmr_frequency)),
            ("field", Some(self.field)),
            ("temperature", Some(self.temperature)),
            ("esr_pi_duration", self.esr_pi_duration),
            ("nmr_pi_duration", self.nmr_pi_duration),
            ("g_factor", Some(self.g_factor)),
            ("esr_line_low", Some(self.esr_line_fields[0])),
            ("esr_line_high", Some(self.esr_line_fields[1])),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!(
                        "{name} must be positive and finite, got {v}"
                    )));
                }
            }
        }
        let mut warnings = Vec::new();
        let ratio = self.esr_frequency / self.nmr_frequency;
        if ratio <= MIN_LARMOR_RATIO {
            warnings.push(format!(
                "ESR/NMR frequency ratio {ratio:.3} does not exceed {MIN_LARMOR_RATIO}; \
                 the electron-only thermal polarization model is questionable"
            ));
        }
        Ok(warnings)
    }

    /// Parses a `key=value` file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || -> Result<f64> {
                value.parse::<f64>().map_err(|_| {
                    Error::Config(format!(
                        "line {}: '{value}' is not a number for {key}",
                        no + 1
                    ))
                })
            };
            let opt = || -> Result<Option<f64>> {
                if value.eq_ignore_ascii_case("none") {
                    Ok(None)
                } else {
                    num().map(Some)
                }
            };
            match key {
                "esr_frequency" => cfg.esr_frequency = num()?,
                "nmr_frequency" => cfg.nmr_frequency = num()?,
                "field" => cfg.field = num()?,
                "temperature" => cfg.temperature = num()?,
                "esr_pi_duration" => cfg.esr_pi_duration = opt()?,
                "nmr_pi_duration" => cfg.nmr_pi_duration = opt()?,
                "g_factor" => cfg.g_factor = num()?,
                "esr_line_low" => cfg.esr_line_fields[0] = num()?,
                "esr_line_high" => cfg.esr_line_fields[1] = num()?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{other}'",
                        no + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Renders the config in the file format accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let d = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        format!(
            "esr_frequency={}\nnmr_frequency={}\nfield={}\ntemperature={}\n\
             esr_pi_duration={}\nnmr_pi_duration={}\ng_factor={}\n\
             esr_line_low={}\nesr_line_high={}\n",
            self.esr_frequency,
            self.nmr_frequency,
            self.field,
            self.temperature,
            d(self.esr_pi_duration),
            d(self.nmr_pi_duration),
            self.g_factor,
            self.esr_line_fields[0],
            self.esr_line_fields[1],
        )
    }
}
