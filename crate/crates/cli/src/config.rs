//! JSON scenario configuration.
//!
//! Frequencies are given as ordinary frequencies `f` in Hz and converted to
//! angular frequencies `ω = 2πf`; decay and count rates (`gamma_*`) are plain
//! inverse seconds and are used as given.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use jpm_parity::decay::ResetPolicy;
use jpm_parity::protocol::{amplitude_for_occupation, parity_pulse};
use jpm_parity::{DrivePulse, Frame, JpmParams, QubitRegister};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const CONVENTION: &str = "f";

/// Top-level document. `params` is decoded against the schema of the named
/// scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub convention: String,
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub params: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterConfig {
    pub n_qubits: usize,
    /// `χ/2π`
    pub chi_hz: f64,
    pub omega_c_hz: f64,
    /// `ε_k/2π` per qubit; the first entry must be 0.
    pub epsilons_hz: Vec<f64>,
}

impl RegisterConfig {
    pub fn uniform(n_qubits: usize, chi_hz: f64) -> Self {
        Self {
            n_qubits,
            chi_hz,
            omega_c_hz: 6e9,
            epsilons_hz: vec![0.0; n_qubits],
        }
    }

    pub fn build(&self) -> Result<QubitRegister, CliError> {
        if self.epsilons_hz.len() != self.n_qubits {
            return Err(CliError::Config(format!(
                "register: {} epsilons for {} qubits",
                self.epsilons_hz.len(),
                self.n_qubits
            )));
        }
        QubitRegister::new(
            self.n_qubits,
            angular(self.chi_hz),
            self.epsilons_hz.iter().map(|&e| angular(e)).collect(),
            angular(self.omega_c_hz),
        )
        .map_err(|e| CliError::Config(format!("register: {e}")))
    }

    pub fn pulse(&self, target_occupation: f64) -> Result<(QubitRegister, DrivePulse), CliError> {
        let r = self.build()?;
        let a0 = amplitude_for_occupation(&r, target_occupation).map_err(|e| CliError::Config(e.to_string()))?;
        let p = parity_pulse(&r, a0).map_err(|e| CliError::Config(e.to_string()))?;
        Ok((r, p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JpmConfig {
    pub omega_j_hz: f64,
    /// `g_J/2π`
    pub g_j_hz: f64,
    pub gamma_j: f64,
    pub gamma_r: f64,
    pub gamma_d: f64,
}

impl JpmConfig {
    pub fn baseline(omega_j_hz: f64) -> Self {
        Self {
            omega_j_hz,
            g_j_hz: 50e6,
            gamma_j: 2e8,
            gamma_r: 2e8,
            gamma_d: 1e6,
        }
    }

    pub fn build(&self) -> Result<JpmParams, CliError> {
        let p = JpmParams {
            omega_j: angular(self.omega_j_hz),
            g_j: angular(self.g_j_hz),
            gamma_j: self.gamma_j,
            gamma_r: self.gamma_r,
            gamma_d: self.gamma_d,
            measured_level_energy: 0.0,
        };
        p.validate().map_err(|e| CliError::Config(format!("jpm: {e}")))?;
        Ok(p)
    }
}

/// `points` equally spaced times on `[0, t_end_s]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_end_s: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Vec<f64>, CliError> {
        if self.points < 2 || !(self.t_end_s > 0.0) || !self.t_end_s.is_finite() {
            return Err(CliError::Config(format!(
                "grid needs t_end_s > 0 and at least 2 points, got {} and {}",
                self.t_end_s, self.points
            )));
        }
        let n = self.points - 1;
        Ok((0..=n).map(|i| self.t_end_s * i as f64 / n as f64).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Params {
    pub register: RegisterConfig,
    pub target_occupation: f64,
    pub grid: GridConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Params {
    pub chi_hz: f64,
    pub omega_c_hz: f64,
    pub target_occupation: f64,
    pub cavity_dim: usize,
    pub jpm: JpmConfig,
    pub grid: GridConfig,
    pub contrast_window_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig4Params {
    pub chi_hz: f64,
    pub omega_c_hz: f64,
    pub target_occupation: f64,
    pub eps_over_chi_min: f64,
    pub eps_over_chi_max: f64,
    pub points: usize,
    /// `"log"` or `"linear"`
    pub spacing: String,
    pub jpm: JpmConfig,
}

impl Fig4Params {
    pub fn sweep(&self) -> Result<Vec<f64>, CliError> {
        let (lo, hi) = (self.eps_over_chi_min, self.eps_over_chi_max);
        if !(lo > 0.0 && hi > lo && hi < 1.0) || self.points < 2 {
            return Err(CliError::Config(format!(
                "need 0 < eps_over_chi_min < eps_over_chi_max < 1 and ≥ 2 points, got [{lo}, {hi}] x {}",
                self.points
            )));
        }
        let n = (self.points - 1) as f64;
        match self.spacing.as_str() {
            "log" => Ok((0..self.points)
                .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / n).exp())
                .collect()),
            "linear" => Ok((0..self.points).map(|i| lo + (hi - lo) * i as f64 / n).collect()),
            other => Err(CliError::Config(format!("spacing must be \"log\" or \"linear\", got {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayEnvelopeParams {
    pub occupations: Vec<f64>,
    pub photons_removed: Vec<usize>,
    pub reset_policy: String,
}

impl DecayEnvelopeParams {
    pub fn policy(&self) -> Result<ResetPolicy, CliError> {
        ResetPolicy::parse(&self.reset_policy).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JcOccupationParams {
    pub register: RegisterConfig,
    pub target_occupation: f64,
    /// `(ω_C − ω_Q)/2π`
    pub detuning_hz: f64,
    pub cavity_dim: usize,
    pub frame: String,
    pub grid: GridConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JcContrastParams {
    pub register: RegisterConfig,
    pub target_occupation: f64,
    pub detuning_hz: f64,
    pub cavity_dim: usize,
    pub frame: String,
    pub jpm: JpmConfig,
    pub grid: GridConfig,
    pub contrast_window_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyStateParams {
    pub occupation: f64,
    pub eps_over_chi: Vec<f64>,
    pub nbar: Vec<f64>,
}

pub fn parse_frame(s: &str) -> Result<Frame, CliError> {
    match s {
        "dressed" => Ok(Frame::Dressed),
        "bare" => Ok(Frame::Bare),
        other => Err(CliError::Config(format!("frame must be \"dressed\" or \"bare\", got {other:?}"))),
    }
}

pub fn angular(f: f64) -> f64 {
    2.0 * PI * f
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        cfg.check_header()?;
        Ok(cfg)
    }

    pub fn new<P: Serialize>(scenario: &str, params: &P) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            convention: CONVENTION.into(),
            scenario: scenario.into(),
            output: None,
            params: serde_json::to_value(params).expect("params serialize"),
        }
    }

    fn check_header(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.convention != CONVENTION {
            return Err(CliError::Config(format!(
                "convention must be \"{CONVENTION}\" (frequencies in Hz), got {:?}",
                self.convention
            )));
        }
        Ok(())
    }

    /// Decodes `params` into the schema of this scenario.
    pub fn params<P: for<'de> Deserialize<'de>>(&self) -> Result<P, CliError> {
        serde_json::from_value(self.params.clone())
            .map_err(|e| CliError::Config(format!("{}: invalid params: {e}", self.scenario)))
    }
}
