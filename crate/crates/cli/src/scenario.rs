//! Scenario files: TOML documents describing one experiment.
//!
//! Every numeric key carries its unit in the name (`opd_um`, `lambda0_nm`,
//! `angle_deg`, ...) or is explicitly dimensionless (`mono_fraction`,
//! `transmission_fraction`, `n_max_passes`). Unknown keys, including bare
//! names such as `opd`, are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::RunError;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub description: Option<String>,
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
    #[serde(default)]
    pub two_photon: Option<TwoPhotonSpec>,
    #[serde(default)]
    pub run: RunSpec,
    /// Directory used to resolve relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    OnePhotonCavity,
    OnePhotonDissipative,
    TwoPhoton,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub lambda0_nm: Option<f64>,
    pub delta_lambda_nm: Option<f64>,
    #[serde(default)]
    pub mono_fraction: f64,
    /// Two-column `omega_rad_per_s density` file.
    pub tabulated_file: Option<String>,
    /// Two-photon only; defaults to half the daughter wavelength.
    pub pump_wavelength_nm: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    /// Named states: `H`, `V`, `45`, `-45`, `R`, `L` or Bell states
    /// `phi_plus`, `phi_minus`, `psi_plus`, `psi_minus`.
    #[serde(default)]
    pub states: Vec<String>,
    /// Additional linear polarization inputs.
    #[serde(default)]
    pub linear_angles_deg: Vec<f64>,
    /// Explicit density matrix, real and imaginary parts.
    pub matrix_re: Option<Vec<Vec<f64>>>,
    pub matrix_im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSpec {
    Birefringent {
        opd_um: f64,
        #[serde(default)]
        axis_angle_deg: f64,
        #[serde(default)]
        control_only: bool,
    },
    Exchange {
        #[serde(default)]
        exchange: ExchangeSpec,
        #[serde(default)]
        control_only: bool,
    },
    Rotator {
        angle_deg: f64,
        #[serde(default)]
        control_only: bool,
    },
    Attenuator {
        transmission_fraction: f64,
        arm: ArmSpec,
        #[serde(default)]
        control_only: bool,
    },
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeSpec {
    #[default]
    Reflection,
    Rotation,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
pub enum ArmSpec {
    H,
    V,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct TwoPhotonSpec {
    pub opd_l_um: Option<f64>,
    pub opd_r_um: Option<f64>,
    /// Path difference in units of the daughter central wavelength, both arms.
    pub opd_waves: Option<f64>,
    #[serde(default)]
    pub theta_l_deg: f64,
    #[serde(default)]
    pub theta_r_deg: f64,
    /// Evaluate at each of these `θ_R` values instead of `theta_r_deg`.
    #[serde(default)]
    pub theta_r_sweep_deg: Vec<f64>,
    /// Sets `θ_L = θ_R − 90°`.
    #[serde(default)]
    pub anticorrelated: bool,
    #[serde(default)]
    pub tune_singlet_phase: bool,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    On,
    Off,
    #[default]
    Both,
}

impl Control {
    pub fn flags(&self) -> &'static [bool] {
        match self {
            Control::On => &[true],
            Control::Off => &[false],
            Control::Both => &[false, true],
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    #[default]
    Auto,
    Quadrature,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// Analyzer follows the center-frequency retardance.
    Visibility,
    /// Analyzer fixed at the input polarization.
    VisibilityFixedAnalyzer,
    DegreeOfPolarization,
    Survival,
    Purity,
    Stokes,
    Fidelity,
    FidelityUntuned,
    SingletPhase,
    SampledDegreeOfPolarization,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DumpFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "default_n_min")]
    pub n_min_passes: usize,
    #[serde(default = "default_n_max")]
    pub n_max_passes: usize,
    #[serde(default)]
    pub control: Control,
    #[serde(default)]
    pub method: MethodSpec,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub matrix_dump: Option<DumpFormat>,
    #[serde(default)]
    pub shots_per_basis: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            n_min_passes: default_n_min(),
            n_max_passes: default_n_max(),
            control: Control::default(),
            method: MethodSpec::default(),
            outputs: default_outputs(),
            matrix_dump: None,
            shots_per_basis: 0,
            seed: 0,
            quadrature_nodes: default_nodes(),
        }
    }
}

fn default_n_min() -> usize {
    1
}

fn default_n_max() -> usize {
    10
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Visibility]
}

fn default_nodes() -> usize {
    decohere::quadrature::DEFAULT_NODES
}

impl Scenario {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, RunError> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|span| text[..span.start].lines().count().max(1));
            let mut message = e.message().to_string();
            if message.starts_with("unknown field") {
                message.push_str(" (numeric keys carry a unit suffix such as _um, _nm, _deg)");
            }
            RunError::Parse { line, message }
        })?;
        s.base_dir = base_dir.into();
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, dir)
    }
}
