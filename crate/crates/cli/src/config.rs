//! Run configuration, stored as TOML. Every field has a default; the
//! defaults describe the N = 21, x = 2 instance with L1 = 10, L2 = 5.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shor_afs::layout::default_sizes;
use shor_afs::noise::{NoiseConfig, DEFAULT_OMEGA_HIGH_FACTOR, DEFAULT_SUBSTEPS};
use shor_afs::observables::Scope;
use shor_afs::pauli::parse_components;
use shor_afs::pipeline::CapturePolicy;
use shor_afs::{BackendKind, Pauli, RegisterLayout};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct RunConfig {
    pub circuit: CircuitConfig,
    pub noise: NoiseSection,
    pub capture: CaptureConfig,
    pub output: OutputConfig,
    pub trace: TraceConfig,
    pub noise_scan: NoiseScanConfig,
    pub state_noise: StateNoiseConfig,
    pub scaling: ScalingConfig,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    /// `N`.
    pub modulus: u64,
    /// `x`.
    pub base: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<usize>,
    pub backend: BackendKind,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self { modulus: 21, base: 2, l1: None, l2: None, backend: BackendKind::Dense }
    }
}

impl CircuitConfig {
    pub fn layout(&self) -> CliResult<RegisterLayout> {
        let layout = match (self.l1, self.l2) {
            (None, None) => RegisterLayout::new(self.modulus, self.base)?,
            (l1, l2) => {
                let (d1, d2) = default_sizes(self.modulus);
                RegisterLayout::with_registers(self.modulus, self.base, l1.unwrap_or(d1), l2.unwrap_or(d2))?
            }
        };
        Ok(layout)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Coupling in units of ħ/τ.
    pub lambda: f64,
    /// Active components, e.g. `"x"` or `"xz"`.
    pub components: String,
    pub samples: usize,
    pub seed: u64,
    pub omega_high_factor: f64,
    pub antithetic: bool,
    pub substeps: usize,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            lambda: 0.0015,
            components: "x".into(),
            samples: 40,
            seed: 1,
            omega_high_factor: DEFAULT_OMEGA_HIGH_FACTOR,
            antithetic: true,
            substeps: DEFAULT_SUBSTEPS,
        }
    }
}

impl NoiseSection {
    pub fn to_config(&self) -> CliResult<NoiseConfig> {
        let cfg = NoiseConfig {
            lambda: self.lambda,
            components: parse_components(&self.components)?,
            omega_high_factor: self.omega_high_factor,
            samples: self.samples,
            seed: self.seed,
            antithetic: self.antithetic,
            substeps: self.substeps,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptureMode {
    All,
    Boundaries,
    Steps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptureConfig {
    pub mode: CaptureMode,
    /// Used when `mode = "steps"`.
    pub steps: Vec<usize>,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        Self { mode: CaptureMode::All, steps: Vec::new() }
    }
}

impl CaptureConfig {
    pub fn policy(&self) -> CapturePolicy {
        match self.mode {
            CaptureMode::All => CapturePolicy::All,
            CaptureMode::Boundaries => CapturePolicy::PhaseBoundaries,
            CaptureMode::Steps => CapturePolicy::Steps(self.steps.iter().copied().collect::<BTreeSet<_>>()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), svg: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub components: String,
    pub scopes: Vec<Scope>,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { components: "xyz".into(), scopes: Scope::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseScanConfig {
    /// Steps to scan; every step `0..=Q` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateNoiseConfig {
    /// Step whose state is perturbed; `2·L1` (end of modular exponentiation) when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub lambdas: Vec<f64>,
    pub components: String,
}

impl Default for StateNoiseConfig {
    fn default() -> Self {
        Self { step: None, lambdas: vec![0.00075, 0.0015, 0.003, 0.006], components: "xyz".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingRun {
    pub modulus: u64,
    pub base: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<usize>,
    pub backend: BackendKind,
}

impl Default for ScalingRun {
    fn default() -> Self {
        Self { modulus: 21, base: 2, l1: None, l2: None, backend: BackendKind::Dense }
    }
}

impl ScalingRun {
    pub fn layout(&self) -> CliResult<RegisterLayout> {
        CircuitConfig { modulus: self.modulus, base: self.base, l1: self.l1, l2: self.l2, backend: self.backend }
            .layout()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub runs: Vec<ScalingRun>,
    /// Coupling used for the perturbative decoherence rates.
    pub lambda: f64,
    /// Steps of the run that fixes the autocorrelation shared by every size.
    pub reference_steps: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            runs: vec![
                ScalingRun::default(),
                ScalingRun { modulus: 513, base: 26, backend: BackendKind::Structured, ..Default::default() },
            ],
            lambda: 0.0015,
            reference_steps: 75,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub components: Option<String>,
    pub samples: Option<usize>,
    pub backend: Option<BackendKind>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(s) = o.seed {
            self.noise.seed = s;
        }
        if let Some(l) = o.lambda {
            self.noise.lambda = l;
        }
        if let Some(c) = &o.components {
            parse_components(c)?;
            self.noise.components = c.clone();
        }
        if let Some(n) = o.samples {
            self.noise.samples = n;
        }
        if let Some(b) = o.backend {
            self.circuit.backend = b;
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        self.output.svg |= o.svg;
        Ok(())
    }

    pub fn trace_components(&self) -> CliResult<Vec<Pauli>> {
        Ok(parse_components(&self.trace.components)?)
    }
}
