//! Run configuration: a TOML document with one section per module.
//!
//! Unknown keys are rejected everywhere. Missing sections and fields fall
//! back to the simulation defaults (8 antennas, `kappa = 5`, exponential
//! correlation with `tau = 0.3`, the standard harvester curve).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wetbench_core::channel::{ArrayConfig, CorrelationModel, PhaseShift};
use wetbench_core::harvester::{dbm_to_mw, EhCurve};
use wetbench_core::optimize::{aa_is_shift, max_energy_shift, min_var_shift, Objective};
use wetbench_core::scenario::{Group, GroupKind};
use wetbench_core::schemes::Scheme;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Curves,
    Distributions,
    Optimize,
    Validate,
    Scenario,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Curves => "curves",
            Kind::Distributions => "distributions",
            Kind::Optimize => "optimize",
            Kind::Validate => "validate",
            Kind::Scenario => "scenario",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    /// Output directory; excluded from the config hash.
    pub output: Option<String>,
    pub array: ArraySection,
    pub harvester: HarvesterSection,
    pub curves: CurvesSection,
    pub distributions: DistributionsSection,
    pub optimize: OptimizeSection,
    pub validate: ValidateSection,
    pub scenario: ScenarioSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CorrelationSection {
    Exponential { tau: f64 },
    Uniform { rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub m: usize,
    pub kappa: f64,
    /// Fixed azimuth, rad; absent means uniform random per sample.
    pub phi: Option<f64>,
    pub phi0: Option<f64>,
    pub correlation: CorrelationSection,
}

impl Default for ArraySection {
    fn default() -> Self {
        ArraySection {
            m: 8,
            kappa: 5.0,
            phi: None,
            phi0: None,
            correlation: CorrelationSection::Exponential { tau: 0.3 },
        }
    }
}

impl ArraySection {
    pub fn build(&self) -> Result<ArrayConfig, CliError> {
        let correlation = match self.correlation {
            CorrelationSection::Exponential { tau } => CorrelationModel::Exponential { tau },
            CorrelationSection::Uniform { rho } => CorrelationModel::Uniform { rho },
        };
        let mut config = ArrayConfig::new(self.m, self.kappa, self.phi.unwrap_or(0.0), correlation)
            .map_err(|e| CliError::config(format!("array: {e}")))?;
        if let Some(phi0) = self.phi0 {
            config = config.with_phi0(phi0);
            config
                .validate()
                .map_err(|e| CliError::config(format!("array.phi0: {e}")))?;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarvesterSection {
    pub g_max: f64,
    pub a: f64,
    pub b: f64,
    pub xi0_dbm: f64,
}

impl Default for HarvesterSection {
    fn default() -> Self {
        HarvesterSection {
            g_max: 2.0,
            a: 0.56,
            b: 3.5,
            xi0_dbm: -2.0,
        }
    }
}

impl HarvesterSection {
    pub fn build(&self) -> Result<EhCurve, CliError> {
        EhCurve::new(self.g_max, self.a, self.b, dbm_to_mw(self.xi0_dbm))
            .map_err(|e| CliError::config(format!("harvester: {e}")))
    }
}

/// Scheme together with its preventive phase shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    AaSsMaxE,
    AaSsMinVar,
    AaIs,
    Sa,
}

impl SchemeChoice {
    pub const ALL: [SchemeChoice; 4] = [
        SchemeChoice::AaSsMaxE,
        SchemeChoice::AaSsMinVar,
        SchemeChoice::AaIs,
        SchemeChoice::Sa,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SchemeChoice::AaSsMaxE => "aa-ss-max-e",
            SchemeChoice::AaSsMinVar => "aa-ss-min-var",
            SchemeChoice::AaIs => "aa-is",
            SchemeChoice::Sa => "sa",
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            SchemeChoice::AaSsMaxE | SchemeChoice::AaSsMinVar => Scheme::AaSs,
            SchemeChoice::AaIs => Scheme::AaIs,
            SchemeChoice::Sa => Scheme::Sa,
        }
    }

    pub fn shift(self, array: &ArrayConfig) -> Result<PhaseShift, CliError> {
        Ok(match self {
            SchemeChoice::AaSsMaxE | SchemeChoice::Sa => max_energy_shift(array.m),
            SchemeChoice::AaSsMinVar => min_var_shift(array.m),
            SchemeChoice::AaIs => {
                let r = array.r_sum().map_err(CliError::numeric)?;
                aa_is_shift(array.m, r).map_err(CliError::numeric)?
            }
        })
    }

    fn group_kind(self) -> GroupKind {
        match self {
            SchemeChoice::AaSsMaxE => GroupKind::AaSsMaxEnergy,
            SchemeChoice::AaSsMinVar => GroupKind::AaSsMinVariance,
            SchemeChoice::AaIs => GroupKind::AaIs,
            SchemeChoice::Sa => GroupKind::Sa,
        }
    }
}

impl FromStr for SchemeChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        SchemeChoice::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| CliError::config(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    BetaDbm,
    Tau,
    Kappa,
    M,
    /// Phase function `f` against azimuth; no simulation.
    Phi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvesSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeChoice>,
    pub samples: usize,
    /// Average single-antenna RF power when it is not the swept parameter.
    pub beta_dbm: f64,
    /// Array sizes for the `phi` sweep; defaults to `array.m`.
    pub ms: Vec<usize>,
}

impl Default for CurvesSection {
    fn default() -> Self {
        CurvesSection {
            parameter: SweepParameter::BetaDbm,
            values: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            schemes: SchemeChoice::ALL.to_vec(),
            samples: 20_000,
            beta_dbm: 2.0,
            ms: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistributionsSection {
    pub schemes: Vec<SchemeChoice>,
    pub samples: usize,
    pub beta_dbm: f64,
    pub bins: usize,
    pub rf_range: [f64; 2],
    pub harvested_range: [f64; 2],
}

impl Default for DistributionsSection {
    fn default() -> Self {
        DistributionsSection {
            schemes: SchemeChoice::ALL.to_vec(),
            samples: 100_000,
            beta_dbm: 2.0,
            bins: 60,
            rf_range: [0.0, 12.0],
            harvested_range: [0.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    pub objective: String,
    pub m: usize,
    pub restarts: usize,
    pub grid: usize,
    pub max_sweeps: usize,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        OptimizeSection {
            objective: "max-f-avg".into(),
            m: 8,
            restarts: 16,
            grid: 720,
            max_sweeps: 500,
        }
    }
}

impl OptimizeSection {
    pub fn objective(&self) -> Result<Objective, CliError> {
        self.objective
            .parse()
            .map_err(|e| CliError::config(format!("optimize.objective: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiPolicy {
    Zero,
    /// Uniform random shift, one draw per grid point.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    pub ms: Vec<usize>,
    pub kappas: Vec<f64>,
    pub phis: Vec<f64>,
    pub psi: Vec<PsiPolicy>,
    pub trials: usize,
    pub samples: usize,
    pub bins: usize,
    pub range: [f64; 2],
    pub beta: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection {
            ms: vec![4],
            kappas: vec![0.0, 10.0],
            phis: vec![std::f64::consts::FRAC_PI_2, 3.0 * std::f64::consts::FRAC_PI_4],
            psi: vec![PsiPolicy::Zero],
            trials: 100,
            samples: 200_000,
            bins: 240,
            range: [0.0, 6.0],
            beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    A,
    B,
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    pub center_deg: f64,
    pub spread_deg: f64,
    pub radial: [f64; 2],
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    /// Starting layout and candidate plans.
    pub setup: ScenarioName,
    pub samples: usize,
    /// Replaces the setup's rotation grid when present.
    pub rotation_step_deg: Option<f64>,
    /// Replaces the setup's layout when non-empty.
    pub clusters: Vec<ClusterSection>,
    /// Replaces the setup's candidates when non-empty; each group is
    /// `"<scheme>:<first antenna>:<antennas>"`.
    pub templates: Vec<Vec<String>>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            setup: ScenarioName::A,
            samples: 10_000,
            rotation_step_deg: None,
            clusters: vec![],
            templates: vec![],
        }
    }
}

pub fn parse_group(spec: &str) -> Result<Group, CliError> {
    let bad = || CliError::config(format!("scenario.templates: cannot parse group '{spec}'"));
    let mut parts = spec.split(':');
    let (Some(scheme), Some(start), Some(len), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    let choice: SchemeChoice = scheme.parse()?;
    let start: usize = start.trim().parse().map_err(|_| bad())?;
    let len: usize = len.trim().parse().map_err(|_| bad())?;
    if len == 0 {
        return Err(bad());
    }
    Ok(choice.group_kind().group(start, len))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("{e}")))
    }

    /// SHA-256 of the canonical TOML form, without the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let text = toml::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_uses_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.array.m, 8);
        assert_eq!(c.harvester.build().unwrap(), EhCurve::standard());
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = RunConfig::parse("[array]\nm = 4\nkapa = 2.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kapa"), "{msg}");
        assert!(msg.contains("line 3") || msg.contains("3:"), "{msg}");
        assert!(RunConfig::parse("colour = 1").is_err());
        assert!(RunConfig::parse("[array.correlation]\nmodel = \"uniform\"\ntau = 0.2").is_err());
    }

    #[test]
    fn correlation_models_parse() {
        let c = RunConfig::parse("[array.correlation]\nmodel = \"uniform\"\nrho = 0.2").unwrap();
        assert_eq!(c.array.correlation, CorrelationSection::Uniform { rho: 0.2 });
    }

    #[test]
    fn hash_ignores_output_only() {
        let a = RunConfig::parse("seed = 3").unwrap();
        let mut b = a.clone();
        b.output = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse("seed = 4").unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn groups_parse() {
        let g = parse_group("aa-ss-max-e:2:4").unwrap();
        assert_eq!((g.start, g.len(), g.scheme), (2, 4, Scheme::AaSs));
        assert!(parse_group("aa-ss:0:4").is_err());
        assert!(parse_group("sa:0").is_err());
        assert!(parse_group("sa:0:0").is_err());
    }
}
