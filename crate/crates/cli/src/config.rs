//! Experiment configuration: TOML (sectioned key-value) or JSON with the
//! same schema.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use revivals::hamiltonian::HamiltonianSpec;
use revivals::resource::{MonotoneKind, SearchBudget};
use revivals::scrambling::TimeGrid;
use revivals::{Pauli, PauliString};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Dense full-space experiments are refused above this size.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Revival,
    Monotone,
    Otoc,
    HaydenPreskill,
    Z1Overlap,
    Recovery,
    BoundCheck,
    ToyVerify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Revival => "revival",
            Experiment::Monotone => "monotone",
            Experiment::Otoc => "otoc",
            Experiment::HaydenPreskill => "hayden-preskill",
            Experiment::Z1Overlap => "z1-overlap",
            Experiment::Recovery => "recovery",
            Experiment::BoundCheck => "bound-check",
            Experiment::ToyVerify => "toy-verify",
        }
    }

    /// Artifact file stem, e.g. `hayden_preskill`.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }

    fn default_hamiltonian(self) -> HamiltonianSpec {
        match self {
            Experiment::Otoc | Experiment::HaydenPreskill | Experiment::Z1Overlap => HamiltonianSpec::Pxp { n: 8 },
            _ => HamiltonianSpec::ToyModel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystems {
    #[serde(alias = "A")]
    pub a: Vec<usize>,
    #[serde(alias = "D")]
    pub d: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassificationConfig {
    pub tolerance: f64,
    pub max_denominator: u64,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        Self {
            tolerance: revivals::spectral::DEFAULT_TOLERANCE,
            max_denominator: revivals::spectral::DEFAULT_MAX_DENOMINATOR,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetConfig {
    pub restarts: usize,
    pub iterations: usize,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let b = SearchBudget::default();
        Self { restarts: b.restarts, iterations: b.iterations }
    }
}

/// Pauli observables, written either as a full string (`ZIII`) or as
/// site-indexed letters (`Z1`, `X2 Z4`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableConfig {
    pub o1: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o2: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateConfig {
    /// Rational-span state or ℬ eigenstate, chosen at random.
    #[default]
    RandomFree,
    RandomRational,
    RandomResourceful,
    Haar,
    Eigenstate {
        index: usize,
    },
    Basis {
        index: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UnitaryConfig {
    #[default]
    Haar,
    RandomFree,
    Propagator {
        t: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonotoneConfig {
    pub kind: MonotoneKind,
    /// Unitary whose destruction capacity is estimated.
    pub unitary: UnitaryConfig,
}

impl Default for MonotoneConfig {
    fn default() -> Self {
        Self { kind: MonotoneKind::R, unitary: UnitaryConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryConfig {
    pub t1: f64,
    pub m: u32,
    pub p: f64,
    pub max_qubits: usize,
    pub earliest_revival: bool,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self { t1: 0.5, m: 1, p: 0.1, max_qubits: revivals::protocol::DEFAULT_MAX_RECOVERY_QUBITS, earliest_revival: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundCheckConfig {
    /// Attach a 𝒢 lower bound to each report.
    pub include_monotone: bool,
}

impl Default for BoundCheckConfig {
    fn default() -> Self {
        Self { include_monotone: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default)]
    pub time_grid: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystems: Option<Subsystems>,
    #[serde(default)]
    pub classification: ClassificationConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableConfig>,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub monotone: MonotoneConfig,
    #[serde(default)]
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub bound_check: BoundCheckConfig,
}

impl ExperimentConfig {
    /// All defaults for the given experiment.
    pub fn for_experiment(experiment: Experiment) -> Self {
        Self {
            experiment: Some(experiment),
            seed: 0,
            output: None,
            hamiltonian: Some(experiment.default_hamiltonian()),
            time_grid: TimeGrid::default(),
            subsystems: None,
            classification: ClassificationConfig::default(),
            budget: BudgetConfig::default(),
            observable: None,
            state: StateConfig::default(),
            monotone: MonotoneConfig::default(),
            recovery: RecoveryConfig::default(),
            bound_check: BoundCheckConfig::default(),
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("JSON config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(format!("TOML config: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }

    /// Fills the experiment from the subcommand and the Hamiltonian from the
    /// experiment's default, then validates.
    pub fn resolve(mut self, experiment: Experiment) -> Result<Self, CliError> {
        match self.experiment {
            Some(e) if e != experiment => {
                return Err(CliError::Config(format!(
                    "config is for '{}' but the '{}' subcommand was run",
                    e.name(),
                    experiment.name()
                )))
            }
            _ => self.experiment = Some(experiment),
        }
        if experiment == Experiment::ToyVerify {
            self.hamiltonian = Some(HamiltonianSpec::ToyModel);
        }
        self.hamiltonian.get_or_insert_with(|| experiment.default_hamiltonian());
        self.validate()?;
        Ok(self)
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment.unwrap_or(Experiment::Spectrum)
    }

    pub fn hamiltonian(&self) -> HamiltonianSpec {
        self.hamiltonian.clone().unwrap_or_else(|| self.experiment().default_hamiltonian())
    }

    pub fn search_budget(&self) -> SearchBudget {
        // width 0 runs restarts on the pool installed by the runner
        SearchBudget { restarts: self.budget.restarts, iterations: self.budget.iterations, seed: self.seed, threads: 0 }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let experiment = self.experiment();
        self.time_grid.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.classification.tolerance > 0.0 && self.classification.tolerance.is_finite()) {
            return bad(format!("classification tolerance must be positive, got {}", self.classification.tolerance));
        }
        if self.classification.max_denominator == 0 {
            return bad("classification max_denominator must be positive".into());
        }
        if self.budget.restarts == 0 || self.budget.iterations == 0 {
            return bad("budget restarts and iterations must be positive".into());
        }
        let n = self.hamiltonian().n_qubits();
        if let Some(n) = n {
            if n > MAX_DENSE_QUBITS {
                return Err(CliError::Infeasible(format!(
                    "{n} qubits exceeds the dense-simulation limit of {MAX_DENSE_QUBITS}; reduce the system size"
                )));
            }
            if experiment == Experiment::Recovery && n > self.recovery.max_qubits {
                return Err(CliError::Infeasible(format!(
                    "recovery on {n} qubits exceeds recovery.max_qubits = {}; raise it explicitly to override",
                    self.recovery.max_qubits
                )));
            }
            if let Some(sub) = &self.subsystems {
                for &s in sub.a.iter().chain(&sub.d) {
                    if s == 0 || s > n {
                        return bad(format!("subsystem site {s} outside 1..={n}"));
                    }
                }
            }
            if let Some(obs) = &self.observable {
                parse_pauli(&obs.o1, n)?;
                if let Some(o2) = &obs.o2 {
                    parse_pauli(o2, n)?;
                }
            }
        }
        match experiment {
            Experiment::HaydenPreskill if self.subsystems.is_none() => bad("hayden-preskill needs [subsystems] a and d".into()),
            Experiment::Otoc if self.observable.as_ref().is_none_or(|o| o.o2.is_none()) => {
                bad("otoc needs [observable] o1 and o2".into())
            }
            Experiment::Recovery if !(self.recovery.p > 0.0 && self.recovery.p < 1.0) => {
                bad(format!("recovery.p must lie in (0, 1), got {}", self.recovery.p))
            }
            Experiment::Recovery if !self.recovery.t1.is_finite() => bad("recovery.t1 must be finite".into()),
            _ => Ok(()),
        }
    }
}

/// Parses `ZIIX`, `Z1`, `X2 Z4` or `X2*Z4` into an `n`-qubit Pauli string.
pub fn parse_pauli(text: &str, n: usize) -> Result<PauliString, CliError> {
    let bad = |m: String| CliError::Config(format!("observable '{text}': {m}"));
    let t = text.trim();
    if t.len() == n && t.chars().all(|c| "IXYZ".contains(c)) {
        return t.parse().map_err(|e: revivals::Error| bad(e.to_string()));
    }
    let mut letters = vec![Pauli::I; n];
    let mut chars = t.chars().filter(|c| !c.is_whitespace() && *c != '*').peekable();
    let mut any = false;
    while let Some(c) = chars.next() {
        let p = match c {
            'I' => Pauli::I,
            'X' => Pauli::X,
            'Y' => Pauli::Y,
            'Z' => Pauli::Z,
            other => return Err(bad(format!("unexpected '{other}'"))),
        };
        let mut digits = String::new();
        while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
            digits.push(*d);
            chars.next();
        }
        let site: usize = digits.parse().map_err(|_| bad("expected a site number after each letter".into()))?;
        if site == 0 || site > n {
            return Err(bad(format!("site {site} outside 1..={n}")));
        }
        letters[site - 1] = p;
        any = true;
    }
    if !any {
        return Err(bad("empty".into()));
    }
    Ok(PauliString::new(letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_forms() {
        assert_eq!(parse_pauli("Z1", 3).unwrap().to_string(), "ZII");
        assert_eq!(parse_pauli("X2 Z3", 3).unwrap().to_string(), "IXZ");
        assert_eq!(parse_pauli("YIX", 3).unwrap().to_string(), "YIX");
        assert!(parse_pauli("Z4", 3).is_err());
        assert!(parse_pauli("Q1", 3).is_err());
    }

    #[test]
    fn toml_sections() {
        let cfg = ExperimentConfig::parse(
            r#"
seed = 7
[hamiltonian]
kind = "pxp"
n = 8
[time_grid]
start = 0.0
stop = 30.0
points = 600
[subsystems]
A = [1]
D = [8]
"#,
        )
        .unwrap()
        .resolve(Experiment::HaydenPreskill)
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.hamiltonian(), HamiltonianSpec::Pxp { n: 8 });
        assert_eq!(cfg.subsystems.unwrap().d, vec![8]);
    }

    #[test]
    fn json_matches_toml() {
        let a = ExperimentConfig::parse(r#"{"seed": 3, "hamiltonian": {"kind": "toy-model"}}"#).unwrap();
        let b = ExperimentConfig::parse("seed = 3\n[hamiltonian]\nkind = \"toy-model\"\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Recovery);
        cfg.hamiltonian = Some(HamiltonianSpec::Synthetic {
            rational: vec!["1/2".parse().unwrap(), "3".parse().unwrap()],
            irrational: vec!["sqrt(2)".parse().unwrap(), "1+sqrt(3)".parse().unwrap()],
            basis_seed: Some(4),
        });
        cfg.observable = Some(ObservableConfig { o1: "Z1".into(), o2: None });
        let toml_text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::parse(&toml_text).unwrap(), cfg);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::parse(&json).unwrap(), cfg);
    }

    #[test]
    fn validation_errors() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::HaydenPreskill);
        cfg.subsystems = None;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        cfg.subsystems = Some(Subsystems { a: vec![1], d: vec![9] });
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        cfg.hamiltonian = Some(HamiltonianSpec::Pxp { n: 13 });
        assert!(matches!(cfg.validate(), Err(CliError::Infeasible(_))));
        let mut rec = ExperimentConfig::for_experiment(Experiment::Recovery);
        rec.hamiltonian = Some(HamiltonianSpec::Pxp { n: 7 });
        assert!(matches!(rec.validate(), Err(CliError::Infeasible(_))));
        rec.recovery.max_qubits = 7;
        assert!(rec.validate().is_ok());
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
    }

    #[test]
    fn subcommand_mismatch() {
        let cfg = ExperimentConfig::for_experiment(Experiment::Otoc);
        assert!(cfg.resolve(Experiment::Spectrum).is_err());
    }
}
