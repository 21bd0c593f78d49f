use std::path::{Path, PathBuf};

use revivals::eigen::SpectralDecomposition;
use revivals::hamiltonian::toy_model_eigenvalues;
use revivals::protocol::{run_recovery, RecoveryOptions};
use revivals::random::{haar_state, haar_unitary, substream};
use revivals::resource::{
    make_free_state, make_free_unitary, monotone_d, monotone_g, monotone_r, random_free_state, random_rational_state,
    random_resourceful_state, revival_fidelity, FreeUnitarySpec,
};
use revivals::scrambling::{
    avg_otoc_series, check_otoc_bound, fidelity_from_average, pauli_weight_overlap_series, write_series_csv,
    SubsystemPair,
};
use revivals::spectral::{check_irrational_spacing, classify, ClassificationReport};
use revivals::surd::Surd;
use revivals::{pauli_enumerate, DenseOperator, EigenClassification, PauliString, StateVector, C64};
use serde::Serialize;

use crate::config::{parse_pauli, Experiment, ExperimentConfig, MonotoneConfig, StateConfig, UnitaryConfig};
use crate::{write_file, CliError};

const STATE_STREAM: u64 = 1;
const UNITARY_STREAM: u64 = 2;
/// Largest system for which bound-check enumerates every Pauli string.
const FULL_PAULI_SCAN_QUBITS: usize = 4;

/// Eigenvalue list quoted in the literature for the two-qubit toy model.
pub const QUOTED_TOY_EIGENVALUES: [&str; 4] = ["3", "-1-sqrt(2)", "-1+sqrt(2)-sqrt(10)", "-1+sqrt(2)+sqrt(10)"];
const TOY_TOL: f64 = 1e-9;

struct Context {
    spec: SpectralDecomposition,
    ground_truth: Option<EigenClassification>,
    n: usize,
}

fn realize(config: &ExperimentConfig) -> Result<Context, CliError> {
    let h = config.hamiltonian().realize()?;
    let n = h.spectrum.n_qubits();
    if n > crate::config::MAX_DENSE_QUBITS {
        return Err(CliError::Infeasible(format!("{n} qubits exceeds the dense-simulation limit")));
    }
    Ok(Context { spec: h.spectrum, ground_truth: h.ground_truth, n })
}

fn classification(config: &ExperimentConfig, ctx: &Context) -> Result<EigenClassification, CliError> {
    Ok(classify(&ctx.spec, config.classification.tolerance, config.classification.max_denominator)?)
}

fn json_artifact<T: Serialize>(out: &Path, config: &ExperimentConfig, value: &T) -> Result<PathBuf, CliError> {
    let path = out.join(format!("{}.json", config.experiment().stem()));
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

fn csv_artifact(out: &Path, config: &ExperimentConfig, times: &[f64], columns: &[(&str, &[f64])]) -> Result<PathBuf, CliError> {
    let path = out.join(format!("{}.csv", config.experiment().stem()));
    let mut buf = Vec::new();
    write_series_csv(&mut buf, times, columns)?;
    write_file(&path, &buf)?;
    Ok(path)
}

fn observable(config: &ExperimentConfig, n: usize, fallback: &str) -> Result<PauliString, CliError> {
    let text = config.observable.as_ref().map(|o| o.o1.as_str()).unwrap_or(fallback);
    parse_pauli(text, n)
}

fn prepare_state(
    config: &ExperimentConfig,
    ctx: &Context,
    cls: Option<&EigenClassification>,
) -> Result<StateVector, CliError> {
    let mut rng = substream(config.seed, STATE_STREAM);
    let need_cls = || cls.ok_or_else(|| CliError::Config("this state kind needs a rational eigenvalue".into()));
    let state = match &config.state {
        StateConfig::RandomFree => random_free_state(&ctx.spec, need_cls()?, &mut rng)?,
        StateConfig::RandomRational => random_rational_state(&ctx.spec, need_cls()?, &mut rng)?,
        StateConfig::RandomResourceful => random_resourceful_state(&ctx.spec, need_cls()?, &mut rng)?,
        StateConfig::Haar => haar_state(ctx.n, &mut rng)?,
        StateConfig::Eigenstate { index } => {
            if *index >= ctx.spec.dim() {
                return Err(CliError::Config(format!("eigenstate index {index} outside 0..{}", ctx.spec.dim())));
            }
            match cls {
                Some(c) => make_free_state(&ctx.spec, c, &[(*index, C64::new(1.0, 0.0))])?,
                None => ctx.spec.eigenvector(*index)?,
            }
        }
        StateConfig::Basis { index } => {
            if *index >= ctx.spec.dim() {
                return Err(CliError::Config(format!("basis index {index} outside 0..{}", ctx.spec.dim())));
            }
            StateVector::basis(ctx.n, *index)?
        }
    };
    Ok(state)
}

pub(crate) fn dispatch(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    match config.experiment() {
        Experiment::Spectrum => spectrum(config, out),
        Experiment::Revival => revival(config, out),
        Experiment::Monotone => monotone(config, out),
        Experiment::Otoc => otoc_series(config, out),
        Experiment::HaydenPreskill => hayden_preskill(config, out),
        Experiment::Z1Overlap => z1_overlap(config, out),
        Experiment::Recovery => recovery(config, out),
        Experiment::BoundCheck => bound_check(config, out),
        Experiment::ToyVerify => toy_verify(config, out),
    }
}

#[derive(Serialize)]
struct SpectrumReport {
    n: usize,
    seed: u64,
    eigenvalues: Vec<f64>,
    classification: ClassificationReport,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matches_ground_truth: Option<bool>,
}

fn spectrum(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = realize(config)?;
    let cls = classification(config, &ctx)?;
    let violations = check_irrational_spacing(
        &cls,
        &ctx.spec,
        config.classification.tolerance,
        config.classification.max_denominator,
    )?;
    let report = SpectrumReport {
        n: ctx.n,
        seed: config.seed,
        eigenvalues: ctx.spec.eigenvalues().to_vec(),
        classification: ClassificationReport::new(&cls, &violations),
        warnings: cls.assumption_warnings(),
        matches_ground_truth: ctx.ground_truth.as_ref().map(|g| g.same_partition(&cls)),
    };
    Ok(vec![json_artifact(out, config, &report)?])
}

#[derive(Serialize)]
struct RevivalReport {
    n: usize,
    seed: u64,
    #[serde(rename = "T")]
    t: u64,
    revival_time: f64,
    revival_fidelity: f64,
    state: StateConfig,
}

fn revival(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = realize(config)?;
    let cls = classification(config, &ctx)?;
    let psi = prepare_state(config, &ctx, Some(&cls))?;
    let f = revival_fidelity(&ctx.spec, &cls, &psi)?;
    let weights: Vec<f64> = ctx.spec.coefficients(&psi)?.iter().map(|z| z.norm_sqr()).collect();
    let times = config.time_grid.times()?;
    let series: Vec<f64> = times
        .iter()
        .map(|&t| {
            let ph = ctx.spec.phases(t);
            weights.iter().zip(ph.iter()).map(|(w, p)| p * *w).sum::<C64>().norm()
        })
        .collect();
    let report = RevivalReport {
        n: ctx.n,
        seed: config.seed,
        t: cls.denominator()?,
        revival_time: cls.revival_period()?,
        revival_fidelity: f,
        state: config.state.clone(),
    };
    Ok(vec![
        csv_artifact(out, config, &times, &[("value", &series)])?,
        json_artifact(out, config, &report)?,
    ])
}

fn prepare_unitary(config: &MonotoneConfig, seed: u64, ctx: &Context, cls: &EigenClassification) -> Result<DenseOperator, CliError> {
    let mut rng = substream(seed, UNITARY_STREAM);
    Ok(match &config.unitary {
        UnitaryConfig::Haar => DenseOperator::new(haar_unitary(ctx.spec.dim(), &mut rng)?)?,
        UnitaryConfig::RandomFree => make_free_unitary(&ctx.spec, cls, &FreeUnitarySpec::random(cls, &mut rng)?)?,
        UnitaryConfig::Propagator { t } => ctx.spec.propagator(*t)?,
    })
}

fn monotone(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    use revivals::resource::MonotoneKind;
    let ctx = realize(config)?;
    let cls = classification(config, &ctx)?;
    let budget = config.search_budget();
    let estimate = match config.monotone.kind {
        MonotoneKind::R => monotone_r(&ctx.spec, &cls, &prepare_state(config, &ctx, Some(&cls))?, &budget)?,
        MonotoneKind::D => monotone_d(&ctx.spec, &cls, &prepare_unitary(&config.monotone, config.seed, &ctx, &cls)?, &budget)?,
        MonotoneKind::G => monotone_g(&ctx.spec, &cls, &observable(config, ctx.n, "Z1")?.to_operator(), &budget)?,
    };
    Ok(vec![json_artifact(out, config, &estimate)?])
}

fn otoc_series(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = realize(config)?;
    let obs = config.observable.as_ref().expect("validated");
    let o1 = parse_pauli(&obs.o1, ctx.n)?.to_operator();
    let o2 = parse_pauli(obs.o2.as_deref().expect("validated"), ctx.n)?.to_operator();
    let h = ctx.spec.heisenberg(&o1)?;
    let times = config.time_grid.times()?;
    let d = ctx.spec.dim() as f64;
    let values = times
        .iter()
        .map(|&t| {
            let wo = h.at(t)?.dot(&o2)?;
            Ok(wo.dot(&wo)?.trace() / d)
        })
        .collect::<Result<Vec<C64>, revivals::Error>>()?;
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    Ok(vec![csv_artifact(out, config, &times, &[("re", &re), ("im", &im)])?])
}

fn hayden_preskill(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = realize(config)?;
    let sub = config.subsystems.as_ref().expect("validated");
    let pair = SubsystemPair::new(ctx.n, &sub.a, &sub.d)?;
    let times = config.time_grid.times()?;
    let avg = avg_otoc_series(&ctx.spec, &pair, &times)?;
    let fidelity: Vec<f64> = avg.iter().map(|&a| fidelity_from_average(&pair, a)).collect();
    Ok(vec![csv_artifact(out, config, &times, &[("value", &fidelity), ("avg_otoc", &avg)])?])
}

fn z1_overlap(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = realize(config)?;
    let p = observable(config, ctx.n, "Z1")?;
    let times = config.time_grid.times()?;
    let values = pauli_weight_overlap_series(&ctx.spec, &p, &times)?;
    Ok(vec![csv_artifact(out, config, &times, &[("value", &values)])?])
}

fn recovery(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = realize(config)?;
    let cls = classification(config, &ctx)?;
    let phi = prepare_state(config, &ctx, Some(&cls))?;
    let o = observable(config, ctx.n, "Z1")?.to_operator();
    let r = &config.recovery;
    let options = RecoveryOptions { max_qubits: r.max_qubits, earliest_revival: r.earliest_revival, seed: Some(config.seed) };
    let run = run_recovery(&ctx.spec, &cls, &phi, r.t1, r.m, r.p, &o, &options)?;
    Ok(vec![json_artifact(out, config, &run)?])
}

fn bound_check(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = realize(config)?;
    let cls = classification(config, &ctx)?;
    let paulis = match &config.observable {
        Some(o) => vec![parse_pauli(&o.o1, ctx.n)?],
        None if ctx.n <= FULL_PAULI_SCAN_QUBITS => {
            let all: Vec<usize> = (1..=ctx.n).collect();
            pauli_enumerate(ctx.n, &all)?.into_iter().filter(|p| !p.is_identity()).collect()
        }
        None => {
            return Err(CliError::Config(format!(
                "bound-check on {} qubits needs an explicit [observable] o1",
                ctx.n
            )))
        }
    };
    let budget = config.search_budget();
    let budget = config.bound_check.include_monotone.then_some(&budget);
    let reports = paulis
        .iter()
        .map(|p| check_otoc_bound(&ctx.spec, &cls, p, budget))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vec![json_artifact(out, config, &reports)?])
}

#[derive(Serialize)]
struct ToyReport {
    eigenvalues: Vec<f64>,
    exact: Vec<String>,
    exact_max_deviation: f64,
    matches_exact: bool,
    quoted: Vec<String>,
    quoted_max_deviation: f64,
    matches_quoted: bool,
    classification: ClassificationReport,
}

/// Largest gap between a computed spectrum and a sorted reference list.
pub fn max_sorted_deviation(computed: &[f64], reference: &[f64]) -> f64 {
    let mut r = reference.to_vec();
    r.sort_by(f64::total_cmp);
    computed.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn toy_verify(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = realize(config)?;
    let cls = classification(config, &ctx)?;
    let violations = check_irrational_spacing(
        &cls,
        &ctx.spec,
        config.classification.tolerance,
        config.classification.max_denominator,
    )?;
    let eigenvalues = ctx.spec.eigenvalues().to_vec();
    let exact: Vec<f64> = toy_model_eigenvalues().iter().map(Surd::to_f64).collect();
    let quoted: Vec<f64> = QUOTED_TOY_EIGENVALUES
        .iter()
        .map(|s| s.parse::<Surd>().map(|x| x.to_f64()))
        .collect::<Result<_, _>>()?;
    let exact_dev = max_sorted_deviation(&eigenvalues, &exact);
    let quoted_dev = max_sorted_deviation(&eigenvalues, &quoted);
    let report = ToyReport {
        eigenvalues,
        exact: toy_model_eigenvalues().iter().map(|s| s.to_string()).collect(),
        exact_max_deviation: exact_dev,
        matches_exact: exact_dev <= TOY_TOL,
        quoted: QUOTED_TOY_EIGENVALUES.iter().map(|s| s.to_string()).collect(),
        quoted_max_deviation: quoted_dev,
        matches_quoted: quoted_dev <= TOY_TOL,
        classification: ClassificationReport::new(&cls, &violations),
    };
    Ok(vec![json_artifact(out, config, &report)?])
}
