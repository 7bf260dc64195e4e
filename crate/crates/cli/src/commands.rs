use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use lincov::acvf::{self, AcvfSequence};
use lincov::diagnostics::{self, Verdict, DEFAULT_K_MAX};
use lincov::io::{self as lio, ModelSpec};
use lincov::models::ProcessModel;
use lincov::simulation::{self, OracleReport};
use lincov::weights::{self, FilterWeights};
use lincov::Error;

use crate::{
    AcvfArgs, CheckArgs, ComposeArgs, Direction, Run, SimulateArgs, TheoremArgs, WeightsArgs,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Lib(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Files to write, in order, and whether any verdict came out "fail".
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub files: Vec<(PathBuf, String)>,
    pub verdict_failed: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn in_file(path: &Path, err: Error) -> Error {
    let at = path.display();
    match err {
        Error::Parse(msg) => Error::Parse(format!("{at}: {msg}")),
        Error::Domain(msg) => Error::Domain(format!("{at}: {msg}")),
        Error::Config(msg) => Error::Config(format!("{at}: {msg}")),
        other => Error::Domain(format!("{at}: {other}")),
    }
}

fn load_spec(path: &Path) -> Result<ModelSpec, CliError> {
    Ok(ModelSpec::parse(&read(path)?).map_err(|e| in_file(path, e))?)
}

fn load_model(path: &Path) -> Result<(ModelSpec, ProcessModel), CliError> {
    let spec = load_spec(path)?;
    let model = spec.model().map_err(|e| in_file(path, e))?;
    Ok((spec, model))
}

fn load_acvf(path: &Path) -> Result<AcvfSequence, CliError> {
    Ok(lio::parse_acvf_csv(&read(path)?).map_err(|e| in_file(path, e))?)
}

/// Root failures name the polynomial they come from.
fn name_field(err: Error) -> Error {
    match err {
        Error::NonStationary { .. } => Error::Domain(format!("ar: {err}")),
        Error::NonInvertible { .. } => Error::Domain(format!("ma: {err}")),
        other => other,
    }
}

fn filter_weights(
    model: &ProcessModel,
    direction: Direction,
    n_max: Option<usize>,
) -> Result<FilterWeights, Error> {
    match (direction, model) {
        (Direction::Psi, m) => m.psi_weights(n_max),
        (Direction::Pi, ProcessModel::Arma(m)) => weights::arma_pi_weights(m, n_max),
        (Direction::Pi, ProcessModel::Farima(_)) => Err(Error::Domain(
            "d: pi weights are only available for ARMA models".into(),
        )),
    }
    .map_err(name_field)
}

fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn run(run: &Run) -> Result<Outcome, CliError> {
    match run {
        Run::Acvf(a) => cmd_acvf(a),
        Run::Weights(a) => cmd_weights(a),
        Run::Compose(a) => cmd_compose(a),
        Run::Check(a) => cmd_check(a),
        Run::Theorem(a) => cmd_theorem(a),
        Run::Simulate(a) => cmd_simulate(a),
    }
}

fn cmd_acvf(args: &AcvfArgs) -> Result<Outcome, CliError> {
    let (_, model) = load_model(&args.model)?;
    let acvf = match args.filter {
        None => model.acvf(args.k_max).map_err(name_field)?,
        Some(direction) => {
            let w = filter_weights(&model, direction, args.n_max)?;
            acvf::filter_self_acvf(&w, args.k_max)
        }
    };
    Ok(Outcome {
        inputs: vec![args.model.clone()],
        files: vec![(args.common.output.clone(), lio::acvf_csv(&acvf))],
        verdict_failed: false,
    })
}

fn cmd_weights(args: &WeightsArgs) -> Result<Outcome, CliError> {
    let (_, model) = load_model(&args.model)?;
    let w = filter_weights(&model, args.direction, args.n_max)?;
    Ok(Outcome {
        inputs: vec![args.model.clone()],
        files: vec![(args.common.output.clone(), lio::weights_csv(&w))],
        verdict_failed: false,
    })
}

fn cmd_compose(args: &ComposeArgs) -> Result<Outcome, CliError> {
    let gw = load_acvf(&args.gw)?;
    let gx = load_acvf(&args.gx)?;
    let horizon = acvf::truncation_horizon(&gw).map_err(|e| in_file(&args.gw, e))?;
    let k_max = match args.k_max {
        Some(k) => k,
        None => gx
            .max_lag()
            .checked_sub(horizon.lags)
            .ok_or(Error::InsufficientLags {
                needed: horizon.lags + 1,
                available: gx.values().len(),
            })?,
    };
    let composed = acvf::compose_acvf(&gw, &gx, k_max)?;
    Ok(Outcome {
        inputs: vec![args.gw.clone(), args.gx.clone()],
        files: vec![(args.common.output.clone(), lio::composed_csv(&composed))],
        verdict_failed: false,
    })
}

#[derive(Serialize)]
struct CheckReport<'a> {
    berman: &'a diagnostics::BermanReport,
    summability: &'a diagnostics::SummabilityReport,
}

fn cmd_check(args: &CheckArgs) -> Result<Outcome, CliError> {
    let acvf = load_acvf(&args.acvf)?;
    let k_max = args
        .k_max
        .unwrap_or_else(|| DEFAULT_K_MAX.min(acvf.max_lag()));
    let report = diagnostics::condition_report(&acvf, args.k_min, k_max, args.epsilon)?;
    let json = lio::to_json(&CheckReport {
        berman: &report.berman,
        summability: &report.summability,
    })?;
    Ok(Outcome {
        inputs: vec![args.acvf.clone()],
        files: vec![(args.common.output.clone(), json)],
        verdict_failed: report.any_fail(),
    })
}

fn cmd_theorem(args: &TheoremArgs) -> Result<Outcome, CliError> {
    let (_, input) = load_model(&args.model)?;
    let (_, filter) = load_model(&args.filter)?;
    let w = filter_weights(&filter, args.direction, args.n_max)?;
    let gw = acvf::filter_acvf_to_horizon(&w);
    let horizon = acvf::truncation_horizon(&gw)?;
    let gx = input
        .acvf(args.k_max + horizon.lags + 1)
        .map_err(name_field)?;
    let report = diagnostics::theorem_check(&gw, &gx, args.k_min, args.k_max, args.epsilon)?;
    let failed = report.input.any_fail()
        || report.berman.verdict == Verdict::Fail
        || report.summability.verdict == Verdict::Fail
        || !report.theorem_consistent;
    Ok(Outcome {
        inputs: vec![args.model.clone(), args.filter.clone()],
        files: vec![(args.common.output.clone(), lio::to_json(&report)?)],
        verdict_failed: failed,
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let (spec, model) = load_model(&args.model)?;
    let psi = model.psi_weights(None).map_err(name_field)?;
    let (model, mut config) = spec
        .simulation(psi.len_minus_one())
        .map_err(|e| in_file(&args.model, e))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let series = simulation::simulate_linear_process(&psi, &config)?;
    let empirical = simulation::empirical_acvf(&series, args.k_max)?;
    let exact = model.acvf(args.k_max).map_err(name_field)?;
    let oracle: OracleReport =
        simulation::oracle_compare(&exact, &empirical, args.oracle_lags, series.len())?;
    let out = &args.common.output;
    Ok(Outcome {
        inputs: vec![args.model.clone()],
        files: vec![
            (out.clone(), lio::series_text(&series)),
            (sibling(out, ".acvf.csv"), lio::acvf_csv(&empirical)),
            (sibling(out, ".oracle.json"), lio::to_json(&oracle)?),
        ],
        verdict_failed: !oracle.pass,
    })
}
