use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{debug, info};
use serde::Serialize;
use serde_json::json;

use riskplan_core::generate::{generate_instance, GeneratorSpec};
use riskplan_core::mdp::{self, Action, ActionValue};
use riskplan_core::multiagent::{greedy_rtpd, poisson_binomial_dft, poisson_binomial_enum};
use riskplan_core::oracle_sim::{brute_force_finite, simulate_mission, SimConfig};
use riskplan_core::{
    distance_to_probability, probability_to_distance, solve_finite, solve_infinite,
    validate_instance, Horizon, Instance, MissionPlan, RawInstance,
};

use crate::{Command, Output, PbdMethod, Solve, Team};

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Parse { path: PathBuf, source: serde_json::Error },
    Csv { path: PathBuf, source: csv::Error },
    Core(riskplan_core::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_scale_limit() => 2,
            CliError::Usage(_) => 64,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse { path, source } => write!(f, "{}: invalid JSON: {source}", path.display()),
            CliError::Csv { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<riskplan_core::Error> for CliError {
    fn from(e: riskplan_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.into(), source })
}

fn read_instance(path: &Path) -> Result<Instance> {
    let raw: RawInstance = read_json(path)?;
    let instance = validate_instance(raw).map_err(riskplan_core::Error::from)?;
    info!("loaded {} packages from {}", instance.packages().len(), path.display());
    Ok(instance)
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    match path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn emit<T: Serialize>(value: &T, out: &Output) -> Result<()> {
    write_json(value, out.output.as_deref())
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Solve(Solve::Finite { input, csv, plan_out, out }) => {
            let instance = read_instance(&input)?;
            let report = solve_finite(&instance)?;
            info!("V_1 = {}", report.total);
            if let Some(path) = csv {
                let mut writer = csv::Writer::from_path(&path)
                    .map_err(|source| CliError::Csv { path: path.clone(), source })?;
                for row in report.rows() {
                    writer
                        .serialize(row)
                        .map_err(|source| CliError::Csv { path: path.clone(), source })?;
                }
                writer
                    .flush()
                    .map_err(|source| CliError::Io { path: path.clone(), source })?;
            }
            if let Some(path) = plan_out {
                write_json(&report.mission_plan(), Some(&path))?;
            }
            emit(&report, &out)
        }
        Command::Solve(Solve::Infinite { input, plan_out, out }) => {
            let instance = read_instance(&input)?;
            let report = solve_infinite(&instance)?;
            if let Some(path) = plan_out {
                write_json(&report.plan(), Some(&path))?;
            }
            emit(&report, &out)
        }
        Command::Simulate { input, plan, trials, seed, shards, out } => {
            let instance = read_instance(&input)?;
            let plan: MissionPlan = read_json(&plan)?;
            let config = SimConfig { trials, seed, parallel_shards: shards };
            debug!("simulating {trials} trials on {shards} shards");
            emit(&simulate_mission(&plan, &instance, &config)?, &out)
        }
        Command::Oracle { input, out } => {
            let instance = read_instance(&input)?;
            let result = brute_force_finite(&instance)?;
            info!("compared {} plans", result.evaluated);
            emit(&json!({ "value": result.value, "plan": result.plan, "evaluated": result.evaluated as u64 }), &out)
        }
        Command::MdpEval { input, action, out } => {
            let instance = read_instance(&input)?;
            let model = mdp::build_model(&instance)?;
            let n = model.n();
            if let Some(bits) = action {
                let action = Action::parse(&bits, n)?;
                let value = mdp::evaluate_policy(&model, action)?;
                return emit(
                    &json!({ "action": action.to_bits(n), "plan": model.plan(action), "value": value }),
                    &out,
                );
            }
            let values = mdp::all_action_values(&model, Default::default())?;
            let actions: Vec<ActionValue> = values
                .iter()
                .enumerate()
                .map(|(mask, &value)| {
                    let a = Action(mask as u32);
                    ActionValue { action: a.to_bits(n), plan: model.plan(a), value }
                })
                .collect();
            let best = mdp::best_stationary_policy(&model)?;
            let best = ActionValue { action: best.action.to_bits(n), plan: model.plan(best.action), value: best.value };
            emit(&json!({ "actions": actions, "best": best }), &out)
        }
        Command::Team(Team::Greedy { input, agents, out }) => {
            let instance = read_instance(&input)?;
            emit(&greedy_rtpd(&instance, agents)?, &out)
        }
        Command::Pbd { probs, method, out } => {
            let dist = match method {
                PbdMethod::Enum => poisson_binomial_enum(&probs)?,
                PbdMethod::Dft => poisson_binomial_dft(&probs)?,
            };
            emit(&dist, &out)
        }
        Command::Convert { rho, distance, phi } => {
            let (rho, distance) = match (rho, distance) {
                (Some(rho), _) => (rho, probability_to_distance(rho, phi)?),
                (None, Some(d)) => (distance_to_probability(d, phi)?, d),
                (None, None) => return Err(CliError::Usage("one of --rho or --distance is required".into())),
            };
            write_json(&json!({ "rho": rho, "phi": phi, "distance": distance }), None)
        }
        Command::Gen { n, horizon, seed, theta, reward, rho, out } => {
            let horizon = match horizon.as_str() {
                "infinite" => Horizon::Infinite,
                k => Horizon::Finite(
                    k.parse()
                        .map_err(|_| CliError::Usage(format!("--horizon: expected an epoch count or \"infinite\", got {k:?}")))?,
                ),
            };
            let spec = GeneratorSpec { n, horizon, theta, reward, rho, seed };
            emit(&generate_instance(&spec)?, &out)
        }
    }
}
