//! Batch runner: a JSON config lists jobs, each a command plus parameters;
//! reports land in per-job directories and a summary index records status
//! and wall time. A failing job marks the summary but later jobs still run.

use crate::{
    timed, CliError, CliResult, Command, DecayArgs, LorentzArgs, MembershipArgs, MorreyArgs,
    Outcome, SuiteArgs, VerifyArgs,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn default_seed() -> u64 {
    42
}

/// Global tolerance overrides applied to every job.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct Tolerances {
    /// pointwise residual tolerance for verify jobs
    pub pointwise: Option<f64>,
}

#[derive(Debug, Deserialize)]
pub struct SuiteConfig {
    #[serde(default)]
    pub jobs: Vec<SuiteJob>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    /// fixes all sampled pipelines; repeated runs are bit-identical
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
pub struct SuiteJob {
    pub name: Option<String>,
    pub command: String,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

impl SuiteJob {
    /// Resolves the command at parse time; unknown names are rejected here.
    fn parse(&self) -> Result<Command, CliError> {
        let params = self.parameters.clone();
        let parse_err =
            |e: serde_json::Error| CliError::Config(format!("job {:?}: {e}", self.command));
        match self.command.as_str() {
            "verify" => Ok(Command::Verify(
                serde_json::from_value::<VerifyArgs>(params).map_err(parse_err)?,
            )),
            "lorentz" => Ok(Command::Lorentz(
                serde_json::from_value::<LorentzArgs>(params).map_err(parse_err)?,
            )),
            "morrey" => Ok(Command::Morrey(
                serde_json::from_value::<MorreyArgs>(params).map_err(parse_err)?,
            )),
            "decay" => Ok(Command::Decay(
                serde_json::from_value::<DecayArgs>(params).map_err(parse_err)?,
            )),
            "membership" => Ok(Command::Membership(
                serde_json::from_value::<MembershipArgs>(params).map_err(parse_err)?,
            )),
            other => Err(CliError::Config(format!("unknown command name {other:?}"))),
        }
    }
}

#[derive(Debug, Serialize)]
struct SuiteSummary {
    seed: u64,
    jobs: Vec<JobSummary>,
}

#[derive(Debug, Serialize)]
struct JobSummary {
    index: usize,
    name: String,
    command: String,
    status: String,
    wall_time_ms: u128,
}

/// Runs every job of the config; report files go to numbered per-job
/// directories under the output dir, the summary index to summary.json.
pub fn cmd_suite(args: &SuiteArgs, out: &Path, tol: Option<f64>, parallel: bool) -> CliResult {
    let text = std::fs::read_to_string(&args.config)?;
    let config: SuiteConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad suite config: {e}")))?;
    let out_dir = config.output_dir.clone().unwrap_or_else(|| out.to_path_buf());
    let job_tol = tol.or(config.tolerances.pointwise);

    // parse everything up front so configuration errors surface before any
    // job runs
    let parsed: Result<Vec<Command>, CliError> =
        config.jobs.iter().map(|job| job.parse()).collect();
    let parsed = parsed?;

    let job_dir = |index: usize| {
        let name = config.jobs[index]
            .name
            .clone()
            .unwrap_or_else(|| config.jobs[index].command.clone());
        out_dir.join(format!("job-{index:02}-{name}"))
    };

    let run_one = |index: usize, command: &Command| -> (String, u128) {
        let dir = job_dir(index);
        let (result, elapsed) = timed(|| crate::run_command(command, &dir, job_tol, false));
        let status = match result {
            Ok(Outcome::Pass) => "ok".to_string(),
            Ok(Outcome::VerificationFailed(reason)) => format!("verification failed: {reason}"),
            Err(e) => format!("failed: {e}"),
        };
        (status, elapsed)
    };

    let results: Vec<(String, u128)> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = parsed
                .iter()
                .enumerate()
                .map(|(index, command)| scope.spawn(move || run_one(index, command)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("job thread")).collect()
        })
    } else {
        parsed.iter().enumerate().map(|(index, command)| run_one(index, command)).collect()
    };

    let mut jobs = Vec::with_capacity(results.len());
    let mut any_failed = false;
    for (index, (status, wall_time_ms)) in results.into_iter().enumerate() {
        if status != "ok" {
            any_failed = true;
        }
        jobs.push(JobSummary {
            index,
            name: config.jobs[index]
                .name
                .clone()
                .unwrap_or_else(|| config.jobs[index].command.clone()),
            command: config.jobs[index].command.clone(),
            status,
            wall_time_ms,
        });
    }
    let summary = SuiteSummary { seed: config.seed, jobs };
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    println!(
        "suite: {} job(s), {}",
        summary.jobs.len(),
        if any_failed { "with failures" } else { "all ok" }
    );
    if any_failed {
        Ok(Outcome::VerificationFailed("one or more suite jobs failed".into()))
    } else {
        Ok(Outcome::Pass)
    }
}
