use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use geoswarm::deployment::{deployment_stats, plan_gains};
use geoswarm::sim::{initial_positions, GainConfig, GainSelect, Simulation};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::report::{RunMeta, SummaryBuilder, SummaryReport};
use crate::scenario::ScenarioFile;
use crate::table::StepTableWriter;
use crate::validate::{self, PropertyResult};

/// Formats `x` with four significant digits.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Clone, Debug, Serialize)]
pub struct GainsReport {
    pub k1: f64,
    pub k2: f64,
    pub epsilon_max: f64,
    /// `max(k1, k2)`.
    pub k_w: f64,
    /// Gain the scenario's `[gain]` section resolves to.
    pub scenario_k_w: f64,
    pub lambda_min: f64,
    pub radius: f64,
    /// `2πs / scenario_k_w`.
    pub pair_displacement_bound: f64,
}

impl fmt::Display for GainsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lambda_min(P0)  = {}", sig4(self.lambda_min))?;
        writeln!(f, "D0              = {}", sig4(self.radius))?;
        writeln!(f, "k1              = {}", sig4(self.k1))?;
        writeln!(f, "k2              = {}", sig4(self.k2))?;
        writeln!(f, "epsilon_max     = {}", sig4(self.epsilon_max))?;
        writeln!(f, "max(k1, k2)     = {}", sig4(self.k_w))?;
        writeln!(f, "k_w (scenario)  = {}", sig4(self.scenario_k_w))?;
        write!(
            f,
            "2 pi s / k_w    = {}",
            sig4(self.pair_displacement_bound)
        )
    }
}

/// Gain plan for the scenario's initial deployment.
pub fn cmd_gains(scenario: &ScenarioFile) -> Result<GainsReport> {
    let cfg = scenario.config();
    let stats = deployment_stats(&initial_positions(&cfg)?)?;
    let plan = plan_gains(
        cfg.desired.omega_max,
        cfg.controller.mu_star(),
        cfg.swarm.speed,
        &stats,
    )?;
    let scenario_k_w = match cfg.gain {
        GainConfig::Manual { k_w } => k_w,
        GainConfig::Planned {
            select: GainSelect::Max,
        } => plan.k_w,
        GainConfig::Planned {
            select: GainSelect::K1,
        } => plan.k1,
        GainConfig::Planned {
            select: GainSelect::K2,
        } => plan.k2,
    };
    Ok(GainsReport {
        k1: plan.k1,
        k2: plan.k2,
        epsilon_max: plan.epsilon_max,
        k_w: plan.k_w,
        scenario_k_w,
        lambda_min: stats.lambda_min,
        radius: stats.radius,
        pair_displacement_bound: 2.0 * PI * cfg.swarm.speed / scenario_k_w,
    })
}

pub const STEP_TABLE: &str = "steps.csv";
pub const SUMMARY: &str = "summary.json";

/// Runs the scenario, writing the step table and summary into `out_dir`.
///
/// Only every `every`-th step goes into the table (the last one always does);
/// the summary sees every step.
///
/// On a singular attitude error both files are still written, flagged as
/// aborted, and [`CliError::Aborted`] is returned.
pub fn cmd_simulate(
    scenario: &ScenarioFile,
    out_dir: &Path,
    every: usize,
) -> Result<SummaryReport> {
    let every = every.max(1);
    let mut sim = Simulation::new(scenario.config())?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let table_path = out_dir.join(STEP_TABLE);
    let file = File::create(&table_path).map_err(|e| CliError::io(&table_path, e))?;

    let meta = RunMeta::from_simulation(&scenario.scenario.name, &sim);
    let mut table =
        StepTableWriter::new(BufWriter::new(file), &meta.preamble(), sim.agents().len())?;
    let mut summary = SummaryBuilder::new(meta);

    let outcome = loop {
        match sim.record() {
            Ok(rec) => {
                if rec.step % every == 0 || sim.is_finished() {
                    table.write(&rec)?;
                }
                summary.observe(&rec);
            }
            Err(e) => break Err(e),
        }
        if sim.is_finished() {
            break Ok(());
        }
        if let Err(e) = sim.advance() {
            break Err(e);
        }
    };

    let abort = outcome.err().map(|e| (sim.step_index(), sim.time(), e));
    let trailer = abort
        .as_ref()
        .map(|(step, t, e)| format!("ABORTED at step {step} (t = {t}): {e}"));
    table.finish(trailer.as_deref())?;
    let report = summary.finish(abort.as_ref().map(|(_, _, e)| e.to_string()));
    let summary_path = out_dir.join(SUMMARY);
    let file = File::create(&summary_path).map_err(|e| CliError::io(&summary_path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &report)?;

    match abort {
        Some((step, t, source)) => Err(CliError::Aborted { step, t, source }),
        None => Ok(report),
    }
}

/// Runs the property suite; fails if any property fails.
pub fn cmd_validate(quick: bool) -> Result<Vec<PropertyResult>> {
    let samples = if quick {
        validate::QUICK_SAMPLES
    } else {
        validate::FULL_SAMPLES
    };
    let results = validate::run_suite(samples, 0x5eed);
    print!("{}", validate::Table(&results));
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name)
        .collect();
    if failed.is_empty() {
        Ok(results)
    } else {
        Err(CliError::ValidationFailed(failed.join(", ")))
    }
}
