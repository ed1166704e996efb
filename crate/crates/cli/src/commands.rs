//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use iontrap::analysis::{bell_fidelity, fit_parity_contrast, fit_sideband_nbar, parity_counts, FlopPoint, ShotOutcome, ShotRecord, SidebandFitOptions};
use iontrap::noise::{total_budget, BudgetOptions, ErrorBudget, NoiseModel};

use crate::error::{CliError, CliResult};
use crate::experiments::{beam_rabi_rates, gate_heating_rate, gate_sweep, run_experiment, Outcome};
use crate::output::{parse_shots, render_shots, BudgetDocument, FitDocument, Format, Metadata, TOOL_VERSION};
use crate::scenario::{Experiment, Scenario};

#[derive(Debug, Parser)]
#[command(name = "iontrap", version, about = "Two-ion gate simulation, error budgets and measurement fits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file.
    #[arg(long = "scenario", value_name = "PATH")]
    pub scenario_flag: Option<PathBuf>,
    /// Scenario file, as a positional argument.
    #[arg(value_name = "SCENARIO", conflicts_with = "scenario_flag")]
    pub scenario_pos: Option<PathBuf>,
    /// Override the scenario's root seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory. Without it results go to stdout.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the scenario's experiment with projection noise.
    Run(Common),
    /// Gate error budget for the scenario's noise channels.
    Budget(Common),
    /// Fit a recorded shot file.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Shot-record file written by `run`.
        #[arg(long, value_name = "PATH")]
        shots: PathBuf,
        /// Even population measured without analysis pulses; adds the Bell
        /// fidelity to parity fits.
        #[arg(long)]
        even_population: Option<f64>,
    },
    /// Gate infidelity over the scenario's sweep of a gate parameter.
    Sweep(Common),
    /// Parse and check a scenario.
    Validate(Common),
}

impl Common {
    fn scenario_path(&self) -> CliResult<&Path> {
        self.scenario_flag
            .as_deref()
            .or(self.scenario_pos.as_deref())
            .ok_or_else(|| CliError::Parse("no scenario given".into()))
    }

    fn load(&self) -> CliResult<(Scenario, Metadata)> {
        let scenario = Scenario::load(self.scenario_path()?)?;
        let meta = Metadata {
            scenario: scenario.name.clone(),
            seed: self.seed.unwrap_or(scenario.seed),
            config_sha256: scenario.config_hash(),
            tool_version: TOOL_VERSION.into(),
        };
        Ok((scenario, meta))
    }

    fn ext(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
        }
    }

    fn emit(&self, name: &str, text: &str) -> CliResult<()> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(name), text)?;
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn in_pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> CliResult<R> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.jobs {
            if n == 0 {
                return Err(CliError::Validation("--jobs must be at least 1".into()));
            }
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(pool.install(f))
    }
}

/// Channels for the budget; the gate mode's own heating rate stands in for a
/// missing heating channel.
pub fn budget_channels(s: &Scenario) -> CliResult<Vec<NoiseModel>> {
    let mut channels = s.noise_models()?;
    if !channels.iter().any(|c| matches!(c, NoiseModel::Heating { .. })) {
        let rate = gate_heating_rate(s)?;
        if rate > 0.0 {
            channels.push(NoiseModel::Heating { rate });
        }
    }
    Ok(channels)
}

pub fn compute_budget(s: &Scenario) -> CliResult<ErrorBudget> {
    s.validate()?;
    let ctx = s.gate_context()?;
    let options = BudgetOptions { curve_nodes: s.budget.curve_nodes, trajectory_points: s.budget.trajectory_points };
    Ok(total_budget(&ctx, &budget_channels(s)?, &options)?)
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate(c) => {
            let (s, meta) = c.load()?;
            s.validate()?;
            println!("{}: ok (config_sha256 {})", s.name, meta.config_sha256);
        }
        Command::Run(c) => {
            let (s, meta) = c.load()?;
            let out = c.in_pool(|| run_experiment(&s, meta.seed))??;
            let unit = match s.experiment {
                Experiment::ParityScan => "rad",
                _ => "us",
            };
            c.emit(&format!("{}.{}", s.name, c.ext()), &out.table.render(&meta, c.format))?;
            if c.out.is_some() {
                c.emit(&format!("{}.shots.{}", s.name, c.ext()), &render_shots(&out.shots, unit, &meta, c.format))?;
            }
        }
        Command::Sweep(c) => {
            let (s, meta) = c.load()?;
            let table = c.in_pool(|| gate_sweep(&s))??;
            c.emit(&format!("{}.sweep.{}", s.name, c.ext()), &table.render(&meta, c.format))?;
        }
        Command::Budget(c) => {
            let (s, meta) = c.load()?;
            let budget = c.in_pool(|| compute_budget(&s))??;
            let doc = BudgetDocument::new(meta, &budget);
            print!("{}", doc.table());
            if c.out.is_some() {
                c.emit(&format!("{}.budget.toml", s.name), &doc.to_toml())?;
            } else {
                println!();
                print!("{}", doc.to_toml());
            }
        }
        Command::Fit { common: c, shots, even_population } => {
            let (s, meta) = c.load()?;
            let text = std::fs::read_to_string(&shots).map_err(|e| CliError::Parse(format!("{}: {e}", shots.display())))?;
            let doc = fit_shots(&s, meta, &parse_shots(&text)?, even_population)?;
            let text = doc.to_toml();
            if c.out.is_some() {
                c.emit(&format!("{}.fit.toml", s.name), &text)?;
            } else {
                print!("{text}");
            }
        }
    }
    Ok(())
}

/// Fit chosen by the scenario's experiment: parity contrast for a parity
/// scan, mean occupation for sideband flopping.
pub fn fit_shots(s: &Scenario, meta: Metadata, shots: &[crate::experiments::ShotLine], even_population: Option<f64>) -> CliResult<FitDocument> {
    match s.experiment {
        Experiment::ParityScan => {
            let records = shots
                .iter()
                .map(|l| {
                    let outcome = match l.outcome {
                        Outcome::BothDown => ShotOutcome::BothDown,
                        Outcome::Mixed => ShotOutcome::Mixed,
                        Outcome::BothUp => ShotOutcome::BothUp,
                        _ => return Err(CliError::Validation("parity fit needs two-ion outcomes".into())),
                    };
                    Ok(ShotRecord { outcome, analysis_phase: l.sweep_value, shot_index: l.shot_index })
                })
                .collect::<CliResult<Vec<_>>>()?;
            let fit = fit_parity_contrast(&parity_counts(&records, None)?)?;
            let fidelity = match even_population {
                Some(p) => Some(bell_fidelity(p, fit.param("contrast"))?),
                None => None,
            };
            Ok(FitDocument::new(meta, "parity_contrast", &fit, fidelity))
        }
        Experiment::SidebandFlop => {
            let mut groups: Vec<(f64, u64, u64)> = Vec::new();
            for l in shots {
                let up = match l.outcome {
                    Outcome::Up => 1,
                    Outcome::Down => 0,
                    _ => return Err(CliError::Validation("sideband fit needs single-ion outcomes".into())),
                };
                match groups.iter_mut().find(|g| g.0 == l.sweep_value) {
                    Some(g) => {
                        g.1 += up;
                        g.2 += 1;
                    }
                    None => groups.push((l.sweep_value, up, 1)),
                }
            }
            let data: Vec<FlopPoint> = groups
                .iter()
                .map(|&(t, up, n)| {
                    let p = up as f64 / n as f64;
                    // Floor at one shot so points at 0 or 1 keep a finite weight.
                    let stderr = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
                    FlopPoint { time: t * 1e-6, excitation: p, stderr }
                })
                .collect();
            let mode = s.gate_mode()?;
            let fit = fit_sideband_nbar(&data, beam_rabi_rates(s)?[0], mode.eta[0], SidebandFitOptions::default())?;
            Ok(FitDocument::new(meta, "sideband_nbar", &fit, None))
        }
        other => Err(CliError::Validation(format!("no fit for experiment {other:?}"))),
    }
}
