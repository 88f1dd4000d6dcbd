//! `qsn`: audits, canned scenarios, bound sweeps and single-probe QFIM
//! reports.
//!
//! Exit codes: 0 when every check passes, 1 on an audit violation, 2 on a
//! configuration or input error.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qsn_core::bounds::{BoundComparison, LinearFunctional};
use qsn_core::report::{cell, format_f64, Table};
use qsn_core::scenarios::{
    audit_prop1, audit_theorem1, audit_theorem2, probe_report, scenario_gradient,
    scenario_optical_phases, AuditResult, GradientReport, OpticalReport, ProbeReport,
    ScenarioConfig, ScenarioId,
};
use qsn_core::{Probe, QsnError, SensorNetwork, WeightMatrix};

use output::{Emitter, Format};

#[derive(Parser, Debug)]
#[command(
    name = "qsn",
    version,
    about = "Fisher-information audits for networks of quantum sensors"
)]
struct Cli {
    /// RNG seed; each audit has its own default.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of randomized trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Directory for results and the run manifest. Without it results go to
    /// stdout and the manifest to stderr.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Violation tolerance for audit checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Randomized audit of a bound inequality.
    Audit {
        #[arg(value_enum)]
        which: AuditKind,
        /// Scenario config JSON; command-line flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Canned experiment.
    Scenario {
        #[arg(value_enum)]
        which: ScenarioKind,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Particle (or photon) budget.
        #[arg(long = "N")]
        n: Option<usize>,
        /// Repetitions.
        #[arg(long)]
        mu: Option<u64>,
        /// Number of optical modes.
        #[arg(long)]
        d: Option<usize>,
        /// Fock cutoff per mode.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Closed-form bounds for uniform functionals.
    Bounds {
        #[arg(value_enum)]
        which: BoundsKind,
        /// Largest number of sensors.
        #[arg(long, default_value_t = 8)]
        d_max: usize,
        /// Particle budget; defaults to `d` for each row.
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1)]
        mu: u64,
    },
    /// QFIM, Cramér-Rao bound and resources of one probe.
    Qfim {
        network: PathBuf,
        state: PathBuf,
        /// Diagonal of W, comma separated; identity by default.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        mu: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AuditKind {
    T1,
    T2,
    Prop1,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScenarioKind {
    Gradient,
    Optical,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BoundsKind {
    Sweep,
}

/// Failure split by exit code.
enum Failure {
    Config(String),
}

impl From<QsnError> for Failure {
    fn from(e: QsnError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("I/O error: {e}"))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: qsn_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn scenario_config(
    cli: &Cli,
    id: ScenarioId,
    file: Option<&PathBuf>,
    default_seed: u64,
    default_trials: usize,
) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match file {
        Some(path) => {
            let cfg = with_path(path, ScenarioConfig::from_json_str(&read(path)?))?;
            if cfg.scenario != id {
                return Err(Failure::Config(format!(
                    "{}: config is for scenario {:?}, not {:?}",
                    path.display(),
                    cfg.scenario.name(),
                    id.name()
                )));
            }
            cfg
        }
        None => ScenarioConfig::new(id, default_seed, default_trials),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if cli.tol.is_some() {
        cfg.tol = cli.tol;
    }
    Ok(cfg)
}

fn audit_table(a: &AuditResult) -> Table {
    let template = a.records.iter().find(|r| !r.exhausted);
    let value_names: Vec<String> = template
        .map(|r| r.values.iter().map(|v| v.name.clone()).collect())
        .unwrap_or_default();
    let check_names: Vec<String> = a.summary.iter().map(|c| c.name.clone()).collect();
    let mut headers = vec![
        "trial".to_string(),
        "attempts".into(),
        "exhausted".into(),
        "input_hash".into(),
    ];
    headers.extend(value_names.iter().cloned());
    headers.extend(check_names.iter().map(|c| format!("violation_{c}")));
    headers.push("passed".into());
    let mut table = Table {
        headers,
        rows: Vec::new(),
    };
    for r in &a.records {
        let mut row = vec![
            r.index.to_string(),
            r.attempts.to_string(),
            r.exhausted.to_string(),
            r.input_hash.clone(),
        ];
        row.extend(value_names.iter().map(|n| cell(r.value(n))));
        row.extend(
            check_names
                .iter()
                .map(|n| cell(r.check(n).map(|c| c.violation))),
        );
        row.push(r.passed().to_string());
        table.push(row);
    }
    table
}

fn gradient_table(r: &GradientReport) -> Table {
    let mut t = Table::new(&[
        "N",
        "mu",
        "allocation",
        "ghz_bound",
        "separable_bound",
        "ratio",
        "ghz_state_bound",
        "separable_state_bound",
        "state_ratio",
        "sum_parameter_qfi",
        "passed",
    ]);
    t.push(vec![
        r.n.to_string(),
        r.mu.to_string(),
        r.allocation
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(" "),
        format_f64(r.comparison.ghz_bound),
        format_f64(r.comparison.separable_bound),
        format_f64(r.comparison.ratio),
        format_f64(r.ghz_state_bound),
        format_f64(r.separable_state_bound),
        format_f64(r.state_ratio),
        format_f64(r.sum_parameter_qfi),
        r.passed.to_string(),
    ]);
    t
}

fn optical_table(r: &OpticalReport) -> Table {
    let mut t = Table::new(&[
        "mode",
        "n_max",
        "extremal_qfi",
        "per_mode_bound",
        "cutoff_weight",
        "allocated_photons",
    ]);
    for k in 0..r.modes {
        t.push(vec![
            k.to_string(),
            r.n_max.to_string(),
            format_f64(r.extremal_qfi[k]),
            format_f64(r.per_mode_bound[k]),
            format_f64(r.cutoff_weights[k]),
            r.allocation[k].to_string(),
        ]);
    }
    t
}

fn sweep_table(rows: &[BoundComparison]) -> Table {
    let mut t = Table::new(&[
        "d",
        "N",
        "kappa",
        "mu",
        "sep_bound",
        "sep_bound_l1",
        "ghz_bound",
        "ratio",
        "ghz_constructible",
    ]);
    for r in rows {
        t.push(vec![
            r.d.to_string(),
            r.n.to_string(),
            format_f64(r.kappa),
            r.mu.to_string(),
            format_f64(r.separable_bound),
            format_f64(r.separable_bound_l1),
            format_f64(r.ghz_bound),
            format_f64(r.ratio),
            r.ghz_constructible.to_string(),
        ]);
    }
    t
}

fn qfim_table(r: &ProbeReport) -> Table {
    let d = r.qfim.len();
    let mut headers: Vec<String> = vec!["parameter".into()];
    headers.extend((0..d).map(|j| format!("F_{j}")));
    headers.push("inverse_diagonal".into());
    let mut t = Table {
        headers,
        rows: Vec::new(),
    };
    for (i, row) in r.qfim.iter().enumerate() {
        let mut cells = vec![i.to_string()];
        cells.extend(row.iter().map(|&x| format_f64(x)));
        cells.push(cell(r.bound.diag_inverse[i]));
        t.push(cells);
    }
    t
}

#[derive(Serialize)]
struct SweepReport {
    rows: Vec<BoundComparison>,
}

fn run(cli: &Cli, emitter: &mut Emitter) -> Result<bool, Failure> {
    match &cli.command {
        Command::Audit { which, config } => {
            let (id, seed, trials) = match which {
                AuditKind::T1 => (ScenarioId::Theorem1, 42, 200),
                AuditKind::T2 => (ScenarioId::Theorem2, 7, 200),
                AuditKind::Prop1 => (ScenarioId::Prop1, 3, 1000),
            };
            let cfg = scenario_config(cli, id, config.as_ref(), seed, trials)?;
            emitter.config(&cfg, Some(cfg.seed));
            let result = match which {
                AuditKind::T1 => audit_theorem1(&cfg),
                AuditKind::T2 => audit_theorem2(&cfg),
                AuditKind::Prop1 => audit_prop1(&cfg),
            }?;
            eprintln!(
                "{}: {} trials, max violation {}, {}",
                result.scenario,
                result.trials_run,
                format_f64(result.max_violation),
                if result.passed { "pass" } else { "FAIL" }
            );
            emitter.emit(id.name(), &result, &audit_table(&result))?;
            Ok(result.passed)
        }
        Command::Scenario {
            which,
            config,
            n,
            mu,
            d,
            n_max,
        } => {
            let id = match which {
                ScenarioKind::Gradient => ScenarioId::Gradient,
                ScenarioKind::Optical => ScenarioId::Optical,
            };
            let default_trials = if matches!(which, ScenarioKind::Optical) {
                20
            } else {
                1
            };
            let mut cfg = scenario_config(cli, id, config.as_ref(), 0, default_trials)?;
            cfg.n = n.or(cfg.n);
            cfg.mu = mu.or(cfg.mu);
            cfg.d = d.or(cfg.d);
            cfg.n_max = n_max.or(cfg.n_max);
            cfg.validate()?;
            emitter.config(&cfg, Some(cfg.seed));
            match which {
                ScenarioKind::Gradient => {
                    let r = scenario_gradient(&cfg)?;
                    emitter.emit(id.name(), &r, &gradient_table(&r))?;
                    Ok(r.passed)
                }
                ScenarioKind::Optical => {
                    let r = scenario_optical_phases(&cfg)?;
                    if r.truncation_warning {
                        eprintln!("warning: probe weight on the Fock cutoff exceeds 1e-12");
                    }
                    emitter.emit(id.name(), &r, &optical_table(&r))?;
                    Ok(r.passed)
                }
            }
        }
        Command::Bounds {
            which: BoundsKind::Sweep,
            d_max,
            n,
            kappa,
            mu,
        } => {
            if *d_max == 0 {
                return Err(Failure::Config("--d-max must be positive".into()));
            }
            emitter.config(
                &serde_json::json!({"d_max": d_max, "N": n, "kappa": kappa, "mu": mu}),
                None,
            );
            let rows = (1..=*d_max)
                .map(|d| {
                    let f = LinearFunctional::uniform(d, *kappa, n.unwrap_or(d), *mu)?;
                    Ok(BoundComparison::new(&f))
                })
                .collect::<qsn_core::Result<Vec<_>>>()?;
            let table = sweep_table(&rows);
            emitter.emit("bounds_sweep", &SweepReport { rows }, &table)?;
            Ok(true)
        }
        Command::Qfim {
            network,
            state,
            weights,
            mu,
        } => {
            let net = with_path(network, SensorNetwork::from_json_str(&read(network)?))?;
            let probe = with_path(state, Probe::from_json_str(&read(state)?))?;
            let w = match weights {
                Some(w) => WeightMatrix::new(w.clone())?,
                None => WeightMatrix::identity(net.parameter_count()),
            };
            emitter.config(
                &serde_json::json!({
                    "network": network.display().to_string(),
                    "state": state.display().to_string(),
                    "weights": w.diagonal(),
                    "mu": mu,
                }),
                None,
            );
            let report = probe_report(&net, &probe, &w, *mu)?;
            emitter.emit("qfim", &report, &qfim_table(&report))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut emitter = Emitter::new(cli.out.clone(), cli.format);
    let outcome = run(&cli, &mut emitter);
    let code = match &outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    };
    if let Err(Failure::Config(e)) = emitter.finish(code) {
        eprintln!("error: writing manifest: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
