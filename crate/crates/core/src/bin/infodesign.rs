use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use infodesign::channel::{self, Dmc, CAPACITY_MAX_ITER, CAPACITY_TOL};
use infodesign::coding::{
    deviation_gaps, generate_codebook, posterior_belief_audit, random_responses,
    run_experiment_with, AuditReport, CodingConfig, ExperimentSummary, RateBounds,
};
use infodesign::mac::{
    best_reply_curve, mode_for, scenario_from_json, utility_surface, DEFAULT_CONFIG,
};
use infodesign::persuasion::{solve_equilibrium, Scenario, SolveMode, DEFAULT_SOLVER_RESOLUTION};
use infodesign::report::{self, RunManifest};
use infodesign::splitting::{region_scan, FeasibilityMode, DEFAULT_REGION_RESOLUTION};
use infodesign::{Error, Result};

/// Information design over noisy channels: persuasion solver, feasibility
/// regions and a random-coding simulator.
#[derive(Parser)]
#[command(name = "infodesign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the primary output here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Manifest path (default: `<output>.manifest.json`, or stderr when
    /// writing to stdout)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Unconstrained,
    #[value(alias = "one_shot")]
    OneShot,
    Block,
}

impl Mode {
    fn kind(self) -> FeasibilityMode {
        match self {
            Mode::Unconstrained => FeasibilityMode::Unconstrained,
            Mode::OneShot => FeasibilityMode::OneShot,
            Mode::Block => FeasibilityMode::Block,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Channel capacity (JSON)
    Capacity {
        /// BSC crossover probability
        #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
        bsc: Option<f64>,
        /// JSON file holding a row-stochastic matrix
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = CAPACITY_TOL)]
        tol: f64,
        #[arg(long, default_value_t = CAPACITY_MAX_ITER)]
        max_iter: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Feasible posterior regions over a BSC (CSV)
    Region {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_REGION_RESOLUTION)]
        resolution: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Receiver best reply along the prior (CSV)
    Bestreply {
        /// Scenario JSON (default: the bundled MAC scenario)
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SOLVER_RESOLUTION)]
        step: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Expected utilities over posterior pairs (CSV)
    Surface {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        /// BSC crossover used for region labels and feasibility
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Sender-optimal signaling structure (JSON)
    Solve {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        /// BSC crossover (one-shot and block modes)
        #[arg(long)]
        eps: Option<f64>,
        /// Channel capacity in bits (block mode, instead of --eps)
        #[arg(long, conflicts_with = "eps")]
        capacity: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SOLVER_RESOLUTION)]
        resolution: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo random-coding experiment (JSON summary)
    Simulate {
        #[arg(long)]
        experiment: PathBuf,
        /// Override the block length
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write per-trial results as CSV
        #[arg(long)]
        trials_csv: Option<PathBuf>,
        /// Run even when the rate violates the covering or packing bound
        #[arg(long)]
        allow_infeasible: bool,
        /// Add the exact posterior-belief audit (small n only)
        #[arg(long)]
        audit: bool,
        /// Test this many random deterministic receiver deviations
        #[arg(long)]
        deviations: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
}

struct Run {
    manifest: RunManifest,
    primary: Vec<u8>,
    extra: Vec<(PathBuf, Vec<u8>)>,
    out: Output,
}

fn read_input(manifest: &mut RunManifest, path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    manifest.input(&path.display().to_string(), &bytes);
    String::from_utf8(bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_scenario(manifest: &mut RunManifest, path: &Option<PathBuf>) -> Result<Scenario> {
    match path {
        Some(p) => {
            let text = read_input(manifest, p)?;
            scenario_from_json(&text).map_err(|e| in_file(p, e))
        }
        None => {
            manifest.input("<bundled mac.json>", DEFAULT_CONFIG.as_bytes());
            scenario_from_json(DEFAULT_CONFIG)
        }
    }
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn path_or_bundled(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "<bundled mac.json>".into())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

#[derive(Serialize)]
struct DeviationReport {
    count: usize,
    seed: u64,
    max_gap: f64,
    gaps: Vec<f64>,
}

#[derive(Serialize)]
struct SimulationReport {
    summary: ExperimentSummary,
    rate_bounds: RateBounds,
    #[serde(skip_serializing_if = "Option::is_none")]
    deviation: Option<DeviationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<AuditReport>,
}

fn execute(command: Command) -> Result<Run> {
    match command {
        Command::Capacity {
            bsc,
            matrix,
            tol,
            max_iter,
            out,
        } => {
            let mut m = RunManifest::new(
                "capacity",
                json!({ "bsc": bsc, "matrix": matrix, "tol": tol, "max_iter": max_iter }),
            );
            let ch = match (bsc, &matrix) {
                (Some(eps), _) => channel::bsc(eps)?,
                (None, Some(path)) => {
                    let text = read_input(&mut m, path)?;
                    serde_json::from_str::<Dmc>(&text).map_err(|e| in_file(path, e.into()))?
                }
                (None, None) => unreachable!("clap requires one channel"),
            };
            let result = channel::capacity_with(&ch, tol, max_iter)?;
            Ok(Run {
                manifest: m,
                primary: report::to_json(&result)?.into_bytes(),
                extra: vec![],
                out,
            })
        }
        Command::Region {
            p,
            eps,
            resolution,
            out,
        } => {
            let m = RunManifest::new(
                "region",
                json!({ "p": p, "eps": eps, "resolution": resolution }),
            );
            let grid = region_scan(p, eps, resolution)?;
            Ok(Run {
                manifest: m,
                primary: csv_bytes(|b| report::write_region_csv(&grid, b))?,
                extra: vec![],
                out,
            })
        }
        Command::Bestreply {
            scenario,
            step,
            out,
        } => {
            let mut m = RunManifest::new(
                "bestreply",
                json!({ "scenario": path_or_bundled(&scenario), "step": step }),
            );
            let sc = load_scenario(&mut m, &scenario)?;
            let curve = best_reply_curve(&sc, step)?;
            Ok(Run {
                manifest: m,
                primary: csv_bytes(|b| report::write_curve_csv(&curve, b))?,
                extra: vec![],
                out,
            })
        }
        Command::Surface {
            scenario,
            mode,
            eps,
            resolution,
            out,
        } => {
            let mut m = RunManifest::new(
                "surface",
                json!({
                    "scenario": path_or_bundled(&scenario),
                    "mode": mode.kind(),
                    "eps": eps,
                    "resolution": resolution,
                }),
            );
            let sc = load_scenario(&mut m, &scenario)?;
            let surface = utility_surface(&sc, mode.kind(), eps, resolution)?;
            Ok(Run {
                manifest: m,
                primary: csv_bytes(|b| report::write_surface_csv(&surface, b))?,
                extra: vec![],
                out,
            })
        }
        Command::Solve {
            scenario,
            mode,
            eps,
            capacity,
            resolution,
            out,
        } => {
            let solve_mode = match (mode, eps, capacity) {
                (Mode::Unconstrained, _, _) => SolveMode::Unconstrained,
                (Mode::Block, None, Some(capacity)) => SolveMode::Block { capacity },
                (Mode::OneShot, None, Some(_)) => {
                    return Err(Error::InvalidConfig(
                        "--capacity applies to block mode; one-shot mode needs --eps".into(),
                    ))
                }
                (_, Some(eps), _) => mode_for(mode.kind(), eps)?,
                (_, None, None) => {
                    return Err(Error::InvalidConfig(
                        "one-shot and block modes need --eps (or --capacity for block)".into(),
                    ))
                }
            };
            let mut m = RunManifest::new(
                "solve",
                json!({
                    "scenario": path_or_bundled(&scenario),
                    "mode": solve_mode,
                    "eps": eps,
                    "resolution": resolution,
                }),
            );
            let sc = load_scenario(&mut m, &scenario)?;
            let result = solve_equilibrium(&sc, solve_mode, resolution)?;
            Ok(Run {
                manifest: m,
                primary: report::to_json(&result)?.into_bytes(),
                extra: vec![],
                out,
            })
        }
        Command::Simulate {
            experiment,
            n,
            trials,
            seed,
            trials_csv,
            allow_infeasible,
            audit,
            deviations,
            out,
        } => {
            let mut m = RunManifest::new("simulate", json!(null));
            let text = read_input(&mut m, &experiment)?;
            let mut cfg = CodingConfig::from_json(&text).map_err(|e| in_file(&experiment, e))?;
            if let Some(n) = n {
                cfg = cfg.with_n(n)?;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let trials = trials.unwrap_or(cfg.trials);
            let rate_bounds = if allow_infeasible {
                cfg.rate_bounds()?
            } else {
                cfg.check_rate()?
            };
            m.parameters = json!({
                "experiment": experiment.display().to_string(),
                "n": cfg.n,
                "rate": cfg.rate,
                "eps_typ": cfg.eps_typ,
                "radius_scaling": cfg.radius_scaling,
                "trials": trials,
                "allow_infeasible": allow_infeasible,
                "audit": audit,
                "deviations": deviations,
            });
            m.seed = Some(cfg.seed);
            let cb = generate_codebook(&cfg)?;
            let exp = run_experiment_with(&cfg, &cb, trials)?;
            let deviation = match deviations {
                Some(count) => {
                    let alts = random_responses(
                        count,
                        cfg.response.inputs(),
                        cfg.response.outputs(),
                        cfg.seed,
                    )?;
                    let gaps = deviation_gaps(&cfg, &cb, &alts, trials)?;
                    Some(DeviationReport {
                        count,
                        seed: cfg.seed,
                        max_gap: gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                        gaps,
                    })
                }
                None => None,
            };
            let audit = if audit {
                Some(posterior_belief_audit(&cfg, &cb, trials)?)
            } else {
                None
            };
            let mut extra = Vec::new();
            if let Some(path) = trials_csv {
                extra.push((
                    path,
                    csv_bytes(|b| report::write_trials_csv(&exp.trials, b))?,
                ));
            }
            let out_report = SimulationReport {
                summary: exp.summary,
                rate_bounds,
                deviation,
                audit,
            };
            Ok(Run {
                manifest: m,
                primary: report::to_json(&out_report)?.into_bytes(),
                extra,
                out,
            })
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn finish(mut run: Run, started: Instant) -> Result<()> {
    match &run.out.output {
        Some(path) => {
            write_file(path, &run.primary)?;
            run.manifest
                .output(&path.display().to_string(), &run.primary);
        }
        None => {
            std::io::stdout().write_all(&run.primary)?;
            run.manifest.output("<stdout>", &run.primary);
        }
    }
    for (path, bytes) in &run.extra {
        write_file(path, bytes)?;
        run.manifest.output(&path.display().to_string(), bytes);
    }
    run.manifest.duration_ms = started.elapsed().as_secs_f64() * 1e3;
    let text = report::to_json(&run.manifest)?;
    let target = run.out.manifest.clone().or_else(|| {
        run.out.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match target {
        Some(path) => write_file(&path, text.as_bytes()),
        None => Ok(std::io::stderr().write_all(text.as_bytes())?),
    }
}

fn emit_error(kind: &str, message: &str) {
    let body = json!({ "error": { "kind": kind, "message": message.trim_end() } });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            emit_error("usage", &e.render().to_string());
            return ExitCode::from(2);
        }
    };
    let started = Instant::now();
    match execute(cli.command).and_then(|run| finish(run, started)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
