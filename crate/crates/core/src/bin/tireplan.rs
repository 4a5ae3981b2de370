use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use tireplan::evaluator::{
    audit, compare, compute_kpis, load_plan, read_kpi_csv, save_plan, summarize_gaps,
    write_kpi_csv, write_violations_csv, GapReport, GapStat, DEFAULT_AUDIT_CAP,
};
use tireplan::instance::{generate, SizeSpec};
use tireplan::integrated::solve_integrated;
use tireplan::matheuristic::{run_rolling_horizon, write_manifest, RunConfig};
use tireplan::milp::{MilpError, SolverConfig};
use tireplan::scenarios::{matheuristic_runner, run_sensitivity, write_results_csv, ScenarioFile};
use tireplan::taguchi::{run_doe, write_doe_csv, write_effects_csv, FactorLevels};
use tireplan::{Error, Instance, ObjectiveWeights};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(
    name = "tireplan",
    version,
    about = "Lot sizing and press scheduling for tire curing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Integrated,
    Matheuristic,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic instance.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `plant`, `small`, `tiny`, or a size specification JSON file.
        #[arg(long, default_value = "small")]
        scale: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance; writes plan.json, manifest.json and kpi.csv.
    Solve {
        #[arg(long, value_enum, default_value = "matheuristic")]
        mode: Mode,
        #[arg(long)]
        instance: PathBuf,
        /// Objective weights JSON; the calibrated setting when absent.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Seconds per lot-sizing and per assignment solve, `LSSP[,ASSP]`.
        /// The integrated mode uses the first value.
        #[arg(long, value_parser = parse_limits)]
        time_limits: Option<(Duration, Duration)>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit a plan; exits 0 only when it is feasible.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Violations CSV; `<plan>.violations.csv` when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_AUDIT_CAP)]
        cap: usize,
    },
    /// KPI report of a plan.
    Kpi {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Dataset label of the CSV row; the instance name when absent.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weight calibration over the sixteen rows of the orthogonal array.
    Calibrate {
        #[arg(long)]
        instance: PathBuf,
        /// Factor levels JSON; the default grid when absent.
        #[arg(long)]
        levels: Option<PathBuf>,
        #[arg(long, value_parser = parse_limits)]
        time_limits: Option<(Duration, Duration)>,
        /// Output directory for doe.csv and effects.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Eligibility sensitivity study.
    Sensitivity {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, value_parser = parse_limits)]
        time_limits: Option<(Duration, Duration)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Percentage gaps of KPI file `b` against reference file `a`, matched
    /// by dataset, with mean and standard deviation rows.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_limits(s: &str) -> Result<(Duration, Duration), String> {
    let secs = |t: &str| -> Result<Duration, String> {
        let v: f64 = t
            .trim()
            .parse()
            .map_err(|_| format!("{t:?} is not a number of seconds"))?;
        if v.is_finite() && v > 0.0 {
            Ok(Duration::from_secs_f64(v))
        } else {
            Err(format!("time limit {v} must be positive"))
        }
    };
    match s.split_once(',') {
        Some((a, b)) => Ok((secs(a)?, secs(b)?)),
        None => {
            let v = secs(s)?;
            Ok((v, v))
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInstance(_)
            | Error::InvalidSizeSpec(_)
            | Error::Parse(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Dimension(_)
            | Error::Io(_) => EXIT_PARSE,
            Error::Milp(MilpError::NoSolution { .. }) | Error::WeekFailed { .. } => EXIT_INFEASIBLE,
            Error::Milp(_) | Error::Decode(_) => EXIT_SOLVER,
            Error::Scenario(_) | Error::Calibration(_) => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn load_weights(path: Option<&Path>, inst: &Instance) -> Result<ObjectiveWeights, Failure> {
    let w = match path {
        Some(p) => ObjectiveWeights::load(p)?,
        None => ObjectiveWeights::calibrated(inst.sets.classes),
    };
    w.check(inst.sets.classes)?;
    Ok(w)
}

fn run_config(limits: Option<(Duration, Duration)>) -> RunConfig {
    let mut config = RunConfig::default();
    if let Some((lssp, assp)) = limits {
        config.lssp_time_limit = lssp;
        config.assp_time_limit = assp;
    }
    config
}

fn size_spec(scale: &str) -> Result<SizeSpec, Failure> {
    Ok(match scale {
        "plant" => SizeSpec::plant_scale(),
        "small" => SizeSpec::small(6, 4, 7),
        "tiny" => SizeSpec::small(2, 2, 7),
        path => serde_json::from_str(
            &std::fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("{path}: {e}")))?,
        )
        .map_err(|e| fail(EXIT_PARSE, format!("{path}: {e}")))?,
    })
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Generate { seed, scale, out } => {
            let inst = generate(seed, &size_spec(&scale)?)?;
            inst.save(&out)?;
            Ok(format!(
                "generated {} items, {} presses, {} periods -> {}",
                inst.sets.items,
                inst.sets.presses,
                inst.periods(),
                out.display()
            ))
        }
        Command::Solve {
            mode,
            instance,
            weights,
            time_limits,
            out,
        } => {
            let inst = Instance::load(&instance)?;
            let weights = load_weights(weights.as_deref(), &inst)?;
            std::fs::create_dir_all(&out).map_err(Error::from)?;
            let config = run_config(time_limits);
            let plan = match mode {
                Mode::Integrated => {
                    let solver = SolverConfig::default().with_time_limit(config.lssp_time_limit);
                    let sol = solve_integrated(&inst, &weights, &solver)?;
                    let manifest = serde_json::json!({
                        "instance": inst.meta.name,
                        "mode": "integrated",
                        "status": sol.status,
                        "objective": sol.objective,
                        "gap": sol.gap,
                        "solve_seconds": sol.solve_time.as_secs_f64(),
                    });
                    std::fs::write(
                        out.join("manifest.json"),
                        serde_json::to_string_pretty(&manifest).map_err(Error::from)? + "\n",
                    )
                    .map_err(Error::from)?;
                    sol.plan.ok_or_else(|| {
                        fail(
                            EXIT_INFEASIBLE,
                            format!("solver reported {} without a plan", sol.status),
                        )
                    })?
                }
                Mode::Matheuristic => {
                    let result = run_rolling_horizon(&inst, &weights, &config)?;
                    write_manifest(out.join("manifest.json"), &inst, &weights, &config, &result)?;
                    match (result.plan, result.failure) {
                        (Some(plan), _) => plan,
                        (None, Some((week, reason))) => {
                            return Err(fail(
                                EXIT_INFEASIBLE,
                                format!("week {week} failed: {reason}"),
                            ))
                        }
                        (None, None) => return Err(fail(EXIT_FAILURE, "run produced no plan")),
                    }
                }
            };
            save_plan(out.join("plan.json"), &inst, &plan)?;
            let report = compute_kpis(&inst, &plan, &weights);
            write_kpi_csv(
                out.join("kpi.csv"),
                &[(inst.meta.name.clone(), report.clone())],
            )?;
            Ok(format!(
                "OF={:.6} BT={} OS={} US={} -> {}",
                report.of,
                report.bt,
                report.os,
                report.us,
                out.display()
            ))
        }
        Command::Validate {
            instance,
            plan,
            out,
            cap,
        } => {
            let inst = Instance::load(&instance)?;
            let solution = load_plan(&plan, &inst)?;
            let report = audit(&inst, &solution, cap)?;
            let out = out.unwrap_or_else(|| plan.with_extension("violations.csv"));
            write_violations_csv(&out, &report.violations)?;
            if report.is_feasible() {
                Ok(format!("feasible -> {}", out.display()))
            } else {
                Err(fail(
                    EXIT_INFEASIBLE,
                    format!("{} violation(s) -> {}", report.total, out.display()),
                ))
            }
        }
        Command::Kpi {
            instance,
            plan,
            weights,
            name,
            out,
        } => {
            let inst = Instance::load(&instance)?;
            let weights = load_weights(weights.as_deref(), &inst)?;
            let solution = load_plan(&plan, &inst)?;
            let report = compute_kpis(&inst, &solution, &weights);
            write_kpi_csv(
                &out,
                &[(
                    name.unwrap_or_else(|| inst.meta.name.clone()),
                    report.clone(),
                )],
            )?;
            Ok(format!(
                "OF={:.6} BT={} -> {}",
                report.of,
                report.bt,
                out.display()
            ))
        }
        Command::Calibrate {
            instance,
            levels,
            time_limits,
            out,
        } => {
            let inst = Instance::load(&instance)?;
            let levels = match levels {
                Some(p) => FactorLevels::load(p)?,
                None => FactorLevels::default(),
            };
            let config = run_config(time_limits);
            let doe = run_doe(&inst, &levels, |inst, w| {
                matheuristic_runner(w, &config)(inst)
            })?;
            std::fs::create_dir_all(&out).map_err(Error::from)?;
            write_doe_csv(out.join("doe.csv"), &doe)?;
            write_effects_csv(out.join("effects.csv"), &doe)?;
            let ok = doe.rows.iter().filter(|r| r.sn.is_some()).count();
            let best = doe.best_row.map_or("none".to_string(), |r| r.to_string());
            Ok(format!(
                "{ok}/16 rows solved, best row {best} -> {}",
                out.display()
            ))
        }
        Command::Sensitivity {
            instance,
            scenarios,
            weights,
            time_limits,
            out,
        } => {
            let inst = Instance::load(&instance)?;
            let weights = load_weights(weights.as_deref(), &inst)?;
            let file = ScenarioFile::load(&scenarios)?;
            let config = run_config(time_limits);
            let result = run_sensitivity(&inst, &file, matheuristic_runner(&weights, &config))?;
            write_results_csv(&out, &result)?;
            let failed = result.cells.iter().filter(|c| c.report.is_none()).count();
            Ok(format!(
                "{} cells, {failed} failed -> {}",
                result.cells.len(),
                out.display()
            ))
        }
        Command::Compare { a, b, out } => {
            let a = read_kpi_csv(&a)?;
            let b = read_kpi_csv(&b)?;
            let mut rows: Vec<(String, GapReport)> = Vec::new();
            for (name, rb) in &b {
                let Some((_, ra)) = a.iter().find(|(n, _)| n == name) else {
                    return Err(fail(
                        EXIT_PARSE,
                        format!("dataset {name} is missing from the reference file"),
                    ));
                };
                rows.push((name.clone(), compare(ra, rb)?));
            }
            if rows.is_empty() {
                return Err(fail(EXIT_PARSE, "no dataset to compare"));
            }
            write_gap_table(&out, &rows)?;
            let stats = summarize_gaps(&rows.iter().map(|(_, g)| g.clone()).collect::<Vec<_>>());
            let means: Vec<String> = stats
                .iter()
                .map(|s| format!("{}={:+.0}%", s.kpi, s.mean))
                .collect();
            Ok(format!(
                "mean gaps {} -> {}",
                means.join(" "),
                out.display()
            ))
        }
    }
}

/// One row of gap percentages per dataset, then mean, std_dev, min and max.
fn write_gap_table(path: &Path, rows: &[(String, GapReport)]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    let names: Vec<String> = rows[0].1.gaps.iter().map(|g| g.kpi.clone()).collect();
    let mut header = vec!["dataset".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    let cell = |v: Option<f64>| v.map_or("NA".to_string(), |p| format!("{p:.4}"));
    for (name, g) in rows {
        let mut rec = vec![name.clone()];
        rec.extend(g.gaps.iter().map(|g| cell(g.percent)));
        w.write_record(&rec)?;
    }
    let stats = summarize_gaps(&rows.iter().map(|(_, g)| g.clone()).collect::<Vec<_>>());
    let finite = |s: &GapStat, v: f64| (s.count > 0).then_some(v);
    for (label, pick) in [
        ("mean", (|s: &GapStat| s.mean) as fn(&_) -> f64),
        ("std_dev", |s| s.std_dev),
        ("min", |s| s.min),
        ("max", |s| s.max),
    ] {
        let mut rec = vec![label.to_string()];
        rec.extend(stats.iter().map(|s| cell(finite(s, pick(s)))));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
