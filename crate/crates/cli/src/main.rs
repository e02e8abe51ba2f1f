//! `saompower` command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use saompower::config::ConfigFile;
use saompower::estimator::{data_centering, estimate, EstimationResult};
use saompower::gof::{gof_check, gof_csv, GofKind};
use saompower::panel::PanelSet;
use saompower::power::{cohort_wave1, run_grid, simulate_replication, Design, ScenarioSpec};
use saompower::simulator::CoevolutionState;
use saompower::{seeds, Error, Result};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "saompower",
    version,
    about = "Power analysis for longitudinal network studies"
)]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "SAOMPOWER_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate perturbed panels of one scenario.
    Simulate(SimulateArgs),
    /// Estimate the scenario model on panel files.
    Estimate(EstimateArgs),
    /// Run power scenarios and write power reports.
    Power(PowerArgs),
    /// Goodness-of-fit check of one period of a panel.
    Gof(GofArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: String,
    /// Number of panels; defaults to the scenario's replications.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: String,
    /// Skip panels that already have a result row.
    #[arg(long)]
    resume: bool,
    /// Panel files or directories of panel files.
    panels: Vec<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    common: Common,
    /// Restrict to these scenario ids.
    #[arg(long)]
    scenario: Vec<String>,
    /// Overrides the number of replications of every scenario.
    #[arg(long)]
    reps: Option<usize>,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
    /// Discard corrupt or stale checkpoint lines instead of refusing.
    #[arg(long, requires = "resume")]
    force: bool,
}

#[derive(Args)]
struct GofArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: String,
    /// Panel file; defaults to the scenario's first simulated replication.
    #[arg(long)]
    panel: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    group: usize,
    /// Period whose end wave is checked, counted from 1.
    #[arg(long, default_value_t = 1)]
    period: usize,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::UnknownCovariate(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} worker threads: {e}");
            return ExitCode::from(3);
        }
    }
    let outcome = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate_panels(a),
        Command::Power(a) => power(a),
        Command::Gof(a) => gof(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct Loaded {
    config: ConfigFile,
    out: PathBuf,
}

fn load(common: &Common) -> Result<Loaded> {
    let mut config = ConfigFile::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    fs::create_dir_all(&out)?;
    Ok(Loaded { config, out })
}

fn cohorts_for(scenario: &ScenarioSpec) -> Result<Option<Vec<CoevolutionState>>> {
    match &scenario.design {
        Design::Cohorts(d) => cohort_wave1(&scenario.model, d, scenario.seed).map(Some),
        Design::Communities(_) => Ok(None),
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let Loaded { config, out } = load(&args.common)?;
    let scenario = config.scenario(&args.scenario)?;
    let count = args.reps.unwrap_or(scenario.replications);
    let cohorts = cohorts_for(&scenario)?;
    let files: Vec<String> = (0..count)
        .into_par_iter()
        .map(|r| {
            let set = simulate_replication(&scenario, r, cohorts.as_deref())?;
            let name = format!("{}-rep{r:04}.json", scenario.id);
            fs::write(out.join(&name), set.to_json()?)?;
            Ok(name)
        })
        .collect::<Result<_>>()?;
    let manifest = json!({
        "scenario": scenario.id,
        "scenario_hash": format!("{:016x}", scenario.fingerprint()),
        "master_seed": scenario.seed,
        "panels": files
            .iter()
            .enumerate()
            .map(|(r, f)| json!({"replication": r, "seed": scenario.replication_seed(r), "file": f}))
            .collect::<Vec<_>>(),
    });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    println!("wrote {count} panels to {}", out.display());
    Ok(())
}

fn panel_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            for entry in fs::read_dir(p)? {
                let path = entry?.path();
                let is_panel = path.extension().is_some_and(|e| e == "json")
                    && path
                        .file_name()
                        .is_some_and(|n| n != "manifest.json" && n != "results.json");
                if is_panel {
                    files.push(path);
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    files.dedup();
    if files.is_empty() {
        return Err(Error::Config("no panel files given".into()));
    }
    Ok(files)
}

fn file_id(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Rows of an existing CSV keyed by the first column.
fn read_rows(path: &Path) -> Result<(Option<String>, BTreeMap<String, String>)> {
    if !path.exists() {
        return Ok((None, BTreeMap::new()));
    }
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().map(str::to_string);
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| (l.split(',').next().unwrap_or_default().to_string(), l.to_string()))
        .collect();
    Ok((header, rows))
}

fn estimate_panels(args: &EstimateArgs) -> Result<()> {
    let Loaded { config, out } = load(&args.common)?;
    let scenario = config.scenario(&args.scenario)?;
    let files = panel_files(&args.panels)?;
    let results_path = out.join("results.csv");
    let json_path = out.join("results.jsonl");
    let (mut header, mut rows) = if args.resume {
        read_rows(&results_path)?
    } else {
        (None, BTreeMap::new())
    };
    let mut json_rows: BTreeMap<String, String> = BTreeMap::new();
    if args.resume && json_path.exists() {
        for line in fs::read_to_string(&json_path)?.lines().filter(|l| !l.is_empty()) {
            let v: serde_json::Value = serde_json::from_str(line)?;
            if let Some(id) = v.get("id").and_then(|x| x.as_str()) {
                json_rows.insert(id.to_string(), line.to_string());
            }
        }
    }
    let todo: Vec<&PathBuf> = files.iter().filter(|f| !rows.contains_key(&file_id(f))).collect();
    let outcomes: Vec<(String, Result<EstimationResult>)> = todo
        .par_iter()
        .map(|path| {
            let id = file_id(path);
            let result = fs::read_to_string(path)
                .map_err(Error::from)
                .and_then(|text| PanelSet::from_json(&text))
                .and_then(|set| {
                    let mut opts = scenario.estimation.clone();
                    opts.seed = seeds::derive(scenario.seed, seeds::hash_str(&id));
                    estimate(&set, &scenario.model, &opts)
                });
            (id, result)
        })
        .collect();
    let mut errors = String::from("id,error\n");
    let mut failed = 0;
    for (id, outcome) in &outcomes {
        match outcome {
            Ok(est) => {
                let h = est.csv_header();
                match &header {
                    Some(existing) if *existing != h => {
                        return Err(Error::Config(format!(
                            "{} was written for a different model; rerun without --resume",
                            results_path.display()
                        )))
                    }
                    Some(_) => {}
                    None => header = Some(h),
                }
                rows.insert(id.clone(), est.csv_row(id));
                json_rows.insert(id.clone(), json!({"id": id, "result": est}).to_string());
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(errors, "{id},\"{}\"", e.to_string().replace('"', "'"));
                eprintln!("warning: {id}: {e}");
            }
        }
    }
    if let Some(h) = &header {
        let mut csv = format!("{h}\n");
        for row in rows.values() {
            csv.push_str(row);
            csv.push('\n');
        }
        fs::write(&results_path, csv)?;
        let jsonl: String = json_rows.values().map(|l| format!("{l}\n")).collect();
        fs::write(&json_path, jsonl)?;
    }
    fs::write(out.join("errors.csv"), errors)?;
    println!(
        "estimated {} panels ({} skipped, {failed} failed) into {}",
        outcomes.len() - failed,
        files.len() - todo.len(),
        out.display()
    );
    if failed > 0 && failed == outcomes.len() {
        return Err(Error::Estimation(format!("all {failed} estimations failed")));
    }
    Ok(())
}

fn power(args: &PowerArgs) -> Result<()> {
    let Loaded { config, out } = load(&args.common)?;
    let mut scenarios = config.scenarios()?;
    if !args.scenario.is_empty() {
        for id in &args.scenario {
            if !scenarios.iter().any(|s| &s.id == id) {
                return Err(Error::Config(format!("unknown scenario `{id}`")));
            }
        }
        scenarios.retain(|s| args.scenario.contains(&s.id));
    }
    if let Some(reps) = args.reps {
        if reps == 0 {
            return Err(Error::Config("--reps must be at least 1".into()));
        }
        for s in &mut scenarios {
            s.replications = reps;
        }
    }
    let checkpoint = out.join("checkpoint.jsonl");
    if !args.resume && checkpoint.exists() {
        fs::remove_file(&checkpoint)?;
    }
    let (report, replications) = run_grid(&scenarios, Some(&checkpoint), args.force)?;
    fs::write(out.join("power.csv"), report.to_csv())?;
    fs::write(out.join("power.json"), report.to_json()?)?;
    let summary = report.summary_table();
    fs::write(out.join("summary.txt"), &summary)?;
    let mut reps = String::from("scenario_id,replication,converged,error\n");
    for r in &replications {
        let _ = writeln!(
            reps,
            "{},{},{},{}",
            r.scenario_id,
            r.replication,
            r.converged,
            r.error.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    fs::write(out.join("replications.csv"), reps)?;
    println!("{summary}");
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn gof(args: &GofArgs) -> Result<()> {
    let Loaded { config, out } = load(&args.common)?;
    let scenario = config.scenario(&args.scenario)?;
    let set = match &args.panel {
        Some(path) => PanelSet::from_json(&fs::read_to_string(path)?)?,
        None => simulate_replication(&scenario, 0, cohorts_for(&scenario)?.as_deref())?,
    };
    let panel = set
        .groups
        .get(args.group)
        .ok_or_else(|| Error::InvalidInput(format!("panel has no group {}", args.group)))?;
    if args.period == 0 || args.period > panel.n_periods() {
        return Err(Error::InvalidInput(format!(
            "period {} outside 1..={}",
            args.period,
            panel.n_periods()
        )));
    }
    let mut model = scenario.model.clone();
    model.centering = data_centering(&set);
    let start = CoevolutionState::from_wave(panel, args.period - 1)?;
    let observed = CoevolutionState::from_wave(panel, args.period)?;
    let results = gof_check(
        &model,
        args.period - 1,
        &start,
        &observed,
        &GofKind::ALL,
        args.runs,
        seeds::derive(scenario.seed, seeds::hash_str("gof")),
    )?;
    fs::write(out.join("gof.csv"), gof_csv(&results))?;
    let mut summary = String::from("kind,discrepancy,p_value\n");
    for r in &results {
        let p = r.p_value.map_or_else(|| "NA".to_string(), |p| format!("{p:.4}"));
        let _ = writeln!(summary, "{},{:.4},{p}", r.kind.name(), r.observed_discrepancy);
    }
    fs::write(out.join("gof_summary.csv"), &summary)?;
    print!("{summary}");
    Ok(())
}
