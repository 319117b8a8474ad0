use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ddkit::acceptance::{run_all, Settings};
use ddkit::model::{model_ensemble, HamiltonianModel, Structure};
use ddkit::operators::{build_moos, lie_closure, Moos, MoosDocument, MoosSpec, Operator};
use ddkit::pulseshape::{design_pulse, pulse_error_scan, Family, PulseShape};
use ddkit::sequences::{cdd_nested, cdd_uniform, first_order_schedule, nudd, sdd_schedule, udd_schedule, Schedule};
use ddkit::simulate::{order_scan, FitStatus, OperatorFit, RunConfig, ScalingResult};
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;
use crate::{MoosArgs, PulseDesignArgs, PulseScanArgs, ScanArgs, ScheduleArgs, Scheme, SequenceArgs};

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Print to stdout; a reader that went away early is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// A construction spec, or a path to a MOOS JSON document.
fn load_moos(spec: &str) -> Result<Moos, CliError> {
    let path = Path::new(spec);
    if spec.ends_with(".json") || path.is_file() {
        let doc: MoosDocument = serde_json::from_str(&read_file(path)?)
            .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        return Ok(Moos::from_document(&doc)?);
    }
    let parsed: MoosSpec = spec.parse()?;
    Ok(build_moos(parsed)?)
}

fn single_order(args: &ScheduleArgs, scheme: &str) -> Result<usize, CliError> {
    match args.orders.as_slice() {
        [n] => Ok(*n),
        _ => Err(CliError::Usage(format!("{scheme} takes exactly one order, e.g. --orders 3"))),
    }
}

fn compile(args: &ScheduleArgs, moos: &Moos) -> Result<Schedule, CliError> {
    let scheme = args.scheme.ok_or_else(|| CliError::Usage("--scheme is required".into()))?;
    let needs_orders = !matches!(scheme, Scheme::FirstOrder | Scheme::Sdd);
    if needs_orders && args.orders.is_empty() {
        return Err(CliError::Usage("--orders is required for this scheme".into()));
    }
    let schedule = match scheme {
        Scheme::Udd => {
            let n = single_order(args, "udd")?;
            let op = match &args.op {
                Some(label) => moos
                    .get(label)
                    .ok_or_else(|| CliError::Precondition(format!("{label} is not in the MOOS {:?}", moos.labels())))?,
                None => &moos.elements()[0],
            };
            udd_schedule(op, n)
        }
        Scheme::FirstOrder => first_order_schedule(moos, args.closing)?,
        Scheme::Sdd => sdd_schedule(&first_order_schedule(moos, args.closing)?),
        Scheme::Cdd => cdd_uniform(moos, single_order(args, "cdd")?)?,
        Scheme::CddNested => cdd_nested(moos, &args.orders)?,
        Scheme::Nudd => nudd(moos, &args.orders, args.allow_odd_inner)?,
    };
    Ok(if args.mirror { sdd_schedule(&schedule) } else { schedule })
}

fn summary(schedule: &Schedule) -> String {
    let counts: Vec<String> = schedule.pulse_counts().iter().map(|(l, n)| format!("{l}x{n}")).collect();
    format!(
        "{} orders {:?}: {} intervals, {} events, pulses [{}]",
        schedule.scheme,
        schedule.orders,
        schedule.intervals,
        schedule.events.len(),
        counts.join(", ")
    )
}

pub fn sequence(args: &SequenceArgs) -> Result<i32, CliError> {
    let moos = load_moos(&args.schedule.moos)?;
    let schedule = compile(&args.schedule, &moos)?;
    match &args.out {
        Some(path) => {
            write_file(path, &schedule.to_json())?;
            println!("{}", summary(&schedule));
        }
        None => {
            emit(&schedule.to_json())?;
            eprintln!("{}", summary(&schedule));
        }
    }
    Ok(0)
}

pub fn moos(args: &MoosArgs) -> Result<i32, CliError> {
    let moos = load_moos(&args.spec)?;
    println!("dim {}, {} elements", moos.dim(), moos.len());
    let labels = moos.labels();
    for (label, row) in labels.iter().zip(moos.signature()) {
        let cells: Vec<String> = row.iter().map(|s| format!("{s:+}")).collect();
        println!("{label:>6} {}", cells.join(" "));
    }
    if args.closure {
        let max = args.max_dim.unwrap_or(moos.dim() * moos.dim() - 1);
        let basis = lie_closure(&moos, max)?;
        println!("Lie closure dimension {}", basis.len());
    }
    if let Some(path) = &args.out {
        let doc = serde_json::to_string_pretty(&moos.to_document()).expect("document serializes");
        write_file(path, &doc)?;
    }
    Ok(0)
}

/// `structure:SYSxBATH`, or `structure:SYS` with the bath from the config.
fn parse_model(spec: &str, config: &Config) -> Result<(Structure, usize, usize), CliError> {
    let bad = || CliError::Usage(format!("bad --model {spec:?}; expected structure:SYSxBATH, e.g. general:2x4"));
    let (kind, dims) = spec.split_once(':').ok_or_else(bad)?;
    let structure: Structure = kind.parse().map_err(|_| bad())?;
    let (sys, bath) = match dims.split_once('x') {
        Some((s, b)) => (s.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?),
        None => (dims.parse().map_err(|_| bad())?, config.bath_dim),
    };
    Ok((structure, sys, bath))
}

fn ensemble(spec: &str, config: &Config, seeds: &[u64], sys_dim: usize) -> Result<Vec<HamiltonianModel>, CliError> {
    let (structure, sys, bath) = parse_model(spec, config)?;
    if sys != sys_dim {
        return Err(CliError::Precondition(format!(
            "model system dimension {sys} does not match the operators' dimension {sys_dim}"
        )));
    }
    Ok(model_ensemble(structure, sys, bath, config.norm_bound, seeds)?)
}

fn seed_list(count: Option<u64>, config: &Config) -> Vec<u64> {
    match count {
        Some(n) => (0..n).collect(),
        None => config.seeds.clone(),
    }
}

fn pick_targets(moos: &Moos, labels: &[String]) -> Result<Vec<Operator>, CliError> {
    if labels.is_empty() {
        return Ok(moos.elements().to_vec());
    }
    labels
        .iter()
        .map(|l| moos.get(l).cloned().ok_or_else(|| CliError::Precondition(format!("unknown target {l}"))))
        .collect()
}

fn fits_path(out: &Path, explicit: &Option<PathBuf>) -> PathBuf {
    explicit.clone().unwrap_or_else(|| out.with_extension("fits.json"))
}

#[derive(Serialize)]
struct ScanRow<'a> {
    scheme: &'a str,
    orders: &'a str,
    operator: &'a str,
    #[serde(rename = "T")]
    t: f64,
    seed: u64,
    error: f64,
}

#[derive(Serialize)]
struct FitReport<'a> {
    scheme: &'a str,
    orders: &'a [usize],
    model: &'a str,
    seeds: &'a [u64],
    grid: &'a [f64],
    fits: &'a [OperatorFit],
}

fn report_fits(fits: &[OperatorFit]) -> Result<(), CliError> {
    let mut unfittable = Vec::new();
    for f in fits {
        match (&f.status, f.slope) {
            (FitStatus::Fitted, Some(s)) => {
                println!("{:>6} slope {s:.3} ({} points)", f.operator, f.points_used)
            }
            (FitStatus::Exact, _) => println!("{:>6} exact (all errors below floor)", f.operator),
            (status, _) => {
                let reason = match status {
                    FitStatus::Unfittable { reason } => reason.as_str(),
                    _ => "no slope",
                };
                println!("{:>6} unfittable: {reason}", f.operator);
                unfittable.push(format!("{}: {reason}", f.operator));
            }
        }
    }
    if unfittable.is_empty() {
        Ok(())
    } else {
        Err(CliError::Unfittable(format!("unfittable: {}", unfittable.join("; "))))
    }
}

pub fn scan(args: &ScanArgs, config: &Config) -> Result<i32, CliError> {
    let moos = load_moos(&args.schedule.moos)?;
    let schedule = match &args.schedule_file {
        Some(path) => Schedule::from_json(&read_file(path)?)?,
        None => compile(&args.schedule, &moos)?,
    };
    let mut config = config.clone();
    config.seeds = seed_list(args.seeds, &config);
    config.t_min = args.t_min.unwrap_or(config.t_min);
    config.t_max = args.t_max.unwrap_or(config.t_max);
    config.t_points = args.points.unwrap_or(config.t_points);
    let run: RunConfig = config.run_config()?;
    let models = ensemble(&args.model, &config, &run.seeds, moos.dim())?;
    let targets = pick_targets(&moos, &args.targets)?;
    let result: ScalingResult = order_scan(&schedule, &moos, &targets, &models, &run)?;

    let orders: Vec<String> = schedule.orders.iter().map(usize::to_string).collect();
    let orders = orders.join(",");
    let mut w = csv::Writer::from_path(&args.out)?;
    for s in &result.samples {
        w.serialize(ScanRow {
            scheme: &schedule.scheme,
            orders: &orders,
            operator: &s.operator,
            t: s.t,
            seed: s.seed,
            error: s.error,
        })?;
    }
    w.flush().map_err(|e| CliError::io(&args.out, e))?;
    let report = FitReport {
        scheme: &schedule.scheme,
        orders: &schedule.orders,
        model: &args.model,
        seeds: &run.seeds,
        grid: &run.t_grid,
        fits: &result.fits,
    };
    let fits = fits_path(&args.out, &args.fits);
    write_file(&fits, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    println!("{}", summary(&schedule));
    report_fits(&result.fits)?;
    Ok(0)
}

pub fn pulse_design(args: &PulseDesignArgs) -> Result<i32, CliError> {
    let family: Family = args.family.parse()?;
    let design = design_pulse(family, args.tau_p, args.seed)?;
    println!(
        "{family}: eta11 {:.2e}, eta12 {:.2e}, area {:.12}, {} Newton iterations after {} restarts",
        design.eta.eta11,
        design.eta.eta12,
        design.shape.area(),
        design.iterations,
        design.restarts
    );
    match &args.out {
        Some(path) => write_file(path, &design.shape.to_json())?,
        None => emit(&design.shape.to_json())?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct PulseRow<'a> {
    operator: &'a str,
    tau_p: f64,
    seed: u64,
    error: f64,
}

pub fn pulse_scan(args: &PulseScanArgs, config: &Config) -> Result<i32, CliError> {
    let shape = PulseShape::from_json(&read_file(&args.pulse)?)?;
    let moos = load_moos(&args.moos)?;
    let omega = match &args.omega {
        Some(label) => {
            moos.get(label).cloned().ok_or_else(|| CliError::Precondition(format!("unknown operator {label}")))?
        }
        None => moos.elements()[0].clone(),
    };
    let seeds = seed_list(args.seeds, config);
    let models = ensemble(&args.model, config, &seeds, moos.dim())?;
    let grid = config.tau_grid()?;
    let result = pulse_error_scan(&shape, &models, &omega, &grid)?;
    let mut w = csv::Writer::from_path(&args.out)?;
    for s in &result.samples {
        w.serialize(PulseRow { operator: &s.operator, tau_p: s.t, seed: s.seed, error: s.error })?;
    }
    w.flush().map_err(|e| CliError::io(&args.out, e))?;
    let report =
        FitReport { scheme: "pulse", orders: &[], model: &args.model, seeds: &seeds, grid: &grid, fits: &result.fits };
    let fits = fits_path(&args.out, &args.fits);
    write_file(&fits, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    report_fits(&result.fits)?;
    Ok(0)
}

pub fn accept(config: &Config) -> Result<i32, CliError> {
    let settings = Settings { run: config.run_config()?, bath_dim: config.bath_dim, norm_bound: config.norm_bound };
    let outcomes = run_all(&settings);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failures = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failures, outcomes.len());
    Ok(failures.min(255) as i32)
}
