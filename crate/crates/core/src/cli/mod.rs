//! Batch command line: one command per diagnostic, TOML run configs,
//! CSV outputs with a metadata sidecar.
//!
//! Precedence: flags, then the config file, then built-in presets. The
//! output root falls back to `QCHAOS_OUTPUT_DIR` and then `./qchaos-out`;
//! `QCHAOS_WORKERS` overrides the config's worker count but not `--workers`.

pub mod config;
pub mod output;
pub mod presets;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{PhaseSpec, RunConfig, RunSection};
pub use output::{Meta, Sidecar};
pub use presets::{Preset, ScanCommand};

use crate::classical::{
    embed_rotor_on_sphere, project_to_rotor, rotor_limit_params, trajectory, Branch, RotorParams,
    RotorPoint, SpherePoint, TopParams,
};
use crate::error::{Error, Result};
use crate::scan::{
    check_radians, resume_scan_for, run_scan, sha256_hex, Axis, AxisName, ScanKind, ScanOptions,
    ScanResult, ScanSpec, SystemKind, TangentMode,
};

pub const ENV_OUTPUT_DIR: &str = "QCHAOS_OUTPUT_DIR";
pub const ENV_WORKERS: &str = "QCHAOS_WORKERS";
const FALLBACK_OUTPUT_DIR: &str = "qchaos-out";

#[derive(Parser, Debug)]
#[command(name = "qchaos", version, about = "Kicked top and kicked rotor: chaos and entanglement scans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// KSE grid of the classical kicked top over (phi, theta).
    TopKse(ScanArgs),
    /// Time-averaged entanglement entropy of the quantum kicked top.
    TopEe(ScanArgs),
    /// KSE grid of the kicked rotor (or its rotor-limit with --system rotor-limit).
    RotorKse(ScanArgs),
    /// Time-averaged entanglement entropy in the rotor-limit.
    RotorEe(ScanArgs),
    /// Ergodicity fidelity F(n) of time-averaged density matrices.
    Ergodicity(ScanArgs),
    /// Husimi distribution after a number of kicks.
    Husimi(ScanArgs),
    /// Fidelity between time-averaged states of two rotor points versus K.
    FidelityScan(ScanArgs),
    /// Magnitudes of a time-averaged density matrix.
    DensityMatrix(ScanArgs),
    /// Classical trajectories from random starts (top, rotor or rotor-limit).
    TopPhase(PhaseArgs),
    /// Every scan and trajectory set in a config file.
    Run(RunArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Replace existing outputs.
    #[arg(long)]
    pub overwrite: bool,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write a packed binary mirror of the results.
    #[arg(long)]
    pub binary: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Scan to run from the config; default is every matching scan.
    #[arg(long)]
    pub scan: Option<String>,
    /// Output basename for preset scans.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,
    #[arg(long, value_parser = parse_system)]
    pub system: Option<SystemKind>,
    /// Single-cell run at PHI,THETA (top) or PHI,P (rotor).
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub point: Option<[f64; 2]>,
    /// Coordinates not covered by an axis, PHI,SECOND.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub start: Option<[f64; 2]>,
    /// Cells along every uniform axis.
    #[arg(long)]
    pub cells: Option<usize>,
    /// EE versus the second coordinate for several N at fixed phi.
    #[arg(long)]
    pub slice: bool,
    /// Spin counts for an n_spins axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub spins: Vec<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub kick_strength: Option<f64>,
    #[arg(long)]
    pub inertia: Option<f64>,
    #[arg(long)]
    pub j_r: Option<f64>,
    #[arg(long)]
    pub n_spins: Option<u32>,
    #[arg(long)]
    pub kicks: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_parser = parse_branch)]
    pub branch: Option<Branch>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_tangent)]
    pub tangent: Option<TangentMode>,
    /// Include the initial state in time averages.
    #[arg(long)]
    pub include_initial: bool,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Husimi cells per axis.
    #[arg(long)]
    pub husimi_cells: Option<usize>,
    /// Write `<name>.ckpt` while running.
    #[arg(long)]
    pub checkpoint: bool,
    /// Continue from `<name>.ckpt` in the output directory.
    #[arg(long)]
    pub resume: bool,
    /// Stop after this many cells (interruption testing).
    #[arg(long, hide = true)]
    pub stop_after: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Trajectory set to run from the config.
    #[arg(long)]
    pub scan: Option<String>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, value_parser = parse_system)]
    pub system: Option<SystemKind>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub kicks: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub kick_strength: Option<f64>,
    #[arg(long)]
    pub inertia: Option<f64>,
    #[arg(long)]
    pub j_r: Option<f64>,
    #[arg(long, value_parser = parse_branch)]
    pub branch: Option<Branch>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated numbers".into());
    }
    let a = parts[0].parse::<f64>().map_err(|e| e.to_string())?;
    let b = parts[1].parse::<f64>().map_err(|e| e.to_string())?;
    Ok([a, b])
}

fn parse_system(s: &str) -> std::result::Result<SystemKind, String> {
    match s {
        "top" => Ok(SystemKind::Top),
        "rotor" => Ok(SystemKind::Rotor),
        "rotor-limit" => Ok(SystemKind::RotorLimit),
        _ => Err("expected top, rotor or rotor-limit".into()),
    }
}

fn parse_branch(s: &str) -> std::result::Result<Branch, String> {
    match s {
        "positive" | "+" => Ok(Branch::Positive),
        "negative" | "-" => Ok(Branch::Negative),
        _ => Err("expected positive or negative".into()),
    }
}

fn parse_tangent(s: &str) -> std::result::Result<TangentMode, String> {
    match s {
        "fixed" => Ok(TangentMode::Fixed),
        "seeded" => Ok(TangentMode::Seeded),
        _ => Err("expected fixed or seeded".into()),
    }
}

/// Resolved output, worker and overwrite settings.
#[derive(Clone, Debug)]
struct Settings {
    run: RunSection,
    dir: PathBuf,
    workers: usize,
}

fn settings(common: &CommonArgs, config: &RunConfig) -> Result<Settings> {
    let mut run = config.run.clone();
    let dir = match (&common.output_dir, &run.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => std::env::var_os(ENV_OUTPUT_DIR)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT_DIR)),
    };
    let env_workers = match std::env::var(ENV_WORKERS) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(ENV_WORKERS, format!("`{v}` is not a worker count")))?,
        ),
        Err(_) => None,
    };
    let workers = common.workers.or(env_workers).or(run.workers).unwrap_or(0);
    run.output_dir = Some(dir.to_string_lossy().into_owned());
    run.overwrite |= common.overwrite;
    run.binary |= common.binary;
    run.workers = Some(workers);
    Ok(Settings { run, dir, workers })
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    match &common.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn override_cells(spec: &mut ScanSpec, cells: usize) {
    for axis in &mut spec.axes {
        if axis.points.is_none() {
            axis.cells = Some(cells);
        }
    }
}

/// Applies command-line overrides on top of a preset or config scan.
pub fn apply_overrides(spec: &mut ScanSpec, args: &ScanArgs) -> Result<()> {
    if let Some(v) = args.alpha {
        spec.alpha = v;
    }
    if let Some(v) = args.beta {
        spec.beta = v;
    }
    if let Some(v) = args.kick_strength {
        spec.kick_strength = v;
    }
    if let Some(v) = args.inertia {
        spec.inertia = v;
    }
    if let Some(v) = args.j_r {
        spec.j_r = v;
    }
    if let Some(v) = args.n_spins {
        spec.n_spins = v;
    }
    if let Some(v) = args.kicks {
        spec.kicks = v;
    }
    if let Some(v) = args.steps {
        spec.steps = v;
    }
    if let Some(v) = args.branch {
        spec.branch = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = args.tangent {
        spec.tangent = v;
    }
    if args.include_initial {
        spec.include_initial = true;
    }
    if let Some(v) = args.stride {
        spec.stride = v;
    }
    if let Some(v) = args.husimi_cells {
        spec.husimi_cells = [v, v];
    }
    if let Some(v) = args.cells {
        override_cells(spec, v);
    }
    if !args.spins.is_empty() {
        let axis = Axis::points(AxisName::NSpins, args.spins.iter().map(|&n| n as f64).collect());
        match spec.axes.iter_mut().find(|a| a.name == AxisName::NSpins) {
            Some(existing) => *existing = axis,
            None => spec.axes.push(axis),
        }
    }
    if let Some(start) = args.start {
        spec.start = Some(start);
    }
    if let Some(point) = args.point {
        let second = spec.system.second_coordinate();
        spec.axes.retain(|a| a.name != AxisName::Phi && a.name != second);
        spec.start = Some(point);
    }
    for [phi, second] in spec.start.iter().chain(spec.pair.iter().flatten()) {
        check_radians("phi", *phi)?;
        if spec.system == SystemKind::Top {
            check_radians("theta", *second)?;
        }
    }
    Ok(())
}

fn select_scans(command: ScanCommand, args: &ScanArgs, config: &RunConfig) -> Result<Vec<(String, ScanSpec)>> {
    let mut scans: Vec<(String, ScanSpec)> = if let Some(name) = &args.scan {
        let spec = config
            .scans
            .get(name)
            .ok_or_else(|| Error::Config(format!("no scan `{name}` in the config")))?;
        if !command.accepts(spec) {
            return Err(Error::Config(format!(
                "scan `{name}` is a {} scan, not one `{}` runs",
                spec.kind.name(),
                command.name()
            )));
        }
        vec![(name.clone(), spec.clone())]
    } else if args.common.config.is_some() {
        let found: Vec<_> = config
            .scans
            .iter()
            .filter(|(_, s)| command.accepts(s))
            .map(|(n, s)| (n.clone(), s.clone()))
            .collect();
        if found.is_empty() {
            return Err(Error::Config(format!("config has no scan for `{}`", command.name())));
        }
        found
    } else {
        let system = args.system.unwrap_or(command.default_system());
        let scans = presets::preset_scans(command, args.preset, system, args.slice);
        match &args.name {
            Some(base) if scans.len() == 1 => scans.into_iter().map(|(_, s)| (base.clone(), s)).collect(),
            Some(base) => scans
                .into_iter()
                .map(|(n, s)| (n.replacen(command.name(), base, 1), s))
                .collect(),
            None => scans,
        }
    };
    for (_, spec) in &mut scans {
        if let Some(system) = args.system {
            spec.system = system;
        }
        apply_overrides(spec, args)?;
    }
    Ok(scans)
}

/// What a finished command reports.
#[derive(Debug, Default)]
pub struct Report {
    pub written: Vec<PathBuf>,
    pub lines: Vec<String>,
}

fn run_one_scan(
    name: &str,
    spec: &ScanSpec,
    settings: &Settings,
    args: Option<&ScanArgs>,
    report: &mut Report,
) -> Result<()> {
    spec.validate()?;
    let checkpoint_path = settings.dir.join(format!("{name}.ckpt"));
    let resume = args.is_some_and(|a| a.resume);
    let checkpoint = resume || settings.run.checkpoint || args.is_some_and(|a| a.checkpoint);
    let options = ScanOptions {
        workers: settings.workers,
        checkpoint: checkpoint.then(|| checkpoint_path.clone()),
        checkpoint_every: settings.run.checkpoint_every,
        stop_after: args.and_then(|a| a.stop_after),
    };

    let probe = ScanResult {
        spec: spec.clone(),
        outcomes: vec![None; spec.cell_count()],
        wall_time: Default::default(),
    };
    let (planned, _) = output::plan_scan_outputs(name, &probe, settings.run.binary)?;
    let mut names: Vec<String> = planned.into_iter().map(|p| p.name).collect();
    names.push(format!("{name}.meta.toml"));
    if checkpoint && !resume {
        names.push(format!("{name}.ckpt"));
    }
    output::check_clobber(&settings.dir, &names, settings.run.overwrite)?;
    std::fs::create_dir_all(&settings.dir)?;

    let result = if resume {
        if !checkpoint_path.exists() {
            return Err(Error::Checkpoint(format!("{} not found", checkpoint_path.display())));
        }
        resume_scan_for(spec, &checkpoint_path, &options)?
    } else {
        run_scan(spec, &options)?
    };
    if !result.is_complete() {
        report.lines.push(format!(
            "{name}: stopped with {} of {} cells pending; rerun with --resume",
            result.pending(),
            spec.cell_count()
        ));
        return Ok(());
    }

    let (files, meta) = output::plan_scan_outputs(name, &result, settings.run.binary)?;
    let mut scans = BTreeMap::new();
    scans.insert(name.to_string(), spec.clone());
    let sidecar = Sidecar {
        meta,
        config: RunConfig {
            run: settings.run.clone(),
            scans,
            phase: BTreeMap::new(),
        },
    };
    report.written.extend(output::write_all(&settings.dir, &files, &sidecar, name)?);

    let failures = result.failures().len();
    if failures > 0 {
        report
            .lines
            .push(format!("{name}: {failures} cell(s) failed; see {name}.meta.toml"));
    }
    if spec.kind.is_scalar() && spec.cell_count() == 1 {
        let label = match spec.kind {
            ScanKind::KseGrid => "kse",
            ScanKind::FidelityVsK => "fidelity",
            _ => "mean_ee",
        };
        report.lines.push(format!("{name}: {label} = {}", output::fmt_num(result.scalars()[0])));
    }
    Ok(())
}

fn phase_spec(args: &PhaseArgs, config: &RunConfig) -> Result<Vec<(String, PhaseSpec)>> {
    let mut specs: Vec<(String, PhaseSpec)> = if let Some(name) = &args.scan {
        let spec = config
            .phase
            .get(name)
            .ok_or_else(|| Error::Config(format!("no phase `{name}` in the config")))?;
        vec![(name.clone(), spec.clone())]
    } else if args.common.config.is_some() && !config.phase.is_empty() {
        config.phase.iter().map(|(n, s)| (n.clone(), s.clone())).collect()
    } else {
        let system = args.system.unwrap_or(SystemKind::Top);
        let name = args.name.clone().unwrap_or_else(|| "top-phase".into());
        vec![(name, PhaseSpec::new(system))]
    };
    for (_, spec) in &mut specs {
        if let Some(v) = args.system {
            spec.system = v;
        }
        if let Some(v) = args.starts {
            spec.starts = v;
        }
        if let Some(v) = args.kicks {
            spec.kicks = v;
        }
        if let Some(v) = args.seed {
            spec.seed = v;
        }
        if let Some(v) = args.alpha {
            spec.alpha = v;
        }
        if let Some(v) = args.beta {
            spec.beta = v;
        }
        if let Some(v) = args.kick_strength {
            spec.kick_strength = v;
        }
        if let Some(v) = args.inertia {
            spec.inertia = v;
        }
        if let Some(v) = args.j_r {
            spec.j_r = v;
        }
        if let Some(v) = args.branch {
            spec.branch = v;
        }
    }
    Ok(specs)
}

/// Rows `(start, step, phi, second)` of every trajectory; `p` is reduced
/// modulo `2 pi I` for the rotor.
pub fn trajectories(spec: &PhaseSpec) -> Result<Vec<Vec<f64>>> {
    if spec.starts == 0 {
        return Err(Error::invalid("starts", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.starts * (spec.kicks + 1));
    let tau = std::f64::consts::TAU;
    for s in 0..spec.starts {
        let phi = rng.gen::<f64>() * tau;
        let u = rng.gen::<f64>();
        let points: Vec<[f64; 2]> = match spec.system {
            SystemKind::Top => {
                let map = TopParams::new(spec.alpha, spec.beta)?;
                let start = SpherePoint::from_polar(phi, (1.0 - 2.0 * u).acos());
                trajectory(&map, start, spec.kicks)
                    .iter()
                    .map(|p| {
                        let (phi, theta) = p.to_polar();
                        [phi, theta]
                    })
                    .collect()
            }
            SystemKind::Rotor => {
                let map = RotorParams::new(spec.kick_strength, spec.inertia)?;
                let start = RotorPoint::new(phi, u * tau * spec.inertia);
                trajectory(&map, start, spec.kicks)
                    .iter()
                    .map(|p| [p.phi, p.p_reduced(spec.inertia)])
                    .collect()
            }
            SystemKind::RotorLimit => {
                let map = rotor_limit_params(spec.kick_strength, spec.inertia, spec.j_r)?;
                let start = RotorPoint::new(phi, u * tau.min(spec.j_r));
                let on_sphere = embed_rotor_on_sphere(&start, spec.j_r, spec.branch)?;
                trajectory(&map, on_sphere, spec.kicks)
                    .iter()
                    .map(|p| {
                        let r = project_to_rotor(p, spec.j_r, spec.branch);
                        [r.phi, r.p]
                    })
                    .collect()
            }
        };
        for (n, [a, b]) in points.into_iter().enumerate() {
            rows.push(vec![s as f64, n as f64, a, b]);
        }
    }
    Ok(rows)
}

fn run_phase(name: &str, spec: &PhaseSpec, settings: &Settings, report: &mut Report) -> Result<()> {
    let started = Instant::now();
    let file = format!("{name}.csv");
    output::check_clobber(&settings.dir, &[file.clone(), format!("{name}.meta.toml")], settings.run.overwrite)?;
    let rows = trajectories(spec)?;
    let bytes = output::trajectory_csv(spec.system, rows.into_iter());
    let mut digests = BTreeMap::new();
    digests.insert(file.clone(), sha256_hex(&bytes));
    let second = spec.system.second_coordinate().as_str();
    let meta = Meta {
        name: name.to_string(),
        kind: "trajectories".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        registration: "points".into(),
        basis_ordering: crate::spin::BASIS_ORDERING.into(),
        seed: spec.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
        shape: vec![spec.starts, spec.kicks + 1],
        columns: ["start", "step", "phi", second].map(String::from).to_vec(),
        files: vec![file.clone()],
        cells: Vec::new(),
        window: None,
        marks: output::marks_for(spec.system),
        digests,
        failures: Vec::new(),
    };
    let mut phase = BTreeMap::new();
    phase.insert(name.to_string(), spec.clone());
    let sidecar = Sidecar {
        meta,
        config: RunConfig {
            run: settings.run.clone(),
            scans: BTreeMap::new(),
            phase,
        },
    };
    let planned = [output::Planned { name: file, bytes }];
    report.written.extend(output::write_all(&settings.dir, &planned, &sidecar, name)?);
    Ok(())
}

/// Runs a parsed command.
pub fn execute(cli: Cli) -> Result<Report> {
    let mut report = Report::default();
    let scan_command = |c: &Command| -> Option<(ScanCommand, ScanArgs)> {
        let (cmd, args) = match c {
            Command::TopKse(a) => (ScanCommand::TopKse, a),
            Command::TopEe(a) => (ScanCommand::TopEe, a),
            Command::RotorKse(a) => (ScanCommand::RotorKse, a),
            Command::RotorEe(a) => (ScanCommand::RotorEe, a),
            Command::Ergodicity(a) => (ScanCommand::Ergodicity, a),
            Command::Husimi(a) => (ScanCommand::Husimi, a),
            Command::FidelityScan(a) => (ScanCommand::FidelityScan, a),
            Command::DensityMatrix(a) => (ScanCommand::DensityMatrix, a),
            _ => return None,
        };
        Some((cmd, args.clone()))
    };
    if let Some((command, args)) = scan_command(&cli.command) {
        let config = load_config(&args.common)?;
        let settings = settings(&args.common, &config)?;
        for (name, spec) in select_scans(command, &args, &config)? {
            run_one_scan(&name, &spec, &settings, Some(&args), &mut report)?;
        }
        return Ok(report);
    }
    match cli.command {
        Command::TopPhase(args) => {
            let config = load_config(&args.common)?;
            let settings = settings(&args.common, &config)?;
            for (name, spec) in phase_spec(&args, &config)? {
                run_phase(&name, &spec, &settings, &mut report)?;
            }
        }
        Command::Run(args) => {
            if args.common.config.is_none() {
                return Err(Error::Config("`run` needs --config <FILE>".into()));
            }
            let config = load_config(&args.common)?;
            let settings = settings(&args.common, &config)?;
            if config.scans.is_empty() && config.phase.is_empty() {
                return Err(Error::Config("config defines no scans".into()));
            }
            for (name, spec) in &config.scans {
                run_one_scan(name, spec, &settings, None, &mut report)?;
            }
            for (name, spec) in &config.phase {
                run_phase(name, spec, &settings, &mut report)?;
            }
        }
        _ => unreachable!("scan commands handled above"),
    }
    Ok(report)
}

/// Entry point used by the binary: parses `args`, runs, prints, exits.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            for line in &report.lines {
                let _ = writeln!(out, "{line}");
            }
            for path in &report.written {
                let _ = writeln!(out, "wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qchaos: error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Path of the sidecar written for `name` under `dir`.
pub fn sidecar_for(dir: &Path, name: &str) -> PathBuf {
    output::sidecar_path(dir, name)
}
