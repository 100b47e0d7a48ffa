//! Parallel scans over grids of initial conditions and parameters.
//!
//! Every cell is computed independently from the spec and its own index, so
//! results do not depend on the worker count or on interruption and resume.

pub mod checkpoint;
mod compare;
mod spec;

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::hash::Hash;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use compare::{compare_grids, Binarize, GridComparison};
pub use spec::{check_radians, hex_digest as sha256_hex, Axis, AxisName, ScanKind, ScanSpec, SystemKind, TangentMode};

use crate::classical::{
    embed_rotor_on_sphere, embed_rotor_tangent, kse_estimate, kse_estimate_from, rotor_limit_params,
    RotorParams, RotorPoint, SpherePoint, TangentInit, TangentVector, TopParams,
};
use crate::error::{Error, Result};
use crate::grid::GridAxis;
use crate::husimi::{husimi_pure, HusimiWindow};
use crate::quantum::{
    build_floquet, coherent, evolve, rotor_limit_initial_state, state_fidelity, time_averaged_ee,
    time_averaged_ee_inclusive, FloquetOperator, RecordOptions,
};
use crate::spin::{AngularMomentumRep, QuantumState};

/// Values of one cell, or the error that stopped it.
pub type CellOutcome = std::result::Result<Vec<f64>, String>;

pub const DEFAULT_CHECKPOINT_EVERY: usize = 64;

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Cells per checkpoint flush.
    pub checkpoint_every: usize,
    /// Stop after computing this many new cells, leaving the rest pending.
    pub stop_after: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            workers: 0,
            checkpoint: None,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            stop_after: None,
        }
    }
}

impl ScanOptions {
    pub fn with_workers(workers: usize) -> Self {
        ScanOptions {
            workers,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub spec: ScanSpec,
    /// One entry per cell; `None` only while a scan is interrupted.
    pub outcomes: Vec<Option<CellOutcome>>,
    /// Time spent computing cells in this process.
    pub wall_time: Duration,
}

impl ScanResult {
    pub fn is_complete(&self) -> bool {
        self.outcomes.iter().all(Option::is_some)
    }

    pub fn pending(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_none()).count()
    }

    pub fn failures(&self) -> Vec<(usize, &str)> {
        self.outcomes
            .iter()
            .enumerate()
            .filter_map(|(i, o)| match o {
                Some(Err(msg)) => Some((i, msg.as_str())),
                _ => None,
            })
            .collect()
    }

    pub fn values(&self, cell: usize) -> Option<&[f64]> {
        match &self.outcomes[cell] {
            Some(Ok(v)) => Some(v),
            _ => None,
        }
    }

    /// Leading value of each cell, NaN where a cell failed or is pending.
    pub fn scalars(&self) -> Vec<f64> {
        (0..self.outcomes.len())
            .map(|i| self.values(i).and_then(|v| v.first().copied()).unwrap_or(f64::NAN))
            .collect()
    }
}

type Shared<T> = Arc<OnceLock<std::result::Result<Arc<T>, String>>>;

/// Build-once caches keyed by spin count and rounded parameters.
struct Cache<K, T> {
    slots: Mutex<HashMap<K, Shared<T>>>,
}

impl<K: Eq + Hash, T> Cache<K, T> {
    fn new() -> Self {
        Cache {
            slots: Mutex::new(HashMap::new()),
        }
    }

    fn get(&self, key: K, build: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
        let slot = {
            let mut slots = self.slots.lock().unwrap_or_else(|p| p.into_inner());
            Arc::clone(slots.entry(key).or_default())
        };
        slot.get_or_init(|| build().map(Arc::new).map_err(|e| e.to_string()))
            .clone()
            .map_err(Error::InvariantViolation)
    }
}

fn round_key(x: f64) -> i64 {
    (x * 1e12).round() as i64
}

struct Operators {
    reps: Cache<u32, AngularMomentumRep>,
    floquets: Cache<(u32, i64, i64), FloquetOperator>,
}

impl Operators {
    fn new() -> Self {
        Operators {
            reps: Cache::new(),
            floquets: Cache::new(),
        }
    }

    fn rep(&self, n_spins: u32) -> Result<Arc<AngularMomentumRep>> {
        self.reps.get(n_spins, || AngularMomentumRep::for_spins(n_spins))
    }

    fn floquet(&self, n_spins: u32, params: TopParams) -> Result<Arc<FloquetOperator>> {
        let rep = self.rep(n_spins)?;
        let key = (n_spins, round_key(params.alpha), round_key(params.beta));
        self.floquets.get(key, || build_floquet(&rep, params))
    }
}

/// Seed of cell `index`: the first word of ChaCha8 stream `index` under `seed`.
pub fn cell_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Physical coordinates of one cell after applying axes over the spec defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellPoint {
    pub phi: f64,
    /// `theta` for the top, `p` otherwise.
    pub second: f64,
    pub kappa: f64,
    pub n_spins: u32,
}

pub fn cell_point(spec: &ScanSpec, index: usize) -> CellPoint {
    let start = spec.start.unwrap_or([0.0, 0.0]);
    let mut point = CellPoint {
        phi: start[0],
        second: start[1],
        kappa: spec.kick_strength,
        n_spins: spec.n_spins,
    };
    for (axis, v) in spec.axes.iter().zip(spec.cell_coordinates(index)) {
        match axis.name {
            AxisName::Phi => point.phi = v,
            AxisName::Theta | AxisName::P => point.second = v,
            AxisName::Kappa => point.kappa = v,
            AxisName::NSpins => point.n_spins = v as u32,
        }
    }
    point
}

fn top_params(spec: &ScanSpec, point: &CellPoint) -> Result<TopParams> {
    match spec.system {
        SystemKind::Top => TopParams::new(spec.alpha, spec.beta),
        _ => rotor_limit_params(point.kappa, spec.inertia, spec.j_r),
    }
}

fn initial_state(
    spec: &ScanSpec,
    rep: &Arc<AngularMomentumRep>,
    phi: f64,
    second: f64,
) -> Result<QuantumState> {
    match spec.system {
        SystemKind::Top => coherent(rep, second, phi),
        _ => rotor_limit_initial_state(rep, phi, second, spec.j_r, spec.branch),
    }
}

fn compute_kse(spec: &ScanSpec, index: usize, point: &CellPoint) -> Result<f64> {
    let seed = cell_seed(spec.seed, index);
    let init = match spec.tangent {
        TangentMode::Fixed => TangentInit::Fixed,
        TangentMode::Seeded => TangentInit::Seeded(seed),
    };
    let estimate = match spec.system {
        SystemKind::Top => {
            let params = TopParams::new(spec.alpha, spec.beta)?;
            kse_estimate(&params, SpherePoint::from_polar(point.phi, point.second), spec.steps, init, false)?
        }
        SystemKind::Rotor => {
            let params = RotorParams::new(point.kappa, spec.inertia)?;
            kse_estimate(&params, RotorPoint::new(point.phi, point.second), spec.steps, init, false)?
        }
        SystemKind::RotorLimit => {
            // start from the embedded rotor tangent: the fixed top tangent
            // (1, 0, 0) is radial on the equator at phi = 0, pi
            let params = rotor_limit_params(point.kappa, spec.inertia, spec.j_r)?;
            let start = RotorPoint::new(point.phi, point.second);
            let rotor_tangent = match spec.tangent {
                TangentMode::Fixed => TangentVector::first_axis(),
                TangentMode::Seeded => TangentVector::random_unit(&mut ChaCha8Rng::seed_from_u64(seed)),
            };
            let tangent = embed_rotor_tangent(&start, &rotor_tangent, spec.j_r, spec.branch)?;
            let on_sphere = embed_rotor_on_sphere(&start, spec.j_r, spec.branch)?;
            kse_estimate_from(&params, on_sphere, tangent, spec.steps, false)?
        }
    };
    Ok(estimate.value)
}

fn husimi_window(spec: &ScanSpec) -> Result<HusimiWindow> {
    let [n_phi, n_second] = spec.husimi_cells;
    Ok(match spec.system {
        SystemKind::Top => HusimiWindow::sphere(n_phi, n_second),
        _ => {
            let [lo, hi] = spec.husimi_range.unwrap_or([-spec.j_r, spec.j_r]);
            HusimiWindow::Band {
                phi: GridAxis::new(0.0, TAU, n_phi)?,
                p: GridAxis::new(lo, hi, n_second)?,
                j_r: spec.j_r,
                branch: spec.branch,
            }
        }
    })
}

/// Window a husimi scan samples, for labelling its output.
pub fn husimi_axes(spec: &ScanSpec) -> Result<(GridAxis, GridAxis)> {
    let window = husimi_window(spec)?;
    Ok((*window.phi_axis(), *window.second_axis()))
}

/// Computes one cell. Exposed so single cells can be checked directly.
pub fn compute_cell(spec: &ScanSpec, index: usize) -> Result<Vec<f64>> {
    compute_with(spec, index, &Operators::new())
}

fn compute_with(spec: &ScanSpec, index: usize, ops: &Operators) -> Result<Vec<f64>> {
    let point = cell_point(spec, index);
    if spec.kind == ScanKind::KseGrid {
        return Ok(vec![compute_kse(spec, index, &point)?]);
    }
    let rep = ops.rep(point.n_spins)?;
    let floquet = ops.floquet(point.n_spins, top_params(spec, &point)?)?;
    let averaged = RecordOptions {
        density_average: true,
        include_initial: spec.include_initial,
        ergodicity_stride: None,
    };
    match spec.kind {
        ScanKind::KseGrid => unreachable!(),
        ScanKind::EeGrid | ScanKind::EeSlice => {
            let state = initial_state(spec, &rep, point.phi, point.second)?;
            let record = evolve(&state, &floquet, spec.kicks, RecordOptions::default())?;
            let mean = if spec.include_initial {
                time_averaged_ee_inclusive(&record, spec.kicks)?
            } else {
                time_averaged_ee(&record, spec.kicks)?
            };
            // a single-cell scan also returns the S(n) series, n = 0..=kicks
            let mut out = vec![mean];
            if spec.cell_count() == 1 {
                out.extend_from_slice(&record.entropy);
            }
            Ok(out)
        }
        ScanKind::ErgodicitySeries => {
            let state = initial_state(spec, &rep, point.phi, point.second)?;
            let options = RecordOptions {
                density_average: false,
                include_initial: spec.include_initial,
                ergodicity_stride: Some(spec.stride),
            };
            let record = evolve(&state, &floquet, spec.kicks, options)?;
            Ok(record.ergodicity.iter().map(|&(_, f)| f).collect())
        }
        ScanKind::FidelityVsK => {
            let pair = spec.pair.ok_or_else(|| Error::invalid("pair", "missing"))?;
            let mut rhos = Vec::with_capacity(2);
            for [phi, p] in pair {
                let state = initial_state(spec, &rep, phi, p)?;
                let record = evolve(&state, &floquet, spec.kicks, averaged)?;
                rhos.push(record.rho_bar.expect("density average requested"));
            }
            Ok(vec![state_fidelity(&rhos[0], &rhos[1])?])
        }
        ScanKind::Husimi => {
            let state = initial_state(spec, &rep, point.phi, point.second)?;
            let record = evolve(&state, &floquet, spec.kicks, RecordOptions::default())?;
            Ok(husimi_pure(&record.final_state, husimi_window(spec)?)?.values)
        }
        ScanKind::DensityMatrix => {
            let state = initial_state(spec, &rep, point.phi, point.second)?;
            let record = evolve(&state, &floquet, spec.kicks, averaged)?;
            let rho = record.rho_bar.expect("density average requested");
            // row-major magnitudes
            let n = rho.dim();
            Ok((0..n * n).map(|k| rho.elements()[(k / n, k % n)].norm()).collect())
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))
}

fn fill(
    result: &mut ScanResult,
    options: &ScanOptions,
    mut writer: Option<checkpoint::Writer>,
) -> Result<()> {
    let started = Instant::now();
    let spec = result.spec.clone();
    let mut pending: Vec<usize> = (0..result.outcomes.len())
        .filter(|&i| result.outcomes[i].is_none())
        .collect();
    if let Some(limit) = options.stop_after {
        pending.truncate(limit);
    }
    let chunk = match writer {
        Some(_) => options.checkpoint_every.max(1),
        None => pending.len().max(1),
    };
    let ops = Operators::new();
    let pool = pool(options.workers)?;
    for cells in pending.chunks(chunk) {
        let computed: Vec<CellOutcome> = pool.install(|| {
            cells
                .par_iter()
                .map(|&i| compute_with(&spec, i, &ops).map_err(|e| e.to_string()))
                .collect()
        });
        if let Some(w) = writer.as_mut() {
            let records: Vec<(usize, &CellOutcome)> = cells.iter().copied().zip(&computed).collect();
            w.append(&records)?;
        }
        for (&i, outcome) in cells.iter().zip(computed) {
            result.outcomes[i] = Some(outcome);
        }
    }
    result.wall_time += started.elapsed();
    Ok(())
}

/// Runs every cell of `spec`, checkpointing when asked.
pub fn run_scan(spec: &ScanSpec, options: &ScanOptions) -> Result<ScanResult> {
    spec.validate()?;
    let writer = match &options.checkpoint {
        Some(path) => Some(checkpoint::Writer::create(path, spec)?),
        None => None,
    };
    let mut result = ScanResult {
        spec: spec.clone(),
        outcomes: vec![None; spec.cell_count()],
        wall_time: Duration::ZERO,
    };
    fill(&mut result, options, writer)?;
    Ok(result)
}

/// Completes the cells missing from a checkpoint, appending to it.
pub fn resume_scan(path: &Path, options: &ScanOptions) -> Result<ScanResult> {
    let ck = checkpoint::load(path)?;
    ck.spec.validate()?;
    let mut result = ScanResult {
        spec: ck.spec,
        outcomes: ck.outcomes,
        wall_time: Duration::ZERO,
    };
    if result.is_complete() {
        return Ok(result);
    }
    let writer = checkpoint::Writer::reopen(path, ck.valid_len)?;
    fill(&mut result, options, Some(writer))?;
    Ok(result)
}

/// [`resume_scan`] after checking the checkpoint was written for `spec`.
pub fn resume_scan_for(spec: &ScanSpec, path: &Path, options: &ScanOptions) -> Result<ScanResult> {
    let expected = spec.hash()?;
    let found = checkpoint::load(path)?.spec_hash;
    if found != expected {
        return Err(Error::SpecHashMismatch { expected, found });
    }
    resume_scan(path, options)
}

/// Canonical rotor points `R_1..R_6` as `(phi, p)`.
pub const R_POINTS: [[f64; 2]; 6] = [
    [PI, 0.0],
    [PI, PI / 2.0],
    [PI, 3.0 * PI / 4.0],
    [PI, TAU],
    [0.0, 0.0],
    [0.0, TAU],
];

/// Canonical top points `T_1` (regular) and `T_2` (chaotic) as `(phi, theta)`.
pub const T_POINTS: [[f64; 2]; 2] = [[2.20, 2.25], [3.57, 2.25]];
