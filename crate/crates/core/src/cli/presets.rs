//! Built-in scans for each command at desk and paper scale.

use std::f64::consts::{PI, TAU};

use crate::scan::{Axis, AxisName, ScanKind, ScanSpec, SystemKind, R_POINTS, T_POINTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Minutes on a laptop.
    Desk,
    /// Full resolution; hours for the quantum grids.
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanCommand {
    TopKse,
    TopEe,
    RotorKse,
    RotorEe,
    Ergodicity,
    Husimi,
    FidelityScan,
    DensityMatrix,
}

impl ScanCommand {
    pub fn name(self) -> &'static str {
        match self {
            ScanCommand::TopKse => "top-kse",
            ScanCommand::TopEe => "top-ee",
            ScanCommand::RotorKse => "rotor-kse",
            ScanCommand::RotorEe => "rotor-ee",
            ScanCommand::Ergodicity => "ergodicity",
            ScanCommand::Husimi => "husimi",
            ScanCommand::FidelityScan => "fidelity-scan",
            ScanCommand::DensityMatrix => "density-matrix",
        }
    }

    pub fn default_system(self) -> SystemKind {
        match self {
            ScanCommand::RotorKse => SystemKind::Rotor,
            ScanCommand::RotorEe | ScanCommand::FidelityScan => SystemKind::RotorLimit,
            _ => SystemKind::Top,
        }
    }

    /// Whether a config scan belongs to this command.
    pub fn accepts(self, spec: &ScanSpec) -> bool {
        use ScanKind::*;
        match self {
            ScanCommand::TopKse => spec.kind == KseGrid && spec.system == SystemKind::Top,
            ScanCommand::TopEe => matches!(spec.kind, EeGrid | EeSlice) && spec.system == SystemKind::Top,
            ScanCommand::RotorKse => spec.kind == KseGrid && spec.system != SystemKind::Top,
            ScanCommand::RotorEe => {
                matches!(spec.kind, EeGrid | EeSlice) && spec.system == SystemKind::RotorLimit
            }
            ScanCommand::Ergodicity => spec.kind == ErgodicitySeries,
            ScanCommand::Husimi => spec.kind == Husimi,
            ScanCommand::FidelityScan => spec.kind == FidelityVsK,
            ScanCommand::DensityMatrix => spec.kind == DensityMatrix,
        }
    }
}

fn pick<T>(preset: Preset, desk: T, paper: T) -> T {
    match preset {
        Preset::Desk => desk,
        Preset::Paper => paper,
    }
}

fn second_axis(system: SystemKind, cells: usize) -> Axis {
    match system {
        SystemKind::Top => Axis::grid(AxisName::Theta, 0.0, PI, cells),
        _ => Axis::grid(AxisName::P, 0.0, TAU, cells),
    }
}

/// Named scans a command runs when no config supplies them.
pub fn preset_scans(
    command: ScanCommand,
    preset: Preset,
    system: SystemKind,
    slice: bool,
) -> Vec<(String, ScanSpec)> {
    let name = command.name().to_string();
    let grid_cells = pick(preset, 64, 200);
    let quantum_spins = pick(preset, 100, 300);
    let quantum_kicks = pick(preset, 200, 300);
    let start = match system {
        SystemKind::Top => T_POINTS[1],
        _ => R_POINTS[4],
    };
    match command {
        ScanCommand::TopKse | ScanCommand::RotorKse => {
            let mut spec = ScanSpec::new(ScanKind::KseGrid, system).with_axes(vec![
                Axis::grid(AxisName::Phi, 0.0, TAU, grid_cells),
                second_axis(system, grid_cells),
            ]);
            spec.steps = pick(preset, 2_000, 10_000);
            vec![(name, spec)]
        }
        ScanCommand::TopEe | ScanCommand::RotorEe => {
            let mut spec = if slice {
                let mut s = ScanSpec::new(ScanKind::EeSlice, system).with_axes(vec![
                    second_axis(system, pick(preset, 64, 200)),
                    Axis::points(AxisName::NSpins, pick(preset, vec![50.0, 100.0, 200.0], vec![50.0, 100.0, 300.0, 500.0])),
                ]);
                s.start = Some([PI, 0.0]);
                s
            } else {
                ScanSpec::new(ScanKind::EeGrid, system).with_axes(vec![
                    Axis::grid(AxisName::Phi, 0.0, TAU, grid_cells),
                    second_axis(system, grid_cells),
                ])
            };
            spec.n_spins = quantum_spins;
            spec.kicks = quantum_kicks;
            vec![(name, spec)]
        }
        ScanCommand::Ergodicity => {
            let mut spec = ScanSpec::new(ScanKind::ErgodicitySeries, system);
            spec.axes = match system {
                SystemKind::Top => vec![
                    Axis::points(AxisName::Phi, vec![T_POINTS[0][0], T_POINTS[1][0]]),
                    Axis::points(AxisName::Theta, vec![T_POINTS[0][1]]),
                ],
                _ => vec![
                    Axis::points(AxisName::Phi, vec![PI]),
                    Axis::points(AxisName::P, vec![R_POINTS[0][1], R_POINTS[1][1]]),
                ],
            };
            spec.n_spins = pick(preset, 100, 500);
            spec.kicks = pick(preset, 200, 500);
            spec.stride = pick(preset, 1, 10);
            vec![(name, spec)]
        }
        ScanCommand::Husimi => {
            let mut spec = ScanSpec::new(ScanKind::Husimi, system);
            spec.start = Some(start);
            spec.n_spins = pick(preset, 100, 500);
            spec.kicks = 500;
            let cells = pick(preset, 100, 200);
            spec.husimi_cells = [cells, cells];
            if system == SystemKind::RotorLimit {
                spec.j_r = 15.0;
                spec.husimi_range = Some([-TAU, TAU]);
            }
            vec![(name, spec)]
        }
        ScanCommand::DensityMatrix => {
            let mut spec = ScanSpec::new(ScanKind::DensityMatrix, system);
            spec.start = Some(start);
            spec.n_spins = pick(preset, 100, 500);
            spec.kicks = pick(preset, 200, 500);
            if system == SystemKind::RotorLimit {
                spec.j_r = 15.0;
            }
            vec![(name, spec)]
        }
        ScanCommand::FidelityScan => {
            // kappa centers 0.50, 0.55, ..., 2.00
            let kappa = Axis::grid(AxisName::Kappa, 0.475, 2.025, 31);
            let spins = pick(preset, vec![100.0, 200.0], vec![500.0, 1500.0, 2000.0, 2500.0, 3000.0]);
            [("r3-r5", [R_POINTS[2], R_POINTS[4]]), ("r5-r6", [R_POINTS[4], R_POINTS[5]])]
                .into_iter()
                .map(|(suffix, pair)| {
                    let mut spec = ScanSpec::new(ScanKind::FidelityVsK, SystemKind::RotorLimit)
                        .with_axes(vec![Axis::points(AxisName::NSpins, spins.clone()), kappa.clone()]);
                    spec.pair = Some(pair);
                    spec.j_r = 15.0;
                    spec.kicks = pick(preset, 200, 500);
                    spec.memory_budget_mb = 8192.0;
                    (format!("{name}-{suffix}"), spec)
                })
                .collect()
        }
    }
}
