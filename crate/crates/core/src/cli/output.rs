//! CSV artifacts, the packed binary mirror and the metadata sidecar.
//!
//! Binary layout (little endian): magic `QCHAOSB1`, `u64` cell count, then
//! per cell a `u64` value count followed by that many `f64`. A failed cell has
//! count `u64::MAX` and no values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::scan::{husimi_axes, ScanKind, ScanResult, SystemKind, R_POINTS, T_POINTS};
use crate::spin::BASIS_ORDERING;

pub const REGISTRATION: &str = "cell-center";
pub const BINARY_MAGIC: &[u8; 8] = b"QCHAOSB1";

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Failure {
    pub cell: usize,
    pub message: String,
}

/// Axes of a husimi file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub phi: [f64; 2],
    pub phi_cells: usize,
    pub second: String,
    pub second_range: [f64; 2],
    pub second_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub name: String,
    pub kind: String,
    pub version: String,
    pub registration: String,
    pub basis_ordering: String,
    pub seed: u64,
    pub wall_time_s: f64,
    /// Shape of the data in each CSV; rows = product of the entries.
    pub shape: Vec<usize>,
    pub columns: Vec<String>,
    pub files: Vec<String>,
    /// Coordinates of every scan cell, in cell order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    /// Labelled reference points in the plotted coordinates.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub marks: BTreeMap<String, [f64; 2]>,
    /// SHA-256 of every data file; the sidecar itself is excluded.
    pub digests: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<Failure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub meta: Meta,
    pub config: RunConfig,
}

impl Sidecar {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn sidecar_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.meta.toml"))
}

pub fn marks_for(system: SystemKind) -> BTreeMap<String, [f64; 2]> {
    match system {
        SystemKind::Top => [("T1", T_POINTS[0]), ("T2", T_POINTS[1])]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        _ => R_POINTS
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("R{}", i + 1), *v))
            .collect(),
    }
}

/// A file to be written, before any byte touches the disk.
pub struct Planned {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn csv(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn binary(result: &ScanResult) -> Vec<u8> {
    let mut out = BINARY_MAGIC.to_vec();
    out.extend_from_slice(&(result.outcomes.len() as u64).to_le_bytes());
    for outcome in &result.outcomes {
        match outcome {
            Some(Ok(values)) => {
                out.extend_from_slice(&(values.len() as u64).to_le_bytes());
                for v in values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            _ => out.extend_from_slice(&u64::MAX.to_le_bytes()),
        }
    }
    out
}

/// Per-cell file names for kinds that write one file per cell.
fn per_cell_names(name: &str, cells: usize) -> Vec<String> {
    if cells == 1 {
        vec![format!("{name}.csv")]
    } else {
        (0..cells).map(|i| format!("{name}.cell{i}.csv")).collect()
    }
}

/// Lays out the data files of a finished scan and the meta block describing them.
pub fn plan_scan_outputs(name: &str, result: &ScanResult, binary_mirror: bool) -> Result<(Vec<Planned>, Meta)> {
    let spec = &result.spec;
    let cells = spec.cell_count();
    let axis_names: Vec<String> = spec.axes.iter().map(|a| a.name.as_str().to_string()).collect();
    let coords: Vec<Vec<f64>> = (0..cells).map(|i| spec.cell_coordinates(i)).collect();
    let mut files = Vec::new();
    let mut window = None;
    let (columns, shape) = match spec.kind {
        kind if kind.is_scalar() => {
            let mut columns = axis_names.clone();
            columns.push("value".into());
            let scalars = result.scalars();
            let rows = coords.iter().zip(&scalars).map(|(c, v)| {
                let mut row = c.clone();
                row.push(*v);
                row
            });
            files.push(Planned {
                name: format!("{name}.csv"),
                bytes: csv(&columns, rows),
            });
            if matches!(kind, ScanKind::EeGrid | ScanKind::EeSlice) && cells == 1 {
                if let Some(values) = result.values(0) {
                    let series = values[1..].iter().enumerate().map(|(n, s)| vec![n as f64, *s]);
                    files.push(Planned {
                        name: format!("{name}.series.csv"),
                        bytes: csv(&["step".into(), "entropy".into()], series),
                    });
                }
            }
            let shape = if spec.axes.is_empty() { vec![1] } else { spec.shape() };
            (columns, shape)
        }
        ScanKind::ErgodicitySeries => {
            let samples = spec.kicks / spec.stride;
            let mut columns = vec!["step".to_string()];
            columns.extend((0..cells).map(|i| format!("c{i}")));
            let rows = (0..samples).map(|k| {
                let mut row = vec![((k + 1) * spec.stride) as f64];
                row.extend((0..cells).map(|c| {
                    result.values(c).and_then(|v| v.get(k).copied()).unwrap_or(f64::NAN)
                }));
                row
            });
            files.push(Planned {
                name: format!("{name}.csv"),
                bytes: csv(&columns, rows),
            });
            (columns, vec![samples, cells])
        }
        ScanKind::Husimi => {
            let (phi, second) = husimi_axes(spec)?;
            let second_name = spec.system.second_coordinate().as_str().to_string();
            let columns = vec!["phi".to_string(), second_name.clone(), "value".to_string()];
            for (c, file) in per_cell_names(name, cells).into_iter().enumerate() {
                let values = result.values(c);
                let rows = (0..phi.cells * second.cells).map(|k| {
                    let v = values.map_or(f64::NAN, |v| v[k]);
                    vec![phi.center(k / second.cells), second.center(k % second.cells), v]
                });
                files.push(Planned {
                    name: file,
                    bytes: csv(&columns, rows),
                });
            }
            window = Some(Window {
                phi: [phi.min, phi.max],
                phi_cells: phi.cells,
                second: second_name,
                second_range: [second.min, second.max],
                second_cells: second.cells,
            });
            (columns, vec![phi.cells, second.cells])
        }
        ScanKind::DensityMatrix => {
            let columns = vec!["row".to_string(), "col".to_string(), "value".to_string()];
            let dim = spec.max_spins() as usize + 1;
            for (c, file) in per_cell_names(name, cells).into_iter().enumerate() {
                let values = result.values(c);
                let n = values.map_or(dim, |v| (v.len() as f64).sqrt().round() as usize);
                let rows = (0..n * n).map(|k| {
                    vec![(k / n) as f64, (k % n) as f64, values.map_or(f64::NAN, |v| v[k])]
                });
                files.push(Planned {
                    name: file,
                    bytes: csv(&columns, rows),
                });
            }
            (columns, vec![dim, dim])
        }
        _ => unreachable!("scalar kinds handled above"),
    };
    if binary_mirror {
        files.push(Planned {
            name: format!("{name}.bin"),
            bytes: binary(result),
        });
    }
    let digests = files
        .iter()
        .map(|f| (f.name.clone(), crate::scan::sha256_hex(&f.bytes)))
        .collect();
    let meta = Meta {
        name: name.to_string(),
        kind: spec.kind.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        registration: REGISTRATION.to_string(),
        basis_ordering: BASIS_ORDERING.to_string(),
        seed: spec.seed,
        wall_time_s: result.wall_time.as_secs_f64(),
        shape,
        columns,
        files: files.iter().map(|f| f.name.clone()).collect(),
        cells: coords,
        window,
        marks: marks_for(spec.system),
        digests,
        failures: result
            .failures()
            .into_iter()
            .map(|(cell, message)| Failure {
                cell,
                message: message.to_string(),
            })
            .collect(),
    };
    Ok((files, meta))
}

pub fn trajectory_csv(system: SystemKind, rows: impl Iterator<Item = Vec<f64>>) -> Vec<u8> {
    let second = system.second_coordinate().as_str();
    let header = ["start", "step", "phi", second].map(String::from);
    csv(&header, rows)
}

/// Refuses to clobber existing files unless `overwrite` is set.
pub fn check_clobber(dir: &Path, names: &[String], overwrite: bool) -> Result<()> {
    if overwrite {
        return Ok(());
    }
    for name in names {
        let path = dir.join(name);
        if path.exists() {
            return Err(Error::Config(format!(
                "{} exists; pass --overwrite to replace it",
                path.display()
            )));
        }
    }
    Ok(())
}

pub fn write_all(dir: &Path, files: &[Planned], sidecar: &Sidecar, name: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in files {
        let path = dir.join(&f.name);
        std::fs::write(&path, &f.bytes)?;
        written.push(path);
    }
    let path = sidecar_path(dir, name);
    std::fs::write(&path, sidecar.to_toml()?)?;
    written.push(path);
    Ok(written)
}
