use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::Branch;
use crate::error::{Error, Result};
use crate::grid::GridAxis;

/// Slack on the radians guard so `2 * pi` written out by hand is accepted.
const ANGLE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanKind {
    KseGrid,
    EeGrid,
    EeSlice,
    ErgodicitySeries,
    #[serde(rename = "fidelity-vs-k")]
    FidelityVsK,
    Husimi,
    DensityMatrix,
}

impl ScanKind {
    pub fn is_quantum(self) -> bool {
        !matches!(self, ScanKind::KseGrid)
    }

    /// Kinds whose cells produce a single scalar.
    pub fn is_scalar(self) -> bool {
        matches!(
            self,
            ScanKind::KseGrid | ScanKind::EeGrid | ScanKind::EeSlice | ScanKind::FidelityVsK
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ScanKind::KseGrid => "kse-grid",
            ScanKind::EeGrid => "ee-grid",
            ScanKind::EeSlice => "ee-slice",
            ScanKind::ErgodicitySeries => "ergodicity-series",
            ScanKind::FidelityVsK => "fidelity-vs-k",
            ScanKind::Husimi => "husimi",
            ScanKind::DensityMatrix => "density-matrix",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// Kicked top on the sphere, coordinates `(phi, theta)`.
    Top,
    /// Kicked rotor on the cylinder, coordinates `(phi, p)`; classical only.
    Rotor,
    /// Kicked top with `alpha = K / j_r`, `beta = j_r / I`, coordinates `(phi, p)`.
    RotorLimit,
}

impl SystemKind {
    pub fn second_coordinate(self) -> AxisName {
        match self {
            SystemKind::Top => AxisName::Theta,
            SystemKind::Rotor | SystemKind::RotorLimit => AxisName::P,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Phi,
    Theta,
    P,
    Kappa,
    NSpins,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Phi => "phi",
            AxisName::Theta => "theta",
            AxisName::P => "p",
            AxisName::Kappa => "kappa",
            AxisName::NSpins => "n_spins",
        }
    }
}

/// One scan axis: either a uniform cell-centered range or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
}

impl Axis {
    pub fn grid(name: AxisName, min: f64, max: f64, cells: usize) -> Self {
        Axis {
            name,
            min: Some(min),
            max: Some(max),
            cells: Some(cells),
            points: None,
        }
    }

    pub fn points(name: AxisName, points: Vec<f64>) -> Self {
        Axis {
            name,
            min: None,
            max: None,
            cells: None,
            points: Some(points),
        }
    }

    fn as_grid(&self) -> Option<GridAxis> {
        Some(GridAxis {
            min: self.min?,
            max: self.max?,
            cells: self.cells?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let label = self.name.as_str();
        match (&self.points, self.as_grid()) {
            (Some(points), None) if self.min.is_none() && self.max.is_none() && self.cells.is_none() => {
                if points.is_empty() {
                    return Err(Error::invalid(label, "point list is empty"));
                }
                if let Some(bad) = points.iter().find(|v| !v.is_finite()) {
                    return Err(Error::invalid(label, format!("point {bad} is not finite")));
                }
                Ok(())
            }
            (None, Some(grid)) => grid.validate(label),
            _ => Err(Error::invalid(
                label,
                "give either `points` or all of `min`, `max`, `cells`",
            )),
        }
    }

    pub fn len(&self) -> usize {
        match &self.points {
            Some(points) => points.len(),
            None => self.cells.unwrap_or(0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        match &self.points {
            Some(points) => points[i],
            None => self.as_grid().map(|g| g.center(i)).unwrap_or(f64::NAN),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

/// Initial-tangent policy for KSE cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TangentMode {
    #[default]
    Fixed,
    /// Random direction from the cell's seed.
    Seeded,
}

fn default_alpha() -> f64 {
    FRAC_PI_2
}
fn default_beta() -> f64 {
    3.0
}
fn default_kick_strength() -> f64 {
    0.9
}
fn default_inertia() -> f64 {
    1.0
}
fn default_j_r() -> f64 {
    9.0
}
fn default_n_spins() -> u32 {
    100
}
fn default_kicks() -> usize {
    300
}
fn default_steps() -> usize {
    10_000
}
fn default_stride() -> usize {
    1
}
fn default_husimi_cells() -> [usize; 2] {
    [200, 200]
}
fn default_memory_budget_mb() -> f64 {
    4096.0
}

/// A full description of one scan. Axis 0 is the outer loop, so cell
/// `i0 * n1 + i1` sits at `(axes[0][i0], axes[1][i1])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub kind: ScanKind,
    pub system: SystemKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_kick_strength")]
    pub kick_strength: f64,
    #[serde(default = "default_inertia")]
    pub inertia: f64,
    /// Rotor-limit scale, independent of `n_spins`.
    #[serde(default = "default_j_r")]
    pub j_r: f64,
    #[serde(default = "default_n_spins")]
    pub n_spins: u32,
    /// Quantum kicks per cell.
    #[serde(default = "default_kicks")]
    pub kicks: usize,
    /// Classical map iterations per KSE cell.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tangent: TangentMode,
    /// Include the initial state in time averages.
    #[serde(default)]
    pub include_initial: bool,
    /// Kicks between ergodicity-fidelity samples.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// `(phi, theta)` or `(phi, p)` for coordinates not covered by an axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
    /// Two `(phi, p)` starts compared by `fidelity-vs-k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[[f64; 2]; 2]>,
    /// Husimi grid `(phi cells, second-axis cells)`.
    #[serde(default = "default_husimi_cells")]
    pub husimi_cells: [usize; 2],
    /// Husimi `p` range on the rotor-limit band; defaults to `[-j_r, j_r]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub husimi_range: Option<[f64; 2]>,
    #[serde(default = "default_memory_budget_mb")]
    pub memory_budget_mb: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<Axis>,
}

impl ScanSpec {
    /// Defaults for everything but kind and system.
    pub fn new(kind: ScanKind, system: SystemKind) -> Self {
        ScanSpec {
            kind,
            system,
            alpha: default_alpha(),
            beta: default_beta(),
            kick_strength: default_kick_strength(),
            inertia: default_inertia(),
            j_r: default_j_r(),
            n_spins: default_n_spins(),
            kicks: default_kicks(),
            steps: default_steps(),
            branch: Branch::default(),
            seed: 0,
            tangent: TangentMode::default(),
            include_initial: false,
            stride: default_stride(),
            start: None,
            pair: None,
            husimi_cells: default_husimi_cells(),
            husimi_range: None,
            memory_budget_mb: default_memory_budget_mb(),
            axes: Vec::new(),
        }
    }

    pub fn with_axes(mut self, axes: Vec<Axis>) -> Self {
        self.axes = axes;
        self
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Axis values of cell `index`, one per axis.
    pub fn cell_coordinates(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut coords = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.len();
            coords[k] = axis.value(rest % n);
            rest /= n;
        }
        coords
    }

    fn axis(&self, name: AxisName) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == name)
    }

    /// Canonical TOML text of this spec.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of [`ScanSpec::to_toml`], lowercase hex.
    pub fn hash(&self) -> Result<String> {
        Ok(hex_digest(self.to_toml()?.as_bytes()))
    }

    /// Largest spin count any cell uses.
    pub fn max_spins(&self) -> u32 {
        match self.axis(AxisName::NSpins) {
            Some(axis) => axis.values().into_iter().fold(0.0f64, f64::max) as u32,
            None => self.n_spins,
        }
    }

    /// Rough peak memory of one quantum cell plus shared operators, in MiB.
    pub fn memory_estimate_mb(&self) -> f64 {
        if !self.kind.is_quantum() {
            return 0.0;
        }
        let dim = self.max_spins() as f64 + 1.0;
        // jx, jy, jz, Jx eigenvectors, Floquet operator, and a running
        // density matrix per concurrent cell for the kinds that need one
        let density = matches!(
            self.kind,
            ScanKind::ErgodicitySeries | ScanKind::FidelityVsK | ScanKind::DensityMatrix
        );
        let matrices = 5.0 + if density { 2.0 } else { 0.0 };
        matrices * dim * dim * 16.0 / (1024.0 * 1024.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.len() > 2 {
            return Err(Error::invalid("axes", "at most two axes per scan"));
        }
        let mut seen = BTreeSet::new();
        for axis in &self.axes {
            axis.validate()?;
            if !seen.insert(axis.name) {
                return Err(Error::invalid(axis.name.as_str(), "axis listed twice"));
            }
        }
        let quantum = self.kind.is_quantum();
        if quantum && self.system == SystemKind::Rotor {
            return Err(Error::invalid(
                "system",
                format!("`{}` needs a quantum system (top or rotor-limit)", self.kind.name()),
            ));
        }
        for axis in &self.axes {
            let ok = match axis.name {
                AxisName::Phi => self.kind != ScanKind::FidelityVsK,
                AxisName::Theta => self.system == SystemKind::Top,
                AxisName::P => self.system != SystemKind::Top && self.kind != ScanKind::FidelityVsK,
                AxisName::Kappa => self.system != SystemKind::Top,
                AxisName::NSpins => quantum,
            };
            if !ok {
                return Err(Error::invalid(
                    axis.name.as_str(),
                    format!(
                        "axis not meaningful for {} scans of the {:?} system",
                        self.kind.name(),
                        self.system
                    ),
                ));
            }
        }

        for (name, value) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("kick_strength", self.kick_strength),
            ("inertia", self.inertia),
            ("j_r", self.j_r),
            ("memory_budget_mb", self.memory_budget_mb),
        ] {
            if !value.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.beta < 0.0 {
            return Err(Error::invalid("beta", "must be >= 0"));
        }
        if self.inertia <= 0.0 {
            return Err(Error::invalid("inertia", "must be > 0"));
        }
        if self.j_r <= 0.0 {
            return Err(Error::invalid("j_r", "must be > 0"));
        }
        if self.n_spins == 0 {
            return Err(Error::invalid("n_spins", "must be >= 1"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be >= 1"));
        }
        if self.kind == ScanKind::KseGrid && self.steps == 0 {
            return Err(Error::invalid("steps", "must be >= 1"));
        }
        if quantum && self.kind != ScanKind::Husimi && self.kicks == 0 {
            return Err(Error::invalid("kicks", "must be >= 1"));
        }
        if self.kind == ScanKind::ErgodicitySeries && self.stride > self.kicks {
            return Err(Error::invalid("stride", "exceeds the number of kicks"));
        }
        if self.husimi_cells.iter().any(|&c| c < 2) {
            return Err(Error::invalid("husimi_cells", "need at least 2x2 cells"));
        }

        let kappas = match self.axis(AxisName::Kappa) {
            Some(axis) => axis.values(),
            None => vec![self.kick_strength],
        };
        if kappas.iter().any(|&k| k < 0.0) {
            return Err(Error::invalid("kappa", "kick strength must be >= 0"));
        }
        if let Some(axis) = self.axis(AxisName::NSpins) {
            for v in axis.values() {
                if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(Error::invalid("n_spins", format!("{v} is not a positive integer")));
                }
            }
        }

        // coordinates
        let second = self.system.second_coordinate();
        let mut phis = Vec::new();
        let mut seconds = Vec::new();
        if self.kind == ScanKind::FidelityVsK {
            if self.system != SystemKind::RotorLimit {
                return Err(Error::invalid("system", "fidelity-vs-k runs on the rotor-limit"));
            }
            let pair = self
                .pair
                .ok_or_else(|| Error::invalid("pair", "fidelity-vs-k needs two (phi, p) starts"))?;
            for [phi, p] in pair {
                phis.push(phi);
                seconds.push(p);
            }
        } else {
            let needs_start = self.axis(AxisName::Phi).is_none() || self.axis(second).is_none();
            if needs_start && self.start.is_none() {
                return Err(Error::invalid(
                    "start",
                    format!("needed for coordinates not on an axis (phi, {})", second.as_str()),
                ));
            }
            phis = match self.axis(AxisName::Phi) {
                Some(a) => a.values(),
                None => vec![self.start.map_or(0.0, |s| s[0])],
            };
            seconds = match self.axis(second) {
                Some(a) => a.values(),
                None => vec![self.start.map_or(0.0, |s| s[1])],
            };
            if let Some(axis) = self.axis(AxisName::Phi) {
                if let Some(max) = axis.max {
                    phis.push(max);
                }
            }
            if let Some(axis) = self.axis(second) {
                if let Some(max) = axis.max {
                    seconds.push(max);
                }
                if let Some(min) = axis.min {
                    seconds.push(min);
                }
            }
        }
        for phi in phis {
            check_radians("phi", phi)?;
        }
        match second {
            AxisName::Theta => {
                for theta in seconds {
                    check_radians("theta", theta)?;
                }
            }
            _ if self.system == SystemKind::RotorLimit => {
                for p in seconds {
                    if p.abs() > self.j_r {
                        return Err(Error::OutOfBand { p, j_r: self.j_r });
                    }
                }
            }
            _ => {
                if let Some(bad) = seconds.iter().find(|v| !v.is_finite()) {
                    return Err(Error::invalid("p", format!("{bad} is not finite")));
                }
            }
        }
        if let Some([lo, hi]) = self.husimi_range {
            if !(lo < hi) || lo < -self.j_r || hi > self.j_r {
                return Err(Error::invalid(
                    "husimi_range",
                    format!("[{lo}, {hi}] must be ordered and inside [-j_r, j_r]"),
                ));
            }
        }

        let estimate = self.memory_estimate_mb();
        if estimate > self.memory_budget_mb {
            return Err(Error::invalid(
                "memory_budget_mb",
                format!(
                    "scan needs about {estimate:.0} MiB at N = {}, budget is {}",
                    self.max_spins(),
                    self.memory_budget_mb
                ),
            ));
        }
        Ok(())
    }
}

/// Rejects angle magnitudes that only make sense in degrees.
pub fn check_radians(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::invalid(name, "must be finite"));
    }
    if value.abs() > TAU + ANGLE_SLACK {
        return Err(Error::invalid(
            name,
            format!(
                "{value} exceeds 2*pi; angles are in radians (did you mean {:.6}?)",
                value.to_radians()
            ),
        ));
    }
    Ok(())
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
