//! Husimi distribution `P_H = (2j+1)/(4 pi) <c|rho|c>` over spin coherent states.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::classical::{rotor_limit_theta, Branch};
use crate::error::{Error, Result};
use crate::grid::GridAxis;
use crate::spin::{AngularMomentumRep, CVector, DensityMatrix, QuantumState};

/// Where the grid's second coordinate lives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HusimiWindow {
    /// `(phi, theta)` over the sphere.
    Sphere { phi: GridAxis, theta: GridAxis },
    /// `(phi, P)` over the rotor-limit band, `theta = branch * arccos(P / j_r)`.
    Band {
        phi: GridAxis,
        p: GridAxis,
        j_r: f64,
        branch: Branch,
    },
}

impl HusimiWindow {
    /// Whole sphere at `cells x cells`, phi in `[0, 2pi)` and theta in `[0, pi)`.
    pub fn sphere(phi_cells: usize, theta_cells: usize) -> Self {
        HusimiWindow::Sphere {
            phi: GridAxis {
                min: 0.0,
                max: 2.0 * PI,
                cells: phi_cells,
            },
            theta: GridAxis {
                min: 0.0,
                max: PI,
                cells: theta_cells,
            },
        }
    }

    pub fn phi_axis(&self) -> &GridAxis {
        match self {
            HusimiWindow::Sphere { phi, .. } | HusimiWindow::Band { phi, .. } => phi,
        }
    }

    pub fn second_axis(&self) -> &GridAxis {
        match self {
            HusimiWindow::Sphere { theta, .. } => theta,
            HusimiWindow::Band { p, .. } => p,
        }
    }

    fn validate(&self) -> Result<()> {
        self.phi_axis().validate("phi")?;
        self.second_axis().validate("second axis")?;
        if self.phi_axis().cells * self.second_axis().cells < 4 {
            return Err(Error::invalid("grid", "need at least 2x2 cells"));
        }
        if let HusimiWindow::Band { p, j_r, .. } = self {
            if p.min < -j_r || p.max > *j_r {
                return Err(Error::OutOfBand {
                    p: if p.min < -j_r { p.min } else { p.max },
                    j_r: *j_r,
                });
            }
        }
        Ok(())
    }

    /// Polar angle of second-axis cell `i`.
    pub fn theta(&self, i: usize) -> Result<f64> {
        match self {
            HusimiWindow::Sphere { theta, .. } => Ok(theta.center(i)),
            HusimiWindow::Band { p, j_r, branch, .. } => rotor_limit_theta(p.center(i), *j_r, *branch),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HusimiGrid {
    pub window: HusimiWindow,
    /// Row-major over `(phi, second)`: index `i_phi * n_second + i_second`.
    /// Units of 1/steradian.
    pub values: Vec<f64>,
}

impl HusimiGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.window.phi_axis().cells, self.window.second_axis().cells)
    }

    pub fn get(&self, i_phi: usize, i_second: usize) -> f64 {
        self.values[i_phi * self.shape().1 + i_second]
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Fraction of cells whose value exceeds `relative * peak`.
    pub fn support_fraction(&self, relative: f64) -> f64 {
        let cut = relative * self.peak();
        self.values.iter().filter(|&&v| v > cut).count() as f64 / self.values.len() as f64
    }

    /// Midpoint quadrature of `P_H sin(theta) dtheta dphi`; only meaningful for
    /// sphere windows.
    pub fn solid_angle_integral(&self) -> Result<f64> {
        let HusimiWindow::Sphere { phi, theta } = &self.window else {
            return Err(Error::invalid("window", "solid-angle quadrature needs a sphere window"));
        };
        let (_, n_theta) = self.shape();
        let mut total = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            total += v * theta.center(idx % n_theta).sin();
        }
        Ok(total * phi.width() * theta.width())
    }
}

fn normalization(rep: &AngularMomentumRep) -> f64 {
    rep.dim() as f64 / (4.0 * PI)
}

/// Husimi distribution of a density matrix, `O(dim^2)` per cell.
pub fn husimi(rho: &DensityMatrix, rep: &Arc<AngularMomentumRep>, window: HusimiWindow) -> Result<HusimiGrid> {
    window.validate()?;
    if rho.dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: rho.dim(),
        });
    }
    let (n_phi, n_second) = (window.phi_axis().cells, window.second_axis().cells);
    let thetas = (0..n_second).map(|i| window.theta(i)).collect::<Result<Vec<_>>>()?;
    let norm = normalization(rep);
    let columns: Vec<Vec<f64>> = (0..n_phi)
        .into_par_iter()
        .map(|i| {
            let phi = window.phi_axis().center(i);
            thetas
                .iter()
                .map(|&theta| {
                    let c = rep.coherent_amplitudes(theta, phi);
                    let rc = rho.elements() * &c;
                    (norm * c.dotc(&rc).re).max(0.0)
                })
                .collect()
        })
        .collect();
    Ok(HusimiGrid {
        window,
        values: columns.concat(),
    })
}

/// Husimi distribution of a pure state, `|<c|psi>|^2`, in `O(dim)` per cell
/// after an `O(dim^2)` transform per phi column.
pub fn husimi_pure(state: &QuantumState, window: HusimiWindow) -> Result<HusimiGrid> {
    window.validate()?;
    let rep = state.rep();
    let spec = rep.jx_spectrum();
    let dim = rep.dim();
    let top = dim - 1;
    let j = rep.j();
    let (n_phi, n_second) = (window.phi_axis().cells, window.second_axis().cells);
    let thetas = (0..n_second).map(|i| window.theta(i)).collect::<Result<Vec<_>>>()?;
    let norm = normalization(rep);
    let psi = state.amplitudes();

    // <c|psi> = sum_k V[top,k] e^{-i theta l_k} w_k,
    // w_k = sum_m V[m,k] e^{-i (phi - pi/2)(j - m)} psi_m
    let columns: Vec<Vec<f64>> = (0..n_phi)
        .into_par_iter()
        .map(|i| {
            let shift = window.phi_axis().center(i) - FRAC_PI_2;
            let rotated = CVector::from_fn(dim, |m, _| {
                psi[m] * C64::from_polar(1.0, -shift * (j - rep.m(m)))
            });
            let w: Vec<C64> = (0..dim)
                .map(|k| {
                    let mut acc = C64::new(0.0, 0.0);
                    for m in 0..dim {
                        acc += rotated[m] * spec.vectors[(m, k)];
                    }
                    acc * spec.vectors[(top, k)]
                })
                .collect();
            thetas
                .iter()
                .map(|&theta| {
                    let overlap: C64 = w
                        .iter()
                        .enumerate()
                        .map(|(k, wk)| wk * C64::from_polar(1.0, -theta * spec.values[k]))
                        .sum();
                    norm * overlap.norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok(HusimiGrid {
        window,
        values: columns.concat(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::coherent;
    use crate::spin::build_rep;

    #[test]
    fn north_pole_distribution_is_monotone_in_theta() {
        let rep = Arc::new(build_rep(5.0).unwrap());
        let up = QuantumState::dicke(Arc::clone(&rep), 5.0).unwrap();
        let rho = DensityMatrix::from_pure(up.amplitudes());
        let grid = husimi(&rho, &rep, HusimiWindow::sphere(8, 40)).unwrap();
        let (n_phi, n_theta) = grid.shape();
        let norm = rep.dim() as f64 / (4.0 * PI);
        for ip in 0..n_phi {
            for it in 0..n_theta {
                let theta = grid.window.theta(it).unwrap();
                let want = norm * (theta / 2.0).cos().powi(20);
                assert!((grid.get(ip, it) - want).abs() < 1e-10);
                if it > 0 {
                    assert!(grid.get(ip, it) < grid.get(ip, it - 1));
                }
            }
        }
    }

    #[test]
    fn pure_and_mixed_routes_agree() {
        let rep = Arc::new(build_rep(6.5).unwrap());
        let s = coherent(&rep, 1.3, 4.0).unwrap();
        let rho = DensityMatrix::from_pure(s.amplitudes());
        let window = HusimiWindow::sphere(12, 10);
        let a = husimi(&rho, &rep, window).unwrap();
        let b = husimi_pure(&s, window).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_degenerate_window() {
        let rep = Arc::new(build_rep(1.0).unwrap());
        let s = coherent(&rep, 1.0, 1.0).unwrap();
        assert!(husimi_pure(&s, HusimiWindow::sphere(1, 1)).is_err());
        let band = HusimiWindow::Band {
            phi: GridAxis::new(0.0, 1.0, 4).unwrap(),
            p: GridAxis::new(0.0, 12.0, 4).unwrap(),
            j_r: 9.0,
            branch: Branch::Positive,
        };
        assert!(matches!(husimi_pure(&s, band), Err(Error::OutOfBand { .. })));
    }
}
