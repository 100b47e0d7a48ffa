//! Angular-momentum algebra in the Dicke basis.
//!
//! Basis index `k` corresponds to `m = k - j`, so index 0 is `|j,-j>` and the
//! last index is the maximal-weight state `|j,j>`.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Negative eigenvalues above this are treated as roundoff and clamped to zero.
pub const PSD_CLAMP: f64 = -1e-6;

const HERMITIAN_TOL: f64 = 1e-10;

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct RealSpectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

fn sort_columns<T: nalgebra::Scalar + Copy>(
    values: &DVector<f64>,
    vectors: &DMatrix<T>,
) -> (DVector<f64>, DMatrix<T>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = DVector::from_iterator(values.len(), order.iter().map(|&i| values[i]));
    let cols: Vec<_> = order.iter().map(|&i| vectors.column(i).into_owned()).collect();
    (sorted, DMatrix::from_columns(&cols))
}

impl RealSpectrum {
    pub fn of(m: &DMatrix<f64>) -> Self {
        let eig = m.clone().symmetric_eigen();
        let (values, vectors) = sort_columns(&eig.eigenvalues, &eig.eigenvectors);
        RealSpectrum { values, vectors }
    }
}

impl HermitianSpectrum {
    pub fn of(m: &CMatrix) -> Result<Self> {
        check_hermitian(m)?;
        let eig = m.clone().symmetric_eigen();
        let (values, vectors) = sort_columns(&eig.eigenvalues, &eig.eigenvectors);
        Ok(HermitianSpectrum { values, vectors })
    }

    /// `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(f(self.values[k]), 0.0);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Largest modulus among complex entries.
pub fn max_modulus<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for k in i..n {
            worst = worst.max((m[(i, k)] - m[(k, i)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(
            "matrix",
            format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let residual = hermitian_residual(m);
    if residual > HERMITIAN_TOL * scale {
        return Err(Error::invalid(
            "matrix",
            format!("not Hermitian (residual {residual:.3e})"),
        ));
    }
    Ok(())
}

/// Basis convention recorded in every output file.
pub const BASIS_ORDERING: &str = "dicke |j,m>, index k <-> m = k - j, m ascending from -j";

/// Dense `(2j+1)`-dimensional irrep of su(2) in the Dicke basis.
#[derive(Debug)]
pub struct AngularMomentumRep {
    two_j: u32,
    jx: CMatrix,
    jy: CMatrix,
    jz: CMatrix,
    // ladder[k] = <m_k + 1| J+ |m_k>
    ladder: Vec<f64>,
    jx_spectrum: OnceLock<RealSpectrum>,
}

/// Builds the representation for spin `j`; `2j` must be a positive integer.
pub fn build_rep(j: f64) -> Result<AngularMomentumRep> {
    AngularMomentumRep::new(j)
}

impl AngularMomentumRep {
    pub fn new(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        if !two_j.is_finite() || two_j < 0.5 || (two_j - two_j.round()).abs() > 1e-12 {
            return Err(Error::invalid(
                "j",
                format!("{j} is not a positive half-integer"),
            ));
        }
        Ok(Self::from_two_j(two_j.round() as u32))
    }

    /// Representation for `n` spin-1/2 particles in the symmetric subspace, `j = n/2`.
    pub fn for_spins(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n_spins", "need at least one spin"));
        }
        Ok(Self::from_two_j(n))
    }

    fn from_two_j(two_j: u32) -> Self {
        let dim = two_j as usize + 1;
        let j = two_j as f64 / 2.0;
        let m = |k: usize| k as f64 - j;
        let ladder: Vec<f64> = (0..dim - 1)
            .map(|k| (j * (j + 1.0) - m(k) * (m(k) + 1.0)).max(0.0).sqrt())
            .collect();

        let mut jx = CMatrix::zeros(dim, dim);
        let mut jy = CMatrix::zeros(dim, dim);
        let mut jz = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            jz[(k, k)] = C64::new(m(k), 0.0);
        }
        for (k, &c) in ladder.iter().enumerate() {
            // J+ |m_k> = c |m_{k+1}>, so <k+1|J+|k> = c and <k|J-|k+1> = c.
            jx[(k + 1, k)] = C64::new(c / 2.0, 0.0);
            jx[(k, k + 1)] = C64::new(c / 2.0, 0.0);
            jy[(k + 1, k)] = C64::new(0.0, -c / 2.0);
            jy[(k, k + 1)] = C64::new(0.0, c / 2.0);
        }
        AngularMomentumRep {
            two_j,
            jx,
            jy,
            jz,
            ladder,
            jx_spectrum: OnceLock::new(),
        }
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Magnetic quantum number of basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }

    pub fn jx(&self) -> &CMatrix {
        &self.jx
    }

    pub fn jy(&self) -> &CMatrix {
        &self.jy
    }

    pub fn jz(&self) -> &CMatrix {
        &self.jz
    }

    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    /// Real eigendecomposition of `Jx` (which is real symmetric in this basis), cached.
    pub fn jx_spectrum(&self) -> &RealSpectrum {
        self.jx_spectrum
            .get_or_init(|| RealSpectrum::of(&self.jx.map(|z| z.re)))
    }

    /// `(<Jx>, <Jy>, <Jz>)` for a normalized amplitude vector, in O(dim).
    pub fn expectation(&self, amps: &CVector) -> [f64; 3] {
        let mut jz = 0.0;
        for (k, a) in amps.iter().enumerate() {
            jz += self.m(k) * a.norm_sqr();
        }
        // <J+> = sum_k c_k conj(a_{k+1}) a_k
        let mut jp = C64::new(0.0, 0.0);
        for (k, &c) in self.ladder.iter().enumerate() {
            jp += amps[k + 1].conj() * amps[k] * c;
        }
        [jp.re, jp.im, jz]
    }

    /// Spin coherent state from the cached `Jx` spectrum.
    ///
    /// The generator `Jx sin(phi) - Jy cos(phi)` is a z-rotation of
    /// `Jx` by `phi - pi/2`, so its exponential shares `Jx`'s eigenvectors up to
    /// diagonal phases. Agrees with [`coherent_state`] to roundoff in O(dim^2).
    pub fn coherent_amplitudes(&self, theta: f64, phi: f64) -> CVector {
        let spec = self.jx_spectrum();
        let dim = self.dim();
        let top = dim - 1;
        let weights: Vec<C64> = (0..dim)
            .map(|k| C64::from_polar(spec.vectors[(top, k)], theta * spec.values[k]))
            .collect();
        let shift = phi - std::f64::consts::FRAC_PI_2;
        let j = self.j();
        CVector::from_fn(dim, |m_idx, _| {
            let mut acc = C64::new(0.0, 0.0);
            for (k, w) in weights.iter().enumerate() {
                acc += w * spec.vectors[(m_idx, k)];
            }
            acc * C64::from_polar(1.0, shift * (j - self.m(m_idx)))
        })
    }
}

/// `exp(i * scale * H)` by spectral decomposition of the Hermitian `H`.
pub fn hermitian_expi(h: &CMatrix, scale: f64) -> Result<CMatrix> {
    check_hermitian(h)?;
    if h.iter().all(|z| z.im == 0.0) {
        let spec = RealSpectrum::of(&h.map(|z| z.re));
        return Ok(expi_from_real_spectrum(&spec, scale));
    }
    let spec = HermitianSpectrum::of(h)?;
    let mut scaled = spec.vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::from_polar(1.0, scale * spec.values[k]);
    }
    Ok(scaled * spec.vectors.adjoint())
}

/// `V diag(exp(i scale lambda)) V^T` for a real symmetric spectrum.
pub(crate) fn expi_from_real_spectrum(spec: &RealSpectrum, scale: f64) -> CMatrix {
    let n = spec.values.len();
    let mut cos = spec.vectors.clone();
    let mut sin = spec.vectors.clone();
    for k in 0..n {
        let (s, c) = (scale * spec.values[k]).sin_cos();
        cos.column_mut(k).scale_mut(c);
        sin.column_mut(k).scale_mut(s);
    }
    let vt = spec.vectors.transpose();
    let re = cos * &vt;
    let im = sin * &vt;
    CMatrix::from_fn(n, n, |r, c| C64::new(re[(r, c)], im[(r, c)]))
}

/// Principal square root of a positive-semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-1e-6, 0)` are clamped to zero; anything more negative is
/// rejected.
pub fn hermitian_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let spec = HermitianSpectrum::of(m)?;
    check_psd(&spec.values)?;
    Ok(spec.map_real(|x| x.max(0.0).sqrt()))
}

pub(crate) fn check_psd(values: &DVector<f64>) -> Result<()> {
    if let Some(&worst) = values.iter().min_by(|a, b| a.total_cmp(b)) {
        if worst < PSD_CLAMP {
            return Err(Error::invalid(
                "matrix",
                format!("not positive semidefinite (eigenvalue {worst:.3e})"),
            ));
        }
    }
    Ok(())
}

/// Pure state over the Dicke basis of a shared representation.
#[derive(Clone, Debug)]
pub struct QuantumState {
    rep: Arc<AngularMomentumRep>,
    amplitudes: CVector,
}

impl QuantumState {
    pub fn new(rep: Arc<AngularMomentumRep>, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != rep.dim() {
            return Err(Error::DimensionMismatch {
                expected: rep.dim(),
                found: amplitudes.len(),
            });
        }
        let state = QuantumState { rep, amplitudes };
        state.check_norm()?;
        Ok(state)
    }

    /// Dicke state `|j, m>`.
    pub fn dicke(rep: Arc<AngularMomentumRep>, m: f64) -> Result<Self> {
        let k = m + rep.j();
        if (k - k.round()).abs() > 1e-12 || k < -0.5 || k.round() as usize >= rep.dim() {
            return Err(Error::invalid("m", format!("{m} is not a valid projection")));
        }
        let mut amps = CVector::zeros(rep.dim());
        amps[k.round() as usize] = C64::new(1.0, 0.0);
        Ok(QuantumState {
            rep,
            amplitudes: amps,
        })
    }

    pub fn rep(&self) -> &Arc<AngularMomentumRep> {
        &self.rep
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn check_norm(&self) -> Result<()> {
        let drift = (self.norm_sqr() - 1.0).abs();
        if drift > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "state norm drifted by {drift:.3e}"
            )));
        }
        Ok(())
    }

    pub fn expectation(&self) -> [f64; 3] {
        self.rep.expectation(&self.amplitudes)
    }
}

/// Spin coherent state `exp{i theta [Jx sin(phi) - Jy cos(phi)]} |j,j>`.
///
/// Built directly by exponentiating the generator; see
/// [`AngularMomentumRep::coherent_amplitudes`] for the cached O(dim^2) route.
pub fn coherent_state(rep: &Arc<AngularMomentumRep>, theta: f64, phi: f64) -> Result<QuantumState> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::invalid("theta/phi", "angles must be finite"));
    }
    let generator = rep.jx() * C64::new(phi.sin(), 0.0) - rep.jy() * C64::new(phi.cos(), 0.0);
    let u = hermitian_expi(&generator, theta)?;
    let amps = u.column(rep.dim() - 1).into_owned();
    Ok(QuantumState {
        rep: Arc::clone(rep),
        amplitudes: amps,
    })
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12) and trace (1e-10). Positivity is checked by
    /// [`DensityMatrix::check_psd`] since it needs an eigendecomposition.
    pub fn new(elements: CMatrix) -> Result<Self> {
        if !elements.is_square() {
            return Err(Error::invalid("rho", "density matrix must be square"));
        }
        let residual = hermitian_residual(&elements);
        if residual > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "density matrix not Hermitian (residual {residual:.3e})"
            )));
        }
        let trace = elements.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "density matrix trace is {trace}"
            )));
        }
        Ok(DensityMatrix { elements })
    }

    pub fn from_pure(amplitudes: &CVector) -> Self {
        DensityMatrix {
            elements: amplitudes * amplitudes.adjoint(),
        }
    }

    /// Diagonal density matrix from a probability vector.
    pub fn from_diagonal(probabilities: &[f64]) -> Result<Self> {
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("probabilities", "must be non-negative and sum to 1"));
        }
        let n = probabilities.len();
        Ok(DensityMatrix {
            elements: CMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    C64::new(probabilities[r], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        })
    }

    /// Maximally mixed state `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            elements: CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub(crate) fn from_raw(elements: CMatrix) -> Self {
        DensityMatrix { elements }
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn trace(&self) -> C64 {
        self.elements.trace()
    }

    /// `tr rho^2`, computed as the squared Frobenius norm of a Hermitian matrix.
    pub fn purity(&self) -> f64 {
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Result<DVector<f64>> {
        Ok(HermitianSpectrum::of(&self.elements)?.values)
    }

    pub fn check_psd(&self) -> Result<()> {
        let values = self.eigenvalues()?;
        let worst = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if worst < -1e-10 {
            return Err(Error::InvariantViolation(format!(
                "density matrix has eigenvalue {worst:.3e}"
            )));
        }
        Ok(())
    }
}
