//! Floquet evolution of the quantum kicked top and its diagnostics.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::classical::{rotor_limit_theta, Branch, TopParams};
use crate::error::{Error, Result};
use crate::spin::{
    max_modulus,
    check_psd, expi_from_real_spectrum, hermitian_sqrt, AngularMomentumRep, CMatrix, CVector,
    DensityMatrix, HermitianSpectrum, QuantumState,
};

/// Relative slack on `|<J>| <= j` before it counts as a violation.
const EXPECTATION_SLACK: f64 = 1e-9;

/// `U = exp(-i beta/(2j) Jz^2) exp(-i alpha Jx)`.
#[derive(Clone, Debug)]
pub struct FloquetOperator {
    rep: Arc<AngularMomentumRep>,
    params: TopParams,
    u: CMatrix,
}

/// Builds the Floquet operator, reusing the representation's cached `Jx` spectrum.
pub fn build_floquet(rep: &Arc<AngularMomentumRep>, params: TopParams) -> Result<FloquetOperator> {
    let params = TopParams::new(params.alpha, params.beta)?;
    let mut u = expi_from_real_spectrum(rep.jx_spectrum(), -params.alpha);
    let twist = params.beta / (2.0 * rep.j());
    for k in 0..rep.dim() {
        let m = rep.m(k);
        let phase = C64::from_polar(1.0, -twist * m * m);
        u.row_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    Ok(FloquetOperator {
        rep: Arc::clone(rep),
        params,
        u,
    })
}

impl FloquetOperator {
    pub fn rep(&self) -> &Arc<AngularMomentumRep> {
        &self.rep
    }

    pub fn params(&self) -> TopParams {
        self.params
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `out = U psi`.
    pub fn apply_into(&self, psi: &CVector, out: &mut CVector) {
        out.gemv(C64::new(1.0, 0.0), &self.u, psi, C64::new(0.0, 0.0));
    }

    /// Largest elementwise entry of `U U^dagger - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = &self.u * self.u.adjoint();
        let n = self.dim();
        max_modulus((prod - CMatrix::identity(n, n)).iter())
    }
}

/// What [`evolve`] should record besides the per-kick observables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecordOptions {
    /// Accumulate the running time-averaged density matrix.
    pub density_average: bool,
    /// Include the initial state in the density-matrix average.
    pub include_initial: bool,
    /// Record the ergodicity fidelity of the running average every `n` kicks.
    pub ergodicity_stride: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct EvolutionRecord {
    /// `<J>` after each kick; index 0 is the initial state.
    pub expectations: Vec<[f64; 3]>,
    /// Linear entanglement entropy `S(n)` of one spin, index 0 is the initial state.
    pub entropy: Vec<f64>,
    pub rho_bar: Option<DensityMatrix>,
    /// `(kick, F(rho_bar_kick))` pairs.
    pub ergodicity: Vec<(usize, f64)>,
    pub final_state: QuantumState,
}

impl EvolutionRecord {
    pub fn kicks(&self) -> usize {
        self.entropy.len() - 1
    }
}

/// Applies `U` kick by kick and records observables.
pub fn evolve(
    state: &QuantumState,
    floquet: &FloquetOperator,
    kicks: usize,
    options: RecordOptions,
) -> Result<EvolutionRecord> {
    let rep = state.rep();
    if rep.dim() != floquet.dim() {
        return Err(Error::DimensionMismatch {
            expected: floquet.dim(),
            found: rep.dim(),
        });
    }
    if options.ergodicity_stride == Some(0) {
        return Err(Error::invalid("ergodicity_stride", "must be >= 1"));
    }
    let j = rep.j();
    let needs_rho = options.density_average || options.ergodicity_stride.is_some();

    let mut psi = state.amplitudes().clone();
    let mut next = CVector::zeros(psi.len());
    let mut expectations = Vec::with_capacity(kicks + 1);
    let mut entropy = Vec::with_capacity(kicks + 1);
    let mut ergodicity = Vec::new();

    let mut rho_sum = needs_rho.then(|| CMatrix::zeros(psi.len(), psi.len()));
    let mut averaged = 0usize;
    let one = C64::new(1.0, 0.0);

    let record = |psi: &CVector, expectations: &mut Vec<[f64; 3]>, entropy: &mut Vec<f64>| -> Result<()> {
        let e = rep.expectation(psi);
        entropy.push(linear_ee(e[0], e[1], e[2], j)?);
        expectations.push(e);
        Ok(())
    };

    record(&psi, &mut expectations, &mut entropy)?;
    if options.include_initial {
        if let Some(sum) = rho_sum.as_mut() {
            sum.gerc(one, &psi, &psi, one);
            averaged += 1;
        }
    }

    for n in 1..=kicks {
        floquet.apply_into(&psi, &mut next);
        std::mem::swap(&mut psi, &mut next);
        let drift = (psi.norm_squared() - 1.0).abs();
        if drift > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "state norm drifted by {drift:.3e} at kick {n}"
            )));
        }
        record(&psi, &mut expectations, &mut entropy)?;
        if let Some(sum) = rho_sum.as_mut() {
            sum.gerc(one, &psi, &psi, one);
            averaged += 1;
            if let Some(stride) = options.ergodicity_stride {
                if n % stride == 0 {
                    let rho = DensityMatrix::from_raw(&*sum / C64::new(averaged as f64, 0.0));
                    ergodicity.push((n, ergodicity_fidelity(&rho)?));
                }
            }
        }
    }

    let rho_bar = match (options.density_average, rho_sum) {
        (true, Some(sum)) if averaged > 0 => {
            Some(DensityMatrix::from_raw(sum / C64::new(averaged as f64, 0.0)))
        }
        (true, _) => Some(DensityMatrix::from_pure(&psi)),
        _ => None,
    };
    Ok(EvolutionRecord {
        expectations,
        entropy,
        rho_bar,
        ergodicity,
        final_state: QuantumState::new(Arc::clone(rep), psi)?,
    })
}

/// One-spin linear entanglement entropy `(1 - |<J>|^2 / j^2) / 2`.
pub fn linear_ee(jx: f64, jy: f64, jz: f64, j: f64) -> Result<f64> {
    let r2 = (jx * jx + jy * jy + jz * jz) / (j * j);
    if !r2.is_finite() || r2.sqrt() > 1.0 + EXPECTATION_SLACK {
        return Err(Error::InvariantViolation(format!(
            "|<J>|/j = {} exceeds 1",
            r2.sqrt()
        )));
    }
    Ok((0.5 * (1.0 - r2)).clamp(0.0, 0.5))
}

/// Mean of `S(1)..S(T)`.
pub fn time_averaged_ee(record: &EvolutionRecord, t: usize) -> Result<f64> {
    if t == 0 || t > record.kicks() {
        return Err(Error::invalid(
            "T",
            format!("need 1 <= T <= {} recorded kicks, got {t}", record.kicks()),
        ));
    }
    Ok(record.entropy[1..=t].iter().sum::<f64>() / t as f64)
}

/// Mean of `S(0)..S(T)`, counting the initial state.
pub fn time_averaged_ee_inclusive(record: &EvolutionRecord, t: usize) -> Result<f64> {
    if t > record.kicks() {
        return Err(Error::invalid(
            "T",
            format!("need T <= {} recorded kicks, got {t}", record.kicks()),
        ));
    }
    Ok(record.entropy[..=t].iter().sum::<f64>() / (t + 1) as f64)
}

/// Fidelity with the normalized microcanonical state `I/dim`:
/// `(1/sqrt(dim)) sum_i sqrt(lambda_i)`.
pub fn ergodicity_fidelity(rho_bar: &DensityMatrix) -> Result<f64> {
    let values = HermitianSpectrum::of(rho_bar.elements())?.values;
    check_psd(&values)?;
    let dim = rho_bar.dim() as f64;
    Ok(values.iter().map(|&l| l.max(0.0).sqrt()).sum::<f64>() / dim.sqrt())
}

/// Uhlmann fidelity `tr sqrt(sqrt(a) b sqrt(a))`.
pub fn state_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let sa = hermitian_sqrt(a.elements())?;
    let mut inner = &sa * b.elements() * &sa;
    // symmetrize away the roundoff of the triple product
    inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let values = HermitianSpectrum::of(&inner)?.values;
    check_psd(&values)?;
    Ok(values.iter().map(|&l| l.max(0.0).sqrt()).sum())
}

/// Coherent state at polar angle `branch * arccos(p / j_r)` and azimuth `phi`.
pub fn rotor_limit_initial_state(
    rep: &Arc<AngularMomentumRep>,
    phi: f64,
    p: f64,
    j_r: f64,
    branch: Branch,
) -> Result<QuantumState> {
    if !j_r.is_finite() || j_r <= 0.0 {
        return Err(Error::invalid("j_r", format!("{j_r} must be > 0")));
    }
    let theta = rotor_limit_theta(p, j_r, branch)?;
    coherent(rep, theta, phi)
}

/// Spin coherent state through the cached `Jx` spectrum.
pub fn coherent(rep: &Arc<AngularMomentumRep>, theta: f64, phi: f64) -> Result<QuantumState> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::invalid("theta/phi", "angles must be finite"));
    }
    QuantumState::new(Arc::clone(rep), rep.coherent_amplitudes(theta, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_rep, coherent_state, hermitian_expi};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn rep(j: f64) -> Arc<AngularMomentumRep> {
        Arc::new(build_rep(j).unwrap())
    }

    #[test]
    fn floquet_quarter_rotation_period() {
        let r = rep(3.5);
        let f = build_floquet(&r, TopParams::new(FRAC_PI_2, 0.0).unwrap()).unwrap();
        let u = f.matrix();
        let u4 = u * u * u * u;
        // projective identity: |entries| match the identity pattern
        for a in 0..r.dim() {
            for b in 0..r.dim() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((u4[(a, b)].norm() - want).abs() < 1e-12);
            }
        }
        assert!(f.unitarity_residual() < 1e-12);
    }

    #[test]
    fn floquet_without_precession_is_diagonal() {
        let r = rep(2.0);
        let f = build_floquet(&r, TopParams::new(0.0, 3.0).unwrap()).unwrap();
        for a in 0..r.dim() {
            for b in 0..r.dim() {
                let want = if a == b {
                    C64::from_polar(1.0, -3.0 / 4.0 * r.m(a) * r.m(a))
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((f.matrix()[(a, b)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn floquet_matches_factorwise_oracle_for_spin_one() {
        let r = rep(1.0);
        let params = TopParams::new(FRAC_PI_2, 3.0).unwrap();
        let f = build_floquet(&r, params).unwrap();
        // each factor exponentiated independently with nalgebra's Pade exp
        let i = C64::new(0.0, 1.0);
        let jz2 = r.jz() * r.jz();
        let twist = (jz2 * (-i * 3.0 / 2.0)).exp();
        let rot = (r.jx() * (-i * FRAC_PI_2)).exp();
        let oracle = twist * rot;
        assert!(max_modulus((f.matrix() - oracle).iter()) < 1e-12);
        // and the generic complex route agrees
        let rot2 = hermitian_expi(r.jx(), -FRAC_PI_2).unwrap();
        assert!(max_modulus((rot2 - (r.jx() * (-i * FRAC_PI_2)).exp()).iter()) < 1e-12);
    }

    #[test]
    fn zero_kicks_keeps_initial_observables() {
        let r = rep(10.0);
        let f = build_floquet(&r, TopParams::new(FRAC_PI_2, 3.0).unwrap()).unwrap();
        let s = coherent_state(&r, 2.25, 2.2).unwrap();
        let rec = evolve(&s, &f, 0, RecordOptions::default()).unwrap();
        assert_eq!(rec.entropy.len(), 1);
        assert!(rec.entropy[0].abs() < 1e-10);
    }

    #[test]
    fn rotation_keeps_coherent_states_unentangled() {
        let r = rep(15.0);
        let f = build_floquet(&r, TopParams::new(0.77, 0.0).unwrap()).unwrap();
        let s = coherent(&r, 1.1, 0.3).unwrap();
        let rec = evolve(&s, &f, 200, RecordOptions::default()).unwrap();
        assert!(rec.entropy.iter().all(|&e| e.abs() < 1e-10));
    }

    #[test]
    fn evolve_rejects_dimension_mismatch() {
        let f = build_floquet(&rep(2.0), TopParams::new(1.0, 1.0).unwrap()).unwrap();
        let s = coherent(&rep(3.0), 1.0, 1.0).unwrap();
        assert!(matches!(
            evolve(&s, &f, 3, RecordOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn linear_ee_examples() {
        assert_eq!(linear_ee(0.0, 0.0, 3.0, 3.0).unwrap(), 0.0);
        assert_eq!(linear_ee(0.0, 0.0, 0.0, 3.0).unwrap(), 0.5);
        assert!((linear_ee(0.0, 0.0, 0.5, 1.0).unwrap() - 0.375).abs() < 1e-15);
        assert!(linear_ee(0.0, 0.0, 1.1, 1.0).is_err());
    }

    #[test]
    fn time_average_bounds() {
        let r = rep(1.0);
        let f = build_floquet(&r, TopParams::new(0.4, 0.0).unwrap()).unwrap();
        let s = coherent(&r, 0.5, 0.5).unwrap();
        let rec = evolve(&s, &f, 5, RecordOptions::default()).unwrap();
        assert!(time_averaged_ee(&rec, 5).unwrap().abs() < 1e-12);
        assert!(time_averaged_ee(&rec, 6).is_err());
        assert!(time_averaged_ee(&rec, 0).is_err());
        let mut flat = rec.clone();
        flat.entropy = vec![0.5; 6];
        assert_eq!(time_averaged_ee(&flat, 5).unwrap(), 0.5);
        assert_eq!(time_averaged_ee_inclusive(&flat, 5).unwrap(), 0.5);
    }

    #[test]
    fn ergodicity_extremes() {
        let mixed = DensityMatrix::maximally_mixed(7);
        assert!((ergodicity_fidelity(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let r = rep(3.0);
        let pure = DensityMatrix::from_pure(coherent(&r, 1.0, 2.0).unwrap().amplitudes());
        assert!((ergodicity_fidelity(&pure).unwrap() - 1.0 / 7f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn state_fidelity_examples() {
        let r = rep(2.0);
        let a = DensityMatrix::from_pure(coherent(&r, 1.0, 2.0).unwrap().amplitudes());
        assert!((state_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-7);
        let up = DensityMatrix::from_pure(coherent(&r, 0.0, 0.0).unwrap().amplitudes());
        let down = DensityMatrix::from_pure(coherent(&r, PI, 0.0).unwrap().amplitudes());
        assert!(state_fidelity(&up, &down).unwrap() < 1e-6);
        let other = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            state_fidelity(&a, &other),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rotor_limit_state_examples() {
        let r = rep(4.5);
        let eq = rotor_limit_initial_state(&r, 0.3, 0.0, 9.0, Branch::Positive).unwrap();
        let direct = coherent_state(&r, FRAC_PI_2, 0.3).unwrap();
        assert!(max_modulus((eq.amplitudes() - direct.amplitudes()).iter()) < 1e-10);
        let neg = rotor_limit_initial_state(&r, 0.3, TAU, 9.0, Branch::Negative).unwrap();
        let direct = coherent_state(&r, -(TAU / 9.0).acos(), 0.3).unwrap();
        assert!(max_modulus((neg.amplitudes() - direct.amplitudes()).iter()) < 1e-10);
        assert!(matches!(
            rotor_limit_initial_state(&r, 0.0, 10.0, 9.0, Branch::Positive),
            Err(Error::OutOfBand { .. })
        ));
    }
}
