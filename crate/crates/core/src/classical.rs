//! Classical kicked top and kicked rotor: stroboscopic maps, their tangent
//! maps, the rotor-limit rescaling and a Kolmogorov-Sinai entropy estimator.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular/chaotic demarcation in bits per kick.
pub const CHAOS_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopParams {
    /// Precession angle about x per kick.
    pub alpha: f64,
    /// Torsion strength.
    pub beta: f64,
}

impl TopParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::invalid("beta", format!("{beta} must be finite and >= 0")));
        }
        Ok(TopParams { alpha, beta })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorParams {
    pub kick_strength: f64,
    pub inertia: f64,
}

impl RotorParams {
    pub fn new(kick_strength: f64, inertia: f64) -> Result<Self> {
        if !kick_strength.is_finite() || kick_strength < 0.0 {
            return Err(Error::invalid(
                "kick_strength",
                format!("{kick_strength} must be finite and >= 0"),
            ));
        }
        if !inertia.is_finite() || inertia <= 0.0 {
            return Err(Error::invalid("inertia", format!("{inertia} must be > 0")));
        }
        Ok(RotorParams {
            kick_strength,
            inertia,
        })
    }
}

/// Normalized classical angular momentum `<J>/j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        SpherePoint { x, y, z }
    }

    /// `(sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))`.
    pub fn from_polar(phi: f64, theta: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        SpherePoint::new(st * cp, st * sp, ct)
    }

    /// `(phi, theta)` with `phi` in `[0, 2pi)` and `theta` in `[0, pi]`.
    pub fn to_polar(&self) -> (f64, f64) {
        let r = self.norm();
        let theta = (self.z / r).clamp(-1.0, 1.0).acos();
        (wrap_angle(self.y.atan2(self.x)), theta)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Point on the rotor cylinder. `p` is never reduced during evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotorPoint {
    pub phi: f64,
    pub p: f64,
}

impl RotorPoint {
    pub fn new(phi: f64, p: f64) -> Self {
        RotorPoint {
            phi: wrap_angle(phi),
            p,
        }
    }

    /// Momentum reduced into `[0, 2 pi I)`, for plotting only.
    pub fn p_reduced(&self, inertia: f64) -> f64 {
        self.p.rem_euclid(TAU * inertia)
    }
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2pi for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed angular difference in `(-pi, pi]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Linearized perturbation in a `D`-dimensional phase space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector<const D: usize> {
    pub components: [f64; D],
}

impl<const D: usize> TangentVector<D> {
    pub fn new(components: [f64; D]) -> Self {
        TangentVector { components }
    }

    /// Unit vector along the first coordinate.
    pub fn first_axis() -> Self {
        let mut components = [0.0; D];
        components[0] = 1.0;
        TangentVector { components }
    }

    /// Uniformly random unit vector.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut components = [0.0; D];
            for c in components.iter_mut() {
                *c = rng.gen_range(-1.0..=1.0);
            }
            let v = TangentVector { components };
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v.scaled(1.0 / n);
            }
        }
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector {
            components: self.components.map(|c| c * s),
        }
    }

    /// Rescales to unit length and returns the length before rescaling.
    pub fn renormalize(&mut self) -> f64 {
        let l = self.norm();
        self.components = self.components.map(|c| c / l);
        l
    }
}

/// Which sign of the polar angle a rotor-limit point is read with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Positive => "positive",
            Branch::Negative => "negative",
        })
    }
}

/// One kick of the classical top.
pub fn top_step(p: &SpherePoint, params: &TopParams) -> SpherePoint {
    let (sa, ca) = params.alpha.sin_cos();
    let z1 = p.y * sa + p.z * ca;
    let w = p.y * ca - p.z * sa;
    let (sg, cg) = (params.beta * z1).sin_cos();
    SpherePoint {
        x: p.x * cg - w * sg,
        y: p.x * sg + w * cg,
        z: z1,
    }
}

/// Jacobian of [`top_step`] applied to `dv`.
///
/// Column for `dZ` in the `dY'` row is `X b ca cg - Y b ca^2 sg + Z b ca sa sg - sa cg`;
/// the last term follows from differentiating `(Y ca - Z sa) cos(gamma)`.
pub fn top_tangent_step(
    p: &SpherePoint,
    dv: &TangentVector<3>,
    params: &TopParams,
) -> TangentVector<3> {
    let [dx, dy, dz] = dv.components;
    let (sa, ca) = params.alpha.sin_cos();
    let b = params.beta;
    let gamma = b * (p.y * sa + p.z * ca);
    let (sg, cg) = gamma.sin_cos();
    let (x, y, z) = (p.x, p.y, p.z);

    let dx1 = dx * cg
        + dy * (-x * b * sa * sg - y * b * sa * ca * cg + z * b * sa * sa * cg - ca * sg)
        + dz * (-x * b * ca * sg - y * b * ca * ca * cg + z * b * ca * sa * cg + sa * sg);
    let dy1 = dx * sg
        + dy * (x * b * sa * cg - y * b * sa * ca * sg + z * b * sa * sa * sg + ca * cg)
        + dz * (x * b * ca * cg - y * b * ca * ca * sg + z * b * ca * sa * sg - sa * cg);
    let dz1 = dy * sa + dz * ca;
    TangentVector::new([dx1, dy1, dz1])
}

/// One kick of the standard map: `P' = P + K sin(phi)`, `phi' = phi + P'/I`.
pub fn rotor_step(p: &RotorPoint, params: &RotorParams) -> RotorPoint {
    let p1 = p.p + params.kick_strength * p.phi.sin();
    RotorPoint::new(p.phi + p1 / params.inertia, p1)
}

/// Tangent map of [`rotor_step`]; components are `(d_phi, d_p)`.
pub fn rotor_tangent_step(
    p: &RotorPoint,
    dv: &TangentVector<2>,
    params: &RotorParams,
) -> TangentVector<2> {
    let [dphi, dp] = dv.components;
    let kc = params.kick_strength * p.phi.cos();
    let dp1 = dp + kc * dphi;
    let dphi1 = (1.0 + kc / params.inertia) * dphi + dp / params.inertia;
    TangentVector::new([dphi1, dp1])
}

/// Rescaling `alpha = K / j_r`, `beta = j_r / I` that confines the top to an
/// equatorial band.
pub fn rotor_limit_params(kick_strength: f64, inertia: f64, j_r: f64) -> Result<TopParams> {
    if !j_r.is_finite() || j_r <= 0.0 {
        return Err(Error::invalid("j_r", format!("{j_r} must be > 0")));
    }
    if !inertia.is_finite() || inertia <= 0.0 {
        return Err(Error::invalid("inertia", format!("{inertia} must be > 0")));
    }
    TopParams::new(kick_strength / j_r, j_r / inertia)
}

/// Polar angle `branch * arccos(p / j_r)` of a rotor point in the band.
pub fn rotor_limit_theta(p: f64, j_r: f64, branch: Branch) -> Result<f64> {
    if !(p.abs() <= j_r) {
        return Err(Error::OutOfBand { p, j_r });
    }
    Ok(branch.sign() * (p / j_r).acos())
}

/// Places a rotor point on the sphere: `Z = P / j_r` and the polar reading
/// with `theta = branch * arccos(Z)`, which for the positive branch is
/// `(X, Y) = (cos(phi), sin(phi)) sqrt(1 - Z^2)`.
pub fn embed_rotor_on_sphere(p: &RotorPoint, j_r: f64, branch: Branch) -> Result<SpherePoint> {
    let z = p.p / j_r;
    rotor_limit_theta(p.p, j_r, branch)?;
    let s = branch.sign() * (1.0 - z * z).max(0.0).sqrt();
    let (sp, cp) = p.phi.sin_cos();
    Ok(SpherePoint::new(s * cp, s * sp, z))
}

/// Push-forward of a rotor tangent `(d_phi, d_p)` through [`embed_rotor_on_sphere`].
pub fn embed_rotor_tangent(
    p: &RotorPoint,
    dv: &TangentVector<2>,
    j_r: f64,
    branch: Branch,
) -> Result<TangentVector<3>> {
    let z = p.p / j_r;
    rotor_limit_theta(p.p, j_r, branch)?;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let s = branch.sign();
    let [dphi, dp] = dv.components;
    // d r / d P, finite away from the poles
    let dr = if r > 0.0 { -z / (r * j_r) } else { 0.0 };
    let (sp, cp) = p.phi.sin_cos();
    Ok(TangentVector::new([
        s * (-sp * r * dphi + cp * dr * dp),
        s * (cp * r * dphi + sp * dr * dp),
        dp / j_r,
    ]))
}

/// Inverse of [`embed_rotor_on_sphere`]: azimuth of the branch reading and `P = Z j_r`.
pub fn project_to_rotor(p: &SpherePoint, j_r: f64, branch: Branch) -> RotorPoint {
    let s = branch.sign();
    RotorPoint::new((s * p.y).atan2(s * p.x), p.z * j_r)
}

/// A stroboscopic map together with its tangent map.
pub trait KickedMap {
    type Point: Copy + fmt::Debug;
    type Tangent: Copy + fmt::Debug;

    fn step(&self, p: &Self::Point) -> Self::Point;
    fn tangent_step(&self, p: &Self::Point, dv: &Self::Tangent) -> Self::Tangent;
    fn tangent_norm(dv: &Self::Tangent) -> f64;
    fn tangent_scaled(dv: &Self::Tangent, s: f64) -> Self::Tangent;
    fn default_tangent() -> Self::Tangent;
    fn random_tangent(rng: &mut ChaCha8Rng) -> Self::Tangent;
}

impl KickedMap for TopParams {
    type Point = SpherePoint;
    type Tangent = TangentVector<3>;

    fn step(&self, p: &SpherePoint) -> SpherePoint {
        top_step(p, self)
    }
    fn tangent_step(&self, p: &SpherePoint, dv: &TangentVector<3>) -> TangentVector<3> {
        top_tangent_step(p, dv, self)
    }
    fn tangent_norm(dv: &TangentVector<3>) -> f64 {
        dv.norm()
    }
    fn tangent_scaled(dv: &TangentVector<3>, s: f64) -> TangentVector<3> {
        dv.scaled(s)
    }
    fn default_tangent() -> TangentVector<3> {
        TangentVector::first_axis()
    }
    fn random_tangent(rng: &mut ChaCha8Rng) -> TangentVector<3> {
        TangentVector::random_unit(rng)
    }
}

impl KickedMap for RotorParams {
    type Point = RotorPoint;
    type Tangent = TangentVector<2>;

    fn step(&self, p: &RotorPoint) -> RotorPoint {
        rotor_step(p, self)
    }
    fn tangent_step(&self, p: &RotorPoint, dv: &TangentVector<2>) -> TangentVector<2> {
        rotor_tangent_step(p, dv, self)
    }
    fn tangent_norm(dv: &TangentVector<2>) -> f64 {
        dv.norm()
    }
    fn tangent_scaled(dv: &TangentVector<2>, s: f64) -> TangentVector<2> {
        dv.scaled(s)
    }
    fn default_tangent() -> TangentVector<2> {
        TangentVector::first_axis()
    }
    fn random_tangent(rng: &mut ChaCha8Rng) -> TangentVector<2> {
        TangentVector::random_unit(rng)
    }
}

/// Initial tangent direction for [`kse_estimate`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TangentInit {
    /// Unit vector along the first phase-space coordinate.
    #[default]
    Fixed,
    /// Random unit vector drawn from a ChaCha8 stream with this seed.
    Seeded(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KseEstimate {
    /// Bits per kick.
    pub value: f64,
    pub steps: usize,
    /// Running average after each step, when requested.
    pub history: Option<Vec<f64>>,
}

/// Largest Lyapunov exponent in bits per kick from one renormalized tangent
/// vector: `(1/steps) sum log2(l_n)`.
pub fn kse_estimate<M: KickedMap>(
    map: &M,
    start: M::Point,
    steps: usize,
    init: TangentInit,
    record_history: bool,
) -> Result<KseEstimate> {
    let dv = match init {
        TangentInit::Fixed => M::default_tangent(),
        TangentInit::Seeded(seed) => M::random_tangent(&mut ChaCha8Rng::seed_from_u64(seed)),
    };
    kse_estimate_from(map, start, dv, steps, record_history)
}

/// [`kse_estimate`] with an explicit initial tangent vector.
pub fn kse_estimate_from<M: KickedMap>(
    map: &M,
    start: M::Point,
    tangent: M::Tangent,
    steps: usize,
    record_history: bool,
) -> Result<KseEstimate> {
    if steps == 0 {
        return Err(Error::invalid("steps", "need at least one step"));
    }
    let norm = M::tangent_norm(&tangent);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::invalid("tangent", "initial tangent must be finite and nonzero"));
    }
    let mut dv = M::tangent_scaled(&tangent, 1.0 / norm);
    let mut x = start;
    let mut sum = 0.0;
    let mut history = record_history.then(|| Vec::with_capacity(steps));
    for n in 1..=steps {
        let next = map.tangent_step(&x, &dv);
        let l = M::tangent_norm(&next);
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::Numeric { step: n });
        }
        dv = M::tangent_scaled(&next, 1.0 / l);
        x = map.step(&x);
        sum += l.log2();
        if let Some(h) = history.as_mut() {
            h.push(sum / n as f64);
        }
    }
    Ok(KseEstimate {
        value: sum / steps as f64,
        steps,
        history,
    })
}

/// `kicks + 1` points starting with `start`.
pub fn trajectory<M: KickedMap>(map: &M, start: M::Point, kicks: usize) -> Vec<M::Point> {
    let mut out = Vec::with_capacity(kicks + 1);
    let mut x = start;
    out.push(x);
    for _ in 0..kicks {
        x = map.step(&x);
        out.push(x);
    }
    out
}
