//! The polarized Riemann sphere `(P^1, O(k), h)`.
//!
//! Points live on the unit sphere `S^2 ⊂ R^3`; the circle bundle is modelled
//! by unit vectors of `C^2` through the Hopf map
//! `y3 = |z0|^2 - |z1|^2`, `y1 + i y2 = 2 conj(z0) z1`.
//!
//! The Hermitian metric is `h = h_FS^k · exp(-psi)` with `psi` a band-limited
//! real spherical-harmonic expansion, so that
//! `omega = k omega_FS + i∂∂̄psi = (k/2 + Δpsi/2) dA`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureRule};
use crate::spectral::real_spherical_harmonic;

const SPHERE_TOL: f64 = 1e-12;

/// Highest spherical-harmonic degree accepted in a perturbation.
pub const MAX_PERTURBATION_DEGREE: u32 = 4;

/// Threshold below which the curvature density counts as non-positive.
pub const MIN_DENSITY: f64 = 1e-9;

/// A point of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

impl SpherePoint {
    /// Checked constructor; the norm must be 1 to within `1e-12`.
    pub fn new(y1: f64, y2: f64, y3: f64) -> Result<Self> {
        let norm2 = y1 * y1 + y2 * y2 + y3 * y3;
        if !norm2.is_finite() || (norm2 - 1.0).abs() > SPHERE_TOL {
            return Err(Error::NotOnSphere(y1, y2, y3));
        }
        Ok(Self { y1, y2, y3 })
    }

    /// Radial projection of a nonzero vector.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::NotOnSphere(v[0], v[1], v[2]));
        }
        Ok(Self {
            y1: v[0] / r,
            y2: v[1] / r,
            y3: v[2] / r,
        })
    }

    /// Point with `y3 = t` and azimuth `phi`.
    pub fn from_height(t: f64, phi: f64) -> Self {
        let t = t.clamp(-1.0, 1.0);
        let r = (1.0 - t * t).sqrt();
        Self {
            y1: r * phi.cos(),
            y2: r * phi.sin(),
            y3: t,
        }
    }

    /// Point at polar angle `theta` from the north pole and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        Self {
            y1: s * phi.cos(),
            y2: s * phi.sin(),
            y3: theta.cos(),
        }
    }

    pub fn north() -> Self {
        Self {
            y1: 0.0,
            y2: 0.0,
            y3: 1.0,
        }
    }

    pub fn south() -> Self {
        Self {
            y1: 0.0,
            y2: 0.0,
            y3: -1.0,
        }
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.y1 * other.y1 + self.y2 * other.y2 + self.y3 * other.y3
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.y1, self.y2, self.y3]
    }

    pub fn antipode(&self) -> Self {
        Self {
            y1: -self.y1,
            y2: -self.y2,
            y3: -self.y3,
        }
    }

    /// The unit representative in `C^2` fixed by the Hopf chart.
    pub fn to_homogeneous(&self) -> HomogeneousRep {
        sphere_to_homogeneous(self)
    }
}

/// A point of the circle bundle `S^3 ⊂ C^2` over `[z0 : z1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousRep {
    pub z0: Complex64,
    pub z1: Complex64,
}

impl HomogeneousRep {
    /// Checked constructor; `|z0|^2 + |z1|^2` must be 1 to within `1e-12`.
    pub fn new(z0: Complex64, z1: Complex64) -> Result<Self> {
        let norm2 = z0.norm_sqr() + z1.norm_sqr();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > SPHERE_TOL {
            return Err(Error::InvalidGeometry(format!(
                "representative has squared norm {norm2}, expected 1"
            )));
        }
        Ok(Self { z0, z1 })
    }

    /// Hermitian product `z0 conj(z0') + z1 conj(z1')`.
    pub fn inner(&self, other: &HomogeneousRep) -> Complex64 {
        self.z0 * other.z0.conj() + self.z1 * other.z1.conj()
    }

    /// The same fibre point rotated by `e^{i theta}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        let u = Complex64::from_polar(1.0, theta);
        Self {
            z0: self.z0 * u,
            z1: self.z1 * u,
        }
    }

    /// Hopf projection to `S^2`.
    pub fn to_sphere(&self) -> SpherePoint {
        let w = 2.0 * self.z0.conj() * self.z1;
        SpherePoint {
            y1: w.re,
            y2: w.im,
            y3: self.z0.norm_sqr() - self.z1.norm_sqr(),
        }
    }
}

/// Chart `z = (cos(θ/2), sin(θ/2) e^{iφ})`, with `φ = 0` at the poles.
pub fn sphere_to_homogeneous(y: &SpherePoint) -> HomogeneousRep {
    let w = Complex64::new(y.y1, y.y2);
    if y.y3 >= 0.0 {
        let z0 = ((1.0 + y.y3) / 2.0).sqrt();
        HomogeneousRep {
            z0: Complex64::new(z0, 0.0),
            z1: w / (2.0 * z0),
        }
    } else {
        let s = ((1.0 - y.y3) / 2.0).sqrt();
        let r = w.norm();
        let phase = if r > 0.0 {
            w / r
        } else {
            Complex64::new(1.0, 0.0)
        };
        HomogeneousRep {
            z0: Complex64::new(r / (2.0 * s), 0.0),
            z1: phase * s,
        }
    }
}

/// One term `c · Y_{l,m}` of the Kähler potential perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub l: u32,
    pub m: i32,
    pub c: f64,
}

/// Band-limited Kähler potential `psi = Σ c Y_{l,m}`; empty means round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perturbation {
    terms: Vec<HarmonicTerm>,
}

impl Perturbation {
    pub fn round() -> Self {
        Self::default()
    }

    pub fn new(terms: Vec<HarmonicTerm>) -> Result<Self> {
        for t in &terms {
            if t.l == 0 {
                return Err(Error::InvalidGeometry(
                    "perturbation terms must have degree l >= 1".into(),
                ));
            }
            if t.l > MAX_PERTURBATION_DEGREE {
                return Err(Error::InvalidGeometry(format!(
                    "perturbation degree {} exceeds {MAX_PERTURBATION_DEGREE}",
                    t.l
                )));
            }
            if t.m.unsigned_abs() > t.l {
                return Err(Error::InvalidGeometry(format!(
                    "order m = {} out of range for l = {}",
                    t.m, t.l
                )));
            }
            if !t.c.is_finite() {
                return Err(Error::InvalidGeometry(
                    "non-finite perturbation coefficient".into(),
                ));
            }
        }
        Ok(Self { terms })
    }

    /// Shorthand for a single term `c · Y_{l,m}`.
    pub fn single(l: u32, m: i32, c: f64) -> Result<Self> {
        Self::new(vec![HarmonicTerm { l, m, c }])
    }

    pub fn terms(&self) -> &[HarmonicTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.c == 0.0)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.l).max().unwrap_or(0)
    }

    pub fn value(&self, y: &SpherePoint) -> f64 {
        self.terms
            .iter()
            .map(|t| t.c * real_spherical_harmonic(t.l, t.m, y))
            .sum()
    }

    /// Round-sphere Laplacian, exact: `Σ -l(l+1) c Y_{l,m}`.
    pub fn laplacian(&self, y: &SpherePoint) -> f64 {
        self.terms
            .iter()
            .map(|t| -((t.l * (t.l + 1)) as f64) * t.c * real_spherical_harmonic(t.l, t.m, y))
            .sum()
    }
}

/// `(P^1, O(k), h_FS^k e^{-psi})` with `dV_M = omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGeometry {
    k: u32,
    psi: Perturbation,
}

/// Builds the geometry and checks the curvature on a 64×64 latitude-longitude grid.
pub fn make_geometry(k: u32, psi: Perturbation) -> Result<ModelGeometry> {
    if k == 0 {
        return Err(Error::InvalidGeometry(
            "bundle degree k must be at least 1".into(),
        ));
    }
    let geom = ModelGeometry { k, psi };
    const N_LAT: usize = 64;
    const N_LON: usize = 64;
    for i in 0..N_LAT {
        let theta = PI * i as f64 / (N_LAT - 1) as f64;
        for j in 0..N_LON {
            let phi = 2.0 * PI * j as f64 / N_LON as f64;
            geom.volume_density(&SpherePoint::from_angles(theta, phi))?;
        }
    }
    Ok(geom)
}

impl ModelGeometry {
    pub fn round(k: u32) -> Result<Self> {
        make_geometry(k, Perturbation::round())
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn psi(&self) -> &Perturbation {
        &self.psi
    }

    pub fn is_round(&self) -> bool {
        self.psi.is_zero()
    }

    /// Complex dimension of `M`.
    pub fn dim(&self) -> u32 {
        1
    }

    /// `Vol(M) = 2πk`, exact.
    pub fn volume(&self) -> f64 {
        2.0 * PI * self.k as f64
    }

    /// Density of `omega` against the round area element, without the positivity check.
    pub fn density(&self, y: &SpherePoint) -> f64 {
        0.5 * self.k as f64 + 0.5 * self.psi.laplacian(y)
    }

    pub fn volume_density(&self, y: &SpherePoint) -> Result<f64> {
        let d = self.density(y);
        if d.is_nan() || d <= MIN_DENSITY {
            return Err(Error::NonPositiveCurvature {
                density: d,
                at: y.to_array(),
            });
        }
        Ok(d)
    }

    /// `e^{-N psi(y)}`, the fibre weight of `h^N` at unit representatives.
    pub fn fibre_weight(&self, n_power: u32, y: &SpherePoint) -> f64 {
        if self.psi.terms.is_empty() {
            1.0
        } else {
            (-(n_power as f64) * self.psi.value(y)).exp()
        }
    }
}

pub fn volume_density(geom: &ModelGeometry, y: &SpherePoint) -> Result<f64> {
    geom.volume_density(y)
}

/// `∫_M dV_M` by quadrature.
pub fn total_volume(geom: &ModelGeometry, rule: &QuadratureRule) -> Result<f64> {
    integrate(rule, |_| 1.0, geom)
}
