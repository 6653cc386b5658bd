//! Spherical harmonics and the spectrum of `P_N` on the round sphere.
//!
//! On the round sphere `P_N` has the zonal kernel
//! `(n+1)/(4π) · ((1 + y·y')/2)^n` with `n = kN`, so by Funk–Hecke it acts on
//! degree-`m` harmonics as multiplication by
//! `χ_{m,n} = Π_{i<m} (n - i)/(n + i + 2)`, which vanishes for `m > n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::approximation::{KernelIntegrator, ProbeGrid};
use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::kernels::KernelEvaluator;

/// Residual above which `P_N Y_{l,0} ≠ χ Y_{l,0}` is reported.
pub const EQUIVARIANCE_TOL: f64 = 1e-7;

/// `P_m(t)` by the three-term recurrence.
pub fn legendre(m: u32, t: f64) -> f64 {
    debug_assert!(m <= 200, "Legendre degree {m} out of range");
    if m == 0 {
        return 1.0;
    }
    let mut p_prev = 1.0;
    let mut p = t;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    p
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Real orthonormal spherical harmonic `Y_{l,mm}` (no Condon–Shortley phase).
///
/// `mm > 0` uses `cos(mm φ)`, `mm < 0` uses `sin(|mm| φ)`. Evaluated in
/// polynomial form so the poles need no special treatment.
pub fn real_spherical_harmonic(l: u32, mm: i32, y: &SpherePoint) -> f64 {
    let m = mm.unsigned_abs();
    assert!(m <= l, "order {mm} out of range for degree {l}");
    let t = y.y3;
    // d^m P_l / dt^m by the associated Legendre recurrence without the sin^m factor.
    let mut q_mm = 1.0;
    for i in 1..=m {
        q_mm *= (2 * i - 1) as f64;
    }
    let q = if l == m {
        q_mm
    } else {
        let mut q_prev = q_mm;
        let mut q_cur = t * (2 * m + 1) as f64 * q_mm;
        for ll in (m + 2)..=l {
            let next =
                ((2 * ll - 1) as f64 * t * q_cur - (ll + m - 1) as f64 * q_prev) / (ll - m) as f64;
            q_prev = q_cur;
            q_cur = next;
        }
        q_cur
    };
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - m) / factorial(l + m)).sqrt();
    if m == 0 {
        return norm * q;
    }
    let w = Complex64::new(y.y1, y.y2).powu(m);
    let angular = if mm > 0 { w.re } else { w.im };
    std::f64::consts::SQRT_2 * norm * q * angular
}

/// `Y_{l,0} = sqrt((2l+1)/4π) P_l(y3)`, for any degree.
pub fn zonal_harmonic(l: u32, y: &SpherePoint) -> f64 {
    ((2 * l + 1) as f64 / (4.0 * PI)).sqrt() * legendre(l, y.y3)
}

/// Eigenvalue of the zonal kernel of degree `n` on degree-`m` harmonics.
pub fn chi_closed_form(m: u32, n: u32) -> f64 {
    if m > n {
        return 0.0;
    }
    (0..m)
        .map(|i| f64::from(n - i) / f64::from(n + i + 2))
        .product()
}

/// `χ_{m,2N}` for `(P^1, O(2), 2ω_FS)`.
pub fn funk_hecke_chi(m: u32, n_power: u32) -> f64 {
    chi_closed_form(m, 2 * n_power)
}

/// `χ_{m,2N}` for `m = 0..=2N`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralTable {
    pub n_power: u32,
    pub entries: Vec<(u32, f64)>,
}

impl SpectralTable {
    pub fn new(n_power: u32) -> Self {
        let entries = (0..=2 * n_power)
            .map(|m| (m, funk_hecke_chi(m, n_power)))
            .collect();
        Self { n_power, entries }
    }

    pub fn chi(&self, m: u32) -> f64 {
        self.entries.get(m as usize).map_or(0.0, |e| e.1)
    }
}

/// Eigenvalue of `P_N` on `Y_{l,0}` measured through the kernel operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChiMeasurement {
    pub degree: u32,
    pub chi: f64,
    pub residual: f64,
}

/// Least-squares ratio of `P_N Y_{l,0}` to `Y_{l,0}` over `grid`.
///
/// The evaluator should be round and its rule exact to degree `kN + l`.
pub fn chi_via_operator(ev: &KernelEvaluator, l: u32, grid: &ProbeGrid) -> Result<ChiMeasurement> {
    let f = move |y: &SpherePoint| zonal_harmonic(l, y);
    let op = KernelIntegrator::new(ev, &f)?;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut pairs = Vec::with_capacity(grid.len());
    for y in grid.points() {
        let p = op.p_n(y)?;
        let z = f(y);
        num += p * z;
        den += z * z;
        pairs.push((p, z));
    }
    let chi = num / den;
    let residual = pairs
        .iter()
        .map(|(p, z)| (p - chi * z).abs())
        .fold(0.0, f64::max);
    if residual > EQUIVARIANCE_TOL {
        return Err(Error::EquivarianceViolation {
            degree: l,
            residual,
        });
    }
    Ok(ChiMeasurement {
        degree: l,
        chi,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre, product_rule};

    // Brute-force Funk–Hecke: 2π ∫ (n+1)/(4π) ((1+t)/2)^n P_m(t) dt.
    fn chi_oracle(m: u32, n: u32) -> f64 {
        gauss_legendre(((n + m) / 2 + 8) as usize)
            .iter()
            .map(|&(t, w)| {
                w * (n as f64 + 1.0) / 2.0 * ((1.0 + t) / 2.0).powi(n as i32) * legendre(m, t)
            })
            .sum()
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre(0, 0.3), 1.0);
        assert_eq!(legendre(1, 0.3), 0.3);
        assert!((legendre(2, 0.5) + 0.125).abs() < 1e-15);
        assert!((legendre(5, 1.0) - 1.0).abs() < 1e-15);
        assert!((legendre(200, 1.0) - 1.0).abs() < 1e-12);
        assert!((legendre(3, -0.4) - 0.5 * (5.0 * -0.064 - 3.0 * -0.4)).abs() < 1e-15);
    }

    #[test]
    fn harmonic_values() {
        let y = SpherePoint::from_angles(0.9, 2.1);
        assert!((real_spherical_harmonic(0, 0, &y) - 0.28209479177387814).abs() < 1e-15);
        let y10 = real_spherical_harmonic(1, 0, &y);
        assert!((y10 - (3.0 / (4.0 * PI)).sqrt() * y.y3).abs() < 1e-15);
        let y11 = real_spherical_harmonic(1, 1, &y);
        assert!((y11 - (3.0 / (4.0 * PI)).sqrt() * y.y1).abs() < 1e-15);
        let north = SpherePoint::north();
        assert!((real_spherical_harmonic(2, 0, &north) - (5.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        for l in 0..=8 {
            assert!((zonal_harmonic(l, &y) - real_spherical_harmonic(l, 0, &y)).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonics_are_orthonormal() {
        let rule = product_rule(10, 20);
        let mut idx = Vec::new();
        for l in 0..=8u32 {
            for m in -(l as i32)..=(l as i32) {
                idx.push((l, m));
            }
        }
        for (i, &(l, m)) in idx.iter().enumerate() {
            for &(lp, mp) in &idx[i..] {
                let v = rule
                    .sum(|y| real_spherical_harmonic(l, m, y) * real_spherical_harmonic(lp, mp, y));
                let expected = if (l, m) == (lp, mp) { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12, "({l},{m}) ({lp},{mp}): {v}");
            }
        }
    }

    #[test]
    fn closed_form_matches_funk_hecke_oracle() {
        for n in 1..=40u32 {
            for m in 0..=n + 2 {
                let oracle = chi_oracle(m, n);
                assert!(
                    (chi_closed_form(m, n) - oracle).abs() < 1e-10,
                    "m={m} n={n}"
                );
            }
        }
        assert!((funk_hecke_chi(1, 1) - 0.5).abs() < 1e-15);
        assert!((funk_hecke_chi(2, 1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn spectrum_structure() {
        for n_power in 1..=16u32 {
            let table = SpectralTable::new(n_power);
            assert_eq!(table.chi(0), 1.0);
            assert!(
                (1.0 - funk_hecke_chi(1, n_power) - 1.0 / (n_power as f64 + 1.0)).abs() < 1e-14
            );
            for m in 1..=2 * n_power {
                let c = table.chi(m);
                assert!(c > 0.0 && c < 1.0 - 1e-9, "non-projection at m={m}");
            }
            for m in 0..2 * n_power {
                let ratio = table.chi(m + 1) / table.chi(m);
                let expected = f64::from(2 * n_power - m) / f64::from(2 * n_power + m + 2);
                assert!((ratio - expected).abs() < 1e-12);
                assert!(ratio < 1.0);
            }
            assert_eq!(funk_hecke_chi(2 * n_power + 1, n_power), 0.0);
        }
    }

    #[test]
    fn chi_tends_to_one() {
        let gaps: Vec<f64> = [4, 16, 64, 256]
            .iter()
            .map(|&n| 1.0 - funk_hecke_chi(3, n))
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert!(gaps[3] < 0.025);
    }
}
