//! Holomorphic sections of `L^N = O(kN)` and their `L^2` geometry.
//!
//! Sections are degree-`n` homogeneous polynomials, `n = kN`, expanded in
//! the monomials `z0^(n-a) z1^a`. At unit representatives `|z|^(2n) = 1`, so
//! the pointwise norm is `|s(z)|^2 e^{-N psi}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{HomogeneousRep, ModelGeometry, SpherePoint};
use crate::quadrature::QuadratureRule;

/// The monomial basis of `H^0(P^1, O(n))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonomialBasis {
    n: u32,
}

impl MonomialBasis {
    pub fn new(n: u32) -> Self {
        Self { n }
    }

    pub fn for_power(geom: &ModelGeometry, n_power: u32) -> Self {
        Self {
            n: geom.k() * n_power,
        }
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// `d_N + 1`.
    pub fn dim(&self) -> usize {
        self.n as usize + 1
    }

    pub fn exponents(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..=self.n).map(move |a| (a, self.n - a))
    }

    /// `z0^(n-a) z1^a` for `a = 0..=n`.
    pub fn eval(&self, x: &HomogeneousRep) -> Vec<Complex64> {
        let n = self.n as usize;
        let mut p0 = vec![Complex64::new(1.0, 0.0); n + 1];
        let mut p1 = vec![Complex64::new(1.0, 0.0); n + 1];
        for i in 1..=n {
            p0[i] = p0[i - 1] * x.z0;
            p1[i] = p1[i - 1] * x.z1;
        }
        (0..=n).map(|a| p0[n - a] * p1[a]).collect()
    }
}

/// `|z0^(n-a) z1^a|^2` at the chart representative of `y`.
fn monomial_norms(n: usize, y: &SpherePoint, out: &mut [f64]) {
    let u = 0.5 * (1.0 - y.y3);
    let v = 0.5 * (1.0 + y.y3);
    let mut pu = 1.0;
    for slot in out.iter_mut() {
        *slot = pu;
        pu *= u;
    }
    let mut pv = 1.0;
    for a in (0..=n).rev() {
        out[a] *= pv;
        pv *= v;
    }
}

/// Diagonal of the Gram matrix, `∫ |z0^(n-a) z1^a|^2 e^{-N psi} dV_M`.
pub fn gram_diagonal(
    geom: &ModelGeometry,
    n_power: u32,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let n = (geom.k() * n_power) as usize;
    let mut diag = vec![0.0; n + 1];
    let mut norms = vec![0.0; n + 1];
    for (y, w) in rule.nodes().iter().zip(rule.weights()) {
        let weight = w * geom.volume_density(y)? * geom.fibre_weight(n_power, y);
        monomial_norms(n, y, &mut norms);
        for (d, m) in diag.iter_mut().zip(&norms) {
            *d += weight * m;
        }
    }
    Ok(diag)
}

/// Gram matrix `G_ab = ∫ conj(m_a) m_b e^{-N psi} dV_M` of the monomials.
///
/// The first index carries the conjugate so that `C^H G C = I` for the
/// coefficient matrix of an orthonormal basis.
pub fn gram_matrix(
    geom: &ModelGeometry,
    n_power: u32,
    rule: &QuadratureRule,
) -> Result<DMatrix<Complex64>> {
    weighted_monomial_matrix(geom, n_power, rule, |_| 1.0)
}

/// `∫ f conj(m_a) m_b e^{-N psi} dV_M`, Hermitian by construction.
pub(crate) fn weighted_monomial_matrix<F: Fn(&SpherePoint) -> f64>(
    geom: &ModelGeometry,
    n_power: u32,
    rule: &QuadratureRule,
    f: F,
) -> Result<DMatrix<Complex64>> {
    let basis = MonomialBasis::for_power(geom, n_power);
    let d = basis.dim();
    let mut upper = vec![Complex64::new(0.0, 0.0); d * d];
    for (node, (y, w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        let fy = f(y);
        if !fy.is_finite() {
            return Err(Error::NonFiniteIntegrand { node });
        }
        let weight = w * geom.volume_density(y)? * geom.fibre_weight(n_power, y) * fy;
        if weight == 0.0 {
            continue;
        }
        let m = basis.eval(&y.to_homogeneous());
        for a in 0..d {
            let ca = m[a].conj() * weight;
            let row = &mut upper[a * d..(a + 1) * d];
            for b in a..d {
                row[b] += ca * m[b];
            }
        }
    }
    Ok(DMatrix::from_fn(d, d, |a, b| {
        if a == b {
            Complex64::new(upper[a * d + a].re, 0.0)
        } else if a < b {
            upper[a * d + b]
        } else {
            upper[b * d + a].conj()
        }
    }))
}

/// Round-sphere norms `2πk a!(n-a)!/(n+1)!`, `n = kN`.
pub fn closed_form_norms(k: u32, n_power: u32) -> Vec<f64> {
    let n = k * n_power;
    let mut binom = 1.0f64;
    (0..=n)
        .map(|a| {
            let v = 2.0 * PI * k as f64 / ((n as f64 + 1.0) * binom);
            binom = binom * f64::from(n - a) / f64::from(a + 1);
            v
        })
        .collect()
}

/// An `L^2`-orthonormal basis `s_j = Σ_a C_aj z0^(n-a) z1^a` of `V_N`.
#[derive(Debug, Clone)]
pub struct SectionBasis {
    geom: ModelGeometry,
    n_power: u32,
    monomials: MonomialBasis,
    gram: DMatrix<Complex64>,
    coeff: DMatrix<Complex64>,
    rule: QuadratureRule,
}

/// Orthonormalizes the monomials through the Cholesky factor of their Gram matrix.
pub fn orthonormal_basis(
    geom: &ModelGeometry,
    n_power: u32,
    rule: QuadratureRule,
) -> Result<SectionBasis> {
    assert!(n_power >= 1, "tensor power must be positive");
    let gram = gram_matrix(geom, n_power, &rule)?;
    let d = gram.nrows();
    let chol = gram
        .clone()
        .cholesky()
        .ok_or(Error::GramNotPositiveDefinite { n_power })?;
    // C = L^{-H}, upper triangular.
    let coeff = chol
        .l()
        .adjoint()
        .solve_upper_triangular(&DMatrix::identity(d, d))
        .ok_or(Error::GramNotPositiveDefinite { n_power })?;
    if coeff.iter().any(|c| !c.is_finite()) {
        return Err(Error::GramNotPositiveDefinite { n_power });
    }
    Ok(SectionBasis {
        geom: geom.clone(),
        n_power,
        monomials: MonomialBasis::for_power(geom, n_power),
        gram,
        coeff,
        rule,
    })
}

impl SectionBasis {
    pub fn geometry(&self) -> &ModelGeometry {
        &self.geom
    }

    pub fn n_power(&self) -> u32 {
        self.n_power
    }

    pub fn monomials(&self) -> MonomialBasis {
        self.monomials
    }

    /// `d_N + 1`.
    pub fn dim(&self) -> usize {
        self.monomials.dim()
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    pub fn coeff(&self) -> &DMatrix<Complex64> {
        &self.coeff
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `max |C^H G C - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let prod = self.coeff.adjoint() * &self.gram * &self.coeff;
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Condition number of the Gram matrix after scaling to unit diagonal.
    pub fn scaled_condition_number(&self) -> f64 {
        let d = self.dim();
        let s: Vec<f64> = (0..d)
            .map(|a| self.gram[(a, a)].re.sqrt().recip())
            .collect();
        let scaled = DMatrix::from_fn(d, d, |a, b| self.gram[(a, b)] * (s[a] * s[b]));
        let eig = scaled.symmetric_eigenvalues();
        let max = eig.iter().cloned().fold(f64::MIN, f64::max);
        let min = eig.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    /// `ŝ_j(x) = s_j(z) e^{-N psi/2}` for every basis section.
    pub fn eval(&self, x: &HomogeneousRep) -> Vec<Complex64> {
        let m = self.monomials.eval(x);
        let scale = self.geom.fibre_weight(self.n_power, &x.to_sphere()).sqrt();
        let d = self.dim();
        (0..d)
            .map(|j| {
                let col = self.coeff.column(j);
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..=j {
                    acc += col[a] * m[a];
                }
                acc * scale
            })
            .collect()
    }

    /// `Σ_j |s_j(z)|_h^2`.
    pub fn density(&self, y: &SpherePoint) -> f64 {
        self.eval(&y.to_homogeneous())
            .iter()
            .map(|s| s.norm_sqr())
            .sum()
    }
}

pub fn eval_sections(basis: &SectionBasis, x: &HomogeneousRep) -> Vec<Complex64> {
    basis.eval(x)
}
