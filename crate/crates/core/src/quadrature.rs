//! Product Gauss–Legendre × uniform-azimuth rules on `S^2`.
//!
//! A rule with `n_t` Legendre nodes in `t = cos θ` and `n_phi` equispaced
//! azimuths integrates every polynomial in `(y1, y2, y3)` of total degree
//! `≤ min(2 n_t - 1, n_phi - 1)` exactly against the round area element.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, SpherePoint};
use crate::sections::gram_diagonal;

/// Largest change of the scaled Gram diagonal tolerated under refinement.
pub const REFINEMENT_TOL: f64 = 1e-9;

/// Oversampling applied to the polynomial degree when `psi != 0`.
pub const PERTURBED_OVERSAMPLING: u32 = 2;

const MAX_INFLATIONS: u32 = 3;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut out = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Outcome of the doubling check run by [`recommended_rule`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Refinement {
    pub inflations: u32,
    pub max_change: f64,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    n_t: usize,
    n_phi: usize,
    refinement: Option<Refinement>,
}

/// Serializable description of a rule, embedded in reports.
#[derive(Debug, Clone, Serialize)]
pub struct RuleInfo {
    pub n_t: usize,
    pub n_phi: usize,
    pub exact_poly_degree: usize,
    pub refinement: Option<Refinement>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn exact_poly_degree(&self) -> usize {
        (2 * self.n_t - 1).min(self.n_phi - 1)
    }

    pub fn refinement(&self) -> Option<Refinement> {
        self.refinement
    }

    pub fn info(&self) -> RuleInfo {
        RuleInfo {
            n_t: self.n_t,
            n_phi: self.n_phi,
            exact_poly_degree: self.exact_poly_degree(),
            refinement: self.refinement,
        }
    }

    /// The rule with both resolutions doubled.
    pub fn doubled(&self) -> QuadratureRule {
        product_rule(2 * self.n_t, 2 * self.n_phi)
    }

    /// Round-sphere quadrature `Σ w f(y)`, without a volume density.
    pub fn sum<F: Fn(&SpherePoint) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * f(y))
            .sum()
    }
}

pub fn product_rule(n_t: usize, n_phi: usize) -> QuadratureRule {
    assert!(
        n_t >= 1 && n_phi >= 1,
        "product rule needs positive resolutions"
    );
    let gl = gauss_legendre(n_t);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_t * n_phi);
    let mut weights = Vec::with_capacity(n_t * n_phi);
    for &(t, w) in &gl {
        for j in 0..n_phi {
            nodes.push(SpherePoint::from_height(t, dphi * j as f64));
            weights.push(w * dphi);
        }
    }
    QuadratureRule {
        nodes,
        weights,
        n_t,
        n_phi,
        refinement: None,
    }
}

/// Smallest product rule exact to total degree `degree`.
pub fn rule_for_degree(degree: usize) -> QuadratureRule {
    product_rule(degree / 2 + 1, degree + 1)
}

/// Values that can be integrated: real and complex scalars.
pub trait Integrand: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn finite(&self) -> bool;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

/// `∫_M f dV_M ≈ Σ w f(y) ρ(y)` with `ρ` the curvature density of `geom`.
pub fn integrate<T, F>(rule: &QuadratureRule, f: F, geom: &ModelGeometry) -> Result<T>
where
    T: Integrand,
    F: Fn(&SpherePoint) -> T,
{
    let mut acc = T::zero();
    for (node, (y, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(y);
        if !v.finite() {
            return Err(Error::NonFiniteIntegrand { node });
        }
        acc = acc + v * (w * geom.volume_density(y)?);
    }
    Ok(acc)
}

/// Rule for sections of `L^N` carrying `extra_degree` more polynomial degree.
///
/// Round geometries get the exact rule of degree `2kN + extra_degree`. For
/// `psi != 0` the degree (plus the density degree) is oversampled and the
/// result is accepted only once doubling both resolutions moves the scaled
/// Gram diagonal by at most [`REFINEMENT_TOL`].
pub fn recommended_rule(
    n_power: u32,
    geom: &ModelGeometry,
    extra_degree: usize,
) -> Result<QuadratureRule> {
    assert!(n_power >= 1, "tensor power must be positive");
    let base = 2 * (geom.k() * n_power) as usize + extra_degree;
    if geom.is_round() {
        return Ok(rule_for_degree(base));
    }
    let degree = PERTURBED_OVERSAMPLING as usize * (base + geom.psi().max_degree() as usize);
    let mut rule = rule_for_degree(degree);
    let mut last_change = f64::INFINITY;
    for inflations in 0..=MAX_INFLATIONS {
        let finer = rule.doubled();
        let coarse = gram_diagonal(geom, n_power, &rule)?;
        let fine = gram_diagonal(geom, n_power, &finer)?;
        let change = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max);
        if change <= REFINEMENT_TOL {
            rule.refinement = Some(Refinement {
                inflations,
                max_change: change,
            });
            return Ok(rule);
        }
        last_change = change;
        rule = finer;
    }
    Err(Error::QuadratureUnderresolved {
        change: last_change,
    })
}
