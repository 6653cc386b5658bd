//! Szegő kernel mode `Π_N`, Bergman density `E_N`, `K_N = |Π_N|^2`, and
//! coherent states, all expressed through an orthonormal section basis.
//!
//! Integrals over the circle bundle `X` are never formed: every quantity
//! used here is circle-invariant or phase-covariant and reduces to an
//! integral over `M` against `dV_M`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{HomogeneousRep, SpherePoint};
use crate::sections::SectionBasis;

/// `E_N` values at or below this are treated as a broken basis.
pub const MIN_BERGMAN_DENSITY: f64 = 1e-14;

/// Section values `ŝ_j` at every quadrature node, with `w · ρ` weights.
#[derive(Debug)]
pub struct NodeTable {
    dim: usize,
    sections: Vec<Complex64>,
    weights: Vec<f64>,
}

impl NodeTable {
    fn build(basis: &SectionBasis) -> Self {
        let rule = basis.rule();
        let geom = basis.geometry();
        let dim = basis.dim();
        let mut sections = Vec::with_capacity(rule.len() * dim);
        let mut weights = Vec::with_capacity(rule.len());
        for (y, w) in rule.nodes().iter().zip(rule.weights()) {
            sections.extend(basis.eval(&y.to_homogeneous()));
            weights.push(w * geom.density(y));
        }
        Self {
            dim,
            sections,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `ŝ_j` at node `i`.
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.sections[i * self.dim..(i + 1) * self.dim]
    }

    /// Quadrature weight times curvature density at node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Kernel-level view of an orthonormal basis.
#[derive(Debug)]
pub struct KernelEvaluator {
    basis: SectionBasis,
    table: OnceLock<NodeTable>,
}

impl KernelEvaluator {
    pub fn new(basis: SectionBasis) -> Self {
        Self {
            basis,
            table: OnceLock::new(),
        }
    }

    pub fn basis(&self) -> &SectionBasis {
        &self.basis
    }

    /// Node table, built on first use.
    pub fn node_table(&self) -> &NodeTable {
        self.table.get_or_init(|| NodeTable::build(&self.basis))
    }

    /// `Π_N(x, x') = Σ_j ŝ_j(x) conj(ŝ_j(x'))`.
    pub fn bergman_b(&self, x: &HomogeneousRep, xp: &HomogeneousRep) -> Complex64 {
        let a = self.basis.eval(x);
        let b = self.basis.eval(xp);
        a.iter().zip(&b).map(|(u, v)| u * v.conj()).sum()
    }

    /// `E_N(z) = Π_N(x, x)`.
    pub fn density_e(&self, y: &SpherePoint) -> Result<f64> {
        checked_density(self.basis.density(y))
    }

    /// `K_N(z, z') = |Π_N(x, x')|^2`.
    pub fn kernel_k(&self, y: &SpherePoint, yp: &SpherePoint) -> f64 {
        self.bergman_b(&y.to_homogeneous(), &yp.to_homogeneous())
            .norm_sqr()
    }

    /// Coefficients of `e_{x,N}` in the orthonormal basis: `conj(ŝ_j(x))`.
    pub fn coherent_state(&self, x: &HomogeneousRep) -> Vec<Complex64> {
        self.basis.eval(x).into_iter().map(|s| s.conj()).collect()
    }

    /// `Σ_i v_i |Π_N(x_i, x)|^2` over the quadrature nodes, where `v_i` already
    /// carries the quadrature weight; `sections` are the values `ŝ_j(x)`.
    pub fn kernel_sum(&self, sections: &[Complex64], weighted_values: &[f64]) -> f64 {
        let table = self.node_table();
        debug_assert_eq!(weighted_values.len(), table.len());
        let conj: Vec<Complex64> = sections.iter().map(|s| s.conj()).collect();
        let mut acc = 0.0;
        for (i, &v) in weighted_values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let b: Complex64 = table.row(i).iter().zip(&conj).map(|(s, c)| s * c).sum();
            acc += v * b.norm_sqr();
        }
        acc
    }

    /// `∫_M K_N(z, ·) dV_M`, which should reproduce `E_N(z)`.
    pub fn kernel_marginal(&self, y: &SpherePoint) -> f64 {
        let table = self.node_table();
        let w: Vec<f64> = (0..table.len()).map(|i| table.weight(i)).collect();
        self.kernel_sum(&self.basis.eval(&y.to_homogeneous()), &w)
    }

    /// `sup |E_N · (2π/N) - 1|` over `points`.
    pub fn zelditch_deviation<'a, I>(&self, points: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'a SpherePoint>,
    {
        let scale = 2.0 * std::f64::consts::PI / self.basis.n_power() as f64;
        let mut worst = 0.0f64;
        for y in points {
            worst = worst.max((self.density_e(y)? * scale - 1.0).abs());
        }
        Ok(worst)
    }
}

pub(crate) fn checked_density(value: f64) -> Result<f64> {
    if value.is_nan() || value <= MIN_BERGMAN_DENSITY {
        return Err(Error::NonPositiveDensity { value });
    }
    Ok(value)
}

pub fn bergman_b(ev: &KernelEvaluator, x: &HomogeneousRep, xp: &HomogeneousRep) -> Complex64 {
    ev.bergman_b(x, xp)
}

pub fn density_e(ev: &KernelEvaluator, y: &SpherePoint) -> Result<f64> {
    ev.density_e(y)
}

pub fn kernel_k(ev: &KernelEvaluator, y: &SpherePoint, yp: &SpherePoint) -> f64 {
    ev.kernel_k(y, yp)
}

pub fn coherent_state(ev: &KernelEvaluator, x: &HomogeneousRep) -> Vec<Complex64> {
    ev.coherent_state(x)
}
