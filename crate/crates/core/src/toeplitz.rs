//! Toeplitz operators `T_{f,N} = Π_N f Π_N` restricted to `V_N`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::kernels::checked_density;
use crate::quadrature::integrate;
use crate::sections::{weighted_monomial_matrix, SectionBasis};

/// Highest total degree accepted in a [`TestFunction`].
pub const MAX_TEST_DEGREE: u32 = 8;

/// A real function on the sphere.
pub trait SphereFunction {
    fn eval(&self, y: &SpherePoint) -> f64;
}

impl<F: Fn(&SpherePoint) -> f64> SphereFunction for F {
    fn eval(&self, y: &SpherePoint) -> f64 {
        self(y)
    }
}

/// Real polynomial in `(y1, y2, y3)` of total degree at most 8.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestFunction {
    terms: BTreeMap<[u32; 3], f64>,
}

impl TestFunction {
    pub fn new<I: IntoIterator<Item = ([u32; 3], f64)>>(terms: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if !c.is_finite() {
                return Err(Error::InvalidTestFunction(format!(
                    "non-finite coefficient for {e:?}"
                )));
            }
            let deg = e[0] + e[1] + e[2];
            if deg > MAX_TEST_DEGREE {
                return Err(Error::InvalidTestFunction(format!(
                    "monomial of degree {deg} exceeds {MAX_TEST_DEGREE}"
                )));
            }
            *map.entry(e).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self { terms: map })
    }

    pub fn constant(c: f64) -> Self {
        Self::new([([0, 0, 0], c)]).expect("constant is a valid test function")
    }

    pub fn monomial(e1: u32, e2: u32, e3: u32) -> Result<Self> {
        Self::new([([e1, e2, e3], 1.0)])
    }

    pub fn y1() -> Self {
        Self::constant(0.0).plus_term([1, 0, 0], 1.0)
    }

    pub fn y2() -> Self {
        Self::constant(0.0).plus_term([0, 1, 0], 1.0)
    }

    pub fn y3() -> Self {
        Self::constant(0.0).plus_term([0, 0, 1], 1.0)
    }

    fn plus_term(mut self, e: [u32; 3], c: f64) -> Self {
        *self.terms.entry(e).or_insert(0.0) += c;
        self
    }

    /// Parses monomial keys such as `"1"`, `"y3"`, `"y1*y2"`, `"y3^2"`.
    pub fn from_monomial_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut terms = Vec::with_capacity(map.len());
        for (key, &c) in map {
            terms.push((parse_monomial(key)?, c));
        }
        Self::new(terms)
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e[0] + e[1] + e[2])
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ([u32; 3], f64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    /// `alpha · self + beta · other`.
    pub fn combine(&self, alpha: f64, other: &TestFunction, beta: f64) -> Result<Self> {
        Self::new(
            self.terms
                .iter()
                .map(|(e, c)| (*e, alpha * c))
                .chain(other.terms.iter().map(|(e, c)| (*e, beta * c))),
        )
    }

    pub fn value(&self, y: &SpherePoint) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * y.y1.powi(e[0] as i32) * y.y2.powi(e[1] as i32) * y.y3.powi(e[2] as i32)
            })
            .sum()
    }
}

impl SphereFunction for TestFunction {
    fn eval(&self, y: &SpherePoint) -> f64 {
        self.value(y)
    }
}

fn parse_monomial(key: &str) -> Result<[u32; 3]> {
    let bad = || Error::InvalidTestFunction(format!("cannot parse monomial {key:?}"));
    let key = key.trim();
    let mut e = [0u32; 3];
    if key == "1" {
        return Ok(e);
    }
    for factor in key.split('*') {
        let factor = factor.trim();
        let (var, pow) = match factor.split_once('^') {
            Some((v, p)) => (v.trim(), p.trim().parse::<u32>().map_err(|_| bad())?),
            None => (factor, 1),
        };
        let slot = match var {
            "y1" => 0,
            "y2" => 1,
            "y3" => 2,
            _ => return Err(bad()),
        };
        e[slot] += pow;
    }
    Ok(e)
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*y{}", i + 1)?,
                    _ => write!(f, "*y{}^{p}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// Matrix of `T_{f,N}` in an orthonormal basis, `(j, k) = <f s_k, s_j>_{L^2}`.
#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    mat: DMatrix<Complex64>,
    n_power: u32,
}

/// Assembles `T_{f,N} = C^H F C` from the monomial moments `F_ab = ∫ f conj(m_a) m_b`.
pub fn toeplitz_matrix<F: SphereFunction + ?Sized>(
    basis: &SectionBasis,
    f: &F,
) -> Result<ToeplitzMatrix> {
    let moments = weighted_monomial_matrix(basis.geometry(), basis.n_power(), basis.rule(), |y| {
        f.eval(y)
    })?;
    let c = basis.coeff();
    let mat = c.adjoint() * moments * c;
    Ok(ToeplitzMatrix {
        mat,
        n_power: basis.n_power(),
    })
}

impl ToeplitzMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn n_power(&self) -> u32 {
        self.n_power
    }

    /// `d_N + 1`.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.complex_trace().re
    }

    pub fn complex_trace(&self) -> Complex64 {
        self.mat.diagonal().iter().sum()
    }

    /// `max |T - T^H|`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `T^0 = T - tr T/(d_N + 1) · Id`.
    pub fn traceless(&self) -> ToeplitzMatrix {
        let shift = self.trace() / self.dim() as f64;
        let mut mat = self.mat.clone();
        for i in 0..self.dim() {
            mat[(i, i)] -= shift;
        }
        ToeplitzMatrix {
            mat,
            n_power: self.n_power,
        }
    }

    /// `<T c, c> / |c|^2`.
    pub fn expectation(&self, c: &[Complex64]) -> Result<f64> {
        let norm2: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        checked_density(norm2)?;
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            let tc: Complex64 = c
                .iter()
                .enumerate()
                .map(|(k, ck)| self.mat[(j, k)] * ck)
                .sum();
            acc += tc * c[j].conj();
        }
        Ok(acc.re / norm2)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub fn trace(t: &ToeplitzMatrix) -> f64 {
    t.trace()
}

pub fn traceless(t: &ToeplitzMatrix) -> ToeplitzMatrix {
    t.traceless()
}

/// `|tr T_{f,N} - ∫ E_N f dV_M|`.
pub fn trace_identity_residual<F: SphereFunction + ?Sized>(
    t: &ToeplitzMatrix,
    basis: &SectionBasis,
    f: &F,
) -> Result<f64> {
    let integral: f64 = integrate(
        basis.rule(),
        |y| basis.density(y) * f.eval(y),
        basis.geometry(),
    )?;
    Ok((t.trace() - integral).abs())
}

/// `(Φ_N(φ_N(z)), i T^0) = <T e_x, e_x>/|e_x|^2 - tr T/(d_N + 1)`.
pub fn moment_map_value(basis: &SectionBasis, t: &ToeplitzMatrix, y: &SpherePoint) -> Result<f64> {
    let c: Vec<Complex64> = basis
        .eval(&y.to_homogeneous())
        .into_iter()
        .map(|s| s.conj())
        .collect();
    Ok(t.expectation(&c)? - t.trace() / t.dim() as f64)
}
