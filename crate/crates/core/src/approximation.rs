//! The approximation operators `P_N`, `Q_N`, `P^0_N` and `t_N`, error
//! measurement on probe grids, and log-log rate fits.
//!
//! Two evaluation routes exist. The kernel route integrates
//! `K_N(z, ·) f` against `dV_M` with the basis quadrature rule, at
//! `O(nodes · d_N)` per target point. The Toeplitz route evaluates the
//! coherent-state expectation `<T e_x, e_x>/|e_x|^2` of a pre-assembled
//! matrix at `O(d_N^2)` per point and is used for grid sweeps.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, SpherePoint};
use crate::kernels::{checked_density, KernelEvaluator};
use crate::quadrature::{integrate, recommended_rule, QuadratureRule, RuleInfo};
use crate::sections::orthonormal_basis;
use crate::toeplitz::{toeplitz_matrix, SphereFunction, TestFunction, ToeplitzMatrix};

/// `f` sampled at the quadrature nodes, premultiplied by `w · ρ`.
pub struct KernelIntegrator<'a> {
    ev: &'a KernelEvaluator,
    weighted: Vec<f64>,
}

impl<'a> KernelIntegrator<'a> {
    pub fn new<F: SphereFunction + ?Sized>(ev: &'a KernelEvaluator, f: &F) -> Result<Self> {
        let table = ev.node_table();
        let nodes = ev.basis().rule().nodes();
        let mut weighted = Vec::with_capacity(nodes.len());
        for (i, y) in nodes.iter().enumerate() {
            let v = f.eval(y);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { node: i });
            }
            weighted.push(table.weight(i) * v);
        }
        Ok(Self { ev, weighted })
    }

    /// `t_N(z) = ∫ K_N(z, z') f(z') dV_M(z')` together with `E_N(z)`.
    fn t_and_e(&self, y: &SpherePoint) -> Result<(f64, f64)> {
        let s = self.ev.basis().eval(&y.to_homogeneous());
        let e = checked_density(s.iter().map(|v| v.norm_sqr()).sum())?;
        Ok((self.ev.kernel_sum(&s, &self.weighted), e))
    }

    pub fn t_n(&self, y: &SpherePoint) -> Result<f64> {
        Ok(self.t_and_e(y)?.0)
    }

    pub fn p_n(&self, y: &SpherePoint) -> Result<f64> {
        let (t, e) = self.t_and_e(y)?;
        Ok(t / e)
    }

    /// `Vol(M)/(d_N + 1) · t_N(z)`.
    pub fn q_n(&self, y: &SpherePoint) -> Result<f64> {
        let basis = self.ev.basis();
        Ok(basis.geometry().volume() / basis.dim() as f64 * self.t_n(y)?)
    }

    /// `P_N f(z) - tr T_{f,N}/(d_N + 1)`.
    pub fn p0_n(&self, t: &ToeplitzMatrix, y: &SpherePoint) -> Result<f64> {
        Ok(self.p_n(y)? - t.trace() / t.dim() as f64)
    }
}

pub fn apply_pn<F: SphereFunction + ?Sized>(
    ev: &KernelEvaluator,
    f: &F,
    y: &SpherePoint,
) -> Result<f64> {
    KernelIntegrator::new(ev, f)?.p_n(y)
}

pub fn apply_tn<F: SphereFunction + ?Sized>(
    ev: &KernelEvaluator,
    f: &F,
    y: &SpherePoint,
) -> Result<f64> {
    KernelIntegrator::new(ev, f)?.t_n(y)
}

pub fn apply_qn<F: SphereFunction + ?Sized>(
    ev: &KernelEvaluator,
    f: &F,
    y: &SpherePoint,
) -> Result<f64> {
    KernelIntegrator::new(ev, f)?.q_n(y)
}

/// Kernel route for `P^0_N f`; `t` supplies the trace.
pub fn apply_p0n<F: SphereFunction + ?Sized>(
    ev: &KernelEvaluator,
    f: &F,
    t: &ToeplitzMatrix,
    y: &SpherePoint,
) -> Result<f64> {
    KernelIntegrator::new(ev, f)?.p0_n(t, y)
}

/// `|tr T/(d_N + 1) - (1/Vol) ∫ f dV_M|`.
pub fn trace_mean_deviation<F: SphereFunction + ?Sized>(
    t: &ToeplitzMatrix,
    geom: &ModelGeometry,
    rule: &QuadratureRule,
    f: &F,
) -> Result<f64> {
    let mean = integrate(rule, |y| f.eval(y), geom)? / geom.volume();
    Ok((t.trace() / t.dim() as f64 - mean).abs())
}

/// Latitude-longitude probe grid, both poles included.
#[derive(Debug, Clone)]
pub struct ProbeGrid {
    n_lat: usize,
    n_lon: usize,
    points: Vec<SpherePoint>,
}

impl ProbeGrid {
    /// `n_lat` polar angles `πi/(n_lat - 1)` by `n_lon` azimuths `2πj/n_lon`.
    pub fn lat_lon(n_lat: usize, n_lon: usize) -> Self {
        assert!(
            n_lat >= 2 && n_lon >= 1,
            "probe grid needs both poles and one meridian"
        );
        let mut points = Vec::with_capacity(n_lat * n_lon);
        for i in 0..n_lat {
            let theta = PI * i as f64 / (n_lat - 1) as f64;
            for j in 0..n_lon {
                points.push(SpherePoint::from_angles(
                    theta,
                    2.0 * PI * j as f64 / n_lon as f64,
                ));
            }
        }
        Self {
            n_lat,
            n_lon,
            points,
        }
    }

    /// Nested refinement with half the spacing in both angles.
    pub fn refined(&self) -> Self {
        Self::lat_lon(2 * self.n_lat - 1, 2 * self.n_lon)
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_lat, self.n_lon)
    }
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self::lat_lon(64, 128)
    }
}

impl FromStr for ProbeGrid {
    type Err = String;

    /// Parses `"<n_lat>x<n_lon>"`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("grid {s:?} is not of the form <lat>x<lon>"))?;
        let n_lat: usize = a
            .trim()
            .parse()
            .map_err(|_| format!("bad latitude count in {s:?}"))?;
        let n_lon: usize = b
            .trim()
            .parse()
            .map_err(|_| format!("bad longitude count in {s:?}"))?;
        if n_lat < 2 || n_lon < 1 {
            return Err(format!(
                "grid {s:?} needs at least 2 latitudes and 1 longitude"
            ));
        }
        Ok(Self::lat_lon(n_lat, n_lon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStats {
    pub sup: f64,
    pub mean_abs: f64,
}

fn stats<I: Iterator<Item = Result<f64>>>(errors: I) -> Result<ErrorStats> {
    let (mut sup, mut sum, mut count) = (0.0f64, 0.0, 0usize);
    for e in errors {
        let e = e?;
        sup = sup.max(e);
        sum += e;
        count += 1;
    }
    Ok(ErrorStats {
        sup,
        mean_abs: if count == 0 { 0.0 } else { sum / count as f64 },
    })
}

/// `sup |P_N f - f|` over the grid, by the Toeplitz route.
pub fn sup_error<F: SphereFunction + ?Sized>(
    ev: &KernelEvaluator,
    f: &F,
    grid: &ProbeGrid,
) -> Result<ErrorStats> {
    let basis = ev.basis();
    let t = toeplitz_matrix(basis, f)?;
    stats(grid.points().iter().map(|y| {
        let c: Vec<_> = basis
            .eval(&y.to_homogeneous())
            .into_iter()
            .map(|s| s.conj())
            .collect();
        Ok((t.expectation(&c)? - f.eval(y)).abs())
    }))
}

/// `sup |P_N f - f|` over the grid, by the kernel route.
pub fn sup_error_kernel<F: SphereFunction + ?Sized>(
    ev: &KernelEvaluator,
    f: &F,
    grid: &ProbeGrid,
) -> Result<ErrorStats> {
    let op = KernelIntegrator::new(ev, f)?;
    stats(
        grid.points()
            .iter()
            .map(|y| Ok((op.p_n(y)? - f.eval(y)).abs())),
    )
}

/// `error ≈ constant · N^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub constant: f64,
}

/// Least-squares line through `(ln N, ln error)`.
pub fn rate_fit(points: &[(u32, f64)]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, e)| *n > 0 && *e > 0.0 && e.is_finite())
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    if usable.len() < 3 || usable.len() != points.len() {
        return Err(Error::DegenerateFit {
            usable: usable.len(),
        });
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit { usable: 1 });
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        constant: (my - slope * mx).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxRecord {
    pub n_power: u32,
    pub dim: usize,
    pub sup_error: f64,
    pub mean_abs_error: f64,
    pub trace_mean_deviation: f64,
}

/// Per-`N` error records and the fitted `sup_error ≈ C N^slope`.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxReport {
    pub records: Vec<ApproxRecord>,
    pub fit: Option<RateFit>,
    pub rules: Vec<RuleInfo>,
}

/// Builds a basis for each `N` and measures `P_N f - f` on `grid`.
pub fn convergence_study(
    geom: &ModelGeometry,
    f: &TestFunction,
    n_list: &[u32],
    grid: &ProbeGrid,
) -> Result<ApproxReport> {
    let mut records = Vec::with_capacity(n_list.len());
    let mut rules = Vec::with_capacity(n_list.len());
    for &n_power in n_list {
        let rule = recommended_rule(n_power, geom, f.degree() as usize)?;
        rules.push(rule.info());
        let ev = KernelEvaluator::new(orthonormal_basis(geom, n_power, rule)?);
        let errors = sup_error(&ev, f, grid)?;
        let t = toeplitz_matrix(ev.basis(), f)?;
        records.push(ApproxRecord {
            n_power,
            dim: ev.basis().dim(),
            sup_error: errors.sup,
            mean_abs_error: errors.mean_abs,
            trace_mean_deviation: trace_mean_deviation(&t, geom, ev.basis().rule(), f)?,
        });
    }
    let pts: Vec<(u32, f64)> = records.iter().map(|r| (r.n_power, r.sup_error)).collect();
    Ok(ApproxReport {
        fit: rate_fit(&pts).ok(),
        records,
        rules,
    })
}
