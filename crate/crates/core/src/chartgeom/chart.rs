//! Metric charts on coordinate boxes in dimensions 2 and 4.
//!
//! A chart stores its metric entries as expressions so that Christoffel
//! symbols, curvature, and divergences can be computed from exact
//! derivative jets instead of finite differences. Charts come from a
//! small named catalog plus a user-expression constructor.

use crate::exprfield::{EvalError, Expr, ParseError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Smallest metric eigenvalue accepted by the construction-time
/// positive-definiteness screen.
pub const MIN_METRIC_EIGENVALUE: f64 = 1e-8;

/// Errors from chart construction and per-point evaluation.
#[derive(Debug, Error)]
pub enum ChartError {
    /// An operation needed a chart of a different dimension.
    #[error("chart has dimension {got}, operation needs dimension {expected}")]
    WrongDimension { expected: usize, got: usize },
    /// The metric entry matrix was not symmetric as written.
    #[error("metric entries at ({i},{j}) and ({j},{i}) differ")]
    AsymmetricEntries { i: usize, j: usize },
    /// A domain interval was empty or inverted.
    #[error("domain interval on axis {axis} is empty or inverted")]
    EmptyDomain { axis: usize },
    /// The metric failed the positive-definiteness check.
    #[error("metric is not positive-definite at {point:?} (eigenvalue {eigenvalue:.3e})")]
    NotPositiveDefinite { eigenvalue: f64, point: [f64; 4] },
    /// An evaluation point left the chart's coordinate box.
    #[error("coordinate {value:.6} on axis {axis} lies outside [{lo:.6}, {hi:.6}]")]
    OutsideDomain {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// A 2-chart operation that needs g = lambda^2 * delta got a
    /// non-conformal metric.
    #[error("2-chart metric is not conformal (relative defect {defect:.3e})")]
    NotConformal { defect: f64 },
    /// An integrand produced a non-finite value at a quadrature node.
    #[error("field value at quadrature node {index} is not finite")]
    NonFiniteField { index: usize },
    /// A catalog lookup used an unregistered name.
    #[error("unknown chart name {name:?}")]
    UnknownChart { name: String },
    /// A user metric entry failed to parse.
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// An expression evaluation failed.
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A coordinate chart with an expression-backed Riemannian metric.
#[derive(Debug, Clone)]
pub struct MetricChart {
    /// Chart dimension, 2 or 4.
    pub dim: usize,
    /// Per-axis closed coordinate intervals.
    pub domain: Vec<(f64, f64)>,
    /// Symmetric matrix of metric entries g_ij as expressions.
    pub g_entries: Vec<Vec<Expr>>,
    /// Catalog or user-chosen name.
    pub name: String,
}

impl MetricChart {
    /// Builds a chart and screens the metric: the entry matrix must be
    /// symmetric as written, and its smallest eigenvalue must exceed
    /// [`MIN_METRIC_EIGENVALUE`] on a coarse Gauss-Legendre grid over
    /// the domain box. Every later per-point evaluation re-checks
    /// positivity through its Cholesky factorization.
    pub fn new(
        name: &str,
        dim: usize,
        domain: Vec<(f64, f64)>,
        g_entries: Vec<Vec<Expr>>,
    ) -> Result<Self, ChartError> {
        if dim != 2 && dim != 4 {
            return Err(ChartError::WrongDimension {
                expected: 4,
                got: dim,
            });
        }
        if domain.len() != dim {
            return Err(ChartError::WrongDimension {
                expected: dim,
                got: domain.len(),
            });
        }
        for (axis, (lo, hi)) in domain.iter().enumerate() {
            if !(lo < hi) {
                return Err(ChartError::EmptyDomain { axis });
            }
        }
        if g_entries.len() != dim || g_entries.iter().any(|row| row.len() != dim) {
            return Err(ChartError::WrongDimension {
                expected: dim,
                got: g_entries.len(),
            });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if g_entries[i][j] != g_entries[j][i] {
                    return Err(ChartError::AsymmetricEntries { i, j });
                }
            }
        }
        let chart = MetricChart {
            dim,
            domain,
            g_entries,
            name: name.to_string(),
        };
        chart.screen_positive_definite()?;
        Ok(chart)
    }

    /// Parses a user metric from row-major component strings.
    pub fn from_component_strings(
        name: &str,
        dim: usize,
        domain: Vec<(f64, f64)>,
        components: &[&str],
    ) -> Result<Self, ChartError> {
        if components.len() != dim * dim {
            return Err(ChartError::WrongDimension {
                expected: dim * dim,
                got: components.len(),
            });
        }
        let mut entries = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut row = Vec::with_capacity(dim);
            for j in 0..dim {
                row.push(Expr::parse(components[i * dim + j])?);
            }
            entries.push(row);
        }
        MetricChart::new(name, dim, domain, entries)
    }

    /// Evaluates the metric eigenvalue screen on a 5-point-per-axis
    /// Gauss-Legendre grid.
    fn screen_positive_definite(&self) -> Result<(), ChartError> {
        let (nodes, _) = super::quad::gauss_legendre_nodes(5);
        let axes: Vec<Vec<f64>> = self
            .domain
            .iter()
            .map(|(lo, hi)| {
                nodes
                    .iter()
                    .map(|t| 0.5 * (hi + lo) + 0.5 * (hi - lo) * t)
                    .collect()
            })
            .collect();
        let mut index = vec![0usize; self.dim];
        loop {
            let mut x = [0.0; 4];
            for a in 0..self.dim {
                x[a] = axes[a][index[a]];
            }
            let g = self.metric_at(&x[..self.dim])?;
            let eig = symmetric_eig_min(&g, self.dim);
            if eig <= MIN_METRIC_EIGENVALUE {
                return Err(ChartError::NotPositiveDefinite {
                    eigenvalue: eig,
                    point: x,
                });
            }
            let mut a = 0;
            loop {
                index[a] += 1;
                if index[a] < axes[a].len() {
                    break;
                }
                index[a] = 0;
                a += 1;
                if a == self.dim {
                    return Ok(());
                }
            }
        }
    }

    /// Checks that a point lies in the domain box.
    pub fn contains(&self, x: &[f64]) -> Result<(), ChartError> {
        if x.len() != self.dim {
            return Err(ChartError::WrongDimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        for (axis, (&value, &(lo, hi))) in x.iter().zip(self.domain.iter()).enumerate() {
            if value < lo || value > hi {
                return Err(ChartError::OutsideDomain {
                    axis,
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Metric values at a point, zero-padded to a 4x4 array.
    pub fn metric_at(&self, x: &[f64]) -> Result<[[f64; 4]; 4], ChartError> {
        let mut g = [[0.0; 4]; 4];
        for i in 0..self.dim {
            for j in 0..self.dim {
                g[i][j] = self.g_entries[i][j].eval_jet(x, 0)?.value();
            }
        }
        Ok(g)
    }

    /// Metric volume density sqrt(det g) at a point; fails when the
    /// Cholesky factorization detects a non-positive-definite value.
    pub fn sqrt_det_at(&self, x: &[f64]) -> Result<f64, ChartError> {
        let g = self.metric_at(x)?;
        match cholesky(&g, self.dim) {
            Some(l) => Ok((0..self.dim).map(|i| l[i][i]).product()),
            None => {
                let mut point = [0.0; 4];
                point[..self.dim].copy_from_slice(x);
                Err(ChartError::NotPositiveDefinite {
                    eigenvalue: symmetric_eig_min(&g, self.dim),
                    point,
                })
            }
        }
    }

    /// The chart with metric entries multiplied by e^f.
    pub fn conformally_rescaled(&self, f: &Expr) -> Result<MetricChart, ChartError> {
        let factor = f.clone().exp();
        let entries = self
            .g_entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| factor.clone() * e.clone())
                    .collect::<Vec<_>>()
            })
            .collect();
        MetricChart::new(
            &format!("{}-rescaled", self.name),
            self.dim,
            self.domain.clone(),
            entries,
        )
    }

    /// Flat chart with the identity metric on [-1,1]^dim.
    pub fn flat(dim: usize) -> Result<Self, ChartError> {
        let entries = delta_entries(dim);
        let name = if dim == 2 { "flat2" } else { "flat4" };
        MetricChart::new(name, dim, vec![(-1.0, 1.0); dim], entries)
    }

    /// Stereographic chart of the round 2-sphere: g = lambda^2 * delta
    /// with lambda^2 = 4/(1+|w|^2)^2.
    pub fn stereo_s2() -> Self {
        let lambda2 = round_factor(&Expr::r2());
        let mut entries = delta_entries(2);
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = lambda2.clone();
        }
        MetricChart::new("stereoS2", 2, vec![(-1.0, 1.0); 2], entries)
            .expect("round 2-sphere chart is positive-definite")
    }

    /// Stereographic chart of the round 4-sphere.
    pub fn stereo_s4() -> Self {
        let lambda2 = round_factor(&Expr::r2());
        let mut entries = delta_entries(4);
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = lambda2.clone();
        }
        MetricChart::new("stereoS4", 4, vec![(-1.0, 1.0); 4], entries)
            .expect("round 4-sphere chart is positive-definite")
    }

    /// Product of a round 2-sphere (coordinates x1, x2) and a
    /// hyperbolic disk (coordinates x3, x4): sectional curvature +1 on
    /// the first block and -1 on the second.
    pub fn biaxial4() -> Self {
        let r2a = Expr::var(0).powi(2) + Expr::var(1).powi(2);
        let r2b = Expr::var(2).powi(2) + Expr::var(3).powi(2);
        let sphere = round_factor(&r2a);
        let disk = hyperbolic_factor(&r2b);
        let mut entries = delta_entries(4);
        entries[0][0] = sphere.clone();
        entries[1][1] = sphere;
        entries[2][2] = disk.clone();
        entries[3][3] = disk;
        MetricChart::new("biaxial4", 4, vec![(-0.4, 0.4); 4], entries)
            .expect("sphere-times-disk chart is positive-definite")
    }

    /// Product of two round 2-spheres, each of sectional curvature +1.
    pub fn kahler4() -> Self {
        let r2a = Expr::var(0).powi(2) + Expr::var(1).powi(2);
        let r2b = Expr::var(2).powi(2) + Expr::var(3).powi(2);
        let first = round_factor(&r2a);
        let second = round_factor(&r2b);
        let mut entries = delta_entries(4);
        entries[0][0] = first.clone();
        entries[1][1] = first;
        entries[2][2] = second.clone();
        entries[3][3] = second;
        MetricChart::new("kahler4", 4, vec![(-1.0, 1.0); 4], entries)
            .expect("sphere-times-sphere chart is positive-definite")
    }

    /// Flat polar-like diagonal chart g = diag(1, (1+x1)^2, 1, 1) with
    /// hand-checkable Christoffel symbols.
    pub fn polar4() -> Self {
        let mut entries = delta_entries(4);
        entries[1][1] = (Expr::constant(1.0) + Expr::var(0)).powi(2);
        MetricChart::new("polar4", 4, vec![(-0.5, 0.5); 4], entries)
            .expect("polar-like chart is positive-definite")
    }

    /// Seeded random perturbation of the flat metric: each entry is
    /// delta_ij plus a degree-2 polynomial with coefficients drawn
    /// uniformly from [-0.05, 0.05], on the box [-0.3, 0.3]^4.
    pub fn randpoly4(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries: Vec<Vec<Option<Expr>>> = vec![vec![None; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let base = if i == j {
                    Expr::constant(1.0)
                } else {
                    Expr::constant(0.0)
                };
                let e = base + random_quadratic(&mut rng);
                entries[i][j] = Some(e.clone());
                entries[j][i] = Some(e);
            }
        }
        let entries = entries
            .into_iter()
            .map(|row| row.into_iter().map(|e| e.unwrap()).collect())
            .collect();
        MetricChart::new(
            &format!("randpoly4-{seed}"),
            4,
            vec![(-0.3, 0.3); 4],
            entries,
        )
        .expect("perturbation of size at most 0.16 per entry keeps the metric positive-definite")
    }

    /// Catalog lookup by name; the seed only affects `randpoly4`.
    pub fn by_name(name: &str, seed: u64) -> Result<Self, ChartError> {
        match name {
            "flat2" => MetricChart::flat(2),
            "flat4" => MetricChart::flat(4),
            "stereoS2" => Ok(MetricChart::stereo_s2()),
            "stereoS4" => Ok(MetricChart::stereo_s4()),
            "biaxial4" => Ok(MetricChart::biaxial4()),
            "kahler4" => Ok(MetricChart::kahler4()),
            "polar4" => Ok(MetricChart::polar4()),
            "randpoly4" => Ok(MetricChart::randpoly4(seed)),
            _ => Err(ChartError::UnknownChart {
                name: name.to_string(),
            }),
        }
    }
}

/// Identity-matrix entries of the given dimension.
fn delta_entries(dim: usize) -> Vec<Vec<Expr>> {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| Expr::constant(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect()
}

/// Round-sphere conformal factor 4/(1+q)^2 for a squared radius q.
fn round_factor(q: &Expr) -> Expr {
    Expr::constant(4.0) / (Expr::constant(1.0) + q.clone()).powi(2)
}

/// Hyperbolic-disk conformal factor 4/(1-q)^2 for a squared radius q.
fn hyperbolic_factor(q: &Expr) -> Expr {
    Expr::constant(4.0) / (Expr::constant(1.0) - q.clone()).powi(2)
}

/// Random polynomial of degree at most 2 in four variables with
/// coefficients uniform in [-0.05, 0.05].
fn random_quadratic(rng: &mut impl Rng) -> Expr {
    let mut coeff = || Expr::constant(rng.gen_range(-0.05..0.05));
    let mut e = coeff();
    for i in 0..4 {
        e = e + coeff() * Expr::var(i);
    }
    for i in 0..4 {
        for j in i..4 {
            e = e + coeff() * Expr::var(i) * Expr::var(j);
        }
    }
    e
}

/// An orthonormal-frame anchor at a chart point: the frame, the metric
/// and Christoffel values, and first derivatives of the Christoffels.
/// Arrays are zero-padded beyond the chart dimension.
#[derive(Debug, Clone)]
pub struct FramedPoint {
    /// Evaluation point.
    pub x: [f64; 4],
    /// Chart dimension.
    pub dim: usize,
    /// `frame[a][i]` is the i-th coordinate component of the a-th frame
    /// vector; the rows come from Gram-Schmidt of the coordinate frame
    /// in index order, so the matrix is lower-triangular with positive
    /// diagonal.
    pub frame: [[f64; 4]; 4],
    /// Metric values g_ij at the point.
    pub metric: [[f64; 4]; 4],
    /// Christoffel symbols indexed `christoffel[k][i][j]` = Gamma^k_ij.
    pub christoffel: [[[f64; 4]; 4]; 4],
    /// First derivatives `christoffel_jet[l][k][i][j]` = d_l Gamma^k_ij.
    pub christoffel_jet: [[[[f64; 4]; 4]; 4]; 4],
}

/// Lower Cholesky factor of the leading dim x dim block, or None when a
/// pivot is non-positive or negligibly small relative to the diagonal.
pub(crate) fn cholesky(g: &[[f64; 4]; 4], dim: usize) -> Option<[[f64; 4]; 4]> {
    let scale = (0..dim).map(|i| g[i][i].abs()).fold(0.0, f64::max);
    let floor = (scale * 1e-14).max(1e-300);
    let mut l = [[0.0; 4]; 4];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= floor {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Frame matrix B with B g B^T = identity, rows lower-triangular with
/// positive diagonal: the inverse of the Cholesky factor, which is the
/// Gram-Schmidt frame of the coordinate basis in index order.
pub(crate) fn frame_from_cholesky(l: &[[f64; 4]; 4], dim: usize) -> [[f64; 4]; 4] {
    let mut b = [[0.0; 4]; 4];
    for a in 0..dim {
        b[a][a] = 1.0 / l[a][a];
        for i in (0..a).rev() {
            let mut s = 0.0;
            for k in (i + 1)..=a {
                s += b[a][k] * l[k][i];
            }
            b[a][i] = -s / l[i][i];
        }
    }
    let mut det = 1.0;
    for (i, row) in b.iter().enumerate().take(dim) {
        det *= row[i];
    }
    if det < 0.0 {
        for v in b[dim - 1].iter_mut() {
            *v = -*v;
        }
    }
    b
}

/// Smallest eigenvalue of the leading dim x dim symmetric block by
/// cyclic Jacobi rotations.
pub(crate) fn symmetric_eig_min(g: &[[f64; 4]; 4], dim: usize) -> f64 {
    let mut a = *g;
    for _ in 0..30 {
        let mut off = 0.0;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..dim).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}
