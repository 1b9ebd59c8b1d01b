//! Quadrature rules and deterministic integration: Gauss-Legendre
//! product rules on coordinate boxes, product rules on 3-spheres and
//! circles in flat models, a tangent-mapped radial rule for integrals
//! over all of 4-space, and box-boundary flux for divergence checks.

use super::chart::{cholesky, ChartError, MetricChart};
use crate::exprfield::{Expr, ScalarJet};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Families of quadrature rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// Gauss-Legendre product rule on a coordinate box; integration
    /// against a chart includes the metric density sqrt(det g).
    BoxGaussLegendre,
    /// Product rule on a round 3-sphere (Chebyshev-Gauss in the polar
    /// angle, Gauss-Legendre in the middle angle, trapezoid in the
    /// periodic angle); weights carry the surface measure.
    SphereProduct,
    /// Trapezoid rule on a circle; weights carry the arclength measure.
    CircleTrapezoid,
    /// Radial-times-sphere rule covering all of 4-space through the
    /// substitution r = tan(psi/2); integration against a chart
    /// includes sqrt(det g).
    RadialSphere,
}

/// A quadrature rule: weighted nodes in chart coordinates, with the
/// polynomial exactness degree recorded (0 when the rule is exact only
/// in a transformed variable).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Rule family.
    pub kind: RuleKind,
    /// Ambient coordinate dimension of the nodes.
    pub dim: usize,
    /// Node coordinates, zero-padded to four entries.
    pub nodes: Vec<[f64; 4]>,
    /// Positive weights.
    pub weights: Vec<f64>,
    /// Recorded polynomial exactness degree.
    pub exactness: usize,
}

impl QuadratureRule {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Gauss-Legendre product rule with `per_axis` nodes per axis.
    pub fn gauss_legendre_box(domain: &[(f64, f64)], per_axis: usize) -> QuadratureRule {
        let dim = domain.len();
        let (t, w) = gauss_legendre_nodes(per_axis);
        let mut nodes = Vec::with_capacity(per_axis.pow(dim as u32));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut index = vec![0usize; dim];
        loop {
            let mut x = [0.0; 4];
            let mut weight = 1.0;
            for a in 0..dim {
                let (lo, hi) = domain[a];
                x[a] = 0.5 * (hi + lo) + 0.5 * (hi - lo) * t[index[a]];
                weight *= 0.5 * (hi - lo) * w[index[a]];
            }
            nodes.push(x);
            weights.push(weight);
            let mut a = 0;
            loop {
                index[a] += 1;
                if index[a] < per_axis {
                    break;
                }
                index[a] = 0;
                a += 1;
                if a == dim {
                    return QuadratureRule {
                        kind: RuleKind::BoxGaussLegendre,
                        dim,
                        nodes,
                        weights,
                        exactness: 2 * per_axis - 1,
                    };
                }
            }
        }
    }

    /// Product rule on the 3-sphere of the given center and radius with
    /// 2n^3 nodes, exact for polynomials of degree at most 2n-1.
    pub fn sphere_s3(center: [f64; 4], radius: f64, n: usize) -> QuadratureRule {
        let (t, wt) = gauss_legendre_nodes(n);
        let mut nodes = Vec::with_capacity(2 * n * n * n);
        let mut weights = Vec::with_capacity(2 * n * n * n);
        let measure = radius * radius * radius;
        for j in 0..n {
            let psi = (j as f64 + 1.0) * PI / (n as f64 + 1.0);
            let wpsi = PI / (n as f64 + 1.0) * psi.sin() * psi.sin();
            let (spsi, cpsi) = psi.sin_cos();
            for m in 0..n {
                let ct = t[m];
                let st = (1.0 - ct * ct).sqrt();
                for q in 0..(2 * n) {
                    let phi = PI * q as f64 / n as f64;
                    let (sphi, cphi) = phi.sin_cos();
                    let u = [spsi * st * cphi, spsi * st * sphi, spsi * ct, cpsi];
                    let mut x = [0.0; 4];
                    for i in 0..4 {
                        x[i] = center[i] + radius * u[i];
                    }
                    nodes.push(x);
                    weights.push(measure * wpsi * wt[m] * PI / n as f64);
                }
            }
        }
        QuadratureRule {
            kind: RuleKind::SphereProduct,
            dim: 4,
            nodes,
            weights,
            exactness: 2 * n - 1,
        }
    }

    /// Trapezoid rule on a circle, exact for trigonometric polynomials
    /// of degree below the node count.
    pub fn circle(center: [f64; 2], radius: f64, n: usize) -> QuadratureRule {
        let mut nodes = Vec::with_capacity(n);
        let step = 2.0 * PI / n as f64;
        for q in 0..n {
            let (s, c) = (step * q as f64).sin_cos();
            nodes.push([center[0] + radius * c, center[1] + radius * s, 0.0, 0.0]);
        }
        QuadratureRule {
            kind: RuleKind::CircleTrapezoid,
            dim: 2,
            nodes,
            weights: vec![radius * step; n],
            exactness: n.saturating_sub(1),
        }
    }

    /// Rule over all of 4-space: Gauss-Legendre in the compactified
    /// radius r = tan(psi/2), psi in (0, pi), times a unit 3-sphere
    /// rule; weights include the volume factor r^3 dr.
    pub fn radial_s3(n_radial: usize, n_sphere: usize) -> QuadratureRule {
        let (t, w) = gauss_legendre_nodes(n_radial);
        let sphere = QuadratureRule::sphere_s3([0.0; 4], 1.0, n_sphere);
        let mut nodes = Vec::with_capacity(n_radial * sphere.len());
        let mut weights = Vec::with_capacity(n_radial * sphere.len());
        for m in 0..n_radial {
            let psi = 0.5 * PI * (t[m] + 1.0);
            let wpsi = 0.5 * PI * w[m];
            let r = (0.5 * psi).tan();
            let radial_weight = wpsi * 0.5 * (1.0 + r * r) * r * r * r;
            for (u, wu) in sphere.nodes.iter().zip(sphere.weights.iter()) {
                let mut x = [0.0; 4];
                for i in 0..4 {
                    x[i] = r * u[i];
                }
                nodes.push(x);
                weights.push(radial_weight * wu);
            }
        }
        QuadratureRule {
            kind: RuleKind::RadialSphere,
            dim: 4,
            nodes,
            weights,
            exactness: 0,
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on
/// the Legendre recurrence.
pub(crate) fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut z = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        xs[k] = -z;
        xs[n - 1 - k] = z;
        ws[k] = weight;
        ws[n - 1 - k] = weight;
    }
    (xs, ws)
}

/// Legendre polynomial P_n and its derivative at a point.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Deterministic pairwise summation: the reduction tree depends only on
/// the slice length, never on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Weighted sum of a field over the rule's nodes with no metric factor.
/// Node evaluations run in parallel; the reduction is pairwise over the
/// fixed node order, so the result is independent of thread count.
pub fn integrate(
    rule: &QuadratureRule,
    field: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<f64, ChartError> {
    let terms: Vec<f64> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(x, w)| w * field(&x[..rule.dim]))
        .collect();
    for (index, v) in terms.iter().enumerate() {
        if !v.is_finite() {
            return Err(ChartError::NonFiniteField { index });
        }
    }
    Ok(pairwise_sum(&terms))
}

impl MetricChart {
    /// Integrates a field against the chart measure. Box and radial
    /// rules are volume rules in chart coordinates, so each term picks
    /// up the metric density sqrt(det g); sphere and circle rules carry
    /// their own flat surface measure and are summed as-is.
    pub fn integrate(
        &self,
        rule: &QuadratureRule,
        field: impl Fn(&[f64]) -> f64 + Sync,
    ) -> Result<f64, ChartError> {
        match rule.kind {
            RuleKind::BoxGaussLegendre | RuleKind::RadialSphere => {
                if rule.dim != self.dim {
                    return Err(ChartError::WrongDimension {
                        expected: self.dim,
                        got: rule.dim,
                    });
                }
                let terms: Vec<Result<f64, ChartError>> = rule
                    .nodes
                    .par_iter()
                    .zip(rule.weights.par_iter())
                    .map(|(x, w)| {
                        let p = &x[..self.dim];
                        Ok(w * self.sqrt_det_at(p)? * field(p))
                    })
                    .collect();
                let mut values = Vec::with_capacity(terms.len());
                for (index, term) in terms.into_iter().enumerate() {
                    let v = term?;
                    if !v.is_finite() {
                        return Err(ChartError::NonFiniteField { index });
                    }
                    values.push(v);
                }
                Ok(pairwise_sum(&values))
            }
            RuleKind::SphereProduct | RuleKind::CircleTrapezoid => integrate(rule, field),
        }
    }
}

/// CSV dump of a rule with one integrand value per node: coordinate
/// columns, the weight, and the value.
pub fn rule_csv(rule: &QuadratureRule, values: &[f64]) -> String {
    assert_eq!(rule.len(), values.len(), "one value per node");
    let mut out = String::new();
    for i in 0..rule.dim {
        out.push_str(&format!("x{},", i + 1));
    }
    out.push_str("weight,value\n");
    for ((node, w), v) in rule.nodes.iter().zip(rule.weights.iter()).zip(values.iter()) {
        for i in 0..rule.dim {
            out.push_str(&format!("{:.16e},", node[i]));
        }
        out.push_str(&format!("{:.16e},{:.16e}\n", w, v));
    }
    out
}

/// Integral of div(V) against the chart volume over the domain box,
/// using the identity div(V) sqrt(det g) = d_i(sqrt(det g) V^i) so only
/// first-order metric jets are needed per node.
pub fn divergence_box_integral(
    chart: &MetricChart,
    per_axis: usize,
    v: &[Expr],
) -> Result<f64, ChartError> {
    let dim = chart.dim;
    if v.len() != dim {
        return Err(ChartError::WrongDimension {
            expected: dim,
            got: v.len(),
        });
    }
    let rule = QuadratureRule::gauss_legendre_box(&chart.domain, per_axis);
    let mut terms = Vec::with_capacity(rule.len());
    for (node, w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let x = &node[..dim];
        let gj: Vec<Vec<ScalarJet>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| chart.g_entries[i][j].eval_jet(x, 1))
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        let mut gv = [[0.0; 4]; 4];
        for i in 0..dim {
            for j in 0..dim {
                gv[i][j] = gj[i][j].value();
            }
        }
        let l = cholesky(&gv, dim).ok_or(ChartError::NotPositiveDefinite {
            eigenvalue: super::chart::symmetric_eig_min(&gv, dim),
            point: *node,
        })?;
        let sqrt_det: f64 = (0..dim).map(|i| l[i][i]).product();
        let ginv = invert_values(&gv, dim);
        let mut div = 0.0;
        for i in 0..dim {
            let vj = v[i].eval_jet(x, 1)?;
            div += vj.grad(i);
            let mut trace = 0.0;
            for a in 0..dim {
                for b in 0..dim {
                    trace += ginv[a][b] * gj[a][b].grad(i);
                }
            }
            div += 0.5 * trace * vj.value();
        }
        terms.push(w * sqrt_det * div);
    }
    Ok(pairwise_sum(&terms))
}

/// Outward flux of a vector field through the domain-box boundary: the
/// sum over faces of the face integrals of sqrt(det g) V^k with the
/// outward sign, which equals the metric flux g(V, nu) dS.
pub fn box_boundary_flux(
    chart: &MetricChart,
    per_axis: usize,
    v: &[Expr],
) -> Result<f64, ChartError> {
    let dim = chart.dim;
    if v.len() != dim {
        return Err(ChartError::WrongDimension {
            expected: dim,
            got: v.len(),
        });
    }
    let (t, w) = gauss_legendre_nodes(per_axis);
    let mut terms = Vec::new();
    for axis in 0..dim {
        for (side, sign) in [(chart.domain[axis].0, -1.0), (chart.domain[axis].1, 1.0)] {
            let others: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
            let mut index = vec![0usize; others.len()];
            loop {
                let mut x = [0.0; 4];
                x[axis] = side;
                let mut weight = 1.0;
                for (pos, &a) in others.iter().enumerate() {
                    let (lo, hi) = chart.domain[a];
                    x[a] = 0.5 * (hi + lo) + 0.5 * (hi - lo) * t[index[pos]];
                    weight *= 0.5 * (hi - lo) * w[index[pos]];
                }
                let p = &x[..dim];
                let sqrt_det = chart.sqrt_det_at(p)?;
                let vk = v[axis].eval_jet(p, 0)?.value();
                terms.push(sign * weight * sqrt_det * vk);
                let mut pos = 0;
                loop {
                    if pos == others.len() {
                        break;
                    }
                    index[pos] += 1;
                    if index[pos] < per_axis {
                        break;
                    }
                    index[pos] = 0;
                    pos += 1;
                }
                if pos == others.len() {
                    break;
                }
            }
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Numeric inverse of the leading dim x dim block by Gauss-Jordan
/// elimination.
fn invert_values(g: &[[f64; 4]; 4], dim: usize) -> [[f64; 4]; 4] {
    let mut a = *g;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate().take(dim) {
        row[i] = 1.0;
    }
    for c in 0..dim {
        let piv = a[c][c];
        for j in 0..dim {
            a[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for r in 0..dim {
            if r == c {
                continue;
            }
            let factor = a[r][c];
            for j in 0..dim {
                a[r][j] -= factor * a[c][j];
                inv[r][j] -= factor * inv[c][j];
            }
        }
    }
    inv
}
