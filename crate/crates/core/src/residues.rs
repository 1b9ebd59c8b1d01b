//! Shell-quadrature residues of logarithmic singularities: the
//! isolated-pole flux of the conformal shift field in dimension four,
//! pole counting on surfaces, flat-model tube residues of the angle
//! transgression, and zero-order estimation for radial profiles.
//!
//! Conventions. The conformal shift field of a scalar f is
//! P(grad f) = (2 Lap f + |grad f|^2 - 2s) grad f + 4 Ric(grad f)
//! - grad(|grad f|^2); on the flat charts used here the curvature
//! terms vanish. Shell fluxes are taken with the outward normal of
//! the shell (pointing away from the singular point), so a zero of
//! h = r^{2k} contributes -k^2(k+3)/2 to the normalized 4-dimensional
//! flux and a zero of h = |z|^k contributes +k/2 to the normalized
//! 2-dimensional flux.

use crate::chartgeom::chart::{ChartError, MetricChart};
use crate::chartgeom::quad::{pairwise_sum, QuadratureRule};
use crate::exprfield::jet::{EvalError, ScalarJet};
use crate::exprfield::Expr;
use std::f64::consts::PI;
use thiserror::Error;

/// Errors from shell residues and order estimation.
#[derive(Debug, Error)]
pub enum ResidueError {
    /// A shell radius was nonpositive or a radius list was not
    /// strictly decreasing.
    #[error("shell radii must be positive and strictly decreasing (offending value {epsilon})")]
    BadRadius { epsilon: f64 },
    /// A shell or tube left the chart domain along the given axis.
    #[error("shell exits the chart domain along axis {axis}")]
    ShellExitsDomain { axis: usize },
    /// The flat-model operators need the identity metric.
    #[error("chart '{name}' is not flat; shell residues use the flat-model shift field")]
    FlatChartRequired { name: String },
    /// A homogeneous order was zero.
    #[error("homogeneous orders must be nonzero (got {k})")]
    NonPositiveOrder { k: i32 },
    /// The conformal factor or radial profile was nonpositive where it
    /// must be positive.
    #[error("factor must be positive away from the singular set, got {value:.6e} at {at:?}")]
    NonPositiveFactor { value: f64, at: [f64; 4] },
    /// The log-slope of the radial profile did not settle near an
    /// integer.
    #[error("radial log-slope {estimate:.4} is not within 0.1 of an integer")]
    NonIntegerOrder { estimate: f64 },
    /// Two shell centers are closer than the sum of their radii.
    #[error("shells around listed points overlap")]
    OverlappingShells,
    /// Not enough radii or samples for the requested estimate.
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    /// A chart-level evaluation failed.
    #[error(transparent)]
    Chart(#[from] ChartError),
    /// A jet-level evaluation failed.
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// An isolated zero or pole of a conformal factor on a flat chart:
/// h = psi * r^{2k} around the center, with psi smooth and positive.
/// Positive k is a zero, negative k a pole.
#[derive(Debug, Clone)]
pub struct PoleSpec {
    /// Location of the singular point in chart coordinates.
    pub center: [f64; 4],
    /// Half the homogeneous order of the factor.
    pub k: i32,
    /// Smooth positive correction factor.
    pub psi: Expr,
}

impl PoleSpec {
    /// Pure monomial factor h = r^{2k}.
    pub fn monomial(center: [f64; 4], k: i32) -> Self {
        PoleSpec {
            center,
            k,
            psi: Expr::constant(1.0),
        }
    }

    fn log_factor(&self) -> Expr {
        let mut r2 = Expr::constant(0.0);
        for (i, &c) in self.center.iter().enumerate() {
            r2 = r2 + (Expr::var(i) - Expr::constant(c)).powi(2);
        }
        (self.psi.clone() * r2.powi(self.k)).log()
    }
}

/// Shell integrals over a decreasing radius ladder with the
/// polynomial extrapolation to radius zero.
#[derive(Debug, Clone)]
pub struct ShellSweep {
    /// Strictly decreasing shell radii.
    pub radii: Vec<f64>,
    /// Shell integral at each radius.
    pub values: Vec<f64>,
    /// Neville extrapolation of the values to radius zero.
    pub extrapolated: f64,
    /// Difference between the last two extrapolation columns.
    pub extrapolation_error: f64,
}

impl ShellSweep {
    /// Extrapolates a ladder of per-radius values to radius zero.
    pub fn from_values(radii: Vec<f64>, values: Vec<f64>) -> Result<Self, ResidueError> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(ResidueError::TooFewSamples {
                needed: 1,
                got: radii.len().min(values.len()),
            });
        }
        for (i, &r) in radii.iter().enumerate() {
            if r <= 0.0 || (i > 0 && r >= radii[i - 1]) {
                return Err(ResidueError::BadRadius { epsilon: r });
            }
        }
        let n = radii.len();
        let mut table = vec![values.clone()];
        for m in 1..n {
            let prev = &table[m - 1];
            let mut col = vec![0.0; n];
            for i in m..n {
                let hi = radii[i];
                let hm = radii[i - m];
                col[i] = (hm * prev[i] - hi * prev[i - 1]) / (hm - hi);
            }
            table.push(col);
        }
        let extrapolated = table[n - 1][n - 1];
        let extrapolation_error = if n >= 2 {
            (table[n - 1][n - 1] - table[n - 2][n - 1]).abs()
        } else {
            0.0
        };
        Ok(ShellSweep {
            radii,
            values,
            extrapolated,
            extrapolation_error,
        })
    }
}

fn require_flat(chart: &MetricChart) -> Result<(), ResidueError> {
    let mut probes: Vec<[f64; 4]> = Vec::new();
    for blend in [0.5, 0.31, 0.77] {
        let mut p = [0.0; 4];
        for (axis, &(lo, hi)) in chart.domain.iter().enumerate() {
            p[axis] = lo + blend * (hi - lo);
        }
        probes.push(p);
    }
    for i in 0..chart.dim {
        for j in 0..chart.dim {
            let expected = if i == j { 1.0 } else { 0.0 };
            for p in &probes {
                let v = chart.g_entries[i][j]
                    .eval_jet(&p[..chart.dim], 0)
                    .map(|jet| jet.value());
                match v {
                    Ok(v) if (v - expected).abs() <= 1e-14 => {}
                    _ => {
                        return Err(ResidueError::FlatChartRequired {
                            name: chart.name.clone(),
                        })
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_shell_inside(
    chart: &MetricChart,
    center: &[f64],
    radius: f64,
) -> Result<(), ResidueError> {
    if radius <= 0.0 {
        return Err(ResidueError::BadRadius { epsilon: radius });
    }
    for (axis, &(lo, hi)) in chart.domain.iter().enumerate() {
        if center[axis] - radius <= lo || center[axis] + radius >= hi {
            return Err(ResidueError::ShellExitsDomain { axis });
        }
    }
    Ok(())
}

/// Flat-model shift field components from an order-two jet of f:
/// P_i = (2 Lap f + |grad f|^2) d_i f - d_i |grad f|^2.
fn shift_vector_values(f: &ScalarJet) -> [f64; 4] {
    let mut lap = 0.0;
    let mut grad2 = 0.0;
    for j in 0..4 {
        lap += f.hess(j, j);
        grad2 += f.grad(j) * f.grad(j);
    }
    let mut p = [0.0; 4];
    for (i, pi) in p.iter_mut().enumerate() {
        let mut d_grad2 = 0.0;
        for j in 0..4 {
            d_grad2 += 2.0 * f.grad(j) * f.hess(i, j);
        }
        *pi = (2.0 * lap + grad2) * f.grad(i) - d_grad2;
    }
    p
}

/// Divergence of the flat-model shift field from an order-three jet.
#[cfg(test)]
fn shift_divergence_value(f: &ScalarJet) -> f64 {
    let mut partials: Vec<ScalarJet> = Vec::with_capacity(4);
    for i in 0..4 {
        partials.push(f.partial(i));
    }
    let mut lap = partials[0].partial(0);
    for j in 1..4 {
        lap = lap.add(&partials[j].partial(j));
    }
    let mut grad2 = partials[0].mul(&partials[0]);
    for j in 1..4 {
        grad2 = grad2.add(&partials[j].mul(&partials[j]));
    }
    let coeff = lap.scale(2.0).add(&grad2);
    let mut div = 0.0;
    for i in 0..4 {
        let p_i = coeff.mul(&partials[i]).sub(&grad2.partial(i));
        div += p_i.grad(i);
    }
    div
}

fn shell_flux(
    f: &Expr,
    center: &[f64; 4],
    radius: f64,
    nodes: usize,
) -> Result<f64, ResidueError> {
    let rule = QuadratureRule::sphere_s3(*center, radius, nodes);
    let mut terms = Vec::with_capacity(rule.len());
    for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let jet = f.eval_jet(&x[..4], 2)?;
        let p = shift_vector_values(&jet);
        let mut flux = 0.0;
        for i in 0..4 {
            flux += p[i] * (x[i] - center[i]) / radius;
        }
        terms.push(w * flux);
    }
    Ok(pairwise_sum(&terms))
}

/// Normalized shell flux of the shift field of log(psi r^{2k}) around
/// an isolated zero or pole on a flat chart:
/// -(1/32 pi^2) times the outward flux of P(grad log h) through the
/// radius-epsilon shell. For psi identically one the value is radius
/// independent and equals -k^2(k+3)/2.
pub fn pole_residue_4d(
    chart: &MetricChart,
    spec: &PoleSpec,
    epsilon: f64,
    nodes: usize,
) -> Result<f64, ResidueError> {
    if chart.dim != 4 {
        return Err(ResidueError::Chart(ChartError::WrongDimension {
            expected: 4,
            got: chart.dim,
        }));
    }
    if spec.k == 0 {
        return Err(ResidueError::NonPositiveOrder { k: 0 });
    }
    require_flat(chart)?;
    check_shell_inside(chart, &spec.center, epsilon)?;

    let rule = QuadratureRule::sphere_s3(spec.center, epsilon, 2);
    for x in &rule.nodes {
        let psi = spec.psi.eval_jet(&x[..4], 0)?.value();
        if psi <= 0.0 {
            return Err(ResidueError::NonPositiveFactor {
                value: psi,
                at: *x,
            });
        }
    }

    let f = spec.log_factor();
    let flux = shell_flux(&f, &spec.center, epsilon, nodes)?;
    Ok(-flux / (32.0 * PI * PI))
}

/// Ladder of normalized pole fluxes on halving radii with the
/// extrapolation to radius zero.
pub fn pole_shell_sweep(
    chart: &MetricChart,
    spec: &PoleSpec,
    epsilon0: f64,
    levels: usize,
    nodes: usize,
) -> Result<ShellSweep, ResidueError> {
    if levels < 2 {
        return Err(ResidueError::TooFewSamples {
            needed: 2,
            got: levels,
        });
    }
    let mut radii = Vec::with_capacity(levels);
    let mut values = Vec::with_capacity(levels);
    for j in 0..levels {
        let eps = epsilon0 * 0.5_f64.powi(j as i32);
        values.push(pole_residue_4d(chart, spec, eps, nodes)?);
        radii.push(eps);
    }
    ShellSweep::from_values(radii, values)
}

/// Closed-form sum of normalized pole fluxes for a factor with listed
/// zeros of homogeneous order 2k and poles of homogeneous order 2k:
/// each zero contributes -k^2(k+3)/2 and each pole -k^2(3-k)/2.
pub fn pole_sum_4d(zero_orders: &[i32], pole_orders: &[i32]) -> Result<f64, ResidueError> {
    let mut sum = 0.0;
    for &k in zero_orders {
        if k <= 0 {
            return Err(ResidueError::NonPositiveOrder { k });
        }
        let k = k as f64;
        sum += -0.5 * k * k * (k + 3.0);
    }
    for &k in pole_orders {
        if k <= 0 {
            return Err(ResidueError::NonPositiveOrder { k });
        }
        let k = k as f64;
        sum += -0.5 * k * k * (3.0 - k);
    }
    Ok(sum)
}

/// Sum of normalized circle fluxes (1/4 pi) of grad log h around the
/// listed points of a 2-dimensional chart. The computation is
/// conformally invariant, so any isothermal chart works; a zero of
/// absolute-value order k contributes k/2 and a pole -k/2.
pub fn surface_residue_2d(
    chart: &MetricChart,
    h: &Expr,
    centers: &[[f64; 2]],
    epsilon: f64,
    nodes: usize,
) -> Result<f64, ResidueError> {
    if chart.dim != 2 {
        return Err(ResidueError::Chart(ChartError::WrongDimension {
            expected: 2,
            got: chart.dim,
        }));
    }
    if epsilon <= 0.0 {
        return Err(ResidueError::BadRadius { epsilon });
    }
    for (a, ca) in centers.iter().enumerate() {
        check_shell_inside(chart, ca, epsilon)?;
        for cb in centers.iter().skip(a + 1) {
            let d = ((ca[0] - cb[0]).powi(2) + (ca[1] - cb[1]).powi(2)).sqrt();
            if d < 2.0 * epsilon {
                return Err(ResidueError::OverlappingShells);
            }
        }
    }

    let mut total = 0.0;
    for c in centers {
        let rule = QuadratureRule::circle(*c, epsilon, nodes);
        let mut terms = Vec::with_capacity(rule.len());
        for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
            let jet = h.eval_jet(&x[..2], 1)?;
            let value = jet.value();
            if value <= 0.0 {
                return Err(ResidueError::NonPositiveFactor {
                    value,
                    at: *x,
                });
            }
            let normal = [(x[0] - c[0]) / epsilon, (x[1] - c[1]) / epsilon];
            let dlog = (jet.grad(0) * normal[0] + jet.grad(1) * normal[1]) / value;
            terms.push(w * dlog);
        }
        total += pairwise_sum(&terms) / (4.0 * PI);
    }
    Ok(total)
}

/// Axis-aligned rectangle in the first two coordinates of a flat
/// 4-chart, with the last two coordinates spanning the normal plane.
#[derive(Debug, Clone, Copy)]
pub struct PlanarPatch {
    /// Range of the first coordinate.
    pub x_range: (f64, f64),
    /// Range of the second coordinate.
    pub y_range: (f64, f64),
}

impl PlanarPatch {
    /// Area of the rectangle.
    pub fn area(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) * (self.y_range.1 - self.y_range.0)
    }
}

/// Tube flux ladder of the angle factor 1 + cos(theta) around a planar
/// patch of its vanishing locus on a flat chart: for each radius, the
/// patch integral of (1/4 pi) times the circle flux of
/// grad log(1 + cos theta) in the normal plane. For a factor vanishing
/// to normal order 2k on the patch the limit is k times the patch
/// area.
pub fn tube_residue(
    chart: &MetricChart,
    costheta: &Expr,
    patch: &PlanarPatch,
    radii: &[f64],
    patch_nodes: usize,
    circle_nodes: usize,
) -> Result<ShellSweep, ResidueError> {
    if chart.dim != 4 {
        return Err(ResidueError::Chart(ChartError::WrongDimension {
            expected: 4,
            got: chart.dim,
        }));
    }
    require_flat(chart)?;
    if radii.is_empty() {
        return Err(ResidueError::TooFewSamples { needed: 1, got: 0 });
    }
    let (lo0, hi0) = chart.domain[0];
    let (lo1, hi1) = chart.domain[1];
    if patch.x_range.0 <= lo0 || patch.x_range.1 >= hi0 {
        return Err(ResidueError::ShellExitsDomain { axis: 0 });
    }
    if patch.y_range.0 <= lo1 || patch.y_range.1 >= hi1 {
        return Err(ResidueError::ShellExitsDomain { axis: 1 });
    }
    let phi = Expr::constant(1.0) + costheta.clone();
    let patch_rule =
        QuadratureRule::gauss_legendre_box(&[patch.x_range, patch.y_range], patch_nodes);

    let mut values = Vec::with_capacity(radii.len());
    for &eps in radii {
        if eps <= 0.0 {
            return Err(ResidueError::BadRadius { epsilon: eps });
        }
        for (axis, &(lo, hi)) in chart.domain.iter().enumerate().skip(2) {
            if -eps <= lo || eps >= hi {
                return Err(ResidueError::ShellExitsDomain { axis });
            }
        }
        let mut patch_terms = Vec::with_capacity(patch_rule.len());
        for (p, wp) in patch_rule.nodes.iter().zip(patch_rule.weights.iter()) {
            let mut circle_terms = Vec::with_capacity(circle_nodes);
            let step = 2.0 * PI / circle_nodes as f64;
            for q in 0..circle_nodes {
                let (s, c) = (step * q as f64).sin_cos();
                let x = [p[0], p[1], eps * c, eps * s];
                let jet = phi.eval_jet(&x, 1)?;
                let value = jet.value();
                if value <= 0.0 {
                    return Err(ResidueError::NonPositiveFactor { value, at: x });
                }
                let dlog = (jet.grad(2) * c + jet.grad(3) * s) / value;
                circle_terms.push(eps * step * dlog);
            }
            patch_terms.push(wp * pairwise_sum(&circle_terms) / (4.0 * PI));
        }
        values.push(pairwise_sum(&patch_terms));
    }
    ShellSweep::from_values(radii.to_vec(), values)
}

/// Leading-order data of a positive radial profile phi(r) near zero:
/// phi(r) = r^kappa (A + r B(r)).
#[derive(Debug, Clone)]
pub struct ZeroOrderEstimate {
    /// Integer order of vanishing.
    pub kappa: i64,
    /// Leading coefficient, extrapolated to radius zero.
    pub a: f64,
    /// Sampled first-order remainder (r, B(r)) on the radius ladder.
    pub b_profile: Vec<(f64, f64)>,
}

/// Estimates the vanishing order and leading coefficient of a radial
/// profile from samples on halving radii: kappa as the extrapolated
/// limit of the dyadic log-slope (rejected when it does not settle
/// within 0.1 of an integer), A from the extrapolated ratio
/// phi(r)/r^kappa.
pub fn kappa_estimate(
    phi: impl Fn(f64) -> f64,
    r0: f64,
    levels: usize,
) -> Result<ZeroOrderEstimate, ResidueError> {
    if levels < 3 {
        return Err(ResidueError::TooFewSamples {
            needed: 3,
            got: levels,
        });
    }
    if r0 <= 0.0 {
        return Err(ResidueError::BadRadius { epsilon: r0 });
    }
    let mut radii = Vec::with_capacity(levels);
    let mut samples = Vec::with_capacity(levels);
    for j in 0..levels {
        let r = r0 * 0.5_f64.powi(j as i32);
        let v = phi(r);
        if v <= 0.0 {
            return Err(ResidueError::NonPositiveFactor {
                value: v,
                at: [r, 0.0, 0.0, 0.0],
            });
        }
        radii.push(r);
        samples.push(v);
    }

    let slopes: Vec<f64> = (0..levels - 1)
        .map(|j| (samples[j] / samples[j + 1]).log2())
        .collect();
    let n = slopes.len();
    let kappa_est = 2.0 * slopes[n - 1] - slopes[n - 2];
    let kappa = kappa_est.round();
    if (kappa_est - kappa).abs() > 0.1 {
        return Err(ResidueError::NonIntegerOrder { estimate: kappa_est });
    }

    let mut kappa = kappa as i64;
    let mut a;
    loop {
        let ratios: Vec<f64> = radii
            .iter()
            .zip(samples.iter())
            .map(|(&r, &v)| v / r.powi(kappa as i32))
            .collect();
        a = 2.0 * ratios[levels - 1] - ratios[levels - 2];
        let scale = ratios
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        if a.abs() > 1e-9 * scale || kappa >= radii.len() as i64 + kappa_est as i64 {
            break;
        }
        kappa += 1;
    }

    let b_profile = radii
        .iter()
        .zip(samples.iter())
        .map(|(&r, &v)| (r, (v / r.powi(kappa as i32) - a) / r))
        .collect();
    Ok(ZeroOrderEstimate {
        kappa,
        a,
        b_profile,
    })
}

/// Per-sample data for the derivative-bound test of a controlled zero
/// set: the leading coefficient next to sup bounds on the first and
/// second scaled remainder derivatives over the radius range.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeBounds {
    /// Leading coefficient A at this family sample.
    pub a: f64,
    /// sup over r of |(r / k!) phi^(k+1)(r)|.
    pub sup_first: f64,
    /// sup over r of |(r^2 / k!) phi^(k+2)(r)|.
    pub sup_second: f64,
}

/// Verdict of the controlled-zero-set screens over a sampled family.
#[derive(Debug, Clone, Copy)]
pub struct ControlledReport {
    /// Smallest |A| over the family.
    pub inf_abs_a: f64,
    /// Whether the screen passed.
    pub controlled: bool,
    /// Mean of the h/d integrand over the family when derivative
    /// bounds were supplied.
    pub h_over_d_mean: Option<f64>,
}

/// Uniform-coefficient screen: the family is controlled when the
/// sampled leading coefficients stay at least `floor` away from zero
/// in absolute value.
pub fn controlled_check(a_samples: &[f64], floor: f64) -> Result<ControlledReport, ResidueError> {
    if a_samples.is_empty() {
        return Err(ResidueError::TooFewSamples { needed: 1, got: 0 });
    }
    let inf_abs_a = a_samples
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(ControlledReport {
        inf_abs_a,
        controlled: inf_abs_a >= floor,
        h_over_d_mean: None,
    })
}

/// Derivative-bound screen: each sample needs |A| to exceed the sup of
/// the first scaled remainder derivative by at least `floor` (the gap
/// is the d function), and the mean of h/d is reported with
/// h = max of the two sup bounds.
pub fn controlled_check_with_bounds(
    samples: &[DerivativeBounds],
    floor: f64,
) -> Result<ControlledReport, ResidueError> {
    if samples.is_empty() {
        return Err(ResidueError::TooFewSamples { needed: 1, got: 0 });
    }
    let mut inf_abs_a = f64::INFINITY;
    let mut controlled = true;
    let mut ratio_sum = 0.0;
    for s in samples {
        inf_abs_a = inf_abs_a.min(s.a.abs());
        let d = s.a.abs() - s.sup_first;
        if d < floor {
            controlled = false;
            continue;
        }
        let h = s.sup_first.max(s.sup_second);
        ratio_sum += h / d;
    }
    let h_over_d_mean = if controlled {
        Some(ratio_sum / samples.len() as f64)
    } else {
        None
    };
    Ok(ControlledReport {
        inf_abs_a,
        controlled,
        h_over_d_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartgeom::quad::gauss_legendre_nodes;

    fn flat4() -> MetricChart {
        MetricChart::flat(4).expect("flat 4-chart")
    }

    fn flat2() -> MetricChart {
        MetricChart::flat(2).expect("flat 2-chart")
    }

    #[test]
    fn monomial_pole_flux_is_exact_and_radius_independent() {
        let chart = flat4();
        for (k, expected) in [(1, -2.0), (2, -10.0), (3, -27.0)] {
            let spec = PoleSpec::monomial([0.0; 4], k);
            let mut previous = None;
            for eps in [0.3, 0.15, 0.075] {
                let v = pole_residue_4d(&chart, &spec, eps, 6).expect("flat shell");
                assert!(
                    (v - expected).abs() <= 1e-10,
                    "k={k}, eps={eps}: {v} vs {expected}"
                );
                if let Some(prev) = previous {
                    let drift: f64 = v - prev;
                    assert!(drift.abs() <= 1e-10, "k={k}: radius drift {drift}");
                }
                previous = Some(v);
            }
        }
    }

    #[test]
    fn off_center_pole_and_negative_order_match_the_closed_form() {
        let chart = flat4();
        let spec = PoleSpec::monomial([0.2, -0.1, 0.15, 0.05], 1);
        let v = pole_residue_4d(&chart, &spec, 0.1, 6).expect("flat shell");
        assert!((v + 2.0).abs() <= 1e-10);

        let pole = PoleSpec::monomial([0.0; 4], -1);
        let v = pole_residue_4d(&chart, &pole, 0.2, 6).expect("flat shell");
        let expected = pole_sum_4d(&[], &[1]).expect("positive orders");
        assert!(
            (v - expected).abs() <= 1e-10,
            "pole flux {v} vs closed form {expected}"
        );
    }

    #[test]
    fn perturbed_factor_extrapolates_to_the_integer() {
        let chart = flat4();
        let spec = PoleSpec {
            center: [0.0; 4],
            k: 1,
            psi: Expr::parse("1 + 0.25*x1^2").expect("polynomial"),
        };
        let sweep = pole_shell_sweep(&chart, &spec, 0.4, 6, 10).expect("flat shells");
        assert!(
            (sweep.extrapolated + 2.0).abs() <= 1e-3,
            "extrapolated {} vs -2, error estimate {}",
            sweep.extrapolated,
            sweep.extrapolation_error
        );
        let single = sweep.values[0];
        assert!(
            (single + 2.0).abs() > (sweep.extrapolated + 2.0).abs(),
            "extrapolation must improve on the largest shell ({single})"
        );
    }

    #[test]
    fn pole_sum_closed_form_matches_the_examples() {
        assert!((pole_sum_4d(&[1], &[]).unwrap() + 2.0).abs() <= 1e-15);
        assert!((pole_sum_4d(&[2], &[]).unwrap() + 10.0).abs() <= 1e-15);
        assert!((pole_sum_4d(&[3], &[]).unwrap() + 27.0).abs() <= 1e-15);
        assert!((pole_sum_4d(&[], &[1]).unwrap() + 1.0).abs() <= 1e-15);
        assert!(pole_sum_4d(&[], &[3]).unwrap().abs() <= 1e-15);
        assert!((pole_sum_4d(&[1, 2], &[1]).unwrap() + 13.0).abs() <= 1e-15);
        assert!(matches!(
            pole_sum_4d(&[0], &[]).unwrap_err(),
            ResidueError::NonPositiveOrder { .. }
        ));
    }

    #[test]
    fn annulus_divergence_accounts_for_the_flux_difference() {
        let spec = PoleSpec {
            center: [0.0; 4],
            k: 1,
            psi: Expr::parse("1 + 0.25*x1^2").expect("polynomial"),
        };
        let f = spec.log_factor();
        let outer = 0.4;
        let inner = 0.2;
        let flux_outer = shell_flux(&f, &spec.center, outer, 10).expect("evaluates");
        let flux_inner = shell_flux(&f, &spec.center, inner, 10).expect("evaluates");

        let (t, w) = gauss_legendre_nodes(24);
        let sphere = QuadratureRule::sphere_s3([0.0; 4], 1.0, 8);
        let mut terms = Vec::new();
        for (ri, wi) in t.iter().zip(w.iter()) {
            let r = 0.5 * (outer + inner) + 0.5 * (outer - inner) * ri;
            let wr = 0.5 * (outer - inner) * wi * r * r * r;
            for (u, wu) in sphere.nodes.iter().zip(sphere.weights.iter()) {
                let x = [r * u[0], r * u[1], r * u[2], r * u[3]];
                let jet = f.eval_jet(&x, 3).expect("evaluates");
                terms.push(wr * wu * shift_divergence_value(&jet));
            }
        }
        let bulk = pairwise_sum(&terms);
        assert!(
            (bulk - (flux_outer - flux_inner)).abs() <= 1e-6,
            "divergence theorem defect {:.3e}",
            (bulk - (flux_outer - flux_inner)).abs()
        );
    }

    #[test]
    fn shell_guards_reject_bad_inputs() {
        let chart = flat4();
        let spec = PoleSpec::monomial([0.0; 4], 1);
        assert!(matches!(
            pole_residue_4d(&chart, &spec, 1.5, 4).unwrap_err(),
            ResidueError::ShellExitsDomain { .. }
        ));
        assert!(matches!(
            pole_residue_4d(&chart, &spec, -0.1, 4).unwrap_err(),
            ResidueError::BadRadius { .. }
        ));
        assert!(matches!(
            pole_residue_4d(&chart, &PoleSpec::monomial([0.0; 4], 0), 0.1, 4).unwrap_err(),
            ResidueError::NonPositiveOrder { .. }
        ));
        assert!(matches!(
            pole_residue_4d(&MetricChart::stereo_s4(), &spec, 0.1, 4).unwrap_err(),
            ResidueError::FlatChartRequired { .. }
        ));
        let negative = PoleSpec {
            center: [0.0; 4],
            k: 1,
            psi: Expr::parse("x1 - 10").expect("polynomial"),
        };
        assert!(matches!(
            pole_residue_4d(&chart, &negative, 0.1, 4).unwrap_err(),
            ResidueError::NonPositiveFactor { .. }
        ));
    }

    #[test]
    fn stereographic_zero_recovers_the_sphere_euler_number() {
        let chart = flat2();
        let h = Expr::parse("4 * (x1^2 + x2^2)^2 / (1 + x1^2 + x2^2)^2").expect("rational");
        let v = surface_residue_2d(&chart, &h, &[[0.0, 0.0]], 1e-4, 64).expect("shell");
        assert!((v - 2.0).abs() <= 1e-7, "sphere count {v}");
    }

    #[test]
    fn quadratic_zero_counts_half_its_order() {
        let chart = flat2();
        let h = Expr::parse("x1^2 + x2^2").expect("polynomial");
        let v = surface_residue_2d(&chart, &h, &[[0.0, 0.0]], 0.3, 64).expect("shell");
        assert!((v - 1.0).abs() <= 1e-12, "single |z|^2 zero {v}");

        let empty = surface_residue_2d(&chart, &h, &[], 0.3, 64).expect("no shells");
        assert!(empty.abs() <= 1e-15);

        let err =
            surface_residue_2d(&chart, &h, &[[0.0, 0.0], [0.1, 0.0]], 0.3, 64).unwrap_err();
        assert!(matches!(err, ResidueError::OverlappingShells));
    }

    #[test]
    fn two_zeros_and_a_scaled_factor_accumulate() {
        let chart = flat2();
        let h = Expr::parse("((x1-0.4)^2 + x2^2) * ((x1+0.4)^2 + x2^2)^2 * (2 + x1)")
            .expect("polynomial");
        let v = surface_residue_2d(&chart, &h, &[[0.4, 0.0], [-0.4, 0.0]], 1e-3, 64)
            .expect("shells");
        assert!((v - 3.0).abs() <= 1e-5, "orders 2 and 4 count 1 + 2, got {v}");
    }

    #[test]
    fn tube_flux_of_monomial_angles_gives_order_times_area() {
        let chart = flat4();
        let patch = PlanarPatch {
            x_range: (-0.5, 0.5),
            y_range: (-0.25, 0.25),
        };
        let radii = [0.2, 0.1, 0.05, 0.025];
        for k in [1, 2] {
            let costheta = Expr::parse(&format!("(x3^2 + x4^2)^{k} - 1")).expect("polynomial");
            let sweep =
                tube_residue(&chart, &costheta, &patch, &radii, 8, 32).expect("flat tube");
            let expected = k as f64 * patch.area();
            for (r, v) in sweep.radii.iter().zip(sweep.values.iter()) {
                assert!(
                    (v - expected).abs() <= 1e-9,
                    "k={k}, radius {r}: {v} vs {expected}"
                );
            }
            assert!((sweep.extrapolated - expected).abs() <= 1e-9);
        }
    }

    #[test]
    fn tube_flux_survives_positive_corrections() {
        let chart = flat4();
        let patch = PlanarPatch {
            x_range: (-0.5, 0.5),
            y_range: (-0.5, 0.5),
        };
        let radii: Vec<f64> = (0..6).map(|j| 0.3 * 0.5_f64.powi(j)).collect();
        let costheta =
            Expr::parse("(x3^2 + x4^2) * (1 + 0.25*x3^2 + 0.1*x1^2) - 1").expect("polynomial");
        let sweep = tube_residue(&chart, &costheta, &patch, &radii, 8, 32).expect("flat tube");
        assert!(
            (sweep.extrapolated - patch.area()).abs() <= 1e-3,
            "extrapolated {} vs area {}",
            sweep.extrapolated,
            patch.area()
        );

        let constant = Expr::constant(-0.5);
        let sweep = tube_residue(&chart, &constant, &patch, &radii, 4, 16).expect("flat tube");
        assert!(sweep.extrapolated.abs() <= 1e-12, "no zero, no flux");

        let vanishing = Expr::parse("0 - 1 - x1^2").expect("polynomial");
        let err = tube_residue(&chart, &vanishing, &patch, &radii, 4, 16).unwrap_err();
        assert!(matches!(err, ResidueError::NonPositiveFactor { .. }));
    }

    #[test]
    fn kappa_estimates_monomial_and_corrected_profiles() {
        let quartic = kappa_estimate(|r| r.powi(4), 0.4, 8).expect("clean profile");
        assert_eq!(quartic.kappa, 4);
        assert!((quartic.a - 1.0).abs() <= 1e-12);
        for &(_, b) in &quartic.b_profile {
            assert!(b.abs() <= 1e-9);
        }

        let linear = kappa_estimate(|r| r * r * (1.0 + r), 0.4, 8).expect("clean profile");
        assert_eq!(linear.kappa, 2);
        assert!((linear.a - 1.0).abs() <= 1e-10);
        for &(_, b) in &linear.b_profile {
            assert!((b - 1.0).abs() <= 1e-9);
        }

        let wavy = kappa_estimate(|r| r * r * (2.0 + r.sin()), 0.4, 8).expect("clean profile");
        assert_eq!(wavy.kappa, 2);
        assert!((wavy.a - 2.0).abs() <= 1e-4);
        assert!((wavy.b_profile.last().unwrap().1 - 1.0).abs() <= 1e-2);
    }

    #[test]
    fn lower_order_perturbations_drop_the_estimated_order() {
        let perturbed = kappa_estimate(|r| r.powi(4) + 0.1 * r.powi(3), 0.2, 8)
            .expect("clean profile");
        assert_eq!(perturbed.kappa, 3);
        assert!((perturbed.a - 0.1).abs() <= 1e-6);
    }

    #[test]
    fn oscillating_log_slopes_are_rejected() {
        let err = kappa_estimate(
            |r| r.powf(2.0 + 0.5 * (PI * r.log2()).sin()),
            0.3,
            8,
        )
        .unwrap_err();
        assert!(matches!(err, ResidueError::NonIntegerOrder { .. }));

        let err = kappa_estimate(|r| r - 0.2, 0.3, 8).unwrap_err();
        assert!(matches!(err, ResidueError::NonPositiveFactor { .. }));
    }

    #[test]
    fn controlled_screens_report_the_coefficient_infimum() {
        let constant = controlled_check(&[1.0; 12], 1e-9).expect("samples");
        assert!(constant.controlled);
        assert!((constant.inf_abs_a - 1.0).abs() <= 1e-15);

        let vanishing: Vec<f64> = (0..21)
            .map(|i| {
                let u = -1.0 + i as f64 * 0.1;
                u * u
            })
            .collect();
        let report = controlled_check(&vanishing, 1e-9).expect("samples");
        assert!(!report.controlled);
        assert!(report.inf_abs_a <= 1e-15);

        let wavy: Vec<f64> = (0..101)
            .map(|i| 1.0 + 0.5 * (2.0 * PI * i as f64 / 100.0).sin())
            .collect();
        let report = controlled_check(&wavy, 1e-9).expect("samples");
        assert!(report.controlled);
        assert!((report.inf_abs_a - 0.5).abs() <= 1e-2);
    }

    #[test]
    fn derivative_bound_screen_reports_the_ratio() {
        let good = vec![
            DerivativeBounds {
                a: 1.0,
                sup_first: 0.3,
                sup_second: 0.2,
            };
            4
        ];
        let report = controlled_check_with_bounds(&good, 1e-9).expect("samples");
        assert!(report.controlled);
        let expected = 0.3 / 0.7;
        assert!((report.h_over_d_mean.unwrap() - expected).abs() <= 1e-12);

        let bad = vec![DerivativeBounds {
            a: 0.2,
            sup_first: 0.3,
            sup_second: 0.1,
        }];
        let report = controlled_check_with_bounds(&bad, 1e-9).expect("samples");
        assert!(!report.controlled);
        assert!(report.h_over_d_mean.is_none());
    }

    #[test]
    fn sweep_extrapolation_is_exact_on_polynomial_ladders() {
        let radii: Vec<f64> = (0..5).map(|j| 0.4 * 0.5_f64.powi(j)).collect();
        let values: Vec<f64> = radii.iter().map(|r| 3.0 - 2.0 * r + r * r).collect();
        let sweep = ShellSweep::from_values(radii, values).expect("ladder");
        assert!((sweep.extrapolated - 3.0).abs() <= 1e-12);
        assert!(sweep.extrapolation_error <= 1e-10);

        let err = ShellSweep::from_values(vec![0.1, 0.2], vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(err, ResidueError::BadRadius { .. }));
    }
}
