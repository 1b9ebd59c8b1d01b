//! Almost complex structure fields on 4-dimensional charts: validity
//! diagnostics, the angle decomposition of one structure against a
//! reference, interpolation between non-opposite structures, the
//! canonical Hermitian connection shift with its torsion, the eta
//! two-form with the associated first Chern density, and the angle
//! transgression one-forms with their divergence densities.
//!
//! Conventions. A structure field stores endomorphism entries J^m_k as
//! coordinate expressions, acting on coordinate components by
//! (J v)^m = J^m_k v^k. Its fundamental two-form is w(X, Y) = g(JX, Y),
//! and two-forms are paired in the bivector scale
//! <a, b> = (1/2) a_ij b_kl g^ik g^jl, in which the fundamental form of
//! an orthogonal structure has squared norm 2. The transgression
//! one-forms use the same scale by default; the raw endomorphism-trace
//! scale, which doubles them, is available as an explicit option.

use crate::alg4::{bivector_of_skew_endo, omega1, omega2, omega3, wedge2, Bivector, CurvOp, Vector4};
use crate::chartgeom::chart::{ChartError, MetricChart};
use crate::chartgeom::jetcalc::{log_jet, sqrt_jet, PointCalculus};
use crate::exprfield::jet::{EvalError, ScalarJet};
use crate::exprfield::Expr;
use crate::transgression::{modified_curvature_from_shift_jets, Jet3, TransgressionError};
use std::f64::consts::PI;
use thiserror::Error;

/// Largest structure defect accepted before the geometric operators
/// refuse an input endomorphism.
pub const ACS_TOL: f64 = 1e-8;

/// Guard on 1 + cos(theta) below which two structures are treated as
/// opposite and the angle operators refuse to evaluate.
pub const ANTI_COMPLEX_GUARD: f64 = 1e-6;

/// Smallest anti-invariant projection norm accepted when framing the
/// anti-invariant plane with a reference section.
pub const EJ_FRAME_TOL: f64 = 1e-6;

/// Errors from structure construction and the angle operators.
#[derive(Debug, Error)]
pub enum AlmostComplexError {
    /// A component matrix did not have four rows of four entries.
    #[error("structure entries must form a 4x4 matrix")]
    BadShape,
    /// A frame-adapted constructor needs a diagonal metric.
    #[error("chart metric entry ({i},{j}) is not identically zero; frame-adapted structures need a diagonal metric")]
    NonDiagonalChart { i: usize, j: usize },
    /// The endomorphism failed the square, compatibility, or
    /// orientation screen.
    #[error("endomorphism is not a compatible positive almost complex structure (defect {defect:.3e})")]
    InvalidStructure { defect: f64 },
    /// An angle operator was evaluated where the structures are
    /// opposite.
    #[error("structures are opposite at this point (1 + cos theta = {value:.3e})")]
    AntiComplexPoint { value: f64 },
    /// The interpolation parameter left the unit interval.
    #[error("interpolation parameter {t} lies outside [0, 1]")]
    ParameterOutOfRange { t: f64 },
    /// No admissible reference section spans the anti-invariant plane
    /// at the evaluation point.
    #[error("reference section projects onto the anti-invariant plane with norm below {EJ_FRAME_TOL:.1e}")]
    DegenerateFrame,
    /// A chart-level evaluation failed.
    #[error(transparent)]
    Chart(#[from] ChartError),
    /// A jet-level evaluation failed.
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// The shifted-connection curvature machinery failed.
    #[error(transparent)]
    Transgression(#[from] TransgressionError),
}

/// An almost complex structure field on a 4-dimensional chart, stored
/// as expression entries of the endomorphism in chart coordinates.
#[derive(Debug, Clone)]
pub struct ACSField {
    /// Display name used by reports.
    pub name: String,
    /// Entries j[m][k] of J^m_k as coordinate expressions.
    pub entries: Vec<Vec<Expr>>,
    /// Advisory flag set by constructors that produce a field parallel
    /// for the chart they were built against.
    pub is_parallel_claimed: bool,
}

impl ACSField {
    /// Wraps explicit entry expressions after a shape check.
    pub fn from_components(
        name: &str,
        entries: Vec<Vec<Expr>>,
    ) -> Result<Self, AlmostComplexError> {
        if entries.len() != 4 || entries.iter().any(|row| row.len() != 4) {
            return Err(AlmostComplexError::BadShape);
        }
        Ok(ACSField {
            name: name.to_string(),
            entries,
            is_parallel_claimed: false,
        })
    }

    /// The k-th standard constant structure on coordinates, k in 1..=3.
    pub fn standard(k: usize) -> Result<Self, AlmostComplexError> {
        let j = standard_matrix(k)?;
        let entries = (0..4)
            .map(|m| (0..4).map(|q| Expr::constant(j[m][q])).collect())
            .collect();
        Ok(ACSField {
            name: format!("standardJ{k}"),
            entries,
            is_parallel_claimed: true,
        })
    }

    /// The k-th standard structure conjugated into the orthonormal
    /// frame of a diagonal metric, J^m_q = Jk[m][q] sqrt(g_qq / g_mm).
    pub fn frame_standard(chart: &MetricChart, k: usize) -> Result<Self, AlmostComplexError> {
        let j = standard_matrix(k)?;
        require_diagonal(chart)?;
        let mut entries: Vec<Vec<Expr>> = Vec::with_capacity(4);
        for m in 0..4 {
            let mut row = Vec::with_capacity(4);
            for q in 0..4 {
                if j[m][q] == 0.0 {
                    row.push(Expr::constant(0.0));
                } else {
                    let ratio = chart.g_entries[q][q].clone() / chart.g_entries[m][m].clone();
                    row.push(Expr::constant(j[m][q]) * ratio.sqrt());
                }
            }
            entries.push(row);
        }
        Ok(ACSField {
            name: format!("frameJ{k}-{}", chart.name),
            entries,
            is_parallel_claimed: false,
        })
    }

    /// Pointwise combination f1 J1 + f2 J2 + f3 J3 of the three
    /// frame-adapted standard structures of a diagonal metric. The
    /// coefficients must square-sum to one wherever the field is used.
    pub fn quaternion_frame(
        name: &str,
        chart: &MetricChart,
        coefficients: [Expr; 3],
    ) -> Result<Self, AlmostComplexError> {
        require_diagonal(chart)?;
        let parts: Vec<ACSField> = (1..=3)
            .map(|k| ACSField::frame_standard(chart, k))
            .collect::<Result<_, _>>()?;
        let mut entries: Vec<Vec<Expr>> = Vec::with_capacity(4);
        for m in 0..4 {
            let mut row = Vec::with_capacity(4);
            for q in 0..4 {
                let mut sum = Expr::constant(0.0);
                for (f, part) in coefficients.iter().zip(&parts) {
                    sum = sum + f.clone() * part.entries[m][q].clone();
                }
                row.push(sum);
            }
            entries.push(row);
        }
        Ok(ACSField {
            name: name.to_string(),
            entries,
            is_parallel_claimed: false,
        })
    }

    /// Flat-chart field tilted away from the first standard structure
    /// by a quadratic angle function of the first two coordinates. Its
    /// anti-invariant part against that structure is anti-complex, so
    /// it exercises every branch of the angle divergence identities.
    pub fn tilted(epsilon: f64) -> Self {
        let rho2 = Expr::var(0).powi(2) + Expr::var(1).powi(2);
        let f1 = (Expr::constant(1.0) - Expr::constant(epsilon * epsilon) * rho2).sqrt();
        let f2 = Expr::constant(epsilon) * Expr::var(0);
        let f3 = Expr::constant(-epsilon) * Expr::var(1);
        let js = [standard_matrix(1), standard_matrix(2), standard_matrix(3)];
        let coeffs = [f1, f2, f3];
        let mut entries: Vec<Vec<Expr>> = Vec::with_capacity(4);
        for m in 0..4 {
            let mut row = Vec::with_capacity(4);
            for q in 0..4 {
                let mut sum = Expr::constant(0.0);
                for (f, j) in coeffs.iter().zip(&js) {
                    let j = j.as_ref().expect("standard index in range");
                    if j[m][q] != 0.0 {
                        sum = sum + f.clone() * Expr::constant(j[m][q]);
                    }
                }
                row.push(sum);
            }
            entries.push(row);
        }
        ACSField {
            name: format!("tilted-{epsilon}"),
            entries,
            is_parallel_claimed: false,
        }
    }

    /// Entry jets of the endomorphism at the calculator's point.
    pub fn entry_jets(
        &self,
        calc: &PointCalculus,
        order: usize,
    ) -> Result<Vec<Vec<ScalarJet>>, AlmostComplexError> {
        let x = calc.point();
        let mut jets: Vec<Vec<ScalarJet>> = Vec::with_capacity(4);
        for row in &self.entries {
            let mut out = Vec::with_capacity(4);
            for e in row {
                out.push(e.eval_jet(&x[..4], order)?);
            }
            jets.push(out);
        }
        Ok(jets)
    }

    /// Entry values of the endomorphism at the calculator's point.
    pub fn values_at(&self, calc: &PointCalculus) -> Result<[[f64; 4]; 4], AlmostComplexError> {
        let jets = self.entry_jets(calc, 0)?;
        let mut v = [[0.0; 4]; 4];
        for m in 0..4 {
            for q in 0..4 {
                v[m][q] = jets[m][q].value();
            }
        }
        Ok(v)
    }
}

fn standard_matrix(k: usize) -> Result<[[f64; 4]; 4], AlmostComplexError> {
    match k {
        1 => Ok(crate::alg4::standard_j1()),
        2 => Ok(crate::alg4::standard_j2()),
        3 => Ok(crate::alg4::standard_j3()),
        _ => Err(AlmostComplexError::BadShape),
    }
}

fn require_diagonal(chart: &MetricChart) -> Result<(), AlmostComplexError> {
    if chart.dim != 4 {
        return Err(AlmostComplexError::Chart(ChartError::WrongDimension {
            expected: 4,
            got: chart.dim,
        }));
    }
    let mut probes: Vec<[f64; 4]> = Vec::new();
    for blend in [0.5, 0.37, 0.73] {
        let mut p = [0.0; 4];
        for (axis, &(lo, hi)) in chart.domain.iter().enumerate() {
            p[axis] = lo + blend * (hi - lo);
        }
        probes.push(p);
    }
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            for p in &probes {
                let v = chart.g_entries[i][j].eval_jet(p, 0).map(|j| j.value());
                if let Ok(v) = v {
                    if v.abs() > 1e-12 {
                        return Err(AlmostComplexError::NonDiagonalChart { i, j });
                    }
                }
            }
        }
    }
    Ok(())
}

fn require4(calc: &PointCalculus) -> Result<(), AlmostComplexError> {
    if calc.dim() != 4 {
        return Err(AlmostComplexError::Chart(ChartError::WrongDimension {
            expected: 4,
            got: calc.dim(),
        }));
    }
    Ok(())
}

/// Pointwise defects of a candidate structure: distance of J^2 from
/// minus the identity, of J^t g J from g, and of the fundamental
/// two-form from its self-dual part.
#[derive(Debug, Clone, Copy)]
pub struct AcsDiagnostics {
    /// Largest entry of J^2 + Id.
    pub square_defect: f64,
    /// Largest entry of J^t g J - g.
    pub metric_defect: f64,
    /// Norm of (*w - w) for the fundamental form w, zero exactly when
    /// the structure induces the chart orientation.
    pub orientation_defect: f64,
}

impl AcsDiagnostics {
    /// The worst of the three defects.
    pub fn max_defect(&self) -> f64 {
        self.square_defect
            .max(self.metric_defect)
            .max(self.orientation_defect)
    }
}

/// A two-form value at a point, stored as the full antisymmetric
/// coefficient matrix on coordinate pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoFormValues(pub [[f64; 4]; 4]);

impl TwoFormValues {
    /// The zero form.
    pub fn zero() -> Self {
        TwoFormValues([[0.0; 4]; 4])
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Self) -> Self {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = self.0[i][j] - other.0[i][j];
            }
        }
        TwoFormValues(out)
    }

    /// Entrywise scaling.
    pub fn scale(&self, c: f64) -> Self {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = c * self.0[i][j];
            }
        }
        TwoFormValues(out)
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for row in &self.0 {
            for &v in row {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Coefficient of the coordinate four-form dx0^dx1^dx2^dx3 in the
    /// wedge product with another two-form.
    pub fn wedge_coefficient(&self, other: &Self) -> f64 {
        let a = &self.0;
        let b = &other.0;
        a[0][1] * b[2][3] - a[0][2] * b[1][3] + a[0][3] * b[1][2] + a[2][3] * b[0][1]
            - a[1][3] * b[0][2]
            + a[1][2] * b[0][3]
    }
}

/// Bivector-scale inner product of two coordinate two-forms at the
/// calculator's point.
pub fn two_form_inner(calc: &PointCalculus, a: &TwoFormValues, b: &TwoFormValues) -> f64 {
    let gi = calc.inverse_metric_values();
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    s += a.0[i][j] * b.0[k][l] * gi[i][k] * gi[j][l];
                }
            }
        }
    }
    0.5 * s
}

/// A one-form value at a point, as covector components on coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneForm(pub [f64; 4]);

impl OneForm {
    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Angle data of one structure against a reference: the cosine and the
/// anti-invariant component of the fundamental form, in the
/// orthonormal frame of the calculator.
#[derive(Debug, Clone, Copy)]
pub struct AnglePair {
    /// Half the bivector pairing of the two fundamental forms.
    pub cos_theta: f64,
    /// Fundamental form of the second structure minus cos(theta) times
    /// the reference form; squared norm 2 (1 - cos^2).
    pub h_tilde: Bivector,
}

impl AnglePair {
    /// sin^2(theta), read off the anti-invariant component.
    pub fn sin_squared(&self) -> f64 {
        self.h_tilde.dot(&self.h_tilde) / 2.0
    }
}

/// Inner-product scale used by the transgression one-forms. The
/// two-form scale pairs lowered endomorphisms as bivectors; the
/// skew-trace scale uses the raw endomorphism trace pairing, which is
/// twice as large.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndoPairing {
    /// Bivector pairing of the lowered two-forms (the default; this is
    /// the scale under which the transgression matches the first Chern
    /// difference pointwise).
    TwoForm,
    /// Raw endomorphism trace pairing, twice the two-form scale.
    SkewTrace,
}

impl EndoPairing {
    fn factor(self) -> f64 {
        match self {
            EndoPairing::TwoForm => 1.0,
            EndoPairing::SkewTrace => 2.0,
        }
    }
}

/// Hermitian connection shift of a structure field: the unique
/// metric-compatible correction built from the covariant derivative of
/// the structure that makes the structure parallel.
#[derive(Debug, Clone)]
pub struct HermitianDelta {
    /// Components s[k][i][j] of the correction S^k_ij, with i the
    /// differentiation direction.
    pub components: [[[f64; 4]; 4]; 4],
    /// Torsion components T^k_ij = S^k_ij - S^k_ji of the shifted
    /// connection.
    pub torsion: [[[f64; 4]; 4]; 4],
    /// Largest entry of the covariant derivative of the structure
    /// under the shifted connection.
    pub structure_defect: f64,
    /// Largest symmetric part of the lowered correction, zero exactly
    /// when the shifted connection is metric.
    pub metric_defect: f64,
}

/// Eta two-form of a structure field together with the twisted Ricci
/// form of the base curvature and the resulting first Chern density.
#[derive(Debug, Clone, Copy)]
pub struct EtaChern {
    /// Quarter trace pairing of J (nabla J) against nabla J.
    pub eta: TwoFormValues,
    /// Twisted Ricci form (X, Y) -> <R(X ^ Y), w> of the base
    /// curvature against the fundamental form.
    pub ricci_form: TwoFormValues,
    /// (ricci_form + eta) / 2 pi.
    pub c1: TwoFormValues,
}

/// The two transgression one-forms of a pair of structures.
#[derive(Debug, Clone, Copy)]
pub struct AngleOneForms {
    /// Pairing of the covariant derivative of the anti-invariant part
    /// against its quarter turn, divided by 1 + cos(theta).
    pub t_tilde: OneForm,
    /// Pairing of the covariant derivative of the reference form
    /// against the quarter turn of the anti-invariant part.
    pub g_form: OneForm,
}

/// Exterior derivatives of the transgression one-forms next to the
/// first Chern difference they transgress.
#[derive(Debug, Clone, Copy)]
pub struct TransgressionComparison {
    /// 4 pi (c1 of the second structure minus c1 of the reference).
    pub chern_delta: TwoFormValues,
    /// Exterior derivative of the first transgression one-form.
    pub d_t: TwoFormValues,
    /// Exterior derivative of the second transgression one-form.
    pub d_g: TwoFormValues,
    /// Largest coefficient of chern_delta - d_t - d_g.
    pub max_residual: f64,
}

/// Scalar densities of the angle divergence identity at a point.
#[derive(Debug, Clone, Copy)]
pub struct AngleDivergenceDensities {
    /// Wedge of the first Chern difference with the reference
    /// fundamental form, against the metric volume.
    pub lhs_density: f64,
    /// Divergence of the vector field dual to the first transgression
    /// one-form composed with the reference structure, over 4 pi.
    pub div_t: f64,
    /// Laplacian of cos(theta), over 4 pi.
    pub lap_cos: f64,
    /// Minus the Laplacian of log(1 + cos(theta)), over 4 pi.
    pub laplog: f64,
    /// Largest norm over coordinate directions of the anti-complexity
    /// defect of the anti-invariant section.
    pub anti_complexity_defect: f64,
}

type Mat4J = Vec<Vec<ScalarJet>>;

fn permutation_sign(p: [usize; 4]) -> f64 {
    let mut sign = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] == p[j] {
                return 0.0;
            }
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn coordinate_hodge(
    gi: &[[f64; 4]; 4],
    sqrt_det: f64,
    w: &[[f64; 4]; 4],
) -> [[f64; 4]; 4] {
    let mut up = [[0.0; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            let mut s = 0.0;
            for p in 0..4 {
                for q in 0..4 {
                    s += gi[k][p] * gi[l][q] * w[p][q];
                }
            }
            up[k][l] = s;
        }
    }
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    let eps = permutation_sign([i, j, k, l]);
                    if eps != 0.0 {
                        s += eps * up[k][l];
                    }
                }
            }
            out[i][j] = 0.5 * sqrt_det * s;
        }
    }
    out
}

fn lower_endo_values(g: &[[f64; 4]; 4], j: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut w = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let mut s = 0.0;
            for m in 0..4 {
                s += j[m][i] * g[m][k];
            }
            w[i][k] = s;
        }
    }
    w
}

/// Pointwise structure diagnostics of an endomorphism given by values.
pub fn validate_endomorphism(calc: &PointCalculus, j: &[[f64; 4]; 4]) -> AcsDiagnostics {
    let g = calc.metric_values();
    let gi = calc.inverse_metric_values();

    let mut square: f64 = 0.0;
    for m in 0..4 {
        for q in 0..4 {
            let mut s = 0.0;
            for l in 0..4 {
                s += j[m][l] * j[l][q];
            }
            if m == q {
                s += 1.0;
            }
            square = square.max(s.abs());
        }
    }

    let mut metric: f64 = 0.0;
    for i in 0..4 {
        for k in 0..4 {
            let mut s = -g[i][k];
            for m in 0..4 {
                for n in 0..4 {
                    s += j[m][i] * g[m][n] * j[n][k];
                }
            }
            metric = metric.max(s.abs());
        }
    }

    let w = lower_endo_values(&g, j);
    let sw = coordinate_hodge(&gi, calc.sqrt_det(), &w);
    let diff = TwoFormValues({
        let mut d = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                d[i][k] = sw[i][k] - w[i][k];
            }
        }
        d
    });
    let orientation = two_form_inner(calc, &diff, &diff).abs().sqrt();

    AcsDiagnostics {
        square_defect: square,
        metric_defect: metric,
        orientation_defect: orientation,
    }
}

/// Structure diagnostics of a field at the calculator's point.
pub fn validate_acs(
    calc: &PointCalculus,
    field: &ACSField,
) -> Result<AcsDiagnostics, AlmostComplexError> {
    require4(calc)?;
    let v = field.values_at(calc)?;
    Ok(validate_endomorphism(calc, &v))
}

fn gated_values(
    calc: &PointCalculus,
    field: &ACSField,
) -> Result<[[f64; 4]; 4], AlmostComplexError> {
    let v = field.values_at(calc)?;
    let d = validate_endomorphism(calc, &v);
    if d.max_defect() > ACS_TOL {
        return Err(AlmostComplexError::InvalidStructure {
            defect: d.max_defect(),
        });
    }
    Ok(v)
}

fn hs_value(g: &[[f64; 4]; 4], gi: &[[f64; 4]; 4], a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            for p in 0..4 {
                for q in 0..4 {
                    s += a[m][n] * b[p][q] * g[m][p] * gi[n][q];
                }
            }
        }
    }
    s
}

fn cholesky_rows(calc: &PointCalculus) -> [[f64; 4]; 4] {
    let g = calc.metric_values();
    let fr = calc.frame();
    let mut l = [[0.0; 4]; 4];
    for m in 0..4 {
        for a in 0..4 {
            let mut s = 0.0;
            for q in 0..4 {
                s += g[m][q] * fr[a][q];
            }
            l[m][a] = s;
        }
    }
    l
}

fn frame_bivector(calc: &PointCalculus, j: &[[f64; 4]; 4]) -> Bivector {
    let l = cholesky_rows(calc);
    let fr = calc.frame();
    let mut jf = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for m in 0..4 {
                for q in 0..4 {
                    s += l[m][a] * j[m][q] * fr[b][q];
                }
            }
            jf[a][b] = s;
        }
    }
    bivector_of_skew_endo(&jf)
}

/// Angle decomposition of a structure against a reference at the
/// calculator's point.
pub fn angle_decomposition(
    calc: &PointCalculus,
    reference: &ACSField,
    other: &ACSField,
) -> Result<AnglePair, AlmostComplexError> {
    require4(calc)?;
    let j0 = gated_values(calc, reference)?;
    let j1 = gated_values(calc, other)?;
    let w0 = frame_bivector(calc, &j0);
    let w1 = frame_bivector(calc, &j1);
    let cos_theta = 0.5 * w0.dot(&w1);
    let mut h = [0.0; 6];
    for (i, hi) in h.iter_mut().enumerate() {
        *hi = w1.0[i] - cos_theta * w0.0[i];
    }
    Ok(AnglePair {
        cos_theta,
        h_tilde: Bivector(h),
    })
}

/// Structure on the shortest rotation path from a reference to another
/// structure, at parameter t in [0, 1]. The cosine of the interpolated
/// angle is the linear ramp 1 - t (1 - cos theta).
pub fn homotopy_structure(
    calc: &PointCalculus,
    reference: &ACSField,
    other: &ACSField,
    t: f64,
) -> Result<[[f64; 4]; 4], AlmostComplexError> {
    require4(calc)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(AlmostComplexError::ParameterOutOfRange { t });
    }
    let j0 = gated_values(calc, reference)?;
    let j1 = gated_values(calc, other)?;
    let g = calc.metric_values();
    let gi = calc.inverse_metric_values();
    let c = 0.25 * hs_value(&g, &gi, &j0, &j1);
    if 1.0 + c <= ANTI_COMPLEX_GUARD {
        return Err(AlmostComplexError::AntiComplexPoint { value: 1.0 + c });
    }
    let sin2 = 1.0 - c * c;
    if sin2 <= 1e-24 {
        return Ok(j0);
    }
    let ct = 1.0 - t * (1.0 - c);
    let ratio = ((1.0 - ct * ct) / sin2).sqrt();
    let mut out = [[0.0; 4]; 4];
    for m in 0..4 {
        for q in 0..4 {
            out[m][q] = ct * j0[m][q] + ratio * (j1[m][q] - c * j0[m][q]);
        }
    }
    Ok(out)
}

fn covariant_endo_jets(calc: &PointCalculus, a: &Mat4J) -> Vec<Mat4J> {
    let mut out: Vec<Mat4J> = Vec::with_capacity(4);
    for i in 0..4 {
        let mut slab: Mat4J = Vec::with_capacity(4);
        for m in 0..4 {
            let mut row = Vec::with_capacity(4);
            for q in 0..4 {
                let mut s = a[m][q].partial(i);
                for l in 0..4 {
                    s = s
                        .add(&calc.gamma[m][i][l].mul(&a[l][q]))
                        .sub(&calc.gamma[l][i][q].mul(&a[m][l]));
                }
                row.push(s);
            }
            slab.push(row);
        }
        out.push(slab);
    }
    out
}

fn covariant_form_jets(calc: &PointCalculus, w: &Mat4J) -> Vec<Mat4J> {
    let mut out: Vec<Mat4J> = Vec::with_capacity(4);
    for k in 0..4 {
        let mut slab: Mat4J = Vec::with_capacity(4);
        for i in 0..4 {
            let mut row = Vec::with_capacity(4);
            for j in 0..4 {
                let mut s = w[i][j].partial(k);
                for l in 0..4 {
                    s = s
                        .sub(&calc.gamma[l][k][i].mul(&w[l][j]))
                        .sub(&calc.gamma[l][k][j].mul(&w[i][l]));
                }
                row.push(s);
            }
            slab.push(row);
        }
        out.push(slab);
    }
    out
}

fn endo_mul_jets(a: &Mat4J, b: &Mat4J) -> Mat4J {
    let dim = a[0][0].order().min(b[0][0].order());
    let mut out: Mat4J = Vec::with_capacity(4);
    for m in 0..4 {
        let mut row = Vec::with_capacity(4);
        for q in 0..4 {
            let mut s = ScalarJet::constant(4, dim, 0.0);
            for l in 0..4 {
                s = s.add(&a[m][l].mul(&b[l][q]));
            }
            row.push(s);
        }
        out.push(row);
    }
    out
}

fn lower_endo_jets(calc: &PointCalculus, a: &Mat4J) -> Mat4J {
    let order = a[0][0].order().min(calc.g[0][0].order());
    let mut out: Mat4J = Vec::with_capacity(4);
    for i in 0..4 {
        let mut row = Vec::with_capacity(4);
        for k in 0..4 {
            let mut s = ScalarJet::constant(4, order, 0.0);
            for m in 0..4 {
                s = s.add(&a[m][i].mul(&calc.g[m][k]));
            }
            row.push(s);
        }
        out.push(row);
    }
    out
}

fn hs_pairing_jets(calc: &PointCalculus, a: &Mat4J, b: &Mat4J) -> ScalarJet {
    let order = a[0][0]
        .order()
        .min(b[0][0].order())
        .min(calc.g[0][0].order());
    let mut s = ScalarJet::constant(4, order, 0.0);
    for m in 0..4 {
        for n in 0..4 {
            for p in 0..4 {
                for q in 0..4 {
                    s = s.add(
                        &a[m][n]
                            .mul(&b[p][q])
                            .mul(&calc.g[m][p])
                            .mul(&calc.ginv[n][q]),
                    );
                }
            }
        }
    }
    s
}

fn two_form_pairing_jets(calc: &PointCalculus, a: &Mat4J, b: &Mat4J) -> ScalarJet {
    let order = a[0][0]
        .order()
        .min(b[0][0].order())
        .min(calc.ginv[0][0].order());
    let mut s = ScalarJet::constant(4, order, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    s = s.add(
                        &a[i][j]
                            .mul(&b[k][l])
                            .mul(&calc.ginv[i][k])
                            .mul(&calc.ginv[j][l]),
                    );
                }
            }
        }
    }
    s.scale(0.5)
}

fn anti_invariant_jets(j: &Mat4J, w: &Mat4J) -> Mat4J {
    let mut out: Mat4J = Vec::with_capacity(4);
    for i in 0..4 {
        let mut row = Vec::with_capacity(4);
        for k in 0..4 {
            let mut s = w[i][k].clone();
            for p in 0..4 {
                for q in 0..4 {
                    s = s.sub(&j[p][i].mul(&j[q][k]).mul(&w[p][q]));
                }
            }
            row.push(s.scale(0.5));
        }
        out.push(row);
    }
    out
}

fn jtilde_form_jets(j: &Mat4J, w: &Mat4J) -> Mat4J {
    let order = j[0][0].order().min(w[0][0].order());
    let mut out: Mat4J = Vec::with_capacity(4);
    for i in 0..4 {
        let mut row = Vec::with_capacity(4);
        for k in 0..4 {
            let mut s = ScalarJet::constant(4, order, 0.0);
            for m in 0..4 {
                s = s.sub(&j[m][i].mul(&w[m][k]));
            }
            row.push(s);
        }
        out.push(row);
    }
    out
}

fn form_values(w: &Mat4J) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = w[i][j].value();
        }
    }
    out
}

/// Hermitian connection shift of a structure field at the calculator's
/// point: S(X, Y) = -(1/2) J ((nabla_X J) Y), with the torsion and the
/// preservation defects of the shifted connection.
pub fn hermitian_connection_delta(
    calc: &PointCalculus,
    field: &ACSField,
) -> Result<HermitianDelta, AlmostComplexError> {
    require4(calc)?;
    gated_values(calc, field)?;
    let jjets = field.entry_jets(calc, 3)?;
    let s_jets = hermitian_shift_jets(calc, &jjets);
    let nabla = covariant_endo_jets(calc, &jjets);

    let mut components = [[[0.0; 4]; 4]; 4];
    let mut torsion = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                components[k][i][j] = s_jets[k][i][j].value();
            }
        }
    }
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                torsion[k][i][j] = components[k][i][j] - components[k][j][i];
            }
        }
    }

    let jv = {
        let mut v = [[0.0; 4]; 4];
        for m in 0..4 {
            for q in 0..4 {
                v[m][q] = jjets[m][q].value();
            }
        }
        v
    };
    let mut structure_defect: f64 = 0.0;
    for i in 0..4 {
        for m in 0..4 {
            for q in 0..4 {
                let mut s = nabla[i][m][q].value();
                for l in 0..4 {
                    s += components[m][i][l] * jv[l][q] - jv[m][l] * components[l][i][q];
                }
                structure_defect = structure_defect.max(s.abs());
            }
        }
    }

    let g = calc.metric_values();
    let mut metric_defect: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut s = 0.0;
                for m in 0..4 {
                    s += components[m][i][j] * g[m][k] + components[m][i][k] * g[m][j];
                }
                metric_defect = metric_defect.max(s.abs());
            }
        }
    }

    Ok(HermitianDelta {
        components,
        torsion,
        structure_defect,
        metric_defect,
    })
}

fn hermitian_shift_jets(calc: &PointCalculus, jjets: &Mat4J) -> Jet3 {
    let nabla = covariant_endo_jets(calc, jjets);
    let mut s: Jet3 = vec![vec![vec![ScalarJet::constant(4, 2, 0.0); 4]; 4]; 4];
    for m in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = ScalarJet::constant(4, nabla[i][0][0].order(), 0.0);
                for l in 0..4 {
                    acc = acc.add(&jjets[m][l].mul(&nabla[i][l][j]));
                }
                s[m][i][j] = acc.scale(-0.5);
            }
        }
    }
    s
}

/// Curvature operator of the Hermitian connection of a structure
/// field, in the orthonormal frame of the calculator.
pub fn hermitian_curvature(
    calc: &PointCalculus,
    field: &ACSField,
) -> Result<CurvOp, AlmostComplexError> {
    require4(calc)?;
    gated_values(calc, field)?;
    let jjets = field.entry_jets(calc, 3)?;
    let s = hermitian_shift_jets(calc, &jjets);
    Ok(modified_curvature_from_shift_jets(calc, s)?)
}

fn ricci_form_values(calc: &PointCalculus, w: &[[f64; 4]; 4]) -> TwoFormValues {
    let gi = calc.inverse_metric_values();
    let mut up = [[0.0; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            let mut s = 0.0;
            for p in 0..4 {
                for q in 0..4 {
                    s += gi[k][p] * gi[l][q] * w[p][q];
                }
            }
            up[k][l] = s;
        }
    }
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    s += calc.rc[i][j][k][l].value() * up[k][l];
                }
            }
            out[i][j] = 0.5 * s;
        }
    }
    TwoFormValues(out)
}

/// Eta two-form and first Chern density of a structure field at the
/// calculator's point.
pub fn eta_and_first_chern(
    calc: &PointCalculus,
    field: &ACSField,
) -> Result<EtaChern, AlmostComplexError> {
    require4(calc)?;
    gated_values(calc, field)?;
    let jjets = field.entry_jets(calc, 3)?;
    let nabla = covariant_endo_jets(calc, &jjets);
    let mut jn: Vec<Mat4J> = Vec::with_capacity(4);
    for n in &nabla {
        jn.push(endo_mul_jets(&jjets, n));
    }

    let mut x = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            x[i][j] = hs_pairing_jets(calc, &jn[i], &nabla[j]).value();
        }
    }
    let mut eta = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            eta[i][j] = (x[i][j] - x[j][i]) / 8.0;
        }
    }
    let eta = TwoFormValues(eta);

    let g = calc.metric_values();
    let jv = {
        let mut v = [[0.0; 4]; 4];
        for m in 0..4 {
            for q in 0..4 {
                v[m][q] = jjets[m][q].value();
            }
        }
        v
    };
    let w = lower_endo_values(&g, &jv);
    let ricci_form = ricci_form_values(calc, &w);

    let mut c1 = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c1[i][j] = (ricci_form.0[i][j] + eta.0[i][j]) / (2.0 * PI);
        }
    }
    Ok(EtaChern {
        eta,
        ricci_form,
        c1: TwoFormValues(c1),
    })
}

const REFERENCE_FORMS: [[(usize, usize, f64); 2]; 3] = [
    [(0, 1, 1.0), (2, 3, 1.0)],
    [(0, 2, 1.0), (1, 3, -1.0)],
    [(0, 3, 1.0), (1, 2, 1.0)],
];

fn reference_form_jets(order: usize, c: usize) -> Mat4J {
    let mut w: Mat4J = (0..4)
        .map(|_| (0..4).map(|_| ScalarJet::constant(4, order, 0.0)).collect())
        .collect();
    for &(i, j, v) in &REFERENCE_FORMS[c] {
        w[i][j] = ScalarJet::constant(4, order, v);
        w[j][i] = ScalarJet::constant(4, order, -v);
    }
    w
}

/// Connection one-form of the anti-invariant plane bundle of a
/// structure field, in the unit frame obtained by projecting a fixed
/// reference section. Returns the covector together with the index of
/// the reference actually used; pass that index back in when sampling
/// nearby points so the frame stays smooth.
pub fn ej_connection_form(
    calc: &PointCalculus,
    field: &ACSField,
    reference: Option<usize>,
) -> Result<(OneForm, usize), AlmostComplexError> {
    require4(calc)?;
    gated_values(calc, field)?;
    let jjets = field.entry_jets(calc, 2)?;

    let candidates: Vec<usize> = match reference {
        Some(c) if c < 3 => vec![c],
        Some(_) => return Err(AlmostComplexError::DegenerateFrame),
        None => vec![0, 1, 2],
    };
    let mut best: Option<(usize, Mat4J, f64)> = None;
    for c in candidates {
        let r = reference_form_jets(2, c);
        let u = anti_invariant_jets(&jjets, &r);
        let n2 = two_form_pairing_jets(calc, &u, &u).value();
        if best.as_ref().map_or(true, |(_, _, b)| n2 > *b) {
            best = Some((c, u, n2));
        }
    }
    let (chosen, u, n2) = best.expect("at least one candidate reference");
    if n2.sqrt() < EJ_FRAME_TOL {
        return Err(AlmostComplexError::DegenerateFrame);
    }

    let n2_jet = two_form_pairing_jets(calc, &u, &u);
    let inv_norm = sqrt_jet(&n2_jet)?.reciprocal()?;
    let mut w2: Mat4J = Vec::with_capacity(4);
    for i in 0..4 {
        let mut row = Vec::with_capacity(4);
        for j in 0..4 {
            row.push(u[i][j].mul(&inv_norm));
        }
        w2.push(row);
    }
    let w3 = jtilde_form_jets(&jjets, &w2);
    let nabla_w2 = covariant_form_jets(calc, &w2);

    let mut a = [0.0; 4];
    for (k, ak) in a.iter_mut().enumerate() {
        *ak = two_form_pairing_jets(calc, &nabla_w2[k], &w3).value();
    }
    Ok((OneForm(a), chosen))
}

/// First Chern density of the anti-invariant plane bundle estimated by
/// central differences of its connection one-form, for cross-checking
/// the jet-level density. The reference section is chosen at the base
/// point and reused at every sample point.
pub fn first_chern_fd(
    chart: &MetricChart,
    field: &ACSField,
    x: &[f64],
    step: f64,
) -> Result<TwoFormValues, AlmostComplexError> {
    let calc = chart.calculus_at(x)?;
    let (_, reference) = ej_connection_form(&calc, field, None)?;
    first_chern_fd_with_reference(chart, field, x, step, reference)
}

/// Same finite-difference estimate with an explicit reference section.
pub fn first_chern_fd_with_reference(
    chart: &MetricChart,
    field: &ACSField,
    x: &[f64],
    step: f64,
    reference: usize,
) -> Result<TwoFormValues, AlmostComplexError> {
    let mut plus: Vec<OneForm> = Vec::with_capacity(4);
    let mut minus: Vec<OneForm> = Vec::with_capacity(4);
    for i in 0..4 {
        let mut xp = [x[0], x[1], x[2], x[3]];
        xp[i] += step;
        let calc_p = chart.calculus_at(&xp)?;
        plus.push(ej_connection_form(&calc_p, field, Some(reference))?.0);
        let mut xm = [x[0], x[1], x[2], x[3]];
        xm[i] -= step;
        let calc_m = chart.calculus_at(&xm)?;
        minus.push(ej_connection_form(&calc_m, field, Some(reference))?.0);
    }
    let mut c1 = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let da = (plus[i].0[j] - minus[i].0[j]) / (2.0 * step)
                - (plus[j].0[i] - minus[j].0[i]) / (2.0 * step);
            c1[i][j] = -da / (2.0 * PI);
        }
    }
    Ok(TwoFormValues(c1))
}

struct AngleJets {
    cos: ScalarJet,
    j0: Mat4J,
    hform: Mat4J,
    t: Vec<ScalarJet>,
    g: Vec<ScalarJet>,
}

fn angle_one_form_jets(
    calc: &PointCalculus,
    reference: &ACSField,
    other: &ACSField,
    pairing: EndoPairing,
) -> Result<AngleJets, AlmostComplexError> {
    require4(calc)?;
    gated_values(calc, reference)?;
    gated_values(calc, other)?;
    let j0 = reference.entry_jets(calc, 3)?;
    let j1 = other.entry_jets(calc, 3)?;

    let cos = hs_pairing_jets(calc, &j0, &j1).scale(0.25);
    let denom_value = 1.0 + cos.value();
    if denom_value <= ANTI_COMPLEX_GUARD {
        return Err(AlmostComplexError::AntiComplexPoint { value: denom_value });
    }

    let mut h: Mat4J = Vec::with_capacity(4);
    for m in 0..4 {
        let mut row = Vec::with_capacity(4);
        for q in 0..4 {
            row.push(j1[m][q].sub(&cos.mul(&j0[m][q])));
        }
        h.push(row);
    }
    let hform = lower_endo_jets(calc, &h);
    let kform = lower_endo_jets(calc, &endo_mul_jets(&j0, &h));

    let one = ScalarJet::constant(4, cos.order(), 1.0);
    let inv_denom = one.add(&cos).reciprocal()?;
    let scale = pairing.factor();

    let nabla_h = covariant_form_jets(calc, &hform);
    let w0form = lower_endo_jets(calc, &j0);
    let nabla_w0 = covariant_form_jets(calc, &w0form);

    let mut t = Vec::with_capacity(4);
    let mut gf = Vec::with_capacity(4);
    for k in 0..4 {
        t.push(
            two_form_pairing_jets(calc, &nabla_h[k], &kform)
                .mul(&inv_denom)
                .scale(scale),
        );
        gf.push(two_form_pairing_jets(calc, &nabla_w0[k], &kform).scale(scale));
    }
    Ok(AngleJets {
        cos,
        j0,
        hform,
        t,
        g: gf,
    })
}

/// Transgression one-forms of a pair of structures at the calculator's
/// point.
pub fn transgression_one_forms(
    calc: &PointCalculus,
    reference: &ACSField,
    other: &ACSField,
    pairing: EndoPairing,
) -> Result<AngleOneForms, AlmostComplexError> {
    let aj = angle_one_form_jets(calc, reference, other, pairing)?;
    let mut t = [0.0; 4];
    let mut g = [0.0; 4];
    for k in 0..4 {
        t[k] = aj.t[k].value();
        g[k] = aj.g[k].value();
    }
    Ok(AngleOneForms {
        t_tilde: OneForm(t),
        g_form: OneForm(g),
    })
}

/// Exterior derivatives of the transgression one-forms against the
/// first Chern difference they transgress.
pub fn chern_transgression_comparison(
    calc: &PointCalculus,
    reference: &ACSField,
    other: &ACSField,
    pairing: EndoPairing,
) -> Result<TransgressionComparison, AlmostComplexError> {
    let aj = angle_one_form_jets(calc, reference, other, pairing)?;
    let mut d_t = [[0.0; 4]; 4];
    let mut d_g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            d_t[i][j] = aj.t[j].grad(i) - aj.t[i].grad(j);
            d_g[i][j] = aj.g[j].grad(i) - aj.g[i].grad(j);
        }
    }
    let c0 = eta_and_first_chern(calc, reference)?.c1;
    let c1 = eta_and_first_chern(calc, other)?.c1;
    let chern_delta = c1.sub(&c0).scale(4.0 * PI);
    let d_t = TwoFormValues(d_t);
    let d_g = TwoFormValues(d_g);
    let max_residual = chern_delta.sub(&d_t).sub(&d_g).max_abs();
    Ok(TransgressionComparison {
        chern_delta,
        d_t,
        d_g,
        max_residual,
    })
}

const TRIPLES: [(usize, usize, usize); 4] = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)];

fn one_wedge_two_jets(alpha: &[ScalarJet], beta: &[Vec<ScalarJet>]) -> Vec<ScalarJet> {
    TRIPLES
        .iter()
        .map(|&(p, q, r)| {
            alpha[p]
                .mul(&beta[q][r])
                .sub(&alpha[q].mul(&beta[p][r]))
                .add(&alpha[r].mul(&beta[p][q]))
        })
        .collect()
}

fn d_three_coefficient(c: &[ScalarJet]) -> f64 {
    c[0].grad(0) - c[1].grad(1) + c[2].grad(2) - c[3].grad(3)
}

/// Pointwise residual of the wedge identity linking the product of the
/// two first Chern densities, the averaged Chern squares, and the
/// exterior derivative of the transgression three-form.
pub fn chern_wedge_residual(
    calc: &PointCalculus,
    reference: &ACSField,
    other: &ACSField,
) -> Result<f64, AlmostComplexError> {
    let aj = angle_one_form_jets(calc, reference, other, EndoPairing::TwoForm)?;

    let dt: Vec<Vec<ScalarJet>> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| aj.t[j].partial(i).sub(&aj.t[i].partial(j)))
                .collect()
        })
        .collect();
    let dg: Vec<Vec<ScalarJet>> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| aj.g[j].partial(i).sub(&aj.g[i].partial(j)))
                .collect()
        })
        .collect();

    let t_dt = one_wedge_two_jets(&aj.t, &dt);
    let g_dg = one_wedge_two_jets(&aj.g, &dg);
    let t_dg = one_wedge_two_jets(&aj.t, &dg);
    let xi: Vec<ScalarJet> = (0..4)
        .map(|m| t_dt[m].add(&g_dg[m]).add(&t_dg[m].scale(2.0)))
        .collect();
    let d_xi = d_three_coefficient(&xi);

    let c0 = eta_and_first_chern(calc, reference)?.c1;
    let c1 = eta_and_first_chern(calc, other)?.c1;
    let lhs = c1.wedge_coefficient(&c0) + d_xi / (32.0 * PI * PI);
    let rhs = 0.5 * (c0.wedge_coefficient(&c0) + c1.wedge_coefficient(&c1));
    Ok((lhs - rhs).abs())
}

fn anti_invariant_values(j: &[[f64; 4]; 4], w: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let mut s = w[i][k];
            for p in 0..4 {
                for q in 0..4 {
                    s -= j[p][i] * j[q][k] * w[p][q];
                }
            }
            out[i][k] = 0.5 * s;
        }
    }
    out
}

fn jtilde_values(j: &[[f64; 4]; 4], w: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let mut s = 0.0;
            for m in 0..4 {
                s -= j[m][i] * w[m][k];
            }
            out[i][k] = s;
        }
    }
    out
}

/// Scalar densities of the angle divergence identity at the
/// calculator's point, using the default pairing scale.
pub fn angle_divergence_densities(
    calc: &PointCalculus,
    reference: &ACSField,
    other: &ACSField,
) -> Result<AngleDivergenceDensities, AlmostComplexError> {
    let aj = angle_one_form_jets(calc, reference, other, EndoPairing::TwoForm)?;

    let c0 = eta_and_first_chern(calc, reference)?.c1;
    let c1 = eta_and_first_chern(calc, other)?.c1;
    let w0 = TwoFormValues(form_values(&lower_endo_jets(calc, &aj.j0)));
    let lhs_density = c1.sub(&c0).wedge_coefficient(&w0) / calc.sqrt_det();

    let mut beta: Vec<ScalarJet> = Vec::with_capacity(4);
    for m in 0..4 {
        let mut s = ScalarJet::constant(4, aj.t[0].order(), 0.0);
        for n in 0..4 {
            s = s.add(&aj.t[n].mul(&aj.j0[n][m]));
        }
        beta.push(s);
    }
    let mut v: Vec<ScalarJet> = Vec::with_capacity(4);
    for k in 0..4 {
        let mut s = ScalarJet::constant(4, beta[0].order(), 0.0);
        for m in 0..4 {
            s = s.add(&calc.ginv[k][m].mul(&beta[m]));
        }
        v.push(s);
    }
    let div_t = calc.div_value(&v) / (4.0 * PI);

    let lap_cos = calc.laplacian_jet(&aj.cos).value() / (4.0 * PI);
    let one = ScalarJet::constant(4, aj.cos.order(), 1.0);
    let laplog = -calc.laplacian_jet(&log_jet(&one.add(&aj.cos))?).value() / (4.0 * PI);

    let j0v = form_values(&aj.j0);
    let nabla_h = covariant_form_jets(calc, &aj.hform);
    let nabla_h_values: Vec<[[f64; 4]; 4]> = nabla_h.iter().map(form_values).collect();
    let mut defect: f64 = 0.0;
    for m in 0..4 {
        let mut along_j = [[0.0; 4]; 4];
        for n in 0..4 {
            for i in 0..4 {
                for k in 0..4 {
                    along_j[i][k] += j0v[n][m] * nabla_h_values[n][i][k];
                }
            }
        }
        let p_along = anti_invariant_values(&j0v, &along_j);
        let p_straight = anti_invariant_values(&j0v, &nabla_h_values[m]);
        let rotated = jtilde_values(&j0v, &p_straight);
        let mut d = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                d[i][k] = p_along[i][k] + rotated[i][k];
            }
        }
        let d = TwoFormValues(d);
        defect = defect.max(two_form_inner(calc, &d, &d).abs().sqrt());
    }

    Ok(AngleDivergenceDensities {
        lhs_density,
        div_t,
        lap_cos,
        laplog,
        anti_complexity_defect: defect,
    })
}

/// First Pontrjagin density of the self-dual plane bundle of a
/// curvature operator, as the sum over a self-dual frame of the wedge
/// squares of the twisted Ricci forms.
pub fn p1_selfdual_density(op: &CurvOp) -> f64 {
    let rt = op.transpose();
    let mut s = 0.0;
    for w in [omega1(), omega2(), omega3()] {
        let r = rt.apply(&w);
        s += r.dot(&r.hodge_star());
    }
    s / (4.0 * PI * PI)
}

/// Twisted Ricci form of a frame curvature operator against a
/// structure given by endomorphism values, as a coordinate two-form.
pub fn twisted_ricci_form(
    calc: &PointCalculus,
    op: &CurvOp,
    j: &[[f64; 4]; 4],
) -> TwoFormValues {
    let l = cholesky_rows(calc);
    let w = frame_bivector(calc, j);
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let bi = wedge2(&Vector4(l[i]), &Vector4(l[k]));
            out[i][k] = op.apply(&bi).dot(&w);
        }
    }
    TwoFormValues(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alg4::pair_index;

    fn flat() -> MetricChart {
        MetricChart::flat(4).expect("flat 4-chart")
    }

    fn calc_at(chart: &MetricChart, x: &[f64]) -> PointCalculus {
        chart.calculus_at(x).expect("interior point")
    }

    fn rotation_field(chart: &MetricChart, alpha: f64, beta: f64) -> ACSField {
        ACSField::quaternion_frame(
            "rotated",
            chart,
            [
                Expr::constant(alpha.cos()),
                Expr::constant(alpha.sin() * beta.cos()),
                Expr::constant(alpha.sin() * beta.sin()),
            ],
        )
        .expect("diagonal chart")
    }

    #[test]
    fn standard_structures_validate_on_the_flat_chart() {
        let chart = flat();
        let calc = calc_at(&chart, &[0.3, -0.2, 0.4, 0.1]);
        for k in 1..=3 {
            let field = ACSField::standard(k).expect("index in range");
            let d = validate_acs(&calc, &field).expect("well-formed field");
            assert!(d.max_defect() <= 1e-14, "J{k} defect {}", d.max_defect());
        }
        let mut flipped = [[0.0; 4]; 4];
        flipped[1][0] = 1.0;
        flipped[0][1] = -1.0;
        flipped[3][2] = -1.0;
        flipped[2][3] = 1.0;
        let entries = flipped
            .iter()
            .map(|row| row.iter().map(|&v| Expr::constant(v)).collect())
            .collect();
        let reversed = ACSField::from_components("reversed", entries).expect("shape");
        let d = validate_acs(&calc, &reversed).expect("evaluates");
        assert!(d.square_defect <= 1e-14);
        assert!(d.metric_defect <= 1e-14);
        assert!(
            d.orientation_defect > 2.0,
            "orientation-reversing structure must fail the self-duality screen, got {}",
            d.orientation_defect
        );
    }

    #[test]
    fn frame_structures_are_orthogonal_on_curved_charts() {
        let configs: Vec<(MetricChart, ACSField)> = vec![
            (
                MetricChart::stereo_s4(),
                ACSField::standard(1).expect("index"),
            ),
            (
                MetricChart::kahler4(),
                ACSField::standard(1).expect("index"),
            ),
            (
                MetricChart::kahler4(),
                ACSField::frame_standard(&MetricChart::kahler4(), 2).expect("diagonal"),
            ),
            (
                MetricChart::polar4(),
                ACSField::frame_standard(&MetricChart::polar4(), 3).expect("diagonal"),
            ),
        ];
        for (chart, field) in &configs {
            let calc = calc_at(chart, &[0.25, -0.15, 0.2, 0.1]);
            let d = validate_acs(&calc, field).expect("well-formed field");
            assert!(
                d.max_defect() <= 1e-12,
                "{} on {}: defect {}",
                field.name,
                chart.name,
                d.max_defect()
            );
        }
        let rand_chart = MetricChart::randpoly4(7);
        let err = ACSField::frame_standard(&rand_chart, 1).unwrap_err();
        assert!(matches!(err, AlmostComplexError::NonDiagonalChart { .. }));
    }

    #[test]
    fn angle_decomposition_recovers_rotations() {
        let chart = flat();
        let calc = calc_at(&chart, &[0.1, 0.2, -0.3, 0.05]);
        let j0 = ACSField::standard(1).expect("index");
        let alpha = 0.7;
        let j1 = rotation_field(&chart, alpha, 0.0);
        let pair = angle_decomposition(&calc, &j0, &j1).expect("valid pair");
        assert!((pair.cos_theta - alpha.cos()).abs() <= 1e-14);
        let expected = omega2().scale(alpha.sin());
        for i in 0..6 {
            assert!((pair.h_tilde.0[i] - expected.0[i]).abs() <= 1e-14);
        }
        let w0 = frame_bivector(&calc, &j0.values_at(&calc).expect("values"));
        assert!(pair.h_tilde.dot(&w0).abs() <= 1e-14);
        let norm2 = pair.h_tilde.dot(&pair.h_tilde);
        assert!((norm2 - 2.0 * (1.0 - pair.cos_theta * pair.cos_theta)).abs() <= 1e-14);

        let same = angle_decomposition(&calc, &j0, &j0).expect("valid pair");
        assert!((same.cos_theta - 1.0).abs() <= 1e-14);
        assert!(same.h_tilde.norm() <= 1e-14);

        let j1v = j1.values_at(&calc).expect("values");
        let g = calc.metric_values();
        let h_form = {
            let w1 = lower_endo_values(&g, &j1v);
            let w0v = lower_endo_values(&g, &j0.values_at(&calc).expect("values"));
            let mut h = [[0.0; 4]; 4];
            for i in 0..4 {
                for k in 0..4 {
                    h[i][k] = w1[i][k] - pair.cos_theta * w0v[i][k];
                }
            }
            h
        };
        let j0v = j0.values_at(&calc).expect("values");
        for i in 0..4 {
            for k in 0..4 {
                let mut pulled = 0.0;
                for p in 0..4 {
                    for q in 0..4 {
                        pulled += j0v[p][i] * j0v[q][k] * h_form[p][q];
                    }
                }
                assert!(
                    (pulled + h_form[i][k]).abs() <= 1e-13,
                    "anti-invariance fails at ({i},{k})"
                );
            }
        }
    }

    #[test]
    fn angle_matches_frame_pairs_on_bivector_basis() {
        let chart = flat();
        let calc = calc_at(&chart, &[0.0, 0.0, 0.0, 0.0]);
        let j0 = ACSField::standard(1).expect("index");
        let j1 = ACSField::standard(2).expect("index");
        let pair = angle_decomposition(&calc, &j0, &j1).expect("valid pair");
        assert!(pair.cos_theta.abs() <= 1e-15);
        let (idx, sign) = pair_index(0, 2).expect("pair");
        assert!((pair.h_tilde.0[idx] - sign).abs() <= 1e-14);
    }

    #[test]
    fn homotopy_path_hits_endpoints_and_stays_valid() {
        let chart = MetricChart::kahler4();
        let calc = calc_at(&chart, &[0.2, -0.1, 0.15, 0.25]);
        let j0 = ACSField::standard(1).expect("index");
        let j1 = ACSField::frame_standard(&chart, 2).expect("diagonal");
        let j0v = j0.values_at(&calc).expect("values");
        let j1v = j1.values_at(&calc).expect("values");
        let g = calc.metric_values();
        let gi = calc.inverse_metric_values();
        let c = 0.25 * hs_value(&g, &gi, &j0v, &j1v);

        for &t in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let jt = homotopy_structure(&calc, &j0, &j1, t).expect("interior parameter");
            let d = validate_endomorphism(&calc, &jt);
            assert!(d.max_defect() <= 1e-10, "t={t}: defect {}", d.max_defect());
            let ct = 0.25 * hs_value(&g, &gi, &j0v, &jt);
            assert!(
                (ct - (1.0 - t * (1.0 - c))).abs() <= 1e-12,
                "t={t}: cosine ramp"
            );
        }
        let j_start = homotopy_structure(&calc, &j0, &j1, 0.0).expect("parameter 0");
        let j_end = homotopy_structure(&calc, &j0, &j1, 1.0).expect("parameter 1");
        for m in 0..4 {
            for q in 0..4 {
                assert!((j_start[m][q] - j0v[m][q]).abs() <= 1e-12);
                assert!((j_end[m][q] - j1v[m][q]).abs() <= 1e-12);
            }
        }

        let err = homotopy_structure(&calc, &j0, &j1, 1.2).unwrap_err();
        assert!(matches!(err, AlmostComplexError::ParameterOutOfRange { .. }));

        let flat_chart = flat();
        let flat_calc = calc_at(&flat_chart, &[0.1, 0.0, 0.0, 0.0]);
        let opposite = rotation_field(&flat_chart, std::f64::consts::PI, 0.0);
        let err = homotopy_structure(&flat_calc, &j0, &opposite, 0.5).unwrap_err();
        assert!(matches!(err, AlmostComplexError::AntiComplexPoint { .. }));
    }

    #[test]
    fn hermitian_shift_vanishes_for_parallel_structures() {
        for (chart, name) in [(flat(), "flat"), (MetricChart::kahler4(), "kahler4")] {
            let calc = calc_at(&chart, &[0.2, -0.1, 0.15, 0.25]);
            let field = ACSField::standard(1).expect("index");
            let delta = hermitian_connection_delta(&calc, &field).expect("valid field");
            let mut max_s: f64 = 0.0;
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        max_s = max_s.max(delta.components[k][i][j].abs());
                    }
                }
            }
            assert!(max_s <= 1e-12, "{name}: shift {max_s}");
            assert!(delta.structure_defect <= 1e-12, "{name}");
            assert!(delta.metric_defect <= 1e-12, "{name}");
        }
    }

    #[test]
    fn hermitian_connection_preserves_the_structure() {
        let configs: Vec<(MetricChart, ACSField)> = vec![
            (
                MetricChart::stereo_s4(),
                ACSField::standard(1).expect("index"),
            ),
            (flat(), ACSField::tilted(0.3)),
            (
                MetricChart::kahler4(),
                ACSField::frame_standard(&MetricChart::kahler4(), 2).expect("diagonal"),
            ),
        ];
        for (chart, field) in &configs {
            for x in [[0.25, -0.15, 0.2, 0.1], [-0.1, 0.3, -0.2, 0.15]] {
                let calc = calc_at(chart, &x);
                let delta = hermitian_connection_delta(&calc, field).expect("valid field");
                assert!(
                    delta.structure_defect <= 1e-9,
                    "{} on {}: structure defect {}",
                    field.name,
                    chart.name,
                    delta.structure_defect
                );
                assert!(
                    delta.metric_defect <= 1e-11,
                    "{} on {}: metric defect {}",
                    field.name,
                    chart.name,
                    delta.metric_defect
                );

                let jjets = field.entry_jets(&calc, 3).expect("jets");
                let nabla = covariant_endo_jets(&calc, &jjets);
                let jv = field.values_at(&calc).expect("values");
                for m in 0..4 {
                    for i in 0..4 {
                        for j in 0..4 {
                            let mut alt = 0.0;
                            for l in 0..4 {
                                alt -= 0.5
                                    * jv[m][l]
                                    * (nabla[i][l][j].value() - nabla[j][l][i].value());
                            }
                            assert!(
                                (delta.torsion[m][i][j] - alt).abs() <= 1e-12,
                                "torsion mismatch at ({m},{i},{j})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hermitian_curvature_matches_the_chern_density() {
        let kahler = MetricChart::kahler4();
        let configs: Vec<(MetricChart, ACSField)> = vec![
            (
                MetricChart::stereo_s4(),
                ACSField::standard(1).expect("index"),
            ),
            (flat(), ACSField::tilted(0.3)),
            (kahler.clone(), ACSField::standard(1).expect("index")),
            (
                kahler.clone(),
                ACSField::frame_standard(&kahler, 2).expect("diagonal"),
            ),
        ];
        for (chart, field) in &configs {
            let calc = calc_at(chart, &[0.2, -0.1, 0.15, 0.25]);
            let op = hermitian_curvature(&calc, field).expect("valid field");
            let jv = field.values_at(&calc).expect("values");
            let twisted = twisted_ricci_form(&calc, &op, &jv);
            let chern = eta_and_first_chern(&calc, field).expect("valid field");
            for i in 0..4 {
                for j in 0..4 {
                    assert!(
                        (twisted.0[i][j] - 2.0 * PI * chern.c1.0[i][j]).abs() <= 1e-8,
                        "{} on {}: entry ({i},{j}): {} vs {}",
                        field.name,
                        chart.name,
                        twisted.0[i][j],
                        2.0 * PI * chern.c1.0[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn eta_matches_the_anti_invariant_volume_form() {
        let configs: Vec<(MetricChart, ACSField)> = vec![
            (
                MetricChart::stereo_s4(),
                ACSField::standard(1).expect("index"),
            ),
            (flat(), ACSField::tilted(0.3)),
        ];
        for (chart, field) in &configs {
            let calc = calc_at(chart, &[0.15, -0.2, 0.1, 0.3]);
            let chern = eta_and_first_chern(&calc, field).expect("valid field");

            let jjets = field.entry_jets(&calc, 2).expect("jets");
            let (w2, w3) = {
                let (_, c) = ej_connection_form(&calc, field, None).expect("frame");
                let r = reference_form_jets(2, c);
                let u = anti_invariant_jets(&jjets, &r);
                let n2 = two_form_pairing_jets(&calc, &u, &u);
                let inv = sqrt_jet(&n2).expect("positive").reciprocal().expect("positive");
                let mut w2: Mat4J = Vec::new();
                for i in 0..4 {
                    w2.push((0..4).map(|j| u[i][j].mul(&inv)).collect());
                }
                let w3 = jtilde_form_jets(&jjets, &w2);
                (w2, w3)
            };
            let w0 = lower_endo_jets(&calc, &jjets);
            let nabla_w0 = covariant_form_jets(&calc, &w0);
            for i in 0..4 {
                for j in 0..4 {
                    let a2 = two_form_pairing_jets(&calc, &nabla_w0[i], &w2).value();
                    let a3 = two_form_pairing_jets(&calc, &nabla_w0[i], &w3).value();
                    let b2 = two_form_pairing_jets(&calc, &nabla_w0[j], &w2).value();
                    let b3 = two_form_pairing_jets(&calc, &nabla_w0[j], &w3).value();
                    let vol = 0.5 * (a2 * b3 - a3 * b2);
                    assert!(
                        (chern.eta.0[i][j] - vol).abs() <= 1e-12,
                        "{} on {}: eta ({i},{j}) {} vs volume form {}",
                        field.name,
                        chart.name,
                        chern.eta.0[i][j],
                        vol
                    );
                }
            }
        }

        let kahler = MetricChart::kahler4();
        let calc = calc_at(&kahler, &[0.2, -0.1, 0.15, 0.25]);
        let parallel = ACSField::standard(1).expect("index");
        let chern = eta_and_first_chern(&calc, &parallel).expect("valid field");
        assert!(chern.eta.max_abs() <= 1e-12);
    }

    #[test]
    fn flat_quaternion_eta_is_a_pullback_area_form() {
        let chart = flat();
        let eps = 0.3;
        let field = ACSField::tilted(eps);
        for x in [[0.2, -0.3, 0.4, 0.1], [0.05, 0.15, -0.25, 0.3]] {
            let calc = calc_at(&chart, &x);
            let chern = eta_and_first_chern(&calc, &field).expect("valid field");
            assert!(chern.ricci_form.max_abs() <= 1e-13, "flat curvature");

            let rho2 = x[0] * x[0] + x[1] * x[1];
            let c = (1.0 - eps * eps * rho2).sqrt();
            let f = [c, eps * x[0], -eps * x[1]];
            let df = [
                [-eps * eps * x[0] / c, eps, 0.0],
                [-eps * eps * x[1] / c, 0.0, -eps],
                [0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0],
            ];
            for i in 0..4 {
                for j in 0..4 {
                    let cross = [
                        df[i][1] * df[j][2] - df[i][2] * df[j][1],
                        df[i][2] * df[j][0] - df[i][0] * df[j][2],
                        df[i][0] * df[j][1] - df[i][1] * df[j][0],
                    ];
                    let triple = f[0] * cross[0] + f[1] * cross[1] + f[2] * cross[2];
                    assert!(
                        (chern.eta.0[i][j] - triple).abs() <= 1e-12,
                        "eta ({i},{j}) {} vs triple product {}",
                        chern.eta.0[i][j],
                        triple
                    );
                }
            }
            assert!((chern.eta.0[0][1] - (-eps * eps / c)).abs() <= 1e-12);
        }
    }

    #[test]
    fn finite_differences_confirm_the_chern_density() {
        let kahler = MetricChart::kahler4();
        let configs: Vec<(MetricChart, ACSField)> = vec![
            (kahler.clone(), ACSField::standard(1).expect("index")),
            (
                MetricChart::stereo_s4(),
                ACSField::standard(1).expect("index"),
            ),
            (flat(), ACSField::tilted(0.3)),
        ];
        let x = [0.2, -0.1, 0.15, 0.25];
        for (chart, field) in &configs {
            let calc = chart.calculus_at(&x).expect("interior point");
            let exact = eta_and_first_chern(&calc, field).expect("valid field").c1;
            let fd = first_chern_fd(chart, field, &x, 1e-3).expect("frame");
            for i in 0..4 {
                for j in 0..4 {
                    assert!(
                        (exact.0[i][j] - fd.0[i][j]).abs() <= 1e-5,
                        "{} on {}: c1 ({i},{j}) jet {} vs fd {}",
                        field.name,
                        chart.name,
                        exact.0[i][j],
                        fd.0[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn frame_choice_does_not_change_the_bundle_curvature() {
        let kahler = MetricChart::kahler4();
        let field = ACSField::standard(1).expect("index");
        let x = [0.2, -0.1, 0.15, 0.25];
        let calc = kahler.calculus_at(&x).expect("interior point");

        let err = ej_connection_form(&calc, &field, Some(0)).unwrap_err();
        assert!(matches!(err, AlmostComplexError::DegenerateFrame));

        let (_, chosen) = ej_connection_form(&calc, &field, None).expect("frame");
        assert!(chosen == 1 || chosen == 2);

        let fd1 = first_chern_fd_with_reference(&kahler, &field, &x, 1e-3, 1).expect("frame");
        let fd2 = first_chern_fd_with_reference(&kahler, &field, &x, 1e-3, 2).expect("frame");
        assert!(
            fd1.sub(&fd2).max_abs() <= 1e-6,
            "gauge dependence {}",
            fd1.sub(&fd2).max_abs()
        );
    }

    #[test]
    fn one_forms_vanish_for_constant_pairs() {
        let chart = flat();
        let calc = calc_at(&chart, &[0.3, -0.2, 0.1, 0.4]);
        let j0 = ACSField::standard(1).expect("index");
        let rotated = rotation_field(&chart, 0.9, 0.4);
        let forms =
            transgression_one_forms(&calc, &j0, &rotated, EndoPairing::TwoForm).expect("valid");
        assert!(forms.t_tilde.max_abs() <= 1e-14);
        assert!(forms.g_form.max_abs() <= 1e-14);

        let opposite = rotation_field(&chart, std::f64::consts::PI, 0.0);
        let err =
            transgression_one_forms(&calc, &j0, &opposite, EndoPairing::TwoForm).unwrap_err();
        assert!(matches!(err, AlmostComplexError::AntiComplexPoint { .. }));
    }

    #[test]
    fn transgression_matches_the_chern_difference() {
        let kahler = MetricChart::kahler4();
        let configs: Vec<(MetricChart, ACSField, ACSField)> = vec![
            (
                flat(),
                ACSField::standard(1).expect("index"),
                ACSField::tilted(0.3),
            ),
            (
                kahler.clone(),
                ACSField::standard(1).expect("index"),
                ACSField::frame_standard(&kahler, 2).expect("diagonal"),
            ),
            (
                MetricChart::stereo_s4(),
                ACSField::standard(1).expect("index"),
                rotation_field(&MetricChart::stereo_s4(), 0.9, 0.4),
            ),
        ];
        for (chart, j0, j1) in &configs {
            for x in [[0.2, -0.1, 0.15, 0.25], [-0.15, 0.3, 0.05, -0.2]] {
                let calc = calc_at(chart, &x);
                let cmp = chern_transgression_comparison(&calc, j0, j1, EndoPairing::TwoForm)
                    .expect("valid pair");
                assert!(
                    cmp.max_residual <= 1e-9,
                    "{} vs {} on {}: residual {}",
                    j0.name,
                    j1.name,
                    chart.name,
                    cmp.max_residual
                );
            }
        }

        let (chart, j0, j1) = &configs[0];
        let calc = calc_at(chart, &[0.2, -0.1, 0.15, 0.25]);
        let doubled = chern_transgression_comparison(&calc, j0, j1, EndoPairing::SkewTrace)
            .expect("valid pair");
        assert!(
            doubled.max_residual > 1e-3,
            "the doubled pairing scale must break the pointwise match, residual {}",
            doubled.max_residual
        );
    }

    #[test]
    fn wedge_identity_holds_pointwise() {
        let kahler = MetricChart::kahler4();
        let configs: Vec<(MetricChart, ACSField, ACSField)> = vec![
            (
                flat(),
                ACSField::standard(1).expect("index"),
                ACSField::tilted(0.3),
            ),
            (
                kahler.clone(),
                ACSField::standard(1).expect("index"),
                ACSField::frame_standard(&kahler, 2).expect("diagonal"),
            ),
            (
                MetricChart::stereo_s4(),
                ACSField::standard(1).expect("index"),
                rotation_field(&MetricChart::stereo_s4(), 0.9, 0.4),
            ),
        ];
        for (chart, j0, j1) in &configs {
            let calc = calc_at(chart, &[0.2, -0.1, 0.15, 0.25]);
            let residual = chern_wedge_residual(&calc, j0, j1).expect("valid pair");
            assert!(
                residual <= 1e-9,
                "{} vs {} on {}: residual {residual}",
                j0.name,
                j1.name,
                chart.name
            );
        }
    }

    #[test]
    fn divergence_densities_satisfy_the_chain_identity() {
        let chart = flat();
        let j0 = ACSField::standard(1).expect("index");
        let j1 = ACSField::tilted(0.3);
        for x in [[0.2, -0.3, 0.4, 0.1], [0.35, 0.15, -0.2, 0.05]] {
            let calc = calc_at(&chart, &x);
            let d = angle_divergence_densities(&calc, &j0, &j1).expect("valid pair");
            assert!(
                d.anti_complexity_defect <= 1e-10,
                "tilted field is anti-complex, defect {}",
                d.anti_complexity_defect
            );
            assert!(
                (d.div_t - 2.0 * (d.lap_cos + d.laplog)).abs() <= 1e-8,
                "chain identity: div {} vs laplacians {}",
                d.div_t,
                2.0 * (d.lap_cos + d.laplog)
            );
            assert!(
                (d.lhs_density - d.div_t).abs() <= 1e-9,
                "wedge density {} vs divergence {}",
                d.lhs_density,
                d.div_t
            );
        }

        let kahler = MetricChart::kahler4();
        let calc = calc_at(&kahler, &[0.2, -0.1, 0.15, 0.25]);
        let j1 = ACSField::frame_standard(&kahler, 2).expect("diagonal");
        let d = angle_divergence_densities(&calc, &j0, &j1).expect("valid pair");
        assert!(
            (d.lhs_density - d.div_t).abs() <= 1e-9,
            "parallel reference: wedge density {} vs divergence {}",
            d.lhs_density,
            d.div_t
        );
    }

    #[test]
    fn almost_kahler_scalar_identities_hold_on_the_catalog() {
        for (chart, expected_s) in [
            (MetricChart::kahler4(), 4.0),
            (MetricChart::biaxial4(), 0.0),
            (flat(), 0.0),
        ] {
            let calc = calc_at(&chart, &[0.2, -0.1, 0.15, 0.25]);
            let field = ACSField::standard(1).expect("index");
            let s = calc.scal.value();
            assert!(
                (s - expected_s).abs() <= 1e-10,
                "{}: scalar curvature {s}",
                chart.name
            );

            let jjets = field.entry_jets(&calc, 3).expect("jets");
            let w0 = lower_endo_jets(&calc, &jjets);
            let nabla_w0 = covariant_form_jets(&calc, &w0);
            let gi = calc.inverse_metric_values();
            let mut grad_norm2 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    grad_norm2 += gi[i][j]
                        * two_form_pairing_jets(&calc, &nabla_w0[i], &nabla_w0[j]).value();
                }
            }
            assert!(grad_norm2.abs() <= 1e-12, "{}: parallel form", chart.name);

            let chern = eta_and_first_chern(&calc, &field).expect("valid field");
            let w0v = TwoFormValues(form_values(&w0));
            let s_twisted = 2.0 * two_form_inner(&calc, &chern.ricci_form, &w0v);
            assert!(
                (s_twisted - s).abs() <= 1e-10,
                "{}: twisted scalar {s_twisted} vs {s}",
                chart.name
            );
            let paired = 4.0 * PI * two_form_inner(&calc, &chern.c1, &w0v);
            assert!(
                (paired - (s + 0.5 * grad_norm2)).abs() <= 1e-10,
                "{}: Chern pairing {paired}",
                chart.name
            );
        }
    }

    #[test]
    fn selfdual_pontrjagin_matches_chern_squares_for_parallel_structures() {
        let id = CurvOp::identity();
        assert!((p1_selfdual_density(&id) - 6.0 / (4.0 * PI * PI)).abs() <= 1e-14);

        for chart in [MetricChart::kahler4(), MetricChart::biaxial4(), flat()] {
            let calc = calc_at(&chart, &[0.2, -0.1, 0.15, 0.25]);
            let field = ACSField::standard(1).expect("index");
            let op = calc.riemann_frame().expect("4-chart").op;
            let p1 = p1_selfdual_density(&op);
            let chern = eta_and_first_chern(&calc, &field).expect("valid field");
            let c1_sq = chern.c1.wedge_coefficient(&chern.c1) / calc.sqrt_det();
            assert!(
                (p1 - c1_sq).abs() <= 1e-10,
                "{}: bundle density {p1} vs Chern square {c1_sq}",
                chart.name
            );
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let short = vec![vec![Expr::constant(0.0); 4]; 3];
        assert!(matches!(
            ACSField::from_components("short", short).unwrap_err(),
            AlmostComplexError::BadShape
        ));
        assert!(matches!(
            ACSField::standard(4).unwrap_err(),
            AlmostComplexError::BadShape
        ));

        let chart = flat();
        let calc = calc_at(&chart, &[0.1, 0.2, 0.3, 0.4]);
        let mut entries: Vec<Vec<Expr>> = Vec::new();
        for row in crate::alg4::standard_j1() {
            entries.push(row.iter().map(|&v| Expr::constant(v)).collect());
        }
        entries[0][1] = Expr::constant(-1.0 + 1e-3);
        let crooked = ACSField::from_components("crooked", entries).expect("shape");
        let j0 = ACSField::standard(1).expect("index");
        let err = angle_decomposition(&calc, &j0, &crooked).unwrap_err();
        assert!(matches!(err, AlmostComplexError::InvalidStructure { .. }));
    }
}
