//! Change-of-connection calculus on 4-dimensional charts: connection
//! delta fields, their bivector-valued one-form with its square and
//! exterior derivative, the curvature operator of the shifted
//! connection, and the transgression three-forms whose exterior
//! derivatives carry the change of the Euler and first Pontrjagin
//! densities. The conformal bundle-map machinery built on top of this
//! lives in [`singular`].

pub mod singular;

pub use singular::{
    conformal_bundle_deltas, verify_conformal_bundle_identity, BundleDeltas, ConformalBundleMap,
};

use crate::alg4::{Bivector, CurvOp, Vector4, PAIRS};
use crate::chartgeom::chart::cholesky;
use crate::chartgeom::jetcalc::{frame_contract4, sqrt_jet};
use crate::chartgeom::{ChartError, MetricChart, PointCalculus};
use crate::curvops::{euler_form, pontrjagin_form};
use crate::exprfield::{EvalError, Expr, ScalarJet};
use rand::Rng;
use thiserror::Error;

/// Tolerance for the pointwise metric-compatibility screen on
/// connection delta fields.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

/// Tolerance for the pointwise conformality screen on bundle maps.
pub const CONFORMALITY_TOL: f64 = 1e-10;

/// Conformal factors at or below this value are treated as singular
/// points of a bundle map.
pub const H_MIN: f64 = 1e-6;

/// Coordinate triples complementary to each axis, in ascending order.
/// Entry m omits coordinate m, so the component order of a three-form
/// is [dx234, dx134, dx124, dx123].
const TRIPLES: [(usize, usize, usize); 4] = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)];

const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// Failures of the change-of-connection calculus.
#[derive(Debug, Error)]
pub enum TransgressionError {
    /// A chart-level computation failed.
    #[error(transparent)]
    Chart(#[from] ChartError),
    /// An expression evaluation failed.
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// Component data did not form a 4x4x4 array.
    #[error("delta field components must form a 4x4x4 expression array")]
    BadComponentShape,
    /// Matrix data did not form a 4x4 array.
    #[error("bundle map entries must form a 4x4 expression array")]
    BadMatrixShape,
    /// A delta field failed the metric-compatibility screen where it
    /// was required.
    #[error("delta field is not metric compatible at the point (defect {defect:.3e})")]
    NotMetricCompatible { defect: f64 },
    /// An endomorphism that must be skew was not.
    #[error("endomorphism is not skew (defect {defect:.3e})")]
    NotSkew { defect: f64 },
    /// A bundle map failed the conformality screen at the point.
    #[error("bundle map is not conformal at the point (defect {defect:.3e})")]
    NotConformalMap { defect: f64 },
    /// The conformal factor of a bundle map fell below the singular
    /// guard.
    #[error("conformal factor {h:.3e} is at or below the singular guard {h_min:.1e}")]
    SingularPoint { h: f64, h_min: f64 },
}

/// How a delta field produces its components at a point.
#[derive(Debug, Clone)]
enum DeltaSpec {
    /// Explicit components S^k_ij with the upper index first.
    Components(Vec<Vec<Vec<Expr>>>),
    /// Covariant components c[i][j][k] = g(S(d_i, d_j), d_k), stored
    /// skew in the last two indices so the field is metric compatible
    /// on every chart.
    Covariant(Vec<Vec<Vec<Expr>>>),
    /// The symmetric delta between the Levi-Civita connections of
    /// e^f g and g, synthesized from jets of the potential f.
    Conformal(Expr),
}

/// A pointwise change of metric connection: a bilinear bundle map
/// S(X, Y) added to the covariant derivative. The field is metric
/// compatible when g(S(X, Y), Z) is skew in (Y, Z); operations that
/// need that property screen for it pointwise.
#[derive(Debug, Clone)]
pub struct ConnectionDeltaField {
    /// Display name used in reports.
    pub name: String,
    spec: DeltaSpec,
    /// Whether the field claims metric compatibility. The claim is
    /// re-checked numerically wherever it matters.
    pub metric_compatible: bool,
}

fn shape_ok(c: &[Vec<Vec<Expr>>]) -> bool {
    c.len() == 4 && c.iter().all(|p| p.len() == 4 && p.iter().all(|r| r.len() == 4))
}

impl ConnectionDeltaField {
    /// Builds from explicit components S^k_ij, upper index outermost.
    pub fn from_components(
        name: &str,
        components: Vec<Vec<Vec<Expr>>>,
        metric_compatible: bool,
    ) -> Result<Self, TransgressionError> {
        if !shape_ok(&components) {
            return Err(TransgressionError::BadComponentShape);
        }
        Ok(ConnectionDeltaField {
            name: name.to_string(),
            spec: DeltaSpec::Components(components),
            metric_compatible,
        })
    }

    /// Builds from covariant components c[i][j][k] = g(S(d_i, d_j), d_k).
    /// The data is antisymmetrized over the last two indices, so the
    /// resulting field is metric compatible on any chart it is used on.
    pub fn from_covariant(
        name: &str,
        covariant: Vec<Vec<Vec<Expr>>>,
    ) -> Result<Self, TransgressionError> {
        if !shape_ok(&covariant) {
            return Err(TransgressionError::BadComponentShape);
        }
        let half = Expr::constant(0.5);
        let mut skew = vec![vec![vec![Expr::constant(0.0); 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    skew[i][j][k] = half.clone()
                        * (covariant[i][j][k].clone() - covariant[i][k][j].clone());
                }
            }
        }
        Ok(ConnectionDeltaField {
            name: name.to_string(),
            spec: DeltaSpec::Covariant(skew),
            metric_compatible: true,
        })
    }

    /// The delta between the Levi-Civita connections of e^f g and g:
    /// S(X, Y) = (df(X) Y + df(Y) X - g(X, Y) grad f) / 2. It is
    /// symmetric, hence torsion free, and not metric compatible for g.
    pub fn conformal(name: &str, f: Expr) -> Self {
        ConnectionDeltaField {
            name: name.to_string(),
            spec: DeltaSpec::Conformal(f),
            metric_compatible: false,
        }
    }

    /// The zero field.
    pub fn zero() -> Self {
        let z = vec![vec![vec![Expr::constant(0.0); 4]; 4]; 4];
        ConnectionDeltaField {
            name: "zero".to_string(),
            spec: DeltaSpec::Components(z),
            metric_compatible: true,
        }
    }

    /// S(X, Y) = alpha(X) A(Y) for a fixed covector alpha and a fixed
    /// skew endomorphism A, in constant components. Metric compatible
    /// on flat charts.
    pub fn rank_one(
        name: &str,
        alpha: [f64; 4],
        a: &[[f64; 4]; 4],
    ) -> Result<Self, TransgressionError> {
        let mut defect: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                defect = defect.max((a[i][j] + a[j][i]).abs());
            }
        }
        if defect > COMPATIBILITY_TOL {
            return Err(TransgressionError::NotSkew { defect });
        }
        let mut comps = vec![vec![vec![Expr::constant(0.0); 4]; 4]; 4];
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    comps[k][i][j] = Expr::constant(alpha[i] * a[k][j]);
                }
            }
        }
        Ok(ConnectionDeltaField {
            name: name.to_string(),
            spec: DeltaSpec::Components(comps),
            metric_compatible: true,
        })
    }

    /// A random polynomial field in covariant form, metric compatible
    /// on every chart by construction.
    pub fn random_covariant(name: &str, rng: &mut impl Rng) -> Self {
        let mut cov = vec![vec![vec![Expr::constant(0.0); 4]; 4]; 4];
        for i in 0..4 {
            for (j, k) in PAIRS {
                let mut e = Expr::constant(rng.gen_range(-0.35..0.35));
                for m in 0..4 {
                    e = e + Expr::constant(rng.gen_range(-0.35..0.35)) * Expr::var(m);
                }
                let p = rng.gen_range(0..4);
                let q = rng.gen_range(0..4);
                e = e + Expr::constant(rng.gen_range(-0.25..0.25)) * Expr::var(p) * Expr::var(q);
                cov[i][j][k] = e;
            }
        }
        Self::from_covariant(name, cov).expect("generated covariant data is 4x4x4")
    }

    /// Order-`order` jets of the components S^k_ij at the calculator's
    /// point, upper index outermost.
    pub fn component_jets(
        &self,
        calc: &PointCalculus,
        order: usize,
    ) -> Result<Jet3, TransgressionError> {
        require_dim4(calc)?;
        match &self.spec {
            DeltaSpec::Components(c) => {
                let mut s = empty_jet3(order);
                for k in 0..4 {
                    for i in 0..4 {
                        for j in 0..4 {
                            s[k][i][j] = calc.scalar_jet(&c[k][i][j], order)?;
                        }
                    }
                }
                Ok(s)
            }
            DeltaSpec::Covariant(c) => {
                let mut cov = empty_jet3(order);
                for i in 0..4 {
                    for j in 0..4 {
                        for k in 0..4 {
                            cov[i][j][k] = calc.scalar_jet(&c[i][j][k], order)?;
                        }
                    }
                }
                let mut s = empty_jet3(order);
                for m in 0..4 {
                    for i in 0..4 {
                        for j in 0..4 {
                            let mut t = ScalarJet::constant(4, order, 0.0);
                            for k in 0..4 {
                                t = t.add(&calc.ginv[m][k].mul(&cov[i][j][k]));
                            }
                            s[m][i][j] = t.truncated(order);
                        }
                    }
                }
                Ok(s)
            }
            DeltaSpec::Conformal(f) => {
                let fj = calc.scalar_jet(f, (order + 1).min(3))?;
                Ok(conformal_delta_jets(calc, &fj, order))
            }
        }
    }

    /// Pointwise compatibility defect max |g(S(X,Y),Z) + g(S(X,Z),Y)|
    /// over coordinate basis slots, relative to the component scale.
    pub fn compatibility_defect(&self, calc: &PointCalculus) -> Result<f64, TransgressionError> {
        let s = self.component_jets(calc, 0)?;
        Ok(compatibility_defect_values(calc, &s))
    }
}

/// Jets of a three-index component array, indexed [k][i][j].
pub type Jet3 = Vec<Vec<Vec<ScalarJet>>>;
type Jet4 = Vec<Vec<Vec<Vec<ScalarJet>>>>;

fn empty_jet3(order: usize) -> Jet3 {
    vec![vec![vec![ScalarJet::constant(4, order, 0.0); 4]; 4]; 4]
}

fn require_dim4(calc: &PointCalculus) -> Result<(), TransgressionError> {
    if calc.dim() != 4 {
        return Err(TransgressionError::Chart(ChartError::WrongDimension {
            expected: 4,
            got: calc.dim(),
        }));
    }
    Ok(())
}

/// Delta of the Levi-Civita connections of e^(2 jet of f)... see
/// [`ConnectionDeltaField::conformal`]; shared with the bundle-map
/// machinery, which feeds the jet of log h here.
pub(crate) fn conformal_delta_jets(calc: &PointCalculus, fj: &ScalarJet, order: usize) -> Jet3 {
    let gf = calc.grad_jets(fj);
    let mut s = empty_jet3(order);
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                let mut t = ScalarJet::constant(4, order, 0.0);
                if k == j {
                    t = t.add(&fj.partial(i));
                }
                if k == i {
                    t = t.add(&fj.partial(j));
                }
                t = t.sub(&calc.g[i][j].mul(&gf[k]));
                s[k][i][j] = t.scale(0.5).truncated(order);
            }
        }
    }
    s
}

fn compatibility_defect_values(calc: &PointCalculus, s: &Jet3) -> f64 {
    let g = calc.metric_values();
    let mut scov = [[[0.0; 4]; 4]; 4];
    let mut scale: f64 = 1.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut t = 0.0;
                for m in 0..4 {
                    t += s[m][i][j].value() * g[m][k];
                }
                scov[i][j][k] = t;
                scale = scale.max(t.abs());
            }
        }
    }
    let mut defect: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                defect = defect.max((scov[i][j][k] + scov[i][k][j]).abs());
            }
        }
    }
    defect / scale
}

fn check_compatibility(calc: &PointCalculus, s: &Jet3) -> Result<(), TransgressionError> {
    let defect = compatibility_defect_values(calc, s);
    if defect > COMPATIBILITY_TOL {
        return Err(TransgressionError::NotMetricCompatible { defect });
    }
    Ok(())
}

/// Torsion values T^k_ij = S^k_ij - S^k_ji of a delta field added to a
/// torsion-free connection, in coordinate components.
#[derive(Debug, Clone)]
pub struct TorsionValues {
    /// Components T^k_ij with the upper index outermost.
    pub components: [[[f64; 4]; 4]; 4],
}

impl TorsionValues {
    /// Applies the torsion to two coordinate-component vectors.
    pub fn apply(&self, x: &Vector4, y: &Vector4) -> Vector4 {
        let mut out = Vector4::zero();
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    out.0[k] += self.components[k][i][j] * x.0[i] * y.0[j];
                }
            }
        }
        out
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for p in &self.components {
            for r in p {
                for &v in r {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }
}

/// Torsion of the connection shifted by a delta field, at the
/// calculator's point.
pub fn torsion_of(
    calc: &PointCalculus,
    field: &ConnectionDeltaField,
) -> Result<TorsionValues, TransgressionError> {
    let s = field.component_jets(calc, 0)?;
    let mut components = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                components[k][i][j] = s[k][i][j].value() - s[k][j][i].value();
            }
        }
    }
    Ok(TorsionValues { components })
}

/// The jet-level tensors of a delta field needed by the transgression
/// machinery: the components themselves, the paired exterior
/// derivative of the bivector-valued one-form, and both pairings of
/// its square.
struct DeltaTensors {
    s: Jet3,
    /// d4[i][j][k][l] = g(dS(d_i, d_j) d_k, d_l) with dS the exterior
    /// covariant derivative of X -> S(X, .) in the base connection.
    d4: Jet4,
    /// Bivector pairing of the square,
    /// g(S(d_i, d_k), S(d_j, d_l)) - g(S(d_i, d_l), S(d_j, d_k));
    /// equals the endomorphism pairing when the field is compatible.
    s2_pair: Jet4,
    /// Endomorphism pairing g(S(d_i, S(d_j, d_k)) - S(d_j, S(d_i, d_k)), d_l),
    /// valid without compatibility.
    s2_endo: Jet4,
}

fn delta_tensors_from_jets(
    calc: &PointCalculus,
    s: Jet3,
) -> Result<DeltaTensors, TransgressionError> {
    require_dim4(calc)?;
    let order = s[0][0][0].order();
    assert!(order >= 1, "delta tensors need component jets of order >= 1");
    let o1 = order - 1;
    let zero1 = || ScalarJet::constant(4, o1, 0.0);
    let zero0 = || ScalarJet::constant(4, order, 0.0);

    let mut ns = vec![vec![vec![vec![zero1(); 4]; 4]; 4]; 4];
    for i in 0..4 {
        for m in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let mut t = s[m][j][k].partial(i);
                    for l in 0..4 {
                        t = t
                            .add(&calc.gamma[m][i][l].mul(&s[l][j][k]))
                            .sub(&calc.gamma[l][i][j].mul(&s[m][l][k]))
                            .sub(&calc.gamma[l][i][k].mul(&s[m][j][l]));
                    }
                    ns[i][m][j][k] = t.truncated(o1);
                }
            }
        }
    }

    let mut d4 = vec![vec![vec![vec![zero1(); 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut t = zero1();
                    for m in 0..4 {
                        t = t.add(&calc.g[l][m].mul(&ns[i][m][j][k].sub(&ns[j][m][i][k])));
                    }
                    d4[i][j][k][l] = t.truncated(o1);
                }
            }
        }
    }

    let mut scov = vec![vec![vec![zero0(); 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for n in 0..4 {
                let mut t = zero0();
                for m in 0..4 {
                    t = t.add(&s[m][i][j].mul(&calc.g[m][n]));
                }
                scov[i][j][n] = t.truncated(order);
            }
        }
    }

    let mut s2_pair = vec![vec![vec![vec![zero0(); 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut t = zero0();
                    for n in 0..4 {
                        t = t
                            .add(&scov[i][k][n].mul(&s[n][j][l]))
                            .sub(&scov[i][l][n].mul(&s[n][j][k]));
                    }
                    s2_pair[i][j][k][l] = t.truncated(order);
                }
            }
        }
    }

    let mut s2_endo = vec![vec![vec![vec![zero0(); 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut comp = vec![zero0(); 4];
                for m in 0..4 {
                    let mut t = zero0();
                    for p in 0..4 {
                        t = t
                            .add(&s[m][i][p].mul(&s[p][j][k]))
                            .sub(&s[m][j][p].mul(&s[p][i][k]));
                    }
                    comp[m] = t;
                }
                for l in 0..4 {
                    let mut t = zero0();
                    for m in 0..4 {
                        t = t.add(&calc.g[l][m].mul(&comp[m]));
                    }
                    s2_endo[i][j][k][l] = t.truncated(order);
                }
            }
        }
    }

    Ok(DeltaTensors {
        s,
        d4,
        s2_pair,
        s2_endo,
    })
}

fn delta_tensors(
    calc: &PointCalculus,
    field: &ConnectionDeltaField,
    order: usize,
) -> Result<DeltaTensors, TransgressionError> {
    let s = field.component_jets(calc, order)?;
    delta_tensors_from_jets(calc, s)
}

/// Jet Cholesky frame of the calculator's metric: lower-triangular L
/// with g = L Lt and its inverse B, whose rows are the orthonormal
/// frame in coordinate components. Jets carry order 1.
struct FrameJets {
    l: Vec<Vec<ScalarJet>>,
    b: Vec<Vec<ScalarJet>>,
}

fn frame_jets(calc: &PointCalculus) -> Result<FrameJets, TransgressionError> {
    let order = 1;
    let zero = || ScalarJet::constant(4, order, 0.0);
    let mut l = vec![vec![zero(); 4]; 4];
    for j in 0..4 {
        let mut diag = calc.g[j][j].truncated(order);
        for k in 0..j {
            diag = diag.sub(&l[j][k].mul(&l[j][k]));
        }
        l[j][j] = sqrt_jet(&diag)?;
        for i in (j + 1)..4 {
            let mut t = calc.g[i][j].truncated(order);
            for k in 0..j {
                t = t.sub(&l[i][k].mul(&l[j][k]));
            }
            l[i][j] = t.div(&l[j][j])?;
        }
    }
    let mut b = vec![vec![zero(); 4]; 4];
    for a in 0..4 {
        b[a][a] = l[a][a].reciprocal()?;
        for i in (0..a).rev() {
            let mut t = zero();
            for k in (i + 1)..=a {
                t = t.add(&b[a][k].mul(&l[k][i]));
            }
            b[a][i] = t.div(&l[i][i])?.neg();
        }
    }
    Ok(FrameJets { l, b })
}

/// The bivector calculus of a compatible delta field at a point: the
/// frame images of the bivector-valued one-form X -> S(X, .), the
/// operator of its square, and the operator of its exterior covariant
/// derivative, all in the orthonormal frame.
#[derive(Debug, Clone)]
pub struct SCalculus {
    /// Images of the four frame vectors under the bivector-valued
    /// one-form.
    pub cal_s: [Bivector; 4],
    /// Operator pairing of the squared one-form.
    pub cal_s2: CurvOp,
    /// Operator pairing of the exterior covariant derivative.
    pub d_cal_s: CurvOp,
}

impl SCalculus {
    /// Image of a frame-component vector under the one-form.
    pub fn cal_s_of(&self, v: &Vector4) -> Bivector {
        let mut out = Bivector::zero();
        for a in 0..4 {
            out = out + self.cal_s[a].scale(v.0[a]);
        }
        out
    }
}

/// Computes the bivector calculus of a metric-compatible delta field.
pub fn cal_s_and_squares(
    calc: &PointCalculus,
    field: &ConnectionDeltaField,
) -> Result<SCalculus, TransgressionError> {
    let dt = delta_tensors(calc, field, 1)?;
    check_compatibility(calc, &dt.s)?;
    let frame = calc.frame();
    let g = calc.metric_values();

    let mut sv = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                sv[k][i][j] = dt.s[k][i][j].value();
            }
        }
    }
    let mut scov = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for n in 0..4 {
                let mut t = 0.0;
                for m in 0..4 {
                    t += sv[m][i][j] * g[m][n];
                }
                scov[i][j][n] = t;
            }
        }
    }
    let mut cal_s = [Bivector::zero(); 4];
    for a in 0..4 {
        let mut comps = [0.0; 6];
        for (p, &(bb, cc)) in PAIRS.iter().enumerate() {
            let mut t = 0.0;
            for i in 0..4 {
                for m in 0..4 {
                    for n in 0..4 {
                        t += frame[a][i] * frame[bb][m] * scov[i][m][n] * frame[cc][n];
                    }
                }
            }
            comps[p] = t;
        }
        cal_s[a] = Bivector(comps);
    }

    let mut s2v = [[[[0.0; 4]; 4]; 4]; 4];
    let mut d4v = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    s2v[i][j][k][l] = dt.s2_pair[i][j][k][l].value();
                    d4v[i][j][k][l] = dt.d4[i][j][k][l].value();
                }
            }
        }
    }
    Ok(SCalculus {
        cal_s,
        cal_s2: CurvOp::from_entries(frame_contract4(&s2v, frame)),
        d_cal_s: CurvOp::from_entries(frame_contract4(&d4v, frame)),
    })
}

/// Curvature operator of the connection shifted by a delta field, in
/// the orthonormal frame: the base operator minus the exterior
/// covariant derivative of the one-form minus its square, with the
/// endomorphism pairing, so no compatibility is required. For
/// incompatible fields the result is the metric pairing of the
/// endomorphism-valued curvature.
pub fn modified_curvature(
    calc: &PointCalculus,
    field: &ConnectionDeltaField,
) -> Result<CurvOp, TransgressionError> {
    let dt = delta_tensors(calc, field, 1)?;
    modified_curvature_from(calc, &dt)
}

fn modified_curvature_from(
    calc: &PointCalculus,
    dt: &DeltaTensors,
) -> Result<CurvOp, TransgressionError> {
    let mut t4 = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    t4[i][j][k][l] = calc.rc[i][j][k][l].value()
                        - dt.d4[i][j][k][l].value()
                        - dt.s2_endo[i][j][k][l].value();
                }
            }
        }
    }
    Ok(CurvOp::from_entries(frame_contract4(&t4, calc.frame())))
}

/// Curvature operator of a shifted connection whose delta field is
/// given directly as component jets s[k][i][j] of order at least one,
/// for callers that build the shift numerically rather than from
/// expressions.
pub(crate) fn modified_curvature_from_shift_jets(
    calc: &PointCalculus,
    s: Jet3,
) -> Result<CurvOp, TransgressionError> {
    let dt = delta_tensors_from_jets(calc, s)?;
    modified_curvature_from(calc, &dt)
}

/// A three-form value at a point, stored as the coefficients on the
/// coordinate dual basis in the order [dx234, dx134, dx124, dx123]
/// (entry m omits coordinate m+1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeForm {
    /// Coefficients in the fixed component order.
    pub components: [f64; 4],
}

impl ThreeForm {
    /// The zero form.
    pub fn zero() -> Self {
        ThreeForm {
            components: [0.0; 4],
        }
    }

    /// Value on three coordinate-component vectors.
    pub fn eval(&self, x: &Vector4, y: &Vector4, z: &Vector4) -> f64 {
        let mut total = 0.0;
        for (m, &(a, b, c)) in TRIPLES.iter().enumerate() {
            let det = x.0[a] * (y.0[b] * z.0[c] - y.0[c] * z.0[b])
                - x.0[b] * (y.0[a] * z.0[c] - y.0[c] * z.0[a])
                + x.0[c] * (y.0[a] * z.0[b] - y.0[b] * z.0[a]);
            total += self.components[m] * det;
        }
        total
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// The alternating pairing of a bivector-valued one-form with a
/// bivector-valued two-form given by an operator in the same
/// orthonormal basis: on (X, Y, Z) the value is
/// (zeta(X), R(Y wedge Z)) + (zeta(Z), R(X wedge Y)) + (zeta(Y), R(Z wedge X)).
/// Inputs and the component basis of the result refer to that same
/// orthonormal basis.
pub fn zeta_wedge(zeta: &[Bivector; 4], r: &CurvOp) -> ThreeForm {
    let value = |x: usize, y: usize, z: usize| {
        zeta[x].dot(&r.apply(&Bivector::basis(y, z)))
            + zeta[z].dot(&r.apply(&Bivector::basis(x, y)))
            + zeta[y].dot(&r.apply(&Bivector::basis(z, x)))
    };
    let mut components = [0.0; 4];
    for (m, &(a, b, c)) in TRIPLES.iter().enumerate() {
        components[m] = value(a, b, c);
    }
    ThreeForm { components }
}

/// The pair of transgression three-forms of a compatible delta field.
/// Adding the exterior derivative of `t_euler` to the Euler density of
/// the shifted connection recovers the base Euler density, and
/// likewise for `t_p1` and the first Pontrjagin density.
#[derive(Debug, Clone, Copy)]
pub struct TransgressionForms {
    /// Transgression of the Euler density.
    pub t_euler: ThreeForm,
    /// Transgression of the first Pontrjagin density.
    pub t_p1: ThreeForm,
}

/// Component jets of the two transgression forms, order 1.
struct FormJets {
    euler: [ScalarJet; 4],
    p1: [ScalarJet; 4],
}

fn transgression_form_jets(
    calc: &PointCalculus,
    dt: &DeltaTensors,
) -> Result<FormJets, TransgressionError> {
    let fr = frame_jets(calc)?;
    let zero = || ScalarJet::constant(4, 1, 0.0);

    let mut sl = vec![vec![vec![zero(); 4]; 4]; 4];
    for j in 0..4 {
        for m in 0..4 {
            for c in 0..4 {
                let mut t = zero();
                for q in c..4 {
                    t = t.add(&dt.s[q][j][m].mul(&fr.l[q][c]));
                }
                sl[j][m][c] = t;
            }
        }
    }
    let mut zf = vec![vec![zero(); 6]; 4];
    for j in 0..4 {
        for (p, &(bb, cc)) in PAIRS.iter().enumerate() {
            let mut t = zero();
            for m in 0..=bb {
                t = t.add(&fr.b[bb][m].mul(&sl[j][m][cc]));
            }
            zf[j][p] = t;
        }
    }

    let mut m4 = vec![vec![vec![vec![zero(); 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    m4[i][j][k][l] = calc.rc[i][j][k][l]
                        .sub(&dt.d4[i][j][k][l].scale(0.5))
                        .sub(&dt.s2_pair[i][j][k][l].scale(1.0 / 3.0));
                }
            }
        }
    }

    let mut u = vec![vec![vec![zero(); 6]; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            if k == l {
                continue;
            }
            let mut v = vec![vec![zero(); 4]; 4];
            for m in 0..4 {
                for bb in 0..4 {
                    let mut t = zero();
                    for n in 0..=bb {
                        t = t.add(&m4[k][l][m][n].mul(&fr.b[bb][n]));
                    }
                    v[m][bb] = t;
                }
            }
            for (p, &(aa, bb)) in PAIRS.iter().enumerate() {
                let mut t = zero();
                for m in 0..=aa {
                    t = t.add(&fr.b[aa][m].mul(&v[m][bb]));
                }
                u[k][l][p] = t;
            }
        }
    }

    let dot6 = |a: &[ScalarJet], b: &[ScalarJet]| {
        let mut t = ScalarJet::constant(4, 1, 0.0);
        for p in 0..6 {
            t = t.add(&a[p].mul(&b[p]));
        }
        t
    };
    let hodge6 = |a: &[ScalarJet]| {
        vec![
            a[5].clone(),
            a[4].neg(),
            a[3].clone(),
            a[2].clone(),
            a[1].neg(),
            a[0].clone(),
        ]
    };

    let mut euler = [
        ScalarJet::constant(4, 1, 0.0),
        ScalarJet::constant(4, 1, 0.0),
        ScalarJet::constant(4, 1, 0.0),
        ScalarJet::constant(4, 1, 0.0),
    ];
    let mut p1 = euler.clone();
    for (m, &(x, y, z)) in TRIPLES.iter().enumerate() {
        let star_sum = dot6(&zf[x], &hodge6(&u[y][z]))
            .add(&dot6(&zf[z], &hodge6(&u[x][y])))
            .add(&dot6(&zf[y], &hodge6(&u[z][x])));
        let plain_sum = dot6(&zf[x], &u[y][z])
            .add(&dot6(&zf[z], &u[x][y]))
            .add(&dot6(&zf[y], &u[z][x]));
        euler[m] = star_sum.scale(1.0 / (4.0 * PI2));
        p1[m] = plain_sum.scale(1.0 / (2.0 * PI2));
    }
    Ok(FormJets { euler, p1 })
}

/// Transgression forms of a compatible delta field at the calculator's
/// point.
pub fn transgression_forms(
    calc: &PointCalculus,
    field: &ConnectionDeltaField,
) -> Result<TransgressionForms, TransgressionError> {
    let dt = delta_tensors(calc, field, 1)?;
    check_compatibility(calc, &dt.s)?;
    let fj = transgression_form_jets(calc, &dt)?;
    Ok(TransgressionForms {
        t_euler: ThreeForm {
            components: [
                fj.euler[0].value(),
                fj.euler[1].value(),
                fj.euler[2].value(),
                fj.euler[3].value(),
            ],
        },
        t_p1: ThreeForm {
            components: [
                fj.p1[0].value(),
                fj.p1[1].value(),
                fj.p1[2].value(),
                fj.p1[3].value(),
            ],
        },
    })
}

/// Transgression forms computed the long way, as a Gauss-Legendre
/// quadrature in the interpolation parameter of the connection family:
/// the t-integral of the characteristic-density flux of the family
/// whose curvature interpolates between the base and shifted
/// operators. The integrand is quadratic in t, so the result matches
/// [`transgression_forms`] to roundoff for any rule of 2 or more
/// points; the default batteries use 64.
pub fn transgression_t_quadrature(
    calc: &PointCalculus,
    field: &ConnectionDeltaField,
    points: usize,
) -> Result<TransgressionForms, TransgressionError> {
    let dt = delta_tensors(calc, field, 1)?;
    check_compatibility(calc, &dt.s)?;
    let frame = calc.frame();
    let g = calc.metric_values();
    let mut gv = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            gv[i][j] = g[i][j];
        }
    }
    let l = cholesky(&gv, 4).ok_or(ChartError::NotPositiveDefinite {
        eigenvalue: 0.0,
        point: calc.point(),
    })?;

    let mut sv = [[[0.0; 4]; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                sv[k][i][j] = dt.s[k][i][j].value();
            }
        }
    }
    let mut rcv = [[[[0.0; 4]; 4]; 4]; 4];
    let mut d4v = [[[[0.0; 4]; 4]; 4]; 4];
    let mut s2v = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for m in 0..4 {
                    rcv[i][j][k][m] = calc.rc[i][j][k][m].value();
                    d4v[i][j][k][m] = dt.d4[i][j][k][m].value();
                    s2v[i][j][k][m] = dt.s2_pair[i][j][k][m].value();
                }
            }
        }
    }

    let mut zf = [[0.0; 6]; 4];
    for j in 0..4 {
        for (p, &(bb, cc)) in PAIRS.iter().enumerate() {
            let mut t = 0.0;
            for m in 0..4 {
                for q in 0..4 {
                    t += frame[bb][m] * sv[q][j][m] * l[q][cc];
                }
            }
            zf[j][p] = t;
        }
    }

    let u_at = |t: f64| {
        let mut u = [[[0.0; 6]; 4]; 4];
        for k in 0..4 {
            for lx in 0..4 {
                if k == lx {
                    continue;
                }
                for (p, &(aa, bb)) in PAIRS.iter().enumerate() {
                    let mut acc = 0.0;
                    for m in 0..4 {
                        for n in 0..4 {
                            let mt = rcv[k][lx][m][n]
                                - t * d4v[k][lx][m][n]
                                - t * t * s2v[k][lx][m][n];
                            acc += frame[aa][m] * mt * frame[bb][n];
                        }
                    }
                    u[k][lx][p] = acc;
                }
            }
        }
        u
    };
    let dot = |a: &[f64; 6], b: &[f64; 6]| (0..6).map(|p| a[p] * b[p]).sum::<f64>();
    let star = |a: &[f64; 6]| [a[5], -a[4], a[3], a[2], -a[1], a[0]];

    let (xs, ws) = crate::chartgeom::quad::gauss_legendre_nodes(points);
    let mut eu = [0.0; 4];
    let mut p1 = [0.0; 4];
    for (&xn, &wn) in xs.iter().zip(ws.iter()) {
        let t = 0.5 * (xn + 1.0);
        let w = 0.5 * wn;
        let u = u_at(t);
        for (m, &(x, y, z)) in TRIPLES.iter().enumerate() {
            let star_sum = dot(&zf[x], &star(&u[y][z]))
                + dot(&zf[z], &star(&u[x][y]))
                + dot(&zf[y], &star(&u[z][x]));
            let plain_sum =
                dot(&zf[x], &u[y][z]) + dot(&zf[z], &u[x][y]) + dot(&zf[y], &u[z][x]);
            eu[m] += w * star_sum / (4.0 * PI2);
            p1[m] += w * plain_sum / (2.0 * PI2);
        }
    }
    Ok(TransgressionForms {
        t_euler: ThreeForm { components: eu },
        t_p1: ThreeForm { components: p1 },
    })
}

/// Exterior derivative of a three-form field at a point, as a density
/// relative to the metric volume. The field supplies order-1 component
/// jets in the fixed component order; the derivative is the
/// alternating sum of coordinate partials divided by sqrt(det g).
pub fn d_threeform<F>(
    chart: &MetricChart,
    components: F,
    x: &[f64],
) -> Result<crate::alg4::FourFormDensity, ChartError>
where
    F: Fn(&[f64]) -> Result<[ScalarJet; 4], ChartError>,
{
    let j = components(x)?;
    let coord = j[0].grad(0) - j[1].grad(1) + j[2].grad(2) - j[3].grad(3);
    Ok(crate::alg4::FourFormDensity::new(
        coord / chart.sqrt_det_at(x)?,
    ))
}

/// Residuals of the two transgression identities at a point.
#[derive(Debug, Clone, Copy)]
pub struct TransgressionResiduals {
    /// Euler-density identity residual.
    pub euler: f64,
    /// Pontrjagin-density identity residual.
    pub p1: f64,
}

impl TransgressionResiduals {
    /// Larger of the two residuals.
    pub fn max(&self) -> f64 {
        self.euler.max(self.p1)
    }
}

/// Verifies at one point that the exterior derivatives of the
/// transgression forms account exactly for the change of the Euler and
/// first Pontrjagin densities under the shift of connection: the
/// residuals are the absolute coordinate-volume coefficients of
/// (shifted density) - (base density) + d(transgression form).
pub fn verify_transgression_identity(
    chart: &MetricChart,
    field: &ConnectionDeltaField,
    x: &[f64],
) -> Result<TransgressionResiduals, TransgressionError> {
    let calc = chart.calculus_at(x)?;
    let dt = delta_tensors(&calc, field, 2)?;
    check_compatibility(&calc, &dt.s)?;
    let fj = transgression_form_jets(&calc, &dt)?;
    let d_euler = fj.euler[0].grad(0) - fj.euler[1].grad(1) + fj.euler[2].grad(2)
        - fj.euler[3].grad(3);
    let d_p1 = fj.p1[0].grad(0) - fj.p1[1].grad(1) + fj.p1[2].grad(2) - fj.p1[3].grad(3);

    let base = calc.riemann_frame()?.op;
    let shifted = modified_curvature_from(&calc, &dt)?;
    let sg = calc.sqrt_det();
    let euler = ((euler_form(&shifted).coefficient - euler_form(&base).coefficient) * sg
        + d_euler)
        .abs();
    let p1 = ((pontrjagin_form(&shifted).coefficient - pontrjagin_form(&base).coefficient) * sg
        + d_p1)
        .abs();
    Ok(TransgressionResiduals { euler, p1 })
}
