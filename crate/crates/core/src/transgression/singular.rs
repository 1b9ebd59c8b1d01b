//! Conformal bundle maps and the change-of-connection calculus they
//! induce. A map of the tangent bundle that is pointwise conformal
//! with factor h pulls a metric connection back to a connection that
//! is compatible with the rescaled metric h g. The delta against the
//! Levi-Civita connection splits into the conformal part carried by h
//! and a reduced part that is compatible for h g, and the reduced part
//! feeds the transgression machinery for that metric. The identity
//! checked here compares the change of the characteristic densities
//! with the exterior derivative of the reduced transgression forms
//! plus the divergence term carried by the conformal factor.

use super::{
    check_compatibility, conformal_delta_jets, delta_tensors_from_jets, transgression_form_jets,
    ConnectionDeltaField, Jet3, TransgressionError, TransgressionResiduals, CONFORMALITY_TOL,
    H_MIN,
};
use crate::alg4::CurvOp;
use crate::chartgeom::jetcalc::log_jet;
use crate::chartgeom::{MetricChart, PointCalculus};
use crate::curvops::{euler_form, pontrjagin_form};
use crate::exprfield::{Expr, ScalarJet};

const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// A bundle map of the tangent bundle given by an expression matrix
/// phi[m][j] (output index first) that is pointwise conformal:
/// phi^T phi = h Id for the stated factor h. Points where h vanishes
/// are singular points of the map; evaluations guard against them.
#[derive(Debug, Clone)]
pub struct ConformalBundleMap {
    /// Display name used in reports.
    pub name: String,
    /// Entries of the map, output index outermost.
    pub phi: Vec<Vec<Expr>>,
    /// Conformal factor, equal to phi^T phi / Id.
    pub h: Expr,
}

impl ConformalBundleMap {
    /// Builds from an explicit entry matrix and factor. Conformality
    /// is screened numerically at each evaluation point, not here.
    pub fn new(name: &str, phi: Vec<Vec<Expr>>, h: Expr) -> Result<Self, TransgressionError> {
        if phi.len() != 4 || phi.iter().any(|row| row.len() != 4) {
            return Err(TransgressionError::BadMatrixShape);
        }
        Ok(ConformalBundleMap {
            name: name.to_string(),
            phi,
            h,
        })
    }

    /// The identity map, factor 1.
    pub fn identity() -> Self {
        let mut phi = vec![vec![Expr::constant(0.0); 4]; 4];
        for (m, row) in phi.iter_mut().enumerate() {
            row[m] = Expr::constant(1.0);
        }
        ConformalBundleMap {
            name: "identity".to_string(),
            phi,
            h: Expr::constant(1.0),
        }
    }

    /// sqrt(h) times the identity. Despite having no rotational part,
    /// this map has nonzero torsion and a nonzero reduced delta
    /// wherever h varies.
    pub fn scaled_identity(name: &str, h: Expr) -> Self {
        let mut phi = vec![vec![Expr::constant(0.0); 4]; 4];
        for (m, row) in phi.iter_mut().enumerate() {
            row[m] = h.clone().sqrt();
        }
        ConformalBundleMap {
            name: name.to_string(),
            phi,
            h,
        }
    }

    /// sqrt(h) times the block rotation by theta in the 12-plane and
    /// psi in the 34-plane.
    pub fn scaled_rotation(name: &str, h: Expr, theta: f64, psi: f64) -> Self {
        let s = h.clone().sqrt();
        let z = || Expr::constant(0.0);
        let c = Expr::constant;
        let phi = vec![
            vec![s.clone() * c(theta.cos()), s.clone() * c(-theta.sin()), z(), z()],
            vec![s.clone() * c(theta.sin()), s.clone() * c(theta.cos()), z(), z()],
            vec![z(), z(), s.clone() * c(psi.cos()), s.clone() * c(-psi.sin())],
            vec![z(), z(), s.clone() * c(psi.sin()), s * c(psi.cos())],
        ];
        ConformalBundleMap {
            name: name.to_string(),
            phi,
            h,
        }
    }

    /// The Jacobian of the inversion x -> x / |x|^2, conformal with
    /// factor 1 / |x|^4. Being a Jacobian, its covariant exterior
    /// derivative vanishes on the flat chart, so the reduced delta is
    /// zero there and the whole transgression contribution is carried
    /// by the factor.
    pub fn inversion() -> Self {
        let r2 = Expr::r2();
        let r4 = r2.clone() * r2.clone();
        let mut phi = vec![vec![Expr::constant(0.0); 4]; 4];
        for (m, row) in phi.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                let mut num = Expr::constant(-2.0) * Expr::var(m) * Expr::var(j);
                if m == j {
                    num = num + r2.clone();
                }
                *e = num / r4.clone();
            }
        }
        ConformalBundleMap {
            name: "inversion".to_string(),
            phi,
            h: Expr::constant(1.0) / r4,
        }
    }

    /// Entry jets at the calculator's point.
    fn phi_jets(
        &self,
        calc: &PointCalculus,
        order: usize,
    ) -> Result<Vec<Vec<ScalarJet>>, TransgressionError> {
        let mut jets = vec![Vec::with_capacity(4); 4];
        for (m, row) in self.phi.iter().enumerate() {
            for e in row {
                jets[m].push(calc.scalar_jet(e, order)?);
            }
        }
        Ok(jets)
    }

    /// Screens the conformality defect g(phi u, phi v) = h g(u, v) at
    /// the point, for the chart metric. The factor must already have
    /// passed the singularity guard.
    fn screen(
        &self,
        calc: &PointCalculus,
        phi: &[Vec<ScalarJet>],
        h: &ScalarJet,
    ) -> Result<(), TransgressionError> {
        let hv = h.value();
        let g = calc.metric_values();
        let mut scale: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut t = -hv * g[i][j];
                for m in 0..4 {
                    for n in 0..4 {
                        t += phi[m][i].value() * g[m][n] * phi[n][j].value();
                    }
                }
                scale = scale.max((hv * g[i][j]).abs());
                defect = defect.max(t.abs());
            }
        }
        let defect = defect / scale.max(hv);
        if defect > CONFORMALITY_TOL {
            return Err(TransgressionError::NotConformalMap { defect });
        }
        Ok(())
    }
}

/// The three connection deltas induced by a conformal bundle map at a
/// point: the full delta of the pulled-back connection against the
/// Levi-Civita connection, the conformal delta carried by the factor,
/// and their difference, which is the part compatible with the
/// rescaled metric.
#[derive(Debug, Clone)]
pub struct BundleDeltas {
    /// Full delta S^k_ij, upper index outermost.
    pub full: [[[f64; 4]; 4]; 4],
    /// Delta of the Levi-Civita connections of h g and g.
    pub conformal: [[[f64; 4]; 4]; 4],
    /// full - conformal, compatible with h g.
    pub reduced: [[[f64; 4]; 4]; 4],
}

/// Jets of the full delta of the pulled-back connection: the inverse
/// map applied to the covariant derivative of the map, with the
/// optional extra delta of the bundle connection on the output side.
fn full_delta_jets(
    calc: &PointCalculus,
    map: &ConformalBundleMap,
    bundle_delta: Option<&ConnectionDeltaField>,
    order: usize,
) -> Result<(Jet3, ScalarJet), TransgressionError> {
    let h = calc.scalar_jet(&map.h, 3)?;
    if h.value() <= H_MIN {
        return Err(TransgressionError::SingularPoint {
            h: h.value(),
            h_min: H_MIN,
        });
    }
    let phi = map.phi_jets(calc, (order + 1).min(3))?;
    map.screen(calc, &phi, &h)?;
    let k_jets = match bundle_delta {
        Some(field) => {
            let k = field.component_jets(calc, order + 1)?;
            check_compatibility(calc, &k)?;
            Some(k)
        }
        None => None,
    };

    let hinv = h.reciprocal()?;
    let mut inv = vec![vec![ScalarJet::constant(4, order, 0.0); 4]; 4];
    for k in 0..4 {
        for m in 0..4 {
            let mut t = ScalarJet::constant(4, order.max(1), 0.0);
            for p in 0..4 {
                for q in 0..4 {
                    t = t.add(&calc.ginv[k][p].mul(&phi[q][p]).mul(&calc.g[q][m]));
                }
            }
            inv[k][m] = t.mul(&hinv).truncated(order.max(1));
        }
    }

    let mut s = super::empty_jet3(order);
    for i in 0..4 {
        let mut nabla = vec![vec![ScalarJet::constant(4, order, 0.0); 4]; 4];
        for m in 0..4 {
            for j in 0..4 {
                let mut t = phi[m][j].partial(i);
                for l in 0..4 {
                    t = t
                        .add(&calc.gamma[m][i][l].mul(&phi[l][j]))
                        .sub(&calc.gamma[l][i][j].mul(&phi[m][l]));
                    if let Some(kj) = &k_jets {
                        t = t.add(&kj[m][i][l].mul(&phi[l][j]));
                    }
                }
                nabla[m][j] = t.truncated(order);
            }
        }
        for k in 0..4 {
            for j in 0..4 {
                let mut t = ScalarJet::constant(4, order, 0.0);
                for m in 0..4 {
                    t = t.add(&inv[k][m].mul(&nabla[m][j]));
                }
                s[k][i][j] = t.truncated(order);
            }
        }
    }
    Ok((s, h))
}

/// Computes the three deltas of a conformal bundle map at a point,
/// with an optional extra delta on the bundle connection. The extra
/// delta must be metric compatible for the base metric.
pub fn conformal_bundle_deltas(
    calc: &PointCalculus,
    map: &ConformalBundleMap,
    bundle_delta: Option<&ConnectionDeltaField>,
) -> Result<BundleDeltas, TransgressionError> {
    let (s, h) = full_delta_jets(calc, map, bundle_delta, 1)?;
    let log_h = log_jet(&h)?;
    let hat = conformal_delta_jets(calc, &log_h, 1);
    let mut out = BundleDeltas {
        full: [[[0.0; 4]; 4]; 4],
        conformal: [[[0.0; 4]; 4]; 4],
        reduced: [[[0.0; 4]; 4]; 4],
    };
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                let sv = s[k][i][j].value();
                let cv = hat[k][i][j].value();
                out.full[k][i][j] = sv;
                out.conformal[k][i][j] = cv;
                out.reduced[k][i][j] = sv - cv;
            }
        }
    }
    Ok(out)
}

/// Verifies at one point the density identity of a conformal bundle
/// map: the Euler density of the bundle connection minus the base
/// Euler density minus the divergence term of the conformal factor is
/// minus the exterior derivative of the reduced transgression form,
/// and likewise for the first Pontrjagin density without the
/// divergence term. Residuals are the absolute coordinate-volume
/// coefficients of the two defects.
pub fn verify_conformal_bundle_identity(
    chart: &MetricChart,
    map: &ConformalBundleMap,
    bundle_delta: Option<&ConnectionDeltaField>,
    x: &[f64],
) -> Result<TransgressionResiduals, TransgressionError> {
    let calc = chart.calculus_at(x)?;
    let (s, h) = full_delta_jets(&calc, map, bundle_delta, 2)?;
    let log_h = log_jet(&h)?;
    let hat = conformal_delta_jets(&calc, &log_h, 2);
    let mut reduced = super::empty_jet3(2);
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                reduced[k][i][j] = s[k][i][j].sub(&hat[k][i][j]);
            }
        }
    }

    let mut hat_g = vec![vec![ScalarJet::constant(4, 3, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            hat_g[i][j] = h.mul(&calc.g[i][j]).truncated(3);
        }
    }
    let hat_calc = PointCalculus::from_metric_jets(4, x, hat_g)?;
    let dt = delta_tensors_from_jets(&hat_calc, reduced)?;
    check_compatibility(&hat_calc, &dt.s)?;
    let fj = transgression_form_jets(&hat_calc, &dt)?;
    let d_euler = fj.euler[0].grad(0) - fj.euler[1].grad(1) + fj.euler[2].grad(2)
        - fj.euler[3].grad(3);
    let d_p1 = fj.p1[0].grad(0) - fj.p1[1].grad(1) + fj.p1[2].grad(2) - fj.p1[3].grad(3);

    let bundle_op: CurvOp = match bundle_delta {
        Some(field) => super::modified_curvature(&calc, field)?,
        None => calc.riemann_frame()?.op,
    };
    let base_op = calc.riemann_frame()?.op;
    let pdiv = calc.p_divergence(&map.h.clone().log())?;
    let sg = calc.sqrt_det();

    let e_bundle = euler_form(&bundle_op).coefficient;
    let e_base = euler_form(&base_op).coefficient;
    let p_bundle = pontrjagin_form(&bundle_op).coefficient;
    let p_base = pontrjagin_form(&base_op).coefficient;

    let euler = ((e_bundle - e_base - pdiv / (32.0 * PI2)) * sg + d_euler).abs();
    let p1 = ((p_bundle - p_base) * sg + d_p1).abs();
    Ok(TransgressionResiduals { euler, p1 })
}
