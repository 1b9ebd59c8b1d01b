//! Covariant calculus at a chart point from exact metric jets: frames,
//! Christoffel symbols, the curvature operator in the orthonormal
//! frame, Gauss curvature of conformal 2-charts, and scalar calculus
//! (gradient, covariant Hessian, Laplacian, divergence).

use super::chart::{cholesky, frame_from_cholesky, symmetric_eig_min, ChartError, FramedPoint,
    MetricChart};
use crate::alg4::{SymBilinear4, Vector4, PAIRS};
use crate::curvops::CurvatureTensor;
use crate::exprfield::{EvalError, Expr, ScalarJet};

/// All jet-backed state needed for covariant computations at one point
/// of a chart. Construction evaluates order-3 jets of the metric, from
/// which Christoffel symbols carry order-2 jets and the coordinate
/// curvature tensor order-1 jets (dimension 4 only).
#[derive(Debug, Clone)]
pub struct PointCalculus {
    dim: usize,
    x: [f64; 4],
    pub(crate) g: Vec<Vec<ScalarJet>>,
    pub(crate) ginv: Vec<Vec<ScalarJet>>,
    pub(crate) gamma: Vec<Vec<Vec<ScalarJet>>>,
    frame: [[f64; 4]; 4],
    sqrt_det: f64,
    pub(crate) ric: Vec<Vec<ScalarJet>>,
    pub(crate) scal: ScalarJet,
    pub(crate) rc: Vec<Vec<Vec<Vec<ScalarJet>>>>,
}

impl MetricChart {
    /// Builds the jet calculator at an interior point.
    pub fn calculus_at(&self, x: &[f64]) -> Result<PointCalculus, ChartError> {
        PointCalculus::at(self, x)
    }

    /// Frame, Christoffel values, and Christoffel derivatives at a point.
    pub fn framed_point(&self, x: &[f64]) -> Result<FramedPoint, ChartError> {
        Ok(self.calculus_at(x)?.framed_point())
    }

    /// Curvature operator in the orthonormal frame (dimension 4).
    pub fn riemann_frame(&self, x: &[f64]) -> Result<CurvatureTensor, ChartError> {
        self.calculus_at(x)?.riemann_frame()
    }

    /// Gauss curvature of a conformal 2-chart.
    pub fn gauss_curvature(&self, x: &[f64]) -> Result<f64, ChartError> {
        self.calculus_at(x)?.gauss_curvature()
    }
}

impl PointCalculus {
    fn at(chart: &MetricChart, x: &[f64]) -> Result<Self, ChartError> {
        chart.contains(x)?;
        let dim = chart.dim;
        let mut g: Vec<Vec<ScalarJet>> = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut row = Vec::with_capacity(dim);
            for j in 0..dim {
                row.push(chart.g_entries[i][j].eval_jet(x, 3)?);
            }
            g.push(row);
        }
        Self::from_metric_jets(dim, x, g)
    }

    /// Builds the calculator directly from order-3 metric jets, for
    /// callers that synthesize a metric (a pointwise conformal rescale,
    /// for instance) rather than evaluating chart expressions.
    pub(crate) fn from_metric_jets(
        dim: usize,
        x: &[f64],
        g: Vec<Vec<ScalarJet>>,
    ) -> Result<Self, ChartError> {
        let mut xp = [0.0; 4];
        xp[..dim].copy_from_slice(&x[..dim]);

        let mut gv = [[0.0; 4]; 4];
        for i in 0..dim {
            for j in 0..dim {
                gv[i][j] = g[i][j].value();
            }
        }
        let l = cholesky(&gv, dim).ok_or(ChartError::NotPositiveDefinite {
            eigenvalue: symmetric_eig_min(&gv, dim),
            point: xp,
        })?;
        let frame = frame_from_cholesky(&l, dim);
        let sqrt_det = (0..dim).map(|i| l[i][i]).product();

        let ginv = jet_matrix_inverse(&g, dim)?;

        let mut gamma: Vec<Vec<Vec<ScalarJet>>> = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut plane = Vec::with_capacity(dim);
            for i in 0..dim {
                let mut row = Vec::with_capacity(dim);
                for j in 0..dim {
                    let mut s = ScalarJet::constant(dim, 2, 0.0);
                    for m in 0..dim {
                        let bracket = g[j][m]
                            .partial(i)
                            .add(&g[i][m].partial(j))
                            .sub(&g[i][j].partial(m));
                        s = s.add(&ginv[k][m].mul(&bracket));
                    }
                    row.push(s.scale(0.5));
                }
                plane.push(row);
            }
            gamma.push(plane);
        }

        let (rc, ric, scal) = if dim == 4 {
            let rc = coordinate_curvature(&g, &gamma, dim);
            let mut ric: Vec<Vec<ScalarJet>> = Vec::with_capacity(dim);
            for i in 0..dim {
                let mut row = Vec::with_capacity(dim);
                for j in 0..dim {
                    let mut s = ScalarJet::constant(dim, 1, 0.0);
                    for k in 0..dim {
                        for m in 0..dim {
                            s = s.add(&ginv[k][m].mul(&rc[i][k][j][m]));
                        }
                    }
                    row.push(s);
                }
                ric.push(row);
            }
            let mut scal = ScalarJet::constant(dim, 1, 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    scal = scal.add(&ginv[i][j].mul(&ric[i][j]));
                }
            }
            (rc, ric, scal)
        } else {
            (Vec::new(), Vec::new(), ScalarJet::constant(dim, 1, 0.0))
        };

        Ok(PointCalculus {
            dim,
            x: xp,
            g,
            ginv,
            gamma,
            frame,
            sqrt_det,
            ric,
            scal,
            rc,
        })
    }

    /// Chart dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluation point, zero-padded to four entries.
    pub fn point(&self) -> [f64; 4] {
        self.x
    }

    /// Orthonormal frame rows in coordinate components.
    pub fn frame(&self) -> &[[f64; 4]; 4] {
        &self.frame
    }

    /// Metric volume density sqrt(det g).
    pub fn sqrt_det(&self) -> f64 {
        self.sqrt_det
    }

    /// Metric values, zero-padded.
    pub fn metric_values(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i][j] = self.g[i][j].value();
            }
        }
        out
    }

    /// Inverse-metric values, zero-padded.
    pub fn inverse_metric_values(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i][j] = self.ginv[i][j].value();
            }
        }
        out
    }

    /// Christoffel values Gamma^k_ij, zero-padded.
    pub fn christoffel_values(&self) -> [[[f64; 4]; 4]; 4] {
        let mut out = [[[0.0; 4]; 4]; 4];
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out[k][i][j] = self.gamma[k][i][j].value();
                }
            }
        }
        out
    }

    /// Packages the frame and Christoffel data.
    pub fn framed_point(&self) -> FramedPoint {
        let mut jet = [[[[0.0; 4]; 4]; 4]; 4];
        for l in 0..self.dim {
            for k in 0..self.dim {
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        jet[l][k][i][j] = self.gamma[k][i][j].grad(l);
                    }
                }
            }
        }
        FramedPoint {
            x: self.x,
            dim: self.dim,
            frame: self.frame,
            metric: self.metric_values(),
            christoffel: self.christoffel_values(),
            christoffel_jet: jet,
        }
    }

    /// Order-`order` jet of an expression at this point.
    pub fn scalar_jet(&self, f: &Expr, order: usize) -> Result<ScalarJet, ChartError> {
        Ok(f.eval_jet(&self.x[..self.dim], order)?)
    }

    /// Contravariant gradient jets (nabla u)^i = g^ij d_j u.
    pub(crate) fn grad_jets(&self, u: &ScalarJet) -> Vec<ScalarJet> {
        (0..self.dim)
            .map(|i| {
                let mut s = ScalarJet::constant(self.dim, u.order() - 1, 0.0);
                for j in 0..self.dim {
                    s = s.add(&self.ginv[i][j].mul(&u.partial(j)));
                }
                s
            })
            .collect()
    }

    /// Covariant Hessian jets H_ij = d_i d_j u - Gamma^k_ij d_k u.
    pub(crate) fn hessian_jets(&self, u: &ScalarJet) -> Vec<Vec<ScalarJet>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        let mut s = u.partial(i).partial(j);
                        for k in 0..self.dim {
                            s = s.sub(&self.gamma[k][i][j].mul(&u.partial(k)));
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    /// Laplace-Beltrami jet: the metric trace of the covariant Hessian.
    pub(crate) fn laplacian_jet(&self, u: &ScalarJet) -> ScalarJet {
        let h = self.hessian_jets(u);
        let mut s = ScalarJet::constant(self.dim, u.order() - 2, 0.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                s = s.add(&self.ginv[i][j].mul(&h[i][j]));
            }
        }
        s
    }

    /// Divergence value of a vector field given by contravariant
    /// component jets of order at least 1.
    pub(crate) fn div_value(&self, v: &[ScalarJet]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            s += v[i].grad(i);
            for k in 0..self.dim {
                s += self.gamma[k][k][i].value() * v[i].value();
            }
        }
        s
    }

    /// Divergence of an expression-backed vector field with `dim`
    /// contravariant coordinate components.
    pub fn divergence(&self, v: &[Expr]) -> Result<f64, ChartError> {
        if v.len() != self.dim {
            return Err(ChartError::WrongDimension {
                expected: self.dim,
                got: v.len(),
            });
        }
        let jets: Vec<ScalarJet> = v
            .iter()
            .map(|e| self.scalar_jet(e, 1))
            .collect::<Result<_, _>>()?;
        Ok(self.div_value(&jets))
    }

    /// Value, gradient, covariant Hessian, and Laplacian of a scalar
    /// expression, with gradient and Hessian in frame components.
    pub fn scalar_calc(&self, f: &Expr) -> Result<ScalarCalc, ChartError> {
        let fj = self.scalar_jet(f, 2)?;
        let mut grad = Vector4::zero();
        for a in 0..self.dim {
            for i in 0..self.dim {
                grad.0[a] += self.frame[a][i] * fj.grad(i);
            }
        }
        let mut hc = [[0.0; 4]; 4];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut s = fj.hess(i, j);
                for k in 0..self.dim {
                    s -= self.gamma[k][i][j].value() * fj.grad(k);
                }
                hc[i][j] = s;
            }
        }
        let mut hf = [[0.0; 4]; 4];
        for a in 0..self.dim {
            for b in 0..self.dim {
                let mut s = 0.0;
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        s += self.frame[a][i] * hc[i][j] * self.frame[b][j];
                    }
                }
                hf[a][b] = s;
            }
        }
        let mut lap = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                lap += self.ginv[i][j].value() * hc[i][j];
            }
        }
        let hess = SymBilinear4::new(hf).expect("covariant Hessian is symmetric");
        Ok(ScalarCalc {
            value: fj.value(),
            grad,
            hess,
            lap,
        })
    }

    /// Curvature operator in the orthonormal frame: entries are the
    /// four-index curvature values on frame bivector pairs, with the
    /// sign convention that makes the round sphere's operator the
    /// identity.
    pub fn riemann_frame(&self) -> Result<CurvatureTensor, ChartError> {
        if self.dim != 4 {
            return Err(ChartError::WrongDimension {
                expected: 4,
                got: self.dim,
            });
        }
        let mut rcv = [[[[0.0; 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        rcv[i][j][k][l] = self.rc[i][j][k][l].value();
                    }
                }
            }
        }
        let entries = frame_contract4(&rcv, &self.frame);
        Ok(CurvatureTensor::from_entries(entries))
    }

    /// Gauss curvature of a conformal 2-chart, computed as minus half
    /// the metric Laplacian of log(lambda^2).
    pub fn gauss_curvature(&self) -> Result<f64, ChartError> {
        if self.dim != 2 {
            return Err(ChartError::WrongDimension {
                expected: 2,
                got: self.dim,
            });
        }
        let g00 = self.g[0][0].value();
        let defect = (self.g[0][1].value().abs())
            .max((g00 - self.g[1][1].value()).abs())
            / g00.abs();
        if defect > 1e-10 {
            return Err(ChartError::NotConformal { defect });
        }
        let log_lambda2 = log_jet(&self.g[0][0])?;
        Ok(-0.5 * self.laplacian_jet(&log_lambda2).value())
    }
}

/// Natural logarithm of a jet; the value must be positive.
pub(crate) fn log_jet(u: &ScalarJet) -> Result<ScalarJet, EvalError> {
    let v = u.value();
    if v <= 0.0 {
        return Err(EvalError::DomainLog { value: v });
    }
    Ok(u.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)]))
}

/// Square root of a jet; the value must be positive.
pub(crate) fn sqrt_jet(u: &ScalarJet) -> Result<ScalarJet, EvalError> {
    let v = u.value();
    if v <= 0.0 {
        return Err(EvalError::DomainSqrt { value: v });
    }
    let s = v.sqrt();
    Ok(u.compose([s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)]))
}

/// Contracts a coordinate four-tensor with four copies of the frame
/// rows and lays the result out on the bivector pair basis, columns
/// indexed by the first index pair and rows by the second.
pub(crate) fn frame_contract4(values: &[[[[f64; 4]; 4]; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 6]; 6] {
    let mut t1 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut s = 0.0;
                    for i in 0..4 {
                        s += b[a][i] * values[i][j][k][l];
                    }
                    t1[a][j][k][l] = s;
                }
            }
        }
    }
    let mut t2 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for c in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut s = 0.0;
                    for j in 0..4 {
                        s += b[c][j] * t1[a][j][k][l];
                    }
                    t2[a][c][k][l] = s;
                }
            }
        }
    }
    let mut t3 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for c in 0..4 {
            for e in 0..4 {
                for l in 0..4 {
                    let mut s = 0.0;
                    for k in 0..4 {
                        s += b[e][k] * t2[a][c][k][l];
                    }
                    t3[a][c][e][l] = s;
                }
            }
        }
    }
    let mut r4 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for c in 0..4 {
            for e in 0..4 {
                for h in 0..4 {
                    let mut s = 0.0;
                    for l in 0..4 {
                        s += b[h][l] * t3[a][c][e][l];
                    }
                    r4[a][c][e][h] = s;
                }
            }
        }
    }
    let mut entries = [[0.0; 6]; 6];
    for (col, &(i, j)) in PAIRS.iter().enumerate() {
        for (row, &(k, l)) in PAIRS.iter().enumerate() {
            entries[row][col] = r4[i][j][k][l];
        }
    }
    entries
}

/// Result of covariant scalar calculus at a point. The gradient and
/// Hessian are expressed in the orthonormal frame, so norms and traces
/// are Euclidean.
#[derive(Debug, Clone)]
pub struct ScalarCalc {
    /// Value of the scalar.
    pub value: f64,
    /// Frame components of the gradient.
    pub grad: Vector4,
    /// Frame components of the covariant Hessian.
    pub hess: SymBilinear4,
    /// Laplace-Beltrami value, the metric trace of the Hessian.
    pub lap: f64,
}

/// Inverse of a jet-valued symmetric positive-definite matrix by
/// Gauss-Jordan elimination without pivoting (the leading minors of a
/// positive-definite matrix never vanish).
pub(crate) fn jet_matrix_inverse(
    a0: &[Vec<ScalarJet>],
    dim: usize,
) -> Result<Vec<Vec<ScalarJet>>, EvalError> {
    let order = a0[0][0].order();
    let mut a: Vec<Vec<ScalarJet>> = a0.to_vec();
    let mut inv: Vec<Vec<ScalarJet>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| ScalarJet::constant(dim, order, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for c in 0..dim {
        let piv = a[c][c].reciprocal()?;
        for j in 0..dim {
            a[c][j] = a[c][j].mul(&piv);
            inv[c][j] = inv[c][j].mul(&piv);
        }
        for r in 0..dim {
            if r == c {
                continue;
            }
            let factor = a[r][c].clone();
            for j in 0..dim {
                a[r][j] = a[r][j].sub(&factor.mul(&a[c][j]));
                inv[r][j] = inv[r][j].sub(&factor.mul(&inv[c][j]));
            }
        }
    }
    Ok(inv)
}

/// Coordinate curvature jets R_ijkl = g_lm (d_j Gamma^m_ik
/// - d_i Gamma^m_jk + Gamma^p_ik Gamma^m_jp - Gamma^p_jk Gamma^m_ip),
/// antisymmetric in (i,j).
fn coordinate_curvature(
    g: &[Vec<ScalarJet>],
    gamma: &[Vec<Vec<ScalarJet>>],
    dim: usize,
) -> Vec<Vec<Vec<Vec<ScalarJet>>>> {
    let zero = || ScalarJet::constant(dim, 1, 0.0);
    let mut rc: Vec<Vec<Vec<Vec<ScalarJet>>>> =
        vec![vec![vec![vec![zero(); dim]; dim]; dim]; dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let mut s = zero();
                    for m in 0..dim {
                        let mut term = gamma[m][i][k].partial(j).sub(&gamma[m][j][k].partial(i));
                        for p in 0..dim {
                            term = term
                                .add(&gamma[p][i][k].mul(&gamma[m][j][p]))
                                .sub(&gamma[p][j][k].mul(&gamma[m][i][p]));
                        }
                        s = s.add(&g[l][m].mul(&term));
                    }
                    rc[j][i][k][l] = s.neg();
                    rc[i][j][k][l] = s;
                }
            }
        }
    }
    rc
}
