//! Conformal-change machinery at a chart point: the shift tensor of a
//! conformal factor, the shifted curvature operator it induces, the
//! flux vector field whose divergence carries the change of the Euler
//! density, and a battery of commutation identities for scalar fields
//! that cross-check the whole jet calculus.

use super::chart::ChartError;
use super::jetcalc::PointCalculus;
use crate::alg4::{kulkarni_nomizu, SymBilinear4, Vector4};
use crate::curvops::{euler_form, pontrjagin_form, CurvatureTensor};
use crate::exprfield::{Expr, ScalarJet};
use std::f64::consts::PI;

/// Residuals of six pointwise identities relating gradients, Hessians,
/// Laplacians, Ricci terms, and divergences of a scalar field. Each
/// entry is the absolute defect of one identity and vanishes up to
/// roundoff when the jet calculus is consistent.
#[derive(Debug, Clone, Copy)]
pub struct ScalarIdentityResiduals {
    /// Hodge Laplacian of df against -d of the Laplacian of f.
    pub one_form_laplacian: f64,
    /// Bochner identity for the gradient energy:
    /// -Lap|df|^2/2 = <Lap df, df> - |Hess f|^2 - Ric(df, df).
    pub gradient_energy: f64,
    /// (Lap f)^2 rewritten through the Bochner identity and the
    /// divergence of (Lap f) grad f.
    pub laplacian_square: f64,
    /// |df|^2 Lap f = div(|df|^2 grad f) - 2 Hess f(df, df).
    pub energy_flux: f64,
    /// <Ric, Hess f> - s Lap f / 2 = div(Ric(grad f) - s grad f / 2).
    pub ricci_flux: f64,
    /// Second symmetric function of the shift tensor as an eighth of a
    /// flux divergence plus a quarter of Ric(df, df).
    pub conformal_trace_flux: f64,
}

impl ScalarIdentityResiduals {
    /// Largest of the six defects.
    pub fn max_abs(&self) -> f64 {
        self.one_form_laplacian
            .max(self.gradient_energy)
            .max(self.laplacian_square)
            .max(self.energy_flux)
            .max(self.ricci_flux)
            .max(self.conformal_trace_flux)
    }
}

impl PointCalculus {
    fn require_dim4(&self) -> Result<(), ChartError> {
        if self.dim() != 4 {
            return Err(ChartError::WrongDimension {
                expected: 4,
                got: self.dim(),
            });
        }
        Ok(())
    }

    /// Shift tensor of the conformal factor e^f in frame components:
    /// phi = (-|df|^2 g / 4 + df x df / 2 - Hess f) / 2. Rescaling the
    /// metric by e^f changes the frame curvature operator by the
    /// Kulkarni-Nomizu product phi • g (up to the overall e^f scale).
    pub fn conformal_phi(&self, f: &Expr) -> Result<SymBilinear4, ChartError> {
        self.require_dim4()?;
        let sc = self.scalar_calc(f)?;
        let energy = sc.grad.dot(&sc.grad);
        let mut entries = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let delta = if a == b { 1.0 } else { 0.0 };
                entries[a][b] = -0.125 * energy * delta + 0.25 * sc.grad.0[a] * sc.grad.0[b]
                    - 0.5 * sc.hess.entries[a][b];
            }
        }
        Ok(SymBilinear4::new(entries).expect("shift tensor is symmetric by construction"))
    }

    /// Curvature operator of the conformally rescaled metric, pulled
    /// back to the frame of the base metric and stripped of the overall
    /// e^f factor: Q = R + phi • g. Its Euler and first Pontrjagin
    /// densities, integrated against the base volume, equal those of
    /// the rescaled metric against the rescaled volume.
    pub fn conformal_curvature(&self, f: &Expr) -> Result<CurvatureTensor, ChartError> {
        let base = self.riemann_frame()?;
        let phi = self.conformal_phi(f)?;
        let op = base.op + kulkarni_nomizu(&phi, &SymBilinear4::metric());
        Ok(CurvatureTensor::from_entries(op.entries))
    }

    /// Contravariant first-order jets of the flux field
    /// P = (2 Lap f + |df|^2 - 2 s) grad f + 4 Ric(grad f) - grad|df|^2,
    /// whose divergence gives 32 pi^2 times the change of the Euler
    /// density under conformal rescaling by e^f.
    fn flux_jets(&self, f: &Expr) -> Result<Vec<ScalarJet>, ChartError> {
        let fj = self.scalar_jet(f, 3)?;
        let gf = self.grad_jets(&fj);
        let mut energy = ScalarJet::constant(4, 2, 0.0);
        for i in 0..4 {
            energy = energy.add(&gf[i].mul(&fj.partial(i)));
        }
        let lap = self.laplacian_jet(&fj);
        let rg = self.ricci_gradient_jets(&gf);
        let gn = self.grad_jets(&energy);
        let factor = lap.scale(2.0).add(&energy).sub(&self.scal.scale(2.0));
        Ok((0..4)
            .map(|i| factor.mul(&gf[i]).add(&rg[i].scale(4.0)).sub(&gn[i]))
            .collect())
    }

    /// Contravariant jets of Ric(grad f): the Ricci endomorphism
    /// applied to the gradient.
    fn ricci_gradient_jets(&self, gf: &[ScalarJet]) -> Vec<ScalarJet> {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                let mut s = ScalarJet::constant(dim, 1, 0.0);
                for k in 0..dim {
                    for j in 0..dim {
                        s = s.add(&self.ginv[i][k].mul(&self.ric[k][j]).mul(&gf[j]));
                    }
                }
                s
            })
            .collect()
    }

    /// Frame components of the flux field P of `flux_jets`.
    pub fn p_operator(&self, f: &Expr) -> Result<Vector4, ChartError> {
        self.require_dim4()?;
        let p = self.flux_jets(f)?;
        let frame = self.frame();
        let mut out = Vector4::zero();
        for a in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    out.0[a] += self.g[i][j].value() * p[i].value() * frame[a][j];
                }
            }
        }
        Ok(out)
    }

    /// Divergence of the flux field P at this point.
    pub fn p_divergence(&self, f: &Expr) -> Result<f64, ChartError> {
        self.require_dim4()?;
        let p = self.flux_jets(f)?;
        Ok(self.div_value(&p))
    }

    /// Pointwise defect of the conformal-change laws for the
    /// characteristic densities: the Euler density of Q = R + phi • g
    /// must differ from that of R by div(P) / (32 pi^2), and the first
    /// Pontrjagin density must not change at all. Returns the larger of
    /// the two absolute defects.
    pub fn conformal_residual(&self, f: &Expr) -> Result<f64, ChartError> {
        let base = self.riemann_frame()?;
        let shifted = self.conformal_curvature(f)?;
        let pdiv = self.p_divergence(f)?;
        let euler_change =
            euler_form(&shifted.op).coefficient - euler_form(&base.op).coefficient;
        let euler_defect = euler_change - pdiv / (32.0 * PI * PI);
        let pontrjagin_defect =
            pontrjagin_form(&shifted.op).coefficient - pontrjagin_form(&base.op).coefficient;
        Ok(euler_defect.abs().max(pontrjagin_defect.abs()))
    }

    /// Evaluates the six scalar commutation identities for a field f
    /// and returns their absolute defects.
    pub fn scalar_identity_residuals(
        &self,
        f: &Expr,
    ) -> Result<ScalarIdentityResiduals, ChartError> {
        self.require_dim4()?;
        let dim = self.dim();
        let fj = self.scalar_jet(f, 3)?;
        let gf = self.grad_jets(&fj);
        let h = self.hessian_jets(&fj);
        let lap = self.laplacian_jet(&fj);
        let mut energy = ScalarJet::constant(dim, 2, 0.0);
        for i in 0..dim {
            energy = energy.add(&gf[i].mul(&fj.partial(i)));
        }
        let gamma = self.christoffel_values();
        let ginv_v = self.inverse_metric_values();

        let mut hodge = [0.0; 4];
        let mut one_form_laplacian: f64 = 0.0;
        for k in 0..dim {
            let mut trace = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let mut t = h[j][k].grad(i);
                    for l in 0..dim {
                        t -= gamma[l][i][j] * h[l][k].value() + gamma[l][i][k] * h[j][l].value();
                    }
                    trace += ginv_v[i][j] * t;
                }
            }
            let mut ric_term = 0.0;
            for j in 0..dim {
                ric_term += self.ric[k][j].value() * gf[j].value();
            }
            hodge[k] = -trace + ric_term;
            one_form_laplacian = one_form_laplacian.max((hodge[k] + lap.grad(k)).abs());
        }

        let mut hodge_df = 0.0;
        let mut hess_norm2 = 0.0;
        let mut hess_gg = 0.0;
        let mut ric_gg = 0.0;
        for i in 0..dim {
            hodge_df += hodge[i] * gf[i].value();
            for j in 0..dim {
                hess_gg += h[i][j].value() * gf[i].value() * gf[j].value();
                ric_gg += self.ric[i][j].value() * gf[i].value() * gf[j].value();
                for k in 0..dim {
                    for l in 0..dim {
                        hess_norm2 +=
                            ginv_v[i][k] * ginv_v[j][l] * h[i][j].value() * h[k][l].value();
                    }
                }
            }
        }

        let lap_energy = self.laplacian_jet(&energy).value();
        let gradient_energy =
            (-0.5 * lap_energy - (hodge_df - hess_norm2 - ric_gg)).abs();

        let lap_flux: Vec<ScalarJet> = (0..dim).map(|i| lap.mul(&gf[i])).collect();
        let laplacian_square = (lap.value() * lap.value()
            - (-0.5 * lap_energy + self.div_value(&lap_flux) + hess_norm2 + ric_gg))
            .abs();

        let energy_vec: Vec<ScalarJet> = (0..dim).map(|i| energy.mul(&gf[i])).collect();
        let energy_flux = (energy.value() * lap.value()
            - (self.div_value(&energy_vec) - 2.0 * hess_gg))
            .abs();

        let rg = self.ricci_gradient_jets(&gf);
        let ricci_vec: Vec<ScalarJet> = (0..dim)
            .map(|i| rg[i].sub(&self.scal.scale(0.5).mul(&gf[i])))
            .collect();
        let mut ric_hess = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        ric_hess += ginv_v[i][k]
                            * ginv_v[j][l]
                            * self.ric[i][j].value()
                            * h[k][l].value();
                    }
                }
            }
        }
        let ricci_flux = (ric_hess - 0.5 * self.scal.value() * lap.value()
            - self.div_value(&ricci_vec))
        .abs();

        let phi = self.conformal_phi(f)?;
        let gn = self.grad_jets(&energy);
        let trace_vec: Vec<ScalarJet> = (0..dim)
            .map(|i| lap.scale(2.0).add(&energy).mul(&gf[i]).sub(&gn[i]))
            .collect();
        let lhs = phi.trace() * phi.trace() - phi.inner(&phi);
        let conformal_trace_flux =
            (lhs - (0.125 * self.div_value(&trace_vec) + 0.25 * ric_gg)).abs();

        Ok(ScalarIdentityResiduals {
            one_form_laplacian,
            gradient_energy,
            laplacian_square,
            energy_flux,
            ricci_flux,
            conformal_trace_flux,
        })
    }
}
