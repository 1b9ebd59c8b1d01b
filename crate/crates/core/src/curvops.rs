//! Invariants, irreducible decomposition, and characteristic forms of
//! curvature operators on the 4-space.
//!
//! A curvature operator is a symmetric [`CurvOp`]; skew and general
//! operators appear as conjugation commutators and torsion corrections,
//! so the scalar invariants are also exposed at the raw operator level.

use crate::alg4::{
    j_to_omega, kulkarni_nomizu, mat4_apply, mat4_mul, wedge2, Alg4Error, Bivector, CurvOp,
    FourFormDensity, SymBilinear4, Vector4, PAIRS, VALIDATION_TOL,
};

use rand::Rng;
use thiserror::Error;

/// Errors from curvature-operator computations.
#[derive(Debug, Error)]
pub enum CurvopsError {
    /// An operator required to be symmetric was not.
    #[error("operator is not symmetric (tag {tag:?})")]
    NotSymmetric { tag: crate::alg4::SymmetryTag },
    /// An operator required to be Bianchi-free was not.
    #[error("operator has a nonzero Bianchi part (norm {defect:.3e})")]
    NotBianchiFree { defect: f64 },
    /// Two vectors supposed to span a 2-plane were linearly dependent.
    #[error("vectors do not span a 2-plane (wedge norm {wedge_norm:.3e})")]
    DegenerateSpan { wedge_norm: f64 },
    /// A curvature operator whose values must commute with J did not.
    #[error("operator is not J-invariant (commutator norm {defect:.3e})")]
    NotJInvariant { defect: f64 },
    /// Validation failure propagated from the algebra layer.
    #[error(transparent)]
    Algebra(#[from] Alg4Error),
}

/// Symmetric curvature operator (an element of the space of curvature
/// tensors in operator form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureTensor {
    pub op: CurvOp,
}

impl CurvatureTensor {
    /// Wraps a symmetric operator; rejects skew or general tags.
    pub fn new(op: CurvOp) -> Result<Self, CurvopsError> {
        if !op.is_symmetric() {
            return Err(CurvopsError::NotSymmetric {
                tag: op.symmetry_tag,
            });
        }
        Ok(CurvatureTensor { op })
    }

    /// Builds from a raw array, symmetrizing exactly.
    pub fn from_entries(entries: [[f64; 6]; 6]) -> Self {
        let mut sym = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                sym[i][j] = 0.5 * (entries[i][j] + entries[j][i]);
            }
        }
        CurvatureTensor {
            op: CurvOp::from_entries(sym),
        }
    }

    pub fn identity() -> Self {
        CurvatureTensor {
            op: CurvOp::identity(),
        }
    }

    pub fn star() -> Self {
        CurvatureTensor {
            op: CurvOp::star(),
        }
    }
}

/// Scalar curvature s = 2 tr(R).
pub fn scalar_of(op: &CurvOp) -> f64 {
    2.0 * op.trace()
}

/// Ricci contraction Ricci(X, Y) = Σ_k R(X, e_k, Y, e_k), returned as a
/// raw array since it is asymmetric for general operators.
pub fn ricci_matrix(op: &CurvOp) -> [[f64; 4]; 4] {
    let mut ric = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += op.four_index(i, k, j, k);
            }
            ric[i][j] = s;
        }
    }
    ric
}

/// Bianchi map: the antisymmetrized cyclic sum
/// b(R)(X,Y)(Z) = R(X,Y)Z + R(Z,X)Y + R(Y,Z)X, returned as the operator
/// part (antisymmetric in the output slot pair).
pub fn bianchi_op(op: &CurvOp) -> CurvOp {
    let cyc = |i: usize, j: usize, k: usize, l: usize| {
        op.four_index(i, j, k, l) + op.four_index(k, i, j, l) + op.four_index(j, k, i, l)
    };
    let mut entries = [[0.0; 6]; 6];
    for (row, &(k, l)) in PAIRS.iter().enumerate() {
        for (col, &(i, j)) in PAIRS.iter().enumerate() {
            entries[row][col] = 0.5 * (cyc(i, j, k, l) - cyc(i, j, l, k));
        }
    }
    CurvOp::from_entries(entries)
}

/// t(R) = ⟨b(R), star⟩ / 6.
pub fn t_of(op: &CurvOp) -> f64 {
    bianchi_op(op).inner(&CurvOp::star()) / 6.0
}

/// The 2-form X∧Y ↦ ⟨R(X∧Y), omega⟩, i.e. Rᵀ(omega). For a complex
/// structure's Kaehler form this is the star-Ricci form of R.
pub fn star_ricci_form(op: &CurvOp, omega: &Bivector) -> Bivector {
    op.transpose().apply(omega)
}

/// Basic scalar and tensor invariants of a curvature operator.
#[derive(Debug, Clone, Copy)]
pub struct Invariants {
    pub ricci: SymBilinear4,
    pub s: f64,
    pub bianchi: CurvOp,
    pub t: f64,
}

/// Ricci tensor, scalar curvature, Bianchi part, and t(R).
pub fn basic_invariants(r: &CurvatureTensor) -> Invariants {
    let ric = ricci_matrix(&r.op);
    let ricci = SymBilinear4::new(ric).expect("Ricci of a symmetric operator is symmetric");
    let bianchi = bianchi_op(&r.op);
    Invariants {
        ricci,
        s: scalar_of(&r.op),
        t: bianchi.inner(&CurvOp::star()) / 6.0,
        bianchi,
    }
}

/// Star conjugate and star commutator of a curvature operator.
#[derive(Debug, Clone, Copy)]
pub struct Conjugations {
    pub star_r_star: CurvOp,
    pub commutator: CurvOp,
}

/// Returns *R* and *R − R* (the latter is skew when R is symmetric).
pub fn conjugations(r: &CurvatureTensor) -> Conjugations {
    let star = CurvOp::star();
    let star_r = star.compose(&r.op);
    let r_star = r.op.compose(&star);
    Conjugations {
        star_r_star: star_r.compose(&star),
        commutator: star_r - r_star,
    }
}

/// Sectional curvature σ(P) = ⟨R(P), P⟩ of the plane spanned by x, y
/// (internally normalized, basis-independent).
pub fn sectional_op(op: &CurvOp, x: &Vector4, y: &Vector4) -> Result<f64, CurvopsError> {
    let p = wedge2(x, y);
    let n = p.norm();
    if n < 1e-12 {
        return Err(CurvopsError::DegenerateSpan { wedge_norm: n });
    }
    let p = p.scale(1.0 / n);
    Ok(op.apply(&p).dot(&p))
}

/// Sectional curvature of a symmetric curvature operator.
pub fn sectional(
    r: &CurvatureTensor,
    x: &Vector4,
    y: &Vector4,
) -> Result<f64, CurvopsError> {
    sectional_op(&r.op, x, y)
}

/// Orthonormal 4-frame encoding the totally isotropic complex plane
/// spanned by f1 + i f2 and f3 + i f4.
#[derive(Debug, Clone, Copy)]
pub struct IsotropicPlane {
    frame: [Vector4; 4],
}

impl IsotropicPlane {
    /// Validates orthonormality of the frame to the structural tolerance.
    pub fn new(frame: [Vector4; 4]) -> Result<Self, CurvopsError> {
        let mut defect: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let id = if a == b { 1.0 } else { 0.0 };
                defect = defect.max((frame[a].dot(&frame[b]) - id).abs());
            }
        }
        if defect > VALIDATION_TOL {
            return Err(CurvopsError::Algebra(Alg4Error::NotOrthonormal { defect }));
        }
        Ok(IsotropicPlane { frame })
    }

    /// The standard positively oriented frame e1..e4.
    pub fn standard() -> Self {
        IsotropicPlane {
            frame: [
                Vector4::basis(0),
                Vector4::basis(1),
                Vector4::basis(2),
                Vector4::basis(3),
            ],
        }
    }

    pub fn frame(&self) -> &[Vector4; 4] {
        &self.frame
    }

    /// Orientation sign of the frame (+1 or −1).
    pub fn orientation_sign(&self) -> f64 {
        let mut m = [[0.0; 4]; 4];
        for (c, v) in self.frame.iter().enumerate() {
            for r in 0..4 {
                m[r][c] = v.0[r];
            }
        }
        det4(&m).signum()
    }
}

/// 4x4 determinant by cofactor expansion.
pub(crate) fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let mut det = 0.0;
    for c in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for c2 in 0..4 {
                if c2 == c {
                    continue;
                }
                minor[r - 1][cc] = m[r][c2];
                cc += 1;
            }
        }
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * m[0][c] * det3(minor);
    }
    det
}

/// Isotropic sectional curvature evaluated in the plane's frame:
/// (R(1313) + R(1414) + R(2323) + R(2424) − 2 R(1234)) / 4 with R(ijkl)
/// taken on the frame vectors.
pub fn isotropic_sectional_op(op: &CurvOp, tau: &IsotropicPlane) -> f64 {
    let f = tau.frame();
    let r4 = |a: usize, b: usize, c: usize, d: usize| {
        op.apply(&wedge2(&f[a], &f[b])).dot(&wedge2(&f[c], &f[d]))
    };
    0.25 * (r4(0, 2, 0, 2) + r4(0, 3, 0, 3) + r4(1, 2, 1, 2) + r4(1, 3, 1, 3)
        - 2.0 * r4(0, 1, 2, 3))
}

/// Isotropic sectional curvature of a symmetric curvature operator.
pub fn isotropic_sectional(r: &CurvatureTensor, tau: &IsotropicPlane) -> f64 {
    isotropic_sectional_op(&r.op, tau)
}

/// Weitzenboeck operator in closed form, A(R) = Ricci•g − 2R + 2b(R).
pub fn weitzenbock(r: &CurvatureTensor) -> CurvOp {
    let ricci = SymBilinear4::new(ricci_matrix(&r.op)).expect("symmetric Ricci");
    let kn = kulkarni_nomizu(&ricci, &SymBilinear4::metric());
    kn - r.op.scale(2.0) + bianchi_op(&r.op).scale(2.0)
}

/// Weitzenboeck operator from its defining 4-argument expansion,
/// ⟨A(X∧Y), Z∧W⟩ = Ricci•g(X,Y,Z,W) + 2R(Z,X,Y,W) − 2R(W,X,Y,Z).
pub fn weitzenbock_definition(r: &CurvatureTensor) -> CurvOp {
    let ricci = SymBilinear4::new(ricci_matrix(&r.op)).expect("symmetric Ricci");
    let kn = kulkarni_nomizu(&ricci, &SymBilinear4::metric());
    let mut entries = [[0.0; 6]; 6];
    for (row, &(k, l)) in PAIRS.iter().enumerate() {
        for (col, &(i, j)) in PAIRS.iter().enumerate() {
            entries[row][col] = kn.entries[row][col] + 2.0 * r.op.four_index(k, i, j, l)
                - 2.0 * r.op.four_index(l, i, j, k);
        }
    }
    CurvOp::from_entries(entries)
}

/// Orthogonal decomposition of a symmetric curvature operator into the
/// star multiple, identity multiple, self-dual and anti-self-dual Weyl
/// parts, and the star-anticommuting part.
#[derive(Debug, Clone, Copy)]
pub struct Decomposition {
    pub r1: CurvOp,
    pub r2: CurvOp,
    pub r3p: CurvOp,
    pub r3m: CurvOp,
    pub r4: CurvOp,
}

impl Decomposition {
    /// Recombines the five parts.
    pub fn sum(&self) -> CurvOp {
        self.r1 + self.r2 + self.r3p + self.r3m + self.r4
    }

    /// The full Weyl part r3p + r3m.
    pub fn weyl(&self) -> CurvOp {
        self.r3p + self.r3m
    }
}

/// Splits R into R₁ = (tr(*R)/6)·star, R₂ = (tr R / 6)·Id,
/// R₄ = (R − *R*)/2 minus its star component, and the Weyl remainder
/// projected onto the self-dual and anti-self-dual blocks.
pub fn decompose(r: &CurvatureTensor) -> Decomposition {
    let star = CurvOp::star();
    let tr_star_r = star.compose(&r.op).trace();
    let r1 = star.scale(tr_star_r / 6.0);
    let rb = r.op - r1;
    let r2 = CurvOp::identity().scale(rb.trace() / 6.0);
    let conj = star.compose(&rb).compose(&star);
    let r4 = (rb - conj).scale(0.5);
    let r3 = rb - r2 - r4;
    let id = CurvOp::identity();
    let p_plus = (id + star).scale(0.5);
    let p_minus = (id - star).scale(0.5);
    let r3p = p_plus.compose(&r3).compose(&p_plus);
    let r3m = p_minus.compose(&r3).compose(&p_minus);
    Decomposition { r1, r2, r3p, r3m, r4 }
}

/// Euler form density: 𝓧(R) = ⟨R, *R*⟩ / (8π²) relative to Vol.
pub fn euler_form(op: &CurvOp) -> FourFormDensity {
    let conj = CurvOp::star().compose(op).compose(&CurvOp::star());
    FourFormDensity::new(op.inner(&conj) / (8.0 * std::f64::consts::PI.powi(2)))
}

/// Euler form from the basis expansion
/// R̲e₁₂∧R̲e₃₄ − R̲e₁₃∧R̲e₂₄ + R̲e₁₄∧R̲e₂₃ with R̲ = Rᵀ.
pub fn euler_form_basis_sum(op: &CurvOp) -> FourFormDensity {
    let rt = op.transpose();
    let col = |k: usize| {
        let mut b = [0.0; 6];
        b[k] = 1.0;
        rt.apply(&Bivector(b))
    };
    let val = col(0).wedge(&col(5)) - col(1).wedge(&col(4)) + col(2).wedge(&col(3));
    FourFormDensity::new(val / (4.0 * std::f64::consts::PI.powi(2)))
}

/// Pontrjagin form density: p₁(R) = ⟨R, R ∘ star⟩ / (4π²) relative to Vol.
pub fn pontrjagin_form(op: &CurvOp) -> FourFormDensity {
    let r_star = op.compose(&CurvOp::star());
    FourFormDensity::new(op.inner(&r_star) / (4.0 * std::f64::consts::PI.powi(2)))
}

/// Pontrjagin form from the basis expansion Σ R̲e_ij ∧ R̲e_ij.
pub fn pontrjagin_form_basis_sum(op: &CurvOp) -> FourFormDensity {
    let rt = op.transpose();
    let mut val = 0.0;
    for k in 0..6 {
        let mut b = [0.0; 6];
        b[k] = 1.0;
        let c = rt.apply(&Bivector(b));
        val += c.wedge(&c);
    }
    FourFormDensity::new(val / (4.0 * std::f64::consts::PI.powi(2)))
}

/// Euler-form shift under R → R + φ•g for Bianchi-free R:
/// s_R tr(φ)/2 − ⟨Ricci_R, φ⟩ + (tr φ)² − ‖φ‖². The Euler density moves
/// by shift/(4π²) while the Pontrjagin density is unchanged.
pub fn euler_shift(r: &CurvatureTensor, phi: &SymBilinear4) -> Result<f64, CurvopsError> {
    let b_norm = bianchi_op(&r.op).norm();
    if b_norm > VALIDATION_TOL {
        return Err(CurvopsError::NotBianchiFree { defect: b_norm });
    }
    let ricci = SymBilinear4::new(ricci_matrix(&r.op)).expect("symmetric Ricci");
    let s = scalar_of(&r.op);
    let tr = phi.trace();
    Ok(0.5 * s * tr - ricci.inner(phi) + tr * tr - phi.inner(phi))
}

/// First and second Chern data of a J-invariant curvature operator.
#[derive(Debug, Clone, Copy)]
pub struct ChernData {
    /// First Chern form as a 2-form, Ricci_{J,R} / 2π.
    pub c1: Bivector,
    /// Second Chern form density from the complex determinant.
    pub c2: FourFormDensity,
    /// The 2-form Ricci_{J,R}(X,Y) = ⟨R(X∧Y), ω_J⟩.
    pub star_ricci: Bivector,
    /// The 2-form Ψ_J(X,Y) = ½(Ricci(Y,JX) − Ricci(X,JY)).
    pub psi: Bivector,
    /// The 2-form b_J(X,Y) = −½ tr(Z → J b(R)(X,Y)(Z)).
    pub b_j: Bivector,
}

/// Bivector from the array W[i][j] = w(e_i, e_j) of a 2-form.
fn bivector_of_two_form(w: &[[f64; 4]; 4]) -> Bivector {
    let mut b = [0.0; 6];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        b[k] = w[i][j];
    }
    Bivector(b)
}

/// J-adapted orthonormal frame (X1, JX1, X2, JX2) for a valid J.
fn adapted_frame(j: &[[f64; 4]; 4]) -> [Vector4; 4] {
    let x1 = Vector4::basis(0);
    let y1 = mat4_apply(j, &x1);
    let mut best = Vector4::zero();
    let mut best_norm = -1.0;
    for c in 1..4 {
        let cand = Vector4::basis(c);
        let res = cand - x1.scale(cand.dot(&x1)) - y1.scale(cand.dot(&y1));
        if res.norm() > best_norm {
            best_norm = res.norm();
            best = res;
        }
    }
    let x2 = best.scale(1.0 / best.norm());
    let y2 = mat4_apply(j, &x2);
    [x1, y1, x2, y2]
}

/// Chern forms of a curvature operator with respect to a positive
/// orthogonal complex structure. The second Chern form requires the
/// operator values to commute with J (defect above 1e-9 is rejected).
pub fn chern_forms(
    r: &CurvatureTensor,
    j: &[[f64; 4]; 4],
) -> Result<ChernData, CurvopsError> {
    let omega_j = j_to_omega(j)?;

    let mut commutator_defect: f64 = 0.0;
    for k in 0..6 {
        let mut b = [0.0; 6];
        b[k] = 1.0;
        let m = r.op.apply(&Bivector(b)).skew_endo();
        let mj = mat4_mul(&m, j);
        let jm = mat4_mul(j, &m);
        for a in 0..4 {
            for c in 0..4 {
                commutator_defect = commutator_defect.max((mj[a][c] - jm[a][c]).abs());
            }
        }
    }
    if commutator_defect > 1e-9 {
        return Err(CurvopsError::NotJInvariant {
            defect: commutator_defect,
        });
    }

    let star_ricci = r.op.transpose().apply(&omega_j);
    let two_pi = 2.0 * std::f64::consts::PI;
    let c1 = star_ricci.scale(1.0 / two_pi);

    let ric = ricci_matrix(&r.op);
    let ric_j = mat4_mul(&ric, j);
    let mut psi_w = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            psi_w[a][b] = 0.5 * (ric_j[b][a] - ric_j[a][b]);
        }
    }
    let psi = bivector_of_two_form(&psi_w);

    let bop = bianchi_op(&r.op);
    let mut bj_w = [[0.0; 4]; 4];
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let mut e = [0.0; 6];
        e[k] = 1.0;
        let endo = bop.apply(&Bivector(e)).skew_endo();
        let je = mat4_mul(j, &endo);
        let tr: f64 = (0..4).map(|i| je[i][i]).sum();
        bj_w[a][b] = -0.5 * tr;
        bj_w[b][a] = 0.5 * tr;
    }
    let b_j = bivector_of_two_form(&bj_w);

    let frame = adapted_frame(j);
    let (x1, y1, x2, y2) = (&frame[0], &frame[1], &frame[2], &frame[3]);
    // m[beta][alpha] is a complex-valued 2-form, stored as a (re, im)
    // bivector pair; entries are W*_beta(R(Z∧W) W_alpha) over the basis
    // 2-planes (Z, W) with W_alpha = (X_alpha − i Y_alpha)/2.
    let mut m_re = [[[0.0; 6]; 2]; 2];
    let mut m_im = [[[0.0; 6]; 2]; 2];
    let xs = [x1, x2];
    let ys = [y1, y2];
    for k in 0..6 {
        let mut e = [0.0; 6];
        e[k] = 1.0;
        let p = r.op.apply(&Bivector(e)).skew_endo();
        for beta in 0..2 {
            for alpha in 0..2 {
                let pxa = mat4_apply(&p, xs[alpha]);
                let pya = mat4_apply(&p, ys[alpha]);
                m_re[beta][alpha][k] = 0.5 * (pxa.dot(xs[beta]) + pya.dot(ys[beta]));
                m_im[beta][alpha][k] = 0.5 * (pxa.dot(ys[beta]) - pya.dot(xs[beta]));
            }
        }
    }
    let wedge_c = |a_re: &[f64; 6], a_im: &[f64; 6], b_re: &[f64; 6], b_im: &[f64; 6]| {
        let (are, aim) = (Bivector(*a_re), Bivector(*a_im));
        let (bre, bim) = (Bivector(*b_re), Bivector(*b_im));
        (
            are.wedge(&bre) - aim.wedge(&bim),
            are.wedge(&bim) + aim.wedge(&bre),
        )
    };
    let (d1_re, d1_im) = wedge_c(&m_re[0][0], &m_im[0][0], &m_re[1][1], &m_im[1][1]);
    let (d2_re, d2_im) = wedge_c(&m_re[0][1], &m_im[0][1], &m_re[1][0], &m_im[1][0]);
    let det_re = d1_re - d2_re;
    let det_im = d1_im - d2_im;
    debug_assert!(det_im.abs() < 1e-9, "complex determinant must be real");
    let c2 = FourFormDensity::new(-det_re / (4.0 * std::f64::consts::PI.powi(2)));

    Ok(ChernData {
        c1,
        c2,
        star_ricci,
        psi,
        b_j,
    })
}

/// Standard normal draw by the Box-Muller transform.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random symmetric operator with entries uniform in [−1, 1].
pub fn random_curvature(rng: &mut impl Rng) -> CurvatureTensor {
    let mut entries = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in i..6 {
            let v = rng.gen_range(-1.0..1.0);
            entries[i][j] = v;
            entries[j][i] = v;
        }
    }
    CurvatureTensor {
        op: CurvOp::from_entries(entries),
    }
}

/// Random Bianchi-free operator: a random symmetric operator with its
/// star component (tr(*R)/6)·star removed.
pub fn random_bianchi_curvature(rng: &mut impl Rng) -> CurvatureTensor {
    let r = random_curvature(rng);
    let tr_star_r = CurvOp::star().compose(&r.op).trace();
    CurvatureTensor {
        op: r.op - CurvOp::star().scale(tr_star_r / 6.0),
    }
}

/// Random symmetric bilinear form with entries uniform in [−1, 1].
pub fn random_sym_bilinear(rng: &mut impl Rng) -> SymBilinear4 {
    let mut entries = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let v = rng.gen_range(-1.0..1.0);
            entries[i][j] = v;
            entries[j][i] = v;
        }
    }
    SymBilinear4 { entries }
}

/// Random orthonormal 4-frame from Gram-Schmidt on Gaussian draws;
/// near-degenerate draws are rejected and redrawn.
pub fn random_frame(rng: &mut impl Rng) -> [Vector4; 4] {
    loop {
        let mut frame = [Vector4::zero(); 4];
        for v in &mut frame {
            *v = Vector4([
                standard_normal(rng),
                standard_normal(rng),
                standard_normal(rng),
                standard_normal(rng),
            ]);
        }
        let mut ok = true;
        let mut ortho = [Vector4::zero(); 4];
        for i in 0..4 {
            let mut v = frame[i];
            for o in ortho.iter().take(i) {
                v = v - o.scale(v.dot(o));
            }
            let n = v.norm();
            if n < 1e-4 {
                ok = false;
                break;
            }
            ortho[i] = v.scale(1.0 / n);
        }
        if ok {
            return ortho;
        }
    }
}

/// Random isotropic plane from a random orthonormal frame.
pub fn random_isotropic_plane(rng: &mut impl Rng) -> IsotropicPlane {
    IsotropicPlane::new(random_frame(rng)).expect("Gram-Schmidt output is orthonormal")
}

/// Random J-invariant symmetric operator for a complex structure with
/// Kaehler form omega: values and support confined to the commutant
/// span{omega} ⊕ Λ²₋.
pub fn random_j_invariant(rng: &mut impl Rng, omega: &Bivector) -> CurvatureTensor {
    let (_, w_asd) = omega.sd_split();
    debug_assert!(w_asd.norm() < 1e-9);
    let mut basis: Vec<Bivector> = vec![omega.scale(1.0 / omega.norm())];
    for b in crate::alg4::asd_basis() {
        basis.push(b.scale(1.0 / b.norm()));
    }
    let mut proj = [[0.0; 6]; 6];
    for u in &basis {
        for i in 0..6 {
            for j in 0..6 {
                proj[i][j] += u.0[i] * u.0[j];
            }
        }
    }
    let p = CurvOp::from_entries(proj);
    let m = random_curvature(rng);
    CurvatureTensor {
        op: p.compose(&m.op).compose(&p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alg4::{omega1, omega2, omega3, standard_j1, standard_j2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

    #[test]
    fn invariants_of_identity_and_star() {
        let id = CurvatureTensor::identity();
        let inv = basic_invariants(&id);
        assert!((inv.ricci - SymBilinear4::metric().scale(3.0)).norm() < 1e-14);
        assert_eq!(inv.s, 12.0);
        assert!(inv.bianchi.norm() < 1e-14);
        assert!(inv.t.abs() < 1e-14);

        let star = CurvatureTensor::star();
        let inv = basic_invariants(&star);
        assert!(inv.ricci.norm() < 1e-14);
        assert_eq!(inv.s, 0.0);
        assert!((inv.bianchi - CurvOp::star().scale(3.0)).norm() < 1e-14);
        assert!((inv.t - 3.0).abs() < 1e-14);
    }

    #[test]
    fn kulkarni_nomizu_ricci() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x524943);
        for _ in 0..100 {
            let phi = random_sym_bilinear(&mut rng);
            let pg = CurvatureTensor::new(kulkarni_nomizu(&phi, &SymBilinear4::metric()))
                .unwrap();
            let inv = basic_invariants(&pg);
            let expect = SymBilinear4::metric().scale(phi.trace()) + phi.scale(2.0);
            assert!((inv.ricci - expect).norm() < 1e-12);
            assert!((inv.s - 6.0 * phi.trace()).abs() < 1e-12);
            assert!(inv.bianchi.norm() < 1e-12);
        }
    }

    #[test]
    fn conjugation_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x50323441);
        let star = CurvOp::star();
        for _ in 0..300 {
            let r = random_curvature(&mut rng);
            let inv = basic_invariants(&r);
            let conj = conjugations(&r);

            let ric_conj = SymBilinear4::new(ricci_matrix(&conj.star_r_star)).unwrap();
            let expect = SymBilinear4::metric().scale(0.5 * inv.s) - inv.ricci;
            assert!((ric_conj - expect).norm() < 1e-10);
            assert!((scalar_of(&conj.star_r_star) - inv.s).abs() < 1e-10);
            assert!((bianchi_op(&conj.star_r_star) - inv.bianchi).norm() < 1e-10);

            let r_star = r.op.compose(&star);
            let star_r = star.compose(&r.op);
            let ric_rs = ricci_matrix(&r_star);
            let ric_sr = ricci_matrix(&star_r);
            for i in 0..4 {
                for j in 0..4 {
                    let id = if i == j { inv.t } else { 0.0 };
                    assert!((ric_rs[i][j] - id).abs() < 1e-10);
                    assert!((ric_sr[i][j] - id).abs() < 1e-10);
                }
            }
            assert!((scalar_of(&star_r) - 4.0 * inv.t).abs() < 1e-10);
            assert!((scalar_of(&r_star) - 4.0 * inv.t).abs() < 1e-10);

            // The Bianchi map keeps the commutator in the skew part of
            // the operator space, and its scalar invariants vanish.
            let b_comm = bianchi_op(&conj.commutator);
            assert!((b_comm + b_comm.transpose()).norm() < 1e-10);
            assert!(star.compose(&conj.commutator).trace().abs() < 1e-10);
            assert!(t_of(&conj.commutator).abs() < 1e-10);

            let anti = star.compose(&r.op) + r.op.compose(&star);
            let expect = CurvOp::star().scale(r.op.trace());
            assert!((bianchi_op(&anti) - expect).norm() < 1e-10);

            let tau = random_isotropic_plane(&mut rng);
            let k_conj = isotropic_sectional_op(&conj.star_r_star, &tau);
            let k = isotropic_sectional_op(&r.op, &tau);
            assert!((k_conj - k).abs() < 1e-10);

            let f = tau.frame();
            let k_comm = isotropic_sectional_op(&conj.commutator, &tau);
            let s12 = sectional_op(&r.op, &f[0], &f[1]).unwrap();
            let s34 = sectional_op(&r.op, &f[2], &f[3]).unwrap();
            let eps = tau.orientation_sign();
            assert!((k_comm - 0.5 * eps * (s34 - s12)).abs() < 1e-10);
        }
    }

    #[test]
    fn isotropic_sectional_table_entries() {
        let tau = IsotropicPlane::standard();
        assert_eq!(tau.orientation_sign(), 1.0);
        assert!((isotropic_sectional(&CurvatureTensor::identity(), &tau) - 1.0).abs() < 1e-14);
        assert!((isotropic_sectional(&CurvatureTensor::star(), &tau) + 0.5).abs() < 1e-14);

        let flipped = IsotropicPlane::new([
            Vector4::basis(1),
            Vector4::basis(0),
            Vector4::basis(2),
            Vector4::basis(3),
        ])
        .unwrap();
        assert_eq!(flipped.orientation_sign(), -1.0);
        assert!((isotropic_sectional(&CurvatureTensor::star(), &flipped) - 0.5).abs() < 1e-14);
        assert!((isotropic_sectional(&CurvatureTensor::identity(), &flipped) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sectional_values() {
        let id = CurvatureTensor::identity();
        let x = Vector4([1.0, 2.0, 0.5, -0.3]);
        let y = Vector4([0.0, 1.0, -1.0, 2.0]);
        assert!((sectional(&id, &x, &y).unwrap() - 1.0).abs() < 1e-14);
        let star = CurvatureTensor::star();
        assert!(
            sectional(&star, &Vector4::basis(0), &Vector4::basis(1))
                .unwrap()
                .abs()
                < 1e-14
        );
        assert!(matches!(
            sectional(&id, &x, &x.scale(2.0)),
            Err(CurvopsError::DegenerateSpan { .. })
        ));
    }

    #[test]
    fn weitzenbock_closed_form_and_definition() {
        let id = CurvatureTensor::identity();
        assert!((weitzenbock(&id) - CurvOp::identity().scale(4.0)).norm() < 1e-13);
        let star = CurvatureTensor::star();
        assert!((weitzenbock(&star) - CurvOp::star().scale(4.0)).norm() < 1e-13);

        let mut rng = ChaCha8Rng::seed_from_u64(0x5745495a);
        for _ in 0..100 {
            let r = random_curvature(&mut rng);
            let a_closed = weitzenbock(&r);
            let a_def = weitzenbock_definition(&r);
            assert!((a_closed - a_def).norm() < 1e-12);

            let inv = basic_invariants(&r);
            let a_inv = basic_invariants(&CurvatureTensor::new(a_closed).unwrap());
            assert!((a_inv.ricci - SymBilinear4::metric().scale(inv.s)).norm() < 1e-11);
            assert!((a_inv.bianchi - inv.bianchi.scale(4.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn weitzenbock_preserves_blocks_on_bianchi_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x424c4f43);
        let star = CurvOp::star();
        for _ in 0..50 {
            let r = random_bianchi_curvature(&mut rng);
            let a = weitzenbock(&r);
            let comm = star.compose(&a) - a.compose(&star);
            assert!(comm.norm() < 1e-11, "commutator norm {}", comm.norm());
        }
    }

    #[test]
    fn decomposition_reconstructs_and_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4445434f);
        for _ in 0..200 {
            let r = random_curvature(&mut rng);
            let d = decompose(&r);
            assert!((d.sum() - r.op).norm() < 1e-12);
            let parts = [d.r1, d.r2, d.r3p, d.r3m, d.r4];
            for (i, a) in parts.iter().enumerate() {
                for b in parts.iter().skip(i + 1) {
                    assert!(a.inner(b).abs() < 1e-11);
                }
            }
            let norm_sq: f64 = parts.iter().map(|p| p.inner(p)).sum();
            assert!((norm_sq - r.op.inner(&r.op)).abs() < 1e-10);

            let again = decompose(&CurvatureTensor::new(d.r3p + d.r3m).unwrap());
            assert!((again.r3p - d.r3p).norm() < 1e-11);
            assert!((again.r3m - d.r3m).norm() < 1e-11);
            assert!(again.r1.norm() < 1e-11);
            assert!(again.r2.norm() < 1e-11);
            assert!(again.r4.norm() < 1e-11);

            let star = CurvOp::star();
            assert!((star.compose(&d.r3p) - d.r3p).norm() < 1e-11);
            assert!((star.compose(&d.r3m) + d.r3m).norm() < 1e-11);
            assert!((star.compose(&d.r4) + d.r4.compose(&star)).norm() < 1e-11);
            assert!(d.r3p.trace().abs() < 1e-11);
            assert!(d.r3m.trace().abs() < 1e-11);
        }
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose(&CurvatureTensor::identity());
        assert!((d.r2 - CurvOp::identity()).norm() < 1e-14);
        assert!(d.r1.norm() + d.r3p.norm() + d.r3m.norm() + d.r4.norm() < 1e-14);

        let d = decompose(&CurvatureTensor::star());
        assert!((d.r1 - CurvOp::star()).norm() < 1e-14);
        assert!(d.r2.norm() + d.r3p.norm() + d.r3m.norm() + d.r4.norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(0x52344b4e);
        let mut phi0 = random_sym_bilinear(&mut rng);
        let t = phi0.trace() / 4.0;
        for i in 0..4 {
            phi0.entries[i][i] -= t;
        }
        let r = CurvatureTensor::new(kulkarni_nomizu(&phi0, &SymBilinear4::metric())).unwrap();
        let d = decompose(&r);
        assert!((d.r4 - r.op).norm() < 1e-12);
        assert!(d.r1.norm() + d.r2.norm() + d.r3p.norm() + d.r3m.norm() < 1e-12);

        let phi = random_sym_bilinear(&mut rng);
        let pg = CurvatureTensor::new(kulkarni_nomizu(&phi, &SymBilinear4::metric())).unwrap();
        let d = decompose(&pg);
        let g = SymBilinear4::metric();
        let expect_r2 = kulkarni_nomizu(&g, &g).scale(phi.trace() / 4.0);
        let phi_tf = phi - g.scale(phi.trace() / 4.0);
        let expect_r4 = kulkarni_nomizu(&phi_tf, &g);
        assert!((d.r2 - expect_r2).norm() < 1e-12);
        assert!((d.r4 - expect_r4).norm() < 1e-12);
        assert!(d.r1.norm() + d.r3p.norm() + d.r3m.norm() < 1e-12);
    }

    #[test]
    fn r4_sectional_antisymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x52345345);
        let mut phi0 = random_sym_bilinear(&mut rng);
        let t = phi0.trace() / 4.0;
        for i in 0..4 {
            phi0.entries[i][i] -= t;
        }
        let r = CurvatureTensor::new(kulkarni_nomizu(&phi0, &SymBilinear4::metric())).unwrap();
        for _ in 0..200 {
            let f = random_frame(&mut rng);
            let s = sectional(&r, &f[0], &f[1]).unwrap();
            let s_perp = sectional(&r, &f[2], &f[3]).unwrap();
            assert!((s + s_perp).abs() < 1e-11);
            let tau = IsotropicPlane::new(f).unwrap();
            assert!(isotropic_sectional(&r, &tau).abs() < 1e-11);
        }
    }

    #[test]
    fn characteristic_form_values() {
        let id = CurvatureTensor::identity();
        assert!((euler_form(&id.op).coefficient - 3.0 / (4.0 * PI2)).abs() < 1e-14);
        assert!(pontrjagin_form(&id.op).coefficient.abs() < 1e-14);

        let lam = 0.7;
        let ls = CurvOp::star().scale(lam);
        assert!((euler_form(&ls).coefficient - 3.0 * lam * lam / (4.0 * PI2)).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(0x45554c52);
        for _ in 0..300 {
            let r = random_curvature(&mut rng);
            let e = euler_form(&r.op);
            let e_sum = euler_form_basis_sum(&r.op);
            assert!((e.coefficient - e_sum.coefficient).abs() < 1e-12);
            let p = pontrjagin_form(&r.op);
            let p_sum = pontrjagin_form_basis_sum(&r.op);
            assert!((p.coefficient - p_sum.coefficient).abs() < 1e-12);

            let mut entries = [[0.0; 6]; 6];
            for i in 0..6 {
                for j in 0..6 {
                    entries[i][j] = rng.gen_range(-1.0..1.0);
                }
            }
            let general = CurvOp::from_entries(entries);
            let gt = general.transpose();
            assert!(
                (euler_form(&general).coefficient - euler_form_basis_sum(&general).coefficient)
                    .abs()
                    < 1e-12
            );
            assert!(
                (euler_form(&gt).coefficient - euler_form(&general).coefficient).abs() < 1e-12
            );
            let star = CurvOp::star();
            let comm = star.compose(&general) - general.compose(&star);
            let expect = general.inner(&comm) / (4.0 * PI2);
            assert!(
                (pontrjagin_form(&gt).coefficient - pontrjagin_form(&general).coefficient
                    - expect)
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn euler_shift_and_p1_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x53484654);
        for _ in 0..200 {
            let r = random_bianchi_curvature(&mut rng);
            let phi = random_sym_bilinear(&mut rng);
            let q = CurvatureTensor::new(
                r.op + kulkarni_nomizu(&phi, &SymBilinear4::metric()),
            )
            .unwrap();
            let shift = euler_shift(&r, &phi).unwrap();
            let lhs = euler_form(&q.op).coefficient;
            let rhs = euler_form(&r.op).coefficient + shift / (4.0 * PI2);
            assert!((lhs - rhs).abs() < 1e-12);
            assert!(
                (pontrjagin_form(&q.op).coefficient - pontrjagin_form(&r.op).coefficient).abs()
                    < 1e-12
            );

            let lam: f64 = rng.gen_range(-1.0..1.0);
            let shifted = r.op + CurvOp::star().scale(lam);
            assert!(
                (euler_form(&shifted).coefficient
                    - euler_form(&r.op).coefficient
                    - 3.0 * lam * lam / (4.0 * PI2))
                    .abs()
                    < 1e-12
            );
            assert!(
                (pontrjagin_form(&shifted).coefficient
                    - pontrjagin_form(&r.op).coefficient
                    - lam * scalar_of(&r.op) / (4.0 * PI2))
                    .abs()
                    < 1e-12
            );
        }
        let r = random_curvature(&mut rng);
        assert!(matches!(
            euler_shift(&r, &SymBilinear4::metric()),
            Err(CurvopsError::NotBianchiFree { .. })
        ));
    }

    #[test]
    fn remark_norm_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4e4f524d);
        for _ in 0..200 {
            let r = random_bianchi_curvature(&mut rng);
            let d = decompose(&r);
            let lhs = 8.0 * PI2 * euler_form(&r.op).coefficient;
            let rhs = d.r2.inner(&d.r2) + d.weyl().inner(&d.weyl()) - d.r4.inner(&d.r4);
            assert!((lhs - rhs).abs() < 1e-10);
            let lhs = 4.0 * PI2 * pontrjagin_form(&r.op).coefficient;
            let rhs = d.r3p.inner(&d.r3p) - d.r3m.inner(&d.r3m);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn cor_zero_euler_iff_sigma2() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x434f5234);
        let g = SymBilinear4::metric();
        for _ in 0..100 {
            // Construct sigma2 = 0 by scaling a rank-one-diagonal family.
            let a: f64 = rng.gen_range(1.0..2.0);
            let b: f64 = rng.gen_range(-0.9..-0.1);
            // Eigenvalues (a, b, c, 0) with ab + ac + bc = 0.
            let c = -a * b / (a + b);
            let phi = SymBilinear4::from_diag([a, b, c, 0.0]);
            let e = euler_form(&kulkarni_nomizu(&phi, &g)).coefficient;
            assert!(
                e.abs() * 4.0 * PI2 < 1e-10,
                "sigma2 {} euler {}",
                phi.sigma2(),
                e
            );
            let phi2 = random_sym_bilinear(&mut rng);
            let e2 = 4.0 * PI2 * euler_form(&kulkarni_nomizu(&phi2, &g)).coefficient;
            assert!((e2 - 2.0 * phi2.sigma2()).abs() < 1e-11);
        }
    }

    #[test]
    fn chern_forms_on_invariant_operators() {
        let j1 = standard_j1();
        let id = CurvatureTensor::identity();
        let sr = star_ricci_form(&id.op, &omega1());
        assert!((sr - omega1()).norm() < 1e-13);
        let s_j = 2.0 * sr.dot(&omega1());
        assert!((s_j - 4.0).abs() < 1e-13);

        // Projector onto omega1, halved: a J-invariant operator with
        // Euler density 1/(8 pi^2).
        let mut entries = [[0.0; 6]; 6];
        let w = omega1();
        for i in 0..6 {
            for j in 0..6 {
                entries[i][j] = 0.5 * w.0[i] * w.0[j];
            }
        }
        let r = CurvatureTensor::from_entries(entries);
        let data = chern_forms(&r, &j1).unwrap();
        assert!((data.c2.coefficient - 1.0 / (8.0 * PI2)).abs() < 1e-14);
        assert!((data.c2.coefficient - euler_form(&r.op).coefficient).abs() < 1e-14);
        let c1_sq = data.c1.wedge(&data.c1);
        let p1 = pontrjagin_form(&r.op).coefficient;
        assert!((p1 - (c1_sq - 2.0 * data.c2.coefficient)).abs() < 1e-13);
        assert!((p1 - 1.0 / (4.0 * PI2)).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(0x4348524e);
        for seed_omega in [omega1(), omega2(), omega3()] {
            let j = crate::alg4::omega_to_j(&seed_omega).unwrap();
            for _ in 0..50 {
                let r = random_j_invariant(&mut rng, &seed_omega);
                let data = chern_forms(&r, &j).unwrap();
                let p1 = pontrjagin_form(&r.op).coefficient;
                let c1_sq = data.c1.wedge(&data.c1);
                assert!((p1 - (c1_sq - 2.0 * data.c2.coefficient)).abs() < 1e-10);
                assert!(
                    (data.c2.coefficient - euler_form(&r.op).coefficient).abs() < 1e-10
                );
                assert!((data.c1 - data.star_ricci.scale(0.5 / std::f64::consts::PI)).norm() < 1e-12);
                assert!((data.b_j - (data.star_ricci - data.psi)).norm() < 1e-9);
            }
        }

        let generic = random_curvature(&mut rng);
        assert!(matches!(
            chern_forms(&generic, &j1),
            Err(CurvopsError::NotJInvariant { .. })
        ));
    }

    #[test]
    fn psi_matches_invariant_ricci_rotation() {
        // For J-invariant symmetric R the Ricci tensor is J-invariant
        // and Psi(X, Y) = Ricci(JX, Y).
        let mut rng = ChaCha8Rng::seed_from_u64(0x505349);
        let j = standard_j1();
        for _ in 0..50 {
            let r = random_j_invariant(&mut rng, &omega1());
            let data = chern_forms(&r, &j).unwrap();
            let ric = ricci_matrix(&r.op);
            for a in 0..4 {
                for b in 0..4 {
                    let mut ric_jj = 0.0;
                    for c in 0..4 {
                        for d in 0..4 {
                            ric_jj += j[c][a] * ric[c][d] * j[d][b];
                        }
                    }
                    assert!((ric_jj - ric[a][b]).abs() < 1e-10);
                }
            }
            let mut psi_expect = [[0.0; 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    let mut s = 0.0;
                    for c in 0..4 {
                        s += j[c][a] * ric[c][b];
                    }
                    psi_expect[a][b] = s;
                }
            }
            let psi_expect_biv = bivector_of_two_form(&psi_expect);
            assert!((data.psi - psi_expect_biv).norm() < 1e-10);
        }
    }

    #[test]
    fn j2_adapted_chern_data() {
        let j2 = standard_j2();
        let id = CurvatureTensor::identity();
        assert!((star_ricci_form(&id.op, &omega2()) - omega2()).norm() < 1e-13);
        // A J2-invariant draw goes through the J2-adapted frame path.
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a32);
        let r = random_j_invariant(&mut rng, &omega2());
        let data = chern_forms(&r, &j2).unwrap();
        let p1 = pontrjagin_form(&r.op).coefficient;
        let c1_sq = data.c1.wedge(&data.c1);
        assert!((p1 - (c1_sq - 2.0 * data.c2.coefficient)).abs() < 1e-10);
    }

    #[test]
    fn bianchi_free_kisot_characterization() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4b495354);
        // A Bianchi-free operator with nonzero r2 part: K_isot is not
        // identically zero.
        let r = CurvatureTensor::identity();
        let mut max_k: f64 = 0.0;
        for _ in 0..200 {
            let tau = random_isotropic_plane(&mut rng);
            max_k = max_k.max(isotropic_sectional(&r, &tau).abs());
        }
        assert!(max_k > 1e-3);
    }
}
