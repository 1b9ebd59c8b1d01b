//! Exact linear algebra of the oriented Euclidean 4-space.
//!
//! Everything downstream (curvature operators, chart calculus,
//! transgression forms) expresses bivectors and operators in the basis
//! and sign conventions fixed in this module: the ordered bivector basis
//! [`PAIRS`], the Hodge star with orientation e1∧e2∧e3∧e4 = Vol, the
//! self-dual frame `omega1, omega2, omega3`, and the identification of
//! bivectors with skew endomorphisms through w(X, Y) = g(AX, Y).

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Absolute tolerance for structural validity checks (orthogonality,
/// symmetry, positivity) on unit-scale inputs.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Tolerance used when classifying a 6x6 array as symmetric or skew.
pub const TAG_TOL: f64 = 1e-12;

/// Index pairs (i, j), i < j, naming the ordered bivector basis
/// (e1∧e2, e1∧e3, e1∧e4, e2∧e3, e2∧e4, e3∧e4) in 0-based indices.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Position of the unordered pair {i, j} in [`PAIRS`] together with the
/// sign relating e_i∧e_j to the stored basis element. `None` when i == j.
pub fn pair_index(i: usize, j: usize) -> Option<(usize, f64)> {
    if i == j {
        return None;
    }
    let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
    PAIRS.iter().position(|&p| p == (a, b)).map(|k| (k, sign))
}

/// Errors from structural validation of algebra inputs.
#[derive(Debug, Error)]
pub enum Alg4Error {
    /// A 4x4 array expected to be symmetric was not.
    #[error("matrix is not symmetric (max asymmetry {defect:.3e})")]
    NotSymmetric { defect: f64 },
    /// A candidate complex structure failed validation.
    #[error("not a positive orthogonal complex structure (J^2+I defect {square:.3e}, orthogonality defect {orthogonality:.3e}, anti-self-dual defect {positivity:.3e})")]
    InvalidComplexStructure {
        square: f64,
        orthogonality: f64,
        positivity: f64,
    },
    /// A bivector expected to be the Kaehler form of a complex structure
    /// (self-dual, norm sqrt(2)) was not.
    #[error("bivector is not a self-dual form of norm sqrt(2) (norm^2 {norm_sq:.6}, anti-self-dual defect {asd_defect:.3e})")]
    NotAKaehlerForm { norm_sq: f64, asd_defect: f64 },
    /// Two vectors supposed to span a 2-plane were linearly dependent.
    #[error("vectors do not span a 2-plane (wedge norm {wedge_norm:.3e})")]
    DegenerateSpan { wedge_norm: f64 },
    /// A frame expected to be orthonormal was not.
    #[error("frame is not orthonormal (max Gram defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },
}

/// Vector in the fixed oriented orthonormal basis e1..e4.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector4(pub [f64; 4]);

impl Vector4 {
    pub fn zero() -> Self {
        Vector4([0.0; 4])
    }

    /// The i-th basis vector, i in 0..4.
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        Vector4(v)
    }

    pub fn dot(&self, other: &Vector4) -> f64 {
        (0..4).map(|i| self.0[i] * other.0[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> Vector4 {
        Vector4([self.0[0] * c, self.0[1] * c, self.0[2] * c, self.0[3] * c])
    }
}

impl Add for Vector4 {
    type Output = Vector4;
    fn add(self, rhs: Vector4) -> Vector4 {
        Vector4([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }
}

impl Sub for Vector4 {
    type Output = Vector4;
    fn sub(self, rhs: Vector4) -> Vector4 {
        Vector4([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
            self.0[3] - rhs.0[3],
        ])
    }
}

impl Neg for Vector4 {
    type Output = Vector4;
    fn neg(self) -> Vector4 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Vector4 {
    type Output = Vector4;
    fn mul(self, c: f64) -> Vector4 {
        self.scale(c)
    }
}

/// Bivector with components in the [`PAIRS`] basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bivector(pub [f64; 6]);

impl Bivector {
    pub fn zero() -> Self {
        Bivector([0.0; 6])
    }

    /// The basis bivector e_i∧e_j (any i != j, with sign).
    pub fn basis(i: usize, j: usize) -> Self {
        let (k, sign) = pair_index(i, j).expect("basis bivector needs i != j");
        let mut b = [0.0; 6];
        b[k] = sign;
        Bivector(b)
    }

    pub fn dot(&self, other: &Bivector) -> f64 {
        (0..6).map(|k| self.0[k] * other.0[k]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> Bivector {
        let mut b = self.0;
        for x in &mut b {
            *x *= c;
        }
        Bivector(b)
    }

    /// Hodge star with respect to the orientation e1∧e2∧e3∧e4 = Vol.
    pub fn hodge_star(&self) -> Bivector {
        let b = &self.0;
        Bivector([b[5], -b[4], b[3], b[2], -b[1], b[0]])
    }

    /// Splits into (self-dual, anti-self-dual) parts via (1 ± star)/2.
    pub fn sd_split(&self) -> (Bivector, Bivector) {
        let s = self.hodge_star();
        ((*self + s).scale(0.5), (*self - s).scale(0.5))
    }

    /// Coefficient c in self ∧ other = c · Vol. Equals ⟨self, star(other)⟩.
    pub fn wedge(&self, other: &Bivector) -> f64 {
        let a = &self.0;
        let b = &other.0;
        a[0] * b[5] - a[1] * b[4] + a[2] * b[3] + a[3] * b[2] - a[4] * b[1] + a[5] * b[0]
    }

    /// Value of the corresponding 2-form on a pair of vectors,
    /// w(X, Y) = ⟨w, X∧Y⟩.
    pub fn eval(&self, x: &Vector4, y: &Vector4) -> f64 {
        self.dot(&wedge2(x, y))
    }

    /// The 4x4 array W with W[i][j] = w(e_i, e_j).
    pub fn two_form_matrix(&self) -> [[f64; 4]; 4] {
        let mut w = [[0.0; 4]; 4];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            w[i][j] = self.0[k];
            w[j][i] = -self.0[k];
        }
        w
    }

    /// The skew endomorphism A with g(A e_i, e_j) = w(e_i, e_j); the
    /// inverse of [`bivector_of_skew_endo`]. Under this identification
    /// the bivector inner product equals half the Hilbert-Schmidt
    /// product of endomorphisms.
    pub fn skew_endo(&self) -> [[f64; 4]; 4] {
        transpose4(&self.two_form_matrix())
    }
}

impl Add for Bivector {
    type Output = Bivector;
    fn add(self, rhs: Bivector) -> Bivector {
        let mut b = self.0;
        for k in 0..6 {
            b[k] += rhs.0[k];
        }
        Bivector(b)
    }
}

impl Sub for Bivector {
    type Output = Bivector;
    fn sub(self, rhs: Bivector) -> Bivector {
        let mut b = self.0;
        for k in 0..6 {
            b[k] -= rhs.0[k];
        }
        Bivector(b)
    }
}

impl Neg for Bivector {
    type Output = Bivector;
    fn neg(self) -> Bivector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Bivector {
    type Output = Bivector;
    fn mul(self, c: f64) -> Bivector {
        self.scale(c)
    }
}

/// Exterior product of two vectors, components (v_i w_j − v_j w_i).
pub fn wedge2(v: &Vector4, w: &Vector4) -> Bivector {
    let mut b = [0.0; 6];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        b[k] = v.0[i] * w.0[j] - v.0[j] * w.0[i];
    }
    Bivector(b)
}

/// Bivector of a skew endomorphism A, defined by w(X, Y) = g(AX, Y).
pub fn bivector_of_skew_endo(a: &[[f64; 4]; 4]) -> Bivector {
    let mut b = [0.0; 6];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        b[k] = a[j][i];
    }
    Bivector(b)
}

/// Self-dual frame element w1 = e1∧e2 + e3∧e4, norm sqrt(2).
pub fn omega1() -> Bivector {
    Bivector([1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
}

/// Self-dual frame element w2 = e1∧e3 − e2∧e4, norm sqrt(2).
pub fn omega2() -> Bivector {
    Bivector([0.0, 1.0, 0.0, 0.0, -1.0, 0.0])
}

/// Self-dual frame element w3 = e1∧e4 + e2∧e3, norm sqrt(2).
pub fn omega3() -> Bivector {
    Bivector([0.0, 0.0, 1.0, 1.0, 0.0, 0.0])
}

/// Anti-self-dual frame: w1- = e1∧e2 − e3∧e4 and its two companions.
pub fn asd_basis() -> [Bivector; 3] {
    [
        Bivector([1.0, 0.0, 0.0, 0.0, 0.0, -1.0]),
        Bivector([0.0, 1.0, 0.0, 0.0, 1.0, 0.0]),
        Bivector([0.0, 0.0, 1.0, -1.0, 0.0, 0.0]),
    ]
}

/// Symmetric bilinear form on the 4-space (entries in the fixed
/// orthonormal basis). Construction symmetrizes after validating so the
/// stored array is exactly symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymBilinear4 {
    pub entries: [[f64; 4]; 4],
}

impl SymBilinear4 {
    /// Validates symmetry to [`VALIDATION_TOL`] and stores (A + Aᵀ)/2.
    pub fn new(entries: [[f64; 4]; 4]) -> Result<Self, Alg4Error> {
        let mut defect: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                defect = defect.max((entries[i][j] - entries[j][i]).abs());
            }
        }
        if defect > VALIDATION_TOL {
            return Err(Alg4Error::NotSymmetric { defect });
        }
        let mut sym = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                sym[i][j] = 0.5 * (entries[i][j] + entries[j][i]);
            }
        }
        Ok(SymBilinear4 { entries: sym })
    }

    pub fn zero() -> Self {
        SymBilinear4 {
            entries: [[0.0; 4]; 4],
        }
    }

    pub fn from_diag(d: [f64; 4]) -> Self {
        let mut entries = [[0.0; 4]; 4];
        for i in 0..4 {
            entries[i][i] = d[i];
        }
        SymBilinear4 { entries }
    }

    /// The Euclidean metric g (identity array).
    pub fn metric() -> Self {
        Self::from_diag([1.0; 4])
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.entries[i][i]).sum()
    }

    /// Full Frobenius pairing Σ a_ij b_ij, so ‖g‖² = 4.
    pub fn inner(&self, other: &SymBilinear4) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += self.entries[i][j] * other.entries[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Second elementary symmetric function of the eigenvalues,
    /// σ₂ = ((tr φ)² − tr(φ²)) / 2.
    pub fn sigma2(&self) -> f64 {
        let t = self.trace();
        let mut t2 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                t2 += self.entries[i][j] * self.entries[j][i];
            }
        }
        0.5 * (t * t - t2)
    }

    /// The endomorphism φ♯ applied to a vector.
    pub fn apply(&self, v: &Vector4) -> Vector4 {
        let mut out = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += self.entries[i][j] * v.0[j];
            }
        }
        Vector4(out)
    }

    pub fn scale(&self, c: f64) -> SymBilinear4 {
        let mut entries = self.entries;
        for row in &mut entries {
            for x in row {
                *x *= c;
            }
        }
        SymBilinear4 { entries }
    }
}

impl Add for SymBilinear4 {
    type Output = SymBilinear4;
    fn add(self, rhs: SymBilinear4) -> SymBilinear4 {
        let mut entries = self.entries;
        for i in 0..4 {
            for j in 0..4 {
                entries[i][j] += rhs.entries[i][j];
            }
        }
        SymBilinear4 { entries }
    }
}

impl Sub for SymBilinear4 {
    type Output = SymBilinear4;
    fn sub(self, rhs: SymBilinear4) -> SymBilinear4 {
        let mut entries = self.entries;
        for i in 0..4 {
            for j in 0..4 {
                entries[i][j] -= rhs.entries[i][j];
            }
        }
        SymBilinear4 { entries }
    }
}

/// Symmetry classification of a curvature operator array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryTag {
    Symmetric,
    Skew,
    General,
}

/// Linear operator on bivectors, stored as a 6x6 array in the [`PAIRS`]
/// basis: `entries[row][col]` is ⟨R(basis col), basis row⟩, so that
/// `entries[kl][ij] = R(e_i, e_j, e_k, e_l)` in 4-argument form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvOp {
    pub entries: [[f64; 6]; 6],
    pub symmetry_tag: SymmetryTag,
}

impl CurvOp {
    /// Wraps an array, inferring the symmetry tag to [`TAG_TOL`].
    pub fn from_entries(entries: [[f64; 6]; 6]) -> Self {
        let mut sym_defect: f64 = 0.0;
        let mut skew_defect: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                sym_defect = sym_defect.max((entries[i][j] - entries[j][i]).abs());
                skew_defect = skew_defect.max((entries[i][j] + entries[j][i]).abs());
            }
        }
        let symmetry_tag = if sym_defect <= TAG_TOL {
            SymmetryTag::Symmetric
        } else if skew_defect <= TAG_TOL {
            SymmetryTag::Skew
        } else {
            SymmetryTag::General
        };
        CurvOp {
            entries,
            symmetry_tag,
        }
    }

    pub fn zero() -> Self {
        CurvOp::from_entries([[0.0; 6]; 6])
    }

    pub fn identity() -> Self {
        let mut entries = [[0.0; 6]; 6];
        for k in 0..6 {
            entries[k][k] = 1.0;
        }
        CurvOp::from_entries(entries)
    }

    /// The Hodge star as an operator on bivectors.
    pub fn star() -> Self {
        let mut entries = [[0.0; 6]; 6];
        entries[0][5] = 1.0;
        entries[1][4] = -1.0;
        entries[2][3] = 1.0;
        entries[3][2] = 1.0;
        entries[4][1] = -1.0;
        entries[5][0] = 1.0;
        CurvOp::from_entries(entries)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetry_tag == SymmetryTag::Symmetric
    }

    pub fn apply(&self, b: &Bivector) -> Bivector {
        let mut out = [0.0; 6];
        for row in 0..6 {
            for col in 0..6 {
                out[row] += self.entries[row][col] * b.0[col];
            }
        }
        Bivector(out)
    }

    /// Operator composition self ∘ other.
    pub fn compose(&self, other: &CurvOp) -> CurvOp {
        let mut entries = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                let mut s = 0.0;
                for k in 0..6 {
                    s += self.entries[i][k] * other.entries[k][j];
                }
                entries[i][j] = s;
            }
        }
        CurvOp::from_entries(entries)
    }

    pub fn transpose(&self) -> CurvOp {
        let mut entries = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                entries[i][j] = self.entries[j][i];
            }
        }
        CurvOp::from_entries(entries)
    }

    pub fn trace(&self) -> f64 {
        (0..6).map(|k| self.entries[k][k]).sum()
    }

    /// Full trace pairing Σ a_ij b_ij, so ⟨Id, Id⟩ = 6.
    pub fn inner(&self, other: &CurvOp) -> f64 {
        let mut s = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                s += self.entries[i][j] * other.entries[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> CurvOp {
        let mut entries = self.entries;
        for row in &mut entries {
            for x in row {
                *x *= c;
            }
        }
        CurvOp::from_entries(entries)
    }

    /// 4-argument component R(e_i, e_j, e_k, e_l) = ⟨R(e_i∧e_j), e_k∧e_l⟩.
    pub fn four_index(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let (col, s1) = match pair_index(i, j) {
            Some(p) => p,
            None => return 0.0,
        };
        let (row, s2) = match pair_index(k, l) {
            Some(p) => p,
            None => return 0.0,
        };
        s1 * s2 * self.entries[row][col]
    }

    /// Conjugation *R* by the Hodge star.
    pub fn star_conjugate(&self) -> CurvOp {
        let star = CurvOp::star();
        star.compose(self).compose(&star)
    }
}

impl Add for CurvOp {
    type Output = CurvOp;
    fn add(self, rhs: CurvOp) -> CurvOp {
        let mut entries = self.entries;
        for i in 0..6 {
            for j in 0..6 {
                entries[i][j] += rhs.entries[i][j];
            }
        }
        CurvOp::from_entries(entries)
    }
}

impl Sub for CurvOp {
    type Output = CurvOp;
    fn sub(self, rhs: CurvOp) -> CurvOp {
        let mut entries = self.entries;
        for i in 0..6 {
            for j in 0..6 {
                entries[i][j] -= rhs.entries[i][j];
            }
        }
        CurvOp::from_entries(entries)
    }
}

impl Neg for CurvOp {
    type Output = CurvOp;
    fn neg(self) -> CurvOp {
        self.scale(-1.0)
    }
}

impl Mul<f64> for CurvOp {
    type Output = CurvOp;
    fn mul(self, c: f64) -> CurvOp {
        self.scale(c)
    }
}

/// Kulkarni-Nomizu product of two symmetric bilinear forms, as the
/// symmetric operator with 4-argument expansion
/// (ξ•φ)(X,Y,Z,W) = ξ(X,Z)φ(Y,W) + ξ(Y,W)φ(X,Z) − ξ(X,W)φ(Y,Z) − ξ(Y,Z)φ(X,W).
pub fn kulkarni_nomizu(xi: &SymBilinear4, phi: &SymBilinear4) -> CurvOp {
    let x = &xi.entries;
    let p = &phi.entries;
    let mut entries = [[0.0; 6]; 6];
    for (row, &(k, l)) in PAIRS.iter().enumerate() {
        for (col, &(i, j)) in PAIRS.iter().enumerate() {
            entries[row][col] =
                x[i][k] * p[j][l] + x[j][l] * p[i][k] - x[i][l] * p[j][k] - x[j][k] * p[i][l];
        }
    }
    CurvOp::from_entries(entries)
}

/// Coefficient of a 4-form relative to Vol = e1∧e2∧e3∧e4.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourFormDensity {
    pub coefficient: f64,
}

impl FourFormDensity {
    pub fn new(coefficient: f64) -> Self {
        FourFormDensity { coefficient }
    }
}

impl Add for FourFormDensity {
    type Output = FourFormDensity;
    fn add(self, rhs: FourFormDensity) -> FourFormDensity {
        FourFormDensity::new(self.coefficient + rhs.coefficient)
    }
}

impl Sub for FourFormDensity {
    type Output = FourFormDensity;
    fn sub(self, rhs: FourFormDensity) -> FourFormDensity {
        FourFormDensity::new(self.coefficient - rhs.coefficient)
    }
}

/// Kaehler form of an orthogonal complex structure, w_J(X, Y) = g(JX, Y).
/// Validates J² = −I, orthogonality, and positivity (self-duality of the
/// resulting form) to [`VALIDATION_TOL`].
pub fn j_to_omega(j: &[[f64; 4]; 4]) -> Result<Bivector, Alg4Error> {
    let jj = mat4_mul(j, j);
    let jt_j = mat4_mul(&transpose4(j), j);
    let mut square: f64 = 0.0;
    let mut orthogonality: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let id = if a == b { 1.0 } else { 0.0 };
            square = square.max((jj[a][b] + id).abs());
            orthogonality = orthogonality.max((jt_j[a][b] - id).abs());
        }
    }
    let omega = bivector_of_skew_endo(j);
    let (_, asd) = omega.sd_split();
    let positivity = asd.norm();
    if square > VALIDATION_TOL || orthogonality > VALIDATION_TOL || positivity > VALIDATION_TOL {
        return Err(Alg4Error::InvalidComplexStructure {
            square,
            orthogonality,
            positivity,
        });
    }
    Ok(omega)
}

/// Inverse of [`j_to_omega`]: recovers the complex structure from a
/// self-dual bivector of norm sqrt(2).
pub fn omega_to_j(omega: &Bivector) -> Result<[[f64; 4]; 4], Alg4Error> {
    let norm_sq = omega.dot(omega);
    let (_, asd) = omega.sd_split();
    let asd_defect = asd.norm();
    if (norm_sq - 2.0).abs() > VALIDATION_TOL || asd_defect > VALIDATION_TOL {
        return Err(Alg4Error::NotAKaehlerForm {
            norm_sq,
            asd_defect,
        });
    }
    Ok(omega.skew_endo())
}

pub(crate) fn mat4_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += a[i][k] * b[k][j];
            }
            c[i][j] = s;
        }
    }
    c
}

pub(crate) fn transpose4(a: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[i][j] = a[j][i];
        }
    }
    t
}

/// Applies a 4x4 array to a vector.
pub(crate) fn mat4_apply(a: &[[f64; 4]; 4], v: &Vector4) -> Vector4 {
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += a[i][j] * v.0[j];
        }
    }
    Vector4(out)
}

/// The standard complex structure with Je1 = e2, Je3 = e4 (Kaehler form
/// [`omega1`]).
pub fn standard_j1() -> [[f64; 4]; 4] {
    let mut j = [[0.0; 4]; 4];
    j[1][0] = 1.0;
    j[0][1] = -1.0;
    j[3][2] = 1.0;
    j[2][3] = -1.0;
    j
}

/// The complex structure with Je1 = e3, Je2 = −e4 (Kaehler form
/// [`omega2`]).
pub fn standard_j2() -> [[f64; 4]; 4] {
    let mut j = [[0.0; 4]; 4];
    j[2][0] = 1.0;
    j[0][2] = -1.0;
    j[3][1] = -1.0;
    j[1][3] = 1.0;
    j
}

/// The complex structure with Je1 = e4, Je2 = e3 (Kaehler form
/// [`omega3`]).
pub fn standard_j3() -> [[f64; 4]; 4] {
    let mut j = [[0.0; 4]; 4];
    j[3][0] = 1.0;
    j[0][3] = -1.0;
    j[2][1] = 1.0;
    j[1][2] = -1.0;
    j
}
