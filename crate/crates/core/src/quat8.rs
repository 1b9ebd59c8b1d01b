//! Quaternionic linear algebra on R^8: hyper-Kahler triples built from
//! oriented 4-plane splits, their fundamental 4-forms, angles between
//! two fundamental forms, the five-operator frame construction for
//! pairs sharing a structure, homotopies of fundamental forms, and the
//! Weitzenbock operator on 4-forms.
//!
//! Conventions. Vectors use the standard basis e_0..e_7. 4-forms are
//! stored on the 70 lexicographic basis forms e^{ijkl} (i<j<k<l) with
//! the determinant convention e^{ijkl}(e_i,e_j,e_k,e_l) = 1; this
//! basis is orthonormal for the inner product used throughout, which
//! gives every fundamental form squared norm 10/3. The 2-form of a
//! structure J is w(u,v) = <Ju, v>, and the curvature 4-tensor is
//! stored as R[i][j][k][l] = <R(e_i, e_j) e_k, e_l>, so constant
//! curvature one has R[i][j][i][j] = 1 for i distinct from j.

use thiserror::Error;

/// Squared norm shared by every fundamental 4-form.
pub const FUNDAMENTAL_NORM_SQUARED: f64 = 10.0 / 3.0;

/// Default tolerance for the algebraic validation screens.
pub const QUAT_TOL: f64 = 1e-9;

type Mat8 = [[f64; 8]; 8];

/// Errors from the quaternionic algebra operations.
#[derive(Debug, Error)]
pub enum Quat8Error {
    /// A supplied basis failed the orthonormality screen.
    #[error("basis is not orthonormal (defect {defect:.3e})")]
    NonOrthonormalBasis { defect: f64 },
    /// The three structures fail the triple relations.
    #[error("structures do not form a hyper-Kahler triple (defect {defect:.3e})")]
    InvalidTriple { defect: f64 },
    /// A structure induces the opposite of the reference orientation.
    #[error("structure reverses the reference orientation")]
    OrientationReversing,
    /// A 4-form failed the fundamental-form screens.
    #[error("4-form fails the fundamental-form screens (defect {defect:.3e})")]
    NotFundamental { defect: f64 },
    /// The rotation axes are not a right-handed orthonormal 3-frame.
    #[error("axes must form a right-handed orthonormal 3-frame (defect {defect:.3e})")]
    BadAxes { defect: f64 },
    /// The base vectors do not span orthogonal quaternionic 4-planes.
    #[error("frame vectors do not split into orthogonal quaternionic 4-planes (defect {defect:.3e})")]
    DegenerateFrame { defect: f64 },
    /// A scalar parameter left its admissible interval.
    #[error("parameter {value} is outside [{lo}, {hi}]")]
    ParameterOutOfRange { value: f64, lo: f64, hi: f64 },
    /// The curvature tensor violates its index symmetries.
    #[error("curvature tensor violates its symmetries (defect {defect:.3e})")]
    AsymmetricCurvature { defect: f64 },
}

/// Vector in R^8 with the standard inner product.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector8(pub [f64; 8]);

impl Vector8 {
    /// Standard basis vector.
    pub fn basis(k: usize) -> Self {
        let mut v = [0.0; 8];
        v[k] = 1.0;
        Vector8(v)
    }

    /// Euclidean inner product.
    pub fn dot(&self, other: &Vector8) -> f64 {
        (0..8).map(|i| self.0[i] * other.0[i]).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Componentwise combination a*self + b*other.
    pub fn combine(&self, a: f64, other: &Vector8, b: f64) -> Vector8 {
        let mut v = [0.0; 8];
        for i in 0..8 {
            v[i] = a * self.0[i] + b * other.0[i];
        }
        Vector8(v)
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut v = 1;
    for a in 0..k {
        v = v * (n - a) / (a + 1);
    }
    v
}

/// Lexicographic list of the 70 increasing index quadruples in 0..8.
pub fn quad_list() -> Vec<[usize; 4]> {
    let mut list = Vec::with_capacity(70);
    for i in 0..8 {
        for j in i + 1..8 {
            for k in j + 1..8 {
                for l in k + 1..8 {
                    list.push([i, j, k, l]);
                }
            }
        }
    }
    list
}

/// Position of an increasing quadruple in the lexicographic list.
pub fn quad_rank(q: [usize; 4]) -> usize {
    let mut rank = 0;
    let mut prev = 0;
    for (slot, &idx) in q.iter().enumerate() {
        for skipped in prev..idx {
            rank += binom(7 - skipped, 3 - slot);
        }
        prev = idx + 1;
    }
    rank
}

fn sort4_signed(mut q: [usize; 4]) -> Option<([usize; 4], f64)> {
    let mut sign = 1.0;
    for pass in 0..3 {
        for a in 0..3 - pass {
            if q[a] > q[a + 1] {
                q.swap(a, a + 1);
                sign = -sign;
            }
        }
    }
    if q[0] == q[1] || q[1] == q[2] || q[2] == q[3] {
        return None;
    }
    Some((q, sign))
}

/// 4-form on R^8 in the lexicographic orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourForm8(pub [f64; 70]);

impl FourForm8 {
    /// Zero form.
    pub fn zero() -> Self {
        FourForm8([0.0; 70])
    }

    /// Basis form for an index tuple in any order, with the sign of
    /// the sorting permutation; None when an index repeats.
    pub fn basis_tuple(q: [usize; 4]) -> Option<Self> {
        let (sorted, sign) = sort4_signed(q)?;
        let mut f = FourForm8::zero();
        f.0[quad_rank(sorted)] = sign;
        Some(f)
    }

    /// Value on a basis tuple in any order; zero when an index repeats.
    pub fn component(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        match sort4_signed([a, b, c, d]) {
            Some((sorted, sign)) => sign * self.0[quad_rank(sorted)],
            None => 0.0,
        }
    }

    /// Inner product in the orthonormal basis.
    pub fn dot(&self, other: &FourForm8) -> f64 {
        (0..70).map(|i| self.0[i] * other.0[i]).sum()
    }

    /// Squared norm.
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    /// Componentwise sum.
    pub fn add(&self, other: &FourForm8) -> FourForm8 {
        let mut out = [0.0; 70];
        for i in 0..70 {
            out[i] = self.0[i] + other.0[i];
        }
        FourForm8(out)
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &FourForm8) -> FourForm8 {
        let mut out = [0.0; 70];
        for i in 0..70 {
            out[i] = self.0[i] - other.0[i];
        }
        FourForm8(out)
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> FourForm8 {
        let mut out = [0.0; 70];
        for i in 0..70 {
            out[i] = s * self.0[i];
        }
        FourForm8(out)
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Hodge star for the standard orientation; an involution whose
    /// eigenspaces each have dimension 35.
    pub fn hodge_star(&self) -> FourForm8 {
        let quads = quad_list();
        let mut out = [0.0; 70];
        for (r, q) in quads.iter().enumerate() {
            let mut complement = [0usize; 4];
            let mut c = 0;
            for idx in 0..8 {
                if !q.contains(&idx) {
                    complement[c] = idx;
                    c += 1;
                }
            }
            let mut perm = [0usize; 8];
            perm[..4].copy_from_slice(q);
            perm[4..].copy_from_slice(&complement);
            let mut inversions = 0;
            for a in 0..8 {
                for b in a + 1..8 {
                    if perm[a] > perm[b] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            out[quad_rank(complement)] += sign * self.0[r];
        }
        FourForm8(out)
    }
}

/// Wedge of two 2-forms given as skew value matrices.
pub fn wedge_two_forms(a: &Mat8, b: &Mat8) -> FourForm8 {
    let quads = quad_list();
    let mut out = [0.0; 70];
    for (r, &[i, j, k, l]) in quads.iter().enumerate() {
        out[r] = a[i][j] * b[k][l] - a[i][k] * b[j][l] + a[i][l] * b[j][k]
            + b[i][j] * a[k][l] - b[i][k] * a[j][l] + b[i][l] * a[j][k];
    }
    FourForm8(out)
}

/// Pushforward of a 4-form under a rotation: the form of the
/// conjugated structures, evaluating the input on rotated-back
/// arguments.
pub fn rotate_form(omega: &FourForm8, rot: &Mat8) -> FourForm8 {
    let quads = quad_list();
    let mut out = [0.0; 70];
    for (r, &[i, j, k, l]) in quads.iter().enumerate() {
        let mut v = 0.0;
        for a in 0..8 {
            let ra = rot[i][a];
            if ra == 0.0 {
                continue;
            }
            for b in 0..8 {
                let rb = rot[j][b];
                if rb == 0.0 {
                    continue;
                }
                for c in 0..8 {
                    let rc = rot[k][c];
                    if rc == 0.0 {
                        continue;
                    }
                    for d in 0..8 {
                        let rd = rot[l][d];
                        if rd != 0.0 {
                            v += ra * rb * rc * rd * omega.component(a, b, c, d);
                        }
                    }
                }
            }
        }
        out[r] = v;
    }
    FourForm8(out)
}

fn mat_mul(a: &Mat8, b: &Mat8) -> Mat8 {
    let mut out = [[0.0; 8]; 8];
    for i in 0..8 {
        for k in 0..8 {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..8 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat_transpose(a: &Mat8) -> Mat8 {
    let mut out = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn mat_combine(a: &Mat8, sa: f64, b: &Mat8, sb: f64) -> Mat8 {
    let mut out = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[i][j] = sa * a[i][j] + sb * b[i][j];
        }
    }
    out
}

fn mat_max_abs(a: &Mat8) -> f64 {
    let mut m: f64 = 0.0;
    for row in a {
        for v in row {
            m = m.max(v.abs());
        }
    }
    m
}

fn anticommutator(a: &Mat8, b: &Mat8) -> Mat8 {
    mat_combine(&mat_mul(a, b), 1.0, &mat_mul(b, a), 1.0)
}

#[cfg(test)]
fn hs_dot(a: &Mat8, b: &Mat8) -> f64 {
    let mut s = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

/// 2-form of a structure: w[u][v] = <J e_u, e_v>.
pub fn two_form_of(j: &Mat8) -> Mat8 {
    mat_transpose(j)
}

fn det8(m: &Mat8) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..8 {
        let mut pivot = col;
        for row in col + 1..8 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-14 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..8 {
            let f = a[row][col] / a[col][col];
            for c in col..8 {
                a[row][c] -= f * a[col][c];
            }
        }
    }
    det
}

fn structure_orientation(j: &Mat8) -> Result<f64, Quat8Error> {
    let mut basis: Vec<Vector8> = Vec::with_capacity(8);
    for k in 0..8 {
        if basis.len() == 8 {
            break;
        }
        let mut v = Vector8::basis(k);
        for b in &basis {
            let c = v.dot(b);
            v = v.combine(1.0, b, -c);
        }
        let n = v.norm();
        if n < 1e-6 {
            continue;
        }
        v = v.combine(1.0 / n, &Vector8::default(), 0.0);
        let mut w = Vector8::default();
        for (row, wr) in w.0.iter_mut().enumerate() {
            *wr = (0..8).map(|c| j[row][c] * v.0[c]).sum();
        }
        for b in &basis {
            let c = w.dot(b);
            w = w.combine(1.0, b, -c);
        }
        let c = w.dot(&v);
        w = w.combine(1.0, &v, -c);
        let n = w.norm();
        if n < 1e-6 {
            return Err(Quat8Error::DegenerateFrame { defect: n });
        }
        w = w.combine(1.0 / n, &Vector8::default(), 0.0);
        basis.push(v);
        basis.push(w);
    }
    let mut m = [[0.0; 8]; 8];
    for (col, b) in basis.iter().enumerate() {
        for row in 0..8 {
            m[row][col] = b.0[row];
        }
    }
    Ok(det8(&m))
}

/// Hyper-Kahler triple of anticommuting orthogonal structures with
/// j1 j2 = j3, all positive for the standard orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct HKTriple {
    /// First structure.
    pub j1: Mat8,
    /// Second structure, anticommuting with the first.
    pub j2: Mat8,
    /// Product structure j1 j2.
    pub j3: Mat8,
}

impl HKTriple {
    /// Block-diagonal standard triple: two copies of the standard
    /// quaternion action, one on e_0..e_3 and one on e_4..e_7.
    pub fn standard() -> Self {
        let mut j1 = [[0.0; 8]; 8];
        let mut j2 = [[0.0; 8]; 8];
        let mut j3 = [[0.0; 8]; 8];
        for blk in [0, 4] {
            j1[blk + 1][blk] = 1.0;
            j1[blk][blk + 1] = -1.0;
            j1[blk + 3][blk + 2] = 1.0;
            j1[blk + 2][blk + 3] = -1.0;
            j2[blk + 2][blk] = 1.0;
            j2[blk][blk + 2] = -1.0;
            j2[blk + 3][blk + 1] = -1.0;
            j2[blk + 1][blk + 3] = 1.0;
            j3[blk + 3][blk] = 1.0;
            j3[blk][blk + 3] = -1.0;
            j3[blk + 2][blk + 1] = 1.0;
            j3[blk + 1][blk + 2] = -1.0;
        }
        HKTriple { j1, j2, j3 }
    }

    /// The three structures in order.
    pub fn structures(&self) -> [&Mat8; 3] {
        [&self.j1, &self.j2, &self.j3]
    }

    /// Linear combination a j1 + b j2 + c j3.
    pub fn j_x(&self, x: [f64; 3]) -> Mat8 {
        let mut out = [[0.0; 8]; 8];
        for i in 0..8 {
            for j in 0..8 {
                out[i][j] = x[0] * self.j1[i][j] + x[1] * self.j2[i][j] + x[2] * self.j3[i][j];
            }
        }
        out
    }

    /// Checks skewness, the square and product relations, pairwise
    /// anticommutation, and positivity of all three structures.
    pub fn validate(&self, tol: f64) -> Result<(), Quat8Error> {
        let identity = {
            let mut m = [[0.0; 8]; 8];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            m
        };
        let mut defect: f64 = 0.0;
        for j in self.structures() {
            defect = defect.max(mat_max_abs(&mat_combine(j, 1.0, &mat_transpose(j), 1.0)));
            let sq = mat_mul(j, j);
            defect = defect.max(mat_max_abs(&mat_combine(&sq, 1.0, &identity, 1.0)));
        }
        let prod = mat_mul(&self.j1, &self.j2);
        defect = defect.max(mat_max_abs(&mat_combine(&prod, 1.0, &self.j3, -1.0)));
        defect = defect.max(mat_max_abs(&anticommutator(&self.j1, &self.j2)));
        defect = defect.max(mat_max_abs(&anticommutator(&self.j1, &self.j3)));
        defect = defect.max(mat_max_abs(&anticommutator(&self.j2, &self.j3)));
        if defect > tol {
            return Err(Quat8Error::InvalidTriple { defect });
        }
        for j in self.structures() {
            if structure_orientation(j)? < 0.0 {
                return Err(Quat8Error::OrientationReversing);
            }
        }
        Ok(())
    }
}

/// Builds the triple acting as the positive quaternion structures on
/// an oriented 4-plane and on its orthogonal complement, pairing the
/// structures of the two planes through the supplied bases. The plane
/// basis and the complement basis each determine a structure triple;
/// coherent basis changes (right quaternion multiplications inside a
/// plane, or equal rotations of both triples) leave the fundamental
/// form unchanged, while rotating one plane's basis against the other
/// re-pairs the triples and moves the form. When no complement basis
/// is given, one is completed deterministically from the standard
/// basis, largest residual first, with the last two vectors swapped
/// if needed to keep the total orientation positive.
pub fn hk_from_split(
    p_basis: &[Vector8; 4],
    q_basis: Option<&[Vector8; 4]>,
) -> Result<HKTriple, Quat8Error> {
    let mut defect: f64 = 0.0;
    let mut all: Vec<Vector8> = p_basis.to_vec();
    if let Some(q) = q_basis {
        all.extend_from_slice(q);
    }
    for (a, va) in all.iter().enumerate() {
        for (b, vb) in all.iter().enumerate() {
            let expected = if a == b { 1.0 } else { 0.0 };
            defect = defect.max((va.dot(vb) - expected).abs());
        }
    }
    if defect > QUAT_TOL {
        return Err(Quat8Error::NonOrthonormalBasis { defect });
    }

    let mut base = all;
    while base.len() < 8 {
        let mut best: Option<(f64, Vector8)> = None;
        for k in 0..8 {
            let mut v = Vector8::basis(k);
            for b in &base {
                let c = v.dot(b);
                v = v.combine(1.0, b, -c);
            }
            let n = v.norm();
            if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
                best = Some((n, v));
            }
        }
        let (n, v) = best.expect("eight candidate directions");
        if n < 1e-9 {
            return Err(Quat8Error::DegenerateFrame { defect: n });
        }
        base.push(v.combine(1.0 / n, &Vector8::default(), 0.0));
    }

    let mut b = [[0.0; 8]; 8];
    for (col, v) in base.iter().enumerate() {
        for row in 0..8 {
            b[row][col] = v.0[row];
        }
    }
    if det8(&b) < 0.0 {
        if q_basis.is_some() {
            return Err(Quat8Error::OrientationReversing);
        }
        for row in 0..8 {
            b[row].swap(6, 7);
        }
    }

    let std = HKTriple::standard();
    let bt = mat_transpose(&b);
    let conj = |j: &Mat8| mat_mul(&mat_mul(&b, j), &bt);
    let triple = HKTriple {
        j1: conj(&std.j1),
        j2: conj(&std.j2),
        j3: conj(&std.j3),
    };
    triple.validate(QUAT_TOL)?;
    Ok(triple)
}

/// Fundamental 4-form of a triple: one sixth of the sum of the wedge
/// squares of the three structure 2-forms.
pub fn fundamental_form(t: &HKTriple) -> Result<FourForm8, Quat8Error> {
    t.validate(QUAT_TOL)?;
    let mut omega = FourForm8::zero();
    for j in t.structures() {
        let w = two_form_of(j);
        omega = omega.add(&wedge_two_forms(&w, &w));
    }
    Ok(omega.scale(1.0 / 6.0))
}

fn pair_rank(i: usize, j: usize) -> usize {
    i * (15 - i) / 2 + j - i - 1
}

fn cubic_trace(omega: &FourForm8) -> f64 {
    let mut l = [[0.0; 28]; 28];
    for i in 0..8 {
        for j in i + 1..8 {
            for k in 0..8 {
                for m in k + 1..8 {
                    l[pair_rank(i, j)][pair_rank(k, m)] = omega.component(i, j, k, m);
                }
            }
        }
    }
    let mut tr = 0.0;
    for a in 0..28 {
        for b in 0..28 {
            if l[a][b] == 0.0 {
                continue;
            }
            for c in 0..28 {
                tr += l[a][b] * l[b][c] * l[c][a];
            }
        }
    }
    tr
}

/// Screens a 4-form for membership in the set of fundamental forms:
/// squared norm 10/3, self-duality, and the cubic trace of the induced
/// symmetric pairing on 2-vectors matching the value shared by the
/// whole rotation orbit of the standard form.
pub fn validate_fundamental_form(omega: &FourForm8) -> Result<(), Quat8Error> {
    let norm_defect = (omega.norm_squared() - FUNDAMENTAL_NORM_SQUARED).abs();
    if norm_defect > 1e-8 {
        return Err(Quat8Error::NotFundamental {
            defect: norm_defect,
        });
    }
    let star_defect = omega.hodge_star().sub(omega).max_abs();
    if star_defect > 1e-8 {
        return Err(Quat8Error::NotFundamental {
            defect: star_defect,
        });
    }
    let reference = fundamental_form(&HKTriple::standard())?;
    let trace_defect = (cubic_trace(omega) - cubic_trace(&reference)).abs();
    if trace_defect > 1e-6 {
        return Err(Quat8Error::NotFundamental {
            defect: trace_defect,
        });
    }
    Ok(())
}

/// Angle data of a pair of fundamental forms: the second decomposes as
/// cos(theta) times the first plus a remainder orthogonal to it.
#[derive(Debug, Clone)]
pub struct AnglePair8 {
    /// Cosine of the angle: 3/10 of the forms' inner product.
    pub cos_theta: f64,
    /// Remainder orthogonal to the reference form.
    pub h_tilde: FourForm8,
}

impl AnglePair8 {
    /// Squared sine of the angle.
    pub fn sin_squared(&self) -> f64 {
        (1.0 - self.cos_theta * self.cos_theta).max(0.0)
    }
}

/// Decomposes one fundamental form against another. The remainder
/// satisfies norm^2 = (10/3) sin^2(theta).
pub fn angle8(omega0: &FourForm8, omega1: &FourForm8) -> Result<AnglePair8, Quat8Error> {
    validate_fundamental_form(omega0)?;
    validate_fundamental_form(omega1)?;
    let cos_theta = omega0.dot(omega1) * 3.0 / 10.0;
    let h_tilde = omega1.sub(&omega0.scale(cos_theta));
    Ok(AnglePair8 { cos_theta, h_tilde })
}

/// Frame data for the construction comparing two triples that share
/// their first structure: the rotation axes inside the given triple
/// and the two base vectors spanning orthogonal quaternionic planes.
#[derive(Debug, Clone)]
pub struct FrameAxes {
    /// Right-handed orthonormal rows combining the triple structures.
    pub x_basis: [[f64; 3]; 3],
    /// First base vector.
    pub x_vector: Vector8,
    /// Second base vector, quaternionically orthogonal to the first.
    pub y_vector: Vector8,
}

impl Default for FrameAxes {
    fn default() -> Self {
        FrameAxes {
            x_basis: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            x_vector: Vector8::basis(0),
            y_vector: Vector8::basis(4),
        }
    }
}

/// Output of the five-operator frame construction.
#[derive(Debug, Clone)]
pub struct FrameConstruction {
    /// Orthonormal basis of the rotated first plane.
    pub b_basis: [Vector8; 4],
    /// Orthonormal basis of its orthogonal complement.
    pub b_perp_basis: [Vector8; 4],
    /// The rotated triple sharing its first structure with the input.
    pub e1: HKTriple,
    /// Fourth operator of the five-operator system.
    pub j4: Mat8,
    /// Fifth operator, the product of the first and the fourth.
    pub j5: Mat8,
    /// Adapted orthonormal frame of R^8.
    pub frame: [Vector8; 8],
}

/// Builds the rotated triple (J_x1, c J_x2 + s J_4, c J_x3 + s J_5)
/// at angle zeta in [0, pi/2], together with the adapted frame, the
/// plane bases, and the two extra operators.
pub fn frame_construction(
    e0: &HKTriple,
    zeta: f64,
    axes: &FrameAxes,
) -> Result<FrameConstruction, Quat8Error> {
    e0.validate(QUAT_TOL)?;
    let mut axis_defect: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let dot: f64 = (0..3).map(|i| axes.x_basis[a][i] * axes.x_basis[b][i]).sum();
            let expected = if a == b { 1.0 } else { 0.0 };
            axis_defect = axis_defect.max((dot - expected).abs());
        }
    }
    let x = axes.x_basis;
    let cross = [
        x[0][1] * x[1][2] - x[0][2] * x[1][1],
        x[0][2] * x[1][0] - x[0][0] * x[1][2],
        x[0][0] * x[1][1] - x[0][1] * x[1][0],
    ];
    for i in 0..3 {
        axis_defect = axis_defect.max((cross[i] - x[2][i]).abs());
    }
    if axis_defect > QUAT_TOL {
        return Err(Quat8Error::BadAxes {
            defect: axis_defect,
        });
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&zeta) {
        return Err(Quat8Error::ParameterOutOfRange {
            value: zeta,
            lo: 0.0,
            hi: std::f64::consts::FRAC_PI_2,
        });
    }

    let jx = [e0.j_x(x[0]), e0.j_x(x[1]), e0.j_x(x[2])];
    let apply = |j: &Mat8, v: &Vector8| {
        let mut out = [0.0; 8];
        for (row, o) in out.iter_mut().enumerate() {
            *o = (0..8).map(|c| j[row][c] * v.0[c]).sum();
        }
        Vector8(out)
    };

    let xv = axes.x_vector;
    let yv = axes.y_vector;
    let frame = [
        xv,
        apply(&jx[0], &xv),
        apply(&jx[1], &xv),
        apply(&jx[2], &xv),
        yv,
        apply(&jx[0], &yv),
        apply(&jx[1], &yv),
        apply(&jx[2], &yv),
    ];
    let mut frame_defect: f64 = 0.0;
    for (a, fa) in frame.iter().enumerate() {
        for (b, fb) in frame.iter().enumerate() {
            let expected = if a == b { 1.0 } else { 0.0 };
            frame_defect = frame_defect.max((fa.dot(fb) - expected).abs());
        }
    }
    if frame_defect > QUAT_TOL {
        return Err(Quat8Error::DegenerateFrame {
            defect: frame_defect,
        });
    }

    let (s, c) = zeta.sin_cos();
    let cx_sy = xv.combine(c, &yv, s);
    let cy_sx = yv.combine(c, &xv, -s);
    let b_basis = [
        xv,
        apply(&jx[0], &xv),
        apply(&jx[1], &cx_sy),
        apply(&jx[2], &cx_sy),
    ];
    let b_perp_basis = [
        yv,
        apply(&jx[0], &yv),
        apply(&jx[1], &cy_sx),
        apply(&jx[2], &cy_sx),
    ];

    let frame_two_form = |pairs: &[(usize, usize, f64)]| {
        let mut w = [[0.0; 8]; 8];
        for &(a, b, sign) in pairs {
            for u in 0..8 {
                for v in 0..8 {
                    w[u][v] += sign * (frame[a].0[u] * frame[b].0[v] - frame[b].0[u] * frame[a].0[v]);
                }
            }
        }
        w
    };
    let w4 = frame_two_form(&[(0, 6, 1.0), (1, 7, -1.0), (2, 4, 1.0), (3, 5, -1.0)]);
    let w5 = frame_two_form(&[(0, 7, 1.0), (1, 6, 1.0), (2, 5, 1.0), (3, 4, 1.0)]);
    let j4 = mat_transpose(&w4);
    let j5 = mat_transpose(&w5);

    let e1 = HKTriple {
        j1: jx[0],
        j2: mat_combine(&jx[1], c, &j4, s),
        j3: mat_combine(&jx[2], c, &j5, s),
    };
    e1.validate(QUAT_TOL)?;

    Ok(FrameConstruction {
        b_basis,
        b_perp_basis,
        e1,
        j4,
        j5,
        frame,
    })
}

/// Fundamental form along the frame-construction path at parameter t
/// in [0, 1], rotating by the angle t zeta: a path of valid
/// fundamental forms between the two endpoint forms.
pub fn homotopy_omega(
    e0: &HKTriple,
    zeta: f64,
    axes: &FrameAxes,
    t: f64,
) -> Result<FourForm8, Quat8Error> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Quat8Error::ParameterOutOfRange {
            value: t,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let fc = frame_construction(e0, t * zeta, axes)?;
    let omega = fundamental_form(&fc.e1)?;
    validate_fundamental_form(&omega)?;
    Ok(omega)
}

/// Curvature 4-tensor on R^8 with R[i][j][k][l] = <R(e_i, e_j) e_k, e_l>.
#[derive(Debug, Clone)]
pub struct CurvTensor8 {
    /// Full component array.
    pub entries: Box<[[[[f64; 8]; 8]; 8]; 8]>,
}

impl CurvTensor8 {
    /// Zero tensor.
    pub fn zero() -> Self {
        CurvTensor8 {
            entries: Box::new([[[[0.0; 8]; 8]; 8]; 8]),
        }
    }

    /// Constant curvature kappa: every 2-plane has sectional
    /// curvature kappa.
    pub fn constant_curvature(kappa: f64) -> Self {
        let mut r = CurvTensor8::zero();
        for i in 0..8 {
            for j in 0..8 {
                r.entries[i][j][i][j] += kappa;
                r.entries[i][j][j][i] -= kappa;
            }
        }
        r
    }

    /// Adds the symmetric-product curvature of two symmetric arrays;
    /// sums of these span all tensors with the curvature symmetries.
    pub fn add_symmetric_product(&mut self, h: &Mat8, k: &Mat8) {
        for i in 0..8 {
            for j in 0..8 {
                for a in 0..8 {
                    for b in 0..8 {
                        self.entries[i][j][a][b] += h[i][a] * k[j][b] + h[j][b] * k[i][a]
                            - h[i][b] * k[j][a]
                            - h[j][a] * k[i][b];
                    }
                }
            }
        }
    }

    /// Checks the antisymmetries and the pair symmetry.
    pub fn validate_symmetries(&self, tol: f64) -> Result<(), Quat8Error> {
        let mut defect: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    for l in 0..8 {
                        let v = self.entries[i][j][k][l];
                        defect = defect.max((v + self.entries[j][i][k][l]).abs());
                        defect = defect.max((v + self.entries[i][j][l][k]).abs());
                        defect = defect.max((v - self.entries[k][l][i][j]).abs());
                    }
                }
            }
        }
        if defect > tol {
            return Err(Quat8Error::AsymmetricCurvature { defect });
        }
        Ok(())
    }

    /// Ricci contraction.
    pub fn ricci(&self, i: usize, j: usize) -> f64 {
        (0..8).map(|a| self.entries[i][a][j][a]).sum()
    }
}

/// Weitzenbock operator on 4-forms: the double contraction of the
/// induced curvature action against the form arguments,
/// A(Omega)(X1..X4) = sum over a basis vector and an argument slot of
/// the alternating-sign curvature derivative evaluated with the basis
/// vector in front. Symmetric for the 4-form inner product.
pub fn weitzenbock4(r8: &CurvTensor8, omega: &FourForm8) -> Result<FourForm8, Quat8Error> {
    r8.validate_symmetries(1e-10)?;
    let quads = quad_list();
    let mut out = [0.0; 70];
    for (rank, q) in quads.iter().enumerate() {
        let mut total = 0.0;
        for alpha in 0..8 {
            for k in 0..4 {
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                let mut args = [alpha; 4];
                let mut slot = 1;
                for (pos, &idx) in q.iter().enumerate() {
                    if pos != k {
                        args[slot] = idx;
                        slot += 1;
                    }
                }
                let mut derivative = 0.0;
                for j in 0..4 {
                    for l in 0..8 {
                        let coeff = r8.entries[alpha][q[k]][args[j]][l];
                        if coeff == 0.0 {
                            continue;
                        }
                        let mut replaced = args;
                        replaced[j] = l;
                        derivative -= coeff
                            * omega.component(replaced[0], replaced[1], replaced[2], replaced[3]);
                    }
                }
                total += sign * derivative;
            }
        }
        out[rank] = total;
    }
    Ok(FourForm8(out))
}
