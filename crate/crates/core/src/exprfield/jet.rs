//! Truncated Taylor jets: value and partial derivatives to order 3,
//! with forward-mode arithmetic.

use thiserror::Error;

/// Errors from jet evaluation of expressions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    /// log of a nonpositive argument.
    #[error("log argument must be positive, got {value:.6e}")]
    DomainLog { value: f64 },
    /// sqrt of a nonpositive argument (derivatives blow up at 0).
    #[error("sqrt argument must be positive, got {value:.6e}")]
    DomainSqrt { value: f64 },
    /// Real or expression power with a nonpositive base.
    #[error("power base must be positive, got {base:.6e}")]
    DomainPow { base: f64 },
    /// Division by a vanishing denominator.
    #[error("division by a vanishing value ({denominator:.6e})")]
    DivideByZero { denominator: f64 },
    /// Negative integer power of a vanishing base.
    #[error("negative power of a vanishing base ({base:.6e})")]
    NegativePowerOfZero { base: f64 },
    /// The expression references a coordinate beyond the jet dimension.
    #[error("coordinate x{} exceeds evaluation dimension {dim}", index + 1)]
    VarOutOfRange { index: usize, dim: usize },
}

/// Smallest denominator magnitude accepted by division.
pub const MIN_DENOMINATOR: f64 = 1e-300;

/// Value and coordinate derivatives of a scalar field at a point, to a
/// requested order (0 to 3). Derivative tensors are stored fully
/// unpacked and kept symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarJet {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

impl ScalarJet {
    fn capacity(dim: usize) -> usize {
        1 + dim + dim * dim + dim * dim * dim
    }

    /// Jet of the constant field.
    pub fn constant(dim: usize, order: usize, value: f64) -> Self {
        assert!((1..=8).contains(&dim), "jet dimension must be 1..=8");
        assert!(order <= 3, "jet order must be 0..=3");
        let mut data = vec![0.0; Self::capacity(dim)];
        data[0] = value;
        ScalarJet { dim, order, data }
    }

    /// Jet of the i-th coordinate field at coordinate value `value`.
    pub fn coordinate(dim: usize, order: usize, i: usize, value: f64) -> Self {
        assert!(i < dim, "coordinate index out of range");
        let mut jet = Self::constant(dim, order, value);
        if order >= 1 {
            jet.data[1 + i] = 1.0;
        }
        jet
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.data[0]
    }

    pub fn grad(&self, i: usize) -> f64 {
        self.data[1 + i]
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.data[1 + self.dim + i * self.dim + j]
    }

    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[1 + self.dim + self.dim * self.dim + (i * self.dim + j) * self.dim + k]
    }

    fn g_idx(&self, i: usize) -> usize {
        1 + i
    }

    fn h_idx(&self, i: usize, j: usize) -> usize {
        1 + self.dim + i * self.dim + j
    }

    fn t_idx(&self, i: usize, j: usize, k: usize) -> usize {
        1 + self.dim + self.dim * self.dim + (i * self.dim + j) * self.dim + k
    }

    pub fn set_value(&mut self, v: f64) {
        self.data[0] = v;
    }

    /// Sets a gradient entry (order must allow it).
    pub fn set_grad(&mut self, i: usize, v: f64) {
        let idx = self.g_idx(i);
        self.data[idx] = v;
    }

    /// Sets a Hessian entry symmetrically.
    pub fn set_hess(&mut self, i: usize, j: usize, v: f64) {
        let a = self.h_idx(i, j);
        self.data[a] = v;
        let b = self.h_idx(j, i);
        self.data[b] = v;
    }

    /// Sets a third-derivative entry on all six index permutations.
    pub fn set_third(&mut self, i: usize, j: usize, k: usize, v: f64) {
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            let idx = self.t_idx(a, b, c);
            self.data[idx] = v;
        }
    }

    /// Copy truncated to a lower (or equal) order; dropped orders zeroed.
    pub fn truncated(&self, order: usize) -> Self {
        assert!(order <= self.order);
        let mut out = ScalarJet::constant(self.dim, order, 0.0);
        let d = self.dim;
        out.data[0] = self.data[0];
        if order >= 1 {
            out.data[1..1 + d].copy_from_slice(&self.data[1..1 + d]);
        }
        if order >= 2 {
            out.data[1 + d..1 + d + d * d].copy_from_slice(&self.data[1 + d..1 + d + d * d]);
        }
        if order >= 3 {
            out.data[1 + d + d * d..].copy_from_slice(&self.data[1 + d + d * d..]);
        }
        out
    }

    /// Jet of the partial derivative along coordinate i, one order lower.
    pub fn partial(&self, i: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let d = self.dim;
        let mut out = ScalarJet::constant(d, self.order - 1, self.grad(i));
        if out.order >= 1 {
            for j in 0..d {
                out.data[1 + j] = self.hess(i, j);
            }
        }
        if out.order >= 2 {
            for j in 0..d {
                for k in 0..d {
                    let idx = out.h_idx(j, k);
                    out.data[idx] = self.third(i, j, k);
                }
            }
        }
        out
    }

    fn check_compatible(&self, other: &Self) -> usize {
        assert_eq!(self.dim, other.dim, "jet dimensions differ");
        self.order.min(other.order)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.check_compatible(other);
        let mut out = self.truncated(order);
        let rhs = other.truncated(order);
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for a in &mut out.data {
            *a *= c;
        }
        out
    }

    /// Truncated Leibniz product.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.check_compatible(other);
        let d = self.dim;
        let (u, v) = (self, other);
        let mut out = ScalarJet::constant(d, order, u.value() * v.value());
        if order >= 1 {
            for i in 0..d {
                out.data[1 + i] = u.grad(i) * v.value() + u.value() * v.grad(i);
            }
        }
        if order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    let idx = out.h_idx(i, j);
                    out.data[idx] = u.hess(i, j) * v.value()
                        + u.grad(i) * v.grad(j)
                        + u.grad(j) * v.grad(i)
                        + u.value() * v.hess(i, j);
                }
            }
        }
        if order >= 3 {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let idx = out.t_idx(i, j, k);
                        out.data[idx] = u.third(i, j, k) * v.value()
                            + u.hess(i, j) * v.grad(k)
                            + u.hess(i, k) * v.grad(j)
                            + u.hess(j, k) * v.grad(i)
                            + u.grad(i) * v.hess(j, k)
                            + u.grad(j) * v.hess(i, k)
                            + u.grad(k) * v.hess(i, j)
                            + u.value() * v.third(i, j, k);
                    }
                }
            }
        }
        out
    }

    /// Reciprocal jet; rejects denominators below `MIN_DENOMINATOR`.
    pub fn reciprocal(&self) -> Result<Self, EvalError> {
        let v = self.value();
        if v.abs() < MIN_DENOMINATOR {
            return Err(EvalError::DivideByZero { denominator: v });
        }
        let inv = 1.0 / v;
        Ok(self.compose([inv, -inv * inv, 2.0 * inv * inv * inv, -6.0 * inv * inv * inv * inv]))
    }

    pub fn div(&self, other: &Self) -> Result<Self, EvalError> {
        Ok(self.mul(&other.reciprocal()?))
    }

    /// Composition with a univariate function given its value and first
    /// three derivatives at this jet's value (Faà di Bruno to order 3).
    pub fn compose(&self, f: [f64; 4]) -> Self {
        let d = self.dim;
        let order = self.order;
        let mut out = ScalarJet::constant(d, order, f[0]);
        if order >= 1 {
            for i in 0..d {
                out.data[1 + i] = f[1] * self.grad(i);
            }
        }
        if order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    let idx = out.h_idx(i, j);
                    out.data[idx] = f[2] * self.grad(i) * self.grad(j) + f[1] * self.hess(i, j);
                }
            }
        }
        if order >= 3 {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let idx = out.t_idx(i, j, k);
                        out.data[idx] = f[3] * self.grad(i) * self.grad(j) * self.grad(k)
                            + f[2]
                                * (self.hess(i, j) * self.grad(k)
                                    + self.hess(i, k) * self.grad(j)
                                    + self.hess(j, k) * self.grad(i))
                            + f[1] * self.third(i, j, k);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(dim: usize, i: usize, v: f64) -> ScalarJet {
        ScalarJet::coordinate(dim, 3, i, v)
    }

    #[test]
    fn coordinate_and_constant_jets() {
        let j = x(4, 1, 2.5);
        assert_eq!(j.value(), 2.5);
        assert_eq!(j.grad(1), 1.0);
        assert_eq!(j.grad(0), 0.0);
        assert_eq!(j.hess(1, 1), 0.0);
        let c = ScalarJet::constant(4, 3, 7.0);
        assert_eq!(c.value(), 7.0);
        assert_eq!(c.grad(2), 0.0);
    }

    #[test]
    fn product_rule_on_monomial() {
        // f = x0^2 * x1 at (3, 5): value 45, f_0 = 30, f_1 = 9,
        // f_00 = 10, f_01 = 6, f_001 = 2.
        let f = x(2, 0, 3.0).mul(&x(2, 0, 3.0)).mul(&x(2, 1, 5.0));
        assert_eq!(f.value(), 45.0);
        assert_eq!(f.grad(0), 30.0);
        assert_eq!(f.grad(1), 9.0);
        assert_eq!(f.hess(0, 0), 10.0);
        assert_eq!(f.hess(0, 1), 6.0);
        assert_eq!(f.hess(1, 0), 6.0);
        assert_eq!(f.third(0, 0, 1), 2.0);
        assert_eq!(f.third(1, 0, 0), 2.0);
        assert_eq!(f.third(0, 0, 0), 0.0);
    }

    #[test]
    fn reciprocal_jet_matches_closed_form() {
        // 1/x0 at 2: value 1/2, d = -1/4, d2 = 2/8, d3 = -6/16.
        let r = x(1, 0, 2.0).reciprocal().unwrap();
        assert!((r.value() - 0.5).abs() < 1e-15);
        assert!((r.grad(0) + 0.25).abs() < 1e-15);
        assert!((r.hess(0, 0) - 0.25).abs() < 1e-15);
        assert!((r.third(0, 0, 0) + 0.375).abs() < 1e-15);
        assert!(matches!(
            ScalarJet::constant(1, 3, 0.0).reciprocal(),
            Err(EvalError::DivideByZero { .. })
        ));
    }

    #[test]
    fn compose_log_jet() {
        let v = 1.0f64;
        let l = x(1, 0, v).compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)]);
        assert_eq!(l.value(), 0.0);
        assert_eq!(l.grad(0), 1.0);
        assert_eq!(l.hess(0, 0), -1.0);
        assert_eq!(l.third(0, 0, 0), 2.0);
    }

    #[test]
    fn partial_shifts_orders() {
        // f = x0^2 x1: partial_0 has value 2 x0 x1, grad (2 x1, 2 x0),
        // hess[0][1] = 2.
        let f = x(2, 0, 3.0).mul(&x(2, 0, 3.0)).mul(&x(2, 1, 5.0));
        let p = f.partial(0);
        assert_eq!(p.order(), 2);
        assert_eq!(p.value(), 30.0);
        assert_eq!(p.grad(0), 10.0);
        assert_eq!(p.grad(1), 6.0);
        assert_eq!(p.hess(0, 1), 2.0);
        assert_eq!(p.hess(0, 0), 0.0);
    }

    #[test]
    fn truncation_is_exact() {
        let f = x(3, 0, 1.2)
            .mul(&x(3, 1, 0.7))
            .add(&x(3, 2, 2.0).mul(&x(3, 2, 2.0)));
        for order in 0..=3 {
            let t = f.truncated(order);
            assert_eq!(t.order(), order);
            assert_eq!(t.value(), f.value());
            if order >= 1 {
                for i in 0..3 {
                    assert_eq!(t.grad(i), f.grad(i));
                }
            } else {
                assert_eq!(t.grad(0), 0.0);
            }
        }
    }
}
