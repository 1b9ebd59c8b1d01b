//! Scalar fields defined by a small expression language, with exact
//! derivatives to order 3 by forward-mode automatic differentiation.
//!
//! Expressions are immutable trees over coordinates x1..x8, literals,
//! arithmetic, powers, exp, log, sin, cos, sqrt, and the norm-square
//! symbol r2. Evaluation produces a [`ScalarJet`], the derivative source
//! for every chart computation; finite differences appear only in test
//! oracles, never as a production derivative path.

pub mod jet;
pub mod parser;

pub use jet::{EvalError, ScalarJet, MIN_DENOMINATOR};
pub use parser::ParseError;

use rand::Rng;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    R2,
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    PowInt(Expr, i32),
    PowReal(Expr, f64),
    Pow(Expr, Expr),
    Exp(Expr),
    Log(Expr),
    Sin(Expr),
    Cos(Expr),
    Sqrt(Expr),
}

/// Immutable scalar-field expression; cheap to clone and share across
/// threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub(crate) fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    /// Power constructor that folds literal exponents into the integer
    /// or real power forms.
    pub(crate) fn make_pow(base: Expr, exponent: Expr) -> Expr {
        match *exponent.node() {
            Node::Const(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => {
                Expr::from_node(Node::PowInt(base, c as i32))
            }
            Node::Const(c) => Expr::from_node(Node::PowReal(base, c)),
            _ => Expr::from_node(Node::Pow(base, exponent)),
        }
    }

    /// Parses an expression from text.
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        parser::Parser::parse(src)
    }

    /// The coordinate field x(i+1), 0-based index below 8.
    pub fn var(i: usize) -> Expr {
        assert!(i < 8, "coordinate index out of range");
        Expr::from_node(Node::Var(i))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::from_node(Node::Const(c))
    }

    /// The norm-square field, summing the squares of all coordinates of
    /// the evaluation dimension.
    pub fn r2() -> Expr {
        Expr::from_node(Node::R2)
    }

    pub fn exp(self) -> Expr {
        Expr::from_node(Node::Exp(self))
    }

    pub fn log(self) -> Expr {
        Expr::from_node(Node::Log(self))
    }

    pub fn sin(self) -> Expr {
        Expr::from_node(Node::Sin(self))
    }

    pub fn cos(self) -> Expr {
        Expr::from_node(Node::Cos(self))
    }

    pub fn sqrt(self) -> Expr {
        Expr::from_node(Node::Sqrt(self))
    }

    pub fn powi(self, n: i32) -> Expr {
        Expr::from_node(Node::PowInt(self, n))
    }

    pub fn powf(self, p: f64) -> Expr {
        Expr::from_node(Node::PowReal(self, p))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::make_pow(self, exponent)
    }

    /// Evaluates the jet of the field at x (dimension = x.len(), up to
    /// 8) truncated to the requested order (0 to 3).
    pub fn eval_jet(&self, x: &[f64], order: usize) -> Result<ScalarJet, EvalError> {
        let dim = x.len();
        assert!((1..=8).contains(&dim), "evaluation dimension must be 1..=8");
        assert!(order <= 3, "jet order must be 0..=3");
        self.eval(x, dim, order)
    }

    fn eval(&self, x: &[f64], dim: usize, order: usize) -> Result<ScalarJet, EvalError> {
        match self.node() {
            Node::Const(c) => Ok(ScalarJet::constant(dim, order, *c)),
            Node::Var(i) => {
                if *i >= dim {
                    return Err(EvalError::VarOutOfRange { index: *i, dim });
                }
                Ok(ScalarJet::coordinate(dim, order, *i, x[*i]))
            }
            Node::R2 => {
                let mut acc = ScalarJet::constant(dim, order, 0.0);
                for i in 0..dim {
                    let xi = ScalarJet::coordinate(dim, order, i, x[i]);
                    acc = acc.add(&xi.mul(&xi));
                }
                Ok(acc)
            }
            Node::Add(a, b) => Ok(a.eval(x, dim, order)?.add(&b.eval(x, dim, order)?)),
            Node::Sub(a, b) => Ok(a.eval(x, dim, order)?.sub(&b.eval(x, dim, order)?)),
            Node::Mul(a, b) => Ok(a.eval(x, dim, order)?.mul(&b.eval(x, dim, order)?)),
            Node::Div(a, b) => a.eval(x, dim, order)?.div(&b.eval(x, dim, order)?),
            Node::Neg(a) => Ok(a.eval(x, dim, order)?.neg()),
            Node::PowInt(a, n) => powi_jet(&a.eval(x, dim, order)?, *n),
            Node::PowReal(a, p) => {
                let u = a.eval(x, dim, order)?;
                let v = u.value();
                if v <= 0.0 {
                    return Err(EvalError::DomainPow { base: v });
                }
                Ok(u.compose([
                    v.powf(*p),
                    p * v.powf(p - 1.0),
                    p * (p - 1.0) * v.powf(p - 2.0),
                    p * (p - 1.0) * (p - 2.0) * v.powf(p - 3.0),
                ]))
            }
            Node::Pow(a, b) => {
                let u = a.eval(x, dim, order)?;
                if u.value() <= 0.0 {
                    return Err(EvalError::DomainPow { base: u.value() });
                }
                let lnu = log_jet(&u)?;
                let w = b.eval(x, dim, order)?.mul(&lnu);
                let e = w.value().exp();
                Ok(w.compose([e, e, e, e]))
            }
            Node::Exp(a) => {
                let u = a.eval(x, dim, order)?;
                let e = u.value().exp();
                Ok(u.compose([e, e, e, e]))
            }
            Node::Log(a) => log_jet(&a.eval(x, dim, order)?),
            Node::Sin(a) => {
                let u = a.eval(x, dim, order)?;
                let (s, c) = u.value().sin_cos();
                Ok(u.compose([s, c, -s, -c]))
            }
            Node::Cos(a) => {
                let u = a.eval(x, dim, order)?;
                let (s, c) = u.value().sin_cos();
                Ok(u.compose([c, -s, -c, s]))
            }
            Node::Sqrt(a) => {
                let u = a.eval(x, dim, order)?;
                let v = u.value();
                if v <= 0.0 {
                    return Err(EvalError::DomainSqrt { value: v });
                }
                let s = v.sqrt();
                Ok(u.compose([
                    s,
                    0.5 / s,
                    -0.25 / (s * v),
                    0.375 / (s * v * v),
                ]))
            }
        }
    }
}

fn log_jet(u: &ScalarJet) -> Result<ScalarJet, EvalError> {
    let v = u.value();
    if v <= 0.0 {
        return Err(EvalError::DomainLog { value: v });
    }
    Ok(u.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)]))
}

fn powi_jet(u: &ScalarJet, n: i32) -> Result<ScalarJet, EvalError> {
    let v = u.value();
    if n < 0 && v.abs() < MIN_DENOMINATOR {
        return Err(EvalError::NegativePowerOfZero { base: v });
    }
    let mut f = [0.0; 4];
    f[0] = v.powi(n);
    let mut coeff = 1.0;
    for (k, slot) in f.iter_mut().enumerate().skip(1) {
        coeff *= (n as f64) - (k as f64 - 1.0);
        if coeff == 0.0 {
            break;
        }
        *slot = coeff * v.powi(n - k as i32);
    }
    Ok(u.compose(f))
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::from_node(Node::Add(self, rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::from_node(Node::Sub(self, rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::from_node(Node::Mul(self, rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::from_node(Node::Div(self, rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match *self.node() {
            Node::Const(c) => Expr::constant(-c),
            _ => Expr::from_node(Node::Neg(self)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(..) => 3,
            Node::Const(c) if *c < 0.0 => 3,
            Node::PowInt(..) | Node::PowReal(..) | Node::Pow(..) => 4,
            _ => 9,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = self.prec();
        let needs = prec < parent;
        if needs {
            write!(f, "(")?;
        }
        match self.node() {
            Node::Const(c) => write!(f, "{c}")?,
            Node::Var(i) => write!(f, "x{}", i + 1)?,
            Node::R2 => write!(f, "r2")?,
            Node::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Node::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Node::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Node::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 4)?;
            }
            Node::PowInt(a, n) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{n}")?;
            }
            Node::PowReal(a, p) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{p}")?;
            }
            Node::Pow(a, b) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^")?;
                b.fmt_prec(f, 4)?;
            }
            Node::Exp(a) => write!(f, "exp({a})")?,
            Node::Log(a) => write!(f, "log({a})")?,
            Node::Sin(a) => write!(f, "sin({a})")?,
            Node::Cos(a) => write!(f, "cos({a})")?,
            Node::Sqrt(a) => write!(f, "sqrt({a})")?,
        }
        if needs {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Random expression tree over the first `dim` coordinates, for test
/// corpora. Arguments of log, sqrt, and divisions are generated as
/// square-plus-constant so that evaluation near the unit box usually
/// stays in domain; callers still filter failures by retrying.
pub fn random_expression(rng: &mut impl Rng, dim: usize, depth: usize) -> Expr {
    fn positive_arg(rng: &mut impl Rng, dim: usize, depth: usize) -> Expr {
        let a = random_expression(rng, dim, depth);
        a.clone() * a + Expr::constant(rng.gen_range(0.3..1.0))
    }
    if depth == 0 {
        return match rng.gen_range(0..4) {
            0 => Expr::constant((rng.gen_range(-20..=20) as f64) / 10.0),
            1 => Expr::r2(),
            _ => Expr::var(rng.gen_range(0..dim)),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..12) {
        0 => random_expression(rng, dim, d) + random_expression(rng, dim, d),
        1 => random_expression(rng, dim, d) - random_expression(rng, dim, d),
        2 | 3 => random_expression(rng, dim, d) * random_expression(rng, dim, d),
        4 => random_expression(rng, dim, d) / positive_arg(rng, dim, d),
        5 => -random_expression(rng, dim, d),
        6 => random_expression(rng, dim, d).powi(rng.gen_range(2..=3)),
        7 => (random_expression(rng, dim, d) * Expr::constant(0.5)).exp(),
        8 => positive_arg(rng, dim, d).log(),
        9 => random_expression(rng, dim, d).sin(),
        10 => random_expression(rng, dim, d).cos(),
        _ => positive_arg(rng, dim, d).sqrt(),
    }
}

/// Central-difference gradient, a test oracle only.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let up = f(&xp);
        xp[i] = x[i] - h;
        let um = f(&xp);
        xp[i] = x[i];
        out[i] = (up - um) / (2.0 * h);
    }
    out
}

/// Central-difference Hessian, a test oracle only.
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    let mut xs = x.to_vec();
    let f0 = f(&xs);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                xs[i] = x[i] + h;
                let up = f(&xs);
                xs[i] = x[i] - h;
                let um = f(&xs);
                xs[i] = x[i];
                out[i][i] = (up - 2.0 * f0 + um) / (h * h);
            } else {
                xs[i] = x[i] + h;
                xs[j] = x[j] + h;
                let upp = f(&xs);
                xs[j] = x[j] - h;
                let upm = f(&xs);
                xs[i] = x[i] - h;
                let umm = f(&xs);
                xs[j] = x[j] + h;
                let ump = f(&xs);
                xs[i] = x[i];
                xs[j] = x[j];
                out[i][j] = (upp - upm - ump + umm) / (4.0 * h * h);
            }
        }
    }
    out
}

/// Richardson-extrapolated central-difference Hessian (steps h and 2h),
/// a test oracle only; kills the leading h² truncation term so the
/// comparison tolerance is limited by roundoff, not by the stencil.
pub fn fd_hessian_richardson(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let fine = fd_hessian(f, x, h);
    let coarse = fd_hessian(f, x, 2.0 * h);
    fine.iter()
        .zip(coarse.iter())
        .map(|(fr, cr)| {
            fr.iter()
                .zip(cr.iter())
                .map(|(a, b)| (4.0 * a - b) / 3.0)
                .collect()
        })
        .collect()
}

/// Draws a random expression and evaluation point in [0.5, 1.5]^dim,
/// retrying until the order-3 jet exists, is finite, and has moderate
/// magnitude (value ≤ 1e2, derivatives ≤ 1e3). Shared by the
/// finite-difference comparison tests.
pub fn fd_corpus_sample(rng: &mut impl Rng, dim: usize) -> (Expr, Vec<f64>) {
    loop {
        let e = random_expression(rng, dim, 3);
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..1.5)).collect();
        let j = match e.eval_jet(&x, 3) {
            Ok(j) => j,
            Err(_) => continue,
        };
        let mut ok = j.value().is_finite() && j.value().abs() <= 1e2;
        for i in 0..dim {
            ok = ok && j.grad(i).abs() <= 1e3;
            for k in 0..dim {
                ok = ok && j.hess(i, k).abs() <= 1e3;
                for l in 0..dim {
                    ok = ok && j.third(i, k, l).abs() <= 1e3;
                }
            }
        }
        if ok {
            return (e, x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_checked_jet_examples() {
        let e = Expr::parse("x1^2 + x2^2").unwrap();
        let j = e.eval_jet(&[3.0, 4.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(j.value(), 25.0);
        assert_eq!(j.grad(0), 6.0);
        assert_eq!(j.grad(1), 8.0);
        assert_eq!(j.hess(0, 0), 2.0);
        assert_eq!(j.hess(0, 1), 0.0);

        let e = Expr::parse("x1^2").unwrap();
        let j = e.eval_jet(&[3.0, 0.0, 0.0, 0.0], 3).unwrap();
        assert_eq!(j.value(), 9.0);
        assert_eq!(j.grad(0), 6.0);
        assert_eq!(j.hess(0, 0), 2.0);

        let e = Expr::parse("log(x1)").unwrap();
        let j = e.eval_jet(&[1.0], 3).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.grad(0), 1.0);
        assert_eq!(j.hess(0, 0), -1.0);
        assert_eq!(j.third(0, 0, 0), 2.0);

        let e = Expr::parse("log(r2)").unwrap();
        let j = e.eval_jet(&[1.0, 1.0], 1).unwrap();
        assert!((j.value() - 2.0f64.ln()).abs() < 1e-15);
        assert!((j.grad(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let x = [0.5, -1.0, 0.0, 0.0];
        assert!(matches!(
            Expr::parse("log(x2)").unwrap().eval_jet(&x, 1),
            Err(EvalError::DomainLog { .. })
        ));
        assert!(matches!(
            Expr::parse("sqrt(x3)").unwrap().eval_jet(&x, 1),
            Err(EvalError::DomainSqrt { .. })
        ));
        assert!(matches!(
            Expr::parse("1/x3").unwrap().eval_jet(&x, 1),
            Err(EvalError::DivideByZero { .. })
        ));
        assert!(matches!(
            Expr::parse("x3^-2").unwrap().eval_jet(&x, 1),
            Err(EvalError::NegativePowerOfZero { .. })
        ));
        assert!(matches!(
            Expr::parse("x2^0.5").unwrap().eval_jet(&x, 1),
            Err(EvalError::DomainPow { .. })
        ));
        assert!(matches!(
            Expr::parse("x5").unwrap().eval_jet(&x, 1),
            Err(EvalError::VarOutOfRange { index: 4, dim: 4 })
        ));
    }

    #[test]
    fn sin_cos_identity_as_jets() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x53494e43);
        for _ in 0..40 {
            let arg = random_expression(&mut rng, 4, 2);
            let e = arg.clone().sin().powi(2) + arg.cos().powi(2);
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.5..1.5)).collect();
            let j = match e.eval_jet(&x, 3) {
                Ok(j) => j,
                Err(_) => continue,
            };
            if !j.value().is_finite() {
                continue;
            }
            assert!((j.value() - 1.0).abs() < 1e-9);
            for i in 0..4 {
                assert!(j.grad(i).abs() < 1e-8, "grad {}", j.grad(i));
                for k in 0..4 {
                    assert!(j.hess(i, k).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn product_and_linearity_of_jets() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4c494e);
        let mut done = 0;
        while done < 60 {
            let a = random_expression(&mut rng, 4, 3);
            let b = random_expression(&mut rng, 4, 3);
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.5..1.5)).collect();
            let (ja, jb) = match (a.eval_jet(&x, 3), b.eval_jet(&x, 3)) {
                (Ok(ja), Ok(jb)) => (ja, jb),
                _ => continue,
            };
            let scale = ja.value().abs().max(jb.value().abs());
            if !scale.is_finite() || scale > 1e4 {
                continue;
            }
            let sum = (a.clone() + b.clone()).eval_jet(&x, 3).unwrap();
            let prod = (a.clone() * b.clone()).eval_jet(&x, 3).unwrap();
            let jsum = ja.add(&jb);
            let jprod = ja.mul(&jb);
            for i in 0..4 {
                assert!((sum.grad(i) - jsum.grad(i)).abs() < 1e-12);
                assert!((prod.grad(i) - jprod.grad(i)).abs() * 0.0 == 0.0);
                for j in 0..4 {
                    assert!(
                        (prod.hess(i, j) - jprod.hess(i, j)).abs()
                            <= 1e-12 * jprod.hess(i, j).abs().max(1.0)
                    );
                    for k in 0..4 {
                        assert!(
                            (prod.third(i, j, k) - jprod.third(i, j, k)).abs()
                                <= 1e-12 * jprod.third(i, j, k).abs().max(1.0)
                        );
                    }
                }
            }
            done += 1;
        }
    }

    #[test]
    fn truncation_matches_full_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x54525543);
        let mut done = 0;
        while done < 40 {
            let e = random_expression(&mut rng, 4, 3);
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.5..1.5)).collect();
            let full = match e.eval_jet(&x, 3) {
                Ok(j) if j.value().is_finite() => j,
                _ => continue,
            };
            for order in 0..=3 {
                let direct = e.eval_jet(&x, order).unwrap();
                assert_eq!(direct, full.truncated(order));
            }
            done += 1;
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4644434b);
        for _ in 0..40 {
            let (e, x) = fd_corpus_sample(&mut rng, 4);
            let j = e.eval_jet(&x, 2).unwrap();
            let f = |p: &[f64]| e.eval_jet(p, 0).map(|j| j.value()).unwrap_or(f64::NAN);
            let grad = fd_gradient(&f, &x, 1e-5);
            for i in 0..4 {
                let tol = 1e-6 * grad[i].abs().max(1.0);
                assert!(
                    (j.grad(i) - grad[i]).abs() <= tol,
                    "grad mismatch: {} vs {}",
                    j.grad(i),
                    grad[i]
                );
            }
            let hess = fd_hessian_richardson(&f, &x, 1e-3);
            for i in 0..4 {
                for k in 0..4 {
                    let tol = 1e-6 * hess[i][k].abs().max(1.0);
                    assert!(
                        (j.hess(i, k) - hess[i][k]).abs() <= tol,
                        "hess mismatch: {} vs {}",
                        j.hess(i, k),
                        hess[i][k]
                    );
                }
            }
        }
    }

    #[test]
    fn display_round_trips() {
        let cases = [
            "x1^2 + x2^2",
            "4/(1 + r2)^2",
            "-x1^2",
            "(-2)^2",
            "2*-3",
            "x1^-2.5",
            "exp(-(x1*x1))*sin(x2)",
            "(x1 + x2)*(x3 - x4)",
            "x1 - x2 - x3",
            "x1/(x2*x3)",
            "2^3^2",
        ];
        for src in cases {
            let e = Expr::parse(src).unwrap();
            let printed = e.to_string();
            let again = Expr::parse(&printed)
                .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
            assert_eq!(e, again, "round trip of `{src}` via `{printed}`");
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0x52545250);
        for _ in 0..200 {
            let e = random_expression(&mut rng, 4, 3);
            let printed = e.to_string();
            let again = Expr::parse(&printed)
                .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
            assert_eq!(e, again, "round trip via `{printed}`");
        }
    }

    #[test]
    fn pi_and_builder_ops() {
        let e = Expr::parse("pi").unwrap();
        assert_eq!(e.eval_jet(&[0.0], 0).unwrap().value(), std::f64::consts::PI);
        let built = (Expr::var(0) + Expr::constant(1.0)).powi(2) / Expr::var(1);
        let j = built.eval_jet(&[2.0, 3.0], 1).unwrap();
        assert!((j.value() - 3.0).abs() < 1e-15);
        assert!((j.grad(0) - 2.0).abs() < 1e-15);
        assert!((j.grad(1) + 1.0).abs() < 1e-15);
    }
}
