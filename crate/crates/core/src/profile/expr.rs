use std::fmt;

use num_complex::Complex64;

use super::ProfileError;

/// Elementary functions understood by the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    fn apply(self, z: Complex64, t: f64) -> Result<Complex64, ProfileError> {
        let zero = Complex64::new(0.0, 0.0);
        Ok(match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Tanh => z.tanh(),
            Func::Exp => z.exp(),
            Func::Ln => {
                if z == zero {
                    return Err(ProfileError::BranchPoint { func: "ln", t });
                }
                z.ln()
            }
            Func::Sqrt => {
                if z == zero {
                    return Err(ProfileError::BranchPoint { func: "sqrt", t });
                }
                z.sqrt()
            }
        })
    }
}

/// Expression tree for a time-dependent complex coefficient.
///
/// Trees are immutable once built; `Power` exponents never contain the time
/// variable (enforced by the parser and by [`Expr::pow`]).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(Complex64),
    Time,
    Negate(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Subtract(Box<Expr>, Box<Expr>),
    Multiply(Box<Expr>, Box<Expr>),
    Divide(Box<Expr>, Box<Expr>),
    Power(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

// Smart constructors; they simplify, so they are not the operator traits.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn real(x: f64) -> Expr {
        Expr::Constant(c(x))
    }

    pub fn constant(z: Complex64) -> Expr {
        Expr::Constant(z)
    }

    /// True when the subtree does not reference `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Constant(_) => true,
            Expr::Time => false,
            Expr::Negate(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b)
            | Expr::Subtract(a, b)
            | Expr::Multiply(a, b)
            | Expr::Divide(a, b)
            | Expr::Power(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Time => 1,
            Expr::Negate(a) | Expr::Call(_, a) => 1 + a.size(),
            Expr::Add(a, b)
            | Expr::Subtract(a, b)
            | Expr::Multiply(a, b)
            | Expr::Divide(a, b)
            | Expr::Power(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn as_constant(&self) -> Option<Complex64> {
        match self {
            Expr::Constant(z) => Some(*z),
            _ => None,
        }
    }

    fn is_exactly(&self, v: f64) -> bool {
        self.as_constant() == Some(c(v))
    }

    // Smart constructors. They fold constant operands (only when the folded
    // value is finite) and drop additive zeros / multiplicative ones, which
    // keeps repeated derivatives small.

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Constant(z) => Expr::Constant(c(0.0) - z),
            Expr::Negate(inner) => *inner,
            other => Expr::Negate(Box::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_exactly(0.0) {
            return b;
        }
        if b.is_exactly(0.0) {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            return Expr::Constant(x + y);
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_exactly(0.0) {
            return a;
        }
        if a.is_exactly(0.0) {
            return Expr::neg(b);
        }
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            return Expr::Constant(x - y);
        }
        Expr::Subtract(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_exactly(0.0) || b.is_exactly(0.0) {
            return Expr::real(0.0);
        }
        if a.is_exactly(1.0) {
            return b;
        }
        if b.is_exactly(1.0) {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            return Expr::Constant(x * y);
        }
        Expr::Multiply(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_exactly(1.0) {
            return a;
        }
        if a.is_exactly(0.0) && !b.is_exactly(0.0) {
            return Expr::real(0.0);
        }
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            let q = x / y;
            if y != c(0.0) && q.re.is_finite() && q.im.is_finite() {
                return Expr::Constant(q);
            }
        }
        Expr::Divide(Box::new(a), Box::new(b))
    }

    /// `base ^ exponent`; the exponent must be a constant subtree.
    pub fn pow(base: Expr, exponent: Expr) -> Result<Expr, ProfileError> {
        if !exponent.is_constant() {
            return Err(ProfileError::NonConstantExponent { offset: None });
        }
        if exponent.is_exactly(1.0) {
            return Ok(base);
        }
        if exponent.is_exactly(0.0) {
            return Ok(Expr::real(1.0));
        }
        Ok(Expr::Power(Box::new(base), Box::new(exponent)))
    }

    /// Folds a single arithmetic node whose operands are constants, using
    /// the same operation `eval` would. Nothing else is simplified, so
    /// evaluation (including errors) is unchanged.
    pub(super) fn fold_literal(self) -> Expr {
        let folded = match &self {
            Expr::Negate(a) => a.as_constant().map(|x| c(0.0) - x),
            Expr::Add(a, b) => a.as_constant().zip(b.as_constant()).map(|(x, y)| x + y),
            Expr::Subtract(a, b) => a.as_constant().zip(b.as_constant()).map(|(x, y)| x - y),
            Expr::Multiply(a, b) => a.as_constant().zip(b.as_constant()).map(|(x, y)| x * y),
            Expr::Divide(a, b) => a
                .as_constant()
                .zip(b.as_constant())
                .filter(|(_, y)| *y != c(0.0))
                .map(|(x, y)| x / y),
            _ => None,
        };
        match folded {
            Some(z) if z.re.is_finite() && z.im.is_finite() => Expr::Constant(z),
            _ => self,
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Evaluates the expression at time `t`.
    pub fn eval(&self, t: f64) -> Result<Complex64, ProfileError> {
        let z = self.eval_raw(t)?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(ProfileError::NonFinite { t });
        }
        Ok(z)
    }

    fn eval_raw(&self, t: f64) -> Result<Complex64, ProfileError> {
        Ok(match self {
            Expr::Constant(z) => *z,
            Expr::Time => c(t),
            // 0 − z keeps zero parts positive, so sqrt(-4) lands on +2i
            Expr::Negate(a) => c(0.0) - a.eval_raw(t)?,
            Expr::Add(a, b) => a.eval_raw(t)? + b.eval_raw(t)?,
            Expr::Subtract(a, b) => a.eval_raw(t)? - b.eval_raw(t)?,
            Expr::Multiply(a, b) => a.eval_raw(t)? * b.eval_raw(t)?,
            Expr::Divide(a, b) => {
                let num = a.eval_raw(t)?;
                let den = b.eval_raw(t)?;
                if den == c(0.0) {
                    return Err(ProfileError::DivisionByZero { t });
                }
                num / den
            }
            Expr::Power(a, b) => {
                let base = a.eval_raw(t)?;
                let exponent = b.eval_raw(t)?;
                power(base, exponent, t)?
            }
            Expr::Call(f, a) => f.apply(a.eval_raw(t)?, t)?,
        })
    }

    /// Symbolic time derivative.
    pub fn differentiate(&self) -> Result<Expr, ProfileError> {
        Ok(match self {
            Expr::Constant(_) => Expr::real(0.0),
            Expr::Time => Expr::real(1.0),
            Expr::Negate(a) => Expr::neg(a.differentiate()?),
            Expr::Add(a, b) => Expr::add(a.differentiate()?, b.differentiate()?),
            Expr::Subtract(a, b) => Expr::sub(a.differentiate()?, b.differentiate()?),
            Expr::Multiply(a, b) => Expr::add(
                Expr::mul(a.differentiate()?, (**b).clone()),
                Expr::mul((**a).clone(), b.differentiate()?),
            ),
            Expr::Divide(a, b) => {
                let da = a.differentiate()?;
                if b.is_constant() {
                    Expr::div(da, (**b).clone())
                } else {
                    let db = b.differentiate()?;
                    Expr::div(
                        Expr::sub(Expr::mul(da, (**b).clone()), Expr::mul((**a).clone(), db)),
                        Expr::pow((**b).clone(), Expr::real(2.0))?,
                    )
                }
            }
            Expr::Power(a, b) => {
                if !b.is_constant() {
                    return Err(ProfileError::NotDifferentiable(
                        "exponent depends on t".into(),
                    ));
                }
                let exponent = b.eval_raw(0.0)?;
                let reduced = Expr::pow((**a).clone(), Expr::Constant(exponent - 1.0))?;
                Expr::mul(
                    Expr::mul(Expr::Constant(exponent), reduced),
                    a.differentiate()?,
                )
            }
            Expr::Call(f, a) => {
                let da = a.differentiate()?;
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, u)),
                    Func::Tan => Expr::div(
                        Expr::real(1.0),
                        Expr::pow(Expr::call(Func::Cos, u), Expr::real(2.0))?,
                    ),
                    Func::Sinh => Expr::call(Func::Cosh, u),
                    Func::Cosh => Expr::call(Func::Sinh, u),
                    Func::Tanh => Expr::div(
                        Expr::real(1.0),
                        Expr::pow(Expr::call(Func::Cosh, u), Expr::real(2.0))?,
                    ),
                    Func::Exp => Expr::call(Func::Exp, u),
                    Func::Ln => Expr::div(Expr::real(1.0), u),
                    Func::Sqrt => Expr::div(
                        Expr::real(1.0),
                        Expr::mul(Expr::real(2.0), Expr::call(Func::Sqrt, u)),
                    ),
                };
                Expr::mul(outer, da)
            }
        })
    }
}

fn power(base: Complex64, exponent: Complex64, t: f64) -> Result<Complex64, ProfileError> {
    let zero = c(0.0);
    let integral =
        exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= i32::MAX as f64;
    if integral {
        let n = exponent.re as i32;
        if base == zero && n < 0 {
            return Err(ProfileError::DivisionByZero { t });
        }
        return Ok(base.powi(n));
    }
    if base == zero {
        return Err(ProfileError::BranchPoint { func: "^", t });
    }
    Ok(base.powc(exponent))
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    // −0 prints as 0: negation reads back as 0 − z, which cannot produce it
    if x < 0.0 {
        write!(f, "(-{})", -x)
    } else if x == 0.0 {
        write!(f, "0")
    } else {
        write!(f, "{}", x)
    }
}

/// Fully parenthesized rendering that the parser reads back to a tree with
/// identical evaluation.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(z) => {
                if z.im == 0.0 {
                    write_real(f, z.re)
                } else {
                    write!(f, "(")?;
                    write_real(f, z.re)?;
                    write!(f, "+")?;
                    write_real(f, z.im)?;
                    write!(f, "*i)")
                }
            }
            Expr::Time => write!(f, "t"),
            Expr::Negate(a) => write!(f, "(-{})", a),
            Expr::Add(a, b) => write!(f, "({}+{})", a, b),
            Expr::Subtract(a, b) => write!(f, "({}-{})", a, b),
            Expr::Multiply(a, b) => write!(f, "({}*{})", a, b),
            Expr::Divide(a, b) => write!(f, "({}/{})", a, b),
            Expr::Power(a, b) => write!(f, "({}^{})", a, b),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}
