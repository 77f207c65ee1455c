//! Closed-form scalar expressions in the parameters `u1, u2, ...`.

mod parser;

use std::fmt;

use crate::jet::{Elementary, Jet, JetError};

pub use parser::{parse, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 7] = [Func::Sin, Func::Cos, Func::Sinh, Func::Cosh, Func::Exp, Func::Log, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn elementary(self) -> Elementary {
        match self {
            Func::Sin => Elementary::Sin,
            Func::Cos => Elementary::Cos,
            Func::Sinh => Elementary::Sinh,
            Func::Cosh => Elementary::Cosh,
            Func::Exp => Elementary::Exp,
            Func::Log => Elementary::Log,
            Func::Sqrt => Elementary::Sqrt,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 1-based parameter index.
    Var(usize),
    Pi,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("expression uses u{index} but only {nvars} parameters are available")]
    UnboundVariable { index: usize, nvars: usize },
    #[error("exponent must be constant")]
    NonConstantExponent,
    #[error(transparent)]
    Jet(#[from] JetError),
}

// Convenience constructors used for building expressions programmatically.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn var(k: usize) -> Expr {
        Expr::Var(k)
    }

    pub fn num(x: f64) -> Expr {
        Expr::Const(x)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(self, other: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, other)
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, other)
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, other)
    }

    pub fn div(self, other: Expr) -> Expr {
        Expr::binary(BinOp::Div, self, other)
    }

    pub fn pow(self, other: Expr) -> Expr {
        Expr::binary(BinOp::Pow, self, other)
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    /// Largest parameter index referenced, 0 for constants.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Pi => 0,
            Expr::Var(k) => *k,
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Renames `u_k` to `u_{k+offset}`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        self.substitute(&|k| Some(Expr::Var(k + offset)))
    }

    /// Replaces each `u_k` with `f(k)` when it returns `Some`.
    pub fn substitute(&self, f: &dyn Fn(usize) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi => self.clone(),
            Expr::Var(k) => f(*k).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(f))),
            Expr::Call(g, a) => Expr::Call(*g, Box::new(a.substitute(f))),
            Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(a.substitute(f)), Box::new(b.substitute(f))),
        }
    }

    /// Value of a parameter-free subexpression.
    pub fn constant_value(&self) -> Option<f64> {
        if self.max_var() == 0 {
            self.eval(&[]).ok()
        } else {
            None
        }
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(k) => {
                *u.get(k.wrapping_sub(1)).ok_or(EvalError::UnboundVariable { index: *k, nvars: u.len() })?
            }
            Expr::Neg(a) => -a.eval(u)?,
            Expr::Call(f, a) => f.apply(a.eval(u)?),
            Expr::Binary(op, a, b) => {
                let x = a.eval(u)?;
                let y = b.eval(u)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => {
                        if y.fract() == 0.0 && y.abs() <= i32::MAX as f64 {
                            x.powi(y as i32)
                        } else {
                            x.powf(y)
                        }
                    }
                }
            }
        })
    }

    /// Evaluates on jets: `vars[k-1]` is substituted for `u_k`.
    pub fn eval_jet(&self, vars: &[Jet]) -> Result<Jet, EvalError> {
        let first = vars.first().ok_or(EvalError::UnboundVariable { index: self.max_var(), nvars: 0 })?;
        let (nv, order) = (first.num_vars(), first.order());
        self.jet_rec(vars, nv, order)
    }

    fn jet_rec(&self, vars: &[Jet], nv: usize, order: usize) -> Result<Jet, EvalError> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(nv, order, *c),
            Expr::Pi => Jet::constant(nv, order, std::f64::consts::PI),
            Expr::Var(k) => vars
                .get(k.wrapping_sub(1))
                .cloned()
                .ok_or(EvalError::UnboundVariable { index: *k, nvars: vars.len() })?,
            Expr::Neg(a) => -a.jet_rec(vars, nv, order)?,
            Expr::Call(f, a) => a.jet_rec(vars, nv, order)?.elementary(f.elementary())?,
            Expr::Binary(BinOp::Pow, a, b) => {
                let q = b.constant_value().ok_or(EvalError::NonConstantExponent)?;
                let base = a.jet_rec(vars, nv, order)?;
                if q.fract() == 0.0 && q.abs() <= i32::MAX as f64 {
                    base.powi(q as i32)?
                } else {
                    base.elementary(Elementary::Pow(q))?
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.jet_rec(vars, nv, order)?;
                let y = b.jet_rec(vars, nv, order)?;
                match op {
                    BinOp::Add => &x + &y,
                    BinOp::Sub => &x - &y,
                    BinOp::Mul => &x * &y,
                    BinOp::Div => x.div(&y)?,
                    BinOp::Pow => unreachable!(),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.precedence();
        if p < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{}", c)?,
            Expr::Var(k) => write!(f, "u{}", k)?,
            Expr::Pi => write!(f, "pi")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Expr::Call(g, a) => {
                write!(f, "{}(", g.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Binary(op, a, b) => {
                let q = op.precedence();
                // '^' is right associative; the others associate to the left
                let (lmin, rmin) = if *op == BinOp::Pow { (q + 1, 3) } else { (q, q + 1) };
                a.fmt_prec(f, lmin)?;
                if *op == BinOp::Pow {
                    write!(f, "^")?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                b.fmt_prec(f, rmin)?;
            }
        }
        if p < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
