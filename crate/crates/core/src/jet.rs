//! Truncated multivariate Taylor expansions ("jets").
//!
//! A [`Jet`] of order `K` in `m` variables stores the Taylor coefficients of a
//! scalar function about an expansion point for every monomial of total degree
//! at most `K`. Coefficients are laid out densely in graded-lexicographic
//! order, so the monomials of degree `<= k` always form a prefix of the
//! monomials of degree `<= K`. Truncation is therefore a slice, and jets of
//! different orders over the same variables combine by truncating to the
//! smaller order.
//!
//! Arithmetic on jets is exact up to floating point rounding: the
//! coefficients of `a * b` are the coefficients of the Taylor expansion of
//! the product function, truncated at the common order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Values below this magnitude cannot be divided by.
pub const DIVISION_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jets have mismatched variable counts ({0} vs {1})")]
    VariableMismatch(usize, usize),
    #[error("division by a jet with value {0:e}")]
    DivisionByZero(f64),
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("derivative of total degree {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },
    #[error("multi-index has {got} entries, expected {expected}")]
    IndexLength { got: usize, expected: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
}

/// Monomial table shared by all jets with the same variable count and
/// maximal order.
pub(crate) struct Basis {
    nvars: usize,
    max_order: usize,
    exps: Vec<Vec<u8>>,
    degree: Vec<usize>,
    /// `counts[k]` is the number of monomials of degree `<= k`.
    counts: Vec<usize>,
    /// Row-major `len x len` product table, `u32::MAX` when the degree
    /// overflows `max_order`.
    mul: Vec<u32>,
    /// `raise[v][i]` is the index of monomial `i` times `u_v`.
    raise: Vec<Vec<u32>>,
    index: HashMap<Vec<u8>, usize>,
}

const NONE: u32 = u32::MAX;

fn push_degree(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == nvars {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first as u8);
        push_degree(nvars, degree - first, prefix, out);
        prefix.pop();
    }
}

impl Basis {
    fn build(nvars: usize, max_order: usize) -> Basis {
        let mut exps = Vec::new();
        let mut counts = Vec::with_capacity(max_order + 1);
        for d in 0..=max_order {
            if nvars == 0 {
                if d == 0 {
                    exps.push(Vec::new());
                }
            } else {
                push_degree(nvars, d, &mut Vec::new(), &mut exps);
            }
            counts.push(exps.len());
        }
        let degree: Vec<usize> = exps.iter().map(|e| e.iter().map(|&x| x as usize).sum()).collect();
        let index: HashMap<Vec<u8>, usize> = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let len = exps.len();
        let mut mul = vec![NONE; len * len];
        for i in 0..len {
            for j in 0..len {
                if degree[i] + degree[j] <= max_order {
                    let sum: Vec<u8> = exps[i].iter().zip(&exps[j]).map(|(a, b)| a + b).collect();
                    mul[i * len + j] = index[&sum] as u32;
                }
            }
        }
        let raise = (0..nvars)
            .map(|v| {
                (0..len)
                    .map(|i| {
                        if degree[i] < max_order {
                            let mut e = exps[i].clone();
                            e[v] += 1;
                            index[&e] as u32
                        } else {
                            NONE
                        }
                    })
                    .collect()
            })
            .collect();
        Basis { nvars, max_order, exps, degree, counts, mul, raise, index }
    }

    fn shared(nvars: usize, order: usize) -> Arc<Basis> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<Basis>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet basis cache poisoned");
        guard.entry((nvars, order)).or_insert_with(|| Arc::new(Basis::build(nvars, order))).clone()
    }

    fn len(&self) -> usize {
        self.exps.len()
    }
}

/// Number of monomials of total degree `<= order` in `nvars` variables,
/// i.e. `C(nvars + order, order)`.
pub fn coefficient_count(nvars: usize, order: usize) -> usize {
    let mut c: usize = 1;
    for i in 1..=order {
        c = c * (nvars + i) / i;
    }
    c
}

/// Binary arithmetic selector for [`Jet::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
    /// Real power `a^q`; requires a positive value unless `q` is a
    /// nonnegative integer.
    Pow(f64),
}

#[derive(Clone)]
pub struct Jet {
    basis: Arc<Basis>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("num_vars", &self.basis.nvars)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.basis.nvars == other.basis.nvars && self.order == other.order && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Jet {
        let basis = Basis::shared(nvars, order);
        let mut coeffs = vec![0.0; basis.counts[order]];
        coeffs[0] = value;
        Jet { basis, order, coeffs }
    }

    /// The coordinate function `u_var` expanded about `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Result<Jet, JetError> {
        if var >= nvars {
            return Err(JetError::VariableOutOfRange { index: var, nvars });
        }
        let mut j = Jet::constant(nvars, order, value);
        if order >= 1 {
            // degree-1 monomials follow the constant in variable order
            j.coeffs[1 + var] = 1.0;
        }
        Ok(j)
    }

    /// Builds a jet from Taylor coefficients given as a function of the
    /// multi-index.
    pub fn from_taylor(nvars: usize, order: usize, mut coeff: impl FnMut(&[u8]) -> f64) -> Jet {
        let basis = Basis::shared(nvars, order);
        let coeffs = basis.exps[..basis.counts[order]].iter().map(|e| coeff(e)).collect();
        Jet { basis, order, coeffs }
    }

    /// Builds a jet from partial derivatives given as a function of the
    /// multi-index.
    pub fn from_derivatives(nvars: usize, order: usize, mut deriv: impl FnMut(&[u8]) -> f64) -> Jet {
        Jet::from_taylor(nvars, order, |e| deriv(e) / multi_factorial(e))
    }

    /// Dense coefficient constructor; `coeffs` must have
    /// `coefficient_count(nvars, order)` entries in graded-lex order.
    pub fn from_coefficients(nvars: usize, order: usize, coeffs: Vec<f64>) -> Jet {
        let basis = Basis::shared(nvars, order);
        assert_eq!(coeffs.len(), basis.counts[order], "coefficient count mismatch");
        Jet { basis, order, coeffs }
    }

    pub fn num_vars(&self) -> usize {
        self.basis.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multi-indices in coefficient order.
    pub fn multi_indices(&self) -> impl Iterator<Item = &[u8]> {
        self.basis.exps[..self.coeffs.len()].iter().map(|e| e.as_slice())
    }

    fn lookup(&self, multi: &[u8]) -> Result<Option<usize>, JetError> {
        if multi.len() != self.basis.nvars {
            return Err(JetError::IndexLength { got: multi.len(), expected: self.basis.nvars });
        }
        let deg: usize = multi.iter().map(|&x| x as usize).sum();
        if deg > self.order {
            return Err(JetError::OrderExceeded { requested: deg, order: self.order });
        }
        Ok(self.basis.index.get(multi).copied())
    }

    /// Taylor coefficient of the monomial `u^multi`.
    pub fn coefficient(&self, multi: &[u8]) -> Result<f64, JetError> {
        Ok(self.lookup(multi)?.map_or(0.0, |i| self.coeffs[i]))
    }

    /// The partial derivative `∂^multi f` at the expansion point.
    pub fn derivative(&self, multi: &[u8]) -> Result<f64, JetError> {
        Ok(self.coefficient(multi)? * multi_factorial(multi))
    }

    /// Jet of `∂f/∂u_var`, one order lower.
    pub fn partial(&self, var: usize) -> Result<Jet, JetError> {
        if var >= self.basis.nvars {
            return Err(JetError::VariableOutOfRange { index: var, nvars: self.basis.nvars });
        }
        if self.order == 0 {
            return Err(JetError::OrderExceeded { requested: 1, order: 0 });
        }
        let order = self.order - 1;
        let n = self.basis.counts[order];
        let raise = &self.basis.raise[var];
        let coeffs = (0..n)
            .map(|i| {
                let up = raise[i] as usize;
                (self.basis.exps[i][var] as f64 + 1.0) * self.coeffs[up]
            })
            .collect();
        Ok(Jet { basis: self.basis.clone(), order, coeffs })
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { basis: self.basis.clone(), order, coeffs: self.coeffs[..self.basis.counts[order]].to_vec() }
    }

    fn check_vars(&self, other: &Jet) -> Result<(), JetError> {
        if self.basis.nvars != other.basis.nvars {
            Err(JetError::VariableMismatch(self.basis.nvars, other.basis.nvars))
        } else {
            Ok(())
        }
    }

    fn larger_basis(&self, other: &Jet) -> Arc<Basis> {
        if self.basis.max_order >= other.basis.max_order {
            self.basis.clone()
        } else {
            other.basis.clone()
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let order = self.order.min(other.order);
        let basis = self.larger_basis(other);
        let n = basis.counts[order];
        let coeffs = self.coeffs[..n].iter().zip(&other.coeffs[..n]).map(|(&a, &b)| f(a, b)).collect();
        Jet { basis, order, coeffs }
    }

    fn product(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let basis = self.larger_basis(other);
        let len = basis.len();
        let n = basis.counts[order];
        let mut out = vec![0.0; n];
        for i in 0..n {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            let limit = basis.counts[order - basis.degree[i]];
            let row = &basis.mul[i * len..i * len + limit];
            for (j, &slot) in row.iter().enumerate() {
                out[slot as usize] += a * other.coeffs[j];
            }
        }
        Jet { basis, order, coeffs: out }
    }

    pub fn arith(&self, other: &Jet, op: ArithOp) -> Result<Jet, JetError> {
        self.check_vars(other)?;
        Ok(match op {
            ArithOp::Add => self.zip_with(other, |a, b| a + b),
            ArithOp::Sub => self.zip_with(other, |a, b| a - b),
            ArithOp::Mul => self.product(other),
            ArithOp::Div => self.product(&other.recip()?),
        })
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { basis: self.basis.clone(), order: self.order, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Evaluates `Σ_k series[k] t^k` where `t = self - value`, i.e. the
    /// composition of a univariate Taylor series with this jet.
    fn compose(&self, series: &[f64]) -> Jet {
        let mut t = self.clone();
        t.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.basis.nvars, self.order, series[self.order.min(series.len() - 1)]);
        acc.basis = self.basis.clone();
        for k in (0..self.order.min(series.len() - 1)).rev() {
            acc = acc.product(&t).add_scalar(series[k]);
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v.abs() < DIVISION_THRESHOLD {
            return Err(JetError::DivisionByZero(v));
        }
        let mut series = Vec::with_capacity(self.order + 1);
        let mut c = 1.0 / v;
        for _ in 0..=self.order {
            series.push(c);
            c *= -1.0 / v;
        }
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Div)
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        let mut base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Jet::constant(self.basis.nvars, self.order, 1.0);
        acc.basis = self.basis.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.product(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.product(&base);
            }
        }
        Ok(acc)
    }

    pub fn elementary(&self, f: Elementary) -> Result<Jet, JetError> {
        let v = self.value();
        let k = self.order;
        let series: Vec<f64> = match f {
            Elementary::Exp => {
                let e = v.exp();
                factorial_series(k, |_| e)
            }
            Elementary::Sin => {
                let (s, c) = v.sin_cos();
                factorial_series(k, |i| [s, c, -s, -c][i % 4])
            }
            Elementary::Cos => {
                let (s, c) = v.sin_cos();
                factorial_series(k, |i| [c, -s, -c, s][i % 4])
            }
            Elementary::Sinh => {
                let (s, c) = (v.sinh(), v.cosh());
                factorial_series(k, |i| if i % 2 == 0 { s } else { c })
            }
            Elementary::Cosh => {
                let (s, c) = (v.sinh(), v.cosh());
                factorial_series(k, |i| if i % 2 == 0 { c } else { s })
            }
            Elementary::Log => {
                if v <= 0.0 {
                    return Err(JetError::Domain { function: "log", value: v });
                }
                let mut s = vec![v.ln()];
                let mut p = 1.0;
                for i in 1..=k {
                    p /= v;
                    let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                    s.push(sign * p / i as f64);
                }
                s
            }
            Elementary::Sqrt => {
                if v <= 0.0 {
                    return Err(JetError::Domain { function: "sqrt", value: v });
                }
                binomial_series(k, v, 0.5)
            }
            Elementary::Pow(q) => {
                let is_nat = q >= 0.0 && q.fract() == 0.0;
                if v <= 0.0 && !is_nat {
                    return Err(JetError::Domain { function: "pow", value: v });
                }
                if is_nat && q <= i32::MAX as f64 {
                    return self.powi(q as i32);
                }
                binomial_series(k, v, q)
            }
        };
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.elementary(Elementary::Sqrt)
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        self.elementary(Elementary::Log)
    }

    pub fn exp(&self) -> Jet {
        self.elementary(Elementary::Exp).expect("exp is total")
    }

    pub fn sin(&self) -> Jet {
        self.elementary(Elementary::Sin).expect("sin is total")
    }

    pub fn cos(&self) -> Jet {
        self.elementary(Elementary::Cos).expect("cos is total")
    }
}

fn factorial_series(k: usize, deriv: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut fact = 1.0;
    (0..=k)
        .map(|i| {
            if i > 0 {
                fact *= i as f64;
            }
            deriv(i) / fact
        })
        .collect()
}

/// Taylor coefficients of `x^q` about `v`: `binom(q, i) v^(q - i)`.
fn binomial_series(k: usize, v: f64, q: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut binom = 1.0;
    for i in 0..=k {
        if i > 0 {
            binom *= (q - (i as f64 - 1.0)) / i as f64;
        }
        out.push(binom * v.powf(q - i as f64));
    }
    out
}

pub fn multi_factorial(multi: &[u8]) -> f64 {
    multi.iter().map(|&a| (1..=a as u32).map(f64::from).product::<f64>()).product()
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.arith(rhs, ArithOp::Add).expect("jet variable mismatch")
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.arith(rhs, ArithOp::Sub).expect("jet variable mismatch")
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.arith(rhs, ArithOp::Mul).expect("jet variable mismatch")
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
