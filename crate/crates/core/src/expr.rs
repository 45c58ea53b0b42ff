//! Coefficient functions of the position `x`, used for metric components,
//! one-forms and m-th root coefficients.
//!
//! Serialized form: a bare number is a constant, otherwise a single-key
//! object, e.g. `{"div": [1.0, {"powi": [{"x": 1}, 2]}]}` for `1/(x¹)²`.

use serde::{Deserialize, Serialize};

use crate::jets::{Jet, JetError, TruncationOrder};

/// Smallest denominator accepted when evaluating a `div` node.
const DIV_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expr {
    Const(f64),
    Node(Box<ExprNode>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExprNode {
    /// Chart coordinate `x^i`.
    X(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Expr),
    Div(Expr, Expr),
    Powi(Expr, u32),
    Sin(Expr),
    Cos(Expr),
}

impl Default for Expr {
    fn default() -> Self {
        Expr::Const(0.0)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}

impl Expr {
    pub fn c(value: f64) -> Self {
        Expr::Const(value)
    }

    pub fn x(i: usize) -> Self {
        Expr::Node(Box::new(ExprNode::X(i)))
    }

    pub fn add(terms: Vec<Expr>) -> Self {
        Expr::Node(Box::new(ExprNode::Add(terms)))
    }

    pub fn mul(factors: Vec<Expr>) -> Self {
        Expr::Node(Box::new(ExprNode::Mul(factors)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Self {
        Expr::Node(Box::new(ExprNode::Neg(e)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(num: Expr, den: Expr) -> Self {
        Expr::Node(Box::new(ExprNode::Div(num, den)))
    }

    pub fn powi(base: Expr, n: u32) -> Self {
        Expr::Node(Box::new(ExprNode::Powi(base, n)))
    }

    pub fn sin(e: Expr) -> Self {
        Expr::Node(Box::new(ExprNode::Sin(e)))
    }

    pub fn cos(e: Expr) -> Self {
        Expr::Node(Box::new(ExprNode::Cos(e)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Node(_) => None,
        }
    }

    /// Whether `x^k` occurs anywhere in the expression.
    pub fn depends_on(&self, k: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Node(node) => match node.as_ref() {
                ExprNode::X(i) => *i == k,
                ExprNode::Add(v) | ExprNode::Mul(v) => v.iter().any(|e| e.depends_on(k)),
                ExprNode::Neg(e) | ExprNode::Sin(e) | ExprNode::Cos(e) | ExprNode::Powi(e, _) => {
                    e.depends_on(k)
                }
                ExprNode::Div(a, b) => a.depends_on(k) || b.depends_on(k),
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            Expr::Const(c) if !c.is_finite() => Err(format!("non-finite constant {c}")),
            Expr::Const(_) => Ok(()),
            Expr::Node(node) => match node.as_ref() {
                ExprNode::X(i) if *i >= 4 => Err(format!("coordinate index {i} out of range")),
                ExprNode::X(_) => Ok(()),
                ExprNode::Add(v) | ExprNode::Mul(v) => {
                    if v.is_empty() {
                        return Err("empty add/mul".into());
                    }
                    v.iter().try_for_each(Expr::validate)
                }
                ExprNode::Neg(e) | ExprNode::Sin(e) | ExprNode::Cos(e) | ExprNode::Powi(e, _) => {
                    e.validate()
                }
                ExprNode::Div(a, b) => {
                    a.validate()?;
                    b.validate()
                }
            },
        }
    }

    pub fn eval(&self, x: &[f64; 4]) -> Result<f64, JetError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Node(node) => match node.as_ref() {
                ExprNode::X(i) => x[*i],
                ExprNode::Add(v) => v.iter().map(|e| e.eval(x)).sum::<Result<f64, _>>()?,
                ExprNode::Mul(v) => v.iter().map(|e| e.eval(x)).product::<Result<f64, _>>()?,
                ExprNode::Neg(e) => -e.eval(x)?,
                ExprNode::Div(a, b) => {
                    let den = b.eval(x)?;
                    if !(den.abs() > DIV_THRESHOLD) {
                        return Err(JetError::DivisionNearZero {
                            value: den,
                            threshold: DIV_THRESHOLD,
                        });
                    }
                    a.eval(x)? / den
                }
                ExprNode::Powi(e, n) => e.eval(x)?.powi(*n as i32),
                ExprNode::Sin(e) => e.eval(x)?.sin(),
                ExprNode::Cos(e) => e.eval(x)?.cos(),
            },
        })
    }

    /// Evaluates on position jets; the result carries the x-dependence only.
    pub fn eval_jet(&self, x: &[Jet; 4], order: TruncationOrder) -> Result<Jet, JetError> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(*c, order),
            Expr::Node(node) => match node.as_ref() {
                ExprNode::X(i) => x[*i].truncate(order),
                ExprNode::Add(v) => {
                    let mut acc = v[0].eval_jet(x, order)?;
                    for e in &v[1..] {
                        acc = acc + e.eval_jet(x, order)?;
                    }
                    acc
                }
                ExprNode::Mul(v) => {
                    let mut acc = v[0].eval_jet(x, order)?;
                    for e in &v[1..] {
                        acc = acc.mul(&e.eval_jet(x, order)?);
                    }
                    acc
                }
                ExprNode::Neg(e) => -e.eval_jet(x, order)?,
                ExprNode::Div(a, b) => a
                    .eval_jet(x, order)?
                    .checked_div(&b.eval_jet(x, order)?, DIV_THRESHOLD)?,
                ExprNode::Powi(e, n) => e.eval_jet(x, order)?.powi(*n),
                ExprNode::Sin(e) => e.eval_jet(x, order)?.sin(),
                ExprNode::Cos(e) => e.eval_jet(x, order)?.cos(),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{seed_chart_jets, MultiIndex};

    #[test]
    fn parses_compact_json() {
        let e: Expr = serde_json::from_str(r#"{"div": [1.0, {"powi": [{"x": 1}, 2]}]}"#).unwrap();
        assert_eq!(e.eval(&[0.0, 2.0, 0.0, 0.0]).unwrap(), 0.25);
        let back: Expr = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn jet_and_value_agree() {
        let e = Expr::add(vec![
            Expr::c(1.0),
            Expr::mul(vec![Expr::c(-2.0), Expr::div(Expr::c(1.0), Expr::x(1))]),
            Expr::powi(Expr::sin(Expr::x(2)), 2),
        ]);
        let x = [0.0, 4.0, 0.7, 0.0];
        let o = TruncationOrder::new(3, 0);
        let s = seed_chart_jets(&x, &[1.0, 0.0, 0.0, 0.0], o);
        let xs = [s[0].clone(), s[1].clone(), s[2].clone(), s[3].clone()];
        let j = e.eval_jet(&xs, o).unwrap();
        assert!((j.value() - e.eval(&x).unwrap()).abs() < 1e-15);
        // d/dx1 of -2/x1 = 2/x1^2
        let d = j.partial(&MultiIndex::from_vars(&[1])).unwrap();
        assert!((d - 2.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_index() {
        assert!(Expr::x(4).validate().is_err());
        assert!(Expr::add(vec![]).validate().is_err());
    }
}
