//! Expression trees over activation primitives.
//!
//! An expression is either a primitive leaf or a binary operator applied
//! to two sub-expressions; every subtree denotes a function of the same
//! scalar input. The textual form is prefix with `:` separators and no
//! whitespace:
//!
//! ```text
//! expr := PRIMITIVE | "(" OP ":" expr ":" expr ")"
//! OP   := "+" | "-" | "*" | "/" | "^" | "min" | "max" | "comp"
//! ```
//!
//! `(comp:f:g)` is composition `f(g(x))`; all other operators combine the
//! two operand values pointwise. Evaluation propagates dual numbers, so a
//! single tree walk yields the value and the exact derivative.
//!
//! Division and `^` follow IEEE semantics and may produce non-finite
//! results. Those are returned from the producing node untouched, but any
//! operator that *consumes* a non-finite operand returns a NaN pair: a
//! non-finite intermediate taints everything downstream instead of being
//! laundered back into a finite number (e.g. by `max`).

use std::fmt;
use std::str::FromStr;

use crate::primitives::Primitive;

/// Binary operators of the expression grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
    Comp,
}

/// All operators, in grammar order. Uniform draws index into this table.
pub const ALL_OPERATORS: [Operator; 8] = [
    Operator::Add,
    Operator::Sub,
    Operator::Mul,
    Operator::Div,
    Operator::Pow,
    Operator::Min,
    Operator::Max,
    Operator::Comp,
];

impl Operator {
    pub fn token(self) -> &'static str {
        match self {
            Operator::Add => "+",
            Operator::Sub => "-",
            Operator::Mul => "*",
            Operator::Div => "/",
            Operator::Pow => "^",
            Operator::Min => "min",
            Operator::Max => "max",
            Operator::Comp => "comp",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Operator {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ALL_OPERATORS
            .iter()
            .copied()
            .find(|op| op.token() == s)
            .ok_or(())
    }
}

/// A value together with its derivative with respect to the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub value: f64,
    pub deriv: f64,
}

impl DualValue {
    /// Canonical tainted pair for expressions that consumed a non-finite
    /// intermediate.
    pub const NON_FINITE: DualValue = DualValue {
        value: f64::NAN,
        deriv: f64::NAN,
    };

    /// True iff both the value and the derivative are finite.
    pub fn is_finite(self) -> bool {
        self.value.is_finite() && self.deriv.is_finite()
    }
}

/// An activation-function expression tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Leaf(Primitive),
    Node {
        op: Operator,
        left: Box<Expr>,
        right: Box<Expr>,
    },
}

impl Expr {
    pub fn leaf(p: Primitive) -> Expr {
        Expr::Leaf(p)
    }

    pub fn node(op: Operator, left: Expr, right: Expr) -> Expr {
        Expr::Node {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Total number of nodes (operators plus leaves).
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Leaf(_) => 1,
            Expr::Node { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    /// Tree depth; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Leaf(_) => 1,
            Expr::Node { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Evaluate the expression and its derivative at `x`.
    pub fn eval_dual(&self, x: f64) -> DualValue {
        match self {
            Expr::Leaf(p) => DualValue {
                value: p.value(x),
                deriv: p.derivative(x),
            },
            Expr::Node {
                op: Operator::Comp,
                left,
                right,
            } => {
                // (comp:f:g) = f(g(x)); chain rule on the derivative.
                let inner = right.eval_dual(x);
                if !inner.is_finite() {
                    return DualValue::NON_FINITE;
                }
                let outer = left.eval_dual(inner.value);
                DualValue {
                    value: outer.value,
                    deriv: outer.deriv * inner.deriv,
                }
            }
            Expr::Node { op, left, right } => {
                let a = left.eval_dual(x);
                let b = right.eval_dual(x);
                if !a.is_finite() || !b.is_finite() {
                    return DualValue::NON_FINITE;
                }
                combine(*op, a, b)
            }
        }
    }
}

/// Forward-mode rules for the pointwise operators.
///
/// `min`/`max` select an operand; on a value tie the left operand's
/// derivative is taken.
fn combine(op: Operator, a: DualValue, b: DualValue) -> DualValue {
    match op {
        Operator::Add => DualValue {
            value: a.value + b.value,
            deriv: a.deriv + b.deriv,
        },
        Operator::Sub => DualValue {
            value: a.value - b.value,
            deriv: a.deriv - b.deriv,
        },
        Operator::Mul => DualValue {
            value: a.value * b.value,
            deriv: a.deriv * b.value + a.value * b.deriv,
        },
        Operator::Div => DualValue {
            value: a.value / b.value,
            deriv: (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value),
        },
        Operator::Pow => {
            // a^b = exp(b·ln a); a ≤ 0 with non-integer b is NaN and the
            // derivative is NaN for any a ≤ 0. Both propagate.
            let v = a.value.powf(b.value);
            let d = v * (b.deriv * a.value.ln() + b.value * a.deriv / a.value);
            DualValue { value: v, deriv: d }
        }
        Operator::Min => {
            if a.value <= b.value {
                a
            } else {
                b
            }
        }
        Operator::Max => {
            if a.value >= b.value {
                a
            } else {
                b
            }
        }
        Operator::Comp => unreachable!("composition is handled in eval_dual"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Leaf(p) => f.write_str(p.name()),
            Expr::Node { op, left, right } => write!(f, "({op}:{left}:{right})"),
        }
    }
}

/// Syntax error with the byte offset it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {position}: {reason}")]
pub struct SyntaxError {
    pub position: usize,
    pub reason: String,
}

impl SyntaxError {
    fn new(position: usize, reason: impl Into<String>) -> SyntaxError {
        SyntaxError {
            position,
            reason: reason.into(),
        }
    }
}

/// Parse recursion limit; prevents stack exhaustion on adversarial input.
const MAX_NESTING: usize = 512;

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(c) if c == ch => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(SyntaxError::new(
                self.pos,
                format!("expected '{}', found '{}'", ch as char, c as char),
            )),
            None => Err(SyntaxError::new(
                self.pos,
                format!("expected '{}', found end of input", ch as char),
            )),
        }
    }

    fn parse_expr(&mut self, nesting: usize) -> Result<Expr, SyntaxError> {
        if nesting > MAX_NESTING {
            return Err(SyntaxError::new(self.pos, "expression nested too deeply"));
        }
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let op = self.parse_operator()?;
                self.expect(b':')?;
                let left = self.parse_expr(nesting + 1)?;
                match self.peek() {
                    Some(b':') => self.pos += 1,
                    Some(b')') => {
                        return Err(SyntaxError::new(
                            self.pos,
                            format!("operator '{op}' takes two operands, found only one"),
                        ))
                    }
                    _ => self.expect(b':')?,
                }
                let right = self.parse_expr(nesting + 1)?;
                self.expect(b')')?;
                Ok(Expr::node(op, left, right))
            }
            Some(_) => self.parse_primitive().map(Expr::Leaf),
            None => Err(SyntaxError::new(self.pos, "expected expression, found end of input")),
        }
    }

    fn parse_operator(&mut self) -> Result<Operator, SyntaxError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == b':' {
                break;
            }
            if c == b'(' || c == b')' || self.pos - start >= 4 {
                break;
            }
            self.pos += 1;
        }
        let token = std::str::from_utf8(&self.input[start..self.pos]).unwrap_or("");
        if token.is_empty() {
            return Err(SyntaxError::new(start, "expected operator"));
        }
        token
            .parse::<Operator>()
            .map_err(|()| SyntaxError::new(start, format!("unknown operator '{token}'")))
    }

    fn parse_primitive(&mut self) -> Result<Primitive, SyntaxError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            let c = self.input[start] as char;
            return Err(SyntaxError::new(
                start,
                format!("expected a primitive name or '(', found '{c}'"),
            ));
        }
        let token = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        token
            .parse::<Primitive>()
            .map_err(|()| SyntaxError::new(start, format!("unknown primitive '{token}'")))
    }
}

/// Parse the canonical prefix form. The whole input must be consumed.
pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
    let mut parser = Parser {
        input: text.as_bytes(),
        pos: 0,
    };
    let expr = parser.parse_expr(0)?;
    if parser.pos != parser.input.len() {
        return Err(SyntaxError::new(parser.pos, "trailing input after expression"));
    }
    Ok(expr)
}
