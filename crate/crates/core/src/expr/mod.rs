//! A small expression language for scalar fields on a chart.
//!
//! Grammar (EBNF, whitespace between tokens is ignored):
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = primary [ "^" [ "-" ] integer ] ;
//! primary  = number | variable | function "(" expr ")" | "(" expr ")" ;
//! variable = ("x" | "u") integer ;          (* 1-based; u only on bundle charts *)
//! function = "exp" | "log" | "sin" | "cos" | "sqrt" | "tanh" ;
//! number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! `^` takes an integer literal exponent only; general powers are written
//! with `exp` and `log`.

mod eval;
mod parser;

use std::fmt;

pub use eval::{eval_f64, eval_jet, eval_on};
pub use parser::{parse, parse_bundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sqrt, Func::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Which coordinate family a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// Position coordinate `x_k`.
    X,
    /// Fibre coordinate `u_k` of a tangent-bundle chart.
    U,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    /// `index` is 1-based, as written.
    Var {
        kind: VarKind,
        index: usize,
    },
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

/// A parsed expression together with the chart it was checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    root: Node,
    /// Number of `x` coordinates.
    dim: usize,
    /// Whether `u` coordinates exist (then the chart has `2 * dim` variables).
    bundle: bool,
}

impl ExprAst {
    /// Wrap a node tree, validating every variable against the chart.
    pub fn new(root: Node, dim: usize, bundle: bool) -> crate::Result<ExprAst> {
        let ast = ExprAst { root, dim, bundle };
        ast.validate(&ast.root)?;
        Ok(ast)
    }

    fn validate(&self, node: &Node) -> crate::Result<()> {
        match node {
            Node::Var { kind, index } => {
                let ok = *index >= 1 && *index <= self.dim && (*kind == VarKind::X || self.bundle);
                if ok {
                    Ok(())
                } else {
                    Err(crate::Error::VariableOutOfRange {
                        name: var_name(*kind, *index),
                        offset: 0,
                        dim: self.dim,
                    })
                }
            }
            Node::Const(_) => Ok(()),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => self.validate(a),
            Node::Binary(_, a, b) => {
                self.validate(a)?;
                self.validate(b)
            }
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_bundle(&self) -> bool {
        self.bundle
    }

    /// Total number of chart variables (`dim`, or `2 * dim` on a bundle chart).
    pub fn arity(&self) -> usize {
        if self.bundle {
            2 * self.dim
        } else {
            self.dim
        }
    }

    /// Zero-based slot of a variable in the evaluation point.
    pub fn slot(&self, kind: VarKind, index: usize) -> usize {
        match kind {
            VarKind::X => index - 1,
            VarKind::U => self.dim + index - 1,
        }
    }
}

fn var_name(kind: VarKind, index: usize) -> String {
    match kind {
        VarKind::X => format!("x{index}"),
        VarKind::U => format!("u{index}"),
    }
}

// Binding strength used by the printer: larger binds tighter.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 4;

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Node::Neg(_) => PREC_UNARY,
        Node::Pow(..) => PREC_UNARY,
        Node::Const(_) | Node::Var { .. } | Node::Call(..) => PREC_ATOM,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node) -> fmt::Result {
    match node {
        Node::Const(c) => write!(f, "{c:?}"),
        Node::Var { kind, index } => f.write_str(&var_name(*kind, *index)),
        Node::Neg(a) => {
            f.write_str("-")?;
            write_child(f, a, precedence(a) < PREC_UNARY)
        }
        Node::Binary(op, a, b) => {
            let (prec, sym) = match op {
                BinOp::Add => (PREC_ADD, "+"),
                BinOp::Sub => (PREC_ADD, "-"),
                BinOp::Mul => (PREC_MUL, "*"),
                BinOp::Div => (PREC_MUL, "/"),
            };
            write_child(f, a, precedence(a) < prec)?;
            f.write_str(sym)?;
            // left associativity: an equal-precedence right operand needs parentheses
            write_child(f, b, precedence(b) <= prec)
        }
        Node::Pow(a, e) => {
            write_child(f, a, precedence(a) < PREC_ATOM)?;
            write!(f, "^{e}")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a)?;
            f.write_str(")")
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, node: &Node, parens: bool) -> fmt::Result {
    if parens {
        f.write_str("(")?;
        write_node(f, node)?;
        f.write_str(")")
    } else {
        write_node(f, node)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self)
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root)
    }
}
