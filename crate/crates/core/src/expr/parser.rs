use super::{BinOp, ExprAst, Func, Node, VarKind};
use crate::error::{Error, Result};

/// Parse an expression over `x1..x{dim}`.
pub fn parse(text: &str, dim: usize) -> Result<ExprAst> {
    parse_chart(text, dim, false)
}

/// Parse an expression over a tangent-bundle chart `(x1..x{dim}; u1..u{dim})`.
pub fn parse_bundle(text: &str, dim: usize) -> Result<ExprAst> {
    parse_chart(text, dim, true)
}

fn parse_chart(text: &str, dim: usize, bundle: bool) -> Result<ExprAst> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim,
        bundle,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let root = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    ExprAst::new(root, dim, bundle)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
    bundle: bool,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, message: &str) -> Error {
        let found = match self.peek() {
            Some(c) => format!("found `{}`", c as char),
            None => "found end of input".to_string(),
        };
        Error::Syntax {
            offset: self.pos,
            message: format!("{message}, {found}"),
        }
    }

    /// Consume `c` after optional whitespace.
    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinOp::Add
            } else if self.eat(b'-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinOp::Mul
            } else if self.eat(b'/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let negative = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer exponent"));
        }
        if matches!(self.peek(), Some(b'.' | b'e' | b'E')) {
            return Err(self.error("exponents must be integers"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let value: i32 = digits.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("exponent `{digits}` is too large"),
        })?;
        Ok(Node::Pow(Box::new(base), if negative { -value } else { value }))
    }

    fn primary(&mut self) -> Result<Node> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(self.error("expected a number, variable, function or `(`")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return Err(self.error("malformed number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return Err(self.error("malformed exponent in number"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        Ok(Node::Const(value))
    }

    fn identifier(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.error(&format!("expected `(` after `{name}`")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        let (kind, rest) = match name.as_bytes()[0] {
            b'x' => (VarKind::X, &name[1..]),
            b'u' => (VarKind::U, &name[1..]),
            _ => return Err(unknown(name, start)),
        };
        if rest.is_empty() || !rest.bytes().all(|c| c.is_ascii_digit()) || rest.starts_with('0') {
            return Err(unknown(name, start));
        }
        if kind == VarKind::U && !self.bundle {
            return Err(unknown(name, start));
        }
        let index: usize = rest.parse().map_err(|_| unknown(name, start))?;
        if index > self.dim {
            return Err(Error::VariableOutOfRange {
                name: name.to_string(),
                offset: start,
                dim: self.dim,
            });
        }
        Ok(Node::Var { kind, index })
    }
}

fn unknown(name: &str, offset: usize) -> Error {
    Error::UnknownIdentifier {
        name: name.to_string(),
        offset,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(index: usize) -> Box<Node> {
        Box::new(Node::Var {
            kind: VarKind::X,
            index,
        })
    }

    #[test]
    fn reciprocal_square() {
        let ast = parse("1/(x2^2)", 2).unwrap();
        assert_eq!(
            ast.root(),
            &Node::Binary(BinOp::Div, Box::new(Node::Const(1.0)), Box::new(Node::Pow(x(2), 2)))
        );
    }

    #[test]
    fn negated_log() {
        let ast = parse("-log(x3)", 3).unwrap();
        assert_eq!(ast.root(), &Node::Neg(Box::new(Node::Call(Func::Log, x(3)))));
    }

    #[test]
    fn malformed_operator_sequence() {
        assert_eq!(
            parse("x1+*x2", 2).unwrap_err(),
            Error::Syntax {
                offset: 3,
                message: "expected a number, variable, function or `(`, found `*`".into()
            }
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let ast = parse("x1-x2-x3*x1/x2", 3).unwrap();
        let expected = Node::Binary(
            BinOp::Sub,
            Box::new(Node::Binary(BinOp::Sub, x(1), x(2))),
            Box::new(Node::Binary(
                BinOp::Div,
                Box::new(Node::Binary(BinOp::Mul, x(3), x(1))),
                x(2),
            )),
        );
        assert_eq!(ast.root(), &expected);
        let neg_pow = parse("-x1^2", 1).unwrap();
        assert_eq!(neg_pow.root(), &Node::Neg(Box::new(Node::Pow(x(1), 2))));
    }

    #[test]
    fn identifier_errors() {
        assert!(matches!(
            parse("x4", 3),
            Err(Error::VariableOutOfRange { offset: 0, dim: 3, .. })
        ));
        assert!(matches!(
            parse("2*y1", 2),
            Err(Error::UnknownIdentifier { offset: 2, .. })
        ));
        assert!(matches!(parse("u1", 2), Err(Error::UnknownIdentifier { .. })));
        assert!(parse_bundle("u1*x2", 2).is_ok());
        assert!(matches!(parse("x0", 2), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse("x1^1.5", 1), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(parse("", 1), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("(x1", 1), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse("exp x1", 1), Err(Error::Syntax { .. })));
    }

    #[test]
    fn numbers_and_whitespace() {
        let ast = parse(" 2.5e-1 * x1 ", 1).unwrap();
        assert_eq!(ast.root(), &Node::Binary(BinOp::Mul, Box::new(Node::Const(0.25)), x(1)));
        assert_eq!(parse("x1^-2", 1).unwrap().root(), &Node::Pow(x(1), -2));
    }
}
