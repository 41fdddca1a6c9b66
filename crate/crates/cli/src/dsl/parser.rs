use super::ast::{BinOp, Expr, ExprKind, Func};
use super::lexer::{tokenize, Pos, Tok, Token};
use crate::error::DslError;

#[derive(Debug, Clone, PartialEq)]
pub struct CoordDecl {
    pub name: String,
    pub lo: Option<Expr>,
    pub hi: Option<Expr>,
    pub pos: Pos,
}

/// `key = value` inside a construction or check call.
#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub key: String,
    pub value: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub name: String,
    pub args: Vec<Arg>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Named<T> {
    pub name: String,
    pub value: T,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ManifestAst {
    pub coordinates: Vec<CoordDecl>,
    pub metric: Vec<Vec<Expr>>,
    pub metric_pos: Pos,
    pub constructions: Vec<Call>,
    pub fields: Vec<Named<Vec<Expr>>>,
    pub scalars: Vec<Named<Expr>>,
    pub checks: Vec<Call>,
    pub seed: Option<u64>,
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> DslError {
        let t = self.peek();
        DslError::Parse {
            line: t.pos.line,
            col: t.pos.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<Pos, DslError> {
        let pos = self.peek().pos;
        if self.eat_sym(c) {
            Ok(pos)
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), DslError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn end_of_statement(&mut self) -> Result<(), DslError> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.error(&["end of line"])),
        }
    }

    // expr = term { ("+" | "-") term }
    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let pos = lhs.pos;
            lhs = Expr {
                kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    // term = unary { ("*" | "/") unary }
    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let pos = lhs.pos;
            lhs = Expr {
                kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    // unary = "-" unary | power
    fn unary(&mut self) -> Result<Expr, DslError> {
        let pos = self.peek().pos;
        if self.eat_sym('-') {
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                pos,
            });
        }
        self.power()
    }

    // power = atom [ "^" unary ]
    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if self.eat_sym('^') {
            let exp = self.unary()?;
            let pos = base.pos;
            return Ok(Expr {
                kind: ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)),
                pos,
            });
        }
        Ok(base)
    }

    // atom = number | ident | ident "(" expr ")" | "(" expr ")"
    fn atom(&mut self) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Num(v),
                    pos: t.pos,
                })
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek().tok == Tok::Sym('(') {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(DslError::UnknownIdentifier {
                            name,
                            line: t.pos.line,
                            col: t.pos.col,
                        });
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    return Ok(Expr {
                        kind: ExprKind::Call(func, Box::new(arg)),
                        pos: t.pos,
                    });
                }
                Ok(Expr {
                    kind: ExprKind::Var(name),
                    pos: t.pos,
                })
            }
            Tok::Sym('(') => {
                self.bump();
                let mut inner = self.expr()?;
                self.expect_sym(')')?;
                inner.pos = t.pos;
                Ok(inner)
            }
            _ => Err(self.error(&["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, DslError>) -> Result<Vec<T>, DslError> {
        self.expect_sym('[')?;
        let mut out = Vec::new();
        if self.eat_sym(']') {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym(']') {
                return Ok(out);
            }
            if !self.eat_sym(',') {
                return Err(self.error(&["`,`", "`]`"]));
            }
        }
    }

    fn call(&mut self) -> Result<Call, DslError> {
        let (name, pos) = self.ident()?;
        let mut args = Vec::new();
        if self.eat_sym('(') && !self.eat_sym(')') {
            loop {
                let (key, kpos) = self.ident()?;
                self.expect_sym('=')?;
                let value = self.expr()?;
                args.push(Arg { key, value, pos: kpos });
                if self.eat_sym(')') {
                    break;
                }
                if !self.eat_sym(',') {
                    return Err(self.error(&["`,`", "`)`"]));
                }
            }
        }
        Ok(Call { name, args, pos })
    }

    fn coord(&mut self) -> Result<CoordDecl, DslError> {
        let (name, pos) = self.ident()?;
        let (mut lo, mut hi) = (None, None);
        if self.peek().tok == Tok::Ident("in".into()) {
            self.bump();
            self.expect_sym('(')?;
            lo = Some(self.expr()?);
            self.expect_sym(',')?;
            hi = Some(self.expr()?);
            self.expect_sym(')')?;
        }
        Ok(CoordDecl { name, lo, hi, pos })
    }

    fn statement(&mut self, m: &mut ManifestAst) -> Result<(), DslError> {
        let (key, pos) = self.ident()?;
        match key.as_str() {
            "coordinates" => {
                self.expect_sym('=')?;
                m.coordinates = self.list(|p| p.coord())?;
            }
            "metric" => {
                self.expect_sym('=')?;
                m.metric_pos = self.peek().pos;
                m.metric = self.list(|p| p.list(|q| q.expr()))?;
            }
            "construct" => {
                self.expect_sym('=')?;
                m.constructions.push(self.call()?);
            }
            "field" => {
                let (name, _) = self.ident()?;
                self.expect_sym('=')?;
                let value = self.list(|p| p.expr())?;
                m.fields.push(Named { name, value, pos });
            }
            "scalar" => {
                let (name, _) = self.ident()?;
                self.expect_sym('=')?;
                let value = self.expr()?;
                m.scalars.push(Named { name, value, pos });
            }
            "check" => {
                m.checks.push(self.call()?);
            }
            "seed" => {
                self.expect_sym('=')?;
                match self.peek().tok {
                    Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 => {
                        self.bump();
                        m.seed = Some(v as u64);
                    }
                    _ => return Err(self.error(&["non-negative integer"])),
                }
            }
            _ => {
                self.at -= 1;
                return Err(self.error(&[
                    "`coordinates`",
                    "`metric`",
                    "`construct`",
                    "`field`",
                    "`scalar`",
                    "`check`",
                    "`seed`",
                ]));
            }
        }
        self.end_of_statement()
    }
}

/// Parses a single expression, the whole input.
pub fn parse_expr(text: &str) -> Result<Expr, DslError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let e = p.expr()?;
    while p.peek().tok == Tok::Newline {
        p.bump();
    }
    if p.peek().tok != Tok::Eof {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

/// Parses manifest text into its syntax tree without resolving identifiers.
pub fn parse_manifest_ast(text: &str) -> Result<ManifestAst, DslError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let mut m = ManifestAst::default();
    loop {
        match p.peek().tok {
            Tok::Eof => return Ok(m),
            Tok::Newline => {
                p.bump();
            }
            _ => p.statement(&mut m)?,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("1 + 2 * x ^ 2 ^ 3").unwrap();
        assert_eq!(e.to_string(), "1 + 2 * x^2^3");
        let e = parse_expr("-x^2").unwrap();
        assert!(matches!(e.kind, ExprKind::Neg(_)));
        let e = parse_expr("(1 - x) - (2 - y)").unwrap();
        assert_eq!(e.to_string(), "1 - x - (2 - y)");
        let e = parse_expr("x^-2").unwrap();
        assert_eq!(e.to_string(), "x^-2");
    }

    #[test]
    fn parse_error_positions() {
        let err = parse_expr("1 + * 2").unwrap_err();
        match err {
            DslError::Parse { line, col, expected, found } => {
                assert_eq!((line, col), (1, 5));
                assert!(expected.contains(&"number".to_string()));
                assert_eq!(found, "`*`");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_function() {
        let err = parse_expr("foo(x)").unwrap_err();
        assert!(matches!(err, DslError::UnknownIdentifier { ref name, .. } if name == "foo"));
    }

    #[test]
    fn statements() {
        let m = parse_manifest_ast(
            "coordinates = [s, x in (0, 2*pi)]\nmetric = [[1,0],[0,cosh(s)^2]]\nconstruct = cone(eps = -1)\ncheck flatness(samples = 10)\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(m.coordinates.len(), 2);
        assert_eq!(m.metric[1][1].to_string(), "cosh(s)^2");
        assert_eq!(m.constructions[0].args[0].key, "eps");
        assert_eq!(m.checks[0].name, "flatness");
        assert_eq!(m.seed, Some(7));
    }
}
