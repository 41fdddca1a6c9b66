use std::fmt;

use super::lexer::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn prec(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
    Atan,
    Artanh,
    Arcsinh,
    Abs,
}

pub const FUNCS: [Func; 13] = [
    Func::Sin,
    Func::Cos,
    Func::Tan,
    Func::Sinh,
    Func::Cosh,
    Func::Tanh,
    Func::Exp,
    Func::Ln,
    Func::Sqrt,
    Func::Atan,
    Func::Artanh,
    Func::Arcsinh,
    Func::Abs,
];

impl Func {
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
            Func::Atan => "atan",
            Func::Artanh => "artanh",
            Func::Arcsinh => "arcsinh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        FUNCS.iter().copied().find(|f| f.name() == name)
    }
}

/// Named constants usable in any expression.
pub const CONSTANTS: [(&str, f64); 1] = [("pi", std::f64::consts::PI)];

pub fn constant(name: &str) -> Option<f64> {
    CONSTANTS.iter().find(|(n, _)| *n == name).map(|c| c.1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Expression node with the source position of its first token. Equality
/// ignores positions.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind) -> Expr {
        Expr {
            kind,
            pos: Pos::default(),
        }
    }

    pub fn num(v: f64) -> Expr {
        Expr::new(ExprKind::Num(v))
    }

    pub fn var(name: &str) -> Expr {
        Expr::new(ExprKind::Var(name.to_string()))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self.kind {
            ExprKind::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Var(s) => Some(s),
            _ => None,
        }
    }

    /// Identifiers with their positions, in order of appearance.
    pub fn identifiers(&self) -> Vec<(&str, Pos)> {
        let mut out = Vec::new();
        self.walk_idents(&mut out);
        out
    }

    fn walk_idents<'a>(&'a self, out: &mut Vec<(&'a str, Pos)>) {
        match &self.kind {
            ExprKind::Num(_) => {}
            ExprKind::Var(s) => out.push((s, self.pos)),
            ExprKind::Neg(a) | ExprKind::Call(_, a) => a.walk_idents(out),
            ExprKind::Bin(_, a, b) => {
                a.walk_idents(out);
                b.walk_idents(out);
            }
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.identifiers().iter().any(|(s, _)| *s == var)
    }

    fn prec(&self) -> u8 {
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Var(_) | ExprKind::Call(..) => 5,
            ExprKind::Neg(_) => 3,
            ExprKind::Bin(op, ..) => op.prec(),
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.prec() < min;
        if paren {
            f.write_str("(")?;
        }
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v}")?,
            ExprKind::Var(s) => f.write_str(s)?,
            ExprKind::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(f, 3)?;
            }
            ExprKind::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_at(f, 0)?;
                f.write_str(")")?;
            }
            ExprKind::Bin(op, a, b) => {
                let p = op.prec();
                let (lmin, rmin) = match op {
                    BinOp::Pow => (5, 3),
                    _ => (p, p + 1),
                };
                a.fmt_at(f, lmin)?;
                if *op == BinOp::Pow {
                    f.write_str("^")?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                b.fmt_at(f, rmin)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::new(ExprKind::Bin(op, Box::new(a), Box::new(b)))
}

fn call(func: Func, a: Expr) -> Expr {
    Expr::new(ExprKind::Call(func, Box::new(a)))
}

fn is(e: &Expr, v: f64) -> bool {
    e.as_num() == Some(v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => bin(BinOp::Add, a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::num(x - y),
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), _) if x == 0.0 => neg(b),
        _ => bin(BinOp::Sub, a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is(&a, 0.0) || is(&b, 0.0) {
        return Expr::num(0.0);
    }
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => Expr::num(x * y),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => bin(BinOp::Mul, a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is(&a, 0.0) {
        return Expr::num(0.0);
    }
    if is(&b, 1.0) {
        return a;
    }
    bin(BinOp::Div, a, b)
}

fn neg(a: Expr) -> Expr {
    match a.as_num() {
        Some(0.0) => Expr::num(0.0),
        _ => Expr::new(ExprKind::Neg(Box::new(a))),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is(&b, 1.0) {
        return a;
    }
    if is(&b, 0.0) {
        return Expr::num(1.0);
    }
    bin(BinOp::Pow, a, b)
}

/// Symbolic partial derivative with light constant folding.
pub fn derivative(e: &Expr, var: &str) -> Expr {
    if !e.mentions(var) {
        return Expr::num(0.0);
    }
    match &e.kind {
        ExprKind::Num(_) => Expr::num(0.0),
        ExprKind::Var(s) => Expr::num(if s == var { 1.0 } else { 0.0 }),
        ExprKind::Neg(a) => neg(derivative(a, var)),
        ExprKind::Bin(op, a, b) => {
            let (da, db) = (derivative(a, var), derivative(b, var));
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                BinOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), pow(b, Expr::num(2.0))),
                BinOp::Pow if !b.mentions(var) => {
                    let lowered = match b.as_num() {
                        Some(n) => Expr::num(n - 1.0),
                        None => sub(b.clone(), Expr::num(1.0)),
                    };
                    mul(mul(b, pow(a, lowered)), da)
                }
                BinOp::Pow => {
                    let whole = pow(a.clone(), b.clone());
                    let inner = add(mul(db, call(Func::Ln, a.clone())), div(mul(b, da), a));
                    mul(whole, inner)
                }
            }
        }
        ExprKind::Call(func, a) => {
            let da = derivative(a, var);
            let a = (**a).clone();
            let outer = match func {
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Tan => div(Expr::num(1.0), pow(call(Func::Cos, a), Expr::num(2.0))),
                Func::Sinh => call(Func::Cosh, a),
                Func::Cosh => call(Func::Sinh, a),
                Func::Tanh => div(Expr::num(1.0), pow(call(Func::Cosh, a), Expr::num(2.0))),
                Func::Exp => call(Func::Exp, a),
                Func::Ln => div(Expr::num(1.0), a),
                Func::Sqrt => div(Expr::num(1.0), mul(Expr::num(2.0), call(Func::Sqrt, a))),
                Func::Atan => div(Expr::num(1.0), add(Expr::num(1.0), pow(a, Expr::num(2.0)))),
                Func::Artanh => div(Expr::num(1.0), sub(Expr::num(1.0), pow(a, Expr::num(2.0)))),
                Func::Arcsinh => div(
                    Expr::num(1.0),
                    call(Func::Sqrt, add(Expr::num(1.0), pow(a, Expr::num(2.0)))),
                ),
                Func::Abs => div(a.clone(), call(Func::Abs, a)),
            };
            mul(outer, da)
        }
    }
}
