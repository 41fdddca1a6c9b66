use std::ops::{Add, Div, Mul, Neg, Sub};

use conelab::metric_core::Jet;

use super::ast::{constant, BinOp, Expr, ExprKind, Func};
use crate::error::DslError;

/// Arithmetic shared by plain values and jets.
pub trait Scalar:
    Copy + From<f64> + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn apply(self, f: Func) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn pow(self, e: Self) -> Self;
}

impl Scalar for f64 {
    fn apply(self, f: Func) -> f64 {
        match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Tan => self.tan(),
            Func::Sinh => self.sinh(),
            Func::Cosh => self.cosh(),
            Func::Tanh => self.tanh(),
            Func::Exp => self.exp(),
            Func::Ln => self.ln(),
            Func::Sqrt => self.sqrt(),
            Func::Atan => self.atan(),
            Func::Artanh => self.atanh(),
            Func::Arcsinh => self.asinh(),
            Func::Abs => self.abs(),
        }
    }

    fn powi(self, k: i32) -> f64 {
        f64::powi(self, k)
    }

    fn powf(self, p: f64) -> f64 {
        f64::powf(self, p)
    }

    fn pow(self, e: f64) -> f64 {
        f64::powf(self, e)
    }
}

impl Scalar for Jet {
    fn apply(self, f: Func) -> Jet {
        match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Tan => self.tan(),
            Func::Sinh => self.sinh(),
            Func::Cosh => self.cosh(),
            Func::Tanh => self.tanh(),
            Func::Exp => self.exp(),
            Func::Ln => self.ln(),
            Func::Sqrt => self.sqrt(),
            Func::Atan => self.atan(),
            Func::Artanh => self.atanh(),
            Func::Arcsinh => self.asinh(),
            Func::Abs => self.abs(),
        }
    }

    fn powi(self, k: i32) -> Jet {
        Jet::powi(self, k)
    }

    fn powf(self, p: f64) -> Jet {
        Jet::powf(self, p)
    }

    fn pow(self, e: Jet) -> Jet {
        Jet::pow(self, e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    PowI(usize, i32),
    PowF(usize, f64),
    Pow(usize, usize),
    Call(Func, usize),
}

/// Expression flattened into an operation arena; slot `i` only refers to
/// earlier slots, and the result is the last slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    nvars: usize,
}

impl Program {
    /// Resolves identifiers against `vars` (then named constants) and folds
    /// constant subtrees.
    pub fn compile(expr: &Expr, vars: &[String]) -> Result<Program, DslError> {
        let mut ops = Vec::new();
        emit(expr, vars, &mut ops)?;
        Ok(Program { ops, nvars: vars.len() })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn constant_value(&self) -> Option<f64> {
        // the result slot is last; folded inputs stay behind as dead constants
        match self.ops.last() {
            Some(Op::Const(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let mut slots: Vec<T> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => T::from(c),
                Op::Var(i) => x[i],
                Op::Neg(a) => -slots[a],
                Op::Add(a, b) => slots[a] + slots[b],
                Op::Sub(a, b) => slots[a] - slots[b],
                Op::Mul(a, b) => slots[a] * slots[b],
                Op::Div(a, b) => slots[a] / slots[b],
                Op::PowI(a, k) => slots[a].powi(k),
                Op::PowF(a, p) => slots[a].powf(p),
                Op::Pow(a, b) => slots[a].pow(slots[b]),
                Op::Call(f, a) => slots[a].apply(f),
            };
            slots.push(v);
        }
        slots[slots.len() - 1]
    }
}

fn push(ops: &mut Vec<Op>, op: Op) -> usize {
    // fold operations whose inputs are all constants
    let c = |i: usize, ops: &Vec<Op>| match ops[i] {
        Op::Const(v) => Some(v),
        _ => None,
    };
    let folded = match op {
        Op::Neg(a) => c(a, ops).map(|v| -v),
        Op::Add(a, b) => c(a, ops).zip(c(b, ops)).map(|(x, y)| x + y),
        Op::Sub(a, b) => c(a, ops).zip(c(b, ops)).map(|(x, y)| x - y),
        Op::Mul(a, b) => c(a, ops).zip(c(b, ops)).map(|(x, y)| x * y),
        Op::Div(a, b) => c(a, ops).zip(c(b, ops)).map(|(x, y)| x / y),
        Op::PowI(a, k) => c(a, ops).map(|v| v.powi(k)),
        Op::PowF(a, p) => c(a, ops).map(|v| v.powf(p)),
        Op::Pow(a, b) => c(a, ops).zip(c(b, ops)).map(|(x, y)| x.powf(y)),
        Op::Call(f, a) => c(a, ops).map(|v| v.apply(f)),
        _ => None,
    };
    ops.push(folded.map(Op::Const).unwrap_or(op));
    ops.len() - 1
}

fn emit(e: &Expr, vars: &[String], ops: &mut Vec<Op>) -> Result<usize, DslError> {
    Ok(match &e.kind {
        ExprKind::Num(v) => push(ops, Op::Const(*v)),
        ExprKind::Var(name) => match vars.iter().position(|v| v == name) {
            Some(i) => push(ops, Op::Var(i)),
            None => match constant(name) {
                Some(v) => push(ops, Op::Const(v)),
                None => {
                    return Err(DslError::UnknownIdentifier {
                        name: name.clone(),
                        line: e.pos.line,
                        col: e.pos.col,
                    })
                }
            },
        },
        ExprKind::Neg(a) => {
            let a = emit(a, vars, ops)?;
            push(ops, Op::Neg(a))
        }
        ExprKind::Call(f, a) => {
            let a = emit(a, vars, ops)?;
            push(ops, Op::Call(*f, a))
        }
        ExprKind::Bin(op, a, b) => {
            let a = emit(a, vars, ops)?;
            let b = emit(b, vars, ops)?;
            match op {
                BinOp::Add => push(ops, Op::Add(a, b)),
                BinOp::Sub => push(ops, Op::Sub(a, b)),
                BinOp::Mul => push(ops, Op::Mul(a, b)),
                BinOp::Div => push(ops, Op::Div(a, b)),
                BinOp::Pow => match ops[b] {
                    Op::Const(k) if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 => push(ops, Op::PowI(a, k as i32)),
                    Op::Const(p) => push(ops, Op::PowF(a, p)),
                    _ => push(ops, Op::Pow(a, b)),
                },
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::ast::derivative;
    use crate::dsl::parser::parse_expr;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn real_and_jet_values_agree() {
        let e = parse_expr("exp(-2*s) * sin(x)^2 + artanh(x/3) - abs(s)^1.5").unwrap();
        let p = Program::compile(&e, &vars(&["s", "x"])).unwrap();
        let x = [0.4, -1.1];
        let real = p.eval(&x);
        let jets = p.eval(&Jet::seed(&x, 2));
        assert_eq!(real, jets.value());
        let expect = (-0.8f64).exp() * (-1.1f64).sin().powi(2) + (-1.1f64 / 3.0).atanh() - 0.4f64.powf(1.5);
        assert!((real - expect).abs() < 1e-15);
    }

    #[test]
    fn constants_fold() {
        let e = parse_expr("2 * pi / 4").unwrap();
        let p = Program::compile(&e, &[]).unwrap();
        assert_eq!(p.constant_value(), Some(std::f64::consts::FRAC_PI_2));
    }

    #[test]
    fn negative_base_integer_power() {
        let e = parse_expr("x^-2").unwrap();
        let p = Program::compile(&e, &vars(&["x"])).unwrap();
        assert!((p.eval(&[-2.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unknown_identifier_has_position() {
        let e = parse_expr("1 + y").unwrap();
        let err = Program::compile(&e, &vars(&["x"])).unwrap_err();
        assert!(matches!(err, DslError::UnknownIdentifier { line: 1, col: 5, .. }));
    }

    #[test]
    fn symbolic_derivatives_match_jets() {
        let cases = [
            "sin(x) * cosh(y)",
            "exp(-2*x) / (1 + y^2)",
            "sqrt(2 + x^2) - ln(3 + y)",
            "tan(x) + tanh(y) * atan(x)",
            "arcsinh(x*y) + artanh(x/4)",
            "x^y",
            "abs(x - 5) * x^3",
        ];
        let names = vars(&["x", "y"]);
        let pt = [0.7, 1.3];
        for text in cases {
            let e = parse_expr(text).unwrap();
            let j = Program::compile(&e, &names).unwrap().eval(&Jet::seed(&pt, 1));
            for (i, v) in names.iter().enumerate() {
                let d = Program::compile(&derivative(&e, v), &names).unwrap().eval(&pt);
                assert!((d - j.d(i)).abs() < 1e-12, "{text} d/d{v}: {d} vs {}", j.d(i));
            }
        }
    }
}
