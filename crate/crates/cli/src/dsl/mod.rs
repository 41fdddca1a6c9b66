//! Expression language for metric entries, warps and fields.
//!
//! ```text
//! expr  = term { ("+" | "-") term } ;
//! term  = unary { ("*" | "/") unary } ;
//! unary = "-" unary | power ;
//! power = atom [ "^" unary ] ;
//! atom  = number | ident | func "(" expr ")" | "(" expr ")" ;
//! func  = "sin" | "cos" | "tan" | "sinh" | "cosh" | "tanh" | "exp" | "ln"
//!       | "sqrt" | "atan" | "artanh" | "arcsinh" | "abs" ;
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `x^-1` is allowed.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod program;

pub use ast::{derivative, BinOp, Expr, ExprKind, Func};
pub use parser::{parse_expr, parse_manifest_ast};
pub use program::{Program, Scalar};
