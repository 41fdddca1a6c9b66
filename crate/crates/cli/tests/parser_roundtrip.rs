use conelab_cli::dsl::ast::FUNCS;
use conelab_cli::dsl::{parse_expr, BinOp, Expr, ExprKind, Program};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0f64..1e6).prop_map(Expr::num),
        (0u32..100).prop_map(|k| Expr::num(k as f64)),
        prop::sample::select(vec!["x", "y", "s", "r", "theta", "pi"]).prop_map(Expr::var),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let ops = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]);
        prop_oneof![
            inner.clone().prop_map(|a| Expr::new(ExprKind::Neg(Box::new(a)))),
            (prop::sample::select(FUNCS.to_vec()), inner.clone())
                .prop_map(|(f, a)| Expr::new(ExprKind::Call(f, Box::new(a)))),
            (ops, inner.clone(), inner).prop_map(|(op, a, b)| Expr::new(ExprKind::Bin(op, Box::new(a), Box::new(b)))),
        ]
    })
}

proptest! {
    #[test]
    fn printed_expressions_reparse_to_the_same_tree(e in expr()) {
        let text = e.to_string();
        let back = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "printed as {}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn reparsed_tree_evaluates_identically(e in expr(), x in -2.0f64..2.0, y in 0.1f64..2.0) {
        let vars: Vec<String> = ["x", "y", "s", "r", "theta"].iter().map(|v| v.to_string()).collect();
        let point = [x, y, x * y, y + 0.5, x - y];
        let a = Program::compile(&e, &vars).unwrap().eval(&point);
        let b = Program::compile(&parse_expr(&e.to_string()).unwrap(), &vars).unwrap().eval(&point);
        prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()), "{a} vs {b}");
    }
}
