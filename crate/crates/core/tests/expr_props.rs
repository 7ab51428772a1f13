use proptest::prelude::*;
use symdistill::expr::{
    eval_batch, parse, parse_with_names, render, render_with_names, simplify, BinaryOp, Expr, OperatorSet,
    UnaryOp,
};
use symdistill::Matrix;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0usize..4).prop_map(Expr::Var),
        prop::num::f64::NORMAL.prop_map(Expr::Const),
        (-1000i32..1000).prop_map(|k| Expr::Const(k as f64 / 8.0)),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(8, 64, 2, |inner| {
        prop_oneof![
            (prop::sample::select(UnaryOp::ALL.to_vec()), inner.clone())
                .prop_map(|(op, a)| Expr::unary(op, a)),
            (
                prop::sample::select(vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
        ]
    })
}

/// Trees with small constants, where reassociation error stays tiny.
fn tame_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0usize..2).prop_map(Expr::Var),
        (-8i32..=8).prop_map(|k| Expr::Const(k as f64 / 4.0)),
    ];
    leaf.prop_recursive(5, 24, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec![UnaryOp::Inv, UnaryOp::Sin, UnaryOp::Square]), inner.clone())
                .prop_map(|(op, a)| Expr::unary(op, a)),
            (
                prop::sample::select(vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
        ]
    })
}

fn grid() -> Matrix {
    let mut rows = Vec::new();
    for i in 0..7 {
        for j in 0..7 {
            rows.push([-1.3 + 0.45 * i as f64, 0.7 - 0.31 * j as f64]);
        }
    }
    Matrix::from_rows(&rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn parse_inverts_render(e in tree()) {
        prop_assume!(e.depth() <= 8);
        let text = render(&e);
        prop_assert_eq!(parse(&text).unwrap(), e, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn parse_inverts_render_with_names(e in tree()) {
        let names = ["dx", "dy", "r", "m2"];
        let text = render_with_names(&e, &names);
        prop_assert_eq!(parse_with_names(&text, &names).unwrap(), e);
    }

    #[test]
    fn simplify_keeps_values_and_never_grows(e in tame_tree()) {
        let ops = OperatorSet::all_unit();
        let s = simplify(&e);
        prop_assert!(s.complexity(&ops).unwrap() <= e.complexity(&ops).unwrap(), "{} -> {}", render(&e), render(&s));
        let x = grid();
        let before = eval_batch(&e, &x).unwrap();
        let after = eval_batch(&s, &x).unwrap();
        for (a, b) in before.iter().zip(&after) {
            if a.is_finite() && b.is_finite() {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {} for {} -> {}", a, b, render(&e), render(&s));
            }
        }
    }

    #[test]
    fn simplify_is_idempotent_in_size(e in tame_tree()) {
        let ops = OperatorSet::all_unit();
        let once = simplify(&e);
        let twice = simplify(&once);
        prop_assert!(twice.complexity(&ops).unwrap() <= once.complexity(&ops).unwrap());
    }

    #[test]
    fn nan_rows_stay_local(e in tame_tree()) {
        let mut x = grid();
        let clean = eval_batch(&e, &x).unwrap();
        x.set(3, 0, f64::NAN);
        let dirty = eval_batch(&e, &x).unwrap();
        for (i, (a, b)) in clean.iter().zip(&dirty).enumerate() {
            if i != 3 {
                prop_assert!(a.to_bits() == b.to_bits() || a.is_nan() && b.is_nan());
            }
        }
    }
}

#[test]
fn eval_is_bitwise_repeatable() {
    let e = parse("(exp((-1.9739 * x1)) * sin((3.1416 * x0)))").unwrap();
    let x = grid();
    let a = eval_batch(&e, &x).unwrap();
    let b = eval_batch(&e, &x).unwrap();
    assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
}
