use efsolve::expr::{BinOp, Expr, Func};
use efsolve::PotentialSpec;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![Just(Expr::Var), (-50.0f64..50.0).prop_map(Expr::Num), (0u32..8).prop_map(|k| Expr::Num(f64::from(k))),]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
        let func = prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Sqrt), Just(Func::Abs)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
            (func, inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

fn same(a: &Result<f64, impl std::fmt::Debug>, b: &Result<f64, impl std::fmt::Debug>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()),
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

proptest! {
    #[test]
    fn printed_expressions_reparse_to_the_same_function(e in expr(), rs in prop::collection::vec(0.0f64..100.0, 100)) {
        let printed = e.to_string();
        let reparsed = Expr::parse(&printed).unwrap();
        prop_assert_eq!(reparsed.to_string(), printed.clone());
        for r in rs {
            let (a, b) = (e.eval(r), reparsed.eval(r));
            prop_assert!(same(&a, &b), "{} at r = {}: {:?} vs {:?}", printed, r, a, b);
        }
    }

    #[test]
    fn potential_source_round_trips(e in expr(), r in 0.0f64..100.0) {
        let spec = PotentialSpec::parse(&e.to_string()).unwrap();
        let again = PotentialSpec::parse(&spec.source()).unwrap();
        prop_assert!(same(&spec.eval(r), &again.eval(r)));
    }
}
