//! Algebraic clean-up applied between evolution rounds.
//!
//! Rewrites: constant folding, like-term collection in `+` chains
//! (`x + x + x` to `3 * x`), merging of constants inside `+` and `*` chains,
//! `e * 1`, `e + 0`, `e * 0`, `e - e` and `inv(inv(e))`. No rewrite adds
//! nodes, so unit-weight complexity never increases. Results agree with the
//! input wherever both evaluate to finite values.

use super::{BinaryOp, Expr, UnaryOp};

const MAX_PASSES: usize = 16;

pub fn simplify(expr: &Expr) -> Expr {
    let mut current = pass(expr);
    for _ in 1..MAX_PASSES {
        let next = pass(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn pass(expr: &Expr) -> Expr {
    match expr {
        Expr::Const(_) | Expr::Var(_) => expr.clone(),
        Expr::Unary(op, a) => unary(*op, pass(a)),
        Expr::Binary(BinaryOp::Add, a, b) => {
            let mut terms = Vec::new();
            flatten(BinaryOp::Add, pass(a), &mut terms);
            flatten(BinaryOp::Add, pass(b), &mut terms);
            sum(terms)
        }
        Expr::Binary(BinaryOp::Mul, a, b) => {
            let mut factors = Vec::new();
            flatten(BinaryOp::Mul, pass(a), &mut factors);
            flatten(BinaryOp::Mul, pass(b), &mut factors);
            product(factors)
        }
        Expr::Binary(BinaryOp::Sub, a, b) => {
            let (a, b) = (pass(a), pass(b));
            match (&a, &b) {
                (Expr::Const(x), Expr::Const(y)) if (x - y).is_finite() => Expr::Const(x - y),
                (_, Expr::Const(y)) if *y == 0.0 => a,
                _ if a == b => Expr::Const(0.0),
                _ => Expr::sub(a, b),
            }
        }
    }
}

fn unary(op: UnaryOp, arg: Expr) -> Expr {
    match (op, arg) {
        (_, Expr::Const(c)) if op.apply(c).is_finite() => Expr::Const(op.apply(c)),
        (UnaryOp::Inv, Expr::Unary(UnaryOp::Inv, inner)) => *inner,
        (op, arg) => Expr::unary(op, arg),
    }
}

fn flatten(op: BinaryOp, e: Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Binary(o, a, b) if o == op => {
            flatten(op, *a, out);
            flatten(op, *b, out);
        }
        other => out.push(other),
    }
}

/// Splits `c * base` into its coefficient and base.
fn coefficient(term: Expr) -> (f64, Expr) {
    match term {
        Expr::Binary(BinaryOp::Mul, a, b) => match (*a, *b) {
            (Expr::Const(c), base) | (base, Expr::Const(c)) => (c, base),
            (a, b) => (1.0, Expr::mul(a, b)),
        },
        other => (1.0, other),
    }
}

enum Slot {
    Constant,
    Group(usize),
}

fn sum(terms: Vec<Expr>) -> Expr {
    let constant_total: f64 = terms
        .iter()
        .filter_map(|t| match t {
            Expr::Const(c) => Some(*c),
            _ => None,
        })
        .sum();
    if !constant_total.is_finite() {
        return chain(BinaryOp::Add, terms);
    }

    let original = terms.clone();
    let mut slots = Vec::new();
    let mut groups: Vec<(f64, Expr)> = Vec::new();
    let mut seen_constant = false;
    for term in terms {
        if let Expr::Const(_) = term {
            if !seen_constant {
                seen_constant = true;
                slots.push(Slot::Constant);
            }
            continue;
        }
        let (c, base) = coefficient(term);
        match groups.iter().position(|(_, b)| *b == base) {
            Some(i) => groups[i].0 += c,
            None => {
                slots.push(Slot::Group(groups.len()));
                groups.push((c, base));
            }
        }
    }

    if groups.iter().any(|(c, _)| !c.is_finite()) {
        return chain(BinaryOp::Add, original);
    }
    let mut groups: Vec<Option<(f64, Expr)>> = groups.into_iter().map(Some).collect();
    let mut pieces = Vec::new();
    for slot in slots {
        match slot {
            Slot::Constant => {
                if constant_total != 0.0 {
                    pieces.push(Expr::Const(constant_total));
                }
            }
            Slot::Group(i) => {
                let (c, base) = groups[i].take().expect("each group has one slot");
                if c == 1.0 {
                    pieces.push(base);
                } else if c != 0.0 {
                    pieces.push(Expr::mul(Expr::Const(c), base));
                }
            }
        }
    }
    if pieces.is_empty() {
        return Expr::Const(0.0);
    }
    chain(BinaryOp::Add, pieces)
}

fn product(factors: Vec<Expr>) -> Expr {
    let constant_total: f64 = factors
        .iter()
        .filter_map(|t| match t {
            Expr::Const(c) => Some(*c),
            _ => None,
        })
        .product();
    if !constant_total.is_finite() {
        return chain(BinaryOp::Mul, factors);
    }
    if constant_total == 0.0 {
        return Expr::Const(0.0);
    }
    let rest: Vec<Expr> = factors
        .into_iter()
        .filter(|f| !matches!(f, Expr::Const(_)))
        .collect();
    if rest.is_empty() {
        return Expr::Const(constant_total);
    }
    let body = chain(BinaryOp::Mul, rest);
    if constant_total == 1.0 {
        body
    } else {
        Expr::mul(Expr::Const(constant_total), body)
    }
}

/// Left-associated chain of `op` over `items`, which must be nonempty.
fn chain(op: BinaryOp, items: Vec<Expr>) -> Expr {
    let mut it = items.into_iter();
    let first = it.next().expect("chain of at least one item");
    it.fold(first, |acc, e| Expr::binary(op, acc, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, OperatorSet};

    fn s(text: &str) -> Expr {
        simplify(&parse(text).unwrap())
    }

    #[test]
    fn collects_like_terms() {
        let out = s("x0 + x0 + x0");
        assert_eq!(out, Expr::mul(Expr::Const(3.0), Expr::var(0)));
        let ops = OperatorSet::all_unit();
        assert_eq!(out.complexity(&ops).unwrap(), 3);
    }

    #[test]
    fn folds_constants() {
        assert_eq!(s("(2.0 * 3.0) + x1"), Expr::add(Expr::Const(6.0), Expr::var(1)));
        assert_eq!(s("sin(0) + x1"), Expr::var(1));
    }

    #[test]
    fn removes_double_inverse() {
        assert_eq!(s("inv(inv(x0 + 1.0))"), parse("x0 + 1.0").unwrap());
    }

    #[test]
    fn identities() {
        assert_eq!(s("x0 * 1"), Expr::var(0));
        assert_eq!(s("x0 + 0"), Expr::var(0));
        assert_eq!(s("sin(x0) * 0"), Expr::Const(0.0));
        assert_eq!(s("sin(x0) - sin(x0)"), Expr::Const(0.0));
        assert_eq!(s("(2 * x0) * 3"), parse("6 * x0").unwrap());
        assert_eq!(s("(x0 + 1) + 2"), parse("x0 + 3").unwrap());
        assert_eq!(s("(2 * x0) + (-2 * x0) + x1"), Expr::var(1));
    }

    #[test]
    fn leaves_overflowing_constants_alone() {
        let e = parse("exp(1000) + x0").unwrap();
        assert_eq!(simplify(&e), e);
    }
}
