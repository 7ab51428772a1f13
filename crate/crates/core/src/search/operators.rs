//! Selection, variation and acceptance.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::expr::{BinaryOp, Expr, Op, OperatorSet, UnaryOp};

/// Attempts before a mutation or crossover gives up and returns its input.
pub const MAX_ATTEMPTS: usize = 10;

const ACCEPT_EPS: f64 = 1e-12;

/// Picks an index by tournament: `size` distinct members are drawn, ranked
/// by `fitness` (lower is better), and the k-th best wins with probability
/// `p (1 - p)^k`; the last ranked absorbs the remainder.
pub fn tournament_select<T, R: Rng + ?Sized>(
    population: &[T],
    fitness: impl Fn(&T) -> f64,
    rng: &mut R,
    size: usize,
    p: f64,
) -> usize {
    assert!(!population.is_empty(), "tournament on an empty population");
    let size = size.clamp(1, population.len());
    let mut picked = rand::seq::index::sample(rng, population.len(), size).into_vec();
    picked.sort_by(|&a, &b| {
        fitness(&population[a])
            .total_cmp(&fitness(&population[b]))
            .then(a.cmp(&b))
    });
    for &i in &picked[..picked.len() - 1] {
        if rng.random::<f64>() < p {
            return i;
        }
    }
    picked[picked.len() - 1]
}

/// Simulated-annealing style acceptance on relative loss change.
pub fn accept<R: Rng + ?Sized>(old_loss: f64, new_loss: f64, temperature: f64, rng: &mut R) -> bool {
    if new_loss.is_nan() {
        return false;
    }
    if new_loss <= old_loss {
        return true;
    }
    let scale = temperature * old_loss.max(ACCEPT_EPS);
    let prob = (-(new_loss - old_loss) / scale).exp();
    rng.random::<f64>() < prob
}

/// What the variation operators need to know about the search.
#[derive(Clone, Copy, Debug)]
pub struct Grammar<'a> {
    pub ops: &'a OperatorSet,
    pub n_features: usize,
    pub max_complexity: u32,
}

impl Grammar<'_> {
    fn admissible(&self, e: &Expr) -> bool {
        e.admissible_complexity(self.ops, self.max_complexity).is_some()
    }
}

pub fn random_constant<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_leaf<R: Rng + ?Sized>(rng: &mut R, n_features: usize) -> Expr {
    if n_features == 0 || rng.random::<bool>() {
        Expr::Const(random_constant(rng))
    } else {
        Expr::Var(rng.random_range(0..n_features))
    }
}

fn random_op<R: Rng + ?Sized>(rng: &mut R, ops: &OperatorSet) -> Op {
    let all = ops.operators();
    all[rng.random_range(0..all.len())].op
}

/// Grows a random tree of depth at most `max_depth`.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, g: &Grammar<'_>, max_depth: usize) -> Expr {
    for _ in 0..MAX_ATTEMPTS {
        let e = grow(rng, g, max_depth);
        if g.admissible(&e) {
            return e;
        }
    }
    random_leaf(rng, g.n_features)
}

fn grow<R: Rng + ?Sized>(rng: &mut R, g: &Grammar<'_>, depth: usize) -> Expr {
    if depth <= 1 || rng.random::<f64>() < 0.3 {
        return random_leaf(rng, g.n_features);
    }
    match random_op(rng, g.ops) {
        Op::Unary(u) => Expr::unary(u, grow(rng, g, depth - 1)),
        Op::Binary(b) => Expr::binary(b, grow(rng, g, depth - 1), grow(rng, g, depth - 1)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Swap an operator for another of the same arity, or a leaf for another leaf.
    Replace,
    /// Wrap a subtree in a new operator.
    Insert,
    /// Replace an operator subtree with a leaf.
    Delete,
    /// Scale a constant.
    Perturb,
}

const MUTATION_WEIGHTS: [(Mutation, f64); 4] = [
    (Mutation::Replace, 1.0),
    (Mutation::Insert, 2.0),
    (Mutation::Delete, 1.0),
    (Mutation::Perturb, 1.0),
];

fn choose_mutation<R: Rng + ?Sized>(rng: &mut R, expr: &Expr) -> Mutation {
    let has_const = expr.count_constants() > 0;
    let has_op = !expr.is_leaf();
    let usable = |m: Mutation| match m {
        Mutation::Perturb => has_const,
        Mutation::Delete => has_op,
        _ => true,
    };
    let total: f64 = MUTATION_WEIGHTS
        .iter()
        .filter(|(m, _)| usable(*m))
        .map(|(_, w)| w)
        .sum();
    let mut t = rng.random::<f64>() * total;
    for (m, w) in MUTATION_WEIGHTS.iter().filter(|(m, _)| usable(*m)) {
        if t < *w {
            return *m;
        }
        t -= w;
    }
    Mutation::Insert
}

/// Applies one random mutation. Results that break the complexity limit or
/// an argument constraint are retried; after [`MAX_ATTEMPTS`] the input
/// comes back unchanged.
pub fn mutate<R: Rng + ?Sized>(expr: &Expr, rng: &mut R, g: &Grammar<'_>) -> Expr {
    for _ in 0..MAX_ATTEMPTS {
        let kind = choose_mutation(rng, expr);
        if let Some(out) = apply_mutation(expr, kind, rng, g) {
            if g.admissible(&out) {
                return out;
            }
        }
    }
    expr.clone()
}

/// Applies a specific mutation without checking constraints. `None` when
/// the tree offers nothing to apply it to.
pub fn apply_mutation<R: Rng + ?Sized>(
    expr: &Expr,
    kind: Mutation,
    rng: &mut R,
    g: &Grammar<'_>,
) -> Option<Expr> {
    let mut out = expr.clone();
    match kind {
        Mutation::Replace => {
            let k = rng.random_range(0..out.size());
            let node = out.node_mut(k)?;
            replace_node(node, rng, g)?;
        }
        Mutation::Insert => {
            let k = rng.random_range(0..out.size());
            let node = out.node_mut(k)?;
            let sub = std::mem::replace(node, Expr::Const(0.0));
            *node = match random_op(rng, g.ops) {
                Op::Unary(u) => Expr::unary(u, sub),
                Op::Binary(b) => {
                    let leaf = match random_leaf(rng, g.n_features) {
                        Expr::Const(_) => Expr::Const(near_identity(b, rng)),
                        var => var,
                    };
                    if rng.random::<bool>() {
                        Expr::binary(b, sub, leaf)
                    } else {
                        Expr::binary(b, leaf, sub)
                    }
                }
            };
        }
        Mutation::Delete => {
            let internal = operator_positions(&out);
            if internal.is_empty() {
                return None;
            }
            let k = internal[rng.random_range(0..internal.len())];
            *out.node_mut(k)? = random_leaf(rng, g.n_features);
        }
        Mutation::Perturb => {
            let consts = constant_positions(&out);
            if consts.is_empty() {
                return None;
            }
            let k = consts[rng.random_range(0..consts.len())];
            if let Expr::Const(c) = out.node_mut(k)? {
                *c = perturb_constant(*c, rng);
            }
        }
    }
    Some(out)
}

/// A constant close to the identity of `op`, so the inserted node starts
/// out nearly neutral.
fn near_identity<R: Rng + ?Sized>(op: BinaryOp, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    match op {
        BinaryOp::Mul => 1.0 + 0.1 * z,
        BinaryOp::Add | BinaryOp::Sub => 0.1 * z,
    }
}

fn perturb_constant<R: Rng + ?Sized>(c: f64, rng: &mut R) -> f64 {
    loop {
        let next = if c == 0.0 {
            random_constant(rng)
        } else {
            let factor = 1.0 + rng.random::<f64>();
            let mut v = if rng.random::<bool>() { c * factor } else { c / factor };
            if rng.random::<f64>() < 0.05 {
                v = -v;
            }
            v
        };
        if next.is_finite() && next != c {
            return next;
        }
    }
}

fn replace_node<R: Rng + ?Sized>(node: &mut Expr, rng: &mut R, g: &Grammar<'_>) -> Option<()> {
    match node {
        Expr::Unary(op, _) => {
            let others: Vec<UnaryOp> = g.ops.unary().filter(|u| u != op).collect();
            if others.is_empty() {
                return None;
            }
            *op = others[rng.random_range(0..others.len())];
        }
        Expr::Binary(op, _, _) => {
            let others: Vec<BinaryOp> = g.ops.binary().filter(|b| b != op).collect();
            if others.is_empty() {
                return None;
            }
            *op = others[rng.random_range(0..others.len())];
        }
        leaf => {
            for _ in 0..MAX_ATTEMPTS {
                let fresh = random_leaf(rng, g.n_features);
                if fresh != *leaf {
                    *leaf = fresh;
                    return Some(());
                }
            }
            return None;
        }
    }
    Some(())
}

fn operator_positions(e: &Expr) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 0;
    e.visit(&mut |n| {
        if !n.is_leaf() {
            out.push(k);
        }
        k += 1;
    });
    out
}

fn constant_positions(e: &Expr) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 0;
    e.visit(&mut |n| {
        if matches!(n, Expr::Const(_)) {
            out.push(k);
        }
        k += 1;
    });
    out
}

/// Swaps uniformly chosen subtrees between `a` and `b`. Retries when a child
/// breaks a constraint and gives back the parents after [`MAX_ATTEMPTS`].
pub fn crossover<R: Rng + ?Sized>(a: &Expr, b: &Expr, rng: &mut R, g: &Grammar<'_>) -> (Expr, Expr) {
    for _ in 0..MAX_ATTEMPTS {
        let (x, y) = swap_subtrees(a, b, rng);
        if g.admissible(&x) && g.admissible(&y) {
            return (x, y);
        }
    }
    (a.clone(), b.clone())
}

fn swap_subtrees<R: Rng + ?Sized>(a: &Expr, b: &Expr, rng: &mut R) -> (Expr, Expr) {
    let mut x = a.clone();
    let mut y = b.clone();
    let i = rng.random_range(0..x.size());
    let j = rng.random_range(0..y.size());
    let sx = x.node_mut(i).expect("index within size");
    let sy = y.node_mut(j).expect("index within size");
    std::mem::swap(sx, sy);
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    #[test]
    fn tournament_degenerate_cases() {
        let mut r = rng();
        assert_eq!(tournament_select(&[7.0], |v| *v, &mut r, 2, 0.9), 0);
        let pop = [3.0, 1.0];
        for _ in 0..100 {
            assert_eq!(tournament_select(&pop, |v| *v, &mut r, 2, 1.0), 1);
        }
    }

    #[test]
    fn tournament_geometric_rule() {
        let mut r = rng();
        let pop = [3.0, 1.0];
        let trials = 100_000;
        let wins = (0..trials)
            .filter(|_| tournament_select(&pop, |v| *v, &mut r, 2, 0.9) == 1)
            .count();
        let rate = wins as f64 / trials as f64;
        assert!((rate - 0.9).abs() < 0.005, "{rate}");
    }

    #[test]
    fn acceptance() {
        let mut r = rng();
        assert!(accept(1.0, 0.5, 0.1, &mut r));
        assert!(!accept(1.0, f64::INFINITY, 0.1, &mut r));
        assert!(!accept(1.0, f64::NAN, 0.1, &mut r));
        let trials = 100_000;
        let n = (0..trials).filter(|_| accept(1.0, 1.1, 0.1, &mut r)).count();
        let rate = n as f64 / trials as f64;
        assert!((rate - (-1f64).exp()).abs() < 0.01, "{rate}");
    }

    #[test]
    fn perturbation_changes_the_constant() {
        let ops = OperatorSet::default();
        let g = Grammar { ops: &ops, n_features: 1, max_complexity: 25 };
        let mut r = rng();
        for _ in 0..1000 {
            match apply_mutation(&Expr::Const(2.0), Mutation::Perturb, &mut r, &g).unwrap() {
                Expr::Const(c) => assert!(c.is_finite() && c != 2.0),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn delete_replaces_an_operator_subtree_with_a_leaf() {
        let ops = OperatorSet::default();
        let g = Grammar { ops: &ops, n_features: 2, max_complexity: 25 };
        let e = parse("sin(x0) + x1").unwrap();
        let mut r = rng();
        for _ in 0..200 {
            let out = apply_mutation(&e, Mutation::Delete, &mut r, &g).unwrap();
            match &out {
                leaf if leaf.is_leaf() => {}
                Expr::Binary(BinaryOp::Add, a, b) => {
                    assert!(a.is_leaf(), "{out}");
                    assert_eq!(**b, Expr::var(1));
                }
                other => panic!("unexpected shape {other}"),
            }
        }
        assert!(apply_mutation(&Expr::var(0), Mutation::Delete, &mut r, &g).is_none());
    }

    #[test]
    fn leaf_crossover_swaps() {
        let ops = OperatorSet::default();
        let g = Grammar { ops: &ops, n_features: 2, max_complexity: 25 };
        let (a, b) = crossover(&Expr::var(0), &Expr::Const(2.0), &mut rng(), &g);
        assert_eq!(a, Expr::Const(2.0));
        assert_eq!(b, Expr::var(0));
    }

    #[test]
    fn crossover_conserves_leaf_multiset() {
        let ops = OperatorSet::default();
        let g = Grammar { ops: &ops, n_features: 3, max_complexity: 100 };
        let a = parse("sin(x0 * 2.5) + x1").unwrap();
        let b = parse("exp(x2) * (x0 + 0.5)").unwrap();
        let mut r = rng();
        let mut before: Vec<String> = [a.leaf_labels(), b.leaf_labels()].concat();
        before.sort();
        for _ in 0..500 {
            let (x, y) = crossover(&a, &b, &mut r, &g);
            let mut after = [x.leaf_labels(), y.leaf_labels()].concat();
            after.sort();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn random_trees_are_admissible() {
        let mut ops = OperatorSet::default();
        ops.set_arg_limit(Op::Unary(UnaryOp::Exp), Some(3)).unwrap();
        let g = Grammar { ops: &ops, n_features: 3, max_complexity: 12 };
        let mut r = rng();
        for _ in 0..2000 {
            let t = random_tree(&mut r, &g, 4);
            assert!(t.depth() <= 4);
            assert!(t.admissible_complexity(&ops, 12).is_some(), "{t}");
        }
    }
}
