//! Expression trees: representation, operator sets and complexity accounting.
//!
//! Trees are plain owned enums. Evaluation lives in [`eval`], rewriting in
//! [`simplify`](mod@simplify) and the text form in [`grammar`].

pub mod eval;
pub mod grammar;
pub mod simplify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eval::{eval_batch, eval_columns, eval_point};
pub use grammar::{parse, parse_with_names, render, render_with_names};
pub use simplify::simplify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Inv,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 7] = [
        UnaryOp::Inv,
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Sqrt,
        UnaryOp::Square,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Inv => "inv",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Square => "square",
        }
    }

    /// Raw IEEE result; callers map non-finite values to the NaN sentinel.
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Inv => 1.0 / x,
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Log => {
                if x > 0.0 {
                    x.ln()
                } else {
                    f64::NAN
                }
            }
            UnaryOp::Sqrt => x.sqrt(),
            UnaryOp::Square => x * x,
        }
    }
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 3] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul];

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
        }
    }

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
        }
    }
}

/// An operator symbol, unary or binary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Op {
    Unary(UnaryOp),
    Binary(BinaryOp),
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Unary(_) => 1,
            Op::Binary(_) => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Unary(u) => u.name(),
            Op::Binary(b) => b.symbol(),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(b) = BinaryOp::ALL.iter().find(|b| b.symbol() == s) {
            return Ok(Op::Binary(*b));
        }
        match s {
            "add" | "plus" => return Ok(Op::Binary(BinaryOp::Add)),
            "sub" | "minus" => return Ok(Op::Binary(BinaryOp::Sub)),
            "mul" | "mult" | "times" => return Ok(Op::Binary(BinaryOp::Mul)),
            _ => {}
        }
        UnaryOp::ALL
            .iter()
            .find(|u| u.name() == s)
            .map(|u| Op::Unary(*u))
            .ok_or_else(|| Error::UnknownOperator(s.to_string()))
    }
}

impl From<Op> for String {
    fn from(op: Op) -> String {
        op.name().to_string()
    }
}

impl TryFrom<String> for Op {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// An operator together with its search-time cost and argument constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operator {
    pub op: Op,
    pub complexity: u32,
    /// Maximum complexity allowed for any argument subtree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg_limit: Option<u32>,
}

impl Operator {
    pub fn new(op: Op) -> Self {
        Operator {
            op,
            complexity: 1,
            arg_limit: None,
        }
    }

    pub fn with_complexity(mut self, complexity: u32) -> Self {
        self.complexity = complexity;
        self
    }

    pub fn with_arg_limit(mut self, limit: u32) -> Self {
        self.arg_limit = Some(limit);
        self
    }

    /// Default cost for an operator: 3 for `sin` and `exp`, 1 otherwise.
    pub fn default_for(op: Op) -> Self {
        let complexity = match op {
            Op::Unary(UnaryOp::Sin) | Op::Unary(UnaryOp::Exp) => 3,
            _ => 1,
        };
        Operator::new(op).with_complexity(complexity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Operator>", into = "Vec<Operator>")]
pub struct OperatorSet {
    operators: Vec<Operator>,
}

impl OperatorSet {
    pub fn new(operators: Vec<Operator>) -> Result<Self> {
        for (i, a) in operators.iter().enumerate() {
            if a.complexity == 0 {
                return Err(Error::Config(format!(
                    "operator `{}` has zero complexity",
                    a.op
                )));
            }
            if a.arg_limit == Some(0) {
                return Err(Error::Config(format!(
                    "operator `{}` has a zero argument limit",
                    a.op
                )));
            }
            if operators[..i].iter().any(|b| b.op == a.op) {
                return Err(Error::Config(format!("duplicate operator `{}`", a.op)));
            }
        }
        if !operators.iter().any(|o| o.op.arity() == 2) {
            return Err(Error::Config(
                "operator set needs at least one binary operator".into(),
            ));
        }
        Ok(OperatorSet { operators })
    }

    /// Builds a set from operator names using the default per-operator costs.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let ops = names
            .iter()
            .map(|n| n.as_ref().parse().map(Operator::default_for))
            .collect::<Result<Vec<_>>>()?;
        OperatorSet::new(ops)
    }

    /// Same operators, every node costing 1.
    pub fn unit<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let ops = names
            .iter()
            .map(|n| n.as_ref().parse().map(Operator::new))
            .collect::<Result<Vec<_>>>()?;
        OperatorSet::new(ops)
    }

    /// Every supported operator with unit cost. Handy for parsing and rendering.
    pub fn all_unit() -> Self {
        let mut ops: Vec<Operator> = BinaryOp::ALL
            .iter()
            .map(|b| Operator::new(Op::Binary(*b)))
            .collect();
        ops.extend(UnaryOp::ALL.iter().map(|u| Operator::new(Op::Unary(*u))));
        OperatorSet { operators: ops }
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn get(&self, op: Op) -> Option<&Operator> {
        self.operators.iter().find(|o| o.op == op)
    }

    pub fn contains(&self, op: Op) -> bool {
        self.get(op).is_some()
    }

    pub fn unary(&self) -> impl Iterator<Item = UnaryOp> + '_ {
        self.operators.iter().filter_map(|o| match o.op {
            Op::Unary(u) => Some(u),
            Op::Binary(_) => None,
        })
    }

    pub fn binary(&self) -> impl Iterator<Item = BinaryOp> + '_ {
        self.operators.iter().filter_map(|o| match o.op {
            Op::Binary(b) => Some(b),
            Op::Unary(_) => None,
        })
    }

    /// Sets the argument-complexity limit of `op`, which must be in the set.
    pub fn set_arg_limit(&mut self, op: Op, limit: Option<u32>) -> Result<()> {
        let entry = self
            .operators
            .iter_mut()
            .find(|o| o.op == op)
            .ok_or_else(|| Error::UnknownOperator(op.to_string()))?;
        if limit == Some(0) {
            return Err(Error::Config(format!("operator `{op}` has a zero argument limit")));
        }
        entry.arg_limit = limit;
        Ok(())
    }

    pub fn set_complexity(&mut self, op: Op, complexity: u32) -> Result<()> {
        if complexity == 0 {
            return Err(Error::Config(format!("operator `{op}` has zero complexity")));
        }
        let entry = self
            .operators
            .iter_mut()
            .find(|o| o.op == op)
            .ok_or_else(|| Error::UnknownOperator(op.to_string()))?;
        entry.complexity = complexity;
        Ok(())
    }
}

impl Default for OperatorSet {
    /// `+`, `*`, `inv`, `sin`, `exp` with `sin` and `exp` costing 3.
    fn default() -> Self {
        OperatorSet::from_names(&["+", "*", "inv", "sin", "exp"]).expect("valid default operators")
    }
}

impl TryFrom<Vec<Operator>> for OperatorSet {
    type Error = Error;

    fn try_from(ops: Vec<Operator>) -> Result<Self> {
        OperatorSet::new(ops)
    }
}

impl From<OperatorSet> for Vec<Operator> {
    fn from(set: OperatorSet) -> Self {
        set.operators
    }
}

/// An expression tree over dataset columns.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 0-based input column.
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const(value)
    }

    pub fn var(index: usize) -> Self {
        Expr::Var(index)
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Self {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn add(lhs: Expr, rhs: Expr) -> Self {
        Expr::binary(BinaryOp::Add, lhs, rhs)
    }

    pub fn sub(lhs: Expr, rhs: Expr) -> Self {
        Expr::binary(BinaryOp::Sub, lhs, rhs)
    }

    pub fn mul(lhs: Expr, rhs: Expr) -> Self {
        Expr::binary(BinaryOp::Mul, lhs, rhs)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Const(_) | Expr::Var(_))
    }

    pub fn op(&self) -> Option<Op> {
        match self {
            Expr::Unary(u, _) => Some(Op::Unary(*u)),
            Expr::Binary(b, _, _) => Some(Op::Binary(*b)),
            _ => None,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Weighted node count: each operator node costs its configured
    /// complexity, constants and variables cost 1.
    pub fn complexity(&self, ops: &OperatorSet) -> Result<u32> {
        match self {
            Expr::Const(_) | Expr::Var(_) => Ok(1),
            Expr::Unary(u, a) => Ok(op_cost(ops, Op::Unary(*u))? + a.complexity(ops)?),
            Expr::Binary(b, l, r) => {
                Ok(op_cost(ops, Op::Binary(*b))? + l.complexity(ops)? + r.complexity(ops)?)
            }
        }
    }

    /// True when every operator is in `ops` and every argument respects its
    /// operator's argument-complexity limit.
    pub fn satisfies_constraints(&self, ops: &OperatorSet) -> bool {
        self.check_constraints(ops).is_some()
    }

    // Returns the complexity when all constraints hold.
    fn check_constraints(&self, ops: &OperatorSet) -> Option<u32> {
        match self {
            Expr::Const(_) | Expr::Var(_) => Some(1),
            Expr::Unary(u, a) => {
                let op = ops.get(Op::Unary(*u))?;
                let ca = a.check_constraints(ops)?;
                if op.arg_limit.is_some_and(|l| ca > l) {
                    return None;
                }
                Some(op.complexity + ca)
            }
            Expr::Binary(b, l, r) => {
                let op = ops.get(Op::Binary(*b))?;
                let cl = l.check_constraints(ops)?;
                let cr = r.check_constraints(ops)?;
                if op.arg_limit.is_some_and(|lim| cl > lim || cr > lim) {
                    return None;
                }
                Some(op.complexity + cl + cr)
            }
        }
    }

    /// Complexity if the tree is admissible under `ops` and `max_complexity`.
    pub fn admissible_complexity(&self, ops: &OperatorSet, max_complexity: u32) -> Option<u32> {
        self.check_constraints(ops).filter(|c| *c <= max_complexity)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Unary(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn contains_var(&self, index: usize) -> bool {
        self.any(&mut |e| matches!(e, Expr::Var(i) if *i == index))
    }

    /// True if `pred` holds for any node (preorder, short-circuiting).
    pub fn any(&self, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Unary(_, a) => a.any(pred),
            Expr::Binary(_, a, b) => a.any(pred) || b.any(pred),
        }
    }

    /// Constants in preorder.
    pub fn constants(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Const(c) = e {
                out.push(*c);
            }
        });
        out
    }

    pub fn count_constants(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |e| n += matches!(e, Expr::Const(_)) as usize);
        n
    }

    /// Overwrites constants in preorder; `values` must hold exactly
    /// [`count_constants`](Self::count_constants) entries.
    pub fn set_constants(&mut self, values: &[f64]) {
        let mut it = values.iter();
        self.visit_mut(&mut |e| {
            if let Expr::Const(c) = e {
                *c = *it.next().expect("constant vector too short");
            }
        });
        debug_assert!(it.next().is_none(), "constant vector too long");
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Unary(_, a) => a.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Unary(_, a) => a.visit_mut(f),
            Expr::Binary(_, a, b) => {
                a.visit_mut(f);
                b.visit_mut(f);
            }
        }
    }

    /// The `index`-th node in preorder.
    pub fn node(&self, index: usize) -> Option<&Expr> {
        let mut k = index;
        self.find_node(&mut k)
    }

    fn find_node(&self, k: &mut usize) -> Option<&Expr> {
        if *k == 0 {
            return Some(self);
        }
        *k -= 1;
        match self {
            Expr::Const(_) | Expr::Var(_) => None,
            Expr::Unary(_, a) => a.find_node(k),
            Expr::Binary(_, a, b) => a.find_node(k).or_else(|| b.find_node(k)),
        }
    }

    pub fn node_mut(&mut self, index: usize) -> Option<&mut Expr> {
        let mut k = index;
        self.find_node_mut(&mut k)
    }

    fn find_node_mut(&mut self, k: &mut usize) -> Option<&mut Expr> {
        if *k == 0 {
            return Some(self);
        }
        *k -= 1;
        match self {
            Expr::Const(_) | Expr::Var(_) => None,
            Expr::Unary(_, a) => a.find_node_mut(k),
            Expr::Binary(_, a, b) => {
                let left = a.size();
                if *k < left {
                    a.find_node_mut(k)
                } else {
                    *k -= left;
                    b.find_node_mut(k)
                }
            }
        }
    }

    /// Structural equality that ignores constant values.
    pub fn same_shape(&self, other: &Expr) -> bool {
        match (self, other) {
            (Expr::Const(_), Expr::Const(_)) => true,
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Unary(p, a), Expr::Unary(q, b)) => p == q && a.same_shape(b),
            (Expr::Binary(p, a1, a2), Expr::Binary(q, b1, b2)) => {
                p == q && a1.same_shape(b1) && a2.same_shape(b2)
            }
            _ => false,
        }
    }

    /// Leaf labels (`c:<bits>` / `x<i>`), used to reason about subtree exchange.
    pub fn leaf_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| match e {
            Expr::Const(c) => out.push(format!("c:{:x}", c.to_bits())),
            Expr::Var(i) => out.push(format!("x{i}")),
            _ => {}
        });
        out
    }
}

fn op_cost(ops: &OperatorSet, op: Op) -> Result<u32> {
    ops.get(op)
        .map(|o| o.complexity)
        .ok_or_else(|| Error::UnknownOperator(op.to_string()))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}
