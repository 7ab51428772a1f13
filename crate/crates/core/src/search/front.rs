//! Pareto fronts over (complexity, loss) and score-based selection.

use crate::expr::Expr;

/// Losses are floored at this value before taking log-ratios.
pub const LOSS_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct FrontEntry {
    pub complexity: u32,
    pub loss: f64,
    pub expr: Expr,
}

/// Entries sorted by strictly increasing complexity and strictly
/// decreasing loss.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParetoFront {
    entries: Vec<FrontEntry>,
}

impl ParetoFront {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a front from arbitrary candidates, dropping dominated ones.
    pub fn from_candidates(candidates: impl IntoIterator<Item = FrontEntry>) -> Self {
        let mut front = ParetoFront::new();
        for c in candidates {
            front.insert(c.complexity, c.loss, &c.expr);
        }
        front
    }

    pub fn entries(&self) -> &[FrontEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True if an entry with complexity `<= complexity` already reaches `loss`.
    pub fn dominates(&self, complexity: u32, loss: f64) -> bool {
        !(loss.is_finite())
            || self
                .entries
                .iter()
                .take_while(|e| e.complexity <= complexity)
                .any(|e| e.loss <= loss)
    }

    /// Inserts unless dominated; removes entries the newcomer dominates.
    /// Returns whether the front changed.
    pub fn insert(&mut self, complexity: u32, loss: f64, expr: &Expr) -> bool {
        if self.dominates(complexity, loss) {
            return false;
        }
        self.entries
            .retain(|e| !(e.complexity >= complexity && e.loss >= loss));
        let at = self
            .entries
            .partition_point(|e| e.complexity < complexity);
        self.entries.insert(
            at,
            FrontEntry {
                complexity,
                loss,
                expr: expr.clone(),
            },
        );
        true
    }

    pub fn merge(&mut self, other: &ParetoFront) {
        for e in &other.entries {
            self.insert(e.complexity, e.loss, &e.expr);
        }
    }

    /// Smallest `loss + parsimony * complexity` over the front.
    pub fn best_penalized(&self, parsimony: f64) -> f64 {
        self.entries
            .iter()
            .map(|e| e.loss + parsimony * e.complexity as f64)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_loss(&self) -> Option<&FrontEntry> {
        self.entries.last()
    }

    pub fn scores(&self) -> Vec<f64> {
        scores(&self.pairs())
    }

    pub fn select_best(&self) -> Option<usize> {
        if self.entries.is_empty() {
            None
        } else {
            Some(select_best(&self.pairs()))
        }
    }

    pub fn pairs(&self) -> Vec<(u32, f64)> {
        self.entries.iter().map(|e| (e.complexity, e.loss)).collect()
    }

    /// Checks the ordering invariant.
    pub fn is_valid(&self) -> bool {
        self.entries.windows(2).all(|w| {
            w[0].complexity < w[1].complexity && w[0].loss > w[1].loss
        }) && self.entries.iter().all(|e| e.loss.is_finite() && e.loss >= 0.0)
    }
}

/// Per-entry score `-ln(loss_j / loss_{j-1}) / (c_j - c_{j-1})`; the first
/// entry scores 0. Entries must be sorted by complexity.
pub fn scores(front: &[(u32, f64)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(front.len());
    for (j, &(c, loss)) in front.iter().enumerate() {
        if j == 0 {
            out.push(0.0);
            continue;
        }
        let (pc, ploss) = front[j - 1];
        let ratio = loss.max(LOSS_FLOOR) / ploss.max(LOSS_FLOOR);
        let dc = c as f64 - pc as f64;
        out.push(if dc > 0.0 { -ratio.ln() / dc } else { 0.0 });
    }
    out
}

/// Index of the highest-scoring entry; ties go to the lower complexity.
pub fn select_best(front: &[(u32, f64)]) -> usize {
    let s = scores(front);
    let mut best = 0;
    for (j, v) in s.iter().enumerate().skip(1) {
        if *v > s[best] {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pareto front reported for an edge-message fit on a 1/r^2 force law.
    const TABLE: [(u32, f64); 11] = [
        (1, 0.0888),
        (5, 0.0885),
        (7, 0.0882),
        (8, 0.0880),
        (9, 0.0877),
        (10, 0.0843),
        (12, 0.0687),
        (14, 0.0513),
        (16, 0.0260),
        (18, 0.0128),
        (20, 0.0125),
    ];

    #[test]
    fn picks_complexity_eighteen() {
        let best = select_best(&TABLE);
        assert_eq!(TABLE[best].0, 18);
        let expected = -(0.0128f64 / 0.0260).ln() / 2.0;
        assert!((scores(&TABLE)[best] - expected).abs() < 1e-12);
        assert!((expected - 0.354).abs() < 5e-4);
    }

    #[test]
    fn tie_goes_to_lower_complexity() {
        assert_eq!(select_best(&[(1, 0.5), (3, 0.5)]), 0);
        assert_eq!(select_best(&[(4, 0.2)]), 0);
    }

    #[test]
    fn exact_fit_scores_are_finite() {
        let s = scores(&[(1, 1.0), (3, 0.0)]);
        assert!(s[1].is_finite() && s[1] > 0.0);
    }

    #[test]
    fn insertion_keeps_dominance() {
        let mut f = ParetoFront::new();
        let e = Expr::Const(0.0);
        assert!(f.insert(5, 1.0, &e));
        assert!(f.insert(3, 2.0, &e));
        assert!(!f.insert(6, 1.5, &e), "dominated by (5, 1.0)");
        assert!(!f.insert(5, 1.0, &e), "duplicate");
        assert!(f.insert(4, 0.5, &e), "dominates (5, 1.0)");
        assert_eq!(f.pairs(), vec![(3, 2.0), (4, 0.5)]);
        assert!(!f.insert(9, f64::INFINITY, &e));
        assert!(!f.insert(9, f64::NAN, &e));
        assert!(f.is_valid());
    }
}
