//! Multi-population evolutionary search.
//!
//! Each population owns a private RNG stream (`seed + index`) and evolves
//! independently between migration barriers, so results depend only on the
//! seed and not on how populations are scheduled across threads.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::SRConfig;
use super::constants::{fit_constants, optimize_constants, FitBudget};
use super::fitness::{fitness_of, loss_scale, score, Dataset, Score};
use super::front::ParetoFront;
use super::operators::{accept, crossover, mutate, random_tree, tournament_select, Grammar};
use crate::error::{Error, Result};
use crate::expr::{simplify, Expr};

#[derive(Clone, Debug)]
struct Member {
    expr: Expr,
    score: Score,
    birth: u64,
}

impl Member {
    fn rank_key(&self, penalized: bool) -> f64 {
        if penalized {
            self.score.fitness
        } else {
            self.score.loss
        }
    }
}

struct Population {
    members: Vec<Member>,
    /// Everything this population has evaluated, dominance-filtered.
    hall_of_fame: ParetoFront,
    rng: ChaCha8Rng,
    /// Loss normalizer shared by every population.
    scale: f64,
    births: u64,
    evaluations: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    /// Best penalized loss on the front after each iteration.
    pub best_fitness: Vec<f64>,
    pub evaluations: u64,
    pub wall_time: Duration,
}

/// Runs the search and returns the front over everything evaluated.
pub fn evolve(data: &Dataset, config: &SRConfig) -> Result<(ParetoFront, SearchStats)> {
    config.validate()?;
    data.check_targets()?;
    if data.d() == 0 {
        return Err(Error::Data("dataset has no input columns".into()));
    }
    let started = Instant::now();
    let grammar = Grammar {
        ops: &config.ops,
        n_features: data.d(),
        max_complexity: config.max_complexity,
    };

    let mut populations: Vec<Population> = (0..config.n_populations)
        .map(|p| init_population(p, data, config, &grammar))
        .collect::<Result<_>>()?;

    let mut front = ParetoFront::new();
    for pop in &populations {
        front.merge(&pop.hall_of_fame);
    }
    let mut stats = SearchStats::default();

    for iteration in 0..config.n_iterations {
        populations
            .par_iter_mut()
            .try_for_each(|pop| run_round(pop, iteration, data, config, &grammar))?;

        for pop in &populations {
            front.merge(&pop.hall_of_fame);
        }
        if (iteration + 1) % config.migration_interval == 0 {
            migrate(&mut populations, config);
        }
        stats.best_fitness.push(front.best_penalized(config.parsimony));
    }

    stats.evaluations = populations.iter().map(|p| p.evaluations).sum();
    stats.wall_time = started.elapsed();
    Ok((front, stats))
}

fn init_population(
    index: usize,
    data: &Dataset,
    config: &SRConfig,
    grammar: &Grammar<'_>,
) -> Result<Population> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(index as u64));
    let mut exprs: Vec<Expr> = (0..data.d()).map(Expr::Var).collect();
    exprs.push(Expr::Const(1.0));
    exprs.truncate(config.population_size);
    while exprs.len() < config.population_size {
        exprs.push(random_tree(&mut rng, grammar, config.max_init_depth));
    }

    let mut pop = Population {
        members: Vec::with_capacity(exprs.len()),
        hall_of_fame: ParetoFront::new(),
        rng,
        scale: loss_scale(data, config),
        births: 0,
        evaluations: 0,
    };
    for expr in exprs {
        let s = evaluate(&mut pop, &expr, data, config)?;
        let birth = pop.next_birth();
        pop.members.push(Member { expr, score: s, birth });
    }
    Ok(pop)
}

impl Population {
    fn next_birth(&mut self) -> u64 {
        self.births += 1;
        self.births
    }

    fn oldest(&self) -> usize {
        self.members
            .iter()
            .enumerate()
            .min_by_key(|(_, m)| m.birth)
            .map(|(i, _)| i)
            .expect("nonempty population")
    }

    /// Fraction of members at each complexity.
    fn shares(&self, max_complexity: u32) -> Vec<f64> {
        let mut counts = vec![0.0; max_complexity as usize + 1];
        for m in &self.members {
            if let Some(c) = counts.get_mut(m.score.complexity as usize) {
                *c += 1.0;
            }
        }
        let n = self.members.len() as f64;
        counts.iter_mut().for_each(|c| *c /= n);
        counts
    }

    fn replace_oldest(&mut self, expr: Expr, score: Score) {
        let i = self.oldest();
        let birth = self.next_birth();
        self.members[i] = Member { expr, score, birth };
    }
}

fn evaluate(pop: &mut Population, expr: &Expr, data: &Dataset, config: &SRConfig) -> Result<Score> {
    let s = score(expr, data, config, pop.scale)?;
    pop.evaluations += 1;
    pop.hall_of_fame.insert(s.complexity, s.loss, expr);
    Ok(s)
}

fn run_round(
    pop: &mut Population,
    iteration: usize,
    data: &Dataset,
    config: &SRConfig,
    grammar: &Grammar<'_>,
) -> Result<()> {
    let penalized = config.penalized_tournament;
    let scaling = config.adaptive_parsimony_scaling;
    let adjusted = |key: f64, complexity: u32, shares: &[f64]| {
        if scaling == 0.0 {
            return key;
        }
        key * (scaling * shares.get(complexity as usize).copied().unwrap_or(0.0)).exp()
    };
    let key_of = |s: &Score| if penalized { s.fitness } else { s.loss };

    for _ in 0..config.population_size {
        let shares = pop.shares(config.max_complexity);
        let rank = |m: &Member| adjusted(m.rank_key(penalized), m.score.complexity, &shares);
        let i = tournament_select(
            &pop.members,
            rank,
            &mut pop.rng,
            config.tournament_size,
            config.tournament_p,
        );
        if pop.rng.random::<f64>() < config.crossover_probability {
            let j = tournament_select(
                &pop.members,
                rank,
                &mut pop.rng,
                config.tournament_size,
                config.tournament_p,
            );
            let (a, b) = crossover(&pop.members[i].expr, &pop.members[j].expr, &mut pop.rng, grammar);
            for (child, parent) in [(a, i), (b, j)] {
                let child = refine_child(pop, child, parent, data, config);
                let s = evaluate(pop, &child, data, config)?;
                let old = rank(&pop.members[parent]);
                let new = adjusted(key_of(&s), s.complexity, &shares);
                if accept(old, new, config.acceptance_temperature, &mut pop.rng) {
                    pop.replace_oldest(child, s);
                }
            }
        } else {
            let child = mutate(&pop.members[i].expr, &mut pop.rng, grammar);
            let child = refine_child(pop, child, i, data, config);
            let s = evaluate(pop, &child, data, config)?;
            let old = rank(&pop.members[i]);
            let new = adjusted(key_of(&s), s.complexity, &shares);
            if accept(old, new, config.acceptance_temperature, &mut pop.rng) {
                pop.replace_oldest(child, s);
            } else {
                // the parent's copy takes the slot, as in age-regularized evolution
                let parent = pop.members[i].clone();
                pop.replace_oldest(parent.expr, parent.score);
            }
        }
    }

    for k in 0..pop.members.len() {
        let simplified = simplify(&pop.members[k].expr);
        if simplified != pop.members[k].expr
            && simplified
                .admissible_complexity(&config.ops, config.max_complexity)
                .is_some()
        {
            let s = evaluate(pop, &simplified, data, config)?;
            if s.fitness <= pop.members[k].score.fitness || !pop.members[k].score.fitness.is_finite() {
                pop.members[k].expr = simplified;
                pop.members[k].score = s;
            }
        }
    }

    if (iteration + 1) % config.constant_opt_interval == 0 {
        for k in 0..pop.members.len() {
            if pop.members[k].expr.count_constants() == 0
                || pop.rng.random::<f64>() >= config.optimizer_probability
            {
                continue;
            }
            let fitted = optimize_constants(&pop.members[k].expr, data, config, &mut pop.rng);
            if fitted != pop.members[k].expr {
                let s = evaluate(pop, &fitted, data, config)?;
                if s.fitness <= pop.members[k].score.fitness {
                    pop.members[k].expr = fitted;
                    pop.members[k].score = s;
                }
            }
        }
    }
    Ok(())
}

/// Short constant fit of a child whose structure differs from its parent's.
fn refine_child(pop: &mut Population, child: Expr, parent: usize, data: &Dataset, config: &SRConfig) -> Expr {
    if config.child_optimizer_evals == 0
        || child.count_constants() == 0
        || child.same_shape(&pop.members[parent].expr)
    {
        return child;
    }
    let budget = FitBudget {
        max_evals: config.child_optimizer_evals,
        restarts: 0,
        max_rows: config.child_optimizer_rows,
    };
    fit_constants(&child, data, config, budget, &mut pop.rng)
}

/// Ring migration: population `p` takes hall-of-fame members of `p - 1`,
/// which replace its worst residents.
fn migrate(populations: &mut [Population], config: &SRConfig) {
    let n = populations.len();
    if n < 2 || config.migration_fraction == 0.0 {
        return;
    }
    let count = ((config.migration_fraction * config.population_size as f64).round() as usize)
        .clamp(1, config.population_size);
    let sources: Vec<ParetoFront> = populations.iter().map(|p| p.hall_of_fame.clone()).collect();
    let penalized = config.penalized_tournament;

    for (p, pop) in populations.iter_mut().enumerate() {
        let source = &sources[(p + n - 1) % n];
        if source.is_empty() {
            continue;
        }
        let mut order: Vec<usize> = (0..pop.members.len()).collect();
        order.sort_by(|&a, &b| {
            pop.members[b]
                .rank_key(penalized)
                .total_cmp(&pop.members[a].rank_key(penalized))
                .then(a.cmp(&b))
        });
        for &slot in order.iter().take(count) {
            let entry = &source.entries()[pop.rng.random_range(0..source.len())];
            let score = Score {
                complexity: entry.complexity,
                loss: entry.loss,
                fitness: fitness_of(entry.loss, entry.complexity, pop.scale, config),
            };
            let birth = pop.next_birth();
            pop.members[slot] = Member {
                expr: entry.expr.clone(),
                score,
                birth,
            };
        }
    }
}
