//! Recovers the 1-D heat equation solution from sampled data.
//!
//! `cargo run --release --example heat_recovery -- [seed] [iterations]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symdistill::bench::gen_heat;
use symdistill::expr::{render_with_names, Op, OperatorSet, UnaryOp};
use symdistill::harness::distill;
use symdistill::SRConfig;

fn main() -> symdistill::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let iterations: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);

    let table = gen_heat(5000, 0.2, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let mut ops = OperatorSet::default();
    ops.set_arg_limit(Op::Unary(UnaryOp::Exp), Some(3))?;
    ops.set_arg_limit(Op::Unary(UnaryOp::Sin), Some(3))?;
    let config = SRConfig {
        ops,
        parsimony: 0.01,
        n_iterations: iterations,
        seed,
        ..Default::default()
    };
    let fit = distill(&table, &config, None, "heat")?;
    let dim = &fit.dims[0];
    for (k, (e, s)) in dim.front.entries().iter().zip(dim.front.scores()).enumerate() {
        let mark = if k == dim.best_index { "*" } else { " " };
        println!(
            "{mark} {:>3} {:>12.4e} {:>8.3} {}",
            e.complexity,
            e.loss,
            s,
            render_with_names(&e.expr, table.input_names())
        );
    }
    println!("wall time {:.1?}, {} evaluations", fit.wall_time, dim.stats.evaluations);
    Ok(())
}
