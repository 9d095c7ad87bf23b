//! Splits a total control input across controllers at equal marginal cost,
//! with and without input bounds.

use gridfreq::dispatch::{clear, CostModel, DEFAULT_BARRIER_WEIGHT};

fn report(label: &str, costs: &[CostModel], total: f64) -> gridfreq::Result<()> {
    let r = clear(costs, total)?;
    println!("{label}: u_s = {total}");
    println!("  price {:.6}, residual {:.1e}, cost {:.6}", r.price, r.residual, r.total_cost(costs)?);
    for (c, u) in costs.iter().zip(&r.inputs) {
        println!("  alpha {:.3}: u = {:+.6}, J' = {:.6}", c.alpha(), u, c.marginal(*u)?);
    }
    Ok(())
}

fn main() -> gridfreq::Result<()> {
    let quad = [CostModel::quadratic(1.0), CostModel::quadratic(3.0)];
    report("quadratic", &quad, 2.0)?;

    let alphas = [0.637, 0.2698, 0.041, 0.0165, 0.8133, 0.9128, 0.6066, 0.7295, 0.5436, 0.9351];
    let ieee: Vec<_> = alphas.iter().map(|&a| CostModel::quadratic(a)).collect();
    report("ieee39 generators", &ieee, 0.99)?;

    // The two cheapest units are capped at 0.25 p.u.
    let bounded = [
        CostModel::barrier(1.0, -0.25, 0.25, DEFAULT_BARRIER_WEIGHT)?,
        CostModel::barrier(1.0, -0.25, 0.25, DEFAULT_BARRIER_WEIGHT)?,
        CostModel::quadratic(0.2),
    ];
    report("bounded", &bounded, 0.9)?;
    match clear(&bounded[..2], 0.6) {
        Err(e) => println!("bounded pair, u_s = 0.6: {e}"),
        Ok(r) => println!("bounded pair, u_s = 0.6: unexpectedly feasible at price {}", r.price),
    }
    Ok(())
}
