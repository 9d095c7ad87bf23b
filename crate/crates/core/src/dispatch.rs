//! Economic dispatch: convex control costs, marginal costs and the
//! clearing equation that splits a total input u_s across controllers so
//! that every marginal cost equals the common price λ.

use crate::error::{Error, Result};
use crate::netmodel::ControllerSite;

/// Barrier weight used when a controller carries finite input bounds.
pub const DEFAULT_BARRIER_WEIGHT: f64 = 1e-3;

const SOLVE_TOL: f64 = 1e-12;
const MAX_SOLVE_ITERS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostModel {
    /// J(u) = u²/α.
    Quadratic { alpha: f64 },
    /// J(u) = u²/α − μ[ln(u − lo) + ln(hi − u)] on the open interval
    /// (lo, hi). An infinite bound drops its logarithm.
    BarrierQuadratic { alpha: f64, lo: f64, hi: f64, mu: f64 },
}

impl CostModel {
    pub fn quadratic(alpha: f64) -> Self {
        assert!(alpha > 0.0, "cost weight must be positive");
        CostModel::Quadratic { alpha }
    }

    pub fn barrier(alpha: f64, lo: f64, hi: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && mu > 0.0 && lo < hi) {
            return Err(Error::Validation(format!(
                "invalid barrier cost (alpha {alpha}, bounds ({lo}, {hi}), mu {mu})"
            )));
        }
        Ok(CostModel::BarrierQuadratic { alpha, lo, hi, mu })
    }

    /// Quadratic for unbounded sites, barrier-augmented when bounds are finite.
    pub fn for_site(site: &ControllerSite, mu: f64) -> Result<Self> {
        if site.is_bounded() {
            Self::barrier(site.alpha, site.u_lo, site.u_hi, mu)
        } else {
            Ok(Self::quadratic(site.alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            CostModel::Quadratic { alpha } | CostModel::BarrierQuadratic { alpha, .. } => alpha,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match *self {
            CostModel::Quadratic { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            CostModel::BarrierQuadratic { lo, hi, .. } => (lo, hi),
        }
    }

    fn check_domain(&self, u: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if u > lo && u < hi {
            Ok(())
        } else {
            Err(Error::Domain { value: u, lo, hi })
        }
    }

    pub fn cost(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match *self {
            CostModel::Quadratic { alpha } => u * u / alpha,
            CostModel::BarrierQuadratic { alpha, lo, hi, mu } => {
                let mut j = u * u / alpha;
                if lo.is_finite() {
                    j -= mu * (u - lo).ln();
                }
                if hi.is_finite() {
                    j -= mu * (hi - u).ln();
                }
                j
            }
        })
    }

    /// Marginal cost J'(u).
    pub fn marginal(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(self.marginal_unchecked(u))
    }

    fn marginal_unchecked(&self, u: f64) -> f64 {
        match *self {
            CostModel::Quadratic { alpha } => 2.0 * u / alpha,
            CostModel::BarrierQuadratic { alpha, lo, hi, mu } => {
                let mut d = 2.0 * u / alpha;
                if lo.is_finite() {
                    d -= mu / (u - lo);
                }
                if hi.is_finite() {
                    d += mu / (hi - u);
                }
                d
            }
        }
    }

    /// J''(u), strictly positive on the domain.
    pub fn curvature(&self, u: f64) -> f64 {
        match *self {
            CostModel::Quadratic { alpha } => 2.0 / alpha,
            CostModel::BarrierQuadratic { alpha, lo, hi, mu } => {
                let mut c = 2.0 / alpha;
                if lo.is_finite() {
                    c += mu / ((u - lo) * (u - lo));
                }
                if hi.is_finite() {
                    c += mu / ((hi - u) * (hi - u));
                }
                c
            }
        }
    }

    /// The input whose marginal cost is `price`: J'⁻¹(λ).
    pub fn inverse_marginal(&self, price: f64) -> Result<f64> {
        match *self {
            CostModel::Quadratic { alpha } => Ok(alpha * price / 2.0),
            CostModel::BarrierQuadratic { alpha, lo, hi, .. } => {
                let start = (alpha * price / 2.0).clamp(interior(lo, hi, 0.0), interior(lo, hi, 1.0));
                let tol = SOLVE_TOL * price.abs().max(1.0);
                solve_increasing(
                    |u| (self.marginal_unchecked(u) - price, self.curvature(u)),
                    lo,
                    hi,
                    start,
                    tol,
                )
                .map_err(|residual| Error::PriceNonConvergence { residual })
            }
        }
    }
}

/// A point strictly inside (lo, hi): `frac` = 0 near the low end, 1 near
/// the high end.
fn interior(lo: f64, hi: f64, frac: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let margin = 1e-9 * (hi - lo);
            lo + margin + frac * (hi - lo - 2.0 * margin)
        }
        (true, false) => {
            if frac == 0.0 {
                lo + 1e-9 * lo.abs().max(1.0)
            } else {
                f64::MAX
            }
        }
        (false, true) => {
            if frac == 0.0 {
                f64::MIN
            } else {
                hi - 1e-9 * hi.abs().max(1.0)
            }
        }
        (false, false) => {
            if frac == 0.0 {
                f64::MIN
            } else {
                f64::MAX
            }
        }
    }
}

/// Safeguarded Newton for a strictly increasing `f` on (lo, hi) that runs
/// from negative to positive. Falls back to bisection, or to outward
/// expansion when a bracket end is infinite. Returns the last residual on
/// failure.
fn solve_increasing(
    mut f: impl FnMut(f64) -> (f64, f64),
    lo: f64,
    hi: f64,
    start: f64,
    tol: f64,
) -> std::result::Result<f64, f64> {
    let (mut a, mut b) = (lo, hi);
    let mut x = start;
    let mut last = f64::INFINITY;
    for _ in 0..MAX_SOLVE_ITERS {
        let (fx, dfx) = f(x);
        last = fx;
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if a.is_finite() && b.is_finite() && b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            return Ok(0.5 * (a + b));
        }
        let newton = x - fx / dfx;
        x = if newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            match (a.is_finite(), b.is_finite()) {
                (true, true) => 0.5 * (a + b),
                (true, false) => a + 2.0 * a.abs().max(1.0),
                (false, true) => b - 2.0 * b.abs().max(1.0),
                (false, false) => unreachable!("one bracket end is updated every iteration"),
            }
        };
    }
    Err(last)
}

/// J'(u) for one controller.
pub fn marginal(cost: &CostModel, u: f64) -> Result<f64> {
    cost.marginal(u)
}

/// J'⁻¹(λ) for one controller.
pub fn inverse_marginal(cost: &CostModel, price: f64) -> Result<f64> {
    cost.inverse_marginal(price)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchResult {
    pub price: f64,
    pub inputs: Vec<f64>,
    /// |Σ u_i − u_s|.
    pub residual: f64,
}

impl DispatchResult {
    pub fn total_cost(&self, costs: &[CostModel]) -> Result<f64> {
        costs
            .iter()
            .zip(&self.inputs)
            .map(|(c, &u)| c.cost(u))
            .sum()
    }
}

/// Splits `total` over the controllers at minimum Σ J_i: finds λ with
/// Σ J'_i⁻¹(λ) = total and returns u_i = J'_i⁻¹(λ).
pub fn clear(costs: &[CostModel], total: f64) -> Result<DispatchResult> {
    if costs.is_empty() {
        return Err(Error::Validation("dispatch needs at least one controller".into()));
    }
    if costs.iter().all(|c| matches!(c, CostModel::Quadratic { .. })) {
        let alpha_sum: f64 = costs.iter().map(CostModel::alpha).sum();
        let price = 2.0 * total / alpha_sum;
        let inputs: Vec<f64> = costs.iter().map(|c| c.alpha() * price / 2.0).collect();
        let residual = (inputs.iter().sum::<f64>() - total).abs();
        return Ok(DispatchResult {
            price,
            inputs,
            residual,
        });
    }

    let (lo, hi) = costs.iter().fold((0.0, 0.0), |(l, h), c| {
        let (cl, ch) = c.domain();
        (l + cl, h + ch)
    });
    if !(total > lo && total < hi) {
        return Err(Error::Infeasible { u_s: total, lo, hi });
    }

    let alpha_sum: f64 = costs.iter().map(CostModel::alpha).sum();
    let eval = |price: f64| -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut slope = 0.0;
        for c in costs {
            let u = c.inverse_marginal(price)?;
            sum += u;
            slope += 1.0 / c.curvature(u);
        }
        Ok((sum - total, slope))
    };
    let tol = SOLVE_TOL * total.abs().max(1.0);
    let mut failure = None;
    let price = solve_increasing(
        |p| match eval(p) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                (0.0, 1.0)
            }
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        2.0 * total / alpha_sum,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let price = price.map_err(|residual| Error::PriceNonConvergence { residual })?;
    let inputs = costs
        .iter()
        .map(|c| c.inverse_marginal(price))
        .collect::<Result<Vec<_>>>()?;
    let residual = (inputs.iter().sum::<f64>() - total).abs();
    Ok(DispatchResult {
        price,
        inputs,
        residual,
    })
}
