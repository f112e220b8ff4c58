//! Finite-difference test for complete monotonicity.

use serde::Serialize;

use crate::error::{Error, Result};

pub const CM_MAX_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// max(1e-2, 1e-2·x) at base point x.
    Adaptive,
    Fixed(f64),
}

impl StepRule {
    pub fn step(self, x: f64) -> f64 {
        match self {
            StepRule::Adaptive => (1e-2 * x).max(1e-2),
            StepRule::Fixed(h) => h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderResult {
    pub order: usize,
    pub passed: bool,
    /// Smallest (−1)ⁿ Δⁿ f over the grid.
    pub min_signed_difference: f64,
    pub first_failure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmReport {
    pub grid: Vec<f64>,
    pub orders: Vec<OrderResult>,
    pub passed: bool,
    /// First failing (order, x), lowest order first.
    pub first_failure: Option<(usize, f64)>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Checks (−1)ⁿ Δⁿ_h f(x) ≥ 0 for n = 0..=max_order at every grid point,
/// with forward differences and a rounding allowance of 2ⁿ·4ε·max|f|.
pub fn complete_monotonicity_probe<F>(f: &F, grid: &[f64], max_order: usize, step: StepRule) -> Result<CmReport>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    if max_order > CM_MAX_ORDER {
        return Err(Error::Usage(format!("max order {max_order} exceeds {CM_MAX_ORDER}")));
    }
    if grid.is_empty() {
        return Err(Error::Usage("complete monotonicity probe needs a grid".into()));
    }
    if let StepRule::Fixed(h) = step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Usage(format!("step must be positive, got {h}")));
        }
    }
    let mut orders: Vec<OrderResult> = (0..=max_order)
        .map(|order| OrderResult {
            order,
            passed: true,
            min_signed_difference: f64::INFINITY,
            first_failure: None,
        })
        .collect();
    for &x in grid {
        let h = step.step(x);
        let samples = (0..=max_order)
            .map(|k| {
                let t = x + k as f64 * h;
                match f(t) {
                    Ok(v) if v.is_finite() => Ok(v),
                    Ok(v) => Err(Error::Domain {
                        what: "function value is not finite",
                        value: v,
                    }
                    .at(t)),
                    Err(e) => Err(e.at(t)),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        for o in orders.iter_mut() {
            let n = o.order;
            let mut diff = 0.0;
            let mut scale = 0.0f64;
            for (k, &v) in samples[..=n].iter().enumerate() {
                let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                diff += sign * binomial(n, k) * v;
                scale = scale.max(v.abs());
            }
            let signed = if n % 2 == 0 { diff } else { -diff };
            let allowance = (1u64 << n) as f64 * 4.0 * f64::EPSILON * scale;
            o.min_signed_difference = o.min_signed_difference.min(signed);
            if signed < -allowance && o.passed {
                o.passed = false;
                o.first_failure = Some(x);
            }
        }
    }
    let first_failure = orders.iter().find_map(|o| o.first_failure.map(|x| (o.order, x)));
    Ok(CmReport {
        grid: grid.to_vec(),
        passed: first_failure.is_none(),
        orders,
        first_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linear_grid;

    #[test]
    fn exponential_passes() {
        let g = linear_grid(0.1, 20.0, 30).unwrap();
        let r = complete_monotonicity_probe(&|x: f64| Ok((-x).exp()), &g, 6, StepRule::Adaptive).unwrap();
        assert!(r.passed, "{:?}", r.first_failure);
    }

    #[test]
    fn identity_fails_at_order_one() {
        let g = linear_grid(0.1, 20.0, 30).unwrap();
        let r = complete_monotonicity_probe(&|x: f64| Ok(x), &g, 3, StepRule::Adaptive).unwrap();
        assert_eq!(r.first_failure, Some((1, 0.1)));
        assert!(r.orders[0].passed);
    }

    #[test]
    fn order_cap() {
        assert!(matches!(
            complete_monotonicity_probe(&|x: f64| Ok(x), &[1.0], 7, StepRule::Adaptive),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn reciprocal_power_passes_with_fixed_step() {
        let g = linear_grid(0.5, 5.0, 10).unwrap();
        let r = complete_monotonicity_probe(&|x: f64| Ok(1.0 / x), &g, 6, StepRule::Fixed(0.05)).unwrap();
        assert!(r.passed);
    }
}
