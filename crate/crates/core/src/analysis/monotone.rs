//! Grid-based monotonicity classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    StrictlyIncreasing,
    StrictlyDecreasing,
    NonDecreasing,
    NonIncreasing,
    Constant,
    NotMonotone,
}

impl Direction {
    /// Increasing in the weak sense (constant included).
    pub fn is_increasing(self) -> bool {
        matches!(
            self,
            Direction::StrictlyIncreasing | Direction::NonDecreasing | Direction::Constant
        )
    }

    pub fn is_decreasing(self) -> bool {
        matches!(
            self,
            Direction::StrictlyDecreasing | Direction::NonIncreasing | Direction::Constant
        )
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Direction::StrictlyIncreasing | Direction::StrictlyDecreasing)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::StrictlyIncreasing => "strictly_increasing",
            Direction::StrictlyDecreasing => "strictly_decreasing",
            Direction::NonDecreasing => "non_decreasing",
            Direction::NonIncreasing => "non_increasing",
            Direction::Constant => "constant",
            Direction::NotMonotone => "not_monotone",
        }
    }
}

/// A consecutive pair whose difference contradicts the reported direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub x_left: f64,
    pub x_right: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub direction: Direction,
    /// Pairs against the better-fitting orientation; empty unless
    /// `direction` is `NotMonotone`.
    pub violations: Vec<Violation>,
    pub decreases_beyond_slack: usize,
    pub increases_beyond_slack: usize,
    pub slack: f64,
    /// Number of disjoint grid pieces (more than one on punctured grids).
    pub segments: usize,
}

/// Classifies already-evaluated samples. Each slice in `segments` is a run
/// of `(x, f(x))` pairs; differences are never taken across segments.
///
/// A difference counts as a rise (fall) when it exceeds
/// `slack * max(|f_i|, |f_{i+1}|)` (resp. falls below its negative).
pub fn classify(segments: &[Vec<(f64, f64)>], slack: f64) -> MonotonicityReport {
    let mut rises = Vec::new();
    let mut falls = Vec::new();
    let mut flat = 0usize;
    let mut pairs = 0usize;
    for seg in segments {
        for w in seg.windows(2) {
            let (x0, f0) = w[0];
            let (x1, f1) = w[1];
            let delta = f1 - f0;
            let tau = slack * f0.abs().max(f1.abs());
            let v = Violation {
                x_left: x0,
                x_right: x1,
                delta,
            };
            pairs += 1;
            if delta > tau {
                rises.push(v);
            } else if delta < -tau {
                falls.push(v);
            } else {
                flat += 1;
            }
        }
    }
    let direction = if pairs == 0 || (rises.is_empty() && falls.is_empty()) {
        Direction::Constant
    } else if falls.is_empty() && flat == 0 {
        Direction::StrictlyIncreasing
    } else if rises.is_empty() && flat == 0 {
        Direction::StrictlyDecreasing
    } else if falls.is_empty() {
        Direction::NonDecreasing
    } else if rises.is_empty() {
        Direction::NonIncreasing
    } else {
        Direction::NotMonotone
    };
    let (decreases_beyond_slack, increases_beyond_slack) = (falls.len(), rises.len());
    let violations = if direction == Direction::NotMonotone {
        if falls.len() <= rises.len() {
            falls
        } else {
            rises
        }
    } else {
        Vec::new()
    };
    let (grid, values) = segments.iter().flatten().copied().unzip();
    MonotonicityReport {
        grid,
        values,
        direction,
        violations,
        decreases_beyond_slack,
        increases_beyond_slack,
        slack,
        segments: segments.iter().filter(|s| !s.is_empty()).count(),
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::Usage(format!(
            "monotonicity probe needs at least 3 grid points, got {}",
            grid.len()
        )));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) || !grid.iter().all(|x| x.is_finite()) {
        return Err(Error::Usage("probe grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

const EVAL_CHUNK: usize = 64;

/// Evaluates `f` over `grid` in parallel chunks, stopping after the first
/// chunk that fails; the first failure in grid order is returned with its
/// abscissa.
pub(crate) fn evaluate<F>(f: &F, grid: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync + ?Sized,
{
    let mut out = Vec::with_capacity(grid.len());
    for chunk in grid.chunks(EVAL_CHUNK) {
        let values: Vec<Result<f64>> = chunk
            .par_iter()
            .map(|&x| match f(x) {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(Error::Domain {
                    what: "function value is not finite",
                    value: v,
                }
                .at(x)),
                Err(e) => Err(e.at(x)),
            })
            .collect();
        for v in values {
            out.push(v?);
        }
    }
    Ok(out)
}

/// Direction of `f` on a strictly increasing grid of at least 3 points.
pub fn monotonicity_probe<F>(f: &F, grid: &[f64], slack: f64) -> Result<MonotonicityReport>
where
    F: Fn(f64) -> Result<f64> + Sync + ?Sized,
{
    check_grid(grid)?;
    let values = evaluate(f, grid)?;
    let seg: Vec<(f64, f64)> = grid.iter().copied().zip(values).collect();
    Ok(classify(&[seg], slack))
}
