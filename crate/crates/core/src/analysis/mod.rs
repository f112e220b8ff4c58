//! Test functions, limit probes and the reciprocal-convexity certifier.

mod certify;
mod cm;
mod monotone;

use serde::Serialize;

use crate::distributions::DistributionModel;
use crate::error::{Error, Result};

pub use certify::{
    certify_reciprocal, Certificate, CertifyConfig, Condition, ConditionOutcome, ExcludedInterval,
    ExclusionReason, GridSummary, Note, Route, RouteAttempt, Verdict,
};
pub use cm::{complete_monotonicity_probe, CmReport, OrderResult, StepRule, CM_MAX_ORDER};
pub use monotone::{classify, monotonicity_probe, Direction, MonotonicityReport, Violation};

/// Absolute size below which a test-function denominator counts as zero.
pub const DENOMINATOR_EPS: f64 = 1e-14;
pub const DEFAULT_SLACK: f64 = 1e-9;
pub const LIMIT_POINTS: [f64; 4] = [10.0, 1e2, 1e3, 1e4];
pub const LIMIT_THRESHOLD: f64 = 1e-8;

/// Half-width of the excluded neighbourhood around a singular point `z`.
pub fn exclusion_radius(z: f64) -> f64 {
    (1e-3 * z.abs()).max(1e-6)
}

/// x ω² − x ω′ − 2ω, the shared denominator of both test functions.
pub fn test_denominator(model: &DistributionModel, x: f64) -> Result<f64> {
    let w = model.omega(x)?;
    let wp = model.omega_prime(x)?;
    Ok(x * w * w - x * wp - 2.0 * w)
}

fn checked_quotient(num: f64, den: f64, what: &'static str, x: f64) -> Result<f64> {
    if den.abs() < DENOMINATOR_EPS || !den.is_finite() {
        return Err(Error::Singularity { what, x });
    }
    Ok(num / den)
}

/// x³ ω′ / (x ω² − x ω′ − 2ω).
pub fn test_fn_a(model: &DistributionModel, x: f64) -> Result<f64> {
    let wp = model.omega_prime(x)?;
    let den = test_denominator(model, x)?;
    checked_quotient(x * x * x * wp, den, "test function A denominator vanishes", x)
}

/// (x² ω′ − x ω + 2) / (x ω² − x ω′ − 2ω).
pub fn test_fn_b(model: &DistributionModel, x: f64) -> Result<f64> {
    let w = model.omega(x)?;
    let wp = model.omega_prime(x)?;
    let den = x * w * w - x * wp - 2.0 * w;
    checked_quotient(x * x * wp - x * w + 2.0, den, "test function B denominator vanishes", x)
}

/// ω′ / ω²; refused inside the excluded neighbourhood of any zero of ω.
pub fn omega_ratio(model: &DistributionModel, x: f64) -> Result<f64> {
    if model.omega_zeros().iter().any(|&z| (x - z).abs() <= exclusion_radius(z)) {
        return Err(Error::Singularity {
            what: "omega vanishes nearby",
            x,
        });
    }
    let w = model.omega(x)?;
    let wp = model.omega_prime(x)?;
    checked_quotient(wp, w * w, "omega vanishes", x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitExpr {
    /// f / ω
    FOverOmega,
    /// f / (1 − x ω)
    FOverOneMinusXOmega,
    /// x f / (1 − x ω)
    XfOverOneMinusXOmega,
}

impl LimitExpr {
    pub fn name(self) -> &'static str {
        match self {
            LimitExpr::FOverOmega => "f_over_omega",
            LimitExpr::FOverOneMinusXOmega => "f_over_one_minus_x_omega",
            LimitExpr::XfOverOneMinusXOmega => "xf_over_one_minus_x_omega",
        }
    }

    pub fn eval(self, model: &DistributionModel, x: f64) -> Result<f64> {
        let f = model.density(x)?;
        let w = model.omega(x)?;
        match self {
            LimitExpr::FOverOmega => checked_quotient(f, w, "omega vanishes", x),
            LimitExpr::FOverOneMinusXOmega => checked_quotient(f, 1.0 - x * w, "1 - x omega vanishes", x),
            LimitExpr::XfOverOneMinusXOmega => {
                checked_quotient(x * f, 1.0 - x * w, "1 - x omega vanishes", x)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitDiagnostic {
    pub expr: LimitExpr,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub passed: bool,
    pub failure: Option<String>,
}

/// Checks that `expr` tends to 0: magnitudes non-increasing over
/// [`LIMIT_POINTS`] and the last one below [`LIMIT_THRESHOLD`].
pub fn limit_probe(model: &DistributionModel, expr: LimitExpr) -> LimitDiagnostic {
    let mut values = Vec::with_capacity(LIMIT_POINTS.len());
    let mut failure = None;
    for &x in &LIMIT_POINTS {
        match expr.eval(model, x) {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                failure = Some(format!("non-finite value {v} at x = {x}"));
                break;
            }
            Err(e) => {
                failure = Some(e.at(x).to_string());
                break;
            }
        }
    }
    if failure.is_none() {
        if let Some(w) = values.windows(2).find(|w| w[1].abs() > w[0].abs()) {
            failure = Some(format!("magnitude grows from {:e} to {:e}", w[0], w[1]));
        } else if let Some(&last) = values.last() {
            if !(last.abs() < LIMIT_THRESHOLD) {
                failure = Some(format!(
                    "|value| = {:e} at x = {:e} is not below {LIMIT_THRESHOLD:e}",
                    last.abs(),
                    LIMIT_POINTS[LIMIT_POINTS.len() - 1]
                ));
            }
        }
    }
    LimitDiagnostic {
        expr,
        points: LIMIT_POINTS.to_vec(),
        values,
        passed: failure.is_none(),
        failure,
    }
}

/// x² m′(x), with m′ from the Mills-ratio equation.
pub fn x2_mills_prime(model: &DistributionModel, x: f64) -> Result<f64> {
    Ok(x * x * model.mills_prime(x)?)
}

/// Direction of x² m′ on `grid`; increasing means m(1/x) is convex.
pub fn x2mprime_probe(model: &DistributionModel, grid: &[f64], slack: f64) -> Result<MonotonicityReport> {
    monotonicity_probe(&|x| x2_mills_prime(model, x), grid, slack)
}

/// m′ + ω m + 1 with m′ from the sixth-order seven-point central
/// difference of step 3e-3·x.
pub fn ode_residual(model: &DistributionModel, x: f64) -> Result<f64> {
    let h = 3e-3 * x;
    let m = |k: f64| model.mills(x + k * h);
    let d = (45.0 * (m(1.0)? - m(-1.0)?) - 9.0 * (m(2.0)? - m(-2.0)?) + (m(3.0)? - m(-3.0)?)) / (60.0 * h);
    Ok(d + model.omega(x)? * model.mills(x)? + 1.0)
}
