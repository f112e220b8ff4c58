//! Scalar kernels: the standard normal law, incomplete gamma functions and
//! the closed-form Mills ratios of the normal and gamma laws.
//!
//! Every kernel returns a [`SpecValue`] carrying an absolute error bound.
//! Inside the validated envelope the bound is the engineering target of the
//! kernel; outside it the bound is widened by [`EXTRAPOLATION_FACTOR`] and
//! the value is flagged.

mod erf;
mod gamma;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use erf::erfcx;
pub use gamma::{gamma, ln_gamma};

/// sqrt(π/2) = m(0) for the standard normal law.
#[allow(clippy::excessive_precision)]
pub const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_251_207_882_642_405_522_63;
#[allow(clippy::excessive_precision)]
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_87;

pub const EXTRAPOLATION_FACTOR: f64 = 1e3;

const NORMAL_SURVIVAL_REL: f64 = 1e-13;
const NORMAL_MILLS_REL: f64 = 1e-12;
const UPPER_GAMMA_REL: f64 = 1e-12;
const GAMMA_MILLS_REL: f64 = 1e-10;
const MAX_VALIDATED_SHAPE: f64 = 50.0;
const MAX_VALIDATED_X: f64 = 500.0;

/// Shape parameter α > 0 of the gamma law.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ShapeParam(f64);

impl ShapeParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(ShapeParam(alpha))
        } else {
            Err(Error::Domain {
                what: "gamma shape must be a finite positive number",
                value: alpha,
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ShapeParam {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        ShapeParam::new(alpha)
    }
}

impl From<ShapeParam> for f64 {
    fn from(p: ShapeParam) -> f64 {
        p.0
    }
}

/// A kernel value with its claimed absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecValue {
    pub value: f64,
    pub abs_error_bound: f64,
    /// Set when the arguments fall outside the validated envelope.
    pub extrapolated: bool,
}

impl SpecValue {
    fn relative(value: f64, rel: f64, extrapolated: bool) -> Self {
        let widen = if extrapolated { EXTRAPOLATION_FACTOR } else { 1.0 };
        SpecValue {
            value,
            abs_error_bound: (rel * widen * value.abs()).max(if value == 0.0 {
                f64::MIN_POSITIVE
            } else {
                0.0
            }),
            extrapolated,
        }
    }
}

fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain { what, value: x })
    }
}

/// exp(-x²/2) with the square split into an exactly representable head.
pub(crate) fn exp_neg_half_square(x: f64) -> f64 {
    let head = (x * 16.0).trunc() / 16.0;
    (-0.5 * head * head).exp() * (-0.5 * (x - head) * (x + head)).exp()
}

/// Standard normal density φ(x).
pub fn normal_density(x: f64) -> Result<f64> {
    let x = finite(x, "normal density needs a finite argument")?;
    Ok(INV_SQRT_2PI * exp_neg_half_square(x))
}

/// Standard normal survival function Φ̄(x) = 1 - Φ(x).
///
/// For x > 0 this is erfcx(x/√2)·exp(-x²/2)/2, never 1 - Φ(x). Results
/// below the smallest normal double (x ≳ 37.5) lose relative accuracy and
/// are flagged.
pub fn normal_survival(x: f64) -> Result<SpecValue> {
    let x = finite(x, "normal survival needs a finite argument")?;
    let value = if x >= 0.0 {
        0.5 * erfcx(x / std::f64::consts::SQRT_2) * exp_neg_half_square(x)
    } else {
        1.0 - 0.5 * erf::erfc_nonneg(-x / std::f64::consts::SQRT_2)
    };
    let extrapolated = x.abs() > 40.0 || value < f64::MIN_POSITIVE;
    Ok(SpecValue::relative(value, NORMAL_SURVIVAL_REL, extrapolated))
}

/// Mills ratio of the standard normal law, m(x) = Φ̄(x)/φ(x) = √(π/2)·erfcx(x/√2).
pub fn normal_mills(x: f64) -> Result<SpecValue> {
    let x = finite(x, "normal Mills ratio needs a finite argument")?;
    let value = SQRT_HALF_PI * erfcx(x / std::f64::consts::SQRT_2);
    let extrapolated = !(0.0..=40.0).contains(&x);
    Ok(SpecValue::relative(value, NORMAL_MILLS_REL, extrapolated))
}

fn check_gamma_x(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        Err(Error::Domain {
            what: "incomplete gamma needs x >= 0",
            value: x,
        })
    } else if x.is_infinite() {
        Err(Error::Domain {
            what: "incomplete gamma needs a finite x",
            value: x,
        })
    } else {
        Ok(x)
    }
}

fn gamma_envelope(alpha: f64, x: f64) -> bool {
    alpha > MAX_VALIDATED_SHAPE || x > MAX_VALIDATED_X
}

/// Upper incomplete gamma function Γ(α, x) = ∫_x^∞ t^{α-1} e^{-t} dt.
pub fn upper_incomplete_gamma(alpha: ShapeParam, x: f64) -> Result<SpecValue> {
    let x = check_gamma_x(x)?;
    let a = alpha.get();
    let up = gamma::upper(a, x)?;
    let rel = UPPER_GAMMA_REL + 8.0 * f64::EPSILON * up.cancellation;
    Ok(SpecValue::relative(up.value, rel, gamma_envelope(a, x)))
}

/// Lower incomplete gamma function γ(α, x) = Γ(α) - Γ(α, x), by its power
/// series when x < α + 1.
pub fn lower_incomplete_gamma(alpha: ShapeParam, x: f64) -> Result<SpecValue> {
    let x = check_gamma_x(x)?;
    let a = alpha.get();
    let value = if x < a + 1.0 {
        gamma::lower_series(a, x)?
    } else {
        gamma(a) - gamma::upper(a, x)?.value
    };
    Ok(SpecValue::relative(value, UPPER_GAMMA_REL, gamma_envelope(a, x)))
}

/// Mills ratio of the gamma law, m(x; α) = Γ(α, x)·x^{1-α}·e^x.
pub fn gamma_mills(alpha: ShapeParam, x: f64) -> Result<SpecValue> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "gamma Mills ratio needs a finite x > 0",
            value: x,
        });
    }
    let a = alpha.get();
    if a == 1.0 {
        // exponential law
        return Ok(SpecValue::relative(1.0, f64::EPSILON, false));
    }
    let up = gamma::upper(a, x)?;
    let rel = GAMMA_MILLS_REL + 8.0 * f64::EPSILON * up.cancellation;
    Ok(SpecValue::relative(up.mills, rel, gamma_envelope(a, x)))
}

/// ln Γ(α, x), finite where Γ(α, x) itself underflows.
pub fn ln_upper_incomplete_gamma(alpha: ShapeParam, x: f64) -> Result<f64> {
    let x = check_gamma_x(x)?;
    Ok(gamma::upper(alpha.get(), x)?.ln_value)
}
