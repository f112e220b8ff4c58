//! Semi-infinite adaptive quadrature and the integral representations of
//! the normal and gamma Mills ratios.
//!
//! `∫_lower^∞ f(t) dt` is computed on (0, 1) after two substitutions:
//! t = lower + w² removes an integrable (t - lower)^{-1/2} endpoint
//! singularity, and w = v/(1 - v) compacts the half line. The compact
//! interval is then refined by globally adaptive 15-point Gauss-Kronrod.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::ShapeParam;

pub const DEFAULT_TARGET_ABS_ERR: f64 = 1e-11;
pub const PANEL_BUDGET: usize = 1 << 15;

/// Relative tolerance used by the Mills-ratio representations on top of
/// the absolute target, so large values (small x, large α) stay reachable.
const REPRESENTATION_REL_ERR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    fn exact_zero() -> Self {
        QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        }
    }

    fn scaled(self, factor: f64) -> Self {
        QuadratureResult {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One Gauss-Kronrod (7, 15) panel with the QUADPACK error heuristic.
fn gauss_kronrod<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [0.0; 15];
    for (k, &node) in XGK.iter().enumerate() {
        if k == 7 {
            fv[7] = g(center);
        } else {
            fv[k] = g(center - half * node);
            fv[14 - k] = g(center + half * node);
        }
    }
    if let Some(bad) = fv.iter().position(|v| !v.is_finite()) {
        let offset = if bad <= 7 { -XGK[bad] } else { XGK[14 - bad] };
        return Err(Error::Domain {
            what: "integrand is not finite at abscissa",
            value: center + half * offset,
        });
    }
    let mut kronrod = WGK[7] * fv[7];
    let mut gauss = WG[3] * fv[7];
    let mut abs_sum = WGK[7] * fv[7].abs();
    for k in 0..7 {
        let pair = fv[k] + fv[14 - k];
        kronrod += WGK[k] * pair;
        abs_sum += WGK[k] * (fv[k].abs() + fv[14 - k].abs());
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fv[7] - mean).abs();
    for k in 0..7 {
        asc += WGK[k] * ((fv[k] - mean).abs() + (fv[14 - k] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, err })
}

/// Acceptance rule: err <= max(abs, rel·|value|).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

/// Globally adaptive integration of `g` over [0, 1] starting from `cuts`.
fn adaptive_unit<G: Fn(f64) -> f64>(g: &G, cuts: &[f64], tol: Tolerance) -> Result<QuadratureResult> {
    let mut edges = vec![0.0];
    edges.extend(cuts.iter().copied().filter(|c| *c > 0.0 && *c < 1.0));
    edges.push(1.0);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    for w in edges.windows(2) {
        heap.push(gauss_kronrod(g, w[0], w[1])?);
    }
    let mut evaluations = 15 * heap.len();

    let totals = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| {
        let mut panels: Vec<&Panel> = heap.iter().chain(frozen.iter()).collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
    };

    let (mut value, mut err) = totals(&heap, &frozen);
    let mut since_resum = 0usize;
    loop {
        if err <= tol.abs.max(tol.rel * value.abs()) {
            break;
        }
        if heap.len() + frozen.len() >= PANEL_BUDGET {
            return Err(Error::Accuracy {
                best: value,
                abs_error_estimate: err,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else {
            // every remaining panel is at the resolution limit
            return Err(Error::Accuracy {
                best: value,
                abs_error_estimate: err,
                evaluations,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            continue;
        }
        let left = gauss_kronrod(g, worst.a, mid)?;
        let right = gauss_kronrod(g, mid, worst.b)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        since_resum += 1;
        if since_resum == 256 {
            (value, err) = heap
                .iter()
                .chain(frozen.iter())
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
            since_resum = 0;
        }
    }
    let (value, err) = totals(&heap, &frozen);
    Ok(QuadratureResult {
        value,
        abs_error_estimate: err,
        evaluations,
    })
}

/// Maps t in [lower, ∞) to v in [0, 1).
fn to_unit(t: f64, lower: f64) -> f64 {
    let w = (t - lower).max(0.0).sqrt();
    w / (1.0 + w)
}

pub(crate) fn semi_infinite<F: Fn(f64) -> f64>(
    integrand: F,
    lower: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<QuadratureResult> {
    if !lower.is_finite() {
        return Err(Error::Domain {
            what: "lower integration limit must be finite",
            value: lower,
        });
    }
    if !(tol.abs > 0.0) {
        return Err(Error::Domain {
            what: "target absolute error must be positive",
            value: tol.abs,
        });
    }
    let g = |v: f64| {
        let one_minus = 1.0 - v;
        let w = v / one_minus;
        let jac = 2.0 * w / (one_minus * one_minus);
        let fx = integrand(lower + w * w);
        if fx == 0.0 {
            0.0
        } else {
            fx * jac
        }
    };
    let cuts: Vec<f64> = breaks
        .iter()
        .filter(|b| b.is_finite() && **b > lower)
        .map(|&b| to_unit(b, lower))
        .collect();
    adaptive_unit(&g, &cuts, tol)
}

/// ∫_lower^∞ integrand(t) dt to the requested absolute error.
///
/// An integrable (t - lower)^{-1/2} singularity at `lower` is allowed; the
/// integrand is never evaluated at `lower` itself.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    integrand: F,
    lower: f64,
    target_abs_err: f64,
) -> Result<QuadratureResult> {
    integrate_semi_infinite_with_breaks(integrand, lower, &[], target_abs_err)
}

/// As [`integrate_semi_infinite`], seeding the subdivision with `breaks`
/// where the integrand is known to change scale.
pub fn integrate_semi_infinite_with_breaks<F: Fn(f64) -> f64>(
    integrand: F,
    lower: f64,
    breaks: &[f64],
    target_abs_err: f64,
) -> Result<QuadratureResult> {
    semi_infinite(
        integrand,
        lower,
        breaks,
        Tolerance {
            abs: target_abs_err,
            rel: 0.0,
        },
    )
}

/// The integral representations of Mills ratios used as oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// m(x) = ∫_0^∞ e^{-xt} e^{-t²/2} dt
    LaplaceNormal,
    /// m(x) = 2 ∫_0^∞ x/(x² + t²) φ(t) dt
    CauchyNormal,
    /// h(x) = m(√x)/√x = (2π)^{-1/2} ∫_0^∞ e^{-s/2} / ((x + s) √s) ds
    StieltjesH,
    /// m(x; α) = ∫_1^∞ x u^{α-1} e^{(1-u)x} du
    GammaShift,
    /// m(x; α) = ∫_0^∞ (1 + u/x)^{α-1} e^{-u} du
    GammaScaled,
}

impl Representation {
    pub const ALL: [Representation; 5] = [
        Representation::LaplaceNormal,
        Representation::CauchyNormal,
        Representation::StieltjesH,
        Representation::GammaShift,
        Representation::GammaScaled,
    ];

    pub fn needs_shape(self) -> bool {
        matches!(self, Representation::GammaShift | Representation::GammaScaled)
    }
}

fn representation_tol() -> Tolerance {
    Tolerance {
        abs: DEFAULT_TARGET_ABS_ERR,
        rel: REPRESENTATION_REL_ERR,
    }
}

fn positive_x(x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain {
            what: "representation needs a finite x > 0",
            value: x,
        })
    }
}

/// Evaluates a Mills-ratio representation by quadrature.
///
/// `alpha` must be present exactly for the gamma representations.
/// `LaplaceNormal` also accepts x = 0.
pub fn mills_reference(
    rep: Representation,
    alpha: Option<ShapeParam>,
    x: f64,
) -> Result<QuadratureResult> {
    match (rep.needs_shape(), alpha) {
        (true, None) => {
            return Err(Error::Usage(format!(
                "representation {rep:?} needs a gamma shape"
            )))
        }
        (false, Some(_)) => {
            return Err(Error::Usage(format!(
                "representation {rep:?} takes no gamma shape"
            )))
        }
        _ => {}
    }
    let tol = representation_tol();
    match rep {
        Representation::LaplaceNormal => {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::Domain {
                    what: "Laplace representation needs a finite x >= 0",
                    value: x,
                });
            }
            let breaks: Vec<f64> = if x > 1.0 { vec![10.0 / x] } else { vec![] };
            semi_infinite(|t| (-x * t - 0.5 * t * t).exp(), 0.0, &breaks, tol)
        }
        Representation::CauchyNormal => {
            let x = positive_x(x)?;
            let c = 2.0 / (2.0 * PI).sqrt();
            let breaks: Vec<f64> = if x < 10.0 { vec![x] } else { vec![] };
            semi_infinite(|t| c * x / (x * x + t * t) * (-0.5 * t * t).exp(), 0.0, &breaks, tol)
        }
        Representation::StieltjesH => {
            let x = positive_x(x)?;
            let c = 1.0 / (2.0 * PI).sqrt();
            let breaks: Vec<f64> = if x < 10.0 { vec![x] } else { vec![] };
            semi_infinite(|s| c * (-0.5 * s).exp() / ((x + s) * s.sqrt()), 0.0, &breaks, tol)
        }
        Representation::GammaShift => {
            let x = positive_x(x)?;
            let a = alpha.map(ShapeParam::get).unwrap_or_default();
            let lnx = x.ln();
            semi_infinite(
                |u| (lnx + (a - 1.0) * u.ln() + (1.0 - u) * x).exp(),
                1.0,
                &[1.0 + 10.0 / x],
                tol,
            )
        }
        Representation::GammaScaled => {
            let x = positive_x(x)?;
            let a = alpha.map(ShapeParam::get).unwrap_or_default();
            let breaks: Vec<f64> = if x < 10.0 { vec![x] } else { vec![] };
            semi_infinite(
                |u| ((a - 1.0) * (u / x).ln_1p() - u).exp(),
                0.0,
                &breaks,
                tol,
            )
        }
    }
}

/// x²m′(x) (order 0) or its derivative [x²m′(x)]′ (order 1) for the gamma
/// law, from the scaled integral representation.
pub fn gamma_x2mprime_reference(alpha: ShapeParam, x: f64, order: u8) -> Result<QuadratureResult> {
    let x = positive_x(x)?;
    let a = alpha.get();
    let breaks: Vec<f64> = if x < 10.0 { vec![x] } else { vec![] };
    match order {
        0 => {
            let factor = -(a - 1.0);
            if factor == 0.0 {
                return Ok(QuadratureResult::exact_zero());
            }
            let q = semi_infinite(
                |u| ((a - 2.0) * (u / x).ln_1p() + u.ln() - u).exp(),
                0.0,
                &breaks,
                representation_tol(),
            )?;
            Ok(q.scaled(factor))
        }
        1 => {
            let factor = (a - 1.0) * (a - 2.0);
            if factor == 0.0 {
                return Ok(QuadratureResult::exact_zero());
            }
            let q = semi_infinite(
                |u| ((a - 3.0) * (u / x).ln_1p() + 2.0 * (u / x).ln() - u).exp(),
                0.0,
                &breaks,
                representation_tol(),
            )?;
            Ok(q.scaled(factor))
        }
        _ => Err(Error::Usage(format!(
            "x²m′ reference order must be 0 or 1, got {order}"
        ))),
    }
}

/// m″(x; α) = (α - 1) ∫_1^∞ (1 - u)² u^{α-2} e^{(1-u)x} du.
pub fn gamma_msecond_reference(alpha: ShapeParam, x: f64) -> Result<QuadratureResult> {
    let x = positive_x(x)?;
    let a = alpha.get();
    let factor = a - 1.0;
    if factor == 0.0 {
        return Ok(QuadratureResult::exact_zero());
    }
    let q = semi_infinite(
        |u| (2.0 * (u - 1.0).ln() + (a - 2.0) * u.ln() + (1.0 - u) * x).exp(),
        1.0,
        &[1.0 + 10.0 / x],
        representation_tol(),
    )?;
    Ok(q.scaled(factor))
}
