//! Log-gamma and the incomplete gamma kernels.
//!
//! Three evaluation regimes for Γ(a, x):
//! - x >= a + 1: Legendre continued fraction (modified Lentz). The fraction
//!   yields m = Γ(a,x)·x^{1-a}·e^x = x·cf directly, so the Mills ratio never
//!   touches e^x there.
//! - x < a + 1, a >= 1: power series for γ(a, x), Γ(a,x) = Γ(a) - γ(a,x).
//! - x < a + 1, a < 1: Γ(a) - x^a/a is formed from Γ(1+a) - 1 and
//!   expm1(a ln x) so the O(1/a) parts cancel analytically.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

const LANCZOS_R: f64 = 10.900511;
#[allow(clippy::excessive_precision)]
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];
#[allow(clippy::excessive_precision)]
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_222_345_518_445_781_647_2;

/// Taylor coefficients of 1/Γ(1+a) - 1 = Σ_{k>=1} c_k a^k.
#[allow(clippy::excessive_precision)]
const RGAMMA1P: [f64; 29] = [
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
    1.714_406_321_927_337_433_4e-20,
];

const MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

/// ln Γ(x) for x > 0 (Lanczos approximation, Pugh's r = 10.900511 set).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |s, (k, &d)| s + d / (k as f64 - x));
        PI.ln()
            - (PI * x).sin().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - x) * ((0.5 - x + LANCZOS_R) / E).ln()
    } else {
        let s = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |s, (k, &d)| s + d / (x + k as f64 - 1.0));
        s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / E).ln()
    }
}

/// Γ(x) for x > 0; overflows to +inf above x ≈ 171.6.
pub fn gamma(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 1.0;
    }
    ln_gamma(x).exp()
}

/// Γ(1+a) - 1 for |a| <= 1 without cancellation.
pub(crate) fn gamma1p_minus_one(a: f64) -> f64 {
    let r = a * RGAMMA1P
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * a + c);
    -r / (1.0 + r)
}

/// Which algorithm produced an incomplete gamma value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Regime {
    ContinuedFraction,
    Series,
    SmallShape,
}

/// Γ(a, x) together with the Mills ratio m = Γ(a,x)·x^{1-a}·e^x.
#[derive(Debug, Clone, Copy)]
pub(crate) struct UpperGamma {
    pub value: f64,
    /// ln Γ(a, x); finite even where `value` underflows.
    pub ln_value: f64,
    pub mills: f64,
    /// Γ(a) / Γ(a,x): amplification of rounding from the subtraction step.
    pub cancellation: f64,
}

pub(crate) fn regime(a: f64, x: f64) -> Regime {
    if x >= a + 1.0 {
        Regime::ContinuedFraction
    } else if a < 1.0 {
        Regime::SmallShape
    } else {
        Regime::Series
    }
}

/// γ(a, x) by its power series, x^a e^{-x} Σ x^n / (a (a+1) ... (a+n)).
pub(crate) fn lower_series(a: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            return Ok(sum * (a * x.ln() - x).exp());
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma series",
        a,
        x,
    })
}

/// Continued fraction value h with Γ(a, x) = e^{-x} x^a h.
fn upper_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma continued fraction",
        a,
        x,
    })
}

/// Γ(a, x) for a < 1, 0 < x < a + 1, with the magnitude of the summands.
fn upper_small_shape(a: f64, x: f64) -> (f64, f64) {
    let lnx = x.ln();
    // x^a Σ_{n>=1} (-x)^n / (n! (a + n))
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..MAX_ITER {
        let nf = n as f64;
        term *= -x / nf;
        let contrib = term / (a + nf);
        sum += contrib;
        if contrib.abs() <= sum.abs() * f64::EPSILON {
            break;
        }
    }
    let head = (gamma1p_minus_one(a) - (a * lnx).exp_m1()) / a;
    let tail = (a * lnx).exp() * sum;
    (head - tail, head.abs() + tail.abs())
}

pub(crate) fn upper(a: f64, x: f64) -> Result<UpperGamma> {
    debug_assert!(a > 0.0 && x >= 0.0);
    let gamma_a = gamma(a);
    if x == 0.0 {
        return Ok(UpperGamma {
            value: gamma_a,
            ln_value: ln_gamma(a),
            mills: f64::INFINITY,
            cancellation: 1.0,
        });
    }
    let lnx = x.ln();
    match regime(a, x) {
        Regime::ContinuedFraction => {
            let h = upper_fraction(a, x)?;
            let ln_value = a * lnx - x + h.ln();
            Ok(UpperGamma {
                value: (a * lnx - x).exp() * h,
                ln_value,
                mills: x * h,
                cancellation: 1.0,
            })
        }
        r => {
            let (value, scale) = match r {
                Regime::SmallShape => upper_small_shape(a, x),
                _ => (gamma_a - lower_series(a, x)?, gamma_a),
            };
            let cancellation = scale / value;
            let ln_value = value.ln();
            Ok(UpperGamma {
                value,
                ln_value,
                mills: mills_from_parts(value, ln_value, a, x),
                cancellation,
            })
        }
    }
}

/// Γ(a,x)·x^{1-a}·e^x, switching to log space when any factor passes 1e300.
fn mills_from_parts(value: f64, ln_value: f64, a: f64, x: f64) -> f64 {
    const BIG: f64 = 1e300;
    let power = x.powf(1.0 - a);
    let growth = x.exp();
    let direct = value * power * growth;
    if power.abs() > BIG || growth > BIG || value > BIG || !direct.is_finite() || direct > BIG {
        (ln_value + (1.0 - a) * x.ln() + x).exp()
    } else {
        direct
    }
}
