//! Scaled complementary error function after W. J. Cody's rational
//! Chebyshev approximations (Math. Comp. 23, 1969).

const THRESHOLD: f64 = 0.46875;
const ONE_OVER_SQRT_PI: f64 = 0.564_189_583_547_756_286_95;

#[allow(clippy::excessive_precision)]
const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_156,
    377.485_237_685_302_021,
    3_209.377_589_138_469_47,
    0.185_777_706_184_603_153,
];
#[allow(clippy::excessive_precision)]
const B: [f64; 4] = [
    23.601_290_952_344_120_9,
    244.024_637_934_444_173,
    1_282.616_526_077_372_28,
    2_844.236_833_439_170_62,
];
#[allow(clippy::excessive_precision)]
const C: [f64; 9] = [
    0.564_188_496_988_670_089,
    8.883_149_794_388_375_94,
    66.119_190_637_141_629_5,
    298.635_138_197_400_131,
    881.952_221_241_769_09,
    1_712.047_612_634_070_58,
    2_051.078_377_826_071_47,
    1_230.339_354_797_997_25,
    2.153_115_354_744_038_46e-8,
];
#[allow(clippy::excessive_precision)]
const D: [f64; 8] = [
    15.744_926_110_709_834_7,
    117.693_950_891_312_499,
    537.181_101_862_009_858,
    1_621.389_574_566_690_19,
    3_290.799_235_733_459_63,
    4_362.619_090_143_247_16,
    3_439.367_674_143_721_64,
    1_230.339_354_803_749_42,
];
#[allow(clippy::excessive_precision)]
const P: [f64; 6] = [
    0.305_326_634_961_232_344,
    0.360_344_899_949_804_439,
    0.125_781_726_111_229_246,
    0.016_083_785_148_742_276_6,
    6.587_491_615_298_378_03e-4,
    0.016_315_387_137_302_097_8,
];
#[allow(clippy::excessive_precision)]
const Q: [f64; 5] = [
    2.568_520_192_289_822_42,
    1.872_952_849_923_460_47,
    0.527_905_102_951_428_412,
    0.060_518_341_312_441_319_1,
    0.002_335_204_976_268_691_85,
];

fn small_ratio(z: f64) -> f64 {
    ((((A[4] * z + A[0]) * z + A[1]) * z + A[2]) * z + A[3])
        / ((((z + B[0]) * z + B[1]) * z + B[2]) * z + B[3])
}

fn mid_ratio(y: f64) -> f64 {
    let num = C[..8].iter().fold(C[8], |acc, &c| acc * y + c);
    let den = D.iter().fold(1.0, |acc, &d| acc * y + d);
    num / den
}

fn tail_ratio(z: f64) -> f64 {
    let num = P[..5].iter().fold(P[5], |acc, &p| acc * z + p);
    let den = Q.iter().fold(1.0, |acc, &q| acc * z + q);
    z * num / den
}

/// `exp(-y*y)` with the square split so that the leading part is exact.
pub(crate) fn exp_neg_square(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    (-head * head).exp() * (-(y - head) * (y + head)).exp()
}

fn exp_pos_square(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    (head * head).exp() * ((y - head) * (y + head)).exp()
}

/// erfcx(x) = exp(x²)·erfc(x). Overflows to +inf for x below about -26.6.
pub fn erfcx(x: f64) -> f64 {
    let y = x.abs();
    if y <= THRESHOLD {
        let z = y * y;
        return z.exp() * (1.0 - x * small_ratio(z));
    }
    let positive = if y <= 4.0 {
        mid_ratio(y)
    } else {
        (ONE_OVER_SQRT_PI - tail_ratio(1.0 / (y * y))) / y
    };
    if x < 0.0 {
        2.0 * exp_pos_square(y) - positive
    } else {
        positive
    }
}

/// erfc(x) for x >= 0 without forming 1 - erf(x).
pub(crate) fn erfc_nonneg(y: f64) -> f64 {
    debug_assert!(y >= 0.0);
    if y <= THRESHOLD {
        1.0 - y * small_ratio(y * y)
    } else {
        erfcx(y) * exp_neg_square(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfcx_at_zero_is_one() {
        assert_eq!(erfcx(0.0), 1.0);
    }

    #[test]
    fn reflection_identity() {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x)
        for &x in &[0.1, 0.3, 0.7, 1.5, 3.0, 5.0] {
            let lhs = erfcx(-x);
            let rhs = 2.0 * (x * x).exp() - erfcx(x);
            assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs(), "x = {x}");
        }
    }

    #[test]
    fn continuity_across_branch_points() {
        for &b in &[THRESHOLD, 4.0] {
            let (xl, xh) = (b * (1.0 - 1e-14), b * (1.0 + 1e-14));
            let (lo, hi) = (erfcx(xl), erfcx(xh));
            // erfcx' = 2x erfcx - 2/sqrt(pi)
            let slope = 2.0 * b * lo - 2.0 * ONE_OVER_SQRT_PI;
            let jump = hi - lo - slope * (xh - xl);
            assert!(jump.abs() < 1e-15 * lo, "branch {b}: {lo} vs {hi}");
        }
    }

    #[test]
    fn large_argument_asymptote() {
        // erfcx(y) ~ 1/(y sqrt(pi)) (1 - 1/(2y^2))
        let y = 1e4;
        let approx = ONE_OVER_SQRT_PI / y * (1.0 - 0.5 / (y * y));
        assert!((erfcx(y) - approx).abs() < 1e-15 * approx);
    }
}
