//! The four-term mean chain for reciprocally convex and concave functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::normal_mills;

pub const CHAIN_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainDirection {
    /// f(H) ≤ (f(x)+f(y))/2 ≤ f(A) ≤ (x f(x) + y f(y))/(x+y)
    ConvexChain,
    /// All three inequalities reversed.
    ConcaveChain,
}

impl ChainDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            ChainDirection::ConvexChain => "convex_chain",
            ChainDirection::ConcaveChain => "concave_chain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainVerdict {
    Holds,
    HoldsWithEquality,
    Violated,
}

impl ChainVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            ChainVerdict::Holds => "holds",
            ChainVerdict::HoldsWithEquality => "holds_with_equality",
            ChainVerdict::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub x: f64,
    pub y: f64,
    pub term_harmonic: f64,
    pub term_average: f64,
    pub term_arithmetic: f64,
    pub term_weighted: f64,
    pub direction: ChainDirection,
    pub verdict: ChainVerdict,
    /// Consecutive gaps oriented so that a positive gap agrees with `direction`.
    pub gaps: [f64; 3],
    pub tolerance: f64,
    /// Largest amount by which a gap falls below zero; 0 when the chain holds.
    pub max_violation: f64,
}

impl ChainReport {
    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn eval_at<F>(f: &F, t: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    match f(t) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(Error::Domain {
            what: "chain term is not finite",
            value: v,
        }
        .at(t)),
        Err(e) => Err(e.at(t)),
    }
}

/// Evaluates the chain for `f` at the pair (x, y).
pub fn chain_terms<F>(f: &F, x: f64, y: f64, direction: ChainDirection) -> Result<ChainReport>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    for v in [x, y] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain {
                what: "chain abscissae must be finite and positive",
                value: v,
            });
        }
    }
    let (fx, fy) = (eval_at(f, x)?, eval_at(f, y)?);
    let s = x + y;
    let term_harmonic = eval_at(f, 2.0 * x * y / s)?;
    let term_average = 0.5 * (fx + fy);
    let term_arithmetic = eval_at(f, 0.5 * s)?;
    let term_weighted = (x * fx + y * fy) / s;
    let terms = [term_harmonic, term_average, term_arithmetic, term_weighted];
    let sign = match direction {
        ChainDirection::ConvexChain => 1.0,
        ChainDirection::ConcaveChain => -1.0,
    };
    let gaps = [
        sign * (terms[1] - terms[0]),
        sign * (terms[2] - terms[1]),
        sign * (terms[3] - terms[2]),
    ];
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let tolerance = CHAIN_REL_TOL * (1.0 + scale);
    let max_violation = gaps.iter().fold(0.0f64, |m, &g| m.max(-g));
    let spread = terms.iter().fold(f64::NEG_INFINITY, |m, &t| m.max(t))
        - terms.iter().fold(f64::INFINITY, |m, &t| m.min(t));
    let verdict = if spread <= tolerance {
        ChainVerdict::HoldsWithEquality
    } else if max_violation <= tolerance {
        ChainVerdict::Holds
    } else {
        ChainVerdict::Violated
    };
    Ok(ChainReport {
        x,
        y,
        term_harmonic,
        term_average,
        term_arithmetic,
        term_weighted,
        direction,
        verdict,
        gaps,
        tolerance,
        max_violation,
    })
}

/// h(x) = m(√x)/√x for the normal Mills ratio m.
pub fn mills_h(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain {
            what: "h needs a finite x > 0",
            value: x,
        });
    }
    let r = x.sqrt();
    Ok(normal_mills(r)?.value / r)
}

/// The reversed chain for h(x) = m(√x)/√x.
pub fn theorem1_chain(x: f64, y: f64) -> Result<ChainReport> {
    chain_terms(&mills_h, x, y, ChainDirection::ConcaveChain)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub direction: ChainDirection,
    pub seed: u64,
    pub range: (f64, f64),
    pub samples: usize,
    pub passes: usize,
    pub equalities: usize,
    pub failures: usize,
    /// Pair with the smallest oriented gap; ties go to smaller x, then smaller y.
    pub worst: ChainReport,
    pub reports: Vec<ChainReport>,
}

/// Draws `n_samples` log-uniform pairs from `range` with a seeded ChaCha8
/// stream and evaluates the chain for each. Violations are counted, not raised.
pub fn random_chain_suite<F>(
    f: &F,
    direction: ChainDirection,
    n_samples: usize,
    seed: u64,
    range: (f64, f64),
) -> Result<SuiteSummary>
where
    F: Fn(f64) -> Result<f64> + Sync + ?Sized,
{
    let (lo, hi) = range;
    if n_samples == 0 {
        return Err(Error::Usage("chain suite needs at least one sample".into()));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Usage(format!("invalid chain range [{lo}, {hi}]")));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        if lo == hi {
            lo
        } else {
            (llo + rng.gen::<f64>() * (lhi - llo)).exp().clamp(lo, hi)
        }
    };
    let pairs: Vec<(f64, f64)> = (0..n_samples).map(|_| (draw(), draw())).collect();
    let reports = pairs
        .par_iter()
        .map(|&(x, y)| chain_terms(f, x, y, direction))
        .collect::<Result<Vec<_>>>()?;
    let count = |v: ChainVerdict| reports.iter().filter(|r| r.verdict == v).count();
    let worst = *reports
        .iter()
        .min_by(|a, b| {
            a.min_gap()
                .total_cmp(&b.min_gap())
                .then(a.x.total_cmp(&b.x))
                .then(a.y.total_cmp(&b.y))
        })
        .expect("at least one sample");
    Ok(SuiteSummary {
        direction,
        seed,
        range,
        samples: n_samples,
        passes: count(ChainVerdict::Holds) + count(ChainVerdict::HoldsWithEquality),
        equalities: count(ChainVerdict::HoldsWithEquality),
        failures: count(ChainVerdict::Violated),
        worst,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma_mills, ShapeParam};

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn identity_chain() {
        let r = chain_terms(&|t| Ok(t), 1.0, 2.0, ChainDirection::ConvexChain).unwrap();
        let want = [4.0 / 3.0, 1.5, 1.5, 5.0 / 3.0];
        let got = [r.term_harmonic, r.term_average, r.term_arithmetic, r.term_weighted];
        for (g, w) in got.iter().zip(want) {
            assert!(close(*g, w, 1e-15));
        }
        assert_eq!(r.verdict, ChainVerdict::Holds);
    }

    #[test]
    fn diagonal_is_equality() {
        let r = chain_terms(&|t: f64| Ok(t.sin()), 1.0, 1.0, ChainDirection::ConvexChain).unwrap();
        assert_eq!(r.verdict, ChainVerdict::HoldsWithEquality);
        assert_eq!(theorem1_chain(2.0, 2.0).unwrap().verdict, ChainVerdict::HoldsWithEquality);
    }

    #[test]
    fn theorem1_regressions() {
        let cases = [
            (1.0, 4.0, [0.45404474278795541, 0.43318207853141285, 0.31497562733049821, 0.29968360019898148]),
            (0.01, 100.0, [7.9450824082964180, 5.8012634279172682, 0.019619959956588125, 0.011061015945197409]),
        ];
        for (x, y, want) in cases {
            let r = theorem1_chain(x, y).unwrap();
            assert_eq!(r.verdict, ChainVerdict::Holds);
            let got = [r.term_harmonic, r.term_average, r.term_arithmetic, r.term_weighted];
            for (g, w) in got.iter().zip(want) {
                assert!(close(*g, w, 1e-12), "{g} vs {w}");
            }
            assert!(r.gaps.iter().all(|&g| g > 1e-3));
        }
    }

    #[test]
    fn gamma_half_convex_chain() {
        let a = ShapeParam::new(0.5).unwrap();
        let r = chain_terms(&|t| Ok(gamma_mills(a, t)?.value), 1.0, 4.0, ChainDirection::ConvexChain).unwrap();
        let want = [0.81772952067644969, 0.83161312805183063, 0.86539258651510230, 0.87585771119814175];
        let got = [r.term_harmonic, r.term_average, r.term_arithmetic, r.term_weighted];
        for (g, w) in got.iter().zip(want) {
            assert!(close(*g, w, 1e-12), "{g} vs {w}");
        }
        assert_eq!(r.verdict, ChainVerdict::Holds);
        assert!(r.gaps.iter().all(|&g| g > 1e-3));
    }

    #[test]
    fn wrong_direction_is_violated() {
        let r = chain_terms(&mills_h, 1.0, 4.0, ChainDirection::ConvexChain).unwrap();
        assert_eq!(r.verdict, ChainVerdict::Violated);
        assert!(r.max_violation > 1e-3);
    }

    #[test]
    fn suite_is_deterministic() {
        let a = random_chain_suite(&mills_h, ChainDirection::ConcaveChain, 64, 7, (1e-2, 50.0)).unwrap();
        let b = random_chain_suite(&mills_h, ChainDirection::ConcaveChain, 64, 7, (1e-2, 50.0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.failures, 0);
        let c = random_chain_suite(&mills_h, ChainDirection::ConcaveChain, 64, 8, (1e-2, 50.0)).unwrap();
        assert_ne!(a.reports[0].x, c.reports[0].x);
    }

    #[test]
    fn degenerate_range() {
        let s = random_chain_suite(&mills_h, ChainDirection::ConcaveChain, 1, 0, (3.0, 3.0)).unwrap();
        assert_eq!(s.equalities, 1);
        assert_eq!(s.reports[0].verdict, ChainVerdict::HoldsWithEquality);
    }

    #[test]
    fn gamma_three_violates_convex_chain() {
        let a = ShapeParam::new(3.0).unwrap();
        let f = |t: f64| Ok(gamma_mills(a, t)?.value);
        let s = random_chain_suite(&f, ChainDirection::ConvexChain, 200, 42, (1e-2, 50.0)).unwrap();
        assert!(s.failures > 0);
        assert_eq!(s.worst.verdict, ChainVerdict::Violated);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(chain_terms(&mills_h, 0.0, 1.0, ChainDirection::ConcaveChain).is_err());
        assert!(random_chain_suite(&mills_h, ChainDirection::ConcaveChain, 0, 0, (1.0, 2.0)).is_err());
        assert!(random_chain_suite(&mills_h, ChainDirection::ConcaveChain, 5, 0, (2.0, 1.0)).is_err());
    }
}
