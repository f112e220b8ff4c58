//! Reciprocal convexity certificates.

use serde::Serialize;

use super::monotone::{check_grid, classify, evaluate, Direction, MonotonicityReport};
use super::{
    exclusion_radius, limit_probe, omega_ratio, test_denominator, test_fn_a, test_fn_b, x2_mills_prime,
    LimitDiagnostic, LimitExpr, DEFAULT_SLACK,
};
use crate::distributions::{sign_change_roots, DistributionModel};
use crate::error::{Error, Result};
use crate::grid::log_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ReciprocallyConvex,
    StrictlyReciprocallyConvex,
    ReciprocallyConcave,
    StrictlyReciprocallyConcave,
    Neither,
    Inconclusive,
}

impl Verdict {
    fn convex(strict: bool) -> Self {
        if strict {
            Verdict::StrictlyReciprocallyConvex
        } else {
            Verdict::ReciprocallyConvex
        }
    }

    fn concave(strict: bool) -> Self {
        if strict {
            Verdict::StrictlyReciprocallyConcave
        } else {
            Verdict::ReciprocallyConcave
        }
    }

    pub fn is_convex_family(self) -> bool {
        matches!(self, Verdict::ReciprocallyConvex | Verdict::StrictlyReciprocallyConvex)
    }

    pub fn is_concave_family(self) -> bool {
        matches!(self, Verdict::ReciprocallyConcave | Verdict::StrictlyReciprocallyConcave)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ReciprocallyConvex => "reciprocally_convex",
            Verdict::StrictlyReciprocallyConvex => "strictly_reciprocally_convex",
            Verdict::ReciprocallyConcave => "reciprocally_concave",
            Verdict::StrictlyReciprocallyConcave => "strictly_reciprocally_concave",
            Verdict::Neither => "neither",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    PartA,
    PartB,
    DirectProbe,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::PartA => "part_a",
            Route::PartB => "part_b",
            Route::DirectProbe => "direct_probe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionOutcome {
    Monotonicity(MonotonicityReport),
    Limit(LimitDiagnostic),
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub passed: bool,
    pub outcome: ConditionOutcome,
}

impl Condition {
    pub fn direction(&self) -> Option<Direction> {
        match &self.outcome {
            ConditionOutcome::Monotonicity(r) => Some(r.direction),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteAttempt {
    pub route: Route,
    /// What this route alone concludes, if anything.
    pub verdict: Option<Verdict>,
    pub conditions: Vec<Condition>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    OmegaZero,
    DenominatorZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcludedInterval {
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    pub reason: ExclusionReason,
}

impl ExcludedInterval {
    fn around(center: f64, reason: ExclusionReason) -> Self {
        let r = exclusion_radius(center);
        ExcludedInterval {
            center,
            lo: center - r,
            hi: center + r,
            reason,
        }
    }

    fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Note {
    /// Every probe is constant, so both families hold at once (m affine or constant).
    BothFamilies,
    /// A later route reached a verdict different from the reported one.
    RoutesDisagree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSummary {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub slack: f64,
}

/// Result of [`certify_reciprocal`]. Claims hold on the sampled grid only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub model: String,
    pub verdict: Verdict,
    pub route: Option<Route>,
    /// Conditions of the route that fired (of the direct probe otherwise).
    pub conditions: Vec<Condition>,
    pub routes: Vec<RouteAttempt>,
    pub excluded_intervals: Vec<ExcludedInterval>,
    pub grid: GridSummary,
    pub notes: Vec<Note>,
}

impl Certificate {
    pub fn attempt(&self, route: Route) -> Option<&RouteAttempt> {
        self.routes.iter().find(|a| a.route == route)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyConfig {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub slack: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            grid_min: 1e-3,
            grid_max: 1e3,
            grid_points: 2000,
            slack: DEFAULT_SLACK,
        }
    }
}

fn excluded_intervals(model: &DistributionModel, grid: &[f64]) -> Vec<ExcludedInterval> {
    let mut out: Vec<ExcludedInterval> = model
        .omega_zeros()
        .iter()
        .map(|&z| ExcludedInterval::around(z, ExclusionReason::OmegaZero))
        .collect();
    let den = |x: f64| test_denominator(model, x).unwrap_or(f64::NAN);
    for z in sign_change_roots(&den, grid) {
        if !out.iter().any(|e| e.contains(z)) {
            out.push(ExcludedInterval::around(z, ExclusionReason::DenominatorZero));
        }
    }
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    out
}

/// Splits the grid into runs that avoid every excluded interval.
fn puncture(grid: &[f64], excluded: &[ExcludedInterval]) -> Vec<Vec<f64>> {
    let mut segments: Vec<Vec<f64>> = vec![Vec::new()];
    for &x in grid {
        let cut = match segments.last().and_then(|s| s.last()) {
            Some(&prev) => excluded.iter().any(|e| e.hi >= prev && e.lo <= x),
            None => false,
        };
        if excluded.iter().any(|e| e.contains(x)) {
            if !segments.last().unwrap().is_empty() {
                segments.push(Vec::new());
            }
            continue;
        }
        if cut && !segments.last().unwrap().is_empty() {
            segments.push(Vec::new());
        }
        segments.last_mut().unwrap().push(x);
    }
    segments.retain(|s| !s.is_empty());
    segments
}

fn probe_segments<F>(name: &'static str, f: &F, segments: &[Vec<f64>], slack: f64) -> Condition
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut runs = Vec::with_capacity(segments.len());
    for seg in segments {
        match evaluate(f, seg) {
            Ok(values) => runs.push(seg.iter().copied().zip(values).collect::<Vec<_>>()),
            Err(e) => {
                return Condition {
                    name,
                    passed: false,
                    outcome: ConditionOutcome::Failed { message: e.to_string() },
                }
            }
        }
    }
    let report = classify(&runs, slack);
    Condition {
        name,
        passed: report.direction != Direction::NotMonotone,
        outcome: ConditionOutcome::Monotonicity(report),
    }
}

fn limit_condition(model: &DistributionModel, expr: LimitExpr) -> Condition {
    let d = limit_probe(model, expr);
    Condition {
        name: expr.name(),
        passed: d.passed,
        outcome: ConditionOutcome::Limit(d),
    }
}

/// Applies the ω′/ω² versus test-function pairing. Returns the verdict and
/// whether both families held simultaneously.
fn pair(ratio: Direction, t: Direction) -> (Option<Verdict>, bool) {
    let convex = ratio.is_decreasing() && t.is_increasing();
    let concave = ratio.is_increasing() && t.is_decreasing();
    if convex {
        let strict = ratio == Direction::StrictlyDecreasing && t == Direction::StrictlyIncreasing;
        (Some(Verdict::convex(strict)), concave)
    } else if concave {
        let strict = ratio == Direction::StrictlyIncreasing && t == Direction::StrictlyDecreasing;
        (Some(Verdict::concave(strict)), false)
    } else {
        (None, false)
    }
}

fn theorem_part(route: Route, conditions: Vec<Condition>) -> (RouteAttempt, bool) {
    let n = conditions.len();
    let (ratio, t) = (conditions[n - 2].direction(), conditions[n - 1].direction());
    let mut both = false;
    let (verdict, reason) = if let Some(c) = conditions.iter().find(|c| !c.passed) {
        (None, Some(format!("condition {} failed", c.name)))
    } else {
        match (ratio, t) {
            (Some(r), Some(t)) => match pair(r, t) {
                (Some(v), b) => {
                    both = b;
                    (Some(v), None)
                }
                (None, _) => (
                    None,
                    Some(format!(
                        "omega_ratio is {} while {} is {}",
                        r.as_str(),
                        conditions[n - 1].name,
                        t.as_str()
                    )),
                ),
            },
            _ => (None, Some("probe evaluation failed".into())),
        }
    };
    (
        RouteAttempt {
            route,
            verdict,
            conditions,
            reason,
        },
        both,
    )
}

fn direct_probe(model: &DistributionModel, grid: &[f64], slack: f64) -> (RouteAttempt, bool) {
    // convexity of m from the divided differences between neighbours
    let slopes = match evaluate(&|x| model.mills(x), grid) {
        Ok(m) => {
            let run: Vec<(f64, f64)> = grid
                .windows(2)
                .zip(m.windows(2))
                .map(|(x, v)| (0.5 * (x[0] + x[1]), (v[1] - v[0]) / (x[1] - x[0])))
                .collect();
            let report = classify(&[run], slack);
            Condition {
                name: "mills_slopes",
                passed: report.direction != Direction::NotMonotone,
                outcome: ConditionOutcome::Monotonicity(report),
            }
        }
        Err(e) => Condition {
            name: "mills_slopes",
            passed: false,
            outcome: ConditionOutcome::Failed { message: e.to_string() },
        },
    };
    let x2 = probe_segments("x2_mills_prime", &|x| x2_mills_prime(model, x), &[grid.to_vec()], slack);
    let (s, r) = (slopes.direction(), x2.direction());
    let mut both = false;
    let (verdict, reason) = match (s, r) {
        (Some(s), Some(r)) => {
            let m_convex = s.is_increasing();
            let m_concave = s.is_decreasing();
            let inv_convex = r.is_increasing();
            let inv_concave = r.is_decreasing();
            let strict = s.is_strict() && r.is_strict();
            if m_concave && inv_convex {
                both = m_convex && inv_concave;
                (Some(Verdict::convex(strict)), None)
            } else if m_convex && inv_concave {
                (Some(Verdict::concave(strict)), None)
            } else {
                let not_convex = s == Direction::StrictlyIncreasing || r == Direction::StrictlyDecreasing;
                let not_concave = s == Direction::StrictlyDecreasing || r == Direction::StrictlyIncreasing;
                if not_convex && not_concave {
                    (Some(Verdict::Neither), None)
                } else {
                    (
                        None,
                        Some(format!("mills_slopes is {} and x2_mills_prime is {}", s.as_str(), r.as_str())),
                    )
                }
            }
        }
        _ => (None, Some("probe evaluation failed".into())),
    };
    (
        RouteAttempt {
            route: Route::DirectProbe,
            verdict,
            conditions: vec![slopes, x2],
            reason,
        },
        both,
    )
}

/// Certifies reciprocal convexity or concavity of the Mills ratio of `model`
/// on a log grid. Both theorem parts and the direct probe are always run;
/// the first of part (a), part (b), direct probe that reaches a verdict wins.
pub fn certify_reciprocal(model: &DistributionModel, config: &CertifyConfig) -> Result<Certificate> {
    if !(config.slack >= 0.0 && config.slack.is_finite()) {
        return Err(Error::Usage(format!("slack must be finite and >= 0, got {}", config.slack)));
    }
    let grid = log_grid(config.grid_min, config.grid_max, config.grid_points)?;
    check_grid(&grid)?;
    let slack = config.slack;
    let excluded = excluded_intervals(model, &grid);
    let segments = puncture(&grid, &excluded);

    let ratio = || probe_segments("omega_ratio", &|x| omega_ratio(model, x), &segments, slack);
    let (part_a, both_a) = theorem_part(
        Route::PartA,
        vec![
            limit_condition(model, LimitExpr::FOverOmega),
            ratio(),
            probe_segments("test_fn_a", &|x| test_fn_a(model, x), &segments, slack),
        ],
    );
    let (part_b, both_b) = theorem_part(
        Route::PartB,
        vec![
            limit_condition(model, LimitExpr::FOverOneMinusXOmega),
            limit_condition(model, LimitExpr::XfOverOneMinusXOmega),
            limit_condition(model, LimitExpr::FOverOmega),
            ratio(),
            probe_segments("test_fn_b", &|x| test_fn_b(model, x), &segments, slack),
        ],
    );
    let (direct, both_d) = direct_probe(model, &grid, slack);

    let attempts = [(part_a, both_a), (part_b, both_b), (direct, both_d)];
    let winner = attempts.iter().position(|(a, _)| a.verdict.is_some());
    let mut notes = Vec::new();
    let (verdict, route, conditions) = match winner {
        Some(i) => {
            let (a, both) = &attempts[i];
            let v = a.verdict.unwrap();
            if *both {
                notes.push(Note::BothFamilies);
            }
            let disagree = attempts[i + 1..]
                .iter()
                .filter_map(|(a, _)| a.verdict)
                .any(|w| w != v && !(w.is_convex_family() && v.is_convex_family() || w.is_concave_family() && v.is_concave_family()));
            if disagree {
                notes.push(Note::RoutesDisagree);
            }
            (v, Some(a.route), a.conditions.clone())
        }
        None => (Verdict::Inconclusive, None, attempts[2].0.conditions.clone()),
    };
    Ok(Certificate {
        model: model.id().to_string(),
        verdict,
        route,
        conditions,
        routes: attempts.into_iter().map(|(a, _)| a).collect(),
        excluded_intervals: excluded,
        grid: GridSummary {
            min: config.grid_min,
            max: config.grid_max,
            points: config.grid_points,
            slack,
        },
        notes,
    })
}
