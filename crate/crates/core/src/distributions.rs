//! Distributions on (0, ∞) as seen by the reciprocal-convexity certifier:
//! density f, survival F̄, logarithmic derivative ω = f′/f, ω′ and the Mills
//! ratio m = F̄/f.
//!
//! The normal model keeps the standard normal density φ on (0, ∞) without
//! renormalising by 1/Φ̄(0). ω and m do not depend on that constant.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::log_grid;
use crate::quadrature::{self, Tolerance};
use crate::specfun::{self, ShapeParam};

/// Quadrature target for custom-model survival and Mills integrals.
pub const CUSTOM_TARGET_ABS_ERR: f64 = 1e-11;
/// Allowed mismatch between omega and the central difference of ln f,
/// relative to 1 + |omega|.
pub const CUSTOM_CONSISTENCY_TOL: f64 = 1e-4;
const ZERO_TOL: f64 = 1e-12;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelId {
    NormalHalfline,
    Gamma(ShapeParam),
    Custom(String),
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::NormalHalfline => write!(f, "normal-halfline"),
            ModelId::Gamma(a) => write!(f, "gamma(alpha={})", a.get()),
            ModelId::Custom(name) => write!(f, "custom({name})"),
        }
    }
}

impl Serialize for ModelId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Range where a custom model may be sampled for consistency checks and
/// omega-zero search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportHint {
    pub probe_min: f64,
    pub probe_max: f64,
    pub probe_points: usize,
}

impl Default for SupportHint {
    fn default() -> Self {
        SupportHint {
            probe_min: 1e-3,
            probe_max: 1e3,
            probe_points: 2000,
        }
    }
}

/// User-supplied description of a distribution on (0, ∞).
#[derive(Clone)]
pub struct CustomSpec {
    pub name: String,
    pub omega: ScalarFn,
    pub omega_prime: ScalarFn,
    pub density: ScalarFn,
    /// ln f; when given, ratios f(x+s)/f(x) are formed in log space.
    pub log_density: Option<ScalarFn>,
    pub support: SupportHint,
}

impl CustomSpec {
    pub fn new(name: impl Into<String>, omega: ScalarFn, omega_prime: ScalarFn, density: ScalarFn) -> Self {
        CustomSpec {
            name: name.into(),
            omega,
            omega_prime,
            density,
            log_density: None,
            support: SupportHint::default(),
        }
    }

    pub fn with_log_density(mut self, log_density: ScalarFn) -> Self {
        self.log_density = Some(log_density);
        self
    }

    pub fn with_support(mut self, support: SupportHint) -> Self {
        self.support = support;
        self
    }
}

#[derive(Default)]
struct Cache {
    survival: HashMap<u64, f64>,
    mills: HashMap<u64, f64>,
}

#[derive(Clone)]
struct Custom {
    spec: CustomSpec,
    cache: Arc<Mutex<Cache>>,
}

impl Custom {
    fn ln_f(&self, x: f64) -> f64 {
        match &self.spec.log_density {
            Some(l) => l(x),
            None => (self.spec.density)(x).ln(),
        }
    }

    fn breaks(&self, x: f64) -> Vec<f64> {
        let w = (self.spec.omega)(x).abs();
        let mut b = vec![x];
        if w > 1.0 && w.is_finite() {
            b.push(10.0 / w);
        }
        b
    }

    fn cached(&self, x: f64, pick: fn(&mut Cache) -> &mut HashMap<u64, f64>) -> Option<f64> {
        let mut c = self.cache.lock().unwrap_or_else(|p| p.into_inner());
        pick(&mut c).get(&x.to_bits()).copied()
    }

    fn store(&self, x: f64, v: f64, pick: fn(&mut Cache) -> &mut HashMap<u64, f64>) {
        let mut c = self.cache.lock().unwrap_or_else(|p| p.into_inner());
        pick(&mut c).insert(x.to_bits(), v);
    }

    fn survival(&self, x: f64) -> Result<f64> {
        if let Some(v) = self.cached(x, |c| &mut c.survival) {
            return Ok(v);
        }
        let density = self.spec.density.clone();
        let q = quadrature::semi_infinite(
            move |t| density(t),
            x,
            &self.breaks(x).iter().map(|b| x + b).collect::<Vec<_>>(),
            Tolerance {
                abs: CUSTOM_TARGET_ABS_ERR,
                rel: 0.0,
            },
        )
        .map_err(|e| e.at(x))?;
        self.store(x, q.value, |c| &mut c.survival);
        Ok(q.value)
    }

    fn mills(&self, x: f64) -> Result<f64> {
        if let Some(v) = self.cached(x, |c| &mut c.mills) {
            return Ok(v);
        }
        let tol = Tolerance {
            abs: CUSTOM_TARGET_ABS_ERR,
            rel: 0.0,
        };
        let q = match &self.spec.log_density {
            Some(ln_f) => {
                let base = ln_f(x);
                if !base.is_finite() {
                    return Err(Error::Domain {
                        what: "custom log density is not finite",
                        value: x,
                    });
                }
                quadrature::semi_infinite(|s| (ln_f(x + s) - base).exp(), 0.0, &self.breaks(x), tol)
            }
            None => {
                let base = (self.spec.density)(x);
                if !(base > 0.0 && base.is_finite()) {
                    return Err(Error::Domain {
                        what: "custom density is zero or not finite",
                        value: x,
                    });
                }
                quadrature::semi_infinite(|s| (self.spec.density)(x + s) / base, 0.0, &self.breaks(x), tol)
            }
        }
        .map_err(|e| e.at(x))?;
        self.store(x, q.value, |c| &mut c.mills);
        Ok(q.value)
    }
}

#[derive(Clone)]
enum Kind {
    Normal,
    Gamma { alpha: ShapeParam, ln_gamma_alpha: f64 },
    Custom(Custom),
}

/// A distribution on (0, ∞). Immutable after construction; custom models
/// share an internal cache of quadrature results guarded by a mutex.
#[derive(Clone)]
pub struct DistributionModel {
    id: ModelId,
    kind: Kind,
    omega_zeros: Vec<f64>,
}

impl fmt::Debug for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistributionModel")
            .field("id", &self.id)
            .field("omega_zeros", &self.omega_zeros)
            .finish()
    }
}

fn positive(x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain {
            what: "distribution functions need a finite x > 0",
            value: x,
        })
    }
}

/// Gamma law with shape α: f(x) = x^{α-1} e^{-x} / Γ(α).
pub fn make_gamma(alpha: ShapeParam) -> DistributionModel {
    let a = alpha.get();
    DistributionModel {
        id: ModelId::Gamma(alpha),
        kind: Kind::Gamma {
            alpha,
            ln_gamma_alpha: specfun::ln_gamma(a),
        },
        omega_zeros: if a > 1.0 { vec![a - 1.0] } else { vec![] },
    }
}

/// Standard normal law restricted to (0, ∞), density left as φ.
pub fn make_normal_halfline() -> DistributionModel {
    DistributionModel {
        id: ModelId::NormalHalfline,
        kind: Kind::Normal,
        omega_zeros: vec![],
    }
}

/// Custom model from ω, ω′ and the density, sampled over `support_hint`.
pub fn make_custom(
    omega_fn: ScalarFn,
    omega_prime_fn: ScalarFn,
    density_fn: ScalarFn,
    support_hint: SupportHint,
) -> Result<DistributionModel> {
    make_custom_spec(CustomSpec::new("custom", omega_fn, omega_prime_fn, density_fn).with_support(support_hint))
}

pub fn make_custom_spec(spec: CustomSpec) -> Result<DistributionModel> {
    let hint = spec.support;
    if !(hint.probe_min > 0.0 && hint.probe_max > hint.probe_min && hint.probe_points >= 3) {
        return Err(Error::Usage(format!("invalid support hint {hint:?}")));
    }
    let custom = Custom {
        spec,
        cache: Arc::new(Mutex::new(Cache::default())),
    };
    check_consistency(&custom)?;
    let grid = log_grid(hint.probe_min, hint.probe_max, hint.probe_points)?;
    let omega_zeros = sign_change_roots(&*custom.spec.omega, &grid);
    Ok(DistributionModel {
        id: ModelId::Custom(custom.spec.name.clone()),
        kind: Kind::Custom(custom),
        omega_zeros,
    })
}

fn check_consistency(custom: &Custom) -> Result<()> {
    let hint = custom.spec.support;
    let samples = log_grid(hint.probe_min, hint.probe_max, 64)?;
    let mut worst = (hint.probe_min, 0.0f64);
    for &x in &samples {
        let h = x * 1e-5;
        let fd = (custom.ln_f(x + h) - custom.ln_f(x - h)) / (2.0 * h);
        let w = (custom.spec.omega)(x);
        let ln_f = custom.ln_f(x);
        if ln_f == f64::NEG_INFINITY && custom.spec.log_density.is_none() {
            // density underflow, nothing to compare
            continue;
        }
        let discrepancy = if ln_f.is_finite() && fd.is_finite() && w.is_finite() {
            (fd - w).abs() / (1.0 + w.abs())
        } else {
            f64::INFINITY
        };
        if !(discrepancy <= worst.1) {
            worst = (x, discrepancy);
        }
    }
    if worst.1 > CUSTOM_CONSISTENCY_TOL {
        return Err(Error::ModelConstruction {
            worst_x: worst.0,
            discrepancy: worst.1,
        });
    }
    Ok(())
}

/// Roots of `f` bracketed by sign changes between consecutive grid points,
/// refined by bisection to an absolute width of 1e-12.
pub(crate) fn sign_change_roots(f: &dyn Fn(f64) -> f64, grid: &[f64]) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev = (grid[0], f(grid[0]));
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    for &x in &grid[1..] {
        let v = f(x);
        if v == 0.0 {
            roots.push(x);
        } else if prev.1 != 0.0 && prev.1.signum() != v.signum() && v.is_finite() && prev.1.is_finite() {
            let (mut lo, mut hi, mut flo) = (prev.0, x, prev.1);
            while hi - lo > ZERO_TOL {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = (x, v);
    }
    roots
}

impl DistributionModel {
    pub fn id(&self) -> &ModelId {
        &self.id
    }

    pub fn shape(&self) -> Option<ShapeParam> {
        match &self.kind {
            Kind::Gamma { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn is_normal_halfline(&self) -> bool {
        matches!(self.kind, Kind::Normal)
    }

    /// Points in (0, ∞) where ω vanishes.
    pub fn omega_zeros(&self) -> &[f64] {
        &self.omega_zeros
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        let x = positive(x)?;
        match &self.kind {
            Kind::Normal => specfun::normal_density(x),
            Kind::Gamma { alpha, ln_gamma_alpha } => {
                Ok(((alpha.get() - 1.0) * x.ln() - x - ln_gamma_alpha).exp())
            }
            Kind::Custom(c) => Ok((c.spec.density)(x)),
        }
    }

    pub fn survival(&self, x: f64) -> Result<f64> {
        let x = positive(x)?;
        match &self.kind {
            Kind::Normal => Ok(specfun::normal_survival(x)?.value),
            Kind::Gamma { alpha, ln_gamma_alpha } => {
                Ok((specfun::ln_upper_incomplete_gamma(*alpha, x)? - ln_gamma_alpha).exp())
            }
            Kind::Custom(c) => c.survival(x),
        }
    }

    pub fn omega(&self, x: f64) -> Result<f64> {
        let x = positive(x)?;
        Ok(match &self.kind {
            Kind::Normal => -x,
            Kind::Gamma { alpha, .. } => (alpha.get() - 1.0) / x - 1.0,
            Kind::Custom(c) => (c.spec.omega)(x),
        })
    }

    pub fn omega_prime(&self, x: f64) -> Result<f64> {
        let x = positive(x)?;
        Ok(match &self.kind {
            Kind::Normal => -1.0,
            Kind::Gamma { alpha, .. } => -(alpha.get() - 1.0) / (x * x),
            Kind::Custom(c) => (c.spec.omega_prime)(x),
        })
    }

    pub fn mills(&self, x: f64) -> Result<f64> {
        let x = positive(x)?;
        match &self.kind {
            Kind::Normal => Ok(specfun::normal_mills(x)?.value),
            Kind::Gamma { alpha, .. } => Ok(specfun::gamma_mills(*alpha, x)?.value),
            Kind::Custom(c) => c.mills(x),
        }
    }

    /// m′ from the Mills-ratio equation m′ = -ω m - 1.
    pub fn mills_prime(&self, x: f64) -> Result<f64> {
        Ok(-self.omega(x)? * self.mills(x)? - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(a: f64) -> ShapeParam {
        ShapeParam::new(a).unwrap()
    }

    fn arc(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarFn {
        Arc::new(f)
    }

    #[test]
    fn exponential_law() {
        let m = make_gamma(shape(1.0));
        for &x in &[0.01, 1.0, 50.0] {
            assert_eq!(m.omega(x).unwrap(), -1.0);
            assert_eq!(m.omega_prime(x).unwrap(), 0.0);
            assert_eq!(m.mills(x).unwrap(), 1.0);
        }
        assert!(m.omega_zeros().is_empty());
    }

    #[test]
    fn gamma_two_omega_zero() {
        let m = make_gamma(shape(2.0));
        assert_eq!(m.omega(1.0).unwrap(), 0.0);
        assert_eq!(m.omega_zeros(), &[1.0]);
    }

    #[test]
    fn gamma_half_closed_forms() {
        let m = make_gamma(shape(0.5));
        assert_eq!(m.omega(1.0).unwrap(), -1.5);
        assert_eq!(m.omega_prime(1.0).unwrap(), 0.5);
        assert!(m.omega_zeros().is_empty());
    }

    #[test]
    fn normal_halfline_values() {
        let m = make_normal_halfline();
        assert_eq!(m.omega(1.0).unwrap(), -1.0);
        assert_eq!(m.omega_prime(1.0).unwrap(), -1.0);
        let w = m.omega(2.0).unwrap();
        assert_eq!(m.omega_prime(2.0).unwrap() / (w * w), -0.25);
        let ratio = m.survival(0.5).unwrap() / m.density(0.5).unwrap();
        assert!((m.mills(0.5).unwrap() - ratio).abs() < 1e-14);
        assert!((m.mills(0.5).unwrap() - 0.876_364_456_453_692_3).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_x() {
        let m = make_gamma(shape(2.0));
        assert!(m.density(0.0).is_err());
        assert!(m.mills(-1.0).is_err());
        assert!(m.omega(f64::NAN).is_err());
    }

    #[test]
    fn custom_exponential_matches_gamma_one() {
        let hint = SupportHint {
            probe_min: 1e-2,
            probe_max: 50.0,
            probe_points: 200,
        };
        let m = make_custom(arc(|_| -1.0), arc(|_| 0.0), arc(|x| (-x).exp()), hint).unwrap();
        for &x in &[0.1, 1.0, 5.0, 20.0] {
            assert!((m.mills(x).unwrap() - 1.0).abs() < 1e-10);
            assert!((m.survival(x).unwrap() - (-x).exp()).abs() < 1e-11);
        }
        assert!(m.omega_zeros().is_empty());
    }

    #[test]
    fn custom_normal_matches_builtin() {
        let hint = SupportHint {
            probe_min: 1e-2,
            probe_max: 20.0,
            probe_points: 200,
        };
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let m = make_custom(arc(|x| -x), arc(|_| -1.0), arc(phi), hint).unwrap();
        let normal = make_normal_halfline();
        for &x in &[0.05, 0.5, 2.0, 8.0] {
            let rel = (m.mills(x).unwrap() / normal.mills(x).unwrap() - 1.0).abs();
            assert!(rel < 1e-9, "x = {x}: rel {rel:e}");
        }
    }

    #[test]
    fn custom_weibull_two() {
        // f = 2x e^{-x²}, F̄ = e^{-x²}, m = 1/(2x)
        let hint = SupportHint {
            probe_min: 1e-2,
            probe_max: 5.0,
            probe_points: 400,
        };
        let m = make_custom(
            arc(|x| 1.0 / x - 2.0 * x),
            arc(|x| -1.0 / (x * x) - 2.0),
            arc(|x| 2.0 * x * (-x * x).exp()),
            hint,
        )
        .unwrap();
        assert!((m.mills(1.0).unwrap() - 0.5).abs() < 1e-10);
        let roots = m.omega_zeros();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.5f64.sqrt()).abs() < 1e-11);
        // survival by quadrature over the density, independent of the Mills path
        let s = m.survival(1.0).unwrap();
        assert!((s - (-1.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn custom_rejects_inconsistent_omega() {
        let err = make_custom(arc(|_| -2.0), arc(|_| 0.0), arc(|x| (-x).exp()), SupportHint::default())
            .unwrap_err();
        match err {
            Error::ModelConstruction { discrepancy, .. } => assert!(discrepancy > 0.1),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn custom_density_scale_invariance() {
        let hint = SupportHint {
            probe_min: 1e-2,
            probe_max: 10.0,
            probe_points: 100,
        };
        let base = make_custom(arc(|x| 0.5 / x - 1.0), arc(|x| -0.5 / (x * x)), arc(|x| x.sqrt() * (-x).exp()), hint)
            .unwrap();
        let scaled = make_custom(
            arc(|x| 0.5 / x - 1.0),
            arc(|x| -0.5 / (x * x)),
            arc(|x| 4.0 * x.sqrt() * (-x).exp()),
            hint,
        )
        .unwrap();
        let tripled = make_custom(
            arc(|x| 0.5 / x - 1.0),
            arc(|x| -0.5 / (x * x)),
            arc(|x| 3.0 * x.sqrt() * (-x).exp()),
            hint,
        )
        .unwrap();
        for &x in &[0.1, 1.0, 3.0] {
            assert_eq!(base.omega(x).unwrap(), scaled.omega(x).unwrap());
            assert_eq!(base.omega_prime(x).unwrap(), tripled.omega_prime(x).unwrap());
            // a power-of-two factor leaves every ratio bit-identical
            assert_eq!(base.mills(x).unwrap(), scaled.mills(x).unwrap());
            let rel = (base.mills(x).unwrap() / tripled.mills(x).unwrap() - 1.0).abs();
            assert!(rel < 1e-13);
        }
    }

    #[test]
    fn mills_prime_from_ode() {
        // α = 2: m = 1 + 1/x, m′ = -1/x²
        let m = make_gamma(shape(2.0));
        for &x in &[0.1, 1.0, 10.0] {
            let want = -1.0 / (x * x);
            assert!((m.mills_prime(x).unwrap() - want).abs() < 1e-13 * want.abs().max(1.0));
        }
    }
}
