//! Background scale factors `a(t)` with `a(0) = 1`, their expansion regime,
//! and the inverse-power time integrals used by every closed form.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_scalar, QuadOptions};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Expansion regime of the background.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "name")]
pub enum Regime {
    /// Accelerating or uniform expansion: `ȧ > 0`, `ä ≥ 0`.
    H1,
    /// Decelerating but fast: `a(t) ≥ (1+t)^{(1+δ₀)/2}`.
    H2 { delta0: f64 },
    /// Slow power law `a = (1+t)^l`, `0 < l ≤ 1/2`.
    H3 { l: f64 },
    /// Static background `a ≡ 1`.
    H4,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::H1 => "H1",
            Regime::H2 { .. } => "H2",
            Regime::H3 { .. } => "H3",
            Regime::H4 => "H4",
        }
    }

    /// Regimes in which small data give global solutions.
    pub fn is_expanding_fast(&self) -> bool {
        matches!(self, Regime::H1 | Regime::H2 { .. })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::H2 { delta0 } => write!(f, "H2(delta0={delta0})"),
            Regime::H3 { l } => write!(f, "H3(l={l})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Result of [`ScaleFactor::classify`]. `regime` is `None` when a sampled
/// custom factor shows a sign pattern that fits no regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub regime: Option<Regime>,
    pub sampled: bool,
}

impl Classification {
    fn exact(regime: Regime) -> Self {
        Self { regime: Some(regime), sampled: false }
    }
}

/// User-supplied scale factor. `delta0` is optional metadata for the
/// decelerating regime; it is only checked on the sample grid.
#[derive(Clone)]
pub struct CustomScale {
    pub name: String,
    pub a: ScalarFn,
    pub da: Option<ScalarFn>,
    pub delta0: Option<f64>,
}

impl fmt::Debug for CustomScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomScale")
            .field("name", &self.name)
            .field("has_derivative", &self.da.is_some())
            .field("delta0", &self.delta0)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum ScaleKind {
    PowerLaw { l: f64 },
    Exponential { rate: f64 },
    Custom(CustomScale),
}

#[derive(Clone, Debug)]
pub struct ScaleFactor {
    kind: ScaleKind,
    classification: Arc<OnceLock<Result<Classification>>>,
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

impl ScaleFactor {
    /// `a(t) = (1+t)^l`.
    pub fn power_law(l: f64) -> Result<Self> {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::Config(format!("power-law exponent must be >= 0, got {l}")));
        }
        Ok(Self::from_kind(ScaleKind::PowerLaw { l }))
    }

    /// `a(t) = e^{Ht}`.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Config(format!("exponential rate must be > 0, got {rate}")));
        }
        Ok(Self::from_kind(ScaleKind::Exponential { rate }))
    }

    /// `a ≡ 1`.
    pub fn constant() -> Self {
        Self::from_kind(ScaleKind::PowerLaw { l: 0.0 })
    }

    pub fn custom(custom: CustomScale) -> Result<Self> {
        let a0 = (custom.a)(0.0);
        if (a0 - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("custom scale factor '{}' has a(0) = {a0}, expected 1", custom.name)));
        }
        if let Some(d) = custom.delta0 {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::Config(format!("delta0 must lie in (0, 1), got {d}")));
            }
        }
        Ok(Self::from_kind(ScaleKind::Custom(custom)))
    }

    fn from_kind(kind: ScaleKind) -> Self {
        Self { kind, classification: Arc::new(OnceLock::new()) }
    }

    pub fn kind(&self) -> &ScaleKind {
        &self.kind
    }

    pub fn a(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.a_raw(t))
    }

    pub fn da(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        match &self.kind {
            ScaleKind::PowerLaw { l } => Ok(if *l == 0.0 { 0.0 } else { l * (1.0 + t).powf(l - 1.0) }),
            ScaleKind::Exponential { rate } => Ok(rate * (rate * t).exp()),
            ScaleKind::Custom(c) => match &c.da {
                Some(da) => Ok(da(t)),
                None => Err(Error::Config(format!("custom scale factor '{}' has no derivative", c.name))),
            },
        }
    }

    /// `ln a(t)`.
    pub fn log_a(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match &self.kind {
            ScaleKind::PowerLaw { l } => l * t.ln_1p(),
            ScaleKind::Exponential { rate } => rate * t,
            ScaleKind::Custom(c) => (c.a)(t).ln(),
        })
    }

    /// `ȧ/a`, computed without forming `a` for the exponential case.
    pub fn hubble(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match &self.kind {
            ScaleKind::PowerLaw { l } => l / (1.0 + t),
            ScaleKind::Exponential { rate } => *rate,
            ScaleKind::Custom(_) => self.da(t)? / self.a_raw(t),
        })
    }

    pub(crate) fn a_raw(&self, t: f64) -> f64 {
        match &self.kind {
            ScaleKind::PowerLaw { l } => (1.0 + t).powf(*l),
            ScaleKind::Exponential { rate } => (rate * t).exp(),
            ScaleKind::Custom(c) => (c.a)(t),
        }
    }

    /// `1/a(t)` without overflow for fast exponentials.
    pub(crate) fn inv_a(&self, t: f64) -> f64 {
        match &self.kind {
            ScaleKind::PowerLaw { l } => (1.0 + t).powf(-*l),
            ScaleKind::Exponential { rate } => (-rate * t).exp(),
            ScaleKind::Custom(c) => 1.0 / (c.a)(t),
        }
    }

    /// `∫₀ᵗ a⁻ᵏ(s) ds`, in closed form where one exists.
    pub fn integral_inv_power(&self, k: u32, t: f64) -> Result<f64> {
        check_time(t)?;
        if k == 0 {
            return Ok(t);
        }
        let k = f64::from(k);
        match &self.kind {
            ScaleKind::PowerLaw { l } => {
                let p = 1.0 - k * l;
                if *l == 0.0 {
                    Ok(t)
                } else if p == 0.0 {
                    Ok(t.ln_1p())
                } else {
                    Ok((p * t.ln_1p()).exp_m1() / p)
                }
            }
            ScaleKind::Exponential { rate } => Ok(-(-k * rate * t).exp_m1() / (k * rate)),
            ScaleKind::Custom(_) => integrate_scalar(|s| self.inv_a(s).powf(k), 0.0, t, &QuadOptions::default()),
        }
    }

    /// Regime classification, computed once and cached.
    pub fn classify(&self) -> Result<Classification> {
        self.classification.get_or_init(|| self.compute_classification()).clone()
    }

    /// Convenience: the regime, or an error if sampling was inconclusive.
    pub fn regime(&self) -> Result<Regime> {
        self.classify()?
            .regime
            .ok_or_else(|| Error::Precondition("scale factor regime is inconclusive on the sample grid".into()))
    }

    fn compute_classification(&self) -> Result<Classification> {
        match &self.kind {
            ScaleKind::PowerLaw { l } => Ok(Classification::exact(power_law_regime(*l))),
            ScaleKind::Exponential { .. } => Ok(Classification::exact(Regime::H1)),
            ScaleKind::Custom(c) => classify_custom(self, c),
        }
    }
}

fn power_law_regime(l: f64) -> Regime {
    if l == 0.0 {
        Regime::H4
    } else if l <= 0.5 {
        Regime::H3 { l }
    } else if l < 1.0 {
        Regime::H2 { delta0: 2.0 * l - 1.0 }
    } else {
        Regime::H1
    }
}

/// The 25-point sample grid: 0 and 24 points geometric on [1e-3, 1e6].
pub fn classification_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let (lo, hi): (f64, f64) = (1e-3, 1e6);
    let steps = 23;
    for i in 0..=steps {
        grid.push(lo * (hi / lo).powf(i as f64 / steps as f64));
    }
    grid
}

fn classify_custom(scale: &ScaleFactor, c: &CustomScale) -> Result<Classification> {
    let a0 = (c.a)(0.0);
    if (a0 - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!("custom scale factor '{}' has a(0) = {a0}, expected 1", c.name)));
    }
    let inconclusive = Classification { regime: None, sampled: true };
    let sampled = |r| Classification { regime: Some(r), sampled: true };
    let grid = classification_grid();
    let mut a_vals = Vec::with_capacity(grid.len());
    let mut da_vals = Vec::with_capacity(grid.len());
    let mut dda_vals = Vec::with_capacity(grid.len());
    for &t in &grid {
        let a = (c.a)(t);
        if !(a > 0.0 && a.is_finite()) {
            return Ok(inconclusive);
        }
        let h = (1e-6 * t).max(1e-6);
        let da = scale.da(t)?;
        let dda = if t >= h { (scale.da(t + h)? - scale.da(t - h)?) / (2.0 * h) } else { (scale.da(t + h)? - da) / h };
        a_vals.push(a);
        da_vals.push(da);
        dda_vals.push(dda);
    }

    if da_vals.iter().all(|d| d.abs() <= 1e-12) && a_vals.iter().all(|a| (a - 1.0).abs() <= 1e-12) {
        return Ok(sampled(Regime::H4));
    }
    if da_vals.iter().any(|&d| d <= 0.0) {
        return Ok(inconclusive);
    }
    let zero_tol = |d: f64| 1e-9 * d.abs().max(1.0);
    let nonneg = dda_vals.iter().zip(&da_vals).all(|(&dd, &d)| dd >= -zero_tol(d));
    if nonneg {
        return Ok(sampled(Regime::H1));
    }
    let nonpos = dda_vals.iter().zip(&da_vals).all(|(&dd, &d)| dd <= zero_tol(d));
    if !nonpos {
        return Ok(inconclusive);
    }

    // Decelerating: first test for an exact power law.
    let i1 = grid.iter().position(|&t| t >= 1.0).unwrap_or(1);
    let l_fit = a_vals[i1].ln() / grid[i1].ln_1p();
    let is_power = grid.iter().zip(&a_vals).all(|(&t, &a)| (a - (1.0 + t).powf(l_fit)).abs() <= 1e-9 * a);
    if is_power && l_fit > 0.0 && l_fit <= 0.5 {
        return Ok(sampled(Regime::H3 { l: l_fit }));
    }
    if is_power && l_fit > 0.5 && l_fit < 1.0 {
        return Ok(sampled(Regime::H2 { delta0: 2.0 * l_fit - 1.0 }));
    }
    if let Some(d0) = c.delta0 {
        let holds = grid.iter().zip(&a_vals).all(|(&t, &a)| a >= (1.0 + t).powf(0.5 * (1.0 + d0)) * (1.0 - 1e-12));
        if holds {
            return Ok(sampled(Regime::H2 { delta0: d0 }));
        }
    }
    Ok(inconclusive)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluations() {
        assert_eq!(ScaleFactor::constant().a(7.0).unwrap(), 1.0);
        let half = ScaleFactor::power_law(0.5).unwrap();
        assert_eq!(half.a(3.0).unwrap(), 2.0);
        assert_eq!(half.da(3.0).unwrap(), 0.25);
        assert!((half.log_a(3.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let e = ScaleFactor::exponential(1.0).unwrap();
        assert!((e.a(1.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(ScaleFactor::exponential(2.0).unwrap().da(0.0).unwrap(), 2.0);
        assert_eq!(ScaleFactor::exponential(3.0).unwrap().log_a(2.0).unwrap(), 6.0);
        assert_eq!(ScaleFactor::constant().da(4.0).unwrap(), 0.0);
        assert_eq!(ScaleFactor::constant().log_a(10.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_time_is_rejected() {
        assert_eq!(ScaleFactor::constant().a(-1.0), Err(Error::NegativeTime(-1.0)));
        assert!(ScaleFactor::constant().integral_inv_power(2, -0.5).is_err());
    }

    #[test]
    fn closed_form_integrals() {
        let half = ScaleFactor::power_law(0.5).unwrap();
        let t = std::f64::consts::E - 1.0;
        assert!((half.integral_inv_power(2, t).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(ScaleFactor::constant().integral_inv_power(4, 5.0).unwrap(), 5.0);
        let e = ScaleFactor::exponential(1.0).unwrap();
        let expect = (1.0 - (-2f64).exp()) / 2.0;
        assert!((e.integral_inv_power(2, 1.0).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn regimes_of_closed_forms() {
        assert_eq!(ScaleFactor::exponential(1.0).unwrap().regime().unwrap(), Regime::H1);
        match ScaleFactor::power_law(0.9).unwrap().regime().unwrap() {
            Regime::H2 { delta0 } => assert!((delta0 - 0.8).abs() < 1e-15),
            r => panic!("unexpected {r:?}"),
        }
        assert_eq!(ScaleFactor::power_law(0.3).unwrap().regime().unwrap(), Regime::H3 { l: 0.3 });
        assert_eq!(ScaleFactor::constant().regime().unwrap(), Regime::H4);
        assert_eq!(ScaleFactor::power_law(1.0).unwrap().regime().unwrap(), Regime::H1);
    }

    fn custom(
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        da: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> CustomScale {
        CustomScale { name: "test".into(), a: Arc::new(a), da: Some(Arc::new(da)), delta0: None }
    }

    #[test]
    fn sampled_classification_of_custom_factors() {
        let quadratic = ScaleFactor::custom(custom(|t| 1.0 + t + 0.5 * t * t, |t| 1.0 + t)).unwrap();
        let c = quadratic.classify().unwrap();
        assert!(c.sampled);
        assert_eq!(c.regime, Some(Regime::H1));

        let sqrt = ScaleFactor::custom(custom(|t| (1.0 + t).sqrt(), |t| 0.5 / (1.0 + t).sqrt())).unwrap();
        match sqrt.regime().unwrap() {
            Regime::H3 { l } => assert!((l - 0.5).abs() < 1e-9),
            r => panic!("unexpected {r:?}"),
        }

        let mut log_growth = custom(|t| 1.0 + (1.0 + t).ln(), |t| 1.0 / (1.0 + t));
        log_growth.delta0 = Some(0.5);
        let s = ScaleFactor::custom(log_growth).unwrap();
        assert_eq!(s.classify().unwrap().regime, None);

        let wiggle = ScaleFactor::custom(custom(|t| 1.0 + t + 0.1 * t.sin(), |t| 1.0 + 0.1 * t.cos())).unwrap();
        assert_eq!(wiggle.classify().unwrap().regime, None);
    }

    #[test]
    fn custom_normalization_and_missing_derivative() {
        let bad = CustomScale { name: "bad".into(), a: Arc::new(|t| 2.0 + t), da: None, delta0: None };
        assert!(matches!(ScaleFactor::custom(bad), Err(Error::Config(_))));
        let no_da = CustomScale { name: "nd".into(), a: Arc::new(|t| 1.0 + t), da: None, delta0: None };
        let s = ScaleFactor::custom(no_da).unwrap();
        assert!(matches!(s.da(1.0), Err(Error::Config(_))));
        assert!(matches!(s.classify(), Err(Error::Config(_))));
    }

    #[test]
    fn custom_quadrature_matches_closed_form() {
        let s = ScaleFactor::custom(custom(|t| (2.0 * t).exp(), |t| 2.0 * (2.0 * t).exp())).unwrap();
        let e = ScaleFactor::exponential(2.0).unwrap();
        for &t in &[0.1, 1.0, 30.0] {
            for k in [2, 4, 6] {
                let q = s.integral_inv_power(k, t).unwrap();
                let c = e.integral_inv_power(k, t).unwrap();
                assert!((q - c).abs() <= 1e-10 * c, "k={k} t={t}");
            }
        }
    }
}
