//! Spherically symmetric flow `vⁱ = 𝐯(t, r) xⁱ/r` in `n` space dimensions.
//!
//! The radial characteristics are the 1-D ones with the signed transform
//! `f = c ε𝐯₀/√(c² − ε²𝐯₀²)`; the density keeps the full `n ln a` dilution
//! while the transport term uses `v_r = ∂𝐯/∂r` only.

use serde::Serialize;

use crate::blowup::{det_zero_bracket, find_blowup_time, scalar_blowup_time_1d, BlowupSearch, Verdict};
use crate::characteristics::CharacteristicFlow;
use crate::data::InitialData;
use crate::density::DensityTrack;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::quad::QuadOptions;
use crate::roots::{bisect, BisectTol};
use crate::scale::ScaleFactor;
use crate::stats::linear_fit;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialPoint {
    pub r: f64,
    pub vr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialState {
    pub t: f64,
    pub alpha: f64,
    pub r: f64,
    pub vr: f64,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialDerivs {
    pub dr_dalpha: f64,
    pub d2r_dalpha2: f64,
    pub dv_dalpha: f64,
    pub d2v_dalpha2: f64,
    /// `∂𝐯/∂r`.
    pub v_r: f64,
    /// `∂²𝐯/∂r²`.
    pub v_rr: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateFitOptions {
    pub tau_min: f64,
    pub tau_max: f64,
    pub per_decade: usize,
    pub min_r_squared: f64,
    /// Density indicator fires at `density_factor · ερ₀(α)`.
    pub density_factor: f64,
    /// Gradient indicator fires at `|v_r| = gradient_level`.
    pub gradient_level: f64,
}

impl Default for RateFitOptions {
    fn default() -> Self {
        Self {
            tau_min: 1e-6,
            tau_max: 1e-2,
            per_decade: 40,
            min_r_squared: 0.99,
            density_factor: 1e6,
            gradient_level: 1e6,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateSample {
    pub tau: f64,
    pub t: f64,
    pub v_r: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub alpha: f64,
    pub t2: f64,
    pub gradient_exponent: f64,
    pub gradient_r_squared: f64,
    pub density_exponent: f64,
    pub density_r_squared: f64,
    /// `(t₂ − t)·v_r` at the smallest sampled `t₂ − t`.
    pub limit_value: f64,
    pub a_t2: f64,
    /// Last time with `|v_r|` below the gradient level.
    pub t_gradient_indicator: f64,
    /// Last time with `ρ` below the density level.
    pub t_density_indicator: f64,
    pub samples: Vec<RateSample>,
}

impl RateFit {
    pub fn simultaneity_gap(&self) -> f64 {
        (self.t_gradient_indicator - self.t_density_indicator).abs()
    }

    /// Relative deviation of the limit `(t₂ − t)v_r` from `−a(t₂)`.
    pub fn limit_error(&self) -> f64 {
        (self.limit_value + self.a_t2).abs() / self.a_t2
    }
}

#[derive(Clone, Debug)]
pub struct SphericalFlow {
    flow: CharacteristicFlow,
    n: usize,
}

impl SphericalFlow {
    /// `data` holds the 1-D radial profile `𝐯₀(r)` and `ρ₀(r)`; `n` is the
    /// space dimension.
    pub fn new(scale: ScaleFactor, data: InitialData, n: usize) -> Result<Self> {
        if data.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: data.dim() });
        }
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!("space dimension must be 1, 2 or 3, got {n}")));
        }
        let flow = CharacteristicFlow::new(scale, data).with_quadrature(QuadOptions::with_rel_tol(1e-12));
        Ok(Self { flow, n })
    }

    pub fn flow(&self) -> &CharacteristicFlow {
        &self.flow
    }

    pub fn space_dim(&self) -> usize {
        self.n
    }

    fn label_point(&self, alpha: f64) -> Result<Vector> {
        if !(alpha >= 0.0) {
            return Err(Error::Config(format!("radial label must be nonnegative, got {alpha}")));
        }
        let a = Vector::from_slice(&[alpha]);
        if alpha == 0.0 && self.n > 1 && self.flow.data().v0(&a)?.value[0] != 0.0 {
            return Err(Error::DegeneratePoint { alpha: vec![alpha] });
        }
        Ok(a)
    }

    pub fn radial_flow(&self, t: f64, alpha: f64) -> Result<RadialPoint> {
        let a = self.label_point(alpha)?;
        let label = self.flow.label(&a)?;
        let snap = self.flow.snapshot(&label, t)?;
        Ok(RadialPoint { r: snap.position()[0], vr: snap.velocity()[0] })
    }

    pub fn state(&self, t: f64, alpha: f64) -> Result<RadialState> {
        let p = self.radial_flow(t, alpha)?;
        Ok(RadialState { t, alpha, r: p.r, vr: p.vr, rho: self.density(t, alpha)? })
    }

    /// Closed forms in terms of `f`, `f′`, `f″` and the time integrals.
    pub fn radial_derivs(&self, t: f64, alpha: f64) -> Result<RadialDerivs> {
        let a = self.label_point(alpha)?;
        let label = self.flow.label(&a)?;
        let snap = self.flow.snapshot(&label, t)?;
        let c = label.c;
        let f = label.g[0];
        let f1 = label.dg[(0, 0)];
        let f2 = label.d2g[(0, 0, 0)];
        let ia = snap.inv_a;
        let w = 1.0 + f * f * ia * ia;
        let ints = snap.ints;
        let dr = 1.0 + c * f1 * ints.f2;
        let d2r = c * f2 * ints.f2 - 3.0 * c * f * f1 * f1 * ints.g4;
        let dv = c * f1 * ia / w.powf(1.5);
        let d2v = (c * f2 * ia + c * (f2 * f * f - 3.0 * f * f1 * f1) * ia.powi(3)) / w.powf(2.5);
        if dr <= 0.0 {
            return Err(Error::BlownUp { t, alpha: vec![alpha], det: dr });
        }
        Ok(RadialDerivs {
            dr_dalpha: dr,
            d2r_dalpha2: d2r,
            dv_dalpha: dv,
            d2v_dalpha2: d2v,
            v_r: dv / dr,
            v_rr: (d2v * dr - dv * d2r) / dr.powi(3),
        })
    }

    pub fn density_track(&self, alpha: f64) -> Result<DensityTrack<'_>> {
        let a = self.label_point(alpha)?;
        Ok(DensityTrack::new(&self.flow, &a)?.with_geometric_dim(self.n))
    }

    pub fn density(&self, t: f64, alpha: f64) -> Result<f64> {
        let a = self.label_point(alpha)?;
        DensityTrack::scalar(&self.flow, &a)?.with_geometric_dim(self.n).density(t)
    }

    /// `∂ρ/∂r` at the point labelled `alpha`.
    pub fn density_gradient(&self, t: f64, alpha: f64) -> Result<f64> {
        Ok(self.density_track(alpha)?.eval(t)?.grad_rho[0])
    }

    /// First zero of `∂r/∂α` for one label, polished to the floating-point
    /// limit of the bracket.
    pub fn blowup_time(&self, alpha: f64) -> Result<f64> {
        let a = self.label_point(alpha)?;
        let upper = scalar_blowup_time_1d(self.flow.scale(), self.flow.data(), alpha)?;
        if !upper.is_finite() {
            return Err(Error::Precondition(format!("v0'({alpha}) >= 0: no blowup along this label")));
        }
        let t_max = upper * (1.0 + 1e-6) + 1e-9;
        let zero = det_zero_bracket(&self.flow, &a, t_max, &BlowupSearch::default())?.ok_or(Error::Horizon {
            t_max,
            f2_at_horizon: f64::NAN,
            projected_f2: f64::NAN,
        })?;
        if zero.t_lo == zero.t_hi {
            return Ok(zero.t_lo);
        }
        let mut track = self.flow.track(&a)?;
        let tol = BisectTol { x_rel: 0.0, f_abs: 0.0, ..BisectTol::default() };
        let b = bisect(|t| track.det(t), zero.t_lo, zero.t_hi, &tol)?;
        Ok(b.best())
    }

    /// The label in `[0, r_max]` that blows up first, with its time.
    pub fn minimizing_label(&self, r_max: f64, t_max: f64) -> Result<(f64, f64)> {
        let cfg = BlowupSearch::default().with_box(0.0, r_max).with_t_max(t_max).with_points(201);
        let report = find_blowup_time(&self.flow, &cfg)?;
        match (report.verdict, report.alpha_star) {
            (Verdict::Blowup, Some(alpha)) => Ok((alpha[0], self.blowup_time(alpha[0])?)),
            _ => Err(Error::Precondition(format!("no blowup in [0, {r_max}] before t = {t_max}"))),
        }
    }

    /// Log-log fits of `|v_r|` and `ρ` against `t₂ − t` near the blowup time
    /// of `alpha`, plus the two blowup indicators.
    pub fn blowup_rate_fit(&self, alpha: f64, opts: &RateFitOptions) -> Result<RateFit> {
        let a = self.label_point(alpha)?;
        let t2 = self.blowup_time(alpha)?;
        if t2 <= opts.tau_max {
            return Err(Error::Precondition(format!("blowup time {t2} is shorter than the fit window")));
        }
        let decades = (opts.tau_max / opts.tau_min).log10();
        let count = (decades * opts.per_decade as f64).round() as usize;
        let mut track = DensityTrack::scalar(&self.flow, &a)?.with_geometric_dim(self.n);
        let mut samples = Vec::with_capacity(count + 1);
        for k in 0..=count {
            // Largest τ first so the density cache only moves forward.
            let tau = opts.tau_max * 10f64.powf(-(k as f64) / opts.per_decade as f64);
            let t = t2 - tau;
            let v_r = self.radial_derivs(t, alpha)?.v_r;
            let rho = track.density(t)?;
            samples.push(RateSample { tau, t, v_r, rho });
        }
        let lx: Vec<f64> = samples.iter().map(|s| s.tau.ln()).collect();
        let lv: Vec<f64> = samples.iter().map(|s| s.v_r.abs().ln()).collect();
        let lr: Vec<f64> = samples.iter().map(|s| s.rho.ln()).collect();
        let poor = |r2: f64, samples: &[RateSample]| Error::PoorFit {
            r_squared: r2,
            required: opts.min_r_squared,
            samples: samples.iter().map(|s| (s.tau, s.v_r, s.rho)).collect(),
        };
        let gv = linear_fit(&lx, &lv).ok_or_else(|| poor(f64::NAN, &samples))?;
        let gr = linear_fit(&lx, &lr).ok_or_else(|| poor(f64::NAN, &samples))?;
        for r2 in [gv.r_squared, gr.r_squared] {
            if !(r2 >= opts.min_r_squared) {
                return Err(poor(r2, &samples));
            }
        }
        let last = samples.last().expect("fit window holds samples");
        let limit_value = last.tau * last.v_r;

        let rho0 = self.flow.data().rho0(&a)?.value * self.flow.data().epsilon();
        let density_level = opts.density_factor * rho0;
        let t_gradient_indicator =
            self.indicator(t2, |t| Ok(opts.gradient_level - self.radial_derivs(t, alpha)?.v_r.abs()))?;
        let t_density_indicator = self.indicator(t2, |t| Ok(density_level - track.density(t)?))?;

        Ok(RateFit {
            alpha,
            t2,
            gradient_exponent: gv.slope,
            gradient_r_squared: gv.r_squared,
            density_exponent: gr.slope,
            density_r_squared: gr.r_squared,
            limit_value,
            a_t2: self.flow.scale().a(t2)?,
            t_gradient_indicator,
            t_density_indicator,
            samples,
        })
    }

    /// Time where `margin` turns from positive to nonpositive before `t2`.
    fn indicator<F>(&self, t2: f64, mut margin: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut tau = 1e-6 * t2.max(1.0);
        loop {
            let m = match margin(t2 - tau) {
                Ok(m) => m,
                Err(Error::BlownUp { .. }) => -1.0,
                Err(e) => return Err(e),
            };
            if m <= 0.0 {
                break;
            }
            tau *= 0.1;
            if tau < 1e-15 * t2 {
                return Err(Error::Precondition("indicator level not reached before the blowup time".into()));
            }
        }
        let b = bisect(&mut margin, 0.0, t2 - tau, &BisectTol { x_rel: 1e-12, ..BisectTol::default() })?;
        Ok(b.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DensityProfile, VelocityProfile};

    fn spherical(scale: ScaleFactor, v0: VelocityProfile, eps: f64, n: usize) -> SphericalFlow {
        let data = InitialData::builder(1)
            .velocity(v0)
            .density(DensityProfile::Gaussian { amplitude: 1.0, width: 2.0, background: 0.5 })
            .epsilon(eps)
            .allow_large_epsilon()
            .build()
            .unwrap();
        SphericalFlow::new(scale, data, n).unwrap()
    }

    #[test]
    fn static_background_straight_lines() {
        let s = spherical(ScaleFactor::constant(), VelocityProfile::arctan(-1.0), 0.1, 3);
        let p = s.radial_flow(2.0, 1.0).unwrap();
        let v0 = -(1.0f64.atan());
        assert!((p.vr - 0.1 * v0).abs() < 1e-15);
        assert!((p.r - (1.0 + 0.2 * v0)).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_general_route() {
        let s = spherical(
            ScaleFactor::power_law(0.3).unwrap(),
            VelocityProfile::Sine { amplitude: -1.0, wavenumber: 0.7 },
            0.4,
            3,
        );
        let a = Vector::from_slice(&[0.9]);
        let label = s.flow().label(&a).unwrap();
        let snap = s.flow().snapshot(&label, 3.0).unwrap();
        let d = s.radial_derivs(3.0, 0.9).unwrap();
        assert!((d.dr_dalpha - snap.jacobian()[(0, 0)]).abs() < 1e-13);
        assert!((d.d2r_dalpha2 - snap.position_hessian()[(0, 0, 0)]).abs() < 1e-12);
        assert!((d.dv_dalpha - snap.velocity_alpha_gradient()[(0, 0)]).abs() < 1e-13);
        assert!((d.d2v_dalpha2 - snap.velocity_alpha_hessian()[(0, 0, 0)]).abs() < 1e-13);
        assert!((d.v_r - snap.velocity_gradient().unwrap()[(0, 0)]).abs() < 1e-13);
        assert!((d.v_rr - snap.velocity_x_hessian().unwrap()[(0, 0, 0)]).abs() < 1e-11);
    }

    #[test]
    fn flat_profile_point_keeps_unit_stretch() {
        // Gaussian velocity has v0'(0) = 0.
        let s = spherical(
            ScaleFactor::power_law(0.5).unwrap(),
            VelocityProfile::Gaussian { amplitude: 1.0, width: 1.0 },
            0.2,
            1,
        );
        for &t in &[1.0, 100.0] {
            let d = s.radial_derivs(t, 0.0).unwrap();
            assert!((d.dr_dalpha - 1.0).abs() < 1e-15);
            assert_eq!(d.v_r, 0.0);
        }
    }

    #[test]
    fn no_decay_without_expansion() {
        let data = InitialData::builder(1).velocity(VelocityProfile::Zero).epsilon(0.3).build().unwrap();
        let s = SphericalFlow::new(ScaleFactor::constant(), data, 3).unwrap();
        for &t in &[0.0, 1.0, 1e4] {
            assert_eq!(s.density(t, 2.0).unwrap(), 0.3);
        }
    }

    #[test]
    fn classical_rate_fit() {
        let s = spherical(ScaleFactor::constant(), VelocityProfile::arctan(-1.0), 0.1, 3);
        let fit = s.blowup_rate_fit(0.0, &RateFitOptions::default()).unwrap();
        assert!((fit.t2 - 10.0).abs() < 1e-9);
        assert!((fit.gradient_exponent + 1.0).abs() < 0.05);
        assert!((fit.density_exponent + 1.0).abs() < 0.1);
        assert!(fit.limit_error() < 0.02);
        assert!(fit.simultaneity_gap() < 1e-4 * fit.t2);
    }
}
