//! Density and its spatial gradient along characteristics.
//!
//! Along `x(t, α)` the continuity equation integrates to `ρ = ερ₀(α) e^{−E}`
//! with
//!
//! ```text
//! E(t, α) = n ln a(t) − ½ ln((1 + q)/(1 + q a⁻²(t))) + ∫₀ᵗ a⁻¹ div v ds
//! ```
//!
//! where the middle term is the closed form of `−∫ (ȧ/a)|v|²/c²`.
//! The α-derivative of `E` carries the transport factor `∂x/∂α(s)` inside
//! the integral; the x-gradient follows by right multiplication with
//! `(∂x/∂α)⁻¹(t)`.

use serde::Serialize;

use crate::characteristics::{CharacteristicFlow, Snapshot, Track};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::quad::{Cumulative, QuadOptions};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DensityEval {
    pub t: f64,
    pub alpha: Vector,
    pub rho: f64,
    pub grad_rho: Vector,
    /// `E(t, α)`.
    pub exponent: f64,
    /// `∫₀ᵗ a⁻¹ div v ds`.
    pub divergence_integral: f64,
}

/// Tolerance for the outer time integral.
pub const DENSITY_REL_TOL: f64 = 1e-8;

/// `[a⁻¹ div v, a⁻¹ Σₖ (Σᵢ ∂²vⁱ/∂xⁱ∂xᵏ) ∂xᵏ/∂αˡ …]` at one time.
fn integrand(snap: &Snapshot<'_>, with_gradient: bool) -> Result<[f64; 4]> {
    let n = snap.label.dim();
    let jac = snap.jacobian();
    let (inv, _) = snap.inverse_jacobian()?;
    let div = (snap.velocity_alpha_gradient() * inv).trace();
    let mut out = [0.0; 4];
    out[0] = snap.inv_a * div;
    if !with_gradient {
        return Ok(out);
    }
    let hx = snap.velocity_x_hessian()?;
    for l in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            let lap_k: f64 = (0..n).map(|i| hx[(i, i, k)]).sum();
            s += lap_k * jac[(k, l)];
        }
        out[1 + l] = snap.inv_a * s;
    }
    Ok(out)
}

/// Per-label evaluator with cumulative caches for both the characteristic
/// integrals and the density exponent.
#[derive(Clone, Debug)]
pub struct DensityTrack<'f> {
    track: Track<'f>,
    outer: Cumulative<4>,
    geometric_dim: usize,
    with_gradient: bool,
}

impl<'f> DensityTrack<'f> {
    pub fn new(flow: &'f CharacteristicFlow, alpha: &Vector) -> Result<Self> {
        let track = flow.track(alpha)?;
        let outer = Cumulative::new(QuadOptions::with_rel_tol(DENSITY_REL_TOL));
        Ok(Self { track, outer, geometric_dim: flow.dim(), with_gradient: true })
    }

    /// Skips the second derivatives of `v`; [`DensityEval::grad_rho`] is
    /// then NaN.
    pub fn scalar(flow: &'f CharacteristicFlow, alpha: &Vector) -> Result<Self> {
        Ok(Self { with_gradient: false, ..Self::new(flow, alpha)? })
    }

    /// Replaces the `n` in the `n ln a` dilution term, for labels that
    /// parametrize a reduced problem (radial flow in `n` dimensions).
    pub fn with_geometric_dim(mut self, n: usize) -> Self {
        self.geometric_dim = n;
        self
    }

    pub fn eval(&mut self, t: f64) -> Result<DensityEval> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let Self { track, outer, geometric_dim, with_gradient } = self;
        let with_gradient = *with_gradient;
        let ints = outer.value(t, |s| integrand(&track.snapshot(s)?, with_gradient))?;
        let scale = track.flow().scale();
        let log_a = scale.log_a(t)?;
        let snap = track.snapshot(t)?;
        let label = snap.label;
        let n = label.dim();
        let (inv, _) = snap.inverse_jacobian()?;
        let q = label.q;
        let ia2 = snap.inv_a * snap.inv_a;
        let exponent = *geometric_dim as f64 * log_a - 0.5 * (q.ln_1p() - (q * ia2).ln_1p()) + ints[0];
        let decay = (-exponent).exp();
        let rho0 = label.rho0;
        let eps = label.eps;
        let rho = eps * rho0.value * decay;
        // ∂_α ρ = ε e^{−E} (∂_α ρ₀ − ρ₀ ∂_α E), then ∂_x ρ = ∂_α ρ (∂x/∂α)⁻¹.
        let speed_factor = 1.0 / (1.0 + q) - ia2 / (1.0 + q * ia2);
        let mut d_alpha = Vector::zeros(n);
        for l in 0..n {
            let de = -0.5 * label.dq[l] * speed_factor + ints[1 + l];
            d_alpha[l] = eps * decay * (rho0.gradient[l] - rho0.value * de);
        }
        let grad_rho = if with_gradient { inv.left_mul_vec(&d_alpha) } else { Vector::filled(n, f64::NAN) };
        Ok(DensityEval { t, alpha: label.alpha, rho, grad_rho, exponent, divergence_integral: ints[0] })
    }

    pub fn density(&mut self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.rho)
    }
}

pub fn density_along_char(flow: &CharacteristicFlow, t: f64, alpha: &Vector) -> Result<f64> {
    DensityTrack::scalar(flow, alpha)?.density(t)
}

pub fn density_gradient(flow: &CharacteristicFlow, t: f64, alpha: &Vector) -> Result<Vector> {
    Ok(DensityTrack::new(flow, alpha)?.eval(t)?.grad_rho)
}

/// Density at a spatial point, through [`CharacteristicFlow::invert_position`].
pub fn density_at_x(flow: &CharacteristicFlow, t: f64, x: &Vector) -> Result<DensityEval> {
    let alpha = flow.invert_position(t, x)?;
    DensityTrack::new(flow, &alpha)?.eval(t)
}
