//! Initial data `(ρ₀, v₀)` with amplitude `ε` and light speed `c`, and the
//! Lorentz-weighted transforms `f₀ = ε|v₀|/W`, `g₀ = εv₀/W` with
//! `W = √(c² − ε²|v₀|²)`.
//!
//! Internally the smooth quantity `q = f₀²` is carried instead of `f₀`, which
//! is not differentiable where `v₀` vanishes.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Tensor3, Vector};

/// Value, Jacobian and Hessian of a velocity profile at one point.
/// `hessian[(i, j, k)] = ∂²vⁱ/∂αʲ∂αᵏ`.
#[derive(Clone, Copy, Debug)]
pub struct VelocityJet {
    pub value: Vector,
    pub jacobian: Matrix,
    pub hessian: Tensor3,
}

#[derive(Clone, Copy, Debug)]
pub struct DensityJet {
    pub value: f64,
    pub gradient: Vector,
}

pub trait VelocityField: Send + Sync + fmt::Debug {
    fn jet(&self, alpha: &Vector) -> VelocityJet;

    /// True only when the field is identically zero, which certifies global
    /// existence without any numerics.
    fn is_identically_zero(&self) -> bool {
        false
    }
}

pub trait DensityField: Send + Sync + fmt::Debug {
    fn jet(&self, alpha: &Vector) -> DensityJet;
}

/// Built-in velocity profiles. All act componentwise or radially and work in
/// any dimension.
#[derive(Clone, Debug, PartialEq)]
pub enum VelocityProfile {
    Zero,
    /// `vⁱ = slope·αⁱ`.
    Linear {
        slope: f64,
    },
    /// `vⁱ = sign·(δαⁱ + arctan αⁱ)`.
    Arctan {
        delta: f64,
        sign: f64,
    },
    /// `vⁱ = A·exp(−|α|²/(2w²))`.
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// `vⁱ = A·sin(kαⁱ)`.
    Sine {
        amplitude: f64,
        wavenumber: f64,
    },
    Scaled {
        factor: f64,
        inner: Box<VelocityProfile>,
    },
    Sum(Vec<VelocityProfile>),
}

impl VelocityProfile {
    pub fn arctan(sign: f64) -> Self {
        VelocityProfile::Arctan { delta: 0.0, sign }
    }

    pub fn negated(self) -> Self {
        VelocityProfile::Scaled { factor: -1.0, inner: Box::new(self) }
    }
}

/// Componentwise profile `vⁱ = φ(αⁱ)` with `(φ, φ′, φ″)`.
fn componentwise(alpha: &Vector, phi: impl Fn(f64) -> (f64, f64, f64)) -> VelocityJet {
    let n = alpha.dim();
    let mut jet = VelocityJet { value: Vector::zeros(n), jacobian: Matrix::zeros(n), hessian: Tensor3::zeros(n) };
    for i in 0..n {
        let (v, d, dd) = phi(alpha[i]);
        jet.value[i] = v;
        jet.jacobian[(i, i)] = d;
        jet.hessian[(i, i, i)] = dd;
    }
    jet
}

impl VelocityField for VelocityProfile {
    fn jet(&self, alpha: &Vector) -> VelocityJet {
        let n = alpha.dim();
        match self {
            VelocityProfile::Zero => {
                VelocityJet { value: Vector::zeros(n), jacobian: Matrix::zeros(n), hessian: Tensor3::zeros(n) }
            }
            VelocityProfile::Linear { slope } => componentwise(alpha, |x| (slope * x, *slope, 0.0)),
            VelocityProfile::Arctan { delta, sign } => componentwise(alpha, |x| {
                let r = 1.0 / (1.0 + x * x);
                (sign * (delta * x + x.atan()), sign * (delta + r), sign * (-2.0 * x * r * r))
            }),
            VelocityProfile::Sine { amplitude, wavenumber } => componentwise(alpha, |x| {
                let (s, c) = (wavenumber * x).sin_cos();
                (amplitude * s, amplitude * wavenumber * c, -amplitude * wavenumber * wavenumber * s)
            }),
            VelocityProfile::Gaussian { amplitude, width } => {
                let w2 = width * width;
                let e = amplitude * (-alpha.norm_sq() / (2.0 * w2)).exp();
                let mut jet =
                    VelocityJet { value: Vector::filled(n, e), jacobian: Matrix::zeros(n), hessian: Tensor3::zeros(n) };
                for i in 0..n {
                    for j in 0..n {
                        jet.jacobian[(i, j)] = -e * alpha[j] / w2;
                        for k in 0..n {
                            let kron = if j == k { 1.0 } else { 0.0 };
                            jet.hessian[(i, j, k)] = e * (alpha[j] * alpha[k] / (w2 * w2) - kron / w2);
                        }
                    }
                }
                jet
            }
            VelocityProfile::Scaled { factor, inner } => {
                let mut jet = inner.jet(alpha);
                jet.value = jet.value * *factor;
                jet.jacobian = jet.jacobian * *factor;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            jet.hessian[(i, j, k)] *= factor;
                        }
                    }
                }
                jet
            }
            VelocityProfile::Sum(parts) => {
                let mut acc = VelocityProfile::Zero.jet(alpha);
                for p in parts {
                    let jet = p.jet(alpha);
                    acc.value += jet.value;
                    acc.jacobian = acc.jacobian + jet.jacobian;
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                acc.hessian[(i, j, k)] += jet.hessian[(i, j, k)];
                            }
                        }
                    }
                }
                acc
            }
        }
    }

    fn is_identically_zero(&self) -> bool {
        match self {
            VelocityProfile::Zero => true,
            VelocityProfile::Linear { slope } => *slope == 0.0,
            VelocityProfile::Gaussian { amplitude, .. } | VelocityProfile::Sine { amplitude, .. } => *amplitude == 0.0,
            VelocityProfile::Arctan { sign, .. } => *sign == 0.0,
            VelocityProfile::Scaled { factor, inner } => *factor == 0.0 || inner.is_identically_zero(),
            VelocityProfile::Sum(parts) => parts.iter().all(|p| p.is_identically_zero()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityProfile {
    Constant {
        value: f64,
    },
    /// `ρ₀ = background + A·exp(−|α|²/(2w²))`.
    Gaussian {
        amplitude: f64,
        width: f64,
        background: f64,
    },
}

impl DensityField for DensityProfile {
    fn jet(&self, alpha: &Vector) -> DensityJet {
        let n = alpha.dim();
        match self {
            DensityProfile::Constant { value } => DensityJet { value: *value, gradient: Vector::zeros(n) },
            DensityProfile::Gaussian { amplitude, width, background } => {
                let w2 = width * width;
                let e = amplitude * (-alpha.norm_sq() / (2.0 * w2)).exp();
                DensityJet { value: background + e, gradient: *alpha * (-e / w2) }
            }
        }
    }
}

/// Sup-norm bounds on the data. `rigorous` is false when any part was
/// estimated by sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBounds {
    /// Bound on `‖v₀‖_{C²}` (max-entry norms of value, Jacobian, Hessian).
    pub n0: f64,
    /// `M₀ = n√n·N₀`.
    pub m0: f64,
    /// Bound on `‖ρ₀‖_{C¹} + ‖v₀‖_{C²}`.
    pub q0: f64,
    pub rigorous: bool,
}

/// Everything the closed forms need at one label `α`: the data jets and the
/// smooth transforms `g₀`, `q = f₀²` with first and second derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Label {
    pub alpha: Vector,
    pub v0: VelocityJet,
    /// `W = √(c² − ε²|v₀|²)`.
    pub w: f64,
    pub g: Vector,
    pub dg: Matrix,
    pub d2g: Tensor3,
    pub q: f64,
    pub dq: Vector,
    pub d2q: Matrix,
    pub rho0: DensityJet,
    pub eps: f64,
    pub c: f64,
}

impl Label {
    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    pub fn f0(&self) -> f64 {
        self.q.sqrt()
    }

    /// `Kⁱʲ = ∂ⱼv₀ⁱ|v₀|² − v₀ⁱ Σₖ v₀ᵏ∂ⱼv₀ᵏ`.
    pub fn k_matrix(&self) -> Matrix {
        let n = self.dim();
        let v = &self.v0.value;
        let dv = &self.v0.jacobian;
        let u = v.norm_sq();
        let mut k = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|m| v[m] * dv[(m, j)]).sum();
                k[(i, j)] = dv[(i, j)] * u - v[i] * s;
            }
        }
        k
    }
}

#[derive(Clone)]
pub struct InitialData {
    n: usize,
    c: f64,
    eps: f64,
    v0: Arc<dyn VelocityField>,
    rho0: Arc<dyn DensityField>,
    bounds: NormBounds,
    enforce_eps_max: bool,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("n", &self.n)
            .field("c", &self.c)
            .field("epsilon", &self.eps)
            .field("v0", &self.v0)
            .field("rho0", &self.rho0)
            .field("bounds", &self.bounds)
            .finish()
    }
}

pub struct InitialDataBuilder {
    n: usize,
    c: f64,
    eps: f64,
    v0: Arc<dyn VelocityField>,
    rho0: Arc<dyn DensityField>,
    declared_n0: Option<f64>,
    declared_q0: Option<f64>,
    norm_box: (f64, f64),
    check_eps_max: bool,
}

impl InitialDataBuilder {
    pub fn light_speed(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn epsilon(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn velocity(mut self, v0: impl VelocityField + 'static) -> Self {
        self.v0 = Arc::new(v0);
        self
    }

    pub fn velocity_field(mut self, v0: Arc<dyn VelocityField>) -> Self {
        self.v0 = v0;
        self
    }

    pub fn density(mut self, rho0: impl DensityField + 'static) -> Self {
        self.rho0 = Arc::new(rho0);
        self
    }

    pub fn density_field(mut self, rho0: Arc<dyn DensityField>) -> Self {
        self.rho0 = rho0;
        self
    }

    /// Declared bound on `‖v₀‖_{C²}`.
    pub fn declared_n0(mut self, n0: f64) -> Self {
        self.declared_n0 = Some(n0);
        self
    }

    /// Declared bound on `‖ρ₀‖_{C¹} + ‖v₀‖_{C²}`.
    pub fn declared_q0(mut self, q0: f64) -> Self {
        self.declared_q0 = Some(q0);
        self
    }

    /// Box `[lo, hi]ⁿ` used when norms have to be estimated by sampling.
    pub fn norm_box(mut self, lo: f64, hi: f64) -> Self {
        self.norm_box = (lo, hi);
        self
    }

    /// Skip the `ε < 0.9c/M₀` check; only pointwise subluminality is then
    /// enforced (at evaluation time).
    pub fn allow_large_epsilon(mut self) -> Self {
        self.check_eps_max = false;
        self
    }

    pub fn build(self) -> Result<InitialData> {
        if !(1..=3).contains(&self.n) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {}", self.n)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("light speed must be positive, got {}", self.c)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.eps)));
        }
        if !(self.norm_box.0 < self.norm_box.1) {
            return Err(Error::Config("norm box must satisfy lo < hi".into()));
        }
        for d in [self.declared_n0, self.declared_q0].into_iter().flatten() {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("declared bounds must be finite and >= 0, got {d}")));
            }
        }
        let bounds = compute_bounds(
            self.n,
            self.v0.as_ref(),
            self.rho0.as_ref(),
            self.declared_n0,
            self.declared_q0,
            self.norm_box,
        );
        let data = InitialData {
            n: self.n,
            c: self.c,
            eps: self.eps,
            v0: self.v0,
            rho0: self.rho0,
            bounds,
            enforce_eps_max: self.check_eps_max,
        };
        if self.check_eps_max && data.eps >= data.epsilon_max() {
            return Err(Error::Config(format!(
                "epsilon = {} must be below epsilon_max = 0.9 c / M0 = {}",
                data.eps,
                data.epsilon_max()
            )));
        }
        Ok(data)
    }
}

fn sample_points(n: usize, lo: f64, hi: f64) -> Vec<Vector> {
    let per_dim = match n {
        1 => 4001,
        2 => 201,
        _ => 41,
    };
    let coord = |i: usize| lo + (hi - lo) * i as f64 / (per_dim - 1) as f64;
    let mut pts = Vec::new();
    match n {
        1 => (0..per_dim).for_each(|i| pts.push(Vector::from_slice(&[coord(i)]))),
        2 => {
            for i in 0..per_dim {
                for j in 0..per_dim {
                    pts.push(Vector::from_slice(&[coord(i), coord(j)]));
                }
            }
        }
        _ => {
            for i in 0..per_dim {
                for j in 0..per_dim {
                    for k in 0..per_dim {
                        pts.push(Vector::from_slice(&[coord(i), coord(j), coord(k)]));
                    }
                }
            }
        }
    }
    pts
}

/// Sampled `(‖v₀‖_{C²}, ‖ρ₀‖_{C¹})` on `[lo, hi]ⁿ`.
pub fn sampled_norms(n: usize, v0: &dyn VelocityField, rho0: &dyn DensityField, (lo, hi): (f64, f64)) -> (f64, f64) {
    let (mut v, mut dv, mut d2v, mut r, mut dr) = (0f64, 0f64, 0f64, 0f64, 0f64);
    for p in sample_points(n, lo, hi) {
        let jet = v0.jet(&p);
        v = v.max(jet.value.max_abs());
        dv = dv.max(jet.jacobian.max_abs());
        d2v = d2v.max(jet.hessian.max_abs());
        let rj = rho0.jet(&p);
        r = r.max(rj.value.abs());
        dr = dr.max(rj.gradient.max_abs());
    }
    (v + dv + d2v, r + dr)
}

fn compute_bounds(
    n: usize,
    v0: &dyn VelocityField,
    rho0: &dyn DensityField,
    declared_n0: Option<f64>,
    declared_q0: Option<f64>,
    norm_box: (f64, f64),
) -> NormBounds {
    let nn = n as f64;
    let (n0, q0, rigorous) = match (declared_n0, declared_q0) {
        (Some(n0), Some(q0)) => (n0, q0, true),
        _ => {
            let zero = v0.is_identically_zero();
            let (vs, rs) = sampled_norms(n, v0, rho0, norm_box);
            let n0 = declared_n0.unwrap_or(if zero { 0.0 } else { vs });
            let q0 = declared_q0.unwrap_or(n0 + rs);
            (n0, q0, false)
        }
    };
    NormBounds { n0, m0: nn * nn.sqrt() * n0, q0, rigorous }
}

impl InitialData {
    pub fn builder(n: usize) -> InitialDataBuilder {
        InitialDataBuilder {
            n,
            c: 1.0,
            eps: 0.1,
            v0: Arc::new(VelocityProfile::Zero),
            rho0: Arc::new(DensityProfile::Constant { value: 1.0 }),
            declared_n0: None,
            declared_q0: None,
            norm_box: (-5.0, 5.0),
            check_eps_max: true,
        }
    }

    /// Same data with a different amplitude, re-validated.
    pub fn with_epsilon(&self, eps: f64) -> Result<InitialData> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
        }
        let data = InitialData { eps, ..self.clone() };
        if self.enforce_eps_max && eps >= data.epsilon_max() {
            return Err(Error::Config(format!(
                "epsilon = {eps} must be below epsilon_max = 0.9 c / M0 = {}",
                data.epsilon_max()
            )));
        }
        Ok(data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn light_speed(&self) -> f64 {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn velocity_field(&self) -> &dyn VelocityField {
        self.v0.as_ref()
    }

    pub fn density_field(&self) -> &dyn DensityField {
        self.rho0.as_ref()
    }

    pub fn sup_norms(&self) -> NormBounds {
        self.bounds
    }

    /// `0.9·c/M₀`, infinite for zero data.
    pub fn epsilon_max(&self) -> f64 {
        if self.bounds.m0 > 0.0 {
            0.9 * self.c / self.bounds.m0
        } else {
            f64::INFINITY
        }
    }

    fn check_dim(&self, alpha: &Vector) -> Result<()> {
        if alpha.dim() == self.n {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.n, got: alpha.dim() })
        }
    }

    fn w_of(&self, alpha: &Vector, v: &Vector) -> Result<f64> {
        let p = self.c * self.c - self.eps * self.eps * v.norm_sq();
        if p <= 0.0 {
            return Err(Error::Superluminal { alpha: alpha.to_vec(), speed: self.eps * v.norm(), c: self.c });
        }
        Ok(p.sqrt())
    }

    /// `f₀(α) = ε|v₀|/√(c² − ε²|v₀|²)`.
    pub fn f0(&self, alpha: &Vector) -> Result<f64> {
        self.check_dim(alpha)?;
        let v = self.v0.jet(alpha).value;
        let w = self.w_of(alpha, &v)?;
        Ok(self.eps * v.norm() / w)
    }

    /// `g₀(α) = εv₀/√(c² − ε²|v₀|²)`.
    pub fn g0(&self, alpha: &Vector) -> Result<Vector> {
        self.check_dim(alpha)?;
        let v = self.v0.jet(alpha).value;
        let w = self.w_of(alpha, &v)?;
        Ok(v * (self.eps / w))
    }

    /// `∂f₀/∂αʲ = c²ε ∂ⱼ|v₀| / W³`, using `∂ⱼ|v₀| = v₀·∂ⱼv₀/|v₀|` with 0/0 → 0.
    pub fn f0_gradient(&self, alpha: &Vector) -> Result<Vector> {
        self.check_dim(alpha)?;
        let jet = self.v0.jet(alpha);
        let w = self.w_of(alpha, &jet.value)?;
        let norm = jet.value.norm();
        let dnorm =
            if norm > 0.0 { jet.jacobian.left_mul_vec(&jet.value) * (1.0 / norm) } else { Vector::zeros(self.n) };
        Ok(dnorm * (self.c * self.c * self.eps / (w * w * w)))
    }

    /// Hessian of `f₀` from `f₀ = √q`. Fails at zeros of `v₀` where `|v₀|`
    /// has a kink.
    pub fn f0_hessian(&self, alpha: &Vector) -> Result<Matrix> {
        let l = self.label(alpha)?;
        let n = self.n;
        let f = l.f0();
        if f == 0.0 {
            if l.d2q.max_abs() == 0.0 {
                return Ok(Matrix::zeros(n));
            }
            return Err(Error::DegeneratePoint { alpha: alpha.to_vec() });
        }
        let mut h = Matrix::zeros(n);
        for j in 0..n {
            for k in 0..n {
                h[(j, k)] = l.d2q[(j, k)] / (2.0 * f) - l.dq[j] * l.dq[k] / (4.0 * f * f * f);
            }
        }
        Ok(h)
    }

    pub fn g0_jacobian(&self, alpha: &Vector) -> Result<Matrix> {
        Ok(self.label(alpha)?.dg)
    }

    pub fn g0_hessian(&self, alpha: &Vector) -> Result<Tensor3> {
        Ok(self.label(alpha)?.d2g)
    }

    pub fn rho0(&self, alpha: &Vector) -> Result<DensityJet> {
        self.check_dim(alpha)?;
        Ok(self.rho0.jet(alpha))
    }

    pub fn v0(&self, alpha: &Vector) -> Result<VelocityJet> {
        self.check_dim(alpha)?;
        Ok(self.v0.jet(alpha))
    }

    /// All label-dependent quantities at `α`.
    pub fn label(&self, alpha: &Vector) -> Result<Label> {
        self.check_dim(alpha)?;
        let n = self.n;
        let (c, eps) = (self.c, self.eps);
        let jet = self.v0.jet(alpha);
        let v = jet.value;
        let dv = jet.jacobian;
        let d2v = jet.hessian;
        let w = self.w_of(alpha, &v)?;
        let e2 = eps * eps;
        let u = v.norm_sq();
        let p = w * w;

        let mut du = Vector::zeros(n);
        let mut d2u = Matrix::zeros(n);
        for j in 0..n {
            du[j] = 2.0 * (0..n).map(|m| v[m] * dv[(m, j)]).sum::<f64>();
            for k in 0..n {
                d2u[(j, k)] = 2.0 * (0..n).map(|m| dv[(m, j)] * dv[(m, k)] + v[m] * d2v[(m, j, k)]).sum::<f64>();
            }
        }

        let q = e2 * u / p;
        let q1 = e2 * c * c / (p * p);
        let q2 = 2.0 * e2 * e2 * c * c / (p * p * p);
        let mut dq = Vector::zeros(n);
        let mut d2q = Matrix::zeros(n);
        for j in 0..n {
            dq[j] = q1 * du[j];
            for k in 0..n {
                d2q[(j, k)] = q2 * du[j] * du[k] + q1 * d2u[(j, k)];
            }
        }

        // P = W², Pⱼ = −ε²uⱼ.
        let dp = du * (-e2);
        let d2p = d2u * (-e2);
        let w3 = p * w;
        let w5 = w3 * p;
        let g = v * (eps / w);
        let mut dg = Matrix::zeros(n);
        let mut d2g = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                dg[(i, j)] = eps * (dv[(i, j)] / w - 0.5 * v[i] * dp[j] / w3);
                for k in 0..n {
                    d2g[(i, j, k)] = eps
                        * (d2v[(i, j, k)] / w
                            - 0.5 * (dv[(i, j)] * dp[k] + dv[(i, k)] * dp[j] + v[i] * d2p[(j, k)]) / w3
                            + 0.75 * v[i] * dp[j] * dp[k] / w5);
                }
            }
        }

        Ok(Label { alpha: *alpha, v0: jet, w, g, dg, d2g, q, dq, d2q, rho0: self.rho0.jet(alpha), eps, c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data_1d(v0: VelocityProfile, eps: f64) -> InitialData {
        InitialData::builder(1).velocity(v0).epsilon(eps).allow_large_epsilon().build().unwrap()
    }

    #[test]
    fn f0_and_g0_values() {
        let d = data_1d(VelocityProfile::Linear { slope: 1.0 }, 0.1);
        let one = Vector::from_slice(&[1.0]);
        assert!((d.f0(&one).unwrap() - 0.1 / 0.99f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.f0(&Vector::zeros(1)).unwrap(), 0.0);
        let minus = Vector::from_slice(&[-1.0]);
        assert!((d.g0(&minus).unwrap()[0] + d.f0(&minus).unwrap()).abs() < 1e-16);

        let d2 = InitialData::builder(2)
            .velocity(VelocityProfile::Linear { slope: 1.0 })
            .allow_large_epsilon()
            .build()
            .unwrap();
        let g = d2.g0(&Vector::from_slice(&[1.0, 0.0])).unwrap();
        assert!((g[0] - 0.100_503_781_525_921_2).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn superluminal_is_an_error() {
        let d = data_1d(VelocityProfile::Linear { slope: 1.0 }, 1.0);
        let r = d.f0(&Vector::from_slice(&[1.0]));
        assert!(matches!(r, Err(Error::Superluminal { .. })));
    }

    #[test]
    fn first_derivatives_at_the_origin_for_linear_data() {
        let d = data_1d(VelocityProfile::Linear { slope: 1.0 }, 0.1);
        let tiny = Vector::from_slice(&[1e-100]);
        assert!((d.f0_gradient(&tiny).unwrap()[0] - 0.1).abs() < 1e-15);
        assert!((d.g0_jacobian(&Vector::zeros(1)).unwrap()[(0, 0)] - 0.1).abs() < 1e-15);
        assert!(matches!(d.f0_hessian(&Vector::zeros(1)), Err(Error::DegeneratePoint { .. })));
    }

    #[test]
    fn constant_data_has_zero_derivatives() {
        let d = InitialData::builder(2).velocity(VelocityProfile::Sum(vec![])).build().unwrap();
        let a = Vector::from_slice(&[0.3, -0.2]);
        assert_eq!(d.f0_gradient(&a).unwrap().max_abs(), 0.0);
        assert_eq!(d.g0_jacobian(&a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn zero_data_norms() {
        let d = InitialData::builder(2).build().unwrap();
        let b = d.sup_norms();
        assert_eq!(b.n0, 0.0);
        assert_eq!(b.q0, 1.0);
        assert_eq!(d.epsilon_max(), f64::INFINITY);
    }

    #[test]
    fn sampled_norm_stays_below_declared_arctan_bound() {
        let declared: f64 = std::f64::consts::FRAC_PI_2 + 1.0 + 3.0 * 3f64.sqrt() / 8.0;
        let d = data_1d(VelocityProfile::arctan(1.0), 0.1);
        assert!(d.sup_norms().n0 <= declared);
        assert!(d.sup_norms().n0 > 2.5);
        let declared_data = InitialData::builder(1)
            .velocity(VelocityProfile::arctan(1.0))
            .declared_n0(declared)
            .declared_q0(declared + 1.0)
            .build()
            .unwrap();
        assert!(declared_data.sup_norms().rigorous);
        assert_eq!(declared_data.sup_norms().n0, declared);
    }

    #[test]
    fn epsilon_max_is_enforced() {
        let r = InitialData::builder(1).velocity(VelocityProfile::Linear { slope: 1.0 }).epsilon(0.5).build();
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn profile_jets_match_difference_quotients() {
        let profiles = [
            VelocityProfile::Arctan { delta: 0.3, sign: -1.0 },
            VelocityProfile::Gaussian { amplitude: 0.7, width: 1.3 },
            VelocityProfile::Sine { amplitude: 0.5, wavenumber: 2.0 },
            VelocityProfile::Sum(vec![
                VelocityProfile::Linear { slope: 0.2 },
                VelocityProfile::Gaussian { amplitude: 1.0, width: 0.8 }.negated(),
            ]),
        ];
        let a = Vector::from_slice(&[0.4, -0.9, 1.2]);
        let h = 1e-5;
        for p in &profiles {
            let jet = p.jet(&a);
            for j in 0..3 {
                let e = Vector::unit(3, j) * h;
                let jp = p.jet(&(a + e));
                let jm = p.jet(&(a - e));
                for i in 0..3 {
                    let fd = (jp.value[i] - jm.value[i]) / (2.0 * h);
                    assert!((fd - jet.jacobian[(i, j)]).abs() < 1e-8, "{p:?}");
                    for k in 0..3 {
                        let fd2 = (jp.jacobian[(i, k)] - jm.jacobian[(i, k)]) / (2.0 * h);
                        assert!((fd2 - jet.hessian[(i, k, j)]).abs() < 1e-8, "{p:?}");
                    }
                }
            }
        }
    }
}
