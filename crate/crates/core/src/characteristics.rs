//! Exact characteristic flow: speed, velocity, position, Jacobian, inverse map
//! and second derivatives at `(t, α)`.
//!
//! With `q = f₀²(α)` and `w(s) = 1 + q a⁻²(s)` every time dependence enters
//! through `a(t)` and five integrals
//!
//! ```text
//! J1 = ∫ a⁻² w^{-1/2}   F2 = ∫ a⁻² w^{-3/2}   F4 = ∫ a⁻⁴ w^{-3/2}
//! F6 = ∫ a⁻⁶ w^{-5/2}   G4 = ∫ a⁻⁴ w^{-5/2}
//! ```
//!
//! which depend on `α` only through `q`. `J1 = F2 + q F4` identically.

use serde::Serialize;

use crate::data::{InitialData, Label};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Tensor3, Vector};
use crate::quad::{integrate, Cumulative, QuadOptions};
use crate::scale::{ScaleFactor, ScaleKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TimeIntegrals {
    pub j1: f64,
    pub f2: f64,
    pub f4: f64,
    pub f6: f64,
    pub g4: f64,
}

impl TimeIntegrals {
    fn from_array(v: [f64; 5]) -> Self {
        Self { j1: v[0], f2: v[1], f4: v[2], f6: v[3], g4: v[4] }
    }
}

fn integrand(scale: &ScaleFactor, q: f64, s: f64) -> [f64; 5] {
    let ia = scale.inv_a(s);
    let ia2 = ia * ia;
    let w = 1.0 + q * ia2;
    let ws = w.sqrt();
    let w32 = w * ws;
    let w52 = w32 * w;
    let ia4 = ia2 * ia2;
    [ia2 / ws, ia2 / w32, ia4 / w32, ia4 * ia2 / w52, ia4 / w52]
}

fn has_closed_form(scale: &ScaleFactor) -> bool {
    !matches!(scale.kind(), ScaleKind::Custom(_))
}

fn closed_form_q0(scale: &ScaleFactor, t: f64) -> Result<TimeIntegrals> {
    let i2 = scale.integral_inv_power(2, t)?;
    let i4 = scale.integral_inv_power(4, t)?;
    let i6 = scale.integral_inv_power(6, t)?;
    Ok(TimeIntegrals { j1: i2, f2: i2, f4: i4, f6: i6, g4: i4 })
}

/// Determinant of `∂x/∂α` together with the matrix.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct JacobianEval {
    pub matrix: Matrix,
    pub det: f64,
    pub t: f64,
    pub alpha: Vector,
}

/// The flow at one `(t, α)`: label data, integrals and `1/a(t)`.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot<'a> {
    pub t: f64,
    pub label: &'a Label,
    pub ints: TimeIntegrals,
    pub inv_a: f64,
    /// `ȧ/a` at `t`.
    pub hubble: f64,
}

impl<'a> Snapshot<'a> {
    fn w(&self) -> f64 {
        1.0 + self.label.q * self.inv_a * self.inv_a
    }

    /// `u = |v|² = c²q a⁻²/(1 + q a⁻²)`.
    pub fn speed_squared(&self) -> f64 {
        let c = self.label.c;
        c * c * self.label.q * self.inv_a * self.inv_a / self.w()
    }

    /// `vⁱ = c g₀ⁱ a⁻¹ / √(1 + q a⁻²)`.
    pub fn velocity(&self) -> Vector {
        self.label.g * (self.label.c * self.inv_a / self.w().sqrt())
    }

    /// `xⁱ = αⁱ + c g₀ⁱ J1`.
    pub fn position(&self) -> Vector {
        self.label.alpha + self.label.g * (self.label.c * self.ints.j1)
    }

    /// `∂x/∂α = I + D F2 + E F4` with `D = cε(c²∂v₀ − ε²K)/W³` and
    /// `E = cε³K/W³`.
    pub fn jacobian(&self) -> Matrix {
        let l = self.label;
        let n = l.dim();
        let k = l.k_matrix();
        let (c, e) = (l.c, l.eps);
        let w3 = l.w * l.w * l.w;
        let d = (l.v0.jacobian * (c * c) - k * (e * e)) * (c * e / w3);
        let ee = k * (c * e * e * e / w3);
        Matrix::identity(n) + d * self.ints.f2 + ee * self.ints.f4
    }

    /// The same matrix assembled from the smooth transforms:
    /// `δ + c∂g₀ (F2 + qF4) − (c/2) g₀ ⊗ ∂q F4`.
    pub fn jacobian_from_transforms(&self) -> Matrix {
        let l = self.label;
        let n = l.dim();
        let mut m = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += l.c * l.dg[(i, j)] * (self.ints.f2 + l.q * self.ints.f4)
                    - 0.5 * l.c * l.g[i] * l.dq[j] * self.ints.f4;
            }
        }
        m
    }

    /// `∂vⁱ/∂αˡ`.
    pub fn velocity_alpha_gradient(&self) -> Matrix {
        let l = self.label;
        let n = l.dim();
        let ia = self.inv_a;
        let w = self.w();
        let w12 = w.sqrt();
        let w32 = w * w12;
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = l.c * ia * (l.dg[(i, j)] / w12 - 0.5 * ia * ia * l.g[i] * l.dq[j] / w32);
            }
        }
        m
    }

    /// `∂²vⁱ/∂αˡ∂αˢ`.
    pub fn velocity_alpha_hessian(&self) -> Tensor3 {
        let l = self.label;
        let n = l.dim();
        let ia = self.inv_a;
        let ia2 = ia * ia;
        let w = self.w();
        let w12 = w.sqrt();
        let w32 = w * w12;
        let w52 = w32 * w;
        let mut h = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let sym = l.dg[(i, j)] * l.dq[k] + l.dg[(i, k)] * l.dq[j] + l.g[i] * l.d2q[(j, k)];
                    h[(i, j, k)] = l.c
                        * ia
                        * (l.d2g[(i, j, k)] / w12 - 0.5 * ia2 * sym / w32
                            + 0.75 * ia2 * ia2 * l.g[i] * l.dq[j] * l.dq[k] / w52);
                }
            }
        }
        h
    }

    /// `∂²xⁱ/∂αʲ∂αᵏ = c∂²g₀ J1 − (c/2)F4 (∂g₀⊗∂q + ∂q⊗∂g₀ + g₀∂²q) + (3c/4)F6 g₀ ∂q⊗∂q`.
    pub fn position_hessian(&self) -> Tensor3 {
        let l = self.label;
        let n = l.dim();
        let c = l.c;
        let TimeIntegrals { j1, f4, f6, .. } = self.ints;
        let mut h = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let sym = l.dg[(i, j)] * l.dq[k] + l.dg[(i, k)] * l.dq[j] + l.g[i] * l.d2q[(j, k)];
                    h[(i, j, k)] =
                        c * l.d2g[(i, j, k)] * j1 - 0.5 * c * f4 * sym + 0.75 * c * f6 * l.g[i] * l.dq[j] * l.dq[k];
                }
            }
        }
        h
    }

    /// Inverse of `∂x/∂α` with its determinant; fails once the map is no
    /// longer orientation preserving.
    pub fn inverse_jacobian(&self) -> Result<(Matrix, f64)> {
        let jac = self.jacobian();
        match jac.inverse_with_det() {
            Some((inv, det)) if det > 0.0 => Ok((inv, det)),
            _ => Err(Error::BlownUp { t: self.t, alpha: self.label.alpha.to_vec(), det: jac.det() }),
        }
    }

    /// `∂v/∂x = (∂v/∂α)(∂x/∂α)⁻¹`.
    pub fn velocity_gradient(&self) -> Result<Matrix> {
        let (inv, _) = self.inverse_jacobian()?;
        Ok(self.velocity_alpha_gradient() * inv)
    }

    /// `∂²αⁱ/∂xʲ∂xᵏ` from derivatives of the cofactors and of the
    /// determinant, chained through `∂α/∂x`.
    pub fn inverse_hessian(&self) -> Result<Tensor3> {
        let jac = self.jacobian();
        let (inv, det) = self.inverse_jacobian()?;
        let n = jac.dim();
        let hx = self.position_hessian();
        let cof = jac.cofactors();
        let mut d_inv = Vec::with_capacity(n);
        for l in 0..n {
            let da = hx.slice_last(l);
            let ddet: f64 =
                (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| cof[(p, q)] * da[(p, q)]).sum();
            let dcof = jac.cofactors_derivative(&da);
            let mut m = Matrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = dcof[(j, i)] / det - cof[(j, i)] * ddet / (det * det);
                }
            }
            d_inv.push(m);
        }
        let mut out = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[(i, j, k)] = (0..n).map(|l| d_inv[l][(i, j)] * inv[(l, k)]).sum();
                }
            }
        }
        Ok(out)
    }

    /// `∂²vⁱ/∂xʲ∂xᵏ = Σ ∂²vⁱ/∂αˡ∂αˢ ∂αˢ/∂xᵏ ∂αˡ/∂xʲ + Σ ∂vⁱ/∂αˡ ∂²αˡ/∂xʲ∂xᵏ`.
    pub fn velocity_x_hessian(&self) -> Result<Tensor3> {
        let (inv, _) = self.inverse_jacobian()?;
        let ia_h = self.inverse_hessian()?;
        let va = self.velocity_alpha_gradient();
        let vaa = self.velocity_alpha_hessian();
        let n = inv.dim();
        let mut out = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        for m in 0..n {
                            s += vaa[(i, l, m)] * inv[(m, k)] * inv[(l, j)];
                        }
                        s += va[(i, l)] * ia_h[(l, j, k)];
                    }
                    out[(i, j, k)] = s;
                }
            }
        }
        Ok(out)
    }
}

/// The explicit bound on `|∂²αⁱ/∂xʲ∂xᵏ|` in terms of a lower bound `N` on
/// `det(∂x/∂α)` and an upper bound `M` on first and second derivatives of
/// the map.
pub fn inverse_hessian_bound(n: usize, big_n: f64, big_m: f64) -> f64 {
    let fact = |k: usize| (1..=k).product::<usize>() as f64;
    let nf = n as f64;
    let cof = fact(n - 1) * big_m.powi(n as i32 - 1) / big_n;
    (fact(n).powi(2) * big_m.powi(2 * n as i32 - 1) / (big_n * big_n)
        + (nf - 1.0) * fact(n - 1) * big_m.powi(n as i32 - 1) / big_n)
        * cof
}

#[derive(Clone, Debug)]
pub struct CharacteristicFlow {
    scale: ScaleFactor,
    data: InitialData,
    quad: QuadOptions,
}

impl CharacteristicFlow {
    pub fn new(scale: ScaleFactor, data: InitialData) -> Self {
        Self { scale, data, quad: QuadOptions::default() }
    }

    pub fn with_quadrature(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }

    pub fn scale(&self) -> &ScaleFactor {
        &self.scale
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    pub fn quadrature(&self) -> &QuadOptions {
        &self.quad
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn label(&self, alpha: &Vector) -> Result<Label> {
        self.data.label(alpha)
    }

    /// The five time integrals for `q` at `t`, computed from scratch.
    pub fn integrals(&self, q: f64, t: f64) -> Result<TimeIntegrals> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        if q == 0.0 && has_closed_form(&self.scale) {
            return closed_form_q0(&self.scale, t);
        }
        let est = integrate(|s| Ok(integrand(&self.scale, q, s)), 0.0, t, &self.quad)?;
        Ok(TimeIntegrals::from_array(est.value))
    }

    pub fn snapshot<'a>(&self, label: &'a Label, t: f64) -> Result<Snapshot<'a>> {
        let ints = self.integrals(label.q, t)?;
        Ok(Snapshot { t, label, ints, inv_a: self.scale.inv_a(t), hubble: self.scale.hubble(t)? })
    }

    pub fn speed_squared(&self, t: f64, alpha: &Vector) -> Result<f64> {
        let label = self.label(alpha)?;
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let ia = self.scale.inv_a(t);
        let c = label.c;
        Ok(c * c * label.q * ia * ia / (1.0 + label.q * ia * ia))
    }

    pub fn velocity(&self, t: f64, alpha: &Vector) -> Result<Vector> {
        let label = self.label(alpha)?;
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let ia = self.scale.inv_a(t);
        Ok(label.g * (label.c * ia / (1.0 + label.q * ia * ia).sqrt()))
    }

    pub fn position(&self, t: f64, alpha: &Vector) -> Result<Vector> {
        let label = self.label(alpha)?;
        Ok(self.snapshot(&label, t)?.position())
    }

    pub fn jacobian(&self, t: f64, alpha: &Vector) -> Result<JacobianEval> {
        let label = self.label(alpha)?;
        let matrix = self.snapshot(&label, t)?.jacobian();
        Ok(JacobianEval { matrix, det: matrix.det(), t, alpha: *alpha })
    }

    pub fn velocity_alpha_gradient(&self, t: f64, alpha: &Vector) -> Result<Matrix> {
        let label = self.label(alpha)?;
        Ok(self.snapshot(&label, t)?.velocity_alpha_gradient())
    }

    pub fn velocity_gradient(&self, t: f64, alpha: &Vector) -> Result<Matrix> {
        let label = self.label(alpha)?;
        self.snapshot(&label, t)?.velocity_gradient()
    }

    pub fn position_hessian(&self, t: f64, alpha: &Vector) -> Result<Tensor3> {
        let label = self.label(alpha)?;
        Ok(self.snapshot(&label, t)?.position_hessian())
    }

    pub fn inverse_hessian(&self, t: f64, alpha: &Vector) -> Result<Tensor3> {
        let label = self.label(alpha)?;
        self.snapshot(&label, t)?.inverse_hessian()
    }

    pub fn velocity_x_hessian(&self, t: f64, alpha: &Vector) -> Result<Tensor3> {
        let label = self.label(alpha)?;
        self.snapshot(&label, t)?.velocity_x_hessian()
    }

    /// Solves `x(t, α) = x` for `α`, seeded at `α = x`.
    pub fn invert_position(&self, t: f64, x: &Vector) -> Result<Vector> {
        self.invert_position_from(t, x, x)
    }

    /// Newton iteration with step halving, from an explicit seed.
    pub fn invert_position_from(&self, t: f64, x: &Vector, seed: &Vector) -> Result<Vector> {
        const MAX_ITER: usize = 100;
        let tol = 1e-9 * (1.0 + x.norm());
        let residual = |alpha: &Vector| -> Result<(Vector, Matrix, f64)> {
            let label = self.label(alpha)?;
            let snap = self.snapshot(&label, t)?;
            let r = snap.position() - *x;
            Ok((r, snap.jacobian(), r.norm()))
        };
        let mut alpha = *seed;
        let (mut r, mut jac, mut rn) = residual(&alpha)?;
        for _ in 0..MAX_ITER {
            if rn <= tol {
                let det = jac.det();
                if det <= 0.0 {
                    return Err(Error::BlownUp { t, alpha: alpha.to_vec(), det });
                }
                return Ok(alpha);
            }
            let Some((inv, _)) = jac.inverse_with_det() else {
                return Err(Error::BlownUp { t, alpha: alpha.to_vec(), det: 0.0 });
            };
            let step = inv.mul_vec(&r);
            let mut lambda = 1.0;
            loop {
                let trial = alpha - step * lambda;
                match residual(&trial) {
                    Ok((tr, tj, tn)) if tn < rn => {
                        alpha = trial;
                        r = tr;
                        jac = tj;
                        rn = tn;
                        break;
                    }
                    _ => {
                        lambda *= 0.5;
                        if lambda < 1e-10 {
                            return Err(Error::Inversion { t, x: x.to_vec(), residual: rn, iterations: MAX_ITER });
                        }
                    }
                }
            }
        }
        if rn <= tol {
            return Ok(alpha);
        }
        Err(Error::Inversion { t, x: x.to_vec(), residual: rn, iterations: MAX_ITER })
    }

    /// A per-label evaluator that caches the time integrals cumulatively.
    pub fn track(&self, alpha: &Vector) -> Result<Track<'_>> {
        let label = self.label(alpha)?;
        let cache =
            if label.q == 0.0 && has_closed_form(&self.scale) { None } else { Some(Cumulative::new(self.quad)) };
        Ok(Track { flow: self, label, cache })
    }
}

/// Evaluator for one label whose integrals are accumulated across queries,
/// so sweeping `t` costs one short quadrature per new time.
#[derive(Clone, Debug)]
pub struct Track<'f> {
    flow: &'f CharacteristicFlow,
    label: Label,
    cache: Option<Cumulative<5>>,
}

impl<'f> Track<'f> {
    pub fn label(&self) -> &Label {
        &self.label
    }

    pub fn flow(&self) -> &'f CharacteristicFlow {
        self.flow
    }

    pub fn integrals(&mut self, t: f64) -> Result<TimeIntegrals> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let scale = &self.flow.scale;
        let q = self.label.q;
        match &mut self.cache {
            None => closed_form_q0(scale, t),
            Some(cache) => Ok(TimeIntegrals::from_array(cache.value(t, |s| Ok(integrand(scale, q, s)))?)),
        }
    }

    pub fn snapshot(&mut self, t: f64) -> Result<Snapshot<'_>> {
        let ints = self.integrals(t)?;
        let scale = &self.flow.scale;
        Ok(Snapshot { t, label: &self.label, ints, inv_a: scale.inv_a(t), hubble: scale.hubble(t)? })
    }

    pub fn det(&mut self, t: f64) -> Result<f64> {
        Ok(self.snapshot(t)?.jacobian().det())
    }
}
