//! Global existence versus finite-time blowup.
//!
//! The classical solution lives exactly as long as `det(∂x/∂α) > 0` for
//! every label. [`find_blowup_time`] samples that determinant on an α-grid,
//! brackets its first zero in `t` and refines the minimizing label. The
//! analytic side (life-span lower bounds, ε-thresholds, the 1-D formula and
//! the leading coefficient of `det` as a polynomial in `F2`) lives next to it
//! so reports can carry both.

use rayon::prelude::*;
use serde::Serialize;

use crate::characteristics::{CharacteristicFlow, Track};
use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::roots::{bisect, golden_min, solve_increasing, BisectTol};
use crate::scale::{Regime, ScaleFactor};

/// Default for the free constant `δ ∈ (0,1)` in the thresholds and bounds.
pub const DEFAULT_DELTA: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Global,
    Blowup,
    UndeterminedHorizon,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Global => "global",
            Verdict::Blowup => "blowup",
            Verdict::UndeterminedHorizon => "undetermined-horizon",
        })
    }
}

/// Analytic reason attached to a verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// `v₀ ≡ 0`: characteristics are straight, `∂x/∂α = I`.
    ZeroData,
    /// Fast expansion, `ε` below the threshold, and every sampled
    /// `|∂hⁱ/∂αʲ| ≤ 1/(2n)`.
    DiagonalDominance {
        #[serde(serialize_with = "crate::serde_float::serialize")]
        threshold: f64,
        max_dh: f64,
        bound: f64,
        min_det: f64,
    },
    /// The symmetric part of `∂v₀/∂α` is positive semidefinite at every
    /// sampled label. Recorded alongside the observed minimum of `det`; it
    /// does not by itself prove global existence for `n > 1`.
    MonotoneProfile { min_det: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThresholdName {
    #[serde(rename = "epsilon_1")]
    Epsilon1,
    #[serde(rename = "epsilon_2")]
    Epsilon2,
    #[serde(rename = "epsilon_3")]
    Epsilon3,
}

impl ThresholdName {
    pub fn label(&self) -> &'static str {
        match self {
            ThresholdName::Epsilon1 => "epsilon_1",
            ThresholdName::Epsilon2 => "epsilon_2",
            ThresholdName::Epsilon3 => "epsilon_3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub name: ThresholdName,
    #[serde(serialize_with = "crate::serde_float::serialize")]
    pub value: f64,
    /// Root of the cubic for `ε₁`/`ε₂`.
    #[serde(serialize_with = "crate::serde_float::option::serialize")]
    pub eta: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct ThresholdParams {
    pub c: f64,
    pub m0: f64,
    pub n: usize,
    pub delta: f64,
    /// `ȧ(0)`, needed for fast (H1) expansion only.
    pub adot0: Option<f64>,
}

/// `Ω(c, ε, M₀) = 2cεM₀(c⁴ + ε⁴M₀⁴ + 2c²ε²M₀²)/(c² − ε²M₀²)^{5/2}`, the bound
/// on `|∂hⁱ/∂αʲ|` per unit of `∫a⁻²`.
pub fn omega(c: f64, eps: f64, m0: f64) -> f64 {
    let y = eps * m0;
    let c2 = c * c;
    2.0 * c * y * (c2 + y * y).powi(2) / (c2 - y * y).powf(2.5)
}

fn eta_root(m0: f64, c: f64, rhs: f64) -> Result<f64> {
    if m0 == 0.0 {
        return Ok(f64::INFINITY);
    }
    solve_increasing(|x| x * m0 + (x * m0).powi(3) / (c * c) - rhs, 1e-12)
}

/// `ε₁`, `ε₂` or `ε₃` depending on the regime (`ε₃` also for H4).
pub fn epsilon_threshold(regime: &Regime, p: &ThresholdParams) -> Result<Threshold> {
    if !(p.delta > 0.0 && p.delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0,1), got {}", p.delta)));
    }
    let c = p.c;
    let m0 = p.m0;
    let base = if m0 > 0.0 { c * (1.0 - p.delta.powf(0.4)).sqrt() / m0 } else { f64::INFINITY };
    let nf = p.n as f64;
    let common = p.delta * c * c / (m0 * m0 + c * c);
    let with_eta = |name, rate: f64| -> Result<Threshold> {
        let eta = eta_root(m0, c, rate / (4.0 * nf) * common)?;
        Ok(Threshold { name, value: base.min(eta).min(1.0), eta: Some(eta) })
    };
    match regime {
        Regime::H1 => {
            let adot0 = p.adot0.ok_or_else(|| Error::Precondition("the H1 threshold needs a'(0)".into()))?;
            with_eta(ThresholdName::Epsilon1, adot0)
        }
        Regime::H2 { delta0 } => with_eta(ThresholdName::Epsilon2, *delta0),
        Regime::H3 { .. } | Regime::H4 => Ok(Threshold { name: ThresholdName::Epsilon3, value: base, eta: None }),
    }
}

/// Threshold for a concrete background and data set.
pub fn threshold_for(scale: &ScaleFactor, data: &InitialData, delta: f64) -> Result<Threshold> {
    let regime = scale.regime()?;
    let adot0 = match regime {
        Regime::H1 => Some(scale.da(0.0)?),
        _ => None,
    };
    let p = ThresholdParams { c: data.light_speed(), m0: data.sup_norms().m0, n: data.dim(), delta, adot0 };
    epsilon_threshold(&regime, &p)
}

#[derive(Clone, Copy, Debug)]
pub struct LifespanParams {
    pub eps: f64,
    pub c: f64,
    pub m0: f64,
    pub n: usize,
    pub delta: f64,
}

impl LifespanParams {
    pub fn from_data(data: &InitialData, delta: f64) -> Self {
        Self { eps: data.epsilon(), c: data.light_speed(), m0: data.sup_norms().m0, n: data.dim(), delta }
    }

    /// `P = δc²/(4nM₀(c² + M₀²))`.
    pub fn p_constant(&self) -> f64 {
        let c2 = self.c * self.c;
        self.delta * c2 / (4.0 * self.n as f64 * self.m0 * (c2 + self.m0 * self.m0))
    }
}

/// The time `t` at which `∫₀ᵗ (1+s)^{-2l} ds = x`, or `∞` if the integral
/// stays below `x`.
fn power_law_time(l: f64, x: f64) -> f64 {
    let k = 1.0 - 2.0 * l;
    if k.abs() < 1e-12 {
        return x.exp_m1();
    }
    let inner = k * x;
    if inner <= -1.0 {
        return f64::INFINITY;
    }
    (inner.ln_1p() / k).exp_m1()
}

/// Lower bound `T(ε)` on the life span: `∞` for H1/H2, the explicit
/// `t*(ε)` for H3, and its `l → 0` limit `P/ε` for H4.
pub fn lifespan_bound(regime: &Regime, p: &LifespanParams) -> f64 {
    if p.m0 == 0.0 || p.eps == 0.0 {
        return f64::INFINITY;
    }
    let l = match regime {
        Regime::H1 | Regime::H2 { .. } => return f64::INFINITY,
        Regime::H3 { l } => *l,
        Regime::H4 => 0.0,
    };
    power_law_time(l, p.p_constant() / p.eps)
}

fn slow_exponent(scale: &ScaleFactor) -> Result<f64> {
    match scale.regime()? {
        Regime::H3 { l } => Ok(l),
        Regime::H4 => Ok(0.0),
        other => Err(Error::Precondition(format!("needs slow expansion (H3 or H4), background is {other}"))),
    }
}

/// The 1-D blowup time `t₁(ε)` at label `alpha`: `∞` when `v₀′(α) ≥ 0`,
/// otherwise the time at which `1 + εv₀′(α)Φ(t)/(1+f₀²)^{3/2}` vanishes.
/// That expression bounds `∂x/∂α` from above, so `t₁` bounds the first
/// zero from above and is exact where `v₀(α) = 0`.
pub fn scalar_blowup_time_1d(scale: &ScaleFactor, data: &InitialData, alpha: f64) -> Result<f64> {
    if data.dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: data.dim() });
    }
    let l = slow_exponent(scale)?;
    let a = Vector::from_slice(&[alpha]);
    let dv = data.v0(&a)?.jacobian[(0, 0)];
    if dv >= 0.0 {
        return Ok(f64::INFINITY);
    }
    let f0 = data.f0(&a)?;
    let x = -(1.0 + f0 * f0).powf(1.5) / (data.epsilon() * dv);
    Ok(power_law_time(l, x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeadingCoefficient {
    pub value: f64,
    pub sign: i8,
}

/// Coefficient of `F2ⁿ` in `det(∂x/∂α)`:
/// `(cε)ⁿ/(c² − ε²|v₀|²)^{3n/2} · det(c²∂v₀/∂α − ε²K)`.
pub fn leading_coefficient(data: &InitialData, alpha: &Vector) -> Result<LeadingCoefficient> {
    let label = data.label(alpha)?;
    let n = label.dim() as i32;
    let (c, e) = (label.c, label.eps);
    let m = label.v0.jacobian * (c * c) - label.k_matrix() * (e * e);
    let value = (c * e).powi(n) / label.w.powi(3 * n) * m.det();
    let sign = if value > 0.0 {
        1
    } else if value < 0.0 {
        -1
    } else {
        0
    };
    Ok(LeadingCoefficient { value, sign })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroKind {
    /// `det` changes sign inside `[t_lo, t_hi]`.
    Crossing,
    /// `det` reaches zero (within the tolerance) without changing sign, at
    /// `t_lo = t_hi`.
    Touch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroBracket {
    pub kind: ZeroKind,
    pub t_lo: f64,
    pub t_hi: f64,
    pub det_lo: f64,
    pub det_hi: f64,
}

impl ZeroBracket {
    /// The endpoint with the smaller `|det|`.
    pub fn time(&self) -> f64 {
        if self.det_hi.abs() <= self.det_lo.abs() {
            self.t_hi
        } else {
            self.t_lo
        }
    }

    pub fn det(&self) -> f64 {
        if self.det_hi.abs() <= self.det_lo.abs() {
            self.det_hi
        } else {
            self.det_lo
        }
    }
}

/// Search parameters. Times are sampled at `0` and geometrically from
/// `t_first` to `t_max`.
#[derive(Clone, Debug, Serialize)]
pub struct BlowupSearch {
    pub t_max: f64,
    pub box_lo: f64,
    pub box_hi: f64,
    pub points_per_axis: usize,
    pub samples_per_decade: usize,
    pub t_first: f64,
    /// Sub-sample an interval when `det` moves more than this across it,
    /// measured relative to `max(1, min |det|)` at its ends.
    pub refine_jump: f64,
    /// Give up with a resolution error when a jump this large survives.
    pub max_jump: f64,
    pub det_tol: f64,
    pub t_rel_tol: f64,
    pub descent_rounds: usize,
    pub delta: f64,
}

impl Default for BlowupSearch {
    fn default() -> Self {
        Self {
            t_max: 1e6,
            box_lo: -5.0,
            box_hi: 5.0,
            points_per_axis: 41,
            samples_per_decade: 20,
            t_first: 1e-3,
            refine_jump: 0.05,
            max_jump: 0.5,
            det_tol: 1e-8,
            t_rel_tol: 1e-8,
            descent_rounds: 3,
            delta: DEFAULT_DELTA,
        }
    }
}

impl BlowupSearch {
    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_box(mut self, lo: f64, hi: f64) -> Self {
        self.box_lo = lo;
        self.box_hi = hi;
        self
    }

    pub fn with_points(mut self, points_per_axis: usize) -> Self {
        self.points_per_axis = points_per_axis;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!("t_max must be positive and finite, got {}", self.t_max)));
        }
        if !(self.box_lo < self.box_hi) {
            return Err(Error::Config(format!("empty label box [{}, {}]", self.box_lo, self.box_hi)));
        }
        if self.points_per_axis < 2 || self.samples_per_decade == 0 {
            return Err(Error::Config("grid needs at least 2 points per axis and 1 sample per decade".into()));
        }
        Ok(())
    }

    fn spacing(&self) -> f64 {
        (self.box_hi - self.box_lo) / (self.points_per_axis - 1) as f64
    }

    fn bisect_tol(&self) -> BisectTol {
        BisectTol { x_rel: self.t_rel_tol, f_abs: self.det_tol, ..BisectTol::default() }
    }
}

/// `t_first · 10^{k/m}` up to and including `t_max`.
pub fn time_grid(t_first: f64, t_max: f64, per_decade: usize) -> Vec<f64> {
    if t_max <= t_first {
        return vec![t_max];
    }
    let decades = (t_max / t_first).log10();
    let steps = (decades * per_decade as f64).ceil() as usize;
    let mut out: Vec<f64> = (0..steps).map(|k| t_first * 10f64.powf(k as f64 / per_decade as f64)).collect();
    out.retain(|&t| t < t_max);
    out.push(t_max);
    out
}

/// Uniform tensor grid on `[lo, hi]ⁿ`, last axis fastest.
pub fn alpha_grid(n: usize, lo: f64, hi: f64, points: usize) -> Vec<Vector> {
    let h = (hi - lo) / (points - 1) as f64;
    let total = points.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut v = Vector::zeros(n);
            for axis in (0..n).rev() {
                v[axis] = lo + h * (idx % points) as f64;
                idx /= points;
            }
            v
        })
        .collect()
}

/// Walks `det` along one label from `from` to `to`, sub-sampling wherever
/// it moves more than `refine_jump`.
fn refine_samples(
    track: &mut Track<'_>,
    from: (f64, f64),
    to: (f64, f64),
    cfg: &BlowupSearch,
    depth: usize,
    out: &mut Vec<(f64, f64)>,
) -> Result<()> {
    const MAX_DEPTH: usize = 20;
    // Jumps are absolute near zero and relative once |det| exceeds one.
    let jump = (to.1 - from.1).abs() / from.1.abs().min(to.1.abs()).max(1.0);
    if jump > cfg.refine_jump && depth < MAX_DEPTH {
        let mid = 0.5 * (from.0 + to.0);
        let mid = (mid, track.det(mid)?);
        refine_samples(track, from, mid, cfg, depth + 1, out)?;
        refine_samples(track, mid, to, cfg, depth + 1, out)
    } else if jump > cfg.max_jump {
        Err(Error::Resolution { t_lo: from.0, t_hi: to.0, jump })
    } else {
        out.push(to);
        Ok(())
    }
}

/// Scanning state for one label: the last two samples, for crossings and
/// local minima.
struct ZeroScanner {
    prev2: Option<(f64, f64)>,
    prev: (f64, f64),
}

impl ZeroScanner {
    fn new() -> Self {
        Self { prev2: None, prev: (0.0, 1.0) }
    }

    fn push(&mut self, track: &mut Track<'_>, s: (f64, f64), cfg: &BlowupSearch) -> Result<Option<ZeroBracket>> {
        if s.1 < 0.0 {
            if self.prev.1 == 0.0 {
                let (t, d) = self.prev;
                return Ok(Some(ZeroBracket { kind: ZeroKind::Crossing, t_lo: t, t_hi: t, det_lo: d, det_hi: d }));
            }
            return crossing(track, self.prev.0, s.0, cfg).map(Some);
        }
        // A double root shows up as a small local minimum between samples.
        if let Some(p2) = self.prev2 {
            let p = self.prev;
            if p.1 < p2.1 && p.1 <= s.1 && p.1 < cfg.refine_jump {
                let (tm, dm) = golden_min(|t| track.det(t), p2.0, s.0, 80)?;
                if dm < 0.0 {
                    return crossing(track, p2.0, tm, cfg).map(Some);
                }
                if dm <= cfg.det_tol {
                    return Ok(Some(ZeroBracket { kind: ZeroKind::Touch, t_lo: tm, t_hi: tm, det_lo: dm, det_hi: dm }));
                }
            }
        }
        self.prev2 = Some(self.prev);
        self.prev = s;
        Ok(None)
    }
}

fn crossing(track: &mut Track<'_>, lo: f64, hi: f64, cfg: &BlowupSearch) -> Result<ZeroBracket> {
    let b = bisect(|t| track.det(t), lo, hi, &cfg.bisect_tol())?;
    Ok(ZeroBracket { kind: ZeroKind::Crossing, t_lo: b.lo, t_hi: b.hi, det_lo: b.f_lo, det_hi: b.f_hi })
}

/// First zero of `det(∂x/∂α)(·, α)` on `(0, t_max]`, found by geometric
/// sampling, bisection for sign changes and golden-section search for
/// double roots.
pub fn det_zero_bracket(
    flow: &CharacteristicFlow,
    alpha: &Vector,
    t_max: f64,
    cfg: &BlowupSearch,
) -> Result<Option<ZeroBracket>> {
    let mut track = flow.track(alpha)?;
    let mut scanner = ZeroScanner::new();
    let mut buf = Vec::new();
    for t in time_grid(cfg.t_first.min(t_max), t_max, cfg.samples_per_decade) {
        let d = track.det(t)?;
        buf.clear();
        refine_samples(&mut track, scanner.prev, (t, d), cfg, 0, &mut buf)?;
        for &s in &buf {
            if let Some(z) = scanner.push(&mut track, s, cfg)? {
                return Ok(Some(z));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem2Certificate {
    pub alpha: Vector,
    pub leading: LeadingCoefficient,
    pub bracket: ZeroBracket,
    /// `F2` at the two ends of the bracket.
    pub f2_lo: f64,
    pub f2_hi: f64,
}

/// Confirms that a label with negative leading coefficient reaches
/// `det = 0` before `t_max` under slow expansion.
pub fn theorem2_blowup_certificate(
    flow: &CharacteristicFlow,
    alpha: &Vector,
    t_max: f64,
) -> Result<Theorem2Certificate> {
    slow_exponent(flow.scale())?;
    let leading = leading_coefficient(flow.data(), alpha)?;
    if leading.value >= 0.0 {
        return Err(Error::Precondition(format!(
            "leading coefficient at {:?} is {:e}, not negative",
            alpha.as_slice(),
            leading.value
        )));
    }
    let q = flow.label(alpha)?.q;
    let cfg = BlowupSearch::default();
    match det_zero_bracket(flow, alpha, t_max, &cfg)? {
        Some(bracket) => Ok(Theorem2Certificate {
            alpha: *alpha,
            leading,
            bracket,
            f2_lo: flow.integrals(q, bracket.t_lo)?.f2,
            f2_hi: flow.integrals(q, bracket.t_hi)?.f2,
        }),
        None => Err(Error::Horizon {
            t_max,
            f2_at_horizon: flow.integrals(q, t_max)?.f2,
            projected_f2: leading.value.abs().powf(-1.0 / flow.dim() as f64),
        }),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupReport {
    pub verdict: Verdict,
    #[serde(serialize_with = "crate::serde_float::option::serialize")]
    pub t_blow: Option<f64>,
    pub alpha_star: Option<Vec<f64>>,
    pub det_at_blow: Option<f64>,
    pub zero_kind: Option<ZeroKind>,
    pub regime: Option<Regime>,
    /// Life-span lower bound; `None` when the background is unclassified.
    #[serde(serialize_with = "crate::serde_float::option::serialize")]
    pub analytic_bound: Option<f64>,
    pub epsilon: f64,
    pub epsilon_threshold: Option<Threshold>,
    pub certificate: Option<Certificate>,
    pub labels: usize,
    pub t_max: f64,
    /// `(t, min over sampled labels of det)`, starting at `(0, 1)`.
    pub trace: Vec<(f64, f64)>,
}

struct LabelScan {
    dets: Vec<f64>,
    zero: Option<ZeroBracket>,
    max_dh: f64,
    min_det: f64,
    monotone: bool,
}

fn scan_label(flow: &CharacteristicFlow, alpha: &Vector, times: &[f64], cfg: &BlowupSearch) -> Result<LabelScan> {
    let mut track = flow.track(alpha)?;
    let monotone = track.label().v0.jacobian.symmetric_part_psd(1e-12);
    let n = alpha.dim();
    let mut out = LabelScan { dets: Vec::with_capacity(times.len()), zero: None, max_dh: 0.0, min_det: 1.0, monotone };
    let mut scanner = ZeroScanner::new();
    let mut buf = Vec::new();
    for &t in times {
        let jac = track.snapshot(t)?.jacobian();
        let d = jac.det();
        buf.clear();
        refine_samples(&mut track, scanner.prev, (t, d), cfg, 0, &mut buf)?;
        for &s in &buf {
            if let Some(z) = scanner.push(&mut track, s, cfg)? {
                out.zero = Some(z);
                return Ok(out);
            }
        }
        out.dets.push(d);
        out.min_det = out.min_det.min(d);
        out.max_dh = out.max_dh.max((jac - Matrix::identity(n)).max_abs());
    }
    Ok(out)
}

const MAX_CANDIDATES: usize = 8;

struct Accumulator {
    trace: Vec<f64>,
    candidates: Vec<(f64, usize, ZeroBracket)>,
    max_dh: f64,
    min_det: f64,
    monotone: bool,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self { trace: vec![f64::INFINITY; len], candidates: Vec::new(), max_dh: 0.0, min_det: 1.0, monotone: true }
    }

    fn prune(&mut self) {
        self.candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        self.candidates.truncate(MAX_CANDIDATES);
    }

    fn absorb(mut self, idx: usize, s: LabelScan) -> Self {
        for (m, d) in self.trace.iter_mut().zip(&s.dets) {
            *m = m.min(*d);
        }
        if let Some(z) = s.zero {
            self.candidates.push((z.time(), idx, z));
            self.prune();
        }
        self.max_dh = self.max_dh.max(s.max_dh);
        self.min_det = self.min_det.min(s.min_det);
        self.monotone &= s.monotone;
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for (m, d) in self.trace.iter_mut().zip(&other.trace) {
            *m = m.min(*d);
        }
        self.candidates.extend(other.candidates);
        self.prune();
        self.max_dh = self.max_dh.max(other.max_dh);
        self.min_det = self.min_det.min(other.min_det);
        self.monotone &= other.monotone;
        self
    }
}

fn det_at(flow: &CharacteristicFlow, t: f64, alpha: &Vector) -> Result<f64> {
    Ok(flow.jacobian(t, alpha)?.det)
}

fn clamp_to_box(mut v: Vector, cfg: &BlowupSearch) -> Vector {
    for i in 0..v.dim() {
        v[i] = v[i].clamp(cfg.box_lo, cfg.box_hi);
    }
    v
}

/// Minimizes `det(t, ·)` near `alpha`: a ×3 finer local grid of half-width
/// `radius`, then coordinate descent by golden section.
fn local_min(
    flow: &CharacteristicFlow,
    t: f64,
    alpha: Vector,
    radius: f64,
    cfg: &BlowupSearch,
) -> Result<(Vector, f64)> {
    let n = alpha.dim();
    let mut best = (alpha, det_at(flow, t, &alpha)?);
    let step = radius / 3.0;
    for offset in alpha_grid(n, -radius, radius, 7) {
        let cand = clamp_to_box(alpha + offset, cfg);
        let d = det_at(flow, t, &cand)?;
        if d < best.1 {
            best = (cand, d);
        }
    }
    for _ in 0..cfg.descent_rounds {
        for axis in 0..n {
            let centre = best.0;
            let lo = (centre[axis] - step).max(cfg.box_lo);
            let hi = (centre[axis] + step).min(cfg.box_hi);
            let (x, d) = golden_min(
                |s| {
                    let mut v = centre;
                    v[axis] = s;
                    det_at(flow, t, &v)
                },
                lo,
                hi,
                40,
            )?;
            if d < best.1 {
                best.0[axis] = x;
                best.1 = d;
            }
        }
    }
    Ok(best)
}

/// Alternates label minimization at fixed `t` with re-solving for the
/// first zero of the improved label.
fn refine_candidate(
    flow: &CharacteristicFlow,
    alpha: Vector,
    zero: ZeroBracket,
    cfg: &BlowupSearch,
) -> Result<(Vector, ZeroBracket)> {
    const ITERATIONS: usize = 8;
    let mut best = (alpha, zero);
    let mut radius = cfg.spacing();
    for _ in 0..ITERATIONS {
        let t = best.1.time();
        let (cand, d) = local_min(flow, t, best.0, radius, cfg)?;
        radius /= 3.0;
        if d > cfg.det_tol || cand == best.0 {
            continue;
        }
        let Some(z) = det_zero_bracket(flow, &cand, t, cfg)? else { continue };
        let improvement = t - z.time();
        if z.time() < t {
            best = (cand, z);
        }
        if improvement.abs() <= cfg.t_rel_tol * t {
            break;
        }
    }
    Ok(best)
}

/// Grid search for the first time some label reaches `det(∂x/∂α) = 0`.
pub fn find_blowup_time(flow: &CharacteristicFlow, cfg: &BlowupSearch) -> Result<BlowupReport> {
    cfg.validate()?;
    let data = flow.data();
    let n = data.dim();
    let regime = flow.scale().regime().ok();
    let analytic_bound = regime.map(|r| lifespan_bound(&r, &LifespanParams::from_data(data, cfg.delta)));
    let threshold = match regime {
        Some(_) => Some(threshold_for(flow.scale(), data, cfg.delta)?),
        None => None,
    };
    let mut report = BlowupReport {
        verdict: Verdict::UndeterminedHorizon,
        t_blow: None,
        alpha_star: None,
        det_at_blow: None,
        zero_kind: None,
        regime,
        analytic_bound,
        epsilon: data.epsilon(),
        epsilon_threshold: threshold,
        certificate: None,
        labels: 0,
        t_max: cfg.t_max,
        trace: vec![(0.0, 1.0)],
    };

    if data.velocity_field().is_identically_zero() {
        report.verdict = Verdict::Global;
        report.certificate = Some(Certificate::ZeroData);
        report.trace.push((cfg.t_max, 1.0));
        return Ok(report);
    }

    let times = time_grid(cfg.t_first.min(cfg.t_max), cfg.t_max, cfg.samples_per_decade);
    let labels = alpha_grid(n, cfg.box_lo, cfg.box_hi, cfg.points_per_axis);
    report.labels = labels.len();
    let acc = labels
        .par_iter()
        .enumerate()
        .map(|(idx, alpha)| scan_label(flow, alpha, &times, cfg).map(|s| (idx, s)))
        .try_fold(
            || Accumulator::new(times.len()),
            |acc, item| -> Result<Accumulator> {
                let (idx, s) = item?;
                Ok(acc.absorb(idx, s))
            },
        )
        .try_reduce(|| Accumulator::new(times.len()), |a, b| Ok(a.merge(b)))?;

    if !acc.candidates.is_empty() {
        let refined: Vec<(Vector, ZeroBracket)> = acc
            .candidates
            .par_iter()
            .map(|&(_, idx, z)| refine_candidate(flow, labels[idx], z, cfg))
            .collect::<Result<_>>()?;
        let (alpha, zero) =
            refined.into_iter().min_by(|a, b| a.1.time().total_cmp(&b.1.time())).expect("at least one candidate");
        let t_blow = zero.time();
        report.verdict = Verdict::Blowup;
        report.t_blow = Some(t_blow);
        report.alpha_star = Some(alpha.to_vec());
        report.det_at_blow = Some(zero.det());
        report.zero_kind = Some(zero.kind);
        report.trace.extend(times.iter().zip(&acc.trace).filter(|(t, _)| **t < t_blow).map(|(t, d)| (*t, *d)));
        return Ok(report);
    }

    report.trace.extend(times.iter().copied().zip(acc.trace.iter().copied()));
    let bound = 1.0 / (2.0 * n as f64);
    let fast = regime.is_some_and(|r| r.is_expanding_fast());
    match threshold {
        Some(th) if fast && data.epsilon() <= th.value && acc.max_dh <= bound => {
            report.verdict = Verdict::Global;
            report.certificate = Some(Certificate::DiagonalDominance {
                threshold: th.value,
                max_dh: acc.max_dh,
                bound,
                min_det: acc.min_det,
            });
        }
        _ if acc.monotone => {
            report.certificate = Some(Certificate::MonotoneProfile { min_det: acc.min_det });
        }
        _ => {}
    }
    Ok(report)
}
