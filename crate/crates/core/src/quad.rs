//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! Intervals are seeded with breakpoints geometric in `1 + s`, which keeps
//! rapidly decaying integrands (`e^{-2Hs}` over long horizons) from being
//! sampled only where they have underflowed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Published tables, kept verbatim.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_floor: 1e-14, max_panels: 10_000 }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub panels: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn gk15<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let fc = f(center)?;
    for c in 0..N {
        kron[c] = WGK[7] * fc[c];
        gauss[c] = WG[3] * fc[c];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        for c in 0..N {
            let s = f1[c] + f2[c];
            kron[c] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        value[c] = kron[c] * half;
        error[c] = ((kron[c] - gauss[c]) * half).abs();
        if !value[c].is_finite() {
            return Err(Error::Quadrature { achieved: f64::INFINITY, requested: 0.0 });
        }
    }
    Ok((value, error))
}

/// Breakpoints geometric in `1 + s` from `a` to `b`.
fn seed_breakpoints(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let base = 1.0 + a.max(0.0);
    let mut k = 1;
    loop {
        let next = base * 2f64.powi(k) - 1.0;
        if next >= b || k > 200 {
            break;
        }
        if next > a {
            pts.push(next);
        }
        k += 1;
    }
    pts.push(b);
    pts
}

/// Integrates every component of `f` over `[a, b]`.
///
/// Converges when each component's summed error is below
/// `max(abs_floor, rel_tol * |value|)`.
pub fn integrate<const N: usize, F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    if a == b {
        return Ok(Estimate { value: [0.0; N], error: [0.0; N], panels: 0 });
    }
    if b < a {
        let mut e = integrate(f, b, a, opts)?;
        for c in 0..N {
            e.value[c] = -e.value[c];
        }
        return Ok(e);
    }

    let priority = |err: &[f64; N], val: &[f64; N]| -> f64 {
        (0..N).map(|c| err[c] / (opts.rel_tol * val[c].abs()).max(opts.abs_floor)).fold(0.0, f64::max)
    };

    let mut heap = BinaryHeap::new();
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    let pts = seed_breakpoints(a, b);
    for w in pts.windows(2) {
        let (value, error) = gk15(&mut f, w[0], w[1])?;
        for c in 0..N {
            total[c] += value[c];
            total_err[c] += error[c];
        }
        heap.push(Panel { a: w[0], b: w[1], value, error, priority: priority(&error, &value) });
    }

    let converged = |total: &[f64; N], err: &[f64; N]| {
        (0..N).all(|c| err[c] <= (opts.rel_tol * total[c].abs()).max(opts.abs_floor))
    };

    while !converged(&total, &total_err) {
        if heap.len() >= opts.max_panels {
            let achieved = (0..N).map(|c| total_err[c] / total[c].abs().max(opts.abs_floor)).fold(0.0, f64::max);
            return Err(Error::Quadrature { achieved, requested: opts.rel_tol });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point; accept it.
            heap.push(Panel { priority: 0.0, ..worst });
            if heap.iter().all(|p| p.priority == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        for c in 0..N {
            total[c] += v1[c] + v2[c] - worst.value[c];
            total_err[c] += e1[c] + e2[c] - worst.error[c];
        }
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, priority: priority(&e1, &v1) });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, priority: priority(&e2, &v2) });
    }

    // Recompute the sums from the panels to shed accumulated cancellation.
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let panels = heap.len();
    for p in heap {
        for c in 0..N {
            value[c] += p.value[c];
            error[c] += p.error[c];
        }
    }
    Ok(Estimate { value, error, panels })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|s| Ok([f(s)]), a, b, opts).map(|e| e.value[0])
}

/// Running integral `∫₀ᵗ f` stored at every time it has been queried, so later
/// queries only integrate from the nearest earlier knot.
#[derive(Clone, Debug)]
pub struct Cumulative<const N: usize> {
    knots: Vec<(f64, [f64; N])>,
    opts: QuadOptions,
}

impl<const N: usize> Cumulative<N> {
    const MAX_KNOTS: usize = 1 << 16;

    pub fn new(opts: QuadOptions) -> Self {
        Self { knots: vec![(0.0, [0.0; N])], opts }
    }

    pub fn value<F>(&mut self, t: f64, f: F) -> Result<[f64; N]>
    where
        F: FnMut(f64) -> Result<[f64; N]>,
    {
        let idx = self.knots.partition_point(|k| k.0 <= t) - 1;
        let (t0, base) = self.knots[idx];
        if t == t0 {
            return Ok(base);
        }
        let inc = integrate(f, t0, t, &self.opts)?;
        let mut out = base;
        for (o, d) in out.iter_mut().zip(inc.value) {
            *o += d;
        }
        if self.knots.len() < Self::MAX_KNOTS {
            self.knots.insert(idx + 1, (t, out));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }
}
