//! Finite-volume solver for the 1-D and radial system, used only to
//! cross-check the characteristic solution.
//!
//! ```text
//! ∂ₜv + ∂ₓ(v²/2a) = −(ȧ/a) v (1 − v²/c²)
//! ∂ₜρ + ∂ₓ(ρv/a)  = −(ȧ/a)(n − v²/c²) ρ
//! ```
//!
//! Advection uses local Lax–Friedrichs for `v` and upwinding for `ρ`, with
//! `a` frozen at the half step. The sources are integrated exactly and
//! Strang-split around the advection: with `G = v/√(c² − v²)` and
//! `r = a(t)/a(t+h)`, `G` scales by `r` and `ρ` by `rⁿ √((1+G²)/(1+G²r²))`.

use serde::Serialize;

use crate::characteristics::CharacteristicFlow;
use crate::data::InitialData;
use crate::density::DensityTrack;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::scale::ScaleFactor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reconstruction {
    None,
    Minmod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Outflow at both ends.
    Planar,
    /// `x` is the radius; mirror at `r = 0`, outflow at the far end.
    Radial,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleConfig {
    pub n_cells: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub reconstruction: Reconstruction,
    pub geometry: Geometry,
    /// Number of equal intervals between stored snapshots.
    pub snapshots: usize,
    /// The monitor fires once `max|Δv|/Δx` exceeds this multiple of its
    /// initial value.
    pub monitor_factor: f64,
    /// `n` in the density dilution term.
    pub space_dim: usize,
    /// Adds `−(n−1)ρv/(a r)` to the radial density equation.
    pub radial_curvature: bool,
    pub max_steps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_cells: 400,
            x_lo: -5.0,
            x_hi: 5.0,
            cfl: 0.45,
            t_end: 1.0,
            reconstruction: Reconstruction::None,
            geometry: Geometry::Planar,
            snapshots: 1,
            monitor_factor: 1e3,
            space_dim: 1,
            radial_curvature: false,
            max_steps: 10_000_000,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_cells < 2 {
            return bad(format!("need at least 2 cells, got {}", self.n_cells));
        }
        if !(self.x_lo < self.x_hi) {
            return bad(format!("empty domain [{}, {}]", self.x_lo, self.x_hi));
        }
        if self.geometry == Geometry::Radial && self.x_lo != 0.0 {
            return bad("radial grids start at r = 0".into());
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl must lie in (0,1), got {}", self.cfl));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        if self.snapshots == 0 {
            return bad("snapshots must be positive".into());
        }
        if !(1..=3).contains(&self.space_dim) {
            return bad(format!("space_dim must be 1, 2 or 3, got {}", self.space_dim));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridState {
    pub x_lo: f64,
    pub x_hi: f64,
    pub v: Vec<f64>,
    pub rho: Vec<f64>,
    pub t: f64,
    pub cfl: f64,
}

impl GridState {
    /// Cell-centre samples of `εv₀` and `ερ₀`.
    pub fn from_data(cfg: &OracleConfig, data: &InitialData) -> Result<Self> {
        cfg.validate()?;
        if data.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: data.dim() });
        }
        let eps = data.epsilon();
        let mut state = GridState {
            x_lo: cfg.x_lo,
            x_hi: cfg.x_hi,
            v: Vec::with_capacity(cfg.n_cells),
            rho: Vec::with_capacity(cfg.n_cells),
            t: 0.0,
            cfl: cfg.cfl,
        };
        for x in state.centers_for(cfg.n_cells) {
            let p = Vector::from_slice(&[x]);
            state.v.push(eps * data.v0(&p)?.value[0]);
            state.rho.push(eps * data.rho0(&p)?.value);
        }
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.len() as f64
    }

    fn centers_for(&self, n: usize) -> Vec<f64> {
        let dx = (self.x_hi - self.x_lo) / n as f64;
        (0..n).map(|i| self.x_lo + (i as f64 + 0.5) * dx).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.centers_for(self.len())
    }

    /// `max |v_{i+1} − v_i| / Δx`.
    pub fn max_gradient(&self) -> f64 {
        let dx = self.dx();
        self.v.windows(2).map(|w| (w[1] - w[0]).abs() / dx).fold(0.0, f64::max)
    }

    pub fn max_speed(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

#[derive(Clone, Debug)]
pub struct Solver {
    scale: ScaleFactor,
    c: f64,
    cfg: OracleConfig,
}

impl Solver {
    pub fn new(scale: ScaleFactor, c: f64, cfg: OracleConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { scale, c, cfg })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    /// Largest stable step at the state's time.
    pub fn max_dt(&self, state: &GridState) -> Result<f64> {
        let speed = state.max_speed();
        if speed == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(state.cfl * state.dx() * self.scale.a(state.t)? / speed)
    }

    /// One step of the largest stable size, clipped at `t_end`.
    pub fn step(&self, state: &GridState) -> Result<GridState> {
        let dt = self.max_dt(state)?.min(self.cfg.t_end - state.t);
        if !(dt > 0.0) {
            return Ok(state.clone());
        }
        self.step_dt(state, dt)
    }

    /// One step of size `dt`; fails if `dt` exceeds the CFL limit.
    pub fn step_dt(&self, state: &GridState, dt: f64) -> Result<GridState> {
        let limit = self.max_dt(state)?;
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        let t0 = state.t;
        let (mut v, mut rho) = (state.v.clone(), state.rho.clone());
        self.source(&mut v, &mut rho, t0, t0 + 0.5 * dt);
        let a_mid = self.scale.a(t0 + 0.5 * dt)?;
        let dx = state.dx();
        match self.cfg.reconstruction {
            Reconstruction::None => {
                let (dv, dr) = self.rates(&v, &rho, a_mid, dx);
                for i in 0..v.len() {
                    v[i] += dt * dv[i];
                    rho[i] += dt * dr[i];
                }
            }
            Reconstruction::Minmod => {
                let (dv, dr) = self.rates(&v, &rho, a_mid, dx);
                let v1: Vec<f64> = v.iter().zip(&dv).map(|(x, d)| x + dt * d).collect();
                let r1: Vec<f64> = rho.iter().zip(&dr).map(|(x, d)| x + dt * d).collect();
                let (dv1, dr1) = self.rates(&v1, &r1, a_mid, dx);
                for i in 0..v.len() {
                    v[i] = 0.5 * v[i] + 0.5 * (v1[i] + dt * dv1[i]);
                    rho[i] = 0.5 * rho[i] + 0.5 * (r1[i] + dt * dr1[i]);
                }
            }
        }
        self.source(&mut v, &mut rho, t0 + 0.5 * dt, t0 + dt);
        let t = t0 + dt;
        for (i, (&vi, &ri)) in v.iter().zip(&rho).enumerate() {
            if !vi.is_finite() || !ri.is_finite() || ri < 0.0 {
                return Err(Error::Instability { t });
            }
            if vi.abs() >= self.c {
                return Err(Error::GridSuperluminal { t, cell: i, speed: vi.abs() });
            }
        }
        Ok(GridState { v, rho, t, ..state.clone() })
    }

    /// Exact solution of the source ODEs from `t0` to `t1`.
    fn source(&self, v: &mut [f64], rho: &mut [f64], t0: f64, t1: f64) {
        let r = self.scale.inv_a(t1) / self.scale.inv_a(t0);
        if r == 1.0 {
            return;
        }
        let c = self.c;
        let rn = r.powi(self.cfg.space_dim as i32);
        for (vi, ri) in v.iter_mut().zip(rho.iter_mut()) {
            let g = *vi / (c * c - *vi * *vi).sqrt();
            let gr = g * r;
            let w = 1.0 + gr * gr;
            *vi = c * gr / w.sqrt();
            *ri *= rn * ((1.0 + g * g) / w).sqrt();
        }
    }

    /// Semi-discrete right-hand sides of the advection part.
    fn rates(&self, v: &[f64], rho: &[f64], a: f64, dx: f64) -> (Vec<f64>, Vec<f64>) {
        let n = v.len();
        // Two ghost cells on each side.
        let ghost = |i: isize| -> (f64, f64) {
            if i < 0 {
                match self.cfg.geometry {
                    Geometry::Planar => (v[0], rho[0]),
                    Geometry::Radial => {
                        let m = (-i - 1) as usize;
                        (-v[m.min(n - 1)], rho[m.min(n - 1)])
                    }
                }
            } else if i as usize >= n {
                (v[n - 1], rho[n - 1])
            } else {
                (v[i as usize], rho[i as usize])
            }
        };
        let minmod_on = self.cfg.reconstruction == Reconstruction::Minmod;
        // Left and right states at face i−½ for i in 0..=n.
        let face = |i: isize| -> ((f64, f64), (f64, f64)) {
            let (vl, rl) = ghost(i - 1);
            let (vr, rr) = ghost(i);
            if !minmod_on {
                return ((vl, rl), (vr, rr));
            }
            let (vll, rll) = ghost(i - 2);
            let (vrr, rrr) = ghost(i + 1);
            let l = (vl + 0.5 * minmod(vl - vll, vr - vl), rl + 0.5 * minmod(rl - rll, rr - rl));
            let r = (vr - 0.5 * minmod(vr - vl, vrr - vr), rr - 0.5 * minmod(rr - rl, rrr - rr));
            (l, r)
        };
        let mut fv = Vec::with_capacity(n + 1);
        let mut fr = Vec::with_capacity(n + 1);
        for i in 0..=n as isize {
            let ((vl, rl), (vr, rr)) = face(i);
            let s = vl.abs().max(vr.abs()) / a;
            fv.push(0.25 * (vl * vl + vr * vr) / a - 0.5 * s * (vr - vl));
            let u = 0.5 * (vl + vr);
            fr.push(u / a * if u >= 0.0 { rl } else { rr });
        }
        let dv = (0..n).map(|i| -(fv[i + 1] - fv[i]) / dx).collect();
        let mut dr: Vec<f64> = (0..n).map(|i| -(fr[i + 1] - fr[i]) / dx).collect();
        if self.cfg.geometry == Geometry::Radial && self.cfg.radial_curvature {
            let k = (self.cfg.space_dim - 1) as f64;
            for (i, d) in dr.iter_mut().enumerate() {
                let r = (i as f64 + 0.5) * dx;
                *d -= k * rho[i] * v[i] / (a * r);
            }
        }
        (dv, dr)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<GridState>,
    /// Time at which the gradient monitor fired.
    pub blowup_indicator: Option<f64>,
    pub initial_gradient: f64,
    pub steps: usize,
}

/// Evolves to `t_end` or until the gradient monitor fires, storing
/// equally spaced snapshots (plus the final state if the monitor fired).
pub fn run(scale: &ScaleFactor, data: &InitialData, cfg: &OracleConfig) -> Result<Trajectory> {
    let solver = Solver::new(scale.clone(), data.light_speed(), cfg.clone())?;
    let mut state = GridState::from_data(cfg, data)?;
    let initial_gradient = state.max_gradient();
    let mut snapshots = vec![state.clone()];
    let mut steps = 0;
    let mut blowup_indicator = None;
    'outer: for k in 1..=cfg.snapshots {
        let target = cfg.t_end * k as f64 / cfg.snapshots as f64;
        while state.t < target {
            if steps >= cfg.max_steps {
                return Err(Error::Instability { t: state.t });
            }
            let dt = solver.max_dt(&state)?.min(target - state.t);
            state = solver.step_dt(&state, dt)?;
            if target - state.t <= 1e-14 * target.max(1.0) {
                state.t = target;
            }
            steps += 1;
            if initial_gradient > 0.0 && state.max_gradient() > cfg.monitor_factor * initial_gradient {
                blowup_indicator = Some(state.t);
                snapshots.push(state.clone());
                break 'outer;
            }
        }
        snapshots.push(state.clone());
    }
    Ok(Trajectory { snapshots, blowup_indicator, initial_gradient, steps })
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SnapshotError {
    pub t: f64,
    pub linf_v: f64,
    pub l1_v: f64,
    pub linf_rho: f64,
    pub l1_rho: f64,
    /// Cells whose label could not be recovered.
    pub excluded: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ErrorReport {
    pub snapshots: Vec<SnapshotError>,
    pub linf_v: f64,
    pub l1_v: f64,
    pub linf_rho: f64,
    pub l1_rho: f64,
    pub excluded: usize,
}

/// Grid values against the characteristic solution at the cell centres.
/// The density uses `space_dim` in its dilution term.
pub fn compare(traj: &Trajectory, flow: &CharacteristicFlow, space_dim: usize) -> Result<ErrorReport> {
    let mut report = ErrorReport::default();
    for snap in &traj.snapshots {
        let dx = snap.dx();
        let mut e = SnapshotError { t: snap.t, ..SnapshotError::default() };
        let mut seed: Option<Vector> = None;
        for (i, x) in snap.centers().into_iter().enumerate() {
            let xv = Vector::from_slice(&[x]);
            let alpha = match seed {
                Some(s) => flow.invert_position_from(snap.t, &xv, &s).or_else(|_| flow.invert_position(snap.t, &xv)),
                None => flow.invert_position(snap.t, &xv),
            };
            let exact = alpha.and_then(|a| {
                let v = flow.velocity(snap.t, &a)?[0];
                let rho = DensityTrack::scalar(flow, &a)?.with_geometric_dim(space_dim).density(snap.t)?;
                Ok((a, v, rho))
            });
            match exact {
                Ok((a, v, rho)) => {
                    seed = Some(a);
                    let dv = (snap.v[i] - v).abs();
                    let dr = (snap.rho[i] - rho).abs();
                    e.linf_v = e.linf_v.max(dv);
                    e.l1_v += dv * dx;
                    e.linf_rho = e.linf_rho.max(dr);
                    e.l1_rho += dr * dx;
                }
                Err(Error::BlownUp { .. } | Error::Inversion { .. }) => {
                    seed = None;
                    e.excluded += 1;
                }
                Err(other) => return Err(other),
            }
        }
        report.linf_v = report.linf_v.max(e.linf_v);
        report.l1_v = report.l1_v.max(e.l1_v);
        report.linf_rho = report.linf_rho.max(e.linf_rho);
        report.l1_rho = report.l1_rho.max(e.l1_rho);
        report.excluded += e.excluded;
        report.snapshots.push(e);
    }
    Ok(report)
}
