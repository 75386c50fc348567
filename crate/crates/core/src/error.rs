use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("superluminal initial data at alpha = {alpha:?}: eps*|v0| = {speed} >= c = {c}")]
    Superluminal { alpha: Vec<f64>, speed: f64, c: f64 },

    #[error("|v0| is not twice differentiable at alpha = {alpha:?} (v0 = 0 with nonzero gradient)")]
    DegeneratePoint { alpha: Vec<f64> },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("flow map is singular at t = {t}, alpha = {alpha:?}: det = {det}")]
    BlownUp { t: f64, alpha: Vec<f64>, det: f64 },

    #[error("position inversion failed at t = {t}, x = {x:?}: residual {residual:e} after {iterations} iterations")]
    Inversion { t: f64, x: Vec<f64>, residual: f64, iterations: usize },

    #[error("time grid too coarse: det jumps by {jump} between t = {t_lo} and t = {t_hi}")]
    Resolution { t_lo: f64, t_hi: f64, jump: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no det crossing before t_max = {t_max}: F2(t_max) = {f2_at_horizon}, projected F2 at crossing = {projected_f2}")]
    Horizon { t_max: f64, f2_at_horizon: f64, projected_f2: f64 },

    #[error("rate fit rejected: r^2 = {r_squared} below {required}")]
    PoorFit {
        r_squared: f64,
        required: f64,
        /// (t2 - t, |v_r|, rho) for every sample used in the fit.
        samples: Vec<(f64, f64, f64)>,
    },

    #[error("time step {dt:e} exceeds CFL limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-finite grid state at t = {t}")]
    Instability { t: f64 },

    #[error("grid velocity reached light speed at t = {t} in cell {cell}: |v| = {speed}")]
    GridSuperluminal { t: f64, cell: usize, speed: f64 },

    #[error("root bracketing failed: {0}")]
    Bracket(String),
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Dimension { .. } | Error::NegativeTime(_) | Error::Superluminal { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
