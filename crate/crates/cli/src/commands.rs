use dustflow::blowup::{
    find_blowup_time, lifespan_bound, omega, threshold_for, BlowupReport, BlowupSearch, LifespanParams, Threshold,
    Verdict,
};
use dustflow::characteristics::CharacteristicFlow;
use dustflow::data::{InitialData, NormBounds};
use dustflow::density::DensityTrack;
use dustflow::linalg::Vector;
use dustflow::oracle::{compare, run, ErrorReport, Geometry};
use dustflow::scale::{Regime, ScaleFactor};
use dustflow::serde_float;
use dustflow::spherical::{RateFit, SphericalFlow};
use dustflow::stats::{linear_fit, LinearFit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, Artifact, Table};

type Out = Result<Vec<Artifact>, CliError>;

/// Regime and threshold lines shared by every summary.
struct Context {
    scale: ScaleFactor,
    data: InitialData,
    regime: Option<Regime>,
    threshold: Option<Threshold>,
    delta: f64,
}

impl Context {
    fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let scale = cfg.scale()?;
        let data = cfg.data()?;
        let regime = scale.regime().ok();
        let delta = cfg.thresholds.delta;
        let threshold = match regime {
            Some(_) => Some(threshold_for(&scale, &data, delta)?),
            None => None,
        };
        Ok(Self { scale, data, regime, threshold, delta })
    }

    fn regime_label(&self) -> String {
        self.regime.map_or_else(|| "unclassified".into(), |r| r.to_string())
    }

    fn bound_for(&self, data: &InitialData) -> Option<f64> {
        self.regime.map(|r| lifespan_bound(&r, &LifespanParams::from_data(data, self.delta)))
    }

    fn summary_header(&self) -> String {
        let mut s = format!("regime: {}\nepsilon: {}\n", self.regime_label(), num(self.data.epsilon()));
        match &self.threshold {
            Some(th) => s.push_str(&format!("threshold: {} = {}\n", th.name.label(), num(th.value))),
            None => s.push_str("threshold: none (unclassified background)\n"),
        }
        s
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), num)
}

#[derive(Serialize)]
struct SimRow {
    t: f64,
    alpha: Vec<f64>,
    x: Vec<f64>,
    v: Vec<f64>,
    det: f64,
    rho: Option<f64>,
    status: &'static str,
}

#[derive(Serialize)]
struct SimulateReport {
    regime: String,
    epsilon: f64,
    epsilon_threshold: Option<Threshold>,
    #[serde(serialize_with = "serde_float::option::serialize")]
    analytic_bound: Option<f64>,
    seed: u64,
    rows: Vec<SimRow>,
}

pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> Out {
    let ctx = Context::new(cfg)?;
    let n = ctx.data.dim();
    let s = &cfg.simulate;
    let mut labels = Vec::new();
    for l in &s.labels {
        if l.len() != n {
            return Err(CliError::Config(format!("label {l:?} has {} components, data has {n}", l.len())));
        }
        labels.push(Vector::from_slice(l));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [lo, hi] = s.label_box;
    if s.random_labels > 0 && !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Config(format!("empty label_box [{lo}, {hi}]")));
    }
    for _ in 0..s.random_labels {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        labels.push(Vector::from_slice(&v));
    }
    if labels.is_empty() {
        labels.push(Vector::zeros(n));
    }
    if let Some(t) = s.times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(CliError::Config(format!("simulate times must be finite and nonnegative, got {t}")));
    }
    let flow = CharacteristicFlow::new(ctx.scale.clone(), ctx.data.clone());
    let per_label: Vec<Vec<SimRow>> = labels
        .par_iter()
        .map(|alpha| -> Result<Vec<SimRow>, CliError> {
            let mut track = DensityTrack::scalar(&flow, alpha)?;
            let mut rows = Vec::with_capacity(s.times.len());
            for &t in &s.times {
                let x = flow.position(t, alpha)?.to_vec();
                let v = flow.velocity(t, alpha)?.to_vec();
                let det = flow.jacobian(t, alpha)?.det;
                let (rho, status) = match track.density(t) {
                    Ok(r) => (Some(r), "ok"),
                    Err(dustflow::Error::BlownUp { .. }) => (None, "blown-up"),
                    Err(e) => return Err(e.into()),
                };
                rows.push(SimRow { t, alpha: alpha.to_vec(), x, v, det, rho, status });
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<SimRow> = per_label.into_iter().flatten().collect();

    let axis = |p: &'static str| (1..=n).map(move |i| format!("{p}{i}"));
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(axis("alpha"))
        .chain(axis("x"))
        .chain(axis("v"))
        .chain(["det".into(), "rho".into(), "status".into()])
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header_refs);
    for r in &rows {
        let mut cells = vec![num(r.t)];
        cells.extend(r.alpha.iter().chain(&r.x).chain(&r.v).map(|&x| num(x)));
        cells.push(num(r.det));
        cells.push(opt_num(r.rho));
        cells.push(r.status.into());
        table.row(&cells);
    }
    let blown = rows.iter().filter(|r| r.status != "ok").count();
    let mut summary = ctx.summary_header();
    summary.push_str(&format!("samples: {} ({} past blowup)\n", rows.len(), blown));
    let report = SimulateReport {
        regime: ctx.regime_label(),
        epsilon: ctx.data.epsilon(),
        epsilon_threshold: ctx.threshold,
        analytic_bound: ctx.bound_for(&ctx.data),
        seed,
        rows,
    };
    Ok(vec![
        Artifact::json("simulate.json", &report)?,
        table.into_artifact("simulate.csv"),
        Artifact::text("simulate_summary.txt", summary),
    ])
}

#[derive(Serialize)]
struct SweepRow {
    epsilon: f64,
    #[serde(serialize_with = "serde_float::option::serialize")]
    t_blow: Option<f64>,
    #[serde(serialize_with = "serde_float::option::serialize")]
    analytic_bound: Option<f64>,
    regime: String,
    status: String,
    alpha_star: Option<Vec<f64>>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepReport {
    regime: String,
    epsilon_threshold: Option<Threshold>,
    /// `1/(1 − 2l)` for slow power laws.
    expected_slope: Option<f64>,
    /// `log(1 + t_blow)` against `log(1/ε)` over the rows that blew up.
    fit: Option<LinearFit>,
    rows: Vec<SweepRow>,
}

pub fn sweep(cfg: &ExperimentConfig) -> Out {
    let ctx = Context::new(cfg)?;
    let eps_list = &cfg.sweep.as_ref().ok_or_else(|| CliError::Config("missing [sweep] block".into()))?.epsilons;
    if eps_list.is_empty() {
        return Err(CliError::Config("sweep.epsilons is empty".into()));
    }
    let datasets: Vec<InitialData> = eps_list.iter().map(|&e| ctx.data.with_epsilon(e)).collect::<Result<_, _>>()?;
    let search = cfg.blowup_search();
    let regime = ctx.regime_label();
    let rows: Vec<SweepRow> = datasets
        .par_iter()
        .map(|d| {
            let flow = CharacteristicFlow::new(ctx.scale.clone(), d.clone());
            let mut row = SweepRow {
                epsilon: d.epsilon(),
                t_blow: None,
                analytic_bound: ctx.bound_for(d),
                regime: regime.clone(),
                status: String::new(),
                alpha_star: None,
                error: None,
            };
            match find_blowup_time(&flow, &search) {
                Ok(r) => {
                    row.t_blow = r.t_blow;
                    row.alpha_star = r.alpha_star;
                    row.status = r.verdict.to_string();
                }
                Err(e) => {
                    row.status = "error".into();
                    row.error = Some(e.to_string());
                }
            }
            row
        })
        .collect();

    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| r.t_blow.map(|t| ((1.0 / r.epsilon).ln(), t.ln_1p()))).unzip();
    let fit = if xs.len() >= 2 { linear_fit(&xs, &ys) } else { None };
    let expected_slope = match ctx.regime {
        Some(Regime::H3 { l }) if l < 0.5 => Some(1.0 / (1.0 - 2.0 * l)),
        _ => None,
    };

    let mut table = Table::new(&["epsilon", "t_blow", "analytic_bound", "regime", "status"]);
    for r in &rows {
        table.row(&[num(r.epsilon), opt_num(r.t_blow), opt_num(r.analytic_bound), r.regime.clone(), r.status.clone()]);
    }
    let mut summary = ctx.summary_header();
    for r in &rows {
        summary.push_str(&format!(
            "epsilon {}: {} (t_blow {}, bound {})\n",
            num(r.epsilon),
            r.status,
            opt_num(r.t_blow),
            opt_num(r.analytic_bound)
        ));
    }
    if let Some(f) = &fit {
        summary.push_str(&format!(
            "slope of log(1+t_blow) vs log(1/epsilon): {} (r^2 {})\n",
            num(f.slope),
            num(f.r_squared)
        ));
    }
    let report = SweepReport { regime, epsilon_threshold: ctx.threshold, expected_slope, fit, rows };
    Ok(vec![
        Artifact::json("sweep.json", &report)?,
        table.into_artifact("sweep.csv"),
        Artifact::text("sweep_summary.txt", summary),
    ])
}

fn verdict_lines(r: &BlowupReport) -> String {
    let mut s = format!("verdict: {}\n", r.verdict);
    if r.verdict == Verdict::Blowup {
        s.push_str(&format!(
            "t_blow: {}\nalpha_star: {:?}\n",
            opt_num(r.t_blow),
            r.alpha_star.clone().unwrap_or_default()
        ));
    }
    s.push_str(&format!("analytic_bound: {}\n", opt_num(r.analytic_bound)));
    s
}

pub fn blowup(cfg: &ExperimentConfig) -> Out {
    let ctx = Context::new(cfg)?;
    let flow = CharacteristicFlow::new(ctx.scale.clone(), ctx.data.clone());
    let search = cfg.blowup_search();
    let report = find_blowup_time(&flow, &search)?;
    let mut trace = Table::new(&["t", "min_det"]);
    for &(t, d) in &report.trace {
        trace.row(&[num(t), num(d)]);
    }
    let mut summary = ctx.summary_header();
    summary.push_str(&verdict_lines(&report));
    Ok(vec![
        Artifact::json("blowup.json", &report)?,
        trace.into_artifact("blowup_trace.csv"),
        Artifact::text("blowup_summary.txt", summary),
    ])
}

#[derive(Serialize)]
struct LevelReport {
    n_cells: usize,
    steps: usize,
    blowup_indicator: Option<f64>,
    /// `|indicator − t₂|/t₂` when both exist.
    indicator_rel_error: Option<f64>,
    initial_gradient: f64,
    errors: ErrorReport,
}

#[derive(Serialize)]
struct OracleReport {
    regime: String,
    geometry: Geometry,
    characteristic_t2: Option<f64>,
    /// `L∞(v)` at the last snapshot of each level over the next.
    linf_v_ratios: Vec<f64>,
    levels: Vec<LevelReport>,
}

pub fn oracle_compare(cfg: &ExperimentConfig) -> Out {
    let ctx = Context::new(cfg)?;
    if ctx.data.dim() != 1 {
        return Err(CliError::Config(format!("oracle-compare needs 1-D data, got dim = {}", ctx.data.dim())));
    }
    let levels = cfg.oracle_levels()?;
    let first = &levels[0];
    let radial = first.geometry == Geometry::Radial;
    let flow = if radial {
        SphericalFlow::new(ctx.scale.clone(), ctx.data.clone(), first.space_dim)?.flow().clone()
    } else {
        CharacteristicFlow::new(ctx.scale.clone(), ctx.data.clone())
    };
    let search = BlowupSearch::default().with_box(first.x_lo, first.x_hi).with_t_max(2.0 * first.t_end.max(1e-3));
    let t2 = find_blowup_time(&flow, &search).ok().and_then(|r| r.t_blow);

    let results: Vec<(LevelReport, Option<Artifact>)> = levels
        .par_iter()
        .map(|level| -> Result<_, CliError> {
            let traj = run(&ctx.scale, &ctx.data, level)?;
            let errors = compare(&traj, &flow, level.space_dim)?;
            let snapshots = cfg.oracle.write_snapshots.then(|| {
                let mut t = Table::new(&["t", "x", "v", "rho"]);
                for s in &traj.snapshots {
                    for (i, x) in s.centers().into_iter().enumerate() {
                        t.row(&[num(s.t), num(x), num(s.v[i]), num(s.rho[i])]);
                    }
                }
                t.into_artifact(&format!("oracle_N{}.csv", level.n_cells))
            });
            let rel = match (traj.blowup_indicator, t2) {
                (Some(i), Some(t2)) => Some((i - t2).abs() / t2),
                _ => None,
            };
            let report = LevelReport {
                n_cells: level.n_cells,
                steps: traj.steps,
                blowup_indicator: traj.blowup_indicator,
                indicator_rel_error: rel,
                initial_gradient: traj.initial_gradient,
                errors,
            };
            Ok((report, snapshots))
        })
        .collect::<Result<_, _>>()?;

    let mut artifacts = Vec::new();
    let mut level_reports = Vec::new();
    for (r, snap) in results {
        artifacts.extend(snap);
        level_reports.push(r);
    }
    let last_linf = |r: &LevelReport| r.errors.snapshots.last().map_or(f64::NAN, |s| s.linf_v);
    let ratios: Vec<f64> = level_reports.windows(2).map(|w| last_linf(&w[0]) / last_linf(&w[1])).collect();
    let mut summary = ctx.summary_header();
    summary.push_str(&format!("characteristic t2: {}\n", opt_num(t2)));
    for r in &level_reports {
        summary.push_str(&format!(
            "N = {}: linf_v {}, linf_rho {}, excluded {}, monitor {}\n",
            r.n_cells,
            num(last_linf(r)),
            num(r.errors.snapshots.last().map_or(f64::NAN, |s| s.linf_rho)),
            r.errors.excluded,
            opt_num(r.blowup_indicator)
        ));
    }
    let report = OracleReport {
        regime: ctx.regime_label(),
        geometry: first.geometry,
        characteristic_t2: t2,
        linf_v_ratios: ratios,
        levels: level_reports,
    };
    artifacts.insert(0, Artifact::json("oracle.json", &report)?);
    artifacts.push(Artifact::text("oracle_summary.txt", summary));
    Ok(artifacts)
}

#[derive(Serialize)]
struct SphericalReport {
    regime: String,
    n: usize,
    fits: Vec<RateFit>,
}

pub fn spherical(cfg: &ExperimentConfig) -> Out {
    let ctx = Context::new(cfg)?;
    let s = &cfg.spherical;
    let flow = SphericalFlow::new(ctx.scale.clone(), ctx.data.clone(), s.n)?;
    let alphas = if s.alphas.is_empty() { vec![flow.minimizing_label(s.r_max, s.t_max)?.0] } else { s.alphas.clone() };
    let opts = cfg.rate_fit_options();
    let fits: Vec<RateFit> = alphas.par_iter().map(|&a| flow.blowup_rate_fit(a, &opts)).collect::<Result<_, _>>()?;
    let mut table = Table::new(&["alpha", "tau", "t", "v_r", "rho"]);
    let mut summary = ctx.summary_header();
    for f in &fits {
        for smp in &f.samples {
            table.row(&[num(f.alpha), num(smp.tau), num(smp.t), num(smp.v_r), num(smp.rho)]);
        }
        summary.push_str(&format!(
            "alpha {}: t2 {}, v_r exponent {}, rho exponent {}, limit error {}, indicator gap {}\n",
            num(f.alpha),
            num(f.t2),
            num(f.gradient_exponent),
            num(f.density_exponent),
            num(f.limit_error()),
            num(f.simultaneity_gap())
        ));
    }
    let report = SphericalReport { regime: ctx.regime_label(), n: s.n, fits };
    Ok(vec![
        Artifact::json("spherical.json", &report)?,
        table.into_artifact("spherical.csv"),
        Artifact::text("spherical_summary.txt", summary),
    ])
}

#[derive(Serialize)]
struct ThresholdReport {
    regime: String,
    epsilon: f64,
    #[serde(serialize_with = "serde_float::serialize")]
    epsilon_max: f64,
    norms: NormBounds,
    delta: f64,
    epsilon_threshold: Option<Threshold>,
    below_threshold: Option<bool>,
    omega: f64,
    #[serde(serialize_with = "serde_float::option::serialize")]
    analytic_bound: Option<f64>,
}

pub fn thresholds(cfg: &ExperimentConfig) -> Out {
    let ctx = Context::new(cfg)?;
    let d = &ctx.data;
    let norms = d.sup_norms();
    let report = ThresholdReport {
        regime: ctx.regime_label(),
        epsilon: d.epsilon(),
        epsilon_max: d.epsilon_max(),
        norms,
        delta: ctx.delta,
        epsilon_threshold: ctx.threshold,
        below_threshold: ctx.threshold.map(|t| d.epsilon() <= t.value),
        omega: omega(d.light_speed(), d.epsilon(), norms.m0),
        analytic_bound: ctx.bound_for(d),
    };
    let mut summary = ctx.summary_header();
    summary.push_str(&format!(
        "epsilon_max: {}\nM0: {}\nanalytic_bound: {}\n",
        num(report.epsilon_max),
        num(norms.m0),
        opt_num(report.analytic_bound)
    ));
    Ok(vec![Artifact::json("thresholds.json", &report)?, Artifact::text("thresholds_summary.txt", summary)])
}
