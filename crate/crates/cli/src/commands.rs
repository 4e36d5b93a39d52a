use std::collections::BTreeMap;
use std::fmt::Write as _;

use dnlab::coercivity::{
    calibrate, certify, convex_certify, draw_seed, lp_certify, poincare_quotient, random_data,
    random_geometry, run_sweep, sharp_constant, Calibration, CoercivityReport, ConvexPair,
    ConvexReport, GeometryFamily, LpReport, SharpOptions, SharpResult,
};
use dnlab::dno::DnOperator;
use dnlab::domain::{BoundaryFn, Geometry, HalfSpaceGeometry, StripGeometry};
use dnlab::muskat::{
    calibrate_decay_floor, fit_decay, integrability_check, simulate, DecayFit, Integrability,
    MuskatState, NormKey, RunFlags, SlopeStatus,
};
use dnlab::{Field, Grid};
use serde::Serialize;

use crate::config::{Command, ExperimentConfig, GeometrySpec, PhiSpec};
use crate::error::CliError;
use crate::output::Outputs;

/// Largest mean drift a Muskat run may show.
pub const MEAN_TOL: f64 = 1e-9;

/// Result of a command: whether every check passed, and a one-line summary.
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
}

pub fn run(
    command: Command,
    cfg: &ExperimentConfig,
    out: &mut Outputs,
) -> Result<Outcome, CliError> {
    match command {
        Command::FlatCheck => flat_check(cfg, out),
        Command::Coercivity => coercivity(cfg, out),
        Command::Convex => convex(cfg, out),
        Command::Lp => lp(cfg, out),
        Command::Sharp => sharp(cfg, out),
        Command::Muskat => muskat(cfg, out),
    }
}

fn grid(cfg: &ExperimentConfig) -> Result<Grid, CliError> {
    Ok(Grid::torus(cfg.nx())?)
}

fn calibration(cfg: &ExperimentConfig, grid: &Grid) -> Result<Calibration, CliError> {
    Ok(calibrate(
        grid,
        cfg.nz(),
        cfg.calibration.h_min,
        cfg.depth(),
    )?)
}

#[derive(Serialize)]
struct FlatEntry {
    mode: usize,
    computed: f64,
    exact: f64,
    rel_error: f64,
    /// Per-mode self-convergence order from `nz/4`, `nz/2`, `nz`; absent
    /// when the differences are at round-off. Informational only.
    order: Option<f64>,
}

#[derive(Serialize)]
struct FlatGroup {
    geometry: String,
    max_rel_error: f64,
    /// Self-convergence order of the worst-mode symbol error; gated for
    /// strips only, since the half-space error is truncation-dominated.
    order: Option<f64>,
    order_gated: bool,
    pass: bool,
    entries: Vec<FlatEntry>,
}

#[derive(Serialize)]
struct FlatCheckReport {
    nx: usize,
    nz: usize,
    tol: f64,
    min_order: f64,
    pass: bool,
    groups: Vec<FlatGroup>,
}

fn rayleigh(op: &DnOperator<f64>, g: &Field) -> Result<f64, CliError> {
    Ok(op.apply(g)?.pairing(g)? / g.pairing(g)?)
}

fn order_of(coarse: f64, fine: f64) -> Option<f64> {
    (fine > 1e-13).then(|| (coarse / fine).log2())
}

fn flat_check(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let fc = &cfg.flat_check;
    let grid = grid(cfg)?;
    let nz = cfg.nz();
    let mut cases: Vec<(Geometry<f64>, Option<f64>)> = Vec::new();
    for &a in &fc.strip_depths {
        cases.push((Geometry::Strip(StripGeometry::flat(&grid, a)?), Some(a)));
    }
    if fc.half_space {
        cases.push((
            Geometry::HalfSpace(HalfSpaceGeometry::flat(&grid, cfg.depth())?),
            None,
        ));
    }
    let mut groups = Vec::new();
    for (geom, depth) in cases {
        let ops = [nz, nz / 2, nz / 4]
            .into_iter()
            .map(|n| DnOperator::new(geom.clone(), n))
            .collect::<Result<Vec<_>, _>>()?;
        let mut entries = Vec::new();
        let (mut d_fine, mut d_coarse) = (0.0f64, 0.0f64);
        for k in 1..=fc.max_mode {
            let kf = k as f64;
            let g = Field::from_fn(&grid, |x| (kf * x).cos());
            let l: Vec<f64> = ops
                .iter()
                .map(|op| rayleigh(op, &g))
                .collect::<Result<_, _>>()?;
            let exact = match depth {
                Some(a) => kf * (kf * a).tanh(),
                None => kf,
            };
            let (df, dc) = ((l[1] - l[0]).abs() / exact, (l[2] - l[1]).abs() / exact);
            d_fine = d_fine.max(df);
            d_coarse = d_coarse.max(dc);
            entries.push(FlatEntry {
                mode: k,
                computed: l[0],
                exact,
                rel_error: (l[0] - exact).abs() / exact,
                order: order_of(dc, df),
            });
        }
        let max_rel_error = entries.iter().map(|e| e.rel_error).fold(0.0, f64::max);
        let order = order_of(d_coarse, d_fine);
        let order_gated = depth.is_some();
        let pass =
            max_rel_error <= fc.tol && (!order_gated || order.is_some_and(|o| o >= fc.min_order));
        groups.push(FlatGroup {
            geometry: geom.describe(),
            max_rel_error,
            order,
            order_gated,
            pass,
            entries,
        });
    }
    let max_rel_error = groups.iter().map(|g| g.max_rel_error).fold(0.0, f64::max);
    let worst_order = groups
        .iter()
        .filter(|g| g.order_gated)
        .filter_map(|g| g.order)
        .reduce(f64::min);
    let pass = groups.iter().all(|g| g.pass);
    out.json(
        "flat_check.json",
        &FlatCheckReport {
            nx: grid.len(),
            nz,
            tol: fc.tol,
            min_order: fc.min_order,
            pass,
            groups,
        },
    )?;
    Ok(Outcome {
        pass,
        summary: format!(
            "flat-check: max relative error {max_rel_error:.3e}, worst strip order {}",
            worst_order.map_or("n/a".into(), |o| format!("{o:.3}"))
        ),
    })
}

/// Draw `i` of the sweep over all families, in family-major order.
struct Draw {
    index: u64,
    seed: u64,
    family: GeometryFamily,
}

fn draws(cfg: &ExperimentConfig, per_family: usize) -> Vec<Draw> {
    let seed = cfg.seed.expect("validated");
    let mut v = Vec::new();
    for (fi, f) in cfg.sweep.families.iter().enumerate() {
        for i in 0..per_family {
            let index = (fi * per_family + i) as u64;
            v.push(Draw {
                index,
                seed: draw_seed(seed, index),
                family: f.resolve(cfg.depth()),
            });
        }
    }
    v
}

fn sweep_operator(
    cfg: &ExperimentConfig,
    grid: &Grid,
    d: &Draw,
) -> Result<DnOperator<f64>, dnlab::Error> {
    let geom = random_geometry(d.family, grid, draw_seed(d.seed, 0))?;
    DnOperator::new(geom, cfg.nz())
}

fn parallel<R: Send>(
    items: &[Draw],
    f: impl Fn(&Draw) -> Result<R, dnlab::Error> + Sync,
) -> Result<Vec<R>, CliError> {
    Ok(run_sweep(0, items.len(), |i, _| f(&items[i as usize]))?)
}

#[derive(Serialize)]
struct SweepSummary<R> {
    calibration: Calibration,
    draws: usize,
    failures: usize,
    /// Smallest `ratio / bound` over the sweep.
    min_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_volume_mismatch: Option<f64>,
    pass: bool,
    reports: Vec<R>,
}

fn coercivity(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let cal = calibration(cfg, &grid)?;
    let items = draws(cfg, cfg.sweep.draws);
    let reports: Vec<CoercivityReport> = parallel(&items, |d| {
        let op = sweep_operator(cfg, &grid, d)?;
        let g = random_data(&grid, draw_seed(d.seed, 1));
        Ok(certify(&op, &g, cal.for_kind(op.geometry().kind()))?.with_seed(d.seed))
    })?;
    let failures = reports.iter().filter(|r| !r.pass).count();
    let min_margin = reports
        .iter()
        .map(|r| r.ratio / r.bound)
        .fold(f64::INFINITY, f64::min);
    let mismatch = reports
        .iter()
        .map(|r| (r.pairing - r.pairing_volume).abs() / r.pairing.abs())
        .fold(0.0, f64::max);
    out.csv("coercivity.csv", &reports)?;
    let summary = SweepSummary {
        calibration: cal,
        draws: reports.len(),
        failures,
        min_margin,
        max_volume_mismatch: Some(mismatch),
        pass: failures == 0,
        reports,
    };
    out.json("coercivity.json", &summary)?;
    Ok(Outcome {
        pass: failures == 0,
        summary: format!(
            "coercivity: {} draws, {failures} failures, min margin {min_margin:.4}",
            summary.draws
        ),
    })
}

fn convex_pair(spec: PhiSpec) -> Result<ConvexPair, dnlab::Error> {
    match spec {
        PhiSpec::Quadratic => Ok(ConvexPair::quadratic()),
        PhiSpec::Power { p } => ConvexPair::power(p),
    }
}

fn convex(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let cal = calibration(cfg, &grid)?;
    convex_pair(cfg.convex.phi)?;
    let items = draws(cfg, cfg.sweep.draws);
    let reports: Vec<ConvexReport> = parallel(&items, |d| {
        let pair = convex_pair(cfg.convex.phi)?;
        let op = sweep_operator(cfg, &grid, d)?;
        let g = random_data(&grid, draw_seed(d.seed, 1));
        Ok(convex_certify(&op, &g, &pair, cal.for_kind(op.geometry().kind()))?.with_seed(d.seed))
    })?;
    let failures = reports.iter().filter(|r| !r.pass).count();
    let min_margin = reports
        .iter()
        .map(|r| r.ratio / r.bound)
        .fold(f64::INFINITY, f64::min);
    out.csv("convex.csv", &reports)?;
    let summary = SweepSummary {
        calibration: cal,
        draws: reports.len(),
        failures,
        min_margin,
        max_volume_mismatch: None,
        pass: failures == 0,
        reports,
    };
    out.json("convex.json", &summary)?;
    Ok(Outcome {
        pass: failures == 0,
        summary: format!(
            "convex: {} draws, {failures} failures, min margin {min_margin:.4}",
            summary.draws
        ),
    })
}

#[derive(Serialize)]
struct PoincareEstimate {
    p: f64,
    draws: usize,
    /// Largest quotient over all draws; the empirical constant `K`.
    constant: f64,
    first_half: f64,
    second_half: f64,
    /// `|first - second| / max(first, second)`.
    spread: f64,
    stable: bool,
    certified: usize,
    failures: usize,
    min_margin: f64,
}

#[derive(Serialize)]
struct LpSummary {
    calibration: Calibration,
    estimates: Vec<PoincareEstimate>,
    pass: bool,
}

fn lp(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let cal = calibration(cfg, &grid)?;
    let seed = cfg.seed.expect("validated");
    let lpc = &cfg.lp;
    let data: Vec<Field> = (0..lpc.draws as u64)
        .map(|i| random_data(&grid, draw_seed(seed, i)))
        .collect();
    let items = draws(cfg, lpc.certify_draws);
    let mut estimates = Vec::new();
    let mut rows: Vec<LpReport> = Vec::new();
    for &p in &lpc.p {
        let q: Vec<f64> = data
            .iter()
            .map(|g| poincare_quotient(g, p))
            .collect::<Result<_, _>>()?;
        let half = q.len() / 2;
        let max = |s: &[f64]| s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (a, b) = (max(&q[..half]), max(&q[half..]));
        let constant = a.max(b);
        let spread = (a - b).abs() / constant;
        let reports: Vec<LpReport> = parallel(&items, |d| {
            let op = sweep_operator(cfg, &grid, d)?;
            let g = &data[(d.index as usize) % lpc.certify_draws];
            Ok(lp_certify(
                &op,
                g,
                p,
                cal.for_kind(op.geometry().kind()),
                Some(constant),
            )?
            .with_seed(d.seed))
        })?;
        let failures = reports.iter().filter(|r| !r.pass).count();
        let min_margin = reports
            .iter()
            .map(|r| r.pairing / r.convex_rhs.max(r.corollary_rhs.unwrap_or(0.0)))
            .fold(f64::INFINITY, f64::min);
        estimates.push(PoincareEstimate {
            p,
            draws: q.len(),
            constant,
            first_half: a,
            second_half: b,
            spread,
            stable: constant.is_finite() && spread < lpc.stability_tol,
            certified: reports.len(),
            failures,
            min_margin,
        });
        rows.extend(reports);
    }
    let pass = estimates.iter().all(|e| e.stable && e.failures == 0);
    let mut summary = String::from("lp:");
    for e in &estimates {
        let _ = write!(
            summary,
            " p={} K={:.4} spread={:.2}% failures={}",
            e.p,
            e.constant,
            100.0 * e.spread,
            e.failures
        );
    }
    out.csv("lp.csv", &rows)?;
    out.json(
        "lp.json",
        &LpSummary {
            calibration: cal,
            estimates,
            pass,
        },
    )?;
    Ok(Outcome { pass, summary })
}

#[derive(Serialize)]
struct SharpEntry {
    geometry: String,
    result: SharpResult,
    /// Closed form on flat geometries.
    expected: Option<f64>,
    /// `C_cal × structural factor`, the certified lower bound.
    bound: f64,
    pass: bool,
}

fn sharp(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let sc = &cfg.sharp;
    let cal = calibration(cfg, &grid)?;
    let opts = SharpOptions {
        tol: sc.tol,
        max_iter: sc.max_iter,
        block: sc.block,
        seed: cfg.seed.unwrap_or(0),
    };
    let mut entries = Vec::new();
    for spec in &sc.geometries {
        let (geom, expected, tol) = match spec {
            GeometrySpec::FlatStrip { depth } => (
                Geometry::Strip(StripGeometry::flat(&grid, *depth)?),
                Some(depth.tanh()),
                sc.strip_oracle_tol,
            ),
            GeometrySpec::FlatHalfSpace => (
                Geometry::HalfSpace(HalfSpaceGeometry::flat(&grid, cfg.depth())?),
                Some(1.0),
                sc.half_space_oracle_tol,
            ),
            GeometrySpec::HalfSpace { top } => {
                let top = BoundaryFn::new(top.realize(&grid)?);
                (
                    Geometry::HalfSpace(HalfSpaceGeometry::new(top, cfg.depth())?),
                    None,
                    0.0,
                )
            }
            GeometrySpec::Strip { top, bottom } => {
                let top = BoundaryFn::new(top.realize(&grid)?);
                let bottom = BoundaryFn::new(bottom.realize(&grid)?);
                (Geometry::Strip(StripGeometry::new(top, bottom)?), None, 0.0)
            }
        };
        let bound = cal.for_kind(geom.kind()) * geom.structural_factor();
        let op = DnOperator::new(geom, cfg.nz())?;
        let result = sharp_constant(&op, sc.mean_zero, &opts)?;
        let pass = match expected {
            Some(e) => (result.value - e).abs() <= tol,
            None => result.value >= bound,
        };
        entries.push(SharpEntry {
            geometry: op.geometry().describe(),
            result,
            expected,
            bound,
            pass,
        });
    }
    let pass = entries.iter().all(|e| e.pass);
    let mut summary = String::from("sharp:");
    for e in &entries {
        let _ = write!(summary, " {}={:.8}", e.geometry, e.result.value);
    }
    out.json("sharp.json", &entries)?;
    Ok(Outcome { pass, summary })
}

#[derive(Serialize)]
struct DecayFloor {
    /// `λ_lin (1 + ‖∂_x f_lin‖_∞)` from the near-linear calibration run.
    c_cal: f64,
    initial_slope: f64,
    /// `c_cal / (1 + ‖∂_x f₀‖_∞)`.
    floor: f64,
    lambda_l2: f64,
    pass: bool,
}

#[derive(Serialize)]
struct DecaySummary {
    t_end: f64,
    depth: f64,
    steps: usize,
    fit_window: Option<(f64, f64)>,
    fits: BTreeMap<String, Option<DecayFit>>,
    fit_errors: BTreeMap<String, String>,
    integrability: Option<Integrability>,
    floor: Option<DecayFloor>,
    flags: RunFlags,
    pass: bool,
}

fn muskat(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let grid = grid(cfg)?;
    let m = &cfg.muskat;
    let f0 = m.initial.realize(&grid)?;
    let sim = simulate(&f0, m.t_end, &m.stepper, m.snapshots)?;
    out.text("trajectory.csv", &sim.record.to_csv())?;
    if m.snapshots {
        let mut s = String::from("t,x,f\n");
        for snap in &sim.snapshots {
            for (x, v) in grid.points().zip(snap.f.values()) {
                let _ = writeln!(s, "{:e},{x:e},{v:e}", snap.t);
            }
        }
        out.text("snapshots.csv", &s)?;
    }

    let window = m.fit_window.unwrap_or((0.0, m.t_end));
    let mut keys = vec![
        NormKey::L2,
        NormKey::HHalf,
        NormKey::Linf,
        NormKey::Lipschitz,
    ];
    keys.extend((0..m.stepper.alphas.len()).map(NormKey::CAlpha));
    keys.push(NormKey::DtfHNegHalf);
    let mut fits = BTreeMap::new();
    let mut fit_errors = BTreeMap::new();
    for key in keys {
        let label = key.label(&sim.record.alphas);
        match fit_decay(&sim.record, key, window) {
            Ok(fit) => {
                fits.insert(label, Some(fit));
            }
            Err(e) => {
                fits.insert(label.clone(), None);
                fit_errors.insert(label, e.to_string());
            }
        }
    }
    let l2_fit = fits.get("l2").copied().flatten();
    let floor = match (&m.floor, l2_fit) {
        (Some(fc), Some(fit)) => {
            let c_cal = calibrate_decay_floor(&grid, &m.stepper, fc.amplitude, fc.t_end)?;
            let initial_slope = MuskatState::new(f0.clone()).lipschitz();
            let floor = c_cal / (1.0 + initial_slope);
            Some(DecayFloor {
                c_cal,
                initial_slope,
                floor,
                lambda_l2: fit.lambda,
                pass: fit.lambda >= floor,
            })
        }
        _ => None,
    };
    let flags = sim.flags;
    let pass = flags.mean_error <= MEAN_TOL
        && flags.l2_monotone
        && flags.slope != SlopeStatus::Fail
        && floor.as_ref().is_none_or(|f| f.pass);
    let summary = format!(
        "muskat: {} steps to t={}, lambda_l2={}, slope {:?}, mean error {:.1e}",
        flags.steps,
        m.t_end,
        l2_fit.map_or("n/a".into(), |f| format!("{:.6}", f.lambda)),
        flags.slope,
        flags.mean_error
    );
    let decay = DecaySummary {
        t_end: m.t_end,
        depth: flags.depth,
        steps: flags.steps,
        fit_window: m.fit_window,
        fits,
        fit_errors,
        integrability: (!sim.record.is_empty()).then(|| integrability_check(&sim.record)),
        floor,
        flags,
        pass,
    };
    out.json("decay.json", &decay)?;
    Ok(Outcome { pass, summary })
}
