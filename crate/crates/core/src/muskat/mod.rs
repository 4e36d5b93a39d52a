//! One-phase Muskat flow `∂_t f = -G_f(f)` on the torus, with the interface
//! as the top of a truncated half-space.
//!
//! The default stepper is IMEX: the flat linearization `-|D|` is implicit and
//! the remainder `|D|f - G_f(f)` explicit. Explicit RK4 is available as a
//! cross-check.

mod record;

pub use record::{
    fit_decay, integrability_check, DecayFit, DecayRecord, DecaySample, Integrability, NormKey,
    MIN_FIT_SAMPLES,
};

use serde::{Deserialize, Serialize};

use crate::dno::DnOperator;
use crate::domain::BoundaryFn;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{
    apply_inverse_multiplier, apply_multiplier, holder_norm, norm_h_neg_half, seminorm_hs,
    MultiplierSymbol, PeriodicGrid, SpectralField,
};

/// Relative rhs change below which the truncation depth is accepted.
pub const DEPTH_CHECK_TOL: f64 = 1e-8;
/// Deepest truncation the doubling check may reach.
pub const MAX_DEPTH: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Imex,
    Rk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuskatConfig {
    pub nz: usize,
    /// Initial truncation depth; doubled until the rhs settles if
    /// `auto_depth` is set.
    pub depth: f64,
    pub auto_depth: bool,
    pub dt_max: f64,
    /// `dt ≤ cfl / (‖f‖_∞ + ‖∂_x f‖_∞)`.
    pub cfl: f64,
    pub scheme: Scheme,
    /// Time between diagnostic samples.
    pub sample_interval: f64,
    pub alphas: Vec<f64>,
    /// Allowed per-step growth of `‖f‖_∞`, relative to `‖f₀‖_∞`.
    pub sup_tol: f64,
    /// Slope growth relative to `‖∂_x f₀‖_∞` that passes.
    pub slope_tol: f64,
    /// Slope growth that is flagged instead of failed.
    pub slope_flag_tol: f64,
    pub solver_tol: f64,
}

impl Default for MuskatConfig {
    fn default() -> Self {
        Self {
            nz: 64,
            depth: 8.0,
            auto_depth: true,
            dt_max: 5e-3,
            cfl: 0.5,
            scheme: Scheme::Imex,
            sample_interval: 0.1,
            alphas: vec![0.25, 0.5, 0.75],
            sup_tol: 1e-6,
            slope_tol: 1e-3,
            slope_flag_tol: 1e-2,
            solver_tol: 1e-12,
        }
    }
}

impl MuskatConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.nz < 2 {
            return bad(format!("nz must be at least 2, got {}", self.nz));
        }
        if !(self.depth >= 4.0) {
            return bad(format!("depth must be at least 4, got {}", self.depth));
        }
        if !(self.dt_max > 0.0) || !(self.cfl > 0.0) || !(self.sample_interval > 0.0) {
            return bad("dt_max, cfl and sample_interval must be positive".into());
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return bad(format!(
                "Hölder exponents must lie in (0, 1], got {:?}",
                self.alphas
            ));
        }
        if !(self.solver_tol > 0.0)
            || !(self.sup_tol >= 0.0)
            || !(self.slope_flag_tol >= self.slope_tol)
        {
            return bad("tolerances must be nonnegative with slope_flag_tol >= slope_tol".into());
        }
        Ok(())
    }
}

/// Interface at one time.
#[derive(Clone, Debug)]
pub struct MuskatState<T: Scalar> {
    pub t: f64,
    pub f: SpectralField<T>,
}

impl<T: Scalar> MuskatState<T> {
    pub fn new(f: SpectralField<T>) -> Self {
        Self { t: 0.0, f }
    }

    pub fn sup_norm(&self) -> f64 {
        self.f.interpolant_sup().to64()
    }

    pub fn lipschitz(&self) -> f64 {
        self.f.derivative().interpolant_sup().to64()
    }

    pub fn mean(&self) -> f64 {
        self.f.mean().to64()
    }

    pub fn l2(&self) -> f64 {
        seminorm_hs(&self.f, T::zero()).to64()
    }
}

/// `-G_f(f)` for a truncated half-space of the given depth.
pub fn rhs<T: Scalar>(f: &SpectralField<T>, depth: T, nz: usize) -> Result<SpectralField<T>> {
    let op = DnOperator::half_space(BoundaryFn::new(f.clone()), depth, nz)?;
    Ok(op.apply(f)?.scaled(-T::one()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeStatus {
    Pass,
    Flagged,
    Fail,
}

/// Per-run bookkeeping of the invariants the stepper checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    pub steps: usize,
    pub depth: f64,
    /// Largest `|mean(f^{n+1}) - mean(f^n)|` before re-projection.
    pub max_mean_drift: f64,
    /// Largest `|mean(f(t)) - mean(f₀)|` after projection.
    pub mean_error: f64,
    /// Largest per-step growth of `‖f‖_{L²}`.
    pub max_l2_growth: f64,
    pub l2_monotone: bool,
    /// Largest per-step growth of `‖f‖_∞` relative to `‖f₀‖_∞`.
    pub max_sup_growth: f64,
    /// `max_t ‖∂_x f(t)‖_∞ / ‖∂_x f₀‖_∞ - 1`.
    pub max_slope_excess: f64,
    pub slope: SlopeStatus,
}

/// Stateful time stepper. Keeps the DN operator of the current interface,
/// reusing its preconditioner, and warm-starts each solve.
pub struct Stepper<T: Scalar> {
    config: MuskatConfig,
    depth: T,
    abs_d: MultiplierSymbol<T>,
    op: Option<DnOperator<T>>,
    warm: Option<Vec<T>>,
    mean0: T,
    sup0: f64,
    solves: usize,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(config: MuskatConfig, f0: &SpectralField<T>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            depth: T::lit(config.depth),
            config,
            abs_d: MultiplierSymbol::abs_d(),
            op: None,
            warm: None,
            mean0: f0.mean(),
            sup0: f0.interpolant_sup().to64(),
            solves: 0,
        })
    }

    pub fn depth(&self) -> f64 {
        self.depth.to64()
    }

    pub fn solves(&self) -> usize {
        self.solves
    }

    /// Doubles the depth until the rhs at `f` moves by less than
    /// `DEPTH_CHECK_TOL` relative, keeping `dz` fixed.
    pub fn settle_depth(&mut self, f: &SpectralField<T>) -> Result<f64> {
        let (base_nz, base_depth) = (self.config.nz, self.config.depth);
        let nz_for = |depth: T| -> usize {
            let ratio = (depth.to64() / base_depth).round().max(1.0) as usize;
            base_nz * ratio
        };
        if f.is_constant() {
            return Ok(self.depth.to64());
        }
        let mut current = rhs(f, self.depth, nz_for(self.depth))?;
        loop {
            let deeper = self.depth + self.depth;
            if deeper.to64() > MAX_DEPTH {
                return Ok(self.depth.to64());
            }
            let next = rhs(f, deeper, nz_for(deeper))?;
            let scale = next.interpolant_sup().to64().max(f64::MIN_POSITIVE);
            let change = next.max_abs_diff(&current)?.to64() / scale;
            if change < DEPTH_CHECK_TOL {
                return Ok(self.depth.to64());
            }
            self.depth = deeper;
            self.config.nz = nz_for(deeper);
            self.config.depth = deeper.to64();
            self.op = None;
            current = next;
        }
    }

    /// `-G_f(f)`, warm-started from the previous solve.
    pub fn rhs(&mut self, f: &SpectralField<T>) -> Result<SpectralField<T>> {
        let top = BoundaryFn::new(f.clone());
        let op = match &self.op {
            Some(op) => op.with_top(top)?,
            None => DnOperator::half_space(top, self.depth, self.config.nz)?
                .with_tol(T::lit(self.config.solver_tol)),
        };
        let sol = op.solve(f, self.warm.as_deref())?;
        self.solves += 1;
        self.warm = Some(sol.interior().to_vec());
        self.op = Some(op);
        Ok(crate::elliptic::dn_trace(&sol).scaled(-T::one()))
    }

    /// Step size for the current interface.
    pub fn dt_for(&self, f: &SpectralField<T>) -> f64 {
        let c1 = f.interpolant_sup().to64() + f.derivative().interpolant_sup().to64();
        if c1 > 0.0 {
            self.config.dt_max.min(self.config.cfl / c1)
        } else {
            self.config.dt_max
        }
    }

    /// One step; returns the new interface and the mean drift before
    /// re-projection. `r0` is `rhs(f)` when already known.
    pub fn step(
        &mut self,
        f: &SpectralField<T>,
        r0: Option<SpectralField<T>>,
        dt: f64,
    ) -> Result<(SpectralField<T>, f64)> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let r0 = match r0 {
            Some(r) => r,
            None => self.rhs(f)?,
        };
        let h = T::lit(dt);
        let next = match self.config.scheme {
            Scheme::Imex => {
                let explicit = apply_multiplier(f, &self.abs_d).add(&r0)?;
                let rhs = f.combine(T::one(), &explicit, h)?;
                apply_inverse_multiplier(&rhs, &MultiplierSymbol::shifted_abs_d(h))
            }
            Scheme::Rk4 => {
                let half = h * T::lit(0.5);
                let k1 = r0;
                let k2 = self.rhs(&f.combine(T::one(), &k1, half)?)?;
                let k3 = self.rhs(&f.combine(T::one(), &k2, half)?)?;
                let k4 = self.rhs(&f.combine(T::one(), &k3, h)?)?;
                let sum = k1.add(&k4)?.combine(T::one(), &k2.add(&k3)?, T::lit(2.0))?;
                f.combine(T::one(), &sum, h / T::lit(6.0))?
            }
        };
        let drift = (next.mean() - f.mean()).to64();
        let fixed = next.shifted(self.mean0 - next.mean());
        Ok((fixed, drift))
    }
}

/// `‖f‖` diagnostics for one sample, `dtf` being `∂_t f`.
fn sample<T: Scalar>(
    t: f64,
    f: &SpectralField<T>,
    dtf: &SpectralField<T>,
    alphas: &[f64],
) -> DecaySample {
    DecaySample {
        t,
        l2: seminorm_hs(f, T::zero()).to64(),
        hhalf: seminorm_hs(f, T::lit(0.5)).to64(),
        linf: f.interpolant_sup().to64(),
        lipschitz: f.derivative().interpolant_sup().to64(),
        c_alpha: alphas
            .iter()
            .map(|&a| holder_norm(f, T::lit(a)).to64())
            .collect(),
        dtf_hneghalf: norm_h_neg_half(dtf).to64(),
    }
}

/// A finished run.
#[derive(Clone, Debug)]
pub struct Simulation<T: Scalar> {
    pub record: DecayRecord,
    pub flags: RunFlags,
    pub final_state: MuskatState<T>,
    /// Interface at every sample time, if requested.
    pub snapshots: Vec<MuskatState<T>>,
}

/// Evolves `f0` to time `t_end`, sampling every `sample_interval`.
///
/// `t_end = 0` yields an empty record. A step that raises `‖f‖_∞` by more
/// than `sup_tol·‖f₀‖_∞` aborts with `StabilityViolation`.
pub fn simulate<T: Scalar>(
    f0: &SpectralField<T>,
    t_end: f64,
    config: &MuskatConfig,
    keep_snapshots: bool,
) -> Result<Simulation<T>> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "final time must be nonnegative, got {t_end}"
        )));
    }
    let mut stepper = Stepper::new(config.clone(), f0)?;
    let mut record = DecayRecord::new(config.alphas.clone());
    let state0 = MuskatState::new(f0.clone());
    let slope0 = state0.lipschitz();
    let mut flags = RunFlags {
        steps: 0,
        depth: config.depth,
        max_mean_drift: 0.0,
        mean_error: 0.0,
        max_l2_growth: f64::NEG_INFINITY,
        l2_monotone: true,
        max_sup_growth: f64::NEG_INFINITY,
        max_slope_excess: 0.0,
        slope: SlopeStatus::Pass,
    };
    if t_end == 0.0 {
        flags.max_l2_growth = 0.0;
        flags.max_sup_growth = 0.0;
        return Ok(Simulation {
            record,
            flags,
            final_state: state0,
            snapshots: Vec::new(),
        });
    }
    if config.auto_depth {
        flags.depth = stepper.settle_depth(f0)?;
    }
    let sup_tol = config.sup_tol * stepper.sup0;
    let n_samples = (t_end / config.sample_interval).round().max(1.0) as usize;
    let mut f = f0.clone();
    let mut r = stepper.rhs(&f)?;
    record.push(sample(0.0, &f, &r, &config.alphas))?;
    let mut snapshots = Vec::new();
    if keep_snapshots {
        snapshots.push(MuskatState::new(f.clone()));
    }
    let mut sup = state0.sup_norm();
    let mut l2 = state0.l2();
    let mut t = 0.0;
    let mut step_index = 0;
    for s in 1..=n_samples {
        let t_target = t_end * s as f64 / n_samples as f64;
        let span = t_target - t;
        let substeps = (span / stepper.dt_for(&f)).ceil().max(1.0) as usize;
        let dt = span / substeps as f64;
        for _ in 0..substeps {
            let (next, drift) = stepper.step(&f, Some(r), dt)?;
            step_index += 1;
            t += dt;
            let state = MuskatState { t, f: next };
            let new_sup = state.sup_norm();
            if new_sup > sup + sup_tol {
                return Err(Error::StabilityViolation {
                    step: step_index,
                    t,
                    before: sup,
                    after: new_sup,
                    tol: sup_tol,
                });
            }
            let new_l2 = state.l2();
            flags.max_mean_drift = flags.max_mean_drift.max(drift.abs());
            flags.mean_error = flags
                .mean_error
                .max((state.mean() - f0.mean().to64()).abs());
            flags.max_l2_growth = flags.max_l2_growth.max(new_l2 - l2);
            if new_l2 > l2 + 1e-8 {
                flags.l2_monotone = false;
            }
            if stepper.sup0 > 0.0 {
                flags.max_sup_growth = flags.max_sup_growth.max((new_sup - sup) / stepper.sup0);
            }
            if slope0 > 0.0 {
                flags.max_slope_excess =
                    flags.max_slope_excess.max(state.lipschitz() / slope0 - 1.0);
            }
            sup = new_sup;
            l2 = new_l2;
            f = state.f;
            r = stepper.rhs(&f)?;
        }
        t = t_target;
        record.push(sample(t, &f, &r, &config.alphas))?;
        if keep_snapshots {
            snapshots.push(MuskatState { t, f: f.clone() });
        }
    }
    flags.steps = step_index;
    flags.slope = if flags.max_slope_excess <= config.slope_tol {
        SlopeStatus::Pass
    } else if flags.max_slope_excess <= config.slope_flag_tol {
        SlopeStatus::Flagged
    } else {
        SlopeStatus::Fail
    };
    Ok(Simulation {
        record,
        flags,
        final_state: MuskatState { t, f },
        snapshots,
    })
}

/// Decay-floor constant from a small-amplitude run: `λ_{L²}(1 + ‖∂_x f₀‖_∞)`
/// for `f₀ = amplitude·cos x` on `[0, t_end]`.
pub fn calibrate_decay_floor<T: Scalar>(
    grid: &PeriodicGrid<T>,
    config: &MuskatConfig,
    amplitude: f64,
    t_end: f64,
) -> Result<f64> {
    let f0 = SpectralField::from_fn(grid, |x| T::lit(amplitude) * x.cos());
    let sim = simulate(&f0, t_end, config, false)?;
    let fit = fit_decay(&sim.record, NormKey::L2, (0.0, t_end))?;
    Ok(fit.lambda * (1.0 + MuskatState::new(f0).lipschitz()))
}
