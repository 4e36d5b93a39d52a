//! Dirichlet-to-Neumann operator: flat closed forms and the general solver
//! pipeline.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryFn, FlattenedSystem, Geometry, HalfSpaceGeometry, StripGeometry};
use crate::elliptic::{dn_trace, solve_with, EllipticSolution, FlatPreconditioner, SolveOptions};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{boundary_seminorm, norm_h_neg_half, MultiplierSymbol, SpectralField};

/// Relative change of the top boundary that triggers a preconditioner rebuild.
pub const PRECONDITIONER_REFRESH: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Depth<T> {
    Finite(T),
    Infinite,
}

/// `|ξ|` for the half-space, `|ξ| tanh(a|ξ|)` for a flat strip of depth `a`.
pub fn flat_symbol<T: Scalar>(depth: Depth<T>) -> MultiplierSymbol<T> {
    match depth {
        Depth::Finite(a) => MultiplierSymbol::abs_d_tanh(a),
        Depth::Infinite => MultiplierSymbol::abs_d(),
    }
}

/// DN operator of a fixed geometry at fixed resolution.
///
/// The flattened system and its preconditioner are shared behind `Arc`s, so
/// clones are cheap and `apply` may run concurrently.
#[derive(Clone, Debug)]
pub struct DnOperator<T: Scalar> {
    geometry: Geometry<T>,
    system: Arc<FlattenedSystem<T>>,
    precond: Arc<FlatPreconditioner<T>>,
    precond_top: Arc<Vec<T>>,
    tol: T,
}

impl<T: Scalar> DnOperator<T> {
    pub fn new(geometry: Geometry<T>, nz: usize) -> Result<Self> {
        let system = geometry.flatten(nz)?;
        let precond = FlatPreconditioner::new(&system);
        Ok(Self {
            precond_top: Arc::new(geometry.top().field().values().to_vec()),
            geometry,
            system: Arc::new(system),
            precond: Arc::new(precond),
            tol: T::lit(T::SOLVER_TOL),
        })
    }

    pub fn half_space(top: BoundaryFn<T>, depth: T, nz: usize) -> Result<Self> {
        Self::new(Geometry::HalfSpace(HalfSpaceGeometry::new(top, depth)?), nz)
    }

    pub fn strip(top: BoundaryFn<T>, bottom: BoundaryFn<T>, nz: usize) -> Result<Self> {
        Self::new(Geometry::Strip(StripGeometry::new(top, bottom)?), nz)
    }

    /// Relative residual used by [`apply`](Self::apply).
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn geometry(&self) -> &Geometry<T> {
        &self.geometry
    }

    pub fn system(&self) -> &FlattenedSystem<T> {
        &self.system
    }

    pub fn nz(&self) -> usize {
        self.system.nz()
    }

    pub fn apply(&self, g: &SpectralField<T>) -> Result<SpectralField<T>> {
        Ok(dn_trace(&self.solve(g, None)?))
    }

    /// Full elliptic solve, optionally warm-started from interior values.
    pub fn solve(&self, g: &SpectralField<T>, warm: Option<&[T]>) -> Result<EllipticSolution<T>> {
        let opts = SolveOptions {
            tol: self.tol,
            max_iter: None,
            initial_guess: warm.map(|w| w.to_vec()),
        };
        solve_with(&self.system, &self.precond, g, &opts)
    }

    /// Same depth and bottom with a new top boundary. The preconditioner is
    /// kept while `‖f_new - f_ref‖_∞ ≤ 0.05 ‖f_ref‖_∞`.
    pub fn with_top(&self, top: BoundaryFn<T>) -> Result<Self> {
        let geometry = match &self.geometry {
            Geometry::Strip(s) => Geometry::Strip(StripGeometry::new(top, s.bottom().clone())?),
            Geometry::HalfSpace(h) => Geometry::HalfSpace(HalfSpaceGeometry::new(top, h.depth())?),
        };
        let system = geometry.flatten(self.nz())?;
        let new_top = geometry.top().field().values();
        let (drift, scale) = new_top
            .iter()
            .zip(self.precond_top.iter())
            .fold((T::zero(), T::zero()), |(d, s), (&a, &b)| {
                (d.max((a - b).abs()), s.max(b.abs()))
            });
        let (precond, precond_top) = if drift <= T::lit(PRECONDITIONER_REFRESH) * scale {
            (self.precond.clone(), self.precond_top.clone())
        } else {
            (
                Arc::new(FlatPreconditioner::new(&system)),
                Arc::new(new_top.to_vec()),
            )
        };
        Ok(Self {
            geometry,
            system: Arc::new(system),
            precond,
            precond_top,
            tol: self.tol,
        })
    }

    /// True when both operators share one preconditioner instance.
    pub fn shares_preconditioner(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.precond, &other.precond)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub trace_h_neg_half: f64,
    pub data_seminorm: f64,
    pub ratio: f64,
}

/// `‖G g‖_{H^{-1/2}} / ‖g‖_{H̃^{1/2}}`.
pub fn boundedness_report<T: Scalar>(
    op: &DnOperator<T>,
    g: &SpectralField<T>,
) -> Result<BoundednessReport> {
    if g.is_constant() {
        return Err(Error::ConstantInput);
    }
    let trace = op.apply(g)?;
    let num = norm_h_neg_half(&trace).to64();
    let den = boundary_seminorm(g).to64();
    Ok(BoundednessReport {
        trace_h_neg_half: num,
        data_seminorm: den,
        ratio: num / den,
    })
}
