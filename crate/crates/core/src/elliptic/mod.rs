//! Galerkin solver for `div(A∇v) = 0` on the flattened strip with Dirichlet
//! data on top and the natural Neumann condition at the bottom.
//!
//! The discrete DN trace is defined variationally, `⟨G g, w⟩ = a(v, E w)` for
//! the nodal lift `E`, which makes `⟨G g, g⟩ = a(v, v)` an algebraic identity.

mod operator;
mod pack;
mod precond;

use num_complex::Complex;

pub use operator::DiscreteOperator;
pub use precond::FlatPreconditioner;

use operator::{dot, Workspace};
use precond::PrecondWorkspace;

use crate::domain::FlattenedSystem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{PeriodicGrid, SpectralField};

/// Stopping rule and starting point of the conjugate-gradient solve.
#[derive(Clone, Debug)]
pub struct SolveOptions<T> {
    /// Relative residual `‖r‖ / ‖b‖` at which iteration stops.
    pub tol: T,
    /// Iteration cap; defaults to `10·N·N_z`.
    pub max_iter: Option<usize>,
    /// Warm start for the interior unknowns.
    pub initial_guess: Option<Vec<T>>,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(T::SOLVER_TOL),
            max_iter: None,
            initial_guess: None,
        }
    }
}

impl<T: Scalar> SolveOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Discrete solution on the `(x, z)` grid.
#[derive(Clone, Debug)]
pub struct EllipticSolution<T: Scalar> {
    grid: PeriodicGrid<T>,
    nz: usize,
    v: Vec<T>,
    top_flux: Vec<T>,
    energy: T,
    residual: T,
    iterations: usize,
    energy_history: Vec<T>,
}

impl<T: Scalar> EllipticSolution<T> {
    /// Nodal values, node-major with the top row last.
    pub fn values(&self) -> &[T] {
        &self.v
    }

    pub fn node(&self, j: usize) -> &[T] {
        let n = self.grid.len();
        &self.v[j * n..(j + 1) * n]
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    /// Final relative residual of the interior equations.
    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Interior part of `v`, usable as a warm start.
    pub fn interior(&self) -> &[T] {
        &self.v[..self.nz * self.grid.len()]
    }

    /// Quadratic energy `½xᵀKx - xᵀb` of the iterates, in order.
    pub fn energy_history(&self) -> &[T] {
        &self.energy_history
    }

    /// Residual of the top row, `r_i = a(v, φ_i)` for the top hat functions.
    pub fn top_flux(&self) -> &[T] {
        &self.top_flux
    }
}

/// DN trace of a solution as a field on the top boundary.
///
/// Its interpolant pairs with any boundary data `w` as `top_flux · w`, so
/// `⟨G g, w⟩ = a(v, E w)` holds exactly.
pub fn dn_trace<T: Scalar>(sol: &EllipticSolution<T>) -> SpectralField<T> {
    let grid = &sol.grid;
    let mut buf: Vec<Complex<T>> = sol
        .top_flux
        .iter()
        .map(|&r| Complex::new(r, T::zero()))
        .collect();
    grid.fft(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        *c = *c / (grid.period() * grid.mode_weight(k));
    }
    SpectralField::from_coefficients(grid, &buf).expect("same grid")
}

/// `a(v, v)` from the cell fluxes, independent of the trace route.
pub fn dirichlet_energy<T: Scalar>(sol: &EllipticSolution<T>) -> T {
    sol.energy
}

/// Solves with a fresh flat preconditioner and default options.
pub fn solve<T: Scalar>(
    sys: &FlattenedSystem<T>,
    g: &SpectralField<T>,
    tol: T,
) -> Result<EllipticSolution<T>> {
    let pc = FlatPreconditioner::new(sys);
    solve_with(sys, &pc, g, &SolveOptions::with_tol(tol))
}

/// Preconditioned conjugate gradients on the interior system
/// `K_II x = -K_IT g`.
pub fn solve_with<T: Scalar>(
    sys: &FlattenedSystem<T>,
    pc: &FlatPreconditioner<T>,
    g: &SpectralField<T>,
    opts: &SolveOptions<T>,
) -> Result<EllipticSolution<T>> {
    let grid = sys.grid();
    if g.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if pc.dim() != sys.nz() * grid.len() {
        return Err(Error::InvalidParameter(
            "preconditioner does not match the system".into(),
        ));
    }
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let n = grid.len();
    let nz = sys.nz();
    let ni = nz * n;
    let op = DiscreteOperator::new(sys);
    let mut ws = Workspace::new(sys);
    let mut pws = PrecondWorkspace::new(grid, nz);

    let mut full = vec![T::zero(); (nz + 1) * n];
    let mut kfull = vec![T::zero(); (nz + 1) * n];
    full[ni..].copy_from_slice(g.values());
    op.apply_with(&full, &mut kfull, &mut ws);
    let b: Vec<T> = kfull[..ni].iter().map(|&v| -v).collect();
    let bnorm = dot(&b, &b).sqrt();

    let mut x = vec![T::zero(); ni];
    let mut history = Vec::new();
    let mut iterations = 0;
    if bnorm > T::zero() {
        match &opts.initial_guess {
            Some(x0) if x0.len() == ni => x.copy_from_slice(x0),
            Some(x0) => {
                return Err(Error::InvalidParameter(format!(
                    "initial guess has length {}, expected {ni}",
                    x0.len()
                )))
            }
            None => pc.apply_with(&b, &mut x, &mut pws),
        }
        let cap = opts.max_iter.unwrap_or(10 * n * nz);
        let interior =
            |v: &[T], out: &mut [T], full: &mut [T], kfull: &mut [T], ws: &mut Workspace<T>| {
                full[..ni].copy_from_slice(v);
                full[ni..].iter_mut().for_each(|c| *c = T::zero());
                op.apply_with(full, kfull, ws);
                out.copy_from_slice(&kfull[..ni]);
            };
        let mut r = vec![T::zero(); ni];
        interior(&x, &mut r, &mut full, &mut kfull, &mut ws);
        r.iter_mut().zip(&b).for_each(|(ri, &bi)| *ri = bi - *ri);
        let energy = |x: &[T], r: &[T]| -> T {
            // ½xᵀKx - xᵀb = -½xᵀ(b + r)
            -T::lit(0.5)
                * x.iter()
                    .zip(&b)
                    .zip(r)
                    .fold(T::zero(), |s, ((&xi, &bi), &ri)| s + xi * (bi + ri))
        };
        history.push(energy(&x, &r));
        let mut z = vec![T::zero(); ni];
        pc.apply_with(&r, &mut z, &mut pws);
        let mut p = z.clone();
        let mut q = vec![T::zero(); ni];
        let mut rz = dot(&r, &z);
        let target = opts.tol * bnorm;
        loop {
            let rnorm = dot(&r, &r).sqrt();
            if rnorm <= target {
                break;
            }
            if iterations >= cap || !rnorm.is_finite() {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: (rnorm / bnorm).to64(),
                });
            }
            interior(&p, &mut q, &mut full, &mut kfull, &mut ws);
            let pq = dot(&p, &q);
            if !(pq > T::zero()) {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: (rnorm / bnorm).to64(),
                });
            }
            let alpha = rz / pq;
            for i in 0..ni {
                x[i] = x[i] + alpha * p[i];
                r[i] = r[i] - alpha * q[i];
            }
            iterations += 1;
            history.push(energy(&x, &r));
            pc.apply_with(&r, &mut z, &mut pws);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..ni {
                p[i] = z[i] + beta * p[i];
            }
        }
    }

    full[..ni].copy_from_slice(&x);
    full[ni..].copy_from_slice(g.values());
    op.apply_with(&full, &mut kfull, &mut ws);
    let residual = if bnorm > T::zero() {
        dot(&kfull[..ni], &kfull[..ni]).sqrt() / bnorm
    } else {
        T::zero()
    };
    let top_flux = kfull[ni..].to_vec();
    let energy = op.energy_with(&full, &mut ws);
    Ok(EllipticSolution {
        grid: grid.clone(),
        nz,
        v: full,
        top_flux,
        energy,
        residual,
        iterations,
        energy_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        build_flatten_finite, build_flatten_infinite, BoundaryFn, HalfSpaceGeometry, StripGeometry,
    };
    use std::f64::consts::PI;

    fn torus(n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::torus(n).unwrap()
    }

    fn cosine(grid: &PeriodicGrid<f64>, k: f64) -> SpectralField<f64> {
        SpectralField::from_fn(grid, |x| (k * x).cos())
    }

    fn flat_strip_error(nz: usize) -> f64 {
        let grid = torus(16);
        let sys = build_flatten_finite(&StripGeometry::flat(&grid, 1.0).unwrap(), nz).unwrap();
        let sol = solve(&sys, &cosine(&grid, 1.0), 1e-13).unwrap();
        let mut err: f64 = 0.0;
        for j in 0..=nz {
            let z = sys.z_node(j);
            let amp = (z + 1.0).cosh() / 1f64.cosh();
            for (i, x) in grid.points().enumerate() {
                err = err.max((sol.node(j)[i] - amp * x.cos()).abs());
            }
        }
        err
    }

    #[test]
    fn flat_strip_closed_form_second_order() {
        let e1 = flat_strip_error(16);
        let e2 = flat_strip_error(32);
        let order = (e1 / e2).log2();
        assert!(e2 < 1e-3, "{e2}");
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn constant_data_gives_constant_solution() {
        let grid = torus(16);
        let top = BoundaryFn::new(SpectralField::from_fn(&grid, |x| 0.2 * x.cos()));
        let sys = build_flatten_infinite(&HalfSpaceGeometry::new(top, 4.0).unwrap(), 8).unwrap();
        let sol = solve(&sys, &SpectralField::constant(&grid, 1.5), 1e-12).unwrap();
        assert!(sol.values().iter().all(|v| (v - 1.5).abs() < 1e-10));
        assert!(dn_trace(&sol).sup_norm() < 1e-10);
        assert!(dirichlet_energy(&sol).abs() < 1e-10);
    }

    #[test]
    fn flat_half_space_energy_is_pi() {
        let grid = torus(32);
        let sys =
            build_flatten_infinite(&HalfSpaceGeometry::flat(&grid, 10.0).unwrap(), 128).unwrap();
        let sol = solve(&sys, &cosine(&grid, 1.0), 1e-13).unwrap();
        assert!((dirichlet_energy(&sol) - PI).abs() < 1e-6);
    }

    #[test]
    fn wavy_strip_stokes_and_monotone_energy() {
        let grid = torus(32);
        let top = BoundaryFn::new(SpectralField::from_fn(&grid, |x| 0.1 * x.cos()));
        let geom = StripGeometry::new(top, BoundaryFn::flat(&grid, -1.0)).unwrap();
        let sys = build_flatten_finite(&geom, 32).unwrap();
        let g = SpectralField::from_fn(&grid, |x| x.cos() + 0.3 * (2.0 * x).sin());
        let sol = solve(&sys, &g, 1e-12).unwrap();
        assert!(sol.residual() <= 1e-12);
        let trace = dn_trace(&sol);
        let pairing = trace.pairing(&g).unwrap();
        let energy = dirichlet_energy(&sol);
        assert!((pairing - energy).abs() <= 1e-10 * energy);
        assert!(trace.mean().abs() < 1e-10);
        let h = sol.energy_history();
        assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs()));
    }
}
