use num_complex::Complex;

use super::pack::{analyze_rows, synthesize_rows};
use crate::domain::FlattenedSystem;
use crate::scalar::Scalar;
use crate::spectral::PeriodicGrid;

/// Exact inverse of the interior stiffness matrix of a flat system whose
/// coefficients are the per-cell x-averages of `A11` and `A22`.
///
/// That operator is diagonal in the Fourier index and tridiagonal in `z`, so
/// each mode is one LDLᵀ solve.
#[derive(Clone, Debug)]
pub struct FlatPreconditioner<T: Scalar> {
    grid: PeriodicGrid<T>,
    nz: usize,
    /// Per mode `k ≤ N/2`: pivots `d` and multipliers `l` of the LDLᵀ factors.
    pivots: Vec<Vec<T>>,
    lower: Vec<Vec<T>>,
}

impl<T: Scalar> FlatPreconditioner<T> {
    pub fn new(sys: &FlattenedSystem<T>) -> Self {
        let grid = sys.grid().clone();
        let nz = sys.nz();
        let h = sys.dz();
        let quarter = h * T::lit(0.25);
        let coeffs = sys.averaged_coefficients();
        let mut pivots = Vec::with_capacity(grid.nyquist() + 1);
        let mut lower = Vec::with_capacity(grid.nyquist() + 1);
        for k in 0..=grid.nyquist() {
            let xi = grid.frequency(k);
            let xi2 = xi * xi;
            // interior nodes 0..nz; node nz is Dirichlet
            let mut diag = vec![T::zero(); nz];
            let mut off = vec![T::zero(); nz.saturating_sub(1)];
            for (e, &(c11, c22)) in coeffs.iter().enumerate() {
                let mass = c11 * xi2 * quarter;
                let stiff = c22 / h;
                diag[e] = diag[e] + mass + stiff;
                if e + 1 < nz {
                    diag[e + 1] = diag[e + 1] + mass + stiff;
                    off[e] = off[e] + mass - stiff;
                }
            }
            let mut d = vec![T::zero(); nz];
            let mut l = vec![T::zero(); nz.saturating_sub(1)];
            d[0] = diag[0];
            for j in 1..nz {
                l[j - 1] = off[j - 1] / d[j - 1];
                d[j] = diag[j] - l[j - 1] * off[j - 1];
            }
            pivots.push(d);
            lower.push(l);
        }
        Self {
            grid,
            nz,
            pivots,
            lower,
        }
    }

    /// Length of an interior vector.
    pub fn dim(&self) -> usize {
        self.nz * self.grid.len()
    }

    pub fn apply(&self, r: &[T], out: &mut [T]) {
        let mut ws = PrecondWorkspace::new(&self.grid, self.nz);
        self.apply_with(r, out, &mut ws);
    }

    pub(crate) fn apply_with(&self, r: &[T], out: &mut [T], ws: &mut PrecondWorkspace<T>) {
        let grid = &self.grid;
        let n = grid.len();
        let nz = self.nz;
        analyze_rows(grid, r, nz, &mut ws.spectra, &mut ws.buf, &mut ws.scratch);
        let scale = T::from_usize_lossy(n) / grid.period();
        for k in 0..=grid.nyquist() {
            let d = &self.pivots[k];
            let l = &self.lower[k];
            let s = scale / grid.mode_weight(k);
            let col = &mut ws.column;
            for j in 0..nz {
                col[j] = ws.spectra[j * n + k] * s;
            }
            for j in 1..nz {
                col[j] = col[j] - col[j - 1] * l[j - 1];
            }
            for j in 0..nz {
                col[j] = col[j] / d[j];
            }
            for j in (0..nz - 1).rev() {
                col[j] = col[j] - col[j + 1] * l[j];
            }
            for j in 0..nz {
                ws.spectra[j * n + k] = col[j];
                if k != 0 && k != grid.nyquist() {
                    ws.spectra[j * n + n - k] = col[j].conj();
                }
            }
        }
        synthesize_rows(
            grid,
            &ws.spectra,
            nz,
            T::one(),
            out,
            &mut ws.buf,
            &mut ws.scratch,
        );
    }
}

pub(crate) struct PrecondWorkspace<T> {
    spectra: Vec<Complex<T>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
    column: Vec<Complex<T>>,
}

impl<T: Scalar> PrecondWorkspace<T> {
    pub(crate) fn new(grid: &PeriodicGrid<T>, nz: usize) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Self {
            spectra: vec![zero; nz * grid.len()],
            buf: vec![zero; grid.len()],
            scratch: vec![zero; grid.scratch_len()],
            column: vec![zero; nz],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_flatten_finite, StripGeometry};
    use crate::elliptic::DiscreteOperator;
    use crate::random::seeded_rng;
    use rand::Rng;

    #[test]
    fn inverts_the_flat_interior_operator() {
        let grid = PeriodicGrid::<f64>::torus(16).unwrap();
        let sys = build_flatten_finite(&StripGeometry::flat(&grid, 1.7).unwrap(), 9).unwrap();
        let op = DiscreteOperator::new(&sys);
        let pc = FlatPreconditioner::new(&sys);
        let mut rng = seeded_rng(3);
        let n = grid.len();
        let mut x: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        x[9 * n..].iter_mut().for_each(|v| *v = 0.0);
        let mut kx = vec![0.0; op.dim()];
        op.apply(&x, &mut kx);
        let mut back = vec![0.0; pc.dim()];
        pc.apply(&kx[..pc.dim()], &mut back);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }
}
