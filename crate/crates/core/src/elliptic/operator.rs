use num_complex::Complex;

use super::pack::{analyze_rows, synthesize_rows};
use crate::domain::FlattenedSystem;
use crate::scalar::Scalar;
use crate::spectral::PeriodicGrid;

/// Map between coarse FFT slots and their images on the padded grid. The
/// Nyquist slot appears twice with weight 1/2.
#[derive(Clone, Debug)]
pub(crate) struct Band<T> {
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> Band<T> {
    pub(crate) fn new(grid: &PeriodicGrid<T>) -> Self {
        let n = grid.len();
        let m = grid.fine_len();
        let half = n / 2;
        let mut entries = Vec::with_capacity(n + 1);
        for c in 0..half {
            entries.push((c, c, T::one()));
        }
        entries.push((half, half, T::lit(0.5)));
        entries.push((half, m - half, T::lit(0.5)));
        for c in half + 1..n {
            entries.push((c, m - n + c, T::one()));
        }
        Self { entries }
    }
}

pub(crate) struct Workspace<T> {
    spectra: Vec<Complex<T>>,
    resid: Vec<Complex<T>>,
    fine: Vec<Complex<T>>,
    coarse: Vec<Complex<T>>,
    cx: Vec<Complex<T>>,
    cz: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> Workspace<T> {
    pub(crate) fn new(sys: &FlattenedSystem<T>) -> Self {
        let grid = sys.grid();
        let n = grid.len();
        let zero = Complex::new(T::zero(), T::zero());
        Self {
            spectra: vec![zero; (sys.nz() + 1) * n],
            resid: vec![zero; (sys.nz() + 1) * n],
            fine: vec![zero; grid.fine_len()],
            coarse: vec![zero; n],
            cx: vec![zero; n],
            cz: vec![zero; n],
            scratch: vec![zero; grid.scratch_len()],
        }
    }
}

/// Galerkin form `a(u, w) = ∫∫ A∇u·∇w` on the flattened strip: Fourier
/// collocation in `x` with 3/2 padding, continuous P1 elements in `z` with the
/// cell-midpoint rule.
///
/// Vectors are node-major: node `j` occupies `[j·N, (j+1)·N)`, node 0 is the
/// bottom and node `nz` the top. [`apply`](Self::apply) returns `K u` with
/// `a(u, w) = w·K u` exactly, so `K` is symmetric up to rounding.
pub struct DiscreteOperator<'a, T: Scalar> {
    sys: &'a FlattenedSystem<T>,
    band: Band<T>,
}

impl<'a, T: Scalar> DiscreteOperator<'a, T> {
    pub fn new(sys: &'a FlattenedSystem<T>) -> Self {
        Self {
            band: Band::new(sys.grid()),
            sys,
        }
    }

    pub fn system(&self) -> &FlattenedSystem<T> {
        self.sys
    }

    /// Length of a full nodal vector.
    pub fn dim(&self) -> usize {
        (self.sys.nz() + 1) * self.sys.grid().len()
    }

    pub fn apply(&self, u: &[T], out: &mut [T]) {
        let mut ws = Workspace::new(self.sys);
        self.apply_with(u, out, &mut ws);
    }

    /// `a(u, u)` evaluated cell by cell from the midpoint fluxes.
    pub fn energy(&self, u: &[T]) -> T {
        let mut ws = Workspace::new(self.sys);
        self.energy_with(u, &mut ws)
    }

    /// `a(u, w)` as `w·K u`.
    pub fn bilinear(&self, u: &[T], w: &[T]) -> T {
        let mut ku = vec![T::zero(); self.dim()];
        self.apply(u, &mut ku);
        dot(&ku, w)
    }

    fn node_spectra(&self, u: &[T], ws: &mut Workspace<T>) {
        let rows = self.sys.nz() + 1;
        analyze_rows(
            self.sys.grid(),
            u,
            rows,
            &mut ws.spectra,
            &mut ws.coarse,
            &mut ws.scratch,
        );
    }

    /// Fills `ws.fine` with packed midpoint samples `U_x + i U_z` of cell `e`.
    fn cell_gradients(&self, e: usize, ws: &mut Workspace<T>) {
        let grid = self.sys.grid();
        let n = grid.len();
        let inv_dz = T::one() / self.sys.dz();
        let half = T::lit(0.5);
        let zero = Complex::new(T::zero(), T::zero());
        ws.fine.iter_mut().for_each(|c| *c = zero);
        let lo = &ws.spectra[e * n..(e + 1) * n];
        let hi = &ws.spectra[(e + 1) * n..(e + 2) * n];
        for &(c, f, w) in &self.band.entries {
            let avg = (lo[c] + hi[c]) * half * w;
            let jump = (hi[c] - lo[c]) * inv_dz * w;
            let xi = grid.fine_frequency(f);
            // iξ·avg + i·jump
            ws.fine[f] = Complex::new(-avg.im * xi - jump.im, avg.re * xi + jump.re);
        }
        grid.fine_ifft_with(&mut ws.fine, &mut ws.scratch);
    }

    pub(crate) fn apply_with(&self, u: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        let sys = self.sys;
        let grid = sys.grid();
        let n = grid.len();
        let m = grid.fine_len();
        let nz = sys.nz();
        debug_assert_eq!(u.len(), (nz + 1) * n);
        debug_assert_eq!(out.len(), (nz + 1) * n);

        self.node_spectra(u, ws);
        let zero = Complex::new(T::zero(), T::zero());
        ws.resid.iter_mut().for_each(|c| *c = zero);

        let dz = sys.dz();
        let inv_dz = T::one() / dz;
        let weight = dz * grid.period() / T::from_usize_lossy(m);
        let half = T::lit(0.5);

        for e in 0..nz {
            self.cell_gradients(e, ws);
            let (a11, a12, a22) = sys.cell_coefficients(e);
            for i in 0..m {
                let ux = ws.fine[i].re;
                let uz = ws.fine[i].im;
                let fx = weight * (a11[i] * ux + a12[i] * uz);
                let fz = weight * (a12[i] * ux + a22[i] * uz);
                ws.fine[i] = Complex::new(fx, fz);
            }
            grid.fine_fft_with(&mut ws.fine, &mut ws.scratch);

            ws.cx.iter_mut().for_each(|c| *c = zero);
            ws.cz.iter_mut().for_each(|c| *c = zero);
            for &(c, f, w) in &self.band.entries {
                let yk = ws.fine[f];
                let ym = ws.fine[(m - f) % m].conj();
                let x = (yk + ym) * half;
                let d = (yk - ym) * half;
                let zc = Complex::new(d.im, -d.re);
                let xi = grid.fine_frequency(f);
                // -iξ X
                ws.cx[c] = ws.cx[c] + Complex::new(x.im * xi, -x.re * xi) * w;
                ws.cz[c] = ws.cz[c] + zc * w;
            }
            for k in 0..n {
                let gx = ws.cx[k] * half;
                let gz = ws.cz[k] * inv_dz;
                ws.resid[e * n + k] = ws.resid[e * n + k] + gx - gz;
                ws.resid[(e + 1) * n + k] = ws.resid[(e + 1) * n + k] + gx + gz;
            }
        }

        let inv_n = T::one() / T::from_usize_lossy(n);
        synthesize_rows(
            grid,
            &ws.resid,
            nz + 1,
            inv_n,
            out,
            &mut ws.coarse,
            &mut ws.scratch,
        );
    }

    pub(crate) fn energy_with(&self, u: &[T], ws: &mut Workspace<T>) -> T {
        let sys = self.sys;
        let grid = sys.grid();
        let m = grid.fine_len();
        self.node_spectra(u, ws);
        let weight = sys.dz() * grid.period() / T::from_usize_lossy(m);
        let mut total = T::zero();
        for e in 0..sys.nz() {
            self.cell_gradients(e, ws);
            let (a11, a12, a22) = sys.cell_coefficients(e);
            let mut cell = T::zero();
            for i in 0..m {
                let ux = ws.fine[i].re;
                let uz = ws.fine[i].im;
                cell = cell + a11[i] * ux * ux + T::lit(2.0) * a12[i] * ux * uz + a22[i] * uz * uz;
            }
            total = total + cell * weight;
        }
        total
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        build_flatten_finite, build_flatten_infinite, BoundaryFn, HalfSpaceGeometry, StripGeometry,
    };
    use crate::random::seeded_rng;
    use crate::spectral::SpectralField;
    use rand::Rng;

    fn wavy_strip(n: usize, nz: usize) -> FlattenedSystem<f64> {
        let g = PeriodicGrid::<f64>::torus(n).unwrap();
        let top = BoundaryFn::new(SpectralField::from_fn(&g, |x| {
            0.2 * x.cos() + 0.05 * (3.0 * x).sin()
        }));
        let bottom = BoundaryFn::new(SpectralField::from_fn(&g, |x| -1.0 + 0.1 * (2.0 * x).sin()));
        build_flatten_finite(&StripGeometry::new(top, bottom).unwrap(), nz).unwrap()
    }

    fn random_vec(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn symmetric_form() {
        let sys = wavy_strip(32, 7);
        let op = DiscreteOperator::new(&sys);
        let u = random_vec(op.dim(), 1);
        let w = random_vec(op.dim(), 2);
        let a = op.bilinear(&u, &w);
        let b = op.bilinear(&w, &u);
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn energy_matches_quadratic_form_and_is_nonnegative() {
        let sys = wavy_strip(32, 6);
        let op = DiscreteOperator::new(&sys);
        for seed in 0..5 {
            let u = random_vec(op.dim(), 10 + seed);
            let e = op.energy(&u);
            let q = op.bilinear(&u, &u);
            assert!(e > 0.0);
            assert!((e - q).abs() <= 1e-12 * e);
        }
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let g = PeriodicGrid::<f64>::torus(16).unwrap();
        let top = BoundaryFn::new(SpectralField::from_fn(&g, |x| 0.3 * x.sin()));
        let sys = build_flatten_infinite(&HalfSpaceGeometry::new(top, 4.0).unwrap(), 5).unwrap();
        let op = DiscreteOperator::new(&sys);
        let u = vec![2.0; op.dim()];
        let mut out = vec![0.0; op.dim()];
        op.apply(&u, &mut out);
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn nyquist_mode_is_not_in_the_kernel() {
        let g = PeriodicGrid::<f64>::torus(8).unwrap();
        let sys = build_flatten_finite(&StripGeometry::flat(&g, 1.0).unwrap(), 3).unwrap();
        let op = DiscreteOperator::new(&sys);
        let u: Vec<f64> = (0..op.dim())
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        // ∫∫ |∂x cos(4x)|² over unit depth = 16π
        let e = op.energy(&u);
        assert!((e - 16.0 * std::f64::consts::PI).abs() < 1e-10, "{e}");
    }
}
