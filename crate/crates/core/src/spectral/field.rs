use num_complex::Complex;

use super::grid::PeriodicGrid;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Real samples on a periodic grid together with their normalized Fourier
/// coefficients `ĝ_k = (1/L) ∫ g e^{-iξ_k x} dx` (trapezoid: `fft(g)/N`).
#[derive(Clone, Debug)]
pub struct SpectralField<T: Scalar> {
    grid: PeriodicGrid<T>,
    values: Vec<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn from_values(grid: &PeriodicGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        grid.fft(&mut buf);
        let scale = T::one() / T::from_usize_lossy(grid.len());
        buf.iter_mut().for_each(|c| *c = *c * scale);
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs: buf,
        })
    }

    pub fn from_fn(grid: &PeriodicGrid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.points().map(f).collect();
        Self::from_values(grid, values).expect("sample count matches grid")
    }

    pub fn constant(grid: &PeriodicGrid<T>, c: T) -> Self {
        Self::from_values(grid, vec![c; grid.len()]).expect("sample count matches grid")
    }

    pub fn zeros(grid: &PeriodicGrid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    /// Builds a real field from normalized coefficients. Only the Hermitian
    /// part survives; the stored coefficients are recomputed from the samples.
    pub fn from_coefficients(grid: &PeriodicGrid<T>, coeffs: &[Complex<T>]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let mut buf = coeffs.to_vec();
        grid.ifft(&mut buf);
        Self::from_values(grid, buf.iter().map(|c| c.re).collect())
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Average over one period (the zero coefficient).
    #[inline]
    pub fn mean(&self) -> T {
        self.coeffs[0].re
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// True when every nonzero mode is negligible against the data scale.
    pub fn is_constant(&self) -> bool {
        let scale = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
        let tol = T::epsilon() * T::lit(64.0) * scale.max(T::min_positive_value());
        self.coeffs[1..].iter().all(|c| c.norm() <= tol)
    }

    /// Interpolant inner product `∫ I(self) I(other) dx`, where `I` is the
    /// trigonometric interpolant with the Nyquist mode as a cosine.
    pub fn pairing(&self, other: &Self) -> Result<T> {
        self.same_grid(other)?;
        let period = self.grid.period();
        let sum = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .fold(T::zero(), |acc, (k, (a, b))| {
                acc + self.grid.mode_weight(k) * (a * b.conj()).re
            });
        Ok(period * sum)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
            .expect("same grid")
    }

    /// Applies `f` on the 3/2-padded grid and truncates back to the coarse
    /// band, so quadratic nonlinearities carry no aliasing.
    pub fn map_dealiased(&self, f: impl Fn(T) -> T) -> Self {
        let fine = self.fine_values();
        self.with_fine_values(fine.into_iter().map(f).collect())
    }

    pub(crate) fn with_fine_values(&self, fine: Vec<T>) -> Self {
        let m = self.grid.fine_len();
        let mut buf: Vec<Complex<T>> = fine
            .into_iter()
            .map(|v| Complex::new(v, T::zero()))
            .collect();
        self.grid.fine_fft(&mut buf);
        let scale = T::one() / T::from_usize_lossy(m);
        buf.iter_mut().for_each(|c| *c = *c * scale);
        let mut coarse = vec![Complex::new(T::zero(), T::zero()); self.grid.len()];
        self.grid.truncate(&buf, &mut coarse);
        Self::from_coefficients(&self.grid, &coarse).expect("same grid")
    }

    /// Samples of the interpolant on the padded grid.
    pub fn fine_values(&self) -> Vec<T> {
        let mut fine = vec![Complex::new(T::zero(), T::zero()); self.grid.fine_len()];
        self.grid.pad_into(&self.coeffs, &mut fine);
        self.grid.fine_ifft(&mut fine);
        fine.into_iter().map(|c| c.re).collect()
    }

    /// Derivative of the interpolant sampled on the padded grid. The Nyquist
    /// cosine contributes a sine that the coarse grid cannot see.
    pub fn fine_derivative(&self) -> Vec<T> {
        let m = self.grid.fine_len();
        let mut fine = vec![Complex::new(T::zero(), T::zero()); m];
        self.grid.pad_into(&self.coeffs, &mut fine);
        for (k, c) in fine.iter_mut().enumerate() {
            let xi = self.grid.fine_frequency(k);
            *c = Complex::new(-c.im * xi, c.re * xi);
        }
        self.grid.fine_ifft(&mut fine);
        fine.into_iter().map(|c| c.re).collect()
    }

    /// Spectral derivative on the coarse grid (Nyquist mode dropped).
    pub fn derivative(&self) -> Self {
        let half = self.grid.nyquist();
        let coeffs: Vec<Complex<T>> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == half {
                    Complex::new(T::zero(), T::zero())
                } else {
                    let xi = self.grid.frequency(k);
                    Complex::new(-c.im * xi, c.re * xi)
                }
            })
            .collect();
        Self::from_coefficients(&self.grid, &coeffs).expect("same grid")
    }

    /// Trigonometric interpolant at an arbitrary point.
    pub fn eval_at(&self, x: T) -> T {
        let grid = &self.grid;
        let mut acc = self.coeffs[0].re;
        let two = T::lit(2.0);
        for k in 1..grid.nyquist() {
            let (s, c) = (grid.frequency(k) * x).sin_cos();
            let a = self.coeffs[k];
            acc = acc + two * (a.re * c - a.im * s);
        }
        let ny = grid.nyquist();
        acc + self.coeffs[ny].re * (grid.frequency(ny) * x).cos()
    }

    /// `sup |I(self)|` over the whole period, not just the nodes: every local
    /// maximum of the padded samples within 10% of the largest is refined by
    /// golden-section search.
    pub fn interpolant_sup(&self) -> T {
        let fine = self.fine_values();
        let m = fine.len();
        let abs: Vec<T> = fine.iter().map(|v| v.abs()).collect();
        let top = abs.iter().fold(T::zero(), |a, &b| a.max(b));
        if top == T::zero() {
            return T::zero();
        }
        let h = self.grid.period() / T::from_usize_lossy(m);
        let invphi = T::lit(0.618_033_988_749_894_9);
        let mut best = top;
        for i in 0..m {
            let (l, r) = (abs[(i + m - 1) % m], abs[(i + 1) % m]);
            if abs[i] < l || abs[i] < r || abs[i] < T::lit(0.9) * top {
                continue;
            }
            let xi = T::from_usize_lossy(i) * h;
            let (mut a, mut b) = (xi - h, xi + h);
            let f = |x: T| self.eval_at(x).abs();
            let mut c = b - (b - a) * invphi;
            let mut d = a + (b - a) * invphi;
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..80 {
                if fc > fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - (b - a) * invphi;
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + (b - a) * invphi;
                    fd = f(d);
                }
            }
            best = best.max(fc).max(fd);
        }
        best
    }

    pub fn scaled(&self, a: T) -> Self {
        self.map(|v| a * v)
    }

    pub fn shifted(&self, c: T) -> Self {
        self.map(|v| v + c)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Self::from_values(&self.grid, values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(T::one(), other, -T::one())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(T::one(), other, T::one())
    }

    /// Largest pointwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn torus(n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::torus(n).unwrap()
    }

    #[test]
    fn cosine_coefficients() {
        let g = torus(32);
        let f = SpectralField::from_fn(&g, |x| x.cos());
        assert!((f.coefficients()[1].re - 0.5).abs() < 1e-15);
        assert!((f.coefficients()[31].re - 0.5).abs() < 1e-15);
        assert!(f.mean().abs() < 1e-16);
    }

    #[test]
    fn fine_derivative_matches_closed_form() {
        let g = torus(16);
        let f = SpectralField::from_fn(&g, |x| (3.0 * x).sin() + 0.25 * (8.0 * x).cos());
        let d = f.fine_derivative();
        for (x, v) in g.fine_points().zip(d) {
            let exact = 3.0 * (3.0 * x).cos() - 2.0 * (8.0 * x).sin();
            assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        }
    }

    #[test]
    fn nyquist_pairing_uses_interpolant_mass() {
        let g = torus(8);
        let f = SpectralField::from_fn(&g, |x| (4.0 * x).cos());
        // ∫ cos²(4x) over the period is π
        assert!((f.pairing(&f).unwrap() - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn dealiased_square_is_exact_for_band_limited_input() {
        let g = torus(16);
        let f = SpectralField::from_fn(&g, |x| x.cos() + 0.5 * (3.0 * x).sin());
        let sq = f.map_dealiased(|v| v * v);
        for (x, v) in g.points().zip(sq.values()) {
            let exact = (x.cos() + 0.5 * (3.0 * x).sin()).powi(2);
            assert!((v - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_detection() {
        let g = torus(16);
        assert!(SpectralField::constant(&g, 3.0).is_constant());
        assert!(!SpectralField::from_fn(&g, |x| 3.0 + 1e-6 * x.cos()).is_constant());
    }

    #[test]
    fn interpolant_sup_between_nodes() {
        let g = torus(16);
        let shift = 0.1;
        let f = SpectralField::from_fn(&g, |x| (x - shift).cos() + 0.2 * (3.0 * x).sin());
        let dense = (0..200_000)
            .map(|i| {
                let x = i as f64 * std::f64::consts::TAU / 200_000.0;
                ((x - shift).cos() + 0.2 * (3.0 * x).sin()).abs()
            })
            .fold(0.0f64, f64::max);
        assert!(f.interpolant_sup() >= dense - 1e-12);
        assert!(f.interpolant_sup() <= dense + 1e-9);
        assert!(f.interpolant_sup() >= f.sup_norm());
        for x in [0.3, 1.7, 5.9] {
            let exact = (x - shift).cos() + 0.2 * (3.0 * x).sin();
            assert!((f.eval_at(x) - exact).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(vals in proptest::collection::vec(-10.0f64..10.0, 64)) {
            let g = torus(64);
            let f = SpectralField::from_values(&g, vals.clone()).unwrap();
            let back = SpectralField::from_coefficients(&g, f.coefficients()).unwrap();
            let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in vals.iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
            // discrete Parseval with the coarse (trapezoid) weights
            let spec: f64 = f.coefficients().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.period();
            let phys: f64 = vals.iter().map(|v| v * v).sum::<f64>() * g.spacing();
            prop_assert!((spec - phys).abs() <= 1e-10 * phys.max(1e-300));
            // real input gives Hermitian coefficients
            for k in 1..64 {
                let d = f.coefficients()[k] - f.coefficients()[64 - k].conj();
                prop_assert!(d.norm() <= 1e-12 * scale);
            }
        }
    }
}
