use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest period accepted for the large-torus surrogate of the real line.
pub const MIN_LINE_PERIOD_OVER_PI: f64 = 32.0;

struct Plans<T: Scalar> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    fine_forward: Arc<dyn Fft<T>>,
    fine_inverse: Arc<dyn Fft<T>>,
}

/// Uniform periodic grid in one space dimension.
///
/// The torus mode has period 2π and integer wavenumbers. The line mode is a
/// torus of large period `L`, with physical wavenumbers `2πk/L`, used as a
/// surrogate for functions on the real line supported in its middle half.
///
/// Transform plans for the grid and for its 3/2-padded companion are built
/// once and shared by every field on the grid.
#[derive(Clone)]
pub struct PeriodicGrid<T: Scalar> {
    n: usize,
    period: T,
    torus: bool,
    plans: Arc<Plans<T>>,
}

impl<T: Scalar> PeriodicGrid<T> {
    /// Grid on the unit torus `[0, 2π)` with `n` points.
    pub fn torus(n: usize) -> Result<Self> {
        Self::build(n, T::TAU(), true)
    }

    /// Large-period grid approximating the real line.
    pub fn line(n: usize, period: T) -> Result<Self> {
        if period < T::lit(MIN_LINE_PERIOD_OVER_PI) * T::PI() {
            return Err(Error::InvalidGrid(format!(
                "line period {period} below 32π"
            )));
        }
        Self::build(n, period, false)
    }

    fn build(n: usize, period: T, torus: bool) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count {n} must be a power of two and at least 8"
            )));
        }
        let mut planner = FftPlanner::new();
        let fine = 3 * n / 2;
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            fine_forward: planner.plan_fft_forward(fine),
            fine_inverse: planner.plan_fft_inverse(fine),
        };
        Ok(Self {
            n,
            period,
            torus,
            plans: Arc::new(plans),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Point count of the 3/2-padded dealiasing grid.
    #[inline]
    pub fn fine_len(&self) -> usize {
        3 * self.n / 2
    }

    #[inline]
    pub fn period(&self) -> T {
        self.period
    }

    #[inline]
    pub fn is_torus(&self) -> bool {
        self.torus
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.period / T::from_usize_lossy(self.n)
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        let dx = self.spacing();
        (0..self.n).map(move |i| T::from_usize_lossy(i) * dx)
    }

    pub fn fine_points(&self) -> impl Iterator<Item = T> + '_ {
        let m = self.fine_len();
        let dx = self.period / T::from_usize_lossy(m);
        (0..m).map(move |i| T::from_usize_lossy(i) * dx)
    }

    /// Signed integer wavenumber of FFT slot `idx`; the Nyquist slot maps to `+n/2`.
    #[inline]
    pub fn mode(&self, idx: usize) -> i64 {
        signed_mode(idx, self.n)
    }

    /// Physical frequency `2πk/L` of FFT slot `idx`.
    #[inline]
    pub fn frequency(&self, idx: usize) -> T {
        T::lit(self.mode(idx) as f64) * T::TAU() / self.period
    }

    /// Physical frequency of slot `idx` on the padded grid.
    #[inline]
    pub(crate) fn fine_frequency(&self, idx: usize) -> T {
        T::lit(signed_mode(idx, self.fine_len()) as f64) * T::TAU() / self.period
    }

    /// Quadrature weight of slot `idx` for integrals of the trigonometric
    /// interpolant: the Nyquist cosine carries half the mass of the others.
    #[inline]
    pub fn mode_weight(&self, idx: usize) -> T {
        if idx == self.n / 2 {
            T::lit(0.5)
        } else {
            T::one()
        }
    }

    #[inline]
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Unnormalized forward transform in place.
    pub fn fft(&self, buf: &mut [Complex<T>]) {
        self.plans.forward.process(buf);
    }

    /// Unnormalized inverse transform in place.
    pub fn ifft(&self, buf: &mut [Complex<T>]) {
        self.plans.inverse.process(buf);
    }

    pub(crate) fn fine_fft(&self, buf: &mut [Complex<T>]) {
        self.plans.fine_forward.process(buf);
    }

    pub(crate) fn fine_ifft(&self, buf: &mut [Complex<T>]) {
        self.plans.fine_inverse.process(buf);
    }

    pub(crate) fn scratch_len(&self) -> usize {
        let p = &self.plans;
        p.forward
            .get_inplace_scratch_len()
            .max(p.inverse.get_inplace_scratch_len())
            .max(p.fine_forward.get_inplace_scratch_len())
            .max(p.fine_inverse.get_inplace_scratch_len())
    }

    pub(crate) fn fft_with(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.plans.forward.process_with_scratch(buf, scratch);
    }

    pub(crate) fn ifft_with(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.plans.inverse.process_with_scratch(buf, scratch);
    }

    pub(crate) fn fine_fft_with(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.plans.fine_forward.process_with_scratch(buf, scratch);
    }

    pub(crate) fn fine_ifft_with(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.plans.fine_inverse.process_with_scratch(buf, scratch);
    }

    /// Embeds normalized coarse coefficients into the padded spectrum.
    /// The Nyquist coefficient is split evenly between `±n/2`.
    pub(crate) fn pad_into(&self, coarse: &[Complex<T>], fine: &mut [Complex<T>]) {
        let n = self.n;
        let m = self.fine_len();
        let half = n / 2;
        fine.iter_mut()
            .for_each(|c| *c = Complex::new(T::zero(), T::zero()));
        fine[..half].copy_from_slice(&coarse[..half]);
        fine[m - half + 1..].copy_from_slice(&coarse[half + 1..]);
        let nyq = coarse[half] * T::lit(0.5);
        fine[half] = nyq;
        fine[m - half] = nyq;
    }

    /// Left inverse of [`pad_into`](Self::pad_into): truncation to the coarse
    /// band, with the two Nyquist slots summed back into one cosine.
    pub(crate) fn truncate(&self, fine: &[Complex<T>], coarse: &mut [Complex<T>]) {
        let n = self.n;
        let m = self.fine_len();
        let half = n / 2;
        coarse[..half].copy_from_slice(&fine[..half]);
        coarse[half + 1..].copy_from_slice(&fine[m - half + 1..]);
        coarse[half] = fine[half] + fine[m - half];
    }
}

#[inline]
pub(crate) fn signed_mode(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

impl<T: Scalar> PartialEq for PeriodicGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.period == other.period && self.torus == other.torus
    }
}

impl<T: Scalar> fmt::Debug for PeriodicGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n", &self.n)
            .field("period", &self.period)
            .field("torus", &self.torus)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(PeriodicGrid::<f64>::torus(4).is_err());
        assert!(PeriodicGrid::<f64>::torus(24).is_err());
        assert!(PeriodicGrid::<f64>::torus(8).is_ok());
        assert!(PeriodicGrid::<f64>::line(64, 10.0).is_err());
        assert!(PeriodicGrid::<f64>::line(64, 32.0 * std::f64::consts::PI).is_ok());
    }

    #[test]
    fn spacing_and_modes() {
        let g = PeriodicGrid::<f64>::torus(16).unwrap();
        assert!((g.spacing() - std::f64::consts::TAU / 16.0).abs() < 1e-15);
        assert_eq!(g.mode(0), 0);
        assert_eq!(g.mode(8), 8);
        assert_eq!(g.mode(9), -7);
        assert_eq!(g.fine_len(), 24);
        assert_eq!(g.mode_weight(8), 0.5);
    }

    #[test]
    fn truncate_inverts_pad() {
        let g = PeriodicGrid::<f64>::torus(8).unwrap();
        let coarse: Vec<Complex<f64>> = (0..8)
            .map(|i| Complex::new(i as f64 + 1.0, 0.5 * i as f64))
            .collect();
        let mut fine = vec![Complex::new(0.0, 0.0); 12];
        g.pad_into(&coarse, &mut fine);
        let mut back = vec![Complex::new(0.0, 0.0); 8];
        g.truncate(&fine, &mut back);
        for (a, b) in coarse.iter().zip(&back) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
