//! Two real transforms per complex FFT.

use num_complex::Complex;

use crate::scalar::Scalar;
use crate::spectral::PeriodicGrid;

/// Normalized spectra (`fft/N`) of `rows` consecutive real rows of length `N`.
pub(crate) fn analyze_rows<T: Scalar>(
    grid: &PeriodicGrid<T>,
    u: &[T],
    rows: usize,
    out: &mut [Complex<T>],
    buf: &mut [Complex<T>],
    scratch: &mut [Complex<T>],
) {
    let n = grid.len();
    let scale = T::lit(0.5) / T::from_usize_lossy(n);
    let mut j = 0;
    while j < rows {
        let pair = j + 1 < rows;
        for i in 0..n {
            let im = if pair { u[(j + 1) * n + i] } else { T::zero() };
            buf[i] = Complex::new(u[j * n + i], im);
        }
        grid.fft_with(buf, scratch);
        for k in 0..n {
            let zk = buf[k];
            let zm = buf[(n - k) % n].conj();
            out[j * n + k] = (zk + zm) * scale;
            if pair {
                // (zk - zm) / 2i
                let d = (zk - zm) * scale;
                out[(j + 1) * n + k] = Complex::new(d.im, -d.re);
            }
        }
        j += 2;
    }
}

/// Real rows `scale · ifft_unnormalized(spec_j)` for Hermitian spectra.
pub(crate) fn synthesize_rows<T: Scalar>(
    grid: &PeriodicGrid<T>,
    spec: &[Complex<T>],
    rows: usize,
    scale: T,
    out: &mut [T],
    buf: &mut [Complex<T>],
    scratch: &mut [Complex<T>],
) {
    let n = grid.len();
    let mut j = 0;
    while j < rows {
        let pair = j + 1 < rows;
        for k in 0..n {
            let a = spec[j * n + k];
            if pair {
                let b = spec[(j + 1) * n + k];
                buf[k] = Complex::new(a.re - b.im, a.im + b.re);
            } else {
                buf[k] = a;
            }
        }
        grid.ifft_with(buf, scratch);
        for i in 0..n {
            out[j * n + i] = buf[i].re * scale;
            if pair {
                out[(j + 1) * n + i] = buf[i].im * scale;
            }
        }
        j += 2;
    }
}
