//! Sobolev, Hölder and Lebesgue norms sharing one Fourier convention.
//!
//! With normalized coefficients `ĝ_k` and period `L`, every Sobolev-type norm
//! is `L Σ_k μ_k w(ξ_k) |ĝ_k|²` under a square root, where `μ_k` is the
//! interpolant weight of the slot (1/2 at Nyquist). On the unit torus this is
//! `(2π) Σ w(k) |ĝ_k|²`, so `⟨|D|g, g⟩ = ‖g‖²_{Ḣ^{1/2}}` holds exactly.

use super::field::SpectralField;
use crate::scalar::Scalar;

fn weighted_sum<T: Scalar>(g: &SpectralField<T>, weight: impl Fn(T) -> T) -> T {
    let grid = g.grid();
    let sum = g
        .coefficients()
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, c)| {
            acc + grid.mode_weight(k) * weight(grid.frequency(k).abs()) * c.norm_sqr()
        });
    grid.period() * sum
}

/// Homogeneous seminorm `‖g‖_{Ḣ^s}`. The zero mode is dropped unless `s = 0`,
/// in which case the result is the L² norm of the interpolant.
pub fn seminorm_hs<T: Scalar>(g: &SpectralField<T>, s: T) -> T {
    debug_assert!(s >= -T::one() && s <= T::one());
    let two_s = s + s;
    weighted_sum(g, |xi| {
        if xi == T::zero() {
            if s == T::zero() {
                T::one()
            } else {
                T::zero()
            }
        } else {
            xi.powf(two_s)
        }
    })
    .sqrt()
}

/// Inhomogeneous `‖u‖_{H^s}` with weight `(1 + |ξ|²)^s`.
pub fn norm_hs<T: Scalar>(u: &SpectralField<T>, s: T) -> T {
    weighted_sum(u, |xi| (T::one() + xi * xi).powf(s)).sqrt()
}

/// `‖u‖_{H^{-1/2}}`.
pub fn norm_h_neg_half<T: Scalar>(u: &SpectralField<T>) -> T {
    norm_hs(u, T::lit(-0.5))
}

/// `‖g‖_{H̃^{1/2}}` with low-frequency weight `min{|ξ|, |ξ|²}` at the grid's
/// physical frequencies. Coincides with `Ḣ^{1/2}` on the unit torus.
pub fn norm_wt_half<T: Scalar>(g: &SpectralField<T>) -> T {
    weighted_sum(g, |xi| xi.min(xi * xi)).sqrt()
}

/// Seminorm the coercive inequalities are stated in: `Ḣ^{1/2}` on the torus,
/// `H̃^{1/2}` on the line surrogate.
pub fn boundary_seminorm<T: Scalar>(g: &SpectralField<T>) -> T {
    if g.grid().is_torus() {
        seminorm_hs(g, T::lit(0.5))
    } else {
        norm_wt_half(g)
    }
}

/// `‖g‖_{L^p}` by the equal-weight (trapezoid) rule.
pub fn lp_norm<T: Scalar>(g: &SpectralField<T>, p: T) -> T {
    debug_assert!(p >= T::one());
    let dx = g.grid().spacing();
    let sum = g
        .values()
        .iter()
        .fold(T::zero(), |acc, v| acc + v.abs().powf(p));
    (sum * dx).powf(T::one() / p)
}

/// Discrete `‖g‖_∞ + [g]_α` with the seminorm maximized over all grid pairs
/// under periodic distance.
///
/// This is a lower bound for the continuum Hölder norm of the interpolant and
/// converges to it as the grid is refined. Cost is quadratic in the grid size.
pub fn holder_norm<T: Scalar>(g: &SpectralField<T>, alpha: T) -> T {
    debug_assert!(alpha > T::zero() && alpha <= T::one());
    let grid = g.grid();
    let n = grid.len();
    let vals = g.values();
    let dx = grid.spacing();
    // distances only depend on the index offset
    let weights: Vec<T> = (0..n)
        .map(|d| {
            let steps = d.min(n - d);
            if steps == 0 {
                T::zero()
            } else {
                (T::from_usize_lossy(steps) * dx).powf(-alpha)
            }
        })
        .collect();
    let mut semi = T::zero();
    for i in 0..n {
        let vi = vals[i];
        for j in (i + 1)..n {
            let q = (vi - vals[j]).abs() * weights[j - i];
            if q > semi {
                semi = q;
            }
        }
    }
    g.sup_norm() + semi
}
