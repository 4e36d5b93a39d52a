use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dno::DnOperator;
use crate::error::{Error, Result};
use crate::random::{random_trig, seeded_rng};
use crate::scalar::Scalar;
use crate::spectral::{
    apply_inverse_multiplier, apply_multiplier, MultiplierSymbol, SpectralField,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpOptions {
    /// Target for `‖|D|^{-1/2}(G x - λ|D| x)‖` with `⟨x, |D| x⟩ = 1`.
    pub tol: f64,
    pub max_iter: usize,
    /// Block size; at least 2 since cosine and sine modes pair up.
    pub block: usize,
    pub seed: u64,
}

impl Default for SharpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            block: 2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpResult {
    /// Smallest generalized eigenvalue of the pencil `(G, |D|)`.
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Number of DN applications spent.
    pub solves: usize,
}

struct Pencil<'a, T: Scalar> {
    op: &'a DnOperator<T>,
    abs_d: MultiplierSymbol<T>,
    inv: MultiplierSymbol<T>,
    mean_zero: bool,
    solves: usize,
}

impl<'a, T: Scalar> Pencil<'a, T> {
    fn project(&self, x: SpectralField<T>) -> SpectralField<T> {
        if self.mean_zero {
            let m = x.mean();
            x.shifted(-m)
        } else {
            x
        }
    }

    fn a(&mut self, x: &SpectralField<T>) -> Result<SpectralField<T>> {
        self.solves += 1;
        self.op.apply(x)
    }

    fn b(&self, x: &SpectralField<T>) -> SpectralField<T> {
        apply_multiplier(x, &self.abs_d)
    }

    /// `|D|^{-1}` with the zero mode sent to zero.
    fn precondition(&self, r: &SpectralField<T>) -> SpectralField<T> {
        let out = apply_inverse_multiplier(r, &self.inv);
        let m = out.mean();
        out.shifted(-m)
    }
}

fn combine<T: Scalar>(
    basis: &[SpectralField<T>],
    coeffs: impl Iterator<Item = f64>,
) -> SpectralField<T> {
    let grid = basis[0].grid();
    let mut acc = vec![T::zero(); grid.len()];
    for (v, c) in basis.iter().zip(coeffs) {
        let c = T::lit(c);
        for (a, &x) in acc.iter_mut().zip(v.values()) {
            *a = *a + c * x;
        }
    }
    SpectralField::from_values(grid, acc).expect("same grid")
}

fn gram<T: Scalar>(s: &[SpectralField<T>], ms: &[SpectralField<T>]) -> Result<DMatrix<f64>> {
    let n = s.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = 0.5 * (s[i].pairing(&ms[j])?.to64() + s[j].pairing(&ms[i])?.to64());
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Rayleigh–Ritz on span `s`: returns coefficient columns of the `m`
/// smallest Ritz vectors (B-orthonormal) and their values.
fn rayleigh_ritz(ga: &DMatrix<f64>, gb: &DMatrix<f64>, m: usize) -> (DMatrix<f64>, Vec<f64>) {
    let eb = SymmetricEigen::new(gb.clone());
    let dmax = eb.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eb.eigenvalues.len())
        .filter(|&i| eb.eigenvalues[i] > 1e-12 * dmax)
        .collect();
    let n = gb.nrows();
    let mut q = DMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = 1.0 / eb.eigenvalues[i].sqrt();
        for r in 0..n {
            q[(r, c)] = eb.eigenvectors[(r, i)] * s;
        }
    }
    let h = q.transpose() * ga * &q;
    let h = (&h + h.transpose()) * 0.5;
    let eh = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eh.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eh.eigenvalues[i].total_cmp(&eh.eigenvalues[j]));
    let m = m.min(order.len());
    let mut y = DMatrix::zeros(keep.len(), m);
    let mut values = Vec::with_capacity(m);
    for (c, &i) in order.iter().take(m).enumerate() {
        values.push(eh.eigenvalues[i]);
        for r in 0..keep.len() {
            y[(r, c)] = eh.eigenvectors[(r, i)];
        }
    }
    (q * y, values)
}

/// Smallest generalized eigenvalue of `G x = λ |D| x` by block LOBPCG with
/// `|D|^{-1}` as preconditioner. Every `G` application is one elliptic solve.
///
/// With `mean_zero` the iterates are projected onto zero-mean fields; without
/// it, constants (the common kernel) are filtered in the Rayleigh–Ritz step.
pub fn sharp_constant<T: Scalar>(
    op: &DnOperator<T>,
    mean_zero: bool,
    opts: &SharpOptions,
) -> Result<SharpResult> {
    let grid = op.system().grid().clone();
    let m = opts.block.max(2).min(grid.len() / 2);
    let mut pencil = Pencil {
        op,
        abs_d: MultiplierSymbol::abs_d(),
        inv: MultiplierSymbol::new("|D|^-1 (k≠0)", |xi: T| {
            if xi == T::zero() {
                T::one()
            } else {
                xi
            }
        }),
        mean_zero,
        solves: 0,
    };

    let mut rng = seeded_rng(opts.seed);
    let mut x: Vec<SpectralField<T>> = (0..m)
        .map(|i| {
            let k = T::from_usize_lossy(i / 2 + 1) * T::TAU() / grid.period();
            let base = SpectralField::from_fn(&grid, |t| {
                if i % 2 == 0 {
                    (k * t).cos()
                } else {
                    (k * t).sin()
                }
            });
            let noise = random_trig(&grid, &mut rng, grid.len() / 4, 1.0);
            pencil.project(
                base.combine(T::one(), &noise, T::lit(0.1))
                    .expect("same grid"),
            )
        })
        .collect();
    let mut ax = x.iter().map(|v| pencil.a(v)).collect::<Result<Vec<_>>>()?;
    let mut bx: Vec<_> = x.iter().map(|v| pencil.b(v)).collect();
    {
        let (c, _) = rayleigh_ritz(&gram(&x, &ax)?, &gram(&x, &bx)?, m);
        let cols = c.ncols();
        let pick = |s: &[SpectralField<T>]| -> Vec<SpectralField<T>> {
            (0..cols)
                .map(|j| combine(s, c.column(j).iter().cloned()))
                .collect()
        };
        x = pick(&x);
        ax = pick(&ax);
        bx = pick(&bx);
    }
    let mut p: Vec<SpectralField<T>> = Vec::new();
    let mut ap: Vec<SpectralField<T>> = Vec::new();
    let mut bp: Vec<SpectralField<T>> = Vec::new();
    let mut residual = f64::INFINITY;

    for iter in 0..=opts.max_iter {
        let lambda: Vec<f64> = x
            .iter()
            .zip(&ax)
            .zip(&bx)
            .map(|((xi, a), b)| Ok(xi.pairing(a)?.to64() / xi.pairing(b)?.to64()))
            .collect::<Result<_>>()?;
        let mut w = Vec::with_capacity(x.len());
        let mut res = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let r = ax[i].combine(T::one(), &bx[i], T::lit(-lambda[i]))?;
            let pr = pencil.precondition(&r);
            let norm = (r.pairing(&pr)?.to64().max(0.0) / x[i].pairing(&bx[i])?.to64()).sqrt();
            res.push(norm);
            w.push(pencil.project(pr));
        }
        residual = res[0];
        if residual <= opts.tol {
            return Ok(SharpResult {
                value: lambda[0],
                residual,
                iterations: iter,
                solves: pencil.solves,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let aw = w.iter().map(|v| pencil.a(v)).collect::<Result<Vec<_>>>()?;
        let bw: Vec<_> = w.iter().map(|v| pencil.b(v)).collect();

        let mut s: Vec<SpectralField<T>> = x.clone();
        s.extend(w.iter().cloned());
        s.extend(p.iter().cloned());
        let mut as_: Vec<SpectralField<T>> = ax.clone();
        as_.extend(aw.iter().cloned());
        as_.extend(ap.iter().cloned());
        let mut bs: Vec<SpectralField<T>> = bx.clone();
        bs.extend(bw.iter().cloned());
        bs.extend(bp.iter().cloned());

        // unit B-norm columns keep the Gram cutoff scale-free as W shrinks
        for i in 0..s.len() {
            let norm = s[i].pairing(&bs[i])?.to64().max(0.0).sqrt();
            if norm > 0.0 {
                let inv = T::lit(1.0 / norm);
                s[i] = s[i].scaled(inv);
                as_[i] = as_[i].scaled(inv);
                bs[i] = bs[i].scaled(inv);
            }
        }
        let (c, _) = rayleigh_ritz(&gram(&s, &as_)?, &gram(&s, &bs)?, m);
        let nx = x.len();
        let cols = c.ncols();
        let full = |v: &[SpectralField<T>], j: usize| combine(v, c.column(j).iter().cloned());
        let tail = |v: &[SpectralField<T>], j: usize| {
            combine(&v[nx..], c.column(j).iter().skip(nx).cloned())
        };
        p = (0..cols).map(|j| tail(&s, j)).collect();
        ap = (0..cols).map(|j| tail(&as_, j)).collect();
        bp = (0..cols).map(|j| tail(&bs, j)).collect();
        x = (0..cols).map(|j| full(&s, j)).collect();
        ax = (0..cols).map(|j| full(&as_, j)).collect();
        bx = (0..cols).map(|j| full(&bs, j)).collect();
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoundaryFn;
    use crate::spectral::PeriodicGrid;

    #[test]
    fn flat_geometries() {
        let grid = PeriodicGrid::<f64>::torus(32).unwrap();
        let opts = SharpOptions::default();
        let hs = DnOperator::half_space(BoundaryFn::flat(&grid, 0.0), 8.0, 64).unwrap();
        let r = sharp_constant(&hs, true, &opts).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{r:?}");
        let strip = DnOperator::strip(
            BoundaryFn::flat(&grid, 0.0),
            BoundaryFn::flat(&grid, -1.0),
            64,
        )
        .unwrap();
        let r = sharp_constant(&strip, true, &opts).unwrap();
        assert!((r.value - 1f64.tanh()).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn wavy_half_space_is_below_rayleigh_quotients() {
        let grid = PeriodicGrid::<f64>::torus(32).unwrap();
        let top = BoundaryFn::new(SpectralField::from_fn(&grid, |x| 0.4 * x.cos()));
        let op = DnOperator::half_space(top, 8.0, 32).unwrap();
        let r = sharp_constant(&op, true, &SharpOptions::default()).unwrap();
        for k in 1..5 {
            let g = SpectralField::from_fn(&grid, |x| (k as f64 * x).sin());
            let q = op.apply(&g).unwrap().pairing(&g).unwrap()
                / crate::spectral::seminorm_hs(&g, 0.5).powi(2);
            assert!(r.value <= q + 1e-9);
        }
        assert!(r.value > 0.0 && r.value < 1.0);
    }
}
