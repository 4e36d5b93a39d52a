use serde::{Deserialize, Serialize};

use crate::dno::DnOperator;
use crate::elliptic::dn_trace;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{boundary_seminorm, lp_norm, SpectralField};

/// Largest admissible `|mean(g)|` relative to `max(1, ‖g‖_∞)`.
const MEAN_TOL: f64 = 1e-10;

/// `L^p` pairing `⟨G g, p|g|^{p-2}g⟩` against its lower bounds, with
/// `q = |g|^{p/2-1}g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub geometry: String,
    pub seed: Option<u64>,
    pub p: f64,
    pub pairing: f64,
    pub q_seminorm2: f64,
    pub lp_norm: f64,
    /// `‖g‖_{L^p} / ‖q‖^{2/p}`; its supremum over zero-mean data is the
    /// Poincaré-type constant.
    pub poincare_quotient: f64,
    pub structural_factor: f64,
    #[serde(rename = "C_cal")]
    pub c_cal: f64,
    pub bound: f64,
    /// `M · 4(p-1)/p · ‖q‖²`, the convex-pairing bound for `Φ = |z|^p`.
    pub convex_rhs: f64,
    /// Poincaré constant `K` the corollary check used, if any.
    pub poincare_constant: Option<f64>,
    /// `M (‖q‖² + K^{-p} ‖g‖^p_{L^p})`.
    pub corollary_rhs: Option<f64>,
    pub pass: bool,
}

impl LpReport {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn power_field<T: Scalar>(g: &SpectralField<T>, e: T) -> SpectralField<T> {
    g.map(|v| v.abs().powf(e) * v.signum())
}

/// `‖g‖_{L^p} / ‖|g|^{p/2-1}g‖^{2/p}`.
pub fn poincare_quotient<T: Scalar>(g: &SpectralField<T>, p: f64) -> Result<f64> {
    if g.is_constant() {
        return Err(Error::ConstantInput);
    }
    let q = power_field(g, T::lit(p / 2.0));
    let semi = boundary_seminorm(&q).to64();
    Ok(lp_norm(g, T::lit(p)).to64() / semi.powf(2.0 / p))
}

/// Evaluates both sides of the `L^p` coercive estimate. The corollary check
/// runs only when a Poincaré constant is supplied; the convex-pairing check
/// always runs.
pub fn lp_certify<T: Scalar>(
    op: &DnOperator<T>,
    g: &SpectralField<T>,
    p: f64,
    c_cal: f64,
    poincare_constant: Option<f64>,
) -> Result<LpReport> {
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(format!("need p >= 2, got {p}")));
    }
    let mean = g.mean().to64();
    if mean.abs() > MEAN_TOL * g.sup_norm().to64().max(1.0) {
        return Err(Error::NonZeroMean { mean });
    }
    if g.is_constant() {
        return Err(Error::ConstantInput);
    }
    let q = power_field(g, T::lit(p / 2.0));
    let weight = power_field(g, T::lit(p - 1.0)).scaled(T::lit(p));
    let trace = dn_trace(&op.solve(g, None)?);
    let pairing = trace.pairing(&weight)?.to64();
    let semi = boundary_seminorm(&q).to64();
    let q_seminorm2 = semi * semi;
    let lp = lp_norm(g, T::lit(p)).to64();
    let structural_factor = op.geometry().structural_factor().to64();
    let bound = c_cal * structural_factor;
    let convex_rhs = bound * 4.0 * (p - 1.0) / p * q_seminorm2;
    let corollary_rhs = poincare_constant.map(|k| bound * (q_seminorm2 + k.powf(-p) * lp.powf(p)));
    let pass = pairing >= convex_rhs && corollary_rhs.is_none_or(|r| pairing >= r);
    Ok(LpReport {
        geometry: op.geometry().describe(),
        seed: None,
        p,
        pairing,
        q_seminorm2,
        lp_norm: lp,
        poincare_quotient: lp / semi.powf(2.0 / p),
        structural_factor,
        c_cal,
        bound,
        convex_rhs,
        poincare_constant,
        corollary_rhs,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coercivity::certify;
    use crate::domain::BoundaryFn;
    use crate::spectral::{seminorm_hs, PeriodicGrid};

    #[test]
    fn p_two_reduces_to_quadratic() {
        let grid = PeriodicGrid::<f64>::torus(32).unwrap();
        let top = BoundaryFn::new(SpectralField::from_fn(&grid, |x| 0.2 * (2.0 * x).cos()));
        let op = DnOperator::half_space(top, 8.0, 32).unwrap();
        let g = SpectralField::from_fn(&grid, |x| x.sin() - 0.3 * (3.0 * x).cos());
        let lp = lp_certify(&op, &g, 2.0, 0.9, Some(1.0)).unwrap();
        let quad = certify(&op, &g, 0.9).unwrap();
        assert!((lp.pairing - 2.0 * quad.pairing).abs() <= 1e-12 * lp.pairing);
        assert!(lp.poincare_quotient <= 1.0);
        assert!(lp.pass);
    }

    #[test]
    fn p_four_cosine() {
        let grid = PeriodicGrid::<f64>::torus(64).unwrap();
        let op = DnOperator::half_space(BoundaryFn::flat(&grid, 0.0), 8.0, 64).unwrap();
        let g = SpectralField::from_fn(&grid, |x| x.cos());
        let rep = lp_certify(&op, &g, 4.0, 1.0, Some(rep_k(&g))).unwrap();
        let q = g.map(|v| v.abs() * v);
        assert!((rep.q_seminorm2 - seminorm_hs(&q, 0.5).powi(2)).abs() < 1e-12);
        assert!(rep.pass, "{rep:?}");
    }

    fn rep_k(g: &SpectralField<f64>) -> f64 {
        poincare_quotient(g, 4.0).unwrap()
    }

    #[test]
    fn rejects_nonzero_mean() {
        let grid = PeriodicGrid::<f64>::torus(16).unwrap();
        let op = DnOperator::half_space(BoundaryFn::flat(&grid, 0.0), 8.0, 16).unwrap();
        let g = SpectralField::from_fn(&grid, |x| 0.1 + x.cos());
        assert!(matches!(
            lp_certify(&op, &g, 4.0, 1.0, None),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let grid = PeriodicGrid::<f64>::torus(32).unwrap();
        let g = SpectralField::from_fn(&grid, |x| x.sin() + 0.5 * (2.0 * x).cos());
        for p in [2.0, 3.0, 4.0] {
            let a = poincare_quotient(&g, p).unwrap();
            let b = poincare_quotient(&g.scaled(7.5), p).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
    }
}
