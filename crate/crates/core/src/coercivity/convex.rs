use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dno::DnOperator;
use crate::elliptic::dn_trace;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{boundary_seminorm, SpectralField};

/// Nodes in the Ψ table.
pub const PSI_TABLE_SIZE: usize = 4096;

const QUAD_TOL: f64 = 1e-14;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Convex `Φ` with its first two derivatives.
#[derive(Clone)]
pub struct ConvexPair {
    name: String,
    phi: ScalarFn,
    dphi: ScalarFn,
    ddphi: ScalarFn,
}

impl fmt::Debug for ConvexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ConvexPair").field(&self.name).finish()
    }
}

impl ConvexPair {
    pub fn new(
        name: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        ddphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            phi: Arc::new(phi),
            dphi: Arc::new(dphi),
            ddphi: Arc::new(ddphi),
        }
    }

    /// `Φ(z) = z²`.
    pub fn quadratic() -> Self {
        Self::new("z^2", |z| z * z, |z| 2.0 * z, |_| 2.0)
    }

    /// `Φ(z) = |z|^p`, `p ≥ 2`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "power pair needs p >= 2, got {p}"
            )));
        }
        Ok(Self::new(
            format!("|z|^{p}"),
            move |z: f64| z.abs().powf(p),
            move |z: f64| p * z.abs().powf(p - 1.0) * z.signum(),
            move |z: f64| p * (p - 1.0) * z.abs().powf(p - 2.0),
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phi(&self, z: f64) -> f64 {
        (self.phi)(z)
    }

    pub fn dphi(&self, z: f64) -> f64 {
        (self.dphi)(z)
    }

    pub fn ddphi(&self, z: f64) -> f64 {
        (self.ddphi)(z)
    }

    fn sqrt_ddphi(&self, z: f64) -> Result<f64> {
        let v = self.ddphi(z);
        if v < 0.0 || v.is_nan() {
            return Err(Error::NonConvex { z, value: v });
        }
        Ok(v.sqrt())
    }

    /// Checks `Φ'' ≥ 0` on `samples` uniform points of `[lo, hi]` and that
    /// `Φ'(z)/z` settles to a finite limit as `z → 0` from both sides.
    pub fn validate(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        let samples = samples.max(2);
        for i in 0..samples {
            let z = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            self.sqrt_ddphi(z)?;
        }
        for side in [1.0, -1.0] {
            let q: Vec<f64> = (3..=8)
                .map(|e| {
                    let z = side * 10f64.powi(-e);
                    self.dphi(z) / z
                })
                .collect();
            let spread = (q[q.len() - 1] - q[q.len() - 2]).abs();
            let scale = q.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if q.iter().any(|v| !v.is_finite()) || spread > 1e-3 * scale {
                return Err(Error::InvalidParameter(format!(
                    "Φ'(z)/z has no finite limit at 0 for {}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn integrate_sqrt(pair: &ConvexPair, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // the integrand may have a cusp at 0, keep it at an endpoint
    if a < 0.0 && b > 0.0 || a > 0.0 && b < 0.0 {
        return Ok(integrate_sqrt(pair, a, 0.0)? + integrate_sqrt(pair, 0.0, b)?);
    }
    // probe the panel for convexity before integrating
    for i in 0..=8 {
        pair.sqrt_ddphi(a + (b - a) * i as f64 / 8.0)?;
    }
    let bad = Cell::new(None);
    let out = quadrature::integrate(
        |z| {
            let v = pair.ddphi(z);
            if v < 0.0 || v.is_nan() {
                if bad.get().is_none() {
                    bad.set(Some((z, v)));
                }
                0.0
            } else {
                v.sqrt()
            }
        },
        a,
        b,
        QUAD_TOL,
    );
    if let Some((z, value)) = bad.get() {
        return Err(Error::NonConvex { z, value });
    }
    Ok(out.integral)
}

/// `Ψ(z) = ∫₀^z √Φ''(s) ds` by double-exponential quadrature.
pub fn psi_from_phi(pair: &ConvexPair, z: f64) -> Result<f64> {
    integrate_sqrt(pair, 0.0, z)
}

/// `Ψ` tabulated on a uniform grid of `[lo, hi]`, with queries completed by
/// quadrature from the nearest node. Queries outside the range fail.
#[derive(Clone, Debug)]
pub struct PsiTable {
    pair: ConvexPair,
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
}

impl PsiTable {
    pub fn new(pair: &ConvexPair, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bad table range [{lo}, {hi}]"
            )));
        }
        let n = PSI_TABLE_SIZE;
        let step = (hi - lo) / (n - 1) as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut acc = psi_from_phi(pair, lo)?;
        nodes.push(acc);
        for i in 1..n {
            let a = lo + step * (i - 1) as f64;
            let b = if i == n - 1 { hi } else { lo + step * i as f64 };
            acc += integrate_sqrt(pair, a, b)?;
            nodes.push(acc);
        }
        Ok(Self {
            pair: pair.clone(),
            lo,
            hi,
            nodes,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(z >= self.lo && z <= self.hi) {
            return Err(Error::OutOfRange {
                z,
                lo: self.lo,
                hi: self.hi,
            });
        }
        if self.hi == self.lo {
            return Ok(self.nodes[0]);
        }
        let n = self.nodes.len();
        let step = (self.hi - self.lo) / (n - 1) as f64;
        let j = (((z - self.lo) / step).round() as usize).min(n - 1);
        let zj = if j == n - 1 {
            self.hi
        } else {
            self.lo + step * j as f64
        };
        Ok(self.nodes[j] + integrate_sqrt(&self.pair, zj, z)?)
    }
}

/// `⟨G g, Φ'(g)⟩` against `M ‖Ψ(g)‖²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexReport {
    pub geometry: String,
    pub phi: String,
    pub seed: Option<u64>,
    pub pairing: f64,
    pub psi_seminorm2: f64,
    pub ratio: f64,
    pub structural_factor: f64,
    #[serde(rename = "C_cal")]
    pub c_cal: f64,
    pub bound: f64,
    pub pass: bool,
}

impl ConvexReport {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

pub fn convex_certify<T: Scalar>(
    op: &DnOperator<T>,
    g: &SpectralField<T>,
    pair: &ConvexPair,
    c_cal: f64,
) -> Result<ConvexReport> {
    if g.is_constant() {
        return Err(Error::ConstantInput);
    }
    let (lo, hi) = g
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            (l.min(v.to64()), h.max(v.to64()))
        });
    pair.validate(lo.min(0.0), hi.max(0.0), PSI_TABLE_SIZE)?;
    let table = PsiTable::new(pair, lo, hi)?;
    let dphi = g.map(|v| T::lit(pair.dphi(v.to64())));
    let psi_vals = g
        .values()
        .iter()
        .map(|v| table.eval(v.to64()).map(T::lit))
        .collect::<Result<Vec<_>>>()?;
    let psi = SpectralField::from_values(g.grid(), psi_vals)?;
    let trace = dn_trace(&op.solve(g, None)?);
    let pairing = trace.pairing(&dphi)?.to64();
    let semi = boundary_seminorm(&psi).to64();
    let psi_seminorm2 = semi * semi;
    let structural_factor = op.geometry().structural_factor().to64();
    let bound = c_cal * structural_factor;
    let ratio = pairing / psi_seminorm2;
    Ok(ConvexReport {
        geometry: op.geometry().describe(),
        phi: pair.name().to_string(),
        seed: None,
        pairing,
        psi_seminorm2,
        ratio,
        structural_factor,
        c_cal,
        bound,
        pass: ratio >= bound,
    })
}
