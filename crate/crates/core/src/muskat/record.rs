use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples a decay fit accepts.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Diagnostics at one sample time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub t: f64,
    pub l2: f64,
    pub hhalf: f64,
    pub linf: f64,
    pub lipschitz: f64,
    /// `‖f‖_{C^α}` in the order of [`DecayRecord::alphas`].
    pub c_alpha: Vec<f64>,
    /// `‖∂_t f‖_{H^{-1/2}}` with `∂_t f = -G_f(f)`.
    pub dtf_hneghalf: f64,
}

/// Time series of norms along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub alphas: Vec<f64>,
    pub samples: Vec<DecaySample>,
}

/// Column selector for fits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKey {
    L2,
    HHalf,
    Linf,
    Lipschitz,
    /// Index into the record's `alphas`.
    CAlpha(usize),
    DtfHNegHalf,
}

impl NormKey {
    pub fn label(&self, alphas: &[f64]) -> String {
        match self {
            NormKey::L2 => "l2".into(),
            NormKey::HHalf => "hhalf".into(),
            NormKey::Linf => "linf".into(),
            NormKey::Lipschitz => "lipschitz".into(),
            NormKey::CAlpha(i) => {
                format!("c_alpha_{}", alphas.get(*i).copied().unwrap_or(f64::NAN))
            }
            NormKey::DtfHNegHalf => "dtf_hneghalf".into(),
        }
    }
}

impl FromStr for NormKey {
    type Err = Error;

    /// Parses column names; `c_alpha_<i>` selects the `i`-th exponent.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "l2" => NormKey::L2,
            "hhalf" => NormKey::HHalf,
            "linf" => NormKey::Linf,
            "lipschitz" => NormKey::Lipschitz,
            "dtf_hneghalf" => NormKey::DtfHNegHalf,
            other => match other.strip_prefix("c_alpha_").and_then(|i| i.parse().ok()) {
                Some(i) => NormKey::CAlpha(i),
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown norm column {other:?}"
                    )))
                }
            },
        })
    }
}

impl DecaySample {
    pub fn get(&self, key: NormKey) -> f64 {
        match key {
            NormKey::L2 => self.l2,
            NormKey::HHalf => self.hhalf,
            NormKey::Linf => self.linf,
            NormKey::Lipschitz => self.lipschitz,
            NormKey::CAlpha(i) => self.c_alpha.get(i).copied().unwrap_or(f64::NAN),
            NormKey::DtfHNegHalf => self.dtf_hneghalf,
        }
    }
}

impl DecayRecord {
    pub fn new(alphas: Vec<f64>) -> Self {
        Self {
            alphas,
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, sample: DecaySample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(sample.t > last.t) {
                return Err(Error::InvalidParameter(format!(
                    "sample times must increase: {} after {}",
                    sample.t, last.t
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("t,l2,hhalf,linf,lipschitz");
        for a in &self.alphas {
            let _ = write!(h, ",c_alpha_{a}");
        }
        h.push_str(",dtf_hneghalf");
        h
    }

    /// CSV with `.` decimals and `\n` line ends. Numbers use the shortest
    /// round-trip representation, so the text is locale-free and exact.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for s in &self.samples {
            let _ = write!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                s.t, s.l2, s.hhalf, s.linf, s.lipschitz
            );
            for c in &s.c_alpha {
                let _ = write!(out, ",{c:e}");
            }
            let _ = writeln!(out, ",{:e}", s.dtf_hneghalf);
        }
        out
    }
}

/// Least-squares fit of `log ‖·‖ = a - λ t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub lambda: f64,
    pub r2: f64,
    pub samples: usize,
}

/// Fits the samples with `t ∈ [t0, t1]`.
pub fn fit_decay(record: &DecayRecord, key: NormKey, window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = record
        .samples
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1)
        .map(|s| (s.t, s.get(key)))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            got: pts.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    if let Some(&(t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::NonPositiveValues(format!(
            "{} = {v:e} at t = {t}",
            key.label(&record.alphas)
        )));
    }
    let n = pts.len() as f64;
    let (st, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, v)| (a + t, b + v.ln()));
    let (mt, my) = (st / n, sy / n);
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, v) in &pts {
        let (dt, dy) = (t - mt, v.ln() - my);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    let slope = sty / stt;
    let ss_res: f64 = pts
        .iter()
        .map(|&(t, v)| {
            let e = v.ln() - (my + slope * (t - mt));
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        lambda: -slope,
        r2,
        samples: pts.len(),
    })
}

/// Time integrals of the squared dissipation norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integrability {
    /// `∫₀^T ‖f‖²_{Ḣ^{1/2}} dt`.
    pub hhalf_sq: f64,
    /// `∫₀^T ‖∂_t f‖²_{H^{-1/2}} dt`.
    pub dtf_sq: f64,
    /// `(∫₀^T - ∫₀^{T/2}) / ∫₀^T` for each integral; 0 when the integral is 0.
    pub hhalf_tail: f64,
    pub dtf_tail: f64,
}

fn trapezoid(pts: &[(f64, f64)]) -> f64 {
    pts.windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

pub fn integrability_check(record: &DecayRecord) -> Integrability {
    let t_end = record.samples.last().map_or(0.0, |s| s.t);
    let t_half = 0.5 * t_end;
    let integrate = |f: &dyn Fn(&DecaySample) -> f64| {
        let full: Vec<(f64, f64)> = record.samples.iter().map(|s| (s.t, f(s).powi(2))).collect();
        let half: Vec<(f64, f64)> = full
            .iter()
            .copied()
            .filter(|&(t, _)| t <= t_half + 1e-12)
            .collect();
        let (a, b) = (trapezoid(&full), trapezoid(&half));
        (a, if a > 0.0 { (a - b) / a } else { 0.0 })
    };
    let (hhalf_sq, hhalf_tail) = integrate(&|s| s.hhalf);
    let (dtf_sq, dtf_tail) = integrate(&|s| s.dtf_hneghalf);
    Integrability {
        hhalf_sq,
        dtf_sq,
        hhalf_tail,
        dtf_tail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(rate: f64, n: usize) -> DecayRecord {
        let mut r = DecayRecord::new(vec![0.5]);
        for i in 0..n {
            let t = i as f64 * 0.1;
            let v = 3.0 * (-rate * t).exp();
            r.push(DecaySample {
                t,
                l2: v,
                hhalf: v,
                linf: v,
                lipschitz: v,
                c_alpha: vec![v],
                dtf_hneghalf: v,
            })
            .unwrap();
        }
        r
    }

    #[test]
    fn exact_exponential() {
        let r = synthetic(2.0, 30);
        let fit = fit_decay(&r, NormKey::L2, (0.0, 10.0)).unwrap();
        assert!((fit.lambda - 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        let fit = fit_decay(&r, "c_alpha_0".parse().unwrap(), (1.0, 2.5)).unwrap();
        assert_eq!(fit.samples, 16);
    }

    #[test]
    fn fit_errors() {
        let r = synthetic(1.0, 5);
        assert!(matches!(
            fit_decay(&r, NormKey::L2, (0.0, 1.0)),
            Err(Error::TooFewSamples { .. })
        ));
        let mut r = synthetic(1.0, 12);
        r.samples[3].l2 = 0.0;
        assert!(matches!(
            fit_decay(&r, NormKey::L2, (0.0, 2.0)),
            Err(Error::NonPositiveValues(_))
        ));
    }

    #[test]
    fn times_must_increase() {
        let mut r = synthetic(1.0, 2);
        let mut s = r.samples[1].clone();
        s.t = 0.05;
        assert!(r.push(s).is_err());
    }

    #[test]
    fn integrals_of_mode_one_decay() {
        // ‖ε e^{-t} cos‖²_{Ḣ^{1/2}} = π ε² e^{-2t}
        let eps: f64 = 1e-3;
        let mut r = DecayRecord::new(vec![]);
        for i in 0..=4000 {
            let t = i as f64 * 0.005;
            let v = (std::f64::consts::PI).sqrt() * eps * (-t).exp();
            r.push(DecaySample {
                t,
                l2: v,
                hhalf: v,
                linf: v,
                lipschitz: v,
                c_alpha: vec![],
                dtf_hneghalf: v,
            })
            .unwrap();
        }
        let out = integrability_check(&r);
        let exact = eps * eps * std::f64::consts::PI / 2.0;
        assert!((out.hhalf_sq - exact).abs() < 1e-5 * exact);
        assert!(out.hhalf_tail < 1e-8);
        assert_eq!(integrability_check(&DecayRecord::new(vec![])).hhalf_sq, 0.0);
    }

    #[test]
    fn csv_layout() {
        let r = synthetic(1.0, 2);
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,l2,hhalf,linf,lipschitz,c_alpha_0.5,dtf_hneghalf"
        );
        assert_eq!(lines.count(), 2);
        assert!(csv.ends_with('\n'));
    }
}
