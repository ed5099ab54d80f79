//! Shannon-type lower bounds on the rate-distortion function (in nats).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::regularity::{CertKind, RegularityCertificate};
use crate::special_functions::ln_gamma;

/// `F_{m,k,c}(D) = log((m/(kD))^{m/k} / (c Γ(1+m/k))) − m/k`.
pub fn f_shannon(m: f64, k: f64, c: f64, d: f64) -> Result<f64> {
    for (name, v) in [("m", m), ("k", k), ("c", c), ("D", d)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(domain("f_shannon", format!("{name} = {v} must be positive and finite")));
        }
    }
    let q = m / k;
    Ok(q * (q / d).ln() - c.ln() - ln_gamma(1.0 + q) - q)
}

/// Query for the explicit lower bound. The distortion exponent is the
/// certificate's `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdQuery {
    /// Generalized entropy h_μ(X) in nats.
    pub entropy: f64,
    pub cert: RegularityCertificate,
    /// Distortion level in units of ρ.
    pub d: f64,
}

fn require_sub(cert: &RegularityCertificate, op: &'static str) -> Result<()> {
    cert.validate()?;
    if cert.kind != CertKind::Sub {
        return Err(Error::Inapplicable {
            what: op,
            why: "a subregularity certificate is required".into(),
        });
    }
    if cert.m <= 0.0 {
        return Err(Error::Inapplicable {
            what: op,
            why: "the regularity dimension must be positive".into(),
        });
    }
    Ok(())
}

/// Explicit lower bound R^L_X(D). For finite δ0 the caller asserts μ(X) = 1.
pub fn rd_lower_explicit(q: &RdQuery) -> Result<f64> {
    require_sub(&q.cert, "rd_lower_explicit")?;
    if !(q.d > 0.0) || !q.d.is_finite() {
        return Err(domain("rd_lower_explicit", format!("D = {} must be positive", q.d)));
    }
    if !q.entropy.is_finite() {
        return Err(domain("rd_lower_explicit", "entropy must be finite"));
    }
    let RegularityCertificate {
        m, constant: c, delta0, k, ..
    } = q.cert;
    if delta0.is_infinite() {
        return Ok(q.entropy + f_shannon(m, k, c, q.d)?);
    }
    let r = m / k;
    let a = c.ln() - r * (r / q.d).ln() + ln_gamma(1.0 + r);
    let b = -m * delta0.powf(k) / (k * q.d);
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let log_sum = hi + (lo - hi).exp().ln_1p();
    Ok(q.entropy - r - log_sum)
}

/// Outcome of the numeric Shannon-type bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericSlb {
    pub rate: f64,
    /// Minimizing s.
    pub s_star: f64,
}

/// `h − inf_s (sD + log ν(s))` by golden-section search on log s over
/// `[lo/D, hi/D]` (defaults 1e-6 and 1e6) with a final parabolic step.
///
/// When ν is estimated by sampling, the result is heuristic: an
/// under-estimated supremum makes the bound optimistic.
pub fn rd_slb_numeric<F>(entropy: f64, nu: F, s_bounds: Option<(f64, f64)>, d: f64) -> Result<NumericSlb>
where
    F: Fn(f64) -> f64,
{
    if !(d > 0.0) || !d.is_finite() {
        return Err(domain("rd_slb_numeric", format!("D = {d} must be positive")));
    }
    let (lo, hi) = s_bounds.unwrap_or((1e-6, 1e6));
    if !(lo > 0.0 && hi > lo) {
        return Err(domain("rd_slb_numeric", "invalid s search bounds"));
    }
    let obj = |t: f64| {
        let s = t.exp();
        let v = s * d + nu(s).ln();
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = ((lo / d).ln(), (hi / d).ln());
    let (t_lo, t_hi) = (a, b);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (obj(x1), obj(x2));
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = obj(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = obj(x2);
        }
    }
    let (mut t_best, mut f_best) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    // parabolic refinement through three nearby points
    let h = 1e-4_f64.max(b - a);
    let (fm, fp) = (obj(t_best - h), obj(t_best + h));
    let curv = fp - 2.0 * f_best + fm;
    if curv > 0.0 {
        let t = t_best - 0.5 * h * (fp - fm) / curv;
        let ft = obj(t);
        if ft < f_best {
            t_best = t;
            f_best = ft;
        }
    }
    if !f_best.is_finite() {
        return Err(Error::NoConvergence { best: entropy - f_best });
    }
    let edge = 1e-6 * (t_hi - t_lo);
    if t_best - t_lo < edge || t_hi - t_best < edge {
        return Err(Error::NoConvergence { best: entropy - f_best });
    }
    Ok(NumericSlb {
        rate: entropy - f_best,
        s_star: t_best.exp(),
    })
}

/// Monte Carlo estimate of `ν(s) = sup_y ∫ e^{−sρ(x,y)} dμ(x)` from a fixed
/// sample of x and a finite candidate set of y (common random numbers make
/// the estimate smooth in s).
#[derive(Debug, Clone)]
pub struct SampledNu {
    /// distances[j][i] = ρ(x_i, y_j)
    distances: Vec<Vec<f64>>,
    /// Total mass of the reference measure.
    mass: f64,
}

impl SampledNu {
    pub fn new<P, C, D>(xs: &[P], ys: &[C], mass: f64, rho: D) -> Result<Self>
    where
        D: Fn(&P, &C) -> f64,
    {
        if xs.is_empty() || ys.is_empty() {
            return Err(domain("SampledNu", "need at least one sample and one candidate"));
        }
        let distances = ys.iter().map(|y| xs.iter().map(|x| rho(x, y)).collect()).collect();
        Ok(Self { distances, mass })
    }

    /// (ν̂(s), standard error at the maximizing candidate).
    pub fn estimate(&self, s: f64) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for row in &self.distances {
            let n = row.len() as f64;
            let (sum, sq) = row.iter().fold((0.0, 0.0), |(a, b), &r| {
                let e = (-s * r).exp();
                (a + e, b + e * e)
            });
            let mean = sum / n;
            if mean > best.0 {
                let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
                best = (mean, (var / n).sqrt());
            }
        }
        (self.mass * best.0, self.mass * best.1)
    }

    pub fn nu(&self, s: f64) -> f64 {
        self.estimate(s).0
    }
}

/// Lower bound m on the lower R-D dimension.
pub fn rd_dimension_lower(cert: &RegularityCertificate) -> Result<f64> {
    require_sub(cert, "rd_dimension_lower")?;
    Ok(cert.m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiLetterQuery {
    pub ell: u64,
    pub p: f64,
    pub sigma_p: f64,
    pub m: f64,
    pub c: f64,
    #[serde(with = "crate::regularity::inf_float")]
    pub delta0: f64,
    pub k: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiLetterBound {
    /// R̃_(ℓ)(D)
    pub rate: f64,
    /// D_(ℓ); the bound is valid for D below it.
    pub d_max: f64,
    /// ℓ → ∞ limit.
    pub limit: f64,
}

/// Lower bound on the ℓ-letter operational rate for i.i.d. sources.
pub fn multi_letter_lower(q: &MultiLetterQuery) -> Result<MultiLetterBound> {
    if q.ell == 0 {
        return Err(domain("multi_letter_lower", "ℓ must be at least 1"));
    }
    if !(q.p >= 1.0) || !q.p.is_finite() {
        return Err(domain("multi_letter_lower", format!("p = {} must be ≥ 1", q.p)));
    }
    for (name, v) in [("Σ_p", q.sigma_p), ("m", q.m), ("c", q.c), ("k", q.k), ("D", q.d)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(domain("multi_letter_lower", format!("{name} = {v} must be positive")));
        }
    }
    if !(q.delta0 > 0.0) {
        return Err(domain("multi_letter_lower", "δ0 must be positive"));
    }
    let l = q.ell as f64;
    let pk = q.p * q.k;
    let x = q.m / pk;
    let lm = l * q.m;
    let d_max = if q.delta0.is_infinite() {
        f64::INFINITY
    } else {
        q.delta0.powf(q.k) / l * lm / (lm + pk)
    };
    let limit = -q.sigma_p.ln() + f_shannon(q.m / q.p, q.k, q.c.powf(1.0 / q.p), q.d)?;
    if q.d >= d_max {
        return Err(Error::NoBound { d: q.d, limit: d_max });
    }
    let ln_d = ln_gamma(1.0 + x) + x * l.ln() - ln_gamma(1.0 + l * x) / l
        + q.c.ln() / q.p
        + q.sigma_p.ln();
    let rate = x * (lm / ((lm + pk) * q.d)).ln() - ln_d;
    Ok(MultiLetterBound { rate, d_max, limit })
}
