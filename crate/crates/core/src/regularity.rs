//! Sub/super-regularity certificates and their algebra.
//!
//! A certificate `(kind, m, constant, delta0, k)` states that balls of the
//! distortion `ρ^{1/k}` satisfy `μ(B(y, δ)) ≤ c δ^m` (sub) or
//! `ν(B(x, δ)) ≥ b δ^m` (super) for `δ ∈ (0, delta0]`.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special_functions::ln_gamma;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertKind {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub kind: CertKind,
    pub m: f64,
    pub constant: f64,
    #[serde(with = "inf_float")]
    pub delta0: f64,
    pub k: f64,
}

impl RegularityCertificate {
    pub fn new(kind: CertKind, m: f64, constant: f64, delta0: f64, k: f64) -> Result<Self> {
        let cert = Self {
            kind,
            m,
            constant,
            delta0,
            k,
        };
        cert.validate()?;
        Ok(cert)
    }

    pub fn sub(m: f64, c: f64, delta0: f64, k: f64) -> Result<Self> {
        Self::new(CertKind::Sub, m, c, delta0, k)
    }

    pub fn sup(m: f64, b: f64, delta0: f64, k: f64) -> Result<Self> {
        Self::new(CertKind::Super, m, b, delta0, k)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Certificate(msg));
        if !(self.m >= 0.0) || !self.m.is_finite() {
            return bad(format!("dimension m = {} must be finite and ≥ 0", self.m));
        }
        if !(self.constant > 0.0) || !self.constant.is_finite() {
            return bad(format!("constant {} must be finite and > 0", self.constant));
        }
        if !(self.delta0 > 0.0) {
            return bad(format!("delta0 = {} must be > 0", self.delta0));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return bad(format!("exponent k = {} must be finite and > 0", self.k));
        }
        Ok(())
    }

    pub fn is_global(&self) -> bool {
        self.delta0.is_infinite()
    }

    /// Bound on the ball mass at radius δ (no range check).
    pub fn ball_bound(&self, delta: f64) -> f64 {
        self.constant * delta.powf(self.m)
    }
}

/// Density bound ‖dν/dμ‖_{p/(p-1)} used by the transfer rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBound {
    pub p: f64,
    pub norm_value: f64,
}

impl DensityBound {
    pub fn new(p: f64, norm_value: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(domain("DensityBound", format!("p = {p} must be ≥ 1")));
        }
        if !(norm_value > 0.0) || !norm_value.is_finite() {
            return Err(domain("DensityBound", format!("norm {norm_value} must be > 0")));
        }
        Ok(Self { p, norm_value })
    }
}

/// Certificate for `(βμ, (αρ)^{1/new_k})` from one for `(μ, ρ^{1/k})`.
///
/// With `new_k = 1` this is the classical rescaling to `αρ`, which has
/// dimension `m/k`; with `new_k = k` the dimension is unchanged.
pub fn scale_certificate(
    cert: &RegularityCertificate,
    alpha: f64,
    beta: f64,
    new_k: f64,
) -> Result<RegularityCertificate> {
    cert.validate()?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(domain("scale_certificate", format!("α = {alpha} must be > 0")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(domain("scale_certificate", format!("β = {beta} must be > 0")));
    }
    if !(new_k > 0.0) || !new_k.is_finite() {
        return Err(domain("scale_certificate", format!("k = {new_k} must be > 0")));
    }
    let ratio = cert.m / cert.k;
    let delta0 = if cert.is_global() {
        f64::INFINITY
    } else {
        (alpha * cert.delta0.powf(cert.k)).powf(1.0 / new_k)
    };
    RegularityCertificate::new(
        cert.kind,
        ratio * new_k,
        beta * cert.constant / alpha.powf(ratio),
        delta0,
        new_k,
    )
}

/// Extends a probability-measure subregularity certificate to δ0 = ∞.
pub fn globalize_certificate(
    cert: &RegularityCertificate,
    total_mass_one: bool,
) -> Result<RegularityCertificate> {
    cert.validate()?;
    if cert.kind != CertKind::Sub {
        return Err(Error::Inapplicable {
            what: "globalization",
            why: "only subregularity certificates can be globalized".into(),
        });
    }
    if !total_mass_one {
        return Err(Error::Inapplicable {
            what: "globalization",
            why: "the measure must have total mass one".into(),
        });
    }
    if cert.is_global() {
        return Ok(*cert);
    }
    RegularityCertificate::sub(
        cert.m,
        cert.constant.max(cert.delta0.powf(-cert.m)),
        f64::INFINITY,
        cert.k,
    )
}

/// Subregularity of ν ≪ μ from subregularity of μ and a density bound.
pub fn transfer_certificate(
    cert: &RegularityCertificate,
    bound: &DensityBound,
) -> Result<RegularityCertificate> {
    cert.validate()?;
    if cert.kind != CertKind::Sub {
        return Err(Error::Inapplicable {
            what: "transfer",
            why: "only subregularity certificates transfer under density bounds".into(),
        });
    }
    let bound = DensityBound::new(bound.p, bound.norm_value)?;
    RegularityCertificate::sub(
        cert.m / bound.p,
        bound.norm_value * cert.constant.powf(1.0 / bound.p),
        cert.delta0,
        cert.k,
    )
}

/// Certificate for the product measure under `Σ α_i ρ_i`, all factors
/// certified for `ρ_i^{1/k}`.
pub fn product_certificate(
    certs: &[RegularityCertificate],
    weights: &[f64],
    k: f64,
) -> Result<RegularityCertificate> {
    let Some(first) = certs.first() else {
        return Err(domain("product_certificate", "empty factor list"));
    };
    if certs.len() != weights.len() {
        return Err(domain(
            "product_certificate",
            format!("{} certificates but {} weights", certs.len(), weights.len()),
        ));
    }
    // canonical factor order makes the result exactly permutation-invariant
    let mut factors: Vec<(&RegularityCertificate, f64)> = certs.iter().zip(weights.iter().copied()).collect();
    factors.sort_by(|(a, wa), (b, wb)| {
        a.m.total_cmp(&b.m)
            .then(a.constant.total_cmp(&b.constant))
            .then(a.delta0.total_cmp(&b.delta0))
            .then(wa.total_cmp(wb))
    });
    let mut sum_ratio = 0.0;
    let mut ln_gamma_ratio = 0.0;
    let mut scaled = 1.0;
    let mut delta0 = f64::INFINITY;
    for (cert, alpha) in factors {
        cert.validate()?;
        if cert.kind != first.kind {
            return Err(Error::Certificate("mixed sub/super factors".into()));
        }
        if cert.m <= 0.0 {
            return Err(Error::Certificate("product factors need m > 0".into()));
        }
        if cert.k != k {
            return Err(Error::Certificate(format!(
                "factor exponent {} differs from product exponent {k}",
                cert.k
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(domain("product_certificate", format!("weight {alpha} must be > 0")));
        }
        let ratio = cert.m / k;
        sum_ratio += ratio;
        ln_gamma_ratio += ln_gamma(1.0 + ratio);
        scaled *= cert.constant / alpha.powf(ratio);
        delta0 = delta0.min(alpha.powf(1.0 / k) * cert.delta0);
    }
    ln_gamma_ratio -= ln_gamma(1.0 + sum_ratio);
    RegularityCertificate::new(first.kind, sum_ratio * k, ln_gamma_ratio.exp() * scaled, delta0, k)
}

/// Monte Carlo ball-mass probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallProbe<C> {
    pub center: C,
    pub radius: f64,
    pub estimate: f64,
    /// One standard error.
    pub ci_halfwidth: f64,
    pub samples: usize,
}

/// Pass/fail slack in standard errors.
pub const SIGMAS: f64 = 3.0;

/// Checks a certificate by Monte Carlo ball probes.
///
/// `sampler` draws from the certified measure and `distortion(p, c)` is ρ
/// between a sampled point and a probe center (orientation is the caller's
/// responsibility: sample in X / center in Y for sub, the reverse for super).
pub fn verify_certificate<P, C, S, D>(
    cert: &RegularityCertificate,
    sampler: S,
    distortion: D,
    centers: &[C],
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<(BallProbe<C>, bool)>>
where
    C: Clone + Send + Sync,
    S: Fn(&mut ChaCha8Rng) -> P + Sync,
    D: Fn(&P, &C) -> f64 + Sync,
{
    cert.validate()?;
    if samples == 0 {
        return Err(domain("verify_certificate", "samples must be positive"));
    }
    for &r in radii {
        if !(r > 0.0 && r <= cert.delta0) {
            return Err(domain(
                "verify_certificate",
                format!("radius {r} outside (0, delta0 = {}]", cert.delta0),
            ));
        }
    }
    let jobs: Vec<(usize, &C, f64)> = centers
        .iter()
        .flat_map(|c| radii.iter().map(move |&r| (c, r)))
        .enumerate()
        .map(|(i, (c, r))| (i, c, r))
        .collect();
    let probes = jobs
        .into_par_iter()
        .map(|(i, center, radius)| {
            let threshold = radius.powf(cert.k);
            let (estimate, sigma) = stats::mc_fraction(seed, 0xBA11 + i as u64, samples, |rng| {
                distortion(&sampler(rng), center) < threshold
            });
            let bound = cert.ball_bound(radius);
            let pass = match cert.kind {
                CertKind::Sub => estimate - SIGMAS * sigma <= bound,
                CertKind::Super => estimate + SIGMAS * sigma >= bound,
            };
            let probe = BallProbe {
                center: center.clone(),
                radius,
                estimate,
                ci_halfwidth: sigma,
                samples,
            };
            (probe, pass)
        })
        .collect();
    Ok(probes)
}

pub(crate) mod inf_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "+inf" | "infinity" | "Infinity") => {
                Ok(f64::INFINITY)
            }
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {t:?}"))),
        }
    }
}
