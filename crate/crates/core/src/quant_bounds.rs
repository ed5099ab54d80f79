//! Analytic bounds on the n-th quantization error, quantization dimensions
//! and quantization coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::regularity::{CertKind, RegularityCertificate};
use crate::special_functions::ln_gamma;

/// Inputs shared by the L_n and U_n formulas.
///
/// `n` is real-valued so that asymptotic sequences can reach codebook sizes
/// far beyond the integer range; the formulas only need `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantQuery {
    pub n: f64,
    pub sub: Option<RegularityCertificate>,
    pub sup: Option<RegularityCertificate>,
    pub p: f64,
    /// Σ_p(X) = ‖dμ_X/dμ‖_{p/(p-1)}.
    pub sigma_p: f64,
    /// sup ρ^{1/k}; may be +∞.
    #[serde(with = "crate::regularity::inf_float")]
    pub beta: f64,
    /// Ω_{k/m}(X) ∈ (0, 1].
    pub omega: Option<f64>,
}

impl QuantQuery {
    pub fn new(n: f64) -> Self {
        Self {
            n,
            sub: None,
            sup: None,
            p: 1.0,
            sigma_p: 1.0,
            beta: f64::INFINITY,
            omega: None,
        }
    }

    pub fn with_sub(mut self, cert: RegularityCertificate) -> Self {
        self.sub = Some(cert);
        self
    }

    pub fn with_sup(mut self, cert: RegularityCertificate) -> Self {
        self.sup = Some(cert);
        self
    }

    pub fn with_density(mut self, p: f64, sigma_p: f64) -> Self {
        self.p = p;
        self.sigma_p = sigma_p;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = Some(omega);
        self
    }

    fn check_n(&self, op: &'static str) -> Result<()> {
        if self.n >= 1.0 && self.n.is_finite() {
            Ok(())
        } else {
            Err(domain(op, format!("n = {} must be ≥ 1", self.n)))
        }
    }

    fn check_density(&self, op: &'static str) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(domain(op, format!("p = {} must be ≥ 1", self.p)));
        }
        if !(self.sigma_p > 0.0) || !self.sigma_p.is_finite() {
            return Err(domain(op, format!("Σ_p = {} must be > 0", self.sigma_p)));
        }
        Ok(())
    }
}

fn cert_of_kind(
    cert: Option<RegularityCertificate>,
    kind: CertKind,
    op: &'static str,
) -> Result<RegularityCertificate> {
    let cert = cert.ok_or_else(|| Error::Inapplicable {
        what: op,
        why: format!("no {kind:?} certificate supplied").to_lowercase(),
    })?;
    cert.validate()?;
    if cert.kind != kind || cert.m <= 0.0 {
        return Err(Error::Certificate(format!(
            "{op} needs a {kind:?} certificate with m > 0"
        )));
    }
    Ok(cert)
}

/// `L_n = min{c^{-k/m} Σ_p^{-pk/m} n^{-pk/m}, δ0^k} · m/(m+pk)`.
pub fn lower_bound_ln(q: &QuantQuery) -> Result<f64> {
    q.check_n("lower_bound_ln")?;
    q.check_density("lower_bound_ln")?;
    let cert = cert_of_kind(q.sub, CertKind::Sub, "lower_bound_ln")?;
    let (m, k) = (cert.m, cert.k);
    let pk = q.p * k;
    let ln_main = -(k / m) * cert.constant.ln() - (pk / m) * q.sigma_p.ln() - (pk / m) * q.n.ln();
    let ln_cap = k * cert.delta0.ln();
    Ok(ln_main.min(ln_cap).exp() * m / (m + pk))
}

/// `U_n = Γ(1+k/m)(bn)^{-k/m}`, plus `(β^k − δ0^k) e^{−bnδ0^m}` when β > δ0.
pub fn upper_bound_un(q: &QuantQuery) -> Result<f64> {
    q.check_n("upper_bound_un")?;
    let cert = cert_of_kind(q.sup, CertKind::Super, "upper_bound_un")?;
    let (m, k, b, d0) = (cert.m, cert.k, cert.constant, cert.delta0);
    if !(q.beta > 0.0) {
        return Err(domain("upper_bound_un", format!("β = {} must be > 0", q.beta)));
    }
    if d0.is_finite() && q.beta.is_infinite() {
        return Err(Error::Inapplicable {
            what: "upper_bound_un",
            why: "a finite superregularity radius requires bounded distortion (β < ∞)".into(),
        });
    }
    let r = k / m;
    let main = (ln_gamma(1.0 + r) - r * (b * q.n).ln()).exp();
    if q.beta <= d0 {
        return Ok(main);
    }
    Ok(main + (q.beta.powf(k) - d0.powf(k)) * (-b * q.n * d0.powf(m)).exp())
}

/// One-sided bounds on the quantization dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionBounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Set when the two sides meet.
    pub exact: Option<f64>,
}

/// `D̲_k ≥ m_sub/p` (or `≥ m_sub` with finite entropy), `D̄_k ≤ m_sup`.
pub fn quant_dimension_bounds(
    sub: Option<&RegularityCertificate>,
    sup: Option<&RegularityCertificate>,
    p: f64,
    entropy_finite: bool,
) -> Result<DimensionBounds> {
    if sub.is_none() && sup.is_none() {
        return Err(Error::Inapplicable {
            what: "quant_dimension_bounds",
            why: "at least one certificate is required".into(),
        });
    }
    if !(p >= 1.0) {
        return Err(domain("quant_dimension_bounds", format!("p = {p} must be ≥ 1")));
    }
    let lower = match sub {
        Some(c) => {
            cert_of_kind(Some(*c), CertKind::Sub, "quant_dimension_bounds")?;
            Some(if entropy_finite { c.m } else { c.m / p })
        }
        None => None,
    };
    let upper = match sup {
        Some(c) => Some(cert_of_kind(Some(*c), CertKind::Super, "quant_dimension_bounds")?.m),
        None => None,
    };
    let exact = match (lower, upper) {
        (Some(l), Some(u)) if (l - u).abs() <= 1e-12 * u.abs().max(1.0) => Some(u),
        _ => None,
    };
    Ok(DimensionBounds { lower, upper, exact })
}

/// Bounds on the lower/upper quantization coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientBounds {
    /// Lower bound on C̲_k (needs D_k = m_sub/p).
    pub lower: Option<f64>,
    /// Upper bound on C̄_k (needs D_k = m_sup).
    pub upper: Option<f64>,
    /// Ω_{k/m} times the upper bound (needs Ω and m_sup > k).
    pub improved_upper: Option<f64>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Coefficient bounds at a given quantization dimension `d_k`.
pub fn coefficient_bounds(q: &QuantQuery, d_k: f64) -> Result<CoefficientBounds> {
    q.check_density("coefficient_bounds")?;
    let mut out = CoefficientBounds {
        lower: None,
        upper: None,
        improved_upper: None,
    };
    if let Some(c) = q.sub {
        let c = cert_of_kind(Some(c), CertKind::Sub, "coefficient_bounds")?;
        if same(d_k, c.m / q.p) {
            let pk = q.p * c.k;
            let ln = -(c.k / c.m) * c.constant.ln() - (pk / c.m) * q.sigma_p.ln();
            out.lower = Some(ln.exp() * c.m / (c.m + pk));
        }
    }
    if let Some(b) = q.sup {
        let b = cert_of_kind(Some(b), CertKind::Super, "coefficient_bounds")?;
        if same(d_k, b.m) {
            let r = b.k / b.m;
            let upper = (ln_gamma(1.0 + r) - r * b.constant.ln()).exp();
            out.upper = Some(upper);
            if let Some(omega) = q.omega {
                if !(omega > 0.0 && omega <= 1.0) {
                    return Err(domain("coefficient_bounds", format!("Ω = {omega} must lie in (0, 1]")));
                }
                if b.m > b.k {
                    out.improved_upper = Some(omega * upper);
                }
            }
        }
    }
    if out.lower.is_none() && out.upper.is_none() {
        return Err(Error::Inapplicable {
            what: "coefficient_bounds",
            why: format!("D_k = {d_k} matches neither m_sub/p nor m_sup"),
        });
    }
    Ok(out)
}

/// Sequence of (n, v) pairs: bounds or estimates indexed by codebook size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSequence {
    entries: Vec<(f64, f64)>,
}

impl ErrorSequence {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(domain("ErrorSequence", "empty sequence"));
        }
        for w in entries.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(domain("ErrorSequence", "n must be strictly increasing"));
            }
        }
        for &(n, v) in &entries {
            if !(n >= 1.0) || !(v > 0.0) {
                return Err(domain("ErrorSequence", format!("invalid entry (n = {n}, v = {v})")));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_fn(ns: impl IntoIterator<Item = f64>, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let entries = ns.into_iter().map(|n| Ok((n, f(n)?))).collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

/// Options for [`dimension_from_sequence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionOptions {
    /// Fraction of trailing entries used.
    pub tail_fraction: f64,
    /// Ratios above this value are reported as +∞.
    pub cap: f64,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        Self {
            tail_fraction: 0.5,
            cap: 1e3,
        }
    }
}

/// (min, max) of `k log n / log(1/v)` over the tail of the sequence.
pub fn dimension_from_sequence(seq: &ErrorSequence, k: f64, opts: DimensionOptions) -> Result<(f64, f64)> {
    if !(k > 0.0) {
        return Err(domain("dimension_from_sequence", "k must be positive"));
    }
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0) {
        return Err(domain("dimension_from_sequence", "tail fraction must lie in (0, 1]"));
    }
    let e = seq.entries();
    let take = ((e.len() as f64 * opts.tail_fraction).ceil() as usize).clamp(1, e.len());
    let tail = &e[e.len() - take..];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(n, v) in tail {
        if v >= 1.0 {
            return Err(domain(
                "dimension_from_sequence",
                format!("v = {v} ≥ 1 at n = {n} leaves log(1/v) ≤ 0"),
            ));
        }
        let mut ratio = k * n.ln() / (-v.ln());
        if ratio > opts.cap {
            ratio = f64::INFINITY;
        }
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}
