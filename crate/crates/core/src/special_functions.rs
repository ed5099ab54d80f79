//! Real special functions: gamma family, incomplete beta, modified Bessel
//! functions of the first kind, sinc and sphere/ball measures.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// Natural log of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (PI * x).sin().abs();
        return PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for real x that is not a nonpositive integer.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    ln_gamma(x).exp()
}

/// ln B(a, b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Complete and incomplete gamma values at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFamily {
    /// Γ(a)
    pub complete: f64,
    /// γ(a, s)
    pub lower: f64,
    /// Γ(a, s)
    pub upper: f64,
}

/// Returns (Γ(a), γ(a,s), Γ(a,s)); `s = +∞` is allowed.
pub fn gamma_family(a: f64, s: f64) -> Result<GammaFamily> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("gamma_family", format!("a = {a} must be positive")));
    }
    if !(s >= 0.0) {
        return Err(domain("gamma_family", format!("s = {s} must be nonnegative")));
    }
    let complete = gamma(a);
    let (p, q) = regularized_gamma_pq(a, s);
    Ok(GammaFamily {
        complete,
        lower: p * complete,
        upper: q * complete,
    })
}

/// Regularized (P, Q) with P + Q = 1.
pub fn regularized_gamma_pq(a: f64, s: f64) -> (f64, f64) {
    if s == 0.0 {
        return (0.0, 1.0);
    }
    if s.is_infinite() {
        return (1.0, 0.0);
    }
    let log_front = a * s.ln() - s - ln_gamma(a);
    if s < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= s / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        let p = (sum.ln() + log_front).exp();
        (p, 1.0 - p)
    } else {
        // Lentz continued fraction for Q
        let mut b = s + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        let q = (h.ln() + log_front).exp();
        (1.0 - q, q)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// I_{a,b}(s) = B_{a,b}(s) / B_{a,b}(1).
pub fn regularized_beta(a: f64, b: f64, s: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain("regularized_beta", format!("a = {a}, b = {b} must be positive")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(domain("regularized_beta", format!("s = {s} outside [0, 1]")));
    }
    Ok(reg_beta_unchecked(a, b, s))
}

fn reg_beta_unchecked(a: f64, b: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    if s == 1.0 {
        return 1.0;
    }
    let log_front = a * s.ln() + b * (-s).ln_1p() - ln_beta(a, b);
    if s < (a + 1.0) / (a + b + 2.0) {
        (log_front.exp() * beta_cf(a, b, s) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - log_front.exp() * beta_cf(b, a, 1.0 - s) / b).clamp(0.0, 1.0)
    }
}

/// Unregularized incomplete beta B_{a,b}(s).
pub fn incomplete_beta(a: f64, b: f64, s: f64) -> Result<f64> {
    Ok(regularized_beta(a, b, s)? * ln_beta(a, b).exp())
}

/// Solves I_{a,b}(s) = u for s. Accurate in relative terms for tiny u.
pub fn inverse_regularized_beta(a: f64, b: f64, u: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain(
            "inverse_regularized_beta",
            format!("a = {a}, b = {b} must be positive"),
        ));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("inverse_regularized_beta", format!("u = {u} outside [0, 1]")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(1.0);
    }
    let lnb = ln_beta(a, b);
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    // small-s power law: I(s) ≈ s^a / (a B(a,b))
    let mut s = ((u.ln() + a.ln() + lnb) / a).exp();
    if !(s > 0.0 && s < 1.0) {
        s = 0.5;
    }
    for _ in 0..200 {
        let f = reg_beta_unchecked(a, b, s) - u;
        if f == 0.0 {
            return Ok(s);
        }
        if f < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let log_pdf = (a - 1.0) * s.ln() + (b - 1.0) * (-s).ln_1p() - lnb;
        let newton = s - f / log_pdf.exp();
        let next = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else if lo == 0.0 {
            hi * 1e-3
        } else {
            0.5 * (lo + hi)
        };
        if (next - s).abs() <= 1e-15 * s.min(1.0 - s).max(TINY) {
            return Ok(next);
        }
        s = next;
    }
    Ok(s)
}

fn bessel_series_ln(alpha: f64, kappa: f64) -> f64 {
    let x = 0.25 * kappa * kappa;
    let ln_t0 = alpha * (0.5 * kappa).ln() - ln_gamma(alpha + 1.0);
    // sum terms relative to t0, rescaling when they grow large
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut ln_scale = 0.0_f64;
    for j in 0..MAX_ITER {
        let j = j as f64;
        term *= x / ((j + 1.0) * (j + 1.0 + alpha));
        sum += term;
        if sum > 1e250 {
            ln_scale += sum.ln();
            term /= sum;
            sum = 1.0;
        }
        if term < sum * EPS && j + 1.0 > 0.5 * kappa {
            break;
        }
    }
    ln_t0 + ln_scale + sum.ln()
}

fn bessel_hankel_ln(alpha: f64, kappa: f64) -> f64 {
    let mu = 4.0 * alpha * alpha;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut prev = f64::INFINITY;
    for j in 1..200 {
        let odd = (2 * j - 1) as f64;
        term *= -(mu - odd * odd) / (j as f64 * 8.0 * kappa);
        if term == 0.0 {
            break;
        }
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if prev < EPS * sum.abs() {
            break;
        }
    }
    kappa - 0.5 * (2.0 * PI * kappa).ln() + sum.ln()
}

/// ln I_α(κ) for α ≥ 0, κ > 0.
pub fn ln_bessel_i(alpha: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return if alpha == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if kappa <= 20.0 || alpha * alpha > 0.5 * kappa {
        bessel_series_ln(alpha, kappa)
    } else {
        bessel_hankel_ln(alpha, kappa)
    }
}

/// Modified Bessel function of the first kind I_α(κ), α ≥ 0, κ ≥ 0.
pub fn bessel_i(alpha: f64, kappa: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(domain("bessel_i", format!("order {alpha} must be nonnegative")));
    }
    if !(kappa >= 0.0) {
        return Err(domain("bessel_i", format!("argument {kappa} must be nonnegative")));
    }
    Ok(ln_bessel_i(alpha, kappa).exp())
}

/// sin(πx)/(πx) with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Surface area a^{(d-1)}(r) of the sphere S^{d-1}(r) ⊂ ℝ^d.
pub fn sphere_area(d: u32, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(domain("sphere_area", format!("d = {d} must be at least 2")));
    }
    check_radius("sphere_area", r)?;
    let h = 0.5 * d as f64;
    Ok(2.0 * (h * PI.ln() - ln_gamma(h)).exp() * r.powi(d as i32 - 1))
}

/// Volume v^{(d)}(r) of the d-dimensional ball of radius r.
pub fn ball_volume(d: u32, r: f64) -> Result<f64> {
    if d < 1 {
        return Err(domain("ball_volume", "d must be at least 1"));
    }
    check_radius("ball_volume", r)?;
    let h = 0.5 * d as f64;
    Ok((h * PI.ln() - ln_gamma(1.0 + h)).exp() * r.powi(d as i32))
}

/// (a^{(d-1)}(r), v^{(d)}(r)).
pub fn sphere_geometry(d: u32, r: f64) -> Result<(f64, f64)> {
    Ok((sphere_area(d, r)?, ball_volume(d, r)?))
}

fn check_radius(op: &'static str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("radius {r} must be positive and finite")))
    }
}
