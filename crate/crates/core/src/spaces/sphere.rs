//! The hypersphere S^{d-1}(r) ⊂ ℝ^d with normalized surface measure and
//! ρ(x, y) = ‖x − y‖₂².

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::f64::consts::PI;

use super::{normalize_to, sq_dist, SpaceModel};
use crate::error::{domain, Error, Result};
use crate::quant_bounds::{upper_bound_un, QuantQuery};
use crate::rd_bounds::{rd_lower_explicit, RdQuery};
use crate::regularity::RegularityCertificate;
use crate::special_functions::{
    ball_volume, inverse_regularized_beta, ln_gamma, regularized_beta, sinc, sphere_area,
};

/// S^{d-1}(r); codewords lie on the sphere unless `ambient` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypersphere {
    pub d: u32,
    pub r: f64,
    pub ambient: bool,
}

impl Hypersphere {
    pub fn new(d: u32, r: f64) -> Result<Self> {
        check(d, r)?;
        Ok(Self { d, r, ambient: false })
    }

    pub fn with_ambient_codewords(mut self, ambient: bool) -> Self {
        self.ambient = ambient;
        self
    }

    /// Sub and (on-sphere only) super certificates at radius δ0.
    pub fn certificates(&self, delta0: f64) -> Result<(RegularityCertificate, Option<RegularityCertificate>)> {
        sphere_certificates(self.d, self.r, delta0, self.ambient)
    }

    /// Uniform point on the sphere.
    pub fn sample_uniform(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let g: Vec<f64> = (0..self.d).map(|_| StandardNormal.sample(rng)).collect();
            if g.iter().any(|x: &f64| *x != 0.0) {
                return normalize_to(&g, self.r);
            }
        }
    }

    /// Equally spaced circle codebook r(cos 2πj/n, sin 2πj/n).
    pub fn circle_codebook(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        if self.d != 2 || n == 0 {
            return Err(domain("circle_codebook", "requires d = 2 and n ≥ 1"));
        }
        Ok((1..=n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                vec![self.r * t.cos(), self.r * t.sin()]
            })
            .collect())
    }
}

fn check(d: u32, r: f64) -> Result<()> {
    if d < 2 {
        return Err(domain("sphere", format!("d = {d} must be at least 2")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain("sphere", format!("r = {r} must be positive")));
    }
    Ok(())
}

impl SpaceModel for Hypersphere {
    type Point = Vec<f64>;

    fn id(&self) -> String {
        format!("sphere-d{}-r{}", self.d, self.r)
    }

    fn sample_reference(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.sample_uniform(rng)
    }

    fn distortion(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        sq_dist(x, y)
    }

    fn contains(&self, y: &Vec<f64>) -> bool {
        if y.len() != self.d as usize {
            return false;
        }
        if self.ambient {
            return y.iter().all(|v| v.is_finite());
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        (norm - self.r).abs() <= 1e-12 * self.r.max(1.0)
    }

    fn embedding_dim(&self) -> usize {
        self.d as usize
    }

    fn embed(&self, x: &Vec<f64>) -> Vec<f64> {
        x.clone()
    }

    fn project(&self, v: &[f64]) -> Vec<f64> {
        if self.ambient {
            v.to_vec()
        } else {
            normalize_to(v, self.r)
        }
    }

    fn structured_codebooks(&self, n: usize) -> Vec<Vec<Vec<f64>>> {
        self.circle_codebook(n).map(|c| vec![c]).unwrap_or_default()
    }
}

/// G(α) = a^{(d-1)}(1)/2 · I_{(d-1)/2, 1/2}(α) / α^{(d-1)/2} on (0, 1].
pub fn g_function(d: u32, alpha: f64) -> Result<f64> {
    check(d, 1.0)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain("g_function", format!("α = {alpha} must lie in (0, 1]")));
    }
    let h = (d - 1) as f64 / 2.0;
    let i = regularized_beta(h, 0.5, alpha)?;
    Ok(sphere_area(d, 1.0)? / 2.0 * i / alpha.powf(h))
}

/// v^{(d-1)}(1) / a^{(d-1)}(r), the common limit of c_{δ0} and b_{δ0} as δ0 → 0.
pub fn limit_constant(d: u32, r: f64) -> Result<f64> {
    check(d, r)?;
    Ok(ball_volume(d - 1, 1.0)? / sphere_area(d, r)?)
}

/// Certificates at δ0: the sub certificate holds for codewords anywhere in
/// ℝ^d (δ0 ≤ r) or on the sphere (δ0 ≤ √2 r); the super certificate only for
/// centers on the sphere.
pub fn sphere_certificates(
    d: u32,
    r: f64,
    delta0: f64,
    ambient: bool,
) -> Result<(RegularityCertificate, Option<RegularityCertificate>)> {
    check(d, r)?;
    let max = if ambient { r } else { 2f64.sqrt() * r };
    if !(delta0 > 0.0 && delta0 <= max * (1.0 + 1e-15)) {
        return Err(domain(
            "sphere_certificates",
            format!("δ0 = {delta0} must lie in (0, {max}]"),
        ));
    }
    let m = (d - 1) as f64;
    // beyond δ0 = r every cap is at most a hemisphere while δ^{d-1} ≥ r^{d-1}
    let alpha = (delta0 * delta0 / (r * r)).min(1.0);
    let c = g_function(d, alpha)? / sphere_area(d, r)?;
    let sub = RegularityCertificate::sub(m, c, delta0, 2.0)?;
    if ambient {
        return Ok((sub, None));
    }
    let b = limit_constant(d, r)? * (1.0 - delta0 * delta0 / (4.0 * r * r)).powf(m / 2.0);
    Ok((sub, Some(RegularityCertificate::sup(m, b, delta0, 2.0)?)))
}

/// Limiting sub/super certificates with constant v^{(d-1)}(1)/a^{(d-1)}(r).
///
/// These are not valid at any positive radius; they only feed coefficient
/// bounds, which depend on (m, constant, k) alone. δ0 is set to the smallest
/// positive float.
pub fn limit_certificates(d: u32, r: f64) -> Result<(RegularityCertificate, RegularityCertificate)> {
    let c0 = limit_constant(d, r)?;
    let m = (d - 1) as f64;
    Ok((
        RegularityCertificate::sub(m, c0, f64::MIN_POSITIVE, 2.0)?,
        RegularityCertificate::sup(m, c0, f64::MIN_POSITIVE, 2.0)?,
    ))
}

/// Normalized mass of the ball of radius δ around a sphere point (exact), or
/// the upper bound over centers anywhere in ℝ^d when `on_sphere_center` is false.
pub fn sphere_cap_measure(d: u32, r: f64, delta: f64, on_sphere_center: bool) -> Result<f64> {
    check(d, r)?;
    let h = (d - 1) as f64 / 2.0;
    let t = delta * delta / (r * r);
    if on_sphere_center {
        if !(delta > 0.0 && delta <= 2f64.sqrt() * r * (1.0 + 1e-15)) {
            return Err(domain("sphere_cap_measure", format!("δ = {delta} must lie in (0, √2 r]")));
        }
        let x = (t * (1.0 - t / 4.0)).min(1.0);
        Ok(0.5 * regularized_beta(h, 0.5, x)?)
    } else {
        if !(delta > 0.0 && delta <= r * (1.0 + 1e-15)) {
            return Err(domain("sphere_cap_measure", format!("δ = {delta} must lie in (0, r]")));
        }
        Ok(0.5 * regularized_beta(h, 0.5, t.min(1.0))?)
    }
}

/// k_d = (2√π Γ((d+1)/2) / Γ(d/2))^{2/(d-1)}.
pub fn k_d(d: u32) -> Result<f64> {
    check(d, 1.0)?;
    let df = d as f64;
    let ln = 2f64.ln() + 0.5 * PI.ln() + ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0);
    Ok((ln * 2.0 / (df - 1.0)).exp())
}

fn check_density(op: &'static str, p: f64, sigma_p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(op, format!("p = {p} must be ≥ 1")));
    }
    if !(sigma_p > 0.0 && sigma_p.is_finite()) {
        return Err(domain(op, format!("Σ_p = {sigma_p} must be positive")));
    }
    Ok(())
}

/// L_n = (d-1)/(d-1+2p) r² I^{-1}_{(d-1)/2,1/2}(2/(n^p Σ_p^p)) for n ≥ 2^{1/p}/Σ_p.
pub fn sphere_lower_ln(d: u32, r: f64, n: f64, p: f64, sigma_p: f64) -> Result<f64> {
    check(d, r)?;
    check_density("sphere_lower_ln", p, sigma_p)?;
    let n0 = 2f64.powf(1.0 / p) / sigma_p;
    if !(n >= n0) {
        return Err(Error::BelowThreshold { n, threshold: n0 });
    }
    let u = (2f64.ln() - p * n.ln() - p * sigma_p.ln()).exp().min(1.0);
    let m = (d - 1) as f64;
    let x = inverse_regularized_beta(m / 2.0, 0.5, u)?;
    Ok(m / (m + 2.0 * p) * r * r * x)
}

/// U_n with δ_n = √2 r n^{-α/(d-1)}, α ∈ (0, 1).
pub fn sphere_upper_un(d: u32, r: f64, n: f64, alpha: f64) -> Result<f64> {
    check(d, r)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("sphere_upper_un", format!("α = {alpha} must lie in (0, 1)")));
    }
    if !(n >= 1.0) {
        return Err(domain("sphere_upper_un", format!("n = {n} must be ≥ 1")));
    }
    let m = (d - 1) as f64;
    let delta_n = 2f64.sqrt() * r * n.powf(-alpha / m);
    let (_, sup) = sphere_certificates(d, r, delta_n, false)?;
    let sup = sup.ok_or_else(|| Error::Certificate("missing sphere super certificate".into()))?;
    upper_bound_un(&QuantQuery::new(n).with_sup(sup).with_beta(2.0 * r))
}

/// (L_n, U_n) on the sphere.
pub fn sphere_bounds(d: u32, r: f64, n: f64, p: f64, sigma_p: f64, alpha: f64) -> Result<(f64, f64)> {
    Ok((sphere_lower_ln(d, r, n, p, sigma_p)?, sphere_upper_un(d, r, n, alpha)?))
}

/// Limits of the scaled bounds: (lower bound on C̲_2, upper bound on C̄_2).
pub fn sphere_coefficient_bounds(d: u32, r: f64, p: f64, sigma_p: f64) -> Result<(f64, f64)> {
    check(d, r)?;
    check_density("sphere_coefficient_bounds", p, sigma_p)?;
    let m = (d - 1) as f64;
    let kd = k_d(d)?;
    let lower = m / (m + 2.0 * p) * r * r * sigma_p.powf(-2.0 * p / m) * kd;
    let upper = (ln_gamma((m + 2.0) / m)).exp() * r * r * kd;
    Ok((lower, upper))
}

/// Circle closed forms: the equally spaced n-point error and C_2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleForms {
    /// 2r²(1 − sinc(1/n)) ≥ V_n.
    pub upper: f64,
    /// r²π²/3.
    pub coefficient: f64,
}

/// Closed forms for the uniform distribution on the circle of radius r.
pub fn circle_closed_forms(r: f64, n: u64) -> Result<CircleForms> {
    check(2, r)?;
    if n == 0 {
        return Err(domain("circle_closed_forms", "n must be ≥ 1"));
    }
    Ok(CircleForms {
        upper: 2.0 * r * r * one_minus_sinc(1.0 / n as f64),
        coefficient: r * r * PI * PI / 3.0,
    })
}

/// 1 − sinc(x) without cancellation for small x.
fn one_minus_sinc(x: f64) -> f64 {
    let y = PI * x;
    if y.abs() > 0.1 {
        return 1.0 - sinc(x);
    }
    let y2 = y * y;
    let mut term = y2 / 6.0;
    let mut sum = term;
    for k in 2..10 {
        term *= -y2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        sum += term;
    }
    sum
}

/// R^L(D) with δ_D = min{D^α, r}, α ∈ (0, 1/2), for entropy h_μ(X).
pub fn sphere_rd_lower(d: u32, r: f64, entropy: f64, alpha: f64, distortion: f64, ambient: bool) -> Result<f64> {
    check(d, r)?;
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(domain("sphere_rd_lower", format!("α = {alpha} must lie in (0, 1/2)")));
    }
    if !(distortion > 0.0) {
        return Err(domain("sphere_rd_lower", "D must be positive"));
    }
    let delta = distortion.powf(alpha).min(r);
    let (sub, _) = sphere_certificates(d, r, delta, ambient)?;
    rd_lower_explicit(&RdQuery {
        entropy,
        cert: sub,
        d: distortion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quant_bounds::coefficient_bounds;
    use crate::rd_bounds::f_shannon;
    use crate::regularity::verify_certificate;
    use crate::special_functions::gamma;
    use crate::stats::{mc_fraction, mc_moments, stream};
    use crate::testutil::rel_err;

    #[test]
    fn limit_constants() {
        assert!(rel_err(limit_constant(2, 1.0).unwrap(), 1.0 / PI) < 1e-14);
        for d in 2..8 {
            let g0 = g_function(d, 1e-10).unwrap();
            assert!(rel_err(g0, ball_volume(d - 1, 1.0).unwrap()) < 1e-8, "d={d}");
            assert!(g_function(d, 1.0).unwrap() > g0);
        }
        let (sub, sup) = sphere_certificates(4, 2.0, 1e-6, false).unwrap();
        let c0 = limit_constant(4, 2.0).unwrap();
        assert!(rel_err(sub.constant, c0) < 1e-9);
        assert!(rel_err(sup.unwrap().constant, c0) < 1e-9);
    }

    #[test]
    fn g_is_increasing() {
        for d in [2, 3, 5, 9] {
            let mut last = 0.0;
            for i in 1..=100 {
                let g = g_function(d, i as f64 / 100.0).unwrap();
                assert!(g > last);
                last = g;
            }
        }
    }

    #[test]
    fn super_constant_at_largest_radius() {
        let r = 1.7;
        let (_, sup) = sphere_certificates(3, r, 2f64.sqrt() * r, false).unwrap();
        let want = 0.5 * ball_volume(2, 1.0).unwrap() / sphere_area(3, r).unwrap();
        assert!(rel_err(sup.unwrap().constant, want) < 1e-13);
        assert!(sphere_certificates(3, r, 1.5 * r, false).is_err());
        assert!(sphere_certificates(3, r, 1.1 * r, true).is_err());
        assert!(sphere_certificates(3, r, r, true).unwrap().1.is_none());
    }

    #[test]
    fn cap_examples() {
        assert!(rel_err(sphere_cap_measure(2, 1.0, 2f64.sqrt(), true).unwrap(), 0.5) < 1e-14);
        // d = 2: arc of half-angle θ with chord δ = 2 sin(θ/2)
        for &delta in &[0.1, 0.7, 1.3] {
            let theta = 2.0 * (delta / 2.0f64).asin();
            assert!(rel_err(sphere_cap_measure(2, 1.0, delta, true).unwrap(), theta / PI) < 1e-12);
        }
        // d = 3: Archimedes, cap area 2πr·height with height δ²/(2r)
        for &(r, delta) in &[(1.0, 0.3), (2.0, 1.5), (0.5, 0.6)] {
            let want = (delta * delta / (2.0 * r)) / (2.0 * r);
            assert!(rel_err(sphere_cap_measure(3, r, delta, true).unwrap(), want) < 1e-12);
        }
        for d in 2..7 {
            let small = 1e-5f64;
            let want = limit_constant(d, 1.0).unwrap() * small.powi(d as i32 - 1);
            assert!(rel_err(sphere_cap_measure(d, 1.0, small, true).unwrap(), want) < 1e-6);
        }
    }

    #[test]
    fn cap_matches_monte_carlo() {
        let s = Hypersphere::new(3, 1.0).unwrap();
        let c = vec![1.0, 0.0, 0.0];
        let (p, sigma) = mc_fraction(5, 1, 1_000_000, |rng| sq_dist(&s.sample_uniform(rng), &c) < 0.09);
        let exact = sphere_cap_measure(3, 1.0, 0.3, true).unwrap();
        assert!((p - exact).abs() <= 3.0 * sigma, "{p} ± {sigma} vs {exact}");
    }

    #[test]
    fn certificates_hold_empirically() {
        let s = Hypersphere::new(3, 1.5).unwrap();
        let (sub, sup) = s.certificates(1.2).unwrap();
        let mut rng = stream(3, 0, 0);
        let on: Vec<Vec<f64>> = (0..3).map(|_| s.sample_uniform(&mut rng)).collect();
        let radii = [0.1, 0.6, 1.2];
        let run = |cert, centers: &[Vec<f64>]| {
            verify_certificate(cert, |r| s.sample_uniform(r), |x: &Vec<f64>, y| sq_dist(x, y), centers, &radii, 200_000, 4)
                .unwrap()
                .into_iter()
                .all(|(_, ok)| ok)
        };
        assert!(run(&sub, &on));
        assert!(run(&sup.unwrap(), &on));
        let (sub_amb, _) = sphere_certificates(3, 1.5, 1.5, true).unwrap();
        let inside = vec![vec![0.0, 0.0, 1.2], vec![0.9, 0.0, 0.0]];
        let radii = [0.3, 1.0, 1.5];
        assert!(verify_certificate(&sub_amb, |r| s.sample_uniform(r), |x: &Vec<f64>, y| sq_dist(x, y), &inside, &radii, 200_000, 5)
            .unwrap()
            .into_iter()
            .all(|(_, ok)| ok));
    }

    #[test]
    fn k_d_values() {
        assert!(rel_err(k_d(2).unwrap(), PI * PI) < 1e-13);
        assert!(rel_err(k_d(3).unwrap(), 4.0) < 1e-13);
    }

    #[test]
    fn bounds_threshold_and_order() {
        assert!(matches!(sphere_lower_ln(3, 1.0, 1.5, 1.0, 1.0), Err(Error::BelowThreshold { .. })));
        for e in 1..=14 {
            let n = 2f64.powi(e);
            let (l, u) = sphere_bounds(3, 1.0, n, 1.0, 1.0, 0.5).unwrap();
            assert!(l <= u, "n={n}");
        }
    }

    #[test]
    fn scaled_bounds_converge() {
        // circle: n² L_n → π²/3
        let n = 1e6;
        let l = sphere_lower_ln(2, 1.0, n, 1.0, 1.0).unwrap();
        assert!(rel_err(n * n * l, PI * PI / 3.0) < 1e-6);
        let (lo, hi) = sphere_coefficient_bounds(3, 2.0, 1.0, 1.0).unwrap();
        let l = sphere_lower_ln(3, 2.0, n, 1.0, 1.0).unwrap();
        assert!(rel_err(n * l, lo) < 1e-5);
        let u = sphere_upper_un(3, 2.0, 1e12, 0.5).unwrap();
        assert!(rel_err(1e12 * u, hi) < 1e-5);
        assert!(rel_err(hi, gamma(2.0) * 4.0 * 4.0) < 1e-12);
    }

    #[test]
    fn coefficient_from_limit_certificate_matches_k_d() {
        for d in 2..7 {
            let (sub, sup) = limit_certificates(d, 1.3).unwrap();
            let q = QuantQuery::new(1.0).with_sub(sub).with_sup(sup);
            let c = coefficient_bounds(&q, (d - 1) as f64).unwrap();
            let (lo, hi) = sphere_coefficient_bounds(d, 1.3, 1.0, 1.0).unwrap();
            assert!(rel_err(c.lower.unwrap(), lo) < 1e-12);
            assert!(rel_err(c.upper.unwrap(), hi) < 1e-12);
        }
    }

    #[test]
    fn circle_forms() {
        assert!(rel_err(circle_closed_forms(1.5, 1).unwrap().upper, 2.0 * 2.25) < 1e-15);
        let f = circle_closed_forms(1.0, 64).unwrap();
        assert!(rel_err(64.0 * 64.0 * f.upper, PI * PI / 3.0) < 1e-3);
        let direct = 2.0 * (1.0 - sinc(1.0 / 64.0));
        assert!(rel_err(f.upper, direct) < 1e-10);
    }

    #[test]
    fn circle_codebook_matches_closed_form() {
        let s = Hypersphere::new(2, 1.0).unwrap();
        let cb = s.circle_codebook(4).unwrap();
        let m = mc_moments(8, 2, 1_000_000, |rng| {
            let x = s.sample_uniform(rng);
            cb.iter().map(|y| sq_dist(&x, y)).fold(f64::INFINITY, f64::min)
        });
        let want = circle_closed_forms(1.0, 4).unwrap().upper;
        assert!((m.mean - want).abs() <= 3.0 * m.std_error());
    }

    #[test]
    fn rd_lower_approaches_shannon_form() {
        let (d, r, h) = (3, 1.0, -0.4);
        let c0 = limit_constant(d, r).unwrap();
        let mut last = f64::INFINITY;
        for &dist in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let rl = sphere_rd_lower(d, r, h, 0.25, dist, false).unwrap();
            let gap = (rl - h - f_shannon(2.0, 2.0, c0, dist).unwrap()).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn samples_lie_on_sphere() {
        let s = Hypersphere::new(5, 2.5).unwrap();
        let mut rng = stream(1, 1, 0);
        for _ in 0..1000 {
            assert!(s.contains(&s.sample_uniform(&mut rng)));
        }
    }
}
