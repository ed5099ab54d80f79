//! The von Mises-Fisher distribution on the unit sphere S^{d-1}(1).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::Serialize;

use super::normalize_to;
use crate::error::{domain, Result};
use crate::special_functions::{ln_bessel_i, ln_gamma};

/// Density c_d(κ) e^{κ yᵀx} with respect to the normalized surface measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VonMisesFisher {
    mean: Vec<f64>,
    kappa: f64,
    ln_c: f64,
}

/// Closed-form functionals of a von Mises-Fisher law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VmfFunctionals {
    pub c_d: f64,
    /// Generalized entropy h_μ(X) ≤ 0.
    pub entropy: f64,
    /// Σ₁ = c_d(κ) e^κ.
    pub sigma_1: f64,
    /// Ω_{2/(d-1)}; present for d ≥ 4.
    pub omega: Option<f64>,
}

/// ln c_d(κ) = (d/2−1) ln κ − ln Γ(d/2) − (d/2−1) ln 2 − ln I_{d/2−1}(κ).
pub fn ln_c_d(d: u32, kappa: f64) -> Result<f64> {
    if d < 2 {
        return Err(domain("vmf", format!("d = {d} must be at least 2")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(domain("vmf", format!("κ = {kappa} must be positive")));
    }
    let nu = d as f64 / 2.0 - 1.0;
    Ok(nu * kappa.ln() - ln_gamma(d as f64 / 2.0) - nu * 2f64.ln() - ln_bessel_i(nu, kappa))
}

/// A_d(κ) = I_{d/2}(κ) / I_{d/2−1}(κ) = E[yᵀX].
pub fn mean_resultant(d: u32, kappa: f64) -> f64 {
    let nu = d as f64 / 2.0 - 1.0;
    (ln_bessel_i(nu + 1.0, kappa) - ln_bessel_i(nu, kappa)).exp()
}

impl VonMisesFisher {
    /// `mean` is normalized to unit length.
    pub fn new(mean: &[f64], kappa: f64) -> Result<Self> {
        let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(domain("vmf", "mean direction must be a nonzero finite vector"));
        }
        let d = mean.len() as u32;
        let ln_c = ln_c_d(d, kappa)?;
        Ok(Self {
            mean: normalize_to(mean, 1.0),
            kappa,
            ln_c,
        })
    }

    pub fn dim(&self) -> u32 {
        self.mean.len() as u32
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mean_direction(&self) -> &[f64] {
        &self.mean
    }

    /// dμ_X/dμ at a unit vector x.
    pub fn density(&self, x: &[f64]) -> f64 {
        self.ln_density(x).exp()
    }

    pub fn ln_density(&self, x: &[f64]) -> f64 {
        let dot: f64 = self.mean.iter().zip(x).map(|(a, b)| a * b).sum();
        self.ln_c + self.kappa * dot
    }

    /// Ω_{2/(d-1)} = c_d^{(d-3)/(d-1)}(κ) / c_d(κ(d-3)/(d-1)), defined for d ≥ 4.
    pub fn omega(&self) -> Result<f64> {
        let d = self.dim();
        if d < 4 {
            return Err(domain("vmf omega", format!("Ω_{{2/(d-1)}} needs d ≥ 4, got d = {d}")));
        }
        let t = (d as f64 - 3.0) / (d as f64 - 1.0);
        Ok((t * self.ln_c - ln_c_d(d, self.kappa * t)?).exp())
    }

    pub fn functionals(&self) -> VmfFunctionals {
        let d = self.dim();
        VmfFunctionals {
            c_d: self.ln_c.exp(),
            entropy: -self.ln_c - self.kappa * mean_resultant(d, self.kappa),
            sigma_1: (self.ln_c + self.kappa).exp(),
            omega: self.omega().ok(),
        }
    }

    /// Exact sampler: rejection for the cosine w = yᵀX, uniform tangent direction.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = self.dim() as usize;
        let w = self.sample_cosine(rng);
        let tangent = loop {
            let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let dot: f64 = g.iter().zip(&self.mean).map(|(a, b)| a * b).sum();
            let t: Vec<f64> = g.iter().zip(&self.mean).map(|(a, b)| a - dot * b).collect();
            if t.iter().map(|v| v * v).sum::<f64>() > 1e-20 {
                break normalize_to(&t, 1.0);
            }
        };
        let s = (1.0 - w * w).max(0.0).sqrt();
        let x: Vec<f64> = self.mean.iter().zip(&tangent).map(|(m, t)| w * m + s * t).collect();
        normalize_to(&x, 1.0)
    }

    /// Sample scaled to the sphere of radius r.
    pub fn sample_on(&self, rng: &mut ChaCha8Rng, r: f64) -> Vec<f64> {
        self.sample(rng).into_iter().map(|v| v * r).collect()
    }

    fn sample_cosine(&self, rng: &mut ChaCha8Rng) -> f64 {
        let dm1 = self.dim() as f64 - 1.0;
        let k = self.kappa;
        let b = dm1 / (2.0 * k + (4.0 * k * k + dm1 * dm1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = k * x0 + dm1 * (1.0 - x0 * x0).ln();
        let beta = Beta::new(dm1 / 2.0, dm1 / 2.0).expect("valid beta parameters");
        loop {
            let z: f64 = beta.sample(rng);
            let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
            let u: f64 = rng.random();
            if k * w + dm1 * (1.0 - x0 * w).ln() - c >= u.ln() {
                return w.clamp(-1.0, 1.0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Hypersphere;
    use crate::stats::mc_moments;
    use crate::testutil::{integrate, rel_err};

    #[test]
    fn c3_closed_form() {
        for &k in &[0.5, 1.0, 2.0, 10.0, 50.0] {
            let v = VonMisesFisher::new(&[0.0, 0.0, 1.0], k).unwrap();
            assert!(rel_err(v.functionals().c_d, k / k.sinh()) < 1e-10, "κ={k}");
        }
    }

    #[test]
    fn small_kappa_is_uniform() {
        let f = VonMisesFisher::new(&[1.0, 0.0, 0.0, 0.0], 1e-8).unwrap().functionals();
        assert!((f.c_d - 1.0).abs() < 1e-7 && f.entropy.abs() < 1e-7 && (f.sigma_1 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn entropy_nonpositive_and_closed_form() {
        let k = 1.0f64;
        let f = VonMisesFisher::new(&[0.0, 1.0, 0.0], k).unwrap().functionals();
        let want = -(k / k.sinh()).ln() - (1.0 / k.tanh() - 1.0);
        assert!(rel_err(f.entropy, want) < 1e-10);
        for d in 2..8 {
            for &k in &[0.1, 1.0, 5.0, 40.0] {
                let mut mean = vec![0.0; d];
                mean[0] = 1.0;
                assert!(VonMisesFisher::new(&mean, k).unwrap().functionals().entropy <= 0.0);
            }
        }
    }

    /// c_d from the one-dimensional marginal of yᵀX under the uniform law.
    #[test]
    fn normalizer_matches_quadrature() {
        for d in [2u32, 4, 5, 7] {
            for &k in &[0.5, 3.0] {
                let a = (d as f64 - 3.0) / 2.0;
                let ln_norm = ln_gamma(d as f64 / 2.0) - 0.5 * std::f64::consts::PI.ln() - ln_gamma((d as f64 - 1.0) / 2.0);
                // for d = 2 the weight (1−t²)^{-1/2} is singular: substitute t = cos θ
                let z = if d == 2 {
                    integrate(|th: f64| (k * th.cos()).exp(), 0.0, std::f64::consts::PI, 1e-12) / std::f64::consts::PI
                } else {
                    ln_norm.exp() * integrate(|t: f64| (k * t).exp() * (1.0 - t * t).powf(a), -1.0, 1.0, 1e-12)
                };
                let c = ln_c_d(d, k).unwrap().exp();
                assert!(rel_err(c * z, 1.0) < 1e-9, "d={d} κ={k}");
            }
        }
    }

    #[test]
    fn omega_rules() {
        assert!(VonMisesFisher::new(&[1.0, 0.0, 0.0], 2.0).unwrap().omega().is_err());
        let o = VonMisesFisher::new(&[1.0, 0.0, 0.0, 0.0], 2.0).unwrap().omega().unwrap();
        assert!(o < 1.0 && o > 0.0);
    }

    #[test]
    fn density_integrates_to_one_and_mean_resultant() {
        for d in [2u32, 3, 5] {
            let s = Hypersphere::new(d, 1.0).unwrap();
            for &k in &[0.5, 2.0, 10.0] {
                let mut mean = vec![0.0; d as usize];
                mean[d as usize - 1] = 1.0;
                let v = VonMisesFisher::new(&mean, k).unwrap();
                let m = mc_moments(11, d as u64, 400_000, |rng| v.density(&s.sample_uniform(rng)));
                assert!((m.mean - 1.0).abs() <= 3.0 * m.std_error(), "d={d} κ={k}: {}", m.mean);
                let m = mc_moments(12, d as u64, 400_000, |rng| v.sample(rng)[d as usize - 1]);
                let want = mean_resultant(d, k);
                assert!((m.mean - want).abs() <= 3.0 * m.std_error(), "d={d} κ={k}");
            }
        }
    }
}
