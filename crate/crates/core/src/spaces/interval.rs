//! The unit interval with ρ(x, y) = |x − y|².

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::SpaceModel;
use crate::error::Result;
use crate::regularity::RegularityCertificate;

/// Uniform measure on [0, 1]; codewords range over ℝ.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UnitInterval;

impl UnitInterval {
    /// Lebesgue subregularity on ℝ: μ(B(y, δ)) ≤ 2δ.
    pub fn sub_certificate(&self) -> Result<RegularityCertificate> {
        RegularityCertificate::sub(1.0, 2.0, f64::INFINITY, 2.0)
    }

    /// μ(B(x, δ)) ≥ δ for x ∈ [0, 1] and δ ≤ 1.
    pub fn sup_certificate(&self) -> Result<RegularityCertificate> {
        RegularityCertificate::sup(1.0, 1.0, 1.0, 2.0)
    }

    /// sup ρ^{1/2} over [0, 1]².
    pub fn diameter(&self) -> f64 {
        1.0
    }

    /// V_n of the uniform distribution.
    pub fn exact_vn(&self, n: u64) -> f64 {
        1.0 / (12.0 * (n as f64).powi(2))
    }
}

impl SpaceModel for UnitInterval {
    type Point = f64;

    fn id(&self) -> String {
        "interval".into()
    }

    fn sample_reference(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.random::<f64>()
    }

    fn distortion(&self, x: &f64, y: &f64) -> f64 {
        (x - y) * (x - y)
    }

    fn contains(&self, y: &f64) -> bool {
        y.is_finite()
    }

    fn embedding_dim(&self) -> usize {
        1
    }

    fn embed(&self, x: &f64) -> Vec<f64> {
        vec![*x]
    }

    fn project(&self, v: &[f64]) -> f64 {
        v[0]
    }

    fn structured_codebooks(&self, n: usize) -> Vec<Vec<f64>> {
        vec![(0..n).map(|i| (2 * i + 1) as f64 / (2 * n) as f64).collect()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularity::verify_certificate;

    #[test]
    fn certificates_hold_empirically() {
        let s = UnitInterval;
        let centers = [0.0, 0.3, 1.0, 1.2];
        let res = verify_certificate(
            &s.sub_certificate().unwrap(),
            |r| s.sample_reference(r),
            |x, y| s.distortion(x, y),
            &centers,
            &[0.05, 0.4, 2.0],
            100_000,
            1,
        )
        .unwrap();
        assert!(res.iter().all(|(_, ok)| *ok));
        let res = verify_certificate(
            &s.sup_certificate().unwrap(),
            |r| s.sample_reference(r),
            |x, y| s.distortion(x, y),
            &[0.0, 0.5, 1.0],
            &[0.05, 0.5, 1.0],
            100_000,
            2,
        )
        .unwrap();
        assert!(res.iter().all(|(_, ok)| *ok));
    }
}
