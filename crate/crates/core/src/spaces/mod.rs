//! Concrete spaces: samplers, distortions, certificates and closed forms.

use rand_chacha::ChaCha8Rng;

pub mod grassmann;
pub mod interval;
pub mod selfsimilar;
pub mod sphere;
pub mod vmf;

pub use grassmann::{Field, Grassmannian};
pub use interval::UnitInterval;
pub use selfsimilar::SelfSimilarSet;
pub use sphere::Hypersphere;
pub use vmf::VonMisesFisher;

/// A source space X, a reproduction space Y and a distortion ρ on X × Y.
///
/// Points of X and Y share one representation. Quantizer centroids are
/// computed in the Euclidean embedding and mapped back with [`project`].
///
/// [`project`]: SpaceModel::project
pub trait SpaceModel: Sync {
    type Point: Clone + Send + Sync + std::fmt::Debug;

    fn id(&self) -> String;

    /// Draws from the reference measure μ on X.
    fn sample_reference(&self, rng: &mut ChaCha8Rng) -> Self::Point;

    /// Draws from the reference measure ν on Y.
    fn sample_codeword(&self, rng: &mut ChaCha8Rng) -> Self::Point {
        self.sample_reference(rng)
    }

    /// ρ(x, y) with x ∈ X and y ∈ Y.
    fn distortion(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Membership in Y.
    fn contains(&self, y: &Self::Point) -> bool;

    fn embedding_dim(&self) -> usize;

    fn embed(&self, x: &Self::Point) -> Vec<f64>;

    /// Maps an averaged embedding back to a point of Y.
    fn project(&self, v: &[f64]) -> Self::Point;

    /// Space-specific n-point codebooks worth screening.
    fn structured_codebooks(&self, _n: usize) -> Vec<Vec<Self::Point>> {
        Vec::new()
    }
}

/// Normalizes `v` to length `r`; the zero vector maps to the first axis.
pub(crate) fn normalize_to(v: &[f64], r: f64) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        let mut e = vec![0.0; v.len()];
        e[0] = r;
        return e;
    }
    v.iter().map(|x| x * r / norm).collect()
}

pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
