//! Self-similar sets generated by iterated function systems, with the
//! middle-third Cantor set as a preset.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SpaceModel;
use crate::error::{domain, Error, Result};
use crate::regularity::RegularityCertificate;

/// s(x) = κ O x + t with O orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub kappa: f64,
    pub shift: Vec<f64>,
    /// Row-major orthogonal part; identity when absent.
    #[serde(default)]
    pub orth: Option<Vec<Vec<f64>>>,
}

impl Similarity {
    pub fn scaling(kappa: f64, shift: Vec<f64>) -> Self {
        Self { kappa, shift, orth: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Map {
    kappa: f64,
    linear: DMatrix<f64>,
    shift: DVector<f64>,
}

impl Map {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.shift
    }
}

/// Attractor K of an IFS with normalized m-dimensional Hausdorff measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarSet {
    maps: Vec<Map>,
    weights: Vec<f64>,
    dim: usize,
    m: f64,
    diam: f64,
    kappa_min: f64,
    center: DVector<f64>,
    /// Radius of a ball around `center` containing K.
    radius: f64,
    c_sub: Option<f64>,
    /// Codewords range over ℝ^d rather than K.
    pub ambient: bool,
    /// Distortion exponent: ρ(x, y) = ‖x − y‖₂^k.
    pub k: f64,
    cantor: bool,
}

/// Similarity dimension: the m with Σ κ_i^m = 1.
pub fn similarity_dimension(kappas: &[f64]) -> Result<f64> {
    if kappas.is_empty() {
        return Err(domain("similarity_dimension", "empty IFS"));
    }
    if let Some(k) = kappas.iter().find(|k| !(**k > 0.0 && **k < 1.0)) {
        return Err(domain("similarity_dimension", format!("contraction κ = {k} must lie in (0, 1)")));
    }
    let f = |m: f64| kappas.iter().map(|k| k.powf(m)).sum::<f64>() - 1.0;
    if kappas.len() == 1 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl SelfSimilarSet {
    /// Builds the attractor; `diam` defaults to the diameter of an invariant ball.
    pub fn build(similarities: &[Similarity], diam: Option<f64>) -> Result<Self> {
        let kappas: Vec<f64> = similarities.iter().map(|s| s.kappa).collect();
        let m = similarity_dimension(&kappas)?;
        let dim = similarities[0].shift.len();
        if dim == 0 {
            return Err(domain("selfsimilar_build", "empty translation vector"));
        }
        let mut maps = Vec::with_capacity(similarities.len());
        for s in similarities {
            if s.shift.len() != dim {
                return Err(domain("selfsimilar_build", "translations have different lengths"));
            }
            let o = match &s.orth {
                None => DMatrix::identity(dim, dim),
                Some(rows) => {
                    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                        return Err(domain("selfsimilar_build", "orthogonal part has the wrong shape"));
                    }
                    DMatrix::from_fn(dim, dim, |i, j| rows[i][j])
                }
            };
            let dev = (o.transpose() * &o - DMatrix::identity(dim, dim)).abs().max();
            if dev > 1e-9 {
                return Err(domain("selfsimilar_build", format!("linear part is not orthogonal (deviation {dev:.2e})")));
            }
            maps.push(Map {
                kappa: s.kappa,
                linear: o * s.kappa,
                shift: DVector::from_vec(s.shift.clone()),
            });
        }
        let fixed: Vec<DVector<f64>> = maps
            .iter()
            .map(|mp| {
                (DMatrix::identity(dim, dim) - &mp.linear)
                    .lu()
                    .solve(&mp.shift)
                    .expect("I − κO is invertible for κ < 1")
            })
            .collect();
        let center = fixed.iter().fold(DVector::zeros(dim), |acc, p| acc + p) / fixed.len() as f64;
        let radius = maps
            .iter()
            .map(|mp| (mp.apply(&center) - &center).norm() / (1.0 - mp.kappa))
            .fold(0.0, f64::max);
        let diam = match diam {
            Some(v) if v > 0.0 && v.is_finite() => v,
            Some(v) => return Err(domain("selfsimilar_build", format!("diameter {v} must be positive"))),
            None => 2.0 * radius,
        };
        let weights = kappas.iter().map(|k| k.powf(m)).collect();
        Ok(Self {
            maps,
            weights,
            dim,
            m,
            diam,
            kappa_min: kappas.iter().copied().fold(f64::INFINITY, f64::min),
            center,
            radius,
            c_sub: None,
            ambient: false,
            k: 2.0,
            cantor: false,
        })
    }

    /// Middle-third Cantor set; c_sub = 3 for codewords in ℝ, 2 on the set.
    pub fn cantor(ambient: bool) -> Self {
        let maps = [Similarity::scaling(1.0 / 3.0, vec![0.0]), Similarity::scaling(1.0 / 3.0, vec![2.0 / 3.0])];
        let mut set = Self::build(&maps, Some(1.0)).expect("valid Cantor IFS");
        set.m = cantor_dimension();
        set.ambient = ambient;
        set.c_sub = Some(if ambient { 3.0 } else { 2.0 });
        set.cantor = true;
        set
    }

    pub fn with_c_sub(mut self, c: f64) -> Self {
        self.c_sub = Some(c);
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_ambient(mut self, ambient: bool) -> Self {
        self.ambient = ambient;
        self
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa_min
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_cantor(&self) -> bool {
        self.cantor
    }

    /// Sub certificate (m, c_sub, ∞) and super certificate (m, (κ_min/diam)^m, diam).
    pub fn certificates(&self) -> Result<(RegularityCertificate, RegularityCertificate)> {
        let c = self.c_sub.ok_or_else(|| Error::Inapplicable {
            what: "selfsimilar_certs",
            why: "no subregularity constant supplied for this IFS".into(),
        })?;
        if !(self.m > 0.0) {
            return Err(Error::Certificate("similarity dimension 0: single-point attractor".into()));
        }
        let b = (self.kappa_min / self.diam).powf(self.m);
        Ok((
            RegularityCertificate::sub(self.m, c, f64::INFINITY, self.k)?,
            RegularityCertificate::sup(self.m, b, self.diam, self.k)?,
        ))
    }

    /// Draw from μ: digits {0, 2} to depth 52 for the Cantor preset, otherwise
    /// a random composition of maps (probabilities κ_i^m) until the cell
    /// size drops below 1e-17 relative to diam K.
    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if self.cantor {
            return vec![cantor_point(rng)];
        }
        let mut idx = Vec::new();
        let mut scale = 1.0;
        while scale > 1e-17 {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.maps.len() - 1;
            for (i, w) in self.weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            scale *= self.maps[pick].kappa;
            idx.push(pick);
        }
        let mut x = self.center.clone();
        for &i in idx.iter().rev() {
            x = self.maps[i].apply(&x);
        }
        x.iter().copied().collect()
    }

    /// Nearest point of K by a beam search over cells ranked by the distance
    /// lower bound ‖v − cell center‖ − cell radius; exact digit rounding for
    /// the Cantor set.
    pub fn nearest_point(&self, v: &[f64]) -> Vec<f64> {
        const BEAM: usize = 16;
        let target = DVector::from_column_slice(v);
        // a cell is the image of K under x ↦ L x + t
        let mut beam = vec![(DMatrix::<f64>::identity(self.dim, self.dim), DVector::<f64>::zeros(self.dim))];
        let mut scale = 1.0;
        while scale > 1e-17 {
            let mut next = Vec::with_capacity(beam.len() * self.maps.len());
            let mut child_scale = 0.0f64;
            for (lin, shift) in &beam {
                for mp in &self.maps {
                    let l = lin * &mp.linear;
                    let t = lin * &mp.shift + shift;
                    let c = &l * &self.center + &t;
                    let s = scale * mp.kappa;
                    child_scale = child_scale.max(s);
                    let key = (c - &target).norm() - self.radius * s;
                    next.push((key, l, t));
                }
            }
            next.sort_by(|a, b| a.0.total_cmp(&b.0));
            next.truncate(BEAM);
            beam = next.into_iter().map(|(_, l, t)| (l, t)).collect();
            scale = child_scale;
        }
        let best = beam
            .iter()
            .map(|(l, t)| l * &self.center + t)
            .min_by(|a, b| (a - &target).norm().total_cmp(&(b - &target).norm()))
            .expect("nonempty beam");
        best.iter().copied().collect()
    }

    /// Approximate membership: distance to K below 1e-9 diam K.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let p = self.nearest_point(x);
        super::sq_dist(&p, x).sqrt() <= 1e-9 * self.diam
    }
}

/// log 2 / log 3.
pub fn cantor_dimension() -> f64 {
    2f64.ln() / 3f64.ln()
}

/// Uniform Cantor point from 52 ternary digits in {0, 2}.
pub fn cantor_point(rng: &mut ChaCha8Rng) -> f64 {
    let bits = rng.next_u64();
    let mut x = 0.0;
    for i in (0..52).rev() {
        x = (x + 2.0 * ((bits >> i) & 1) as f64) / 3.0;
    }
    x
}

/// Exact V_n of the uniform Cantor distribution for codewords in ℝ.
pub fn cantor_exact_vn(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("cantor_exact_vn", "n must be ≥ 1"));
    }
    let l = 63 - n.leading_zeros() as i32;
    let pow = 2f64.powi(l);
    let nf = n as f64;
    Ok((2.0 * pow - nf + (nf - pow) / 9.0) / (8.0 * 18f64.powi(l)))
}

/// Accumulation points of n^{2/m_C} V_n: the lower and upper coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CantorCoefficients {
    pub lower: f64,
    pub upper: f64,
    /// C_2 exists only if the two coincide; they do not.
    pub exists: bool,
}

/// [1/8, f(17/(8 + 4 m_C))] with f(s) = s^{2/m_C}(17 − 8s)/72.
pub fn cantor_accumulation_interval() -> CantorCoefficients {
    let m = cantor_dimension();
    let s = 17.0 / (8.0 + 4.0 * m);
    let upper = s.powf(2.0 / m) * (17.0 - 8.0 * s) / 72.0;
    CantorCoefficients {
        lower: 0.125,
        upper,
        exists: false,
    }
}

/// Midpoints of an optimal n-cell Cantor partition: 2^{l+1} − n cells of
/// depth l and 2(n − 2^l) of depth l + 1.
pub fn cantor_cell_centers(n: u64) -> Vec<f64> {
    let l = 63 - n.leading_zeros();
    let coarse = (1u64 << (l + 1)) - n;
    let mut out = Vec::with_capacity(n as usize);
    for j in 0..(1u64 << l) {
        let left = cell_left(j, l);
        let w = 3f64.powi(-(l as i32));
        if j < coarse {
            out.push(left + w / 2.0);
        } else {
            out.push(left + w / 6.0);
            out.push(left + 2.0 * w / 3.0 + w / 6.0);
        }
    }
    out
}

/// Left endpoint of the j-th depth-l Cantor cell.
fn cell_left(j: u64, l: u32) -> f64 {
    let mut x = 0.0;
    for i in 0..l {
        let bit = (j >> (l - 1 - i)) & 1;
        x += 2.0 * bit as f64 * 3f64.powi(-(i as i32) - 1);
    }
    x
}

impl SpaceModel for SelfSimilarSet {
    type Point = Vec<f64>;

    fn id(&self) -> String {
        if self.cantor {
            format!("cantor-{}", if self.ambient { "ambient" } else { "onset" })
        } else {
            format!("ifs-{}maps-d{}", self.maps.len(), self.dim)
        }
    }

    fn sample_reference(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.sample_point(rng)
    }

    fn distortion(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        let d2 = super::sq_dist(x, y);
        if self.k == 2.0 {
            d2
        } else {
            d2.powf(self.k / 2.0)
        }
    }

    fn contains(&self, y: &Vec<f64>) -> bool {
        if self.ambient {
            y.len() == self.dim && y.iter().all(|v| v.is_finite())
        } else {
            self.contains_point(y)
        }
    }

    fn embedding_dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, x: &Vec<f64>) -> Vec<f64> {
        x.clone()
    }

    fn project(&self, v: &[f64]) -> Vec<f64> {
        if self.ambient {
            v.to_vec()
        } else {
            self.nearest_point(v)
        }
    }

    fn structured_codebooks(&self, n: usize) -> Vec<Vec<Vec<f64>>> {
        if !self.cantor || n == 0 {
            return Vec::new();
        }
        vec![cantor_cell_centers(n as u64).into_iter().map(|c| self.project(&[c])).collect()]
    }
}
