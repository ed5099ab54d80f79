//! Grassmannians G^F(r, d) and G^F(s, d) under the squared chordal distance.

use nalgebra::{Complex, DMatrix};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SpaceModel;
use crate::error::{domain, Error, Result};
use crate::regularity::RegularityCertificate;
use crate::special_functions::ln_gamma;

pub type C64 = Complex<f64>;
/// A d × r matrix with orthonormal columns spanning the subspace.
pub type Subspace = DMatrix<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[serde(alias = "R")]
    Real,
    #[serde(alias = "C")]
    Complex,
}

impl Field {
    /// β = 1 for ℝ, 2 for ℂ.
    pub fn beta(self) -> f64 {
        match self {
            Field::Real => 1.0,
            Field::Complex => 2.0,
        }
    }
}

/// Which volume law applies to the pair of Grassmannians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VolumeCase {
    /// v(δ) = c δ^{m_G} on (0, 1].
    Exact,
    /// Real, a = b: c δ^{m_G} ≤ v(δ) ≤ c δ^{m_G}/(1−δ0²)^{a/2}.
    RealEqual,
    /// c (1−δ0²)^{e} δ^{m_G} ≤ v(δ) ≤ c δ^{m_G}.
    General,
}

/// Ball volume: exact or a sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VolumeLaw {
    Exact(f64),
    Sandwich { lower: f64, upper: f64 },
}

impl VolumeLaw {
    pub fn range(&self) -> (f64, f64) {
        match *self {
            VolumeLaw::Exact(v) => (v, v),
            VolumeLaw::Sandwich { lower, upper } => (lower, upper),
        }
    }
}

/// X = G^F(r, d) with uniform measure, Y = G^F(s, d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grassmannian {
    pub field: Field,
    pub r: usize,
    pub s: usize,
    pub d: usize,
}

impl Grassmannian {
    pub fn new(field: Field, r: usize, s: usize, d: usize) -> Result<Self> {
        if r == 0 || s == 0 || r > d || s > d {
            return Err(domain("grassmann", format!("need 1 ≤ r, s ≤ d, got r = {r}, s = {s}, d = {d}")));
        }
        Ok(Self { field, r, s, d })
    }

    pub fn a(&self) -> usize {
        self.r.min(self.s)
    }

    pub fn b(&self) -> usize {
        self.r.max(self.s)
    }

    /// m_G = β a (d − b).
    pub fn m_g(&self) -> f64 {
        self.field.beta() * (self.a() * (self.d - self.b())) as f64
    }

    pub fn constant(&self) -> f64 {
        grassmann_constant(self.field, self.a(), self.b(), self.d)
    }

    pub fn case(&self) -> VolumeCase {
        let (a, b) = (self.a(), self.b());
        match self.field {
            Field::Real if b == a + 1 => VolumeCase::Exact,
            Field::Complex if b == a => VolumeCase::Exact,
            Field::Real if b == a => VolumeCase::RealEqual,
            _ => VolumeCase::General,
        }
    }

    /// Exponent β a (b−a+1)/2 − a of (1−δ0²) in the general-case lower bound.
    fn general_exponent(&self) -> f64 {
        let (a, b) = (self.a() as f64, self.b() as f64);
        self.field.beta() / 2.0 * a * (b - a + 1.0) - a
    }

    fn check_nondegenerate(&self, op: &'static str) -> Result<()> {
        if self.m_g() > 0.0 {
            Ok(())
        } else {
            Err(Error::Degenerate(format!("{op}: m_G = 0 (b = d) leaves a single point")))
        }
    }

    /// Uniform point of G^F(k, d) from the QR factor of a Gaussian matrix.
    pub fn sample_subspace(&self, k: usize, rng: &mut ChaCha8Rng) -> Subspace {
        match self.field {
            Field::Real => {
                let g = DMatrix::<f64>::from_fn(self.d, k, |_, _| StandardNormal.sample(rng));
                g.qr().q().map(|v| C64::new(v, 0.0))
            }
            Field::Complex => {
                let g = DMatrix::<C64>::from_fn(self.d, k, |_, _| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im)
                });
                g.qr().q()
            }
        }
    }

    /// Sub and super certificates for ρ = ρ_c² (k = 2) at radius δ0 ∈ (0, 1].
    pub fn certificates(&self, delta0: f64) -> Result<(RegularityCertificate, RegularityCertificate)> {
        self.check_nondegenerate("grassmann certificates")?;
        if !(delta0 > 0.0 && delta0 <= 1.0) {
            return Err(domain("grassmann certificates", format!("δ0 = {delta0} must lie in (0, 1]")));
        }
        let (m, c) = (self.m_g(), self.constant());
        let (sub_c, sup_c) = match self.case() {
            VolumeCase::Exact => (c, c),
            VolumeCase::RealEqual => (c / (1.0 - delta0 * delta0).powf(self.a() as f64 / 2.0), c),
            VolumeCase::General => (c, c * (1.0 - delta0 * delta0).powf(self.general_exponent())),
        };
        if !sub_c.is_finite() || sup_c <= 0.0 {
            return Err(domain("grassmann certificates", format!("δ0 = {delta0} gives a vacuous constant")));
        }
        Ok((
            RegularityCertificate::sub(m, sub_c, delta0, 2.0)?,
            RegularityCertificate::sup(m, sup_c, delta0, 2.0)?,
        ))
    }
}

/// c_{a,b,d,β}.
pub fn grassmann_constant(field: Field, a: usize, b: usize, d: usize) -> f64 {
    let beta = field.beta();
    let h = beta / 2.0;
    let mut ln = -ln_gamma(h * (a * (d - b)) as f64 + 1.0);
    if a + b <= d {
        for i in 1..=a {
            ln += ln_gamma(h * (d - i + 1) as f64) - ln_gamma(h * (b - i + 1) as f64);
        }
    } else {
        for i in 1..=(d - b) {
            ln += ln_gamma(h * (d - i + 1) as f64) - ln_gamma(h * (d - a - i + 1) as f64);
        }
    }
    ln.exp()
}

/// γ_{r,d}(B(y, δ)) under the chordal distance, with δ0 = δ in the sandwich cases.
pub fn grassmann_volume(field: Field, r: usize, s: usize, d: usize, delta: f64) -> Result<VolumeLaw> {
    let g = Grassmannian::new(field, r, s, d)?;
    g.check_nondegenerate("grassmann_volume")?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(domain("grassmann_volume", format!("δ = {delta} must lie in (0, 1]")));
    }
    let base = g.constant() * delta.powf(g.m_g());
    let shrink = 1.0 - delta * delta;
    Ok(match g.case() {
        VolumeCase::Exact => VolumeLaw::Exact(base),
        VolumeCase::RealEqual => VolumeLaw::Sandwich {
            lower: base,
            upper: base / shrink.powf(g.a() as f64 / 2.0),
        },
        VolumeCase::General => VolumeLaw::Sandwich {
            lower: base * shrink.powf(g.general_exponent()),
            upper: base,
        },
    })
}

fn check_orthonormal(x: &Subspace) -> Result<()> {
    let gram = x.adjoint() * x;
    let dev = (gram - DMatrix::<C64>::identity(x.ncols(), x.ncols())).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-8 {
        return Err(domain("chordal_distance", format!("columns not orthonormal (Gram deviation {dev:.2e})")));
    }
    Ok(())
}

/// Principal-angle cosines: singular values of xᴴy clamped to [0, 1].
pub fn principal_cosines(x: &Subspace, y: &Subspace) -> Result<Vec<f64>> {
    if x.nrows() != y.nrows() {
        return Err(domain("principal_cosines", "ambient dimensions differ"));
    }
    check_orthonormal(x)?;
    check_orthonormal(y)?;
    let sv = (x.adjoint() * y).singular_values();
    Ok(sv.iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// ρ_c(x, y) = √Σ sin² θ_i.
pub fn chordal_distance(x: &Subspace, y: &Subspace) -> Result<f64> {
    let cos = principal_cosines(x, y)?;
    Ok(cos.iter().map(|c| 1.0 - c * c).sum::<f64>().max(0.0).sqrt())
}

/// ρ_c² via a − ‖xᴴy‖_F², for already-orthonormal inputs.
pub fn chordal_sq_fast(x: &Subspace, y: &Subspace) -> f64 {
    let a = x.ncols().min(y.ncols()) as f64;
    let mut f = 0.0;
    for j in 0..y.ncols() {
        for i in 0..x.ncols() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..x.nrows() {
                acc += x[(k, i)].conj() * y[(k, j)];
            }
            f += acc.norm_sqr();
        }
    }
    (a - f).max(0.0)
}

/// h(u) = c_{a,a,d,1} u^{m_G} / (1 − u²)^{a/2}.
pub fn h_function(g: &Grassmannian, u: f64) -> f64 {
    g.constant() * u.powf(g.m_g()) / (1.0 - u * u).powf(g.a() as f64 / 2.0)
}

/// Inverse of [`h_function`] on [0, 1).
pub fn h_inverse(g: &Grassmannian, y: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(domain("h_inverse", format!("argument {y} must be positive")));
    }
    let (m, half_a, ln_c, ln_y) = (g.m_g(), g.a() as f64 / 2.0, g.constant().ln(), y.ln());
    // ln h at u = e^t; increasing in t on (−∞, 0)
    let f = |t: f64| ln_c + m * t - half_a * (-(2.0 * t).exp_m1()).ln() - ln_y;
    let t0 = (ln_y - ln_c) / m;
    let mut hi = t0.min(-1e-300);
    while f(hi) < 0.0 {
        hi /= 2.0;
        if hi > -1e-300 {
            return Ok(1.0);
        }
    }
    let mut lo = hi - 1.0;
    while f(lo) > 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * lo.abs().max(1e-300) {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn check_density(op: &'static str, n: f64, p: f64, sigma_p: f64) -> Result<()> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(domain(op, format!("n = {n} must be ≥ 1")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(op, format!("p = {p} must be ≥ 1")));
    }
    if !(sigma_p > 0.0 && sigma_p.is_finite()) {
        return Err(domain(op, format!("Σ_p = {sigma_p} must be positive")));
    }
    Ok(())
}

/// Lower bound L_n. For the real equal-dimension case the simplified closed
/// form is used unless `exact_inversion` is set.
pub fn grassmann_lower_ln(g: &Grassmannian, n: f64, p: f64, sigma_p: f64, exact_inversion: bool) -> Result<f64> {
    g.check_nondegenerate("grassmann_lower_ln")?;
    check_density("grassmann_lower_ln", n, p, sigma_p)?;
    let (m, c) = (g.m_g(), g.constant());
    let lead = m / (m + 2.0 * p);
    let n0 = 1.0 / (sigma_p * c.powf(1.0 / p));
    let ln_t = c.ln() + p * n.ln() + p * sigma_p.ln();
    if g.case() == VolumeCase::RealEqual {
        if exact_inversion {
            let delta = h_inverse(g, (-(p * n.ln() + p * sigma_p.ln())).exp())?;
            return Ok(lead * delta * delta);
        }
        if !(n > n0) {
            return Err(Error::BelowThreshold { n, threshold: n0 });
        }
        let x = (-2.0 / m * ln_t).exp();
        return Ok(lead * x * (1.0 - x).powf(1.0 / (g.d - g.a()) as f64));
    }
    if !(n >= n0) {
        return Err(Error::BelowThreshold { n, threshold: n0 });
    }
    Ok(lead * (-2.0 / m * ln_t).exp())
}

/// Upper bound U_n; `alpha` ∈ (0, 1) sets δ_n = n^{-α/m_G} in the general case.
pub fn grassmann_upper_un(g: &Grassmannian, n: f64, alpha: f64) -> Result<f64> {
    g.check_nondegenerate("grassmann_upper_un")?;
    check_density("grassmann_upper_un", n, 1.0, 1.0)?;
    let (m, c, a) = (g.m_g(), g.constant(), g.a() as f64);
    let lead = ln_gamma(1.0 + 2.0 / m).exp();
    if g.case() != VolumeCase::General {
        return Ok(lead * (c * n).powf(-2.0 / m) + (a - 1.0) * (-n * c).exp());
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("grassmann_upper_un", format!("α = {alpha} must lie in (0, 1)")));
    }
    let delta = n.powf(-alpha / m);
    let b = c * (1.0 - delta * delta).powf(g.general_exponent());
    if b <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(lead * (n * b).powf(-2.0 / m) + (a - delta * delta) * (-n * b * delta.powf(m)).exp())
}

/// (L_n, U_n).
pub fn grassmann_bounds(g: &Grassmannian, n: f64, p: f64, sigma_p: f64, alpha: f64) -> Result<(f64, f64)> {
    Ok((grassmann_lower_ln(g, n, p, sigma_p, false)?, grassmann_upper_un(g, n, alpha)?))
}

/// Limits (lower bound on C̲_2 for p = 1, upper bound on C̄_2).
pub fn grassmann_coefficient_bounds(g: &Grassmannian, sigma_1: f64) -> Result<(f64, f64)> {
    g.check_nondegenerate("grassmann_coefficient_bounds")?;
    let (m, c) = (g.m_g(), g.constant());
    let lower = m / (m + 2.0) * sigma_1.powf(-2.0 / m) * c.powf(-2.0 / m);
    let upper = ln_gamma(1.0 + 2.0 / m).exp() * c.powf(-2.0 / m);
    Ok((lower, upper))
}

/// Sub certificate for ρ(x, y) = ‖P⊥_x y‖₂ between G^ℝ(p, d) and S^{d-1}(r).
pub fn grassmann_projection_cert(p: usize, d: usize, r: f64) -> Result<RegularityCertificate> {
    if !(p >= 1 && p < d) {
        return Err(domain("grassmann_projection_cert", format!("need 1 ≤ p < d, got p = {p}, d = {d}")));
    }
    let (pf, df) = (p as f64, d as f64);
    let ln_c = ln_gamma(1.0 + df / 2.0) - (df - pf) * r.ln() - ln_gamma(1.0 + pf / 2.0) - ln_gamma(1.0 + (df - pf) / 2.0);
    RegularityCertificate::sub(df - pf, ln_c.exp(), f64::INFINITY, 1.0)
}

/// ‖P⊥_x y‖₂ for a real subspace basis x and a vector y.
pub fn projection_distortion(x: &Subspace, y: &[f64]) -> f64 {
    let mut inside = 0.0;
    for j in 0..x.ncols() {
        let dot: f64 = (0..x.nrows()).map(|i| x[(i, j)].re * y[i]).sum();
        inside += dot * dot;
    }
    let total: f64 = y.iter().map(|v| v * v).sum();
    (total - inside).max(0.0).sqrt()
}

impl SpaceModel for Grassmannian {
    type Point = Subspace;

    fn id(&self) -> String {
        let f = match self.field {
            Field::Real => "R",
            Field::Complex => "C",
        };
        format!("grassmann-{f}-r{}-s{}-d{}", self.r, self.s, self.d)
    }

    fn sample_reference(&self, rng: &mut ChaCha8Rng) -> Subspace {
        self.sample_subspace(self.r, rng)
    }

    fn sample_codeword(&self, rng: &mut ChaCha8Rng) -> Subspace {
        self.sample_subspace(self.s, rng)
    }

    fn distortion(&self, x: &Subspace, y: &Subspace) -> f64 {
        chordal_sq_fast(x, y)
    }

    fn contains(&self, y: &Subspace) -> bool {
        y.nrows() == self.d
            && y.ncols() == self.s
            && check_orthonormal(y).is_ok()
            && (self.field == Field::Complex || y.iter().all(|z| z.im == 0.0))
    }

    fn embedding_dim(&self) -> usize {
        match self.field {
            Field::Real => self.d * self.d,
            Field::Complex => 2 * self.d * self.d,
        }
    }

    /// The orthogonal projector x xᴴ, flattened (real parts, then imaginary parts).
    fn embed(&self, x: &Subspace) -> Vec<f64> {
        let p = x * x.adjoint();
        let mut v: Vec<f64> = p.iter().map(|z| z.re).collect();
        if self.field == Field::Complex {
            v.extend(p.iter().map(|z| z.im));
        }
        v
    }

    /// Span of the top-s eigenvectors of the averaged projector.
    fn project(&self, v: &[f64]) -> Subspace {
        let dd = self.d * self.d;
        let vecs = match self.field {
            Field::Real => {
                let h = DMatrix::<f64>::from_column_slice(self.d, self.d, &v[..dd]);
                let h = (&h + h.transpose()) * 0.5;
                let eig = h.symmetric_eigen();
                top_columns(eig.eigenvalues.as_slice(), self.s, |j| eig.eigenvectors.column(j).map(|x| C64::new(x, 0.0)))
            }
            Field::Complex => {
                let h = DMatrix::<C64>::from_fn(self.d, self.d, |i, j| {
                    let idx = i + j * self.d;
                    C64::new(v[idx], v[dd + idx])
                });
                let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
                let eig = h.symmetric_eigen();
                top_columns(eig.eigenvalues.as_slice(), self.s, |j| eig.eigenvectors.column(j).into_owned())
            }
        };
        // re-orthonormalize against round-off
        vecs.qr().q()
    }
}

fn top_columns(vals: &[f64], k: usize, col: impl Fn(usize) -> nalgebra::DVector<C64>) -> Subspace {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let cols: Vec<_> = order[..k].iter().map(|&j| col(j)).collect();
    DMatrix::from_columns(&cols)
}
