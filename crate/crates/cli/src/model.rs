//! Space + distribution pairs with their analytic bounds.

use rand_chacha::ChaCha8Rng;

use quantbound_core::quant_bounds::{lower_bound_ln, upper_bound_un, QuantQuery};
use quantbound_core::regularity::RegularityCertificate;
use quantbound_core::spaces::grassmann::{grassmann_lower_ln, grassmann_upper_un, grassmann_volume, Subspace};
use quantbound_core::spaces::selfsimilar::cantor_exact_vn;
use quantbound_core::spaces::sphere::{
    limit_certificates, sphere_cap_measure, sphere_certificates, sphere_lower_ln, sphere_upper_un,
};
use quantbound_core::spaces::{Grassmannian, Hypersphere, SelfSimilarSet, SpaceModel, UnitInterval, VonMisesFisher};
use quantbound_core::stats;
use quantbound_core::{Error, Result};

use crate::config::{DistributionConfig, Params};
use crate::error::CliError;

/// Generalized entropy and density norm of the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    pub entropy: f64,
    pub p: f64,
    pub sigma_p: f64,
}

impl Density {
    const UNIFORM: Density = Density {
        entropy: 0.0,
        p: 1.0,
        sigma_p: 1.0,
    };
}

/// Everything a task needs from a configured space.
pub trait Model: Sync {
    type S: SpaceModel;

    fn space(&self) -> &Self::S;

    fn density(&self) -> Density;

    /// Draws from the source distribution; `None` when it cannot be sampled.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<<Self::S as SpaceModel>::Point>;

    fn can_sample(&self) -> bool;

    /// Sub certificate and optional super certificate; `radius` is a hint for
    /// spaces whose certificates depend on δ0.
    fn certificates(&self, radius: Option<f64>) -> Result<(RegularityCertificate, Option<RegularityCertificate>)>;

    fn lower(&self, n: f64) -> Result<f64>;

    fn upper(&self, n: f64) -> Result<f64>;

    fn exact(&self, _n: u64) -> Option<f64> {
        None
    }

    /// k/m for the scaled columns.
    fn exponent(&self) -> Result<f64> {
        let (sub, _) = self.certificates(None)?;
        Ok(sub.k / sub.m)
    }

    /// Sub certificate used for R^L at distortion D.
    fn rd_certificate(&self, _d: f64) -> Result<RegularityCertificate> {
        Ok(self.certificates(None)?.0)
    }

    /// Certificate whose (m, c, k) define the small-D reference h + F.
    fn reference_certificate(&self) -> Result<RegularityCertificate> {
        Ok(self.certificates(None)?.0)
    }

    /// Ball-volume law (lower, upper) at radius δ around `volume_center`.
    fn volume_law(&self, delta: f64) -> Result<(f64, f64)>;

    fn volume_center(&self, seed: u64) -> <Self::S as SpaceModel>::Point;

    fn id(&self) -> String {
        self.space().id()
    }
}

fn uniform_only(dist: &DistributionConfig, space: &str) -> std::result::Result<Density, CliError> {
    match dist {
        DistributionConfig::Uniform => Ok(Density::UNIFORM),
        DistributionConfig::Custom { entropy, p, sigma_p } => Ok(Density {
            entropy: *entropy,
            p: *p,
            sigma_p: *sigma_p,
        }),
        DistributionConfig::Vmf { .. } => Err(CliError::Config(format!(
            "distribution.type vmf is only available on a sphere, not on {space}"
        ))),
    }
}

fn sampleable(dist: &DistributionConfig) -> bool {
    !matches!(dist, DistributionConfig::Custom { .. })
}

pub struct SphereModel {
    pub space: Hypersphere,
    d: u32,
    r: f64,
    ambient: bool,
    vmf: Option<VonMisesFisher>,
    density: Density,
    sampleable: bool,
    alpha: f64,
    rd_alpha: f64,
    delta0: Option<f64>,
}

impl SphereModel {
    pub fn new(d: u32, r: f64, ambient: bool, dist: &DistributionConfig, params: &Params) -> std::result::Result<Self, CliError> {
        let space = Hypersphere::new(d, r)?.with_ambient_codewords(ambient);
        let (vmf, density) = match dist {
            DistributionConfig::Vmf { kappa, mean } => {
                let mean = mean.clone().unwrap_or_else(|| {
                    let mut m = vec![0.0; d as usize];
                    m[d as usize - 1] = 1.0;
                    m
                });
                if mean.len() != d as usize {
                    return Err(CliError::Config(format!(
                        "distribution.mean has length {} but the sphere lives in ℝ^{d}",
                        mean.len()
                    )));
                }
                let v = VonMisesFisher::new(&mean, *kappa)?;
                let f = v.functionals();
                let density = Density {
                    entropy: f.entropy,
                    p: 1.0,
                    sigma_p: f.sigma_1,
                };
                (Some(v), density)
            }
            other => (None, uniform_only(other, "sphere")?),
        };
        Ok(Self {
            space,
            d,
            r,
            ambient,
            vmf,
            density,
            sampleable: sampleable(dist),
            alpha: params.alpha,
            rd_alpha: params.rd_alpha,
            delta0: params.delta0,
        })
    }
}

impl Model for SphereModel {
    type S = Hypersphere;

    fn space(&self) -> &Hypersphere {
        &self.space
    }

    fn density(&self) -> Density {
        self.density
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        if !self.sampleable {
            return None;
        }
        Some(match &self.vmf {
            Some(v) => v.sample_on(rng, self.r),
            None => self.space.sample_uniform(rng),
        })
    }

    fn can_sample(&self) -> bool {
        self.sampleable
    }

    fn certificates(&self, radius: Option<f64>) -> Result<(RegularityCertificate, Option<RegularityCertificate>)> {
        let delta0 = radius.or(self.delta0).unwrap_or(self.r);
        sphere_certificates(self.d, self.r, delta0, self.ambient)
    }

    fn lower(&self, n: f64) -> Result<f64> {
        let Density { p, sigma_p, .. } = self.density;
        if self.ambient {
            let (sub, _) = self.certificates(Some(self.r))?;
            return lower_bound_ln(&QuantQuery::new(n).with_sub(sub).with_density(p, sigma_p));
        }
        sphere_lower_ln(self.d, self.r, n, p, sigma_p)
    }

    fn upper(&self, n: f64) -> Result<f64> {
        if self.vmf.is_some() {
            return Err(Error::Inapplicable {
                what: "sphere_upper_un",
                why: "the upper bound is for the uniform law".into(),
            });
        }
        sphere_upper_un(self.d, self.r, n, self.alpha)
    }

    fn exponent(&self) -> Result<f64> {
        Ok(2.0 / (self.d - 1) as f64)
    }

    /// δ_D = min{D^α, r}.
    fn rd_certificate(&self, d: f64) -> Result<RegularityCertificate> {
        if !(self.rd_alpha > 0.0 && self.rd_alpha < 0.5) {
            return Err(Error::Domain {
                op: "sphere_rd_lower",
                detail: format!("α = {} must lie in (0, 1/2)", self.rd_alpha),
            });
        }
        if !(d > 0.0) {
            return Err(Error::Domain {
                op: "sphere_rd_lower",
                detail: "D must be positive".into(),
            });
        }
        Ok(sphere_certificates(self.d, self.r, d.powf(self.rd_alpha).min(self.r), self.ambient)?.0)
    }

    fn reference_certificate(&self) -> Result<RegularityCertificate> {
        Ok(limit_certificates(self.d, self.r)?.0)
    }

    fn volume_law(&self, delta: f64) -> Result<(f64, f64)> {
        let v = sphere_cap_measure(self.d, self.r, delta, true)?;
        Ok((v, v))
    }

    fn volume_center(&self, _seed: u64) -> Vec<f64> {
        let mut c = vec![0.0; self.d as usize];
        c[0] = self.r;
        c
    }
}

pub struct IntervalModel {
    pub space: UnitInterval,
    density: Density,
    uniform: bool,
}

impl IntervalModel {
    pub fn new(dist: &DistributionConfig) -> std::result::Result<Self, CliError> {
        Ok(Self {
            space: UnitInterval,
            density: uniform_only(dist, "interval")?,
            uniform: sampleable(dist),
        })
    }
}

impl Model for IntervalModel {
    type S = UnitInterval;

    fn space(&self) -> &UnitInterval {
        &self.space
    }

    fn density(&self) -> Density {
        self.density
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<f64> {
        self.uniform.then(|| self.space.sample_reference(rng))
    }

    fn can_sample(&self) -> bool {
        self.uniform
    }

    fn certificates(&self, _radius: Option<f64>) -> Result<(RegularityCertificate, Option<RegularityCertificate>)> {
        Ok((self.space.sub_certificate()?, Some(self.space.sup_certificate()?)))
    }

    fn lower(&self, n: f64) -> Result<f64> {
        let (sub, _) = self.certificates(None)?;
        lower_bound_ln(&QuantQuery::new(n).with_sub(sub).with_density(self.density.p, self.density.sigma_p))
    }

    fn upper(&self, n: f64) -> Result<f64> {
        if !self.uniform {
            return Err(Error::Inapplicable {
                what: "upper_bound_un",
                why: "the upper bound is for the uniform law".into(),
            });
        }
        let sup = self.space.sup_certificate()?;
        upper_bound_un(&QuantQuery::new(n).with_sup(sup).with_beta(self.space.diameter()))
    }

    fn exact(&self, n: u64) -> Option<f64> {
        self.uniform.then(|| self.space.exact_vn(n))
    }

    fn volume_law(&self, delta: f64) -> Result<(f64, f64)> {
        let v = (2.0 * delta).min(1.0);
        Ok((v, v))
    }

    fn volume_center(&self, _seed: u64) -> f64 {
        0.5
    }
}

pub struct GrassmannModel {
    pub space: Grassmannian,
    density: Density,
    uniform: bool,
    alpha: f64,
    delta0: f64,
    exact_inversion: bool,
}

impl GrassmannModel {
    pub fn new(g: Grassmannian, dist: &DistributionConfig, params: &Params) -> std::result::Result<Self, CliError> {
        Ok(Self {
            space: g,
            density: uniform_only(dist, "grassmann")?,
            uniform: sampleable(dist),
            alpha: params.alpha,
            delta0: params.delta0.unwrap_or(1.0),
            exact_inversion: params.exact_inversion,
        })
    }
}

impl Model for GrassmannModel {
    type S = Grassmannian;

    fn space(&self) -> &Grassmannian {
        &self.space
    }

    fn density(&self) -> Density {
        self.density
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Subspace> {
        self.uniform.then(|| self.space.sample_reference(rng))
    }

    fn can_sample(&self) -> bool {
        self.uniform
    }

    fn certificates(&self, radius: Option<f64>) -> Result<(RegularityCertificate, Option<RegularityCertificate>)> {
        let (sub, sup) = self.space.certificates(radius.unwrap_or(self.delta0))?;
        Ok((sub, Some(sup)))
    }

    fn lower(&self, n: f64) -> Result<f64> {
        grassmann_lower_ln(&self.space, n, self.density.p, self.density.sigma_p, self.exact_inversion)
    }

    fn upper(&self, n: f64) -> Result<f64> {
        if !self.uniform {
            return Err(Error::Inapplicable {
                what: "grassmann_upper_un",
                why: "the upper bound is for the uniform law".into(),
            });
        }
        grassmann_upper_un(&self.space, n, self.alpha)
    }

    fn exponent(&self) -> Result<f64> {
        Ok(2.0 / self.space.m_g())
    }

    fn volume_law(&self, delta: f64) -> Result<(f64, f64)> {
        let g = &self.space;
        Ok(grassmann_volume(g.field, g.r, g.s, g.d, delta)?.range())
    }

    fn volume_center(&self, _seed: u64) -> Subspace {
        let g = &self.space;
        Subspace::from_fn(g.d, g.s, |i, j| if i == j { 1.0.into() } else { 0.0.into() })
    }
}

pub struct FractalModel {
    pub space: SelfSimilarSet,
    density: Density,
    uniform: bool,
}

impl FractalModel {
    pub fn new(set: SelfSimilarSet, dist: &DistributionConfig) -> std::result::Result<Self, CliError> {
        Ok(Self {
            space: set,
            density: uniform_only(dist, "selfsimilar")?,
            uniform: sampleable(dist),
        })
    }
}

impl Model for FractalModel {
    type S = SelfSimilarSet;

    fn space(&self) -> &SelfSimilarSet {
        &self.space
    }

    fn density(&self) -> Density {
        self.density
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        self.uniform.then(|| self.space.sample_point(rng))
    }

    fn can_sample(&self) -> bool {
        self.uniform
    }

    fn certificates(&self, _radius: Option<f64>) -> Result<(RegularityCertificate, Option<RegularityCertificate>)> {
        let (sub, sup) = self.space.certificates()?;
        Ok((sub, Some(sup)))
    }

    fn lower(&self, n: f64) -> Result<f64> {
        let (sub, _) = self.certificates(None)?;
        lower_bound_ln(&QuantQuery::new(n).with_sub(sub).with_density(self.density.p, self.density.sigma_p))
    }

    fn upper(&self, n: f64) -> Result<f64> {
        if !self.uniform {
            return Err(Error::Inapplicable {
                what: "upper_bound_un",
                why: "the upper bound is for the natural measure".into(),
            });
        }
        let (_, sup) = self.space.certificates()?;
        upper_bound_un(&QuantQuery::new(n).with_sup(sup).with_beta(self.space.diam()))
    }

    fn exact(&self, n: u64) -> Option<f64> {
        if self.uniform && self.space.is_cantor() && self.space.ambient {
            cantor_exact_vn(n).ok()
        } else {
            None
        }
    }

    fn volume_law(&self, delta: f64) -> Result<(f64, f64)> {
        let (sub, sup) = self.space.certificates()?;
        let lower = if delta <= sup.delta0 { sup.ball_bound(delta) } else { 0.0 };
        Ok((lower, sub.ball_bound(delta).min(1.0)))
    }

    fn volume_center(&self, seed: u64) -> Vec<f64> {
        self.space.sample_point(&mut stats::stream(seed, 0xCE17, 0))
    }
}
