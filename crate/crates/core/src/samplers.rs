//! Spherically symmetric heavy-tailed clouds and missing-extremes censoring.
//!
//! Directions are uniform on the sphere (normalized Gaussian vectors); the
//! families differ in the radial law:
//!
//! * `PowerLaw`: density `C |x|^{-α} 1{|x| >= 1}` with `C = (α - d) / s_{d-1}`,
//!   so `P(|X| > r) = r^{d-α}` and `|X| = u^{-1/(α-d)}`.
//! * `FrechetRadial`: `|X|` is α-Fréchet, `|X| = (-ln u)^{-1/α}`.
//! * `IsotropicStable`: sub-Gaussian α-stable vector `X = sqrt(2Λ) G` with
//!   `G ~ N(0, I_d)` and `Λ ~ S_{α/2}(cos(πα/4)^{2/α}, 1, 0)` drawn by
//!   Chambers–Mallows–Stuck. This is the scale convention under which
//!   `E exp(i<u, X>) = exp(-|u|^α)`; it is fixed for every experiment.
//!
//! For the last two families the density of `X` decays like `|x|^{-(α+d)}`,
//! which is the exponent the layered estimators recover.

use rand::distr::{Distribution, Open01, OpenClosed01};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::scalar::{unit_sphere_area, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadialFamily {
    PowerLaw,
    IsotropicStable,
    FrechetRadial,
}

impl RadialFamily {
    pub fn name(self) -> &'static str {
        match self {
            RadialFamily::PowerLaw => "power_law",
            RadialFamily::IsotropicStable => "stable",
            RadialFamily::FrechetRadial => "frechet",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "power_law" => RadialFamily::PowerLaw,
            "stable" => RadialFamily::IsotropicStable,
            "frechet" => RadialFamily::FrechetRadial,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialModel<F> {
    family: RadialFamily,
    alpha: F,
    d: usize,
}

impl<F: Scalar> RadialModel<F> {
    pub fn new(family: RadialFamily, alpha: F, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ParameterOutOfRange("dimension must be positive".into()));
        }
        let ok = alpha.is_finite()
            && match family {
                RadialFamily::PowerLaw => alpha > F::of_usize(d),
                RadialFamily::IsotropicStable => alpha > F::zero() && alpha < F::of(2.0),
                RadialFamily::FrechetRadial => alpha > F::zero(),
            };
        if !ok {
            return Err(Error::ParameterOutOfRange(format!(
                "alpha = {alpha} is not valid for {} in d = {d}",
                family.name()
            )));
        }
        Ok(Self { family, alpha, d })
    }

    pub fn power_law(alpha: F, d: usize) -> Result<Self> {
        Self::new(RadialFamily::PowerLaw, alpha, d)
    }

    pub fn family(&self) -> RadialFamily {
        self.family
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `C = (α - d) / s_{d-1}` for the power law, `None` otherwise.
    pub fn power_law_normalizer(&self) -> Option<F> {
        (self.family == RadialFamily::PowerLaw)
            .then(|| (self.alpha - F::of_usize(self.d)) / unit_sphere_area::<F>(self.d))
    }

    /// Regular-variation exponent of the density of `X` in `R^d`.
    pub fn density_tail_exponent(&self) -> F {
        match self.family {
            RadialFamily::PowerLaw => self.alpha,
            RadialFamily::IsotropicStable | RadialFamily::FrechetRadial => {
                self.alpha + F::of_usize(self.d)
            }
        }
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<F>) {
        let a = self.alpha.as_f64();
        let d = self.d;
        match self.family {
            RadialFamily::PowerLaw => {
                let u: f64 = OpenClosed01.sample(rng);
                push_scaled_direction(rng, d, power_law_radius(u, a, d), out);
            }
            RadialFamily::FrechetRadial => {
                let u: f64 = Open01.sample(rng);
                push_scaled_direction(rng, d, frechet_radius(u, a), out);
            }
            RadialFamily::IsotropicStable => {
                let lambda = positive_stable(rng, a / 2.0);
                let scale = (2.0 * lambda).sqrt();
                for _ in 0..d {
                    let g: f64 = rng.sample(StandardNormal);
                    out.push(F::of(scale * g));
                }
            }
        }
    }
}

/// Inverse of the power-law survival function `r^{d-α}`.
pub fn power_law_radius(u: f64, alpha: f64, d: usize) -> f64 {
    u.powf(-1.0 / (alpha - d as f64))
}

/// Inverse of the α-Fréchet distribution function `exp(-r^{-α})`.
pub fn frechet_radius(u: f64, alpha: f64) -> f64 {
    (-u.ln()).powf(-1.0 / alpha)
}

/// Totally skewed positive stable variate `S_a(cos(πa/2)^{1/a}, 1, 0)`,
/// `0 < a < 1`, whose Laplace transform is `exp(-s^a)`.
fn positive_stable<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    // Chambers–Mallows–Stuck with skewness 1: with V uniform on (-π/2, π/2)
    // and W ~ Exp(1), S_a(1, 1, 0) =
    //   S sin(a(V + B)) / cos(V)^{1/a} · (cos(V - a(V + B)) / W)^{(1-a)/a}
    // where B = atan(tan(πa/2)) / a = π/2 and S = (1 + tan²(πa/2))^{1/(2a)}
    //        = cos(πa/2)^{-1/a}. Rescaling by cos(πa/2)^{1/a} cancels S.
    let u: f64 = Open01.sample(rng);
    let v = std::f64::consts::PI * (u - 0.5);
    let w: f64 = Exp1.sample(rng);
    let shifted = a * (v + FRAC_PI_2);
    shifted.sin() / v.cos().powf(1.0 / a) * ((v - shifted).cos() / w).powf((1.0 - a) / a)
}

fn push_scaled_direction<F: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize, radius: f64, out: &mut Vec<F>) {
    let mut g = vec![0.0f64; d];
    let mut norm2 = 0.0;
    while norm2 == 0.0 {
        for x in g.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        norm2 = g.iter().map(|x| x * x).sum();
    }
    let scale = radius / norm2.sqrt();
    out.extend(g.iter().map(|x| F::of(x * scale)));
}

/// Replicate stream `stream_id` of a master seed: ChaCha8 seeded from
/// `master_seed`, positioned on its own stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededRng {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draws `n` i.i.d. points (or `N ~ Poisson(n)` points when `poissonize`).
pub fn sample_cloud<F: Scalar>(
    model: &RadialModel<F>,
    n: usize,
    seed: &SeededRng,
    poissonize: bool,
) -> Result<PointCloud<F>> {
    let mut rng = seed.rng();
    let count = if poissonize && n > 0 {
        let poisson = Poisson::new(n as f64)
            .map_err(|e| Error::ParameterOutOfRange(format!("poisson({n}): {e}")))?;
        poisson.sample(&mut rng) as usize
    } else {
        n
    };
    let d = model.dim();
    let mut coords = Vec::with_capacity(count * d);
    for _ in 0..count {
        model.sample_point(&mut rng, &mut coords);
    }
    PointCloud::from_flat(d, coords)
}

/// Drops the `remove_count` largest-norm points (ties by ascending index,
/// as in enumeration); survivors keep their relative order.
pub fn remove_top_extremes<F: Scalar>(cloud: &PointCloud<F>, remove_count: usize) -> Result<PointCloud<F>> {
    if remove_count > cloud.len() {
        return Err(Error::RemoveCountExceedsCloud {
            remove: remove_count,
            n: cloud.len(),
        });
    }
    if remove_count == 0 {
        return Ok(cloud.clone());
    }
    let order = cloud.descending_norm_order();
    let mut keep = order[remove_count..].to_vec();
    keep.sort_unstable();
    Ok(cloud.select(&keep))
}

/// `round(δ m)` with halves rounded up.
pub fn missing_count(delta: f64, m: usize) -> Result<usize> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("missing rate must be >= 0, got {delta}")));
    }
    Ok((delta * m as f64 + 0.5).floor() as usize)
}
