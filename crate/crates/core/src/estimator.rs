//! The layered Hill estimator, its tail-exponent inversion, and the limit
//! constants needed to normalize it and build confidence intervals.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::constraints::Constraint;
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::order_stats::{top_tuple_values, OrderStatStream};
use crate::scalar::{binomial, factorial, unit_ball_volume, unit_sphere_area, Scalar};

/// Half-width of the "constant" band around `d / (alpha k)` on the beta scale.
pub const DEFAULT_REGIME_TOL: f64 = 0.02;

/// Samples used for Monte Carlo constants when the caller doesn't choose.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

const MC_SEED: u64 = 0x4c48_494c_4c5f_4d43;

/// `H = m^{-k} Σ_{j <= m^k} log(U_k(j) / U_k(m^k))`.
///
/// Subsets below the cut contribute `log 1 = 0`, so only the first `m^k`
/// stream values matter.
pub fn layered_hill<F: Scalar>(stream: &OrderStatStream<F>, m: usize) -> Result<F> {
    let cut = tuple_budget(m, stream.k())?;
    let values = stream.values();
    if values.len() < cut {
        return Err(Error::InsufficientExtremes {
            requested: cut,
            found: values.len(),
        });
    }
    let top = &values[..cut];
    let denominator = top[cut - 1];
    if !(denominator > F::zero()) {
        return Err(Error::ParameterOutOfRange(format!(
            "order statistics must be positive, U(m^k) = {denominator}"
        )));
    }
    let sum = top
        .iter()
        .fold(F::zero(), |acc, &u| acc + (u / denominator).ln());
    Ok(sum / F::of_usize(cut))
}

/// `m^k`, the number of order statistics the k-th estimator consumes.
pub fn tuple_budget(m: usize, k: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::ParameterOutOfRange("m must be at least 1".into()));
    }
    u32::try_from(k)
        .ok()
        .and_then(|k| m.checked_pow(k))
        .ok_or_else(|| Error::ParameterOutOfRange(format!("m^k overflows for m = {m}, k = {k}")))
}

/// `alpha = d/k + 1/(k H)`.
pub fn alpha_hat<F: Scalar>(h: F, k: usize, d: usize) -> Result<F> {
    if !(h > F::zero()) {
        return Err(Error::NonPositiveH(h.as_f64()));
    }
    let k = F::of_usize(k);
    Ok(F::of_usize(d) / k + (k * h).recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantsMethod {
    ClosedForm,
    /// `standard_error` refers to `C_k`.
    MonteCarlo {
        sample_count: usize,
        standard_error: f64,
    },
}

/// `C_k` and `D_{k,l}` for one constraint in dimension `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricConstants<F> {
    pub k: usize,
    pub d: usize,
    #[serde(rename = "C_k")]
    pub ck: F,
    #[serde(rename = "D_kl")]
    pub dkl: BTreeMap<usize, F>,
    pub method: ConstantsMethod,
}

impl<F: Scalar> GeometricConstants<F> {
    /// Exact constants; available for `k = 1` and every kind at `k = 2`
    /// (all built-in pair constraints reduce to `|z| <= t`).
    pub fn closed_form(c: &Constraint<F>, d: usize) -> Result<Self> {
        check_dim(d)?;
        let s = unit_sphere_area::<F>(d);
        match c.arity() {
            1 => Ok(Self {
                k: 1,
                d,
                ck: s,
                dkl: BTreeMap::from([(1, F::one())]),
                method: ConstantsMethod::ClosedForm,
            }),
            2 => {
                // ∫ 1{|z| <= t} dz = κ_d t^d
                let ball = unit_ball_volume::<F>(d) * c.radius().powi(d as i32);
                Ok(Self {
                    k: 2,
                    d,
                    ck: (s * ball / F::of(2.0)).sqrt(),
                    dkl: BTreeMap::from([(1, ball * ball), (2, ball)]),
                    method: ConstantsMethod::ClosedForm,
                })
            }
            k => Err(Error::UnsupportedConstraint(format!(
                "no closed form for {} with k = {k}",
                c.kind()
            ))),
        }
    }

    /// Estimates the defining integrals by drawing every free vector uniformly
    /// from the cube `[-L, L]^d`, `L = bounding_radius(c)`, outside of which
    /// `h_k` vanishes.
    pub fn monte_carlo<R: Rng + ?Sized>(
        c: &Constraint<F>,
        d: usize,
        samples: usize,
        rng: &mut R,
    ) -> Result<Self> {
        check_dim(d)?;
        let k = c.arity();
        if k == 1 {
            return Self::closed_form(c, d);
        }
        if samples < 2 {
            return Err(Error::ParameterOutOfRange("need at least 2 Monte Carlo samples".into()));
        }
        let reach = c.bounding_radius().as_f64();
        let cube = (2.0 * reach).powi(d as i32);
        let eval = |zs: &[Vec<F>]| -> bool {
            let mut tuple: Vec<&[F]> = Vec::with_capacity(k);
            let origin = vec![F::zero(); d];
            tuple.push(&origin);
            tuple.extend(zs.iter().map(Vec::as_slice));
            c.accepts(&tuple)
        };

        // C_k: integral over (R^d)^{k-1} of h_k(0, z)
        let mut hits = 0usize;
        let mut zs: Vec<Vec<F>> = vec![vec![F::zero(); d]; 2 * k - 2];
        for _ in 0..samples {
            for z in zs.iter_mut().take(k - 1) {
                uniform_in_cube(rng, reach, z);
            }
            if eval(&zs[..k - 1]) {
                hits += 1;
            }
        }
        let n = samples as f64;
        let p = hits as f64 / n;
        let volume = cube.powi(k as i32 - 1);
        let integral = volume * p;
        let integral_se = volume * (p * (1.0 - p) / n).sqrt();
        let s = unit_sphere_area::<f64>(d);
        let kf = factorial::<f64>(k);
        let ck = (s / kf * integral).powf(1.0 / k as f64);
        let ck_se = if integral > 0.0 {
            ck / k as f64 * integral_se / integral
        } else {
            f64::INFINITY
        };

        // D_{k,l}: 2k - l - 1 free vectors; the first l - 1 are shared
        let mut dkl = BTreeMap::new();
        for l in 1..=k {
            let free = 2 * k - l - 1;
            let mut hits = 0usize;
            let mut second: Vec<Vec<F>> = Vec::with_capacity(k - 1);
            for _ in 0..samples {
                for z in zs.iter_mut().take(free) {
                    uniform_in_cube(rng, reach, z);
                }
                if !eval(&zs[..k - 1]) {
                    continue;
                }
                second.clear();
                second.extend(zs[..l - 1].iter().cloned());
                second.extend(zs[k - 1..free].iter().cloned());
                if eval(&second) {
                    hits += 1;
                }
            }
            let value = cube.powi(free as i32) * hits as f64 / n;
            dkl.insert(l, F::of(value));
        }

        Ok(Self {
            k,
            d,
            ck: F::of(ck),
            dkl,
            method: ConstantsMethod::MonteCarlo {
                sample_count: samples,
                standard_error: ck_se,
            },
        })
    }

    pub fn dkl(&self, l: usize) -> Result<F> {
        self.dkl
            .get(&l)
            .copied()
            .ok_or_else(|| Error::ParameterOutOfRange(format!("no D_{{k,l}} for l = {l}")))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::ParameterOutOfRange("dimension must be positive".into()));
    }
    Ok(())
}

fn uniform_in_cube<F: Scalar, R: Rng + ?Sized>(rng: &mut R, half_width: f64, out: &mut [F]) {
    for o in out.iter_mut() {
        *o = F::of(half_width * (2.0 * rng.random::<f64>() - 1.0));
    }
}

/// Closed form where one exists, otherwise Monte Carlo with a fixed seed.
/// Passing `mc_samples` forces the Monte Carlo route for `k >= 2`.
pub fn geometric_constants<F: Scalar>(
    c: &Constraint<F>,
    d: usize,
    mc_samples: Option<usize>,
) -> Result<GeometricConstants<F>> {
    match (c.arity(), mc_samples) {
        (1, _) | (2, None) => GeometricConstants::closed_form(c, d),
        (_, samples) => {
            let mut rng = ChaCha8Rng::seed_from_u64(MC_SEED);
            GeometricConstants::monte_carlo(
                c,
                d,
                samples.unwrap_or(DEFAULT_MC_SAMPLES),
                &mut rng,
            )
        }
    }
}

fn check_exponent<F: Scalar>(k: usize, l: usize, d: usize, alpha: F) -> Result<()> {
    if l == 0 || l > k {
        return Err(Error::ParameterOutOfRange(format!("need 1 <= l <= k, got l = {l}, k = {k}")));
    }
    if !(alpha * F::of_usize(k) > F::of_usize(d)) {
        return Err(Error::ParameterOutOfRange(format!(
            "need alpha k > d, got alpha = {alpha}, k = {k}, d = {d}"
        )));
    }
    Ok(())
}

/// `L_{k,l} = C(k,l) (αk-d) / ((k-l)! (α(2k-l)-d)) · D_{k,l} / D_{k,k}`.
pub fn limit_coeff_lkl<F: Scalar>(
    k: usize,
    l: usize,
    d: usize,
    alpha: F,
    gc: &GeometricConstants<F>,
) -> Result<F> {
    check_exponent(k, l, d, alpha)?;
    let df = F::of_usize(d);
    let main = alpha * F::of_usize(k) - df;
    let cross = alpha * F::of_usize(2 * k - l) - df;
    let ratio = gc.dkl(l)? / gc.dkl(k)?;
    Ok(binomial::<F>(k, l) * main / (factorial::<F>(k - l) * cross) * ratio)
}

/// `A_{k,l,α} = L_{k,l} ((α(2k-l)-d)^2 - 2α(k-l)(αk-d)) / ((α(2k-l)-d)^2 (αk-d)^2)`.
pub fn variance_constant_a<F: Scalar>(
    k: usize,
    l: usize,
    d: usize,
    alpha: F,
    gc: &GeometricConstants<F>,
) -> Result<F> {
    let lkl = limit_coeff_lkl(k, l, d, alpha, gc)?;
    let df = F::of_usize(d);
    let main = alpha * F::of_usize(k) - df;
    let cross = alpha * F::of_usize(2 * k - l) - df;
    let numer = cross * cross - F::of(2.0) * alpha * F::of_usize(k - l) * main;
    Ok(lkl * numer / (cross * cross * main * main))
}

/// Limit of `n f(R_k(C_k n / m))`, which picks the normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime<F> {
    Vanishing,
    Constant { xi: Option<F> },
    Diverging,
}

impl<F> Regime<F> {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Vanishing => "vanishing",
            Regime::Constant { .. } => "constant",
            Regime::Diverging => "diverging",
        }
    }
}

/// Compares `beta` (with `m = n^beta`) to `d / (alpha_hat k)`: below the
/// threshold the limit vanishes, above it diverges, within `tol` it is
/// treated as constant.
pub fn select_regime<F: Scalar>(beta: F, k: usize, d: usize, alpha_hat: F, tol: F) -> Regime<F> {
    let threshold = F::of_usize(d) / (alpha_hat * F::of_usize(k));
    if beta < threshold - tol {
        Regime::Vanishing
    } else if beta > threshold + tol {
        Regime::Diverging
    } else {
        Regime::Constant { xi: None }
    }
}

/// Asymptotic variance of the normalized estimator in `regime`.
pub fn regime_variance<F: Scalar>(
    regime: &Regime<F>,
    k: usize,
    d: usize,
    alpha: F,
    gc: &GeometricConstants<F>,
) -> Result<F> {
    match regime {
        Regime::Vanishing => variance_constant_a(k, k, d, alpha, gc),
        Regime::Constant { xi: None } => Err(Error::MissingXi),
        Regime::Constant { xi: Some(xi) } => (1..=k).try_fold(F::zero(), |acc, l| {
            Ok(acc + xi.powi((k - l) as i32) * variance_constant_a(k, l, d, alpha, gc)?)
        }),
        Regime::Diverging => variance_constant_a(k, 1, d, alpha, gc),
    }
}

/// `m^{k/2} V^{-1/2} (H - 1/(α_c k - d))`, with `V` the regime variance at
/// `alpha_for_variance`. Only normalizations computable from the sample are
/// supported: the diverging regime needs `n f(R_k)` unless `k = 1`.
#[allow(clippy::too_many_arguments)]
pub fn normalized_statistic<F: Scalar>(
    h: F,
    k: usize,
    d: usize,
    m: usize,
    alpha_center: F,
    alpha_for_variance: F,
    regime: &Regime<F>,
    gc: &GeometricConstants<F>,
) -> Result<F> {
    if matches!(regime, Regime::Diverging) && k > 1 {
        return Err(Error::UnsupportedRegime { k });
    }
    check_exponent(k, k, d, alpha_center)?;
    let variance = regime_variance(regime, k, d, alpha_for_variance, gc)?;
    let center = (alpha_center * F::of_usize(k) - F::of_usize(d)).recip();
    let scale = F::of_usize(m).powf(F::of_usize(k) / F::of(2.0));
    Ok(scale * (h - center) / variance.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval<F> {
    pub lower: F,
    pub upper: F,
    pub gamma: F,
}

impl<F: Scalar> ConfidenceInterval<F> {
    pub fn contains(&self, alpha: F) -> bool {
        self.lower <= alpha && alpha <= self.upper
    }
}

/// Level-`gamma` interval for alpha under the vanishing regime, with the
/// symmetric quantile split `c_U = -c_L`.
pub fn confidence_interval<F: Scalar>(
    h: F,
    k: usize,
    d: usize,
    m: usize,
    gamma: F,
    gc: &GeometricConstants<F>,
) -> Result<ConfidenceInterval<F>> {
    if !(gamma >= F::zero() && gamma < F::one()) {
        return Err(Error::ProbabilityOutOfRange(gamma.as_f64()));
    }
    let a_hat = alpha_hat(h, k, d)?;
    let variance = variance_constant_a(k, k, d, a_hat, gc)?;
    let c_upper = inverse_normal_cdf((F::one() + gamma) / F::of(2.0))?;
    let c_lower = -c_upper;
    let spread = F::of_usize(m).powf(-F::of_usize(k) / F::of(2.0)) * variance.sqrt();
    let kf = F::of_usize(k);
    let df = F::of_usize(d);
    let endpoint = |c: F| -> Result<F> {
        let denom = h - c * spread;
        if !(denom > F::zero()) {
            return Err(Error::DegenerateInterval);
        }
        Ok((denom.recip() + df) / kf)
    };
    Ok(ConfidenceInterval {
        lower: endpoint(c_lower)?,
        upper: endpoint(c_upper)?,
        gamma,
    })
}

/// Radius scale of the k-th layer for `f(r) = C r^{-α} 1{r >= 1}`:
/// the exact solution of `t^k R^d f(R)^k = αk - d`.
pub fn theoretical_radius_rk<F: Scalar>(t: F, k: usize, d: usize, alpha: F, power_law_c: F) -> Result<F> {
    check_exponent(k, k, d, alpha)?;
    if !(t > F::zero()) || !(power_law_c > F::zero()) {
        return Err(Error::ParameterOutOfRange("t and C must be positive".into()));
    }
    let kf = F::of_usize(k);
    let excess = alpha * kf - F::of_usize(d);
    Ok(((t * power_law_c).powf(kf) / excess).powf(excess.recip()))
}

/// Standard normal quantile.
pub fn inverse_normal_cdf<F: Scalar>(p: F) -> Result<F> {
    let p = p.as_f64();
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(F::of(Normal::standard().inverse_cdf(p)))
}

/// Point estimate with everything needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport<F> {
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub h: F,
    pub alpha_hat: F,
    /// `U_k(m^k)`.
    pub denominator: F,
    pub regime: Regime<F>,
    /// `None` when the regime's variance needs an unknown `xi`.
    pub variance_a: Option<F>,
    /// `None` when `τ_{k,n}` involves the unobservable `n f(R_k)`.
    pub tau: Option<F>,
    pub ci: Option<ConfidenceInterval<F>>,
}

impl<F: Scalar + Serialize> Serialize for EstimateReport<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Flat<'a, F> {
            k: usize,
            d: usize,
            m: usize,
            #[serde(rename = "H")]
            h: &'a F,
            alpha_hat: &'a F,
            regime: &'static str,
            #[serde(rename = "variance_A")]
            variance_a: Option<&'a F>,
            tau: Option<&'a F>,
            ci_lower: Option<&'a F>,
            ci_upper: Option<&'a F>,
            gamma: Option<&'a F>,
        }
        Flat {
            k: self.k,
            d: self.d,
            m: self.m,
            h: &self.h,
            alpha_hat: &self.alpha_hat,
            regime: self.regime.name(),
            variance_a: self.variance_a.as_ref(),
            tau: self.tau.as_ref(),
            ci_lower: self.ci.as_ref().map(|c| &c.lower),
            ci_upper: self.ci.as_ref().map(|c| &c.upper),
            gamma: self.ci.as_ref().map(|c| &c.gamma),
        }
        .serialize(serializer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions<F> {
    /// Confidence level; no interval when `None`.
    pub gamma: Option<F>,
    /// `log m / log n` when `None`.
    pub beta: Option<F>,
    pub regime_tol: F,
    pub xi: Option<F>,
}

impl<F: Scalar> Default for EstimateOptions<F> {
    fn default() -> Self {
        Self {
            gamma: None,
            beta: None,
            regime_tol: F::of(DEFAULT_REGIME_TOL),
            xi: None,
        }
    }
}

/// Runs the k-th layered estimator on a cloud end to end.
///
/// A degenerate confidence interval is reported as absent rather than as an
/// error; the point estimate is still meaningful.
pub fn estimate<F: Scalar>(
    cloud: &PointCloud<F>,
    constraint: &Constraint<F>,
    m: usize,
    gc: &GeometricConstants<F>,
    opts: &EstimateOptions<F>,
) -> Result<EstimateReport<F>> {
    let k = constraint.arity();
    let d = cloud.dim();
    if gc.k != k || gc.d != d {
        return Err(Error::ParameterOutOfRange(format!(
            "constants are for k = {}, d = {}, estimator has k = {k}, d = {d}",
            gc.k, gc.d
        )));
    }
    let budget = tuple_budget(m, k)?;
    let stream = top_tuple_values(cloud, constraint, budget)?;
    let h = layered_hill(&stream, m)?;
    let a_hat = alpha_hat(h, k, d)?;
    let beta = match opts.beta {
        Some(b) => b,
        None if cloud.len() > 1 => F::of_usize(m).ln() / F::of_usize(cloud.len()).ln(),
        None => F::zero(),
    };
    let regime = match select_regime(beta, k, d, a_hat, opts.regime_tol) {
        Regime::Constant { .. } => Regime::Constant { xi: opts.xi },
        r => r,
    };
    let variance_a = match regime_variance(&regime, k, d, a_hat, gc) {
        Ok(v) => Some(v),
        Err(Error::MissingXi) => None,
        Err(e) => return Err(e),
    };
    let mk = F::of_usize(budget);
    let tau = match regime {
        Regime::Diverging if k > 1 => None,
        _ => Some(mk),
    };
    let ci = match opts.gamma {
        Some(gamma) => match confidence_interval(h, k, d, m, gamma, gc) {
            Ok(ci) => Some(ci),
            Err(Error::DegenerateInterval) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    Ok(EstimateReport {
        k,
        d,
        m,
        h,
        alpha_hat: a_hat,
        denominator: stream.values()[budget - 1],
        regime,
        variance_a,
        tau,
        ci,
    })
}
