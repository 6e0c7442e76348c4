use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the estimators are generic over.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Scalar")
    }

    /// Widen to `f64` for reporting and error messages.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Volume of the unit ball in `R^d` (`κ_d`).
pub fn unit_ball_volume<F: Scalar>(d: usize) -> F {
    // κ_0 = 1, κ_1 = 2, κ_d = κ_{d-2} · 2π / d
    let two_pi = F::of(2.0) * F::PI();
    let mut v = if d.is_multiple_of(2) { F::one() } else { F::of(2.0) };
    let mut j = if d.is_multiple_of(2) { 2 } else { 3 };
    while j <= d {
        v = v * two_pi / F::of_usize(j);
        j += 2;
    }
    v
}

/// Surface area of the unit sphere `S^{d-1}` (`s_{d-1} = d κ_d`).
pub fn unit_sphere_area<F: Scalar>(d: usize) -> F {
    F::of_usize(d) * unit_ball_volume::<F>(d)
}

pub(crate) fn factorial<F: Scalar>(n: usize) -> F {
    (1..=n).fold(F::one(), |acc, j| acc * F::of_usize(j))
}

pub(crate) fn binomial<F: Scalar>(n: usize, r: usize) -> F {
    if r > n {
        return F::zero();
    }
    let r = r.min(n - r);
    (0..r).fold(F::one(), |acc, j| acc * F::of_usize(n - j) / F::of_usize(j + 1))
}
