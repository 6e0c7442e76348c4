//! Geometric indicators `h_k` on k-point tuples.
//!
//! Every built-in kind depends only on pairwise distances, so it is invariant
//! under permutations and common translations of its arguments, and it
//! vanishes on tuples whose diameter exceeds [`Constraint::bounding_radius`].

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::distance;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `h_1 ≡ 1`; arity 1 only.
    AlwaysOne,
    /// `|x_1 - x_2| <= t`; arity 2 only.
    PairDistance,
    /// All pairwise distances `<= t`.
    Diameter,
    /// The geometric graph with connection radius `t` is connected.
    GeometricConnectivity,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::AlwaysOne => "always_one",
            ConstraintKind::PairDistance => "pair_distance",
            ConstraintKind::Diameter => "diameter",
            ConstraintKind::GeometricConnectivity => "connectivity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "always_one" => ConstraintKind::AlwaysOne,
            "pair_distance" => ConstraintKind::PairDistance,
            "diameter" => ConstraintKind::Diameter,
            "connectivity" => ConstraintKind::GeometricConnectivity,
            _ => return None,
        })
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint<F> {
    arity: usize,
    kind: ConstraintKind,
    radius: F,
}

impl<F: Scalar> Constraint<F> {
    pub fn new(kind: ConstraintKind, arity: usize, radius: F) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidConstraint(msg));
        match kind {
            ConstraintKind::AlwaysOne if arity != 1 => {
                return bad(format!("always_one has arity 1, got {arity}"))
            }
            ConstraintKind::PairDistance if arity != 2 => {
                return bad(format!("pair_distance has arity 2, got {arity}"))
            }
            ConstraintKind::Diameter | ConstraintKind::GeometricConnectivity if arity < 2 => {
                return bad(format!("{kind} needs arity >= 2, got {arity}"))
            }
            _ => {}
        }
        let radius = if kind == ConstraintKind::AlwaysOne {
            F::zero()
        } else {
            if !(radius >= F::zero()) || !radius.is_finite() {
                return bad(format!("radius must be finite and non-negative, got {radius}"));
            }
            radius
        };
        Ok(Self { arity, kind, radius })
    }

    pub fn always_one() -> Self {
        Self {
            arity: 1,
            kind: ConstraintKind::AlwaysOne,
            radius: F::zero(),
        }
    }

    pub fn pair_distance(t: F) -> Result<Self> {
        Self::new(ConstraintKind::PairDistance, 2, t)
    }

    pub fn diameter(k: usize, t: F) -> Result<Self> {
        Self::new(ConstraintKind::Diameter, k, t)
    }

    pub fn connectivity(k: usize, t: F) -> Result<Self> {
        Self::new(ConstraintKind::GeometricConnectivity, k, t)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn radius(&self) -> F {
        self.radius
    }

    /// The constant `L` with `h_k = 0` whenever the tuple diameter exceeds `L`.
    /// Tight for every built-in kind.
    pub fn bounding_radius(&self) -> F {
        match self.kind {
            ConstraintKind::AlwaysOne => F::zero(),
            ConstraintKind::PairDistance | ConstraintKind::Diameter => self.radius,
            ConstraintKind::GeometricConnectivity => F::of_usize(self.arity - 1) * self.radius,
        }
    }

    /// Evaluates `h_k` on a tuple, checking arity and dimensions.
    pub fn evaluate(&self, tuple: &[&[F]]) -> Result<bool> {
        if tuple.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: tuple.len(),
            });
        }
        if let Some(first) = tuple.first() {
            if let Some(bad) = tuple.iter().find(|p| p.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        Ok(self.accepts(tuple))
    }

    /// Unchecked evaluation used on hot paths where arity is already known.
    pub(crate) fn accepts(&self, tuple: &[&[F]]) -> bool {
        let t = self.radius;
        match self.kind {
            ConstraintKind::AlwaysOne => true,
            ConstraintKind::PairDistance | ConstraintKind::Diameter => {
                for (i, a) in tuple.iter().enumerate() {
                    for b in &tuple[i + 1..] {
                        if distance(a, b) > t {
                            return false;
                        }
                    }
                }
                true
            }
            ConstraintKind::GeometricConnectivity => connected(tuple, t),
        }
    }
}

/// Union-find over the pairwise `<= t` edges.
fn connected<F: Scalar>(tuple: &[&[F]], t: F) -> bool {
    let k = tuple.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = k;
    for i in 0..k {
        for j in i + 1..k {
            if distance(tuple[i], tuple[j]) <= t {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                    components -= 1;
                    if components == 1 {
                        return true;
                    }
                }
            }
        }
    }
    components <= 1
}
