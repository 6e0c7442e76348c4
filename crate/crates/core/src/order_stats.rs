//! Descending order statistics `U_k(1) >= U_k(2) >= ...` of `min |y|` over
//! k-point subsets accepted by a constraint.
//!
//! [`top_tuple_values`] never looks at the full `C(n, k)` family. Points are
//! inserted into a grid in non-increasing norm order; a qualifying subset is
//! reported exactly once, when its last (minimum-norm) member arrives, and
//! only neighbors within the constraint's bounding radius can complete it.
//! The emitted stream is therefore already sorted, and the enumeration stops
//! as soon as enough values are out.

use itertools::Itertools;

use crate::constraints::Constraint;
use crate::error::{Error, Result};
use crate::geometry::{GridIndex, PointCloud};
use crate::scalar::Scalar;

/// Upper bound on subsets the brute-force oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatStream<F> {
    k: usize,
    values: Vec<F>,
    requested: usize,
    exhausted: bool,
    total_enumerated: usize,
}

impl<F: Scalar> OrderStatStream<F> {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Emitted values, non-increasing.
    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn requested(&self) -> usize {
        self.requested
    }

    /// True when fewer than `requested` qualifying subsets exist.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn total_enumerated(&self) -> usize {
        self.total_enumerated
    }

    /// Builds a stream from already-sorted values (e.g. an external source).
    pub fn from_sorted(k: usize, values: Vec<F>, requested: usize, exhausted: bool) -> Result<Self> {
        if values.windows(2).any(|w| !(w[0] >= w[1])) {
            return Err(Error::ParameterOutOfRange("stream values must be non-increasing".into()));
        }
        if !exhausted && values.len() < requested {
            return Err(Error::ParameterOutOfRange(
                "a non-exhausted stream must hold the requested count".into(),
            ));
        }
        let total_enumerated = values.len();
        Ok(Self {
            k,
            values,
            requested,
            exhausted,
            total_enumerated,
        })
    }

    /// Number of emitted values `>= threshold`.
    ///
    /// Only defined when the stream has run past the threshold or is exhausted;
    /// otherwise values at or above it may still be pending.
    pub fn count_exceedances(&self, threshold: F) -> Result<usize> {
        let determined =
            self.exhausted || self.values.last().is_some_and(|&last| last < threshold);
        if !determined {
            return Err(Error::IndeterminateCount {
                threshold: threshold.as_f64(),
            });
        }
        Ok(self.values.partition_point(|&v| v >= threshold))
    }
}

/// The `count` largest values of `min |y|` over qualifying k-subsets.
pub fn top_tuple_values<F: Scalar>(
    cloud: &PointCloud<F>,
    constraint: &Constraint<F>,
    count: usize,
) -> Result<OrderStatStream<F>> {
    let k = constraint.arity();
    if count == 0 {
        return Err(Error::ParameterOutOfRange("count must be at least 1".into()));
    }
    if k > cloud.len() {
        return Err(Error::ArityExceedsCloud { k, n: cloud.len() });
    }
    let order = cloud.descending_norm_order();
    let mut values = Vec::with_capacity(count.min(1 << 20));

    if k == 1 {
        values.extend(order.iter().take(count).map(|&i| cloud.norm(i)));
        let exhausted = values.len() < count;
        let total_enumerated = values.len();
        return Ok(OrderStatStream {
            k,
            values,
            requested: count,
            exhausted,
            total_enumerated,
        });
    }

    let reach = constraint.bounding_radius();
    let cell_size = if reach > F::zero() { reach } else { F::one() };
    let mut grid = GridIndex::empty(cloud, cell_size)?;
    let mut neighbors = Vec::new();
    let mut tuple: Vec<&[F]> = Vec::with_capacity(k);

    'outer: for &p in &order {
        let value = cloud.norm(p);
        let anchor = cloud.point(p);
        neighbors.clear();
        grid.for_each_neighbor(anchor, reach, None, |j| neighbors.push(j))?;
        if neighbors.len() >= k - 1 {
            neighbors.sort_unstable();
            for subset in neighbors.iter().combinations(k - 1) {
                tuple.clear();
                tuple.push(anchor);
                tuple.extend(subset.iter().map(|&&j| cloud.point(j)));
                if constraint.accepts(&tuple) {
                    debug_assert!(values.last().is_none_or(|&last| last >= value));
                    values.push(value);
                    if values.len() == count {
                        break 'outer;
                    }
                }
            }
        }
        grid.insert(p);
    }

    let exhausted = values.len() < count;
    let total_enumerated = values.len();
    Ok(OrderStatStream {
        k,
        values,
        requested: count,
        exhausted,
        total_enumerated,
    })
}

/// Every qualifying k-subset's `min |y|`, sorted non-increasing. Exhaustive;
/// used as an oracle for [`top_tuple_values`].
pub fn brute_force_tuple_values<F: Scalar>(
    cloud: &PointCloud<F>,
    constraint: &Constraint<F>,
) -> Result<Vec<F>> {
    let k = constraint.arity();
    let n = cloud.len();
    if k > n {
        return Err(Error::ArityExceedsCloud { k, n });
    }
    let subsets = crate::scalar::binomial::<f64>(n, k);
    if subsets > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManySubsets {
            count: subsets,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut values = Vec::new();
    let mut tuple: Vec<&[F]> = Vec::with_capacity(k);
    for subset in (0..n).combinations(k) {
        tuple.clear();
        tuple.extend(subset.iter().map(|&i| cloud.point(i)));
        if constraint.evaluate(&tuple)? {
            let min = subset
                .iter()
                .map(|&i| cloud.norm(i))
                .fold(F::infinity(), F::min);
            values.push(min);
        }
    }
    values.sort_by(|a, b| b.partial_cmp(a).expect("norms are finite"));
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 2]]) -> PointCloud<f64> {
        PointCloud::new(2, points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    const SQRT_9_25: f64 = 3.041_381_265_149_11;

    #[test]
    fn plain_order_statistics() {
        let c = cloud(&[[0.0, 2.0], [8.0, 0.0], [1.0, 0.0], [0.0, -4.0]]);
        let s = top_tuple_values(&c, &Constraint::always_one(), 3).unwrap();
        assert_eq!(s.values(), &[8.0, 4.0, 2.0]);
        assert!(!s.is_exhausted());
    }

    #[test]
    fn single_close_pair() {
        let c = cloud(&[[0.0, 0.0], [3.0, 0.0], [3.5, 0.0], [10.0, 0.0]]);
        let s = top_tuple_values(&c, &Constraint::pair_distance(1.0).unwrap(), 4).unwrap();
        assert_eq!(s.values(), &[3.0]);
        assert!(s.is_exhausted());
        assert_eq!(s.total_enumerated(), 1);
    }

    #[test]
    fn three_pairs_with_tie() {
        let c = cloud(&[[0.0, 0.0], [3.0, 0.0], [3.5, 0.0], [10.0, 0.0], [3.0, 0.5]]);
        let h = Constraint::pair_distance(1.0).unwrap();
        let s = top_tuple_values(&c, &h, 3).unwrap();
        assert_eq!(s.values().len(), 3);
        assert!((s.values()[0] - SQRT_9_25).abs() < 1e-12);
        assert_eq!(&s.values()[1..], &[3.0, 3.0]);
        assert!(!s.is_exhausted());

        let all = brute_force_tuple_values(&c, &h).unwrap();
        assert_eq!(all.len(), 3);
        assert!((all[0] - SQRT_9_25).abs() < 1e-12);
        assert_eq!(&all[1..], &[3.0, 3.0]);
    }

    #[test]
    fn zero_diameter_has_no_pairs() {
        let c = cloud(&[[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]);
        let h = Constraint::diameter(2, 0.0).unwrap();
        assert!(brute_force_tuple_values(&c, &h).unwrap().is_empty());
        let s = top_tuple_values(&c, &h, 2).unwrap();
        assert!(s.values().is_empty() && s.is_exhausted());
    }

    #[test]
    fn brute_force_k1_is_sorted_norms() {
        let c = cloud(&[[0.0, 1.0], [3.0, 4.0], [0.0, 2.0]]);
        let all = brute_force_tuple_values(&c, &Constraint::always_one()).unwrap();
        assert_eq!(all, vec![5.0, 2.0, 1.0]);
    }

    #[test]
    fn brute_force_guard() {
        let pts: Vec<Vec<f64>> = (0..1000).map(|i| vec![i as f64, 0.0]).collect();
        let c = PointCloud::new(2, pts).unwrap();
        let h = Constraint::diameter(3, 1.0).unwrap();
        assert!(matches!(
            brute_force_tuple_values(&c, &h),
            Err(Error::TooManySubsets { .. })
        ));
    }

    #[test]
    fn arity_exceeds_cloud() {
        let c = cloud(&[[0.0, 0.0]]);
        let h = Constraint::pair_distance(1.0).unwrap();
        assert!(matches!(
            top_tuple_values(&c, &h, 1),
            Err(Error::ArityExceedsCloud { k: 2, n: 1 })
        ));
    }

    #[test]
    fn exceedance_counts() {
        let s = OrderStatStream::from_sorted(2, vec![SQRT_9_25, 3.0, 3.0], 3, true).unwrap();
        assert_eq!(s.count_exceedances(3.0).unwrap(), 3);
        assert_eq!(s.count_exceedances(3.1).unwrap(), 0);
        assert_eq!(s.count_exceedances(3.02).unwrap(), 1);
        assert_eq!(s.count_exceedances(10.0).unwrap(), 0);
    }

    #[test]
    fn exceedance_count_indeterminate_on_truncated_stream() {
        let s = OrderStatStream::from_sorted(1, vec![5.0, 4.0, 3.0], 3, false).unwrap();
        assert!(matches!(
            s.count_exceedances(2.0),
            Err(Error::IndeterminateCount { .. })
        ));
        assert!(matches!(
            s.count_exceedances(3.0),
            Err(Error::IndeterminateCount { .. })
        ));
        assert_eq!(s.count_exceedances(3.5).unwrap(), 2);
    }

    #[test]
    fn connectivity_triples_match_oracle() {
        let c = cloud(&[
            [5.0, 0.0],
            [5.9, 0.0],
            [6.8, 0.0],
            [5.0, 0.8],
            [20.0, 0.0],
            [20.5, 0.5],
            [1.0, 1.0],
        ]);
        let h = Constraint::connectivity(3, 1.0).unwrap();
        let all = brute_force_tuple_values(&c, &h).unwrap();
        let s = top_tuple_values(&c, &h, 100).unwrap();
        assert_eq!(s.values(), all.as_slice());
        assert!(s.is_exhausted());
    }
}
