//! Incrementally maintained aggregates for a set of points: count, mean,
//! and running sum of squared lengths. Adding a point adjusts all three in
//! one pass over its coordinates, so no node ever recomputes its statistics
//! from scratch; the spread (root-mean-square distance from the mean) falls
//! out of `sqrt(S/N - |M|^2)` on demand.

use crate::error::Error;
use crate::point::{SparsePoint, SparseVector};

/// Immutable aggregate snapshot; updates produce new values.
///
/// The mean is held at 64-bit precision so that long include chains do not
/// drift; it narrows to a [`SparsePoint`] only at serialization boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct StatSummary {
    n: u64,
    mean: SparseVector<f64>,
    sumsq: f64,
}

impl StatSummary {
    pub fn empty() -> Self {
        StatSummary { n: 0, mean: SparseVector::empty(), sumsq: 0.0 }
    }

    pub fn of_point(p: &SparsePoint) -> Self {
        Self::empty().include(p)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mean(&self) -> &SparseVector<f64> {
        &self.mean
    }

    /// The mean narrowed to a data point.
    pub fn mean_point(&self) -> SparsePoint {
        self.mean.quantized()
    }

    /// Running sum of squared point lengths.
    pub fn sumsq(&self) -> f64 {
        self.sumsq
    }

    /// Adds one point: count up by one, mean nudged toward the point by
    /// 1/N of the gap, sum of squares grown by the point's squared length.
    #[must_use]
    pub fn include(&self, p: &SparsePoint) -> Self {
        let n1 = self.n + 1;
        let nf = n1 as f64;
        let mean = self.mean.merge_f64(p, |m, pv| m + (pv - m) / nf);
        StatSummary { n: n1, mean, sumsq: self.sumsq + p.norm2() }
    }

    /// Removes one previously included point (the caller guarantees it was
    /// included; the summary cannot check).
    pub fn exclude(&self, p: &SparsePoint) -> Result<Self, Error> {
        if self.n == 0 {
            return Err(Error::StatsUnderflow);
        }
        let n1 = self.n - 1;
        if n1 == 0 {
            return Ok(Self::empty());
        }
        let nf = self.n as f64;
        let nf1 = n1 as f64;
        let mean = self.mean.merge_f64(p, |m, pv| (nf * m - pv) / nf1);
        Ok(StatSummary { n: n1, mean, sumsq: (self.sumsq - p.norm2()).max(0.0) })
    }

    /// Root-mean-square distance of the points from their mean.
    ///
    /// Floating cancellation can push the variance slightly negative; it is
    /// clamped to zero.
    pub fn deviation(&self) -> Result<f64, Error> {
        if self.n == 0 {
            return Err(Error::StatsEmpty);
        }
        let var = self.sumsq / self.n as f64 - self.mean.norm2();
        Ok(var.max(0.0).sqrt())
    }

    /// Combines two summaries as if their point sets were unioned.
    #[must_use]
    pub fn merge(&self, other: &Self) -> Self {
        let n1 = self.n + other.n;
        if n1 == 0 {
            return Self::empty();
        }
        let (na, nb, nn) = (self.n as f64, other.n as f64, n1 as f64);
        let mean = self.mean.merge_f64(&other.mean, |a, b| (na * a + nb * b) / nn);
        StatSummary { n: n1, mean, sumsq: self.sumsq + other.sumsq }
    }

    /// Inverse of [`merge`](Self::merge): removes a whole sub-summary in one
    /// update, used when an aggregated set is deleted wholesale.
    pub fn unmerge(&self, other: &Self) -> Result<Self, Error> {
        if other.n > self.n {
            return Err(Error::StatsUnderflow);
        }
        let n1 = self.n - other.n;
        if n1 == 0 {
            return Ok(Self::empty());
        }
        let (na, nb, nn) = (self.n as f64, other.n as f64, n1 as f64);
        let mean = self.mean.merge_f64(&other.mean, |a, b| (na * a - nb * b) / nn);
        Ok(StatSummary { n: n1, mean, sumsq: (self.sumsq - other.sumsq).max(0.0) })
    }

    pub(crate) fn from_parts(n: u64, mean: SparseVector<f64>, sumsq: f64) -> Self {
        StatSummary { n, mean, sumsq }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(pairs: &[(u32, f32)]) -> SparsePoint {
        SparsePoint::from_pairs(pairs.to_vec()).unwrap()
    }

    fn one_d(v: f32) -> SparsePoint {
        if v == 0.0 { SparsePoint::empty() } else { pt(&[(0, v)]) }
    }

    /// Batch oracle: recomputes the aggregates from scratch.
    fn batch(points: &[SparsePoint]) -> (u64, Vec<f64>, f64) {
        let dim = points
            .iter()
            .filter_map(|p| p.max_key())
            .max()
            .map_or(1, |k| k as usize + 1);
        let mut sum = vec![0.0f64; dim];
        let mut sumsq = 0.0;
        for p in points {
            for (k, v) in p.iter() {
                sum[k as usize] += f64::from(v);
            }
            sumsq += p.norm2();
        }
        let n = points.len() as u64;
        if n > 0 {
            for s in &mut sum {
                *s /= n as f64;
            }
        }
        (n, sum, sumsq)
    }

    fn summary_of(points: &[SparsePoint]) -> StatSummary {
        points.iter().fold(StatSummary::empty(), |s, p| s.include(p))
    }

    fn rel_close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn first_point_becomes_the_mean() {
        let p = pt(&[(0, 3.0), (2, -1.5)]);
        let s = StatSummary::empty().include(&p);
        assert_eq!(s.n(), 1);
        assert_eq!(s.mean_point(), p);
        assert_eq!(s.sumsq(), p.norm2());
    }

    #[test]
    fn include_matches_batch_oracle_on_small_set() {
        let s = summary_of(&[one_d(0.0), one_d(4.0), one_d(5.0)]);
        assert_eq!(s.n(), 3);
        assert!((s.mean().get(0) - 3.0).abs() < 1e-12);
        assert_eq!(s.sumsq(), 41.0);
    }

    #[test]
    fn exclude_round_trips_a_single_point() {
        let p = pt(&[(1, 2.0), (9, -4.0)]);
        let s = StatSummary::empty().include(&p).exclude(&p).unwrap();
        assert_eq!(s.n(), 0);
        assert!(s.mean().is_empty());
        assert_eq!(s.sumsq(), 0.0);
    }

    #[test]
    fn exclude_matches_batch_oracle() {
        let s = summary_of(&[one_d(0.0), one_d(4.0), one_d(5.0)]);
        let s = s.exclude(&one_d(5.0)).unwrap();
        assert_eq!(s.n(), 2);
        assert!((s.mean().get(0) - 2.0).abs() < 1e-9);
        assert!((s.sumsq() - 16.0).abs() < 1e-9);
    }

    #[test]
    fn exclude_from_empty_underflows() {
        assert!(matches!(
            StatSummary::empty().exclude(&one_d(1.0)),
            Err(Error::StatsUnderflow)
        ));
    }

    #[test]
    fn deviation_examples() {
        let single = StatSummary::of_point(&one_d(7.0));
        assert_eq!(single.deviation().unwrap(), 0.0);

        let s = summary_of(&[one_d(9.0), one_d(13.0)]);
        assert!((s.deviation().unwrap() - 2.0).abs() < 1e-9);

        let s = summary_of(&[one_d(0.0), one_d(4.0), one_d(5.0)]);
        assert!((s.deviation().unwrap() - (14.0f64 / 3.0).sqrt()).abs() < 1e-9);

        assert!(matches!(StatSummary::empty().deviation(), Err(Error::StatsEmpty)));
    }

    #[test]
    fn merge_has_empty_identity() {
        let s = summary_of(&[one_d(1.0), one_d(2.0)]);
        assert_eq!(s.merge(&StatSummary::empty()), s);
        assert_eq!(StatSummary::empty().merge(&s), s);
    }

    #[test]
    fn merge_matches_batch_oracle() {
        let a = summary_of(&[one_d(0.0), one_d(4.0), one_d(5.0)]);
        let b = summary_of(&[one_d(9.0), one_d(13.0)]);
        let m = a.merge(&b);
        assert_eq!(m.n(), 5);
        assert!((m.mean().get(0) - 6.2).abs() < 1e-9);
        assert!((m.sumsq() - 291.0).abs() < 1e-9);
    }

    #[test]
    fn unmerge_inverts_merge() {
        let a = summary_of(&[one_d(0.0), one_d(4.0), one_d(5.0)]);
        let b = summary_of(&[one_d(9.0), one_d(13.0)]);
        let m = a.merge(&b);
        let back = m.unmerge(&b).unwrap();
        assert_eq!(back.n(), a.n());
        assert!((back.mean().get(0) - a.mean().get(0)).abs() < 1e-9);
        assert!((back.sumsq() - a.sumsq()).abs() < 1e-9);
        assert!(matches!(b.unmerge(&m), Err(Error::StatsUnderflow)));
    }

    #[test]
    fn incremental_tracks_batch_over_many_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let points: Vec<SparsePoint> = (0..1000)
            .map(|_| {
                let mut pairs = std::collections::BTreeMap::new();
                for _ in 0..8 {
                    let k = rng.gen_range(0..64u32);
                    let v: f32 = rng.gen_range(-10.0..10.0);
                    if v != 0.0 {
                        pairs.insert(k, v);
                    }
                }
                SparsePoint::from_pairs(pairs.into_iter().collect()).unwrap()
            })
            .collect();

        let s = summary_of(&points);
        let (n, mean, sumsq) = batch(&points);
        assert_eq!(s.n(), n);
        assert!(rel_close(s.sumsq(), sumsq, 1e-9));
        for (k, want) in mean.iter().enumerate() {
            assert!(
                (s.mean().get(k as u32) - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "coordinate {k}"
            );
        }
    }

    prop_compose! {
        fn arb_points(count: usize)
            (pts in proptest::collection::vec(
                proptest::collection::btree_map(0u32..32, prop_oneof![-50.0f32..-0.1, 0.1f32..50.0], 0..6),
                1..count))
            -> Vec<SparsePoint>
        {
            pts.into_iter()
                .map(|m| SparsePoint::from_pairs(m.into_iter().collect()).unwrap())
                .collect()
        }
    }

    proptest! {
        #[test]
        fn insertion_order_does_not_matter(points in arb_points(24), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = points.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = summary_of(&points);
            let b = summary_of(&shuffled);
            prop_assert_eq!(a.n(), b.n());
            prop_assert!(rel_close(a.sumsq(), b.sumsq(), 1e-9));
            prop_assert!(a.mean().dist(b.mean()) <= 1e-5 * (1.0 + a.mean().norm2().sqrt()));
        }

        #[test]
        fn include_then_exclude_restores(points in arb_points(16), extra in arb_points(2)) {
            let base = summary_of(&points);
            let p = &extra[0];
            let restored = base.include(p).exclude(p).unwrap();
            prop_assert_eq!(restored.n(), base.n());
            prop_assert!(rel_close(restored.sumsq(), base.sumsq(), 1e-6));
            prop_assert!(restored.mean().dist(base.mean()) <= 1e-6 * (1.0 + base.mean().norm2().sqrt()));
        }

        #[test]
        fn merge_equals_union_summary(a in arb_points(16), b in arb_points(16)) {
            let merged = summary_of(&a).merge(&summary_of(&b));
            let mut all = a.clone();
            all.extend(b.iter().cloned());
            let union = summary_of(&all);
            prop_assert_eq!(merged.n(), union.n());
            prop_assert!(rel_close(merged.sumsq(), union.sumsq(), 1e-6));
            prop_assert!(merged.mean().dist(union.mean()) <= 1e-6 * (1.0 + union.mean().norm2().sqrt()));
        }

        #[test]
        fn merge_is_commutative(a in arb_points(12), b in arb_points(12)) {
            let ab = summary_of(&a).merge(&summary_of(&b));
            let ba = summary_of(&b).merge(&summary_of(&a));
            prop_assert_eq!(ab.n(), ba.n());
            prop_assert!(rel_close(ab.sumsq(), ba.sumsq(), 1e-9));
            prop_assert!(ab.mean().dist(ba.mean()) <= 1e-9 * (1.0 + ab.mean().norm2().sqrt()));
        }
    }
}
