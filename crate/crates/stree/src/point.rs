//! Sparse points and vector arithmetic over Euclidean space.
//!
//! A point stores only its non-zero coordinates, as strictly increasing
//! `(index, value)` pairs. Stored data points use 32-bit values
//! ([`SparsePoint`]); running aggregates such as node centers and means use
//! 64-bit values. Every operation that folds coordinates together (sums,
//! dot products, norms, distances) accumulates in `f64` regardless of the
//! stored width.

use std::fmt;

use crate::error::Error;

/// Value types storable in a [`SparseVector`].
pub trait Scalar: Copy + PartialEq + PartialOrd + fmt::Debug + fmt::Display + 'static {
    const ZERO: Self;
    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Scalar for f32 {
    const ZERO: Self = 0.0;
    #[inline]
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
}

/// A sparse vector: strictly increasing coordinate indices paired with
/// non-zero, finite values. Zero results of arithmetic are elided so the
/// no-stored-zero invariant survives every operation.
///
/// Dimensionality is not stored per vector; a vector only promises that its
/// keys are below whatever dimensionality the surrounding context (for
/// example a tree configuration) enforces.
#[derive(Clone, PartialEq)]
pub struct SparseVector<V> {
    keys: Vec<u32>,
    vals: Vec<V>,
}

/// A stored data point: sparse vector with 32-bit coordinate values.
///
/// The 32-bit width is what the serialized form carries, so every
/// constructible `SparsePoint` round-trips bit-exactly through the codec.
pub type SparsePoint = SparseVector<f32>;

impl<V: Scalar> SparseVector<V> {
    pub fn empty() -> Self {
        SparseVector { keys: Vec::new(), vals: Vec::new() }
    }

    /// Builds a vector from parallel key/value arrays, validating all
    /// invariants: equal lengths, strictly increasing keys, finite non-zero
    /// values.
    pub fn new(keys: Vec<u32>, vals: Vec<V>) -> Result<Self, Error> {
        if keys.len() != vals.len() {
            return Err(Error::InvalidPoint("key and value arrays differ in length"));
        }
        for w in keys.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidPoint("keys must be strictly increasing"));
            }
        }
        for &v in &vals {
            if v == V::ZERO {
                return Err(Error::InvalidPoint("zero values must be elided"));
            }
            if !v.to_f64().is_finite() {
                return Err(Error::InvalidPoint("values must be finite"));
            }
        }
        Ok(SparseVector { keys, vals })
    }

    /// Builds a vector from `(key, value)` pairs in any order.
    pub fn from_pairs(mut pairs: Vec<(u32, V)>) -> Result<Self, Error> {
        pairs.sort_by_key(|&(k, _)| k);
        let keys = pairs.iter().map(|&(k, _)| k).collect();
        let vals = pairs.iter().map(|&(_, v)| v).collect();
        Self::new(keys, vals)
    }

    pub(crate) fn from_sorted_unchecked(keys: Vec<u32>, vals: Vec<V>) -> Self {
        debug_assert_eq!(keys.len(), vals.len());
        debug_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(vals.iter().all(|&v| v != V::ZERO && v.to_f64().is_finite()));
        SparseVector { keys, vals }
    }

    /// Number of stored (non-zero) coordinates.
    pub fn nnz(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u32] {
        &self.keys
    }

    pub fn values(&self) -> &[V] {
        &self.vals
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, V)> + '_ {
        self.keys.iter().copied().zip(self.vals.iter().copied())
    }

    pub fn max_key(&self) -> Option<u32> {
        self.keys.last().copied()
    }

    /// The coordinate at index `i`, zero when elided.
    pub fn get(&self, i: u32) -> V {
        match self.keys.binary_search(&i) {
            Ok(pos) => self.vals[pos],
            Err(_) => V::ZERO,
        }
    }

    /// Coordinate-wise sum. Exact-zero sums are elided.
    pub fn add(&self, other: &Self) -> Self {
        self.add_with_ops(other).0
    }

    /// Sum plus the number of merge steps taken; the step count is linear in
    /// `nnz(self) + nnz(other)`.
    pub(crate) fn add_with_ops(&self, other: &Self) -> (Self, usize) {
        let (merged, ops) = self.merge_f64_ops(other, |a, b| a + b);
        (merged.quantized_to::<V>(), ops)
    }

    /// Every value multiplied by `s`; `s == 0` yields the empty vector.
    pub fn scale(&self, s: f64) -> Self {
        assert!(s.is_finite(), "scale factor must be finite");
        let mut keys = Vec::with_capacity(self.nnz());
        let mut vals = Vec::with_capacity(self.nnz());
        for (k, v) in self.iter() {
            let scaled = V::from_f64(v.to_f64() * s);
            if scaled != V::ZERO {
                keys.push(k);
                vals.push(scaled);
            }
        }
        SparseVector { keys, vals }
    }

    /// Squared Euclidean length.
    pub fn norm2(&self) -> f64 {
        self.vals.iter().map(|v| { let x = v.to_f64(); x * x }).sum()
    }

    /// Dot product over the common support.
    pub fn dot<W: Scalar>(&self, other: &SparseVector<W>) -> f64 {
        let mut acc = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.keys.len() && j < other.keys.len() {
            match self.keys[i].cmp(&other.keys[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.vals[i].to_f64() * other.vals[j].to_f64();
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Squared Euclidean distance.
    pub fn dist2<W: Scalar>(&self, other: &SparseVector<W>) -> f64 {
        let mut acc = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.keys.len() && j < other.keys.len() {
            let d = match self.keys[i].cmp(&other.keys[j]) {
                std::cmp::Ordering::Less => {
                    let d = self.vals[i].to_f64();
                    i += 1;
                    d
                }
                std::cmp::Ordering::Greater => {
                    let d = -other.vals[j].to_f64();
                    j += 1;
                    d
                }
                std::cmp::Ordering::Equal => {
                    let d = self.vals[i].to_f64() - other.vals[j].to_f64();
                    i += 1;
                    j += 1;
                    d
                }
            };
            acc += d * d;
        }
        while i < self.keys.len() {
            let d = self.vals[i].to_f64();
            acc += d * d;
            i += 1;
        }
        while j < other.keys.len() {
            let d = other.vals[j].to_f64();
            acc += d * d;
            j += 1;
        }
        acc
    }

    /// Euclidean distance.
    pub fn dist<W: Scalar>(&self, other: &SparseVector<W>) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Copy with values widened to 64-bit.
    pub fn widened(&self) -> SparseVector<f64> {
        SparseVector {
            keys: self.keys.clone(),
            vals: self.vals.iter().map(|v| v.to_f64()).collect(),
        }
    }

    /// Union merge in f64: `f` receives both coordinates (zero where elided)
    /// and exact-zero results are dropped.
    pub(crate) fn merge_f64<W: Scalar, F: FnMut(f64, f64) -> f64>(
        &self,
        other: &SparseVector<W>,
        f: F,
    ) -> SparseVector<f64> {
        self.merge_f64_ops(other, f).0
    }

    fn merge_f64_ops<W: Scalar, F: FnMut(f64, f64) -> f64>(
        &self,
        other: &SparseVector<W>,
        mut f: F,
    ) -> (SparseVector<f64>, usize) {
        let mut keys = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        let mut ops = 0usize;
        let (mut i, mut j) = (0, 0);
        let push = |k: u32, v: f64, keys: &mut Vec<u32>, vals: &mut Vec<f64>| {
            if v != 0.0 {
                keys.push(k);
                vals.push(v);
            }
        };
        while i < self.keys.len() && j < other.keys.len() {
            ops += 1;
            match self.keys[i].cmp(&other.keys[j]) {
                std::cmp::Ordering::Less => {
                    push(self.keys[i], f(self.vals[i].to_f64(), 0.0), &mut keys, &mut vals);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    push(other.keys[j], f(0.0, other.vals[j].to_f64()), &mut keys, &mut vals);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    push(
                        self.keys[i],
                        f(self.vals[i].to_f64(), other.vals[j].to_f64()),
                        &mut keys,
                        &mut vals,
                    );
                    i += 1;
                    j += 1;
                }
            }
        }
        while i < self.keys.len() {
            ops += 1;
            push(self.keys[i], f(self.vals[i].to_f64(), 0.0), &mut keys, &mut vals);
            i += 1;
        }
        while j < other.keys.len() {
            ops += 1;
            push(other.keys[j], f(0.0, other.vals[j].to_f64()), &mut keys, &mut vals);
            j += 1;
        }
        (SparseVector { keys, vals }, ops)
    }
}

impl SparseVector<f64> {
    /// `a*self + b*other`, folded in f64.
    pub(crate) fn affine<W: Scalar>(
        &self,
        a: f64,
        other: &SparseVector<W>,
        b: f64,
    ) -> SparseVector<f64> {
        self.merge_f64(other, |x, y| a * x + b * y)
    }

    /// Narrows values to the target width, eliding anything that rounds to
    /// zero. Values beyond the target range saturate.
    pub(crate) fn quantized_to<V: Scalar>(&self) -> SparseVector<V> {
        let mut keys = Vec::with_capacity(self.nnz());
        let mut vals = Vec::with_capacity(self.nnz());
        for (k, v) in self.iter() {
            let mut q = V::from_f64(v);
            if !q.to_f64().is_finite() {
                q = V::from_f64(if v > 0.0 { f32::MAX as f64 } else { f32::MIN as f64 });
            }
            if q != V::ZERO {
                keys.push(k);
                vals.push(q);
            }
        }
        SparseVector { keys, vals }
    }

    /// Narrows to a 32-bit data point.
    pub fn quantized(&self) -> SparsePoint {
        self.quantized_to::<f32>()
    }
}

impl<V: Scalar> fmt::Debug for SparseVector<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (k, v)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}:{v}")?;
        }
        write!(f, "}}")
    }
}

/// The ingestion text form: whitespace-separated `index:value` tokens in
/// ascending index order. The empty vector prints as the empty string.
impl<V: Scalar> fmt::Display for SparseVector<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (k, v)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "{k}:{v}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SparsePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::ingest::parse_point(s, None).map_err(|_| Error::InvalidPoint("malformed point text"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(pairs: &[(u32, f32)]) -> SparsePoint {
        SparsePoint::from_pairs(pairs.to_vec()).unwrap()
    }

    /// Dense mirror used as an independent oracle for the sparse arithmetic.
    fn dense(p: &SparsePoint, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (k, v) in p.iter() {
            out[k as usize] = f64::from(v);
        }
        out
    }

    fn rel_close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn get_returns_stored_or_zero() {
        let p = pt(&[(3, 1.5)]);
        assert_eq!(p.get(3), 1.5);
        assert_eq!(p.get(0), 0.0);
        assert_eq!(SparsePoint::empty().get(7), 0.0);
    }

    #[test]
    fn add_interleaves_disjoint_keys() {
        let a = pt(&[(0, 1.0), (2, 3.0)]);
        let b = pt(&[(1, 5.0)]);
        assert_eq!(a.add(&b), pt(&[(0, 1.0), (1, 5.0), (2, 3.0)]));
    }

    #[test]
    fn add_elides_exact_cancellation() {
        let a = pt(&[(2, 3.0)]);
        let b = pt(&[(2, -3.0)]);
        assert!(a.add(&b).is_empty());
    }

    #[test]
    fn add_matches_dense_oracle_on_fixed_case() {
        let a = pt(&[(0, 1.0), (5, 2.0)]);
        let b = pt(&[(0, 2.0), (5, 2.0)]);
        let sum = a.add(&b);
        assert_eq!(sum, pt(&[(0, 3.0), (5, 4.0)]));
        let (da, db) = (dense(&a, 8), dense(&b, 8));
        for k in 0..8 {
            assert_eq!(f64::from(sum.get(k as u32)), da[k] + db[k]);
        }
    }

    #[test]
    fn scale_examples() {
        assert_eq!(pt(&[(1, 2.0)]).scale(0.5), pt(&[(1, 1.0)]));
        assert!(pt(&[(1, 2.0)]).scale(0.0).is_empty());
        assert_eq!(pt(&[(0, 3.0), (9, -6.0)]).scale(-1.0), pt(&[(0, -3.0), (9, 6.0)]));
    }

    #[test]
    fn norm2_examples() {
        assert_eq!(pt(&[(0, 3.0), (1, 4.0)]).norm2(), 25.0);
        assert_eq!(SparsePoint::empty().norm2(), 0.0);
    }

    #[test]
    fn dot_examples() {
        assert_eq!(pt(&[(0, 1.0)]).dot(&pt(&[(1, 1.0)])), 0.0);
        assert_eq!(pt(&[(2, 3.0)]).dot(&pt(&[(2, 4.0)])), 12.0);
    }

    #[test]
    fn dist_examples() {
        let origin = SparsePoint::empty();
        assert_eq!(origin.dist(&pt(&[(0, 3.0), (1, 4.0)])), 5.0);
        let a = pt(&[(0, 1.5), (4, -2.0)]);
        assert_eq!(a.dist(&a), 0.0);
    }

    #[test]
    fn construction_rejects_invalid_inputs() {
        assert!(SparsePoint::new(vec![5, 3], vec![1.0, 1.0]).is_err());
        assert!(SparsePoint::new(vec![1], vec![0.0]).is_err());
        assert!(SparsePoint::new(vec![1], vec![f32::NAN]).is_err());
        assert!(SparsePoint::new(vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(SparsePoint::from_pairs(vec![(2, 1.0), (2, 3.0)]).is_err());
    }

    #[test]
    fn merge_is_linear_in_both_sizes() {
        // Adversarial shapes: fully interleaved keys, then disjoint ranges.
        let a = pt(&(0..512).map(|i| (2 * i, 1.0)).collect::<Vec<_>>());
        let b = pt(&(0..512).map(|i| (2 * i + 1, 1.0)).collect::<Vec<_>>());
        let (_, ops) = a.add_with_ops(&b);
        assert!(ops <= a.nnz() + b.nnz());

        let lo = pt(&(0..512).map(|i| (i, 1.0)).collect::<Vec<_>>());
        let hi = pt(&(0..512).map(|i| (10_000 + i, 1.0)).collect::<Vec<_>>());
        let (_, ops) = lo.add_with_ops(&hi);
        assert!(ops <= lo.nnz() + hi.nnz());
    }

    #[test]
    fn display_round_trips_through_parse() {
        let p = pt(&[(0, 1.5), (7, -2.0)]);
        assert_eq!(p.to_string(), "0:1.5 7:-2");
        let back: SparsePoint = p.to_string().parse().unwrap();
        assert_eq!(back, p);
        assert_eq!(SparsePoint::empty().to_string(), "");
    }

    prop_compose! {
        fn arb_point(dim: u32, max_nnz: usize)
            (keys in proptest::collection::btree_set(0..dim, 0..=max_nnz))
            (vals in proptest::collection::vec(
                prop_oneof![-100.0f32..-0.01, 0.01f32..100.0], keys.len()),
             keys in Just(keys))
            -> SparsePoint
        {
            SparsePoint::new(keys.into_iter().collect(), vals).unwrap()
        }
    }

    prop_compose! {
        fn arb_lattice_point(dim: u32, max_nnz: usize)
            (keys in proptest::collection::btree_set(0..dim, 0..=max_nnz))
            (ticks in proptest::collection::vec(
                prop_oneof![-65536i32..=-1, 1i32..=65536], keys.len()),
             keys in Just(keys))
            -> SparsePoint
        {
            let vals = ticks.into_iter().map(|t| t as f32 / 1024.0).collect();
            SparsePoint::new(keys.into_iter().collect(), vals).unwrap()
        }
    }

    proptest! {
        #[test]
        fn sparse_ops_agree_with_dense_oracle(a in arb_point(64, 32), b in arb_point(64, 32)) {
            let (da, db) = (dense(&a, 64), dense(&b, 64));

            let sum = a.add(&b);
            for k in 0..64u32 {
                let want = f32::from_bits(((da[k as usize] + db[k as usize]) as f32).to_bits());
                prop_assert_eq!(sum.get(k), want);
            }

            let dot_oracle: f64 = da.iter().zip(&db).map(|(x, y)| x * y).sum();
            prop_assert!(rel_close(a.dot(&b), dot_oracle, 1e-12));

            let norm_oracle: f64 = da.iter().map(|x| x * x).sum();
            prop_assert!(rel_close(a.norm2(), norm_oracle, 1e-12));

            let dist_oracle: f64 = da.iter().zip(&db).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            prop_assert!(rel_close(a.dist(&b), dist_oracle, 1e-12));
        }

        #[test]
        fn add_is_commutative(a in arb_point(128, 24), b in arb_point(128, 24)) {
            prop_assert_eq!(a.add(&b), b.add(&a));
        }

        #[test]
        fn add_is_associative_within_tolerance(
            // Lattice values (multiples of 2^-10 below 64) keep every partial
            // sum exactly representable at 32 bits, so association order is
            // the only variable; coarser inputs would smear the comparison
            // with storage rounding an order of magnitude above the bound.
            a in arb_lattice_point(128, 24), b in arb_lattice_point(128, 24), c in arb_lattice_point(128, 24)
        ) {
            let left = a.add(&b).add(&c);
            let right = a.add(&b.add(&c));
            for k in 0..128u32 {
                prop_assert!((f64::from(left.get(k)) - f64::from(right.get(k))).abs() <= 1e-9);
            }
        }

        #[test]
        fn dist_is_a_metric(a in arb_point(64, 16), b in arb_point(64, 16), c in arb_point(64, 16)) {
            prop_assert!(a.dist(&b) >= 0.0);
            prop_assert!((a.dist(&b) - b.dist(&a)).abs() <= 1e-12);
            prop_assert_eq!(a.dist(&a), 0.0);
            prop_assert!(a.dist(&c) <= a.dist(&b) + b.dist(&c) + 1e-9);
        }

        #[test]
        fn text_form_round_trips(p in arb_point(4096, 48)) {
            let back: SparsePoint = p.to_string().parse().unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
