//! Integer intervals, permutations of them, and the inversion statistics used
//! throughout the crate.
//!
//! A permutation of the closed interval `[lo, hi]` is stored as the array of
//! its values in domain order. Larger values mean "more desirable" when a
//! permutation is read as a ranking.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest permutation size the crate will build.
pub const MAX_PERMUTATION_SIZE: usize = 1 << 20;

/// Closed integer interval `[lo, hi]`, or the empty interval.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntInterval {
    lo: i64,
    hi: i64,
}

impl IntInterval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::BadParameter(format!("interval [{lo}, {hi}] has lo > hi")));
        }
        Ok(IntInterval { lo, hi })
    }

    /// `[1, n]`.
    pub fn one_to(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParameter("n must be at least 1".into()));
        }
        Self::new(1, n as i64)
    }

    pub const fn empty() -> Self {
        IntInterval { lo: 0, hi: -1 }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &IntInterval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        self.lo..=self.hi
    }

    /// Zero-based offset of `x` inside the interval.
    pub fn index_of(&self, x: i64) -> Result<usize> {
        if self.contains(x) {
            Ok((x - self.lo) as usize)
        } else {
            Err(Error::OutOfDomain { value: x, lo: self.lo, hi: self.hi })
        }
    }

    pub fn shifted(&self, by: i64) -> Self {
        if self.is_empty() {
            *self
        } else {
            IntInterval { lo: self.lo + by, hi: self.hi + by }
        }
    }
}

impl fmt::Debug for IntInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[]")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl fmt::Display for IntInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for IntInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntInterval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[i64; 2]>::deserialize(d)?;
        IntInterval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Binary indexed tree over `0..n` holding nonnegative counts.
pub(crate) struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    pub(crate) fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    pub(crate) fn all_ones(n: usize) -> Self {
        let mut tree = vec![0u32; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        Fenwick { tree }
    }

    pub(crate) fn add(&mut self, idx: usize, delta: i32) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] = (self.tree[i] as i64 + delta as i64) as u32;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over `0..idx`.
    pub(crate) fn prefix(&self, idx: usize) -> u32 {
        let mut i = idx;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest index whose prefix sum (inclusive) reaches `k` (1-based rank).
    pub(crate) fn kth(&self, mut k: u32) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] < k {
                pos = next;
                k -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

/// A bijection of a finite interval onto itself.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    domain: IntInterval,
    values: Vec<i64>,
}

/// The four one-sided comparison counts of a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LStats {
    /// Positions to the right with a larger value.
    pub l_pp: u32,
    /// Positions to the right with a smaller value.
    pub l_pm: u32,
    /// Positions to the left with a larger value.
    pub l_mp: u32,
    /// Positions to the left with a smaller value.
    pub l_mm: u32,
}

impl LStats {
    pub fn offset(&self) -> u32 {
        self.l_pm.max(self.l_mp)
    }
}

/// Right-inversion counts `c_j = #{i > j : pi(i) < pi(j)}`, with `0 <= c_j <= hi - j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LehmerCode {
    domain: IntInterval,
    code: Vec<u32>,
}

impl LehmerCode {
    pub fn new(domain: IntInterval, code: Vec<u32>) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::InvalidCode("empty domain".into()));
        }
        if code.len() != domain.len() {
            return Err(Error::InvalidCode(format!(
                "code has length {} but the domain has size {}",
                code.len(),
                domain.len()
            )));
        }
        let n = code.len();
        for (k, &c) in code.iter().enumerate() {
            if c as usize > n - 1 - k {
                return Err(Error::InvalidCode(format!(
                    "entry at {} is {c}, larger than {}",
                    domain.lo() + k as i64,
                    n - 1 - k
                )));
            }
        }
        Ok(LehmerCode { domain, code })
    }

    pub fn domain(&self) -> IntInterval {
        self.domain
    }

    pub fn entries(&self) -> &[u32] {
        &self.code
    }

    pub fn decode(&self) -> Permutation {
        let n = self.code.len();
        let mut free = Fenwick::all_ones(n);
        let mut values = Vec::with_capacity(n);
        for &c in &self.code {
            let slot = free.kth(c + 1);
            free.add(slot, -1);
            values.push(self.domain.lo() + slot as i64);
        }
        Permutation { domain: self.domain, values }
    }
}

impl Permutation {
    pub fn new(domain: IntInterval, values: Vec<i64>) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::NotABijection("empty domain".into()));
        }
        if domain.len() > MAX_PERMUTATION_SIZE {
            return Err(Error::TooLarge { size: domain.len(), limit: MAX_PERMUTATION_SIZE });
        }
        if values.len() != domain.len() {
            return Err(Error::NotABijection(format!(
                "{} values for a domain of size {}",
                values.len(),
                domain.len()
            )));
        }
        let mut seen = vec![false; values.len()];
        for &v in &values {
            let k = domain
                .index_of(v)
                .map_err(|_| Error::NotABijection(format!("value {v} outside {domain}")))?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::NotABijection(format!("value {v} repeated")));
            }
        }
        Ok(Permutation { domain, values })
    }

    pub fn identity(domain: IntInterval) -> Self {
        Permutation { domain, values: domain.iter().collect() }
    }

    /// `hi, hi-1, ..., lo`.
    pub fn reversal(domain: IntInterval) -> Self {
        Permutation { domain, values: domain.iter().rev().collect() }
    }

    /// Identity with the values at positions `a` and `b` exchanged.
    pub fn transposition(domain: IntInterval, a: i64, b: i64) -> Result<Self> {
        let mut p = Self::identity(domain);
        let (ia, ib) = (domain.index_of(a)?, domain.index_of(b)?);
        p.values.swap(ia, ib);
        Ok(p)
    }

    pub(crate) fn from_parts_unchecked(domain: IntInterval, values: Vec<i64>) -> Self {
        debug_assert_eq!(domain.len(), values.len());
        Permutation { domain, values }
    }

    pub fn domain(&self) -> IntInterval {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// `pi(x)`.
    pub fn apply(&self, x: i64) -> Result<i64> {
        Ok(self.values[self.domain.index_of(x)?])
    }

    /// `pi(x)` for an `x` known to lie in the domain.
    #[inline]
    pub(crate) fn at(&self, x: i64) -> i64 {
        self.values[(x - self.domain.lo()) as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().zip(self.domain.iter()).all(|(&v, x)| v == x)
    }

    pub fn inverse(&self) -> Permutation {
        let lo = self.domain.lo();
        let mut inv = vec![0; self.values.len()];
        for (k, &v) in self.values.iter().enumerate() {
            inv[(v - lo) as usize] = lo + k as i64;
        }
        Permutation { domain: self.domain, values: inv }
    }

    /// Same permutation transported to the domain shifted by `by`.
    pub fn shifted(&self, by: i64) -> Permutation {
        Permutation {
            domain: self.domain.shifted(by),
            values: self.values.iter().map(|v| v + by).collect(),
        }
    }

    /// Number of pairs `i < j` with `pi(i) > pi(j)`.
    pub fn inversion_number(&self) -> u64 {
        self.lehmer_code().code.iter().map(|&c| c as u64).sum()
    }

    pub fn l_stats(&self, j: i64) -> Result<LStats> {
        let k = self.domain.index_of(j)?;
        let pj = self.values[k];
        let (mut l_mp, mut l_mm) = (0, 0);
        for &v in &self.values[..k] {
            if v > pj {
                l_mp += 1;
            } else {
                l_mm += 1;
            }
        }
        let (mut l_pp, mut l_pm) = (0, 0);
        for &v in &self.values[k + 1..] {
            if v > pj {
                l_pp += 1;
            } else {
                l_pm += 1;
            }
        }
        Ok(LStats { l_pp, l_pm, l_mp, l_mm })
    }

    /// `max(L_{+-}, L_{-+})` at `j`.
    pub fn offset(&self, j: i64) -> Result<u32> {
        Ok(self.l_stats(j)?.offset())
    }

    /// Offsets at every position, in domain order, in `O(n log n)`.
    pub fn offsets(&self) -> Vec<u32> {
        let right = self.lehmer_code().code;
        let n = self.values.len();
        let lo = self.domain.lo();
        let mut seen = Fenwick::new(n);
        let mut out = Vec::with_capacity(n);
        for (k, &v) in self.values.iter().enumerate() {
            let slot = (v - lo) as usize;
            let smaller_left = seen.prefix(slot);
            let larger_left = k as u32 - smaller_left;
            out.push(right[k].max(larger_left));
            seen.add(slot, 1);
        }
        out
    }

    pub fn lehmer_code(&self) -> LehmerCode {
        let n = self.values.len();
        let lo = self.domain.lo();
        let mut seen = Fenwick::new(n);
        let mut code = vec![0u32; n];
        for k in (0..n).rev() {
            let slot = (self.values[k] - lo) as usize;
            code[k] = seen.prefix(slot);
            seen.add(slot, 1);
        }
        LehmerCode { domain: self.domain, code }
    }

    /// Induced permutation on a subinterval of the domain.
    pub fn restrict(&self, sub: IntInterval) -> Result<Permutation> {
        if sub.is_empty() {
            return Err(Error::EmptySubset);
        }
        if !self.domain.contains_interval(&sub) {
            return Err(Error::NotSubinterval {
                sub_lo: sub.lo(),
                sub_hi: sub.hi(),
                lo: self.domain.lo(),
                hi: self.domain.hi(),
            });
        }
        let start = (sub.lo() - self.domain.lo()) as usize;
        let window = &self.values[start..start + sub.len()];
        Ok(Permutation { domain: sub, values: rank_values(window, sub.lo()) })
    }

    /// Induced permutation on an arbitrary sorted subset of the domain.
    pub fn induced(&self, subset: &[i64]) -> Result<InducedPermutation> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadParameter("subset must be strictly increasing".into()));
        }
        let mut picked = Vec::with_capacity(subset.len());
        for &x in subset {
            picked.push(self.apply(x)?);
        }
        let ranks = rank_values(&picked, 0);
        let values = ranks.into_iter().map(|r| subset[r as usize]).collect();
        Ok(InducedPermutation { labels: subset.to_vec(), values })
    }

    /// Whether `self` maps the part of its domain left of `inner`, `inner`
    /// itself, and the part right of `inner` each onto itself, with
    /// restriction `tau` on `inner`.
    pub fn is_in_res(&self, tau: &Permutation, inner: IntInterval) -> Result<bool> {
        if tau.domain != inner {
            return Err(Error::DomainMismatch(format!(
                "tau is defined on {} but the inner interval is {inner}",
                tau.domain
            )));
        }
        if inner.is_empty() || !self.domain.contains_interval(&inner) {
            return Err(Error::DomainMismatch(format!(
                "{inner} is not contained in {}",
                self.domain
            )));
        }
        Ok(self.domain.iter().zip(&self.values).all(|(x, &v)| {
            if x < inner.lo() {
                v < inner.lo()
            } else if x > inner.hi() {
                v > inner.hi()
            } else {
                v == tau.at(x)
            }
        }))
    }
}

/// Replace each value by `base + (its rank among window)`.
fn rank_values(window: &[i64], base: i64) -> Vec<i64> {
    let mut order: Vec<usize> = (0..window.len()).collect();
    order.sort_unstable_by_key(|&k| window[k]);
    let mut out = vec![0; window.len()];
    for (rank, k) in order.into_iter().enumerate() {
        out[k] = base + rank as i64;
    }
    out
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} on {}", self.values, self.domain)
    }
}

#[derive(Serialize, Deserialize)]
struct PermutationRepr {
    domain: IntInterval,
    values: Vec<i64>,
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PermutationRepr { domain: self.domain, values: self.values.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PermutationRepr::deserialize(d)?;
        Permutation::new(repr.domain, repr.values).map_err(serde::de::Error::custom)
    }
}

/// Permutation of an arbitrary finite set of integers, as produced by
/// [`Permutation::induced`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedPermutation {
    labels: Vec<i64>,
    values: Vec<i64>,
}

impl InducedPermutation {
    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// The same permutation as a [`Permutation`] when the labels form an interval.
    pub fn into_interval_permutation(self) -> Option<Permutation> {
        let lo = self.labels[0];
        let contiguous = self.labels.iter().enumerate().all(|(k, &x)| x == lo + k as i64);
        contiguous.then(|| {
            let domain = IntInterval { lo, hi: lo + self.labels.len() as i64 - 1 };
            Permutation { domain, values: self.values }
        })
    }
}

/// Free-function spellings of the operations above.
pub fn make_permutation(domain: IntInterval, values: Vec<i64>) -> Result<Permutation> {
    Permutation::new(domain, values)
}

pub fn inversion_number(p: &Permutation) -> u64 {
    p.inversion_number()
}

pub fn induced_permutation(p: &Permutation, subset: &[i64]) -> Result<InducedPermutation> {
    p.induced(subset)
}

pub fn l_stats(p: &Permutation, j: i64) -> Result<LStats> {
    p.l_stats(j)
}

pub fn offset(p: &Permutation, j: i64) -> Result<u32> {
    p.offset(j)
}

pub fn lehmer_encode(p: &Permutation) -> LehmerCode {
    p.lehmer_code()
}

pub fn lehmer_decode(c: &LehmerCode) -> Permutation {
    c.decode()
}

pub fn is_in_res(p: &Permutation, tau: &Permutation, inner: IntInterval) -> Result<bool> {
    p.is_in_res(tau, inner)
}

/// Every permutation of `domain`, in lexicographic order of value arrays.
pub fn all_permutations(domain: IntInterval) -> Vec<Permutation> {
    let n = domain.len();
    let mut out = Vec::new();
    let mut current: Vec<i64> = domain.iter().collect();
    loop {
        out.push(Permutation { domain, values: current.clone() });
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}
