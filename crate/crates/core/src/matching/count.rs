use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact number of stable matchings together with its natural log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableCount {
    value: BigUint,
}

impl StableCount {
    pub fn new(value: BigUint) -> Self {
        StableCount { value }
    }

    pub fn one() -> Self {
        StableCount { value: BigUint::one() }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.value.to_u64()
    }

    pub fn log_value(&self) -> f64 {
        log_biguint(&self.value)
    }

    pub fn product<'a>(counts: impl IntoIterator<Item = &'a StableCount>) -> StableCount {
        let mut v = BigUint::one();
        for c in counts {
            v *= &c.value;
        }
        StableCount { value: v }
    }
}

impl From<u64> for StableCount {
    fn from(v: u64) -> Self {
        StableCount { value: BigUint::from(v) }
    }
}

impl fmt::Display for StableCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for StableCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("StableCount", 2)?;
        st.serialize_field("value", &self.value.to_string())?;
        st.serialize_field("log_value", &self.log_value())?;
        st.end()
    }
}

/// Natural log of a big integer; `-inf` for zero.
pub(crate) fn log_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn full(len: usize) -> Self {
        let mut b = Self::empty(len);
        for i in 0..len {
            b.set(i);
        }
        b
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn and_count(&self, other: &Bits) -> usize {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    fn minus(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }
}

/// Counts the downsets of a finite poset given by direct predecessor lists
/// over a topological numbering (every predecessor index is smaller).
pub(crate) struct DownsetCounter {
    len: usize,
    below: Vec<Bits>,
    above: Vec<Bits>,
    memo: HashMap<Bits, BigUint>,
    calls: u64,
    budget: u64,
}

impl DownsetCounter {
    pub fn new(preds: &[Vec<usize>], budget: u64) -> Self {
        let len = preds.len();
        let mut below: Vec<Bits> = Vec::with_capacity(len);
        for (x, ps) in preds.iter().enumerate() {
            let mut b = Bits::empty(len);
            for &p in ps {
                debug_assert!(p < x);
                b.or_assign(&below[p]);
                b.set(p);
            }
            below.push(b);
        }
        let mut above = vec![Bits::empty(len); len];
        for (x, b) in below.iter().enumerate() {
            for y in b.ones() {
                above[y].set(x);
            }
        }
        DownsetCounter { len, below, above, memo: HashMap::new(), calls: 0, budget }
    }

    pub fn count_all(&mut self) -> Result<BigUint> {
        let all = Bits::full(self.len);
        self.count(&all)
    }

    fn exceeded(&self) -> Error {
        Error::BudgetExceeded {
            budget: self.budget,
            diagnostic: format!(
                "{} counting calls over a poset of {} rotations, {} sub-posets memoized",
                self.calls,
                self.len,
                self.memo.len()
            ),
        }
    }

    fn components(&self, set: &Bits) -> Vec<Bits> {
        let mut left = set.clone();
        let mut out = Vec::new();
        loop {
            let first = left.ones().next();
            let Some(seed) = first else { break };
            let mut comp = Bits::empty(self.len);
            comp.set(seed);
            left.clear(seed);
            let mut frontier = vec![seed];
            while let Some(x) = frontier.pop() {
                let mut reach = self.below[x].clone();
                reach.or_assign(&self.above[x]);
                let fresh: Vec<usize> = reach.ones().filter(|&y| left.get(y)).collect();
                for y in fresh {
                    left.clear(y);
                    comp.set(y);
                    frontier.push(y);
                }
            }
            out.push(comp);
        }
        out
    }

    fn count(&mut self, set: &Bits) -> Result<BigUint> {
        if set.is_empty() {
            return Ok(BigUint::one());
        }
        if let Some(v) = self.memo.get(set) {
            return Ok(v.clone());
        }
        self.calls += 1;
        if self.calls > self.budget {
            return Err(self.exceeded());
        }
        let comps = self.components(set);
        let value = if comps.len() > 1 {
            let mut v = BigUint::one();
            for c in &comps {
                v *= self.count(c)?;
            }
            v
        } else {
            self.count_connected(set)?
        };
        self.memo.insert(set.clone(), value.clone());
        Ok(value)
    }

    fn count_connected(&mut self, set: &Bits) -> Result<BigUint> {
        let k = set.count();
        let mut comparable = 0usize;
        let mut best = (0usize, 0usize, usize::MAX);
        for x in set.ones() {
            let d = self.below[x].and_count(set);
            let u = self.above[x].and_count(set);
            comparable += d;
            let score = (d + u, d.min(u), x);
            if (score.0, score.1) > (best.0, best.1) || best.2 == usize::MAX {
                best = score;
            }
        }
        if comparable == k * (k - 1) / 2 {
            return Ok(BigUint::from(k + 1));
        }
        let x = best.2;
        let mut without_up = set.minus(&self.above[x]);
        without_up.clear(x);
        let mut without_down = set.minus(&self.below[x]);
        without_down.clear(x);
        let mut v = self.count(&without_up)?;
        v += self.count(&without_down)?;
        debug_assert!(!v.is_zero());
        Ok(v)
    }
}

/// Count downsets on a worker thread with a generous stack; the pivot
/// recursion can nest as deep as the poset is long.
pub(crate) fn count_downsets(preds: &[Vec<usize>], budget: u64) -> Result<BigUint> {
    if preds.len() < 256 {
        return DownsetCounter::new(preds, budget).count_all();
    }
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, || DownsetCounter::new(preds, budget).count_all())
            .expect("spawn counting thread")
            .join()
            .expect("counting thread panicked")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(preds: &[Vec<usize>]) -> u64 {
        let n = preds.len();
        (0u32..1 << n)
            .filter(|&s| (0..n).all(|x| s >> x & 1 == 0 || preds[x].iter().all(|&p| s >> p & 1 == 1)))
            .count() as u64
    }

    #[test]
    fn small_posets() {
        let cases: Vec<Vec<Vec<usize>>> = vec![
            vec![],
            vec![vec![]],
            vec![vec![], vec![]],
            vec![vec![], vec![0], vec![1]],
            vec![vec![], vec![], vec![0, 1], vec![0], vec![2, 3]],
            vec![vec![], vec![0], vec![], vec![2], vec![1, 3], vec![], vec![5]],
        ];
        for c in cases {
            assert_eq!(count_downsets(&c, 1000).unwrap(), BigUint::from(brute(&c)));
        }
    }

    #[test]
    fn random_posets_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let n = rng.random_range(0..14);
            let p = rng.random_range(0.05..0.5);
            let preds: Vec<Vec<usize>> =
                (0..n).map(|x| (0..x).filter(|_| rng.random_bool(p)).collect()).collect();
            assert_eq!(count_downsets(&preds, 1 << 20).unwrap(), BigUint::from(brute(&preds)));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let preds: Vec<Vec<usize>> = (0..40).map(|x| if x % 2 == 1 { vec![x - 1] } else { vec![] }).collect();
        let _ = count_downsets(&preds, 1_000_000).unwrap();
        // 8x8 grid order: downsets are lattice paths, C(16, 8) of them.
        let grid: Vec<Vec<usize>> = (0..64)
            .map(|x: usize| {
                let (i, j) = (x / 8, x % 8);
                let mut p = Vec::new();
                if i > 0 {
                    p.push(x - 8);
                }
                if j > 0 {
                    p.push(x - 1);
                }
                p
            })
            .collect();
        assert_eq!(count_downsets(&grid, 1 << 20).unwrap(), BigUint::from(12870u32));
        assert!(matches!(count_downsets(&grid, 3), Err(Error::BudgetExceeded { budget: 3, .. })));
    }

    #[test]
    fn log_of_huge_counts() {
        let v = BigUint::from(3u32).pow(2000);
        let expect = 2000.0 * 3f64.ln();
        assert!((log_biguint(&v) - expect).abs() / expect < 1e-12);
        assert_eq!(log_biguint(&BigUint::from(1u32)), 0.0);
        let c = StableCount::product(&[StableCount::from(2), StableCount::from(3)]);
        assert_eq!(c.to_string(), "6");
        assert!((c.log_value() - 6f64.ln()).abs() < 1e-15);
    }
}
