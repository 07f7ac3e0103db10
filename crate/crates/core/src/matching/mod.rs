//! Stability, Gale–Shapley, and the lattice of stable matchings.

mod count;
pub(crate) mod instance;
mod rotations;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::perm::{all_permutations, IntInterval, Permutation};
use crate::prefs::{PreferenceStructure, Role};

pub use count::StableCount;
pub use rotations::StableLattice;

/// Largest market [`brute_force_stable`] will scan.
pub const MAX_BRUTE_FORCE_SIZE: usize = 8;

/// A perfect matching: woman `i` is matched to man `partner_of_woman(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    partner_of_woman: Permutation,
    partner_of_man: Vec<i64>,
}

impl Matching {
    pub fn from_permutation(partner_of_woman: Permutation) -> Self {
        let partner_of_man = partner_of_woman.inverse().values().to_vec();
        Matching { partner_of_woman, partner_of_man }
    }

    pub fn new(domain: IntInterval, partner_of_woman: Vec<i64>) -> Result<Self> {
        Ok(Self::from_permutation(Permutation::new(domain, partner_of_woman)?))
    }

    /// Woman `i` with man `i` for every `i`.
    pub fn in_order(domain: IntInterval) -> Self {
        Self::from_permutation(Permutation::identity(domain))
    }

    pub fn domain(&self) -> IntInterval {
        self.partner_of_woman.domain()
    }

    pub fn as_permutation(&self) -> &Permutation {
        &self.partner_of_woman
    }

    /// Partners of the women in index order.
    pub fn partners(&self) -> &[i64] {
        self.partner_of_woman.values()
    }

    pub fn partner_of_woman(&self, w: i64) -> Result<i64> {
        self.partner_of_woman.apply(w)
    }

    pub fn partner_of_man(&self, m: i64) -> Result<i64> {
        Ok(self.partner_of_man[self.domain().index_of(m)?])
    }

    /// `(woman, man)` pairs in woman order.
    pub fn pairs(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.domain().iter().zip(self.partners().iter().copied())
    }

    /// Matches straddling the point `cut + 1/2`: `(man left of it and woman right,
    /// woman left and man right)`.
    pub fn crossings(&self, cut: i64) -> (usize, usize) {
        let mut man_left = 0;
        let mut woman_left = 0;
        for (w, m) in self.pairs() {
            if m <= cut && w > cut {
                man_left += 1;
            } else if w <= cut && m > cut {
                woman_left += 1;
            }
        }
        (man_left, woman_left)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

impl PartialOrd for Matching {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Matching {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.domain().lo(), self.partners()).cmp(&(other.domain().lo(), other.partners()))
    }
}

#[derive(Serialize, Deserialize)]
struct MatchingRepr {
    domain: IntInterval,
    partner_of_woman: Vec<i64>,
}

impl Serialize for Matching {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatchingRepr { domain: self.domain(), partner_of_woman: self.partners().to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatchingRepr::deserialize(d)?;
        Matching::new(r.domain, r.partner_of_woman).map_err(serde::de::Error::custom)
    }
}

fn check_domains(p: &PreferenceStructure, m: &Matching) -> Result<()> {
    if p.domain() != m.domain() {
        return Err(Error::DomainMismatch(format!(
            "matching on {} against preferences on {}",
            m.domain(),
            p.domain()
        )));
    }
    Ok(())
}

/// Whether woman `w` and man `man` prefer each other to their partners in `m`.
pub fn is_blocking_pair(p: &PreferenceStructure, m: &Matching, w: i64, man: i64) -> Result<bool> {
    check_domains(p, m)?;
    let her = p.ranking(crate::prefs::Person::woman(w))?;
    let his = p.ranking(crate::prefs::Person::man(man))?;
    let her_partner = m.partner_of_woman(w)?;
    if her_partner == man {
        return Ok(false);
    }
    let his_partner = m.partner_of_man(man)?;
    Ok(her.at(man) > her.at(her_partner) && his.at(w) > his.at(his_partner))
}

pub fn is_stable(p: &PreferenceStructure, m: &Matching) -> Result<bool> {
    check_domains(p, m)?;
    let dom = p.domain();
    for (k, w) in dom.iter().enumerate() {
        let her = &p.women()[k];
        let her_partner_rank = her.at(m.partners()[k]);
        for (l, man) in dom.iter().enumerate() {
            if her.at(man) > her_partner_rank {
                let his = &p.men()[l];
                if his.at(w) > his.at(m.partner_of_man[l]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Deferred acceptance with `proposing` side proposing.
pub fn gale_shapley(p: &PreferenceStructure, proposing: Role) -> Matching {
    let inst = instance::Instance::from_prefs(p);
    let husband = inst.gale_shapley(proposing == Role::Man);
    let vals = husband.iter().map(|&m| p.domain().lo() + m as i64).collect();
    Matching::from_permutation(Permutation::from_parts_unchecked(p.domain(), vals))
}

/// Every stable matching, by exhaustive search over all `n!` matchings.
pub fn brute_force_stable(p: &PreferenceStructure) -> Result<Vec<Matching>> {
    if p.len() > MAX_BRUTE_FORCE_SIZE {
        return Err(Error::TooLarge { size: p.len(), limit: MAX_BRUTE_FORCE_SIZE });
    }
    let mut out = Vec::new();
    for perm in all_permutations(p.domain()) {
        let m = Matching::from_permutation(perm);
        if is_stable(p, &m)? {
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

pub fn stable_pairs(p: &PreferenceStructure) -> BTreeSet<(i64, i64)> {
    StableLattice::new(p).stable_pairs()
}

/// All stable matchings in lexicographic order of `partner_of_woman`.
pub fn enumerate_stable(p: &PreferenceStructure, limit: usize, budget: u64) -> Result<Vec<Matching>> {
    StableLattice::new(p).enumerate(limit, budget)
}

pub fn count_stable(p: &PreferenceStructure, budget: u64) -> Result<StableCount> {
    StableLattice::new(p).count(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mallows::MallowsParams;
    use crate::prefs::Person;
    use rand::{Rng, SeedableRng};

    fn iv(lo: i64, hi: i64) -> IntInterval {
        IntInterval::new(lo, hi).unwrap()
    }

    fn random_instances(count: usize, max_n: usize, seed: u64) -> Vec<PreferenceStructure> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|t| {
                let n = rng.random_range(1..=max_n) as i64;
                let lo = rng.random_range(-3..3);
                let q = [0.1, 0.5, 0.9, 0.99][t % 4];
                PreferenceStructure::sample(&MallowsParams::new(q).unwrap(), iv(lo, lo + n - 1), rng.random())
                    .unwrap()
            })
            .collect()
    }

    /// Oracle for the lattice extremes: per woman, rank of best and worst stable partner.
    fn extremes(p: &PreferenceStructure, all: &[Matching]) -> Vec<(i64, i64)> {
        p.domain()
            .iter()
            .map(|w| {
                let r = p.ranking(Person::woman(w)).unwrap();
                let ranks: Vec<i64> = all.iter().map(|m| r.at(m.partner_of_woman(w).unwrap())).collect();
                (*ranks.iter().min().unwrap(), *ranks.iter().max().unwrap())
            })
            .collect()
    }

    #[test]
    fn identity_prefs() {
        let p = PreferenceStructure::identity(iv(1, 4));
        let id = Matching::in_order(iv(1, 4));
        assert!(is_stable(&p, &id).unwrap());
        for w in 1..=4 {
            for m in 1..=4 {
                assert!(!is_blocking_pair(&p, &id, w, m).unwrap());
            }
        }
        assert_eq!(brute_force_stable(&p).unwrap(), vec![id.clone()]);
        for perm in all_permutations(iv(1, 4)) {
            let m = Matching::from_permutation(perm.clone());
            assert_eq!(is_stable(&p, &m).unwrap(), perm.is_identity());
        }
        assert_eq!(gale_shapley(&p, Role::Man), id);
        assert_eq!(gale_shapley(&p, Role::Woman), id);
        assert_eq!(stable_pairs(&p), (1..=4).map(|i| (i, i)).collect());

        let big = PreferenceStructure::identity(iv(1, 50));
        let t = std::time::Instant::now();
        assert_eq!(enumerate_stable(&big, 10, 1000).unwrap(), vec![Matching::in_order(iv(1, 50))]);
        assert_eq!(count_stable(&big, 1000).unwrap(), StableCount::one());
        assert!(t.elapsed().as_millis() < 1000);
    }

    #[test]
    fn gadget_has_two_matchings() {
        let g = PreferenceStructure::gadget(2).unwrap();
        let dom = g.domain();
        let in_order = Matching::in_order(dom);
        let swapped = Matching::from_permutation(Permutation::transposition(dom, 1, 2).unwrap());
        assert!(is_stable(&g, &in_order).unwrap());
        assert!(is_stable(&g, &swapped).unwrap());
        assert!(!is_blocking_pair(&g, &in_order, 1, 2).unwrap());
        assert!(!is_blocking_pair(&g, &swapped, 1, 1).unwrap());
        assert_eq!(brute_force_stable(&g).unwrap(), vec![in_order.clone(), swapped.clone()]);
        // Man 1 likes woman 1 best, so men proposing yields the in-order matching.
        assert_eq!(gale_shapley(&g, Role::Man), in_order);
        assert_eq!(gale_shapley(&g, Role::Woman), swapped);
        let mut pairs: BTreeSet<(i64, i64)> = dom.iter().map(|i| (i, i)).collect();
        pairs.insert((1, 2));
        pairs.insert((2, 1));
        assert_eq!(stable_pairs(&g), pairs);
        for m in [2, 5, 10] {
            let g = PreferenceStructure::gadget(m).unwrap();
            assert_eq!(count_stable(&g, 100).unwrap().to_u64(), Some(2));
            assert_eq!(enumerate_stable(&g, 10, 1000).unwrap().len(), 2);
        }
    }

    #[test]
    fn disjoint_gadgets_multiply() {
        let p = PreferenceStructure::identity(iv(1, 8)).with_gadget_at(1).unwrap().with_gadget_at(5).unwrap();
        assert_eq!(brute_force_stable(&p).unwrap().len(), 4);
        assert_eq!(count_stable(&p, 100).unwrap().to_u64(), Some(4));
        assert_eq!(enumerate_stable(&p, 10, 1000).unwrap(), brute_force_stable(&p).unwrap());
    }

    #[test]
    fn errors() {
        let p = PreferenceStructure::identity(iv(1, 3));
        let m = Matching::in_order(iv(1, 4));
        assert!(matches!(is_stable(&p, &m), Err(Error::DomainMismatch(_))));
        assert!(matches!(is_blocking_pair(&p, &m, 1, 1), Err(Error::DomainMismatch(_))));
        let big = PreferenceStructure::identity(iv(1, 9));
        assert!(matches!(brute_force_stable(&big), Err(Error::TooLarge { size: 9, limit: 8 })));
        let p = PreferenceStructure::identity(iv(1, 8)).with_gadget_at(1).unwrap().with_gadget_at(5).unwrap();
        assert_eq!(enumerate_stable(&p, 3, 1000), Err(Error::LimitExceeded { limit: 3 }));
        assert!(matches!(enumerate_stable(&p, 10, 2), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn oracle_agreement_on_random_instances() {
        for (t, p) in random_instances(600, 7, 1).into_iter().enumerate() {
            let all = brute_force_stable(&p).unwrap();
            assert!(!all.is_empty());
            let lattice = StableLattice::new(&p);
            assert_eq!(lattice.enumerate(usize::MAX, u64::MAX).unwrap(), all, "instance {t}");
            assert_eq!(lattice.count(u64::MAX).unwrap().to_u64(), Some(all.len() as u64));
            let union: BTreeSet<(i64, i64)> = all.iter().flat_map(|m| m.pairs().collect::<Vec<_>>()).collect();
            assert_eq!(lattice.stable_pairs(), union);

            let men_opt = gale_shapley(&p, Role::Man);
            let women_opt = gale_shapley(&p, Role::Woman);
            assert!(all.contains(&men_opt) && all.contains(&women_opt));
            assert_eq!(lattice.man_optimal(), men_opt);
            assert_eq!(lattice.woman_optimal(), women_opt);
            let ext = extremes(&p, &all);
            for (k, w) in p.domain().iter().enumerate() {
                let r = p.ranking(Person::woman(w)).unwrap();
                assert_eq!(r.at(men_opt.partner_of_woman(w).unwrap()), ext[k].0);
                assert_eq!(r.at(women_opt.partner_of_woman(w).unwrap()), ext[k].1);
            }
            for m in p.domain().iter() {
                let r = p.ranking(Person::man(m)).unwrap();
                let best = all.iter().map(|x| r.at(x.partner_of_man(m).unwrap())).max().unwrap();
                assert_eq!(r.at(men_opt.partner_of_man(m).unwrap()), best);
            }
        }
    }

    #[test]
    fn larger_instances_self_consistent() {
        for p in random_instances(40, 40, 2) {
            let lattice = StableLattice::new(&p);
            let all = lattice.enumerate(200_000, u64::MAX).unwrap();
            assert_eq!(lattice.count(u64::MAX).unwrap().to_u64(), Some(all.len() as u64));
            for m in all.iter().step_by(1 + all.len() / 20) {
                assert!(is_stable(&p, m).unwrap());
            }
            assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn crossing_balance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let n = rng.random_range(1..30i64);
            let lo = rng.random_range(-10..10);
            let mut vals: Vec<i64> = (lo..lo + n).collect();
            for i in (1..vals.len()).rev() {
                vals.swap(i, rng.random_range(0..=i));
            }
            let m = Matching::new(iv(lo, lo + n - 1), vals).unwrap();
            for cut in lo..lo + n - 1 {
                let (a, b) = m.crossings(cut);
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn matching_json() {
        let m = Matching::new(iv(0, 2), vec![2, 0, 1]).unwrap();
        let s = m.to_json();
        assert_eq!(s, r#"{"domain":[0,2],"partner_of_woman":[2,0,1]}"#);
        assert_eq!(serde_json::from_str::<Matching>(&s).unwrap(), m);
        assert!(serde_json::from_str::<Matching>(r#"{"domain":[0,2],"partner_of_woman":[2,2,1]}"#).is_err());
        assert_eq!(m.partner_of_man(2).unwrap(), 0);
    }
}
