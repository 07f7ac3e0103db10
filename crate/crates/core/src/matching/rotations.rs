use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::perm::{IntInterval, Permutation};
use crate::prefs::PreferenceStructure;

use super::count::{count_downsets, StableCount};
use super::instance::Instance;
use super::Matching;

/// One rotation: eliminating it moves `men[i]` from `from[i]` to `to[i]`,
/// where `to[i] == from[i + 1]` cyclically. Local zero-based indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Rotation {
    pub men: Vec<u32>,
    pub from: Vec<u32>,
    pub to: Vec<u32>,
}

/// The distributive lattice of stable matchings, represented by the
/// man-optimal matching and the rotation poset.
///
/// Rotations are numbered in the order they were eliminated on one maximal
/// chain from the man-optimal to the woman-optimal matching, which is a
/// linear extension of the precedence order.
#[derive(Clone, Debug)]
pub struct StableLattice {
    domain: IntInterval,
    man_optimal: Vec<u32>,
    woman_optimal: Vec<u32>,
    rotations: Vec<Rotation>,
    preds: Vec<Vec<usize>>,
}

impl StableLattice {
    pub fn new(p: &PreferenceStructure) -> Self {
        Self::from_instance(&Instance::from_prefs(p))
    }

    /// The lattice of the structure induced on `sub`.
    pub fn for_window(p: &PreferenceStructure, sub: IntInterval) -> Result<Self> {
        Ok(Self::from_instance(&Instance::from_window(p, sub)?))
    }

    pub(crate) fn from_instance(inst: &Instance) -> Self {
        let n = inst.n;
        let husband0 = inst.gale_shapley(true);
        let husband_z = inst.gale_shapley(false);
        let invert = |h: &[u32]| {
            let mut wife = vec![0u32; n];
            for (w, &m) in h.iter().enumerate() {
                wife[m as usize] = w as u32;
            }
            wife
        };
        let man_optimal = invert(&husband0);
        let woman_optimal = invert(&husband_z);
        let (rotations, preds) = find_rotations(inst, &man_optimal, &woman_optimal);
        StableLattice {
            domain: IntInterval::new(inst.lo, inst.lo + n as i64 - 1).expect("nonempty"),
            man_optimal,
            woman_optimal,
            rotations,
            preds,
        }
    }

    pub fn domain(&self) -> IntInterval {
        self.domain
    }

    pub fn rotation_count(&self) -> usize {
        self.rotations.len()
    }

    /// Direct precedence constraints of rotation `k` (indices into the elimination order).
    pub fn predecessors(&self, k: usize) -> &[usize] {
        &self.preds[k]
    }

    /// `(man, from_woman, to_woman)` moves of rotation `k`, in domain labels.
    pub fn rotation_moves(&self, k: usize) -> Vec<(i64, i64, i64)> {
        let lo = self.domain.lo();
        let r = &self.rotations[k];
        (0..r.men.len())
            .map(|i| (lo + r.men[i] as i64, lo + r.from[i] as i64, lo + r.to[i] as i64))
            .collect()
    }

    fn matching_from_wives(&self, wife: &[u32]) -> Matching {
        let lo = self.domain.lo();
        let mut vals = vec![0i64; wife.len()];
        for (m, &w) in wife.iter().enumerate() {
            vals[w as usize] = lo + m as i64;
        }
        Matching::from_permutation(Permutation::from_parts_unchecked(self.domain, vals))
    }

    /// Men-proposing Gale–Shapley outcome: best for every man, worst for every woman.
    pub fn man_optimal(&self) -> Matching {
        self.matching_from_wives(&self.man_optimal)
    }

    pub fn woman_optimal(&self) -> Matching {
        self.matching_from_wives(&self.woman_optimal)
    }

    /// Every `(woman, man)` pair that occurs in at least one stable matching.
    pub fn stable_pairs(&self) -> BTreeSet<(i64, i64)> {
        let lo = self.domain.lo();
        let mut out: BTreeSet<(i64, i64)> =
            self.man_optimal.iter().enumerate().map(|(m, &w)| (lo + w as i64, lo + m as i64)).collect();
        for r in &self.rotations {
            for (&m, &w) in r.men.iter().zip(&r.to) {
                out.insert((lo + w as i64, lo + m as i64));
            }
        }
        out
    }

    /// Visits every downset of the rotation poset; `budget` caps search nodes.
    pub fn enumerate(&self, limit: usize, budget: u64) -> Result<Vec<Matching>> {
        let r = self.rotations.len();
        let mut included = vec![false; r];
        let mut wife = self.man_optimal.clone();
        let mut out = Vec::new();
        let mut nodes = 0u64;
        // (depth, phase): phase 0 = try excluding, 1 = try including, 2 = unwind.
        let mut stack: Vec<(usize, u8)> = vec![(0, 0)];
        while let Some(top) = stack.last_mut() {
            let k = top.0;
            if k == r {
                if out.len() == limit {
                    return Err(Error::LimitExceeded { limit });
                }
                out.push(self.matching_from_wives(&wife));
                stack.pop();
                continue;
            }
            match top.1 {
                0 => {
                    top.1 = 1;
                    stack.push((k + 1, 0));
                }
                1 => {
                    top.1 = 2;
                    if self.preds[k].iter().all(|&p| included[p]) {
                        let rot = &self.rotations[k];
                        for (&m, &w) in rot.men.iter().zip(&rot.to) {
                            wife[m as usize] = w;
                        }
                        included[k] = true;
                        stack.push((k + 1, 0));
                    }
                }
                _ => {
                    if included[k] {
                        let rot = &self.rotations[k];
                        for (&m, &w) in rot.men.iter().zip(&rot.from) {
                            wife[m as usize] = w;
                        }
                        included[k] = false;
                    }
                    stack.pop();
                    continue;
                }
            }
            nodes += 1;
            if nodes > budget {
                return Err(Error::BudgetExceeded {
                    budget,
                    diagnostic: format!(
                        "{} stable matchings found after {nodes} search nodes over {r} rotations",
                        out.len()
                    ),
                });
            }
        }
        out.sort();
        Ok(out)
    }

    /// Number of downsets of the rotation poset; `budget` caps counting calls.
    pub fn count(&self, budget: u64) -> Result<StableCount> {
        Ok(StableCount::new(count_downsets(&self.preds, budget)?))
    }
}

/// Eliminates exposed rotations from the man-optimal matching until the
/// woman-optimal one is reached, recording precedence edges on the way.
fn find_rotations(inst: &Instance, m0: &[u32], mz: &[u32]) -> (Vec<Rotation>, Vec<Vec<usize>>) {
    let n = inst.n;
    let mut wife = m0.to_vec();
    let mut husband = vec![0u32; n];
    for (m, &w) in wife.iter().enumerate() {
        husband[w as usize] = m as u32;
    }
    let initial_rank: Vec<u32> = (0..n as u32).map(|w| inst.w_rank(w, husband[w as usize])).collect();
    let mut pos: Vec<usize> = (0..n as u32).map(|m| inst.m_pos(m, wife[m as usize])).collect();
    // Scan pointer for the next candidate; a woman who rejects once keeps rejecting
    // because her partner only improves.
    let mut scan: Vec<usize> = pos.iter().map(|p| p + 1).collect();
    let mut history: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
    let mut last_rotation = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut cursor = 0usize;
    let mut rotations = Vec::new();
    let mut preds = Vec::new();

    loop {
        if stack.is_empty() {
            while cursor < n && wife[cursor] == mz[cursor] {
                cursor += 1;
            }
            if cursor == n {
                break;
            }
            stack.push(cursor as u32);
            on_stack[cursor] = true;
        }
        let x = *stack.last().unwrap() as usize;
        let next_woman = loop {
            let w = inst.m_list(x as u32, scan[x]);
            if inst.w_rank(w, x as u32) > inst.w_rank(w, husband[w as usize]) {
                break w;
            }
            scan[x] += 1;
        };
        let y = husband[next_woman as usize] as usize;
        if !on_stack[y] {
            debug_assert_ne!(wife[y], mz[y]);
            stack.push(y as u32);
            on_stack[y] = true;
            continue;
        }
        let start = stack.iter().rposition(|&m| m as usize == y).unwrap();
        let men: Vec<u32> = stack.drain(start..).collect();
        let from: Vec<u32> = men.iter().map(|&m| wife[m as usize]).collect();
        let to: Vec<u32> = (0..men.len()).map(|i| from[(i + 1) % men.len()]).collect();
        let id = rotations.len();
        let mut before = BTreeSet::new();
        for (i, &m) in men.iter().enumerate() {
            on_stack[m as usize] = false;
            if last_rotation[m as usize] != usize::MAX {
                before.insert(last_rotation[m as usize]);
            }
            let new_pos = inst.m_pos(m, to[i]);
            for p in pos[m as usize] + 1..new_pos {
                let w = inst.m_list(m, p);
                let r = inst.w_rank(w, m);
                if initial_rank[w as usize] > r {
                    continue;
                }
                let h = &history[w as usize];
                let k = h.partition_point(|&(_, rank)| rank <= r);
                before.insert(h[k].0);
            }
        }
        for (i, &m) in men.iter().enumerate() {
            let mu = m as usize;
            wife[mu] = to[i];
            husband[to[i] as usize] = m;
            pos[mu] = inst.m_pos(m, to[i]);
            scan[mu] = pos[mu] + 1;
            last_rotation[mu] = id;
            history[to[i] as usize].push((id, inst.w_rank(to[i], m)));
        }
        rotations.push(Rotation { men, from, to });
        preds.push(before.into_iter().collect());
    }
    debug_assert_eq!(wife, mz);
    (rotations, preds)
}
