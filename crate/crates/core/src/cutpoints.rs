//! Cut certificates, exact lattice-cutpoint tests, and block decompositions.
//!
//! A cut `c` stands for the half-integer `s = c + 1/2` between `c` and `c + 1`.
//! Bounds of the form `d < (|i - s| + |j - s|) / 20` are checked as
//! `40 d < |2i - 2c - 1| + |2j - 2c - 1|`, so no rounding is involved.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::instance::Instance;
use crate::matching::{StableCount, StableLattice};
use crate::perm::{IntInterval, Permutation};
use crate::prefs::PreferenceStructure;

/// A cut between `c` and `c + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CutPosition(pub i64);

impl CutPosition {
    /// A cut with both sides nonempty inside `domain`.
    pub fn within(domain: IntInterval, c: i64) -> Result<Self> {
        if domain.is_empty() || c < domain.lo() || c >= domain.hi() {
            return Err(Error::BadParameter(format!(
                "cut {c} + 1/2 does not split {domain} into two nonempty sides"
            )));
        }
        Ok(CutPosition(c))
    }

    pub fn c(self) -> i64 {
        self.0
    }

    pub fn point(self) -> f64 {
        self.0 as f64 + 0.5
    }
}

impl fmt::Display for CutPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.5", self.0)
    }
}

/// Range of cuts `c` at which `40 d < |2i - 2c - 1| + |2j - 2c - 1|` fails.
fn failing_cuts(i: i64, j: i64, d: u32) -> Option<(i64, i64)> {
    if d == 0 {
        return None;
    }
    let (a, b) = (i.min(j), i.max(j));
    // Outside [2a, 2b] the right side grows by 2 per unit of x = 2c + 1.
    let slack = 20 * d as i64 - (b - a);
    if slack < 0 {
        return None;
    }
    let (x_lo, x_hi) = (2 * a - slack, 2 * b + slack);
    Some(((x_lo - 1).div_euclid(2) + (x_lo - 1).rem_euclid(2), (x_hi - 1).div_euclid(2)))
}

fn bound_holds(p: &PreferenceStructure, c: i64, measure: impl Fn(&Permutation) -> Vec<u32>) -> bool {
    let dom = p.domain();
    for side in [p.women(), p.men()] {
        for (i, perm) in dom.iter().zip(side) {
            for (j, d) in dom.iter().zip(measure(perm)) {
                if let Some((a, b)) = failing_cuts(i, j, d) {
                    if a <= c && c <= b {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn displacements(perm: &Permutation) -> Vec<u32> {
    perm.domain().iter().zip(perm.values()).map(|(j, v)| (v - j).unsigned_abs() as u32).collect()
}

/// Every ranking moves every item by less than `(|i - s| + |j - s|) / 20`.
///
/// `c` may lie outside the domain; the bound is still meaningful there.
pub fn rank_displacement_ok(p: &PreferenceStructure, c: i64) -> bool {
    bound_holds(p, c, displacements)
}

/// The offset analogue of [`rank_displacement_ok`]. Offsets only shrink under
/// restriction, so checking the full domain covers every subinterval.
pub fn lattice_bound_ok(p: &PreferenceStructure, c: i64) -> bool {
    bound_holds(p, c, Permutation::offsets)
}

fn cuts_where(p: &PreferenceStructure, measure: impl Fn(&Permutation) -> Vec<u32> + Sync) -> Vec<CutPosition> {
    let dom = p.domain();
    if dom.len() < 2 {
        return Vec::new();
    }
    let (lo, hi) = (dom.lo(), dom.hi() - 1);
    let slots = (hi - lo + 2) as usize;
    let people: Vec<(i64, &Permutation)> =
        dom.iter().zip(p.women()).chain(dom.iter().zip(p.men())).collect();
    let diff = people
        .par_iter()
        .fold(
            || vec![0i64; slots],
            |mut acc, &(i, perm)| {
                for (j, d) in dom.iter().zip(measure(perm)) {
                    if let Some((a, b)) = failing_cuts(i, j, d) {
                        let (a, b) = (a.max(lo), b.min(hi));
                        if a <= b {
                            acc[(a - lo) as usize] += 1;
                            acc[(b - lo + 1) as usize] -= 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0i64; slots],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut run = 0;
    let mut out = Vec::new();
    for c in lo..=hi {
        run += diff[(c - lo) as usize];
        if run == 0 {
            out.push(CutPosition(c));
        }
    }
    out
}

/// All cuts inside the domain certified by [`lattice_bound_ok`].
pub fn certified_cuts(p: &PreferenceStructure) -> Vec<CutPosition> {
    cuts_where(p, Permutation::offsets)
}

/// All cuts inside the domain where [`rank_displacement_ok`] holds.
pub fn displacement_cuts(p: &PreferenceStructure) -> Vec<CutPosition> {
    cuts_where(p, displacements)
}

/// Local cut positions `k` (cut between `k` and `k + 1`) that no stable pair straddles.
fn unstraddled(inst: &Instance, lattice: &StableLattice) -> Vec<usize> {
    let n = inst.n;
    let lo = inst.lo;
    let mut diff = vec![0i64; n + 1];
    for (w, m) in lattice.stable_pairs() {
        let (a, b) = ((w.min(m) - lo) as usize, (w.max(m) - lo) as usize);
        if a < b {
            diff[a] += 1;
            diff[b] -= 1;
        }
    }
    let mut run = 0;
    let mut out = Vec::new();
    for (k, d) in diff.iter().enumerate().take(n.saturating_sub(1)) {
        run += d;
        if run == 0 {
            out.push(k);
        }
    }
    out
}

/// Whether every union of a left-stable and a right-stable matching is
/// stable, i.e. no straddling pair can block any combination.
fn unions_stable(inst: &Instance, k: usize) -> bool {
    let n = inst.n;
    let left = inst.restrict(0, k + 1);
    let right = inst.restrict(k + 1, n - k - 1);
    // Worst partners for women come from men proposing, and vice versa.
    let mut worst_husband = vec![0u32; n];
    let mut worst_wife = vec![0u32; n];
    for (block, shift) in [(&left, 0u32), (&right, k as u32 + 1)] {
        for (w, &m) in block.gale_shapley(true).iter().enumerate() {
            worst_husband[w + shift as usize] = m + shift;
        }
        for (w, &m) in block.gale_shapley(false).iter().enumerate() {
            worst_wife[(m + shift) as usize] = w as u32 + shift;
        }
    }
    let blocks = |w: u32, m: u32| {
        inst.w_rank(w, m) > inst.w_rank(w, worst_husband[w as usize])
            && inst.m_rank(m, w) > inst.m_rank(m, worst_wife[m as usize])
    };
    let (l, r) = (0..k as u32 + 1, k as u32 + 1..n as u32);
    !l.clone().any(|a| r.clone().any(|b| blocks(a, b) || blocks(b, a)))
}

/// Whether the stable matchings of `p` are exactly the unions of stable
/// matchings of the two sides of the cut.
pub fn is_lattice_cutpoint_exact(p: &PreferenceStructure, c: i64) -> Result<bool> {
    let dom = p.domain();
    CutPosition::within(dom, c)?;
    let inst = Instance::from_prefs(p);
    let lattice = StableLattice::from_instance(&inst);
    let k = (c - dom.lo()) as usize;
    Ok(unstraddled(&inst, &lattice).contains(&k) && unions_stable(&inst, k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionMethod {
    /// Split at every certified cut.
    Certified,
    /// Recursively split at exact lattice cutpoints.
    Exact,
    /// Certified cuts first, then exact splitting inside each block.
    Auto,
}

impl std::str::FromStr for DecompositionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "certified" => Ok(Self::Certified),
            "exact" => Ok(Self::Exact),
            "auto" => Ok(Self::Auto),
            _ => Err(Error::BadParameter(format!("unknown method {s:?}; expected certified, exact or auto"))),
        }
    }
}

impl fmt::Display for DecompositionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Certified => "certified",
            Self::Exact => "exact",
            Self::Auto => "auto",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub domain: IntInterval,
    pub cuts: Vec<CutPosition>,
    pub blocks: Vec<IntInterval>,
    pub per_block_count: Vec<StableCount>,
    pub method: DecompositionMethod,
}

impl BlockDecomposition {
    pub fn total(&self) -> StableCount {
        StableCount::product(&self.per_block_count)
    }

    pub fn log_count(&self) -> f64 {
        self.per_block_count.iter().map(StableCount::log_value).sum()
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(IntInterval::len).max().unwrap_or(0)
    }

    /// The block containing `i`.
    pub fn block_of(&self, i: i64) -> Option<IntInterval> {
        self.blocks.iter().copied().find(|b| b.contains(i))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "domain": self.domain,
            "method": self.method,
            "cuts": self.cuts,
            "blocks": self.blocks,
            "per_block_count": self.per_block_count.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "total_count": self.total().to_string(),
            "log_count": self.log_count(),
        })
    }
}

/// Splits one window at exact lattice cutpoints until none remain. Candidate
/// cuts are tried from the middle outward. Returns the final blocks with
/// their lattices.
fn exact_blocks(root: Instance) -> Vec<(Instance, StableLattice)> {
    let mut work = vec![root];
    let mut done = Vec::new();
    while let Some(inst) = work.pop() {
        let lattice = StableLattice::from_instance(&inst);
        let mut candidates = unstraddled(&inst, &lattice);
        let mid2 = inst.n as i64 - 2;
        candidates.sort_by_key(|&k| ((2 * k as i64 - mid2).abs(), k));
        match candidates.into_iter().find(|&k| unions_stable(&inst, k)) {
            Some(k) => {
                work.push(inst.restrict(k + 1, inst.n - k - 1));
                work.push(inst.restrict(0, k + 1));
            }
            None => done.push((inst, lattice)),
        }
    }
    done.sort_by_key(|(inst, _)| inst.lo);
    done
}

fn interval_of(inst: &Instance) -> IntInterval {
    IntInterval::new(inst.lo, inst.lo + inst.n as i64 - 1).expect("nonempty block")
}

fn split_at(domain: IntInterval, cuts: &[CutPosition]) -> Vec<IntInterval> {
    let mut start = domain.lo();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    for c in cuts {
        out.push(IntInterval::new(start, c.0).expect("sorted cuts"));
        start = c.0 + 1;
    }
    out.push(IntInterval::new(start, domain.hi()).expect("sorted cuts"));
    out
}

/// Decompose `p` into blocks and count each block exactly.
///
/// `budget` bounds the counting work of each block separately.
pub fn decompose(p: &PreferenceStructure, method: DecompositionMethod, budget: u64) -> Result<BlockDecomposition> {
    let dom = p.domain();
    let pieces: Vec<(IntInterval, Option<StableLattice>)> = match method {
        DecompositionMethod::Certified => {
            split_at(dom, &certified_cuts(p)).into_iter().map(|b| (b, None)).collect()
        }
        DecompositionMethod::Exact => exact_blocks(Instance::from_prefs(p))
            .into_iter()
            .map(|(inst, lat)| (interval_of(&inst), Some(lat)))
            .collect(),
        DecompositionMethod::Auto => {
            let coarse = split_at(dom, &certified_cuts(p));
            let fine: Vec<Vec<(Instance, StableLattice)>> = coarse
                .par_iter()
                .map(|b| exact_blocks(Instance::from_window(p, *b).expect("block inside domain")))
                .collect();
            fine.into_iter().flatten().map(|(inst, lat)| (interval_of(&inst), Some(lat))).collect()
        }
    };
    let per_block_count = pieces
        .par_iter()
        .map(|(block, lattice)| match lattice {
            Some(l) => l.count(budget),
            None => StableLattice::for_window(p, *block)?.count(budget),
        })
        .collect::<Result<Vec<_>>>()?;
    let blocks: Vec<IntInterval> = pieces.into_iter().map(|(b, _)| b).collect();
    let cuts = blocks[..blocks.len() - 1].iter().map(|b| CutPosition(b.hi())).collect();
    Ok(BlockDecomposition { domain: dom, cuts, blocks, per_block_count, method })
}

/// Product of the per-block counts of [`decompose`].
pub fn count_stable_factored(p: &PreferenceStructure, method: DecompositionMethod, budget: u64) -> Result<StableCount> {
    Ok(decompose(p, method, budget)?.total())
}

/// All exact lattice cutpoints of the whole window (no recursion).
pub fn exact_cuts(p: &PreferenceStructure) -> Vec<CutPosition> {
    let inst = Instance::from_prefs(p);
    let lattice = StableLattice::from_instance(&inst);
    unstraddled(&inst, &lattice)
        .into_iter()
        .filter(|&k| unions_stable(&inst, k))
        .map(|k| CutPosition(inst.lo + k as i64))
        .collect()
}

/// Cuts of the window that no stable matching straddles.
pub fn matching_cuts(p: &PreferenceStructure) -> BTreeSet<CutPosition> {
    let inst = Instance::from_prefs(p);
    let lattice = StableLattice::from_instance(&inst);
    unstraddled(&inst, &lattice).into_iter().map(|k| CutPosition(inst.lo + k as i64)).collect()
}
