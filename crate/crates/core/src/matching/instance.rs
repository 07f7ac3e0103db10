use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::perm::IntInterval;
use crate::prefs::PreferenceStructure;

const NONE: u32 = u32::MAX;

/// Dense zero-based view of a preference structure (or a window of one).
///
/// `w_rank[w * n + m]` is woman `w`'s rank for man `m` in `0..n`, larger is
/// better; `m_list[m * n + r]` is man `m`'s `r`-th favourite woman.
#[derive(Clone, Debug)]
pub(crate) struct Instance {
    pub n: usize,
    pub lo: i64,
    w_rank: Vec<u32>,
    m_rank: Vec<u32>,
    w_list: Vec<u32>,
    m_list: Vec<u32>,
}

fn relative_ranks(values: &[i64], out: &mut [u32]) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by_key(|&k| values[k]);
    for (r, k) in order.into_iter().enumerate() {
        out[k] = r as u32;
    }
}

/// Preference lists, favourite first, from a rank table.
fn lists_from_ranks(n: usize, rank: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; n * n];
    for k in 0..n {
        for j in 0..n {
            out[k * n + (n - 1 - rank[k * n + j] as usize)] = j as u32;
        }
    }
    out
}

impl Instance {
    pub fn from_prefs(p: &PreferenceStructure) -> Self {
        Self::build(p, p.domain())
    }

    pub fn from_window(p: &PreferenceStructure, sub: IntInterval) -> Result<Self> {
        let dom = p.domain();
        if sub.is_empty() || !dom.contains_interval(&sub) {
            return Err(Error::NotSubinterval { sub_lo: sub.lo(), sub_hi: sub.hi(), lo: dom.lo(), hi: dom.hi() });
        }
        Ok(Self::build(p, sub))
    }

    fn build(p: &PreferenceStructure, sub: IntInterval) -> Self {
        let n = sub.len();
        let dom = p.domain();
        let start = (sub.lo() - dom.lo()) as usize;
        let full = sub == dom;
        let ranks = |side: &[crate::perm::Permutation]| -> Vec<u32> {
            let mut out = vec![0u32; n * n];
            for (k, perm) in side[start..start + n].iter().enumerate() {
                let vals = &perm.values()[start..start + n];
                let row = &mut out[k * n..(k + 1) * n];
                if full {
                    for (slot, v) in row.iter_mut().zip(vals) {
                        *slot = (v - dom.lo()) as u32;
                    }
                } else {
                    relative_ranks(vals, row);
                }
            }
            out
        };
        let w_rank = ranks(p.women());
        let m_rank = ranks(p.men());
        let w_list = lists_from_ranks(n, &w_rank);
        let m_list = lists_from_ranks(n, &m_rank);
        Instance { n, lo: sub.lo(), w_rank, m_rank, w_list, m_list }
    }

    #[inline]
    pub fn w_rank(&self, w: u32, m: u32) -> u32 {
        self.w_rank[w as usize * self.n + m as usize]
    }

    #[inline]
    pub fn m_rank(&self, m: u32, w: u32) -> u32 {
        self.m_rank[m as usize * self.n + w as usize]
    }

    /// Position of `w` in man `m`'s list, 0 = favourite.
    #[inline]
    pub fn m_pos(&self, m: u32, w: u32) -> usize {
        self.n - 1 - self.m_rank(m, w) as usize
    }

    #[inline]
    pub fn m_list(&self, m: u32, pos: usize) -> u32 {
        self.m_list[m as usize * self.n + pos]
    }

    /// Deferred acceptance; returns `husband_of_woman`.
    ///
    /// The lowest-index free proposer always moves next and scans candidates
    /// from the top of their list down.
    pub fn gale_shapley(&self, men_propose: bool) -> Vec<u32> {
        let n = self.n;
        let (prop_list, recv_rank) = if men_propose { (&self.m_list, &self.w_rank) } else { (&self.w_list, &self.m_rank) };
        let mut next = vec![0usize; n];
        let mut holder = vec![NONE; n];
        let mut free: BTreeSet<u32> = (0..n as u32).collect();
        while let Some(x) = free.pop_first() {
            let y = prop_list[x as usize * n + next[x as usize]] as usize;
            next[x as usize] += 1;
            let h = holder[y];
            if h == NONE {
                holder[y] = x;
            } else if recv_rank[y * n + x as usize] > recv_rank[y * n + h as usize] {
                holder[y] = x;
                free.insert(h);
            } else {
                free.insert(x);
            }
        }
        if men_propose {
            holder
        } else {
            let mut husband = vec![0u32; n];
            for (m, &w) in holder.iter().enumerate() {
                husband[w as usize] = m as u32;
            }
            husband
        }
    }

    /// The instance induced on local positions `start..start + len`.
    pub fn restrict(&self, start: usize, len: usize) -> Instance {
        let n = self.n;
        let sub = |rank: &[u32]| -> Vec<u32> {
            let mut out = vec![0u32; len * len];
            let mut vals = vec![0i64; len];
            for k in 0..len {
                let row = &rank[(start + k) * n + start..(start + k) * n + start + len];
                for (v, &r) in vals.iter_mut().zip(row) {
                    *v = r as i64;
                }
                relative_ranks(&vals, &mut out[k * len..(k + 1) * len]);
            }
            out
        };
        let w_rank = sub(&self.w_rank);
        let m_rank = sub(&self.m_rank);
        let w_list = lists_from_ranks(len, &w_rank);
        let m_list = lists_from_ranks(len, &m_rank);
        Instance { n: len, lo: self.lo + start as i64, w_rank, m_rank, w_list, m_list }
    }
}
