//! Empirical checks of permutation-level inequalities and laws.
//!
//! Every check compares a frequency over `samples` Mallows draws to a closed
//! form. Upper bounds pass when `empirical <= bound + 3 sigma`, lower bounds
//! when `empirical >= bound - 3 sigma`, where sigma is the binomial standard
//! error at the bound value.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mallows::MallowsParams;
use crate::perm::{IntInterval, Permutation};
use crate::rng::{RngStream, StreamRole};

use super::bounds::res_lower_bound;
use super::estimate::VERSION;

const CHUNK: u64 = 4096;

/// Draws `samples` permutations of `domain` and folds them chunk by chunk.
/// Chunk `k` uses stream `(Permutation, 0, k)`, so results do not depend on
/// the thread count.
fn fold_samples<T, F, M>(params: &MallowsParams, domain: IntInterval, samples: u64, seed: u64, init: T, step: F, merge: M) -> Result<T>
where
    T: Clone + Send + Sync,
    F: Fn(&mut T, &Permutation) + Sync,
    M: Fn(T, T) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::for_person(seed, StreamRole::Permutation, 0, k);
            let mut acc = init.clone();
            let take = CHUNK.min(samples - k * CHUNK);
            for _ in 0..take {
                step(&mut acc, &params.sample(domain, &mut rng)?);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(parts.into_iter().fold(init, merge))
}

fn add_vecs(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStat {
    /// `P(offset(pi, j) >= t) <= 2 q^t`
    Offset,
    /// `P(#{i > j : pi(i) < pi(j)} >= k) <= q^k`
    RightInversions,
    /// `P(#{i < j : pi(i) > pi(j)} >= k) <= q^k`
    LeftInversions,
    /// `P(pi(j + d) <= pi(j)) <= 4 q^d`
    PairOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub stat: TailStat,
    /// Threshold `t`, `k`, or gap `d`.
    pub k: u32,
    pub hits: u64,
    pub empirical: f64,
    pub bound: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub q: f64,
    pub n: usize,
    pub center: i64,
    pub samples: u64,
    pub master_seed: u64,
    pub rows: Vec<CheckRow>,
    /// Every empirical tail is nonincreasing in its threshold.
    pub monotone: bool,
    pub pass: bool,
}

impl TailReport {
    pub fn failing(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "version": VERSION, "report": self })
    }
}

fn upper_row(stat: TailStat, k: u32, hits: u64, samples: u64, bound: f64) -> CheckRow {
    let p = bound.min(1.0);
    let sigma = (p * (1.0 - p) / samples as f64).sqrt();
    let empirical = hits as f64 / samples as f64;
    CheckRow { stat, k, hits, empirical, bound, sigma, pass: empirical <= bound + 3.0 * sigma }
}

/// Largest threshold examined by [`verify_offset_tail`].
pub const MAX_TAIL_THRESHOLD: u32 = 10;

/// Tail frequencies of the inversion counts at the window center `j`, and
/// of `pi(j + d) <= pi(j)` for gaps `d <= 10` that fit in the window.
pub fn verify_offset_tail(params: &MallowsParams, n: usize, samples: u64, master_seed: u64) -> Result<TailReport> {
    if samples == 0 {
        return Err(Error::BadParameter("samples must be at least 1".into()));
    }
    let domain = IntInterval::one_to(n)?;
    let center = (n as i64 + 1) / 2;
    let kmax = MAX_TAIL_THRESHOLD as usize;
    let gaps = kmax.min(n - center as usize);
    // Layout: offset tails, right tails, left tails, pair gaps.
    let width = 3 * (kmax + 1) + gaps + 1;
    let counts = fold_samples(
        params,
        domain,
        samples,
        master_seed,
        vec![0u64; width],
        |acc, pi| {
            let s = pi.l_stats(center).expect("center in domain");
            // Tail counters: every threshold up to the observed value is hit.
            for (block, value) in [s.offset(), s.l_pm, s.l_mp].into_iter().enumerate() {
                let start = block * (kmax + 1);
                acc[start..=start + kmax.min(value as usize)].iter_mut().for_each(|c| *c += 1);
            }
            let vj = pi.at(center);
            for d in 0..=gaps {
                if pi.at(center + d as i64) <= vj {
                    acc[3 * (kmax + 1) + d] += 1;
                }
            }
        },
        add_vecs,
    )?;
    let q = params.q();
    let blocks = [(TailStat::Offset, 2.0), (TailStat::RightInversions, 1.0), (TailStat::LeftInversions, 1.0)];
    let mut rows = Vec::new();
    for (k, (stat, factor)) in blocks.into_iter().enumerate() {
        let hits = &counts[k * (kmax + 1)..(k + 1) * (kmax + 1)];
        for (t, &h) in hits.iter().enumerate() {
            rows.push(upper_row(stat, t as u32, h, samples, factor * q.powi(t as i32)));
        }
    }
    for (d, &h) in counts[3 * (kmax + 1)..].iter().enumerate() {
        rows.push(upper_row(TailStat::PairOrder, d as u32, h, samples, 4.0 * q.powi(d as i32)));
    }
    let monotone = [TailStat::Offset, TailStat::RightInversions, TailStat::LeftInversions].iter().all(|&stat| {
        let hits: Vec<u64> = rows.iter().filter(|r| r.stat == stat).map(|r| r.hits).collect();
        hits.windows(2).all(|w| w[1] <= w[0])
    });
    let pass = monotone && rows.iter().all(|r| r.pass);
    Ok(TailReport { q, n, center, samples, master_seed, rows, monotone, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawReport {
    pub q: f64,
    pub n: usize,
    pub samples: u64,
    pub master_seed: u64,
    /// Total variation between the empirical law on `S_n` and the exact table.
    pub tv_permutation: f64,
    /// Per position `j`, total variation between the empirical law of the
    /// Lehmer entry `c_j` and its truncated geometric law.
    pub tv_lehmer: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl LawReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "version": VERSION, "report": self })
    }
}

/// Empirical law of the sampler against the exact Mallows table (`n <= 8`).
pub fn verify_law(params: &MallowsParams, n: usize, samples: u64, master_seed: u64, tolerance: f64) -> Result<LawReport> {
    if samples == 0 {
        return Err(Error::BadParameter("samples must be at least 1".into()));
    }
    let table = params.exact_table(n)?;
    let domain = table.domain();
    type Acc = (BTreeMap<Vec<i64>, u64>, Vec<Vec<u64>>);
    let init: Acc = (BTreeMap::new(), (0..n).map(|k| vec![0u64; n - k]).collect());
    let (perms, codes) = fold_samples(
        params,
        domain,
        samples,
        master_seed,
        init,
        |(perms, codes), pi| {
            *perms.entry(pi.values().to_vec()).or_insert(0) += 1;
            for (k, &c) in pi.lehmer_code().entries().iter().enumerate() {
                codes[k][c as usize] += 1;
            }
        },
        |(mut pa, ca), (pb, cb)| {
            for (k, v) in pb {
                *pa.entry(k).or_insert(0) += v;
            }
            (pa, ca.into_iter().zip(cb).map(|(a, b)| add_vecs(a, b)).collect())
        },
    )?;
    let tv_permutation = table.tv_distance(&perms);
    let tv_lehmer: Vec<f64> = codes
        .iter()
        .enumerate()
        .map(|(k, counts)| {
            let pmf = params.truncated_geometric_pmf((n - 1 - k) as u32);
            0.5 * pmf.iter().zip(counts).map(|(p, &c)| (c as f64 / samples as f64 - p).abs()).sum::<f64>()
        })
        .collect();
    let pass = tv_permutation <= tolerance && tv_lehmer.iter().all(|&t| t <= tolerance);
    Ok(LawReport { q: params.q(), n, samples, master_seed, tv_permutation, tv_lehmer, tolerance, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResReport {
    pub q: f64,
    pub n: usize,
    pub inner: IntInterval,
    pub pattern: Vec<i64>,
    pub samples: u64,
    pub hits: u64,
    pub empirical: f64,
    pub bound: f64,
    /// Exact probability from the partition function.
    pub exact: f64,
    pub sigma: f64,
    pub pass: bool,
}

/// Frequency of `pi` fixing both outer parts of `[1, n]` around `inner` and
/// restricting to `pattern` there, against its closed-form lower bound.
pub fn verify_res_bound(
    params: &MallowsParams,
    n: usize,
    pattern: &Permutation,
    samples: u64,
    master_seed: u64,
) -> Result<ResReport> {
    if samples == 0 {
        return Err(Error::BadParameter("samples must be at least 1".into()));
    }
    let domain = IntInterval::one_to(n)?;
    let inner = pattern.domain();
    if !domain.contains_interval(&inner) || inner.is_empty() {
        return Err(Error::NotSubinterval { sub_lo: inner.lo(), sub_hi: inner.hi(), lo: 1, hi: n as i64 });
    }
    let hits = fold_samples(
        params,
        domain,
        samples,
        master_seed,
        0u64,
        |acc, pi| {
            if pi.is_in_res(pattern, inner).expect("pattern domain checked") {
                *acc += 1;
            }
        },
        |a, b| a + b,
    )?;
    let bound = res_lower_bound(params, pattern.inversion_number(), inner.len() as u64)?.value();
    let below = (inner.lo() - 1) as usize;
    let above = n - inner.hi() as usize;
    let exact = (pattern.inversion_number() as f64 * params.q().ln() + params.log_partition(below)
        + params.log_partition(above)
        - params.log_partition(n))
    .exp();
    let empirical = hits as f64 / samples as f64;
    let sigma = (bound * (1.0 - bound) / samples as f64).sqrt();
    Ok(ResReport {
        q: params.q(),
        n,
        inner,
        pattern: pattern.values().to_vec(),
        samples,
        hits,
        empirical,
        bound,
        exact,
        sigma,
        pass: empirical >= bound - 3.0 * sigma,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub margin: usize,
    pub window: IntInterval,
    /// Distance from the center to the nearer edge of `window`.
    pub distance: i64,
    pub hits: u64,
    pub probability: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub q: f64,
    pub n: usize,
    pub center: i64,
    pub samples: u64,
    pub master_seed: u64,
    pub rows: Vec<DecayRow>,
    /// Probabilities are nonincreasing in `distance`, up to three combined sigmas.
    pub pass: bool,
}

impl DecayReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "version": VERSION, "report": self })
    }
}

fn offset_within(pi: &Permutation, j: i64, window: IntInterval) -> u32 {
    let v = pi.at(j);
    let right = (j + 1..=window.hi()).filter(|&i| pi.at(i) < v).count();
    let left = (window.lo()..j).filter(|&i| pi.at(i) > v).count();
    right.max(left) as u32
}

/// `P(offset(pi, j) > offset(pi restricted to I, j))` at the center `j`, for
/// `I` the window shrunk by each margin on both sides. Rows come in
/// increasing margin, so decreasing distance from `j` to the edge of `I`;
/// the probability should grow along them.
pub fn verify_restriction_offset_decay(
    params: &MallowsParams,
    n: usize,
    margins: &[usize],
    samples: u64,
    master_seed: u64,
) -> Result<DecayReport> {
    if samples == 0 {
        return Err(Error::BadParameter("samples must be at least 1".into()));
    }
    let domain = IntInterval::one_to(n)?;
    let center = (n as i64 + 1) / 2;
    let mut margins = margins.to_vec();
    margins.sort_unstable();
    margins.dedup();
    let windows = margins
        .iter()
        .map(|&m| {
            let w = IntInterval::new(1 + m as i64, n as i64 - m as i64)?;
            if !w.contains(center) {
                return Err(Error::BadParameter(format!("margin {m} excludes the center of a window of {n}")));
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    let counts = fold_samples(
        params,
        domain,
        samples,
        master_seed,
        vec![0u64; windows.len()],
        |acc, pi| {
            let full = pi.offset(center).expect("center in domain");
            for (slot, w) in acc.iter_mut().zip(&windows) {
                if full > offset_within(pi, center, *w) {
                    *slot += 1;
                }
            }
        },
        add_vecs,
    )?;
    let rows: Vec<DecayRow> = margins
        .iter()
        .zip(&windows)
        .zip(&counts)
        .map(|((&margin, &window), &hits)| {
            let p = hits as f64 / samples as f64;
            DecayRow {
                margin,
                window,
                distance: (center - window.lo()).min(window.hi() - center),
                hits,
                probability: p,
                sigma: (p * (1.0 - p) / samples as f64).sqrt(),
            }
        })
        .collect();
    let pass = rows
        .windows(2)
        .all(|w| w[0].probability <= w[1].probability + 3.0 * (w[0].sigma.powi(2) + w[1].sigma.powi(2)).sqrt());
    Ok(DecayReport { q: params.q(), n, center, samples, master_seed, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(q: f64) -> MallowsParams {
        MallowsParams::new(q).unwrap()
    }

    #[test]
    fn offset_within_matches_restriction() {
        let p = mp(0.7);
        let mut rng = RngStream::for_person(1, StreamRole::Permutation, 0, 0);
        for _ in 0..200 {
            let pi = p.sample(IntInterval::one_to(15).unwrap(), &mut rng).unwrap();
            for (a, b) in [(1, 15), (3, 12), (8, 8), (5, 9)] {
                let w = IntInterval::new(a, b).unwrap();
                let direct = pi.restrict(w).unwrap().offset(8).unwrap();
                assert_eq!(offset_within(&pi, 8, w), direct);
            }
        }
    }

    #[test]
    fn tails_small_run() {
        let r = verify_offset_tail(&mp(0.5), 50, 20_000, 1).unwrap();
        assert_eq!(r.center, 25);
        let first = &r.rows[0];
        assert_eq!((first.stat, first.k, first.hits), (TailStat::Offset, 0, 20_000));
        assert!(first.pass);
        assert!(r.monotone);
        for row in r.rows.iter().filter(|r| r.stat != TailStat::PairOrder) {
            assert!(row.pass, "{row:?}");
        }
        let again = verify_offset_tail(&mp(0.5), 50, 20_000, 1).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn law_small_run() {
        let r = verify_law(&mp(0.5), 3, 50_000, 2, 0.01).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.tv_lehmer.len(), 3);
        assert!(matches!(verify_law(&mp(0.5), 9, 10, 2, 0.01), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn res_exact_probability() {
        // Exact Res probability equals the bound's structure without the phi slack.
        let id = Permutation::identity(IntInterval::new(3, 4).unwrap());
        let r = verify_res_bound(&mp(0.5), 6, &id, 40_000, 3).unwrap();
        assert!(r.exact >= r.bound);
        assert!((r.empirical - r.exact).abs() < 4.0 * (r.exact / 40_000.0).sqrt());
        assert!(r.pass);
        // Brute-force oracle over S_6.
        let table = mp(0.5).exact_table(6).unwrap();
        let direct: f64 = table
            .entries()
            .iter()
            .filter(|(pi, _)| pi.is_in_res(&id, id.domain()).unwrap())
            .map(|(_, w)| w)
            .sum();
        assert!((direct - r.exact).abs() < 1e-12);
    }

    #[test]
    fn decay_zero_margin() {
        let r = verify_restriction_offset_decay(&mp(0.5), 30, &[0, 3, 6], 5_000, 4).unwrap();
        assert_eq!(r.rows[0].hits, 0);
        assert_eq!(r.rows.iter().map(|r| r.distance).collect::<Vec<_>>(), vec![14, 11, 8]);
        assert!(r.rows[2].probability > 0.0);
        assert!(r.pass);
        assert!(matches!(
            verify_restriction_offset_decay(&mp(0.5), 10, &[5], 10, 0),
            Err(Error::BadParameter(_))
        ));
    }
}
