//! The Mallows measure on permutations of a finite interval.
//!
//! Sampling goes through the Lehmer code: under `Mal_q` the right-inversion
//! counts `c_j` are independent, with `c_j` a geometric variable of ratio `q`
//! truncated to `[0, hi - j]`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{all_permutations, IntInterval, LehmerCode, Permutation};

/// Largest domain for which exhaustive tables are built.
pub const MAX_TABLE_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallowsParams {
    q: f64,
}

impl MallowsParams {
    /// `q` must lie in the open interval `(0, 1)`.
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q < 1.0 {
            Ok(MallowsParams { q })
        } else {
            Err(Error::BadParameter(format!("q must lie in (0, 1), got {q}")))
        }
    }

    /// The `q = 0` limit, a point mass on the identity.
    pub fn identity_limit() -> Self {
        MallowsParams { q: 0.0 }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    fn is_degenerate(&self) -> bool {
        self.q == 0.0
    }

    /// `Z(q, n) = prod_{k=1}^n (1 + q + ... + q^{k-1})`.
    pub fn partition(&self, n: usize) -> Result<f64> {
        let z = self.log_partition(n).exp();
        if z.is_finite() {
            Ok(z)
        } else {
            Err(Error::Overflow)
        }
    }

    /// `ln Z(q, n)`, accumulated from the product form.
    pub fn log_partition(&self, n: usize) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let ln_one_minus_q = (-self.q).ln_1p();
        let mut qk = 1.0;
        let mut total = 0.0;
        for _ in 1..=n {
            qk *= self.q;
            // 1 + q + ... + q^{k-1} = (1 - q^k) / (1 - q)
            total += (-qk).ln_1p() - ln_one_minus_q;
        }
        total
    }

    /// `q^{inv(p)} / Z(q, |p|)`.
    pub fn pmf(&self, p: &Permutation) -> f64 {
        let inv = p.inversion_number();
        if self.is_degenerate() {
            return if inv == 0 { 1.0 } else { 0.0 };
        }
        (inv as f64 * self.q.ln() - self.log_partition(p.len())).exp()
    }

    /// Euler-type product `phi(q) = prod_{k>=1} (1 - q^k)`.
    ///
    /// Truncated once `q^{K+1} / (1-q)^2`, which bounds the log of the
    /// neglected tail, drops below `1e-14`.
    pub fn phi(&self) -> f64 {
        self.log_phi().exp()
    }

    /// `ln phi(q)`, finite for every `q` in `(0, 1)` even where `phi` underflows.
    pub fn log_phi(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let q = self.q;
        let tail_scale = 1.0 / ((1.0 - q) * (1.0 - q));
        let mut log_sum = 0.0;
        let mut qk = q;
        loop {
            log_sum += (-qk).ln_1p();
            if qk * q * tail_scale < 1e-14 {
                break;
            }
            qk *= q;
        }
        log_sum
    }

    /// Exact law of the truncated geometric on `[0, max]`: weights `q^k` normalized.
    pub fn truncated_geometric_pmf(&self, max: u32) -> Vec<f64> {
        if self.is_degenerate() {
            let mut v = vec![0.0; max as usize + 1];
            v[0] = 1.0;
            return v;
        }
        let weights: Vec<f64> = (0..=max).map(|k| self.q.powi(k as i32)).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Draw `L` on `[0, max]` with `P(L >= k) = (q^k + ... + q^max) / (1 + ... + q^max)`
    /// by closed-form inversion of the survival function.
    pub fn truncated_geometric<R: Rng + ?Sized>(&self, max: u32, rng: &mut R) -> u32 {
        if max == 0 || self.is_degenerate() {
            return 0;
        }
        let ln_q = self.q.ln();
        let tail = ((max as f64 + 1.0) * ln_q).exp();
        let u: f64 = rng.random();
        // P(L >= k) = P(q^k > x) with x uniform on [q^{max+1}, 1)
        let x = u * (1.0 - tail) + tail;
        let r = x.ln() / ln_q;
        if !r.is_finite() || r > max as f64 {
            return max;
        }
        (r.ceil() as i64 - 1).clamp(0, max as i64) as u32
    }

    /// Exact `Mal_{q, domain}` sample via independent truncated geometric Lehmer entries.
    pub fn sample<R: Rng + ?Sized>(&self, domain: IntInterval, rng: &mut R) -> Result<Permutation> {
        if domain.is_empty() {
            return Err(Error::BadParameter("cannot sample on an empty domain".into()));
        }
        if self.is_degenerate() {
            return Ok(Permutation::identity(domain));
        }
        let n = domain.len();
        let code: Vec<u32> =
            (0..n).map(|k| self.truncated_geometric((n - 1 - k) as u32, rng)).collect();
        Ok(LehmerCode::new(domain, code)?.decode())
    }

    /// Exhaustive law on `[1, n]`.
    pub fn exact_table(&self, n: usize) -> Result<MallowsTable> {
        self.exact_table_on(IntInterval::one_to(n)?)
    }

    /// Exhaustive law on an arbitrary domain of size at most [`MAX_TABLE_SIZE`].
    pub fn exact_table_on(&self, domain: IntInterval) -> Result<MallowsTable> {
        if domain.len() > MAX_TABLE_SIZE {
            return Err(Error::TooLarge { size: domain.len(), limit: MAX_TABLE_SIZE });
        }
        if domain.is_empty() {
            return Err(Error::BadParameter("empty domain".into()));
        }
        let entries = all_permutations(domain)
            .into_iter()
            .map(|p| {
                let pr = self.pmf(&p);
                (p, pr)
            })
            .collect();
        Ok(MallowsTable { domain, entries })
    }
}

/// Every permutation of a small domain with its Mallows probability, in
/// lexicographic order of value arrays.
#[derive(Clone, Debug)]
pub struct MallowsTable {
    domain: IntInterval,
    entries: Vec<(Permutation, f64)>,
}

impl MallowsTable {
    pub fn domain(&self) -> IntInterval {
        self.domain
    }

    pub fn entries(&self) -> &[(Permutation, f64)] {
        &self.entries
    }

    pub fn probability(&self, p: &Permutation) -> f64 {
        self.entries
            .binary_search_by(|(q, _)| q.values().cmp(p.values()))
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, pr)| pr).sum()
    }

    /// Total-variation distance between this law and an empirical count table.
    pub fn tv_distance(&self, counts: &BTreeMap<Vec<i64>, u64>) -> f64 {
        let total: u64 = counts.values().sum();
        let mut tv = 0.0;
        for (p, pr) in &self.entries {
            let emp = counts.get(p.values()).copied().unwrap_or(0) as f64 / total as f64;
            tv += (emp - pr).abs();
        }
        // mass outside the support (cannot happen for valid samples)
        for (k, &c) in counts {
            if self.entries.binary_search_by(|(q, _)| q.values().cmp(k)).is_err() {
                tv += c as f64 / total as f64;
            }
        }
        tv / 2.0
    }

    /// JSON object keyed by comma-joined value arrays.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|(p, pr)| {
                let key = p.values().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                (key, serde_json::json!(pr))
            })
            .collect();
        serde_json::json!({ "domain": self.domain, "probabilities": map })
    }
}

pub fn mallows_partition(params: &MallowsParams, n: usize) -> Result<f64> {
    params.partition(n)
}

pub fn mallows_log_partition(params: &MallowsParams, n: usize) -> f64 {
    params.log_partition(n)
}

pub fn mallows_pmf(p: &Permutation, params: &MallowsParams) -> f64 {
    params.pmf(p)
}

pub fn truncated_geometric<R: Rng + ?Sized>(params: &MallowsParams, max: u32, rng: &mut R) -> u32 {
    params.truncated_geometric(max, rng)
}

pub fn sample_mallows<R: Rng + ?Sized>(
    params: &MallowsParams,
    domain: IntInterval,
    rng: &mut R,
) -> Result<Permutation> {
    params.sample(domain, rng)
}

pub fn exact_mallows_table(params: &MallowsParams, n: usize) -> Result<MallowsTable> {
    params.exact_table(n)
}

pub fn phi_q(params: &MallowsParams) -> f64 {
    params.phi()
}
