//! Monte Carlo estimates over sampled preference structures.

use rayon::prelude::*;
use serde::Serialize;

use crate::cutpoints::{certified_cuts, decompose, exact_cuts, DecompositionMethod};
use crate::error::{Error, Result};
use crate::mallows::MallowsParams;
use crate::perm::IntInterval;
use crate::prefs::PreferenceStructure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Growth rate of one block of a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockGrowth {
    pub block: IntInterval,
    pub log_count: f64,
    /// `log_count / block length`
    pub growth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// `None` when the counting budget ran out.
    pub log_count: Option<f64>,
    pub block_count: usize,
    pub max_block: usize,
    pub blocks: Vec<BlockGrowth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub q: f64,
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub method: DecompositionMethod,
    pub budget: u64,
    pub per_trial: Vec<TrialRecord>,
    /// Mean of `log_count / n` over completed trials.
    pub gamma_hat: f64,
    pub std_err: f64,
    pub failures: usize,
}

/// Sample mean and standard error (sample standard deviation over `sqrt(k)`).
pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

impl EstimateReport {
    /// Two-sided 95% normal interval for the growth rate.
    pub fn confidence_interval(&self) -> (f64, f64) {
        (self.gamma_hat - 1.96 * self.std_err, self.gamma_hat + 1.96 * self.std_err)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,n,trial,log_count,blocks,max_block\n");
        for t in &self.per_trial {
            match t.log_count {
                Some(l) => out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    self.q, self.n, t.trial, l, t.block_count, t.max_block
                )),
                None => out.push_str(&format!("{},{},{},,,\n", self.q, self.n, t.trial)),
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "version": VERSION,
            "config": {
                "command": "estimate-gamma",
                "q": self.q,
                "n": self.n,
                "trials": self.trials,
                "seed": self.master_seed,
                "method": self.method,
                "budget": self.budget,
            },
            "report": self,
        })
    }
}

fn run_trial(p: &PreferenceStructure, trial: u64, method: DecompositionMethod, budget: u64) -> Result<TrialRecord> {
    match decompose(p, method, budget) {
        Ok(d) => {
            let blocks = d
                .blocks
                .iter()
                .zip(&d.per_block_count)
                .map(|(b, c)| {
                    let l = c.log_value();
                    BlockGrowth { block: *b, log_count: l, growth: l / b.len() as f64 }
                })
                .collect();
            Ok(TrialRecord {
                trial,
                log_count: Some(d.log_count()),
                block_count: d.blocks.len(),
                max_block: d.max_block(),
                blocks,
                failure: None,
            })
        }
        Err(e @ Error::BudgetExceeded { .. }) => Ok(TrialRecord {
            trial,
            log_count: None,
            block_count: 0,
            max_block: 0,
            blocks: Vec::new(),
            failure: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

/// Growth-rate estimate over structures produced by `make(trial)`.
///
/// Trials run in parallel; records are kept in trial order so the report
/// does not depend on scheduling.
pub fn estimate_gamma_with<F>(
    q: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
    method: DecompositionMethod,
    budget: u64,
    make: F,
) -> Result<EstimateReport>
where
    F: Fn(u64) -> Result<PreferenceStructure> + Sync,
{
    if trials == 0 {
        return Err(Error::BadParameter("trials must be at least 1".into()));
    }
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(&make(t)?, t, method, budget))
        .collect::<Result<Vec<_>>>()?;
    let rates: Vec<f64> = per_trial.iter().filter_map(|t| t.log_count).map(|l| l / n as f64).collect();
    if rates.is_empty() {
        return Err(Error::AllTrialsFailed { trials: trials as usize });
    }
    let (gamma_hat, std_err) = mean_and_stderr(&rates);
    Ok(EstimateReport {
        q,
        n,
        trials,
        master_seed,
        method,
        budget,
        failures: per_trial.len() - rates.len(),
        per_trial,
        gamma_hat,
        std_err,
    })
}

/// `log(#stable matchings) / n` averaged over independent Mallows markets on `[1, n]`.
pub fn estimate_gamma(
    params: &MallowsParams,
    n: usize,
    trials: u64,
    master_seed: u64,
    method: DecompositionMethod,
    budget: u64,
) -> Result<EstimateReport> {
    let domain = IntInterval::one_to(n)?;
    estimate_gamma_with(params.q(), n, trials, master_seed, method, budget, |t| {
        PreferenceStructure::sample_trial(params, domain, master_seed, t)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CutKind {
    Certified,
    Exact,
}

impl std::str::FromStr for CutKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "certified" => Ok(Self::Certified),
            "exact" => Ok(Self::Exact),
            _ => Err(Error::BadParameter(format!("unknown cut kind {s:?}; expected certified or exact"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub q: f64,
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub kind: CutKind,
    pub margin: usize,
    /// Cut positions examined per trial.
    pub positions: usize,
    pub per_trial: Vec<f64>,
    pub density_hat: f64,
    pub std_err: f64,
}

impl DensityReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "version": VERSION,
            "config": {
                "command": "estimate-rho",
                "q": self.q,
                "n": self.n,
                "trials": self.trials,
                "seed": self.master_seed,
                "kind": self.kind,
                "margin": self.margin,
            },
            "report": self,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,n,trial,kind,margin,density\n");
        let kind = match self.kind {
            CutKind::Certified => "certified",
            CutKind::Exact => "exact",
        };
        for (t, d) in self.per_trial.iter().enumerate() {
            out.push_str(&format!("{},{},{},{},{},{}\n", self.q, self.n, t, kind, self.margin, d));
        }
        out
    }
}

/// Fraction of cuts `c` in `[1 + margin, n - 1 - margin]` that are cutpoints
/// of the given kind. Window edges make cuts easier, so the margin (default
/// `n / 10`) keeps the estimate from being biased upward.
pub fn estimate_cut_density(
    params: &MallowsParams,
    n: usize,
    trials: u64,
    master_seed: u64,
    kind: CutKind,
    margin: Option<usize>,
) -> Result<DensityReport> {
    if trials == 0 {
        return Err(Error::BadParameter("trials must be at least 1".into()));
    }
    let margin = margin.unwrap_or(n / 10);
    let domain = IntInterval::one_to(n)?;
    let (first, last) = (1 + margin as i64, n as i64 - 1 - margin as i64);
    if first > last {
        return Err(Error::BadParameter(format!("margin {margin} leaves no cut positions in a window of {n}")));
    }
    let positions = (last - first + 1) as usize;
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let p = PreferenceStructure::sample_trial(params, domain, master_seed, t)?;
            let cuts = match kind {
                CutKind::Certified => certified_cuts(&p),
                CutKind::Exact => exact_cuts(&p),
            };
            let hits = cuts.iter().filter(|c| (first..=last).contains(&c.0)).count();
            Ok(hits as f64 / positions as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let (density_hat, std_err) = mean_and_stderr(&per_trial);
    Ok(DensityReport { q: params.q(), n, trials, master_seed, kind, margin, positions, per_trial, density_hat, std_err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::count_stable;

    #[test]
    fn identity_limit_has_zero_growth() {
        let p = MallowsParams::new(1e-9).unwrap();
        let r = estimate_gamma(&p, 100, 20, 3, DecompositionMethod::Exact, 1000).unwrap();
        assert_eq!(r.gamma_hat, 0.0);
        assert_eq!(r.std_err, 0.0);
        assert_eq!(r.failures, 0);
        assert!(r.per_trial.iter().all(|t| t.block_count == 100));
    }

    #[test]
    fn planted_gadget_fixture() {
        let n = 30;
        let r = estimate_gamma_with(0.0, n, 5, 0, DecompositionMethod::Auto, 100, |t| {
            PreferenceStructure::identity(IntInterval::one_to(n).unwrap()).with_gadget_at(3 + t as i64)
        })
        .unwrap();
        for t in &r.per_trial {
            assert!((t.log_count.unwrap() - 2f64.ln()).abs() < 1e-15);
        }
        assert!((r.gamma_hat - 2f64.ln() / n as f64).abs() < 1e-15);
    }

    #[test]
    fn budget_failures_are_counted() {
        let p = MallowsParams::new(0.9).unwrap();
        let r = estimate_gamma(&p, 12, 6, 1, DecompositionMethod::Exact, u64::MAX).unwrap();
        let sizes: Vec<usize> = r.per_trial.iter().map(|t| t.max_block).collect();
        assert!(sizes.iter().any(|&s| s > 1));
        match estimate_gamma(&p, 40, 4, 1, DecompositionMethod::Exact, 0) {
            Err(Error::AllTrialsFailed { trials: 4 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn factored_log_matches_direct() {
        let p = MallowsParams::new(0.5).unwrap();
        let r = estimate_gamma(&p, 25, 8, 11, DecompositionMethod::Auto, u64::MAX).unwrap();
        for t in &r.per_trial {
            let s = PreferenceStructure::sample_trial(&p, IntInterval::one_to(25).unwrap(), 11, t.trial).unwrap();
            let direct = count_stable(&s, u64::MAX).unwrap().log_value();
            assert!((t.log_count.unwrap() - direct).abs() < 1e-12);
        }
        assert!(r.to_csv().lines().count() == 9);
    }

    #[test]
    fn density_kinds_are_ordered() {
        let p = MallowsParams::new(1e-9).unwrap();
        let r = estimate_cut_density(&p, 50, 5, 1, CutKind::Certified, None).unwrap();
        assert_eq!(r.density_hat, 1.0);
        let p = MallowsParams::new(0.1).unwrap();
        let c = estimate_cut_density(&p, 60, 10, 2, CutKind::Certified, Some(5)).unwrap();
        let e = estimate_cut_density(&p, 60, 10, 2, CutKind::Exact, Some(5)).unwrap();
        for (a, b) in c.per_trial.iter().zip(&e.per_trial) {
            assert!(a <= b);
        }
        assert!(matches!(
            estimate_cut_density(&p, 10, 1, 0, CutKind::Exact, Some(5)),
            Err(Error::BadParameter(_))
        ));
    }
}
