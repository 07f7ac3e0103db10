//! Closed-form lower bounds, evaluated in log space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mallows::MallowsParams;

/// A probability lower bound carried as its natural log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    /// `-inf` when the bound is vacuous.
    pub log_value: f64,
    /// False when the correction factor is nonpositive and the bound says nothing.
    pub finite: bool,
}

impl BoundValue {
    fn vacuous() -> Self {
        BoundValue { log_value: f64::NEG_INFINITY, finite: false }
    }

    /// `exp(log_value)`, which underflows to 0 for very negative logs.
    pub fn value(&self) -> f64 {
        if self.finite {
            self.log_value.exp()
        } else {
            0.0
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "log_value": if self.finite { serde_json::json!(self.log_value) } else { serde_json::Value::Null },
            "finite": self.finite,
            "value": self.value(),
        })
    }
}

fn check_q(params: &MallowsParams) -> Result<f64> {
    let q = params.q();
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::BadParameter(format!("bounds need 0 < q < 1, got {q}")));
    }
    Ok(q)
}

/// `ln(1 - x^2)` with `x = 4 q^{N/40} / (1 - q^{1/20})`; `None` when `x >= 1`.
fn log_correction(q: f64, n_param: u64) -> Option<f64> {
    let ln_q = q.ln();
    let ln_x = 4f64.ln() + (n_param as f64 / 40.0) * ln_q - (-(ln_q / 20.0).exp_m1()).ln();
    if ln_x >= 0.0 {
        return None;
    }
    let x2 = (2.0 * ln_x).exp();
    Some((-x2).ln_1p())
}

fn positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::BadParameter(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// `(1-q)^{8N^2} phi(q)^{4N} (1 - (4 q^{N/40} / (1 - q^{1/20}))^2)`: a lower
/// bound on the probability that a cut is certified in infinite volume.
pub fn rho_lower_bound(params: &MallowsParams, n_param: u64) -> Result<BoundValue> {
    let q = check_q(params)?;
    positive("N", n_param)?;
    let Some(corr) = log_correction(q, n_param) else {
        return Ok(BoundValue::vacuous());
    };
    let n = n_param as f64;
    let log_value = 8.0 * n * n * (-q).ln_1p() + 4.0 * n * params.log_phi() + corr;
    Ok(BoundValue { log_value, finite: true })
}

/// Best [`rho_lower_bound`] over `N` in `1..=n_max`.
pub fn rho_lower_bound_best(params: &MallowsParams, n_max: u64) -> Result<(u64, BoundValue)> {
    positive("n_max", n_max)?;
    let mut best: Option<(u64, BoundValue)> = None;
    for n in 1..=n_max {
        let b = rho_lower_bound(params, n)?;
        if b.finite && best.is_none_or(|(_, v)| b.log_value > v.log_value) {
            best = Some((n, b));
        }
    }
    best.ok_or(Error::NoFiniteValue { n_max })
}

/// `q^2 (1-q)^{8(N+m)^2} phi(q)^{4(N+m)} (1 - (4 q^{N/40} / (1 - q^{1/20}))^2)`:
/// a lower bound on planting the two-matching gadget inside certified cuts.
pub fn gadget_event_lower_bound(params: &MallowsParams, n_param: u64, m: u64) -> Result<BoundValue> {
    let q = check_q(params)?;
    positive("N", n_param)?;
    if m < 2 {
        return Err(Error::BadParameter(format!("gadget half-width must be at least 2, got {m}")));
    }
    let Some(corr) = log_correction(q, n_param) else {
        return Ok(BoundValue::vacuous());
    };
    let k = (n_param + m) as f64;
    let log_value = 2.0 * q.ln() + 8.0 * k * k * (-q).ln_1p() + 4.0 * k * params.log_phi() + corr;
    Ok(BoundValue { log_value, finite: true })
}

/// `q^{inv} (1-q)^{size} phi(q)`: lower bound on a Mallows permutation
/// restricting to a given pattern on an inner block of `size` items while
/// fixing both outer parts.
pub fn res_lower_bound(params: &MallowsParams, inv: u64, size: u64) -> Result<BoundValue> {
    let q = check_q(params)?;
    positive("block size", size)?;
    let log_value = inv as f64 * q.ln() + size as f64 * (-q).ln_1p() + params.log_phi();
    Ok(BoundValue { log_value, finite: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(q: f64) -> MallowsParams {
        MallowsParams::new(q).unwrap()
    }

    /// Log of each factor taken separately, with phi as a plain product.
    fn log_rho_direct(q: f64, n: f64) -> f64 {
        let phi: f64 = (1..2000).map(|k| 1.0 - q.powi(k)).product();
        let x = 4.0 * q.powf(n / 40.0) / (1.0 - q.powf(1.0 / 20.0));
        8.0 * n * n * (1.0 - q).ln() + 4.0 * n * phi.ln() + (1.0 - x * x).ln()
    }

    #[test]
    fn tiny_q() {
        let b = rho_lower_bound(&mp(1e-60), 1).unwrap();
        assert!(b.finite);
        // x = 4 * 10^{-1.5} / (1 - 10^{-3})
        let x = 4.0 * 10f64.powf(-1.5) / (1.0 - 1e-3);
        assert!((b.value() - (1.0 - x * x)).abs() < 1e-12);
        assert!((b.value() - 0.9840).abs() < 1e-3);
        // The correction keeps improving with N while the other factors stay at 1.
        let (_, best) = rho_lower_bound_best(&mp(1e-60), 50).unwrap();
        assert!(best.log_value >= b.log_value && best.log_value < 0.0);
    }

    #[test]
    fn agrees_with_direct_evaluation() {
        for &(q, n) in &[(0.01, 30.0), (0.1, 70.0), (0.3, 400.0)] {
            let b = rho_lower_bound(&mp(q), n as u64).unwrap();
            let d = log_rho_direct(q, n);
            assert!(d.is_finite() && b.finite);
            assert!((b.log_value - d).abs() < 1e-9 * d.abs().max(1.0), "q={q}");
        }
        let small = rho_lower_bound(&mp(0.01), 30).unwrap();
        assert!(small.value() > 0.0);
    }

    #[test]
    fn vacuous_and_threshold() {
        let b = rho_lower_bound(&mp(0.01), 1).unwrap();
        assert!(!b.finite);
        assert_eq!(b.value(), 0.0);
        // Correction turns positive once q^{N/40} < (1 - q^{1/20}) / 4.
        for q in [0.5, 0.9] {
            let ln_q: f64 = f64::ln(q);
            let threshold = 40.0 * (4.0 / (1.0 - q.powf(0.05))).ln() / -ln_q;
            let below = threshold.floor() as u64;
            assert!(!rho_lower_bound(&mp(q), below).unwrap().finite);
            assert!(rho_lower_bound(&mp(q), below + 1).unwrap().finite);
        }
        let b = rho_lower_bound(&mp(0.9), 2600).unwrap();
        assert!(b.finite && b.log_value.is_finite() && b.log_value < -1e6);
    }

    #[test]
    fn best_is_finite_on_grid() {
        for k in 1..=9 {
            let q = k as f64 / 10.0;
            let (n, b) = rho_lower_bound_best(&mp(q), 5000).unwrap();
            assert!(b.finite && b.log_value.is_finite(), "q={q}");
            assert!((1..=5000).contains(&n));
        }
        assert_eq!(rho_lower_bound_best(&mp(0.9), 100), Err(Error::NoFiniteValue { n_max: 100 }));
    }

    #[test]
    fn gadget_bound_structure() {
        for &(q, n, m) in &[(1e-60, 1u64, 2u64), (0.2, 300, 5), (0.5, 900, 50)] {
            let p = mp(q);
            let g = gadget_event_lower_bound(&p, n, m).unwrap();
            let shifted = rho_lower_bound(&p, n + m).unwrap();
            let base = rho_lower_bound(&p, n).unwrap();
            let corr = |b: BoundValue, k: f64| b.log_value - 8.0 * k * k * (-q).ln_1p() - 4.0 * k * p.log_phi();
            // same correction factor as the plain bound at N
            assert!((corr(g, (n + m) as f64) - 2.0 * q.ln() - corr(base, n as f64)).abs() < 1e-9);
            if shifted.finite {
                let diff = g.log_value - shifted.log_value - 2.0 * q.ln();
                assert!((diff - (corr(base, n as f64) - corr(shifted, (n + m) as f64))).abs() < 1e-9);
            }
        }
        let g = gadget_event_lower_bound(&mp(1e-60), 1, 2).unwrap();
        assert!(g.finite);
        assert!((g.log_value - 2.0 * 1e-60f64.ln() - 0.983968f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn res_bound_values() {
        let p = mp(0.5);
        let b = res_lower_bound(&p, 0, 1).unwrap();
        assert!((b.value() - 0.5 * 0.288_788_095_086_602_4).abs() < 1e-12);
        let c = res_lower_bound(&p, 1, 2).unwrap();
        assert!((c.log_value - b.log_value - 2.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!(matches!(res_lower_bound(&p, 0, 0), Err(Error::BadParameter(_))));
    }
}
