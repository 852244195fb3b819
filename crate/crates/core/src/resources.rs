//! Fault-tolerance resource calculator for the permutation-key scheme with
//! error correction: code size, flag-ancilla counts, qubit totals, security
//! after QEC and the largest computation a qubit budget supports.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{QheError, Result};
use crate::perm_key::security_bound_log2;

fn big_str<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceParams {
    pub p0: f64,
    pub p_threshold: f64,
    pub a_coeff: f64,
    pub p_target: f64,
    pub depth: u64,
    pub n_total: u64,
    /// Target `Δ̄ ≤ 2^{−k}`; selects the balanced `m` rule when present.
    pub k: Option<u64>,
    /// Fixed number of logical qubits for the budget `m` rule.
    pub r: Option<u64>,
    /// Replaces the computed ancilla count (used to study `A = 0`).
    pub ancilla_override: Option<u64>,
}

impl ResourceParams {
    /// Reference error rates (`p0 = 1e-6`, `pΩ = 1e-3`, `aΩ = 10`, target `1e-30`), with `k = 10`,
    /// `depth = 1` and a `10^{12}` qubit budget.
    pub fn reference() -> Self {
        ResourceParams {
            p0: 1e-6,
            p_threshold: 1e-3,
            a_coeff: 10.0,
            p_target: 1e-30,
            depth: 1,
            n_total: 1_000_000_000_000,
            k: Some(10),
            r: None,
            ancilla_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p0", self.p0), ("p_threshold", self.p_threshold), ("p_target", self.p_target)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(QheError::InvalidArgument(format!("{name} = {p} is not in (0, 1)")));
            }
        }
        if !(self.a_coeff > 0.0) || !self.a_coeff.is_finite() {
            return Err(QheError::InvalidArgument("a_coeff must be positive".into()));
        }
        if self.p0 >= self.p_threshold {
            return Err(QheError::Nonconvergent { p0: self.p0, p_threshold: self.p_threshold });
        }
        if self.n_total == 0 {
            return Err(QheError::InvalidArgument("n_total must be positive".into()));
        }
        if self.k.is_none() && self.r.is_none() {
            return Err(QheError::InvalidArgument("either k or r must be given".into()));
        }
        Ok(())
    }
}

/// Smallest `t` with `a·(p0/pΩ)^t ≤ p̄`.
pub fn min_t(p0: f64, p_threshold: f64, a_coeff: f64, p_target: f64) -> Result<u32> {
    if p0 >= p_threshold {
        return Err(QheError::Nonconvergent { p0, p_threshold });
    }
    if p_target >= a_coeff {
        return Err(QheError::InvalidArgument(format!("target {p_target} is not below a = {a_coeff}")));
    }
    let ratio = (p_target / a_coeff).ln() / (p0 / p_threshold).ln();
    // absorb rounding when the ratio is an integer
    Ok(((ratio - 1e-9).ceil() as u32).max(1))
}

/// Code length `(2t+1)²` for a `t`-error-correcting code.
pub fn code_length(t: u32) -> u64 {
    let s = 2 * t as u64 + 1;
    s * s
}

/// `A = 2tn[t(t+2)+n]·C(t,2)`.
pub fn ancilla_count(n: u64, t: u32) -> BigUint {
    let t_big = BigUint::from(t);
    let n_big = BigUint::from(n);
    let choose2 = BigUint::from(t as u64 * (t as u64).saturating_sub(1) / 2);
    BigUint::from(2u32) * &t_big * &n_big * (&t_big * (&t_big + 2u32) + &n_big) * choose2
}

/// `t³n(t²+2t+n)`.
pub fn ancilla_upper_bound(n: u64, t: u32) -> BigUint {
    let t_big = BigUint::from(t);
    let n_big = BigUint::from(n);
    t_big.pow(3) * &n_big * (t_big.pow(2) + BigUint::from(2u32) * &t_big + &n_big)
}

fn overhead(depth: u64, a: &BigUint) -> BigUint {
    BigUint::from(1u32) + BigUint::from(3u32) * BigUint::from(depth + 1) * a
}

/// `N = 2mr(1 + 3(depth+1)A)`.
pub fn total_qubits(m: u64, r: u64, depth: u64, a: &BigUint) -> BigUint {
    BigUint::from(2u32) * BigUint::from(m) * BigUint::from(r) * overhead(depth, a)
}

/// Encrypted ancilla rows consumed: `r + 3r(depth+1)A`.
pub fn effective_rows(r: u64, depth: u64, a: &BigUint) -> BigUint {
    BigUint::from(r) * overhead(depth, a)
}

/// `log₂ Δ̄` with `Δ̄ = Δ(r + 3r(depth+1)A, m)`.
pub fn security_after_qec_log2(r: u64, depth: u64, a: &BigUint, m: u64) -> f64 {
    let rows = effective_rows(r, depth, a).to_f64().unwrap_or(f64::INFINITY);
    security_bound_log2_real(rows, m)
}

pub fn security_after_qec(r: u64, depth: u64, a: &BigUint, m: u64) -> f64 {
    security_after_qec_log2(r, depth, a, m).exp2()
}

fn security_bound_log2_real(rows: f64, m: u64) -> f64 {
    security_bound_log2(0, m) + 0.5 * rows
}

/// Which rule fixed `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MRule {
    /// `m = ⌊(√(k²+N)+k)/2⌋`, balancing the security and budget limits on `r`.
    Balanced,
    /// Largest `m` with `2mr(1+3(depth+1)A) ≤ N` for a given `r`.
    Budget,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourcePlan {
    pub rule: MRule,
    pub n_total: u64,
    pub k: Option<u64>,
    pub t: u32,
    pub n: u64,
    #[serde(serialize_with = "big_str")]
    pub a_nt: BigUint,
    pub m: u64,
    /// Largest `r` meeting both constraints.
    pub r_bound: u64,
    /// `√(k²+N) − k`, which ignores the QEC overhead factor.
    pub r_approx: Option<f64>,
    pub delta_bar_log2: f64,
    #[serde(serialize_with = "big_str")]
    pub n_tot_used: BigUint,
}

impl ResourcePlan {
    pub const CSV_HEADER: &'static str = "n_tot,k,t,n,a_nt,m,r_bound,r_approx,delta_bar_log2,rule";

    pub fn csv_row(&self) -> String {
        let k = self.k.map(|k| k.to_string()).unwrap_or_default();
        let approx = self.r_approx.map(|r| format!("{r:.6}")).unwrap_or_default();
        let rule = match self.rule {
            MRule::Balanced => "balanced",
            MRule::Budget => "budget",
        };
        format!(
            "{},{},{},{},{},{},{},{},{:.6},{}",
            self.n_total, k, self.t, self.n, self.a_nt, self.m, self.r_bound, approx, self.delta_bar_log2, rule
        )
    }
}

/// Plan without the feasibility check; `r_bound` may be 0.
pub fn plan(params: &ResourceParams) -> Result<ResourcePlan> {
    params.validate()?;
    let t = min_t(params.p0, params.p_threshold, params.a_coeff, params.p_target)?;
    let n = code_length(t);
    let a_nt = params.ancilla_override.map(BigUint::from).unwrap_or_else(|| ancilla_count(n, t));
    let over = overhead(params.depth, &a_nt);
    let big_n = BigUint::from(params.n_total);
    let (rule, m, r_bound, r_approx) = match params.k {
        Some(k) => {
            let kf = k as f64;
            let root = (kf * kf + params.n_total as f64).sqrt();
            let m = ((root + kf) / 2.0).floor() as u64;
            let by_security = (2 * m).saturating_sub(2 * k);
            let by_budget = if m == 0 { 0 } else { params.n_total / (2 * m) };
            let r = BigUint::from(by_security.min(by_budget)) / &over;
            (MRule::Balanced, m, r.to_u64().unwrap_or(u64::MAX), Some(root - kf))
        }
        None => {
            let r = params.r.expect("validated");
            let m = (big_n.clone() / (BigUint::from(2u32) * BigUint::from(r) * &over)).to_u64().unwrap_or(u64::MAX);
            let r_bound = if m == 0 { 0 } else { r };
            (MRule::Budget, m, r_bound, None)
        }
    };
    let delta_bar_log2 = if m == 0 { 0.0 } else { security_after_qec_log2(r_bound, params.depth, &a_nt, m) };
    let n_tot_used = total_qubits(m, r_bound, params.depth, &a_nt);
    debug_assert!(n_tot_used <= big_n || r_bound.is_zero());
    Ok(ResourcePlan { rule, n_total: params.n_total, k: params.k, t, n, a_nt, m, r_bound, r_approx, delta_bar_log2, n_tot_used })
}

/// The largest supported computation, or [`QheError::Infeasible`].
pub fn max_power(params: &ResourceParams) -> Result<ResourcePlan> {
    let p = plan(params)?;
    if p.r_bound < 1 {
        return Err(QheError::Infeasible(format!(
            "no r ≥ 1 fits N_tot = {} with A = {} (m = {}, r_approx = {})",
            p.n_total,
            p.a_nt,
            p.m,
            p.r_approx.map_or("n/a".to_string(), |r| format!("{r:.3}"))
        )));
    }
    Ok(p)
}

/// One plan per budget in `grid`; infeasible points appear with `r_bound = 0`.
pub fn tradeoff_sweep(params: &ResourceParams, grid: &[u64]) -> Result<Vec<ResourcePlan>> {
    if grid.is_empty() {
        return Err(QheError::InvalidArgument("empty N_tot grid".into()));
    }
    grid.par_iter()
        .map(|&n_total| plan(&ResourceParams { n_total, ..params.clone() }))
        .collect()
}

pub fn sweep_csv(rows: &[ResourcePlan]) -> String {
    let mut out = String::from(ResourcePlan::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ancilla_counts() {
        assert!(ancilla_count(9, 1).is_zero());
        assert_eq!(ancilla_count(25, 2), BigUint::from(3300u32));
        assert_eq!(total_qubits(1, 1, 0, &BigUint::zero()), BigUint::from(2u32));
        assert_eq!(total_qubits(2, 1, 1, &BigUint::from(3300u32)), BigUint::from(79_204u32));
    }

    #[test]
    fn balanced_rule_example() {
        let p = ResourceParams {
            depth: 0,
            n_total: 10_000,
            k: Some(10),
            ancilla_override: Some(0),
            ..ResourceParams::reference()
        };
        let plan = max_power(&p).unwrap();
        assert_eq!(plan.m, 55);
        assert!((plan.r_approx.unwrap() - 90.498_756).abs() < 1e-5);
        assert_eq!(plan.r_bound, 90);
    }

    #[test]
    fn nonconvergent() {
        assert!(matches!(min_t(1e-3, 1e-3, 10.0, 1e-30), Err(QheError::Nonconvergent { .. })));
    }
}
