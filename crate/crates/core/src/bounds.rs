//! Weighted-sum integrals, their closed-form bounds, and the threshold an
//! admissible r must exceed.
//!
//! With z = X^{1/v}, s = X^{1/w}, y = X^{1/u} and levels of distribution
//! τ₁ (for primes) and τ₂ (for the auxiliary integer sequence),
//!
//! ```text
//! I = g ∫_w^v (1 - u/s) F_g(v(τ₁ - 1/s)) ds/s,
//! J = g ∫_u^w (1 - u/s) F_{g+1}(v(τ₂ - 1/s)) ds/s,
//! r > gku - 1 + I/f_g(τ₁v) + vJ/(e^γ f_g(τ₁v)).
//! ```
//!
//! Error terms of size o(1) are ignored throughout, so the r values produced
//! here are the idealised ones, not rigorous bounds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numeric::{adaptive_simpson, exp_gamma};
use crate::sievefn::{SieveFunctionTable, SieveLimits};
use crate::{Error, Result};

/// Absolute tolerance for the I and J quadratures.
pub const QUAD_TOL: f64 = 1e-9;
/// Recursion cap of the adaptive quadrature.
pub const QUAD_DEPTH: u32 = 40;
/// Thresholds this close below an integer are rounded up.
pub const INTEGER_SLACK: f64 = 1e-9;

/// The sieve parameters (v, w, u, τ₁, τ₂) with the derived ξ₁, ξ₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub v: f64,
    pub w: f64,
    pub u: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// ξ₁ = vτ₁ + 1 - v/w.
    pub xi1: f64,
    /// ξ₂ = vτ₂ + 1 - v/u.
    pub xi2: f64,
}

impl ParameterPoint {
    /// Checks `0 < 1/v < 1/w < τ₁ ≤ 1/2 < 1/u < τ₂ ≤ 1`.
    pub fn new(v: f64, w: f64, u: f64, tau1: f64, tau2: f64) -> Result<Self> {
        let ordered = v.is_finite()
            && 0.0 < 1.0 / v
            && 1.0 / v < 1.0 / w
            && 1.0 / w < tau1
            && tau1 <= 0.5
            && 0.5 < 1.0 / u
            && 1.0 / u < tau2
            && tau2 <= 1.0;
        if !ordered {
            return Err(Error::Domain(format!(
                "parameters v={v} w={w} u={u} tau1={tau1} tau2={tau2} violate 0 < 1/v < 1/w < tau1 <= 1/2 < 1/u < tau2 <= 1"
            )));
        }
        Ok(Self { v, w, u, tau1, tau2, xi1: v * tau1 + 1.0 - v / w, xi2: v * tau2 + 1.0 - v / u })
    }

    /// τ₁ = 1/2 and τ₂ = 1.
    pub fn with_default_levels(v: f64, w: f64, u: f64) -> Result<Self> {
        Self::new(v, w, u, 0.5, 1.0)
    }
}

/// Components of the right-hand side of the r-condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBreakdown {
    pub gku: f64,
    /// I / f_g(τ₁v).
    pub i_over_f: f64,
    /// v J / (e^γ f_g(τ₁v)).
    pub j_term: f64,
    /// gku - 1 + i_over_f + j_term.
    pub threshold: f64,
    /// Smallest admissible r.
    pub r: u64,
    /// η = r + 1 - gku.
    pub eta: f64,
    /// f_g(τ₁v).
    pub f_at_tau1v: f64,
}

impl ThresholdBreakdown {
    fn assemble(gku: f64, i_over_f: f64, j_term: f64, f_at_tau1v: f64) -> Self {
        let threshold = gku - 1.0 + i_over_f + j_term;
        let r = minimal_r(threshold);
        Self { gku, i_over_f, j_term, threshold, r, eta: r as f64 + 1.0 - gku, f_at_tau1v }
    }
}

/// Smallest integer r with r > threshold, rounding up when the threshold is
/// within [`INTEGER_SLACK`] below an integer.
pub fn minimal_r(threshold: f64) -> u64 {
    let r = (threshold + INTEGER_SLACK).floor() + 1.0;
    r.max(0.0) as u64
}

/// The tables for F_g, f_g and F_{g+1}, f_{g+1}.
#[derive(Debug, Clone)]
pub struct SieveTables {
    pub base: Arc<SieveFunctionTable>,
    pub next: Arc<SieveFunctionTable>,
}

impl SieveTables {
    pub fn new(base: Arc<SieveFunctionTable>, next: Arc<SieveFunctionTable>) -> Result<Self> {
        if next.dimension().get() != base.dimension().get() + 1 {
            return Err(Error::Domain(format!(
                "auxiliary table has dimension {}, expected {}",
                next.dimension(),
                base.dimension().get() + 1
            )));
        }
        Ok(Self { base, next })
    }

    /// The sieve dimension g.
    pub fn g(&self) -> u32 {
        self.base.dimension().get()
    }
}

/// C₀ = e^γ / (log 4 - 1/4).
pub fn compute_c0() -> f64 {
    exp_gamma() / (4f64.ln() - 0.25)
}

/// Values of s in (lo, hi) where v(τ - 1/s) hits a breakpoint of the table.
fn kink_preimages(table: &SieveFunctionTable, v: f64, tau: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = table
        .breakpoints()
        .iter()
        .filter_map(|&x| {
            let d = tau - x / v;
            (d > 0.0).then(|| 1.0 / d)
        })
        .filter(|&s| s > lo && s < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts
}

/// Adaptive Simpson over `[lo, hi]`, split at `cuts`, sharing `tol` by length.
fn piecewise_simpson<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, cuts: &[f64], tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut a = lo;
    let mut total = 0.0;
    for b in cuts.iter().copied().chain(std::iter::once(hi)) {
        let share = tol * (b - a) / (hi - lo);
        total += adaptive_simpson(&mut f, a, b, share, QUAD_DEPTH).value;
        a = b;
    }
    total
}

fn check_argument(min_arg: f64, what: &str) -> Result<()> {
    if min_arg > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what}: sieve-function argument {min_arg} is not positive")))
    }
}

/// I(u, w, v) = g ∫_w^v (1 - u/s) F_g(v(τ₁ - 1/s)) ds/s.
pub fn integral_i(params: &ParameterPoint, table_g: &SieveFunctionTable) -> Result<f64> {
    integral_i_tol(params, table_g, QUAD_TOL)
}

/// [`integral_i`] with an explicit absolute tolerance.
pub fn integral_i_tol(params: &ParameterPoint, table_g: &SieveFunctionTable, tol: f64) -> Result<f64> {
    let &ParameterPoint { v, w, u, tau1, .. } = params;
    check_argument(v * (tau1 - 1.0 / w), "integral I")?;
    let g = table_g.dimension().get() as f64;
    let cuts = kink_preimages(table_g, v, tau1, w, v);
    let value = piecewise_simpson(|s| (1.0 - u / s) * table_g.upper(v * (tau1 - 1.0 / s)) / s, w, v, &cuts, tol / g);
    Ok(g * value)
}

/// J(u, w, v) = g ∫_u^w (1 - u/s) F_{g+1}(v(τ₂ - 1/s)) ds/s; `g` is the base dimension.
pub fn integral_j(params: &ParameterPoint, table_next: &SieveFunctionTable) -> Result<f64> {
    integral_j_tol(params, table_next, QUAD_TOL)
}

/// [`integral_j`] with an explicit absolute tolerance.
pub fn integral_j_tol(params: &ParameterPoint, table_next: &SieveFunctionTable, tol: f64) -> Result<f64> {
    let &ParameterPoint { v, w, u, tau2, .. } = params;
    check_argument(v * (tau2 - 1.0 / u), "integral J")?;
    let g = (table_next.dimension().get() - 1) as f64;
    let cuts = kink_preimages(table_next, v, tau2, u, w);
    let value = piecewise_simpson(|s| (1.0 - u / s) * table_next.upper(v * (tau2 - 1.0 / s)) / s, u, w, &cuts, tol / g);
    Ok(g * value)
}

/// Closed-form estimate of I / f_g(τ₁v), for ξ₁ ≥ β_g.
///
/// An upper bound when f_g(ξ₁) = f_g(τ₁v); when f_g(ξ₁) is smaller it can
/// fall a few percent below the quadrature value.
pub fn bound_i_closed(
    params: &ParameterPoint,
    f_at_tau1v: f64,
    f_at_xi1: f64,
    limits_g: &SieveLimits,
) -> Result<f64> {
    let &ParameterPoint { v, w, u, xi1, .. } = params;
    if xi1 < limits_g.beta {
        return Err(Error::Hypothesis(format!("xi1={xi1} is below beta_g={}", limits_g.beta)));
    }
    if !(f_at_tau1v > 0.0) {
        return Err(Error::Infeasible(format!("f_g(tau1 v)={f_at_tau1v} is not positive")));
    }
    let g = limits_g.g.get() as f64;
    let deficit = 1.0 - f_at_xi1 / f_at_tau1v;
    Ok((g + u / v * xi1 * deficit) * (v / w).ln() + deficit * xi1 * (w / v) * (1.0 - u / w) - g * (u / w - u / v))
}

/// Closed-form upper bound for v J / (e^γ f_g(τ₁v)), valid when ξ₂ ≥ β_{g+1}.
pub fn bound_j_closed(
    params: &ParameterPoint,
    f_at_tau1v: f64,
    f_next_at_xi2: f64,
    limits_next: &SieveLimits,
) -> Result<f64> {
    let &ParameterPoint { v, w, u, xi2, .. } = params;
    if xi2 < limits_next.beta {
        return Err(Error::Hypothesis(format!("xi2={xi2} is below beta_(g+1)={}", limits_next.beta)));
    }
    if !(f_at_tau1v > 0.0) {
        return Err(Error::Infeasible(format!("f_g(tau1 v)={f_at_tau1v} is not positive")));
    }
    let g = (limits_next.g.get() - 1) as f64;
    let eg = exp_gamma();
    let first = v / eg * g * ((w / u).ln() - 1.0 + u / w) / f_at_tau1v;
    let second = xi2 * g / (g + 1.0) * u / eg * (1.0 - f_next_at_xi2) / f_at_tau1v * (v / u).ln();
    Ok(first + second)
}

fn f_at_tau1v(params: &ParameterPoint, tables: &SieveTables) -> Result<f64> {
    let at = params.tau1 * params.v;
    let beta = tables.base.limits().beta;
    if at <= beta {
        return Err(Error::Infeasible(format!(
            "tau1 v = {at} does not exceed beta_g = {beta}; the lower sieve is void"
        )));
    }
    Ok(tables.base.lower(at))
}

/// Threshold of the r-condition with I and J evaluated by quadrature.
pub fn r_threshold(k: u32, params: &ParameterPoint, tables: &SieveTables) -> Result<ThresholdBreakdown> {
    let f = f_at_tau1v(params, tables)?;
    let g = tables.g() as f64;
    let i = integral_i(params, &tables.base)?;
    let j = integral_j(params, &tables.next)?;
    let gku = g * k as f64 * params.u;
    Ok(ThresholdBreakdown::assemble(gku, i / f, params.v * j / (exp_gamma() * f), f))
}

/// Threshold of the r-condition with I and J replaced by their closed-form bounds.
pub fn r_threshold_closed(k: u32, params: &ParameterPoint, tables: &SieveTables) -> Result<ThresholdBreakdown> {
    let f = f_at_tau1v(params, tables)?;
    let g = tables.g() as f64;
    let i = bound_i_closed(params, f, tables.base.lower(params.xi1), &tables.base.limits())?;
    let j = bound_j_closed(params, f, tables.next.lower(params.xi2), &tables.next.limits())?;
    let gku = g * k as f64 * params.u;
    Ok(ThresholdBreakdown::assemble(gku, i, j, f))
}

/// Closed-form parameter choices and the main term of the asymptotic r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub v: f64,
    pub u: f64,
    pub w: f64,
    /// M(v) = gku + vg/C₀ at the chosen v.
    pub m: f64,
    /// Coefficient of g^{3/2} k^{1/2}.
    pub c1: f64,
    /// Coefficient of g^2.
    pub c2: f64,
}

/// M(v) = gk + (β_{g+1} - 1) gk / (v - (β_{g+1} - 1)) + vg/C₀.
pub fn main_term(g: u32, k: u32, v: f64, beta_next: f64) -> f64 {
    let a = beta_next - 1.0;
    let gk = g as f64 * k as f64;
    gk + a * gk / (v - a) + v * g as f64 / compute_c0()
}

/// v, u, w minimising the main term, with M(v) and the constants c₁, c₂.
pub fn asymptotic_params(k: u32, limits_g: &SieveLimits, limits_next: &SieveLimits) -> Result<AsymptoticParams> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    check_pair(limits_g, limits_next)?;
    let g = limits_g.g.get() as f64;
    let kf = k as f64;
    let c0 = compute_c0();
    let a = limits_next.beta - 1.0;
    let b = 2.0 * (limits_g.beta - 1.0);
    let v = a + (c0 * a * kf).sqrt();
    let u = 1.0 + a / (v - a);
    let w = 2.0 * (1.0 + b / (v - b));
    let m = g * kf + g * kf * (2.0 * (a / (c0 * kf)).sqrt() + a / (c0 * kf));
    Ok(AsymptoticParams { v, u, w, m, c1: 2.0 * (a / (c0 * g)).sqrt(), c2: a / (c0 * g) })
}

fn check_pair(limits_g: &SieveLimits, limits_next: &SieveLimits) -> Result<()> {
    if limits_next.g.get() != limits_g.g.get() + 1 {
        return Err(Error::Domain(format!(
            "limits for g={} and g={} are not consecutive",
            limits_g.g, limits_next.g
        )));
    }
    Ok(())
}

/// Outcome of [`ratio_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub w_over_u: f64,
    pub within_bounds: bool,
    /// The integer N ≥ 3 bounding v from below.
    pub n: u32,
}

/// Smallest N ≥ 3 with N(β_{g+1} - 1) > max{β_{g+1} - 1, 2(β_g - 1), 4(β_g - 1) - (β_{g+1} - 1)}.
pub fn ratio_n(limits_g: &SieveLimits, limits_next: &SieveLimits) -> u32 {
    let a = limits_next.beta - 1.0;
    let b = 2.0 * (limits_g.beta - 1.0);
    let target = a.max(b).max(2.0 * b - a);
    let mut n = 3;
    while n as f64 * a <= target {
        n += 1;
    }
    n
}

/// w/u = 2(v - (β_{g+1} - 1)) / (v - 2(β_g - 1)) for v > max{β_{g+1} - 1, 2(β_g - 1)}.
pub fn ratio_w_over_u(v: f64, limits_g: &SieveLimits, limits_next: &SieveLimits) -> Result<f64> {
    check_pair(limits_g, limits_next)?;
    let a = limits_next.beta - 1.0;
    let b = 2.0 * (limits_g.beta - 1.0);
    if !(v > a.max(b)) {
        return Err(Error::Domain(format!("v={v} must exceed max(beta_(g+1) - 1, 2(beta_g - 1)) = {}", a.max(b))));
    }
    Ok(2.0 * (v - a) / (v - b))
}

/// w/u at the closed-form u, w, flagged against [4/3, 4]; requires v ≥ N(β_{g+1} - 1).
pub fn ratio_check(v: f64, limits_g: &SieveLimits, limits_next: &SieveLimits) -> Result<RatioCheck> {
    let n = ratio_n(limits_g, limits_next);
    let floor = n as f64 * (limits_next.beta - 1.0);
    if v < floor {
        return Err(Error::Domain(format!("v={v} is below N(beta_(g+1) - 1) = {floor} with N={n}")));
    }
    let q = ratio_w_over_u(v, limits_g, limits_next)?;
    Ok(RatioCheck { w_over_u: q, within_bounds: (4.0 / 3.0..=4.0).contains(&q), n })
}

/// Informational lower bound on k from v ≥ N(β_{g+1} - 1): (N - 1)²(β_{g+1} - 1)/C₀.
pub fn k_lower_bound(limits_g: &SieveLimits, limits_next: &SieveLimits) -> f64 {
    let n = ratio_n(limits_g, limits_next) as f64;
    (n - 1.0).powi(2) * (limits_next.beta - 1.0) / compute_c0()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sievefn::{ReferenceLimits, SieveDimension};
    use std::sync::OnceLock;

    fn limits(g: u32) -> SieveLimits {
        ReferenceLimits::bundled().get(SieveDimension::new(g).unwrap()).unwrap()
    }

    fn tables(g: u32) -> SieveTables {
        static CACHE: OnceLock<Vec<Arc<SieveFunctionTable>>> = OnceLock::new();
        let all = CACHE.get_or_init(|| {
            (1..=4).map(|g| Arc::new(SieveFunctionTable::with_defaults(limits(g)).unwrap())).collect()
        });
        SieveTables::new(all[g as usize - 1].clone(), all[g as usize].clone()).unwrap()
    }

    #[test]
    fn c0_value() {
        // e^γ / (2 log 2 - 1/4) = 1.7810724179901979 / 1.1362943611198906
        assert!((compute_c0() - 1.567_439_282_401_118).abs() < 1e-14);
        assert!(compute_c0() > 1.0);
    }

    #[test]
    fn parameter_ordering_is_enforced() {
        assert!(ParameterPoint::with_default_levels(20.0, 4.0, 1.5).is_ok());
        assert!(ParameterPoint::with_default_levels(20.0, 1.9, 1.5).is_err());
        assert!(ParameterPoint::with_default_levels(20.0, 4.0, 2.1).is_err());
        assert!(ParameterPoint::with_default_levels(3.0, 4.0, 1.5).is_err());
        let p = ParameterPoint::with_default_levels(20.0, 4.0, 1.5).unwrap();
        assert!((p.xi1 - 6.0).abs() < 1e-15);
        assert!((p.xi2 - (21.0 - 20.0 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn empty_intervals_give_zero() {
        let t = tables(2);
        let p = ParameterPoint::with_default_levels(20.0, 1.8, 1.8);
        assert!(p.is_err()); // w = u is outside the ordering, so integrate directly
        let p = ParameterPoint { v: 20.0, w: 4.0, u: 4.0, tau1: 0.5, tau2: 1.0, xi1: 6.0, xi2: 16.0 };
        assert_eq!(integral_j(&p, &t.next).unwrap(), 0.0);
        let p = ParameterPoint { v: 4.0, w: 4.0, u: 1.5, tau1: 0.5, tau2: 1.0, xi1: 2.0, xi2: 2.33 };
        assert_eq!(integral_i(&p, &t.base).unwrap(), 0.0);
    }

    #[test]
    fn i_dominates_the_f_equals_one_integral() {
        let t = tables(2);
        let p = ParameterPoint::new(20.0, 4.0, 1.8, 0.5, 1.0).unwrap();
        let (v, w, u) = (p.v, p.w, p.u);
        let floor = 2.0 * ((v / w).ln() - u * (1.0 / w - 1.0 / v));
        let i = integral_i(&p, &t.base).unwrap();
        assert!(i >= floor, "{i} < {floor}");
    }

    #[test]
    fn j_is_below_its_left_endpoint_majorant() {
        let t = tables(2);
        let p = ParameterPoint::new(20.0, 4.0, 1.8, 0.5, 1.0).unwrap();
        let j = integral_j(&p, &t.next).unwrap();
        let f0 = t.next.upper(p.v * (1.0 - 1.0 / p.u));
        let (w, u) = (p.w, p.u);
        let majorant = 2.0 * f0 * ((w / u).ln() - 1.0 + u / w);
        assert!(j >= 0.0 && j <= majorant, "{j} vs {majorant}");
    }

    #[test]
    fn closed_bounds_reduce_at_the_sifting_limit() {
        let l2 = limits(2);
        let beta = l2.beta;
        // choose w so that ξ₁ = β₂ exactly at v = 20
        let v = 20.0;
        let w = v / (v * 0.5 + 1.0 - beta);
        let p = ParameterPoint::new(v, w, 1.8, 0.5, 1.0).unwrap();
        let b = bound_i_closed(&p, 0.9, 0.0, &l2).unwrap();
        let u = p.u;
        let reduced = (2.0 + u / v * beta) * (v / w).ln() + w / v * beta * (1.0 - u / w) - 2.0 * (u / w - u / v);
        assert!((b - reduced).abs() < 1e-12);
        let mut low = p;
        low.xi1 = beta - 0.1;
        assert!(matches!(bound_i_closed(&low, 0.9, 0.0, &l2), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn j_bound_first_term_vanishes_when_w_equals_u() {
        let l3 = limits(3);
        let p = ParameterPoint { v: 40.0, w: 1.5, u: 1.5, tau1: 0.5, tau2: 1.0, xi1: 0.0, xi2: 41.0 - 40.0 / 1.5 };
        let b = bound_j_closed(&p, 1.0, 1.0, &l3).unwrap();
        assert!(b.abs() < 1e-15);
    }

    #[test]
    fn asymptotic_substitution() {
        // with β_{g+1} - 1 = 4 and v = 9, u = 1 + 4/5
        let a: f64 = 4.0;
        let v: f64 = 9.0;
        assert!((1.0 + a / (v - a) - 1.8).abs() < 1e-15);
        let p = asymptotic_params(50, &limits(2), &limits(3)).unwrap();
        let ab = limits(3).beta;
        assert!(main_term(2, 50, p.v, ab) <= main_term(2, 50, p.v * 1.01, ab));
        assert!(main_term(2, 50, p.v, ab) <= main_term(2, 50, p.v * 0.99, ab));
        assert!((main_term(2, 50, p.v, ab) - p.m).abs() < 1e-9 * p.m);
        assert!(p.c1 > 0.0 && p.c2 > 0.0 && p.c1.is_finite());
    }

    #[test]
    fn ratio_limits_and_exact_four() {
        let (l2, l3) = (limits(2), limits(3));
        let a = l3.beta - 1.0;
        let b = 2.0 * (l2.beta - 1.0);
        let q = ratio_w_over_u(2.0 * b - a, &l2, &l3).unwrap();
        assert!((q - 4.0).abs() < 1e-12);
        let far = ratio_w_over_u(1e9, &l2, &l3).unwrap();
        assert!((far - 2.0).abs() < 1e-8);
        assert!(ratio_check(0.5 * a, &l2, &l3).is_err());
    }

    #[test]
    fn threshold_orders_exact_below_closed() {
        let t = tables(2);
        let v = t.base.limits().alpha + 12.0;
        let p = ParameterPoint::new(v, 3.3, 1.55, 0.5, 1.0).unwrap();
        let exact = r_threshold(3, &p, &t).unwrap();
        let closed = r_threshold_closed(3, &p, &t).unwrap();
        assert!(closed.threshold >= exact.threshold);
        assert_eq!(exact.r, minimal_r(exact.threshold));
        assert!(exact.eta > 0.0);
    }

    #[test]
    fn void_lower_sieve_is_infeasible() {
        let t = tables(2);
        let p = ParameterPoint::new(8.0, 2.5, 1.5, 0.5, 1.0).unwrap();
        assert!(matches!(r_threshold(3, &p, &t), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rounding_is_conservative() {
        assert_eq!(minimal_r(14.2), 15);
        assert_eq!(minimal_r(15.0), 16);
        assert_eq!(minimal_r(14.9999999995), 16);
        assert_eq!(minimal_r(14.99), 15);
    }
}
