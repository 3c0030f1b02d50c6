//! Sifting limits (α_g, β_g).
//!
//! For u > α both sieve equations hold, so S = F + f and D = F - f solve
//!
//! ```text
//! u S'(u) + g S(u) = g S(u-1),     u D'(u) + g D(u) = -g D(u-1).
//! ```
//!
//! Each has an adjoint whose pairing with the solution is constant in u:
//!
//! ```text
//! <S, p>(u) = u p(u) S(u) + g ∫_{u-1}^{u} S(t) p(t+1) dt,   (u p(u))' = g p(u) - g p(u+1),
//! <D, q>(u) = u q(u) D(u) - g ∫_{u-1}^{u} D(t) q(t+1) dt,   (u q(u))' = g q(u) + g q(u+1).
//! ```
//!
//! With p(u) = ∫_0^∞ exp(-uz - g Ein(z)) dz (so u p(u) → 1) and q the monic
//! polynomial of degree 2g - 1, F, f → 1 exactly when <S, p> = 2 and
//! <D, q> = 0. Both pairings are evaluated at u = α, where S and D are still
//! given by the initial segments, so the conditions need no forward march.
//! A forward march is run afterwards to confirm the limits.

use super::sigma::AnkenyOnishi;
use super::table::SieveFunctionTable;
use super::{LimitsSource, SieveDimension, SieveLimits};
use crate::numeric::{integrate_piecewise, GaussLegendre, EULER_GAMMA};
use crate::{Error, Result};

const MAX_NEWTON: usize = 60;
/// Cap on a single Newton update of either limit.
const MAX_STEP: f64 = 0.5;
/// Adjoint residual below which a stalled iteration counts as converged.
const STALL_RESIDUAL: f64 = 1e-8;

/// Residuals of the two adjoint conditions at a trial (α, β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointResiduals {
    /// `<F + f, p>(α) - 2`; the limit of F + f minus 2.
    pub sum: f64,
    /// `<F - f, q>(α) / α^{2g}`; proportional to the slowly decaying part of F - f.
    pub difference: f64,
}

impl AdjointResiduals {
    fn norm(&self) -> f64 {
        self.sum.abs().max(self.difference.abs())
    }
}

/// Ein(z) = ∫_0^z (1 - e^{-t}) / t dt.
fn ein(z: f64) -> f64 {
    if z <= 1.5 {
        let mut term = z;
        let mut sum = z;
        let mut n = 1.0;
        loop {
            term *= -z / (n + 1.0);
            let contrib = term / (n + 1.0);
            sum += contrib;
            n += 1.0;
            if contrib.abs() < 1e-19 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        exp_integral_e1(z) + z.ln() + EULER_GAMMA
    }
}

/// E1(z) for z ≥ 1 by the continued fraction (modified Lentz).
fn exp_integral_e1(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-17 {
            break;
        }
    }
    h * (-z).exp()
}

/// Adjoint function p_g(u) for u ≥ 1, normalised so that u p(u) → 1.
fn adjoint_p(g: u32, u: f64) -> f64 {
    let gf = g as f64;
    let rule = GaussLegendre::twelve();
    let integrand = |y: f64| (-y - gf * ein(y / u)).exp();
    rule.integrate_composite(integrand, 0.0, 48.0, 24) / u
}

/// Coefficients (ascending) of the monic polynomial adjoint q_g of degree 2g - 1.
fn adjoint_q_coefficients(g: u32) -> Vec<f64> {
    let n = (2 * g - 1) as usize;
    let gf = g as f64;
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    // (j + 1 - 2g) c_j = g Σ_{i>j} C(i, j) c_i
    for j in (0..n).rev() {
        let mut acc = 0.0;
        for (i, ci) in c.iter().enumerate().skip(j + 1) {
            acc += binomial(i, j) * ci;
        }
        c[j] = gf * acc / (j as f64 + 1.0 - 2.0 * gf);
    }
    c
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// The initial segments of F and f for a trial pair of limits.
struct InitialSegments<'a> {
    g: u32,
    alpha: f64,
    beta: f64,
    sigma: &'a AnkenyOnishi,
    integer_breaks: Vec<f64>,
}

impl<'a> InitialSegments<'a> {
    fn new(g: u32, alpha: f64, beta: f64, sigma: &'a AnkenyOnishi) -> Self {
        let top = (alpha + 3.0).ceil() as i64;
        let integer_breaks = (2..=top).map(|k| k as f64).collect();
        Self { g, alpha, beta, sigma, integer_breaks }
    }

    fn upper(&self, t: f64) -> f64 {
        1.0 / self.sigma.eval(t)
    }

    /// f(t) = g t^{-g} ∫_β^t s^{g-1} / σ(s-1) ds on (β, α + 1].
    fn lower(&self, t: f64) -> f64 {
        if t <= self.beta {
            return 0.0;
        }
        let g = self.g as i32;
        let integral = integrate_piecewise(
            |s| s.powi(g - 1) / self.sigma.eval(s - 1.0),
            self.beta,
            t,
            &self.integer_breaks,
            6.0,
        );
        self.g as f64 * integral / t.powi(g)
    }

    fn residuals(&self) -> AdjointResiduals {
        let g = self.g;
        let gf = g as f64;
        let alpha = self.alpha;
        let q = adjoint_q_coefficients(g);
        let mut breaks = self.integer_breaks.clone();
        breaks.push(self.beta);

        let s_at = |t: f64| self.upper(t) + self.lower(t);
        let d_at = |t: f64| self.upper(t) - self.lower(t);

        let sum_integral =
            integrate_piecewise(|t| s_at(t) * adjoint_p(g, t + 1.0), alpha - 1.0, alpha, &breaks, 6.0);
        let sum = alpha * adjoint_p(g, alpha) * s_at(alpha) + gf * sum_integral - 2.0;

        let diff_integral =
            integrate_piecewise(|t| d_at(t) * horner(&q, t + 1.0), alpha - 1.0, alpha, &breaks, 6.0);
        let difference =
            (alpha * horner(&q, alpha) * d_at(alpha) - gf * diff_integral) / alpha.powi(2 * g as i32);
        AdjointResiduals { sum, difference }
    }
}

/// Residuals of the adjoint conditions at a trial pair (α, β), α ≥ β ≥ 2.
pub fn adjoint_residuals(dim: SieveDimension, alpha: f64, beta: f64) -> Result<AdjointResiduals> {
    if !(beta >= 2.0 && alpha >= beta && alpha.is_finite()) {
        return Err(Error::Domain(format!("trial limits alpha={alpha} beta={beta} need alpha >= beta >= 2")));
    }
    let sigma = AnkenyOnishi::shared(dim);
    Ok(InitialSegments::new(dim.get(), alpha, beta, &sigma).residuals())
}

/// Rough starting point for the Newton iteration.
fn initial_guess(g: u32) -> (f64, f64) {
    let gf = g as f64;
    (3.35 * gf - 2.0 + 1.4 / gf, 2.47 * gf - 0.7)
}

/// Solves for (α_g, β_g) and confirms them by marching the sieve equations
/// to U = α + 12, where both |F(U) - 1| and |f(U) - 1| must be at most `tol`.
pub fn solve_sieve_limits(dim: SieveDimension, tol: f64) -> Result<SieveLimits> {
    let (a, b) = initial_guess(dim.get());
    solve_sieve_limits_from(dim, tol, a, b)
}

/// As [`solve_sieve_limits`], starting Newton from `(alpha0, beta0)`.
pub fn solve_sieve_limits_from(
    dim: SieveDimension,
    tol: f64,
    alpha0: f64,
    beta0: f64,
) -> Result<SieveLimits> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let g = dim.get();
    if g == 1 {
        return SieveLimits::new(dim, 2.0, 2.0, LimitsSource::Solved);
    }
    let sigma = AnkenyOnishi::shared(dim);
    let eval = |a: f64, b: f64| InitialSegments::new(g, a, b, &sigma).residuals();
    let admissible = |a: f64, b: f64| b > 2.0 && a > b;

    let (mut alpha, mut beta) = (alpha0, beta0);
    if !admissible(alpha, beta) {
        return Err(Error::Domain(format!("starting point alpha={alpha} beta={beta} is not admissible")));
    }
    let mut res = eval(alpha, beta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_NEWTON {
        iterations += 1;
        if res.norm() < 1e-15 {
            converged = true;
            break;
        }
        let h = 1e-5;
        let ra_p = eval(alpha + h, beta);
        let ra_m = eval(alpha - h, beta);
        let rb_p = eval(alpha, beta + h);
        let rb_m = eval(alpha, beta - h);
        let j11 = (ra_p.sum - ra_m.sum) / (2.0 * h);
        let j21 = (ra_p.difference - ra_m.difference) / (2.0 * h);
        let j12 = (rb_p.sum - rb_m.sum) / (2.0 * h);
        let j22 = (rb_p.difference - rb_m.difference) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let mut da = -(j22 * res.sum - j12 * res.difference) / det;
        let mut db = -(-j21 * res.sum + j11 * res.difference) / det;
        let len = da.abs().max(db.abs());
        if len > MAX_STEP {
            da *= MAX_STEP / len;
            db *= MAX_STEP / len;
        }

        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= 1.0 / 1024.0 {
            let (a, b) = (alpha + lambda * da, beta + lambda * db);
            if admissible(a, b) {
                let r = eval(a, b);
                if r.norm() < res.norm() {
                    accepted = Some((a, b, r));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((next_a, next_b, next_res)) = accepted else {
            // No descent left: either at the rounding floor or stuck.
            converged = res.norm() < STALL_RESIDUAL;
            break;
        };
        let step = (next_a - alpha).abs().max((next_b - beta).abs());
        alpha = next_a;
        beta = next_b;
        res = next_res;
        if step < 1e-13 * alpha {
            converged = true;
            break;
        }
    }
    if !converged && res.norm() > STALL_RESIDUAL {
        return Err(Error::Convergence { g, iterations, residuals: [res.sum, res.difference] });
    }

    let limits = SieveLimits::new(dim, alpha, beta, LimitsSource::Solved)?;
    let horizon = alpha + 12.0;
    let table = SieveFunctionTable::build_unchecked(dim, limits, horizon, super::DEFAULT_STEP)?;
    let r_upper = table.upper(horizon) - 1.0;
    let r_lower = table.lower(horizon) - 1.0;
    if r_upper.abs() > tol || r_lower.abs() > tol {
        return Err(Error::Convergence { g, iterations, residuals: [r_upper, r_lower] });
    }
    Ok(limits)
}
