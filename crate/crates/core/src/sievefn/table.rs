//! Tabulated sieve functions F_g and f_g.

use std::io::Write;
use std::sync::Arc;

use super::grid::NodalGrid;
use super::sigma::AnkenyOnishi;
use super::{SieveDimension, SieveLimits};
use crate::numeric::GaussLegendre;
use crate::{Error, Result};

/// Default grid spacing, 2^-10.
pub const DEFAULT_STEP: f64 = 1.0 / 1024.0;
/// Coarsest spacing accepted by [`SieveFunctionTable::build`].
pub const MAX_STEP: f64 = 1.0 / 256.0;
/// Left end of the grid; below it F is served by 1/σ directly.
const GRID_START: f64 = 1.0;
/// Rounding floor added to the e^{-u} tail check.
const TAIL_FLOOR: f64 = 1e-12;
/// Relative tolerance of the finite-difference residual check.
const DDE_TOL: f64 = 1e-6;

/// Dense table of (F_g, f_g) on a uniform grid starting at u = 1.
#[derive(Debug, Clone)]
pub struct SieveFunctionTable {
    limits: SieveLimits,
    u_max: f64,
    step: f64,
    sigma: Arc<AnkenyOnishi>,
    upper: NodalGrid,
    lower: NodalGrid,
}

/// Largest normalised finite-difference residuals of the two equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdeResiduals {
    /// max |(u^g F)' - g u^{g-1} f(u-1)| / (1 + |g u^{g-1} f(u-1)|) over u > α.
    pub upper: f64,
    /// max |(u^g f)' - g u^{g-1} F(u-1)| / (1 + |g u^{g-1} F(u-1)|) over u > β.
    pub lower: f64,
    /// Grid points skipped because their stencil straddles a breakpoint.
    pub skipped: usize,
}

impl DdeResiduals {
    pub fn max(&self) -> f64 {
        self.upper.max(self.lower)
    }
}

impl SieveFunctionTable {
    /// Builds the table on [1, u_max] with spacing `step` by the method of steps.
    ///
    /// Requires `u_max ≥ α + 12` and `0 < step ≤ 2^-8`. Fails with an
    /// accuracy error when the result misses the residual or tail checks.
    pub fn build(dim: SieveDimension, limits: SieveLimits, u_max: f64, step: f64) -> Result<Self> {
        if limits.g != dim {
            return Err(Error::Domain(format!("limits are for g={}, table requested for g={dim}", limits.g)));
        }
        if !(u_max >= limits.alpha + 12.0) || !u_max.is_finite() {
            return Err(Error::Domain(format!("u_max={u_max} must be at least alpha + 12 = {}", limits.alpha + 12.0)));
        }
        if !(step > 0.0 && step <= MAX_STEP) {
            return Err(Error::Domain(format!("step={step} must lie in (0, 2^-8]")));
        }
        let table = Self::build_unchecked(dim, limits, u_max, step)?;
        let tail = 10.0 * (-table.u_max).exp() + TAIL_FLOOR;
        let (fu, fl) = (table.upper_node(table.len() - 1), table.lower_node(table.len() - 1));
        if fu - 1.0 > tail || 1.0 - fl > tail {
            return Err(Error::Accuracy(format!(
                "g={dim}: F(u_max)-1={:e}, 1-f(u_max)={:e} exceed {tail:e}",
                fu - 1.0,
                1.0 - fl
            )));
        }
        let res = table.dde_residuals();
        if res.max() > DDE_TOL {
            return Err(Error::Accuracy(format!("g={dim}: step {step} leaves DDE residual {:e}", res.max())));
        }
        Ok(table)
    }

    /// Builds with the limits taken from a reference table or solver, using
    /// `u_max = α + 40` and the default step.
    pub fn with_defaults(limits: SieveLimits) -> Result<Self> {
        Self::build(limits.g, limits, limits.alpha + 40.0, DEFAULT_STEP)
    }

    /// The march itself, without argument or accuracy checks.
    pub(crate) fn build_unchecked(dim: SieveDimension, limits: SieveLimits, u_max: f64, step: f64) -> Result<Self> {
        let g = dim.get();
        let gf = g as f64;
        let gi = g as i32;
        let (alpha, beta) = (limits.alpha, limits.beta);
        let sigma = AnkenyOnishi::shared(dim);

        let mut breaks: Vec<f64> = (0..=5).flat_map(|j| [alpha + j as f64, beta + j as f64]).collect();
        let top = (alpha.ceil() as i64) + 5;
        breaks.extend((2..=top).map(|k| k as f64));
        breaks.retain(|&b| b > GRID_START && b < u_max);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let n = ((u_max - GRID_START) / step).ceil() as usize + 1;
        let mut upper = NodalGrid::new(GRID_START, step, breaks.clone(), n);
        let mut lower = NodalGrid::new(GRID_START, step, breaks.clone(), n);
        let rule = GaussLegendre::five();

        // Integrated quantities u^g F and u^g f, with the point they refer to.
        let mut phi = alpha.powi(gi) / sigma.eval(alpha);
        let mut phi_at = alpha;
        let mut psi = 0.0;
        let mut psi_at = beta;
        upper.record_break(alpha, 1.0 / sigma.eval(alpha));
        lower.record_break(beta, 0.0);

        for i in 0..n {
            let x = GRID_START + i as f64 * step;
            let mut pending: Vec<(bool, f64, f64)> = Vec::new();

            let value_upper = if x <= alpha {
                1.0 / sigma.eval(x)
            } else {
                let lagged = |t: f64| {
                    let s = t - 1.0;
                    let fs = if s <= beta { 0.0 } else { lower.eval(s) };
                    t.powi(gi - 1) * fs
                };
                let mut a = phi_at;
                for &c in breaks.iter().filter(|&&c| c > phi_at && c < x) {
                    phi += gf * rule.integrate(lagged, a, c);
                    pending.push((true, c, phi / c.powi(gi)));
                    a = c;
                }
                phi += gf * rule.integrate(lagged, a, x);
                phi_at = x;
                phi / x.powi(gi)
            };

            let value_lower = if x <= beta {
                0.0
            } else {
                let lagged = |t: f64| {
                    let s = t - 1.0;
                    let fs = if s <= alpha { 1.0 / sigma.eval(s) } else { upper.eval(s) };
                    t.powi(gi - 1) * fs
                };
                let mut a = psi_at;
                for &c in breaks.iter().filter(|&&c| c > psi_at && c < x) {
                    psi += gf * rule.integrate(lagged, a, c);
                    pending.push((false, c, psi / c.powi(gi)));
                    a = c;
                }
                psi += gf * rule.integrate(lagged, a, x);
                psi_at = x;
                psi / x.powi(gi)
            };

            for (is_upper, c, v) in pending {
                if is_upper {
                    upper.record_break(c, v);
                } else {
                    lower.record_break(c, v);
                }
            }
            upper.push(value_upper);
            lower.push(value_lower);
            upper.record_break(x, value_upper);
            lower.record_break(x, value_lower);
        }

        // Breakpoints on the initial segments carry their closed-form values.
        for (k, &b) in breaks.iter().enumerate() {
            if b <= alpha {
                upper.break_values_mut()[k] = 1.0 / sigma.eval(b);
            }
            if b <= beta {
                lower.break_values_mut()[k] = 0.0;
            }
        }
        tidy_tail(&mut upper, &mut lower);

        let u_max = GRID_START + (n - 1) as f64 * step;
        Ok(Self { limits, u_max, step, sigma, upper, lower })
    }

    pub fn dimension(&self) -> SieveDimension {
        self.limits.g
    }

    pub fn limits(&self) -> SieveLimits {
        self.limits
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.len() == 0
    }

    /// Grid abscissa of node `i`.
    pub fn node(&self, i: usize) -> f64 {
        self.upper.position(i)
    }

    pub fn upper_node(&self, i: usize) -> f64 {
        self.upper.values()[i]
    }

    pub fn lower_node(&self, i: usize) -> f64 {
        self.lower.values()[i]
    }

    pub fn upper_values(&self) -> &[f64] {
        self.upper.values()
    }

    pub fn lower_values(&self) -> &[f64] {
        self.lower.values()
    }

    /// Points where F or f (or a low derivative) jumps: α, β and their
    /// integer translates, plus the integers where σ_g loses smoothness.
    pub fn breakpoints(&self) -> &[f64] {
        self.upper.breaks()
    }

    /// F_g(u) for u > 0; 1 beyond the grid.
    pub fn upper(&self, u: f64) -> f64 {
        if u <= self.limits.alpha {
            1.0 / self.sigma.eval(u)
        } else if u >= self.u_max {
            1.0
        } else {
            monotone_eval(&self.upper, u)
        }
    }

    /// f_g(u) for u > 0; 1 beyond the grid.
    pub fn lower(&self, u: f64) -> f64 {
        if u <= self.limits.beta {
            0.0
        } else if u >= self.u_max {
            1.0
        } else {
            monotone_eval(&self.lower, u)
        }
    }

    /// F_g(u) with a domain check.
    pub fn eval_upper(&self, u: f64) -> Result<f64> {
        check_argument(u)?;
        Ok(self.upper(u))
    }

    /// f_g(u) with a domain check.
    pub fn eval_lower(&self, u: f64) -> Result<f64> {
        check_argument(u)?;
        Ok(self.lower(u))
    }

    /// Centered finite-difference residuals of both equations at the grid points.
    ///
    /// Points whose three-point stencil straddles a breakpoint are skipped:
    /// there the exact derivative jumps and a difference quotient says
    /// nothing about the table.
    pub fn dde_residuals(&self) -> DdeResiduals {
        let g = self.limits.g.get() as i32;
        let gf = g as f64;
        let h = self.step;
        let breaks = self.upper.breaks();
        let straddles = |x: f64| {
            let k = breaks.partition_point(|&b| b < x - h);
            k < breaks.len() && breaks[k] <= x + h
        };
        let mut out = DdeResiduals { upper: 0.0, lower: 0.0, skipped: 0 };
        let (fu, fl) = (self.upper.values(), self.lower.values());
        for i in 1..self.len() - 1 {
            let x = self.node(i);
            let check_upper = x - h > self.limits.alpha;
            let check_lower = x - h > self.limits.beta;
            if !check_upper && !check_lower {
                continue;
            }
            if straddles(x) {
                out.skipped += 1;
                continue;
            }
            let (xm, xp) = (x - h, x + h);
            if check_upper {
                let d = (xp.powi(g) * fu[i + 1] - xm.powi(g) * fu[i - 1]) / (2.0 * h);
                let rhs = gf * x.powi(g - 1) * self.lower(x - 1.0);
                out.upper = out.upper.max((d - rhs).abs() / (1.0 + rhs.abs()));
            }
            if check_lower {
                let d = (xp.powi(g) * fl[i + 1] - xm.powi(g) * fl[i - 1]) / (2.0 * h);
                let rhs = gf * x.powi(g - 1) * self.upper(x - 1.0);
                out.lower = out.lower.max((d - rhs).abs() / (1.0 + rhs.abs()));
            }
        }
        out
    }

    /// Writes the grid as CSV with header `u,F,f`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "F", "f"]).map_err(csv_error)?;
        for i in 0..self.len() {
            w.write_record([
                format!("{}", self.node(i)),
                format!("{:e}", self.upper_node(i)),
                format!("{:e}", self.lower_node(i)),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_argument(u: f64) -> Result<()> {
    if u > 0.0 && !u.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("sieve functions need a positive argument, got {u}")))
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Interpolates, then keeps the result between the bracketing samples so
/// that monotone data stays monotone; nearly flat cells use a straight line.
fn monotone_eval(grid: &NodalGrid, u: f64) -> f64 {
    let (v, left, right) = grid.eval_bracketed(u);
    let (lo, hi) = if left <= right { (left, right) } else { (right, left) };
    if hi - lo < 1e-12 {
        let x0 = ((u - grid.start()) / grid.step()).floor();
        let frac = (u - grid.start()) / grid.step() - x0;
        return left + (right - left) * frac.clamp(0.0, 1.0);
    }
    v.clamp(lo, hi)
}

/// Removes rounding noise from the tails: F is made non-increasing and
/// at least 1, f non-decreasing and at most 1.
fn tidy_tail(upper: &mut NodalGrid, lower: &mut NodalGrid) {
    let mut run = f64::INFINITY;
    for v in upper.values_mut() {
        run = run.min(*v).max(1.0);
        *v = run;
    }
    let mut run = 0.0f64;
    for v in lower.values_mut() {
        run = run.max(*v).min(1.0);
        *v = run;
    }
    clamp_breaks(upper, 1.0, f64::INFINITY);
    clamp_breaks(lower, 0.0, 1.0);
}

fn clamp_breaks(grid: &mut NodalGrid, lo: f64, hi: f64) {
    for v in grid.break_values_mut() {
        if !v.is_nan() {
            *v = v.clamp(lo, hi);
        }
    }
}
