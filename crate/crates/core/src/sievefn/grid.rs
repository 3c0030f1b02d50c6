//! Uniformly sampled, piecewise-smooth functions.
//!
//! The sieve functions lose a derivative at a handful of known points
//! (the sifting limits and their integer translates). A [`NodalGrid`]
//! stores uniform samples plus the exact value at each such breakpoint, and
//! never lets an interpolation stencil straddle one.

use crate::numeric::lagrange;

const STENCIL: usize = 6;

#[derive(Debug, Clone)]
pub(crate) struct NodalGrid {
    start: f64,
    step: f64,
    values: Vec<f64>,
    breaks: Vec<f64>,
    break_values: Vec<f64>,
}

impl NodalGrid {
    /// Empty grid starting at `start`; `breaks` must be sorted and distinct.
    pub fn new(start: f64, step: f64, breaks: Vec<f64>, capacity: usize) -> Self {
        debug_assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        let break_values = vec![f64::NAN; breaks.len()];
        Self { start, step, values: Vec::with_capacity(capacity), breaks, break_values }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn position(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn break_values_mut(&mut self) -> &mut [f64] {
        &mut self.break_values
    }

    pub fn push(&mut self, value: f64) {
        self.values.push(value);
    }

    /// Records the value at breakpoint `x` if `x` is one of the breaks.
    pub fn record_break(&mut self, x: f64, value: f64) {
        if let Ok(k) = self.breaks.binary_search_by(|b| b.total_cmp(&x)) {
            self.break_values[k] = value;
        }
    }

    /// Interpolated value at `t`, which must lie inside the filled range.
    ///
    /// Returns the value together with the two nearest stencil values that
    /// bracket `t`, which callers use to keep monotone data monotone.
    pub fn eval_bracketed(&self, t: f64) -> (f64, f64, f64) {
        let k = self.breaks.partition_point(|&b| b <= t);
        if k > 0 && self.breaks[k - 1] == t && !self.break_values[k - 1].is_nan() {
            let v = self.break_values[k - 1];
            return (v, v, v);
        }
        let lo = if k > 0 { self.breaks[k - 1] } else { f64::NEG_INFINITY };
        let hi = self.breaks.get(k).copied().unwrap_or(f64::INFINITY);
        let margin = 0.05 * self.step;
        let reach = (STENCIL as f64 + 0.5) * self.step;

        let mut xs = [0.0f64; 2 * STENCIL + 4];
        let mut ys = [0.0f64; 2 * STENCIL + 4];
        let mut count = 0;
        let fi = ((t - self.start) / self.step).floor();
        let i0 = if fi < 0.0 { 0 } else { fi as usize };
        let first = i0.saturating_sub(STENCIL);
        let last = (i0 + STENCIL + 1).min(self.values.len().saturating_sub(1));
        if k > 0 && !self.break_values[k - 1].is_nan() && t - lo <= reach {
            xs[count] = lo;
            ys[count] = self.break_values[k - 1];
            count += 1;
        }
        for i in first..=last {
            let x = self.position(i);
            if x > lo + margin && x < hi - margin {
                xs[count] = x;
                ys[count] = self.values[i];
                count += 1;
            }
        }
        if hi.is_finite() && !self.break_values[k].is_nan() && hi - t <= reach {
            xs[count] = hi;
            ys[count] = self.break_values[k];
            count += 1;
        }
        assert!(count > 0, "no interpolation nodes near {t}");

        // xs is sorted; pick the STENCIL nodes closest to t as a window.
        let (mut a, mut b) = (0usize, count);
        while b - a > STENCIL {
            if (t - xs[a]).abs() > (xs[b - 1] - t).abs() {
                a += 1;
            } else {
                b -= 1;
            }
        }
        let xs = &xs[a..b];
        let ys = &ys[a..b];
        let right = xs.partition_point(|&x| x < t);
        let left_val = if right > 0 { ys[right - 1] } else { ys[0] };
        let right_val = if right < ys.len() { ys[right] } else { ys[ys.len() - 1] };
        if right < xs.len() && xs[right] == t {
            return (ys[right], ys[right], ys[right]);
        }
        (lagrange(xs, ys, t), left_val, right_val)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_bracketed(t).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_respects_breakpoints() {
        // |x - 0.3337| has a kink off the grid; pieces are linear.
        let kink = 0.3337;
        let step = 1.0 / 64.0;
        let mut g = NodalGrid::new(0.0, step, vec![kink], 128);
        for i in 0..=64 {
            g.push((i as f64 * step - kink).abs());
        }
        g.record_break(kink, 0.0);
        for t in [0.3, 0.33, 0.334, 0.34, 0.5] {
            assert!((g.eval(t) - (t - kink).abs()).abs() < 1e-13, "t = {t}");
        }
        assert_eq!(g.eval(kink), 0.0);
    }

    #[test]
    fn smooth_data_is_reproduced_to_high_order() {
        let step = 1.0 / 256.0;
        let mut g = NodalGrid::new(1.0, step, vec![], 1024);
        for i in 0..1024 {
            g.push((1.0 + i as f64 * step).ln());
        }
        for t in [1.0001, 1.5, 2.71, 4.99] {
            assert!((g.eval(t) - t.ln()).abs() < 1e-13);
        }
    }
}
