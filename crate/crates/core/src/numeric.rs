//! Small numerical kernels shared by the sieve-function, bounds and
//! optimizer modules: Gauss-Legendre rules, adaptive Simpson quadrature,
//! Brent root finding and Lagrange interpolation.

use std::sync::OnceLock;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^γ`.
pub fn exp_gamma() -> f64 {
    EULER_GAMMA.exp()
}

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 5-point rule (exact through degree 9).
    pub fn five() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(5))
    }

    /// Shared 12-point rule.
    pub fn twelve() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(12))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> f64 {
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + width * i as f64;
                let hi = if i + 1 == panels { b } else { lo + width };
                self.integrate(&mut f, lo, hi)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Integrates `f` over `[a, b]`, splitting at every interior point of
/// `breaks`, with a composite Gauss-Legendre rule on each piece.
pub fn integrate_piecewise<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    panels_per_unit: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    let rule = GaussLegendre::twelve();
    let mut lo = a;
    let mut total = 0.0;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        let panels = ((hi - lo) * panels_per_unit).ceil().max(1.0) as usize;
        total += rule.integrate_composite(&mut f, lo, hi, panels);
        lo = hi;
    }
    total
}

/// Outcome of an adaptive Simpson integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
    /// True when some sub-interval hit the depth cap before meeting its tolerance.
    pub depth_limited: bool,
}

/// Adaptive Simpson quadrature with Richardson correction.
///
/// `tol` is an absolute tolerance for the whole interval; each bisection
/// halves the share handed to the children.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Quadrature {
    if b == a {
        return Quadrature { value: 0.0, evaluations: 0, depth_limited: false };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
    let mut state = SimpsonState { evaluations: 3, depth_limited: false };
    let value = simpson_step(&mut f, [a, m, b], [fa, fm, fb], whole, tol, max_depth, &mut state);
    Quadrature { value, evaluations: state.evaluations, depth_limited: state.depth_limited }
}

struct SimpsonState {
    evaluations: usize,
    depth_limited: bool,
}

fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    [a, m, b]: [f64; 3],
    [fa, fm, fb]: [f64; 3],
    whole: f64,
    tol: f64,
    depth: u32,
    state: &mut SimpsonState,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    state.evaluations += 2;
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    // Below rounding noise a tighter absolute tolerance cannot be met.
    let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= (15.0 * tol).max(noise) {
        return left + right + delta / 15.0;
    }
    if depth == 0 || (m - a) <= f64::EPSILON * a.abs().max(b.abs()) {
        state.depth_limited = true;
        return left + right + delta / 15.0;
    }
    simpson_step(f, [a, lm, m], [fa, flm, fm], left, 0.5 * tol, depth - 1, state)
        + simpson_step(f, [m, rm, b], [fm, frm, fb], right, 0.5 * tol, depth - 1, state)
}

/// Failure modes of [`brent_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootError {
    /// `f(a)` and `f(b)` have the same sign.
    NoSignChange { fa: f64, fb: f64 },
    /// Iteration budget exhausted; carries the best bracket.
    NotConverged { a: f64, b: f64 },
    /// The function returned NaN.
    NotFinite { x: f64 },
}

/// Brent's method (bisection / secant / inverse quadratic interpolation)
/// on a bracketing interval. Stops when the bracket is below `xtol`.
pub fn brent_root<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() {
        return Err(RootError::NotFinite { x: a });
    }
    if fb.is_nan() {
        return Err(RootError::NotFinite { x: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { fa, fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let half = 0.5 * (c - b);
        if half.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * half * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b);
        if fb.is_nan() {
            return Err(RootError::NotFinite { x: b });
        }
    }
    Err(RootError::NotConverged { a: b, b: c })
}

/// Evaluates the interpolating polynomial through `(xs[i], ys[i])` at `t`.
///
/// Values are interpolated relative to `ys[0]` so that nearly constant
/// data keeps its low-order bits.
pub fn lagrange(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let base = ys[0];
    let mut acc = 0.0;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate().skip(1) {
        if t == xi {
            return yi;
        }
        let mut w = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if j != i {
                w *= (t - xj) / (xi - xj);
            }
        }
        acc += w * (yi - base);
    }
    base + acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        // degree 9 is exact for 5 points
        let v = rule.integrate(|x| x.powi(9) + 3.0 * x.powi(8), -1.0, 2.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 + 3.0 * (2f64.powi(9) + 1.0) / 9.0;
        assert!((v - exact).abs() < 1e-11 * exact.abs());
        let twelve = GaussLegendre::twelve();
        let s: f64 = twelve.integrate(|_| 1.0, 0.0, 3.0);
        assert!((s - 3.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_simpson_handles_a_kink() {
        let q = adaptive_simpson(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12, 40);
        let exact = 0.5 * (0.09 + 0.49);
        assert!((q.value - exact).abs() < 1e-11);
        assert!(!q.depth_limited);
        assert_eq!(adaptive_simpson(|x| x, 2.0, 2.0, 1e-9, 40).value, 0.0);
    }

    #[test]
    fn brent_finds_roots_and_reports_missing_brackets() {
        let r = brent_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        let r = brent_root(|x: f64| x.cos() - x, 0.0, 1.0, 1e-14, 200).unwrap();
        assert!((r.cos() - r).abs() < 1e-13);
        assert!(matches!(
            brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50),
            Err(RootError::NoSignChange { .. })
        ));
    }

    #[test]
    fn lagrange_reproduces_quintics() {
        let xs = [0.0, 0.3, 0.5, 1.1, 1.4, 2.0];
        let p = |x: f64| 1.0 - x + 2.0 * x.powi(3) - 0.5 * x.powi(5);
        let ys: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
        for t in [0.1, 0.77, 1.9] {
            assert!((lagrange(&xs, &ys, t) - p(t)).abs() < 1e-12);
        }
    }
}
