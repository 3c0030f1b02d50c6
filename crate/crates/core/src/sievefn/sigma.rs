//! The Ankeny-Onishi function σ_g.
//!
//! σ_g(u) = A_g u^g on (0, 2] with A_g = (2e^γ)^{-g} / g!, continued for
//! u > 2 by (u^{-g} σ_g(u))' = -g u^{-g-1} σ_g(u - 2). It increases to 1.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::grid::NodalGrid;
use super::SieveDimension;
use crate::numeric::{exp_gamma, GaussLegendre};
use crate::{Error, Result};

/// Grid spacing used for σ.
const SIGMA_STEP: f64 = 1.0 / 2048.0;
/// Default right end of the σ table; σ_g is 1 to double precision well before.
const SIGMA_U_MAX: f64 = 64.0;

#[derive(Debug, Clone)]
pub struct AnkenyOnishi {
    g: u32,
    coeff: f64,
    u_max: f64,
    grid: NodalGrid,
}

impl AnkenyOnishi {
    /// Tabulates σ_g on (0, u_max].
    pub fn new(dim: SieveDimension, u_max: f64) -> Self {
        let g = dim.get();
        let gf = g as f64;
        let factorial: f64 = (1..=g).map(|i| i as f64).product();
        let coeff = (2.0 * exp_gamma()).powi(-(g as i32)) / factorial;

        let u_max = u_max.max(4.0);
        let n = (u_max / SIGMA_STEP).ceil() as usize + 1;
        let mut breaks = Vec::new();
        let mut b = 2.0;
        while b < u_max {
            breaks.push(b);
            b += 2.0;
        }
        let mut grid = NodalGrid::new(0.0, SIGMA_STEP, breaks, n);
        let rule = GaussLegendre::five();

        // phi = u^{-g} σ(u), marched cell by cell from u = 2.
        let mut phi = coeff;
        let initial = |x: f64| coeff * x.powi(g as i32);
        for i in 0..n {
            let u = i as f64 * SIGMA_STEP;
            let value = if u <= 2.0 {
                initial(u)
            } else {
                let a = u - SIGMA_STEP;
                let lagged = |t: f64| {
                    let s = t - 2.0;
                    let sig = if s <= 2.0 { initial(s) } else { grid.eval(s) };
                    t.powi(-(g as i32) - 1) * sig
                };
                phi -= gf * rule.integrate(lagged, a, u);
                phi * u.powi(g as i32)
            };
            grid.push(value);
            grid.record_break(u, value);
        }
        Self { g, coeff, u_max: grid.position(n - 1), grid }
    }

    /// Process-wide cached table for dimension `dim`.
    pub fn shared(dim: SieveDimension) -> Arc<AnkenyOnishi> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<AnkenyOnishi>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("sigma cache poisoned");
        map.entry(dim.get())
            .or_insert_with(|| Arc::new(AnkenyOnishi::new(dim, SIGMA_U_MAX)))
            .clone()
    }

    pub fn dimension(&self) -> u32 {
        self.g
    }

    /// The constant A_g of the initial power law.
    pub fn leading_coefficient(&self) -> f64 {
        self.coeff
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// σ_g(u) for u > 0. Past the tabulated range σ_g is 1 to double precision.
    pub fn eval(&self, u: f64) -> f64 {
        if u <= 2.0 {
            self.coeff * u.powi(self.g as i32)
        } else if u >= self.u_max {
            1.0
        } else {
            self.grid.eval(u)
        }
    }
}

/// σ_g(u), with a domain check on `u`.
pub fn sigma(dim: SieveDimension, u: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("sigma needs a positive argument, got {u}")));
    }
    Ok(AnkenyOnishi::shared(dim).eval(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::EULER_GAMMA;

    fn dim(g: u32) -> SieveDimension {
        SieveDimension::new(g).unwrap()
    }

    #[test]
    fn sigma_one_at_two_is_exp_minus_gamma() {
        let s = sigma(dim(1), 2.0).unwrap();
        assert!((s - (-EULER_GAMMA).exp()).abs() < 1e-15);
        assert!((s - 0.561459).abs() < 1e-6);
    }

    #[test]
    fn sigma_vanishes_like_a_power_at_zero() {
        let a = 1.0 / (2.0 * exp_gamma());
        for u in [1e-3, 1e-6, 1e-9] {
            assert!((sigma(dim(1), u).unwrap() / u - a).abs() < 1e-14);
        }
        assert!(sigma(dim(1), 0.0).is_err());
        assert!(sigma(dim(1), -1.0).is_err());
    }

    #[test]
    fn sigma_one_matches_closed_form_on_two_to_four() {
        // For g = 1 and 2 < u <= 4: σ(u) = (u/(2e^γ)) (1 - ∫_2^u (t-2)/t^2 dt)
        //   = (u/(2e^γ)) (1 - ln(u/2) - 2/u + 1).
        let s = AnkenyOnishi::shared(dim(1));
        for u in [2.5, 3.0, 3.7, 4.0] {
            let exact = u / (2.0 * exp_gamma()) * (2.0 - (u / 2.0).ln() - 2.0 / u);
            assert!((s.eval(u) - exact).abs() < 1e-14, "u={u}: {} vs {exact}", s.eval(u));
        }
    }

    #[test]
    fn sigma_tends_to_one() {
        for g in 1..=5 {
            let s = sigma(dim(g), 50.0).unwrap();
            assert!((s - 1.0).abs() < 1e-6, "g={g}: {s}");
        }
    }

    #[test]
    fn sigma_is_increasing() {
        let s = AnkenyOnishi::shared(dim(3));
        let mut prev = 0.0;
        for i in 1..400 {
            let v = s.eval(i as f64 * 0.05);
            assert!(v >= prev);
            prev = v;
        }
    }
}
