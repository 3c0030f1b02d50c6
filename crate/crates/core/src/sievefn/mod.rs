//! Diamond-Halberstam-Richert sieve functions.
//!
//! For a sieve of dimension g the upper and lower sieve functions F_g, f_g
//! solve
//!
//! ```text
//! (u^g F(u))' = g u^{g-1} f(u-1),   u > α_g,
//! (u^g f(u))' = g u^{g-1} F(u-1),   u > β_g,
//! F(u) = 1/σ_g(u) on (0, α_g],   f(u) = 0 on (0, β_g],
//! ```
//!
//! where σ_g is the Ankeny-Onishi function and the sifting limits
//! α_g ≥ β_g are the unique pair for which both functions tend to 1.

mod grid;
mod limits;
mod sigma;
mod table;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use limits::{adjoint_residuals, solve_sieve_limits, solve_sieve_limits_from, AdjointResiduals};
pub use sigma::{sigma, AnkenyOnishi};
pub use table::{DdeResiduals, SieveFunctionTable, DEFAULT_STEP, MAX_STEP};
pub(crate) use table::csv_error;

use crate::{Error, Result};

/// Largest dimension the crate tabulates.
pub const MAX_DIMENSION: u32 = 10;

/// Sieve dimension g ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SieveDimension(u32);

impl SieveDimension {
    pub fn new(g: u32) -> Result<Self> {
        if g == 0 {
            return Err(Error::Domain("sieve dimension must be at least 1".into()));
        }
        if g > MAX_DIMENSION {
            return Err(Error::Domain(format!(
                "sieve dimension {g} exceeds the supported maximum {MAX_DIMENSION}"
            )));
        }
        Ok(Self(g))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Dimension g + 1, used by the auxiliary sieve.
    pub fn next(self) -> Result<Self> {
        Self::new(self.0 + 1)
    }
}

impl TryFrom<u32> for SieveDimension {
    type Error = Error;

    fn try_from(g: u32) -> Result<Self> {
        Self::new(g)
    }
}

impl From<SieveDimension> for u32 {
    fn from(d: SieveDimension) -> u32 {
        d.0
    }
}

impl fmt::Display for SieveDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where a pair of sifting limits came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitsSource {
    Solved,
    Reference,
}

impl fmt::Display for LimitsSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitsSource::Solved => "solved",
            LimitsSource::Reference => "reference",
        })
    }
}

/// The sifting limits (α_g, β_g).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SieveLimits {
    pub alpha: f64,
    pub beta: f64,
    pub g: SieveDimension,
    pub source: LimitsSource,
}

impl SieveLimits {
    /// Validates `α = β = 2` for g = 1 and `α > β > 2` otherwise.
    pub fn new(g: SieveDimension, alpha: f64, beta: f64, source: LimitsSource) -> Result<Self> {
        let ok = if g.get() == 1 {
            alpha == 2.0 && beta == 2.0
        } else {
            alpha > beta && beta > 2.0 && alpha.is_finite()
        };
        if !ok {
            return Err(Error::Domain(format!(
                "sifting limits alpha={alpha} beta={beta} are not admissible for g={g}"
            )));
        }
        Ok(Self { alpha, beta, g, source })
    }
}

/// Reference sifting limits read from a `g alpha beta` text table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLimits {
    rows: Vec<SieveLimits>,
}

const BUNDLED_LIMITS: &str = include_str!("../../data/sifting_limits.txt");

impl ReferenceLimits {
    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LIMITS).expect("bundled sifting limits are well formed")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses whitespace-separated `g alpha beta` rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `g alpha beta`, got {raw:?}", lineno + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            let g: u32 = fields[0].parse().map_err(|_| bad())?;
            let alpha: f64 = fields[1].parse().map_err(|_| bad())?;
            let beta: f64 = fields[2].parse().map_err(|_| bad())?;
            let dim = SieveDimension::new(g)?;
            if rows.iter().any(|r: &SieveLimits| r.g == dim) {
                return Err(Error::Parse(format!("line {}: duplicate row for g={g}", lineno + 1)));
            }
            rows.push(SieveLimits::new(dim, alpha, beta, LimitsSource::Reference)?);
        }
        rows.sort_by_key(|r| r.g);
        Ok(Self { rows })
    }

    pub fn get(&self, g: SieveDimension) -> Result<SieveLimits> {
        self.rows
            .iter()
            .find(|r| r.g == g)
            .copied()
            .ok_or_else(|| Error::Domain(format!("no reference sifting limits for g={g}")))
    }

    pub fn rows(&self) -> &[SieveLimits] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_bounds() {
        assert!(SieveDimension::new(0).is_err());
        assert!(SieveDimension::new(11).is_err());
        assert_eq!(SieveDimension::new(3).unwrap().next().unwrap().get(), 4);
    }

    #[test]
    fn limits_invariants_are_enforced() {
        let g1 = SieveDimension::new(1).unwrap();
        let g2 = SieveDimension::new(2).unwrap();
        assert!(SieveLimits::new(g1, 2.0, 2.0, LimitsSource::Reference).is_ok());
        assert!(SieveLimits::new(g1, 2.1, 2.0, LimitsSource::Reference).is_err());
        assert!(SieveLimits::new(g2, 4.0, 5.0, LimitsSource::Reference).is_err());
        assert!(SieveLimits::new(g2, 5.0, 1.9, LimitsSource::Reference).is_err());
    }

    #[test]
    fn bundled_table_parses_and_respects_growth_bound() {
        let refs = ReferenceLimits::bundled();
        assert_eq!(refs.rows().len(), MAX_DIMENSION as usize);
        for r in refs.rows() {
            assert!(r.beta / r.g.get() as f64 <= 2.5);
        }
        let g1 = refs.get(SieveDimension::new(1).unwrap()).unwrap();
        assert_eq!((g1.alpha, g1.beta), (2.0, 2.0));
    }

    #[test]
    fn reference_parser_rejects_garbage() {
        assert!(ReferenceLimits::parse("2 5.3").is_err());
        assert!(ReferenceLimits::parse("2 x 4.2").is_err());
        assert!(ReferenceLimits::parse("2 5.3 4.2\n2 5.3 4.2").is_err());
        let ok = ReferenceLimits::parse("# comment\n\n1 2 2  # trailing\n").unwrap();
        assert_eq!(ok.rows().len(), 1);
    }
}
