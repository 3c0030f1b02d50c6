//! Integer polynomials and the product system H = h₁⋯h_g.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Polynomial with integer coefficients, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<BigInt>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has degree 0 here.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn constant(&self) -> BigInt {
        self.coeffs.first().cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * n + c)
    }

    /// Value at `n` when every intermediate fits in i128.
    pub fn eval_i128(&self, n: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(n)?.checked_add(c.to_i128()?)?;
        }
        Some(acc)
    }

    /// Coefficients reduced into [0, m).
    pub fn reduce_mod(&self, m: u64) -> Vec<u64> {
        let m = BigInt::from(m);
        self.coeffs.iter().map(|c| c.mod_floor(&m).to_u64().expect("residue fits u64")).collect()
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::new(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
                (true, false) => {}
            }
            first = false;
            let unit = mag.is_one() && e > 0;
            if !unit {
                write!(f, "{mag}")?;
            }
            match e {
                0 => {}
                1 => write!(f, "n")?,
                _ => write!(f, "n^{e}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The factors h₁, ..., h_g of H, all of the common degree k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialSystem {
    factors: Vec<Polynomial>,
    #[serde(skip)]
    product: Polynomial,
    g: u32,
    k: u32,
    #[serde(serialize_with = "serialize_display")]
    h0: BigInt,
}

fn serialize_display<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl PolynomialSystem {
    /// Validates equal positive degrees and pairwise distinct factors.
    pub fn new(factors: Vec<Polynomial>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Input("a polynomial system needs at least one factor".into()));
        }
        let k = factors[0].degree();
        for (i, h) in factors.iter().enumerate() {
            if h.is_zero() || h.degree() == 0 {
                return Err(Error::Input(format!("factor {} ({h}) is constant", i + 1)));
            }
            if h.degree() != k {
                return Err(Error::Input(format!(
                    "unequal degrees: factor 1 has degree {k} but factor {} ({h}) has degree {}",
                    i + 1,
                    h.degree()
                )));
            }
            if let Some(j) = factors[..i].iter().position(|o| o == h) {
                return Err(Error::Input(format!("factors {} and {} are both {h}", j + 1, i + 1)));
            }
        }
        let product = factors.iter().fold(Polynomial::from_i64(&[1]), |acc, h| acc.mul(h));
        let h0 = product.constant();
        Ok(Self { g: factors.len() as u32, k: k as u32, factors, product, h0 })
    }

    pub fn factors(&self) -> &[Polynomial] {
        &self.factors
    }

    /// The product H.
    pub fn product(&self) -> &Polynomial {
        &self.product
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// deg H = g k.
    pub fn degree(&self) -> u32 {
        self.g * self.k
    }

    /// H(0).
    pub fn h0(&self) -> &BigInt {
        &self.h0
    }

    /// Values h_i(n), one per factor.
    pub fn factor_values(&self, n: &BigInt) -> Vec<BigInt> {
        self.factors.iter().map(|h| h.eval(n)).collect()
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        self.product.eval(n)
    }
}

impl fmt::Display for PolynomialSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{h}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PolynomialSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_polynomial_system(s)
    }
}

/// Parses `"n^3+2; n^3+6"`: polynomials in one variable separated by `;`.
///
/// Terms look like `3n^2`, `3*n^2`, `-n`, `7`; any single letter can be the
/// variable as long as every factor uses the same one.
pub fn parse_polynomial_system(text: &str) -> Result<PolynomialSystem> {
    let mut var = None;
    let factors = text
        .split(';')
        .map(|part| parse_polynomial(part, &mut var))
        .collect::<Result<Vec<_>>>()?;
    PolynomialSystem::new(factors)
}

/// Parses a single polynomial.
pub fn parse_polynomial_text(text: &str) -> Result<Polynomial> {
    parse_polynomial(text, &mut None)
}

fn parse_polynomial(text: &str, var: &mut Option<char>) -> Result<Polynomial> {
    let src: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if src.is_empty() {
        return Err(Error::Parse(format!("empty polynomial in {text:?}")));
    }
    let bad = |msg: &str| Error::Parse(format!("{msg} in {:?}", text.trim()));
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let mut negative = false;
        if src[i] == '+' || src[i] == '-' {
            negative = src[i] == '-';
            i += 1;
        } else if i > 0 {
            return Err(bad("expected '+' or '-'"));
        }
        let start = i;
        while i < src.len() && src[i].is_ascii_digit() {
            i += 1;
        }
        let digits: String = src[start..i].iter().collect();
        let mut coef = if digits.is_empty() { None } else { Some(digits.parse::<BigInt>().expect("digits")) };
        if i < src.len() && src[i] == '*' {
            if coef.is_none() {
                return Err(bad("'*' without a coefficient"));
            }
            i += 1;
            if !(i < src.len() && src[i].is_ascii_alphabetic()) {
                return Err(bad("expected the variable after '*'"));
            }
        }
        let mut exp = 0usize;
        if i < src.len() && src[i].is_ascii_alphabetic() {
            let v = src[i];
            match var {
                Some(prev) if *prev != v => return Err(bad(&format!("mixed variables {prev} and {v}"))),
                _ => *var = Some(v),
            }
            i += 1;
            exp = 1;
            if i < src.len() && src[i] == '^' {
                i += 1;
                let s = i;
                while i < src.len() && src[i].is_ascii_digit() {
                    i += 1;
                }
                if s == i {
                    return Err(bad("missing exponent after '^'"));
                }
                exp = src[s..i].iter().collect::<String>().parse().map_err(|_| bad("exponent too large"))?;
                if exp > 64 {
                    return Err(bad("exponent above 64"));
                }
            }
        } else if coef.is_none() {
            return Err(bad("empty term"));
        }
        let mut c = coef.take().unwrap_or_else(BigInt::one);
        if negative {
            c = -c;
        }
        if coeffs.len() <= exp {
            coeffs.resize(exp + 1, BigInt::zero());
        }
        coeffs[exp] += c;
    }
    Ok(Polynomial::new(coeffs))
}
