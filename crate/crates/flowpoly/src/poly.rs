//! Exact integer-coefficient polynomials, stored lowest degree first.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

/// A polynomial with exact integer coefficients; index = degree.
///
/// The trailing coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<BigInt>,
}

impl Polynomial {
    /// Build from coefficients (lowest degree first), trimming trailing zeros.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_u64(coeffs: &[u64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients, lowest degree first.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(Zero::zero)
    }

    /// Degree; zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Sum of all coefficients (the value at 1).
    pub fn coefficient_sum(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Log-concavity of the coefficient sequence: `c_k^2 >= c_{k-1} c_{k+1}`
    /// for all interior k.
    pub fn is_log_concave(&self) -> bool {
        self.coeffs
            .windows(3)
            .all(|w| &w[1] * &w[1] >= &w[0] * &w[2])
    }

    /// Unimodality: coefficients rise (weakly) then fall (weakly).
    pub fn is_unimodal(&self) -> bool {
        let mut falling = false;
        for w in self.coeffs.windows(2) {
            if w[1] > w[0] {
                if falling {
                    return false;
                }
            } else if w[1] < w[0] {
                falling = true;
            }
        }
        true
    }

    pub fn all_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| c >= &BigInt::zero())
    }

    /// JSON form `{"coeffs":[...]}`, lowest degree first. Coefficients that
    /// fit in a u64 are emitted as numbers, larger ones as decimal strings.
    pub fn to_json(&self) -> Value {
        json!({ "coeffs": self.coeffs.iter().map(bigint_json).collect::<Vec<_>>() })
    }
}

/// Render a big integer as a JSON number when it fits in u64/i64, otherwise
/// as a decimal string.
pub fn bigint_json(x: &BigInt) -> Value {
    if let Ok(u) = u64::try_from(x) {
        json!(u)
    } else if let Ok(i) = i64::try_from(x) {
        json!(i)
    } else {
        json!(x.to_string())
    }
}

impl fmt::Display for Polynomial {
    /// Human form like `1 + 13z + 49z^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => f.write_str("z")?,
                1 => write!(f, "{c}z")?,
                _ if c.is_one() => write!(f, "z^{k}")?,
                _ => write!(f, "{c}z^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_trailing_zeros() {
        let p = Polynomial::new(vec![BigInt::from(1), BigInt::from(0), BigInt::from(0)]);
        assert_eq!(p.degree(), 0);
        assert_eq!(p.coeff(5), BigInt::zero());
    }

    #[test]
    fn display_matches_presentation() {
        let p = Polynomial::from_u64(&[1, 13, 49, 61, 28, 4]);
        assert_eq!(p.to_string(), "1 + 13z + 49z^2 + 61z^3 + 28z^4 + 4z^5");
        assert_eq!(Polynomial::from_u64(&[0, 1]).to_string(), "z");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    #[test]
    fn log_concave_and_unimodal() {
        let p = Polynomial::from_u64(&[1, 13, 49, 61, 28, 4]);
        assert!(p.is_log_concave());
        assert!(p.is_unimodal());
        let spiky = Polynomial::from_u64(&[1, 10, 1, 10, 1]);
        assert!(!spiky.is_log_concave());
        assert!(!spiky.is_unimodal());
        // log-concavity fails while unimodality holds
        let q = Polynomial::from_u64(&[1, 1, 100, 1]);
        assert!(!q.is_log_concave());
        assert!(q.is_unimodal());
    }

    #[test]
    fn eval_and_sum() {
        let p = Polynomial::from_u64(&[1, 8, 16, 8, 1]);
        assert_eq!(p.coefficient_sum(), BigInt::from(34));
        assert_eq!(p.eval(&BigInt::from(1)), BigInt::from(34));
        assert_eq!(
            p.eval(&BigInt::from(2)),
            BigInt::from(1 + 16 + 64 + 64 + 16)
        );
    }

    #[test]
    fn json_big_values_fall_back_to_strings() {
        let big: BigInt = BigInt::from(u64::MAX) * 10;
        assert_eq!(bigint_json(&BigInt::from(7u64)), json!(7));
        assert_eq!(bigint_json(&BigInt::from(-7i64)), json!(-7));
        assert_eq!(bigint_json(&big), json!(big.to_string()));
    }
}
