//! Finitely supported coefficient sequences over real exponents.
//!
//! A [`SigmaSeq`] maps exponents to coefficients relative to a base point
//! `a`; its associated function is `sum c_e / Gamma(e+1) * (x-a)^e` over
//! the support. Fractional differentiation acts on it as a pure shift of
//! the support, which is exact: no coefficient arithmetic happens when
//! differentiating.
//!
//! Shifts are stored as a single accumulated offset per sequence instead
//! of being applied to each exponent, so shifting by `p` then `q` yields
//! bit-identical exponents to shifting once by `p + q`.

use alloc::vec::Vec;
use core::fmt;

use crate::special::rgamma;

/// Direction convention for the shift operator.
///
/// `Identity` moves support exponents *down* by the order (so the shifted
/// sequence's series is the derivative of the original's). `Literal` is
/// the opposite direction, kept selectable for comparison; under it the
/// series identity does not hold and the verification reports say so.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftConvention {
    Identity,
    Literal,
}

impl ShiftConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShiftConvention::Identity => "identity",
            ShiftConvention::Literal => "literal",
        }
    }
}

/// Errors from sequence construction and evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaError {
    /// An exponent, coefficient, base point or scalar was NaN/infinite.
    NonFinite,
    /// Two nonempty sequences with different base points cannot be added.
    BaseMismatch { left: f64, right: f64 },
    /// A jet must contain at least one derivative value.
    EmptyJet,
    /// Evaluation at the base point with a negative non-integer exponent
    /// in the support: the value is unbounded there.
    SingularAtBase { exponent: f64 },
    /// Evaluation below the base point with a non-integer exponent:
    /// (x-a)^e is not real there.
    NonRealPower { exponent: f64 },
}

impl fmt::Display for SigmaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaError::NonFinite => write!(f, "non-finite value in sequence data"),
            SigmaError::BaseMismatch { left, right } => {
                write!(f, "base point mismatch: {left} vs {right}")
            }
            SigmaError::EmptyJet => write!(f, "jet must be nonempty"),
            SigmaError::SingularAtBase { exponent } => {
                write!(f, "unbounded at the base point: exponent {exponent}")
            }
            SigmaError::NonRealPower { exponent } => {
                write!(f, "(x-a)^{exponent} is not real below the base point")
            }
        }
    }
}

impl core::error::Error for SigmaError {}

/// A finitely supported exponent -> coefficient map with a base point.
///
/// Normal form: exponents strictly increasing, no zero coefficients.
/// The empty sequence is the zero element; its base point is a wildcard
/// that matches any base point under addition.
#[derive(Debug, Clone)]
pub struct SigmaSeq {
    base: f64,
    /// Accumulated shift; the effective exponent of a term is raw - offset.
    offset: f64,
    /// (raw exponent, coefficient), raw strictly increasing, coefficient != 0.
    terms: Vec<(f64, f64)>,
}

impl SigmaSeq {
    /// Builds a sequence from (exponent, coefficient) pairs, normalizing:
    /// terms are sorted, equal exponents merged, zero coefficients dropped.
    pub fn new(base: f64, terms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, SigmaError> {
        if !base.is_finite() {
            return Err(SigmaError::NonFinite);
        }
        let mut collected: Vec<(f64, f64)> = Vec::new();
        for (e, c) in terms {
            if !e.is_finite() || !c.is_finite() {
                return Err(SigmaError::NonFinite);
            }
            collected.push((e, c));
        }
        collected.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut normalized: Vec<(f64, f64)> = Vec::with_capacity(collected.len());
        for (e, c) in collected {
            match normalized.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => normalized.push((e, c)),
            }
        }
        normalized.retain(|&(_, c)| c != 0.0);
        Ok(Self {
            base,
            offset: 0.0,
            terms: normalized,
        })
    }

    /// The empty (zero) sequence at `base`.
    pub fn zero(base: f64) -> Self {
        Self {
            base,
            offset: 0.0,
            terms: Vec::new(),
        }
    }

    /// Sequence whose term at integer exponent `i` is `derivs[i]`, i.e.
    /// the coefficient data of the Taylor jet at `base` (evaluation
    /// divides by Gamma(i+1) = i!).
    pub fn from_jet(derivs: &[f64], base: f64) -> Result<Self, SigmaError> {
        if derivs.is_empty() {
            return Err(SigmaError::EmptyJet);
        }
        if derivs.iter().any(|d| !d.is_finite()) {
            return Err(SigmaError::NonFinite);
        }
        Self::new(
            base,
            derivs
                .iter()
                .enumerate()
                .filter(|&(_, &d)| d != 0.0)
                .map(|(i, &d)| (i as f64, d)),
        )
    }

    pub fn base_point(&self) -> f64 {
        self.base
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Total shift applied so far (identity-convention sign).
    pub fn applied_shift(&self) -> f64 {
        self.offset
    }

    /// Terms as (effective exponent, coefficient), exponents ascending.
    pub fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.terms.iter().map(move |&(e, c)| (e - self.offset, c))
    }

    /// Shift under the identity-satisfying convention: every support
    /// exponent decreases by `p`. Exact (offset bookkeeping only).
    pub fn shifted(&self, p: f64) -> Self {
        let mut out = self.clone();
        out.offset += p;
        out
    }

    /// Shift under an explicit convention. `Literal` moves exponents up
    /// by `p` instead of down.
    pub fn shifted_with(&self, p: f64, convention: ShiftConvention) -> Self {
        match convention {
            ShiftConvention::Identity => self.shifted(p),
            ShiftConvention::Literal => self.shifted(-p),
        }
    }

    /// Evaluates the associated function at `x`:
    /// `sum c_e * rgamma(e+1) * (x-a)^e`.
    ///
    /// Terms whose exponent is a negative integer contribute exactly 0
    /// (rgamma pole rule) and are skipped before any power is formed.
    pub fn eval(&self, x: f64) -> Result<f64, SigmaError> {
        let dx = x - self.base;
        let mut acc = 0.0;
        for (e, c) in self.terms() {
            let rg = rgamma(e + 1.0);
            if rg == 0.0 {
                continue;
            }
            let is_integer = libm::floor(e) == e;
            if dx == 0.0 && e < 0.0 {
                // Non-integer negative exponents are unbounded at a;
                // integer ones were annihilated above.
                return Err(SigmaError::SingularAtBase { exponent: e });
            }
            if dx < 0.0 && !is_integer {
                return Err(SigmaError::NonRealPower { exponent: e });
            }
            acc += c * rg * libm::pow(dx, e);
        }
        Ok(acc)
    }

    /// Coefficient-wise sum. Base points must agree unless one side is
    /// the zero sequence.
    pub fn add(&self, other: &Self) -> Result<Self, SigmaError> {
        if !self.is_empty() && !other.is_empty() && self.base != other.base {
            return Err(SigmaError::BaseMismatch {
                left: self.base,
                right: other.base,
            });
        }
        let base = if self.is_empty() { other.base } else { self.base };
        Self::new(base, self.terms().chain(other.terms()))
    }

    /// Coefficient-wise scaling; a zero scalar yields the zero sequence.
    pub fn scaled(&self, scalar: f64) -> Result<Self, SigmaError> {
        if !scalar.is_finite() {
            return Err(SigmaError::NonFinite);
        }
        Self::new(self.base, self.terms().map(|(e, c)| (e, c * scalar)))
    }
}

impl PartialEq for SigmaSeq {
    /// Equality on effective terms; empty sequences compare equal
    /// regardless of base point (the zero element is unique).
    fn eq(&self, other: &Self) -> bool {
        if self.terms.len() != other.terms.len() {
            return false;
        }
        if self.is_empty() {
            return true;
        }
        self.base == other.base
            && self
                .terms()
                .zip(other.terms())
                .all(|((e1, c1), (e2, c2))| e1 == e2 && c1 == c2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(base: f64, terms: &[(f64, f64)]) -> SigmaSeq {
        SigmaSeq::new(base, terms.iter().copied()).unwrap()
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let s = seq(0.0, &[(2.0, 1.0)]);
        assert_eq!(s.shifted(0.0), s);
    }

    #[test]
    fn shift_drops_every_exponent() {
        let s = seq(0.0, &[(0.0, 1.0), (1.0, 2.0)]);
        let shifted = s.shifted(1.0);
        let terms: Vec<_> = shifted.terms().collect();
        assert_eq!(terms, [(-1.0, 1.0), (0.0, 2.0)]);
    }

    #[test]
    fn shift_composition_is_exact() {
        let s = seq(0.0, &[(0.0, 3.0), (2.0, 1.0)]);
        assert_eq!(s.shifted(0.5).shifted(0.5), s.shifted(1.0));
        assert_eq!(s.shifted(0.3).shifted(-0.3), s);
    }

    #[test]
    fn eval_constant_term() {
        let s = seq(0.0, &[(0.0, 1.0)]);
        assert_eq!(s.eval(7.0).unwrap(), 1.0);
    }

    #[test]
    fn eval_annihilates_negative_integer_exponents() {
        let s = seq(0.0, &[(-2.0, 5.0)]);
        assert_eq!(s.eval(3.0).unwrap(), 0.0);
        // Stays exactly zero at the base point too: the term is
        // identically zero, not merely small.
        assert_eq!(s.eval(0.0).unwrap(), 0.0);
        let all_neg = seq(1.0, &[(-1.0, 2.0), (-3.0, -0.5), (-7.0, 4.0)]);
        for &x in &[1.0, 1.5, 3.0, 0.25] {
            assert_eq!(all_neg.eval(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn eval_fractional_negative_exponent() {
        // 4^(-0.5) / Gamma(0.5) = 0.5 / sqrt(pi)
        let s = seq(0.0, &[(-0.5, 1.0)]);
        let expected = 0.5 / 1.772_453_850_905_516;
        assert!((s.eval(4.0).unwrap() - expected).abs() < 1e-15);
        assert_eq!(
            s.eval(0.0),
            Err(SigmaError::SingularAtBase { exponent: -0.5 })
        );
    }

    #[test]
    fn eval_rejects_non_real_powers_below_base() {
        let s = seq(0.0, &[(0.5, 1.0)]);
        assert!(matches!(s.eval(-1.0), Err(SigmaError::NonRealPower { .. })));
        // Integer exponents evaluate fine below the base point.
        let p = seq(0.0, &[(2.0, 2.0)]);
        assert_eq!(p.eval(-3.0).unwrap(), 9.0);
    }

    #[test]
    fn from_jet_examples() {
        assert!(SigmaSeq::from_jet(&[0.0], 0.0).unwrap().is_empty());

        let s = SigmaSeq::from_jet(&[1.0, 1.0], 0.0).unwrap();
        assert_eq!(s.eval(2.0).unwrap(), 3.0); // 1 + x at x = 2

        let s = SigmaSeq::from_jet(&[0.0, 0.0, 6.0], 1.0).unwrap();
        let terms: Vec<_> = s.terms().collect();
        assert_eq!(terms, [(2.0, 6.0)]);
        assert_eq!(s.eval(3.0).unwrap(), 12.0); // 3(x-1)^2 at x = 3

        assert_eq!(SigmaSeq::from_jet(&[], 0.0), Err(SigmaError::EmptyJet));
    }

    #[test]
    fn add_and_scale_normal_form() {
        let a = seq(0.0, &[(0.0, 1.0)]);
        let b = seq(0.0, &[(0.0, -1.0)]);
        assert!(a.add(&b).unwrap().is_empty());

        let s = seq(0.0, &[(1.0, 5.0), (3.0, 2.0)]);
        assert!(s.scaled(0.0).unwrap().is_empty());

        let lhs = seq(0.0, &[(0.0, 1.0), (2.0, 1.0)]);
        let rhs = seq(0.0, &[(2.0, 1.0), (5.0, 4.0)]);
        let sum: Vec<_> = lhs.add(&rhs).unwrap().terms().collect();
        assert_eq!(sum, [(0.0, 1.0), (2.0, 2.0), (5.0, 4.0)]);
    }

    #[test]
    fn zero_base_point_is_wildcard() {
        let z = SigmaSeq::zero(5.0);
        let s = seq(1.0, &[(0.0, 2.0)]);
        let sum = z.add(&s).unwrap();
        assert_eq!(sum, s);
        assert_eq!(sum.base_point(), 1.0);
        let t = seq(2.0, &[(0.0, 2.0)]);
        assert!(matches!(s.add(&t), Err(SigmaError::BaseMismatch { .. })));
    }

    #[test]
    fn rejects_non_finite_data() {
        assert!(SigmaSeq::new(0.0, [(f64::NAN, 1.0)]).is_err());
        assert!(SigmaSeq::new(0.0, [(1.0, f64::INFINITY)]).is_err());
        assert!(SigmaSeq::new(f64::NAN, []).is_err());
        let s = seq(0.0, &[(1.0, 2.0)]);
        assert!(s.scaled(f64::NAN).is_err());
    }
}
