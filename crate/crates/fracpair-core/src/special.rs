//! Gamma-function machinery.
//!
//! Everything downstream leans on two facts: `gamma` is accurate to
//! ~1e-14 relative away from the poles, and `rgamma` returns an exact
//! zero at every non-positive integer. The second one is load-bearing:
//! it is what makes power-rule terms with negative-integer exponents
//! vanish instead of blowing up.

use core::fmt;

/// sqrt(2*pi) to full f64 precision.
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Lanczos parameter g = 607/128 with the matching 15-term series
/// (Godfrey's coefficients; ~15 significant digits on the real axis).
const LANCZOS_G: f64 = 4.742_187_5;

const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_048_8e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_140_8e-5,
    3.689_918_265_953_162e-6,
];

/// Errors from the checked gamma evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialError {
    /// Argument is a non-positive integer, where gamma has a pole.
    Pole { x: f64 },
    /// |Γ(x)| exceeds the representable f64 range.
    Overflow { x: f64 },
    /// Argument is NaN or infinite.
    NonFinite { x: f64 },
}

impl fmt::Display for SpecialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecialError::Pole { x } => write!(f, "gamma pole at non-positive integer x = {x}"),
            SpecialError::Overflow { x } => write!(f, "gamma overflow at x = {x}"),
            SpecialError::NonFinite { x } => write!(f, "non-finite argument x = {x}"),
        }
    }
}

impl core::error::Error for SpecialError {}

/// True when `x` is an exact non-positive integer (a gamma pole).
pub fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && libm::floor(x) == x
}

/// sin(pi * x) with argument reduction so values at near-integer `x`
/// do not lose accuracy to the rounding of `pi * x`.
fn sin_pi(x: f64) -> f64 {
    if libm::fabs(x) >= 9.007_199_254_740_992e15 {
        // Every f64 of this magnitude is an integer.
        return 0.0;
    }
    let n = libm::round(x);
    let r = x - n; // exact: |r| <= 0.5 and n is the nearest integer
    let s = libm::sin(core::f64::consts::PI * r);
    if (n as i64) & 1 == 0 {
        s
    } else {
        -s
    }
}

/// Exact factorial for Γ at small positive integers; Γ(n) = (n-1)! is
/// exactly representable up to n = 19.
fn small_integer_gamma(x: f64) -> Option<f64> {
    if x >= 1.0 && x <= 19.0 && libm::floor(x) == x {
        let n = x as u32;
        let mut acc = 1.0;
        for i in 2..n {
            acc *= f64::from(i);
        }
        return Some(acc);
    }
    None
}

/// Lanczos evaluation of Γ(x) for x >= 0.5. Returns +inf on overflow.
///
/// The power is split in two so that Γ stays finite for arguments up to
/// the true overflow threshold (~171.62) instead of overflowing in the
/// intermediate `t^(x+1/2)`.
fn gamma_positive(x: f64) -> f64 {
    if let Some(v) = small_integer_gamma(x) {
        return v;
    }
    let mut series = LANCZOS_COEF[0];
    for (j, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (x + j as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    let half_pow = libm::pow(t, 0.5 * (x + 0.5));
    SQRT_2PI * series / x * half_pow * (half_pow * libm::exp(-t))
}

/// Γ(x).
///
/// Defined away from the non-positive integers; relative error is
/// ~1e-14 on [-170, 170] away from the poles. Poles and overflow are
/// reported as errors rather than as NaN/inf.
pub fn gamma(x: f64) -> Result<f64, SpecialError> {
    if !x.is_finite() {
        return Err(SpecialError::NonFinite { x });
    }
    if is_nonpositive_integer(x) {
        return Err(SpecialError::Pole { x });
    }
    let value = if x >= 0.5 {
        gamma_positive(x)
    } else {
        // Reflection: Γ(x) = pi / (sin(pi x) Γ(1-x)).
        core::f64::consts::PI / (sin_pi(x) * gamma_positive(1.0 - x))
    };
    if value.is_infinite() {
        return Err(SpecialError::Overflow { x });
    }
    Ok(value)
}

/// 1/Γ(x) as a total function.
///
/// Returns exactly 0.0 at every non-positive integer. Near those poles
/// the value is computed as sin(pi x)/pi * Γ(1-x), which stays accurate
/// where 1/gamma(x) would cancel catastrophically.
pub fn rgamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return f64::NAN;
    }
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x >= 0.5 {
        1.0 / gamma_positive(x)
    } else {
        sin_pi(x) / core::f64::consts::PI * gamma_positive(1.0 - x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rel(actual: f64, expected: f64, tol: f64) {
        let err = libm::fabs(actual - expected) / libm::fabs(expected);
        assert!(
            err <= tol,
            "actual {actual:e}, expected {expected:e}, rel err {err:e} > {tol:e}"
        );
    }

    // Reference values computed once with a 50-digit evaluation (mpmath)
    // and frozen here.
    const GAMMA_REFS: [(f64, f64); 11] = [
        (0.5, 1.772453850905516),
        (1.5, 0.886226925452758),
        (2.5, 1.329340388179137),
        (3.5, 3.3233509704478426),
        (-1.5, 2.363271801207355),
        (-4.5, -0.060019601300504246),
        (0.1, 9.513507698668732),
        (10.0, 362880.0),
        (25.25, 1.3821549138373969e24),
        (150.5, 4.661072627097378e261),
        (-33.7, 3.80022956829172e-38),
    ];

    #[test]
    fn matches_high_precision_references() {
        for &(x, expected) in &GAMMA_REFS {
            assert_rel(gamma(x).unwrap(), expected, 1e-13);
        }
    }

    #[test]
    fn trivial_factorials() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert_eq!(gamma(7.0).unwrap(), 720.0);
        assert_eq!(gamma(19.0).unwrap(), 6_402_373_705_728_000.0);
        // First value past the exact-factorial range still meets the
        // accuracy budget: 19! from the 50-digit oracle.
        assert_rel(gamma(20.0).unwrap(), 1.216_451_004_088_320e17, 1e-14);
    }

    #[test]
    fn large_argument_stays_within_budget() {
        // mpmath: gamma(170.2) = 1.191841116636739159081e305
        assert_rel(gamma(170.2).unwrap(), 1.1918411166367392e305, 1e-13);
        // mpmath: gamma(-170.3) = -1.144927998387908778956e-307
        assert_rel(gamma(-170.3).unwrap(), -1.1449279983879088e-307, 1e-12);
    }

    #[test]
    fn poles_and_overflow_are_errors() {
        assert_eq!(gamma(0.0), Err(SpecialError::Pole { x: 0.0 }));
        assert_eq!(gamma(-3.0), Err(SpecialError::Pole { x: -3.0 }));
        assert_eq!(gamma(-100.0), Err(SpecialError::Pole { x: -100.0 }));
        assert!(matches!(gamma(172.0), Err(SpecialError::Overflow { .. })));
        assert!(matches!(gamma(f64::NAN), Err(SpecialError::NonFinite { .. })));
        assert!(matches!(
            gamma(f64::INFINITY),
            Err(SpecialError::NonFinite { .. })
        ));
    }

    #[test]
    fn rgamma_is_exactly_zero_at_poles() {
        for n in 0..=100 {
            let x = -(n as f64);
            assert_eq!(rgamma(x), 0.0, "rgamma({x}) must be an exact zero");
        }
    }

    #[test]
    fn rgamma_reference_values() {
        assert_rel(rgamma(1.5), 1.1283791670955126, 1e-13);
        assert_rel(rgamma(0.5), 1.0 / 1.772453850905516, 1e-13);
        // Near-pole values, frozen from the 50-digit oracle.
        assert_rel(rgamma(-2.999999999), -5.999999992463294e-9, 1e-6);
        assert_rel(rgamma(-3.000000001), 6.000000007536706e-9, 1e-6);
        assert_rel(rgamma(-7.0000000001), 5.040000001015883e-7, 1e-4);
        assert_rel(rgamma(1e-8), 1.0000000057721566e-8, 1e-13);
    }

    #[test]
    fn rgamma_times_gamma_is_one() {
        for &x in &[-4.5, -1.5, 0.5, 1.0, 2.5, 10.0, 42.25, -0.25] {
            let prod = rgamma(x) * gamma(x).unwrap();
            assert_rel(prod, 1.0, 1e-13);
        }
    }

    #[test]
    fn recurrence_on_dense_grid() {
        // gamma(x+1) = x gamma(x) on [0.1, 50].
        let mut x = 0.1;
        while x <= 50.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_rel(lhs, rhs, 1e-12);
            x += 0.07;
        }
    }

    #[test]
    fn reflection_consistency_for_negatives() {
        // gamma(x) gamma(1-x) = pi / sin(pi x), checked at fractional points.
        for &x in &[-0.5, -1.25, -3.75, -10.5, 0.25] {
            let lhs = gamma(x).unwrap() * gamma(1.0 - x).unwrap();
            let rhs = core::f64::consts::PI / sin_pi(x);
            assert_rel(lhs, rhs, 1e-12);
        }
    }
}
