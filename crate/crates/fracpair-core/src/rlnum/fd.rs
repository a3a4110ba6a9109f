//! Richardson-extrapolated central differences, the fallback for
//! classical derivatives when no closed-form evaluator is registered.

use super::handle::EvalFn;
use super::RlError;

/// Highest derivative order the stencil supports before rounding noise
/// makes the result meaningless.
const MAX_FD_ORDER: u32 = 6;

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc
}

/// Central m-th difference with step `h`.
fn central(f: &EvalFn, m: u32, x: f64, h: f64) -> Result<f64, RlError> {
    let mut acc = 0.0;
    for j in 0..=m {
        let offset = (0.5 * f64::from(m) - f64::from(j)) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(m, j) * f(x + offset)?;
    }
    Ok(acc / libm::pow(h, f64::from(m)))
}

/// m-th derivative of `f` at `x` by central differences with base step
/// eps^(1/(m+2)) * max(1, |x|) and 3-level Richardson extrapolation.
///
/// The extrapolation runs over steps 4h, 2h, h: the finest level sits
/// at the rounding/truncation balance point, the coarser levels feed
/// the truncation cancellation. Going below h would only amplify
/// rounding. Refuses (missing-derivative error) when the widest stencil
/// does not fit inside the domain.
pub(crate) fn richardson_central(
    f: &EvalFn,
    m: u32,
    x: f64,
    domain: (f64, f64),
) -> Result<f64, RlError> {
    if m == 0 {
        return f(x);
    }
    if m > MAX_FD_ORDER {
        return Err(RlError::MissingDerivative { order: m });
    }
    let h = libm::pow(f64::EPSILON, 1.0 / f64::from(m + 2)) * libm::fabs(x).max(1.0);
    let margin = h * (2.0 * f64::from(m)).max(2.0);
    if x - margin < domain.0 || x + margin > domain.1 {
        return Err(RlError::MissingDerivative { order: m });
    }
    // Error expansion is in even powers of the step: two Richardson stages.
    let t0 = central(f, m, x, 4.0 * h)?;
    let t1 = central(f, m, x, 2.0 * h)?;
    let t2 = central(f, m, x, h)?;
    let r1 = (4.0 * t1 - t0) / 3.0;
    let r2 = (4.0 * t2 - t1) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}
