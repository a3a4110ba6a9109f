//! Test functions with known smoothness class and closed-form
//! differintegrals.
//!
//! Every entry is anchored at a point where the function stops being
//! smooth (or is analytic), so the decomposition hypotheses hold with
//! the stated class. Closed forms are power-rule based and valid for
//! x above the base point, where the operators live; order 0 falls back
//! to the function itself on the whole domain.
//!
//! The entry constructors ([`CatalogEntry::power`] and friends) take
//! the base point and domain as parameters so callers can build the
//! same function families at other anchors.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::rlnum::{rl_derivative, rl_power_rule, FnHandle, QuadSpec, RlError, Smoothness};

/// Closed-form differintegral: maps (order p, point x) to a value.
pub type ClosedForm = Arc<dyn Fn(f64, f64) -> Result<f64, RlError> + Send + Sync>;

const ANALYTIC_JET_LEN: usize = 21;

/// A named test function, optionally with a closed-form oracle.
#[derive(Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub handle: FnHandle,
    pub closed_form: Option<ClosedForm>,
    /// Provenance of the closed form (or of its absence).
    pub notes: &'static str,
}

impl core::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("smoothness", &self.handle.smoothness())
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl CatalogEntry {
    /// `(x-a)^mu` with `mu >= 0`. Fractional exponents give class
    /// `floor(mu)` and need `domain.0 == a`; integer exponents are a
    /// one-term polynomial.
    pub fn power(id: &str, mu: f64, a: f64, domain: (f64, f64)) -> Result<Self, RlError> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(RlError::BadExponent { mu });
        }
        if libm::floor(mu) == mu && mu <= 18.0 {
            let mut coeffs = vec![0.0; mu as usize + 1];
            coeffs[mu as usize] = 1.0;
            return Self::poly(id, coeffs, a, domain);
        }
        if domain.0 < a {
            return Err(RlError::BadHandle(
                "a fractional power is real only above its base point",
            ));
        }
        let k = libm::floor(mu) as u32;
        let mut builder = FnHandle::builder(move |x: f64| libm::pow(x - a, mu), a)
            .domain(domain.0, domain.1)
            .smoothness(Smoothness::Finite(k))
            .jet(vec![0.0; k as usize + 1])
            .expansion(vec![(mu, 1.0)]);
        let mut fall = 1.0;
        for j in 1..=k + 1 {
            fall *= mu - f64::from(j) + 1.0;
            let e = mu - f64::from(j);
            builder = builder.push_derivative(move |x: f64| fall * libm::pow(x - a, e));
        }
        let handle = builder.build()?;
        let f = handle.clone();
        Ok(Self {
            id: id.into(),
            handle,
            closed_form: Some(Arc::new(move |p, x| {
                if p == 0.0 {
                    f.evaluate(x)
                } else {
                    rl_power_rule(mu, p, a, x)
                }
            })),
            notes: "power rule for (t-a)^mu",
        })
    }

    /// Polynomial `sum coeffs[i] (x-a)^i`, analytic at `a`.
    pub fn poly(id: &str, coeffs: Vec<f64>, a: f64, domain: (f64, f64)) -> Result<Self, RlError> {
        if coeffs.is_empty() || coeffs.len() > ANALYTIC_JET_LEN {
            return Err(RlError::BadHandle("polynomial needs 1 to 21 coefficients"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(RlError::NonFinite {
                what: "polynomial coefficient",
                value: f64::NAN,
            });
        }
        let eval_coeffs = coeffs.clone();
        let eval = move |x: f64| {
            let mut acc = 0.0;
            for &c in eval_coeffs.iter().rev() {
                acc = acc * (x - a) + c;
            }
            acc
        };
        let mut jet = vec![0.0; ANALYTIC_JET_LEN];
        let mut factorial = 1.0;
        for (i, &c) in coeffs.iter().enumerate() {
            if i > 0 {
                factorial *= i as f64;
            }
            jet[i] = c * factorial;
        }
        let mut builder = FnHandle::builder(eval, a)
            .domain(domain.0, domain.1)
            .smoothness(Smoothness::Analytic)
            .jet(jet)
            .expansion(
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| c != 0.0)
                    .map(|(i, &c)| (i as f64, c))
                    .collect(),
            );
        for j in 1..=6usize {
            let dc = coeffs.clone();
            builder = builder.push_derivative(move |x: f64| {
                let mut acc = 0.0;
                for (i, &c) in dc.iter().enumerate().skip(j) {
                    let mut fall = 1.0;
                    for v in 0..j {
                        fall *= (i - v) as f64;
                    }
                    acc += c * fall * libm::pow(x - a, (i - j) as f64);
                }
                acc
            });
        }
        let handle = builder.build()?;
        let f = handle.clone();
        Ok(Self {
            id: id.into(),
            handle,
            closed_form: Some(Arc::new(move |p, x| {
                if p == 0.0 {
                    return f.evaluate(x);
                }
                let mut acc = 0.0;
                for (i, &c) in coeffs.iter().enumerate() {
                    if c != 0.0 {
                        acc += c * rl_power_rule(i as f64, p, a, x)?;
                    }
                }
                Ok(acc)
            })),
            notes: "termwise power rule",
        })
    }

    /// `(x-a)^n |x-a|`: class `C^n` at `a`, equal to `(x-a)^(n+1)` above it.
    pub fn abs_power(id: &str, n: u32, a: f64, domain: (f64, f64)) -> Result<Self, RlError> {
        if n > 6 {
            return Err(RlError::BadHandle("abs-power degree capped at 6"));
        }
        let f = move |x: f64| libm::pow(x - a, f64::from(n)) * libm::fabs(x - a);
        let mut builder = FnHandle::builder(f, a)
            .domain(domain.0, domain.1)
            .smoothness(Smoothness::Finite(n))
            .jet(vec![0.0; n as usize + 1])
            .expansion(vec![(f64::from(n) + 1.0, 1.0)]);
        // f^(j)(x) = (n+1)!/(n+1-j)! (x-a)^(n-j) |x-a| for j <= n, then
        // the sign function times (n+1)!.
        let mut coeff = 1.0;
        for j in 1..=n {
            coeff *= f64::from(n + 2 - j);
            let e = n - j;
            builder = builder.push_derivative(move |x: f64| {
                coeff * libm::pow(x - a, f64::from(e)) * libm::fabs(x - a)
            });
        }
        let full = {
            let mut acc = 1.0;
            for v in 1..=n + 1 {
                acc *= f64::from(v);
            }
            acc
        };
        builder = builder.push_derivative(move |x: f64| full * libm::copysign(1.0, x - a));
        let handle = builder.build()?;
        let f = handle.clone();
        let mu = f64::from(n) + 1.0;
        Ok(Self {
            id: id.into(),
            handle,
            closed_form: Some(Arc::new(move |p, x| {
                if p == 0.0 {
                    f.evaluate(x)
                } else {
                    rl_power_rule(mu, p, a, x)
                }
            })),
            notes: "equals (t-a)^(n+1) above the base point; power rule there",
        })
    }

    /// `sin(x)` anchored at `a`, analytic, numerical oracle only.
    pub fn sin(id: &str, a: f64, domain: (f64, f64)) -> Result<Self, RlError> {
        let (sa, ca) = (libm::sin(a), libm::cos(a));
        let jet: Vec<f64> = (0..ANALYTIC_JET_LEN)
            .map(|i| match i % 4 {
                0 => sa,
                1 => ca,
                2 => -sa,
                _ => -ca,
            })
            .collect();
        let mut builder = FnHandle::builder(libm::sin, a)
            .domain(domain.0, domain.1)
            .smoothness(Smoothness::Analytic)
            .jet(jet);
        for j in 1..=6usize {
            builder = builder.push_derivative(move |x: f64| match j % 4 {
                0 => libm::sin(x),
                1 => libm::cos(x),
                2 => -libm::sin(x),
                _ => -libm::cos(x),
            });
        }
        Ok(Self {
            id: id.into(),
            handle: builder.build()?,
            closed_form: None,
            notes: "no closed form; numerical oracle only",
        })
    }

    fn mix() -> Result<Self, RlError> {
        // 1 + x + x|x|, class C^1 at 0; equals 1 + t + t^2 above it.
        let handle = FnHandle::builder(|x: f64| 1.0 + x + x * libm::fabs(x), 0.0)
            .domain(-1.0, 2.0)
            .smoothness(Smoothness::Finite(1))
            .jet(vec![1.0, 1.0])
            .expansion(vec![(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)])
            .push_derivative(|x| 1.0 + 2.0 * libm::fabs(x))
            .push_derivative(|x: f64| 2.0 * libm::copysign(1.0, x))
            .build()?;
        let f = handle.clone();
        Ok(Self {
            id: "mix1".into(),
            handle,
            closed_form: Some(Arc::new(move |p, x| {
                if p == 0.0 {
                    return f.evaluate(x);
                }
                Ok(rl_power_rule(0.0, p, 0.0, x)?
                    + rl_power_rule(1.0, p, 0.0, x)?
                    + rl_power_rule(2.0, p, 0.0, x)?)
            })),
            notes: "equals 1 + t + t^2 above the base point; termwise power rule",
        })
    }
}

/// The default test-function catalog, in a fixed order.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry::power("pow_0.5", 0.5, 0.0, (0.0, 3.0)).expect("valid entry"),
        CatalogEntry::power("pow_1.5", 1.5, 0.0, (0.0, 3.0)).expect("valid entry"),
        CatalogEntry::power("pow_2.5", 2.5, 0.0, (0.0, 3.0)).expect("valid entry"),
        CatalogEntry::abs_power("abs1", 1, 0.0, (-1.0, 2.0)).expect("valid entry"),
        CatalogEntry::abs_power("abs2", 2, 0.0, (-1.0, 2.0)).expect("valid entry"),
        CatalogEntry::mix().expect("valid entry"),
        CatalogEntry::poly("poly3", vec![0.0, 0.0, 0.0, 1.0], 0.0, (-1.0, 2.0)).expect("valid entry"),
        CatalogEntry::poly(
            "poly5",
            vec![3.0, 0.0, 2.0, 0.0, -1.0, 1.0],
            0.0,
            (-1.0, 2.0),
        )
        .expect("valid entry"),
        CatalogEntry::sin("sin", 0.0, (0.0, 2.0)).expect("valid entry"),
    ]
}

/// Looks up one entry by id.
pub fn find(id: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.id == id)
}

/// Self-check: every closed form agrees with the numerical
/// differintegral at spot points. Run by the verification harness
/// before trusting the closed forms as oracles.
pub fn validate_catalog(entries: &[CatalogEntry], spec: &QuadSpec) -> Result<(), RlError> {
    const SPOTS: [f64; 5] = [0.23, 0.41, 0.6, 0.78, 0.95];
    for entry in entries {
        let Some(cf) = &entry.closed_form else { continue };
        let f = &entry.handle;
        let a = f.base_point();
        let hi = f.domain().1;
        // A fractional order and (where admissible) the unit order.
        let mut orders = vec![0.5];
        if f.smoothness().admits(1.0) {
            orders.push(1.0);
        }
        for p in orders {
            for frac in SPOTS {
                let x = a + frac * (hi - a);
                let closed = cf(p, x)?;
                let numeric = rl_derivative(f, p, x, spec)?;
                if libm::fabs(closed - numeric) > 1e-6 * libm::fabs(closed).max(1.0) {
                    return Err(RlError::DerivativeMismatch {
                        order: 0,
                        x,
                        expected: closed,
                        got: numeric,
                    });
                }
            }
        }
    }
    Ok(())
}
