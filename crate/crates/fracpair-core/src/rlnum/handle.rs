//! Evaluatable function handles with the analytic metadata the
//! fractional operators need: smoothness class, base point, domain,
//! Taylor jet, optional closed-form derivatives, and the leading
//! power expansion at the base point.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{fd, RlError};

/// Shared fallible evaluator. Plain closures are wrapped so that
/// quadrature failures inside derived handles can propagate.
pub type EvalFn = Arc<dyn Fn(f64) -> Result<f64, RlError> + Send + Sync>;

/// Smoothness class of a handle: `Finite(k)` means the k-th classical
/// derivative exists and is continuous with k maximal; `Analytic` marks
/// entries treated through their full jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    Finite(u32),
    Analytic,
}

impl Smoothness {
    /// Admissibility bound for derivative orders: p < k + 1.
    pub fn admits(&self, p: f64) -> bool {
        p < self.order_limit()
    }

    /// k + 1, or infinity for analytic handles.
    pub fn order_limit(&self) -> f64 {
        match self {
            Smoothness::Finite(k) => f64::from(*k) + 1.0,
            Smoothness::Analytic => f64::INFINITY,
        }
    }
}

/// Quadrature configuration for all fractional-operator numerics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSpec {
    /// Initial node count for the Gauss-Jacobi ladder (doubled on each
    /// refinement).
    pub nodes: usize,
    /// Stop refining once successive estimates differ by less than
    /// this (scaled by max(1, |estimate|)).
    pub adaptive_tol: f64,
    /// Refinements (node doublings) before giving up.
    pub max_refinements: u32,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            nodes: 64,
            adaptive_tol: 1e-10,
            max_refinements: 12,
        }
    }
}

impl QuadSpec {
    pub fn new(nodes: usize, adaptive_tol: f64, max_refinements: u32) -> Result<Self, RlError> {
        let spec = Self {
            nodes,
            adaptive_tol,
            max_refinements,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), RlError> {
        if self.nodes < 2 {
            return Err(RlError::BadSpec("QuadSpec.nodes must be at least 2"));
        }
        if !self.adaptive_tol.is_finite() || self.adaptive_tol <= 0.0 {
            return Err(RlError::BadSpec("QuadSpec.adaptive_tol must be positive"));
        }
        if self.max_refinements == 0 {
            return Err(RlError::BadSpec("QuadSpec.max_refinements must be positive"));
        }
        Ok(())
    }

    /// Tightened copy for quadratures nested inside derived evaluators,
    /// so inner noise stays below the outer convergence test.
    pub(crate) fn tightened(&self) -> Self {
        Self {
            adaptive_tol: (self.adaptive_tol * 1e-2).max(1e-13),
            ..*self
        }
    }
}

/// An evaluatable real function anchored at a base point `a`.
///
/// `jet[i]` holds the i-th derivative value at `a` (length k+1 for
/// `Finite(k)`, longer for analytic handles). `derivs[j-1]` evaluates
/// the j-th classical derivative when available in closed form.
/// `expansion` lists (exponent, coefficient) terms known to appear
/// exactly in `f(a + t)` for small t > 0, complete up to the largest
/// listed exponent; it powers singularity subtraction in the quadrature
/// and exact jet propagation through derived handles.
#[derive(Clone)]
pub struct FnHandle {
    eval: EvalFn,
    smoothness: Smoothness,
    base: f64,
    domain: (f64, f64),
    jet: Arc<[f64]>,
    derivs: Arc<[EvalFn]>,
    expansion: Arc<[(f64, f64)]>,
}

impl core::fmt::Debug for FnHandle {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnHandle")
            .field("smoothness", &self.smoothness)
            .field("base", &self.base)
            .field("domain", &self.domain)
            .field("jet", &self.jet)
            .field("derivs", &self.derivs.len())
            .field("expansion", &self.expansion)
            .finish()
    }
}

impl FnHandle {
    /// Starts a builder for an infallible evaluator.
    pub fn builder(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        base: f64,
    ) -> FnHandleBuilder {
        FnHandleBuilder::new(Arc::new(move |x| Ok(f(x))), base)
    }

    /// Starts a builder for a fallible evaluator.
    pub fn builder_fallible(eval: EvalFn, base: f64) -> FnHandleBuilder {
        FnHandleBuilder::new(eval, base)
    }

    pub(crate) fn from_parts(
        eval: EvalFn,
        smoothness: Smoothness,
        base: f64,
        domain: (f64, f64),
        jet: Vec<f64>,
        derivs: Vec<EvalFn>,
        expansion: Vec<(f64, f64)>,
    ) -> Self {
        Self {
            eval,
            smoothness,
            base,
            domain,
            jet: jet.into(),
            derivs: derivs.into(),
            expansion: expansion.into(),
        }
    }

    /// Evaluates `f(x)` after checking `x` against the domain.
    pub fn evaluate(&self, x: f64) -> Result<f64, RlError> {
        if !x.is_finite() {
            return Err(RlError::NonFinite {
                what: "evaluation point",
                value: x,
            });
        }
        if x < self.domain.0 || x > self.domain.1 {
            return Err(RlError::OutOfDomain {
                x,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        (self.eval)(x)
    }

    /// Evaluates without the domain check (callers guarantee membership).
    pub(crate) fn eval_raw(&self, x: f64) -> Result<f64, RlError> {
        (self.eval)(x)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn base_point(&self) -> f64 {
        self.base
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn jet(&self) -> &[f64] {
        &self.jet
    }

    pub fn expansion(&self) -> &[(f64, f64)] {
        &self.expansion
    }

    /// Closed-form evaluator for the `order`-th derivative, if registered.
    pub fn derivative(&self, order: u32) -> Option<&EvalFn> {
        if order == 0 {
            return Some(&self.eval);
        }
        self.derivs.get(order as usize - 1)
    }

    pub fn derivative_count(&self) -> usize {
        self.derivs.len()
    }

    pub(crate) fn derivs(&self) -> &[EvalFn] {
        &self.derivs
    }

    pub(crate) fn eval_fn(&self) -> EvalFn {
        self.eval.clone()
    }

    /// A copy declared as class `C^k` with the jet truncated to match,
    /// for treating an analytic handle as a merely k-smooth input.
    pub fn with_finite_class(&self, k: u32) -> Result<Self, RlError> {
        let need = k as usize + 1;
        if self.jet.len() < need {
            return Err(RlError::MissingJet {
                need,
                have: self.jet.len(),
            });
        }
        let mut out = self.clone();
        out.smoothness = Smoothness::Finite(k);
        out.jet = self.jet[..need].to_vec().into();
        Ok(out)
    }
}

/// Builder running the handle invariants: domain ordering, jet length,
/// finite spot values, and a finite-difference cross-check of every
/// registered derivative evaluator.
pub struct FnHandleBuilder {
    eval: EvalFn,
    base: f64,
    domain: (f64, f64),
    smoothness: Smoothness,
    jet: Vec<f64>,
    derivs: Vec<EvalFn>,
    expansion: Option<Vec<(f64, f64)>>,
}

/// Deterministic interior sample fractions for spot checks.
const SPOT_FRACTIONS: [f64; 5] = [0.137, 0.311, 0.523, 0.737, 0.911];

impl FnHandleBuilder {
    fn new(eval: EvalFn, base: f64) -> Self {
        Self {
            eval,
            base,
            domain: (base, base + 1.0),
            smoothness: Smoothness::Finite(0),
            jet: Vec::new(),
            derivs: Vec::new(),
            expansion: None,
        }
    }

    pub fn domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }

    pub fn smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn jet(mut self, jet: Vec<f64>) -> Self {
        self.jet = jet;
        self
    }

    /// Registers the next derivative evaluator (first call registers f',
    /// second f'', and so on).
    pub fn push_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivs.push(Arc::new(move |x| Ok(d(x))));
        self
    }

    /// Overrides the jet-derived leading expansion (needed when the
    /// function has exact fractional-power content at the base point,
    /// e.g. t^1.5).
    pub fn expansion(mut self, terms: Vec<(f64, f64)>) -> Self {
        self.expansion = Some(terms);
        self
    }

    pub fn build(self) -> Result<FnHandle, RlError> {
        let (lo, hi) = self.domain;
        if !self.base.is_finite() || !lo.is_finite() || !hi.is_finite() {
            return Err(RlError::BadHandle("base point and domain must be finite"));
        }
        if !(lo <= self.base && self.base < hi) {
            return Err(RlError::BadHandle("domain must satisfy lo <= base < hi"));
        }
        match self.smoothness {
            Smoothness::Finite(k) => {
                if self.jet.len() != k as usize + 1 {
                    return Err(RlError::BadHandle("jet length must equal smoothness k + 1"));
                }
            }
            Smoothness::Analytic => {
                if self.jet.is_empty() {
                    return Err(RlError::BadHandle("analytic handle needs a nonempty jet"));
                }
            }
        }
        if self.jet.iter().any(|v| !v.is_finite()) {
            return Err(RlError::BadHandle("jet entries must be finite"));
        }

        // Default expansion: integer terms read off the jet,
        // coefficient of t^i is jet[i]/i!.
        let expansion = match self.expansion {
            Some(terms) => {
                let mut terms = terms;
                terms.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
                for w in terms.windows(2) {
                    if w[0].0 == w[1].0 {
                        return Err(RlError::BadHandle("expansion exponents must be distinct"));
                    }
                }
                if terms.iter().any(|(e, c)| !e.is_finite() || !c.is_finite()) {
                    return Err(RlError::BadHandle("expansion terms must be finite"));
                }
                terms
            }
            None => {
                let mut terms = Vec::new();
                let mut factorial = 1.0;
                for (i, &v) in self.jet.iter().enumerate() {
                    if i > 0 {
                        factorial *= i as f64;
                    }
                    if v != 0.0 {
                        terms.push((i as f64, v / factorial));
                    }
                }
                terms
            }
        };

        // Finite spot values of the evaluator across the domain.
        let mut spots: Vec<f64> = alloc::vec![lo, hi, self.base];
        for frac in SPOT_FRACTIONS {
            spots.push(lo + frac * (hi - lo));
        }
        for &x in &spots {
            let v = (self.eval)(x)?;
            if !v.is_finite() {
                return Err(RlError::BadHandle("evaluator produced a non-finite value"));
            }
        }

        // Cross-check each derivative evaluator against a central
        // difference of the previous one at the interior spot points.
        let h_cap = 0.05 * (hi - lo);
        for (j, d) in self.derivs.iter().enumerate() {
            let lower: &EvalFn = if j == 0 { &self.eval } else { &self.derivs[j - 1] };
            for frac in SPOT_FRACTIONS {
                let x = lo + frac * (hi - lo);
                let h = (libm::pow(f64::EPSILON, 1.0 / 3.0) * libm::fabs(x).max(1.0)).min(h_cap);
                let fd = (lower(x + 0.5 * h)? - lower(x - 0.5 * h)?) / h;
                let dv = d(x)?;
                if libm::fabs(fd - dv) > 1e-5 * libm::fabs(dv).max(1.0) {
                    return Err(RlError::DerivativeMismatch {
                        order: j as u32 + 1,
                        x,
                        expected: fd,
                        got: dv,
                    });
                }
            }
        }

        Ok(FnHandle {
            eval: self.eval,
            smoothness: self.smoothness,
            base: self.base,
            domain: self.domain,
            jet: self.jet.into(),
            derivs: self.derivs.into(),
            expansion: expansion.into(),
        })
    }
}

/// FD fallback wrapper used when a derivative evaluator is needed but
/// not registered.
pub(crate) fn fd_derivative_fn(handle: &FnHandle, order: u32) -> EvalFn {
    let eval = handle.eval_fn();
    let domain = handle.domain;
    Arc::new(move |x| fd::richardson_central(&eval, order, x, domain))
}
