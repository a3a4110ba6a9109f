//! The pair space: functions split into a jet-free remainder and a
//! coefficient sequence, with a derivative that acts componentwise.
//!
//! `decompose` sends `f` to `(f_a, sigma)`: `sigma` carries the Taylor
//! data of `f` at the base point, `f_a = f - (Taylor polynomial of
//! degree k-1)` is the Taylor remainder, whose leading jet entries
//! vanish. The pair derivative applies the numerical differintegral to
//! `f_a` and an exact exponent shift to `sigma`; because the shift side
//! commutes trivially and the remainder side satisfies the integral
//! semigroup, the composite operator commutes with itself where the
//! plain differintegral does not.
//!
//! The remainder is always the degree-(k-1) Taylor remainder. The
//! truncation choice [`TaylorOrder`] only controls how much jet data
//! `sigma` carries: with `K` the sequence holds one extra term and
//! reconstruction overshoots by exactly that term, which the
//! verification reports measure.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::rlnum::{
    map_expansion, rl_derivative, taylor_poly, EvalFn, FnHandle, QuadSpec, RlError, Smoothness,
};
use crate::sigma::{ShiftConvention, SigmaSeq};

/// Taylor truncation convention for the sequence component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaylorOrder {
    /// Truncate at k-1: reconstruction is exact (the default).
    KMinus1,
    /// Truncate at k: one extra term, reconstruction overshoots by it.
    K,
}

impl TaylorOrder {
    pub fn resolve(&self, k: u32) -> u32 {
        match self {
            TaylorOrder::KMinus1 => k - 1,
            TaylorOrder::K => k,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TaylorOrder::KMinus1 => "kminus1",
            TaylorOrder::K => "k",
        }
    }
}

/// Series truncation degree for decomposing analytic handles.
pub const DEFAULT_SERIES_DEGREE: u32 = 16;

/// How many derivative evaluators a derived remainder registers.
const MAX_DERIVED_DERIVS: usize = 8;

/// Longest jet a derived remainder reconstructs from its expansion.
const MAX_DERIVED_JET: usize = 24;

/// An element of the pair space: remainder handle + coefficient sequence.
///
/// `class` is the smoothness of the originating function; `applied` the
/// running total of derivative orders applied so far. Admissibility of
/// a further order `p` is `applied + p < k + 1` against the original
/// class, which is what makes chained applications track the
/// `p, q, p+q < k+1` hypothesis.
#[derive(Debug, Clone)]
pub struct DiffPair {
    fa: FnHandle,
    sigma: SigmaSeq,
    class: Smoothness,
    applied: f64,
}

impl DiffPair {
    pub fn remainder(&self) -> &FnHandle {
        &self.fa
    }

    pub fn sigma(&self) -> &SigmaSeq {
        &self.sigma
    }

    pub fn class(&self) -> Smoothness {
        self.class
    }

    pub fn applied_order(&self) -> f64 {
        self.applied
    }

    pub fn base_point(&self) -> f64 {
        self.fa.base_point()
    }
}

/// Exact factorial sequence shared by the polynomial helpers.
fn factorial(n: usize) -> f64 {
    let mut acc = 1.0;
    for i in 2..=n {
        acc *= i as f64;
    }
    acc
}

/// d^order/dx^order of the polynomial `sum c_i / i! (x-a)^i` described
/// by a sequence with nonnegative integer support.
fn sigma_poly_derivative(sigma: &SigmaSeq, order: u32, x: f64) -> f64 {
    let a = sigma.base_point();
    let mut acc = 0.0;
    for (e, c) in sigma.terms() {
        let i = e as i64;
        if i as f64 != e || i < i64::from(order) {
            continue;
        }
        let shift = (i - i64::from(order)) as usize;
        acc += c / factorial(shift) * libm::pow(x - a, shift as f64);
    }
    acc
}

/// Splits `f` into its pair-space element.
///
/// Requires smoothness k >= 1, or an analytic handle (which decomposes
/// to a zero remainder and its truncated series, degree
/// [`DEFAULT_SERIES_DEGREE`]).
pub fn decompose(f: &FnHandle, order: TaylorOrder, spec: &QuadSpec) -> Result<DiffPair, RlError> {
    decompose_with_degree(f, order, DEFAULT_SERIES_DEGREE, spec)
}

/// [`decompose`] with an explicit series truncation degree for analytic
/// handles.
pub fn decompose_with_degree(
    f: &FnHandle,
    order: TaylorOrder,
    series_degree: u32,
    spec: &QuadSpec,
) -> Result<DiffPair, RlError> {
    spec.validate()?;
    if f.domain().1 <= f.base_point() {
        return Err(RlError::BadHandle("domain has empty interior above the base point"));
    }
    match f.smoothness() {
        Smoothness::Analytic => {
            let degree = series_degree.min(f.jet().len() as u32 - 1);
            let sigma = taylor_poly(f, degree)?;
            let zero: EvalFn = Arc::new(|_| Ok(0.0));
            let zero_derivs: Vec<EvalFn> = (0..6).map(|_| -> EvalFn { Arc::new(|_| Ok(0.0)) }).collect();
            let fa = FnHandle::from_parts(
                zero,
                Smoothness::Analytic,
                f.base_point(),
                f.domain(),
                vec![0.0; f.jet().len()],
                zero_derivs,
                Vec::new(),
            );
            Ok(DiffPair {
                fa,
                sigma,
                class: Smoothness::Analytic,
                applied: 0.0,
            })
        }
        Smoothness::Finite(0) => Err(RlError::BadHandle(
            "decomposition requires smoothness k >= 1 (or an analytic handle)",
        )),
        Smoothness::Finite(k) => {
            let sigma = taylor_poly(f, order.resolve(k))?;
            // The remainder is always f minus the degree-(k-1) Taylor
            // polynomial: that is the function whose leading jet
            // vanishes and which the k-fold integral of f^(k) recovers.
            let rem = taylor_poly(f, k - 1)?;

            let f_eval = f.eval_fn();
            let rem_eval = rem.clone();
            let eval: EvalFn = Arc::new(move |x| Ok(f_eval(x)? - rem_eval.eval(x)?));

            let mut jet = vec![0.0; k as usize + 1];
            jet[k as usize] = f.jet()[k as usize];

            let mut derivs: Vec<EvalFn> = Vec::with_capacity(f.derivative_count());
            for j in 1..=f.derivative_count() as u32 {
                let d = f.derivative(j).cloned().expect("registered derivative");
                let rem_j = rem.clone();
                derivs.push(Arc::new(move |x| {
                    Ok(d(x)? - sigma_poly_derivative(&rem_j, j, x))
                }));
            }

            // Leading expansion of the remainder: the handle's expansion
            // with the subtracted polynomial terms cancelled. The
            // coefficient arithmetic mirrors the jet-derived expansion
            // exactly, so the cancellation is bitwise.
            let mut expansion: Vec<(f64, f64)> = f.expansion().to_vec();
            for (e, c) in rem.terms() {
                let coeff = c / factorial(e as usize);
                match expansion.iter_mut().find(|(ee, _)| *ee == e) {
                    Some(term) => term.1 -= coeff,
                    None => expansion.push((e, -coeff)),
                }
            }
            expansion.retain(|&(_, c)| c != 0.0);
            expansion.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            let fa = FnHandle::from_parts(
                eval,
                Smoothness::Finite(k),
                f.base_point(),
                f.domain(),
                jet,
                derivs,
                expansion,
            );
            Ok(DiffPair {
                fa,
                sigma,
                class: Smoothness::Finite(k),
                applied: 0.0,
            })
        }
    }
}

/// Rebuilds an evaluatable function from a pair: `f_a + (sequence
/// series)`. Exact whenever the pair came from `decompose` with the
/// `KMinus1` convention.
pub fn reconstruct(pair: &DiffPair) -> FnHandle {
    let fa = pair.fa.clone();
    let sigma = pair.sigma.clone();
    let fa_eval = fa.eval_fn();
    let eval: EvalFn = Arc::new(move |x| Ok(fa_eval(x)? + sigma.eval(x)?));

    // Jet metadata combines additively when the sequence still has
    // plain nonnegative-integer support; after fractional shifts the
    // reconstruction is evaluation-only.
    let mut jet = fa.jet().to_vec();
    let mut integer_supported = true;
    for (e, c) in pair.sigma.terms() {
        let i = e as i64;
        if i as f64 == e && i >= 0 && (i as usize) < jet.len() {
            jet[i as usize] += c;
        } else {
            integer_supported = false;
            break;
        }
    }
    if !integer_supported {
        jet = Vec::new();
    }

    FnHandle::from_parts(
        eval,
        fa.smoothness(),
        fa.base_point(),
        fa.domain(),
        jet,
        Vec::new(),
        Vec::new(),
    )
}

/// Integer jet entries of `D^order f_a` recovered from the remainder's
/// leading expansion (exact where determined, absent where the shifted
/// expansion turns fractional or unbounded).
fn derived_jet(inner: &FnHandle, order: f64) -> Vec<f64> {
    let jet = inner.jet();
    if libm::floor(order) == order {
        let n = order as i64;
        if n >= 0 {
            let n = n as usize;
            return if n >= jet.len() {
                Vec::new()
            } else {
                jet[n..].to_vec()
            };
        }
        let mut out = vec![0.0; (-n) as usize];
        out.extend_from_slice(jet);
        return out;
    }

    if inner.expansion().is_empty() {
        // No expansion data; trust the vanishing order visible in the jet.
        let s = jet.iter().position(|&v| v != 0.0).unwrap_or(jet.len()) as f64;
        let len = libm::ceil(s - order).max(0.0) as usize;
        return vec![0.0; len.min(MAX_DERIVED_JET)];
    }

    let mapped = map_expansion(inner.expansion(), order);
    let known_up_to = inner
        .expansion()
        .last()
        .map(|&(e, _)| e - order)
        .unwrap_or(0.0);
    if mapped.iter().any(|&(e, _)| e < -1e-9) {
        // Unbounded at the base point: no classical jet exists.
        return Vec::new();
    }
    let mut limit = libm::floor(known_up_to) + 1.0;
    for &(e, _) in &mapped {
        if libm::fabs(e - libm::round(e)) > 1e-9 {
            limit = limit.min(libm::ceil(e));
        }
    }
    let len = (limit.max(0.0) as usize).min(MAX_DERIVED_JET);
    let mut out = vec![0.0; len];
    for &(e, c) in &mapped {
        let r = libm::round(e);
        if libm::fabs(e - r) <= 1e-9 && r >= 0.0 && (r as usize) < len {
            out[r as usize] += c * factorial(r as usize);
        }
    }
    out
}

/// Applies the pair derivative of real `order` under the default
/// (identity-satisfying) shift convention.
pub fn pair_derivative(pair: &DiffPair, order: f64, spec: &QuadSpec) -> Result<DiffPair, RlError> {
    pair_derivative_with(pair, order, spec, ShiftConvention::Identity)
}

/// Pair derivative with an explicit shift convention: the remainder gets
/// the numerical differintegral, the sequence the exact shift. The
/// running order total is tracked for the chained admissibility bound.
pub fn pair_derivative_with(
    pair: &DiffPair,
    order: f64,
    spec: &QuadSpec,
    convention: ShiftConvention,
) -> Result<DiffPair, RlError> {
    spec.validate()?;
    if !order.is_finite() {
        return Err(RlError::NonFinite {
            what: "derivative order",
            value: order,
        });
    }
    if let Smoothness::Finite(k) = pair.class {
        let limit = f64::from(k) + 1.0 - pair.applied;
        if order >= limit {
            return Err(RlError::Inadmissible { order, limit });
        }
    }
    if order == 0.0 {
        return Ok(pair.clone());
    }

    let inner = pair.fa.clone();
    // The derived evaluator runs at the caller's tolerance; only the
    // closures that end up as integrands of a further derivative are
    // tightened, keeping nested noise below the outer convergence test.
    let espec = *spec;
    let ispec = spec.tightened();
    let applied = pair.applied + order;

    let jet = derived_jet(&inner, order);
    let expansion = map_expansion(inner.expansion(), order);

    // Derivatives of the derived remainder: d^j/dx^j D^order = D^(order+j),
    // taken from the original handle's evaluators for integer shifts and
    // from the differintegral otherwise.
    let deriv_count = match pair.class {
        Smoothness::Finite(k) => {
            let remaining = f64::from(k) + 1.0 - applied;
            (libm::ceil(remaining).max(0.0) as usize).min(MAX_DERIVED_DERIVS)
        }
        Smoothness::Analytic => 6,
    };
    let mut derivs: Vec<EvalFn> = Vec::with_capacity(deriv_count);
    for j in 1..=deriv_count as u32 {
        let total = order + f64::from(j);
        if order > 0.0 && libm::floor(order) == order {
            if let Some(d) = inner.derivative(order as u32 + j) {
                derivs.push(d.clone());
                continue;
            }
        }
        let captured = inner.clone();
        derivs.push(Arc::new(move |x| rl_derivative(&captured, total, x, &ispec)));
    }

    let eval_inner = inner.clone();
    let jet0 = jet.first().copied();
    let eval: EvalFn = Arc::new(move |x| {
        if order > 0.0 && x == eval_inner.base_point() {
            return jet0.ok_or(RlError::MissingJet { need: 1, have: 0 });
        }
        rl_derivative(&eval_inner, order, x, &espec)
    });

    let smoothness = match pair.class {
        Smoothness::Finite(k) => {
            Smoothness::Finite(libm::ceil(f64::from(k) - applied).max(0.0) as u32)
        }
        Smoothness::Analytic => Smoothness::Analytic,
    };
    let fa = FnHandle::from_parts(
        eval,
        smoothness,
        inner.base_point(),
        (inner.base_point(), inner.domain().1),
        jet,
        derivs,
        expansion,
    );
    Ok(DiffPair {
        fa,
        sigma: pair.sigma.shifted_with(order, convention),
        class: pair.class,
        applied,
    })
}

fn min_smoothness(a: Smoothness, b: Smoothness) -> Smoothness {
    match (a, b) {
        (Smoothness::Analytic, s) | (s, Smoothness::Analytic) => s,
        (Smoothness::Finite(x), Smoothness::Finite(y)) => Smoothness::Finite(x.min(y)),
    }
}

/// Componentwise sum of two pairs with the same base point.
pub fn pair_add(left: &DiffPair, right: &DiffPair) -> Result<DiffPair, RlError> {
    if left.base_point() != right.base_point() {
        return Err(RlError::BaseMismatch {
            left: left.base_point(),
            right: right.base_point(),
        });
    }
    let lo = left.fa.domain().0.max(right.fa.domain().0);
    let hi = left.fa.domain().1.min(right.fa.domain().1);
    if !(lo <= left.base_point() && left.base_point() < hi) {
        return Err(RlError::BadHandle("summand domains do not overlap around the base point"));
    }

    let le = left.fa.eval_fn();
    let re = right.fa.eval_fn();
    let eval: EvalFn = Arc::new(move |x| Ok(le(x)? + re(x)?));

    let jet: Vec<f64> = left
        .fa
        .jet()
        .iter()
        .zip(right.fa.jet().iter())
        .map(|(a, b)| a + b)
        .collect();

    let n_derivs = left.fa.derivative_count().min(right.fa.derivative_count());
    let mut derivs: Vec<EvalFn> = Vec::with_capacity(n_derivs);
    for j in 0..n_derivs {
        let ld = left.fa.derivs()[j].clone();
        let rd = right.fa.derivs()[j].clone();
        derivs.push(Arc::new(move |x| Ok(ld(x)? + rd(x)?)));
    }

    // Merged expansion, truncated to where both sides are complete.
    let expansion = {
        let (lx, rx) = (left.fa.expansion(), right.fa.expansion());
        if lx.is_empty() || rx.is_empty() {
            Vec::new()
        } else {
            let cut = lx.last().unwrap().0.min(rx.last().unwrap().0);
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for &(e, c) in lx.iter().chain(rx.iter()) {
                if e > cut {
                    continue;
                }
                match merged.iter_mut().find(|(ee, _)| *ee == e) {
                    Some(t) => t.1 += c,
                    None => merged.push((e, c)),
                }
            }
            merged.retain(|&(_, c)| c != 0.0);
            merged.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            merged
        }
    };

    let fa = FnHandle::from_parts(
        eval,
        min_smoothness(left.fa.smoothness(), right.fa.smoothness()),
        left.base_point(),
        (lo, hi),
        jet,
        derivs,
        expansion,
    );
    Ok(DiffPair {
        fa,
        sigma: left.sigma.add(&right.sigma)?,
        class: min_smoothness(left.class, right.class),
        applied: left.applied.max(right.applied),
    })
}

/// Componentwise scalar multiple.
pub fn pair_scale(scalar: f64, pair: &DiffPair) -> Result<DiffPair, RlError> {
    if !scalar.is_finite() {
        return Err(RlError::NonFinite {
            what: "scalar",
            value: scalar,
        });
    }
    let inner = pair.fa.eval_fn();
    let eval: EvalFn = Arc::new(move |x| Ok(scalar * inner(x)?));
    let jet: Vec<f64> = pair.fa.jet().iter().map(|v| scalar * v).collect();
    let mut derivs: Vec<EvalFn> = Vec::with_capacity(pair.fa.derivative_count());
    for d in pair.fa.derivs() {
        let d = d.clone();
        derivs.push(Arc::new(move |x| Ok(scalar * d(x)?)));
    }
    let mut expansion: Vec<(f64, f64)> = pair
        .fa
        .expansion()
        .iter()
        .map(|&(e, c)| (e, scalar * c))
        .collect();
    expansion.retain(|&(_, c)| c != 0.0);

    let fa = FnHandle::from_parts(
        eval,
        pair.fa.smoothness(),
        pair.fa.base_point(),
        pair.fa.domain(),
        jet,
        derivs,
        expansion,
    );
    Ok(DiffPair {
        fa,
        sigma: pair.sigma.scaled(scalar)?,
        class: pair.class,
        applied: pair.applied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    fn abs1() -> FnHandle {
        FnHandle::builder(|x: f64| x * libm::fabs(x), 0.0)
            .domain(-1.0, 2.0)
            .smoothness(Smoothness::Finite(1))
            .jet(vec![0.0, 0.0])
            .expansion(vec![(2.0, 1.0)])
            .push_derivative(|x| 2.0 * libm::fabs(x))
            .push_derivative(|x: f64| 2.0 * libm::copysign(1.0, x))
            .build()
            .unwrap()
    }

    fn mix1() -> FnHandle {
        FnHandle::builder(|x: f64| 1.0 + x + x * libm::fabs(x), 0.0)
            .domain(-1.0, 2.0)
            .smoothness(Smoothness::Finite(1))
            .jet(vec![1.0, 1.0])
            .expansion(vec![(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)])
            .push_derivative(|x| 1.0 + 2.0 * libm::fabs(x))
            .push_derivative(|x: f64| 2.0 * libm::copysign(1.0, x))
            .build()
            .unwrap()
    }

    fn zero_fn() -> FnHandle {
        FnHandle::builder(|_| 0.0, 0.0)
            .domain(-1.0, 2.0)
            .smoothness(Smoothness::Finite(2))
            .jet(vec![0.0, 0.0, 0.0])
            .push_derivative(|_| 0.0)
            .push_derivative(|_| 0.0)
            .build()
            .unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        let step = (hi - lo) / (n - 1) as f64;
        (0..n).map(move |i| lo + step * i as f64)
    }

    #[test]
    fn decompose_zero_function() {
        let pair = decompose(&zero_fn(), TaylorOrder::KMinus1, &spec()).unwrap();
        assert!(pair.sigma().is_empty());
        for x in grid(-1.0, 2.0, 21) {
            assert_eq!(pair.remainder().evaluate(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn decompose_moves_taylor_data_into_sigma() {
        // f = x|x|: empty jet data, remainder is f itself.
        let pair = decompose(&abs1(), TaylorOrder::KMinus1, &spec()).unwrap();
        assert!(pair.sigma().is_empty());
        for x in grid(-1.0, 2.0, 13) {
            let fa = pair.remainder().evaluate(x).unwrap();
            assert!((fa - x * libm::fabs(x)).abs() < 1e-15);
        }

        // f = 1 + x + x|x|: constant term goes to sigma, fa = x + x|x|.
        let pair = decompose(&mix1(), TaylorOrder::KMinus1, &spec()).unwrap();
        let terms: Vec<_> = pair.sigma().terms().collect();
        assert_eq!(terms, [(0.0, 1.0)]);
        for x in grid(-1.0, 2.0, 13) {
            let fa = pair.remainder().evaluate(x).unwrap();
            assert!((fa - (x + x * libm::fabs(x))).abs() < 1e-12);
        }
        // Leading jet entries of the remainder vanish.
        assert_eq!(pair.remainder().jet()[0], 0.0);
    }

    #[test]
    fn decompose_requires_smoothness() {
        let rough = FnHandle::builder(|x: f64| libm::sqrt(libm::fabs(x)), 0.0)
            .domain(0.0, 2.0)
            .smoothness(Smoothness::Finite(0))
            .jet(vec![0.0])
            .build()
            .unwrap();
        assert!(matches!(
            decompose(&rough, TaylorOrder::KMinus1, &spec()),
            Err(RlError::BadHandle(_))
        ));
    }

    #[test]
    fn reconstruct_round_trip() {
        for f in [abs1(), mix1()] {
            let pair = decompose(&f, TaylorOrder::KMinus1, &spec()).unwrap();
            let rec = reconstruct(&pair);
            for x in grid(-1.0, 2.0, 101) {
                let err = (rec.evaluate(x).unwrap() - f.evaluate(x).unwrap()).abs();
                assert!(err <= 1e-9, "round-trip error {err} at x = {x}");
            }
        }
    }

    #[test]
    fn reconstruct_with_literal_k_overshoots_by_top_term() {
        let f = mix1();
        let pair = decompose(&f, TaylorOrder::K, &spec()).unwrap();
        let rec = reconstruct(&pair);
        for x in grid(-1.0, 2.0, 41) {
            let overshoot = rec.evaluate(x).unwrap() - f.evaluate(x).unwrap();
            // Overshoot is exactly the k-th Taylor term f'(0) x = x.
            assert!((overshoot - x).abs() < 1e-12, "x = {x}: overshoot {overshoot}");
        }
    }

    #[test]
    fn annihilated_sequence_terms_do_not_change_reconstruction() {
        let pair = decompose(&abs1(), TaylorOrder::KMinus1, &spec()).unwrap();
        let with_ghost = DiffPair {
            fa: pair.fa.clone(),
            sigma: SigmaSeq::new(0.0, [(-1.0, 1.0)]).unwrap(),
            class: pair.class,
            applied: 0.0,
        };
        let rec = reconstruct(&with_ghost);
        for x in grid(0.1, 2.0, 11) {
            let expected = x * libm::fabs(x);
            assert!((rec.evaluate(x).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_derivative_zero_order_is_identity() {
        let pair = decompose(&mix1(), TaylorOrder::KMinus1, &spec()).unwrap();
        let same = pair_derivative(&pair, 0.0, &spec()).unwrap();
        assert_eq!(same.sigma(), pair.sigma());
        for x in grid(0.1, 2.0, 7) {
            assert_eq!(
                same.remainder().evaluate(x).unwrap(),
                pair.remainder().evaluate(x).unwrap()
            );
        }
    }

    #[test]
    fn pair_derivative_classical_case() {
        // D^1 (1 + x|x|) at x = 2: fa side gives 2|x| = 4, sigma side
        // shifts the constant to an annihilated exponent.
        let f = FnHandle::builder(|x: f64| 1.0 + x * libm::fabs(x), 0.0)
            .domain(-1.0, 3.0)
            .smoothness(Smoothness::Finite(1))
            .jet(vec![1.0, 0.0])
            .expansion(vec![(0.0, 1.0), (2.0, 1.0)])
            .push_derivative(|x| 2.0 * libm::fabs(x))
            .push_derivative(|x: f64| 2.0 * libm::copysign(1.0, x))
            .build()
            .unwrap();
        let pair = decompose(&f, TaylorOrder::KMinus1, &spec()).unwrap();
        let d = pair_derivative(&pair, 1.0, &spec()).unwrap();
        let sigma_terms: Vec<_> = d.sigma().terms().collect();
        assert_eq!(sigma_terms, [(-1.0, 1.0)]);
        let rec = reconstruct(&d);
        assert!((rec.evaluate(2.0).unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn half_order_twice_matches_full_derivative() {
        let pair = decompose(&abs1(), TaylorOrder::KMinus1, &spec()).unwrap();
        let once = pair_derivative(&pair, 0.5, &spec()).unwrap();
        let twice = pair_derivative(&once, 0.5, &spec()).unwrap();
        let rec = reconstruct(&twice);
        // D^1 (x|x|) = 2|x|.
        let got = rec.evaluate(1.0).unwrap();
        assert!((got - 2.0).abs() < 1e-6, "got {got}");
    }

    #[test]
    fn chained_admissibility_is_tracked() {
        let pair = decompose(&abs1(), TaylorOrder::KMinus1, &spec()).unwrap();
        // k = 1: single order must stay below 2.
        assert!(matches!(
            pair_derivative(&pair, 2.0, &spec()),
            Err(RlError::Inadmissible { .. })
        ));
        // 1.5 is fine once, but the running total then blocks 0.6.
        let d = pair_derivative(&pair, 1.5, &spec()).unwrap();
        assert!(matches!(
            pair_derivative(&d, 0.6, &spec()),
            Err(RlError::Inadmissible { .. })
        ));
        assert!(pair_derivative(&d, 0.4, &spec()).is_ok());
    }

    #[test]
    fn derived_jet_tracks_expansion() {
        let pow15 = FnHandle::builder(|x: f64| libm::pow(x, 1.5), 0.0)
            .domain(0.0, 3.0)
            .smoothness(Smoothness::Finite(1))
            .jet(vec![0.0, 0.0])
            .expansion(vec![(1.5, 1.0)])
            .push_derivative(|x: f64| 1.5 * libm::sqrt(x))
            .build()
            .unwrap();
        // D^0.5 t^1.5 = Gamma(2.5) t: jet [0, Gamma(2.5)].
        let pair = decompose(&pow15, TaylorOrder::KMinus1, &spec()).unwrap();
        let d = pair_derivative(&pair, 0.5, &spec()).unwrap();
        let jet = d.remainder().jet().to_vec();
        assert_eq!(jet.len(), 2);
        assert_eq!(jet[0], 0.0);
        assert!((jet[1] - 1.329_340_388_179_137).abs() < 1e-12);

        // D^1.3 of t + t^2 behaves like t^(-0.3): unbounded, no jet.
        let pair = decompose(&mix1(), TaylorOrder::KMinus1, &spec()).unwrap();
        let d = pair_derivative(&pair, 1.3, &spec()).unwrap();
        assert!(d.remainder().jet().is_empty());
    }

    #[test]
    fn vector_space_operations() {
        let p = decompose(&mix1(), TaylorOrder::KMinus1, &spec()).unwrap();
        let q = decompose(&abs1(), TaylorOrder::KMinus1, &spec()).unwrap();

        // p + (-1) p is the zero pair.
        let neg = pair_scale(-1.0, &p).unwrap();
        let z = pair_add(&p, &neg).unwrap();
        assert!(z.sigma().is_empty());
        for x in grid(-1.0, 2.0, 21) {
            assert!(z.remainder().evaluate(x).unwrap().abs() <= 1e-12);
        }

        // Scaling by 1 changes nothing.
        let same = pair_scale(1.0, &p).unwrap();
        assert_eq!(same.sigma(), p.sigma());

        // Sum reconstructs to the sum of the functions.
        let sum = pair_add(&p, &q).unwrap();
        let rec = reconstruct(&sum);
        let f = mix1();
        let g = abs1();
        for x in grid(-1.0, 2.0, 101) {
            let expected = f.evaluate(x).unwrap() + g.evaluate(x).unwrap();
            assert!((rec.evaluate(x).unwrap() - expected).abs() <= 1e-9);
        }
    }

    #[test]
    fn pair_add_requires_matching_base() {
        let p = decompose(&mix1(), TaylorOrder::KMinus1, &spec()).unwrap();
        let other = FnHandle::builder(|x: f64| (x - 1.0) * libm::fabs(x - 1.0), 1.0)
            .domain(0.0, 3.0)
            .smoothness(Smoothness::Finite(1))
            .jet(vec![0.0, 0.0])
            .push_derivative(|x: f64| 2.0 * libm::fabs(x - 1.0))
            .build()
            .unwrap();
        let q = decompose(&other, TaylorOrder::KMinus1, &spec()).unwrap();
        assert!(matches!(pair_add(&p, &q), Err(RlError::BaseMismatch { .. })));
    }
}
