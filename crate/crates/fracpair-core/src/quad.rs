//! Gauss-Jacobi quadrature on [0, 1] with weight (1-u)^alpha.
//!
//! Nodes and weights come from the Golub-Welsch algorithm: eigenvalues of
//! the symmetric tridiagonal Jacobi matrix give the nodes, squared first
//! eigenvector components scaled by the zeroth moment give the weights.
//! The tridiagonal eigenproblem is solved with implicit-shift QL,
//! accumulating only the first row of the rotations.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use spin::Mutex;

/// Errors from quadrature-rule construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadError {
    /// Weight exponent must satisfy alpha > -1 for integrability.
    BadAlpha { alpha: f64 },
    /// At least one node is required.
    NoNodes,
    /// The QL iteration failed to converge (should not happen for
    /// well-formed Jacobi matrices).
    EigenFailure,
}

impl fmt::Display for QuadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadError::BadAlpha { alpha } => {
                write!(f, "weight exponent alpha = {alpha} must be finite and > -1")
            }
            QuadError::NoNodes => write!(f, "quadrature rule needs at least one node"),
            QuadError::EigenFailure => write!(f, "tridiagonal QL iteration did not converge"),
        }
    }
}

impl core::error::Error for QuadError {}

/// Implicit-shift QL on a symmetric tridiagonal matrix, tracking only the
/// first component of each eigenvector in `z`.
///
/// `d` holds the diagonal, `e` the subdiagonal in `e[0..n-1]` (`e[n-1]`
/// is scratch). On success `d` contains the eigenvalues (unsorted) and
/// `z[k]` the first component of the k-th eigenvector.
fn tridiag_ql_first_components(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<(), QuadError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(QuadError::EigenFailure);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflowed {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// A Gauss-Jacobi rule for integrals of the form
/// `int_0^1 (1-u)^alpha g(u) du` with `alpha > -1`.
///
/// The weight factor is built into the rule; `g` is sampled at interior
/// nodes only, so integrands may be singular at both endpoints as long
/// as the product is integrable.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl JacobiRule {
    /// Builds an `n`-node rule for the weight `(1-u)^alpha` on [0, 1].
    pub fn new(n: usize, alpha: f64) -> Result<Self, QuadError> {
        if n == 0 {
            return Err(QuadError::NoNodes);
        }
        if !alpha.is_finite() || alpha <= -1.0 {
            return Err(QuadError::BadAlpha { alpha });
        }

        // Jacobi-matrix recurrence coefficients for weight (1-v)^alpha
        // on [-1, 1] (beta = 0).
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        let mut z = vec![0.0; n];
        z[0] = 1.0;
        d[0] = -alpha / (2.0 + alpha);
        for i in 0..n - 1 {
            let i1 = (i + 1) as f64;
            let denom = 2.0 * i1 + alpha;
            e[i] = 2.0 * i1 * (i1 + alpha) / (denom * libm::sqrt((denom + 1.0) * (denom - 1.0)));
            d[i + 1] = -(alpha * alpha) / (denom * (denom + 2.0));
        }

        tridiag_ql_first_components(&mut d, &mut e, &mut z)?;

        // Zeroth moment on [-1, 1]: int (1-v)^alpha dv = 2^(alpha+1)/(alpha+1).
        let mu0 = libm::pow(2.0, alpha + 1.0) / (alpha + 1.0);
        let mut pairs: Vec<(f64, f64)> = d
            .iter()
            .zip(z.iter())
            .map(|(&node, &z0)| (node, mu0 * z0 * z0))
            .collect();
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        // Map [-1, 1] to [0, 1]: u = (v+1)/2, weights pick up 2^-(alpha+1).
        let scale = libm::pow(2.0, -(alpha + 1.0));
        let nodes = pairs.iter().map(|&(v, _)| 0.5 * (v + 1.0)).collect();
        let weights = pairs.iter().map(|&(_, w)| w * scale).collect();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to `g`, short-circuiting on the first error.
    pub fn apply<E>(&self, mut g: impl FnMut(f64) -> Result<f64, E>) -> Result<f64, E> {
        let mut acc = 0.0;
        for (&u, &w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += w * g(u)?;
        }
        Ok(acc)
    }

    /// Applies the rule to an infallible integrand.
    pub fn apply_fn(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (&u, &w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += w * g(u);
        }
        acc
    }
}

/// Cached rules keyed by (alpha bits, node count). Rule construction is
/// O(n^2); nested quadratures request the same few rules thousands of
/// times, so sharing them dominates the total cost.
static RULE_CACHE: Mutex<Option<BTreeMap<(u64, usize), Arc<JacobiRule>>>> = Mutex::new(None);

/// Total nodes held in the cache before it is dropped wholesale.
const CACHE_NODE_BUDGET: usize = 1 << 21;

/// Returns a shared rule, building and caching it on a miss.
pub fn shared_rule(n: usize, alpha: f64) -> Result<Arc<JacobiRule>, QuadError> {
    let key = (alpha.to_bits(), n);
    if let Some(map) = RULE_CACHE.lock().as_ref() {
        if let Some(rule) = map.get(&key) {
            return Ok(rule.clone());
        }
    }
    // Build outside the lock; a racing duplicate build is harmless.
    let rule = Arc::new(JacobiRule::new(n, alpha)?);
    let mut guard = RULE_CACHE.lock();
    let map = guard.get_or_insert_with(BTreeMap::new);
    let held: usize = map.values().map(|r| r.len()).sum();
    if held + n > CACHE_NODE_BUDGET {
        map.clear();
    }
    map.insert(key, rule.clone());
    Ok(rule)
}
