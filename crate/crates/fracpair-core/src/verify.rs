//! Residual checks for every identity the pair construction claims:
//! reconstruction, the remainder identity, parallel action against the
//! plain differintegral, self-commutativity, and composition totality.
//!
//! Each check evaluates both sides on a grid and reports the max
//! absolute error against a pinned tolerance. Sequence components are
//! compared bit-for-bit, never by tolerance. Checks are pure and run in
//! declaration order, so identical inputs produce identical reports.

use alloc::string::String;
use alloc::vec::Vec;

use crate::catalog::CatalogEntry;
use crate::pairspace::{
    decompose, pair_derivative_with, reconstruct, TaylorOrder, DEFAULT_SERIES_DEGREE,
};
use crate::rlnum::{
    map_expansion, rl_derivative, rl_integral, taylor_poly, FnHandle, QuadSpec, RlError,
    Smoothness,
};
use crate::sigma::{ShiftConvention, SigmaSeq};

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Convention flags threaded through every check and recorded in the
/// report: the Taylor truncation used for the sequence and the shift
/// direction of the sequence derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convention {
    pub taylor: TaylorOrder,
    pub shift: ShiftConvention,
}

impl Default for Convention {
    fn default() -> Self {
        Self {
            taylor: TaylorOrder::KMinus1,
            shift: ShiftConvention::Identity,
        }
    }
}

/// Evaluation grid: `n` evenly spaced points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self, RlError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(RlError::BadSpec("grid endpoints must be finite"));
        }
        if n == 0 || (n > 1 && hi <= lo) || hi < lo {
            return Err(RlError::BadSpec("grid needs n >= 1 points and hi >= lo"));
        }
        Ok(Self { lo, hi, n })
    }

    /// Grid over (base, hi]: n points with the base point excluded, the
    /// first point one step above it.
    pub fn above(base: f64, hi: f64, n: usize) -> Result<Self, RlError> {
        let step = (hi - base) / n as f64;
        Self::new(base + step, hi, n)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let step = if self.n > 1 {
            (self.hi - self.lo) / (self.n - 1) as f64
        } else {
            0.0
        };
        (0..self.n).map(move |i| {
            if i + 1 == self.n {
                self.hi
            } else {
                self.lo + step * i as f64
            }
        })
    }
}

/// Result of one check on one function: the residual summary and the
/// convention flags it was computed under.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub check: &'static str,
    pub fn_id: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    /// Resolved sequence truncation degree (k-1 or k for finite classes,
    /// the series degree for analytic entries).
    pub taylor_order: u32,
    pub shift: ShiftConvention,
    pub grid: GridSpec,
    pub max_abs_error: f64,
    pub tol: f64,
    pub verdict: Verdict,
    /// Worst five grid points as (x, lhs, rhs), largest error first.
    pub worst: Vec<(f64, f64, f64)>,
    /// Commutativity checks: whether the two sequence components are
    /// bit-identical.
    pub sigma_exact: Option<bool>,
    /// Composition checks: max magnitude of the differintegral of the
    /// full Taylor polynomial, the term the derivation silently drops.
    /// Informational, never part of the verdict.
    pub dropped_term_max: Option<f64>,
}

/// Shared configuration for the checks.
#[derive(Debug, Clone, Copy)]
pub struct CheckContext {
    pub convention: Convention,
    pub spec: QuadSpec,
    /// Node count for oracle quadrature when no closed form exists.
    pub oracle_nodes: usize,
}

impl Default for CheckContext {
    fn default() -> Self {
        Self {
            convention: Convention::default(),
            spec: QuadSpec::default(),
            oracle_nodes: 512,
        }
    }
}

impl CheckContext {
    fn oracle_spec(&self) -> QuadSpec {
        QuadSpec {
            nodes: self.oracle_nodes,
            ..self.spec
        }
    }

    fn oracle_value(&self, entry: &CatalogEntry, p: f64, x: f64) -> Result<f64, RlError> {
        match &entry.closed_form {
            Some(cf) => cf(p, x),
            None => rl_derivative(&entry.handle, p, x, &self.oracle_spec()),
        }
    }

    fn resolved_taylor_order(&self, entry: &CatalogEntry) -> u32 {
        match entry.handle.smoothness() {
            Smoothness::Finite(k) => self.convention.taylor.resolve(k),
            Smoothness::Analytic => {
                DEFAULT_SERIES_DEGREE.min(entry.handle.jet().len() as u32 - 1)
            }
        }
    }
}

/// Default tolerances: algebra-only identities, the remainder identity
/// (one quadrature), and anything through the full quadrature path.
pub const TOL_ALGEBRAIC: f64 = 1e-9;
pub const TOL_REMAINDER: f64 = 1e-7;
pub const TOL_QUADRATURE: f64 = 1e-6;

/// Derivative orders the default suite exercises per entry (filtered by
/// admissibility).
pub const PARALLEL_ORDERS: [f64; 4] = [0.0, 0.5, 1.0, 1.5];

/// Order pairs for the commutativity and composition checks.
pub const ORDER_PAIRS: [(f64, f64); 3] = [(0.5, 0.5), (1.0, 0.5), (0.3, 0.7)];

/// Default grid size.
pub const GRID_POINTS: usize = 101;

fn assemble(
    check: &'static str,
    entry: &CatalogEntry,
    p: Option<f64>,
    q: Option<f64>,
    ctx: &CheckContext,
    grid: GridSpec,
    tol: f64,
    samples: Vec<(f64, f64, f64)>,
) -> CheckReport {
    let mut max_abs_error = 0.0_f64;
    for &(_, lhs, rhs) in &samples {
        max_abs_error = max_abs_error.max(libm::fabs(lhs - rhs));
    }
    let mut ranked = samples;
    ranked.sort_by(|a, b| {
        let ea = libm::fabs(a.1 - a.2);
        let eb = libm::fabs(b.1 - b.2);
        eb.total_cmp(&ea).then(a.0.total_cmp(&b.0))
    });
    ranked.truncate(5);
    let verdict = if max_abs_error <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    CheckReport {
        check,
        fn_id: entry.id.clone(),
        p,
        q,
        taylor_order: ctx.resolved_taylor_order(entry),
        shift: ctx.convention.shift,
        grid,
        max_abs_error,
        tol,
        verdict,
        worst: ranked,
        sigma_exact: None,
        dropped_term_max: None,
    }
}

/// Grid spanning the whole domain (used for reconstruction, where both
/// sides are plain evaluations).
fn domain_grid(f: &FnHandle, n: usize) -> Result<GridSpec, RlError> {
    GridSpec::new(f.domain().0, f.domain().1, n)
}

/// Grid over (a, min(a+2, hi)]: operator comparisons exclude the base
/// point, where shifted exponents may be negative.
fn operator_grid(f: &FnHandle, n: usize) -> Result<GridSpec, RlError> {
    let a = f.base_point();
    GridSpec::above(a, f.domain().1.min(a + 2.0), n)
}

/// | reconstruct(decompose(f)) - f | over the grid.
pub fn check_reconstruction(
    entry: &CatalogEntry,
    ctx: &CheckContext,
    grid: Option<GridSpec>,
    tol: f64,
) -> Result<CheckReport, RlError> {
    let grid = match grid {
        Some(g) => g,
        None => domain_grid(&entry.handle, GRID_POINTS)?,
    };
    let pair = decompose_in(entry, ctx)?;
    let rec = reconstruct(&pair);
    let mut samples = Vec::with_capacity(grid.n);
    for x in grid.points() {
        samples.push((x, rec.evaluate(x)?, entry.handle.evaluate(x)?));
    }
    Ok(assemble("reconstruction", entry, None, None, ctx, grid, tol, samples))
}

fn decompose_in(entry: &CatalogEntry, ctx: &CheckContext) -> Result<crate::pairspace::DiffPair, RlError> {
    decompose(&entry.handle, ctx.convention.taylor, &ctx.spec)
}

/// | reconstruct(D^p decompose(f)) - oracle(p) | over the grid: the
/// pair derivative acts parallel to the plain differintegral.
pub fn check_parallel(
    entry: &CatalogEntry,
    p: f64,
    ctx: &CheckContext,
    grid: Option<GridSpec>,
    tol: f64,
) -> Result<CheckReport, RlError> {
    if !entry.handle.smoothness().admits(p) {
        return Err(RlError::Inadmissible {
            order: p,
            limit: entry.handle.smoothness().order_limit(),
        });
    }
    let grid = match grid {
        Some(g) => g,
        None => operator_grid(&entry.handle, GRID_POINTS)?,
    };
    let pair = decompose_in(entry, ctx)?;
    let d = pair_derivative_with(&pair, p, &ctx.spec, ctx.convention.shift)?;
    let rec = reconstruct(&d);
    let mut samples = Vec::with_capacity(grid.n);
    for x in grid.points() {
        samples.push((x, rec.evaluate(x)?, ctx.oracle_value(entry, p, x)?));
    }
    Ok(assemble("parallel", entry, Some(p), None, ctx, grid, tol, samples))
}

fn sigma_bits_equal(a: &SigmaSeq, b: &SigmaSeq) -> bool {
    a.len() == b.len()
        && a.terms()
            .zip(b.terms())
            .all(|((e1, c1), (e2, c2))| e1.to_bits() == e2.to_bits() && c1.to_bits() == c2.to_bits())
}

/// | reconstruct(D^q D^p P) - reconstruct(D^p D^q P) | over the grid,
/// plus exact equality of the two sequence components. The sequence
/// comparison is bitwise and failing it fails the check regardless of
/// the grid error.
pub fn check_commute(
    entry: &CatalogEntry,
    p: f64,
    q: f64,
    ctx: &CheckContext,
    grid: Option<GridSpec>,
    tol: f64,
) -> Result<CheckReport, RlError> {
    let grid = match grid {
        Some(g) => g,
        None => operator_grid(&entry.handle, GRID_POINTS)?,
    };
    let pair = decompose_in(entry, ctx)?;
    let shift = ctx.convention.shift;
    let pq = pair_derivative_with(
        &pair_derivative_with(&pair, p, &ctx.spec, shift)?,
        q,
        &ctx.spec,
        shift,
    )?;
    let qp = pair_derivative_with(
        &pair_derivative_with(&pair, q, &ctx.spec, shift)?,
        p,
        &ctx.spec,
        shift,
    )?;
    let sigma_exact = sigma_bits_equal(pq.sigma(), qp.sigma());
    let rec_pq = reconstruct(&pq);
    let rec_qp = reconstruct(&qp);
    let mut samples = Vec::with_capacity(grid.n);
    for x in grid.points() {
        samples.push((x, rec_pq.evaluate(x)?, rec_qp.evaluate(x)?));
    }
    let mut report = assemble("commute", entry, Some(p), Some(q), ctx, grid, tol, samples);
    report.sigma_exact = Some(sigma_exact);
    if !sigma_exact {
        report.verdict = Verdict::Fail;
    }
    Ok(report)
}

/// | reconstruct(D^q D^p decompose(f)) - oracle(p+q) | over the grid,
/// with the magnitude of the differintegrated full Taylor polynomial
/// reported alongside (the term the composition derivation drops).
pub fn check_composition(
    entry: &CatalogEntry,
    p: f64,
    q: f64,
    ctx: &CheckContext,
    grid: Option<GridSpec>,
    tol: f64,
) -> Result<CheckReport, RlError> {
    let grid = match grid {
        Some(g) => g,
        None => operator_grid(&entry.handle, GRID_POINTS)?,
    };
    let pair = decompose_in(entry, ctx)?;
    let shift = ctx.convention.shift;
    let d2 = pair_derivative_with(
        &pair_derivative_with(&pair, p, &ctx.spec, shift)?,
        q,
        &ctx.spec,
        shift,
    )?;
    let rec = reconstruct(&d2);
    let total = p + q;
    let mut samples = Vec::with_capacity(grid.n);
    for x in grid.points() {
        samples.push((x, rec.evaluate(x)?, ctx.oracle_value(entry, total, x)?));
    }

    // The dropped term: D^(p+q) of the full Taylor polynomial (degree k,
    // or the series degree for analytic entries).
    let full_order = match entry.handle.smoothness() {
        Smoothness::Finite(k) => k,
        Smoothness::Analytic => ctx.resolved_taylor_order(entry),
    };
    let shifted = taylor_poly(&entry.handle, full_order)?.shifted_with(total, shift);
    let mut dropped = 0.0_f64;
    for x in grid.points() {
        dropped = dropped.max(libm::fabs(shifted.eval(x)?));
    }

    let mut report = assemble("composition", entry, Some(p), Some(q), ctx, grid, tol, samples);
    report.dropped_term_max = Some(dropped);
    Ok(report)
}

/// | (f - T_{k-1} f) - I^k[f^(k)] | over the grid: the remainder used by
/// the decomposition equals the k-fold integral of the k-th derivative.
pub fn check_remainder(
    entry: &CatalogEntry,
    ctx: &CheckContext,
    grid: Option<GridSpec>,
    tol: f64,
) -> Result<CheckReport, RlError> {
    let f = &entry.handle;
    let k = match f.smoothness() {
        Smoothness::Finite(k) if k >= 1 => k,
        _ => {
            return Err(RlError::BadHandle(
                "the remainder identity needs finite smoothness k >= 1",
            ))
        }
    };
    let grid = match grid {
        Some(g) => g,
        None => operator_grid(f, GRID_POINTS)?,
    };
    let rem = taylor_poly(f, k - 1)?;
    let deriv_k = f
        .derivative(k)
        .cloned()
        .ok_or(RlError::MissingDerivative { order: k })?;
    let integrand = FnHandle::from_parts(
        deriv_k,
        Smoothness::Finite(0),
        f.base_point(),
        f.domain(),
        alloc::vec![0.0],
        Vec::new(),
        map_expansion(f.expansion(), f64::from(k)),
    );
    let mut samples = Vec::with_capacity(grid.n);
    for x in grid.points() {
        let lhs = f.evaluate(x)? - rem.eval(x)?;
        let rhs = rl_integral(&integrand, f64::from(k), x, &ctx.spec)?;
        samples.push((x, lhs, rhs));
    }
    Ok(assemble("remainder", entry, None, None, ctx, grid, tol, samples))
}

/// Which checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Reconstruction,
    Parallel,
    Commute,
    Composition,
    Remainder,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        CheckKind::Reconstruction,
        CheckKind::Parallel,
        CheckKind::Commute,
        CheckKind::Composition,
        CheckKind::Remainder,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Reconstruction => "reconstruction",
            CheckKind::Parallel => "parallel",
            CheckKind::Commute => "commute",
            CheckKind::Composition => "composition",
            CheckKind::Remainder => "remainder",
        }
    }
}

/// Options for a suite run. Explicit orders are errors when
/// inadmissible; the default order sets are silently filtered by class.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub context: CheckContext,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub grid: Option<GridSpec>,
    pub tol_override: Option<f64>,
    pub grid_points: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            context: CheckContext::default(),
            p: None,
            q: None,
            grid: None,
            tol_override: None,
            grid_points: GRID_POINTS,
        }
    }
}

fn decomposable(entry: &CatalogEntry) -> bool {
    match entry.handle.smoothness() {
        Smoothness::Finite(k) => k >= 1,
        Smoothness::Analytic => true,
    }
}

/// Runs the selected checks over the selected entries in declaration
/// order, skipping entries a check does not apply to (unless an explicit
/// order makes the request infeasible, which is an error).
pub fn run_checks(
    kinds: &[CheckKind],
    entries: &[CatalogEntry],
    opts: &SuiteOptions,
) -> Result<Vec<CheckReport>, RlError> {
    let ctx = &opts.context;
    let mut reports = Vec::new();
    for kind in kinds {
        for entry in entries {
            let tol = opts.tol_override.unwrap_or(match kind {
                CheckKind::Reconstruction => TOL_ALGEBRAIC,
                CheckKind::Remainder => TOL_REMAINDER,
                _ => TOL_QUADRATURE,
            });
            match kind {
                CheckKind::Reconstruction => {
                    if decomposable(entry) {
                        reports.push(check_reconstruction(entry, ctx, opts.grid, tol)?);
                    }
                }
                CheckKind::Parallel => {
                    if !decomposable(entry) {
                        continue;
                    }
                    match opts.p {
                        Some(p) => reports.push(check_parallel(entry, p, ctx, opts.grid, tol)?),
                        None => {
                            for p in PARALLEL_ORDERS {
                                if entry.handle.smoothness().admits(p) {
                                    reports.push(check_parallel(entry, p, ctx, opts.grid, tol)?);
                                }
                            }
                        }
                    }
                }
                CheckKind::Commute | CheckKind::Composition => {
                    if !decomposable(entry) {
                        continue;
                    }
                    let run = |p: f64, q: f64, reports: &mut Vec<CheckReport>| -> Result<(), RlError> {
                        let report = match kind {
                            CheckKind::Commute => check_commute(entry, p, q, ctx, opts.grid, tol)?,
                            _ => check_composition(entry, p, q, ctx, opts.grid, tol)?,
                        };
                        reports.push(report);
                        Ok(())
                    };
                    match (opts.p, opts.q) {
                        (Some(p), Some(q)) => run(p, q, &mut reports)?,
                        (Some(p), None) => run(p, p, &mut reports)?,
                        _ => {
                            let limit = entry.handle.smoothness().order_limit();
                            for (p, q) in ORDER_PAIRS {
                                if p < limit && q < limit && p + q < limit {
                                    run(p, q, &mut reports)?;
                                }
                            }
                        }
                    }
                }
                CheckKind::Remainder => {
                    if matches!(entry.handle.smoothness(), Smoothness::Finite(k) if k >= 1)
                        && entry.handle.derivative_count()
                            >= match entry.handle.smoothness() {
                                Smoothness::Finite(k) => k as usize,
                                Smoothness::Analytic => 0,
                            }
                    {
                        reports.push(check_remainder(entry, ctx, opts.grid, tol)?);
                    }
                }
            }
        }
    }
    Ok(reports)
}
