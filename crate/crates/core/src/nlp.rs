//! Nonlinear programs `min φ₀(x)` s.t. `φ_i(x) ≤ 0` (`i < s`), `φ_i(x) = 0`
//! (`s ≤ i < m`): Lagrangian, active sets, critical subspace, LICQ/PLICQ,
//! KKT multipliers, second-order sufficiency and a tilt-stability probe.
//!
//! Constraint indices are 0-based throughout.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{sample_neighborhood, NeighborhoodSpec, Objective, Verdict, Witness};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::oracles::{self, GridSpec};
use crate::poly::Polynomial;
use crate::polyhedral::{ACTIVITY_TOL, POSITIVE_TOL};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;
/// KKT residual tolerance.
pub const KKT_TOL: f64 = 1e-8;
/// Threshold on the smallest reduced-Hessian eigenvalue.
pub const PD_TOL: f64 = 1e-8;

type Scalar = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Vector = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type Mat = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// A `C²` function given by value, gradient and Hessian oracles.
#[derive(Clone)]
pub struct SmoothFn {
    name: String,
    value: Scalar,
    gradient: Vector,
    hessian: Mat,
}

impl core::fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SmoothFn").field("name", &self.name).finish()
    }
}

impl SmoothFn {
    pub fn new<V, G, H>(name: impl Into<String>, value: V, gradient: G, hessian: H) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        H: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        SmoothFn { name: name.into(), value: Arc::new(value), gradient: Arc::new(gradient), hessian: Arc::new(hessian) }
    }

    pub fn from_poly(name: impl Into<String>, p: Polynomial) -> Self {
        let p = Arc::new(p);
        let (a, b, c) = (p.clone(), p.clone(), p);
        SmoothFn::new(name, move |x| a.eval(x), move |x| b.gradient(x), move |x| c.hessian(x))
    }

    /// `⟨c, x⟩ + d`
    pub fn affine(name: impl Into<String>, c: Vec<f64>, d: f64) -> Self {
        let n = c.len();
        let c = Arc::new(c);
        let c2 = c.clone();
        SmoothFn::new(name, move |x| linalg::dot(&c, x) + d, move |_| c2.to_vec(), move |_| Matrix::zeros(n, n))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    pub fn hessian(&self, x: &[f64]) -> Matrix {
        (self.hessian)(x)
    }
}

impl Objective for SmoothFn {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = self.value(x);
        if !v.is_finite() {
            return Err(Error::NanValue { at: format!("{x:?}") });
        }
        Ok(v)
    }
}

/// `φ₀` plus `m` constraints, the first `s` of them inequalities.
#[derive(Clone, Debug)]
pub struct NlpProblem {
    n: usize,
    s: usize,
    phi: Vec<SmoothFn>,
}

impl NlpProblem {
    /// `phi[0]` is the objective, `phi[1..]` the constraints.
    pub fn new(n: usize, s: usize, phi: Vec<SmoothFn>) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::InvalidArgument("an objective is required".to_string()));
        }
        if s > phi.len() - 1 {
            return Err(Error::InvalidArgument("s exceeds the number of constraints".to_string()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".to_string()));
        }
        Ok(NlpProblem { n, s, phi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn m(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn objective(&self) -> &SmoothFn {
        &self.phi[0]
    }

    /// Constraint `i` (0-based).
    pub fn constraint(&self, i: usize) -> &SmoothFn {
        &self.phi[i + 1]
    }

    pub fn constraints(&self) -> &[SmoothFn] {
        &self.phi[1..]
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimMismatch { expected: self.n, found: x.len() });
        }
        Ok(())
    }

    fn check_y(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.m() {
            return Err(Error::DimMismatch { expected: self.m(), found: y.len() });
        }
        Ok(())
    }

    /// `g(x) = (φ₁(x), …, φ_m(x))`
    pub fn g(&self, x: &[f64]) -> Vec<f64> {
        self.constraints().iter().map(|c| c.value(x)).collect()
    }

    /// Rows `∇φ_i(x)`.
    pub fn jacobian_rows(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.constraints().iter().map(|c| c.gradient(x)).collect()
    }

    /// `∇ₓL(x, y) = ∇φ₀(x) + Σ y_i ∇φ_i(x)`
    pub fn lagrangian_gradient(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut g = self.objective().gradient(x);
        for (yi, c) in y.iter().zip(self.constraints()) {
            if *yi != 0.0 {
                g = linalg::axpy(&g, *yi, &c.gradient(x));
            }
        }
        g
    }

    /// Activity band for constraint `i` at `x`.
    fn band(&self, i: usize, x: &[f64]) -> f64 {
        ACTIVITY_TOL * (1.0 + linalg::norm(&self.constraint(i).gradient(x)) * (1.0 + linalg::norm(x)))
    }

    /// Whether `x` satisfies every constraint up to the activity band.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.first_violation(x).is_none()
    }

    fn first_violation(&self, x: &[f64]) -> Option<(usize, f64)> {
        (0..self.m()).find_map(|i| {
            let v = self.constraint(i).value(x);
            let tol = self.band(i, x);
            let bad = if i < self.s { v > tol } else { v.abs() > tol };
            bad.then_some((i, v))
        })
    }

    /// Builds the equivalent composite model with the polyhedral `ψ`.
    pub fn to_composite(&self) -> Result<crate::composite::CompositeProblem> {
        let sig = crate::polyhedral::PolyhedralSignature::new(self.s, self.m())?;
        crate::composite::CompositeProblem::new(
            self.n,
            self.objective().clone(),
            self.constraints().to_vec(),
            Arc::new(crate::composite::PolyhedralPsi::new(sig)),
        )
    }
}

/// `∇²φ₀(x) + Σ y_i ∇²φ_i(x)`, symmetrised.
pub fn lagrangian_hessian(p: &NlpProblem, x: &[f64], y: &[f64]) -> Result<Matrix> {
    p.check_x(x)?;
    p.check_y(y)?;
    let mut h = p.objective().hessian(x);
    for (yi, c) in y.iter().zip(p.constraints()) {
        if *yi != 0.0 {
            h.add_scaled(&c.hessian(x), *yi);
        }
    }
    Ok(h.symmetrized())
}

/// `I(x)` (active inequalities) and `I₊(x, y)` (those with `y_i > 1e-9`).
pub fn active_sets(p: &NlpProblem, x: &[f64], y: &[f64]) -> Result<(Vec<usize>, Vec<usize>)> {
    p.check_x(x)?;
    p.check_y(y)?;
    if let Some((index, value)) = p.first_violation(x) {
        return Err(Error::InfeasiblePoint { index, value });
    }
    let active: Vec<usize> = (0..p.s).filter(|&i| p.constraint(i).value(x).abs() <= p.band(i, x)).collect();
    let plus = active.iter().copied().filter(|&i| y[i] > POSITIVE_TOL).collect();
    Ok((active, plus))
}

fn active_set_x(p: &NlpProblem, x: &[f64]) -> Result<Vec<usize>> {
    Ok(active_sets(p, x, &vec![0.0; p.m()])?.0)
}

/// Orthonormal basis of `S(x, y)` and the index sets it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSubspace {
    pub basis: Vec<Vec<f64>>,
    pub active: Vec<usize>,
    pub active_plus: Vec<usize>,
}

/// `S(x, y) = {w : ⟨∇φ_i(x), w⟩ = 0, i ∈ I₊(x, y) ∪ equalities}`.
pub fn critical_subspace(p: &NlpProblem, x: &[f64], y: &[f64]) -> Result<CriticalSubspace> {
    let (active, active_plus) = active_sets(p, x, y)?;
    let rows: Vec<Vec<f64>> =
        active_plus.iter().copied().chain(p.s..p.m()).map(|i| p.constraint(i).gradient(x)).collect();
    let basis = if rows.is_empty() {
        (0..p.n).map(|j| linalg::unit(p.n, j)).collect()
    } else {
        linalg::nullspace(&Matrix::from_rows(&rows), RANK_TOL)
    };
    Ok(CriticalSubspace { basis, active, active_plus })
}

fn licq_rows(p: &NlpProblem, x: &[f64]) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let active = active_set_x(p, x)?;
    let idx: Vec<usize> = active.into_iter().chain(p.s..p.m()).collect();
    let rows = idx.iter().map(|&i| p.constraint(i).gradient(x)).collect();
    Ok((idx, rows))
}

/// Linear independence of the active inequality and equality gradients,
/// decided by singular values (`σ_min > 1e-8 σ_max`).
pub fn check_licq(p: &NlpProblem, x: &[f64]) -> Result<Verdict> {
    let tag = "licq";
    let (idx, rows) = licq_rows(p, x)?;
    let base = |v: Verdict| v.with_tol("rank_relative", RANK_TOL).with_samples(idx.len());
    if rows.is_empty() {
        return Ok(base(Verdict::holds(tag).with_note("no active constraints")));
    }
    let a = Matrix::from_rows(&rows);
    let sv = linalg::singular_values(&a);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = if rows.len() > p.n { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
    if smax > 0.0 && linalg::rank(&a, RANK_TOL) == rows.len() {
        return Ok(base(Verdict::holds(tag).with_metric("sigma_min", smin)));
    }
    let mut alpha = linalg::nullspace(&a.transpose(), RANK_TOL).into_iter().next().unwrap_or_else(|| vec![1.0]);
    if alpha.len() != rows.len() {
        alpha = linalg::unit(rows.len(), 0);
    }
    let resid = linalg::norm(&a.transpose().mul_vec(&alpha));
    let w = Witness::new(resid.max(f64::MIN_POSITIVE))
        .with("alpha", alpha)
        .with("indices", idx.iter().map(|&i| i as f64).collect());
    Ok(base(Verdict::fails(tag, w).with_metric("sigma_min", smin)))
}

/// Subsets of `0..k` with at most `max` elements, in increasing size.
fn subsets(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << k) {
        if (mask.count_ones() as usize) <= max {
            out.push((0..k).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>());
        }
    }
    out.sort_by_key(Vec::len);
    out
}

/// Positive linear independence: no nonzero `α` with `α_i ≥ 0` on active
/// inequalities (equalities free) and `Σ α_i ∇φ_i(x) = 0`. Every such `α`
/// decomposes conformally into circuits, so the search runs over subsets
/// whose gradient dependency space is one-dimensional.
pub fn check_plicq(p: &NlpProblem, x: &[f64]) -> Result<Verdict> {
    let tag = "plicq";
    let (idx, rows) = licq_rows(p, x)?;
    if rows.is_empty() {
        return Ok(Verdict::holds(tag).with_note("no active constraints"));
    }
    if rows.len() > 16 {
        return Err(Error::Unsupported("PLICQ enumeration is limited to 16 active constraints".to_string()));
    }
    let scale = rows.iter().map(|r| linalg::norm(r)).fold(0.0, f64::max).max(1.0);
    let mut tried = 0;
    for sub in subsets(rows.len(), p.n + 1) {
        let sub_rows: Vec<Vec<f64>> = sub.iter().map(|&k| rows[k].clone()).collect();
        let at = Matrix::from_rows(&sub_rows).transpose();
        let null = linalg::nullspace(&at, RANK_TOL);
        if null.len() != 1 {
            continue;
        }
        tried += 1;
        let c = &null[0];
        for sign in [1.0, -1.0] {
            let feasible = sub.iter().zip(c).all(|(&k, ck)| idx[k] >= p.s || sign * ck >= -1e-10);
            if feasible {
                let mut alpha = vec![0.0; rows.len()];
                for (&k, ck) in sub.iter().zip(c) {
                    alpha[k] = sign * ck;
                }
                let resid = linalg::norm(&Matrix::from_rows(&rows).transpose().mul_vec(&alpha)) / scale;
                let w = Witness::new(resid.max(f64::MIN_POSITIVE))
                    .with("alpha", alpha)
                    .with("indices", idx.iter().map(|&i| i as f64).collect());
                return Ok(Verdict::fails(tag, w).with_samples(tried));
            }
        }
    }
    Ok(Verdict::holds(tag).with_samples(tried).with_tol("rank_relative", RANK_TOL))
}

/// A KKT pair for a given tilt `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub residual: f64,
}

/// Multipliers `y ∈ ℝ₊^s × ℝ^{m−s}` with `∇ₓL(x, y) = v` and
/// `⟨y, g(x)⟩ = 0`, solved on the active rows.
pub fn kkt_solve(p: &NlpProblem, x: &[f64], v: &[f64]) -> Result<KktPoint> {
    p.check_x(x)?;
    if v.len() != p.n {
        return Err(Error::DimMismatch { expected: p.n, found: v.len() });
    }
    let licq = check_licq(p, x)?;
    if licq.is_fails() {
        return Err(Error::NonUnique);
    }
    let (idx, rows) = licq_rows(p, x)?;
    let rhs = linalg::sub(v, &p.objective().gradient(x));
    let mut y = vec![0.0; p.m()];
    let residual = if rows.is_empty() {
        linalg::norm(&rhs)
    } else {
        let at = Matrix::from_rows(&rows).transpose();
        let (ya, res) = linalg::lstsq(&at, &rhs, 1e-12);
        for (k, &i) in idx.iter().enumerate() {
            y[i] = ya[k];
        }
        res
    };
    if residual > KKT_TOL * (1.0 + linalg::norm(&rhs)) {
        return Err(Error::Infeasible { residual });
    }
    if let Some(i) = (0..p.s).find(|&i| y[i] < -POSITIVE_TOL) {
        return Err(Error::Infeasible { residual: y[i] });
    }
    for yi in y.iter_mut().take(p.s) {
        if *yi < 0.0 {
            *yi = 0.0;
        }
    }
    Ok(KktPoint { x: x.to_vec(), y, residual })
}

fn canonical_sign(mut w: Vec<f64>) -> Vec<f64> {
    if let Some(first) = w.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            for c in w.iter_mut() {
                *c = -*c;
            }
        }
    }
    w
}

/// Smallest eigenvalue of `BᵀHB` on `S(x, y)` and its unit minimiser in `ℝⁿ`;
/// `None` when `S = {0}`.
pub fn reduced_hessian_min(p: &NlpProblem, x: &[f64], y: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
    let cs = critical_subspace(p, x, y)?;
    if cs.basis.is_empty() {
        return Ok(None);
    }
    let h = lagrangian_hessian(p, x, y)?;
    let b = Matrix::from_columns(p.n, &cs.basis);
    let r = b.transpose().mul(&h).mul(&b);
    let e = linalg::sym_eigen(&r)?;
    let w = b.mul_vec(&e.vector(0));
    let w = linalg::scale(&w, 1.0 / linalg::norm(&w));
    Ok(Some((e.values[0], canonical_sign(w))))
}

/// Positive definiteness of the Lagrangian Hessian on `S(x̄, ȳ)`. Reports
/// `sigma` (smallest reduced eigenvalue) and `kappa = 1/sigma`; with
/// `S = {0}` it holds vacuously and reports `sigma = +∞`, `kappa = 0`.
pub fn pointbased_strong_sufficiency(p: &NlpProblem, k: &KktPoint) -> Result<Verdict> {
    let tag = "pointbased-strong-sufficiency";
    if check_licq(p, &k.x)?.is_fails() {
        return Err(Error::NonUnique);
    }
    if k.residual > KKT_TOL {
        return Err(Error::Infeasible { residual: k.residual });
    }
    let base = |v: Verdict| v.with_tol("pd_threshold", PD_TOL).with_tol("activity_band", ACTIVITY_TOL);
    match reduced_hessian_min(p, &k.x, &k.y)? {
        None => Ok(base(
            Verdict::holds(tag)
                .with_metric("sigma", f64::INFINITY)
                .with_metric("kappa", 0.0)
                .with_note("vacuous: critical subspace is {0}"),
        )),
        Some((lmin, w)) => {
            if lmin > PD_TOL {
                Ok(base(Verdict::holds(tag).with_metric("sigma", lmin).with_metric("kappa", 1.0 / lmin).with_samples(1)))
            } else {
                let wit = Witness::new(-lmin).with("x", k.x.clone()).with("y", k.y.clone()).with("w", w);
                Ok(base(Verdict::fails(tag, wit).with_metric("sigma", lmin).with_samples(1)))
            }
        }
    }
}

/// Gauss–Newton projection onto `{φ_i = 0, i ∈ rows}`.
fn project_onto(p: &NlpProblem, x: &[f64], rows: &[usize]) -> Vec<f64> {
    let mut z = x.to_vec();
    if rows.is_empty() {
        return z;
    }
    for _ in 0..30 {
        let r: Vec<f64> = rows.iter().map(|&i| p.constraint(i).value(&z)).collect();
        if linalg::norm(&r) <= 1e-14 * (1.0 + linalg::norm(&z)) {
            break;
        }
        let j = Matrix::from_rows(&rows.iter().map(|&i| p.constraint(i).gradient(&z)).collect::<Vec<_>>());
        let (d, _) = linalg::lstsq(&j, &r, 1e-12);
        z = linalg::sub(&z, &d);
    }
    z
}

/// Settings for [`neighborhood_sufficiency`].
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodConfig {
    /// Radius of the tilt ball `V` around 0; defaults to the `x` radius.
    pub v_radius: Option<f64>,
    /// Multiplier perturbations per projected sample.
    pub multiplier_samples: usize,
}

impl Default for NeighborhoodConfig {
    fn default() -> Self {
        NeighborhoodConfig { v_radius: None, multiplier_samples: 5 }
    }
}

/// Samples `(x, v)` on the graph of `x ↦ ∇ₓL(x, ·)` near `(x̄, 0)` and tests
/// `⟨∇²ₓₓL(x, y)w, w⟩ ≥ modulus ‖w‖²` on `S(x, y)`. Points of the region
/// are used as they are and also projected onto the constraints active at
/// `x̄`; multipliers are perturbed around `ȳ`. Infeasible samples and
/// samples whose KKT system has no solution are skipped and counted.
pub fn neighborhood_sufficiency(
    p: &NlpProblem,
    k: &KktPoint,
    modulus: f64,
    region: &NeighborhoodSpec,
    cfg: &NeighborhoodConfig,
) -> Result<Verdict> {
    let tag = if modulus > 0.0 { "neighborhood-strong-sufficiency" } else { "neighborhood-sufficiency" };
    let v_radius = cfg.v_radius.unwrap_or(region.radius);
    let active_bar: Vec<usize> = active_set_x(p, &k.x)?.into_iter().chain(p.s..p.m()).collect();
    let mut xs = sample_neighborhood(region)?;
    xs.push(k.x.clone());
    let projected: Vec<Vec<f64>> = xs.iter().map(|x| project_onto(p, x, &active_bar)).collect();
    let mut candidates: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for x in xs.iter().chain(projected.iter()) {
        candidates.push((x.clone(), k.y.clone()));
    }
    let pert = sample_neighborhood(
        &NeighborhoodSpec::new(vec![0.0; p.m().max(1)], v_radius, cfg.multiplier_samples.max(1))
            .with_scheme(crate::domain::SamplingScheme::LowDiscrepancy),
    )?;
    for x in &projected {
        for d in &pert {
            let y: Vec<f64> = (0..p.m())
                .map(|i| {
                    let yi = k.y[i] + d[i.min(d.len() - 1)];
                    if i < p.s {
                        yi.max(0.0)
                    } else {
                        yi
                    }
                })
                .collect();
            candidates.push((x.clone(), y));
        }
    }

    let mut skipped_infeasible = 0usize;
    let mut skipped_kkt = 0usize;
    let mut skipped_v = 0usize;
    let mut used = 0usize;
    let mut min_ratio = f64::INFINITY;
    for (x, ytrial) in candidates {
        if linalg::dist(&x, &region.center) > region.radius * (1.0 + 1e-12) {
            skipped_infeasible += 1;
            continue;
        }
        if !p.is_feasible(&x) {
            skipped_infeasible += 1;
            continue;
        }
        // zero multipliers on constraints inactive at x
        let act = active_set_x(p, &x)?;
        let y0: Vec<f64> =
            (0..p.m()).map(|i| if i >= p.s || act.contains(&i) { ytrial[i] } else { 0.0 }).collect();
        let v = p.lagrangian_gradient(&x, &y0);
        if linalg::norm(&v) > v_radius {
            skipped_v += 1;
            continue;
        }
        let kk = match kkt_solve(p, &x, &v) {
            Ok(kk) => kk,
            Err(Error::Infeasible { .. }) | Err(Error::NonUnique) => {
                skipped_kkt += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        used += 1;
        let Some((lmin, w)) = reduced_hessian_min(p, &x, &kk.y)? else {
            continue;
        };
        min_ratio = min_ratio.min(lmin);
        let tol = 1e-9 * (1.0 + lmin.abs());
        if lmin < modulus - tol {
            let wit = Witness::new(modulus - lmin)
                .with("x", x)
                .with("v", v)
                .with("y", kk.y)
                .with("w", w);
            return Ok(Verdict::fails(tag, wit)
                .with_metric("modulus", modulus)
                .with_metric("skipped_infeasible", skipped_infeasible as f64)
                .with_metric("skipped_kkt", skipped_kkt as f64)
                .with_metric("skipped_v", skipped_v as f64)
                .with_samples(used));
        }
    }
    let sigma_est = if min_ratio.is_finite() { min_ratio - 0.01 * min_ratio.abs() } else { f64::INFINITY };
    Ok(Verdict::holds(tag)
        .with_metric("modulus", modulus)
        .with_metric("sigma_estimate", sigma_est)
        .with_metric("skipped_infeasible", skipped_infeasible as f64)
        .with_metric("skipped_kkt", skipped_kkt as f64)
        .with_metric("skipped_v", skipped_v as f64)
        .with_tol("activity_band", ACTIVITY_TOL)
        .with_tol("v_radius", v_radius)
        .with_samples(used)
        .with_note("sigma_estimate is the sampled minimum minus a 1% margin, not a certificate"))
}

struct TiltObjective<'a> {
    p: &'a NlpProblem,
    center: &'a [f64],
    gamma: f64,
    v: &'a [f64],
}

impl Objective for TiltObjective<'_> {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        if linalg::dist(x, self.center) > self.gamma {
            return Ok(f64::INFINITY);
        }
        // exact feasibility on the grid: no band
        if (0..self.p.s).any(|i| self.p.constraint(i).value(x) > 0.0) {
            return Ok(f64::INFINITY);
        }
        Ok(self.p.objective().value(x) - linalg::dot(self.v, x))
    }
}

/// `M_γ(v)` by grid minimisation over `B_γ(x̄) ∩ feasible set`.
pub fn tilt_argmin(p: &NlpProblem, center: &[f64], gamma: f64, v: &[f64]) -> Result<Vec<f64>> {
    let n = p.n;
    let ppa = match n {
        1 => 401,
        2 => 61,
        3 => 21,
        _ => {
            return Err(Error::GridBudgetExceeded { nodes: 21usize.saturating_pow(n as u32), budget: oracles::DEFAULT_GRID_BUDGET })
        }
    };
    if p.m() > p.s {
        return Err(Error::Unsupported("tilt probe handles inequality constraints only".to_string()));
    }
    let step0 = 2.0 * gamma / (ppa - 1) as f64;
    let rounds = libm::ceil(libm::log(1e-9 * gamma.max(1e-3) / step0) / libm::log(0.2)) as usize;
    let grid = GridSpec::cube(center, gamma, ppa).with_rounds(rounds).with_shrink(0.2);
    let obj = TiltObjective { p, center, gamma, v };
    Ok(oracles::grid_argmin_with(&obj, &grid, center, 0.0)?.0)
}

/// Empirical tilt stability: evaluates `M_γ` at `samples` tilts of norm at
/// most `tilt_radius`, estimates its Lipschitz constant from pairwise
/// ratios, and compares it with `κ` from [`pointbased_strong_sufficiency`]
/// (holds when `M_γ(0) = x̄` and the estimate is at most `1.5κ`).
pub fn tilt_stability_probe(
    p: &NlpProblem,
    k: &KktPoint,
    gamma: f64,
    tilt_radius: f64,
    samples: usize,
) -> Result<Verdict> {
    let tag = "tilt-stability";
    let n = p.n;
    let m0 = tilt_argmin(p, &k.x, gamma, &vec![0.0; n])?;
    let loc_tol = 1e-6 * (1.0 + gamma);
    let pointbased = pointbased_strong_sufficiency(p, k)?;
    let kappa = pointbased.metric("kappa");
    let tilts = sample_neighborhood(&NeighborhoodSpec::new(vec![0.0; n], tilt_radius, samples.max(2)))?;
    let mut images = Vec::with_capacity(tilts.len());
    for v in &tilts {
        images.push(tilt_argmin(p, &k.x, gamma, v)?);
    }
    let mut lip: f64 = 0.0;
    let mut worst_pair = (0, 0);
    for i in 0..tilts.len() {
        for j in (i + 1)..tilts.len() {
            let dv = linalg::dist(&tilts[i], &tilts[j]);
            if dv < 1e-12 {
                continue;
            }
            let r = linalg::dist(&images[i], &images[j]) / dv;
            if r > lip {
                lip = r;
                worst_pair = (i, j);
            }
        }
    }
    let base = |v: Verdict| {
        let v = v.with_metric("lipschitz_estimate", lip).with_metric("gamma", gamma).with_samples(tilts.len());
        match kappa {
            Some(kap) => v.with_metric("kappa", kap),
            None => v,
        }
    };
    if linalg::dist(&m0, &k.x) > loc_tol {
        let w = Witness::new(linalg::dist(&m0, &k.x)).with("v", vec![0.0; n]).with("m_of_v", m0);
        return Ok(base(Verdict::fails(tag, w).with_note("M(0) differs from the reference point")));
    }
    let Some(kap) = kappa.filter(|_| pointbased.is_holds()) else {
        return Ok(base(Verdict::inconclusive(tag).with_note("pointbased condition fails; no kappa to compare")));
    };
    let bound = 1.5 * kap + loc_tol / tilt_radius;
    if lip <= bound {
        Ok(base(Verdict::holds(tag).with_tol("factor", 1.5)))
    } else {
        let (i, j) = worst_pair;
        let w = Witness::new(lip - bound)
            .with("v1", tilts[i].clone())
            .with("v2", tilts[j].clone())
            .with("m1", images[i].clone())
            .with("m2", images[j].clone());
        Ok(base(Verdict::fails(tag, w).with_tol("factor", 1.5)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn poly(n: usize, pairs: &[(f64, &[u32])]) -> SmoothFn {
        SmoothFn::from_poly("p", Polynomial::from_pairs(n, pairs).unwrap())
    }

    #[test]
    fn lagrangian_hessian_examples() {
        let p = NlpProblem::new(1, 1, vec![poly(1, &[(1.0, &[2])]), poly(1, &[(1.0, &[1])])]).unwrap();
        assert_eq!(lagrangian_hessian(&p, &[0.3], &[3.0]).unwrap()[(0, 0)], 2.0);
        assert_eq!(lagrangian_hessian(&p, &[0.3], &[0.0]).unwrap()[(0, 0)], 2.0);
        let p = NlpProblem::new(1, 1, vec![poly(1, &[]), poly(1, &[(1.0, &[2])])]).unwrap();
        assert_eq!(lagrangian_hessian(&p, &[0.0], &[1.0]).unwrap()[(0, 0)], 2.0);
    }

    #[test]
    fn active_set_examples() {
        let p = NlpProblem::new(1, 1, vec![poly(1, &[(1.0, &[2])]), poly(1, &[(1.0, &[1])])]).unwrap();
        assert_eq!(active_sets(&p, &[0.0], &[0.0]).unwrap(), (vec![0], vec![]));
        assert_eq!(active_sets(&p, &[0.0], &[1.0]).unwrap(), (vec![0], vec![0]));
        assert_eq!(active_sets(&p, &[-1.0], &[0.0]).unwrap(), (vec![], vec![]));
        assert!(matches!(active_sets(&p, &[0.5], &[0.0]), Err(Error::InfeasiblePoint { index: 0, .. })));
    }

    #[test]
    fn critical_subspace_examples() {
        let obj = poly(2, &[]);
        let p = NlpProblem::new(2, 1, vec![obj.clone(), SmoothFn::affine("x1", vec![1.0, 0.0], 0.0)]).unwrap();
        assert_eq!(critical_subspace(&p, &[0.0, 0.0], &[0.0]).unwrap().basis.len(), 2);
        let cs = critical_subspace(&p, &[0.0, 0.0], &[1.0]).unwrap();
        assert_eq!(cs.basis.len(), 1);
        assert!(cs.basis[0][0].abs() < 1e-12 && (cs.basis[0][1].abs() - 1.0).abs() < 1e-12);
        let p = NlpProblem::new(
            2,
            0,
            vec![obj, SmoothFn::affine("x1", vec![1.0, 0.0], 0.0), SmoothFn::affine("x2", vec![0.0, 1.0], 0.0)],
        )
        .unwrap();
        assert!(critical_subspace(&p, &[0.0, 0.0], &[0.0, 0.0]).unwrap().basis.is_empty());
    }

    #[test]
    fn licq_plicq_examples() {
        let obj = poly(2, &[]);
        let single = NlpProblem::new(2, 1, vec![obj.clone(), SmoothFn::affine("a", vec![1.0, 0.0], 0.0)]).unwrap();
        assert!(check_licq(&single, &[0.0, 0.0]).unwrap().is_holds());
        let opposite = NlpProblem::new(
            2,
            2,
            vec![obj.clone(), SmoothFn::affine("a", vec![1.0, 0.0], 0.0), SmoothFn::affine("b", vec![-1.0, 0.0], 0.0)],
        )
        .unwrap();
        assert!(check_licq(&opposite, &[0.0, 0.0]).unwrap().is_fails());
        let v = check_plicq(&opposite, &[0.0, 0.0]).unwrap();
        assert!(v.is_fails());
        let a = v.witness.unwrap().get("alpha").unwrap().to_vec();
        assert!(a.iter().all(|c| *c > 0.0));
        let indep = NlpProblem::new(
            2,
            2,
            vec![obj, SmoothFn::affine("a", vec![1.0, 0.0], 0.0), SmoothFn::affine("b", vec![1.0, 1.0], 0.0)],
        )
        .unwrap();
        assert!(check_licq(&indep, &[0.0, 0.0]).unwrap().is_holds());
        assert!(check_plicq(&indep, &[0.0, 0.0]).unwrap().is_holds());
    }

    #[test]
    fn kkt_examples() {
        let lin = gallery::nlp_linear_ineq();
        assert_eq!(kkt_solve(&lin, &[0.0], &[0.0]).unwrap().y, vec![1.0]);
        let up = NlpProblem::new(1, 1, vec![poly(1, &[(1.0, &[1])]), poly(1, &[(1.0, &[1])])]).unwrap();
        assert!(matches!(kkt_solve(&up, &[0.0], &[0.0]), Err(Error::Infeasible { .. })));
        let p = NlpProblem::new(2, 1, vec![poly(2, &[(1.0, &[0, 1])]), poly(2, &[(1.0, &[1, 0])])]).unwrap();
        assert!(matches!(kkt_solve(&p, &[0.0, 0.0], &[0.0, 0.0]), Err(Error::Infeasible { .. })));
        let deg = gallery::nlp_degenerate_licq();
        assert_eq!(kkt_solve(&deg, &[0.0], &[0.0]).unwrap_err(), Error::NonUnique);
    }

    #[test]
    fn pointbased_examples() {
        let q = gallery::nlp_quad_ineq();
        let k = kkt_solve(&q, &[0.0], &[0.0]).unwrap();
        let v = pointbased_strong_sufficiency(&q, &k).unwrap();
        assert!(v.is_holds());
        assert_eq!(v.metric("sigma"), Some(2.0));
        assert_eq!(v.metric("kappa"), Some(0.5));

        let lin = gallery::nlp_linear_ineq();
        let k = kkt_solve(&lin, &[0.0], &[0.0]).unwrap();
        let v = pointbased_strong_sufficiency(&lin, &k).unwrap();
        assert!(v.is_holds());
        assert_eq!(v.metric("sigma"), Some(f64::INFINITY));
        assert_eq!(v.metric("kappa"), Some(0.0));

        let eqp = gallery::nlp_saddle_equality();
        let k = kkt_solve(&eqp, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let v = pointbased_strong_sufficiency(&eqp, &k).unwrap();
        assert!(v.is_holds());
        assert!((v.metric("sigma").unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn neighborhood_examples() {
        let q = gallery::nlp_quad_ineq();
        let k = kkt_solve(&q, &[0.0], &[0.0]).unwrap();
        let region = NeighborhoodSpec::new(vec![0.0], 0.1, 21);
        let cfg = NeighborhoodConfig::default();
        assert!(neighborhood_sufficiency(&q, &k, 1.99, &region, &cfg).unwrap().is_holds());
        assert!(neighborhood_sufficiency(&q, &k, 2.0, &region, &cfg).unwrap().is_holds());

        let quartic = gallery::nlp_quartic();
        let k = kkt_solve(&quartic, &[0.0], &[0.0]).unwrap();
        assert!(neighborhood_sufficiency(&quartic, &k, 0.0, &region, &cfg).unwrap().is_holds());
        assert!(neighborhood_sufficiency(&quartic, &k, 0.01, &region, &cfg).unwrap().is_fails());

        let ind = gallery::nlp_indefinite();
        let k = kkt_solve(&ind, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let region = NeighborhoodSpec::new(vec![0.0, 0.0], 0.1, 30);
        let v = neighborhood_sufficiency(&ind, &k, 0.0, &region, &cfg).unwrap();
        assert!(v.is_fails());
        let w = v.witness.unwrap().get("w").unwrap().to_vec();
        assert!((w[0] - 1.0).abs() < 1e-9 && w[1].abs() < 1e-9);
    }

    #[test]
    fn tilt_examples() {
        let q = gallery::nlp_quad_ineq();
        let k = kkt_solve(&q, &[0.0], &[0.0]).unwrap();
        let v = tilt_stability_probe(&q, &k, 0.5, 0.2, 9).unwrap();
        assert!(v.is_holds(), "{v:?}");
        let l = v.metric("lipschitz_estimate").unwrap();
        assert!((l - 0.5).abs() < 1e-6);

        let lin = gallery::nlp_linear_ineq();
        let k = kkt_solve(&lin, &[0.0], &[0.0]).unwrap();
        let v = tilt_stability_probe(&lin, &k, 0.5, 0.2, 9).unwrap();
        assert!(v.is_holds());
        assert!(v.metric("lipschitz_estimate").unwrap() < 1e-9);

        let neg = NlpProblem::new(1, 1, vec![poly(1, &[(-1.0, &[2])]), poly(1, &[(1.0, &[1])])]).unwrap();
        let k = kkt_solve(&neg, &[0.0], &[0.0]).unwrap();
        assert!(tilt_stability_probe(&neg, &k, 0.5, 0.2, 9).unwrap().is_fails());
    }
}
