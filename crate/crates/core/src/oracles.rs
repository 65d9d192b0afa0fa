//! Brute-force reference engines: budgeted grid minimisation, central
//! differences, eigenvalue classification and sampled convexity inequalities.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::domain::{sample_neighborhood, NeighborhoodSpec, Objective, Verdict, Witness};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Default node budget for one grid round.
pub const DEFAULT_GRID_BUDGET: usize = 2_000_000;

/// Relative tolerance used to classify eigenvalue signs.
pub const EIGEN_TOL: f64 = 1e-10;

/// Box grid with shrink-and-recenter refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points_per_axis: usize,
    pub refine_rounds: usize,
    pub refine_shrink: f64,
    /// Maximum number of nodes evaluated in a single round.
    pub budget: usize,
}

impl GridSpec {
    /// 3 refinement rounds with shrink 0.2.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points_per_axis: usize) -> Self {
        GridSpec {
            lower,
            upper,
            points_per_axis,
            refine_rounds: 3,
            refine_shrink: 0.2,
            budget: DEFAULT_GRID_BUDGET,
        }
    }

    /// Cube `[c - r, c + r]^n`.
    pub fn cube(center: &[f64], radius: f64, points_per_axis: usize) -> Self {
        GridSpec::new(
            center.iter().map(|c| c - radius).collect(),
            center.iter().map(|c| c + radius).collect(),
            points_per_axis,
        )
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.refine_rounds = rounds;
        self
    }

    pub fn with_shrink(mut self, shrink: f64) -> Self {
        self.refine_shrink = shrink;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::DimMismatch { expected: self.lower.len(), found: self.upper.len() });
        }
        if self.lower.is_empty() {
            return Err(Error::InvalidArgument("empty grid".to_string()));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument("grid needs lower < upper componentwise".to_string()));
        }
        if self.points_per_axis < 3 {
            return Err(Error::InvalidArgument("points_per_axis must be at least 3".to_string()));
        }
        if !(self.refine_shrink > 0.0 && self.refine_shrink < 1.0) {
            return Err(Error::InvalidArgument("refine_shrink must lie in (0,1)".to_string()));
        }
        let nodes = libm::pow(self.points_per_axis as f64, self.dim() as f64);
        if nodes > self.budget as f64 {
            return Err(Error::GridBudgetExceeded { nodes: nodes.min(usize::MAX as f64) as usize, budget: self.budget });
        }
        Ok(())
    }
}

/// Adapter turning a closure into an [`Objective`].
pub struct FnObjective<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Objective for FnObjective<F> {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = (self.0)(x);
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::NanValue { at: alloc::format!("{x:?}") });
        }
        Ok(v)
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

fn linspace(lo: f64, hi: f64, k: usize) -> impl Iterator<Item = f64> {
    (0..k).map(move |i| {
        if i + 1 == k {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (k - 1) as f64
        }
    })
}

/// Per-axis node lists for one round.
fn round_axes(
    lo: &[f64],
    hi: &[f64],
    k: usize,
    offset: f64,
    breakpoints: &[f64],
    best: Option<&[f64]>,
) -> Vec<Vec<f64>> {
    (0..lo.len())
        .map(|a| {
            let step = (hi[a] - lo[a]) / (k - 1) as f64;
            let mut axis: Vec<f64> = linspace(lo[a], hi[a], k)
                .map(|t| if offset != 0.0 { (t + offset * step).min(hi[a]) } else { t })
                .collect();
            axis.extend(breakpoints.iter().copied().filter(|b| *b >= lo[a] && *b <= hi[a]));
            if let Some(b) = best {
                axis.push(b[a]);
            }
            axis.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
            axis.dedup();
            axis
        })
        .collect()
}

/// Grid minimisation with explicit breakpoints and an optional fractional
/// offset of the uniform nodes (used for jittered re-solves).
pub fn grid_argmin_with(
    h: &impl Objective,
    grid: &GridSpec,
    breakpoints: &[f64],
    offset: f64,
) -> Result<(Vec<f64>, f64)> {
    grid.validate()?;
    let n = grid.dim();
    let k = grid.points_per_axis;
    let mut lo = grid.lower.clone();
    let mut hi = grid.upper.clone();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut point = vec![0.0; n];
    for round in 0..=grid.refine_rounds {
        let off = if round == 0 { offset } else { 0.0 };
        let axes = round_axes(&lo, &hi, k, off, breakpoints, best.as_ref().map(|b| b.0.as_slice()));
        let total: usize = axes.iter().map(Vec::len).product();
        if total > grid.budget + grid.budget / 4 {
            return Err(Error::GridBudgetExceeded { nodes: total, budget: grid.budget });
        }
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            for a in 0..n {
                point[a] = axes[a][idx[a]];
            }
            let v = h.eval(&point)?;
            if v.is_finite() {
                let better = match &best {
                    None => true,
                    Some((bp, bv)) => v < *bv || (v == *bv && lex_cmp(&point, bp) == Ordering::Less),
                };
                if better {
                    best = Some((point.clone(), v));
                }
            }
            // odometer, last axis fastest => lexicographic order
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    break;
                }
                idx[a] = 0;
            }
        }
        let Some((bp, _)) = &best else {
            return Err(Error::AllInfinite);
        };
        for a in 0..n {
            let half = grid.refine_shrink * (hi[a] - lo[a]) / 2.0;
            lo[a] = (bp[a] - half).max(grid.lower[a]);
            hi[a] = (bp[a] + half).min(grid.upper[a]);
        }
    }
    Ok(best.expect("set in round 0"))
}

/// Global grid minimiser after the configured refinement rounds. Ties go to
/// the lexicographically smallest node; `+∞` nodes are skipped.
pub fn grid_argmin(h: &impl Objective, grid: &GridSpec) -> Result<(Vec<f64>, f64)> {
    grid_argmin_with(h, grid, &[], 0.0)
}

/// Central differences with step `h`.
pub fn fd_gradient(f: &impl Objective, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(x.len());
    let mut p = x.to_vec();
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let fp = f.eval(&p)?;
        p[i] = x[i] - h;
        let fm = f.eval(&p)?;
        p[i] = x[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::StencilLeavesDomain);
        }
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// Second central difference along `d` (unit or not).
pub fn fd_curvature(f: &impl Objective, x: &[f64], d: &[f64], h: f64) -> Result<f64> {
    let fp = f.eval(&linalg::axpy(x, h, d))?;
    let f0 = f.eval(x)?;
    let fm = f.eval(&linalg::axpy(x, -h, d))?;
    if !fp.is_finite() || !f0.is_finite() || !fm.is_finite() {
        return Err(Error::StencilLeavesDomain);
    }
    Ok((fp - 2.0 * f0 + fm) / (h * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
    NegativeDefinite,
    NegativeSemidefinite,
}

impl Definiteness {
    pub fn as_str(self) -> &'static str {
        match self {
            Definiteness::PositiveDefinite => "PD",
            Definiteness::PositiveSemidefinite => "PSD",
            Definiteness::Indefinite => "indefinite",
            Definiteness::NegativeDefinite => "ND",
            Definiteness::NegativeSemidefinite => "NSD",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenReport {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub definiteness: Definiteness,
    /// Absolute threshold actually applied (`EIGEN_TOL · max |λ|`).
    pub tolerance: f64,
}

/// Eigenvalues of `(M + Mᵀ)/2` and their sign pattern.
pub fn symmetric_eigen(m: &Matrix) -> Result<EigenReport> {
    let e = linalg::sym_eigen(m)?;
    let vals = e.values;
    if vals.is_empty() {
        return Ok(EigenReport {
            min_eigenvalue: f64::INFINITY,
            max_eigenvalue: f64::NEG_INFINITY,
            eigenvalues: vals,
            definiteness: Definiteness::PositiveDefinite,
            tolerance: 0.0,
        });
    }
    let min = vals[0];
    let max = vals[vals.len() - 1];
    let scale = min.abs().max(max.abs());
    let tol = EIGEN_TOL * scale;
    let definiteness = if scale == 0.0 {
        Definiteness::PositiveSemidefinite
    } else if min > tol {
        Definiteness::PositiveDefinite
    } else if min >= -tol {
        Definiteness::PositiveSemidefinite
    } else if max < -tol {
        Definiteness::NegativeDefinite
    } else if max <= tol {
        Definiteness::NegativeSemidefinite
    } else {
        Definiteness::Indefinite
    };
    Ok(EigenReport { min_eigenvalue: min, max_eigenvalue: max, eigenvalues: vals, definiteness, tolerance: tol })
}

const CONVEX_WEIGHTS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// `(1−t)f(x) + t f(y) − (κ/2) t(1−t)‖x−y‖² − f((1−t)x + t y)` and the
/// tolerance `1e-9 (1 + |values|)`. Negative beyond the tolerance means a
/// violation. Returns `None` if an endpoint is `+∞`.
pub fn convexity_gap(
    f: &impl Objective,
    x: &[f64],
    y: &[f64],
    t: f64,
    modulus: f64,
) -> Result<Option<(f64, f64)>> {
    let fx = f.eval(x)?;
    let fy = f.eval(y)?;
    gap_from_values(f, x, y, fx, fy, t, modulus)
}

fn gap_from_values(
    f: &impl Objective,
    x: &[f64],
    y: &[f64],
    fx: f64,
    fy: f64,
    t: f64,
    modulus: f64,
) -> Result<Option<(f64, f64)>> {
    if !fx.is_finite() || !fy.is_finite() {
        return Ok(None);
    }
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    let fz = f.eval(&z)?;
    let d2 = linalg::norm_sq(&linalg::sub(x, y));
    let rhs = (1.0 - t) * fx + t * fy - 0.5 * modulus * t * (1.0 - t) * d2;
    let tol = 1e-9 * (1.0 + fx.abs() + fy.abs() + if fz.is_finite() { fz.abs() } else { 0.0 });
    Ok(Some((rhs - fz, tol)))
}

/// Evenly strided selection of `(i, j, t)` triples over the sample pairs.
fn triples(n_samples: usize, pair_count: usize) -> Vec<(usize, usize, f64)> {
    let mut all = Vec::new();
    for i in 0..n_samples {
        for j in (i + 1)..n_samples {
            for t in CONVEX_WEIGHTS {
                all.push((i, j, t));
            }
        }
    }
    if pair_count >= all.len() {
        return all;
    }
    (0..pair_count).map(|k| all[k * all.len() / pair_count]).collect()
}

/// Samples the (strong) convexity inequality with modulus `modulus` on
/// `pair_count` triples drawn from `region`. A violation beyond
/// `1e-9 (1 + |values|)` yields `Fails` with the triple `(x, y, λ)`.
pub fn sampled_convexity(
    f: &impl Objective,
    region: &NeighborhoodSpec,
    modulus: f64,
    pair_count: usize,
) -> Result<Verdict> {
    let tag = "strong-convexity-inequality";
    let pts = sample_neighborhood(region)?;
    let vals: Vec<f64> = pts.iter().map(|p| f.eval(p)).collect::<Result<_>>()?;
    let mut used = 0;
    for (i, j, t) in triples(pts.len(), pair_count) {
        let Some((gap, tol)) = gap_from_values(f, &pts[i], &pts[j], vals[i], vals[j], t, modulus)? else {
            continue;
        };
        used += 1;
        if gap < -tol {
            let w = Witness::new(-gap).with("x", pts[i].clone()).with("y", pts[j].clone()).scalar("lambda", t);
            return Ok(Verdict::fails(tag, w)
                .with_tol("convexity_relative", 1e-9)
                .with_metric("modulus", modulus)
                .with_samples(used));
        }
    }
    Ok(Verdict::holds(tag).with_tol("convexity_relative", 1e-9).with_metric("modulus", modulus).with_samples(used))
}

/// Largest κ compatible with every sampled triple:
/// `min 2[(1−t)f(x) + t f(y) − f(z)] / (t(1−t)‖x−y‖²)`.
pub fn estimate_convexity_modulus(f: &impl Objective, region: &NeighborhoodSpec, pair_count: usize) -> Result<f64> {
    let pts = sample_neighborhood(region)?;
    let vals: Vec<f64> = pts.iter().map(|p| f.eval(p)).collect::<Result<_>>()?;
    let mut best = f64::INFINITY;
    for (i, j, t) in triples(pts.len(), pair_count) {
        let Some((gap, _)) = gap_from_values(f, &pts[i], &pts[j], vals[i], vals[j], t, 0.0)? else {
            continue;
        };
        let d2 = linalg::norm_sq(&linalg::sub(&pts[i], &pts[j]));
        if d2 > 0.0 {
            best = best.min(2.0 * gap / (t * (1.0 - t) * d2));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_grid_min() {
        let h = FnObjective(|y: &[f64]| (y[0] - 1.0) * (y[0] - 1.0));
        let (p, v) = grid_argmin(&h, &GridSpec::new(vec![-2.0], vec![2.0], 401)).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-6 && v.abs() < 1e-6);
    }

    #[test]
    fn boundary_min_with_indicator() {
        let h = FnObjective(|y: &[f64]| if y[0] >= 0.0 { y[0] } else { f64::INFINITY });
        let (p, v) = grid_argmin(&h, &GridSpec::new(vec![-2.0], vec![2.0], 401)).unwrap();
        assert_eq!(p, vec![0.0]);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn soft_threshold_by_grid() {
        let h = FnObjective(|y: &[f64]| y[0].abs() + (y[0] - 0.2) * (y[0] - 0.2) / (2.0 * 0.5));
        let (p, v) = grid_argmin(&h, &GridSpec::new(vec![-2.0], vec![2.0], 401)).unwrap();
        assert!(p[0].abs() < 1e-9);
        assert!((v - 0.04).abs() < 1e-12);
    }

    #[test]
    fn all_infinite() {
        let h = FnObjective(|_: &[f64]| f64::INFINITY);
        assert_eq!(grid_argmin(&h, &GridSpec::new(vec![0.0], vec![1.0], 5)).unwrap_err(), Error::AllInfinite);
    }

    #[test]
    fn ties_go_to_lexicographically_smallest() {
        let h = FnObjective(|_: &[f64]| 1.0);
        let (p, _) = grid_argmin(&h, &GridSpec::new(vec![-1.0, -1.0], vec![1.0, 1.0], 5)).unwrap();
        assert_eq!(p, vec![-1.0, -1.0]);
    }

    #[test]
    fn budget_is_enforced() {
        let h = FnObjective(|_: &[f64]| 0.0);
        let g = GridSpec::new(vec![0.0; 3], vec![1.0; 3], 101).with_budget(1000);
        assert!(matches!(grid_argmin(&h, &g), Err(Error::GridBudgetExceeded { .. })));
    }

    #[test]
    fn fd_of_square_and_linear() {
        let f = FnObjective(|x: &[f64]| x[0] * x[0]);
        assert!((fd_gradient(&f, &[1.0], 1e-5).unwrap()[0] - 2.0).abs() < 1e-8);
        let c = [0.5, -3.0, 2.0];
        let f = FnObjective(move |x: &[f64]| linalg::dot(&c, x));
        let g = fd_gradient(&f, &[0.3, 0.1, -0.2], 1e-5).unwrap();
        assert!(linalg::dist(&g, &c) < 1e-9);
    }

    #[test]
    fn fd_stencil_outside_domain() {
        let f = FnObjective(|x: &[f64]| if x[0] >= 0.0 { x[0] } else { f64::INFINITY });
        assert_eq!(fd_gradient(&f, &[0.0], 1e-5).unwrap_err(), Error::StencilLeavesDomain);
    }

    #[test]
    fn eigen_classification() {
        let r = symmetric_eigen(&Matrix::identity(3)).unwrap();
        assert_eq!((r.min_eigenvalue, r.max_eigenvalue, r.definiteness), (1.0, 1.0, Definiteness::PositiveDefinite));
        assert_eq!(symmetric_eigen(&Matrix::diag(&[1.0, -1.0])).unwrap().definiteness, Definiteness::Indefinite);
        let r = symmetric_eigen(&Matrix::diag(&[0.0, 2.0])).unwrap();
        assert_eq!(r.definiteness, Definiteness::PositiveSemidefinite);
        assert_eq!(r.min_eigenvalue, 0.0);
        assert_eq!(symmetric_eigen(&Matrix::diag(&[-1.0, -2.0])).unwrap().definiteness, Definiteness::NegativeDefinite);
        assert_eq!(symmetric_eigen(&Matrix::diag(&[0.0, -2.0])).unwrap().definiteness, Definiteness::NegativeSemidefinite);
        assert!(matches!(symmetric_eigen(&Matrix::zeros(2, 3)), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn convexity_of_square() {
        let f = FnObjective(|x: &[f64]| x[0] * x[0]);
        let region = NeighborhoodSpec::new(vec![0.0], 1.0, 21);
        assert!(sampled_convexity(&f, &region, 2.0, 500).unwrap().is_holds());
        assert!(sampled_convexity(&f, &region, 2.5, 500).unwrap().is_fails());
        let k = estimate_convexity_modulus(&f, &region, 2000).unwrap();
        assert!((k - 2.0).abs() < 1e-8);
    }

    #[test]
    fn l0_is_not_locally_convex() {
        let f = crate::gallery::l0();
        let region = NeighborhoodSpec::new(vec![0.0], 1.0, 21);
        let v = sampled_convexity(&f, &region, 0.0, 2000).unwrap();
        assert!(v.is_fails());
        let w = v.witness.unwrap();
        let (x, y, t) = (w.get("x").unwrap(), w.get("y").unwrap(), w.get("lambda").unwrap()[0]);
        // one endpoint at the origin, the midpoint off it
        assert!(x[0] == 0.0 || y[0] == 0.0 || (x[0] < 0.0 && y[0] > 0.0));
        let (gap, tol) = convexity_gap(&f, x, y, t, 0.0).unwrap().unwrap();
        assert!(gap < -tol);
    }
}
