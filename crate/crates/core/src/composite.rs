//! Composite models `φ(x) = φ₀(x) + ψ(g(x))` with `g` smooth and `ψ` given by
//! membership oracles: multipliers, first- and second-order qualification
//! conditions and the full-rank second-order sufficiency test.

use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{sample_neighborhood, unit_directions, NeighborhoodSpec, Verdict, Witness};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::nlp::SmoothFn;
use crate::polyhedral::{self, PolyhedralSignature, POSITIVE_TOL};

/// Relative singular-value threshold for the full-rank test.
pub const RANK_TOL: f64 = 1e-8;
/// Residual tolerance of the multiplier system.
pub const MULTIPLIER_TOL: f64 = 1e-6;
/// Largest number of active inequalities handled by the FOQC enumeration.
pub const FOQC_MAX_ROWS: usize = 20;

/// Membership oracles for the outer function `ψ: ℝᵐ → (−∞, +∞]`.
pub trait PsiOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// `y ∈ ∂ψ(z)`.
    fn subgradient(&self, z: &[f64], y: &[f64]) -> Result<bool>;

    /// `y ∈ ∂^∞ψ(z)`.
    fn singular(&self, _z: &[f64], _y: &[f64]) -> Result<bool> {
        Err(Error::NoSingularOracle)
    }

    /// `u ∈ ∂²ψ(z, y)(v)`.
    fn second_order(&self, _z: &[f64], _y: &[f64], _v: &[f64], _u: &[f64]) -> Result<bool> {
        Err(Error::NoSecondOrderOracle)
    }

    /// The signature when `ψ` is the indicator of the polyhedral set of
    /// module [`polyhedral`].
    fn polyhedral(&self) -> Option<PolyhedralSignature> {
        None
    }
}

/// `ψ = δ_Ω` with `Ω = ℝ₋ˢ × {0}^{m−s}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolyhedralPsi {
    sig: PolyhedralSignature,
}

impl PolyhedralPsi {
    pub fn new(sig: PolyhedralSignature) -> Self {
        PolyhedralPsi { sig }
    }
}

impl PsiOracle for PolyhedralPsi {
    fn dim(&self) -> usize {
        self.sig.m()
    }

    fn subgradient(&self, z: &[f64], y: &[f64]) -> Result<bool> {
        match polyhedral::normal_cone_membership(&self.sig, z, y) {
            Err(Error::NotInOmega) => Ok(false),
            r => r,
        }
    }

    fn singular(&self, z: &[f64], y: &[f64]) -> Result<bool> {
        match polyhedral::singular_membership(&self.sig, z, y) {
            Err(Error::NotInOmega) => Ok(false),
            r => r,
        }
    }

    fn second_order(&self, z: &[f64], y: &[f64], v: &[f64], u: &[f64]) -> Result<bool> {
        polyhedral::second_order_membership(&self.sig, z, y, v, u)
    }

    fn polyhedral(&self) -> Option<PolyhedralSignature> {
        Some(self.sig)
    }
}

#[derive(Clone)]
pub struct CompositeProblem {
    n: usize,
    phi0: SmoothFn,
    g: Vec<SmoothFn>,
    psi: Arc<dyn PsiOracle>,
    open_assumed: bool,
}

impl core::fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("n", &self.n)
            .field("m", &self.g.len())
            .field("polyhedral", &self.psi.polyhedral())
            .finish()
    }
}

impl CompositeProblem {
    pub fn new(n: usize, phi0: SmoothFn, g: Vec<SmoothFn>, psi: Arc<dyn PsiOracle>) -> Result<Self> {
        if psi.dim() != g.len() {
            return Err(Error::DimMismatch { expected: psi.dim(), found: g.len() });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".to_string()));
        }
        Ok(CompositeProblem { n, phi0, g, psi, open_assumed: false })
    }

    /// Records the caller's assertion that `g` is open around the reference
    /// point. It is never inferred.
    pub fn with_open_assumed(mut self, open: bool) -> Self {
        self.open_assumed = open;
        self
    }

    pub fn open_assumed(&self) -> bool {
        self.open_assumed
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    pub fn phi0(&self) -> &SmoothFn {
        &self.phi0
    }

    pub fn psi(&self) -> &dyn PsiOracle {
        &*self.psi
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimMismatch { expected: self.n, found: x.len() });
        }
        Ok(())
    }

    pub fn g(&self, x: &[f64]) -> Vec<f64> {
        self.g.iter().map(|c| c.value(x)).collect()
    }

    /// `∇g(x)`, an `m × n` matrix.
    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        if self.g.is_empty() {
            return Matrix::zeros(0, self.n);
        }
        Matrix::from_rows(&self.g.iter().map(|c| c.gradient(x)).collect::<Vec<_>>())
    }

    /// `∇²φ₀(x) + Σ y_i ∇²g_i(x)`.
    pub fn hessian(&self, x: &[f64], y: &[f64]) -> Matrix {
        let mut h = self.phi0.hessian(x);
        for (yi, c) in y.iter().zip(&self.g) {
            if *yi != 0.0 {
                h.add_scaled(&c.hessian(x), *yi);
            }
        }
        h.symmetrized()
    }

    /// Compares `∇g` against central differences (relative `1e-4`).
    pub fn check_jacobian(&self, points: &[Vec<f64>]) -> Result<Verdict> {
        let tag = "jacobian-fd";
        let h = 1e-6;
        for x in points {
            self.check_x(x)?;
            let j = self.jacobian(x);
            for k in 0..self.n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                for (i, c) in self.g.iter().enumerate() {
                    let fd = (c.value(&xp) - c.value(&xm)) / (2.0 * h);
                    let err = (fd - j[(i, k)]).abs();
                    if err > 1e-4 * (1.0 + fd.abs()) {
                        let w = Witness::new(err).with("x", x.clone()).scalar("row", i as f64).scalar("col", k as f64);
                        return Ok(Verdict::fails(tag, w));
                    }
                }
            }
        }
        Ok(Verdict::holds(tag).with_samples(points.len()).with_tol("relative", 1e-4))
    }
}

/// `rank ∇g(x) = m`, decided by `σ_min > 1e-8 σ_max`. The witness is a unit
/// `y` with `∇g(x)ᵀy ≈ 0`.
pub fn jacobian_full_rank(cp: &CompositeProblem, x: &[f64]) -> Result<Verdict> {
    let tag = "jacobian-full-rank";
    cp.check_x(x)?;
    let m = cp.m();
    if m == 0 {
        return Ok(Verdict::holds(tag).with_note("no outer components"));
    }
    let j = cp.jacobian(x);
    let sv = linalg::singular_values(&j);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = if m > cp.n { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
    if smax > 0.0 && linalg::rank(&j, RANK_TOL) == m {
        return Ok(Verdict::holds(tag).with_metric("sigma_min", smin).with_tol("rank_relative", RANK_TOL));
    }
    let y = linalg::nullspace(&j.transpose(), RANK_TOL).into_iter().next().unwrap_or_else(|| linalg::unit(m, 0));
    let w = Witness::new(linalg::norm(&j.transpose().mul_vec(&y)).max(f64::MIN_POSITIVE)).with("y", y);
    Ok(Verdict::fails(tag, w).with_metric("sigma_min", smin).with_tol("rank_relative", RANK_TOL))
}

/// `Λ(x, v)`: a particular solution, and when it is not unique the
/// orthonormal directions along which it can move.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSet {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub multipliers: Vec<Vec<f64>>,
    pub unique: bool,
    pub nullspace: Vec<Vec<f64>>,
}

impl MultiplierSet {
    pub fn y(&self) -> &[f64] {
        &self.multipliers[0]
    }
}

/// Indices the multiplier may be supported on: all of them, or for the
/// polyhedral `ψ` the active inequalities and the equalities.
fn support(cp: &CompositeProblem, z: &[f64]) -> Result<Vec<usize>> {
    let Some(sig) = cp.psi.polyhedral() else {
        return Ok((0..cp.m()).collect());
    };
    if !polyhedral::in_omega(&sig, z)? {
        let (index, value) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, if sig.is_inequality(i) { *v } else { v.abs() }))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        return Err(Error::InfeasiblePoint { index, value });
    }
    let band = polyhedral::ACTIVITY_TOL * (1.0 + linalg::norm(z));
    Ok((0..sig.m()).filter(|&i| !sig.is_inequality(i) || z[i].abs() <= band).collect())
}

/// Solves `∇g(x)ᵀy = v − ∇φ₀(x)` by least squares on the admissible support
/// and validates `y ∈ ∂ψ(g(x))`. Without uniqueness the particular
/// minimum-norm solution is returned with `unique = false`, unvalidated.
pub fn solve_multipliers(cp: &CompositeProblem, x: &[f64], v: &[f64]) -> Result<MultiplierSet> {
    cp.check_x(x)?;
    if v.len() != cp.n {
        return Err(Error::DimMismatch { expected: cp.n, found: v.len() });
    }
    let z = cp.g(x);
    let idx = support(cp, &z)?;
    let rhs = linalg::sub(v, &cp.phi0.gradient(x));
    let m = cp.m();
    let mut y = vec![0.0; m];
    let mut nullspace = Vec::new();
    let residual = if idx.is_empty() {
        linalg::norm(&rhs)
    } else {
        let j = cp.jacobian(x);
        let cols: Vec<Vec<f64>> = idx.iter().map(|&i| j.row(i).to_vec()).collect();
        let a = Matrix::from_columns(cp.n, &cols);
        let (ya, res) = linalg::lstsq(&a, &rhs, 1e-12);
        for (k, &i) in idx.iter().enumerate() {
            y[i] = ya[k];
        }
        for d in linalg::nullspace(&a, RANK_TOL) {
            let mut full = vec![0.0; m];
            for (k, &i) in idx.iter().enumerate() {
                full[i] = d[k];
            }
            nullspace.push(full);
        }
        res
    };
    if residual > MULTIPLIER_TOL * (1.0 + linalg::norm(&rhs)) {
        return Err(Error::Infeasible { residual });
    }
    let unique = nullspace.is_empty();
    if unique && !cp.psi.subgradient(&z, &y)? {
        return Err(Error::Infeasible { residual: linalg::norm(&y) });
    }
    Ok(MultiplierSet { x: x.to_vec(), v: v.to_vec(), multipliers: vec![y], unique, nullspace })
}

fn k_subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    rec(0, k, size, &mut cur, &mut out);
    out
}

/// Nonzero `c` with `B c ≥ 0`, or `None` when the cone is `{0}`. A nonzero
/// cone either has a lineality direction (`ker B`) or an extreme ray cut
/// out by `d − 1` independent tight rows.
fn cone_direction(b: &[Vec<f64>], d: usize) -> Option<Vec<f64>> {
    if b.is_empty() {
        return Some(linalg::unit(d, 0));
    }
    let bm = Matrix::from_rows(b);
    if let Some(c) = linalg::nullspace(&bm, RANK_TOL).into_iter().next() {
        return Some(c);
    }
    let scale = b.iter().map(|r| linalg::norm(r)).fold(0.0, f64::max);
    for sub in k_subsets(b.len(), d - 1) {
        let rows: Vec<Vec<f64>> = sub.iter().map(|&k| b[k].clone()).collect();
        let ray = if rows.is_empty() {
            vec![linalg::unit(d, 0)]
        } else {
            linalg::nullspace(&Matrix::from_rows(&rows), RANK_TOL)
        };
        if ray.len() != 1 {
            continue;
        }
        for sign in [1.0, -1.0] {
            let r = linalg::scale(&ray[0], sign);
            if b.iter().all(|row| linalg::dot(row, &r) >= -1e-10 * scale) {
                return Some(r);
            }
        }
    }
    None
}

/// First-order qualification: `∂^∞ψ(g(x)) ∩ ker ∇g(x)ᵀ = {0}`. For the
/// polyhedral `ψ` the singular cone is sign-constrained on the active
/// inequalities, and the intersection is searched by extreme rays of
/// `{c : (Nc)_i ≥ 0}` with `N` a basis of the kernel restricted to the
/// support. Other `ψ` need a polyhedral description.
pub fn foqc_check(cp: &CompositeProblem, x: &[f64]) -> Result<Verdict> {
    let tag = "foqc";
    cp.check_x(x)?;
    let z = cp.g(x);
    // fail early when the oracle is missing
    cp.psi.singular(&z, &vec![0.0; cp.m()])?;
    let Some(sig) = cp.psi.polyhedral() else {
        return Err(Error::Unsupported("FOQC needs a polyhedral description of the singular cone".to_string()));
    };
    let idx = support(cp, &z)?;
    if idx.is_empty() {
        return Ok(Verdict::holds(tag).with_note("no active components"));
    }
    let ineq: Vec<usize> = (0..idx.len()).filter(|&k| sig.is_inequality(idx[k])).collect();
    if ineq.len() > FOQC_MAX_ROWS {
        return Err(Error::Unsupported(format!("FOQC enumeration is limited to {FOQC_MAX_ROWS} active inequalities")));
    }
    let j = cp.jacobian(x);
    let cols: Vec<Vec<f64>> = idx.iter().map(|&i| j.row(i).to_vec()).collect();
    let n_basis = linalg::nullspace(&Matrix::from_columns(cp.n, &cols), RANK_TOL);
    if n_basis.is_empty() {
        return Ok(Verdict::holds(tag).with_samples(0));
    }
    let d = n_basis.len();
    let b: Vec<Vec<f64>> = ineq.iter().map(|&k| n_basis.iter().map(|col| col[k]).collect()).collect();
    match cone_direction(&b, d) {
        None => Ok(Verdict::holds(tag).with_samples(d)),
        Some(c) => {
            let mut u = vec![0.0; cp.m()];
            for (k, &i) in idx.iter().enumerate() {
                u[i] = n_basis.iter().zip(&c).map(|(col, ck)| col[k] * ck).sum();
            }
            let top = linalg::norm_inf(&u);
            let u = linalg::scale(&u, 1.0 / top);
            let resid = linalg::norm(&j.transpose().mul_vec(&u));
            Ok(Verdict::fails(tag, Witness::new(resid.max(f64::MIN_POSITIVE)).with("u", u)).with_samples(d))
        }
    }
}

/// Coordinates `j` with `e_j ∈ ∂²ψ(z, y)(0)`. The polyhedral second-order
/// set at `v = 0` is the coordinate subspace they span.
fn free_coordinates(cp: &CompositeProblem, z: &[f64], y: &[f64]) -> Result<Vec<usize>> {
    let m = cp.m();
    let zero = vec![0.0; m];
    let mut free = Vec::new();
    for j in 0..m {
        if cp.psi.second_order(z, y, &zero, &linalg::unit(m, j))? {
            free.push(j);
        }
    }
    Ok(free)
}

/// Second-order qualification: `∂²ψ(g(x), y)(0) ∩ ker ∇g(x)ᵀ = {0}`, probed
/// through the oracle one coordinate at a time and decided by Gram–Schmidt
/// on the matching rows of `∇g(x)`.
pub fn soqc_check(cp: &CompositeProblem, x: &[f64], y: &[f64]) -> Result<Verdict> {
    let tag = "soqc";
    cp.check_x(x)?;
    if y.len() != cp.m() {
        return Err(Error::DimMismatch { expected: cp.m(), found: y.len() });
    }
    let z = cp.g(x);
    let free = free_coordinates(cp, &z, y)?;
    let j = cp.jacobian(x);
    let rows: Vec<Vec<f64>> = free.iter().map(|&i| j.row(i).to_vec()).collect();
    match linalg::rank_gram_schmidt(&rows, RANK_TOL) {
        (_, None) => Ok(Verdict::holds(tag).with_samples(free.len())),
        (_, Some(c)) => {
            let mut u = vec![0.0; cp.m()];
            for (k, &i) in free.iter().enumerate() {
                u[i] = c[k];
            }
            let top = linalg::norm_inf(&u);
            let u = linalg::scale(&u, 1.0 / top);
            let resid = linalg::norm(&j.transpose().mul_vec(&u));
            Ok(Verdict::fails(tag, Witness::new(resid.max(f64::MIN_POSITIVE)).with("u", u)).with_samples(free.len()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SufficiencyMode {
    /// Strict positivity at `(x̄, 0, ȳ)` only.
    Pointbased,
    /// `≥ modulus ‖w‖²` at sampled graph points near `(x̄, 0)`.
    Neighborhood,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyConfig {
    pub mode: SufficiencyMode,
    pub w_samples: usize,
    /// Magnitude of the per-component extreme `u` values.
    pub u_budget: f64,
    /// Radius of the `v` ball; defaults to the region radius.
    pub v_radius: Option<f64>,
    /// Multiplier perturbations per base point in neighborhood mode.
    pub multiplier_samples: usize,
}

impl Default for SufficiencyConfig {
    fn default() -> Self {
        SufficiencyConfig {
            mode: SufficiencyMode::Pointbased,
            w_samples: 32,
            u_budget: 10.0,
            v_radius: None,
            multiplier_samples: 5,
        }
    }
}

/// Components where `∂²ψ(z, y)(t e_i)` is empty for `t ≠ 0` (with `u = 0`
/// probed); directions `w` must keep `⟨∇g_i(x), w⟩ = 0` there.
fn locked_components(cp: &CompositeProblem, z: &[f64], y: &[f64]) -> Result<Vec<usize>> {
    let m = cp.m();
    let zero = vec![0.0; m];
    let mut locked = Vec::new();
    for i in 0..m {
        let e = linalg::unit(m, i);
        let en = linalg::scale(&e, -1.0);
        if !cp.psi.second_order(z, y, &e, &zero)? && !cp.psi.second_order(z, y, &en, &zero)? {
            locked.push(i);
        }
    }
    Ok(locked)
}

/// Smallest value of `⟨u, d⟩` over the admissible extreme `u`
/// (`u_i ∈ {0, ±budget}`), `None` when no candidate is admissible.
fn min_bilinear(cp: &CompositeProblem, z: &[f64], y: &[f64], d: &[f64], budget: f64) -> Result<Option<(f64, Vec<f64>)>> {
    let m = cp.m();
    if m > 10 {
        return Err(Error::Unsupported("u enumeration is limited to m <= 10".to_string()));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(m as u32);
    for code in 0..total {
        let mut c = code;
        let u: Vec<f64> = (0..m)
            .map(|_| {
                let t = c % 3;
                c /= 3;
                [0.0, budget, -budget][t]
            })
            .collect();
        if !cp.psi.second_order(z, y, d, &u)? {
            continue;
        }
        let val = linalg::dot(&u, d);
        if best.as_ref().map_or(true, |(b, _)| val < *b) {
            best = Some((val, u));
        }
    }
    Ok(best)
}

/// Candidate directions `w`: a basis of the unlocked subspace, spread
/// combinations of it, and the minimising eigenvector of the reduced
/// quadratic form.
fn direction_samples(basis: &[Vec<f64>], h: &Matrix, n: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    let k = basis.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let b = Matrix::from_columns(n, basis);
    let mut out: Vec<Vec<f64>> = basis.to_vec();
    for d in unit_directions(k, count) {
        let w = b.mul_vec(&d);
        let nw = linalg::norm(&w);
        if nw > 0.0 {
            out.push(linalg::scale(&w, 1.0 / nw));
        }
    }
    let r = b.transpose().mul(h).mul(&b);
    let e = linalg::sym_eigen(&r)?;
    let w = b.mul_vec(&e.vector(0));
    out.push(linalg::scale(&w, 1.0 / linalg::norm(&w)));
    Ok(out)
}

struct Probe<'a> {
    x: &'a [f64],
    v: &'a [f64],
    y: &'a [f64],
}

/// Worst `Q(w) + ⟨u, ∇g w⟩ − threshold‖w‖²` over the sampled `w`, and its witness.
fn probe_point(cp: &CompositeProblem, pr: &Probe<'_>, threshold: f64, cfg: &SufficiencyConfig) -> Result<Option<(f64, Witness)>> {
    let z = cp.g(pr.x);
    let locked = locked_components(cp, &z, pr.y)?;
    let j = cp.jacobian(pr.x);
    let basis = if locked.is_empty() {
        (0..cp.n).map(|k| linalg::unit(cp.n, k)).collect()
    } else {
        linalg::nullspace(&Matrix::from_rows(&locked.iter().map(|&i| j.row(i).to_vec()).collect::<Vec<_>>()), RANK_TOL)
    };
    let h = cp.hessian(pr.x, pr.y);
    let mut worst: Option<(f64, Witness)> = None;
    for w in direction_samples(&basis, &h, cp.n, cfg.w_samples)? {
        let d = j.mul_vec(&w);
        let Some((bil, u)) = min_bilinear(cp, &z, pr.y, &d, cfg.u_budget)? else {
            continue;
        };
        let val = h.quad_form(&w) + bil - threshold * linalg::norm_sq(&w);
        if worst.as_ref().map_or(true, |(b, _)| val < *b) {
            let wit = Witness::new(-val)
                .with("x", pr.x.to_vec())
                .with("v", pr.v.to_vec())
                .with("y", pr.y.to_vec())
                .with("w", w)
                .with("u", u);
            worst = Some((val, wit));
        }
    }
    Ok(worst)
}

fn project_onto(cp: &CompositeProblem, x: &[f64], rows: &[usize]) -> Vec<f64> {
    let mut z = x.to_vec();
    if rows.is_empty() {
        return z;
    }
    for _ in 0..30 {
        let r: Vec<f64> = rows.iter().map(|&i| cp.g[i].value(&z)).collect();
        if linalg::norm(&r) <= 1e-14 * (1.0 + linalg::norm(&z)) {
            break;
        }
        let jm = Matrix::from_rows(&rows.iter().map(|&i| cp.g[i].gradient(&z)).collect::<Vec<_>>());
        let (d, _) = linalg::lstsq(&jm, &r, 1e-12);
        z = linalg::sub(&z, &d);
    }
    z
}

/// Second-order variational sufficiency under full rank of `∇g`:
/// `⟨∇²φ₀(x)w, w⟩ + ⟨∇²⟨y, g⟩(x)w, w⟩ + ⟨u, ∇g(x)w⟩` is tested against
/// `modulus ‖w‖²` for `u ∈ ∂²ψ(g(x), y)(∇g(x)w)`. Pointbased mode asks for
/// strict positivity at `(x̄, 0, ȳ)` only. Without full rank the verdict is
/// labelled as a sufficient condition only.
pub fn full_rank_sufficiency(
    cp: &CompositeProblem,
    x_bar: &[f64],
    modulus: f64,
    region: &NeighborhoodSpec,
    cfg: &SufficiencyConfig,
) -> Result<Verdict> {
    cp.check_x(x_bar)?;
    let zero = vec![0.0; cp.n];
    let stat = solve_multipliers(cp, x_bar, &zero)?;
    let rank = jacobian_full_rank(cp, x_bar)?;
    let label = |v: Verdict| {
        let v = v.with_sub(rank.clone()).with_tol("u_budget", cfg.u_budget).with_tol("pd_threshold", crate::nlp::PD_TOL);
        if rank.is_holds() {
            v
        } else {
            v.with_note("sufficiency-only: Jacobian is not of full rank")
        }
    };
    let y_bar = stat.y().to_vec();
    match cfg.mode {
        SufficiencyMode::Pointbased => {
            let tag = "pointbased-sufficiency";
            let pr = Probe { x: x_bar, v: &zero, y: &y_bar };
            match probe_point(cp, &pr, 0.0, cfg)? {
                None => Ok(label(Verdict::holds(tag).with_note("vacuous: no admissible direction"))),
                Some((val, wit)) => {
                    if val > crate::nlp::PD_TOL {
                        Ok(label(Verdict::holds(tag).with_metric("min_value", val).with_samples(cfg.w_samples)))
                    } else {
                        Ok(label(Verdict::fails(tag, wit).with_metric("min_value", val)))
                    }
                }
            }
        }
        SufficiencyMode::Neighborhood => {
            let tag = if modulus > 0.0 { "neighborhood-strong-sufficiency" } else { "neighborhood-sufficiency" };
            let v_radius = cfg.v_radius.unwrap_or(region.radius);
            let active = support(cp, &cp.g(x_bar))?;
            let mut xs = sample_neighborhood(region)?;
            xs.push(x_bar.to_vec());
            let projected: Vec<Vec<f64>> = xs.iter().map(|x| project_onto(cp, x, &active)).collect();
            let pert = sample_neighborhood(&NeighborhoodSpec::new(vec![0.0; cp.m().max(1)], v_radius, cfg.multiplier_samples.max(1)))?;
            let mut skipped = 0usize;
            let mut used = 0usize;
            let mut min_val = f64::INFINITY;
            for x in xs.iter().chain(projected.iter()) {
                if linalg::dist(x, &region.center) > region.radius * (1.0 + 1e-12) {
                    skipped += 1;
                    continue;
                }
                let z = cp.g(x);
                let idx = match support(cp, &z) {
                    Ok(i) => i,
                    Err(Error::InfeasiblePoint { .. }) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                for d in core::iter::once(vec![0.0; cp.m().max(1)]).chain(pert.iter().cloned()) {
                    let mut y = vec![0.0; cp.m()];
                    for &i in &idx {
                        y[i] = y_bar[i] + d[i.min(d.len() - 1)];
                    }
                    if let Some(sig) = cp.psi.polyhedral() {
                        for (i, yi) in y.iter_mut().enumerate() {
                            if sig.is_inequality(i) && *yi < 0.0 {
                                *yi = 0.0;
                            }
                        }
                    }
                    let j = cp.jacobian(x);
                    let v = linalg::add(&cp.phi0.gradient(x), &j.transpose().mul_vec(&y));
                    if linalg::norm(&v) > v_radius {
                        skipped += 1;
                        continue;
                    }
                    let ms = match solve_multipliers(cp, x, &v) {
                        Ok(ms) if ms.unique => ms,
                        Ok(_) | Err(Error::Infeasible { .. }) => {
                            skipped += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    used += 1;
                    let pr = Probe { x, v: &v, y: ms.y() };
                    if let Some((val, wit)) = probe_point(cp, &pr, modulus, cfg)? {
                        min_val = min_val.min(val);
                        if val < -1e-9 * (1.0 + modulus) {
                            return Ok(label(
                                Verdict::fails(tag, wit)
                                    .with_metric("modulus", modulus)
                                    .with_metric("skipped", skipped as f64)
                                    .with_samples(used),
                            ));
                        }
                    }
                }
            }
            Ok(label(
                Verdict::holds(tag)
                    .with_metric("modulus", modulus)
                    .with_metric("min_margin", min_val)
                    .with_metric("skipped", skipped as f64)
                    .with_tol("v_radius", v_radius)
                    .with_samples(used),
            ))
        }
    }
}

/// `y ≥ 0` check used by tests and callers that build multipliers by hand.
pub fn sign_feasible(sig: &PolyhedralSignature, y: &[f64]) -> bool {
    y.iter().enumerate().all(|(i, yi)| !sig.is_inequality(i) || *yi >= -POSITIVE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::NlpProblem;
    use crate::poly::Polynomial;

    fn lin(c: &[f64]) -> SmoothFn {
        SmoothFn::affine("lin", c.to_vec(), 0.0)
    }

    fn poly(n: usize, pairs: &[(f64, &[u32])]) -> SmoothFn {
        SmoothFn::from_poly("p", Polynomial::from_pairs(n, pairs).unwrap())
    }

    fn polyhedral_cp(n: usize, s: usize, phi0: SmoothFn, g: Vec<SmoothFn>) -> CompositeProblem {
        let sig = PolyhedralSignature::new(s, g.len()).unwrap();
        CompositeProblem::new(n, phi0, g, Arc::new(PolyhedralPsi::new(sig))).unwrap()
    }

    #[test]
    fn full_rank_examples() {
        let zero = poly(2, &[]);
        let cp = polyhedral_cp(2, 2, zero.clone(), vec![lin(&[1.0, 0.0]), lin(&[0.0, 1.0])]);
        assert!(jacobian_full_rank(&cp, &[0.3, -0.2]).unwrap().is_holds());
        let cp = polyhedral_cp(2, 2, zero, vec![lin(&[1.0, 0.0]), lin(&[1.0, 0.0])]);
        assert!(jacobian_full_rank(&cp, &[0.0, 0.0]).unwrap().is_fails());
        let cp = polyhedral_cp(1, 1, poly(1, &[]), vec![poly(1, &[(1.0, &[2])])]);
        assert!(jacobian_full_rank(&cp, &[0.0]).unwrap().is_fails());
    }

    #[test]
    fn multiplier_examples() {
        let cp = polyhedral_cp(1, 1, poly(1, &[(1.0, &[2])]), vec![lin(&[1.0])]);
        let ms = solve_multipliers(&cp, &[0.0], &[0.0]).unwrap();
        assert!(ms.unique);
        assert_eq!(ms.y(), [0.0]);
        let cp = polyhedral_cp(1, 1, poly(1, &[(-1.0, &[1])]), vec![lin(&[1.0])]);
        assert_eq!(solve_multipliers(&cp, &[0.0], &[0.0]).unwrap().y(), [1.0]);
        let cp = polyhedral_cp(1, 1, poly(1, &[]), vec![lin(&[1.0])]);
        assert!(matches!(solve_multipliers(&cp, &[0.0], &[-1.0]), Err(Error::Infeasible { .. })));
        let cp = polyhedral_cp(1, 2, poly(1, &[(-1.0, &[1])]), vec![lin(&[1.0]), lin(&[1.0])]);
        let ms = solve_multipliers(&cp, &[0.0], &[0.0]).unwrap();
        assert!(!ms.unique);
        assert_eq!(ms.nullspace.len(), 1);
    }

    #[test]
    fn foqc_examples() {
        let zero = poly(2, &[]);
        let cp = polyhedral_cp(2, 1, zero.clone(), vec![lin(&[1.0, 0.0])]);
        assert!(foqc_check(&cp, &[0.0, 0.0]).unwrap().is_holds());
        let cp = polyhedral_cp(2, 2, zero.clone(), vec![lin(&[1.0, 0.0]), lin(&[-1.0, 0.0])]);
        let v = foqc_check(&cp, &[0.0, 0.0]).unwrap();
        assert!(v.is_fails());
        let u = v.witness.unwrap().get("u").unwrap().to_vec();
        assert!((u[0] - 1.0).abs() < 1e-12 && (u[1] - 1.0).abs() < 1e-12);
        // inequality x1 <= 0 then equality x1 = 0
        let cp = polyhedral_cp(2, 1, zero, vec![lin(&[1.0, 0.0]), lin(&[1.0, 0.0])]);
        let v = foqc_check(&cp, &[0.0, 0.0]).unwrap();
        assert!(v.is_fails());
        let u = v.witness.unwrap().get("u").unwrap().to_vec();
        assert!(u[0] >= 0.0 && (u[0] + u[1]).abs() < 1e-12 && u[0] > 0.0);
    }

    #[test]
    fn foqc_inactive_components_do_not_count() {
        let cp = polyhedral_cp(1, 2, poly(1, &[]), vec![lin(&[1.0]), SmoothFn::affine("b", vec![-1.0], -1.0)]);
        assert!(foqc_check(&cp, &[0.0]).unwrap().is_holds());
    }

    #[test]
    fn soqc_examples() {
        let zero = poly(2, &[]);
        let cp = polyhedral_cp(2, 1, zero.clone(), vec![lin(&[1.0, 0.0])]);
        assert!(soqc_check(&cp, &[0.0, 0.0], &[0.0]).unwrap().is_holds());
        let cp = polyhedral_cp(2, 2, zero, vec![lin(&[1.0, 0.0]), lin(&[1.0, 0.0])]);
        let v = soqc_check(&cp, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(v.is_fails());
        assert!(foqc_check(&cp, &[0.0, 0.0]).unwrap().is_holds() || v.is_fails());
    }

    #[test]
    fn missing_oracles_are_reported() {
        struct Bare;
        impl PsiOracle for Bare {
            fn dim(&self) -> usize {
                1
            }
            fn subgradient(&self, _z: &[f64], _y: &[f64]) -> Result<bool> {
                Ok(true)
            }
        }
        let cp = CompositeProblem::new(1, poly(1, &[]), vec![lin(&[1.0])], Arc::new(Bare)).unwrap();
        assert_eq!(foqc_check(&cp, &[0.0]).unwrap_err(), Error::NoSingularOracle);
        assert_eq!(soqc_check(&cp, &[0.0], &[0.0]).unwrap_err(), Error::NoSecondOrderOracle);
    }

    #[test]
    fn pointbased_examples() {
        let region = NeighborhoodSpec::new(vec![0.0], 0.1, 11);
        let cfg = SufficiencyConfig::default();
        let cp = polyhedral_cp(1, 1, poly(1, &[(1.0, &[2])]), vec![lin(&[1.0])]);
        assert!(full_rank_sufficiency(&cp, &[0.0], 0.0, &region, &cfg).unwrap().is_holds());
        let cp = polyhedral_cp(1, 1, poly(1, &[(-1.0, &[2])]), vec![lin(&[1.0])]);
        let v = full_rank_sufficiency(&cp, &[0.0], 0.0, &region, &cfg).unwrap();
        assert!(v.is_fails());
        assert_eq!(v.witness.unwrap().get("w").unwrap(), [1.0]);
        let cp = polyhedral_cp(1, 1, poly(1, &[(-1.0, &[1])]), vec![lin(&[1.0])]);
        let v = full_rank_sufficiency(&cp, &[0.0], 0.0, &region, &cfg).unwrap();
        assert!(v.is_holds());
        assert!(v.notes.iter().any(|n| n.starts_with("vacuous")));
    }

    #[test]
    fn neighborhood_mode_and_modulus_monotonicity() {
        let region = NeighborhoodSpec::new(vec![0.0], 0.1, 11);
        let cfg = SufficiencyConfig { mode: SufficiencyMode::Neighborhood, ..SufficiencyConfig::default() };
        let cp = polyhedral_cp(1, 1, poly(1, &[(1.0, &[2])]), vec![lin(&[1.0])]);
        assert!(full_rank_sufficiency(&cp, &[0.0], 2.0, &region, &cfg).unwrap().is_holds());
        assert!(full_rank_sufficiency(&cp, &[0.0], 1.0, &region, &cfg).unwrap().is_holds());
        assert!(full_rank_sufficiency(&cp, &[0.0], 2.5, &region, &cfg).unwrap().is_fails());
    }

    #[test]
    fn nlp_conversion_keeps_structure() {
        let p = NlpProblem::new(1, 1, vec![poly(1, &[(1.0, &[2])]), lin(&[1.0])]).unwrap();
        let cp = p.to_composite().unwrap();
        assert_eq!(cp.m(), 1);
        assert!(cp.psi().polyhedral().is_some());
        assert!(sign_feasible(&cp.psi().polyhedral().unwrap(), &[0.5]));
    }
}
