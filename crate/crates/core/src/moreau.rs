//! Moreau envelopes, proximal mappings, prox-boundedness and prox-regularity
//! probes, quadratic shifts and the shift/envelope identities.

use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::domain::{
    unit_directions, ExtendedFn, GraphRequest, NeighborhoodSpec, Objective, RefPair, SubgradientGraph, Verdict,
    Witness,
};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::oracles::{self, GridSpec};
use crate::varconv::SubgradGraphSample;

/// Descending λ schedule for envelope-based checks.
pub const LAMBDA_SCHEDULE: [f64; 4] = [0.5, 0.25, 0.1, 0.05];

/// Distance between jittered grid minimisers above which the prox is
/// reported as multivalued.
pub const MULTIVALUED_TOL: f64 = 1e-4;

/// Grid settings for the prox subproblem. The box is centred at the query
/// point and grown when the minimiser lands on its boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxGridConfig {
    pub half_width: f64,
    pub points_per_axis: usize,
    pub refine_rounds: usize,
    pub refine_shrink: f64,
    /// Number of ×4 box expansions before giving up with `UnboundedBelow`.
    pub expansions: usize,
}

impl ProxGridConfig {
    /// 401/61/21 points per axis in dimension 1/2/3, refined until the grid
    /// step is about `1e-9`.
    pub fn for_dim(n: usize) -> Result<Self> {
        let points_per_axis = match n {
            1 => 401,
            2 => 61,
            3 => 21,
            _ => return Err(Error::Unsupported(format!("grid prox needs dimension 1..=3, got {n}"))),
        };
        let half_width = 3.0;
        let refine_shrink = 0.2;
        let step0 = 2.0 * half_width / (points_per_axis - 1) as f64;
        let rounds = libm::ceil(libm::log(1e-9 / step0) / libm::log(refine_shrink)) as usize;
        Ok(ProxGridConfig { half_width, points_per_axis, refine_rounds: rounds, refine_shrink, expansions: 4 })
    }

    fn grid(&self, x: &[f64], half_width: f64) -> GridSpec {
        GridSpec::cube(x, half_width, self.points_per_axis)
            .with_rounds(self.refine_rounds)
            .with_shrink(self.refine_shrink)
    }
}

#[derive(Clone)]
pub enum ProxSolver {
    Grid(ProxGridConfig),
    /// Uses the analytic prox attached to the base function.
    Analytic,
}

/// `e_λφ` and `Prox_{λφ}` for a fixed `λ > 0`.
#[derive(Clone)]
pub struct EnvelopeHandle {
    base: ExtendedFn,
    lambda: f64,
    solver: ProxSolver,
}

struct ProxObjective<'a> {
    f: &'a ExtendedFn,
    x: &'a [f64],
    lambda: f64,
}

impl Objective for ProxObjective<'_> {
    fn eval(&self, y: &[f64]) -> Result<f64> {
        let fy = self.f.eval(y)?;
        if !fy.is_finite() {
            return Ok(fy);
        }
        Ok(fy + linalg::norm_sq(&linalg::sub(y, self.x)) / (2.0 * self.lambda))
    }
}

/// Width beyond which a flat stretch is not treated as rounding noise.
const PLATEAU_CAP: f64 = 1e-6;

/// Last `t ∈ [0, cap]` with `h(p + t d) ≤ level`, by doubling then bisection.
fn plateau_extent(h: &impl Objective, p: &[f64], axis: usize, dir: f64, level: f64) -> Result<Option<f64>> {
    let at = |t: f64| -> Result<bool> {
        let mut y = p.to_vec();
        y[axis] += dir * t;
        Ok(h.eval(&y)? <= level)
    };
    let mut inside = 0.0;
    let mut t = 1e-13;
    while at(t)? {
        inside = t;
        t *= 2.0;
        if t > PLATEAU_CAP {
            return Ok(None);
        }
    }
    let mut outside = t;
    for _ in 0..40 {
        let mid = 0.5 * (inside + outside);
        if at(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(Some(inside))
}

/// Moves a grid minimiser to the middle of the set of points whose value is
/// indistinguishable from the minimum in floating point, axis by axis. Near
/// a smooth minimum that set is symmetric around the true minimiser; at a
/// breakpoint it is not, and those coordinates stay put.
fn plateau_midpoint(h: &impl Objective, p: &[f64], v: f64, breaks: &[f64]) -> Result<Vec<f64>> {
    let level = v + 4.0 * f64::EPSILON * (1.0 + v.abs());
    let mut q = p.to_vec();
    for a in 0..q.len() {
        if breaks.contains(&q[a]) {
            continue;
        }
        let (Some(r), Some(l)) = (plateau_extent(h, &q, a, 1.0, level)?, plateau_extent(h, &q, a, -1.0, level)?) else {
            continue;
        };
        q[a] += 0.5 * (r - l);
    }
    Ok(q)
}

impl EnvelopeHandle {
    /// Grid solver sized for the dimension of the first query; `dim` is
    /// required when the base function has none.
    pub fn new(base: ExtendedFn, lambda: f64, dim: usize) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be positive".to_string()));
        }
        let n = base.dim().unwrap_or(dim);
        Ok(EnvelopeHandle { base, lambda, solver: ProxSolver::Grid(ProxGridConfig::for_dim(n)?) })
    }

    pub fn with_grid(mut self, cfg: ProxGridConfig) -> Self {
        self.solver = ProxSolver::Grid(cfg);
        self
    }

    /// Switches to the base function's analytic prox after checking it
    /// against the grid solver on `validation` points (tolerance `1e-5`).
    pub fn with_analytic(mut self, validation: &[Vec<f64>]) -> Result<Self> {
        let Some(p) = self.base.analytic_prox().cloned() else {
            return Err(Error::InvalidArgument(format!("`{}` has no analytic prox", self.base.name())));
        };
        for x in validation {
            let grid = self.prox(x)?;
            let exact = p(x, self.lambda);
            let d = linalg::dist(&grid, &exact);
            if d > 1e-5 {
                return Err(Error::InvalidArgument(format!(
                    "analytic prox disagrees with grid at {x:?} by {d:e}"
                )));
            }
        }
        self.solver = ProxSolver::Analytic;
        Ok(self)
    }

    pub fn base(&self) -> &ExtendedFn {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Minimiser and minimum value of `y ↦ φ(y) + ‖y − x‖²/(2λ)`.
    fn solve(&self, x: &[f64], offset: f64) -> Result<(Vec<f64>, f64)> {
        match &self.solver {
            ProxSolver::Analytic => {
                let p = (self.base.analytic_prox().expect("checked in with_analytic"))(x, self.lambda);
                let obj = ProxObjective { f: &self.base, x, lambda: self.lambda };
                let v = obj.eval(&p)?;
                Ok((p, v))
            }
            ProxSolver::Grid(cfg) => {
                let obj = ProxObjective { f: &self.base, x, lambda: self.lambda };
                // the query point is always a node, so e_λφ(x) ≤ φ(x) holds exactly
                let mut breaks = self.base.breakpoints().to_vec();
                breaks.extend_from_slice(x);
                let mut hw = cfg.half_width;
                let mut last_err = Error::AllInfinite;
                for _ in 0..=cfg.expansions {
                    match oracles::grid_argmin_with(&obj, &cfg.grid(x, hw), &breaks, offset) {
                        Ok((p, v)) => {
                            let on_edge = p.iter().zip(x).any(|(pi, xi)| (pi - xi).abs() >= hw * (1.0 - 1e-12));
                            if !on_edge {
                                let q = plateau_midpoint(&obj, &p, v, &breaks)?;
                                return Ok((q, v));
                            }
                            last_err = Error::UnboundedBelow;
                        }
                        Err(Error::AllInfinite) => last_err = Error::AllInfinite,
                        Err(e) => return Err(e),
                    }
                    hw *= 4.0;
                }
                Err(last_err)
            }
        }
    }

    /// `Prox_{λφ}(x)`, one global grid minimiser (ties as in `grid_argmin`).
    pub fn prox(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve(x, 0.0)?.0)
    }

    /// Prox with a second, jittered solve; fails with `ProxMultivalued` when
    /// the two minimisers are more than `MULTIVALUED_TOL` apart.
    pub fn prox_checked(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (p1, _) = self.solve(x, 0.0)?;
        if let ProxSolver::Grid(_) = self.solver {
            let (p2, _) = self.solve(x, 0.37)?;
            let d = linalg::dist(&p1, &p2);
            if d > MULTIVALUED_TOL {
                return Err(Error::ProxMultivalued { distance: d });
            }
        }
        Ok(p1)
    }

    /// `e_λφ(x) = φ(p) + ‖p − x‖²/(2λ)` at `p = Prox_{λφ}(x)`.
    pub fn envelope(&self, x: &[f64]) -> Result<f64> {
        Ok(self.solve(x, 0.0)?.1)
    }

    /// `(x − Prox_{λφ}(x))/λ`, after the multivaluedness probe.
    pub fn envelope_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.prox_checked(x)?;
        Ok(linalg::sub(x, &p).iter().map(|d| d / self.lambda).collect())
    }
}

impl Objective for EnvelopeHandle {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.envelope(x)
    }
}

/// Looks for `e_λφ = −∞` by minimising the prox objective at the centre of
/// `probe` over boxes growing by ×4. Sound only for failure.
pub fn is_prox_bounded(f: &ExtendedFn, lambda: f64, probe: &GridSpec) -> Result<Verdict> {
    let tag = "prox-boundedness";
    probe.validate()?;
    let x0: Vec<f64> = probe.lower.iter().zip(&probe.upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let hw0 = probe
        .lower
        .iter()
        .zip(&probe.upper)
        .map(|(l, u)| 0.5 * (u - l))
        .fold(f64::INFINITY, f64::min);
    let obj = ProxObjective { f, x: &x0, lambda };
    let mut history: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut hw = hw0;
    for _ in 0..5 {
        let grid = GridSpec::cube(&x0, hw, probe.points_per_axis)
            .with_rounds(probe.refine_rounds)
            .with_shrink(probe.refine_shrink)
            .with_budget(probe.budget);
        match oracles::grid_argmin_with(&obj, &grid, f.breakpoints(), 0.0) {
            Ok(r) => history.push(r),
            Err(Error::AllInfinite) => {}
            Err(e) => return Err(e),
        }
        hw *= 4.0;
    }
    let samples = history.len();
    if history.len() >= 3 {
        let tail = &history[history.len() - 3..];
        let decreasing = tail.windows(2).all(|w| w[1].1 < w[0].1 - 1e-9 * (1.0 + w[0].1.abs()));
        let at_edge = tail.iter().all(|(p, _)| {
            let r = linalg::norm_inf(&linalg::sub(p, &x0));
            r > 0.0 && linalg::dist(p, &x0) > 0.5 * hw0
        });
        if decreasing && at_edge {
            let (p, v) = tail[2].clone();
            let d = linalg::sub(&p, &x0);
            let ray = linalg::scale(&d, 1.0 / linalg::norm(&d));
            let drop = tail[0].1 - v;
            let w = Witness::new(drop).with("x", x0.clone()).with("ray", ray).with("y", p).scalar("value", v);
            return Ok(Verdict::fails(tag, w).with_metric("lambda", lambda).with_samples(samples));
        }
    }
    Ok(Verdict::holds(tag).with_metric("lambda", lambda).with_samples(samples))
}

/// Required modulus for the prox-regularity inequality at one triple:
/// `2(φ(u) + ⟨v, x − u⟩ − φ(x))/‖x − u‖²`.
pub fn prox_regularity_requirement(f: &impl Objective, x: &[f64], u: &[f64], v: &[f64], phi_u: f64) -> Result<f64> {
    let d = linalg::sub(x, u);
    let d2 = linalg::norm_sq(&d);
    if d2 == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let fx = f.eval(x)?;
    if !fx.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(2.0 * (phi_u + linalg::dot(v, &d) - fx) / d2)
}

/// Smallest `r ∈ [0, r_max]` such that
/// `φ(x) ≥ φ(u) + ⟨v, x − u⟩ − (r/2)‖x − u‖²` on every sampled triple, with
/// `x ∈ B_ε(x̄)` and `(u, v)` in the graph sample restricted to the
/// `ε`-window. The minimal `r` is computed in closed form per triple.
pub fn check_prox_regularity(
    f: &impl Objective,
    p: &RefPair,
    eps: f64,
    r_max: f64,
    graph: &SubgradGraphSample,
) -> Result<Verdict> {
    let tag = "prox-regularity";
    let n = p.dim();
    let pairs: Vec<_> = graph
        .triples
        .iter()
        .filter(|t| {
            linalg::dist(&t.x, &p.x_bar) <= eps
                && linalg::dist(&t.v, &p.v_bar) <= eps
                && t.phi_x < p.phi_at_x_bar + eps
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyGraphSample);
    }
    // graph base points are test points too, strided if there are many
    let stride = pairs.len().div_ceil(400).max(1);
    let shared: Vec<&[f64]> = pairs.iter().step_by(stride).map(|t| t.x.as_slice()).collect();
    let dirs = unit_directions(n, 2 * n);
    let mut worst = (f64::NEG_INFINITY, None::<(Vec<f64>, usize)>);
    let mut evaluated = 0;
    for (k, t) in pairs.iter().enumerate() {
        let mut local: Vec<Vec<f64>> = Vec::new();
        for d in &dirs {
            for s in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
                local.push(linalg::axpy(&t.x, s * eps, d));
            }
        }
        for x in local.iter().map(Vec::as_slice).chain(shared.iter().copied()) {
            if linalg::dist(x, &p.x_bar) > eps {
                continue;
            }
            evaluated += 1;
            let r = prox_regularity_requirement(f, x, &t.x, &t.v, t.phi_x)?;
            if r > worst.0 {
                worst = (r, Some((x.to_vec(), k)));
            }
        }
    }
    let r_needed = worst.0.max(0.0);
    let base = |v: Verdict| {
        v.with_tol("r_max", r_max)
            .with_tol("epsilon", eps)
            .with_metric("r_required", r_needed)
            .with_samples(evaluated)
    };
    if r_needed <= r_max {
        return Ok(base(Verdict::holds(tag)));
    }
    let (x, k) = worst.1.expect("r_needed > r_max implies a triple");
    let t = pairs[k];
    let w = Witness::new(r_needed - r_max)
        .with("x", x)
        .with("u", t.x.clone())
        .with("v", t.v.clone())
        .scalar("r_required", r_needed);
    Ok(base(Verdict::fails(tag, w)))
}

/// `ϑ(x) = φ(x) − (σ/2)‖x − c‖²`.
#[derive(Clone, Debug)]
pub struct ShiftedFn {
    base: ExtendedFn,
    sigma: f64,
    center: Vec<f64>,
}

impl ShiftedFn {
    pub fn base(&self) -> &ExtendedFn {
        &self.base
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Shifting again around the same centre adds the coefficients, so a
    /// shift by `σ` followed by `−σ` gives back the base values bit for bit.
    pub fn shift(&self, sigma: f64) -> ShiftedFn {
        ShiftedFn { base: self.base.clone(), sigma: self.sigma + sigma, center: self.center.clone() }
    }

    /// The shifted function as an [`ExtendedFn`] with shifted smooth oracles
    /// and subgradient graph.
    pub fn to_fn(&self) -> ExtendedFn {
        let sigma = self.sigma;
        let c = Arc::new(self.center.clone());
        let eval = self.base.eval_arc();
        let cc = c.clone();
        let value: crate::domain::ScalarFn = Arc::new(move |x: &[f64]| shifted_value(eval(x), sigma, x, &cc));
        let gradient = self.base.gradient_arc().map(|g| {
            let cc = c.clone();
            let out: crate::domain::VectorFn =
                Arc::new(move |x: &[f64]| linalg::axpy(&g(x), -sigma, &linalg::sub(x, &cc)));
            out
        });
        let hessian = self.base.hessian_arc().map(|h| {
            let out: crate::domain::MatrixFn = Arc::new(move |x: &[f64]| {
                let mut m = h(x);
                m.add_scaled(&Matrix::identity(x.len()), -sigma);
                m
            });
            out
        });
        let graph = self.base.graph_arc().map(|g| {
            let out: Arc<dyn SubgradientGraph> = Arc::new(ShiftedGraph { inner: g, sigma, center: c.clone() });
            out
        });
        ExtendedFn::from_parts(
            format!("shift({},{})", self.base.name(), sigma),
            self.base.dim(),
            value,
            gradient,
            hessian,
            graph,
            self.base.breakpoints().to_vec(),
        )
    }
}

fn shifted_value(base: f64, sigma: f64, x: &[f64], c: &[f64]) -> f64 {
    if sigma == 0.0 || !base.is_finite() {
        return base;
    }
    base - 0.5 * sigma * linalg::norm_sq(&linalg::sub(x, c))
}

impl Objective for ShiftedFn {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(shifted_value(self.base.eval(x)?, self.sigma, x, &self.center))
    }
}

struct ShiftedGraph {
    inner: Arc<dyn SubgradientGraph>,
    sigma: f64,
    center: Arc<Vec<f64>>,
}

impl SubgradientGraph for ShiftedGraph {
    fn contains(&self, x: &[f64], v: &[f64], tol: f64) -> bool {
        let vb = linalg::axpy(v, self.sigma, &linalg::sub(x, &self.center));
        self.inner.contains(x, &vb, tol)
    }

    fn enumerate(&self, req: &GraphRequest<'_>) -> Vec<(Vec<f64>, Vec<f64>)> {
        let n = req.x_center.len();
        // base subgradients are v + σ(x − c); widen the v-box to cover the drift
        let drift = linalg::sub(req.x_center, &self.center);
        let vc = linalg::axpy(req.v_center, self.sigma, &drift);
        let widen = self.sigma.abs() * req.x_radius * libm::sqrt(n as f64);
        let inner = GraphRequest {
            x_center: req.x_center,
            x_radius: req.x_radius,
            v_center: &vc,
            v_radius: req.v_radius + widen,
            density: req.density,
        };
        self.inner
            .enumerate(&inner)
            .into_iter()
            .map(|(x, v)| {
                let vs = linalg::axpy(&v, -self.sigma, &linalg::sub(&x, &self.center));
                (x, vs)
            })
            .filter(|(_, v)| linalg::norm_inf(&linalg::sub(v, req.v_center)) <= req.v_radius * (1.0 + 1e-12))
            .collect()
    }
}

pub fn quadratic_shift(f: &ExtendedFn, sigma: f64, center: &[f64]) -> ShiftedFn {
    ShiftedFn { base: f.clone(), sigma, center: center.to_vec() }
}

/// Which identities [`shift_envelope_residual`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftIdentity {
    /// Envelope of the shifted function in terms of the envelope of `φ`.
    Forward,
    /// Both directions.
    Both,
}

/// Max deviation over `test_points` between the envelope of the shifted
/// function and its closed form through `e_{γ/(1−σγ)}φ`; with
/// [`ShiftIdentity::Both`] also the reverse identity at `λ = γ/(1−σγ)`.
pub fn shift_envelope_residual(
    f: &ExtendedFn,
    sigma: f64,
    center: &[f64],
    gamma: f64,
    test_points: &[Vec<f64>],
    which: ShiftIdentity,
) -> Result<f64> {
    if !(gamma > 0.0) || (sigma != 0.0 && gamma >= 1.0 / sigma.abs()) {
        return Err(Error::GammaOutOfRange { gamma, sigma });
    }
    let n = f.dim().unwrap_or(center.len());
    let theta = quadratic_shift(f, sigma, center).to_fn();
    let sg = sigma * gamma;
    let lam = gamma / (1.0 - sg);
    let env_theta = EnvelopeHandle::new(theta, gamma, n)?;
    let env_phi = EnvelopeHandle::new(f.clone(), lam, n)?;
    let mut worst: f64 = 0.0;
    for x in test_points {
        let d2 = linalg::norm_sq(&linalg::sub(x, center));
        let lhs = env_theta.envelope(x)?;
        let arg: Vec<f64> = x.iter().zip(center).map(|(xi, ci)| (xi - sg * ci) / (1.0 - sg)).collect();
        let rhs = env_phi.envelope(&arg)? - sigma / (2.0 * (1.0 - sg)) * d2;
        worst = worst.max((lhs - rhs).abs());
        if which == ShiftIdentity::Both {
            // e_λφ(x) = e_{λ/(1+σλ)}ϑ((x + σλc)/(1+σλ)) + σ/(2(1+σλ))‖x − c‖², λ/(1+σλ) = γ
            let sl = sigma * lam;
            let lhs = env_phi.envelope(x)?;
            let arg: Vec<f64> = x.iter().zip(center).map(|(xi, ci)| (xi + sl * ci) / (1.0 + sl)).collect();
            let rhs = env_theta.envelope(&arg)? + sigma / (2.0 * (1.0 + sl)) * d2;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// Default pair budget for envelope convexity sampling.
pub const ENVELOPE_PAIRS: usize = 400;

/// Sampled (strong) convexity of `e_λφ` on `region`, which must be centred
/// at `x̄ + λv̄`.
pub fn check_envelope_local_convexity(
    h: &EnvelopeHandle,
    p: &RefPair,
    modulus: f64,
    region: &NeighborhoodSpec,
) -> Result<Verdict> {
    let c = p.shifted_center(h.lambda());
    if linalg::dist(&c, &region.center) > 1e-12 * (1.0 + linalg::norm(&c)) {
        return Err(Error::InvalidArgument("region must be centred at x_bar + lambda v_bar".to_string()));
    }
    let mut v = oracles::sampled_convexity(h, region, modulus, ENVELOPE_PAIRS)?;
    v.theorem_tag = "envelope-local-convexity".to_string();
    Ok(v.with_metric("lambda", h.lambda()).with_metric("modulus", modulus).with_tol("radius", region.radius))
}

/// Envelope modulus corresponding to a variational modulus `σ` at scale `λ`.
pub fn envelope_modulus(sigma: f64, lambda: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        sigma / (1.0 + sigma * lambda)
    }
}

/// Gradient-consistency probe: `(x − Prox)/λ` against central differences of
/// the envelope at `points`; returns the largest deviation seen.
pub fn envelope_gradient_deviation(h: &EnvelopeHandle, points: &[Vec<f64>], step: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        let g = h.envelope_gradient(x)?;
        let fd = oracles::fd_gradient(h, x, step)?;
        worst = worst.max(linalg::dist(&g, &fd));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::gallery;

    fn default_validation_points(n: usize) -> Vec<Vec<f64>> {
        let mut pts = vec![vec![0.0; n]];
        for d in unit_directions(n, 2 * n) {
            pts.push(linalg::scale(&d, 0.7));
        }
        pts
    }

    fn huber(x: f64, lam: f64) -> f64 {
        if x.abs() <= lam {
            x * x / (2.0 * lam)
        } else {
            x.abs() - lam / 2.0
        }
    }

    #[test]
    fn prox_of_abs_is_soft_threshold() {
        let h = EnvelopeHandle::new(gallery::abs(), 0.5, 1).unwrap();
        assert!((h.prox(&[2.0]).unwrap()[0] - 1.5).abs() < 1e-8);
        assert!((h.envelope_gradient(&[2.0]).unwrap()[0] - 1.0).abs() < 1e-8);
        for x in [-2.0, -0.3, 0.0, 0.2, 0.5, 1.7] {
            assert!((h.envelope(&[x]).unwrap() - huber(x, 0.5)).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn prox_of_halfline_indicator_is_projection() {
        let f = gallery::nonpositive_indicator();
        let h = EnvelopeHandle::new(f, 1.0, 1).unwrap();
        assert_eq!(h.prox(&[3.0]).unwrap(), vec![0.0]);
        assert!((h.envelope_gradient(&[3.0]).unwrap()[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_of_zero_and_square() {
        let zero = ExtendedFn::new("zero", |_| 0.0);
        let h = EnvelopeHandle::new(zero, 0.3, 1).unwrap();
        assert_eq!(h.envelope(&[1.3]).unwrap(), 0.0);
        let h = EnvelopeHandle::new(gallery::quad(2.0), 0.5, 1).unwrap();
        for x in [-1.0, 0.4, 2.0] {
            assert!((h.envelope(&[x]).unwrap() - x * x / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_prox_validated() {
        let h = EnvelopeHandle::new(gallery::quad(2.0), 0.5, 1)
            .unwrap()
            .with_analytic(&default_validation_points(1))
            .unwrap();
        assert!((h.prox(&[1.0]).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unbounded_prox_objective() {
        let h = EnvelopeHandle::new(gallery::neg_quad(), 1.0, 1).unwrap();
        assert_eq!(h.prox(&[0.1]).unwrap_err(), Error::UnboundedBelow);
    }

    #[test]
    fn prox_boundedness_examples() {
        let probe = GridSpec::new(vec![-1.0], vec![1.0], 41);
        assert!(is_prox_bounded(&gallery::neg_quad(), 1.0, &probe).unwrap().is_fails());
        assert!(is_prox_bounded(&gallery::abs(), 1.0, &probe).unwrap().is_holds());
        assert!(is_prox_bounded(&gallery::abs(), 0.01, &probe).unwrap().is_holds());
        let quartic = ExtendedFn::new("-x^4", |x| -x[0].powi(4));
        assert!(is_prox_bounded(&quartic, 0.1, &probe).unwrap().is_fails());
    }

    #[test]
    fn prox_at_shifted_reference_returns_reference() {
        for (f, v) in [(gallery::abs(), 0.5), (gallery::logsum(), 0.5), (gallery::quad(2.0), 0.0)] {
            let h = EnvelopeHandle::new(f, 0.1, 1).unwrap();
            let p = h.prox(&[0.1 * v]).unwrap();
            assert!(p[0].abs() < 1e-8);
            let g = h.envelope_gradient(&[0.1 * v]).unwrap();
            assert!((g[0] - v).abs() < 1e-6);
        }
    }

    #[test]
    fn shift_examples() {
        let s = quadratic_shift(&gallery::quad(2.0), 2.0, &[0.0]);
        for x in [-1.0, 0.3, 2.0] {
            assert_eq!(s.eval(&[x]).unwrap(), 0.0);
        }
        let s = quadratic_shift(&gallery::abs(), 1.0, &[0.0]);
        assert_eq!(s.eval(&[2.0]).unwrap(), 0.0);
        let back = s.shift(-1.0);
        for x in [-1.7, 0.1, 3.3] {
            assert_eq!(back.eval(&[x]).unwrap(), gallery::abs().eval(&[x]).unwrap());
        }
    }

    #[test]
    fn shifted_oracles_are_consistent() {
        let s = quadratic_shift(&gallery::quad(2.0), 0.5, &[0.3]).to_fn();
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![-1.0 + 0.5 * i as f64]).collect();
        assert!(crate::domain::check_smooth_oracles(&s, &pts).unwrap().is_holds());
        let h = s.hessian(&[0.0]).unwrap().unwrap();
        assert!((h[(0, 0)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn shift_identity_quartic_and_abs() {
        let pts: Vec<Vec<f64>> = (0..11).map(|i| vec![-1.0 + 0.2 * i as f64]).collect();
        let quartic = ExtendedFn::new("x^4", |x| x[0].powi(4)).with_dim(1);
        let r = shift_envelope_residual(&quartic, 0.5, &[0.0], 0.25, &pts, ShiftIdentity::Both).unwrap();
        assert!(r <= 1e-5, "{r}");
        let r = shift_envelope_residual(&gallery::abs(), -0.5, &[0.0], 0.25, &pts, ShiftIdentity::Both).unwrap();
        assert!(r <= 1e-5, "{r}");
    }

    #[test]
    fn gamma_out_of_range() {
        let e = shift_envelope_residual(&gallery::abs(), 2.0, &[0.0], 0.5, &[vec![0.0]], ShiftIdentity::Forward);
        assert_eq!(e.unwrap_err(), Error::GammaOutOfRange { gamma: 0.5, sigma: 2.0 });
    }

    #[test]
    fn envelope_convexity_examples() {
        let abs = gallery::abs();
        let p = RefPair::new(&abs, vec![0.0], vec![0.0]).unwrap();
        let h = EnvelopeHandle::new(abs, 0.5, 1).unwrap();
        let region = NeighborhoodSpec::new(vec![0.0], 0.25, 21);
        assert!(check_envelope_local_convexity(&h, &p, 0.0, &region).unwrap().is_holds());

        let q = gallery::quad(2.0);
        let p = RefPair::new(&q, vec![0.0], vec![0.0]).unwrap();
        let h = EnvelopeHandle::new(q, 0.5, 1).unwrap();
        assert!(check_envelope_local_convexity(&h, &p, 1.0, &region).unwrap().is_holds());
        assert!(check_envelope_local_convexity(&h, &p, 1.1, &region).unwrap().is_fails());

        let l0 = gallery::l0();
        let p = RefPair::new(&l0, vec![0.0], vec![0.0]).unwrap();
        let h = EnvelopeHandle::new(l0, 0.25, 1).unwrap();
        let region = NeighborhoodSpec::new(vec![0.0], 0.1, 21);
        assert!(check_envelope_local_convexity(&h, &p, 0.0, &region).unwrap().is_holds());
    }

    #[test]
    fn modulus_map() {
        assert_eq!(envelope_modulus(2.0, 0.5), 1.0);
        assert_eq!(envelope_modulus(0.0, 0.5), 0.0);
    }
}
