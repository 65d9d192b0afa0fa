//! Shared domain types: extended-real values, function oracles, reference
//! pairs, neighborhoods and verdicts.
//!
//! Sampled checks are one-sided. A `Fails` verdict always carries a witness
//! that reproduces the violation when replayed through the same predicate; a
//! `Holds` verdict only means that no violation was found at the stated
//! sampling. Limiting subgradients of an arbitrary function cannot be decided
//! numerically, so membership questions are answered either by an explicit
//! graph enumerator attached to the function or by sampled necessary
//! conditions (regular-subgradient quotients).

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Add;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Default absolute tolerance for graph-membership residuals.
pub const GRAPH_TOL: f64 = 1e-8;

/// A value in `(−∞, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtValue {
    Finite(f64),
    PosInf,
}

impl ExtValue {
    /// Converts a raw oracle output. `+∞` maps to [`ExtValue::PosInf`]; NaN and
    /// `−∞` are rejected.
    pub fn from_f64(v: f64) -> Result<Self> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            Err(Error::NanValue { at: String::new() })
        } else if v == f64::INFINITY {
            Ok(ExtValue::PosInf)
        } else {
            Ok(ExtValue::Finite(v))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtValue::Finite(v) => Some(v),
            ExtValue::PosInf => None,
        }
    }

    /// `+∞` as `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtValue::Finite(v) => v,
            ExtValue::PosInf => f64::INFINITY,
        }
    }
}

impl Add for ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::PosInf,
        }
    }
}

impl Add<f64> for ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: f64) -> ExtValue {
        self + ExtValue::Finite(rhs)
    }
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(v) => write!(f, "{v}"),
            ExtValue::PosInf => write!(f, "+inf"),
        }
    }
}

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;
/// `(x, λ) ↦ Prox_{λφ}(x)`
pub type ProxFn = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

/// Box-shaped request region for a subgradient-graph enumerator.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphRequest<'a> {
    pub x_center: &'a [f64],
    /// Half-width of the box of base points.
    pub x_radius: f64,
    pub v_center: &'a [f64],
    /// Half-width of the box of subgradients.
    pub v_radius: f64,
    /// Points per axis segment; vertical pieces of the graph are discretised
    /// with the same density.
    pub density: usize,
}

/// Explicit knowledge of `gph ∂φ` (limiting subgradients).
pub trait SubgradientGraph: Send + Sync {
    /// Whether `v ∈ ∂φ(x)` up to `tol`.
    fn contains(&self, x: &[f64], v: &[f64], tol: f64) -> bool;

    /// Pairs `(x, v)` with `v ∈ ∂φ(x)` inside the request boxes.
    fn enumerate(&self, req: &GraphRequest<'_>) -> Vec<(Vec<f64>, Vec<f64>)>;
}

/// Anything with an extended-real value oracle.
pub trait Objective {
    /// Raw value with `+∞` as `f64::INFINITY`. NaN and `−∞` are errors.
    fn eval(&self, x: &[f64]) -> Result<f64>;

    fn value(&self, x: &[f64]) -> Result<ExtValue> {
        ExtValue::from_f64(self.eval(x)?)
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        (**self).eval(x)
    }
}

/// An extended-real-valued function `φ: ℝⁿ → (−∞, +∞]` with optional smooth
/// oracles, an optional explicit subgradient graph and an optional analytic
/// proximal mapping.
#[derive(Clone)]
pub struct ExtendedFn {
    name: String,
    dim: Option<usize>,
    eval: ScalarFn,
    gradient: Option<VectorFn>,
    hessian: Option<MatrixFn>,
    graph: Option<Arc<dyn SubgradientGraph>>,
    prox: Option<ProxFn>,
    breakpoints: Vec<f64>,
    lsc_assumed: bool,
}

impl fmt::Debug for ExtendedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtendedFn")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("smooth_order", &self.smooth_order())
            .field("has_graph", &self.graph.is_some())
            .field("has_prox", &self.prox.is_some())
            .finish()
    }
}

impl ExtendedFn {
    /// Wraps a value oracle. Return `f64::INFINITY` outside the domain.
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ExtendedFn {
            name: name.into(),
            dim: None,
            eval: Arc::new(eval),
            gradient: None,
            hessian: None,
            graph: None,
            prox: None,
            breakpoints: Vec::new(),
            lsc_assumed: true,
        }
    }

    /// Fixes the dimension; without it the function accepts any length
    /// (separable gallery members).
    pub fn with_dim(mut self, n: usize) -> Self {
        self.dim = Some(n);
        self
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian<H>(mut self, h: H) -> Self
    where
        H: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn with_graph(mut self, g: impl SubgradientGraph + 'static) -> Self {
        self.graph = Some(Arc::new(g));
        self
    }

    pub fn with_prox<P>(mut self, p: P) -> Self
    where
        P: Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.prox = Some(Arc::new(p));
        self
    }

    /// Coordinates every grid axis must contain (kinks, jumps).
    pub fn with_breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub fn with_lsc_assumed(mut self, lsc: bool) -> Self {
        self.lsc_assumed = lsc;
        self
    }

    pub(crate) fn from_parts(
        name: String,
        dim: Option<usize>,
        eval: ScalarFn,
        gradient: Option<VectorFn>,
        hessian: Option<MatrixFn>,
        graph: Option<Arc<dyn SubgradientGraph>>,
        breakpoints: Vec<f64>,
    ) -> Self {
        ExtendedFn {
            name,
            dim,
            eval,
            gradient,
            hessian,
            graph,
            prox: None,
            breakpoints,
            lsc_assumed: true,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// 0, 1 or 2 depending on which smooth oracles are attached.
    pub fn smooth_order(&self) -> u8 {
        match (&self.gradient, &self.hessian) {
            (Some(_), Some(_)) => 2,
            (Some(_), None) => 1,
            _ => 0,
        }
    }

    pub fn lsc_assumed(&self) -> bool {
        self.lsc_assumed
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn graph(&self) -> Option<&dyn SubgradientGraph> {
        self.graph.as_deref()
    }

    pub(crate) fn graph_arc(&self) -> Option<Arc<dyn SubgradientGraph>> {
        self.graph.clone()
    }

    pub(crate) fn eval_arc(&self) -> ScalarFn {
        self.eval.clone()
    }

    pub(crate) fn gradient_arc(&self) -> Option<VectorFn> {
        self.gradient.clone()
    }

    pub(crate) fn hessian_arc(&self) -> Option<MatrixFn> {
        self.hessian.clone()
    }

    pub fn analytic_prox(&self) -> Option<&ProxFn> {
        self.prox.as_ref()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        match self.dim {
            Some(n) if n != x.len() => Err(Error::DimMismatch { expected: n, found: x.len() }),
            _ => Ok(()),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        let g = self.gradient.as_ref()?;
        Some(self.check_dim(x).and_then(|_| {
            let v = g(x);
            if v.iter().any(|c| !c.is_finite()) {
                Err(Error::NanValue { at: format!("{x:?}") })
            } else {
                Ok(v)
            }
        }))
    }

    pub fn hessian(&self, x: &[f64]) -> Option<Result<Matrix>> {
        let h = self.hessian.as_ref()?;
        Some(self.check_dim(x).map(|_| h(x)))
    }
}

impl Objective for ExtendedFn {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let v = (self.eval)(x);
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::NanValue { at: format!("{x:?}") });
        }
        Ok(v)
    }
}

/// A reference pair `(x̄, v̄)` with `φ(x̄)` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct RefPair {
    pub x_bar: Vec<f64>,
    pub v_bar: Vec<f64>,
    pub phi_at_x_bar: f64,
}

impl RefPair {
    /// Evaluates `φ(x̄)`; it must be finite.
    pub fn new(f: &impl Objective, x_bar: Vec<f64>, v_bar: Vec<f64>) -> Result<Self> {
        if x_bar.len() != v_bar.len() {
            return Err(Error::DimMismatch { expected: x_bar.len(), found: v_bar.len() });
        }
        let phi = f.eval(&x_bar)?;
        if !phi.is_finite() {
            return Err(Error::InvalidArgument("phi(x_bar) must be finite".to_string()));
        }
        Ok(RefPair { x_bar, v_bar, phi_at_x_bar: phi })
    }

    pub fn dim(&self) -> usize {
        self.x_bar.len()
    }

    /// `x̄ + λ v̄`
    pub fn shifted_center(&self, lambda: f64) -> Vec<f64> {
        linalg::axpy(&self.x_bar, lambda, &self.v_bar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    UniformGrid,
    LowDiscrepancy,
    RandomSeeded(u64),
}

/// A ball of sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub sample_count: usize,
    pub scheme: SamplingScheme,
    /// ε of the attentive cut `φ(x) < φ(x̄) + ε`.
    pub epsilon_attentive: f64,
}

impl NeighborhoodSpec {
    /// Uniform grid in 1-D, Halton points otherwise; ε defaults to 0.5.
    pub fn new(center: Vec<f64>, radius: f64, sample_count: usize) -> Self {
        let scheme = if center.len() <= 1 {
            SamplingScheme::UniformGrid
        } else {
            SamplingScheme::LowDiscrepancy
        };
        NeighborhoodSpec { center, radius, sample_count, scheme, epsilon_attentive: 0.5 }
    }

    pub fn with_scheme(mut self, scheme: SamplingScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidArgument("radius must be positive".to_string()));
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidArgument("sample_count must be positive".to_string()));
        }
        if self.center.is_empty() {
            return Err(Error::InvalidArgument("center must be non-empty".to_string()));
        }
        if !(self.epsilon_attentive > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".to_string()));
        }
        Ok(())
    }
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Van der Corput radical inverse of `i` in base `b`.
pub(crate) fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton point `i` in `[-1, 1]^n`.
pub(crate) fn halton_cube(i: u64, n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * radical_inverse(i, PRIMES[k % PRIMES.len()]) - 1.0).collect()
}

/// Deterministic unit directions: `±e_k` first, then normalised Halton points.
pub(crate) fn unit_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..n {
        if out.len() >= count {
            return out;
        }
        out.push(linalg::unit(n, k));
        if out.len() >= count {
            return out;
        }
        out.push(linalg::scale(&linalg::unit(n, k), -1.0));
    }
    let mut i = 1u64;
    while out.len() < count && n > 1 {
        let p = halton_cube(i, n);
        i += 1;
        let r = linalg::norm(&p);
        if r > 1e-3 {
            out.push(linalg::scale(&p, 1.0 / r));
        }
    }
    out
}

/// Points of the closed ball described by `spec`. Pure and deterministic.
pub fn sample_neighborhood(spec: &NeighborhoodSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let n = spec.center.len();
    let c = &spec.center;
    let r = spec.radius;
    let count = spec.sample_count;
    let pts = match spec.scheme {
        SamplingScheme::UniformGrid => {
            if count == 1 {
                vec![c.clone()]
            } else if n == 1 {
                (0..count)
                    .map(|i| {
                        let t = -1.0 + 2.0 * i as f64 / (count - 1) as f64;
                        vec![c[0] + r * t]
                    })
                    .collect()
            } else {
                // grid on the cube inscribed in the ball, thinned evenly
                let k = libm::ceil(libm::pow(count as f64, 1.0 / n as f64)) as usize;
                let k = k.max(2);
                let total = k.pow(n as u32);
                let half = r / libm::sqrt(n as f64);
                (0..count)
                    .map(|j| {
                        let mut idx = (j as u128 * total as u128 / count as u128) as usize;
                        let mut p = vec![0.0; n];
                        for (axis, coord) in p.iter_mut().enumerate() {
                            let t = idx % k;
                            idx /= k;
                            let u = -1.0 + 2.0 * t as f64 / (k - 1) as f64;
                            *coord = c[axis] + half * u;
                        }
                        p
                    })
                    .collect()
            }
        }
        SamplingScheme::LowDiscrepancy => {
            let mut out = Vec::with_capacity(count);
            let mut i = 1u64;
            while out.len() < count {
                let u = halton_cube(i, n);
                i += 1;
                if linalg::norm(&u) <= 1.0 {
                    out.push(linalg::axpy(c, r, &u));
                }
            }
            out
        }
        SamplingScheme::RandomSeeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                if linalg::norm(&u) <= 1.0 {
                    out.push(linalg::axpy(c, r, &u));
                }
            }
            out
        }
    };
    // rounding in c + r*u can push a point a hair outside the ball
    Ok(pts
        .into_iter()
        .map(|p| {
            let d = linalg::dist(&p, c);
            if d > r {
                linalg::axpy(c, r / d, &linalg::sub(&p, c))
            } else {
                p
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named vectors that certify or refute a property, plus the size of the
/// violation they produce.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub parts: Vec<(String, Vec<f64>)>,
    pub violation: f64,
}

impl Witness {
    pub fn new(violation: f64) -> Self {
        Witness { parts: Vec::new(), violation }
    }

    pub fn with(mut self, label: &str, v: Vec<f64>) -> Self {
        self.parts.push((label.to_string(), v));
        self
    }

    pub fn scalar(self, label: &str, v: f64) -> Self {
        self.with(label, vec![v])
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.parts.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }
}

/// Outcome of a check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub theorem_tag: String,
    pub tolerances: BTreeMap<String, f64>,
    pub samples_used: usize,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub sub_verdicts: Vec<Verdict>,
}

impl Verdict {
    pub fn new(status: Status, tag: &str) -> Self {
        Verdict {
            status,
            witness: None,
            theorem_tag: tag.to_string(),
            tolerances: BTreeMap::new(),
            samples_used: 0,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            sub_verdicts: Vec::new(),
        }
    }

    pub fn holds(tag: &str) -> Self {
        Verdict::new(Status::Holds, tag)
    }

    pub fn fails(tag: &str, witness: Witness) -> Self {
        let mut v = Verdict::new(Status::Fails, tag);
        v.witness = Some(witness);
        v
    }

    pub fn inconclusive(tag: &str) -> Self {
        Verdict::new(Status::Inconclusive, tag)
    }

    pub fn with_tol(mut self, name: &str, v: f64) -> Self {
        self.tolerances.insert(name.to_string(), v);
        self
    }

    pub fn with_metric(mut self, name: &str, v: f64) -> Self {
        self.metrics.insert(name.to_string(), v);
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples_used = n;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_sub(mut self, sub: Verdict) -> Self {
        self.sub_verdicts.push(sub);
        self
    }

    pub fn is_holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.status == Status::Fails
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

/// Regular-subgradient quotient `(φ(x) − φ(x̄) − ⟨v̄, x − x̄⟩)/‖x − x̄‖`.
pub fn regular_quotient(f: &impl Objective, p: &RefPair, x: &[f64]) -> Result<f64> {
    let d = linalg::sub(x, &p.x_bar);
    let r = linalg::norm(&d);
    let fx = f.eval(x)?;
    Ok((fx - p.phi_at_x_bar - linalg::dot(&p.v_bar, &d)) / r)
}

/// Searches for a direction along which the quotient has a negative limit.
/// The limit is extrapolated linearly from the two smallest radii so that
/// curvature terms vanishing like `O(t)` are not mistaken for violations.
fn quotient_witness(f: &impl Objective, p: &RefPair, tol: f64) -> Result<Option<Witness>> {
    let n = p.dim();
    let scale = 1.0f64.max(linalg::norm_inf(&p.x_bar));
    let (r1, r2) = (1e-4 * scale, 1e-5 * scale);
    for d in unit_directions(n, 2 * n + if n > 1 { 16 } else { 0 }) {
        let x1 = linalg::axpy(&p.x_bar, r1, &d);
        let x2 = linalg::axpy(&p.x_bar, r2, &d);
        let q1 = regular_quotient(f, p, &x1)?;
        let q2 = regular_quotient(f, p, &x2)?;
        if !q1.is_finite() || !q2.is_finite() {
            // +∞ values never violate the lower estimate
            continue;
        }
        let limit = q2 - (q1 - q2) * r2 / (r1 - r2);
        if limit < -tol && q2 < -tol {
            return Ok(Some(Witness::new(-q2).with("x", x2).with("direction", d)));
        }
    }
    Ok(None)
}

/// Checks `v̄ ∈ ∂φ(x̄)`. With a graph enumerator the answer is the graph's
/// membership test; with smooth oracles it is `v̄ = ∇φ(x̄)`. In both cases a
/// negative regular-subgradient quotient is reported as the witness.
pub fn validate_refpair(f: &ExtendedFn, p: &RefPair, tol: f64) -> Result<Verdict> {
    let tag = "subgradient-membership";
    let fx = f.eval(&p.x_bar)?;
    if !fx.is_finite() {
        return Err(Error::InvalidArgument("phi(x_bar) is +inf".to_string()));
    }
    let member = if let Some(g) = f.graph() {
        g.contains(&p.x_bar, &p.v_bar, tol)
    } else if let Some(grad) = f.gradient(&p.x_bar) {
        let grad = grad?;
        linalg::dist(&grad, &p.v_bar) <= tol * (1.0 + linalg::norm(&grad))
    } else {
        return Err(Error::NoGraphAndNonsmooth);
    };
    let verdict = if member {
        Verdict::holds(tag).with_note("membership confirmed by oracle")
    } else {
        match quotient_witness(f, p, tol.max(1e-9))? {
            Some(w) => Verdict::fails(tag, w),
            None => Verdict::fails(
                tag,
                Witness::new(f64::INFINITY).with("x", p.x_bar.clone()).with("v", p.v_bar.clone()),
            )
            .with_note("rejected by graph membership; no negative quotient found"),
        }
    };
    Ok(verdict.with_tol("graph_membership", tol).with_samples(1))
}

/// Central-difference comparison of the smooth oracles on `points`:
/// `‖∇f(x) − FD(x)‖ ≤ 1e-4 (1 + ‖∇f(x)‖)`, and the same for Hessian columns.
pub fn check_smooth_oracles(f: &ExtendedFn, points: &[Vec<f64>]) -> Result<Verdict> {
    let tag = "smooth-oracle-consistency";
    let tol = 1e-4;
    let mut used = 0;
    for x in points {
        if !f.eval(x)?.is_finite() {
            continue;
        }
        let Some(g) = f.gradient(x) else {
            return Ok(Verdict::inconclusive(tag).with_note("no gradient oracle"));
        };
        let g = g?;
        let fd = match crate::oracles::fd_gradient(f, x, 1e-5) {
            Ok(fd) => fd,
            Err(Error::StencilLeavesDomain) => continue,
            Err(e) => return Err(e),
        };
        used += 1;
        let err = linalg::dist(&g, &fd);
        if err > tol * (1.0 + linalg::norm(&g)) {
            return Ok(Verdict::fails(tag, Witness::new(err).with("x", x.clone()).with("gradient", g).with("fd", fd))
                .with_tol("fd_relative", tol));
        }
        if let Some(h) = f.hessian(x) {
            let h = h?;
            let n = x.len();
            for j in 0..n {
                let step = 1e-5;
                let gp = f.gradient(&linalg::axpy(x, step, &linalg::unit(n, j))).unwrap()?;
                let gm = f.gradient(&linalg::axpy(x, -step, &linalg::unit(n, j))).unwrap()?;
                let col: Vec<f64> = linalg::sub(&gp, &gm).iter().map(|d| d / (2.0 * step)).collect();
                let hc = h.column(j);
                let err = linalg::dist(&hc, &col);
                if err > tol * (1.0 + linalg::norm(&hc)) {
                    return Ok(Verdict::fails(tag, Witness::new(err).with("x", x.clone()).with("hessian_column", hc))
                        .with_tol("fd_relative", tol));
                }
            }
        }
    }
    Ok(Verdict::holds(tag).with_tol("fd_relative", tol).with_samples(used))
}

/// Boxed objective, handy for composing checkers over heterogeneous inputs.
pub type DynObjective<'a> = Box<dyn Objective + 'a>;

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_fn() -> ExtendedFn {
        crate::gallery::abs()
    }

    #[test]
    fn ext_value_arithmetic() {
        assert_eq!(ExtValue::Finite(1.0) + ExtValue::PosInf, ExtValue::PosInf);
        assert_eq!(ExtValue::Finite(1.0) + 2.0, ExtValue::Finite(3.0));
        assert!(ExtValue::from_f64(f64::NAN).is_err());
        assert!(ExtValue::from_f64(f64::NEG_INFINITY).is_err());
        assert_eq!(ExtValue::from_f64(f64::INFINITY).unwrap(), ExtValue::PosInf);
    }

    #[test]
    fn nan_oracle_is_an_error() {
        let f = ExtendedFn::new("nan", |_| f64::NAN);
        assert!(matches!(f.eval(&[0.0]), Err(Error::NanValue { .. })));
    }

    #[test]
    fn refpair_abs_inside_subdifferential() {
        let f = abs_fn();
        let p = RefPair::new(&f, vec![0.0], vec![0.5]).unwrap();
        assert!(validate_refpair(&f, &p, GRAPH_TOL).unwrap().is_holds());
    }

    #[test]
    fn refpair_abs_outside_subdifferential_has_positive_direction_witness() {
        let f = abs_fn();
        let p = RefPair::new(&f, vec![0.0], vec![2.0]).unwrap();
        let v = validate_refpair(&f, &p, GRAPH_TOL).unwrap();
        assert!(v.is_fails());
        let w = v.witness.unwrap();
        let x = w.get("x").unwrap();
        assert!(x[0] > 0.0);
        // replay: quotient tends to -1
        let q = regular_quotient(&f, &p, x).unwrap();
        assert!((q + 1.0).abs() < 1e-9);
    }

    #[test]
    fn refpair_l0_any_subgradient_at_zero() {
        let f = crate::gallery::l0();
        let p = RefPair::new(&f, vec![0.0], vec![7.0]).unwrap();
        assert!(validate_refpair(&f, &p, GRAPH_TOL).unwrap().is_holds());
    }

    #[test]
    fn refpair_without_oracles_is_rejected() {
        let f = ExtendedFn::new("bare", |x| x[0].abs());
        let p = RefPair::new(&f, vec![0.0], vec![0.0]).unwrap();
        assert_eq!(validate_refpair(&f, &p, GRAPH_TOL).unwrap_err(), Error::NoGraphAndNonsmooth);
    }

    #[test]
    fn smooth_refpair_uses_gradient() {
        let f = crate::gallery::neg_quad();
        let p = RefPair::new(&f, vec![0.0], vec![0.0]).unwrap();
        assert!(validate_refpair(&f, &p, GRAPH_TOL).unwrap().is_holds());
        let p = RefPair::new(&f, vec![0.0], vec![0.3]).unwrap();
        assert!(validate_refpair(&f, &p, GRAPH_TOL).unwrap().is_fails());
    }

    #[test]
    fn grid_samples_endpoints_and_center() {
        let spec = NeighborhoodSpec::new(vec![0.0], 1.0, 3);
        let pts = sample_neighborhood(&spec).unwrap();
        assert_eq!(pts, vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let spec = NeighborhoodSpec::new(vec![0.0, 1.0], 0.7, 25).with_scheme(SamplingScheme::RandomSeeded(42));
        assert_eq!(sample_neighborhood(&spec).unwrap(), sample_neighborhood(&spec).unwrap());
    }

    #[test]
    fn samples_stay_in_ball() {
        for scheme in [SamplingScheme::UniformGrid, SamplingScheme::LowDiscrepancy, SamplingScheme::RandomSeeded(7)] {
            for n in 1..=3 {
                let spec = NeighborhoodSpec::new(vec![0.0; n], 0.5, 40).with_scheme(scheme);
                let pts = sample_neighborhood(&spec).unwrap();
                assert_eq!(pts.len(), 40);
                assert!(pts.iter().all(|p| linalg::norm(p) <= 0.5));
            }
        }
    }

    #[test]
    fn invalid_neighborhood_rejected() {
        let spec = NeighborhoodSpec::new(vec![0.0], 0.0, 3);
        assert!(sample_neighborhood(&spec).is_err());
    }

    #[test]
    fn gallery_smooth_oracles_match_finite_differences() {
        let pts: Vec<Vec<f64>> = (0..9).map(|i| vec![-0.8 + 0.2 * i as f64]).collect();
        for f in [crate::gallery::quad(2.0), crate::gallery::neg_quad(), crate::gallery::huber_target()] {
            assert!(check_smooth_oracles(&f, &pts).unwrap().is_holds(), "{}", f.name());
        }
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let f = ExtendedFn::new("bad", |x| x[0] * x[0]).with_gradient(|x| vec![3.0 * x[0]]);
        let v = check_smooth_oracles(&f, &[vec![1.0]]).unwrap();
        assert!(v.is_fails());
    }
}
