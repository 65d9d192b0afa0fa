//! Built-in functions and NLP instances with explicit subgradient graphs and
//! the facts known about them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{ExtendedFn, GraphRequest, RefPair, Status, SubgradientGraph};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nlp::{NlpProblem, SmoothFn};
use crate::poly::Polynomial;
use crate::varconv::{self, SubgradGraphSample, Window};

/// Upper bound on the number of pairs a product graph returns.
const PRODUCT_CAP: usize = 5000;

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k <= 1 || a == b {
        return vec![a];
    }
    (0..k).map(|i| if i + 1 == k { b } else { a + (b - a) * i as f64 / (k - 1) as f64 }).collect()
}

/// `(t, v)` for `v` in `[a, b] ∩ [vlo, vhi]`, discretised.
fn segment(out: &mut Vec<(f64, f64)>, t: f64, a: f64, b: f64, vlo: f64, vhi: f64, density: usize) {
    let lo = a.max(vlo);
    let hi = b.min(vhi);
    if lo > hi {
        return;
    }
    for v in linspace(lo, hi, density) {
        out.push((t, v));
    }
}

fn point(out: &mut Vec<(f64, f64)>, t: f64, v: f64, vlo: f64, vhi: f64) {
    if v >= vlo && v <= vhi {
        out.push((t, v));
    }
}

/// One-dimensional graph of a separable summand.
trait ScalarGraph: Send + Sync + 'static {
    fn contains(&self, t: f64, v: f64, tol: f64) -> bool;
    fn pieces(&self, lo: f64, hi: f64, vlo: f64, vhi: f64, density: usize) -> Vec<(f64, f64)>;
}

/// `x`-grid over `[lo, hi]` with the given kinks inserted.
fn axis(lo: f64, hi: f64, density: usize, kinks: &[f64]) -> Vec<f64> {
    let mut xs = linspace(lo, hi, density);
    xs.extend(kinks.iter().copied().filter(|k| *k >= lo && *k <= hi));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    xs.dedup();
    xs
}

/// Sign-like graph: `v = slope(t)` off the origin and `v ∈ [a, b]` at it.
struct KinkAtZero {
    slope: fn(f64) -> f64,
    at_zero: (f64, f64),
}

impl ScalarGraph for KinkAtZero {
    fn contains(&self, t: f64, v: f64, tol: f64) -> bool {
        if t == 0.0 {
            v >= self.at_zero.0 - tol && v <= self.at_zero.1 + tol
        } else {
            (v - (self.slope)(t)).abs() <= tol
        }
    }

    fn pieces(&self, lo: f64, hi: f64, vlo: f64, vhi: f64, density: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for t in axis(lo, hi, density, &[0.0]) {
            if t == 0.0 {
                segment(&mut out, 0.0, self.at_zero.0, self.at_zero.1, vlo, vhi, density);
            } else {
                point(&mut out, t, (self.slope)(t), vlo, vhi);
            }
        }
        out
    }
}

fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn zero_slope(_t: f64) -> f64 {
    0.0
}

fn logsum_slope(t: f64) -> f64 {
    sign(t) / (1.0 + t.abs())
}

/// Product of identical one-dimensional graphs.
struct Separable<G> {
    g: G,
    max_dim: usize,
}

impl<G: ScalarGraph> SubgradientGraph for Separable<G> {
    fn contains(&self, x: &[f64], v: &[f64], tol: f64) -> bool {
        x.len() == v.len() && x.iter().zip(v).all(|(t, w)| self.g.contains(*t, *w, tol))
    }

    fn enumerate(&self, req: &GraphRequest<'_>) -> Vec<(Vec<f64>, Vec<f64>)> {
        let n = req.x_center.len();
        if n == 0 || n > self.max_dim {
            return Vec::new();
        }
        let mut lists: Vec<Vec<(f64, f64)>> = (0..n)
            .map(|i| {
                let (c, d) = (req.x_center[i], req.v_center[i]);
                self.g.pieces(c - req.x_radius, c + req.x_radius, d - req.v_radius, d + req.v_radius, req.density)
            })
            .collect();
        if lists.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        if n > 1 {
            let per = libm::floor(libm::pow(PRODUCT_CAP as f64, 1.0 / n as f64)) as usize;
            for l in lists.iter_mut() {
                if l.len() > per {
                    let stride = l.len().div_ceil(per);
                    *l = l.iter().step_by(stride).copied().collect();
                }
            }
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let x = (0..n).map(|i| lists[i][idx[i]].0).collect();
            let v = (0..n).map(|i| lists[i][idx[i]].1).collect();
            out.push((x, v));
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < lists[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// `‖x‖₁`
pub fn abs() -> ExtendedFn {
    ExtendedFn::new("abs", |x| x.iter().map(|t| t.abs()).sum())
        .with_graph(Separable { g: KinkAtZero { slope: sign, at_zero: (-1.0, 1.0) }, max_dim: usize::MAX })
        .with_prox(|x, lam| x.iter().map(|t| sign(*t) * (t.abs() - lam).max(0.0)).collect())
        .with_breakpoints(vec![0.0])
}

/// Number of nonzero coordinates.
pub fn l0() -> ExtendedFn {
    ExtendedFn::new("l0", |x| x.iter().filter(|t| **t != 0.0).count() as f64)
        .with_graph(Separable {
            g: KinkAtZero { slope: zero_slope, at_zero: (f64::NEG_INFINITY, f64::INFINITY) },
            max_dim: 3,
        })
        .with_breakpoints(vec![0.0])
}

/// `Σ log(1 + |x_i|)`
pub fn logsum() -> ExtendedFn {
    ExtendedFn::new("logsum", |x| x.iter().map(|t| libm::log1p(t.abs())).sum())
        .with_graph(Separable { g: KinkAtZero { slope: logsum_slope, at_zero: (-1.0, 1.0) }, max_dim: usize::MAX })
        .with_breakpoints(vec![0.0])
}

struct StepGraph;

impl ScalarGraph for StepGraph {
    fn contains(&self, t: f64, v: f64, tol: f64) -> bool {
        if t == 0.0 {
            v >= -tol
        } else {
            v.abs() <= tol
        }
    }

    fn pieces(&self, lo: f64, hi: f64, vlo: f64, vhi: f64, density: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for t in axis(lo, hi, density, &[0.0]) {
            if t == 0.0 {
                segment(&mut out, 0.0, 0.0, f64::INFINITY, vlo, vhi, density);
            } else {
                point(&mut out, t, 0.0, vlo, vhi);
            }
        }
        out
    }
}

/// `0` for `x ≤ 0`, `1` for `x > 0`.
pub fn step() -> ExtendedFn {
    ExtendedFn::new("step", |x| if x[0] > 0.0 { 1.0 } else { 0.0 })
        .with_dim(1)
        .with_graph(Separable { g: StepGraph, max_dim: 1 })
        .with_breakpoints(vec![0.0])
}

/// Branch index `n ≥ 1` with `|x| ∈ (1/(n+1), 1/n]`; `1` for `|x| > 1`.
fn dl_branch(a: f64) -> u64 {
    if a >= 1.0 {
        return 1;
    }
    let mut n = libm::floor(1.0 / a).max(1.0) as u64;
    while n > 1 && a > 1.0 / n as f64 {
        n -= 1;
    }
    while a <= 1.0 / (n + 1) as f64 {
        n += 1;
    }
    n
}

fn dl_value(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return 0.0;
    }
    let n = dl_branch(a) as f64;
    ((1.0 + 1.0 / n) * a - 1.0 / (n * (n + 1.0))).min(1.0 / n)
}

/// End of the sloped piece of branch `n`.
fn dl_corner(n: f64) -> f64 {
    (n + 2.0) / ((n + 1.0) * (n + 1.0))
}

struct DlGraph;

impl DlGraph {
    /// Subgradients at `a = |x| > 0`, for `x > 0`.
    fn at_positive(a: f64) -> (Vec<f64>, Option<(f64, f64)>) {
        let n = dl_branch(a) as f64;
        let slope = 1.0 + 1.0 / n;
        let tol = 1e-14;
        if a < 1.0 && (a - 1.0 / n).abs() <= tol {
            // a = 1/n: flat of branch n on the left, slope of branch n-1 on the right
            let right = if n > 1.0 { 1.0 + 1.0 / (n - 1.0) } else { 0.0 };
            return (vec![], Some((0.0, right)));
        }
        let c = dl_corner(n);
        if a < 1.0 && (a - c).abs() <= tol {
            return (vec![0.0, slope], None);
        }
        if a < c && a < 1.0 {
            (vec![slope], None)
        } else {
            (vec![0.0], None)
        }
    }
}

impl ScalarGraph for DlGraph {
    fn contains(&self, t: f64, v: f64, tol: f64) -> bool {
        if t == 0.0 {
            return v.abs() <= 1.0 + tol;
        }
        let s = sign(t);
        let (pts, seg) = DlGraph::at_positive(t.abs());
        pts.iter().any(|p| (s * p - v).abs() <= tol)
            || seg.is_some_and(|(a, b)| s * v >= a - tol && s * v <= b + tol)
    }

    fn pieces(&self, lo: f64, hi: f64, vlo: f64, vhi: f64, density: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if lo <= 0.0 && hi >= 0.0 {
            segment(&mut out, 0.0, -1.0, 1.0, vlo, vhi, density);
        }
        let amax = lo.abs().max(hi.abs());
        let amin = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
        let n_lo = dl_branch(amax.min(1.0)).max(1);
        let n_hi = n_lo + 3 * density as u64;
        let per_piece = (density / 4).max(2);
        let emit = |a: f64, out: &mut Vec<(f64, f64)>| {
            for s in [1.0, -1.0] {
                let t = s * a;
                if t < lo || t > hi {
                    continue;
                }
                let (pts, seg) = DlGraph::at_positive(a);
                for p in pts {
                    point(out, t, s * p, vlo, vhi);
                }
                if let Some((a0, b0)) = seg {
                    let (a1, b1) = if s > 0.0 { (a0, b0) } else { (-b0, -a0) };
                    segment(out, t, a1, b1, vlo, vhi, density);
                }
            }
        };
        for n in n_lo..=n_hi {
            let nf = n as f64;
            let left = 1.0 / (nf + 1.0);
            let right = 1.0 / nf;
            if right < amin {
                break;
            }
            let c = dl_corner(nf);
            // the kink at 1/n belongs to the segment of branch n
            emit(right, &mut out);
            emit(c, &mut out);
            for a in linspace(left, c, per_piece + 2).into_iter().skip(1).take(per_piece) {
                emit(a, &mut out);
            }
            for a in linspace(c, right, per_piece + 2).into_iter().skip(1).take(per_piece) {
                emit(a, &mut out);
            }
        }
        // constant part beyond 1
        if amax > 1.0 {
            for a in linspace(1.0, amax, density).into_iter().skip(1) {
                emit(a, &mut out);
            }
        }
        out
    }
}

/// Piecewise linear function with steps accumulating at the origin:
/// `min{(1 + 1/n)|x| − 1/(n(n+1)), 1/n}` on `1/(n+1) < |x| ≤ 1/n`, `0` at the
/// origin and `1` for `|x| > 1`.
pub fn dl_counterexample() -> ExtendedFn {
    let mut bp = vec![0.0];
    for n in 1..=200u32 {
        let nf = n as f64;
        for a in [1.0 / nf, dl_corner(nf)] {
            bp.push(a);
            bp.push(-a);
        }
    }
    ExtendedFn::new("dl-counterexample", |x| dl_value(x[0]))
        .with_dim(1)
        .with_graph(Separable { g: DlGraph, max_dim: 1 })
        .with_breakpoints(bp)
}

/// `(σ/2)‖x‖²`
pub fn quad(sigma: f64) -> ExtendedFn {
    ExtendedFn::new(format!("quad({sigma})"), move |x| 0.5 * sigma * crate::linalg::norm_sq(x))
        .with_gradient(move |x| x.iter().map(|t| sigma * t).collect())
        .with_hessian(move |x| Matrix::diag(&vec![sigma; x.len()]))
        .with_prox(move |x, lam| x.iter().map(|t| t / (1.0 + sigma * lam)).collect())
}

/// `−‖x‖²`
pub fn neg_quad() -> ExtendedFn {
    ExtendedFn::new("neg-quad", |x| -crate::linalg::norm_sq(x))
        .with_gradient(|x| x.iter().map(|t| -2.0 * t).collect())
        .with_hessian(|x| Matrix::diag(&vec![-2.0; x.len()]))
}

const HUBER_DELTA: f64 = 0.5;

/// Coordinatewise Huber function with threshold `0.5`.
pub fn huber_target() -> ExtendedFn {
    let d = HUBER_DELTA;
    ExtendedFn::new("huber-target", move |x| {
        x.iter().map(|t| if t.abs() <= d { t * t / (2.0 * d) } else { t.abs() - d / 2.0 }).sum()
    })
    .with_gradient(move |x| x.iter().map(|t| (t / d).clamp(-1.0, 1.0)).collect())
    .with_hessian(move |x| Matrix::diag(&x.iter().map(|t| if t.abs() <= d { 1.0 / d } else { 0.0 }).collect::<Vec<_>>()))
}

/// Indicator of the nonpositive orthant.
pub fn nonpositive_indicator() -> ExtendedFn {
    ExtendedFn::new("nonpos-indicator", |x| if x.iter().all(|t| *t <= 0.0) { 0.0 } else { f64::INFINITY })
        .with_graph(Separable { g: NonposGraph, max_dim: usize::MAX })
        .with_prox(|x, _| x.iter().map(|t| t.min(0.0)).collect())
        .with_breakpoints(vec![0.0])
}

struct NonposGraph;

impl ScalarGraph for NonposGraph {
    fn contains(&self, t: f64, v: f64, tol: f64) -> bool {
        if t > 0.0 {
            false
        } else if t == 0.0 {
            v >= -tol
        } else {
            v.abs() <= tol
        }
    }

    fn pieces(&self, lo: f64, hi: f64, vlo: f64, vhi: f64, density: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for t in axis(lo, hi.min(0.0), density, &[0.0]) {
            if t == 0.0 {
                segment(&mut out, 0.0, 0.0, f64::INFINITY, vlo, vhi, density);
            } else if t < 0.0 {
                point(&mut out, t, 0.0, vlo, vhi);
            }
        }
        out
    }
}

fn poly(n: usize, pairs: &[(f64, &[u32])]) -> SmoothFn {
    SmoothFn::from_poly("poly", Polynomial::from_pairs(n, pairs).expect("static polynomial"))
}

/// `min x²` s.t. `x ≤ 0`.
pub fn nlp_quad_ineq() -> NlpProblem {
    NlpProblem::new(1, 1, vec![poly(1, &[(1.0, &[2])]), poly(1, &[(1.0, &[1])])]).expect("static problem")
}

/// `min −x` s.t. `x ≤ 0`.
pub fn nlp_linear_ineq() -> NlpProblem {
    NlpProblem::new(1, 1, vec![poly(1, &[(-1.0, &[1])]), poly(1, &[(1.0, &[1])])]).expect("static problem")
}

/// `min −x₁² + x₂²` s.t. `x₁ ≤ 0`.
pub fn nlp_indefinite() -> NlpProblem {
    NlpProblem::new(2, 1, vec![poly(2, &[(-1.0, &[2, 0]), (1.0, &[0, 2])]), poly(2, &[(1.0, &[1, 0])])])
        .expect("static problem")
}

/// `min x²` s.t. `x ≤ 0` twice.
pub fn nlp_degenerate_licq() -> NlpProblem {
    NlpProblem::new(1, 2, vec![poly(1, &[(1.0, &[2])]), poly(1, &[(1.0, &[1])]), poly(1, &[(1.0, &[1])])])
        .expect("static problem")
}

/// Unconstrained `min x⁴`.
pub fn nlp_quartic() -> NlpProblem {
    NlpProblem::new(1, 0, vec![poly(1, &[(1.0, &[4])])]).expect("static problem")
}

/// `min x₁² − x₂²` s.t. `x₂ = 0`.
pub fn nlp_saddle_equality() -> NlpProblem {
    NlpProblem::new(2, 0, vec![poly(2, &[(1.0, &[2, 0]), (-1.0, &[0, 2])]), poly(2, &[(1.0, &[0, 1])])])
        .expect("static problem")
}

/// Property a known fact asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    /// Variational convexity (strong when the modulus is positive).
    VariationalConvexity,
    /// Convexity of `φ` on a plain ball around `x̄`.
    LocalConvexity,
    ProxRegularity,
    /// Monotonicity of the graph with the `ε`-cut.
    PhiLocalMonotonicity,
    /// Monotonicity of the graph without the cut.
    LocalMonotonicity,
    LocalMinimizer,
    PointbasedSufficiency,
    Licq,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::VariationalConvexity => "variational-convexity",
            Property::LocalConvexity => "local-convexity",
            Property::ProxRegularity => "prox-regularity",
            Property::PhiLocalMonotonicity => "phi-local-monotonicity",
            Property::LocalMonotonicity => "local-monotonicity",
            Property::LocalMinimizer => "local-minimizer",
            Property::PointbasedSufficiency => "pointbased-sufficiency",
            Property::Licq => "licq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownFact {
    pub property: Property,
    pub x_bar: Vec<f64>,
    pub v_bar: Vec<f64>,
    pub modulus: f64,
    pub expected: Status,
}

fn fact(property: Property, x: &[f64], v: &[f64], modulus: f64, expected: Status) -> KnownFact {
    KnownFact { property, x_bar: x.to_vec(), v_bar: v.to_vec(), modulus, expected }
}

#[derive(Debug, Clone)]
pub enum EntryKind {
    Function(ExtendedFn),
    Nlp(NlpProblem),
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub id: String,
    pub kind: EntryKind,
    pub known_facts: Vec<KnownFact>,
}

impl GalleryEntry {
    pub fn function(&self) -> Option<&ExtendedFn> {
        match &self.kind {
            EntryKind::Function(f) => Some(f),
            EntryKind::Nlp(_) => None,
        }
    }

    pub fn nlp(&self) -> Option<&NlpProblem> {
        match &self.kind {
            EntryKind::Nlp(p) => Some(p),
            EntryKind::Function(_) => None,
        }
    }
}

/// Registered ids; `quad(σ)` takes any finite `σ`.
pub const IDS: [&str; 15] = [
    "l0",
    "logsum",
    "step",
    "dl-counterexample",
    "abs",
    "quad(2)",
    "neg-quad",
    "huber-target",
    "nonpos-indicator",
    "nlp-quad-ineq",
    "nlp-linear-ineq",
    "nlp-indefinite",
    "nlp-degenerate-licq",
    "nlp-quartic",
    "nlp-saddle-equality",
];

fn parse_quad(id: &str) -> Option<f64> {
    let inner = id.strip_prefix("quad(")?.strip_suffix(')')?;
    inner.trim().parse::<f64>().ok().filter(|s| s.is_finite())
}

pub fn get(id: &str) -> Result<GalleryEntry> {
    use Property::*;
    use Status::{Fails, Holds};
    let f = |kind, facts| Ok(GalleryEntry { id: id.to_string(), kind: EntryKind::Function(kind), known_facts: facts });
    let p = |kind, facts| Ok(GalleryEntry { id: id.to_string(), kind: EntryKind::Nlp(kind), known_facts: facts });
    if let Some(sigma) = parse_quad(id) {
        let mut facts = vec![fact(VariationalConvexity, &[0.0], &[0.0], sigma.max(0.0), if sigma >= 0.0 { Holds } else { Fails })];
        if sigma >= 0.0 {
            facts.push(fact(VariationalConvexity, &[0.0], &[0.0], sigma + 0.5, Fails));
        }
        return f(quad(sigma), facts);
    }
    match id {
        "l0" => f(
            l0(),
            vec![
                fact(VariationalConvexity, &[0.0], &[0.0], 0.0, Holds),
                fact(VariationalConvexity, &[0.0], &[0.5], 0.0, Holds),
                fact(VariationalConvexity, &[0.0], &[-0.5], 0.0, Holds),
                fact(LocalConvexity, &[0.0], &[0.0], 0.0, Fails),
            ],
        ),
        "logsum" => f(
            logsum(),
            vec![
                fact(VariationalConvexity, &[0.0], &[0.0], 0.0, Holds),
                fact(VariationalConvexity, &[0.0], &[0.5], 0.0, Holds),
            ],
        ),
        "step" => f(
            step(),
            vec![
                fact(PhiLocalMonotonicity, &[0.0], &[0.0], 0.0, Holds),
                fact(LocalMonotonicity, &[0.0], &[0.0], 0.0, Fails),
            ],
        ),
        "dl-counterexample" => f(
            dl_counterexample(),
            vec![
                fact(ProxRegularity, &[0.0], &[0.0], 0.0, Fails),
                fact(LocalMinimizer, &[0.0], &[0.0], 0.0, Holds),
                fact(VariationalConvexity, &[0.0], &[0.0], 0.0, Fails),
            ],
        ),
        "abs" => f(abs(), vec![fact(VariationalConvexity, &[0.0], &[0.0], 0.0, Holds)]),
        "neg-quad" => f(neg_quad(), vec![fact(VariationalConvexity, &[0.0], &[0.0], 0.0, Fails)]),
        "huber-target" => f(huber_target(), vec![fact(VariationalConvexity, &[0.0], &[0.0], 0.0, Holds)]),
        "nonpos-indicator" => f(nonpositive_indicator(), vec![fact(VariationalConvexity, &[0.0], &[0.0], 0.0, Holds)]),
        "nlp-quad-ineq" => p(nlp_quad_ineq(), vec![fact(PointbasedSufficiency, &[0.0], &[0.0], 0.0, Holds)]),
        "nlp-linear-ineq" => p(nlp_linear_ineq(), vec![fact(PointbasedSufficiency, &[0.0], &[0.0], 0.0, Holds)]),
        "nlp-indefinite" => p(nlp_indefinite(), vec![fact(PointbasedSufficiency, &[0.0, 0.0], &[0.0, 0.0], 0.0, Fails)]),
        "nlp-degenerate-licq" => p(nlp_degenerate_licq(), vec![fact(Licq, &[0.0], &[0.0], 0.0, Fails)]),
        "nlp-quartic" => p(nlp_quartic(), vec![fact(PointbasedSufficiency, &[0.0], &[0.0], 0.0, Fails)]),
        "nlp-saddle-equality" => {
            p(nlp_saddle_equality(), vec![fact(PointbasedSufficiency, &[0.0, 0.0], &[0.0, 0.0], 0.0, Holds)])
        }
        _ => Err(Error::UnknownId(id.to_string())),
    }
}

/// Exact discretisation of `gph ∂φ` for a gallery function in `window`
/// around `p`.
pub fn analytic_graph(id: &str, p: &RefPair, window: Window, density: usize) -> Result<SubgradGraphSample> {
    let entry = get(id)?;
    let f = entry.function().ok_or_else(|| Error::NoAnalyticGraph(id.to_string()))?;
    if f.graph().is_none() {
        return Err(Error::NoAnalyticGraph(id.to_string()));
    }
    varconv::enumerate_graph(f, p, window, density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Objective;

    #[test]
    fn value_examples() {
        assert_eq!(get("l0").unwrap().function().unwrap().eval(&[1.0, 0.0, 2.0]).unwrap(), 2.0);
        assert_eq!(get("logsum").unwrap().function().unwrap().eval(&[1.0]).unwrap(), libm::log(2.0));
        assert_eq!(get("dl-counterexample").unwrap().function().unwrap().eval(&[0.5]).unwrap(), 0.5);
        assert_eq!(get("nope").unwrap_err(), Error::UnknownId("nope".to_string()));
        assert_eq!(get("quad(2.5)").unwrap().function().unwrap().eval(&[2.0]).unwrap(), 5.0);
    }

    #[test]
    fn dl_is_continuous_at_branch_ends() {
        for n in 1..50u32 {
            let nf = n as f64;
            for a in [1.0 / (nf + 1.0), dl_corner(nf), 1.0 / nf] {
                let l = dl_value(a * (1.0 - 1e-12));
                let r = dl_value(a * (1.0 + 1e-12));
                assert!((l - r).abs() < 1e-9, "n={n} a={a}");
            }
        }
        assert_eq!(dl_value(0.0), 0.0);
        assert_eq!(dl_value(3.0), 1.0);
        // bounded below by |x|
        for k in 1..2000 {
            let x = k as f64 / 1000.0 - 1.0;
            assert!(dl_value(x) >= x.abs() - 1e-15);
        }
    }

    #[test]
    fn analytic_graph_examples() {
        let f = l0();
        let p = RefPair::new(&f, vec![0.0], vec![0.0]).unwrap();
        let g = analytic_graph("l0", &p, Window::new(1.0, 1.0, 0.5), 21).unwrap();
        assert!(!g.is_empty() && g.triples.iter().all(|t| t.x == [0.0]));

        let f = logsum();
        let p = RefPair::new(&f, vec![0.0], vec![0.0]).unwrap();
        let g = analytic_graph("logsum", &p, Window::new(1.0, 2.0, 2.0), 21).unwrap();
        let at0: Vec<f64> = g.triples.iter().filter(|t| t.x == [0.0]).map(|t| t.v[0]).collect();
        assert!(at0.len() > 2 && at0.iter().all(|v| v.abs() <= 1.0));
        assert!(at0.contains(&-1.0) && at0.contains(&1.0));

        let f = step();
        let p = RefPair::new(&f, vec![0.0], vec![0.0]).unwrap();
        let g = analytic_graph("step", &p, Window::new(1.0, 1.0, 2.0), 21).unwrap();
        assert!(g.triples.iter().filter(|t| t.x[0] < 0.0).all(|t| t.v == [0.0]));

        assert_eq!(
            analytic_graph("neg-quad", &p, Window::default(), 5).unwrap_err(),
            Error::NoAnalyticGraph("neg-quad".to_string())
        );
    }

    #[test]
    fn graphs_are_consistent_with_membership() {
        for f in [abs(), l0(), logsum(), step(), dl_counterexample(), nonpositive_indicator()] {
            let g = f.graph().unwrap();
            let pairs = g.enumerate(&GraphRequest {
                x_center: &[0.0],
                x_radius: 0.6,
                v_center: &[0.0],
                v_radius: 2.5,
                density: 11,
            });
            assert!(!pairs.is_empty(), "{}", f.name());
            for (x, v) in pairs {
                assert!(g.contains(&x, &v, 1e-12), "{} {x:?} {v:?}", f.name());
            }
        }
    }

    #[test]
    fn dl_graph_has_both_kink_types() {
        let g = dl_counterexample();
        let gr = g.graph().unwrap();
        let c = dl_corner(3.0);
        assert!(gr.contains(&[c], &[0.0], 1e-12) && gr.contains(&[c], &[4.0 / 3.0], 1e-12));
        assert!(!gr.contains(&[c], &[0.5], 1e-12));
        assert!(gr.contains(&[1.0 / 3.0], &[0.7], 1e-12));
        assert!(gr.contains(&[-1.0 / 3.0], &[-0.7], 1e-12));
    }

    #[test]
    fn product_graph_is_capped() {
        let f = abs();
        let pairs = f.graph().unwrap().enumerate(&GraphRequest {
            x_center: &[0.0, 0.0, 0.0],
            x_radius: 1.0,
            v_center: &[0.0, 0.0, 0.0],
            v_radius: 1.0,
            density: 41,
        });
        assert!(!pairs.is_empty() && pairs.len() <= PRODUCT_CAP);
        assert!(l0()
            .graph()
            .unwrap()
            .enumerate(&GraphRequest { x_center: &[0.0; 4], x_radius: 1.0, v_center: &[0.0; 4], v_radius: 1.0, density: 5 })
            .is_empty());
    }

    #[test]
    fn every_id_resolves() {
        for id in IDS {
            let e = get(id).unwrap();
            assert!(!e.known_facts.is_empty(), "{id}");
        }
    }
}
