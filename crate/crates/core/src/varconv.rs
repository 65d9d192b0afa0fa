//! Variational (strong) convexity checks through three equivalent routes:
//! the subgradient inequality on an attentive graph localisation, local
//! (strong) monotonicity of that localisation, and local (strong) convexity
//! of Moreau envelopes behind a prox-regularity gate.
//!
//! Graph-based routes are exact for the sampled window when the function
//! ships an explicit graph (1-D piecewise gallery members); otherwise they
//! test necessary conditions only.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::domain::{
    sample_neighborhood, validate_refpair, ExtendedFn, GraphRequest, NeighborhoodSpec, Objective, RefPair, Status,
    Verdict, Witness, GRAPH_TOL,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::moreau::{self, EnvelopeHandle, LAMBDA_SCHEDULE};
use crate::oracles::GridSpec;

/// Localisation window: `‖x − x̄‖ ≤ u_radius`, `‖v − v̄‖ ≤ v_radius`,
/// `φ(x) < φ(x̄) + epsilon`. An infinite `epsilon` disables the attentive cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub u_radius: f64,
    pub v_radius: f64,
    pub epsilon: f64,
}

impl Default for Window {
    fn default() -> Self {
        Window { u_radius: 0.5, v_radius: 0.5, epsilon: 0.5 }
    }
}

impl Window {
    pub fn new(u_radius: f64, v_radius: f64, epsilon: f64) -> Self {
        Window { u_radius, v_radius, epsilon }
    }

    pub fn scaled(self, s: f64) -> Self {
        Window { u_radius: self.u_radius * s, v_radius: self.v_radius * s, epsilon: self.epsilon * s }
    }

    /// Same window without the attentive cut.
    pub fn without_cut(self) -> Self {
        Window { epsilon: f64::INFINITY, ..self }
    }

    /// Single radius used by the prox-regularity inequality.
    pub fn prox_eps(&self) -> f64 {
        self.u_radius.min(self.v_radius).min(self.epsilon)
    }
}

pub const DEFAULT_DENSITY: usize = 21;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphTriple {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub phi_x: f64,
}

/// Finite piece of `gph ∂φ` inside a window around a reference pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradGraphSample {
    pub triples: Vec<GraphTriple>,
    pub reference: RefPair,
    pub window: Window,
}

impl SubgradGraphSample {
    fn admits(&self, w: &Window, t: &GraphTriple) -> bool {
        let p = &self.reference;
        linalg::dist(&t.x, &p.x_bar) <= w.u_radius
            && linalg::dist(&t.v, &p.v_bar) <= w.v_radius
            && (!w.epsilon.is_finite() || t.phi_x < p.phi_at_x_bar + w.epsilon)
    }

    /// Sub-sample for a smaller window (exact subset of `self`).
    pub fn restrict(&self, w: Window) -> SubgradGraphSample {
        let triples = self.triples.iter().filter(|t| self.admits(&w, t)).cloned().collect();
        SubgradGraphSample { triples, reference: self.reference.clone(), window: w }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// Samples `gph ∂φ` in `window`, from the function's graph enumerator or, for
/// smooth functions, from `∇φ` at points of the `U`-ball.
pub fn enumerate_graph(f: &ExtendedFn, p: &RefPair, window: Window, density: usize) -> Result<SubgradGraphSample> {
    let density = density.max(2);
    let raw: Vec<(Vec<f64>, Vec<f64>)> = if let Some(g) = f.graph() {
        g.enumerate(&GraphRequest {
            x_center: &p.x_bar,
            x_radius: window.u_radius,
            v_center: &p.v_bar,
            v_radius: window.v_radius,
            density,
        })
    } else if f.smooth_order() >= 1 {
        let n = p.dim();
        let count = density.pow(n.min(2) as u32) + 1;
        let mut pts = sample_neighborhood(&NeighborhoodSpec::new(p.x_bar.clone(), window.u_radius, count))?;
        pts.push(p.x_bar.clone());
        let mut out = Vec::with_capacity(pts.len());
        for x in pts {
            if !f.eval(&x)?.is_finite() {
                continue;
            }
            let g = f.gradient(&x).expect("smooth_order >= 1")?;
            out.push((x, g));
        }
        out
    } else {
        return Err(Error::NoEnumerator);
    };
    let mut sample = SubgradGraphSample { triples: Vec::with_capacity(raw.len()), reference: p.clone(), window };
    for (x, v) in raw {
        let phi_x = f.eval(&x)?;
        let t = GraphTriple { x, v, phi_x };
        if phi_x.is_finite() && sample.admits(&window, &t) {
            sample.triples.push(t);
        }
    }
    Ok(sample)
}

/// `⟨v₁ − v₂, x₁ − x₂⟩ − κ‖x₁ − x₂‖²` with its tolerance.
pub fn monotonicity_gap(x1: &[f64], v1: &[f64], x2: &[f64], v2: &[f64], modulus: f64) -> (f64, f64) {
    let dx = linalg::sub(x1, x2);
    let dv = linalg::sub(v1, v2);
    let gap = linalg::dot(&dv, &dx) - modulus * linalg::norm_sq(&dx);
    (gap, 1e-10 * (1.0 + linalg::norm(&dv) * linalg::norm(&dx)))
}

/// (Strong) monotonicity over all pairs of the sample. The first violating
/// pair in enumeration order is the witness.
pub fn check_monotone(graph: &SubgradGraphSample, modulus: f64) -> Result<Verdict> {
    let tag = "local-monotonicity";
    if graph.is_empty() {
        return Err(Error::EmptyGraphSample);
    }
    let t = &graph.triples;
    let mut used = 0;
    for i in 0..t.len() {
        for j in (i + 1)..t.len() {
            used += 1;
            let (gap, tol) = monotonicity_gap(&t[i].x, &t[i].v, &t[j].x, &t[j].v, modulus);
            if gap < -tol {
                let w = Witness::new(-gap)
                    .with("x1", t[i].x.clone())
                    .with("v1", t[i].v.clone())
                    .with("x2", t[j].x.clone())
                    .with("v2", t[j].v.clone());
                return Ok(Verdict::fails(tag, w).with_metric("modulus", modulus).with_samples(used));
            }
        }
    }
    Ok(Verdict::holds(tag).with_metric("modulus", modulus).with_tol("pair_relative", 1e-10).with_samples(used))
}

/// `φ(x) − φ(u) − ⟨v, x − u⟩ − (κ/2)‖x − u‖²` and its tolerance, or `None`
/// when `φ(x) = +∞`.
pub fn subgrad_inequality_gap(
    f: &impl Objective,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    phi_u: f64,
    modulus: f64,
) -> Result<Option<(f64, f64)>> {
    let fx = f.eval(x)?;
    if !fx.is_finite() {
        return Ok(None);
    }
    let d = linalg::sub(x, u);
    let gap = fx - phi_u - linalg::dot(v, &d) - 0.5 * modulus * linalg::norm_sq(&d);
    Ok(Some((gap, 1e-9 * (1.0 + fx.abs() + phi_u.abs()))))
}

/// Subgradient inequality for every test point and every graph pair.
pub fn check_subgrad_inequality(
    f: &impl Objective,
    graph: &SubgradGraphSample,
    test_points: &[Vec<f64>],
    modulus: f64,
) -> Result<Verdict> {
    let tag = "subgradient-inequality";
    if graph.is_empty() {
        return Err(Error::EmptyGraphSample);
    }
    let mut used = 0;
    for x in test_points {
        for t in &graph.triples {
            let Some((gap, tol)) = subgrad_inequality_gap(f, x, &t.x, &t.v, t.phi_x, modulus)? else {
                continue;
            };
            used += 1;
            if gap < -tol {
                let w = Witness::new(-gap).with("x", x.clone()).with("u", t.x.clone()).with("v", t.v.clone());
                return Ok(Verdict::fails(tag, w).with_metric("modulus", modulus).with_samples(used));
            }
        }
    }
    Ok(Verdict::holds(tag).with_metric("modulus", modulus).with_tol("value_relative", 1e-9).with_samples(used))
}

/// Settings for [`check_variational_convexity`].
#[derive(Debug, Clone, PartialEq)]
pub struct VcConfig {
    pub window: Window,
    pub density: usize,
    pub lambdas: Vec<f64>,
    pub r_max: f64,
    /// Envelope sampling radius as a multiple of `λ`.
    pub envelope_radius_factor: f64,
    pub envelope_samples: usize,
    /// Re-check at half and quarter windows before declaring failure.
    pub escalate: bool,
    pub graph_tol: f64,
}

impl Default for VcConfig {
    fn default() -> Self {
        VcConfig {
            window: Window::default(),
            density: DEFAULT_DENSITY,
            lambdas: LAMBDA_SCHEDULE.to_vec(),
            r_max: 1e3,
            envelope_radius_factor: 0.4,
            envelope_samples: 21,
            escalate: true,
            graph_tol: GRAPH_TOL,
        }
    }
}

fn escalate<F>(cfg: &VcConfig, mut check: F) -> Result<Verdict>
where
    F: FnMut(Window) -> Result<Verdict>,
{
    let first = check(cfg.window)?;
    if !first.is_fails() || !cfg.escalate {
        return Ok(first);
    }
    let mut last = first;
    for s in [0.5, 0.25] {
        let v = check(cfg.window.scaled(s))?;
        if !v.is_fails() {
            return Ok(v.with_note(format!("violation at the full window vanished at scale {s}")));
        }
        last = v.with_note(format!("violation persists at scale {s}"));
    }
    Ok(last)
}

fn test_points(p: &RefPair, graph: &SubgradGraphSample, u_radius: f64, density: usize) -> Result<Vec<Vec<f64>>> {
    let n = p.dim();
    let count = density.pow(n.min(2) as u32);
    let mut pts = sample_neighborhood(&NeighborhoodSpec::new(p.x_bar.clone(), u_radius, count))?;
    pts.extend(graph.triples.iter().map(|t| t.x.clone()));
    pts.retain(|x| linalg::dist(x, &p.x_bar) <= u_radius);
    Ok(pts)
}

/// Prox-regularity with window escalation.
pub fn prox_regularity_gate(f: &ExtendedFn, p: &RefPair, graph: &SubgradGraphSample, cfg: &VcConfig) -> Result<Verdict> {
    escalate(cfg, |w| {
        let g = graph.restrict(w);
        match moreau::check_prox_regularity(f, p, w.prox_eps(), cfg.r_max, &g) {
            Err(Error::EmptyGraphSample) => Ok(Verdict::inconclusive("prox-regularity").with_note("empty graph sample")),
            other => other,
        }
    })
}

/// Per-λ envelope convexity and the aggregate over the two smallest λ that
/// could be evaluated.
pub fn envelope_route(f: &ExtendedFn, p: &RefPair, modulus: f64, cfg: &VcConfig) -> Result<Verdict> {
    let n = p.dim();
    let mut lambdas = cfg.lambdas.clone();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    let mut per: Vec<Verdict> = Vec::new();
    let mut agg = Verdict::holds("envelope-route");
    for &lam in &lambdas {
        let c = p.shifted_center(lam);
        let probe = GridSpec::cube(&c, 1.0, 41);
        let bounded = moreau::is_prox_bounded(f, lam, &probe)?;
        if bounded.is_fails() {
            agg = agg.with_note(format!("lambda {lam} skipped: not prox-bounded"));
            continue;
        }
        let h = EnvelopeHandle::new(f.clone(), lam, n)?;
        let em = moreau::envelope_modulus(modulus, lam);
        let region = NeighborhoodSpec::new(c, cfg.envelope_radius_factor * lam, cfg.envelope_samples);
        match moreau::check_envelope_local_convexity(&h, p, em, &region) {
            Ok(v) => per.push(v),
            Err(e @ (Error::UnboundedBelow | Error::AllInfinite)) => {
                agg = agg.with_note(format!("lambda {lam} skipped: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    if per.is_empty() {
        return Ok(Verdict::inconclusive("envelope-route").with_note("no lambda could be evaluated"));
    }
    let tail = &per[per.len().saturating_sub(2)..];
    let status = if tail.iter().all(|v| v.is_holds()) {
        Status::Holds
    } else if tail.iter().all(|v| v.is_fails()) {
        Status::Fails
    } else {
        Status::Inconclusive
    };
    agg.status = status;
    if status == Status::Fails {
        agg.witness = tail[tail.len() - 1].witness.clone().map(|w| {
            let lam = tail[tail.len() - 1].metric("lambda").unwrap_or(f64::NAN);
            w.scalar("envelope_lambda", lam)
        });
    }
    agg.samples_used = per.iter().map(|v| v.samples_used).sum();
    for v in per {
        agg = agg.with_sub(v);
    }
    Ok(agg.with_metric("modulus", modulus))
}

/// Variational (strong, if `modulus > 0`) convexity at `(x̄, v̄)`.
///
/// Decided by the prox-regularity gate and the envelope route; the
/// subgradient-inequality and monotonicity routes run as cross-checks and
/// are attached as sub-verdicts.
pub fn check_variational_convexity(f: &ExtendedFn, p: &RefPair, modulus: f64, cfg: &VcConfig) -> Result<Verdict> {
    if !(modulus >= 0.0) {
        return Err(Error::InvalidArgument("modulus must be nonnegative".to_string()));
    }
    let tag = if modulus > 0.0 { "variational-strong-convexity" } else { "variational-convexity" };
    let member = validate_refpair(f, p, cfg.graph_tol)?;
    if member.is_fails() {
        let mut v = Verdict::fails(tag, member.witness.clone().expect("fails carries a witness"));
        v = v.with_note("reference subgradient is not in the subdifferential").with_sub(member);
        return Ok(v.with_metric("modulus", modulus));
    }
    let graph = enumerate_graph(f, p, cfg.window, cfg.density)?;
    let gate = prox_regularity_gate(f, p, &graph, cfg)?;
    let env = envelope_route(f, p, modulus, cfg)?;

    let inequality = escalate(cfg, |w| {
        let g = graph.restrict(w);
        if g.is_empty() {
            return Ok(Verdict::inconclusive("subgradient-inequality"));
        }
        let pts = test_points(p, &g, w.u_radius, cfg.density)?;
        check_subgrad_inequality(f, &g, &pts, modulus)
    })?;
    let monotone = escalate(cfg, |w| {
        let g = graph.restrict(w);
        if g.is_empty() {
            return Ok(Verdict::inconclusive("local-monotonicity"));
        }
        check_monotone(&g, modulus)
    })?;

    let mut v = if gate.is_fails() {
        Verdict::fails(tag, gate.witness.clone().expect("fails carries a witness"))
            .with_note("prox-regularity gate failed")
    } else {
        let mut v = Verdict::new(env.status, tag);
        v.witness = env.witness.clone();
        if gate.status == Status::Inconclusive && v.status == Status::Holds {
            v.status = Status::Inconclusive;
        }
        v
    };
    let routes_agree = [&inequality, &monotone].iter().all(|r| r.status == env.status);
    v = v.with_note(if routes_agree { "routes agree" } else { "routes disagree" });
    v.samples_used = gate.samples_used + env.samples_used + inequality.samples_used + monotone.samples_used;
    Ok(v.with_metric("modulus", modulus)
        .with_tol("graph_membership", cfg.graph_tol)
        .with_tol("u_radius", cfg.window.u_radius)
        .with_tol("v_radius", cfg.window.v_radius)
        .with_tol("epsilon", cfg.window.epsilon)
        .with_tol("r_max", cfg.r_max)
        .with_sub(member)
        .with_sub(gate)
        .with_sub(env)
        .with_sub(inequality)
        .with_sub(monotone))
}

/// Runs the strong check on `φ` and the plain check on the shifted function
/// `φ − (σ/2)‖· − x̄‖²`; holds when both agree.
pub fn shift_reduction_crosscheck(f: &ExtendedFn, p: &RefPair, sigma: f64, cfg: &VcConfig) -> Result<Verdict> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("sigma must be positive".to_string()));
    }
    let tag = "shift-reduction";
    let strong = check_variational_convexity(f, p, sigma, cfg)?;
    let shifted = moreau::quadratic_shift(f, sigma, &p.x_bar).to_fn();
    let ps = RefPair::new(&shifted, p.x_bar.clone(), p.v_bar.clone())?;
    let plain = check_variational_convexity(&shifted, &ps, 0.0, cfg)?;
    let v = if strong.status == plain.status {
        Verdict::holds(tag).with_note(format!("agreed={}", strong.status))
    } else {
        let w = strong.witness.clone().or_else(|| plain.witness.clone());
        match w {
            Some(w) => Verdict::fails(tag, w).with_note("routes disagree"),
            None => Verdict::inconclusive(tag).with_note("routes disagree without a witness"),
        }
    };
    Ok(v.with_metric("sigma", sigma).with_sub(strong).with_sub(plain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn pair(f: &ExtendedFn, x: f64, v: f64) -> RefPair {
        RefPair::new(f, alloc::vec![x], alloc::vec![v]).unwrap()
    }

    #[test]
    fn abs_graph_contains_vertical_segment() {
        let f = gallery::abs();
        let g = enumerate_graph(&f, &pair(&f, 0.0, 0.0), Window::new(1.0, 1.0, 2.0), 5).unwrap();
        for v in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            assert!(g.triples.iter().any(|t| t.x == [0.0] && t.v == [v]));
        }
        assert!(g.triples.iter().any(|t| t.x == [1.0] && t.v == [1.0]));
        assert!(g.triples.iter().any(|t| t.x == [-1.0] && t.v == [-1.0]));
    }

    #[test]
    fn l0_attentive_graph_is_at_origin() {
        let f = gallery::l0();
        let g = enumerate_graph(&f, &pair(&f, 0.0, 0.0), Window::new(1.0, 1.0, 0.5), 21).unwrap();
        assert!(!g.is_empty());
        assert!(g.triples.iter().all(|t| t.x == [0.0]));
    }

    #[test]
    fn step_graph_cut_excludes_positive_side() {
        let f = gallery::step();
        let g = enumerate_graph(&f, &pair(&f, 0.0, 0.0), Window::default(), 21).unwrap();
        assert!(g.triples.iter().all(|t| t.x[0] <= 0.0));
        let g = enumerate_graph(&f, &pair(&f, 0.0, 0.0), Window::default().without_cut(), 21).unwrap();
        assert!(g.triples.iter().any(|t| t.x[0] > 0.0));
    }

    #[test]
    fn monotone_examples() {
        let f = gallery::abs();
        let g = enumerate_graph(&f, &pair(&f, 0.0, 0.0), Window::default(), 21).unwrap();
        assert!(check_monotone(&g, 0.0).unwrap().is_holds());

        let f = gallery::quad(2.0);
        let g = enumerate_graph(&f, &pair(&f, 0.0, 0.0), Window::default(), 21).unwrap();
        assert!(check_monotone(&g, 2.0).unwrap().is_holds());
        assert!(check_monotone(&g, 2.5).unwrap().is_fails());
    }

    #[test]
    fn step_monotonicity_dichotomy() {
        let f = gallery::step();
        let p = pair(&f, 0.0, 0.0);
        let cut = enumerate_graph(&f, &p, Window::default(), 21).unwrap();
        assert!(check_monotone(&cut, 0.0).unwrap().is_holds());
        let uncut = enumerate_graph(&f, &p, Window::default().without_cut(), 21).unwrap();
        let v = check_monotone(&uncut, 0.0).unwrap();
        assert!(v.is_fails());
        let w = v.witness.unwrap();
        assert_eq!(w.get("x1").unwrap(), [0.0]);
        assert!(w.get("v1").unwrap()[0] > 0.0);
        assert!(w.get("x2").unwrap()[0] > 0.0);
        assert_eq!(w.get("v2").unwrap(), [0.0]);
    }

    #[test]
    fn subgrad_inequality_examples() {
        let f = gallery::l0();
        let p = pair(&f, 0.0, 0.0);
        let g = enumerate_graph(&f, &p, Window::new(0.5, 0.9, 0.5), 21).unwrap();
        let pts = test_points(&p, &g, 0.5, 21).unwrap();
        assert!(check_subgrad_inequality(&f, &g, &pts, 0.0).unwrap().is_holds());

        let f = gallery::logsum();
        let p = pair(&f, 0.0, 0.5);
        let w = Window::default().scaled(0.5);
        let g = enumerate_graph(&f, &p, w, 21).unwrap();
        let pts = test_points(&p, &g, w.u_radius, 21).unwrap();
        assert!(check_subgrad_inequality(&f, &g, &pts, 0.0).unwrap().is_holds());

        let f = gallery::neg_quad();
        let p = pair(&f, 0.0, 0.0);
        let g = enumerate_graph(&f, &p, Window::default(), 21).unwrap();
        let pts = test_points(&p, &g, 0.5, 21).unwrap();
        let v = check_subgrad_inequality(&f, &g, &pts, 0.0).unwrap();
        assert!(v.is_fails());
        assert_ne!(v.witness.unwrap().get("x").unwrap()[0], 0.0);
    }

    #[test]
    fn vc_examples() {
        let cfg = VcConfig::default();
        let f = gallery::l0();
        assert!(check_variational_convexity(&f, &pair(&f, 0.0, 0.0), 0.0, &cfg).unwrap().is_holds());
        let f = gallery::dl_counterexample();
        let v = check_variational_convexity(&f, &pair(&f, 0.0, 0.0), 0.0, &cfg).unwrap();
        assert!(v.is_fails());
        assert!(v.notes.iter().any(|n| n.contains("prox-regularity")));
        let f = gallery::quad(2.0);
        assert!(check_variational_convexity(&f, &pair(&f, 0.0, 0.0), 2.0, &cfg).unwrap().is_holds());
        assert!(check_variational_convexity(&f, &pair(&f, 0.0, 0.0), 2.2, &cfg).unwrap().is_fails());
    }

    #[test]
    fn shift_crosscheck_examples() {
        let cfg = VcConfig::default();
        let f = gallery::quad(2.0);
        let v = shift_reduction_crosscheck(&f, &pair(&f, 0.0, 0.0), 1.0, &cfg).unwrap();
        assert!(v.is_holds() && v.notes.iter().any(|n| n == "agreed=holds"));
        let f = gallery::abs();
        let v = shift_reduction_crosscheck(&f, &pair(&f, 0.0, 0.0), 0.5, &cfg).unwrap();
        assert!(v.is_holds() && v.notes.iter().any(|n| n == "agreed=holds"));
        let f = gallery::neg_quad();
        let v = shift_reduction_crosscheck(&f, &pair(&f, 0.0, 0.0), 1.0, &cfg).unwrap();
        assert!(v.is_holds() && v.notes.iter().any(|n| n == "agreed=fails"), "{v:?}");
    }
}
