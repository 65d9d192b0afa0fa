//! JSON problem specs, command runners and report serialisation behind the
//! `varcvx` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use varcvx_core::gallery::{self, EntryKind, KnownFact, Property};
use varcvx_core::moreau::{self, EnvelopeHandle};
use varcvx_core::nlp::{self, NeighborhoodConfig, NlpProblem, SmoothFn};
use varcvx_core::oracles::{self, GridSpec};
use varcvx_core::poly::{Polynomial, Term};
use varcvx_core::varconv::{self, VcConfig, Window};
use varcvx_core::{
    Error, ExtendedFn, Matrix, NeighborhoodSpec, Objective, RefPair, SamplingScheme, Status, Verdict, Witness,
};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckVc,
    CheckSvc,
    CheckNlp,
    EnvelopeScan,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::CheckVc => "check-vc",
            Command::CheckSvc => "check-svc",
            Command::CheckNlp => "check-nlp",
            Command::EnvelopeScan => "envelope-scan",
        }
    }
}

/// Failures that end a run with exit code 3.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    SpecInvalid(String),
    LicqFailed(Box<Verdict>),
    DimTooHigh(usize),
    Core(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::SpecInvalid(m) => write!(f, "invalid spec: {m}"),
            CliError::LicqFailed(_) => write!(f, "LICQ fails at the reference point"),
            CliError::DimTooHigh(n) => write!(f, "envelope scans support dimension 1 or 2, got {n}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::SpecInvalid(_) => "SpecInvalid",
            CliError::LicqFailed(_) => "LicqFailed",
            CliError::DimTooHigh(_) => "DimTooHigh",
            CliError::Core(_) => "CoreError",
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::SpecInvalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Function,
    Nlp,
}

/// One polynomial: `Σ coeffs[k] · x^exponents[k]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolySpec {
    pub coeffs: Vec<f64>,
    pub exponents: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub u_radius: f64,
    pub v_radius: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: Option<String>,
    pub modulus: Option<f64>,
    pub lambda_list: Option<Vec<f64>>,
    pub window: Option<WindowSpec>,
    pub seed: Option<u64>,
    pub tolerances: Option<BTreeMap<String, f64>>,
    /// Neighborhood radius for the NLP neighborhood check and the tilt ball.
    pub radius: Option<f64>,
    pub samples: Option<usize>,
    pub scan: Option<ScanSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub schema: u32,
    pub kind: Kind,
    pub gallery_id: Option<String>,
    pub polynomial_terms: Option<Vec<PolySpec>>,
    pub n: Option<usize>,
    pub s: Option<usize>,
    pub m: Option<usize>,
    pub ref_point: Vec<f64>,
    #[serde(default)]
    pub ref_subgradient: Option<Vec<f64>>,
    #[serde(default)]
    pub check: CheckSpec,
}

impl ProblemSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema != SCHEMA {
            return Err(invalid(format!("unsupported schema {}", self.schema)));
        }
        match (&self.gallery_id, &self.polynomial_terms) {
            (Some(_), Some(_)) => return Err(invalid("give either gallery_id or polynomial_terms")),
            (None, None) => return Err(invalid("one of gallery_id or polynomial_terms is required")),
            _ => {}
        }
        if self.ref_point.is_empty() || self.ref_point.iter().any(|x| !x.is_finite()) {
            return Err(invalid("ref_point must be a nonempty finite vector"));
        }
        if let Some(v) = &self.ref_subgradient {
            if v.len() != self.ref_point.len() || v.iter().any(|x| !x.is_finite()) {
                return Err(invalid("ref_subgradient must match ref_point"));
            }
        }
        if let Some(terms) = &self.polynomial_terms {
            let n = self.n.unwrap_or(self.ref_point.len());
            if n != self.ref_point.len() {
                return Err(invalid("n does not match ref_point"));
            }
            for (i, p) in terms.iter().enumerate() {
                if p.coeffs.len() != p.exponents.len() {
                    return Err(invalid(format!("polynomial {i}: coeffs and exponents differ in length")));
                }
                if p.exponents.iter().any(|e| e.len() != n) {
                    return Err(invalid(format!("polynomial {i}: exponent vectors need length {n}")));
                }
            }
            match self.kind {
                Kind::Function if terms.len() != 1 => {
                    return Err(invalid("a function spec takes exactly one polynomial"));
                }
                Kind::Nlp => {
                    let m = self.m.unwrap_or(terms.len().saturating_sub(1));
                    if terms.is_empty() || m != terms.len() - 1 {
                        return Err(invalid("an nlp spec takes the objective followed by m constraints"));
                    }
                    if self.s.unwrap_or(0) > m {
                        return Err(invalid("s exceeds m"));
                    }
                }
                _ => {}
            }
        }
        if let Some(w) = &self.check.window {
            if !(w.u_radius > 0.0 && w.v_radius > 0.0 && w.epsilon > 0.0) {
                return Err(invalid("window radii and epsilon must be positive"));
            }
        }
        if let Some(l) = &self.check.lambda_list {
            if l.is_empty() || l.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(invalid("lambda_list entries must be positive"));
            }
        }
        if let Some(m) = self.check.modulus {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(invalid("modulus must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    fn v_bar(&self) -> Vec<f64> {
        self.ref_subgradient.clone().unwrap_or_else(|| vec![0.0; self.ref_point.len()])
    }

    fn check_name(&self) -> Option<&str> {
        self.check.name.as_deref()
    }
}

fn polynomial(n: usize, p: &PolySpec) -> CliResult<Polynomial> {
    let terms = p.coeffs.iter().zip(&p.exponents).map(|(c, e)| Term { coeff: *c, exponents: e.clone() }).collect();
    Ok(Polynomial::new(n, terms)?)
}

fn load_function(spec: &ProblemSpec) -> CliResult<ExtendedFn> {
    if spec.kind != Kind::Function {
        return Err(invalid("this command needs kind = function"));
    }
    if let Some(id) = &spec.gallery_id {
        let entry = gallery::get(id)?;
        return entry.function().cloned().ok_or_else(|| invalid(format!("`{id}` is not a function entry")));
    }
    let n = spec.ref_point.len();
    let p = polynomial(n, &spec.polynomial_terms.as_ref().expect("validated")[0])?;
    let (a, b, c) = (p.clone(), p.clone(), p);
    Ok(ExtendedFn::new("polynomial", move |x| a.eval(x))
        .with_dim(n)
        .with_gradient(move |x| b.gradient(x))
        .with_hessian(move |x| c.hessian(x)))
}

fn load_nlp(spec: &ProblemSpec) -> CliResult<NlpProblem> {
    if spec.kind != Kind::Nlp {
        return Err(invalid("this command needs kind = nlp"));
    }
    if let Some(id) = &spec.gallery_id {
        let entry = gallery::get(id)?;
        return entry.nlp().cloned().ok_or_else(|| invalid(format!("`{id}` is not an nlp entry")));
    }
    let n = spec.ref_point.len();
    let terms = spec.polynomial_terms.as_ref().expect("validated");
    let phi = terms
        .iter()
        .enumerate()
        .map(|(i, t)| Ok(SmoothFn::from_poly(format!("phi{i}"), polynomial(n, t)?)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(NlpProblem::new(n, spec.s.unwrap_or(0), phi)?)
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("+inf")
    } else {
        json!("-inf")
    }
}

fn vec_json(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn map_json(m: &BTreeMap<String, f64>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.clone(), num(*v))).collect())
}

fn witness_json(w: &Witness) -> Value {
    let parts: Map<String, Value> = w.parts.iter().map(|(k, v)| (k.clone(), vec_json(v))).collect();
    json!({ "parts": parts, "violation": num(w.violation) })
}

/// Serialises a verdict with sorted keys; non-finite numbers become strings.
pub fn verdict_json(v: &Verdict) -> Value {
    json!({
        "status": v.status.as_str(),
        "theorem_tag": v.theorem_tag,
        "witness": v.witness.as_ref().map(witness_json),
        "tolerances": map_json(&v.tolerances),
        "metrics": map_json(&v.metrics),
        "samples_used": v.samples_used,
        "notes": v.notes,
        "sub_verdicts": v.sub_verdicts.iter().map(verdict_json).collect::<Vec<_>>(),
    })
}

/// Result of one command run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub verdicts: Vec<Verdict>,
    /// Extra report fields (KKT point, σ, κ, ...).
    pub extra: Map<String, Value>,
    pub csv: Option<String>,
    pub error: Option<CliError>,
}

impl Outcome {
    fn from_verdict(v: Verdict) -> Self {
        Outcome { exit_code: exit_code(v.status), verdicts: vec![v], extra: Map::new(), csv: None, error: None }
    }

    fn from_error(e: CliError) -> Self {
        let verdicts = match &e {
            CliError::LicqFailed(v) => vec![(**v).clone()],
            _ => Vec::new(),
        };
        Outcome { exit_code: 3, verdicts, extra: Map::new(), csv: None, error: Some(e) }
    }

    /// The reproducible part of the report.
    pub fn verdicts_json(&self) -> Value {
        Value::Array(self.verdicts.iter().map(verdict_json).collect())
    }

    pub fn report(&self, command: Command, config: &Value, seed: Option<u64>, wall_time: f64) -> Value {
        let mut r = Map::new();
        r.insert("schema".into(), json!(SCHEMA));
        r.insert("command".into(), json!(command.as_str()));
        r.insert("exit_code".into(), json!(self.exit_code));
        r.insert("config".into(), config.clone());
        r.insert("seed".into(), json!(seed));
        r.insert("verdicts".into(), self.verdicts_json());
        r.insert(
            "versions".into(),
            json!({ "varcvx": env!("CARGO_PKG_VERSION"), "report_schema": SCHEMA }),
        );
        r.insert("wall_time".into(), json!(wall_time));
        if let Some(e) = &self.error {
            r.insert("error".into(), json!({ "kind": e.kind(), "message": e.to_string() }));
        }
        for (k, v) in &self.extra {
            r.insert(k.clone(), v.clone());
        }
        Value::Object(r)
    }
}

pub fn exit_code(s: Status) -> i32 {
    match s {
        Status::Holds => 0,
        Status::Fails => 1,
        Status::Inconclusive => 2,
    }
}

/// Runs `command` on `spec`; `seed` overrides `check.seed`.
pub fn run(command: Command, spec: &ProblemSpec, seed: Option<u64>) -> Outcome {
    let seed = seed.or(spec.check.seed);
    let r = match command {
        Command::CheckVc => cmd_check_vc(spec, false),
        Command::CheckSvc => cmd_check_vc(spec, true),
        Command::CheckNlp => cmd_check_nlp(spec, seed),
        Command::EnvelopeScan => cmd_envelope_scan(spec),
    };
    r.unwrap_or_else(Outcome::from_error)
}

fn vc_config(spec: &ProblemSpec) -> VcConfig {
    let mut cfg = VcConfig::default();
    if let Some(w) = spec.check.window {
        cfg.window = Window::new(w.u_radius, w.v_radius, w.epsilon);
    }
    if let Some(l) = &spec.check.lambda_list {
        cfg.lambdas = l.clone();
    }
    if let Some(t) = &spec.check.tolerances {
        if let Some(r) = t.get("r_max") {
            cfg.r_max = *r;
        }
        if let Some(g) = t.get("graph_tol") {
            cfg.graph_tol = *g;
        }
    }
    cfg
}

fn scheme(seed: Option<u64>) -> SamplingScheme {
    seed.map_or(SamplingScheme::LowDiscrepancy, SamplingScheme::RandomSeeded)
}

/// Grid check that `x̄` minimises `φ` over the ball of radius `radius`.
pub fn local_minimizer_check(f: &ExtendedFn, x_bar: &[f64], radius: f64) -> varcvx_core::Result<Verdict> {
    let tag = "local-minimizer";
    let n = x_bar.len();
    let k = match n {
        1 => 4001,
        2 => 201,
        3 => 41,
        _ => return Err(Error::Unsupported("grid minimiser check needs dimension <= 3".into())),
    };
    let ball = oracles::FnObjective(|x: &[f64]| {
        if varcvx_core::linalg::dist(x, x_bar) > radius {
            f64::INFINITY
        } else {
            f.eval(x).unwrap_or(f64::NAN)
        }
    });
    let grid = GridSpec::cube(x_bar, radius, k).with_rounds(4);
    let (p, v) = oracles::grid_argmin_with(&ball, &grid, f.breakpoints(), 0.0)?;
    let fx = f.eval(x_bar)?;
    let tol = 1e-12 * (1.0 + fx.abs());
    let out = if v >= fx - tol {
        Verdict::holds(tag)
    } else {
        Verdict::fails(tag, Witness::new(fx - v).with("x", p))
    };
    Ok(out.with_metric("phi_at_x_bar", fx).with_metric("grid_min", v).with_tol("value", tol).with_tol("radius", radius))
}

fn cmd_check_vc(spec: &ProblemSpec, strong: bool) -> CliResult<Outcome> {
    let f = load_function(spec)?;
    let p = RefPair::new(&f, spec.ref_point.clone(), spec.v_bar())?;
    let cfg = vc_config(spec);
    let modulus = spec.check.modulus.unwrap_or(0.0);
    if strong && !(modulus > 0.0) {
        return Err(invalid("check-svc needs a positive modulus"));
    }
    let density = cfg.density;
    let name = spec.check_name().unwrap_or("variational-convexity");
    let v = match name {
        "variational-convexity" => {
            let mut v = varconv::check_variational_convexity(&f, &p, modulus, &cfg)?;
            if strong {
                v = v.with_sub(varconv::shift_reduction_crosscheck(&f, &p, modulus, &cfg)?);
            }
            v
        }
        "local-convexity" => {
            // an odd uniform grid contains x̄ itself, where nonsmooth examples break convexity
            let region =
                NeighborhoodSpec::new(p.x_bar.clone(), cfg.window.u_radius, 21).with_scheme(SamplingScheme::UniformGrid);
            oracles::sampled_convexity(&f, &region, modulus, 2000)?
        }
        "prox-regularity" => {
            let g = varconv::enumerate_graph(&f, &p, cfg.window, density)?;
            moreau::check_prox_regularity(&f, &p, cfg.window.prox_eps(), cfg.r_max, &g)?
        }
        "phi-local-monotonicity" => {
            let g = varconv::enumerate_graph(&f, &p, cfg.window, density)?;
            varconv::check_monotone(&g, modulus)?
        }
        "local-monotonicity" => {
            let g = varconv::enumerate_graph(&f, &p, cfg.window.without_cut(), density)?;
            varconv::check_monotone(&g, modulus)?
        }
        "local-minimizer" => local_minimizer_check(&f, &p.x_bar, cfg.window.u_radius)?,
        other => return Err(invalid(format!("unknown check `{other}`"))),
    };
    Ok(Outcome::from_verdict(v))
}

fn cmd_check_nlp(spec: &ProblemSpec, seed: Option<u64>) -> CliResult<Outcome> {
    let p = load_nlp(spec)?;
    let x = &spec.ref_point;
    if x.len() != p.n() {
        return Err(invalid(format!("ref_point needs length {}", p.n())));
    }
    let licq = nlp::check_licq(&p, x)?;
    if licq.is_fails() {
        return Err(CliError::LicqFailed(Box::new(licq)));
    }
    let plicq = nlp::check_plicq(&p, x)?;
    let k = nlp::kkt_solve(&p, x, &spec.v_bar())?;
    let pointbased = nlp::pointbased_strong_sufficiency(&p, &k)?;
    let name = spec.check_name().unwrap_or("pointbased");
    let radius = spec.check.radius.unwrap_or(0.1);
    let main = match name {
        "pointbased" | "pointbased-sufficiency" => pointbased.clone(),
        "neighborhood" => {
            let region = NeighborhoodSpec::new(x.clone(), radius, spec.check.samples.unwrap_or(30)).with_scheme(scheme(seed));
            nlp::neighborhood_sufficiency(&p, &k, spec.check.modulus.unwrap_or(0.0), &region, &NeighborhoodConfig::default())?
        }
        "tilt" => nlp::tilt_stability_probe(&p, &k, 0.5, radius, spec.check.samples.unwrap_or(9))?,
        other => return Err(invalid(format!("unknown check `{other}`"))),
    };
    let mut out = Outcome::from_verdict(main);
    out.verdicts.push(licq);
    out.verdicts.push(plicq);
    if name != "pointbased" && name != "pointbased-sufficiency" {
        out.verdicts.push(pointbased.clone());
    }
    out.extra.insert("kkt".into(), json!({ "x": vec_json(&k.x), "y": vec_json(&k.y), "residual": num(k.residual) }));
    out.extra.insert("sigma".into(), pointbased.metric("sigma").map_or(Value::Null, num));
    out.extra.insert("kappa".into(), pointbased.metric("kappa").map_or(Value::Null, num));
    Ok(out)
}

/// CSV of `(lambda, x…, e_lambda, grad…)`, with a `curvature` column in 1-D
/// (central second difference of the envelope).
fn cmd_envelope_scan(spec: &ProblemSpec) -> CliResult<Outcome> {
    let f = load_function(spec)?;
    let n = spec.ref_point.len();
    if n > 2 {
        return Err(CliError::DimTooHigh(n));
    }
    let scan = spec.check.scan.unwrap_or(ScanSpec { lower: -2.0, upper: 2.0, points: 401 });
    if !(scan.upper > scan.lower) || scan.points < 2 {
        return Err(invalid("scan needs lower < upper and at least 2 points"));
    }
    let lambdas = spec.check.lambda_list.clone().unwrap_or_else(|| vec![0.5]);
    let axis: Vec<f64> = (0..scan.points)
        .map(|i| scan.lower + (scan.upper - scan.lower) * i as f64 / (scan.points - 1) as f64)
        .collect();
    let mut csv = String::from("lambda");
    for k in 0..n {
        let _ = write!(csv, ",x{k}");
    }
    csv.push_str(",e_lambda");
    for k in 0..n {
        let _ = write!(csv, ",grad{k}");
    }
    if n == 1 {
        csv.push_str(",curvature");
    }
    csv.push('\n');
    let mut rows = 0usize;
    for &lam in &lambdas {
        let h = EnvelopeHandle::new(f.clone(), lam, n)?;
        let points: Vec<Vec<f64>> = if n == 1 {
            axis.iter().map(|x| vec![*x]).collect()
        } else {
            axis.iter().flat_map(|a| axis.iter().map(move |b| vec![*a, *b])).collect()
        };
        let step = (scan.upper - scan.lower) / (scan.points - 1) as f64;
        for x in points {
            let e = h.envelope(&x)?;
            let g = h.envelope_gradient(&x)?;
            let _ = write!(csv, "{lam}");
            for c in &x {
                let _ = write!(csv, ",{c}");
            }
            let _ = write!(csv, ",{e}");
            for c in &g {
                let _ = write!(csv, ",{c}");
            }
            if n == 1 {
                let d = oracles::fd_curvature(&h, &x, &[1.0], step.min(1e-3))?;
                let _ = write!(csv, ",{d}");
            }
            csv.push('\n');
            rows += 1;
        }
    }
    let v = Verdict::holds("envelope-scan").with_samples(rows);
    let mut out = Outcome::from_verdict(v);
    out.csv = Some(csv);
    Ok(out)
}

/// Spec reproducing a gallery fact and the command that checks it.
pub fn fact_spec(id: &str, fact: &KnownFact, kind: &EntryKind) -> (Command, ProblemSpec) {
    let (command, kind, name) = match (fact.property, kind) {
        (Property::PointbasedSufficiency | Property::Licq, _) | (_, EntryKind::Nlp(_)) => {
            (Command::CheckNlp, Kind::Nlp, "pointbased")
        }
        (Property::VariationalConvexity, _) => (Command::CheckVc, Kind::Function, "variational-convexity"),
        (p, _) => (Command::CheckVc, Kind::Function, p.as_str()),
    };
    let spec = ProblemSpec {
        schema: SCHEMA,
        kind,
        gallery_id: Some(id.to_string()),
        polynomial_terms: None,
        n: None,
        s: None,
        m: None,
        ref_point: fact.x_bar.clone(),
        ref_subgradient: Some(fact.v_bar.clone()),
        check: CheckSpec {
            name: Some(name.to_string()),
            modulus: Some(fact.modulus),
            ..CheckSpec::default()
        },
    };
    (command, spec)
}

/// Exit code expected for a fact.
pub fn expected_exit(fact: &KnownFact) -> i32 {
    match (fact.property, fact.expected) {
        (Property::Licq, Status::Fails) => 3,
        (_, s) => exit_code(s),
    }
}

/// Machine-readable listing of the gallery.
pub fn gallery_listing() -> Value {
    let entries: Vec<Value> = gallery::IDS
        .iter()
        .map(|id| {
            let e = gallery::get(id).expect("registered id");
            let kind = match e.kind {
                EntryKind::Function(_) => "function",
                EntryKind::Nlp(_) => "nlp",
            };
            let facts: Vec<Value> = e
                .known_facts
                .iter()
                .map(|f| {
                    json!({
                        "property": f.property.as_str(),
                        "x_bar": vec_json(&f.x_bar),
                        "v_bar": vec_json(&f.v_bar),
                        "modulus": num(f.modulus),
                        "expected": f.expected.as_str(),
                    })
                })
                .collect();
            json!({ "id": id, "kind": kind, "known_facts": facts })
        })
        .collect();
    json!({ "schema": SCHEMA, "entries": entries })
}

/// Echo of the parsed spec for the report.
pub fn config_echo(spec: &ProblemSpec, raw: &Value) -> Value {
    let mut v = raw.clone();
    if let Value::Object(m) = &mut v {
        m.insert("ref_point".into(), vec_json(&spec.ref_point));
    }
    v
}

/// `Matrix` rows as JSON, for callers that report Hessians.
pub fn matrix_json(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| vec_json(m.row(i))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> ProblemSpec {
        ProblemSpec::parse(text).unwrap()
    }

    #[test]
    fn schema_is_checked() {
        let e = ProblemSpec::parse(r#"{"schema":2,"kind":"function","gallery_id":"abs","ref_point":[0]}"#);
        assert!(matches!(e, Err(CliError::SpecInvalid(_))));
        let e = ProblemSpec::parse(r#"{"schema":1,"kind":"function","ref_point":[0]}"#);
        assert!(matches!(e, Err(CliError::SpecInvalid(_))));
        let e = ProblemSpec::parse(r#"{"schema":1,"kind":"function","gallery_id":"abs","ref_point":[0],"bogus":1}"#);
        assert!(matches!(e, Err(CliError::SpecInvalid(_))));
    }

    #[test]
    fn check_vc_exit_codes() {
        let s = spec(r#"{"schema":1,"kind":"function","gallery_id":"l0","ref_point":[0],"ref_subgradient":[0],"check":{"modulus":0}}"#);
        assert_eq!(run(Command::CheckVc, &s, None).exit_code, 0);
        let s = spec(r#"{"schema":1,"kind":"function","gallery_id":"dl-counterexample","ref_point":[0],"ref_subgradient":[0]}"#);
        assert_eq!(run(Command::CheckVc, &s, None).exit_code, 1);
        let s = spec(r#"{"schema":1,"kind":"function","gallery_id":"quad(2)","ref_point":[0],"check":{"modulus":2.5}}"#);
        assert_eq!(run(Command::CheckVc, &s, None).exit_code, 1);
    }

    #[test]
    fn polynomial_function_spec() {
        let s = spec(
            r#"{"schema":1,"kind":"function","polynomial_terms":[{"coeffs":[1.0],"exponents":[[2]]}],"ref_point":[0],"check":{"modulus":2}}"#,
        );
        assert_eq!(run(Command::CheckSvc, &s, None).exit_code, 0);
    }

    #[test]
    fn check_nlp_outcomes() {
        let s = spec(r#"{"schema":1,"kind":"nlp","gallery_id":"nlp-quad-ineq","ref_point":[0]}"#);
        let o = run(Command::CheckNlp, &s, None);
        assert_eq!(o.exit_code, 0);
        assert_eq!(o.extra["sigma"], json!(2.0));
        assert_eq!(o.extra["kappa"], json!(0.5));
        let s = spec(r#"{"schema":1,"kind":"nlp","gallery_id":"nlp-indefinite","ref_point":[0,0]}"#);
        let o = run(Command::CheckNlp, &s, None);
        assert_eq!(o.exit_code, 1);
        assert!(o.verdicts[0].witness.as_ref().unwrap().get("w").is_some());
        let s = spec(r#"{"schema":1,"kind":"nlp","gallery_id":"nlp-degenerate-licq","ref_point":[0]}"#);
        let o = run(Command::CheckNlp, &s, None);
        assert_eq!(o.exit_code, 3);
        assert_eq!(o.error.as_ref().unwrap().kind(), "LicqFailed");
    }

    #[test]
    fn polynomial_nlp_spec() {
        // min x0^2 + x1^2 s.t. x0 <= 0
        let s = spec(
            r#"{"schema":1,"kind":"nlp","polynomial_terms":[
                {"coeffs":[1,1],"exponents":[[2,0],[0,2]]},
                {"coeffs":[1],"exponents":[[1,0]]}],
               "s":1,"ref_point":[0,0]}"#,
        );
        let o = run(Command::CheckNlp, &s, None);
        assert_eq!(o.exit_code, 0);
        assert_eq!(o.extra["sigma"], json!(2.0));
    }

    #[test]
    fn scan_dimension_limit() {
        let s = spec(r#"{"schema":1,"kind":"function","gallery_id":"abs","ref_point":[0,0,0]}"#);
        let o = run(Command::EnvelopeScan, &s, None);
        assert_eq!(o.exit_code, 3);
        assert_eq!(o.error.unwrap(), CliError::DimTooHigh(3));
    }

    #[test]
    fn non_finite_numbers_are_strings() {
        let v = Verdict::holds("t").with_metric("sigma", f64::INFINITY);
        assert_eq!(verdict_json(&v)["metrics"]["sigma"], json!("+inf"));
    }
}
