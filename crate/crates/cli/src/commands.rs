//! One function per subcommand. Each returns text lines for the narrative
//! report and a JSON value for the machine record.

use ccwb_core::bell::{self, CorrelatedPair};
use ccwb_core::commoncause::{
    classical_closedness_audit, classical_find_cc, classical_verify_cc, find_multiple_strong_cc, find_strong_cc,
    find_strong_cc_in, quantum_verify_cc, reichenbach_r, search_genuine_cc, CommonCauseCertificate,
};
use ccwb_core::geometry::{
    causal_complement, causal_completion, causal_shadow_check, spacelike_separated, tilde_regions, weak_cc_region,
    weak_cc_region_at, Region,
};
use ccwb_core::qprob::{commuting_meet, lattice_join, weight, MatrixAlgebra};
use ccwb_core::toynet::{build_net, check_axioms, weak_rccp_demo, AxiomKind};
use ccwb_core::{Error, Tolerances};
use serde_json::{json, Value};

use crate::scenario::{
    BellPayload, ClassicalPayload, GeometryPayload, LoadError, Payload, QuantumPayload, Scenario, ToynetPayload,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Analyze,
    FindCc,
    GenuineCc,
    Bell,
    SampleBell,
    Geometry,
    ClassicalAudit,
    ToynetDemo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::FindCc => "find-cc",
            Command::GenuineCc => "genuine-cc",
            Command::Bell => "bell",
            Command::SampleBell => "sample-bell",
            Command::Geometry => "geometry",
            Command::ClassicalAudit => "classical-audit",
            Command::ToynetDemo => "toynet-demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A search came back empty or the construction is provably blocked.
    Negative,
}

pub struct Outcome {
    pub status: Status,
    pub label: &'static str,
    pub lines: Vec<String>,
    pub result: Value,
}

impl Outcome {
    fn ok(lines: Vec<String>, result: Value) -> Outcome {
        Outcome { status: Status::Ok, label: "ok", lines, result }
    }

    fn negative(label: &'static str, lines: Vec<String>, result: Value) -> Outcome {
        Outcome { status: Status::Negative, label, lines, result }
    }
}

pub enum Failure {
    Load(LoadError),
    Core(Error),
    Usage(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Load(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Run = Result<Outcome, Failure>;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Converts an honest negative into an outcome; passes other errors on.
fn negative_or(e: Error) -> Run {
    let label = match &e {
        Error::Infeasible(_) => "infeasible",
        Error::NotFound(_) => "not_found",
        Error::NoCorrelatedPair => "no_correlated_pair",
        _ => return Err(e.into()),
    };
    Ok(Outcome::negative(label, vec![format!("outcome: {e}")], json!({ "message": e.to_string() })))
}

pub fn run(command: Command, sc: &Scenario) -> Run {
    let tol = &sc.tolerances;
    match (command, &sc.payload) {
        (Command::Analyze, Payload::Quantum(q)) => analyze_quantum(q, tol),
        (Command::Analyze, Payload::Classical(c)) => analyze_classical(c, tol),
        (Command::FindCc, Payload::Quantum(q)) => find_cc_quantum(q, sc.seed, tol),
        (Command::FindCc, Payload::Classical(c)) => find_cc_classical(c, tol),
        (Command::GenuineCc, Payload::Quantum(q)) => genuine(q, sc.seed, tol),
        (Command::Bell, Payload::Bell(b)) => bell_cmd(b, sc.seed, tol),
        (Command::SampleBell, Payload::Bell(b)) => sample_bell(b, sc.seed, tol),
        (Command::Geometry, Payload::Geometry(g)) => geometry(g),
        (Command::ClassicalAudit, Payload::Classical(c)) => audit(c, tol),
        (Command::ToynetDemo, Payload::Toynet(t)) => toynet(t, sc.seed, tol),
        (cmd, _) => Err(Failure::Usage(format!(
            "`{}` does not apply to a {:?} scenario",
            cmd.name(),
            sc.kind
        ))),
    }
}

fn cert_lines(cert: &CommonCauseCertificate) -> Vec<String> {
    vec![
        format!("verified: {}  strong: {}  genuine: {}", cert.verified, cert.is_strong, cert.is_genuine),
        format!("p(C) = {:.12}", cert.conditions.p_c),
        format!(
            "screening residuals: {:.3e} (C), {:.3e} (C⊥)",
            cert.residual_screen_c, cert.residual_screen_cperp
        ),
        format!("relevance margins: {:.6e} (A), {:.6e} (B)", cert.margin_a, cert.margin_b),
    ]
}

fn analyze_quantum(q: &QuantumPayload, tol: &Tolerances) -> Run {
    let (phi, a, b, c) = q.objects(tol)?;
    let meet = commuting_meet(&a, &b, tol)?;
    let join = lattice_join(&a, &b, tol)?;
    let (pa, pb, pab, pjoin) = (weight(&phi, &a), weight(&phi, &b), weight(&phi, &meet), weight(&phi, &join));
    let corr = pab - pa * pb;
    let mut lines = vec![
        format!("φ(A) = {pa:.12}  φ(B) = {pb:.12}  φ(A∧B) = {pab:.12}  φ(A∨B) = {pjoin:.12}"),
        format!("correlation φ(A∧B) − φ(A)φ(B) = {corr:.6e}"),
        format!("rank(A∧B) = {}", meet.rank()),
    ];
    let r = match reichenbach_r(&phi, &a, &b, tol) {
        Ok(r) => {
            lines.push(format!("r = {:.12}  (1 − φ(A∨B) = {:.12})", r.r, 1.0 - pjoin));
            Some(r)
        }
        Err(Error::Uncorrelated(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let cert = match &c {
        Some(c) => {
            let cert = quantum_verify_cc(&phi, &a, &b, c, tol)?;
            lines.extend(cert_lines(&cert));
            Some(cert)
        }
        None => None,
    };
    Ok(Outcome::ok(
        lines,
        json!({
            "phi_a": pa, "phi_b": pb, "phi_ab": pab, "phi_a_or_b": pjoin,
            "correlation": corr,
            "meet_rank": meet.rank(),
            "r_value": r.map(|r| to_value(&r)),
            "one_minus_phi_join": 1.0 - pjoin,
            "certificate": cert.map(|c| to_value(&c)),
        }),
    ))
}

fn classical_pair(c: &ClassicalPayload) -> Result<(ccwb_core::commoncause::Event, ccwb_core::commoncause::Event), Failure> {
    let (Some(a), Some(b)) = (&c.a, &c.b) else {
        return Err(Failure::Usage("the scenario needs events `a` and `b`".into()));
    };
    Ok((c.event(a)?, c.event(b)?))
}

fn analyze_classical(c: &ClassicalPayload, tol: &Tolerances) -> Run {
    let space = c.space()?;
    let (a, b) = classical_pair(c)?;
    let corr = space.correlation(a, b);
    let mut lines = vec![
        format!("p(A) = {:.12}  p(B) = {:.12}  p(A∧B) = {:.12}", space.p(a), space.p(b), space.p(a.and(b))),
        format!("correlation = {corr:.6e}"),
    ];
    let cert = match &c.c {
        Some(atoms) => {
            let cert = classical_verify_cc(&space, a, b, c.event(atoms)?, tol)?;
            lines.extend(cert_lines(&cert));
            Some(cert)
        }
        None => None,
    };
    Ok(Outcome::ok(
        lines,
        json!({
            "p_a": space.p(a), "p_b": space.p(b), "p_ab": space.p(a.and(b)),
            "correlation": corr,
            "certificate": cert.map(|c| to_value(&c)),
        }),
    ))
}

fn find_cc_quantum(q: &QuantumPayload, seed: u64, tol: &Tolerances) -> Run {
    let (phi, a, b, _) = q.objects(tol)?;
    if q.count > 1 {
        let found = find_multiple_strong_cc(&phi, &a, &b, q.count, seed, tol)?;
        let mut lines = vec![format!("requested {} strong causes, found {}", found.requested, found.causes.len())];
        for (i, cert) in found.causes.iter().enumerate() {
            lines.push(format!(
                "cause {i}: rank {}  verified {}  margins {:.3e}, {:.3e}",
                cert.projection().map_or(0, |p| p.rank()),
                cert.verified,
                cert.margin_a,
                cert.margin_b
            ));
        }
        let result = to_value(&found);
        return Ok(if found.infeasible {
            Outcome::negative("infeasible", lines, result)
        } else if found.short {
            Outcome::negative("not_found", lines, result)
        } else {
            Outcome::ok(lines, result)
        });
    }
    let found = match q.algebra()? {
        Some(alg) => find_strong_cc_in(&phi, &a, &b, &alg, tol),
        None => find_strong_cc(&phi, &a, &b, tol),
    };
    match found {
        Ok(cert) => {
            let mut lines = vec![format!("strong common cause of rank {}", cert.projection().map_or(0, |p| p.rank()))];
            lines.extend(cert_lines(&cert));
            Ok(Outcome::ok(lines, json!({ "certificate": to_value(&cert) })))
        }
        Err(e) => negative_or(e),
    }
}

fn find_cc_classical(c: &ClassicalPayload, tol: &Tolerances) -> Run {
    let space = c.space()?;
    let (a, b) = classical_pair(c)?;
    let found = classical_find_cc(&space, a, b, c.exclude_trivial, tol)?;
    let events: Vec<Vec<usize>> = found
        .iter()
        .filter_map(|cert| match &cert.cause {
            ccwb_core::commoncause::Cause::Classical(e) => Some(e.atoms()),
            _ => None,
        })
        .collect();
    let mut lines = vec![format!(
        "{} common causes{}",
        found.len(),
        if c.exclude_trivial { " (trivial ones excluded)" } else { "" }
    )];
    lines.extend(events.iter().map(|e| format!("C = {e:?}")));
    let result = json!({ "causes": to_value(&found), "events": events });
    Ok(if found.is_empty() { Outcome::negative("not_found", lines, result) } else { Outcome::ok(lines, result) })
}

fn genuine(q: &QuantumPayload, seed: u64, tol: &Tolerances) -> Run {
    let (phi, a, b, _) = q.objects(tol)?;
    match search_genuine_cc(&phi, &a, &b, q.budget, seed, tol)? {
        Some(cert) => {
            let mut lines = vec!["genuinely probabilistic common cause".to_string()];
            lines.extend(cert_lines(&cert));
            Ok(Outcome::ok(lines, json!({ "certificate": to_value(&cert), "budget": q.budget })))
        }
        None => Ok(Outcome::negative(
            "not_found",
            vec![format!("no genuine cause within {} restarts (not a proof of absence)", q.budget)],
            json!({ "certificate": null, "budget": q.budget }),
        )),
    }
}

fn bipartite(dims: [usize; 2]) -> Result<(MatrixAlgebra, MatrixAlgebra), Error> {
    Ok((MatrixAlgebra::tensor_factors(&dims, &[0])?, MatrixAlgebra::tensor_factors(&dims, &[1])?))
}

fn pair_value(p: &Option<CorrelatedPair>) -> Value {
    p.as_ref().map_or(Value::Null, to_value)
}

fn bell_cmd(b: &BellPayload, seed: u64, tol: &Tolerances) -> Run {
    let Some(state) = &b.state else {
        return Err(Failure::Usage("`bell` needs a state".into()));
    };
    let phi = state.build(tol)?;
    let (n1, n2) = bipartite(b.dims)?;
    let report = bell::bell_correlation(&phi, &n1, &n2, b.restarts, seed, tol)?;
    let oracle = if b.dims == [2, 2] { Some(bell::two_qubit_chsh_oracle(&phi)?) } else { None };
    let pair = bell::find_correlated_pair(&phi, &n1, &n2, tol)?;
    let mut lines = vec![
        format!("beta = {:.10}", report.beta),
        format!("Bell correlated: {}", report.beta > 1.0 + tol.bell_tol),
        format!("see-saw: {} iterations, converged {}", report.iterations, report.converged),
    ];
    if let Some(o) = oracle {
        lines.push(format!("two-qubit oracle = {o:.10}  |difference| = {:.3e}", (o - report.beta).abs()));
    }
    lines.push(match &pair {
        Some(p) => format!("correlated pair: correlation {:.6e}, complemented {}", p.correlation, p.complemented),
        None => "no correlated pair: product state".into(),
    });
    Ok(Outcome::ok(
        lines,
        json!({
            "beta": report.beta,
            "bell_correlated": report.beta > 1.0 + tol.bell_tol,
            "oracle": oracle,
            "see_saw": to_value(&report),
            "correlated_pair": pair_value(&pair),
        }),
    ))
}

fn sample_bell(b: &BellPayload, seed: u64, tol: &Tolerances) -> Run {
    let ensemble = b.ensemble.as_deref().unwrap_or("pure");
    let sample = bell::sample_bell_fraction(b.dims, ensemble, b.samples, seed, tol)?;
    let lines = vec![
        format!("{} {} states on {}⊗{}", b.samples, ensemble, b.dims[0], b.dims[1]),
        format!("Bell-correlated fraction = {:.6}", sample.fraction),
        format!("max beta = {:.10}", sample.max_beta),
    ];
    Ok(Outcome::ok(lines, json!({ "ensemble": ensemble, "sample": to_value(&sample) })))
}

fn completion_value(r: &Region) -> Value {
    match causal_completion(r) {
        Ok(c) => to_value(&c),
        Err(Error::Disconnected(parts)) => json!({ "disconnected": to_value(&parts) }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn geometry(g: &GeometryPayload) -> Run {
    let (v1, v2) = (&g.v1, &g.v2);
    let spacelike = spacelike_separated(v1, v2);
    let mut lines = vec![
        format!("spacelike separated: {spacelike}"),
        format!("V1 in the causal shadow of V2: {}", causal_shadow_check(v1, v2)),
        format!("V2 in the causal shadow of V1: {}", causal_shadow_check(v2, v1)),
    ];
    let mut result = json!({
        "spacelike": spacelike,
        "shadow_1_in_2": causal_shadow_check(v1, v2),
        "shadow_2_in_1": causal_shadow_check(v2, v1),
        "completion_1": completion_value(v1),
        "completion_2": completion_value(v2),
        "complement_1": causal_complement(v1).map(|r| to_value(&r)).unwrap_or(Value::Null),
        "complement_2": causal_complement(v2).map(|r| to_value(&r)).unwrap_or(Value::Null),
    });
    if spacelike {
        let w = match g.depth {
            Some(d) => weak_cc_region_at(v1, v2, d, g.margin)?,
            None => weak_cc_region(v1, v2, g.margin)?,
        };
        lines.push(format!("weak common-cause slab: t ∈ ({}, {}) at depth {}", -w.depth - w.margin, -w.depth, w.depth));
        lines.push(format!("checks: {:?}", w.checks));
        let tilde = tilde_regions(v1, v2, &w.region)?;
        let slices: Vec<Value> = g
            .slice_times
            .iter()
            .map(|&t| {
                let [t1, t2, common] = tilde.slices(t);
                json!({ "t": t, "tilde1": to_value(&t1), "tilde2": to_value(&t2), "common": to_value(&common) })
            })
            .collect();
        for s in &slices {
            lines.push(format!("slice {s}"));
        }
        result["weak_cc_region"] = to_value(&w);
        result["tilde_slices"] = Value::Array(slices);
    }
    Ok(Outcome::ok(lines, result))
}

fn audit(c: &ClassicalPayload, tol: &Tolerances) -> Run {
    let space = c.space()?;
    let report = classical_closedness_audit(&space, tol)?;
    let mut lines = vec![
        format!("{} atoms, {} correlated logically independent pairs", report.atoms, report.correlated_pairs),
        format!("closed: {}", report.is_closed()),
    ];
    for (a, b) in &report.uncovered {
        lines.push(format!("no nontrivial common cause for A = {:?}, B = {:?}", a.atoms(), b.atoms()));
    }
    let uncovered: Vec<Value> = report.uncovered.iter().map(|(a, b)| json!([a.atoms(), b.atoms()])).collect();
    Ok(Outcome::ok(
        lines,
        json!({ "report": to_value(&report), "closed": report.is_closed(), "uncovered_atoms": uncovered }),
    ))
}

fn toynet(t: &ToynetPayload, seed: u64, tol: &Tolerances) -> Run {
    let net = build_net(t.n_sites, t.gates()?, seed)?;
    let state = match &t.state {
        Some(s) => s.build(tol)?,
        None => ccwb_core::toynet::demo_state(t.n_sites, seed, tol)?,
    };
    let axioms = check_axioms(&net, t.axiom_pairs, seed);
    let mut lines = vec![
        format!("net: {} sites, {} gates", net.n_sites(), net.spec()),
        format!(
            "axioms over {} pairs: isotony {}, Einstein causality {}, primitive causality {} violations; max commutator {:.3e}",
            axioms.sampled(),
            axioms.count(AxiomKind::Isotony),
            axioms.count(AxiomKind::EinsteinCausality),
            axioms.count(AxiomKind::PrimitiveCausality),
            axioms.max_commutator
        ),
    ];
    let (c1, c2) = (ToynetPayload::cone(t.d1)?, ToynetPayload::cone(t.d2)?);
    let demo = match weak_rccp_demo(&net, &state, &c1.region(), &c2.region(), seed, tol) {
        Ok(d) => d,
        Err(e) => {
            let mut out = negative_or(e)?;
            lines.append(&mut out.lines);
            out.lines = lines;
            out.result = json!({ "axioms": to_value(&axioms), "demo": out.result });
            return Ok(out);
        }
    };
    lines.extend([
        format!("D1 = sites [{}, {}] at step {}; D2 = sites [{}, {}] at step {}", c1.a, c1.b, c1.k, c2.a, c2.b, c2.k),
        format!("correlated pair: correlation {:.6e}, meet rank {}", demo.pair.correlation, demo.meet_rank),
        format!(
            "V: slab at step {} over sites [{}, {}] (on-chain {:?}), checks {:?}",
            demo.v_cone.k, demo.v_cone.a, demo.v_cone.b, demo.v_sites, demo.v.checks
        ),
        format!("A, B, A∧B in 𝒜(V): {}", demo.localized_in_v),
    ]);
    lines.extend(cert_lines(&demo.certificate));
    lines.push(format!("independent re-verification: {}", demo.reverified));
    Ok(Outcome::ok(lines, json!({ "axioms": to_value(&axioms), "demo": to_value(&demo) })))
}
