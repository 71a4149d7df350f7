//! Scenario files: JSON with complex entries written as `[re, im]`.

use std::collections::BTreeMap;
use std::path::Path;

use ccwb_core::commoncause::{ClassicalSpace, Event};
use ccwb_core::geometry::Region;
use ccwb_core::linalg::{self, CMat, CVec};
use ccwb_core::qprob::{DensityState, MatrixAlgebra, Projection};
use ccwb_core::report::MatrixRecord;
use ccwb_core::toynet::{demo_state, LatticeCone};
use ccwb_core::{states, Error, Tolerances};
use serde::Deserialize;
use serde_json::Value;

/// Failures while loading, split by exit code.
#[derive(Debug)]
pub enum LoadError {
    /// Unreadable file or malformed JSON / schema.
    Parse(String),
    /// Well-formed input violating a type invariant.
    Invariant(Error),
}

impl From<Error> for LoadError {
    fn from(e: Error) -> Self {
        LoadError::Invariant(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Quantum,
    Classical,
    Geometry,
    Toynet,
    Bell,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    kind: Kind,
    #[serde(default)]
    description: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    payload: Value,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Only `"singlet"`.
    Named(String),
    Werner(f64),
    MaximallyMixed(usize),
    Matrix(MatrixRecord),
    Diagonal(Vec<f64>),
    Pure(Vec<[f64; 2]>),
    RandomFaithful { dim: usize, eps: f64, seed: u64 },
    RandomProduct { dims: Vec<usize>, seed: u64 },
    /// The toy-net demo state on `n_sites` qubits.
    Demo { n_sites: usize, seed: u64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProjSpec {
    Matrix(MatrixRecord),
    /// Coordinate projection onto the listed basis vectors.
    Diagonal { dim: usize, indices: Vec<usize> },
    /// Projection onto the span of the given vectors.
    Span(Vec<Vec<[f64; 2]>>),
}

/// `M(factors) ⊗ 1` on a tensor split.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub dims: Vec<usize>,
    pub factors: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumPayload {
    pub state: StateSpec,
    pub a: ProjSpec,
    pub b: ProjSpec,
    pub c: Option<ProjSpec>,
    /// Number of distinct strong causes requested by `find-cc`.
    #[serde(default = "one")]
    pub count: usize,
    /// Restarts of the genuine-cause search.
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Structured algebra the strong cause must come from.
    pub algebra: Option<FactorSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalPayload {
    pub weights: Vec<f64>,
    /// Atoms are numbered from 0.
    pub a: Option<Vec<usize>>,
    pub b: Option<Vec<usize>>,
    pub c: Option<Vec<usize>>,
    #[serde(default = "yes")]
    pub exclude_trivial: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellPayload {
    pub dims: [usize; 2],
    pub state: Option<StateSpec>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    pub ensemble: Option<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryPayload {
    pub v1: Region,
    pub v2: Region,
    /// Slab depth; the default rule is used when absent.
    pub depth: Option<f64>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Times at which the tilde decomposition is sliced.
    #[serde(default)]
    pub slice_times: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GatesSpec {
    Swap,
    Random,
    Given(Vec<MatrixRecord>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub k: usize,
    pub a: i64,
    pub b: i64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToynetPayload {
    pub n_sites: usize,
    pub gates: GatesSpec,
    /// Defaults to the demo state seeded by the scenario seed.
    pub state: Option<StateSpec>,
    pub d1: ConeSpec,
    pub d2: ConeSpec,
    #[serde(default = "default_axiom_pairs")]
    pub axiom_pairs: usize,
}

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_budget() -> usize {
    50
}
fn default_restarts() -> usize {
    ccwb_core::bell::DEFAULT_RESTARTS
}
fn default_samples() -> usize {
    1000
}
fn default_margin() -> f64 {
    1.0
}
fn default_axiom_pairs() -> usize {
    100
}

#[derive(Debug, Clone)]
pub enum Payload {
    Quantum(QuantumPayload),
    Classical(ClassicalPayload),
    Geometry(GeometryPayload),
    Toynet(ToynetPayload),
    Bell(BellPayload),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: Kind,
    pub description: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub payload: Payload,
    /// The file as parsed, echoed into machine records.
    pub raw: Value,
}

fn typed<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, LoadError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        LoadError::Parse(format!("payload.{path}: {}", e.into_inner()))
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, LoadError> {
    let raw: Value = serde_json::from_str(text)
        .map_err(|e| LoadError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let mut de = serde_json::Deserializer::from_str(text);
    let env: Envelope = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        LoadError::Parse(format!("line {}, column {}, at {path}: {inner}", inner.line(), inner.column()))
    })?;
    let mut tolerances = Tolerances::default();
    for (k, v) in &env.tolerances {
        if !tolerances.set(k, *v) {
            return Err(LoadError::Parse(format!("tolerances.{k}: unknown tolerance")));
        }
    }
    let payload = match env.kind {
        Kind::Quantum => Payload::Quantum(typed(&env.payload)?),
        Kind::Classical => Payload::Classical(typed(&env.payload)?),
        Kind::Geometry => Payload::Geometry(typed(&env.payload)?),
        Kind::Toynet => Payload::Toynet(typed(&env.payload)?),
        Kind::Bell => Payload::Bell(typed(&env.payload)?),
    };
    let scenario = Scenario { kind: env.kind, description: env.description, seed: env.seed, tolerances, payload, raw };
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    /// Builds every object once so type invariants fail at load time.
    fn validate(&self) -> Result<(), LoadError> {
        let tol = &self.tolerances;
        match &self.payload {
            Payload::Quantum(q) => {
                q.objects(tol)?;
            }
            Payload::Classical(c) => {
                c.space()?;
                for e in [&c.a, &c.b, &c.c].into_iter().flatten() {
                    c.event(e)?;
                }
            }
            Payload::Geometry(g) => {
                g.v1.validate()?;
                g.v2.validate()?;
            }
            Payload::Toynet(t) => {
                if let Some(s) = &t.state {
                    s.build(tol)?;
                }
                t.gates()?;
            }
            Payload::Bell(b) => {
                if let Some(s) = &b.state {
                    let phi = s.build(tol)?;
                    if phi.dim() != b.dims[0] * b.dims[1] {
                        return Err(Error::DimensionMismatch(b.dims[0] * b.dims[1], phi.dim()).into());
                    }
                }
            }
        }
        Ok(())
    }
}

fn complex_vec(entries: &[[f64; 2]]) -> CVec {
    CVec::from_iterator(entries.len(), entries.iter().map(|z| linalg::c(z[0], z[1])))
}

fn matrix(record: &MatrixRecord) -> Result<CMat, LoadError> {
    let m = record.to_matrix().ok_or_else(|| LoadError::Parse("matrix rows have unequal lengths".into()))?;
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()).into());
    }
    Ok(m)
}

impl StateSpec {
    pub fn build(&self, tol: &Tolerances) -> Result<DensityState, LoadError> {
        Ok(match self {
            StateSpec::Named(name) => match name.as_str() {
                "singlet" => states::singlet(),
                other => return Err(LoadError::Parse(format!("unknown named state `{other}`"))),
            },
            StateSpec::Werner(w) => {
                if !(0.0..=1.0).contains(w) {
                    return Err(Error::Precondition(format!("Werner weight {w} outside [0, 1]")).into());
                }
                states::werner(*w)
            }
            StateSpec::MaximallyMixed(d) => DensityState::maximally_mixed(*d),
            StateSpec::Matrix(r) => DensityState::new(matrix(r)?, tol)?,
            StateSpec::Diagonal(w) => DensityState::new(linalg::diag_real(w), tol)?,
            StateSpec::Pure(v) => DensityState::pure(&complex_vec(v), tol)?,
            StateSpec::RandomFaithful { dim, eps, seed } => {
                states::random_faithful(*dim, *eps, &mut linalg::rng_from_seed(*seed))
            }
            StateSpec::RandomProduct { dims, seed } => {
                states::random_product(dims, &mut linalg::rng_from_seed(*seed))
            }
            StateSpec::Demo { n_sites, seed } => demo_state(*n_sites, *seed, tol)?,
        })
    }
}

impl ProjSpec {
    pub fn build(&self, tol: &Tolerances) -> Result<Projection, LoadError> {
        Ok(match self {
            ProjSpec::Matrix(r) => Projection::new(matrix(r)?, tol)?,
            ProjSpec::Diagonal { dim, indices } => {
                if let Some(i) = indices.iter().find(|&&i| i >= *dim) {
                    return Err(LoadError::Parse(format!("index {i} out of range for dimension {dim}")));
                }
                Projection::diagonal(*dim, indices)
            }
            ProjSpec::Span(vectors) => {
                let vs: Vec<CVec> = vectors.iter().map(|v| complex_vec(v)).collect();
                Projection::onto(&vs)
            }
        })
    }
}

impl QuantumPayload {
    pub fn objects(&self, tol: &Tolerances) -> Result<(DensityState, Projection, Projection, Option<Projection>), LoadError> {
        let phi = self.state.build(tol)?;
        let a = self.a.build(tol)?;
        let b = self.b.build(tol)?;
        let c = self.c.as_ref().map(|c| c.build(tol)).transpose()?;
        for p in [Some(&a), Some(&b), c.as_ref()].into_iter().flatten() {
            if p.dim() != phi.dim() {
                return Err(Error::DimensionMismatch(phi.dim(), p.dim()).into());
            }
        }
        Ok((phi, a, b, c))
    }

    pub fn algebra(&self) -> Result<Option<MatrixAlgebra>, LoadError> {
        self.algebra
            .as_ref()
            .map(|f| MatrixAlgebra::tensor_factors(&f.dims, &f.factors).map_err(LoadError::from))
            .transpose()
    }
}

impl ClassicalPayload {
    pub fn space(&self) -> Result<ClassicalSpace, LoadError> {
        Ok(ClassicalSpace::new(self.weights.clone())?)
    }

    pub fn event(&self, atoms: &[usize]) -> Result<Event, LoadError> {
        if let Some(i) = atoms.iter().find(|&&i| i >= self.weights.len()) {
            return Err(LoadError::Parse(format!("atom {i} out of range for {} atoms", self.weights.len())));
        }
        Ok(Event::from_atoms(atoms))
    }
}

impl ToynetPayload {
    pub fn gates(&self) -> Result<ccwb_core::toynet::GateSpec, LoadError> {
        use ccwb_core::toynet::GateSpec;
        Ok(match &self.gates {
            GatesSpec::Swap => GateSpec::Swap,
            GatesSpec::Random => GateSpec::Random,
            GatesSpec::Given(gs) => GateSpec::Given(gs.iter().map(matrix).collect::<Result<_, _>>()?),
        })
    }

    pub fn cone(spec: ConeSpec) -> Result<LatticeCone, LoadError> {
        Ok(LatticeCone::new(spec.k, spec.a, spec.b)?)
    }
}
