//! Scenario files and reports: a versioned JSON schema describing a space,
//! a ring, filtration and map literals, optional actions and chains, and an
//! ordered list of checks; plus the runner that executes the checks and the
//! deterministic report it emits.
//!
//! Exactness survives serialization: integer scalars are JSON numbers,
//! rationals are `"p/q"` strings, and big integers fall back to strings.

use crate::decomp::{validate_chain, ColoredDecomposition, DecompositionChain, StrategyKind};
use crate::filtered::{
    check_equivariance, constants_report, property_constant, verify_constant_holds, Caps,
    DynFiltration, Filtration, GeneratedFiltration, Generator, IsometryAction, Mode,
    PropertyKind,
};
use crate::linalg::{Matrix, Vector};
use crate::metric::{parse_space_expr, FiniteMetricSpace, SpaceOrigin, DEFAULT_POINT_CAP};
use crate::morphism::{
    classical_facts, control_report, decompose_over_disjoint_family, lean_decompose,
    split_kernel_element, FactOutcome, FilteredMap, MapActionPair, PipelineConstants,
};
use crate::pointset::PointSet;
use crate::resolution::{build_admissible_presentation, build_resolution};
use crate::ring::{Ring, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error("invalid space: {0}")]
    Space(#[from] crate::metric::MetricError),
    #[error("invalid ring: {0}")]
    BadRing(#[from] crate::ring::RingError),
    #[error("filtration `{name}`: {detail}")]
    Filtration { name: String, detail: String },
    #[error("map `{name}`: {detail}")]
    Map { name: String, detail: String },
    #[error("action `{name}`: {detail}")]
    Action { name: String, detail: String },
    #[error("chain: {0}")]
    Chain(String),
    #[error("check {index} references unknown {what} `{name}`")]
    UnknownRef {
        index: usize,
        what: &'static str,
        name: String,
    },
    #[error("scalar `{text}` is not valid over {ring}: field {field}")]
    Scalar {
        text: String,
        ring: Ring,
        field: String,
    },
    #[error("map `{name}` declares {kind} = {declared}, but it fails at witness {witness}")]
    DeclaredConstant {
        name: String,
        kind: PropertyKind,
        declared: u64,
        witness: String,
    },
    #[error("map `{name}` declares {what} = {declared}, but the computed value is {computed}")]
    DeclaredControl {
        name: String,
        what: &'static str,
        declared: u64,
        computed: u64,
    },
    #[error("sampled modes need an explicit seed in `caps`")]
    MissingSeed,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    /// Generator expression such as `zball:4`, `z2ball:8`, `free:2:2`,
    /// `cycle:6`.
    Expr(String),
    /// Explicit distance matrix.
    Matrix(Vec<Vec<u64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorLiteral {
    pub vector: Vec<Value>,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiltrationLiteral {
    pub ambient: usize,
    pub generators: Vec<GeneratorLiteral>,
}

/// Constants a scenario claims for a map; every declared value is
/// cross-checked at build time and a mismatch is an input error.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DeclaredConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lean_source: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_source: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub insular_target: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bicontrol: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapLiteral {
    pub source: String,
    pub target: String,
    pub matrix: Vec<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared: Option<DeclaredConstants>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionLiteral {
    /// The filtration this action's module map belongs to.
    pub module: String,
    pub perm: Vec<usize>,
    pub matrix: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceLiteral {
    pub points: Vec<usize>,
    pub color: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionLiteral {
    pub target: Vec<usize>,
    pub pieces: Vec<PieceLiteral>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainLiteral {
    pub radii: Vec<u64>,
    pub families: Vec<Vec<Vec<usize>>>,
    pub steps: Vec<Vec<DecompositionLiteral>>,
    pub mesh_bound: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Pass,
    Violation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CheckSpec {
    /// Report the space's basic metric data (validation happens at load).
    Metric {},
    /// Compute the three constants of a filtration, with optional expected
    /// values that must match exactly.
    Constants {
        filtration: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_lean: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_split: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_insular: Option<u64>,
    },
    Control {
        map: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<u64>,
    },
    Bicontrol {
        map: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<u64>,
    },
    /// Kernel split constant against δ + 2b + d from declared (or computed)
    /// constants; optionally require the exact value.
    KernelSplitBound {
        map: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_exact: Option<u64>,
    },
    /// Split every kernel basis element over sampled covers.
    SplitElement { map: String, covers: u32 },
    /// Distribute kernel elements of the family union over the family.
    Distribute {
        map: String,
        family: Vec<Vec<usize>>,
        expect: Expectation,
    },
    /// Derive a chain on the schedule from the declared constants and
    /// certify every kernel basis element within the mesh + 2nD bound.
    ChainCertify {
        map: String,
        strategy: StrategyKind,
        #[serde(default = "default_max_rounds")]
        max_rounds: usize,
    },
    /// Validate the scenario's explicit chain witness.
    ValidateChain {},
    Equivariance {
        filtration: String,
        action: String,
        expect: Expectation,
    },
    /// The classical fact battery; fails if any applicable fact fails.
    Facts {
        map: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source_action: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_action: Option<String>,
    },
    Presentation { filtration: String },
    Resolution {
        filtration: String,
        #[serde(default = "default_max_length")]
        max_length: usize,
        expect_terminated: bool,
    },
    Game {
        radii: Vec<u64>,
        strategy: StrategyKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<u64>,
        expect_win: bool,
    },
}

fn default_max_rounds() -> usize {
    8
}

fn default_max_length() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapsSpec {
    #[serde(default = "default_subset_points")]
    pub subset_points: usize,
    #[serde(default = "default_pair_points")]
    pub pair_points: usize,
    #[serde(default = "default_trials")]
    pub trials: u32,
    pub seed: u64,
}

fn default_subset_points() -> usize {
    Caps::default().subset_points
}
fn default_pair_points() -> usize {
    Caps::default().pair_points
}
fn default_trials() -> u32 {
    Caps::default().trials
}

impl Default for CapsSpec {
    fn default() -> Self {
        CapsSpec {
            subset_points: default_subset_points(),
            pair_points: default_pair_points(),
            trials: default_trials(),
            seed: 0,
        }
    }
}

impl CapsSpec {
    pub fn caps(&self) -> Caps {
        Caps {
            subset_points: self.subset_points,
            pair_points: self.pair_points,
            trials: self.trials,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    pub space: SpaceSpec,
    pub ring: Ring,
    #[serde(default)]
    pub filtrations: BTreeMap<String, FiltrationLiteral>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapLiteral>,
    #[serde(default)]
    pub actions: BTreeMap<String, ActionLiteral>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainLiteral>,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub caps: CapsSpec,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let sc: Scenario = serde_json::from_str(text)?;
        if sc.version != SCHEMA_VERSION {
            return Err(ScenarioError::Version(sc.version));
        }
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes") + "\n"
    }
}

// ---------------------------------------------------------------------------
// Scalar representation
// ---------------------------------------------------------------------------

pub fn scalar_from_value(ring: Ring, v: &Value, field: &str) -> Result<Scalar, ScenarioError> {
    let err = |text: String| ScenarioError::Scalar {
        text,
        ring,
        field: field.to_string(),
    };
    match v {
        Value::Number(n) => {
            let i = n.as_i64().ok_or_else(|| err(n.to_string()))?;
            Ok(ring.from_i64(i))
        }
        Value::String(s) => ring.parse(s).map_err(|_| err(s.clone())),
        other => Err(err(other.to_string())),
    }
}

pub fn scalar_to_value(s: &Scalar) -> Value {
    match s {
        Scalar::Fp(x) => json!(x),
        Scalar::Int(x) => match i64::try_from(x.clone()) {
            Ok(v) => json!(v),
            Err(_) => json!(x.to_string()),
        },
        Scalar::Rat(_) => json!(s.render()),
    }
}

fn vector_from_values(ring: Ring, vals: &[Value], field: &str) -> Result<Vector, ScenarioError> {
    let data = vals
        .iter()
        .map(|v| scalar_from_value(ring, v, field))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Vector { ring, data })
}

pub fn matrix_to_values(m: &Matrix) -> Vec<Vec<Value>> {
    (0..m.rows)
        .map(|r| m.row_slice(r).iter().map(scalar_to_value).collect())
        .collect()
}

fn matrix_from_values(
    ring: Ring,
    rows: &[Vec<Value>],
    field: &str,
) -> Result<Matrix, ScenarioError> {
    let parsed: Vec<Vec<Scalar>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|v| scalar_from_value(ring, v, field))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(ring, parsed).map_err(|e| ScenarioError::Map {
        name: field.to_string(),
        detail: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Building
// ---------------------------------------------------------------------------

/// A scenario resolved into live objects.
pub struct BuiltScenario {
    pub scenario: Scenario,
    pub space: Arc<FiniteMetricSpace>,
    pub filtrations: BTreeMap<String, Arc<GeneratedFiltration>>,
    pub maps: BTreeMap<String, FilteredMap>,
    pub actions: BTreeMap<String, IsometryAction>,
    pub chain: Option<DecompositionChain>,
    pub caps: Caps,
    pub seed: u64,
}

pub fn build(scenario: Scenario) -> Result<BuiltScenario, ScenarioError> {
    scenario.ring.validate()?;
    let space = Arc::new(match &scenario.space {
        SpaceSpec::Expr(e) => parse_space_expr(e, DEFAULT_POINT_CAP)?,
        SpaceSpec::Matrix(rows) => FiniteMetricSpace::new(rows.clone(), None)?,
    });
    let ring = scenario.ring;
    let n = space.points();
    let caps = scenario.caps.caps();
    let seed = scenario.caps.seed;

    let mut filtrations = BTreeMap::new();
    for (name, lit) in &scenario.filtrations {
        let mut gens = Vec::with_capacity(lit.generators.len());
        for (i, g) in lit.generators.iter().enumerate() {
            for &p in &g.support {
                if p >= n {
                    return Err(ScenarioError::Filtration {
                        name: name.clone(),
                        detail: format!("generator {i} support point {p} out of range"),
                    });
                }
            }
            gens.push(Generator {
                vector: vector_from_values(ring, &g.vector, &format!("{name}.generators[{i}]"))?,
                support: PointSet::from_indices(n, &g.support),
            });
        }
        let f = GeneratedFiltration::new(space.clone(), ring, lit.ambient, gens).map_err(|e| {
            ScenarioError::Filtration {
                name: name.clone(),
                detail: e.to_string(),
            }
        })?;
        filtrations.insert(name.clone(), Arc::new(f));
    }

    let mut maps = BTreeMap::new();
    for (name, lit) in &scenario.maps {
        let source = filtrations
            .get(&lit.source)
            .ok_or_else(|| ScenarioError::Map {
                name: name.clone(),
                detail: format!("unknown source filtration `{}`", lit.source),
            })?
            .clone();
        let target = filtrations
            .get(&lit.target)
            .ok_or_else(|| ScenarioError::Map {
                name: name.clone(),
                detail: format!("unknown target filtration `{}`", lit.target),
            })?
            .clone();
        let matrix = matrix_from_values(ring, &lit.matrix, &format!("{name}.matrix"))?;
        let map = FilteredMap::new(source, target, matrix).map_err(|e| ScenarioError::Map {
            name: name.clone(),
            detail: e.to_string(),
        })?;
        if let Some(declared) = &lit.declared {
            audit_declared(name, &map, declared, &caps, seed)?;
        }
        maps.insert(name.clone(), map);
    }

    let mut actions = BTreeMap::new();
    for (name, lit) in &scenario.actions {
        let module = filtrations
            .get(&lit.module)
            .ok_or_else(|| ScenarioError::Action {
                name: name.clone(),
                detail: format!("unknown filtration `{}`", lit.module),
            })?;
        let matrix = matrix_from_values(ring, &lit.matrix, &format!("{name}.matrix"))?;
        let action = IsometryAction {
            perm: lit.perm.clone(),
            matrix,
        };
        action
            .validate(&space, ring, module.ambient_rank())
            .map_err(|e| ScenarioError::Action {
                name: name.clone(),
                detail: e.to_string(),
            })?;
        actions.insert(name.clone(), action);
    }

    let chain = scenario
        .chain
        .as_ref()
        .map(|lit| -> Result<DecompositionChain, ScenarioError> {
            let set = |pts: &[usize]| PointSet::from_indices(n, pts);
            let chain = DecompositionChain {
                radii: lit.radii.clone(),
                families: lit
                    .families
                    .iter()
                    .map(|fam| fam.iter().map(|p| set(p)).collect())
                    .collect(),
                steps: lit
                    .steps
                    .iter()
                    .map(|step| {
                        step.iter()
                            .map(|d| ColoredDecomposition {
                                target: set(&d.target),
                                pieces: d
                                    .pieces
                                    .iter()
                                    .map(|p| {
                                        let color = if p.color <= 1 {
                                            crate::decomp::Color::One
                                        } else {
                                            crate::decomp::Color::Two
                                        };
                                        (set(&p.points), color)
                                    })
                                    .collect(),
                            })
                            .collect()
                    })
                    .collect(),
                mesh_bound: lit.mesh_bound,
            };
            Ok(chain)
        })
        .transpose()?;

    // References in checks must resolve now, not at run time.
    for (index, check) in scenario.checks.iter().enumerate() {
        let need_f = |name: &String| -> Result<(), ScenarioError> {
            filtrations
                .contains_key(name)
                .then_some(())
                .ok_or(ScenarioError::UnknownRef {
                    index,
                    what: "filtration",
                    name: name.clone(),
                })
        };
        let need_m = |name: &String| -> Result<(), ScenarioError> {
            maps.contains_key(name)
                .then_some(())
                .ok_or(ScenarioError::UnknownRef {
                    index,
                    what: "map",
                    name: name.clone(),
                })
        };
        let need_a = |name: &String| -> Result<(), ScenarioError> {
            actions
                .contains_key(name)
                .then_some(())
                .ok_or(ScenarioError::UnknownRef {
                    index,
                    what: "action",
                    name: name.clone(),
                })
        };
        match check {
            CheckSpec::Constants { filtration, .. } => need_f(filtration)?,
            CheckSpec::Control { map, .. }
            | CheckSpec::Bicontrol { map, .. }
            | CheckSpec::KernelSplitBound { map, .. }
            | CheckSpec::SplitElement { map, .. }
            | CheckSpec::Distribute { map, .. }
            | CheckSpec::ChainCertify { map, .. } => need_m(map)?,
            CheckSpec::Equivariance {
                filtration, action, ..
            } => {
                need_f(filtration)?;
                need_a(action)?;
            }
            CheckSpec::Facts {
                map,
                source_action,
                target_action,
            } => {
                need_m(map)?;
                if let Some(a) = source_action {
                    need_a(a)?;
                }
                if let Some(a) = target_action {
                    need_a(a)?;
                }
            }
            CheckSpec::Presentation { filtration }
            | CheckSpec::Resolution { filtration, .. } => need_f(filtration)?,
            CheckSpec::ValidateChain {} => {
                if chain.is_none() {
                    return Err(ScenarioError::Chain(
                        "validate-chain check without a chain".into(),
                    ));
                }
            }
            CheckSpec::Metric {} | CheckSpec::Game { .. } => {}
        }
    }

    Ok(BuiltScenario {
        scenario,
        space,
        filtrations,
        maps,
        actions,
        chain,
        caps,
        seed,
    })
}

/// Declared constants are never trusted: each one must survive its check in
/// the mode the caps select, or the scenario is rejected.
fn audit_declared(
    name: &str,
    map: &FilteredMap,
    declared: &DeclaredConstants,
    caps: &Caps,
    seed: u64,
) -> Result<(), ScenarioError> {
    let mut audit_prop =
        |f: &dyn Filtration, kind: PropertyKind, value: u64| -> Result<(), ScenarioError> {
            let mode = caps.mode_for(f, kind, seed);
            match verify_constant_holds(f, kind, value, mode, caps) {
                Ok(Ok(())) => Ok(()),
                Ok(Err(w)) => Err(ScenarioError::DeclaredConstant {
                    name: name.to_string(),
                    kind,
                    declared: value,
                    witness: w.to_string(),
                }),
                Err(e) => Err(ScenarioError::Map {
                    name: name.to_string(),
                    detail: e.to_string(),
                }),
            }
        };
    if let Some(v) = declared.lean_source {
        audit_prop(map.source.as_ref(), PropertyKind::Lean, v)?;
    }
    if let Some(v) = declared.split_source {
        audit_prop(map.source.as_ref(), PropertyKind::Split, v)?;
    }
    if let Some(v) = declared.insular_target {
        audit_prop(map.target.as_ref(), PropertyKind::Insular, v)?;
    }
    let wrap = |e: crate::morphism::MorphismError| ScenarioError::Map {
        name: name.to_string(),
        detail: e.to_string(),
    };
    if let Some(v) = declared.control {
        let computed = crate::morphism::control_constant(map, caps, seed).map_err(wrap)?;
        if computed.value.map_or(true, |c| c > v) {
            return Err(ScenarioError::DeclaredControl {
                name: name.to_string(),
                what: "control",
                declared: v,
                computed: computed.value.unwrap_or(u64::MAX),
            });
        }
    }
    if let Some(v) = declared.bicontrol {
        let report = control_report(map, caps, seed).map_err(wrap)?;
        if report.bicontrol.map_or(true, |c| c > v) {
            return Err(ScenarioError::DeclaredControl {
                name: name.to_string(),
                what: "bicontrol",
                declared: v,
                computed: report.bicontrol.unwrap_or(u64::MAX),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub kind: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub details: BTreeMap<String, Value>,
}

/// The machine-readable result of a scenario run. Identical JSON for
/// identical (scenario, seed); timings are reported in the human-readable
/// rendering only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub scenario: String,
    pub seed: u64,
    pub space: SpaceReport,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceReport {
    pub points: usize,
    pub diameter: u64,
    /// Present for word-metric balls: the truncation radius notice.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Human-readable rendering; `timings_ms` lines up with `checks`.
    pub fn render_text(&self, timings_ms: &[u128]) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario {} (seed {}): {} points, diameter {}{}",
            self.scenario,
            self.seed,
            self.space.points,
            self.space.diameter,
            self.space
                .truncation
                .as_deref()
                .map(|t| format!(", truncated at {t}"))
                .unwrap_or_default()
        );
        for (i, c) in self.checks.iter().enumerate() {
            let t = timings_ms
                .get(i)
                .map(|ms| format!(" [{ms} ms]"))
                .unwrap_or_default();
            let outcome = match c.outcome {
                Outcome::Pass => "pass",
                Outcome::Fail => "FAIL",
                Outcome::NotApplicable => "n/a",
            };
            let mode = c
                .mode
                .as_deref()
                .map(|m| format!(" mode={m}"))
                .unwrap_or_default();
            let _ = writeln!(out, "  {:<3} {:<20} {}{}{}", i + 1, c.name, outcome, mode, t);
            for (k, v) in &c.details {
                let _ = writeln!(out, "        {k}: {v}");
            }
        }
        let _ = writeln!(
            out,
            "summary: {} pass, {} fail, {} n/a",
            self.summary.pass, self.summary.fail, self.summary.not_applicable
        );
        out
    }
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Execute the checks in order. Input problems surface as `Err`; check
/// failures surface in the report.
pub fn run(built: &BuiltScenario) -> Result<(Report, Vec<u128>), ScenarioError> {
    let mut checks = Vec::new();
    let mut timings = Vec::new();
    for (index, spec) in built.scenario.checks.iter().enumerate() {
        let start = Instant::now();
        let report = run_check(built, index, spec)?;
        timings.push(start.elapsed().as_millis());
        checks.push(report);
    }
    let summary = Summary {
        pass: checks.iter().filter(|c| c.outcome == Outcome::Pass).count(),
        fail: checks.iter().filter(|c| c.outcome == Outcome::Fail).count(),
        not_applicable: checks
            .iter()
            .filter(|c| c.outcome == Outcome::NotApplicable)
            .count(),
    };
    let truncation = match built.space.origin() {
        SpaceOrigin::Explicit => None,
        SpaceOrigin::ZnBall { dim, radius } => Some(format!("z{dim}ball:{radius}")),
        SpaceOrigin::CycleBall { modulus, radius } => Some(format!("cycle:{modulus}:{radius}")),
        SpaceOrigin::FreeBall { rank, radius } => Some(format!("free:{rank}:{radius}")),
    };
    Ok((
        Report {
            version: SCHEMA_VERSION,
            scenario: built.scenario.name.clone(),
            seed: built.seed,
            space: SpaceReport {
                points: built.space.points(),
                diameter: built.space.diameter(),
                truncation,
            },
            checks,
            summary,
        },
        timings,
    ))
}

fn constant_detail(details: &mut BTreeMap<String, Value>, label: &str, r: &crate::filtered::ConstantResult) {
    details.insert(
        format!("{label}"),
        match r.value {
            Some(v) => json!(v),
            None => json!("unbounded"),
        },
    );
    details.insert(format!("{label}_mode"), json!(r.mode.to_string()));
    if let Some(w) = &r.witness {
        details.insert(format!("{label}_tight_witness"), json!(w.to_string()));
    }
}

fn run_check(
    built: &BuiltScenario,
    index: usize,
    spec: &CheckSpec,
) -> Result<CheckReport, ScenarioError> {
    let caps = &built.caps;
    let seed = built.seed;
    let mut details: BTreeMap<String, Value> = BTreeMap::new();
    let wrap_f = |e: crate::filtered::FilteredError| ScenarioError::Filtration {
        name: format!("check {index}"),
        detail: e.to_string(),
    };
    let wrap_m = |e: crate::morphism::MorphismError| ScenarioError::Map {
        name: format!("check {index}"),
        detail: e.to_string(),
    };

    let (name, kind, outcome, mode): (String, &str, Outcome, Option<String>) = match spec {
        CheckSpec::Metric {} => {
            details.insert("points".into(), json!(built.space.points()));
            details.insert("diameter".into(), json!(built.space.diameter()));
            (format!("metric-{index}"), "metric", Outcome::Pass, None)
        }
        CheckSpec::Constants {
            filtration,
            expect_lean,
            expect_split,
            expect_insular,
        } => {
            let f = &built.filtrations[filtration];
            let report = constants_report(f.as_ref(), caps, seed).map_err(wrap_f)?;
            constant_detail(&mut details, "lean", &report.lean);
            constant_detail(&mut details, "split", &report.split);
            constant_detail(&mut details, "insular", &report.insular);
            let ok = expect_lean.map_or(true, |v| report.lean.value == Some(v))
                && expect_split.map_or(true, |v| report.split.value == Some(v))
                && expect_insular.map_or(true, |v| report.insular.value == Some(v));
            (
                format!("constants-{filtration}"),
                "constants",
                if ok { Outcome::Pass } else { Outcome::Fail },
                Some(report.lean.mode.to_string()),
            )
        }
        CheckSpec::Control { map, expect } => {
            let m = &built.maps[map];
            let r = crate::morphism::control_constant(m, caps, seed).map_err(wrap_m)?;
            constant_detail(&mut details, "control", &r);
            let ok = expect.map_or(r.value.is_some(), |v| r.value == Some(v));
            (
                format!("control-{map}"),
                "control",
                if ok { Outcome::Pass } else { Outcome::Fail },
                Some(r.mode.to_string()),
            )
        }
        CheckSpec::Bicontrol { map, expect } => {
            let m = &built.maps[map];
            let r = control_report(m, caps, seed).map_err(wrap_m)?;
            constant_detail(&mut details, "control", &r.control);
            constant_detail(&mut details, "reverse", &r.reverse);
            details.insert(
                "bicontrol".into(),
                r.bicontrol.map_or(json!("unbounded"), |v| json!(v)),
            );
            details.insert("surjective".into(), json!(r.surjective));
            let ok = expect.map_or(r.bicontrol.is_some(), |v| r.bicontrol == Some(v));
            (
                format!("bicontrol-{map}"),
                "bicontrol",
                if ok { Outcome::Pass } else { Outcome::Fail },
                Some(r.control.mode.to_string()),
            )
        }
        CheckSpec::KernelSplitBound { map, expect_exact } => {
            let m = &built.maps[map];
            let declared = built.scenario.maps[map].declared.clone().unwrap_or_default();
            let delta = match declared.split_source {
                Some(v) => v,
                None => property_constant(
                    m.source.as_ref(),
                    PropertyKind::Split,
                    caps.mode_for(m.source.as_ref(), PropertyKind::Split, seed),
                    caps,
                )
                .map_err(wrap_f)?
                .value
                .unwrap_or(0),
            };
            let b = match declared.bicontrol {
                Some(v) => v,
                None => control_report(m, caps, seed)
                    .map_err(wrap_m)?
                    .bicontrol
                    .unwrap_or(0),
            };
            let d = match declared.insular_target {
                Some(v) => v,
                None => property_constant(
                    m.target.as_ref(),
                    PropertyKind::Insular,
                    caps.mode_for(m.target.as_ref(), PropertyKind::Insular, seed),
                    caps,
                )
                .map_err(wrap_f)?
                .value
                .unwrap_or(0),
            };
            let bound = delta + 2 * b + d;
            let kernel = m.kernel();
            let mode = caps.mode_for(&kernel.filtration, PropertyKind::Split, seed);
            let split = property_constant(&kernel.filtration, PropertyKind::Split, mode, caps)
                .map_err(wrap_f)?;
            constant_detail(&mut details, "kernel_split", &split);
            details.insert("delta".into(), json!(delta));
            details.insert("b".into(), json!(b));
            details.insert("d".into(), json!(d));
            details.insert("bound".into(), json!(bound));
            details.insert("kernel_rank".into(), json!(kernel.rank()));
            let ok = split.value.map_or(false, |v| v <= bound)
                && expect_exact.map_or(true, |v| split.value == Some(v));
            (
                format!("kernel-split-{map}"),
                "kernel-split-bound",
                if ok { Outcome::Pass } else { Outcome::Fail },
                Some(mode.to_string()),
            )
        }
        CheckSpec::SplitElement { map, covers } => {
            let m = &built.maps[map];
            let declared = built.scenario.maps[map].declared.clone().unwrap_or_default();
            let delta = declared.split_source.unwrap_or(0);
            let b = declared.bicontrol.unwrap_or(0);
            let d = declared.insular_target.unwrap_or(0);
            let kernel = m.kernel();
            let pairs =
                crate::gen::sample_covers(built.space.points(), *covers as usize, seed ^ 0xc0);
            let mut failures = 0usize;
            let mut first_error = None;
            for z in kernel.basis() {
                for (t, u) in &pairs {
                    if let Err(e) = split_kernel_element(m, &kernel, &z, t, u, delta, b, d) {
                        failures += 1;
                        first_error.get_or_insert(e.to_string());
                    }
                }
            }
            details.insert("kernel_rank".into(), json!(kernel.rank()));
            details.insert("covers".into(), json!(covers));
            details.insert("failures".into(), json!(failures));
            if let Some(e) = first_error {
                details.insert("first_error".into(), json!(e));
            }
            (
                format!("split-element-{map}"),
                "split-element",
                if failures == 0 { Outcome::Pass } else { Outcome::Fail },
                None,
            )
        }
        CheckSpec::Distribute { map, family, expect } => {
            let m = &built.maps[map];
            let declared = built.scenario.maps[map].declared.clone().unwrap_or_default();
            let lean_d = declared.lean_source.unwrap_or(0);
            let b = declared.control.or(declared.bicontrol).unwrap_or(0);
            let d = declared.insular_target.unwrap_or(0);
            let n = built.space.points();
            let family: Vec<PointSet> = family
                .iter()
                .map(|p| PointSet::from_indices(n, p))
                .collect();
            let kernel = m.kernel();
            let mut union = PointSet::empty(n);
            for f in &family {
                union = union.union(f);
            }
            let local = kernel.eval(&union);
            details.insert("local_kernel_rank".into(), json!(local.rank()));
            let mut violation = None;
            for k in local.gens() {
                match decompose_over_disjoint_family(m, &kernel, &k, &family, lean_d, b, d) {
                    Ok(parts) => {
                        details.insert(
                            "separation".into(),
                            parts.separation.map_or(json!(null), |s| json!(s)),
                        );
                        details
                            .insert("required".into(), json!(parts.required_disjointness));
                        details
                            .insert("precondition_met".into(), json!(parts.precondition_met));
                    }
                    Err(e) => {
                        violation.get_or_insert(e.to_string());
                    }
                }
            }
            if let Some(v) = &violation {
                details.insert("violation".into(), json!(v));
            }
            let ok = match expect {
                Expectation::Pass => violation.is_none(),
                Expectation::Violation => violation.is_some(),
            };
            (
                format!("distribute-{map}"),
                "distribute",
                if ok { Outcome::Pass } else { Outcome::Fail },
                None,
            )
        }
        CheckSpec::ChainCertify {
            map,
            strategy,
            max_rounds,
        } => {
            let m = &built.maps[map];
            let declared = built.scenario.maps[map].declared.clone().unwrap_or_default();
            let constants = PipelineConstants {
                lean_d: declared.lean_source.unwrap_or(0),
                split_delta: declared
                    .split_source
                    .or(declared.lean_source)
                    .unwrap_or(0),
                control_b: declared.bicontrol.or(declared.control).unwrap_or(0),
                insular_d: declared.insular_target.unwrap_or(0),
            };
            let derived = crate::decomp::derive_chain(
                &built.space,
                *strategy,
                constants.lean_d,
                constants.control_b,
                constants.insular_d,
                *max_rounds,
            )
            .map_err(|e| ScenarioError::Chain(e.to_string()))?;
            let kernel = m.kernel();
            let mut achieved_max = 0u64;
            let mut summand_count = 0usize;
            let mut failure = None;
            let mut claimed = 0u64;
            for (i, k) in kernel.basis().iter().enumerate() {
                match lean_decompose(m, &kernel, &derived, k, &constants) {
                    Ok(cert) => {
                        claimed = cert.claimed_bound;
                        achieved_max = achieved_max.max(cert.achieved);
                        summand_count += cert.summands.len();
                        if !cert.within_claimed_bound() {
                            failure.get_or_insert(format!(
                                "element {i}: achieved {} > bound {}",
                                cert.achieved, cert.claimed_bound
                            ));
                        }
                    }
                    Err(e) => {
                        failure.get_or_insert(format!("element {i}: {e}"));
                    }
                }
            }
            details.insert("rounds".into(), json!(derived.chain.rounds()));
            details.insert("mesh".into(), json!(derived.mesh));
            details.insert("schedule".into(), json!(derived.chain.radii));
            details.insert("claimed_bound".into(), json!(claimed));
            details.insert("achieved_max".into(), json!(achieved_max));
            details.insert("kernel_rank".into(), json!(kernel.rank()));
            details.insert("summands".into(), json!(summand_count));
            if let Some(f) = &failure {
                details.insert("failure".into(), json!(f));
            }
            (
                format!("chain-certify-{map}"),
                "chain-certify",
                if failure.is_none() { Outcome::Pass } else { Outcome::Fail },
                None,
            )
        }
        CheckSpec::ValidateChain {} => {
            let chain = built.chain.as_ref().expect("validated at build");
            match validate_chain(&built.space, chain) {
                Ok(()) => {
                    details.insert("rounds".into(), json!(chain.rounds()));
                    details.insert("mesh".into(), json!(chain.final_mesh(&built.space)));
                    (
                        format!("chain-{index}"),
                        "validate-chain",
                        Outcome::Pass,
                        None,
                    )
                }
                Err(e) => {
                    details.insert("violation".into(), json!(e.to_string()));
                    (
                        format!("chain-{index}"),
                        "validate-chain",
                        Outcome::Fail,
                        None,
                    )
                }
            }
        }
        CheckSpec::Equivariance {
            filtration,
            action,
            expect,
        } => {
            let f = &built.filtrations[filtration];
            let a = &built.actions[action];
            let result = check_equivariance(f.as_ref(), a, caps, seed).map_err(wrap_f)?;
            let ok = match (&result, expect) {
                (Ok(()), Expectation::Pass) => true,
                (Err(_), Expectation::Violation) => true,
                _ => false,
            };
            if let Err(w) = &result {
                details.insert("witness".into(), json!(w.to_string()));
            }
            (
                format!("equivariance-{filtration}"),
                "equivariance",
                if ok { Outcome::Pass } else { Outcome::Fail },
                None,
            )
        }
        CheckSpec::Facts {
            map,
            source_action,
            target_action,
        } => {
            let m = &built.maps[map];
            let pair = match (source_action, target_action) {
                (Some(s), Some(t)) => Some(MapActionPair {
                    source: built.actions[s].clone(),
                    target: built.actions[t].clone(),
                }),
                _ => None,
            };
            let report = classical_facts(m, pair.as_ref(), caps, seed).map_err(wrap_m)?;
            let mut failed = false;
            for e in &report.entries {
                details.insert(
                    e.name.to_string(),
                    json!(format!("{}: {}", e.outcome, e.detail)),
                );
                if e.outcome == FactOutcome::Fail {
                    failed = true;
                }
            }
            (
                format!("facts-{map}"),
                "facts",
                if failed { Outcome::Fail } else { Outcome::Pass },
                None,
            )
        }
        CheckSpec::Presentation { filtration } => {
            let f: DynFiltration = built.filtrations[filtration].clone();
            match build_admissible_presentation(f, caps, seed) {
                Ok(p) => {
                    details.insert("cover_rank".into(), json!(p.cover.module.total().rank()));
                    details.insert(
                        "cover_bicontrol".into(),
                        p.cover_control.bicontrol.map_or(json!("unbounded"), |v| json!(v)),
                    );
                    details.insert("kernel_rank".into(), json!(p.kernel.rank()));
                    details.insert(
                        "relation_rank".into(),
                        json!(p.second_cover.module.total().rank()),
                    );
                    let ok = p
                        .cover_control
                        .bicontrol
                        .map_or(false, |b| b <= p.cover.lean_d);
                    (
                        format!("presentation-{filtration}"),
                        "presentation",
                        if ok { Outcome::Pass } else { Outcome::Fail },
                        None,
                    )
                }
                Err(e) => {
                    details.insert("error".into(), json!(e.to_string()));
                    (
                        format!("presentation-{filtration}"),
                        "presentation",
                        Outcome::Fail,
                        None,
                    )
                }
            }
        }
        CheckSpec::Resolution {
            filtration,
            max_length,
            expect_terminated,
        } => {
            let f: DynFiltration = built.filtrations[filtration].clone();
            match build_resolution(f, *max_length, caps, seed) {
                Ok(r) => {
                    details.insert("length".into(), json!(r.length));
                    details.insert("terminated".into(), json!(r.terminated));
                    details.insert(
                        "stage_ranks".into(),
                        json!(r.stages.iter().map(|s| s.rank).collect::<Vec<_>>()),
                    );
                    let ok = r.terminated == *expect_terminated;
                    (
                        format!("resolution-{filtration}"),
                        "resolution",
                        if ok { Outcome::Pass } else { Outcome::Fail },
                        None,
                    )
                }
                Err(e) => {
                    details.insert("error".into(), json!(e.to_string()));
                    (
                        format!("resolution-{filtration}"),
                        "resolution",
                        Outcome::Fail,
                        None,
                    )
                }
            }
        }
        CheckSpec::Game {
            radii,
            strategy,
            cap,
            expect_win,
        } => {
            let outcome = crate::decomp::play_game(&built.space, radii, *strategy, *cap)
                .map_err(|e| ScenarioError::Chain(e.to_string()))?;
            let (won, detail) = match &outcome {
                Ok(chain) => (true, format!("won in {} rounds", chain.rounds())),
                Err(f) => (false, f.to_string()),
            };
            details.insert("result".into(), json!(detail));
            (
                format!("game-{index}"),
                "game",
                if won == *expect_win { Outcome::Pass } else { Outcome::Fail },
                None,
            )
        }
    };

    Ok(CheckReport {
        name,
        kind: kind.to_string(),
        outcome,
        mode,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3_scenario() -> Scenario {
        serde_json::from_value(json!({
            "version": 1,
            "name": "path3-kernel",
            "space": [[0,1,2],[1,0,1],[2,1,0]],
            "ring": {"prime-field": 5},
            "filtrations": {
                "F": {"ambient": 2, "generators": [
                    {"vector": [1, 0], "support": [0]},
                    {"vector": [0, 1], "support": [2]}
                ]},
                "G": {"ambient": 1, "generators": [
                    {"vector": [1], "support": [1]}
                ]}
            },
            "maps": {
                "phi": {
                    "source": "F", "target": "G",
                    "matrix": [[1], [-1]],
                    "declared": {"split_source": 0, "insular_target": 0, "bicontrol": 1}
                }
            },
            "checks": [
                {"kind": "metric"},
                {"kind": "control", "map": "phi", "expect": 1},
                {"kind": "bicontrol", "map": "phi", "expect": 1},
                {"kind": "kernel-split-bound", "map": "phi", "expect_exact": 2},
                {"kind": "split-element", "map": "phi", "covers": 8}
            ],
            "caps": {"seed": 7}
        }))
        .unwrap()
    }

    #[test]
    fn path3_scenario_runs_clean() {
        let built = build(path3_scenario()).unwrap();
        let (report, _) = run(&built).unwrap();
        assert!(!report.failed(), "{}", report.to_json());
        assert_eq!(report.summary.pass, 5);
        // The tightness witness: kernel split constant is exactly 2.
        let ks = &report.checks[3];
        assert_eq!(ks.details["kernel_split"], json!(2));
        assert_eq!(ks.details["bound"], json!(2));
    }

    #[test]
    fn reports_are_deterministic() {
        let built = build(path3_scenario()).unwrap();
        let (a, _) = run(&built).unwrap();
        let (b, _) = run(&built).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn declared_constant_mismatch_is_input_error() {
        let mut sc = path3_scenario();
        sc.maps.get_mut("phi").unwrap().declared = Some(DeclaredConstants {
            bicontrol: Some(0), // true constant is 1
            ..Default::default()
        });
        let err = build(sc).err().expect("audit must reject");
        assert!(matches!(err, ScenarioError::DeclaredControl { .. }));
    }

    #[test]
    fn malformed_scalar_is_input_error() {
        let mut sc = path3_scenario();
        sc.filtrations.get_mut("F").unwrap().generators[0].vector = vec![json!("x")];
        let err = build(sc).err().expect("bad scalar");
        assert!(matches!(err, ScenarioError::Scalar { .. }));
    }

    #[test]
    fn unknown_reference_is_input_error() {
        let mut sc = path3_scenario();
        sc.checks.push(
            serde_json::from_value(json!({"kind": "control", "map": "nope"})).unwrap(),
        );
        let err = build(sc).err().expect("unknown map");
        assert!(matches!(err, ScenarioError::UnknownRef { .. }));
    }

    #[test]
    fn scenario_json_round_trip() {
        let sc = path3_scenario();
        let text = sc.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(text, back.to_json());
    }
}
