//! The `modlab.instance/1` file format.
//!
//! ```json
//! {
//!   "schema": "modlab.instance/1",
//!   "space": { "kind": "grid1d", "n": 8192 },
//!   "family": { "kind": "interval", "k": 10 },
//!   "task": "modulus",
//!   "options": { "p": 1, "class": "all" }
//! }
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use modlab_core::counterexamples::{
    construction_families, interval_family, interval_sequence, radial_family, radial_sequence, spiky_space, GSystem,
    RadialGrid, DEFAULT_CELLS_PER_SEGMENT,
};
use modlab_core::measures::{dirac, path_measure, restriction, FamilySequence, Measure, MeasureFamily};
use modlab_core::modulus::FunctionClass;
use modlab_core::space::{grid_1d, grid_2d, MeasureSpace, Rect};

use crate::fail::{Fail, Outcome};

pub const INSTANCE_SCHEMA: &str = "modlab.instance/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub space: SpaceSpec,
    pub family: FamilySpec,
    pub task: Task,
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Modulus,
    Content,
    Duality,
    AmBracket,
}

impl Task {
    pub fn parse(s: &str) -> Outcome<Task> {
        serde_json::from_value(Value::String(s.into()))
            .map_err(|_| Fail::Schema(format!("unknown task {s:?} (modulus, content, duality, am-bracket)")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// `all`, `lip:L` or `bv`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Last index `K` of a family sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// 0-based first index of the tail window of an admissible sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1d {
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid2d {
    /// `[a, b, c, d]` for `[a, b] × [c, d]`.
    pub rect: [f64; 4],
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spiky {
    pub segments: usize,
    pub depth: usize,
    #[serde(default = "default_cells")]
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpace {
    pub mass: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceSpec {
    Grid1d(Grid1d),
    Grid2d(Grid2d),
    Spiky(Spiky),
    Explicit(ExplicitSpace),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracSet {
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub polylines: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Restrictions {
    pub subsets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitMember {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitFamily {
    pub members: Vec<ExplicitMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Radial {
    pub k: usize,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_subdivisions")]
    pub subdivisions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Construction {
    /// Index sequences `s`, indexed by segment; defaults to the constants,
    /// the diagonal and the reversed diagonal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<Vec<usize>>>,
    /// Use `E_m` for this `m` (default `M`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    DiracSet(DiracSet),
    Paths(Paths),
    Restrictions(Restrictions),
    Explicit(ExplicitFamily),
    Interval(Interval),
    Radial(Radial),
    Construction(Construction),
}

fn one() -> f64 {
    1.0
}

fn default_cells() -> usize {
    DEFAULT_CELLS_PER_SEGMENT
}

fn default_directions() -> usize {
    RadialGrid::default().directions
}

fn default_subdivisions() -> usize {
    RadialGrid::default().subdivisions
}

fn take_object(v: Value, what: &str) -> Outcome<Map<String, Value>> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(Fail::Schema(format!("{what} must be an object"))),
    }
}

fn variant<T: DeserializeOwned>(what: &str, kind: &str, rest: Map<String, Value>) -> Outcome<T> {
    serde_json::from_value(Value::Object(rest)).map_err(|e| Fail::Schema(format!("{what} kind {kind:?}: {e}")))
}

fn split_kind(v: Value, what: &str) -> Outcome<(String, Map<String, Value>)> {
    let mut m = take_object(v, what)?;
    match m.remove("kind") {
        Some(Value::String(k)) => Ok((k, m)),
        Some(_) => Err(Fail::Schema(format!("{what}.kind must be a string"))),
        None => Err(Fail::Schema(format!("{what} is missing \"kind\""))),
    }
}

impl SpaceSpec {
    fn from_value(v: Value) -> Outcome<Self> {
        let (kind, rest) = split_kind(v, "space")?;
        Ok(match kind.as_str() {
            "grid1d" => SpaceSpec::Grid1d(variant("space", &kind, rest)?),
            "grid2d" => SpaceSpec::Grid2d(variant("space", &kind, rest)?),
            "spiky" => SpaceSpec::Spiky(variant("space", &kind, rest)?),
            "explicit" => SpaceSpec::Explicit(variant("space", &kind, rest)?),
            _ => return Err(Fail::Schema(format!("unknown space kind {kind:?}"))),
        })
    }
}

impl FamilySpec {
    fn from_value(v: Value) -> Outcome<Self> {
        let (kind, rest) = split_kind(v, "family")?;
        Ok(match kind.as_str() {
            "dirac-set" => FamilySpec::DiracSet(variant("family", &kind, rest)?),
            "paths" => FamilySpec::Paths(variant("family", &kind, rest)?),
            "restrictions" => FamilySpec::Restrictions(variant("family", &kind, rest)?),
            "explicit" => FamilySpec::Explicit(variant("family", &kind, rest)?),
            "interval" => FamilySpec::Interval(variant("family", &kind, rest)?),
            "radial" => FamilySpec::Radial(variant("family", &kind, rest)?),
            "construction" => FamilySpec::Construction(variant("family", &kind, rest)?),
            _ => return Err(Fail::Schema(format!("unknown family kind {kind:?}"))),
        })
    }
}

impl Instance {
    pub fn parse(text: &str) -> Outcome<Instance> {
        let v: Value = serde_json::from_str(text)?;
        let mut m = take_object(v, "instance")?;
        match m.remove("schema") {
            Some(Value::String(s)) if s == INSTANCE_SCHEMA => {}
            Some(other) => return Err(Fail::Schema(format!("unsupported schema {other}, expected {INSTANCE_SCHEMA:?}"))),
            None => return Err(Fail::Schema("missing \"schema\"".into())),
        }
        let space = SpaceSpec::from_value(m.remove("space").ok_or_else(|| Fail::Schema("missing \"space\"".into()))?)?;
        let family =
            FamilySpec::from_value(m.remove("family").ok_or_else(|| Fail::Schema("missing \"family\"".into()))?)?;
        let task = match m.remove("task") {
            Some(Value::String(s)) => Task::parse(&s)?,
            Some(_) => return Err(Fail::Schema("task must be a string".into())),
            None => Task::Modulus,
        };
        let options = match m.remove("options") {
            Some(v) => serde_json::from_value(v).map_err(|e| Fail::Schema(format!("options: {e}")))?,
            None => Options::default(),
        };
        if let Some(key) = m.keys().next() {
            return Err(Fail::Schema(format!("unknown key {key:?}")));
        }
        Ok(Instance { space, family, task, options })
    }

    pub fn load(path: &Path) -> Outcome<Instance> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Fail::Io(format!("cannot read {}: {e}", path.display())))?;
        Instance::parse(&text)
    }

    /// The instance as JSON, echoed into reports.
    pub fn echo(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), Value::String(INSTANCE_SCHEMA.into()));
        m.insert("space".into(), to_report_value(&self.space));
        m.insert("family".into(), to_report_value(&self.family));
        m.insert("task".into(), serde_json::to_value(self.task).expect("task serializes"));
        m.insert("options".into(), to_report_value(&self.options));
        Value::Object(m)
    }
}

/// Serializes with every float rendered to 17 significant digits.
fn to_report_value<T: Serialize>(t: &T) -> Value {
    fn walk(v: Value) -> Value {
        match v {
            Value::Number(n) if n.is_f64() => crate::report::num(n.as_f64().expect("f64 number")),
            Value::Array(a) => Value::Array(a.into_iter().map(walk).collect()),
            Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, walk(v))).collect()),
            other => other,
        }
    }
    walk(serde_json::to_value(t).expect("specs serialize"))
}

/// `all`, `lip:L` or `bv`.
pub fn parse_class(s: &str) -> Outcome<FunctionClass> {
    match s {
        "all" => Ok(FunctionClass::All),
        "bv" => Ok(FunctionClass::BoundaryVanishing),
        _ => match s.strip_prefix("lip:").map(str::parse::<f64>) {
            Some(Ok(l)) if l.is_finite() && l > 0.0 => Ok(FunctionClass::Lipschitz(l)),
            _ => Err(Fail::Schema(format!("unknown function class {s:?} (all, lip:L, bv)"))),
        },
    }
}

/// A materialized space, keeping the spiky structure when there is one.
pub struct BuiltSpace {
    pub space: Arc<MeasureSpace>,
    pub system: Option<GSystem>,
}

pub fn build_space(spec: &SpaceSpec) -> Outcome<BuiltSpace> {
    let plain = |s: MeasureSpace| BuiltSpace { space: Arc::new(s), system: None };
    Ok(match spec {
        SpaceSpec::Grid1d(g) => plain(grid_1d(g.a, g.b, g.n)?),
        SpaceSpec::Grid2d(g) => plain(grid_2d(Rect::new(g.rect[0], g.rect[1], g.rect[2], g.rect[3]), g.nx, g.ny)?),
        SpaceSpec::Spiky(s) => {
            let sp = spiky_space(s.segments, s.depth, s.cells)?;
            BuiltSpace { space: sp.system.space().clone(), system: Some(sp.system) }
        }
        SpaceSpec::Explicit(e) => {
            let mut s = MeasureSpace::new(e.mass.clone())?;
            if let Some(c) = &e.coords {
                s = s.with_coords(c.clone())?;
            }
            if let Some(b) = &e.boundary {
                s = s.with_boundary(b.iter().copied())?;
            }
            if let Some(edges) = &e.edges {
                s = s.with_edges(edges.clone())?;
            }
            plain(s)
        }
    })
}

fn labelled(space: &Arc<MeasureSpace>, members: Vec<Measure>, prefix: &str) -> Outcome<MeasureFamily> {
    Ok(MeasureFamily::from_members(
        space.clone(),
        members.into_iter().enumerate().map(|(i, m)| (format!("{prefix}{i}"), m)),
    )?)
}

fn spiky_system<'a>(built: &'a BuiltSpace) -> Outcome<&'a GSystem> {
    built.system.as_ref().ok_or_else(|| Fail::Schema("family kind \"construction\" needs a spiky space".into()))
}

fn construction_sequence(built: &BuiltSpace, c: &Construction) -> Outcome<FamilySequence> {
    let system = spiky_system(built)?;
    let seqs = c.sequences.clone().unwrap_or_else(|| system.default_index_sequences());
    Ok(construction_families(system, &seqs)?)
}

pub fn build_family(built: &BuiltSpace, spec: &FamilySpec) -> Outcome<MeasureFamily> {
    let space = &built.space;
    Ok(match spec {
        FamilySpec::DiracSet(d) => {
            labelled(space, d.points.iter().map(|&x| dirac(space, x)).collect::<Result<_, _>>()?, "x")?
        }
        FamilySpec::Paths(p) => {
            labelled(space, p.polylines.iter().map(|l| path_measure(space, l)).collect::<Result<_, _>>()?, "path")?
        }
        FamilySpec::Restrictions(r) => labelled(
            space,
            r.subsets.iter().map(|s| restriction(space, s.iter().copied())).collect::<Result<_, _>>()?,
            "set",
        )?,
        FamilySpec::Explicit(e) => {
            let mut family = MeasureFamily::new(space.clone());
            for (i, m) in e.members.iter().enumerate() {
                let label = m.label.clone().unwrap_or_else(|| format!("mu{i}"));
                family.push(label, Measure::from_entries(space.len(), m.entries.iter().copied())?)?;
            }
            family
        }
        FamilySpec::Interval(i) => interval_family(i.k, space)?,
        FamilySpec::Radial(r) => {
            radial_family(r.k, space, RadialGrid { directions: r.directions, subdivisions: r.subdivisions })?
        }
        FamilySpec::Construction(c) => {
            let seq = construction_sequence(built, c)?;
            let m = c.m.unwrap_or(seq.horizon());
            seq.family(m)?.clone()
        }
    })
}

/// The increasing sequence behind a family: `Γ_1 ⊆ … ⊆ Γ_k` for the path
/// families, `E_1 ⊆ … ⊆ E_M` for the construction, and the constant sequence
/// otherwise.
pub fn build_sequence(built: &BuiltSpace, spec: &FamilySpec) -> Outcome<FamilySequence> {
    let space = &built.space;
    Ok(match spec {
        FamilySpec::Interval(i) => interval_sequence(i.k, space)?,
        FamilySpec::Radial(r) => {
            radial_sequence(r.k, space, RadialGrid { directions: r.directions, subdivisions: r.subdivisions })?
        }
        FamilySpec::Construction(c) => construction_sequence(built, c)?,
        other => FamilySequence::constant(build_family(built, other)?, 1)?,
    })
}
