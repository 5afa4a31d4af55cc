//! Declarative restoration pipelines.
//!
//! A pipeline is a JSON document binding named images through ordered
//! operations:
//!
//! ```json
//! {
//!   "version": 1,
//!   "inputs": { "src": "papyrus.png" },
//!   "steps": [
//!     { "op": "dipole_edge_map", "params": { "radius": 2 }, "in": "src", "out": "edges" },
//!     { "op": "overlay_edges", "params": { "gain": 0.8 }, "in": ["src", "edges"], "out": "restored" }
//!   ],
//!   "outputs": { "restored": "restored.png" }
//! }
//! ```
//!
//! Every `in` must name a declared input or the output of an earlier step,
//! so the dataflow is acyclic by construction.

mod ops;
mod run;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{Map, Value};

pub use ops::{
    resolve_params, schema, Op, OpSchema, ParamDefault, ParamKind, ParamSpec, ResolvedParams, REGISTRY,
};
pub use run::{run_pipeline, sha256_hex, OutputReport, RunReport, StepReport, StepStatus};

pub const PIPELINE_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub op: String,
    pub params: Map<String, Value>,
    pub inputs: Vec<String>,
    pub out: String,
}

impl Step {
    /// The validated op. Always succeeds for steps of a parsed spec.
    pub fn resolve(&self) -> Result<Op, Vec<String>> {
        Op::parse(&self.op, &self.params).map(|(op, _)| op)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub version: u64,
    pub inputs: BTreeMap<String, String>,
    pub steps: Vec<Step>,
    pub outputs: BTreeMap<String, String>,
}

/// One problem found while validating a pipeline document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub step: Option<usize>,
    pub name: Option<String>,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.step, &self.name) {
            (Some(i), Some(n)) => write!(f, "step {i} (`{n}`): {}", self.message),
            (Some(i), None) => write!(f, "step {i}: {}", self.message),
            (None, Some(n)) => write!(f, "`{n}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Collector(Vec<ValidationError>);

impl Collector {
    fn push(&mut self, step: Option<usize>, name: Option<&str>, message: impl Into<String>) {
        self.0.push(ValidationError {
            step,
            name: name.map(str::to_owned),
            message: message.into(),
        });
    }
}

fn string_map(v: Option<&Value>, field: &str, errs: &mut Collector) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    match v {
        None => errs.push(None, None, format!("missing field `{field}`")),
        Some(Value::Object(m)) => {
            for (k, v) in m {
                match v.as_str() {
                    _ if k.is_empty() => errs.push(None, None, format!("empty name in `{field}`")),
                    Some(path) if !path.is_empty() => {
                        out.insert(k.clone(), path.to_owned());
                    }
                    _ => errs.push(None, Some(k), format!("`{field}` entry must be a non-empty path string")),
                }
            }
        }
        Some(_) => errs.push(None, None, format!("`{field}` must be an object of name -> path")),
    }
    out
}

fn parse_step(i: usize, v: &Value, errs: &mut Collector) -> Option<Step> {
    let Some(obj) = v.as_object() else {
        errs.push(Some(i), None, "step must be an object");
        return None;
    };
    for key in obj.keys() {
        if !matches!(key.as_str(), "op" | "params" | "in" | "out") {
            errs.push(Some(i), Some(key), "unknown step field");
        }
    }
    let op = match obj.get("op").and_then(Value::as_str) {
        Some(op) => Some(op.to_owned()),
        None => {
            errs.push(Some(i), None, "missing string field `op`");
            None
        }
    };
    let params = match obj.get("params") {
        None | Some(Value::Null) => Some(Map::new()),
        Some(Value::Object(m)) => Some(m.clone()),
        Some(_) => {
            errs.push(Some(i), None, "`params` must be an object");
            None
        }
    };
    let inputs = match obj.get("in") {
        Some(Value::String(s)) => Some(vec![s.clone()]),
        Some(Value::Array(a)) if !a.is_empty() && a.iter().all(Value::is_string) => {
            Some(a.iter().filter_map(|v| v.as_str().map(str::to_owned)).collect())
        }
        _ => {
            errs.push(Some(i), None, "`in` must be a name or a non-empty array of names");
            None
        }
    };
    let out = match obj.get("out").and_then(Value::as_str) {
        Some(s) if !s.is_empty() => Some(s.to_owned()),
        _ => {
            errs.push(Some(i), None, "missing non-empty string field `out`");
            None
        }
    };
    Some(Step {
        op: op?,
        params: params?,
        inputs: inputs?,
        out: out?,
    })
}

/// Parses and validates a pipeline document, collecting every error.
pub fn parse_pipeline(text: &str) -> Result<PipelineSpec, ValidationErrors> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        ValidationErrors(vec![ValidationError {
            step: None,
            name: None,
            message: format!("malformed JSON: {e}"),
        }])
    })?;
    validate_value(&doc)
}

fn validate_value(doc: &Value) -> Result<PipelineSpec, ValidationErrors> {
    let mut errs = Collector::default();
    let Some(root) = doc.as_object() else {
        errs.push(None, None, "pipeline must be a JSON object");
        return Err(ValidationErrors(errs.0));
    };
    for key in root.keys() {
        if !matches!(key.as_str(), "version" | "inputs" | "steps" | "outputs") {
            errs.push(None, Some(key), "unknown top-level field");
        }
    }
    let version = match root.get("version").and_then(Value::as_u64) {
        Some(PIPELINE_VERSION) => PIPELINE_VERSION,
        Some(v) => {
            errs.push(None, None, format!("unsupported version {v} (expected {PIPELINE_VERSION})"));
            v
        }
        None => {
            errs.push(None, None, "missing integer field `version`");
            0
        }
    };
    let inputs = string_map(root.get("inputs"), "inputs", &mut errs);
    let outputs = string_map(root.get("outputs"), "outputs", &mut errs);

    let mut steps = Vec::new();
    match root.get("steps") {
        Some(Value::Array(raw)) => {
            for (i, v) in raw.iter().enumerate() {
                steps.push(parse_step(i, v, &mut errs));
            }
        }
        Some(_) => errs.push(None, None, "`steps` must be an array"),
        None => errs.push(None, None, "missing field `steps`"),
    }

    // Dataflow: names must be bound before use and bound only once.
    let producer: BTreeMap<&str, usize> = steps
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.as_ref().map(|s| (s.out.as_str(), i)))
        .collect();
    let mut bound: BTreeSet<&str> = inputs.keys().map(String::as_str).collect();
    for (i, step) in steps.iter().enumerate() {
        let Some(step) = step else { continue };
        match schema(&step.op) {
            None => errs.push(Some(i), Some(&step.op), "unknown op"),
            Some(schema) => {
                if let Err(problems) = Op::parse(&step.op, &step.params) {
                    for p in problems {
                        errs.push(Some(i), Some(&step.op), p);
                    }
                }
                if step.inputs.len() != schema.inputs.len() {
                    let missing = schema.inputs.get(step.inputs.len());
                    let msg = match missing {
                        Some(slot) => format!(
                            "op takes {} input(s) {:?}; missing input `{slot}`",
                            schema.inputs.len(),
                            schema.inputs
                        ),
                        None => format!(
                            "op takes {} input(s) {:?}, got {}",
                            schema.inputs.len(),
                            schema.inputs,
                            step.inputs.len()
                        ),
                    };
                    errs.push(Some(i), Some(&step.op), msg);
                }
            }
        }
        for name in &step.inputs {
            if bound.contains(name.as_str()) {
                continue;
            }
            match producer.get(name.as_str()) {
                Some(&j) if j >= i => errs.push(
                    Some(i),
                    Some(name),
                    format!("cycle: consumed before it is produced by step {j}"),
                ),
                _ => errs.push(Some(i), Some(name), "undefined name"),
            }
        }
        if !bound.insert(step.out.as_str()) {
            errs.push(Some(i), Some(&step.out), "name is already bound");
        }
    }
    for name in outputs.keys() {
        if !producer.contains_key(name.as_str()) {
            errs.push(None, Some(name), "declared output is not produced by any step");
        }
    }

    if errs.0.is_empty() {
        Ok(PipelineSpec {
            version,
            inputs,
            steps: steps.into_iter().flatten().collect(),
            outputs,
        })
    } else {
        Err(ValidationErrors(errs.0))
    }
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<(), ValidationErrors> {
        validate_value(&self.to_value()).map(|_| ())
    }

    pub fn to_value(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                let inputs = match s.inputs.as_slice() {
                    [one] => Value::from(one.as_str()),
                    many => Value::from(many.to_vec()),
                };
                let mut m = Map::new();
                m.insert("op".into(), Value::from(s.op.as_str()));
                m.insert("params".into(), Value::Object(s.params.clone()));
                m.insert("in".into(), inputs);
                m.insert("out".into(), Value::from(s.out.as_str()));
                Value::Object(m)
            })
            .collect();
        let map = |m: &BTreeMap<String, String>| {
            Value::Object(m.iter().map(|(k, v)| (k.clone(), Value::from(v.as_str()))).collect())
        };
        let mut root = Map::new();
        root.insert("version".into(), Value::from(self.version));
        root.insert("inputs".into(), map(&self.inputs));
        root.insert("steps".into(), Value::Array(steps));
        root.insert("outputs".into(), map(&self.outputs));
        Value::Object(root)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("json values serialize")
    }
}
