//! JSON instance files, schema version "1".
//!
//! Two kinds share one reader: `{"kind": "multiscale", ...}` carries the
//! canonical two-level form, `{"kind": "capacity", ...}` the named
//! capacity-expansion parameters. Numbers round-trip bit-exactly (shortest
//! decimal that reparses to the same double); sparse row coefficients are
//! maps from variable index to value, serialized in index order so output is
//! deterministic.
//!
//! The multiscale schema fixes all variables at lower bound zero; only
//! finite upper bounds on `x` are representable (`"x_upper"`, with `null`
//! for unbounded entries). Writing an instance that uses other bounds fails
//! rather than silently dropping them.

use crate::lp::{Bounds, Row, RowSense};
use crate::model::{
    lower_capacity, CapacityInstance, ModelError, MultiScaleInstance, Subperiod, SubperiodRow,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema_version {found:?} not supported; this reader expects {SCHEMA_VERSION:?}")]
    SchemaVersionMismatch { found: String },
    #[error("not representable in schema version 1: {0}")]
    Unrepresentable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// An instance file's payload.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    MultiScale(MultiScaleInstance),
    Capacity(CapacityInstance),
}

impl Instance {
    /// The canonical two-level form (capacity instances are lowered).
    pub fn into_multiscale(self) -> Result<MultiScaleInstance, ModelError> {
        match self {
            Instance::MultiScale(inst) => Ok(inst),
            Instance::Capacity(cap) => lower_capacity(&cap),
        }
    }

    pub fn as_capacity(&self) -> Option<&CapacityInstance> {
        match self {
            Instance::Capacity(cap) => Some(cap),
            Instance::MultiScale(_) => None,
        }
    }
}

type CoeffMap = BTreeMap<usize, f64>;

#[derive(Serialize, Deserialize)]
struct RowSchema {
    coeffs: CoeffMap,
    sense: RowSense,
    rhs: f64,
}

#[derive(Serialize, Deserialize)]
struct FirstStageSchema {
    c: Vec<f64>,
    rows: Vec<RowSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_upper: Option<Vec<Option<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct SubperiodRowSchema {
    x_coeffs: CoeffMap,
    y_coeffs: CoeffMap,
    sense: RowSense,
    rhs: f64,
}

#[derive(Serialize, Deserialize)]
struct SubperiodSchema {
    weight: f64,
    q: Vec<f64>,
    rows: Vec<SubperiodRowSchema>,
}

// The two file kinds are separate structs dispatched on a "kind" probe; an
// internally tagged enum would break serde_json's integer map keys.
#[derive(Serialize, Deserialize)]
struct MultiscaleFile {
    kind: String,
    schema_version: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    description: String,
    first_stage: FirstStageSchema,
    subperiods: Vec<SubperiodSchema>,
}

#[derive(Serialize, Deserialize)]
struct CapacityFile {
    kind: String,
    schema_version: String,
    #[serde(rename = "J")]
    generators: usize,
    #[serde(rename = "I")]
    parts_per_day: usize,
    #[serde(rename = "S")]
    days: usize,
    a: Vec<Vec<Vec<f64>>>,
    c: Vec<f64>,
    d: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
    g: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_max: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct KindProbe {
    kind: String,
}

fn to_coeff_map(coeffs: &[(usize, f64)]) -> CoeffMap {
    let mut map = CoeffMap::new();
    for &(j, a) in coeffs {
        *map.entry(j).or_insert(0.0) += a;
    }
    map
}

fn from_coeff_map(map: &CoeffMap) -> Vec<(usize, f64)> {
    map.iter().map(|(&j, &a)| (j, a)).collect()
}

fn check_nonnegative_bounds(bounds: &[Bounds], what: &str) -> Result<(), IoError> {
    for (j, b) in bounds.iter().enumerate() {
        if b.lower != 0.0 {
            return Err(IoError::Unrepresentable(format!(
                "{what}[{j}] has lower bound {}; the schema fixes lower bounds at 0",
                b.lower
            )));
        }
    }
    Ok(())
}

fn check_version(found: &str) -> Result<(), IoError> {
    if found != SCHEMA_VERSION {
        return Err(IoError::SchemaVersionMismatch {
            found: found.to_string(),
        });
    }
    Ok(())
}

/// Serializes an instance to its canonical JSON text (pretty-printed,
/// newline-terminated, deterministic).
pub fn instance_to_json(inst: &Instance) -> Result<String, IoError> {
    let mut text = match inst {
        Instance::MultiScale(inst) => {
            check_nonnegative_bounds(&inst.x_bounds, "x")?;
            let x_upper = if inst.x_bounds.iter().any(|b| b.upper.is_finite()) {
                Some(
                    inst.x_bounds
                        .iter()
                        .map(|b| b.upper.is_finite().then_some(b.upper))
                        .collect(),
                )
            } else {
                None
            };
            let mut subperiods = Vec::with_capacity(inst.subperiods.len());
            for (s, sp) in inst.subperiods.iter().enumerate() {
                check_nonnegative_bounds(&sp.y_bounds, &format!("subperiod {s} y"))?;
                if let Some(k) = sp.y_bounds.iter().position(|b| b.upper.is_finite()) {
                    return Err(IoError::Unrepresentable(format!(
                        "subperiod {s} y[{k}] has a finite upper bound"
                    )));
                }
                subperiods.push(SubperiodSchema {
                    weight: sp.weight,
                    q: sp.costs.clone(),
                    rows: sp
                        .rows
                        .iter()
                        .map(|r| SubperiodRowSchema {
                            x_coeffs: to_coeff_map(&r.x_coeffs),
                            y_coeffs: to_coeff_map(&r.y_coeffs),
                            sense: r.sense,
                            rhs: r.rhs,
                        })
                        .collect(),
                });
            }
            let file = MultiscaleFile {
                kind: "multiscale".to_string(),
                schema_version: SCHEMA_VERSION.to_string(),
                name: inst.name.clone(),
                description: inst.description.clone(),
                first_stage: FirstStageSchema {
                    c: inst.first_stage_costs.clone(),
                    rows: inst
                        .first_stage_rows
                        .iter()
                        .map(|r| RowSchema {
                            coeffs: to_coeff_map(&r.coeffs),
                            sense: r.sense,
                            rhs: r.rhs,
                        })
                        .collect(),
                    x_upper,
                },
                subperiods,
            };
            serde_json::to_string_pretty(&file).expect("schema serializes")
        }
        Instance::Capacity(cap) => {
            let file = CapacityFile {
                kind: "capacity".to_string(),
                schema_version: SCHEMA_VERSION.to_string(),
                generators: cap.generators,
                parts_per_day: cap.parts_per_day,
                days: cap.days,
                a: cap.availability.clone(),
                c: cap.fixed_cost.clone(),
                d: cap.demand.clone(),
                f: cap.op_cost.clone(),
                g: cap.purchase_cost.clone(),
                x_max: cap.capacity_limit.clone(),
            };
            serde_json::to_string_pretty(&file).expect("schema serializes")
        }
    };
    text.push('\n');
    Ok(text)
}

/// Parses an instance from JSON text, dispatching on its `"kind"` field.
pub fn instance_from_json(text: &str) -> Result<Instance, IoError> {
    let probe: KindProbe =
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    match probe.kind.as_str() {
        "multiscale" => {
            let file: MultiscaleFile =
                serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
            check_version(&file.schema_version)?;
            let n_x = file.first_stage.c.len();
            let x_bounds = match &file.first_stage.x_upper {
                Some(uppers) => uppers
                    .iter()
                    .map(|u| Bounds::range(0.0, u.unwrap_or(f64::INFINITY)))
                    .collect(),
                None => vec![Bounds::NONNEGATIVE; n_x],
            };
            let inst = MultiScaleInstance {
                name: file.name,
                description: file.description,
                first_stage_costs: file.first_stage.c,
                first_stage_rows: file
                    .first_stage
                    .rows
                    .iter()
                    .map(|r| Row::new(from_coeff_map(&r.coeffs), r.sense, r.rhs))
                    .collect(),
                x_bounds,
                subperiods: file
                    .subperiods
                    .into_iter()
                    .map(|sp| {
                        let n_y = sp.q.len();
                        Subperiod {
                            weight: sp.weight,
                            costs: sp.q,
                            rows: sp
                                .rows
                                .iter()
                                .map(|r| SubperiodRow {
                                    x_coeffs: from_coeff_map(&r.x_coeffs),
                                    y_coeffs: from_coeff_map(&r.y_coeffs),
                                    sense: r.sense,
                                    rhs: r.rhs,
                                })
                                .collect(),
                            y_bounds: vec![Bounds::NONNEGATIVE; n_y],
                        }
                    })
                    .collect(),
            };
            inst.validate()?;
            Ok(Instance::MultiScale(inst))
        }
        "capacity" => {
            let file: CapacityFile =
                serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
            check_version(&file.schema_version)?;
            let cap = CapacityInstance {
                generators: file.generators,
                parts_per_day: file.parts_per_day,
                days: file.days,
                availability: file.a,
                fixed_cost: file.c,
                demand: file.d,
                op_cost: file.f,
                purchase_cost: file.g,
                capacity_limit: file.x_max,
            };
            cap.validate()?;
            Ok(Instance::Capacity(cap))
        }
        other => Err(IoError::Parse(format!(
            "unknown instance kind {other:?}; expected \"multiscale\" or \"capacity\""
        ))),
    }
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), IoError> {
    std::fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}
