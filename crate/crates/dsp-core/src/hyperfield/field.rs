//! The spatial power field: learned per-point powers IDW-interpolated over
//! space, plus the end-to-end differential prediction.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Point, Sample};
use crate::error::{Error, Result};
use crate::hyperfield::learn::PowerAssignment;
use crate::idw::{differential_idw_predict, idw_predict, IdwConfig};

/// A queryable power distribution. Serializes as the assignment plus the
/// exponent used to interpolate the powers themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PowerFieldRepr", into = "PowerFieldRepr")]
pub struct PowerField {
    assignment: PowerAssignment,
    field_power: f64,
    /// Support samples carrying powers as values; derived, not serialized.
    supports: Dataset,
}

#[derive(Serialize, Deserialize)]
struct PowerFieldRepr {
    #[serde(flatten)]
    assignment: PowerAssignment,
    field_power: f64,
}

impl TryFrom<PowerFieldRepr> for PowerField {
    type Error = Error;

    fn try_from(repr: PowerFieldRepr) -> Result<Self> {
        PowerField::new(repr.assignment, repr.field_power)
    }
}

impl From<PowerField> for PowerFieldRepr {
    fn from(f: PowerField) -> Self {
        PowerFieldRepr {
            assignment: f.assignment,
            field_power: f.field_power,
        }
    }
}

impl PowerField {
    pub fn new(assignment: PowerAssignment, field_power: f64) -> Result<Self> {
        IdwConfig::with_power(field_power).validate()?;
        if assignment.entries.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for e in &assignment.entries {
            if !(e.power >= assignment.p_min && e.power <= assignment.p_max) {
                return Err(Error::invalid_argument(format!(
                    "entry {} power {} outside [{}, {}]",
                    e.index, e.power, assignment.p_min, assignment.p_max
                )));
            }
        }
        let supports = Dataset::new(
            format!("{}-powers", assignment.dataset_name),
            assignment
                .entries
                .iter()
                .map(|e| Sample::new(e.x, e.y, e.power))
                .collect(),
        )?;
        Ok(PowerField {
            assignment,
            field_power,
            supports,
        })
    }

    pub fn assignment(&self) -> &PowerAssignment {
        &self.assignment
    }

    pub fn field_power(&self) -> f64 {
        self.field_power
    }

    pub fn dataset_name(&self) -> &str {
        &self.assignment.dataset_name
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Interpolates a learned assignment into a queryable field.
pub fn build_power_field(
    dataset: &Dataset,
    assignment: &PowerAssignment,
    field_power: f64,
) -> Result<PowerField> {
    assignment.check_covers(dataset)?;
    PowerField::new(assignment.clone(), field_power)
}

/// The power the field assigns to a location: classic IDW over the support
/// powers, exact at supports, clamped into the assignment's power range.
pub fn query_power(field: &PowerField, point: Point) -> Result<f64> {
    let cfg = IdwConfig::with_power(field.field_power);
    let p = idw_predict(&field.supports, point, &cfg)?;
    Ok(p.clamp(field.assignment.p_min, field.assignment.p_max))
}

/// End-to-end differential prediction: look up the query's power in the
/// field, then interpolate the training values with that power.
pub fn pipeline_predict(
    train: &Dataset,
    field: &PowerField,
    query: Point,
    cfg: &IdwConfig,
) -> Result<f64> {
    let p_q = query_power(field, query)?;
    differential_idw_predict(train, query, p_q, cfg)
}
