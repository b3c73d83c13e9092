//! Experimental records and CSV ingestion.
//!
//! A [`Dataset`] holds one [`Unit`] per experimental record. The post-treatment
//! indicator `m` must be present for every treated unit but may be missing
//! for controls, which is the common situation when the indicator can only be
//! measured once treatment has been delivered. Missing values are encoded as
//! empty CSV cells.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Index into [`Dataset::block_labels`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub y: f64,
    pub treated: bool,
    /// Post-treatment indicator; `None` when unmeasured.
    pub m: Option<bool>,
    pub x: Vec<f64>,
    pub block: Option<BlockId>,
    pub weight: f64,
}

impl Unit {
    pub fn new(y: f64, treated: bool, m: Option<bool>) -> Self {
        Unit {
            y,
            treated,
            m,
            x: Vec::new(),
            block: None,
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_covariates(mut self, x: Vec<f64>) -> Self {
        self.x = x;
        self
    }

    pub fn with_block(mut self, block: BlockId) -> Self {
        self.block = Some(block);
        self
    }

    pub fn d(&self) -> u8 {
        u8::from(self.treated)
    }
}

/// Analyses with distinct data requirements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Analysis {
    NoAssumptionBounds,
    MtBounds,
    Sensitivity,
    Dim,
}

/// Validated, immutable collection of units.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    units: Vec<Unit>,
    covariate_names: Vec<String>,
    block_labels: Vec<String>,
    m_observed_in_control: bool,
}

impl Dataset {
    pub fn new(
        units: Vec<Unit>,
        covariate_names: Vec<String>,
        block_labels: Vec<String>,
    ) -> Result<Self> {
        for (i, u) in units.iter().enumerate() {
            if !u.y.is_finite() {
                return Err(Error::InvariantViolation(format!(
                    "unit {i}: y is not finite"
                )));
            }
            if !(u.weight.is_finite() && u.weight > 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "unit {i}: weight {} is not positive",
                    u.weight
                )));
            }
            if u.x.len() != covariate_names.len() {
                return Err(Error::InvariantViolation(format!(
                    "unit {i}: {} covariates, expected {}",
                    u.x.len(),
                    covariate_names.len()
                )));
            }
            if u.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvariantViolation(format!(
                    "unit {i}: covariate not finite"
                )));
            }
            if let Some(BlockId(b)) = u.block {
                if b as usize >= block_labels.len() {
                    return Err(Error::InvariantViolation(format!(
                        "unit {i}: block id {b} has no label"
                    )));
                }
            }
            if u.treated && u.m.is_none() {
                return Err(Error::InvariantViolation(format!(
                    "unit {i}: treated unit has no post-treatment indicator"
                )));
            }
        }
        Self::assemble(units, covariate_names, block_labels)
    }

    /// Builds a dataset from units already known to satisfy the per-unit
    /// invariants; only the arm-level checks are repeated.
    pub(crate) fn assemble(
        units: Vec<Unit>,
        covariate_names: Vec<String>,
        block_labels: Vec<String>,
    ) -> Result<Self> {
        let mut has = [false, false];
        let mut m_observed_in_control = true;
        for u in &units {
            has[u.d() as usize] = true;
            if !u.treated && u.m.is_none() {
                m_observed_in_control = false;
            }
        }
        if !has[1] {
            return Err(Error::EmptyArm(1));
        }
        if !has[0] {
            return Err(Error::EmptyArm(0));
        }
        Ok(Dataset {
            units,
            covariate_names,
            block_labels,
            m_observed_in_control,
        })
    }

    /// Dataset without covariates or blocks.
    pub fn from_units(units: Vec<Unit>) -> Result<Self> {
        Self::new(units, Vec::new(), Vec::new())
    }

    /// Dataset built from the units at `indices` (with repetition).
    pub(crate) fn select(&self, indices: &[usize]) -> Result<Self> {
        let units = indices.iter().map(|&i| self.units[i].clone()).collect();
        Self::assemble(
            units,
            self.covariate_names.clone(),
            self.block_labels.clone(),
        )
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn block_labels(&self) -> &[String] {
        &self.block_labels
    }

    pub fn block_label(&self, id: BlockId) -> &str {
        &self.block_labels[id.0 as usize]
    }

    pub fn m_observed_in_control(&self) -> bool {
        self.m_observed_in_control
    }

    pub fn arm(&self, treated: bool) -> impl Iterator<Item = &Unit> {
        self.units.iter().filter(move |u| u.treated == treated)
    }

    /// Units with `D = d` and `M = m`; units with missing `m` never match.
    pub fn cell(&self, treated: bool, m: bool) -> impl Iterator<Item = &Unit> {
        self.units
            .iter()
            .filter(move |u| u.treated == treated && u.m == Some(m))
    }

    /// Smallest and largest observed outcome.
    pub fn y_range(&self) -> (f64, f64) {
        self.units
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| {
                (lo.min(u.y), hi.max(u.y))
            })
    }
}

/// Checks the analysis-specific data requirements.
pub fn validate_for(ds: &Dataset, analysis: Analysis) -> Result<()> {
    match analysis {
        Analysis::NoAssumptionBounds | Analysis::Sensitivity => Ok(()),
        Analysis::MtBounds | Analysis::Dim => {
            if ds.m_observed_in_control() {
                Ok(())
            } else {
                Err(Error::RequirementUnmet {
                    analysis,
                    reason: "post-treatment indicator is not observed for every control unit"
                        .into(),
                })
            }
        }
    }
}

/// Mapping from dataset roles to CSV column names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub y: String,
    pub d: String,
    pub m: String,
    pub covariates: Vec<String>,
    pub block: Option<String>,
    pub weight: Option<String>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            y: "y".into(),
            d: "d".into(),
            m: "m".into(),
            covariates: Vec::new(),
            block: None,
            weight: None,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    read_csv(File::open(path)?, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let y_col = col(&schema.y)?;
    let d_col = col(&schema.d)?;
    let m_col = col(&schema.m)?;
    let x_cols = schema
        .covariates
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;
    let block_col = schema.block.as_deref().map(col).transpose()?;
    let weight_col = schema.weight.as_deref().map(col).transpose()?;

    let mut block_index: HashMap<String, u32> = HashMap::new();
    let mut block_labels = Vec::new();
    let mut units = Vec::new();

    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let field = |c: usize| record.get(c).unwrap_or("").trim();
        let parse_real = |c: usize, name: &str| -> Result<f64> {
            let raw = field(c);
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                message: format!("`{raw}` is not a number"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    row,
                    column: name.to_string(),
                    message: format!("`{raw}` is not finite"),
                })
            }
        };
        let parse_binary = |c: usize, name: &str| -> Result<bool> {
            let v = parse_real(c, name)?;
            if v == 0.0 {
                Ok(false)
            } else if v == 1.0 {
                Ok(true)
            } else {
                Err(Error::InvariantViolation(format!(
                    "row {row}: {name}={v} is not in {{0,1}}"
                )))
            }
        };

        let y = parse_real(y_col, &schema.y)?;
        let treated = parse_binary(d_col, &schema.d)?;
        let m = if field(m_col).is_empty() {
            None
        } else {
            Some(parse_binary(m_col, &schema.m)?)
        };
        if treated && m.is_none() {
            return Err(Error::InvariantViolation(format!(
                "row {row}: treated unit has an empty `{}`",
                schema.m
            )));
        }
        let x = x_cols
            .iter()
            .zip(&schema.covariates)
            .map(|(&c, name)| parse_real(c, name))
            .collect::<Result<Vec<_>>>()?;
        let block = match block_col {
            Some(c) if !field(c).is_empty() => {
                let label = field(c).to_string();
                let next = block_labels.len() as u32;
                let id = *block_index.entry(label.clone()).or_insert_with(|| {
                    block_labels.push(label);
                    next
                });
                Some(BlockId(id))
            }
            _ => None,
        };
        let weight = match weight_col {
            Some(c) if !field(c).is_empty() => {
                let name = schema.weight.as_deref().unwrap_or_default();
                let w = parse_real(c, name)?;
                if w <= 0.0 {
                    return Err(Error::InvariantViolation(format!(
                        "row {row}: weight {w} is not positive"
                    )));
                }
                w
            }
            _ => 1.0,
        };
        units.push(Unit {
            y,
            treated,
            m,
            x,
            block,
            weight,
        });
    }
    if units.is_empty() {
        return Err(Error::EmptyInput);
    }
    Dataset::new(units, schema.covariates.clone(), block_labels)
}

/// Schema matching the columns produced by [`write_csv`] for this dataset.
pub fn written_schema(ds: &Dataset) -> Schema {
    Schema {
        covariates: ds.covariate_names.clone(),
        block: (!ds.block_labels.is_empty()).then(|| "block".to_string()),
        weight: Some("weight".into()),
        ..Schema::default()
    }
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv_to(ds, file)
}

/// Writes `y,d,m[,covariates...][,block],weight`. Reals use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv_to<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let schema = written_schema(ds);
    let mut header = vec![schema.y.clone(), schema.d.clone(), schema.m.clone()];
    header.extend(schema.covariates.iter().cloned());
    if let Some(b) = &schema.block {
        header.push(b.clone());
    }
    header.push("weight".into());
    wtr.write_record(&header)?;

    for u in &ds.units {
        let mut rec = vec![
            u.y.to_string(),
            u.d().to_string(),
            u.m.map(|m| u8::from(m).to_string()).unwrap_or_default(),
        ];
        rec.extend(u.x.iter().map(f64::to_string));
        if schema.block.is_some() {
            rec.push(
                u.block
                    .map(|b| ds.block_label(b).to_string())
                    .unwrap_or_default(),
            );
        }
        rec.push(u.weight.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
