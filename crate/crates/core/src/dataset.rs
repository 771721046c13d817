//! Typed tabular records with per-attribute privacy classification.
//!
//! A [`Dataset`] is immutable after construction; every transformation
//! returns a new value, so datasets can be shared freely across threads.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrKind {
    Categorical,
    Integer,
    Continuous,
}

impl AttrKind {
    pub fn is_numeric(self) -> bool {
        matches!(self, AttrKind::Integer | AttrKind::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyClass {
    Insensitive,
    Sensitive,
    Identifying,
    QuasiIdentifying,
}

fn default_missing_token() -> String {
    "?".to_string()
}

fn default_privacy() -> PrivacyClass {
    PrivacyClass::Insensitive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttrKind,
    #[serde(default = "default_privacy")]
    pub privacy_class: PrivacyClass,
    #[serde(default = "default_missing_token")]
    pub missing_token: String,
}

impl AttributeSchema {
    pub fn new(name: &str, kind: AttrKind, privacy_class: PrivacyClass) -> Self {
        AttributeSchema {
            name: name.to_string(),
            kind,
            privacy_class,
            missing_token: default_missing_token(),
        }
    }
}

/// Options for CSV ingestion.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// When false, columns are taken in schema order (for headerless files).
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<AttributeSchema>,
    rows: Vec<Vec<String>>,
    target: String,
}

impl Dataset {
    /// Builds a dataset, validating the schema/row invariants: unique attribute
    /// names, the target exists, every row has one value per attribute, and
    /// numeric values parse (or equal the attribute's missing token).
    pub fn new(schema: Vec<AttributeSchema>, rows: Vec<Vec<String>>, target: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        for attr in &schema {
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate attribute name {:?}",
                    attr.name
                )));
            }
        }
        if !schema.iter().any(|a| a.name == target) {
            return Err(Error::Schema(format!(
                "target attribute {:?} not present in schema",
                target
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::RowArity {
                    line: i as u64 + 1,
                    expected: schema.len(),
                    found: row.len(),
                });
            }
            for (attr, value) in schema.iter().zip(row) {
                if attr.kind.is_numeric()
                    && value != &attr.missing_token
                    && value.parse::<f64>().is_err()
                {
                    return Err(Error::Schema(format!(
                        "attribute {:?} is numeric but row {} holds {:?}",
                        attr.name,
                        i + 1,
                        value
                    )));
                }
            }
        }
        Ok(Dataset {
            schema,
            rows,
            target: target.to_string(),
        })
    }

    /// Internal constructor for transformations that preserve the invariants.
    pub(crate) fn from_validated(
        schema: Vec<AttributeSchema>,
        rows: Vec<Vec<String>>,
        target: String,
    ) -> Self {
        Dataset {
            schema,
            rows,
            target,
        }
    }

    /// Loads a delimited file against a declared schema. With a header the
    /// columns are matched by name (order-insensitive); without one they are
    /// taken in schema order. Fields are trimmed, quoting follows RFC 4180.
    pub fn from_csv_path(
        path: impl AsRef<Path>,
        schema: Vec<AttributeSchema>,
        target: &str,
        options: &CsvOptions,
    ) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, schema, target, options)
    }

    pub fn from_csv_reader(
        reader: impl Read,
        schema: Vec<AttributeSchema>,
        target: &str,
        options: &CsvOptions,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(options.delimiter)
            .has_headers(options.has_header)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);

        // column i of the file -> position in the schema
        let column_map: Vec<usize> = if options.has_header {
            let headers = rdr.headers()?.clone();
            let mut map = Vec::with_capacity(headers.len());
            for name in headers.iter() {
                let idx = schema.iter().position(|a| a.name == name).ok_or_else(|| {
                    Error::Schema(format!("unknown column {:?} in header", name))
                })?;
                map.push(idx);
            }
            let mut covered: Vec<bool> = vec![false; schema.len()];
            for &idx in &map {
                if covered[idx] {
                    return Err(Error::Schema(format!(
                        "column {:?} appears twice in header",
                        schema[idx].name
                    )));
                }
                covered[idx] = true;
            }
            if let Some(missing) = covered.iter().position(|c| !c) {
                return Err(Error::Schema(format!(
                    "column {:?} missing from header",
                    schema[missing].name
                )));
            }
            map
        } else {
            (0..schema.len()).collect()
        };

        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() == 1 && record[0].is_empty() {
                continue; // skip blank lines
            }
            if record.len() != column_map.len() {
                let line = record.position().map(|p| p.line()).unwrap_or(0);
                return Err(Error::RowArity {
                    line,
                    expected: column_map.len(),
                    found: record.len(),
                });
            }
            let mut row = vec![String::new(); schema.len()];
            for (i, field) in record.iter().enumerate() {
                row[column_map[i]] = field.to_string();
            }
            rows.push(row);
        }
        Dataset::new(schema, rows, target)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(file);
        wtr.write_record(self.schema.iter().map(|a| a.name.as_str()))?;
        for row in &self.rows {
            wtr.write_record(row)?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.attr_index(&self.target).expect("target validated at construction")
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = &str> {
        self.rows.iter().map(move |r| r[index].as_str())
    }

    /// Attributes classified as quasi-identifying, in schema order.
    pub fn quasi_identifiers(&self) -> Vec<&AttributeSchema> {
        self.schema
            .iter()
            .filter(|a| a.privacy_class == PrivacyClass::QuasiIdentifying)
            .collect()
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().any(|row| {
            row.iter()
                .zip(&self.schema)
                .any(|(v, a)| v == &a.missing_token)
        })
    }

    /// Drops every row containing a missing value; relative order is kept.
    pub fn cleaned(&self) -> Dataset {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .filter(|row| {
                !row.iter()
                    .zip(&self.schema)
                    .any(|(v, a)| v == &a.missing_token)
            })
            .cloned()
            .collect();
        Dataset::from_validated(self.schema.clone(), rows, self.target.clone())
    }

    /// Replaces the numeric target with a pass/fail attribute: `pass` when the
    /// value is at least `threshold`, else `fail`. Missing values stay missing.
    pub fn binarized(&self, threshold: f64) -> Result<Dataset> {
        let ti = self.target_index();
        if !self.schema[ti].kind.is_numeric() {
            return Err(Error::InvalidArgument(format!(
                "target attribute {:?} is not numeric",
                self.target
            )));
        }
        let missing = self.schema[ti].missing_token.clone();
        let mut schema = self.schema.clone();
        schema[ti].kind = AttrKind::Categorical;
        let mut rows = self.rows.clone();
        for row in &mut rows {
            if row[ti] == missing {
                continue;
            }
            let value: f64 = row[ti]
                .parse()
                .expect("numeric pattern validated at construction");
            row[ti] = if value >= threshold { "pass" } else { "fail" }.to_string();
        }
        Ok(Dataset::from_validated(schema, rows, self.target.clone()))
    }

    /// Removes the named attributes. The target cannot be dropped.
    pub fn without_attributes(&self, names: &[String]) -> Result<Dataset> {
        for name in names {
            if name == &self.target {
                return Err(Error::Schema("cannot drop the target attribute".into()));
            }
            if self.attr_index(name).is_none() {
                return Err(Error::Schema(format!("cannot drop unknown attribute {:?}", name)));
            }
        }
        let keep: Vec<usize> = (0..self.schema.len())
            .filter(|&i| !names.iter().any(|n| n == &self.schema[i].name))
            .collect();
        let schema = keep.iter().map(|&i| self.schema[i].clone()).collect();
        let rows = self
            .rows
            .iter()
            .map(|row| keep.iter().map(|&i| row[i].clone()).collect())
            .collect();
        Ok(Dataset::from_validated(schema, rows, self.target.clone()))
    }

    /// Deterministic stratified train/test split. The test set holds
    /// `round(test_fraction * n)` rows, allocated per class by largest
    /// remainder; rows keep their original relative order within each part.
    pub fn stratified_split(&self, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test_fraction must be in (0, 1), got {test_fraction}"
            )));
        }
        let n = self.n();
        let test_total = (test_fraction * n as f64).round() as usize;
        if test_total == 0 || test_total >= n {
            return Err(Error::Stratification(format!(
                "test size {test_total} of {n} rows leaves an empty part"
            )));
        }

        let ti = self.target_index();
        let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            by_class.entry(row[ti].as_str()).or_default().push(i);
        }

        // floor allocation plus largest fractional remainders
        let mut alloc: Vec<(usize, f64)> = Vec::new(); // (floor, remainder) per class
        for indices in by_class.values() {
            let ideal = test_fraction * indices.len() as f64;
            alloc.push((ideal.floor() as usize, ideal - ideal.floor()));
        }
        let assigned: usize = alloc.iter().map(|(f, _)| f).sum();
        if assigned > test_total {
            return Err(Error::Stratification(
                "per-class allocation exceeds the requested test size".into(),
            ));
        }
        let mut order: Vec<usize> = (0..alloc.len()).collect();
        order.sort_by(|&a, &b| {
            alloc[b]
                .1
                .partial_cmp(&alloc[a].1)
                .expect("remainders are finite")
                .then(a.cmp(&b))
        });
        for &ci in order.iter().take(test_total - assigned) {
            alloc[ci].0 += 1;
        }

        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut test_idx = Vec::with_capacity(test_total);
        for ((_, indices), (take, _)) in by_class.iter().zip(&alloc) {
            if *take > indices.len() {
                return Err(Error::Stratification(format!(
                    "class with {} rows cannot supply {} test rows",
                    indices.len(),
                    take
                )));
            }
            let mut shuffled = indices.clone();
            shuffled.shuffle(&mut rng);
            test_idx.extend_from_slice(&shuffled[..*take]);
        }
        test_idx.sort_unstable();
        let in_test: HashSet<usize> = test_idx.iter().copied().collect();
        let train_rows: Vec<Vec<String>> = (0..n)
            .filter(|i| !in_test.contains(i))
            .map(|i| self.rows[i].clone())
            .collect();
        let test_rows: Vec<Vec<String>> = test_idx.iter().map(|&i| self.rows[i].clone()).collect();
        Ok((
            Dataset::from_validated(self.schema.clone(), train_rows, self.target.clone()),
            Dataset::from_validated(self.schema.clone(), test_rows, self.target.clone()),
        ))
    }
}
