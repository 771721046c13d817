//! Per-attribute generalization ladders.
//!
//! A ladder maps every raw value through increasingly coarse levels, ending in
//! full suppression `"*"`. Partitions may only merge going up (coarsening), a
//! property the loader verifies and the interval builder guarantees by
//! construction.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};

pub const SUPPRESSED: &str = "*";

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    attribute: String,
    domain: Vec<String>,
    index: HashMap<String, usize>,
    /// `table[row][level]`, with `table[row][0] == domain[row]`.
    table: Vec<Vec<String>>,
    levels: usize,
}

impl Hierarchy {
    /// Builds a ladder from rows of `L + 1` columns. Level 0 is the raw value;
    /// for `L >= 1` the last column must be `"*"` for every row.
    pub fn from_rows(attribute: &str, rows: Vec<Vec<String>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Hierarchy(format!(
                "hierarchy for {attribute:?} has no rows"
            )));
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(Error::Hierarchy(format!(
                "hierarchy for {attribute:?} has empty rows"
            )));
        }
        let levels = width - 1;
        let mut table: Vec<Vec<String>> = Vec::with_capacity(rows.len());
        let mut index = HashMap::new();
        for row in rows {
            if row.len() != width {
                return Err(Error::Hierarchy(format!(
                    "hierarchy for {attribute:?} mixes row widths ({} vs {width})",
                    row.len()
                )));
            }
            match index.get(&row[0]) {
                Some(&prev) if table[prev] != row => {
                    return Err(Error::Hierarchy(format!(
                        "raw value {:?} appears with conflicting generalizations",
                        row[0]
                    )));
                }
                Some(_) => continue, // exact duplicate row
                None => {
                    index.insert(row[0].clone(), table.len());
                    table.push(row);
                }
            }
        }
        if levels >= 1 {
            for row in &table {
                if row[levels] != SUPPRESSED {
                    return Err(Error::Hierarchy(format!(
                        "top level of {attribute:?} must be {SUPPRESSED:?}, found {:?}",
                        row[levels]
                    )));
                }
            }
        }
        // coarsening: equal values at level l must stay equal at level l + 1
        for l in 0..levels {
            let mut next_of: HashMap<&str, &str> = HashMap::new();
            for row in &table {
                match next_of.get(row[l].as_str()) {
                    Some(&next) if next != row[l + 1] => {
                        return Err(Error::Hierarchy(format!(
                            "{:?} splits between levels {} and {} ({:?} vs {:?})",
                            row[l],
                            l,
                            l + 1,
                            next,
                            row[l + 1]
                        )));
                    }
                    Some(_) => {}
                    None => {
                        next_of.insert(&row[l], &row[l + 1]);
                    }
                }
            }
        }
        let domain = table.iter().map(|r| r[0].clone()).collect();
        Ok(Hierarchy {
            attribute: attribute.to_string(),
            domain,
            index,
            table,
            levels,
        })
    }

    /// Reads a `;`-separated ladder file, one row per raw value, columns =
    /// levels. The attribute name defaults to the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let attribute = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(b';')
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(file);
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            rows.push(record.iter().map(|s| s.to_string()).collect());
        }
        Hierarchy::from_rows(&attribute, rows)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut wtr = csv::WriterBuilder::new().delimiter(b';').from_writer(file);
        for row in &self.table {
            wtr.write_record(row)?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn with_attribute(mut self, name: &str) -> Self {
        self.attribute = name.to_string();
        self
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    /// Number of generalization steps `L`; the ladder has `L + 1` levels, with
    /// level 0 the identity.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn contains(&self, value: &str) -> bool {
        self.index.contains_key(value)
    }

    pub fn generalize(&self, value: &str, level: usize) -> Result<&str> {
        if level > self.levels {
            return Err(Error::LevelRange {
                level,
                max: self.levels,
            });
        }
        let row = self.index.get(value).ok_or_else(|| Error::Domain {
            attribute: self.attribute.clone(),
            value: value.to_string(),
        })?;
        Ok(&self.table[*row][level])
    }

    /// Distinct values reachable at a level, in domain order.
    pub fn level_values(&self, level: usize) -> Result<Vec<&str>> {
        if level > self.levels {
            return Err(Error::LevelRange {
                level,
                max: self.levels,
            });
        }
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for row in &self.table {
            if seen.insert(row[level].as_str(), ()).is_none() {
                out.push(row[level].as_str());
            }
        }
        Ok(out)
    }

    /// Builds an interval ladder for numeric raw values. Level 1 bins values
    /// into zero-aligned half-open bins of `widths[0]`; each further level
    /// re-bins the previous level's lower bounds, so partitions always nest
    /// even for non-multiple widths. The top level is `"*"`. Empty `widths`
    /// yields the minimal `{identity, "*"}` ladder.
    pub fn intervals(attribute: &str, values: &[String], widths: &[f64]) -> Result<Self> {
        for w in widths {
            if !(*w > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "interval widths must be positive, got {w}"
                )));
            }
        }
        if widths.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidArgument(
                "interval widths must be strictly increasing".into(),
            ));
        }
        let mut parsed: Vec<(f64, &String)> = Vec::with_capacity(values.len());
        for v in values {
            let x: f64 = v.parse().map_err(|_| Error::Domain {
                attribute: attribute.to_string(),
                value: v.clone(),
            })?;
            parsed.push((x, v));
        }
        parsed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        parsed.dedup_by(|a, b| a.1 == b.1);

        let mut rows = Vec::with_capacity(parsed.len());
        for (x, raw) in parsed {
            let mut row = Vec::with_capacity(widths.len() + 2);
            row.push(raw.clone());
            let mut lo = x;
            for &w in widths {
                lo = (lo / w).floor() * w;
                row.push(format!("[{},{})", fmt_num(lo), fmt_num(lo + w)));
            }
            row.push(SUPPRESSED.to_string());
            rows.push(row);
        }
        Hierarchy::from_rows(attribute, rows)
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
