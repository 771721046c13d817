//! k-anonymisation via generalization and record suppression.
//!
//! The search walks the generalization lattice bottom-up in breadth-first
//! order. Satisfiability is monotone under coarsening, so every strict
//! successor of a satisfiable node is pruned: its generalization cost is
//! strictly higher and it can never win. Costs compare exactly — the
//! normalized level sum is kept as an integer over a common denominator.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttrKind, Dataset, PrivacyClass};
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, SUPPRESSED};

/// Hard cap on lattice size; beyond this the ladder set needs rethinking.
const MAX_LATTICE_NODES: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct AnonymizationConfig {
    pub k: u32,
    /// Fraction of records that may be suppressed instead of generalized.
    pub suppression_limit: f64,
    /// One ladder per quasi-identifier, keyed by its attribute name.
    pub hierarchies: Vec<Hierarchy>,
}

impl AnonymizationConfig {
    pub fn new(k: u32, suppression_limit: f64, hierarchies: Vec<Hierarchy>) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&suppression_limit) {
            return Err(Error::InvalidArgument(format!(
                "suppression limit must lie in [0, 1], got {suppression_limit}"
            )));
        }
        Ok(AnonymizationConfig {
            k,
            suppression_limit,
            hierarchies,
        })
    }

    fn hierarchy_for(&self, attribute: &str) -> Option<&Hierarchy> {
        self.hierarchies.iter().find(|h| h.attribute() == attribute)
    }
}

/// One generalization level per quasi-identifier, in dataset schema order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeNode(pub Vec<usize>);

impl LatticeNode {
    pub fn dominates(&self, other: &LatticeNode) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

#[derive(Debug, Clone)]
pub struct AnonymizationSolution {
    pub node: LatticeNode,
    /// Indices (into the input dataset) of suppressed rows, ascending.
    pub suppressed_rows: Vec<usize>,
    /// Generalized dataset: suppressed rows have `"*"` in every
    /// quasi-identifier cell, identifying attributes are blanked to `"*"`.
    pub output: Dataset,
    /// Share of `"*"` cells in the output.
    pub suppressed_cell_fraction: f64,
}

/// Sidecar describing a solution, written next to the anonymized CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub k: u32,
    pub quasi_identifiers: Vec<String>,
    pub node_levels: Vec<usize>,
    pub suppressed_records: usize,
    pub total_records: usize,
    pub suppressed_cell_fraction: f64,
}

impl AnonymizationSolution {
    pub fn summary(&self, config: &AnonymizationConfig, d: &Dataset) -> SolutionSummary {
        SolutionSummary {
            k: config.k,
            quasi_identifiers: d
                .quasi_identifiers()
                .iter()
                .map(|a| a.name.clone())
                .collect(),
            node_levels: self.node.0.clone(),
            suppressed_records: self.suppressed_rows.len(),
            total_records: d.n(),
            suppressed_cell_fraction: self.suppressed_cell_fraction,
        }
    }

    pub fn write_sidecar(
        &self,
        config: &AnonymizationConfig,
        d: &Dataset,
        path: impl AsRef<Path>,
    ) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(&self.summary(config, d))
            .expect("summary serializes");
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// Precomputed per-row value codes for every (quasi-identifier, level) pair.
struct QiCodes {
    /// Quasi-identifier schema indices, in schema order.
    attr_indices: Vec<usize>,
    /// Ladder depth per quasi-identifier.
    depths: Vec<usize>,
    /// `codes[qi][level][row]` = dense id of the generalized value.
    codes: Vec<Vec<Vec<u32>>>,
    /// `dims[qi][level]` = number of distinct values at that level.
    dims: Vec<Vec<u32>>,
}

impl QiCodes {
    fn build(d: &Dataset, config: &AnonymizationConfig) -> Result<Self> {
        let qi_attrs = d.quasi_identifiers();
        let mut attr_indices = Vec::with_capacity(qi_attrs.len());
        let mut depths = Vec::with_capacity(qi_attrs.len());
        let mut codes = Vec::with_capacity(qi_attrs.len());
        let mut dims = Vec::with_capacity(qi_attrs.len());
        for attr in &qi_attrs {
            let h = config.hierarchy_for(&attr.name).ok_or_else(|| {
                Error::Schema(format!("quasi-identifier {:?} has no hierarchy", attr.name))
            })?;
            let col = d.attr_index(&attr.name).expect("schema attribute");
            attr_indices.push(col);
            depths.push(h.levels());

            let mut value_to_row: HashMap<&str, usize> = HashMap::new();
            for (i, v) in h.domain().iter().enumerate() {
                value_to_row.insert(v.as_str(), i);
            }
            let mut raw_rows: Vec<usize> = Vec::with_capacity(d.n());
            for value in d.column(col) {
                let row = *value_to_row.get(value).ok_or_else(|| Error::Domain {
                    attribute: attr.name.clone(),
                    value: value.to_string(),
                })?;
                raw_rows.push(row);
            }

            let mut attr_codes = Vec::with_capacity(h.levels() + 1);
            let mut attr_dims = Vec::with_capacity(h.levels() + 1);
            for level in 0..=h.levels() {
                // domain-row -> dense id of the level value
                let mut id_of_value: HashMap<&str, u32> = HashMap::new();
                let mut domain_row_code: Vec<u32> = Vec::with_capacity(h.domain().len());
                for raw in h.domain() {
                    let v = h.generalize(raw, level)?;
                    let next = id_of_value.len() as u32;
                    let id = *id_of_value.entry(v).or_insert(next);
                    domain_row_code.push(id);
                }
                attr_dims.push(id_of_value.len() as u32);
                attr_codes.push(raw_rows.iter().map(|&r| domain_row_code[r]).collect());
            }
            codes.push(attr_codes);
            dims.push(attr_dims);
        }
        Ok(QiCodes {
            attr_indices,
            depths,
            codes,
            dims,
        })
    }

    /// Per-row class key plus the class sizes for a node. Keys pack the level
    /// value ids into a `u64` when they fit; wider tuples fall back to dense
    /// tuple ids.
    fn class_sizes(&self, n: usize, node: &LatticeNode) -> (Vec<u64>, HashMap<u64, u32>) {
        let mut bits_total = 0u32;
        let mut fits = true;
        for (qi, &level) in node.0.iter().enumerate() {
            let dim = self.dims[qi][level].max(1);
            let bits = (32 - (dim - 1).leading_zeros()).max(1);
            bits_total += bits;
            if bits_total > 64 {
                fits = false;
                break;
            }
        }
        let keys: Vec<u64> = if fits {
            let mut keys = vec![0u64; n];
            let mut shift = 0u32;
            for (qi, &level) in node.0.iter().enumerate() {
                let dim = self.dims[qi][level].max(1);
                let bits = (32 - (dim - 1).leading_zeros()).max(1);
                let column = &self.codes[qi][level];
                for (key, &code) in keys.iter_mut().zip(column) {
                    *key |= u64::from(code) << shift;
                }
                shift += bits;
            }
            keys
        } else {
            let mut tuple_ids: HashMap<Vec<u32>, u64> = HashMap::new();
            let mut keys = vec![0u64; n];
            for (row, key) in keys.iter_mut().enumerate() {
                let tuple: Vec<u32> = node
                    .0
                    .iter()
                    .enumerate()
                    .map(|(qi, &level)| self.codes[qi][level][row])
                    .collect();
                let next = tuple_ids.len() as u64;
                *key = *tuple_ids.entry(tuple).or_insert(next);
            }
            keys
        };
        let mut counts: HashMap<u64, u32> = HashMap::with_capacity(n / 2 + 1);
        for &key in &keys {
            *counts.entry(key).or_insert(0) += 1;
        }
        (keys, counts)
    }

    /// Rows in equivalence classes smaller than k.
    fn min_suppression(&self, n: usize, node: &LatticeNode, k: u32) -> usize {
        let (_, counts) = self.class_sizes(n, node);
        counts
            .values()
            .filter(|&&c| c < k)
            .map(|&c| c as usize)
            .sum()
    }
}

fn validate_input(d: &Dataset, config: &AnonymizationConfig) -> Result<()> {
    if d.has_missing() {
        return Err(Error::InvalidArgument(
            "dataset must be cleaned before anonymization".into(),
        ));
    }
    for h in &config.hierarchies {
        let idx = d.attr_index(h.attribute()).ok_or_else(|| {
            Error::Schema(format!(
                "hierarchy {:?} does not match any attribute",
                h.attribute()
            ))
        })?;
        if d.schema()[idx].privacy_class != PrivacyClass::QuasiIdentifying {
            return Err(Error::Schema(format!(
                "hierarchy given for {:?}, which is not quasi-identifying",
                h.attribute()
            )));
        }
    }
    Ok(())
}

fn check_node(node: &LatticeNode, depths: &[usize]) -> Result<()> {
    if node.0.len() != depths.len() {
        return Err(Error::Shape(format!(
            "node has {} components for {} quasi-identifiers",
            node.0.len(),
            depths.len()
        )));
    }
    for (&level, &max) in node.0.iter().zip(depths) {
        if level > max {
            return Err(Error::LevelRange { level, max });
        }
    }
    Ok(())
}

/// Partition of all rows by their generalized quasi-identifier tuple, in
/// first-occurrence order.
pub fn equivalence_classes(
    d: &Dataset,
    config: &AnonymizationConfig,
    node: &LatticeNode,
) -> Result<Vec<(Vec<String>, Vec<usize>)>> {
    validate_input(d, config)?;
    let qc = QiCodes::build(d, config)?;
    check_node(node, &qc.depths)?;
    let mut slots: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut classes: Vec<(Vec<String>, Vec<usize>)> = Vec::new();
    for row in 0..d.n() {
        let tuple: Vec<u32> = node
            .0
            .iter()
            .enumerate()
            .map(|(qi, &level)| qc.codes[qi][level][row])
            .collect();
        match slots.get(&tuple) {
            Some(&slot) => classes[slot].1.push(row),
            None => {
                let key = qc
                    .attr_indices
                    .iter()
                    .enumerate()
                    .map(|(qi, &col)| {
                        let h = config
                            .hierarchy_for(&d.schema()[col].name)
                            .expect("validated");
                        h.generalize(&d.rows()[row][col], node.0[qi])
                            .expect("validated")
                            .to_string()
                    })
                    .collect();
                slots.insert(tuple, classes.len());
                classes.push((key, vec![row]));
            }
        }
    }
    Ok(classes)
}

/// Whether a node can satisfy k-anonymity under the suppression budget, and
/// how many rows would have to be suppressed for it.
pub fn is_k_anonymous(
    d: &Dataset,
    config: &AnonymizationConfig,
    node: &LatticeNode,
) -> Result<(bool, usize)> {
    validate_input(d, config)?;
    let qc = QiCodes::build(d, config)?;
    check_node(node, &qc.depths)?;
    let min_supp = qc.min_suppression(d.n(), node, config.k);
    let satisfiable = min_supp as f64 <= config.suppression_limit * d.n() as f64;
    Ok((satisfiable, min_supp))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Exact cost key: normalized level sum as an integer over the common
/// denominator, then suppressed-row count, then the level vector itself.
fn cost_key(
    node: &[usize],
    depths: &[usize],
    denom: u64,
    suppressed: usize,
) -> (u64, usize, Vec<usize>) {
    let mut num = 0u64;
    for (&l, &depth) in node.iter().zip(depths) {
        if depth > 0 {
            num += l as u64 * (denom / depth as u64);
        }
    }
    (num, suppressed, node.to_vec())
}

/// All lattice nodes in breadth-first order: by level sum, then
/// lexicographically.
fn enumerate_nodes(depths: &[usize]) -> Result<Vec<Vec<usize>>> {
    let size = depths
        .iter()
        .map(|&l| l + 1)
        .try_fold(1usize, |acc, s| acc.checked_mul(s))
        .filter(|&s| s <= MAX_LATTICE_NODES)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "generalization lattice exceeds {MAX_LATTICE_NODES} nodes"
            ))
        })?;
    let mut nodes = Vec::with_capacity(size);
    let mut current = vec![0usize; depths.len()];
    'odometer: loop {
        nodes.push(current.clone());
        for i in (0..depths.len()).rev() {
            if current[i] < depths[i] {
                current[i] += 1;
                for later in current.iter_mut().skip(i + 1) {
                    *later = 0;
                }
                continue 'odometer;
            }
        }
        break;
    }
    nodes.sort_by(|a, b| {
        let sa: usize = a.iter().sum();
        let sb: usize = b.iter().sum();
        sa.cmp(&sb).then_with(|| a.cmp(b))
    });
    Ok(nodes)
}

/// Finds the cheapest satisfiable lattice node and materializes the
/// generalized, suppressed output dataset.
pub fn anonymize(d: &Dataset, config: &AnonymizationConfig) -> Result<AnonymizationSolution> {
    validate_input(d, config)?;
    if (d.n() as u64) < u64::from(config.k) {
        return Err(Error::Infeasible {
            n: d.n(),
            k: config.k,
        });
    }
    let qc = QiCodes::build(d, config)?;
    let nodes = enumerate_nodes(&qc.depths)?;
    let denom = qc
        .depths
        .iter()
        .filter(|&&l| l > 0)
        .fold(1u64, |acc, &l| lcm(acc, l as u64));

    let budget = config.suppression_limit * d.n() as f64;
    let mut satisfiable_minimal: Vec<Vec<usize>> = Vec::new();
    let mut best: Option<((u64, usize, Vec<usize>), Vec<usize>)> = None;

    for levels in &nodes {
        if satisfiable_minimal
            .iter()
            .any(|min| levels.iter().zip(min).all(|(l, m)| l >= m))
        {
            continue; // dominated: strictly costlier than a satisfiable node
        }
        let node = LatticeNode(levels.clone());
        let min_supp = qc.min_suppression(d.n(), &node, config.k);
        if min_supp as f64 <= budget {
            satisfiable_minimal.push(levels.clone());
            let key = cost_key(levels, &qc.depths, denom, min_supp);
            if best.as_ref().map_or(true, |(b, _)| key < *b) {
                best = Some((key, levels.clone()));
            }
        }
    }

    let (_, best_levels) = best.ok_or(Error::Infeasible {
        n: d.n(),
        k: config.k,
    })?;
    let node = LatticeNode(best_levels);

    let (keys, counts) = qc.class_sizes(d.n(), &node);
    let suppressed_rows: Vec<usize> = (0..d.n())
        .filter(|&row| counts[&keys[row]] < config.k)
        .collect();

    let output = materialize(d, config, &qc, &node, &suppressed_rows)?;
    let fraction = star_fraction(&output);
    Ok(AnonymizationSolution {
        node,
        suppressed_rows,
        output,
        suppressed_cell_fraction: fraction,
    })
}

/// Applies a node's generalization levels without suppressing any record.
/// Used to transform evaluation data the same way a solution's training data
/// was transformed.
pub fn apply_node(
    d: &Dataset,
    config: &AnonymizationConfig,
    node: &LatticeNode,
) -> Result<Dataset> {
    validate_input(d, config)?;
    let qc = QiCodes::build(d, config)?;
    check_node(node, &qc.depths)?;
    materialize(d, config, &qc, node, &[])
}

fn materialize(
    d: &Dataset,
    config: &AnonymizationConfig,
    qc: &QiCodes,
    node: &LatticeNode,
    suppressed_rows: &[usize],
) -> Result<Dataset> {
    let mut schema = d.schema().to_vec();
    for attr in &mut schema {
        if matches!(
            attr.privacy_class,
            PrivacyClass::QuasiIdentifying | PrivacyClass::Identifying
        ) {
            // generalized values are interval strings; keep them categorical
            attr.kind = AttrKind::Categorical;
        }
    }
    let suppressed: HashSet<usize> = suppressed_rows.iter().copied().collect();
    let mut rows = d.rows().to_vec();
    for (qi, &col) in qc.attr_indices.iter().enumerate() {
        let h = config
            .hierarchy_for(&d.schema()[col].name)
            .expect("validated");
        let level = node.0[qi];
        for (i, row) in rows.iter_mut().enumerate() {
            row[col] = if suppressed.contains(&i) {
                SUPPRESSED.to_string()
            } else {
                h.generalize(&row[col], level)?.to_string()
            };
        }
    }
    for (col, attr) in d.schema().iter().enumerate() {
        if attr.privacy_class == PrivacyClass::Identifying {
            for row in rows.iter_mut() {
                row[col] = SUPPRESSED.to_string();
            }
        }
    }
    Ok(Dataset::from_validated(schema, rows, d.target().to_string()))
}

fn star_fraction(output: &Dataset) -> f64 {
    let cells = output.n() * output.schema().len();
    if cells == 0 {
        return 0.0;
    }
    let stars: usize = output
        .rows()
        .iter()
        .map(|row| row.iter().filter(|v| v.as_str() == SUPPRESSED).count())
        .sum();
    stars as f64 / cells as f64
}

/// Suppressed cells (record suppression, full-level generalization, blanked
/// identifying attributes) over total cells of the solution's output.
pub fn suppressed_cell_fraction(solution: &AnonymizationSolution, _d: &Dataset) -> f64 {
    star_fraction(&solution.output)
}
