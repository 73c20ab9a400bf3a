//! Planner runtime targets, labels, selection and splits.
//!
//! Labels mark a planner as failing (1) when its runtime exceeds the
//! timeout; a selected planner counts as solving a task only when its
//! runtime is strictly below the timeout.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NUM_PLANNERS: usize = 17;
pub const DEFAULT_TIMEOUT: f64 = 1800.0;
/// Runtime recorded for a planner that failed or timed out.
pub const CENSORED_VALUE: f64 = 10000.0;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub String);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TaskId {
    fn from(s: &str) -> Self {
        TaskId(s.to_string())
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Schema { line: u64, message: String },
    #[error("line {line}: task `{task}` column p{planner}: runtime {value} outside [0, {CENSORED_VALUE}]")]
    Range {
        line: u64,
        task: TaskId,
        planner: usize,
        value: f64,
    },
    #[error("expected {NUM_PLANNERS} probabilities, got {0}")]
    Dimension(usize),
    #[error("probability {index} is not finite")]
    NonFinite { index: usize },
    #[error("no prediction for test task `{0}`")]
    MissingPrediction(TaskId),
    #[error("the test set is empty")]
    EmptyTestSet,
    #[error("infeasible ratio: {0}")]
    InfeasibleRatio(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskRow {
    pub id: TaskId,
    pub domain: String,
    pub runtimes: [f64; NUM_PLANNERS],
}

impl TaskRow {
    pub fn solvable(&self, timeout: f64) -> bool {
        self.runtimes.iter().any(|&r| r < timeout)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetTable {
    rows: Vec<TaskRow>,
    pub timeout: f64,
}

fn planner_header() -> impl Iterator<Item = String> {
    (1..=NUM_PLANNERS).map(|j| format!("p{j}"))
}

fn check_header(headers: &csv::StringRecord, first: &[&str]) -> Result<(), DatasetError> {
    let expected: Vec<String> = first.iter().map(|s| s.to_string()).chain(planner_header()).collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(DatasetError::Schema {
            line: 1,
            message: format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_row_values(record: &csv::StringRecord, skip: usize, line: u64) -> Result<[f64; NUM_PLANNERS], DatasetError> {
    if record.len() != skip + NUM_PLANNERS {
        return Err(DatasetError::Schema {
            line,
            message: format!("expected {} columns, got {}", skip + NUM_PLANNERS, record.len()),
        });
    }
    let mut out = [0.0; NUM_PLANNERS];
    for (j, field) in record.iter().skip(skip).enumerate() {
        out[j] = field.trim().parse().map_err(|_| DatasetError::Schema {
            line,
            message: format!("column p{}: `{field}` is not a number", j + 1),
        })?;
    }
    Ok(out)
}

fn check_range(row: &TaskRow, line: u64) -> Result<(), DatasetError> {
    match row.runtimes.iter().position(|v| !(0.0..=CENSORED_VALUE).contains(v)) {
        Some(j) => Err(DatasetError::Range {
            line,
            task: row.id.clone(),
            planner: j + 1,
            value: row.runtimes[j],
        }),
        None => Ok(()),
    }
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().flexible(true).from_reader(r)
}

impl TargetTable {
    /// Validates and builds a table from rows.
    pub fn new(rows: Vec<TaskRow>, timeout: f64) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for (i, row) in rows.iter().enumerate() {
            let line = i as u64 + 2;
            if !seen.insert(&row.id) {
                return Err(DatasetError::Schema {
                    line,
                    message: format!("duplicate task id `{}`", row.id),
                });
            }
            check_range(row, line)?;
        }
        Ok(TargetTable { rows, timeout })
    }

    pub fn rows(&self) -> &[TaskRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, id: &TaskId) -> Option<&TaskRow> {
        self.rows.iter().find(|r| &r.id == id)
    }

    fn index(&self) -> HashMap<&TaskId, &TaskRow> {
        self.rows.iter().map(|r| (&r.id, r)).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(
            ["task_id".to_string(), "domain".to_string()]
                .into_iter()
                .chain(planner_header()),
        )?;
        for r in &self.rows {
            w.write_record(
                [r.id.0.clone(), r.domain.clone()]
                    .into_iter()
                    .chain(r.runtimes.iter().map(f64::to_string)),
            )?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Reads `task_id,domain,p1..p17`.
pub fn load_targets<R: Read>(input: R, timeout: f64) -> Result<TargetTable, DatasetError> {
    let mut rdr = csv_reader(input);
    check_header(rdr.headers()?, &["task_id", "domain"])?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let runtimes = parse_row_values(&rec, 2, line)?;
        let row = TaskRow {
            id: TaskId(rec[0].to_string()),
            domain: rec[1].to_string(),
            runtimes,
        };
        check_range(&row, line)?;
        rows.push(row);
    }
    TargetTable::new(rows, timeout)
}

pub type LabelRow = [u8; NUM_PLANNERS];

/// 0 where the runtime is at most the timeout, 1 otherwise.
pub fn binarize(t: &TargetTable) -> Vec<LabelRow> {
    t.rows
        .iter()
        .map(|r| r.runtimes.map(|v| u8::from(v > t.timeout)))
        .collect()
}

/// `task_id,p1..p17` with 0/1 entries.
pub fn write_labels_csv<W: Write>(t: &TargetTable, out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("task_id".to_string()).chain(planner_header()))?;
    for (row, labels) in t.rows.iter().zip(binarize(t)) {
        w.write_record(std::iter::once(row.id.0.clone()).chain(labels.iter().map(u8::to_string)))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Index of the smallest failure probability; ties go to the lowest index.
pub fn select_planner(probabilities: &[f64]) -> Result<usize, DatasetError> {
    if probabilities.len() != NUM_PLANNERS {
        return Err(DatasetError::Dimension(probabilities.len()));
    }
    if let Some(index) = probabilities.iter().position(|p| !p.is_finite()) {
        return Err(DatasetError::NonFinite { index });
    }
    let mut best = 0;
    for (j, &p) in probabilities.iter().enumerate().skip(1) {
        if p < probabilities[best] {
            best = j;
        }
    }
    Ok(best)
}

pub type Predictions = BTreeMap<TaskId, Vec<f64>>;

/// Reads `task_id,p1..p17`.
pub fn load_predictions<R: Read>(input: R) -> Result<Predictions, DatasetError> {
    let mut rdr = csv_reader(input);
    check_header(rdr.headers()?, &["task_id"])?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let values = parse_row_values(&rec, 1, line)?;
        if out.insert(TaskId(rec[0].to_string()), values.to_vec()).is_some() {
            return Err(DatasetError::Schema {
                line,
                message: format!("duplicate task id `{}`", &rec[0]),
            });
        }
    }
    Ok(out)
}

pub fn write_predictions_csv<W: Write>(preds: &Predictions, out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("task_id".to_string()).chain(planner_header()))?;
    for (id, p) in preds {
        w.write_record(std::iter::once(id.0.clone()).chain(p.iter().map(f64::to_string)))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Domain,
    Random,
}

impl std::str::FromStr for SplitMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "domain" => Ok(SplitMode::Domain),
            "random" => Ok(SplitMode::Random),
            _ => Err(format!("unknown split mode `{s}` (expected domain or random)")),
        }
    }
}

/// Train/validation/test partition, as stored in `split.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub seed: u64,
    pub train: Vec<TaskId>,
    pub validation: Vec<TaskId>,
    pub test: Vec<TaskId>,
}

impl SplitSpec {
    /// Disjoint, covers exactly the table's tasks, and in domain mode keeps
    /// each domain on one side of train/validation.
    pub fn validate(&self, t: &TargetTable) -> Result<(), DatasetError> {
        let index = t.index();
        let mut side: HashMap<&TaskId, &str> = HashMap::new();
        for (name, ids) in [
            ("train", &self.train),
            ("validation", &self.validation),
            ("test", &self.test),
        ] {
            for id in ids {
                if !index.contains_key(id) {
                    return Err(DatasetError::InvalidSplit(format!("unknown task `{id}` in {name}")));
                }
                if let Some(prev) = side.insert(id, name) {
                    return Err(DatasetError::InvalidSplit(format!(
                        "task `{id}` is in both {prev} and {name}"
                    )));
                }
            }
        }
        if let Some(r) = t.rows.iter().find(|r| !side.contains_key(&r.id)) {
            return Err(DatasetError::InvalidSplit(format!("task `{}` is not assigned", r.id)));
        }
        if self.mode == SplitMode::Domain {
            let train_domains: HashSet<&str> = self.train.iter().map(|id| index[id].domain.as_str()).collect();
            if let Some(id) = self
                .validation
                .iter()
                .find(|id| train_domains.contains(index[id].domain.as_str()))
            {
                return Err(DatasetError::InvalidSplit(format!(
                    "domain `{}` appears in both train and validation",
                    index[id].domain
                )));
            }
        }
        Ok(())
    }
}

/// Solved fraction on the test set when each task runs the planner with the
/// smallest predicted failure probability.
pub fn evaluate_selection(preds: &Predictions, t: &TargetTable, split: &SplitSpec) -> Result<f64, DatasetError> {
    if split.test.is_empty() {
        return Err(DatasetError::EmptyTestSet);
    }
    let index = t.index();
    let solved: Vec<bool> = split
        .test
        .par_iter()
        .map(|id| {
            let row = index
                .get(id)
                .ok_or_else(|| DatasetError::InvalidSplit(format!("unknown task `{id}` in test")))?;
            let p = preds
                .get(id)
                .ok_or_else(|| DatasetError::MissingPrediction(id.clone()))?;
            Ok(row.runtimes[select_planner(p)?] < t.timeout)
        })
        .collect::<Result<_, DatasetError>>()?;
    Ok(solved.iter().filter(|&&s| s).count() as f64 / solved.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ratios {
    pub train: f64,
    pub validation: f64,
}

impl Ratios {
    pub fn new(train: f64, validation: f64) -> Result<Self, DatasetError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(train) || !ok(validation) || train + validation <= 0.0 {
            return Err(DatasetError::InfeasibleRatio(format!(
                "ratios must be nonnegative with a positive sum, got {train},{validation}"
            )));
        }
        Ok(Ratios { train, validation })
    }

    fn train_share(&self) -> f64 {
        self.train / (self.train + self.validation)
    }
}

impl std::str::FromStr for Ratios {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b] = parts[..] else {
            return Err(format!("expected two comma-separated ratios, got `{s}`"));
        };
        let parse = |x: &str| x.parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
        Ratios::new(parse(a)?, parse(b)?).map_err(|e| e.to_string())
    }
}

/// Re-partitions the non-test tasks into train and validation. The test set
/// is kept as given.
///
/// Random mode shuffles tasks under the seed and cuts at the train share.
/// Domain mode shuffles whole domains under the seed and assigns each to the
/// side currently furthest below its target size.
pub fn resplit(
    t: &TargetTable,
    test: &[TaskId],
    mode: SplitMode,
    seed: u64,
    ratios: Ratios,
) -> Result<SplitSpec, DatasetError> {
    let index = t.index();
    let mut test_set = HashSet::new();
    for id in test {
        if !index.contains_key(id) {
            return Err(DatasetError::InvalidSplit(format!("unknown test task `{id}`")));
        }
        if !test_set.insert(id) {
            return Err(DatasetError::InvalidSplit(format!("test task `{id}` listed twice")));
        }
    }
    let pool: Vec<&TaskRow> = t.rows.iter().filter(|r| !test_set.contains(&r.id)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let share = ratios.train_share();
    let mut in_train: HashSet<&TaskId> = HashSet::new();
    match mode {
        SplitMode::Random => {
            let mut order: Vec<&TaskRow> = pool.clone();
            order.shuffle(&mut rng);
            let n_train = (order.len() as f64 * share).round() as usize;
            in_train.extend(order[..n_train].iter().map(|r| &r.id));
        }
        SplitMode::Domain => {
            let mut domains: BTreeMap<&str, Vec<&TaskId>> = BTreeMap::new();
            for r in &pool {
                domains.entry(r.domain.as_str()).or_default().push(&r.id);
            }
            let mut groups: Vec<Vec<&TaskId>> = domains.into_values().collect();
            groups.shuffle(&mut rng);
            let total = pool.len() as f64;
            let (target_train, target_val) = (total * share, total * (1.0 - share));
            let (mut n_train, mut n_val) = (0usize, 0usize);
            for g in groups {
                if target_train - n_train as f64 >= target_val - n_val as f64 {
                    n_train += g.len();
                    in_train.extend(g);
                } else {
                    n_val += g.len();
                }
            }
            let empty_side = if ratios.train > 0.0 && n_train == 0 && !pool.is_empty() {
                Some("train")
            } else if ratios.validation > 0.0 && n_val == 0 && !pool.is_empty() {
                Some("validation")
            } else {
                None
            };
            if let Some(side) = empty_side {
                return Err(DatasetError::InfeasibleRatio(format!(
                    "no whole-domain assignment gives {side} any tasks"
                )));
            }
        }
    }
    let (train, validation): (Vec<&TaskRow>, Vec<&TaskRow>) = pool.iter().partition(|r| in_train.contains(&r.id));
    Ok(SplitSpec {
        mode,
        seed,
        train: train.into_iter().map(|r| r.id.clone()).collect(),
        validation: validation.into_iter().map(|r| r.id.clone()).collect(),
        test: test.to_vec(),
    })
}

/// A JSON array of task ids.
pub fn load_test_ids<R: Read>(input: R) -> Result<Vec<TaskId>, DatasetError> {
    Ok(serde_json::from_reader(input)?)
}
