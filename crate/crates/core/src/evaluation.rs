//! Precision@k evaluation of ranked outputs against graded annotations.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: duplicate judgment for ({item:?}, {path:?})")]
    DuplicateJudgment {
        line: usize,
        item: String,
        path: String,
    },
    #[error("line {line}: rank {rank} out of order for item {item:?} (expected {expected})")]
    RankOutOfOrder {
        line: usize,
        item: String,
        rank: usize,
        expected: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Relevance grade of one (item, category) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grade {
    Not,
    Somewhat,
    Relevant,
}

impl Grade {
    pub fn from_code(code: u8) -> Option<Grade> {
        match code {
            0 => Some(Grade::Not),
            1 => Some(Grade::Somewhat),
            2 => Some(Grade::Relevant),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Grade::Not => 0,
            Grade::Somewhat => 1,
            Grade::Relevant => 2,
        }
    }
}

/// Graded judgments keyed by (item id, category path); pairs absent from
/// the set count as not relevant.
#[derive(Debug, Clone, Default)]
pub struct AnnotationSet {
    judgments: BTreeMap<(String, String), Grade>,
}

impl AnnotationSet {
    pub fn grade(&self, item: &str, path: &str) -> Grade {
        self.judgments
            .get(&(item.to_string(), path.to_string()))
            .copied()
            .unwrap_or(Grade::Not)
    }

    pub fn insert(&mut self, item: impl Into<String>, path: impl Into<String>, grade: Grade) {
        self.judgments.insert((item.into(), path.into()), grade);
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// True when the set holds at least one judgment for `item`.
    pub fn has_item(&self, item: &str) -> bool {
        let start = (item.to_string(), String::new());
        self.judgments
            .range(start..)
            .next()
            .is_some_and(|((i, _), _)| i == item)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, Grade)> {
        self.judgments
            .iter()
            .map(|((i, p), &g)| (i.as_str(), p.as_str(), g))
    }
}

/// Loads item TAB category_path TAB grade(0|1|2) rows.
pub fn load_annotations(path: &Path) -> Result<AnnotationSet, EvalError> {
    let file = std::fs::File::open(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_annotations_from(BufReader::new(file))
}

pub fn load_annotations_from(reader: impl BufRead) -> Result<AnnotationSet, EvalError> {
    let mut set = AnnotationSet::default();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| EvalError::Io {
            path: PathBuf::from("<annotations>"),
            source,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(item), Some(path), Some(raw_grade), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(EvalError::MalformedLine {
                line: lineno,
                reason: "expected 3 tab-separated columns".into(),
            });
        };
        let grade = raw_grade
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Grade::from_code)
            .ok_or_else(|| EvalError::MalformedLine {
                line: lineno,
                reason: format!("grade must be 0, 1 or 2, got {raw_grade:?}"),
            })?;
        let key = (item.to_string(), path.to_string());
        if set.judgments.contains_key(&key) {
            return Err(EvalError::DuplicateJudgment {
                line: lineno,
                item: item.to_string(),
                path: path.to_string(),
            });
        }
        set.judgments.insert(key, grade);
    }
    Ok(set)
}

/// Merges several annotators' sets by the median grade per pair; annotators
/// without a judgment vote not-relevant. Even panels take the lower median.
pub fn merge_annotations(sets: &[AnnotationSet]) -> AnnotationSet {
    let mut merged = AnnotationSet::default();
    if sets.is_empty() {
        return merged;
    }
    let mut keys: Vec<&(String, String)> = sets
        .iter()
        .flat_map(|s| s.judgments.keys())
        .collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let mut grades: Vec<Grade> = sets.iter().map(|s| s.grade(&key.0, &key.1)).collect();
        grades.sort();
        let median = grades[(grades.len() - 1) / 2];
        if median != Grade::Not {
            merged.judgments.insert(key.clone(), median);
        }
    }
    merged
}

/// Fraction of the top `k` positions holding a relevant category; short
/// lists are padded with misses. `count_somewhat` accepts grade 1 as a hit.
pub fn precision_at_k(
    ranked: &[String],
    judgments: &AnnotationSet,
    item: &str,
    k: usize,
    count_somewhat: bool,
) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    let hits = ranked
        .iter()
        .take(k)
        .filter(|path| is_hit(judgments.grade(item, path), count_somewhat))
        .count();
    hits as f64 / k as f64
}

fn is_hit(grade: Grade, count_somewhat: bool) -> bool {
    grade == Grade::Relevant || (count_somewhat && grade == Grade::Somewhat)
}

/// Mean precision@k over all items, plus per-item hit vectors.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub precision_at: BTreeMap<usize, f64>,
    pub per_item: BTreeMap<String, Vec<bool>>,
    pub n_items: usize,
    /// Items in the results file with no judgment at all.
    pub n_unjudged: usize,
    pub count_somewhat: bool,
}

impl EvalReport {
    /// Plain-text table plus machine-readable key=value lines.
    pub fn render(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "{:<12} precision", "k")?;
        for (k, p) in &self.precision_at {
            writeln!(out, "{k:<12} {p:.4}")?;
        }
        writeln!(out)?;
        writeln!(out, "n_items={}", self.n_items)?;
        writeln!(out, "n_unjudged={}", self.n_unjudged)?;
        writeln!(out, "count_somewhat={}", self.count_somewhat)?;
        for (k, p) in &self.precision_at {
            writeln!(out, "precision@{k}={p}")?;
        }
        Ok(())
    }
}

/// One parsed results file: ranked category paths per item.
#[derive(Debug, Clone)]
pub struct RankedRun {
    pub ranked_by_item: BTreeMap<String, Vec<String>>,
}

// The two supported layouts:
//   classification: line_number TAB rank TAB path TAB score
//   attachments:    entity TAB path TAB probability TAB rank
// The first data row decides, classification taking precedence; every
// later row must fit the same layout.
pub fn load_ranked_run(path: &Path) -> Result<RankedRun, EvalError> {
    let file = std::fs::File::open(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_ranked_run_from(BufReader::new(file))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RunLayout {
    Classification,
    Attachments,
}

pub fn load_ranked_run_from(reader: impl BufRead) -> Result<RankedRun, EvalError> {
    let mut layout: Option<RunLayout> = None;
    let mut rows: Vec<(String, String)> = Vec::new();
    let mut next_rank: std::collections::HashMap<String, usize> = std::collections::HashMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| EvalError::Io {
            path: PathBuf::from("<results>"),
            source,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(EvalError::MalformedLine {
                line: lineno,
                reason: "expected 4 tab-separated columns".into(),
            });
        }
        let detected = sniff_layout(&cols).ok_or_else(|| EvalError::MalformedLine {
            line: lineno,
            reason: "row fits neither the classification nor the attachment layout".into(),
        })?;
        let layout = *layout.get_or_insert(detected);

        let (item, rank, path) = match layout {
            RunLayout::Classification => {
                let rank: usize = cols[1].parse().map_err(|_| EvalError::MalformedLine {
                    line: lineno,
                    reason: format!("rank must be an integer, got {:?}", cols[1]),
                })?;
                let score_ok = cols[3].parse::<f64>().is_ok();
                if cols[0].parse::<usize>().is_err() || !score_ok {
                    return Err(EvalError::MalformedLine {
                        line: lineno,
                        reason: "row does not fit the classification layout".into(),
                    });
                }
                (cols[0].to_string(), rank, cols[2].to_string())
            }
            RunLayout::Attachments => {
                let rank: usize = cols[3].parse().map_err(|_| EvalError::MalformedLine {
                    line: lineno,
                    reason: format!("rank must be an integer, got {:?}", cols[3]),
                })?;
                if cols[2].parse::<f64>().is_err() {
                    return Err(EvalError::MalformedLine {
                        line: lineno,
                        reason: "row does not fit the attachment layout".into(),
                    });
                }
                (cols[0].to_string(), rank, cols[1].to_string())
            }
        };
        // ranks per item must arrive in order 1, 2, 3, ...
        let expected = next_rank.entry(item.clone()).or_insert(1);
        if rank != *expected {
            return Err(EvalError::RankOutOfOrder {
                line: lineno,
                item,
                rank,
                expected: *expected,
            });
        }
        *expected += 1;
        rows.push((item, path));
    }

    let mut ranked_by_item: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (item, path) in rows {
        ranked_by_item.entry(item).or_default().push(path);
    }
    Ok(RankedRun { ranked_by_item })
}

fn sniff_layout(cols: &[&str]) -> Option<RunLayout> {
    let classification = cols[0].parse::<usize>().is_ok()
        && cols[1].parse::<usize>().is_ok()
        && cols[2].starts_with('/')
        && cols[3].parse::<f64>().is_ok();
    if classification {
        return Some(RunLayout::Classification);
    }
    let attachments = cols[1].starts_with('/')
        && cols[2].parse::<f64>().is_ok()
        && cols[3].parse::<usize>().is_ok();
    if attachments {
        return Some(RunLayout::Attachments);
    }
    None
}

/// Evaluates a results file against annotations at each k in `ks`.
pub fn evaluate_run(
    results_file: &Path,
    annotations_file: &Path,
    ks: &[usize],
    count_somewhat: bool,
) -> Result<EvalReport, EvalError> {
    let run = load_ranked_run(results_file)?;
    let judgments = load_annotations(annotations_file)?;
    evaluate(&run, &judgments, ks, count_somewhat)
}

pub fn evaluate(
    run: &RankedRun,
    judgments: &AnnotationSet,
    ks: &[usize],
    count_somewhat: bool,
) -> Result<EvalReport, EvalError> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(EvalError::InvalidParameter(
            "ks must be non-empty and positive".into(),
        ));
    }
    let n_items = run.ranked_by_item.len();
    let mut per_item = BTreeMap::new();
    let mut n_unjudged = 0;
    for (item, ranked) in &run.ranked_by_item {
        if !judgments.has_item(item) {
            n_unjudged += 1;
        }
        let hits: Vec<bool> = ranked
            .iter()
            .map(|path| is_hit(judgments.grade(item, path), count_somewhat))
            .collect();
        per_item.insert(item.clone(), hits);
    }
    let mut precision_at = BTreeMap::new();
    for &k in ks {
        let total: f64 = run
            .ranked_by_item
            .iter()
            .map(|(item, ranked)| precision_at_k(ranked, judgments, item, k, count_somewhat))
            .sum();
        let mean = if n_items == 0 { 0.0 } else { total / n_items as f64 };
        precision_at.insert(k, mean);
    }
    Ok(EvalReport {
        precision_at,
        per_item,
        n_items,
        n_unjudged,
        count_somewhat,
    })
}
