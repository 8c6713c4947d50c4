//! Concept knowledge base: concept–entity co-occurrence counts and
//! concept–concept similarity.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::text::{normalize, PhraseLexicon};

#[derive(Debug, Error)]
pub enum KbError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },
}

/// Concept–entity co-occurrence counts with both lookup directions and
/// cached marginals. Immutable after load.
#[derive(Debug, Clone, Default)]
pub struct ConceptKb {
    entities_of: BTreeMap<String, BTreeMap<String, u64>>,
    concepts_of: BTreeMap<String, BTreeMap<String, u64>>,
    concept_totals: BTreeMap<String, u64>,
    entity_totals: BTreeMap<String, u64>,
}

impl ConceptKb {
    pub fn count(&self, concept: &str, entity: &str) -> u64 {
        self.entities_of
            .get(concept)
            .and_then(|m| m.get(entity))
            .copied()
            .unwrap_or(0)
    }

    /// Entities under `concept` with counts, in entity order.
    pub fn entities_of(&self, concept: &str) -> impl Iterator<Item = (&str, u64)> {
        self.entities_of
            .get(concept)
            .into_iter()
            .flat_map(|m| m.iter().map(|(e, &n)| (e.as_str(), n)))
    }

    /// Concepts over `entity` with counts, in concept order.
    pub fn concepts_of(&self, entity: &str) -> impl Iterator<Item = (&str, u64)> {
        self.concepts_of
            .get(entity)
            .into_iter()
            .flat_map(|m| m.iter().map(|(c, &n)| (c.as_str(), n)))
    }

    /// Σ_e n(concept, e), or 0 for an unknown concept.
    pub fn concept_total(&self, concept: &str) -> u64 {
        self.concept_totals.get(concept).copied().unwrap_or(0)
    }

    /// Σ_c n(c, entity), or 0 for an unknown entity.
    pub fn entity_total(&self, entity: &str) -> u64 {
        self.entity_totals.get(entity).copied().unwrap_or(0)
    }

    pub fn has_concept(&self, concept: &str) -> bool {
        self.entities_of.contains_key(concept)
    }

    pub fn has_entity(&self, entity: &str) -> bool {
        self.concepts_of.contains_key(entity)
    }

    /// Number of distinct entities under `concept`.
    pub fn entity_count(&self, concept: &str) -> usize {
        self.entities_of.get(concept).map_or(0, BTreeMap::len)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.entities_of.keys().map(String::as_str)
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.concepts_of.keys().map(String::as_str)
    }

    pub fn concept_len(&self) -> usize {
        self.entities_of.len()
    }

    pub fn entity_len(&self) -> usize {
        self.concepts_of.len()
    }

    pub fn pair_len(&self) -> usize {
        self.entities_of.values().map(BTreeMap::len).sum()
    }

    /// Lexicon of the KB's concept strings, for segmentation.
    pub fn concept_lexicon(&self) -> PhraseLexicon {
        PhraseLexicon::new(self.concepts().map(str::to_string))
    }

    /// Writes all pairs as concept TAB entity TAB count, sorted.
    pub fn dump(&self, mut out: impl Write) -> io::Result<()> {
        for (concept, entities) in &self.entities_of {
            for (entity, count) in entities {
                writeln!(out, "{concept}\t{entity}\t{count}")?;
            }
        }
        Ok(())
    }
}

/// Loads the KB from a tab-separated pairs file: concept, entity, count.
/// Duplicate pairs are summed; strings are normalized.
pub fn load_kb(pairs_file: &Path) -> Result<ConceptKb, KbError> {
    let file = std::fs::File::open(pairs_file).map_err(|source| KbError::Io {
        path: pairs_file.to_path_buf(),
        source,
    })?;
    load_kb_from(BufReader::new(file))
}

/// Reader-based variant of [`load_kb`].
pub fn load_kb_from(reader: impl BufRead) -> Result<ConceptKb, KbError> {
    let mut kb = ConceptKb::default();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| KbError::Io {
            path: PathBuf::from("<pairs>"),
            source,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(raw_concept), Some(raw_entity), Some(raw_count), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(KbError::MalformedLine {
                line: lineno,
                reason: "expected 3 tab-separated columns".into(),
            });
        };
        let concept = normalize(raw_concept);
        let entity = normalize(raw_entity);
        if concept.is_empty() || entity.is_empty() {
            return Err(KbError::MalformedLine {
                line: lineno,
                reason: "empty concept or entity".into(),
            });
        }
        let count: u64 = raw_count
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| KbError::MalformedLine {
                line: lineno,
                reason: format!("count must be a positive integer, got {raw_count:?}"),
            })?;

        *kb.entities_of
            .entry(concept.clone())
            .or_default()
            .entry(entity.clone())
            .or_insert(0) += count;
        *kb.concepts_of
            .entry(entity.clone())
            .or_default()
            .entry(concept.clone())
            .or_insert(0) += count;
        *kb.concept_totals.entry(concept).or_insert(0) += count;
        *kb.entity_totals.entry(entity).or_insert(0) += count;
    }
    Ok(kb)
}

/// How concept–concept similarity is computed in the relevance sum.
#[derive(Debug, Clone, Default)]
pub enum ConceptSimilarity {
    /// sim(c1, c2) = 1 iff c1 = c2. The default.
    #[default]
    ExactMatch,
    /// Explicit scores; pairs absent from the table fall back to exact-match.
    Table(BTreeMap<(String, String), f64>),
    /// Cosine of the two concepts' entity-count vectors.
    CooccurrenceCosine,
}

impl ConceptSimilarity {
    /// Loads a table from tab-separated rows: concept, concept, score in [0,1].
    pub fn load_table(path: &Path) -> Result<Self, KbError> {
        let file = std::fs::File::open(path).map_err(|source| KbError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::load_table_from(BufReader::new(file))
    }

    pub fn load_table_from(reader: impl BufRead) -> Result<Self, KbError> {
        let mut table = BTreeMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|source| KbError::Io {
                path: PathBuf::from("<similarity>"),
                source,
            })?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(a), Some(b), Some(raw_score), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(KbError::MalformedLine {
                    line: lineno,
                    reason: "expected 3 tab-separated columns".into(),
                });
            };
            let score: f64 = raw_score
                .trim()
                .parse()
                .ok()
                .filter(|s: &f64| s.is_finite() && (0.0..=1.0).contains(s))
                .ok_or_else(|| KbError::MalformedLine {
                    line: lineno,
                    reason: format!("score must be in [0,1], got {raw_score:?}"),
                })?;
            let a = normalize(a);
            let b = normalize(b);
            if a.is_empty() || b.is_empty() {
                return Err(KbError::MalformedLine {
                    line: lineno,
                    reason: "empty concept".into(),
                });
            }
            // stored once under the sorted key, so lookups are symmetric
            let key = if a <= b { (a, b) } else { (b, a) };
            table.insert(key, score);
        }
        Ok(ConceptSimilarity::Table(table))
    }

    pub fn score(&self, kb: &ConceptKb, c1: &str, c2: &str) -> f64 {
        if c1 == c2 {
            if let ConceptSimilarity::CooccurrenceCosine = self {
                return if kb.has_concept(c1) { 1.0 } else { 0.0 };
            }
            return 1.0;
        }
        match self {
            ConceptSimilarity::ExactMatch => 0.0,
            ConceptSimilarity::Table(table) => {
                let key = if c1 <= c2 {
                    (c1.to_string(), c2.to_string())
                } else {
                    (c2.to_string(), c1.to_string())
                };
                table.get(&key).copied().unwrap_or(0.0)
            }
            ConceptSimilarity::CooccurrenceCosine => cosine_of_entity_vectors(kb, c1, c2),
        }
    }

    /// True when only identical concepts can be similar, which lets the
    /// relevance sum skip the cross product.
    pub fn is_exact_match(&self) -> bool {
        matches!(self, ConceptSimilarity::ExactMatch)
    }
}

fn cosine_of_entity_vectors(kb: &ConceptKb, c1: &str, c2: &str) -> f64 {
    if !kb.has_concept(c1) || !kb.has_concept(c2) {
        return 0.0;
    }
    let (Some(v1), Some(v2)) = (kb.entities_of.get(c1), kb.entities_of.get(c2)) else {
        return 0.0;
    };
    let norm = |v: &BTreeMap<String, u64>| {
        v.values()
            .map(|&n| (n as f64) * (n as f64))
            .sum::<f64>()
            .sqrt()
    };
    let (small, large) = if v1.len() <= v2.len() { (v1, v2) } else { (v2, v1) };
    let dot: f64 = small
        .iter()
        .filter_map(|(e, &n)| large.get(e).map(|&m| (n as f64) * (m as f64)))
        .sum();
    if dot == 0.0 {
        return 0.0;
    }
    (dot / (norm(v1) * norm(v2))).clamp(0.0, 1.0)
}

/// Builds a segmentation lexicon from entities whose total count is at
/// least `min_total`.
pub fn build_entity_lexicon(kb: &ConceptKb, min_total: u64) -> PhraseLexicon {
    PhraseLexicon::new(
        kb.entity_totals
            .iter()
            .filter(|&(_, &total)| total >= min_total)
            .map(|(e, _)| e.clone()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn kb_from(pairs: &str) -> ConceptKb {
        load_kb_from(Cursor::new(pairs.to_string())).unwrap()
    }

    #[test]
    fn single_pair_populates_marginals() {
        let kb = kb_from("phone\tgalaxy nexus\t10\n");
        assert_eq!(kb.count("phone", "galaxy nexus"), 10);
        assert_eq!(kb.concept_total("phone"), 10);
        assert_eq!(kb.entity_total("galaxy nexus"), 10);
    }

    #[test]
    fn duplicate_rows_are_summed() {
        let kb = kb_from("phone\tiphone\t3\nphone\tiphone\t3\n");
        assert_eq!(kb.count("phone", "iphone"), 6);
        assert_eq!(kb.concept_total("phone"), 6);
    }

    #[test]
    fn zero_count_is_rejected() {
        let err = load_kb_from(Cursor::new("phone\tiphone\t0\n")).unwrap_err();
        assert!(matches!(err, KbError::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn negative_and_non_integer_counts_are_rejected() {
        for bad in ["phone\tiphone\t-2\n", "phone\tiphone\t1.5\n", "phone\tiphone\tx\n"] {
            assert!(load_kb_from(Cursor::new(bad.to_string())).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn wrong_column_count_is_rejected() {
        for bad in ["phone\tiphone\n", "phone\tiphone\t1\textra\n"] {
            assert!(load_kb_from(Cursor::new(bad.to_string())).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn strings_are_normalized_on_load() {
        let kb = kb_from("Cellular_Phones\t Galaxy  Nexus \t2\n");
        assert_eq!(kb.count("cellular phones", "galaxy nexus"), 2);
    }

    #[test]
    fn marginals_match_pair_sums() {
        let kb = kb_from("phone\ta\t1\nphone\tb\t2\ncar\ta\t4\n");
        for concept in ["phone", "car"] {
            let sum: u64 = kb.entities_of(concept).map(|(_, n)| n).sum();
            assert_eq!(sum, kb.concept_total(concept));
        }
        for entity in ["a", "b"] {
            let sum: u64 = kb.concepts_of(entity).map(|(_, n)| n).sum();
            assert_eq!(sum, kb.entity_total(entity));
        }
        assert_eq!(kb.entity_count("phone"), 2);
    }

    #[test]
    fn dump_and_reload_round_trips() {
        let kb = kb_from("phone\tb\t2\nphone\ta\t1\ncar\ta\t4\nphone\ta\t5\n");
        let mut buf = Vec::new();
        kb.dump(&mut buf).unwrap();
        let reloaded = load_kb_from(Cursor::new(buf.clone())).unwrap();
        assert_eq!(reloaded.count("phone", "a"), 6);
        for concept in kb.concepts() {
            assert_eq!(kb.concept_total(concept), reloaded.concept_total(concept));
        }
        for entity in kb.entities() {
            assert_eq!(kb.entity_total(entity), reloaded.entity_total(entity));
        }
        let mut buf2 = Vec::new();
        reloaded.dump(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn exact_match_similarity() {
        let kb = ConceptKb::default();
        let sim = ConceptSimilarity::ExactMatch;
        assert_eq!(sim.score(&kb, "phone", "phone"), 1.0);
        assert_eq!(sim.score(&kb, "phone", "car"), 0.0);
    }

    #[test]
    fn table_similarity_is_symmetric_and_falls_back() {
        let kb = ConceptKb::default();
        let sim = ConceptSimilarity::load_table_from(Cursor::new(
            "phone\tcellular phone\t0.9\n".to_string(),
        ))
        .unwrap();
        assert_eq!(sim.score(&kb, "phone", "cellular phone"), 0.9);
        assert_eq!(sim.score(&kb, "cellular phone", "phone"), 0.9);
        assert_eq!(sim.score(&kb, "phone", "phone"), 1.0);
        assert_eq!(sim.score(&kb, "phone", "car"), 0.0);
    }

    #[test]
    fn table_rejects_out_of_range_scores() {
        for bad in ["a\tb\t1.5\n", "a\tb\t-0.1\n", "a\tb\tnan\n"] {
            assert!(
                ConceptSimilarity::load_table_from(Cursor::new(bad.to_string())).is_err(),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn cosine_of_identical_one_hot_vectors_is_one() {
        let kb = kb_from("phone\ta\t1\ncellular phone\ta\t1\n");
        let sim = ConceptSimilarity::CooccurrenceCosine;
        assert_eq!(sim.score(&kb, "phone", "cellular phone"), 1.0);
        assert_eq!(sim.score(&kb, "phone", "phone"), 1.0);
    }

    #[test]
    fn cosine_of_disjoint_vectors_is_zero() {
        let kb = kb_from("phone\ta\t1\ncar\tb\t1\n");
        let sim = ConceptSimilarity::CooccurrenceCosine;
        assert_eq!(sim.score(&kb, "phone", "car"), 0.0);
    }

    #[test]
    fn cosine_unknown_concept_is_zero() {
        let kb = kb_from("phone\ta\t1\n");
        let sim = ConceptSimilarity::CooccurrenceCosine;
        assert_eq!(sim.score(&kb, "phone", "boat"), 0.0);
        assert_eq!(sim.score(&kb, "boat", "boat"), 0.0);
    }

    #[test]
    fn cosine_matches_hand_computation() {
        // phone = {a:1, b:2}, tablet = {b:2, c:1}
        // dot = 4, |phone| = sqrt(5), |tablet| = sqrt(5), cos = 0.8
        let kb = kb_from("phone\ta\t1\nphone\tb\t2\ntablet\tb\t2\ntablet\tc\t1\n");
        let sim = ConceptSimilarity::CooccurrenceCosine;
        let got = sim.score(&kb, "phone", "tablet");
        assert!((got - 0.8).abs() < 1e-12, "got {got}");
        assert_eq!(got, sim.score(&kb, "tablet", "phone"));
    }

    #[test]
    fn entity_lexicon_respects_min_total() {
        let kb = kb_from("phone\tgalaxy nexus\t3\nphone\tgalaxy\t1\n");
        let lex = build_entity_lexicon(&kb, 1);
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.max_tokens(), 2);
        let lex = build_entity_lexicon(&kb, 2);
        assert_eq!(lex.len(), 1);
        assert!(lex.contains("galaxy nexus"));
        let lex = build_entity_lexicon(&kb, 100);
        assert!(lex.is_empty());
    }
}
