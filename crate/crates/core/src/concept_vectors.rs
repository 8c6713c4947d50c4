//! Weighted concept vectors per category and their bottom-up enrichment
//! through the hierarchy.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::concept_kb::ConceptKb;
use crate::taxonomy::{CategoryId, Taxonomy};
use crate::text::{PhraseLexicon, PhraseMatch};

/// Sparse concept → weight map. All stored weights are finite and > 0;
/// iteration order is deterministic (concept order).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConceptVector {
    weights: BTreeMap<String, f64>,
}

impl ConceptVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `weight` for `concept`, dropping non-positive or non-finite
    /// values.
    pub fn set(&mut self, concept: impl Into<String>, weight: f64) {
        if weight > 0.0 && weight.is_finite() {
            self.weights.insert(concept.into(), weight);
        }
    }

    pub fn get(&self, concept: &str) -> f64 {
        self.weights.get(concept).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(c, &w)| (c.as_str(), w))
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.weights.keys().map(String::as_str)
    }

    /// self += scale · other, keeping only positive finite entries.
    pub fn add_scaled(&mut self, other: &ConceptVector, scale: f64) {
        if scale == 0.0 {
            return;
        }
        for (concept, w) in other.iter() {
            let updated = self.get(concept) + scale * w;
            if updated > 0.0 && updated.is_finite() {
                self.weights.insert(concept.to_string(), updated);
            } else {
                self.weights.remove(concept);
            }
        }
    }

    pub fn scaled(&self, scale: f64) -> ConceptVector {
        let mut out = ConceptVector::new();
        for (c, w) in self.iter() {
            out.set(c, w * scale);
        }
        out
    }
}

impl FromIterator<(String, f64)> for ConceptVector {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        let mut v = ConceptVector::new();
        for (c, w) in iter {
            v.set(c, w);
        }
        v
    }
}

/// Raw frequency statistics backing the concept weights.
#[derive(Debug, Clone, Default)]
pub struct ConceptStats {
    tf: HashMap<(CategoryId, String), u64>,
    df_odp: HashMap<String, u64>,
    df_pro: HashMap<String, u64>,
    concepts_by_category: HashMap<CategoryId, Vec<String>>,
}

impl ConceptStats {
    pub fn tf(&self, t: CategoryId, concept: &str) -> u64 {
        self.tf
            .get(&(t, concept.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn df_odp(&self, concept: &str) -> u64 {
        self.df_odp.get(concept).copied().unwrap_or(0)
    }

    pub fn df_pro(&self, concept: &str) -> u64 {
        self.df_pro.get(concept).copied().unwrap_or(0)
    }

    /// Concepts seen in category `t`, in first-seen order.
    pub fn concepts_of(&self, t: CategoryId) -> &[String] {
        self.concepts_by_category
            .get(&t)
            .map_or(&[], Vec::as_slice)
    }
}

/// Greedy longest-match scan of `text` against the KB's concept strings.
/// Matches up to `max_len` tokens; spans never overlap.
pub fn segment_concepts(text: &str, kb: &ConceptKb, max_len: usize) -> Vec<PhraseMatch> {
    kb.concept_lexicon().segment(text, max_len)
}

/// Counts concept occurrences over every document of every category.
pub fn collect_stats(tax: &Taxonomy, kb: &ConceptKb, max_len: usize) -> ConceptStats {
    collect_stats_with(tax, &kb.concept_lexicon(), kb, max_len)
}

fn collect_stats_with(
    tax: &Taxonomy,
    concept_lexicon: &PhraseLexicon,
    kb: &ConceptKb,
    max_len: usize,
) -> ConceptStats {
    let mut stats = ConceptStats::default();
    for cat in tax.categories() {
        for doc in tax.docs(cat.id) {
            let mut seen_in_doc: HashSet<String> = HashSet::new();
            for m in concept_lexicon.segment(&doc.text, max_len) {
                let key = (cat.id, m.phrase.clone());
                match stats.tf.get_mut(&key) {
                    Some(n) => *n += 1,
                    None => {
                        stats.tf.insert(key, 1);
                        stats
                            .concepts_by_category
                            .entry(cat.id)
                            .or_default()
                            .push(m.phrase.clone());
                    }
                }
                if seen_in_doc.insert(m.phrase.clone()) {
                    *stats.df_odp.entry(m.phrase).or_insert(0) += 1;
                }
            }
        }
    }
    for concept in stats.df_odp.keys() {
        stats
            .df_pro
            .insert(concept.clone(), kb.entity_count(concept) as u64);
    }
    stats
}

/// Weight of concept `c` in category `t`:
/// cw_odp·ln(cw_odp)·cw_pro·ln(cw_pro) with cw = tf/ln(1+df),
/// clamped to 0 unless both cw values exceed 1.
pub fn category_concept_weight(stats: &ConceptStats, t: CategoryId, c: &str) -> f64 {
    let tf = stats.tf(t, c);
    if tf == 0 {
        return 0.0;
    }
    let cw = |df: u64| tf as f64 / (1.0 + df as f64).ln();
    let cw_odp = cw(stats.df_odp(c));
    let cw_pro = cw(stats.df_pro(c));
    if cw_odp <= 1.0 || cw_pro <= 1.0 {
        return 0.0;
    }
    cw_odp * cw_odp.ln() * cw_pro * cw_pro.ln()
}

/// Base concept vector per category: every concept with positive clamped
/// weight. Categories without concepts get an empty vector.
pub fn base_vectors(stats: &ConceptStats, tax: &Taxonomy) -> BTreeMap<CategoryId, ConceptVector> {
    let mut out = BTreeMap::new();
    for cat in tax.categories() {
        let mut v = ConceptVector::new();
        for concept in stats.concepts_of(cat.id) {
            v.set(concept.clone(), category_concept_weight(stats, cat.id, concept));
        }
        out.insert(cat.id, v);
    }
    out
}

/// Bottom-up enrichment: c′(t) = α·c(t) + (1−α)·(1/|child|)·Σ c′(children)
/// for internal nodes, c′(leaf) = c(leaf).
pub fn enrich_vectors(
    base: &BTreeMap<CategoryId, ConceptVector>,
    tax: &Taxonomy,
    alpha: f64,
) -> BTreeMap<CategoryId, ConceptVector> {
    assert!(
        (0.0..=1.0).contains(&alpha),
        "alpha must be in [0,1], got {alpha}"
    );
    let empty = ConceptVector::new();
    let mut enriched: Vec<ConceptVector> = vec![ConceptVector::new(); tax.len()];
    // children always have larger ids than their parent
    for idx in (0..tax.len()).rev() {
        let cat = tax.category(CategoryId(idx as u32));
        let own = base.get(&cat.id).unwrap_or(&empty);
        if cat.children.is_empty() {
            enriched[idx] = own.clone();
            continue;
        }
        let mut v = own.scaled(alpha);
        let child_scale = (1.0 - alpha) / cat.children.len() as f64;
        for ch in &cat.children {
            let child = enriched[ch.index()].clone();
            v.add_scaled(&child, child_scale);
        }
        enriched[idx] = v;
    }
    enriched
        .into_iter()
        .enumerate()
        .map(|(idx, v)| (CategoryId(idx as u32), v))
        .collect()
}

/// Writes vectors as category_path TAB concept TAB weight, sorted by
/// (path, descending weight, concept).
pub fn dump_vectors(
    vectors: &BTreeMap<CategoryId, ConceptVector>,
    tax: &Taxonomy,
    mut out: impl std::io::Write,
) -> std::io::Result<()> {
    let mut paths: Vec<(&str, CategoryId)> = vectors
        .keys()
        .map(|&id| (tax.category(id).path.as_str(), id))
        .collect();
    paths.sort();
    for (path, id) in paths {
        let mut rows: Vec<(&str, f64)> = vectors[&id].iter().collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (concept, weight) in rows {
            writeln!(out, "{path}\t{concept}\t{weight}")?;
        }
    }
    Ok(())
}
