//! Category–entity relevance scoring and top-k attachment.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::concept_kb::{ConceptKb, ConceptSimilarity};
use crate::concept_vectors::ConceptVector;
use crate::entity_typing::TypedEntity;
use crate::taxonomy::{CategoryId, Taxonomy};

/// An entity's top-k categories with softmax probabilities, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityAttachment {
    pub entity: String,
    pub ranked: Vec<(CategoryId, f64)>,
}

/// Taxonomy plus the entity attachments in both directions.
#[derive(Debug)]
pub struct EnrichedTaxonomy {
    tax: Taxonomy,
    attachments_by_category: BTreeMap<CategoryId, Vec<(String, f64)>>,
    attachments_by_entity: BTreeMap<String, EntityAttachment>,
    skipped_entities: Vec<String>,
}

impl EnrichedTaxonomy {
    /// An enrichment with no attachments at all; `skipped` lists any entities
    /// that were dropped without scoring.
    pub fn unattached(tax: Taxonomy, skipped: Vec<String>) -> EnrichedTaxonomy {
        EnrichedTaxonomy {
            tax,
            attachments_by_category: BTreeMap::new(),
            attachments_by_entity: BTreeMap::new(),
            skipped_entities: skipped,
        }
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.tax
    }

    /// Entities attached to `t` with probabilities, descending then by name.
    pub fn entities_of(&self, t: CategoryId) -> &[(String, f64)] {
        self.attachments_by_category
            .get(&t)
            .map_or(&[], Vec::as_slice)
    }

    pub fn attachment(&self, entity: &str) -> Option<&EntityAttachment> {
        self.attachments_by_entity.get(entity)
    }

    pub fn attachments(&self) -> impl Iterator<Item = &EntityAttachment> {
        self.attachments_by_entity.values()
    }

    pub fn attachment_len(&self) -> usize {
        self.attachments_by_entity.len()
    }

    /// Entities whose relevance was zero for every category, in input order.
    pub fn skipped_entities(&self) -> &[String] {
        &self.skipped_entities
    }

    /// Writes entity TAB category_path TAB probability TAB rank, sorted by
    /// (entity, rank). Rank is 1-based.
    pub fn dump_attachments(&self, mut out: impl Write) -> io::Result<()> {
        for (entity, att) in &self.attachments_by_entity {
            for (rank, (cat, prob)) in att.ranked.iter().enumerate() {
                let path = &self.tax.category(*cat).path;
                writeln!(out, "{entity}\t{path}\t{prob}\t{}", rank + 1)?;
            }
        }
        Ok(())
    }
}

/// Relevance of entity vector `e_vec` to category vector `t_vec`:
/// Σ Σ sim(c_t, c_e) · w(c_t) · w(c_e). With exact-match similarity this is
/// the sparse dot product of the two vectors.
pub fn relevance(
    t_vec: &ConceptVector,
    e_vec: &ConceptVector,
    simtab: &ConceptSimilarity,
    kb: &ConceptKb,
) -> f64 {
    if simtab.is_exact_match() {
        let (small, large) = if t_vec.len() <= e_vec.len() {
            (t_vec, e_vec)
        } else {
            (e_vec, t_vec)
        };
        return small
            .iter()
            .map(|(c, w)| w * large.get(c))
            .sum();
    }
    let mut total = 0.0;
    for (ct, wt) in t_vec.iter() {
        for (ce, we) in e_vec.iter() {
            let sim = simtab.score(kb, ct, ce);
            if sim > 0.0 {
                total += sim * wt * we;
            }
        }
    }
    total
}

/// Softmax with max-subtraction; `temperature` scales the logits (1 is the
/// plain softmax). Scores must be non-empty and finite.
pub fn softmax(scores: &[f64], temperature: f64) -> Vec<f64> {
    assert!(!scores.is_empty(), "softmax of no scores");
    assert!(
        temperature > 0.0 && temperature.is_finite(),
        "temperature must be positive and finite, got {temperature}"
    );
    let max = scores.iter().copied().fold(f64::MIN, f64::max);
    let exps: Vec<f64> = scores
        .iter()
        .map(|&s| ((s - max) / temperature).exp())
        .collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Attaches every typed entity to its top-`k` categories by softmax
/// probability over the relevance scores. Entities with zero relevance to
/// every category are skipped and listed in the result.
pub fn attach_entities(
    tax: Taxonomy,
    vectors: &BTreeMap<CategoryId, ConceptVector>,
    typed: &BTreeMap<String, TypedEntity>,
    simtab: &ConceptSimilarity,
    kb: &ConceptKb,
    k: usize,
    temperature: f64,
) -> EnrichedTaxonomy {
    assert!(k >= 1, "k must be at least 1");
    assert!(
        vectors.values().any(|v| !v.is_empty()),
        "all category vectors are empty"
    );

    let ids: Vec<CategoryId> = tax.categories().map(|c| c.id).collect();
    let empty = ConceptVector::new();
    let mut attachments_by_entity = BTreeMap::new();
    let mut attachments_by_category: BTreeMap<CategoryId, Vec<(String, f64)>> = BTreeMap::new();
    let mut skipped_entities = Vec::new();

    for (entity, te) in typed {
        let rels: Vec<f64> = ids
            .iter()
            .map(|id| relevance(vectors.get(id).unwrap_or(&empty), &te.concepts, simtab, kb))
            .collect();
        if rels.iter().all(|&r| r == 0.0) {
            skipped_entities.push(entity.clone());
            continue;
        }
        let probs = softmax(&rels, temperature);
        // order by raw relevance so exp underflow cannot collapse distinct
        // scores into ties; ids ascend within equal scores
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by(|&a, &b| rels[b].total_cmp(&rels[a]).then(ids[a].cmp(&ids[b])));
        let ranked: Vec<(CategoryId, f64)> = order
            .into_iter()
            .take(k)
            .map(|i| (ids[i], probs[i]))
            .collect();
        for &(cat, prob) in &ranked {
            attachments_by_category
                .entry(cat)
                .or_default()
                .push((entity.clone(), prob));
        }
        attachments_by_entity.insert(
            entity.clone(),
            EntityAttachment {
                entity: entity.clone(),
                ranked,
            },
        );
    }

    for list in attachments_by_category.values_mut() {
        list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    }

    EnrichedTaxonomy {
        tax,
        attachments_by_category,
        attachments_by_entity,
        skipped_entities,
    }
}
