//! Merged term centroids and the blended term/entity classifier.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, BufRead, Write};
use std::ops::Range;

use crate::enrichment::EnrichedTaxonomy;
use crate::taxonomy::{CategoryId, Taxonomy};
use crate::text::{is_stopword, tokenize, PhraseLexicon};

/// Sparse term → tf-idf weight map with deterministic iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermVector {
    weights: BTreeMap<String, f64>,
}

impl TermVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, term: impl Into<String>, weight: f64) {
        if weight != 0.0 && weight.is_finite() {
            self.weights.insert(term.into(), weight);
        }
    }

    pub fn get(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, &w)| (t.as_str(), w))
    }

    pub fn add_scaled(&mut self, other: &TermVector, scale: f64) {
        if scale == 0.0 {
            return;
        }
        for (term, w) in other.iter() {
            let updated = self.get(term) + scale * w;
            if updated != 0.0 && updated.is_finite() {
                self.weights.insert(term.to_string(), updated);
            } else {
                self.weights.remove(term);
            }
        }
    }

    pub fn scaled(&self, scale: f64) -> TermVector {
        let mut out = TermVector::new();
        for (t, w) in self.iter() {
            out.set(t, w * scale);
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Scales to unit L2 norm; empty and zero vectors stay as they are.
    pub fn normalized(&self) -> TermVector {
        let norm = self.l2_norm();
        if norm == 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / norm)
    }

    pub fn cosine(&self, other: &TermVector) -> f64 {
        let (na, nb) = (self.l2_norm(), other.l2_norm());
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small.iter().map(|(t, w)| w * large.get(t)).sum();
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

impl FromIterator<(String, f64)> for TermVector {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        let mut v = TermVector::new();
        for (t, w) in iter {
            v.set(t, w);
        }
        v
    }
}

/// idf(term) = ln(N / df) over all taxonomy documents, stopwords excluded.
pub fn compute_idf(tax: &Taxonomy) -> BTreeMap<String, f64> {
    let n = tax.doc_count() as f64;
    let mut df: BTreeMap<String, u64> = BTreeMap::new();
    for cat in tax.categories() {
        for doc in tax.docs(cat.id) {
            let mut seen: HashSet<String> = HashSet::new();
            for tok in tokenize(&doc.text) {
                if !is_stopword(&tok.text) && seen.insert(tok.text.clone()) {
                    *df.entry(tok.text).or_insert(0) += 1;
                }
            }
        }
    }
    df.into_iter()
        .map(|(term, d)| (term, (n / d as f64).ln()))
        .collect()
}

/// tf-idf vector of one text. Terms missing from `idf` are skipped.
pub fn term_vector(text: &str, idf: &BTreeMap<String, f64>) -> TermVector {
    let mut tf: HashMap<String, u64> = HashMap::new();
    for tok in tokenize(text) {
        if !is_stopword(&tok.text) {
            *tf.entry(tok.text).or_insert(0) += 1;
        }
    }
    tf.into_iter()
        .filter_map(|(term, count)| {
            idf.get(&term).map(|&w| (term, count as f64 * w))
        })
        .collect()
}

/// Per-category average of document tf-idf vectors, unmerged and
/// unnormalized.
pub fn raw_centroids(tax: &Taxonomy, idf: &BTreeMap<String, f64>) -> Vec<TermVector> {
    let mut centroids = Vec::with_capacity(tax.len());
    for cat in tax.categories() {
        let docs = tax.docs(cat.id);
        let mut mu = TermVector::new();
        for doc in docs {
            mu.add_scaled(&term_vector(&doc.text, idf), 1.0);
        }
        if !docs.is_empty() {
            mu = mu.scaled(1.0 / docs.len() as f64);
        }
        centroids.push(mu);
    }
    centroids
}

/// Result of the centroid build: merged, normalized centroids plus the idf
/// table they were built with, and the categories whose centroid came out
/// empty.
#[derive(Debug)]
pub struct CentroidBuild {
    pub centroids: BTreeMap<CategoryId, TermVector>,
    pub idf: BTreeMap<String, f64>,
    pub empty_categories: Vec<CategoryId>,
}

/// Builds per-category centroids: tf-idf averages merged bottom-up with the
/// same recursion as concept enrichment (children weighted 1−alpha), then
/// L2-normalized.
pub fn build_centroids(tax: &Taxonomy, alpha_centroid: f64) -> CentroidBuild {
    assert!(
        (0.0..=1.0).contains(&alpha_centroid),
        "alpha_centroid must be in [0,1], got {alpha_centroid}"
    );
    let idf = compute_idf(tax);
    let raw = raw_centroids(tax, &idf);

    let mut merged: Vec<TermVector> = vec![TermVector::new(); tax.len()];
    for idx in (0..tax.len()).rev() {
        let cat = tax.category(CategoryId(idx as u32));
        if cat.children.is_empty() {
            merged[idx] = raw[idx].clone();
            continue;
        }
        let mut mu = raw[idx].scaled(alpha_centroid);
        let child_scale = (1.0 - alpha_centroid) / cat.children.len() as f64;
        for ch in &cat.children {
            let child = merged[ch.index()].clone();
            mu.add_scaled(&child, child_scale);
        }
        merged[idx] = mu;
    }

    let mut centroids = BTreeMap::new();
    let mut empty_categories = Vec::new();
    for (idx, mu) in merged.into_iter().enumerate() {
        let id = CategoryId(idx as u32);
        let normalized = mu.normalized();
        if normalized.is_empty() {
            empty_categories.push(id);
        }
        centroids.insert(id, normalized);
    }
    CentroidBuild {
        centroids,
        idf,
        empty_categories,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Blend weight of a category's own centroid against its children's.
    pub alpha_centroid: f64,
    /// Weight of entity evidence against term evidence in the final score.
    pub tau: f64,
    /// Default number of ranked categories returned.
    pub k: usize,
    /// Longest-match window for entity detection, in tokens.
    pub segment_window: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha_centroid: 0.7,
            tau: 0.8,
            k: 5,
            segment_window: 4,
        }
    }
}

/// Everything needed to classify text: centroids, the entity → category
/// index, the detection lexicon, and the idf table.
#[derive(Debug)]
pub struct ClassifierModel {
    pub tax: Taxonomy,
    pub centroids: BTreeMap<CategoryId, TermVector>,
    pub entity_index: BTreeMap<String, Vec<(CategoryId, f64)>>,
    pub lexicon: PhraseLexicon,
    pub idf: BTreeMap<String, f64>,
    pub params: ModelParams,
}

/// Ranked categories for one text plus the entities detected in it.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub ranked: Vec<(CategoryId, f64)>,
    pub detected_entities: Vec<(String, Range<usize>)>,
}

/// Per-category (id, term score, entity score) triples for one text,
/// before blending. Lets callers re-blend under different tau values
/// without recomputing similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreParts {
    pub per_category: Vec<(CategoryId, f64, f64)>,
    pub detected_entities: Vec<(String, Range<usize>)>,
}

/// Blends term and entity scores as (1 − tau)·term + tau·entity, then ranks
/// by score descending with category id as the tie-break, keeping the top k.
pub fn blend_and_rank(
    per_category: &[(CategoryId, f64, f64)],
    tau: f64,
    k: usize,
) -> Vec<(CategoryId, f64)> {
    let mut scored: Vec<(CategoryId, f64)> = per_category
        .iter()
        .map(|&(id, term, entity)| (id, (1.0 - tau) * term + tau * entity))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

impl ClassifierModel {
    /// Assembles a model from a centroid build and an enriched taxonomy.
    /// The detection lexicon contains exactly the attached entities.
    pub fn assemble(
        tax: Taxonomy,
        build: CentroidBuild,
        enriched: &EnrichedTaxonomy,
        params: ModelParams,
    ) -> ClassifierModel {
        let mut entity_index = BTreeMap::new();
        for att in enriched.attachments() {
            entity_index.insert(att.entity.clone(), att.ranked.clone());
        }
        let lexicon = PhraseLexicon::new(entity_index.keys().cloned());
        ClassifierModel {
            tax,
            centroids: build.centroids,
            entity_index,
            lexicon,
            idf: build.idf,
            params,
        }
    }

    /// Per-category term and entity scores for `text`, before blending,
    /// in category id order, plus the detected entities.
    pub fn score_parts(&self, text: &str) -> ScoreParts {
        let text_vec = term_vector(text, &self.idf);
        let detections = self.lexicon.segment(text, self.params.segment_window);

        let mut entity_score: HashMap<CategoryId, f64> = HashMap::new();
        for m in &detections {
            if let Some(ranked) = self.entity_index.get(&m.phrase) {
                for &(cat, prob) in ranked {
                    *entity_score.entry(cat).or_insert(0.0) += prob;
                }
            }
        }
        let n_detected = detections.len() as f64;

        let per_category = self
            .tax
            .categories()
            .map(|cat| {
                let term = self
                    .centroids
                    .get(&cat.id)
                    .map_or(0.0, |c| text_vec.cosine(c));
                let entity = if n_detected > 0.0 {
                    entity_score.get(&cat.id).copied().unwrap_or(0.0) / n_detected
                } else {
                    0.0
                };
                (cat.id, term, entity)
            })
            .collect();

        ScoreParts {
            per_category,
            detected_entities: detections
                .into_iter()
                .map(|m| (m.phrase, m.span))
                .collect(),
        }
    }

    /// Scores `text` against every category and returns the top `k`.
    pub fn score_top(&self, text: &str, k: usize) -> Classification {
        assert!(k >= 1, "k must be at least 1");
        let parts = self.score_parts(text);
        Classification {
            ranked: blend_and_rank(&parts.per_category, self.params.tau, k),
            detected_entities: parts.detected_entities,
        }
    }

    /// [`ClassifierModel::score_top`] with the model's default k.
    pub fn score(&self, text: &str) -> Classification {
        self.score_top(text, self.params.k)
    }
}

/// Classifies one text per input line and writes
/// line_number TAB rank TAB category_path TAB score rows (both 1-based).
pub fn classify_stream(
    model: &ClassifierModel,
    input: impl BufRead,
    mut out: impl Write,
    k: usize,
) -> io::Result<()> {
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim_end_matches(['\r', '\n']);
        let result = model.score_top(text, k);
        for (rank, (cat, score)) in result.ranked.iter().enumerate() {
            let path = &model.tax.category(*cat).path;
            writeln!(out, "{}\t{}\t{path}\t{score}", lineno + 1, rank + 1)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept_kb::{ConceptKb, ConceptSimilarity};
    use crate::concept_vectors::ConceptVector;
    use crate::enrichment::attach_entities;
    use crate::entity_typing::TypedEntity;
    use crate::taxonomy::load_taxonomy_from;
    use std::io::Cursor;

    fn tax_from(cats: &str, docs: &str) -> Taxonomy {
        load_taxonomy_from(Cursor::new(cats.to_string()), Cursor::new(docs.to_string())).unwrap()
    }

    fn tv(entries: &[(&str, f64)]) -> TermVector {
        entries.iter().map(|&(t, w)| (t.to_string(), w)).collect()
    }

    #[test]
    fn cosine_basics() {
        let a = tv(&[("x", 1.0), ("y", 1.0)]);
        let b = tv(&[("x", 2.0), ("y", 2.0)]);
        assert!((a.cosine(&b) - 1.0).abs() < 1e-12);
        let c = tv(&[("z", 3.0)]);
        assert_eq!(a.cosine(&c), 0.0);
        assert_eq!(a.cosine(&TermVector::new()), 0.0);
    }

    #[test]
    fn idf_counts_documents() {
        let tax = tax_from(
            "/R\n/R/A\n/R/B\n",
            "d1\t/R/A\tphone call\nd2\t/R/B\tcar wash\nd3\t/R/B\tcar phone\n",
        );
        let idf = compute_idf(&tax);
        // N=3; phone in 2 docs, car in 2, call/wash in 1
        assert!((idf["phone"] - (3.0f64 / 2.0).ln()).abs() < 1e-12);
        assert!((idf["call"] - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn idf_excludes_stopwords() {
        let tax = tax_from("/R\n", "d1\t/R\tthe phone is the best\n");
        let idf = compute_idf(&tax);
        assert!(!idf.contains_key("the"));
        assert!(!idf.contains_key("is"));
        assert!(idf.contains_key("phone"));
    }

    #[test]
    fn term_vector_skips_unknown_terms() {
        let mut idf = BTreeMap::new();
        idf.insert("phone".to_string(), 2.0);
        let v = term_vector("phone phone zebra", &idf);
        assert_eq!(v.len(), 1);
        assert!((v.get("phone") - 4.0).abs() < 1e-12);
    }

    #[test]
    fn raw_centroid_averages_doc_vectors() {
        // fixed idf, two docs: average must be the midpoint
        let tax = tax_from("/R\n", "d1\t/R\talpha alpha\nd2\t/R\tbeta beta\n");
        let mut idf = BTreeMap::new();
        idf.insert("alpha".to_string(), 1.0);
        idf.insert("beta".to_string(), 1.0);
        let raw = raw_centroids(&tax, &idf);
        assert!((raw[0].get("alpha") - 1.0).abs() < 1e-12);
        assert!((raw[0].get("beta") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn raw_centroid_is_average_invariant() {
        let mut idf = BTreeMap::new();
        idf.insert("alpha".to_string(), 1.5);
        idf.insert("beta".to_string(), 0.5);
        let once = tax_from("/R\n", "d1\t/R\talpha beta\n");
        let twice = tax_from("/R\n", "d1\t/R\talpha beta\nd2\t/R\talpha beta\n");
        let c1 = raw_centroids(&once, &idf);
        let c2 = raw_centroids(&twice, &idf);
        assert_eq!(c1[0], c2[0]);
    }

    #[test]
    fn single_doc_centroid_is_normalized_doc_vector() {
        let tax = tax_from(
            "/R\n/R/A\n/R/B\n",
            "d1\t/R/A\tphone phone call\nd2\t/R/B\tcar wash\n",
        );
        let build = build_centroids(&tax, 1.0);
        let a = tax.id_of("/R/A").unwrap();
        let expected = term_vector("phone phone call", &build.idf).normalized();
        assert_eq!(build.centroids[&a], expected);
        assert!((build.centroids[&a].l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_disjoint_doc_keeps_centroid_direction() {
        let once = tax_from(
            "/R\n/R/A\n/R/B\n",
            "d1\t/R/A\talpha beta\nd2\t/R/B\tgamma delta\n",
        );
        let twice = tax_from(
            "/R\n/R/A\n/R/B\n",
            "d1\t/R/A\talpha beta\nd1b\t/R/A\talpha beta\nd2\t/R/B\tgamma delta\n",
        );
        let c1 = build_centroids(&once, 1.0);
        let c2 = build_centroids(&twice, 1.0);
        let a = once.id_of("/R/A").unwrap();
        for (term, w) in c1.centroids[&a].iter() {
            assert!(
                (w - c2.centroids[&a].get(term)).abs() < 1e-12,
                "term {term} moved"
            );
        }
    }

    #[test]
    fn single_taxonomy_doc_gives_empty_flagged_centroid() {
        // N=1 → idf = ln(1/1) = 0 for every term
        let tax = tax_from("/R\n", "d1\t/R\tphone call\n");
        let build = build_centroids(&tax, 1.0);
        assert!(build.centroids[&tax.root()].is_empty());
        assert_eq!(build.empty_categories, vec![tax.root()]);
    }

    #[test]
    fn chain_merge_inherits_child_direction() {
        let tax = tax_from(
            "/R\n/R/A\n",
            "d1\t/R/A\tphone call phone\nd2\t/R/A\tphone wire\n",
        );
        let build = build_centroids(&tax, 0.5);
        let root = build.centroids[&tax.root()].clone();
        let a = build.centroids[&tax.id_of("/R/A").unwrap()].clone();
        assert!(!root.is_empty());
        assert!((root.cosine(&a) - 1.0).abs() < 1e-12, "root must align with its only child");
    }

    #[test]
    fn alpha_one_merge_is_identity() {
        let tax = tax_from(
            "/R\n/R/A\n/R/B\n",
            "d0\t/R\troot words here\nd1\t/R/A\tphone call\nd2\t/R/B\tcar wash\n",
        );
        let build = build_centroids(&tax, 1.0);
        let idf = compute_idf(&tax);
        let raw = raw_centroids(&tax, &idf);
        for cat in tax.categories() {
            assert_eq!(build.centroids[&cat.id], raw[cat.id.index()].normalized());
        }
    }

    #[test]
    fn centroids_have_unit_norm_or_are_empty_and_flagged() {
        let tax = tax_from(
            "/R\n/R/A\n/R/B\n/R/B/C\n",
            "d1\t/R/A\tphone call\nd2\t/R/B\tcar wash\n",
        );
        let build = build_centroids(&tax, 0.7);
        for (id, c) in &build.centroids {
            if c.is_empty() {
                assert!(build.empty_categories.contains(id));
            } else {
                assert!((c.l2_norm() - 1.0).abs() < 1e-12);
            }
        }
        // C has no docs and no descendants
        let c = tax.id_of("/R/B/C").unwrap();
        assert!(build.empty_categories.contains(&c));
    }

    fn toy_model(tau: f64) -> ClassifierModel {
        let cats = "/R\n/R/Phones\n/R/Cars\n";
        let docs = "d1\t/R/Phones\tphone call signal antenna\n\
                    d2\t/R/Phones\tphone battery screen\n\
                    d3\t/R/Cars\tcar engine wheel\n\
                    d4\t/R/Cars\tcar brake wheel\n";
        let tax = tax_from(cats, docs);
        let build = build_centroids(&tax, 0.7);

        let phones = tax.id_of("/R/Phones").unwrap();
        let cars = tax.id_of("/R/Cars").unwrap();
        let mut vectors = BTreeMap::new();
        let mut vp = ConceptVector::new();
        vp.set("phone", 5.0);
        vectors.insert(phones, vp);
        let mut vc = ConceptVector::new();
        vc.set("car", 5.0);
        vectors.insert(cars, vc);

        let mut typed = BTreeMap::new();
        let mut galaxy = ConceptVector::new();
        galaxy.set("phone", 0.9);
        typed.insert(
            "galaxy nexus".to_string(),
            TypedEntity {
                entity: "galaxy nexus".to_string(),
                concepts: galaxy,
            },
        );
        let mut sedan = ConceptVector::new();
        sedan.set("car", 0.8);
        typed.insert(
            "sedan".to_string(),
            TypedEntity {
                entity: "sedan".to_string(),
                concepts: sedan,
            },
        );

        let kb = ConceptKb::default();
        let sim = ConceptSimilarity::ExactMatch;
        let enriched = attach_entities(tax_from(cats, docs), &vectors, &typed, &sim, &kb, 2, 1.0);
        ClassifierModel::assemble(
            tax,
            build,
            &enriched,
            ModelParams {
                alpha_centroid: 0.7,
                tau,
                k: 3,
                segment_window: 4,
            },
        )
    }

    #[test]
    fn tau_zero_matches_pure_centroid_ranking() {
        let model = toy_model(0.0);
        let text = "phone battery antenna";
        let got = model.score_top(text, 3);
        let text_vec = term_vector(text, &model.idf);
        let mut expect: Vec<(CategoryId, f64)> = model
            .centroids
            .iter()
            .map(|(&id, c)| (id, text_vec.cosine(c)))
            .collect();
        expect.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let got_ids: Vec<_> = got.ranked.iter().map(|(id, _)| *id).collect();
        let expect_ids: Vec<_> = expect.iter().take(3).map(|(id, _)| *id).collect();
        assert_eq!(got_ids, expect_ids);
        for ((_, gs), (_, es)) in got.ranked.iter().zip(expect.iter()) {
            assert!((gs - es).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_one_single_entity_matches_attachment_ranking() {
        let model = toy_model(1.0);
        let got = model.score_top("galaxy nexus", 3);
        let attachment = &model.entity_index["galaxy nexus"];
        assert_eq!(got.detected_entities.len(), 1);
        for (i, &(cat, prob)) in attachment.iter().enumerate() {
            assert_eq!(got.ranked[i].0, cat);
            assert!((got.ranked[i].1 - prob).abs() < 1e-12);
        }
    }

    #[test]
    fn entity_text_ranks_entity_category_first() {
        let model = toy_model(0.8);
        let got = model.score("galaxy nexus spec");
        let phones = model.tax.id_of("/R/Phones").unwrap();
        assert_eq!(got.ranked[0].0, phones);
        assert_eq!(
            got.detected_entities,
            vec![("galaxy nexus".to_string(), 0..12)]
        );
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        for tau in [0.0, 0.3, 0.8, 1.0] {
            let model = toy_model(tau);
            for text in ["phone", "car wheel", "galaxy nexus sedan", "", "zzz qqq"] {
                for (_, s) in model.score_top(text, 3).ranked {
                    assert!((0.0..=1.0).contains(&s), "tau={tau} text={text:?} s={s}");
                }
            }
        }
    }

    #[test]
    fn tau_difference_matches_score_gap() {
        let text = "phone battery galaxy nexus";
        let taus = [0.0, 0.25, 0.5, 0.75, 1.0];
        let models: Vec<ClassifierModel> = taus.iter().map(|&t| toy_model(t)).collect();
        let term_part = {
            let m = &models[0];
            let v = term_vector(text, &m.idf);
            let by_cat: BTreeMap<CategoryId, f64> = m
                .centroids
                .iter()
                .map(|(&id, c)| (id, v.cosine(c)))
                .collect();
            by_cat
        };
        for cat in models[0].tax.categories().map(|c| c.id).collect::<Vec<_>>() {
            let finals: Vec<f64> = models
                .iter()
                .map(|m| {
                    m.score_top(text, 3)
                        .ranked
                        .iter()
                        .find(|(id, _)| *id == cat)
                        .map(|(_, s)| *s)
                        .unwrap()
                })
                .collect();
            // final(tau) is linear in tau: slope = entity_score - term_score
            let slope01 = finals[1] - finals[0];
            for w in finals.windows(2) {
                assert!((w[1] - w[0] - slope01).abs() < 1e-12);
            }
            // at tau=0 the final equals the term score
            assert!((finals[0] - term_part[&cat]).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_text_scores_zero_everywhere() {
        let model = toy_model(0.8);
        let got = model.score("");
        assert!(got.detected_entities.is_empty());
        assert!(got.ranked.iter().all(|(_, s)| *s == 0.0));
        // deterministic tie-break: ascending id
        let ids: Vec<u32> = got.ranked.iter().map(|(c, _)| c.0).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn classify_stream_empty_input() {
        let model = toy_model(0.8);
        let mut out = Vec::new();
        classify_stream(&model, Cursor::new(String::new()), &mut out, 3).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn classify_stream_one_record_per_line_per_rank() {
        let model = toy_model(0.8);
        let input = "galaxy nexus spec\ncar brake\n";
        let mut out = Vec::new();
        classify_stream(&model, Cursor::new(input.to_string()), &mut out, 2).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("1\t1\t"));
        assert!(lines[1].starts_with("1\t2\t"));
        assert!(lines[2].starts_with("2\t1\t"));
        for line in &lines {
            assert_eq!(line.split('\t').count(), 4);
        }

        let mut out2 = Vec::new();
        classify_stream(&model, Cursor::new(input.to_string()), &mut out2, 2).unwrap();
        assert_eq!(out, out2);
    }
}
