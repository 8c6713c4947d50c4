//! End-to-end build orchestration with stage-named errors.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::classifier::{build_centroids, ClassifierModel, ModelParams};
use crate::concept_kb::{load_kb, ConceptSimilarity};
use crate::concept_vectors::{base_vectors, collect_stats, enrich_vectors, ConceptVector};
use crate::config::{PipelineConfig, SimilarityMode};
use crate::enrichment::{attach_entities, EnrichedTaxonomy};
use crate::entity_typing::{type_entities, TypedEntity};
use crate::taxonomy::{filter_taxonomy, load_taxonomy, CategoryId};

/// A module error wrapped with the pipeline stage it came from.
#[derive(Debug, Error)]
#[error("stage {stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

fn at_stage<E: std::fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

/// Counts printed after a build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildSummary {
    pub categories: usize,
    pub documents: usize,
    pub entities_typed: usize,
    pub entities_attached: usize,
    pub entities_skipped: usize,
    pub empty_centroids: usize,
}

/// Everything a build produces: the classifier model plus the intermediate
/// artifacts worth persisting and the config that produced them.
#[derive(Debug)]
pub struct BuildArtifacts {
    pub model: ClassifierModel,
    pub enriched: EnrichedTaxonomy,
    pub typed: BTreeMap<String, TypedEntity>,
    pub vectors: BTreeMap<CategoryId, ConceptVector>,
    pub config: PipelineConfig,
    pub summary: BuildSummary,
}

fn similarity_for(
    mode: SimilarityMode,
    config: &PipelineConfig,
) -> Result<ConceptSimilarity, PipelineError> {
    match mode {
        SimilarityMode::ExactMatch => Ok(ConceptSimilarity::ExactMatch),
        SimilarityMode::CooccurrenceCosine => Ok(ConceptSimilarity::CooccurrenceCosine),
        SimilarityMode::Table => {
            let path = config.similarity.as_ref().ok_or_else(|| PipelineError {
                stage: "concept_kb.similarity",
                message: "similarity_mode=table requires a similarity file".into(),
            })?;
            ConceptSimilarity::load_table(path).map_err(at_stage("concept_kb.similarity"))
        }
    }
}

/// Runs ingest → vectors → typing → enrichment → attachment → centroids and
/// assembles the classifier model.
pub fn build_pipeline(config: &PipelineConfig) -> Result<BuildArtifacts, PipelineError> {
    config.validate().map_err(at_stage("config"))?;

    let full = load_taxonomy(&config.taxonomy, &config.documents)
        .map_err(at_stage("taxonomy.load"))?;
    let tax = filter_taxonomy(&full, config.max_depth, config.min_docs_subtree)
        .map_err(at_stage("taxonomy.filter"))?;

    let kb = load_kb(&config.kb_pairs).map_err(at_stage("concept_kb.load"))?;
    let simtab = similarity_for(config.similarity_mode, config)?;

    let stats = collect_stats(&tax, &kb, config.max_len);
    let base = base_vectors(&stats, &tax);
    let vectors = enrich_vectors(&base, &tax, config.alpha);

    let typed = type_entities(&kb, config.beta);

    let enriched = if typed.is_empty() {
        EnrichedTaxonomy::unattached(tax.clone(), Vec::new())
    } else if vectors.values().all(ConceptVector::is_empty) {
        let skipped = typed.keys().cloned().collect();
        EnrichedTaxonomy::unattached(tax.clone(), skipped)
    } else {
        attach_entities(
            tax.clone(),
            &vectors,
            &typed,
            &simtab,
            &kb,
            config.k,
            config.temperature,
        )
    };

    let build = build_centroids(&tax, config.alpha_centroid);
    let summary = BuildSummary {
        categories: tax.len(),
        documents: tax.doc_count(),
        entities_typed: typed.len(),
        entities_attached: enriched.attachment_len(),
        entities_skipped: enriched.skipped_entities().len(),
        empty_centroids: build.empty_categories.len(),
    };

    let params = ModelParams {
        alpha_centroid: config.alpha_centroid,
        tau: config.tau,
        k: config.k,
        segment_window: config.max_len,
    };
    let model = ClassifierModel::assemble(tax, build, &enriched, params);

    Ok(BuildArtifacts {
        model,
        enriched,
        typed,
        vectors,
        config: config.clone(),
        summary,
    })
}
