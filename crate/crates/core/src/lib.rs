//! Taxonomy enrichment and centroid text classification.
//!
//! The crate builds a text classifier over a hierarchical category tree.
//! Each category gets a centroid from its training documents and a concept
//! vector distilled from those documents through a concept knowledge base;
//! entities from the knowledge base are then attached to categories by
//! concept-vector relevance, and classification blends term and entity
//! evidence.

pub mod classifier;
pub mod concept_kb;
pub mod concept_vectors;
pub mod config;
pub mod enrichment;
pub mod entity_typing;
pub mod evaluation;
pub mod pipeline;
pub mod store;
pub mod taxonomy;
pub mod text;

pub use classifier::{
    build_centroids, classify_stream, Classification, ClassifierModel, ModelParams, TermVector,
};
pub use concept_kb::{build_entity_lexicon, load_kb, ConceptKb, ConceptSimilarity, KbError};
pub use concept_vectors::{
    base_vectors, collect_stats, enrich_vectors, segment_concepts, ConceptStats, ConceptVector,
};
pub use config::{ConfigError, PipelineConfig, SimilarityMode};
pub use enrichment::{attach_entities, relevance, EnrichedTaxonomy, EntityAttachment};
pub use evaluation::{
    evaluate_run, load_annotations, merge_annotations, precision_at_k, AnnotationSet, EvalError,
    EvalReport, Grade,
};
pub use entity_typing::{type_entities, typicality, TypedEntity, TypingError};
pub use pipeline::{build_pipeline, BuildArtifacts, BuildSummary, PipelineError};
pub use store::{load_manifest, load_model, save_model, Manifest, StoreError};
pub use taxonomy::{filter_taxonomy, load_taxonomy, CategoryId, Taxonomy, TaxonomyError};
