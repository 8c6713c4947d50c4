//! Model directory persistence: dump files plus a checksummed manifest.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Cursor, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classifier::{ClassifierModel, ModelParams, TermVector};
use crate::config::PipelineConfig;
use crate::pipeline::BuildArtifacts;
use crate::taxonomy::{load_taxonomy_from, CategoryId, Taxonomy};
use crate::text::PhraseLexicon;

pub const FORMAT_VERSION: u32 = 1;

const MANIFEST: &str = "manifest.txt";
const CATEGORIES: &str = "categories.txt";
const CENTROIDS: &str = "centroids.tsv";
const IDF: &str = "idf.tsv";
const ATTACHMENTS: &str = "attachments.tsv";
const CONCEPT_VECTORS: &str = "concept_vectors.tsv";
const TYPED_ENTITIES: &str = "typed_entities.tsv";
const SKIPPED: &str = "skipped_entities.txt";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: expected key=value, got {text:?}")]
    MalformedManifest { line: usize, text: String },
    #[error("manifest is missing key {key:?}")]
    MissingKey { key: String },
    #[error("manifest key {key:?} has invalid value {value:?}")]
    InvalidValue { key: String, value: String },
    #[error("unsupported model format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("checksum mismatch for {file}: model directory is corrupt")]
    ChecksumMismatch { file: String },
    #[error("{file} line {line}: {reason}")]
    BadRow {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("{file}: unknown category path {path:?}")]
    UnknownCategory { file: String, path: String },
    #[error("taxonomy in model directory is invalid: {0}")]
    BadTaxonomy(#[from] crate::taxonomy::TaxonomyError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Writes the model directory: all dump files, then the manifest with
/// parameters and per-file checksums. Returns the per-file checksums.
pub fn save_model(
    artifacts: &BuildArtifacts,
    dir: &Path,
) -> Result<BTreeMap<String, String>, StoreError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();

    let mut categories = Vec::new();
    for cat in artifacts.model.tax.categories() {
        writeln!(categories, "{}", cat.path).expect("write to vec");
    }
    files.insert(CATEGORIES.into(), categories);

    let mut centroids = Vec::new();
    dump_term_vectors(&artifacts.model.centroids, &artifacts.model.tax, &mut centroids);
    files.insert(CENTROIDS.into(), centroids);

    let mut idf = Vec::new();
    for (term, value) in &artifacts.model.idf {
        writeln!(idf, "{term}\t{value}").expect("write to vec");
    }
    files.insert(IDF.into(), idf);

    let mut attachments = Vec::new();
    artifacts
        .enriched
        .dump_attachments(&mut attachments)
        .expect("write to vec");
    files.insert(ATTACHMENTS.into(), attachments);

    let mut vectors = Vec::new();
    crate::concept_vectors::dump_vectors(
        &artifacts.vectors,
        artifacts.enriched.taxonomy(),
        &mut vectors,
    )
    .expect("write to vec");
    files.insert(CONCEPT_VECTORS.into(), vectors);

    let mut typed = Vec::new();
    crate::entity_typing::dump_typed_entities(&artifacts.typed, &mut typed)
        .expect("write to vec");
    files.insert(TYPED_ENTITIES.into(), typed);

    let mut skipped = Vec::new();
    for entity in artifacts.enriched.skipped_entities() {
        writeln!(skipped, "{entity}").expect("write to vec");
    }
    files.insert(SKIPPED.into(), skipped);

    let mut checksums = BTreeMap::new();
    for (name, bytes) in &files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        checksums.insert(name.clone(), sha256_hex(bytes));
    }

    let mut manifest = Vec::new();
    writeln!(manifest, "format_version={FORMAT_VERSION}").expect("write to vec");
    for (key, value) in config_params(&artifacts.config) {
        writeln!(manifest, "{key}={value}").expect("write to vec");
    }
    for (name, hex) in &checksums {
        writeln!(manifest, "file.{name}={hex}").expect("write to vec");
    }
    let manifest_path = dir.join(MANIFEST);
    std::fs::write(&manifest_path, &manifest).map_err(io_err(&manifest_path))?;

    Ok(checksums)
}

fn config_params(cfg: &PipelineConfig) -> Vec<(&'static str, String)> {
    vec![
        ("alpha", cfg.alpha.to_string()),
        ("alpha_centroid", cfg.alpha_centroid.to_string()),
        ("beta", cfg.beta.to_string()),
        ("count_somewhat", cfg.count_somewhat.to_string()),
        ("k", cfg.k.to_string()),
        ("max_depth", cfg.max_depth.to_string()),
        ("max_len", cfg.max_len.to_string()),
        ("min_docs_subtree", cfg.min_docs_subtree.to_string()),
        ("similarity_mode", cfg.similarity_mode.as_str().to_string()),
        ("tau", cfg.tau.to_string()),
        ("temperature", cfg.temperature.to_string()),
    ]
}

fn dump_term_vectors(
    vectors: &BTreeMap<CategoryId, TermVector>,
    tax: &Taxonomy,
    out: &mut Vec<u8>,
) {
    let mut paths: Vec<(&str, CategoryId)> = vectors
        .keys()
        .map(|&id| (tax.category(id).path.as_str(), id))
        .collect();
    paths.sort();
    for (path, id) in paths {
        let mut rows: Vec<(&str, f64)> = vectors[&id].iter().collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (term, weight) in rows {
            writeln!(out, "{path}\t{term}\t{weight}").expect("write to vec");
        }
    }
}

/// Parsed manifest: format version, parameters, and per-file checksums.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub params: BTreeMap<String, String>,
    pub checksums: BTreeMap<String, String>,
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, StoreError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut params = BTreeMap::new();
    let mut checksums = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(StoreError::MalformedManifest {
                line: lineno + 1,
                text: line.to_string(),
            });
        };
        if let Some(file) = key.strip_prefix("file.") {
            checksums.insert(file.to_string(), value.to_string());
        } else {
            params.insert(key.to_string(), value.to_string());
        }
    }
    let version: u32 = parse_param(&params, "format_version")?;
    if version != FORMAT_VERSION {
        return Err(StoreError::UnsupportedVersion(version));
    }
    Ok(Manifest { params, checksums })
}

fn parse_param<T: std::str::FromStr>(
    params: &BTreeMap<String, String>,
    key: &str,
) -> Result<T, StoreError> {
    let value = params.get(key).ok_or_else(|| StoreError::MissingKey {
        key: key.to_string(),
    })?;
    value.parse().map_err(|_| StoreError::InvalidValue {
        key: key.to_string(),
        value: value.clone(),
    })
}

/// Reads one model file after verifying its checksum against the manifest.
pub fn read_verified(dir: &Path, manifest: &Manifest, file: &str) -> Result<Vec<u8>, StoreError> {
    let expected = manifest
        .checksums
        .get(file)
        .ok_or_else(|| StoreError::MissingKey {
            key: format!("file.{file}"),
        })?;
    let path = dir.join(file);
    let bytes = std::fs::read(&path).map_err(io_err(&path))?;
    if &sha256_hex(&bytes) != expected {
        return Err(StoreError::ChecksumMismatch {
            file: file.to_string(),
        });
    }
    Ok(bytes)
}

/// Loads and verifies a model directory back into a [`ClassifierModel`].
pub fn load_model(dir: &Path) -> Result<ClassifierModel, StoreError> {
    let manifest = load_manifest(dir)?;

    // verify everything up front so a corrupt directory fails before any
    // downstream output is written
    for file in manifest.checksums.keys() {
        read_verified(dir, &manifest, file)?;
    }

    let categories = read_verified(dir, &manifest, CATEGORIES)?;
    let tax = load_taxonomy_from(Cursor::new(categories), Cursor::new(Vec::new()))?;

    let centroids = parse_term_vectors(
        read_verified(dir, &manifest, CENTROIDS)?,
        CENTROIDS,
        &tax,
    )?;

    let mut idf = BTreeMap::new();
    for (lineno, line) in BufReader::new(Cursor::new(read_verified(dir, &manifest, IDF)?))
        .lines()
        .enumerate()
    {
        let line = line.map_err(io_err(&dir.join(IDF)))?;
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(term), Some(raw), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(StoreError::BadRow {
                file: IDF.into(),
                line: lineno + 1,
                reason: "expected 2 tab-separated columns".into(),
            });
        };
        let value: f64 = raw.parse().map_err(|_| StoreError::BadRow {
            file: IDF.into(),
            line: lineno + 1,
            reason: format!("bad idf value {raw:?}"),
        })?;
        idf.insert(term.to_string(), value);
    }

    let mut entity_index: BTreeMap<String, Vec<(CategoryId, f64)>> = BTreeMap::new();
    for (lineno, line) in
        BufReader::new(Cursor::new(read_verified(dir, &manifest, ATTACHMENTS)?))
            .lines()
            .enumerate()
    {
        let line = line.map_err(io_err(&dir.join(ATTACHMENTS)))?;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(StoreError::BadRow {
                file: ATTACHMENTS.into(),
                line: lineno + 1,
                reason: "expected 4 tab-separated columns".into(),
            });
        }
        let cat = tax.id_of(cols[1]).ok_or_else(|| StoreError::UnknownCategory {
            file: ATTACHMENTS.into(),
            path: cols[1].to_string(),
        })?;
        let prob: f64 = cols[2].parse().map_err(|_| StoreError::BadRow {
            file: ATTACHMENTS.into(),
            line: lineno + 1,
            reason: format!("bad probability {:?}", cols[2]),
        })?;
        let rank: usize = cols[3].parse().map_err(|_| StoreError::BadRow {
            file: ATTACHMENTS.into(),
            line: lineno + 1,
            reason: format!("bad rank {:?}", cols[3]),
        })?;
        let ranked = entity_index.entry(cols[0].to_string()).or_default();
        if rank != ranked.len() + 1 {
            return Err(StoreError::BadRow {
                file: ATTACHMENTS.into(),
                line: lineno + 1,
                reason: format!("rank {rank} out of order"),
            });
        }
        ranked.push((cat, prob));
    }

    let params = ModelParams {
        alpha_centroid: parse_param(&manifest.params, "alpha_centroid")?,
        tau: parse_param(&manifest.params, "tau")?,
        k: parse_param(&manifest.params, "k")?,
        segment_window: parse_param(&manifest.params, "max_len")?,
    };

    let lexicon = PhraseLexicon::new(entity_index.keys().cloned());
    Ok(ClassifierModel {
        tax,
        centroids,
        entity_index,
        lexicon,
        idf,
        params,
    })
}

fn parse_term_vectors(
    bytes: Vec<u8>,
    file: &str,
    tax: &Taxonomy,
) -> Result<BTreeMap<CategoryId, TermVector>, StoreError> {
    let mut out: BTreeMap<CategoryId, TermVector> = BTreeMap::new();
    for cat in tax.categories() {
        out.insert(cat.id, TermVector::new());
    }
    for (lineno, line) in BufReader::new(Cursor::new(bytes)).lines().enumerate() {
        let line = line.map_err(|source| StoreError::Io {
            path: PathBuf::from(file),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(path), Some(term), Some(raw), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(StoreError::BadRow {
                file: file.into(),
                line: lineno + 1,
                reason: "expected 3 tab-separated columns".into(),
            });
        };
        let id = tax.id_of(path).ok_or_else(|| StoreError::UnknownCategory {
            file: file.into(),
            path: path.to_string(),
        })?;
        let weight: f64 = raw.parse().map_err(|_| StoreError::BadRow {
            file: file.into(),
            line: lineno + 1,
            reason: format!("bad weight {raw:?}"),
        })?;
        out.get_mut(&id).expect("prefilled").set(term, weight);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::build_pipeline;

    fn toy_config(dir: &Path) -> PipelineConfig {
        std::fs::write(
            dir.join("cats.txt"),
            "/Top\n/Top/Phones\n/Top/Cars\n",
        )
        .unwrap();
        std::fs::write(
            dir.join("docs.tsv"),
            "d0\t/Top\tgeneral directory of pages\n\
             d1\t/Top/Phones\tsmartphone review with battery details\n\
             d2\t/Top/Phones\tnew smartphone and cellular phone models\n\
             d3\t/Top/Cars\tsedan engine and wheel report\n\
             d4\t/Top/Cars\tsedan brake test drive\n",
        )
        .unwrap();
        std::fs::write(
            dir.join("kb.tsv"),
            "smartphone\tgalaxy nexus\t30\nsmartphone\tiphone\t25\n\
             cellular phone\tgalaxy nexus\t18\ncellular phone\tiphone\t20\n\
             sedan\tcamry\t15\nsedan\taccord\t12\n",
        )
        .unwrap();
        PipelineConfig::with_inputs(
            dir.join("cats.txt"),
            dir.join("docs.tsv"),
            dir.join("kb.tsv"),
        )
    }

    #[test]
    fn save_then_load_round_trips_the_model() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = toy_config(tmp.path());
        let artifacts = build_pipeline(&cfg).unwrap();
        let model_dir = tmp.path().join("model");
        save_model(&artifacts, &model_dir).unwrap();

        let loaded = load_model(&model_dir).unwrap();
        assert_eq!(loaded.tax.len(), artifacts.model.tax.len());
        assert_eq!(loaded.centroids, artifacts.model.centroids);
        assert_eq!(loaded.entity_index, artifacts.model.entity_index);
        assert_eq!(loaded.idf, artifacts.model.idf);
        assert_eq!(loaded.params, artifacts.model.params);

        // loaded model classifies identically
        let text = "galaxy nexus battery";
        let a = artifacts.model.score(text);
        let b = loaded.score(text);
        assert_eq!(a.ranked, b.ranked);
    }

    #[test]
    fn rerun_gives_identical_checksums() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = toy_config(tmp.path());
        let a1 = build_pipeline(&cfg).unwrap();
        let a2 = build_pipeline(&cfg).unwrap();
        let c1 = save_model(&a1, &tmp.path().join("m1")).unwrap();
        let c2 = save_model(&a2, &tmp.path().join("m2")).unwrap();
        assert_eq!(c1, c2);
        let m1 = std::fs::read(tmp.path().join("m1").join(MANIFEST)).unwrap();
        let m2 = std::fs::read(tmp.path().join("m2").join(MANIFEST)).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn tampered_file_fails_checksum() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = toy_config(tmp.path());
        let artifacts = build_pipeline(&cfg).unwrap();
        let model_dir = tmp.path().join("model");
        save_model(&artifacts, &model_dir).unwrap();

        let target = model_dir.join(ATTACHMENTS);
        let mut bytes = std::fs::read(&target).unwrap();
        bytes.extend_from_slice(b"tampered\n");
        std::fs::write(&target, bytes).unwrap();

        let err = load_model(&model_dir).unwrap_err();
        assert!(matches!(err, StoreError::ChecksumMismatch { file } if file == ATTACHMENTS));
    }

    #[test]
    fn corrupt_manifest_fails_to_load() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = toy_config(tmp.path());
        let artifacts = build_pipeline(&cfg).unwrap();
        let model_dir = tmp.path().join("model");
        save_model(&artifacts, &model_dir).unwrap();

        std::fs::write(model_dir.join(MANIFEST), "format_version=1\nnot a pair\n").unwrap();
        assert!(load_model(&model_dir).is_err());

        std::fs::write(model_dir.join(MANIFEST), "format_version=99\n").unwrap();
        assert!(matches!(
            load_model(&model_dir),
            Err(StoreError::UnsupportedVersion(99))
        ));
    }

    #[test]
    fn missing_model_file_fails_to_load() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = toy_config(tmp.path());
        let artifacts = build_pipeline(&cfg).unwrap();
        let model_dir = tmp.path().join("model");
        save_model(&artifacts, &model_dir).unwrap();
        std::fs::remove_file(model_dir.join(IDF)).unwrap();
        assert!(load_model(&model_dir).is_err());
    }
}
