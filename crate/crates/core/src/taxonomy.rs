//! Hierarchical category tree with pre-classified documents.
//!
//! Categories are identified by slash-delimited paths ("/Top/Shopping");
//! ids are dense integers assigned in file order, so a parent's id is always
//! smaller than its children's. The tree is immutable after loading.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Dense integer identifier of a category within one [`Taxonomy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryId(pub u32);

impl CategoryId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for CategoryId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone)]
pub struct Category {
    pub id: CategoryId,
    /// Full slash-delimited path, e.g. "/Shopping/Consumer_Electronics".
    pub path: String,
    pub parent: Option<CategoryId>,
    pub children: Vec<CategoryId>,
    /// Root has depth 0; depth(child) = depth(parent) + 1.
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct Document {
    pub id: String,
    pub category: CategoryId,
    pub text: String,
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: orphan category {path:?}: parent segment missing")]
    OrphanCategory { line: usize, path: String },
    #[error("line {line}: duplicate category {path:?}")]
    DuplicateCategory { line: usize, path: String },
    #[error("line {line}: second root {path:?}: taxonomy already has a root")]
    MultipleRoots { line: usize, path: String },
    #[error("line {line}: document references unknown category {path:?}")]
    UnknownCategory { line: usize, path: String },
    #[error("line {line}: duplicate document {id:?} in category {path:?}")]
    DuplicateDocument { line: usize, id: String, path: String },
    #[error("cycle detected at category {path:?}")]
    CycleDetected { path: String },
    #[error("unknown category id {0}")]
    UnknownId(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("filter would prune the root category")]
    RootPruned,
}

/// Immutable category tree plus the documents classified into each category.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    categories: Vec<Category>,
    docs_by_category: Vec<Vec<Document>>,
    path_index: HashMap<String, CategoryId>,
}

impl Taxonomy {
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    /// The single root category (always id 0).
    pub fn root(&self) -> CategoryId {
        CategoryId(0)
    }

    pub fn get(&self, id: CategoryId) -> Option<&Category> {
        self.categories.get(id.index())
    }

    /// Panics on an id from a different taxonomy; use [`Taxonomy::get`] when
    /// the id is untrusted.
    pub fn category(&self, id: CategoryId) -> &Category {
        &self.categories[id.index()]
    }

    pub fn id_of(&self, path: &str) -> Option<CategoryId> {
        self.path_index.get(path).copied()
    }

    /// Categories in id order (parent before child).
    pub fn categories(&self) -> impl Iterator<Item = &Category> {
        self.categories.iter()
    }

    pub fn docs(&self, id: CategoryId) -> &[Document] {
        &self.docs_by_category[id.index()]
    }

    /// Total number of documents across all categories.
    pub fn doc_count(&self) -> usize {
        self.docs_by_category.iter().map(Vec::len).sum()
    }

    /// All strict descendants of `t` in pre-order.
    pub fn descendants(&self, t: CategoryId) -> Result<Vec<CategoryId>, TaxonomyError> {
        if self.get(t).is_none() {
            return Err(TaxonomyError::UnknownId(t.0));
        }
        let mut out = Vec::new();
        let mut stack: Vec<CategoryId> = self.category(t).children.iter().rev().copied().collect();
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.category(id).children.iter().rev());
        }
        Ok(out)
    }

    /// Per-category document count of the subtree rooted at each category.
    pub fn subtree_doc_counts(&self) -> Vec<usize> {
        let mut counts: Vec<usize> = self.docs_by_category.iter().map(Vec::len).collect();
        for idx in (0..self.categories.len()).rev() {
            if let Some(parent) = self.categories[idx].parent {
                counts[parent.index()] += counts[idx];
            }
        }
        counts
    }

    // Structural sanity check: single root, consistent links, no cycles,
    // connected. Loading and filtering both end here.
    fn validate(&self) -> Result<(), TaxonomyError> {
        let roots: Vec<_> = self.categories.iter().filter(|c| c.parent.is_none()).collect();
        if self.categories.is_empty() || roots.len() != 1 || roots[0].id != CategoryId(0) {
            return Err(TaxonomyError::InvalidParameter(
                "taxonomy must have exactly one root with id 0".into(),
            ));
        }
        for cat in &self.categories {
            if let Some(p) = cat.parent {
                if p >= cat.id {
                    return Err(TaxonomyError::CycleDetected {
                        path: cat.path.clone(),
                    });
                }
                let parent = self.category(p);
                if parent.depth + 1 != cat.depth || !parent.children.contains(&cat.id) {
                    return Err(TaxonomyError::InvalidParameter(format!(
                        "inconsistent parent/child links at {:?}",
                        cat.path
                    )));
                }
            }
            for &ch in &cat.children {
                if self.get(ch).map(|c| c.parent) != Some(Some(cat.id)) {
                    return Err(TaxonomyError::InvalidParameter(format!(
                        "inconsistent child link at {:?}",
                        cat.path
                    )));
                }
            }
        }
        // parent(id) < id for all non-roots implies every node reaches the
        // root, so the tree is connected and acyclic.
        Ok(())
    }
}

/// Loads a taxonomy from a category file and a document file (see the file
/// formats in the crate README).
pub fn load_taxonomy(
    category_file: &Path,
    document_file: &Path,
) -> Result<Taxonomy, TaxonomyError> {
    let cats = open(category_file)?;
    let docs = open(document_file)?;
    load_taxonomy_from(cats, docs)
}

fn open(path: &Path) -> Result<BufReader<std::fs::File>, TaxonomyError> {
    std::fs::File::open(path)
        .map(BufReader::new)
        .map_err(|source| TaxonomyError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Reader-based variant of [`load_taxonomy`].
pub fn load_taxonomy_from(
    categories: impl BufRead,
    documents: impl BufRead,
) -> Result<Taxonomy, TaxonomyError> {
    let mut tax = parse_categories(categories)?;
    parse_documents(documents, &mut tax)?;
    tax.validate()?;
    Ok(tax)
}

fn parse_categories(reader: impl BufRead) -> Result<Taxonomy, TaxonomyError> {
    let mut categories: Vec<Category> = Vec::new();
    let mut path_index: HashMap<String, CategoryId> = HashMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| TaxonomyError::Io {
            path: PathBuf::from("<categories>"),
            source,
        })?;
        let path = line.trim();
        if path.is_empty() || path.starts_with('#') {
            continue;
        }
        let segments = split_path(path).ok_or_else(|| TaxonomyError::MalformedLine {
            line: lineno,
            reason: format!("bad category path {path:?}"),
        })?;
        if path_index.contains_key(path) {
            return Err(TaxonomyError::DuplicateCategory {
                line: lineno,
                path: path.to_string(),
            });
        }
        let depth = segments.len() - 1;
        let parent = if depth == 0 {
            if !categories.is_empty() {
                return Err(TaxonomyError::MultipleRoots {
                    line: lineno,
                    path: path.to_string(),
                });
            }
            None
        } else {
            let parent_path = &path[..path.rfind('/').unwrap()];
            Some(*path_index.get(parent_path).ok_or_else(|| {
                TaxonomyError::OrphanCategory {
                    line: lineno,
                    path: path.to_string(),
                }
            })?)
        };

        let id = CategoryId(categories.len() as u32);
        if let Some(p) = parent {
            categories[p.index()].children.push(id);
        }
        path_index.insert(path.to_string(), id);
        categories.push(Category {
            id,
            path: path.to_string(),
            parent,
            children: Vec::new(),
            depth,
        });
    }

    if categories.is_empty() {
        return Err(TaxonomyError::MalformedLine {
            line: 0,
            reason: "category file contains no categories".into(),
        });
    }
    let docs_by_category = vec![Vec::new(); categories.len()];
    Ok(Taxonomy {
        categories,
        docs_by_category,
        path_index,
    })
}

// "/A/B" -> ["A", "B"]; rejects empty segments, missing leading slash,
// trailing slash.
fn split_path(path: &str) -> Option<Vec<&str>> {
    let rest = path.strip_prefix('/')?;
    if rest.is_empty() {
        return None;
    }
    let segments: Vec<&str> = rest.split('/').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return None;
    }
    Some(segments)
}

fn parse_documents(reader: impl BufRead, tax: &mut Taxonomy) -> Result<(), TaxonomyError> {
    let mut seen: HashSet<(CategoryId, String)> = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| TaxonomyError::Io {
            path: PathBuf::from("<documents>"),
            source,
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            continue;
        }
        let mut cols = line.splitn(3, '\t');
        let (Some(doc_id), Some(cat_path), Some(raw_text)) =
            (cols.next(), cols.next(), cols.next())
        else {
            return Err(TaxonomyError::MalformedLine {
                line: lineno,
                reason: "expected 3 tab-separated columns".into(),
            });
        };
        if raw_text.contains('\t') {
            return Err(TaxonomyError::MalformedLine {
                line: lineno,
                reason: "text column contains a tab".into(),
            });
        }
        let text = raw_text.replace("\\n", "\n");
        if text.trim().is_empty() {
            return Err(TaxonomyError::MalformedLine {
                line: lineno,
                reason: "document text is empty".into(),
            });
        }
        let category =
            tax.id_of(cat_path)
                .ok_or_else(|| TaxonomyError::UnknownCategory {
                    line: lineno,
                    path: cat_path.to_string(),
                })?;
        if !seen.insert((category, doc_id.to_string())) {
            return Err(TaxonomyError::DuplicateDocument {
                line: lineno,
                id: doc_id.to_string(),
                path: cat_path.to_string(),
            });
        }
        tax.docs_by_category[category.index()].push(Document {
            id: doc_id.to_string(),
            category,
            text,
        });
    }
    Ok(())
}

/// Prunes the tree to categories of depth at most `max_depth` whose surviving
/// subtree still holds at least `min_docs_subtree` documents.
///
/// Subtree counts are taken over the pruned tree itself (documents of pruned
/// categories are dropped first), which makes the filter idempotent. Errors
/// if the root itself would be pruned.
pub fn filter_taxonomy(
    tax: &Taxonomy,
    max_depth: usize,
    min_docs_subtree: usize,
) -> Result<Taxonomy, TaxonomyError> {
    if max_depth < 1 {
        return Err(TaxonomyError::InvalidParameter(
            "max_depth must be at least 1".into(),
        ));
    }
    let n = tax.len();
    let mut kept = vec![false; n];
    let mut kept_counts = vec![0usize; n];

    // Children have larger ids, so a reverse scan sees them first.
    for idx in (0..n).rev() {
        let cat = &tax.categories[idx];
        if cat.depth > max_depth {
            continue;
        }
        let mut count = tax.docs_by_category[idx].len();
        for ch in &cat.children {
            if kept[ch.index()] {
                count += kept_counts[ch.index()];
            }
        }
        kept_counts[idx] = count;
        kept[idx] = count >= min_docs_subtree;
    }
    if !kept[0] {
        return Err(TaxonomyError::RootPruned);
    }

    let mut remap: Vec<Option<CategoryId>> = vec![None; n];
    let mut next = 0u32;
    for (idx, &keep) in kept.iter().enumerate() {
        if keep {
            remap[idx] = Some(CategoryId(next));
            next += 1;
        }
    }

    let mut categories = Vec::with_capacity(next as usize);
    let mut docs_by_category = Vec::with_capacity(next as usize);
    let mut path_index = HashMap::new();
    for idx in 0..n {
        let Some(new_id) = remap[idx] else { continue };
        let old = &tax.categories[idx];
        // Kept categories always have kept parents: the depth bound and the
        // subtree count are both monotone up the tree.
        let parent = old.parent.map(|p| remap[p.index()].expect("kept parent"));
        let children = old
            .children
            .iter()
            .filter_map(|c| remap[c.index()])
            .collect();
        path_index.insert(old.path.clone(), new_id);
        categories.push(Category {
            id: new_id,
            path: old.path.clone(),
            parent,
            children,
            depth: old.depth,
        });
        let docs = tax.docs_by_category[idx]
            .iter()
            .map(|d| Document {
                id: d.id.clone(),
                category: new_id,
                text: d.text.clone(),
            })
            .collect();
        docs_by_category.push(docs);
    }

    let filtered = Taxonomy {
        categories,
        docs_by_category,
        path_index,
    };
    filtered.validate()?;
    Ok(filtered)
}
