//! Typicality-filtered concept vectors for KB entities.

use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::concept_kb::ConceptKb;
use crate::concept_vectors::ConceptVector;

#[derive(Debug, Error)]
pub enum TypingError {
    #[error("pair ({concept:?}, {entity:?}) not in the knowledge base")]
    PairAbsent { concept: String, entity: String },
}

/// A KB entity with the concepts that survived the typicality threshold.
/// Weights are typicality scores in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct TypedEntity {
    pub entity: String,
    pub concepts: ConceptVector,
}

/// Typicality of entity `e` under concept `c`:
/// P(e|c) · P(c|e) = [n(c,e)/Σ_e n(c,·)] · [n(c,e)/Σ_c n(·,e)].
pub fn typicality(kb: &ConceptKb, c: &str, e: &str) -> Result<f64, TypingError> {
    let n = kb.count(c, e);
    if n == 0 {
        return Err(TypingError::PairAbsent {
            concept: c.to_string(),
            entity: e.to_string(),
        });
    }
    let p_e_given_c = n as f64 / kb.concept_total(c) as f64;
    let p_c_given_e = n as f64 / kb.entity_total(e) as f64;
    Ok(p_e_given_c * p_c_given_e)
}

/// Types every KB entity, keeping concepts with typicality strictly above
/// `beta` and dropping entities left with no concepts.
pub fn type_entities(kb: &ConceptKb, beta: f64) -> BTreeMap<String, TypedEntity> {
    assert!(beta >= 0.0, "beta must be non-negative, got {beta}");
    let mut out = BTreeMap::new();
    for entity in kb.entities() {
        let mut concepts = ConceptVector::new();
        for (concept, _) in kb.concepts_of(entity) {
            let score = typicality(kb, concept, entity).expect("pair comes from kb iteration");
            if score > beta {
                concepts.set(concept, score);
            }
        }
        if !concepts.is_empty() {
            out.insert(
                entity.to_string(),
                TypedEntity {
                    entity: entity.to_string(),
                    concepts,
                },
            );
        }
    }
    out
}

/// Writes entity TAB concept TAB typicality, sorted by
/// (entity, descending typicality, concept).
pub fn dump_typed_entities(
    typed: &BTreeMap<String, TypedEntity>,
    mut out: impl Write,
) -> io::Result<()> {
    for (entity, te) in typed {
        let mut rows: Vec<(&str, f64)> = te.concepts.iter().collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (concept, score) in rows {
            writeln!(out, "{entity}\t{concept}\t{score}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept_kb::load_kb_from;
    use std::io::Cursor;

    fn kb_from(pairs: &str) -> ConceptKb {
        load_kb_from(Cursor::new(pairs.to_string())).unwrap()
    }

    // Independent oracle: typicality from raw pair iteration, summing
    // marginals by brute force rather than using the KB's cached totals.
    fn oracle(kb: &ConceptKb, c: &str, e: &str) -> f64 {
        let n = kb.count(c, e) as f64;
        let concept_sum: u64 = kb.entities_of(c).map(|(_, n)| n).sum();
        let entity_sum: u64 = kb.concepts_of(e).map(|(_, n)| n).sum();
        (n / concept_sum as f64) * (n / entity_sum as f64)
    }

    #[test]
    fn lone_pair_has_typicality_one() {
        let kb = kb_from("phone\tgalaxy nexus\t10\n");
        assert_eq!(typicality(&kb, "phone", "galaxy nexus").unwrap(), 1.0);
    }

    #[test]
    fn split_concept_halves_typicality() {
        let kb = kb_from("phone\ta\t1\nphone\tb\t1\n");
        let got = typicality(&kb, "phone", "a").unwrap();
        assert!((got - 0.5).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn absent_pair_is_an_error() {
        let kb = kb_from("phone\ta\t1\n");
        assert!(matches!(
            typicality(&kb, "phone", "zzz"),
            Err(TypingError::PairAbsent { .. })
        ));
    }

    #[test]
    fn conditionals_sum_to_one() {
        let kb = kb_from(
            "phone\ta\t3\nphone\tb\t1\ncar\ta\t2\ncar\tc\t5\nboat\tb\t4\nboat\tc\t1\n",
        );
        for entity in kb.entities() {
            let sum: f64 = kb
                .concepts_of(entity)
                .map(|(_, n)| n as f64 / kb.entity_total(entity) as f64)
                .sum();
            assert!((sum - 1.0).abs() < 1e-12, "P(c|{entity}) sums to {sum}");
        }
        for concept in kb.concepts() {
            let sum: f64 = kb
                .entities_of(concept)
                .map(|(_, n)| n as f64 / kb.concept_total(concept) as f64)
                .sum();
            assert!((sum - 1.0).abs() < 1e-12, "P(e|{concept}) sums to {sum}");
        }
    }

    #[test]
    fn typicality_bounded_by_conditionals() {
        let kb = kb_from("phone\ta\t3\nphone\tb\t1\ncar\ta\t2\ncar\tc\t5\n");
        for concept in kb.concepts() {
            for (entity, n) in kb.entities_of(concept) {
                let t = typicality(&kb, concept, entity).unwrap();
                let p_e = n as f64 / kb.concept_total(concept) as f64;
                let p_c = n as f64 / kb.entity_total(entity) as f64;
                assert!(t <= p_e.min(p_c) + 1e-15);
                assert!(t <= 1.0);
                assert!((t - oracle(&kb, concept, entity)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn beta_zero_keeps_everything() {
        let kb = kb_from("phone\ta\t3\nphone\tb\t1\ncar\ta\t2\n");
        let typed = type_entities(&kb, 0.0);
        assert_eq!(typed.len(), 2);
        assert_eq!(typed["a"].concepts.len(), 2);
        assert_eq!(typed["b"].concepts.len(), 1);
    }

    #[test]
    fn beta_one_drops_everything() {
        let kb = kb_from("phone\ta\t3\nphone\tb\t1\ncar\ta\t2\n");
        // strict ">" means even a typicality of exactly 1 fails beta=1
        let kb_single = kb_from("phone\tx\t1\n");
        assert!(type_entities(&kb_single, 1.0).is_empty());
        assert!(type_entities(&kb, 1.0).is_empty());
    }

    #[test]
    fn weak_entity_dropped_at_paper_threshold() {
        // "longtail" occurs once under a concept with total 400:
        // P(e|c) = 1/400 = 0.0025, P(c|e) = 1 → typicality 0.0025 < 0.004
        let kb = kb_from(
            "phone\tpopular\t399\nphone\tlongtail\t1\ncar\tsedan\t9\ncar\tcoupe\t1\n",
        );
        let best = kb
            .concepts_of("longtail")
            .map(|(c, _)| oracle(&kb, c, "longtail"))
            .fold(f64::MIN, f64::max);
        assert!(best < 0.004, "fixture broken: best typicality {best}");
        let typed = type_entities(&kb, 0.004);
        assert!(!typed.contains_key("longtail"));
        assert!(typed.contains_key("popular"));
        assert!(typed.contains_key("sedan"));
    }

    #[test]
    fn raising_beta_never_adds() {
        let kb = kb_from(
            "phone\ta\t3\nphone\tb\t1\ncar\ta\t2\ncar\tc\t5\nboat\tb\t4\nboat\tc\t1\n",
        );
        let betas = [0.0, 0.01, 0.05, 0.1, 0.3, 0.9];
        let mut prev = type_entities(&kb, betas[0]);
        for &beta in &betas[1..] {
            let next = type_entities(&kb, beta);
            for (entity, te) in &next {
                let before = prev.get(entity).unwrap_or_else(|| {
                    panic!("entity {entity} appeared when beta rose to {beta}")
                });
                for (concept, _) in te.concepts.iter() {
                    assert!(
                        before.concepts.get(concept) > 0.0,
                        "concept {concept} appeared at beta {beta}"
                    );
                }
            }
            prev = next;
        }
    }

    #[test]
    fn scaling_counts_preserves_typicality() {
        let base = "phone\ta\t3\nphone\tb\t1\ncar\ta\t2\n";
        let scaled = "phone\ta\t21\nphone\tb\t7\ncar\ta\t14\n";
        let kb1 = kb_from(base);
        let kb2 = kb_from(scaled);
        for concept in kb1.concepts() {
            for (entity, _) in kb1.entities_of(concept) {
                let t1 = typicality(&kb1, concept, entity).unwrap();
                let t2 = typicality(&kb2, concept, entity).unwrap();
                assert!((t1 - t2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dump_sorts_by_entity_then_score() {
        let kb = kb_from("phone\ta\t3\nphone\tb\t1\ncar\ta\t2\n");
        let typed = type_entities(&kb, 0.0);
        let mut buf = Vec::new();
        dump_typed_entities(&typed, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("a\t"));
        assert!(lines[1].starts_with("a\t"));
        assert!(lines[2].starts_with("b\tphone\t"));
        let score0: f64 = lines[0].rsplit('\t').next().unwrap().parse().unwrap();
        let score1: f64 = lines[1].rsplit('\t').next().unwrap().parse().unwrap();
        assert!(score0 >= score1);
    }
}
