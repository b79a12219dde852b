use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use roberto_core::domain::{ConditionId, DocId, SymptomId};
use roberto_core::knowledge::{Condition, InfoDocument, KnowledgeBase, Symptom};

/// Scores every condition by walking the full symptom catalogue, then picks
/// the ranking by repeated selection of the best remaining entry.
pub fn rank(reported: &BTreeSet<SymptomId>, kb: &KnowledgeBase) -> Vec<(ConditionId, f64)> {
    let mut scored = Vec::new();
    for (cid, condition) in &kb.conditions {
        let mut total = 0.0;
        let mut present = 0.0;
        for sid in kb.symptoms.keys() {
            if let Some(w) = condition.symptom_weights.get(sid) {
                total += w;
                if reported.contains(sid) {
                    present += w;
                }
            }
        }
        if present > 0.0 {
            scored.push((cid.clone(), present / total));
        }
    }
    let mut ranked = Vec::new();
    while !scored.is_empty() && ranked.len() < 5 {
        let mut best = 0;
        for i in 1..scored.len() {
            let (ref id, s) = scored[i];
            let (ref best_id, best_s) = scored[best];
            if s > best_s || (s == best_s && id < best_id) {
                best = i;
            }
        }
        ranked.push(scored.remove(best));
    }
    ranked
}

/// A random KB with `n_conditions` conditions over `n_symptoms` symptoms.
/// Weights are drawn from a small grid so ties actually happen.
pub fn random_kb(rng: &mut impl Rng, n_conditions: usize, n_symptoms: usize) -> KnowledgeBase {
    let symptoms: BTreeMap<SymptomId, Symptom> = (0..n_symptoms)
        .map(|i| {
            (
                SymptomId::new(format!("s{i:02}")),
                Symptom {
                    name: format!("symptom {i}"),
                    synonyms: vec![],
                },
            )
        })
        .collect();
    let ids: Vec<SymptomId> = symptoms.keys().cloned().collect();
    let mut conditions = BTreeMap::new();
    for c in 0..n_conditions {
        let mut weights = BTreeMap::new();
        let n = rng.random_range(1..=6.min(n_symptoms));
        while weights.len() < n {
            let sid = ids[rng.random_range(0..ids.len())].clone();
            let w = if rng.random_bool(0.5) {
                f64::from(rng.random_range(1..=10u32)) / 10.0
            } else {
                rng.random_range(0.01..=1.0)
            };
            weights.insert(sid, w);
        }
        conditions.insert(
            ConditionId::new(format!("c{c:02}")),
            Condition {
                name: format!("condition {c}"),
                symptom_weights: weights,
                info_doc: DocId::new("doc"),
            },
        );
    }
    let info_docs = BTreeMap::from([(
        DocId::new("doc"),
        InfoDocument {
            doc_id: DocId::new("doc"),
            title: "Doc".into(),
            body: "body".into(),
        },
    )]);
    KnowledgeBase {
        symptoms,
        conditions,
        info_docs,
    }
}

pub fn random_report(rng: &mut impl Rng, kb: &KnowledgeBase) -> BTreeSet<SymptomId> {
    kb.symptoms
        .keys()
        .filter(|_| rng.random_bool(0.25))
        .cloned()
        .collect()
}
