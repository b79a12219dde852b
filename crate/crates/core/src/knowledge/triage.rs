use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{InfoDocument, KbError, KnowledgeBase};
use crate::domain::{ConditionId, DocId, SymptomId};

pub const MAX_RANKED_CONDITIONS: usize = 5;

/// Appended to every symptom-check answer.
pub const TRIAGE_DISCLAIMER: &str = "This is not a diagnosis and does not replace professional \
medical advice. If you feel unwell or worried, please contact your doctor.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionScore {
    pub condition_id: ConditionId,
    pub score: f64,
}

/// Ranks conditions by the share of their symptom weight covered by the
/// reported symptoms.
///
/// Conditions scoring zero are dropped; ties go to the smaller condition id;
/// at most [`MAX_RANKED_CONDITIONS`] are returned.
pub fn check_symptoms(
    reported: &BTreeSet<SymptomId>,
    kb: &KnowledgeBase,
) -> Result<Vec<ConditionScore>, KbError> {
    if let Some(unknown) = reported.iter().find(|s| !kb.symptoms.contains_key(*s)) {
        return Err(KbError::UnknownSymptom(unknown.clone()));
    }
    let mut ranked: Vec<ConditionScore> = kb
        .conditions
        .iter()
        .filter_map(|(id, condition)| {
            let total: f64 = condition.symptom_weights.values().sum();
            let present: f64 = condition
                .symptom_weights
                .iter()
                .filter(|(s, _)| reported.contains(*s))
                .map(|(_, w)| w)
                .sum();
            (present > 0.0).then(|| ConditionScore {
                condition_id: id.clone(),
                score: present / total,
            })
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.condition_id.cmp(&b.condition_id))
    });
    ranked.truncate(MAX_RANKED_CONDITIONS);
    Ok(ranked)
}

/// Looks a document up by exact id, then by case-insensitive title.
pub fn get_info<'kb>(query: &str, kb: &'kb KnowledgeBase) -> Result<&'kb InfoDocument, KbError> {
    if let Some(doc) = kb.info_docs.get(&DocId::new(query)) {
        return Ok(doc);
    }
    let wanted = query.trim().to_lowercase();
    kb.info_docs
        .values()
        .find(|d| d.title.trim().to_lowercase() == wanted)
        .ok_or_else(|| KbError::NotFound(query.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{load_kb, BUNDLED_KB};

    fn kb() -> KnowledgeBase {
        load_kb(BUNDLED_KB).unwrap()
    }

    fn ids(list: &[&str]) -> BTreeSet<SymptomId> {
        list.iter().map(|s| SymptomId::new(*s)).collect()
    }

    #[test]
    fn empty_report_ranks_nothing() {
        assert!(check_symptoms(&BTreeSet::new(), &kb()).unwrap().is_empty());
    }

    #[test]
    fn unknown_symptom_is_rejected() {
        assert_eq!(
            check_symptoms(&ids(&["headache", "telepathy"]), &kb()),
            Err(KbError::UnknownSymptom(SymptomId::new("telepathy")))
        );
    }

    #[test]
    fn full_symptom_set_of_a_condition_scores_one() {
        let kb = kb();
        let condition = &kb.conditions[&ConditionId::new("type2_diabetes")];
        let reported: BTreeSet<_> = condition.symptom_weights.keys().cloned().collect();
        let ranked = check_symptoms(&reported, &kb).unwrap();
        assert_eq!(ranked[0].condition_id.as_str(), "type2_diabetes");
        assert_eq!(ranked[0].score, 1.0);
        assert!(ranked.iter().all(|c| c.score > 0.0 && c.score <= 1.0));
        assert!(ranked.len() <= MAX_RANKED_CONDITIONS);
    }

    #[test]
    fn info_lookup_by_id_title_or_not_found() {
        let kb = kb();
        assert_eq!(get_info("diabetes", &kb).unwrap().title, "Diabetes");
        assert_eq!(get_info("DiAbEtEs", &kb).unwrap().doc_id.as_str(), "diabetes");
        assert_eq!(get_info("  Common Cold ", &kb).unwrap().doc_id.as_str(), "common_cold");
        assert!(matches!(get_info("astrology", &kb), Err(KbError::NotFound(_))));
    }
}
