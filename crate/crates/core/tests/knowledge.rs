mod oracles;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roberto_core::domain::SymptomId;
use roberto_core::knowledge::{check_symptoms, load_kb, match_intent, IntentKind, KnowledgeBase, BUNDLED_KB};
use serde::Deserialize;

#[derive(Deserialize)]
struct Corpus {
    utterance: Vec<Labeled>,
}

#[derive(Deserialize)]
struct Labeled {
    text: String,
    intent: String,
    #[serde(default)]
    symptoms: Vec<String>,
    #[serde(default)]
    topic: Option<String>,
}

fn expected_kind(l: &Labeled) -> IntentKind {
    match l.intent.as_str() {
        "symptom_report" => IntentKind::SymptomReport {
            symptoms: l.symptoms.iter().map(|s| SymptomId::new(s.as_str())).collect(),
        },
        "ask_info" => IntentKind::AskInfo {
            topic: l.topic.clone().expect("ask_info needs a topic"),
        },
        "add_medication" => IntentKind::AddMedication,
        "check_in_request" => IntentKind::CheckInRequest,
        "talk_to_provider" => IntentKind::TalkToProvider,
        "book_appointment" => IntentKind::BookAppointment,
        "unknown" => IntentKind::Unknown,
        other => panic!("unknown label {other}"),
    }
}

fn bundled() -> KnowledgeBase {
    load_kb(BUNDLED_KB).unwrap()
}

#[test]
fn bundled_kb_is_large_enough_and_valid() {
    let kb = bundled();
    assert!(kb.symptoms.len() >= 20, "{}", kb.symptoms.len());
    assert!(kb.conditions.len() >= 10, "{}", kb.conditions.len());
    assert!(kb.validate().is_empty());
}

#[test]
fn labeled_corpus_agrees_fully() {
    let corpus: Corpus = toml::from_str(include_str!("fixtures/intent_corpus.toml")).unwrap();
    assert_eq!(corpus.utterance.len(), 30);
    let kb = bundled();
    let misses: Vec<_> = corpus
        .utterance
        .iter()
        .filter_map(|l| {
            let got = match_intent(&l.text, &kb);
            (got.kind != expected_kind(l)).then(|| format!("{:?}: got {:?}", l.text, got.kind))
        })
        .collect();
    assert!(misses.is_empty(), "{misses:#?}");
}

#[test]
fn ranking_matches_brute_force_on_random_kbs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let kb = oracles::triage::random_kb(&mut rng, 10, 15);
        let reported = oracles::triage::random_report(&mut rng, &kb);
        let got: Vec<_> = check_symptoms(&reported, &kb)
            .unwrap()
            .into_iter()
            .map(|c| (c.condition_id, c.score))
            .collect();
        assert_eq!(got, oracles::triage::rank(&reported, &kb));
    }
}

proptest! {
    #[test]
    fn scores_are_bounded_and_monotone_in_the_report(seed in any::<u64>(), extra in 0usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kb = oracles::triage::random_kb(&mut rng, 10, 15);
        let reported = oracles::triage::random_report(&mut rng, &kb);
        let mut larger: BTreeSet<_> = reported.clone();
        larger.insert(SymptomId::new(format!("s{extra:02}")));

        let score_all = |r: &BTreeSet<SymptomId>| {
            kb.conditions.keys().map(|c| {
                // Scores of every condition, not only the top five.
                let single = KnowledgeBase {
                    conditions: [(c.clone(), kb.conditions[c].clone())].into(),
                    ..kb.clone()
                };
                check_symptoms(r, &single).unwrap().first().map_or(0.0, |s| s.score)
            }).collect::<Vec<_>>()
        };
        for c in check_symptoms(&reported, &kb).unwrap() {
            prop_assert!(c.score > 0.0 && c.score <= 1.0);
        }
        let before = score_all(&reported);
        let after = score_all(&larger);
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(a >= b);
        }
        prop_assert_eq!(check_symptoms(&reported, &kb).unwrap(), check_symptoms(&reported, &kb).unwrap());
    }
}
