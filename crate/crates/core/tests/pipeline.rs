use std::sync::Arc;

use fivew_core::backends::{MockQa, MockQg, QaMode, ReplaySrl};
use fivew_core::corpus::{dedup, stats, EntailmentClass};
use fivew_core::fixtures;
use fivew_core::qagen::QagOptions;
use fivew_core::srl5w::MappingTable;
use fivew_core::verdict::{evaluate_grid, verify_claim, Condition, QaArm, QagArm, Thresholds, VerdictConfig};

fn arms() -> (Vec<QagArm>, Vec<QaArm>) {
    let qags = vec![
        QagArm { name: "template".into(), generator: None },
        QagArm { name: "echo".into(), generator: Some(Arc::new(MockQg)) },
    ];
    let qas = vec![
        QaArm { name: "extractive".into(), backend: Arc::new(MockQa::new(QaMode::Extractive)) },
        QaArm { name: "sentence".into(), backend: Arc::new(MockQa::new(QaMode::Sentence)) },
    ];
    (qags, qas)
}

#[test]
fn grid_cells_order_and_values() {
    let (records, frames) = fixtures::grid_fixture(12, 5);
    let labeler = ReplaySrl::new(frames.into_values().flatten().collect());
    let (qags, qas) = arms();
    let conditions = [Condition::ClaimOnly, Condition::PlusParaphrase];
    let cells = evaluate_grid(
        &records,
        &labeler,
        &MappingTable::default(),
        &qags,
        &qas,
        &conditions,
        QagOptions::default(),
        &VerdictConfig::default(),
    );
    assert_eq!(cells.len(), 8);
    for cell in &cells {
        assert!(cell.complete, "{cell:?}");
        assert!(cell.pairs > 0);
        if cell.qa_model == "extractive" {
            assert_eq!((cell.bleu, cell.rouge_l, cell.recall, cell.f1), (1.0, 1.0, 1.0, 1.0), "{cell:?}");
        } else {
            assert!(cell.f1 < 1.0);
        }
    }
    let claim_pairs = cells[0].pairs;
    assert_eq!(cells[1].pairs, 2 * claim_pairs);

    let mut reversed = records.clone();
    reversed.reverse();
    let again = evaluate_grid(
        &reversed,
        &labeler,
        &MappingTable::default(),
        &qags,
        &qas,
        &conditions,
        QagOptions::default(),
        &VerdictConfig::default(),
    );
    assert_eq!(again, cells);
}

#[test]
fn missing_frames_isolate_to_their_cells() {
    let (records, frames) = fixtures::grid_fixture(4, 9);
    // drop the paraphrase frames: only plus-paraphrase cells fail
    let labeler = ReplaySrl::new(frames.into_iter().filter(|(k, _)| !k.contains("#p")).flat_map(|(_, v)| v).collect());
    let (qags, qas) = arms();
    let cells = evaluate_grid(
        &records,
        &labeler,
        &MappingTable::default(),
        &qags[..1],
        &qas[..1],
        &[Condition::ClaimOnly, Condition::PlusParaphrase],
        QagOptions::default(),
        &VerdictConfig::default(),
    );
    assert!(cells[0].complete);
    assert!(!cells[1].complete);
    assert_eq!(cells[1].errors.len(), 4);
    assert_eq!(cells[1].f1, 1.0);
}

#[test]
fn tau_sweep_is_monotone() {
    let (records, _) = fixtures::synthetic_corpus(50, 11);
    let qa = MockQa::new(QaMode::Sentence);
    let counts: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 0.9]
        .iter()
        .map(|&tau| {
            let config = VerdictConfig { thresholds: Thresholds { tau_support: tau, ..Thresholds::default() }, ..Default::default() };
            records.iter().map(|r| verify_claim(r, &r.qa_pairs, &qa, &config).summary.supported).sum()
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    assert!(counts[0] > counts[4], "{counts:?}");
}

#[test]
fn corpus_fixtures() {
    let (fever, vitc) = fixtures::overlap_fixture();
    let (kept, dropped) = dedup(fever.into_iter().chain(vitc).collect());
    assert_eq!((kept.len(), dropped), (116, 64));

    let s = stats(&fixtures::scaled_class_corpus());
    for (class, [claims, paraphrases, qa_pairs, docs]) in fixtures::SCALED_CLASS_COUNTS {
        let c = s.per_class[&class];
        assert_eq!([c.claims, c.paraphrases, c.qa_pairs, c.evidence_docs], [claims, paraphrases, qa_pairs, docs], "{class}");
    }
    assert_eq!(s.totals.claims, 39);
    assert_eq!(s.totals.paraphrases, 99 + 37 + 38);
    assert_eq!(s.per_class[&EntailmentClass::Neutral].evidence_docs, 5);
}
