//! Fact-verification toolkit built around 5W (who, what, when, where, why)
//! question-answer pairs.
//!
//! A claim is broken into its semantic roles, each role becomes a question
//! whose gold answer is the role's span, and the questions are answered
//! from evidence to decide per-aspect verdicts. Supporting stages cover
//! paraphrase generation and filtering, corpus construction and a
//! question-generation x question-answering evaluation grid.
//!
//! ```
//! use fivew_core::fixtures;
//! use fivew_core::verdict::{verify_claim, VerdictConfig};
//!
//! let record = fixtures::moderna_record();
//! let qa = fixtures::moderna_scripted_qa();
//! let report = verify_claim(&record, &record.qa_pairs, &qa, &VerdictConfig::default());
//! assert_eq!(report.pattern(), fixtures::moderna_expected_pattern());
//! ```

pub mod backends;
pub mod config;
pub mod corpus;
pub mod fixtures;
pub mod paraphrase;
pub mod qagen;
pub mod srl5w;
pub mod textmetrics;
pub mod verdict;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/roles.md")]
    mod roles {}
    #[doc = include_str!("../../../book/src/questions.md")]
    mod questions {}
    #[doc = include_str!("../../../book/src/verdicts.md")]
    mod verdicts {}
    #[doc = include_str!("../../../book/src/paraphrases.md")]
    mod paraphrases {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/backends.md")]
    mod backends {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
