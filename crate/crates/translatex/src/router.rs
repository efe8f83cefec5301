//! Perplexity-gated routing between a primary and a fallback backend.
//!
//! The primary backend reports a log conditional likelihood for each output
//! token. Their mean measures how confident the model is; the standard
//! transform `exp(-mean log-likelihood)` turns it into a perplexity, lowest
//! for the most confident predictions. A sentence whose primary translation
//! scores at or below the threshold (default 2.05) is accepted; anything
//! else — higher perplexity, missing scores, lost math tokens, or an
//! outright error — is discarded and re-translated by the fallback backend,
//! which callers normally wrap with the glossary.

use crate::assemble::{missing_tokens, tokens_conserved, Sentence};
use crate::backend::{Backend, BackendRequest, TranslationResult};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default perplexity threshold: primary output is accepted at or below it.
pub const DEFAULT_PERPLEXITY_THRESHOLD: f64 = 2.05;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouterError {
    #[error("perplexity of an empty score list is undefined")]
    EmptyScoreList,
    #[error("both backends failed for sentence {id}: {primary}; {fallback}")]
    BothBackendsFailed {
        id: usize,
        primary: String,
        fallback: String,
    },
}

/// `exp(-(Σ logprobs)/len)`: at least 1, lower means more confident.
pub fn perplexity(token_logprobs: &[f64]) -> Result<f64, RouterError> {
    if token_logprobs.is_empty() {
        return Err(RouterError::EmptyScoreList);
    }
    let mean = token_logprobs.iter().sum::<f64>() / token_logprobs.len() as f64;
    Ok((-mean).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chosen {
    Primary,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteReason {
    BelowThreshold,
    AboveThreshold,
    NoLogprobs,
    TokenConservationFailure,
    PrimaryError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub chosen: Chosen,
    pub reason: RouteReason,
    pub threshold: f64,
}

/// One routed sentence: the accepted result, the decision that picked it,
/// and any repairs made along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    pub result: TranslationResult,
    pub decision: RoutingDecision,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RouteConfig {
    pub source_lang: String,
    pub target_lang: String,
    pub threshold: f64,
    /// Sentence id used in errors and reports.
    pub sentence_id: usize,
}

impl Default for RouteConfig {
    fn default() -> Self {
        RouteConfig {
            source_lang: "en".into(),
            target_lang: "fr".into(),
            threshold: DEFAULT_PERPLEXITY_THRESHOLD,
            sentence_id: 0,
        }
    }
}

/// Translate one sentence through the primary backend, falling back when
/// confidence is insufficient.
///
/// The primary result is accepted iff its perplexity is at or below the
/// threshold (inclusive) *and* it carries exactly the math tokens of the
/// input. Otherwise the sentence goes to `fallback` (pass the
/// glossary-wrapped backend here). A fallback output that still drops
/// tokens is repaired by appending them, with a warning.
pub fn route(
    sentence: &Sentence,
    primary: &dyn Backend,
    fallback: &dyn Backend,
    cfg: &RouteConfig,
) -> Result<Routed, RouterError> {
    let req = BackendRequest::new(&sentence.text, &cfg.source_lang, &cfg.target_lang);

    let (reason, primary_err) = match primary.translate(&req) {
        Ok(result) => match result.perplexity {
            Some(p) if p <= cfg.threshold => {
                if tokens_conserved(&sentence.text, &result.text) {
                    return Ok(Routed {
                        result,
                        decision: RoutingDecision {
                            chosen: Chosen::Primary,
                            reason: RouteReason::BelowThreshold,
                            threshold: cfg.threshold,
                        },
                        warnings: Vec::new(),
                    });
                }
                (RouteReason::TokenConservationFailure, None)
            }
            Some(_) => (RouteReason::AboveThreshold, None),
            None => (RouteReason::NoLogprobs, None),
        },
        Err(e) => (RouteReason::PrimaryError, Some(e)),
    };

    match fallback.translate(&req) {
        Ok(mut result) => {
            let mut warnings = Vec::new();
            if !tokens_conserved(&sentence.text, &result.text) {
                let missing = missing_tokens(&sentence.text, &result.text);
                if !missing.is_empty() {
                    for token in &missing {
                        result.text.push(' ');
                        result.text.push_str(token);
                    }
                    warnings.push(format!(
                        "sentence {}: fallback dropped {:?}; appended at end",
                        cfg.sentence_id, missing
                    ));
                } else {
                    warnings.push(format!(
                        "sentence {}: fallback duplicated math tokens",
                        cfg.sentence_id
                    ));
                }
            }
            Ok(Routed {
                result,
                decision: RoutingDecision {
                    chosen: Chosen::Fallback,
                    reason,
                    threshold: cfg.threshold,
                },
                warnings,
            })
        }
        Err(fallback_err) => Err(RouterError::BothBackendsFailed {
            id: cfg.sentence_id,
            primary: primary_err
                .map(|e| e.to_string())
                .unwrap_or_else(|| format!("{reason:?}")),
            fallback: fallback_err.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendError, MockDictionaryBackend};

    fn sentence(text: &str) -> Sentence {
        Sentence::new(text, 0)
    }

    struct FailingBackend;
    impl Backend for FailingBackend {
        fn id(&self) -> &str {
            "failing"
        }
        fn translate(&self, _: &BackendRequest) -> Result<TranslationResult, BackendError> {
            Err(BackendError::Unreachable("test".into()))
        }
    }

    /// Echoes the input but strips all MATH tokens.
    struct TokenDropper;
    impl Backend for TokenDropper {
        fn id(&self) -> &str {
            "dropper"
        }
        fn translate(&self, req: &BackendRequest) -> Result<TranslationResult, BackendError> {
            let text: Vec<&str> = req
                .text
                .split_whitespace()
                .filter(|w| !w.starts_with("MATH"))
                .collect();
            Ok(TranslationResult::new(
                text.join(" "),
                Some(vec![0.0]),
                "dropper",
            ))
        }
    }

    #[test]
    fn perplexity_of_certain_output_is_one() {
        assert_eq!(perplexity(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn perplexity_matches_direct_arithmetic() {
        let p = perplexity(&[-0.5, -0.7, -0.3]).unwrap();
        assert!((p - 0.5f64.exp()).abs() < 1e-12);
        let p = perplexity(&[-3.0]).unwrap();
        assert!((p - 3.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn perplexity_empty_errors() {
        assert_eq!(perplexity(&[]).unwrap_err(), RouterError::EmptyScoreList);
    }

    #[test]
    fn decreasing_a_score_increases_perplexity() {
        let base = perplexity(&[-0.5, -0.5]).unwrap();
        let worse = perplexity(&[-0.5, -0.9]).unwrap();
        assert!(worse > base);
    }

    #[test]
    fn confident_primary_is_accepted() {
        let primary = MockDictionaryBackend::identity("primary").with_logprobs(-0.1, -0.1);
        let fallback = MockDictionaryBackend::identity("fallback");
        let routed = route(
            &sentence("Just MATH1X words"),
            &primary,
            &fallback,
            &RouteConfig::default(),
        )
        .unwrap();
        assert_eq!(routed.decision.chosen, Chosen::Primary);
        assert_eq!(routed.decision.reason, RouteReason::BelowThreshold);
        assert_eq!(routed.result.backend_id, "primary");
    }

    #[test]
    fn threshold_is_inclusive() {
        // logprobs chosen so perplexity is exactly the threshold
        let lp = -(DEFAULT_PERPLEXITY_THRESHOLD.ln());
        let primary = MockDictionaryBackend::identity("primary").with_logprobs(lp, lp);
        let fallback = MockDictionaryBackend::identity("fallback");
        let routed = route(
            &sentence("boundary case"),
            &primary,
            &fallback,
            &RouteConfig::default(),
        )
        .unwrap();
        assert!((routed.result.perplexity.unwrap() - 2.05).abs() < 1e-12);
        assert_eq!(routed.decision.chosen, Chosen::Primary);
    }

    #[test]
    fn high_perplexity_falls_back() {
        let primary = MockDictionaryBackend::identity("primary").with_logprobs(-3.0, -3.0);
        let fallback = MockDictionaryBackend::new("fallback", [("cat", "chat")]);
        let routed = route(
            &sentence("the cat"),
            &primary,
            &fallback,
            &RouteConfig::default(),
        )
        .unwrap();
        assert_eq!(routed.decision.chosen, Chosen::Fallback);
        assert_eq!(routed.decision.reason, RouteReason::AboveThreshold);
        assert_eq!(routed.result.text, "the chat");
    }

    #[test]
    fn missing_logprobs_fall_back() {
        let primary = MockDictionaryBackend::identity("primary").without_logprobs();
        let fallback = MockDictionaryBackend::identity("fallback");
        let routed = route(
            &sentence("whatever"),
            &primary,
            &fallback,
            &RouteConfig::default(),
        )
        .unwrap();
        assert_eq!(routed.decision.reason, RouteReason::NoLogprobs);
    }

    #[test]
    fn token_loss_falls_back_even_when_confident() {
        let primary = TokenDropper;
        let fallback = MockDictionaryBackend::identity("fallback");
        let routed = route(
            &sentence("keep MATH1X safe"),
            &primary,
            &fallback,
            &RouteConfig::default(),
        )
        .unwrap();
        assert_eq!(routed.decision.chosen, Chosen::Fallback);
        assert_eq!(
            routed.decision.reason,
            RouteReason::TokenConservationFailure
        );
        assert!(routed.result.text.contains("MATH1X"));
    }

    #[test]
    fn fallback_token_loss_is_repaired() {
        let primary = MockDictionaryBackend::identity("p").without_logprobs();
        let fallback = TokenDropper;
        let routed = route(
            &sentence("keep MATH1X and MATH2X"),
            &primary,
            &fallback,
            &RouteConfig::default(),
        )
        .unwrap();
        assert!(routed.result.text.ends_with("MATH1X MATH2X"));
        assert_eq!(routed.warnings.len(), 1);
    }

    #[test]
    fn primary_error_falls_back() {
        let fallback = MockDictionaryBackend::identity("fallback");
        let routed = route(
            &sentence("text"),
            &FailingBackend,
            &fallback,
            &RouteConfig::default(),
        )
        .unwrap();
        assert_eq!(routed.decision.reason, RouteReason::PrimaryError);
    }

    #[test]
    fn both_failing_is_an_error() {
        let err = route(
            &sentence("text"),
            &FailingBackend,
            &FailingBackend,
            &RouteConfig {
                sentence_id: 7,
                ..RouteConfig::default()
            },
        )
        .unwrap_err();
        assert!(matches!(
            err,
            RouterError::BothBackendsFailed { id: 7, .. }
        ));
    }
}
