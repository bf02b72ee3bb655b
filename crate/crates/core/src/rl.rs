//! Reward and objective arithmetic for group-relative policy optimization
//! over table generation.
//!
//! Everything here is a value computation for verification and offline
//! analysis: rewards for candidate HTML against a gold table, mean-baseline
//! advantages within a sampled group, and the clipped surrogate objective
//! given per-sample probability ratios and a KL estimate. No gradients, no
//! sampling, no optimizer steps.

use serde::Serialize;
use thiserror::Error;

use crate::metrics::{teds, TedsConfig};
use crate::table::{grid_signature, parse_table, HtmlTable};

#[derive(Debug, Error, PartialEq)]
pub enum RlError {
    #[error("group needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
}

/// Token counter used by the length gate. The production tokenizer is
/// model-specific, so the default counts whitespace-delimited lexical
/// tokens; swap in a different counter to match a real tokenizer.
pub type TokenCounter = fn(&str) -> usize;

pub fn whitespace_token_count(s: &str) -> usize {
    s.split_whitespace().count()
}

/// Reward weighting and gating. `lambda1` weighs grid consistency,
/// `lambda2` weighs TEDS; outputs longer than `max_len` tokens score zero.
#[derive(Clone, Copy)]
pub struct RewardConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub max_len: usize,
    pub token_counter: TokenCounter,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            lambda1: 0.5,
            lambda2: 0.5,
            max_len: 8192,
            token_counter: whitespace_token_count,
        }
    }
}

impl std::fmt::Debug for RewardConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RewardConfig")
            .field("lambda1", &self.lambda1)
            .field("lambda2", &self.lambda2)
            .field("max_len", &self.max_len)
            .finish()
    }
}

/// True iff both tables have the same grid signature (expanded row-width
/// list). Content-blind.
pub fn grid_consistent(pred: &HtmlTable, gold: &HtmlTable) -> bool {
    grid_signature(pred) == grid_signature(gold)
}

/// Gated reward for a raw candidate: zero when the output exceeds the token
/// budget or fails to parse as a table, otherwise
/// `λ1 · [grid matches] + λ2 · TEDS(norm(pred), norm(gold))`.
pub fn reward(pred_html: &str, gold: &HtmlTable, cfg: &RewardConfig) -> f64 {
    if (cfg.token_counter)(pred_html) > cfg.max_len {
        return 0.0;
    }
    let Ok(pred) = parse_table(pred_html) else {
        return 0.0;
    };
    let Ok(similarity) = teds(&pred, gold, &TedsConfig::default()) else {
        return 0.0;
    };
    let consistent = if grid_consistent(&pred, gold) { 1.0 } else { 0.0 };
    cfg.lambda1 * consistent + cfg.lambda2 * similarity
}

/// Mean-baseline advantages within a sampled group: `A_i = r_i − mean(r)`.
/// Always sums to zero.
pub fn group_advantages(rewards: &[f64]) -> Result<Vec<f64>, RlError> {
    if rewards.len() < 2 {
        return Err(RlError::TooFewSamples(rewards.len()));
    }
    let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
    Ok(rewards.iter().map(|r| r - mean).collect())
}

/// One sampled group: per-output rewards and probability ratios
/// `r_i = π_θ / π_θold`, a group-level KL estimate, the clip width ε and the
/// KL coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct GrpoGroup {
    pub rewards: Vec<f64>,
    pub ratios: Vec<f64>,
    pub kl: f64,
    pub epsilon: f64,
    pub kl_coeff: f64,
}

impl GrpoGroup {
    pub fn new(
        rewards: Vec<f64>,
        ratios: Vec<f64>,
        kl: f64,
        epsilon: f64,
        kl_coeff: f64,
    ) -> Result<Self, RlError> {
        if rewards.len() < 2 {
            return Err(RlError::TooFewSamples(rewards.len()));
        }
        if rewards.len() != ratios.len() {
            return Err(RlError::InvalidGroup(format!(
                "{} rewards vs {} ratios",
                rewards.len(),
                ratios.len()
            )));
        }
        if ratios.iter().any(|&r| r <= 0.0) {
            return Err(RlError::InvalidGroup("ratios must be positive".into()));
        }
        if !(0.0 < epsilon && epsilon < 1.0) {
            return Err(RlError::InvalidGroup(format!(
                "epsilon {epsilon} outside (0,1)"
            )));
        }
        if kl < 0.0 || kl_coeff < 0.0 {
            return Err(RlError::InvalidGroup(
                "kl and kl_coeff must be non-negative".into(),
            ));
        }
        Ok(GrpoGroup {
            rewards,
            ratios,
            kl,
            epsilon,
            kl_coeff,
        })
    }
}

/// Value of the clipped surrogate objective:
/// `(1/G) · Σ_i [ min(r_i·A_i, clip(r_i, 1−ε, 1+ε)·A_i) − β·KL ]`,
/// with advantages derived from the group rewards by mean baseline.
pub fn grpo_objective(group: &GrpoGroup) -> Result<f64, RlError> {
    let advantages = group_advantages(&group.rewards)?;
    let g = group.rewards.len() as f64;
    let mut total = 0.0;
    for (ratio, adv) in group.ratios.iter().zip(&advantages) {
        let clipped = ratio.clamp(1.0 - group.epsilon, 1.0 + group.epsilon);
        let surrogate = (ratio * adv).min(clipped * adv);
        total += surrogate - group.kl_coeff * group.kl;
    }
    Ok(total / g)
}

/// One scored candidate in the batch format consumed by external trainers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateScore {
    pub sample_id: String,
    pub candidate_html: String,
    pub reward: f64,
    pub grid_consistent: bool,
    pub teds: f64,
}

/// Score a batch of raw candidates against one gold table. Gated candidates
/// (parse failure, over budget) report zero reward, no consistency and zero
/// TEDS.
pub fn score_candidates(
    sample_id: &str,
    candidates: &[String],
    gold: &HtmlTable,
    cfg: &RewardConfig,
) -> Vec<CandidateScore> {
    candidates
        .iter()
        .map(|html| {
            let (consistent, similarity) = match parse_table(html) {
                Ok(pred) if (cfg.token_counter)(html) <= cfg.max_len => (
                    grid_consistent(&pred, gold),
                    teds(&pred, gold, &TedsConfig::default()).unwrap_or(0.0),
                ),
                _ => (false, 0.0),
            };
            CandidateScore {
                sample_id: sample_id.to_string(),
                candidate_html: html.clone(),
                reward: reward(html, gold, cfg),
                grid_consistent: consistent,
                teds: similarity,
            }
        })
        .collect()
}

/// Serialize scored candidates as JSON Lines.
pub fn scores_to_jsonl(scores: &[CandidateScore]) -> String {
    scores
        .iter()
        .map(|s| serde_json::to_string(s).expect("score serializes"))
        .collect::<Vec<_>>()
        .join("\n")
}
