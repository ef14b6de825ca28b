//! Tokenization F1 and the three sentence-segmentation evaluation scenarios,
//! in the CoNLL-2018 span-matching style.
//!
//! Both sides are aligned on the non-whitespace character sequence, so gold
//! and system may disagree on tokenization and raw whitespace and still be
//! comparable.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Segmentation, Token};
use crate::error::{Error, Result};

/// Precision/recall/F1 with the underlying counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub sys_total: u64,
    pub gold_total: u64,
}

impl Prf {
    /// Empty-set convention: a zero denominator yields 0, as in the CoNLL-2018
    /// evaluation script.
    pub fn from_counts(tp: u64, sys_total: u64, gold_total: u64) -> Prf {
        let precision = if sys_total == 0 {
            0.0
        } else {
            tp as f64 / sys_total as f64
        };
        let recall = if gold_total == 0 {
            0.0
        } else {
            tp as f64 / gold_total as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
            tp,
            sys_total,
            gold_total,
        }
    }
}

/// Evaluation scenario for sentence boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    All,
    Orthographic,
    Relaxed,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::All, Scenario::Orthographic, Scenario::Relaxed];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::All => "all",
            Scenario::Orthographic => "orthographic",
            Scenario::Relaxed => "relaxed",
        }
    }
}

/// Maps each token to its span over the whitespace-stripped character
/// sequence, and checks both sides cover the same sequence.
fn nws_spans(tokens: &[Token]) -> Vec<(usize, usize)> {
    let mut spans = Vec::with_capacity(tokens.len());
    let mut pos = 0usize;
    for tok in tokens {
        let len = tok.surface.chars().count();
        spans.push((pos, pos + len));
        pos += len;
    }
    spans
}

fn nws_text(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.surface.as_str()).collect()
}

fn check_alignment(gold_tokens: &[Token], system_tokens: &[Token]) -> Result<()> {
    let g = nws_text(gold_tokens);
    let s = nws_text(system_tokens);
    if g != s {
        return Err(Error::Alignment(format!(
            "non-whitespace character sequences differ (gold {} chars, system {} chars)",
            g.chars().count(),
            s.chars().count()
        )));
    }
    Ok(())
}

/// Token-level precision/recall/F1 by exact span match over the
/// non-whitespace character sequence.
pub fn token_f1(gold_tokens: &[Token], system_tokens: &[Token]) -> Result<Prf> {
    check_alignment(gold_tokens, system_tokens)?;
    let gold: BTreeSet<(usize, usize)> = nws_spans(gold_tokens).into_iter().collect();
    let sys: BTreeSet<(usize, usize)> = nws_spans(system_tokens).into_iter().collect();
    let tp = gold.intersection(&sys).count() as u64;
    Ok(Prf::from_counts(tp, sys.len() as u64, gold.len() as u64))
}

/// Sentence spans in non-whitespace coordinates, induced by the boundary
/// offsets selected by `keep`. Tokens after the last kept boundary form a
/// final implicit sentence, so an empty segmentation yields one span covering
/// everything.
fn sentence_spans(
    tokens: &[Token],
    segmentation: &Segmentation,
    keep: impl Fn(&crate::corpus::Boundary) -> bool,
) -> Vec<(usize, usize)> {
    let kept: BTreeSet<usize> = segmentation
        .boundaries
        .iter()
        .filter(|b| keep(b))
        .map(|b| b.offset)
        .collect();
    let spans = nws_spans(tokens);
    let mut out = Vec::new();
    let mut start = 0usize;
    for (tok, span) in tokens.iter().zip(&spans) {
        if kept.contains(&tok.span.end) {
            out.push((start, span.1));
            start = span.1;
        }
    }
    if let Some(last) = spans.last() {
        if start < last.1 {
            out.push((start, last.1));
        }
    }
    out
}

/// Evaluates system sentence spans against tiered gold spans under one
/// scenario. Both token lists must cover the same non-whitespace character
/// sequence.
pub fn sentence_eval(
    gold_tokens: &[Token],
    gold: &Segmentation,
    system_tokens: &[Token],
    system: &Segmentation,
    scenario: Scenario,
) -> Result<Prf> {
    check_alignment(gold_tokens, system_tokens)?;
    let counts = sentence_eval_counts(gold_tokens, gold, system_tokens, system, scenario);
    Ok(Prf::from_counts(counts.0, counts.1, counts.2))
}

/// (tp, sys_total, gold_total) for one scenario; used for micro-averaging
/// across documents.
pub fn sentence_eval_counts(
    gold_tokens: &[Token],
    gold: &Segmentation,
    system_tokens: &[Token],
    system: &Segmentation,
    scenario: Scenario,
) -> (u64, u64, u64) {
    let sys_spans = sentence_spans(system_tokens, system, |_| true);
    let gold_all = sentence_spans(gold_tokens, gold, |_| true);

    match scenario {
        Scenario::All => {
            let gold_set: BTreeSet<_> = gold_all.iter().copied().collect();
            let tp = sys_spans.iter().filter(|s| gold_set.contains(s)).count() as u64;
            (tp, sys_spans.len() as u64, gold_all.len() as u64)
        }
        Scenario::Orthographic => {
            let gold_orth = sentence_spans(gold_tokens, gold, |b| b.tier.is_orthographic());
            let gold_set: BTreeSet<_> = gold_orth.iter().copied().collect();
            let tp = sys_spans.iter().filter(|s| gold_set.contains(s)).count() as u64;
            (tp, sys_spans.len() as u64, gold_orth.len() as u64)
        }
        Scenario::Relaxed => {
            // a system span matches iff it concatenates >= 1 consecutive gold
            // segments whose internal join points are all syntactic-only
            let start_index: BTreeMap<usize, usize> =
                gold_all.iter().enumerate().map(|(i, s)| (s.0, i)).collect();
            let nws_ends: BTreeMap<usize, usize> = {
                // map gold char offsets to non-whitespace offsets at token ends
                let spans = nws_spans(gold_tokens);
                gold_tokens
                    .iter()
                    .zip(&spans)
                    .map(|(t, s)| (t.span.end, s.1))
                    .collect()
            };
            let syntactic_only: BTreeSet<usize> = gold
                .boundaries
                .iter()
                .filter(|b| b.tier == crate::corpus::BoundaryTier::Syntactic)
                .filter_map(|b| nws_ends.get(&b.offset).copied())
                .collect();
            let mut tp = 0u64;
            for &(s, e) in &sys_spans {
                let Some(&i) = start_index.get(&s) else {
                    continue;
                };
                let mut j = i;
                let matched = loop {
                    let seg_end = gold_all[j].1;
                    if seg_end == e {
                        break true;
                    }
                    if seg_end > e {
                        break false;
                    }
                    // internal join at seg_end must be syntactic-only
                    if !syntactic_only.contains(&seg_end) {
                        break false;
                    }
                    j += 1;
                    if j >= gold_all.len() {
                        break false;
                    }
                };
                if matched {
                    tp += 1;
                }
            }
            (tp, sys_spans.len() as u64, gold_all.len() as u64)
        }
    }
}

/// Micro-averaged scores: sums counts over (gold, system) document pairs.
pub fn aggregate_sentence_eval(
    pairs: &[(&[Token], &Segmentation, &[Token], &Segmentation)],
    scenario: Scenario,
) -> Result<Prf> {
    let mut tp = 0;
    let mut sys_total = 0;
    let mut gold_total = 0;
    for (gt, g, st, s) in pairs {
        check_alignment(gt, st)?;
        let (a, b, c) = sentence_eval_counts(gt, g, st, s, scenario);
        tp += a;
        sys_total += b;
        gold_total += c;
    }
    Ok(Prf::from_counts(tp, sys_total, gold_total))
}
