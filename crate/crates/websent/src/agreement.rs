//! Inter-annotator agreement (pairwise Dice, Fleiss kappa) over tiered
//! boundary annotations, and majority-vote aggregation into a gold corpus.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{
    paragraph_final_token_ends, AnnotationSet, Boundary, BoundaryTier, Document, Segmentation,
    Token,
};
use crate::error::{Error, Result};

/// Which boundary annotations count for a statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierFilter {
    /// Presence or absence of any boundary annotation.
    Binary,
    Orthographic,
    Syntactic,
}

impl TierFilter {
    pub fn as_str(&self) -> &'static str {
        match self {
            TierFilter::Binary => "binary",
            TierFilter::Orthographic => "orthographic",
            TierFilter::Syntactic => "syntactic",
        }
    }

    fn accepts(&self, tier: BoundaryTier) -> bool {
        match self {
            TierFilter::Binary => true,
            TierFilter::Orthographic => tier.is_orthographic(),
            TierFilter::Syntactic => tier.is_syntactic(),
        }
    }
}

/// Agreement statistics mirroring the binary/orthographic/syntactic rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementReport {
    pub dice_binary: f64,
    pub dice_orthographic: f64,
    pub dice_syntactic: f64,
    pub kappa_binary: f64,
    pub kappa_orthographic: f64,
    pub kappa_syntactic: f64,
    pub n_items: usize,
    pub n_annotators: usize,
}

/// All token-end offsets except each paragraph's final token end.
/// Paragraph-final boundaries are forced, hence excluded from the agreement
/// item universe.
pub fn candidate_positions(document: &Document, tokens: &[Token]) -> Vec<usize> {
    let finals: BTreeSet<usize> = paragraph_final_token_ends(document, tokens)
        .into_iter()
        .collect();
    tokens
        .iter()
        .map(|t| t.span.end)
        .filter(|end| !finals.contains(end))
        .collect()
}

fn boundary_set(set: &AnnotationSet, filter: TierFilter) -> BTreeSet<(String, usize)> {
    set.segmentations
        .values()
        .flat_map(|seg| {
            seg.boundaries
                .iter()
                .filter(|b| filter.accepts(b.tier))
                .map(|b| (seg.doc_id.clone(), b.offset))
        })
        .collect()
}

/// Mean pairwise Dice coefficient over all annotator pairs. A pair with two
/// empty sets contributes 1.0.
pub fn dice(annotations: &[AnnotationSet], filter: TierFilter) -> Result<f64> {
    if annotations.len() < 2 {
        return Err(Error::Argument(
            "dice needs at least 2 annotators".to_string(),
        ));
    }
    let sets: Vec<BTreeSet<(String, usize)>> = annotations
        .iter()
        .map(|a| boundary_set(a, filter))
        .collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let inter = sets[i].intersection(&sets[j]).count();
            let denom = sets[i].len() + sets[j].len();
            total += if denom == 0 {
                1.0
            } else {
                2.0 * inter as f64 / denom as f64
            };
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Standard two-category Fleiss kappa over the candidate positions. Every
/// annotator must cover every document that contributes items.
pub fn fleiss_kappa(
    annotations: &[AnnotationSet],
    filter: TierFilter,
    candidate_positions: &BTreeMap<String, Vec<usize>>,
) -> Result<f64> {
    let n_annotators = annotations.len();
    if n_annotators < 2 {
        return Err(Error::Argument(
            "fleiss kappa needs at least 2 annotators".to_string(),
        ));
    }
    let n_items: usize = candidate_positions.values().map(Vec::len).sum();
    if n_items == 0 {
        return Err(Error::Argument(
            "fleiss kappa needs at least 1 item".to_string(),
        ));
    }
    for set in annotations {
        for doc_id in candidate_positions.keys() {
            if !set.segmentations.contains_key(doc_id) {
                return Err(Error::Coverage(format!(
                    "annotator '{}' has no segmentation for document '{}'",
                    set.annotator_id, doc_id
                )));
            }
        }
    }

    let marked: Vec<BTreeSet<(String, usize)>> = annotations
        .iter()
        .map(|a| boundary_set(a, filter))
        .collect();

    let n = n_annotators as f64;
    let mut sum_pi = 0.0;
    let mut total_yes = 0u64;
    for (doc_id, offsets) in candidate_positions {
        for &offset in offsets {
            let key = (doc_id.clone(), offset);
            let yes = marked.iter().filter(|m| m.contains(&key)).count() as f64;
            let no = n - yes;
            total_yes += yes as u64;
            sum_pi += (yes * (yes - 1.0) + no * (no - 1.0)) / (n * (n - 1.0));
        }
    }
    let p_bar = sum_pi / n_items as f64;
    let p_yes = total_yes as f64 / (n_items as f64 * n);
    let p_e = p_yes * p_yes + (1.0 - p_yes) * (1.0 - p_yes);
    if p_e >= 1.0 {
        // all votes in one category everywhere
        return Ok(if p_bar >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Majority-vote aggregation over one document: orthographic and syntactic
/// votes are counted independently per offset; a tier is retained when its
/// count reaches `n_required`.
pub fn aggregate_majority(
    annotations: &[AnnotationSet],
    doc_id: &str,
    n_required: usize,
) -> Result<Segmentation> {
    if n_required == 0 {
        return Err(Error::Argument("n_required must be at least 1".to_string()));
    }
    if n_required > annotations.len() {
        return Err(Error::Argument(format!(
            "n_required = {} exceeds the number of annotators ({})",
            n_required,
            annotations.len()
        )));
    }
    let mut orth_votes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut synt_votes: BTreeMap<usize, usize> = BTreeMap::new();
    for set in annotations {
        if let Some(seg) = set.segmentations.get(doc_id) {
            for b in &seg.boundaries {
                if b.tier.is_orthographic() {
                    *orth_votes.entry(b.offset).or_insert(0) += 1;
                }
                if b.tier.is_syntactic() {
                    *synt_votes.entry(b.offset).or_insert(0) += 1;
                }
            }
        }
    }
    let offsets: BTreeSet<usize> = orth_votes.keys().chain(synt_votes.keys()).copied().collect();
    let mut boundaries = Vec::new();
    for offset in offsets {
        let orth = orth_votes.get(&offset).copied().unwrap_or(0) >= n_required;
        let synt = synt_votes.get(&offset).copied().unwrap_or(0) >= n_required;
        let tier = match (orth, synt) {
            (true, true) => BoundaryTier::Both,
            (true, false) => BoundaryTier::Orthographic,
            (false, true) => BoundaryTier::Syntactic,
            (false, false) => continue,
        };
        boundaries.push(Boundary::new(offset, tier));
    }
    Ok(Segmentation::new(doc_id, boundaries))
}

/// Computes the full agreement report over a corpus.
pub fn agreement_report(
    annotations: &[AnnotationSet],
    candidate_positions: &BTreeMap<String, Vec<usize>>,
) -> Result<AgreementReport> {
    Ok(AgreementReport {
        dice_binary: dice(annotations, TierFilter::Binary)?,
        dice_orthographic: dice(annotations, TierFilter::Orthographic)?,
        dice_syntactic: dice(annotations, TierFilter::Syntactic)?,
        kappa_binary: fleiss_kappa(annotations, TierFilter::Binary, candidate_positions)?,
        kappa_orthographic: fleiss_kappa(
            annotations,
            TierFilter::Orthographic,
            candidate_positions,
        )?,
        kappa_syntactic: fleiss_kappa(annotations, TierFilter::Syntactic, candidate_positions)?,
        n_items: candidate_positions.values().map(Vec::len).sum(),
        n_annotators: annotations.len(),
    })
}
