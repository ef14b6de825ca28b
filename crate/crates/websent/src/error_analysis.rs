//! Automatic classification of orthographic sentence-boundary errors into the
//! nine error categories plus "Others".
//!
//! Both sides are compared over the non-whitespace character sequence, so the
//! system may have tokenized (and therefore offset) the text differently.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Document, Segmentation, Token};
use crate::error::{Error, Result};
use crate::tokenizer::TokenClass;

/// Error category. M categories classify missed boundaries (false negatives),
/// A categories spurious ones (false positives).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorCategory {
    /// 1 (M): no boundary after multiple punctuation marks
    NoBoundaryAfterPunctRun,
    /// 2 (M): no boundary after sentence-final punctuation
    NoBoundaryAfterTerminal,
    /// 3 (M): no boundary due to missing sentence-final punctuation
    NoBoundaryMissingTerminal,
    /// 4 (A): boundary inside repeated punctuation marks
    BoundaryInsidePunctRun,
    /// 5 (A): boundary in the middle of a sentence
    BoundaryMidSentence,
    /// 6 (A): wrong boundary after multiple punctuation marks
    WrongBoundaryAfterPunctRun,
    /// 7 (A): emoticon segmented as a separate sentence
    EmoticonOwnSentence,
    /// 8 (A): boundary inside a token
    BoundaryInsideToken,
    /// 9 (M): missing boundary after sentence-final abbreviation token
    MissingBoundaryAfterAbbrev,
    Others,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 10] = [
        ErrorCategory::NoBoundaryAfterPunctRun,
        ErrorCategory::NoBoundaryAfterTerminal,
        ErrorCategory::NoBoundaryMissingTerminal,
        ErrorCategory::BoundaryInsidePunctRun,
        ErrorCategory::BoundaryMidSentence,
        ErrorCategory::WrongBoundaryAfterPunctRun,
        ErrorCategory::EmoticonOwnSentence,
        ErrorCategory::BoundaryInsideToken,
        ErrorCategory::MissingBoundaryAfterAbbrev,
        ErrorCategory::Others,
    ];

    /// Numeric id (1-9), None for Others.
    pub fn id(&self) -> Option<u8> {
        match self {
            ErrorCategory::NoBoundaryAfterPunctRun => Some(1),
            ErrorCategory::NoBoundaryAfterTerminal => Some(2),
            ErrorCategory::NoBoundaryMissingTerminal => Some(3),
            ErrorCategory::BoundaryInsidePunctRun => Some(4),
            ErrorCategory::BoundaryMidSentence => Some(5),
            ErrorCategory::WrongBoundaryAfterPunctRun => Some(6),
            ErrorCategory::EmoticonOwnSentence => Some(7),
            ErrorCategory::BoundaryInsideToken => Some(8),
            ErrorCategory::MissingBoundaryAfterAbbrev => Some(9),
            ErrorCategory::Others => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorCategory::NoBoundaryAfterPunctRun => {
                "No boundary after multiple punctuation marks"
            }
            ErrorCategory::NoBoundaryAfterTerminal => {
                "No boundary after sentence final punctuation"
            }
            ErrorCategory::NoBoundaryMissingTerminal => {
                "No boundary due to missing sentence-final punctuation"
            }
            ErrorCategory::BoundaryInsidePunctRun => {
                "Sentence boundary inside repeated punctuation marks"
            }
            ErrorCategory::BoundaryMidSentence => "Boundary in the middle of a sentence",
            ErrorCategory::WrongBoundaryAfterPunctRun => {
                "Wrong boundary after multiple punctuation marks"
            }
            ErrorCategory::EmoticonOwnSentence => {
                "Emoticon has been segmented as a separate sentence"
            }
            ErrorCategory::BoundaryInsideToken => "Sentence boundary inside a token",
            ErrorCategory::MissingBoundaryAfterAbbrev => {
                "Missing boundary after sentence-final abbreviation token"
            }
            ErrorCategory::Others => "Others",
        }
    }

    /// Whether the category classifies missing (M) or added (A) boundaries;
    /// None for Others, which takes both.
    pub fn direction(&self) -> Option<Direction> {
        match self {
            ErrorCategory::NoBoundaryAfterPunctRun
            | ErrorCategory::NoBoundaryAfterTerminal
            | ErrorCategory::NoBoundaryMissingTerminal
            | ErrorCategory::MissingBoundaryAfterAbbrev => Some(Direction::Missing),
            ErrorCategory::BoundaryInsidePunctRun
            | ErrorCategory::BoundaryMidSentence
            | ErrorCategory::WrongBoundaryAfterPunctRun
            | ErrorCategory::EmoticonOwnSentence
            | ErrorCategory::BoundaryInsideToken => Some(Direction::Added),
            ErrorCategory::Others => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// False negative: the gold boundary is absent from the system output.
    Missing,
    /// False positive: the system boundary is absent from the gold.
    Added,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Missing => "FN",
            Direction::Added => "FP",
        }
    }
}

/// One classified error with enough context to audit the automatic label.
#[derive(Debug, Clone)]
pub struct ErrorInstance {
    pub doc_id: String,
    /// Offset over the non-whitespace character sequence.
    pub offset: usize,
    pub direction: Direction,
    pub category: ErrorCategory,
    /// +-20 characters of raw-text context around the boundary.
    pub context: String,
}

fn terminal_final(surface: &str) -> bool {
    surface
        .chars()
        .last()
        .map(|c| matches!(c, '.' | '?' | '!' | '…'))
        .unwrap_or(false)
}

/// Non-whitespace end offsets per token, plus span lookup tables.
struct NwsIndex<'a> {
    tokens: &'a [(Token, TokenClass)],
    spans: Vec<(usize, usize)>,
}

impl<'a> NwsIndex<'a> {
    fn new(tokens: &'a [(Token, TokenClass)]) -> NwsIndex<'a> {
        let mut spans = Vec::with_capacity(tokens.len());
        let mut pos = 0usize;
        for (tok, _) in tokens {
            let len = tok.surface.chars().count();
            spans.push((pos, pos + len));
            pos += len;
        }
        NwsIndex { tokens, spans }
    }

    fn boundary_offsets(&self, seg: &Segmentation) -> BTreeSet<usize> {
        let raw_to_nws: BTreeMap<usize, usize> = self
            .tokens
            .iter()
            .zip(&self.spans)
            .map(|((t, _), s)| (t.span.end, s.1))
            .collect();
        seg.offsets()
            .filter_map(|o| raw_to_nws.get(&o).copied())
            .collect()
    }

    /// Token whose nws span ends exactly at `offset`.
    fn token_ending_at(&self, offset: usize) -> Option<(&Token, TokenClass)> {
        self.spans
            .iter()
            .position(|s| s.1 == offset)
            .map(|i| (&self.tokens[i].0, self.tokens[i].1))
    }

    /// Token whose nws span strictly contains `offset`.
    fn token_containing(&self, offset: usize) -> Option<(&Token, TokenClass)> {
        self.spans
            .iter()
            .position(|s| offset > s.0 && offset < s.1)
            .map(|i| (&self.tokens[i].0, self.tokens[i].1))
    }
}

/// Classifies every boundary disagreement between gold and system into one
/// category; first matching rule in taxonomy order wins. The gold
/// segmentation is filtered to the orthographic tier.
pub fn classify_errors(
    document: &Document,
    gold: &Segmentation,
    system: &Segmentation,
    gold_tokens: &[(Token, TokenClass)],
    system_tokens: &[(Token, TokenClass)],
) -> Result<(BTreeMap<ErrorCategory, usize>, Vec<ErrorInstance>)> {
    let gold_idx = NwsIndex::new(gold_tokens);
    let sys_idx = NwsIndex::new(system_tokens);
    let gold_text: String = gold_tokens.iter().map(|(t, _)| t.surface.as_str()).collect();
    let sys_text: String = system_tokens
        .iter()
        .map(|(t, _)| t.surface.as_str())
        .collect();
    if gold_text != sys_text {
        return Err(Error::Alignment(
            "gold and system tokens cover different text".to_string(),
        ));
    }

    let orth_gold = Segmentation::new(
        gold.doc_id.clone(),
        gold.boundaries
            .iter()
            .filter(|b| b.tier.is_orthographic())
            .copied()
            .collect(),
    );
    let gold_bounds = gold_idx.boundary_offsets(&orth_gold);
    let sys_bounds = sys_idx.boundary_offsets(system);

    let raw_chars: Vec<char> = document.text.chars().collect();
    let mut counts: BTreeMap<ErrorCategory, usize> = BTreeMap::new();
    let mut instances = Vec::new();

    // false negatives, classified by the gold-side token ending at the boundary
    for &offset in gold_bounds.difference(&sys_bounds) {
        let category = match gold_idx.token_ending_at(offset) {
            Some((tok, TokenClass::PunctRun)) if tok.surface.chars().count() >= 2 => {
                ErrorCategory::NoBoundaryAfterPunctRun
            }
            Some((tok, TokenClass::TerminalPunct))
                if raw_chars
                    .get(tok.span.end)
                    .map(|c| !c.is_whitespace())
                    .unwrap_or(false)
                    || sys_idx.token_containing(offset).is_some() =>
            {
                ErrorCategory::NoBoundaryAfterTerminal
            }
            Some((tok, _)) if !terminal_final(&tok.surface) => {
                ErrorCategory::NoBoundaryMissingTerminal
            }
            Some((_, TokenClass::Abbreviation)) => ErrorCategory::MissingBoundaryAfterAbbrev,
            _ => ErrorCategory::Others,
        };
        *counts.entry(category).or_insert(0) += 1;
        instances.push(instance(document, gold_tokens, offset, Direction::Missing, category));
    }

    // false positives
    let sys_sentences = system_sentence_spans(&sys_idx, &sys_bounds);
    for &offset in sys_bounds.difference(&gold_bounds) {
        let category = classify_fp(offset, &gold_idx, &sys_idx, &gold_bounds, &sys_sentences);
        *counts.entry(category).or_insert(0) += 1;
        instances.push(instance(document, gold_tokens, offset, Direction::Added, category));
    }

    Ok((counts, instances))
}

/// System sentence spans in nws coordinates, from the system boundaries.
fn system_sentence_spans(
    sys_idx: &NwsIndex<'_>,
    sys_bounds: &BTreeSet<usize>,
) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0usize;
    for s in &sys_idx.spans {
        if sys_bounds.contains(&s.1) {
            spans.push((start, s.1));
            start = s.1;
        }
    }
    if let Some(last) = sys_idx.spans.last() {
        if start < last.1 {
            spans.push((start, last.1));
        }
    }
    spans
}

fn classify_fp(
    offset: usize,
    gold_idx: &NwsIndex<'_>,
    sys_idx: &NwsIndex<'_>,
    gold_bounds: &BTreeSet<usize>,
    sys_sentences: &[(usize, usize)],
) -> ErrorCategory {
    if let Some((_, class)) = gold_idx.token_containing(offset) {
        return if class == TokenClass::PunctRun {
            ErrorCategory::BoundaryInsidePunctRun
        } else {
            ErrorCategory::BoundaryInsideToken
        };
    }
    if let Some((_, TokenClass::PunctRun)) = gold_idx.token_ending_at(offset) {
        return ErrorCategory::WrongBoundaryAfterPunctRun;
    }
    // an emoticon isolated as its own system sentence, adjacent to this boundary
    let emoticon_sentence = |span: &(usize, usize)| {
        let covered: Vec<TokenClass> = sys_idx
            .tokens
            .iter()
            .zip(&sys_idx.spans)
            .filter(|(_, s)| s.0 >= span.0 && s.1 <= span.1)
            .map(|((_, c), _)| *c)
            .collect();
        covered == vec![TokenClass::Emoticon]
    };
    if sys_sentences
        .iter()
        .any(|span| (span.1 == offset || span.0 == offset) && emoticon_sentence(span))
    {
        return ErrorCategory::EmoticonOwnSentence;
    }
    if let Some((_, class)) = gold_idx.token_ending_at(offset) {
        let mid_sentence = gold_bounds.range(offset + 1..).next().is_some();
        if !matches!(class, TokenClass::TerminalPunct | TokenClass::PunctRun) && mid_sentence {
            return ErrorCategory::BoundaryMidSentence;
        }
    }
    ErrorCategory::Others
}

fn instance(
    document: &Document,
    gold_tokens: &[(Token, TokenClass)],
    nws_offset: usize,
    direction: Direction,
    category: ErrorCategory,
) -> ErrorInstance {
    // locate the raw offset for context: nearest gold token end at or before
    let mut pos = 0usize;
    let mut raw = 0usize;
    for (tok, _) in gold_tokens {
        let len = tok.surface.chars().count();
        if pos + len > nws_offset {
            break;
        }
        pos += len;
        raw = tok.span.end;
        if pos == nws_offset {
            break;
        }
    }
    let chars: Vec<char> = document.text.chars().collect();
    let lo = raw.saturating_sub(20);
    let hi = (raw + 20).min(chars.len());
    let context: String = chars[lo..hi]
        .iter()
        .map(|&c| if c == '\n' { ' ' } else { c })
        .collect();
    ErrorInstance {
        doc_id: document.id.clone(),
        offset: nws_offset,
        direction,
        category,
        context,
    }
}
