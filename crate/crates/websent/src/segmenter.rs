//! Unsupervised Punkt-style sentence boundary detection with web-specific
//! post-processing rules.
//!
//! Training is two-pass: a type pass classifies abbreviation types by a scaled
//! log-likelihood score, a token pass accumulates orthographic context,
//! collocations and sentence starters around first-stage boundary guesses.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Boundary, BoundaryTier, Document, Segmentation, Token};
use crate::error::{Error, Result};
use crate::tokenizer::TokenClass;

/// Abbreviation decision threshold.
pub const ABBREV_THRESHOLD: f64 = 0.3;
/// Alternative-hypothesis period probability in the abbreviation score.
pub const ABBREV_P1: f64 = 0.99;
/// Dunning log-likelihood threshold for retaining a collocation.
pub const COLLOCATION_THRESHOLD: f64 = 7.88;
/// Dunning log-likelihood threshold for retaining a sentence starter.
pub const STARTER_THRESHOLD: f64 = 30.0;
/// Minimum bigram frequency for a collocation.
pub const MIN_COLLOCATION_FREQ: u64 = 1;

pub const ORTHO_UC_INITIAL: u8 = 1;
pub const ORTHO_LC_INITIAL: u8 = 2;
pub const ORTHO_UC_INTERNAL: u8 = 4;
pub const ORTHO_LC_INTERNAL: u8 = 8;

/// Learned statistics of the boundary detector.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PunktModel {
    pub abbrev_types: BTreeSet<String>,
    pub collocations: BTreeSet<(String, String)>,
    pub sentence_starters: BTreeSet<String>,
    pub ortho_context: BTreeMap<String, u8>,
    pub type_counts: BTreeMap<String, u64>,
    pub num_period_tokens: u64,
    pub total_tokens: u64,
}

impl PunktModel {
    pub fn is_empty(&self) -> bool {
        self.total_tokens == 0
    }
}

/// Web-rule configuration applied on top of the Punkt decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WebRuleConfig {
    pub force_paragraph_boundary: bool,
    pub punct_run_boundary_policy: PunctRunPolicy,
    pub emoticon_attach: EmoticonAttach,
    pub glued_split: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PunctRunPolicy {
    Always,
    CapitalizedNext,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmoticonAttach {
    Previous,
    OwnSentence,
}

impl Default for WebRuleConfig {
    fn default() -> Self {
        WebRuleConfig {
            force_paragraph_boundary: true,
            punct_run_boundary_policy: PunctRunPolicy::CapitalizedNext,
            emoticon_attach: EmoticonAttach::Previous,
            glued_split: true,
        }
    }
}

/// Normalized type of a surface form: lowercased, digits collapsed to `#`,
/// one final period stripped (so "15.04" and "12.99" share statistics).
pub fn word_type(surface: &str) -> String {
    let mut t: String = surface
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_digit() { '#' } else { c })
        .collect();
    if t.len() > 1 && t.ends_with('.') && !t.chars().all(|c| c == '.') {
        t.pop();
    }
    t
}

/// Scaled log-likelihood abbreviation score.
///
/// `ll * F_length * F_periods * F_penalty` with the two-hypothesis Dunning
/// ratio against p1 = 0.99, a length factor exp(-L), a factor rewarding
/// internal periods and a penalty `L^-(c-a)` for occurrences without a final
/// period. A type is an abbreviation iff the score reaches 0.3.
#[allow(clippy::too_many_arguments)]
pub fn abbreviation_score(
    count_type: u64,
    count_type_with_period: u64,
    num_period_tokens: u64,
    total_tokens: u64,
    type_length: usize,
    internal_periods: usize,
) -> Result<f64> {
    assert!(count_type_with_period <= count_type);
    assert!(total_tokens > 0);
    let p0 = num_period_tokens as f64 / total_tokens as f64;
    if p0 <= 0.0 || p0 >= 1.0 {
        return Err(Error::DegenerateCorpus(p0));
    }
    let a = count_type_with_period as f64;
    let c = count_type as f64;

    // terms with zero coefficient are clamped to 0 even when the log diverges
    let term = |coef: f64, p: f64| if coef == 0.0 { 0.0 } else { coef * p.ln() };
    let null_h = term(a, p0) + term(c - a, 1.0 - p0);
    let alt_h = term(a, ABBREV_P1) + term(c - a, 1.0 - ABBREV_P1);
    let ll = -2.0 * (null_h - alt_h);

    let len = (type_length - internal_periods) as f64;
    let f_length = (-len).exp();
    let f_periods = (internal_periods + 1) as f64;
    let f_penalty = len.powf(-((count_type - count_type_with_period) as f64));

    Ok(ll * f_length * f_periods * f_penalty)
}

/// Two-way Dunning log-likelihood over (bigram, unigram) counts; the standard
/// collocation statistic. Returns 0 when the counts make the statistic
/// undefined.
pub fn dunning_log_likelihood(count_a: f64, count_b: f64, count_ab: f64, n: f64) -> f64 {
    if count_a <= 0.0 || count_b <= 0.0 || count_ab <= 0.0 || n <= 0.0 {
        return 0.0;
    }
    if count_b >= n || count_a >= n {
        return 0.0;
    }
    let p = count_b / n;
    let p1 = count_ab / count_a;
    let p2 = (count_b - count_ab) / (n - count_a);

    let s1 = count_ab * p.ln() + (count_a - count_ab) * (1.0 - p).ln();
    let s2 = (count_b - count_ab) * p.ln() + (n - count_a - count_b + count_ab) * (1.0 - p).ln();
    let s3 = if count_a == count_ab || p1 >= 1.0 {
        0.0
    } else {
        count_ab * p1.ln() + (count_a - count_ab) * (1.0 - p1).ln()
    };
    let s4 = if count_b == count_ab || p2 <= 0.0 || p2 >= 1.0 {
        0.0
    } else {
        (count_b - count_ab) * p2.ln()
            + (n - count_a - count_b + count_ab) * (1.0 - p2).ln()
    };

    -2.0 * (s1 + s2 - s3 - s4)
}

struct TrainToken {
    first_char: Option<char>,
    ty: String,
    period_final: bool,
    ends_qexcl: bool,
    is_ellipsis: bool,
}

fn train_tokens(raw_text: &str) -> Vec<TrainToken> {
    raw_text
        .split_whitespace()
        .filter_map(|raw| {
            let surface = raw
                .trim_start_matches(|c: char| "\"'«([{„“”‘’<".contains(c))
                .trim_end_matches(|c: char| "\"'»)]}„“”‘’>,;:".contains(c));
            if surface.is_empty() {
                return None;
            }
            let period_final = surface.ends_with('.') && !surface.ends_with("..");
            let ends_qexcl = surface.ends_with('!') || surface.ends_with('?');
            let is_ellipsis = surface.ends_with("..") || surface.ends_with('…');
            Some(TrainToken {
                first_char: surface.chars().next(),
                ty: word_type(surface),
                period_final,
                ends_qexcl,
                is_ellipsis,
            })
        })
        .collect()
}

/// Trains a model on raw text. Empty text yields an empty model; the
/// segmenter then falls back to rules only.
pub fn train(raw_text: &str) -> PunktModel {
    let tokens = train_tokens(raw_text);
    let mut model = PunktModel {
        total_tokens: tokens.len() as u64,
        ..PunktModel::default()
    };
    if tokens.is_empty() {
        return model;
    }

    // type pass
    let mut with_period: BTreeMap<&str, u64> = BTreeMap::new();
    for tok in &tokens {
        *model.type_counts.entry(tok.ty.clone()).or_insert(0) += 1;
        if tok.period_final {
            model.num_period_tokens += 1;
            *with_period.entry(&tok.ty).or_insert(0) += 1;
        }
    }
    let p0_ok = model.num_period_tokens > 0 && model.num_period_tokens < model.total_tokens;
    if p0_ok {
        for (ty, &a) in &with_period {
            if !ty.chars().any(char::is_alphabetic) {
                continue;
            }
            let internal = ty.matches('.').count();
            let len = ty.chars().count();
            if len <= internal {
                continue;
            }
            let c = model.type_counts[*ty];
            let score = abbreviation_score(
                c,
                a,
                model.num_period_tokens,
                model.total_tokens,
                len,
                internal,
            )
            .expect("p0 checked above");
            if score >= ABBREV_THRESHOLD {
                model.abbrev_types.insert((*ty).to_string());
            }
        }
    }

    // token pass, driven by first-stage boundary guesses
    let abbrevs = model.abbrev_types.clone();
    let is_break = |tok: &TrainToken| {
        tok.ends_qexcl || (tok.period_final && !tok.is_ellipsis && !abbrevs.contains(&tok.ty))
    };
    let mut bigram_counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut starter_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut n_breaks = 0u64;
    let mut sentence_initial = true;
    for (i, tok) in tokens.iter().enumerate() {
        let flags = model.ortho_context.entry(tok.ty.clone()).or_insert(0);
        match tok.first_char {
            Some(c) if c.is_uppercase() => {
                *flags |= if sentence_initial {
                    ORTHO_UC_INITIAL
                } else {
                    ORTHO_UC_INTERNAL
                }
            }
            Some(c) if c.is_lowercase() => {
                *flags |= if sentence_initial {
                    ORTHO_LC_INITIAL
                } else {
                    ORTHO_LC_INTERNAL
                }
            }
            _ => {}
        }
        if let Some(next) = tokens.get(i + 1) {
            // collocation candidates straddle period-final tokens; restrict to
            // abbreviation, single-initial and number types so frequent genuine
            // sentence ends do not accrete into collocations
            if tok.period_final {
                let colloc_candidate = model.abbrev_types.contains(&tok.ty)
                    || tok.ty.contains('#')
                    || tok.ty.chars().count() == 1;
                if colloc_candidate {
                    *bigram_counts
                        .entry((tok.ty.clone(), next.ty.clone()))
                        .or_insert(0) += 1;
                }
            }
            if is_break(tok) {
                n_breaks += 1;
                *starter_counts.entry(next.ty.clone()).or_insert(0) += 1;
            }
        } else if is_break(tok) {
            n_breaks += 1;
        }
        sentence_initial = is_break(tok);
    }

    let n = model.total_tokens as f64;
    for ((t1, t2), c12) in bigram_counts {
        if c12 < MIN_COLLOCATION_FREQ {
            continue;
        }
        let c1 = model.type_counts.get(&t1).copied().unwrap_or(0) as f64;
        let c2 = model.type_counts.get(&t2).copied().unwrap_or(0) as f64;
        if dunning_log_likelihood(c1, c2, c12 as f64, n) > COLLOCATION_THRESHOLD {
            model.collocations.insert((t1, t2));
        }
    }
    for (ty, c_after) in starter_counts {
        let c_ty = model.type_counts.get(&ty).copied().unwrap_or(0) as f64;
        if dunning_log_likelihood(n_breaks as f64, c_ty, c_after as f64, n) > STARTER_THRESHOLD {
            model.sentence_starters.insert(ty);
        }
    }
    model
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OrthoDecision {
    SentenceStart,
    NotStart,
    Undecided,
}

fn ortho_heuristic(model: &PunktModel, surface: &str) -> OrthoDecision {
    let ty = word_type(surface);
    let flags = model.ortho_context.get(&ty).copied().unwrap_or(0);
    match surface.chars().next() {
        Some(c) if c.is_uppercase() => {
            let seen_lower = flags & (ORTHO_LC_INITIAL | ORTHO_LC_INTERNAL) != 0;
            if seen_lower && flags & ORTHO_UC_INTERNAL == 0 {
                OrthoDecision::SentenceStart
            } else {
                OrthoDecision::Undecided
            }
        }
        Some(c) if c.is_lowercase() => {
            let seen_upper = flags & (ORTHO_UC_INITIAL | ORTHO_UC_INTERNAL) != 0;
            if seen_upper || flags & ORTHO_LC_INITIAL == 0 {
                OrthoDecision::NotStart
            } else {
                OrthoDecision::Undecided
            }
        }
        _ => OrthoDecision::Undecided,
    }
}

fn ends_terminal(surface: &str) -> bool {
    surface
        .chars()
        .last()
        .map(|c| matches!(c, '.' | '?' | '!'))
        .unwrap_or(false)
}

/// Segments a tokenized document. Emits orthographic boundaries only.
pub fn segment(
    tokens: &[(Token, TokenClass)],
    document: &Document,
    model: &PunktModel,
    config: &WebRuleConfig,
) -> Result<Segmentation> {
    // each token must lie inside some paragraph
    let para_of: Vec<usize> = tokens
        .iter()
        .map(|(t, _)| {
            document
                .paragraphs
                .iter()
                .position(|p| t.span.start >= p.start && t.span.end <= p.end)
                .ok_or_else(|| {
                    Error::Consistency(format!(
                        "token {} at {} is outside every paragraph of '{}'",
                        t.surface, t.span, document.id
                    ))
                })
        })
        .collect::<Result<_>>()?;

    let mut boundaries: BTreeSet<usize> = BTreeSet::new();
    for (i, (tok, class)) in tokens.iter().enumerate() {
        let candidate = matches!(
            class,
            TokenClass::TerminalPunct | TokenClass::PunctRun | TokenClass::Abbreviation
        ) || ends_terminal(&tok.surface);
        if !candidate {
            continue;
        }
        let next = tokens.get(i + 1);
        let mut place = match next {
            None => true,
            Some((next_tok, _)) => {
                let heuristic = ortho_heuristic(model, &next_tok.surface);
                let abbrev_like = *class == TokenClass::Abbreviation
                    || (!matches!(class, TokenClass::TerminalPunct | TokenClass::PunctRun)
                        && model.abbrev_types.contains(&word_type(&tok.surface)));
                if abbrev_like {
                    model.sentence_starters.contains(&word_type(&next_tok.surface))
                        || heuristic == OrthoDecision::SentenceStart
                } else if *class == TokenClass::PunctRun {
                    match config.punct_run_boundary_policy {
                        PunctRunPolicy::Always => true,
                        PunctRunPolicy::Never => false,
                        PunctRunPolicy::CapitalizedNext => {
                            next_tok
                                .surface
                                .chars()
                                .next()
                                .map(char::is_uppercase)
                                .unwrap_or(false)
                                || heuristic == OrthoDecision::SentenceStart
                        }
                    }
                } else {
                    let prev_type = if matches!(class, TokenClass::TerminalPunct) {
                        i.checked_sub(1).map(|p| word_type(&tokens[p].0.surface))
                    } else {
                        Some(word_type(&tok.surface))
                    };
                    let collocated = prev_type
                        .map(|pt| {
                            model
                                .collocations
                                .contains(&(pt, word_type(&next_tok.surface)))
                        })
                        .unwrap_or(false);
                    !collocated && heuristic != OrthoDecision::NotStart
                }
            }
        };
        if !config.glued_split {
            if let Some((next_tok, _)) = next {
                if next_tok.span.start == tok.span.end {
                    place = false;
                }
            }
        }
        if place {
            boundaries.insert(tok.span.end);
        }
    }

    // post-processing (b): boundaries never strand an emoticon at a sentence
    // start; move them past the emoticon within the same paragraph
    if config.emoticon_attach == EmoticonAttach::Previous {
        for i in 0..tokens.len() {
            let end = tokens[i].0.span.end;
            if !boundaries.contains(&end) {
                continue;
            }
            if let Some((next_tok, next_class)) = tokens.get(i + 1) {
                if *next_class == TokenClass::Emoticon && para_of[i + 1] == para_of[i] {
                    boundaries.remove(&end);
                    boundaries.insert(next_tok.span.end);
                }
            }
        }
    }

    // post-processing (a): paragraph ends are sentence ends
    if config.force_paragraph_boundary {
        for end in crate::corpus::paragraph_final_token_ends(
            document,
            &tokens.iter().map(|(t, _)| t.clone()).collect::<Vec<_>>(),
        ) {
            boundaries.insert(end);
        }
    }

    Ok(Segmentation::new(
        document.id.clone(),
        boundaries
            .into_iter()
            .map(|o| Boundary::new(o, BoundaryTier::Orthographic))
            .collect(),
    ))
}

/// Serializes the model to the versioned flat text format.
pub fn serialize_model(model: &PunktModel) -> String {
    let mut out = String::from("# websent punkt model v1\n");
    out.push_str("[abbrev]\n");
    for t in &model.abbrev_types {
        out.push_str(t);
        out.push('\n');
    }
    out.push_str("[colloc]\n");
    for (a, b) in &model.collocations {
        out.push_str(&format!("{a}\t{b}\n"));
    }
    out.push_str("[starter]\n");
    for t in &model.sentence_starters {
        out.push_str(t);
        out.push('\n');
    }
    out.push_str("[ortho]\n");
    for (t, flags) in &model.ortho_context {
        out.push_str(&format!("{t}\t{flags}\n"));
    }
    out.push_str("[counts]\n");
    out.push_str(&format!("%period_tokens\t{}\n", model.num_period_tokens));
    out.push_str(&format!("%total_tokens\t{}\n", model.total_tokens));
    for (t, c) in &model.type_counts {
        out.push_str(&format!("{t}\t{c}\n"));
    }
    out
}

/// Parses the flat text model format. Must round-trip `serialize_model`
/// exactly.
pub fn parse_model(text: &str) -> Result<PunktModel> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "# websent punkt model v1")) => {}
        _ => return Err(Error::format("missing or unsupported model version header")),
    }
    let mut model = PunktModel::default();
    let mut section = String::new();
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].to_string();
            continue;
        }
        match section.as_str() {
            "abbrev" => {
                model.abbrev_types.insert(line.to_string());
            }
            "colloc" => {
                let (a, b) = line.split_once('\t').ok_or_else(|| {
                    Error::format_at(lineno, "collocation line needs two fields")
                })?;
                model.collocations.insert((a.to_string(), b.to_string()));
            }
            "starter" => {
                model.sentence_starters.insert(line.to_string());
            }
            "ortho" => {
                let (t, f) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::format_at(lineno, "ortho line needs two fields"))?;
                let flags: u8 = f
                    .parse()
                    .map_err(|_| Error::format_at(lineno, format!("bad ortho flags '{f}'")))?;
                model.ortho_context.insert(t.to_string(), flags);
            }
            "counts" => {
                let (t, c) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::format_at(lineno, "count line needs two fields"))?;
                let count: u64 = c
                    .parse()
                    .map_err(|_| Error::format_at(lineno, format!("bad count '{c}'")))?;
                match t {
                    "%period_tokens" => model.num_period_tokens = count,
                    "%total_tokens" => model.total_tokens = count,
                    _ => {
                        model.type_counts.insert(t.to_string(), count);
                    }
                }
            }
            other => {
                return Err(Error::format_at(
                    lineno,
                    format!("entry outside a known section ('{other}')"),
                ))
            }
        }
    }
    if model.num_period_tokens > model.total_tokens {
        return Err(Error::format("period token count exceeds total"));
    }
    Ok(model)
}
