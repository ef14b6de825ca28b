//! Rule-based word tokenizer tuned for web text.
//!
//! Rules apply in priority order within each whitespace-delimited chunk:
//! URLs/e-mails, emoticons, runs of terminal punctuation, known abbreviations
//! with their period, then character-level splitting that keeps decimal
//! numbers, ordinals and word-internal hyphens/apostrophes intact.

use std::collections::BTreeSet;
use std::path::Path;

use crate::corpus::{Document, Span, Token};
use crate::error::{Error, Result};

/// Lexical category of a token, as used by the segmenter and error analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TokenClass {
    Word,
    Number,
    Abbreviation,
    TerminalPunct,
    PunctRun,
    Emoticon,
    Url,
    Symbol,
    Other,
}

impl TokenClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TokenClass::Word => "word",
            TokenClass::Number => "number",
            TokenClass::Abbreviation => "abbreviation",
            TokenClass::TerminalPunct => "terminal_punct",
            TokenClass::PunctRun => "punct_run",
            TokenClass::Emoticon => "emoticon",
            TokenClass::Url => "url",
            TokenClass::Symbol => "symbol",
            TokenClass::Other => "other",
        }
    }
}

const TERMINALS: &[char] = &['.', '?', '!', '…'];

fn is_terminal(c: char) -> bool {
    TERMINALS.contains(&c)
}

/// Emoticon recognizer: literal forms plus an eyes + optional nose + mouth
/// composition. The pattern file uses one entry per line; `eyes:`, `nose:` and
/// `mouth:` lines replace the respective character class, anything else is a
/// literal emoticon. `#` starts a comment.
#[derive(Debug, Clone)]
pub struct EmoticonLexicon {
    literals: Vec<Vec<char>>,
    eyes: Vec<char>,
    noses: Vec<char>,
    mouths: Vec<char>,
}

impl Default for EmoticonLexicon {
    fn default() -> Self {
        EmoticonLexicon {
            literals: ["<3", "^^", "o.O", "O.o", "xD", "XD", ":'(", ":')"]
                .iter()
                .map(|s| s.chars().collect())
                .collect(),
            eyes: ":;=8".chars().collect(),
            noses: "-^".chars().collect(),
            mouths: ")(DPpO/\\|]".chars().collect(),
        }
    }
}

impl EmoticonLexicon {
    pub fn parse(text: &str) -> EmoticonLexicon {
        let mut lex = EmoticonLexicon {
            literals: Vec::new(),
            eyes: Vec::new(),
            noses: Vec::new(),
            mouths: Vec::new(),
        };
        for line in text.lines() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("eyes:") {
                lex.eyes = rest.chars().collect();
            } else if let Some(rest) = line.strip_prefix("nose:") {
                lex.noses = rest.chars().collect();
            } else if let Some(rest) = line.strip_prefix("mouth:") {
                lex.mouths = rest.chars().collect();
            } else {
                lex.literals.push(line.chars().collect());
            }
        }
        lex
    }

    pub fn load(path: &Path) -> Result<EmoticonLexicon> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(EmoticonLexicon::parse(&text))
    }

    /// Longest emoticon match starting at `pos`, as a length in chars.
    fn match_at(&self, chars: &[char], pos: usize) -> Option<usize> {
        let mut best = 0usize;
        for lit in &self.literals {
            if chars[pos..].starts_with(lit) && lit.len() > best {
                best = lit.len();
            }
        }
        // composed form: eye, optional nose, one or more mouth chars
        let rest = &chars[pos..];
        if !rest.is_empty() && self.eyes.contains(&rest[0]) {
            let mut i = 1;
            if i < rest.len() && self.noses.contains(&rest[i]) {
                i += 1;
            }
            let mouth_start = i;
            while i < rest.len() && self.mouths.contains(&rest[i]) {
                i += 1;
            }
            if i > mouth_start && i > best {
                best = i;
            }
        }
        if best >= 2 {
            Some(best)
        } else {
            None
        }
    }
}

/// Tokenizer configuration: abbreviation lexicon and emoticon patterns.
#[derive(Debug, Clone)]
pub struct TokenizerConfig {
    pub abbreviations: BTreeSet<String>,
    pub emoticons: EmoticonLexicon,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        // small default list of common Estonian abbreviations, without final
        // periods; extended via the lexicon file
        let abbrevs = [
            "dr", "prof", "hr", "pr", "nt", "jne", "jm", "jt", "vt", "lk", "st", "nn", "vrd",
            "umb", "kr", "mr", "mrs", "s.t", "a.d",
        ];
        TokenizerConfig {
            abbreviations: abbrevs.iter().map(|s| s.to_string()).collect(),
            emoticons: EmoticonLexicon::default(),
        }
    }
}

impl TokenizerConfig {
    /// Loads the abbreviation lexicon: UTF-8, one entry per line, without the
    /// final period, `#` comments.
    pub fn load_abbreviations(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.abbreviations = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.trim_end_matches('.').to_lowercase())
            .collect();
        Ok(())
    }
}

/// Tokenizes a document. Total over valid documents; tokens never cross
/// paragraph borders or contain whitespace.
pub fn tokenize(document: &Document, config: &TokenizerConfig) -> Vec<(Token, TokenClass)> {
    let chars: Vec<char> = document.text.chars().collect();
    let mut out = Vec::new();
    for para in &document.paragraphs {
        let mut i = para.start;
        while i < para.end {
            if chars[i].is_whitespace() {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < para.end && !chars[j].is_whitespace() {
                j += 1;
            }
            scan_chunk(&chars, i, j, config, &mut out);
            i = j;
        }
    }
    out
}

fn scan_chunk(
    chars: &[char],
    start: usize,
    end: usize,
    config: &TokenizerConfig,
    out: &mut Vec<(Token, TokenClass)>,
) {
    let mut i = start;
    while i < end {
        // rule 1: URL / e-mail
        if let Some(len) = match_url(chars, i, end) {
            push(chars, i, i + len, TokenClass::Url, out);
            i += len;
            continue;
        }
        // rule 2: emoticon
        if let Some(len) = config.emoticons.match_at(&chars[..end], i) {
            push(chars, i, i + len, TokenClass::Emoticon, out);
            i += len;
            continue;
        }
        // rule 3: run of >= 2 terminal punctuation chars
        if is_terminal(chars[i]) && i + 1 < end && is_terminal(chars[i + 1]) {
            let mut j = i;
            while j < end && is_terminal(chars[j]) {
                j += 1;
            }
            push(chars, i, j, TokenClass::PunctRun, out);
            i = j;
            continue;
        }
        // rule 4: known abbreviation + period, longest match
        if let Some(len) = match_abbrev(chars, i, end, &config.abbreviations) {
            push(chars, i, i + len, TokenClass::Abbreviation, out);
            i += len;
            continue;
        }
        let c = chars[i];
        if c.is_alphanumeric() {
            let (j, class) = scan_word(chars, i, end);
            push(chars, i, j, class, out);
            i = j;
            continue;
        }
        // single punctuation or symbol character
        let class = if is_terminal(c) {
            TokenClass::TerminalPunct
        } else if c.is_ascii_punctuation() || matches!(c, '„' | '“' | '”' | '«' | '»' | '–' | '—' | '’' | '‘') {
            TokenClass::Symbol
        } else {
            TokenClass::Other
        };
        push(chars, i, i + 1, class, out);
        i += 1;
    }
}

fn push(chars: &[char], start: usize, end: usize, class: TokenClass, out: &mut Vec<(Token, TokenClass)>) {
    let surface: String = chars[start..end].iter().collect();
    out.push((Token::new(Span::new(start, end), surface), class));
}

/// Consumes a word or number run starting at an alphanumeric char. Decimal
/// separators and word-internal hyphens/apostrophes stay inside the token; a
/// single trailing period stays attached to all-digit tokens (ordinals).
fn scan_word(chars: &[char], start: usize, end: usize) -> (usize, TokenClass) {
    let mut j = start;
    let mut has_letter = false;
    while j < end {
        let c = chars[j];
        if c.is_alphanumeric() {
            has_letter |= c.is_alphabetic();
            j += 1;
        } else if matches!(c, '-' | '\'' | '’')
            && j > start
            && j + 1 < end
            && chars[j - 1].is_alphanumeric()
            && chars[j + 1].is_alphanumeric()
        {
            j += 1;
        } else if matches!(c, '.' | ',' | ':')
            && j > start
            && j + 1 < end
            && chars[j - 1].is_ascii_digit()
            && chars[j + 1].is_ascii_digit()
            && !has_letter
        {
            j += 1;
        } else {
            break;
        }
    }
    // ordinal: all-digit token followed by a lone period
    if !has_letter
        && j < end
        && chars[j] == '.'
        && (j + 1 >= end || !is_terminal(chars[j + 1]))
        && chars[j - 1].is_ascii_digit()
    {
        j += 1;
    }
    let class = if has_letter {
        TokenClass::Word
    } else {
        TokenClass::Number
    };
    (j, class)
}

fn match_abbrev(
    chars: &[char],
    start: usize,
    end: usize,
    abbreviations: &BTreeSet<String>,
) -> Option<usize> {
    if !chars[start].is_alphabetic() {
        return None;
    }
    if start > 0 && chars[start - 1].is_alphanumeric() {
        return None;
    }
    let rest: String = chars[start..end].iter().collect::<String>().to_lowercase();
    let rest_chars: Vec<char> = rest.chars().collect();
    let mut best = None;
    for abbr in abbreviations {
        let a: Vec<char> = abbr.chars().collect();
        if rest_chars.len() > a.len()
            && rest_chars[..a.len()] == a[..]
            && rest_chars[a.len()] == '.'
        {
            let len = a.len() + 1;
            if best.map(|b| len > b).unwrap_or(true) {
                best = Some(len);
            }
        }
    }
    best
}

fn match_url(chars: &[char], start: usize, end: usize) -> Option<usize> {
    let rest = &chars[start..end];
    let looks_like_scheme = {
        let mut i = 0;
        while i < rest.len() && (rest[i].is_ascii_alphanumeric() || rest[i] == '+') {
            i += 1;
        }
        i > 0 && rest.len() > i + 2 && rest[i] == ':' && rest[i + 1] == '/' && rest[i + 2] == '/'
    };
    let looks_like_www = rest.len() > 4
        && rest[..4].iter().collect::<String>().eq_ignore_ascii_case("www.")
        && rest[4].is_alphanumeric();
    let looks_like_email = {
        let s: String = rest.iter().collect();
        match s.find('@') {
            Some(at) if at > 0 => {
                let (local, domain) = s.split_at(at);
                let domain = &domain[1..];
                local
                    .chars()
                    .all(|c| c.is_alphanumeric() || matches!(c, '.' | '_' | '%' | '+' | '-'))
                    && domain.contains('.')
                    && domain
                        .chars()
                        .take_while(|c| !c.is_whitespace())
                        .all(|c| c.is_alphanumeric() || matches!(c, '.' | '-'))
                    && domain.chars().next().map(char::is_alphanumeric) == Some(true)
            }
            _ => false,
        }
    };
    if !(looks_like_scheme || looks_like_www || looks_like_email) {
        return None;
    }
    // consume to chunk end, then give back trailing closing/terminal punctuation
    let mut len = rest.len();
    while len > 0 && matches!(rest[len - 1], ')' | ']' | '}' | '>' | ',' | ';' | ':' | '"' | '\'' | '.' | '?' | '!' | '…' | '»') {
        len -= 1;
    }
    if len == 0 {
        None
    } else {
        Some(len)
    }
}

/// Classifies an already-isolated surface form; used when tokens arrive from
/// CoNLL-U input rather than from `tokenize`.
pub fn classify_surface(surface: &str, config: &TokenizerConfig) -> TokenClass {
    let chars: Vec<char> = surface.chars().collect();
    if chars.is_empty() {
        return TokenClass::Other;
    }
    if match_url(&chars, 0, chars.len()) == Some(chars.len()) {
        return TokenClass::Url;
    }
    if config.emoticons.match_at(&chars, 0) == Some(chars.len()) {
        return TokenClass::Emoticon;
    }
    if chars.len() >= 2 && chars.iter().all(|&c| is_terminal(c)) {
        return TokenClass::PunctRun;
    }
    if chars.len() == 1 {
        let c = chars[0];
        if is_terminal(c) {
            return TokenClass::TerminalPunct;
        }
        if c.is_alphabetic() {
            return TokenClass::Word;
        }
        if c.is_ascii_digit() {
            return TokenClass::Number;
        }
        return if c.is_alphanumeric() {
            TokenClass::Other
        } else {
            TokenClass::Symbol
        };
    }
    if surface.ends_with('.')
        && config
            .abbreviations
            .contains(&surface[..surface.len() - 1].to_lowercase())
    {
        return TokenClass::Abbreviation;
    }
    if chars.iter().any(|c| c.is_alphabetic()) {
        return TokenClass::Word;
    }
    if chars.iter().any(|c| c.is_ascii_digit()) {
        return TokenClass::Number;
    }
    TokenClass::Symbol
}

/// True iff, per paragraph, the document text with all whitespace removed
/// equals the concatenation of the token surfaces.
pub fn detokenize_check(document: &Document, tokens: &[Token]) -> bool {
    for para in &document.paragraphs {
        let expected: String = document
            .slice(*para)
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        let got: String = tokens
            .iter()
            .filter(|t| t.span.start >= para.start && t.span.end <= para.end)
            .map(|t| t.surface.as_str())
            .collect();
        if expected != got {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(text: &str) -> Vec<(String, TokenClass)> {
        let doc = Document::from_text("d", text);
        tokenize(&doc, &TokenizerConfig::default())
            .into_iter()
            .map(|(t, c)| (t.surface, c))
            .collect()
    }

    #[test]
    fn punct_run_is_single_token() {
        assert_eq!(
            tok("Tore!!!"),
            vec![
                ("Tore".to_string(), TokenClass::Word),
                ("!!!".to_string(), TokenClass::PunctRun)
            ]
        );
    }

    #[test]
    fn glued_sentences_split() {
        assert_eq!(
            tok("tuli.Siis"),
            vec![
                ("tuli".to_string(), TokenClass::Word),
                (".".to_string(), TokenClass::TerminalPunct),
                ("Siis".to_string(), TokenClass::Word)
            ]
        );
    }

    #[test]
    fn emoticon_survives() {
        assert_eq!(
            tok("ok :)"),
            vec![
                ("ok".to_string(), TokenClass::Word),
                (":)".to_string(), TokenClass::Emoticon)
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tok("").is_empty());
    }

    #[test]
    fn abbreviation_keeps_period() {
        assert_eq!(
            tok("dr. Tamm"),
            vec![
                ("dr.".to_string(), TokenClass::Abbreviation),
                ("Tamm".to_string(), TokenClass::Word)
            ]
        );
    }

    #[test]
    fn abbreviation_with_internal_period() {
        assert_eq!(
            tok("s.t. homme"),
            vec![
                ("s.t.".to_string(), TokenClass::Abbreviation),
                ("homme".to_string(), TokenClass::Word)
            ]
        );
    }

    #[test]
    fn abbreviation_not_matched_inside_word() {
        // "kadr." ends in "dr." but "ka" + "dr." must not split
        let toks = tok("kadr.");
        assert_eq!(toks[0], ("kadr".to_string(), TokenClass::Word));
        assert_eq!(toks[1], (".".to_string(), TokenClass::TerminalPunct));
    }

    #[test]
    fn ordinal_and_decimal_stay_intact() {
        assert_eq!(
            tok("3. koht maksis 12,99 eurot"),
            vec![
                ("3.".to_string(), TokenClass::Number),
                ("koht".to_string(), TokenClass::Word),
                ("maksis".to_string(), TokenClass::Word),
                ("12,99".to_string(), TokenClass::Number),
                ("eurot".to_string(), TokenClass::Word)
            ]
        );
    }

    #[test]
    fn ordinal_before_punct_run_leaves_run_whole() {
        assert_eq!(
            tok("3..."),
            vec![
                ("3".to_string(), TokenClass::Number),
                ("...".to_string(), TokenClass::PunctRun)
            ]
        );
    }

    #[test]
    fn url_single_token() {
        assert_eq!(
            tok("vaata www.delfi.ee kohe"),
            vec![
                ("vaata".to_string(), TokenClass::Word),
                ("www.delfi.ee".to_string(), TokenClass::Url),
                ("kohe".to_string(), TokenClass::Word)
            ]
        );
        assert_eq!(tok("http://ut.ee/a.")[0].1, TokenClass::Url);
        assert_eq!(tok("http://ut.ee/a.")[0].0, "http://ut.ee/a");
        assert_eq!(tok("kairit@ut.ee")[0].1, TokenClass::Url);
    }

    #[test]
    fn quotes_and_brackets_split() {
        assert_eq!(
            tok("(tere),"),
            vec![
                ("(".to_string(), TokenClass::Symbol),
                ("tere".to_string(), TokenClass::Word),
                (")".to_string(), TokenClass::Symbol),
                (",".to_string(), TokenClass::Symbol)
            ]
        );
    }

    #[test]
    fn hyphen_and_apostrophe_internal() {
        assert_eq!(tok("e-mail")[0].0, "e-mail");
        assert_eq!(tok("n'est")[0].0, "n'est");
        assert_eq!(tok("- tere").len(), 2);
    }

    #[test]
    fn single_ellipsis_char_is_terminal() {
        assert_eq!(
            tok("ja…"),
            vec![
                ("ja".to_string(), TokenClass::Word),
                ("…".to_string(), TokenClass::TerminalPunct)
            ]
        );
        assert_eq!(tok("ja?!")[1], ("?!".to_string(), TokenClass::PunctRun));
    }

    #[test]
    fn emoticon_glued_to_word() {
        assert_eq!(
            tok("ok:)"),
            vec![
                ("ok".to_string(), TokenClass::Word),
                (":)".to_string(), TokenClass::Emoticon)
            ]
        );
        assert_eq!(tok("<3")[0], ("<3".to_string(), TokenClass::Emoticon));
        assert_eq!(tok(":-D")[0], (":-D".to_string(), TokenClass::Emoticon));
        assert_eq!(tok(":)))")[0], (":)))".to_string(), TokenClass::Emoticon));
    }

    #[test]
    fn detokenize_check_holds_and_detects_tampering() {
        let doc = Document::from_text("d", "Tere!!! kuidas :) läheb?\n\nTeine lõik.");
        let toks: Vec<Token> = tokenize(&doc, &TokenizerConfig::default())
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert!(detokenize_check(&doc, &toks));

        let mut tampered = toks.clone();
        tampered[0].surface = "Tera".to_string();
        assert!(!detokenize_check(&doc, &tampered));

        let mut reordered = toks;
        reordered.swap(0, 1);
        assert!(!detokenize_check(&doc, &reordered));
    }

    #[test]
    fn tokens_never_cross_paragraphs_or_contain_whitespace() {
        let doc = Document::from_text("d", "esimene lõik.\n\nteine lõik!");
        let toks = tokenize(&doc, &TokenizerConfig::default());
        for (t, _) in &toks {
            assert!(!t.surface.chars().any(char::is_whitespace));
            assert!(doc
                .paragraphs
                .iter()
                .any(|p| t.span.start >= p.start && t.span.end <= p.end));
        }
    }

    #[test]
    fn deterministic() {
        let doc = Document::from_text("d", "Tere!!! ok :) www.x.ee tuli.Siis dr. Tamm 3. a");
        let cfg = TokenizerConfig::default();
        assert_eq!(tokenize(&doc, &cfg), tokenize(&doc, &cfg));
    }
}
