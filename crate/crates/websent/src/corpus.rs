//! Documents, paragraphs, tokens, tiered sentence boundaries and the plain-text /
//! standoff file formats.
//!
//! All offsets count Unicode code points into `Document::text`, never bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Half-open `[start, end)` span in code points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn contains(&self, offset: usize) -> bool {
        offset >= self.start && offset < self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// A single input text with its paragraph structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub paragraphs: Vec<Span>,
}

impl Document {
    /// Builds a document from raw text, splitting paragraphs on runs of one or
    /// more blank lines (lines containing only whitespace). Paragraph spans
    /// exclude the separating blank lines.
    pub fn from_text(id: impl Into<String>, text: impl Into<String>) -> Document {
        let text = text.into();
        let paragraphs = split_paragraphs(&text);
        Document {
            id: id.into(),
            text,
            paragraphs,
        }
    }

    /// Length of the text in code points.
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// Slice of the text by code-point span.
    pub fn slice(&self, span: Span) -> String {
        self.text
            .chars()
            .skip(span.start)
            .take(span.len())
            .collect()
    }

    /// Merges all paragraph spans into a single span covering the whole
    /// annotated region. Used by `--ignore-paragraphs`.
    pub fn without_paragraphs(&self) -> Document {
        let paragraphs = match (self.paragraphs.first(), self.paragraphs.last()) {
            (Some(first), Some(last)) => vec![Span::new(first.start, last.end)],
            _ => vec![],
        };
        Document {
            id: self.id.clone(),
            text: self.text.clone(),
            paragraphs,
        }
    }
}

fn split_paragraphs(text: &str) -> Vec<Span> {
    let mut paragraphs = Vec::new();
    let mut offset = 0usize; // code points consumed so far
    let mut para_start: Option<usize> = None;
    let mut para_end = 0usize;

    // Iterate physical lines, tracking code-point offsets manually so that the
    // spans stay code-point based regardless of line terminators.
    for line in text.split_inclusive('\n') {
        let line_len = line.chars().count();
        let content = line.strip_suffix('\n').unwrap_or(line);
        let content_len = content.chars().count();
        if content.trim().is_empty() {
            if let Some(start) = para_start.take() {
                paragraphs.push(Span::new(start, para_end));
            }
        } else {
            if para_start.is_none() {
                para_start = Some(offset);
            }
            para_end = offset + content_len;
        }
        offset += line_len;
    }
    if let Some(start) = para_start {
        paragraphs.push(Span::new(start, para_end));
    }
    paragraphs
}

/// A word-level token: a span into the document plus its surface form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub span: Span,
    pub surface: String,
}

impl Token {
    pub fn new(span: Span, surface: impl Into<String>) -> Token {
        Token {
            span,
            surface: surface.into(),
        }
    }
}

/// Which annotation tier a sentence boundary belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTier {
    Orthographic,
    Syntactic,
    Both,
}

impl BoundaryTier {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryTier::Orthographic => "orthographic",
            BoundaryTier::Syntactic => "syntactic",
            BoundaryTier::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Result<BoundaryTier> {
        match s {
            "orthographic" => Ok(BoundaryTier::Orthographic),
            "syntactic" => Ok(BoundaryTier::Syntactic),
            "both" => Ok(BoundaryTier::Both),
            other => Err(Error::format(format!("unknown boundary tier '{other}'"))),
        }
    }

    /// True when the boundary counts for the orthographic tier.
    pub fn is_orthographic(&self) -> bool {
        matches!(self, BoundaryTier::Orthographic | BoundaryTier::Both)
    }

    /// True when the boundary counts for the syntactic tier.
    pub fn is_syntactic(&self) -> bool {
        matches!(self, BoundaryTier::Syntactic | BoundaryTier::Both)
    }
}

impl fmt::Display for BoundaryTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sentence end: a character offset that must coincide with some token end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundary {
    pub offset: usize,
    pub tier: BoundaryTier,
}

impl Boundary {
    pub fn new(offset: usize, tier: BoundaryTier) -> Boundary {
        Boundary { offset, tier }
    }
}

/// All sentence boundaries of one document, ascending by offset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Segmentation {
    pub doc_id: String,
    pub boundaries: Vec<Boundary>,
}

impl Segmentation {
    pub fn new(doc_id: impl Into<String>, mut boundaries: Vec<Boundary>) -> Segmentation {
        boundaries.sort_by_key(|b| b.offset);
        Segmentation {
            doc_id: doc_id.into(),
            boundaries,
        }
    }

    pub fn offsets(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundaries.iter().map(|b| b.offset)
    }

    pub fn tier_at(&self, offset: usize) -> Option<BoundaryTier> {
        self.boundaries
            .iter()
            .find(|b| b.offset == offset)
            .map(|b| b.tier)
    }

    /// Derived sentences as token-index ranges: maximal token runs between
    /// consecutive boundaries. Tokens after the last boundary form a final
    /// sentence.
    pub fn sentences(&self, tokens: &[Token]) -> Vec<std::ops::Range<usize>> {
        let mut ranges = Vec::new();
        let mut start = 0usize;
        let bounds: BTreeSet<usize> = self.offsets().collect();
        for (i, tok) in tokens.iter().enumerate() {
            if bounds.contains(&tok.span.end) {
                ranges.push(start..i + 1);
                start = i + 1;
            }
        }
        if start < tokens.len() {
            ranges.push(start..tokens.len());
        }
        ranges
    }

    /// Checks that every boundary offset coincides with a token end, that
    /// offsets are unique, and that each paragraph-final token end is present.
    pub fn validate(&self, document: &Document, tokens: &[Token]) -> Result<()> {
        let token_ends: BTreeSet<usize> = tokens.iter().map(|t| t.span.end).collect();
        let mut seen = BTreeSet::new();
        for b in &self.boundaries {
            if !token_ends.contains(&b.offset) {
                return Err(Error::Consistency(format!(
                    "boundary at {} in '{}' does not coincide with a token end",
                    b.offset, self.doc_id
                )));
            }
            if !seen.insert(b.offset) {
                return Err(Error::Consistency(format!(
                    "duplicate boundary at {} in '{}'",
                    b.offset, self.doc_id
                )));
            }
        }
        for end in paragraph_final_token_ends(document, tokens) {
            if !seen.contains(&end) {
                return Err(Error::Consistency(format!(
                    "paragraph-final token end {} in '{}' is not a boundary",
                    end, self.doc_id
                )));
            }
        }
        Ok(())
    }
}

/// End offsets of the last token of every paragraph that contains tokens.
pub fn paragraph_final_token_ends(document: &Document, tokens: &[Token]) -> Vec<usize> {
    document
        .paragraphs
        .iter()
        .filter_map(|para| {
            tokens
                .iter()
                .filter(|t| t.span.start >= para.start && t.span.end <= para.end)
                .last()
                .map(|t| t.span.end)
        })
        .collect()
}

/// One annotator's segmentations over a document collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    pub annotator_id: String,
    pub segmentations: BTreeMap<String, Segmentation>,
}

impl AnnotationSet {
    pub fn new(annotator_id: impl Into<String>) -> AnnotationSet {
        AnnotationSet {
            annotator_id: annotator_id.into(),
            segmentations: BTreeMap::new(),
        }
    }
}

/// Reads a plain-text corpus: one UTF-8 file per document (or a single file),
/// blank-line paragraph separation. Document ids are file stems, ordering is
/// lexicographic by id.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    let mut files = Vec::new();
    let meta = std::fs::metadata(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if meta.is_dir() {
        let entries = std::fs::read_dir(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for entry in entries {
            let entry = entry.map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if entry
                .file_type()
                .map_err(|source| Error::Io {
                    path: entry.path(),
                    source,
                })?
                .is_file()
            {
                files.push(entry.path());
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }

    let mut docs = Vec::new();
    for file in files {
        let bytes = std::fs::read(&file).map_err(|source| Error::Io {
            path: file.clone(),
            source,
        })?;
        let text = String::from_utf8(bytes).map_err(|e| Error::Decode {
            path: file.clone(),
            byte: e.utf8_error().valid_up_to(),
        })?;
        let id = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| file.to_string_lossy().into_owned());
        docs.push(Document::from_text(id, text));
    }
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(docs)
}

/// Parses a standoff annotation file. One record per line, tab-separated:
/// `annotator_id<TAB>doc_id<TAB>offset<TAB>tier`; `#` starts a comment line.
/// Offsets are validated against token ends later, when tokens are attached;
/// doc ids are checked against `documents` here.
pub fn load_annotations(path: &Path, documents: &[Document]) -> Result<Vec<AnnotationSet>> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        byte: e.utf8_error().valid_up_to(),
    })?;
    parse_annotations(&text, documents)
}

pub fn parse_annotations(text: &str, documents: &[Document]) -> Result<Vec<AnnotationSet>> {
    let known: BTreeSet<&str> = documents.iter().map(|d| d.id.as_str()).collect();
    let mut sets: BTreeMap<String, AnnotationSet> = BTreeMap::new();
    let mut seen: BTreeSet<(String, String, usize)> = BTreeSet::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::format_at(
                lineno,
                format!("expected 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let (annotator, doc_id, offset_s, tier_s) = (fields[0], fields[1], fields[2], fields[3]);
        if !known.contains(doc_id) {
            return Err(Error::Reference {
                doc_id: doc_id.to_string(),
            });
        }
        let offset: usize = offset_s
            .parse()
            .map_err(|_| Error::format_at(lineno, format!("invalid offset '{offset_s}'")))?;
        let tier = BoundaryTier::parse(tier_s)
            .map_err(|_| Error::format_at(lineno, format!("unknown tier '{tier_s}'")))?;
        if !seen.insert((annotator.to_string(), doc_id.to_string(), offset)) {
            return Err(Error::format_at(
                lineno,
                format!("duplicate record for ({annotator}, {doc_id}, {offset})"),
            ));
        }
        let set = sets
            .entry(annotator.to_string())
            .or_insert_with(|| AnnotationSet::new(annotator));
        let seg = set
            .segmentations
            .entry(doc_id.to_string())
            .or_insert_with(|| Segmentation::new(doc_id, vec![]));
        seg.boundaries.push(Boundary::new(offset, tier));
    }

    let mut out: Vec<AnnotationSet> = sets.into_values().collect();
    for set in &mut out {
        for seg in set.segmentations.values_mut() {
            seg.boundaries.sort_by_key(|b| b.offset);
        }
    }
    Ok(out)
}

/// Serializes annotation sets back to the standoff format.
pub fn write_annotations(sets: &[AnnotationSet]) -> String {
    let mut out = String::new();
    for set in sets {
        for seg in set.segmentations.values() {
            for b in &seg.boundaries {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    set.annotator_id, seg.doc_id, b.offset, b.tier
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paragraph_split_two_paragraphs() {
        let doc = Document::from_text("d1", "Tere.\n\nKuidas läheb?");
        assert_eq!(doc.paragraphs, vec![Span::new(0, 5), Span::new(7, 20)]);
        assert_eq!(doc.slice(Span::new(7, 20)), "Kuidas läheb?");
    }

    #[test]
    fn paragraph_split_empty_document() {
        let doc = Document::from_text("d1", "");
        assert!(doc.paragraphs.is_empty());
    }

    #[test]
    fn paragraph_split_single_paragraph() {
        let doc = Document::from_text("d1", "abc");
        assert_eq!(doc.paragraphs, vec![Span::new(0, 3)]);
    }

    #[test]
    fn paragraph_split_whitespace_only_separator_lines() {
        let doc = Document::from_text("d1", "a\n \t\nb\n");
        assert_eq!(doc.paragraphs, vec![Span::new(0, 1), Span::new(5, 6)]);
    }

    #[test]
    fn paragraph_split_multiline_paragraph() {
        let doc = Document::from_text("d1", "a\nb\n\nc");
        assert_eq!(doc.paragraphs, vec![Span::new(0, 3), Span::new(5, 6)]);
    }

    #[test]
    fn annotations_single_record() {
        let docs = vec![Document::from_text("d1", "Tere. Ja veel.")];
        let sets = parse_annotations("a1\td1\t5\torthographic\n", &docs).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].annotator_id, "a1");
        let seg = &sets[0].segmentations["d1"];
        assert_eq!(
            seg.boundaries,
            vec![Boundary::new(5, BoundaryTier::Orthographic)]
        );
    }

    #[test]
    fn annotations_duplicate_rejected() {
        let docs = vec![Document::from_text("d1", "Tere.")];
        let text = "a1\td1\t5\torthographic\na1\td1\t5\tboth\n";
        assert!(matches!(
            parse_annotations(text, &docs),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn annotations_tiers_preserved() {
        let docs = vec![Document::from_text("d1", "Tere. Ja veel ka")];
        let text = "a1\td1\t5\tboth\na1\td1\t12\tsyntactic\n";
        let sets = parse_annotations(text, &docs).unwrap();
        let seg = &sets[0].segmentations["d1"];
        assert_eq!(seg.boundaries[0].tier, BoundaryTier::Both);
        assert_eq!(seg.boundaries[1].tier, BoundaryTier::Syntactic);
    }

    #[test]
    fn annotations_unknown_doc() {
        let docs = vec![Document::from_text("d1", "Tere.")];
        assert!(matches!(
            parse_annotations("a1\tnope\t5\tboth\n", &docs),
            Err(Error::Reference { .. })
        ));
    }

    #[test]
    fn annotations_unknown_tier() {
        let docs = vec![Document::from_text("d1", "Tere.")];
        assert!(matches!(
            parse_annotations("a1\td1\t5\tweird\n", &docs),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn segmentation_validate_requires_paragraph_final_boundary() {
        let doc = Document::from_text("d1", "Tere.\n\nTule");
        let tokens = vec![
            Token::new(Span::new(0, 4), "Tere"),
            Token::new(Span::new(4, 5), "."),
            Token::new(Span::new(7, 11), "Tule"),
        ];
        let ok = Segmentation::new(
            "d1",
            vec![
                Boundary::new(5, BoundaryTier::Orthographic),
                Boundary::new(11, BoundaryTier::Orthographic),
            ],
        );
        assert!(ok.validate(&doc, &tokens).is_ok());

        let missing = Segmentation::new("d1", vec![Boundary::new(5, BoundaryTier::Orthographic)]);
        assert!(missing.validate(&doc, &tokens).is_err());

        let off_token = Segmentation::new("d1", vec![Boundary::new(3, BoundaryTier::Orthographic)]);
        assert!(off_token.validate(&doc, &tokens).is_err());
    }

    #[test]
    fn sentences_cover_all_tokens() {
        let tokens = vec![
            Token::new(Span::new(0, 4), "Tere"),
            Token::new(Span::new(4, 5), "."),
            Token::new(Span::new(6, 10), "Tule"),
        ];
        let seg = Segmentation::new("d1", vec![Boundary::new(5, BoundaryTier::Orthographic)]);
        assert_eq!(seg.sentences(&tokens), vec![0..2, 2..3]);
    }
}
