//! CoNLL-U export and import.
//!
//! Export emits `# newdoc id`, `# newpar` at paragraph starts and a
//! `# sent_type` metadata line carrying the boundary tier of each sentence.
//! Only ID, FORM and the `SpaceAfter=No` MISC feature are produced; all other
//! columns stay underscored.

use crate::corpus::{Boundary, BoundaryTier, Document, Segmentation, Span, Token};
use crate::error::{Error, Result};

/// A document reconstructed from CoNLL-U input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConlluDoc {
    pub document: Document,
    pub tokens: Vec<Token>,
    pub segmentation: Segmentation,
}

/// Serializes one tokenized, segmented document as CoNLL-U text.
pub fn export_conllu(
    document: &Document,
    tokens: &[Token],
    segmentation: &Segmentation,
) -> Result<String> {
    if segmentation.doc_id != document.id {
        return Err(Error::Consistency(format!(
            "segmentation is for '{}', document is '{}'",
            segmentation.doc_id, document.id
        )));
    }
    if tokens.is_empty() {
        return Ok(String::new());
    }
    segmentation.validate(document, tokens)?;

    let para_starts: Vec<usize> = document
        .paragraphs
        .iter()
        .filter_map(|para| {
            tokens
                .iter()
                .position(|t| t.span.start >= para.start && t.span.end <= para.end)
        })
        .collect();

    let mut out = String::new();
    out.push_str(&format!("# newdoc id = {}\n", document.id));
    for range in segmentation.sentences(tokens) {
        if para_starts.contains(&range.start) {
            out.push_str("# newpar\n");
        }
        let last_end = tokens[range.end - 1].span.end;
        let tier = segmentation
            .tier_at(last_end)
            .unwrap_or(BoundaryTier::Orthographic);
        out.push_str(&format!("# sent_type = {tier}\n"));
        for (n, i) in range.clone().enumerate() {
            let tok = &tokens[i];
            let glued = tokens
                .get(i + 1)
                .map(|next| next.span.start == tok.span.end)
                .unwrap_or(false);
            let misc = if glued { "SpaceAfter=No" } else { "_" };
            out.push_str(&format!(
                "{}\t{}\t_\t_\t_\t_\t_\t_\t_\t{}\n",
                n + 1,
                tok.surface,
                misc
            ));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses CoNLL-U text into one entry per `# newdoc`. Text is reconstructed
/// from FORM plus `SpaceAfter=No`, paragraphs from `# newpar`, boundaries from
/// sentence ends; `sent_type` defaults to orthographic. Multiword-token range
/// lines and empty-node lines are skipped for span reconstruction.
pub fn import_conllu(text: &str) -> Result<Vec<ConlluDoc>> {
    let mut docs: Vec<DocBuilder> = Vec::new();
    let mut sent_type: Option<BoundaryTier> = None;
    let mut newpar_pending = false;
    let mut sent_tokens: Vec<(String, bool)> = Vec::new(); // (form, space_after)

    let flush_sentence = |docs: &mut Vec<DocBuilder>,
                              sent_tokens: &mut Vec<(String, bool)>,
                              sent_type: &mut Option<BoundaryTier>,
                              newpar_pending: &mut bool| {
        if sent_tokens.is_empty() {
            return;
        }
        if docs.is_empty() {
            docs.push(DocBuilder::new("doc"));
        }
        let doc = docs.last_mut().unwrap();
        doc.push_sentence(
            std::mem::take(sent_tokens),
            sent_type.take().unwrap_or(BoundaryTier::Orthographic),
            std::mem::take(newpar_pending),
        );
    };

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            flush_sentence(&mut docs, &mut sent_tokens, &mut sent_type, &mut newpar_pending);
            continue;
        }
        if let Some(rest) = line.strip_prefix("# newdoc") {
            flush_sentence(&mut docs, &mut sent_tokens, &mut sent_type, &mut newpar_pending);
            let id = rest
                .trim()
                .strip_prefix("id =")
                .map(|s| s.trim().to_string())
                .unwrap_or_else(|| format!("doc{}", docs.len() + 1));
            docs.push(DocBuilder::new(id));
            continue;
        }
        if line.trim() == "# newpar" {
            newpar_pending = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("# sent_type =") {
            sent_type = Some(BoundaryTier::parse(rest.trim()).map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("unknown sent_type '{}'", rest.trim()),
            })?);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 10 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 10 columns, got {}", fields.len()),
            });
        }
        let id_col = fields[0];
        if id_col.contains('-') || id_col.contains('.') {
            // multiword-token range line or empty node: no span of its own
            continue;
        }
        let _: usize = id_col.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("invalid token id '{id_col}'"),
        })?;
        let form = fields[1];
        if form.is_empty() || form.chars().any(char::is_whitespace) {
            return Err(Error::Parse {
                line: lineno,
                msg: "FORM must be non-empty and whitespace-free".to_string(),
            });
        }
        let space_after = !fields[9].split('|').any(|f| f == "SpaceAfter=No");
        sent_tokens.push((form.to_string(), space_after));
    }
    flush_sentence(&mut docs, &mut sent_tokens, &mut sent_type, &mut newpar_pending);

    Ok(docs.into_iter().map(DocBuilder::finish).collect())
}

struct DocBuilder {
    id: String,
    text: String,
    offset: usize,
    tokens: Vec<Token>,
    boundaries: Vec<Boundary>,
    paragraphs: Vec<Span>,
    para_start: Option<usize>,
    pending_space: bool,
}

impl DocBuilder {
    fn new(id: impl Into<String>) -> DocBuilder {
        DocBuilder {
            id: id.into(),
            text: String::new(),
            offset: 0,
            tokens: Vec::new(),
            boundaries: Vec::new(),
            paragraphs: Vec::new(),
            para_start: None,
            pending_space: false,
        }
    }

    fn push_sentence(&mut self, forms: Vec<(String, bool)>, tier: BoundaryTier, newpar: bool) {
        if newpar && self.para_start.is_some() {
            self.close_paragraph();
        }
        for (form, space_after) in forms {
            if self.pending_space {
                self.text.push(' ');
                self.offset += 1;
            }
            if self.para_start.is_none() {
                self.para_start = Some(self.offset);
            }
            let len = form.chars().count();
            let span = Span::new(self.offset, self.offset + len);
            self.text.push_str(&form);
            self.offset += len;
            self.tokens.push(Token::new(span, form));
            self.pending_space = space_after;
        }
        if let Some(last) = self.tokens.last() {
            let offset = last.span.end;
            if self.boundaries.last().map(|b| b.offset) != Some(offset) {
                self.boundaries.push(Boundary::new(offset, tier));
            }
        }
    }

    fn close_paragraph(&mut self) {
        if let Some(start) = self.para_start.take() {
            self.paragraphs.push(Span::new(start, self.offset));
            self.text.push_str("\n\n");
            self.offset += 2;
            self.pending_space = false;
        }
    }

    fn finish(mut self) -> ConlluDoc {
        if let Some(start) = self.para_start.take() {
            self.paragraphs.push(Span::new(start, self.offset));
        }
        ConlluDoc {
            document: Document {
                id: self.id.clone(),
                text: self.text,
                paragraphs: self.paragraphs,
            },
            tokens: self.tokens,
            segmentation: Segmentation::new(self.id, self.boundaries),
        }
    }
}

/// Checks whether paragraph-final forced boundaries hold, then exports; used
/// by round-trip tests where the input came from `import_conllu`.
pub fn reexport(doc: &ConlluDoc) -> Result<String> {
    export_conllu(&doc.document, &doc.tokens, &doc.segmentation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_one_sentence() -> (Document, Vec<Token>, Segmentation) {
        let doc = Document::from_text("d1", "Tere.");
        let tokens = vec![
            Token::new(Span::new(0, 4), "Tere"),
            Token::new(Span::new(4, 5), "."),
        ];
        let seg = Segmentation::new("d1", vec![Boundary::new(5, BoundaryTier::Orthographic)]);
        (doc, tokens, seg)
    }

    #[test]
    fn export_simple_sentence() {
        let (doc, tokens, seg) = doc_one_sentence();
        let out = export_conllu(&doc, &tokens, &seg).unwrap();
        let expected = "# newdoc id = d1\n\
                        # newpar\n\
                        # sent_type = orthographic\n\
                        1\tTere\t_\t_\t_\t_\t_\t_\t_\tSpaceAfter=No\n\
                        2\t.\t_\t_\t_\t_\t_\t_\t_\t_\n\n";
        assert_eq!(out, expected);
    }

    #[test]
    fn export_glued_tokens_spaceafter() {
        let doc = Document::from_text("d1", "a.b");
        let tokens = vec![
            Token::new(Span::new(0, 1), "a"),
            Token::new(Span::new(1, 2), "."),
            Token::new(Span::new(2, 3), "b"),
        ];
        let seg = Segmentation::new("d1", vec![Boundary::new(3, BoundaryTier::Orthographic)]);
        let out = export_conllu(&doc, &tokens, &seg).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[3].ends_with("SpaceAfter=No"));
        assert!(lines[4].ends_with("SpaceAfter=No"));
        assert!(lines[5].ends_with("\t_"));
    }

    #[test]
    fn export_empty_document() {
        let doc = Document::from_text("d1", "");
        let seg = Segmentation::new("d1", vec![]);
        assert_eq!(export_conllu(&doc, &[], &seg).unwrap(), "");
    }

    #[test]
    fn export_mismatched_doc_id() {
        let (doc, tokens, _) = doc_one_sentence();
        let seg = Segmentation::new("other", vec![Boundary::new(5, BoundaryTier::Orthographic)]);
        assert!(export_conllu(&doc, &tokens, &seg).is_err());
    }

    #[test]
    fn import_round_trip() {
        let doc = Document::from_text("d1", "Tere. Kuidas läheb?\n\nTore!");
        let tokens = vec![
            Token::new(Span::new(0, 4), "Tere"),
            Token::new(Span::new(4, 5), "."),
            Token::new(Span::new(6, 12), "Kuidas"),
            Token::new(Span::new(13, 18), "läheb"),
            Token::new(Span::new(18, 19), "?"),
            Token::new(Span::new(21, 25), "Tore"),
            Token::new(Span::new(25, 26), "!"),
        ];
        let seg = Segmentation::new(
            "d1",
            vec![
                Boundary::new(5, BoundaryTier::Both),
                Boundary::new(19, BoundaryTier::Orthographic),
                Boundary::new(26, BoundaryTier::Syntactic),
            ],
        );
        let out = export_conllu(&doc, &tokens, &seg).unwrap();
        let imported = import_conllu(&out).unwrap();
        assert_eq!(imported.len(), 1);
        let got = &imported[0];
        assert_eq!(got.document.text, doc.text);
        assert_eq!(got.tokens, tokens);
        assert_eq!(got.segmentation, seg);
        // exporting again is byte-identical
        assert_eq!(reexport(got).unwrap(), out);
    }

    #[test]
    fn import_default_tier_is_orthographic() {
        let text = "1\tTere\t_\t_\t_\t_\t_\t_\t_\tSpaceAfter=No\n\
                    2\t.\t_\t_\t_\t_\t_\t_\t_\t_\n\n";
        let docs = import_conllu(text).unwrap();
        assert_eq!(
            docs[0].segmentation.boundaries,
            vec![Boundary::new(5, BoundaryTier::Orthographic)]
        );
    }

    #[test]
    fn import_skips_multiword_range_lines() {
        let text = "1-2\tpole\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    1\tei\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    2\tole\t_\t_\t_\t_\t_\t_\t_\t_\n\n";
        let docs = import_conllu(text).unwrap();
        assert_eq!(docs[0].document.text, "ei ole");
        assert_eq!(docs[0].tokens.len(), 2);
        assert_eq!(docs[0].tokens[1].span, Span::new(3, 6));
    }

    #[test]
    fn import_malformed_line_reports_line_number() {
        let text = "1\tTere\t_\t_\n\n";
        match import_conllu(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
