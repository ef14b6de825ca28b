use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use websent::agreement;
use websent::conllu::{export_conllu, import_conllu, ConlluDoc};
use websent::corpus::{self, AnnotationSet, Document, Segmentation, Token};
use websent::error::Error;
use websent::error_analysis::{classify_errors, ErrorCategory, ErrorInstance};
use websent::eval::{sentence_eval_counts, token_f1, Prf, Scenario};
use websent::segmenter::{
    parse_model, segment, serialize_model, train, EmoticonAttach, PunctRunPolicy, PunktModel,
    WebRuleConfig,
};
use websent::tokenizer::{classify_surface, tokenize, TokenClass, TokenizerConfig};

#[derive(Parser)]
#[command(name = "websent", version, about = "Sentence segmentation and tokenization for noisy web text", disable_help_subcommand = true)]
struct Cli {
    /// Maximum number of documents processed in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct LexiconArgs {
    /// Abbreviation lexicon file (one entry per line, no final period).
    #[arg(long)]
    abbrev: Option<PathBuf>,
    /// Emoticon pattern file.
    #[arg(long)]
    emoticons: Option<PathBuf>,
}

impl LexiconArgs {
    fn build(&self) -> Result<TokenizerConfig, Error> {
        let mut config = TokenizerConfig::default();
        if let Some(path) = &self.abbrev {
            config.load_abbreviations(path)?;
        }
        if let Some(path) = &self.emoticons {
            config.emoticons = websent::tokenizer::EmoticonLexicon::load(path)?;
        }
        Ok(config)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TokenOutputFormat {
    Conllu,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Always,
    CapitalizedNext,
    Never,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttachArg {
    Previous,
    OwnSentence,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    All,
    Orthographic,
    Relaxed,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Scenario {
        match s {
            ScenarioArg::All => Scenario::All,
            ScenarioArg::Orthographic => Scenario::Orthographic,
            ScenarioArg::Relaxed => Scenario::Relaxed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize a plain-text corpus.
    Tokenize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = TokenOutputFormat::Conllu)]
        format: TokenOutputFormat,
        #[command(flatten)]
        lexicons: LexiconArgs,
    },
    /// Train a boundary-detector model on raw text.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Tokenize and segment a corpus, writing CoNLL-U.
    Segment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Fail instead of falling back to rules-only segmentation.
        #[arg(long)]
        require_model: bool,
        /// Merge all paragraphs before segmenting.
        #[arg(long)]
        ignore_paragraphs: bool,
        /// Do not force a boundary at every paragraph end.
        #[arg(long)]
        no_force_paragraph: bool,
        #[arg(long, value_enum, default_value_t = PolicyArg::CapitalizedNext)]
        punct_run_policy: PolicyArg,
        #[arg(long, value_enum, default_value_t = AttachArg::Previous)]
        emoticon_attach: AttachArg,
        /// Do not place boundaries where no whitespace follows the punctuation.
        #[arg(long)]
        no_glued_split: bool,
        #[command(flatten)]
        lexicons: LexiconArgs,
    },
    /// Score a system CoNLL-U file against gold CoNLL-U.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        system: PathBuf,
        /// Restrict to a subset of scenarios (repeatable).
        #[arg(long, value_enum)]
        scenario: Vec<ScenarioArg>,
        #[arg(long = "out")]
        output: Option<PathBuf>,
        /// Human-readable table instead of TSV.
        #[arg(long)]
        pretty: bool,
    },
    /// Inter-annotator agreement over a standoff annotation file.
    Agreement {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long = "out")]
        output: Option<PathBuf>,
        #[arg(long)]
        pretty: bool,
        #[command(flatten)]
        lexicons: LexiconArgs,
    },
    /// Majority-vote aggregation of annotations into a gold standoff file.
    Aggregate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        min_votes: usize,
        #[arg(long = "out")]
        output: PathBuf,
        /// Annotator id recorded in the output.
        #[arg(long, default_value = "gold")]
        annotator_id: String,
    },
    /// Classify segmentation errors of a system output against gold.
    Errors {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "out")]
        output: Option<PathBuf>,
        /// Write the per-error instance list to this file.
        #[arg(long)]
        instances: Option<PathBuf>,
        #[arg(long)]
        pretty: bool,
        #[command(flatten)]
        lexicons: LexiconArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("websent: {e}");
            let code = match e {
                Error::Argument(_) => 1,
                Error::Consistency(_) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Tokenize {
            input,
            output,
            format,
            lexicons,
        } => cmd_tokenize(&input, &output, format, &lexicons.build()?),
        Command::Train { input, model } => cmd_train(&input, &model),
        Command::Segment {
            input,
            output,
            model,
            require_model,
            ignore_paragraphs,
            no_force_paragraph,
            punct_run_policy,
            emoticon_attach,
            no_glued_split,
            lexicons,
        } => {
            let model = match (&model, require_model) {
                (Some(path), _) => parse_model(&read_text(path)?)?,
                (None, true) => {
                    return Err(Error::Argument(
                        "--require-model set but no --model given".to_string(),
                    ))
                }
                (None, false) => PunktModel::default(),
            };
            let config = WebRuleConfig {
                force_paragraph_boundary: !no_force_paragraph,
                punct_run_boundary_policy: match punct_run_policy {
                    PolicyArg::Always => PunctRunPolicy::Always,
                    PolicyArg::CapitalizedNext => PunctRunPolicy::CapitalizedNext,
                    PolicyArg::Never => PunctRunPolicy::Never,
                },
                emoticon_attach: match emoticon_attach {
                    AttachArg::Previous => EmoticonAttach::Previous,
                    AttachArg::OwnSentence => EmoticonAttach::OwnSentence,
                },
                glued_split: !no_glued_split,
            };
            cmd_segment(
                &input,
                &output,
                &model,
                &config,
                ignore_paragraphs,
                &lexicons.build()?,
            )
        }
        Command::Evaluate {
            gold,
            system,
            scenario,
            output,
            pretty,
        } => {
            let scenarios: Vec<Scenario> = if scenario.is_empty() {
                Scenario::ALL.to_vec()
            } else {
                scenario.into_iter().map(Scenario::from).collect()
            };
            cmd_evaluate(&gold, &system, &scenarios, output.as_deref(), pretty)
        }
        Command::Agreement {
            corpus,
            annotations,
            output,
            pretty,
            lexicons,
        } => cmd_agreement(
            &corpus,
            &annotations,
            output.as_deref(),
            pretty,
            &lexicons.build()?,
        ),
        Command::Aggregate {
            corpus,
            annotations,
            min_votes,
            output,
            annotator_id,
        } => cmd_aggregate(&corpus, &annotations, min_votes, &output, &annotator_id),
        Command::Errors {
            gold,
            system,
            output,
            instances,
            pretty,
            lexicons,
        } => cmd_errors(
            &gold,
            &system,
            output.as_deref(),
            instances.as_deref(),
            pretty,
            &lexicons.build()?,
        ),
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        byte: e.utf8_error().valid_up_to(),
    })
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Error> {
    match path {
        Some(path) => std::fs::write(path, content).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Paragraph-final boundaries only; the placeholder segmentation used when
/// tokenizing without a segmenter run.
fn paragraph_segmentation(doc: &Document, tokens: &[Token]) -> Segmentation {
    let boundaries = corpus::paragraph_final_token_ends(doc, tokens)
        .into_iter()
        .map(|o| corpus::Boundary::new(o, corpus::BoundaryTier::Orthographic))
        .collect();
    Segmentation::new(doc.id.clone(), boundaries)
}

fn cmd_tokenize(
    input: &Path,
    output: &Path,
    format: TokenOutputFormat,
    config: &TokenizerConfig,
) -> Result<(), Error> {
    let docs = corpus::load_corpus(input)?;
    let parts: Vec<String> = docs
        .par_iter()
        .map(|doc| -> Result<String, Error> {
            let tokens = tokenize(doc, config);
            match format {
                TokenOutputFormat::Conllu => {
                    let plain: Vec<Token> = tokens.iter().map(|(t, _)| t.clone()).collect();
                    let seg = paragraph_segmentation(doc, &plain);
                    export_conllu(doc, &plain, &seg)
                }
                TokenOutputFormat::Tsv => Ok(tokens
                    .iter()
                    .map(|(t, c)| {
                        format!(
                            "{}\t{}\t{}\t{}\t{}\n",
                            doc.id,
                            t.span.start,
                            t.span.end,
                            c.as_str(),
                            t.surface
                        )
                    })
                    .collect()),
            }
        })
        .collect::<Result<_, _>>()?;
    write_output(Some(output), &parts.concat())
}

fn cmd_train(input: &Path, model_path: &Path) -> Result<(), Error> {
    let docs = corpus::load_corpus(input)?;
    let text: Vec<String> = docs.iter().map(|d| d.text.clone()).collect();
    let model = train(&text.join("\n\n"));
    if model.is_empty() {
        eprintln!("websent: warning: empty corpus, writing an empty model");
    }
    write_output(Some(model_path), &serialize_model(&model))
}

fn cmd_segment(
    input: &Path,
    output: &Path,
    model: &PunktModel,
    config: &WebRuleConfig,
    ignore_paragraphs: bool,
    tok_config: &TokenizerConfig,
) -> Result<(), Error> {
    let docs = corpus::load_corpus(input)?;
    let parts: Vec<String> = docs
        .par_iter()
        .map(|doc| -> Result<String, Error> {
            let doc = if ignore_paragraphs {
                doc.without_paragraphs()
            } else {
                doc.clone()
            };
            let tokens = tokenize(&doc, tok_config);
            let seg = segment(&tokens, &doc, model, config)?;
            let plain: Vec<Token> = tokens.into_iter().map(|(t, _)| t).collect();
            // without forced paragraph boundaries the CoNLL-U export cannot
            // mark paragraph starts mid-sentence; drop paragraph info then
            let export_doc = if config.force_paragraph_boundary {
                doc
            } else {
                doc.without_paragraphs()
            };
            export_conllu(&export_doc, &plain, &seg)
        })
        .collect::<Result<_, _>>()?;
    write_output(Some(output), &parts.concat())
}

fn pair_documents<'a>(
    gold: &'a [ConlluDoc],
    system: &'a [ConlluDoc],
) -> Result<Vec<(&'a ConlluDoc, &'a ConlluDoc)>, Error> {
    let by_id: BTreeMap<&str, &ConlluDoc> = system
        .iter()
        .map(|d| (d.document.id.as_str(), d))
        .collect();
    gold.iter()
        .map(|g| {
            by_id
                .get(g.document.id.as_str())
                .map(|s| (g, *s))
                .ok_or_else(|| Error::Reference {
                    doc_id: g.document.id.clone(),
                })
        })
        .collect()
}

fn cmd_evaluate(
    gold_path: &Path,
    system_path: &Path,
    scenarios: &[Scenario],
    output: Option<&Path>,
    pretty: bool,
) -> Result<(), Error> {
    let gold = import_conllu(&read_text(gold_path)?)?;
    let system = import_conllu(&read_text(system_path)?)?;
    let pairs = pair_documents(&gold, &system)?;

    let mut rows: Vec<(String, Prf)> = Vec::new();
    for &scenario in scenarios {
        let mut tp = 0;
        let mut sys_total = 0;
        let mut gold_total = 0;
        for (g, s) in &pairs {
            // alignment check happens inside token_f1 below as well; fail fast
            // here so sentence counts are never produced for mismatched text
            let (a, b, c) = {
                websent::eval::sentence_eval(
                    &g.tokens,
                    &g.segmentation,
                    &s.tokens,
                    &s.segmentation,
                    scenario,
                )?;
                sentence_eval_counts(&g.tokens, &g.segmentation, &s.tokens, &s.segmentation, scenario)
            };
            tp += a;
            sys_total += b;
            gold_total += c;
        }
        rows.push((
            format!("sentences_{}", scenario.as_str()),
            Prf::from_counts(tp, sys_total, gold_total),
        ));
    }
    {
        let mut tp = 0;
        let mut sys_total = 0;
        let mut gold_total = 0;
        for (g, s) in &pairs {
            let prf = token_f1(&g.tokens, &s.tokens)?;
            tp += prf.tp;
            sys_total += prf.sys_total;
            gold_total += prf.gold_total;
        }
        rows.push((
            "tokens".to_string(),
            Prf::from_counts(tp, sys_total, gold_total),
        ));
    }

    let mut out = String::new();
    if pretty {
        out.push_str(&format!(
            "{:<24} {:>8} {:>8} {:>8}\n",
            "", "Prec", "Rec", "F1"
        ));
        for (name, prf) in &rows {
            out.push_str(&format!(
                "{:<24} {:>8.2} {:>8.2} {:>8.2}\n",
                pretty_row_name(name),
                prf.precision * 100.0,
                prf.recall * 100.0,
                prf.f1 * 100.0
            ));
        }
    } else {
        for (name, prf) in &rows {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\n",
                name, prf.precision, prf.recall, prf.f1, prf.tp, prf.sys_total, prf.gold_total
            ));
        }
    }
    write_output(output, &out)
}

fn pretty_row_name(name: &str) -> &'static str {
    match name {
        "sentences_all" => "All boundaries",
        "sentences_orthographic" => "Orth. boundaries",
        "sentences_relaxed" => "Relaxed boundaries",
        "tokens" => "Tokenization",
        _ => "?",
    }
}

fn validate_annotation_offsets(
    sets: &[AnnotationSet],
    tokens_by_doc: &BTreeMap<String, Vec<Token>>,
) -> Result<(), Error> {
    for set in sets {
        for seg in set.segmentations.values() {
            let Some(tokens) = tokens_by_doc.get(&seg.doc_id) else {
                return Err(Error::Reference {
                    doc_id: seg.doc_id.clone(),
                });
            };
            for b in &seg.boundaries {
                if !tokens.iter().any(|t| t.span.end == b.offset) {
                    return Err(Error::Consistency(format!(
                        "annotator '{}': boundary {} in '{}' is not a token end",
                        set.annotator_id, b.offset, seg.doc_id
                    )));
                }
            }
        }
    }
    Ok(())
}

fn cmd_agreement(
    corpus_path: &Path,
    annotations_path: &Path,
    output: Option<&Path>,
    pretty: bool,
    tok_config: &TokenizerConfig,
) -> Result<(), Error> {
    let docs = corpus::load_corpus(corpus_path)?;
    let sets = corpus::load_annotations(annotations_path, &docs)?;
    let mut tokens_by_doc = BTreeMap::new();
    let mut positions = BTreeMap::new();
    for doc in &docs {
        let tokens: Vec<Token> = tokenize(doc, tok_config).into_iter().map(|(t, _)| t).collect();
        let pos = agreement::candidate_positions(doc, &tokens);
        if !pos.is_empty() {
            positions.insert(doc.id.clone(), pos);
        }
        tokens_by_doc.insert(doc.id.clone(), tokens);
    }
    validate_annotation_offsets(&sets, &tokens_by_doc)?;
    let report = agreement::agreement_report(&sets, &positions)?;

    let rows = [
        ("binary", report.dice_binary, report.kappa_binary),
        (
            "orthographic",
            report.dice_orthographic,
            report.kappa_orthographic,
        ),
        ("syntactic", report.dice_syntactic, report.kappa_syntactic),
    ];
    let mut out = String::new();
    if pretty {
        out.push_str(&format!("{:<24} {:>8} {:>10}\n", "", "Dice", "Fleiss k"));
        for (name, dice, kappa) in rows {
            out.push_str(&format!(
                "{:<24} {:>8.2} {:>10.2}\n",
                format!("{} boundary", capitalize(name)),
                dice,
                kappa
            ));
        }
    } else {
        for (name, dice, kappa) in rows {
            out.push_str(&format!("{name}\t{dice:.6}\t{kappa:.6}\n"));
        }
        out.push_str(&format!(
            "# items\t{}\n# annotators\t{}\n",
            report.n_items, report.n_annotators
        ));
    }
    write_output(output, &out)
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn cmd_aggregate(
    corpus_path: &Path,
    annotations_path: &Path,
    min_votes: usize,
    output: &Path,
    annotator_id: &str,
) -> Result<(), Error> {
    let docs = corpus::load_corpus(corpus_path)?;
    let sets = corpus::load_annotations(annotations_path, &docs)?;
    let mut gold = AnnotationSet::new(annotator_id);
    for doc in &docs {
        let covering: Vec<AnnotationSet> = sets
            .iter()
            .filter(|s| s.segmentations.contains_key(&doc.id))
            .cloned()
            .collect();
        if covering.is_empty() {
            continue;
        }
        let seg = agreement::aggregate_majority(&covering, &doc.id, min_votes)?;
        gold.segmentations.insert(doc.id.clone(), seg);
    }
    write_output(Some(output), &corpus::write_annotations(&[gold]))
}

fn cmd_errors(
    gold_path: &Path,
    system_path: &Path,
    output: Option<&Path>,
    instances_path: Option<&Path>,
    pretty: bool,
    tok_config: &TokenizerConfig,
) -> Result<(), Error> {
    let gold = import_conllu(&read_text(gold_path)?)?;
    let system = import_conllu(&read_text(system_path)?)?;
    let pairs = pair_documents(&gold, &system)?;

    let with_classes = |doc: &ConlluDoc| -> Vec<(Token, TokenClass)> {
        doc.tokens
            .iter()
            .map(|t| (t.clone(), classify_surface(&t.surface, tok_config)))
            .collect()
    };

    let mut counts: BTreeMap<ErrorCategory, usize> = BTreeMap::new();
    let mut instances: Vec<ErrorInstance> = Vec::new();
    for (g, s) in &pairs {
        let (c, inst) = classify_errors(
            &g.document,
            &g.segmentation,
            &s.segmentation,
            &with_classes(g),
            &with_classes(s),
        )?;
        for (cat, n) in c {
            *counts.entry(cat).or_insert(0) += n;
        }
        instances.extend(inst);
    }
    let total: usize = counts.values().sum();

    let mut out = String::new();
    if pretty {
        out.push_str(&format!(
            "{:>3}  {:<56} {:>4} {:>6} {:>6}\n",
            "No", "Error category", "Type", "Count", "%"
        ));
    }
    for cat in ErrorCategory::ALL {
        let count = counts.get(&cat).copied().unwrap_or(0);
        let pct = if total == 0 {
            0.0
        } else {
            100.0 * count as f64 / total as f64
        };
        let id = cat.id().map(|i| i.to_string()).unwrap_or_default();
        let dir = cat
            .direction()
            .map(|d| if d == websent::error_analysis::Direction::Missing { "M" } else { "A" })
            .unwrap_or("");
        if pretty {
            out.push_str(&format!(
                "{:>3}  {:<56} {:>4} {:>6} {:>5.1}%\n",
                id,
                cat.name(),
                dir,
                count,
                pct
            ));
        } else {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.4}\n",
                id,
                cat.name(),
                dir,
                count,
                pct
            ));
        }
    }
    write_output(output, &out)?;

    if let Some(path) = instances_path {
        let mut lines = String::new();
        for inst in &instances {
            lines.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                inst.doc_id,
                inst.offset,
                inst.direction.as_str(),
                inst.category.name(),
                inst.context
            ));
        }
        write_output(Some(path), &lines)?;
    }
    Ok(())
}
