//! Text file formats: sequence corpora, coefficient matrices, interaction
//! profiles, and the evaluation report.
//!
//! All formats are line-oriented UTF-8 with LF endings. Floating-point
//! values are written in shortest exact scientific notation, so every
//! save/load round trip reproduces the numbers bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::{Corpus, EntityId, ExposureEvent, Sequence, Vocabulary};
use crate::evaluation::ExperimentResult;
use crate::kernels::{profile_intensity, BetaMatrix, BetaVector, KernelSpec};
use crate::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Renders a corpus in the sequence format: one line per sequence, each
/// event as `label:flag` with flag 0 or 1, events comma-separated.
pub fn format_sequences(corpus: &Corpus) -> Result<String> {
    for label in corpus.vocabulary.labels() {
        if label.is_empty() || label.contains([',', '\n', '\r']) || label.contains(':') {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "label {label:?} cannot be written: labels must be nonempty and free of ',', ':' and line breaks"
                ),
            });
        }
    }
    let mut out = String::new();
    for seq in &corpus.sequences {
        let mut first = true;
        for ev in seq.events() {
            let label = corpus
                .vocabulary
                .label(ev.entity)
                .ok_or(Error::UnknownEntity {
                    index: ev.entity.0,
                    vocab_size: corpus.vocabulary.len(),
                })?;
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{label}:{}", ev.contagion as u8);
            first = false;
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save_sequences(path: &Path, corpus: &Corpus) -> Result<()> {
    fs::write(path, format_sequences(corpus)?).map_err(|e| Error::io(path, e))
}

enum LoadMode<'a> {
    /// Unknown labels extend the vocabulary in order of first appearance.
    Open,
    /// Labels must come from the supplied vocabulary.
    Strict(&'a Vocabulary),
}

fn parse_sequences(text: &str, mode: LoadMode) -> Result<Corpus> {
    let mut vocab = match &mode {
        LoadMode::Open => Vocabulary::new(),
        LoadMode::Strict(v) => (*v).clone(),
    };
    let mut sequences = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut events = Vec::new();
        for token in line.split(',') {
            let (label, flag) = token
                .rsplit_once(':')
                .ok_or_else(|| parse_err(line_no, format!("token {token:?} lacks a ':flag'")))?;
            if label.is_empty() {
                return Err(parse_err(line_no, format!("token {token:?} has an empty label")));
            }
            let contagion = match flag {
                "0" => false,
                "1" => true,
                other => {
                    return Err(parse_err(
                        line_no,
                        format!("flag {other:?} must be 0 or 1"),
                    ))
                }
            };
            let entity = match mode {
                LoadMode::Open => vocab.intern(label),
                LoadMode::Strict(_) => vocab.get(label).ok_or(Error::UnknownLabel {
                    line: line_no,
                    label: label.to_string(),
                })?,
            };
            events.push(ExposureEvent::new(entity, contagion));
        }
        sequences.push(
            Sequence::new(events)
                .map_err(|_| parse_err(line_no, "empty sequence"))?,
        );
    }
    Ok(Corpus::new(vocab, sequences))
}

/// Loads a sequence file, growing the vocabulary as labels appear.
/// Comment lines (`#`) and blank lines are skipped; line numbers in
/// errors refer to the file as written.
pub fn load_sequences(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequences(&text, LoadMode::Open)
}

/// Loads a sequence file against a fixed vocabulary; any label outside it
/// is rejected with its line number.
pub fn load_sequences_strict(path: &Path, vocabulary: &Vocabulary) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequences(&text, LoadMode::Strict(vocabulary))
}

fn kernel_header(kernel: KernelSpec, entities: usize) -> String {
    // The EXP family has no shift parameter; S is written as 0 and
    // ignored when loading.
    let s = match kernel {
        KernelSpec::Rbf { max_shift } => max_shift,
        KernelSpec::Exp => 0,
    };
    format!("kernel={kernel} S={s} entities={entities}\n")
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains([',', '\n', '\r']) {
        return Err(Error::InvalidConfig {
            reason: format!(
                "label {label:?} cannot be written: labels must be nonempty and free of ',' and line breaks"
            ),
        });
    }
    Ok(())
}

/// Renders a coefficient matrix: a header line
/// `kernel=<RBF|EXP> S=<int> entities=<int>`, then one line per ordered
/// pair as `target,source,coef0,coef1,...`. Entities are referenced by
/// label so files stay valid across corpora whose internal numbering
/// differs.
pub fn format_beta(beta: &BetaMatrix, vocabulary: &Vocabulary) -> Result<String> {
    let mut out = kernel_header(beta.kernel(), beta.entity_count());
    for (t, s, v) in beta.iter() {
        let label = |id: EntityId| -> Result<&str> {
            let l = vocabulary.label(id).ok_or(Error::UnknownEntity {
                index: id.0,
                vocab_size: vocabulary.len(),
            })?;
            check_label(l)?;
            Ok(l)
        };
        let tl = label(t)?;
        let sl = label(s)?;
        let _ = write!(out, "{tl},{sl}");
        for c in v.coefficients() {
            let _ = write!(out, ",{c:e}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save_beta(path: &Path, beta: &BetaMatrix, vocabulary: &Vocabulary) -> Result<()> {
    fs::write(path, format_beta(beta, vocabulary)?).map_err(|e| Error::io(path, e))
}

fn parse_beta(text: &str) -> Result<(BetaMatrix, Vocabulary)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let mut kernel_name = None;
    let mut max_shift = None;
    let mut entities = None;
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("header field {field:?} is not key=value")))?;
        match key {
            "kernel" => kernel_name = Some(value.to_string()),
            "S" => {
                max_shift = Some(value.parse::<u32>().map_err(|_| {
                    parse_err(1, format!("S value {value:?} is not an integer"))
                })?)
            }
            "entities" => {
                entities = Some(value.parse::<usize>().map_err(|_| {
                    parse_err(1, format!("entities value {value:?} is not an integer"))
                })?)
            }
            other => return Err(parse_err(1, format!("unknown header field {other:?}"))),
        }
    }
    let kernel = match kernel_name.as_deref() {
        Some("RBF") => KernelSpec::Rbf {
            max_shift: max_shift.ok_or_else(|| parse_err(1, "RBF header lacks S"))?,
        },
        Some("EXP") => KernelSpec::Exp,
        Some(other) => return Err(parse_err(1, format!("unknown kernel {other:?}"))),
        None => return Err(parse_err(1, "header lacks kernel")),
    };
    let entities = entities.ok_or_else(|| parse_err(1, "header lacks entities"))?;

    let mut beta = BetaMatrix::new(kernel, entities);
    let mut vocab = Vocabulary::new();
    let dim = kernel.dimension();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, found {}", dim + 2, fields.len()),
            ));
        }
        let mut intern = |label: &str| -> Result<EntityId> {
            if label.is_empty() {
                return Err(parse_err(line_no, "empty entity label"));
            }
            let id = vocab.intern(label);
            if vocab.len() > entities {
                return Err(parse_err(
                    line_no,
                    format!("more distinct labels than entities={entities}"),
                ));
            }
            Ok(id)
        };
        let target = intern(fields[0])?;
        let source = intern(fields[1])?;
        let coeffs: Vec<f64> = fields[2..]
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("coefficient {s:?} is not a number")))
            })
            .collect::<Result<_>>()?;
        if beta.get(target, source).is_some() {
            return Err(parse_err(
                line_no,
                format!("duplicate pair ({}, {})", fields[0], fields[1]),
            ));
        }
        let vector = BetaVector::new(kernel, coeffs)
            .map_err(|e| parse_err(line_no, e.to_string()))?;
        beta.insert(target, source, vector)
            .map_err(|e| parse_err(line_no, e.to_string()))?;
    }
    Ok((beta, vocab))
}

/// Loads a coefficient file. The returned vocabulary holds the labels in
/// row-appearance order; entity ids in the matrix index into it.
pub fn load_beta(path: &Path) -> Result<(BetaMatrix, Vocabulary)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_beta(&text)
}

/// Renders the per-pair profile table: CSV with header
/// `target,source,gap,hazard,intensity`, one row per (pair, gap) ordered
/// by (target, source, gap), entities written by label. The intensity
/// column is the hazard minus the pair's background hazard. `max_gap`
/// defaults to the RBF max shift, or 20 for the EXP family.
pub fn format_profile(
    beta: &BetaMatrix,
    vocabulary: &Vocabulary,
    max_gap: Option<u32>,
) -> Result<String> {
    let max_gap = max_gap.unwrap_or(match beta.kernel() {
        KernelSpec::Rbf { max_shift } => max_shift,
        KernelSpec::Exp => 20,
    });
    let mut out = String::from("target,source,gap,hazard,intensity\n");
    for (t, s, v) in beta.iter() {
        let label = |id: EntityId| -> Result<&str> {
            let l = vocabulary.label(id).ok_or(Error::UnknownEntity {
                index: id.0,
                vocab_size: vocabulary.len(),
            })?;
            check_label(l)?;
            Ok(l)
        };
        let tl = label(t)?;
        let sl = label(s)?;
        for gap in 0..=max_gap {
            let h = v.hazard(gap);
            let i = profile_intensity(v, gap);
            let _ = writeln!(out, "{tl},{sl},{gap},{h:e},{i:e}");
        }
    }
    Ok(out)
}

pub fn save_profile(
    path: &Path,
    beta: &BetaMatrix,
    vocabulary: &Vocabulary,
    max_gap: Option<u32>,
) -> Result<()> {
    fs::write(path, format_profile(beta, vocabulary, max_gap)?).map_err(|e| Error::io(path, e))
}

/// Renders the flat evaluation report: `model.foldK.metric=value` lines
/// for every fold, then `model.mean.metric` and `model.stddev.metric`
/// aggregates, with the conventions documented in header comments.
pub fn format_report(result: &ExperimentResult) -> String {
    let mut out = String::new();
    out.push_str("# js: jensen-shannon divergence, natural log, count-weighted mean over cells\n");
    out.push_str("# rss: unweighted sum of squared frequency errors over cells\n");
    out.push_str("# stddev: sample standard deviation across folds (n-1); 0 for a single fold\n");
    for (model, reports) in &result.folds {
        for (fold, r) in reports.iter().enumerate() {
            let _ = writeln!(out, "{model}.fold{fold}.rss={:e}", r.rss);
            let _ = writeln!(out, "{model}.fold{fold}.js={:e}", r.js_divergence);
            let _ = writeln!(out, "{model}.fold{fold}.bcf1={:e}", r.bcf1);
            if let Some(m) = r.mse_beta {
                let _ = writeln!(out, "{model}.fold{fold}.mse_beta={m:e}");
            }
        }
    }
    for (model, s) in &result.summary {
        let _ = writeln!(out, "{model}.mean.rss={:e}", s.rss.mean);
        let _ = writeln!(out, "{model}.stddev.rss={:e}", s.rss.stddev);
        let _ = writeln!(out, "{model}.mean.js={:e}", s.js_divergence.mean);
        let _ = writeln!(out, "{model}.stddev.js={:e}", s.js_divergence.stddev);
        let _ = writeln!(out, "{model}.mean.bcf1={:e}", s.bcf1.mean);
        let _ = writeln!(out, "{model}.stddev.bcf1={:e}", s.bcf1.stddev);
        if let Some(m) = &s.mse_beta {
            let _ = writeln!(out, "{model}.mean.mse_beta={:e}", m.mean);
            let _ = writeln!(out, "{model}.stddev.mse_beta={:e}", m.stddev);
        }
    }
    out
}

pub fn save_report(path: &Path, result: &ExperimentResult) -> Result<()> {
    fs::write(path, format_report(result)).map_err(|e| Error::io(path, e))
}

/// Human-readable aggregate table (mean ± stddev per model and metric).
pub fn format_summary_table(result: &ExperimentResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:>22} {:>22} {:>22} {:>22}",
        "model", "rss", "js", "bcf1", "mse_beta"
    );
    for (model, s) in &result.summary {
        let cell = |m: &crate::evaluation::MetricStats| format!("{:.4} ± {:.4}", m.mean, m.stddev);
        let _ = writeln!(
            out,
            "{:<8} {:>22} {:>22} {:>22} {:>22}",
            model.to_string(),
            cell(&s.rss),
            cell(&s.js_divergence),
            cell(&s.bcf1),
            s.mse_beta.as_ref().map(cell).unwrap_or_else(|| "-".into()),
        );
    }
    out
}
