//! Reading and writing CoNLL 2008 / 2009 column files.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

/// Placeholder used by both formats for an empty cell.
pub const EMPTY: &str = "_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Conll2008,
    Conll2009,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conll2008" => Ok(Format::Conll2008),
            "conll2009" => Ok(Format::Conll2009),
            other => Err(format!(
                "unknown format '{}', expected conll2008 or conll2009",
                other
            )),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Format::Conll2008 => f.write_str("conll2008"),
            Format::Conll2009 => f.write_str("conll2009"),
        }
    }
}

/// Which set of syntax columns (lemma, POS, head, relation) to read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SyntaxColumns {
    #[default]
    Gold,
    Predicted,
}

impl FromStr for SyntaxColumns {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gold" => Ok(SyntaxColumns::Gold),
            "predicted" => Ok(SyntaxColumns::Predicted),
            other => Err(format!(
                "unknown syntax columns '{}', expected gold or predicted",
                other
            )),
        }
    }
}

/// Column positions for one format / syntax choice.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    pub fixed: usize,
    pub form: usize,
    pub lemma: usize,
    pub pos: usize,
    pub head: usize,
    pub deprel: usize,
    pub pred: usize,
}

impl Layout {
    pub(crate) fn new(format: Format, syntax: SyntaxColumns) -> Layout {
        match (format, syntax) {
            // ID FORM LEMMA GPOS PPOS SPLIT_FORM SPLIT_LEMMA PPOSS HEAD DEPREL PRED APREDs
            (Format::Conll2008, SyntaxColumns::Gold) => Layout {
                fixed: 11,
                form: 1,
                lemma: 2,
                pos: 3,
                head: 8,
                deprel: 9,
                pred: 10,
            },
            (Format::Conll2008, SyntaxColumns::Predicted) => Layout {
                fixed: 11,
                form: 1,
                lemma: 6,
                pos: 7,
                head: 8,
                deprel: 9,
                pred: 10,
            },
            // ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL FILLPRED PRED APREDs
            (Format::Conll2009, SyntaxColumns::Gold) => Layout {
                fixed: 14,
                form: 1,
                lemma: 2,
                pos: 4,
                head: 8,
                deprel: 10,
                pred: 13,
            },
            (Format::Conll2009, SyntaxColumns::Predicted) => Layout {
                fixed: 14,
                form: 1,
                lemma: 3,
                pos: 5,
                head: 9,
                deprel: 11,
                pred: 13,
            },
        }
    }
}

/// A single token. `index` is 1-based; `head` is 0 for the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub pos: String,
    pub head: usize,
    pub deprel: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldArgument {
    /// 1-based token index of the argument head.
    pub token: usize,
    pub role: String,
}

/// A marked predicate with its annotated arguments, in column order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateAnnotation {
    pub token: usize,
    pub sense: String,
    pub args: Vec<GoldArgument>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    /// Position of the sentence in its source file, starting at 0.
    pub id: usize,
    pub tokens: Vec<Token>,
    pub predicates: Vec<PredicateAnnotation>,
    /// Raw cells, one row per token, kept for lossless echoing.
    pub columns: Vec<Vec<String>>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// Dependents of `index` (0 for the root) in surface order.
    pub fn dependents(&self, index: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == index)
    }

    /// Number of argument columns present beyond the fixed layout.
    pub fn extra_columns(&self, format: Format) -> usize {
        let fixed = Layout::new(format, SyntaxColumns::Gold).fixed;
        self.columns
            .first()
            .map(|row| row.len().saturating_sub(fixed))
            .unwrap_or(0)
    }

    /// Builds a CoNLL 2008 sentence from tokens and predicate annotations,
    /// filling the predicted columns with copies of the gold ones.
    pub fn from_parts(
        id: usize,
        tokens: Vec<Token>,
        predicates: Vec<PredicateAnnotation>,
    ) -> Sentence {
        let mut columns: Vec<Vec<String>> = tokens
            .iter()
            .map(|t| {
                vec![
                    t.index.to_string(),
                    t.form.clone(),
                    t.lemma.clone(),
                    t.pos.clone(),
                    t.pos.clone(),
                    t.form.clone(),
                    t.lemma.clone(),
                    t.pos.clone(),
                    t.head.to_string(),
                    t.deprel.clone(),
                    EMPTY.to_string(),
                ]
            })
            .collect();
        for pred in &predicates {
            columns[pred.token - 1][10] = pred.sense.clone();
        }
        for pred in &predicates {
            let mut column = vec![EMPTY.to_string(); tokens.len()];
            for arg in &pred.args {
                column[arg.token - 1] = arg.role.clone();
            }
            for (row, cell) in columns.iter_mut().zip(column) {
                row.push(cell);
            }
        }
        Sentence {
            id,
            tokens,
            predicates,
            columns,
        }
    }

    /// Writes the raw columns, tab separated, followed by a blank line.
    pub fn write_conll<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for row in &self.columns {
            writeln!(writer, "{}", row.join("\t"))?;
        }
        writeln!(writer)
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: head {head} of token {token} is outside the sentence (1..={len})")]
    DanglingHead {
        line: usize,
        token: usize,
        head: usize,
        len: usize,
    },
    #[error("line {line}: dependency heads form a cycle through token {token}")]
    Cycle { line: usize, token: usize },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

fn split_line(line: &str) -> Vec<String> {
    if line.contains('\t') {
        line.split('\t').map(str::to_owned).collect()
    } else {
        line.split_whitespace().map(str::to_owned).collect()
    }
}

/// Parses a CoNLL 2008 or 2009 stream into sentences.
///
/// Argument column `j` belongs to the `j`-th marked predicate. Any columns
/// beyond the first `P` argument columns are kept in [`Sentence::columns`]
/// but not interpreted.
pub fn parse_conll<R: BufRead>(
    reader: R,
    format: Format,
    syntax: SyntaxColumns,
) -> Result<Vec<Sentence>, ParseError> {
    let layout = Layout::new(format, syntax);
    let mut sentences = Vec::new();
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();

    let mut line_no = 0;
    for line in reader.lines() {
        let line = line?;
        line_no += 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !rows.is_empty() {
                let id = sentences.len();
                sentences.push(build_sentence(id, std::mem::take(&mut rows), &layout)?);
            }
            continue;
        }
        rows.push((line_no, split_line(line)));
    }
    if !rows.is_empty() {
        let id = sentences.len();
        sentences.push(build_sentence(id, rows, &layout)?);
    }

    Ok(sentences)
}

fn build_sentence(
    id: usize,
    rows: Vec<(usize, Vec<String>)>,
    layout: &Layout,
) -> Result<Sentence, ParseError> {
    let width = rows[0].1.len();
    let mut tokens = Vec::with_capacity(rows.len());
    for (position, (line, cells)) in rows.iter().enumerate() {
        if cells.len() < layout.fixed {
            return Err(ParseError::Malformed {
                line: *line,
                message: format!(
                    "expected at least {} columns, found {}",
                    layout.fixed,
                    cells.len()
                ),
            });
        }
        if cells.len() != width {
            return Err(ParseError::Malformed {
                line: *line,
                message: format!(
                    "expected {} columns like the first token of the sentence, found {}",
                    width,
                    cells.len()
                ),
            });
        }
        let index: usize = cells[0].parse().map_err(|_| ParseError::Malformed {
            line: *line,
            message: format!("token id '{}' is not a positive integer", cells[0]),
        })?;
        if index != position + 1 {
            return Err(ParseError::Malformed {
                line: *line,
                message: format!("expected token id {}, found {}", position + 1, index),
            });
        }
        let head: usize = cells[layout.head]
            .parse()
            .map_err(|_| ParseError::Malformed {
                line: *line,
                message: format!("head '{}' is not a non-negative integer", cells[layout.head]),
            })?;
        if head > rows.len() || head == index {
            return Err(ParseError::DanglingHead {
                line: *line,
                token: index,
                head,
                len: rows.len(),
            });
        }
        tokens.push(Token {
            index,
            form: cells[layout.form].clone(),
            lemma: cells[layout.lemma].clone(),
            pos: cells[layout.pos].clone(),
            head,
            deprel: cells[layout.deprel].clone(),
        });
    }

    check_acyclic(&tokens, &rows)?;

    let predicate_tokens: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, (_, cells))| cells[layout.pred] != EMPTY)
        .map(|(i, _)| i + 1)
        .collect();
    let extra = width - layout.fixed;
    if extra != 0 && extra < predicate_tokens.len() {
        return Err(ParseError::Malformed {
            line: rows[0].0,
            message: format!(
                "sentence marks {} predicates but has only {} argument columns",
                predicate_tokens.len(),
                extra
            ),
        });
    }

    let predicates = predicate_tokens
        .iter()
        .enumerate()
        .map(|(column, &token)| {
            let args = if extra == 0 {
                Vec::new()
            } else {
                rows.iter()
                    .enumerate()
                    .filter_map(|(i, (_, cells))| {
                        let role = &cells[layout.fixed + column];
                        (role != EMPTY).then(|| GoldArgument {
                            token: i + 1,
                            role: role.clone(),
                        })
                    })
                    .collect()
            };
            PredicateAnnotation {
                token,
                sense: rows[token - 1].1[layout.pred].clone(),
                args,
            }
        })
        .collect();

    Ok(Sentence {
        id,
        tokens,
        predicates,
        columns: rows.into_iter().map(|(_, cells)| cells).collect(),
    })
}

fn check_acyclic(tokens: &[Token], rows: &[(usize, Vec<String>)]) -> Result<(), ParseError> {
    // 0 = unvisited, 1 = on the current walk, 2 = known to reach the root
    let mut state = vec![0u8; tokens.len() + 1];
    state[0] = 2;
    for start in 1..=tokens.len() {
        let mut walk = Vec::new();
        let mut current = start;
        while state[current] == 0 {
            state[current] = 1;
            walk.push(current);
            current = tokens[current - 1].head;
        }
        if state[current] == 1 {
            return Err(ParseError::Cycle {
                line: rows[start - 1].0,
                token: current,
            });
        }
        for node in walk {
            state[node] = 2;
        }
    }
    Ok(())
}

/// Writes sentences in their original column layout.
pub fn write_conll<W: Write>(sentences: &[Sentence], mut writer: W) -> std::io::Result<()> {
    for sentence in sentences {
        sentence.write_conll(&mut writer)?;
    }
    Ok(())
}

/// Reduces a multi-token argument span to its syntactic head: the tokens
/// whose parent lies outside the span, taking the leftmost if several.
pub fn span_head(sentence: &Sentence, span: &[usize]) -> Option<usize> {
    span.iter()
        .copied()
        .filter(|&t| !span.contains(&sentence.token(t).head))
        .min()
}
