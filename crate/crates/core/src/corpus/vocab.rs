use std::collections::HashMap;
use std::io::{self, BufRead, Write};

/// Reserved string for the unknown entry.
pub const UNK: &str = "<unk>";

/// A dense, bidirectional string ↔ index map with frequency counts.
///
/// Lexicons built from counts are ordered by descending frequency, ties
/// broken lexicographically. When the lexicon reserves an unknown entry it
/// always sits at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lexicon {
    kind: String,
    items: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    has_unk: bool,
}

impl Lexicon {
    pub fn new(kind: impl Into<String>, has_unk: bool) -> Self {
        let mut lexicon = Lexicon {
            kind: kind.into(),
            items: Vec::new(),
            counts: Vec::new(),
            index: HashMap::new(),
            has_unk,
        };
        if has_unk {
            lexicon.items.push(UNK.to_string());
            lexicon.counts.push(0);
            lexicon.index.insert(UNK.to_string(), 0);
        }
        lexicon
    }

    /// Builds a lexicon from raw counts. Entries with a count below
    /// `min_count` are folded into the unknown entry, or dropped when the
    /// lexicon has none.
    pub fn from_counts<I>(kind: impl Into<String>, counts: I, min_count: u64, has_unk: bool) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut lexicon = Lexicon::new(kind, has_unk);
        let mut kept: Vec<(String, u64)> = Vec::new();
        for (item, count) in counts {
            if count >= min_count && !(has_unk && item == UNK) {
                kept.push((item, count));
            } else if has_unk {
                lexicon.counts[0] += count;
            }
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        for (item, count) in kept {
            lexicon.index.insert(item.clone(), lexicon.items.len());
            lexicon.items.push(item);
            lexicon.counts.push(count);
        }
        lexicon
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn has_unk(&self) -> bool {
        self.has_unk
    }

    pub fn unk_id(&self) -> Option<usize> {
        self.has_unk.then_some(0)
    }

    pub fn id(&self, item: &str) -> Option<usize> {
        self.index.get(item).copied()
    }

    /// Looks up `item`, falling back to the unknown entry.
    pub fn id_or_unk(&self, item: &str) -> Option<usize> {
        self.id(item).or(self.unk_id())
    }

    pub fn get(&self, id: usize) -> Option<&str> {
        self.items.get(id).map(String::as_str)
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, u64)> {
        self.items
            .iter()
            .zip(&self.counts)
            .enumerate()
            .map(|(i, (s, &c))| (i, s.as_str(), c))
    }

    /// Appends `item` if absent, returning its index.
    pub fn insert(&mut self, item: &str) -> usize {
        if let Some(id) = self.index.get(item) {
            return *id;
        }
        let id = self.items.len();
        self.items.push(item.to_string());
        self.counts.push(0);
        self.index.insert(item.to_string(), id);
        id
    }

    /// Writes the text form: a header line with the kind, then
    /// `<index>\t<string>\t<count>` per entry.
    pub fn write_text<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(writer, "{}", self.kind)?;
        for (i, item, count) in self.iter() {
            if item.contains(['\t', '\n', '\r']) {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("entry {} of {} contains a tab or newline", i, self.kind),
                ));
            }
            writeln!(writer, "{}\t{}\t{}", i, item, count)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> io::Result<Self> {
        let invalid = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
        let mut lines = reader.lines();
        let kind = lines
            .next()
            .ok_or_else(|| invalid("missing vocabulary header".to_string()))??;
        let mut items = Vec::new();
        let mut counts = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(invalid(format!("line {}: expected 3 fields", n + 2)));
            }
            let index: usize = fields[0]
                .parse()
                .map_err(|_| invalid(format!("line {}: bad index", n + 2)))?;
            if index != items.len() {
                return Err(invalid(format!(
                    "line {}: expected index {}, found {}",
                    n + 2,
                    items.len(),
                    index
                )));
            }
            let count: u64 = fields[2]
                .parse()
                .map_err(|_| invalid(format!("line {}: bad count", n + 2)))?;
            items.push(fields[1].to_string());
            counts.push(count);
        }
        let has_unk = items.first().map(|s| s == UNK).unwrap_or(false);
        Ok(Lexicon::from_parts(kind, items, counts, has_unk))
    }

    pub(crate) fn from_parts(
        kind: String,
        items: Vec<String>,
        counts: Vec<u64>,
        has_unk: bool,
    ) -> Self {
        let index = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Lexicon {
            kind,
            items,
            counts,
            index,
            has_unk,
        }
    }
}

/// All lexicons a model needs. Argument lemmas, predicates and relations
/// reserve an unknown entry at index 0; features do not (unseen features
/// are dropped).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pub arg_lemmas: Lexicon,
    pub features: Lexicon,
    pub predicates: Lexicon,
    pub deprels: Lexicon,
}

impl Vocabulary {
    pub fn unk_id(&self) -> usize {
        0
    }
}
