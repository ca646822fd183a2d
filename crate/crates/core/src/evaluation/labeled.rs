//! Labeled CoNLL output: the input columns followed by one induced-role
//! column per marked predicate.

use std::collections::HashMap;

use crate::corpus::{PredicateInstance, Sentence, EMPTY};

/// `(sentence id, predicate token, argument token)`.
pub type PredictionKey = (usize, usize, usize);

/// Appends one column per marked predicate. `labels` maps
/// `(predicate token, argument token)` to the label to print.
pub fn append_role_columns(sentence: &Sentence, labels: &HashMap<(usize, usize), String>) -> Sentence {
    let mut out = sentence.clone();
    for pred in &sentence.predicates {
        for (row, cells) in out.columns.iter_mut().enumerate() {
            let cell = labels
                .get(&(pred.token, row + 1))
                .cloned()
                .unwrap_or_else(|| EMPTY.to_string());
            cells.push(cell);
        }
    }
    out
}

/// Writes `labels[i][j]` for argument `j` of `instances[i]` into the
/// sentences the instances came from.
pub fn label_sentences(
    sentences: &[Sentence],
    instances: &[PredicateInstance],
    labels: &[Vec<String>],
) -> Vec<Sentence> {
    let mut by_sentence: HashMap<usize, HashMap<(usize, usize), String>> = HashMap::new();
    for (inst, row) in instances.iter().zip(labels) {
        let entry = by_sentence.entry(inst.sentence_id).or_default();
        for (arg, label) in inst.args.iter().zip(row) {
            entry.insert((inst.predicate_token, arg.head_token), label.clone());
        }
    }
    let empty = HashMap::new();
    sentences
        .iter()
        .map(|s| append_role_columns(s, by_sentence.get(&s.id).unwrap_or(&empty)))
        .collect()
}

/// Reads the last `P` columns of each sentence as predicted labels, `P`
/// being the number of marked predicates. Sentences without argument
/// columns contribute nothing.
pub fn read_predictions(sentences: &[Sentence]) -> HashMap<PredictionKey, String> {
    let mut out = HashMap::new();
    for s in sentences {
        let p = s.predicates.len();
        if p == 0 {
            continue;
        }
        for (row, cells) in s.columns.iter().enumerate() {
            if cells.len() < p {
                continue;
            }
            let first = cells.len() - p;
            for (j, pred) in s.predicates.iter().enumerate() {
                let cell = &cells[first + j];
                if cell != EMPTY {
                    out.insert((s.id, pred.token, row + 1), cell.clone());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_conll, Format, SyntaxColumns};

    const TWO_PREDICATES: &str = "\
1\tdogs\tdog\tNNS\tNNS\tdogs\tdog\tNNS\t2\tSBJ\t_\tA0\t_
2\tbark\tbark\tVBP\tVBP\tbark\tbark\tVBP\t0\tROOT\tbark.01\t_\t_
3\tand\tand\tCC\tCC\tand\tand\tCC\t2\tCOORD\t_\t_\t_
4\tbite\tbite\tVBP\tVBP\tbite\tbite\tVBP\t3\tCONJ\tbite.01\t_\t_
5\tcats\tcat\tNNS\tNNS\tcats\tcat\tNNS\t4\tOBJ\t_\t_\tA1
";

    #[test]
    fn append_then_read() {
        let sentences =
            parse_conll(TWO_PREDICATES.as_bytes(), Format::Conll2008, SyntaxColumns::Gold).unwrap();
        let mut labels = HashMap::new();
        labels.insert((2, 1), "R3".to_string());
        labels.insert((4, 5), "R0".to_string());
        let labeled = append_role_columns(&sentences[0], &labels);
        assert_eq!(labeled.columns[0].len(), 15);
        assert_eq!(labeled.columns[0][13], "R3");
        assert_eq!(labeled.columns[4][14], "R0");

        let mut text = Vec::new();
        labeled.write_conll(&mut text).unwrap();
        let reread = parse_conll(&text[..], Format::Conll2008, SyntaxColumns::Gold).unwrap();
        // gold columns still come first
        assert_eq!(reread[0].predicates, sentences[0].predicates);
        let pred = read_predictions(&reread);
        assert_eq!(pred.len(), 2);
        assert_eq!(pred[&(0, 2, 1)], "R3");
        assert_eq!(pred[&(0, 4, 5)], "R0");
    }

    #[test]
    fn gold_file_reads_as_its_own_predictions() {
        let sentences =
            parse_conll(TWO_PREDICATES.as_bytes(), Format::Conll2008, SyntaxColumns::Gold).unwrap();
        let pred = read_predictions(&sentences);
        assert_eq!(pred[&(0, 2, 1)], "A0");
        assert_eq!(pred[&(0, 4, 5)], "A1");
    }
}
