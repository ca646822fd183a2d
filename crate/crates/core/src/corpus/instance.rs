use std::collections::HashMap;

use crate::features::{default_templates, extract_features, lookup_features, Template};

use super::conll::Sentence;
use super::vocab::{Lexicon, Vocabulary};

/// POS tags of prepositions whose object is taken as the lexical head.
const PREPOSITION_TAGS: [&str; 2] = ["IN", "TO"];
/// Relations linking a preposition to its object.
const PREPOSITION_OBJECT_RELS: [&str; 2] = ["PMOD", "POBJ"];

#[derive(Clone, Debug)]
pub struct ExtractOptions {
    pub templates: Vec<Template>,
    /// Use the object of a prepositional argument head as the argument
    /// lemma ("baton" for "with batons").
    pub lexical_heads: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            templates: default_templates(),
            lexical_heads: true,
        }
    }
}

/// String-level argument, before indexing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgumentDraft {
    pub head_token: usize,
    pub lemma: String,
    pub features: Vec<String>,
    pub deprel: String,
    pub gold_role: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceDraft {
    pub sentence_id: usize,
    pub predicate_token: usize,
    pub predicate: String,
    pub args: Vec<ArgumentDraft>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgumentInstance {
    /// 1-based index of the argument's syntactic head token.
    pub head_token: usize,
    pub arg_lemma: usize,
    /// Strictly increasing feature ids.
    pub feature_ids: Vec<usize>,
    pub deprel: usize,
    /// Evaluation only. Training never reads this.
    pub gold_role: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateInstance {
    pub predicate_id: usize,
    /// Predicate lemma, kept so evaluation can group unseen predicates.
    pub predicate: String,
    pub sentence_id: usize,
    pub predicate_token: usize,
    pub args: Vec<ArgumentInstance>,
}

impl PredicateInstance {
    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }
}

pub fn is_verbal(pos: &str) -> bool {
    pos.starts_with('V')
}

/// Lemma of the argument's lexical head.
pub fn argument_lemma(sentence: &Sentence, head: usize, lexical_heads: bool) -> &str {
    let token = sentence.token(head);
    if lexical_heads && PREPOSITION_TAGS.contains(&token.pos.as_str()) {
        if let Some(object) = sentence
            .dependents(head)
            .find(|t| PREPOSITION_OBJECT_RELS.contains(&t.deprel.as_str()))
        {
            return &object.lemma;
        }
    }
    &token.lemma
}

/// Reduces annotated sentences to string-level instances for verbal
/// predicates with at least one argument.
pub fn draft_instances(sentences: &[Sentence], options: &ExtractOptions) -> Vec<InstanceDraft> {
    let mut drafts = Vec::new();
    for sentence in sentences {
        for pred in &sentence.predicates {
            let pred_token = sentence.token(pred.token);
            if !is_verbal(&pred_token.pos) || pred.args.is_empty() {
                continue;
            }
            let args = pred
                .args
                .iter()
                .map(|arg| {
                    let head = sentence.token(arg.token);
                    ArgumentDraft {
                        head_token: arg.token,
                        lemma: argument_lemma(sentence, arg.token, options.lexical_heads)
                            .to_string(),
                        features: extract_features(
                            sentence,
                            pred.token,
                            arg.token,
                            &options.templates,
                        )
                        .into_iter()
                        .collect(),
                        deprel: head.deprel.clone(),
                        gold_role: Some(arg.role.clone()),
                    }
                })
                .collect();
            drafts.push(InstanceDraft {
                sentence_id: sentence.id,
                predicate_token: pred.token,
                predicate: pred_token.lemma.clone(),
                args,
            });
        }
    }
    drafts
}

fn count<'a>(items: impl Iterator<Item = &'a str>) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for item in items {
        *counts.entry(item).or_default() += 1;
    }
    counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Builds all lexicons over the drafts. Argument lemmas seen fewer than
/// `min_lemma_freq` times collapse to the unknown entry.
pub fn build_vocabulary(drafts: &[InstanceDraft], min_lemma_freq: u64) -> Vocabulary {
    let args = || drafts.iter().flat_map(|d| d.args.iter());
    Vocabulary {
        arg_lemmas: Lexicon::from_counts(
            "arg_lemmas",
            count(args().map(|a| a.lemma.as_str())),
            min_lemma_freq,
            true,
        ),
        features: Lexicon::from_counts(
            "features",
            count(args().flat_map(|a| a.features.iter().map(String::as_str))),
            1,
            false,
        ),
        predicates: Lexicon::from_counts(
            "predicates",
            count(drafts.iter().map(|d| d.predicate.as_str())),
            1,
            true,
        ),
        deprels: Lexicon::from_counts(
            "deprels",
            count(args().map(|a| a.deprel.as_str())),
            1,
            true,
        ),
    }
}

/// Indexes a draft against a frozen vocabulary. Unseen features are
/// dropped; unseen lemmas, predicates and relations map to the unknown id.
pub fn index_draft(draft: &InstanceDraft, vocab: &Vocabulary) -> PredicateInstance {
    let unk = vocab.unk_id();
    PredicateInstance {
        predicate_id: vocab.predicates.id(&draft.predicate).unwrap_or(unk),
        predicate: draft.predicate.clone(),
        sentence_id: draft.sentence_id,
        predicate_token: draft.predicate_token,
        args: draft
            .args
            .iter()
            .map(|a| ArgumentInstance {
                head_token: a.head_token,
                arg_lemma: vocab.arg_lemmas.id(&a.lemma).unwrap_or(unk),
                feature_ids: lookup_features(
                    a.features.iter().map(String::as_str),
                    &vocab.features,
                ),
                deprel: vocab.deprels.id(&a.deprel).unwrap_or(unk),
                gold_role: a.gold_role.clone(),
            })
            .collect(),
    }
}

pub fn extract_instances(
    sentences: &[Sentence],
    vocab: &Vocabulary,
    options: &ExtractOptions,
) -> Vec<PredicateInstance> {
    draft_instances(sentences, options)
        .iter()
        .map(|d| index_draft(d, vocab))
        .collect()
}
