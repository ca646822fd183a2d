//! Sparse binary features for (sentence, predicate, argument) triples.
//!
//! Every feature string is `NAME=value`, where `NAME` is the emitting
//! template, so templates never collide.

use std::collections::BTreeSet;

use crate::corpus::{Lexicon, Sentence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Template {
    /// Always-on feature acting as a per-role bias.
    Bias,
    PredicateLemma,
    PredicatePos,
    Voice,
    ArgumentForm,
    ArgumentLemma,
    ArgumentPos,
    Deprel,
    Position,
    PositionVoice,
    Path,
    PathLength,
    PredicateLemmaDeprel,
    LeftDependentPos,
    RightDependentPos,
}

impl Template {
    pub const ALL: [Template; 15] = [
        Template::Bias,
        Template::PredicateLemma,
        Template::PredicatePos,
        Template::Voice,
        Template::ArgumentForm,
        Template::ArgumentLemma,
        Template::ArgumentPos,
        Template::Deprel,
        Template::Position,
        Template::PositionVoice,
        Template::Path,
        Template::PathLength,
        Template::PredicateLemmaDeprel,
        Template::LeftDependentPos,
        Template::RightDependentPos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::Bias => "BIAS",
            Template::PredicateLemma => "PRED_LEMMA",
            Template::PredicatePos => "PRED_POS",
            Template::Voice => "VOICE",
            Template::ArgumentForm => "ARG_FORM",
            Template::ArgumentLemma => "ARG_LEMMA",
            Template::ArgumentPos => "ARG_POS",
            Template::Deprel => "DEPREL",
            Template::Position => "POSITION",
            Template::PositionVoice => "POSITION_VOICE",
            Template::Path => "PATH",
            Template::PathLength => "PATH_LEN",
            Template::PredicateLemmaDeprel => "PRED_LEMMA_DEPREL",
            Template::LeftDependentPos => "LEFT_DEP_POS",
            Template::RightDependentPos => "RIGHT_DEP_POS",
        }
    }

    fn value(self, ctx: &Context) -> String {
        let pred = ctx.sentence.token(ctx.predicate);
        let arg = ctx.sentence.token(ctx.argument);
        match self {
            Template::Bias => "1".to_string(),
            Template::PredicateLemma => pred.lemma.clone(),
            Template::PredicatePos => pred.pos.clone(),
            Template::Voice => voice(ctx.sentence, ctx.predicate).to_string(),
            Template::ArgumentForm => arg.form.clone(),
            Template::ArgumentLemma => arg.lemma.clone(),
            Template::ArgumentPos => arg.pos.clone(),
            Template::Deprel => arg.deprel.clone(),
            Template::Position => position(ctx.predicate, ctx.argument).to_string(),
            Template::PositionVoice => format!(
                "{}&{}",
                position(ctx.predicate, ctx.argument),
                voice(ctx.sentence, ctx.predicate)
            ),
            Template::Path => {
                let (path, _) = dependency_path(ctx.sentence, ctx.predicate, ctx.argument);
                if path.is_empty() {
                    "SELF".to_string()
                } else {
                    path
                }
            }
            Template::PathLength => {
                let (_, len) = dependency_path(ctx.sentence, ctx.predicate, ctx.argument);
                match len {
                    0..=3 => len.to_string(),
                    _ => "4+".to_string(),
                }
            }
            Template::PredicateLemmaDeprel => format!("{}&{}", pred.lemma, arg.deprel),
            Template::LeftDependentPos => ctx
                .sentence
                .dependents(ctx.argument)
                .next()
                .map(|t| t.pos.clone())
                .unwrap_or_else(|| "NONE".to_string()),
            Template::RightDependentPos => ctx
                .sentence
                .dependents(ctx.argument)
                .last()
                .map(|t| t.pos.clone())
                .unwrap_or_else(|| "NONE".to_string()),
        }
    }
}

/// The default inventory: the bias feature plus the fourteen
/// argument-labeling templates.
pub fn default_templates() -> Vec<Template> {
    Template::ALL.to_vec()
}

struct Context<'a> {
    sentence: &'a Sentence,
    predicate: usize,
    argument: usize,
}

fn position(predicate: usize, argument: usize) -> &'static str {
    use std::cmp::Ordering::*;
    match argument.cmp(&predicate) {
        Less => "left",
        Greater => "right",
        Equal => "self",
    }
}

fn is_passive_auxiliary(lemma: &str) -> bool {
    lemma == "be" || lemma == "get"
}

/// Passive iff the predicate is a past participle governed by, or
/// governing, a form of "be" or "get". CoNLL 2008 attaches the participle
/// below the auxiliary with a VC arc, so both attachments are checked.
pub fn voice(sentence: &Sentence, predicate: usize) -> &'static str {
    let pred = sentence.token(predicate);
    if pred.pos != "VBN" {
        return "active";
    }
    let aux_dependent = sentence
        .dependents(predicate)
        .any(|t| is_passive_auxiliary(&t.lemma));
    let aux_head = pred.head != 0
        && pred.deprel == "VC"
        && is_passive_auxiliary(&sentence.token(pred.head).lemma);
    if aux_dependent || aux_head {
        "passive"
    } else {
        "active"
    }
}

/// Chain of ancestors from `token` up to (and including) the virtual root 0.
fn ancestors(sentence: &Sentence, token: usize) -> Vec<usize> {
    let mut chain = vec![token];
    let mut current = token;
    while current != 0 {
        current = sentence.token(current).head;
        chain.push(current);
    }
    chain
}

/// Dependency path traced from the argument up to the lowest common
/// ancestor and down to the predicate. Upward steps are `↑rel` with the
/// relation of the token being left; downward steps are `↓rel` with the
/// relation of the token being entered. Returns the path and its length.
pub fn dependency_path(sentence: &Sentence, predicate: usize, argument: usize) -> (String, usize) {
    let up = ancestors(sentence, argument);
    let down = ancestors(sentence, predicate);
    // Both chains end at 0, so a common ancestor always exists.
    let (up_steps, lca) = up
        .iter()
        .enumerate()
        .find(|(_, node)| down.contains(node))
        .map(|(i, &node)| (i, node))
        .expect("chains share the virtual root");
    let down_steps = down.iter().position(|&n| n == lca).unwrap();

    let mut path = String::new();
    for &node in &up[..up_steps] {
        path.push('↑');
        path.push_str(&sentence.token(node).deprel);
    }
    for &node in down[..down_steps].iter().rev() {
        path.push('↓');
        path.push_str(&sentence.token(node).deprel);
    }
    (path, up_steps + down_steps)
}

/// Union of all template outputs for one argument. Token indices are
/// 1-based.
pub fn extract_features(
    sentence: &Sentence,
    predicate: usize,
    argument: usize,
    templates: &[Template],
) -> BTreeSet<String> {
    let ctx = Context {
        sentence,
        predicate,
        argument,
    };
    templates
        .iter()
        .map(|t| format!("{}={}", t.name(), t.value(&ctx)))
        .collect()
}

/// Maps feature strings to sorted, deduplicated ids. When `frozen` is false
/// unseen strings are appended to the lexicon; otherwise they are dropped.
pub fn index_features<'a, I>(features: I, lexicon: &mut Lexicon, frozen: bool) -> Vec<usize>
where
    I: IntoIterator<Item = &'a str>,
{
    if frozen {
        return lookup_features(features, lexicon);
    }
    let mut ids: Vec<usize> = features.into_iter().map(|f| lexicon.insert(f)).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Read-only form of [`index_features`] with `frozen = true`.
pub fn lookup_features<'a, I>(features: I, lexicon: &Lexicon) -> Vec<usize>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut ids: Vec<usize> = features
        .into_iter()
        .filter_map(|f| lexicon.id(f))
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}
