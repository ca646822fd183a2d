//! End-to-end helpers shared by the command line and the tests.

use crate::corpus::{
    build_vocabulary, draft_instances, extract_instances, index_draft, ExtractOptions,
    PredicateInstance, Sentence,
};
use crate::evaluation::{
    label_sentences, read_predictions, ClusterEvaluation, ClusterTally, EvalError,
};
use crate::training::{label_instances, train, EpochStats, Model, TrainConfig, TrainError};

/// A trained model with its loss trace and the training instances.
#[derive(Clone, Debug)]
pub struct Fitted {
    pub model: Model,
    pub trace: Vec<EpochStats>,
    pub instances: Vec<PredicateInstance>,
}

/// Builds the vocabulary from `sentences`, extracts instances and trains.
pub fn fit(
    sentences: &[Sentence],
    config: &TrainConfig,
    options: &ExtractOptions,
) -> Result<Fitted, TrainError> {
    let drafts = draft_instances(sentences, options);
    let vocab = build_vocabulary(&drafts, config.min_lemma_freq);
    let instances: Vec<PredicateInstance> = drafts.iter().map(|d| index_draft(d, &vocab)).collect();
    let out = train(&instances, &vocab, config)?;
    let model = Model {
        config: config.clone(),
        vocab,
        params: out.params,
        templates: options.templates.clone(),
        lexical_heads: options.lexical_heads,
        role_usage: out.role_usage,
    };
    Ok(Fitted {
        model,
        trace: out.trace,
        instances,
    })
}

/// Instances of `sentences` under the model's vocabulary and templates,
/// with the encoder's hard role for every argument.
pub fn relabel(model: &Model, sentences: &[Sentence]) -> (Vec<PredicateInstance>, Vec<Vec<usize>>) {
    let instances = extract_instances(sentences, &model.vocab, &model.extract_options());
    let labels = label_instances(&instances, &model.params.encoder);
    (instances, labels)
}

/// Label text for induced role `r`.
pub fn role_name(r: usize) -> String {
    format!("R{}", r)
}

/// `sentences` with one appended column of induced roles per predicate.
pub fn labeled_output(model: &Model, sentences: &[Sentence]) -> Vec<Sentence> {
    let (instances, labels) = relabel(model, sentences);
    let names: Vec<Vec<String>> = labels
        .iter()
        .map(|row| row.iter().map(|&r| role_name(r)).collect())
        .collect();
    label_sentences(sentences, &instances, &names)
}

/// Scores a labeled file against a gold file. Sentences are matched by
/// position; every gold argument of a verbal predicate needs a prediction.
pub fn evaluate_files(gold: &[Sentence], predicted: &[Sentence]) -> Result<ClusterEvaluation, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            instances: gold.len(),
            predictions: predicted.len(),
        });
    }
    let predictions = read_predictions(predicted);
    let drafts = draft_instances(gold, &ExtractOptions::default());
    let mut tally = ClusterTally::new();
    for d in &drafts {
        for arg in &d.args {
            let gold_role = arg.gold_role.as_deref().ok_or(EvalError::MissingGold {
                sentence_id: d.sentence_id,
                token: arg.head_token,
            })?;
            let key = (d.sentence_id, d.predicate_token, arg.head_token);
            let cluster = predictions.get(&key).ok_or(EvalError::MissingPrediction {
                sentence_id: d.sentence_id,
                predicate_token: d.predicate_token,
                token: arg.head_token,
            })?;
            tally.add(&d.predicate, gold_role, cluster);
        }
    }
    tally.evaluate()
}
