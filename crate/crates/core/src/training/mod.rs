//! Joint estimation of the encoder and decoder by minimizing argument
//! reconstruction error, plus model persistence.
//!
//! For an instance with arguments `a_1..a_N` the loss is
//! `−Σ_i log p̃(a_i | a_{-i}, μ, v)`, where `μ` are the encoder's role
//! posteriors substituted into the bilinear score (mean-field) and `p̃` is a
//! sampled softmax over the true lemma and `n` negatives.

mod adagrad;
mod model_io;
mod sampler;

use std::io::Write;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{PredicateInstance, Vocabulary};
use crate::decoder::{
    ArgumentTuple, DecoderGradient, DecoderParams, DimensionError, MeanField, Reconstruction,
};
use crate::encoder::{self, encoder_gradient_from, EncoderGradient, EncoderParams};

pub use adagrad::{adagrad_step, adagrad_update, AdaGradState};
pub use model_io::{
    load_model, read_header, read_model, save_model, write_model, Header, Model, ModelError,
    FORMAT_VERSION, MAGIC,
};
pub use sampler::{NegativeSampler, UNIGRAM_POWER};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("no instance with at least two arguments to train on")]
    EmptyCorpus,
    #[error("instance needs at least two arguments, found {0}")]
    TooFewArguments(usize),
    #[error("non-finite loss{} on sentence {sentence_id}, predicate token {predicate_token}", .epoch.map(|e| format!(" in epoch {}", e)).unwrap_or_default())]
    NonFinite {
        epoch: Option<usize>,
        sentence_id: usize,
        predicate_token: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub num_roles: usize,
    pub dim_d: usize,
    pub dim_k: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub adagrad_epsilon: f64,
    pub init_scale: f64,
    pub min_lemma_freq: u64,
    pub pred_min_freq: u64,
    pub seed: u64,
    pub deterministic: bool,
    pub batch_size: usize,
    /// Per-instance gradient ℓ2 clipping threshold; 0 disables.
    pub clip_norm: f64,
    /// L2 decay on touched encoder weights.
    pub weight_decay: f64,
    pub threads: usize,
    #[serde(default)]
    pub mean_field: MeanField,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            num_roles: 10,
            dim_d: 30,
            dim_k: 15,
            negatives: 20,
            epochs: 20,
            learning_rate: 0.1,
            adagrad_epsilon: 1e-8,
            init_scale: 0.01,
            min_lemma_freq: 20,
            pred_min_freq: 50,
            seed: 1,
            deterministic: false,
            batch_size: 1,
            clip_norm: 5.0,
            weight_decay: 0.0,
            threads: 1,
            mean_field: MeanField::Score,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: String| Err(TrainError::Config(msg));
        if self.dim_d <= self.dim_k {
            return fail(format!(
                "d ({}) must be greater than k ({})",
                self.dim_d, self.dim_k
            ));
        }
        if self.dim_k == 0 {
            return fail("k must be positive".into());
        }
        if self.negatives == 0 {
            return fail("the number of negative samples must be at least 1".into());
        }
        if self.num_roles < 2 {
            return fail(format!("need at least 2 roles, got {}", self.num_roles));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.adagrad_epsilon.is_nan() || self.adagrad_epsilon < 0.0 {
            return fail("adagrad epsilon must be non-negative".into());
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return fail("init scale must be non-negative".into());
        }
        let negative = |x: f64| x.is_nan() || x < 0.0;
        if negative(self.clip_norm) || negative(self.weight_decay) {
            return fail("clip norm and weight decay must be non-negative".into());
        }
        if self.batch_size == 0 || self.threads == 0 {
            return fail("batch size and thread count must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub encoder: EncoderParams,
    pub decoder: DecoderParams,
}

/// Gradient of the joint loss over both components.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub encoder: EncoderGradient,
    pub decoder: DecoderGradient,
}

impl Gradients {
    pub fn zeros(params: &ModelParams) -> Self {
        Gradients {
            encoder: EncoderGradient::default(),
            decoder: DecoderGradient::zeros(&params.decoder),
        }
    }

    pub fn merge(&mut self, other: &Gradients) {
        self.encoder.merge(&other.encoder);
        self.decoder.merge(&other.decoder);
    }

    pub fn norm(&self) -> f64 {
        (self.encoder.squared_norm() + self.decoder.squared_norm()).sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        self.encoder.scale(factor);
        self.decoder.scale(factor);
    }

    /// Rescales to `max_norm` if the ℓ2 norm exceeds it; 0 disables.
    pub fn clip(&mut self, max_norm: f64) {
        if max_norm > 0.0 {
            let norm = self.norm();
            if norm > max_norm {
                self.scale(max_norm / norm);
            }
        }
    }
}

/// Predicates frequent enough to get their own projection matrices.
pub fn specific_predicates(vocab: &Vocabulary, pred_min_freq: u64) -> Vec<usize> {
    vocab
        .predicates
        .iter()
        .filter(|&(id, _, count)| Some(id) != vocab.predicates.unk_id() && count >= pred_min_freq)
        .map(|(id, _, _)| id)
        .collect()
}

/// Every parameter i.i.d. uniform on `[−init_scale, init_scale]`, drawn in
/// declaration order: encoder weights, u, shared C, predicate C.
pub fn init_params<R: Rng>(
    config: &TrainConfig,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<ModelParams, TrainError> {
    config.validate()?;
    let mut encoder = EncoderParams::zeros(config.num_roles, vocab.features.len());
    let mut decoder = DecoderParams::zeros(
        vocab.arg_lemmas.len(),
        config.num_roles,
        config.dim_d,
        config.dim_k,
        specific_predicates(vocab, config.pred_min_freq),
    )?;
    let scale = config.init_scale;
    let mut draw = |x: &mut f64| *x = scale * (2.0 * rng.gen::<f64>() - 1.0);
    encoder.weights_mut().iter_mut().for_each(&mut draw);
    decoder.embeddings_mut().iter_mut().for_each(&mut draw);
    decoder.shared_mut().iter_mut().for_each(&mut draw);
    decoder.specific_mut().iter_mut().for_each(&mut draw);
    Ok(ModelParams { encoder, decoder })
}

/// Draws `n` negatives for every argument position.
pub fn sample_negatives<R: Rng>(
    instance: &PredicateInstance,
    sampler: &NegativeSampler,
    n: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    instance
        .args
        .iter()
        .map(|a| sampler.sample(rng, a.arg_lemma, n))
        .collect()
}

/// Joint loss `−Σ_i log p̃(a_i | …)` for one instance with the given
/// negatives per position, and its gradient through both components.
pub fn instance_loss_and_grads(
    instance: &PredicateInstance,
    params: &ModelParams,
    negatives: &[Vec<usize>],
) -> Result<(f64, Gradients), TrainError> {
    instance_loss_and_grads_with(instance, params, negatives, MeanField::Score)
}

/// [`instance_loss_and_grads`] under a chosen mean-field form.
pub fn instance_loss_and_grads_with(
    instance: &PredicateInstance,
    params: &ModelParams,
    negatives: &[Vec<usize>],
    form: MeanField,
) -> Result<(f64, Gradients), TrainError> {
    if instance.len() < 2 {
        return Err(TrainError::TooFewArguments(instance.len()));
    }
    assert_eq!(negatives.len(), instance.len(), "negatives per position");
    let posteriors = encoder::encode(instance, &params.encoder);
    let tuple = ArgumentTuple::of(instance);
    let mut pass = Reconstruction::new(&tuple, &posteriors, &params.decoder);
    let mut loss = 0.0;
    for (i, negs) in negatives.iter().enumerate() {
        loss -= pass.position_with(form, i, negs, -1.0);
    }
    if !loss.is_finite() {
        return Err(TrainError::NonFinite {
            epoch: None,
            sentence_id: instance.sentence_id,
            predicate_token: instance.predicate_token,
        });
    }
    let (decoder, d_mu) = pass.finish();
    let encoder = encoder_gradient_from(instance, &posteriors, &d_mu);
    Ok((loss, Gradients { encoder, decoder }))
}

/// [`instance_loss_and_grads`] with freshly drawn negatives.
pub fn instance_loss_and_grads_sampled<R: Rng>(
    instance: &PredicateInstance,
    params: &ModelParams,
    config: &TrainConfig,
    sampler: &NegativeSampler,
    rng: &mut R,
) -> Result<(f64, Gradients), TrainError> {
    let negatives = sample_negatives(instance, sampler, config.negatives, rng);
    instance_loss_and_grads_with(instance, params, &negatives, config.mean_field)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub instances_skipped: usize,
}

/// Writes the loss trace as `epoch,mean_loss,instances_skipped`.
pub fn write_loss_trace<W: Write>(trace: &[EpochStats], mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "epoch,mean_loss,instances_skipped")?;
    for e in trace {
        writeln!(writer, "{},{},{}", e.epoch, e.mean_loss, e.instances_skipped)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub params: ModelParams,
    pub trace: Vec<EpochStats>,
    /// Argmax assignments per role over the training instances.
    pub role_usage: Vec<u64>,
}

/// Argmax assignment counts per role.
pub fn role_usage(instances: &[PredicateInstance], params: &EncoderParams) -> Vec<u64> {
    let mut usage = vec![0u64; params.num_roles()];
    for inst in instances {
        for r in encoder::label(inst, params) {
            usage[r] += 1;
        }
    }
    usage
}

/// Roles receiving at least 1% of all argmax assignments.
pub fn effective_roles(usage: &[u64]) -> usize {
    let total: u64 = usage.iter().sum();
    if total == 0 {
        return 0;
    }
    usage.iter().filter(|&&c| c * 100 >= total).count()
}

fn weighted_decay(grads: &mut Gradients, params: &EncoderParams, decay: f64) {
    if decay == 0.0 {
        return;
    }
    let w = params.weights();
    for (f, column) in grads.encoder.columns_mut() {
        for (r, g) in column.iter_mut().enumerate() {
            *g += decay * w[[r, f]];
        }
    }
}

/// Trains both components with per-instance (or mini-batch) AdaGrad over
/// seeded shuffles of the corpus. Instances with fewer than two arguments
/// are skipped and counted.
pub fn train(
    instances: &[PredicateInstance],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<TrainOutput, TrainError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init_params(config, vocab, &mut rng)?;
    let mut state = AdaGradState::new(&params);

    let trainable: Vec<usize> = (0..instances.len())
        .filter(|&i| instances[i].len() >= 2)
        .collect();
    let skipped = instances.len() - trainable.len();
    if config.epochs > 0 && trainable.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    info!(
        "training on {} instances ({} skipped with fewer than two arguments)",
        trainable.len(),
        skipped
    );

    let sampler = if config.epochs > 0 {
        Some(NegativeSampler::new(vocab.arg_lemmas.counts())?)
    } else {
        None
    };
    let pool = if config.threads > 1 && !config.deterministic && config.batch_size > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| TrainError::Config(format!("thread pool: {}", e)))?,
        )
    } else {
        None
    };

    let mut trace = Vec::with_capacity(config.epochs);
    let mut order = trainable;
    for epoch in 1..=config.epochs {
        let sampler = sampler.as_ref().expect("sampler exists when epochs > 0");
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            // Negatives are drawn serially so parallel runs stay reproducible.
            let negatives: Vec<Vec<Vec<usize>>> = batch
                .iter()
                .map(|&i| sample_negatives(&instances[i], sampler, config.negatives, &mut rng))
                .collect();
            let compute = |(&i, negs): (&usize, &Vec<Vec<usize>>)| {
                instance_loss_and_grads_with(&instances[i], &params, negs, config.mean_field).map(|(loss, mut g)| {
                    g.clip(config.clip_norm);
                    (loss, g)
                })
            };
            let results: Vec<Result<(f64, Gradients), TrainError>> = match &pool {
                Some(pool) => {
                    use rayon::prelude::*;
                    pool.install(|| batch.par_iter().zip(negatives.par_iter()).map(compute).collect())
                }
                None => batch.iter().zip(negatives.iter()).map(compute).collect(),
            };
            let mut grads = Gradients::zeros(&params);
            for result in results {
                let (loss, g) = result.map_err(|e| match e {
                    TrainError::NonFinite {
                        sentence_id,
                        predicate_token,
                        ..
                    } => TrainError::NonFinite {
                        epoch: Some(epoch),
                        sentence_id,
                        predicate_token,
                    },
                    other => other,
                })?;
                total += loss;
                if batch.len() == 1 {
                    grads = g;
                } else {
                    grads.merge(&g);
                }
            }
            weighted_decay(&mut grads, &params.encoder, config.weight_decay);
            adagrad_step(
                &mut params,
                &grads,
                &mut state,
                config.learning_rate,
                config.adagrad_epsilon,
            );
        }
        let mean_loss = total / order.len() as f64;
        debug!("epoch {}: mean loss {:.6}", epoch, mean_loss);
        info!("epoch {}/{} mean loss {:.4}", epoch, config.epochs, mean_loss);
        trace.push(EpochStats {
            epoch,
            mean_loss,
            instances_skipped: skipped,
        });
    }

    let role_usage = role_usage(instances, &params.encoder);
    Ok(TrainOutput {
        params,
        trace,
        role_usage,
    })
}

/// Hard roles for each instance; only the encoder is consulted.
pub fn label_instances(instances: &[PredicateInstance], params: &EncoderParams) -> Vec<Vec<usize>> {
    instances.iter().map(|i| encoder::label(i, params)).collect()
}
