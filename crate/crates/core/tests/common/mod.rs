//! Helpers shared by several integration test targets.
#![allow(dead_code)]

use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roleinduce::corpus::{ArgumentInstance, PredicateInstance};
use roleinduce::decoder::{
    exact_logprob, sampled_logprob, ArgumentTuple, DecoderParams, MeanField,
};
use roleinduce::encoder::{softmax_in_place, EncoderParams, RolePosteriors};
use roleinduce::evaluation::{evaluate_clustering, ClusterEvaluation};
use roleinduce::training::{instance_loss_and_grads_with, ModelParams};

pub const H: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
/// Coordinates whose gradient is this small are compared absolutely.
pub const ABS_FLOOR: f64 = 1e-8;

pub struct Toy {
    pub params: ModelParams,
    pub instance: PredicateInstance,
    pub negatives: Vec<Vec<usize>>,
}

fn fill(rng: &mut ChaCha8Rng, values: ndarray::ArrayViewMutD<f64>) {
    let mut values = values;
    values.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
}

/// A random model and instance: d ≤ 5, k ≤ 3, |R| ≤ 4, N ≤ 4, with frozen
/// negatives that never hit the true lemma.
pub fn random_toy(rng: &mut ChaCha8Rng) -> Toy {
    let d = rng.gen_range(2..=5);
    let k = rng.gen_range(1..=3.min(d - 1));
    let roles = rng.gen_range(2..=4);
    let n_args = rng.gen_range(2..=4);
    let lemmas = 7;
    let features = 9;
    let predicates = 3;
    let specific = if rng.gen_bool(0.5) { vec![1] } else { vec![] };

    let mut encoder = EncoderParams::zeros(roles, features);
    fill(rng, encoder.weights_mut().view_mut().into_dyn());
    let mut decoder = DecoderParams::zeros(lemmas, roles, d, k, specific).unwrap();
    fill(rng, decoder.embeddings_mut().view_mut().into_dyn());
    fill(rng, decoder.shared_mut().view_mut().into_dyn());
    fill(rng, decoder.specific_mut().view_mut().into_dyn());

    let args: Vec<ArgumentInstance> = (0..n_args)
        .map(|i| {
            let mut feature_ids: Vec<usize> = (0..features).filter(|_| rng.gen_bool(0.4)).collect();
            if feature_ids.is_empty() {
                feature_ids.push(rng.gen_range(0..features));
            }
            ArgumentInstance {
                head_token: i + 2,
                arg_lemma: rng.gen_range(0..lemmas),
                feature_ids,
                deprel: 0,
                gold_role: None,
            }
        })
        .collect();
    let negatives = args
        .iter()
        .map(|a| {
            let n = rng.gen_range(1..=4);
            (0..n)
                .map(|_| loop {
                    let c = rng.gen_range(0..lemmas);
                    if c != a.arg_lemma {
                        break c;
                    }
                })
                .collect()
        })
        .collect();
    Toy {
        params: ModelParams { encoder, decoder },
        instance: PredicateInstance {
            predicate_id: rng.gen_range(0..predicates),
            predicate: "p".into(),
            sentence_id: 0,
            predicate_token: 1,
            args,
        },
        negatives,
    }
}

fn loss(toy: &Toy, params: &ModelParams, form: MeanField) -> f64 {
    instance_loss_and_grads_with(&toy.instance, params, &toy.negatives, form)
        .unwrap()
        .0
}

/// Largest relative error over the failing coordinates, or `None` when
/// every coordinate agrees.
pub struct GradientCheck {
    pub coordinates: usize,
    pub worst: Option<(String, f64, f64)>,
}

impl GradientCheck {
    fn record(&mut self, what: &str, analytic: f64, numeric: f64) {
        self.coordinates += 1;
        let scale = analytic.abs().max(numeric.abs());
        let err = (analytic - numeric).abs();
        if err > REL_TOL * scale && err > ABS_FLOOR && self.worst.is_none() {
            self.worst = Some((what.to_string(), analytic, numeric));
        }
    }
}

fn numeric(toy: &Toy, form: MeanField, get_mut: impl Fn(&mut ModelParams) -> &mut f64) -> f64 {
    let mut plus = toy.params.clone();
    *get_mut(&mut plus) += H;
    let mut minus = toy.params.clone();
    *get_mut(&mut minus) -= H;
    (loss(toy, &plus, form) - loss(toy, &minus, form)) / (2.0 * H)
}

/// Compares every analytic coordinate (encoder, u, shared C, predicate C)
/// with a central difference.
pub fn check_gradients(toy: &Toy, form: MeanField, check: &mut GradientCheck) {
    let (_, grads) =
        instance_loss_and_grads_with(&toy.instance, &toy.params, &toy.negatives, form).unwrap();
    let p = &toy.params;

    let (roles, features) = p.encoder.weights().dim();
    for r in 0..roles {
        for f in 0..features {
            let n = numeric(toy, form, |m| &mut m.encoder.weights_mut()[[r, f]]);
            check.record("encoder", grads.encoder.get(f, r), n);
        }
    }

    let (lemmas, d) = p.decoder.embeddings().dim();
    for a in 0..lemmas {
        for j in 0..d {
            let analytic = grads.decoder.embeddings.get(&a).map_or(0.0, |row| row[j]);
            let n = numeric(toy, form, |m| &mut m.decoder.embeddings_mut()[[a, j]]);
            check.record("u", analytic, n);
        }
    }

    let shape = p.decoder.shared().dim();
    for (r, i, j) in ndarray::indices(shape) {
        let n = numeric(toy, form, |m| &mut m.decoder.shared_mut()[[r, i, j]]);
        check.record("C_shared", grads.decoder.shared[[r, i, j]], n);
    }

    let empty = Array3::zeros(shape);
    for slot in 0..p.decoder.specific_predicates().len() {
        let block = grads.decoder.specific.get(&slot).unwrap_or(&empty);
        for (r, i, j) in ndarray::indices(shape) {
            let n = numeric(toy, form, |m| &mut m.decoder.specific_mut()[[slot, r, i, j]]);
            check.record("C_pred", block[[r, i, j]], n);
        }
    }
}

/// Runs the finite-difference comparison on `configs` random toys.
pub fn gradient_sweep(seed: u64, configs: usize, form: MeanField) -> GradientCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check = GradientCheck {
        coordinates: 0,
        worst: None,
    };
    for _ in 0..configs {
        let toy = random_toy(&mut rng);
        check_gradients(&toy, form, &mut check);
    }
    check
}

pub fn random_params(rng: &mut ChaCha8Rng, lemmas: usize, roles: usize, specific: bool) -> DecoderParams {
    let d = rng.gen_range(2..=5);
    let k = rng.gen_range(1..d);
    let preds = if specific { vec![0] } else { vec![] };
    let mut p = DecoderParams::zeros(lemmas, roles, d, k, preds).unwrap();
    fill(rng, p.embeddings_mut().view_mut().into_dyn());
    fill(rng, p.shared_mut().view_mut().into_dyn());
    fill(rng, p.specific_mut().view_mut().into_dyn());
    p
}

pub fn random_posteriors(rng: &mut ChaCha8Rng, n: usize, roles: usize) -> RolePosteriors {
    let mut mu = Array2::zeros((n, roles));
    for mut row in mu.rows_mut() {
        let mut logits: Vec<f64> = (0..roles).map(|_| rng.gen_range(-3.0..3.0)).collect();
        softmax_in_place(&mut logits);
        row.assign(&Array1::from(logits));
    }
    RolePosteriors::new(mu)
}

/// Largest |sampled − exact| log-probability over `draws` random models
/// when the negatives are the full complement of a 10-lemma alphabet.
pub fn full_complement_gap(seed: u64, draws: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lemmas = 10;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let roles = rng.gen_range(2..=4);
        let n = rng.gen_range(2..=4);
        let specific = rng.gen_bool(0.5);
        let params = random_params(&mut rng, lemmas, roles, specific);
        let tuple = ArgumentTuple {
            predicate: 0,
            lemmas: (0..n).map(|_| rng.gen_range(0..lemmas)).collect(),
        };
        let mu = random_posteriors(&mut rng, n, roles);
        for i in 0..n {
            let complement: Vec<usize> = (0..lemmas).filter(|&a| a != tuple.lemmas[i]).collect();
            let sampled = sampled_logprob(i, &tuple, &mu, &params, &complement).value;
            let exact = exact_logprob(i, &tuple, &mu, &params);
            worst = worst.max((sampled - exact).abs());
        }
    }
    worst
}

/// One argument: (predicate, gold class, predicted cluster).
pub type Row = (usize, usize, usize);

pub fn clustering_instances(rows: &[Row]) -> (Vec<PredicateInstance>, Vec<Vec<usize>>) {
    let instances = rows
        .iter()
        .enumerate()
        .map(|(s, &(p, g, _))| PredicateInstance {
            predicate_id: p,
            predicate: format!("p{}", p),
            sentence_id: s,
            predicate_token: 1,
            args: vec![ArgumentInstance {
                head_token: 2,
                arg_lemma: 0,
                feature_ids: vec![],
                deprel: 0,
                gold_role: Some(format!("A{}", g)),
            }],
        })
        .collect();
    let labels = rows.iter().map(|&(_, _, c)| vec![c]).collect();
    (instances, labels)
}

pub fn score(rows: &[Row]) -> ClusterEvaluation {
    let (inst, labels) = clustering_instances(rows);
    evaluate_clustering(&inst, &labels).unwrap()
}

/// Purity and collocation computed by enumerating every (predicate,
/// cluster, class) triple.
pub fn brute_force(rows: &[Row]) -> (f64, f64) {
    let max_id = 8;
    let count = |p: usize, g: usize, c: usize| rows.iter().filter(|&&r| r == (p, g, c)).count();
    let mut pu = 0;
    let mut co = 0;
    for p in 0..max_id {
        for c in 0..max_id {
            pu += (0..max_id).map(|g| count(p, g, c)).max().unwrap();
        }
        for g in 0..max_id {
            co += (0..max_id).map(|c| count(p, g, c)).max().unwrap();
        }
    }
    let n = rows.len() as f64;
    (100.0 * pu as f64 / n, 100.0 * co as f64 / n)
}

/// Random clusterings with at most 8 arguments, 3 predicates, 4 classes
/// and 4 clusters.
pub fn random_rows(rng: &mut ChaCha8Rng) -> Vec<Row> {
    let n = rng.gen_range(1..=8);
    (0..n)
        .map(|_| (rng.gen_range(0..3), rng.gen_range(0..4), rng.gen_range(0..4)))
        .collect()
}
