//! Bilinear reconstruction model.
//!
//! Each argument lemma `a` has an embedding `u_a ∈ ℝ^d`; each role `r` has a
//! shared projection `C_r ∈ ℝ^{d×k}` and, for frequent predicates `v`, a
//! predicate-specific `C_{v,r}`. The projection of an argument under role `r`
//! is `(C_{v,r} + C_r)ᵀ u_a ∈ ℝ^k`, and argument `i` is scored against the
//! sum of the other arguments' projections. Soft roles replace the hard
//! projection matrix with its posterior-weighted mixture.
//!
//! The decoder sees only the predicate id, the argument lemma ids and the
//! role posteriors (see [`ArgumentTuple`]); sentence features never reach it.

use std::collections::{BTreeMap, HashMap};

use ndarray::{s, Array1, Array2, Array3, Array4, ArrayView1, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::PredicateInstance;
use crate::encoder::RolePosteriors;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimensionError {
    #[error("embedding dimension d={d} must exceed projection dimension k={k}")]
    DNotGreaterThanK { d: usize, k: usize },
    #[error("dimension {0} must be positive")]
    Zero(&'static str),
}

/// What the reconstruction model is allowed to see of an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgumentTuple {
    pub predicate: usize,
    pub lemmas: Vec<usize>,
}

impl ArgumentTuple {
    pub fn of(instance: &PredicateInstance) -> Self {
        ArgumentTuple {
            predicate: instance.predicate_id,
            lemmas: instance.args.iter().map(|a| a.arg_lemma).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderParams {
    embeddings: Array2<f64>,
    shared: Array3<f64>,
    specific: Array4<f64>,
    specific_predicates: Vec<usize>,
    slots: HashMap<usize, usize>,
}

impl DecoderParams {
    /// All-zero parameters. `specific_predicates` lists the predicate ids
    /// that get their own projection matrices.
    pub fn zeros(
        num_lemmas: usize,
        num_roles: usize,
        dim_d: usize,
        dim_k: usize,
        specific_predicates: Vec<usize>,
    ) -> Result<Self, DimensionError> {
        if dim_k == 0 {
            return Err(DimensionError::Zero("k"));
        }
        if dim_d <= dim_k {
            return Err(DimensionError::DNotGreaterThanK { d: dim_d, k: dim_k });
        }
        if num_roles == 0 {
            return Err(DimensionError::Zero("roles"));
        }
        let mut specific_predicates = specific_predicates;
        specific_predicates.sort_unstable();
        specific_predicates.dedup();
        let slots = specific_predicates
            .iter()
            .enumerate()
            .map(|(slot, &v)| (v, slot))
            .collect();
        Ok(DecoderParams {
            embeddings: Array2::zeros((num_lemmas, dim_d)),
            shared: Array3::zeros((num_roles, dim_d, dim_k)),
            specific: Array4::zeros((specific_predicates.len(), num_roles, dim_d, dim_k)),
            specific_predicates,
            slots,
        })
    }

    pub fn dim_d(&self) -> usize {
        self.embeddings.ncols()
    }

    pub fn dim_k(&self) -> usize {
        self.shared.dim().2
    }

    pub fn num_roles(&self) -> usize {
        self.shared.dim().0
    }

    pub fn num_lemmas(&self) -> usize {
        self.embeddings.nrows()
    }

    /// Predicate ids with their own projections, in slot order.
    pub fn specific_predicates(&self) -> &[usize] {
        &self.specific_predicates
    }

    pub fn slot(&self, predicate: usize) -> Option<usize> {
        self.slots.get(&predicate).copied()
    }

    pub fn embeddings(&self) -> &Array2<f64> {
        &self.embeddings
    }

    pub fn embeddings_mut(&mut self) -> &mut Array2<f64> {
        &mut self.embeddings
    }

    pub fn shared(&self) -> &Array3<f64> {
        &self.shared
    }

    pub fn shared_mut(&mut self) -> &mut Array3<f64> {
        &mut self.shared
    }

    pub fn specific(&self) -> &Array4<f64> {
        &self.specific
    }

    pub fn specific_mut(&mut self) -> &mut Array4<f64> {
        &mut self.specific
    }

    /// `C_r + C_{v,r}`, or `C_r` alone when `v` has no own matrices.
    pub fn role_matrix(&self, predicate: usize, role: usize) -> Array2<f64> {
        let mut m = self.shared.index_axis(Axis(0), role).to_owned();
        if let Some(slot) = self.slot(predicate) {
            m += &self.specific.slice(s![slot, role, .., ..]);
        }
        m
    }

    fn role_matrices(&self, predicate: usize) -> Vec<Array2<f64>> {
        (0..self.num_roles())
            .map(|r| self.role_matrix(predicate, r))
            .collect()
    }
}

/// A role given either as a hard label or as a posterior row.
#[derive(Clone, Copy, Debug)]
pub enum RoleWeights<'a> {
    Hard(usize),
    Soft(ArrayView1<'a, f64>),
}

fn mix(matrices: &[Array2<f64>], weights: ArrayView1<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros(matrices[0].raw_dim());
    for (m, &w) in matrices.iter().zip(weights.iter()) {
        if w != 0.0 {
            out.scaled_add(w, m);
        }
    }
    out
}

/// k-vector `(Σ_s μ_s (C_{v,s} + C_s))ᵀ u_a`; a hard role is a one-hot μ.
pub fn project(
    predicate: usize,
    role: RoleWeights<'_>,
    lemma: usize,
    params: &DecoderParams,
) -> Array1<f64> {
    let u = params.embeddings.row(lemma);
    match role {
        RoleWeights::Hard(r) => u.dot(&params.role_matrix(predicate, r)),
        RoleWeights::Soft(mu) => {
            let mut out = Array1::zeros(params.dim_k());
            for (r, &w) in mu.iter().enumerate() {
                if w != 0.0 {
                    out.scaled_add(w, &u.dot(&params.role_matrix(predicate, r)));
                }
            }
            out
        }
    }
}

/// Per-argument projections under (soft) roles and their sum.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftRoleContext {
    pub per_arg_projection: Array2<f64>,
    pub context_sum: Array1<f64>,
}

impl SoftRoleContext {
    pub fn new(tuple: &ArgumentTuple, posteriors: &RolePosteriors, params: &DecoderParams) -> Self {
        let mut per_arg_projection = Array2::zeros((tuple.len(), params.dim_k()));
        for (j, &a) in tuple.lemmas.iter().enumerate() {
            let p = project(tuple.predicate, RoleWeights::Soft(posteriors.row(j)), a, params);
            per_arg_projection.row_mut(j).assign(&p);
        }
        let context_sum = per_arg_projection.sum_axis(Axis(0));
        SoftRoleContext {
            per_arg_projection,
            context_sum,
        }
    }

    /// `contextSum − perArgProjection[i]`.
    pub fn context_without(&self, i: usize) -> Array1<f64> {
        &self.context_sum - &self.per_arg_projection.row(i)
    }
}

pub fn score_pair(projection: ArrayView1<'_, f64>, context: ArrayView1<'_, f64>) -> f64 {
    projection.dot(&context)
}

/// `Σ_{i≠j} u_{a_i}ᵀ C_{v,r_i}ᵀ C_{v,r_j} u_{a_j}` for hard roles.
pub fn tuple_score(tuple: &ArgumentTuple, roles: &[usize], params: &DecoderParams) -> f64 {
    assert_eq!(roles.len(), tuple.len(), "one role per argument");
    let posteriors = RolePosteriors::one_hot(roles, params.num_roles());
    let ctx = SoftRoleContext::new(tuple, &posteriors, params);
    (0..tuple.len())
        .map(|i| score_pair(ctx.per_arg_projection.row(i), ctx.context_without(i).view()))
        .sum()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Log-probability of the true lemma at position `i` under the full softmax
/// over every lemma in the alphabet. Cost is linear in the alphabet size;
/// meant for tests and small vocabularies.
pub fn exact_logprob(
    i: usize,
    tuple: &ArgumentTuple,
    posteriors: &RolePosteriors,
    params: &DecoderParams,
) -> f64 {
    let ctx = SoftRoleContext::new(tuple, posteriors, params);
    let context = ctx.context_without(i);
    let scores: Vec<f64> = (0..params.num_lemmas())
        .map(|a| {
            let p = project(tuple.predicate, RoleWeights::Soft(posteriors.row(i)), a, params);
            score_pair(p.view(), context.view())
        })
        .collect();
    scores[tuple.lemmas[i]] - log_sum_exp(&scores)
}

/// Gradient over decoder parameters. Embedding rows and predicate-specific
/// blocks are stored sparsely; shared projections densely.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderGradient {
    pub embeddings: BTreeMap<usize, Array1<f64>>,
    pub shared: Array3<f64>,
    pub specific: BTreeMap<usize, Array3<f64>>,
}

impl DecoderGradient {
    pub fn zeros(params: &DecoderParams) -> Self {
        DecoderGradient {
            embeddings: BTreeMap::new(),
            shared: Array3::zeros(params.shared.raw_dim()),
            specific: BTreeMap::new(),
        }
    }

    fn embedding_row(&mut self, lemma: usize, dim_d: usize) -> &mut Array1<f64> {
        self.embeddings
            .entry(lemma)
            .or_insert_with(|| Array1::zeros(dim_d))
    }

    pub fn merge(&mut self, other: &DecoderGradient) {
        for (&a, row) in &other.embeddings {
            *self.embedding_row(a, row.len()) += row;
        }
        self.shared += &other.shared;
        for (&slot, block) in &other.specific {
            *self
                .specific
                .entry(slot)
                .or_insert_with(|| Array3::zeros(block.raw_dim())) += block;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.embeddings.values_mut().for_each(|r| *r *= factor);
        self.shared *= factor;
        self.specific.values_mut().for_each(|b| *b *= factor);
    }

    pub fn squared_norm(&self) -> f64 {
        let sq = |x: &f64| x * x;
        self.embeddings.values().flatten().map(sq).sum::<f64>()
            + self.shared.iter().map(sq).sum::<f64>()
            + self.specific.values().flatten().map(sq).sum::<f64>()
    }
}

/// Where the posteriors enter the reconstruction of argument `i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanField {
    /// Every role, including `r_i`, is replaced by its posterior inside the
    /// bilinear score.
    #[default]
    Score,
    /// `r_i` is averaged outside the log-probability; the other roles are
    /// mixed inside the context.
    OwnRoleExpected,
}

impl std::str::FromStr for MeanField {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "score" => Ok(MeanField::Score),
            "own-role-expected" => Ok(MeanField::OwnRoleExpected),
            other => Err(format!(
                "unknown mean-field form '{}' (expected score or own-role-expected)",
                other
            )),
        }
    }
}

impl std::fmt::Display for MeanField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MeanField::Score => "score",
            MeanField::OwnRoleExpected => "own-role-expected",
        })
    }
}

/// Forward state for one instance under soft roles, accumulating gradients
/// as positions are scored.
///
/// With `P_j = Σ_s μ_js M_s` and `M_s = C_s + C_{v,s}`, position `i` scores
/// candidate `c` as `u_cᵀ P_i ctx_i` where `ctx_i = Σ_{j≠i} P_jᵀ u_{a_j}`.
pub struct Reconstruction<'a> {
    tuple: &'a ArgumentTuple,
    posteriors: &'a RolePosteriors,
    params: &'a DecoderParams,
    role_mats: Vec<Array2<f64>>,
    mixed: Vec<Array2<f64>>,
    proj: Array2<f64>,
    ctx: Array1<f64>,
    grad: DecoderGradient,
    d_mixed: Vec<Array2<f64>>,
    d_proj: Array2<f64>,
    d_role: Vec<Array2<f64>>,
    d_mu: Array2<f64>,
}

impl<'a> Reconstruction<'a> {
    pub fn new(
        tuple: &'a ArgumentTuple,
        posteriors: &'a RolePosteriors,
        params: &'a DecoderParams,
    ) -> Self {
        let role_mats = params.role_matrices(tuple.predicate);
        let mixed: Vec<Array2<f64>> = (0..tuple.len())
            .map(|j| mix(&role_mats, posteriors.row(j)))
            .collect();
        let mut proj = Array2::zeros((tuple.len(), params.dim_k()));
        for (j, &a) in tuple.lemmas.iter().enumerate() {
            proj.row_mut(j)
                .assign(&params.embeddings.row(a).dot(&mixed[j]));
        }
        let ctx = proj.sum_axis(Axis(0));
        let d_mixed = vec![Array2::zeros((params.dim_d(), params.dim_k())); tuple.len()];
        Reconstruction {
            tuple,
            posteriors,
            params,
            role_mats,
            mixed,
            d_proj: Array2::zeros(proj.raw_dim()),
            proj,
            ctx,
            grad: DecoderGradient::zeros(params),
            d_mixed,
            d_role: vec![Array2::zeros((params.dim_d(), params.dim_k())); params.num_roles()],
            d_mu: Array2::zeros((tuple.len(), params.num_roles())),
        }
    }

    /// Scores candidates for `query`, accumulates `scale · ∂/∂u_c`, and
    /// returns the log-probability of the true lemma and `scale · ∂/∂query`.
    fn softmax_candidates(
        &mut self,
        i: usize,
        negatives: &[usize],
        query: &Array1<f64>,
        scale: f64,
    ) -> (f64, Option<Array1<f64>>) {
        let u = &self.params.embeddings;
        let truth = self.tuple.lemmas[i];
        let candidates = || std::iter::once(truth).chain(negatives.iter().copied());
        let scores: Vec<f64> = candidates().map(|c| u.row(c).dot(query)).collect();
        let log_z = log_sum_exp(&scores);
        let logprob = scores[0] - log_z;
        if scale == 0.0 {
            return (logprob, None);
        }
        let dim_d = self.params.dim_d();
        let mut d_query = Array1::<f64>::zeros(dim_d);
        for (slot, (c, &score)) in candidates().zip(&scores).enumerate() {
            let target = if slot == 0 { 1.0 } else { 0.0 };
            let w = target - (score - log_z).exp();
            d_query.scaled_add(w, &u.row(c));
            self.grad.embedding_row(c, dim_d).scaled_add(scale * w, query);
        }
        d_query *= scale;
        (logprob, Some(d_query))
    }

    fn spread_context_gradient(&mut self, i: usize, d_context: &Array1<f64>) {
        // context = Σ_{j≠i} proj_j
        for j in 0..self.tuple.len() {
            if j != i {
                self.d_proj.row_mut(j).scaled_add(1.0, d_context);
            }
        }
    }

    /// Sampled-softmax log-probability of the true lemma at position `i`
    /// against `negatives`, with `μ_i` mixed into the score; `scale · ∂/∂θ`
    /// is accumulated.
    pub fn position(&mut self, i: usize, negatives: &[usize], scale: f64) -> f64 {
        let context = &self.ctx - &self.proj.row(i);
        let query = self.mixed[i].dot(&context);
        let (logprob, d_query) = self.softmax_candidates(i, negatives, &query, scale);
        if let Some(d_query) = d_query {
            // query = P_i · context
            let d_context = self.mixed[i].t().dot(&d_query);
            self.d_mixed[i] += &outer(&d_query.view(), &context.view());
            self.spread_context_gradient(i, &d_context);
        }
        logprob
    }

    /// [`position`](Self::position) or
    /// [`position_expected`](Self::position_expected).
    pub fn position_with(
        &mut self,
        form: MeanField,
        i: usize,
        negatives: &[usize],
        scale: f64,
    ) -> f64 {
        match form {
            MeanField::Score => self.position(i, negatives, scale),
            MeanField::OwnRoleExpected => self.position_expected(i, negatives, scale),
        }
    }

    /// `Σ_r μ_ir log p̃(a_i | r_i = r, μ_{-i})`: the expectation over the
    /// role of position `i` is taken outside the log, while the other
    /// positions stay mixed inside the context. `scale · ∂/∂θ` is
    /// accumulated.
    pub fn position_expected(&mut self, i: usize, negatives: &[usize], scale: f64) -> f64 {
        let context = &self.ctx - &self.proj.row(i);
        let mut total = 0.0;
        for r in 0..self.params.num_roles() {
            let mu = self.posteriors.row(i)[r];
            let query = self.role_mats[r].dot(&context);
            let (logprob, d_query) = self.softmax_candidates(i, negatives, &query, scale * mu);
            total += mu * logprob;
            self.d_mu[[i, r]] += scale * logprob;
            if let Some(d_query) = d_query {
                let d_context = self.role_mats[r].t().dot(&d_query);
                self.d_role[r] += &outer(&d_query.view(), &context.view());
                self.spread_context_gradient(i, &d_context);
            }
        }
        total
    }

    /// Finishes back-propagation, returning the parameter gradient and
    /// `∂/∂μ` (both already multiplied by the scales passed to
    /// [`position`](Self::position)).
    pub fn finish(mut self) -> (DecoderGradient, Array2<f64>) {
        let params = self.params;
        let dim_d = params.dim_d();
        let u = &params.embeddings;
        // proj_j = P_jᵀ u_{a_j}
        for (j, &a) in self.tuple.lemmas.iter().enumerate() {
            let dp = self.d_proj.row(j);
            if dp.iter().all(|&x| x == 0.0) {
                continue;
            }
            let du = self.mixed[j].dot(&dp);
            *self.grad.embedding_row(a, dim_d) += &du;
            self.d_mixed[j] += &outer(&u.row(a), &dp);
        }
        // P_j = Σ_s μ_js M_s, M_s = C_s + C_{v,s}
        let num_roles = params.num_roles();
        let mut d_mu = self.d_mu;
        let mut d_role = self.d_role;
        for (j, dm) in self.d_mixed.iter().enumerate() {
            for s in 0..num_roles {
                let mu = self.posteriors.row(j)[s];
                if mu != 0.0 {
                    d_role[s].scaled_add(mu, dm);
                }
                d_mu[[j, s]] += (&self.role_mats[s] * dm).sum();
            }
        }
        let slot = params.slot(self.tuple.predicate);
        for (s, dr) in d_role.iter().enumerate() {
            let mut shared = self.grad.shared.index_axis_mut(Axis(0), s);
            shared += dr;
        }
        if let Some(slot) = slot {
            let mut block = Array3::zeros(params.shared.raw_dim());
            for (s, dr) in d_role.iter().enumerate() {
                block.index_axis_mut(Axis(0), s).assign(dr);
            }
            self.grad.specific.insert(slot, block);
        }
        (self.grad, d_mu)
    }
}

fn outer(a: &ArrayView1<'_, f64>, b: &ArrayView1<'_, f64>) -> Array2<f64> {
    a.view()
        .insert_axis(Axis(1))
        .dot(&b.view().insert_axis(Axis(0)))
}

/// Result of [`sampled_logprob`]: the value and its gradients.
#[derive(Clone, Debug)]
pub struct SampledLogProb {
    pub value: f64,
    pub grad: DecoderGradient,
    pub d_mu: Array2<f64>,
}

/// Sampled-softmax log-probability of argument `i` over the candidate set
/// `{a_i} ∪ negatives`, with gradients for every decoder parameter and
/// for the posteriors.
pub fn sampled_logprob(
    i: usize,
    tuple: &ArgumentTuple,
    posteriors: &RolePosteriors,
    params: &DecoderParams,
    negatives: &[usize],
) -> SampledLogProb {
    let mut pass = Reconstruction::new(tuple, posteriors, params);
    let value = pass.position(i, negatives, 1.0);
    let (grad, d_mu) = pass.finish();
    SampledLogProb { value, grad, d_mu }
}
