//! Log-linear role labeler factorized over arguments: one softmax over
//! roles per argument, with logits summed from the argument's active
//! binary features.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1};

use crate::corpus::PredicateInstance;

/// Role-by-feature weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    weights: Array2<f64>,
}

impl EncoderParams {
    pub fn zeros(num_roles: usize, num_features: usize) -> Self {
        EncoderParams {
            weights: Array2::zeros((num_roles, num_features)),
        }
    }

    pub fn from_weights(weights: Array2<f64>) -> Self {
        EncoderParams { weights }
    }

    pub fn num_roles(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Array2<f64> {
        &mut self.weights
    }
}

/// Per-argument role distributions, `N × |R|`.
#[derive(Clone, Debug, PartialEq)]
pub struct RolePosteriors {
    mu: Array2<f64>,
}

impl RolePosteriors {
    pub fn new(mu: Array2<f64>) -> Self {
        RolePosteriors { mu }
    }

    /// One-hot posteriors for hard roles.
    pub fn one_hot(roles: &[usize], num_roles: usize) -> Self {
        let mut mu = Array2::zeros((roles.len(), num_roles));
        for (i, &r) in roles.iter().enumerate() {
            mu[[i, r]] = 1.0;
        }
        RolePosteriors { mu }
    }

    pub fn mu(&self) -> &Array2<f64> {
        &self.mu
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.mu.row(i)
    }

    pub fn num_args(&self) -> usize {
        self.mu.nrows()
    }

    pub fn num_roles(&self) -> usize {
        self.mu.ncols()
    }
}

/// Unnormalized role scores, `N × |R|`.
pub fn logits(instance: &PredicateInstance, params: &EncoderParams) -> Array2<f64> {
    let w = &params.weights;
    let mut out = Array2::zeros((instance.len(), params.num_roles()));
    for (i, arg) in instance.args.iter().enumerate() {
        for &f in &arg.feature_ids {
            for r in 0..params.num_roles() {
                out[[i, r]] += w[[r, f]];
            }
        }
    }
    out
}

/// In-place max-shifted softmax.
pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

pub fn encode(instance: &PredicateInstance, params: &EncoderParams) -> RolePosteriors {
    let mut mu = logits(instance, params);
    for mut row in mu.rows_mut() {
        softmax_in_place(row.as_slice_mut().expect("standard layout"));
    }
    RolePosteriors { mu }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Hard role per argument.
pub fn label(instance: &PredicateInstance, params: &EncoderParams) -> Vec<usize> {
    let mu = encode(instance, params);
    mu.mu.rows().into_iter().map(argmax).collect()
}

/// Gradient over encoder weights, stored per touched feature column.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EncoderGradient {
    columns: BTreeMap<usize, Vec<f64>>,
}

impl EncoderGradient {
    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Gradient column for `feature` (one value per role), if touched.
    pub fn column(&self, feature: usize) -> Option<&[f64]> {
        self.columns.get(&feature).map(Vec::as_slice)
    }

    pub fn columns(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.columns.iter().map(|(&f, v)| (f, v.as_slice()))
    }

    pub(crate) fn columns_mut(&mut self) -> impl Iterator<Item = (usize, &mut Vec<f64>)> {
        self.columns.iter_mut().map(|(&f, v)| (f, v))
    }

    /// `((feature, role), value)` entries in feature-major order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.columns
            .iter()
            .flat_map(|(&f, col)| col.iter().enumerate().map(move |(r, &g)| ((f, r), g)))
    }

    pub fn get(&self, feature: usize, role: usize) -> f64 {
        self.columns.get(&feature).map(|c| c[role]).unwrap_or(0.0)
    }

    pub fn add_to_column(&mut self, feature: usize, values: &[f64]) {
        let column = self
            .columns
            .entry(feature)
            .or_insert_with(|| vec![0.0; values.len()]);
        for (c, v) in column.iter_mut().zip(values) {
            *c += v;
        }
    }

    pub fn merge(&mut self, other: &EncoderGradient) {
        for (f, col) in other.columns() {
            self.add_to_column(f, col);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for col in self.columns.values_mut() {
            col.iter_mut().for_each(|g| *g *= factor);
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.columns.values().flatten().map(|g| g * g).sum()
    }
}

/// Chains `upstream = dLoss/dμ` through the per-argument softmax.
pub fn encoder_gradient(
    instance: &PredicateInstance,
    params: &EncoderParams,
    upstream: &Array2<f64>,
) -> EncoderGradient {
    let posteriors = encode(instance, params);
    encoder_gradient_from(instance, &posteriors, upstream)
}

/// As [`encoder_gradient`], reusing already computed posteriors.
pub fn encoder_gradient_from(
    instance: &PredicateInstance,
    posteriors: &RolePosteriors,
    upstream: &Array2<f64>,
) -> EncoderGradient {
    let mut grad = EncoderGradient::default();
    let num_roles = posteriors.num_roles();
    let mut dlogit = vec![0.0; num_roles];
    for (i, arg) in instance.args.iter().enumerate() {
        let mu = posteriors.row(i);
        let up = upstream.row(i);
        if up.iter().all(|&g| g == 0.0) {
            continue;
        }
        // d softmax: μ_s (g_s − Σ_t μ_t g_t)
        let mean: f64 = mu.iter().zip(up.iter()).map(|(m, g)| m * g).sum();
        for r in 0..num_roles {
            dlogit[r] = mu[r] * (up[r] - mean);
        }
        for &f in &arg.feature_ids {
            grad.add_to_column(f, &dlogit);
        }
    }
    grad
}
