use ndarray::{s, Array2, Array3, Array4, Axis};

use super::{Gradients, ModelParams};

/// Updates one coordinate: `G += g²; θ −= η g / (√G + ε)`. A zero gradient
/// leaves both untouched.
#[inline]
pub fn adagrad_update(theta: &mut f64, accumulator: &mut f64, g: f64, lr: f64, eps: f64) {
    if g == 0.0 {
        return;
    }
    *accumulator += g * g;
    *theta -= lr * g / (accumulator.sqrt() + eps);
}

/// Squared-gradient accumulators, one per parameter coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaGradState {
    pub encoder: Array2<f64>,
    pub embeddings: Array2<f64>,
    pub shared: Array3<f64>,
    pub specific: Array4<f64>,
}

impl AdaGradState {
    pub fn new(params: &ModelParams) -> Self {
        AdaGradState {
            encoder: Array2::zeros(params.encoder.weights().raw_dim()),
            embeddings: Array2::zeros(params.decoder.embeddings().raw_dim()),
            shared: Array3::zeros(params.decoder.shared().raw_dim()),
            specific: Array4::zeros(params.decoder.specific().raw_dim()),
        }
    }
}

/// Applies one AdaGrad step. Only coordinates carried by `grads` are
/// visited, so untouched encoder columns and embedding rows stay bitwise
/// unchanged.
pub fn adagrad_step(
    params: &mut ModelParams,
    grads: &Gradients,
    state: &mut AdaGradState,
    lr: f64,
    eps: f64,
) {
    let weights = params.encoder.weights_mut();
    for (f, column) in grads.encoder.columns() {
        for (r, &g) in column.iter().enumerate() {
            adagrad_update(
                &mut weights[[r, f]],
                &mut state.encoder[[r, f]],
                g,
                lr,
                eps,
            );
        }
    }

    let embeddings = params.decoder.embeddings_mut();
    for (&a, row) in &grads.decoder.embeddings {
        let mut theta = embeddings.row_mut(a);
        let mut acc = state.embeddings.row_mut(a);
        for ((t, s), &g) in theta.iter_mut().zip(acc.iter_mut()).zip(row) {
            adagrad_update(t, s, g, lr, eps);
        }
    }

    let shared = params.decoder.shared_mut();
    for ((t, s), &g) in shared
        .iter_mut()
        .zip(state.shared.iter_mut())
        .zip(&grads.decoder.shared)
    {
        adagrad_update(t, s, g, lr, eps);
    }

    let specific = params.decoder.specific_mut();
    for (&slot, block) in &grads.decoder.specific {
        let mut theta = specific.index_axis_mut(Axis(0), slot);
        let mut acc = state.specific.slice_mut(s![slot, .., .., ..]);
        for ((t, s), &g) in theta.iter_mut().zip(acc.iter_mut()).zip(block) {
            adagrad_update(t, s, g, lr, eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step() {
        let (mut theta, mut acc) = (0.0, 0.0);
        adagrad_update(&mut theta, &mut acc, 1.0, 0.1, 0.0);
        assert!((theta - -0.1).abs() < 1e-15);
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn second_step_is_scaled_by_root_two() {
        let (mut theta, mut acc) = (0.0, 0.0);
        adagrad_update(&mut theta, &mut acc, 1.0, 0.1, 0.0);
        let before = theta;
        adagrad_update(&mut theta, &mut acc, 1.0, 0.1, 0.0);
        assert!(((theta - before) - -0.1 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let (mut theta, mut acc) = (0.25, 0.0);
        adagrad_update(&mut theta, &mut acc, 0.0, 0.1, 0.0);
        assert_eq!((theta, acc), (0.25, 0.0));
    }
}
