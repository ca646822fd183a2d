use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::TrainError;

/// Draws negative lemmas from the unigram distribution raised to 0.75.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
}

pub const UNIGRAM_POWER: f64 = 0.75;

impl NegativeSampler {
    /// Needs at least two lemmas with a positive count, so that every
    /// lemma has an alternative to reject into.
    pub fn new(counts: &[u64]) -> Result<Self, TrainError> {
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| (c as f64).powf(UNIGRAM_POWER))
            .collect();
        if weights.iter().filter(|&&w| w > 0.0).count() < 2 {
            return Err(TrainError::Config(
                "negative sampling needs at least two attested argument lemmas".into(),
            ));
        }
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| TrainError::Config(format!("bad lemma counts: {}", e)))?;
        Ok(NegativeSampler { dist })
    }

    /// `n` draws, rejecting `exclude`.
    pub fn sample<R: Rng>(&self, rng: &mut R, exclude: usize, n: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let candidate = self.dist.sample(rng);
            if candidate != exclude {
                out.push(candidate);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn never_returns_excluded() {
        let sampler = NegativeSampler::new(&[0, 10, 1, 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let s = sampler.sample(&mut rng, 1, 20);
            assert_eq!(s.len(), 20);
            assert!(s.iter().all(|&x| x != 1 && x != 0));
        }
    }

    #[test]
    fn frequencies_follow_smoothed_unigram() {
        let counts = [100u64, 1, 16];
        let sampler = NegativeSampler::new(&counts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 200_000;
        let mut hist = [0usize; 3];
        for x in sampler.sample(&mut rng, usize::MAX, draws) {
            hist[x] += 1;
        }
        let w: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let total: f64 = w.iter().sum();
        for i in 0..3 {
            let expected = w[i] / total;
            let p = hist[i] as f64 / draws as f64;
            let sigma = (expected * (1.0 - expected) / draws as f64).sqrt();
            assert!((p - expected).abs() < 5.0 * sigma, "{} {} {}", i, p, expected);
        }
    }

    #[test]
    fn degenerate_alphabet_is_rejected() {
        assert!(NegativeSampler::new(&[0, 4]).is_err());
        assert!(NegativeSampler::new(&[]).is_err());
    }
}
