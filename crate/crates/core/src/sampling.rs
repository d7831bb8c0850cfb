use rand::Rng;

use crate::error::{Error, Result};

/// Inverse-CDF sampler over a finite set of outcomes.
///
/// Outcomes with zero weight are never returned.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl DiscreteSampler {
    /// Builds the sampler from nonnegative weights; they need not sum to one.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let last_positive = weights
            .iter()
            .rposition(|w| *w > 0.0)
            .ok_or_else(|| Error::InvalidDistribution("all weights are zero".into()))?;
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        Ok(DiscreteSampler { cdf, last_positive })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Maps a uniform variate in `[0, 1)` to an outcome index.
    pub fn index_for(&self, u: f64) -> usize {
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index_for(rng.random::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_are_skipped() {
        let s = DiscreteSampler::new(&[0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        for k in 0..1000 {
            let i = s.index_for(k as f64 / 1000.0);
            assert!(i == 1 || i == 3, "got {i}");
        }
        assert_eq!(s.index_for(0.0), 1);
        assert_eq!(s.index_for(0.5), 3);
        // rounding past the last cumulative value still lands on a positive bin
        assert_eq!(s.index_for(1.0), 3);
    }

    #[test]
    fn rejects_degenerate_weights() {
        assert!(DiscreteSampler::new(&[0.0, 0.0]).is_err());
        assert!(DiscreteSampler::new(&[]).is_err());
        assert!(DiscreteSampler::new(&[1.0, -0.1]).is_err());
        assert!(DiscreteSampler::new(&[f64::NAN]).is_err());
    }
}
