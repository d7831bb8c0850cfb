//! Seeded fixtures shared by the criterion targets.

use num_complex::Complex64;
use rand::Rng;
use telegraph_core::{DensityMatrix, SeedStream, StateVector};

/// Random normalized state of dimension `dim`.
pub fn random_state(dim: usize, seed: u64) -> StateVector {
    let mut rng = SeedStream::new(seed).child("state").rng();
    let amps = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::from_amplitudes(amps)
        .normalize()
        .expect("nonzero")
}

/// Equal mixture of `rank` random pure states.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> DensityMatrix {
    let parts: Vec<(f64, DensityMatrix)> = (0..rank)
        .map(|k| {
            let s = random_state(dim, seed.wrapping_add(k as u64));
            (
                1.0 / rank as f64,
                DensityMatrix::from_state(&s).expect("normalized"),
            )
        })
        .collect();
    DensityMatrix::mixture(&parts).expect("valid mixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid_and_seeded() {
        assert!(random_state(8, 1).is_normalized());
        assert_eq!(random_state(8, 1), random_state(8, 1));
        let rho = random_density(6, 3, 2);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }
}
