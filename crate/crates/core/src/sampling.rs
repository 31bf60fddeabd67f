//! Deterministic sample generators for probe points and tangent directions.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Additive low-discrepancy sequence in the unit cube (Kronecker sequence with
/// the generalized golden-ratio increments). Deterministic and well spread,
/// which is what the probe grids for the Routh-force conditions need.
pub struct QuasiRandom {
    dim: usize,
    state: Vec<f64>,
    alpha: Vec<f64>,
}

impl QuasiRandom {
    pub fn new(dim: usize) -> Self {
        // phi_d is the unique positive root of x^(d+1) = x + 1
        let mut phi = 1.5f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
        }
        let alpha: Vec<f64> = (1..=dim)
            .map(|i| (1.0 / phi.powi(i as i32)).fract())
            .collect();
        QuasiRandom {
            dim,
            state: vec![0.5; dim],
            alpha,
        }
    }

    /// Next point in the unit cube.
    pub fn next_unit(&mut self) -> Vec<f64> {
        for i in 0..self.dim {
            self.state[i] = (self.state[i] + self.alpha[i]).fract();
        }
        self.state.clone()
    }

    /// Next point in the box `[lo, hi]` (componentwise).
    pub fn next_in(&mut self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        let u = self.next_unit();
        u.iter()
            .zip(lo.iter().zip(hi))
            .map(|(&t, (&a, &b))| a + t * (b - a))
            .collect()
    }
}

/// Seeded pseudo-random unit vectors (for random tangent pairs in the
/// preservation checks).
pub struct UnitVectors {
    rng: ChaCha8Rng,
    dim: usize,
}

impl UnitVectors {
    pub fn new(dim: usize, seed: u64) -> Self {
        UnitVectors {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
        }
    }

    pub fn next_vec(&mut self) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..self.dim)
                .map(|_| self.rng.gen_range(-1.0..1.0))
                .collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quasi_random_spreads_and_repeats() {
        let mut a = QuasiRandom::new(2);
        let mut b = QuasiRandom::new(2);
        let pa: Vec<_> = (0..64).map(|_| a.next_unit()).collect();
        let pb: Vec<_> = (0..64).map(|_| b.next_unit()).collect();
        assert_eq!(pa, pb);
        // all within the cube, and not all in one half
        assert!(pa.iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
        let low = pa.iter().filter(|p| p[0] < 0.5).count();
        assert!(low > 16 && low < 48);
    }

    #[test]
    fn unit_vectors_are_normalized() {
        let mut g = UnitVectors::new(4, 7);
        for _ in 0..8 {
            let v = g.next_vec();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
