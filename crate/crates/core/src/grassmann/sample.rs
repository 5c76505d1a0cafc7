use rand::Rng;

use super::index::{free_slots, patterns};
use super::point::GrassPoint;
use crate::ring::ChainRing;

type Cell = (Vec<usize>, Vec<(usize, bool)>);

/// Uniform sampler on `Gr_k((O/m^R)^n)`: picks a pivot pattern with
/// probability proportional to its cell count, then fills free entries.
#[derive(Clone, Debug)]
pub struct PatternSampler {
    ring: ChainRing,
    n: usize,
    k: usize,
    cells: Vec<Cell>,
    cumulative: Vec<u128>,
}

impl PatternSampler {
    pub fn new(ring: &ChainRing, n: usize, k: usize) -> Self {
        let q = ring.q() as u128;
        let d = ring.depth();
        let mut cells = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0u128;
        for p in patterns(n, k) {
            let slots = free_slots(n, &p);
            let weight: u128 = slots
                .iter()
                .map(|&(_, t)| if t { q.pow(d - 1) } else { q.pow(d) })
                .product();
            acc += weight;
            cumulative.push(acc);
            cells.push((p, slots));
        }
        PatternSampler { ring: *ring, n, k, cells, cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GrassPoint {
        let total = *self.cumulative.last().expect("nonempty");
        let u = rng.gen_range(0..total);
        let which = self.cumulative.partition_point(|&c| c <= u);
        let (pivots, slots) = &self.cells[which];
        let m = self.ring.modulus();
        let q = self.ring.q();
        let mut e = vec![0u64; self.n * self.k];
        for (a, &p) in pivots.iter().enumerate() {
            e[a * self.n + p] = self.ring.one();
        }
        for &(idx, divisible) in slots {
            e[idx] = if divisible { rng.gen_range(0..m / q) * q } else { rng.gen_range(0..m) };
        }
        GrassPoint::from_canonical(self.n, self.k, self.ring.depth(), e)
    }
}

/// One Haar-random point of the level Grassmannian of `ring`.
pub fn sample_haar<R: Rng + ?Sized>(ring: &ChainRing, n: usize, k: usize, rng: &mut R) -> GrassPoint {
    PatternSampler::new(ring, n, k).sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldModel;
    use crate::grassmann::enumerate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampler_is_uniform() {
        let ring = ChainRing::new(FieldModel::equi(2).unwrap(), 2).unwrap();
        let idx = enumerate(&ring, 3, 1, None).unwrap();
        let s = PatternSampler::new(&ring, 3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = vec![0usize; idx.len()];
        let draws = 28_000;
        for _ in 0..draws {
            counts[idx.position(&s.sample(&mut rng)).unwrap()] += 1;
        }
        let expect = draws as f64 / idx.len() as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        // 27 degrees of freedom; 99.9% quantile is about 55.5.
        assert!(chi2 < 55.5, "chi2 = {chi2}");
    }
}
