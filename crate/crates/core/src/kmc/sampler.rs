//! Binary indexed tree over non-negative weights with categorical sampling.

use rand::Rng;

/// Incremental updates accumulate rounding error in the partial sums; the
/// tree is rebuilt from the exact leaves after this many of them.
const REBUILD_INTERVAL: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct RateTree {
    leaf: Vec<f64>,
    // 1-based partial sums
    tree: Vec<f64>,
    top_bit: usize,
    updates: u64,
}

impl RateTree {
    pub fn new(weights: Vec<f64>) -> Self {
        assert!(!weights.is_empty());
        let n = weights.len();
        let top_bit = 1usize << (usize::BITS - 1 - n.leading_zeros());
        let mut t = Self {
            leaf: weights,
            tree: vec![0.0; n + 1],
            top_bit,
            updates: 0,
        };
        t.rebuild();
        t
    }

    pub fn len(&self) -> usize {
        self.leaf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaf.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.leaf[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.leaf
    }

    pub fn rebuild(&mut self) {
        let n = self.leaf.len();
        self.tree[1..].copy_from_slice(&self.leaf);
        self.tree[0] = 0.0;
        for i in 1..=n {
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                self.tree[j] += self.tree[i];
            }
        }
        self.updates = 0;
    }

    pub fn set(&mut self, i: usize, w: f64) {
        debug_assert!(w >= 0.0, "negative weight {w}");
        let delta = w - self.leaf[i];
        if delta == 0.0 {
            return;
        }
        self.leaf[i] = w;
        self.updates += 1;
        if self.updates >= REBUILD_INTERVAL {
            self.rebuild();
            return;
        }
        let n = self.leaf.len();
        let mut j = i + 1;
        while j <= n {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    /// Sum of the first `k` weights.
    pub fn prefix(&self, k: usize) -> f64 {
        let mut s = 0.0;
        let mut j = k;
        while j > 0 {
            s += self.tree[j];
            j &= j - 1;
        }
        s
    }

    pub fn total(&self) -> f64 {
        self.prefix(self.leaf.len())
    }

    /// Index `i` with `prefix(i) <= u < prefix(i + 1)`, clamped to the last index.
    pub fn find(&self, mut u: f64) -> usize {
        let n = self.leaf.len();
        let mut pos = 0;
        let mut bit = self.top_bit;
        while bit > 0 {
            let next = pos + bit;
            if next <= n && self.tree[next] <= u {
                pos = next;
                u -= self.tree[next];
            }
            bit >>= 1;
        }
        pos.min(n - 1)
    }

    /// Index drawn with probability proportional to its weight, or `None`
    /// if all weights vanish.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let total = self.total();
        if total <= 0.0 {
            return None;
        }
        loop {
            let i = self.find(rng.random::<f64>() * total);
            // a zero leaf is reachable only through rounding in the partial sums
            if self.leaf[i] > 0.0 {
                return Some(i);
            }
            if self.leaf.iter().all(|&w| w == 0.0) {
                return None;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prefix_sums_match_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 3, 7, 8, 9, 100] {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mut t = RateTree::new(w.clone());
            for k in 0..=n {
                let s: f64 = w[..k].iter().sum();
                assert!((t.prefix(k) - s).abs() < 1e-12);
            }
            t.set(n / 2, 5.0);
            let s: f64 = t.weights().iter().sum();
            assert!((t.total() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn find_inverts_prefix() {
        let t = RateTree::new(vec![1.0, 0.0, 2.0, 0.5, 0.0]);
        assert_eq!(t.find(0.0), 0);
        assert_eq!(t.find(0.999), 0);
        assert_eq!(t.find(1.0), 2);
        assert_eq!(t.find(2.999), 2);
        assert_eq!(t.find(3.0), 3);
        assert_eq!(t.find(3.49), 3);
        assert_eq!(t.find(10.0), 4);
    }

    #[test]
    fn sampling_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = RateTree::new(vec![1.0, 0.0, 3.0, 4.0]);
        let mut counts = [0usize; 4];
        let draws = 80_000;
        for _ in 0..draws {
            counts[t.sample(&mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[1], 0);
        for (i, p) in [(0, 0.125), (2, 0.375), (3, 0.5)] {
            let f = counts[i] as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((f - p).abs() < 4.0 * se, "{i}: {f}");
        }
        assert_eq!(RateTree::new(vec![0.0; 3]).sample(&mut rng), None);
    }

    #[test]
    fn rebuild_bounds_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = RateTree::new(vec![0.0; 64]);
        for _ in 0..300_000 {
            let i = rng.random_range(0..64);
            t.set(i, rng.random::<f64>() * 1e3);
        }
        let s: f64 = t.weights().iter().sum();
        assert!((t.total() - s).abs() < 1e-9 * s);
    }
}
