//! Binary indexed tree over non-negative weights with prefix-sum search.

#[derive(Clone, Debug)]
pub struct Fenwick {
    tree: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl Fenwick {
    pub fn new(weights: Vec<f64>) -> Self {
        let mut f = Self {
            tree: vec![0.0; weights.len() + 1],
            weights,
            total: 0.0,
        };
        f.rebuild();
        f
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// Recompute internal sums from the stored weights, clearing rounding drift.
    pub fn rebuild(&mut self) {
        let n = self.weights.len();
        self.tree[0] = 0.0;
        self.tree[1..].copy_from_slice(&self.weights);
        for i in 1..=n {
            let p = i + (i & i.wrapping_neg());
            if p <= n {
                self.tree[p] += self.tree[i];
            }
        }
        self.total = self.prefix(n);
    }

    pub fn set(&mut self, k: usize, w: f64) {
        let delta = w - self.weights[k];
        if delta == 0.0 {
            return;
        }
        self.weights[k] = w;
        self.total += delta;
        let mut i = k + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Sum of the first `k` weights.
    pub fn prefix(&self, k: usize) -> f64 {
        let mut s = 0.0;
        let mut i = k;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest `k` with `prefix(k + 1) > target`, clamped to the last index.
    pub fn find(&self, mut target: f64) -> usize {
        let n = self.weights.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn find_respects_weights() {
        let f = Fenwick::new(vec![1.0, 0.0, 2.0, 0.5]);
        assert_eq!(f.total(), 3.5);
        assert_eq!(f.find(0.0), 0);
        assert_eq!(f.find(0.999), 0);
        assert_eq!(f.find(1.0), 2);
        assert_eq!(f.find(2.9), 2);
        assert_eq!(f.find(3.2), 3);
    }

    proptest! {
        #[test]
        fn prefix_matches_naive(ws in prop::collection::vec(0.0f64..3.0, 1..60),
                                updates in prop::collection::vec((0usize..60, 0.0f64..3.0), 0..40)) {
            let mut f = Fenwick::new(ws.clone());
            let mut naive = ws;
            for (k, w) in updates {
                let k = k % naive.len();
                f.set(k, w);
                naive[k] = w;
            }
            let mut acc = 0.0;
            for k in 0..=naive.len() {
                prop_assert!((f.prefix(k) - acc).abs() < 1e-9);
                if k < naive.len() { acc += naive[k]; }
            }
            for k in 0..naive.len() {
                if naive[k] > 1e-6 {
                    let s: f64 = naive[..k].iter().sum();
                    prop_assert_eq!(f.find(s + naive[k] * 0.5), k);
                }
            }
        }
    }
}
