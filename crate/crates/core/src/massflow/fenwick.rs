//! Prefix-sum tree over non-negative weights with `O(log n)` update and
//! weighted search.

#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        tree[1..].copy_from_slice(values);
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        Fenwick { tree }
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn add(&mut self, index: usize, delta: f64) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of the first `count` weights.
    pub fn prefix(&self, count: usize) -> f64 {
        let mut i = count;
        let mut acc = 0.0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }

    pub fn total(&self) -> f64 {
        self.prefix(self.len())
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`; clamps to
    /// the last index when rounding puts `target` past the total.
    pub fn find(&self, mut target: f64) -> usize {
        let n = self.len();
        let mut pos = 0;
        let mut step = if n == 0 { 0 } else { 1usize << (usize::BITS - 1 - n.leading_zeros()) };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n.saturating_sub(1))
    }
}
