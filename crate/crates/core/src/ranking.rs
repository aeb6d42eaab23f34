//! Macro weights: frequency counting with bonus points, and gradient-descent
//! weights compared against an imaginary constant-performance macro.

use std::collections::BTreeMap;

use num_traits::Float;

fn lit<F: Float>(x: f64) -> F {
    F::from(x).expect("literal representable in the scalar type")
}

/// Symmetric sigmoid `2 / (1 + e^-x) - 1`, odd and bounded by (-1, 1).
pub fn sigmoid<F: Float>(x: F) -> F {
    let one = F::one();
    (one + one) / (one + (-x).exp()) - one
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingMode {
    /// Higher is better; weights start at 0.
    Frequency,
    /// Lower is better; weights start at 1.
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingParams<F> {
    /// Learning rate of the gradient update.
    pub alpha: F,
    /// Bonus for appearing in a training plan at all.
    pub bonus: F,
    /// Relative node saving attributed to the imaginary macro.
    pub c: F,
}

impl<F: Float> Default for RankingParams<F> {
    fn default() -> Self {
        RankingParams {
            alpha: lit(0.001),
            bonus: lit(10.0),
            c: lit(0.01),
        }
    }
}

/// Per-macro weights keyed by `K`; ties are broken by key order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable<F, K: Ord> {
    pub mode: RankingMode,
    pub params: RankingParams<F>,
    weights: BTreeMap<K, F>,
    /// Weight of the imaginary macro (gradient mode).
    pub threshold: F,
}

impl<F: Float, K: Ord + Clone> WeightTable<F, K> {
    pub fn new(mode: RankingMode, params: RankingParams<F>) -> Self {
        WeightTable {
            mode,
            params,
            weights: BTreeMap::new(),
            threshold: F::one(),
        }
    }

    pub fn initial_weight(&self) -> F {
        match self.mode {
            RankingMode::Frequency => F::zero(),
            RankingMode::Gradient => F::one(),
        }
    }

    /// Registers a macro at its initial weight; existing weights are kept.
    pub fn insert(&mut self, key: K) {
        let w = self.initial_weight();
        self.weights.entry(key).or_insert(w);
    }

    pub fn weight(&self, key: &K) -> Option<F> {
        self.weights.get(key).copied()
    }

    pub fn set_weight(&mut self, key: K, w: F) {
        self.weights.insert(key, w);
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, F)> {
        self.weights.iter().map(|(k, &w)| (k, w))
    }

    /// Adds `occurrences + bonus` for every macro that occurs in one training plan.
    pub fn frequency_update<'a>(&mut self, occurrences: impl IntoIterator<Item = (&'a K, usize)>)
    where
        K: 'a,
    {
        let bonus = self.params.bonus;
        for (k, n) in occurrences {
            if n == 0 {
                continue;
            }
            let w = self.weights.entry(k.clone()).or_insert(F::zero());
            *w = *w + F::from(n).expect("count fits the scalar type") + bonus;
        }
    }

    /// `w -= alpha * sigma((n - n_m) / n) * l`. A failed run with the macro counts as `n_m = 2n`.
    pub fn gradient_update(&mut self, key: &K, n: u64, n_m: Option<u64>, l: usize) {
        debug_assert!(n > 0, "baseline node count must be positive");
        let nf = F::from(n).expect("count fits the scalar type");
        let nm = match n_m {
            Some(x) => F::from(x).expect("count fits the scalar type"),
            None => nf + nf,
        };
        let delta = sigmoid((nf - nm) / nf);
        let step = self.params.alpha * delta * F::from(l).expect("length fits the scalar type");
        let init = self.initial_weight();
        let w = self.weights.entry(key.clone()).or_insert(init);
        *w = *w - step;
    }

    /// `w_im -= alpha * sigma(c) * l`, once per training problem.
    pub fn threshold_update(&mut self, l: usize) {
        let step = self.params.alpha * sigmoid(self.params.c) * F::from(l).expect("length fits the scalar type");
        self.threshold = self.threshold - step;
    }

    /// The `k` highest nonzero weights, ties broken by key order.
    pub fn select_top_k(&self, k: usize) -> Vec<(K, F)> {
        let mut v: Vec<(K, F)> = self
            .weights
            .iter()
            .filter(|(_, w)| **w > F::zero())
            .map(|(key, w)| (key.clone(), *w))
            .collect();
        // Stable sort keeps key order among equal weights.
        v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        v.truncate(k);
        v
    }

    /// Macros weighing less than the imaginary macro, lightest first.
    pub fn select_below_threshold(&self) -> Vec<(K, F)> {
        let mut v: Vec<(K, F)> = self
            .weights
            .iter()
            .filter(|(_, w)| **w < self.threshold)
            .map(|(key, w)| (key.clone(), *w))
            .collect();
        v.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigmoid_is_tanh_of_half() {
        for x in [-3.0_f64, -0.5, 0.0, 0.01, 0.5, 2.0] {
            assert_abs_diff_eq!(sigmoid(x), (x / 2.0).tanh(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(sigmoid(0.5_f32), 0.244_918_66_f32, epsilon = 1e-6);
    }

    #[test]
    fn frequency_adds_bonus_once_per_plan() {
        let mut t: WeightTable<f64, &str> = WeightTable::new(RankingMode::Frequency, RankingParams::default());
        t.insert("a");
        t.insert("b");
        t.frequency_update([(&"a", 3usize), (&"b", 0)]);
        assert_eq!(t.weight(&"a"), Some(13.0));
        assert_eq!(t.weight(&"b"), Some(0.0));
        assert_eq!(t.select_top_k(2), vec![("a", 13.0)]);
    }

    #[test]
    fn failed_run_is_penalized() {
        let mut t: WeightTable<f64, &str> = WeightTable::new(RankingMode::Gradient, RankingParams::default());
        t.gradient_update(&"m", 100, None, 10);
        assert!(t.weight(&"m").unwrap() > 1.0);
    }
}
