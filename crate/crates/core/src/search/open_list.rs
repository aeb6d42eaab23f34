use std::collections::VecDeque;

/// Priority queue over small integer keys: one FIFO bucket per key.
///
/// Pops come from the lowest nonempty bucket, oldest first, which matches a
/// stably sorted list while inserting in constant amortized time.
#[derive(Debug, Clone)]
pub struct BucketOpenList<T> {
    buckets: Vec<VecDeque<T>>,
    /// No nonempty bucket lies below this index.
    min: usize,
    len: usize,
}

impl<T> Default for BucketOpenList<T> {
    fn default() -> Self {
        BucketOpenList {
            buckets: Vec::new(),
            min: 0,
            len: 0,
        }
    }
}

impl<T> BucketOpenList<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: usize, item: T) {
        if key >= self.buckets.len() {
            self.buckets.resize_with(key + 1, VecDeque::new);
        }
        self.buckets[key].push_back(item);
        self.min = self.min.min(key);
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<(usize, T)> {
        if self.len == 0 {
            return None;
        }
        while self.buckets[self.min].is_empty() {
            self.min += 1;
        }
        self.len -= 1;
        let item = self.buckets[self.min].pop_front()?;
        Some((self.min, item))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}
