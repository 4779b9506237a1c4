use std::cmp::Ordering;

/// An association list kept in ascending key order. Keys must arrive in
/// non-decreasing order; lookups binary search.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SortedDict<K, V> {
    keys: Vec<K>,
    vals: Vec<V>,
}

/// A key arrived below the current maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutOfOrder;

impl<K: Ord, V> SortedDict<K, V> {
    pub fn new() -> Self {
        SortedDict { keys: Vec::new(), vals: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Returns the entry for `key`, appending `make()` when `key` is above
    /// every stored key. Only the last entry can be revisited.
    pub fn last_or_insert_with(&mut self, key: K, make: impl FnOnce() -> V) -> Result<&mut V, OutOfOrder> {
        match self.keys.last().map(|k| key.cmp(k)) {
            Some(Ordering::Equal) => {}
            Some(Ordering::Less) => return Err(OutOfOrder),
            _ => {
                self.keys.push(key);
                self.vals.push(make());
            }
        }
        Ok(self.vals.last_mut().expect("non-empty"))
    }

    /// Binary search, adding the number of key comparisons to `comparisons`.
    /// At most `floor(log2 k) + 1` comparisons for `k` keys.
    pub fn get(&self, key: &K, comparisons: &mut u64) -> Option<&V> {
        let (mut lo, mut hi) = (0, self.keys.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            *comparisons += 1;
            match self.keys[mid].cmp(key) {
                Ordering::Equal => return Some(&self.vals[mid]),
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
            }
        }
        None
    }

    pub fn iter(&self) -> std::iter::Zip<std::slice::Iter<'_, K>, std::slice::Iter<'_, V>> {
        self.keys.iter().zip(self.vals.iter())
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ordered_inserts() {
        let mut d = SortedDict::new();
        *d.last_or_insert_with(5, || 0).unwrap() += 1;
        *d.last_or_insert_with(5, || 0).unwrap() += 1;
        *d.last_or_insert_with(7, || 0).unwrap() += 1;
        assert_eq!(d.last_or_insert_with(6, || 0), Err(OutOfOrder));
        let got: Vec<_> = d.iter().map(|(k, v)| (*k, *v)).collect();
        assert_eq!(got, vec![(5, 2), (7, 1)]);
        let mut c = 0;
        assert_eq!(d.get(&7, &mut c), Some(&1));
        assert_eq!(d.get(&6, &mut c), None);
    }

    proptest! {
        #[test]
        fn lookup_cost_is_logarithmic(k in 1usize..5000, probe in 0i64..12000) {
            let mut d = SortedDict::new();
            for i in 0..k as i64 {
                d.last_or_insert_with(2 * i, || i).unwrap();
            }
            let mut c = 0;
            let found = d.get(&probe, &mut c).copied();
            let expect = (probe % 2 == 0 && probe / 2 < k as i64).then_some(probe / 2);
            prop_assert_eq!(found, expect);
            let bound = (k as f64).log2().ceil() as u64 + 1;
            prop_assert!(c <= bound, "{} comparisons for {} keys", c, k);
        }
    }
}
