/// A vector that keeps its first `N` elements inline and spills the rest to
/// the heap. Unlike a classic small vector the inline prefix never moves, so
/// spilling costs one allocation and no copy.
#[derive(Clone)]
pub struct SmallVec<T: Copy + Default, const N: usize> {
    inline: [T; N],
    len: u32,
    spill: Vec<T>,
}

impl<T: Copy + Default, const N: usize> Default for SmallVec<T, N> {
    fn default() -> Self {
        SmallVec { inline: [T::default(); N], len: 0, spill: Vec::new() }
    }
}

impl<T: Copy + Default, const N: usize> SmallVec<T, N> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: T) {
        let n = self.len as usize;
        if n < N {
            self.inline[n] = x;
        } else {
            self.spill.push(x);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spilled(&self) -> bool {
        !self.spill.is_empty()
    }

    pub fn iter(&self) -> std::iter::Chain<std::slice::Iter<'_, T>, std::slice::Iter<'_, T>> {
        let n = (self.len as usize).min(N);
        self.inline[..n].iter().chain(self.spill.iter())
    }

    pub fn get(&self, i: usize) -> Option<T> {
        if i < N {
            (i < self.len as usize).then(|| self.inline[i])
        } else {
            self.spill.get(i - N).copied()
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.iter().copied().collect()
    }

    /// Heap bytes in use beyond the inline buffer.
    pub fn heap_bytes(&self) -> usize {
        self.spill.capacity() * std::mem::size_of::<T>()
    }
}

impl<T: Copy + Default + std::fmt::Debug, const N: usize> std::fmt::Debug for SmallVec<T, N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl<T: Copy + Default + PartialEq, const N: usize> PartialEq for SmallVec<T, N> {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.iter().eq(other.iter())
    }
}

impl<T: Copy + Default, const N: usize> FromIterator<T> for SmallVec<T, N> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut v = SmallVec::new();
        for x in iter {
            v.push(x);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn six_into_four() {
        let v: SmallVec<u32, 4> = (0..6).collect();
        assert_eq!(v.to_vec(), vec![0, 1, 2, 3, 4, 5]);
        assert!(v.spilled());
        assert_eq!(v.get(5), Some(5));
        assert_eq!(v.get(6), None);
    }

    #[test]
    fn boundary_lengths() {
        for n in [3usize, 4, 5] {
            let v: SmallVec<u32, 4> = (0..n as u32).rev().collect();
            let w: Vec<u32> = (0..n as u32).rev().collect();
            assert_eq!(v.to_vec(), w);
            assert_eq!(v.len(), n);
            assert_eq!(v.spilled(), n > 4);
        }
        let e: SmallVec<u32, 1> = SmallVec::new();
        assert!(e.is_empty());
        assert_eq!(e.iter().count(), 0);
    }

    proptest! {
        #[test]
        fn matches_vec(xs in proptest::collection::vec(any::<u32>(), 0..40)) {
            let v: SmallVec<u32, 4> = xs.iter().copied().collect();
            prop_assert_eq!(v.to_vec(), xs.clone());
            let v: SmallVec<u32, 1> = xs.iter().copied().collect();
            prop_assert_eq!(v.to_vec(), xs.clone());
            let v: SmallVec<u32, 16> = xs.iter().copied().collect();
            prop_assert_eq!(v.len(), xs.len());
            prop_assert_eq!(v.to_vec(), xs);
        }
    }
}
