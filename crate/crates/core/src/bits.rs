//! Small growable bitset used for guard cubes and letters.

use std::fmt;

use smallvec::SmallVec;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    words: SmallVec<[u64; 2]>,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_len(len: usize) -> Self {
        let mut words = SmallVec::new();
        words.resize(len.div_ceil(64), 0);
        Bits { words }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Self::with_len(len);
        for i in 0..len {
            b.set(i, true);
        }
        b
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let w = i / 64;
        if w >= self.words.len() {
            if !v {
                return;
            }
            self.words.resize(w + 1, 0);
        }
        if v {
            self.words[w] |= 1 << (i % 64);
        } else {
            self.words[w] &= !(1 << (i % 64));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// True iff `self & other` has any bit set.
    #[inline]
    pub fn intersects(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &a)| a & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn and(&self, other: &Bits) -> Bits {
        let n = self.words.len().min(other.words.len());
        Bits {
            words: (0..n).map(|i| self.words[i] & other.words[i]).collect(),
        }
    }

    pub fn or(&self, other: &Bits) -> Bits {
        let n = self.words.len().max(other.words.len());
        Bits {
            words: (0..n)
                .map(|i| {
                    self.words.get(i).copied().unwrap_or(0) | other.words.get(i).copied().unwrap_or(0)
                })
                .collect(),
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let n = self.words.len().max(other.words.len());
        Bits {
            words: (0..n)
                .map(|i| {
                    self.words.get(i).copied().unwrap_or(0) ^ other.words.get(i).copied().unwrap_or(0)
                })
                .collect(),
        }
    }

    /// `(self ^ other) & mask` has any bit set.
    #[inline]
    pub fn differs_on(&self, other: &Bits, mask: &Bits) -> bool {
        mask.words.iter().enumerate().any(|(i, &m)| {
            m != 0
                && (self.words.get(i).copied().unwrap_or(0) ^ other.words.get(i).copied().unwrap_or(0))
                    & m
                    != 0
        })
    }

    /// Trailing zero words are dropped so that equal sets compare equal.
    pub fn normalized(mut self) -> Bits {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
        self
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for Bits {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut b = Bits::new();
        for i in iter {
            b.set(i, true);
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_iter() {
        let mut b = Bits::new();
        b.set(3, true);
        b.set(70, true);
        assert!(b.get(3) && b.get(70) && !b.get(4));
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![3, 70]);
        b.set(70, false);
        assert_eq!(b.clone().normalized(), [3].into_iter().collect());
    }

    #[test]
    fn differs_on_mask() {
        let a: Bits = [1, 2].into_iter().collect();
        let b: Bits = [1].into_iter().collect();
        let m: Bits = [1].into_iter().collect();
        assert!(!a.differs_on(&b, &m));
        let m2: Bits = [2].into_iter().collect();
        assert!(a.differs_on(&b, &m2));
    }
}
