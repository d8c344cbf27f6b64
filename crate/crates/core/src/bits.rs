//! Fixed-length bit buffer backed by `u64` words, least-significant bit first.

#[derive(Clone, PartialEq, Eq)]
pub struct BitBuf {
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for BitBuf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitBuf(len={}, ones={})", self.len, self.count_ones())
    }
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitBuf {
    pub fn zeros(len: usize) -> Self {
        BitBuf {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = BitBuf {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        b.clear_tail();
        b
    }

    pub fn from_words(words: Vec<u64>, len: usize) -> Self {
        assert_eq!(words.len(), words_for(len), "word count does not match length");
        let mut b = BitBuf { words, len };
        b.clear_tail();
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Overwrites word `w`; bits past the length are dropped.
    #[inline]
    pub fn set_word(&mut self, w: usize, v: u64) {
        self.words[w] = v;
        if w + 1 == self.words.len() {
            self.clear_tail();
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    pub fn assign(&mut self, i: usize, v: bool) {
        if v {
            self.set(i)
        } else {
            self.clear(i)
        }
    }

    /// Sets every bit in `[lo, hi)`, clipped to the buffer.
    pub fn fill_range(&mut self, lo: usize, hi: usize) {
        let hi = hi.min(self.len);
        if lo >= hi {
            return;
        }
        let (lw, hw) = (lo >> 6, (hi - 1) >> 6);
        let lmask = u64::MAX << (lo & 63);
        let hmask = u64::MAX >> (63 - ((hi - 1) & 63));
        if lw == hw {
            self.words[lw] |= lmask & hmask;
            return;
        }
        self.words[lw] |= lmask;
        for w in &mut self.words[lw + 1..hw] {
            *w = u64::MAX;
        }
        self.words[hw] |= hmask;
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Number of set bits in `[lo, hi)`.
    pub fn count_range(&self, lo: usize, hi: usize) -> u64 {
        let hi = hi.min(self.len);
        if lo >= hi {
            return 0;
        }
        let (lw, hw) = (lo >> 6, (hi - 1) >> 6);
        let lmask = u64::MAX << (lo & 63);
        let hmask = u64::MAX >> (63 - ((hi - 1) & 63));
        if lw == hw {
            return (self.words[lw] & lmask & hmask).count_ones() as u64;
        }
        let mut c = (self.words[lw] & lmask).count_ones() as u64;
        c += self.words[lw + 1..hw]
            .iter()
            .map(|w| w.count_ones() as u64)
            .sum::<u64>();
        c + (self.words[hw] & hmask).count_ones() as u64
    }

    /// The 64 bits starting at bit `start` (which may be negative or run past
    /// the end; missing bits read as zero).
    #[inline]
    pub fn window(&self, start: i64) -> u64 {
        let nw = self.words.len() as i64;
        let wi = start.div_euclid(64);
        let sh = start.rem_euclid(64) as u32;
        let word = |i: i64| -> u64 {
            if i >= 0 && i < nw {
                self.words[i as usize]
            } else {
                0
            }
        };
        if sh == 0 {
            word(wi)
        } else {
            (word(wi) >> sh) | (word(wi + 1) << (64 - sh))
        }
    }

    /// Buffer of length `len` whose bit `i` is `self[i + offset]`.
    pub fn slice_shifted(&self, offset: i64, len: usize) -> BitBuf {
        let mut words = vec![0u64; words_for(len)];
        for (w, out) in words.iter_mut().enumerate() {
            *out = self.window(offset + 64 * w as i64);
        }
        BitBuf::from_words(words, len)
    }

    pub fn and_assign(&mut self, other: &BitBuf) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn or_assign(&mut self, other: &BitBuf) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn and_not_assign(&mut self, other: &BitBuf) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
    }

    pub fn negate(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.clear_tail();
    }

    /// Positions of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.iter_ones_from(0)
    }

    pub fn iter_ones_from(&self, start: usize) -> impl Iterator<Item = usize> + '_ {
        let mut wi = start >> 6;
        let mut cur = if wi < self.words.len() {
            self.words[wi] & (u64::MAX << (start & 63))
        } else {
            0
        };
        std::iter::from_fn(move || loop {
            if cur != 0 {
                let bit = cur.trailing_zeros() as usize;
                cur &= cur - 1;
                return Some((wi << 6) + bit);
            }
            wi += 1;
            if wi >= self.words.len() {
                return None;
            }
            cur = self.words[wi];
        })
    }

    /// Smallest set position `>= start`.
    pub fn next_one(&self, start: usize) -> Option<usize> {
        self.iter_ones_from(start).next()
    }

    /// Largest set position `< end`.
    pub fn prev_one(&self, end: usize) -> Option<usize> {
        let end = end.min(self.len);
        if end == 0 {
            return None;
        }
        let mut wi = (end - 1) >> 6;
        let mut cur = self.words[wi] & (u64::MAX >> (63 - ((end - 1) & 63)));
        loop {
            if cur != 0 {
                return Some((wi << 6) + 63 - cur.leading_zeros() as usize);
            }
            if wi == 0 {
                return None;
            }
            wi -= 1;
            cur = self.words[wi];
        }
    }

    fn clear_tail(&mut self) {
        let r = self.len & 63;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fill_and_count() {
        let mut b = BitBuf::zeros(200);
        b.fill_range(3, 130);
        assert_eq!(b.count_ones(), 127);
        assert!(!b.get(2) && b.get(3) && b.get(129) && !b.get(130));
        assert_eq!(b.count_range(60, 70), 10);
        b.fill_range(190, 500);
        assert_eq!(b.count_range(150, 200), 10);
    }

    #[test]
    fn prev_and_next() {
        let mut b = BitBuf::zeros(300);
        for i in [5, 64, 250] {
            b.set(i);
        }
        assert_eq!(b.next_one(6), Some(64));
        assert_eq!(b.prev_one(250), Some(64));
        assert_eq!(b.prev_one(251), Some(250));
        assert_eq!(b.prev_one(5), None);
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), vec![5, 64, 250]);
    }

    #[test]
    fn negate_respects_length() {
        let mut b = BitBuf::zeros(70);
        b.negate();
        assert_eq!(b.count_ones(), 70);
    }

    proptest! {
        #[test]
        fn shifted_slice_matches_naive(bits in proptest::collection::vec(any::<bool>(), 0..300),
                                       offset in -100i64..300, len in 0usize..300) {
            let mut b = BitBuf::zeros(bits.len());
            for (i, &v) in bits.iter().enumerate() { b.assign(i, v); }
            let s = b.slice_shifted(offset, len);
            for i in 0..len {
                let src = i as i64 + offset;
                let want = src >= 0 && (src as usize) < bits.len() && bits[src as usize];
                prop_assert_eq!(s.get(i), want);
            }
        }

        #[test]
        fn count_range_matches_naive(bits in proptest::collection::vec(any::<bool>(), 1..300),
                                     a in 0usize..300, b in 0usize..300) {
            let mut buf = BitBuf::zeros(bits.len());
            for (i, &v) in bits.iter().enumerate() { buf.assign(i, v); }
            let (lo, hi) = (a.min(b), a.max(b));
            let want = (lo..hi.min(bits.len())).filter(|&i| bits[i]).count() as u64;
            prop_assert_eq!(buf.count_range(lo, hi), want);
        }
    }
}
