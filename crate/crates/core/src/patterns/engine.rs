//! Bitset constraint propagation shared by greedy and branch-and-bound search.
//!
//! Candidates live in a buffer indexed by the candidate value itself (bit 0 is
//! unused). For a chosen `c`, the admissible partners `y` are read off
//! decimated copies of `A`: with `D_r = {y : ℓy + r ∈ A}`,
//! `{y : mc + ℓy + t ∈ A}` is `D_r` shifted by `q` where `mc + t = ℓq + r`.
//! The stride-`m` copies `E_r = {y : my + r ∈ A}` serve the reversed pair.

use crate::bits::BitBuf;
use crate::setkit::Truncation;

use super::PatternSpec;

pub(crate) struct Masks {
    spec: PatternSpec,
    bound: usize,
    /// `first[r]` bit `y` ⇔ `ℓy + r ∈ A`.
    first: Vec<BitBuf>,
    /// `second[r]` bit `y` ⇔ `my + r ∈ A`.
    second: Vec<BitBuf>,
}

fn decimate(a: &Truncation, stride: u64) -> Vec<BitBuf> {
    let n = a.n();
    let len = (n / stride + 1) as usize;
    if stride == 1 {
        // bit y ⇔ y ∈ A, i.e. truncation bit y − 1
        return vec![a.bits().slice_shifted(-1, len)];
    }
    (0..stride)
        .map(|r| {
            let mut b = BitBuf::zeros(len);
            for y in 0..len as u64 {
                let x = stride * y + r;
                if x >= 1 && x <= n && a.contains(x) {
                    b.set(y as usize);
                }
            }
            b
        })
        .collect()
}

/// Which neighbours of a chosen element get filtered.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Above,
    Below,
}

impl Masks {
    /// `bound` must satisfy `(m+ℓ)·bound + t ≤ A.n()`.
    pub(crate) fn new(a: &Truncation, spec: &PatternSpec, bound: u64, dir: Direction) -> Masks {
        let need_second = spec.relation.has_reverse() || dir == Direction::Below;
        let need_first = spec.relation.has_reverse() || dir == Direction::Above;
        Masks {
            spec: *spec,
            bound: bound as usize,
            first: if need_first { decimate(a, spec.l) } else { Vec::new() },
            second: if need_second { decimate(a, spec.m) } else { Vec::new() },
        }
    }

    pub(crate) fn bound(&self) -> usize {
        self.bound
    }

    /// Candidates in `1..=bound` satisfying the single-element constraints.
    pub(crate) fn unary(&self, a: &Truncation) -> BitBuf {
        let mut c = BitBuf::zeros(self.bound + 1);
        let s = &self.spec;
        for x in 1..=self.bound as u64 {
            let diag = !s.relation.has_diagonal() || a.contains((s.m + s.l) * x + s.shift);
            let dil = !s.dilate || a.contains(s.l * x + s.shift);
            if diag && dil {
                c.set(x as usize);
            }
        }
        c
    }

    /// `{y : mc + ℓy + t ∈ A}` restricted to word `w`.
    #[inline]
    fn as_first(&self, c: u64, w: usize) -> u64 {
        let s = &self.spec;
        let off = s.m * c + s.shift;
        self.first[(off % s.l) as usize].window(64 * w as i64 + (off / s.l) as i64)
    }

    /// `{y : my + ℓc + t ∈ A}` restricted to word `w`.
    #[inline]
    fn as_second(&self, c: u64, w: usize) -> u64 {
        let s = &self.spec;
        let off = s.l * c + s.shift;
        self.second[(off % s.m) as usize].window(64 * w as i64 + (off / s.m) as i64)
    }

    /// Partners of `c` admissible on the given side, word `w`.
    #[inline]
    fn word(&self, c: u64, w: usize, dir: Direction) -> u64 {
        let reverse = self.spec.relation.has_reverse();
        match dir {
            Direction::Above if reverse => self.as_first(c, w) & self.as_second(c, w),
            Direction::Above => self.as_first(c, w),
            Direction::Below if reverse => self.as_first(c, w) & self.as_second(c, w),
            Direction::Below => self.as_second(c, w),
        }
    }

    /// Drops candidates above `c` that are incompatible with `c`. Cleared
    /// positions are appended to `undo` when given.
    pub(crate) fn restrict_above(&self, cand: &mut BitBuf, c: usize, mut undo: Option<&mut Vec<u32>>) {
        let lo = c + 1;
        if lo > self.bound {
            return;
        }
        let (lw, hw) = (lo >> 6, self.bound >> 6);
        for w in lw..=hw {
            let old = cand.words()[w];
            if old == 0 {
                continue;
            }
            let mut keep = self.word(c as u64, w, Direction::Above);
            if w == lw {
                keep |= (1u64 << (lo & 63)) - 1;
            }
            let new = old & keep;
            if new != old {
                cand.set_word(w, new);
                if let Some(log) = undo.as_deref_mut() {
                    let mut gone = old & !new;
                    while gone != 0 {
                        log.push((w * 64 + gone.trailing_zeros() as usize) as u32);
                        gone &= gone - 1;
                    }
                }
            }
        }
    }

    /// Drops candidates below `c` that are incompatible with `c`.
    pub(crate) fn restrict_below(&self, cand: &mut BitBuf, c: usize) {
        if c <= 1 {
            return;
        }
        let hi = c - 1;
        for w in 0..=(hi >> 6) {
            let old = cand.words()[w];
            if old == 0 {
                continue;
            }
            let mut keep = self.word(c as u64, w, Direction::Below);
            if w == hi >> 6 && (hi & 63) != 63 {
                keep |= u64::MAX << ((hi & 63) + 1);
            }
            cand.set_word(w, old & keep);
        }
    }
}
