use std::path::Path;

use crate::bits::BitBuf;
use crate::error::{Error, Result};

use super::{Node, SetSpec};

/// Bits per prefix-count block.
pub const BLOCK_BITS: usize = 4096;

const MAGIC: &str = "SUMSETLAB-TRUNC v1 N=";

/// Cap on the bytes a single materialization may allocate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryBudget {
    pub max_bytes: u64,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget { max_bytes: 2 << 30 }
    }
}

impl MemoryBudget {
    pub fn unlimited() -> Self {
        MemoryBudget { max_bytes: u64::MAX }
    }

    /// Parses a byte count with an optional `K`, `M` or `G` suffix (powers of 1024).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (digits, mult) = match s.chars().last().map(|c| c.to_ascii_uppercase()) {
            Some('K') => (&s[..s.len() - 1], 1u64 << 10),
            Some('M') => (&s[..s.len() - 1], 1 << 20),
            Some('G') => (&s[..s.len() - 1], 1 << 30),
            _ => (s, 1),
        };
        let n: u64 = digits
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad memory size {s:?}")))?;
        n.checked_mul(mult)
            .map(|max_bytes| MemoryBudget { max_bytes })
            .ok_or_else(|| Error::Parse(format!("memory size {s:?} overflows")))
    }

    fn check(&self, what: &str, requested: u64) -> Result<()> {
        if requested > self.max_bytes {
            return Err(Error::Resource {
                what: what.to_string(),
                requested,
                limit: self.max_bytes,
            });
        }
        Ok(())
    }
}

/// Membership of a set over `[1, N]` with block prefix counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    n: u64,
    /// Bit `x − 1` holds membership of `x`.
    bits: BitBuf,
    /// `prefix[b]` = members in `[1, b·BLOCK_BITS]`.
    prefix: Vec<u64>,
}

impl Truncation {
    /// Wraps a buffer whose bit `i` is membership of `i + 1`.
    pub fn from_bits(bits: BitBuf) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::precondition("truncation length N must be at least 1"));
        }
        let n = bits.len() as u64;
        let blocks = bits.len() / BLOCK_BITS;
        let mut prefix = Vec::with_capacity(blocks + 1);
        prefix.push(0);
        let wpb = BLOCK_BITS / 64;
        let mut acc = 0u64;
        for b in 0..blocks {
            acc += bits.words()[b * wpb..(b + 1) * wpb]
                .iter()
                .map(|w| w.count_ones() as u64)
                .sum::<u64>();
            prefix.push(acc);
        }
        Ok(Truncation { n, bits, prefix })
    }

    pub fn from_members(n: u64, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut bits = BitBuf::zeros(n as usize);
        for x in members {
            if x == 0 || x > n {
                return Err(Error::Range { value: x, limit: n });
            }
            bits.set(x as usize - 1);
        }
        Self::from_bits(bits)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn bits(&self) -> &BitBuf {
        &self.bits
    }

    /// Membership of `x`. `x = 0` is never a member.
    ///
    /// # Panics
    /// If `x > N`; use [`Truncation::try_contains`] when the range is not known.
    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        assert!(x <= self.n, "{x} lies beyond truncation length {}", self.n);
        x != 0 && self.bits.get(x as usize - 1)
    }

    pub fn try_contains(&self, x: u64) -> Result<bool> {
        if x > self.n {
            return Err(Error::Range {
                value: x,
                limit: self.n,
            });
        }
        Ok(self.contains(x))
    }

    /// `|A ∩ [1, e]|` for `e ≤ N`.
    pub fn count_upto(&self, e: u64) -> u64 {
        let e = e.min(self.n) as usize;
        let b = e / BLOCK_BITS;
        self.prefix[b] + self.bits.count_range(b * BLOCK_BITS, e)
    }

    /// `|A ∩ [lo, hi]|`, inclusive on both ends.
    pub fn count_between(&self, lo: u64, hi: u64) -> u64 {
        if lo > hi {
            return 0;
        }
        self.count_upto(hi) - self.count_upto(lo.saturating_sub(1))
    }

    pub fn count(&self) -> u64 {
        self.count_upto(self.n)
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter_ones().map(|i| i as u64 + 1)
    }

    /// Recomputes every prefix count from the bits.
    pub fn prefix_counts_consistent(&self) -> bool {
        (0..self.prefix.len()).all(|b| self.prefix[b] == self.bits.count_range(0, b * BLOCK_BITS))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("{MAGIC}{}\n", self.n).into_bytes();
        let nbytes = self.n.div_ceil(8) as usize;
        out.reserve(nbytes);
        for (i, w) in self.bits.words().iter().enumerate() {
            let le = w.to_le_bytes();
            let take = (nbytes - i * 8).min(8);
            out.extend_from_slice(&le[..take]);
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let fmt_err = |offset: usize, message: String| Error::Format {
            offset: offset as u64,
            message,
        };
        if !data.starts_with(MAGIC.as_bytes()) {
            let bad = data
                .iter()
                .zip(MAGIC.as_bytes())
                .position(|(a, b)| a != b)
                .unwrap_or(data.len());
            return Err(fmt_err(bad, "missing SUMSETLAB-TRUNC v1 header".into()));
        }
        let digits_at = MAGIC.len();
        let nl = data[digits_at..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| p + digits_at)
            .ok_or_else(|| fmt_err(data.len(), "header line is not terminated".into()))?;
        let digits = &data[digits_at..nl];
        if digits.is_empty() || !digits.iter().all(u8::is_ascii_digit) || digits.len() > 19 {
            return Err(fmt_err(digits_at, "N must be a decimal integer".into()));
        }
        let n: u64 = std::str::from_utf8(digits)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fmt_err(digits_at, "N must be a decimal integer".into()))?;
        if n == 0 {
            return Err(fmt_err(digits_at, "N must be at least 1".into()));
        }
        let start = nl + 1;
        let payload = &data[start..];
        let expected = n.div_ceil(8);
        if (payload.len() as u64) < expected {
            return Err(fmt_err(
                data.len(),
                format!(
                    "payload truncated: N={n} needs {expected} bytes, found {}",
                    payload.len()
                ),
            ));
        }
        if payload.len() as u64 > expected {
            return Err(fmt_err(
                start + expected as usize,
                format!("{} trailing bytes after payload", payload.len() as u64 - expected),
            ));
        }
        let tail = n % 8;
        if tail != 0 && payload[expected as usize - 1] >> tail != 0 {
            return Err(fmt_err(
                start + expected as usize - 1,
                "padding bits beyond N are set".into(),
            ));
        }
        let mut words = vec![0u64; (n as usize).div_ceil(64)];
        for (i, chunk) in payload.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words[i] = u64::from_le_bytes(buf);
        }
        Self::from_bits(BitBuf::from_words(words, n as usize))
    }
}

/// Materializes `spec` over `[1, n]` under the default memory budget.
pub fn truncate(spec: &SetSpec, n: u64) -> Result<Truncation> {
    truncate_with_budget(spec, n, &MemoryBudget::default())
}

pub fn truncate_with_budget(spec: &SetSpec, n: u64, budget: &MemoryBudget) -> Result<Truncation> {
    if n == 0 {
        return Err(Error::precondition("truncation length N must be at least 1"));
    }
    let bytes = footprint(spec, n as u128).saturating_add(n as u128 / BLOCK_BITS as u128 * 8);
    budget.check(
        &format!("truncation of N={n}"),
        u64::try_from(bytes).unwrap_or(u64::MAX),
    )?;
    if n > usize::MAX as u64 {
        return Err(Error::Resource {
            what: format!("truncation of N={n}"),
            requested: u64::MAX,
            limit: budget.max_bytes,
        });
    }
    Truncation::from_bits(eval(spec, n as usize))
}

/// Bytes of every intermediate buffer built while evaluating `spec` to length `n`.
fn footprint(spec: &SetSpec, n: u128) -> u128 {
    let own = n.div_ceil(64) * 8;
    let children = match spec.node() {
        Node::Union(c) | Node::Intersection(c) => c.iter().map(|s| footprint(s, n)).sum(),
        Node::Complement(c) => footprint(c, n),
        Node::ShiftBy { child, offset } => {
            let len = if *offset >= 0 {
                n.saturating_sub(*offset as u128)
            } else {
                n + offset.unsigned_abs() as u128
            };
            footprint(child, len)
        }
        Node::Quotient {
            child,
            modulus,
            residue,
        } => footprint(child, child_len_quotient(n, *modulus, *residue)),
        Node::Explicit(_) | Node::Residue { .. } | Node::Family(_) => 0,
    };
    own.saturating_add(children)
}

fn child_len_quotient(n: u128, d: u64, j: u64) -> u128 {
    if n == 0 {
        0
    } else {
        n * d as u128 + j as u128
    }
}

/// Bit `i` of the result is membership of `i + 1`.
fn eval(spec: &SetSpec, n: usize) -> BitBuf {
    match spec.node() {
        Node::Explicit(v) => {
            let mut b = BitBuf::zeros(n);
            for &x in v.iter().take_while(|&&x| x as usize <= n) {
                b.set(x as usize - 1);
            }
            b
        }
        Node::Residue { modulus, residues } => {
            let d = *modulus as usize;
            if residues.len() == d {
                return BitBuf::ones(n);
            }
            let mut b = BitBuf::zeros(n);
            for &r in residues {
                let first = if r == 0 { d } else { r as usize };
                let mut x = first;
                while x <= n {
                    b.set(x - 1);
                    x += d;
                }
            }
            b
        }
        Node::Family(f) => {
            let mut b = BitBuf::zeros(n);
            for (lo, hi) in f.intervals_upto(n as u64) {
                b.fill_range(lo as usize - 1, hi as usize - 1);
            }
            b
        }
        Node::Union(c) => {
            let mut acc = eval(&c[0], n);
            for s in &c[1..] {
                acc.or_assign(&eval(s, n));
            }
            acc
        }
        Node::Intersection(c) => {
            let mut acc = eval(&c[0], n);
            for s in &c[1..] {
                acc.and_assign(&eval(s, n));
            }
            acc
        }
        Node::Complement(c) => {
            let mut b = eval(c, n);
            b.negate();
            b
        }
        Node::ShiftBy { child, offset } => {
            let len = if *offset >= 0 {
                n.saturating_sub(*offset as usize)
            } else {
                n + offset.unsigned_abs() as usize
            };
            eval(child, len).slice_shifted(-*offset, n)
        }
        Node::Quotient {
            child,
            modulus,
            residue,
        } => {
            let (d, j) = (*modulus as usize, *residue as usize);
            let inner = eval(child, child_len_quotient(n as u128, *modulus, *residue) as usize);
            if d == 1 {
                return inner.slice_shifted(j as i64, n);
            }
            let mut b = BitBuf::zeros(n);
            for i in 0..n {
                if inner.get(d * (i + 1) + j - 1) {
                    b.set(i);
                }
            }
            b
        }
    }
}

pub fn save_truncation(trunc: &Truncation, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, trunc.to_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_truncation(path: impl AsRef<Path>) -> Result<Truncation> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Truncation::from_bytes(&data)
}
