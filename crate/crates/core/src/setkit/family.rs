use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// `[β^{2n}, (β − 1/n)·β^{2n})`
    Lower,
    /// `[(β + 1/n)·β^{2n}, β^{2(n+1)})`
    Upper,
}

/// A union of geometrically spaced intervals with exact rational base `β > 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct IntervalFamily {
    base: Rational,
    kind: FamilyKind,
    index_start: u64,
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    #[serde(with = "rational::serde_str")]
    base: Rational,
    kind: FamilyKind,
    #[serde(default = "one")]
    index_start: u64,
}

fn one() -> u64 {
    1
}

impl TryFrom<FamilyRepr> for IntervalFamily {
    type Error = Error;
    fn try_from(r: FamilyRepr) -> Result<Self> {
        IntervalFamily::new(r.base, r.kind)?.with_index_start(r.index_start)
    }
}

impl From<IntervalFamily> for FamilyRepr {
    fn from(f: IntervalFamily) -> Self {
        FamilyRepr {
            base: f.base,
            kind: f.kind,
            index_start: f.index_start,
        }
    }
}

/// One interval's integer content `lo..hi` (half-open), possibly empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerInterval {
    pub index: u64,
    pub lo: BigInt,
    pub hi: BigInt,
}

impl IntegerInterval {
    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }
}

impl IntervalFamily {
    pub fn new(base: Rational, kind: FamilyKind) -> Result<Self> {
        if base <= Rational::one() {
            return Err(Error::invalid(format!(
                "family base must exceed 1, got {}",
                rational::format_fraction(&base)
            )));
        }
        Ok(IntervalFamily {
            base,
            kind,
            index_start: 1,
        })
    }

    pub fn lower(base: Rational) -> Result<Self> {
        Self::new(base, FamilyKind::Lower)
    }

    pub fn upper(base: Rational) -> Result<Self> {
        Self::new(base, FamilyKind::Upper)
    }

    pub fn with_index_start(mut self, index_start: u64) -> Result<Self> {
        if index_start == 0 {
            return Err(Error::invalid("family index_start must be at least 1"));
        }
        self.index_start = index_start;
        Ok(self)
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn index_start(&self) -> u64 {
        self.index_start
    }

    /// `β^{2n}`.
    pub fn anchor(&self, n: u64) -> Rational {
        num_traits::pow(self.base.clone(), 2 * n as usize)
    }

    /// Exact rational endpoints `[left, right)` of interval `n`.
    pub fn endpoints(&self, n: u64) -> (Rational, Rational) {
        let a = self.anchor(n);
        let inv = Rational::new(BigInt::one(), BigInt::from(n));
        match self.kind {
            FamilyKind::Lower => (a.clone(), (&self.base - inv) * a),
            FamilyKind::Upper => ((&self.base + inv) * &a, a * &self.base * &self.base),
        }
    }

    /// Integer content `⌈left⌉ .. ⌈right⌉` of interval `n`.
    pub fn integer_interval(&self, n: u64) -> IntegerInterval {
        let (l, r) = self.endpoints(n);
        IntegerInterval {
            index: n,
            lo: rational::ceil_int(&l),
            hi: rational::ceil_int(&r),
        }
    }

    /// Whether interval `n` contains no real number at all. For LOWER this is
    /// exactly `β − 1/n ≤ 1`.
    pub fn interval_is_degenerate(&self, n: u64) -> bool {
        let (l, r) = self.endpoints(n);
        l >= r
    }

    /// Intervals with `β^{2n} ≤ limit`, in increasing order, clipped to
    /// `[1, limit]` and skipping those with no integer inside the clip.
    pub fn intervals_upto(&self, limit: u64) -> Vec<(u64, u64)> {
        let lim = rational::from_u64(limit);
        let b2 = &self.base * &self.base;
        let mut anchor = self.anchor(self.index_start);
        let mut out = Vec::new();
        let mut n = self.index_start;
        while anchor <= lim {
            let iv = self.integer_interval(n);
            let lo = rational::saturating_u64(&iv.lo).max(1);
            let hi = rational::saturating_u64(&iv.hi).min(limit.saturating_add(1));
            if lo < hi {
                out.push((lo, hi));
            }
            anchor *= &b2;
            n += 1;
        }
        out
    }

    /// `|family ∩ [1, limit]|`, counted from interval endpoints.
    pub fn count_upto(&self, limit: u64) -> u64 {
        self.intervals_upto(limit).iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// Exact membership by cross-multiplied integer comparisons.
    pub fn contains(&self, x: &BigInt) -> bool {
        if x <= &BigInt::zero() {
            return false;
        }
        let p = self.base.numer();
        let s = self.base.denom();
        let (p2, s2) = (p * p, s * s);
        let mut pp = num_traits::pow(p.clone(), 2 * self.index_start as usize);
        let mut ss = num_traits::pow(s.clone(), 2 * self.index_start as usize);
        // β^{2n} ≤ x  ⇔  p^{2n} ≤ x·s^{2n}
        if pp > x * &ss {
            return false;
        }
        let mut n = self.index_start;
        loop {
            let (np, ns) = (&pp * &p2, &ss * &s2);
            if np > x * &ns {
                break;
            }
            pp = np;
            ss = ns;
            n += 1;
        }
        let nb = BigInt::from(n);
        let lhs = x * s * &nb * &ss;
        match self.kind {
            // x < (β − 1/n)β^{2n}  ⇔  x·s·n·s^{2n} < (p·n − s)·p^{2n}
            FamilyKind::Lower => lhs < (p * &nb - s) * &pp,
            // x ≥ (β + 1/n)β^{2n}; x < β^{2(n+1)} holds by maximality of n
            FamilyKind::Upper => lhs >= (p * &nb + s) * &pp,
        }
    }

    /// `β/(β+1)`, the density along the family's own window sequence.
    pub fn analytic_density(&self) -> Rational {
        &self.base / (&self.base + Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn lower2() -> IntervalFamily {
        IntervalFamily::lower(int(2)).unwrap()
    }

    #[test]
    fn rejects_bad_base() {
        assert!(IntervalFamily::lower(int(1)).is_err());
        assert!(IntervalFamily::lower(rat(1, 2)).is_err());
        assert!(lower2().with_index_start(0).is_err());
    }

    #[test]
    fn small_intervals_base_two() {
        // n=1: [4, 4) empty; n=2: [16, 24); n=3: [64, 320/3)
        assert!(lower2().integer_interval(1).is_empty());
        let iv = lower2().integer_interval(2);
        assert_eq!((iv.lo, iv.hi), (BigInt::from(16), BigInt::from(24)));
        let iv = lower2().integer_interval(3);
        assert_eq!((iv.lo, iv.hi), (BigInt::from(64), BigInt::from(107)));
        assert_eq!(lower2().intervals_upto(30), vec![(16, 24)]);
    }

    #[test]
    fn membership_examples() {
        let f = lower2();
        assert!(f.contains(&BigInt::from(20)));
        assert!(!f.contains(&BigInt::from(4)));
        assert!(!f.contains(&BigInt::from(24)));
        assert!(f.contains(&BigInt::from(106)));
        assert!(!f.contains(&BigInt::from(107)));
        let up = IntervalFamily::upper(int(2)).unwrap();
        // n=1: [12, 16); n=2: [40, 64)
        assert!(up.contains(&BigInt::from(12)) && up.contains(&BigInt::from(15)));
        assert!(!up.contains(&BigInt::from(16)) && !up.contains(&BigInt::from(39)));
        assert!(up.contains(&BigInt::from(40)) && up.contains(&BigInt::from(63)));
    }

    #[test]
    fn degenerate_iff_margin_at_most_one() {
        for (b, n) in [
            (rat(3, 2), 1u64),
            (rat(3, 2), 2),
            (rat(3, 2), 3),
            (int(2), 1),
            (int(2), 2),
        ] {
            let f = IntervalFamily::lower(b.clone()).unwrap();
            let margin_small = &b - Rational::new(BigInt::one(), BigInt::from(n)) <= Rational::one();
            assert_eq!(f.interval_is_degenerate(n), margin_small);
        }
    }

    #[test]
    fn count_matches_membership() {
        for base in [rat(3, 2), int(2), int(3), rat(5, 2)] {
            for kind in [FamilyKind::Lower, FamilyKind::Upper] {
                let f = IntervalFamily::new(base.clone(), kind).unwrap();
                let direct = (1..=5000u64).filter(|&x| f.contains(&BigInt::from(x))).count() as u64;
                assert_eq!(f.count_upto(5000), direct);
            }
        }
    }

    #[test]
    fn analytic_values() {
        assert_eq!(lower2().analytic_density(), rat(2, 3));
        assert_eq!(IntervalFamily::lower(int(3)).unwrap().analytic_density(), rat(3, 4));
        assert_eq!(IntervalFamily::lower(rat(3, 2)).unwrap().analytic_density(), rat(3, 5));
    }
}
