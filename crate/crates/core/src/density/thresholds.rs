use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Which density a threshold constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityNotion {
    /// Upper Banach density, positivity only.
    BanachPositive,
    Banach,
    Upper,
    Lower,
    /// `d̲(A) + d̄(A)`.
    LowerPlusUpper,
}

/// Named density thresholds for sumset patterns, each a closed form in `(ℓ, m)`.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThresholdId {
    T1_2,
    T1_4_1a,
    T1_4_1b,
    T1_4_2a,
    T1_4_2b,
    T1_5,
    T1_6,
    T1_7,
    T1_8,
    P2_5,
    T6_4_1,
    T6_4_2,
    C6_5_1,
    C6_5_2,
    P7_1_A,
    P7_1_Aprime,
    P7_5,
    P7_5_Aprime,
    MBMB_i,
    MBMB_ii,
    MBMB_iii,
    MBMB_iv,
}

impl ThresholdId {
    pub const ALL: [ThresholdId; 22] = [
        ThresholdId::T1_2,
        ThresholdId::T1_4_1a,
        ThresholdId::T1_4_1b,
        ThresholdId::T1_4_2a,
        ThresholdId::T1_4_2b,
        ThresholdId::T1_5,
        ThresholdId::T1_6,
        ThresholdId::T1_7,
        ThresholdId::T1_8,
        ThresholdId::P2_5,
        ThresholdId::T6_4_1,
        ThresholdId::T6_4_2,
        ThresholdId::C6_5_1,
        ThresholdId::C6_5_2,
        ThresholdId::P7_1_A,
        ThresholdId::P7_1_Aprime,
        ThresholdId::P7_5,
        ThresholdId::P7_5_Aprime,
        ThresholdId::MBMB_i,
        ThresholdId::MBMB_ii,
        ThresholdId::MBMB_iii,
        ThresholdId::MBMB_iv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdId::T1_2 => "T1_2",
            ThresholdId::T1_4_1a => "T1_4_1a",
            ThresholdId::T1_4_1b => "T1_4_1b",
            ThresholdId::T1_4_2a => "T1_4_2a",
            ThresholdId::T1_4_2b => "T1_4_2b",
            ThresholdId::T1_5 => "T1_5",
            ThresholdId::T1_6 => "T1_6",
            ThresholdId::T1_7 => "T1_7",
            ThresholdId::T1_8 => "T1_8",
            ThresholdId::P2_5 => "P2_5",
            ThresholdId::T6_4_1 => "T6_4_1",
            ThresholdId::T6_4_2 => "T6_4_2",
            ThresholdId::C6_5_1 => "C6_5_1",
            ThresholdId::C6_5_2 => "C6_5_2",
            ThresholdId::P7_1_A => "P7_1_A",
            ThresholdId::P7_1_Aprime => "P7_1_Aprime",
            ThresholdId::P7_5 => "P7_5",
            ThresholdId::P7_5_Aprime => "P7_5_Aprime",
            ThresholdId::MBMB_i => "MBMB_i",
            ThresholdId::MBMB_ii => "MBMB_ii",
            ThresholdId::MBMB_iii => "MBMB_iii",
            ThresholdId::MBMB_iv => "MBMB_iv",
        }
    }

    pub fn notion(self) -> DensityNotion {
        use ThresholdId::*;
        match self {
            T1_2 | T1_5 => DensityNotion::BanachPositive,
            P2_5 => DensityNotion::Banach,
            T1_4_1a | T1_4_2a | T1_7 | T1_8 | P7_1_A | P7_1_Aprime | MBMB_i | MBMB_ii => DensityNotion::Upper,
            T1_4_1b | T1_4_2b | T1_6 | C6_5_1 | C6_5_2 | P7_5 | P7_5_Aprime | MBMB_iii | MBMB_iv => {
                DensityNotion::Lower
            }
            T6_4_1 | T6_4_2 => DensityNotion::LowerPlusUpper,
        }
    }

    /// Pattern the threshold concerns, for table rendering.
    pub fn pattern(self) -> &'static str {
        use ThresholdId::*;
        match self {
            T1_2 => "B+B+t",
            T1_5 => "mb1+lb2 (b1<b2) + t",
            T1_4_1a | T1_4_1b => "B+B",
            T1_4_2a | T1_4_2b => "B+B+t",
            T1_6 | T1_7 | T6_4_1 | C6_5_1 | P7_5 => "mb1+lb2 (b1<=b2) + t",
            T1_8 | T6_4_2 | C6_5_2 | P7_5_Aprime => "mb1+lb2 (b1<=b2)",
            P2_5 => "mb1+lb2 (b1<b2)",
            P7_1_A => "mb1+lb2 (b1!=b2) + t",
            P7_1_Aprime => "mb1+lb2 (b1!=b2)",
            MBMB_i | MBMB_iii => "mB+mB+t",
            MBMB_ii | MBMB_iv => "mB+mB",
        }
    }
}

impl fmt::Display for ThresholdId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ThresholdId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown threshold id {s:?}")))
    }
}

/// Exact value of the named threshold for `(ℓ, m)`, with `k = m/ℓ`.
pub fn threshold(id: ThresholdId, l: u64, m: u64) -> Result<Rational> {
    use ThresholdId::*;
    if l == 0 || m == 0 {
        return Err(Error::domain("l and m must be at least 1"));
    }
    let (li, mi) = (l as i64, m as i64);
    let one = Rational::one();
    let k = rational::rat(mi, li);
    let s = rational::int(li + mi);
    let need_l_gt_m = || {
        if l > m {
            Ok(())
        } else {
            Err(Error::domain(format!("{id} requires l > m, got l={l}, m={m}")))
        }
    };
    let need_eq = || {
        if l == m {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{id} concerns mB+mB and requires l = m, got l={l}, m={m}"
            )))
        }
    };
    let v = match id {
        T1_2 | T1_5 => Rational::from_integer(0.into()),
        T1_4_1a => rational::rat(5, 6),
        T1_4_1b => rational::rat(3, 4),
        T1_4_2a => rational::rat(2, 3),
        T1_4_2b | T1_6 | C6_5_1 => rational::rat(1, 2),
        T1_7 => (&k + &one) / (&k + rational::int(2)),
        T1_8 => &one - &one / (rational::from_u64(l) * (&k + &one) * (&k + rational::int(2))),
        P2_5 => &one - &one / &s,
        T6_4_1 => one,
        T6_4_2 => rational::int(2) - &one / &s,
        C6_5_2 => &one - &one / (rational::int(2) * &s),
        P7_1_A => {
            need_l_gt_m()?;
            rational::rat(li, li + mi)
        }
        P7_1_Aprime => {
            need_l_gt_m()?;
            &one - rational::int(mi) / (&s * &s)
        }
        P7_5 => {
            need_l_gt_m()?;
            rational::rat(1, 2)
        }
        P7_5_Aprime => {
            need_l_gt_m()?;
            &one - &one / (rational::int(2) * &s)
        }
        MBMB_i => {
            need_eq()?;
            rational::rat(2, 3)
        }
        MBMB_ii => {
            need_eq()?;
            &one - rational::rat(1, 6 * mi)
        }
        MBMB_iii => {
            need_eq()?;
            rational::rat(1, 2)
        }
        MBMB_iv => {
            need_eq()?;
            &one - rational::rat(1, 4 * mi)
        }
    };
    Ok(v)
}

/// Comparison of the distinct-pair family bounds against the weak-pair
/// optimal thresholds, for `ℓ > m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenComparison {
    pub l: u64,
    pub m: u64,
    pub k: Rational,
    /// `ℓ/(ℓ+m)`
    pub distinct_shifted: Rational,
    /// `(k+1)/(k+2)`
    pub weak_shifted: Rational,
    /// Order of `distinct_shifted` relative to `weak_shifted`.
    pub shifted_order: Ordering,
    /// `1 − m/(ℓ+m)²`
    pub distinct_unshifted: Rational,
    /// `1 − 1/(ℓ(k+1)(k+2))`
    pub weak_unshifted: Rational,
    pub unshifted_order: Ordering,
    /// Sign of `k(k+1) − 1`.
    pub golden_sign: Ordering,
}

impl GoldenComparison {
    /// Both orders are the reverse of the sign of `k(k+1) − 1`.
    pub fn consistent(&self) -> bool {
        self.shifted_order == self.golden_sign.reverse() && self.unshifted_order == self.golden_sign.reverse()
    }
}

pub fn golden_ratio_comparison(l: u64, m: u64) -> Result<GoldenComparison> {
    if m == 0 || l <= m {
        return Err(Error::domain(format!(
            "golden comparison requires l > m >= 1, got l={l}, m={m}"
        )));
    }
    let k = rational::rat(m as i64, l as i64);
    let distinct_shifted = threshold(ThresholdId::P7_1_A, l, m)?;
    let weak_shifted = threshold(ThresholdId::T1_7, l, m)?;
    let distinct_unshifted = threshold(ThresholdId::P7_1_Aprime, l, m)?;
    let weak_unshifted = threshold(ThresholdId::T1_8, l, m)?;
    let golden_sign = (&k * (&k + Rational::one())).cmp(&Rational::one());
    Ok(GoldenComparison {
        l,
        m,
        shifted_order: distinct_shifted.cmp(&weak_shifted),
        unshifted_order: distinct_unshifted.cmp(&weak_unshifted),
        k,
        distinct_shifted,
        weak_shifted,
        distinct_unshifted,
        weak_unshifted,
        golden_sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn b_plus_b_constants() {
        assert_eq!(threshold(ThresholdId::T1_7, 1, 1).unwrap(), rat(2, 3));
        assert_eq!(threshold(ThresholdId::T1_8, 1, 1).unwrap(), rat(5, 6));
        assert_eq!(threshold(ThresholdId::C6_5_1, 1, 1).unwrap(), rat(1, 2));
        assert_eq!(threshold(ThresholdId::C6_5_2, 1, 1).unwrap(), rat(3, 4));
        assert_eq!(threshold(ThresholdId::T1_7, 1, 2).unwrap(), rat(3, 4));
    }

    #[test]
    fn domain_checks() {
        assert!(threshold(ThresholdId::P7_1_A, 1, 1).is_err());
        assert!(threshold(ThresholdId::P7_1_Aprime, 1, 2).is_err());
        assert!(threshold(ThresholdId::MBMB_ii, 2, 1).is_err());
        assert!(threshold(ThresholdId::T1_7, 0, 1).is_err());
        assert!(golden_ratio_comparison(2, 2).is_err());
    }

    #[test]
    fn closed_forms_against_integer_expressions() {
        for l in 1..8u64 {
            for m in 1..8u64 {
                let (li, mi) = (l as i64, m as i64);
                assert_eq!(threshold(ThresholdId::T1_7, l, m).unwrap(), rat(mi + li, mi + 2 * li));
                // ℓ(k+1)(k+2) = (ℓ+m)(m+2ℓ)/ℓ
                let d = (li + mi) * (mi + 2 * li);
                assert_eq!(threshold(ThresholdId::T1_8, l, m).unwrap(), rat(d - li, d));
                assert_eq!(
                    threshold(ThresholdId::T6_4_2, l, m).unwrap(),
                    rat(2 * (li + mi) - 1, li + mi)
                );
            }
        }
        assert_eq!(threshold(ThresholdId::MBMB_ii, 3, 3).unwrap(), rat(17, 18));
        assert_eq!(threshold(ThresholdId::MBMB_iv, 3, 3).unwrap(), rat(11, 12));
    }

    #[test]
    fn golden_examples() {
        let g = golden_ratio_comparison(2, 1).unwrap();
        assert_eq!(
            (g.distinct_shifted.clone(), g.weak_shifted.clone()),
            (rat(2, 3), rat(3, 5))
        );
        assert_eq!(g.shifted_order, Ordering::Greater);
        assert_eq!(g.golden_sign, Ordering::Less);
        let g = golden_ratio_comparison(5, 4).unwrap();
        assert_eq!(
            (g.distinct_shifted.clone(), g.weak_shifted.clone()),
            (rat(5, 9), rat(9, 14))
        );
        assert_eq!(g.shifted_order, Ordering::Less);
        assert!(g.consistent());
    }

    #[test]
    fn ids_round_trip_through_names() {
        for id in ThresholdId::ALL {
            assert_eq!(id.name().parse::<ThresholdId>().unwrap(), id);
        }
    }
}
