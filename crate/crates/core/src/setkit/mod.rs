//! Integer sets described as expression trees, exact membership, and dense
//! materialization over `[1, N]`.
//!
//! Coordinates `x ≤ 0` are never members of any set.

mod family;
mod truncation;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational;

pub use family::{FamilyKind, IntegerInterval, IntervalFamily};
pub use truncation::{
    load_truncation, save_truncation, truncate, truncate_with_budget, MemoryBudget, Truncation, BLOCK_BITS,
};

/// One node of a set expression. Children are already-validated [`SetSpec`]s.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Strictly increasing list of positive integers.
    Explicit(Vec<u64>),
    /// `{x : x mod modulus ∈ residues}`.
    Residue {
        modulus: u64,
        residues: Vec<u64>,
    },
    Family(IntervalFamily),
    Union(Vec<SetSpec>),
    Intersection(Vec<SetSpec>),
    Complement(Box<SetSpec>),
    /// `{x : x − offset ∈ child}`.
    ShiftBy {
        child: Box<SetSpec>,
        offset: i64,
    },
    /// `{n : modulus·n + residue ∈ child}`.
    Quotient {
        child: Box<SetSpec>,
        modulus: u64,
        residue: u64,
    },
}

/// A validated set expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Node", into = "Node")]
pub struct SetSpec(Node);

impl TryFrom<Node> for SetSpec {
    type Error = Error;
    fn try_from(node: Node) -> Result<Self> {
        validate(&node)?;
        Ok(SetSpec(node))
    }
}

impl From<SetSpec> for Node {
    fn from(s: SetSpec) -> Node {
        s.0
    }
}

fn validate(node: &Node) -> Result<()> {
    match node {
        Node::Explicit(v) => {
            if v.first() == Some(&0) {
                return Err(Error::invalid("explicit sets hold positive integers only"));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("explicit list must be strictly increasing"));
            }
        }
        Node::Residue { modulus, residues } => {
            if *modulus == 0 {
                return Err(Error::invalid("residue modulus must be at least 1"));
            }
            if let Some(r) = residues.iter().find(|&&r| r >= *modulus) {
                return Err(Error::invalid(format!(
                    "residue {r} out of range for modulus {modulus}"
                )));
            }
            if residues.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("residues must be strictly increasing"));
            }
        }
        Node::Union(c) | Node::Intersection(c) => {
            if c.is_empty() {
                return Err(Error::invalid("union/intersection needs at least one child"));
            }
        }
        Node::Quotient { modulus, residue, .. } => {
            if *modulus == 0 {
                return Err(Error::invalid("quotient modulus must be at least 1"));
            }
            if residue >= modulus {
                return Err(Error::invalid(format!(
                    "quotient residue {residue} out of range for modulus {modulus}"
                )));
            }
        }
        Node::Family(_) | Node::Complement(_) | Node::ShiftBy { .. } => {}
    }
    Ok(())
}

impl SetSpec {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn explicit(values: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = values.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::try_from(Node::Explicit(v))
    }

    pub fn empty() -> Self {
        SetSpec(Node::Explicit(Vec::new()))
    }

    /// All positive integers.
    pub fn naturals() -> Self {
        SetSpec(Node::Residue {
            modulus: 1,
            residues: vec![0],
        })
    }

    pub fn residue(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut r: Vec<u64> = residues.into_iter().collect();
        r.sort_unstable();
        r.dedup();
        Self::try_from(Node::Residue { modulus, residues: r })
    }

    pub fn family(f: IntervalFamily) -> Self {
        SetSpec(Node::Family(f))
    }

    pub fn union(children: Vec<SetSpec>) -> Result<Self> {
        Self::try_from(Node::Union(children))
    }

    pub fn intersection(children: Vec<SetSpec>) -> Result<Self> {
        Self::try_from(Node::Intersection(children))
    }

    pub fn complement(child: SetSpec) -> Self {
        SetSpec(Node::Complement(Box::new(child)))
    }

    /// `a ∖ b`, expressed as `a ∩ ¬b`.
    pub fn difference(a: SetSpec, b: SetSpec) -> Self {
        SetSpec(Node::Intersection(vec![a, Self::complement(b)]))
    }

    pub fn shift_by(child: SetSpec, offset: i64) -> Self {
        SetSpec(Node::ShiftBy {
            child: Box::new(child),
            offset,
        })
    }

    pub fn quotient(child: SetSpec, modulus: u64, residue: u64) -> Result<Self> {
        Self::try_from(Node::Quotient {
            child: Box::new(child),
            modulus,
            residue,
        })
    }

    /// Exact membership of `x`. Non-positive `x` is never a member.
    pub fn contains(&self, x: u64) -> bool {
        self.contains_big(&BigInt::from(x))
    }

    pub fn contains_big(&self, x: &BigInt) -> bool {
        if !x.is_positive() {
            return false;
        }
        match &self.0 {
            Node::Explicit(v) => x.to_u64().is_some_and(|x| v.binary_search(&x).is_ok()),
            Node::Residue { modulus, residues } => {
                let r = x.mod_floor(&BigInt::from(*modulus)).to_u64().unwrap_or(0);
                residues.binary_search(&r).is_ok()
            }
            Node::Family(f) => f.contains(x),
            Node::Union(c) => c.iter().any(|s| s.contains_big(x)),
            Node::Intersection(c) => c.iter().all(|s| s.contains_big(x)),
            Node::Complement(c) => !c.contains_big(x),
            Node::ShiftBy { child, offset } => child.contains_big(&(x - BigInt::from(*offset))),
            Node::Quotient {
                child,
                modulus,
                residue,
            } => child.contains_big(&(x * BigInt::from(*modulus) + BigInt::from(*residue))),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("set specs always serialize")
    }
}

/// Free-function form of [`SetSpec::contains`].
pub fn membership(spec: &SetSpec, x: u64) -> bool {
    spec.contains(x)
}

/// `{n ∈ ℕ : d·n + j ∈ spec}`.
pub fn quotient_set(spec: &SetSpec, d: u64, j: u64) -> Result<SetSpec> {
    SetSpec::quotient(spec.clone(), d, j)
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, name: &str, c: &[SetSpec]) -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, s) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{s}")?;
            }
            write!(f, ")")
        }
        match &self.0 {
            Node::Explicit(v) if v.len() <= 8 => write!(f, "explicit{v:?}"),
            Node::Explicit(v) => write!(f, "explicit[{} values]", v.len()),
            Node::Residue { modulus, residues } => write!(f, "residue({modulus}; {residues:?})"),
            Node::Family(fam) => write!(
                f,
                "family({:?}, base {}, from {})",
                fam.kind(),
                rational::format_fraction(fam.base()),
                fam.index_start()
            ),
            Node::Union(c) => list(f, "union", c),
            Node::Intersection(c) => list(f, "intersection", c),
            Node::Complement(c) => write!(f, "complement({c})"),
            Node::ShiftBy { child, offset } => write!(f, "shift({child}, {offset})"),
            Node::Quotient {
                child,
                modulus,
                residue,
            } => write!(f, "quotient({child}, {modulus}, {residue})"),
        }
    }
}
