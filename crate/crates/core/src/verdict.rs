//! Three-valued answers with evidence.

use serde::{Deserialize, Serialize};

use crate::coarsemap::{Family, Piece};
use crate::entourage::Relation;
use crate::ground::{Point, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Fiber of the first projection (a row).
    Left,
    /// Fiber of the second projection (a column).
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    In { certificate: Certificate },
    Out { witness: Witness },
    Unknown { depth: usize },
}

#[allow(non_snake_case)]
impl Verdict {
    pub fn In(c: Certificate) -> Verdict {
        Verdict::In { certificate: c }
    }

    pub fn Out(w: Witness) -> Verdict {
        Verdict::Out { witness: w }
    }

    pub fn is_in(&self) -> bool {
        matches!(self, Verdict::In { .. })
    }

    pub fn is_out(&self) -> bool {
        matches!(self, Verdict::Out { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::In { certificate } => Some(certificate),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Out { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::In { .. } => "In",
            Verdict::Out { .. } => "Out",
            Verdict::Unknown { .. } => "Unknown",
        }
    }

    /// Wraps an Out witness with context; other verdicts pass through.
    pub fn context(self, what: &str) -> Verdict {
        match self {
            Verdict::Out { witness } => Verdict::Out(Witness::Nested { context: what.to_string(), inner: Box::new(witness) }),
            v => v,
        }
    }

    /// Conjunction: the first non-In verdict wins; Out beats Unknown.
    pub fn all(items: impl IntoIterator<Item = Verdict>) -> Result<Vec<Certificate>, Verdict> {
        let mut certs = Vec::new();
        let mut unknown = None;
        for v in items {
            match v {
                Verdict::In { certificate } => certs.push(certificate),
                Verdict::Out { .. } => return Err(v),
                Verdict::Unknown { depth } => unknown = Some(unknown.map_or(depth, |d: usize| d.max(depth))),
            }
        }
        match unknown {
            Some(depth) => Err(Verdict::Unknown { depth }),
            None => Ok(certs),
        }
    }
}

/// Evidence for an In verdict. Every variant is re-checkable against the
/// structure and the tested set (see `structures::check`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// The set satisfies the properness axiom.
    Proper,
    /// Every pair lies within `bound` in the metric.
    Width { bound: u64 },
    /// Every pair lies on the diagonal.
    Diagonal,
    /// A subset of `1_S` with `S` finite.
    FiniteUnits { support: PointSet },
    /// A finite set.
    Finite,
    /// Diagonal except for finitely many pairs.
    DiagonalUpToFinite { exceptions: Vec<(Point, Point)> },
    /// Finitely many pairs, each connected in the structure.
    ConnectedPairs { pairs: Vec<(Point, Point)> },
    /// Supports lie inside `within`; `inner` certifies parent membership.
    Confined { within: PointSet, inner: Box<Certificate> },
    /// The image under the named map is a member of the parent.
    Pulled { map: String, inner: Box<Certificate> },
    /// Both supports are unital in the parent.
    UnitalSupports { left: Box<Certificate>, right: Box<Certificate> },
    /// `set ⊆ E·target` for some parent member; `radius` when metric.
    NearSupport { set: PointSet, target: PointSet, radius: Option<u64> },
    /// `piece ⊆ left ∘ middle ∘ right^⊤` with `left, right` parent members
    /// and `middle` proper inside `Y × Y`.
    NearDecomposition { left: Relation, middle: Relation, right: Relation },
    /// Member of the parent structure.
    Parent { inner: Box<Certificate> },
    /// Lives in one summand of a coproduct.
    Summand { index: usize, inner: Box<Certificate> },
    /// One certificate per piece of the tested set.
    Pieces { pieces: Vec<(Piece, Certificate)> },
    /// All listed conditions hold.
    Both { parts: Vec<Certificate> },
    /// The set is covered by `expr`, evaluated in the relation algebra.
    Expression { expr: Expr, leaves: Vec<Certificate> },
    /// A closed-form fact about the structures involved.
    Claim { rule: String },
}

/// Expression trees over named generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Gen { name: String, relation: Relation },
    Union { items: Vec<Expr> },
    Compose { left: Box<Expr>, right: Box<Expr> },
    Transpose { inner: Box<Expr> },
    /// The tested set is a subset of `target`.
    SubsetOf { target: Box<Expr> },
}

impl Expr {
    pub fn eval(&self) -> Relation {
        match self {
            Expr::Gen { relation, .. } => relation.clone(),
            Expr::Union { items } => Relation::union_all(items.iter().map(Expr::eval).collect::<Vec<_>>().iter()),
            Expr::Compose { left, right } => left.eval().compose(&right.eval()),
            Expr::Transpose { inner } => inner.eval().transpose(),
            Expr::SubsetOf { target } => target.eval(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Gen { .. } => 1,
            Expr::Union { items } => items.iter().map(Expr::size).sum::<usize>() + 1,
            Expr::Compose { left, right } => left.size() + right.size() + 1,
            Expr::Transpose { inner } | Expr::SubsetOf { target: inner } => inner.size() + 1,
        }
    }
}

/// Evidence for an Out verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The fiber of the set over `point` on `side` is infinite.
    InfiniteFiber { point: Point, side: Side },
    /// Infinitely many elements of the domain map to `target`.
    InfinitePreimage { target: (Point, Point) },
    /// The map sends infinitely many points of `ray` (inside the tested set) to `point`.
    MapFiber { ray: String, point: Point },
    /// A pair of the tested set that the structure rejects.
    Pair { pair: (Point, Point), fault: String },
    /// An infinite family of pairs of unbounded width.
    Unbounded { family: Family },
    /// The structure only has finite members; the set is infinite.
    InfiniteSet,
    /// `set` is not within any member's reach of `target`.
    NotNear { set: PointSet, target: PointSet },
    /// `1_set` is not a member.
    NotUnital { set: PointSet, inner: Box<Witness> },
    Nested { context: String, inner: Box<Witness> },
    /// A member of one structure that the other rejects.
    Separating { probe: Piece, inner: Box<Witness> },
    /// A point of the target that no image point reaches.
    Unreached { point: Point },
}
