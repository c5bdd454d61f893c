//! Extensional evaluation on a finite index window.
//!
//! Every claim about ultimately periodic objects is decided by the period
//! once the window passes all thresholds plus two periods, so the functions
//! here double as an independent oracle for the symbolic code.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;

use crate::coarsemap::EAMap;
use crate::entourage::Relation;
use crate::ground::{Point, PointSet};

pub type PairSet = BTreeSet<(Point, Point)>;

/// A window large enough for all of `rels`: thresholds, two periods, and
/// three times the largest offset.
pub fn window_for(rels: &[&Relation]) -> u64 {
    let mut t = 0;
    let mut p = 1u64;
    let mut k = 0;
    for r in rels {
        let (a, b, c) = r.shape();
        t = t.max(a);
        p = p.lcm(&b);
        k = k.max(c);
    }
    t + 2 * p + 3 * k + 8
}

pub fn pairs(rel: &Relation, n: u64) -> PairSet {
    rel.enumerate(n).into_iter().collect()
}

pub fn clip(a: &PairSet, n: u64) -> PairSet {
    a.iter().filter(|(x, y)| x.index <= n && y.index <= n).cloned().collect()
}

pub fn union(a: &PairSet, b: &PairSet) -> PairSet {
    a.union(b).cloned().collect()
}

pub fn transpose(a: &PairSet) -> PairSet {
    a.iter().map(|(x, y)| (y.clone(), x.clone())).collect()
}

/// Relational composition of explicit pair sets.
pub fn compose(a: &PairSet, b: &PairSet) -> PairSet {
    let mut by_left: BTreeMap<&Point, Vec<&Point>> = BTreeMap::new();
    for (x, y) in b {
        by_left.entry(x).or_default().push(y);
    }
    let mut out = PairSet::new();
    for (x, m) in a {
        if let Some(zs) = by_left.get(m) {
            for z in zs {
                out.insert((x.clone(), (*z).clone()));
            }
        }
    }
    out
}

pub fn points(s: &PointSet, n: u64) -> BTreeSet<Point> {
    s.enumerate(n).into_iter().collect()
}

pub fn left_support(a: &PairSet) -> BTreeSet<Point> {
    a.iter().map(|(x, _)| x.clone()).collect()
}

pub fn right_support(a: &PairSet) -> BTreeSet<Point> {
    a.iter().map(|(_, y)| y.clone()).collect()
}

/// `E·S = { x : (x, s) ∈ E, s ∈ S }`
pub fn left_nbhd(a: &PairSet, s: &BTreeSet<Point>) -> BTreeSet<Point> {
    a.iter().filter(|(_, y)| s.contains(y)).map(|(x, _)| x.clone()).collect()
}

/// `S·E = { y : (s, y) ∈ E, s ∈ S }`
pub fn right_nbhd(s: &BTreeSet<Point>, a: &PairSet) -> BTreeSet<Point> {
    a.iter().filter(|(x, _)| s.contains(x)).map(|(_, y)| y.clone()).collect()
}

pub fn row_len(a: &PairSet, x: &Point) -> usize {
    a.iter().filter(|(p, _)| p == x).count()
}

pub fn column_len(a: &PairSet, y: &Point) -> usize {
    a.iter().filter(|(_, q)| q == y).count()
}

/// Image of the pairs of `rel` with source indices `≤ m` under `f × g`.
pub fn image(f: &EAMap, g: &EAMap, rel: &Relation, m: u64) -> PairSet {
    rel.enumerate(m).into_iter().map(|(x, y)| (f.apply(&x).expect("in source"), g.apply(&y).expect("in source"))).collect()
}

/// Evaluates `count` at a window and at its double: an infinite quantity
/// shows up as strict growth, a finite one settles once the window passes
/// its last element.
pub fn grows(count: impl Fn(u64) -> usize, n: u64) -> bool {
    count(2 * n + 16) > count(n)
}
