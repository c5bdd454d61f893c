//! Relations `E ⊆ X×X` as finite unions of diagonal bands and rectangles,
//! with the semiring operations, supports, neighbourhoods, and properness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ground::{Point, PointSet, Space};
use crate::upset::UpSet;
use crate::verdict::{Certificate, Side, Verdict, Witness};

/// `{ ((src,i),(dst,i+offset)) : i ∈ support }`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Band {
    pub src: String,
    pub dst: String,
    pub offset: i64,
    pub support: UpSet,
}

/// `left × right`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub left: PointSet,
    pub right: PointSet,
}

pub type PairWitness = (Point, Point);

#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RelationRepr", into = "RelationRepr")]
pub struct Relation {
    bands: BTreeMap<(String, String, i64), UpSet>,
    rects: Vec<Rect>,
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    #[serde(default)]
    bands: Vec<Band>,
    #[serde(default)]
    rects: Vec<Rect>,
}

impl From<RelationRepr> for Relation {
    fn from(r: RelationRepr) -> Relation {
        let mut out = Relation::empty();
        for b in r.bands {
            out.add_band(&b.src, &b.dst, b.offset, &b.support);
        }
        for q in r.rects {
            out.add_rect(q.left, q.right);
        }
        out.normalize();
        out
    }
}

impl From<Relation> for RelationRepr {
    fn from(r: Relation) -> RelationRepr {
        RelationRepr { bands: r.bands().collect(), rects: r.rects }
    }
}

/// Per-component view of a point set: rays with their sets, points as `{0}`.
pub(crate) fn comp_sets(s: &PointSet) -> Vec<(String, UpSet, bool)> {
    let mut out: Vec<(String, UpSet, bool)> = s.rays().iter().map(|(r, u)| (r.clone(), u.clone(), false)).collect();
    out.extend(s.pts().iter().map(|p| (p.clone(), UpSet::singleton(0), true)));
    out
}

fn ray_or_pt(s: &PointSet, comp: &str) -> UpSet {
    if s.has_pt(comp) {
        UpSet::singleton(0)
    } else {
        s.ray(comp)
    }
}

impl Relation {
    pub fn empty() -> Self {
        Relation::default()
    }

    pub fn band(src: &str, dst: &str, offset: i64, support: UpSet) -> Self {
        let mut r = Relation::empty();
        r.add_band(src, dst, offset, &support);
        r
    }

    /// Band on a single ray.
    pub fn diag(ray: &str, offset: i64, support: UpSet) -> Self {
        Relation::band(ray, ray, offset, support)
    }

    pub fn rect(left: PointSet, right: PointSet) -> Self {
        let mut r = Relation::empty();
        r.add_rect(left, right);
        r.normalize();
        r
    }

    pub fn pair(space: &Space, x: &Point, y: &Point) -> Result<Self> {
        Ok(Relation::rect(space.singleton(x)?, space.singleton(y)?))
    }

    pub fn from_pairs(space: &Space, pairs: &[(Point, Point)]) -> Result<Self> {
        let mut r = Relation::empty();
        for (x, y) in pairs {
            r.add_rect(space.singleton(x)?, space.singleton(y)?);
        }
        r.normalize();
        Ok(r)
    }

    /// `1_S`
    pub fn local_unit(s: &PointSet) -> Self {
        let mut r = Relation::empty();
        for (ray, u) in s.rays() {
            r.add_band(ray, ray, 0, u);
        }
        for p in s.pts() {
            r.add_rect(PointSet::pt(p), PointSet::pt(p));
        }
        r.normalize();
        r
    }

    /// `1_X`
    pub fn unit(space: &Space) -> Self {
        Relation::local_unit(&space.all())
    }

    fn add_band(&mut self, src: &str, dst: &str, offset: i64, support: &UpSet) {
        let folded = if offset < 0 { support.intersect(&UpSet::from((-offset) as u64)) } else { support.clone() };
        if folded.is_empty() {
            return;
        }
        let key = (src.to_string(), dst.to_string(), offset);
        let merged = match self.bands.get(&key) {
            Some(old) => old.union(&folded),
            None => folded,
        };
        self.bands.insert(key, merged);
    }

    fn add_rect(&mut self, left: PointSet, right: PointSet) {
        if !left.is_empty() && !right.is_empty() {
            self.rects.push(Rect { left, right });
        }
    }

    fn normalize(&mut self) {
        // Merge rects sharing a side, then sort for a stable form.
        let mut by_left: BTreeMap<PointSet, PointSet> = BTreeMap::new();
        for r in self.rects.drain(..) {
            let e = by_left.entry(r.left).or_default();
            *e = e.union(&r.right);
        }
        let mut by_right: BTreeMap<PointSet, PointSet> = BTreeMap::new();
        for (l, r) in by_left {
            let e = by_right.entry(r).or_default();
            *e = e.union(&l);
        }
        let mut rects: Vec<Rect> = by_right.into_iter().map(|(right, left)| Rect { left, right }).collect();
        rects.sort();
        rects.dedup();
        self.rects = rects;
    }

    pub fn bands(&self) -> impl Iterator<Item = Band> + '_ {
        self.bands.iter().map(|((s, d, k), u)| Band { src: s.clone(), dst: d.clone(), offset: *k, support: u.clone() })
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty() && self.rects.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.bands.values().all(UpSet::is_finite) && self.rects.iter().all(|r| r.left.is_finite() && r.right.is_finite())
    }

    pub fn union(&self, other: &Relation) -> Relation {
        let mut out = self.clone();
        for ((s, d, k), u) in &other.bands {
            out.add_band(s, d, *k, u);
        }
        out.rects.extend(other.rects.iter().cloned());
        out.normalize();
        out
    }

    pub fn union_all<'a>(items: impl IntoIterator<Item = &'a Relation>) -> Relation {
        let mut out = Relation::empty();
        for r in items {
            for ((s, d, k), u) in &r.bands {
                out.add_band(s, d, *k, u);
            }
            out.rects.extend(r.rects.iter().cloned());
        }
        out.normalize();
        out
    }

    pub fn intersect(&self, other: &Relation) -> Relation {
        let mut out = Relation::empty();
        for ((s, d, k), a) in &self.bands {
            let mut covered = other.bands.get(&(s.clone(), d.clone(), *k)).cloned().unwrap_or_else(UpSet::empty);
            for r in &other.rects {
                covered = covered.union(&r.left.ray(s).intersect(&r.right.ray(d).shift(-k)));
            }
            out.add_band(s, d, *k, &a.intersect(&covered));
        }
        for ((s, d, k), b) in &other.bands {
            for r in &self.rects {
                out.add_band(s, d, *k, &b.intersect(&r.left.ray(s).intersect(&r.right.ray(d).shift(-k))));
            }
        }
        for r in &self.rects {
            for q in &other.rects {
                out.add_rect(r.left.intersect(&q.left), r.right.intersect(&q.right));
            }
        }
        out.normalize();
        out
    }

    /// `E ∘ E′ = {(x,x″) : ∃x′, (x,x′) ∈ E, (x′,x″) ∈ E′}`
    pub fn compose(&self, other: &Relation) -> Relation {
        let mut out = Relation::empty();
        for ((s, d, k), a) in &self.bands {
            for ((s2, d2, l), b) in &other.bands {
                if d == s2 {
                    out.add_band(s, d2, k + l, &a.intersect(&b.shift(-k)));
                }
            }
            for r in &other.rects {
                let left = a.intersect(&r.left.ray(d).shift(-k));
                if !left.is_empty() {
                    out.add_rect(PointSet::on_ray(s, left), r.right.clone());
                }
            }
        }
        for r in &self.rects {
            for ((s2, d2, l), b) in &other.bands {
                let right = b.intersect(&r.right.ray(s2)).shift(*l);
                if !right.is_empty() {
                    out.add_rect(r.left.clone(), PointSet::on_ray(d2, right));
                }
            }
            for q in &other.rects {
                if !r.right.is_disjoint(&q.left) {
                    out.add_rect(r.left.clone(), q.right.clone());
                }
            }
        }
        out.normalize();
        out
    }

    /// `E^⊤`
    pub fn transpose(&self) -> Relation {
        let mut out = Relation::empty();
        for ((s, d, k), a) in &self.bands {
            out.add_band(d, s, -k, &a.shift(*k));
        }
        for r in &self.rects {
            out.add_rect(r.right.clone(), r.left.clone());
        }
        out.normalize();
        out
    }

    /// `π₁(E)`
    pub fn left_support(&self) -> PointSet {
        let mut out = PointSet::empty();
        for ((s, _, _), a) in &self.bands {
            out = out.union(&PointSet::on_ray(s, a.clone()));
        }
        for r in &self.rects {
            out = out.union(&r.left);
        }
        out
    }

    /// `π₂(E)`
    pub fn right_support(&self) -> PointSet {
        let mut out = PointSet::empty();
        for ((_, d, k), a) in &self.bands {
            out = out.union(&PointSet::on_ray(d, a.shift(*k)));
        }
        for r in &self.rects {
            out = out.union(&r.right);
        }
        out
    }

    /// `E·S = π₁(E ∘ 1_S)`
    pub fn left_nbhd(&self, s: &PointSet) -> PointSet {
        let mut out = PointSet::empty();
        for ((src, d, k), a) in &self.bands {
            out = out.union(&PointSet::on_ray(src, a.intersect(&s.ray(d).shift(-k))));
        }
        for r in &self.rects {
            if !r.right.is_disjoint(s) {
                out = out.union(&r.left);
            }
        }
        out
    }

    /// `S·E = π₂(1_S ∘ E)`
    pub fn right_nbhd(&self, s: &PointSet) -> PointSet {
        let mut out = PointSet::empty();
        for ((src, d, k), a) in &self.bands {
            out = out.union(&PointSet::on_ray(d, a.intersect(&s.ray(src)).shift(*k)));
        }
        for r in &self.rects {
            if !r.left.is_disjoint(s) {
                out = out.union(&r.right);
            }
        }
        out
    }

    /// `E ∩ (S × S)`
    pub fn restrict(&self, s: &PointSet) -> Relation {
        self.restrict2(s, s)
    }

    /// `E ∩ (L × R)`
    pub fn restrict2(&self, l: &PointSet, r: &PointSet) -> Relation {
        let mut out = Relation::empty();
        for ((src, d, k), a) in &self.bands {
            out.add_band(src, d, *k, &a.intersect(&l.ray(src)).intersect(&r.ray(d).shift(-k)));
        }
        for q in &self.rects {
            out.add_rect(q.left.intersect(l), q.right.intersect(r));
        }
        out.normalize();
        out
    }

    pub fn member(&self, x: &Point, y: &Point) -> bool {
        let k = y.index as i64 - x.index as i64;
        if let Some(a) = self.bands.get(&(x.comp.clone(), y.comp.clone(), k)) {
            if a.contains(x.index) {
                return true;
            }
        }
        self.rects.iter().any(|r| r.left.contains(x) && r.right.contains(y))
    }

    pub fn subset_of(&self, other: &Relation) -> bool {
        self.subset_witness(other).is_none()
    }

    /// `None` if `self ⊆ other`, else a pair of `self` missing from `other`.
    pub fn subset_witness(&self, other: &Relation) -> Option<PairWitness> {
        for ((s, d, k), a) in &self.bands {
            let mut covered = other.bands.get(&(s.clone(), d.clone(), *k)).cloned().unwrap_or_else(UpSet::empty);
            for r in &other.rects {
                covered = covered.union(&r.left.ray(s).intersect(&r.right.ray(d).shift(-k)));
            }
            if let Some(i) = a.difference(&covered).first() {
                return Some((Point::new(s, i), Point::new(d, (i as i64 + k) as u64)));
            }
        }
        for r in &self.rects {
            for (c1, l1, _) in comp_sets(&r.left) {
                for (c2, r2, _) in comp_sets(&r.right) {
                    if let Some(w) = other.rect_slice_witness(&c1, &l1, &c2, &r2) {
                        return Some(w);
                    }
                }
            }
        }
        None
    }

    /// Decides `L × R ⊆ self` on the component pair `(c1, c2)`.
    fn rect_slice_witness(&self, c1: &str, l: &UpSet, c2: &str, r: &UpSet) -> Option<PairWitness> {
        let slices: Vec<(UpSet, UpSet)> = self
            .rects
            .iter()
            .map(|q| (ray_or_pt(&q.left, c1), ray_or_pt(&q.right, c2)))
            .filter(|(a, b)| !a.is_empty() && !b.is_empty())
            .collect();
        let bands: Vec<(i64, &UpSet)> = self
            .bands
            .iter()
            .filter(|((s, d, _), _)| s == c1 && d == c2)
            .map(|((_, _, k), u)| (*k, u))
            .collect();
        let band_has = |x: u64, y: u64| bands.iter().any(|(k, u)| y as i64 - x as i64 == *k && u.contains(x));
        // Atoms of R under the right sides of the rect slices.
        let mut atoms: Vec<(UpSet, Vec<usize>)> = vec![(r.clone(), Vec::new())];
        for (j, (_, rq)) in slices.iter().enumerate() {
            let mut next = Vec::new();
            for (q, members) in atoms {
                let inside = q.intersect(rq);
                let outside = q.difference(rq);
                if !inside.is_empty() {
                    let mut m = members.clone();
                    m.push(j);
                    next.push((inside, m));
                }
                if !outside.is_empty() {
                    next.push((outside, members));
                }
            }
            atoms = next;
        }
        for (q, members) in atoms {
            let mut cover = UpSet::empty();
            for j in members {
                cover = cover.union(&slices[j].0);
            }
            let dq = l.difference(&cover);
            if dq.is_empty() {
                continue;
            }
            if !dq.is_finite() {
                let y = q.first().expect("atoms are nonempty");
                let x = dq.first_n(bands.len() + 1).into_iter().find(|&x| !band_has(x, y)).expect("bands cover at most one x per band");
                return Some((Point::new(c1, x), Point::new(c2, y)));
            }
            if !q.is_finite() {
                let x = dq.first().expect("nonempty");
                let y = q.first_n(bands.len() + 1).into_iter().find(|&y| !band_has(x, y)).expect("bands cover at most one y per band");
                return Some((Point::new(c1, x), Point::new(c2, y)));
            }
            for &x in dq.elements().expect("finite") {
                for &y in q.elements().expect("finite") {
                    if !band_has(x, y) {
                        return Some((Point::new(c1, x), Point::new(c2, y)));
                    }
                }
            }
        }
        None
    }

    pub fn set_eq(&self, other: &Relation) -> bool {
        self.subset_of(other) && other.subset_of(self)
    }

    /// Properness axiom: every row and column is finite. Bands contribute at
    /// most one pair per row and column, so only rects with an infinite side
    /// can fail.
    pub fn is_proper(&self) -> Verdict {
        match self.improper_witness() {
            None => Verdict::In(Certificate::Proper),
            Some(w) => Verdict::Out(w),
        }
    }

    pub fn improper_witness(&self) -> Option<Witness> {
        for r in &self.rects {
            if !r.left.is_finite() {
                let y = r.right.some_point().expect("normal form has nonempty sides");
                return Some(Witness::InfiniteFiber { point: y, side: Side::Right });
            }
            if !r.right.is_finite() {
                let x = r.left.some_point().expect("normal form has nonempty sides");
                return Some(Witness::InfiniteFiber { point: x, side: Side::Left });
            }
        }
        None
    }

    /// All pairs with both indices `≤ bound`.
    pub fn enumerate(&self, bound: u64) -> Vec<PairWitness> {
        let mut out: BTreeSet<PairWitness> = BTreeSet::new();
        for ((s, d, k), a) in &self.bands {
            for i in a.enumerate(bound) {
                let j = i as i64 + k;
                if j >= 0 && j as u64 <= bound {
                    out.insert((Point::new(s, i), Point::new(d, j as u64)));
                }
            }
        }
        for r in &self.rects {
            let ls = r.left.enumerate(bound);
            let rs = r.right.enumerate(bound);
            for x in &ls {
                for y in &rs {
                    out.insert((x.clone(), y.clone()));
                }
            }
        }
        out.into_iter().collect()
    }

    /// Every component named by the relation.
    pub fn components(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (s, d, _) in self.bands.keys() {
            out.insert(s.clone());
            out.insert(d.clone());
        }
        for r in &self.rects {
            for s in [&r.left, &r.right] {
                out.extend(s.rays().keys().cloned());
                out.extend(s.pts().iter().cloned());
            }
        }
        out
    }

    pub fn check_in(&self, space: &Space) -> Result<()> {
        for ((s, d, _), _) in &self.bands {
            for c in [s, d] {
                if !space.has_ray(c) {
                    return Err(crate::error::CoarseError::SpaceMismatch(format!("band endpoint `{c}` is not a ray of the space")));
                }
            }
        }
        for r in &self.rects {
            space.check_set(&r.left)?;
            space.check_set(&r.right)?;
        }
        Ok(())
    }

    /// Largest threshold, lcm of periods, and largest |offset| over all parts.
    pub fn shape(&self) -> (u64, u64, u64) {
        use num_integer::Integer;
        let mut t = 0;
        let mut p = 1u64;
        let mut k = 0u64;
        for ((_, _, off), a) in &self.bands {
            t = t.max(a.threshold());
            p = p.lcm(&a.period());
            k = k.max(off.unsigned_abs());
        }
        for r in &self.rects {
            for s in [&r.left, &r.right] {
                t = t.max(s.max_threshold());
                for q in s.periods() {
                    p = p.lcm(&q);
                }
            }
        }
        (t, p, k)
    }

    /// Renames every component with `f`.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> Relation {
        let mut out = Relation::empty();
        for ((s, d, k), a) in &self.bands {
            out.add_band(&f(s), &f(d), *k, a);
        }
        for r in &self.rects {
            out.add_rect(r.left.rename(&f), r.right.rename(&f));
        }
        out.normalize();
        out
    }

    /// Splits into bands and rects, each as its own relation.
    pub fn primitives(&self) -> Vec<Relation> {
        let mut out: Vec<Relation> = self.bands().map(|b| Relation::band(&b.src, &b.dst, b.offset, b.support)).collect();
        out.extend(self.rects.iter().map(|r| Relation::rect(r.left.clone(), r.right.clone())));
        out
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> =
            self.bands.iter().map(|((s, d, k), a)| format!("Band({s}→{d}, {k:+}, {a})")).collect();
        parts.extend(self.rects.iter().map(|r| format!("Rect({:?} × {:?})", r.left, r.right)));
        if parts.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "{}", parts.join(" ∪ "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::Component;

    fn all() -> UpSet {
        UpSet::all()
    }

    fn band(k: i64, a: UpSet) -> Relation {
        Relation::diag("r0", k, a)
    }

    #[test]
    fn union_examples() {
        let e = band(2, UpSet::evens());
        assert_eq!(e.union(&Relation::empty()), e);
        assert_eq!(e.union(&e), e);
        assert_eq!(band(2, UpSet::evens()).union(&band(2, UpSet::odds())), band(2, all()));
    }

    #[test]
    fn compose_examples() {
        let x = Space::ray();
        let e = band(2, UpSet::evens()).union(&Relation::rect(PointSet::on_ray("r0", UpSet::singleton(3)), x.all()));
        assert!(e.compose(&Relation::unit(&x)).set_eq(&e));
        assert_eq!(band(2, all()).compose(&band(3, all())), band(5, all()));
        assert!(band(1, UpSet::evens()).compose(&band(1, UpSet::evens())).is_empty());
    }

    #[test]
    fn transpose_examples() {
        let e = band(3, UpSet::evens()).union(&Relation::rect(PointSet::pt("p"), PointSet::on_ray("r0", UpSet::odds())));
        assert_eq!(e.transpose().transpose(), e);
        let s = PointSet::on_ray("r0", UpSet::odds()).union(&PointSet::pt("p"));
        assert_eq!(Relation::local_unit(&s).transpose(), Relation::local_unit(&s));
        assert_eq!(band(3, all()).transpose(), band(-3, UpSet::from(3)));
    }

    #[test]
    fn supports_and_neighbourhoods() {
        let x = Space::ray();
        assert!(Relation::local_unit(&PointSet::empty()).is_empty());
        assert_eq!(Relation::unit(&x), band(0, all()));
        assert_eq!(band(4, UpSet::odds()).left_support(), PointSet::on_ray("r0", UpSet::odds()));
        assert_eq!(Relation::empty().left_support(), PointSet::empty());
        let l = PointSet::on_ray("r0", UpSet::finite([1, 2]));
        assert_eq!(Relation::rect(l.clone(), PointSet::pt("p")).left_support(), l);
        let s = PointSet::on_ray("r0", UpSet::evens());
        assert_eq!(Relation::unit(&x).left_nbhd(&s), s);
        assert_eq!(band(2, all()).left_nbhd(&PointSet::on_ray("r0", UpSet::singleton(10))), PointSet::on_ray("r0", UpSet::singleton(8)));
        assert_eq!(band(2, all()).right_nbhd(&PointSet::on_ray("r0", UpSet::singleton(10))), PointSet::on_ray("r0", UpSet::singleton(12)));
    }

    #[test]
    fn restrict_examples() {
        let x = Space::ray();
        let e = band(2, UpSet::odds());
        assert_eq!(e.restrict(&x.all()), e);
        assert!(band(1, all()).restrict(&PointSet::on_ray("r0", UpSet::evens())).is_empty());
        let s = PointSet::on_ray("r0", UpSet::progression(3, 1));
        assert_eq!(Relation::unit(&x).restrict(&s), Relation::local_unit(&s));
    }

    #[test]
    fn subset_examples() {
        assert!(Relation::empty().subset_of(&band(1, all())));
        assert!(band(2, UpSet::evens()).subset_of(&band(2, all())));
        let w = band(2, all()).subset_witness(&band(2, UpSet::evens()));
        assert_eq!(w, Some((Point::new("r0", 1), Point::new("r0", 3))));
        // A finite rect is covered by bands.
        let sq = Relation::rect(PointSet::on_ray("r0", UpSet::finite([0, 1])), PointSet::on_ray("r0", UpSet::finite([0, 1])));
        let cover = band(0, all()).union(&band(1, all())).union(&band(-1, all()));
        assert!(sq.subset_of(&cover));
        assert!(!sq.subset_of(&band(0, all())));
        // An infinite rect is never covered by bands alone.
        let big = Relation::rect(PointSet::on_ray("r0", all()), PointSet::on_ray("r0", UpSet::singleton(0)));
        assert!(!big.subset_of(&cover));
        let halves = Relation::rect(PointSet::on_ray("r0", UpSet::evens()), PointSet::on_ray("r0", UpSet::singleton(0)))
            .union(&Relation::rect(PointSet::on_ray("r0", UpSet::odds()), PointSet::on_ray("r0", UpSet::finite([0, 5]))));
        assert!(big.subset_of(&halves));
    }

    #[test]
    fn properness_examples() {
        assert!(band(5, all()).is_proper().is_in());
        let space = Space::new(vec![Component::ray("r0"), Component::pt("p")]).unwrap();
        let e = Relation::rect(PointSet::on_ray("r0", all()), PointSet::pt("p"));
        match e.is_proper() {
            Verdict::Out { witness: Witness::InfiniteFiber { point, side } } => {
                assert_eq!(point, Point::new("p", 0));
                assert_eq!(side, Side::Right);
            }
            v => panic!("expected Out, got {v:?}"),
        }
        assert!(e.check_in(&space).is_ok());
        assert!(band(1, all()).compose(&band(-4, UpSet::evens())).is_proper().is_in());
    }

    #[test]
    fn json_roundtrip() {
        let e = band(2, UpSet::evens()).union(&Relation::rect(PointSet::pt("p"), PointSet::on_ray("r0", UpSet::finite([1]))));
        let s = serde_json::to_string(&e).unwrap();
        let back: Relation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        let parsed: Relation = serde_json::from_str(r#"{"bands":[{"src":"r0","dst":"r0","offset":-2,"support":"all"}]}"#).unwrap();
        assert_eq!(parsed, band(-2, UpSet::from(2)));
    }
}
