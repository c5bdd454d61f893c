//! Eventually-affine maps between ground sets, properness, local properness,
//! and exact symbolic images `(f × g)(F)` of relations.
//!
//! A pair image is decomposed into [`Piece`]s. A band of `F` is a
//! [`Family`] `{(σ(i), τ(i)) : i ∈ A}` of two [`Track`]s; pushing it through
//! `(f, g)` composes the tracks and peels off finitely many exceptional
//! pairs. Families whose tracks have different slopes are "sheared": they
//! are exact, but not relations.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::entourage::{Rect, Relation};
use crate::error::{CoarseError, Result};
use crate::ground::{Kind, Point, PointSet, Space};
use crate::upset::UpSet;
use crate::verdict::{Certificate, Side, Verdict, Witness};

/// Behaviour of a ray beyond its table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Tail {
    /// `i ↦ (dst, a·i + b)`, `a ≥ 1`.
    Affine { a: u64, b: i64, dst: String },
    Const { point: Point },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CompMap {
    Pt(Point),
    Ray { table: Vec<Point>, tail: Tail },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CompMapRepr {
    Pt { to: Point },
    Ray {
        #[serde(default)]
        table: BTreeMap<String, Point>,
        tail: Tail,
    },
}

impl Serialize for CompMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CompMap::Pt(p) => CompMapRepr::Pt { to: p.clone() }.serialize(s),
            CompMap::Ray { table, tail } => {
                CompMapRepr::Ray { table: table.iter().cloned().enumerate().map(|(i, p)| (i.to_string(), p)).collect(), tail: tail.clone() }
                    .serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for CompMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match CompMapRepr::deserialize(d)? {
            CompMapRepr::Pt { to } => Ok(CompMap::Pt(to)),
            CompMapRepr::Ray { table, tail } => {
                let mut rows: Vec<(u64, Point)> = Vec::new();
                for (k, p) in table {
                    let i = k.parse::<u64>().map_err(|_| serde::de::Error::custom(format!("table key `{k}` is not an index")))?;
                    rows.push((i, p));
                }
                rows.sort_by_key(|r| r.0);
                if rows.iter().enumerate().any(|(n, r)| r.0 != n as u64) {
                    return Err(serde::de::Error::custom(format!("map table must cover 0..{} without gaps", rows.len())));
                }
                Ok(CompMap::Ray { table: rows.into_iter().map(|r| r.1).collect(), tail })
            }
        }
    }
}

/// `i ↦ point` along a parameter `i ∈ ℕ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Track {
    /// `i ↦ (ray, a·i + b)`; only evaluated where `a·i + b ≥ 0`.
    Affine { ray: String, a: u64, b: i64 },
    Const { point: Point },
}

impl Track {
    pub fn id(ray: &str) -> Track {
        Track::Affine { ray: ray.to_string(), a: 1, b: 0 }
    }

    pub fn at(&self, i: u64) -> Option<Point> {
        match self {
            Track::Affine { ray, a, b } => {
                let v = *a as i64 * i as i64 + b;
                (v >= 0).then(|| Point::new(ray, v as u64))
            }
            Track::Const { point } => Some(point.clone()),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Track::Const { .. })
    }

    pub fn slope(&self) -> u64 {
        match self {
            Track::Affine { a, .. } => *a,
            Track::Const { .. } => 0,
        }
    }

    /// Parameters where the track is defined.
    pub fn domain(&self) -> UpSet {
        match self {
            Track::Affine { a, b, .. } => UpSet::all().affine_preimage(*a, *b),
            Track::Const { .. } => UpSet::all(),
        }
    }

    /// `{ track(i) : i ∈ params }`
    pub fn image(&self, params: &UpSet, space: &Space) -> PointSet {
        match self {
            Track::Affine { ray, a, b } => PointSet::on_ray(ray, params.intersect(&self.domain()).affine_image(*a, *b)),
            Track::Const { point } => {
                if params.is_empty() {
                    PointSet::empty()
                } else {
                    point_set(space, point)
                }
            }
        }
    }

    /// `{ i : track(i) ∈ s }`
    pub fn preimage(&self, s: &PointSet) -> UpSet {
        match self {
            Track::Affine { ray, a, b } => s.ray(ray).affine_preimage(*a, *b),
            Track::Const { point } => {
                if s.contains(point) {
                    UpSet::all()
                } else {
                    UpSet::empty()
                }
            }
        }
    }

    /// `{ i : self(i) = other(i) }`
    pub fn agree(&self, other: &Track) -> UpSet {
        match (self, other) {
            (Track::Const { point: p }, Track::Const { point: q }) => {
                if p == q {
                    UpSet::all()
                } else {
                    UpSet::empty()
                }
            }
            (Track::Const { point }, t @ Track::Affine { ray, .. }) | (t @ Track::Affine { ray, .. }, Track::Const { point }) => {
                if &point.comp == ray {
                    t.preimage(&PointSet::on_ray(ray, UpSet::singleton(point.index)))
                } else {
                    UpSet::empty()
                }
            }
            (Track::Affine { ray: r1, a: a1, b: b1 }, Track::Affine { ray: r2, a: a2, b: b2 }) => {
                if r1 != r2 {
                    return UpSet::empty();
                }
                let dom = self.domain().intersect(&other.domain());
                if a1 == a2 {
                    return if b1 == b2 { dom } else { UpSet::empty() };
                }
                let num = b2 - b1;
                let den = *a1 as i64 - *a2 as i64;
                if num % den == 0 && num / den >= 0 {
                    UpSet::singleton((num / den) as u64).intersect(&dom)
                } else {
                    UpSet::empty()
                }
            }
        }
    }
}

impl fmt::Debug for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Track::Affine { ray, a, b } => write!(f, "{ray}:{a}i{b:+}"),
            Track::Const { point } => write!(f, "{point:?}"),
        }
    }
}

fn point_set(space: &Space, x: &Point) -> PointSet {
    if space.kind(&x.comp) == Some(Kind::Pt) {
        PointSet::pt(&x.comp)
    } else {
        PointSet::on_ray(&x.comp, UpSet::singleton(x.index))
    }
}

/// `{ (src(i), dst(i)) : i ∈ support }`
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Family {
    pub src: Track,
    pub dst: Track,
    pub support: UpSet,
}

impl Family {
    pub fn new(src: Track, dst: Track, support: UpSet) -> Family {
        let support = support.intersect(&src.domain()).intersect(&dst.domain());
        Family { src, dst, support }
    }

    /// The family of a band `(s, d, k, A)`.
    pub fn of_band(src: &str, dst: &str, offset: i64, support: &UpSet) -> Family {
        Family::new(Track::id(src), Track::Affine { ray: dst.to_string(), a: 1, b: offset }, support.clone())
    }

    pub fn pair(&self, i: u64) -> Option<(Point, Point)> {
        Some((self.src.at(i)?, self.dst.at(i)?))
    }

    /// Both tracks affine with different slopes.
    pub fn is_sheared(&self) -> bool {
        !self.src.is_const() && !self.dst.is_const() && self.src.slope() != self.dst.slope()
    }

    pub fn restrict(&self, params: &UpSet) -> Family {
        Family { src: self.src.clone(), dst: self.dst.clone(), support: self.support.intersect(params) }
    }

    pub fn left_support(&self, space: &Space) -> PointSet {
        self.src.image(&self.support, space)
    }

    pub fn right_support(&self, space: &Space) -> PointSet {
        self.dst.image(&self.support, space)
    }

    /// The family as a band, when both tracks are affine with equal slope.
    pub fn as_band(&self) -> Option<Relation> {
        match (&self.src, &self.dst) {
            (Track::Affine { ray: s, a: a1, b: b1 }, Track::Affine { ray: d, a: a2, b: b2 }) if a1 == a2 => {
                Some(Relation::band(s, d, b2 - b1, self.support.affine_image(*a1, *b1)))
            }
            _ => None,
        }
    }

    /// Pairs whose parameters are `≤ bound`.
    pub fn pairs_upto(&self, bound: u64) -> Vec<(Point, Point)> {
        self.support.enumerate(bound).into_iter().filter_map(|i| self.pair(i)).collect()
    }

    /// Pairs with both point indices `≤ bound`.
    pub fn enumerate(&self, bound: u64) -> Vec<(Point, Point)> {
        let limit = [&self.src, &self.dst]
            .iter()
            .filter_map(|t| match t {
                Track::Affine { a, b, .. } => Some(if bound as i64 - b < 0 { None } else { Some(((bound as i64 - b) / *a as i64) as u64) }),
                Track::Const { .. } => None,
            })
            .fold(None::<Option<u64>>, |acc, x| match (acc, x) {
                (None, x) => Some(x),
                (Some(None), _) | (_, None) => Some(None),
                (Some(Some(p)), Some(q)) => Some(Some(p.min(q))),
            });
        let params = match limit {
            None => self.support.first().into_iter().collect::<Vec<_>>(),
            Some(None) => Vec::new(),
            Some(Some(m)) => self.support.enumerate(m),
        };
        params
            .into_iter()
            .filter_map(|i| self.pair(i))
            .filter(|(x, y)| x.index <= bound && y.index <= bound)
            .collect()
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{({:?}, {:?}) : i ∈ {}}}", self.src, self.dst, self.support)
    }
}

/// One exact piece of a pair image.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Piece {
    Family(Family),
    Rect(Rect),
}

impl Piece {
    pub fn single(space: &Space, x: &Point, y: &Point) -> Piece {
        Piece::Rect(Rect { left: point_set(space, x), right: point_set(space, y) })
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Piece::Family(f) => f.support.is_finite() || (f.src.is_const() && f.dst.is_const()),
            Piece::Rect(r) => r.left.is_finite() && r.right.is_finite(),
        }
    }

    pub fn left_support(&self, space: &Space) -> PointSet {
        match self {
            Piece::Family(f) => f.left_support(space),
            Piece::Rect(r) => r.left.clone(),
        }
    }

    pub fn right_support(&self, space: &Space) -> PointSet {
        match self {
            Piece::Family(f) => f.right_support(space),
            Piece::Rect(r) => r.right.clone(),
        }
    }

    pub fn to_relation(&self) -> Option<Relation> {
        match self {
            Piece::Family(f) => f.as_band(),
            Piece::Rect(r) => Some(Relation::rect(r.left.clone(), r.right.clone())),
        }
    }

    pub fn enumerate(&self, bound: u64) -> Vec<(Point, Point)> {
        match self {
            Piece::Family(f) => f.enumerate(bound),
            Piece::Rect(r) => Relation::rect(r.left.clone(), r.right.clone()).enumerate(bound),
        }
    }

    /// Finite pieces as explicit pairs.
    pub fn pairs(&self) -> Option<Vec<(Point, Point)>> {
        match self {
            Piece::Family(f) if f.src.is_const() && f.dst.is_const() => Some(f.support.first().and_then(|i| f.pair(i)).into_iter().collect()),
            Piece::Family(f) => f.support.elements().map(|es| es.iter().filter_map(|&i| f.pair(i)).collect()),
            Piece::Rect(r) => {
                let ls = r.left.elements()?;
                let rs = r.right.elements()?;
                Some(ls.iter().flat_map(|x| rs.iter().map(move |y| (x.clone(), y.clone()))).collect())
            }
        }
    }

    pub fn member(&self, x: &Point, y: &Point) -> bool {
        match self {
            Piece::Rect(r) => r.left.contains(x) && r.right.contains(y),
            Piece::Family(f) => {
                let cands = match &f.src {
                    Track::Affine { ray, a, b } if &x.comp == ray => {
                        let v = x.index as i64 - b;
                        if v >= 0 && v % *a as i64 == 0 {
                            vec![(v / *a as i64) as u64]
                        } else {
                            vec![]
                        }
                    }
                    Track::Affine { .. } => vec![],
                    Track::Const { point } if point == x => match &f.dst {
                        Track::Affine { ray, a, b } if &y.comp == ray => {
                            let v = y.index as i64 - b;
                            if v >= 0 && v % *a as i64 == 0 {
                                vec![(v / *a as i64) as u64]
                            } else {
                                vec![]
                            }
                        }
                        Track::Affine { .. } => vec![],
                        Track::Const { point } => {
                            if point == y {
                                f.support.first().into_iter().collect()
                            } else {
                                vec![]
                            }
                        }
                    },
                    Track::Const { .. } => vec![],
                };
                cands.into_iter().any(|i| f.support.contains(i) && f.pair(i).as_ref() == Some(&(x.clone(), y.clone())))
            }
        }
    }
}

/// Splits a relation into pieces: each band becomes a family, each rect a rect.
pub fn pieces_of(rel: &Relation) -> Vec<Piece> {
    let mut out: Vec<Piece> = rel.bands().map(|b| Piece::Family(Family::of_band(&b.src, &b.dst, b.offset, &b.support))).collect();
    out.extend(rel.rects().iter().cloned().map(Piece::Rect));
    out
}

/// Rewrites a piece into canonical form: finite families become single
/// pairs, families with a constant track become rects.
pub fn normalize_piece(piece: Piece, space: &Space) -> Vec<Piece> {
    match piece {
        Piece::Rect(r) => {
            if r.left.is_empty() || r.right.is_empty() {
                vec![]
            } else {
                vec![Piece::Rect(r)]
            }
        }
        Piece::Family(f) => {
            if f.support.is_empty() {
                return vec![];
            }
            match (&f.src, &f.dst) {
                (Track::Const { point: x }, Track::Const { point: y }) => vec![Piece::single(space, x, y)],
                (Track::Const { point: x }, t) => vec![Piece::Rect(Rect { left: point_set(space, x), right: t.image(&f.support, space) })],
                (t, Track::Const { point: y }) => vec![Piece::Rect(Rect { left: t.image(&f.support, space), right: point_set(space, y) })],
                _ if f.support.is_finite() => f.pairs_upto(f.support.last().unwrap_or(0)).iter().map(|(x, y)| Piece::single(space, x, y)).collect(),
                _ => vec![Piece::Family(f)],
            }
        }
    }
}

/// Where [`EAMap::relabel`] sends a component.
#[derive(Clone, Debug)]
pub enum Route {
    Ray { dst: String, a: u64, b: i64 },
    Point(Point),
}

/// An eventually-affine map between ground sets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EAMap {
    source: Space,
    target: Space,
    comps: BTreeMap<String, CompMap>,
}

#[derive(Serialize, Deserialize)]
struct EAMapRepr {
    source: Space,
    target: Space,
    components: BTreeMap<String, CompMap>,
}

impl Serialize for EAMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EAMapRepr { source: self.source.clone(), target: self.target.clone(), components: self.comps.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EAMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = EAMapRepr::deserialize(d)?;
        EAMap::new(r.source, r.target, r.components).map_err(serde::de::Error::custom)
    }
}

impl EAMap {
    pub fn new(source: Space, target: Space, comps: BTreeMap<String, CompMap>) -> Result<EAMap> {
        for c in source.components() {
            let Some(m) = comps.get(&c.id) else {
                return Err(CoarseError::Invalid(format!("map leaves component `{}` undefined", c.id)));
            };
            match (c.kind, m) {
                (Kind::Pt, CompMap::Pt(x)) => target.check_point(x)?,
                (Kind::Ray, CompMap::Ray { table, tail }) => {
                    for x in table {
                        target.check_point(x)?;
                    }
                    match tail {
                        Tail::Affine { a, b, dst } => {
                            if *a == 0 {
                                return Err(CoarseError::Invalid(format!("affine tail on `{}` needs slope ≥ 1", c.id)));
                            }
                            if !target.has_ray(dst) {
                                return Err(CoarseError::SpaceMismatch(format!("tail target `{dst}` is not a ray")));
                            }
                            if (*a as i64) * table.len() as i64 + b < 0 {
                                return Err(CoarseError::Invalid(format!("affine tail on `{}` is negative at its threshold", c.id)));
                            }
                        }
                        Tail::Const { point } => target.check_point(point)?,
                    }
                }
                _ => return Err(CoarseError::Invalid(format!("component `{}` mapped with the wrong kind", c.id))),
            }
        }
        for k in comps.keys() {
            if source.kind(k).is_none() {
                return Err(CoarseError::SpaceMismatch(format!("map names unknown source component `{k}`")));
            }
        }
        let mut m = EAMap { source, target, comps };
        m.trim();
        Ok(m)
    }

    /// Drops trailing table entries that the tail already predicts.
    fn trim(&mut self) {
        for m in self.comps.values_mut() {
            if let CompMap::Ray { table, tail } = m {
                while let Some(last) = table.last() {
                    let i = table.len() as u64 - 1;
                    let predicted = match tail {
                        Tail::Affine { a, b, dst } => {
                            let v = *a as i64 * i as i64 + *b;
                            (v >= 0).then(|| Point::new(dst, v as u64))
                        }
                        Tail::Const { point } => Some(point.clone()),
                    };
                    if predicted.as_ref() == Some(last) {
                        table.pop();
                    } else {
                        break;
                    }
                }
            }
        }
    }

    pub fn identity(space: &Space) -> EAMap {
        let comps = space
            .components()
            .iter()
            .map(|c| {
                let m = match c.kind {
                    Kind::Pt => CompMap::Pt(Point::new(&c.id, 0)),
                    Kind::Ray => CompMap::Ray { table: vec![], tail: Tail::Affine { a: 1, b: 0, dst: c.id.clone() } },
                };
                (c.id.clone(), m)
            })
            .collect();
        EAMap { source: space.clone(), target: space.clone(), comps }
    }

    pub fn constant(source: &Space, target: &Space, point: &Point) -> Result<EAMap> {
        let comps = source
            .components()
            .iter()
            .map(|c| {
                let m = match c.kind {
                    Kind::Pt => CompMap::Pt(point.clone()),
                    Kind::Ray => CompMap::Ray { table: vec![], tail: Tail::Const { point: point.clone() } },
                };
                (c.id.clone(), m)
            })
            .collect();
        EAMap::new(source.clone(), target.clone(), comps)
    }

    /// Sends ray `c` affinely by `(dst, a, b)` and point `c` to a point, as
    /// chosen by `route`.
    pub fn relabel(source: &Space, target: &Space, route: impl Fn(&str) -> Route) -> Result<EAMap> {
        let comps = source
            .components()
            .iter()
            .map(|c| {
                let m = match (c.kind, route(&c.id)) {
                    (Kind::Ray, Route::Ray { dst, a, b }) => CompMap::Ray { table: vec![], tail: Tail::Affine { a, b, dst } },
                    (Kind::Pt, Route::Point(x)) => CompMap::Pt(x),
                    (Kind::Ray, Route::Point(x)) => CompMap::Ray { table: vec![], tail: Tail::Const { point: x } },
                    (Kind::Pt, Route::Ray { dst, b, .. }) => CompMap::Pt(Point::new(&dst, b.max(0) as u64)),
                };
                (c.id.clone(), m)
            })
            .collect();
        EAMap::new(source.clone(), target.clone(), comps)
    }

    /// `i ↦ a·i + b` on the one-ray space, with `table` overriding the start.
    pub fn ray_affine(a: u64, b: i64, table: Vec<u64>) -> Result<EAMap> {
        let s = Space::ray();
        let comps = [("r0".to_string(), CompMap::Ray { table: table.into_iter().map(|j| Point::new("r0", j)).collect(), tail: Tail::Affine { a, b, dst: "r0".into() } })].into();
        EAMap::new(s.clone(), s, comps)
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn comps(&self) -> &BTreeMap<String, CompMap> {
        &self.comps
    }

    pub fn comp(&self, id: &str) -> Option<&CompMap> {
        self.comps.get(id)
    }

    pub fn threshold(&self, ray: &str) -> u64 {
        match self.comps.get(ray) {
            Some(CompMap::Ray { table, .. }) => table.len() as u64,
            _ => 0,
        }
    }

    /// Rays with a constant tail and the constant.
    pub fn const_tails(&self) -> Vec<(String, Point)> {
        self.comps
            .iter()
            .filter_map(|(r, m)| match m {
                CompMap::Ray { tail: Tail::Const { point }, .. } => Some((r.clone(), point.clone())),
                _ => None,
            })
            .collect()
    }

    pub fn is_injective_on_tails(&self) -> bool {
        self.const_tails().is_empty()
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.source.check_point(x)?;
        Ok(self.at(x))
    }

    fn at(&self, x: &Point) -> Point {
        match &self.comps[&x.comp] {
            CompMap::Pt(p) => p.clone(),
            CompMap::Ray { table, tail } => {
                if (x.index as usize) < table.len() {
                    return table[x.index as usize].clone();
                }
                match tail {
                    Tail::Affine { a, b, dst } => Point::new(dst, (*a as i64 * x.index as i64 + b) as u64),
                    Tail::Const { point } => point.clone(),
                }
            }
        }
    }

    /// `self ∘ g` (apply `g` first).
    pub fn compose(&self, g: &EAMap) -> Result<EAMap> {
        if g.target != self.source {
            return Err(CoarseError::SpaceMismatch("composed maps do not share the middle space".into()));
        }
        let mut comps = BTreeMap::new();
        for (id, m) in &g.comps {
            let out = match m {
                CompMap::Pt(p) => CompMap::Pt(self.at(p)),
                CompMap::Ray { table, tail } => {
                    let mut t: Vec<Point> = table.iter().map(|p| self.at(p)).collect();
                    let tail = match tail {
                        Tail::Const { point } => Tail::Const { point: self.at(point) },
                        Tail::Affine { a, b, dst } => {
                            let tf = self.threshold(dst) as i64;
                            let need = tf - b;
                            let m0 = if need <= 0 { 0 } else { (need as u64).div_ceil(*a) };
                            let start = t.len() as u64;
                            for i in start..m0.max(start) {
                                t.push(self.at(&Point::new(dst, (*a as i64 * i as i64 + b) as u64)));
                            }
                            match &self.comps[dst] {
                                CompMap::Ray { tail: Tail::Affine { a: a2, b: b2, dst: d2 }, .. } => {
                                    Tail::Affine { a: a2 * a, b: *a2 as i64 * b + b2, dst: d2.clone() }
                                }
                                CompMap::Ray { tail: Tail::Const { point }, .. } => Tail::Const { point: point.clone() },
                                CompMap::Pt(_) => unreachable!("affine tails land on rays"),
                            }
                        }
                    };
                    CompMap::Ray { table: t, tail }
                }
            };
            comps.insert(id.clone(), out);
        }
        EAMap::new(g.source.clone(), self.target.clone(), comps)
    }

    pub fn image_set(&self, s: &PointSet) -> Result<PointSet> {
        self.source.check_set(s)?;
        let mut out = PointSet::empty();
        for p in s.pts() {
            out = out.union(&point_set(&self.target, &self.at(&Point::new(p, 0))));
        }
        for (r, u) in s.rays() {
            let CompMap::Ray { table, tail } = &self.comps[r] else { unreachable!() };
            let t = table.len() as u64;
            for i in u.enumerate(t.saturating_sub(1)) {
                if i < t {
                    out = out.union(&point_set(&self.target, &table[i as usize]));
                }
            }
            let rest = u.intersect(&UpSet::from(t));
            if rest.is_empty() {
                continue;
            }
            out = out.union(&match tail {
                Tail::Affine { a, b, dst } => PointSet::on_ray(dst, rest.affine_image(*a, *b)),
                Tail::Const { point } => point_set(&self.target, point),
            });
        }
        Ok(out)
    }

    pub fn preimage_set(&self, s: &PointSet) -> Result<PointSet> {
        self.target.check_set(s)?;
        let mut rays = Vec::new();
        let mut pts = Vec::new();
        for (id, m) in &self.comps {
            match m {
                CompMap::Pt(p) => {
                    if s.contains(p) {
                        pts.push(id.clone());
                    }
                }
                CompMap::Ray { table, tail } => {
                    let t = table.len() as u64;
                    let head = UpSet::finite((0..t).filter(|&i| s.contains(&table[i as usize])));
                    let rest = match tail {
                        Tail::Affine { a, b, dst } => s.ray(dst).affine_preimage(*a, *b),
                        Tail::Const { point } => {
                            if s.contains(point) {
                                UpSet::all()
                            } else {
                                UpSet::empty()
                            }
                        }
                    };
                    rays.push((id.clone(), head.union(&rest.intersect(&UpSet::from(t)))));
                }
            }
        }
        Ok(PointSet::from_parts(rays, pts))
    }

    /// Proper iff no ray has a constant tail.
    pub fn is_proper(&self) -> Verdict {
        match self.const_tails().into_iter().next() {
            None => Verdict::In(Certificate::Proper),
            Some((ray, point)) => Verdict::Out(Witness::MapFiber { ray, point }),
        }
    }

    /// Properness of the restriction to `s`: a constant tail may only meet
    /// finitely many points of `s`.
    pub fn proper_on(&self, s: &PointSet) -> Verdict {
        for (ray, point) in self.const_tails() {
            if !s.ray(&ray).intersect(&UpSet::from(self.threshold(&ray))).is_finite() {
                return Verdict::Out(Witness::MapFiber { ray, point });
            }
        }
        Verdict::In(Certificate::Proper)
    }

    /// `self ∘ track`, valid for parameters `≥` the returned bound.
    pub fn compose_track(&self, track: &Track) -> (u64, Track) {
        match track {
            Track::Const { point } => (0, Track::Const { point: self.at(point) }),
            Track::Affine { ray, a, b } => {
                let t = self.threshold(ray) as i64;
                let need = t - b;
                let m = if need <= 0 { 0 } else { (need as u64).div_ceil(*a) };
                let out = match &self.comps[ray] {
                    CompMap::Ray { tail: Tail::Affine { a: a2, b: b2, dst }, .. } => Track::Affine { ray: dst.clone(), a: a2 * a, b: *a2 as i64 * b + b2 },
                    CompMap::Ray { tail: Tail::Const { point }, .. } => Track::Const { point: point.clone() },
                    CompMap::Pt(_) => unreachable!("tracks run along rays"),
                };
                (m, out)
            }
        }
    }

    pub fn check_source(&self, space: &Space) -> Result<()> {
        if &self.source != space {
            return Err(CoarseError::SpaceMismatch("map source differs from the expected space".into()));
        }
        Ok(())
    }

    pub fn check_target(&self, space: &Space) -> Result<()> {
        if &self.target != space {
            return Err(CoarseError::SpaceMismatch("map target differs from the expected space".into()));
        }
        Ok(())
    }
}

impl fmt::Debug for EAMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EAMap{{")?;
        for (i, (id, m)) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match m {
                CompMap::Pt(p) => write!(f, "{id} ↦ {p:?}")?,
                CompMap::Ray { table, tail } => {
                    write!(f, "{id}: {table:?} then ")?;
                    match tail {
                        Tail::Affine { a, b, dst } => write!(f, "{dst}:{a}i{b:+}")?,
                        Tail::Const { point } => write!(f, "{point:?}")?,
                    }
                }
            }
        }
        write!(f, "}}")
    }
}

/// Pushes one piece through `(f, g)`, returning canonical pieces.
pub fn push_piece(f: &EAMap, g: &EAMap, piece: &Piece) -> Vec<Piece> {
    let target = f.target();
    match piece {
        Piece::Rect(r) => {
            let l = f.image_set(&r.left).expect("piece lives in the source");
            let rr = g.image_set(&r.right).expect("piece lives in the source");
            normalize_piece(Piece::Rect(Rect { left: l, right: rr }), target)
        }
        Piece::Family(fam) => {
            let (m1, s2) = f.compose_track(&fam.src);
            let (m2, t2) = g.compose_track(&fam.dst);
            let m = m1.max(m2);
            let mut out = Vec::new();
            for i in fam.support.enumerate(m.saturating_sub(1)) {
                if i < m {
                    let (x, y) = fam.pair(i).expect("support lies in the track domains");
                    out.push(Piece::single(target, &f.at(&x), &g.at(&y)));
                }
            }
            let tail = Family::new(s2, t2, fam.support.intersect(&UpSet::from(m)));
            out.extend(normalize_piece(Piece::Family(tail), target));
            out
        }
    }
}

/// The symbolic image `(f × g)(F)`.
#[derive(Clone, Debug)]
pub struct PairImage {
    pub f: EAMap,
    pub g: EAMap,
    pub rel: Relation,
}

impl PairImage {
    pub fn new(f: &EAMap, g: &EAMap, rel: &Relation) -> Result<PairImage> {
        if f.source() != g.source() || f.target() != g.target() {
            return Err(CoarseError::SpaceMismatch("pair image needs maps with equal sources and targets".into()));
        }
        rel.check_in(f.source())?;
        Ok(PairImage { f: f.clone(), g: g.clone(), rel: rel.clone() })
    }

    pub fn target(&self) -> &Space {
        self.f.target()
    }

    /// Exact decomposition of the image into canonical pieces.
    pub fn pieces(&self) -> Vec<Piece> {
        pieces_of(&self.rel).iter().flat_map(|p| push_piece(&self.f, &self.g, p)).collect()
    }

    /// The image as a relation, when no piece is sheared.
    pub fn to_relation(&self) -> Result<Relation> {
        let mut out = Relation::empty();
        for p in self.pieces() {
            match p.to_relation() {
                Some(r) => out = out.union(&r),
                None => return Err(CoarseError::NotRepresentable(format!("{p:?}"))),
            }
        }
        Ok(out)
    }

    /// Does the image set satisfy the properness axiom?
    pub fn is_proper_set(&self) -> Verdict {
        for p in self.pieces() {
            if let Piece::Rect(r) = &p {
                if !r.left.is_finite() {
                    return Verdict::Out(Witness::InfiniteFiber { point: r.right.some_point().expect("nonempty"), side: Side::Right });
                }
                if !r.right.is_finite() {
                    return Verdict::Out(Witness::InfiniteFiber { point: r.left.some_point().expect("nonempty"), side: Side::Left });
                }
            }
        }
        Verdict::In(Certificate::Proper)
    }

    /// Is `F → X×X, (y, y′) ↦ (f y, g y′)` a proper map?
    pub fn restriction_proper(&self) -> Verdict {
        for b in self.rel.bands() {
            let fam = Family::of_band(&b.src, &b.dst, b.offset, &b.support);
            let (m1, s2) = self.f.compose_track(&fam.src);
            let (m2, t2) = self.g.compose_track(&fam.dst);
            if let (Track::Const { point: x }, Track::Const { point: y }) = (&s2, &t2) {
                if !fam.support.intersect(&UpSet::from(m1.max(m2))).is_finite() {
                    return Verdict::Out(Witness::InfinitePreimage { target: (x.clone(), y.clone()) });
                }
            }
        }
        for r in self.rel.rects() {
            for (side, map, other_map, s, other) in [(0, &self.f, &self.g, &r.left, &r.right), (1, &self.g, &self.f, &r.right, &r.left)] {
                for (ray, point) in map.const_tails() {
                    if !s.ray(&ray).intersect(&UpSet::from(map.threshold(&ray))).is_finite() {
                        let q = other.some_point().expect("nonempty");
                        let q = other_map.at(&q);
                        let target = if side == 0 { (point, q) } else { (q, point) };
                        return Verdict::Out(Witness::InfinitePreimage { target });
                    }
                }
            }
        }
        Verdict::In(Certificate::Proper)
    }

    pub fn supports(&self) -> Result<(PointSet, PointSet)> {
        Ok((self.f.image_set(&self.rel.left_support())?, self.g.image_set(&self.rel.right_support())?))
    }
}

/// Local properness of `f` for `F`: the image `f^×2(F)` is proper and the
/// restriction of `f^×2` to `F` is a proper map.
pub fn locally_proper_for(f: &EAMap, rel: &Relation) -> Result<Verdict> {
    let pi = PairImage::new(f, f, rel)?;
    let a = pi.is_proper_set();
    if !a.is_in() {
        return Ok(a.context("image of F violates the properness axiom"));
    }
    Ok(pi.restriction_proper().context("restriction of f×f to F is not proper"))
}

/// `f` restricted to each support of `F` is proper.
pub fn locally_proper_by_supports(f: &EAMap, rel: &Relation) -> Verdict {
    let l = f.proper_on(&rel.left_support());
    if !l.is_in() {
        return l;
    }
    f.proper_on(&rel.right_support())
}

/// `f⁻¹(S)·F` and `F·f⁻¹(S)` are finite for every finite probe `S`. Only
/// points with infinite preimage can fail, so the constant tails together
/// with target points up to `window` form an exhaustive probe family.
pub fn locally_proper_by_probes(f: &EAMap, rel: &Relation, window: u64) -> Verdict {
    let mut probes: Vec<Point> = f.const_tails().into_iter().map(|(_, p)| p).collect();
    probes.extend(f.target().points_upto(window.min(16)));
    for s in probes {
        let pre = f.preimage_set(&point_set(f.target(), &s)).expect("probe lies in the target");
        if !rel.right_nbhd(&pre).is_finite() {
            return Verdict::Out(Witness::InfiniteFiber { point: s, side: Side::Left });
        }
        if !rel.left_nbhd(&pre).is_finite() {
            return Verdict::Out(Witness::InfiniteFiber { point: s, side: Side::Right });
        }
    }
    Verdict::In(Certificate::Proper)
}
