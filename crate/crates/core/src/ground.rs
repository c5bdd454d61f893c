//! Ground sets: finite disjoint unions of rays (copies of ℕ) and points.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CoarseError, Result};
use crate::upset::UpSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ray,
    Pt,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    pub kind: Kind,
    pub id: String,
}

impl Component {
    pub fn ray(id: impl Into<String>) -> Self {
        Component { kind: Kind::Ray, id: id.into() }
    }

    pub fn pt(id: impl Into<String>) -> Self {
        Component { kind: Kind::Pt, id: id.into() }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct Space(Arc<Vec<Component>>);

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    components: Vec<Component>,
}

impl TryFrom<SpaceRepr> for Space {
    type Error = CoarseError;

    fn try_from(r: SpaceRepr) -> Result<Space> {
        Space::new(r.components)
    }
}

impl From<Space> for SpaceRepr {
    fn from(s: Space) -> SpaceRepr {
        SpaceRepr { components: s.0.as_ref().clone() }
    }
}

impl Space {
    pub fn new(components: Vec<Component>) -> Result<Space> {
        let mut seen = BTreeSet::new();
        for c in &components {
            if c.id.is_empty() {
                return Err(CoarseError::Invalid("empty component id".into()));
            }
            if !seen.insert(c.id.clone()) {
                return Err(CoarseError::Invalid(format!("duplicate component id `{}`", c.id)));
            }
        }
        Ok(Space(Arc::new(components)))
    }

    pub fn empty() -> Space {
        Space(Arc::new(Vec::new()))
    }

    /// One ray called `r0`.
    pub fn ray() -> Space {
        Space::rays(1)
    }

    /// Rays `r0..r{n-1}`.
    pub fn rays(n: usize) -> Space {
        Space(Arc::new((0..n).map(|i| Component::ray(format!("r{i}"))).collect()))
    }

    /// Points `p0..p{n-1}`.
    pub fn points(n: usize) -> Space {
        Space(Arc::new((0..n).map(|i| Component::pt(format!("p{i}"))).collect()))
    }

    pub fn components(&self) -> &[Component] {
        &self.0
    }

    pub fn kind(&self, id: &str) -> Option<Kind> {
        self.0.iter().find(|c| c.id == id).map(|c| c.kind)
    }

    pub fn has_ray(&self, id: &str) -> bool {
        self.kind(id) == Some(Kind::Ray)
    }

    pub fn has_pt(&self, id: &str) -> bool {
        self.kind(id) == Some(Kind::Pt)
    }

    pub fn ray_ids(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter(|c| c.kind == Kind::Ray).map(|c| c.id.as_str())
    }

    pub fn pt_ids(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter(|c| c.kind == Kind::Pt).map(|c| c.id.as_str())
    }

    pub fn is_finite(&self) -> bool {
        self.ray_ids().next().is_none()
    }

    pub fn all(&self) -> PointSet {
        PointSet {
            rays: self.ray_ids().map(|r| (r.to_string(), UpSet::all())).collect(),
            pts: self.pt_ids().map(str::to_string).collect(),
        }
    }

    /// Every point with index `≤ bound`.
    pub fn ball(&self, bound: u64) -> PointSet {
        PointSet {
            rays: self.ray_ids().map(|r| (r.to_string(), UpSet::range(0, bound))).collect(),
            pts: self.pt_ids().map(str::to_string).collect(),
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        match self.kind(&x.comp) {
            Some(Kind::Ray) => Ok(()),
            Some(Kind::Pt) if x.index == 0 => Ok(()),
            Some(Kind::Pt) => Err(CoarseError::SpaceMismatch(format!("point component `{}` only has index 0", x.comp))),
            None => Err(CoarseError::SpaceMismatch(format!("unknown component `{}`", x.comp))),
        }
    }

    pub fn check_set(&self, s: &PointSet) -> Result<()> {
        for r in s.rays.keys() {
            if !self.has_ray(r) {
                return Err(CoarseError::SpaceMismatch(format!("`{r}` is not a ray of the space")));
            }
        }
        for p in &s.pts {
            if !self.has_pt(p) {
                return Err(CoarseError::SpaceMismatch(format!("`{p}` is not a point component of the space")));
            }
        }
        Ok(())
    }

    pub fn singleton(&self, x: &Point) -> Result<PointSet> {
        self.check_point(x)?;
        Ok(if self.has_pt(&x.comp) { PointSet::pt(&x.comp) } else { PointSet::on_ray(&x.comp, UpSet::singleton(x.index)) })
    }

    /// Enumerates points of the space with index `≤ bound`.
    pub fn points_upto(&self, bound: u64) -> Vec<Point> {
        let mut out = Vec::new();
        for c in self.components() {
            match c.kind {
                Kind::Pt => out.push(Point::new(&c.id, 0)),
                Kind::Ray => out.extend((0..=bound).map(|i| Point::new(&c.id, i))),
            }
        }
        out
    }

    /// Disjoint union with components renamed `{tag}.{id}`.
    pub fn tagged(&self, tag: &str) -> Space {
        Space(Arc::new(self.0.iter().map(|c| Component { kind: c.kind, id: format!("{tag}.{}", c.id) }).collect()))
    }

    pub fn concat(parts: &[Space]) -> Result<Space> {
        Space::new(parts.iter().flat_map(|s| s.components().iter().cloned()).collect())
    }
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .0
            .iter()
            .map(|c| match c.kind {
                Kind::Ray => format!("ray {}", c.id),
                Kind::Pt => format!("pt {}", c.id),
            })
            .collect();
        write!(f, "Space[{}]", names.join(", "))
    }
}

/// Serialized as `{"component": id, "index": i}`; `"id:i"` and `"id"` are
/// accepted on input.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PointRepr")]
pub struct Point {
    #[serde(rename = "component")]
    pub comp: String,
    #[serde(default)]
    pub index: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Short(String),
    Full {
        component: String,
        #[serde(default)]
        index: u64,
    },
}

impl TryFrom<PointRepr> for Point {
    type Error = String;

    fn try_from(r: PointRepr) -> std::result::Result<Point, String> {
        match r {
            PointRepr::Full { component, index } => Ok(Point { comp: component, index }),
            PointRepr::Short(s) => s.parse(),
        }
    }
}

impl std::str::FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Point, String> {
        match s.rsplit_once(':') {
            Some((c, i)) if !c.is_empty() => {
                let index = i.trim().parse().map_err(|_| format!("bad point index in `{s}`"))?;
                Ok(Point::new(c.trim(), index))
            }
            _ if !s.trim().is_empty() => Ok(Point::new(s.trim(), 0)),
            _ => Err("empty point".to_string()),
        }
    }
}

impl Point {
    pub fn new(comp: &str, index: u64) -> Point {
        Point { comp: comp.to_string(), index }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.comp, self.index)
    }
}

/// A subset of a ground set: an [`UpSet`] per ray plus a set of point
/// components. Canonical: rays with empty sets are omitted.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointSet {
    #[serde(default)]
    rays: BTreeMap<String, UpSet>,
    #[serde(default)]
    pts: BTreeSet<String>,
}

impl PointSet {
    pub fn empty() -> Self {
        PointSet::default()
    }

    pub fn on_ray(ray: &str, set: UpSet) -> Self {
        let mut s = PointSet::default();
        s.set_ray(ray, set);
        s
    }

    pub fn pt(id: &str) -> Self {
        PointSet { rays: BTreeMap::new(), pts: [id.to_string()].into() }
    }

    pub fn from_parts(rays: impl IntoIterator<Item = (String, UpSet)>, pts: impl IntoIterator<Item = String>) -> Self {
        let mut s = PointSet { rays: BTreeMap::new(), pts: pts.into_iter().collect() };
        for (r, u) in rays {
            let merged = s.ray(&r).union(&u);
            s.set_ray(&r, merged);
        }
        s
    }

    fn set_ray(&mut self, ray: &str, set: UpSet) {
        if set.is_empty() {
            self.rays.remove(ray);
        } else {
            self.rays.insert(ray.to_string(), set);
        }
    }

    /// Adds a point; `is_pt` says whether its component is a point component.
    pub fn insert(&mut self, x: &Point, is_pt: bool) {
        if is_pt {
            self.pts.insert(x.comp.clone());
        } else {
            let s = self.ray(&x.comp).union(&UpSet::singleton(x.index));
            self.set_ray(&x.comp, s);
        }
    }

    pub fn rays(&self) -> &BTreeMap<String, UpSet> {
        &self.rays
    }

    pub fn pts(&self) -> &BTreeSet<String> {
        &self.pts
    }

    pub fn ray(&self, id: &str) -> UpSet {
        self.rays.get(id).cloned().unwrap_or_else(UpSet::empty)
    }

    pub fn has_pt(&self, id: &str) -> bool {
        self.pts.contains(id)
    }

    pub fn contains(&self, x: &Point) -> bool {
        if let Some(s) = self.rays.get(&x.comp) {
            return s.contains(x.index);
        }
        x.index == 0 && self.pts.contains(&x.comp)
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty() && self.pts.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.rays.values().all(UpSet::is_finite)
    }

    fn zip(&self, other: &PointSet, op: impl Fn(&UpSet, &UpSet) -> UpSet, pop: impl Fn(bool, bool) -> bool) -> PointSet {
        let mut out = PointSet::default();
        let keys: BTreeSet<&String> = self.rays.keys().chain(other.rays.keys()).collect();
        for k in keys {
            out.set_ray(k, op(&self.ray(k), &other.ray(k)));
        }
        let pk: BTreeSet<&String> = self.pts.iter().chain(other.pts.iter()).collect();
        for p in pk {
            if pop(self.pts.contains(p), other.pts.contains(p)) {
                out.pts.insert(p.clone());
            }
        }
        out
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        self.zip(other, UpSet::union, |a, b| a || b)
    }

    pub fn intersect(&self, other: &PointSet) -> PointSet {
        self.zip(other, UpSet::intersect, |a, b| a && b)
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        self.zip(other, UpSet::difference, |a, b| a && !b)
    }

    pub fn complement_in(&self, space: &Space) -> PointSet {
        space.all().difference(self)
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        self.intersect(other).is_empty()
    }

    /// Points with index `≤ bound`.
    pub fn enumerate(&self, bound: u64) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for (r, s) in &self.rays {
            out.extend(s.enumerate(bound).into_iter().map(|i| Point::new(r, i)));
        }
        out.extend(self.pts.iter().map(|p| Point::new(p, 0)));
        out
    }

    /// All points of a finite set.
    pub fn elements(&self) -> Option<Vec<Point>> {
        let mut out = Vec::new();
        for (r, s) in &self.rays {
            out.extend(s.elements()?.iter().map(|&i| Point::new(r, i)));
        }
        out.extend(self.pts.iter().map(|p| Point::new(p, 0)));
        Some(out)
    }

    /// Some member, preferring small indices.
    pub fn some_point(&self) -> Option<Point> {
        if let Some(p) = self.pts.iter().next() {
            return Some(Point::new(p, 0));
        }
        self.rays.iter().next().and_then(|(r, s)| s.first().map(|i| Point::new(r, i)))
    }

    /// Some ray with an infinite part, together with that part.
    pub fn infinite_ray(&self) -> Option<(&str, &UpSet)> {
        self.rays.iter().find(|(_, s)| !s.is_finite()).map(|(r, s)| (r.as_str(), s))
    }

    /// The finite part obtained by dropping every infinite ray entry.
    pub fn restrict_rays(&self, keep: impl Fn(&str) -> bool) -> PointSet {
        PointSet {
            rays: self.rays.iter().filter(|(r, _)| keep(r)).map(|(r, s)| (r.clone(), s.clone())).collect(),
            pts: self.pts.clone(),
        }
    }

    /// Keeps the components (rays and points) selected by `keep`.
    pub fn restrict_comps(&self, keep: impl Fn(&str) -> bool) -> PointSet {
        PointSet {
            rays: self.rays.iter().filter(|(r, _)| keep(r)).map(|(r, s)| (r.clone(), s.clone())).collect(),
            pts: self.pts.iter().filter(|p| keep(p)).cloned().collect(),
        }
    }

    /// Renames every component with `f`.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> PointSet {
        PointSet {
            rays: self.rays.iter().map(|(r, s)| (f(r), s.clone())).collect(),
            pts: self.pts.iter().map(|p| f(p)).collect(),
        }
    }

    pub fn max_threshold(&self) -> u64 {
        self.rays.values().map(UpSet::threshold).max().unwrap_or(0)
    }

    pub fn periods(&self) -> impl Iterator<Item = u64> + '_ {
        self.rays.values().map(UpSet::period)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.rays.iter().map(|(r, s)| format!("{r}:{s}")).collect();
        parts.extend(self.pts.iter().cloned());
        write!(f, "{{{}}}", parts.join(", "))
    }
}
