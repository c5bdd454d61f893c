//! Coarse structures as descriptor trees with exact membership.
//!
//! Each catalog constructor is summarised by a handful of exact sets:
//! its carrier, its unital core (the largest unital subset), near cores
//! (the largest set near a given target), connectivity, and for a pair of
//! tracks `(σ, τ)` the parameter core `C` such that a family over `A`
//! is a member iff `A ∖ C` is finite and its pairs are connected.
//! Membership, closeness, equalizer carriers, and most comparisons reduce
//! to these.

mod check;
mod compare;
mod join;
mod member;
mod metric;

use serde::{Deserialize, Serialize};

pub use check::{check_certificate, check_pieces, confirm_pieces_witness, confirm_separation, confirm_witness};
pub use compare::{sigma_filtration, Gen};
pub use metric::Cluster;

use crate::coarsemap::{CompMap, EAMap, Family, Tail, Track};
use crate::entourage::Relation;
use crate::error::{CoarseError, Result};
use crate::ground::{Point, PointSet, Space};
use crate::upset::UpSet;

pub const DEFAULT_DEPTH: usize = 3;

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summand {
    pub tag: String,
    pub structure: Structure,
}

/// A coarse structure on a banded ground set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    /// All relations satisfying the properness axiom.
    Terminal { space: Space },
    /// Bounded-width relations for the path metric of glued rays.
    Metric {
        space: Space,
        #[serde(default)]
        clusters: Vec<Cluster>,
    },
    /// Subsets of `1_S`, `S` finite.
    Initial { space: Space },
    /// Finite relations.
    InitialConn { space: Space },
    /// Subsets of `1_X`.
    InitialUnital { space: Space },
    /// Subsets of `1_X ∪ K`, `K` finite.
    InitialConnUni { space: Space },
    Subspace {
        parent: Box<Structure>,
        #[serde(rename = "S")]
        set: PointSet,
    },
    /// The largest structure making `map` coarse into `parent`.
    Pullback { map: EAMap, parent: Box<Structure> },
    /// Members of both pullbacks on which `f` and `g` are close.
    EqPullback { f: EAMap, g: EAMap, parent: Box<Structure> },
    /// Proper relations whose supports are unital in the parent.
    Termination { parent: Box<Structure> },
    /// Parent members whose supports are near `S`.
    Ideal {
        parent: Box<Structure>,
        #[serde(rename = "S")]
        set: PointSet,
    },
    /// Generated by the parent and all proper relations on `Y` (unital).
    Quotient {
        parent: Box<Structure>,
        #[serde(rename = "Y")]
        set: PointSet,
    },
    /// Generated by the parent and `gens`.
    Join {
        parent: Box<Structure>,
        gens: Vec<Relation>,
        #[serde(default = "default_depth")]
        depth: usize,
    },
    /// Parent members plus finite relations.
    Connect { parent: Box<Structure> },
    /// Disjoint union; components are renamed `{tag}.{id}`.
    Sum { parts: Vec<Summand> },
    /// Intersection of two structures on one space.
    Meet { a: Box<Structure>, b: Box<Structure> },
}

/// Connectivity classes: each block is connected, each point of `singles`
/// is connected only to itself.
#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub blocks: Vec<PointSet>,
    pub singles: PointSet,
}

impl Blocks {
    fn block_of(&self, x: &Point) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(x))
    }

    pub fn connected(&self, x: &Point, y: &Point) -> bool {
        match (self.block_of(x), self.block_of(y)) {
            (Some(a), Some(b)) => a == b,
            (None, None) => x == y && self.singles.contains(x),
            _ => false,
        }
    }

    /// Is `t` contained in a single class?
    pub fn within_one(&self, t: &PointSet) -> bool {
        if t.is_empty() {
            return true;
        }
        if self.blocks.iter().any(|b| t.is_subset(b)) {
            return true;
        }
        t.is_subset(&self.singles) && t.elements().is_some_and(|e| e.len() == 1)
    }

    /// Two points of `t` in different classes, if any.
    pub fn split_pair(&self, t: &PointSet) -> Option<(Point, Point)> {
        let mut reps: Vec<Point> = Vec::new();
        for b in &self.blocks {
            if let Some(x) = b.intersect(t).some_point() {
                reps.push(x);
            }
        }
        // Two periods past the threshold hold at least two elements of any
        // infinite set.
        let s = self.singles.intersect(t);
        let p = s.periods().max().unwrap_or(1);
        reps.extend(s.enumerate(s.max_threshold() + 2 * p + 2));
        let outside = t.difference(&self.blocks.iter().fold(self.singles.clone(), |a, b| a.union(b)));
        if let Some(x) = outside.some_point() {
            reps.push(x);
        }
        if reps.len() >= 2 {
            Some((reps[0].clone(), reps[1].clone()))
        } else {
            None
        }
    }

    pub fn hull(&self, t: &PointSet) -> PointSet {
        let mut out = self.singles.intersect(t);
        for b in &self.blocks {
            if !b.is_disjoint(t) {
                out = out.union(b);
            }
        }
        out
    }

    /// Parameters `i` with `σ(i)` connected to `τ(i)`.
    pub fn connected_params(&self, sigma: &Track, tau: &Track) -> UpSet {
        let mut out = sigma.preimage(&self.singles).intersect(&sigma.agree(tau));
        for b in &self.blocks {
            out = out.union(&sigma.preimage(b).intersect(&tau.preimage(b)));
        }
        out
    }
}

pub(crate) fn unsupported(what: &str) -> CoarseError {
    CoarseError::Unsupported(what.to_string())
}

/// Source points not swallowed by a constant tail.
pub(crate) fn affine_part(g: &EAMap) -> PointSet {
    let mut rays = Vec::new();
    for c in g.source().components() {
        if let Some(CompMap::Ray { table, tail }) = g.comp(&c.id) {
            let s = match tail {
                Tail::Affine { .. } => UpSet::all(),
                Tail::Const { .. } => UpSet::range(0, table.len() as u64).difference(&UpSet::singleton(table.len() as u64)),
            };
            rays.push((c.id.clone(), s));
        }
    }
    PointSet::from_parts(rays, g.source().pt_ids().map(str::to_string))
}

pub(crate) fn rename_track(t: &Track, f: &dyn Fn(&str) -> String) -> Track {
    match t {
        Track::Affine { ray, a, b } => Track::Affine { ray: f(ray), a: *a, b: *b },
        Track::Const { point } => Track::Const { point: Point::new(&f(&point.comp), point.index) },
    }
}

fn track_comp(t: &Track) -> &str {
    match t {
        Track::Affine { ray, .. } => ray,
        Track::Const { point } => &point.comp,
    }
}

impl Structure {
    pub fn terminal(space: &Space) -> Structure {
        Structure::Terminal { space: space.clone() }
    }

    /// One cluster holding every component.
    pub fn metric(space: &Space) -> Structure {
        Structure::Metric { space: space.clone(), clusters: Vec::new() }
    }

    pub fn metric_clusters(space: &Space, clusters: Vec<Cluster>) -> Result<Structure> {
        let d = Structure::Metric { space: space.clone(), clusters };
        d.validate()?;
        Ok(d)
    }

    pub fn initial(space: &Space) -> Structure {
        Structure::Initial { space: space.clone() }
    }

    pub fn initial_conn(space: &Space) -> Structure {
        Structure::InitialConn { space: space.clone() }
    }

    pub fn initial_unital(space: &Space) -> Structure {
        Structure::InitialUnital { space: space.clone() }
    }

    pub fn initial_conn_uni(space: &Space) -> Structure {
        Structure::InitialConnUni { space: space.clone() }
    }

    pub fn subspace(parent: Structure, set: PointSet) -> Result<Structure> {
        parent.space().check_set(&set)?;
        Ok(Structure::Subspace { parent: Box::new(parent), set })
    }

    pub fn pullback(map: EAMap, parent: Structure) -> Result<Structure> {
        map.check_target(&parent.space())?;
        Ok(Structure::Pullback { map, parent: Box::new(parent) })
    }

    pub fn eq_pullback(f: EAMap, g: EAMap, parent: Structure) -> Result<Structure> {
        f.check_target(&parent.space())?;
        g.check_target(&parent.space())?;
        g.check_source(f.source())?;
        Ok(Structure::EqPullback { f, g, parent: Box::new(parent) })
    }

    pub fn termination(parent: Structure) -> Structure {
        Structure::Termination { parent: Box::new(parent) }
    }

    pub fn ideal(parent: Structure, set: PointSet) -> Result<Structure> {
        parent.space().check_set(&set)?;
        Ok(Structure::Ideal { parent: Box::new(parent), set })
    }

    /// Requires `1_Y` to be a member of the parent.
    pub fn quotient(parent: Structure, set: PointSet) -> Result<Structure> {
        parent.space().check_set(&set)?;
        let v = parent.contains(&Relation::local_unit(&set))?;
        if !v.is_in() {
            return Err(CoarseError::NotUnitalSubspace(format!("{set:?}")));
        }
        Ok(Structure::Quotient { parent: Box::new(parent), set })
    }

    pub fn join(parent: Structure, gens: Vec<Relation>, depth: usize) -> Result<Structure> {
        let space = parent.space();
        for g in &gens {
            g.check_in(&space)?;
        }
        Ok(Structure::Join { parent: Box::new(parent), gens, depth })
    }

    pub fn connect(parent: Structure) -> Structure {
        Structure::Connect { parent: Box::new(parent) }
    }

    pub fn sum(parts: Vec<(String, Structure)>) -> Result<Structure> {
        let d = Structure::Sum { parts: parts.into_iter().map(|(tag, structure)| Summand { tag, structure }).collect() };
        d.validate()?;
        Ok(d)
    }

    pub fn meet(a: Structure, b: Structure) -> Result<Structure> {
        if a.space() != b.space() {
            return Err(CoarseError::SpaceMismatch("meet of structures on different spaces".into()));
        }
        Ok(Structure::Meet { a: Box::new(a), b: Box::new(b) })
    }

    /// Checks that every part is typed against the right space.
    pub fn validate(&self) -> Result<()> {
        match self {
            Structure::Terminal { .. }
            | Structure::Initial { .. }
            | Structure::InitialConn { .. }
            | Structure::InitialUnital { .. }
            | Structure::InitialConnUni { .. } => Ok(()),
            Structure::Metric { space, clusters } => metric::validate(space, clusters),
            Structure::Subspace { parent, set } | Structure::Ideal { parent, set } => {
                parent.validate()?;
                parent.space().check_set(set)
            }
            Structure::Quotient { parent, set } => {
                parent.validate()?;
                parent.space().check_set(set)?;
                if !parent.contains(&Relation::local_unit(set))?.is_in() {
                    return Err(CoarseError::NotUnitalSubspace(format!("{set:?}")));
                }
                Ok(())
            }
            Structure::Pullback { map, parent } => {
                parent.validate()?;
                map.check_target(&parent.space())
            }
            Structure::EqPullback { f, g, parent } => {
                parent.validate()?;
                f.check_target(&parent.space())?;
                g.check_target(&parent.space())?;
                g.check_source(f.source())
            }
            Structure::Termination { parent } | Structure::Connect { parent } => parent.validate(),
            Structure::Join { parent, gens, .. } => {
                parent.validate()?;
                let s = parent.space();
                gens.iter().try_for_each(|g| g.check_in(&s))
            }
            Structure::Sum { parts } => {
                for p in parts {
                    p.structure.validate()?;
                    if p.tag.is_empty() || p.tag.contains('.') {
                        return Err(CoarseError::Invalid(format!("bad summand tag `{}`", p.tag)));
                    }
                }
                Space::concat(&parts.iter().map(|p| p.structure.space().tagged(&p.tag)).collect::<Vec<_>>()).map(|_| ())
            }
            Structure::Meet { a, b } => {
                a.validate()?;
                b.validate()?;
                if a.space() != b.space() {
                    return Err(CoarseError::SpaceMismatch("meet of structures on different spaces".into()));
                }
                Ok(())
            }
        }
    }

    pub fn space(&self) -> Space {
        match self {
            Structure::Terminal { space }
            | Structure::Metric { space, .. }
            | Structure::Initial { space }
            | Structure::InitialConn { space }
            | Structure::InitialUnital { space }
            | Structure::InitialConnUni { space } => space.clone(),
            Structure::Subspace { parent, .. }
            | Structure::Termination { parent }
            | Structure::Ideal { parent, .. }
            | Structure::Quotient { parent, .. }
            | Structure::Join { parent, .. }
            | Structure::Connect { parent } => parent.space(),
            Structure::Pullback { map, .. } => map.source().clone(),
            Structure::EqPullback { f, .. } => f.source().clone(),
            Structure::Sum { parts } => Space::concat(&parts.iter().map(|p| p.structure.space().tagged(&p.tag)).collect::<Vec<_>>()).expect("validated sum"),
            Structure::Meet { a, .. } => a.space(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Structure::Terminal { .. } => "terminal",
            Structure::Metric { .. } => "metric",
            Structure::Initial { .. } => "initial",
            Structure::InitialConn { .. } => "initial_conn",
            Structure::InitialUnital { .. } => "initial_unital",
            Structure::InitialConnUni { .. } => "initial_conn_uni",
            Structure::Subspace { .. } => "subspace",
            Structure::Pullback { .. } => "pullback",
            Structure::EqPullback { .. } => "eq_pullback",
            Structure::Termination { .. } => "termination",
            Structure::Ideal { .. } => "ideal",
            Structure::Quotient { .. } => "quotient",
            Structure::Join { .. } => "join",
            Structure::Connect { .. } => "connect",
            Structure::Sum { .. } => "sum",
            Structure::Meet { .. } => "meet",
        }
    }

    // ---- coproduct plumbing ----

    pub(crate) fn part_of(parts: &[Summand], comp: &str) -> Option<usize> {
        parts.iter().position(|p| comp.strip_prefix(&p.tag).is_some_and(|rest| rest.starts_with('.')))
    }

    pub(crate) fn strip(tag: &str, comp: &str) -> String {
        comp[tag.len() + 1..].to_string()
    }

    pub(crate) fn to_part(parts: &[Summand], j: usize, s: &PointSet) -> PointSet {
        let tag = &parts[j].tag;
        let keep = |c: &str| Structure::part_of(parts, c) == Some(j);
        let rays = s.rays().iter().filter(|(r, _)| keep(r)).map(|(r, u)| (Structure::strip(tag, r), u.clone()));
        let pts = s.pts().iter().filter(|p| keep(p)).map(|p| Structure::strip(tag, p));
        PointSet::from_parts(rays, pts)
    }

    pub(crate) fn from_part(parts: &[Summand], j: usize, s: &PointSet) -> PointSet {
        let tag = &parts[j].tag;
        s.rename(|c| format!("{tag}.{c}"))
    }

    pub(crate) fn point_to_part(parts: &[Summand], x: &Point) -> Option<(usize, Point)> {
        let j = Structure::part_of(parts, &x.comp)?;
        Some((j, Point::new(&Structure::strip(&parts[j].tag, &x.comp), x.index)))
    }

    pub(crate) fn track_to_part(parts: &[Summand], t: &Track) -> Option<(usize, Track)> {
        let j = Structure::part_of(parts, track_comp(t))?;
        let tag = parts[j].tag.clone();
        Some((j, rename_track(t, &|c| Structure::strip(&tag, c))))
    }

    // ---- exact summaries ----

    /// Points `x` with `1_x` a member.
    pub fn carrier(&self) -> Result<PointSet> {
        Ok(match self {
            Structure::Terminal { space }
            | Structure::Metric { space, .. }
            | Structure::Initial { space }
            | Structure::InitialConn { space }
            | Structure::InitialUnital { space }
            | Structure::InitialConnUni { space } => space.all(),
            Structure::Subspace { parent, set } => parent.carrier()?.intersect(set),
            Structure::Pullback { map, parent } => map.preimage_set(&parent.carrier()?)?,
            Structure::EqPullback { f, g, parent } => {
                let c = parent.carrier()?;
                let both = f.preimage_set(&c)?.intersect(&g.preimage_set(&c)?);
                both.intersect(&parent.close_set(f, g)?)
            }
            Structure::Termination { parent } | Structure::Quotient { parent, .. } => parent.carrier()?,
            Structure::Ideal { parent, set } => parent.carrier()?.intersect(&parent.hull(set)?),
            Structure::Join { parent, gens, .. } => {
                let mut c = parent.carrier()?;
                for g in gens {
                    c = c.union(&g.left_support()).union(&g.right_support());
                }
                c
            }
            Structure::Connect { parent } => parent.space().all(),
            Structure::Sum { parts } => {
                let mut out = PointSet::empty();
                for (j, p) in parts.iter().enumerate() {
                    out = out.union(&Structure::from_part(parts, j, &p.structure.carrier()?));
                }
                out
            }
            Structure::Meet { a, b } => a.carrier()?.intersect(&b.carrier()?),
        })
    }

    /// `{ y : f(y) connected to g(y) }`.
    pub fn close_set(&self, f: &EAMap, g: &EAMap) -> Result<PointSet> {
        let mut rays = Vec::new();
        let mut pts = Vec::new();
        for c in f.source().components() {
            match (f.comp(&c.id), g.comp(&c.id)) {
                (Some(CompMap::Pt(x)), Some(CompMap::Pt(y))) => {
                    if self.connected(x, y)? {
                        pts.push(c.id.clone());
                    }
                }
                _ => {
                    rays.push((c.id.clone(), self.connected_set(f, g, &c.id)?));
                }
            }
        }
        Ok(PointSet::from_parts(rays, pts))
    }

    /// Indices `i` on `ray` with `f(ray, i)` connected to `g(ray, i)`.
    pub fn connected_set(&self, f: &EAMap, g: &EAMap, ray: &str) -> Result<UpSet> {
        let t = f.threshold(ray).max(g.threshold(ray));
        let (m1, s) = f.compose_track(&Track::id(ray));
        let (m2, u) = g.compose_track(&Track::id(ray));
        let m = t.max(m1).max(m2);
        let mut head = Vec::new();
        for i in 0..m {
            let x = Point::new(ray, i);
            if self.connected(&f.apply(&x)?, &g.apply(&x)?)? {
                head.push(i);
            }
        }
        let tail = match self.blocks()? {
            Some(b) => b.connected_params(&s, &u),
            None => return Err(unsupported(&format!("connectivity classes of a {} structure", self.name()))),
        };
        Ok(UpSet::finite(head).union(&tail.intersect(&UpSet::from(m))))
    }

    /// Is `{(x, y)}` a member?
    pub fn connected(&self, x: &Point, y: &Point) -> Result<bool> {
        Ok(match self {
            Structure::Terminal { .. } | Structure::InitialConn { .. } | Structure::InitialConnUni { .. } => true,
            Structure::Connect { .. } => true,
            Structure::Metric { space, clusters } => metric::distance(space, clusters, x, y).is_some(),
            Structure::Initial { .. } | Structure::InitialUnital { .. } => x == y,
            Structure::Subspace { parent, set } => set.contains(x) && set.contains(y) && parent.connected(x, y)?,
            Structure::Pullback { map, parent } => parent.connected(&map.apply(x)?, &map.apply(y)?)?,
            Structure::EqPullback { f, g, parent } => {
                let (fx, fy, gx, gy) = (f.apply(x)?, f.apply(y)?, g.apply(x)?, g.apply(y)?);
                parent.connected(&fx, &fy)? && parent.connected(&gx, &gy)? && parent.connected(&fx, &gy)?
            }
            Structure::Termination { parent } => {
                let c = parent.carrier()?;
                c.contains(x) && c.contains(y)
            }
            Structure::Ideal { parent, set } => parent.connected(x, y)? && parent.hull(set)?.contains(x),
            Structure::Quotient { parent, set } => {
                if parent.connected(x, y)? {
                    true
                } else {
                    let h = parent.hull(set)?;
                    h.contains(x) && h.contains(y)
                }
            }
            Structure::Join { parent, .. } => {
                if self.join_is_trivial()? {
                    parent.connected(x, y)?
                } else {
                    return Err(unsupported("connectivity of a generated structure"));
                }
            }
            Structure::Sum { parts } => match (Structure::point_to_part(parts, x), Structure::point_to_part(parts, y)) {
                (Some((i, a)), Some((j, b))) if i == j => parts[i].structure.connected(&a, &b)?,
                _ => false,
            },
            Structure::Meet { a, b } => a.connected(x, y)? && b.connected(x, y)?,
        })
    }

    /// Points of the carrier connected to some point of `t`.
    pub fn hull(&self, t: &PointSet) -> Result<PointSet> {
        let space = self.space();
        Ok(match self {
            Structure::Terminal { .. } | Structure::InitialConn { .. } | Structure::InitialConnUni { .. } | Structure::Connect { .. } => {
                if t.is_empty() {
                    PointSet::empty()
                } else {
                    space.all()
                }
            }
            Structure::Metric { space, clusters } => metric::hull(space, clusters, t),
            Structure::Initial { .. } | Structure::InitialUnital { .. } => t.clone(),
            Structure::Subspace { parent, set } => parent.hull(&t.intersect(set))?.intersect(set),
            Structure::Pullback { map, parent } => {
                let c = self.carrier()?;
                map.preimage_set(&parent.hull(&map.image_set(&t.intersect(&c))?)?)?.intersect(&c)
            }
            Structure::EqPullback { f, parent, .. } => {
                let c = self.carrier()?;
                f.preimage_set(&parent.hull(&f.image_set(&t.intersect(&c))?)?)?.intersect(&c)
            }
            Structure::Termination { parent } => {
                let c = parent.carrier()?;
                if t.is_disjoint(&c) {
                    PointSet::empty()
                } else {
                    c
                }
            }
            Structure::Ideal { parent, set } => parent.hull(&t.intersect(&parent.hull(set)?))?,
            Structure::Quotient { parent, set } => {
                let h = parent.hull(t)?;
                let hy = parent.hull(set)?;
                if t.is_disjoint(&hy) {
                    h
                } else {
                    h.union(&hy)
                }
            }
            Structure::Join { parent, .. } => {
                if self.join_is_trivial()? {
                    parent.hull(t)?
                } else {
                    return Err(unsupported("hull in a generated structure"));
                }
            }
            Structure::Sum { parts } => {
                let mut out = PointSet::empty();
                for (j, p) in parts.iter().enumerate() {
                    let h = p.structure.hull(&Structure::to_part(parts, j, t))?;
                    out = out.union(&Structure::from_part(parts, j, &h));
                }
                out
            }
            Structure::Meet { a, b } => match t.elements() {
                Some(pts) => {
                    let mut out = PointSet::empty();
                    for x in pts {
                        let one = space.singleton(&x)?;
                        out = out.union(&a.hull(&one)?.intersect(&b.hull(&one)?));
                    }
                    out
                }
                None => match self.blocks()? {
                    Some(bl) => bl.hull(t),
                    None => return Err(unsupported("hull of an infinite set in a meet")),
                },
            },
        })
    }

    /// Connectivity classes, when they have a finite description.
    pub fn blocks(&self) -> Result<Option<Blocks>> {
        let space = self.space();
        let whole = |s: PointSet| Blocks { blocks: if s.is_empty() { vec![] } else { vec![s] }, singles: PointSet::empty() };
        Ok(match self {
            Structure::Terminal { .. } | Structure::InitialConn { .. } | Structure::InitialConnUni { .. } | Structure::Connect { .. } => Some(whole(space.all())),
            Structure::Metric { space, clusters } => Some(Blocks { blocks: metric::cluster_sets(space, clusters), singles: PointSet::empty() }),
            Structure::Initial { .. } | Structure::InitialUnital { .. } => Some(Blocks { blocks: vec![], singles: space.all() }),
            Structure::Subspace { parent, set } => parent.blocks()?.map(|b| Blocks {
                blocks: b.blocks.iter().map(|x| x.intersect(set)).filter(|x| !x.is_empty()).collect(),
                singles: b.singles.intersect(set),
            }),
            Structure::Pullback { map, parent } => match parent.blocks()? {
                Some(b) if b.singles.is_empty() => {
                    let mut out = Vec::new();
                    for x in &b.blocks {
                        let pre = map.preimage_set(x)?;
                        if !pre.is_empty() {
                            out.push(pre);
                        }
                    }
                    Some(Blocks { blocks: out, singles: PointSet::empty() })
                }
                _ => None,
            },
            Structure::EqPullback { f, parent, .. } => {
                let c = self.carrier()?;
                match (Structure::Pullback { map: f.clone(), parent: parent.clone() }).blocks()? {
                    Some(b) => Some(Blocks { blocks: b.blocks.iter().map(|x| x.intersect(&c)).filter(|x| !x.is_empty()).collect(), singles: b.singles.intersect(&c) }),
                    None => None,
                }
            }
            Structure::Termination { parent } => Some(whole(parent.carrier()?)),
            Structure::Ideal { parent, set } => {
                let hs = parent.hull(set)?;
                parent.blocks()?.map(|b| Blocks {
                    blocks: b.blocks.iter().map(|x| x.intersect(&hs)).filter(|x| !x.is_empty()).collect(),
                    singles: b.singles.intersect(&hs),
                })
            }
            Structure::Quotient { parent, set } => match parent.blocks()? {
                Some(b) => {
                    let hy = b.hull(set);
                    let mut blocks: Vec<PointSet> = b.blocks.iter().filter(|x| x.is_disjoint(&hy)).cloned().collect();
                    if !hy.is_empty() {
                        blocks.push(hy.clone());
                    }
                    Some(Blocks { blocks, singles: b.singles.difference(&hy) })
                }
                None => None,
            },
            Structure::Join { parent, .. } => {
                if self.join_is_trivial()? {
                    parent.blocks()?
                } else {
                    None
                }
            }
            Structure::Sum { parts } => {
                let mut blocks = Vec::new();
                let mut singles = PointSet::empty();
                for (j, p) in parts.iter().enumerate() {
                    match p.structure.blocks()? {
                        Some(b) => {
                            blocks.extend(b.blocks.iter().map(|x| Structure::from_part(parts, j, x)));
                            singles = singles.union(&Structure::from_part(parts, j, &b.singles));
                        }
                        None => return Ok(None),
                    }
                }
                Some(Blocks { blocks, singles })
            }
            Structure::Meet { a, b } => match (a.blocks()?, b.blocks()?) {
                (Some(x), Some(y)) => {
                    let mut blocks = Vec::new();
                    for p in &x.blocks {
                        for q in &y.blocks {
                            let r = p.intersect(q);
                            if !r.is_empty() {
                                blocks.push(r);
                            }
                        }
                    }
                    let carrier = self.carrier()?;
                    let covered = blocks.iter().fold(PointSet::empty(), |acc, r| acc.union(r));
                    Some(Blocks { blocks, singles: carrier.difference(&covered) })
                }
                _ => None,
            },
        })
    }

    /// Is every pair of carrier points connected?
    pub fn is_connected_exact(&self) -> Result<Option<bool>> {
        let c = self.carrier()?;
        Ok(self.blocks()?.map(|b| b.within_one(&c)))
    }

    /// The largest unital subset, exact up to finite sets.
    pub fn unital_core(&self) -> Result<PointSet> {
        let space = self.space();
        Ok(match self {
            Structure::Terminal { .. } | Structure::Metric { .. } | Structure::InitialUnital { .. } | Structure::InitialConnUni { .. } => space.all(),
            Structure::Initial { .. } | Structure::InitialConn { .. } => PointSet::empty(),
            Structure::Subspace { parent, set } => parent.unital_core()?.intersect(set),
            Structure::Pullback { map, parent } => {
                let u = parent.unital_core()?;
                let mut rays = Vec::new();
                for r in space.ray_ids() {
                    if let (m, t @ Track::Affine { .. }) = map.compose_track(&Track::id(r)) {
                        let from = m.max(map.threshold(r));
                        rays.push((r.to_string(), t.preimage(&u).intersect(&UpSet::from(from))));
                    }
                }
                PointSet::from_parts(rays, std::iter::empty())
            }
            Structure::EqPullback { f, g, parent } => {
                let u = parent.unital_core()?;
                let mut rays = Vec::new();
                for r in space.ray_ids() {
                    let (m1, s) = f.compose_track(&Track::id(r));
                    let (m2, t) = g.compose_track(&Track::id(r));
                    if s.is_const() || t.is_const() {
                        continue;
                    }
                    let from = m1.max(m2).max(f.threshold(r)).max(g.threshold(r));
                    let good = s.preimage(&u).intersect(&t.preimage(&u)).intersect(&parent.core(&s, &t)?);
                    rays.push((r.to_string(), good.intersect(&UpSet::from(from))));
                }
                PointSet::from_parts(rays, std::iter::empty())
            }
            Structure::Termination { parent } | Structure::Connect { parent } => parent.unital_core()?,
            Structure::Ideal { parent, set } => parent.unital_core()?.intersect(&parent.near_core(set)?),
            Structure::Quotient { parent, set } => parent.unital_core()?.union(&parent.near_core(set)?),
            Structure::Join { parent, .. } => {
                if self.join_is_trivial()? {
                    parent.unital_core()?
                } else {
                    return Err(unsupported("unital core of a generated structure"));
                }
            }
            Structure::Sum { parts } => {
                let mut out = PointSet::empty();
                for (j, p) in parts.iter().enumerate() {
                    out = out.union(&Structure::from_part(parts, j, &p.structure.unital_core()?));
                }
                out
            }
            Structure::Meet { a, b } => a.unital_core()?.intersect(&b.unital_core()?),
        })
    }

    /// The largest set near `t`: `S` is near `t` iff `S ∖ N` is finite and
    /// lies in the hull of `t`.
    pub fn near_core(&self, t: &PointSet) -> Result<PointSet> {
        let space = self.space();
        Ok(match self {
            Structure::Terminal { .. } => {
                if t.is_finite() {
                    PointSet::empty()
                } else {
                    space.all()
                }
            }
            Structure::Metric { .. } => {
                let rays = t.rays().iter().filter(|(_, u)| !u.is_finite()).map(|(r, _)| (r.clone(), UpSet::all()));
                PointSet::from_parts(rays, std::iter::empty())
            }
            Structure::Initial { .. } | Structure::InitialConn { .. } => PointSet::empty(),
            Structure::InitialUnital { .. } | Structure::InitialConnUni { .. } => t.clone(),
            Structure::Subspace { parent, set } => parent.near_core(&t.intersect(set))?.intersect(set),
            Structure::Pullback { map, parent } => {
                let c = self.carrier()?;
                let n = parent.near_core(&map.image_set(&t.intersect(&c))?)?;
                map.preimage_set(&n)?.intersect(&affine_part(map)).intersect(&c)
            }
            Structure::EqPullback { .. } => return Err(unsupported("near sets in an equalizing pullback")),
            Structure::Termination { parent } => {
                let u = parent.unital_core()?;
                if t.intersect(&u).is_finite() {
                    PointSet::empty()
                } else {
                    u
                }
            }
            Structure::Ideal { parent, set } => parent.near_core(t)?.intersect(&parent.near_core(set)?),
            Structure::Quotient { parent, set } => {
                let ny = parent.near_core(set)?;
                let n = parent.near_core(t)?;
                if t.intersect(&ny).is_finite() {
                    n
                } else {
                    n.union(&ny)
                }
            }
            Structure::Connect { parent } => parent.near_core(t)?,
            Structure::Join { parent, .. } => {
                if self.join_is_trivial()? {
                    parent.near_core(t)?
                } else {
                    return Err(unsupported("near sets in a generated structure"));
                }
            }
            Structure::Sum { parts } => {
                let mut out = PointSet::empty();
                for (j, p) in parts.iter().enumerate() {
                    let n = p.structure.near_core(&Structure::to_part(parts, j, t))?;
                    out = out.union(&Structure::from_part(parts, j, &n));
                }
                out
            }
            Structure::Meet { .. } => return Err(unsupported("near sets in a meet")),
        })
    }

    /// A set on which every proper relation with connected pairs is a
    /// member. Exact for the base constructors; a sound subset elsewhere.
    pub fn terminal_region(&self) -> Result<PointSet> {
        let space = self.space();
        Ok(match self {
            Structure::Terminal { .. } => space.all(),
            Structure::Metric { .. } | Structure::Initial { .. } | Structure::InitialConn { .. } | Structure::InitialUnital { .. } | Structure::InitialConnUni { .. } => PointSet::empty(),
            Structure::Subspace { parent, set } => parent.terminal_region()?.intersect(set),
            Structure::Pullback { map, parent } => map.preimage_set(&parent.terminal_region()?)?.intersect(&affine_part(map)),
            Structure::EqPullback { f, g, parent } => {
                let w = parent.terminal_region()?;
                f.preimage_set(&w)?
                    .intersect(&g.preimage_set(&w)?)
                    .intersect(&affine_part(f))
                    .intersect(&affine_part(g))
                    .intersect(&self.carrier()?)
            }
            Structure::Termination { parent } => parent.unital_core()?,
            Structure::Ideal { parent, set } => parent.terminal_region()?.intersect(&parent.near_core(set)?),
            Structure::Quotient { parent, set } => {
                let n = parent.near_core(set)?;
                let w = parent.terminal_region()?;
                if n.difference(&w).is_finite() {
                    w.union(&n)
                } else if w.difference(&n).is_finite() {
                    n.union(&w)
                } else {
                    n
                }
            }
            Structure::Connect { parent } => parent.terminal_region()?,
            Structure::Join { parent, .. } => parent.terminal_region()?,
            Structure::Sum { parts } => {
                let mut out = PointSet::empty();
                for (j, p) in parts.iter().enumerate() {
                    out = out.union(&Structure::from_part(parts, j, &p.structure.terminal_region()?));
                }
                out
            }
            Structure::Meet { a, b } => a.terminal_region()?.intersect(&b.terminal_region()?),
        })
    }

    /// Parameters `i` such that the family `{(σ(i), τ(i))}` over any subset
    /// of them is a member; every member family lies in it up to finitely
    /// many parameters.
    pub fn core(&self, sigma: &Track, tau: &Track) -> Result<UpSet> {
        let dom = sigma.domain().intersect(&tau.domain());
        match (sigma, tau) {
            (Track::Const { point: x }, Track::Const { point: y }) => {
                return Ok(if self.connected(x, y)? { dom } else { UpSet::empty() });
            }
            (Track::Const { .. }, _) | (_, Track::Const { .. }) => return Ok(UpSet::empty()),
            _ => {}
        }
        let c = match self {
            Structure::Terminal { .. } => dom,
            Structure::Metric { space, clusters } => metric::family_core(space, clusters, sigma, tau),
            Structure::Initial { .. } | Structure::InitialConn { .. } => UpSet::empty(),
            Structure::InitialUnital { .. } | Structure::InitialConnUni { .. } => sigma.agree(tau),
            Structure::Subspace { parent, set } => sigma.preimage(set).intersect(&tau.preimage(set)).intersect(&parent.core(sigma, tau)?),
            Structure::Pullback { map, parent } => {
                let (m1, s) = map.compose_track(sigma);
                let (m2, t) = map.compose_track(tau);
                if s.is_const() && t.is_const() {
                    UpSet::empty()
                } else {
                    parent.core(&s, &t)?.intersect(&UpSet::from(m1.max(m2)))
                }
            }
            Structure::EqPullback { f, g, parent } => {
                let a = Structure::Pullback { map: f.clone(), parent: parent.clone() }.core(sigma, tau)?;
                let b = Structure::Pullback { map: g.clone(), parent: parent.clone() }.core(sigma, tau)?;
                let (m1, s) = f.compose_track(sigma);
                let (m2, t) = g.compose_track(tau);
                a.intersect(&b).intersect(&parent.core(&s, &t)?).intersect(&UpSet::from(m1.max(m2)))
            }
            Structure::Termination { parent } => {
                let u = parent.unital_core()?;
                sigma.preimage(&u).intersect(&tau.preimage(&u)).intersect(&dom)
            }
            Structure::Ideal { parent, set } => parent.core(sigma, tau)?.intersect(&sigma.preimage(&parent.near_core(set)?)),
            Structure::Quotient { parent, set } => {
                let n = parent.near_core(set)?;
                parent.core(sigma, tau)?.union(&sigma.preimage(&n).intersect(&tau.preimage(&n)).intersect(&dom))
            }
            Structure::Connect { parent } => parent.core(sigma, tau)?,
            Structure::Join { parent, .. } => {
                if self.join_is_trivial()? {
                    parent.core(sigma, tau)?
                } else {
                    return Err(unsupported("families in a generated structure"));
                }
            }
            Structure::Sum { parts } => match (Structure::track_to_part(parts, sigma), Structure::track_to_part(parts, tau)) {
                (Some((i, s)), Some((j, t))) if i == j => parts[i].structure.core(&s, &t)?,
                _ => UpSet::empty(),
            },
            Structure::Meet { a, b } => a.core(sigma, tau)?.intersect(&b.core(sigma, tau)?),
        };
        Ok(c)
    }

    /// Every generator of a join is already a member of its parent.
    pub(crate) fn join_is_trivial(&self) -> Result<bool> {
        match self {
            Structure::Join { parent, gens, .. } => {
                for g in gens {
                    if !parent.contains(g)?.is_in() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(true),
        }
    }

    /// Metric distance, for metric structures and their subspaces.
    pub fn metric_distance(&self, x: &Point, y: &Point) -> Option<u64> {
        match self {
            Structure::Metric { space, clusters } => metric::distance(space, clusters, x, y),
            Structure::Subspace { parent, .. } => parent.metric_distance(x, y),
            _ => None,
        }
    }

    /// Renames a family into summand coordinates.
    pub(crate) fn family_to_part(parts: &[Summand], fam: &Family) -> Option<(usize, Family)> {
        let (i, s) = Structure::track_to_part(parts, &fam.src)?;
        let (j, t) = Structure::track_to_part(parts, &fam.dst)?;
        (i == j).then(|| (i, Family { src: s, dst: t, support: fam.support.clone() }))
    }
}

#[cfg(test)]
mod tests;
