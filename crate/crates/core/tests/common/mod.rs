#![allow(dead_code)]

use std::collections::BTreeMap;

use coarse_core::coarsemap::{CompMap, EAMap, Tail};
use coarse_core::entourage::Relation;
use coarse_core::ground::{Component, Point, PointSet, Space};
use coarse_core::upset::UpSet;
use rand::Rng;

/// Periods drawn from divisors of 6 so windows stay small.
const PERIODS: [u64; 4] = [1, 2, 3, 6];

/// Two rays and a point.
pub fn mixed_space() -> Space {
    Space::new(vec![Component::ray("r0"), Component::ray("r1"), Component::pt("p0")]).unwrap()
}

pub fn upset(rng: &mut impl Rng) -> UpSet {
    match rng.gen_range(0..6) {
        0 => UpSet::all(),
        1 => UpSet::finite((0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..12))),
        _ => {
            let p = PERIODS[rng.gen_range(0..PERIODS.len())];
            let residues: Vec<u64> = (0..p).filter(|_| rng.gen_bool(0.6)).collect();
            let residues = if residues.is_empty() { vec![rng.gen_range(0..p)] } else { residues };
            let prefix: Vec<u64> = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(0..8)).collect();
            UpSet::new(prefix, rng.gen_range(0..10), p, residues)
        }
    }
}

pub fn finite_upset(rng: &mut impl Rng) -> UpSet {
    UpSet::finite((0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..12)))
}

fn ray_of(space: &Space, rng: &mut impl Rng) -> String {
    let rays: Vec<&str> = space.ray_ids().collect();
    rays[rng.gen_range(0..rays.len())].to_string()
}

/// A point set; at most one ray carries an infinite part when `infinite`.
pub fn point_set(space: &Space, rng: &mut impl Rng, infinite: bool) -> PointSet {
    let mut out = PointSet::empty();
    for r in space.ray_ids() {
        if rng.gen_bool(0.6) {
            out = out.union(&PointSet::on_ray(r, finite_upset(rng)));
        }
    }
    if infinite {
        out = out.union(&PointSet::on_ray(&ray_of(space, rng), upset(rng)));
    }
    for p in space.pt_ids() {
        if rng.gen_bool(0.4) {
            out = out.union(&PointSet::pt(p));
        }
    }
    if out.is_empty() {
        out = PointSet::on_ray(&ray_of(space, rng), UpSet::singleton(rng.gen_range(0..6)));
    }
    out
}

pub fn band(space: &Space, rng: &mut impl Rng) -> Relation {
    Relation::band(&ray_of(space, rng), &ray_of(space, rng), rng.gen_range(-8..=8), upset(rng))
}

/// A rect with at most one infinite side; `proper` keeps both sides finite.
pub fn rect(space: &Space, rng: &mut impl Rng, proper: bool) -> Relation {
    let (li, ri) = match (proper, rng.gen_range(0..3)) {
        (true, _) | (false, 0) => (false, false),
        (false, 1) => (true, false),
        _ => (false, true),
    };
    Relation::rect(point_set(space, rng, li), point_set(space, rng, ri))
}

/// One to three primitives, mostly bands.
pub fn relation(space: &Space, rng: &mut impl Rng, proper: bool) -> Relation {
    let mut out = Relation::empty();
    for _ in 0..rng.gen_range(1..=3) {
        let p = if rng.gen_bool(0.7) { band(space, rng) } else { rect(space, rng, proper) };
        out = out.union(&p);
    }
    out
}

/// An eventually affine map: a short table, then an affine or constant tail.
pub fn eamap(source: &Space, target: &Space, rng: &mut impl Rng, const_weight: f64) -> EAMap {
    let targets: Vec<Point> = target.points_upto(6);
    let mut comps = BTreeMap::new();
    for c in source.components() {
        let pick = |rng: &mut dyn rand::RngCore| targets[rng.gen_range(0..targets.len())].clone();
        let m = if source.has_pt(&c.id) {
            CompMap::Pt(pick(rng))
        } else {
            let table = (0..rng.gen_range(0..3)).map(|_| pick(rng)).collect();
            let tail = if target.ray_ids().next().is_none() || rng.gen_bool(const_weight) {
                Tail::Const { point: pick(rng) }
            } else {
                Tail::Affine { a: rng.gen_range(1..=2), b: rng.gen_range(-3..=5), dst: ray_of(target, rng) }
            };
            CompMap::Ray { table, tail }
        };
        comps.insert(c.id.clone(), m);
    }
    EAMap::new(source.clone(), target.clone(), comps).unwrap_or_else(|_| eamap(source, target, rng, const_weight))
}
