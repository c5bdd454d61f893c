//! Path metric on clusters of components glued at index 0.
//!
//! Within a component `d((c,i),(c,j)) = |i − j|`; across components of one
//! cluster `d((c,i),(c′,j)) = i + j + g(c) + g(c′) + 1`; across clusters the
//! distance is infinite.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::coarsemap::Track;
use crate::error::{CoarseError, Result};
use crate::ground::{Point, PointSet, Space};
use crate::upset::UpSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub components: Vec<String>,
    #[serde(default)]
    pub glue: BTreeMap<String, u64>,
}

impl Cluster {
    pub fn of(components: &[&str]) -> Cluster {
        Cluster { components: components.iter().map(|c| c.to_string()).collect(), glue: BTreeMap::new() }
    }
}

pub(super) fn validate(space: &Space, clusters: &[Cluster]) -> Result<()> {
    if clusters.is_empty() {
        return Ok(());
    }
    let mut seen = BTreeSet::new();
    for c in clusters {
        for id in &c.components {
            if space.kind(id).is_none() {
                return Err(CoarseError::SpaceMismatch(format!("cluster names unknown component `{id}`")));
            }
            if !seen.insert(id.clone()) {
                return Err(CoarseError::Invalid(format!("component `{id}` is in two clusters")));
            }
        }
        if let Some(g) = c.glue.keys().find(|g| !c.components.contains(g)) {
            return Err(CoarseError::Invalid(format!("glue constant for `{g}` outside its cluster")));
        }
    }
    if let Some(c) = space.components().iter().find(|c| !seen.contains(&c.id)) {
        return Err(CoarseError::Invalid(format!("component `{}` is in no cluster", c.id)));
    }
    Ok(())
}

fn cluster_of(clusters: &[Cluster], comp: &str) -> Option<usize> {
    if clusters.is_empty() {
        return Some(0);
    }
    clusters.iter().position(|c| c.components.iter().any(|x| x == comp))
}

fn glue(clusters: &[Cluster], comp: &str) -> u64 {
    cluster_of(clusters, comp).and_then(|k| clusters.get(k)).and_then(|c| c.glue.get(comp).copied()).unwrap_or(0)
}

pub fn distance(_space: &Space, clusters: &[Cluster], x: &Point, y: &Point) -> Option<u64> {
    if x.comp == y.comp {
        return Some(x.index.abs_diff(y.index));
    }
    if cluster_of(clusters, &x.comp)? != cluster_of(clusters, &y.comp)? {
        return None;
    }
    Some(x.index + y.index + glue(clusters, &x.comp) + glue(clusters, &y.comp) + 1)
}

pub(super) fn cluster_sets(space: &Space, clusters: &[Cluster]) -> Vec<PointSet> {
    if clusters.is_empty() {
        let all = space.all();
        return if all.is_empty() { vec![] } else { vec![all] };
    }
    clusters.iter().map(|c| space.all().restrict_comps(|id| c.components.iter().any(|x| x == id))).collect()
}

pub(super) fn hull(space: &Space, clusters: &[Cluster], t: &PointSet) -> PointSet {
    cluster_sets(space, clusters).into_iter().filter(|c| !c.is_disjoint(t)).fold(PointSet::empty(), |a, c| a.union(&c))
}

/// Bounded width on infinitely many parameters forces one ray and one slope.
pub(super) fn family_core(_space: &Space, _clusters: &[Cluster], sigma: &Track, tau: &Track) -> UpSet {
    match (sigma, tau) {
        (Track::Affine { ray: r1, a: a1, .. }, Track::Affine { ray: r2, a: a2, .. }) if r1 == r2 && a1 == a2 => sigma.domain().intersect(&tau.domain()),
        _ => UpSet::empty(),
    }
}

/// Width of an affine family over its core.
pub(super) fn family_width(sigma: &Track, tau: &Track) -> u64 {
    match (sigma, tau) {
        (Track::Affine { b: b1, .. }, Track::Affine { b: b2, .. }) => b1.abs_diff(*b2),
        _ => 0,
    }
}
