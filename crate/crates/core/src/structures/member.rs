//! Membership: relations and pair images split into pieces; each piece is
//! decided against the structure's parameter core.

use crate::coarsemap::{normalize_piece, pieces_of, EAMap, Family, PairImage, Piece};
use crate::entourage::Relation;
use crate::error::{CoarseError, Result};
use crate::ground::{Point, PointSet};
use crate::upset::UpSet;
use crate::verdict::{Certificate, Side, Verdict, Witness};

use super::{join, metric, Structure};

impl Structure {
    /// Is `rel` a member?
    pub fn contains(&self, rel: &Relation) -> Result<Verdict> {
        let space = self.space();
        rel.check_in(&space)?;
        if let Structure::Join { .. } = self {
            if !self.join_is_trivial()? {
                return join::contains(self, rel);
            }
        }
        let pieces: Vec<Piece> = pieces_of(rel).into_iter().flat_map(|p| normalize_piece(p, &space)).collect();
        self.contains_pieces(&pieces)
    }

    /// Is `(f × g)(rel)` a member? Handles sheared images exactly.
    pub fn contains_pair(&self, f: &EAMap, g: &EAMap, rel: &Relation) -> Result<Verdict> {
        f.check_target(&self.space())?;
        let pi = PairImage::new(f, g, rel)?;
        if let Structure::Join { .. } = self {
            if !self.join_is_trivial()? {
                return match pi.to_relation() {
                    Ok(r) => join::contains(self, &r),
                    Err(_) => Ok(Verdict::Unknown { depth: 0 }),
                };
            }
        }
        self.contains_pieces(&pi.pieces())
    }

    /// Every piece is a member. Pieces must be in canonical form.
    pub fn contains_pieces(&self, pieces: &[Piece]) -> Result<Verdict> {
        let mut out = Vec::new();
        for p in pieces {
            match self.piece_verdict(p) {
                Err(CoarseError::Unsupported(_)) => return Ok(Verdict::Unknown { depth: 0 }),
                Err(e) => return Err(e),
                Ok(Verdict::In { certificate }) => out.push((p.clone(), certificate)),
                Ok(v) => return Ok(v),
            }
        }
        Ok(Verdict::In(Certificate::Pieces { pieces: out }))
    }

    pub(crate) fn piece_verdict(&self, p: &Piece) -> Result<Verdict> {
        match p {
            Piece::Rect(r) => {
                if !r.left.is_finite() {
                    return Ok(Verdict::Out(Witness::InfiniteFiber { point: r.right.some_point().expect("nonempty"), side: Side::Right }));
                }
                if !r.right.is_finite() {
                    return Ok(Verdict::Out(Witness::InfiniteFiber { point: r.left.some_point().expect("nonempty"), side: Side::Left }));
                }
                self.pairs_verdict(&p.pairs().expect("finite rect"))
            }
            Piece::Family(f) => {
                if let Some(pairs) = p.pairs() {
                    return self.pairs_verdict(&pairs);
                }
                let core = self.core(&f.src, &f.dst)?;
                let rest = f.support.difference(&core);
                if !rest.is_finite() {
                    return Ok(Verdict::Out(self.explain(&f.restrict(&rest))?));
                }
                let head: Vec<(Point, Point)> = rest.elements().expect("finite").iter().filter_map(|&i| f.pair(i)).collect();
                let inner = f.restrict(&core);
                let cert = self.certify(&inner)?;
                if head.is_empty() {
                    return Ok(Verdict::In(cert));
                }
                let space = self.space();
                let mut pieces = vec![(Piece::Family(inner), cert)];
                for (x, y) in &head {
                    match self.pairs_verdict(&[(x.clone(), y.clone())])? {
                        Verdict::In { certificate } => pieces.push((Piece::single(&space, x, y), certificate)),
                        v => return Ok(v),
                    }
                }
                Ok(Verdict::In(Certificate::Pieces { pieces }))
            }
        }
    }

    fn pairs_verdict(&self, pairs: &[(Point, Point)]) -> Result<Verdict> {
        for (x, y) in pairs {
            if !self.connected(x, y)? {
                return Ok(Verdict::Out(Witness::Pair { pair: (x.clone(), y.clone()), fault: "points are not connected".into() }));
            }
        }
        Ok(Verdict::In(Certificate::ConnectedPairs { pairs: pairs.to_vec() }))
    }

    /// Witness for an infinite family disjoint from the core.
    fn explain(&self, fam: &Family) -> Result<Witness> {
        if let Structure::Metric { clusters, space } = self {
            let (x, y) = fam.pair(fam.support.first().expect("infinite")).expect("in domain");
            if metric::distance(space, clusters, &x, &y).is_none() {
                return Ok(Witness::Pair { pair: (x, y), fault: "points lie in different clusters".into() });
            }
        }
        if matches!(self, Structure::Initial { .. } | Structure::InitialConn { .. }) {
            return Ok(Witness::InfiniteSet);
        }
        Ok(Witness::Nested { context: self.name().to_string(), inner: Box::new(Witness::Unbounded { family: fam.clone() }) })
    }

    /// Certificate for a family whose parameters all lie in the core.
    pub(crate) fn certify(&self, fam: &Family) -> Result<Certificate> {
        let space = self.space();
        Ok(match self {
            Structure::Terminal { .. } => Certificate::Proper,
            Structure::Metric { .. } => Certificate::Width { bound: metric::family_width(&fam.src, &fam.dst) },
            Structure::Initial { .. } | Structure::InitialConn { .. } => Certificate::Finite,
            Structure::InitialUnital { .. } | Structure::InitialConnUni { .. } => Certificate::Diagonal,
            Structure::Subspace { parent, set } => Certificate::Confined { within: set.clone(), inner: Box::new(parent.certify(fam)?) },
            Structure::Pullback { map, parent } => Certificate::Pulled { map: "map".into(), inner: Box::new(parent.certify(&pushed(map, map, fam))?) },
            Structure::EqPullback { f, g, parent } => Certificate::Both {
                parts: vec![
                    Certificate::Pulled { map: "f".into(), inner: Box::new(parent.certify(&pushed(f, f, fam))?) },
                    Certificate::Pulled { map: "g".into(), inner: Box::new(parent.certify(&pushed(g, g, fam))?) },
                    Certificate::Pulled { map: "f×g".into(), inner: Box::new(parent.certify(&pushed(f, g, fam))?) },
                ],
            },
            Structure::Termination { parent } => {
                let unit = |s: PointSet| -> Result<Certificate> {
                    match parent.contains(&Relation::local_unit(&s))? {
                        Verdict::In { certificate } => Ok(certificate),
                        _ => Err(CoarseError::Invalid("support outside the unital core".into())),
                    }
                };
                Certificate::UnitalSupports { left: Box::new(unit(fam.left_support(&space))?), right: Box::new(unit(fam.right_support(&space))?) }
            }
            Structure::Ideal { parent, set } => Certificate::Both {
                parts: vec![
                    Certificate::Parent { inner: Box::new(parent.certify(fam)?) },
                    Certificate::NearSupport { set: fam.left_support(&space), target: set.clone(), radius: near_radius(parent, &fam.left_support(&space), set) },
                ],
            },
            Structure::Quotient { parent, set } => {
                let pc = parent.core(&fam.src, &fam.dst)?;
                let inside = fam.restrict(&pc);
                let outside = fam.restrict(&fam.support.difference(&pc));
                let mut pieces = Vec::new();
                if !inside.support.is_empty() {
                    pieces.push((Piece::Family(inside.clone()), Certificate::Parent { inner: Box::new(parent.certify(&inside)?) }));
                }
                if !outside.support.is_empty() {
                    let (l, r) = (outside.left_support(&space), outside.right_support(&space));
                    let near = Certificate::Both {
                        parts: vec![
                            Certificate::NearSupport { set: l.clone(), target: set.clone(), radius: near_radius(parent, &l, set) },
                            Certificate::NearSupport { set: r.clone(), target: set.clone(), radius: near_radius(parent, &r, set) },
                        ],
                    };
                    pieces.push((Piece::Family(outside), near));
                }
                if pieces.len() == 1 {
                    pieces.pop().expect("one piece").1
                } else {
                    Certificate::Pieces { pieces }
                }
            }
            Structure::Connect { parent } | Structure::Join { parent, .. } => Certificate::Parent { inner: Box::new(parent.certify(fam)?) },
            Structure::Sum { parts } => {
                let (j, local) = Structure::family_to_part(parts, fam).ok_or_else(|| CoarseError::Invalid("family crosses summands".into()))?;
                Certificate::Summand { index: j, inner: Box::new(parts[j].structure.certify(&local)?) }
            }
            Structure::Meet { a, b } => Certificate::Both { parts: vec![a.certify(fam)?, b.certify(fam)?] },
        })
    }

    // ---- derived predicates ----

    pub fn is_unital(&self) -> Result<Verdict> {
        self.contains(&Relation::unit(&self.space()))
    }

    pub fn unital_subspace(&self, s: &PointSet) -> Result<Verdict> {
        self.contains(&Relation::local_unit(s))
    }

    pub fn connected_pts(&self, x: &Point, y: &Point) -> Result<Verdict> {
        self.contains(&Relation::pair(&self.space(), x, y)?)
    }

    /// Every two carrier points are connected.
    pub fn is_connected(&self) -> Result<Verdict> {
        let c = self.carrier()?;
        match self.blocks()? {
            Some(b) => match b.split_pair(&c) {
                None => Ok(Verdict::In(Certificate::Claim { rule: "carrier lies in one connectivity class".into() })),
                Some((x, y)) => Ok(Verdict::Out(Witness::Pair { pair: (x, y), fault: "points are not connected".into() })),
            },
            None => Ok(Verdict::Unknown { depth: 0 }),
        }
    }

    /// Is `s` near `t`: `s ⊆ E·t` for some member `E`?
    pub fn near_support(&self, s: &PointSet, t: &PointSet) -> Result<Verdict> {
        let n = match self.near_core(t) {
            Ok(n) => n,
            Err(CoarseError::Unsupported(_)) => return Ok(Verdict::Unknown { depth: 0 }),
            Err(e) => return Err(e),
        };
        let rest = s.difference(&n);
        let ok = rest.is_finite() && match self.hull(t) {
            Ok(h) => rest.is_subset(&h),
            Err(CoarseError::Unsupported(_)) => return Ok(Verdict::Unknown { depth: 0 }),
            Err(e) => return Err(e),
        };
        if ok {
            Ok(Verdict::In(Certificate::NearSupport { set: s.clone(), target: t.clone(), radius: near_radius(self, s, t) }))
        } else {
            Ok(Verdict::Out(Witness::NotNear { set: rest, target: t.clone() }))
        }
    }
}

fn pushed(f: &EAMap, g: &EAMap, fam: &Family) -> Family {
    let (m1, s) = f.compose_track(&fam.src);
    let (m2, t) = g.compose_track(&fam.dst);
    let m = m1.max(m2);
    Family::new(s, t, fam.support.intersect(&UpSet::from(m)))
}

/// Largest metric distance from `s` to `t` on metric parents.
fn near_radius(d: &Structure, s: &PointSet, t: &PointSet) -> Option<u64> {
    match d {
        Structure::Metric { .. } => {
            let mut worst = 0;
            for (r, u) in s.rays() {
                let dist = u.max_distance_to(&t.ray(r))?;
                worst = worst.max(dist);
            }
            if !s.pts().is_empty() {
                return None;
            }
            Some(worst)
        }
        _ => None,
    }
}
