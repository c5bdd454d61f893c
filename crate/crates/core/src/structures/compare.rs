//! Presentations, generator samples, comparison, and σ-filtrations.

use crate::coarsemap::{normalize_piece, pieces_of, EAMap, Family, Piece, Track};
use crate::entourage::Relation;
use crate::error::{CoarseError, Result};
use crate::ground::{Point, PointSet};
use crate::upset::UpSet;
use crate::verdict::{Certificate, Verdict, Witness};

use super::{metric, Structure};

/// A generator of a presentation. The structure is the smallest one
/// containing every listed generator.
#[derive(Clone, Debug, PartialEq)]
pub enum Gen {
    Rel(Relation),
    /// Every proper relation inside `T × T`.
    TerminalBlock(PointSet),
    /// Every finite relation inside `B × B`.
    AllFinite(PointSet),
    /// `1_x` for every `x ∈ B`.
    FiniteUnits(PointSet),
}

impl Gen {
    fn rename(&self, f: &dyn Fn(&str) -> String) -> Gen {
        match self {
            Gen::Rel(r) => Gen::Rel(r.rename(f)),
            Gen::TerminalBlock(t) => Gen::TerminalBlock(t.rename(f)),
            Gen::AllFinite(t) => Gen::AllFinite(t.rename(f)),
            Gen::FiniteUnits(t) => Gen::FiniteUnits(t.rename(f)),
        }
    }
}

/// Largest gap between consecutive elements of `u`.
fn max_gap(u: &UpSet) -> u64 {
    let es = u.enumerate(u.threshold() + 2 * u.period() + 1);
    es.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(1)
}

fn is_identity(map: &EAMap) -> bool {
    map.source() == map.target() && *map == EAMap::identity(map.source())
}

impl Structure {
    /// A finite presentation, when one is known in closed form.
    pub fn presentation(&self) -> Result<Option<Vec<Gen>>> {
        let space = self.space();
        Ok(Some(match self {
            Structure::Terminal { .. } => vec![Gen::TerminalBlock(space.all())],
            Structure::Metric { space, clusters } => {
                let mut gens = vec![Gen::Rel(Relation::unit(space))];
                for r in space.ray_ids() {
                    gens.push(Gen::Rel(Relation::diag(r, 1, UpSet::all())));
                    gens.push(Gen::Rel(Relation::diag(r, -1, UpSet::all())));
                }
                for c in metric::cluster_sets(space, clusters) {
                    let anchors: Vec<Point> = c.rays().keys().map(|r| Point::new(r, 0)).chain(c.pts().iter().map(|p| Point::new(p, 0))).collect();
                    for w in anchors.windows(2) {
                        gens.push(Gen::Rel(Relation::from_pairs(space, &[(w[0].clone(), w[1].clone()), (w[1].clone(), w[0].clone())])?));
                    }
                }
                gens
            }
            Structure::Initial { .. } => vec![Gen::FiniteUnits(space.all())],
            Structure::InitialConn { .. } => vec![Gen::AllFinite(space.all())],
            Structure::InitialUnital { .. } => vec![Gen::Rel(Relation::unit(&space))],
            Structure::InitialConnUni { .. } => vec![Gen::Rel(Relation::unit(&space)), Gen::AllFinite(space.all())],
            Structure::Subspace { parent, set } => match parent.as_ref() {
                Structure::Metric { space, clusters } => {
                    let mut gens = vec![Gen::Rel(Relation::local_unit(set))];
                    for (r, u) in set.rays() {
                        if u.is_finite() {
                            continue;
                        }
                        for k in 1..=max_gap(u) as i64 {
                            for off in [k, -k] {
                                let supp = u.intersect(&u.shift(-off));
                                if !supp.is_empty() {
                                    gens.push(Gen::Rel(Relation::diag(r, off, supp)));
                                }
                            }
                        }
                    }
                    // Finite hops inside each cluster: consecutive points of the
                    // finite parts and the first point of each component.
                    for c in metric::cluster_sets(space, clusters) {
                        let local = c.intersect(set);
                        let mut anchors: Vec<Point> = Vec::new();
                        for (r, u) in local.rays() {
                            let es = if u.is_finite() { u.elements().expect("finite").to_vec() } else { u.enumerate(u.threshold() + u.period()) };
                            anchors.extend(es.iter().map(|&i| Point::new(r, i)));
                        }
                        anchors.extend(local.pts().iter().map(|p| Point::new(p, 0)));
                        let pairs: Vec<(Point, Point)> = anchors.iter().flat_map(|x| anchors.iter().map(move |y| (x.clone(), y.clone()))).collect();
                        if !pairs.is_empty() {
                            gens.push(Gen::Rel(Relation::from_pairs(space, &pairs)?));
                        }
                    }
                    gens
                }
                _ => match parent.presentation()? {
                    Some(gens) => {
                        let mut out = Vec::new();
                        for g in gens {
                            out.push(match g {
                                Gen::Rel(r) if r.subset_of(&Relation::unit(&space)) => Gen::Rel(r.restrict(set)),
                                Gen::Rel(_) => return Ok(None),
                                Gen::TerminalBlock(t) => Gen::TerminalBlock(t.intersect(set)),
                                Gen::AllFinite(b) => Gen::AllFinite(b.intersect(set)),
                                Gen::FiniteUnits(b) => Gen::FiniteUnits(b.intersect(set)),
                            });
                        }
                        out
                    }
                    None => return Ok(None),
                },
            },
            Structure::Pullback { map, parent } if is_identity(map) => match parent.presentation()? {
                Some(g) => g,
                None => return Ok(None),
            },
            Structure::Termination { parent } => vec![Gen::TerminalBlock(parent.unital_core()?), Gen::AllFinite(parent.carrier()?)],
            Structure::Ideal { parent, set } => {
                let n = parent.near_core(set)?;
                let hs = parent.hull(set)?;
                if n.is_finite() {
                    match parent.blocks()? {
                        Some(b) => {
                            let mut gens: Vec<Gen> = b.blocks.iter().map(|x| Gen::AllFinite(x.intersect(&hs))).collect();
                            gens.push(Gen::FiniteUnits(b.singles.intersect(&hs)));
                            gens
                        }
                        None => return Ok(None),
                    }
                } else {
                    let c = parent.carrier()?;
                    let rest = c.difference(&n);
                    if rest.is_finite() && rest.is_subset(&hs) {
                        match parent.presentation()? {
                            Some(g) => g,
                            None => return Ok(None),
                        }
                    } else {
                        return Ok(None);
                    }
                }
            }
            Structure::Quotient { parent, set } => match parent.presentation()? {
                Some(mut g) => {
                    g.push(Gen::TerminalBlock(set.clone()));
                    g
                }
                None => return Ok(None),
            },
            Structure::Connect { parent } => match parent.presentation()? {
                Some(mut g) => {
                    g.push(Gen::AllFinite(space.all()));
                    g
                }
                None => return Ok(None),
            },
            Structure::Join { parent, gens, .. } => match parent.presentation()? {
                Some(mut g) => {
                    g.extend(gens.iter().cloned().map(Gen::Rel));
                    g
                }
                None => return Ok(None),
            },
            Structure::Sum { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    let tag = p.tag.clone();
                    match p.structure.presentation()? {
                        Some(g) => out.extend(g.iter().map(|x| x.rename(&|c| format!("{tag}.{c}")))),
                        None => return Ok(None),
                    }
                }
                out
            }
            Structure::Pullback { .. } | Structure::EqPullback { .. } | Structure::Meet { .. } => return Ok(None),
        }))
    }

    /// A finite sample of members, used for probing.
    pub fn generators(&self, budget: usize) -> Result<Vec<Relation>> {
        let space = self.space();
        let k = budget as i64;
        let mut cands: Vec<Relation> = Vec::new();
        match self {
            Structure::Metric { .. } => {
                for r in space.ray_ids() {
                    for off in -k..=k {
                        cands.push(Relation::diag(r, off, UpSet::all()));
                    }
                }
            }
            Structure::Initial { .. } => {
                for x in space.points_upto(budget.saturating_sub(1) as u64) {
                    cands.push(Relation::pair(&space, &x, &x)?);
                }
            }
            _ => {
                if let Ok(c) = self.carrier() {
                    cands.push(Relation::local_unit(&c));
                }
                for r in space.ray_ids() {
                    for off in -k..=k {
                        for supp in [UpSet::all(), UpSet::evens(), UpSet::from(budget as u64)] {
                            cands.push(Relation::diag(r, off, supp));
                        }
                    }
                }
                let pts = space.points_upto(2);
                for x in pts.iter().take(budget + 2) {
                    for y in pts.iter().take(budget + 2) {
                        cands.push(Relation::pair(&space, x, y)?);
                    }
                }
            }
        }
        let mut out = Vec::new();
        for r in cands {
            if self.contains(&r)?.is_in() && !out.contains(&r) {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Does `other` contain everything the generator stands for?
    pub fn gen_in(&self, other: &Structure, g: &Gen) -> Result<Verdict> {
        let space = other.space();
        match g {
            Gen::Rel(r) => Ok(match other.contains(r)? {
                Verdict::Out { witness } => separating_rel(other, r, witness)?,
                v => v,
            }),
            Gen::FiniteUnits(b) => {
                let missing = b.difference(&other.carrier()?);
                match missing.some_point() {
                    None => Ok(Verdict::In(Certificate::Claim { rule: "units lie in the carrier".into() })),
                    Some(x) => Ok(separating(Piece::single(&space, &x, &x), Witness::NotUnital { set: space.singleton(&x)?, inner: Box::new(Witness::Pair { pair: (x.clone(), x), fault: "point outside the carrier".into() }) })),
                }
            }
            Gen::AllFinite(b) => match other.blocks()? {
                Some(bl) => {
                    let cb = b.intersect(&other.carrier()?);
                    if cb != *b {
                        let x = b.difference(&cb).some_point().expect("nonempty");
                        return Ok(separating(Piece::single(&space, &x, &x), Witness::Pair { pair: (x.clone(), x), fault: "point outside the carrier".into() }));
                    }
                    match bl.split_pair(b) {
                        None => Ok(Verdict::In(Certificate::Claim { rule: "finite block lies in one connectivity class".into() })),
                        Some((x, y)) => Ok(separating(Piece::single(&space, &x, &y), Witness::Pair { pair: (x, y), fault: "points are not connected".into() })),
                    }
                }
                None => Ok(Verdict::Unknown { depth: 0 }),
            },
            Gen::TerminalBlock(t) => {
                if t.is_empty() {
                    return Ok(Verdict::In(Certificate::Claim { rule: "empty block".into() }));
                }
                match other.blocks()? {
                    Some(bl) => {
                        if let Some((x, y)) = bl.split_pair(t) {
                            return Ok(separating(Piece::single(&space, &x, &y), Witness::Pair { pair: (x, y), fault: "points are not connected".into() }));
                        }
                        let cb = t.difference(&other.carrier()?);
                        if let Some(x) = cb.some_point() {
                            return Ok(separating(Piece::single(&space, &x, &x), Witness::Pair { pair: (x.clone(), x), fault: "point outside the carrier".into() }));
                        }
                    }
                    None => return Ok(Verdict::Unknown { depth: 0 }),
                }
                let w = other.terminal_region()?;
                if t.difference(&w).is_finite() {
                    return Ok(Verdict::In(Certificate::Claim { rule: "block lies in the terminal region up to finitely many points".into() }));
                }
                for probe in block_probes(&t.difference(&w)) {
                    if let Verdict::Out { witness } = other.contains_pieces(&[Piece::Family(probe.clone())])? {
                        return Ok(separating(Piece::Family(probe), witness));
                    }
                }
                Ok(Verdict::Unknown { depth: 0 })
            }
        }
    }

    /// `self ⊆ other`.
    pub fn leq(&self, other: &Structure, budget: usize) -> Result<Verdict> {
        if self.space() != other.space() {
            return Err(CoarseError::SpaceMismatch("compared structures live on different spaces".into()));
        }
        let space = self.space();
        let c1 = self.carrier()?;
        let c2 = other.carrier()?;
        if let Some(x) = c1.difference(&c2).some_point() {
            let w = Witness::Pair { pair: (x.clone(), x.clone()), fault: "point outside the carrier".into() };
            return Ok(separating(Piece::single(&space, &x, &x), w));
        }
        // Structural rules on the right.
        match other {
            Structure::Subspace { parent, .. } => return Ok(self.leq(parent, budget)?.context("subspace parent")),
            Structure::Meet { a, b } => {
                let va = self.leq(a, budget)?;
                if !va.is_in() {
                    return Ok(va);
                }
                let vb = self.leq(b, budget)?;
                return Ok(match Verdict::all([va, vb]) {
                    Ok(parts) => Verdict::In(Certificate::Both { parts }),
                    Err(v) => v,
                });
            }
            Structure::Termination { parent } => {
                let extra = self.unital_core()?.difference(&parent.unital_core()?);
                if extra.is_finite() {
                    return Ok(Verdict::In(Certificate::Claim { rule: "unital core lies in the parent's unital core up to finitely many points".into() }));
                }
                let unit = Relation::local_unit(&extra);
                if self.contains(&unit)?.is_in() {
                    if let Verdict::Out { witness } = other.contains(&unit)? {
                        return separating_rel(other, &unit, witness);
                    }
                }
            }
            Structure::Ideal { parent, set } => {
                let v = self.leq(parent, budget)?;
                if !v.is_in() {
                    return Ok(v.context("ideal parent"));
                }
                let extra = self.unital_core()?.difference(&parent.near_core(set)?);
                if extra.is_finite() {
                    return Ok(Verdict::In(Certificate::Both { parts: vec![v.certificate().cloned().expect("in"), Certificate::Claim { rule: "unital core is near the ideal set".into() }] }));
                }
                let unit = Relation::local_unit(&extra);
                if self.contains(&unit)?.is_in() {
                    if let Verdict::Out { witness } = other.contains(&unit)? {
                        return separating_rel(other, &unit, witness);
                    }
                }
            }
            Structure::Quotient { parent, .. } | Structure::Connect { parent } | Structure::Join { parent, .. } => {
                let v = self.leq(parent, budget)?;
                if v.is_in() {
                    return Ok(v);
                }
            }
            Structure::Pullback { map, parent } if is_identity(map) => return self.leq(parent, budget),
            _ => {}
        }
        if self == other {
            return Ok(Verdict::In(Certificate::Claim { rule: "identical descriptors".into() }));
        }
        // Structural rules on the left.
        match self {
            Structure::Meet { a, b } => {
                for part in [a, b] {
                    let v = part.leq(other, budget)?;
                    if v.is_in() {
                        return Ok(v);
                    }
                }
                // Nested parts: the meet is the smaller one.
                if a.leq(b, budget)?.is_in() {
                    return a.leq(other, budget);
                }
                if b.leq(a, budget)?.is_in() {
                    return b.leq(other, budget);
                }
            }
            Structure::Subspace { parent, .. } | Structure::Ideal { parent, .. } => {
                let v = parent.leq(other, budget)?;
                if v.is_in() {
                    return Ok(v);
                }
            }
            Structure::Pullback { map, parent } if is_identity(map) => return parent.leq(other, budget),
            _ => {}
        }
        match self.presentation()? {
            Some(gens) => {
                let mut verdicts = Vec::new();
                for g in &gens {
                    let v = self.gen_in(other, g)?;
                    if v.is_out() {
                        return Ok(v);
                    }
                    verdicts.push(v);
                }
                Ok(match Verdict::all(verdicts) {
                    Ok(parts) => Verdict::In(Certificate::Both { parts }),
                    Err(v) => v,
                })
            }
            None => {
                for r in self.generators(budget)? {
                    if let Verdict::Out { witness } = other.contains(&r)? {
                        return separating_rel(other, &r, witness);
                    }
                }
                Ok(Verdict::Unknown { depth: budget })
            }
        }
    }

    pub fn structure_eq(&self, other: &Structure, budget: usize) -> Result<Verdict> {
        let a = self.leq(other, budget)?;
        if !a.is_in() {
            return Ok(a.context("left ⊄ right"));
        }
        let b = other.leq(self, budget)?;
        if !b.is_in() {
            return Ok(b.context("right ⊄ left"));
        }
        Ok(Verdict::In(Certificate::Both { parts: vec![a.certificate().cloned().expect("in"), b.certificate().cloned().expect("in")] }))
    }
}

/// Separating witness: a member of the left structure rejected by the right.
fn separating(probe: Piece, inner: Witness) -> Verdict {
    Verdict::Out(Witness::Separating { probe, inner: Box::new(inner) })
}

/// Narrows a rejected relation to one rejected piece.
fn separating_rel(other: &Structure, r: &Relation, fallback: Witness) -> Result<Verdict> {
    let space = other.space();
    for p in pieces_of(r).into_iter().flat_map(|p| normalize_piece(p, &space)) {
        if let Verdict::Out { witness } = other.piece_verdict(&p)? {
            return Ok(separating(p, witness));
        }
    }
    Ok(Verdict::Out(fallback))
}

/// Families inside `T × T` of unbounded width: a sheared family on one ray
/// and a cross family between two rays.
fn block_probes(t: &PointSet) -> Vec<Family> {
    let mut out = Vec::new();
    let inf: Vec<(&String, &UpSet)> = t.rays().iter().filter(|(_, u)| !u.is_finite()).collect();
    let lane = |u: &UpSet| -> (u64, u64) {
        let p = u.period();
        let r = u.enumerate(u.threshold() + p).into_iter().find(|&i| i >= u.threshold()).expect("infinite");
        (p, r)
    };
    if let Some((r, u)) = inf.first() {
        let (p, s) = lane(u);
        out.push(Family::new(
            Track::Affine { ray: (*r).clone(), a: p, b: s as i64 },
            Track::Affine { ray: (*r).clone(), a: 2 * p, b: s as i64 },
            UpSet::all(),
        ));
    }
    if inf.len() >= 2 {
        let (p1, s1) = lane(inf[0].1);
        let (p2, s2) = lane(inf[1].1);
        out.push(Family::new(
            Track::Affine { ray: inf[0].0.clone(), a: p1 * p2, b: s1 as i64 },
            Track::Affine { ray: inf[1].0.clone(), a: p1 * p2, b: s2 as i64 },
            UpSet::all(),
        ));
    }
    out
}

/// `S_m = U ∪ (ball(m) ∩ carrier)`: every unital subspace is contained in
/// the unital core up to finitely many carrier points.
pub fn sigma_filtration(d: &Structure, levels: usize) -> Result<Vec<PointSet>> {
    let u = d.unital_core().map_err(|e| CoarseError::NotSigmaUnital(e.to_string()))?;
    let c = d.carrier().map_err(|e| CoarseError::NotSigmaUnital(e.to_string()))?;
    let space = d.space();
    Ok((0..levels).map(|m| u.union(&space.ball(m as u64).intersect(&c))).collect())
}
